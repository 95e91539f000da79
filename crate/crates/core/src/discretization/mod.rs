//! Uniform meshes, the upwind DG space with `K = 1`, and assembly of the
//! matrix–vector form `U_Ω f_Ω + Σ_t f_Ω − Σ_s ρ = g_Ω`.

mod assembly;
mod block;
mod mesh;
mod space;

use std::io::Write;

pub use assembly::{
    assemble_reaction, assemble_streaming, assemble_volume_source, downwind_order, is_block_lower_triangular,
    DirectionOperator, Discretization,
};
pub use block::{BlockMatrix, SmallLu};
pub use mesh::{Element, Face, Mesh};
pub use space::DgSpace;

use crate::error::{Error, Result};

/// Writes a field as CSV: `element,x_center[,y_center],c0,c1,...` with one
/// row per element; `c_i` are the local coefficients in dof order.
pub fn write_field_csv(space: &DgSpace, field: &[f64], out: &mut impl Write) -> Result<()> {
    if field.len() != space.ndof() {
        return Err(Error::LengthMismatch {
            expected: space.ndof(),
            got: field.len(),
        });
    }
    let n = space.local_dofs();
    let two_d = space.dimension() == 2;
    let mut header = String::from("element,x_center");
    if two_d {
        header.push_str(",y_center");
    }
    for k in 0..n {
        header.push_str(&format!(",c{k}"));
    }
    writeln!(out, "{header}")?;
    for e in 0..space.mesh().num_elements() {
        let c = space.mesh().element(e).center();
        let mut line = format!("{e},{:.16e}", c[0]);
        if two_d {
            line.push_str(&format!(",{:.16e}", c[1]));
        }
        for v in &field[e * n..(e + 1) * n] {
            line.push_str(&format!(",{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a field written by [`write_field_csv`].
pub fn read_field_csv(space: &DgSpace, text: &str) -> Result<Vec<f64>> {
    let n = space.local_dofs();
    let skip = if space.dimension() == 2 { 3 } else { 2 };
    let mut field = vec![0.0; space.ndof()];
    let mut seen = 0;
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != skip + n {
            return Err(Error::Parse(format!("expected {} columns, got {}", skip + n, cols.len())));
        }
        let e: usize = cols[0].trim().parse().map_err(|_| Error::Parse(format!("bad element index `{}`", cols[0])))?;
        if e >= space.mesh().num_elements() {
            return Err(Error::Parse(format!("element {e} out of range")));
        }
        for k in 0..n {
            field[e * n + k] = cols[skip + k]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{}`", cols[skip + k])))?;
        }
        seen += 1;
    }
    if seen != space.mesh().num_elements() {
        return Err(Error::Parse(format!(
            "expected {} element rows, got {seen}",
            space.mesh().num_elements()
        )));
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    #[test]
    fn csv_round_trip() {
        let mesh = Mesh::new(Domain::rectangle((0.0, 1.0), (0.0, 1.0)), &[2, 3]).unwrap();
        let space = DgSpace::new(mesh, 1).unwrap();
        let f: Vec<f64> = (0..space.ndof()).map(|i| (i as f64).sin() * 1e-7).collect();
        let mut buf = Vec::new();
        write_field_csv(&space, &f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("element,x_center,y_center,c0,c1,c2,c3\n"));
        assert_eq!(read_field_csv(&space, &text).unwrap(), f);
    }
}
