use crate::angular::Direction;
use crate::error::{Error, Result};
use crate::model::{Point, ProblemSpec};

use super::block::BlockMatrix;
use super::mesh::Mesh;
use super::space::DgSpace;

/// Gauss points per sub-cell for the volumetric source.
const SOURCE_POINTS: usize = 6;
/// Target sub-cell width for source integration; sharp sources (the 2D
/// Gaussian has width ~0.07) need more than the default rule resolves.
const SOURCE_SUBCELL_WIDTH: f64 = 0.0625;

/// Streaming matrix, right-hand side and sweep order for one direction.
#[derive(Clone, Debug)]
pub struct DirectionOperator {
    pub direction: Direction,
    /// `U_Ω`, test index by row.
    pub streaming: BlockMatrix,
    /// `g_Ω`: volumetric source plus the inflow boundary term.
    pub source: Vec<f64>,
    /// Elements sorted so that all upwind neighbors come first.
    pub order: Vec<usize>,
}

/// Direction-independent DG operators of a problem: `Σ_t`, `Σ_s`, `g`.
#[derive(Clone, Debug)]
pub struct Discretization {
    space: DgSpace,
    problem: ProblemSpec,
    sigma_t: BlockMatrix,
    sigma_s: BlockMatrix,
    volume_source: Vec<f64>,
}

impl Discretization {
    /// Degree-1 space on a uniform mesh with `cells` per axis.
    pub fn new(problem: ProblemSpec, cells: &[usize]) -> Result<Self> {
        let mesh = Mesh::new(problem.domain(), cells)?;
        Self::with_space(problem, DgSpace::new(mesh, 1)?)
    }

    pub fn with_space(problem: ProblemSpec, space: DgSpace) -> Result<Self> {
        if space.mesh().domain() != problem.domain() {
            return Err(Error::Config("mesh and problem domains differ".into()));
        }
        let sigma_t = assemble_reaction(&space, |p| problem.sigma_t(p));
        let sigma_s = assemble_reaction(&space, |p| problem.sigma_s(p));
        let volume_source = assemble_volume_source(&space, |p| problem.source(p));
        Ok(Self {
            space,
            problem,
            sigma_t,
            sigma_s,
            volume_source,
        })
    }

    pub fn space(&self) -> &DgSpace {
        &self.space
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn ndof(&self) -> usize {
        self.space.ndof()
    }

    pub fn sigma_t(&self) -> &BlockMatrix {
        &self.sigma_t
    }

    pub fn sigma_s(&self) -> &BlockMatrix {
        &self.sigma_s
    }

    /// `g` without boundary contributions.
    pub fn volume_source(&self) -> &[f64] {
        &self.volume_source
    }

    fn check_direction(&self, dir: Direction) -> Result<()> {
        if dir.dimension() != self.space.dimension() {
            return Err(Error::Config(format!(
                "direction {dir:?} does not match a {}D problem",
                self.space.dimension()
            )));
        }
        Ok(())
    }

    /// `U_Ω` and its downwind element order.
    pub fn assemble_streaming(&self, dir: Direction) -> Result<(BlockMatrix, Vec<usize>)> {
        self.check_direction(dir)?;
        Ok((assemble_streaming(&self.space, dir), downwind_order(self.space.mesh(), dir)))
    }

    /// `g_Ω = g + b_Ω` with the inflow term moved to the right-hand side.
    pub fn assemble_source(&self, dir: Direction) -> Result<Vec<f64>> {
        self.check_direction(dir)?;
        let mut g = self.volume_source.clone();
        add_inflow_term(&self.space, &self.problem, dir, &mut g);
        Ok(g)
    }

    pub fn direction_operator(&self, dir: Direction) -> Result<DirectionOperator> {
        let (streaming, order) = self.assemble_streaming(dir)?;
        Ok(DirectionOperator {
            direction: dir,
            streaming,
            source: self.assemble_source(dir)?,
            order,
        })
    }

    /// Operator with zero source and zero inflow (correction problems).
    pub fn homogeneous_operator(&self, dir: Direction) -> Result<DirectionOperator> {
        let (streaming, order) = self.assemble_streaming(dir)?;
        Ok(DirectionOperator {
            direction: dir,
            streaming,
            source: vec![0.0; self.ndof()],
            order,
        })
    }
}

/// Block-diagonal `∫ σ φ_k φ_l`.
pub fn assemble_reaction(space: &DgSpace, sigma: impl Fn(Point) -> f64) -> BlockMatrix {
    space.weighted_gram(sigma)
}

/// `∫ G φ_k` on composite Gauss rules fine enough for sharp sources.
pub fn assemble_volume_source(space: &DgSpace, source: impl Fn(Point) -> f64) -> Vec<f64> {
    let n = space.local_dofs();
    let mesh = space.mesh();
    let h = mesh.hx().max(mesh.hy());
    let sub = ((h / SOURCE_SUBCELL_WIDTH).ceil() as usize).clamp(1, 32);
    let mut g = vec![0.0; space.ndof()];
    for e in 0..mesh.num_elements() {
        for (p, w) in space.volume_points(e, SOURCE_POINTS, sub) {
            let gp = source(p);
            if gp == 0.0 {
                continue;
            }
            let (phi, _) = space.basis(e, p);
            for k in 0..n {
                g[e * n + k] += w * gp * phi[k];
            }
        }
    }
    g
}

/// Upwind DG streaming matrix:
/// `(U_Ω)_{kl} = -∫ (Ω·∇φ_k) φ_l + ∮ Ĥ(Ω, φ_l, n) φ_k`, where `Ĥ` takes the
/// interior trace on outflow faces and the neighbor trace on inflow faces.
/// Inflow boundary faces carry no matrix coupling.
pub fn assemble_streaming(space: &DgSpace, dir: Direction) -> BlockMatrix {
    let n = space.local_dofs();
    let mesh = space.mesh();
    let omega = dir.velocity();
    let npts = space.default_points();
    let mut u = BlockMatrix::zeros(mesh.num_elements(), n);
    for e in 0..mesh.num_elements() {
        {
            let blk = u.diag_mut(e);
            for (p, w) in space.volume_points(e, npts, 1) {
                let (phi, grad) = space.basis(e, p);
                for k in 0..n {
                    let adv = omega[0] * grad[k][0] + omega[1] * grad[k][1];
                    for l in 0..n {
                        blk[k * n + l] -= w * adv * phi[l];
                    }
                }
            }
        }
        for &face in mesh.faces() {
            let nrm = face.normal();
            let a = omega[0] * nrm[0] + omega[1] * nrm[1];
            if a > 0.0 {
                let blk = u.diag_mut(e);
                for (p, w) in space.face_points(e, face, npts) {
                    let (phi, _) = space.basis(e, p);
                    for k in 0..n {
                        for l in 0..n {
                            blk[k * n + l] += w * a * phi[k] * phi[l];
                        }
                    }
                }
            } else if a < 0.0 {
                if let Some(nb) = mesh.neighbor(e, face) {
                    let pts = space.face_points(e, face, npts);
                    let blk = u.block_mut(e, nb);
                    for (p, w) in pts {
                        let (phi, _) = space.basis(e, p);
                        let (psi, _) = space.basis(nb, p);
                        for k in 0..n {
                            for l in 0..n {
                                blk[k * n + l] += w * a * phi[k] * psi[l];
                            }
                        }
                    }
                }
            }
        }
    }
    u
}

/// Adds `-∫ (Ω·n) f_in φ_k` over inflow boundary faces.
fn add_inflow_term(space: &DgSpace, problem: &ProblemSpec, dir: Direction, g: &mut [f64]) {
    let n = space.local_dofs();
    let mesh = space.mesh();
    let omega = dir.velocity();
    for e in 0..mesh.num_elements() {
        for &face in mesh.faces() {
            let nrm = face.normal();
            let a = omega[0] * nrm[0] + omega[1] * nrm[1];
            if a < 0.0 && mesh.neighbor(e, face).is_none() {
                for (p, w) in space.face_points(e, face, space.default_points()) {
                    let fin = problem.inflow(p, dir);
                    if fin == 0.0 {
                        continue;
                    }
                    let (phi, _) = space.basis(e, p);
                    for k in 0..n {
                        g[e * n + k] -= w * a * fin * phi[k];
                    }
                }
            }
        }
    }
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Elements sorted by `(sign(Ω_x)·column, sign(Ω_y)·row)`.
pub fn downwind_order(mesh: &Mesh, dir: Direction) -> Vec<usize> {
    let [vx, vy] = dir.velocity();
    let (sx, sy) = (sign(vx), sign(vy));
    let mut order: Vec<usize> = (0..mesh.num_elements()).collect();
    order.sort_by_key(|&e| {
        let (ix, iy) = ((e % mesh.nx()) as i64, (e / mesh.nx()) as i64);
        (sx * ix, sy * iy)
    });
    order
}

/// True if every stored coupling of `matrix` points to an element earlier in `order`.
pub fn is_block_lower_triangular(matrix: &BlockMatrix, order: &[usize]) -> bool {
    let mut pos = vec![0usize; order.len()];
    for (i, &e) in order.iter().enumerate() {
        pos[e] = i;
    }
    (0..matrix.num_blocks()).all(|e| {
        matrix
            .off_diagonal(e)
            .iter()
            .all(|(c, blk)| pos[*c] < pos[e] || blk.iter().all(|v| *v == 0.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{gauss_legendre, uniform_circle};
    use crate::model::{build_example, Domain, ExampleId};
    use crate::poly::gauss_rule_on;

    fn unit_slab() -> Discretization {
        let problem = ProblemSpec::homogeneous("unit", Domain::interval(0.0, 1.0), 0.0, 1.0, 0.0);
        Discretization::new(problem, &[1]).unwrap()
    }

    #[test]
    fn single_element_streaming_matches_hand_integrals() {
        // Basis {1, √3(2x-1)} on [0,1], v = 1: U_kl = -∫ φ_k' φ_l + φ_k(1) φ_l(1).
        // Oracle: 8-point Gauss for the volume term, explicit traces at x = 1.
        let disc = unit_slab();
        let (u, _) = disc.assemble_streaming(Direction::Slab(1.0)).unwrap();
        let s3 = 3f64.sqrt();
        let phi = |k: usize, x: f64| if k == 0 { 1.0 } else { s3 * (2.0 * x - 1.0) };
        let dphi = |k: usize| if k == 0 { 0.0 } else { 2.0 * s3 };
        let (xs, ws) = gauss_rule_on(8, 0.0, 1.0);
        for k in 0..2 {
            for l in 0..2 {
                let vol: f64 = xs.iter().zip(&ws).map(|(x, w)| -w * dphi(k) * phi(l, *x)).sum();
                let expect = vol + phi(k, 1.0) * phi(l, 1.0);
                assert!((u.get(k, l) - expect).abs() < 1e-13, "({k},{l})");
            }
        }
        // Closed form: [[1, √3], [-√3, 3]].
        assert!((u.get(0, 1) - s3).abs() < 1e-13);
        assert!((u.get(1, 0) + s3).abs() < 1e-13);
        assert!((u.get(1, 1) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn interior_face_uses_left_trace_for_positive_v() {
        let problem = ProblemSpec::homogeneous("two", Domain::interval(0.0, 2.0), 0.0, 1.0, 0.0);
        let disc = Discretization::new(problem, &[2]).unwrap();
        let v = 0.5;
        let (u, _) = disc.assemble_streaming(Direction::Slab(v)).unwrap();
        // Element 1 couples to element 0 through -v φ_k^{(1)}(1) φ_l^{(0)}(1).
        let s3 = 3f64.sqrt();
        let left_trace = [1.0, s3];
        let right_elem_at_face = [1.0, -s3];
        for k in 0..2 {
            for l in 0..2 {
                let expect = -v * right_elem_at_face[k] * left_trace[l];
                assert!((u.get(2 + k, l) - expect).abs() < 1e-13);
                assert_eq!(u.get(k, 2 + l), 0.0);
            }
        }
    }

    #[test]
    fn streaming_is_block_lower_triangular_in_downwind_order() {
        let d1 = Discretization::new(build_example(ExampleId::Slab(1), None).unwrap(), &[20]).unwrap();
        for dir in gauss_legendre(8).unwrap().directions() {
            let (u, order) = d1.assemble_streaming(*dir).unwrap();
            let a = u.plus_block_diagonal(d1.sigma_t());
            assert!(is_block_lower_triangular(&a, &order));
        }
        let d2 = Discretization::new(build_example(ExampleId::Plane(1), None).unwrap(), &[10, 10]).unwrap();
        let mut dirs: Vec<Direction> = uniform_circle(8).unwrap().directions().to_vec();
        dirs.extend([0.0, 0.5, 1.0, 1.5].map(|t| Direction::planar(t * std::f64::consts::PI)));
        for dir in dirs {
            let (u, order) = d2.assemble_streaming(dir).unwrap();
            assert!(is_block_lower_triangular(&u, &order), "{dir:?}");
            // And the reverse order is not, unless the direction is axis-aligned.
            let rev: Vec<usize> = order.iter().rev().copied().collect();
            assert!(!is_block_lower_triangular(&u, &rev));
        }
    }

    #[test]
    fn reaction_matrices() {
        let d = Discretization::new(build_example(ExampleId::Plane(1), None).unwrap(), &[10, 10]).unwrap();
        let space = d.space();
        let c = assemble_reaction(space, |_| 3.5);
        for e in 0..space.mesh().num_elements() {
            for (a, m) in c.diag(e).iter().zip(space.mass().diag(e)) {
                assert!((a - 3.5 * m).abs() < 1e-13);
            }
        }
        for e in 0..space.mesh().num_elements() {
            let blk = d.sigma_t().diag(e);
            for k in 0..4 {
                for l in 0..4 {
                    assert!((blk[k * 4 + l] - blk[l * 4 + k]).abs() < 1e-14);
                }
            }
        }
        assert!(d.sigma_t().is_block_diagonal());
    }

    #[test]
    fn zero_data_gives_zero_source() {
        let problem = ProblemSpec::homogeneous("z", Domain::interval(0.0, 3.0), 1.0, 2.0, 0.0);
        let d = Discretization::new(problem, &[6]).unwrap();
        assert!(d.assemble_source(Direction::Slab(0.4)).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn example_4_inflow_term() {
        let d = Discretization::new(build_example(ExampleId::Slab(4), None).unwrap(), &[88]).unwrap();
        let v = 0.3;
        let g = d.assemble_source(Direction::Slab(v)).unwrap();
        let h = 0.125f64;
        // Hand evaluation: v · 5 · φ_k(0) with φ_0 = 1/√h, φ_1 = -√(3/h) at the left end.
        assert!((g[0] - v * 5.0 / h.sqrt()).abs() < 1e-12);
        assert!((g[1] + v * 5.0 * (3.0 / h).sqrt()).abs() < 1e-12);
        assert!(g[2..].iter().all(|x| *x == 0.0));
        let g = d.assemble_source(Direction::Slab(-v)).unwrap();
        assert!(g.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn gaussian_source_matches_fine_quadrature() {
        // Oracle: 10-point tensor Gauss per element on an 8×8 sub-grid.
        for cells in [40, 10] {
            let d = Discretization::new(build_example(ExampleId::Plane(2), None).unwrap(), &[cells, cells]).unwrap();
            let space = d.space();
            let g = d.volume_source();
            let problem = d.problem();
            let mut worst = 0.0f64;
            for e in 0..space.mesh().num_elements() {
                let c = space.mesh().element(e).center();
                if (c[0] - 5.0).abs() > 1.5 || (c[1] - 5.0).abs() > 1.5 {
                    continue;
                }
                let mut local = [0.0; 4];
                for (p, w) in space.volume_points(e, 10, 8) {
                    let (phi, _) = space.basis(e, p);
                    for k in 0..4 {
                        local[k] += w * problem.source(p) * phi[k];
                    }
                }
                for k in 0..4 {
                    worst = worst.max((g[e * 4 + k] - local[k]).abs());
                }
            }
            assert!(worst < 1e-10, "cells={cells} worst={worst}");
        }
    }
}
