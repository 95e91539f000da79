use crate::error::{Error, Result};
use crate::model::Point;
use crate::poly::{gauss_rule_on, legendre_with_derivatives};

use super::block::{BlockMatrix, SmallLu};
use super::mesh::{Element, Face, Mesh};

/// Piecewise `Q^K` space with an element-wise orthonormal tensor Legendre basis.
///
/// Local dof `a + (K+1)·b` is `ψ_a(x) ψ_b(y)` with
/// `ψ_a = √((2a+1)/h) P_a(ξ)` on the element's axis extent.
#[derive(Clone, Debug)]
pub struct DgSpace {
    mesh: Mesh,
    degree: usize,
    nloc: usize,
    mass: BlockMatrix,
}

impl DgSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("the DG degree must be at least 1".into()));
        }
        let nloc = (degree + 1).pow(mesh.dimension() as u32);
        let mut space = Self {
            mesh,
            degree,
            nloc,
            mass: BlockMatrix::zeros(0, nloc),
        };
        space.mass = space.weighted_gram(|_| 1.0);
        Ok(space)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.mesh.dimension()
    }

    pub fn local_dofs(&self) -> usize {
        self.nloc
    }

    pub fn ndof(&self) -> usize {
        self.nloc * self.mesh.num_elements()
    }

    pub fn mass(&self) -> &BlockMatrix {
        &self.mass
    }

    /// Quadrature points per axis for element integrals.
    pub fn default_points(&self) -> usize {
        self.degree + 2
    }

    fn axis_basis(&self, (lo, hi): (f64, f64), v: f64) -> (Vec<f64>, Vec<f64>) {
        let h = hi - lo;
        let xi = (2.0 * v - lo - hi) / h;
        let (p, dp) = legendre_with_derivatives(self.degree, xi);
        let mut vals = Vec::with_capacity(self.degree + 1);
        let mut ders = Vec::with_capacity(self.degree + 1);
        for a in 0..=self.degree {
            let s = ((2 * a + 1) as f64 / h).sqrt();
            vals.push(s * p[a]);
            ders.push(s * dp[a] * 2.0 / h);
        }
        (vals, ders)
    }

    /// Basis values and gradients of element `e` at `p` (polynomial extension,
    /// so face points evaluate one-sided traces).
    pub fn basis(&self, e: usize, p: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let el = self.mesh.element(e);
        let (vx, dx) = self.axis_basis(el.x, p[0]);
        if self.dimension() == 1 {
            return (vx, dx.into_iter().map(|d| [d, 0.0]).collect());
        }
        let (vy, dy) = self.axis_basis(el.y, p[1]);
        let k1 = self.degree + 1;
        let mut vals = vec![0.0; self.nloc];
        let mut grads = vec![[0.0; 2]; self.nloc];
        for b in 0..k1 {
            for a in 0..k1 {
                vals[a + k1 * b] = vx[a] * vy[b];
                grads[a + k1 * b] = [dx[a] * vy[b], vx[a] * dy[b]];
            }
        }
        (vals, grads)
    }

    /// Tensor Gauss points of element `e` with `npts` per axis, each axis
    /// split into `sub` equal pieces.
    pub fn volume_points(&self, e: usize, npts: usize, sub: usize) -> Vec<(Point, f64)> {
        let el = self.mesh.element(e);
        let xs = composite_rule(el.x, npts, sub);
        if self.dimension() == 1 {
            return xs.into_iter().map(|(x, w)| ([x, 0.0], w)).collect();
        }
        let ys = composite_rule(el.y, npts, sub);
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &(y, wy) in &ys {
            for &(x, wx) in &xs {
                out.push(([x, y], wx * wy));
            }
        }
        out
    }

    /// Gauss points on a face of element `e`; a single unit-weight point in 1D.
    pub fn face_points(&self, e: usize, face: Face, npts: usize) -> Vec<(Point, f64)> {
        let el: Element = self.mesh.element(e);
        match face {
            Face::Left | Face::Right => {
                let x = if face == Face::Left { el.x.0 } else { el.x.1 };
                if self.dimension() == 1 {
                    vec![([x, 0.0], 1.0)]
                } else {
                    composite_rule(el.y, npts, 1).into_iter().map(|(y, w)| ([x, y], w)).collect()
                }
            }
            Face::Bottom | Face::Top => {
                let y = if face == Face::Bottom { el.y.0 } else { el.y.1 };
                composite_rule(el.x, npts, 1).into_iter().map(|(x, w)| ([x, y], w)).collect()
            }
        }
    }

    /// Block-diagonal Gram matrix `∫ w φ_k φ_l` with the default rule.
    pub fn weighted_gram(&self, weight: impl Fn(Point) -> f64) -> BlockMatrix {
        let n = self.nloc;
        let mut out = BlockMatrix::zeros(self.mesh.num_elements(), n);
        for e in 0..self.mesh.num_elements() {
            let blk = out.diag_mut(e);
            for (p, w) in self.volume_points(e, self.default_points(), 1) {
                let (phi, _) = self.basis(e, p);
                let wp = w * weight(p);
                for k in 0..n {
                    for l in 0..n {
                        blk[k * n + l] += wp * phi[k] * phi[l];
                    }
                }
            }
        }
        out
    }

    fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.ndof() {
            return Err(Error::LengthMismatch {
                expected: self.ndof(),
                got: field.len(),
            });
        }
        Ok(())
    }

    /// `√(fᵀ M f)`.
    pub fn l2_norm(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        let mf = self.mass.mul_vec(field);
        Ok(field.iter().zip(&mf).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }

    /// L² distance between two fields.
    pub fn l2_distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(b)?;
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.l2_norm(&diff)
    }

    /// Point value; interior interfaces take the left (lower) element's trace.
    pub fn eval(&self, field: &[f64], p: Point) -> Result<f64> {
        self.check_len(field)?;
        let e = self.mesh.locate(p)?;
        let (phi, _) = self.basis(e, p);
        let local = &field[e * self.nloc..(e + 1) * self.nloc];
        Ok(phi.iter().zip(local).map(|(a, b)| a * b).sum())
    }

    /// L² projection of a function, integrated with `npts` points per axis.
    pub fn project(&self, f: impl Fn(Point) -> f64, npts: usize) -> Vec<f64> {
        let n = self.nloc;
        let mut out = vec![0.0; self.ndof()];
        for e in 0..self.mesh.num_elements() {
            let local = &mut out[e * n..(e + 1) * n];
            for (p, w) in self.volume_points(e, npts, 1) {
                let (phi, _) = self.basis(e, p);
                let fp = f(p);
                for k in 0..n {
                    local[k] += w * fp * phi[k];
                }
            }
            let lu = SmallLu::new(self.mass.diag(e), n).expect("mass block is SPD");
            lu.solve(local);
        }
        out
    }
}

fn composite_rule((a, b): (f64, f64), npts: usize, sub: usize) -> Vec<(f64, f64)> {
    let sub = sub.max(1);
    let h = (b - a) / sub as f64;
    let mut out = Vec::with_capacity(npts * sub);
    for s in 0..sub {
        let lo = a + h * s as f64;
        let (x, w) = gauss_rule_on(npts, lo, lo + h);
        out.extend(x.into_iter().zip(w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    fn slab(n: usize, len: f64) -> DgSpace {
        DgSpace::new(Mesh::new(Domain::interval(0.0, len), &[n]).unwrap(), 1).unwrap()
    }

    #[test]
    fn dof_counts() {
        assert_eq!(slab(1, 1.0).ndof(), 2);
        let sq = Mesh::new(Domain::rectangle((0.0, 10.0), (0.0, 10.0)), &[40, 40]).unwrap();
        assert_eq!(DgSpace::new(sq, 1).unwrap().ndof(), 6400);
    }

    #[test]
    fn mass_is_identity_for_orthonormal_basis() {
        let sq = Mesh::new(Domain::rectangle((0.0, 1.0), (0.0, 2.0)), &[3, 2]).unwrap();
        for space in [slab(5, 3.0), DgSpace::new(sq, 1).unwrap()] {
            let n = space.local_dofs();
            for e in 0..space.mesh().num_elements() {
                for k in 0..n {
                    for l in 0..n {
                        let expect = if k == l { 1.0 } else { 0.0 };
                        assert!((space.mass().diag(e)[k * n + l] - expect).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn norms_and_evaluation() {
        let space = slab(7, 10.0);
        assert_eq!(space.l2_norm(&vec![0.0; space.ndof()]).unwrap(), 0.0);
        let one = space.project(|_| 1.0, 3);
        assert!((space.l2_norm(&one).unwrap() - 10f64.sqrt()).abs() < 1e-13);
        assert!((space.eval(&one, [4.321, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        let lin = space.project(|p| p[0], 3);
        for x in [0.0, 0.3, 5.0, 9.99] {
            assert!((space.eval(&lin, [x, 0.0]).unwrap() - x).abs() < 1e-12);
        }
        assert!(space.l2_norm(&[1.0]).is_err());
        assert!(space.eval(&one, [11.0, 0.0]).is_err());
    }

    #[test]
    fn interface_evaluation_takes_left_trace() {
        let space = slab(2, 2.0);
        // f = 0 on the left element, f = 1 on the right element.
        let f = space.project(|p| if p[0] < 1.0 { 0.0 } else { 1.0 }, 3);
        assert!(space.eval(&f, [1.0, 0.0]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn l2_norm_matches_pointwise_quadrature() {
        // Oracle: evaluate the piecewise polynomial pointwise and integrate f² with 10 points per axis.
        let sq = Mesh::new(Domain::rectangle((0.0, 2.0), (-1.0, 1.0)), &[3, 4]).unwrap();
        let space = DgSpace::new(sq, 1).unwrap();
        let f: Vec<f64> = (0..space.ndof()).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let mut acc = 0.0;
        for e in 0..space.mesh().num_elements() {
            for (p, w) in space.volume_points(e, 10, 1) {
                let (phi, _) = space.basis(e, p);
                let v: f64 = phi.iter().zip(&f[e * 4..e * 4 + 4]).map(|(a, b)| a * b).sum();
                acc += w * v * v;
            }
        }
        assert!((space.l2_norm(&f).unwrap() - acc.sqrt()).abs() < 1e-12);
    }
}
