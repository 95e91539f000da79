//! Angular quadratures, the symmetry map, and direction sample sets.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::poly::gauss_legendre_rule;

const TWO_PI: f64 = 2.0 * PI;

/// A transport direction in canonical form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction {
    /// Slab geometry: `v = cos(polar angle)` in `[-1, 1]`.
    Slab(f64),
    /// Planar: angle `θ` in `[0, 2π)`, `Ω = (cos θ, sin θ)`.
    Planar(f64),
}

impl Direction {
    /// Planar direction with `θ` reduced to `[0, 2π)`.
    pub fn planar(theta: f64) -> Self {
        let mut t = theta.rem_euclid(TWO_PI);
        if t >= TWO_PI {
            t = 0.0;
        }
        Direction::Planar(t)
    }

    pub fn dimension(&self) -> usize {
        match self {
            Direction::Slab(_) => 1,
            Direction::Planar(_) => 2,
        }
    }

    /// The stored scalar (`v` or `θ`).
    pub fn value(&self) -> f64 {
        match *self {
            Direction::Slab(v) | Direction::Planar(v) => v,
        }
    }

    /// Velocity vector; the second component is zero in slab geometry.
    pub fn velocity(&self) -> [f64; 2] {
        match *self {
            Direction::Slab(v) => [v, 0.0],
            Direction::Planar(t) => [t.cos(), t.sin()],
        }
    }

    /// Antipodal direction: `-v` in 1D, `mod(θ + π, 2π)` in 2D.
    pub fn symmetric_counterpart(&self) -> Self {
        match *self {
            Direction::Slab(v) => Direction::Slab(-v),
            Direction::Planar(t) => Direction::planar(t + PI),
        }
    }

    /// Distance used to match directions computed along different float paths.
    pub fn distance(&self, other: &Direction) -> f64 {
        match (*self, *other) {
            (Direction::Slab(a), Direction::Slab(b)) => (a - b).abs(),
            (Direction::Planar(a), Direction::Planar(b)) => {
                let d = (a - b).rem_euclid(TWO_PI);
                d.min(TWO_PI - d)
            }
            _ => f64::INFINITY,
        }
    }
}

/// Ordered directions with normalized weights (`Σ ω_j = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct AngularQuadrature {
    directions: Vec<Direction>,
    weights: Vec<f64>,
}

impl AngularQuadrature {
    /// Builds a quadrature, checking the weight and distinctness invariants.
    pub fn new(directions: Vec<Direction>, weights: Vec<f64>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Config("quadrature has no directions".into()));
        }
        if directions.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: directions.len(),
                got: weights.len(),
            });
        }
        let dim = directions[0].dimension();
        if directions.iter().any(|d| d.dimension() != dim) {
            return Err(Error::Config("quadrature mixes 1D and 2D directions".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Config("quadrature weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("quadrature weights sum to {total}, not 1")));
        }
        for (i, a) in directions.iter().enumerate() {
            if directions[..i].contains(a) {
                return Err(Error::Config(format!("duplicate direction {a:?}")));
            }
        }
        Ok(Self { directions, weights })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.directions[0].dimension()
    }

    /// Discrete average `⟨g⟩_h = Σ ω_j g(Ω_j)`.
    pub fn average(&self, g: impl Fn(Direction) -> f64) -> f64 {
        self.directions
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w * g(d))
            .sum()
    }

    /// Index of the node nearest to `dir`, if one lies within `tol`.
    pub fn find(&self, dir: &Direction, tol: f64) -> Option<usize> {
        let (idx, dist) = self
            .directions
            .iter()
            .enumerate()
            .map(|(i, d)| (i, d.distance(dir)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        (dist <= tol).then_some(idx)
    }

    /// Index of the node matching the symmetric counterpart of node `i`.
    pub fn counterpart_index(&self, i: usize) -> Option<usize> {
        let target = self.directions[i].symmetric_counterpart();
        self.find(&target, 1e-12)
    }
}

/// N-point Gauss–Legendre directions on `[-1, 1]` with weights halved to sum to 1.
pub fn gauss_legendre(n: usize) -> Result<AngularQuadrature> {
    if n == 0 {
        return Err(Error::Config("Gauss-Legendre quadrature needs N >= 1".into()));
    }
    let (x, w) = gauss_legendre_rule(n);
    Ok(AngularQuadrature {
        directions: x.into_iter().map(Direction::Slab).collect(),
        weights: w.into_iter().map(|wi| 0.5 * wi).collect(),
    })
}

/// `2N` equally spaced angles `θ_j = (2j-1)π/(2N)` with weights `1/(2N)`.
pub fn uniform_circle(n: usize) -> Result<AngularQuadrature> {
    if n == 0 {
        return Err(Error::Config("circle quadrature needs N >= 1".into()));
    }
    let count = 2 * n;
    let directions = (1..=count)
        .map(|j| Direction::planar((2 * j - 1) as f64 * PI / count as f64))
        .collect();
    Ok(AngularQuadrature {
        directions,
        weights: vec![1.0 / count as f64; count],
    })
}

/// The small quadrature used for the coupled initial solve of the greedy
/// algorithm: Gauss–Legendre in 1D, `θ_j = 2(j-1)π/N_0` in 2D.
pub fn initial_set(dimension: usize, n0: usize) -> Result<AngularQuadrature> {
    if n0 < 2 {
        return Err(Error::Config(format!("initial set needs N_0 >= 2, got {n0}")));
    }
    match dimension {
        1 => gauss_legendre(n0),
        2 => Ok(AngularQuadrature {
            directions: (0..n0)
                .map(|j| Direction::planar(2.0 * j as f64 * PI / n0 as f64))
                .collect(),
            weights: vec![1.0 / n0 as f64; n0],
        }),
        d => Err(Error::Config(format!("unsupported dimension {d}"))),
    }
}

/// The `S_2` correction set: 2 directions in 1D, 4 in 2D.
pub fn s2_set(dimension: usize) -> Result<AngularQuadrature> {
    match dimension {
        1 => gauss_legendre(2),
        2 => uniform_circle(2),
        d => Err(Error::Config(format!("unsupported dimension {d}"))),
    }
}

/// Insertion-ordered set of directions; membership is exact equality of the
/// stored canonical value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSet {
    items: Vec<Direction>,
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, dir: &Direction) -> bool {
        self.items.iter().any(|d| d == dir)
    }

    /// Inserts `dir`; returns `false` if it was already present.
    pub fn insert(&mut self, dir: Direction) -> bool {
        if self.contains(&dir) {
            false
        } else {
            self.items.push(dir);
            true
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn as_slice(&self) -> &[Direction] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = &Direction> {
        self.items.iter()
    }
}

impl FromIterator<Direction> for SampleSet {
    fn from_iter<T: IntoIterator<Item = Direction>>(iter: T) -> Self {
        let mut set = SampleSet::new();
        for d in iter {
            set.insert(d);
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_small_cases() {
        let q = gauss_legendre(1).unwrap();
        assert_eq!(q.directions(), &[Direction::Slab(0.0)]);
        assert_eq!(q.weights(), &[1.0]);

        // Oracle: roots of P_2 are ±1/√3, weights 1 each before halving.
        let q = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((q.directions()[0].value() + r).abs() < 1e-15);
        assert!((q.directions()[1].value() - r).abs() < 1e-15);
        assert!((q.weights()[0] - 0.5).abs() < 1e-15);
        assert!((q.weights()[1] - 0.5).abs() < 1e-15);
        for k in 0..4 {
            let avg = q.average(|d| d.value().powi(k));
            let exact = if k % 2 == 1 { 0.0 } else { 1.0 / (k as f64 + 1.0) };
            assert!((avg - exact).abs() < 1e-15);
        }

        let q = gauss_legendre(24).unwrap();
        assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(gauss_legendre(0).is_err());
        assert!(uniform_circle(0).is_err());
        assert!(initial_set(1, 1).is_err());
        assert!(initial_set(2, 0).is_err());
        assert!(s2_set(3).is_err());
    }

    #[test]
    fn uniform_circle_nodes() {
        let q = uniform_circle(2).unwrap();
        let expected = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0];
        for (d, e) in q.directions().iter().zip(expected) {
            assert!((d.value() - e).abs() < 1e-15);
        }
        assert!(q.weights().iter().all(|&w| w == 0.25));

        let q = uniform_circle(1).unwrap();
        assert!((q.directions()[0].value() - PI / 2.0).abs() < 1e-15);
        assert!((q.directions()[1].value() - 3.0 * PI / 2.0).abs() < 1e-15);
        assert_eq!(q.weights(), &[0.5, 0.5]);

        // Two nodes at π/2, 3π/2 give ⟨cos²⟩ = 0; the identity needs at least three.
        assert!(uniform_circle(1).unwrap().average(|d| d.velocity()[0].powi(2)) < 1e-30);
        for n in 2..=40 {
            let q = uniform_circle(n).unwrap();
            let c2 = q.average(|d| d.velocity()[0].powi(2));
            assert!((c2 - 0.5).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn initial_sets() {
        assert_eq!(initial_set(1, 2).unwrap(), gauss_legendre(2).unwrap());
        let q = initial_set(2, 4).unwrap();
        let expected = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
        for (d, e) in q.directions().iter().zip(expected) {
            assert!((d.value() - e).abs() < 1e-15);
        }
        assert!(q.weights().iter().all(|&w| w == 0.25));
        let q = initial_set(2, 8).unwrap();
        assert_eq!(q.len(), 8);
        assert_eq!(q.directions()[0], Direction::Planar(0.0));
        assert!((q.directions()[1].value() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn counterparts() {
        assert_eq!(Direction::Slab(0.3).symmetric_counterpart(), Direction::Slab(-0.3));
        let t = Direction::planar(PI / 8.0).symmetric_counterpart();
        assert!((t.value() - 9.0 * PI / 8.0).abs() < 1e-15);
        for d in [Direction::Slab(0.7), Direction::Slab(-1.0)] {
            assert_eq!(d.symmetric_counterpart().symmetric_counterpart(), d);
        }
        let d = Direction::planar(1.1);
        assert!(d.symmetric_counterpart().symmetric_counterpart().distance(&d) < 1e-15);
    }

    #[test]
    fn s2_sets() {
        let q = s2_set(1).unwrap();
        assert_eq!(q.len(), 2);
        assert!((q.directions()[1].value() - 0.577_350_269_189_625_8).abs() < 1e-15);
        let q = s2_set(2).unwrap();
        assert_eq!(q, uniform_circle(2).unwrap());
        assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_set_dedups() {
        let mut s = SampleSet::new();
        assert!(s.insert(Direction::Slab(0.5)));
        assert!(!s.insert(Direction::Slab(0.5)));
        assert!(s.insert(Direction::Slab(-0.5)));
        assert_eq!(s.len(), 2);
        assert!(s.contains(&Direction::Slab(-0.5)));
        assert!(!s.contains(&Direction::Slab(0.25)));
    }

    #[test]
    fn quadrature_validation() {
        assert!(AngularQuadrature::new(vec![Direction::Slab(0.1)], vec![0.5]).is_err());
        assert!(AngularQuadrature::new(
            vec![Direction::Slab(0.1), Direction::Slab(0.1)],
            vec![0.5, 0.5]
        )
        .is_err());
        assert!(AngularQuadrature::new(vec![Direction::Slab(0.1)], vec![1.0]).is_ok());
    }
}
