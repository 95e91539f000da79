use std::f64::consts::PI;

use faer::Mat;

use super::*;
use crate::angular::{gauss_legendre, Direction};
use crate::discretization::Discretization;
use crate::full_order::{weighted_average, SweepWorkspace};
use crate::linalg::DenseLu;
use crate::model::{build_example, constant, Domain, ExampleId, ProblemSpec};

/// Deterministic values in [-1, 1).
fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

fn columns(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..m).map(|j| pseudo_random(n, seed + j as u64)).collect()
}

#[test]
fn spectral_ratio_of_orthogonal_columns() {
    let k = 4;
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..10).map(|i| if i == 2 * j { 3.0 } else { 0.0 }).collect())
        .collect();
    let b = orthonormalize(&cols).unwrap();
    assert!((b.spectral_ratio - 0.25).abs() < 1e-14);
    assert_eq!(b.rank(), 4);
}

#[test]
fn rank_one_snapshots_are_truncated() {
    let a = pseudo_random(12, 7);
    let b: Vec<f64> = a.iter().map(|x| -2.0 * x).collect();
    let basis = orthonormalize(&[a, b]).unwrap();
    assert!(basis.spectral_ratio < 1e-14);
    assert_eq!(basis.rank(), 1);
    assert!(orthonormalize(&[vec![0.0; 5]]).is_err());
}

#[test]
fn svd_reconstructs_and_is_orthonormal() {
    let cols = columns(50, 6, 11);
    let b = orthonormalize(&cols).unwrap();
    assert_eq!(b.rank(), 6);
    assert!(b.sigma.windows(2).all(|w| w[0] >= w[1]) && b.sigma.iter().all(|s| *s > 0.0));
    assert!(b.spectral_ratio > 0.0 && b.spectral_ratio <= 1.0 / 6.0);
    for i in 0..6 {
        for j in 0..6 {
            let d: f64 = b.columns[i].iter().zip(&b.columns[j]).map(|(x, y)| x * y).sum();
            assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    for (j, col) in cols.iter().enumerate() {
        for i in 0..50 {
            let r: f64 = (0..6).map(|k| b.columns[k][i] * b.sigma[k] * b.v[(j, k)]).sum();
            assert!((r - col[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn indicator_identities() {
    let cols = columns(30, 5, 3);
    let b = orthonormalize(&cols).unwrap();
    for col in &cols {
        assert!((b.indicator(&b.project(col)) - 1.0).abs() < 1e-10);
    }
    assert_eq!(b.indicator(&[0.0; 5]), 0.0);
}

#[test]
fn indicator_matches_snapshot_coordinates() {
    // Oracle: solve FᵀF x = Fᵀ U c for the coordinates of U c in the raw snapshots.
    let cols = columns(20, 3, 21);
    let b = orthonormalize(&cols).unwrap();
    let c = pseudo_random(3, 99);
    let target = b.expand(&c);
    let gram = Mat::<f64>::from_fn(3, 3, |i, j| cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum());
    let rhs: Vec<f64> = cols.iter().map(|f| f.iter().zip(&target).map(|(x, y)| x * y).sum()).collect();
    let x = DenseLu::new(&gram).unwrap().solve(&rhs);
    let expect: f64 = x.iter().map(|v| v.abs()).sum();
    assert!((b.indicator(&c) - expect).abs() < 1e-10 * expect);
}

fn small_slab() -> Discretization {
    Discretization::new(build_example(ExampleId::Slab(5), None).unwrap(), &[12]).unwrap()
}

#[test]
fn full_space_basis_reproduces_the_sweep() {
    let d = small_slab();
    let n = d.ndof();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| (i == j) as u8 as f64).collect()).collect();
    let basis = ReducedBasis::from_orthonormal(cols);
    let rho = pseudo_random(n, 5);
    let dir = Direction::Slab(-0.3);
    let sw = SweepWorkspace::new(&d, &[dir]).unwrap();
    let exact = &sw.sweep(&d, &rho).unwrap()[0];
    let c = reduced_solve(&basis, &d, &sw.operators()[0], &rho).unwrap();
    let got = basis.expand(&c);
    let err = got.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-10);
}

#[test]
fn planted_solution_is_recovered() {
    let d = small_slab();
    let rho = pseudo_random(d.ndof(), 8);
    let dirs = [Direction::Slab(0.7), Direction::Slab(-0.2)];
    let sw = SweepWorkspace::new(&d, &dirs).unwrap();
    let fields = sw.sweep(&d, &rho).unwrap();
    let mut snaps = fields.clone();
    snaps.push(pseudo_random(d.ndof(), 77));
    let basis = orthonormalize(&snaps).unwrap();
    for (j, f) in fields.iter().enumerate() {
        let c = reduced_solve(&basis, &d, &sw.operators()[j], &rho).unwrap();
        let got = basis.expand(&c);
        let err = d.space().l2_distance(&got, f).unwrap() / d.space().l2_norm(f).unwrap();
        assert!(err < 1e-9);
    }
}

#[test]
fn zero_data_gives_zero_coefficients() {
    let p = ProblemSpec::homogeneous("z", Domain::interval(0.0, 2.0), 0.5, 1.0, 0.0);
    let d = Discretization::new(p, &[6]).unwrap();
    let basis = orthonormalize(&columns(d.ndof(), 3, 4)).unwrap();
    let op = d.direction_operator(Direction::Slab(0.4)).unwrap();
    let c = reduced_solve(&basis, &d, &op, &vec![0.0; d.ndof()]).unwrap();
    assert!(c.iter().all(|v| *v == 0.0));
}

#[test]
fn ls_constants_and_odd_functions() {
    let samples: Vec<Direction> = [-0.9, -0.4, 0.1, 0.35, 0.8].map(Direction::Slab).to_vec();
    let r = LsReconstructor::new(&samples, 3, 1).unwrap();
    let fields: Vec<Vec<f64>> = samples.iter().map(|_| vec![2.5, -1.0]).collect();
    let rho = r.reconstruct(&fields).unwrap();
    assert!((rho[0] - 2.5).abs() < 1e-11 && (rho[1] + 1.0).abs() < 1e-11);
    let odd: Vec<Vec<f64>> = samples.iter().map(|d| vec![d.value(), -3.0 * d.value()]).collect();
    assert!(r.reconstruct(&odd).unwrap().iter().all(|v| v.abs() < 1e-11));

    let samples2: Vec<Direction> = [0.1, 0.9, 2.0, 2.8, 4.1, 5.5, 6.0].map(Direction::planar).to_vec();
    let r2 = LsReconstructor::new(&samples2, 3, 2).unwrap();
    let rho = r2.reconstruct(&samples2.iter().map(|_| vec![0.75]).collect::<Vec<_>>()).unwrap();
    assert!((rho[0] - 0.75).abs() < 1e-11);
}

#[test]
fn ls_average_of_v_squared() {
    let q = gauss_legendre(8).unwrap();
    for s in 2..=7 {
        let r = LsReconstructor::new(q.directions(), s, 1).unwrap();
        let vals: Vec<Vec<f64>> = q.directions().iter().map(|d| vec![d.value().powi(2)]).collect();
        assert!((r.reconstruct(&vals).unwrap()[0] - 1.0 / 3.0).abs() < 1e-12, "s={s}");
    }
}

#[test]
fn ls_trig_average_extracts_constant_term() {
    // Analytic: the circle average of cos kθ and sin kθ is zero for k ≥ 1, of 1 is 1.
    let samples: Vec<Direction> = (0..11).map(|j| Direction::planar(0.3 + 0.57 * j as f64)).collect();
    let s = 5;
    let r = LsReconstructor::new(&samples, s, 2).unwrap();
    let funcs: Vec<Box<dyn Fn(f64) -> f64>> = (0..2 * s)
        .map(|k| -> Box<dyn Fn(f64) -> f64> {
            if k == 0 {
                Box::new(|_| 1.0)
            } else if k <= s {
                Box::new(move |t: f64| (k as f64 * t).cos())
            } else {
                Box::new(move |t: f64| ((k - s) as f64 * t).sin())
            }
        })
        .collect();
    let a: Vec<f64> = pseudo_random(2 * s, 17);
    let vals: Vec<Vec<f64>> = samples
        .iter()
        .map(|d| vec![funcs.iter().zip(&a).map(|(f, ak)| ak * f(d.value())).sum()])
        .collect();
    assert!((r.reconstruct(&vals).unwrap()[0] - a[0]).abs() < 1e-11);
    // Periodicity of the fitted distribution.
    let coef = r.fit(&vals.iter().map(|v| v[0]).collect::<Vec<_>>());
    for t in [0.0, 1.0, 4.0] {
        let a1 = r.eval_fit(&coef, Direction::planar(t));
        let a2 = r.eval_fit(&coef, Direction::planar(t + 2.0 * PI));
        assert!((a1 - a2).abs() < 1e-12);
    }
}

#[test]
fn ls_structured_set_matches_quadrature() {
    let q = gauss_legendre(8).unwrap();
    let r = LsReconstructor::new(q.directions(), 7, 1).unwrap();
    let fields: Vec<Vec<f64>> = q.directions().iter().map(|d| vec![(3.0 * d.value()).exp(), d.value().abs()]).collect();
    let a = r.reconstruct(&fields).unwrap();
    let b = weighted_average(q.weights(), &fields);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
    let same = vec![vec![1.0, 2.0, 3.0]; 8];
    let rho = r.reconstruct(&same).unwrap();
    assert!(rho.iter().zip(&same[0]).all(|(a, b)| (a - b).abs() < 1e-13));
}

#[test]
fn ls_errors() {
    let two = [Direction::Slab(0.1), Direction::Slab(0.5)];
    assert!(LsReconstructor::new(&two, 2, 1).is_err());
    let dup = [Direction::Slab(0.1), Direction::Slab(0.1), Direction::Slab(0.1)];
    assert!(matches!(LsReconstructor::new(&dup, 1, 1), Err(crate::Error::RankDeficient(_))));
    let r = LsReconstructor::new(&[Direction::Slab(0.1), Direction::Slab(0.5)], 1, 1).unwrap();
    assert!(r.reconstruct(&[vec![1.0]]).is_err());
}

fn train_slab(id: u8, cells: usize, m_tol: usize) -> (Discretization, ReducedModel) {
    let d = Discretization::new(build_example(ExampleId::Slab(id), None).unwrap(), &[cells]).unwrap();
    let mut cfg = GreedyConfig::new(2, 1e-4);
    cfg.m_tol = m_tol;
    let model = greedy_train(&d, &gauss_legendre(12).unwrap(), &cfg).unwrap();
    (d, model)
}

#[test]
fn zero_iterations_keep_initial_snapshots() {
    let (d, model) = train_slab(5, 20, 0);
    assert!(model.history.is_empty());
    assert_eq!(model.samples, gauss_legendre(2).unwrap().directions().to_vec());
    assert_eq!(model.snapshots.len(), 2);
    assert_eq!(model.degree, None);
    let full = crate::full_order::FullOrderSolver::new(d, Default::default()).unwrap();
    let (f, rho) = full.solve_direct(&gauss_legendre(2).unwrap()).unwrap();
    assert_eq!(model.snapshots, f);
    assert_eq!(model.density, rho);
}

#[test]
fn greedy_bookkeeping() {
    let (_, model) = train_slab(5, 20, usize::MAX);
    assert!(!model.history.is_empty());
    let m = model.history.len();
    assert_eq!(model.samples.len(), 2 + 2 * m);
    assert_eq!(model.snapshots.len(), model.samples.len());
    assert!(model.dimension() <= model.samples.len());
    assert_eq!(model.spectral_ratios.len(), m + 1);
    assert!(*model.spectral_ratios.last().unwrap() <= 1e-4);
    for (k, step) in model.history.iter().enumerate() {
        assert_eq!(step.m, k + 1);
        assert_eq!(step.degree, k + 2);
        assert_eq!(step.added.len(), 2);
        assert_eq!(step.added[1], step.added[0].symmetric_counterpart());
    }
    let set: crate::angular::SampleSet = model.samples.iter().copied().collect();
    for s in &model.samples {
        assert!(set.contains(&s.symmetric_counterpart()));
    }
    if model.dimension() == model.samples.len() {
        for f in &model.snapshots {
            assert!((model.basis.indicator(&model.basis.project(f)) - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn selection_is_invariant_under_scaling() {
    let build = |scale: f64| {
        let p = ProblemSpec::new(
            "s",
            Domain::interval(0.0, 10.0),
            constant(1.0),
            constant(1.2),
            constant(0.01 * scale),
            crate::model::zero_inflow(),
        );
        let d = Discretization::new(p, &[20]).unwrap();
        let mut cfg = GreedyConfig::new(2, 1e-4);
        cfg.m_tol = 1;
        greedy_train(&d, &gauss_legendre(12).unwrap(), &cfg).unwrap()
    };
    let a = build(1.0);
    let b = build(37.0);
    assert_eq!(a.history[0].added, b.history[0].added);
}

#[test]
fn prediction_reproduces_snapshots() {
    let (d, model) = train_slab(5, 20, usize::MAX);
    let pred = predict(&model, &d, &model.samples).unwrap();
    assert!(pred.failures.is_empty());
    for (f, snap) in pred.fields.iter().zip(&model.snapshots) {
        let f = f.as_ref().unwrap();
        let err = d.space().l2_distance(f, snap).unwrap() / d.space().l2_norm(snap).unwrap();
        assert!(err < 1e-8, "{err}");
    }
    let empty = predict(&model, &d, &[]).unwrap();
    assert!(empty.fields.is_empty());
}

#[test]
fn training_set_must_be_symmetric() {
    let d = small_slab();
    let q = crate::angular::AngularQuadrature::new(
        vec![Direction::Slab(0.2), Direction::Slab(0.5)],
        vec![0.5, 0.5],
    )
    .unwrap();
    assert!(greedy_train(&d, &q, &GreedyConfig::new(2, 1e-4)).is_err());
    let d2 = Discretization::new(build_example(ExampleId::Plane(4), None).unwrap(), &[4, 4]).unwrap();
    assert!(greedy_train(&d2, &gauss_legendre(4).unwrap(), &GreedyConfig::new(4, 1e-3)).is_err());
}
