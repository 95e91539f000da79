use std::fs;
use std::path::PathBuf;

use rtrb::discretization::Discretization;
use rtrb::harness::*;
use rtrb::model::{build_example, ExampleId};
use rtrb::rbm::GreedyConfig;

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rtrb-harness-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn slab_disc(cells: usize) -> Discretization {
    Discretization::new(build_example(ExampleId::Slab(1), None).unwrap(), &[cells]).unwrap()
}

fn small_config(m_tol: usize) -> BenchmarkConfig {
    let mut greedy = GreedyConfig::new(2, 1e-4);
    greedy.m_tol = m_tol;
    let mut cfg = BenchmarkConfig::new(
        ProblemSource::example(ExampleId::Slab(1)),
        QuadratureSpec::GaussLegendre(8),
        greedy,
    );
    cfg.cells = Some(vec![16]);
    cfg.test = Some(QuadratureSpec::GaussLegendre(10));
    cfg
}

fn ramp(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|i| offset + (i as f64 * 0.37).sin()).collect()
}

#[test]
fn metrics_are_zero_for_identical_fields() {
    let disc = slab_disc(8);
    let f = vec![ramp(disc.ndof(), 1.0), ramp(disc.ndof(), 2.0)];
    let rho = ramp(disc.ndof(), 3.0);
    let m = error_metrics(disc.space(), &f, &rho, &f, &rho).unwrap();
    assert_eq!(m.e_f, 0.0);
    assert_eq!(m.r_f, Some(0.0));
    assert_eq!(m.e_rho, 0.0);
    assert_eq!(m.r_rho, Some(0.0));
}

#[test]
fn uniform_scaling_gives_one_percent() {
    let disc = slab_disc(8);
    let f = vec![ramp(disc.ndof(), 1.0), ramp(disc.ndof(), -0.5)];
    let rho = ramp(disc.ndof(), 3.0);
    let scale = |v: &[f64]| v.iter().map(|x| 1.01 * x).collect::<Vec<_>>();
    let g: Vec<Vec<f64>> = f.iter().map(|v| scale(v)).collect();
    let m = error_metrics(disc.space(), &f, &rho, &g, &scale(&rho)).unwrap();
    assert!((m.r_f.unwrap() - 0.01).abs() < 1e-13);
    assert!((m.r_rho.unwrap() - 0.01).abs() < 1e-13);
    assert!(m.is_consistent());
}

#[test]
fn two_direction_case_by_hand() {
    // One cell on [0, 1] with an orthonormal basis: coefficient norms are L² norms.
    let problem = build_example(ExampleId::Slab(1), None)
        .unwrap()
        .with_domain(rtrb::model::Domain::interval(0.0, 1.0))
        .unwrap();
    let disc = Discretization::new(problem, &[1]).unwrap();
    let space = disc.space();
    let reference = vec![vec![3.0, 0.0], vec![0.0, 1.0]];
    let candidate = vec![vec![3.0, 0.3], vec![0.0, 1.2]];
    let rho_ref = vec![1.5, 0.5];
    let rho = vec![1.5, 0.75];
    let m = error_metrics(space, &reference, &rho_ref, &candidate, &rho).unwrap();
    assert!((m.e_f - 0.3).abs() < 1e-14);
    assert!((m.r_f.unwrap() - 0.2).abs() < 1e-14);
    assert!((m.e_rho - 0.25).abs() < 1e-14);
    assert!((m.r_rho.unwrap() - 0.25 / 2.5f64.sqrt()).abs() < 1e-14);
    assert!((m.min_reference_norm - 1.0).abs() < 1e-14);
    assert!(m.is_consistent());
}

#[test]
fn zero_reference_has_no_relative_error() {
    let disc = slab_disc(4);
    let z = vec![0.0; disc.ndof()];
    let f = ramp(disc.ndof(), 0.0);
    let m = error_metrics(disc.space(), std::slice::from_ref(&z), &z, std::slice::from_ref(&f), &f).unwrap();
    assert!(m.r_f.is_none());
    assert!(m.r_rho.is_none());
    assert!(m.e_f > 0.0);
    assert!(relative_l2(disc.space(), &f, &z).unwrap().is_none());
}

#[test]
fn mismatched_field_counts_are_rejected() {
    let disc = slab_disc(4);
    let f = ramp(disc.ndof(), 0.0);
    assert!(error_metrics(disc.space(), &[f.clone(), f.clone()], &f, std::slice::from_ref(&f), &f).is_err());
}

#[test]
fn quadrature_spec_round_trips() {
    for s in ["gl:24", "circle:32", "gl:1"] {
        let q: QuadratureSpec = s.parse().unwrap();
        assert_eq!(q.to_string(), s);
    }
    assert_eq!("GL : 8".parse::<QuadratureSpec>().unwrap(), QuadratureSpec::GaussLegendre(8));
    for bad in ["gl", "gl:x", "sphere:4", ":3", "circle:-2"] {
        assert!(bad.parse::<QuadratureSpec>().is_err(), "{bad}");
    }
    assert!(QuadratureSpec::Circle(7).build().is_err());
    assert_eq!(QuadratureSpec::Circle(8).build().unwrap().len(), 8);
    assert_eq!(QuadratureSpec::GaussLegendre(6).build().unwrap().len(), 6);
}

#[test]
fn zero_iteration_budget_keeps_the_initial_basis() {
    let report = run_benchmark(&small_config(0)).unwrap();
    assert!(report.succeeded());
    assert_eq!(report.rb_dimension, Some(2));
    assert_eq!(report.samples.len(), 2);
    assert!(report.history.is_empty());
    assert_eq!(report.degree, None);
    assert!(report.training_metrics.is_some());
    assert!(report.testing_metrics.is_some());
}

#[test]
fn mismatched_quadrature_dimension_is_a_config_error() {
    let mut cfg = small_config(0);
    cfg.training = QuadratureSpec::Circle(8);
    assert!(matches!(run_benchmark(&cfg), Err(rtrb::Error::Config(_))));
}

#[test]
fn benchmark_runs_are_deterministic() {
    let a = run_benchmark(&small_config(usize::MAX)).unwrap();
    let b = run_benchmark(&small_config(usize::MAX)).unwrap();
    assert_eq!(a.rb_dimension, b.rb_dimension);
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.training_metrics, b.training_metrics);
    assert_eq!(a.testing_metrics, b.testing_metrics);
    let (ma, mb) = (&a.artifacts.unwrap().model, &b.artifacts.unwrap().model);
    assert_eq!(ma.basis.columns, mb.basis.columns);
    assert_eq!(ma.density, mb.density);
}

#[test]
fn history_ratios_decrease_to_tolerance() {
    let report = run_benchmark(&small_config(usize::MAX)).unwrap();
    assert!(!report.history.is_empty());
    let last = report.history.last().unwrap();
    assert!(last.spectral_ratio <= 1e-4);
    for h in &report.history {
        assert_eq!(h.added.len(), 2);
        assert!(h.f_error.is_some());
    }
    assert_eq!(report.rb_dimension, Some(report.samples.len()));
}

#[test]
fn export_of_an_empty_report_writes_only_metrics() {
    let dir = scratch_dir("empty");
    let manifest = export_artifacts(&RunReport::default(), &dir).unwrap();
    assert_eq!(manifest.entries.len(), 1);
    assert!(manifest.contains("metrics.toml"));
    let text = fs::read_to_string(dir.join("metrics.toml")).unwrap();
    let parsed: toml::Table = text.parse().unwrap();
    assert_eq!(parsed["succeeded"].as_bool(), Some(true));
    assert!(parsed.get("rb_dimension").is_none());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn export_manifest_lists_every_file_with_its_digest() {
    let report = run_benchmark(&small_config(usize::MAX)).unwrap();
    let dir = scratch_dir("full");
    let manifest = export_artifacts(&report, &dir).unwrap();
    for name in ["metrics.toml", "rho_full.csv", "rho_rb.csv", "rho_predicted.csv", "history.csv", "basis_000.csv"] {
        assert!(manifest.contains(name), "{name}");
    }
    let r = report.rb_dimension.unwrap();
    assert!(manifest.contains(&format!("basis_{:03}.csv", r - 1)));
    assert!(!manifest.contains(&format!("basis_{r:03}.csv")));
    for (name, hex) in &manifest.entries {
        assert_eq!(&hex_digest(&fs::read(dir.join(name)).unwrap()), hex);
    }
    assert_eq!(fs::read_to_string(dir.join(MANIFEST_NAME)).unwrap(), manifest.to_text());

    let parsed: toml::Table = fs::read_to_string(dir.join("metrics.toml")).unwrap().parse().unwrap();
    assert_eq!(parsed["rb_dimension"].as_integer(), Some(r as i64));
    assert!(parsed["testing"]["r_f"].as_float().is_some());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn field_checksums_are_reproducible() {
    let a = run_benchmark(&small_config(usize::MAX)).unwrap();
    let b = run_benchmark(&small_config(usize::MAX)).unwrap();
    let (da, db) = (scratch_dir("det-a"), scratch_dir("det-b"));
    let ma = export_artifacts(&a, &da).unwrap();
    let mb = export_artifacts(&b, &db).unwrap();
    let fields = |m: &Manifest| -> Vec<(String, String)> {
        m.entries.iter().filter(|(n, _)| n.ends_with(".csv") && n != "history.csv").cloned().collect()
    };
    assert_eq!(fields(&ma), fields(&mb));
    fs::remove_dir_all(&da).unwrap();
    fs::remove_dir_all(&db).unwrap();
}

#[test]
fn model_file_round_trips_exactly() {
    let report = run_benchmark(&small_config(usize::MAX)).unwrap();
    let model = report.artifacts.unwrap().model;
    let saved = SavedModel {
        problem: ProblemSource::Example {
            id: ExampleId::Slab(1),
            c: Some(0.25),
            domain: Some(rtrb::model::Domain::interval(0.0, 2.0)),
        },
        cells: report.cells.clone(),
        model,
    };
    let mut buf = Vec::new();
    write_model(&saved, &mut buf).unwrap();
    let back = read_model(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.problem, saved.problem);
    assert_eq!(back.cells, saved.cells);
    let (a, b) = (&saved.model, &back.model);
    assert_eq!(a.basis.columns, b.basis.columns);
    assert_eq!(a.basis.sigma, b.basis.sigma);
    assert_eq!(a.basis.v, b.basis.v);
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.density, b.density);
    assert_eq!(a.degree, b.degree);
    assert_eq!(a.spectral_ratios, b.spectral_ratios);
    assert_eq!(a.history, b.history);

    let mut again = Vec::new();
    write_model(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn model_file_with_config_problem_round_trips() {
    let report = run_benchmark(&small_config(0)).unwrap();
    let saved = SavedModel {
        problem: ProblemSource::Config("line one\n  line two\n".into()),
        cells: vec![16],
        model: report.artifacts.unwrap().model,
    };
    let mut buf = Vec::new();
    write_model(&saved, &mut buf).unwrap();
    let back = read_model(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.problem, saved.problem);
    assert_eq!(back.model.degree, None);
}

#[test]
fn malformed_model_files_are_rejected() {
    assert!(read_model("").is_err());
    assert!(read_model("something else\n").is_err());
    assert!(read_model("rtrb-model 1\nproblem example 1d-9\n").is_err());
    let report = run_benchmark(&small_config(0)).unwrap();
    let saved = SavedModel {
        problem: ProblemSource::example(ExampleId::Slab(1)),
        cells: vec![16],
        model: report.artifacts.unwrap().model,
    };
    let mut buf = Vec::new();
    write_model(&saved, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let truncated: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
    assert!(read_model(&truncated).is_err());
}

#[test]
fn sweep_with_one_parameter_returns_one_row() {
    let rows = robustness_sweep(&[1.0], 1e-4, 8, 10).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].c, 1.0);
    assert!(rows[0].failure.is_none());
    assert!(rows[0].rb_dimension.is_some());
    let csv = sweep_csv(&rows);
    assert_eq!(csv.lines().count(), 2);
    assert!(robustness_sweep(&[-1.0], 1e-4, 8, 10).is_err());
    assert!(robustness_sweep(&[], 1e-4, 8, 10).unwrap().is_empty());
}
