use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rtrb::angular::AngularQuadrature;
use rtrb::discretization::{DgSpace, Discretization};
use rtrb::full_order::{weighted_average, FullOrderSolver, SasiConfig};
use rtrb::harness::{
    default_cells, error_metrics, export_artifacts, metrics_text, read_model, robustness_sweep, run_benchmark,
    sweep_csv, write_model, ArtifactWriter, BenchmarkConfig, ProblemSource, QuadratureSpec, SavedModel,
};
use rtrb::model::ProblemSpec;
use rtrb::rbm::greedy_train;
use rtrb::{Error, Result};

use crate::{Global, Outcome, ProblemArgs};

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn sci_list(xs: impl IntoIterator<Item = f64>) -> String {
    format!("[{}]", xs.into_iter().map(sci).collect::<Vec<_>>().join(", "))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_problem(args: &ProblemArgs) -> Result<(ProblemSource, ProblemSpec)> {
    let source = match (&args.example, &args.config) {
        (Some(id), _) => ProblemSource::example(*id),
        (None, Some(path)) => ProblemSource::Config(read_text(path)?),
        (None, None) => return Err(Error::Config("pass --example or --config".into())),
    };
    let problem = source.build()?;
    Ok((source, problem))
}

fn default_test(dim: usize) -> QuadratureSpec {
    if dim == 1 {
        QuadratureSpec::GaussLegendre(32)
    } else {
        QuadratureSpec::Circle(64)
    }
}

/// Catalog settings (or generic ones for a problem file) with the command-line overrides.
fn settings(g: &Global, source: &ProblemSource, problem: &ProblemSpec) -> BenchmarkConfig {
    let mut cfg = BenchmarkConfig::for_problem(source.clone(), problem.dimension());
    cfg.cells = Some(g.cells.clone().unwrap_or_else(|| default_cells(problem)));
    if let Some(t) = g.training {
        cfg.training = t;
    }
    if let Some(t) = g.test {
        cfg.test = Some(t);
    }
    cfg.greedy = g.greedy(cfg.greedy);
    cfg.full = g.sasi(cfg.full);
    cfg
}

fn build_quadrature(spec: QuadratureSpec, dim: usize) -> Result<AngularQuadrature> {
    if spec.dimension() != dim {
        return Err(Error::Config(format!("quadrature {spec} does not match a {dim}D problem")));
    }
    spec.build()
}

fn write_fields(w: &mut ArtifactWriter, space: &DgSpace, quad: &AngularQuadrature, fields: &[Vec<f64>]) -> Result<()> {
    let mut dirs = String::from("index,direction,weight\n");
    for (j, (d, wt)) in quad.directions().iter().zip(quad.weights()).enumerate() {
        let _ = writeln!(dirs, "{j},{},{}", sci(d.value()), sci(*wt));
    }
    w.write("directions.csv", dirs.as_bytes())?;
    for (j, f) in fields.iter().enumerate() {
        w.write_field(&format!("field_{j:03}.csv"), space, f)?;
    }
    Ok(())
}

fn finish(w: ArtifactWriter, report: &str) -> Result<()> {
    w.finish()?;
    print!("{report}");
    Ok(())
}

pub fn solve_full(g: &Global, args: &ProblemArgs, fields: bool) -> Result<Outcome> {
    let (source, problem) = load_problem(args)?;
    let cfg = settings(g, &source, &problem);
    let quad = build_quadrature(cfg.training, problem.dimension())?;
    let cells = cfg.cells.clone().unwrap_or_default();
    let solver = FullOrderSolver::new(Discretization::new(problem, &cells)?, cfg.full)?;
    let t = Instant::now();
    let res = solver.solve(&quad)?;
    let seconds = t.elapsed().as_secs_f64();

    let space = solver.discretization().space();
    let mut w = ArtifactWriter::new(&g.output_dir)?;
    w.write_field("rho.csv", space, &res.density)?;
    if fields {
        write_fields(&mut w, space, &quad, &res.fields)?;
    }
    let mut r = String::new();
    let _ = writeln!(r, "problem = \"{}\"", source.label());
    let _ = writeln!(r, "cells = {cells:?}");
    let _ = writeln!(r, "quadrature = \"{}\"", cfg.training);
    let _ = writeln!(r, "accelerator = \"{}\"", cfg.full.accelerator);
    let _ = writeln!(r, "error_tol = {}", sci(cfg.full.error_tol));
    let _ = writeln!(r, "iter_tol = {}", cfg.full.iter_tol);
    let _ = writeln!(r, "converged = {}", res.converged);
    let _ = writeln!(r, "diverged = {}", res.diverged);
    let _ = writeln!(r, "iterations = {}", res.iterations);
    let _ = writeln!(r, "seconds = {}", sci(seconds));
    let _ = writeln!(r, "history = {}", sci_list(res.history.iter().copied()));
    w.write("report.toml", r.as_bytes())?;
    finish(w, &r)?;
    Ok(if res.converged { Outcome::Done } else { Outcome::NotConverged })
}

pub fn train_rb(g: &Global, args: &ProblemArgs) -> Result<Outcome> {
    let (source, problem) = load_problem(args)?;
    let cfg = settings(g, &source, &problem);
    let quad = build_quadrature(cfg.training, problem.dimension())?;
    let cells = cfg.cells.clone().unwrap_or_default();
    let disc = Discretization::new(problem, &cells)?;
    let t = Instant::now();
    let model = greedy_train(&disc, &quad, &cfg.greedy)?;
    let seconds = t.elapsed().as_secs_f64();

    let space = disc.space();
    let mut w = ArtifactWriter::new(&g.output_dir)?;
    let saved = SavedModel {
        problem: source.clone(),
        cells: cells.clone(),
        model,
    };
    let mut buf = Vec::new();
    write_model(&saved, &mut buf)?;
    w.write("model.txt", &buf)?;
    let model = saved.model;
    w.write_field("rho_rb.csv", space, &model.density)?;
    for (k, col) in model.basis.columns.iter().enumerate() {
        w.write_field(&format!("basis_{k:03}.csv"), space, col)?;
    }
    let mut h = String::from("m,spectral_ratio,indicator,degree,sasi_iterations,candidate_seconds,refresh_seconds,added\n");
    for s in &model.history {
        let added: Vec<String> = s.added.iter().map(|d| sci(d.value())).collect();
        let _ = writeln!(
            h,
            "{},{},{},{},{},{},{},{}",
            s.m,
            sci(s.spectral_ratio),
            sci(s.indicator),
            s.degree,
            s.sasi_iterations,
            sci(s.candidate_seconds),
            sci(s.refresh_seconds),
            added.join(" ")
        );
    }
    w.write("history.csv", h.as_bytes())?;

    let mut r = String::new();
    let _ = writeln!(r, "problem = \"{}\"", source.label());
    let _ = writeln!(r, "cells = {cells:?}");
    let _ = writeln!(r, "training_quadrature = \"{}\"", cfg.training);
    let _ = writeln!(r, "n0 = {}", cfg.greedy.n0);
    let _ = writeln!(r, "r_tol = {}", sci(cfg.greedy.r_tol));
    let _ = writeln!(r, "rb_dimension = {}", model.dimension());
    let _ = writeln!(r, "iterations = {}", model.iterations());
    if let Some(s) = model.degree {
        let _ = writeln!(r, "ls_degree = {s}");
    }
    let _ = writeln!(r, "samples = {}", sci_list(model.samples.iter().map(|d| d.value())));
    let _ = writeln!(r, "spectral_ratios = {}", sci_list(model.spectral_ratios.iter().copied()));
    let _ = writeln!(r, "initial_seconds = {}", sci(model.initial_seconds));
    let _ = writeln!(r, "offline_seconds = {}", sci(seconds));
    w.write("report.toml", r.as_bytes())?;
    finish(w, &r)?;
    Ok(Outcome::Done)
}

pub fn predict(g: &Global, model_path: &Path, fields: bool, reference: bool) -> Result<Outcome> {
    let saved = read_model(&read_text(model_path)?)?;
    let problem = saved.problem.build()?;
    let dim = problem.dimension();
    let spec = g.test.unwrap_or_else(|| default_test(dim));
    let quad = build_quadrature(spec, dim)?;
    let disc = Discretization::new(problem, &saved.cells)?;
    let t = Instant::now();
    let pred = rtrb::rbm::predict(&saved.model, &disc, quad.directions())?;
    let seconds = t.elapsed().as_secs_f64();
    if let Some((direction, reason)) = pred.failures.first() {
        return Err(Error::SingularReduced {
            direction: *direction,
            reason: reason.clone(),
        });
    }
    let predicted: Vec<Vec<f64>> = pred.fields.into_iter().flatten().collect();
    let rho = weighted_average(quad.weights(), &predicted);

    let space = disc.space();
    let mut w = ArtifactWriter::new(&g.output_dir)?;
    w.write_field("rho.csv", space, &rho)?;
    if fields {
        write_fields(&mut w, space, &quad, &predicted)?;
    }
    let mut r = String::new();
    let _ = writeln!(r, "problem = \"{}\"", saved.problem.label());
    let _ = writeln!(r, "cells = {:?}", saved.cells);
    let _ = writeln!(r, "test_quadrature = \"{spec}\"");
    let _ = writeln!(r, "rb_dimension = {}", saved.model.dimension());
    let _ = writeln!(r, "online_seconds = {}", sci(seconds));

    let mut outcome = Outcome::Done;
    if reference {
        let solver = FullOrderSolver::new(disc.clone(), g.sasi(SasiConfig::default()))?;
        let full = solver.solve(&quad)?;
        let _ = writeln!(r, "reference_converged = {}", full.converged);
        let _ = writeln!(r, "reference_iterations = {}", full.iterations);
        if full.converged {
            let m = error_metrics(space, &full.fields, &full.density, &predicted, &rho)?;
            let _ = writeln!(r, "\n[testing]");
            let _ = writeln!(r, "e_f = {}", sci(m.e_f));
            if let Some(x) = m.r_f {
                let _ = writeln!(r, "r_f = {}", sci(x));
            }
            let _ = writeln!(r, "e_rho = {}", sci(m.e_rho));
            if let Some(x) = m.r_rho {
                let _ = writeln!(r, "r_rho = {}", sci(x));
            }
            w.write_field("rho_full.csv", space, &full.density)?;
        } else {
            outcome = Outcome::NotConverged;
        }
    }
    w.write("report.toml", r.as_bytes())?;
    finish(w, &r)?;
    Ok(outcome)
}

pub fn benchmark(g: &Global, args: &ProblemArgs) -> Result<Outcome> {
    let (source, problem) = load_problem(args)?;
    let cfg = settings(g, &source, &problem);
    let report = run_benchmark(&cfg)?;
    export_artifacts(&report, &g.output_dir)?;
    print!("{}", metrics_text(&report));
    if let Some(f) = &report.failure {
        eprintln!("error: {f}");
        return Ok(Outcome::NotConverged);
    }
    Ok(Outcome::Done)
}

pub fn sweep(g: &Global, cs: &[f64]) -> Result<Outcome> {
    let gl = |spec: Option<QuadratureSpec>, default: usize| match spec {
        None => Ok(default),
        Some(QuadratureSpec::GaussLegendre(n)) => Ok(n),
        Some(s) => Err(Error::Config(format!("the sweep is a slab problem; {s} is not a Gauss–Legendre rule"))),
    };
    let n_train = gl(g.training, 40)?;
    let n_test = gl(g.test, 32)?;
    let rows = robustness_sweep(cs, g.r_tol.unwrap_or(1e-8), n_train, n_test)?;
    let csv = sweep_csv(&rows);
    let mut w = ArtifactWriter::new(&g.output_dir)?;
    w.write("sweep.csv", csv.as_bytes())?;
    finish(w, &csv)?;
    let failed: Vec<_> = rows.iter().filter_map(|r| r.failure.as_ref().map(|f| (r.c, f))).collect();
    for (c, f) in &failed {
        eprintln!("error: C = {}: {f}", sci(*c));
    }
    Ok(if failed.is_empty() { Outcome::Done } else { Outcome::NotConverged })
}
