use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::discretization::{write_field_csv, DgSpace};
use crate::error::Result;

use super::benchmark::{RunReport, SweepRow};
use super::metrics::ErrorMetrics;

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Files written by an export, with their SHA-256 digests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    /// `(file name, hex digest)`, in writing order.
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    /// `sha256sum`-compatible lines.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(n, h)| format!("{h}  {n}\n")).collect()
    }
}

/// Collects files for a directory and records their digests.
pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<(String, String)>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.entries.push((name.to_string(), hex_digest(bytes)));
        Ok(())
    }

    pub fn write_field(&mut self, name: &str, space: &DgSpace, field: &[f64]) -> Result<()> {
        let mut buf = Vec::new();
        write_field_csv(space, field, &mut buf)?;
        self.write(name, &buf)
    }

    /// Writes the manifest, which lists every other file.
    pub fn finish(self) -> Result<Manifest> {
        let manifest = Manifest { entries: self.entries };
        fs::write(self.dir.join(MANIFEST_NAME), manifest.to_text())?;
        Ok(manifest)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_metrics(out: &mut String, section: &str, m: &ErrorMetrics) {
    let _ = writeln!(out, "\n[{section}]");
    let _ = writeln!(out, "e_f = {}", sci(m.e_f));
    if let Some(r) = m.r_f {
        let _ = writeln!(out, "r_f = {}", sci(r));
    }
    let _ = writeln!(out, "e_rho = {}", sci(m.e_rho));
    if let Some(r) = m.r_rho {
        let _ = writeln!(out, "r_rho = {}", sci(r));
    }
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Key–value summary of a run; absent values are omitted.
pub fn metrics_text(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "label = {}", quoted(&report.label));
    let _ = writeln!(s, "succeeded = {}", report.succeeded());
    if let Some(f) = &report.failure {
        let _ = writeln!(s, "failure = {}", quoted(f));
    }
    if !report.cells.is_empty() {
        let cells: Vec<String> = report.cells.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "cells = [{}]", cells.join(", "));
    }
    if let Some(t) = report.training {
        let _ = writeln!(s, "training_quadrature = {}", quoted(&t.to_string()));
    }
    if let Some(t) = report.test {
        let _ = writeln!(s, "test_quadrature = {}", quoted(&t.to_string()));
    }
    if let Some(n) = report.full_iterations {
        let _ = writeln!(s, "full_iterations = {n}");
    }
    if let Some(r) = report.rb_dimension {
        let _ = writeln!(s, "rb_dimension = {r}");
    }
    if let Some(d) = report.degree {
        let _ = writeln!(s, "ls_degree = {d}");
    }
    if !report.samples.is_empty() {
        let v: Vec<String> = report.samples.iter().map(|d| sci(d.value())).collect();
        let _ = writeln!(s, "samples = [{}]", v.join(", "));
    }
    if let Some(r) = report.initial_spectral_ratio {
        let _ = writeln!(s, "initial_spectral_ratio = {}", sci(r));
    }
    if let Some(e) = report.density_rb_error {
        let _ = writeln!(s, "density_rb_error = {}", sci(e));
    }
    if let Some(m) = &report.training_metrics {
        push_metrics(&mut s, "training", m);
    }
    if let Some(m) = &report.testing_metrics {
        push_metrics(&mut s, "testing", m);
    }
    let t = &report.timings;
    let _ = writeln!(s, "\n[timings]");
    let _ = writeln!(s, "full_order = {}", sci(t.full_order));
    let _ = writeln!(s, "initial = {}", sci(t.initial));
    let _ = writeln!(s, "candidates = {}", sci(t.candidates.iter().sum()));
    let _ = writeln!(s, "refreshes = {}", sci(t.refreshes.iter().sum()));
    let _ = writeln!(s, "offline = {}", sci(t.offline));
    let _ = writeln!(s, "online = {}", sci(t.online));
    if let Some(r) = t.relative_time() {
        let _ = writeln!(s, "relative_time = {}", sci(r));
    }
    s
}

/// One row per greedy iteration.
pub fn history_csv(report: &RunReport) -> String {
    let mut s = String::from(
        "m,spectral_ratio,f_error,indicator,degree,sasi_iterations,candidate_seconds,refresh_seconds,added\n",
    );
    for h in &report.history {
        let added: Vec<String> = h.added.iter().map(|d| sci(d.value())).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            h.m,
            sci(h.spectral_ratio),
            h.f_error.map_or(String::new(), sci),
            sci(h.indicator),
            h.degree,
            h.sasi_iterations,
            sci(h.candidate_seconds),
            sci(h.refresh_seconds),
            added.join(" ")
        );
    }
    s
}

/// Writes `metrics.toml` and, for a completed run, `rho_full.csv`,
/// `rho_rb.csv`, `rho_predicted.csv`, `history.csv` and `basis_NNN.csv`,
/// then the manifest.
pub fn export_artifacts(report: &RunReport, dir: &Path) -> Result<Manifest> {
    let mut w = ArtifactWriter::new(dir)?;
    w.write("metrics.toml", metrics_text(report).as_bytes())?;
    if let Some(a) = &report.artifacts {
        let space = a.discretization.space();
        w.write_field("rho_full.csv", space, &a.rho_full)?;
        w.write_field("rho_rb.csv", space, &a.model.density)?;
        w.write_field("rho_predicted.csv", space, &a.rho_predicted)?;
        w.write("history.csv", history_csv(report).as_bytes())?;
        for (k, col) in a.model.basis.columns.iter().enumerate() {
            w.write_field(&format!("basis_{k:03}.csv"), space, col)?;
        }
    }
    w.finish()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("c,rb_dimension,e_f,r_f,e_rho,r_rho,failure\n");
    for r in rows {
        let m = r.testing_metrics;
        let opt = |x: Option<f64>| x.map_or(String::new(), sci);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            sci(r.c),
            r.rb_dimension.map_or(String::new(), |d| d.to_string()),
            opt(m.map(|m| m.e_f)),
            opt(m.and_then(|m| m.r_f)),
            opt(m.map(|m| m.e_rho)),
            opt(m.and_then(|m| m.r_rho)),
            r.failure.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    s
}
