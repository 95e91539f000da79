//! Plain-text layout of a trained reduced model.
//!
//! ```text
//! rtrb-model 1
//! problem example 1d-4          # or: problem config <n>, then n verbatim lines
//! parameter <C>                 # optional, robustness family
//! domain <xl> <xr> [<yl> <yr>]  # optional domain override
//! cells <n> [<n>]
//! dimension <d>
//! degree <s|none>
//! samples <n>                   # then one direction per line (v, or θ)
//! snapshots <n> <ndof>          # then one snapshot per line
//! rank <r>
//! sigma                         # one line of r values
//! v <n> <r>                     # then n rows
//! basis <r> <ndof>              # then one column per line
//! density <ndof>                # one line
//! spectral_ratios <k>           # one line
//! initial_seconds <t>
//! history <k>                   # then: m ratio indicator degree iterations t_cand t_refresh added...
//! ```
//! Floats are written with 17 significant digits and read back exactly.

use std::io::Write;

use faer::Mat;

use crate::angular::Direction;
use crate::error::{Error, Result};
use crate::model::{Domain, ExampleId};
use crate::rbm::{GreedyStep, ReducedBasis, ReducedModel};

use super::benchmark::ProblemSource;

const MAGIC: &str = "rtrb-model 1";

/// A trained model with what is needed to rebuild its discretization.
#[derive(Clone, Debug)]
pub struct SavedModel {
    pub problem: ProblemSource,
    pub cells: Vec<usize>,
    pub model: ReducedModel,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_row(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(fmt_f).collect::<Vec<_>>().join(" ")
}

fn write_err(e: std::io::Error) -> Error {
    Error::Io(e)
}

pub fn write_model(saved: &SavedModel, out: &mut impl Write) -> Result<()> {
    let m = &saved.model;
    let mut s = String::new();
    let mut line = |l: String| {
        s.push_str(&l);
        s.push('\n');
    };
    line(MAGIC.to_string());
    match &saved.problem {
        ProblemSource::Example { id, c, domain } => {
            line(format!("problem example {id}"));
            if let Some(c) = c {
                line(format!("parameter {}", fmt_f(*c)));
            }
            if let Some(d) = domain {
                let mut vals = vec![d.x.0, d.x.1];
                if let Some(y) = d.y {
                    vals.extend([y.0, y.1]);
                }
                line(format!("domain {}", fmt_row(vals)));
            }
        }
        ProblemSource::Config(text) => {
            let lines: Vec<&str> = text.lines().collect();
            line(format!("problem config {}", lines.len()));
            for l in lines {
                line(l.to_string());
            }
        }
    }
    line(format!(
        "cells {}",
        saved.cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    ));
    line(format!("dimension {}", m.samples.first().map_or(0, |d| d.dimension())));
    line(format!("degree {}", m.degree.map_or("none".to_string(), |d| d.to_string())));
    line(format!("samples {}", m.samples.len()));
    for d in &m.samples {
        line(fmt_f(d.value()));
    }
    let ndof = m.basis.ndof();
    line(format!("snapshots {} {}", m.snapshots.len(), ndof));
    for f in &m.snapshots {
        line(fmt_row(f.iter().copied()));
    }
    let r = m.basis.rank();
    line(format!("rank {r}"));
    line("sigma".to_string());
    line(fmt_row(m.basis.sigma.iter().copied()));
    line(format!("v {} {}", m.basis.v.nrows(), m.basis.v.ncols()));
    for i in 0..m.basis.v.nrows() {
        line(fmt_row((0..m.basis.v.ncols()).map(|k| m.basis.v[(i, k)])));
    }
    line(format!("spectral_ratio {}", fmt_f(m.basis.spectral_ratio)));
    line(format!("basis {r} {ndof}"));
    for c in &m.basis.columns {
        line(fmt_row(c.iter().copied()));
    }
    line(format!("density {}", m.density.len()));
    line(fmt_row(m.density.iter().copied()));
    line(format!("spectral_ratios {}", m.spectral_ratios.len()));
    line(fmt_row(m.spectral_ratios.iter().copied()));
    line(format!("initial_seconds {}", fmt_f(m.initial_seconds)));
    line(format!("history {}", m.history.len()));
    for h in &m.history {
        let mut fields = vec![
            h.m.to_string(),
            fmt_f(h.spectral_ratio),
            fmt_f(h.indicator),
            h.degree.to_string(),
            h.sasi_iterations.to_string(),
            fmt_f(h.candidate_seconds),
            fmt_f(h.refresh_seconds),
        ];
        fields.extend(h.added.iter().map(|d| fmt_f(d.value())));
        line(fields.join(" "));
    }
    out.write_all(s.as_bytes()).map_err(write_err)
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Reader<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Parse("unexpected end of model file".into()))
    }

    fn peek_key(&mut self) -> Option<&'a str> {
        self.lines.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    /// Reads a line starting with `key` and returns the remaining tokens.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (n, l) = self.next_line()?;
        let mut tokens = l.split_whitespace();
        if tokens.next() != Some(key) {
            return Err(Error::Parse(format!("line {n}: expected `{key}`")));
        }
        Ok(tokens.collect())
    }

    fn floats(&mut self, expected: usize) -> Result<Vec<f64>> {
        let (n, l) = self.next_line()?;
        let v = l
            .split_whitespace()
            .map(|t| parse_f(t, n))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != expected {
            return Err(Error::Parse(format!("line {n}: expected {expected} values, got {}", v.len())));
        }
        Ok(v)
    }
}

fn parse_f(t: &str, line: usize) -> Result<f64> {
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: bad number `{t}`")))
}

fn parse_u(t: Option<&&str>) -> Result<usize> {
    t.and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse("expected a non-negative integer".into()))
}

fn direction(dim: usize, value: f64) -> Result<Direction> {
    match dim {
        1 => Ok(Direction::Slab(value)),
        2 => Ok(Direction::Planar(value)),
        d => Err(Error::Parse(format!("unsupported dimension {d}"))),
    }
}

pub fn read_model(text: &str) -> Result<SavedModel> {
    let mut r = Reader {
        lines: text.lines().enumerate().peekable(),
    };
    if r.next_line()?.1.trim() != MAGIC {
        return Err(Error::Parse("not a model file".into()));
    }
    let head = r.keyed("problem")?;
    let problem = match head.first().copied() {
        Some("example") => {
            let id: ExampleId = head
                .get(1)
                .ok_or_else(|| Error::Parse("missing example tag".into()))?
                .parse()?;
            let mut c = None;
            let mut domain = None;
            if r.peek_key() == Some("parameter") {
                let t = r.keyed("parameter")?;
                c = Some(parse_f(t.first().copied().unwrap_or(""), 0)?);
            }
            if r.peek_key() == Some("domain") {
                let t = r.keyed("domain")?;
                let v = t.iter().map(|t| parse_f(t, 0)).collect::<Result<Vec<_>>>()?;
                domain = Some(match v.len() {
                    2 => Domain::interval(v[0], v[1]),
                    4 => Domain::rectangle((v[0], v[1]), (v[2], v[3])),
                    _ => return Err(Error::Parse("domain needs 2 or 4 values".into())),
                });
            }
            ProblemSource::Example { id, c, domain }
        }
        Some("config") => {
            let n = parse_u(head.get(1))?;
            let mut text = String::new();
            for _ in 0..n {
                text.push_str(r.next_line()?.1);
                text.push('\n');
            }
            ProblemSource::Config(text)
        }
        _ => return Err(Error::Parse("unknown problem source".into())),
    };
    let cells = r
        .keyed("cells")?
        .iter()
        .map(|t| parse_u(Some(t)))
        .collect::<Result<Vec<_>>>()?;
    let dim = parse_u(r.keyed("dimension")?.first())?;
    let degree = match r.keyed("degree")?.first().copied() {
        Some("none") => None,
        t => Some(parse_u(t.as_ref())?),
    };
    let ns = parse_u(r.keyed("samples")?.first())?;
    let mut samples = Vec::with_capacity(ns);
    for _ in 0..ns {
        samples.push(direction(dim, r.floats(1)?[0])?);
    }
    let t = r.keyed("snapshots")?;
    let (nsnap, ndof) = (parse_u(t.first())?, parse_u(t.get(1))?);
    let snapshots = (0..nsnap).map(|_| r.floats(ndof)).collect::<Result<Vec<_>>>()?;
    let rank = parse_u(r.keyed("rank")?.first())?;
    r.keyed("sigma")?;
    let sigma = r.floats(rank)?;
    let t = r.keyed("v")?;
    let (vr, vc) = (parse_u(t.first())?, parse_u(t.get(1))?);
    if vc != rank {
        return Err(Error::Parse("V has the wrong number of columns".into()));
    }
    let rows = (0..vr).map(|_| r.floats(vc)).collect::<Result<Vec<_>>>()?;
    let v = Mat::<f64>::from_fn(vr, vc, |i, k| rows[i][k]);
    let spectral_ratio = parse_f(r.keyed("spectral_ratio")?.first().copied().unwrap_or(""), 0)?;
    let t = r.keyed("basis")?;
    if parse_u(t.first())? != rank {
        return Err(Error::Parse("basis size does not match the rank".into()));
    }
    let bdof = parse_u(t.get(1))?;
    let columns = (0..rank).map(|_| r.floats(bdof)).collect::<Result<Vec<_>>>()?;
    let nd = parse_u(r.keyed("density")?.first())?;
    let density = r.floats(nd)?;
    let nr = parse_u(r.keyed("spectral_ratios")?.first())?;
    let spectral_ratios = r.floats(nr)?;
    let initial_seconds = parse_f(r.keyed("initial_seconds")?.first().copied().unwrap_or(""), 0)?;
    let nh = parse_u(r.keyed("history")?.first())?;
    let mut history = Vec::with_capacity(nh);
    for _ in 0..nh {
        let (n, l) = r.next_line()?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 7 {
            return Err(Error::Parse(format!("line {n}: short history record")));
        }
        history.push(GreedyStep {
            m: parse_u(t.first())?,
            spectral_ratio: parse_f(t[1], n)?,
            indicator: parse_f(t[2], n)?,
            degree: parse_u(t.get(3))?,
            sasi_iterations: parse_u(t.get(4))?,
            candidate_seconds: parse_f(t[5], n)?,
            refresh_seconds: parse_f(t[6], n)?,
            added: t[7..]
                .iter()
                .map(|x| direction(dim, parse_f(x, n)?))
                .collect::<Result<Vec<_>>>()?,
        });
    }
    Ok(SavedModel {
        problem,
        cells,
        model: ReducedModel {
            basis: ReducedBasis {
                columns,
                sigma,
                v,
                spectral_ratio,
            },
            samples,
            snapshots,
            density,
            degree,
            spectral_ratios,
            history,
            initial_seconds,
        },
    })
}
