//! Problem instances of the steady linear transport equation
//! `Ω·∇f + σ_t f = σ_s ⟨f⟩ + G` with inflow data, and the benchmark catalog.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Deserialize;

use crate::angular::Direction;
use crate::error::{Error, Result};

/// Spatial point; the second coordinate is ignored in slab geometry.
pub type Point = [f64; 2];

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type InflowData = Arc<dyn Fn(Point, Direction) -> f64 + Send + Sync>;

/// Axis-aligned box `[x_L, x_R]` (× `[y_L, y_R]` in 2D).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub x: (f64, f64),
    pub y: Option<(f64, f64)>,
}

impl Domain {
    pub fn interval(xl: f64, xr: f64) -> Self {
        Self { x: (xl, xr), y: None }
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x, y: Some(y) }
    }

    pub fn dimension(&self) -> usize {
        if self.y.is_some() {
            2
        } else {
            1
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let inside = |v: f64, (a, b): (f64, f64)| v >= a && v <= b;
        inside(p[0], self.x) && self.y.is_none_or(|y| inside(p[1], y))
    }

    pub fn measure(&self) -> f64 {
        let lx = self.x.1 - self.x.0;
        self.y.map_or(lx, |(a, b)| lx * (b - a))
    }
}

/// Cross sections, source and inflow data on a domain.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    domain: Domain,
    sigma_s: ScalarField,
    sigma_t: ScalarField,
    source: ScalarField,
    inflow: InflowData,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        sigma_s: ScalarField,
        sigma_t: ScalarField,
        source: ScalarField,
        inflow: InflowData,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            sigma_s,
            sigma_t,
            source,
            inflow,
        }
    }

    /// Constant cross sections and source with zero inflow.
    pub fn homogeneous(name: impl Into<String>, domain: Domain, sigma_s: f64, sigma_t: f64, source: f64) -> Self {
        Self::new(
            name,
            domain,
            constant(sigma_s),
            constant(sigma_t),
            constant(source),
            zero_inflow(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Same physics on a different box.
    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        if domain.dimension() != self.dimension() {
            return Err(Error::Config("domain override changes the dimension".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn sigma_s(&self, p: Point) -> f64 {
        (self.sigma_s)(p)
    }

    pub fn sigma_t(&self, p: Point) -> f64 {
        (self.sigma_t)(p)
    }

    pub fn sigma_a(&self, p: Point) -> f64 {
        self.sigma_t(p) - self.sigma_s(p)
    }

    pub fn source(&self, p: Point) -> f64 {
        (self.source)(p)
    }

    /// Inflow value; only meaningful where `Ω·n < 0`.
    pub fn inflow(&self, p: Point, dir: Direction) -> f64 {
        (self.inflow)(p, dir)
    }

    /// Checks `0 ≤ σ_s ≤ σ_t` on a uniform lattice of `n` points per axis.
    pub fn check_cross_sections(&self, n: usize) -> Result<()> {
        let n = n.max(2);
        let lattice = |(a, b): (f64, f64)| (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64);
        let ys: Vec<f64> = match self.domain.y {
            Some(y) => lattice(y).collect(),
            None => vec![0.0],
        };
        for x in lattice(self.domain.x) {
            for &y in &ys {
                let (s, t) = (self.sigma_s([x, y]), self.sigma_t([x, y]));
                if !(s >= 0.0 && t >= s) {
                    return Err(Error::Config(format!(
                        "cross sections violate 0 <= sigma_s <= sigma_t at ({x}, {y}): sigma_s={s}, sigma_t={t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn constant(value: f64) -> ScalarField {
    Arc::new(move |_| value)
}

pub fn zero_inflow() -> InflowData {
    Arc::new(|_, _| 0.0)
}

/// Catalog tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleId {
    /// 1D Examples 1–5.
    Slab(u8),
    /// 1D family `σ_t = C + 1/2`, `σ_s = C`.
    SlabRobustness,
    /// 2D Examples 1–4.
    Plane(u8),
}

impl ExampleId {
    pub const ALL_SLAB: [ExampleId; 5] = [
        ExampleId::Slab(1),
        ExampleId::Slab(2),
        ExampleId::Slab(3),
        ExampleId::Slab(4),
        ExampleId::Slab(5),
    ];
    pub const ALL_PLANE: [ExampleId; 4] = [
        ExampleId::Plane(1),
        ExampleId::Plane(2),
        ExampleId::Plane(3),
        ExampleId::Plane(4),
    ];

    pub fn dimension(&self) -> usize {
        match self {
            ExampleId::Slab(_) | ExampleId::SlabRobustness => 1,
            ExampleId::Plane(_) => 2,
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleId::Slab(n) => write!(f, "1d-{n}"),
            ExampleId::SlabRobustness => write!(f, "1d-robustness"),
            ExampleId::Plane(n) => write!(f, "2d-{n}"),
        }
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tag = s.trim().to_ascii_lowercase();
        let parse_n = |rest: &str, max: u8| -> Option<u8> {
            rest.parse::<u8>().ok().filter(|n| (1..=max).contains(n))
        };
        let id = if tag == "1d-robustness" {
            Some(ExampleId::SlabRobustness)
        } else if let Some(rest) = tag.strip_prefix("1d-") {
            parse_n(rest, 5).map(ExampleId::Slab)
        } else if let Some(rest) = tag.strip_prefix("2d-") {
            parse_n(rest, 4).map(ExampleId::Plane)
        } else {
            None
        };
        id.ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

/// Region label of the 2D checkerboard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    White,
    Black,
}

/// White iff `max(|x-x_i|, |y-y_j|) < 1` for some center in `{3, 7}²`.
pub fn checkerboard_region(x: f64, y: f64) -> Result<Region> {
    let domain = Domain::rectangle((0.0, 10.0), (0.0, 10.0));
    if !domain.contains([x, y]) {
        return Err(Error::OutsideDomain { x, y });
    }
    Ok(checkerboard_unchecked(x, y))
}

fn checkerboard_unchecked(x: f64, y: f64) -> Region {
    const CENTERS: [f64; 2] = [3.0, 7.0];
    let white = CENTERS
        .iter()
        .any(|&cx| CENTERS.iter().any(|&cy| (x - cx).abs().max((y - cy).abs()) < 1.0));
    if white {
        Region::White
    } else {
        Region::Black
    }
}

/// `G(x, y) = exp(-100((x-5)² + (y-5)²))`, shared by all 2D examples.
fn plane_gaussian_source() -> ScalarField {
    Arc::new(|p: Point| (-100.0 * ((p[0] - 5.0).powi(2) + (p[1] - 5.0).powi(2))).exp())
}

/// Builds a catalog problem. `c` is required for the robustness family and
/// ignored otherwise.
pub fn build_example(id: ExampleId, c: Option<f64>) -> Result<ProblemSpec> {
    let slab10 = Domain::interval(0.0, 10.0);
    let problem = match id {
        ExampleId::Slab(1) => ProblemSpec::homogeneous("1d-1", slab10, 100.0, 100.0, 0.01),
        ExampleId::Slab(2) => {
            let sigma: ScalarField = Arc::new(|p: Point| 100.0 * (1.0 + p[0]));
            ProblemSpec::new("1d-2", slab10, sigma.clone(), sigma, constant(0.01), zero_inflow())
        }
        ExampleId::Slab(3) => ProblemSpec::new(
            "1d-3",
            Domain::interval(0.0, 20.0),
            Arc::new(|p: Point| if p[0] <= 10.0 { 90.0 } else { 100.0 }),
            constant(100.0),
            Arc::new(|p: Point| if p[0] <= 10.0 { 5.0 } else { 0.0 }),
            zero_inflow(),
        ),
        ExampleId::Slab(4) => ProblemSpec::new(
            "1d-4",
            Domain::interval(0.0, 11.0),
            Arc::new(|p: Point| if p[0] <= 1.0 { 0.0 } else { 100.0 }),
            Arc::new(|p: Point| if p[0] <= 1.0 { 2.0 } else { 100.0 }),
            constant(0.0),
            Arc::new(|p: Point, dir: Direction| {
                if p[0] <= 0.0 && dir.value() > 0.0 {
                    5.0
                } else {
                    0.0
                }
            }),
        ),
        ExampleId::Slab(5) => ProblemSpec::homogeneous("1d-5", slab10, 1.0, 1.2, 0.01),
        ExampleId::SlabRobustness => {
            let c = c.ok_or_else(|| Error::Config("the robustness family requires C".into()))?;
            if !(c >= 0.0) {
                return Err(Error::Config(format!("C must be non-negative, got {c}")));
            }
            ProblemSpec::homogeneous(format!("1d-robustness-C{c}"), slab10, c, c + 0.5, 0.01)
        }
        ExampleId::Plane(n @ 1..=4) => {
            let square = Domain::rectangle((0.0, 10.0), (0.0, 10.0));
            let (sigma_s, sigma_t): (ScalarField, ScalarField) = match n {
                1 => (
                    Arc::new(|p: Point| match checkerboard_unchecked(p[0], p[1]) {
                        Region::White => 1.0,
                        Region::Black => 100.0,
                    }),
                    Arc::new(|p: Point| match checkerboard_unchecked(p[0], p[1]) {
                        Region::White => 2.0,
                        Region::Black => 100.0,
                    }),
                ),
                2 => (constant(100.0), constant(100.0)),
                3 => (constant(10.0), constant(10.0)),
                _ => (constant(1.0), constant(1.0)),
            };
            ProblemSpec::new(
                format!("2d-{n}"),
                square,
                sigma_s,
                sigma_t,
                plane_gaussian_source(),
                zero_inflow(),
            )
        }
        other => return Err(Error::UnknownExample(other.to_string())),
    };
    Ok(problem)
}

// ---------------------------------------------------------------------------
// Key-value configuration files.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    name: Option<String>,
    x: [f64; 2],
    y: Option<[f64; 2]>,
    sigma_s: FieldFile,
    sigma_t: FieldFile,
    #[serde(default)]
    source: FieldFile,
    #[serde(default)]
    inflow: InflowFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    #[serde(default)]
    value: f64,
    #[serde(default)]
    boxes: Vec<BoxFile>,
    #[serde(default)]
    gaussians: Vec<GaussianFile>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxFile {
    x: [f64; 2],
    y: Option<[f64; 2]>,
    value: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianFile {
    #[serde(default = "one")]
    amplitude: f64,
    center: Vec<f64>,
    rate: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InflowFile {
    #[serde(default)]
    left: f64,
    #[serde(default)]
    right: f64,
    #[serde(default)]
    bottom: f64,
    #[serde(default)]
    top: f64,
}

impl FieldFile {
    fn into_field(self, domain: Domain) -> Result<ScalarField> {
        for g in &self.gaussians {
            if g.center.len() != domain.dimension() {
                return Err(Error::Config("gaussian center has the wrong dimension".into()));
            }
        }
        for b in &self.boxes {
            if b.y.is_some() != domain.y.is_some() {
                return Err(Error::Config("box extent does not match the dimension".into()));
            }
        }
        let FieldFile { value, boxes, gaussians } = self;
        // (lo, hi] per axis; a box starting at the domain's lower edge also owns that edge.
        let in_range = |v: f64, r: [f64; 2], lower_edge: f64| (v > r[0] || (r[0] <= lower_edge && v >= r[0])) && v <= r[1];
        Ok(Arc::new(move |p: Point| {
            let mut out = value;
            for b in &boxes {
                let inside_x = in_range(p[0], b.x, domain.x.0);
                let inside_y = match (b.y, domain.y) {
                    (Some(r), Some(dy)) => in_range(p[1], r, dy.0),
                    _ => true,
                };
                if inside_x && inside_y {
                    out = b.value;
                }
            }
            for g in &gaussians {
                let r2: f64 = g.center.iter().enumerate().map(|(i, c)| (p[i] - c).powi(2)).sum();
                out += g.amplitude * (-g.rate * r2).exp();
            }
            out
        }))
    }
}

/// Parses a problem from the TOML key-value format:
///
/// ```toml
/// name = "two-slab"
/// x = [0.0, 20.0]          # y = [..] makes the problem 2D
/// [sigma_s]
/// value = 100.0            # background value
/// boxes = [{ x = [0.0, 10.0], value = 90.0 }]   # (lo, hi], later boxes win
/// [sigma_t]
/// value = 100.0
/// [source]
/// gaussians = [{ amplitude = 1.0, center = [5.0], rate = 100.0 }]  # a·exp(-rate·|p-c|²)
/// [inflow]                 # constant inflow per side, used where Ω·n < 0
/// left = 5.0
/// ```
pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let valid = |r: [f64; 2]| r[0] < r[1] && r.iter().all(|v| v.is_finite());
    if !valid(file.x) || file.y.is_some_and(|y| !valid(y)) {
        return Err(Error::Config("domain bounds must be finite with lo < hi".into()));
    }
    let domain = Domain {
        x: (file.x[0], file.x[1]),
        y: file.y.map(|y| (y[0], y[1])),
    };
    let inflow = file.inflow;
    let inflow: InflowData = Arc::new(move |p: Point, dir: Direction| {
        let [vx, vy] = dir.velocity();
        let tol = 1e-12;
        if (p[0] - domain.x.0).abs() <= tol && vx > 0.0 {
            inflow.left
        } else if (p[0] - domain.x.1).abs() <= tol && vx < 0.0 {
            inflow.right
        } else if domain.y.is_some_and(|y| (p[1] - y.0).abs() <= tol) && vy > 0.0 {
            inflow.bottom
        } else if domain.y.is_some_and(|y| (p[1] - y.1).abs() <= tol) && vy < 0.0 {
            inflow.top
        } else {
            0.0
        }
    });
    let problem = ProblemSpec::new(
        file.name.unwrap_or_else(|| "config".to_string()),
        domain,
        file.sigma_s.into_field(domain)?,
        file.sigma_t.into_field(domain)?,
        file.source.into_field(domain)?,
        inflow,
    );
    problem.check_cross_sections(101)?;
    Ok(problem)
}
