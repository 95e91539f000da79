use crate::error::{Error, Result};
use crate::model::{Domain, Point};

/// Element face, identified by its outward normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl Face {
    pub const SLAB: [Face; 2] = [Face::Left, Face::Right];
    pub const PLANE: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];

    pub fn normal(&self) -> [f64; 2] {
        match self {
            Face::Left => [-1.0, 0.0],
            Face::Right => [1.0, 0.0],
            Face::Bottom => [0.0, -1.0],
            Face::Top => [0.0, 1.0],
        }
    }
}

/// Cell of a uniform mesh; `y` is `(0, 0)` in slab geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub ix: usize,
    pub iy: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Element {
    pub fn center(&self) -> Point {
        [0.5 * (self.x.0 + self.x.1), 0.5 * (self.y.0 + self.y.1)]
    }
}

/// Uniform tensor mesh, elements numbered row-major (`e = ix + nx·iy`).
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    domain: Domain,
    nx: usize,
    ny: usize,
}

impl Mesh {
    /// `cells` holds one count per axis of `domain`.
    pub fn new(domain: Domain, cells: &[usize]) -> Result<Self> {
        if cells.len() != domain.dimension() {
            return Err(Error::Config(format!(
                "need {} cell counts, got {}",
                domain.dimension(),
                cells.len()
            )));
        }
        if cells.contains(&0) {
            return Err(Error::Config("cell counts must be positive".into()));
        }
        Ok(Self {
            domain,
            nx: cells[0],
            ny: cells.get(1).copied().unwrap_or(1),
        })
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn cells(&self) -> Vec<usize> {
        if self.dimension() == 1 {
            vec![self.nx]
        } else {
            vec![self.nx, self.ny]
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn hx(&self) -> f64 {
        (self.domain.x.1 - self.domain.x.0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.domain.y.map_or(0.0, |(a, b)| (b - a) / self.ny as f64)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx * iy
    }

    pub fn element(&self, e: usize) -> Element {
        let (ix, iy) = (e % self.nx, e / self.nx);
        let x0 = self.domain.x.0;
        let hx = self.hx();
        // Endpoints computed from integer multiples so neighbors share faces bitwise.
        let x = (x0 + hx * ix as f64, if ix + 1 == self.nx { self.domain.x.1 } else { x0 + hx * (ix + 1) as f64 });
        let y = match self.domain.y {
            Some((y0, y1)) => {
                let hy = self.hy();
                (y0 + hy * iy as f64, if iy + 1 == self.ny { y1 } else { y0 + hy * (iy + 1) as f64 })
            }
            None => (0.0, 0.0),
        };
        Element { ix, iy, x, y }
    }

    pub fn faces(&self) -> &'static [Face] {
        if self.dimension() == 1 {
            &Face::SLAB
        } else {
            &Face::PLANE
        }
    }

    pub fn neighbor(&self, e: usize, face: Face) -> Option<usize> {
        let (ix, iy) = (e % self.nx, e / self.nx);
        match face {
            Face::Left => (ix > 0).then(|| self.index(ix - 1, iy)),
            Face::Right => (ix + 1 < self.nx).then(|| self.index(ix + 1, iy)),
            Face::Bottom if self.dimension() == 2 => (iy > 0).then(|| self.index(ix, iy - 1)),
            Face::Top if self.dimension() == 2 => (iy + 1 < self.ny).then(|| self.index(ix, iy + 1)),
            _ => None,
        }
    }

    /// Element containing `p`; points on an interior interface belong to the
    /// left (lower) element.
    pub fn locate(&self, p: Point) -> Result<usize> {
        let probe = if self.dimension() == 1 { [p[0], self.domain.y.map_or(0.0, |y| y.0)] } else { p };
        if !self.domain.contains(probe) {
            return Err(Error::OutsideDomain { x: p[0], y: p[1] });
        }
        fn axis(v: f64, lo: f64, h: f64, n: usize) -> usize {
            let t = (v - lo) / h;
            let k = t.round();
            let i = if (t - k).abs() < 1e-12 { k as i64 - 1 } else { t.floor() as i64 };
            i.clamp(0, n as i64 - 1) as usize
        }
        let ix = axis(p[0], self.domain.x.0, self.hx(), self.nx);
        let iy = match self.domain.y {
            Some((y0, _)) => axis(p[1], y0, self.hy(), self.ny),
            None => 0,
        };
        Ok(self.index(ix, iy))
    }
}
