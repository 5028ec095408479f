use std::collections::{HashMap, VecDeque};

use crate::{Error, Result};

const DIVIDE_TOL: f64 = 1e-9;

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!(
                "degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        x >= self.x0 - tol && x <= self.x1 + tol && y >= self.y0 - tol && y <= self.y1 + tol
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Union of closed rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct RectUnionDomain {
    pub rects: Vec<Rect>,
}

impl RectUnionDomain {
    pub fn new(rects: Vec<Rect>) -> Result<Self> {
        if rects.is_empty() {
            return Err(Error::invalid("domain needs at least one rectangle"));
        }
        Ok(RectUnionDomain { rects })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rects.iter().any(|r| r.contains(x, y, 0.0))
    }

    fn bounding_box(&self) -> Rect {
        let mut b = self.rects[0];
        for r in &self.rects[1..] {
            b.x0 = b.x0.min(r.x0);
            b.x1 = b.x1.max(r.x1);
            b.y0 = b.y0.min(r.y0);
            b.y1 = b.y1.max(r.y1);
        }
        b
    }
}

/// How the bulbs and bridges of the three-bulb domain line up vertically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BulbAlignment {
    /// Bulbs and bridges share the bottom edge `y = 0`.
    Bottom,
    /// Bulbs and bridges are centered on the line `y = 2`.
    Centered,
}

/// A 4×4 bulb, a 2×2 bulb and a 3×3 bulb, left to right, joined by two
/// bridges of the given length and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBulb {
    pub bridge_length: f64,
    pub bridge_width: f64,
    pub alignment: BulbAlignment,
}

impl Default for ThreeBulb {
    /// Layout whose low spectrum matches the published three-bulb
    /// eigenvalues: 2×1 bridges along the shared bottom edge.
    fn default() -> Self {
        ThreeBulb {
            bridge_length: 2.0,
            bridge_width: 1.0,
            alignment: BulbAlignment::Bottom,
        }
    }
}

impl ThreeBulb {
    fn validate(&self) -> Result<()> {
        if !(self.bridge_length > 0.0 && self.bridge_width > 0.0 && self.bridge_width < 2.0) {
            return Err(Error::invalid(
                "bridge length must be positive and bridge width in (0, 2)",
            ));
        }
        Ok(())
    }

    fn bulb(&self, x0: f64, size: f64) -> Result<Rect> {
        let y0 = match self.alignment {
            BulbAlignment::Bottom => 0.0,
            BulbAlignment::Centered => 2.0 - size / 2.0,
        };
        Rect::new(x0, x0 + size, y0, y0 + size)
    }

    fn bridge(&self, x0: f64) -> Result<Rect> {
        let w = self.bridge_width;
        let y0 = match self.alignment {
            BulbAlignment::Bottom => 0.0,
            BulbAlignment::Centered => 2.0 - w / 2.0,
        };
        Rect::new(x0, x0 + self.bridge_length, y0, y0 + w)
    }

    pub fn left(&self) -> Result<Rect> {
        self.validate()?;
        self.bulb(0.0, 4.0)
    }

    pub fn middle(&self) -> Result<Rect> {
        self.validate()?;
        self.bulb(4.0 + self.bridge_length, 2.0)
    }

    pub fn right(&self) -> Result<Rect> {
        self.validate()?;
        self.bulb(6.0 + 2.0 * self.bridge_length, 3.0)
    }

    pub fn domain(&self) -> Result<RectUnionDomain> {
        let l = self.bridge_length;
        RectUnionDomain::new(vec![
            self.left()?,
            self.bridge(4.0)?,
            self.middle()?,
            self.bridge(6.0 + l)?,
            self.right()?,
        ])
    }
}

/// The default three-bulb domain.
pub fn three_bulb() -> Result<RectUnionDomain> {
    ThreeBulb::default().domain()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Interval(f64, f64),
    Rects(RectUnionDomain),
}

/// Interior nodes of a uniform Dirichlet grid.
#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    dim: usize,
    h: f64,
    origin: (f64, f64),
    lattice: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    geometry: Geometry,
}

impl DiscreteSpace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Mass weight `h^d`.
    pub fn weight(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn lattice(&self, k: usize) -> (i64, i64) {
        self.lattice[k]
    }

    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    /// Physical coordinates of node `k` (`y = 0` in 1D).
    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.lattice[k];
        (
            self.origin.0 + i as f64 * self.h,
            self.origin.1 + j as f64 * self.h,
        )
    }

    pub fn x(&self, k: usize) -> f64 {
        self.coords(k).0
    }

    /// Lattice neighbors that are interior nodes.
    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.lattice[k];
        let steps: &[(i64, i64)] = if self.dim == 1 {
            &[(-1, 0), (1, 0)]
        } else {
            &[(-1, 0), (1, 0), (0, -1), (0, 1)]
        };
        steps
            .iter()
            .filter_map(move |&(di, dj)| self.index_of(i + di, j + dj))
    }
}

fn lattice_steps(length: f64, h: f64, what: &str) -> Result<i64> {
    let steps = (length / h).round();
    let remainder = length - steps * h;
    if remainder.abs() > DIVIDE_TOL * length.abs().max(h) {
        return Err(Error::invalid(format!(
            "h = {h} does not divide {what} = {length} (remainder {remainder:e})"
        )));
    }
    Ok(steps as i64)
}

pub fn build_grid_1d(lo: f64, hi: f64, h: f64) -> Result<DiscreteSpace> {
    if !(h > 0.0) || !(lo < hi) {
        return Err(Error::invalid(format!(
            "need lo < hi and h > 0, got ({lo}, {hi}), h = {h}"
        )));
    }
    let steps = (hi - lo) / h;
    let n = steps.round();
    let remainder = (hi - lo) - n * h;
    if remainder.abs() > 1e-12 * (hi - lo) {
        return Err(Error::invalid(format!(
            "h = {h} does not divide the interval length {} (remainder {remainder:e})",
            hi - lo
        )));
    }
    let n = n as i64;
    if n < 4 {
        return Err(Error::invalid(format!(
            "grid has {} interior nodes, need at least 3",
            n - 1
        )));
    }
    let lattice: Vec<(i64, i64)> = (1..n).map(|j| (j, 0)).collect();
    let index = lattice.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    Ok(DiscreteSpace {
        dim: 1,
        h,
        origin: (lo, 0.0),
        lattice,
        index,
        geometry: Geometry::Interval(lo, hi),
    })
}

/// Grid points strictly inside the union. A lattice point is interior when
/// all four grid cells touching it lie in the domain.
pub fn build_grid_2d(domain: &RectUnionDomain, h: f64) -> Result<DiscreteSpace> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("h must be positive, got {h}")));
    }
    let bb = domain.bounding_box();
    for r in &domain.rects {
        for (v, what) in [
            (r.x0 - bb.x0, "x offset"),
            (r.x1 - bb.x0, "x offset"),
            (r.y0 - bb.y0, "y offset"),
            (r.y1 - bb.y0, "y offset"),
        ] {
            if v != 0.0 {
                lattice_steps(v, h, what)?;
            }
        }
        let narrow = (r.x1 - r.x0).min(r.y1 - r.y0);
        if h > narrow / 2.0 + DIVIDE_TOL * narrow {
            return Err(Error::invalid(format!(
                "h = {h} exceeds half the narrowest rectangle width {narrow}"
            )));
        }
    }
    let nx = lattice_steps(bb.x1 - bb.x0, h, "domain width")?;
    let ny = lattice_steps(bb.y1 - bb.y0, h, "domain height")?;
    let cell_inside = |ci: i64, cj: i64| {
        // Cell with lower-left corner at lattice (ci, cj).
        if ci < 0 || cj < 0 || ci >= nx || cj >= ny {
            return false;
        }
        let cx = bb.x0 + (ci as f64 + 0.5) * h;
        let cy = bb.y0 + (cj as f64 + 0.5) * h;
        domain.contains(cx, cy)
    };
    let mut lattice = Vec::new();
    for i in 1..nx {
        for j in 1..ny {
            if cell_inside(i - 1, j - 1)
                && cell_inside(i, j - 1)
                && cell_inside(i - 1, j)
                && cell_inside(i, j)
            {
                lattice.push((i, j));
            }
        }
    }
    if lattice.is_empty() {
        return Err(Error::invalid("grid has no interior nodes"));
    }
    let index: HashMap<(i64, i64), usize> =
        lattice.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let space = DiscreteSpace {
        dim: 2,
        h,
        origin: (bb.x0, bb.y0),
        lattice,
        index,
        geometry: Geometry::Rects(domain.clone()),
    };

    let mut seen = vec![false; space.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(k) = queue.pop_front() {
        for nb in space.neighbors(k) {
            if !seen[nb] {
                seen[nb] = true;
                reached += 1;
                queue.push_back(nb);
            }
        }
    }
    if reached != space.len() {
        return Err(Error::invalid(format!(
            "domain is disconnected on the grid: {reached} of {} nodes reachable",
            space.len()
        )));
    }
    Ok(space)
}
