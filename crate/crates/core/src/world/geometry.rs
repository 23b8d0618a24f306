use serde::{Deserialize, Serialize};

/// A point in continuous patch coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Position {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Static shape of the world: patch extents and the boundary rule.
///
/// Patches are unit squares centered on integer coordinates. Patch columns
/// run from `min_pxcor = -(width / 2)` to `min_pxcor + width - 1`, so a
/// 33-wide world spans pxcor -16..=16 and continuous x in `[-16.5, 16.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub width: u32,
    pub height: u32,
    pub wrap: bool,
    pub min_pxcor: i64,
    pub max_pxcor: i64,
    pub min_pycor: i64,
    pub max_pycor: i64,
}

impl Geometry {
    pub fn new(width: u32, height: u32, wrap: bool) -> Self {
        let min_pxcor = -i64::from(width / 2);
        let min_pycor = -i64::from(height / 2);
        Self {
            width,
            height,
            wrap,
            min_pxcor,
            max_pxcor: min_pxcor + i64::from(width) - 1,
            min_pycor,
            max_pycor: min_pycor + i64::from(height) - 1,
        }
    }

    pub fn min_x(&self) -> f64 {
        self.min_pxcor as f64 - 0.5
    }

    pub fn max_x(&self) -> f64 {
        self.max_pxcor as f64 + 0.5
    }

    pub fn min_y(&self) -> f64 {
        self.min_pycor as f64 - 0.5
    }

    pub fn max_y(&self) -> f64 {
        self.max_pycor as f64 + 0.5
    }

    pub fn patch_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Length of the longest shortest path between two points.
    pub fn diameter(&self) -> f64 {
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        if self.wrap {
            (w / 2.0).hypot(h / 2.0)
        } else {
            w.hypot(h)
        }
    }

    fn wrap_axis(v: f64, min: f64, span: f64) -> f64 {
        if v >= min && v < min + span {
            return v;
        }
        let mut r = (v - min).rem_euclid(span);
        if r >= span {
            r = 0.0;
        }
        min + r
    }

    /// Maps a point onto the torus. Identity on bounded worlds.
    pub fn wrap_point(&self, p: Position) -> Position {
        if !self.wrap {
            return p;
        }
        Position {
            x: Self::wrap_axis(p.x, self.min_x(), f64::from(self.width)),
            y: Self::wrap_axis(p.y, self.min_y(), f64::from(self.height)),
        }
    }

    pub fn contains(&self, p: Position) -> bool {
        if self.wrap {
            p.x >= self.min_x() && p.x < self.max_x() && p.y >= self.min_y() && p.y < self.max_y()
        } else {
            p.x >= self.min_x() && p.x <= self.max_x() && p.y >= self.min_y() && p.y <= self.max_y()
        }
    }

    fn axis_delta(d: f64, span: f64, wrap: bool) -> f64 {
        if !wrap {
            return d;
        }
        let d = d.rem_euclid(span);
        if d > span / 2.0 {
            d - span
        } else {
            d
        }
    }

    /// Shortest displacement from `p` to `q`.
    pub fn delta(&self, p: Position, q: Position) -> (f64, f64) {
        (
            Self::axis_delta(q.x - p.x, f64::from(self.width), self.wrap),
            Self::axis_delta(q.y - p.y, f64::from(self.height), self.wrap),
        )
    }

    pub fn distance(&self, p: Position, q: Position) -> f64 {
        let (dx, dy) = self.delta(p, q);
        dx.hypot(dy)
    }

    /// Index into the row-major patch vector for the patch under `p`.
    pub fn patch_index_at(&self, p: Position) -> Option<usize> {
        let px = (p.x + 0.5).floor() as i64;
        let py = (p.y + 0.5).floor() as i64;
        self.patch_index(px.min(self.max_pxcor), py.min(self.max_pycor))
    }

    pub fn patch_index(&self, pxcor: i64, pycor: i64) -> Option<usize> {
        if pxcor < self.min_pxcor || pxcor > self.max_pxcor || pycor < self.min_pycor || pycor > self.max_pycor {
            return None;
        }
        let col = (pxcor - self.min_pxcor) as usize;
        let row = (pycor - self.min_pycor) as usize;
        Some(row * self.width as usize + col)
    }

    /// Advances `from` by `step` along `heading`. On a bounded world the
    /// move stops at the first wall it meets and the heading is reflected
    /// off that wall; the returned heading is the one the agent keeps.
    pub fn advance(&self, from: Position, heading: f64, step: f64) -> (Position, f64) {
        let (sx, sy) = heading_vector(heading);
        let target = Position::new(from.x + sx * step, from.y + sy * step);
        if self.wrap {
            return (self.wrap_point(target), heading);
        }
        if self.contains(target) {
            return (target, heading);
        }
        let dx = target.x - from.x;
        let dy = target.y - from.y;
        let mut t: f64 = 1.0;
        let mut hit_x = false;
        let mut hit_y = false;
        let axis_t = |pos: f64, d: f64, lo: f64, hi: f64| -> Option<f64> {
            if d > 0.0 && pos + d > hi {
                Some((hi - pos) / d)
            } else if d < 0.0 && pos + d < lo {
                Some((lo - pos) / d)
            } else {
                None
            }
        };
        let tx = axis_t(from.x, dx, self.min_x(), self.max_x());
        let ty = axis_t(from.y, dy, self.min_y(), self.max_y());
        if let Some(tx) = tx {
            t = t.min(tx);
        }
        if let Some(ty) = ty {
            t = t.min(ty);
        }
        if tx.is_some_and(|v| v <= t) {
            hit_x = true;
        }
        if ty.is_some_and(|v| v <= t) {
            hit_y = true;
        }
        let t = t.max(0.0);
        let stop = Position::new(
            (from.x + dx * t).clamp(self.min_x(), self.max_x()),
            (from.y + dy * t).clamp(self.min_y(), self.max_y()),
        );
        let mut h = heading;
        if hit_x {
            h = normalize_heading(360.0 - h);
        }
        if hit_y {
            h = normalize_heading(180.0 - h);
        }
        (stop, h)
    }
}

/// Unit displacement for a heading in degrees (0 = north, clockwise).
/// Exact on the four axis-aligned headings.
pub fn heading_vector(heading: f64) -> (f64, f64) {
    let h = normalize_heading(heading);
    if h == 0.0 {
        (0.0, 1.0)
    } else if h == 90.0 {
        (1.0, 0.0)
    } else if h == 180.0 {
        (0.0, -1.0)
    } else if h == 270.0 {
        (-1.0, 0.0)
    } else {
        let r = h.to_radians();
        (r.sin(), r.cos())
    }
}

pub fn normalize_heading(h: f64) -> f64 {
    let r = h.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}
