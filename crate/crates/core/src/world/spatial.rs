use super::geometry::{Geometry, Position};

/// Uniform bucket grid over the world for fixed-radius neighbor queries.
///
/// Buckets are at least `cell` wide, so a radius-`r` query only has to
/// visit `ceil(r / cell_width)` rings of buckets around the center. Wrapping
/// follows the world's boundary rule.
pub struct SpatialGrid {
    geometry: Geometry,
    cols: usize,
    rows: usize,
    cell_w: f64,
    cell_h: f64,
    buckets: Vec<Vec<usize>>,
    points: Vec<Position>,
}

impl SpatialGrid {
    pub fn build(geometry: Geometry, points: Vec<Position>, cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let w = f64::from(geometry.width);
        let h = f64::from(geometry.height);
        let cols = ((w / cell).floor() as usize).clamp(1, 4096);
        let rows = ((h / cell).floor() as usize).clamp(1, 4096);
        let cell_w = w / cols as f64;
        let cell_h = h / rows as f64;
        let mut grid = Self {
            geometry,
            cols,
            rows,
            cell_w,
            cell_h,
            buckets: vec![Vec::new(); cols * rows],
            points,
        };
        for i in 0..grid.points.len() {
            let (c, r) = grid.cell_of(grid.points[i]);
            grid.buckets[r * cols + c].push(i);
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn cell_of(&self, p: Position) -> (usize, usize) {
        let c = ((p.x - self.geometry.min_x()) / self.cell_w).floor();
        let r = ((p.y - self.geometry.min_y()) / self.cell_h).floor();
        (
            (c.max(0.0) as usize).min(self.cols - 1),
            (r.max(0.0) as usize).min(self.rows - 1),
        )
    }

    fn axis_cells(center: usize, reach: usize, n: usize, wrap: bool) -> Vec<usize> {
        if 2 * reach + 1 >= n {
            return (0..n).collect();
        }
        let c = center as isize;
        let reach = reach as isize;
        let n = n as isize;
        (c - reach..=c + reach)
            .filter_map(|i| {
                if wrap {
                    Some(i.rem_euclid(n) as usize)
                } else if (0..n).contains(&i) {
                    Some(i as usize)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Indices of points within distance `r` (inclusive) of `center`,
    /// in ascending index order.
    pub fn within(&self, center: Position, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, r, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Calls `f(index, distance)` for every point within `r` of `center`,
    /// in no particular order.
    pub fn for_each_within(&self, center: Position, r: f64, mut f: impl FnMut(usize, f64)) {
        let (cc, cr) = self.cell_of(center);
        let reach_x = (r / self.cell_w).ceil() as usize;
        let reach_y = (r / self.cell_h).ceil() as usize;
        let xs = Self::axis_cells(cc, reach_x, self.cols, self.geometry.wrap);
        let ys = Self::axis_cells(cr, reach_y, self.rows, self.geometry.wrap);
        for &row in &ys {
            for &col in &xs {
                for &i in &self.buckets[row * self.cols + col] {
                    let d = self.geometry.distance(center, self.points[i]);
                    if d <= r {
                        f(i, d);
                    }
                }
            }
        }
    }

    /// All unordered pairs `(i, j)`, `i < j`, at distance at most `r`.
    pub fn pairs_within(&self, r: f64) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.points.len() {
            self.for_each_within(self.points[i], r, |j, _| {
                if j > i {
                    pairs.push((i, j));
                }
            });
        }
        pairs.sort_unstable();
        pairs
    }
}
