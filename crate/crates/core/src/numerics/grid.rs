use crate::error::{param, Result};

/// Uniform grid `lo + k * spacing`, `k = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n: usize,
    spacing: f64,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 9;

    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(param("grid needs finite lo < hi"));
        }
        if n < Self::MIN_POINTS {
            return Err(param("grid needs at least 9 points"));
        }
        Ok(Self { lo, hi, n, spacing: (hi - lo) / (n - 1) as f64 })
    }

    /// `[-12, 12]` with 4097 points.
    pub fn desk() -> Self {
        Self { lo: -12.0, hi: 12.0, n: 4097, spacing: 24.0 / 4096.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.hi
        } else {
            self.lo + k as f64 * self.spacing
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.point(k))
    }

    /// Same range with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { lo: self.lo, hi: self.hi, n: 2 * self.n - 1, spacing: self.spacing / 2.0 }
    }

    /// Composite trapezoid weight of point `k`.
    #[inline]
    pub fn trapezoid_weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.n {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Cell index `k` and fraction `t` with `x = point(k) + t * spacing`, clamped to the grid.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let u = (x - self.lo) / self.spacing;
        if u <= 0.0 {
            return (0, 0.0);
        }
        let last = (self.n - 2) as f64;
        if u >= last + 1.0 {
            return (self.n - 2, 1.0);
        }
        let k = crate::math::floor(u).min(last);
        (k as usize, u - k)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Shape of a sampled field: a line, or a tensor pair of lines for two dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GridShape {
    Line(Grid1D),
    Plane(Grid1D, Grid1D),
}

impl GridShape {
    pub fn desk_line() -> Self {
        GridShape::Line(Grid1D::desk())
    }

    /// `[-8, 8]^2` with 257 points per axis.
    pub fn desk_plane() -> Self {
        let g = Grid1D { lo: -8.0, hi: 8.0, n: 257, spacing: 16.0 / 256.0 };
        GridShape::Plane(g, g)
    }

    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let g = Grid1D::new(lo, hi, n)?;
        Ok(GridShape::Plane(g, g))
    }

    pub fn dim(&self) -> usize {
        match self {
            GridShape::Line(_) => 1,
            GridShape::Plane(..) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GridShape::Line(g) => g.len(),
            GridShape::Plane(a, b) => a.len() * b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self, i: usize) -> &Grid1D {
        match (self, i) {
            (GridShape::Line(g), _) => g,
            (GridShape::Plane(a, _), 0) => a,
            (GridShape::Plane(_, b), _) => b,
        }
    }

    /// Point of flat index `idx` (row-major, first axis slowest). Unused coordinates are 0.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self {
            GridShape::Line(g) => [g.point(idx), 0.0],
            GridShape::Plane(a, b) => [a.point(idx / b.len()), b.point(idx % b.len())],
        }
    }

    /// Trapezoid weight of flat index `idx`.
    #[inline]
    pub fn weight(&self, idx: usize) -> f64 {
        match self {
            GridShape::Line(g) => g.trapezoid_weight(idx),
            GridShape::Plane(a, b) => a.trapezoid_weight(idx / b.len()) * b.trapezoid_weight(idx % b.len()),
        }
    }

    /// Whether `idx` is at least `margin` points away from every edge.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        let ok = |k: usize, n: usize| k >= margin && k + margin < n;
        match self {
            GridShape::Line(g) => ok(idx, g.len()),
            GridShape::Plane(a, b) => ok(idx / b.len(), a.len()) && ok(idx % b.len(), b.len()),
        }
    }

    pub fn refined(&self) -> Self {
        match self {
            GridShape::Line(g) => GridShape::Line(g.refined()),
            GridShape::Plane(a, b) => GridShape::Plane(a.refined(), b.refined()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_exact_multiples() {
        let g = Grid1D::new(-1.0, 1.0, 9).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.point(0), -1.0);
        assert_eq!(g.point(8), 1.0);
        assert_eq!(g.point(3), -0.25);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(1.0, 1.0, 100).is_err());
        assert!(Grid1D::new(0.0, 1.0, 8).is_err());
        assert!(Grid1D::new(0.0, f64::NAN, 100).is_err());
    }

    #[test]
    fn desk_matches_constructor() {
        assert_eq!(Grid1D::desk(), Grid1D::new(-12.0, 12.0, 4097).unwrap());
        let GridShape::Plane(a, _) = GridShape::desk_plane() else { panic!() };
        assert_eq!(a, Grid1D::new(-8.0, 8.0, 257).unwrap());
    }

    #[test]
    fn locate_clamps_and_splits() {
        let g = Grid1D::new(0.0, 8.0, 9).unwrap();
        assert_eq!(g.locate(-3.0), (0, 0.0));
        assert_eq!(g.locate(2.5), (2, 0.5));
        assert_eq!(g.locate(9.0), (7, 1.0));
    }

    #[test]
    fn plane_indexing_is_row_major() {
        let s = GridShape::square(0.0, 8.0, 9).unwrap();
        assert_eq!(s.point(9 * 2 + 5), [2.0, 5.0]);
        assert!(s.is_interior(9 * 2 + 5, 2));
        assert!(!s.is_interior(9 + 5, 2));
    }
}
