//! Uniform square grids over the truncated plane and the fields that live on them.

mod helmholtz;

pub use helmholtz::{helmholtz_solve, HelmholtzSolver};

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// Smallest supported grid.
pub const MIN_NODES: usize = 33;

/// Uniform `n × n` grid on `[−R, R]²` shifted by `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    radius: f64,
    nodes_per_side: usize,
    spacing: f64,
    offset: (f64, f64),
}

impl Grid2D {
    /// Grid for `spec`, shifted by half a cell when a center would fall on a node.
    pub fn build(radius: f64, nodes_per_side: usize, spec: &ProblemSpec) -> Result<Self> {
        let mut grid = Self::uniform(radius, nodes_per_side)?;
        for c in &spec.centers {
            if c.x.hypot(c.y) >= 0.5 * radius {
                return Err(Error::Precondition(format!(
                    "center ({}, {}) must lie inside |x| < R/2 = {}",
                    c.x,
                    c.y,
                    0.5 * radius
                )));
            }
        }
        let h = grid.spacing;
        let candidates = [
            (0.0, 0.0),
            (0.5 * h, 0.5 * h),
            (0.5 * h, 0.0),
            (0.0, 0.5 * h),
            (0.25 * h, 0.25 * h),
            (0.25 * h, 0.75 * h),
        ];
        for offset in candidates {
            grid.offset = offset;
            if !grid.collides(spec) {
                return Ok(grid);
            }
        }
        Err(Error::Precondition(
            "could not place grid nodes away from every center".into(),
        ))
    }

    /// Unshifted grid, independent of any problem.
    pub fn uniform(radius: f64, nodes_per_side: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
        }
        if nodes_per_side % 2 == 0 {
            return Err(Error::Precondition(format!(
                "nodes_per_side must be odd, got {nodes_per_side}"
            )));
        }
        if nodes_per_side < MIN_NODES {
            return Err(Error::Precondition(format!(
                "nodes_per_side must be at least {MIN_NODES}, got {nodes_per_side}"
            )));
        }
        Ok(Grid2D {
            radius,
            nodes_per_side,
            spacing: 2.0 * radius / (nodes_per_side - 1) as f64,
            offset: (0.0, 0.0),
        })
    }

    /// Grid with an explicit offset, as recovered from a written field.
    pub fn with_offset(radius: f64, nodes_per_side: usize, offset: (f64, f64)) -> Result<Self> {
        let mut grid = Self::uniform(radius, nodes_per_side)?;
        let ok = |o: f64| o.is_finite() && o.abs() < grid.spacing;
        if !(ok(offset.0) && ok(offset.1)) {
            return Err(Error::Precondition(format!(
                "grid offset {offset:?} must be smaller than the spacing {}",
                grid.spacing
            )));
        }
        grid.offset = offset;
        Ok(grid)
    }

    fn collides(&self, spec: &ProblemSpec) -> bool {
        let tol = 1e-9 * self.spacing;
        spec.centers.iter().any(|c| {
            let near = |p: f64, o: f64| {
                let s = (p - o + self.radius) / self.spacing;
                (s - s.round()).abs() * self.spacing < tol
            };
            near(c.x, self.offset.0) && near(c.y, self.offset.1)
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes_per_side(&self) -> usize {
        self.nodes_per_side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn offset(&self) -> (f64, f64) {
        self.offset
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.nodes_per_side * self.nodes_per_side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.radius + i as f64 * self.spacing + self.offset.0
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        -self.radius + j as f64 * self.spacing + self.offset.1
    }

    /// Row-major index: `j` selects the row (y), `i` the column (x).
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nodes_per_side + i
    }

    #[inline]
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let n = self.nodes_per_side;
        (self.x(idx % n), self.y(idx / n))
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let last = self.nodes_per_side - 1;
        i == 0 || j == 0 || i == last || j == last
    }

    /// Iterator over interior `(i, j)` pairs.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.nodes_per_side;
        (1..n - 1).flat_map(move |j| (1..n - 1).map(move |i| (i, j)))
    }

    /// Distance from `(x, y)` to the nearest center of `spec`.
    pub fn distance_to_centers(spec: &ProblemSpec, x: f64, y: f64) -> f64 {
        spec.centers
            .iter()
            .map(|c| c.dist2(x, y))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// Scalar samples on every node of a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: &Grid2D) -> Self {
        Field2D {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.point(idx);
                f(x, y)
            })
            .collect();
        Field2D {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field2D {
            grid: grid.clone(),
            values,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Nearest-node value to `(x, y)`.
    pub fn sample_nearest(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let last = g.nodes_per_side - 1;
        let i = ((x - g.offset.0 + g.radius) / g.spacing).round().clamp(0.0, last as f64) as usize;
        let j = ((y - g.offset.1 + g.radius) / g.spacing).round().clamp(0.0, last as f64) as usize;
        self.at(i, j)
    }

    /// Bilinear interpolation at `(x, y)`; clamps to the grid.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let last = (g.nodes_per_side - 1) as f64;
        let sx = ((x - g.offset.0 + g.radius) / g.spacing).clamp(0.0, last);
        let sy = ((y - g.offset.1 + g.radius) / g.spacing).clamp(0.0, last);
        let i0 = (sx.floor() as usize).min(g.nodes_per_side - 2);
        let j0 = (sy.floor() as usize).min(g.nodes_per_side - 2);
        let tx = sx - i0 as f64;
        let ty = sy - j0 as f64;
        let v00 = self.at(i0, j0);
        let v10 = self.at(i0 + 1, j0);
        let v01 = self.at(i0, j0 + 1);
        let v11 = self.at(i0 + 1, j0 + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Field2D {
        Field2D {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Central-difference gradient at an interior node.
    #[inline]
    pub fn gradient_at(&self, i: usize, j: usize) -> (f64, f64) {
        let h2 = 2.0 * self.grid.spacing;
        (
            (self.at(i + 1, j) - self.at(i - 1, j)) / h2,
            (self.at(i, j + 1) - self.at(i, j - 1)) / h2,
        )
    }

    /// Five-point Laplacian at an interior node.
    #[inline]
    pub fn laplacian_at(&self, i: usize, j: usize) -> f64 {
        let h = self.grid.spacing;
        (self.at(i + 1, j) + self.at(i - 1, j) + self.at(i, j + 1) + self.at(i, j - 1)
            - 4.0 * self.at(i, j))
            / (h * h)
    }

    /// Writes `x,y,value` rows (row-major, 17 significant digits).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,value")?;
        for (idx, v) in self.values.iter().enumerate() {
            let (x, y) = self.grid.point(idx);
            writeln!(out, "{:.16e},{:.16e},{:.16e}", x, y, v)?;
        }
        Ok(())
    }
}

/// Five-point Laplacian on interior nodes; boundary nodes are set to zero.
pub fn apply_laplacian(field: &Field2D) -> Field2D {
    let g = &field.grid;
    let mut out = Field2D::zeros(g);
    for (i, j) in g.interior() {
        out.values[g.index(i, j)] = field.laplacian_at(i, j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Center, ProblemSpec};

    fn spec_at(points: &[(f64, f64)]) -> ProblemSpec {
        ProblemSpec::flat(points, 1.0, 1.0).unwrap()
    }

    #[test]
    fn build_shifts_off_center_nodes() {
        let g = Grid2D::build(20.0, 201, &spec_at(&[(0.0, 0.0)])).unwrap();
        let h = g.spacing();
        assert!((h - 0.2).abs() < 1e-15);
        assert_eq!(g.offset(), (h / 2.0, h / 2.0));

        let g = Grid2D::build(20.0, 201, &spec_at(&[(0.05, 0.05)])).unwrap();
        assert_eq!(g.offset(), (0.0, 0.0));
    }

    #[test]
    fn build_rejects_bad_inputs() {
        assert!(Grid2D::build(1.0, 41, &spec_at(&[(0.9, 0.0)])).is_err());
        assert!(Grid2D::build(20.0, 200, &spec_at(&[(0.0, 0.0)])).is_err());
        assert!(Grid2D::build(20.0, 31, &spec_at(&[(0.0, 0.0)])).is_err());
    }

    #[test]
    fn build_avoids_every_center() {
        // the half shift alone would land on the second center
        let h = 0.2;
        let spec = ProblemSpec::new(
            vec![Center::new(0.0, 0.0, 1), Center::new(h / 2.0, h / 2.0, 1)],
            1.0,
            1.0,
            0.0,
        )
        .unwrap();
        let g = Grid2D::build(20.0, 201, &spec).unwrap();
        for idx in 0..g.len() {
            let (x, y) = g.point(idx);
            assert!(Grid2D::distance_to_centers(&spec, x, y) > 1e-3 * h);
        }
    }

    #[test]
    fn laplacian_of_constant_and_quadratic() {
        let g = Grid2D::uniform(3.0, 41).unwrap();
        let c = Field2D::from_fn(&g, |_, _| 2.5);
        assert!(apply_laplacian(&c).sup_norm() == 0.0);
        let q = Field2D::from_fn(&g, |x, y| x * x + y * y);
        let lq = apply_laplacian(&q);
        for (i, j) in g.interior() {
            assert!((lq.at(i, j) - 4.0).abs() < 1e-10);
        }
        assert_eq!(lq.at(0, 5), 0.0);
    }

    #[test]
    fn laplacian_of_sine() {
        let r = std::f64::consts::PI;
        // spacing 2π/(n−1) ≈ 0.05
        let n = 127;
        let g = Grid2D::uniform(r, n).unwrap();
        assert!((g.spacing() - 0.05).abs() < 0.001);
        let f = Field2D::from_fn(&g, |x, _| x.sin());
        let lf = apply_laplacian(&f);
        let err = g
            .interior()
            .map(|(i, j)| (lf.at(i, j) + g.x(i).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.01, "err = {err}");
    }

    #[test]
    fn laplacian_is_symmetric() {
        let g = Grid2D::uniform(2.0, 33).unwrap();
        let bump = |x: f64, y: f64, s: f64| {
            if x.abs() >= 2.0 - 1e-12 || y.abs() >= 2.0 - 1e-12 {
                0.0
            } else {
                ((x + s) * (y - s)).sin() * (4.0 - x * x) * (4.0 - y * y)
            }
        };
        let u = Field2D::from_fn(&g, |x, y| bump(x, y, 0.3));
        let v = Field2D::from_fn(&g, |x, y| bump(y, x, -0.7) + 0.1 * x);
        let mut v = v;
        for j in 0..g.nodes_per_side() {
            for i in 0..g.nodes_per_side() {
                if g.is_boundary(i, j) {
                    let k = g.index(i, j);
                    v.values[k] = 0.0;
                }
            }
        }
        let lu = apply_laplacian(&u);
        let lv = apply_laplacian(&v);
        let dot = |a: &Field2D, b: &Field2D| a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum::<f64>();
        let lhs = dot(&u, &lv);
        let rhs = dot(&lu, &v);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let g = Grid2D::uniform(1.0, 33).unwrap();
        let f = Field2D::from_fn(&g, |x, y| x + 1.0 / 3.0 + y);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,value"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[2], f.values[0]);
        assert_eq!(text.lines().count(), g.len() + 1);
    }
}
