//! Readers for the CSV files the solvers write.

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};

/// Largest field file accepted by the reader, in nodes.
pub const MAX_FIELD_NODES: usize = 4001 * 4001;

fn parse_row<const K: usize>(line: &str, lineno: usize) -> Result<[f64; K]> {
    let mut out = [0.0; K];
    let mut parts = line.split(',');
    for slot in out.iter_mut() {
        let cell = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("line {lineno}: expected {K} columns")))?;
        let value: f64 = cell
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: bad number {:?}", cell.trim())))?;
        if !value.is_finite() {
            return Err(Error::Parse(format!("line {lineno}: non-finite value")));
        }
        *slot = value;
    }
    if parts.next().is_some() {
        return Err(Error::Parse(format!("line {lineno}: expected {K} columns")));
    }
    Ok(out)
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines.map(|(i, l)| (i + 1, l))),
        _ => Err(Error::Parse(format!("missing header {header:?}"))),
    }
}

/// Reads an `x,y,value` field and recovers its grid from the coordinates.
pub fn parse_field_csv(text: &str) -> Result<Field2D> {
    let mut points = Vec::new();
    for (lineno, line) in rows(text, "x,y,value")? {
        if points.len() >= MAX_FIELD_NODES {
            return Err(Error::Parse("field file too large".into()));
        }
        points.push(parse_row::<3>(line, lineno)?);
    }
    let n = (points.len() as f64).sqrt().round() as usize;
    if n * n != points.len() || n < 2 {
        return Err(Error::Parse(format!("{} rows is not a square grid", points.len())));
    }
    let x0 = points[0][0];
    let y0 = points[0][1];
    let spacing = (points[n - 1][0] - x0) / (n - 1) as f64;
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parse("x coordinates of the first row must increase".into()));
    }
    let radius = 0.5 * spacing * (n - 1) as f64;
    let grid = Grid2D::with_offset(radius, n, (x0 + radius, y0 + radius))
        .map_err(|e| Error::Parse(e.to_string()))?;
    let tol = 1e-9 * spacing.max(radius);
    let mut values = Vec::with_capacity(points.len());
    for (idx, p) in points.iter().enumerate() {
        let (x, y) = grid.point(idx);
        if (p[0] - x).abs() > tol || (p[1] - y).abs() > tol {
            return Err(Error::Parse(format!(
                "row {idx}: ({}, {}) is not the row-major node ({x}, {y})",
                p[0], p[1]
            )));
        }
        values.push(p[2]);
    }
    Field2D::from_values(&grid, values)
}

/// Columns of a radial profile file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialSamples {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub vprime: Vec<f64>,
}

/// Reads a `t,v,vprime` profile; `t` must be strictly increasing.
pub fn parse_radial_csv(text: &str) -> Result<RadialSamples> {
    let mut out = RadialSamples::default();
    for (lineno, line) in rows(text, "t,v,vprime")? {
        let [t, v, p] = parse_row::<3>(line, lineno)?;
        if let Some(&last) = out.t.last() {
            if t <= last {
                return Err(Error::Parse(format!("line {lineno}: t is not increasing")));
            }
        }
        out.t.push(t);
        out.v.push(v);
        out.vprime.push(p);
    }
    if out.t.is_empty() {
        return Err(Error::Parse("profile has no samples".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemSpec;

    #[test]
    fn field_round_trip_is_exact() {
        let spec = ProblemSpec::flat(&[(0.0, 0.0)], 1.0, 2.0).unwrap();
        let grid = Grid2D::build(3.0, 33, &spec).unwrap();
        assert_ne!(grid.offset(), (0.0, 0.0));
        let f = Field2D::from_fn(&grid, |x, y| (x * 1.3).sin() * y.exp() / 7.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = parse_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.grid.nodes_per_side(), 33);
        assert!((back.grid.spacing() - grid.spacing()).abs() < 1e-14);
    }

    #[test]
    fn field_rejects_bad_input() {
        assert!(parse_field_csv("").is_err());
        assert!(parse_field_csv("x,y,value\n0,0,1\n1,0,1\n").is_err());
        assert!(parse_field_csv("x,y,value\n0,0\n").is_err());
        assert!(parse_field_csv("x,y,value\n0,0,NaN\n").is_err());
        let grid = Grid2D::uniform(1.0, 33).unwrap();
        let mut buf = Vec::new();
        Field2D::zeros(&grid).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("-1.0", "-0.5", 1);
        assert!(parse_field_csv(&text).is_err());
    }

    #[test]
    fn radial_rows() {
        let r = parse_radial_csv("t,v,vprime\n-1,-2,2\n0,-0.5,1\n").unwrap();
        assert_eq!(r.t, vec![-1.0, 0.0]);
        assert!(parse_radial_csv("t,v,vprime\n0,1,1\n0,1,1\n").is_err());
        assert!(parse_radial_csv("t,v,vprime\n").is_err());
        assert!(parse_radial_csv("t,v\n0,1\n").is_err());
    }
}
