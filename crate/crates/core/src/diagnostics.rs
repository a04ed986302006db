//! Physical observables of solved fields: flux, energy, metric factor, deficit angle and
//! decay-rate fits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discrete::{DiscreteProblem, StringWeight};
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::model::{background_gradient, ProblemSpec};
use crate::radial::RadialProfile;

/// Fits need at least this many samples.
pub const MIN_FIT_SAMPLES: usize = 50;

/// Relative disagreement between the two flux routes that raises a flag.
pub const FLUX_CONSISTENCY: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsBundle {
    pub total_flux: f64,
    pub source_integral: f64,
    /// Flux from the boundary line integral, the independent route.
    pub boundary_flux: f64,
    pub flux_consistent: bool,
    pub energy: f64,
    pub deficit_angle_integral: Option<f64>,
    pub deficit_angle_predicted: Option<f64>,
    pub decay_exponent_fit: Option<f64>,
    pub metric_tail_order: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    /// `−source_integral / 2`.
    pub total_flux: f64,
    /// `Σ F(v) h²` over interior nodes.
    pub source_integral: f64,
    /// `2πN − ½∮∂_n v`.
    pub boundary_flux: f64,
    pub consistent: bool,
}

fn problem_for(v: &Field2D, spec: &ProblemSpec, weight: Option<&StringWeight>) -> Result<DiscreteProblem> {
    match weight {
        None => Ok(DiscreteProblem::vortex(spec, &v.grid)),
        Some(u) => DiscreteProblem::string(spec, &v.grid, u),
    }
}

/// Discrete outward normal derivative integrated along the boundary, `Σ (v_b − v_in)`.
fn boundary_line_integral(v: &Field2D) -> f64 {
    let n = v.grid.nodes_per_side();
    let last = n - 1;
    let mut total = 0.0;
    for k in 1..last {
        total += v.at(0, k) - v.at(1, k);
        total += v.at(last, k) - v.at(last - 1, k);
        total += v.at(k, 0) - v.at(k, 1);
        total += v.at(k, last) - v.at(k, last - 1);
    }
    total
}

pub fn flux_and_source(v: &Field2D, spec: &ProblemSpec, weight: Option<&StringWeight>) -> Result<FluxReport> {
    let problem = problem_for(v, spec, weight)?;
    let g = &v.grid;
    let h2 = g.spacing() * g.spacing();
    let source_integral: f64 = g
        .interior()
        .map(|(i, j)| {
            let idx = g.index(i, j);
            problem.nonlinear_at(idx, v.values[idx])
        })
        .sum::<f64>()
        * h2;
    if !source_integral.is_finite() {
        return Err(Error::NonFinite { context: "source integral" });
    }
    let total_flux = -0.5 * source_integral;
    let boundary_flux = 2.0 * PI * spec.total_number() as f64 - 0.5 * boundary_line_integral(v);
    let scale = total_flux.abs().max(boundary_flux.abs());
    let consistent = (total_flux - boundary_flux).abs() <= FLUX_CONSISTENCY * scale || scale == 0.0;
    Ok(FluxReport {
        total_flux,
        source_integral,
        boundary_flux,
        consistent,
    })
}

/// Gradient of the offset `v_b` (`v0`, or `v_δ` when `delta` is given).
fn offset_gradient(x: (f64, f64), spec: &ProblemSpec, delta: Option<f64>) -> (f64, f64) {
    match delta {
        None => background_gradient(x, spec),
        Some(d) => {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for c in &spec.centers {
                let dx = x.0 - c.x;
                let dy = x.1 - c.y;
                let r2 = dx * dx + dy * dy;
                let mu = c.multiplicity as f64;
                let s = 2.0 * mu * (1.0 / (d + r2) - 1.0 / (1.0 + r2));
                gx += s * dx;
                gy += s * dy;
            }
            (gx, gy)
        }
    }
}

/// `E = ¼∫[(eᵛ−1)Δv + eᵛ|∇v|²]` with `Δv` replaced by the smooth right-hand side.
/// With `v = v_b + w` the density is smooth through the centers, so a plain node sum is
/// second order.
pub fn energy_total(v: &Field2D, spec: &ProblemSpec, weight: Option<&StringWeight>) -> Result<f64> {
    let problem = problem_for(v, spec, weight)?;
    let delta = weight.map(|u| u.delta);
    let w = problem.offset_part(v);
    let g = &v.grid;
    let h2 = g.spacing() * g.spacing();
    let density = |i: usize, j: usize| {
        let idx = g.index(i, j);
        let vi = v.values[idx];
        let e = vi.exp();
        let (ox, oy) = offset_gradient((g.x(i), g.y(j)), spec, delta);
        let (wx, wy) = w.gradient_at(i, j);
        let grad2 = (ox + wx).powi(2) + (oy + wy).powi(2);
        0.25 * (vi.exp_m1() * problem.nonlinear_at(idx, vi) + e * grad2)
    };
    let total: f64 = g.interior().map(|(i, j)| density(i, j) * h2).sum();
    if !total.is_finite() {
        return Err(Error::NonFinite { context: "energy" });
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub eta: Field2D,
    /// `Σ K_η e^η h²` over the grid plus the analytic tail beyond it.
    pub deficit_integral: f64,
    pub tail_correction: f64,
    /// `8π²GN`.
    pub predicted: f64,
    /// Slope of `η` against `ln|x|` on the fit annulus.
    pub tail_order: f64,
    pub notes: Vec<String>,
}

/// Metric factor `η = a(v − eᵛ − Σμ ln|x−p|²) + ln λ` and the total curvature
/// `∫K_η e^η = −½∫Δη`.
pub fn metric_and_deficit(v: &Field2D, spec: &ProblemSpec) -> Result<MetricReport> {
    if spec.newton_g <= 0.0 {
        return Err(Error::Precondition("metric factor needs G > 0".into()));
    }
    let mut notes = Vec::new();
    let lambda = match spec.resolved_lambda() {
        Some(l) => l,
        None => {
            notes.push("NORMALIZATION_DEFAULT: lambda = 1".to_string());
            1.0
        }
    };
    let a = spec.a();
    let g = &v.grid;
    let values = v
        .values
        .iter()
        .enumerate()
        .map(|(idx, &vi)| {
            let (x, y) = g.point(idx);
            let logs: f64 = spec
                .centers
                .iter()
                .map(|c| c.multiplicity as f64 * c.dist2(x, y).ln())
                .sum();
            a * (vi - vi.exp() - logs) + lambda.ln()
        })
        .collect();
    let eta = Field2D::from_values(g, values)?;
    let h2 = g.spacing() * g.spacing();
    let box_integral: f64 = g.interior().map(|(i, j)| -0.5 * eta.laplacian_at(i, j) * h2).sum();

    let tail_correction = match decay_fit(DecaySource::Field(v), DecayKind::Algebraic) {
        Ok(fit) if fit.order > 0.0 => {
            // v ≈ −C r^{−p} beyond the grid: −½∫_{|x|>R} Δ(a(v − eᵛ)) = πapC R^{−p}(1 − e^{v(R)})
            let r = g.radius();
            let c = fit.intercept.exp();
            let vr = -c * r.powf(-fit.order);
            PI * a * fit.order * c * r.powf(-fit.order) * (-vr.exp_m1())
        }
        _ => {
            notes.push("tail correction skipped: no algebraic fit".to_string());
            0.0
        }
    };
    let tail_order = fit_against_log_radius(&eta)?;
    Ok(MetricReport {
        eta,
        deficit_integral: box_integral + tail_correction,
        tail_correction,
        predicted: 2.0 * PI * a * spec.total_number() as f64,
        tail_order,
        notes,
    })
}

/// Least-squares slope of `η` against `ln|x|` on the fit annulus.
fn fit_against_log_radius(eta: &Field2D) -> Result<f64> {
    let (lo, hi) = default_annulus(eta.grid.radius());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for idx in 0..eta.grid.len() {
        let (x, y) = eta.grid.point(idx);
        let r = x.hypot(y);
        if r >= lo && r <= hi {
            xs.push(r.ln());
            ys.push(eta.values[idx]);
        }
    }
    Ok(least_squares(&xs, &ys)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// `|v| ~ C e^{−order·r}`.
    Exponential,
    /// `|v| ~ C r^{−order}`.
    Algebraic,
    /// `|v| ~ C r^{−1/2} e^{−order·r}`, the planar linearized (`K₀`) tail.
    Bessel,
}

#[derive(Debug, Clone, Copy)]
pub enum DecaySource<'a> {
    Field(&'a Field2D),
    /// `|∇_h v|` of a field.
    Gradient(&'a Field2D),
    /// Radial profile; the abscissa is `r = eᵗ`, so the algebraic kind fits against `t`.
    Profile(&'a RadialProfile),
    /// `|v′(t)|` of a radial profile.
    ProfileDerivative(&'a RadialProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub order: f64,
    /// `1 − SS_res/SS_tot` of the log-linear fit.
    pub confidence: f64,
    /// Fitted `ln C`.
    pub intercept: f64,
    pub samples: usize,
}

/// Annulus `[R/2, 3R/4]`.
pub fn default_annulus(radius: f64) -> (f64, f64) {
    (0.5 * radius, 0.75 * radius)
}

/// Decay fit over the default window: the annulus `[R/2, 3R/4]` for fields, and
/// `[X/2, 3X/4]` of the profile's final abscissa `X` for radial profiles.
pub fn decay_fit(source: DecaySource<'_>, kind: DecayKind) -> Result<DecayFit> {
    let (lo, hi) = default_window(source, kind);
    decay_fit_window(source, kind, lo, hi)
}

/// Window used by [`decay_fit`].
pub fn default_window(source: DecaySource<'_>, kind: DecayKind) -> (f64, f64) {
    match source {
        DecaySource::Field(f) | DecaySource::Gradient(f) => default_annulus(f.grid.radius()),
        DecaySource::Profile(p) | DecaySource::ProfileDerivative(p) => {
            let end = match kind {
                DecayKind::Algebraic => p.t_end,
                _ => p.t_end.exp(),
            };
            (0.5 * end, 0.75 * end)
        }
    }
}

/// Decay fit with samples whose abscissa (`|x|`, or `r` / `t` for profiles) lies in `[lo, hi]`.
pub fn decay_fit_window(source: DecaySource<'_>, kind: DecayKind, lo: f64, hi: f64) -> Result<DecayFit> {
    let (xs, ys) = decay_samples(source, kind, lo, hi);
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Failed(format!(
            "decay fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            xs.len()
        )));
    }
    let (slope, intercept, confidence) = least_squares(&xs, &ys)?;
    Ok(DecayFit {
        order: -slope,
        confidence,
        intercept,
        samples: xs.len(),
    })
}

/// The log-linear points a fit over `[lo, hi]` uses: abscissa and transformed `ln|value|`.
pub fn decay_samples(source: DecaySource<'_>, kind: DecayKind, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut push = |r: f64, value: f64, log_r: f64| {
        let mag = value.abs();
        if mag > 0.0 && mag.is_finite() {
            let (x, y) = match kind {
                DecayKind::Exponential => (r, mag.ln()),
                DecayKind::Algebraic => (log_r, mag.ln()),
                DecayKind::Bessel => (r, mag.ln() + 0.5 * log_r),
            };
            xs.push(x);
            ys.push(y);
        }
    };
    match source {
        DecaySource::Field(f) => {
            for idx in 0..f.grid.len() {
                let (x, y) = f.grid.point(idx);
                let r = x.hypot(y);
                if r >= lo && r <= hi {
                    push(r, f.values[idx], r.ln());
                }
            }
        }
        DecaySource::Gradient(f) => {
            let g = &f.grid;
            for (i, j) in g.interior() {
                let r = g.x(i).hypot(g.y(j));
                if r >= lo && r <= hi {
                    let (gx, gy) = f.gradient_at(i, j);
                    push(r, gx.hypot(gy), r.ln());
                }
            }
        }
        DecaySource::Profile(p) | DecaySource::ProfileDerivative(p) => {
            let values = match source {
                DecaySource::Profile(_) => &p.v_samples,
                _ => &p.vprime_samples,
            };
            for (&t, &val) in p.t_samples.iter().zip(values) {
                let r = t.exp();
                let a = match kind {
                    DecayKind::Algebraic => t,
                    _ => r,
                };
                if a >= lo && a <= hi {
                    push(r, val, t);
                }
            }
        }
    }
    (xs, ys)
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns `(slope, intercept, R²)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::Failed("fit needs at least two samples".into()));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Failed("fit abscissae are degenerate".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let confidence = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((slope, intercept, confidence))
}

/// Flux, energy and the decay fit of a flat vortex field.
pub fn vortex_bundle(v: &Field2D, spec: &ProblemSpec) -> Result<DiagnosticsBundle> {
    let flux = flux_and_source(v, spec, None)?;
    let mut notes = Vec::new();
    if !flux.consistent {
        notes.push("FLUX_INCONSISTENT: flux routes disagree by more than 1%".to_string());
    }
    Ok(DiagnosticsBundle {
        total_flux: flux.total_flux,
        source_integral: flux.source_integral,
        boundary_flux: flux.boundary_flux,
        flux_consistent: flux.consistent,
        energy: energy_total(v, spec, None)?,
        deficit_angle_integral: None,
        deficit_angle_predicted: None,
        decay_exponent_fit: decay_fit(DecaySource::Field(v), DecayKind::Exponential)
            .ok()
            .map(|f| f.order),
        metric_tail_order: None,
        notes,
    })
}

/// Flux, energy, algebraic decay and deficit angle of a string field.
pub fn string_bundle(v: &Field2D, spec: &ProblemSpec, weight: &StringWeight) -> Result<DiagnosticsBundle> {
    let flux = flux_and_source(v, spec, Some(weight))?;
    let metric = metric_and_deficit(v, spec)?;
    let mut notes = metric.notes.clone();
    if !flux.consistent {
        notes.push("FLUX_INCONSISTENT: flux routes disagree by more than 1%".to_string());
    }
    Ok(DiagnosticsBundle {
        total_flux: flux.total_flux,
        source_integral: flux.source_integral,
        boundary_flux: flux.boundary_flux,
        flux_consistent: flux.consistent,
        energy: energy_total(v, spec, Some(weight))?,
        deficit_angle_integral: Some(metric.deficit_integral),
        deficit_angle_predicted: Some(metric.predicted),
        decay_exponent_fit: decay_fit(DecaySource::Field(v), DecayKind::Algebraic)
            .ok()
            .map(|f| f.order),
        metric_tail_order: Some(metric.tail_order),
        notes,
    })
}

/// Grid helper for synthetic tests: a field from a radial profile `f(|x|)`.
pub fn radial_field(grid: &Grid2D, f: impl Fn(f64) -> f64) -> Field2D {
    Field2D::from_fn(grid, |x, y| f(x.hypot(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_exponential_order() {
        let g = Grid2D::uniform(10.0, 201).unwrap();
        let f = radial_field(&g, |r| -(-2.0 * r).exp());
        let fit = decay_fit(DecaySource::Field(&f), DecayKind::Exponential).unwrap();
        assert!((fit.order - 2.0).abs() < 0.02 && fit.confidence > 0.999999);
    }

    #[test]
    fn planted_algebraic_order() {
        let g = Grid2D::uniform(10.0, 201).unwrap();
        let f = radial_field(&g, |r| -r.powi(-2));
        let fit = decay_fit(DecaySource::Field(&f), DecayKind::Algebraic).unwrap();
        assert!((fit.order - 2.0).abs() < 0.02);
        let grad = decay_fit(DecaySource::Gradient(&f), DecayKind::Algebraic).unwrap();
        assert!((grad.order - 3.0).abs() < 0.03, "{}", grad.order);
    }

    #[test]
    fn too_few_samples_fail() {
        let g = Grid2D::uniform(1.0, 33).unwrap();
        let f = radial_field(&g, |r| -(-r).exp());
        assert!(decay_fit_window(DecaySource::Field(&f), DecayKind::Exponential, 0.5, 0.52).is_err());
    }

    #[test]
    fn zero_field_has_zero_flux_and_energy() {
        let spec = ProblemSpec::new(Vec::new(), 1.0, 2.0, 0.0).unwrap();
        let g = Grid2D::build(5.0, 51, &spec).unwrap();
        let v = Field2D::zeros(&g);
        let flux = flux_and_source(&v, &spec, None).unwrap();
        assert_eq!(flux.total_flux, 0.0);
        assert_eq!(flux.source_integral, 0.0);
        assert_eq!(energy_total(&v, &spec, None).unwrap(), 0.0);
    }

    #[test]
    fn deficit_requires_gravity() {
        let spec = ProblemSpec::flat(&[(0.0, 0.0)], 1.0, 2.0).unwrap();
        let g = Grid2D::build(5.0, 51, &spec).unwrap();
        assert!(metric_and_deficit(&Field2D::zeros(&g), &spec).is_err());
    }
}
