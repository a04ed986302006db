//! Physical configuration and the pointwise functions of the special model:
//! the vortex nonlinearity `f_m(v) = β(1+eᵛ)ᵐ(eᵛ−1)`, its derivative, the
//! potentials `h`, `w`, and the analytic background / regularization fields.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node-to-center distance below which a point counts as sitting on a center.
const CENTER_EPS: f64 = 1e-300;

/// Sentinel returned for `v0` exactly at a center.
pub const CENTER_SENTINEL: f64 = -1e308;

fn one() -> u32 {
    1
}

/// A vortex / string center with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Center {
    pub x: f64,
    pub y: f64,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

impl Center {
    pub fn new(x: f64, y: f64, multiplicity: u32) -> Self {
        Center { x, y, multiplicity }
    }

    #[inline]
    pub fn dist2(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.x;
        let dy = y - self.y;
        dx * dx + dy * dy
    }

    #[inline]
    fn mu(&self) -> f64 {
        self.multiplicity as f64
    }
}

/// Physical configuration of a vortex or string problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub centers: Vec<Center>,
    pub m: f64,
    pub beta: f64,
    /// Newton's constant; zero for flat-space vortices.
    #[serde(rename = "G", default)]
    pub newton_g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl ProblemSpec {
    pub fn new(centers: Vec<Center>, m: f64, beta: f64, newton_g: f64) -> Result<Self> {
        let spec = ProblemSpec {
            centers,
            m,
            beta,
            newton_g,
            lambda: None,
            kappa: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Flat-space spec with all centers of multiplicity one.
    pub fn flat(points: &[(f64, f64)], m: f64, beta: f64) -> Result<Self> {
        let centers = points.iter().map(|&(x, y)| Center::new(x, y, 1)).collect();
        Self::new(centers, m, beta, 0.0)
    }

    /// Builds a spec from `λ` and `κ`, setting `β = 4λ/κ²`.
    pub fn with_lambda_kappa(
        centers: Vec<Center>,
        m: f64,
        lambda: f64,
        kappa: f64,
        newton_g: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && kappa > 0.0) {
            return Err(Error::Config("lambda and kappa must be positive".into()));
        }
        let spec = ProblemSpec {
            centers,
            m,
            beta: 4.0 * lambda / (kappa * kappa),
            newton_g,
            lambda: Some(lambda),
            kappa: Some(kappa),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m.is_finite() || self.m == 0.0 {
            return Err(Error::Config(format!("m must be finite and nonzero, got {}", self.m)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.newton_g.is_finite() && self.newton_g >= 0.0) {
            return Err(Error::Config(format!("G must be nonnegative, got {}", self.newton_g)));
        }
        for c in &self.centers {
            if !(c.x.is_finite() && c.y.is_finite()) {
                return Err(Error::Config("center coordinates must be finite".into()));
            }
            if c.multiplicity == 0 {
                return Err(Error::Config("center multiplicity must be positive".into()));
            }
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config("lambda must be positive".into()));
            }
        }
        if let Some(k) = self.kappa {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Config("kappa must be positive".into()));
            }
        }
        if let (Some(l), Some(k)) = (self.lambda, self.kappa) {
            let expected = 4.0 * l / (k * k);
            if ((self.beta - expected) / expected).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "beta = {} inconsistent with 4*lambda/kappa^2 = {}",
                    self.beta, expected
                )));
            }
        }
        Ok(())
    }

    /// Total string number `N`, counted with multiplicity.
    pub fn total_number(&self) -> u32 {
        self.centers.iter().map(|c| c.multiplicity).sum()
    }

    /// `a = 4πG`.
    pub fn a(&self) -> f64 {
        4.0 * PI * self.newton_g
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.centers.iter().map(|c| c.multiplicity).max().unwrap_or(0)
    }

    /// Number of geometrically distinct centers.
    pub fn distinct_centers(&self) -> usize {
        let mut seen: Vec<(f64, f64)> = Vec::new();
        for c in &self.centers {
            if !seen
                .iter()
                .any(|&(x, y)| (x - c.x).abs() < 1e-12 && (y - c.y).abs() < 1e-12)
            {
                seen.push((c.x, c.y));
            }
        }
        seen.len()
    }

    pub fn all_coincident(&self) -> bool {
        self.distinct_centers() <= 1
    }

    pub fn coupling(&self) -> Coupling {
        Coupling::new(self.m, self.beta)
    }

    /// `λ` if given, else `βκ²/4` if `κ` is given.
    pub fn resolved_lambda(&self) -> Option<f64> {
        self.lambda
            .or_else(|| self.kappa.map(|k| self.beta * k * k / 4.0))
    }
}

/// `ln(1 + eᵛ)` without overflow.
#[inline]
pub fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

/// `ln|eᵛ − 1|` for `v ≠ 0`.
#[inline]
fn log_abs_expm1(v: f64) -> f64 {
    if v > 0.0 {
        v + (-(-v).exp_m1()).ln()
    } else {
        (-v.exp_m1()).ln()
    }
}

/// Largest log-magnitude we are willing to exponentiate.
const LOG_MAX: f64 = 709.0;

/// The vortex nonlinearity for fixed `(m, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub m: f64,
    pub beta: f64,
}

impl Coupling {
    pub fn new(m: f64, beta: f64) -> Self {
        Coupling { m, beta }
    }

    /// `f_m(v) = β(1+eᵛ)ᵐ(eᵛ−1)`; for `m = −n` this is `β(eᵛ−1)/(1+eᵛ)ⁿ`.
    pub fn value(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::NonFinite { context: "nonlinearity argument" });
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        let sp = softplus(v);
        if v <= 30.0 && (self.m * sp).abs() < LOG_MAX {
            let r = self.beta * (self.m * sp).exp() * v.exp_m1();
            if r.is_finite() {
                return Ok(r);
            }
        }
        let log_mag = self.beta.ln() + self.m * sp + log_abs_expm1(v);
        if log_mag > LOG_MAX {
            return Err(Error::NonFinite { context: "nonlinearity" });
        }
        Ok(v.signum() * log_mag.exp())
    }

    /// `f_m′(v) = βeᵛ(1+eᵛ)ᵐ(1 + m(eᵛ−1)/(1+eᵛ))`.
    pub fn derivative(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::NonFinite { context: "derivative argument" });
        }
        // (eᵛ−1)/(eᵛ+1) = tanh(v/2)
        let shape = 1.0 + self.m * (0.5 * v).tanh();
        let log_mag = self.beta.ln() + v + self.m * softplus(v);
        if log_mag > LOG_MAX {
            return Err(Error::NonFinite { context: "nonlinearity derivative" });
        }
        Ok(log_mag.exp() * shape)
    }

    /// Unchecked value; exact for `v ≤ 0`, where nothing can overflow, and used up to `v = 30`.
    #[inline]
    pub(crate) fn value_nonpositive(&self, v: f64) -> f64 {
        debug_assert!(v <= 30.0);
        self.beta * (self.m * v.exp().ln_1p()).exp() * v.exp_m1()
    }

    /// Upper bound of `f_m′` on `v ≤ 0`: `β·2ᵐ` for `m > 0`, `β(1+n)` for `m = −n < 0`.
    pub fn slope_bound(&self) -> f64 {
        if self.m > 0.0 {
            self.beta * 2f64.powf(self.m)
        } else {
            self.beta * (1.0 - self.m)
        }
    }

    /// Linearization coefficient at the vacuum, `f_m′(0) = β·2ᵐ`.
    pub fn vacuum_mass2(&self) -> f64 {
        self.beta * 2f64.powf(self.m)
    }
}

/// `f_m(v)` for a validated spec.
pub fn nonlinearity(v: f64, spec: &ProblemSpec) -> Result<f64> {
    spec.coupling().value(v)
}

/// `f_m′(v)` for a validated spec.
pub fn nonlinearity_derivative(v: f64, spec: &ProblemSpec) -> Result<f64> {
    spec.coupling().derivative(v)
}

/// `h(s)` and `w(s)` of the special model at `s = |u|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialPair {
    pub h_value: f64,
    pub w_value: f64,
}

pub fn potentials(s: f64, spec: &ProblemSpec) -> Result<PotentialPair> {
    let kappa = spec
        .kappa
        .ok_or_else(|| Error::Config("potentials need kappa".into()))?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Precondition(format!("s = |u|^2 must be >= 0, got {s}")));
    }
    let p = (1.0 + s).powf(0.5 * spec.m);
    Ok(PotentialPair {
        h_value: kappa / (2.0 * p),
        w_value: p * (1.0 - s) / kappa,
    })
}

/// Background field `v0` and source `g` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub v0: f64,
    pub g: f64,
    /// Set when the point coincides with a center; `v0` then holds [`CENTER_SENTINEL`].
    pub at_center: bool,
}

/// `v0 = −Σμ ln(1+|x−p|⁻²)` and `g = 4Σμ(1+|x−p|²)⁻²`.
pub fn background_fields(x: (f64, f64), spec: &ProblemSpec) -> Background {
    let mut v0 = 0.0;
    let mut g = 0.0;
    let mut at_center = false;
    for c in &spec.centers {
        let r2 = c.dist2(x.0, x.1);
        let mu = c.mu();
        let q = 1.0 + r2;
        g += 4.0 * mu / (q * q);
        if r2 < CENTER_EPS {
            at_center = true;
        } else {
            v0 += mu * (r2.ln() - r2.ln_1p());
        }
    }
    if at_center {
        v0 = CENTER_SENTINEL;
    }
    Background { v0, g, at_center }
}

/// Gradient of `v0`, `Σ 2μ(x−p)/(r²(1+r²))`. Undefined at a center.
pub fn background_gradient(x: (f64, f64), spec: &ProblemSpec) -> (f64, f64) {
    let mut gx = 0.0;
    let mut gy = 0.0;
    for c in &spec.centers {
        let dx = x.0 - c.x;
        let dy = x.1 - c.y;
        let r2 = dx * dx + dy * dy;
        let s = 2.0 * c.mu() / (r2 * (1.0 + r2));
        gx += s * dx;
        gy += s * dy;
    }
    (gx, gy)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")))
    }
}

/// `v_δ(x) = Σμ ln((δ+|x−p|²)/(1+|x−p|²))`, the regularized subsolution.
pub fn regularized_offset(x: (f64, f64), delta: f64, spec: &ProblemSpec) -> Result<f64> {
    check_delta(delta)?;
    Ok(regularized_offset_unchecked(x, delta, spec))
}

pub(crate) fn regularized_offset_unchecked(x: (f64, f64), delta: f64, spec: &ProblemSpec) -> f64 {
    spec.centers
        .iter()
        .map(|c| {
            let r2 = c.dist2(x.0, x.1);
            // ln(1 − (1−δ)/(1+r²)) keeps precision far from the centers
            c.mu() * (-(1.0 - delta) / (1.0 + r2)).ln_1p()
        })
        .sum()
}

/// Regularized point source `Σ 4δμ/(δ+|x−p|²)²`; integrates to `4πN` over the plane.
pub fn regularized_source(x: (f64, f64), delta: f64, spec: &ProblemSpec) -> f64 {
    spec.centers
        .iter()
        .map(|c| {
            let q = delta + c.dist2(x.0, x.1);
            4.0 * delta * c.mu() / (q * q)
        })
        .sum()
}

/// String weight `U_δ(x) = Π(δ+|x−p|²)^{−aμ}`; `δ = 0` gives the unregularized weight.
pub fn string_weight(x: (f64, f64), delta: f64, spec: &ProblemSpec) -> f64 {
    let a = spec.a();
    let log: f64 = spec
        .centers
        .iter()
        .map(|c| c.mu() * (delta + c.dist2(x.0, x.1)).ln())
        .sum();
    (-a * log).exp()
}

/// The string nonlinearity without its spatial weight:
/// `e^{a(v−eᵛ)}(1+eᵛ)ᵐ(eᵛ−1)`, times `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringCoupling {
    pub coupling: Coupling,
    pub a: f64,
}

impl StringCoupling {
    pub fn new(spec: &ProblemSpec) -> Self {
        StringCoupling {
            coupling: spec.coupling(),
            a: spec.a(),
        }
    }

    #[inline]
    pub fn value(&self, v: f64) -> f64 {
        let e = v.exp();
        (self.a * (v - e)).exp() * self.coupling.value_nonpositive(v)
    }

    #[inline]
    pub fn derivative(&self, v: f64) -> f64 {
        let e = v.exp();
        let m = self.coupling.m;
        let bracket = e - self.a * (1.0 - e) * (1.0 - e) + m * e * (0.5 * v).tanh();
        self.coupling.beta * (self.a * (v - e)).exp() * (m * e.ln_1p()).exp() * bracket
    }

    /// Upper bound of `derivative` on `(−∞, v_top]` for `v_top ≤ 0`; increasing in `v_top`.
    #[inline]
    pub fn derivative_bound(&self, v_top: f64) -> f64 {
        let top = v_top.min(0.0);
        let e = top.exp();
        let m = self.coupling.m;
        let growth = if m > 0.0 { (m * e.ln_1p()).exp() } else { 1.0 };
        let shape = if m < 0.0 { 1.0 - m } else { 1.0 };
        self.coupling.beta * (self.a * (top - e)).exp() * growth * e * shape
    }
}
