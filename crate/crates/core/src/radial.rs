//! Coincident-center problems in the radial variable `t = ln r`: the gravitating string
//! connection for `aN = 1`, the `β` quadrature that selects it, and a flat-space shooting
//! oracle for the vortex equation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Miss, Result};
use crate::model::{softplus, ProblemSpec};
use crate::quadrature::{integrate, Quadrature};

/// Default march / initialization step in `t`.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Relative energy defect allowed per step, in units of `4N²`.
pub const ENERGY_TOL: f64 = 1e-6;

const QUAD_REL_TOL: f64 = 1e-13;
const MAX_HALVINGS: usize = 30;
const MAX_PICARD_SWEEPS: usize = 200;
const PICARD_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialKind {
    /// `v″ = βe^{a(v−eᵛ)}(1+eᵛ)ᵐ(eᵛ−1)`.
    String,
    /// `v″ = βe^{2t}(1+eᵛ)ᵐ(eᵛ−1)`.
    Vortex,
}

/// Parameters of a coincident-center radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialParams {
    pub kind: RadialKind,
    /// `a = 4πG`; zero for the flat vortex.
    pub a: f64,
    pub m: f64,
    pub beta: f64,
    /// String number `N`.
    pub n: u32,
}

impl RadialParams {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        if !spec.all_coincident() || spec.centers.is_empty() {
            return Err(Error::Precondition(
                "radial problems need at least one center and all centers coincident".into(),
            ));
        }
        let n = spec.total_number();
        let kind = if spec.newton_g > 0.0 {
            let an = spec.a() * n as f64;
            if (an - 1.0).abs() > 1e-9 {
                return Err(Error::Precondition(format!(
                    "the radial string needs aN = 1, got aN = {an}"
                )));
            }
            RadialKind::String
        } else {
            RadialKind::Vortex
        };
        Ok(RadialParams {
            kind,
            a: spec.a(),
            m: spec.m,
            beta: spec.beta,
            n,
        })
    }

    fn two_n(&self) -> f64 {
        2.0 * self.n as f64
    }

    /// Right-hand side `v″` at `(t, v)`.
    #[inline]
    pub fn rhs(&self, t: f64, v: f64) -> f64 {
        let core = (self.m * softplus(v)).exp() * v.exp_m1();
        match self.kind {
            RadialKind::String => self.beta * (self.a * (v - v.exp())).exp() * core,
            RadialKind::Vortex => self.beta * (2.0 * t).exp() * core,
        }
    }

    /// Predicted decay rate: `√(2ᵐe^{−a}β)` in `t` for strings, `√(2ᵐβ)` in `r` for vortices.
    pub fn predicted_decay(&self) -> f64 {
        (2f64.powf(self.m) * (-self.a).exp() * self.beta).sqrt()
    }
}

/// Samples of `v(t)` and `v′(t)` on an increasing grid in `t = ln r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub params: RadialParams,
    pub t_samples: Vec<f64>,
    pub v_samples: Vec<f64>,
    pub vprime_samples: Vec<f64>,
    pub t_start: f64,
    pub t_end: f64,
    /// Sup-norm updates of the Picard sweeps (initialization only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub picard_trace: Vec<f64>,
    /// Largest energy defect `|v′² − F(v)|` seen by the march.
    #[serde(default)]
    pub max_energy_defect: f64,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.t_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_samples.is_empty()
    }

    /// Cubic Hermite interpolation of `v` at `t`. Outside the sampled range the nearest
    /// end value is returned.
    pub fn value_at(&self, t: f64) -> f64 {
        let ts = &self.t_samples;
        if ts.is_empty() {
            return f64::NAN;
        }
        if t <= ts[0] {
            return self.v_samples[0];
        }
        if t >= ts[ts.len() - 1] {
            return self.v_samples[ts.len() - 1];
        }
        let k = ts.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (ts[k], ts[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (v0, v1) = (self.v_samples[k], self.v_samples[k + 1]);
        let (d0, d1) = (self.vprime_samples[k] * h, self.vprime_samples[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * v0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * v1 + (s3 - s2) * d1
    }

    /// `v` at radius `r`.
    pub fn value_at_radius(&self, r: f64) -> f64 {
        self.value_at(r.ln())
    }

    /// Strictly increasing and negative after `t_start`.
    pub fn is_monotone_negative(&self) -> bool {
        self.v_samples.iter().all(|&v| v < 0.0)
            && self.v_samples.windows(2).all(|w| w[1] > w[0])
            && self.vprime_samples.iter().all(|&p| p > 0.0)
    }

    /// Writes `t,v,vprime` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,v,vprime")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.t_samples[k], self.v_samples[k], self.vprime_samples[k]
            )?;
        }
        Ok(())
    }
}

/// `e^{a(v−eᵛ)}(1+eᵛ)ᵐ(1−eᵛ)`, the `β`-free string integrand (nonnegative for `v ≤ 0`).
#[inline]
fn string_integrand(a: f64, m: f64, v: f64) -> f64 {
    (a * (v - v.exp()) + m * softplus(v)).exp() * (-v.exp_m1())
}

/// Result of the `β` quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaQuadrature {
    pub a: f64,
    pub m: f64,
    /// `I(a, m) = ∫_{−∞}^0 e^{a(v−eᵛ)}(1+eᵛ)ᵐ(1−eᵛ) dv`.
    pub integral: f64,
    pub error: f64,
    /// `2N² / I`; zero when no string number was supplied.
    pub beta: f64,
}

/// Interval `[lo, hi]` that must contain `I(a, m)`.
pub fn integral_bracket(a: f64, m: f64) -> (f64, f64) {
    let base = (-a).exp() / a;
    let scale = 2f64.powf(m);
    if m >= 0.0 {
        (base, scale * base)
    } else {
        (scale * base, base)
    }
}

/// Computes `I(a, m)`; `m = 0` is accepted here as a closed-form test case.
pub fn coincident_integral(a: f64, m: f64) -> Result<BetaQuadrature> {
    if !(a > 0.0 && a <= 1.0) || !m.is_finite() {
        return Err(Error::Precondition(format!("need 0 < a <= 1 and finite m, got a = {a}, m = {m}")));
    }
    let lower = -60.0 / a;
    let q: Quadrature = integrate(|v| string_integrand(a, m, v), lower, 0.0, 0.0, QUAD_REL_TOL)?;
    // below the cut the integrand is e^{av} up to factors 1 + O(e^{v})
    let tail = (a * lower).exp() / a;
    let integral = q.estimate + tail;
    let (lo, hi) = integral_bracket(a, m);
    let slack = 1e-12;
    if integral < lo * (1.0 - slack) || integral > hi * (1.0 + slack) {
        return Err(Error::Failed(format!(
            "quadrature value {integral} outside the bracket [{lo}, {hi}]"
        )));
    }
    Ok(BetaQuadrature {
        a,
        m,
        integral,
        error: q.error + tail * 1e-10,
        beta: 0.0,
    })
}

/// `β = 2N²/I(a, m)` for the coincident string with `aN = 1`.
pub fn beta_for_coincident(a: f64, m: f64, n: u32) -> Result<BetaQuadrature> {
    if n == 0 || (a * n as f64 - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("need aN = 1, got a = {a}, N = {n}")));
    }
    let mut q = coincident_integral(a, m)?;
    q.beta = 2.0 * (n as f64).powi(2) / q.integral;
    Ok(q)
}

/// `H(v) = β∫_{−∞}^v e^{a(s−eˢ)}(1+eˢ)ᵐ(1−eˢ) ds` and `F(v) = 4N² − 2H(v)`, with
/// `v′² = F(v)` along the radial string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFunctionals {
    pub params: RadialParams,
    pub integral: f64,
    /// `F(0) = 4N² − 2βI`, snapped to zero within `1e−12·4N²`.
    pub f_at_zero: f64,
}

impl EnergyFunctionals {
    pub fn new(params: RadialParams) -> Result<Self> {
        if params.kind != RadialKind::String {
            return Err(Error::Precondition("energy functionals apply to the radial string".into()));
        }
        let q = coincident_integral(params.a, params.m)?;
        let four_n2 = params.two_n().powi(2);
        let mut f0 = four_n2 - 2.0 * params.beta * q.integral;
        if f0.abs() <= 1e-12 * four_n2 {
            f0 = 0.0;
        }
        Ok(EnergyFunctionals {
            params,
            integral: q.integral,
            f_at_zero: f0,
        })
    }

    /// `J(v) = ∫_v^0` of the integrand.
    fn upper_part(&self, v: f64) -> Result<f64> {
        let (a, m) = (self.params.a, self.params.m);
        let lower = -60.0 / a;
        if v < lower {
            return Ok(self.integral - (a * v).exp() / a);
        }
        Ok(integrate(|s| string_integrand(a, m, s), v, 0.0, 0.0, QUAD_REL_TOL)?.estimate)
    }

    pub fn h_of_v(&self, v: f64) -> Result<f64> {
        Ok(self.params.beta * (self.integral - self.upper_part(v)?))
    }

    pub fn f_of_v(&self, v: f64) -> Result<f64> {
        Ok(self.f_at_zero + 2.0 * self.params.beta * self.upper_part(v)?)
    }
}

/// Default right end of the Picard segment, `−6 − ln(1+β)`.
pub fn default_t0(beta: f64) -> f64 {
    -6.0 - beta.ln_1p()
}

/// Picard iteration for `w = v − 2Nt` on `(−T, t0]`, retrying with `t0 − 2` when `|w|`
/// leaves the unit ball.
pub fn radial_initialize(spec: &ProblemSpec, t0: f64, picard_tol: f64) -> Result<RadialProfile> {
    let params = RadialParams::from_spec(spec)?;
    if params.kind != RadialKind::String {
        return Err(Error::Precondition("radial_initialize needs G > 0 with aN = 1".into()));
    }
    initialize_params(params, t0, picard_tol)
}

pub fn initialize_params(params: RadialParams, t0: f64, picard_tol: f64) -> Result<RadialProfile> {
    if !(picard_tol > 0.0) || !t0.is_finite() {
        return Err(Error::Precondition("picard_tol must be positive and t0 finite".into()));
    }
    let mut t0 = t0;
    for _ in 0..=PICARD_RETRIES {
        let profile = picard(params, t0, picard_tol)?;
        let w_sup = profile
            .t_samples
            .iter()
            .zip(&profile.v_samples)
            .map(|(t, v)| (v - params.two_n() * t).abs())
            .fold(0.0, f64::max);
        if w_sup <= 1.0 {
            return Ok(profile);
        }
        t0 -= 2.0;
    }
    Err(Error::Failed(format!(
        "Picard segment left the unit ball even at t0 = {}",
        t0 + 2.0
    )))
}

fn picard(params: RadialParams, t0: f64, tol: f64) -> Result<RadialProfile> {
    let two_n = params.two_n();
    // integrand below −T is bounded by βe^{2τ}; keep its contribution under 1e−14
    let t_tail = 0.5 * (params.beta.max(1e-300) * 1e14 / 4.0).ln();
    let t_start = (-t_tail).min(t0 - 10.0 * DEFAULT_STEP);
    let steps = ((t0 - t_start) / DEFAULT_STEP).ceil() as usize;
    let dt = (t0 - t_start) / steps as f64;
    let ts: Vec<f64> = (0..=steps).map(|k| t_start + k as f64 * dt).collect();
    // analytic tail for τ < t_start, where v ≈ 2Nτ and h ≈ −βe^{2aNτ}
    let rate = params.a * two_n;
    let tail_slope = -params.beta * (rate * t_start).exp() / rate;
    let tail_value = tail_slope / rate;

    let mut w = vec![0.0; ts.len()];
    let mut trace = Vec::new();
    for _ in 0..MAX_PICARD_SWEEPS {
        let h: Vec<f64> = ts
            .iter()
            .zip(&w)
            .map(|(&t, &wi)| params.rhs(t, two_n * t + wi))
            .collect();
        let mut new_wp = vec![tail_slope; ts.len()];
        for k in 1..ts.len() {
            new_wp[k] = new_wp[k - 1] + 0.5 * dt * (h[k - 1] + h[k]);
        }
        let mut new_w = vec![tail_value; ts.len()];
        for k in 1..ts.len() {
            new_w[k] = new_w[k - 1] + 0.5 * dt * (new_wp[k - 1] + new_wp[k]);
        }
        let update = new_w
            .iter()
            .zip(&w)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !update.is_finite() {
            return Err(Error::NonFinite { context: "Picard sweep" });
        }
        w = new_w;
        trace.push(update);
        if update < tol {
            return Ok(RadialProfile {
                params,
                v_samples: ts.iter().zip(&w).map(|(t, wi)| two_n * t + wi).collect(),
                vprime_samples: new_wp.iter().map(|p| two_n + p).collect(),
                t_samples: ts,
                t_start,
                t_end: t0,
                picard_trace: trace,
                max_energy_defect: 0.0,
            });
        }
    }
    let last = trace.last().copied().unwrap_or(f64::NAN);
    Err(Error::NonConvergence {
        solver: "Picard initialization",
        iterations: MAX_PICARD_SWEEPS,
        last_update: last,
        trace,
    })
}

fn rk4(params: &RadialParams, t: f64, v: f64, p: f64, dt: f64) -> (f64, f64) {
    let k1v = p;
    let k1p = params.rhs(t, v);
    let k2v = p + 0.5 * dt * k1p;
    let k2p = params.rhs(t + 0.5 * dt, v + 0.5 * dt * k1v);
    let k3v = p + 0.5 * dt * k2p;
    let k3p = params.rhs(t + 0.5 * dt, v + 0.5 * dt * k2v);
    let k4v = p + dt * k3p;
    let k4p = params.rhs(t + dt, v + dt * k3v);
    (
        v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )
}

/// Continues a string profile to `t_end` with RK4. Each step must satisfy the energy
/// identity to `1e−6·4N²` before `v′` is projected back onto `√F(v)`; a failing step is
/// halved. A trajectory that reaches `v = 0` or loses speed below it is a `β` mismatch.
pub fn radial_march(profile: &RadialProfile, t_end: f64, step: f64) -> Result<RadialProfile> {
    let params = profile.params;
    if params.kind != RadialKind::String {
        return Err(Error::Precondition("radial_march integrates the string profile".into()));
    }
    if !(step > 0.0) || profile.is_empty() {
        return Err(Error::Precondition("step must be positive and the profile non-empty".into()));
    }
    let energy = EnergyFunctionals::new(params)?;
    let budget = ENERGY_TOL * params.two_n().powi(2);
    let mut out = profile.clone();
    let last = profile.len() - 1;
    let (mut t, mut v, mut p) = (profile.t_samples[last], profile.v_samples[last], profile.vprime_samples[last]);
    let mut max_defect = profile.max_energy_defect;
    while t < t_end - 1e-12 {
        let mut dt = step.min(t_end - t);
        let mut halvings = 0;
        let (v1, p1, f1) = loop {
            let (v1, p1) = rk4(&params, t, v, p, dt);
            if v1 >= 0.0 {
                return Err(Error::BetaMismatch {
                    kind: Miss::Overshoot,
                    t: t + dt,
                    v: v1,
                });
            }
            let f1 = energy.f_of_v(v1)?;
            let defect = (p1 * p1 - f1).abs();
            if defect <= budget {
                max_defect = max_defect.max(defect);
                break (v1, p1, f1);
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::EnergyDrift { t: t + dt, defect });
            }
            dt *= 0.5;
        };
        if p1 <= 0.0 || f1 <= 0.0 {
            return Err(Error::BetaMismatch {
                kind: Miss::Stall,
                t: t + dt,
                v: v1,
            });
        }
        t += dt;
        v = v1;
        p = f1.sqrt();
        out.t_samples.push(t);
        out.v_samples.push(v);
        out.vprime_samples.push(p);
    }
    out.t_end = t;
    out.max_energy_defect = max_defect;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Overshoot,
    TurnDown,
    Reached,
}

/// Start of the flat oracle in `t`.
const ORACLE_T_START: f64 = -10.0;
/// `|v|` below which a trajectory is accepted as having reached the vacuum.
pub const ORACLE_TOL: f64 = 1e-6;

fn shoot(params: &RadialParams, c: f64, t_end: f64, record: bool) -> (Shot, Vec<(f64, f64, f64)>) {
    let two_n = params.two_n();
    let mut t = ORACLE_T_START;
    let e2 = (2.0 * t).exp();
    let mut v = two_n * t + c - 0.25 * params.beta * e2;
    let mut p = two_n - 0.5 * params.beta * e2;
    let mut samples = Vec::new();
    if v >= 0.0 {
        return (Shot::Overshoot, samples);
    }
    if record {
        samples.push((t, v, p));
    }
    let steps = ((t_end - t) / DEFAULT_STEP).ceil() as usize;
    let dt = (t_end - t) / steps as f64;
    for _ in 0..steps {
        let (v1, p1) = rk4(params, t, v, p, dt);
        t += dt;
        if v1 >= 0.0 {
            return (Shot::Overshoot, samples);
        }
        if p1 <= 0.0 {
            return (Shot::TurnDown, samples);
        }
        v = v1;
        p = p1;
        if record {
            samples.push((t, v, p));
        }
    }
    (Shot::Reached, samples)
}

/// Flat radial vortex `v″ = βe^{2t}(1+eᵛ)ᵐ(eᵛ−1)`, `v ~ 2Nt + c` as `t → −∞`, by bisection
/// on `c ∈ [−50, 50]`. The profile ends at `ln r_max`, or earlier where double precision in
/// `c` no longer separates the two branches, provided `|v| < 1e−6` there.
pub fn radial_vortex_oracle(spec: &ProblemSpec, r_max: f64) -> Result<RadialProfile> {
    let params = RadialParams::from_spec(spec)?;
    if params.kind != RadialKind::Vortex {
        return Err(Error::Precondition("the vortex oracle needs G = 0".into()));
    }
    if !(r_max > 1.0) {
        return Err(Error::Precondition("r_max must exceed 1".into()));
    }
    let t_end = r_max.ln();
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    if shoot(&params, lo, t_end, false).0 != Shot::TurnDown || shoot(&params, hi, t_end, false).0 != Shot::Overshoot {
        return Err(Error::Failed("shooting bracket not found in c in [-50, 50]".into()));
    }
    let mut reached = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(&params, mid, t_end, false).0 {
            Shot::Overshoot => hi = mid,
            Shot::TurnDown => lo = mid,
            Shot::Reached => {
                reached = Some(mid);
                break;
            }
        }
    }
    let c = reached.unwrap_or(lo);
    let (shot, samples) = shoot(&params, c, t_end, true);
    let last = samples.last().copied().ok_or_else(|| Error::Failed("empty oracle trajectory".into()))?;
    if shot != Shot::Reached && last.1.abs() >= ORACLE_TOL {
        return Err(Error::Failed(format!(
            "shooting stalled at t = {:.3} with v = {:.3e}",
            last.0, last.1
        )));
    }
    Ok(RadialProfile {
        params,
        t_start: ORACLE_T_START,
        t_end: last.0,
        t_samples: samples.iter().map(|s| s.0).collect(),
        v_samples: samples.iter().map(|s| s.1).collect(),
        vprime_samples: samples.iter().map(|s| s.2).collect(),
        picard_trace: Vec::new(),
        max_energy_defect: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Center;
    use std::f64::consts::PI;

    fn string_spec(m: f64, n: u32) -> ProblemSpec {
        let g = 1.0 / (4.0 * PI * n as f64);
        let mut spec = ProblemSpec::new(vec![Center::new(0.0, 0.0, n)], m, 1.0, g).unwrap();
        spec.beta = beta_for_coincident(spec.a(), m, n).unwrap().beta;
        spec
    }

    #[test]
    fn closed_form_at_m_zero() {
        for a in [0.25, 0.5, 1.0] {
            let q = coincident_integral(a, 0.0).unwrap();
            let exact = (-a).exp() / a;
            assert!(((q.integral - exact) / exact).abs() < 1e-10);
        }
        let b = beta_for_coincident(1.0, 0.0, 1).unwrap();
        assert!((b.beta - 2.0 * 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn beta_requires_critical_coupling() {
        assert!(beta_for_coincident(0.5, 1.0, 1).is_err());
        assert!(beta_for_coincident(0.5, 1.0, 2).is_ok());
        assert!(coincident_integral(1.5, 1.0).is_err());
    }

    #[test]
    fn hermite_interpolation_is_exact_on_cubics() {
        let f = |t: f64| t * t * t - t;
        let df = |t: f64| 3.0 * t * t - 1.0;
        let ts: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let p = RadialProfile {
            params: RadialParams {
                kind: RadialKind::Vortex,
                a: 0.0,
                m: 1.0,
                beta: 1.0,
                n: 1,
            },
            v_samples: ts.iter().map(|&t| f(t)).collect(),
            vprime_samples: ts.iter().map(|&t| df(t)).collect(),
            t_samples: ts,
            t_start: 0.0,
            t_end: 1.0,
            picard_trace: Vec::new(),
            max_energy_defect: 0.0,
        };
        for t in [0.05, 0.33, 0.71, 0.999] {
            assert!((p.value_at(t) - f(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn picard_with_zero_coupling_is_trivial() {
        let params = RadialParams {
            kind: RadialKind::String,
            a: 1.0,
            m: 1.0,
            beta: 0.0,
            n: 1,
        };
        let p = initialize_params(params, -6.0, 1e-14).unwrap();
        for (t, v) in p.t_samples.iter().zip(&p.v_samples) {
            assert_eq!(*v, 2.0 * t);
        }
    }

    #[test]
    fn picard_contracts_quickly() {
        let spec = string_spec(1.0, 1);
        let p = radial_initialize(&spec, -6.0, 1e-14).unwrap();
        assert!(p.picard_trace.len() <= 30);
        for w in p.picard_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let k = p.len() - 1;
        assert!((p.v_samples[k] - 2.0 * p.t_samples[k]).abs() <= 1.0);
        assert!((p.vprime_samples[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn energy_functional_vanishes_at_vacuum() {
        let spec = string_spec(1.0, 1);
        let e = EnergyFunctionals::new(RadialParams::from_spec(&spec).unwrap()).unwrap();
        assert_eq!(e.f_at_zero, 0.0);
        assert!(e.f_of_v(-0.5).unwrap() > 0.0);
        assert!((e.f_of_v(-80.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn march_rejects_flat_profiles() {
        let spec = ProblemSpec::flat(&[(0.0, 0.0)], 1.0, 2.0).unwrap();
        let p = radial_vortex_oracle(&spec, 6.0).unwrap();
        assert!(radial_march(&p, 1.0, 1e-3).is_err());
    }

    #[test]
    fn radial_rejects_distinct_centers() {
        let spec = ProblemSpec::flat(&[(0.0, 0.0), (1.0, 0.0)], 1.0, 2.0).unwrap();
        assert!(RadialParams::from_spec(&spec).unwrap_err().is_config());
    }

    #[test]
    fn csv_round_trips_through_text() {
        let spec = ProblemSpec::flat(&[(0.0, 0.0)], 1.0, 2.0).unwrap();
        let p = radial_vortex_oracle(&spec, 4.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,v,vprime\n"));
        assert_eq!(text.lines().count(), p.len() + 1);
    }
}
