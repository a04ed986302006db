//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default cap on the number of subintervals.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub estimate: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` until the error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Precondition("quadrature limits must be finite".into()));
    }
    if a == b {
        return Ok(Quadrature {
            estimate: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (est, err) = gk15(&f, lo, hi);
    let mut parts = vec![(lo, hi, est, err)];
    let mut total = est;
    let mut total_err = err;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if parts.len() >= MAX_INTERVALS || !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: sign * total,
                error: total_err,
            });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (l, r, e, de) = parts.swap_remove(worst);
        let mid = 0.5 * (l + r);
        if mid <= l || mid >= r {
            // interval cannot be split further in floating point
            return Err(Error::Quadrature {
                estimate: sign * total,
                error: total_err,
            });
        }
        let (e1, d1) = gk15(&f, l, mid);
        let (e2, d2) = gk15(&f, mid, r);
        parts.push((l, mid, e1, d1));
        parts.push((mid, r, e2, d2));
        total += e1 + e2 - e;
        total_err += d1 + d2 - de;
        if parts.len() % 64 == 0 {
            // refresh the running sums to shed accumulated cancellation
            total = parts.iter().map(|p| p.2).sum();
            total_err = parts.iter().map(|p| p.3).sum();
        }
    }
    let estimate: f64 = parts.iter().map(|p| p.2).sum();
    Ok(Quadrature {
        estimate: sign * estimate,
        error: total_err,
        intervals: parts.len(),
    })
}
