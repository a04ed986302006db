use std::f64::consts::PI;

use selfdual_vortex::diagnostics::{
    decay_fit, flux_and_source, string_bundle, vortex_bundle, DecayKind, DecaySource,
};
use selfdual_vortex::model::regularized_offset;
use selfdual_vortex::radial::{beta_for_coincident, default_t0, radial_initialize, radial_march, DEFAULT_STEP};
use selfdual_vortex::vortex::gaussian_bump;
use selfdual_vortex::*;

fn two_strings(beta: f64, an: f64) -> ProblemSpec {
    let g = an / (2.0 * 4.0 * PI);
    ProblemSpec::new(vec![Center::new(1.0, 0.0, 1), Center::new(-1.0, 0.0, 1)], 1.0, beta, g).unwrap()
}

#[test]
fn vortex_trace_and_audits_on_distinct_centers() {
    let spec = ProblemSpec::flat(&[(1.0, 0.5), (-0.8, -0.2), (0.1, -1.3)], 2.0, 1.0).unwrap();
    let grid = Grid2D::build(12.0, 161, &spec).unwrap();
    let (v, report) = solve_vortex(&spec, &grid, &VortexSolveOptions::default()).unwrap();
    assert!(report.monotone, "max increase {}", report.max_increase);
    assert!(report.max_increase <= 1e-12);
    assert!(report.negativity);
    assert!(report.update_trace.windows(2).all(|w| w[1] <= w[0] * 1.0001));
    let flux = flux_and_source(&v, &spec, None).unwrap();
    assert!(flux.consistent);
    let bundle = vortex_bundle(&v, &spec).unwrap();
    assert!(bundle.energy >= 0.98 * 3.0 * PI, "{}", bundle.energy);
}

#[test]
fn vortex_is_unique_for_negative_m() {
    let spec = ProblemSpec::flat(&[(0.0, 0.0)], -1.0, 2.0).unwrap();
    let grid = Grid2D::build(10.0, 101, &spec).unwrap();
    let bumps = [
        gaussian_bump(&grid, (1.0, 1.0), -2.0, 1.5),
        gaussian_bump(&grid, (-2.0, 0.5), 0.5, 2.0),
    ];
    let d = uniqueness_check(&spec, &grid, &VortexSolveOptions::default(), &bumps).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn string_sandwich_holds_at_every_delta() {
    let spec = two_strings(30.0, 0.5);
    let grid = Grid2D::build(10.0, 121, &spec).unwrap();
    let opts = StringSolveOptions::default();
    let mut previous: Option<Field2D> = None;
    for delta in [0.5, 0.25, 0.125] {
        let (v, report) = solve_string_fixed_delta(&spec, &grid, delta, &opts, previous.as_ref()).unwrap();
        assert!(report.sandwich && report.negativity);
        for idx in 0..grid.len() {
            let lo = regularized_offset(grid.point(idx), delta, &spec).unwrap();
            assert!(v.values[idx] >= lo - 1e-9 && v.values[idx] <= 1e-9);
        }
        previous = Some(v);
    }
}

#[test]
fn string_from_supersolution_is_monotone() {
    let spec = two_strings(30.0, 0.5);
    let grid = Grid2D::build(10.0, 121, &spec).unwrap();
    let (_, report) = solve_string_fixed_delta(&spec, &grid, 0.25, &StringSolveOptions::default(), None).unwrap();
    assert!(report.monotone, "{}", report.max_increase);
    assert!(report.shift_last <= report.shift_first);
}

#[test]
fn string_tail_is_at_least_quadratic_below_critical_coupling() {
    for beta in [30.0, 60.0] {
        let spec = two_strings(beta, 0.5);
        let grid = Grid2D::build(12.0, 161, &spec).unwrap();
        let opts = StringSolveOptions {
            delta_schedule: vec![0.5, 0.25, 0.125],
            ..Default::default()
        };
        let (v, _, _) = solve_string_continuation(&spec, &grid, &opts).unwrap();
        let fit = decay_fit(DecaySource::Field(&v), DecayKind::Algebraic).unwrap();
        assert!(fit.order >= 2.0, "beta {beta}: {}", fit.order);
    }
}

#[test]
fn string_tail_at_critical_coupling() {
    let spec = two_strings(30.0, 1.0);
    let grid = Grid2D::build(12.0, 121, &spec).unwrap();
    let opts = StringSolveOptions {
        delta_schedule: vec![0.5, 0.25, 0.125, 0.0625],
        ..Default::default()
    };
    let (v, report, gaps) = solve_string_continuation(&spec, &grid, &opts).unwrap();
    assert!(report.negativity);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    let fit = decay_fit(DecaySource::Field(&v), DecayKind::Algebraic).unwrap();
    assert!(fit.order >= 2.0 * 0.95, "{}", fit.order);
    let grad = decay_fit(DecaySource::Gradient(&v), DecayKind::Algebraic).unwrap();
    assert!(2.0 * grad.order >= 3.0 * 0.8, "{}", grad.order);
    let weight = StringWeight::new(&grid, &spec, 0.0625).unwrap();
    let bundle = string_bundle(&v, &spec, &weight).unwrap();
    assert!(bundle.flux_consistent);
    let predicted = bundle.deficit_angle_predicted.unwrap();
    assert!((bundle.deficit_angle_integral.unwrap() / predicted - 1.0).abs() < 0.02);
}

#[test]
fn radial_string_approaches_the_vacuum() {
    let q = beta_for_coincident(1.0, 1.0, 1).unwrap();
    let spec = ProblemSpec::new(vec![Center::new(0.0, 0.0, 1)], 1.0, q.beta, 1.0 / (4.0 * PI)).unwrap();
    let init = radial_initialize(&spec, default_t0(q.beta), 1e-12).unwrap();
    let mut ends = Vec::new();
    for t_end in [10.0, 12.0, 15.0] {
        let p = radial_march(&init, t_end, DEFAULT_STEP).unwrap();
        assert!(p.is_monotone_negative());
        ends.push(p.v_samples.last().unwrap().abs());
    }
    assert!(ends.windows(2).all(|w| w[1] < w[0]), "{ends:?}");
    let p = radial_march(&init, 15.0, DEFAULT_STEP).unwrap();
    let rate = p.params.predicted_decay();
    let v_fit = decay_fit(DecaySource::Profile(&p), DecayKind::Algebraic).unwrap();
    assert!((v_fit.order / rate - 1.0).abs() < 0.1);
    // v_r = v′/r, so its t-slope is one order steeper
    let d_fit = decay_fit(DecaySource::ProfileDerivative(&p), DecayKind::Algebraic).unwrap();
    assert!(((d_fit.order + 1.0) / (rate + 1.0) - 1.0).abs() < 0.1);
}

#[test]
fn radial_string_rejects_wrong_beta() {
    let q = beta_for_coincident(1.0, -1.0, 1).unwrap();
    for scale in [0.9, 1.1] {
        let spec = ProblemSpec::new(vec![Center::new(0.0, 0.0, 1)], -1.0, q.beta * scale, 1.0 / (4.0 * PI)).unwrap();
        let init = radial_initialize(&spec, default_t0(spec.beta), 1e-12).unwrap();
        let err = radial_march(&init, 15.0, DEFAULT_STEP).unwrap_err();
        assert!(matches!(err, Error::BetaMismatch { .. }), "{err}");
    }
}
