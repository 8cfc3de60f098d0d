mod common;

use biostab_core::equilib::{
    calibrate_steepness, solve_basic_state, solve_basic_state_with, SuspensionParams, TaxisModel,
};
use biostab_core::radlight::{solve_lambda, IntensityProfile, OpticsParams};

fn pinned(s: f64) -> (SuspensionParams, IntensityProfile) {
    let o = OpticsParams::new(0.5, 0.475, 0.0, 1.0).unwrap();
    let lam = solve_lambda(&o, 401).unwrap();
    let p = SuspensionParams::new(20.0, 0.0, 15.0, o, TaxisModel::tanh(s, 1.0).unwrap()).unwrap();
    (p, lam)
}

#[test]
fn shooting_agrees_with_collocation() {
    let (p, lam) = pinned(3.0);
    let b = solve_basic_state(&p, 65, &lam).unwrap();
    let (zc, nc) = common::collocation_oracle(&p, &lam, 96);
    let err = b
        .z
        .iter()
        .zip(&b.n_s)
        .map(|(&z, &n)| (n - common::chebyshev_interp(&zc, &nc, z)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "sup |n_shoot - n_colloc| = {err:e}");
}

#[test]
fn step_halving_changes_profile_below_tolerance() {
    let (p, lam) = pinned(3.0);
    let a = solve_basic_state_with(&p, 65, &lam, 16).unwrap();
    let b = solve_basic_state_with(&p, 65, &lam, 32).unwrap();
    let d = a.n_s.iter().zip(&b.n_s).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d <= 1e-7, "{d:e}");
}

#[test]
fn mass_by_independent_reintegration() {
    let (p, lam) = pinned(3.0);
    let b = solve_basic_state(&p, 65, &lam).unwrap();
    assert!(b.shooting_residual <= 1e-10);
    // midpoint-rule integration of n' = V_c T n, ν' = n from the stored n_s(0),
    // with Richardson extrapolation over two step sizes
    let run = |steps: usize| {
        let h = 1.0 / steps as f64;
        let rate = |nu: f64| {
            let tau = (0.5 * (1.0 - nu)).clamp(0.0, 0.5);
            15.0 * p.taxis.eval(lam.eval_clamped(tau)).0
        };
        let (mut nu, mut n) = (0.0f64, b.n_s0);
        for _ in 0..steps {
            let nm = n + 0.5 * h * rate(nu) * n;
            let num = nu + 0.5 * h * n;
            nu += h * nm;
            n += h * rate(num) * nm;
        }
        nu
    };
    let (c, f) = (run(20_000), run(40_000));
    let mass = f + (f - c) / 3.0;
    assert!((mass - 1.0).abs() < 1e-8, "{mass}");
}

#[test]
fn derivative_and_depth_invariants() {
    let (p, lam) = pinned(3.0);
    let b = solve_basic_state(&p, 129, &lam).unwrap();
    assert_eq!(b.tau[0], 0.5);
    assert!(b.tau[128].abs() <= 1e-8);
    let h = b.h();
    for j in 2..127 {
        // dτ/dz = -κ n_s, checked by a fourth-order central difference
        let dt = (-b.tau[j + 2] + 8.0 * b.tau[j + 1] - 8.0 * b.tau[j - 1] + b.tau[j - 2]) / (12.0 * h);
        assert!((dt + 0.5 * b.n_s[j]).abs() < 1e-5 * (1.0 + b.n_s[j]), "z {}: {dt}", b.z[j]);
        assert!((b.dns_dz[j] - 15.0 * b.t_s[j] * b.n_s[j]).abs() < 1e-12);
    }
}

#[test]
fn calibrated_peak_sits_mid_layer() {
    let cal = calibrate_steepness(0.5, 0.475, 1.0, 15.0, 1.0, 129, 401).unwrap();
    assert!(cal.exact);
    let s = cal.steepness;
    let (p, lam) = pinned(s);
    let b = solve_basic_state(&p, 65, &lam).unwrap();
    let zmax = b.argmax_n_s();
    assert!((0.40..=0.60).contains(&zmax), "s = {s}, argmax {zmax}");
    assert!((b.peak_height() - 0.5).abs() < 0.01);
}

#[test]
fn calibration_falls_back_to_band_edge() {
    // with κ = 1, ω = 0.61 the peak starts just below mid-height and sinks
    // as the response steepens
    let cal = calibrate_steepness(1.0, 0.61, 1.0, 15.0, 1.0, 129, 401).unwrap();
    assert!(!cal.exact);
    assert!((cal.peak_height - 0.45).abs() < 1e-6, "{cal:?}");
}
