//! Comparisons against closed forms and independent evaluations.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use shocklab_core::ansatz::{localized_shift, AnsatzContext, InitialShape};
use shocklab_core::cauchy::{make_riemann_initial, LineGrid, LineRun, LineSettings, BOUNDARY_MARGIN};
use shocklab_core::periodic::excess_flux_time_integral;
use shocklab_core::{
    compute_profile, evolve_periodic, hopf_eval, ExcessOptions, FluxModel, HopfData, HopfInitial,
    PeriodicSettings, PerturbationSpec, ProfileOptions, StatePair,
};

fn profile(flux: &FluxModel, ul: f64, ur: f64, nu: f64) -> shocklab_core::ProfileTable {
    let st = StatePair::new(flux, ul, ur).unwrap();
    compute_profile(flux, st, nu, ProfileOptions::default()).unwrap()
}

#[test]
fn burgers_profile_is_tanh() {
    for nu in [0.5, 0.1, 0.02] {
        let p = profile(&FluxModel::burgers(), 1.0, -1.0, nu);
        for k in -40..=40 {
            let x = k as f64 * nu / 4.0;
            let exact = -(x / (2.0 * nu)).tanh();
            assert!((p.eval(x).phi - exact).abs() < 1e-10, "nu={nu} x={x}");
        }
    }
}

#[test]
fn quadratic_profile_matches_closed_form() {
    // ν φ' = a(φ − ū_l)(φ − ū_r)/2 with φ(0) the midpoint.
    let (a, ul, ur, nu) = (2.5, 0.7, -0.3, 0.2);
    let p = profile(&FluxModel::quadratic(a).unwrap(), ul, ur, nu);
    let (mid, half) = (0.5 * (ul + ur), 0.5 * (ul - ur));
    for k in -30..=30 {
        let x = k as f64 * 0.05;
        let exact = mid - half * (a * half * x / (2.0 * nu)).tanh();
        assert!((p.eval(x).phi - exact).abs() < 1e-10, "x={x}");
    }
}

#[test]
fn hopf_keeps_the_burgers_profile_steady() {
    let nu = 0.3;
    let data = HopfData::burgers(HopfInitial::Profile { ul: 1.0, ur: -1.0 }, nu).unwrap();
    for x in [-2.0, -0.4, 0.0, 0.25, 1.7] {
        for t in [0.1, 1.0, 4.0] {
            let exact = -(x / (2.0 * nu)).tanh();
            assert!((hopf_eval(&data, x, t).unwrap() - exact).abs() < 1e-11, "x={x} t={t}");
        }
    }
}

#[test]
fn hopf_of_constant_data_is_constant() {
    let data = HopfData::burgers(HopfInitial::Constant(0.4), 0.1).unwrap();
    for x in [-3.0, 0.0, 5.5] {
        assert!((hopf_eval(&data, x, 2.0).unwrap() - 0.4).abs() < 1e-12);
    }
}

#[test]
fn periodic_solver_matches_hopf() {
    let nu = 0.2;
    let w = PerturbationSpec::sine(0.3, 1.0).unwrap();
    let data = HopfData::burgers(
        HopfInitial::Periodic {
            mean: 0.5,
            w: w.clone(),
        },
        nu,
    )
    .unwrap();
    let mut settings = PeriodicSettings::new(1.0 / 512.0, 0.5);
    settings.record_every = 0.5;
    let traj = evolve_periodic(&FluxModel::burgers(), &w, 0.5, nu, &settings).unwrap();
    let last = &traj.last;
    let mut err = 0.0f64;
    for (j, &u) in last.samples.iter().enumerate().step_by(8) {
        let x = (j as f64 + 0.5) * last.dx;
        err = err.max((u - hopf_eval(&data, x, last.t).unwrap()).abs());
    }
    assert!(err < 1e-5, "{err}");
}

#[test]
fn line_solver_matches_hopf_for_riemann_data() {
    let f = FluxModel::burgers();
    let (nu, t) = (0.1, 2.0);
    let zero = PerturbationSpec::zero(1.0);
    let setup = make_riemann_initial(&f, -0.5, 1.0, &zero, &zero, LineGrid::new(12.0, 1.0 / 128.0).unwrap()).unwrap();
    let mut run = LineRun::new(&f, setup, nu, &LineSettings::default()).unwrap();
    run.advance_to(t).unwrap();
    let data = HopfData::burgers(
        HopfInitial::Riemann {
            ul: -0.5,
            ur: 1.0,
            wl: zero.clone(),
            wr: zero,
        },
        nu,
    )
    .unwrap();
    let v = run.view();
    let mut err = 0.0f64;
    for i in (BOUNDARY_MARGIN..v.grid.len() - BOUNDARY_MARGIN).step_by(4) {
        err = err.max((v.line[i] - hopf_eval(&data, v.grid.x(i), v.t).unwrap()).abs());
    }
    assert!(err < 2e-3, "{err}");
}

#[test]
fn small_amplitude_excess_follows_linear_decay() {
    // w ≈ a e^{−4π²νt} sin: (1/p)∫(f(u) − f(ū)) ≈ f''·a² e^{−8π²νt}/4.
    let (a, nu) = (1e-3, 0.1);
    let w = PerturbationSpec::sine(a, 1.0).unwrap();
    let mut opts = ExcessOptions::new(1.0 / 128.0);
    opts.tol = 1e-20;
    let e = excess_flux_time_integral(&FluxModel::burgers(), &w, 0.0, nu, &opts).unwrap();
    let linear = a * a / (32.0 * PI * PI * nu);
    assert_relative_eq!(e.value, linear, max_relative = 1e-3);
}

#[test]
fn localized_shift_of_a_bump_is_its_mass() {
    let f = FluxModel::burgers();
    let p = profile(&f, 1.0, -1.0, 0.5);
    let ctx = AnsatzContext::new(p.clone(), 1e-14).unwrap();
    let zero = PerturbationSpec::zero(1.0);
    let bump = |x: f64| 0.3 * (-x * x).exp();
    let u0 = move |x: f64| p.eval(x).phi + bump(x);
    let shape = InitialShape::General {
        u0: &u0,
        support: 8.0,
    };
    let (x1, err) = localized_shift(&ctx, &shape, &zero, &zero);
    let mass = 0.3 * PI.sqrt();
    assert!((x1 - mass).abs() < 1e-9 + err, "{x1} vs {mass}");
}

#[test]
fn blended_data_has_no_localized_shift() {
    let f = FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap();
    let ctx = AnsatzContext::new(profile(&f, 1.0, -1.0, 0.1), 1e-14).unwrap();
    let w = PerturbationSpec::sine(0.1, 1.0).unwrap();
    let (x1, _) = localized_shift(&ctx, &InitialShape::Blended, &w, &w);
    assert!(x1.abs() < 1e-12, "{x1}");
}
