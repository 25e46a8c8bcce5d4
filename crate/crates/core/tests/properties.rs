use proptest::prelude::*;
use shocklab_core::periodic::{PeriodicSettings, Shape};
use shocklab_core::{
    compute_profile, evolve_periodic, FluxModel, PerturbationSpec, ProfileOptions,
    RarefactionWave, StatePair,
};

fn fluxes() -> Vec<FluxModel> {
    vec![
        FluxModel::burgers(),
        FluxModel::quadratic(0.3).unwrap(),
        FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap(),
    ]
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![Just(Shape::Sine), Just(Shape::Cosine), Just(Shape::SawtoothSmoothed)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bregman_is_nonnegative(k in 0usize..3, a in -1.5f64..1.5, b in -1.5f64..1.5) {
        let f = &fluxes()[k];
        prop_assert!(f.bregman(a, b) >= -1e-14);
    }

    #[test]
    fn secant_lies_between_endpoint_speeds(k in 0usize..3, a in -1.5f64..1.5, d in 1e-3f64..1.0) {
        let f = &fluxes()[k];
        let b = a + d;
        let s = f.secant_slope(a, b);
        prop_assert!(s >= f.df(a) - 1e-12 && s <= f.df(b) + 1e-12);
    }

    #[test]
    fn perturbations_have_zero_mean(sh in shape(), amp in 0.01f64..0.5, phase in 0.0f64..1.0, m in 3u32..7) {
        let w = PerturbationSpec::new(sh, amp, 1.0, phase).unwrap();
        let cells = w.sample_cells(1 << m);
        let mean = cells.iter().sum::<f64>() / cells.len() as f64;
        prop_assert!(mean.abs() < 1e-13, "{}", mean);
        // Removing the discrete mean can move a sample past sup|w₀| by at most that mean.
        let n = cells.len();
        let raw = (0..n).map(|j| w.value((j as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        prop_assert!(cells.iter().all(|c| c.abs() <= w.sup_norm() + raw.abs() + 1e-12));
    }

    #[test]
    fn rarefaction_inverse_speed_round_trips(k in 0usize..3, c in 0.0f64..1.0) {
        let f = &fluxes()[k];
        let w = RarefactionWave::new(f, -1.0, 1.0).unwrap();
        let (lo, hi) = w.fan();
        let speed = lo + c * (hi - lo);
        prop_assert!((f.df(w.at_speed(speed)) - speed).abs() < 1e-7 * (hi - lo));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn profiles_are_monotone_and_bounded(k in 0usize..3, nu in 0.05f64..1.0, ul in 0.2f64..1.0, ur in -1.0f64..-0.2) {
        let f = &fluxes()[k];
        let st = StatePair::new(f, ul, ur).unwrap();
        let p = compute_profile(f, st, nu, ProfileOptions::default()).unwrap();
        let samples = p.samples();
        prop_assert!(samples.windows(2).all(|w| w[1].phi <= w[0].phi));
        prop_assert!(samples.iter().all(|s| s.phi <= ul && s.phi >= ur && (0.0..=1.0).contains(&s.g)));
        prop_assert!((p.eval(0.0).phi - 0.5 * (ul + ur)).abs() < 1e-12);
    }

    #[test]
    fn periodic_runs_conserve_mass_and_respect_bounds(
        k in 0usize..3, sh in shape(), amp in 0.02f64..0.3, ubar in -0.6f64..0.6, nu in 0.05f64..0.5,
    ) {
        let f = &fluxes()[k];
        let w = PerturbationSpec::new(sh, amp, 1.0, 0.0).unwrap();
        let traj = evolve_periodic(f, &w, ubar, nu, &PeriodicSettings::new(1.0 / 128.0, 1.0)).unwrap();
        let lo = traj.initial.samples.iter().copied().fold(f64::MAX, f64::min);
        let hi = traj.initial.samples.iter().copied().fold(f64::MIN, f64::max);
        for r in &traj.records {
            prop_assert!(r.mass_error.abs() < 1e-13);
            prop_assert!(r.min >= lo - 1e-14 && r.max <= hi + 1e-14);
        }
        let sups: Vec<f64> = traj.records.iter().map(|r| r.sup_norm).collect();
        prop_assert!(sups.windows(2).all(|s| s[1] <= s[0] + 1e-14));
    }
}
