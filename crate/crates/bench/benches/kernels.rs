use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use shocklab_core::cauchy::{make_initial, LineGrid, LineRun, LineSettings};
use shocklab_core::periodic::{PeriodicField, PeriodicRun};
use shocklab_core::{
    compute_profile, hopf_eval, FluxModel, HopfData, HopfInitial, PerturbationSpec,
    ProfileOptions, StatePair, TimeScheme,
};

fn profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("profile");
    for (name, flux) in [
        ("burgers", FluxModel::burgers()),
        ("gap", FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap()),
    ] {
        let st = StatePair::new(&flux, 1.0, -1.0).unwrap();
        group.bench_function(format!("compute/{name}"), |b| {
            b.iter(|| compute_profile(&flux, st, 0.1, ProfileOptions::default()).unwrap())
        });
        let table = compute_profile(&flux, st, 0.1, ProfileOptions::default()).unwrap();
        group.bench_function(format!("eval/{name}"), |b| {
            b.iter(|| table.eval(black_box(0.37)))
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let flux = FluxModel::burgers();
    let st = StatePair::new(&flux, 1.0, -1.0).unwrap();
    let prof = compute_profile(&flux, st, 0.5, ProfileOptions::default()).unwrap();
    let w = PerturbationSpec::sine(0.2, 1.0).unwrap();
    let setup = make_initial(&prof, &w, &w, LineGrid::new(20.0, 1.0 / 256.0).unwrap()).unwrap();
    let run = LineRun::new(&flux, setup, 0.5, &LineSettings::default()).unwrap();
    c.bench_function("line step (10240 cells)", |b| {
        b.iter_batched(|| run.clone(), |mut r| r.step().unwrap(), BatchSize::LargeInput)
    });

    let field = PeriodicField::from_spec(&w, 1.0, 1.0 / 512.0).unwrap();
    let per = PeriodicRun::new(&flux, field, 0.1, TimeScheme::Imex, 1e-3).unwrap();
    c.bench_function("periodic step (512 cells)", |b| {
        b.iter_batched(|| per.clone(), |mut r| r.step().unwrap(), BatchSize::SmallInput)
    });
}

fn hopf(c: &mut Criterion) {
    let data = HopfData::burgers(
        HopfInitial::ProfilePlusPeriodic {
            ul: 1.0,
            ur: -1.0,
            w: PerturbationSpec::sine(0.2, 1.0).unwrap(),
        },
        0.5,
    )
    .unwrap();
    c.bench_function("hopf_eval", |b| {
        b.iter(|| hopf_eval(&data, black_box(0.3), black_box(1.0)).unwrap())
    });
}

criterion_group!(benches, profile, solver, hopf);
criterion_main!(benches);
