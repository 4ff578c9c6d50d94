use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaa_core::agp::{fidelity_susceptibility, DEFAULT_DEGENERACY_FLOOR};
use gaa_core::model::{build_hamiltonian, build_perturbation, enumerate_basis, half_filling, ModelParams, Perturbation};
use gaa_core::rstat::gap_ratios;
use gaa_core::scaling::{cost_function, AnsatzSpec, CollapseParams, CollapsePoint, Correlation, Drift};
use gaa_core::sff::{compute_sff, default_tau_grid, DEFAULT_ETA};
use gaa_core::spectra::{full_diagonalize, select_window, EnergyWindow};

fn params(sites: usize) -> ModelParams {
    ModelParams::new(sites, 0.65, 0.3, 1.0).with_phi(0.4)
}

fn model(c: &mut Criterion) {
    let mut group = c.benchmark_group("model");
    for sites in [12, 14, 16] {
        group.bench_with_input(BenchmarkId::new("basis", sites), &sites, |b, &l| {
            b.iter(|| enumerate_basis(black_box(l), half_filling(l)).unwrap())
        });
        let basis = enumerate_basis(sites, half_filling(sites)).unwrap();
        let p = params(sites);
        group.bench_with_input(BenchmarkId::new("hamiltonian", sites), &basis, |b, basis| {
            b.iter(|| build_hamiltonian(black_box(&p), basis).unwrap())
        });
    }
    group.finish();
}

fn diagonalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("diagonalize");
    group.sample_size(10);
    for sites in [10, 12] {
        let basis = enumerate_basis(sites, half_filling(sites)).unwrap();
        let h = build_hamiltonian(&params(sites), &basis).unwrap();
        group.bench_with_input(BenchmarkId::new("values", sites), &h, |b, h| b.iter(|| full_diagonalize(h, false).unwrap()));
        group.bench_with_input(BenchmarkId::new("vectors", sites), &h, |b, h| b.iter(|| full_diagonalize(h, true).unwrap()));
    }
    group.finish();
}

fn observables(c: &mut Criterion) {
    let sites = 12;
    let p = params(sites);
    let basis = enumerate_basis(sites, half_filling(sites)).unwrap();
    let spec = full_diagonalize(&build_hamiltonian(&p, &basis).unwrap(), true).unwrap();
    let window = select_window(&spec.eigenvalues, EnergyWindow::default()).unwrap();
    let diagonal = build_perturbation(Perturbation::LocalDensity, &p, &basis).unwrap();

    c.bench_function("gap_ratios L=12", |b| b.iter(|| gap_ratios(black_box(&spec.eigenvalues)).unwrap()));

    let ensemble = vec![spec.eigenvalues.clone(); 10];
    let grid = default_tau_grid();
    c.bench_function("sff 10 x L=12", |b| b.iter(|| compute_sff(black_box(&ensemble), DEFAULT_ETA, &grid).unwrap()));

    let mut group = c.benchmark_group("chi");
    group.sample_size(10);
    group.bench_function("L=12 window", |b| {
        b.iter(|| fidelity_susceptibility(black_box(&spec), &diagonal, window.clone(), DEFAULT_DEGENERACY_FLOOR, sites).unwrap())
    });
    group.finish();
}

fn collapse_cost(c: &mut Criterion) {
    let ansatz = AnsatzSpec::new(Correlation::Bkt, Drift::LinearL);
    let points: Vec<CollapsePoint> = [10usize, 12, 14, 16]
        .iter()
        .flat_map(|&sites| (0..40).map(move |k| CollapsePoint { sites, lambda: 0.5 + 0.075 * k as f64, value: (0.1 * k as f64).sin() }))
        .collect();
    let probe = CollapseParams { nu: 1.0, lambda0: 1.8, lambda1: 0.01 };
    c.bench_function("collapse cost 160 points", |b| b.iter(|| cost_function(black_box(&points), &ansatz, &probe).unwrap()));
}

criterion_group!(benches, model, diagonalize, observables, collapse_cost);
criterion_main!(benches);
