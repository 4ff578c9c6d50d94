use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use gaa_core::agp::{chi_point, fidelity_susceptibility, DEFAULT_DEGENERACY_FLOOR};
use gaa_core::model::{binomial, build_hamiltonian, build_perturbation, enumerate_basis, half_filling, Boundary, DenseOperator, ModelParams, Perturbation};
use gaa_core::pipeline::{default_samples, default_sff_samples, diagonalize, realization_params, Ensemble};
use gaa_core::rstat::{gap_ratio_point, mean_gap_ratio, GapRatioSummary, POISSON_MEAN_R};
use gaa_core::scaling::{collapse, cost_function, critical_table, theta, AnsatzSpec, CollapseParams, CollapsePoint, DeConfig};
use gaa_core::seed::derive_seed;
use gaa_core::sff::{log_grid, sff_point, SffConfig, ThoulessTime};
use gaa_core::spectra::{full_diagonalize, median, mobility_edge_agreement, single_particle_ipr, EnergyWindow};
use gaa_core::surrogate::{goe_matrix, poisson_levels};
use serde::Serialize;
use serde_json::json;

use crate::args::{linear_grid, ChiArgs, CollapseArgs, PhaseArgs, RstatArgs, SffArgs, SpectrumArgs, ValidateArgs};
use crate::output::Run;

#[derive(Serialize)]
struct EigenRow {
    index: usize,
    eigenvalue: f64,
}

pub fn spectrum(args: &SpectrumArgs, seed: u64, run: &mut Run) -> Result<()> {
    let base = args.model.params(args.lambda, args.alpha);
    base.validate()?;
    let basis = enumerate_basis(base.sites, base.particles)?;
    let (params, realization_seed) = match args.phi {
        Some(phi) => (base.with_phi(phi), None),
        None => {
            let (p, s) = realization_params(&base, &Ensemble::new(seed, args.realization + 1), args.realization);
            (p, Some(s))
        }
    };
    let spec = diagonalize(&params, &basis, realization_seed.unwrap_or(seed), false)?;
    let rows: Vec<EigenRow> = spec.eigenvalues.iter().enumerate().map(|(index, &eigenvalue)| EigenRow { index, eigenvalue }).collect();
    run.write_csv(".csv", &rows)?;
    run.record_seeds(realization_seed.into_iter().collect());
    run.record_counters(json!({ "phi": params.phi, "dim": basis.len() }));
    Ok(())
}

#[derive(Serialize)]
struct RstatRow {
    alpha: f64,
    lambda: f64,
    #[serde(rename = "L")]
    sites: usize,
    #[serde(rename = "V")]
    interaction: f64,
    n_samples: usize,
    mean_r: f64,
    stderr: f64,
}

fn rstat_rows(
    model: &crate::args::ModelArgs,
    points: &[(f64, f64)],
    ensemble: &Ensemble,
    window: Option<EnergyWindow>,
    run: &mut Run,
) -> Result<Vec<RstatRow>> {
    let mut rows = Vec::with_capacity(points.len());
    for &(alpha, lambda) in points {
        let base = model.params(lambda, alpha);
        let s: GapRatioSummary = gap_ratio_point(&base, ensemble, window)
            .with_context(|| format!("grid point alpha={alpha}, lambda={lambda}"))?;
        run.record_counters(json!({
            "alpha": alpha,
            "lambda": lambda,
            "n_states": s.n_states,
            "n_skipped": s.n_skipped,
            "n_degenerate": s.n_degenerate,
        }));
        rows.push(RstatRow {
            alpha,
            lambda,
            sites: model.sites,
            interaction: model.interaction,
            n_samples: s.n_realizations,
            mean_r: s.mean_r,
            stderr: s.stderr,
        });
    }
    Ok(rows)
}

pub fn rstat(args: &RstatArgs, seed: u64, run: &mut Run) -> Result<()> {
    let ensemble = Ensemble::new(seed, args.samples.unwrap_or_else(|| default_samples(args.model.sites)));
    ensure!(ensemble.samples >= 1, "samples must be at least 1");
    let points: Vec<(f64, f64)> = args.grid.values()?.into_iter().map(|l| (args.alpha, l)).collect();
    let rows = rstat_rows(&args.model, &points, &ensemble, args.window.0.map(|_| args.window.energy_window()), run)?;
    run.write_csv(".csv", &rows)?;
    run.record_seeds(ensemble.seeds());
    Ok(())
}

pub fn phase_diagram(args: &PhaseArgs, seed: u64, run: &mut Run) -> Result<()> {
    let ensemble = Ensemble::new(seed, args.samples.unwrap_or_else(|| default_samples(args.model.sites)));
    ensure!(ensemble.samples >= 1, "samples must be at least 1");
    let alphas = linear_grid(args.alpha_min, args.alpha_max, args.alpha_steps, "alpha")?;
    let lambdas = args.grid.values()?;
    let points: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| lambdas.iter().map(move |&l| (a, l))).collect();
    let rows = rstat_rows(&args.model, &points, &ensemble, args.window.0.map(|_| args.window.energy_window()), run)?;
    run.write_csv(".csv", &rows)?;
    run.record_seeds(ensemble.seeds());
    Ok(())
}

#[derive(Serialize)]
struct SffRow {
    tau: f64,
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "K_goe")]
    k_goe: f64,
}

pub fn sff(args: &SffArgs, seed: u64, run: &mut Run) -> Result<()> {
    ensure!(args.tau_points >= 2 && args.tau_min > 0.0 && args.tau_max > args.tau_min, "invalid tau grid");
    let ensemble = Ensemble::new(seed, args.samples.unwrap_or_else(|| default_sff_samples(args.model.sites)));
    ensure!(ensemble.samples >= 1, "samples must be at least 1");
    let config = SffConfig {
        eta: args.eta,
        fit_degree: args.fit_degree,
        epsilon: args.epsilon,
        smoothing: args.smoothing,
        tau_grid: log_grid(args.tau_min, args.tau_max, args.tau_points),
    };
    let base = args.model.params(args.lambda, args.alpha);
    let curve = sff_point(&base, &ensemble, &config)
        .with_context(|| format!("grid point alpha={}, lambda={}", args.alpha, args.lambda))?;
    let goe = curve.goe();
    let rows: Vec<SffRow> = (0..curve.tau.len()).map(|i| SffRow { tau: curve.tau[i], k: curve.k[i], k_goe: goe[i] }).collect();
    run.write_csv(".csv", &rows)?;

    let (tau_thouless, status, last_deviation) = match curve.tau_thouless {
        Some(ThoulessTime::Found { tau }) => (Some(tau), "found", None),
        Some(ThoulessTime::ExceedsGrid { last_deviation }) => (None, "exceeds_grid", Some(last_deviation)),
        None => (None, "not_computed", None),
    };
    run.write_json(
        ".json",
        &json!({
            "eta": args.eta,
            "epsilon": args.epsilon,
            "tau_thouless": tau_thouless,
            "thouless_status": status,
            "last_deviation": last_deviation,
            "tau_H": 1,
            "n_realizations": curve.n_realizations,
            "seed": seed,
            "fit_degree": args.fit_degree,
            "smoothing": args.smoothing,
        }),
    )?;
    run.record_seeds(ensemble.seeds());
    run.record_counters(json!({ "n_non_monotone": curve.n_non_monotone }));
    Ok(())
}

#[derive(Serialize)]
struct ChiRow {
    alpha: f64,
    lambda: f64,
    #[serde(rename = "L")]
    sites: usize,
    kind: String,
    zeta: f64,
    f_scaled: f64,
    stderr: f64,
    n_excluded: usize,
}

pub fn chi(args: &ChiArgs, seed: u64, run: &mut Run) -> Result<()> {
    let ensemble = Ensemble::new(seed, args.samples.unwrap_or_else(|| default_samples(args.model.sites)));
    ensure!(ensemble.samples >= 1, "samples must be at least 1");
    let window = args.window.energy_window();
    let mut rows = Vec::new();
    for lambda in args.grid.values()? {
        let base = args.model.params(lambda, args.alpha);
        let s = chi_point(&base, args.kind, &ensemble, window)
            .with_context(|| format!("grid point alpha={}, lambda={lambda}", args.alpha))?;
        run.record_counters(json!({ "lambda": lambda, "n_states": s.n_states, "n_realizations": s.n_realizations }));
        rows.push(ChiRow {
            alpha: args.alpha,
            lambda,
            sites: args.model.sites,
            kind: args.kind.to_string(),
            zeta: s.zeta,
            f_scaled: s.f_scaled,
            stderr: s.stderr,
            n_excluded: s.n_excluded_pairs,
        });
    }
    run.write_csv(".csv", &rows)?;
    run.record_seeds(ensemble.seeds());
    Ok(())
}

/// `(L, λ, X)` rows from a CSV with a header.
pub fn read_points(path: &Path, column: Option<&str>) -> Result<Vec<CollapsePoint>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let l_col = find("L").context("input needs an `L` column")?;
    let lambda_col = find("lambda").context("input needs a `lambda` column")?;
    let value_col = match column {
        Some(c) => find(c).with_context(|| format!("input has no `{c}` column"))?,
        None => ["value", "mean_r", "f_scaled"]
            .iter()
            .find_map(|c| find(c))
            .context("input needs a `value`, `mean_r` or `f_scaled` column (or pass --column)")?,
    };
    let mut points = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| record.get(k).map(str::trim).unwrap_or("");
        let row = n + 2;
        points.push(CollapsePoint {
            sites: field(l_col).parse().with_context(|| format!("line {row}: bad L"))?,
            lambda: field(lambda_col).parse().with_context(|| format!("line {row}: bad lambda"))?,
            value: field(value_col).parse().with_context(|| format!("line {row}: bad value"))?,
        });
    }
    Ok(points)
}

#[derive(Serialize)]
struct ThetaRow {
    theta: f64,
    value: f64,
    #[serde(rename = "L")]
    sites: usize,
}

#[derive(Serialize)]
struct CriticalRow {
    #[serde(rename = "L")]
    sites: usize,
    lambda_star: f64,
}

pub fn collapse_cmd(args: &CollapseArgs, seed: u64, run: &mut Run) -> Result<()> {
    let points = read_points(&args.input, args.column.as_deref())?;
    let mut ansatz = AnsatzSpec::new(args.ansatz, args.drift);
    let b = &mut ansatz.bounds;
    b.nu = (args.nu_min.unwrap_or(b.nu.0), args.nu_max.unwrap_or(b.nu.1));
    b.lambda0 = (args.lambda0_min.unwrap_or(b.lambda0.0), args.lambda0_max.unwrap_or(b.lambda0.1));
    b.lambda1 = (args.lambda1_min.unwrap_or(b.lambda1.0), args.lambda1_max.unwrap_or(b.lambda1.1));
    let de = DeConfig {
        population: args.population,
        max_generations: args.generations,
        restarts: args.restarts,
        seed,
        ..DeConfig::default()
    };
    let result = collapse(&points, &ansatz, &de)?;
    run.write_json(
        ".json",
        &json!({
            "correlation": result.correlation.to_string(),
            "drift": result.drift.to_string(),
            "nu": result.params.nu,
            "lambda0": result.params.lambda0,
            "lambda1": result.params.lambda1,
            "cost": result.cost,
            "n_points": result.n_points,
            "seed": seed,
            "evaluations": result.evaluations,
        }),
    )?;
    let theta: Vec<ThetaRow> = result.theta_sorted.iter().map(|&(theta, value, sites)| ThetaRow { theta, value, sites }).collect();
    run.write_csv("_theta.csv", &theta)?;
    let sizes: Vec<usize> = points.iter().map(|p| p.sites).collect::<BTreeSet<_>>().into_iter().collect();
    let critical: Vec<CriticalRow> = critical_table(&sizes, result.drift, &result.params)
        .into_iter()
        .map(|(sites, lambda_star)| CriticalRow { sites, lambda_star })
        .collect();
    run.write_csv("_critical.csv", &critical)?;
    run.record_seeds((0..de.restarts.max(1) as u64).map(|r| derive_seed(seed, r)).collect());
    Ok(())
}

#[derive(Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

fn check(name: &str, value: f64, threshold: &str, pass: bool) -> Check {
    Check { check: name.to_string(), value, threshold: threshold.to_string(), pass }
}

pub fn validate(args: &ValidateArgs, seed: u64, run: &mut Run) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let dims: Vec<usize> = (12..=18).map(|l| enumerate_basis(l, half_filling(l)).map(|b| b.len())).collect::<Result<_, _>>()?;
    let expected = [924, 1716, 3432, 6435, 12870, 24310, 48620];
    checks.push(check("basis dimensions L=12..18", dims.iter().sum::<usize>() as f64, "924..48620", dims == expected));

    for boundary in [Boundary::Open, Boundary::Periodic] {
        let p = ModelParams::new(8, 0.9, 0.4, 1.0).with_phi(0.7).with_boundary(boundary);
        let basis = enumerate_basis(8, 4)?;
        let h = build_hamiltonian(&p, &basis)?;
        let sum_c: f64 = p.coefficients().iter().sum();
        let trace = p.lambda * binomial(7, 3) as f64 * sum_c + p.interaction * p.bonds().len() as f64 * binomial(6, 2) as f64;
        let err = (h.trace() - trace).abs() / trace.abs().max(1.0);
        checks.push(check(&format!("trace identity L=8 {boundary}"), err, "<= 1e-10", err <= 1e-10 && h.is_symmetric()));
    }

    let l = args.duality_sites;
    let median_ipr = |lambda: f64| -> Result<f64> {
        let states = single_particle_ipr(&ModelParams::new(l, lambda, 0.0, 0.0))?;
        Ok(median(&states.iter().map(|&(_, ipr)| ipr).collect::<Vec<_>>()))
    };
    let extended = median_ipr(0.5)?;
    checks.push(check(&format!("median IPR L={l} lambda=0.5"), extended, &format!("< 3/L = {:.5}", 3.0 / l as f64), extended < 3.0 / l as f64));
    let localized = median_ipr(1.5)?;
    checks.push(check(&format!("median IPR L={l} lambda=1.5"), localized, "> 0.1", localized > 0.1));

    let agreement = mobility_edge_agreement(&ModelParams::new(args.edge_sites, 0.6, 0.5, 0.0))?;
    checks.push(check(&format!("mobility edge agreement L={}", args.edge_sites), agreement, ">= 0.9", agreement >= 0.9));

    let goe: Vec<Vec<f64>> = (0..50)
        .map(|r| full_diagonalize(&goe_matrix(200, derive_seed(seed, r)), false).map(|s| s.eigenvalues))
        .collect::<Result<_, _>>()?;
    let goe_r = mean_gap_ratio(&goe)?.mean_r;
    checks.push(check("GOE <r> (dim 200, 50 draws)", goe_r, "0.53 +- 0.02", (goe_r - 0.53).abs() <= 0.02));
    let poisson: Vec<Vec<f64>> = (0..50).map(|r| poisson_levels(1000, derive_seed(seed ^ 1, r))).collect();
    let poisson_r = mean_gap_ratio(&poisson)?.mean_r;
    checks.push(check("Poisson <r> (50 x 1000 levels)", poisson_r, "2ln2-1 +- 0.01", (poisson_r - POISSON_MEAN_R).abs() <= 0.01));

    let fd = finite_difference_oracle()?;
    checks.push(check("fidelity susceptibility vs finite difference L=8", fd, "<= 1e-3", fd <= 1e-3));

    let ansatz = AnsatzSpec::new(gaa_core::Correlation::PowerLaw, gaa_core::Drift::Const);
    let truth = CollapseParams { nu: 1.3, lambda0: 1.9, lambda1: 0.0 };
    let monotone: Vec<CollapsePoint> = (0..60)
        .map(|k| {
            let (sites, lambda) = (8 + 2 * (k % 3), 0.5 + 0.05 * k as f64);
            CollapsePoint { sites, lambda, value: theta(lambda, sites, ansatz.correlation, ansatz.drift, &truth).tanh() }
        })
        .collect();
    let c = cost_function(&monotone, &ansatz, &truth)?;
    checks.push(check("collapse cost of monotone data", c, "== 0", c == 0.0));

    run.write_csv(".csv", &checks)?;
    Ok(checks)
}

/// Largest relative gap between `χ_n` and `Σ_{m≠n} |⟨m(0)|n(β)⟩|²/β²`.
fn finite_difference_oracle() -> Result<f64> {
    let p = ModelParams::new(8, 0.65, 0.0, 1.0).with_phi(1.3);
    let basis = enumerate_basis(8, 4)?;
    let h = build_hamiltonian(&p, &basis)?;
    let d = build_perturbation(Perturbation::ExtensiveNN, &p, &basis)?;
    let spec = full_diagonalize(&h, true)?;
    let window = spec.window(EnergyWindow::default())?;
    if window.is_empty() {
        bail!("empty window in the finite-difference oracle");
    }
    let chi = fidelity_susceptibility(&spec, &d, window.clone(), DEFAULT_DEGENERACY_FLOOR, 8)?.chi;
    let beta = 1e-5;
    let moved = DenseOperator::from_fn(h.dim(), |i, j| h.get(i, j) + if i == j { beta * d[i] } else { 0.0 });
    let spec_b = full_diagonalize(&moved, true)?;
    let (v0, vb) = (spec.eigenvectors.as_ref().expect("vectors"), spec_b.eigenvectors.as_ref().expect("vectors"));
    let dim = spec.dim();
    Ok(window
        .enumerate()
        .map(|(j, n)| {
            let sum: f64 = (0..dim)
                .filter(|&m| m != n)
                .map(|m| (0..dim).map(|k| v0[(k, m)] * vb[(k, n)]).sum::<f64>().powi(2))
                .sum();
            (sum / (beta * beta) - chi[j]).abs() / chi[j]
        })
        .fold(0.0, f64::max))
}
