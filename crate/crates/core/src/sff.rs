//! Gaussian-filtered spectral form factor
//!
//! ```text
//! K(τ) = ⟨|Σ_α ρ(ε_α) exp(−i2π ε_α τ)|²⟩ / Z,   Z = ⟨Σ_α ρ(ε_α)²⟩
//! ρ(ε) = exp[−(ε − ε̄)² / (2(ηΓ)²)]
//! ```
//!
//! on unfolded levels `ε`, with `τ` in units of the Heisenberg time, and the
//! Thouless time read off where `K` joins the GOE curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pipeline::{map_realizations, Ensemble};
use crate::spectra::{unfold, DEFAULT_FIT_DEGREE};

pub const DEFAULT_ETA: f64 = 0.5;
/// Must stay below `log₁₀(1/K_GOE(1)) ≈ 0.045`, otherwise a flat
/// (uncorrelated) form factor already counts as thermalized before `τ_H`.
pub const DEFAULT_EPSILON: f64 = 0.04;
pub const DEFAULT_SMOOTHING: usize = 10;

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "invalid log grid");
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

/// 500 log-spaced points on `[1e-4, 10]`.
pub fn default_tau_grid() -> Vec<f64> {
    log_grid(1e-4, 10.0, 500)
}

/// GOE form factor: `2τ − τ ln(1+2τ)` below the Heisenberg time and
/// `2 − τ ln((2τ+1)/(2τ−1))` above it.
pub fn goe_sff(tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau < 1.0 {
        2.0 * tau - tau * (2.0 * tau).ln_1p()
    } else {
        2.0 - tau * ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln()
    }
}

/// Filter weights for one realization; `ε̄` and `Γ²` are that
/// realization's mean and variance.
pub fn gaussian_filter_weights(levels: &[f64], eta: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must be > 0")));
    }
    if levels.is_empty() {
        return Err(Error::EmptyEnsemble("no levels to filter"));
    }
    let n = levels.len() as f64;
    let mean = levels.iter().sum::<f64>() / n;
    let var = levels.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    if levels.len() == 1 {
        return Ok(vec![1.0]);
    }
    if !(var > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    let width2 = 2.0 * eta * eta * var;
    Ok(levels.iter().map(|e| (-(e - mean).powi(2) / width2).exp()).collect())
}

/// Outcome of the Thouless-time search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ThoulessTime {
    Found { tau: f64 },
    /// The curve never settled onto the GOE form inside the grid.
    ExceedsGrid { last_deviation: f64 },
}

impl ThoulessTime {
    /// `τ_Th / τ_H`, infinite when the criterion was never met.
    pub fn ratio(&self) -> f64 {
        match *self {
            ThoulessTime::Found { tau } => tau,
            ThoulessTime::ExceedsGrid { .. } => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SFFCurve {
    pub tau: Vec<f64>,
    pub k: Vec<f64>,
    pub eta: f64,
    pub n_realizations: usize,
    pub tau_thouless: Option<ThoulessTime>,
    pub epsilon: Option<f64>,
    /// Unfolding steps where the fitted staircase decreased, summed.
    pub n_non_monotone: usize,
}

impl SFFCurve {
    pub fn goe(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| goe_sff(t)).collect()
    }
}

/// Ensemble-averaged form factor of already-unfolded spectra.
pub fn compute_sff<S: AsRef<[f64]> + Sync>(ensemble: &[S], eta: f64, tau_grid: &[f64]) -> Result<SFFCurve> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble("no spectra for the form factor"));
    }
    if tau_grid.is_empty() || tau_grid[0] <= 0.0 || tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("tau grid must be positive and ascending".into()));
    }
    let per_realization: Vec<(Vec<f64>, f64)> = ensemble
        .par_iter()
        .map(|levels| {
            let levels = levels.as_ref();
            let rho = gaussian_filter_weights(levels, eta)?;
            let norm: f64 = rho.iter().map(|r| r * r).sum();
            let power = tau_grid
                .iter()
                .map(|&tau| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (&e, &w) in levels.iter().zip(&rho) {
                        let (s, c) = (std::f64::consts::TAU * e * tau).sin_cos();
                        re += w * c;
                        im -= w * s;
                    }
                    re * re + im * im
                })
                .collect();
            Ok((power, norm))
        })
        .collect::<Result<_>>()?;

    let n = per_realization.len() as f64;
    let mut k = vec![0.0; tau_grid.len()];
    let mut z = 0.0;
    for (power, norm) in &per_realization {
        for (acc, p) in k.iter_mut().zip(power) {
            *acc += p;
        }
        z += norm;
    }
    z /= n;
    if !(z > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    for v in &mut k {
        *v /= n * z;
    }
    Ok(SFFCurve {
        tau: tau_grid.to_vec(),
        k,
        eta,
        n_realizations: per_realization.len(),
        tau_thouless: None,
        epsilon: None,
        n_non_monotone: 0,
    })
}

/// `|log₁₀(K/K_GOE)|` smoothed by a centered moving average of `width`
/// grid points.
pub fn smoothed_deviation(curve: &SFFCurve, width: usize) -> Vec<f64> {
    let raw: Vec<f64> = curve
        .tau
        .iter()
        .zip(&curve.k)
        .map(|(&t, &k)| {
            let g = goe_sff(t);
            if k > 0.0 && g > 0.0 {
                (k / g).log10().abs()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let width = width.max(1);
    let n = raw.len();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n.saturating_sub(width));
            let end = (start + width).min(n);
            raw[start..end].iter().sum::<f64>() / (end - start) as f64
        })
        .collect()
}

/// Smallest grid `τ` from which the smoothed deviation stays within
/// `epsilon` all the way up to `τ = 1`; past the Heisenberg time the first
/// grid point within `epsilon` is taken.
pub fn extract_thouless(curve: &SFFCurve, epsilon: f64, smoothing_window: usize) -> Result<ThoulessTime> {
    let (first, last) = match (curve.tau.first(), curve.tau.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::EmptyEnsemble("empty tau grid")),
    };
    if first > 1e-3 || last < 5.0 {
        return Err(Error::InvalidParameter(format!(
            "tau grid [{first}, {last}] must cover [1e-3, 5]"
        )));
    }
    let dev = smoothed_deviation(curve, smoothing_window);
    let below = curve.tau.partition_point(|&t| t <= 1.0);

    let mut start = below;
    while start > 0 && dev[start - 1] <= epsilon {
        start -= 1;
    }
    if start < below {
        return Ok(ThoulessTime::Found { tau: curve.tau[start] });
    }
    match (below..curve.tau.len()).find(|&i| dev[i] <= epsilon) {
        Some(i) => Ok(ThoulessTime::Found { tau: curve.tau[i] }),
        None => Ok(ThoulessTime::ExceedsGrid { last_deviation: *dev.last().unwrap() }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SffConfig {
    pub eta: f64,
    pub fit_degree: usize,
    pub epsilon: f64,
    pub smoothing: usize,
    pub tau_grid: Vec<f64>,
}

impl Default for SffConfig {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            fit_degree: DEFAULT_FIT_DEGREE,
            epsilon: DEFAULT_EPSILON,
            smoothing: DEFAULT_SMOOTHING,
            tau_grid: default_tau_grid(),
        }
    }
}

/// Form factor and Thouless time of the GAA chain at one parameter point.
/// Each realization's full spectrum is unfolded before filtering.
pub fn sff_point(base: &ModelParams, ensemble: &Ensemble, config: &SffConfig) -> Result<SFFCurve> {
    let unfolded = map_realizations(base, ensemble, false, |_, _, spec| unfold(&spec.eigenvalues, config.fit_degree))?;
    let n_non_monotone = unfolded.iter().map(|u| u.non_monotone).sum();
    let levels: Vec<Vec<f64>> = unfolded.into_iter().map(|u| u.levels).collect();
    let mut curve = compute_sff(&levels, config.eta, &config.tau_grid)?;
    curve.n_non_monotone = n_non_monotone;
    curve.epsilon = Some(config.epsilon);
    curve.tau_thouless = Some(extract_thouless(&curve, config.epsilon, config.smoothing)?);
    Ok(curve)
}

/// Thouless time across `alphas` at fixed `base.lambda`.
pub fn thouless_vs_alpha(
    base: &ModelParams,
    alphas: &[f64],
    ensemble: &Ensemble,
    config: &SffConfig,
) -> Result<Vec<(f64, SFFCurve)>> {
    alphas
        .iter()
        .map(|&alpha| {
            let params = ModelParams { alpha, ..base.clone() };
            sff_point(&params, ensemble, config)
                .map(|c| (alpha, c))
                .map_err(|e| e.at_point(format!("alpha={alpha}, lambda={}", base.lambda)))
        })
        .collect()
}
