//! Fidelity susceptibility of eigenstates under a gauge deformation `H₁`:
//!
//! ```text
//! χ_n = Σ_{m≠n} |⟨n|H₁|m⟩|² / (E_n − E_m)²
//! ζ   = ⟨⟨ln χ_n⟩⟩,    F = exp(ζ) / 2^L
//! ```
//!
//! `n` runs over the energy window, `m` over the whole spectrum.

use std::ops::Range;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_perturbation, enumerate_basis, ModelParams, Perturbation};
use crate::pipeline::{map_realizations, Ensemble};
use crate::rstat::mean_and_stderr;
use crate::spectra::{EnergyWindow, SpectrumResult};

/// Relative floor (in units of the spectral width) below which an energy
/// difference counts as an exact degeneracy.
pub const DEFAULT_DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiResult {
    pub chi: Vec<f64>,
    pub zeta: f64,
    pub f_scaled: f64,
    pub n_excluded_pairs: usize,
    pub kind: Option<Perturbation>,
    pub sites: usize,
}

/// Matrix elements `M[m, j] = ⟨m|diag(d)|n_j⟩` for the windowed states
/// `n_j`, as `Vᵀ · (diag(d) · V_window)`.
pub fn windowed_matrix_elements(vectors: &Mat<f64>, diagonal: &[f64], window: Range<usize>) -> Mat<f64> {
    let dim = vectors.nrows();
    let scaled = Mat::from_fn(dim, window.len(), |k, j| diagonal[k] * vectors[(k, window.start + j)]);
    vectors.transpose() * &scaled
}

/// `χ_n` for each `n` in `window`. `degeneracy_floor` is relative to the
/// spectral width.
pub fn fidelity_susceptibility(
    spec: &SpectrumResult,
    diagonal: &[f64],
    window: Range<usize>,
    degeneracy_floor: f64,
    sites: usize,
) -> Result<ChiResult> {
    let vectors = spec.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let dim = spec.dim();
    if diagonal.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: diagonal.len() });
    }
    if window.end > dim || window.start > window.end {
        return Err(Error::InvalidParameter(format!("window {window:?} outside 0..{dim}")));
    }
    let floor = degeneracy_floor * spec.width();
    let elements = windowed_matrix_elements(vectors, diagonal, window.clone());
    let energies = &spec.eigenvalues;

    let mut n_excluded_pairs = 0;
    let chi: Vec<f64> = window
        .clone()
        .enumerate()
        .map(|(j, n)| {
            let mut sum = 0.0;
            for m in 0..dim {
                if m == n {
                    continue;
                }
                let gap = energies[n] - energies[m];
                if gap.abs() < floor || gap == 0.0 {
                    n_excluded_pairs += 1;
                    continue;
                }
                let v = elements[(m, j)];
                sum += v * v / (gap * gap);
            }
            sum
        })
        .collect();

    let (zeta, _) = log_mean(&chi);
    Ok(ChiResult { f_scaled: scaled_fidelity(zeta, sites), chi, zeta, n_excluded_pairs, kind: None, sites })
}

/// Mean of `ln χ` over the strictly positive entries, and how many were used.
fn log_mean(chi: &[f64]) -> (f64, usize) {
    let logs: Vec<f64> = chi.iter().filter(|&&c| c > 0.0).map(|c| c.ln()).collect();
    if logs.is_empty() {
        (f64::NEG_INFINITY, 0)
    } else {
        (logs.iter().sum::<f64>() / logs.len() as f64, logs.len())
    }
}

/// `exp(ζ) / 2^L`.
pub fn scaled_fidelity(zeta: f64, sites: usize) -> f64 {
    (zeta - sites as f64 * std::f64::consts::LN_2).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub zeta: f64,
    pub f_scaled: f64,
    /// Standard error of `ζ` from the spread of per-realization log means.
    pub stderr: f64,
    pub n_states: usize,
    pub n_realizations: usize,
    pub n_excluded_pairs: usize,
}

/// Double average of `ln χ_n` over all (realization, windowed state) pairs.
pub fn log_fidelity_stats(ensemble: &[ChiResult]) -> Result<FidelityStats> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble("no fidelity susceptibility results"));
    }
    let sites = ensemble[0].sites;
    let (mut total, mut count) = (0.0, 0usize);
    let mut per_realization = Vec::new();
    for r in ensemble {
        let (m, c) = log_mean(&r.chi);
        if c > 0 {
            total += m * c as f64;
            count += c;
            per_realization.push(m);
        }
    }
    if count == 0 {
        return Err(Error::AllZeroSusceptibility);
    }
    let zeta = total / count as f64;
    let (_, stderr) = mean_and_stderr(&per_realization);
    Ok(FidelityStats {
        zeta,
        f_scaled: scaled_fidelity(zeta, sites),
        stderr,
        n_states: count,
        n_realizations: per_realization.len(),
        n_excluded_pairs: ensemble.iter().map(|r| r.n_excluded_pairs).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(L, ζ(L) − L ln 2)` per size.
    pub residuals: Vec<(usize, f64)>,
}

/// Least-squares slope of `ζ` against `L`, with `A(L) = ζ − L ln 2`.
pub fn ergodic_scaling_fit(data: &[(usize, f64)]) -> Result<ErgodicFit> {
    if data.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: data.len() });
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|&(l, _)| l as f64).sum::<f64>() / n;
    let my = data.iter().map(|&(_, z)| z).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|&(l, _)| (l as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all sizes identical".into()));
    }
    let sxy: f64 = data.iter().map(|&(l, z)| (l as f64 - mx) * (z - my)).sum();
    let slope = sxy / sxx;
    Ok(ErgodicFit {
        slope,
        intercept: my - slope * mx,
        residuals: data.iter().map(|&(l, z)| (l, z - l as f64 * std::f64::consts::LN_2)).collect(),
    })
}

/// `ζ` and `F` of the GAA chain at one parameter point.
pub fn chi_point(
    base: &ModelParams,
    kind: Perturbation,
    ensemble: &Ensemble,
    window: EnergyWindow,
) -> Result<FidelityStats> {
    base.validate()?;
    let basis = enumerate_basis(base.sites, base.particles)?;
    let diagonal = build_perturbation(kind, base, &basis)?;
    let results = map_realizations(base, ensemble, true, |_, params, spec| {
        let range = spec.window(window)?;
        let mut r = fidelity_susceptibility(&spec, &diagonal, range, DEFAULT_DEGENERACY_FLOOR, params.sites)?;
        r.kind = Some(kind);
        Ok(r)
    })?;
    log_fidelity_stats(&results)
}
