//! Adjacent gap ratio `r_i = min(δ_i, δ_{i+1}) / max(δ_i, δ_{i+1})` and its
//! ensemble averages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pipeline::{map_realizations, Ensemble};
use crate::spectra::EnergyWindow;

/// `2 ln 2 − 1`, the Poisson value of `⟨r⟩`.
pub const POISSON_MEAN_R: f64 = 0.386_294_361_119_890_6;

/// Large-matrix GOE value of `⟨r⟩`.
pub const GOE_MEAN_R: f64 = 0.5307;

#[derive(Clone, Debug, PartialEq)]
pub struct GapRatios {
    pub values: Vec<f64>,
    /// Positions where at least one of the two adjacent gaps is exactly zero.
    pub degenerate: usize,
}

/// Gap ratios of an ascending spectrum. Exact degeneracies follow a fixed
/// convention: `r = 1` when both gaps vanish, `r = 0` when only one does.
pub fn gap_ratios(eigenvalues: &[f64]) -> Result<GapRatios> {
    if eigenvalues.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: eigenvalues.len() });
    }
    if eigenvalues.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter("eigenvalues must be nondecreasing".into()));
    }
    let mut degenerate = 0;
    let values = eigenvalues
        .windows(3)
        .map(|w| {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            match (a == 0.0, b == 0.0) {
                (true, true) => {
                    degenerate += 1;
                    1.0
                }
                (true, false) | (false, true) => {
                    degenerate += 1;
                    0.0
                }
                _ => a.min(b) / a.max(b),
            }
        })
        .collect();
    Ok(GapRatios { values, degenerate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRatioSummary {
    pub mean_r: f64,
    pub stderr: f64,
    pub n_states: usize,
    pub n_realizations: usize,
    /// Realizations dropped because their window held fewer than 3 levels.
    pub n_skipped: usize,
    pub n_degenerate: usize,
}

/// Average over the levels of each realization, then over realizations;
/// the error bar is the standard error of the per-realization means.
pub fn mean_gap_ratio<S: AsRef<[f64]>>(ensemble: &[S]) -> Result<GapRatioSummary> {
    let mut means = Vec::with_capacity(ensemble.len());
    let (mut n_states, mut n_skipped, mut n_degenerate) = (0, 0, 0);
    for levels in ensemble {
        let levels = levels.as_ref();
        if levels.len() < 3 {
            n_skipped += 1;
            continue;
        }
        let r = gap_ratios(levels)?;
        n_states += levels.len();
        n_degenerate += r.degenerate;
        means.push(r.values.iter().sum::<f64>() / r.values.len() as f64);
    }
    if means.is_empty() {
        return Err(Error::EmptyEnsemble("no realization has three or more levels"));
    }
    let (mean_r, stderr) = mean_and_stderr(&means);
    Ok(GapRatioSummary { mean_r, stderr, n_states, n_realizations: means.len(), n_skipped, n_degenerate })
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `⟨r⟩` of the GAA chain at one parameter point. `window = None` uses the
/// full spectrum.
pub fn gap_ratio_point(base: &ModelParams, ensemble: &Ensemble, window: Option<EnergyWindow>) -> Result<GapRatioSummary> {
    let spectra = map_realizations(base, ensemble, false, |_, _, spec| match window {
        Some(w) => Ok(spec.eigenvalues[spec.window(w)?].to_vec()),
        None => Ok(spec.eigenvalues),
    })?;
    mean_gap_ratio(&spectra)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub lambda: f64,
    pub summary: GapRatioSummary,
}

/// One gap-ratio summary per `(α, λ)` grid point, in grid order.
pub fn phase_diagram_scan(
    base: &ModelParams,
    grid: &[(f64, f64)],
    ensemble: &Ensemble,
    window: Option<EnergyWindow>,
) -> Result<Vec<PhasePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty (alpha, lambda) grid".into()));
    }
    grid.iter()
        .map(|&(alpha, lambda)| {
            let params = ModelParams { alpha, lambda, ..base.clone() };
            gap_ratio_point(&params, ensemble, window)
                .map(|summary| PhasePoint { alpha, lambda, summary })
                .map_err(|e| e.at_point(format!("alpha={alpha}, lambda={lambda}")))
        })
        .collect()
}

/// Linear interpolation of the first downward crossing of `level` by the
/// sequence `(x, y)` (ascending `x`).
pub fn first_crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 >= level && y1 < level).then(|| x0 + (y0 - level) * (x1 - x0) / (y0 - y1))
    })
}
