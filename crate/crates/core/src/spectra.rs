//! Dense diagonalization, energy-window selection, unfolding and
//! single-particle localization measures.

use std::ops::Range;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{single_particle_matrix, DenseOperator, ModelParams};

/// Eigenvalues (ascending) and optionally the matching orthonormal
/// eigenvectors, stored as columns.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Mat<f64>>,
    pub params: Option<ModelParams>,
    pub seed: Option<u64>,
}

impl SpectrumResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn window(&self, window: EnergyWindow) -> Result<Range<usize>> {
        select_window(&self.eigenvalues, window)
    }

    pub fn width(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

/// Bounds on the rescaled spectrum `Ẽ ∈ [-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for EnergyWindow {
    fn default() -> Self {
        Self { lo: -0.1, hi: 0.1 }
    }
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(-1.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!("energy window [{lo}, {hi}] not inside [-1, 1]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn full() -> Self {
        Self { lo: -1.0, hi: 1.0 }
    }
}

/// Diagonalize a real symmetric matrix.
pub fn full_diagonalize(h: &DenseOperator, want_vectors: bool) -> Result<SpectrumResult> {
    if !h.is_symmetric() {
        return Err(Error::InvalidParameter("matrix is not symmetric".into()));
    }
    let m = h.to_faer();
    if want_vectors {
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NoConvergence)?;
        let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let u = evd.U();
        let vectors = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, order[j])]);
        Ok(SpectrumResult {
            eigenvalues: order.iter().map(|&k| values[k]).collect(),
            eigenvectors: Some(vectors),
            params: None,
            seed: None,
        })
    } else {
        let mut values = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::NoConvergence)?;
        values.sort_by(f64::total_cmp);
        Ok(SpectrumResult { eigenvalues: values, eigenvectors: None, params: None, seed: None })
    }
}

/// Rescale so that the extreme eigenvalues map to `±1`.
pub fn scaled_spectrum(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = extremes(eigenvalues)?;
    Ok(eigenvalues.iter().map(|&e| (2.0 * e - hi - lo) / (hi - lo)).collect())
}

fn extremes(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, found: values.len() });
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::DegenerateSpectrum);
    }
    Ok((lo, hi))
}

/// Contiguous indices of the ascending `eigenvalues` whose rescaled value
/// lies inside `window`. An empty range is a legitimate outcome that
/// callers record as a skipped realization.
pub fn select_window(eigenvalues: &[f64], window: EnergyWindow) -> Result<Range<usize>> {
    let scaled = scaled_spectrum(eigenvalues)?;
    let start = scaled.partition_point(|&x| x < window.lo);
    let end = scaled.partition_point(|&x| x <= window.hi);
    Ok(start..end.max(start))
}

/// Unfolded levels plus a count of places where the fitted staircase
/// failed to be monotone.
#[derive(Clone, Debug, PartialEq)]
pub struct Unfolded {
    pub levels: Vec<f64>,
    pub non_monotone: usize,
}

pub const DEFAULT_FIT_DEGREE: usize = 3;

/// Map eigenvalues through a least-squares polynomial fit of the
/// staircase `N(E_i) = i + 1/2`.
pub fn unfold(eigenvalues: &[f64], fit_degree: usize) -> Result<Unfolded> {
    let n = eigenvalues.len();
    if n < fit_degree + 2 {
        return Err(Error::InsufficientData { needed: fit_degree + 2, found: n });
    }
    let x = scaled_spectrum(eigenvalues)?;
    let terms = fit_degree + 1;

    // Legendre basis on [-1, 1] keeps the normal equations well conditioned.
    let mut gram = vec![0.0; terms * terms];
    let mut rhs = vec![0.0; terms];
    let mut row = vec![0.0; terms];
    for (i, &xi) in x.iter().enumerate() {
        legendre_row(xi, &mut row);
        let y = i as f64 + 0.5;
        for a in 0..terms {
            rhs[a] += row[a] * y;
            for b in 0..=a {
                gram[a * terms + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..terms {
        for b in 0..a {
            gram[b * terms + a] = gram[a * terms + b];
        }
    }
    let coeffs = cholesky_solve(&mut gram, &mut rhs, terms)
        .ok_or_else(|| Error::SingularFit(format!("staircase fit of degree {fit_degree} on {n} levels")))?;

    let levels: Vec<f64> = x
        .iter()
        .map(|&xi| {
            legendre_row(xi, &mut row);
            row.iter().zip(&coeffs).map(|(p, c)| p * c).sum()
        })
        .collect();
    let non_monotone = levels.windows(2).filter(|w| w[1] < w[0]).count();
    Ok(Unfolded { levels, non_monotone })
}

fn legendre_row(x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Solve `A x = b` for symmetric positive-definite `A` (row-major, n×n),
/// in place. Returns `None` when a pivot collapses.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 1e-13 * scale) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b.to_vec())
}

/// Inverse participation ratio `Σ_i |ψ(i)|⁴` of each column.
pub fn inverse_participation(vectors: &Mat<f64>) -> Vec<f64> {
    (0..vectors.ncols())
        .map(|n| vectors.col(n).iter().map(|&c| c.powi(4)).sum())
        .collect()
}

/// `(E_n, IPR_n)` for the one-particle problem on `params.sites` sites.
pub fn single_particle_ipr(params: &ModelParams) -> Result<Vec<(f64, f64)>> {
    let h = single_particle_matrix(params)?;
    let spec = full_diagonalize(&h, true)?;
    let vectors = spec.eigenvectors.as_ref().expect("requested eigenvectors");
    Ok(spec.eigenvalues.iter().copied().zip(inverse_participation(vectors)).collect())
}

/// Single-particle mobility edge `E_c = 2 sgn(λ)(|t| − |λ|)/α`; `None` at
/// `α = 0`, where the whole band localizes at once.
pub fn mobility_edge(params: &ModelParams) -> Option<f64> {
    (params.alpha > 0.0).then(|| 2.0 * params.lambda.signum() * (params.hopping.abs() - params.lambda.abs()) / params.alpha)
}

/// Fraction of single-particle states whose IPR classification
/// (localized when `IPR > 1/√L`) agrees with the side of the mobility edge
/// they fall on (localized when `αE > 2 sgn(λ)(|t| − |λ|)`).
pub fn mobility_edge_agreement(params: &ModelParams) -> Result<f64> {
    if params.alpha <= 0.0 {
        return Err(Error::InvalidParameter("mobility edge requires alpha > 0".into()));
    }
    let threshold = 1.0 / (params.sites as f64).sqrt();
    let rhs = 2.0 * params.lambda.signum() * (params.hopping.abs() - params.lambda.abs());
    let states = single_particle_ipr(params)?;
    let agree = states
        .iter()
        .filter(|&&(e, ipr)| (ipr > threshold) == (params.alpha * e > rhs))
        .count();
    Ok(agree as f64 / states.len() as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let h = DenseOperator::from_row_major(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = full_diagonalize(&h, true).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let h = DenseOperator::from_row_major(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert!(full_diagonalize(&h, false).is_err());
    }

    #[test]
    fn window_examples() {
        let w = EnergyWindow::default();
        assert_eq!(select_window(&[-1.0, 0.0, 1.0], w).unwrap(), 1..2);
        let even: Vec<f64> = (0..=100).map(|k| k as f64 / 10.0).collect();
        assert_eq!(select_window(&even, w).unwrap(), 45..56);
    }

    #[test]
    fn window_can_be_empty() {
        let r = select_window(&[-1.0, -0.5, 0.5, 1.0], EnergyWindow::default()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn window_rejects_flat_spectrum() {
        assert!(matches!(select_window(&[2.0, 2.0, 2.0], EnergyWindow::default()), Err(Error::DegenerateSpectrum)));
        assert!(EnergyWindow::new(0.2, 0.1).is_err());
        assert!(EnergyWindow::new(-1.5, 0.1).is_err());
    }

    #[test]
    fn unfold_linear_staircase() {
        let e: Vec<f64> = (0..40).map(|i| 3.0 + 0.25 * i as f64).collect();
        for degree in 1..=5 {
            let u = unfold(&e, degree).unwrap();
            for (i, v) in u.levels.iter().enumerate() {
                assert!((v - (i as f64 + 0.5)).abs() < 1e-10, "degree {degree}: {v}");
            }
            assert_eq!(u.non_monotone, 0);
        }
    }

    #[test]
    fn unfold_needs_enough_levels() {
        assert!(unfold(&[0.0, 1.0, 2.0, 3.0], 3).is_err());
        assert!(matches!(unfold(&[1.0; 10], 3), Err(Error::DegenerateSpectrum)));
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
