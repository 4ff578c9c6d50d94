//! Realization orchestration: one random phase `φ` per realization,
//! diagonalized independently in parallel and reduced in index order.
//!
//! Realization seeds depend only on the master seed and the realization
//! index, so every point of a parameter sweep sees the same set of phases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, enumerate_basis, FockBasis, ModelParams};
use crate::seed::{derive_seed, phase_from_seed};
use crate::spectra::{full_diagonalize, SpectrumResult};

/// How many phase realizations to draw and from which master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ensemble {
    pub master_seed: u64,
    pub samples: usize,
}

impl Ensemble {
    pub fn new(master_seed: u64, samples: usize) -> Self {
        Self { master_seed, samples }
    }

    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.samples).map(|r| self.seed(r)).collect()
    }
}

/// `base` with the phase of realization `index`.
pub fn realization_params(base: &ModelParams, ensemble: &Ensemble, index: usize) -> (ModelParams, u64) {
    let seed = ensemble.seed(index);
    (base.clone().with_phi(phase_from_seed(seed)), seed)
}

/// Diagonalize one realization in a prepared basis.
pub fn diagonalize(params: &ModelParams, basis: &FockBasis, seed: u64, want_vectors: bool) -> Result<SpectrumResult> {
    let h = build_hamiltonian(params, basis)?;
    let mut spec = full_diagonalize(&h, want_vectors)?;
    spec.params = Some(params.clone());
    spec.seed = Some(seed);
    Ok(spec)
}

/// Map `f` over every realization's spectrum. Results come back in
/// realization order regardless of the worker count; the first failure is
/// reported with its realization index and seed.
pub fn map_realizations<T, F>(base: &ModelParams, ensemble: &Ensemble, want_vectors: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &ModelParams, SpectrumResult) -> Result<T> + Sync,
{
    if ensemble.samples == 0 {
        return Err(Error::EmptyEnsemble("sample count is zero"));
    }
    base.validate()?;
    let basis = enumerate_basis(base.sites, base.particles)?;
    (0..ensemble.samples)
        .into_par_iter()
        .map(|r| {
            let (params, seed) = realization_params(base, ensemble, r);
            diagonalize(&params, &basis, seed, want_vectors)
                .and_then(|spec| f(r, &params, spec))
                .map_err(|e| e.in_realization(r, seed))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Paper-style sample counts for the gap-ratio and chi scans (200 at
/// `L = 14`, 50 at `L = 16`), scaled inversely with the Hilbert dimension
/// for other sizes and clamped to `[20, 2000]`.
pub fn default_samples(sites: usize) -> usize {
    match sites {
        14 => 200,
        16 => 50,
        _ => {
            let d = crate::model::binomial(sites, crate::model::half_filling(sites)) as f64;
            let d14 = crate::model::binomial(14, 7) as f64;
            ((200.0 * d14 / d).round() as usize).clamp(20, 2000)
        }
    }
}

/// Sample counts used for the spectral form factor (2000 … 50 for
/// `L = 12 … 17`), with the same proportional rule elsewhere.
pub fn default_sff_samples(sites: usize) -> usize {
    match sites {
        12 => 2000,
        13 => 1500,
        14 => 1000,
        15 => 200,
        16 => 100,
        17 => 50,
        _ => {
            let d = crate::model::binomial(sites, crate::model::half_filling(sites)) as f64;
            let d12 = crate::model::binomial(12, 6) as f64;
            ((2000.0 * d12 / d).round() as usize).clamp(20, 4000)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_and_seeds() {
        let base = ModelParams::new(6, 1.0, 0.2, 1.0);
        let ens = Ensemble::new(11, 5);
        let seeds = map_realizations(&base, &ens, false, |_, _, s| Ok(s.seed.unwrap())).unwrap();
        assert_eq!(seeds, ens.seeds());
    }

    #[test]
    fn error_names_the_realization() {
        let base = ModelParams::new(6, 1.0, 0.2, 1.0);
        let ens = Ensemble::new(3, 4);
        let err = map_realizations(&base, &ens, false, |r, _, _| {
            if r == 2 {
                Err(Error::DegenerateSpectrum)
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        match err {
            Error::Realization { index, seed, .. } => {
                assert_eq!(index, 2);
                assert_eq!(seed, ens.seed(2));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn sample_defaults() {
        assert_eq!(default_samples(14), 200);
        assert_eq!(default_samples(16), 50);
        assert!(default_samples(12) > 200);
        assert_eq!(default_sff_samples(12), 2000);
    }
}
