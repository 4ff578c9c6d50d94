//! Random-matrix and uncorrelated-level reference ensembles.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::DenseOperator;
use crate::seed::realization_rng;

/// GOE matrix `(A + Aᵀ)/2` with i.i.d. standard normal `A`: off-diagonal
/// variance 1/2, diagonal variance 1.
pub fn goe_matrix(dim: usize, seed: u64) -> DenseOperator {
    let mut rng = realization_rng(seed);
    let mut data = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let v: f64 = rng.sample(StandardNormal);
            let v = if i == j { v } else { v * std::f64::consts::FRAC_1_SQRT_2 };
            data[i * dim + j] = v;
            data[j * dim + i] = v;
        }
    }
    DenseOperator::from_row_major(dim, data).expect("square by construction")
}

/// `count` i.i.d. levels uniform on `[0, count)`, sorted, so the mean
/// spacing is 1 (already unfolded).
pub fn poisson_levels(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = realization_rng(seed);
    let mut v: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * count as f64).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Wigner-Dyson surmise for the GOE nearest-neighbor spacing density.
pub fn wigner_surmise(s: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 * s * (-std::f64::consts::FRAC_PI_4 * s * s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goe_is_symmetric() {
        let h = goe_matrix(7, 3);
        assert!(h.is_symmetric());
        assert_ne!(goe_matrix(7, 3).as_slice(), goe_matrix(7, 4).as_slice());
    }

    #[test]
    fn poisson_sorted_in_range() {
        let v = poisson_levels(1000, 1);
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        assert!(v[0] >= 0.0 && v[999] < 1000.0);
    }
}
