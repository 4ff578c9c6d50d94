use faer::Mat;
use gaa_core::model::{build_hamiltonian, enumerate_basis, DenseOperator, ModelParams};
use gaa_core::spectra::{full_diagonalize, select_window, scaled_spectrum, unfold, EnergyWindow};
use gaa_core::surrogate::goe_matrix;
use proptest::prelude::*;

/// Cyclic Jacobi rotations; slow but independent of any library solver.
fn jacobi_eigenvalues(h: &DenseOperator) -> Vec<f64> {
    let n = h.dim();
    let mut a: Vec<f64> = h.as_slice().to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i * n + j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn agrees_with_jacobi_on_goe_50() {
    for seed in 0..3 {
        let h = goe_matrix(50, seed);
        let fast = full_diagonalize(&h, false).unwrap().eigenvalues;
        let slow = jacobi_eigenvalues(&h);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn agrees_with_jacobi_on_small_chain() {
    let p = ModelParams::new(8, 0.9, 0.4, 1.0).with_phi(0.3);
    let basis = enumerate_basis(8, 4).unwrap();
    let h = build_hamiltonian(&p, &basis).unwrap();
    let fast = full_diagonalize(&h, true).unwrap().eigenvalues;
    let slow = jacobi_eigenvalues(&h);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).abs() < 1e-9);
    }
}

fn check_eigenpairs(h: &DenseOperator) {
    let spec = full_diagonalize(h, true).unwrap();
    let v = spec.eigenvectors.as_ref().unwrap();
    let hm = h.to_faer();
    let hv = &hm * v;
    let norm = h.frobenius_norm();
    for n in 0..spec.dim() {
        let r: f64 = (0..spec.dim()).map(|k| (hv[(k, n)] - spec.eigenvalues[n] * v[(k, n)]).powi(2)).sum::<f64>().sqrt();
        assert!(r <= 1e-8 * norm, "residual {r} for state {n}");
    }
    let gram: Mat<f64> = v.transpose() * v;
    for i in 0..spec.dim() {
        for j in 0..spec.dim() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((gram[(i, j)] - target).abs() < 1e-10);
        }
    }
    assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn eigenpair_residuals_and_orthonormality() {
    check_eigenpairs(&goe_matrix(120, 4));
    let p = ModelParams::new(10, 0.65, 0.3, 1.0).with_phi(2.0);
    let basis = enumerate_basis(10, 5).unwrap();
    check_eigenpairs(&build_hamiltonian(&p, &basis).unwrap());
}

#[test]
fn goe_unfolded_spacings_follow_wigner_surmise() {
    let mut spacings = Vec::new();
    for seed in 0..20 {
        let eigs = full_diagonalize(&goe_matrix(400, 100 + seed), false).unwrap().eigenvalues;
        let levels = unfold(&eigs, 9).unwrap().levels;
        let core = &levels[100..300];
        spacings.extend(core.windows(2).map(|w| w[1] - w[0]));
    }
    let mean: f64 = spacings.iter().sum::<f64>() / spacings.len() as f64;
    assert!((mean - 1.0).abs() < 0.05, "mean spacing {mean}");

    let cdf = |s: f64| 1.0 - (-std::f64::consts::FRAC_PI_4 * s * s).exp();
    let edges: Vec<f64> = (0..=12).map(|k| k as f64 * 0.25).collect();
    let total = spacings.len() as f64;
    let mut chi2 = 0.0;
    let bins = edges.len();
    for k in 0..bins {
        let (lo, hi) = (edges[k], edges.get(k + 1).copied().unwrap_or(f64::INFINITY));
        let observed = spacings.iter().filter(|&&s| s >= lo && s < hi).count() as f64;
        let expected = total * (cdf(hi) - cdf(lo));
        chi2 += (observed - expected).powi(2) / expected;
    }
    let dof = (bins - 1) as f64;
    assert!(chi2 / dof < 3.0, "chi2/dof = {}", chi2 / dof);
}

#[test]
fn window_matches_direct_count() {
    let eigs = full_diagonalize(&goe_matrix(300, 9), false).unwrap().eigenvalues;
    let scaled = scaled_spectrum(&eigs).unwrap();
    for (lo, hi) in [(-0.1, 0.1), (-1.0, 1.0), (0.2, 0.7), (-0.95, -0.5)] {
        let w = EnergyWindow::new(lo, hi).unwrap();
        let range = select_window(&eigs, w).unwrap();
        let direct = scaled.iter().filter(|&&x| x >= lo && x <= hi).count();
        assert_eq!(range.len(), direct);
        assert!(scaled[range].iter().all(|&x| x >= lo && x <= hi));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unfolding_is_affine_invariant(
        raw in prop::collection::vec(-50.0f64..50.0, 30..120),
        a in 0.01f64..100.0,
        b in -1e3f64..1e3,
        degree in 1usize..=7,
    ) {
        let mut eigs = raw;
        eigs.sort_by(f64::total_cmp);
        prop_assume!(eigs[eigs.len() - 1] - eigs[0] > 1.0);
        let base = unfold(&eigs, degree).unwrap().levels;
        let moved: Vec<f64> = eigs.iter().map(|&e| a * e + b).collect();
        let other = unfold(&moved, degree).unwrap().levels;
        for (x, y) in base.iter().zip(&other) {
            prop_assert!((x - y).abs() < 1e-6 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn window_is_affine_invariant(raw in prop::collection::vec(-5.0f64..5.0, 10..200), a in 0.1f64..10.0, b in -10.0f64..10.0) {
        let mut eigs = raw;
        eigs.sort_by(f64::total_cmp);
        prop_assume!(eigs[eigs.len() - 1] > eigs[0]);
        let moved: Vec<f64> = eigs.iter().map(|&e| a * e + b).collect();
        let w = EnergyWindow::default();
        let r1 = select_window(&eigs, w).unwrap();
        let r2 = select_window(&moved, w).unwrap();
        // Rounding can only move levels sitting on the boundary.
        prop_assert!((r1.start as i64 - r2.start as i64).abs() <= 1);
        prop_assert!((r1.end as i64 - r2.end as i64).abs() <= 1);
    }
}
