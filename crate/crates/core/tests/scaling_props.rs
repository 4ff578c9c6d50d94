use gaa_core::scaling::{collapse, cost_function, DeConfig, theta, AnsatzSpec, CollapseParams, CollapsePoint, Correlation, Drift};
use proptest::prelude::*;

fn synthetic(sizes: &[usize], per_size: usize, ansatz: &AnsatzSpec, truth: &CollapseParams) -> Vec<CollapsePoint> {
    sizes
        .iter()
        .flat_map(|&l| {
            (0..per_size).map(move |k| {
                let lambda = 0.5 + 2.5 * k as f64 / (per_size - 1) as f64;
                (l, lambda)
            })
        })
        .map(|(l, lambda)| CollapsePoint {
            sites: l,
            lambda,
            value: theta(lambda, l, ansatz.correlation, ansatz.drift, truth).tanh(),
        })
        .collect()
}

#[test]
fn perfect_collapse_costs_nothing() {
    let ansatz = AnsatzSpec::new(Correlation::PowerLaw, Drift::Const);
    let truth = CollapseParams { nu: 1.2, lambda0: 1.7, lambda1: 0.0 };
    let points = synthetic(&[8, 10, 12], 25, &ansatz, &truth);
    assert_eq!(cost_function(&points, &ansatz, &truth).unwrap(), 0.0);
}

#[test]
fn wrong_parameters_cost_more() {
    let ansatz = AnsatzSpec::new(Correlation::Bkt, Drift::LinearL);
    let truth = CollapseParams { nu: 0.8, lambda0: 1.1, lambda1: 0.05 };
    let points = synthetic(&[8, 10, 12, 14], 30, &ansatz, &truth);
    let off = CollapseParams { nu: 0.8, lambda0: 1.6, lambda1: 0.05 };
    assert_eq!(cost_function(&points, &ansatz, &truth).unwrap(), 0.0);
    assert!(cost_function(&points, &ansatz, &off).unwrap() > 0.1);
}

#[test]
fn interleaved_noisy_curves_cost_little() {
    let ansatz = AnsatzSpec::new(Correlation::PowerLaw, Drift::Const);
    let truth = CollapseParams { nu: 1.0, lambda0: 1.5, lambda1: 0.0 };
    let mut points = synthetic(&[10, 12, 14], 40, &ansatz, &truth);
    for (k, p) in points.iter_mut().enumerate() {
        // Deterministic jitter of 2e-4 in alternating sign.
        p.value += if k % 2 == 0 { 2e-4 } else { -2e-4 };
    }
    let c = cost_function(&points, &ansatz, &truth).unwrap();
    assert!(c <= 0.05, "{c}");
}

#[test]
fn recovers_synthetic_exponent() {
    let ansatz = AnsatzSpec::new(Correlation::PowerLaw, Drift::Const);
    let truth = CollapseParams { nu: 1.3, lambda0: 1.9, lambda1: 0.0 };
    let points = synthetic(&[8, 10, 12, 14], 60, &ansatz, &truth);
    let de = DeConfig { restarts: 2, max_generations: 150, seed: 4, ..DeConfig::default() };
    let a = collapse(&points, &ansatz, &de).unwrap();
    let b = collapse(&points, &ansatz, &de).unwrap();
    assert_eq!(a, b);
    assert!(a.cost <= 0.05);
    assert!((a.params.lambda0 - 1.9).abs() < 0.05, "{:?}", a.params);
    assert!((a.params.nu - 1.3).abs() < 0.13, "{:?}", a.params);
}

#[test]
fn rejects_degenerate_inputs() {
    let ansatz = AnsatzSpec::new(Correlation::PowerLaw, Drift::Const);
    let params = CollapseParams { nu: 1.0, lambda0: 1.0, lambda1: 0.0 };
    let flat: Vec<CollapsePoint> = (0..5).map(|k| CollapsePoint { sites: 8, lambda: k as f64, value: 0.4 }).collect();
    assert!(cost_function(&flat, &ansatz, &params).is_err());
    assert!(cost_function(&flat[..2], &ansatz, &params).is_err());
}

fn arb_points() -> impl Strategy<Value = Vec<CollapsePoint>> {
    prop::collection::vec((prop::sample::select(vec![8usize, 10, 12, 14]), 0.1f64..4.0, -1.0f64..1.0), 4..80)
        .prop_map(|v| v.into_iter().map(|(sites, lambda, value)| CollapsePoint { sites, lambda, value }).collect())
}

fn arb_params() -> impl Strategy<Value = (AnsatzSpec, CollapseParams)> {
    (
        prop::sample::select(vec![Correlation::PowerLaw, Correlation::Bkt]),
        prop::sample::select(vec![Drift::Const, Drift::LinearL, Drift::InverseL, Drift::InverseLogL]),
        0.1f64..3.0,
        0.3f64..3.0,
        -0.5f64..0.5,
    )
        .prop_map(|(c, d, nu, lambda0, lambda1)| (AnsatzSpec::new(c, d), CollapseParams { nu, lambda0, lambda1 }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cost_is_affine_invariant(points in arb_points(), (ansatz, params) in arb_params(), a in 0.01f64..100.0, b in -10.0f64..10.0, flip in any::<bool>()) {
        let Ok(base) = cost_function(&points, &ansatz, &params) else { return Ok(()) };
        let a = if flip { -a } else { a };
        let moved: Vec<CollapsePoint> = points.iter().map(|p| CollapsePoint { value: a * p.value + b, ..*p }).collect();
        let other = cost_function(&moved, &ansatz, &params).unwrap();
        prop_assert!((base - other).abs() <= 1e-12 * (1.0 + base), "{base} vs {other}");
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn cost_ignores_input_order(points in arb_points(), (ansatz, params) in arb_params(), seed in any::<u64>()) {
        let Ok(base) = cost_function(&points, &ansatz, &params) else { return Ok(()) };
        let mut shuffled = points.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(base, cost_function(&shuffled, &ansatz, &params).unwrap());
    }

    #[test]
    fn duplicating_points_keeps_cost(points in arb_points(), (ansatz, params) in arb_params()) {
        let Ok(base) = cost_function(&points, &ansatz, &params) else { return Ok(()) };
        let doubled: Vec<CollapsePoint> = points.iter().chain(points.iter()).copied().collect();
        let other = cost_function(&doubled, &ansatz, &params).unwrap();
        prop_assert!((base - other).abs() <= 1e-12 * (1.0 + base));
    }
}
