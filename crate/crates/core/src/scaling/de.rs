//! Classic `rand/1/bin` differential evolution on a box.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::realization_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub population: usize,
    pub f_mut: f64,
    pub crossover: f64,
    pub max_generations: usize,
    /// Independent restarts (distinct derived seeds); the best is kept.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self { population: 40, f_mut: 0.8, crossover: 0.9, max_generations: 300, restarts: 8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimize `objective` over the box `bounds`. Trial vectors are drawn
/// sequentially from one seeded stream, evaluated in parallel, then
/// selected in population order, so the result depends only on the seed.
pub fn differential_evolution<F>(
    objective: F,
    bounds: &[(f64, f64)],
    population: usize,
    f_mut: f64,
    crossover: f64,
    max_generations: usize,
    seed: u64,
) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if population < 4 {
        return Err(Error::InvalidParameter(format!("population {population} < 4")));
    }
    if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidParameter("invalid search box".into()));
    }
    let dim = bounds.len();
    let mut rng = realization_rng(seed);

    let mut members: Vec<Vec<f64>> = (0..population)
        .map(|_| bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect();
    let score = |x: &Vec<f64>| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut values: Vec<f64> = members.par_iter().map(score).collect();
    let mut evaluations = population;

    for _ in 0..max_generations {
        let trials: Vec<Vec<f64>> = (0..population)
            .map(|i| {
                let picks = loop {
                    let p = sample(&mut rng, population, 3);
                    if !p.iter().any(|k| k == i) {
                        break p;
                    }
                };
                let (a, b, c) = (&members[picks.index(0)], &members[picks.index(1)], &members[picks.index(2)]);
                let forced = rng.random_range(0..dim);
                (0..dim)
                    .map(|k| {
                        let v = if k == forced || rng.random::<f64>() < crossover {
                            a[k] + f_mut * (b[k] - c[k])
                        } else {
                            members[i][k]
                        };
                        v.clamp(bounds[k].0, bounds[k].1)
                    })
                    .collect()
            })
            .collect();
        let trial_values: Vec<f64> = trials.par_iter().map(score).collect();
        evaluations += population;
        for (i, (trial, value)) in trials.into_iter().zip(trial_values).enumerate() {
            if value <= values[i] {
                members[i] = trial;
                values[i] = value;
            }
        }
    }

    let best = (0..population).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("population >= 4");
    Ok(DeResult { best: members[best].clone(), value: values[best], evaluations })
}
