//! Fixed-filling Fock basis and dense assembly of the interacting
//! generalized Aubry-André Hamiltonian
//!
//! ```text
//! H = -t Σ_<ij> (a†_i a_j + h.c.) + λ Σ_i C_i n_i + V Σ_<ij> n_i n_j
//! C_i = 2 cos(2π q i + φ) / (1 - α cos(2π q i + φ))
//! ```
//!
//! States are bit patterns: bit `i` set means site `i` is occupied. The
//! quasi-periodic phase argument uses the bit index `i` directly; the local
//! density deformation uses 1-based site labels (`n_{L/2}`), i.e. bit
//! `L/2 - 1` for even `L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden-mean wavenumber `(√5 − 1)/2`.
pub const GOLDEN_Q: f64 = 0.618_033_988_749_894_9;

/// Largest chain length representable by the bit-pattern basis.
pub const MAX_SITES: usize = 30;

/// Dense matrices beyond this dimension are refused (memory guard).
pub const MAX_DENSE_DIM: usize = 16_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" | "obc" => Ok(Boundary::Open),
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidParameter(format!("unknown boundary `{other}`"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

/// All Hamiltonian parameters for one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sites: usize,
    pub particles: usize,
    pub hopping: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub interaction: f64,
    pub q: f64,
    pub phi: f64,
    pub boundary: Boundary,
}

impl ModelParams {
    /// Parameters at the standard filling `N = ⌈L/2⌉` with `t = 1`, golden
    /// `q`, `φ = 0` and open boundaries.
    pub fn new(sites: usize, lambda: f64, alpha: f64, interaction: f64) -> Self {
        Self {
            sites,
            particles: half_filling(sites),
            hopping: 1.0,
            lambda,
            alpha,
            interaction,
            q: GOLDEN_Q,
            phi: 0.0,
            boundary: Boundary::Open,
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_particles(mut self, particles: usize) -> Self {
        self.particles = particles;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(format!("site count L = {} < 2", self.sites)));
        }
        if self.particles > self.sites {
            return Err(Error::InvalidParameter(format!(
                "particle count N = {} exceeds L = {}",
                self.particles, self.sites
            )));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {} outside [0, 1)", self.alpha)));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {} must be >= 0", self.lambda)));
        }
        for (name, v) in [("t", self.hopping), ("V", self.interaction), ("q", self.q), ("phi", self.phi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    /// On-site coefficients `C_i` for every site of the chain.
    pub fn coefficients(&self) -> Vec<f64> {
        (0..self.sites).map(|i| onsite_coefficient(i, self.alpha, self.q, self.phi)).collect()
    }

    /// Bonds `(i, j)` with `i < j`; the periodic wrap bond is `(0, L-1)`.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<_> = (0..self.sites - 1).map(|i| (i, i + 1)).collect();
        // A two-site ring has only the one bond.
        if self.boundary == Boundary::Periodic && self.sites > 2 {
            bonds.push((0, self.sites - 1));
        }
        bonds
    }
}

/// `N = L/2` for even `L`, `(L+1)/2` for odd `L`.
pub fn half_filling(sites: usize) -> usize {
    sites.div_ceil(2)
}

/// Generalized Aubry-André coefficient `2cos(x)/(1 − α cos x)` with
/// `x = 2π q i + φ`.
pub fn onsite_coefficient(i: usize, alpha: f64, q: f64, phi: f64) -> f64 {
    let c = (2.0 * PI * q * i as f64 + phi).cos();
    2.0 * c / (1.0 - alpha * c)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, j| acc * (n - j) / (j + 1))
}

/// Fixed-`N` occupation basis, ordered by increasing bit pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    sites: usize,
    particles: usize,
    states: Vec<u32>,
}

impl FockBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    /// Position of `state` in the basis, if it belongs to the sector.
    pub fn lookup(&self, state: u32) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

/// Enumerate all `L`-bit patterns with exactly `N` bits set, ascending.
pub fn enumerate_basis(sites: usize, particles: usize) -> Result<FockBasis> {
    if particles > sites {
        return Err(Error::InvalidParameter(format!("N = {particles} exceeds L = {sites}")));
    }
    if sites > MAX_SITES {
        return Err(Error::InvalidParameter(format!("L = {sites} exceeds {MAX_SITES}")));
    }
    let mut states = Vec::with_capacity(binomial(sites, particles));
    if particles == 0 {
        states.push(0);
    } else {
        let limit = 1u64 << sites;
        let mut s: u64 = (1u64 << particles) - 1;
        // Gosper's hack: next larger integer with the same popcount.
        while s < limit {
            states.push(s as u32);
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    Ok(FockBasis { sites, particles, states })
}

/// Dense real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<f64>,
    symmetric: bool,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim], symmetric: true }
    }

    /// Build from row-major entries; symmetry is checked exactly.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        let mut op = Self { dim, data, symmetric: false };
        op.symmetric = op.is_exactly_symmetric();
        Ok(op)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        let mut op = Self { dim, data, symmetric: false };
        op.symmetric = op.is_exactly_symmetric();
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn add_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    fn is_exactly_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

fn check_basis(params: &ModelParams, basis: &FockBasis) -> Result<()> {
    params.validate()?;
    if basis.sites() != params.sites {
        return Err(Error::DimensionMismatch { expected: params.sites, found: basis.sites() });
    }
    if basis.particles() != params.particles {
        return Err(Error::DimensionMismatch { expected: params.particles, found: basis.particles() });
    }
    Ok(())
}

fn bond_count(state: u32, bonds: &[(usize, usize)]) -> usize {
    bonds.iter().filter(|&&(i, j)| state >> i & 1 == 1 && state >> j & 1 == 1).count()
}

/// Assemble the full many-body Hamiltonian in the fixed-`N` sector.
pub fn build_hamiltonian(params: &ModelParams, basis: &FockBasis) -> Result<DenseOperator> {
    check_basis(params, basis)?;
    let dim = basis.len();
    if dim > MAX_DENSE_DIM {
        return Err(Error::TooLarge { dim, max: MAX_DENSE_DIM });
    }
    let coeffs = params.coefficients();
    let bonds = params.bonds();
    let mut h = DenseOperator::zeros(dim);

    for (a, &s) in basis.states().iter().enumerate() {
        let onsite: f64 = (0..params.sites).filter(|&i| s >> i & 1 == 1).map(|i| coeffs[i]).sum();
        let diag = params.lambda * onsite + params.interaction * bond_count(s, &bonds) as f64;
        h.add_symmetric(a, a, diag);

        for &(i, j) in &bonds {
            // Only visit each pair once: hop from the lower-indexed basis state.
            if (s >> i & 1) == (s >> j & 1) {
                continue;
            }
            let target = s ^ (1 << i) ^ (1 << j);
            if target < s {
                continue;
            }
            let b = basis.lookup(target).expect("hop preserves particle number");
            // Jordan-Wigner string: particles strictly between i and j.
            let between = (s & ((1u32 << j) - 1) & !((1u32 << (i + 1)) - 1)).count_ones();
            let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
            h.add_symmetric(a, b, -params.hopping * sign);
        }
    }
    h.symmetric = true;
    Ok(h)
}

/// Gauge-deformation operator `H₁`; both choices are diagonal in the
/// occupation basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// `n_{L/2}` (even `L`) or `n_{(L+1)/2}` (odd `L`), sites counted from 1.
    LocalDensity,
    /// `Σ_j n_j n_{j+1}` over the bonds of the chosen boundary.
    ExtensiveNN,
}

impl std::str::FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "local" | "local_density" => Ok(Perturbation::LocalDensity),
            "extensive" | "extensive_nn" | "nn" => Ok(Perturbation::ExtensiveNN),
            other => Err(Error::InvalidParameter(format!("unknown perturbation `{other}`"))),
        }
    }
}

impl std::fmt::Display for Perturbation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Perturbation::LocalDensity => "local",
            Perturbation::ExtensiveNN => "extensive",
        })
    }
}

/// Bit index of the site probed by the local deformation.
pub fn local_site(sites: usize) -> usize {
    half_filling(sites) - 1
}

pub fn build_perturbation(kind: Perturbation, params: &ModelParams, basis: &FockBasis) -> Result<Vec<f64>> {
    check_basis(params, basis)?;
    let values = match kind {
        Perturbation::LocalDensity => {
            let site = local_site(params.sites);
            basis.states().iter().map(|&s| (s >> site & 1) as f64).collect()
        }
        Perturbation::ExtensiveNN => {
            let bonds = params.bonds();
            basis.states().iter().map(|&s| bond_count(s, &bonds) as f64).collect()
        }
    };
    Ok(values)
}

/// `L × L` single-particle matrix (interaction plays no role).
pub fn single_particle_matrix(params: &ModelParams) -> Result<DenseOperator> {
    let p = ModelParams { particles: 1, ..params.clone() };
    p.validate()?;
    let coeffs = p.coefficients();
    let mut h = DenseOperator::zeros(p.sites);
    for (i, c) in coeffs.iter().enumerate() {
        h.add_symmetric(i, i, p.lambda * c);
    }
    for (i, j) in p.bonds() {
        h.add_symmetric(i, j, -p.hopping);
    }
    Ok(h)
}
