//! Exact diagonalization of small periodic chains.
//!
//! Basis states are bit strings with bit `i` set when spin `i` points down,
//! so `σ^z_i = 1 - 2 b_i`. Both observables and the Hamiltonian conserve
//! `Π σ^z`, and all propagation happens inside one parity block.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quench::{check_times, Observables, TimeSeries};
use crate::spectral::ModelParams;

pub const MAX_SITES: usize = 12;

/// Eigenvalues closer than this are treated as one degenerate level.
const DEGENERACY_TOL: f64 = 1e-9;
const PARITY_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_state(bits: usize) -> Self {
        if bits.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Eigenvalue of `Π σ^z`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Dense Hamiltonian of an `N`-site periodic chain.
#[derive(Clone, Debug)]
pub struct DenseSpinSystem {
    n_sites: usize,
    params: ModelParams,
    hamiltonian: Mat<f64>,
}

fn check_sites(n_sites: usize) -> Result<()> {
    if !(2..=MAX_SITES).contains(&n_sites) {
        return Err(Error::SiteCountOutOfRange(n_sites));
    }
    if n_sites % 2 != 0 {
        return Err(Error::OddSiteCount(n_sites));
    }
    Ok(())
}

fn bond_masks(n_sites: usize) -> impl Iterator<Item = usize> {
    (0..n_sites).map(move |i| (1 << i) | (1 << ((i + 1) % n_sites)))
}

fn magnetization(bits: usize, n_sites: usize) -> f64 {
    n_sites as f64 - 2.0 * bits.count_ones() as f64
}

pub fn build_hamiltonian(n_sites: usize, delta: f64, h: f64) -> Result<DenseSpinSystem> {
    check_sites(n_sites)?;
    let params = ModelParams::new(delta, h)?;
    let dim = 1usize << n_sites;
    let mut hamiltonian = Mat::<f64>::zeros(dim, dim);
    for s in 0..dim {
        hamiltonian[(s, s)] = -h * magnetization(s, n_sites);
        for mask in bond_masks(n_sites) {
            let aligned = (s & mask).count_ones() != 1;
            hamiltonian[(s ^ mask, s)] += if aligned { -delta } else { -1.0 };
        }
    }
    Ok(DenseSpinSystem {
        n_sites,
        params,
        hamiltonian,
    })
}

/// Eigenpairs of one parity block, energies ascending.
#[derive(Clone, Debug)]
pub struct SectorEigen {
    pub parity: Parity,
    pub basis: Vec<usize>,
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the block basis.
    pub vectors: Mat<f64>,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub parity: Parity,
    /// Amplitudes over the full `2^N` basis.
    pub state: Vec<Complex64>,
}

impl DenseSpinSystem {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn hamiltonian(&self) -> &Mat<f64> {
        &self.hamiltonian
    }

    /// Diagonal of `Π σ^z`.
    pub fn parity_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|s| Parity::of_state(s).sign()).collect()
    }

    pub fn sector_basis(&self, parity: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&s| Parity::of_state(s) == parity).collect()
    }

    pub fn sector_eigen(&self, parity: Parity) -> Result<SectorEigen> {
        let basis = self.sector_basis(parity);
        let block = Mat::<f64>::from_fn(basis.len(), basis.len(), |a, b| {
            self.hamiltonian[(basis[a], basis[b])]
        });
        let evd = block
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NonFinite { name: "hamiltonian", value: f64::NAN })?;
        let values = evd.S().column_vector();
        let u = evd.U();
        let mut order: Vec<usize> = (0..basis.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let energies = order.iter().map(|&n| values[n]).collect();
        let vectors = Mat::<f64>::from_fn(basis.len(), basis.len(), |a, n| u[(a, order[n])]);
        Ok(SectorEigen {
            parity,
            basis,
            energies,
            vectors,
        })
    }

    pub fn sector_ground_state(&self, parity: Parity) -> Result<GroundState> {
        let eig = self.sector_eigen(parity)?;
        Ok(eig.embed_level(0, self.dim()))
    }

    /// Lowest eigenpair; even parity wins a tie.
    pub fn ground_state(&self) -> Result<GroundState> {
        let even = self.sector_ground_state(Parity::Even)?;
        let odd = self.sector_ground_state(Parity::Odd)?;
        Ok(if odd.energy < even.energy - PARITY_TIE_TOL {
            odd
        } else {
            even
        })
    }

    /// `⟨M_z⟩` and `⟨S^xx⟩` of a normalized state.
    pub fn observables(&self, state: &[Complex64]) -> Result<Observables> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.len(),
            });
        }
        Ok(state_observables(state, self.n_sites))
    }
}

fn state_observables(state: &[Complex64], n_sites: usize) -> Observables {
    let n = n_sites as f64;
    let mz = state
        .iter()
        .enumerate()
        .map(|(s, a)| a.norm_sqr() * magnetization(s, n_sites))
        .sum::<f64>()
        / n;
    let sxx = bond_masks(n_sites)
        .map(|mask| {
            state
                .iter()
                .enumerate()
                .map(|(s, a)| (state[s ^ mask].conj() * a).re)
                .sum::<f64>()
        })
        .sum::<f64>()
        / n;
    Observables { mz, sxx }
}

impl SectorEigen {
    fn embed_level(&self, level: usize, dim: usize) -> GroundState {
        let mut state = vec![Complex64::new(0.0, 0.0); dim];
        for (a, &s) in self.basis.iter().enumerate() {
            state[s] = Complex64::new(self.vectors[(a, level)], 0.0);
        }
        GroundState {
            energy: self.energies[level],
            parity: self.parity,
            state,
        }
    }
}

/// A state expanded in the eigenbasis of a parity block.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub n_sites: usize,
    pub eigen: SectorEigen,
    pub coeffs: Vec<Complex64>,
}

impl SpectralDecomposition {
    /// Expands `state` over the block of `system` matching `parity`.
    pub fn new(system: &DenseSpinSystem, parity: Parity, state: &[Complex64]) -> Result<Self> {
        if state.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: state.len(),
            });
        }
        let eigen = system.sector_eigen(parity)?;
        let coeffs = (0..eigen.basis.len())
            .map(|n| {
                eigen
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(a, &s)| state[s] * eigen.vectors[(a, n)])
                    .sum()
            })
            .collect();
        Ok(Self {
            n_sites: system.n_sites,
            eigen,
            coeffs,
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    fn combine(&self, amplitudes: impl Iterator<Item = (usize, Complex64)>) -> Vec<Complex64> {
        let mut block = vec![Complex64::new(0.0, 0.0); self.eigen.basis.len()];
        for (n, z) in amplitudes {
            let column = self.eigen.vectors.col(n);
            for (a, b) in block.iter_mut().enumerate() {
                *b += z * column[a];
            }
        }
        let mut state = vec![Complex64::new(0.0, 0.0); 1 << self.n_sites];
        for (a, &s) in self.eigen.basis.iter().enumerate() {
            state[s] = block[a];
        }
        state
    }

    /// `e^{-iHt}` applied to the expanded state.
    pub fn state_at(&self, t: f64) -> Vec<Complex64> {
        self.combine(self.coeffs.iter().enumerate().map(|(n, &c)| {
            (n, c * Complex64::from_polar(1.0, -self.eigen.energies[n] * t))
        }))
    }

    /// Infinite-time average: coherences inside degenerate levels are kept.
    pub fn diagonal_ensemble(&self) -> Observables {
        let energies = &self.eigen.energies;
        let mut total = Observables { mz: 0.0, sxx: 0.0 };
        let mut start = 0;
        while start < energies.len() {
            let mut end = start + 1;
            while end < energies.len()
                && energies[end] - energies[start] <= DEGENERACY_TOL * energies[start].abs().max(1.0)
            {
                end += 1;
            }
            let level = self.combine((start..end).map(|n| (n, self.coeffs[n])));
            let o = state_observables(&level, self.n_sites);
            total.mz += o.mz;
            total.sxx += o.sxx;
            start = end;
        }
        total
    }
}

/// Propagates `initial` under `first`, switching to `second.0` at `second.1`.
pub fn evolve_observables(
    initial: &GroundState,
    first: &DenseSpinSystem,
    second: Option<(&DenseSpinSystem, f64)>,
    times: &[f64],
) -> Result<TimeSeries> {
    check_times(times)?;
    let leg1 = SpectralDecomposition::new(first, initial.parity, &initial.state)?;
    let leg2 = match second {
        Some((system, dwell)) => {
            if system.n_sites != first.n_sites {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: system.dim(),
                });
            }
            if !(dwell >= 0.0) {
                return Err(Error::NegativeDwell(dwell));
            }
            Some((SpectralDecomposition::new(system, initial.parity, &leg1.state_at(dwell))?, dwell))
        }
        None => None,
    };
    let values = times
        .iter()
        .map(|&t| {
            let state = match &leg2 {
                Some((d, dwell)) if t >= *dwell => d.state_at(t - dwell),
                _ => leg1.state_at(t),
            };
            state_observables(&state, first.n_sites)
        })
        .collect();
    Ok(TimeSeries::from_points(times, values))
}

/// `|⟨a|b⟩|`.
pub fn overlap(a: &GroundState, b: &GroundState) -> Result<f64> {
    if a.state.len() != b.state.len() {
        return Err(Error::DimensionMismatch {
            expected: a.state.len(),
            found: b.state.len(),
        });
    }
    Ok(a.state
        .iter()
        .zip(&b.state)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Long-time `M_z` after a quench to infinite field, from the per-state
/// probability `p_n` of a configuration with `n` flipped spins.
pub fn zeeman_limit_mz(n_sites: usize, profile: &[f64]) -> Result<f64> {
    if n_sites == 0 {
        return Err(Error::SiteCountOutOfRange(0));
    }
    if profile.len() != n_sites + 1 {
        return Err(Error::DimensionMismatch {
            expected: n_sites + 1,
            found: profile.len(),
        });
    }
    let norm: f64 = profile
        .iter()
        .enumerate()
        .map(|(n, p)| binomial(n_sites, n) * p)
        .sum();
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(Error::BadNormalization(norm));
    }
    // pair n with N - n so that symmetric profiles cancel exactly
    Ok((0..(n_sites + 1) / 2)
        .map(|n| {
            let weight = (n_sites - 2 * n) as f64 / n_sites as f64;
            weight * binomial(n_sites, n) * (profile[n] - profile[n_sites - n])
        })
        .sum())
}
