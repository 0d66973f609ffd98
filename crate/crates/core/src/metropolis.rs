//! Classical Metropolis chain over the eigenstates of `H`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::numerics::{symmetric_eigenvalues, ComplexMatrix, RealMatrix, Tolerances, C64};
use crate::spectral::{EigenSystem, KickModel};

/// `min{1, e^{−β(E_j − E_i)}}`, the acceptance of a move from `i` to `j`.
pub fn metropolis_filter(e_i: f64, e_j: f64, beta: f64) -> f64 {
    let de = e_j - e_i;
    if de <= 0.0 || beta == 0.0 {
        1.0
    } else {
        math::exp(-beta * de)
    }
}

/// Normalised Boltzmann weights, evaluated relative to the ground energy so that
/// large `β` does not underflow the partition function.
pub fn gibbs_distribution(energies: &[f64], beta: f64) -> Vec<f64> {
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|&e| math::exp(-beta * (e - e_min))).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainOptions {
    /// Replace `M` by `(M + I)/2`. Not part of the original construction; it only
    /// makes every eigenvalue non-negative.
    pub lazy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainWarning {
    NegativeEigenvalue { index: usize, value: f64 },
}

#[derive(Debug, Clone)]
pub struct MetropolisChain {
    beta: f64,
    energies: Vec<f64>,
    stationary: Vec<f64>,
    transition: RealMatrix,
    symmetrized: RealMatrix,
    eigenvalues: Vec<f64>,
    warnings: Vec<ChainWarning>,
    lazy: bool,
}

impl MetropolisChain {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `π_i = e^{−βE_i}/Z`.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Row-stochastic, `transition()[(i, j)] = m_ij` is the probability of `i → j`.
    pub fn transition(&self) -> &RealMatrix {
        &self.transition
    }

    /// `D^{1/2} M D^{−1/2}` with `D = diag(π)`, built entrywise from the acceptance
    /// ratios so that no `π_i/π_j` ratio is formed.
    pub fn symmetrized(&self) -> &RealMatrix {
        &self.symmetrized
    }

    /// Descending; `eigenvalues()[0] = 1`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn warnings(&self) -> &[ChainWarning] {
        &self.warnings
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    /// `max_ij |π_i m_ij − π_j m_ji|`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let a = self.stationary[i] * self.transition[(i, j)];
                let b = self.stationary[j] * self.transition[(j, i)];
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    /// `max_i |Σ_j m_ij − 1|`.
    pub fn row_sum_deviation(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.transition.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_j |(πM)_j − π_j|`.
    pub fn stationarity_residual(&self) -> f64 {
        let evolved = self.transition.left_apply(&self.stationary);
        evolved
            .iter()
            .zip(&self.stationary)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn build_chain(
    system: &EigenSystem,
    kick: &KickModel,
    beta: f64,
    options: ChainOptions,
    tol: &Tolerances,
) -> Result<MetropolisChain> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter("beta must be finite and non-negative"));
    }
    let e = system.energies();
    let s = kick.transition_table();
    let n = e.len();
    let mut m = RealMatrix::zeros(n);
    let mut sym = RealMatrix::zeros(n);
    for i in 0..n {
        let mut stay = s[(i, i)];
        for k in 0..n {
            if k == i {
                continue;
            }
            let z = metropolis_filter(e[i], e[k], beta);
            m[(i, k)] = s[(i, k)] * z;
            stay += s[(i, k)] * (1.0 - z);
            // √(z_ik z_ki) = e^{−β|E_k − E_i|/2}
            sym[(i, k)] = 0.5 * (s[(i, k)] + s[(k, i)]) * math::exp(-0.5 * beta * (e[k] - e[i]).abs());
        }
        m[(i, i)] = stay;
        sym[(i, i)] = stay;
    }
    if options.lazy {
        for i in 0..n {
            for k in 0..n {
                let id = if i == k { 1.0 } else { 0.0 };
                m[(i, k)] = 0.5 * (m[(i, k)] + id);
                sym[(i, k)] = 0.5 * (sym[(i, k)] + id);
            }
        }
    }
    let mut eigenvalues = symmetric_eigenvalues(&sym.to_complex(), tol)?;
    eigenvalues.reverse();
    let warnings = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= 0.0)
        .map(|(index, &value)| ChainWarning::NegativeEigenvalue { index, value })
        .collect();
    Ok(MetropolisChain {
        beta,
        energies: e.to_vec(),
        stationary: gibbs_distribution(e, beta),
        transition: m,
        symmetrized: sym,
        eigenvalues,
        warnings,
        lazy: options.lazy,
    })
}

/// `δ = 1 − λ₁`.
pub fn classical_gap(chain: &MetropolisChain, tol: &Tolerances) -> Result<f64> {
    let lambda1 = chain.eigenvalues.get(1).copied().unwrap_or(1.0);
    if lambda1 >= 1.0 - tol.disconnected {
        return Err(Error::DisconnectedChain { lambda1 });
    }
    Ok(1.0 - lambda1)
}

/// `1/δ`, the constant-free mixing-time scale.
pub fn mixing_time_estimate(chain: &MetropolisChain, tol: &Tolerances) -> Result<f64> {
    Ok(1.0 / classical_gap(chain, tol)?)
}

/// `M` as a complex matrix, for callers that compare it with walk-space operators.
pub fn transition_as_complex(chain: &MetropolisChain) -> ComplexMatrix {
    ComplexMatrix::from_fn(chain.dim(), chain.dim(), |r, c| C64::new(chain.transition[(r, c)], 0.0))
}
