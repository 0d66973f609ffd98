//! Finite-resolution phase estimation: window `Δ = 2^{−a}`, misreport
//! probability `Δ²/|E_i − E_j|²` per run, repeated runs with a majority vote.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::hamiltonian::NormalizedSpectrum;
use crate::math;
use crate::numerics::{ComplexMatrix, StateVector, Tolerances, C64};
use crate::qsa::{descending_frame, kraus_measure, Measurement};
use crate::spectral::{EigenSystem, KickModel};
use crate::walk::WalkOperator;

pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeaConfig {
    bits: u32,
    repeats: u32,
    time: f64,
}

impl PeaConfig {
    pub fn new(bits: u32, repeats: u32) -> Result<Self> {
        if bits == 0 || bits > 52 {
            return Err(Error::InvalidParameter("phase estimation needs 1..=52 bits"));
        }
        if repeats == 0 {
            return Err(Error::InvalidParameter("phase estimation needs at least one run"));
        }
        Ok(Self {
            bits,
            repeats,
            time: 2.0 * core::f64::consts::PI,
        })
    }

    /// Evolution time `t` for `U = e^{−iHt}`; `2π` reads normalized energies as turns.
    pub fn with_time(mut self, time: f64) -> Result<Self> {
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::InvalidParameter("evolution time must be positive"));
        }
        self.time = time;
        Ok(self)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn repeats(&self) -> u32 {
        self.repeats
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `Δ = 2^{−a}`.
    pub fn window(&self) -> f64 {
        1.0 / math::powi(2.0, self.bits)
    }
}

/// `min(1, Δ²/|E_i − E_j|²)`; 1 for coincident energies.
pub fn pea_error_single(e_i: f64, e_j: f64, window: f64) -> f64 {
    let diff = (e_i - e_j).abs();
    if diff == 0.0 {
        return 1.0;
    }
    (window * window / (diff * diff)).min(1.0)
}

/// `ε^k` for `k` independent runs.
pub fn pea_error_repeated(single: f64, repeats: u32) -> f64 {
    math::powi(single, repeats)
}

/// Eigenphase of `U = e^{−iEt}` as a fraction of a turn in `[0, 1)`.
pub fn phase_fraction(energy: f64, time: f64) -> f64 {
    let turns = -energy * time / (2.0 * core::f64::consts::PI);
    let f = turns - math::floor(turns);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Single-linkage groups of sorted `values`: neighbours closer than `window` share a bin.
pub fn resolution_bins(values: &[f64], window: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for k in order {
        let v = values[k];
        match bins.last_mut() {
            Some(b) if v - last < window => b.push(k),
            _ => bins.push(vec![k]),
        }
        last = v;
    }
    bins
}

/// Outcome of a finite-resolution measurement of the walk.
#[derive(Debug, Clone)]
pub struct PeaMeasurement {
    pub measurement: Measurement,
    /// Chain eigenvector indices (descending eigenvalue) of each bin; bin 0 holds `λ = 1`.
    pub bins: Vec<Vec<usize>>,
    /// Probability that eigenvector `k` is reported as outcome 0.
    pub zero_weights: Vec<f64>,
}

/// `θ_k/π` for the `W` eigenphase `2θ_k`, `cos θ_k = λ_k`.
fn walk_phase_fractions(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&l| math::acos(l) / core::f64::consts::PI).collect()
}

fn pea_weights(walk: &WalkOperator, config: &PeaConfig) -> (Vec<Vec<usize>>, Vec<f64>, Vec<Vec<f64>>) {
    let (values, _) = descending_frame(walk);
    let fractions = walk_phase_fractions(&values);
    let window = config.window();
    let bins = resolution_bins(&fractions, window);
    let n = values.len();
    let mut zero = vec![0.0; n];
    for k in 0..n {
        zero[k] = if bins[0].contains(&k) {
            1.0
        } else {
            pea_error_repeated(pea_error_single(fractions[0], fractions[k], window), config.repeats)
        };
    }
    let mut weights = Vec::with_capacity(bins.len());
    weights.push(zero.clone());
    for bin in &bins[1..] {
        let mut w = vec![0.0; n];
        for &k in bin {
            w[k] = 1.0 - zero[k];
        }
        weights.push(w);
    }
    (bins, zero, weights)
}

/// Like [`crate::qsa::projective_step`], but eigenvectors outside the `λ = 1` bin
/// are reported as outcome 0 with the repeated misreport probability.
pub fn pea_projective_step<R: Rng + ?Sized>(
    state: &StateVector,
    walk_next: &WalkOperator,
    config: &PeaConfig,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<PeaMeasurement> {
    let (bins, zero_weights, weights) = pea_weights(walk_next, config);
    let measurement = kraus_measure(walk_next, state, &weights, None, rng, tol)?;
    Ok(PeaMeasurement {
        measurement,
        bins,
        zero_weights,
    })
}

pub fn pea_post_select_zero(
    state: &StateVector,
    walk_next: &WalkOperator,
    config: &PeaConfig,
    tol: &Tolerances,
) -> Result<PeaMeasurement> {
    let (bins, zero_weights, weights) = pea_weights(walk_next, config);
    let mut rng = rand_chacha::ChaCha8Rng::from_seed([0; 32]);
    let measurement = kraus_measure(walk_next, state, &weights, Some(0), &mut rng, tol)?;
    Ok(PeaMeasurement {
        measurement,
        bins,
        zero_weights,
    })
}

/// Per-state leakage through finite energy resolution.
#[derive(Debug, Clone)]
pub struct LeakageReport {
    pub window: f64,
    pub threshold: f64,
    /// Energies mapped into `(0, 1)`.
    pub normalized_energies: Vec<f64>,
    /// `η_i = Σ'_k s_ik` over `k ≠ i` with `|Ẽ_i − Ẽ_k| < Δ`. A kick back onto `i`
    /// stays inside the paired span, so it is not leakage.
    pub eta: Vec<f64>,
    /// `Ω_i = (1/L) Σ_λ |⟨φ̃_i|K_λ† H̃ K_λ|φ̃_i⟩ − ⟨φ̃_i|H̃|φ̃_i⟩|`, physical units.
    pub omega: Vec<f64>,
}

impl LeakageReport {
    pub fn max_eta(&self) -> f64 {
        self.eta.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_eta(&self) -> f64 {
        if self.eta.is_empty() {
            0.0
        } else {
            self.eta.iter().sum::<f64>() / self.eta.len() as f64
        }
    }

    /// States whose `η_i` exceeds the threshold.
    pub fn flagged(&self) -> Vec<usize> {
        (0..self.eta.len()).filter(|&i| self.eta[i] > self.threshold).collect()
    }

    pub fn passes(&self) -> bool {
        self.max_eta() < self.threshold
    }
}

pub fn leakage_analysis(
    system: &EigenSystem,
    kick: &KickModel,
    window: f64,
    margin: f64,
    threshold: f64,
) -> Result<LeakageReport> {
    if !(window > 0.0) {
        return Err(Error::InvalidParameter("leakage window must be positive"));
    }
    let spectrum = NormalizedSpectrum::from_energies(system.energies(), margin)?;
    let normalized = spectrum.map_all(system.energies());
    let s = kick.transition_table();
    let n = system.dim();
    let eta = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&k| k != i && (normalized[i] - normalized[k]).abs() < window)
                .fold(0.0, |acc, k| acc + s[(i, k)])
                .min(1.0)
        })
        .collect();
    let v_tilde = system.conjugate_vectors();
    let h_tilde = v_tilde
        .matmul(&ComplexMatrix::diagonal(system.energies()))
        .matmul(&v_tilde.adjoint());
    let labels = kick.labels() as f64;
    let omega = (0..n)
        .map(|i| {
            let phi = v_tilde.column(i);
            let before = expectation(&h_tilde, &phi);
            kick.operators()
                .iter()
                .map(|k| (expectation(&h_tilde, &k.apply(&phi)) - before).abs())
                .sum::<f64>()
                / labels
        })
        .collect();
    Ok(LeakageReport {
        window,
        threshold,
        normalized_energies: normalized,
        eta,
        omega,
    })
}

fn expectation(m: &ComplexMatrix, v: &[C64]) -> f64 {
    m.apply(v).iter().zip(v).map(|(a, b)| (b.conj() * a).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ising, build_transverse_ising, Hamiltonian};
    use crate::metropolis::{build_chain, ChainOptions};
    use crate::spectral::{build_kick, KickKind};
    use crate::walk::WalkOptions;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn window_is_a_power_of_two() {
        assert_eq!(PeaConfig::new(3, 1).unwrap().window(), 0.125);
        assert_eq!(PeaConfig::new(8, 1).unwrap().window(), 1.0 / 256.0);
        assert!(PeaConfig::new(0, 1).is_err());
        assert!(PeaConfig::new(4, 0).is_err());
    }

    #[test]
    fn error_examples() {
        assert!((pea_error_single(0.5, 0.25, 1.0 / 16.0) - 0.0625).abs() < 1e-15);
        assert_eq!(pea_error_single(0.5, 0.5, 0.1), 1.0);
        assert_eq!(pea_error_single(0.5, 0.51, 0.1), 1.0);
        assert!((pea_error_repeated(0.0625, 3) - 0.000244140625).abs() < 1e-18);
    }

    #[test]
    fn bins_link_neighbours() {
        let bins = resolution_bins(&[0.0, 0.3, 0.05, 0.32, 0.9], 0.1);
        assert_eq!(bins, vec![vec![0, 2], vec![1, 3], vec![4]]);
    }

    #[test]
    fn phase_fractions_wrap() {
        assert!((phase_fraction(0.25, 2.0 * core::f64::consts::PI) - 0.75).abs() < 1e-15);
        assert_eq!(phase_fraction(0.0, 1.0), 0.0);
    }

    #[test]
    fn open_ising_site_flip_has_no_leakage() {
        // Every flip of qubit 0 on an open chain changes the energy by ±2J.
        let h = build_ising(3, 1.0, false).unwrap();
        let s = EigenSystem::new(&h, &tol()).unwrap();
        let k = build_kick(&s, KickKind::SpinFlip { site: 0 }, &tol()).unwrap();
        let report = leakage_analysis(&s, &k, 1.0 / 256.0, 0.1, 0.1).unwrap();
        assert!(report.eta.iter().all(|&e| e == 0.0));
        assert!(report.omega.iter().all(|&o| (o - 2.0).abs() < 1e-12));
        assert!(report.passes());
    }

    #[test]
    fn flat_spectrum_leaks_everything() {
        let h = Hamiltonian::diagonal(&[1.0; 4], "flat").unwrap();
        let s = EigenSystem::new(&h, &tol()).unwrap();
        let k = build_kick(&s, KickKind::UniformSpinFlips, &tol()).unwrap();
        let report = leakage_analysis(&s, &k, 1e-3, 0.1, 0.1).unwrap();
        // Flips never return to the same basis state of a diagonal model.
        assert!(report.eta.iter().all(|&e| (e - 1.0).abs() < 1e-12));
        assert_eq!(report.flagged(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn pea_reduces_to_projective_with_fine_window() {
        let h = build_transverse_ising(2, 1.0, 0.5, false).unwrap();
        let s = EigenSystem::new(&h, &tol()).unwrap();
        let k = build_kick(&s, KickKind::UniformFlipsXZ, &tol()).unwrap();
        let prev = build_chain(&s, &k, 0.5, ChainOptions::default(), &tol()).unwrap();
        let next = build_chain(&s, &k, 1.0, ChainOptions::default(), &tol()).unwrap();
        let wp = WalkOperator::new(&s, &k, &prev, WalkOptions::default(), &tol()).unwrap();
        let wn = WalkOperator::new(&s, &k, &next, WalkOptions::default(), &tol()).unwrap();
        let exact = crate::qsa::post_select_zero(wp.cets(), &wn, &tol()).unwrap();
        let config = PeaConfig::new(20, 2).unwrap();
        let pea = pea_post_select_zero(wp.cets(), &wn, &config, &tol()).unwrap();
        assert!((exact.probabilities[0] - pea.measurement.probabilities[0]).abs() < 1e-12);
        let coarse = pea_post_select_zero(wp.cets(), &wn, &PeaConfig::new(1, 1).unwrap(), &tol()).unwrap();
        assert!(coarse.measurement.probabilities[0] >= exact.probabilities[0] - 1e-12);
    }
}
