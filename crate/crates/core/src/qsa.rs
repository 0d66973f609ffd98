//! Quantum simulated annealing: a ladder of coherent thermal states at
//! `β_j = (j/d)·β` joined by projective measurements in the walk eigenbasis.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::math;
use crate::metropolis::{build_chain, gibbs_distribution, ChainOptions};
use crate::numerics::{
    matrix_exponential_hermitian, reduced_density_matrix, state_fidelity, trace_distance, ComplexMatrix, StateVector,
    Tolerances, C64,
};
use crate::pea::{pea_projective_step, PeaConfig};
use crate::spectral::{EigenSystem, KickModel};
use crate::walk::{WalkOperator, WalkOptions, WalkSpace};

/// Linear schedule `β_j = (j/d)·β_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    beta_final: f64,
    steps: usize,
    h2_bound: f64,
}

impl AnnealSchedule {
    pub fn new(beta_final: f64, steps: usize, h2_bound: f64) -> Result<Self> {
        if !(beta_final >= 0.0 && beta_final.is_finite()) {
            return Err(Error::InvalidParameter("beta must be finite and non-negative"));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one step"));
        }
        if !(h2_bound >= 0.0 && h2_bound.is_finite()) {
            return Err(Error::InvalidParameter("second moment must be finite and non-negative"));
        }
        Ok(Self {
            beta_final,
            steps,
            h2_bound,
        })
    }

    /// Uses `⟨H²⟩₀ = Tr(H²)/N` of `h`.
    pub fn for_hamiltonian(h: &Hamiltonian, beta_final: f64, steps: usize) -> Result<Self> {
        Self::new(beta_final, steps, h.second_moment())
    }

    pub fn beta_final(&self) -> f64 {
        self.beta_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h2_bound(&self) -> f64 {
        self.h2_bound
    }

    pub fn delta_beta(&self) -> f64 {
        self.beta_final / self.steps as f64
    }

    pub fn beta(&self, j: usize) -> f64 {
        if j == self.steps {
            self.beta_final
        } else {
            self.beta_final * j as f64 / self.steps as f64
        }
    }

    /// `β_0, …, β_d`.
    pub fn betas(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.beta(j)).collect()
    }

    /// `ε = β²⟨H²⟩₀/d`, the total error scale.
    pub fn predicted_error(&self) -> f64 {
        self.beta_final * self.beta_final * self.h2_bound / self.steps as f64
    }
}

/// `Σ_i (e^{−βE_i}/Z)^{1/2} |i⟩` in the walk space.
pub fn cets_exact(space: &WalkSpace, system: &EigenSystem, beta: f64) -> StateVector {
    let basis = space.paired_basis(system);
    let coeffs: Vec<C64> = gibbs_distribution(system.energies(), beta)
        .into_iter()
        .map(|p| C64::new(math::sqrt(p), 0.0))
        .collect();
    space.embed(&basis, &coeffs)
}

/// `Σ_i √π_i |φ_i⟩|φ̃_i⟩` on the two system registers only.
fn paired_thermal_vector(system: &EigenSystem, beta: f64) -> Vec<C64> {
    let n = system.dim();
    let v = system.vectors();
    let p = gibbs_distribution(system.energies(), beta);
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for (i, &pi) in p.iter().enumerate() {
        let a = math::sqrt(pi);
        for x in 0..n {
            for y in 0..n {
                out[x * n + y] += v[(x, i)] * v[(y, i)].conj() * a;
            }
        }
    }
    out
}

/// `|⟨α₀^j|e^{−ΔβH/2}|α₀^j⟩|² / ⟨α₀^j|e^{−ΔβH}|α₀^j⟩`, with `H` acting on register 1.
pub fn step_overlap(system: &EigenSystem, beta_j: f64, delta_beta: f64, tol: &Tolerances) -> Result<f64> {
    if delta_beta == 0.0 {
        return Ok(1.0);
    }
    let n = system.dim();
    let v = system.vectors();
    let h = v.matmul(&ComplexMatrix::diagonal(system.energies())).matmul(&v.adjoint()).hermitian_part();
    let half = matrix_exponential_hermitian(&h, -0.5 * delta_beta, tol)?;
    let full = matrix_exponential_hermitian(&h, -delta_beta, tol)?;
    let alpha = paired_thermal_vector(system, beta_j);
    let expect = |op: &ComplexMatrix| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..n {
            for y in 0..n {
                let a = alpha[x * n + y];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for x2 in 0..n {
                    acc += alpha[x2 * n + y].conj() * op[(x2, x)] * a;
                }
            }
        }
        acc
    };
    let num = expect(&half).norm_sqr();
    let den = expect(&full).re;
    Ok(num / den)
}

/// `(Σ_i √(π_i^j π_i^{j+1}))²`.
pub fn step_overlap_direct(energies: &[f64], beta_j: f64, delta_beta: f64) -> f64 {
    let a = gibbs_distribution(energies, beta_j);
    let b = gibbs_distribution(energies, beta_j + delta_beta);
    let s: f64 = a.iter().zip(&b).map(|(x, y)| math::sqrt(x * y)).sum();
    s * s
}

/// Result of a measurement in the eigenbasis of the restricted walk operator.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub probabilities: Vec<f64>,
    pub state: StateVector,
}

/// Measurement frame: chain eigenvalues in descending order with the paired-basis
/// coordinates of `|α_k⟩`.
pub(crate) fn descending_frame(walk: &WalkOperator) -> (Vec<f64>, Vec<Vec<C64>>) {
    let eig = walk.restricted_eigen();
    let values = eig.values.iter().rev().copied().collect();
    let vectors = eig.vectors.iter().rev().cloned().collect();
    (values, vectors)
}

/// Groups consecutive (descending) eigenvalues closer than `threshold`.
pub fn outcome_clusters(values: &[f64], threshold: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (values[*c.last().unwrap()] - v).abs() < threshold => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    clusters
}

/// Exact-mode Kraus weights: outcome `b` projects onto cluster `b`.
pub(crate) fn projector_weights(clusters: &[Vec<usize>], n: usize) -> Vec<Vec<f64>> {
    clusters
        .iter()
        .map(|c| {
            let mut w = vec![0.0; n];
            for &k in c {
                w[k] = 1.0;
            }
            w
        })
        .collect()
}

/// Paired-basis coordinates of `state`, failing if it carries weight outside the span.
fn checked_coordinates(walk: &WalkOperator, state: &StateVector, tol: &Tolerances) -> Result<Vec<C64>> {
    let coords = walk.coordinates(state);
    let inside: f64 = coords.iter().map(|z| z.norm_sqr()).sum();
    let leakage = math::sqrt((state.norm_sqr() - inside).max(0.0));
    if leakage > tol.norm_loss {
        return Err(Error::NormLoss { leakage });
    }
    Ok(coords)
}

/// Measurement with diagonal Kraus operators `A_b = Σ_k √w_bk |α_k⟩⟨α_k|`; `outcome`
/// forces the result instead of sampling.
pub(crate) fn kraus_measure<R: Rng + ?Sized>(
    walk: &WalkOperator,
    state: &StateVector,
    weights: &[Vec<f64>],
    forced: Option<usize>,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Measurement> {
    let coords = checked_coordinates(walk, state, tol)?;
    let (_, vectors) = descending_frame(walk);
    let amps: Vec<C64> = vectors
        .iter()
        .map(|v| v.iter().zip(&coords).map(|(a, b)| a.conj() * b).sum())
        .collect();
    let mut probabilities: Vec<f64> = weights
        .iter()
        .map(|w| w.iter().zip(&amps).map(|(w, a)| w * a.norm_sqr()).sum())
        .collect();
    let total: f64 = probabilities.iter().sum();
    for p in probabilities.iter_mut() {
        *p /= total;
    }
    let outcome = match forced {
        Some(b) => b,
        None => {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = None;
            for (b, &p) in probabilities.iter().enumerate() {
                acc += p;
                if r < acc {
                    chosen = Some(b);
                    break;
                }
            }
            chosen.unwrap_or_else(|| probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0))
        }
    };
    let p = probabilities[outcome];
    if p <= 0.0 {
        return Err(Error::InvalidParameter("measurement outcome has zero probability"));
    }
    let n = coords.len();
    let mut post = vec![C64::new(0.0, 0.0); n];
    for ((v, a), &w) in vectors.iter().zip(&amps).zip(&weights[outcome]) {
        if w == 0.0 {
            continue;
        }
        let c = a * (math::sqrt(w) / math::sqrt(p * total));
        for (o, x) in post.iter_mut().zip(v) {
            *o += x * c;
        }
    }
    Ok(Measurement {
        outcome,
        probabilities,
        state: walk.embed(&post),
    })
}

/// Projective measurement of `Π_k = Σ|α_k⟩⟨α_k|` for the walk at the next temperature.
/// Outcome 0 is the `λ = 1` eigenspace.
pub fn projective_step<R: Rng + ?Sized>(
    state: &StateVector,
    walk_next: &WalkOperator,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Measurement> {
    let (values, _) = descending_frame(walk_next);
    let clusters = outcome_clusters(&values, tol.degenerate_cluster);
    let weights = projector_weights(&clusters, values.len());
    kraus_measure(walk_next, state, &weights, None, rng, tol)
}

/// Outcome-0 projection with its Born probability, without sampling.
pub fn post_select_zero(state: &StateVector, walk_next: &WalkOperator, tol: &Tolerances) -> Result<Measurement> {
    let (values, _) = descending_frame(walk_next);
    let clusters = outcome_clusters(&values, tol.degenerate_cluster);
    let weights = projector_weights(&clusters, values.len());
    kraus_measure(walk_next, state, &weights, Some(0), &mut NoRng, tol)
}

/// Never consulted; stands in for the generator when the outcome is forced.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        0
    }
    fn next_u64(&mut self) -> u64 {
        0
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        dest.fill(0);
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> core::result::Result<(), rand::Error> {
        dest.fill(0);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementMode {
    Exact,
    Pea(PeaConfig),
}

/// What to do after a nonzero outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomePolicy {
    Abort,
    /// Measure in the previous eigenbasis, then re-measure in the current one, until
    /// outcome 0 appears or the retry limit is hit.
    RetryStep,
    AcceptAndContinue,
    /// Force outcome 0 and track its probability.
    PostSelect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealOptions {
    pub mode: MeasurementMode,
    pub policy: OutcomePolicy,
    pub max_retries: usize,
    pub chain: ChainOptions,
    pub walk: WalkOptions,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self {
            mode: MeasurementMode::Exact,
            policy: OutcomePolicy::RetryStep,
            max_retries: 64,
            chain: ChainOptions::default(),
            walk: WalkOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// `j` in `1..=d`; the state is measured against the walk at `β_j`.
    pub step: usize,
    pub beta: f64,
    /// `|⟨α₀^j|α₀^{j−1}⟩|²` from the ratio formula.
    pub overlap_sq: f64,
    pub outcome: usize,
    /// Born probability of outcome 0 on the first measurement of the step.
    pub success_probability: f64,
    pub cum_success: f64,
    pub fidelity_to_exact: f64,
    pub delta_min: f64,
    pub cw_budget: u64,
    pub retries: usize,
}

#[derive(Debug, Clone)]
pub struct AnnealTrace {
    pub schedule: AnnealSchedule,
    pub steps: Vec<StepRecord>,
    pub final_state: StateVector,
    /// `|⟨α₀^d|ψ_final⟩|²`.
    pub final_fidelity: f64,
    /// Distance of the register-1 marginal from `e^{−βH}/Z`.
    pub final_trace_distance: f64,
    pub final_gibbs_fidelity: f64,
    /// `Π_j p_0^{(j)}`.
    pub cum_success: f64,
    pub predicted_error: f64,
    pub controlled_w_total: u64,
    pub retries: usize,
}

impl AnnealTrace {
    /// `1 − Π_j p_0^{(j)}`, the accumulated error of the measurement ladder.
    pub fn zeno_infidelity(&self) -> f64 {
        1.0 - self.cum_success
    }
}

/// `max(1, ⌈ln(1/ε₀)/Δ_min⌉)`.
pub fn step_budget(epsilon0: f64, delta_min: f64) -> u64 {
    let raw = math::ln(1.0 / epsilon0) / delta_min;
    if raw.is_finite() && raw > 1.0 {
        math::ceil(raw) as u64
    } else {
        1
    }
}

fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    walk: &WalkOperator,
    mode: &MeasurementMode,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Measurement> {
    match mode {
        MeasurementMode::Exact => projective_step(state, walk, rng, tol),
        MeasurementMode::Pea(config) => Ok(pea_projective_step(state, walk, config, rng, tol)?.measurement),
    }
}

fn outcome_zero_probability(state: &StateVector, walk: &WalkOperator, mode: &MeasurementMode, tol: &Tolerances) -> Result<Measurement> {
    match mode {
        MeasurementMode::Exact => post_select_zero(state, walk, tol),
        MeasurementMode::Pea(config) => Ok(crate::pea::pea_post_select_zero(state, walk, config, tol)?.measurement),
    }
}

/// Runs the ladder from `β = 0` to `schedule.beta_final()`.
pub fn run_annealing<R: Rng + ?Sized>(
    system: &EigenSystem,
    kick: &KickModel,
    schedule: &AnnealSchedule,
    options: &AnnealOptions,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<AnnealTrace> {
    let d = schedule.steps();
    let epsilon = schedule.predicted_error();
    let epsilon0 = epsilon / d as f64;
    let build = |beta: f64| -> Result<WalkOperator> {
        let chain = build_chain(system, kick, beta, options.chain, tol)?;
        WalkOperator::new(system, kick, &chain, options.walk, tol)
    };
    let mut previous = build(0.0)?;
    let mut state = previous.cets().clone();
    let mut steps = Vec::with_capacity(d);
    let mut cum_success = 1.0;
    let mut total_retries = 0;
    let mut cw_total = 0u64;
    for j in 1..=d {
        let beta = schedule.beta(j);
        let current = build(beta)?;
        let overlap_sq = step_overlap(system, schedule.beta(j - 1), beta - schedule.beta(j - 1), tol)?;
        let first = if options.policy == OutcomePolicy::PostSelect {
            outcome_zero_probability(&state, &current, &options.mode, tol)?
        } else {
            measure(&state, &current, &options.mode, rng, tol)?
        };
        let p0 = first.probabilities[0];
        cum_success *= p0;
        let mut outcome = first.outcome;
        state = first.state;
        let mut retries = 0;
        if outcome != 0 {
            match options.policy {
                OutcomePolicy::Abort => return Err(Error::AnnealAborted { step: j, outcome }),
                OutcomePolicy::AcceptAndContinue | OutcomePolicy::PostSelect => {}
                OutcomePolicy::RetryStep => {
                    while outcome != 0 {
                        if retries == options.max_retries {
                            return Err(Error::AnnealAborted { step: j, outcome });
                        }
                        retries += 1;
                        state = measure(&state, &previous, &options.mode, rng, tol)?.state;
                        let again = measure(&state, &current, &options.mode, rng, tol)?;
                        outcome = again.outcome;
                        state = again.state;
                    }
                }
            }
        }
        total_retries += retries;
        let fidelity_to_exact = current.cets().overlap_sqr(&state);
        let delta_min = current.delta_min();
        let cw_budget = step_budget(epsilon0, delta_min);
        cw_total += cw_budget;
        steps.push(StepRecord {
            step: j,
            beta,
            overlap_sq,
            outcome,
            success_probability: p0,
            cum_success,
            fidelity_to_exact,
            delta_min,
            cw_budget,
            retries,
        });
        previous = current;
    }
    let final_fidelity = previous.cets().overlap_sqr(&state);
    let dims = previous.space().dims();
    let rho = reduced_density_matrix(state.amplitudes(), &[0], &dims)?;
    let thermal = thermal_state(system, schedule.beta_final());
    Ok(AnnealTrace {
        schedule: *schedule,
        steps,
        final_fidelity,
        final_trace_distance: trace_distance(&rho, &thermal, tol)?,
        final_gibbs_fidelity: state_fidelity(&rho, &thermal, tol)?,
        final_state: state,
        cum_success,
        predicted_error: epsilon,
        controlled_w_total: cw_total,
        retries: total_retries,
    })
}

/// `Σ_i π_i |φ_i⟩⟨φ_i|`.
pub fn thermal_state(system: &EigenSystem, beta: f64) -> ComplexMatrix {
    let v = system.vectors();
    let p = gibbs_distribution(system.energies(), beta);
    v.matmul(&ComplexMatrix::diagonal(&p)).matmul(&v.adjoint())
}

/// `max(1, ⌈β²⟨H²⟩₀/ε⌉)`.
pub fn required_steps(beta: f64, h2_bound: f64, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1)"));
    }
    // Shave a relative 1e-12 so that representation error in ε (0.1 and friends)
    // does not push an exact integer ratio up by one.
    let raw = beta * beta * h2_bound / epsilon * (1.0 - 1e-12);
    Ok((math::ceil(raw) as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// `(b/(√δ ε))·ln(b/ε²)` with `b = β²⟨H²⟩₀`, at least 1.
    pub quantum: f64,
    /// `b/(δ ε)`.
    pub classical: f64,
}

impl Budget {
    pub fn ratio(&self) -> f64 {
        self.classical / self.quantum
    }
}

/// Controlled-`W` budget with all constants set to 1 and the natural logarithm.
pub fn controlled_w_budget(schedule: &AnnealSchedule, delta: f64, epsilon: f64) -> Result<Budget> {
    budget_from_moment(schedule.beta_final() * schedule.beta_final() * schedule.h2_bound(), delta, epsilon)
}

pub fn budget_from_moment(b: f64, delta: f64, epsilon: f64) -> Result<Budget> {
    if !(delta > 0.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("delta and epsilon must be positive"));
    }
    let quantum = b / (math::sqrt(delta) * epsilon) * math::ln(b / (epsilon * epsilon));
    Ok(Budget {
        quantum: if quantum.is_finite() { quantum.max(1.0) } else { 1.0 },
        classical: b / (delta * epsilon),
    })
}
