//! The quantum walk operator `W = (2Λ₂ − I)(2Λ₁ − I)` built from the Metropolis
//! isometries `U_X` and `U_Y`.
//!
//! The walk space is `reg1 (N) ⊗ reg2 (N) ⊗ ancilla (2) ⊗ label (L)`, register 0 most
//! significant. The label register holds a coherent copy of the kick choice so that a
//! mixture of `L` kicks is still applied by a single unitary; with one kick `L = 1` and
//! the space is the plain `2N²`-dimensional one.
//!
//! The paired states `|i⟩ = |φ_i⟩|φ̃_i⟩|0⟩|0⟩` span the range of `Λ₁`; `B` denotes the
//! `D × N` matrix whose columns are these states.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonian::MAX_QUBITS;
use crate::math;
use crate::metropolis::{classical_gap, metropolis_filter, MetropolisChain};
use crate::numerics::{
    eigh_symmetrized, unitary_eigendecomposition, ComplexMatrix, HermitianEigen, StateVector, Tolerances, C64, MAX_DIM,
};
use crate::spectral::{EigenSystem, KickModel};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest qubit count accepted without [`WalkOptions::allow_large`].
pub const DEFAULT_MAX_WALK_QUBITS: usize = 4;

/// Columns whose residual falls below this after orthogonalisation are dropped when
/// forming the span of `B` and `PB`.
const RANK_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkOptions {
    pub allow_large: bool,
}

/// Register layout and the weighted kick ensemble addressed by the label register.
#[derive(Debug, Clone)]
pub struct WalkSpace {
    n: usize,
    register: usize,
    labels: Vec<(f64, ComplexMatrix)>,
    lazy: bool,
}

impl WalkSpace {
    /// Label weights are `1/L` for each kick; a lazy chain adds a label with weight
    /// `1/2` holding `V Vᵀ`, which maps `|φ̃_i⟩` to `|φ_i⟩` and so leaves the state put.
    pub fn new(system: &EigenSystem, kick: &KickModel, lazy: bool, options: WalkOptions) -> Result<Self> {
        let n = system.n_qubits();
        if n > MAX_QUBITS || (n > DEFAULT_MAX_WALK_QUBITS && !options.allow_large) {
            let max = if options.allow_large {
                MAX_QUBITS
            } else {
                DEFAULT_MAX_WALK_QUBITS
            };
            return Err(Error::SizeOutOfRange { n, max });
        }
        let register = system.dim();
        let kicks = kick.operators();
        let mut labels = Vec::with_capacity(kicks.len() + 1);
        let share = if lazy { 0.5 } else { 1.0 } / kicks.len() as f64;
        if lazy {
            let v = system.vectors();
            labels.push((0.5, v.matmul(&v.transpose())));
        }
        labels.extend(kicks.iter().map(|k| (share, k.clone())));
        let space = Self {
            n,
            register,
            labels,
            lazy,
        };
        if space.dim() > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                dim: space.dim(),
                max: MAX_DIM,
            });
        }
        Ok(space)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// `N = 2ⁿ`.
    pub fn register_dim(&self) -> usize {
        self.register
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    /// `2 N² L`.
    pub fn dim(&self) -> usize {
        2 * self.register * self.register * self.labels.len()
    }

    /// Register dimensions `[N, N, 2, L]`.
    pub fn dims(&self) -> [usize; 4] {
        [self.register, self.register, 2, self.labels.len()]
    }

    #[inline]
    pub fn index(&self, r1: usize, r2: usize, ancilla: usize, label: usize) -> usize {
        ((r1 * self.register + r2) * 2 + ancilla) * self.labels.len() + label
    }

    /// The columns `|i⟩ = |φ_i⟩|φ̃_i⟩|0⟩|0⟩`.
    pub fn paired_basis(&self, system: &EigenSystem) -> ComplexMatrix {
        let n = self.register;
        let v = system.vectors();
        let mut b = ComplexMatrix::zeros(self.dim(), n);
        for i in 0..n {
            for x in 0..n {
                for y in 0..n {
                    b[(self.index(x, y, 0, 0), i)] = v[(x, i)] * v[(y, i)].conj();
                }
            }
        }
        b
    }

    /// Embeds `Σ_i c_i |i⟩`.
    pub fn embed(&self, basis: &ComplexMatrix, coefficients: &[C64]) -> StateVector {
        StateVector::new(basis.apply(coefficients))
    }

    fn label_preparation(&self, fourier: bool) -> ComplexMatrix {
        let l = self.labels.len();
        if fourier && self.labels.iter().all(|(w, _)| (w - self.labels[0].0).abs() < 1e-15) {
            let s = 1.0 / math::sqrt(l as f64);
            return ComplexMatrix::from_fn(l, l, |r, c| {
                let angle = 2.0 * PI * (r * c) as f64 / l as f64;
                C64::new(s * libm::cos(angle), s * libm::sin(angle))
            });
        }
        // Householder reflection sending e₀ to f = (√w_λ).
        let f: Vec<f64> = self.labels.iter().map(|(w, _)| math::sqrt(*w)).collect();
        let mut u: Vec<f64> = f.iter().map(|x| -x).collect();
        u[0] += 1.0;
        let norm_sqr: f64 = u.iter().map(|x| x * x).sum();
        if norm_sqr < 1e-30 {
            return ComplexMatrix::identity(l);
        }
        ComplexMatrix::from_fn(l, l, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            C64::new(id - 2.0 * u[r] * u[c] / norm_sqr, 0.0)
        })
    }
}

/// How the parts of `U_X` that never act on `Λ₁`'s range are filled in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    /// Extra phase on the image of the ancilla-`|1⟩` input branch of the rotation.
    pub branch_phase: f64,
    /// Prepare the label register with a discrete Fourier transform instead of a
    /// Householder reflection (equal weights only).
    pub fourier_labels: bool,
}

impl Default for Completion {
    fn default() -> Self {
        Self {
            branch_phase: 0.0,
            fourier_labels: false,
        }
    }
}

fn apply_controlled_kick(space: &WalkSpace, m: &ComplexMatrix) -> ComplexMatrix {
    let n = space.register;
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for (label, (_, k)) in space.labels.iter().enumerate() {
        for x in 0..n {
            for y in 0..n {
                let w = k[(x, y)];
                if w == ZERO {
                    continue;
                }
                for r1 in 0..n {
                    for b in 0..2 {
                        let dst = space.index(r1, x, b, label);
                        let src = space.index(r1, y, b, label);
                        for c in 0..m.cols() {
                            let v = m[(src, c)];
                            out[(dst, c)] += w * v;
                        }
                    }
                }
            }
        }
    }
    out
}

fn apply_rotation(space: &WalkSpace, energies: &[f64], beta: f64, branch_phase: f64, m: &mut ComplexMatrix) {
    let n = space.register;
    let phase = C64::new(libm::cos(branch_phase), libm::sin(branch_phase));
    for i in 0..n {
        for k in 0..n {
            let z = metropolis_filter(energies[i], energies[k], beta);
            let c = math::sqrt(z);
            let s = math::sqrt((1.0 - z).max(0.0));
            for label in 0..space.labels.len() {
                let a = space.index(i, k, 0, label);
                let b = space.index(i, k, 1, label);
                for col in 0..m.cols() {
                    let x0 = m[(a, col)];
                    let x1 = m[(b, col)] * phase;
                    m[(a, col)] = x0 * c - x1 * s;
                    m[(b, col)] = x0 * s + x1 * c;
                }
            }
        }
    }
}

/// `U_X = R · Kc · P`: label preparation, the controlled kick on register 2, then the
/// rotation of the ancilla by `√z_ik` in the eigen-product basis `|φ_i⟩|φ_k⟩`.
pub fn build_u_x(space: &WalkSpace, system: &EigenSystem, beta: f64) -> Result<ComplexMatrix> {
    build_u_x_with(space, system, beta, &Completion::default())
}

pub fn build_u_x_with(space: &WalkSpace, system: &EigenSystem, beta: f64, completion: &Completion) -> Result<ComplexMatrix> {
    let dims = space.dims();
    let prep = space.label_preparation(completion.fourier_labels);
    let mut u = ComplexMatrix::identity(space.dim()).apply_on_register(&prep, 3, &dims)?;
    u = apply_controlled_kick(space, &u);
    let v = system.vectors();
    let v_dag = v.adjoint();
    u = u.apply_on_register(&v_dag, 0, &dims)?.apply_on_register(&v_dag, 1, &dims)?;
    apply_rotation(space, system.energies(), beta, completion.branch_phase, &mut u);
    u.apply_on_register(v, 0, &dims)?.apply_on_register(v, 1, &dims)
}

/// `S₀`: swap registers 1 and 2 on the ancilla-`|0⟩` half, as a row permutation.
pub fn apply_s0(space: &WalkSpace, m: &ComplexMatrix) -> ComplexMatrix {
    let n = space.register;
    let mut out = m.clone();
    for r1 in 0..n {
        for r2 in 0..n {
            for label in 0..space.labels.len() {
                let dst = space.index(r1, r2, 0, label);
                let src = space.index(r2, r1, 0, label);
                out.row_mut(dst).copy_from_slice(m.row(src));
            }
        }
    }
    out
}

/// `U_Y = S₀ U_X`.
pub fn build_u_y(space: &WalkSpace, u_x: &ComplexMatrix) -> ComplexMatrix {
    apply_s0(space, u_x)
}

/// `Λ₁ = Σ_i |i⟩⟨i|`.
pub fn build_projector_lambda1(space: &WalkSpace, system: &EigenSystem) -> ComplexMatrix {
    let b = space.paired_basis(system);
    b.matmul(&b.adjoint())
}

/// Eigenphase of `W` assigned to a chain eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatch {
    pub lambda: f64,
    pub target: f64,
    pub phase: f64,
    pub distance: f64,
}

fn wrap(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

fn circle_distance(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

/// Assigns each walk eigenphase target to the nearest unused phase. Every chain
/// eigenvalue `λ` with `|λ| < 1` contributes the pair `±2 arccos λ`; `λ = ±1` contribute
/// the single phase `0`.
pub fn match_block_phases(phases: &[f64], chain_eigenvalues: &[f64], tol: &Tolerances) -> Result<Vec<PhaseMatch>> {
    let mut used = vec![false; phases.len()];
    let mut matches = Vec::new();
    for &lambda in chain_eigenvalues {
        let angle = 2.0 * math::acos(lambda);
        let targets: &[f64] = if (1.0 - lambda.abs()) < tol.degenerate_cluster {
            &[0.0]
        } else {
            &[angle, -angle]
        };
        for &target in targets {
            let best = phases
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, &p)| (k, circle_distance(p, target)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
            match best {
                Some((k, distance)) if distance <= tol.block_match => {
                    used[k] = true;
                    matches.push(PhaseMatch {
                        lambda,
                        target: wrap(target),
                        phase: phases[k],
                        distance,
                    });
                }
                other => {
                    return Err(Error::BlockMismatch {
                        lambda,
                        distance: other.map_or(f64::INFINITY, |(_, d)| d),
                    });
                }
            }
        }
    }
    Ok(matches)
}

/// Modified Gram–Schmidt, applied twice, keeping columns with a residual above
/// [`RANK_THRESHOLD`].
fn orthonormal_span(columns: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for col in columns {
        let mut v = col.clone();
        let start: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        for _ in 0..2 {
            for q in &basis {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm > RANK_THRESHOLD * math::sqrt(start).max(1.0) {
            for x in v.iter_mut() {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    basis
}

#[derive(Debug, Clone)]
pub struct WalkOperator {
    space: WalkSpace,
    beta: f64,
    u_x: ComplexMatrix,
    u_y: ComplexMatrix,
    w: ComplexMatrix,
    basis: ComplexMatrix,
    moved: ComplexMatrix,
    restricted: ComplexMatrix,
    restricted_eigen: HermitianEigen,
    theta: Vec<f64>,
    delta_min: f64,
    cets: StateVector,
    cets_coefficients: Vec<f64>,
    relevant_phases: Vec<f64>,
    matches: Vec<PhaseMatch>,
}

impl WalkOperator {
    /// Builds `U_X`, `U_Y` and `W` for the chain's `β` and checks the block structure
    /// against the chain spectrum.
    pub fn new(
        system: &EigenSystem,
        kick: &KickModel,
        chain: &MetropolisChain,
        options: WalkOptions,
        tol: &Tolerances,
    ) -> Result<Self> {
        let space = WalkSpace::new(system, kick, chain.is_lazy(), options)?;
        let u_x = build_u_x(&space, system, chain.beta())?;
        let u_y = build_u_y(&space, &u_x);
        build_walk(space, system, u_x, u_y, chain, tol)
    }

    pub fn space(&self) -> &WalkSpace {
        &self.space
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn u_x(&self) -> &ComplexMatrix {
        &self.u_x
    }

    pub fn u_y(&self) -> &ComplexMatrix {
        &self.u_y
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    /// `B`, columns `|i⟩`.
    pub fn paired_basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// `PB` with `P = U_X†U_Y`.
    pub fn moved_basis(&self) -> &ComplexMatrix {
        &self.moved
    }

    pub fn lambda1(&self) -> ComplexMatrix {
        self.basis.matmul(&self.basis.adjoint())
    }

    /// `Λ₂ = P Λ₁ P†`.
    pub fn lambda2(&self) -> ComplexMatrix {
        self.moved.matmul(&self.moved.adjoint())
    }

    /// `⟨j|U_X†U_Y|i⟩` at `(j, i)`.
    pub fn restricted(&self) -> &ComplexMatrix {
        &self.restricted
    }

    /// Eigendecomposition of [`Self::restricted`], ascending; eigenvectors are the
    /// coordinates of `|α_k⟩` in the paired basis.
    pub fn restricted_eigen(&self) -> &HermitianEigen {
        &self.restricted_eigen
    }

    /// `θ_k = arccos λ_k`, following the descending chain order.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `Δ_min = 2θ₁`.
    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    /// `|α₀⟩ = Σ_i √π_i |i⟩`.
    pub fn cets(&self) -> &StateVector {
        &self.cets
    }

    /// `√π_i`, the coordinates of [`Self::cets`] in the paired basis.
    pub fn cets_coefficients(&self) -> &[f64] {
        &self.cets_coefficients
    }

    /// Eigenphases of `W` on the span of `B` and `PB`, ascending in `(−π, π]`.
    pub fn eigenphases(&self) -> &[f64] {
        &self.relevant_phases
    }

    pub fn phase_matches(&self) -> &[PhaseMatch] {
        &self.matches
    }

    pub fn fixed_point_residual(&self) -> f64 {
        let w_cets = StateVector::new(self.w.apply(self.cets.amplitudes()));
        w_cets.distance(&self.cets)
    }

    /// Paired-basis coordinates `B†ψ`.
    pub fn coordinates(&self, state: &StateVector) -> Vec<C64> {
        let n = self.basis.cols();
        let mut out = vec![ZERO; n];
        for (r, &a) in state.amplitudes().iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.basis.row(r)) {
                *o += b.conj() * a;
            }
        }
        out
    }

    pub fn embed(&self, coefficients: &[C64]) -> StateVector {
        self.space.embed(&self.basis, coefficients)
    }
}

/// Assembles `W` from `U_X`, `U_Y` and the paired basis. The relevant eigenphases are
/// those of `W` compressed to the span of `B` and `PB`, which `W` leaves invariant.
pub fn build_walk(
    space: WalkSpace,
    system: &EigenSystem,
    u_x: ComplexMatrix,
    u_y: ComplexMatrix,
    chain: &MetropolisChain,
    tol: &Tolerances,
) -> Result<WalkOperator> {
    let d = space.dim();
    if u_x.rows() != d || u_y.rows() != d || chain.dim() != space.register_dim() {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u_x.rows(),
        });
    }
    let basis = space.paired_basis(system);
    let moved = u_x.adjoint_matmul(&u_y.matmul(&basis));
    let restricted = basis.adjoint_matmul(&moved);
    let overlap = moved.adjoint_matmul(&basis);

    // W = I − 2BB† − 2QQ† + 4Q(Q†B)B†, Q = PB.
    let b_adj = basis.adjoint();
    let mut w = ComplexMatrix::identity(d);
    w.add_scaled_assign(C64::new(-2.0, 0.0), &basis.matmul(&b_adj));
    w.add_scaled_assign(C64::new(-2.0, 0.0), &moved.matmul(&moved.adjoint()));
    w.add_scaled_assign(C64::new(4.0, 0.0), &moved.matmul(&overlap).matmul(&b_adj));

    let restricted_eigen = eigh_symmetrized(&restricted, tol)?;

    let lambdas = chain.eigenvalues();
    let theta: Vec<f64> = lambdas.iter().map(|&l| math::acos(l)).collect();
    let gap = classical_gap(chain, tol)?;
    let delta_min = 2.0 * math::acos(1.0 - gap);

    let cets_coefficients: Vec<f64> = chain.stationary().iter().map(|&p| math::sqrt(p)).collect();
    let coeffs: Vec<C64> = cets_coefficients.iter().map(|&c| C64::new(c, 0.0)).collect();
    let cets = space.embed(&basis, &coeffs);

    let mut columns: Vec<Vec<C64>> = (0..basis.cols()).map(|c| basis.column(c)).collect();
    columns.extend((0..moved.cols()).map(|c| moved.column(c)));
    let span = ComplexMatrix::from_columns(&orthonormal_span(&columns));
    let compressed = span.adjoint_matmul(&w.matmul(&span));
    let relevant_phases = unitary_eigendecomposition(&compressed, tol)?.phases;
    let matches = match_block_phases(&relevant_phases, &lambdas[1..], tol)?;

    Ok(WalkOperator {
        space,
        beta: chain.beta(),
        u_x,
        u_y,
        w,
        basis,
        moved,
        restricted,
        restricted_eigen,
        theta,
        delta_min,
        cets,
        cets_coefficients,
        relevant_phases,
        matches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub delta_min: f64,
    pub two_sqrt_delta: f64,
    /// `Δ_min / 2√δ`.
    pub ratio: f64,
    pub all_nonnegative: bool,
    pub pass: bool,
}

/// Compares the walk phase gap with twice the square root of the classical gap.
pub fn verify_gap_inequality(walk: &WalkOperator, chain: &MetropolisChain, tol: &Tolerances) -> Result<GapReport> {
    let delta = classical_gap(chain, tol)?;
    let two_sqrt_delta = 2.0 * math::sqrt(delta);
    let delta_min = walk.delta_min();
    Ok(GapReport {
        delta_min,
        two_sqrt_delta,
        ratio: delta_min / two_sqrt_delta,
        all_nonnegative: chain.eigenvalues().iter().all(|&l| l >= 0.0),
        pass: delta_min >= two_sqrt_delta - 1e-9,
    })
}

/// Max deviation between the sorted spectrum of `⟨j|U_X†U_Y|i⟩` and the chain's.
pub fn similarity_check(walk: &WalkOperator, chain: &MetropolisChain) -> f64 {
    let mut from_walk = walk.restricted_eigen.values.clone();
    from_walk.reverse();
    from_walk
        .iter()
        .zip(chain.eigenvalues())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// `max_ij |⟨j|U_X†U_Y|i⟩ − √(π_i/π_j) m_ij|`.
pub fn decomposition_residual(walk: &WalkOperator, chain: &MetropolisChain) -> f64 {
    let p = chain.stationary();
    let m = chain.transition();
    let n = chain.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = math::sqrt(p[i] / p[j]) * m[(i, j)];
            worst = worst.max((walk.restricted[(j, i)] - expected).norm());
        }
    }
    worst
}
