//! Eigenbasis of `H`, its time-reversed partner basis, and the kick operators that
//! propose transitions between eigenstates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::math;
use crate::numerics::{hermitian_eigendecomposition, pauli, ComplexMatrix, RealMatrix, StateVector, Tolerances, C64};

/// `H|φ_i⟩ = E_i|φ_i⟩` together with `|φ̃_i⟩ = |φ_i⟩*`, an eigenbasis of `H̃ = H*`
/// with the same energies.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    n: usize,
    energies: Vec<f64>,
    vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn new(h: &Hamiltonian, tol: &Tolerances) -> Result<Self> {
        let eig = hermitian_eigendecomposition(h.matrix(), tol)?;
        Ok(Self {
            n: h.n_qubits(),
            energies: eig.values.clone(),
            vectors: eig.vector_matrix(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are `|φ_i⟩`.
    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    /// Columns are `|φ̃_i⟩`.
    pub fn conjugate_vectors(&self) -> ComplexMatrix {
        self.vectors.conj()
    }

    pub fn eigenvector(&self, i: usize) -> StateVector {
        StateVector::new(self.vectors.column(i))
    }

    pub fn conjugate(&self, i: usize) -> StateVector {
        self.eigenvector(i).conj()
    }

    /// `max_i ‖H φ_i − E_i φ_i‖` and the same for `H̃` and `φ̃_i`.
    pub fn residuals(&self, h: &Hamiltonian) -> (f64, f64) {
        let tilde = h.matrix().conj();
        let mut worst = (0.0f64, 0.0f64);
        for (i, &e) in self.energies.iter().enumerate() {
            let v = self.eigenvector(i);
            let vt = v.conj();
            let hv = StateVector::new(h.matrix().apply(v.amplitudes()));
            let hvt = StateVector::new(tilde.apply(vt.amplitudes()));
            let ev = StateVector::new(v.amplitudes().iter().map(|z| z * e).collect());
            let evt = StateVector::new(vt.amplitudes().iter().map(|z| z * e).collect());
            worst.0 = worst.0.max(hv.distance(&ev));
            worst.1 = worst.1.max(hvt.distance(&evt));
        }
        worst
    }
}

/// Which local unitary ensemble proposes moves.
#[derive(Debug, Clone, PartialEq)]
pub enum KickKind {
    Identity,
    /// `σˣ` on one qubit.
    SpinFlip { site: usize },
    /// `σᶻ` on one qubit.
    PhaseFlip { site: usize },
    /// SWAP of two qubits.
    Swap { a: usize, b: usize },
    /// `σˣ_s` with `s` uniform over all qubits.
    UniformSpinFlips,
    /// `σˣ_s` and `σᶻ_s` with `s` uniform; connects the parity sectors that
    /// single spin flips preserve in the transverse-field model.
    UniformFlipsXZ,
    /// An explicit ensemble, each member applied with equal probability.
    Custom(Vec<ComplexMatrix>),
}

/// Kick ensemble `{K_λ}` with its amplitudes and transition table in the eigenbasis.
#[derive(Debug, Clone)]
pub struct KickModel {
    kind: KickKind,
    operators: Vec<ComplexMatrix>,
    amplitudes: Vec<ComplexMatrix>,
    transition: RealMatrix,
}

impl KickModel {
    pub fn kind(&self) -> &KickKind {
        &self.kind
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Number of ensemble members, the dimension `L` of the label register.
    pub fn labels(&self) -> usize {
        self.operators.len()
    }

    /// `amplitudes()[λ][(k, i)] = ⟨φ_k|K_λ|φ̃_i⟩`.
    pub fn amplitudes(&self) -> &[ComplexMatrix] {
        &self.amplitudes
    }

    /// `s_ik = (1/L) Σ_λ |⟨φ_k|K_λ|φ̃_i⟩|²`, indexed `(i, k)`. Doubly stochastic and
    /// symmetric for symmetric unitary kicks.
    pub fn transition_table(&self) -> &RealMatrix {
        &self.transition
    }
}

fn swap_operator(a: usize, b: usize, n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let bit = |x: usize, s: usize| (x >> (n - 1 - s)) & 1;
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        let mut y = c;
        if bit(c, a) != bit(c, b) {
            y ^= (1 << (n - 1 - a)) | (1 << (n - 1 - b));
        }
        if r == y {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn kick_operators(kind: &KickKind, n: usize) -> Result<Vec<ComplexMatrix>> {
    let dim = 1usize << n;
    let check_site = |s: usize| {
        if s < n {
            Ok(())
        } else {
            Err(Error::InvalidParameter("kick site out of range"))
        }
    };
    Ok(match kind {
        KickKind::Identity => alloc::vec![ComplexMatrix::identity(dim)],
        KickKind::SpinFlip { site } => {
            check_site(*site)?;
            alloc::vec![pauli::on_site(&pauli::x(), *site, n)]
        }
        KickKind::PhaseFlip { site } => {
            check_site(*site)?;
            alloc::vec![pauli::on_site(&pauli::z(), *site, n)]
        }
        KickKind::Swap { a, b } => {
            check_site(*a)?;
            check_site(*b)?;
            if a == b {
                return Err(Error::InvalidParameter("swap kick needs two distinct sites"));
            }
            alloc::vec![swap_operator(*a, *b, n)]
        }
        KickKind::UniformSpinFlips => (0..n).map(|s| pauli::on_site(&pauli::x(), s, n)).collect(),
        KickKind::UniformFlipsXZ => (0..n)
            .flat_map(|s| [pauli::on_site(&pauli::x(), s, n), pauli::on_site(&pauli::z(), s, n)])
            .collect(),
        KickKind::Custom(ops) => {
            if ops.is_empty() {
                return Err(Error::InvalidParameter("custom kick ensemble is empty"));
            }
            for op in ops {
                if !op.is_square() || op.rows() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: op.rows(),
                    });
                }
            }
            ops.clone()
        }
    })
}

/// Validates the ensemble and tabulates it in the eigenbasis of `system`.
///
/// Each `K_λ` must be unitary within `tol.kick_unitarity` and equal to its own
/// transpose in the computational basis within `tol.kick_symmetry`.
pub fn build_kick(system: &EigenSystem, kind: KickKind, tol: &Tolerances) -> Result<KickModel> {
    let operators = kick_operators(&kind, system.n_qubits())?;
    for op in &operators {
        let deviation = op.unitarity_deviation();
        if deviation > tol.kick_unitarity {
            return Err(Error::NonUnitaryKick { deviation });
        }
        let deviation = op.symmetry_deviation();
        if deviation > tol.kick_symmetry {
            return Err(Error::AsymmetricKick { deviation });
        }
    }
    let v = system.vectors();
    let v_tilde = system.conjugate_vectors();
    let amplitudes: Vec<ComplexMatrix> = operators.iter().map(|k| v.adjoint_matmul(&k.matmul(&v_tilde))).collect();
    let n = system.dim();
    let weight = 1.0 / amplitudes.len() as f64;
    let transition = RealMatrix::from_fn(n, |i, k| weight * amplitudes.iter().map(|a| a[(k, i)].norm_sqr()).sum::<f64>());
    Ok(KickModel {
        kind,
        operators,
        amplitudes,
        transition,
    })
}

/// `N^{-1/2} Σ_x |x⟩|x⟩` on two copies of the system register.
pub fn infinite_temperature_state(system: &EigenSystem) -> StateVector {
    let n = system.dim();
    let amp = 1.0 / math::sqrt(n as f64);
    let mut s = StateVector::zeros(n * n);
    for x in 0..n {
        s.amplitudes_mut()[x * n + x] = C64::new(amp, 0.0);
    }
    s
}

/// `N^{-1/2} Σ_i |φ_i⟩|φ̃_i⟩`, equal to [`infinite_temperature_state`] for any eigenbasis.
pub fn paired_eigenbasis_state(system: &EigenSystem) -> StateVector {
    let n = system.dim();
    let amp = 1.0 / math::sqrt(n as f64);
    let mut s = StateVector::zeros(n * n);
    for i in 0..n {
        let phi = system.eigenvector(i);
        let kron = phi.kron(&phi.conj());
        for (o, z) in s.amplitudes_mut().iter_mut().zip(kron.amplitudes()) {
            *o += z * amp;
        }
    }
    s
}
