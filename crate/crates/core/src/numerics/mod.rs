//! Dense complex linear algebra used throughout the crate.

mod eigen;
mod matrix;
mod real;
mod state;
mod tolerance;

use alloc::vec;
use alloc::vec::Vec;

pub use eigen::{hermitian_eigendecomposition, unitary_eigendecomposition, HermitianEigen, UnitaryEigen};
pub(crate) use eigen::{eigh_symmetrized, symmetric_eigenvalues};
pub use matrix::{pauli, ComplexMatrix};
pub use real::RealMatrix;
pub use state::StateVector;
pub use tolerance::Tolerances;

use crate::error::{Error, Result};
use crate::math;

pub type C64 = num_complex::Complex64;

/// Largest matrix dimension any routine will accept.
pub const MAX_DIM: usize = 4096;

/// `exp(scale · m)` for Hermitian `m`, evaluated in its eigenbasis.
pub fn matrix_exponential_hermitian(m: &ComplexMatrix, scale: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = hermitian_eigendecomposition(m, tol)?;
    Ok(eig.reconstruct_with(|l| math::exp(scale * l)))
}

/// Kronecker product.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

fn split_index(mut index: usize, dims: &[usize], digits: &mut [usize]) {
    for (d, &dim) in digits.iter_mut().zip(dims).rev() {
        *d = index % dim;
        index /= dim;
    }
}

fn join_index(digits: &[usize], dims: &[usize], select: impl Fn(usize) -> bool) -> usize {
    digits
        .iter()
        .zip(dims)
        .enumerate()
        .filter(|(r, _)| select(*r))
        .fold(0, |acc, (_, (&d, &dim))| acc * dim + d)
}

fn validate_registers(keep: &[usize], dims: &[usize]) -> Result<()> {
    if keep.iter().any(|&r| r >= dims.len()) {
        return Err(Error::InvalidParameter("kept register index out of range"));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("kept registers must be strictly increasing"));
    }
    Ok(())
}

/// Traces out every register not listed in `keep` (indices into `dims`, increasing).
/// Registers are ordered with register 0 most significant.
pub fn partial_trace(rho: &ComplexMatrix, keep: &[usize], dims: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: rho.rows(),
        });
    }
    validate_registers(keep, dims)?;
    let kept_dim: usize = keep.iter().map(|&r| dims[r]).product();
    let traced_dim = total / kept_dim;

    // groups[t] lists (full index, kept index) sharing traced index t.
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dim];
    let mut digits = vec![0; dims.len()];
    for i in 0..total {
        split_index(i, dims, &mut digits);
        let kept = join_index(&digits, dims, |r| keep.contains(&r));
        let traced = join_index(&digits, dims, |r| !keep.contains(&r));
        groups[traced].push((i, kept));
    }
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(i, a) in group {
            for &(j, b) in group {
                out[(a, b)] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reduced density matrix of the pure state `psi` on the registers in `keep`.
pub fn reduced_density_matrix(psi: &[C64], keep: &[usize], dims: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if psi.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: psi.len(),
        });
    }
    validate_registers(keep, dims)?;
    let kept_dim: usize = keep.iter().map(|&r| dims[r]).product();
    let traced_dim = total / kept_dim;
    // Reshape psi into a kept × traced matrix, then ρ = Ψ Ψ†.
    let mut reshaped = ComplexMatrix::zeros(kept_dim, traced_dim);
    let mut digits = vec![0; dims.len()];
    for (i, &amp) in psi.iter().enumerate() {
        split_index(i, dims, &mut digits);
        let kept = join_index(&digits, dims, |r| keep.contains(&r));
        let traced = join_index(&digits, dims, |r| !keep.contains(&r));
        reshaped[(kept, traced)] = amp;
    }
    Ok(reshaped.matmul(&reshaped.adjoint()))
}

/// `½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let values = symmetric_eigenvalues(&rho.sub(sigma), tol)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn state_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let sqrt_rho = eigh_symmetrized(rho, tol)?.reconstruct_with(|l| math::sqrt(l.max(0.0)));
    let inner = sqrt_rho.matmul(&sigma.matmul(&sqrt_rho));
    let values = symmetric_eigenvalues(&inner, tol)?;
    let root: f64 = values.iter().map(|&l| math::sqrt(l.max(0.0))).sum();
    Ok(root * root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for c in r + 1..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        m
    }

    fn random_density(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let rho = a.matmul(&a.adjoint());
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    fn taylor_exp(m: &ComplexMatrix, scale: f64, terms: usize) -> ComplexMatrix {
        let n = m.rows();
        let scaled = m.scale_real(scale);
        let mut term = ComplexMatrix::identity(n);
        let mut acc = ComplexMatrix::identity(n);
        for k in 1..terms {
            term = term.matmul(&scaled).scale_real(1.0 / k as f64);
            acc = acc.add(&term);
        }
        acc
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exponential_hermitian(&ComplexMatrix::zeros(3, 3), 2.5, &Tolerances::default()).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let e = matrix_exponential_hermitian(&ComplexMatrix::diagonal(&[0.0, 1.0]), -1.0, &Tolerances::default())
            .unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::diagonal(&[1.0, libm::exp(-1.0)])) < 1e-15);
    }

    #[test]
    fn exp_matches_taylor_series() {
        let m = random_hermitian(4, 42);
        let e = matrix_exponential_hermitian(&m, -0.7, &Tolerances::default()).unwrap();
        assert!(e.max_abs_diff(&taylor_exp(&m, -0.7, 30)) < 1e-9);
    }

    #[test]
    fn exp_is_a_one_parameter_group() {
        let tol = Tolerances::default();
        let m = random_hermitian(6, 3);
        let a = matrix_exponential_hermitian(&m, 0.3, &tol).unwrap();
        let b = matrix_exponential_hermitian(&m, -1.1, &tol).unwrap();
        let ab = matrix_exponential_hermitian(&m, -0.8, &tol).unwrap();
        assert!(a.matmul(&b).max_abs_diff(&ab) < 1e-8);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho_a = random_density(2, 1);
        let rho_b = random_density(3, 2);
        let joint = rho_a.kron(&rho_b);
        let back_a = partial_trace(&joint, &[0], &[2, 3]).unwrap();
        let back_b = partial_trace(&joint, &[1], &[2, 3]).unwrap();
        assert!(back_a.max_abs_diff(&rho_a) < 1e-14);
        assert!(back_b.max_abs_diff(&rho_b) < 1e-14);
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let s = 1.0 / libm::sqrt(2.0);
        let psi = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)];
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for keep in [0, 1] {
            let rho = reduced_density_matrix(&psi, &[keep], &[2, 2]).unwrap();
            assert!(rho.max_abs_diff(&half) < 1e-15);
            let full = ComplexMatrix::from_fn(4, 4, |r, c| psi[r] * psi[c].conj());
            assert!(partial_trace(&full, &[keep], &[2, 2]).unwrap().max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity() {
        let tol = Tolerances::default();
        let rho = random_density(12, 8);
        for keep in [&[0usize][..], &[1], &[0, 2], &[1, 2]] {
            let out = partial_trace(&rho, keep, &[2, 3, 2]).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            assert!(out.is_hermitian(1e-14));
            let eig = hermitian_eigendecomposition(&out, &tol).unwrap();
            assert!(eig.values[0] > -1e-10);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = ComplexMatrix::identity(6);
        assert!(matches!(
            partial_trace(&rho, &[0], &[2, 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_and_trace_distance_of_identical_states() {
        let tol = Tolerances::default();
        let rho = random_density(4, 5);
        assert!((state_fidelity(&rho, &rho, &tol).unwrap() - 1.0).abs() < 1e-9);
        assert!(trace_distance(&rho, &rho, &tol).unwrap() < 1e-14);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let tol = Tolerances::default();
        let a = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert!((trace_distance(&a, &b, &tol).unwrap() - 1.0).abs() < 1e-14);
        assert!(state_fidelity(&a, &b, &tol).unwrap() < 1e-14);
    }
}
