//! Spin Hamiltonians on up to five qubits and the affine energy normalisation used by
//! the phase-estimation model.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
//! computational-basis index.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigendecomposition, pauli, ComplexMatrix, Tolerances, C64};

pub const MAX_QUBITS: usize = 5;

/// Default margin for [`normalize_spectrum`].
pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    matrix: ComplexMatrix,
    coupling_scale: f64,
    label: String,
}

impl Hamiltonian {
    /// Wraps an explicit matrix. Fails unless it is `2ⁿ×2ⁿ` and Hermitian within
    /// `tol.hermitian`.
    pub fn new(n: usize, matrix: ComplexMatrix, coupling_scale: f64, label: impl Into<String>, tol: &Tolerances) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.rows(),
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > tol.hermitian {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(Self {
            n,
            matrix,
            coupling_scale,
            label: label.into(),
        })
    }

    /// Diagonal Hamiltonian with the given energies in the computational basis.
    pub fn diagonal(energies: &[f64], label: impl Into<String>) -> Result<Self> {
        let n = energies.len().trailing_zeros() as usize;
        if energies.len() != 1 << n {
            return Err(Error::InvalidParameter("number of energies must be a power of two"));
        }
        check_size(n)?;
        let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        Ok(Self {
            n,
            matrix: ComplexMatrix::diagonal(energies),
            coupling_scale: scale,
            label: label.into(),
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Typical magnitude `J` of the local terms.
    pub fn coupling_scale(&self) -> f64 {
        self.coupling_scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Tr(H²)/N`, the infinite-temperature energy second moment.
    pub fn second_moment(&self) -> f64 {
        let n = self.dim();
        let sum: f64 = self.matrix.entries().iter().map(|z| z.norm_sqr()).sum();
        sum / n as f64
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self, tol: &Tolerances) -> Result<Vec<f64>> {
        Ok(hermitian_eigendecomposition(&self.matrix, tol)?.values)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::SizeOutOfRange { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// Nearest-neighbour bonds of a chain. A ring needs at least three sites, otherwise the
/// closing bond would repeat an existing one.
pub fn chain_bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if periodic && n >= 3 {
        bonds.push((n - 1, 0));
    }
    bonds
}

fn zz_diagonal(n: usize, j: f64, periodic: bool) -> Vec<f64> {
    let bonds = chain_bonds(n, periodic);
    (0..1usize << n)
        .map(|x| {
            let spin = |site: usize| if (x >> (n - 1 - site)) & 1 == 0 { 1.0 } else { -1.0 };
            bonds.iter().map(|&(a, b)| j * spin(a) * spin(b)).sum()
        })
        .collect()
}

/// `H = J Σ σᶻ_a σᶻ_b` over chain bonds.
pub fn build_ising(n: usize, j: f64, periodic: bool) -> Result<Hamiltonian> {
    check_size(n)?;
    let bc = if periodic { "periodic" } else { "open" };
    Ok(Hamiltonian {
        n,
        matrix: ComplexMatrix::diagonal(&zz_diagonal(n, j, periodic)),
        coupling_scale: j.abs(),
        label: format!("ising(n={n}, J={j}, {bc})"),
    })
}

/// `H = J Σ σᶻ_a σᶻ_b + h Σ σˣ_s`.
pub fn build_transverse_ising(n: usize, j: f64, h: f64, periodic: bool) -> Result<Hamiltonian> {
    check_size(n)?;
    let mut matrix = ComplexMatrix::diagonal(&zz_diagonal(n, j, periodic));
    if h != 0.0 {
        let x = pauli::x();
        for site in 0..n {
            matrix.add_scaled_assign(C64::new(h, 0.0), &pauli::on_site(&x, site, n));
        }
    }
    let bc = if periodic { "periodic" } else { "open" };
    Ok(Hamiltonian {
        n,
        matrix,
        coupling_scale: j.abs().max(h.abs()),
        label: format!("tfim(n={n}, J={j}, h={h}, {bc})"),
    })
}

fn pauli_by_index(k: usize) -> ComplexMatrix {
    match k {
        0 => ComplexMatrix::identity(2),
        1 => pauli::x(),
        2 => pauli::y(),
        _ => pauli::z(),
    }
}

/// Tensor product of single-qubit Paulis, `codes[s] ∈ {0: I, 1: X, 2: Y, 3: Z}`.
pub fn pauli_string(codes: &[usize]) -> ComplexMatrix {
    codes
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, &k| acc.kron(&pauli_by_index(k)))
}

/// Seeded random Hamiltonian with coefficient scale `j`.
///
/// With `two_local` set, `H` is a sum of every one- and two-qubit Pauli string with
/// coefficients drawn uniformly from `[−J, J]`. Otherwise every independent real and
/// imaginary entry of a Hermitian matrix is drawn from `[−J, J]`.
pub fn build_random_hermitian(n: usize, seed: u64, two_local: bool, j: f64) -> Result<Hamiltonian> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n;
    let draw = |rng: &mut ChaCha8Rng| if j == 0.0 { 0.0 } else { rng.gen_range(-j.abs()..=j.abs()) };
    let matrix = if two_local {
        let mut m = ComplexMatrix::zeros(dim, dim);
        let mut codes = alloc::vec![0usize; n];
        for a in 0..n {
            for pa in 1..4 {
                codes.fill(0);
                codes[a] = pa;
                let c = draw(&mut rng);
                m.add_scaled_assign(C64::new(c, 0.0), &pauli_string(&codes));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for pa in 1..4 {
                    for pb in 1..4 {
                        codes.fill(0);
                        codes[a] = pa;
                        codes[b] = pb;
                        let c = draw(&mut rng);
                        m.add_scaled_assign(C64::new(c, 0.0), &pauli_string(&codes));
                    }
                }
            }
        }
        // Pauli strings are exactly Hermitian, but summation can leave the
        // imaginary parts of mirrored entries a rounding step apart.
        m.hermitian_part()
    } else {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            m[(r, r)] = C64::new(draw(&mut rng), 0.0);
            for c in r + 1..dim {
                let z = C64::new(draw(&mut rng), draw(&mut rng));
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        m
    };
    let kind = if two_local { "random2local" } else { "random" };
    Ok(Hamiltonian {
        n,
        matrix,
        coupling_scale: j.abs(),
        label: format!("{kind}(n={n}, seed={seed}, J={j})"),
    })
}

/// `H̃ = H*`, the entrywise conjugate in the computational basis.
pub fn time_reversal_conjugate(h: &Hamiltonian) -> Hamiltonian {
    let label = match h.label.strip_suffix('~') {
        Some(base) => String::from(base),
        None => format!("{}~", h.label),
    };
    Hamiltonian {
        n: h.n,
        matrix: h.matrix.conj(),
        coupling_scale: h.coupling_scale,
        label,
    }
}

/// Affine map sending the physical spectrum into the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedSpectrum {
    pub e_min: f64,
    pub span: f64,
    pub margin: f64,
}

impl NormalizedSpectrum {
    pub fn from_energies(energies: &[f64], margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < 0.5) {
            return Err(Error::InvalidParameter("margin must lie in (0, 0.5)"));
        }
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            e_min,
            span: e_max - e_min,
            margin,
        })
    }

    /// `(E − E_min + margin·span) / (span·(1 + 2·margin))`; `0.5` for a flat spectrum.
    pub fn map(&self, energy: f64) -> f64 {
        if self.span < 1e-12 {
            return 0.5;
        }
        (energy - self.e_min + self.margin * self.span) / (self.span * (1.0 + 2.0 * self.margin))
    }

    pub fn map_all(&self, energies: &[f64]) -> Vec<f64> {
        energies.iter().map(|&e| self.map(e)).collect()
    }

    /// Physical energy difference corresponding to a normalised difference.
    pub fn physical_difference(&self, normalized: f64) -> f64 {
        normalized * self.span * (1.0 + 2.0 * self.margin)
    }
}

pub fn normalize_spectrum(h: &Hamiltonian, margin: f64, tol: &Tolerances) -> Result<NormalizedSpectrum> {
    NormalizedSpectrum::from_energies(&h.spectrum(tol)?, margin)
}

/// Hamiltonian families that can be described by a flat record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Ising,
    TransverseIsing,
    RandomTwoLocal,
    RandomDense,
}

/// Parameters for one of the [`Model`] families.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub model: Model,
    pub n: usize,
    pub j: f64,
    pub h: f64,
    pub periodic: bool,
    pub seed: u64,
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<Hamiltonian> {
        match self.model {
            Model::Ising => build_ising(self.n, self.j, self.periodic),
            Model::TransverseIsing => build_transverse_ising(self.n, self.j, self.h, self.periodic),
            Model::RandomTwoLocal => build_random_hermitian(self.n, self.seed, true, self.j),
            Model::RandomDense => build_random_hermitian(self.n, self.seed, false, self.j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn two_spin_open_ising() {
        let h = build_ising(2, 1.0, false).unwrap();
        assert_eq!(h.matrix(), &ComplexMatrix::diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn three_spin_ring_spectrum_by_enumeration() {
        // Enumerate the 8 configurations of the 3-cycle directly.
        let mut expected = Vec::new();
        for x in 0..8usize {
            let s: Vec<f64> = (0..3).map(|k| if (x >> k) & 1 == 0 { 1.0 } else { -1.0 }).collect();
            expected.push(s[0] * s[1] + s[1] * s[2] + s[2] * s[0]);
        }
        let spectrum = build_ising(3, 1.0, true).unwrap().spectrum(&tol()).unwrap();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(spectrum, expected);
        assert_eq!(spectrum.iter().filter(|&&e| e == -1.0).count(), 6);
        assert_eq!(spectrum.iter().filter(|&&e| e == 3.0).count(), 2);
    }

    #[test]
    fn zero_coupling_gives_zero_matrix() {
        for n in 1..=MAX_QUBITS {
            let h = build_ising(n, 0.0, true).unwrap();
            assert_eq!(h.matrix().max_abs(), 0.0);
        }
    }

    #[test]
    fn single_site_flip_changes_energy_by_multiples_of_2j() {
        let j = 0.7;
        let h = build_ising(4, j, true).unwrap();
        let d: Vec<f64> = (0..16).map(|x| h.matrix()[(x, x)].re).collect();
        for x in 0..16usize {
            for site in 0..4 {
                let y = x ^ (1 << site);
                let ratio = (d[y] - d[x]) / (2.0 * j);
                assert!((ratio - libm::round(ratio)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn out_of_range_sizes_are_rejected() {
        assert!(matches!(build_ising(0, 1.0, false), Err(Error::SizeOutOfRange { .. })));
        assert!(matches!(build_transverse_ising(6, 1.0, 1.0, false), Err(Error::SizeOutOfRange { .. })));
        assert!(matches!(build_random_hermitian(6, 0, true, 1.0), Err(Error::SizeOutOfRange { .. })));
    }

    #[test]
    fn single_qubit_tfim_is_pauli_x() {
        let h = build_transverse_ising(1, 3.0, 1.0, false).unwrap();
        assert_eq!(h.matrix(), &pauli::x());
        let spectrum = h.spectrum(&tol()).unwrap();
        assert!((spectrum[0] + 1.0).abs() < 1e-14 && (spectrum[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_qubit_tfim_matches_hand_built_matrix() {
        // Rows/columns in the order 00, 01, 10, 11.
        let (j, h) = (1.0, 0.5);
        #[rustfmt::skip]
        let explicit = ComplexMatrix::from_real(4, 4, &[
            j,   h,   h,   0.0,
            h,  -j,   0.0, h,
            h,   0.0, -j,  h,
            0.0, h,   h,   j,
        ]);
        let built = build_transverse_ising(2, j, h, false).unwrap();
        assert_eq!(built.matrix(), &explicit);
        let a = built.spectrum(&tol()).unwrap();
        let b = hermitian_eigendecomposition(&explicit, &tol()).unwrap().values;
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn tfim_without_field_is_ising() {
        for periodic in [false, true] {
            let a = build_transverse_ising(4, 1.3, 0.0, periodic).unwrap();
            let b = build_ising(4, 1.3, periodic).unwrap();
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn random_builder_is_deterministic_and_hermitian() {
        for two_local in [false, true] {
            let a = build_random_hermitian(3, 99, two_local, 1.0).unwrap();
            let b = build_random_hermitian(3, 99, two_local, 1.0).unwrap();
            assert_eq!(a.matrix(), b.matrix());
            assert!(a.matrix().sub(&a.matrix().adjoint()).max_abs() < 1e-15);
            let c = build_random_hermitian(3, 100, two_local, 1.0).unwrap();
            assert_ne!(a.matrix(), c.matrix());
        }
    }

    #[test]
    fn two_local_instance_has_no_three_body_weight() {
        let h = build_random_hermitian(3, 5, true, 1.0).unwrap();
        for a in 1..4 {
            for b in 1..4 {
                for c in 1..4 {
                    let codes = [a, b, c];
                    let p = pauli_string(&codes);
                    // Pauli-basis coefficient Tr(P H)/N.
                    let coeff = p.matmul(h.matrix()).trace() / 8.0;
                    assert!(coeff.norm() < 1e-14, "{codes:?}");
                }
            }
        }
        let coeff = pauli_string(&[1, 3, 0]).matmul(h.matrix()).trace() / 8.0;
        assert!(coeff.norm() > 0.0);
    }

    #[test]
    fn random_two_local_is_genuinely_complex() {
        let h = build_random_hermitian(2, 1, true, 1.0).unwrap();
        let tilde = time_reversal_conjugate(&h);
        assert!(h.matrix().max_abs_diff(tilde.matrix()) > 1e-3);
    }

    #[test]
    fn time_reversal_fixes_real_hamiltonians() {
        let h = build_ising(3, 1.0, true).unwrap();
        assert_eq!(time_reversal_conjugate(&h).matrix(), h.matrix());
    }

    #[test]
    fn time_reversal_flips_sigma_y_term() {
        let m = pauli::y().scale_real(0.8).add(&pauli::z());
        let h = Hamiltonian::new(1, m, 1.0, "y", &tol()).unwrap();
        let expected = pauli::y().scale_real(-0.8).add(&pauli::z());
        assert_eq!(time_reversal_conjugate(&h).matrix(), &expected);
    }

    #[test]
    fn time_reversal_is_an_involution_preserving_spectrum() {
        let h = build_random_hermitian(3, 17, true, 1.0).unwrap();
        let tilde = time_reversal_conjugate(&h);
        assert_eq!(time_reversal_conjugate(&tilde).matrix(), h.matrix());
        let a = h.spectrum(&tol()).unwrap();
        let b = tilde.spectrum(&tol()).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    }

    #[test]
    fn normalization_of_unit_gap() {
        let s = NormalizedSpectrum::from_energies(&[0.0, 1.0], 0.25).unwrap();
        assert!((s.map(0.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.map(1.0) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn flat_spectrum_maps_to_half() {
        let h = build_ising(2, 0.0, false).unwrap();
        let s = normalize_spectrum(&h, DEFAULT_MARGIN, &tol()).unwrap();
        assert!(s.map_all(&h.spectrum(&tol()).unwrap()).iter().all(|&e| e == 0.5));
    }

    #[test]
    fn normalized_values_are_inside_open_interval_and_ordered() {
        let h = build_random_hermitian(4, 2, true, 2.0).unwrap();
        let spectrum = h.spectrum(&tol()).unwrap();
        let s = normalize_spectrum(&h, 0.01, &tol()).unwrap();
        let mapped = s.map_all(&spectrum);
        assert!(mapped.iter().all(|&e| e > 0.0 && e < 1.0));
        assert!(mapped.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn margin_outside_range_is_rejected() {
        assert!(NormalizedSpectrum::from_energies(&[0.0, 1.0], 0.5).is_err());
        assert!(NormalizedSpectrum::from_energies(&[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn second_moment_of_pauli_sum() {
        // Tr(H²)/N equals the sum of squared Pauli coefficients.
        let h = build_transverse_ising(3, 1.0, 0.5, false).unwrap();
        assert!((h.second_moment() - (2.0 * 1.0 + 3.0 * 0.25)).abs() < 1e-14);
    }
}
