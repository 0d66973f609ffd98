//! Hermitian eigendecomposition by Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iteration, plus an eigensolver for
//! unitary matrices built on top of it.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{ComplexMatrix, Tolerances, C64};
use crate::error::{Error, Result};
use crate::math;

const ZERO: C64 = C64::new(0.0, 0.0);
const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector for `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

impl HermitianEigen {
    /// Eigenvectors as the columns of a matrix.
    pub fn vector_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.vectors)
    }

    /// `Σ_k f(λ_k) v_k v_k†`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (&lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = v[r] * w;
                if a == ZERO {
                    continue;
                }
                for (o, b) in out.row_mut(r).iter_mut().zip(v) {
                    *o += a * b.conj();
                }
            }
        }
        out
    }
}

/// Diagonalises a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is rotated so that its first
/// component with modulus above `tol.phase_threshold` is real and positive, and inside
/// a cluster of eigenvalues closer than `tol.degenerate_cluster` the vectors are ordered
/// by descending lexicographic comparison of their amplitude moduli.
pub fn hermitian_eigendecomposition(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    m.ensure_square_within_limit()?;
    let deviation = m.hermitian_deviation();
    if deviation > tol.hermitian {
        return Err(Error::NonHermitianInput { deviation });
    }
    eigh_unchecked(m, tol)
}

/// Like [`hermitian_eigendecomposition`] but symmetrises the input first and skips the
/// Hermiticity gate. For matrices that are Hermitian up to accumulated round-off.
pub(crate) fn eigh_symmetrized(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    m.ensure_square_within_limit()?;
    eigh_unchecked(&m.hermitian_part(), tol)
}

fn eigh_unchecked(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let (mut diag, mut off, mut vecs) = tridiagonalize(m);
    tql2(&mut diag, &mut off, &mut vecs)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap_or(Ordering::Equal));
    let mut values: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut vectors: Vec<Vec<C64>> = order.iter().map(|&k| core::mem::take(&mut vecs[k])).collect();

    for v in &mut vectors {
        normalize_in_place(v);
        fix_phase(v, tol.phase_threshold);
    }
    order_degenerate_clusters(&mut values, &mut vectors, tol);
    Ok(HermitianEigen { values, vectors })
}

/// Householder reduction `A = Q T Q†` followed by a diagonal phase change making `T`
/// real. Returns the diagonal, the off-diagonal (with a trailing zero) and the columns
/// of `Q·D`, stored one vector per entry.
fn tridiagonalize(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, Vec<Vec<C64>>) {
    let n = m.rows();
    let mut a: Vec<C64> = m.entries().to_vec();
    // q is Q in row-major order.
    let mut q: Vec<C64> = ComplexMatrix::identity(n).entries().to_vec();

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x: Vec<C64> = (0..len).map(|t| a[(k + 1 + t) * n + k]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = math::sqrt(tail + x[0].norm_sqr());
        let x0abs = math::sqrt(x[0].norm_sqr());
        let phase = if x0abs == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x0abs };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm_sq;

        // p = τ S v over the trailing block S = a[k+1.., k+1..].
        let mut p = vec![ZERO; len];
        for (r, pr) in p.iter_mut().enumerate() {
            let row = &a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
            let mut acc = ZERO;
            for (s, vs) in row.iter().zip(&v) {
                acc += s * vs;
            }
            *pr = acc * tau;
        }
        let vp: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = vp.re * tau * 0.5;
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for r in 0..len {
            let vr = v[r];
            let wr = w[r];
            let row = &mut a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
            for ((s, vc), wc) in row.iter_mut().zip(&v).zip(&w) {
                *s -= vr * wc.conj() + wr * vc.conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for t in 1..len {
            a[(k + 1 + t) * n + k] = ZERO;
            a[k * n + k + 1 + t] = ZERO;
        }

        // Q ← Q H on columns k+1..n.
        for r in 0..n {
            let row = &mut q[r * n + k + 1..r * n + n];
            let dot: C64 = row.iter().zip(&v).map(|(qr, vi)| qr * vi).sum::<C64>() * tau;
            for (qr, vi) in row.iter_mut().zip(&v) {
                *qr -= dot * vi.conj();
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut off = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1) * n + i];
        let mag = math::sqrt(e.norm_sqr());
        off[i] = mag;
        phases[i + 1] = if mag > 0.0 { phases[i] * (e / mag) } else { phases[i] };
    }
    let vecs: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|r| q[r * n + j] * phases[j]).collect())
        .collect();
    (diag, off, vecs)
}

/// Implicit QL on a symmetric tridiagonal matrix, rotating `vecs` along.
fn tql2(d: &mut [f64], e: &mut [f64], vecs: &mut [Vec<C64>]) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vecs.split_at_mut(i + 1);
                    let vi = &mut lo[i];
                    let vi1 = &mut hi[0];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let h = *b;
                        *b = *a * s + h * c;
                        *a = *a * c - h * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn normalize_in_place(v: &mut [C64]) {
    let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}

/// Rotates `v` so its first component with modulus above `threshold` is real positive.
pub(crate) fn fix_phase(v: &mut [C64], threshold: f64) {
    if let Some(lead) = v.iter().copied().find(|z| z.norm_sqr() > threshold * threshold) {
        let rot = lead.conj() / math::sqrt(lead.norm_sqr());
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

fn order_degenerate_clusters(values: &mut [f64], vectors: &mut [Vec<C64>], tol: &Tolerances) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[start] < tol.degenerate_cluster {
            end += 1;
        }
        if end - start > 1 {
            vectors[start..end].sort_by(|a, b| compare_magnitudes(a, b, tol.phase_threshold));
        }
        start = end;
    }
}

/// Descending lexicographic order on amplitude moduli, treating moduli within
/// `threshold` as equal.
fn compare_magnitudes(a: &[C64], b: &[C64], threshold: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let mx = math::sqrt(x.norm_sqr());
        let my = math::sqrt(y.norm_sqr());
        if (mx - my).abs() > threshold {
            return my.partial_cmp(&mx).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

/// Spectrum of a unitary (or any normal) matrix.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    /// Eigenphases in `(−π, π]`, ascending.
    pub phases: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// Diagonalises a unitary matrix through its Hermitian parts: first `(U + U†)/2`, then
/// `(U − U†)/2i` restricted to each cluster of equal cosines. Phases are read off the
/// Rayleigh quotient `v†Uv` of the final vectors.
pub fn unitary_eigendecomposition(u: &ComplexMatrix, tol: &Tolerances) -> Result<UnitaryEigen> {
    u.ensure_square_within_limit()?;
    let n = u.rows();
    let cos_part = u.hermitian_part();
    let minus_i_half = C64::new(0.0, -0.5);
    let sin_part = ComplexMatrix::from_fn(n, n, |r, c| (u[(r, c)] - u[(c, r)].conj()) * minus_i_half);

    let cos_eig = eigh_unchecked(&cos_part, tol)?;
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cos_eig.values[end] - cos_eig.values[end - 1] < tol.unitary_cluster {
            end += 1;
        }
        if end - start == 1 {
            vectors.push(cos_eig.vectors[start].clone());
        } else {
            let basis = ComplexMatrix::from_columns(&cos_eig.vectors[start..end]);
            let restricted = basis.adjoint_matmul(&sin_part.matmul(&basis));
            let inner = eigh_unchecked(&restricted.hermitian_part(), tol)?;
            for y in &inner.vectors {
                let mut v = basis.apply(y);
                normalize_in_place(&mut v);
                fix_phase(&mut v, tol.phase_threshold);
                vectors.push(v);
            }
        }
        start = end;
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = vectors
        .into_iter()
        .map(|v| {
            let uv = u.apply(&v);
            let mu: C64 = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
            (math::atan2(mu.im, mu.re), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let (phases, vectors) = pairs.into_iter().unzip();
    Ok(UnitaryEigen { phases, vectors })
}

/// Eigenvalues only, ascending. Input is symmetrised first.
pub(crate) fn symmetric_eigenvalues(m: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(eigh_symmetrized(m, tol)?.values)
}
