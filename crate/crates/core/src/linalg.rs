// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used throughout the crate.
//!
//! Small-matrix factorizations (Hermitian eigendecomposition, SVD) come from
//! `nalgebra`. Products and linear solves on superoperator-sized matrices
//! (up to 4096 × 4096) go through `matrixmultiply::zgemm` and a blocked LU
//! built on top of it, since the generic `nalgebra` kernels are not blocked
//! for complex scalars.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Column-major block view used to feed raw pointers to `zgemm`.
#[derive(Clone, Copy)]
struct Block {
    ptr: *const Complex64,
    rows: usize,
    cols: usize,
    col_stride: usize,
}

impl Block {
    fn of(m: &CMat, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::at(m.as_ptr(), m.nrows(), m.ncols(), r0, c0, rows, cols)
    }

    fn at(base: *const Complex64, nrows: usize, ncols: usize, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= nrows && c0 + cols <= ncols);
        // SAFETY: offset stays inside the allocation by the assertion above.
        let ptr = unsafe { base.add(r0 + c0 * nrows) };
        Block { ptr, rows, cols, col_stride: nrows }
    }
}

/// `c ← alpha · a · b + beta · c` on blocks.
///
/// # Safety
/// `c` must be a valid, writable block not aliasing `a` or `b`, and the
/// block shapes must agree.
unsafe fn zgemm_blocks(alpha: Complex64, a: Block, b: Block, beta: Complex64, c: *mut Complex64, c_stride: usize) {
    debug_assert_eq!(a.cols, b.rows);
    if a.rows == 0 || b.cols == 0 {
        return;
    }
    matrixmultiply::zgemm(
        matrixmultiply::CGemmOption::Standard,
        matrixmultiply::CGemmOption::Standard,
        a.rows,
        a.cols,
        b.cols,
        [alpha.re, alpha.im],
        a.ptr as *const [f64; 2],
        1,
        a.col_stride as isize,
        b.ptr as *const [f64; 2],
        1,
        b.col_stride as isize,
        [beta.re, beta.im],
        c as *mut [f64; 2],
        1,
        c_stride as isize,
    );
}

/// Matrix product `a · b`.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let mut c = CMat::zeros(a.nrows(), b.ncols());
    if a.ncols() == 0 {
        return c;
    }
    let ab = Block::of(a, 0, 0, a.nrows(), a.ncols());
    let bb = Block::of(b, 0, 0, b.nrows(), b.ncols());
    let stride = c.nrows();
    // SAFETY: `c` is freshly allocated with the product shape.
    unsafe { zgemm_blocks(ONE, ab, bb, ZERO, c.as_mut_ptr(), stride) };
    c
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(a: &CMat) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise modulus of `a − a*`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(a + a*)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the Hermitian
/// part of `a` is used.
pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigen-decomposition of the Hermitian part of `a`: (ascending eigenvalues,
/// matching eigenvectors as columns).
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Thin SVD `a = u · diag(s) · v*` returning `(u, s, v)`.
pub fn svd(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd: u requested");
    let v = svd.v_t.expect("svd: v_t requested").adjoint();
    (u, svd.singular_values.iter().copied().collect(), v)
}

/// Solves `a · x = b` by LU with partial pivoting. Blocked so that almost
/// all work happens in `zgemm`.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve: lhs {}x{}, rhs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut lu = a.clone();
    let perm = lu_in_place(&mut lu)?;
    let mut x = b.clone();
    for (k, &p) in perm.iter().enumerate() {
        if p != k {
            x.swap_rows(k, p);
        }
    }
    lower_unit_solve_in_place(&lu, &mut x);
    upper_solve_in_place(&lu, &mut x);
    Ok(x)
}

const NB: usize = 64;

/// Right-looking blocked LU. On return `lu` holds the unit lower factor
/// below the diagonal and the upper factor on and above it; the returned
/// vector lists the row swapped with row `k` at step `k`.
fn lu_in_place(lu: &mut CMat) -> Result<Vec<usize>> {
    let n = lu.nrows();
    let mut perm = vec![0usize; n];
    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        for j in k0..k0 + kb {
            let mut p = j;
            let mut best = lu[(j, j)].norm();
            for i in j + 1..n {
                let v = lu[(i, j)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular);
            }
            perm[j] = p;
            if p != j {
                lu.swap_rows(j, p);
            }
            let inv = ONE / lu[(j, j)];
            for i in j + 1..n {
                lu[(i, j)] *= inv;
            }
            for c in j + 1..k0 + kb {
                let u = lu[(j, c)];
                if u == ZERO {
                    continue;
                }
                for i in j + 1..n {
                    let l = lu[(i, j)];
                    lu[(i, c)] -= l * u;
                }
            }
        }
        let rest = n - k0 - kb;
        if rest > 0 {
            // U12 ← L11⁻¹ A12
            for c in k0 + kb..n {
                for j in k0..k0 + kb {
                    let u = lu[(j, c)];
                    if u == ZERO {
                        continue;
                    }
                    for i in j + 1..k0 + kb {
                        let l = lu[(i, j)];
                        lu[(i, c)] -= l * u;
                    }
                }
            }
            // A22 ← A22 − L21 U12
            let base = lu.as_mut_ptr();
            let l21 = Block::at(base, n, n, k0 + kb, k0, rest, kb);
            let u12 = Block::at(base, n, n, k0, k0 + kb, kb, rest);
            // SAFETY: the destination block (rows/cols ≥ k0+kb) is disjoint
            // from both source blocks.
            unsafe {
                let dst = base.add((k0 + kb) + (k0 + kb) * n);
                zgemm_blocks(-ONE, l21, u12, ONE, dst, n);
            }
        }
        k0 += kb;
    }
    Ok(perm)
}

fn lower_unit_solve_in_place(lu: &CMat, x: &mut CMat) {
    let n = lu.nrows();
    let m = x.ncols();
    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        for c in 0..m {
            for j in k0..k0 + kb {
                let v = x[(j, c)];
                if v == ZERO {
                    continue;
                }
                for i in j + 1..k0 + kb {
                    x[(i, c)] -= lu[(i, j)] * v;
                }
            }
        }
        let rest = n - k0 - kb;
        if rest > 0 && m > 0 {
            let l = Block::of(lu, k0 + kb, k0, rest, kb);
            let base = x.as_mut_ptr();
            let xb = Block::at(base, n, m, k0, 0, kb, m);
            // SAFETY: source rows k0..k0+kb and destination rows ≥ k0+kb of
            // `x` do not overlap.
            unsafe {
                zgemm_blocks(-ONE, l, xb, ONE, base.add(k0 + kb), n);
            }
        }
        k0 += kb;
    }
}

fn upper_solve_in_place(lu: &CMat, x: &mut CMat) {
    let n = lu.nrows();
    let m = x.ncols();
    let mut end = n;
    while end > 0 {
        let k0 = end.saturating_sub(NB);
        let kb = end - k0;
        for c in 0..m {
            for j in (k0..end).rev() {
                let v = x[(j, c)] / lu[(j, j)];
                x[(j, c)] = v;
                if v == ZERO {
                    continue;
                }
                for i in k0..j {
                    x[(i, c)] -= lu[(i, j)] * v;
                }
            }
        }
        if k0 > 0 && m > 0 {
            let u = Block::of(lu, 0, k0, k0, kb);
            let base = x.as_mut_ptr();
            let xb = Block::at(base, n, m, k0, 0, kb, m);
            // SAFETY: rows 0..k0 of `x` are disjoint from rows k0..end.
            unsafe {
                zgemm_blocks(-ONE, u, xb, ONE, base, n);
            }
        }
        end = k0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize, m: usize, salt: u64) -> CMat {
        // cheap deterministic pseudo-random fill
        let mut state = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        CMat::from_fn(n, m, |_, _| {
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            c64(next(), next())
        })
    }

    #[test]
    fn matmul_agrees_with_nalgebra() {
        let a = test_matrix(37, 21, 1);
        let b = test_matrix(21, 45, 2);
        let diff = (matmul(&a, &b) - &a * &b).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn blocked_solve_crosses_block_boundaries() {
        for &n in &[1usize, 5, 64, 65, 150] {
            let a = test_matrix(n, n, n as u64) + CMat::identity(n, n) * c64(3.0, 0.0);
            let b = test_matrix(n, 7, 99);
            let x = solve(&a, &b).unwrap();
            let resid = (&a * &x - &b).norm() / b.norm();
            assert!(resid < 1e-12, "n={n} resid={resid}");
        }
    }

    #[test]
    fn solve_detects_singular() {
        let a = CMat::zeros(3, 3);
        assert!(matches!(solve(&a, &CMat::identity(3, 3)), Err(Error::Singular)));
    }

    #[test]
    fn kron_layout() {
        let a = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0)]);
        let b = CMat::identity(2, 2);
        let k = kron(&a, &b);
        assert_eq!(k[(0, 2)], c64(2.0, 0.0));
        assert_eq!(k[(3, 1)], c64(3.0, 0.0));
        assert_eq!(k[(1, 2)], ZERO);
    }

    #[test]
    fn eigh_is_sorted() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c64(3.0, 0.0), c64(-1.0, 0.0), c64(2.0, 0.0)]));
        let (vals, vecs) = eigh(&a);
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }
}
