//! Generalized eigenvalues of `A x = σ B x` and selection of the leading mode.
//!
//! Rows of `B` that vanish are algebraic (boundary) constraints. The
//! matching unknowns are eliminated exactly, leaving the standard problem
//! `M y = σ y` on the remaining unknowns; its spectrum is the finite
//! spectrum of the pencil. A QZ solve of the full pencil is kept for
//! eigenvectors and as a cross-check.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{evd_cplx, evd_real, evd_scratch, ComputeEigenvectors};
use faer::linalg::gevd::{gevd_cplx, gevd_scratch};
use faer::prelude::Solve;
use faer::{Mat, Par};
use num_complex::Complex64 as C64;

use super::system::DiscretizedSystem;
use crate::error::{Error, Result};

/// Eigenvalues beyond this magnitude come from the boundary rows.
pub const SPURIOUS_MAGNITUDE: f64 = 1e8;

fn check_square(a: &Mat<C64>, b: &Mat<C64>) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Dimension(format!(
            "pencil of {}×{} and {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(n)
}

/// QZ on the full pencil: `(α, β, right vectors)`.
fn gevd(a: &Mat<C64>, b: &Mat<C64>) -> Result<(Vec<C64>, Vec<C64>, Mat<C64>)> {
    let n = check_square(a, b)?;
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut alpha = Diag::<C64>::zeros(n);
    let mut beta = Diag::<C64>::zeros(n);
    // the eigenvalue-only QZ path of faer 0.24 loses eigenvalues on pencils
    // beyond a few dozen rows, so the right vectors are always requested
    let mut u = Mat::<C64>::zeros(n, n);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(gevd_scratch::<C64>(
        n,
        ComputeEigenvectors::No,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    gevd_cplx(
        a.as_mut(),
        b.as_mut(),
        alpha.as_mut(),
        beta.as_mut(),
        None,
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let alpha = alpha.column_vector().iter().copied().collect();
    let beta = beta.column_vector().iter().copied().collect();
    Ok((alpha, beta, u))
}

/// Standard-form matrix of the pencil after eliminating the unknowns
/// attached to zero rows of `B`.
fn reduce(a: &Mat<C64>, b: &Mat<C64>) -> Result<Mat<C64>> {
    let n = check_square(a, b)?;
    let zero = C64::new(0.0, 0.0);
    let (bd, inner): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| (0..n).all(|j| b[(i, j)] == zero));
    let sub = |m: &Mat<C64>, r: &[usize], c: &[usize]| Mat::<C64>::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])]);
    let (b_ii, a_ii) = (sub(b, &inner, &inner), sub(a, &inner, &inner));
    let (a_red, b_red) = if bd.is_empty() {
        (a_ii, b_ii)
    } else {
        let lu = sub(a, &bd, &bd).partial_piv_lu();
        let e = lu.solve(sub(a, &bd, &inner)) * faer::Scale(C64::new(-1.0, 0.0));
        if e.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::Eigen("boundary rows do not determine the boundary unknowns".into()));
        }
        (a_ii + sub(a, &inner, &bd) * &e, b_ii + sub(b, &inner, &bd) * &e)
    };
    Ok(b_red.partial_piv_lu().solve(&a_red))
}

fn standard_eigenvalues(m: &Mat<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    let par = Par::Seq;
    let (mut scale, mut imag) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(m[(i, j)].norm());
            imag = imag.max(m[(i, j)].im.abs());
        }
    }
    if imag <= 1e-13 * scale {
        let re = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let mut s_re = Diag::<f64>::zeros(n);
        let mut s_im = Diag::<f64>::zeros(n);
        let mut mem = MemBuffer::new(evd_scratch::<f64>(
            n,
            ComputeEigenvectors::No,
            ComputeEigenvectors::No,
            par,
            Default::default(),
        ));
        evd_real(
            re.as_ref(),
            s_re.as_mut(),
            s_im.as_mut(),
            None,
            None,
            par,
            MemStack::new(&mut mem),
            Default::default(),
        )
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        return Ok((0..n).map(|i| C64::new(s_re[i], s_im[i])).collect());
    }
    let mut s = Diag::<C64>::zeros(n);
    let mut mem = MemBuffer::new(evd_scratch::<C64>(
        n,
        ComputeEigenvectors::No,
        ComputeEigenvectors::No,
        par,
        Default::default(),
    ));
    evd_cplx(m.as_ref(), s.as_mut(), None, None, par, MemStack::new(&mut mem), Default::default())
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(s.column_vector().iter().copied().collect())
}

fn keep_finite(vals: impl IntoIterator<Item = (usize, C64)>) -> Vec<(usize, C64)> {
    vals.into_iter()
        .filter(|(_, s)| s.is_finite() && s.norm() <= SPURIOUS_MAGNITUDE)
        .collect()
}

/// Largest real part; ties within rounding go to the member with the larger
/// imaginary part, so conjugate pairs report `+Im`.
fn pick(vals: &[(usize, C64)]) -> Option<(usize, C64)> {
    let top = vals.iter().map(|v| v.1.re).fold(f64::NEG_INFINITY, f64::max);
    vals.iter()
        .filter(|v| v.1.re >= top - 1e-9 * top.abs().max(1.0))
        .copied()
        .max_by(|x, y| x.1.im.total_cmp(&y.1.im).then(x.1.re.total_cmp(&y.1.re)))
}

fn no_finite() -> Error {
    Error::Eigen("every eigenvalue is infinite or spurious".into())
}

fn qz_quotients(alpha: &[C64], beta: &[C64]) -> Vec<(usize, C64)> {
    alpha
        .iter()
        .zip(beta)
        .enumerate()
        .filter(|(_, (_, b))| b.norm() > 0.0)
        .map(|(i, (&a, &b))| (i, a / b))
        .collect()
}

/// All finite eigenvalues of the pencil `(A, B)`.
pub fn finite_eigenvalues(a: &Mat<C64>, b: &Mat<C64>) -> Result<Vec<C64>> {
    let vals = standard_eigenvalues(&reduce(a, b)?)?;
    Ok(keep_finite(vals.into_iter().enumerate()).into_iter().map(|v| v.1).collect())
}

/// Finite eigenvalues by QZ on the unreduced pencil.
pub fn finite_eigenvalues_qz(a: &Mat<C64>, b: &Mat<C64>) -> Result<Vec<C64>> {
    let (alpha, beta, _) = gevd(a, b)?;
    Ok(keep_finite(qz_quotients(&alpha, &beta)).into_iter().map(|v| v.1).collect())
}

/// Leading finite eigenvalue of `A x = σ B x`.
pub fn leading_eigenvalue(a: &Mat<C64>, b: &Mat<C64>) -> Result<C64> {
    let vals = standard_eigenvalues(&reduce(a, b)?)?;
    pick(&keep_finite(vals.into_iter().enumerate())).map(|v| v.1).ok_or_else(no_finite)
}

pub fn leading_sigma(sys: &DiscretizedSystem) -> Result<C64> {
    leading_eigenvalue(&sys.a, &sys.b)
}

/// Leading eigenvalue with its unit right eigenvector, from QZ.
pub fn leading_pair(sys: &DiscretizedSystem) -> Result<(C64, Vec<C64>)> {
    let (alpha, beta, u) = gevd(&sys.a, &sys.b)?;
    let (i, s) = pick(&keep_finite(qz_quotients(&alpha, &beta))).ok_or_else(no_finite)?;
    let mut x: Vec<C64> = (0..u.nrows()).map(|r| u[(r, i)]).collect();
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in &mut x {
        *v /= norm;
    }
    Ok((s, x))
}

/// `‖A x − σ B x‖ / ‖x‖`.
pub fn residual(sys: &DiscretizedSystem, sigma: C64, x: &[C64]) -> f64 {
    let n = x.len();
    let mut r2 = 0.0;
    for i in 0..n {
        let mut v = C64::new(0.0, 0.0);
        for j in 0..n {
            v += (sys.a[(i, j)] - sigma * sys.b[(i, j)]) * x[j];
        }
        r2 += v.norm_sqr();
    }
    r2.sqrt() / x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
