//! Dense complex linear algebra shared by the solvers.
//!
//! Everything here works on `DMatrix<Complex64>`; the largest matrices in
//! this crate are a few hundred rows, so no sparse or blocked kernels.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Induced infinity norm (max absolute row sum).
pub fn norm_inf(m: &CMat) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
///
/// Columns of `vectors` have unit 2-norm and pair with `values` by index.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
}

const SCHUR_MAX_ITER: usize = 10_000;

/// Schur decomposition followed by back-substitution on the triangular factor.
pub fn eigen(m: &CMat) -> Result<Eigen> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigen: matrix must be square");
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: CMat::zeros(0, 0) });
    }
    if n == 1 {
        return Ok(Eigen { values: vec![m[(0, 0)]], vectors: CMat::identity(1, 1) });
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::EigenNoConvergence(n))?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();

    // Floor for (t_jj - t_kk) so that repeated eigenvalues do not divide by zero.
    let floor = f64::EPSILON * max_abs(&t).max(f64::MIN_POSITIVE);
    let mut tri = CMat::zeros(n, n);
    for k in 0..n {
        tri[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in j + 1..=k {
                acc += t[(j, l)] * tri[(l, k)];
            }
            let mut d = t[(j, j)] - values[k];
            if d.norm() < floor {
                d = c(floor, 0.0);
            }
            tri[(j, k)] = -acc / d;
        }
    }
    let mut vectors = q * tri;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= c(nrm, 0.0);
        }
    }
    Ok(Eigen { values, vectors })
}

pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::EigenNoConvergence(n))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|k| t[(k, k)]).collect())
}

/// 2-norm condition number, `σ_max / σ_min`.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Matrix exponential (Padé scaling and squaring).
pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

/// `⟨u, v⟩ = u† v`.
pub fn inner(u: &CVec, v: &CVec) -> Complex64 {
    u.dotc(v)
}
