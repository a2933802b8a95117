//! Dense complex least squares.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative threshold on `|R_kk| / |R_00|` below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-13;

/// Solution of a least-squares problem.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: Vec<Complex64>,
    /// Numerical rank of the (augmented) system.
    pub rank: usize,
}

/// Minimize `‖A x − b‖₂² + ridge ‖x‖₂²` by column-pivoted QR on the
/// augmented matrix `[A; √ridge I]`.
///
/// Fails with [`Error::SingularSystem`] when the augmented matrix is
/// rank deficient.
pub fn ridge_lstsq(a: &DMatrix<Complex64>, b: &[Complex64], ridge: f64) -> Result<LstsqSolution> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::InvalidParameter(format!(
            "right-hand side has {} rows, matrix has {m}",
            b.len()
        )));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidParameter(format!("ridge must be nonnegative, got {ridge}")));
    }
    if n == 0 {
        return Ok(LstsqSolution { x: Vec::new(), rank: 0 });
    }
    let extra = if ridge > 0.0 { n } else { 0 };
    let rows = m + extra;
    if rows < n {
        return Err(Error::SingularSystem { rank: rows, cols: n });
    }
    let mut aug = DMatrix::<Complex64>::zeros(rows, n);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    let s = ridge.sqrt();
    for j in 0..extra {
        aug[(m + j, j)] = Complex64::new(s, 0.0);
    }
    let mut rhs = DVector::<Complex64>::zeros(rows);
    for (i, v) in b.iter().enumerate() {
        rhs[i] = *v;
    }

    let qr = aug.col_piv_qr();
    let r = qr.r();
    let r00 = r[(0, 0)].norm();
    let rank = (0..n)
        .take_while(|&k| r00 > 0.0 && r[(k, k)].norm() > RANK_TOL * r00)
        .count();
    if rank < n {
        return Err(Error::SingularSystem { rank, cols: n });
    }
    qr.q_tr_mul(&mut rhs);
    let mut x = DVector::<Complex64>::from_iterator(n, rhs.iter().take(n).copied());
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    qr.p().inv_permute_rows(&mut x);
    Ok(LstsqSolution { x: x.iter().copied().collect(), rank })
}
