//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Each sweep annihilates every off-diagonal pair (p, q) with a unitary
//! plane rotation; off-diagonal mass decreases monotonically and the
//! iteration converges quadratically once it is small. Good enough for the
//! dimensions this crate handles, and keeps the dependency tree free of
//! LAPACK bindings.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tol::TOL_HERM;

/// Eigenvalues ascending; eigenvector k is column k of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const MAX_SWEEPS: usize = 64;

/// Decomposes a Hermitian matrix as M = V diag(values) V^dag.
///
/// The input must be square and Hermitian within `TOL_HERM`; iteration then
/// runs on its exactly Hermitian part, so results are insensitive to
/// round-off level asymmetry in the input.
pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let defect = m.hermiticity_defect();
    if defect > TOL_HERM {
        return Err(Error::NotHermitian {
            defect,
            tol: TOL_HERM,
        });
    }

    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1e-300);
    let target = 1e-15 * scale;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(Error::EigenNoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a.get(p, q).norm_sqr();
        }
    }
    sum.sqrt()
}

/// One unitary plane rotation zeroing entry (p, q) of the Hermitian `a`,
/// accumulated into `v`. Rotation block, with beta = a[p][q] = |beta| e^{i phi}:
///   J[p][p] = c, J[p][q] = s e^{i phi}, J[q][p] = -s e^{-i phi}, J[q][q] = c,
/// where tan(2 theta) = 2|beta| / (a[q][q] - a[p][p]) picks the smaller angle.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = a.get(p, q);
    let b = beta.norm();
    if b <= 1e-300 {
        return;
    }
    let phase = beta / b;
    let alpha = a.get(p, p).re;
    let gamma = a.get(q, q).re;
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.dim();
    let s_phase = phase.scale(s);

    // Columns of A: (col_p, col_q) <- (c col_p - s e^{-i phi} col_q, s e^{i phi} col_p + c col_q)
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp.scale(c) - s_phase.conj() * akq);
        a.set(k, q, s_phase * akp + akq.scale(c));
    }
    // Rows of A with the conjugate coefficients.
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, apk.scale(c) - s_phase * aqk);
        a.set(q, k, s_phase.conj() * apk + aqk.scale(c));
    }
    // The rotated diagonal entries are real by construction; drop round-off
    // imaginary parts so later phase extractions stay clean.
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    a.set(p, p, Complex64::new(app.re, 0.0));
    a.set(q, q, Complex64::new(aqq.re, 0.0));
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp.scale(c) - s_phase.conj() * vkq);
        v.set(k, q, s_phase * vkp + vkq.scale(c));
    }
}

/// exp(-i H dt) for Hermitian H, built from the eigendecomposition, so it is
/// unitary to round-off at any dt rather than to a series truncation.
pub fn unitary_exp(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite dt: {dt}")));
    }
    let eig = eigh(h)?;
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&e| Complex64::new(0.0, -e * dt).exp())
        .collect();
    let d = ComplexMatrix::from_diag(&phases);
    Ok(ComplexMatrix::mul3(&eig.vectors, &d, &eig.vectors.dagger()))
}
