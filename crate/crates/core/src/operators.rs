//! Density operators, projectors, Hamiltonians, and tensor-factor bookkeeping.
//!
//! Density operators here are deliberately not forced to unit trace: the
//! reduction dynamics keeps unnormalized branch states whose traces carry
//! probability weight, so invariants require only Hermitian, positive
//! semidefinite, and strictly positive trace. Every probability in the crate
//! is a ratio of traces, never a raw trace.

use num_complex::Complex64;

use crate::eigen::{eigh, unitary_exp};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ComplexVector};
use crate::tol::{PSD_FLOOR, TOL_HERM, TOL_IDEMPOTENT, TOL_ORTHONORMAL, TOL_RANK};

/// A Hermitian, positive semidefinite matrix with positive trace.
/// Trace may be any positive value, not just 1.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Full validation: Hermiticity within `TOL_HERM`, eigenvalues above
    /// `PSD_FLOOR` (checked by an actual eigendecomposition), trace > 0.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let report = validate_density(&matrix)?;
        if !report.hermitian_ok {
            return Err(Error::NotHermitian {
                defect: report.hermiticity_defect,
                tol: TOL_HERM,
            });
        }
        if !report.psd_ok {
            return Err(Error::NotPositiveSemidefinite(report.min_eigenvalue));
        }
        if !report.trace_ok {
            return Err(Error::NonPositiveTrace(report.trace));
        }
        Ok(Self { matrix })
    }

    /// Pure state |v><v| (>0 norm required).
    pub fn pure(v: &ComplexVector) -> Result<Self> {
        let n = v.norm();
        if n <= 0.0 {
            return Err(Error::NonPositiveTrace(0.0));
        }
        Ok(Self { matrix: v.outer() })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("dimension must be positive"));
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        })
    }

    /// Cheap constructor for outputs of maps that preserve positivity by
    /// construction (unitary conjugation, projection sandwiches, Kraus sums).
    /// Checks Hermiticity and positive trace but skips the eigensolve.
    pub(crate) fn from_positive_map(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > TOL_HERM {
            return Err(Error::NotHermitian {
                defect,
                tol: TOL_HERM,
            });
        }
        let tr = matrix.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::NonPositiveTrace(tr));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Trace, always real positive for a valid state.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// Orthogonal projector: Hermitian, idempotent, integer rank >= 1.
#[derive(Clone, Debug)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > TOL_HERM {
            return Err(Error::NotHermitian {
                defect,
                tol: TOL_HERM,
            });
        }
        let idem = matrix.mul(&matrix).max_abs_diff(&matrix);
        if idem > TOL_IDEMPOTENT {
            return Err(Error::NotIdempotent(idem));
        }
        let tr = matrix.trace().re;
        let rank = tr.round();
        if (tr - rank).abs() > TOL_RANK || rank < 1.0 || rank > matrix.dim() as f64 {
            return Err(Error::BadRank(tr));
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    /// Projector onto the span of the given standard basis states.
    pub fn from_basis_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput("projector needs at least one basis index"));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &k in indices {
            if k >= dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k });
            }
            if m.get(k, k).re != 0.0 {
                return Err(Error::InvalidParameter(format!("duplicate basis index {k}")));
            }
            m.set(k, k, Complex64::new(1.0, 0.0));
        }
        Ok(Self {
            matrix: m,
            rank: indices.len(),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("dimension must be positive"));
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        })
    }

    /// 1 - P. Errors when P is the identity, since the zero matrix is not a
    /// valid projector here.
    pub fn complement(&self) -> Result<Self> {
        if self.rank == self.dim() {
            return Err(Error::BadRank(0.0));
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(self.dim()).sub(&self.matrix),
            rank: self.dim() - self.rank,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Max-entry defect of P S P against S; zero iff S is supported in the
    /// range of P.
    pub fn support_defect(&self, s: &DensityOperator) -> f64 {
        let psp = self.matrix.mul(s.matrix()).mul(&self.matrix);
        psp.max_abs_diff(s.matrix())
    }
}

/// Hermitian generator of the unitary dynamics.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
}

impl Hamiltonian {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > TOL_HERM {
            return Err(Error::NotHermitian {
                defect,
                tol: TOL_HERM,
            });
        }
        Ok(Self { matrix })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("dimension must be positive"));
        }
        Ok(Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Largest eigenvalue magnitude; sets the natural time scale 1/|H|.
    pub fn spectral_radius(&self) -> Result<f64> {
        let eig = eigh(&self.matrix)?;
        Ok(eig
            .values
            .iter()
            .map(|e| e.abs())
            .fold(0.0, f64::max))
    }
}

/// Tensor-factor layout of a composite system plus the factor to keep.
/// Factor 0 is the slowest-varying index in row-major convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemPartition {
    factor_dims: Vec<usize>,
    kept: usize,
}

impl SubsystemPartition {
    pub fn new(factor_dims: Vec<usize>, kept: usize) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::EmptyInput("partition needs at least one factor"));
        }
        if factor_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter("factor dimensions must be positive".into()));
        }
        if kept >= factor_dims.len() {
            return Err(Error::DimensionMismatch {
                expected: factor_dims.len(),
                got: kept,
            });
        }
        Ok(Self { factor_dims, kept })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn kept(&self) -> usize {
        self.kept
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn kept_dim(&self) -> usize {
        self.factor_dims[self.kept]
    }

    /// Row-major stride of the kept factor.
    fn kept_stride(&self) -> usize {
        self.factor_dims[self.kept + 1..].iter().product()
    }
}

/// Kronecker product of two square operators; the left factor is the
/// slower-varying index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !b.is_square() {
        return Err(Error::NotSquare { rows: b.rows(), cols: b.cols() });
    }
    Ok(a.kron(b))
}

/// Traces out every factor except the kept one: the result is the reduced
/// state of that factor alone. Trace is preserved exactly up to summation
/// order.
pub fn partial_trace(s: &DensityOperator, part: &SubsystemPartition) -> Result<DensityOperator> {
    let d = part.total_dim();
    if s.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s.dim(),
        });
    }
    let dk = part.kept_dim();
    let stride = part.kept_stride();
    let env_dims: Vec<usize> = part
        .factor_dims
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != part.kept)
        .map(|(_, &fd)| fd)
        .collect();
    let env_strides: Vec<usize> = {
        // Row-major strides of the non-kept factors inside the full index.
        let mut all_strides = vec![1usize; part.factor_dims.len()];
        for i in (0..part.factor_dims.len() - 1).rev() {
            all_strides[i] = all_strides[i + 1] * part.factor_dims[i + 1];
        }
        part.factor_dims
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != part.kept)
            .map(|(i, _)| all_strides[i])
            .collect()
    };
    let env_count: usize = env_dims.iter().product();

    let mut out = ComplexMatrix::zeros(dk, dk);
    for env in 0..env_count {
        // Decompose env in mixed radix over the non-kept factors.
        let mut rem = env;
        let mut base = 0usize;
        for (i, &ed) in env_dims.iter().enumerate().rev() {
            base += (rem % ed) * env_strides[i];
            rem /= ed;
        }
        for a in 0..dk {
            for b in 0..dk {
                let cur = out.get(a, b);
                out.set(a, b, cur + s.matrix().get(base + a * stride, base + b * stride));
            }
        }
    }
    DensityOperator::new(out)
}

/// exp(-i H dt), exact via eigendecomposition.
pub fn hermitian_propagator(h: &Hamiltonian, dt: f64) -> Result<ComplexMatrix> {
    unitary_exp(h.matrix(), dt)
}

/// Sum of |v><v| over the given vectors. The vectors must already be
/// orthonormal within `TOL_ORTHONORMAL`; nothing is re-orthogonalized on the
/// caller's behalf.
pub fn make_band_projector(vectors: &[ComplexVector]) -> Result<Projector> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("band projector needs at least one vector"));
    }
    let dim = vectors[0].dim();
    let mut worst: f64 = 0.0;
    for (i, vi) in vectors.iter().enumerate() {
        if vi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: vi.dim(),
            });
        }
        for (j, vj) in vectors.iter().enumerate().skip(i) {
            let g = vi.inner(vj);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    if worst > TOL_ORTHONORMAL {
        return Err(Error::NotOrthonormal(worst));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for v in vectors {
        m = m.add(&v.outer());
    }
    Projector::new(m)
}

/// Diagnostics from checking a candidate density matrix against the state
/// invariants. Produced for every square matrix, valid or not.
#[derive(Clone, Debug)]
pub struct DensityReport {
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub hermitian_ok: bool,
    pub psd_ok: bool,
    pub trace_ok: bool,
}

impl DensityReport {
    pub fn all_ok(&self) -> bool {
        self.hermitian_ok && self.psd_ok && self.trace_ok
    }
}

/// Checks Hermiticity, positivity, and trace of a candidate state and
/// reports the measured defects. Only a non-square input is an error.
/// The eigenvalue scan runs on the Hermitian part, so a report comes back
/// even when the Hermiticity check itself fails.
pub fn validate_density(m: &ComplexMatrix) -> Result<DensityReport> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let hermiticity_defect = m.hermiticity_defect();
    let eig = eigh(&m.hermitian_part())?;
    let min_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
    let trace = m.trace().re;
    Ok(DensityReport {
        hermiticity_defect,
        min_eigenvalue,
        trace,
        hermitian_ok: hermiticity_defect <= TOL_HERM,
        psd_ok: min_eigenvalue >= PSD_FLOOR,
        trace_ok: trace > 0.0 && trace.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_pair() -> DensityOperator {
        // (|00> + |11>)/sqrt(2) as a density matrix.
        let v = ComplexVector::new(vec![
            c(1.0 / 2f64.sqrt(), 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0 / 2f64.sqrt(), 0.0),
        ])
        .unwrap();
        DensityOperator::pure(&v).unwrap()
    }

    #[test]
    fn density_constructor_enforces_invariants() {
        // Valid: diag(0.5, 0.5).
        let ok = ComplexMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(DensityOperator::new(ok).is_ok());

        // Not Hermitian.
        let nh = ComplexMatrix::new(2, 2, vec![c(0.5, 0.), c(0.1, 0.), c(0., 0.), c(0.5, 0.)]).unwrap();
        assert!(matches!(DensityOperator::new(nh), Err(Error::NotHermitian { .. })));

        // Hermitian but indefinite: sigma_x has eigenvalue -1.
        let sx = ComplexMatrix::from_real(2, &[0., 1., 1., 0.]).unwrap();
        assert!(matches!(
            DensityOperator::new(sx),
            Err(Error::NotPositiveSemidefinite(_))
        ));

        // PSD but zero trace.
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(DensityOperator::new(z), Err(Error::NonPositiveTrace(_))));

        // Unnormalized traces are fine.
        let big = ComplexMatrix::from_real(2, &[3.0, 0.0, 0.0, 1.0]).unwrap();
        let s = DensityOperator::new(big).unwrap();
        assert_eq!(s.trace(), 4.0);
    }

    #[test]
    fn projector_constructor_enforces_invariants() {
        let p = Projector::from_basis_indices(3, &[0, 2]).unwrap();
        assert_eq!(p.rank(), 2);

        // Hermitian but not idempotent.
        let half = ComplexMatrix::from_real(2, &[0.5, 0., 0., 0.]).unwrap();
        assert!(matches!(Projector::new(half), Err(Error::NotIdempotent(_))));

        // Rank-1 projector onto (|0> + |1>)/sqrt2.
        let plus = ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let p = Projector::new(plus).unwrap();
        assert_eq!(p.rank(), 1);

        // Zero matrix: trace 0 is not a valid rank.
        assert!(matches!(
            Projector::new(ComplexMatrix::zeros(2, 2)),
            Err(Error::BadRank(_))
        ));

        assert!(Projector::from_basis_indices(2, &[0, 0]).is_err());
        assert!(Projector::from_basis_indices(2, &[2]).is_err());
    }

    #[test]
    fn complement_ranks_add_up() {
        let p = Projector::from_basis_indices(5, &[1, 2]).unwrap();
        let q = p.complement().unwrap();
        assert_eq!(q.rank(), 3);
        let sum = p.matrix().add(q.matrix());
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-15);
        let full = Projector::identity(4).unwrap();
        assert!(full.complement().is_err());
    }

    #[test]
    fn partial_trace_of_bell_pair_is_maximally_mixed() {
        let s = bell_pair();
        for kept in [0usize, 1] {
            let part = SubsystemPartition::new(vec![2, 2], kept).unwrap();
            let r = partial_trace(&s, &part).unwrap();
            let expect = ComplexMatrix::from_real(2, &[0.5, 0., 0., 0.5]).unwrap();
            assert!(r.matrix().max_abs_diff(&expect) < 1e-14);
        }
    }

    #[test]
    fn partial_trace_of_product_state_recovers_factors() {
        // rho = a (x) b with distinct spectra; tracing out either side must
        // return the other factor exactly (oracle: the inputs themselves).
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)],
        )
        .unwrap();
        let b = ComplexMatrix::new(
            3,
            3,
            vec![
                c(0.5, 0.), c(0., 0.1), c(0., 0.),
                c(0., -0.1), c(0.3, 0.), c(0., 0.),
                c(0., 0.), c(0., 0.), c(0.2, 0.),
            ],
        )
        .unwrap();
        let joint = DensityOperator::new(tensor_product(&a, &b).unwrap()).unwrap();

        let keep_a = SubsystemPartition::new(vec![2, 3], 0).unwrap();
        let ra = partial_trace(&joint, &keep_a).unwrap();
        assert!(ra.matrix().max_abs_diff(&a) < 1e-14, "left factor, b has trace 1");

        let keep_b = SubsystemPartition::new(vec![2, 3], 1).unwrap();
        let rb = partial_trace(&joint, &keep_b).unwrap();
        assert!(rb.matrix().max_abs_diff(&b) < 1e-14, "right factor, a has trace 1");
    }

    #[test]
    fn partial_trace_three_factor_middle() {
        // Keep the middle factor of a (2,2,2) product; oracle by construction.
        let a = ComplexMatrix::from_real(2, &[0.25, 0., 0., 0.75]).unwrap();
        let b = ComplexMatrix::new(2, 2, vec![c(0.6, 0.), c(0.2, 0.3), c(0.2, -0.3), c(0.4, 0.)]).unwrap();
        let d = ComplexMatrix::from_real(2, &[0.9, 0., 0., 0.1]).unwrap();
        let joint = tensor_product(&tensor_product(&a, &b).unwrap(), &d).unwrap();
        let s = DensityOperator::new(joint).unwrap();
        let part = SubsystemPartition::new(vec![2, 2, 2], 1).unwrap();
        let r = partial_trace(&s, &part).unwrap();
        assert!(r.matrix().max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace_and_rejects_bad_dims() {
        let s = bell_pair();
        let part = SubsystemPartition::new(vec![2, 2], 0).unwrap();
        let r = partial_trace(&s, &part).unwrap();
        assert!((r.trace() - s.trace()).abs() < 1e-12);

        let bad = SubsystemPartition::new(vec![2, 3], 0).unwrap();
        assert!(matches!(
            partial_trace(&s, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn band_projector_from_orthonormal_vectors() {
        let v0 = ComplexVector::basis_state(4, 1).unwrap();
        let v1 = ComplexVector::basis_state(4, 3).unwrap();
        let p = make_band_projector(&[v0, v1]).unwrap();
        assert_eq!(p.rank(), 2);
        let expect = Projector::from_basis_indices(4, &[1, 3]).unwrap();
        assert!(p.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn band_projector_rejects_non_orthonormal_input() {
        // Two normalized but non-orthogonal vectors: must error, not fix up.
        let v0 = ComplexVector::from_real(&[1.0, 0.0]).unwrap();
        let v1 = ComplexVector::from_real(&[0.6, 0.8]).unwrap();
        assert!(matches!(
            make_band_projector(&[v0.clone(), v1]),
            Err(Error::NotOrthonormal(_))
        ));
        // Unnormalized single vector: also an error.
        let long = ComplexVector::from_real(&[2.0, 0.0]).unwrap();
        assert!(matches!(
            make_band_projector(&[long]),
            Err(Error::NotOrthonormal(_))
        ));
        assert!(make_band_projector(&[v0]).is_ok());
    }

    #[test]
    fn validate_density_reports_defects_without_failing() {
        let sx = ComplexMatrix::from_real(2, &[0., 1., 1., 0.]).unwrap();
        let report = validate_density(&sx).unwrap();
        assert!(report.hermitian_ok);
        assert!(!report.psd_ok);
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(!report.all_ok());

        let ok = ComplexMatrix::from_real(2, &[0.5, 0., 0., 0.5]).unwrap();
        assert!(validate_density(&ok).unwrap().all_ok());

        let rect = ComplexMatrix::zeros(2, 3);
        assert!(validate_density(&rect).is_err());
    }

    #[test]
    fn spectral_radius_of_scaled_pauli() {
        let h = Hamiltonian::new(
            ComplexMatrix::from_real(2, &[0., 2.5, 2.5, 0.]).unwrap(),
        )
        .unwrap();
        assert!((h.spectral_radius().unwrap() - 2.5).abs() < 1e-13);
    }
}
