//! Seeded generators for random operators, used by randomized experiments
//! and property tests. Everything is a pure function of the stream state.

use num_complex::Complex64;

use crate::eigen::eigh;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ComplexVector};
use crate::operators::{DensityOperator, Hamiltonian, Projector};
use crate::reduction::RngStream;

/// Hermitian matrix with entries of magnitude ~`scale`: a random complex
/// matrix symmetrized as (A + A^dag) / 2.
pub fn random_hermitian(dim: usize, scale: f64, rng: &mut RngStream) -> Result<Hamiltonian> {
    if dim == 0 {
        return Err(Error::EmptyInput("dimension must be positive"));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let raw = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(
            rng.next_in_range(-scale, scale),
            rng.next_in_range(-scale, scale),
        )
    });
    Hamiltonian::new(raw.hermitian_part())
}

/// Unitary drawn as the eigenvector matrix of a random Hermitian matrix.
/// Orthonormal columns to working precision; distribution is unspecified
/// beyond being seed-deterministic.
pub fn random_unitary(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    let h = random_hermitian(dim, 1.0, rng)?;
    Ok(eigh(h.matrix())?.vectors)
}

/// Rank-`rank` projector onto the span of `rank` columns of a random
/// unitary.
pub fn random_projector(dim: usize, rank: usize, rng: &mut RngStream) -> Result<Projector> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!(
            "rank must lie in 1..={dim}, got {rank}"
        )));
    }
    let u = random_unitary(dim, rng)?;
    let cols: Vec<ComplexVector> = (0..rank)
        .map(|j| ComplexVector::new((0..dim).map(|i| u.get(i, j)).collect()))
        .collect::<Result<_>>()?;
    crate::operators::make_band_projector(&cols)
}

/// Random full-rank state A A^dag / Tr(A A^dag): Hermitian, positive
/// semidefinite, unit trace by construction.
pub fn random_density(dim: usize, rng: &mut RngStream) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::EmptyInput("dimension must be positive"));
    }
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.next_in_range(-1.0, 1.0), rng.next_in_range(-1.0, 1.0))
    });
    let gram = a.mul(&a.dagger());
    let tr = gram.trace().re;
    DensityOperator::new(gram.scale_real(1.0 / tr))
}

/// Random normalized pure state.
pub fn random_pure_state(dim: usize, rng: &mut RngStream) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::EmptyInput("dimension must be positive"));
    }
    let v = ComplexVector::new(
        (0..dim)
            .map(|_| Complex64::new(rng.next_in_range(-1.0, 1.0), rng.next_in_range(-1.0, 1.0)))
            .collect(),
    )?;
    DensityOperator::pure(&v.normalized()?)
}

/// Random state supported inside the range of `p`: P S P renormalized.
pub fn random_density_in_subspace(p: &Projector, rng: &mut RngStream) -> Result<DensityOperator> {
    let s = random_density(p.dim(), rng)?;
    let compressed = ComplexMatrix::mul3(p.matrix(), s.matrix(), p.matrix());
    let tr = compressed.trace().re;
    if !(tr > 1e-12) {
        return Err(Error::NonPositiveTrace(tr));
    }
    DensityOperator::new(compressed.scale_real(1.0 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seed_deterministic() {
        let mut a = RngStream::new(5);
        let mut b = RngStream::new(5);
        let ha = random_hermitian(6, 2.0, &mut a).unwrap();
        let hb = random_hermitian(6, 2.0, &mut b).unwrap();
        assert_eq!(ha.matrix().data(), hb.matrix().data());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = RngStream::new(17);
        let u = random_unitary(8, &mut rng).unwrap();
        let gram = u.dagger().mul(&u);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn random_projector_has_requested_rank() {
        let mut rng = RngStream::new(3);
        for rank in 1..=4 {
            let p = random_projector(5, rank, &mut rng).unwrap();
            assert_eq!(p.rank(), rank);
            let sq = p.matrix().mul(p.matrix());
            assert!(sq.max_abs_diff(p.matrix()) < 1e-12);
        }
        assert!(random_projector(4, 0, &mut rng).is_err());
        assert!(random_projector(4, 5, &mut rng).is_err());
    }

    #[test]
    fn random_density_is_valid_and_subspace_variant_is_supported() {
        let mut rng = RngStream::new(11);
        let s = random_density(6, &mut rng).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-12);

        let p = random_projector(6, 2, &mut rng).unwrap();
        let inside = random_density_in_subspace(&p, &mut rng).unwrap();
        assert!(p.support_defect(&inside) < 1e-12);
    }
}
