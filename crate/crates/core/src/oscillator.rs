//! Truncated harmonic oscillator with a linear drive, Fock-band projectors,
//! and quasi-classical (coherent) states: the concrete high-dimensional
//! system the Zeno schedules are exercised on.
//!
//! The bare oscillator commutes with every band projector, so a linear
//! drive lambda (a + a^dag) supplies the inter-band leakage that makes
//! repeated questioning do something.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ComplexVector};
use crate::operators::{DensityOperator, Hamiltonian, Projector};
use crate::reduction::KrausChannel;
use crate::tol::{COHERENT_HEADROOM, MAX_BAND_TAIL, TOL_BAND_SUPPORT};
use crate::zeno::{run_zeno_deterministic, MeasurementSchedule, ZenoTrajectory};

/// Truncated oscillator parameters: Fock levels 0..dim-1, frequency omega
/// (hbar = 1), linear drive strength lambda.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorSpec {
    pub dim: usize,
    pub omega: f64,
    pub lambda: f64,
}

impl OscillatorSpec {
    pub fn new(dim: usize, omega: f64, lambda: f64) -> Result<Self> {
        if dim < 4 {
            return Err(Error::InvalidParameter(format!(
                "oscillator needs dim >= 4, got {dim}"
            )));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite lambda: {lambda}")));
        }
        Ok(Self { dim, omega, lambda })
    }

    /// Default drive 0.2 / omega: strong enough to leak between bands on
    /// O(1) times, weak enough that bands stay meaningful.
    pub fn with_default_drive(dim: usize, omega: f64) -> Result<Self> {
        Self::new(dim, omega, 0.2 / omega)
    }
}

/// Contiguous Fock band n_min..=n_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandSpec {
    pub n_min: usize,
    pub n_max: usize,
}

impl BandSpec {
    pub fn new(n_min: usize, n_max: usize) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::InvalidParameter(format!(
                "band bounds out of order: [{n_min}, {n_max}]"
            )));
        }
        Ok(Self { n_min, n_max })
    }

    pub fn width(&self) -> usize {
        self.n_max - self.n_min + 1
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.n_min..=self.n_max).contains(&k)
    }
}

/// H = omega (n + 1/2) + lambda (a + a^dag) on the truncated space:
/// diagonal omega (k + 1/2), first off-diagonals lambda sqrt(k+1).
pub fn build_oscillator(spec: &OscillatorSpec) -> Result<Hamiltonian> {
    let d = spec.dim;
    let mut m = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        m.set(k, k, Complex64::new(spec.omega * (k as f64 + 0.5), 0.0));
        if k + 1 < d {
            let coupling = Complex64::new(spec.lambda * ((k + 1) as f64).sqrt(), 0.0);
            m.set(k, k + 1, coupling);
            m.set(k + 1, k, coupling);
        }
    }
    Hamiltonian::new(m)
}

/// Projector onto Fock levels n_min..=n_max.
pub fn band_projector(band: &BandSpec, dim: usize) -> Result<Projector> {
    if band.n_max >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: band.n_max,
        });
    }
    let indices: Vec<usize> = (band.n_min..=band.n_max).collect();
    Projector::from_basis_indices(dim, &indices)
}

/// Truncated coherent state: amplitudes c_k = exp(-|alpha|^2/2) alpha^k /
/// sqrt(k!) for k < dim, renormalized to unit norm.
///
/// Requires |alpha|^2 <= dim * `COHERENT_HEADROOM` so the discarded tail is
/// negligible and the renormalization is a small correction.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<ComplexVector> {
    if dim == 0 {
        return Err(Error::EmptyInput("dimension must be positive"));
    }
    let mu = alpha.norm_sqr();
    if !mu.is_finite() {
        return Err(Error::InvalidParameter("non-finite alpha".into()));
    }
    if mu > dim as f64 * COHERENT_HEADROOM {
        return Err(Error::InvalidParameter(format!(
            "|alpha|^2 = {mu:.3} too large for truncation dim {dim}; needs |alpha|^2 <= dim/4"
        )));
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new((-mu / 2.0).exp(), 0.0);
    amps.push(c);
    for k in 1..dim {
        c = c * alpha / (k as f64).sqrt();
        amps.push(c);
    }
    let v = ComplexVector::new(amps)?;
    v.normalized()
}

/// Coherent amplitudes restricted to a Fock band and renormalized there:
/// the quasi-classical state of energy ~|alpha|^2 conditioned on lying in
/// the band. Exactly band-supported by construction, so it satisfies any
/// band-support precondition regardless of |alpha|.
pub fn band_truncated_coherent(
    alpha: Complex64,
    band: &BandSpec,
    dim: usize,
) -> Result<ComplexVector> {
    if band.n_max >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: band.n_max,
        });
    }
    let mu = alpha.norm_sqr();
    if !mu.is_finite() {
        return Err(Error::InvalidParameter("non-finite alpha".into()));
    }
    // Unnormalized amplitudes alpha^k / sqrt(k!) built recursively; the
    // exp(-|alpha|^2/2) prefactor cancels in the band renormalization.
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let mut c = Complex64::new(1.0, 0.0);
    for k in 1..=band.n_max {
        c = c * alpha / (k as f64).sqrt();
        if band.contains(k) {
            amps[k] = c;
        }
    }
    if band.contains(0) {
        amps[0] = Complex64::new(1.0, 0.0);
    }
    let v = ComplexVector::new(amps)?;
    v.normalized()
}

/// Sum of w_i |alpha_i><alpha_i| over truncated coherent states: trace is
/// the sum of the weights.
pub fn quasiclassical_mixture(
    components: &[(Complex64, f64)],
    dim: usize,
) -> Result<DensityOperator> {
    if components.is_empty() {
        return Err(Error::EmptyInput("mixture needs at least one component"));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for &(alpha, weight) in components {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights must be positive, got {weight}"
            )));
        }
        let v = coherent_state(alpha, dim)?;
        m = m.add(&v.outer().scale_real(weight));
    }
    DensityOperator::new(m)
}

/// Like `quasiclassical_mixture` but with every component band-truncated,
/// so the result is exactly band-supported.
pub fn band_quasiclassical_mixture(
    components: &[(Complex64, f64)],
    band: &BandSpec,
    dim: usize,
) -> Result<DensityOperator> {
    if components.is_empty() {
        return Err(Error::EmptyInput("mixture needs at least one component"));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for &(alpha, weight) in components {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights must be positive, got {weight}"
            )));
        }
        let v = band_truncated_coherent(alpha, band, dim)?;
        m = m.add(&v.outer().scale_real(weight));
    }
    DensityOperator::new(m)
}

/// Runs a Zeno schedule questioning the band projector under the driven
/// oscillator.
///
/// The initial state must be band-supported. Tails up to `MAX_BAND_TAIL`
/// of the trace are projected into the band and the trace restored (coherent
/// mixtures are never exactly band-limited); anything larger is an error.
pub fn run_band_zeno(
    spec: &OscillatorSpec,
    band: &BandSpec,
    s0: &DensityOperator,
    schedule: &MeasurementSchedule,
    channel: Option<&KrausChannel>,
) -> Result<ZenoTrajectory> {
    let h = build_oscillator(spec)?;
    let p = band_projector(band, spec.dim)?;
    if s0.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            expected: spec.dim,
            got: s0.dim(),
        });
    }

    let defect = p.support_defect(s0);
    let tolerance = TOL_BAND_SUPPORT * s0.trace().max(1.0);
    let state = if defect <= tolerance {
        s0.clone()
    } else {
        let trace = s0.trace();
        let compressed = ComplexMatrix::mul3(p.matrix(), s0.matrix(), p.matrix());
        let kept = compressed.trace().re;
        let tail = 1.0 - kept / trace;
        if tail > MAX_BAND_TAIL {
            return Err(Error::OutsideSubspace {
                defect: tail,
                tol: MAX_BAND_TAIL,
            });
        }
        DensityOperator::new(compressed.scale_real(trace / kept))?
    };
    run_zeno_deterministic(&state, &h, &p, schedule, channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigh;
    use crate::reduction::dephasing_channel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn undriven_spectrum_is_equally_spaced() {
        let spec = OscillatorSpec::new(4, 1.0, 0.0).unwrap();
        let h = build_oscillator(&spec).unwrap();
        for k in 0..4 {
            assert_eq!(h.matrix().get(k, k), c(k as f64 + 0.5, 0.0));
        }
        let spec = OscillatorSpec::new(12, 1.7, 0.0).unwrap();
        let h = build_oscillator(&spec).unwrap();
        let eig = eigh(h.matrix()).unwrap();
        for (k, &e) in eig.values.iter().enumerate() {
            assert!((e - 1.7 * (k as f64 + 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn drive_sits_on_first_off_diagonals_with_ladder_elements() {
        // <k| a + a^dag |k+1> = sqrt(k+1): the drive couples neighbors only.
        let spec = OscillatorSpec::new(6, 1.0, 0.3).unwrap();
        let h = build_oscillator(&spec).unwrap();
        for k in 0..5 {
            let expect = 0.3 * ((k + 1) as f64).sqrt();
            assert!((h.matrix().get(k, k + 1).re - expect).abs() < 1e-15);
            assert!((h.matrix().get(k + 1, k).re - expect).abs() < 1e-15);
        }
        assert!(h.matrix().get(0, 2).norm() < 1e-15);
        assert!(h.matrix().hermiticity_defect() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(OscillatorSpec::new(3, 1.0, 0.0).is_err());
        assert!(OscillatorSpec::new(4, 0.0, 0.0).is_err());
        assert!(OscillatorSpec::new(4, -1.0, 0.0).is_err());
        let spec = OscillatorSpec::with_default_drive(8, 2.0).unwrap();
        assert!((spec.lambda - 0.1).abs() < 1e-15);
    }

    #[test]
    fn band_projector_selects_the_band() {
        let band = BandSpec::new(0, 0).unwrap();
        let p = band_projector(&band, 2).unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(p.matrix().get(0, 0), c(1., 0.));
        assert_eq!(p.matrix().get(1, 1), c(0., 0.));

        let band = BandSpec::new(2, 5).unwrap();
        let p = band_projector(&band, 8).unwrap();
        assert_eq!(p.rank(), 4);

        assert!(band_projector(&BandSpec::new(2, 9).unwrap(), 8).is_err());
        assert!(BandSpec::new(5, 2).is_err());
    }

    #[test]
    fn band_commutes_with_undriven_hamiltonian_exactly() {
        let spec = OscillatorSpec::new(8, 1.3, 0.0).unwrap();
        let h = build_oscillator(&spec).unwrap();
        let p = band_projector(&BandSpec::new(2, 4).unwrap(), 8).unwrap();
        let comm = h
            .matrix()
            .mul(p.matrix())
            .sub(&p.matrix().mul(h.matrix()));
        assert_eq!(comm.max_abs(), 0.0, "both diagonal, commutator exactly zero");
    }

    #[test]
    fn coherent_state_at_zero_is_ground_state() {
        let v = coherent_state(c(0., 0.), 8).unwrap();
        assert!((v.get(0) - c(1., 0.)).norm() < 1e-15);
        for k in 1..8 {
            assert!(v.get(k).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_state_mean_fock_number_and_norm() {
        let alpha = c(2.0_f64.sqrt(), 0.0); // |alpha|^2 = 2
        let v = coherent_state(alpha, 32).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let mean: f64 = (0..32).map(|k| k as f64 * v.get(k).norm_sqr()).sum();
        assert!((mean - 2.0).abs() < 0.02, "mean Fock number {mean} vs 2 within 1%");
    }

    #[test]
    fn coherent_overlap_matches_closed_form() {
        // <alpha | -alpha> = exp(-2|alpha|^2).
        let a = coherent_state(c(1., 0.), 32).unwrap();
        let b = coherent_state(c(-1., 0.), 32).unwrap();
        let overlap = a.inner(&b).norm();
        assert!((overlap - (-2.0_f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn coherent_populations_are_poissonian() {
        for (mu, dim) in [(2.0, 16), (2.0, 32), (3.0, 24), (1.0, 16)] {
            let v = coherent_state(c((mu as f64).sqrt(), 0.0), dim).unwrap();
            let mut log_fact = 0.0;
            for k in 0..dim {
                if k > 0 {
                    log_fact += (k as f64).ln();
                }
                let poisson = (-(mu) + k as f64 * (mu as f64).ln() - log_fact).exp();
                assert!(
                    (v.get(k).norm_sqr() - poisson).abs() < 1e-8,
                    "level {k} at mu={mu} dim={dim}"
                );
            }
        }
    }

    #[test]
    fn coherent_truncation_guard() {
        // |alpha|^2 = 9 > 32/4 = 8.
        assert!(coherent_state(c(3., 0.), 32).is_err());
        assert!(coherent_state(c(3., 0.), 64).is_ok());
    }

    #[test]
    fn mixture_trace_is_weight_sum_and_single_component_is_pure() {
        let single = quasiclassical_mixture(&[(c(1., 0.5), 1.0)], 16).unwrap();
        let v = coherent_state(c(1., 0.5), 16).unwrap();
        assert!(single.matrix().max_abs_diff(&v.outer()) < 1e-14);

        let two = quasiclassical_mixture(&[(c(1., 0.), 3.0), (c(0., 1.), 7.0)], 16).unwrap();
        assert!((two.trace() - 10.0).abs() < 1e-12);

        assert!(quasiclassical_mixture(&[], 8).is_err());
        assert!(quasiclassical_mixture(&[(c(0., 0.), 0.0)], 8).is_err());
        assert!(quasiclassical_mixture(&[(c(0., 0.), -1.0)], 8).is_err());
    }

    #[test]
    fn far_separated_mixture_has_rank_two() {
        // Overlap <2|-2> = exp(-8) ~ 3e-4: two eigenvalues near the weights,
        // the rest at overlap-squared level.
        let mix = quasiclassical_mixture(&[(c(2., 0.), 0.5), (c(-2., 0.), 0.5)], 24).unwrap();
        let eig = eigh(mix.matrix()).unwrap();
        let mut vals = eig.values.clone();
        vals.sort_by(|a, b| b.total_cmp(a));
        assert!((vals[0] - 0.5).abs() < 1e-3);
        assert!((vals[1] - 0.5).abs() < 1e-3);
        assert!(vals[2].abs() < 1e-6);
    }

    #[test]
    fn band_truncated_coherent_is_band_supported_unit_norm() {
        let band = BandSpec::new(8, 16).unwrap();
        let v = band_truncated_coherent(c(12.0_f64.sqrt(), 0.0), &band, 32).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        for k in 0..32 {
            if !band.contains(k) {
                assert_eq!(v.get(k).norm(), 0.0);
            }
        }
        // Relative amplitudes inside the band follow alpha^k/sqrt(k!):
        // |c_{k+1}/c_k| = |alpha|/sqrt(k+1).
        let mu: f64 = 12.0;
        for k in 8..16 {
            let ratio = v.get(k + 1).norm() / v.get(k).norm();
            assert!((ratio - mu.sqrt() / ((k + 1) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn undriven_band_zeno_never_leaks() {
        let spec = OscillatorSpec::new(16, 1.0, 0.0).unwrap();
        let band = BandSpec::new(4, 8).unwrap();
        let s0 = DensityOperator::pure(&ComplexVector::basis_state(16, 6).unwrap()).unwrap();
        let schedule = MeasurementSchedule::without_channel(1.0, 10).unwrap();
        let traj = run_band_zeno(&spec, &band, &s0, &schedule, None).unwrap();
        for &s in &traj.survival {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn driven_band_zeno_improves_with_question_rate() {
        let spec = OscillatorSpec::new(32, 1.0, 0.2).unwrap();
        let band = BandSpec::new(8, 16).unwrap();
        let s0 = band_quasiclassical_mixture(&[(c(12.0_f64.sqrt(), 0.0), 1.0)], &band, 32).unwrap();
        let survival = |n: usize| {
            let schedule = MeasurementSchedule::without_channel(1.0, n).unwrap();
            run_band_zeno(&spec, &band, &s0, &schedule, None)
                .unwrap()
                .final_survival()
        };
        let (s10, s100) = (survival(10), survival(100));
        assert!(
            s10 < s100,
            "survival should improve with question rate: n=10 gives {s10}, n=100 gives {s100}"
        );
        assert!(s100 < 1.0, "the drive must actually leak");
    }

    #[test]
    fn band_zeno_projects_small_tails_and_rejects_large_ones() {
        let spec = OscillatorSpec::new(16, 1.0, 0.1).unwrap();
        let band = BandSpec::new(2, 10).unwrap();
        let schedule = MeasurementSchedule::without_channel(0.5, 5).unwrap();

        // A tiny tail outside the band: accepted and projected away.
        let mut inside = band_truncated_coherent(c(2.0, 0.0), &band, 16)
            .unwrap()
            .outer();
        inside.set(14, 14, c(5e-7, 0.0));
        let s_tail = DensityOperator::new(inside).unwrap();
        let traj = run_band_zeno(&spec, &band, &s_tail, &schedule, None).unwrap();
        assert!((traj.survival[0] - 1.0).abs() < 1e-12);

        // A 20% tail: rejected.
        let mut big = band_truncated_coherent(c(2.0, 0.0), &band, 16).unwrap().outer();
        big.set(14, 14, c(0.25, 0.0));
        let s_big = DensityOperator::new(big).unwrap();
        assert!(matches!(
            run_band_zeno(&spec, &band, &s_big, &schedule, None),
            Err(Error::OutsideSubspace { .. })
        ));
    }

    #[test]
    fn branch_pair_dephasing_leaves_band_survival_unchanged() {
        // Pointer pair {band, complement}: the always-yes branch is a fixed
        // point of the channel, so survival curves at strengths 0 and 1
        // agree to round-off.
        let spec = OscillatorSpec::new(32, 1.0, 0.2).unwrap();
        let band = BandSpec::new(8, 16).unwrap();
        let p = band_projector(&band, 32).unwrap();
        let pair = vec![p.clone(), p.complement().unwrap()];
        let s0 = band_quasiclassical_mixture(&[(c(12.0_f64.sqrt(), 0.0), 1.0)], &band, 32).unwrap();

        let mut curves = Vec::new();
        for strength in [0.0, 1.0] {
            let channel = dephasing_channel(&pair, strength).unwrap();
            let schedule = MeasurementSchedule::new(
                1.0,
                25,
                strength,
                crate::zeno::ChannelPlacement::AfterQuestion,
            )
            .unwrap();
            let traj = run_band_zeno(&spec, &band, &s0, &schedule, Some(&channel)).unwrap();
            curves.push(traj.survival);
        }
        let max_dev = curves[0]
            .iter()
            .zip(&curves[1])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_dev <= 1e-12, "pair dephasing shifted survival by {max_dev}");
    }
}
