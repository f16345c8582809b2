//! Quantum states as density operators, Born sampling of physical states
//! and Monte Carlo averages over them.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Observable, Vector, HERMITIAN_TOL};
use crate::context::{context_of, Context};
use crate::parallel::map_batches;
use crate::rng::SeedStream;
use crate::stats::{merge_pairwise, RunningStats};
use crate::valuation::{Identity, PhysicalState, Readout, Usage};
use crate::{Complex, Error, Result};

/// A density operator `rho`: hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    rho: AlgebraElement,
}

impl QuantumState {
    pub fn from_density(rho: AlgebraElement) -> Result<QuantumState> {
        let herm = rho.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density not hermitian ({herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let lowest = Observable::new(rho.clone())?.spectral()?.eigenvalues[0];
        if lowest < -HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(QuantumState { rho })
    }

    /// `|v><v| / <v|v>`
    pub fn pure(v: &Vector) -> Result<QuantumState> {
        let n = v.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("state vector must be nonzero and finite".into()));
        }
        let u = v / Complex::new(n, 0.0);
        let rho = AlgebraElement::outer(&u, &u)?;
        // exact hermiticity
        let rho = rho.hermitian_parts().0.into_element();
        Ok(QuantumState { rho })
    }

    pub fn maximally_mixed(dim: usize) -> Result<QuantumState> {
        let rho = AlgebraElement::identity(dim)?.scale(Complex::new(1.0 / dim as f64, 0.0));
        Ok(QuantumState { rho })
    }

    /// Bypass validation for densities produced by unitary conjugation of a
    /// valid state.
    pub(crate) fn from_density_unchecked(rho: AlgebraElement) -> QuantumState {
        QuantumState { rho: rho.hermitian_parts().0.into_element() }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &AlgebraElement {
        &self.rho
    }
}

/// Monte Carlo estimate with its sample standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub estimate: f64,
    pub n: u64,
    pub stderr: f64,
}

impl SampleReport {
    pub(crate) fn from_stats(s: &RunningStats) -> SampleReport {
        SampleReport { estimate: s.mean(), n: s.count(), stderr: s.stderr() }
    }
}

/// `p_k = <u_k| rho |u_k>`, clamped at zero and renormalized.
pub fn born_probabilities(psi: &QuantumState, context: &Context) -> Result<Vec<f64>> {
    let m = context.transform(&psi.rho)?;
    let mut p: Vec<f64> = (0..context.dim()).map(|k| m[(k, k)].re.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    if total <= 0.0 || total.is_nan() {
        return Err(Error::Numerical("Born weights sum to zero".into()));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = k;
            if u < acc {
                return k;
            }
        }
    }
    last_positive
}

/// Cumulative table for repeated draws from one distribution.
#[derive(Clone, Debug)]
pub(crate) struct BornSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl BornSampler {
    pub(crate) fn new(probabilities: &[f64]) -> BornSampler {
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        BornSampler { cumulative, last_positive }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // first k with u < cumulative[k]; zero-weight entries never win
        // because their cumulative value equals the previous one
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive)
            .min(self.last_positive)
    }
}

/// One physical state of `psi` in `context`, selected with Born weights.
pub fn sample_physical_state<R: Rng + ?Sized>(
    psi: &QuantumState,
    context: &Arc<Context>,
    rng: &mut R,
) -> Result<PhysicalState> {
    let p = born_probabilities(psi, context)?;
    PhysicalState::new(Arc::clone(context), sample_index(&p, rng))
}

/// Mean of `phi_i(a)` over `n` fresh physical states of `psi` drawn in the
/// context of `a`.
pub fn monte_carlo_average(
    psi: &QuantumState,
    a: &Observable,
    n: u64,
    stream: &SeedStream,
) -> Result<SampleReport> {
    Ok(monte_carlo_average_with_usage(psi, a, n, stream)?.0)
}

/// [`monte_carlo_average`] that also returns the identities it consumed.
pub fn monte_carlo_average_with_usage(
    psi: &QuantumState,
    a: &Observable,
    n: u64,
    stream: &SeedStream,
) -> Result<(SampleReport, Usage)> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if psi.dim() != a.dim() {
        return Err(Error::DimensionMismatch { left: psi.dim(), right: a.dim() });
    }
    let context = Arc::new(context_of(a)?);
    let readout = Readout::new(&context, a)?;
    let sampler = BornSampler::new(&born_probabilities(psi, &context)?);

    let parts = map_batches(n, stream.execution(), |batch| -> Result<_> {
        let mut rng = stream.replica(batch.index);
        let mut stats = RunningStats::new();
        let tags = Identity::reserve(batch.len);
        for tag in tags.clone() {
            let k = sampler.draw(&mut rng);
            let phi = PhysicalState::with_reserved(Arc::clone(&context), k, tag)?;
            stats.push(phi.read(&readout)?);
        }
        Ok((stats, tags))
    });
    let mut stats = Vec::with_capacity(parts.len());
    let mut identities = Vec::with_capacity(parts.len());
    for part in parts {
        let (s, r) = part?;
        stats.push(s);
        identities.push(r);
    }
    let report = SampleReport::from_stats(&merge_pairwise(stats));
    Ok((report, Usage { identities, observables: vec![a.clone()] }))
}

/// `Tr(rho a)`; for non-hermitian `a = A + iB` this is `Psi(A) + i Psi(B)`.
pub fn quantum_average(psi: &QuantumState, a: &AlgebraElement) -> Result<Complex> {
    Ok(psi.rho.mul(a)?.trace())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbsReport {
    /// `|Psi(R* S)|^2`
    pub lhs: f64,
    /// `Psi(R* R) Psi(S* S)`
    pub rhs: f64,
}

impl CbsReport {
    pub const SLACK: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + Self::SLACK
    }
}

/// Cauchy-Bunyakovsky-Schwarz for the state functional.
pub fn check_cbs(psi: &QuantumState, r: &AlgebraElement, s: &AlgebraElement) -> Result<CbsReport> {
    let rs = quantum_average(psi, &r.adjoint().mul(s)?)?;
    let rr = quantum_average(psi, &r.adjoint().mul(r)?)?.re;
    let ss = quantum_average(psi, &s.adjoint().mul(s)?)?.re;
    Ok(CbsReport { lhs: rs.norm_sqr(), rhs: rr * ss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli::*;
    use crate::parallel::Execution;
    use crate::random;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn plus_x() -> QuantumState {
        QuantumState::pure(&Vector::from_row_slice(&[c(1.0), c(1.0)])).unwrap()
    }

    fn zero() -> QuantumState {
        QuantumState::pure(&Vector::from_row_slice(&[c(1.0), c(0.0)])).unwrap()
    }

    fn singlet() -> QuantumState {
        QuantumState::pure(&Vector::from_row_slice(&[c(0.), c(1.), c(-1.), c(0.)])).unwrap()
    }

    #[test]
    fn density_validation() {
        let bad_trace = AlgebraElement::identity(2).unwrap();
        assert!(QuantumState::from_density(bad_trace).is_err());
        let negative = Observable::diagonal(&[1.5, -0.5]).unwrap().into_element();
        assert!(QuantumState::from_density(negative).is_err());
        let nonherm = AlgebraElement::from_rows(2, &[c(0.5), c(0.1), c(0.0), c(0.5)]).unwrap();
        assert!(QuantumState::from_density(nonherm).is_err());
        assert!(QuantumState::from_density(QuantumState::maximally_mixed(3).unwrap().rho().clone()).is_ok());
    }

    #[test]
    fn born_examples() {
        let can2 = Context::canonical(2).unwrap();
        let p = born_probabilities(&plus_x(), &can2).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        assert_eq!(born_probabilities(&zero(), &can2).unwrap(), vec![1.0, 0.0]);
        // oracle: singlet amplitudes (0, 1, -1, 0)/sqrt2 in the product basis
        let p = born_probabilities(&singlet(), &Context::canonical(4).unwrap()).unwrap();
        let expected = [0.0, 0.5, 0.5, 0.0];
        for (x, y) in p.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_examples() {
        let ctx = Arc::new(Context::canonical(2).unwrap());
        let mut rng = SeedStream::new(5).replica(0);
        for _ in 0..1000 {
            assert_eq!(sample_physical_state(&zero(), &ctx, &mut rng).unwrap().outcome_index(), 0);
        }
        let a = sample_physical_state(&plus_x(), &ctx, &mut rng).unwrap();
        let b = sample_physical_state(&plus_x(), &ctx, &mut rng).unwrap();
        assert_ne!(a.identity(), b.identity());
    }

    #[test]
    fn sampling_frequency_plus_x() {
        let ctx = Context::canonical(2).unwrap();
        let sampler = BornSampler::new(&born_probabilities(&plus_x(), &ctx).unwrap());
        let mut rng = SeedStream::new(6).replica(0);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| sampler.draw(&mut rng) == 0).count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 3.0 * 0.5 / 1000.0, "{freq}");
    }

    #[test]
    fn sampler_never_picks_zero_weight() {
        let s = BornSampler::new(&[0.0, 0.5, 0.5, 0.0]);
        let mut rng = SeedStream::new(8).replica(0);
        for _ in 0..100_000 {
            let k = s.draw(&mut rng);
            assert!(k == 1 || k == 2);
        }
        assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
    }

    #[test]
    fn monte_carlo_examples() {
        let s = SeedStream::new(1);
        let r = monte_carlo_average(&zero(), &sigma_z(), 10_000, &s).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.stderr, 0.0);

        let r = monte_carlo_average(&plus_x(), &sigma_z(), 1_000_000, &s).unwrap();
        assert!(r.estimate.abs() <= 3e-3, "{r:?}");

        let mixed = QuantumState::maximally_mixed(2).unwrap();
        let a = sigma_z().sum(&Observable::scalar(2, 2.0).unwrap()).unwrap();
        let exact = quantum_average(&mixed, a.element()).unwrap();
        assert!((exact.re - 2.0).abs() < 1e-15);
        let r = monte_carlo_average(&mixed, &a, 100_000, &s).unwrap();
        assert!((r.estimate - 2.0).abs() <= 3.0 * r.stderr, "{r:?}");
        assert!(monte_carlo_average(&mixed, &a, 0, &s).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic_across_execution_modes() {
        let mut rng = SeedStream::new(4).replica(0);
        let psi = random::mixed_state(5, &mut rng).unwrap();
        let a = random::hermitian(5, &mut rng).unwrap();
        let s = SeedStream::new(77);
        let par = monte_carlo_average(&psi, &a, 50_000, &s.clone().with_execution(Execution::Parallel)).unwrap();
        let seq = monte_carlo_average(&psi, &a, 50_000, &s.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn quantum_average_examples() {
        let mut rng = SeedStream::new(2).replica(0);
        let psi = random::mixed_state(3, &mut rng).unwrap();
        let one = quantum_average(&psi, &AlgebraElement::identity(3).unwrap()).unwrap();
        assert!((one - c(1.0)).norm() < 1e-12);
        assert_eq!(quantum_average(&zero(), sigma_x().element()).unwrap(), c(0.0));
        let zz = sigma_z().tensor(&sigma_z()).unwrap();
        assert!((quantum_average(&singlet(), zz.element()).unwrap() - c(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn cbs_examples() {
        let mut rng = SeedStream::new(3).replica(0);
        let psi = random::mixed_state(3, &mut rng).unwrap();
        let r = random::element(3, &mut rng).unwrap();
        let rep = check_cbs(&psi, &r, &r).unwrap();
        assert!((rep.lhs - rep.rhs).abs() <= 1e-12 * rep.rhs.max(1.0));

        let mixed = QuantumState::maximally_mixed(2).unwrap();
        let rep = check_cbs(&mixed, sigma_x().element(), sigma_z().element()).unwrap();
        assert!(rep.lhs.abs() < 1e-15);
        assert!((rep.rhs - 1.0).abs() < 1e-15);
        assert!(rep.holds());

        for i in 0..500 {
            let d = 1 + i % 8;
            let psi = random::state(d, &mut rng).unwrap();
            let r = random::element(d, &mut rng).unwrap();
            let s = random::element(d, &mut rng).unwrap();
            assert!(check_cbs(&psi, &r, &s).unwrap().holds());
        }
    }

    #[test]
    fn linearity_and_positivity() {
        let mut rng = SeedStream::new(10).replica(0);
        for d in 2..=6 {
            let psi = random::state(d, &mut rng).unwrap();
            let a = random::hermitian(d, &mut rng).unwrap();
            let b = random::hermitian(d, &mut rng).unwrap();
            let sum = quantum_average(&psi, a.sum(&b).unwrap().element()).unwrap();
            let parts = quantum_average(&psi, a.element()).unwrap() + quantum_average(&psi, b.element()).unwrap();
            assert!((sum - parts).norm() <= 1e-12);
            assert!(quantum_average(&psi, a.square().element()).unwrap().re >= -1e-12);
        }
    }

    #[test]
    fn norm_is_sup_of_state_values() {
        let mut rng = SeedStream::new(12).replica(0);
        let r = random::element(3, &mut rng).unwrap();
        let rr = r.adjoint().mul(&r).unwrap();
        let norm2 = r.operator_norm().powi(2);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let psi = random::pure_state(3, &mut rng).unwrap();
            let v = quantum_average(&psi, &rr).unwrap().re;
            assert!(v <= norm2 * (1.0 + 1e-12));
            best = best.max(v);
        }
        assert!(best > 0.9 * norm2);
        let spec = Observable::new(rr.clone()).unwrap().spectral().unwrap();
        let top = spec.eigenvector(2);
        let exact = quantum_average(&QuantumState::pure(&top).unwrap(), &rr).unwrap().re;
        assert!((exact - norm2).abs() <= 1e-9 * norm2.max(1.0));
    }
}
