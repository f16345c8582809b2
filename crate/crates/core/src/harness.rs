//! Randomized property harness for physical states and ensembles.
//!
//! Each suite draws its cases from a labelled sub-stream, so a given seed
//! reproduces the same cases regardless of execution mode. Every physical
//! state the harness creates is recorded and run through [`audit_usage`].

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Observable;
use crate::ensemble::{check_cbs, monte_carlo_average_with_usage, quantum_average};
use crate::parallel::map_items;
use crate::random;
use crate::rng::SeedStream;
use crate::valuation::{audit_usage, check_postulates, AuditReport, PhysicalState, Usage};
use crate::{Error, Result};

/// Estimates farther than this many standard errors count as misses.
pub const SIGMA_BAND: f64 = 4.0;
/// Tolerance for linearity of the quantum average.
pub const LINEARITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostulateSummary {
    pub cases: usize,
    pub dims: Vec<usize>,
    pub failures: usize,
    /// Largest violation of unity, additivity, multiplicativity or dispersion.
    pub max_deviation: f64,
    /// Smallest `phi(a^2)` seen.
    pub min_square: f64,
    pub audit: AuditReport,
}

impl PostulateSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `cases` random (context, index, commuting pair) draws, cycling through `dims`.
pub fn postulate_suite(cases: usize, dims: &[usize], stream: &SeedStream) -> Result<PostulateSummary> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("no dimensions given".into()));
    }
    let stream = stream.derive("postulates");
    let indices: Vec<usize> = (0..cases).collect();
    let results = map_items(&indices, stream.execution(), |&i| -> Result<_> {
        let mut rng = stream.derive_indexed("case", i as u64).replica(0);
        let d = dims[i % dims.len()];
        let context = Arc::new(random::context(d, &mut rng)?);
        let a = random::diagonal_in(&context, &mut rng)?;
        let b = random::diagonal_in(&context, &mut rng)?;
        let phi = PhysicalState::new(context, rng.random_range(0..d))?;
        let report = check_postulates(&phi, &a, &b)?;
        let id = phi.identity().value();
        let observables = vec![a.sum(&b)?, a.product(&b)?, a.square(), b.square(), a, b];
        Ok((report, Usage { identities: std::iter::once(id..id + 1).collect(), observables }))
    });
    let mut failures = 0;
    let mut max_deviation = 0.0f64;
    let mut min_square = f64::INFINITY;
    let mut usages = Vec::with_capacity(cases);
    for r in results {
        let (report, usage) = r?;
        if !report.passed() {
            failures += 1;
        }
        max_deviation = max_deviation.max(report.max_deviation());
        min_square = min_square.min(report.min_square);
        usages.push(usage);
    }
    let audit = audit_usage(&usages.iter().collect::<Vec<_>>())?;
    Ok(PostulateSummary { cases, dims: dims.to_vec(), failures, max_deviation, min_square, audit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub trials: usize,
    pub samples: u64,
    pub within_band: usize,
    /// Largest `|estimate - Tr(rho a)| / stderr`.
    pub max_z: f64,
    /// Largest `|Psi(a + b) - Psi(a) - Psi(b)|`.
    pub max_linearity: f64,
    /// How many pairs `(a, b)` failed to commute.
    pub noncommuting_pairs: usize,
    /// Smallest `Psi(a^2)`.
    pub min_square_average: f64,
    pub audit: AuditReport,
}

impl ConvergenceSummary {
    /// At least 99% of trials inside the band and linearity to 1e-12.
    pub fn passed(&self) -> bool {
        self.within_band * 100 >= self.trials * 99
            && self.max_linearity <= LINEARITY_TOL
            && self.min_square_average >= -LINEARITY_TOL
    }
}

fn z_score(diff: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        diff.abs() / stderr
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `trials` random `(psi, a, b)` triples: Monte Carlo convergence of the
/// mean of `a` with `samples` draws, and linearity of the exact average.
pub fn convergence_suite(trials: usize, samples: u64, dims: &[usize], stream: &SeedStream) -> Result<ConvergenceSummary> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("no dimensions given".into()));
    }
    let stream = stream.derive("convergence");
    let mut summary = ConvergenceSummary {
        trials,
        samples,
        within_band: 0,
        max_z: 0.0,
        max_linearity: 0.0,
        noncommuting_pairs: 0,
        min_square_average: f64::INFINITY,
        audit: AuditReport { records: 0, identities: 0 },
    };
    let mut usages = Vec::with_capacity(trials);
    for i in 0..trials {
        let case = stream.derive_indexed("case", i as u64);
        let mut rng = case.replica(0);
        let d = dims[i % dims.len()];
        let psi = random::state(d, &mut rng)?;
        let a = random::hermitian(d, &mut rng)?;
        let b = random::hermitian(d, &mut rng)?;

        let exact = quantum_average(&psi, a.element())?.re;
        let (mc, usage) = monte_carlo_average_with_usage(&psi, &a, samples, &case.derive("mc"))?;
        usages.push(usage);
        let z = z_score(mc.estimate - exact, mc.stderr);
        if z <= SIGMA_BAND {
            summary.within_band += 1;
        }
        summary.max_z = summary.max_z.max(z);

        let sum = quantum_average(&psi, a.sum(&b)?.element())?;
        let parts = quantum_average(&psi, a.element())? + quantum_average(&psi, b.element())?;
        summary.max_linearity = summary.max_linearity.max((sum - parts).norm());
        if !a.commutes(&b, crate::algebra::HERMITIAN_TOL) {
            summary.noncommuting_pairs += 1;
        }
        let sq = quantum_average(&psi, a.square().element())?.re;
        summary.min_square_average = summary.min_square_average.min(sq);
    }
    summary.audit = audit_usage(&usages.iter().collect::<Vec<_>>())?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbsSummary {
    pub trials: usize,
    pub holds: usize,
    /// Largest `|Psi(R* S)|^2 - Psi(R* R) Psi(S* S)`; nonpositive when all hold.
    pub worst_margin: f64,
}

impl CbsSummary {
    pub fn passed(&self) -> bool {
        self.holds == self.trials
    }
}

/// Cauchy-Bunyakovsky-Schwarz on random states and arbitrary elements.
pub fn cbs_suite(trials: usize, dims: &[usize], stream: &SeedStream) -> Result<CbsSummary> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("no dimensions given".into()));
    }
    let mut rng = stream.derive("cbs").replica(0);
    let mut summary = CbsSummary { trials, holds: 0, worst_margin: f64::NEG_INFINITY };
    for i in 0..trials {
        let d = dims[i % dims.len()];
        let psi = random::state(d, &mut rng)?;
        let r = random::element(d, &mut rng)?;
        let s = if rng.random_bool(0.2) {
            // parallel pairs saturate the bound
            r.scale(crate::Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        } else {
            random::element(d, &mut rng)?
        };
        let report = check_cbs(&psi, &r, &s)?;
        if report.holds() {
            summary.holds += 1;
        }
        summary.worst_margin = summary.worst_margin.max(report.lhs - report.rhs);
    }
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub seed: u64,
    pub postulates: PostulateSummary,
    pub convergence: ConvergenceSummary,
    pub cbs: CbsSummary,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.postulates.passed() && self.convergence.passed() && self.cbs.passed()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub postulate_cases: usize,
    pub postulate_dims: Vec<usize>,
    pub convergence_trials: usize,
    pub samples: u64,
    pub convergence_dims: Vec<usize>,
    pub cbs_trials: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            postulate_cases: 1000,
            postulate_dims: vec![2, 4, 8],
            convergence_trials: 100,
            samples: 100_000,
            convergence_dims: vec![2, 3, 4, 8],
            cbs_trials: 500,
        }
    }
}

pub fn run_harness(config: &HarnessConfig, stream: &SeedStream) -> Result<HarnessReport> {
    Ok(HarnessReport {
        seed: stream.seed(),
        postulates: postulate_suite(config.postulate_cases, &config.postulate_dims, stream)?,
        convergence: convergence_suite(config.convergence_trials, config.samples, &config.convergence_dims, stream)?,
        cbs: cbs_suite(config.cbs_trials, &config.convergence_dims, stream)?,
    })
}

/// True when no physical state can evaluate `a`, `b` and `a + b` together,
/// because no two of them commute. The linearity of the quantum average on
/// such triples has no counterpart for a single valuation.
pub fn nonlinearity_witness(a: &Observable, b: &Observable) -> Result<bool> {
    let sum = a.sum(b)?;
    let tol = crate::algebra::HERMITIAN_TOL;
    Ok(!a.commutes(b, tol) && !a.commutes(&sum, tol) && !b.commutes(&sum, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli::*;
    use crate::parallel::Execution;

    #[test]
    fn postulate_suite_small() {
        let s = postulate_suite(60, &[2, 4, 8], &SeedStream::new(1)).unwrap();
        assert!(s.passed(), "{s:?}");
        assert_eq!(s.audit.identities, 60);
        assert!(s.min_square >= 0.0);
    }

    #[test]
    fn postulate_suite_is_mode_independent() {
        let s = SeedStream::new(4);
        let p = postulate_suite(30, &[2, 4], &s.clone().with_execution(Execution::Parallel)).unwrap();
        let q = postulate_suite(30, &[2, 4], &s.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(p.max_deviation, q.max_deviation);
        assert_eq!(p.min_square, q.min_square);
    }

    #[test]
    fn convergence_suite_small() {
        let s = convergence_suite(10, 20_000, &[2, 3], &SeedStream::new(2)).unwrap();
        assert!(s.max_linearity <= LINEARITY_TOL);
        assert!(s.within_band >= 9, "{s:?}");
        assert!(s.noncommuting_pairs >= 9);
        assert_eq!(s.audit.identities, 10 * 20_000);
    }

    #[test]
    fn cbs_suite_small() {
        let s = cbs_suite(200, &[2, 3, 4], &SeedStream::new(3)).unwrap();
        assert!(s.passed(), "{s:?}");
    }

    #[test]
    fn rejects_empty_dims() {
        assert!(postulate_suite(1, &[], &SeedStream::new(0)).is_err());
    }

    #[test]
    fn witness_examples() {
        assert!(nonlinearity_witness(&sigma_z(), &sigma_x()).unwrap());
        assert!(!nonlinearity_witness(&sigma_z(), &sigma_z()).unwrap());
    }
}
