//! Physical states: contextual, dispersion-free valuations.
//!
//! A [`PhysicalState`] fixes a context and one joint eigenvector index of
//! it. Evaluated on an observable diagonal in that context it returns the
//! eigenvalue the index selects; on any other observable it is undefined and
//! evaluation fails with [`Error::IrrelevantState`]. Within one context the
//! valuation is additive and multiplicative, but it is not linear across
//! contexts: no state is relevant for both `sigma_z` and `sigma_x`.
//!
//! Every state carries an identity tag drawn from a process-wide counter.
//! Tags never repeat, and [`audit_usage`] checks that no tag was consumed by
//! two experiment records.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Observable, HERMITIAN_TOL};
use crate::context::Context;
use crate::{Error, Result};

static NEXT_IDENTITY: AtomicU64 = AtomicU64::new(1);

/// Unique tag of a physical state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Identity(u64);

impl Identity {
    pub fn fresh() -> Identity {
        Identity(NEXT_IDENTITY.fetch_add(1, Ordering::Relaxed))
    }

    /// Reserve `n` consecutive tags at once.
    pub fn reserve(n: u64) -> Range<u64> {
        let start = NEXT_IDENTITY.fetch_add(n, Ordering::Relaxed);
        start..start + n
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct PhysicalState {
    context: Arc<Context>,
    outcome_index: usize,
    identity: Identity,
}

impl PhysicalState {
    pub fn new(context: Arc<Context>, outcome_index: usize) -> Result<PhysicalState> {
        Self::check_index(&context, outcome_index)?;
        Ok(PhysicalState { context, outcome_index, identity: Identity::fresh() })
    }

    /// State with a tag taken from a block previously obtained with
    /// [`Identity::reserve`]. Each tag of a block must be used once.
    pub fn with_reserved(context: Arc<Context>, outcome_index: usize, tag: u64) -> Result<PhysicalState> {
        Self::check_index(&context, outcome_index)?;
        Ok(PhysicalState { context, outcome_index, identity: Identity(tag) })
    }

    fn check_index(context: &Context, k: usize) -> Result<()> {
        if k >= context.dim() {
            return Err(Error::InvalidArgument(format!(
                "outcome index {k} out of range for dimension {}",
                context.dim()
            )));
        }
        Ok(())
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.context
    }

    pub fn outcome_index(&self) -> usize {
        self.outcome_index
    }

    pub fn identity(&self) -> Identity {
        self.identity
    }

    pub fn is_relevant(&self, a: &Observable) -> bool {
        is_relevant(self, a)
    }

    pub fn evaluate(&self, a: &Observable) -> Result<f64> {
        evaluate(self, a)
    }

    /// Value of a pre-diagonalized observable. The readout must belong to
    /// this state's context.
    pub fn read(&self, readout: &Readout) -> Result<f64> {
        if !Arc::ptr_eq(&self.context, &readout.context) && *self.context != *readout.context {
            return Err(Error::IrrelevantState {
                identity: Some(self.identity.0),
                deviation: self.context.distance(&readout.context),
            });
        }
        Ok(readout.values[self.outcome_index])
    }
}

/// An observable diagonalized once in a context, for repeated evaluation by
/// many states of that context.
#[derive(Clone, Debug)]
pub struct Readout {
    context: Arc<Context>,
    values: Vec<f64>,
}

impl Readout {
    pub fn new(context: &Arc<Context>, a: &Observable) -> Result<Readout> {
        Ok(Readout { context: Arc::clone(context), values: context.diagonal_values(a)? })
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.context
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn is_relevant(phi: &PhysicalState, a: &Observable) -> bool {
    crate::context::is_diagonal_in(a, &phi.context, HERMITIAN_TOL)
}

/// `phi(a)`: the eigenvalue of `a` selected by `phi`.
pub fn evaluate(phi: &PhysicalState, a: &Observable) -> Result<f64> {
    let values = phi.context.diagonal_values(a).map_err(|e| match e {
        Error::IrrelevantState { deviation, .. } => {
            Error::IrrelevantState { identity: Some(phi.identity.0), deviation }
        }
        other => other,
    })?;
    Ok(values[phi.outcome_index])
}

/// Tolerance for the postulate checks.
pub const POSTULATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostulateReport {
    /// `|phi(lambda I) - lambda|` maximized over the probe scalars.
    pub unity: f64,
    /// `|phi(a + b) - phi(a) - phi(b)|`
    pub additivity: f64,
    /// `|phi(ab) - phi(a) phi(b)|`
    pub multiplicativity: f64,
    /// `max(|phi(a^2) - phi(a)^2|, |phi(b^2) - phi(b)^2|)`
    pub dispersion: f64,
    /// `min(phi(a^2), phi(b^2))`
    pub min_square: f64,
}

impl PostulateReport {
    pub fn passed(&self) -> bool {
        self.unity <= POSTULATE_TOL
            && self.additivity <= POSTULATE_TOL
            && self.multiplicativity <= POSTULATE_TOL
            && self.dispersion <= POSTULATE_TOL
            && self.min_square >= -POSTULATE_TOL
    }

    /// Largest violation among the equalities.
    pub fn max_deviation(&self) -> f64 {
        self.unity
            .max(self.additivity)
            .max(self.multiplicativity)
            .max(self.dispersion)
            .max((-self.min_square).max(0.0))
    }
}

/// Measure the valuation laws on a pair of observables relevant for `phi`:
/// unit normalization, additivity and multiplicativity on the commuting
/// pair, zero dispersion and positivity of squares.
pub fn check_postulates(phi: &PhysicalState, a: &Observable, b: &Observable) -> Result<PostulateReport> {
    for (name, o) in [("a", a), ("b", b)] {
        if !phi.is_relevant(o) {
            return Err(Error::InvalidArgument(format!(
                "observable {name} is not relevant for physical state {}",
                phi.identity.0
            )));
        }
    }
    let d = a.dim();
    let fa = phi.evaluate(a)?;
    let fb = phi.evaluate(b)?;

    let mut unity = 0.0f64;
    for lambda in [0.0, 1.0, -2.5, fa] {
        let v = phi.evaluate(&Observable::scalar(d, lambda)?)?;
        unity = unity.max((v - lambda).abs());
    }
    let additivity = (phi.evaluate(&a.sum(b)?)? - fa - fb).abs();
    let multiplicativity = (phi.evaluate(&a.product(b)?)? - fa * fb).abs();
    let fa2 = phi.evaluate(&a.square())?;
    let fb2 = phi.evaluate(&b.square())?;
    let dispersion = (fa2 - fa * fa).abs().max((fb2 - fb * fb).abs());
    Ok(PostulateReport {
        unity,
        additivity,
        multiplicativity,
        dispersion,
        min_square: fa2.min(fb2),
    })
}

/// The identities consumed by one experiment record and the observables
/// each of them was evaluated on.
#[derive(Clone, Debug)]
pub struct Usage {
    pub identities: Vec<Range<u64>>,
    pub observables: Vec<Observable>,
}

impl Usage {
    pub fn count(&self) -> u64 {
        self.identities.iter().map(|r| r.end - r.start).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub records: usize,
    pub identities: u64,
}

/// Exhaustive non-reuse check over a set of experiment records: every
/// identity belongs to exactly one record, and within a record all
/// evaluated observables commute. Together these mean no identity was ever
/// evaluated on two noncommuting observables.
pub fn audit_usage(records: &[&Usage]) -> Result<AuditReport> {
    for (i, u) in records.iter().enumerate() {
        for (j, a) in u.observables.iter().enumerate() {
            for b in &u.observables[j + 1..] {
                if !a.commutes(b, HERMITIAN_TOL) {
                    return Err(Error::ModelInvariant(format!(
                        "record {i} evaluates noncommuting observables on the same states"
                    )));
                }
            }
        }
    }
    let mut spans: Vec<(u64, u64, usize)> = records
        .iter()
        .enumerate()
        .flat_map(|(i, u)| u.identities.iter().map(move |r| (r.start, r.end, i)))
        .filter(|(s, e, _)| e > s)
        .collect();
    spans.sort_unstable();
    for w in spans.windows(2) {
        let (_, end, first) = w[0];
        let (start, _, second) = w[1];
        if start < end {
            return Err(Error::ModelInvariant(format!(
                "physical state {start} used by records {first} and {second}"
            )));
        }
    }
    Ok(AuditReport {
        records: records.len(),
        identities: spans.iter().map(|(s, e, _)| e - s).sum(),
    })
}
