//! EPR-Bohm pair and CHSH harness.
//!
//! Two models are compared on the singlet correlation `E(a, b)`:
//!
//! * **contextual**: each run draws a fresh [`PhysicalState`] in the joint
//!   context of `A_a (x) I` and `I (x) B_b`, and the product of its two
//!   values is recorded. A state is consumed by exactly one setting pair, so
//!   the four CHSH terms are averages over disjoint sets of states.
//! * **lhv**: a hidden unit vector `lambda` uniform on the sphere fixes all
//!   outcomes at once, `A_a = sign(a . lambda)`, `B_b = -sign(b . lambda)`.
//!   All four CHSH terms are integrals over the same `lambda`, which bounds
//!   the CHSH value by 2 run by run. Its correlation is `-1 + 2 theta / pi`.
//!
//! The exact quantum value is `E(a, b) = -cos(theta_ab)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{pauli, Observable, Vector};
use crate::context::common_context;
use crate::ensemble::{born_probabilities, quantum_average, BornSampler, QuantumState};
use crate::parallel::map_batches;
use crate::random::sphere_point;
use crate::rng::SeedStream;
use crate::stats::{merge_pairwise, RunningStats};
use crate::valuation::{audit_usage, AuditReport, Identity, PhysicalState, Readout, Usage};
use crate::{Complex, Error, Result};

const UNIT_TOL: f64 = 1e-12;
/// Spin readouts farther than this from +-1 are a model failure.
const SPIN_VALUE_TOL: f64 = 1e-9;

/// A unit vector in `R^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction([f64; 3]);

impl Direction {
    pub fn new(v: [f64; 3]) -> Result<Direction> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(Direction(v))
    }

    /// Rescale a nonzero vector to unit length.
    pub fn normalized(v: [f64; 3]) -> Result<Direction> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(Direction([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    /// Direction at `degrees` from `z` in the x-z plane.
    pub fn planar(degrees: f64) -> Direction {
        let (s, c) = sin_cos_degrees(degrees);
        Direction([s, 0.0, c])
    }

    /// From polar and azimuthal angles in radians.
    pub fn from_angles(polar: f64, azimuth: f64) -> Direction {
        Direction([polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()])
    }

    pub fn x() -> Direction {
        Direction([1.0, 0.0, 0.0])
    }

    pub fn y() -> Direction {
        Direction([0.0, 1.0, 0.0])
    }

    pub fn z() -> Direction {
        Direction([0.0, 0.0, 1.0])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Direction {
        Direction(sphere_point(rng))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Angle in `[0, pi]`.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

/// Sine and cosine of an angle in degrees, exact at multiples of 90.
pub fn sin_cos_degrees(degrees: f64) -> (f64, f64) {
    let r = degrees.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        degrees.to_radians().sin_cos()
    }
}

/// `a . sigma`: twice the spin projection onto `a`, eigenvalues +-1.
pub fn spin_observable(a: &Direction) -> Observable {
    pauli::along(a.0)
}

/// `(|01> - |10>) / sqrt 2`
pub fn singlet() -> QuantumState {
    let z = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    QuantumState::pure(&Vector::from_row_slice(&[z, one, -one, z])).expect("nonzero vector")
}

fn alice(a: &Direction) -> Observable {
    spin_observable(a).tensor(&pauli::identity()).expect("4 <= cap")
}

fn bob(b: &Direction) -> Observable {
    pauli::identity().tensor(&spin_observable(b)).expect("4 <= cap")
}

/// `Tr(rho_singlet (A_a (x) B_b)) = -cos(theta_ab)`
pub fn correlation_exact(a: &Direction, b: &Direction) -> Result<f64> {
    let ab = spin_observable(a).tensor(&spin_observable(b))?;
    Ok(quantum_average(&singlet(), ab.element())?.re)
}

/// Closed-form correlation of the sphere-sign hidden-variable model.
pub fn lhv_correlation_exact(a: &Direction, b: &Direction) -> f64 {
    -1.0 + 2.0 * a.angle_to(b) / PI
}

#[derive(Clone, Debug)]
pub struct CorrelationRecord {
    pub a: Direction,
    pub b: Direction,
    pub estimate: f64,
    pub exact: f64,
    pub n: u64,
    pub stderr: f64,
    /// Physical states consumed (empty for the exact and lhv models).
    pub usage: Usage,
}

fn spin_value(v: f64) -> Result<i8> {
    if (v - 1.0).abs() <= SPIN_VALUE_TOL {
        Ok(1)
    } else if (v + 1.0).abs() <= SPIN_VALUE_TOL {
        Ok(-1)
    } else {
        Err(Error::ModelInvariant(format!("spin readout {v} is not +-1")))
    }
}

/// The joint context of one setting pair, with both readouts prepared.
struct PairContext {
    context: Arc<crate::context::Context>,
    alice: Readout,
    bob: Readout,
    sampler: BornSampler,
    observables: Vec<Observable>,
}

impl PairContext {
    fn new(a: &Direction, b: &Direction) -> Result<PairContext> {
        let oa = alice(a);
        let ob = bob(b);
        let context = Arc::new(common_context(&[oa.clone(), ob.clone()])?);
        let sampler = BornSampler::new(&born_probabilities(&singlet(), &context)?);
        Ok(PairContext {
            alice: Readout::new(&context, &oa)?,
            bob: Readout::new(&context, &ob)?,
            context,
            sampler,
            observables: vec![oa, ob],
        })
    }

    fn draw<R: Rng + ?Sized>(&self, tag: u64, rng: &mut R) -> Result<(i8, i8)> {
        let phi = PhysicalState::with_reserved(Arc::clone(&self.context), self.sampler.draw(rng), tag)?;
        Ok((spin_value(phi.read(&self.alice)?)?, spin_value(phi.read(&self.bob)?)?))
    }
}

/// Estimate `E(a, b)` from `n` fresh physical states of the singlet.
pub fn correlation_contextual(
    a: &Direction,
    b: &Direction,
    n: u64,
    stream: &SeedStream,
) -> Result<CorrelationRecord> {
    check_count(n)?;
    let pair = PairContext::new(a, b)?;
    let parts = map_batches(n, stream.execution(), |batch| -> Result<_> {
        let mut rng = stream.replica(batch.index);
        let tags = Identity::reserve(batch.len);
        let mut stats = RunningStats::new();
        for tag in tags.clone() {
            let (x, y) = pair.draw(tag, &mut rng)?;
            stats.push(f64::from(x * y));
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
    let total = merge_pairwise(stats);
    Ok(CorrelationRecord {
        a: *a,
        b: *b,
        estimate: total.mean(),
        exact: correlation_exact(a, b)?,
        n: total.count(),
        stderr: total.stderr(),
        usage: Usage { identities, observables: pair.observables },
    })
}

/// One run of the sphere-sign model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhvSample {
    pub lambda: [f64; 3],
    pub a_value: i8,
    pub b_value: i8,
}

fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

fn lhv_values(lambda: &Direction, a: &Direction, b: &Direction) -> (i8, i8) {
    (sign(a.dot(lambda)), -sign(b.dot(lambda)))
}

pub fn lhv_sample<R: Rng + ?Sized>(a: &Direction, b: &Direction, rng: &mut R) -> LhvSample {
    let lambda = Direction::random(rng);
    let (a_value, b_value) = lhv_values(&lambda, a, b);
    LhvSample { lambda: lambda.0, a_value, b_value }
}

/// Estimate `E(a, b)` in the sphere-sign model.
pub fn correlation_lhv(a: &Direction, b: &Direction, n: u64, stream: &SeedStream) -> Result<CorrelationRecord> {
    check_count(n)?;
    let parts = map_batches(n, stream.execution(), |batch| {
        let mut rng = stream.replica(batch.index);
        let mut stats = RunningStats::new();
        for _ in 0..batch.len {
            let s = lhv_sample(a, b, &mut rng);
            stats.push(f64::from(s.a_value * s.b_value));
        }
        stats
    });
    let total = merge_pairwise(parts);
    Ok(CorrelationRecord {
        a: *a,
        b: *b,
        estimate: total.mean(),
        exact: lhv_correlation_exact(a, b),
        n: total.count(),
        stderr: total.stderr(),
        usage: empty_usage(),
    })
}

fn empty_usage() -> Usage {
    Usage { identities: Vec::new(), observables: Vec::new() }
}

fn exact_record(a: &Direction, b: &Direction) -> Result<CorrelationRecord> {
    let e = correlation_exact(a, b)?;
    Ok(CorrelationRecord { a: *a, b: *b, estimate: e, exact: e, n: 0, stderr: 0.0, usage: empty_usage() })
}

fn check_count(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Exact,
    Contextual,
    Lhv,
}

impl Model {
    pub fn tag(self) -> &'static str {
        match self {
            Model::Exact => "exact",
            Model::Contextual => "contextual",
            Model::Lhv => "lhv",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Model> {
        match s {
            "exact" => Ok(Model::Exact),
            "contextual" => Ok(Model::Contextual),
            "lhv" => Ok(Model::Lhv),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

/// Measurement settings `a, a'` for the first particle and `b, b'` for the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl ChshSettings {
    /// Coplanar settings from angles in degrees, in the order `a, a', b, b'`.
    pub fn planar(degrees: [f64; 4]) -> ChshSettings {
        ChshSettings {
            a: Direction::planar(degrees[0]),
            a_prime: Direction::planar(degrees[1]),
            b: Direction::planar(degrees[2]),
            b_prime: Direction::planar(degrees[3]),
        }
    }

    /// `(0, 90, 45, 135)` degrees, where the singlet reaches `2 sqrt 2`.
    pub fn optimal() -> ChshSettings {
        Self::planar([0.0, 90.0, 45.0, 135.0])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> ChshSettings {
        ChshSettings {
            a: Direction::random(rng),
            a_prime: Direction::random(rng),
            b: Direction::random(rng),
            b_prime: Direction::random(rng),
        }
    }

    /// The four setting pairs in the order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(Direction, Direction); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct ChshResult {
    pub model: Model,
    /// `|E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|`
    pub value: f64,
    /// Propagated from the four terms as if independent.
    pub stderr: f64,
    pub correlations: [CorrelationRecord; 4],
    /// Non-reuse audit over the consumed physical states (contextual model).
    pub audit: Option<AuditReport>,
}

pub fn chsh_value(e: [f64; 4]) -> f64 {
    (e[0] - e[1]).abs() + (e[2] + e[3]).abs()
}

pub fn chsh(settings: &ChshSettings, model: Model, n: u64, stream: &SeedStream) -> Result<ChshResult> {
    let correlations: [CorrelationRecord; 4] = match model {
        Model::Exact => {
            let p = settings.pairs();
            [
                exact_record(&p[0].0, &p[0].1)?,
                exact_record(&p[1].0, &p[1].1)?,
                exact_record(&p[2].0, &p[2].1)?,
                exact_record(&p[3].0, &p[3].1)?,
            ]
        }
        Model::Contextual => {
            let labels = ["ab", "ab'", "a'b", "a'b'"];
            let p = settings.pairs();
            let mut records = Vec::with_capacity(4);
            for ((a, b), label) in p.iter().zip(labels) {
                records.push(correlation_contextual(a, b, n, &stream.derive(label))?);
            }
            records.try_into().expect("four records")
        }
        Model::Lhv => lhv_chsh_terms(settings, n, &stream.derive("lhv"))?,
    };
    let audit = if model == Model::Contextual {
        let usages: Vec<&Usage> = correlations.iter().map(|r| &r.usage).collect();
        Some(audit_usage(&usages)?)
    } else {
        None
    };
    let e = [
        correlations[0].estimate,
        correlations[1].estimate,
        correlations[2].estimate,
        correlations[3].estimate,
    ];
    let stderr = correlations.iter().map(|r| r.stderr * r.stderr).sum::<f64>().sqrt();
    Ok(ChshResult { model, value: chsh_value(e), stderr, correlations, audit })
}

/// All four terms from the same hidden parameters, one `lambda` per run.
fn lhv_chsh_terms(settings: &ChshSettings, n: u64, stream: &SeedStream) -> Result<[CorrelationRecord; 4]> {
    check_count(n)?;
    let pairs = settings.pairs();
    let parts = map_batches(n, stream.execution(), |batch| {
        let mut rng = stream.replica(batch.index);
        let mut stats = [RunningStats::new(); 4];
        for _ in 0..batch.len {
            let lambda = Direction::random(&mut rng);
            for (s, (a, b)) in stats.iter_mut().zip(&pairs) {
                let (x, y) = lhv_values(&lambda, a, b);
                s.push(f64::from(x * y));
            }
        }
        stats
    });
    let mut records = Vec::with_capacity(4);
    for (k, (a, b)) in pairs.iter().enumerate() {
        let total = merge_pairwise(parts.iter().map(|p| p[k]).collect());
        records.push(CorrelationRecord {
            a: *a,
            b: *b,
            estimate: total.mean(),
            exact: lhv_correlation_exact(a, b),
            n: total.count(),
            stderr: total.stderr(),
            usage: empty_usage(),
        });
    }
    Ok(records.try_into().expect("four records"))
}

#[derive(Clone, Debug)]
pub struct EprReport {
    pub axis: Direction,
    pub n: u64,
    pub anticorrelated: u64,
    pub usage: Usage,
}

/// Measure both particles along the same axis in `n` fresh physical states;
/// every run must give opposite values.
pub fn epr_anticorrelation(axis: &Direction, n: u64, stream: &SeedStream) -> Result<EprReport> {
    check_count(n)?;
    let pair = PairContext::new(axis, axis)?;
    let parts = map_batches(n, stream.execution(), |batch| -> Result<_> {
        let mut rng = stream.replica(batch.index);
        let tags = Identity::reserve(batch.len);
        let mut good = 0u64;
        for tag in tags.clone() {
            let (x, y) = pair.draw(tag, &mut rng)?;
            if x == -y {
                good += 1;
            }
        }
        Ok((good, tags))
    });
    let mut anticorrelated = 0;
    let mut identities = Vec::with_capacity(parts.len());
    for part in parts {
        let (g, r) = part?;
        anticorrelated += g;
        identities.push(r);
    }
    if anticorrelated != n {
        return Err(Error::ModelInvariant(format!(
            "{} of {n} runs were not anticorrelated",
            n - anticorrelated
        )));
    }
    Ok(EprReport { axis: *axis, n, anticorrelated, usage: Usage { identities, observables: pair.observables } })
}

/// `E(theta)` with `a = z` and `b` at `theta` degrees in the x-z plane.
pub fn correlation_sweep(
    thetas_deg: &[f64],
    model: Model,
    n: u64,
    stream: &SeedStream,
) -> Result<Vec<CorrelationRecord>> {
    let a = Direction::z();
    thetas_deg
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let b = Direction::planar(theta);
            let s = stream.derive_indexed("sweep", i as u64);
            match model {
                Model::Exact => exact_record(&a, &b),
                Model::Contextual => correlation_contextual(&a, &b, n, &s),
                Model::Lhv => correlation_lhv(&a, &b, n, &s),
            }
        })
        .collect()
}
