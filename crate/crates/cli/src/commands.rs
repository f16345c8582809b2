use qalg::algebra::pauli;
use qalg::bell::{self, chsh_value, ChshSettings, Direction, Model};
use qalg::dynamics::{heisenberg_evolve, Hamiltonian};
use qalg::ensemble::{monte_carlo_average, quantum_average};
use qalg::gns::{gns_construct, verify_gns};
use qalg::harness::{run_harness, HarnessConfig};
use qalg::{random, QuantumState, SeedStream};

use crate::table::{sig9, Cell, Table};
use crate::{CliError, Common, StateKind};

pub struct Outcome {
    pub table: Table,
    pub violation: Option<String>,
}

impl Outcome {
    fn ok(table: Table) -> Outcome {
        Outcome { table, violation: None }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| usage(format!("{what}: `{p}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(usage(format!("{what}: `{p}` is not finite")))
            }
        })
        .collect()
}

pub fn parse_axis(s: &str) -> Result<Direction, CliError> {
    match s.trim() {
        "x" => Ok(Direction::x()),
        "y" => Ok(Direction::y()),
        "z" => Ok(Direction::z()),
        other => {
            let v = parse_floats(other, "axis")?;
            if v.len() != 3 {
                return Err(usage(format!("axis needs x, y, z or three components, got `{other}`")));
            }
            Direction::normalized([v[0], v[1], v[2]]).map_err(|e| usage(format!("axis: {e}")))
        }
    }
}

fn parse_settings(angles: Option<&str>, directions: Option<&str>) -> Result<ChshSettings, CliError> {
    match (angles, directions) {
        (Some(a), _) => {
            let v = parse_floats(a, "angles")?;
            let v: [f64; 4] = v.try_into().map_err(|_| usage("angles needs four values a,a',b,b'"))?;
            Ok(ChshSettings::planar(v))
        }
        (None, Some(d)) => {
            let dirs = d.split(';').map(parse_axis).collect::<Result<Vec<_>, _>>()?;
            let [a, a_prime, b, b_prime]: [Direction; 4] =
                dirs.try_into().map_err(|_| usage("directions needs four triples separated by `;`"))?;
            Ok(ChshSettings { a, a_prime, b, b_prime })
        }
        (None, None) => Ok(ChshSettings::optimal()),
    }
}

fn show(d: &Direction) -> String {
    d.components().iter().map(|&c| sig9(c)).collect::<Vec<_>>().join(" ")
}

pub fn chsh(
    common: &Common,
    stream: &SeedStream,
    model: Model,
    angles: Option<&str>,
    directions: Option<&str>,
) -> Result<Outcome, CliError> {
    let settings = parse_settings(angles, directions)?;
    let r = bell::chsh(&settings, model, common.samples, stream)?;
    let mut t = Table::new("chsh", &["seed", "samples", "model", "term", "a", "b", "estimate", "exact", "stderr"]);
    let terms = ["E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')"];
    for (term, rec) in terms.iter().zip(&r.correlations) {
        t.push(vec![
            common.seed.into(),
            rec.n.into(),
            model.tag().into(),
            (*term).into(),
            show(&rec.a).into(),
            show(&rec.b).into(),
            rec.estimate.into(),
            rec.exact.into(),
            rec.stderr.into(),
        ]);
    }
    let exact = chsh_value([
        r.correlations[0].exact,
        r.correlations[1].exact,
        r.correlations[2].exact,
        r.correlations[3].exact,
    ]);
    t.push(vec![
        common.seed.into(),
        r.correlations[0].n.into(),
        model.tag().into(),
        "S".into(),
        Cell::Empty,
        Cell::Empty,
        r.value.into(),
        exact.into(),
        r.stderr.into(),
    ]);
    Ok(Outcome::ok(t))
}

pub fn epr(common: &Common, stream: &SeedStream, axis: &str) -> Result<Outcome, CliError> {
    let axis = parse_axis(axis)?;
    let r = bell::epr_anticorrelation(&axis, common.samples, stream)?;
    let estimate = (r.n as f64 - 2.0 * r.anticorrelated as f64) / r.n as f64;
    let mut t = Table::new(
        "epr",
        &["seed", "samples", "model", "axis", "anticorrelated", "estimate", "exact", "stderr"],
    );
    t.push(vec![
        common.seed.into(),
        r.n.into(),
        Model::Contextual.tag().into(),
        show(&axis).into(),
        r.anticorrelated.into(),
        estimate.into(),
        (-1.0).into(),
        0.0.into(),
    ]);
    Ok(Outcome::ok(t))
}

pub fn correlation(common: &Common, stream: &SeedStream, model: Model, step: f64) -> Result<Outcome, CliError> {
    if !(step.is_finite() && step > 0.0 && step <= 180.0) {
        return Err(usage("step must be in (0, 180] degrees"));
    }
    let count = (180.0 / step + 1e-9).floor() as usize + 1;
    let thetas: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
    let records = bell::correlation_sweep(&thetas, model, common.samples, stream)?;
    let mut t = Table::new("correlation", &["theta_deg", "E_estimate", "E_exact", "stderr", "n", "seed"]);
    for (theta, r) in thetas.iter().zip(&records) {
        t.push(vec![
            (*theta).into(),
            r.estimate.into(),
            (-bell::sin_cos_degrees(*theta).1).into(),
            r.stderr.into(),
            r.n.into(),
            common.seed.into(),
        ]);
    }
    Ok(Outcome::ok(t))
}

pub fn evolve(
    common: &Common,
    stream: &SeedStream,
    omega: f64,
    t_max: f64,
    points: u64,
    axis: &str,
) -> Result<Outcome, CliError> {
    if !omega.is_finite() || !t_max.is_finite() {
        return Err(usage("omega and t-max must be finite"));
    }
    let axis = parse_axis(axis)?;
    let up = bell::spin_observable(&axis).spectral()?.eigenvector(1);
    let psi = QuantumState::pure(&up)?;
    let h = Hamiltonian::new(pauli::sigma_z().scaled(omega / 2.0))?;
    let mut t = Table::new(
        "evolve",
        &["seed", "samples", "model", "t", "sx", "sy", "sz", "estimate", "stderr"],
    );
    for k in 0..points {
        let time = t_max * k as f64 / (points - 1) as f64;
        let mut exact = [0.0; 3];
        for (slot, o) in exact.iter_mut().zip([pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()]) {
            *slot = quantum_average(&psi, heisenberg_evolve(&o, &h, time)?.element())?.re;
        }
        let sx_t = heisenberg_evolve(&pauli::sigma_x(), &h, time)?;
        let mc = monte_carlo_average(&psi, &sx_t, common.samples, &stream.derive_indexed("evolve", k))?;
        t.push(vec![
            common.seed.into(),
            mc.n.into(),
            Model::Contextual.tag().into(),
            time.into(),
            exact[0].into(),
            exact[1].into(),
            exact[2].into(),
            mc.estimate.into(),
            mc.stderr.into(),
        ]);
    }
    Ok(Outcome::ok(t))
}

pub fn gns(
    common: &Common,
    stream: &SeedStream,
    dim: usize,
    trials: usize,
    kind: StateKind,
) -> Result<Outcome, CliError> {
    let kinds: &[(&str, bool)] = match kind {
        StateKind::Pure => &[("pure", false)],
        StateKind::Mixed => &[("mixed", true)],
        StateKind::Both => &[("pure", false), ("mixed", true)],
    };
    let mut t = Table::new(
        "gns",
        &[
            "seed",
            "samples",
            "model",
            "state",
            "dim",
            "rep_dim",
            "norm_of_omega",
            "homomorphism",
            "star",
            "state_error",
            "cyclic_rank",
            "passed",
        ],
    );
    for (name, mixed) in kinds {
        let mut rng = stream.derive("gns").derive(name).replica(0);
        let psi = if *mixed { random::mixed_state(dim, &mut rng)? } else { random::pure_state(dim, &mut rng)? };
        let rep = gns_construct(&psi)?;
        let report = verify_gns(&rep, &psi, trials, &mut rng)?;
        t.push(vec![
            common.seed.into(),
            trials.into(),
            "gns".into(),
            (*name).into(),
            dim.into(),
            report.rep_dim.into(),
            report.norm_of_omega.into(),
            report.homomorphism.into(),
            report.star.into(),
            report.state.into(),
            report.cyclic_rank.into(),
            report.passed().into(),
        ]);
    }
    Ok(Outcome::ok(t))
}

pub fn postulates(common: &Common, stream: &SeedStream, cases: usize, trials: usize) -> Result<Outcome, CliError> {
    let config = HarnessConfig {
        postulate_cases: cases,
        convergence_trials: trials,
        samples: common.samples,
        ..HarnessConfig::default()
    };
    let r = run_harness(&config, stream)?;
    let mut t = Table::new(
        "postulates",
        &["seed", "samples", "model", "suite", "cases", "failures", "max_deviation", "max_z", "passed"],
    );
    let tag = Model::Contextual.tag();
    let p = &r.postulates;
    t.push(vec![
        common.seed.into(),
        1u64.into(),
        tag.into(),
        "valuation".into(),
        p.cases.into(),
        p.failures.into(),
        p.max_deviation.into(),
        Cell::Empty,
        p.passed().into(),
    ]);
    let c = &r.convergence;
    t.push(vec![
        common.seed.into(),
        c.samples.into(),
        tag.into(),
        "convergence".into(),
        c.trials.into(),
        (c.trials - c.within_band).into(),
        c.max_linearity.into(),
        c.max_z.into(),
        c.passed().into(),
    ]);
    let b = &r.cbs;
    t.push(vec![
        common.seed.into(),
        Cell::Empty,
        "exact".into(),
        "cbs".into(),
        b.trials.into(),
        (b.trials - b.holds).into(),
        b.worst_margin.max(0.0).into(),
        Cell::Empty,
        b.passed().into(),
    ]);
    let violation = (!r.passed()).then(|| "property harness reported failures".to_string());
    Ok(Outcome { table: t, violation })
}
