//! The named experiments. Each reads its parameters through [`Ctx`], which
//! records the values actually used so the report echoes them.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use qsqlab::dimension::*;
use qsqlab::ensembles::*;
use qsqlab::learners::*;
use qsqlab::oracle::{Policy, QstatOracle};
use qsqlab::qcore::boolean::{fourier_coefficients, majority3_table, parity_table};
use qsqlab::qcore::*;
use qsqlab::rng::{stream_rng, Rng as StreamRng};

use crate::config::ExperimentConfig;
use crate::report::{Check, Comparison, Report, Table, SCHEMA};
use crate::CliError;

type Body = fn(&mut Ctx) -> Result<Outcome, CliError>;

const EXPERIMENTS: &[(&str, Body)] = &[
    ("verify-moments", verify_moments),
    ("variance-scan", variance_scan),
    ("learn-quadratic", learn_quadratic_exp),
    ("learn-noisy", learn_noisy),
    ("learn-coupon", learn_coupon_exp),
    ("learn-codeword", learn_codeword_exp),
    ("learn-sparse", learn_sparse),
    ("trivial-tomography", trivial_tomography),
    ("hsp", hsp),
    ("shadow-correlation", shadow_correlation),
    ("biclique", biclique),
    ("purity-tail", purity_tail),
    ("design-check", design_check_exp),
    ("qac", qac),
    ("em-separation", em_separation),
];

/// Numerical slack for identities that hold exactly.
pub const EXACT_TOL: f64 = 1e-9;
/// Calibrated constant in the `c · 2^{−n/2}` variance curve.
pub const VARIANCE_CONSTANT: f64 = 4.0;

pub fn experiment_names() -> impl Iterator<Item = &'static str> {
    EXPERIMENTS.iter().map(|(name, _)| *name)
}

/// Runs one experiment. Errors mean no report was produced.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let body = EXPERIMENTS
        .iter()
        .find(|(name, _)| *name == cfg.experiment)
        .map(|(_, body)| *body)
        .ok_or_else(|| CliError::UnknownExperiment(cfg.experiment.clone()))?;
    let start = Instant::now();
    let mut ctx = Ctx { cfg, echo: BTreeMap::new() };
    ctx.echo.insert("seed".into(), json!(cfg.seed));
    let out = body(&mut ctx)?;
    Ok(Report {
        schema: SCHEMA,
        experiment: cfg.experiment.clone(),
        config: ctx.echo,
        checks: out.checks,
        details: Value::Object(out.details),
        wall_time_s: start.elapsed().as_secs_f64(),
        tables: out.tables,
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    echo: BTreeMap<String, Value>,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    fn record<T: Into<Value> + Copy>(&mut self, key: &str, v: T) -> T {
        self.echo.insert(key.into(), v.into());
        v
    }

    fn n(&mut self, default: usize) -> usize {
        self.record("n", self.cfg.n.unwrap_or(default))
    }

    fn k(&mut self, default: usize) -> usize {
        self.record("k", self.cfg.k.unwrap_or(default))
    }

    fn trials(&mut self, default: usize) -> usize {
        self.record("trials", self.cfg.trials.unwrap_or(default))
    }

    fn samples(&mut self, default: usize) -> usize {
        self.record("samples", self.cfg.samples.unwrap_or(default))
    }

    fn tau(&mut self, default: f64) -> f64 {
        self.record("tau", self.cfg.tau.unwrap_or(default))
    }

    fn eps(&mut self, default: f64) -> f64 {
        self.record("eps", self.cfg.eps.unwrap_or(default))
    }

    fn eta(&mut self, default: f64) -> f64 {
        self.record("eta", self.cfg.eta.unwrap_or(default))
    }

    fn ensemble(&mut self, default: &str) -> String {
        let v = self.cfg.ensemble.clone().unwrap_or_else(|| default.to_string());
        self.echo.insert("ensemble".into(), json!(v));
        v
    }

    fn method(&mut self, default: &str) -> String {
        let v = self.cfg.method.clone().unwrap_or_else(|| default.to_string());
        self.echo.insert("method".into(), json!(v));
        v
    }
}

#[derive(Default)]
struct Outcome {
    checks: Vec<Check>,
    details: Map<String, Value>,
    tables: Vec<Table>,
}

impl Outcome {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn detail(&mut self, key: &str, v: impl serde::Serialize) {
        self.details.insert(key.into(), serde_json::to_value(v).expect("serializable detail"));
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Precondition(msg()))
    }
}

/// Runs `f` for trials `0..trials` in parallel; results come back in trial order.
fn par_trials<T: Send>(
    trials: usize,
    f: impl Fn(u64) -> Result<T, CliError> + Sync + Send,
) -> Result<Vec<T>, CliError> {
    (0..trials as u64).into_par_iter().map(f).collect()
}

fn rate(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

fn random_form(n: usize, rng: &mut StreamRng) -> Result<BitMatrix, CliError> {
    let idx = rng.random_range(0..BitMatrix::upper_triangular_count(n));
    Ok(BitMatrix::upper_triangular_from_index(n, idx)?)
}

fn verify_moments(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(3);
    require((1..=4).contains(&n), || format!("verify-moments needs 1 <= n <= 4, got {n}"))?;
    let moments = Degree2Moments::exhaustive(n)?;
    let results = check_moment_identities(&moments, EXACT_TOL);
    let mut out = Outcome::default();
    let mut table = Table::new("moments", &["n", "identity", "max_error", "pass"]);
    for r in &results {
        out.check(Check::at_most(
            format!("moment identity {} holds entrywise at n={n}", r.name),
            r.max_error,
            EXACT_TOL,
        ));
        table.push(vec![n.to_string(), r.name.to_string(), format!("{:e}", r.max_error), r.pass.to_string()]);
    }
    out.detail("identities", &results);
    out.detail("states_averaged", BitMatrix::upper_triangular_count(n));
    out.tables.push(table);
    Ok(out)
}

fn variance_scan(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(3);
    let method = ctx.method("scan");
    let tau = ctx.tau(0.1);
    require((1..=6).contains(&n), || format!("variance-scan needs 1 <= n <= 6, got {n}"))?;
    let model = Degree2Examples::new(n)?;
    // "scan": every Pauli plus random block observables; "paulis": Pauli strings only.
    let set = match method.as_str() {
        "scan" => CandidateSet::new(n + 1, ctx.trials(500), ctx.seed())?,
        "paulis" => CandidateSet::paulis_only(n + 1)?,
        other => return Err(CliError::Usage(format!("variance-scan method must be scan or paulis, got {other:?}"))),
    };
    let terms: Vec<BlockTerms> = (0..set.len())
        .into_par_iter()
        .map(|i| model.block_terms(&set.get(i).observable))
        .collect::<qsqlab::Result<_>>()?;

    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut cases = [0.0f64; 3];
    let mut table = Table::new("candidates", &["index", "description", "variance", "t11", "t22", "t33", "t23"]);
    for (i, t) in terms.iter().enumerate() {
        if t.variance > best.0 {
            best = (t.variance, i);
        }
        for (slot, v) in cases.iter_mut().zip([t.t11, t.t22, t.t33]) {
            *slot = slot.max(v);
        }
        table.push(vec![
            i.to_string(),
            set.get(i).description,
            format!("{:e}", t.variance),
            format!("{:e}", t.t11),
            format!("{:e}", t.t22),
            format!("{:e}", t.t33),
            format!("{:e}", t.t23),
        ]);
    }
    let maxvar = best.0.max(0.0);
    let curve = VARIANCE_CONSTANT * 2f64.powf(-(n as f64) / 2.0);
    let cap = 2.0 / (1u64 << n) as f64;

    let mut out = Outcome::default();
    out.check(Check::at_most(format!("max variance over {} candidates <= 4 * 2^(-n/2)", set.len()), maxvar, curve));
    for (i, v) in cases.iter().enumerate() {
        let c = i + 1;
        out.check(Check::new(
            format!("largest case-{c}{c} block term <= 2/2^n"),
            *v,
            Comparison::AtMost,
            cap,
            EXACT_TOL,
        ));
    }
    out.detail(
        "scan",
        json!({
            "value": maxvar,
            "argmax": set.get(best.1).description,
            "candidates": set.len(),
            "exhaustive_paulis": set.exhaustive_paulis(),
        }),
    );
    out.detail("variance_constant", VARIANCE_CONSTANT);
    out.detail("qsd_bound", qsd_variance_bound("degree2-examples", n, tau, maxvar, set.exhaustive_paulis())?);
    out.tables.push(table);
    Ok(out)
}

fn learn_quadratic_exp(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(4);
    let trials = ctx.trials(100);
    require((1..=8).contains(&n), || format!("learn-quadratic needs 1 <= n <= 8, got {n}"))?;
    require(trials > 0, || "need at least one trial".into())?;
    let seed = ctx.seed();
    let budget = default_round_budget(n);
    let results = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let a = random_form(n, &mut rng)?;
        let table = quadratic_truth_table(&a)?;
        let mut copies = StateCopies::unlimited(phase_state(&table)?);
        let r = learn_quadratic(&mut copies, &mut rng, budget)?;
        let ok = match &r.recovered {
            Some(hat) => quadratic_truth_table(hat)? == table,
            None => false,
        };
        Ok((a.upper_triangular_index(), ok, r.samples_used))
    })?;

    let hits = results.iter().filter(|r| r.1).count();
    let max_copies = results.iter().map(|r| r.2).max().unwrap_or(0);
    let mut out = Outcome::default();
    out.check(Check::at_least(format!("recovery rate with {budget} Bell rounds"), rate(hits, trials), 0.9));
    out.check(Check::at_most("copies used <= two per round plus one", max_copies as f64, (2 * budget + 1) as f64));
    out.detail("round_budget", budget);
    out.detail("recovered", hits);
    let mut table = Table::new("trials", &["trial", "form_index", "recovered", "copies"]);
    for (t, (idx, ok, used)) in results.iter().enumerate() {
        table.push(vec![t.to_string(), idx.to_string(), ok.to_string(), used.to_string()]);
    }
    out.tables.push(table);
    Ok(out)
}

fn learn_noisy(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(4);
    let eta = ctx.eta(0.25);
    let trials = ctx.trials(100);
    let shots = ctx.samples(10_000);
    require((1..=6).contains(&n), || format!("learn-noisy needs 1 <= n <= 6, got {n}"))?;
    require((0.0..0.5).contains(&eta), || format!("noise rate {eta} must lie in [0, 1/2)"))?;
    require(trials > 0 && shots > 0, || "need at least one trial and one shot".into())?;
    let seed = ctx.seed();
    let budget = noisy_copy_budget(n, eta);

    let results = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let a = random_form(n, &mut rng)?;
        let table = quadratic_truth_table(&a)?;
        let mut noisy = StateCopies::unlimited(noisy_example_state(&table, eta)?);
        let r = learn_quadratic_noisy(&mut noisy, n, eta, &mut rng, budget)?;
        let ok = match &r.recovered {
            Some(hat) => quadratic_truth_table(hat)? == table,
            None => false,
        };
        Ok((ok, r.samples_used))
    })?;
    let hits = results.iter().filter(|r| r.0).count();
    let max_copies = results.iter().map(|r| r.1).max().unwrap_or(0);

    let mut out = Outcome::default();
    out.check(Check::at_least(
        format!("noisy recovery rate at eta={eta} with {budget} copies"),
        rate(hits, trials),
        0.9,
    ));
    out.check(Check::at_most("noisy copies used <= budget", max_copies as f64, budget as f64));

    let mut form_rng = stream_rng(seed, 0, 100);
    let f = quadratic_truth_table(&random_form(n, &mut form_rng)?)?;
    let etas = [0.0, 0.1, 0.25, 0.4];
    let freqs = etas
        .par_iter()
        .enumerate()
        .map(|(i, &e)| {
            let noisy = noisy_example_state(&f, e)?;
            let mut rng = stream_rng(seed, i as u64, 200);
            let mut hits = 0usize;
            for _ in 0..shots {
                hits += denoise_copy(&noisy, &mut rng)?.is_some() as usize;
            }
            Ok(rate(hits, shots))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let mut table = Table::new("denoise", &["eta", "frequency", "predicted"]);
    for (&e, &freq) in etas.iter().zip(&freqs) {
        let p = denoise_success_probability(e);
        out.check(Check::equal(format!("denoise success frequency at eta={e}"), freq, p, 0.01));
        table.push(vec![e.to_string(), freq.to_string(), p.to_string()]);
    }
    out.detail("copy_budget", budget);
    out.detail("recovered", hits);
    out.detail("denoise_shots", shots);
    out.tables.push(table);
    Ok(out)
}

fn policies(qubits: usize, seed: u64, t: u64) -> [Policy; 3] {
    [
        Policy::Exact,
        Policy::IntervalNoise(stream_rng(seed, t, 1)),
        Policy::AdversarialReference(DensityMatrix::maximally_mixed(qubits)),
    ]
}

fn learn_coupon_exp(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(16);
    let k = ctx.k(3);
    let tau = ctx.tau(1.0 / (2.0 * k.max(1) as f64));
    let trials = ctx.trials(10);
    require((1..=256).contains(&n), || format!("learn-coupon needs 1 <= n <= 256, got {n}"))?;
    require((1..=n).contains(&k), || format!("subset size {k} must lie in 1..={n}"))?;
    require(tau > 0.0 && tau <= 1.0 / (2.0 * k as f64) + 1e-12, || format!("tau {tau} must lie in (0, 1/(2k)]"))?;
    require(trials > 0, || "need at least one trial".into())?;
    let seed = ctx.seed();
    let bound = k * (n as f64).log2().ceil() as usize + k;
    let q = register_qubits(n);

    let results = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let mut subset: Vec<usize> = sample(&mut rng, n, k).into_iter().map(|i| i + 1).collect();
        subset.sort_unstable();
        let psi = coupon_state(n, &subset)?;
        let mut runs = Vec::new();
        for policy in policies(q, seed, t) {
            let name = policy.name();
            let mut oracle = QstatOracle::new(psi.clone(), tau, policy)?;
            let r = learn_coupon(&mut oracle, n, k)?;
            runs.push((name, r.recovered.as_ref() == Some(&subset), r.qstat_queries));
        }
        Ok((subset, runs))
    })?;

    let mut out = Outcome::default();
    let names: Vec<&str> = results[0].1.iter().map(|r| r.0).collect();
    for (p, name) in names.iter().enumerate() {
        let hits = results.iter().filter(|r| r.1[p].1).count();
        let worst = results.iter().map(|r| r.1[p].2).max().unwrap_or(0);
        out.check(Check::equal(format!("exact recovery rate under {name} oracle"), rate(hits, trials), 1.0, 0.0));
        out.check(Check::at_most(format!("queries under {name} oracle <= k*ceil(log2 n) + k"), worst as f64, bound as f64));
    }
    let mut table = Table::new("trials", &["trial", "subset", "policy", "recovered", "queries"]);
    for (t, (subset, runs)) in results.iter().enumerate() {
        let s = subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
        for (name, ok, queries) in runs {
            table.push(vec![t.to_string(), s.clone(), name.to_string(), ok.to_string(), queries.to_string()]);
        }
    }
    out.detail("query_bound", bound);
    out.detail("register_qubits", q);
    out.tables.push(table);
    Ok(out)
}

fn random_generator(n: usize, k: usize, rng: &mut StreamRng) -> Result<BitMatrix, CliError> {
    loop {
        let rows = (0..n)
            .map(|_| BitVector::from_index(rng.random_range(0..1usize << k), k))
            .collect::<qsqlab::Result<Vec<_>>>()?;
        let g = BitMatrix::from_rows(rows)?;
        if g.rank() == k {
            return Ok(g);
        }
    }
}

fn learn_codeword_exp(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(8);
    let k = ctx.k((n / 2).max(1));
    let tau = ctx.tau(1.0 / (2.0 * n.max(1) as f64));
    let trials = ctx.trials(20);
    require((1..=32).contains(&n), || format!("learn-codeword needs 1 <= n <= 32, got {n}"))?;
    require((1..=n).contains(&k), || format!("message length {k} must lie in 1..={n}"))?;
    require(tau > 0.0 && tau <= 1.0 / (2.0 * n as f64) + 1e-12, || format!("tau {tau} must lie in (0, 1/(2n)]"))?;
    require(trials > 0, || "need at least one trial".into())?;
    let seed = ctx.seed();

    let results = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let g = random_generator(n, k, &mut rng)?;
        let x = BitVector::from_index(rng.random_range(0..1usize << k), k)?;
        let policy = Policy::IntervalNoise(stream_rng(seed, t, 1));
        let mut oracle = QstatOracle::new(codeword_state(&g, &x)?, tau, policy)?;
        let r = learn_codeword(&mut oracle, &g)?;
        Ok((x.to_string(), r.recovered == Some(x), r.qstat_queries))
    })?;

    let hits = results.iter().filter(|r| r.1).count();
    let exact_k = results.iter().filter(|r| r.2 == k).count();
    let mut out = Outcome::default();
    out.check(Check::equal("exact recovery rate under interval noise", rate(hits, trials), 1.0, 0.0));
    out.check(Check::equal("fraction of runs using exactly k queries", rate(exact_k, trials), 1.0, 0.0));
    let mut table = Table::new("trials", &["trial", "message", "recovered", "queries"]);
    for (t, (x, ok, queries)) in results.iter().enumerate() {
        table.push(vec![t.to_string(), x.clone(), ok.to_string(), queries.to_string()]);
    }
    out.tables.push(table);
    Ok(out)
}

struct SparseRun {
    family: &'static str,
    k: usize,
    recovered: bool,
    max_error: f64,
    queries: usize,
}

fn sparse_run(family: &'static str, f: &[bool], k: usize, eps: f64, rng: StreamRng) -> Result<SparseRun, CliError> {
    let schedule = FourierSchedule::new(k, eps);
    let mut oracle = QstatOracle::new(function_state(f)?, schedule.support_tau, Policy::IntervalNoise(rng))?;
    let r = learn_fourier_sparse(&mut oracle, k, eps)?;
    let coeffs = fourier_coefficients(f)?;
    let (recovered, max_error) = match &r.recovered {
        Some(h) => {
            let err = h.support.iter().map(|&(s, est)| (est - coeffs[s]).abs()).fold(0.0, f64::max);
            (h.table == f, err)
        }
        None => (false, f64::INFINITY),
    };
    Ok(SparseRun { family, k, recovered, max_error, queries: r.qstat_queries })
}

fn majority_of_parities(n: usize, parities: [usize; 3]) -> Vec<bool> {
    (0..1usize << n)
        .map(|x| parities.iter().filter(|&&s| (x & s).count_ones() % 2 == 1).count() >= 2)
        .collect()
}

fn learn_sparse(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(4);
    let eps = ctx.eps(0.1);
    let trials = ctx.trials(20);
    require((1..=10).contains(&n), || format!("learn-sparse needs 1 <= n <= 10, got {n}"))?;
    require(eps > 0.0 && eps <= 1.0, || format!("eps {eps} must lie in (0, 1]"))?;
    let seed = ctx.seed();

    let mut runs = Vec::new();
    for s in 0..1usize << n {
        runs.push(sparse_run("parity", &parity_table(n, s), 1, eps, stream_rng(seed, s as u64, 1))?);
    }
    let more = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let s = rng.random_range(0..1usize << n);
        let flip: bool = rng.random();
        let signed: Vec<bool> = parity_table(n, s).into_iter().map(|b| b ^ flip).collect();
        let parities = [0; 3].map(|_| rng.random_range(0..1usize << n));
        Ok([
            sparse_run("signed-parity", &signed, 2, eps, stream_rng(seed, t, 2))?,
            sparse_run("majority3", &majority3_table(), 4, eps, stream_rng(seed, t, 3))?,
            sparse_run("majority-of-parities", &majority_of_parities(n, parities), 4, eps, stream_rng(seed, t, 4))?,
        ])
    })?;
    runs.extend(more.into_iter().flatten());

    let mut out = Outcome::default();
    for family in ["parity", "signed-parity", "majority3", "majority-of-parities"] {
        let group: Vec<&SparseRun> = runs.iter().filter(|r| r.family == family).collect();
        if group.is_empty() {
            continue;
        }
        let k = group[0].k;
        let hits = group.iter().filter(|r| r.recovered).count();
        out.check(Check::equal(format!("exact recovery rate on {family} (k={k})"), rate(hits, group.len()), 1.0, 0.0));
        let err = group.iter().map(|r| r.max_error).fold(0.0, f64::max);
        out.check(Check::new(
            format!("coefficient estimates on {family} within eps/(2k)"),
            err,
            Comparison::AtMost,
            FourierSchedule::new(k, eps).estimate_tau,
            1e-12,
        ));
    }
    let mut table = Table::new("runs", &["family", "k", "recovered", "max_error", "queries"]);
    for r in &runs {
        table.push(vec![
            r.family.to_string(),
            r.k.to_string(),
            r.recovered.to_string(),
            r.max_error.to_string(),
            r.queries.to_string(),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

fn ghz(m: usize) -> Result<PureState, CliError> {
    let mut amps = vec![0.0; 1 << m];
    amps[0] = 0.5f64.sqrt();
    amps[(1 << m) - 1] = 0.5f64.sqrt();
    Ok(PureState::from_real(&amps)?)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn trivial_tomography(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let m = ctx.n(4);
    let d = ctx.k(2);
    let tau = ctx.tau(0.05);
    require((1..=8).contains(&m), || format!("trivial-tomography needs 1 <= n <= 8 qubits, got {m}"))?;
    require((1..=m.min(3)).contains(&d), || format!("patch size {d} must lie in 1..={}", m.min(3)))?;
    require(tau > 0.0 && tau <= 1.0, || format!("tau {tau} must lie in (0, 1]"))?;

    let psi = ghz(m)?;
    let rho = psi.to_density();
    let mut oracle = QstatOracle::new(psi, tau, Policy::IntervalNoise(stream_rng(ctx.seed(), 0, 0)))?;
    let patches = local_tomography(&mut oracle, d)?;
    let per_patch = (1usize << (2 * d)) - 1;
    let mut worst = 0.0f64;
    let mut table = Table::new("patches", &["qubits", "trace_distance", "queries"]);
    for p in &patches {
        let err = p.trace_distance_to(&rho.partial_trace(&p.qubits)?)?;
        worst = worst.max(err);
        let qs = p.qubits.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        table.push(vec![qs, err.to_string(), p.queries.to_string()]);
    }

    let zero = PureState::basis(m, 0)?;
    let mut exact = QstatOracle::new(zero, tau, Policy::Exact)?;
    let zero_marginal = PureState::basis(d, 0)?.to_density();
    let mut zero_err = 0.0f64;
    for p in local_tomography(&mut exact, d)? {
        zero_err = zero_err.max(p.trace_distance_to(&zero_marginal)?);
    }

    let mut out = Outcome::default();
    out.check(Check::new(
        "GHZ patch trace distance < tau * 2^(D-1)",
        worst,
        Comparison::Below,
        tau * 2f64.powi(d as i32 - 1),
        0.0,
    ));
    out.check(Check::equal("patches estimated", patches.len() as f64, binomial(m, d) as f64, 0.0));
    out.check(Check::equal(
        "queries per patch = 4^D - 1",
        patches.iter().map(|p| p.queries).max().unwrap_or(0) as f64,
        per_patch as f64,
        0.0,
    ));
    out.check(Check::equal("total queries", oracle.queries() as f64, (binomial(m, d) * per_patch) as f64, 0.0));
    out.check(Check::at_most("zero-state patches exact under the exact oracle", zero_err, EXACT_TOL));
    out.tables.push(table);
    Ok(out)
}

fn hsp(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(8);
    let trials = ctx.trials(100);
    let budget = ctx.samples(3 * n);
    require((1..=16).contains(&n), || format!("hsp needs 1 <= n <= 16, got {n}"))?;
    require(trials > 0, || "need at least one trial".into())?;
    let seed = ctx.seed();

    let results = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let s = BitVector::from_index(rng.random_range(1..1usize << n), n)?;
        let r = recover_hidden_shift(&s, budget, &mut rng)?;
        let mut check_rng = stream_rng(seed, t, 1);
        let mut bad = 0usize;
        for _ in 0..budget {
            bad += fourier_sample_coset(&s, &mut check_rng)?.dot(&s) as usize;
        }
        Ok((s.to_string(), r.recovered == Some(s), r.samples_used, bad))
    })?;

    let hits = results.iter().filter(|r| r.1).count();
    let most = results.iter().map(|r| r.2).max().unwrap_or(0);
    let bad: usize = results.iter().map(|r| r.3).sum();
    let mut out = Outcome::default();
    out.check(Check::at_least(format!("shift recovery rate with <= {budget} samples"), rate(hits, trials), 0.9));
    out.check(Check::at_most("samples used per run", most as f64, budget as f64));
    out.check(Check::equal("Fourier samples with y.s = 1", bad as f64, 0.0, 0.0));
    out.detail("samples_checked_for_orthogonality", trials * budget);
    let mut table = Table::new("trials", &["trial", "shift", "recovered", "samples"]);
    for (t, (s, ok, used, _)) in results.iter().enumerate() {
        table.push(vec![t.to_string(), s.clone(), ok.to_string(), used.to_string()]);
    }
    out.tables.push(table);
    Ok(out)
}

fn correlation_table(g: &CorrelationMatrix, labels: &[String]) -> Table {
    let mut table = Table::new("correlation", &["i", "j", "value"]);
    for (i, row) in g.entries.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            table.push(vec![labels[i].clone(), labels[j].clone(), v.to_string()]);
        }
    }
    table
}

fn shadow_correlation(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let m = ctx.n(2);
    let eps = ctx.eps(0.1);
    require((1..=3).contains(&m), || format!("shadow-correlation needs 1 <= n <= 3, got {m}"))?;
    require(eps > 0.0 && eps <= 1.0 / 3.0, || format!("eps {eps} must lie in (0, 1/3]"))?;
    let ens = shadow_ensemble(m, eps)?;
    let g = CorrelationMatrix::new(&ens, &DensityMatrix::maximally_mixed(m))?;
    let scale = 9.0 * eps * eps;
    let mut out = Outcome::default();
    out.check(Check::at_most(
        "correlation matrix distance from 9 eps^2 * I",
        g.distance_from_scaled_identity(scale),
        EXACT_TOL,
    ));
    out.detail("scale", scale);
    out.detail("members", ens.len());
    out.detail("condition", g.condition);
    let labels: Vec<String> = ens.members().iter().map(|mb| mb.label.clone()).collect();
    out.tables.push(correlation_table(&g, &labels));
    Ok(out)
}

const QAC_TAUS: &[f64] = &[0.001, 0.004, 0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.25, 0.3, 0.34, 0.5, 0.9, 1.0, 1.5];

fn qac(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let which = ctx.ensemble("coset");
    let n = ctx.n(3);
    let tau = ctx.tau(0.1);
    require(tau > 0.0, || format!("tau {tau} must be positive"))?;
    let mut out = Outcome::default();
    let (ens, scale) = match which.as_str() {
        "coset" => {
            require((1..=6).contains(&n), || format!("coset ensemble needs 1 <= n <= 6, got {n}"))?;
            let ens = coset_ensemble(n)?;
            let exact = 2f64.powi(1 - n as i32);
            let worst = ens.states().map(|s| (s.to_density().purity() - exact).abs()).fold(0.0, f64::max);
            out.check(Check::at_most("coset state purity = 2^-(n-1)", worst, EXACT_TOL));
            out.detail("coset_purity", exact);
            out.detail("coset_purity_squared_exponent_form", 2f64.powi(-2 * (n as i32 - 1)));
            out.detail(
                "coset_purity_note",
                "purity is 2^-(n-1); the form 2^-2(n-1) disagrees for n >= 2",
            );
            (ens, 1.0)
        }
        "shadow" => {
            let eps = ctx.eps(0.1);
            require((1..=3).contains(&n), || format!("shadow ensemble needs 1 <= n <= 3, got {n}"))?;
            require(eps > 0.0 && eps <= 1.0 / 3.0, || format!("eps {eps} must lie in (0, 1/3]"))?;
            (shadow_ensemble(n, eps)?, 9.0 * eps * eps)
        }
        other => return Err(CliError::Usage(format!("qac ensemble must be coset or shadow, got {other:?}"))),
    };
    let g = CorrelationMatrix::new(&ens, &DensityMatrix::maximally_mixed(n))?;
    out.check(Check::at_most(
        format!("correlation matrix distance from {scale} * I"),
        g.distance_from_scaled_identity(scale),
        EXACT_TOL,
    ));

    let report = qac_bound(&g, tau, DEFAULT_SUBSET_LIMIT)?;
    let mut table = Table::new("qac", &["tau", "value", "largest_subset", "enumerated", "closed_form"]);
    let opt = |v: Option<usize>| v.map_or("".to_string(), |x| x.to_string());
    let mut compared = 0;
    let mut mismatches = 0;
    for &t in QAC_TAUS.iter().chain([tau].iter()) {
        let r = qac_bound(&g, t, DEFAULT_SUBSET_LIMIT)?;
        if let (Some(e), Some(c)) = (r.enumerated, r.closed_form) {
            compared += 1;
            mismatches += (e != c) as usize;
        }
        table.push(vec![t.to_string(), r.value.to_string(), r.largest_subset.to_string(), opt(r.enumerated), opt(r.closed_form)]);
    }
    if ens.len() <= DEFAULT_SUBSET_LIMIT {
        out.check(Check::equal(
            format!("closed form disagrees with enumeration at {compared} tolerances"),
            mismatches as f64,
            0.0,
            0.0,
        ));
    } else {
        out.detail("enumeration_skipped", format!("{} members exceed the subset limit {DEFAULT_SUBSET_LIMIT}", ens.len()));
    }
    out.detail("qac", &report);
    out.detail("members", ens.len());
    out.tables.push(table);
    Ok(out)
}

fn biclique(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(8);
    require((1..=8).contains(&n), || format!("biclique needs 1 <= n <= 8, got {n}"))?;
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|nn| (1..=nn).map(move |k| (nn, k))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(nn, k)| {
            let p = BicliqueParams::leading(nn, k)?;
            let (tv, _) = dist_metrics(&biclique_distribution(&p), &Distribution::uniform(1 << nn))?;
            let psi = biclique_state(&p)?;
            let plus = PureState::uniform(nn);
            let (_, value) = helstrom(&psi.to_density(), &plus.to_density())?;
            let dtr = trace_distance_pure(&psi, &plus)?;
            let overlap = plus.inner(&psi)?.norm();
            Ok([tv, value, dtr, overlap])
        })
        .collect::<Result<Vec<[f64; 4]>, CliError>>()?;

    let mut tv_err = 0.0f64;
    let mut helstrom_err = 0.0f64;
    let mut overlap_err = 0.0f64;
    let (mut below, mut above) = (0usize, 0usize);
    let mut table = Table::new(
        "pairs",
        &["n", "k", "tv", "tv_closed_form", "helstrom", "trace_distance", "overlap", "lower", "upper"],
    );
    for (&(nn, k), &[tv, value, dtr, overlap]) in pairs.iter().zip(&rows) {
        let ratio = k as f64 / nn as f64;
        let tv_cf = biclique_tv_closed_form(nn, k);
        let lower = (1.0 - ratio).sqrt();
        let upper = (1.0 + 2f64.powf(-(k as f64 + 1.0) / 2.0)) * lower;
        tv_err = tv_err.max((tv - tv_cf).abs());
        helstrom_err = helstrom_err.max((value - 2.0 * dtr).abs());
        overlap_err = overlap_err.max((overlap - biclique_overlap_closed_form(nn, k)).abs());
        below += (overlap < lower - EXACT_TOL) as usize;
        above += (overlap > upper + EXACT_TOL) as usize;
        table.push(
            [nn as f64, k as f64, tv, tv_cf, value, dtr, overlap, lower, upper].iter().map(|v| v.to_string()).collect(),
        );
    }

    let mut out = Outcome::default();
    out.check(Check::at_most("tv(D_S, uniform) = (k/n)(1 - 2^-k)", tv_err, EXACT_TOL));
    out.check(Check::at_most("Helstrom value = 2 * trace distance", helstrom_err, EXACT_TOL));
    out.check(Check::at_most("overlap matches its closed form", overlap_err, EXACT_TOL));
    out.check(Check::equal("pairs with overlap below sqrt(1 - k/n)", below as f64, 0.0, 0.0));
    out.check(Check::equal("pairs with overlap above (1 + 2^-(k+1)/2) sqrt(1 - k/n)", above as f64, 0.0, 0.0));
    out.detail("pairs", pairs.len());
    out.tables.push(table);
    Ok(out)
}

fn purity_tail(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let m = ctx.n(8);
    let tau = ctx.tau(0.2);
    let trials = ctx.trials(10_000);
    require((1..=12).contains(&m), || format!("purity-tail needs 1 <= n <= 12, got {m}"))?;
    require(trials >= 1000, || format!("purity-tail needs at least 1000 trials, got {trials}"))?;
    // Z on the last qubit.
    let obs = PauliString::from_index(3, m);
    let r = purity_tail_experiment(&obs, tau, trials, ctx.seed())?;
    let mut out = Outcome::default();
    out.check(Check::at_most("tail frequency <= Chebyshev bound", r.tail, r.chebyshev_bound));
    out.check(Check::at_most("tail frequency <= min(1, Levy bound)", r.tail, r.levy_bound.min(1.0)));
    out.detail("observable", obs.to_string());
    out.detail("tail", &r);
    Ok(out)
}

fn design_check_exp(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let m = ctx.n(2);
    let shots = ctx.samples(100_000);
    require((1..=2).contains(&m), || format!("design-check needs 1 <= n <= 2, got {m}"))?;
    require(shots >= 2, || "need at least two Monte-Carlo samples".into())?;
    let mut out = Outcome::default();
    let mut table = Table::new("designs", &["ensemble", "first_moment", "second_moment"]);
    for mm in 1..=m {
        let ens = stabilizer_ensemble(mm)?;
        let (d1, d2) = design_check(&ens)?;
        out.check(Check::at_most(format!("stabilizer m={mm} first moment matches Haar"), d1, EXACT_TOL));
        out.check(Check::at_most(format!("stabilizer m={mm} second moment matches Haar"), d2, EXACT_TOL));
        table.push(vec![ens.name().to_string(), d1.to_string(), d2.to_string()]);
    }

    let z: PauliString = "Z".parse()?;
    let exact = haar_variance_exact(&z);
    out.check(Check::equal("Haar variance of Z = 1/3", exact, 1.0 / 3.0, EXACT_TOL));
    let mut rng = stream_rng(ctx.seed(), 0, 0);
    let devs: Vec<f64> = (0..shots)
        .map(|_| {
            let v = haar_state(1, &mut rng).expectation(&z.to_observable())?;
            Ok(v * v)
        })
        .collect::<Result<_, CliError>>()?;
    let mean = devs.iter().sum::<f64>() / shots as f64;
    let spread = devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (shots - 1) as f64;
    let sigma = (spread / shots as f64).sqrt();
    out.check(Check::equal("Monte-Carlo Haar variance of Z within 3 sigma", mean, exact, 3.0 * sigma));

    let phase = degree2_phase_ensemble(3)?;
    let (d1, d2) = design_check(&phase)?;
    out.check(Check::at_most("degree-2 phase states n=3 first moment matches Haar", d1, EXACT_TOL));
    out.check(Check::new("degree-2 phase states n=3 second moment differs from Haar", d2, Comparison::Above, 0.0, 0.0));
    table.push(vec![phase.name().to_string(), d1.to_string(), d2.to_string()]);
    out.detail("monte_carlo", json!({ "mean": mean, "sigma": sigma, "samples": shots }));
    out.tables.push(table);
    Ok(out)
}

fn em_separation(ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let n = ctx.n(3);
    let samples = ctx.samples(2000);
    let trials = ctx.trials(100);
    let eps = ctx.eps(0.2);
    let tau = ctx.tau(0.1);
    require((1..=4).contains(&n), || format!("em-separation needs 1 <= n <= 4, got {n}"))?;
    require(eps > 0.0 && tau > 0.0 && tau <= 1.0, || "eps must be positive and tau in (0, 1]".into())?;
    require(trials > 0, || "need at least one trial".into())?;
    let seed = ctx.seed();
    let count = BitMatrix::upper_triangular_count(n);
    let need = scheffe_sample_count(count, eps);
    require(samples >= need, || format!("{count} candidates at eps={eps} need {need} samples, got {samples}"))?;

    let tables = (0..count).map(|i| degree2_table(n, i)).collect::<qsqlab::Result<Vec<_>>>()?;
    let cands = tables
        .iter()
        .map(|t| Ok(born_distribution(&function_state(t)?)))
        .collect::<Result<Vec<Distribution>, CliError>>()?;
    let mut min_tv = f64::INFINITY;
    for i in 0..count {
        for j in i + 1..count {
            min_tv = min_tv.min(dist_metrics(&cands[i], &cands[j])?.0);
        }
    }

    const SHIFT: f64 = 0.05;
    let results = par_trials(trials, |t| {
        let mut rng = stream_rng(seed, t, 0);
        let idx = rng.random_range(0..count);
        let target = &cands[idx];
        let clean: Vec<usize> = (0..samples).map(|_| target.sample(&mut rng)).collect();
        let pick = scheffe_select(&clean, &cands, eps)?;

        // Move mass 1/20 onto (x = 0, b = 1 - f(0)), which the example state never produces.
        let point = (!tables[idx][0]) as usize;
        let mut probs = target.probs().to_vec();
        probs.iter_mut().for_each(|p| *p *= 1.0 - SHIFT);
        probs[point] += SHIFT;
        let shifted = Distribution::new(probs)?;
        let tv = dist_metrics(&shifted, target)?.0;
        let noisy: Vec<usize> = (0..samples).map(|_| shifted.sample(&mut rng)).collect();
        let pick_shifted = scheffe_select(&noisy, &cands, eps)?;
        Ok((idx, pick, pick_shifted, tv))
    })?;
    let clean_hits = results.iter().filter(|r| r.1 == r.0).count();
    let shifted_hits = results.iter().filter(|r| r.2 == r.0).count();
    let tv_err = results.iter().map(|r| (r.3 - SHIFT).abs()).fold(0.0, f64::max);

    // The expectation-value side: the same hidden state seen only through Qstat answers.
    let idx0 = results[0].0;
    let psi = function_state(&tables[idx0])?;
    let mut oracle = QstatOracle::new(psi.clone(), tau, Policy::IntervalNoise(stream_rng(seed, 0, 9)))?;
    let mut worst = 0.0f64;
    for q in 0..=n {
        let z = PauliString::new(vec![Pauli::Z]).embed(&[q], n + 1)?.to_observable();
        let r = oracle.qstat(&z)?;
        worst = worst.max((r - psi.expectation(&z)?).abs());
    }

    let mut out = Outcome::default();
    out.check(Check::new("pairwise tv between candidate distributions >= 1/4", min_tv, Comparison::AtLeast, 0.25, EXACT_TOL));
    out.check(Check::at_least(format!("selection recovers A from {samples} samples"), rate(clean_hits, trials), 0.9));
    out.check(Check::at_most("|tv(P, P_A) - 1/20| for the shifted distribution", tv_err, 1e-12));
    out.check(Check::at_least("selection recovers A from the shifted distribution", rate(shifted_hits, trials), 0.9));
    out.check(Check::equal("Qstat transcript length", oracle.ledger().queries() as f64, (n + 1) as f64, 0.0));
    out.check(Check::at_most("Qstat answers within tau", worst, tau));
    out.detail("candidates", count);
    out.detail("scheffe_samples_required", need);
    out.detail("qstat_transcript", oracle.export_ledger());
    let mut table = Table::new("trials", &["trial", "form_index", "selected", "selected_shifted"]);
    for (t, r) in results.iter().enumerate() {
        table.push(vec![t.to_string(), r.0.to_string(), r.1.to_string(), r.2.to_string()]);
    }
    out.tables.push(table);
    Ok(out)
}
