//! Seeded Monte-Carlo experiments. Each `run_*` function returns typed rows
//! plus a [`Table`] for CSV output.
//!
//! Trials run on a rayon pool sized by [`ExperimentConfig::threads`]. Each
//! trial draws from its own stream (see [`rng`]) and per-trial results are
//! collected in trial order before any reduction, so output bytes do not
//! depend on the thread count.

pub mod rank;
pub mod rng;
pub mod stats;
pub mod table;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bounds::{self, BoundParams};
use crate::coeff_search;
use crate::error::{Error, Result};
use crate::rate::{self, CoeffVector, Power, Rate};
use crate::scheduler::{self, for_each_subset};

pub use rank::RankTracker;
pub use rng::{sample_channel, stream_key, trial_rng};
pub use stats::Summary;
pub use table::{Cell, Table};

/// Completion-time runs stop here and are flagged.
pub const MAX_PHASES: usize = 1_000_000;

/// How the users of each transmission phase are picked in the
/// completion-time simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// One uniformly random user per phase.
    Unit,
    /// `k` uniformly random users with random +-1 coefficients.
    RandomSubset,
    /// The sorted-window scheduler on a fresh channel draw every phase.
    Algorithm1,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Unit => "unit",
            Policy::RandomSubset => "random-subset",
            Policy::Algorithm1 => "algorithm1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub l_grid: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub k: usize,
    /// Use `k = ceil(log2 L)` per grid point instead of `k`.
    pub k_log2: bool,
    pub power: f64,
    pub delta: f64,
    /// Largest `L` for which the exhaustive sum-rate oracle is run.
    pub oracle_max_l: usize,
    /// Largest squared norm of the coefficient vectors in the rate scatter.
    pub norm_max: i64,
    pub coeffs: Vec<Vec<i64>>,
    pub policy: Policy,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    fn base(name: &str) -> Self {
        ExperimentConfig {
            experiment: name.to_string(),
            seed: 1,
            trials: 500,
            l_grid: vec![],
            p_grid: vec![],
            k: 3,
            k_log2: false,
            power: 100.0,
            delta: 0.005,
            oracle_max_l: 200,
            norm_max: 3,
            coeffs: vec![],
            policy: Policy::Unit,
            threads: None,
            output_path: None,
        }
    }

    pub fn sumrate_vs_l() -> Self {
        ExperimentConfig {
            l_grid: vec![10, 20, 45, 100, 200],
            ..Self::base("fig1")
        }
    }

    pub fn rate_scatter() -> Self {
        ExperimentConfig {
            l_grid: vec![15, 45],
            power: 1000.0,
            trials: 1,
            ..Self::base("fig2")
        }
    }

    pub fn sumrate_scatter() -> Self {
        ExperimentConfig {
            l_grid: vec![45],
            power: 1000.0,
            trials: 1,
            ..Self::base("fig3")
        }
    }

    pub fn fixed_a_comparison() -> Self {
        ExperimentConfig {
            l_grid: vec![20],
            p_grid: vec![1.0, 10.0, 100.0, 1000.0, 10_000.0, 100_000.0],
            coeffs: vec![vec![2, 1, 1], vec![2, 2, 1], vec![3, 2, 1]],
            trials: 1000,
            ..Self::base("fig4")
        }
    }

    pub fn beta_check() -> Self {
        ExperimentConfig {
            k: 2,
            l_grid: vec![45],
            trials: 10_000,
            ..Self::base("beta-check")
        }
    }

    pub fn completion_time() -> Self {
        ExperimentConfig {
            k: 1,
            l_grid: vec![30],
            trials: 2000,
            policy: Policy::Unit,
            ..Self::base("completion-time")
        }
    }

    pub fn power(&self) -> Result<Power> {
        Power::new(self.power)
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::usage("trials must be positive"));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads.unwrap_or(0))
            .build()
            .map_err(|e| Error::Resource(e.to_string()))
    }
}

/// Everything needed to reproduce a CSV file.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub columns: &'a [String],
    pub rows: usize,
    pub rng: &'static str,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a ExperimentConfig, table: &'a Table) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            columns: &table.header,
            rows: table.rows.len(),
            rng: "ChaCha8; key from splitmix64(seed) ^ stream_key(experiment, grid point); stream = trial index",
        }
    }
}

/// Run `f` for trials `0..n` on the configured pool, results in trial order.
fn par_trials<T, F>(cfg: &ExperimentConfig, key: u64, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync,
{
    let pool = cfg.pool()?;
    let seed = cfg.seed;
    pool.install(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|t| f(t, &mut trial_rng(seed, key, t)))
            .collect()
    })
}

fn subset_label(s: &[usize]) -> String {
    s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn coeff_label(a: &CoeffVector) -> String {
    a.values().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------------------
// Sum-rate versus number of users
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateRow {
    pub l: usize,
    pub alg: Summary,
    pub oracle: Option<Summary>,
    /// Lower bound with its vanishing correction set to zero.
    pub lb: Option<f64>,
    pub ub: Option<f64>,
}

pub fn run_sumrate_vs_l(cfg: &ExperimentConfig) -> Result<(Vec<SumRateRow>, Table)> {
    cfg.check()?;
    let p = cfg.power()?;
    let k = cfg.k;
    let mut rows = Vec::new();
    for &l in &cfg.l_grid {
        let with_oracle = l <= cfg.oracle_max_l && scheduler::binomial(l, k) <= scheduler::MAX_SUBSETS;
        let per_trial = par_trials(cfg, stream_key("fig1", l as u64), cfg.trials, |_, rng| {
            let h = sample_channel(l, rng);
            let alg = scheduler::algorithm1(&h, k, p)?.sum_rate.value();
            let oracle = if with_oracle {
                Some(scheduler::oracle_full(&h, k, p)?.sum_rate.value())
            } else {
                None
            };
            Ok((alg, oracle))
        })?;
        let alg: Vec<f64> = per_trial.iter().map(|t| t.0).collect();
        let oracle: Option<Vec<f64>> = per_trial.iter().map(|t| t.1).collect();
        let lb = BoundParams::new(l as u64, k as u32, p, cfg.delta)
            .and_then(|bp| bounds::asymptotic_lower_bound_sumrate(&bp))
            .ok();
        let ub = bounds::upper_bound_sumrate(l as u64, k as u32, p).ok();
        rows.push(SumRateRow {
            l,
            alg: Summary::of(&alg),
            oracle: oracle.map(|o| Summary::of(&o)),
            lb,
            ub,
        });
    }
    let mut t = Table::new(&["L", "alg_mean", "alg_stderr", "oracle_mean", "oracle_stderr", "lb", "ub"]);
    for r in &rows {
        t.push(vec![
            r.l.into(),
            r.alg.mean.into(),
            r.alg.stderr.into(),
            Cell::opt(r.oracle.map(|o| o.mean)),
            Cell::opt(r.oracle.map(|o| o.stderr)),
            Cell::opt(r.lb),
            Cell::opt(r.ub),
        ]);
    }
    Ok((rows, t))
}

// ---------------------------------------------------------------------------
// Rate scatter over (angle, |a|^2)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub l: usize,
    pub subset: Vec<usize>,
    pub a: CoeffVector,
    pub theta: f64,
    pub norm2: i64,
    pub rate: Rate,
    /// High-SNR limit of the rate at the same `(theta, |a|^2)`.
    pub envelope: Rate,
}

pub fn run_rate_scatter(cfg: &ExperimentConfig) -> Result<(Vec<ScatterPoint>, Table)> {
    let p = cfg.power()?;
    let k = cfg.k;
    let candidates: Vec<CoeffVector> = coeff_search::enumerate_candidates(k, cfg.norm_max as f64)?.collect();
    let mut points = Vec::new();
    for &l in &cfg.l_grid {
        if scheduler::binomial(l, k) > scheduler::MAX_SUBSETS {
            return Err(Error::Resource(format!("C({l},{k}) subsets exceeds the limit")));
        }
        let h = sample_channel(l, &mut trial_rng(cfg.seed, stream_key("fig2", l as u64), 0));
        let mut err = None;
        for_each_subset(l, k, |s| {
            let sub = h.select(s);
            for a in &candidates {
                let res = rate::computation_rate(&sub, a, p).and_then(|r| Ok((r, rate::high_snr_rate(&sub, a)?)));
                match res {
                    Ok((r, env)) => points.push(ScatterPoint {
                        l,
                        subset: s.to_vec(),
                        a: a.clone(),
                        theta: r.angle,
                        norm2: a.norm2(),
                        rate: r.rate,
                        envelope: env,
                    }),
                    Err(e) => err = Some(e),
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    let mut t = Table::new(&["L", "subset", "a", "theta", "norm2", "rate", "envelope"]);
    for q in &points {
        t.push(vec![
            q.l.into(),
            subset_label(&q.subset).into(),
            coeff_label(&q.a).into(),
            q.theta.into(),
            Cell::Int(q.norm2),
            q.rate.value().into(),
            q.envelope.value().into(),
        ]);
    }
    Ok((points, t))
}

// ---------------------------------------------------------------------------
// Sum-rate scatter with the per-subset optimal coefficients
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRatePoint {
    pub l: usize,
    pub subset: Vec<usize>,
    pub a: CoeffVector,
    pub theta: f64,
    pub norm2: i64,
    pub rate: Rate,
    pub sum_rate: Rate,
}

pub fn run_sumrate_scatter(cfg: &ExperimentConfig) -> Result<(Vec<SumRatePoint>, Table)> {
    let p = cfg.power()?;
    let k = cfg.k;
    let mut points = Vec::new();
    for &l in &cfg.l_grid {
        if scheduler::binomial(l, k) > scheduler::MAX_SUBSETS {
            return Err(Error::Resource(format!("C({l},{k}) subsets exceeds the limit")));
        }
        let h = sample_channel(l, &mut trial_rng(cfg.seed, stream_key("fig3", l as u64), 0));
        let mut err = None;
        for_each_subset(l, k, |s| {
            let sub = h.select(s);
            match coeff_search::optimal_coeff(&sub, p) {
                Ok((a, r)) => points.push(SumRatePoint {
                    l,
                    subset: s.to_vec(),
                    norm2: a.norm2(),
                    a,
                    theta: r.angle,
                    rate: r.rate,
                    sum_rate: r.sum_rate,
                }),
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    let mut t = Table::new(&["L", "subset", "a", "theta", "norm2", "rate", "sum_rate"]);
    for q in &points {
        t.push(vec![
            q.l.into(),
            subset_label(&q.subset).into(),
            coeff_label(&q.a).into(),
            q.theta.into(),
            Cell::Int(q.norm2),
            q.rate.value().into(),
            q.sum_rate.value().into(),
        ]);
    }
    Ok((points, t))
}

/// Squared norm of the coefficient vector at the largest sum-rate (first on ties).
pub fn argmax_norm2(points: &[SumRatePoint]) -> Option<i64> {
    let mut best: Option<&SumRatePoint> = None;
    for q in points {
        if best.is_none_or(|b| q.sum_rate > b.sum_rate) {
            best = Some(q);
        }
    }
    best.map(|b| b.norm2)
}

// ---------------------------------------------------------------------------
// Fixed coefficient vector: minimal angle vs best subset vs random subset
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedCoeffRow {
    pub p: f64,
    pub a: CoeffVector,
    pub min_angle: Summary,
    pub optimal: Summary,
    pub random: Summary,
}

pub fn run_fixed_a_comparison(cfg: &ExperimentConfig) -> Result<(Vec<FixedCoeffRow>, Table)> {
    cfg.check()?;
    let l = *cfg.l_grid.first().ok_or_else(|| Error::usage("fixed-a comparison needs one L"))?;
    let coeffs: Vec<CoeffVector> = cfg.coeffs.iter().cloned().map(CoeffVector::new).collect::<Result<_>>()?;
    let powers: Vec<Power> = cfg.p_grid.iter().map(|&p| Power::new(p)).collect::<Result<_>>()?;
    if coeffs.is_empty() || powers.is_empty() {
        return Err(Error::usage("fixed-a comparison needs coefficient vectors and a power grid"));
    }
    // per trial: [a][P] -> (min-angle, optimal, random)
    let per_trial = par_trials(cfg, stream_key("fig4", l as u64), cfg.trials, |_, rng| {
        let h = sample_channel(l, rng);
        let mut out = Vec::with_capacity(coeffs.len());
        for a in &coeffs {
            let ma = scheduler::min_angle_schedule(&h, a, None)?;
            let users = scheduler::random_subset(l, a.len(), rng)?;
            let rsub = h.select(&users);
            let rcoef = coeff_search::align_signs(a, &rsub)?;
            let mut per_p = Vec::with_capacity(powers.len());
            for &p in &powers {
                let m = rate::computation_rate(&ma.sub_channel, &ma.coeffs, p)?.rate.value();
                let o = scheduler::best_schedule_for_coeff(&h, a, p)?.rate.value();
                let r = rate::computation_rate(&rsub, &rcoef, p)?.rate.value();
                per_p.push((m, o, r));
            }
            out.push(per_p);
        }
        Ok(out)
    })?;
    let mut rows = Vec::new();
    for (ai, a) in coeffs.iter().enumerate() {
        for (pi, p) in powers.iter().enumerate() {
            let pick = |f: fn(&(f64, f64, f64)) -> f64| -> Vec<f64> { per_trial.iter().map(|t| f(&t[ai][pi])).collect() };
            rows.push(FixedCoeffRow {
                p: p.value(),
                a: a.clone(),
                min_angle: Summary::of(&pick(|x| x.0)),
                optimal: Summary::of(&pick(|x| x.1)),
                random: Summary::of(&pick(|x| x.2)),
            });
        }
    }
    let mut t = Table::new(&[
        "P",
        "a",
        "min_angle_mean",
        "min_angle_stderr",
        "optimal_mean",
        "optimal_stderr",
        "random_mean",
        "random_stderr",
    ]);
    for r in &rows {
        t.push(vec![
            r.p.into(),
            coeff_label(&r.a).into(),
            r.min_angle.mean.into(),
            r.min_angle.stderr.into(),
            r.optimal.mean.into(),
            r.optimal.stderr.into(),
            r.random.mean.into(),
            r.random.stderr.into(),
        ]);
    }
    Ok((rows, t))
}

// ---------------------------------------------------------------------------
// How often a fixed non-unit vector beats every unit vector
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitEnvelopeRow {
    pub a: CoeffVector,
    /// Fraction of draws where the best unit-vector rate is at most `R(h, a)`.
    pub prob: f64,
    pub stderr: f64,
    /// `exp(-(L - 3) ln|a|)` evaluated with `L = dim`, for reference.
    pub bound: f64,
}

/// For every canonical non-unit `a` of dimension `k` with `|a|^2 <= norm_max`,
/// the empirical probability over Gaussian `h` that `a` is at least as good
/// as the best unit vector.
pub fn run_unit_envelope(cfg: &ExperimentConfig) -> Result<(Vec<UnitEnvelopeRow>, Table)> {
    cfg.check()?;
    let p = cfg.power()?;
    let k = cfg.k;
    let coeffs: Vec<CoeffVector> = coeff_search::enumerate_candidates(k, cfg.norm_max as f64)?
        .filter(|a| !a.is_unit())
        .collect();
    let per_trial = par_trials(cfg, stream_key("unit-envelope", k as u64), cfg.trials, |_, rng| {
        let h = sample_channel(k, rng);
        let unit = coeff_search::best_unit_vector(&h, p)?.1.rate;
        coeffs
            .iter()
            .map(|a| Ok(unit <= rate::computation_rate(&h, a, p)?.rate))
            .collect::<Result<Vec<bool>>>()
    })?;
    let mut rows = Vec::new();
    for (i, a) in coeffs.iter().enumerate() {
        let hits: Vec<f64> = per_trial.iter().map(|t| t[i] as u8 as f64).collect();
        let s = Summary::of(&hits);
        rows.push(UnitEnvelopeRow {
            a: a.clone(),
            prob: s.mean,
            stderr: s.stderr,
            bound: coeff_search::unit_prob_bound(k, a)?,
        });
    }
    let mut t = Table::new(&["a", "norm2", "prob", "stderr", "bound"]);
    for r in &rows {
        t.push(vec![
            coeff_label(&r.a).into(),
            Cell::Int(r.a.norm2()),
            r.prob.into(),
            r.stderr.into(),
            r.bound.into(),
        ]);
    }
    Ok((rows, t))
}

// ---------------------------------------------------------------------------
// Squared cosine to a fixed direction against Beta(1/2, (k-1)/2)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaCheck {
    pub k: usize,
    /// Independent channel draws, one per sample.
    pub n: usize,
    pub ks: f64,
    pub mean: Summary,
    /// Samples from every `k`-subset of one shared channel vector. These are
    /// dependent; their KS distance is reported but not a test statistic.
    pub shared_n: usize,
    pub shared_ks: f64,
}

/// `cos^2` of the angle between `h` and the all-ones direction.
pub fn cos2_to_ones(h: &[f64]) -> f64 {
    let s: f64 = h.iter().sum();
    s * s / (h.len() as f64 * rate::norm2(h))
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs())
    })
}

fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

pub fn run_beta_angle_check(cfg: &ExperimentConfig) -> Result<(BetaCheck, Table)> {
    cfg.check()?;
    let k = cfg.k;
    if k < 2 {
        return Err(Error::usage("the angle law needs k >= 2"));
    }
    let beta = Beta::new(0.5, (k as f64 - 1.0) / 2.0).map_err(|e| Error::usage(e.to_string()))?;
    let cdf = |x: f64| beta.cdf(x);

    let mut indep = par_trials(cfg, stream_key("beta", k as u64), cfg.trials, |_, rng| {
        Ok(cos2_to_ones(sample_channel(k, rng).values()))
    })?;
    let ks = ks_distance(&indep, cdf);
    let mean = Summary::of(&indep);

    let l = cfg.l_grid.first().copied().unwrap_or(45);
    let mut shared = Vec::new();
    if l >= k && scheduler::binomial(l, k) <= scheduler::MAX_SUBSETS {
        let h = sample_channel(l, &mut trial_rng(cfg.seed, stream_key("beta-shared", k as u64), 0));
        for_each_subset(l, k, |s| shared.push(cos2_to_ones(h.select(s).values())));
    }
    let shared_ks = if shared.is_empty() { f64::NAN } else { ks_distance(&shared, cdf) };

    indep.sort_by(f64::total_cmp);
    shared.sort_by(f64::total_cmp);
    let mut t = Table::new(&["source", "dependent", "k", "x", "empirical_cdf", "beta_cdf", "ks_distance"]);
    for (name, dep, xs, d) in [("independent", 0usize, &indep, ks), ("shared", 1, &shared, shared_ks)] {
        if xs.is_empty() {
            continue;
        }
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            t.push(vec![
                name.into(),
                dep.into(),
                k.into(),
                x.into(),
                empirical_cdf(xs, x).into(),
                cdf(x).into(),
                d.into(),
            ]);
        }
    }
    Ok((
        BetaCheck {
            k,
            n: indep.len(),
            ks,
            mean,
            shared_n: shared.len(),
            shared_ks,
        },
        t,
    ))
}

// ---------------------------------------------------------------------------
// Completion time: phases until the collected rows reach rank L
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRow {
    pub l: usize,
    pub k: usize,
    pub policy: Policy,
    pub phases: Summary,
    pub min_phases: usize,
    pub max_phases: usize,
    /// Trials that hit [`MAX_PHASES`] before reaching full rank.
    pub flagged: usize,
}

fn phase_row<R: Rng + ?Sized>(l: usize, k: usize, policy: Policy, p: Power, rng: &mut R, row: &mut [i64]) -> Result<()> {
    row.iter_mut().for_each(|x| *x = 0);
    match policy {
        Policy::Unit => row[rng.gen_range(0..l)] = 1,
        Policy::RandomSubset => {
            for u in scheduler::random_subset(l, k, rng)? {
                row[u] = if rng.gen::<bool>() { 1 } else { -1 };
            }
        }
        Policy::Algorithm1 => {
            let h = sample_channel(l, rng);
            let s = scheduler::algorithm1(&h, k, p)?;
            for (&u, &c) in s.user_indices.iter().zip(s.coeffs.values()) {
                row[u] = c;
            }
        }
    }
    Ok(())
}

/// Phases needed by one trial, or `None` when the guard was hit.
pub fn completion_phases<R: Rng + ?Sized>(l: usize, k: usize, policy: Policy, p: Power, rng: &mut R) -> Result<Option<usize>> {
    let mut tracker = RankTracker::new(l);
    let mut row = vec![0i64; l];
    for phase in 1..=MAX_PHASES {
        phase_row(l, k, policy, p, rng, &mut row)?;
        tracker.insert(&row);
        if tracker.is_full() {
            return Ok(Some(phase));
        }
    }
    Ok(None)
}

/// Completion-time statistics for one `(L, k, policy)` point.
pub fn completion_time(cfg: &ExperimentConfig, l: usize, k: usize, policy: Policy) -> Result<CompletionRow> {
    cfg.check()?;
    let k = if policy == Policy::Unit { 1 } else { k };
    if k < 1 || k > l {
        return Err(Error::usage(format!("need 1 <= k <= L, got k = {k}, L = {l}")));
    }
    let p = cfg.power()?;
    let point = (l as u64) << 32 | (k as u64) << 8 | policy as u64;
    let phases = par_trials(cfg, stream_key("completion", point), cfg.trials, |_, rng| {
        completion_phases(l, k, policy, p, rng)
    })?;
    let flagged = phases.iter().filter(|x| x.is_none()).count();
    let counts: Vec<f64> = phases.iter().map(|x| x.unwrap_or(MAX_PHASES) as f64).collect();
    let as_int = |x: f64| x as usize;
    Ok(CompletionRow {
        l,
        k,
        policy,
        phases: Summary::of(&counts),
        min_phases: as_int(counts.iter().cloned().fold(f64::INFINITY, f64::min)),
        max_phases: as_int(counts.iter().cloned().fold(0.0, f64::max)),
        flagged,
    })
}

pub fn run_completion_time(cfg: &ExperimentConfig) -> Result<(Vec<CompletionRow>, Table)> {
    let mut rows = Vec::new();
    for &l in &cfg.l_grid {
        let k = if cfg.k_log2 { (l as f64).log2().ceil().max(1.0) as usize } else { cfg.k };
        rows.push(completion_time(cfg, l, k, cfg.policy)?);
    }
    let mut t = Table::new(&[
        "L",
        "k",
        "policy",
        "trials",
        "mean_phases",
        "stddev_phases",
        "stderr_phases",
        "min_phases",
        "max_phases",
        "mean_over_L",
        "flagged",
    ]);
    for r in &rows {
        t.push(vec![
            r.l.into(),
            r.k.into(),
            r.policy.name().into(),
            r.phases.n.into(),
            r.phases.mean.into(),
            r.phases.stddev.into(),
            r.phases.stderr.into(),
            r.min_phases.into(),
            r.max_phases.into(),
            (r.phases.mean / r.l as f64).into(),
            r.flagged.into(),
        ]);
    }
    Ok((rows, t))
}

/// `sum_{i=1..n} 1/i`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(1), 1.0);
        assert!((30.0 * harmonic(30) - 119.849_613_927_611_71).abs() < 1e-9);
    }

    #[test]
    fn ks_against_exact_cdf() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_distance(&xs, |x| x) - 0.005).abs() < 1e-12);
        assert!((ks_distance(&[0.5], |x| x) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cos2_extremes() {
        assert!((cos2_to_ones(&[2.0, 2.0, 2.0]) - 1.0).abs() < 1e-15);
        assert_eq!(cos2_to_ones(&[1.0, -1.0]), 0.0);
    }

    #[test]
    fn unit_rows_are_one_hot() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut row = vec![5i64; 7];
        for policy in [Policy::Unit, Policy::RandomSubset, Policy::Algorithm1] {
            let k = if policy == Policy::Unit { 1 } else { 3 };
            phase_row(7, k, policy, Power::new(10.0).unwrap(), &mut rng, &mut row).unwrap();
            assert_eq!(row.iter().filter(|&&x| x != 0).count(), k);
            assert!(row.iter().all(|x| x.abs() <= 1));
        }
    }

    #[test]
    fn completion_needs_at_least_l_phases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = Power::new(1.0).unwrap();
        for _ in 0..20 {
            assert!(completion_phases(6, 1, Policy::Unit, p, &mut rng).unwrap().unwrap() >= 6);
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig::fixed_a_comparison();
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"policy\":\"unit\""));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), cfg);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = ExperimentConfig { trials: 0, ..ExperimentConfig::sumrate_vs_l() };
        assert!(matches!(run_sumrate_vs_l(&cfg), Err(Error::Usage(_))));
    }
}
