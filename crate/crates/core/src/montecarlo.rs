//! Monte Carlo estimation of FAR (COMP) and MDR (DD) versus prevalence.
//!
//! Each replicate draws a fresh configuration-model graph, then a sequence
//! of i.i.d. Bernoulli(`delta`) defectivity patterns. Per trial the false
//! alarm rate is `fa / (n - defectives)` and the misdetection rate
//! `md / defectives`, with zero-denominator trials contributing 0.
//!
//! Seeds are derived with a SplitMix64 chain:
//! `graph seed = mix(mix(mix(master) ^ g) ^ 0)` and the seed of pattern batch
//! `b` of graph `g` is `mix(mix(mix(master) ^ g) ^ (b + 1))`, where `mix` is
//! the SplitMix64 finalizer. Every graph is processed sequentially and the
//! per-graph accumulators are merged in graph order, so results are
//! bit-identical for any worker count.
//!
//! The reported standard error treats graphs as the sampling unit (sample
//! std of per-graph mean rates over `sqrt(graphs)`): the target is an
//! ensemble average and graph-to-graph variation dominates the noise. The
//! pooled per-trial figure is kept alongside for reference.

use std::io::Write;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combinatorics::to_decimal;
use crate::detection::{Algorithm, DdRule, Detector};
use crate::ensemble::{sample_with_layout, EnsembleSpec, SocketLayout, RNG_ALGORITHM};
use crate::error::{Error, Result};

pub const DEFAULT_GRAPHS: u64 = 100;
pub const DEFAULT_PATTERNS: u64 = 10_000;

/// Patterns drawn from one seed.
pub const PATTERN_BATCH: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationConfig {
    pub graphs: u64,
    pub patterns_per_graph: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub rule: DdRule,
    pub keep_per_graph: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            graphs: DEFAULT_GRAPHS,
            patterns_per_graph: DEFAULT_PATTERNS,
            seed: 0,
            workers: None,
            rule: DdRule::Socket,
            keep_per_graph: false,
        }
    }
}

/// Mean rates observed on one graph realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphRates {
    pub far: f64,
    pub mdr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub spec: EnsembleSpec,
    pub algorithm: Algorithm,
    pub delta: BigRational,
    pub graphs: u64,
    pub patterns_per_graph: u64,
    pub seed: u64,
    pub far_mean: f64,
    pub far_stderr: f64,
    pub mdr_mean: f64,
    pub mdr_stderr: f64,
    /// Standard errors over all trials pooled, ignoring graph clustering.
    pub far_trial_stderr: f64,
    pub mdr_trial_stderr: f64,
    pub per_graph_rates: Option<Vec<GraphRates>>,
    /// Closed-form probability, when the caller supplies one.
    pub analytic: Option<BigRational>,
}

impl TrialReport {
    /// Mean and standard error of the error type the algorithm can make.
    pub fn primary(&self) -> (f64, f64) {
        match self.algorithm {
            Algorithm::Comp => (self.far_mean, self.far_stderr),
            Algorithm::Dd => (self.mdr_mean, self.mdr_stderr),
        }
    }
}

/// Streaming mean and sum of squared deviations (Welford), mergeable with
/// Chan's parallel update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RateAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RateAccumulator {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn merge(&mut self, other: &RateAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / total as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// `sample std / sqrt(count)`.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `stream` of replicate `index` under `master`.
pub fn stream_seed(master: u64, index: u64, stream: u64) -> u64 {
    mix(mix(mix(master) ^ index) ^ stream)
}

/// Runs the protocol at one prevalence.
pub fn simulate(
    spec: &EnsembleSpec,
    algorithm: Algorithm,
    delta: &BigRational,
    config: &SimulationConfig,
) -> Result<TrialReport> {
    let (p, q) = check_inputs(delta, config)?;
    let layout = SocketLayout::new(spec)?;
    let per_graph = with_workers(config.workers, || {
        (0..config.graphs)
            .into_par_iter()
            .map(|g| run_graph(&layout, algorithm, p, q, g, config))
            .collect::<Vec<_>>()
    })?;

    let mut far = RateAccumulator::default();
    let mut mdr = RateAccumulator::default();
    let mut far_graphs = RateAccumulator::default();
    let mut mdr_graphs = RateAccumulator::default();
    for (f, m) in &per_graph {
        far.merge(f);
        mdr.merge(m);
        far_graphs.push(f.mean());
        mdr_graphs.push(m.mean());
    }
    let clustered = |graphs: &RateAccumulator, trials: &RateAccumulator| {
        if graphs.count() >= 2 {
            graphs.stderr()
        } else {
            trials.stderr()
        }
    };
    let per_graph_rates = config.keep_per_graph.then(|| {
        per_graph
            .iter()
            .map(|(f, m)| GraphRates {
                far: f.mean(),
                mdr: m.mean(),
            })
            .collect()
    });
    Ok(TrialReport {
        spec: spec.clone(),
        algorithm,
        delta: delta.clone(),
        graphs: config.graphs,
        patterns_per_graph: config.patterns_per_graph,
        seed: config.seed,
        far_mean: far.mean(),
        far_stderr: clustered(&far_graphs, &far),
        mdr_mean: mdr.mean(),
        mdr_stderr: clustered(&mdr_graphs, &mdr),
        far_trial_stderr: far.stderr(),
        mdr_trial_stderr: mdr.stderr(),
        per_graph_rates,
        analytic: None,
    })
}

/// One report per grid point; point `k` runs under master seed
/// `stream_seed(seed, k, 0)`. The reports record that derived seed.
pub fn sweep(
    spec: &EnsembleSpec,
    algorithm: Algorithm,
    grid: &[BigRational],
    config: &SimulationConfig,
) -> Result<Vec<TrialReport>> {
    if grid.is_empty() {
        return Err(Error::Usage("prevalence grid is empty".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(k, delta)| {
            let point = SimulationConfig {
                seed: stream_seed(config.seed, k as u64, 0),
                ..config.clone()
            };
            simulate(spec, algorithm, delta, &point)
        })
        .collect()
}

/// CSV with a comment line (spec hash, RNG, DD rule), the header
/// `delta,algorithm,n,m,graphs,patterns,far_mean,far_stderr,mdr_mean,mdr_stderr,analytic_value,seed`
/// and one row per report. Rates use the shortest round-trip decimal form.
pub fn write_csv<W: Write>(reports: &[TrialReport], mut out: W, precision: usize) -> Result<()> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Usage("no reports to write".into()))?;
    writeln!(
        out,
        "# spec_hash={} rng={} algorithm={}",
        first.spec.hash(),
        RNG_ALGORITHM,
        first.algorithm
    )?;
    writeln!(
        out,
        "delta,algorithm,n,m,graphs,patterns,far_mean,far_stderr,mdr_mean,mdr_stderr,analytic_value,seed"
    )?;
    for r in reports {
        let analytic = r
            .analytic
            .as_ref()
            .map(|a| to_decimal(a, precision))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{:?},{:?},{:?},{:?},{},{}",
            to_decimal(&r.delta, precision),
            r.algorithm,
            r.spec.n,
            r.spec.m,
            r.graphs,
            r.patterns_per_graph,
            r.far_mean,
            r.far_stderr,
            r.mdr_mean,
            r.mdr_stderr,
            analytic,
            r.seed
        )?;
    }
    Ok(())
}

fn check_inputs(delta: &BigRational, config: &SimulationConfig) -> Result<(u64, u64)> {
    if config.graphs == 0 || config.patterns_per_graph == 0 {
        return Err(Error::Usage(
            "graph and pattern counts must be at least 1".into(),
        ));
    }
    if config.workers == Some(0) {
        return Err(Error::Usage("worker count must be at least 1".into()));
    }
    if delta.is_negative() || delta.numer() > delta.denom() {
        return Err(Error::Usage(format!(
            "prevalence {delta} is outside [0, 1]"
        )));
    }
    match (delta.numer().to_u64(), delta.denom().to_u64()) {
        (Some(p), Some(q)) => Ok((p, q)),
        _ => Err(Error::Usage(format!(
            "prevalence {delta} needs a numerator and denominator below 2^64"
        ))),
    }
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {k} workers: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn run_graph(
    layout: &SocketLayout,
    algorithm: Algorithm,
    p: u64,
    q: u64,
    g: u64,
    config: &SimulationConfig,
) -> (RateAccumulator, RateAccumulator) {
    let graph = sample_with_layout(layout, stream_seed(config.seed, g, 0));
    let n = graph.n;
    let mut detector = Detector::new(algorithm, config.rule);
    let mut x = vec![false; n];
    let mut far = RateAccumulator::default();
    let mut mdr = RateAccumulator::default();
    let mut remaining = config.patterns_per_graph;
    let mut batch = 0;
    while remaining > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, g, batch + 1));
        for _ in 0..remaining.min(PATTERN_BATCH) {
            let mut defectives = 0;
            for xi in x.iter_mut() {
                *xi = rng.random_range(0..q) < p;
                defectives += *xi as usize;
            }
            let errs = detector.detect(&graph, &x);
            far.push(rate(errs.false_alarms, n - defectives));
            mdr.push(rate(errs.misdetections, defectives));
        }
        remaining = remaining.saturating_sub(PATTERN_BATCH);
        batch += 1;
    }
    (far, mdr)
}

fn rate(count: usize, denom: usize) -> f64 {
    if denom == 0 {
        0.0
    } else {
        count as f64 / denom as f64
    }
}
