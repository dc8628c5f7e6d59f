//! Exhaustive ground truth for tiny ensembles.
//!
//! Every socket matching (all `E!` permutations, duplicates included, which
//! is the uniform configuration measure) is combined with every defective
//! set, the detector is run, and outcomes are tallied exactly. Work is split
//! into disjoint permutation-rank windows and merged by integer addition, so
//! the result does not depend on scheduling.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::combinatorics::{factorial_saturating, lcm_up_to};
use crate::detection::{Algorithm, DdRule, Detector};
use crate::ensemble::{display_saturated, EnsembleSpec, Permutations, PoolingGraph, SocketLayout};
use crate::enumerator::{cells, EnumeratorTable};
use crate::error::{Error, Result};

pub const DEFAULT_LIMIT: u64 = 1_000_000;

// Permutation ranks handed to one worker at a time.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Upper bound on enumerated matchings (`E!`), and on `E! * 2^n` for
    /// probability evaluation.
    pub limit: u64,
    pub rule: DdRule,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            limit: DEFAULT_LIMIT,
            rule: DdRule::Socket,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub spec: EnsembleSpec,
    pub algorithm: Algorithm,
    /// Enumerator values in the same layout as the closed forms produce.
    pub exact_table: EnumeratorTable,
    pub matchings_enumerated: u64,
    /// (matching, pattern) pairs that produced the error type the algorithm
    /// can never make: misdetections under COMP, false alarms under DD.
    pub impossible_errors: u64,
}

/// Ensemble-average enumerator table by exhaustive enumeration.
pub fn exact_enumerators(
    spec: &EnsembleSpec,
    algorithm: Algorithm,
    options: OracleOptions,
) -> Result<OracleReport> {
    let layout = SocketLayout::new(spec)?;
    let total = checked_matchings(&layout, options.limit, 1)?;
    let n = spec.n as usize;
    check_pattern_count(n)?;
    let patterns = all_patterns(n);

    let counts = par_windows(total, |start, len| {
        let mut tally = Tally::new(n);
        let mut perm = Permutations::new(layout.edges(), start, len);
        let mut graph: Option<PoolingGraph> = None;
        let mut detector = Detector::new(algorithm, options.rule);
        while let Some(matching) = perm.next_ref() {
            let g = match graph.as_mut() {
                Some(g) => {
                    layout.refill(matching, g);
                    g
                }
                None => graph.insert(layout.graph(matching)),
            };
            for (x, defectives) in &patterns {
                let errs = detector.detect(g, x);
                let (target, other) = match algorithm {
                    Algorithm::Comp => (errs.false_alarms, errs.misdetections),
                    Algorithm::Dd => (errs.misdetections, errs.false_alarms),
                };
                tally.counts[*defectives][target] += 1;
                if other > 0 {
                    tally.impossible += 1;
                }
            }
            perm.advance();
        }
        tally
    })
    .into_iter()
    .fold(Tally::new(n), Tally::merge);

    let denom = BigInt::from(total);
    let values = cells(algorithm, n)
        .into_iter()
        .map(|(a, j)| {
            let v = BigRational::new(BigInt::from(counts.counts[a][j]), denom.clone());
            ((a, j), v)
        })
        .collect();
    Ok(OracleReport {
        spec: spec.clone(),
        algorithm,
        exact_table: EnumeratorTable {
            algorithm,
            spec: spec.clone(),
            values,
        },
        matchings_enumerated: total,
        impossible_errors: counts.impossible,
    })
}

/// Exact expectation of the per-trial error rate over all matchings and all
/// `2^n` defectivity patterns drawn i.i.d. Bernoulli(`delta`).
///
/// The per-trial rate is `false alarms / (n - defectives)` for COMP and
/// `misdetections / defectives` for DD, and zero when that denominator is
/// zero; this is the quantity the closed-form probability sums compute.
pub fn exact_error_probability(
    spec: &EnsembleSpec,
    algorithm: Algorithm,
    delta: &BigRational,
    options: OracleOptions,
) -> Result<BigRational> {
    if delta.is_negative() || *delta > BigRational::from_integer(1.into()) {
        return Err(Error::Usage(format!(
            "prevalence {delta} is outside [0, 1]"
        )));
    }
    let layout = SocketLayout::new(spec)?;
    let n = spec.n as usize;
    check_pattern_count(n)?;
    let total = checked_matchings(&layout, options.limit, n)?;
    let patterns = all_patterns(n);

    // delta = p / q; a pattern with a defectives has probability
    // p^a (q - p)^(n - a) / q^n. Rates j / d share the denominator lcm(1..n).
    let p = delta.numer().clone();
    let q = delta.denom().clone();
    let lcm = lcm_up_to(n as u64);
    let weights: Vec<BigInt> = (0..=n)
        .map(|a| num_traits::pow(p.clone(), a) * num_traits::pow(&q - &p, n - a))
        .collect();
    let scale: Vec<BigInt> = (0..=n)
        .map(|d| {
            if d == 0 {
                BigInt::zero()
            } else {
                lcm.div_floor(&BigInt::from(d))
            }
        })
        .collect();

    let numerator: BigInt = par_windows(total, |start, len| {
        let mut acc = BigInt::zero();
        let mut perm = Permutations::new(layout.edges(), start, len);
        let mut detector = Detector::new(algorithm, options.rule);
        let mut graph: Option<PoolingGraph> = None;
        while let Some(matching) = perm.next_ref() {
            let g = match graph.as_mut() {
                Some(g) => {
                    layout.refill(matching, g);
                    g
                }
                None => graph.insert(layout.graph(matching)),
            };
            for (x, a) in &patterns {
                let errs = detector.detect(g, x);
                let (count, denom) = match algorithm {
                    Algorithm::Comp => (errs.false_alarms, n - a),
                    Algorithm::Dd => (errs.misdetections, *a),
                };
                if count > 0 && denom > 0 {
                    acc += &weights[*a] * &scale[denom] * BigInt::from(count);
                }
            }
            perm.advance();
        }
        acc
    })
    .into_iter()
    .sum();

    let denominator = num_traits::pow(q, n) * lcm * BigInt::from(total);
    Ok(BigRational::new(numerator, denominator))
}

struct Tally {
    counts: Vec<Vec<u64>>,
    impossible: u64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            counts: vec![vec![0; n + 1]; n + 1],
            impossible: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (row, other_row) in self.counts.iter_mut().zip(other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
        self.impossible += other.impossible;
        self
    }
}

fn checked_matchings(layout: &SocketLayout, limit: u64, n_for_patterns: usize) -> Result<u64> {
    let total = factorial_saturating(layout.edges() as u64);
    let patterns: u128 = if n_for_patterns >= 128 {
        u128::MAX
    } else {
        1u128 << n_for_patterns
    };
    let work = if n_for_patterns > 1 {
        total.saturating_mul(patterns)
    } else {
        total
    };
    if work > limit as u128 {
        let what = if n_for_patterns > 1 {
            "exhaustive probability (matchings x patterns)"
        } else {
            "exhaustive enumeration (matchings)"
        };
        return Err(Error::SizeLimit {
            what,
            required: display_saturated(work),
            limit,
        });
    }
    Ok(total as u64)
}

fn check_pattern_count(n: usize) -> Result<()> {
    if n > 24 {
        return Err(Error::SizeLimit {
            what: "defectivity pattern enumeration",
            required: format!("2^{n}"),
            limit: 1 << 24,
        });
    }
    Ok(())
}

/// Every pattern with its number of defectives.
fn all_patterns(n: usize) -> Vec<(Vec<bool>, usize)> {
    (0..1u64 << n)
        .map(|mask| {
            let x: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
            (x, mask.count_ones() as usize)
        })
        .collect()
}

/// Runs `work(start_rank, len)` over disjoint windows covering `0..total`,
/// returning per-window results in rank order.
fn par_windows<T: Send>(total: u64, work: impl Fn(u64, u64) -> T + Sync) -> Vec<T> {
    let windows: Vec<(u64, u64)> = (0..total.div_ceil(CHUNK))
        .map(|w| {
            let start = w * CHUNK;
            (start, CHUNK.min(total - start))
        })
        .collect();
    windows
        .into_par_iter()
        .map(|(start, len)| work(start, len))
        .collect()
}
