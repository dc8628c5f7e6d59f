//! Noiseless COMP and DD detection on a concrete pooling graph.

use std::fmt;
use std::str::FromStr;

use crate::ensemble::PoolingGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Comp,
    Dd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Comp => "COMP",
            Algorithm::Dd => "DD",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "comp" => Ok(Algorithm::Comp),
            "dd" => Ok(Algorithm::Dd),
            other => Err(Error::Usage(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// How a positive test decides that it holds a single possible defective.
///
/// `Socket` counts incident sockets: a test with two edges to the same PD
/// item has two PD sockets and certifies nothing. This is the counting used
/// by the enumerators. `NodeSet` counts distinct items instead; the two agree
/// on simple graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DdRule {
    #[default]
    Socket,
    NodeSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Definitely non-defective.
    Dnd,
    /// Possible defective.
    Pd,
    /// Definite defective.
    Dd,
}

/// Defectivity vector; `true` marks a defective item.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DefectivityPattern(pub Vec<bool>);

impl DefectivityPattern {
    pub fn from_bits(bits: &[u8]) -> Self {
        DefectivityPattern(bits.iter().map(|&b| b != 0).collect())
    }

    /// Pattern whose item `v` is defective iff bit `v` of `mask` is set.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        DefectivityPattern((0..n).map(|v| mask >> v & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn defectives(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionResult {
    pub labels: Vec<Label>,
    pub estimate: Vec<bool>,
    pub positive_tests: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ErrorCounts {
    pub false_alarms: usize,
    pub misdetections: usize,
}

pub fn run_comp(graph: &PoolingGraph, x: &DefectivityPattern) -> Result<DetectionResult> {
    check_dims(graph, x)?;
    let positive_tests = positive_tests(graph, &x.0);
    let labels = comp_labels(graph, &positive_tests);
    let estimate = labels.iter().map(|&l| l == Label::Pd).collect();
    Ok(DetectionResult {
        labels,
        estimate,
        positive_tests,
    })
}

/// DD with the socket-level rule.
pub fn run_dd(graph: &PoolingGraph, x: &DefectivityPattern) -> Result<DetectionResult> {
    run_dd_with(graph, x, DdRule::Socket)
}

pub fn run_dd_with(
    graph: &PoolingGraph,
    x: &DefectivityPattern,
    rule: DdRule,
) -> Result<DetectionResult> {
    check_dims(graph, x)?;
    let positive_tests = positive_tests(graph, &x.0);
    let mut labels = comp_labels(graph, &positive_tests);
    for (t, members) in graph.adj.iter().enumerate() {
        if !positive_tests[t] {
            continue;
        }
        if let Some(v) = sole_pd(members, |v| labels[v] != Label::Dnd, rule) {
            labels[v] = Label::Dd;
        }
    }
    let estimate = labels.iter().map(|&l| l == Label::Dd).collect();
    Ok(DetectionResult {
        labels,
        estimate,
        positive_tests,
    })
}

pub fn run(
    algorithm: Algorithm,
    graph: &PoolingGraph,
    x: &DefectivityPattern,
    rule: DdRule,
) -> Result<DetectionResult> {
    match algorithm {
        Algorithm::Comp => run_comp(graph, x),
        Algorithm::Dd => run_dd_with(graph, x, rule),
    }
}

pub fn count_errors(x: &DefectivityPattern, result: &DetectionResult) -> Result<ErrorCounts> {
    if x.len() != result.estimate.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: result.estimate.len(),
        });
    }
    Ok(tally(&x.0, &result.estimate))
}

fn tally(truth: &[bool], estimate: &[bool]) -> ErrorCounts {
    let mut counts = ErrorCounts::default();
    for (&t, &e) in truth.iter().zip(estimate) {
        match (t, e) {
            (false, true) => counts.false_alarms += 1,
            (true, false) => counts.misdetections += 1,
            _ => {}
        }
    }
    counts
}

fn check_dims(graph: &PoolingGraph, x: &DefectivityPattern) -> Result<()> {
    if x.len() != graph.n {
        return Err(Error::Dimension {
            expected: graph.n,
            found: x.len(),
        });
    }
    Ok(())
}

fn positive_tests(graph: &PoolingGraph, x: &[bool]) -> Vec<bool> {
    graph
        .adj
        .iter()
        .map(|members| members.iter().any(|&v| x[v]))
        .collect()
}

// Items in a negative test are DND, everything else is PD (including items
// with no tests at all).
fn comp_labels(graph: &PoolingGraph, positive: &[bool]) -> Vec<Label> {
    let mut labels = vec![Label::Pd; graph.n];
    for (members, &pos) in graph.adj.iter().zip(positive) {
        if !pos {
            for &v in members {
                labels[v] = Label::Dnd;
            }
        }
    }
    labels
}

#[inline]
fn sole_pd(members: &[usize], is_pd: impl Fn(usize) -> bool, rule: DdRule) -> Option<usize> {
    let mut found: Option<usize> = None;
    for &v in members {
        if !is_pd(v) {
            continue;
        }
        match (found, rule) {
            (None, _) => found = Some(v),
            (Some(u), DdRule::NodeSet) if u == v => {}
            _ => return None,
        }
    }
    found
}

/// Allocation-free detector for hot loops (oracle and Monte Carlo). Produces
/// the same estimates as [`run_comp`] / [`run_dd_with`].
#[derive(Debug, Clone)]
pub struct Detector {
    algorithm: Algorithm,
    rule: DdRule,
    positive: Vec<bool>,
    dnd: Vec<bool>,
    estimate: Vec<bool>,
}

impl Detector {
    pub fn new(algorithm: Algorithm, rule: DdRule) -> Self {
        Detector {
            algorithm,
            rule,
            positive: Vec::new(),
            dnd: Vec::new(),
            estimate: Vec::new(),
        }
    }

    /// Runs detection and returns the error counts; the estimate stays
    /// available through [`Detector::estimate`].
    pub fn detect(&mut self, graph: &PoolingGraph, x: &[bool]) -> ErrorCounts {
        debug_assert_eq!(x.len(), graph.n);
        self.positive.clear();
        self.positive.extend(
            graph
                .adj
                .iter()
                .map(|members| members.iter().any(|&v| x[v])),
        );
        self.dnd.clear();
        self.dnd.resize(graph.n, false);
        for (members, &pos) in graph.adj.iter().zip(&self.positive) {
            if !pos {
                for &v in members {
                    self.dnd[v] = true;
                }
            }
        }
        self.estimate.clear();
        match self.algorithm {
            Algorithm::Comp => self.estimate.extend(self.dnd.iter().map(|&d| !d)),
            Algorithm::Dd => {
                self.estimate.resize(graph.n, false);
                for (members, &pos) in graph.adj.iter().zip(&self.positive) {
                    if pos {
                        if let Some(v) = sole_pd(members, |v| !self.dnd[v], self.rule) {
                            self.estimate[v] = true;
                        }
                    }
                }
            }
        }
        tally(x, &self.estimate)
    }

    pub fn estimate(&self) -> &[bool] {
        &self.estimate
    }
}
