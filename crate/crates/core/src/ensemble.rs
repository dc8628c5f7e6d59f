//! Pooling-graph ensembles: degree distributions, validation, configuration
//! model sampling and exhaustive socket-matching enumeration.
//!
//! Graphs are multigraphs drawn under the configuration measure: left sockets
//! and right sockets are laid out node by node (nodes ordered by ascending
//! degree) and matched by a uniformly random permutation. Multi-edges are
//! kept.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::factorial_saturating;
use crate::error::{Error, Result, ValidationError};

/// Identifier of the generator behind [`sample_graph`], recorded in outputs.
pub const RNG_ALGORITHM: &str = "chacha8-rand0.9-fisher-yates";

/// Node-oriented degree distribution: degree -> fraction of nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeDistribution {
    entries: BTreeMap<u32, BigRational>,
}

impl DegreeDistribution {
    /// Builds a distribution, dropping zero fractions. Sum-to-one and degree
    /// checks happen in [`EnsembleSpec::validate`].
    pub fn new<I: IntoIterator<Item = (u32, BigRational)>>(entries: I) -> Self {
        let mut map: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (d, f) in entries {
            *map.entry(d).or_insert_with(BigRational::zero) += f;
        }
        map.retain(|_, f| !f.is_zero());
        DegreeDistribution { entries: map }
    }

    /// All nodes have degree `d`.
    pub fn single(d: u32) -> Self {
        Self::new([(d, BigRational::one())])
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &BigRational)> + '_ {
        self.entries.iter().map(|(d, f)| (*d, f))
    }

    pub fn fraction(&self, d: u32) -> BigRational {
        self.entries
            .get(&d)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn min_degree(&self) -> u32 {
        self.entries.keys().next().copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn average(&self) -> BigRational {
        self.entries
            .iter()
            .map(|(d, f)| f * BigInt::from(*d))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// The single degree, if the distribution is concentrated on one.
    pub fn as_single(&self) -> Option<u32> {
        match self.entries.len() {
            1 => self.entries.keys().next().copied(),
            _ => None,
        }
    }

    fn check(&self, which: &'static str) -> Result<(), ValidationError> {
        if self.entries.is_empty() {
            return Err(ValidationError::EmptyDistribution { which });
        }
        for (&d, f) in &self.entries {
            if d == 0 {
                return Err(ValidationError::ZeroDegree { which });
            }
            if !f.is_positive() {
                return Err(ValidationError::NonPositiveFraction { which, degree: d });
            }
        }
        let sum = self
            .entries
            .values()
            .fold(BigRational::zero(), |acc, f| acc + f);
        if !sum.is_one() {
            return Err(ValidationError::FractionSum {
                which,
                sum: sum.to_string(),
            });
        }
        Ok(())
    }

    /// Integer node counts `(degree, total * fraction)`, ascending by degree.
    fn node_counts(
        &self,
        which: &'static str,
        total: u64,
    ) -> Result<Vec<(u32, u64)>, ValidationError> {
        self.entries
            .iter()
            .map(|(&d, f)| {
                let value = f * BigInt::from(total);
                match value
                    .is_integer()
                    .then(|| value.to_integer().to_u64())
                    .flatten()
                {
                    Some(c) => Ok((d, c)),
                    None => Err(ValidationError::NonIntegerNodeCount {
                        which,
                        degree: d,
                        count: total,
                        value: value.to_string(),
                    }),
                }
            })
            .collect()
    }
}

/// A pooling-graph ensemble: `n` items, `m` tests, left (item) and right
/// (test) degree distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n: u64,
    pub m: u64,
    pub left: DegreeDistribution,
    pub right: DegreeDistribution,
}

impl EnsembleSpec {
    pub fn new(n: u64, m: u64, left: DegreeDistribution, right: DegreeDistribution) -> Self {
        EnsembleSpec { n, m, left, right }
    }

    /// The `(l, r)`-regular ensemble with `m = n l / r`.
    ///
    /// Only the structural constraints are checked here, so tiny oracle
    /// ensembles with `m = n` can still be built; [`EnsembleSpec::validate`]
    /// additionally requires `m < n`.
    pub fn regular(n: u64, l: u32, r: u32) -> Result<Self, ValidationError> {
        if n == 0 || l == 0 || r == 0 {
            return Err(ValidationError::EmptyEnsemble);
        }
        let edges = n * l as u64;
        if !edges.is_multiple_of(r as u64) {
            return Err(ValidationError::Divisibility { edges, r });
        }
        let spec = EnsembleSpec::new(
            n,
            edges / r as u64,
            DegreeDistribution::single(l),
            DegreeDistribution::single(r),
        );
        spec.validate_structure()?;
        Ok(spec)
    }

    /// Every ensemble invariant, including `m < n`.
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.validate_structure()?;
        if self.m >= self.n {
            return Err(ValidationError::TooManyTests {
                n: self.n,
                m: self.m,
            });
        }
        Ok(())
    }

    /// Integrality, normalisation and edge-count consistency; everything the
    /// enumerators, the oracle and the sampler need.
    pub fn validate_structure(&self) -> Result<(), ValidationError> {
        if self.n == 0 || self.m == 0 {
            return Err(ValidationError::EmptyEnsemble);
        }
        self.left.check("lambda")?;
        self.right.check("rho")?;
        let left = self.left.node_counts("lambda", self.n)?;
        let right = self.right.node_counts("rho", self.m)?;
        let left_edges: u64 = left.iter().map(|(d, c)| *d as u64 * c).sum();
        let right_edges: u64 = right.iter().map(|(d, c)| *d as u64 * c).sum();
        if left_edges != right_edges {
            return Err(ValidationError::EdgeCountMismatch {
                left: left_edges,
                right: right_edges,
            });
        }
        Ok(())
    }

    /// `(l, r)` when both distributions are concentrated on a single degree.
    pub fn as_regular(&self) -> Option<(u32, u32)> {
        Some((self.left.as_single()?, self.right.as_single()?))
    }

    /// Number of items of each degree, ascending by degree.
    pub fn left_counts(&self) -> Result<Vec<(u32, u64)>, ValidationError> {
        self.left.node_counts("lambda", self.n)
    }

    /// Number of tests of each degree, ascending by degree.
    pub fn right_counts(&self) -> Result<Vec<(u32, u64)>, ValidationError> {
        self.right.node_counts("rho", self.m)
    }

    /// Total number of edges, `n * average left degree`.
    pub fn edges(&self) -> Result<u64, ValidationError> {
        Ok(self.left_counts()?.iter().map(|(d, c)| *d as u64 * c).sum())
    }

    /// Per-item degrees in node-index order.
    pub fn left_degrees(&self) -> Result<Vec<u32>, ValidationError> {
        Ok(expand_counts(&self.left_counts()?))
    }

    /// Per-test degrees in node-index order.
    pub fn right_degrees(&self) -> Result<Vec<u32>, ValidationError> {
        Ok(expand_counts(&self.right_counts()?))
    }

    /// Short content hash of the canonical serialised form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&SpecFile::from(self)).expect("spec serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        file.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecFile::from(self)).expect("spec serialises")
    }
}

fn expand_counts(counts: &[(u32, u64)]) -> Vec<u32> {
    counts
        .iter()
        .flat_map(|&(d, c)| std::iter::repeat_n(d, c as usize))
        .collect()
}

/// One `degree -> num/den` entry of the spec file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractionEntry {
    pub degree: u32,
    pub num: i64,
    pub den: i64,
}

/// On-disk ensemble description. Fractions are integer pairs; floats are
/// rejected by the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecFile {
    Full {
        n: u64,
        m: u64,
        lambda: Vec<FractionEntry>,
        rho: Vec<FractionEntry>,
    },
    Regular {
        n: u64,
        l: u32,
        r: u32,
    },
}

impl SpecFile {
    pub fn into_spec(self) -> Result<EnsembleSpec> {
        match self {
            SpecFile::Regular { n, l, r } => Ok(EnsembleSpec::regular(n, l, r)?),
            SpecFile::Full { n, m, lambda, rho } => {
                let convert = |entries: Vec<FractionEntry>| -> Result<DegreeDistribution> {
                    let mut out = Vec::with_capacity(entries.len());
                    for e in entries {
                        if e.den == 0 {
                            return Err(Error::Usage(format!(
                                "zero denominator for degree {}",
                                e.degree
                            )));
                        }
                        out.push((
                            e.degree,
                            BigRational::new(BigInt::from(e.num), BigInt::from(e.den)),
                        ));
                    }
                    Ok(DegreeDistribution::new(out))
                };
                Ok(EnsembleSpec::new(n, m, convert(lambda)?, convert(rho)?))
            }
        }
    }
}

impl From<&EnsembleSpec> for SpecFile {
    fn from(spec: &EnsembleSpec) -> Self {
        let convert = |dist: &DegreeDistribution| {
            dist.entries()
                .map(|(degree, f)| FractionEntry {
                    degree,
                    num: f.numer().to_i64().expect("fraction numerator fits i64"),
                    den: f.denom().to_i64().expect("fraction denominator fits i64"),
                })
                .collect()
        };
        SpecFile::Full {
            n: spec.n,
            m: spec.m,
            lambda: convert(&spec.left),
            rho: convert(&spec.right),
        }
    }
}

/// A concrete pooling graph. Tests own their member lists; a member appears
/// once per socket, so multi-edges show up as repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PoolingGraph {
    pub n: usize,
    pub m: usize,
    pub adj: Vec<Vec<usize>>,
    pub left_degrees: Vec<u32>,
}

impl PoolingGraph {
    pub fn edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Item -> incident tests (one entry per socket).
    pub fn item_index(&self) -> Vec<Vec<usize>> {
        let mut index = vec![Vec::new(); self.n];
        for (t, members) in self.adj.iter().enumerate() {
            for &v in members {
                index[v].push(t);
            }
        }
        index
    }

    /// Checks socket conservation and, when given, the degree sequences of
    /// the generating ensemble.
    pub fn is_consistent_with(&self, spec: &EnsembleSpec) -> bool {
        let (Ok(left), Ok(right)) = (spec.left_degrees(), spec.right_degrees()) else {
            return false;
        };
        if self.n != left.len() || self.m != right.len() || self.adj.len() != self.m {
            return false;
        }
        if self.left_degrees != left {
            return false;
        }
        let mut realized = vec![0u32; self.n];
        for (t, members) in self.adj.iter().enumerate() {
            if members.len() != right[t] as usize {
                return false;
            }
            for &v in members {
                if v >= self.n {
                    return false;
                }
                realized[v] += 1;
            }
        }
        realized == left
    }
}

/// Socket ownership for an ensemble: `left[k]` is the item owning left socket
/// `k`, `right[k]` the test owning right socket `k`.
#[derive(Debug, Clone)]
pub struct SocketLayout {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    left_degrees: Vec<u32>,
    m: usize,
}

impl SocketLayout {
    pub fn new(spec: &EnsembleSpec) -> Result<Self, ValidationError> {
        spec.validate_structure()?;
        let left_degrees = spec.left_degrees()?;
        let right_degrees = spec.right_degrees()?;
        let owners = |degrees: &[u32]| -> Vec<usize> {
            degrees
                .iter()
                .enumerate()
                .flat_map(|(node, &d)| std::iter::repeat_n(node, d as usize))
                .collect()
        };
        Ok(SocketLayout {
            left: owners(&left_degrees),
            right: owners(&right_degrees),
            m: right_degrees.len(),
            left_degrees,
        })
    }

    pub fn edges(&self) -> usize {
        self.left.len()
    }

    /// The graph in which left socket `k` is matched to right socket
    /// `matching[k]`.
    pub fn graph(&self, matching: &[usize]) -> PoolingGraph {
        let mut adj = vec![Vec::new(); self.m];
        self.fill(matching, &mut adj);
        PoolingGraph {
            n: self.left_degrees.len(),
            m: self.m,
            adj,
            left_degrees: self.left_degrees.clone(),
        }
    }

    /// Rebuilds `graph` in place for a new matching, reusing its buffers.
    pub fn refill(&self, matching: &[usize], graph: &mut PoolingGraph) {
        for members in &mut graph.adj {
            members.clear();
        }
        self.fill(matching, &mut graph.adj);
    }

    fn fill(&self, matching: &[usize], adj: &mut [Vec<usize>]) {
        for (k, &socket) in matching.iter().enumerate() {
            adj[self.right[socket]].push(self.left[k]);
        }
    }
}

/// Configuration-model draw; deterministic given `(spec, seed)`.
pub fn sample_graph(spec: &EnsembleSpec, seed: u64) -> Result<PoolingGraph> {
    let layout = SocketLayout::new(spec)?;
    Ok(sample_with_layout(&layout, seed))
}

pub(crate) fn sample_with_layout(layout: &SocketLayout, seed: u64) -> PoolingGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matching: Vec<usize> = (0..layout.edges()).collect();
    matching.shuffle(&mut rng);
    layout.graph(&matching)
}

/// `E!` where `E` is the edge count, saturating.
pub fn matching_count(spec: &EnsembleSpec) -> Result<u128> {
    Ok(factorial_saturating(spec.edges()?))
}

/// Every socket matching of the ensemble, in lexicographic order of the
/// matching permutation. Refuses when `E! > limit`.
pub fn enumerate_matchings(spec: &EnsembleSpec, limit: u64) -> Result<Matchings> {
    let layout = SocketLayout::new(spec)?;
    let total = factorial_saturating(layout.edges() as u64);
    if total > limit as u128 {
        return Err(Error::SizeLimit {
            what: "socket matching enumeration",
            required: format!("{}! = {}", layout.edges(), display_saturated(total)),
            limit,
        });
    }
    let edges = layout.edges();
    Ok(Matchings {
        layout,
        perm: Permutations::new(edges, 0, total as u64),
    })
}

pub(crate) fn display_saturated(value: u128) -> String {
    if value == u128::MAX {
        "more than 2^128".to_string()
    } else {
        value.to_string()
    }
}

/// Iterator over the graphs of all socket matchings.
pub struct Matchings {
    layout: SocketLayout,
    perm: Permutations,
}

impl Matchings {
    pub fn layout(&self) -> &SocketLayout {
        &self.layout
    }
}

impl Iterator for Matchings {
    type Item = PoolingGraph;

    fn next(&mut self) -> Option<PoolingGraph> {
        let matching = self.perm.next()?;
        Some(self.layout.graph(&matching))
    }
}

/// Lexicographic permutations of `0..len`, starting at a given rank and
/// yielding `count` of them. Ranges over disjoint rank windows partition the
/// full set, which is how the oracle splits work across threads.
#[derive(Debug, Clone)]
pub struct Permutations {
    current: Vec<usize>,
    remaining: u64,
}

impl Permutations {
    pub fn new(len: usize, start_rank: u64, count: u64) -> Self {
        Permutations {
            current: unrank(len, start_rank),
            remaining: count,
        }
    }

    /// Advances and returns the current permutation without allocating.
    pub fn next_ref(&mut self) -> Option<&[usize]> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(&self.current)
    }

    /// Steps `current` to its lexicographic successor. Must be called after
    /// consuming each value from [`Permutations::next_ref`].
    pub fn advance(&mut self) {
        next_permutation(&mut self.current);
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.next_ref()?.to_vec();
        self.advance();
        Some(out)
    }
}

/// Permutation of `0..len` with lexicographic rank `rank` (factorial number
/// system).
fn unrank(len: usize, rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..len).collect();
    let mut out = Vec::with_capacity(len);
    let mut rank = rank as u128;
    for pos in 0..len {
        let block = factorial_saturating((len - pos - 1) as u64);
        let idx = (rank / block) as usize;
        rank %= block;
        out.push(pool.remove(idx.min(pool.len() - 1)));
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        p.reverse();
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
