//! Ensemble-average pattern enumerators for COMP and DD and the error
//! probabilities built from them.
//!
//! Every enumerator is a sum of terms of the form
//! `left_count * right_count / multinomial(E; edge-type counts)`, where the
//! two counts are coefficients of generating functions and `E` is the number
//! of edges. The multinomial denominator equals `E! / prod(count!)`, so each
//! evaluation accumulates the integer `sum(left * right * prod(count!))` and
//! divides by `E!` once at the end; no rational arithmetic happens in the
//! inner loops.

mod comp;
mod dd;
mod probability;

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::combinatorics::{binomial, to_decimal, FactorialTable};
use crate::detection::Algorithm;
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};

pub use comp::{comp_irregular, comp_regular, IrregularComp, RegularComp};
pub use dd::{dd_irregular, dd_regular, IrregularDd, RegularDd};
pub use probability::{
    error_polynomial, error_probability, fa_probability, horner, md_probability,
};

/// Which closed form evaluates the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Regular formula when both distributions are single-degree, irregular
    /// otherwise.
    #[default]
    Auto,
    Regular,
    Irregular,
}

/// Exact enumerator values `A_{a,j}`.
///
/// For COMP, `a` is the number of defectives and `j` the number of false
/// alarms. For DD, `a` is the number of defectives and `j` the number of
/// misdetections. Every cell of the triangle is stored, zeros included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratorTable {
    pub algorithm: Algorithm,
    pub spec: EnsembleSpec,
    pub values: BTreeMap<(usize, usize), BigRational>,
}

impl EnumeratorTable {
    /// Evaluates every cell, in parallel across cells.
    pub fn compute(spec: &EnsembleSpec, algorithm: Algorithm, method: Method) -> Result<Self> {
        spec.validate_structure()?;
        let n = spec.n as usize;
        let cells = cells(algorithm, n);
        let regular = match method {
            Method::Auto => spec.as_regular(),
            Method::Regular => Some(spec.as_regular().ok_or_else(|| {
                Error::Usage("regular formula requested for an irregular ensemble".into())
            })?),
            Method::Irregular => None,
        };
        let values: Vec<BigRational> = match (algorithm, regular) {
            (Algorithm::Comp, Some((l, r))) => {
                let ctx = RegularComp::new(spec.n, l, r)?;
                cells
                    .par_iter()
                    .map(|&(a, j)| ctx.cell(a as u64, j as u64))
                    .collect()
            }
            (Algorithm::Comp, None) => {
                let ctx = IrregularComp::new(spec)?;
                cells
                    .par_iter()
                    .map(|&(a, j)| ctx.cell(a as u64, j as u64))
                    .collect()
            }
            (Algorithm::Dd, Some((l, r))) => {
                let ctx = RegularDd::new(spec.n, l, r)?;
                cells
                    .par_iter()
                    .map(|&(a, j)| ctx.cell((a - j) as u64, j as u64))
                    .collect()
            }
            (Algorithm::Dd, None) => {
                let ctx = IrregularDd::new(spec)?;
                cells
                    .par_iter()
                    .map(|&(a, j)| ctx.cell((a - j) as u64, j as u64))
                    .collect()
            }
        };
        Ok(EnumeratorTable {
            algorithm,
            spec: spec.clone(),
            values: cells.into_iter().zip(values).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n as usize
    }

    /// `A_{a,j}`, zero for cells outside the table.
    pub fn get(&self, a: usize, j: usize) -> BigRational {
        self.values
            .get(&(a, j))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn row_sum(&self, a: usize) -> BigRational {
        self.values
            .range((a, 0)..=(a, usize::MAX))
            .fold(BigRational::zero(), |acc, (_, v)| acc + v)
    }

    /// Rows whose sum differs from `C(n, a)`.
    pub fn row_sum_violations(&self) -> Vec<(usize, BigRational, BigInt)> {
        let n = self.n();
        (0..=n)
            .filter_map(|a| {
                let sum = self.row_sum(a);
                let expected = binomial(n as u64, a as i64);
                (sum != BigRational::from_integer(expected.clone())).then_some((a, sum, expected))
            })
            .collect()
    }

    /// CSV with two comment lines (algorithm, source, spec hash) followed by
    /// `a,j,numerator,denominator,decimal`.
    pub fn write_csv<W: Write>(&self, mut out: W, source: &str, precision: usize) -> Result<()> {
        writeln!(
            out,
            "# algorithm={} source={} spec_hash={}",
            self.algorithm,
            source,
            self.spec.hash()
        )?;
        writeln!(out, "# n={} m={}", self.spec.n, self.spec.m)?;
        writeln!(out, "a,j,numerator,denominator,decimal")?;
        for ((a, j), v) in &self.values {
            writeln!(
                out,
                "{a},{j},{},{},{}",
                v.numer(),
                v.denom(),
                to_decimal(v, precision)
            )?;
        }
        Ok(())
    }
}

/// All `(a, j)` cells of an `n`-item table.
pub fn cells(algorithm: Algorithm, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..=n {
        let max_j = match algorithm {
            Algorithm::Comp => n - a,
            Algorithm::Dd => a,
        };
        out.extend((0..=max_j).map(|j| (a, j)));
    }
    out
}

/// Running `sum(coefficient product * prod(count!))` for one cell.
struct ConfigurationSum<'a> {
    factorials: &'a FactorialTable,
    edges: usize,
    numerator: BigInt,
}

impl<'a> ConfigurationSum<'a> {
    fn new(factorials: &'a FactorialTable, edges: usize) -> Self {
        ConfigurationSum {
            factorials,
            edges,
            numerator: BigInt::zero(),
        }
    }

    /// Adds `weight / multinomial(E; parts)`; the parts must sum to `E`.
    fn add(&mut self, weight: BigInt, parts: &[usize]) {
        debug_assert_eq!(parts.iter().sum::<usize>(), self.edges);
        let mut term = weight;
        for &p in parts {
            if p > 1 {
                term *= self.factorials.get(p);
            }
        }
        self.numerator += term;
    }

    fn finish(self) -> BigRational {
        BigRational::new(self.numerator, self.factorials.get(self.edges).clone())
    }
}

fn check_cell(n: u64, i: u64, j: u64) -> Result<()> {
    if i + j > n {
        return Err(Error::Usage(format!(
            "cell ({i}, {j}) is outside an ensemble of {n} items"
        )));
    }
    Ok(())
}
