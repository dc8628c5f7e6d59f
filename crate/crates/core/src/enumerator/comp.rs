//! COMP enumerators: `A_{i,j}` is the ensemble-average number of defective
//! sets of size `i` for which COMP raises exactly `j` false alarms.
//!
//! Edge types, counted on positive tests only: type 1 attaches to a
//! defective item, type 2 to a false alarm (a non-defective item all of whose
//! tests are positive), type 3 to a non-defective item that also sits in at
//! least one negative test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rustc_hash::FxHashMap;

use super::{check_cell, ConfigurationSum};
use crate::combinatorics::{BinomialCache, FactorialTable};
use crate::ensemble::EnsembleSpec;
use crate::error::Result;
use crate::polynomial::Monomial;
use crate::IntPoly;

/// Regular-ensemble COMP enumerator with cached generating-function powers.
///
/// `g(x, y) = (1 + x + y)^r - (x + y)^r` describes one positive test (the
/// constant marks type-1 sockets, `x` type 2, `y` type 3; at least one
/// type-1 socket). `f(s) = (1 + s)^l - s^l` describes one item that is not
/// flagged (`s` marks sockets on positive tests; at least one socket on a
/// negative test).
#[derive(Debug, Clone)]
pub struct RegularComp {
    n: u64,
    l: u64,
    r: u64,
    m: u64,
    g_powers: Vec<IntPoly>,
    f_powers: Vec<Option<IntPoly>>,
    binomials: BinomialCache,
    factorials: FactorialTable,
}

impl RegularComp {
    /// Context able to evaluate every cell of the `(n, l, r)` ensemble.
    pub fn new(n: u64, l: u32, r: u32) -> Result<Self> {
        let cells: Vec<(u64, u64)> = (0..=n)
            .flat_map(|i| (0..=n - i).map(move |j| (i, j)))
            .collect();
        Self::for_cells(n, l, r, &cells)
    }

    /// Context for the given `(i, j)` cells only, with caps tightened to the
    /// exponents those cells extract.
    pub fn for_cells(n: u64, l: u32, r: u32, cells: &[(u64, u64)]) -> Result<Self> {
        let spec = EnsembleSpec::regular(n, l, r)?;
        let (l, r, m) = (l as u64, r as u64, spec.m);
        let edges = n * l;

        let x_cap = cells.iter().map(|&(_, j)| j * l).max().unwrap_or(0);
        let y_cap = cells
            .iter()
            .map(|&(i, j)| edges.saturating_sub(l * (i + j)))
            .max()
            .unwrap_or(0);
        let caps = [x_cap as u32, y_cap as u32];

        let one = IntPoly::one(2);
        let xy = IntPoly::var(2, 0).add(&IntPoly::var(2, 1))?;
        let g = one
            .add(&xy)?
            .pow(r, None)?
            .sub(&xy.pow(r, None)?)?
            .with_caps(&caps)?;
        let mut g_powers = Vec::with_capacity(m as usize + 1);
        g_powers.push(IntPoly::one(2).with_caps(&caps)?);
        for b in 1..=m as usize {
            let next = g_powers[b - 1].mul(&g, None)?;
            g_powers.push(next);
        }

        let s = IntPoly::var(1, 0);
        let f = IntPoly::one(1)
            .add(&s)?
            .pow(l, None)?
            .sub(&s.pow(l, None)?)?;
        let mut f_powers = vec![None; n as usize + 1];
        for &(i, j) in cells {
            let p = (n - i - j) as usize;
            if f_powers[p].is_none() {
                f_powers[p] = Some(f.pow(p as u64, None)?);
            }
        }

        Ok(RegularComp {
            n,
            l,
            r,
            m,
            g_powers,
            f_powers,
            binomials: BinomialCache::new(n.max(m) as usize),
            factorials: FactorialTable::new(edges as usize),
        })
    }

    /// `A_{i,j}`. Panics if the context was not prepared for this cell.
    pub fn cell(&self, i: u64, j: u64) -> BigRational {
        let (n, l, r, m) = (self.n, self.l, self.r, self.m);
        let flagged = i + j;
        if flagged > n {
            return BigRational::zero();
        }
        let f_pow = self.f_powers[(n - flagged) as usize]
            .as_ref()
            .expect("cell was not prepared in this context");
        let edges = (n * l) as usize;
        let mut sum = ConfigurationSum::new(&self.factorials, edges);
        let b_min = (flagged * l).div_ceil(r);
        for b in b_min..=m {
            let type3 = b * r - l * flagged;
            let Some(g_coeff) =
                self.g_powers[b as usize].coeff_monomial(pack(&[(j * l) as u32, type3 as u32]))
            else {
                continue;
            };
            let Some(f_coeff) = f_pow.coeff_monomial(pack(&[type3 as u32])) else {
                continue;
            };
            let weight = self.binomials.get(m, b as i64) * g_coeff * f_coeff;
            let parts = [
                (l * i) as usize,
                (l * j) as usize,
                type3 as usize,
                ((m - b) * r) as usize,
            ];
            sum.add(weight, &parts);
        }
        let items = self
            .binomials
            .multinomial(n, &[i, j, n - i - j])
            .expect("parts sum to n");
        sum.finish() * BigRational::from_integer(items)
    }
}

/// `A^COMP_{i,j}` for the `(n, l, r)`-regular ensemble.
pub fn comp_regular(n: u64, l: u32, r: u32, i: u64, j: u64) -> Result<BigRational> {
    check_cell(n, i, j)?;
    Ok(RegularComp::for_cells(n, l, r, &[(i, j)])?.cell(i, j))
}

/// Irregular-ensemble COMP enumerator.
///
/// Right side: `G(x) = prod_d [1 + (x1 + x2 + x3)^d - (x2 + x3)^d]^{m P_d}`.
/// Left side:
/// `F(t, s) = prod_d [t1 s1^d + t2 s2^d + (1 + s3)^d - s3^d]^{n Lambda_d}`,
/// with `t1` marking defectives and `t2` false alarms. The edge-type
/// vector `(w, e, u)` is summed over the support of `F`.
#[derive(Debug, Clone)]
pub struct IrregularComp {
    edges: usize,
    g: IntPoly,
    f_by_flags: FxHashMap<(u32, u32), Vec<(Monomial, BigInt)>>,
    factorials: FactorialTable,
}

impl IrregularComp {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        let n = spec.n as u32;
        Self::build(spec, n, n)
    }

    /// Context for a single cell with caps set to its extraction exponents.
    pub fn for_cell(spec: &EnsembleSpec, i: u64, j: u64) -> Result<Self> {
        Self::build(spec, i as u32, j as u32)
    }

    fn build(spec: &EnsembleSpec, max_i: u32, max_j: u32) -> Result<Self> {
        spec.validate_structure()?;
        let edges = spec.edges()? as u32;
        let l_max = spec.left.max_degree();
        let type1_cap = (max_i * l_max).min(edges);
        let type2_cap = (max_j * l_max).min(edges);

        let x = |v| IntPoly::var(3, v);
        let x123 = x(0).add(&x(1))?.add(&x(2))?;
        let x23 = x(1).add(&x(2))?;
        let g_caps = [type1_cap, type2_cap, edges];
        let mut brackets = Vec::new();
        for (d, count) in spec.right_counts()? {
            let bracket = IntPoly::one(3)
                .add(&x123.pow(d as u64, None)?)?
                .sub(&x23.pow(d as u64, None)?)?;
            brackets.push((bracket, count));
        }
        let factors: Vec<_> = brackets.iter().map(|(b, c)| (b, *c)).collect();
        let g = IntPoly::product_of_powers(3, &factors, Some(&g_caps))?;

        // Variables: t1, t2, s1, s2, s3.
        let v = |k| IntPoly::var(5, k);
        let f_caps = [max_i, max_j, type1_cap, type2_cap, edges];
        let mut brackets = Vec::new();
        for (d, count) in spec.left_counts()? {
            let d = d as u64;
            let defective = v(0).mul(&v(2).pow(d, None)?, None)?;
            let false_alarm = v(1).mul(&v(3).pow(d, None)?, None)?;
            let cleared = IntPoly::one(5)
                .add(&v(4))?
                .pow(d, None)?
                .sub(&v(4).pow(d, None)?)?;
            let bracket = defective.add(&false_alarm)?.add(&cleared)?;
            brackets.push((bracket, count));
        }
        let factors: Vec<_> = brackets.iter().map(|(b, c)| (b, *c)).collect();
        let f = IntPoly::product_of_powers(5, &factors, Some(&f_caps))?;

        Ok(IrregularComp {
            edges: edges as usize,
            g,
            f_by_flags: group_by_flags(&f),
            factorials: FactorialTable::new(edges as usize),
        })
    }

    pub fn cell(&self, i: u64, j: u64) -> BigRational {
        let mut sum = ConfigurationSum::new(&self.factorials, self.edges);
        let Some(terms) = self.f_by_flags.get(&(i as u32, j as u32)) else {
            return BigRational::zero();
        };
        for (types, f_coeff) in terms {
            let Some(g_coeff) = self.g.coeff_monomial(*types) else {
                continue;
            };
            let (w, e, u) = (
                types.exponent(0) as usize,
                types.exponent(1) as usize,
                types.exponent(2) as usize,
            );
            if w + e + u > self.edges {
                continue;
            }
            sum.add(g_coeff * f_coeff, &[w, e, u, self.edges - w - e - u]);
        }
        sum.finish()
    }
}

/// `A^COMP_{i,j}` for an arbitrary (validated) ensemble.
pub fn comp_irregular(spec: &EnsembleSpec, i: u64, j: u64) -> Result<BigRational> {
    check_cell(spec.n, i, j)?;
    Ok(IrregularComp::for_cell(spec, i, j)?.cell(i, j))
}

/// Splits a polynomial whose first two variables are node-state markers
/// into per-marker lists of (edge-type monomial, coefficient).
pub(super) fn group_by_flags(f: &IntPoly) -> FxHashMap<(u32, u32), Vec<(Monomial, BigInt)>> {
    let mut out: FxHashMap<(u32, u32), Vec<(Monomial, BigInt)>> = FxHashMap::default();
    for (mono, c) in f.terms() {
        out.entry((mono.exponent(0), mono.exponent(1)))
            .or_default()
            .push((mono.drop_leading(2), c.clone()));
    }
    for terms in out.values_mut() {
        terms.sort_by_key(|(m, _)| *m);
    }
    out
}

#[inline]
pub(super) fn pack(exponents: &[u32]) -> Monomial {
    Monomial::from_exponents(exponents).unwrap_or(Monomial::ABSENT)
}
