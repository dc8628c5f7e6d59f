//! DD enumerators: `A_{i+j,j}` is the ensemble-average number of defective
//! sets of size `i + j` for which DD certifies `i` items and misses `j`.
//!
//! Positive tests split into type-1 tests, holding exactly one socket on a
//! possible defective (that item is certified), and type-2 tests, holding at
//! least one defective socket and at least two possible-defective sockets.
//! Edge types on positive tests:
//!
//! | type | item                                   | test   |
//! |------|----------------------------------------|--------|
//! | 1    | missed defective                       | type 2 |
//! | 2    | cleared non-defective                  | type 2 |
//! | 3    | cleared non-defective                  | type 1 |
//! | 4    | uncleared non-defective (COMP alarm)   | type 2 |
//! | 5    | certified defective                    | type 2 |
//! | 6    | certified defective                    | type 1 |

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use rustc_hash::FxHashMap;

use super::comp::{group_by_flags, pack};
use super::{check_cell, ConfigurationSum};
use crate::combinatorics::{BinomialCache, FactorialTable};
use crate::ensemble::EnsembleSpec;
use crate::error::Result;
use crate::polynomial::Monomial;
use crate::IntPoly;

/// Regular-ensemble DD enumerator.
///
/// `g(x) = (1 + x1 + x2 + x3)^r - (x1 + x2)^r - r x1^{r-1} - r x3 x1^{r-1}`
/// enumerates the sockets of one type-2 test (constant: type 1, `x1`: type 2,
/// `x2`: type 4, `x3`: type 5). `f1(s1) = (1 + s1)^l - s1^l` splits a
/// certified item's sockets between type 5 (`s1`) and type 6, and
/// `f2(s2, s3) = (1 + s2 + s3)^l - (s2 + s3)^l` splits a cleared item's
/// sockets between negative tests, type 2 (`s2`) and type 3 (`s3`).
#[derive(Debug, Clone)]
pub struct RegularDd {
    n: u64,
    l: u64,
    r: u64,
    m: u64,
    g_powers: Vec<IntPoly>,
    f1_powers: Vec<Option<IntPoly>>,
    f2_powers: Vec<Option<IntPoly>>,
    binomials: BinomialCache,
    factorials: FactorialTable,
}

impl RegularDd {
    /// Context for every `(i, j)` with `i + j <= n`.
    pub fn new(n: u64, l: u32, r: u32) -> Result<Self> {
        let cells: Vec<(u64, u64)> = (0..=n)
            .flat_map(|i| (0..=n - i).map(move |j| (i, j)))
            .collect();
        Self::for_cells(n, l, r, &cells)
    }

    /// Context for the given `(i, j)` cells, `i` certified and `j` missed.
    pub fn for_cells(n: u64, l: u32, r: u32, cells: &[(u64, u64)]) -> Result<Self> {
        let spec = EnsembleSpec::regular(n, l, r)?;
        let (l, r, m) = (l as u64, r as u64, spec.m);
        let edges = n * l;

        let max_i = cells.iter().map(|c| c.0).max().unwrap_or(0);
        let max_free = cells.iter().map(|&(i, j)| n - i - j).max().unwrap_or(0);
        let g_caps = [edges as u32, (max_free * l) as u32, (max_i * l) as u32];

        let x = |v| IntPoly::var(3, v);
        let x12 = x(0).add(&x(1))?;
        let x1_top = x(0).pow(r - 1, None)?;
        let r_const = IntPoly::constant(3, BigInt::from(r));
        let g = IntPoly::one(3)
            .add(&x12)?
            .add(&x(2))?
            .pow(r, None)?
            .sub(&x12.pow(r, None)?)?
            .sub(&x1_top.mul(&r_const, None)?)?
            .sub(&x1_top.mul(&x(2), None)?.mul(&r_const, None)?)?
            .with_caps(&g_caps)?;
        let mut g_powers = Vec::with_capacity(m as usize + 1);
        g_powers.push(IntPoly::one(3).with_caps(&g_caps)?);
        for b in 1..=m as usize {
            let next = g_powers[b - 1].mul(&g, None)?;
            g_powers.push(next);
        }

        let s1 = IntPoly::var(1, 0);
        let f1 = IntPoly::one(1)
            .add(&s1)?
            .pow(l, None)?
            .sub(&s1.pow(l, None)?)?;
        let mut f1_powers = vec![None; n as usize + 1];

        let s23 = IntPoly::var(2, 0).add(&IntPoly::var(2, 1))?;
        let f2_caps = [edges as u32, (max_i * l * (r - 1)) as u32];
        let f2 = IntPoly::one(2)
            .add(&s23)?
            .pow(l, None)?
            .sub(&s23.pow(l, None)?)?
            .with_caps(&f2_caps)?;
        let mut f2_powers: Vec<Option<IntPoly>> = vec![None; n as usize + 1];

        for &(i, j) in cells {
            if f1_powers[i as usize].is_none() {
                f1_powers[i as usize] = Some(f1.pow(i, None)?);
            }
            for (p, slot) in f2_powers
                .iter_mut()
                .enumerate()
                .take((n - i - j) as usize + 1)
            {
                if slot.is_none() {
                    *slot = Some(f2.pow(p as u64, None)?);
                }
            }
        }

        Ok(RegularDd {
            n,
            l,
            r,
            m,
            g_powers,
            f1_powers,
            f2_powers,
            binomials: BinomialCache::new(n.max(m) as usize),
            factorials: FactorialTable::new(edges as usize),
        })
    }

    /// `A_{i+j,j}`. Panics if the context was not prepared for this cell.
    pub fn cell(&self, i: u64, j: u64) -> BigRational {
        let (n, l, r, m) = (self.n, self.l, self.r, self.m);
        let defectives = i + j;
        if defectives > n {
            return BigRational::zero();
        }
        let f1_pow = self.f1_powers[i as usize]
            .as_ref()
            .expect("cell was not prepared in this context");
        let edges = (n * l) as usize;
        let r_big = BigInt::from(r);
        let mut sum = ConfigurationSum::new(&self.factorials, edges);

        for k in 0..=(n - defectives) {
            let cleared = n - defectives - k;
            let f2_pow = self.f2_powers[cleared as usize]
                .as_ref()
                .expect("cell was not prepared in this context");
            let items = self
                .binomials
                .multinomial(n, &[i, j, k, cleared])
                .expect("parts sum to n");
            let mut b1_max = (i * l).min(m);
            if r > 1 {
                b1_max = b1_max.min(cleared * l / (r - 1));
            }
            for b1 in i..=b1_max {
                let type5 = i * l - b1;
                let Some(c1) = f1_pow.coeff_monomial(pack(&[type5 as u32])) else {
                    continue;
                };
                let type3 = b1 * (r - 1);
                let certifying = r_big.clone().pow(b1 as u32);
                for b2 in 0..=(m - b1) {
                    let Some(type2) = (b2 * r + b1).checked_sub((defectives + k) * l) else {
                        continue;
                    };
                    let Some(c2) = f2_pow.coeff_monomial(pack(&[type2 as u32, type3 as u32]))
                    else {
                        continue;
                    };
                    let Some(cg) = self.g_powers[b2 as usize].coeff_monomial(pack(&[
                        type2 as u32,
                        (k * l) as u32,
                        type5 as u32,
                    ])) else {
                        continue;
                    };
                    let tests = self
                        .binomials
                        .multinomial(m, &[b1, b2, m - b1 - b2])
                        .expect("parts sum to m");
                    let weight = &items * tests * &certifying * c1 * c2 * cg;
                    let parts = [
                        ((m - b1 - b2) * r) as usize,
                        (j * l) as usize,
                        type2 as usize,
                        type3 as usize,
                        (k * l) as usize,
                        type5 as usize,
                        b1 as usize,
                    ];
                    sum.add(weight, &parts);
                }
            }
        }
        sum.finish()
    }
}

/// `A^DD_{i+j,j}` for the `(n, l, r)`-regular ensemble: `i` certified
/// defectives, `j` misdetections.
pub fn dd_regular(n: u64, l: u32, r: u32, i: u64, j: u64) -> Result<BigRational> {
    check_cell(n, i, j)?;
    Ok(RegularDd::for_cells(n, l, r, &[(i, j)])?.cell(i, j))
}

/// Irregular-ensemble DD enumerator.
///
/// Right side, per test of degree `d`:
/// `1 + (x1 + x2 + x4 + x5)^d - (x2 + x4)^d - d x1 x2^{d-1} - d x5 x2^{d-1} +
/// d x3^{d-1} x6`. Left side, per item of degree `d`:
/// `t1 ((s5 + s6)^d - s5^d) + t2 s1^d + s4^d + (1 + s2 + s3)^d - (s2 + s3)^d`.
/// The number of type-2 tests is not summed explicitly; the right-side
/// product already marginalises over it.
#[derive(Debug, Clone)]
pub struct IrregularDd {
    edges: usize,
    g: IntPoly,
    f_by_flags: FxHashMap<(u32, u32), Vec<(Monomial, BigInt)>>,
    factorials: FactorialTable,
}

impl IrregularDd {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        let n = spec.n as u32;
        Self::build(spec, n, n)
    }

    pub fn for_cell(spec: &EnsembleSpec, i: u64, j: u64) -> Result<Self> {
        Self::build(spec, i as u32, j as u32)
    }

    fn build(spec: &EnsembleSpec, max_i: u32, max_j: u32) -> Result<Self> {
        spec.validate_structure()?;
        let edges = spec.edges()? as u32;
        let l_max = spec.left.max_degree();
        let missed_cap = (max_j * l_max).min(edges);
        let certified_cap = (max_i * l_max).min(edges);
        let type6_cap = certified_cap.min(spec.m as u32);
        let caps = [missed_cap, edges, edges, edges, certified_cap, type6_cap];

        let x = |v| IntPoly::var(6, v);
        let x1245 = x(0).add(&x(1))?.add(&x(3))?.add(&x(4))?;
        let x24 = x(1).add(&x(3))?;
        let mut brackets = Vec::new();
        for (d, count) in spec.right_counts()? {
            let d64 = d as u64;
            let degree = IntPoly::constant(6, BigInt::from(d));
            let x2_top = x(1).pow(d64 - 1, None)?;
            let bracket = IntPoly::one(6)
                .add(&x1245.pow(d64, None)?)?
                .sub(&x24.pow(d64, None)?)?
                .sub(&x(0).mul(&x2_top, None)?.mul(&degree, None)?)?
                .sub(&x(4).mul(&x2_top, None)?.mul(&degree, None)?)?
                .add(
                    &x(2)
                        .pow(d64 - 1, None)?
                        .mul(&x(5), None)?
                        .mul(&degree, None)?,
                )?;
            brackets.push((bracket, count));
        }
        let factors: Vec<_> = brackets.iter().map(|(b, c)| (b, *c)).collect();
        let g = IntPoly::product_of_powers(6, &factors, Some(&caps))?;

        // Variables: t1, t2, s1..s6.
        let v = |k| IntPoly::var(8, k);
        let f_caps = [
            max_i, max_j, caps[0], caps[1], caps[2], caps[3], caps[4], caps[5],
        ];
        let s56 = v(6).add(&v(7))?;
        let s23 = v(3).add(&v(4))?;
        let mut brackets = Vec::new();
        for (d, count) in spec.left_counts()? {
            let d = d as u64;
            let certified = v(0).mul(&s56.pow(d, None)?.sub(&v(6).pow(d, None)?)?, None)?;
            let missed = v(1).mul(&v(2).pow(d, None)?, None)?;
            let uncleared = v(5).pow(d, None)?;
            let cleared = IntPoly::one(8)
                .add(&s23)?
                .pow(d, None)?
                .sub(&s23.pow(d, None)?)?;
            let bracket = certified.add(&missed)?.add(&uncleared)?.add(&cleared)?;
            brackets.push((bracket, count));
        }
        let factors: Vec<_> = brackets.iter().map(|(b, c)| (b, *c)).collect();
        let f = IntPoly::product_of_powers(8, &factors, Some(&f_caps))?;

        Ok(IrregularDd {
            edges: edges as usize,
            g,
            f_by_flags: group_by_flags(&f),
            factorials: FactorialTable::new(edges as usize),
        })
    }

    /// `A_{i+j,j}` with `i` certified and `j` missed defectives.
    pub fn cell(&self, i: u64, j: u64) -> BigRational {
        let mut sum = ConfigurationSum::new(&self.factorials, self.edges);
        let Some(terms) = self.f_by_flags.get(&(i as u32, j as u32)) else {
            return BigRational::zero();
        };
        let mut parts = [0usize; 7];
        for (types, f_coeff) in terms {
            let Some(g_coeff) = self.g.coeff_monomial(*types) else {
                continue;
            };
            let mut used = 0;
            for (v, part) in parts.iter_mut().take(6).enumerate() {
                *part = types.exponent(v) as usize;
                used += *part;
            }
            if used > self.edges {
                continue;
            }
            parts[6] = self.edges - used;
            sum.add(g_coeff * f_coeff, &parts);
        }
        sum.finish()
    }
}

/// `A^DD_{i+j,j}` for an arbitrary (validated) ensemble.
pub fn dd_irregular(spec: &EnsembleSpec, i: u64, j: u64) -> Result<BigRational> {
    check_cell(spec.n, i, j)?;
    Ok(IrregularDd::for_cell(spec, i, j)?.cell(i, j))
}
