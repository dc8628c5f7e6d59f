//! Sparse multivariate polynomials with truncated arithmetic.
//!
//! Exponent vectors are packed into a single `u128` (up to eight variables,
//! sixteen bits each), so monomial multiplication is one integer addition and
//! the cap test is a branch-free SWAR comparison. Terms live in a hash map; a
//! thin slice of the exponent lattice is populated once caps are set, which
//! is what keeps the eight-variable generating functions tractable.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::scalar::Coefficient;

/// Maximum number of formal variables.
pub const MAX_ARITY: usize = 8;
/// Largest exponent a single variable may carry.
pub const MAX_EXPONENT: u32 = 0x7FFF;

const FIELD_BITS: u32 = 16;
const FIELD_MASK: u128 = 0xFFFF;
// High bit of every 16-bit field.
const HIGH_BITS: u128 = 0x8000_8000_8000_8000_8000_8000_8000_8000;

/// Packed exponent vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);
    /// Never stored in any polynomial; lookups with it always miss.
    pub(crate) const ABSENT: Monomial = Monomial(u128::MAX);

    pub fn from_exponents(exponents: &[u32]) -> Result<Self> {
        if exponents.len() > MAX_ARITY {
            return Err(Error::ArityTooLarge(exponents.len()));
        }
        let mut packed = 0u128;
        for (var, &e) in exponents.iter().enumerate() {
            if e > MAX_EXPONENT {
                return Err(Error::ExponentOverflow {
                    exponent: e as u64,
                    limit: MAX_EXPONENT,
                });
            }
            packed |= (e as u128) << (FIELD_BITS * var as u32);
        }
        Ok(Monomial(packed))
    }

    /// Same as [`Monomial::from_exponents`] but clamps every entry to
    /// [`MAX_EXPONENT`]; used for caps, where a larger cap is never binding.
    fn saturating(exponents: &[u32]) -> Result<Self> {
        let clamped: Vec<u32> = exponents.iter().map(|&e| e.min(MAX_EXPONENT)).collect();
        Self::from_exponents(&clamped)
    }

    #[inline]
    pub fn exponent(self, var: usize) -> u32 {
        ((self.0 >> (FIELD_BITS * var as u32)) & FIELD_MASK) as u32
    }

    pub fn exponents(self, arity: usize) -> Vec<u32> {
        (0..arity).map(|v| self.exponent(v)).collect()
    }

    /// Product of two monomials, `None` if any exponent would exceed
    /// [`MAX_EXPONENT`].
    #[inline]
    pub fn checked_mul(self, other: Monomial) -> Option<Monomial> {
        // Fields are at most 0x7FFF, so a field sum never carries into its
        // neighbour; overflow shows up as a set high bit.
        let sum = self.0 + other.0;
        if sum & HIGH_BITS == 0 {
            Some(Monomial(sum))
        } else {
            None
        }
    }

    /// Component-wise `self <= caps`.
    #[inline]
    pub fn fits(self, caps: Monomial) -> bool {
        ((caps.0 | HIGH_BITS) - self.0) & HIGH_BITS == HIGH_BITS
    }

    /// Drops the first `count` variables, shifting the rest down.
    #[inline]
    pub fn drop_leading(self, count: usize) -> Monomial {
        Monomial(self.0 >> (FIELD_BITS * count as u32))
    }

    /// Sum of all exponents.
    pub fn total_degree(self) -> u32 {
        (0..MAX_ARITY).map(|v| self.exponent(v)).sum()
    }

    fn component_min(self, other: Monomial) -> Monomial {
        let mut packed = 0u128;
        for var in 0..MAX_ARITY {
            let e = self.exponent(var).min(other.exponent(var));
            packed |= (e as u128) << (FIELD_BITS * var as u32);
        }
        Monomial(packed)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = (0..MAX_ARITY).rev().find(|&v| self.exponent(v) != 0);
        let len = last.map_or(0, |v| v + 1);
        f.debug_list().entries(self.exponents(len)).finish()
    }
}

/// Multivariate polynomial with optional per-variable exponent caps.
///
/// Invariants: no stored coefficient is zero, and when caps are set every
/// stored monomial is component-wise at most the caps.
#[derive(Clone)]
pub struct SparsePoly<C> {
    arity: usize,
    terms: FxHashMap<Monomial, C>,
    caps: Option<Monomial>,
}

// Truncation caps are evaluation settings, not part of the value.
impl<C: PartialEq> PartialEq for SparsePoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.terms == other.terms
    }
}

impl<C: Coefficient> SparsePoly<C> {
    /// The zero polynomial in `arity` variables.
    ///
    /// Panics if `arity > MAX_ARITY`.
    pub fn zero(arity: usize) -> Self {
        assert!(arity <= MAX_ARITY, "arity {arity} exceeds {MAX_ARITY}");
        SparsePoly {
            arity,
            terms: FxHashMap::default(),
            caps: None,
        }
    }

    pub fn constant(arity: usize, value: C) -> Self {
        let mut p = Self::zero(arity);
        if !value.is_zero() {
            p.terms.insert(Monomial::ONE, value);
        }
        p
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, C::one())
    }

    /// The formal variable with index `var`.
    pub fn var(arity: usize, var: usize) -> Self {
        assert!(var < arity, "variable {var} out of range for arity {arity}");
        let mut exps = vec![0; arity];
        exps[var] = 1;
        Self::monomial(arity, &exps, C::one()).expect("unit exponent always packs")
    }

    /// `coefficient * prod x_v^{exponents[v]}`.
    pub fn monomial(arity: usize, exponents: &[u32], coefficient: C) -> Result<Self> {
        if exponents.len() != arity {
            return Err(Error::ArityMismatch {
                left: arity,
                right: exponents.len(),
            });
        }
        let mut p = Self::zero(arity);
        if !coefficient.is_zero() {
            p.terms
                .insert(Monomial::from_exponents(exponents)?, coefficient);
        }
        Ok(p)
    }

    pub fn from_terms<I, E>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, C)>,
        E: AsRef<[u32]>,
    {
        let mut p = Self::zero(arity);
        for (exps, c) in terms {
            let exps = exps.as_ref();
            if exps.len() != arity {
                return Err(Error::ArityMismatch {
                    left: arity,
                    right: exps.len(),
                });
            }
            p.accumulate(Monomial::from_exponents(exps)?, &c);
        }
        p.prune();
        Ok(p)
    }

    /// Sets the caps and drops every term above them.
    pub fn with_caps(mut self, caps: &[u32]) -> Result<Self> {
        let caps = self.pack_caps(caps)?;
        self.terms.retain(|m, _| m.fits(caps));
        self.caps = Some(caps);
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn caps(&self) -> Option<Vec<u32>> {
        self.caps.map(|c| c.exponents(self.arity))
    }

    /// Number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &C)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    /// Terms sorted by monomial, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(Vec<u32>, C)> {
        let mut out: Vec<_> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        out.sort_by_key(|(m, _)| *m);
        out.into_iter()
            .map(|(m, c)| (m.exponents(self.arity), c))
            .collect()
    }

    /// Coefficient of the monomial with the given exponents; zero if absent.
    pub fn coeff(&self, exponents: &[u32]) -> Result<C> {
        self.check_len(exponents.len())?;
        if exponents.iter().any(|&e| e > MAX_EXPONENT) {
            return Ok(C::zero());
        }
        let m = Monomial::from_exponents(exponents)?;
        Ok(self.coeff_monomial(m).cloned().unwrap_or_else(C::zero))
    }

    #[inline]
    pub fn coeff_monomial(&self, m: Monomial) -> Option<&C> {
        self.terms.get(&m)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let caps = merge_caps(self.caps, other.caps);
        let mut out = self.clone();
        out.caps = caps;
        for (m, c) in &other.terms {
            out.accumulate(*m, c);
        }
        out.truncate_and_prune();
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        SparsePoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
            caps: self.caps,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &C) -> Self {
        let mut out = Self::zero(self.arity);
        out.caps = self.caps;
        if factor.is_zero() {
            return out;
        }
        out.terms = self
            .terms
            .iter()
            .map(|(m, c)| (*m, c.mul_ref(factor)))
            .collect();
        out.prune();
        out
    }

    /// Product truncated at `caps`, or at the component-wise minimum of the
    /// operands' caps when `caps` is `None`.
    pub fn mul(&self, other: &Self, caps: Option<&[u32]>) -> Result<Self> {
        self.check_arity(other)?;
        let caps = match caps {
            Some(c) => Some(self.pack_caps(c)?),
            None => merge_caps(self.caps, other.caps),
        };
        self.mul_packed(other, caps)
    }

    fn mul_packed(&self, other: &Self, caps: Option<Monomial>) -> Result<Self> {
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Self::zero(self.arity);
        out.caps = caps;
        out.terms.reserve(large.terms.len());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                // Caps never exceed MAX_EXPONENT, so an overflowing product
                // is always above the caps and can be dropped.
                let Some(m) = ma.checked_mul(*mb) else {
                    if caps.is_none() {
                        return Err(Error::ExponentOverflow {
                            exponent: MAX_EXPONENT as u64 + 1,
                            limit: MAX_EXPONENT,
                        });
                    }
                    continue;
                };
                if let Some(cap) = caps {
                    if !m.fits(cap) {
                        continue;
                    }
                }
                let prod = ca.mul_ref(cb);
                match out.terms.get_mut(&m) {
                    Some(acc) => *acc += &prod,
                    None => {
                        out.terms.insert(m, prod);
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// `self^k` by binary exponentiation, truncating after every multiply.
    pub fn pow(&self, k: u64, caps: Option<&[u32]>) -> Result<Self> {
        let caps = match caps {
            Some(c) => Some(self.pack_caps(c)?),
            None => self.caps,
        };
        let mut result = Self::one(self.arity);
        result.caps = caps;
        if let Some(cap) = caps {
            result.terms.retain(|m, _| m.fits(cap));
        }
        if k == 0 {
            return Ok(result);
        }
        let mut base = self.clone();
        base.caps = caps;
        base.truncate_and_prune();
        let mut k = k;
        loop {
            if k & 1 == 1 {
                result = result.mul_packed(&base, caps)?;
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.mul_packed(&base, caps)?;
        }
        Ok(result)
    }

    /// `prod factor_i^{k_i}`, truncated at `caps`.
    pub fn product_of_powers(
        arity: usize,
        factors: &[(&SparsePoly<C>, u64)],
        caps: Option<&[u32]>,
    ) -> Result<Self> {
        let mut acc = Self::one(arity);
        if let Some(c) = caps {
            acc = acc.with_caps(c)?;
        }
        for (factor, k) in factors {
            acc.check_arity(factor)?;
            let powered = factor.pow(*k, caps)?;
            acc = acc.mul_packed(&powered, acc.caps)?;
        }
        Ok(acc)
    }

    fn accumulate(&mut self, m: Monomial, c: &C) {
        match self.terms.get_mut(&m) {
            Some(acc) => *acc += c,
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn truncate_and_prune(&mut self) {
        match self.caps {
            Some(cap) => self.terms.retain(|m, c| m.fits(cap) && !c.is_zero()),
            None => self.prune(),
        }
    }

    fn pack_caps(&self, caps: &[u32]) -> Result<Monomial> {
        self.check_len(caps.len())?;
        Monomial::saturating(caps)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: len,
            });
        }
        Ok(())
    }

    fn check_arity(&self, other: &Self) -> Result<()> {
        self.check_len(other.arity)
    }
}

fn merge_caps(a: Option<Monomial>, b: Option<Monomial>) -> Option<Monomial> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.component_min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl<C: Coefficient + fmt::Display> fmt::Debug for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in self.sorted_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{v}")?,
                    _ => write!(f, "*x{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type P = SparsePoly<BigInt>;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn univariate(coeffs: &[i64]) -> P {
        P::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(e, &c)| (vec![e as u32], big(c))),
        )
        .unwrap()
    }

    // Plain convolution; the expansion oracle for univariate products.
    fn convolve(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn monomial_packing() {
        let m = Monomial::from_exponents(&[3, 0, 7, 1]).unwrap();
        assert_eq!(m.exponents(4), vec![3, 0, 7, 1]);
        let caps = Monomial::from_exponents(&[3, 1, 7, 1]).unwrap();
        assert!(m.fits(caps));
        let tight = Monomial::from_exponents(&[2, 9, 9, 9]).unwrap();
        assert!(!m.fits(tight));
        assert!(Monomial::from_exponents(&[MAX_EXPONENT + 1]).is_err());
        assert!(Monomial::from_exponents(&[0; 9]).is_err());
    }

    #[test]
    fn add_examples() {
        let one_plus_x = univariate(&[1, 1]);
        let x = univariate(&[0, 1]);
        assert_eq!(one_plus_x.add(&x).unwrap(), univariate(&[1, 2]));
        assert_eq!(one_plus_x.add(&P::zero(1)).unwrap(), one_plus_x);

        // (1+x+y)^2 - (x+y)^2 = 1 + 2x + 2y
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let s = x.add(&y).unwrap();
        let a = P::one(2).add(&s).unwrap().pow(2, None).unwrap();
        let b = s.pow(2, None).unwrap().neg();
        let sum = a.add(&b).unwrap();
        let expected = P::from_terms(
            2,
            [
                (vec![0, 0], big(1)),
                (vec![1, 0], big(2)),
                (vec![0, 1], big(2)),
            ],
        )
        .unwrap();
        assert_eq!(sum, expected);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = P::var(2, 0);
        let b = P::var(3, 0);
        assert!(matches!(a.add(&b), Err(Error::ArityMismatch { .. })));
        assert!(matches!(a.mul(&b, None), Err(Error::ArityMismatch { .. })));
        assert!(a.coeff(&[1]).is_err());
    }

    #[test]
    fn mul_examples() {
        let p = univariate(&[1, 1]);
        assert_eq!(p.mul(&p, None).unwrap(), univariate(&[1, 2, 1]));
        assert_eq!(p.mul(&p, Some(&[1])).unwrap(), univariate(&[1, 2]));

        // ((1+s)^3 - s^3)^2 = (1 + 3s + 3s^2)^2
        let f = univariate(&[1, 3, 3]);
        let oracle = convolve(&[1, 3, 3], &[1, 3, 3]);
        assert_eq!(oracle, vec![1, 6, 15, 18, 9]);
        let sq = f.mul(&f, None).unwrap();
        assert_eq!(sq.coeff(&[2]).unwrap(), big(15));
        assert_eq!(sq.coeff(&[4]).unwrap(), big(6 + 3));
        assert_eq!(sq, univariate(&oracle));
    }

    #[test]
    fn pow_examples() {
        let s1 = univariate(&[1, 1]);
        assert_eq!(s1.pow(0, None).unwrap(), P::one(1));

        let base = univariate(&[1, 2]);
        let mut oracle = vec![1];
        for _ in 0..3 {
            oracle = convolve(&oracle, &[1, 2]);
        }
        assert_eq!(oracle, vec![1, 6, 12, 8]);
        assert_eq!(base.pow(3, None).unwrap(), univariate(&oracle));

        // (1+x+y)^3 - (x+y)^3 squared; coefficient of y^3.
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let s = x.add(&y).unwrap();
        let g = P::one(2)
            .add(&s)
            .unwrap()
            .pow(3, None)
            .unwrap()
            .sub(&s.pow(3, None).unwrap())
            .unwrap();
        // g restricted to x = 0 is 1 + 3y + 3y^2, so the y^3 coefficient of
        // g^2 is the s^3 coefficient of (1 + 3s + 3s^2)^2.
        let oracle = convolve(&[1, 3, 3], &[1, 3, 3]);
        assert_eq!(oracle[3], 18);
        assert_eq!(g.pow(2, None).unwrap().coeff(&[0, 3]).unwrap(), big(18));
    }

    #[test]
    fn coeff_examples() {
        let p = P::from_terms(
            2,
            [
                (vec![0, 0], big(1)),
                (vec![1, 0], big(2)),
                (vec![0, 1], big(2)),
            ],
        )
        .unwrap();
        assert_eq!(p.coeff(&[1, 0]).unwrap(), big(2));
        assert_eq!(p.coeff(&[1, 1]).unwrap(), big(0));
        assert_eq!(p.coeff(&[MAX_EXPONENT + 5, 0]).unwrap(), big(0));
    }

    #[test]
    fn product_of_powers_examples() {
        let p = univariate(&[1, 1]);
        assert_eq!(P::product_of_powers(1, &[(&p, 1)], None).unwrap(), p);
        assert_eq!(
            P::product_of_powers(1, &[(&p, 2), (&p, 3)], None).unwrap(),
            p.pow(5, None).unwrap()
        );
    }

    #[test]
    fn zero_coefficients_are_never_stored() {
        let p = univariate(&[1, 1]);
        let d = p.sub(&p).unwrap();
        assert!(d.is_zero());
        let q = P::from_terms(1, [(vec![0], big(0)), (vec![1], big(3))]).unwrap();
        assert_eq!(q.term_count(), 1);
    }

    #[test]
    fn caps_are_respected() {
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let p = P::one(2).add(&x).unwrap().add(&y).unwrap();
        let q = p.pow(6, Some(&[2, 3])).unwrap();
        assert_eq!(q.caps(), Some(vec![2, 3]));
        for (m, _) in q.terms() {
            assert!(m.exponent(0) <= 2 && m.exponent(1) <= 3);
        }
        // multinomial(6; 2, 3, 1) = 60
        assert_eq!(q.coeff(&[2, 3]).unwrap(), big(60));
    }

    #[test]
    fn overflow_without_caps_is_reported() {
        let p = P::monomial(1, &[MAX_EXPONENT], big(1)).unwrap();
        assert!(matches!(
            p.mul(&p, None),
            Err(Error::ExponentOverflow { .. })
        ));
        // With a cap the overflowing product is dropped silently.
        assert!(p.mul(&p, Some(&[10])).unwrap().is_zero());
    }
}
