//! Exact integer polynomials and polynomial tuples.
//!
//! Coefficients are arbitrary-precision; nothing here ever overflows. The
//! hot loops elsewhere use [`IntPoly::eval_mod`], which reduces the
//! coefficients once and evaluates in a residue ring.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("arithmetic-progression step k must be nonzero")]
    ZeroStep,
    #[error("change of polynomial needs a = 0 excluded")]
    ZeroSlope,
    #[error("change of polynomial needs M >= 1, got {0}")]
    BadModulus(BigInt),
    #[error("polynomial {0} has nonzero constant term; tuples must satisfy p(0) = 0")]
    NonzeroConstant(IntPoly),
    #[error("a polynomial tuple must have at least one entry")]
    EmptyTuple,
}

/// Polynomial with integer coefficients, constant term first. The zero
/// polynomial has no coefficients; trailing zeros never appear.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut p = Self { coeffs: coeffs.into_iter().map(Into::into).collect() };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c * n^k`.
    pub fn monomial(c: impl Into<BigInt>, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c.into();
        Self::new(coeffs)
    }

    /// The identity polynomial `n`.
    pub fn identity() -> Self {
        Self::monomial(1, 1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True for constants, including zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * n + c)
    }

    pub fn eval_i64(&self, n: i64) -> BigInt {
        self.eval(&BigInt::from(n))
    }

    /// Horner evaluation in `i128`, `None` on overflow.
    pub fn eval_i128(&self, n: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(n)?.checked_add(c.to_i128()?)?;
        }
        Some(acc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|k| self.coeff(k) + other.coeff(k)))
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c))
    }

    /// `n ↦ p(k n + j)`, expanded.
    pub fn compose_linear(&self, k: &BigInt, j: &BigInt) -> Self {
        let lin = Self::new([j.clone(), k.clone()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| acc.mul(&lin).add(&Self::new([c.clone()])))
    }

    /// `q(n) = p(n + a) - p(a)`; always `q(0) = 0`.
    pub fn shift_root(&self, a: &BigInt) -> Self {
        let shifted = self.compose_linear(&BigInt::one(), a);
        shifted.sub(&Self::new([self.eval(a)]))
    }

    /// `n ↦ p(k n + j)`; `k` must be nonzero.
    pub fn compose_ap(&self, k: &BigInt, j: &BigInt) -> Result<Self, PolyError> {
        if k.is_zero() {
            return Err(PolyError::ZeroStep);
        }
        Ok(self.compose_linear(k, j))
    }

    /// Change of polynomial along `M(a n + b)`.
    ///
    /// For `p(n) = Σ c_l n^l` with `p(0) = 0`, returns `(q, p_tilde)` where
    /// `p_tilde(n) = Σ c_l M^(l-1) n^l` and `q(n) = p_tilde(a n + b)`, so
    /// that `M q(n) = p(M (a n + b))` for every integer `n`.
    pub fn change_poly(&self, m: &BigInt, a: &BigInt, b: &BigInt) -> Result<(Self, Self), PolyError> {
        if !self.constant_term().is_zero() {
            return Err(PolyError::NonzeroConstant(self.clone()));
        }
        if !m.is_positive() {
            return Err(PolyError::BadModulus(m.clone()));
        }
        if a.is_zero() {
            return Err(PolyError::ZeroSlope);
        }
        let mut pow = BigInt::one();
        let mut tilde = vec![BigInt::zero()];
        for c in self.coeffs.iter().skip(1) {
            tilde.push(c * &pow);
            pow *= m;
        }
        let p_tilde = Self::new(tilde);
        let q = p_tilde.compose_linear(a, b);
        Ok((q, p_tilde))
    }

    /// Coefficients reduced into a residue ring, ready for [`ModPoly::eval`].
    pub fn reduce(&self, modulus: Modulus) -> ModPoly {
        ModPoly { modulus, coeffs: self.coeffs.iter().map(|c| modulus.reduce_big(c)).collect() }
    }

    /// `p(n) mod m` without building the big value.
    pub fn eval_mod(&self, n: i64, modulus: Modulus) -> u128 {
        self.reduce(modulus).eval(n)
    }
}

/// The modulus of a residue ring small enough for `u128` arithmetic:
/// either `2^128` or a value below `2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulus {
    Pow128,
    Small(u64),
}

impl Modulus {
    pub fn reduce_big(self, v: &BigInt) -> u128 {
        match self {
            Modulus::Pow128 => {
                let r = v.mod_floor(&(BigInt::one() << 128u32));
                r.to_u128().expect("residue below 2^128")
            }
            Modulus::Small(m) => v.mod_floor(&BigInt::from(m)).to_u128().expect("residue below m"),
        }
    }

    pub fn reduce_i128(self, v: i128) -> u128 {
        match self {
            Modulus::Pow128 => v as u128,
            Modulus::Small(m) => v.rem_euclid(m as i128) as u128,
        }
    }

    pub fn add(self, a: u128, b: u128) -> u128 {
        match self {
            Modulus::Pow128 => a.wrapping_add(b),
            Modulus::Small(m) => (a + b) % m as u128,
        }
    }

    pub fn sub(self, a: u128, b: u128) -> u128 {
        match self {
            Modulus::Pow128 => a.wrapping_sub(b),
            Modulus::Small(m) => (a + m as u128 - b) % m as u128,
        }
    }

    pub fn neg(self, a: u128) -> u128 {
        self.sub(0, a)
    }

    pub fn mul(self, a: u128, b: u128) -> u128 {
        match self {
            Modulus::Pow128 => a.wrapping_mul(b),
            Modulus::Small(m) => (a * b) % m as u128,
        }
    }
}

/// A polynomial with coefficients reduced modulo a [`Modulus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPoly {
    modulus: Modulus,
    coeffs: Vec<u128>,
}

impl ModPoly {
    pub fn eval(&self, n: i64) -> u128 {
        let m = self.modulus;
        let x = m.reduce_i128(n as i128);
        self.coeffs.iter().rev().fold(0, |acc, &c| m.add(m.mul(acc, x), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for IntPoly {
    /// Canonical text form, highest degree first: `n^2+6*n`, `-n^3+2`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    write!(f, "n")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({self})")
    }
}

impl FromStr for IntPoly {
    type Err = PolyError;

    /// Accepts sums of terms `c*n^k`, `c*n`, `n^k`, `n` and integer
    /// constants; whitespace is ignored and repeated degrees are summed.
    fn from_str(input: &str) -> Result<Self, PolyError> {
        let err = |reason: &str| PolyError::Parse { input: input.to_string(), reason: reason.to_string() };
        let s: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty input"));
        }
        let mut i = 0;
        let mut acc = IntPoly::zero();
        let digits = |i: &mut usize| -> String {
            let start = *i;
            while *i < s.len() && s[*i].is_ascii_digit() {
                *i += 1;
            }
            s[start..*i].iter().collect()
        };
        while i < s.len() {
            let mut sign = BigInt::one();
            if s[i] == '+' || s[i] == '-' {
                if s[i] == '-' {
                    sign = -sign;
                }
                i += 1;
            } else if i != 0 {
                return Err(err("expected '+' or '-' between terms"));
            }
            let num = digits(&mut i);
            let coef = if num.is_empty() { None } else { Some(num.parse::<BigInt>().map_err(|_| err("bad integer"))?) };
            let mut degree = 0usize;
            let mut has_var = false;
            if i < s.len() && s[i] == '*' {
                if coef.is_none() {
                    return Err(err("'*' without a coefficient"));
                }
                i += 1;
                if i >= s.len() || s[i] != 'n' {
                    return Err(err("expected 'n' after '*'"));
                }
            }
            if i < s.len() && s[i] == 'n' {
                has_var = true;
                i += 1;
                degree = 1;
                if i < s.len() && s[i] == '^' {
                    i += 1;
                    let e = digits(&mut i);
                    degree = e.parse().map_err(|_| err("bad exponent"))?;
                }
            }
            if coef.is_none() && !has_var {
                return Err(err("empty term"));
            }
            let c = coef.unwrap_or_else(BigInt::one) * sign;
            acc = acc.add(&IntPoly::monomial(c, degree));
        }
        Ok(acc)
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Why a tuple fails a distinctness predicate. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TupleDefect {
    ConstantDifference(usize, usize),
    NonzeroConstant(usize),
    EqualEntries(usize, usize),
}

/// A nonempty tuple `(p_1, ..., p_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyTuple {
    entries: Vec<IntPoly>,
}

impl PolyTuple {
    pub fn new(entries: Vec<IntPoly>) -> Result<Self, PolyError> {
        if entries.is_empty() {
            return Err(PolyError::EmptyTuple);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[IntPoly] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(0, p, 2p, ..., d p)`.
    pub fn diagonal(p: &IntPoly, d: usize) -> Self {
        Self { entries: (0..=d).map(|i| p.scale(&BigInt::from(i))).collect() }
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let d = self.entries.len();
        (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j)))
    }

    /// Every pairwise difference is non-constant.
    pub fn is_essentially_distinct(&self) -> Result<(), TupleDefect> {
        for (i, j) in self.pairs() {
            if self.entries[i].sub(&self.entries[j]).is_constant() {
                return Err(TupleDefect::ConstantDifference(i + 1, j + 1));
            }
        }
        Ok(())
    }

    /// Zero constant terms and pairwise unequal entries.
    pub fn in_pol_d(&self) -> Result<(), TupleDefect> {
        if let Some(i) = self.entries.iter().position(|p| !p.constant_term().is_zero()) {
            return Err(TupleDefect::NonzeroConstant(i + 1));
        }
        for (i, j) in self.pairs() {
            if self.entries[i] == self.entries[j] {
                return Err(TupleDefect::EqualEntries(i + 1, j + 1));
            }
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&IntPoly) -> IntPoly) -> Self {
        Self { entries: self.entries.iter().map(f).collect() }
    }

    pub fn shift_root(&self, a: &BigInt) -> Self {
        self.map(|p| p.shift_root(a))
    }
}

impl fmt::Display for PolyTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for PolyTuple {
    type Err = PolyError;

    /// `(p1, p2, ...)`, parentheses optional.
    fn from_str(s: &str) -> Result<Self, PolyError> {
        let t = s.trim();
        let t = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(t);
        let entries = t.split(',').map(str::parse).collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }
}

impl Serialize for PolyTuple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolyTuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("n^2").eval_i64(7), big(49));
        assert_eq!(IntPoly::zero().eval_i64(123), big(0));
        assert_eq!(p("n^3-n").eval_i64(10), big(990));
    }

    #[test]
    fn eval_never_overflows() {
        let q = p("n^5");
        let n = BigInt::from(10).pow(20);
        assert_eq!(q.eval(&n), BigInt::from(10).pow(100));
        assert_eq!(q.eval_i128(10i128.pow(8)), None);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("n^2+6*n").coeffs(), &[big(0), big(6), big(1)]);
        assert_eq!(p("n^2 + 6*n").to_string(), "n^2+6*n");
        assert_eq!(p("-n^3+2").to_string(), "-n^3+2");
        assert_eq!(p("3 - 3").to_string(), "0");
        assert_eq!(p("2n + n").to_string(), "3*n");
        assert_eq!(p("-1*n^2").to_string(), "-n^2");
        assert!("".parse::<IntPoly>().is_err());
        assert!("n+*3".parse::<IntPoly>().is_err());
        assert!("n^".parse::<IntPoly>().is_err());
        assert!("x".parse::<IntPoly>().is_err());
    }

    #[test]
    fn essential_distinctness_examples() {
        let t: PolyTuple = "(n^2, n^2+n)".parse().unwrap();
        assert_eq!(t.is_essentially_distinct(), Ok(()));
        let t: PolyTuple = "(n^2, n^2+3)".parse().unwrap();
        assert_eq!(t.is_essentially_distinct(), Err(TupleDefect::ConstantDifference(1, 2)));
        let t: PolyTuple = "(n, 2*n, 3*n)".parse().unwrap();
        assert_eq!(t.is_essentially_distinct(), Ok(()));
    }

    #[test]
    fn pol_d_examples() {
        let t: PolyTuple = "(n, n^2)".parse().unwrap();
        assert_eq!(t.in_pol_d(), Ok(()));
        let t: PolyTuple = "(n+1, n^2)".parse().unwrap();
        assert_eq!(t.in_pol_d(), Err(TupleDefect::NonzeroConstant(1)));
        let t: PolyTuple = "(n, n)".parse().unwrap();
        assert_eq!(t.in_pol_d(), Err(TupleDefect::EqualEntries(1, 2)));
        assert!(PolyTuple::new(vec![]).is_err());
    }

    #[test]
    fn shift_root_examples() {
        assert_eq!(p("n^2").shift_root(&big(3)), p("n^2+6*n"));
        let q = p("n^3+4*n+7");
        assert_eq!(q.shift_root(&big(0)), p("n^3+4*n"));
        let r = p("n^3").shift_root(&big(1));
        assert_eq!(r, p("n^3+3*n^2+3*n"));
        for n in -10..=10 {
            assert_eq!(r.eval_i64(n), big((n + 1).pow(3) - 1));
        }
    }

    #[test]
    fn compose_ap_examples() {
        assert_eq!(p("n^2").compose_ap(&big(3), &big(1)).unwrap(), p("9*n^2+6*n+1"));
        let q = p("n^4-2*n+5");
        assert_eq!(q.compose_ap(&big(1), &big(0)).unwrap(), q);
        assert_eq!(p("n").compose_ap(&big(2), &big(5)).unwrap(), p("2*n+5"));
        assert_eq!(p("n").compose_ap(&big(0), &big(5)), Err(PolyError::ZeroStep));
    }

    #[test]
    fn change_poly_examples() {
        let (q, t) = p("n^2").change_poly(&big(2), &big(3), &big(1)).unwrap();
        assert_eq!(t, p("2*n^2"));
        assert_eq!(q, p("18*n^2+12*n+2"));
        for n in -5..=5 {
            assert_eq!(q.eval_i64(n) * 2, big((2 * (3 * n + 1)).pow(2)));
        }
        let (q, t) = p("n").change_poly(&big(5), &big(1), &big(0)).unwrap();
        assert_eq!((q, t), (p("n"), p("n")));
        let (q, t) = p("n^2+n").change_poly(&big(3), &big(2), &big(1)).unwrap();
        assert_eq!(t, p("3*n^2+n"));
        assert_eq!(q, p("12*n^2+14*n+4"));
        for n in -10..=10 {
            let m = 3 * (2 * n + 1);
            assert_eq!(q.eval_i64(n), big((m * m + m) / 3));
        }
        assert!(matches!(p("n+1").change_poly(&big(2), &big(1), &big(0)), Err(PolyError::NonzeroConstant(_))));
        assert_eq!(p("n").change_poly(&big(2), &big(0), &big(0)), Err(PolyError::ZeroSlope));
        assert!(p("n").change_poly(&big(0), &big(1), &big(0)).is_err());
    }

    #[test]
    fn eval_mod_matches_big() {
        let q = p("-7*n^5+3*n^2-n+11");
        for n in [-1_000_000i64, -3, 0, 5, 999_999_937] {
            let v = q.eval_i64(n);
            assert_eq!(q.eval_mod(n, Modulus::Pow128), Modulus::Pow128.reduce_big(&v));
            assert_eq!(q.eval_mod(n, Modulus::Small(97)), Modulus::Small(97).reduce_big(&v));
        }
    }

    fn arb_poly() -> impl Strategy<Value = IntPoly> {
        prop::collection::vec(-50i64..50, 0..6).prop_map(IntPoly::new)
    }

    proptest! {
        #[test]
        fn display_round_trips(q in arb_poly()) {
            prop_assert_eq!(q.to_string().parse::<IntPoly>().unwrap(), q);
        }

        #[test]
        fn shift_root_identity(q in arb_poly(), a in -30i64..30) {
            let s = q.shift_root(&big(a));
            prop_assert!(s.constant_term().is_zero());
            prop_assert_eq!(s.degree(), if q.is_constant() { None } else { q.degree() });
            for n in -20..=20 {
                prop_assert_eq!(s.eval_i64(n), q.eval_i64(n + a) - q.eval_i64(a));
            }
        }

        #[test]
        fn shift_root_preserves_essential_distinctness(
            a in -20i64..20,
            c in prop::collection::vec(prop::collection::vec(-9i64..9, 1..4), 2..4),
        ) {
            let t = PolyTuple::new(c.into_iter().map(IntPoly::new).collect()).unwrap();
            prop_assume!(t.is_essentially_distinct().is_ok());
            let s = t.shift_root(&big(a));
            prop_assert!(s.is_essentially_distinct().is_ok());
            prop_assert!(s.entries().iter().all(|e| e.constant_term().is_zero()));
        }

        #[test]
        fn compose_ap_identity_and_degree(q in arb_poly(), k in 1i64..9, j in -9i64..9) {
            let c = q.compose_ap(&big(k), &big(j)).unwrap();
            prop_assert_eq!(c.compose_ap(&big(1), &big(0)).unwrap(), c.clone());
            prop_assert_eq!(c.degree(), q.degree());
            for n in -10..=10 {
                prop_assert_eq!(c.eval_i64(n), q.eval_i64(k * n + j));
            }
        }

        #[test]
        fn change_poly_identity(
            c in prop::collection::vec(-20i64..20, 1..5),
            m in 1i64..12, a in -6i64..6, b in -6i64..6,
        ) {
            prop_assume!(a != 0);
            let mut coeffs = vec![0i64];
            coeffs.extend(c);
            let q0 = IntPoly::new(coeffs);
            let (q, t) = q0.change_poly(&big(m), &big(a), &big(b)).unwrap();
            prop_assert!(t.constant_term().is_zero());
            for n in -100..=100i64 {
                prop_assert_eq!(q.eval_i64(n) * m, q0.eval_i64(m * (a * n + b)));
            }
        }
    }
}
