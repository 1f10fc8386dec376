//! Points of the circle `R/Z`: exact rationals or 128-bit fixed point.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SystemError;
use crate::polys::Modulus;

/// Reduced fraction in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };

    /// `num / den` taken mod 1.
    pub fn new(num: i128, den: i128) -> Result<Self, SystemError> {
        if den == 0 {
            return Err(SystemError::Scalar("zero denominator".into()));
        }
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let r = num.rem_euclid(den);
        let g = r.gcd(&den);
        let (r, d) = (r / g, den / g);
        let den = u64::try_from(d).map_err(|_| SystemError::Scalar(format!("denominator {d} exceeds 64 bits")))?;
        Ok(Self { num: r as u64, den })
    }

    /// `num / den` for `num < den`, reduced in 64-bit arithmetic.
    pub(crate) fn reduce_u64(num: u64, den: u64) -> Self {
        debug_assert!(num < den);
        let g = num.gcd(&den);
        Self { num: num / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `floor(num * 2^128 / den)`, with a flag for a nonzero remainder.
    pub fn to_fixed_bits(&self) -> (u128, bool) {
        let den = self.den as u128;
        let mut r = self.num as u128;
        let hi = (r << 64) / den;
        r = (r << 64) % den;
        let lo = (r << 64) / den;
        r = (r << 64) % den;
        (hi << 64 | lo, r != 0)
    }
}

/// 128-fractional-bit fixed-point point of the circle. `irrational` is a
/// construction-time tag: the value is the truncation of a number known
/// to be irrational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fixed {
    pub bits: u128,
    pub irrational: bool,
}

/// `floor((sqrt(2) - 1) * 2^128)`.
pub const SQRT2_M1_BITS: u128 = 0x6a09e667f3bcc908b2fb1366ea957d3e;
/// `floor(2^128 / sqrt(2))`.
pub const INV_SQRT2_BITS: u128 = 0xb504f333f9de6484597d89b3754abe9f;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Rational),
    Fixed(Fixed),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Rational::ZERO)
    }

    pub fn rational(num: i128, den: i128) -> Result<Self, SystemError> {
        Rational::new(num, den).map(Scalar::Rational)
    }

    pub fn fixed(bits: u128) -> Self {
        Scalar::Fixed(Fixed { bits, irrational: false })
    }

    pub fn irrational(bits: u128) -> Self {
        Scalar::Fixed(Fixed { bits, irrational: true })
    }

    /// The default irrational rotation number, `sqrt(2) - 1` to 128 bits.
    pub fn sqrt2_minus_1() -> Self {
        Self::irrational(SQRT2_M1_BITS)
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Scalar::Fixed(_))
    }

    pub fn is_tagged_irrational(&self) -> bool {
        matches!(self, Scalar::Fixed(Fixed { irrational: true, .. }))
    }

    /// Fixed-point bits; rationals are rounded down.
    pub fn fixed_bits(&self) -> u128 {
        match self {
            Scalar::Rational(r) => r.to_fixed_bits().0,
            Scalar::Fixed(f) => f.bits,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => r.to_f64(),
            Scalar::Fixed(f) => f.bits as f64 / 2f64.powi(128),
        }
    }

    /// Residue in the ring `Z/M` standing for `R/Z`, where the unit
    /// interval is scaled to `M`. Rationals must have a denominator
    /// dividing a small modulus; in the `2^128` ring they are rounded down.
    pub fn residue(&self, m: Modulus) -> u128 {
        match (self, m) {
            (Scalar::Rational(r), Modulus::Small(d)) => {
                debug_assert_eq!(d % r.den, 0, "ring {d} does not contain 1/{}", r.den);
                r.num as u128 * (d / r.den) as u128
            }
            (_, Modulus::Pow128) => self.fixed_bits(),
            (Scalar::Fixed(_), Modulus::Small(_)) => unreachable!("fixed scalar in a rational ring"),
        }
    }

    pub fn from_residue(r: u128, m: Modulus) -> Self {
        match m {
            Modulus::Pow128 => Scalar::fixed(r),
            Modulus::Small(d) => Scalar::Rational(Rational::new(r as i128, d as i128).expect("nonzero modulus")),
        }
    }

    /// Exact `q * self` for a nonnegative rational `q` (used for region
    /// radii such as `eps/4 * s`); fixed results are rounded down.
    pub fn scale_by(&self, num: u64, den: u64) -> Result<Self, SystemError> {
        match self {
            Scalar::Rational(r) => Scalar::rational(r.num as i128 * num as i128, r.den as i128 * den as i128),
            Scalar::Fixed(f) => {
                let v = BigUint::from(f.bits) * num / den;
                let bits = (v % (BigUint::one() << 128u32)).to_u128().expect("reduced");
                Ok(Scalar::Fixed(Fixed { bits, irrational: false }))
            }
        }
    }

    /// The point `-self`.
    pub fn neg(&self) -> Self {
        match self {
            Scalar::Rational(r) => Scalar::Rational(Rational { num: (r.den - r.num) % r.den, den: r.den }),
            Scalar::Fixed(f) => Scalar::Fixed(Fixed { bits: f.bits.wrapping_neg(), irrational: f.irrational }),
        }
    }

    /// Divides the representative in `[0, 1)` by `k`; fixed results are
    /// rounded down.
    pub fn div_int(&self, k: u64) -> Result<Self, SystemError> {
        match self {
            Scalar::Rational(r) => Scalar::rational(r.num as i128, r.den as i128 * k as i128),
            Scalar::Fixed(f) => Ok(Scalar::Fixed(Fixed { bits: f.bits / k as u128, irrational: f.irrational })),
        }
    }

    /// `k * self` mod 1.
    pub fn mul_int(&self, k: i128) -> Self {
        match self {
            Scalar::Rational(r) => {
                let km = k.rem_euclid(r.den as i128) as u128;
                let v = (r.num as u128 * km) % r.den as u128;
                Scalar::Rational(Rational::new(v as i128, r.den as i128).expect("valid"))
            }
            Scalar::Fixed(f) => Scalar::Fixed(Fixed { bits: f.bits.wrapping_mul(k as u128), irrational: f.irrational }),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Self::zero()
    }
}

/// Chooses the residue ring shared by a collection of scalars: the least
/// common denominator if every scalar is rational and it fits in 63 bits,
/// otherwise `2^128`.
pub fn common_ring<'a>(scalars: impl IntoIterator<Item = &'a Scalar>, extra_den: &[u64]) -> Modulus {
    let mut l: u64 = 1;
    for &d in extra_den {
        match lcm_checked(l, d) {
            Some(v) => l = v,
            None => return Modulus::Pow128,
        }
    }
    for s in scalars {
        match s {
            Scalar::Fixed(_) => return Modulus::Pow128,
            Scalar::Rational(r) => match lcm_checked(l, r.den) {
                Some(v) => l = v,
                None => return Modulus::Pow128,
            },
        }
    }
    Modulus::Small(l)
}

fn lcm_checked(a: u64, b: u64) -> Option<u64> {
    let g = a.gcd(&b);
    let v = (a / g).checked_mul(b)?;
    (v < 1 << 63).then_some(v)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) if r.num == 0 => write!(f, "0"),
            Scalar::Rational(r) => write!(f, "{}/{}", r.num, r.den),
            Scalar::Fixed(x) if x.irrational => write!(f, "irr:0x{:032x}", x.bits),
            Scalar::Fixed(x) => write!(f, "fixed:0x{:032x}", x.bits),
        }
    }
}

/// Parses a decimal like `-0.05` or `12.5` into an exact fraction.
pub(crate) fn parse_decimal(s: &str) -> Option<(BigInt, BigInt)> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if neg {
        num = -num;
    }
    let den = BigInt::from(10).pow(fp.len() as u32);
    Some((num, den))
}

impl FromStr for Scalar {
    type Err = SystemError;

    /// `p/q`, integers, decimals, `fixed:0x<hex>`, `irr:0x<hex>` and the
    /// named constant `sqrt2m1` (optionally prefixed).
    fn from_str(input: &str) -> Result<Self, SystemError> {
        let s = input.trim();
        let bad = || SystemError::Scalar(format!("cannot parse scalar {input:?}"));
        let (tag, body) = match s.split_once(':') {
            Some((t, b)) => (Some(t), b),
            None => (None, s),
        };
        match tag {
            Some("fixed") | Some("irr") | None if body == "sqrt2m1" => return Ok(Scalar::sqrt2_minus_1()),
            Some(t @ ("fixed" | "irr")) => {
                let hex = body.strip_prefix("0x").ok_or_else(bad)?;
                if hex.is_empty() || hex.len() > 32 {
                    return Err(bad());
                }
                let bits = u128::from_str_radix(hex, 16).map_err(|_| bad())?;
                return Ok(if t == "irr" { Scalar::irrational(bits) } else { Scalar::fixed(bits) });
            }
            Some(_) => return Err(bad()),
            None => {}
        }
        let (num, den) = if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            (n, d)
        } else {
            parse_decimal(s).ok_or_else(bad)?
        };
        if den.is_zero() {
            return Err(bad());
        }
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let r = num.mod_floor(&den);
        let g = r.gcd(&den);
        let (r, d) = (r / &g, den / &g);
        let d = d.to_i128().ok_or_else(|| SystemError::Scalar(format!("denominator of {input:?} too large")))?;
        Scalar::rational(r.to_i128().expect("r < d"), d)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact test `||x|| < eps` for a residue `x` of the circle ring, where
/// `||x||` is the distance to the nearest integer.
#[derive(Debug, Clone, Copy)]
pub struct NormBound {
    modulus: Modulus,
    num: u64,
    den: u64,
    threshold: u128,
}

impl NormBound {
    /// `eps = num/den` with `0 <= eps <= 1/2`.
    pub fn new(modulus: Modulus, num: u64, den: u64) -> Self {
        // smallest t with t * den >= num * 2^128
        let threshold = if let Modulus::Pow128 = modulus {
            let (q, rem) = (BigUint::from(num) << 128u32).div_rem(&BigUint::from(den));
            let t = if rem.is_zero() { q } else { q + 1u32 };
            t.to_u128().unwrap_or(u128::MAX)
        } else {
            0
        };
        Self { modulus, num, den, threshold }
    }

    pub fn below(&self, x: u128) -> bool {
        match self.modulus {
            Modulus::Pow128 => x.min(x.wrapping_neg()) < self.threshold,
            Modulus::Small(m) => {
                let m = m as u128;
                let nrm = x.min(m - x);
                nrm * (self.den as u128) < (self.num as u128) * m
            }
        }
    }
}

/// Circle norm as a float, for reports and oracles.
pub fn circle_norm_f64(x: u128, m: Modulus) -> f64 {
    match m {
        Modulus::Pow128 => x.min(x.wrapping_neg()) as f64 / 2f64.powi(128),
        Modulus::Small(d) => {
            let d = d as u128;
            x.min(d - x) as f64 / d as f64
        }
    }
}
