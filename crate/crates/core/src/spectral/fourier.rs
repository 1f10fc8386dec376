//! Fixed-point trigonometric sums `gamma(n) = sum_k a_k conj(b_k) e(k alpha n)`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::systems::{Rational, Scalar};
use crate::windows::WindowSet;

/// `floor(pi/4 * 2^128)`.
const PI_4_Q128: u128 = 0xc90fdaa22168c234c4c6628b80dc1cd1;

/// Full 256-bit product as `(hi, lo)`.
fn widening_mul(a: u128, b: u128) -> (u128, u128) {
    let mask = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & mask);
    let (b1, b0) = (b >> 64, b & mask);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
    let lo = (p00 & mask) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// `floor(a b / 2^128)`.
fn mul_hi(a: u128, b: u128) -> u128 {
    widening_mul(a, b).0
}

/// `a b` for Q64 values, rounded to nearest.
fn mul_q64(a: i128, b: i128) -> i128 {
    let (hi, lo) = widening_mul(a.unsigned_abs(), b.unsigned_abs());
    let (lo, carry) = lo.overflowing_add(1 << 63);
    let hi = hi + carry as u128;
    assert!(hi < 1 << 63, "Q64 product overflows");
    let m = (hi << 64 | lo >> 64) as i128;
    if (a < 0) != (b < 0) {
        -m
    } else {
        m
    }
}

/// `(sin x, 1 - cos x)` in Q128 for `0 <= x < pi/4` given in Q128.
fn taylor(x: u128) -> (u128, u128) {
    let x2 = mul_hi(x, x);
    let mut sin = x;
    let mut term = x;
    for i in 1..=14u128 {
        term = mul_hi(term, x2) / ((2 * i) * (2 * i + 1));
        if i % 2 == 1 {
            sin -= term;
        } else {
            sin += term;
        }
    }
    let mut omc = x2 / 2;
    let mut term = omc;
    for i in 2..=14u128 {
        term = mul_hi(term, x2) / ((2 * i - 1) * (2 * i));
        if i % 2 == 0 {
            omc -= term;
        } else {
            omc += term;
        }
    }
    (sin, omc)
}

fn q128_to_q64(v: u128) -> i128 {
    ((v >> 64) + ((v >> 63) & 1)) as i128
}

/// `(cos 2 pi t, sin 2 pi t)` in Q64 for `t = turns / 2^128`.
pub fn cos_sin_turns(turns: u128) -> (i128, i128) {
    let octant = (turns >> 125) as u8;
    let mut r = turns & ((1 << 125) - 1);
    if octant & 1 == 1 {
        r = (1 << 125) - r;
    }
    // r / 2^125 of an eighth turn
    let (s, omc) = if r == 1 << 125 {
        // pi/4 exactly: the reflected angle of an odd octant boundary
        taylor(PI_4_Q128)
    } else {
        taylor(mul_hi(r << 3, PI_4_Q128))
    };
    let one = 1i128 << 64;
    let (sv, cv) = (q128_to_q64(s), one - q128_to_q64(omc));
    // angle within the quadrant is beta; odd octants reflect
    let (cb, sb) = if octant & 1 == 1 { (sv, cv) } else { (cv, sv) };
    match octant >> 1 {
        0 => (cb, sb),
        1 => (-sb, cb),
        2 => (-cb, -sb),
        _ => (sb, -cb),
    }
}

/// Complex number with Q64 parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedComplex {
    pub re: i128,
    pub im: i128,
}

impl FixedComplex {
    pub const ZERO: FixedComplex = FixedComplex { re: 0, im: 0 };

    pub fn from_f64(re: f64, im: f64) -> Result<Self, SpectralError> {
        let conv = |v: f64| {
            if !v.is_finite() || v.abs() >= (1u64 << 40) as f64 {
                return Err(SpectralError::Fourier(format!("coefficient part {v} out of range")));
            }
            Ok((v * 2f64.powi(64)).round() as i128)
        };
        Ok(Self { re: conv(re)?, im: conv(im)? })
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re as f64 / 2f64.powi(64), self.im as f64 / 2f64.powi(64))
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            re: mul_q64(self.re, o.re) - mul_q64(self.im, o.im),
            im: mul_q64(self.re, o.im) + mul_q64(self.im, o.re),
        }
    }

    pub fn abs_f64(&self) -> f64 {
        let (re, im) = self.to_f64();
        re.hypot(im)
    }
}

/// Finitely many Fourier modes `(k, c_k)` with distinct frequencies,
/// kept sorted by frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i64, f64, f64)>", into = "Vec<(i64, f64, f64)>")]
pub struct FourierData {
    modes: Vec<(i64, FixedComplex)>,
}

impl FourierData {
    pub fn new(mut modes: Vec<(i64, FixedComplex)>) -> Result<Self, SpectralError> {
        modes.sort_by_key(|m| m.0);
        if let Some(w) = modes.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(SpectralError::Fourier(format!("frequency {} repeated", w[0].0)));
        }
        Ok(Self { modes })
    }

    pub fn zero() -> Self {
        Self { modes: Vec::new() }
    }

    /// From `(k, re, im)` triples.
    pub fn from_triples(triples: &[(i64, f64, f64)]) -> Result<Self, SpectralError> {
        let modes = triples
            .iter()
            .map(|&(k, re, im)| FixedComplex::from_f64(re, im).map(|c| (k, c)))
            .collect::<Result<_, SpectralError>>()?;
        Self::new(modes)
    }

    pub fn triples(&self) -> Vec<(i64, f64, f64)> {
        self.modes
            .iter()
            .map(|(k, c)| {
                let (re, im) = c.to_f64();
                (*k, re, im)
            })
            .collect()
    }

    pub fn modes(&self) -> &[(i64, FixedComplex)] {
        &self.modes
    }

    pub fn coefficient(&self, k: i64) -> Option<FixedComplex> {
        self.modes.binary_search_by_key(&k, |m| m.0).ok().map(|i| self.modes[i].1)
    }

    /// `c_{-k} = conj(c_k)` for every mode, so the function is real.
    pub fn is_conjugate_symmetric(&self) -> bool {
        self.modes.iter().all(|(k, c)| self.coefficient(-k).unwrap_or(FixedComplex::ZERO) == c.conj())
    }

    /// `sum_k |a_k| |b_k|` over common frequencies.
    pub fn product_bound(&self, other: &Self) -> f64 {
        self.modes.iter().filter_map(|(k, a)| other.coefficient(*k).map(|b| a.abs_f64() * b.abs_f64())).sum()
    }

    /// `a_k conj(b_k)` over common frequencies.
    fn correlation_modes(&self, other: &Self) -> Vec<(i64, FixedComplex)> {
        self.modes.iter().filter_map(|(k, a)| other.coefficient(*k).map(|b| (*k, a.mul(&b.conj())))).collect()
    }
}

impl TryFrom<Vec<(i64, f64, f64)>> for FourierData {
    type Error = SpectralError;

    fn try_from(v: Vec<(i64, f64, f64)>) -> Result<Self, Self::Error> {
        Self::from_triples(&v)
    }
}

impl From<FourierData> for Vec<(i64, f64, f64)> {
    fn from(f: FourierData) -> Self {
        f.triples()
    }
}

/// `m alpha` mod 1 as a 128-bit fraction.
fn phase(alpha: &Scalar, m: i128) -> u128 {
    match alpha {
        Scalar::Fixed(f) => f.bits.wrapping_mul(m as u128),
        Scalar::Rational(r) => {
            let d = r.den() as i128;
            let v = (r.num() as u128 * m.rem_euclid(d) as u128) % d as u128;
            Rational::new(v as i128, d).expect("positive denominator").to_fixed_bits().0
        }
    }
}

fn gamma_from(modes: &[(i64, FixedComplex)], alpha: &Scalar, n: i64) -> FixedComplex {
    modes.iter().fold(FixedComplex::ZERO, |acc, (k, c)| {
        let (re, im) = cos_sin_turns(phase(alpha, *k as i128 * n as i128));
        acc.add(&c.mul(&FixedComplex { re, im }))
    })
}

/// `gamma(n) = sum_k a_k conj(b_k) e^{2 pi i k alpha n}`. Each mode is
/// accurate to about `2^-60` times `|a_k b_k|`.
pub fn kronecker_gamma(f1: &FourierData, f2: &FourierData, alpha: &Scalar, n: i64) -> FixedComplex {
    gamma_from(&f1.correlation_modes(f2), alpha, n)
}

/// `{n in [lo, hi] : Re gamma(n) > eps}` for real-valued `f1`, `f2`.
pub fn d_eps_set(
    f1: &FourierData,
    f2: &FourierData,
    alpha: &Scalar,
    eps: Ratio<u64>,
    lo: i64,
    hi: i64,
) -> Result<WindowSet, SpectralError> {
    for (name, f) in [("f1", f1), ("f2", f2)] {
        if !f.is_conjugate_symmetric() {
            return Err(SpectralError::Fourier(format!("{name} is not conjugate-symmetric")));
        }
    }
    // Re gamma is an integer in Q64, so comparing with the floor is exact
    let threshold = ((*eps.numer() as u128) << 64) / *eps.denom() as u128;
    let threshold = i128::try_from(threshold).map_err(|_| SpectralError::Fourier(format!("eps {eps} too large")))?;
    let modes = f1.correlation_modes(f2);
    Ok(WindowSet::from_predicate(lo, hi, |n| gamma_from(&modes, alpha, n).re > threshold)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widening_matches_bigint() {
        use num_bigint::BigUint;
        for (a, b) in [(u128::MAX, u128::MAX), (1 << 100, 3), (0xdead_beef_u128 << 70, u128::MAX - 5)] {
            let (hi, lo) = widening_mul(a, b);
            let want = BigUint::from(a) * BigUint::from(b);
            assert_eq!((BigUint::from(hi) << 128u32) + BigUint::from(lo), want);
        }
    }

    #[test]
    fn quarter_turns() {
        let one = 1i128 << 64;
        assert_eq!(cos_sin_turns(0), (one, 0));
        assert_eq!(cos_sin_turns(1 << 126), (0, one));
        assert_eq!(cos_sin_turns(1 << 127), (-one, 0));
        assert_eq!(cos_sin_turns(3 << 126), (0, -one));
    }

    #[test]
    fn trig_agrees_with_f64() {
        let mut t: u128 = 0x1234_5678_9abc_def0_0fed_cba9_8765_4321;
        for _ in 0..2000 {
            t = t.wrapping_mul(0x9e3779b97f4a7c15f39cc0605cedc835).wrapping_add(1);
            let (c, s) = cos_sin_turns(t);
            let angle = std::f64::consts::TAU * (t as f64 / 2f64.powi(128));
            assert!((c as f64 / 2f64.powi(64) - angle.cos()).abs() < 1e-15);
            assert!((s as f64 / 2f64.powi(64) - angle.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn q64_products_round() {
        let half = 1i128 << 63;
        assert_eq!(mul_q64(half, half), 1 << 62);
        assert_eq!(mul_q64(-half, 3 << 64), -(3 << 63));
        assert_eq!(mul_q64(1, 1 << 63), 1);
    }
}
