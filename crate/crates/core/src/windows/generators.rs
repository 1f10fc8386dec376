//! Arithmetic example sets.

use num_rational::Ratio;

use super::{WindowError, WindowSet};
use crate::polys::IntPoly;
use crate::systems::{common_ring, NormBound, Scalar};

/// `floor(n * bits / 2^128)` for a signed `n`.
fn mul_fixed_floor(n: i64, bits: u128) -> i128 {
    let hi = (bits >> 64) as i128;
    let lo = (bits & u64::MAX as u128) as i128;
    let n = n as i128;
    // n * bits = (n * hi) 2^64 + n * lo, and >> is a floor division
    (n * hi + ((n * lo) >> 64)) >> 64
}

/// The Beatty sequence `{floor(n alpha) : n in Z}` on `[lo, hi]`, with
/// `alpha = int_part + frac` and `int_part >= 1`.
pub fn gen_beatty(int_part: u64, frac: Scalar, lo: i64, hi: i64) -> Result<WindowSet, WindowError> {
    if int_part == 0 || int_part > 1 << 20 {
        return Err(WindowError::BadParameter {
            name: "alpha",
            value: format!("{int_part} + {frac}"),
            reason: "integer part must be in [1, 2^20]",
        });
    }
    let floor_frac = |n: i64| -> i128 {
        match frac {
            Scalar::Rational(r) => (n as i128 * r.num() as i128).div_euclid(r.den() as i128),
            Scalar::Fixed(f) => mul_fixed_floor(n, f.bits),
        }
    };
    let k = int_part as i64;
    // floor(n alpha) lies in [n k, n (k + 1)), so n ranges over about
    // [lo / (k + 1), hi / k]
    let n_lo = lo.min(0).div_euclid(k + 1).min(lo.div_euclid(k)) - 1;
    let n_hi = hi.max(0).div_euclid(k).max(hi.div_euclid(k + 1)) + 1;
    let mut members = Vec::new();
    for n in n_lo..=n_hi {
        let v = n as i128 * k as i128 + floor_frac(n);
        if (lo as i128..=hi as i128).contains(&v) {
            members.push(v as i64);
        }
    }
    members.dedup();
    WindowSet::new(lo, hi, &members)
}

/// Integers whose 2-adic valuation is even; `0` is excluded.
pub fn gen_nu2_even(lo: i64, hi: i64) -> Result<WindowSet, WindowError> {
    WindowSet::from_predicate(lo, hi, |n| n != 0 && n.trailing_zeros() % 2 == 0)
}

/// All `n <= 0`, together with the even members of the dyadic blocks
/// `[2^k, 2^(k+1))` for even `k` and the odd members for odd `k`.
pub fn gen_example121(lo: i64, hi: i64) -> Result<WindowSet, WindowError> {
    WindowSet::from_predicate(lo, hi, |n| {
        if n <= 0 {
            return true;
        }
        let k = 63 - n.leading_zeros() as i64;
        (n - k).rem_euclid(2) == 0
    })
}

/// `{n : ||p(n) alpha|| < eps}` on `[lo, hi]`, computed exactly in the
/// residue ring of `alpha`.
pub fn gen_poly_small(alpha: Scalar, p: &IntPoly, eps: Ratio<u64>, lo: i64, hi: i64) -> Result<WindowSet, WindowError> {
    if *eps.numer() == 0 || eps * 2 >= Ratio::from_integer(1) {
        return Err(WindowError::BadParameter { name: "eps", value: eps.to_string(), reason: "need 0 < eps < 1/2" });
    }
    let ring = common_ring([&alpha], &[]);
    let a = alpha.residue(ring);
    let poly = p.reduce(ring);
    let bound = NormBound::new(ring, *eps.numer(), *eps.denom());
    WindowSet::from_predicate(lo, hi, |n| bound.below(ring.mul(poly.eval(n), a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    #[test]
    fn nu2_even_small_window() {
        assert_eq!(gen_nu2_even(1, 16).unwrap().elements(), vec![1, 3, 4, 5, 7, 9, 11, 12, 13, 15, 16]);
        assert!(!gen_nu2_even(-2, 2).unwrap().contains(0));
        assert!(gen_nu2_even(-2, 2).unwrap().contains(-1));
    }

    #[test]
    fn example121_small_window() {
        assert_eq!(gen_example121(-4, 4).unwrap().elements(), vec![-4, -3, -2, -1, 0, 3, 4]);
    }

    #[test]
    fn example121_gaps() {
        // block transitions give a gap of 3 and no larger
        let g = gen_example121(-8, 1 << 17).unwrap().gap_profile();
        assert_eq!(g.max_internal_gap, 3);
    }

    #[test]
    fn poly_small_rational() {
        let s = gen_poly_small(Scalar::rational(1, 4).unwrap(), &IntPoly::identity(), Ratio::new(3, 10), 0, 8).unwrap();
        assert_eq!(s.elements(), vec![0, 1, 3, 4, 5, 7, 8]);
        assert!(gen_poly_small(Scalar::zero(), &IntPoly::identity(), Ratio::new(1, 2), 0, 8).is_err());
    }

    #[test]
    fn beatty_golden_ratio_prefix() {
        // floor(n phi) for n = 1..10, phi = 1.618...
        let phi = Scalar::fixed(0x9e3779b97f4a7c15f39cc0605cedc834);
        let s = gen_beatty(1, phi, 1, 16).unwrap();
        assert_eq!(s.elements(), vec![1, 3, 4, 6, 8, 9, 11, 12, 14, 16]);
        let all = gen_beatty(1, phi, -30, 30).unwrap();
        assert!(all.contains(-2)); // floor(-1 * phi)
        assert!(all.contains(0));
    }

    #[test]
    fn beatty_rational_is_periodic() {
        // alpha = 3/2: floor(3n/2) hits everything except 2 mod 3
        let s = gen_beatty(1, Scalar::rational(1, 2).unwrap(), -30, 30).unwrap();
        let want = WindowSet::from_predicate(-30, 30, |n| n.rem_euclid(3) != 2).unwrap();
        assert_eq!(s, want);
    }

    proptest! {
        #[test]
        fn fixed_floor_matches_big_ints(n in any::<i32>(), bits in any::<u128>()) {
            let want = (BigInt::from(n) * BigInt::from(bits)) >> 128u32;
            prop_assert_eq!(BigInt::from(mul_fixed_floor(n as i64, bits)), want);
        }

        #[test]
        fn poly_small_rational_matches_integer_oracle(num in 1i128..50, den in 2i128..50, e in 1u64..49) {
            let alpha = Scalar::rational(num, den).unwrap();
            let p: IntPoly = "n^2+3*n".parse().unwrap();
            let s = gen_poly_small(alpha, &p, Ratio::new(e, 100), -60, 60).unwrap();
            for n in -60i64..=60 {
                let v = (n * n + 3 * n) as i128 * num;
                let r = v.rem_euclid(den);
                // ||v/den|| < e/100 in integers
                let nrm = r.min(den - r);
                prop_assert_eq!(s.contains(n), nrm * 100 < e as i128 * den);
            }
        }
    }
}
