//! One application of each defining map, written out directly.
//!
//! Useful as an oracle for the closed forms. Arithmetic is exact in `Q/Z`
//! while both operands are rational and wrapping 128-bit fixed point once
//! either is fixed (a rational is rounded down when it meets a fixed value).

use num_integer::Integer;

use super::{Point, Rational, Scalar, SystemError, SystemSpec};

fn add(a: Scalar, b: Scalar) -> Scalar {
    match (a, b) {
        (Scalar::Rational(x), Scalar::Rational(y)) => {
            let g = x.den().gcd(&y.den());
            let l = (x.den() / g) as u128 * y.den() as u128;
            let num = (x.num() as u128 * (y.den() / g) as u128 + y.num() as u128 * (x.den() / g) as u128) % l;
            Scalar::Rational(match u64::try_from(l) {
                Ok(l) => Rational::reduce_u64(num as u64, l),
                Err(_) => Rational::new(num as i128, l as i128).expect("denominators stay in range"),
            })
        }
        _ => Scalar::fixed(a.fixed_bits().wrapping_add(b.fixed_bits())),
    }
}

fn sub(a: Scalar, b: Scalar) -> Scalar {
    match b {
        Scalar::Rational(_) if !a.is_fixed() => add(a, b.neg()),
        _ => Scalar::fixed(a.fixed_bits().wrapping_sub(b.fixed_bits())),
    }
}

fn shape(sys: &SystemSpec, x: &Point) -> SystemError {
    SystemError::Shape(format!("point {x:?} does not fit {}", sys.constructor()))
}

/// `T x`.
pub fn step(sys: &SystemSpec, x: &Point) -> Result<Point, SystemError> {
    move_once(sys, x, true)
}

/// `T^{-1} x`.
pub fn step_back(sys: &SystemSpec, x: &Point) -> Result<Point, SystemError> {
    move_once(sys, x, false)
}

/// `T^n x` by `|n|` single steps.
pub fn iterate(sys: &SystemSpec, x: &Point, n: i64) -> Result<Point, SystemError> {
    let mut y = x.clone();
    for _ in 0..n.unsigned_abs() {
        y = move_once(sys, &y, n > 0)?;
    }
    Ok(y)
}

fn move_once(sys: &SystemSpec, x: &Point, fwd: bool) -> Result<Point, SystemError> {
    match (sys, x) {
        (SystemSpec::Cyclic(k), Point::Residue(r)) if r < k => {
            Ok(Point::Residue(if fwd { (r + 1) % k } else { (r + k - 1) % k }))
        }
        (SystemSpec::TorusRot(alpha), Point::Torus(c)) if c.len() == alpha.len() => Ok(Point::Torus(
            c.iter().zip(alpha).map(|(x, a)| if fwd { add(*x, *a) } else { sub(*x, *a) }).collect(),
        )),
        (SystemSpec::Skew2(a), Point::Torus(c)) if c.len() == 2 => {
            let (x, y) = (c[0], c[1]);
            Ok(Point::Torus(if fwd {
                vec![add(x, *a), add(y, x)]
            } else {
                let x0 = sub(x, *a);
                vec![x0, sub(y, x0)]
            }))
        }
        (SystemSpec::SkewS(a), Point::Torus(c)) if c.len() == 2 => {
            let (x, y) = (c[0], c[1]);
            Ok(Point::Torus(if fwd {
                vec![add(x, *a), add(add(add(y, x), x), *a)]
            } else {
                let x0 = sub(x, *a);
                vec![x0, sub(sub(sub(y, x0), x0), *a)]
            }))
        }
        (SystemSpec::Chacon(w), Point::WordIndex(i)) => {
            let j = if fwd { i.checked_add(1) } else { i.checked_sub(1) };
            match j {
                Some(j) if j < w.len() => Ok(Point::WordIndex(j)),
                _ => Err(SystemError::ChaconRange { index: format!("{i} {} 1", if fwd { '+' } else { '-' }), len: w.len() }),
            }
        }
        (SystemSpec::Product(a, b), Point::Pair(x, y)) => Ok(Point::pair(move_once(a, x, fwd)?, move_once(b, y, fwd)?)),
        (SystemSpec::Power(a, k), _) => {
            let mut y = x.clone();
            for _ in 0..k.unsigned_abs() {
                y = move_once(a, &y, fwd == (*k > 0))?;
            }
            Ok(y)
        }
        (SystemSpec::Diagonal(a, d), Point::Tuple(parts)) if parts.len() == d + 1 => parts
            .iter()
            .enumerate()
            .map(|(i, p)| iterate(a, p, if fwd { i as i64 } else { -(i as i64) }))
            .collect::<Result<_, _>>()
            .map(Point::Tuple),
        _ => Err(shape(sys, x)),
    }
}
