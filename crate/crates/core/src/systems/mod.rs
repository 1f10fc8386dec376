//! Concrete dynamical systems with closed-form orbits.
//!
//! Every system here is a homeomorphism whose `n`-th iterate has a closed
//! form: finite and torus rotations, the two skew products on `T^2`, the
//! Chacon subshift (as shifts of a long reference word), and products,
//! powers and diagonal powers of these. Orbit arithmetic happens in a
//! residue ring that stands for the circle: the common denominator when
//! every scalar is rational, `2^128` (fixed point) otherwise. Both are
//! exact, so iterating and jumping agree bit for bit.

mod chacon;
pub(crate) mod circle;
pub(crate) mod flat;
mod iterate;
mod scalar;
mod syntax;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use chacon::{chacon_word, word_len as chacon_word_len, ChaconWord, MAX_LEVEL as CHACON_MAX_LEVEL};
pub use circle::Containment;
pub use iterate::{iterate, step, step_back};
pub use scalar::{circle_norm_f64, common_ring, Fixed, NormBound, Rational, Scalar, INV_SQRT2_BITS, SQRT2_M1_BITS};

use crate::polys::Modulus;
use flat::{Compiled, Steps};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("scalar: {0}")]
    Scalar(String),
    #[error("Chacon level {level} exceeds the word-length bound {max_len}")]
    ChaconLevel { level: u32, max_len: u64 },
    #[error("orbit index {index} leaves the generated Chacon word of length {len}; use a longer substitution word (higher level)")]
    ChaconRange { index: String, len: u64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0} is not a rotation-type system")]
    NotRotation(String),
    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse { what: &'static str, input: String, reason: String },
    #[error("degenerate arc ({0}, {0})")]
    DegenerateArc(Scalar),
    #[error("{0}")]
    Unsupported(String),
}

/// A concrete system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemSpec {
    /// Rotation of `k` points.
    Cyclic(u64),
    /// `x -> x + alpha` on `T^d`.
    TorusRot(Vec<Scalar>),
    /// `(x, y) -> (x + alpha, y + x)`.
    Skew2(Scalar),
    /// `(x, y) -> (x + alpha, y + 2x + alpha)`.
    SkewS(Scalar),
    /// Shift on the Chacon subshift, realized on a finite reference word.
    Chacon(ChaconWord),
    Product(Box<SystemSpec>, Box<SystemSpec>),
    /// `T^k`; `k` may be negative.
    Power(Box<SystemSpec>, i64),
    /// `I x T x T^2 x ... x T^d` on the `(d+1)`-fold product.
    Diagonal(Box<SystemSpec>, usize),
}

/// A phase-space point; the shape mirrors the owning [`SystemSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Torus(Vec<Scalar>),
    Residue(u64),
    /// Position in the Chacon reference word.
    WordIndex(u64),
    Pair(Box<Point>, Box<Point>),
    Tuple(Vec<Point>),
}

/// One coordinate of a torus box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircleArc {
    /// The open arc from the first endpoint counterclockwise to the second.
    Open(Scalar, Scalar),
    Full,
}

/// An open set, as a finite union of boxes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Region {
    /// The whole phase space.
    Full,
    /// Product of arcs, one per torus coordinate.
    Box(Vec<CircleArc>),
    Residues(BTreeSet<u64>),
    /// Union of the cylinders `[w]` at coordinate 0.
    Cylinders(Vec<Vec<u8>>),
    Pair(Box<Region>, Box<Region>),
    Tuple(Vec<Region>),
    Union(Vec<Region>),
}

impl SystemSpec {
    pub fn chacon(level: u32) -> Result<Self, SystemError> {
        Ok(SystemSpec::Chacon(ChaconWord::new(level)?))
    }

    pub fn product(a: SystemSpec, b: SystemSpec) -> Self {
        SystemSpec::Product(Box::new(a), Box::new(b))
    }

    pub fn power(a: SystemSpec, k: i64) -> Self {
        SystemSpec::Power(Box::new(a), k)
    }

    pub fn diagonal(a: SystemSpec, d: usize) -> Self {
        SystemSpec::Diagonal(Box::new(a), d)
    }

    /// Name of the outermost constructor.
    pub fn constructor(&self) -> &'static str {
        match self {
            SystemSpec::Cyclic(_) => "cyclic",
            SystemSpec::TorusRot(_) => "rot",
            SystemSpec::Skew2(_) => "skew2",
            SystemSpec::SkewS(_) => "skews",
            SystemSpec::Chacon(_) => "chacon",
            SystemSpec::Product(..) => "product",
            SystemSpec::Power(..) => "power",
            SystemSpec::Diagonal(..) => "diagonal",
        }
    }

    pub fn scalars(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        self.collect_scalars(&mut out);
        out
    }

    fn collect_scalars(&self, out: &mut Vec<Scalar>) {
        match self {
            SystemSpec::TorusRot(a) => out.extend(a.iter().copied()),
            SystemSpec::Skew2(a) | SystemSpec::SkewS(a) => out.push(*a),
            SystemSpec::Product(a, b) => {
                a.collect_scalars(out);
                b.collect_scalars(out);
            }
            SystemSpec::Power(a, _) | SystemSpec::Diagonal(a, _) => a.collect_scalars(out),
            SystemSpec::Cyclic(_) | SystemSpec::Chacon(_) => {}
        }
    }

    /// Translations of a compact abelian group: the return sets of these
    /// systems reduce to intersections of translated arcs.
    pub fn is_rotation_type(&self) -> bool {
        match self {
            SystemSpec::Cyclic(_) | SystemSpec::TorusRot(_) => true,
            SystemSpec::Skew2(_) | SystemSpec::SkewS(_) | SystemSpec::Chacon(_) => false,
            SystemSpec::Product(a, b) => a.is_rotation_type() && b.is_rotation_type(),
            SystemSpec::Power(a, _) | SystemSpec::Diagonal(a, _) => a.is_rotation_type(),
        }
    }

    /// The origin: all coordinates zero, word index zero.
    pub fn origin(&self) -> Point {
        match self {
            SystemSpec::Cyclic(_) => Point::Residue(0),
            SystemSpec::TorusRot(a) => Point::Torus(vec![Scalar::zero(); a.len()]),
            SystemSpec::Skew2(_) | SystemSpec::SkewS(_) => Point::Torus(vec![Scalar::zero(); 2]),
            SystemSpec::Chacon(_) => Point::WordIndex(0),
            SystemSpec::Product(a, b) => Point::Pair(Box::new(a.origin()), Box::new(b.origin())),
            SystemSpec::Power(a, _) => a.origin(),
            SystemSpec::Diagonal(a, d) => Point::Tuple(vec![a.origin(); d + 1]),
        }
    }
}

impl Point {
    pub fn torus(coords: Vec<Scalar>) -> Self {
        Point::Torus(coords)
    }

    pub fn pair(a: Point, b: Point) -> Self {
        Point::Pair(Box::new(a), Box::new(b))
    }

    pub fn scalars(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        self.collect_scalars(&mut out);
        out
    }

    fn collect_scalars(&self, out: &mut Vec<Scalar>) {
        match self {
            Point::Torus(v) => out.extend(v.iter().copied()),
            Point::Pair(a, b) => {
                a.collect_scalars(out);
                b.collect_scalars(out);
            }
            Point::Tuple(v) => v.iter().for_each(|p| p.collect_scalars(out)),
            Point::Residue(_) | Point::WordIndex(_) => {}
        }
    }
}

impl CircleArc {
    pub fn open(a: Scalar, b: Scalar) -> Result<Self, SystemError> {
        if a == b {
            return Err(SystemError::DegenerateArc(a));
        }
        Ok(CircleArc::Open(a, b))
    }

    /// The symmetric arc `(-r, r)`.
    pub fn centered(r: Scalar) -> Result<Self, SystemError> {
        Self::open(r.neg(), r)
    }
}

impl Region {
    /// One-dimensional box `(a, b)`.
    pub fn arc(a: Scalar, b: Scalar) -> Result<Self, SystemError> {
        Ok(Region::Box(vec![CircleArc::open(a, b)?]))
    }

    pub fn residues(r: impl IntoIterator<Item = u64>) -> Self {
        Region::Residues(r.into_iter().collect())
    }

    pub fn scalars(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        self.collect_scalars(&mut out);
        out
    }

    fn collect_scalars(&self, out: &mut Vec<Scalar>) {
        match self {
            Region::Box(arcs) => {
                for a in arcs {
                    if let CircleArc::Open(x, y) = a {
                        out.push(*x);
                        out.push(*y);
                    }
                }
            }
            Region::Pair(a, b) => {
                a.collect_scalars(out);
                b.collect_scalars(out);
            }
            Region::Tuple(v) | Region::Union(v) => v.iter().for_each(|r| r.collect_scalars(out)),
            Region::Full | Region::Residues(_) | Region::Cylinders(_) => {}
        }
    }
}

/// `T^n x`, by closed form.
pub fn orbit_eval(sys: &SystemSpec, x: &Point, n: i128) -> Result<Point, SystemError> {
    orbit_eval_steps(sys, x, &Steps::Small(n))
}

/// `T^n x` for an arbitrary-precision `n`.
pub fn orbit_eval_big(sys: &SystemSpec, x: &Point, n: &num_bigint::BigInt) -> Result<Point, SystemError> {
    orbit_eval_steps(sys, x, &Steps::from_big(n))
}

fn orbit_eval_steps(sys: &SystemSpec, x: &Point, n: &Steps) -> Result<Point, SystemError> {
    let ring = common_ring(sys.scalars().iter().chain(x.scalars().iter()), &[]);
    let c = Compiled::new(sys, ring)?;
    let mut st = c.flatten_point(x)?;
    c.apply(&mut st, n)?;
    Ok(c.unflatten_point(&st))
}

/// Strict membership of `x` in the open set `r`.
pub fn region_contains(sys: &SystemSpec, r: &Region, x: &Point) -> Result<Containment, SystemError> {
    let ring = common_ring(sys.scalars().iter().chain(x.scalars().iter()).chain(r.scalars().iter()), &[]);
    let c = Compiled::new(sys, ring)?;
    let region = c.compile_region(r)?;
    let st = c.flatten_point(x)?;
    region.contains(&st)
}

/// `T^{-shift} r` for a rotation-type system: every arc and residue set
/// is translated by `-shift` times the rotation vector.
pub fn preimage_region(sys: &SystemSpec, r: &Region, shift: i128) -> Result<Region, SystemError> {
    if !sys.is_rotation_type() {
        return Err(SystemError::NotRotation(sys.constructor().into()));
    }
    let ring = common_ring(sys.scalars().iter().chain(r.scalars().iter()), &[]);
    preimage_in(sys, r, shift, ring)
}

fn preimage_in(sys: &SystemSpec, r: &Region, shift: i128, m: Modulus) -> Result<Region, SystemError> {
    if let Region::Union(parts) = r {
        return parts.iter().map(|p| preimage_in(sys, p, shift, m)).collect::<Result<_, _>>().map(Region::Union);
    }
    if let Region::Full = r {
        return Ok(Region::Full);
    }
    let shape = || SystemError::Shape(format!("region does not fit {}", sys.constructor()));
    match (sys, r) {
        (SystemSpec::Cyclic(k), Region::Residues(set)) => {
            let k = *k as i128;
            Ok(Region::Residues(set.iter().map(|&v| (v as i128 - shift).rem_euclid(k) as u64).collect()))
        }
        (SystemSpec::TorusRot(alphas), Region::Box(arcs)) if arcs.len() == alphas.len() => {
            let moved = arcs
                .iter()
                .zip(alphas)
                .map(|(arc, alpha)| match arc {
                    CircleArc::Full => CircleArc::Full,
                    CircleArc::Open(a, b) => {
                        let t = m.neg(m.mul(m.reduce_i128(shift), alpha.residue(m)));
                        let a2 = Scalar::from_residue(m.add(a.residue(m), t), m);
                        let b2 = Scalar::from_residue(m.add(b.residue(m), t), m);
                        CircleArc::Open(a2, b2)
                    }
                })
                .collect();
            Ok(Region::Box(moved))
        }
        (SystemSpec::Product(a, b), Region::Pair(ra, rb)) => {
            Ok(Region::Pair(Box::new(preimage_in(a, ra, shift, m)?), Box::new(preimage_in(b, rb, shift, m)?)))
        }
        (SystemSpec::Power(a, k), r) => {
            let s = shift.checked_mul(*k as i128).ok_or_else(|| SystemError::Unsupported("shift overflow".into()))?;
            preimage_in(a, r, s, m)
        }
        (SystemSpec::Diagonal(a, d), Region::Tuple(parts)) if parts.len() == d + 1 => parts
            .iter()
            .enumerate()
            .map(|(i, p)| preimage_in(a, p, shift * i as i128, m))
            .collect::<Result<_, _>>()
            .map(Region::Tuple),
        _ => Err(shape()),
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(SystemSpec);
string_serde!(Region);
string_serde!(Point);

fn join<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: impl IntoIterator<Item = T>) -> fmt::Result {
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::Cyclic(k) => write!(f, "cyclic({k})"),
            SystemSpec::TorusRot(a) => {
                write!(f, "rot(")?;
                join(f, a)?;
                write!(f, ")")
            }
            SystemSpec::Skew2(a) => write!(f, "skew2({a})"),
            SystemSpec::SkewS(a) => write!(f, "skews({a})"),
            SystemSpec::Chacon(w) => write!(f, "chacon({})", w.level()),
            SystemSpec::Product(a, b) => write!(f, "product({a}, {b})"),
            SystemSpec::Power(a, k) => write!(f, "power({a}, {k})"),
            SystemSpec::Diagonal(a, d) => write!(f, "diagonal({a}, {d})"),
        }
    }
}

impl fmt::Display for CircleArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleArc::Open(a, b) => write!(f, "arc({a}, {b})"),
            CircleArc::Full => write!(f, "full"),
        }
    }
}

fn word_str(w: &[u8]) -> String {
    w.iter().map(|b| char::from(b'0' + b)).collect()
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Full => write!(f, "full"),
            Region::Box(arcs) => {
                write!(f, "box(")?;
                join(f, arcs)?;
                write!(f, ")")
            }
            Region::Residues(s) => {
                write!(f, "res{{")?;
                join(f, s)?;
                write!(f, "}}")
            }
            Region::Cylinders(ws) => {
                write!(f, "cyl{{")?;
                join(f, ws.iter().map(|w| word_str(w)))?;
                write!(f, "}}")
            }
            Region::Pair(a, b) => write!(f, "pair({a}, {b})"),
            Region::Tuple(v) => {
                write!(f, "tuple(")?;
                join(f, v)?;
                write!(f, ")")
            }
            Region::Union(v) => {
                write!(f, "union(")?;
                join(f, v)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Torus(v) => {
                write!(f, "pt(")?;
                join(f, v)?;
                write!(f, ")")
            }
            Point::Residue(r) => write!(f, "res({r})"),
            Point::WordIndex(i) => write!(f, "word({i})"),
            Point::Pair(a, b) => write!(f, "pair({a}, {b})"),
            Point::Tuple(v) => {
                write!(f, "tuple(")?;
                join(f, v)?;
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests;
