//! Eigenvalue groups of the concrete systems, disjointness of spectra,
//! division of a spectrum by `k`, and Kronecker correlation sequences.

mod fourier;

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::systems::{Rational, Scalar, SystemSpec};

pub use fourier::{cos_sin_turns, d_eps_set, kronecker_gamma, FixedComplex, FourierData};

/// Largest integer multiplier tried when looking for a shared eigenvalue
/// among irrational generators.
pub const RELATION_BOUND: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("no eigenvalue group for {0} systems")]
    Unsupported(String),
    #[error("divisor must be positive")]
    ZeroDivisor,
    #[error("rational part 1/{0} overflows 64 bits")]
    Overflow(String),
    #[error("Fourier data: {0}")]
    Fourier(String),
    #[error(transparent)]
    Window(#[from] crate::windows::WindowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    /// Relations among irrational generators were only searched with
    /// integer multipliers up to `bound`.
    Heuristic { bound: u64 },
}

impl Exactness {
    fn join(self, other: Self) -> Self {
        match (self, other) {
            (Exactness::Exact, e) | (e, Exactness::Exact) => e,
            (Exactness::Heuristic { bound: a }, Exactness::Heuristic { bound: b }) => Exactness::Heuristic { bound: a.max(b) },
        }
    }
}

/// Subgroup of `R/Z` generated by `1/den` and the irrational generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenGroup {
    den: u64,
    irrational: Vec<Scalar>,
    exactness: Exactness,
}

impl EigenGroup {
    pub fn trivial() -> Self {
        Self { den: 1, irrational: Vec::new(), exactness: Exactness::Exact }
    }

    pub fn cyclic(den: u64) -> Self {
        Self { den: den.max(1), irrational: Vec::new(), exactness: Exactness::Exact }
    }

    /// Group generated by the given circle points. Rational points enter
    /// the cyclic part; fixed-point ones are kept as generators.
    pub fn generated_by(points: &[Scalar]) -> Self {
        let mut g = Self::trivial();
        for p in points {
            match p {
                Scalar::Rational(r) => g.den = g.den.lcm(&r.den()),
                Scalar::Fixed(_) => g.push_generator(*p),
            }
        }
        g.normalize();
        g
    }

    fn push_generator(&mut self, s: Scalar) {
        if s.fixed_bits() == 0 {
            return;
        }
        match self.irrational.iter_mut().find(|t| t.fixed_bits() == s.fixed_bits()) {
            Some(t) => {
                if s.is_tagged_irrational() {
                    *t = s;
                }
            }
            None => self.irrational.push(s),
        }
    }

    fn normalize(&mut self) {
        self.irrational.sort_by_key(|s| s.fixed_bits());
        self.exactness =
            if self.irrational.is_empty() { Exactness::Exact } else { Exactness::Heuristic { bound: RELATION_BOUND } };
    }

    /// The invariant denominator `L` of the rational part `<1/L>`.
    pub fn den(&self) -> u64 {
        self.den
    }

    /// Generator `1/L` of the rational part.
    pub fn rational_generator(&self) -> Rational {
        Rational::new(1, self.den as i128).expect("positive denominator")
    }

    /// All elements `j/L` of the rational part.
    pub fn rational_part(&self) -> Vec<Rational> {
        (0..self.den).map(|j| Rational::new(j as i128, self.den as i128).expect("positive denominator")).collect()
    }

    pub fn irrational_generators(&self) -> &[Scalar] {
        &self.irrational
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn is_trivial(&self) -> bool {
        self.den == 1 && self.irrational.is_empty()
    }

    /// Group generated by both.
    pub fn join(&self, other: &Self) -> Result<Self, SpectralError> {
        let den = checked_lcm(self.den, other.den)?;
        let mut g = Self { den, irrational: self.irrational.clone(), exactness: Exactness::Exact };
        for s in &other.irrational {
            g.push_generator(*s);
        }
        g.normalize();
        g.exactness = g.exactness.join(self.exactness).join(other.exactness);
        Ok(g)
    }

    /// `k` times the group: the spectrum of `T^k`.
    pub fn scaled(&self, k: i64) -> Self {
        let ka = k.unsigned_abs();
        if ka == 0 {
            return Self::trivial();
        }
        let mut g = Self { den: self.den / self.den.gcd(&ka), irrational: Vec::new(), exactness: Exactness::Exact };
        for s in &self.irrational {
            g.push_generator(s.mul_int(k as i128));
        }
        g.normalize();
        g.exactness = g.exactness.join(self.exactness);
        g
    }
}

fn checked_lcm(a: u64, b: u64) -> Result<u64, SpectralError> {
    (a / a.gcd(&b)).checked_mul(b).ok_or_else(|| SpectralError::Overflow(format!("lcm({a}, {b})")))
}

impl fmt::Display for EigenGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<1/{}", self.den)?;
        for s in &self.irrational {
            write!(f, ", {s}")?;
        }
        write!(f, ">")
    }
}

/// Eigenvalue group of a concrete system.
pub fn eigen_group(sys: &SystemSpec) -> Result<EigenGroup, SpectralError> {
    match sys {
        SystemSpec::Cyclic(k) => Ok(EigenGroup::cyclic(*k)),
        SystemSpec::TorusRot(alpha) => Ok(EigenGroup::generated_by(alpha)),
        // the first-coordinate rotation is the maximal equicontinuous factor
        SystemSpec::Skew2(a) | SystemSpec::SkewS(a) => Ok(EigenGroup::generated_by(&[*a])),
        // weakly mixing
        SystemSpec::Chacon(_) => Ok(EigenGroup::trivial()),
        SystemSpec::Product(a, b) => eigen_group(a)?.join(&eigen_group(b)?),
        SystemSpec::Power(a, k) => Ok(eigen_group(a)?.scaled(*k)),
        SystemSpec::Diagonal(..) => Err(SpectralError::Unsupported(sys.constructor().into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Shared {
    Yes { witness: Scalar },
    No,
    /// No relation with multipliers up to `bound` was found.
    Unknown { bound: u64 },
}

/// Whether two eigenvalue groups meet outside `0`.
pub fn shares_nontrivial_eigenvalue(g1: &EigenGroup, g2: &EigenGroup) -> Shared {
    let g = g1.den.gcd(&g2.den);
    if g > 1 {
        return Shared::Yes { witness: Scalar::Rational(Rational::new(1, g as i128).expect("positive")) };
    }
    // a * x == b * y as fixed values; ranking by the multipliers, then the
    // value, keeps the answer independent of argument order
    let mut best: Option<((u64, u64, u128), Scalar)> = None;
    for x in &g1.irrational {
        for y in &g2.irrational {
            for a in 1..=RELATION_BOUND {
                let ax = x.mul_int(a as i128).fixed_bits();
                for b in 1..=RELATION_BOUND {
                    if ax != 0 && ax == y.mul_int(b as i128).fixed_bits() {
                        let key = (a.max(b), a.min(b), ax);
                        if best.is_none_or(|(k, _)| key < k) {
                            best = Some((key, Scalar::fixed(ax)));
                        }
                    }
                }
            }
        }
    }
    if let Some((_, witness)) = best {
        return Shared::Yes { witness };
    }
    let single_tagged = |h: &EigenGroup| h.irrational.len() == 1 && h.irrational[0].is_tagged_irrational();
    match (g1.irrational.is_empty(), g2.irrational.is_empty()) {
        (true, true) => Shared::No,
        // the rational elements of <1/L, gamma> are <1/L> when gamma is irrational
        (true, false) if single_tagged(g2) => Shared::No,
        (false, true) if single_tagged(g1) => Shared::No,
        _ => Shared::Unknown { bound: RELATION_BOUND },
    }
}

/// `{theta : k theta in g}`.
pub fn spectrum_div_k(g: &EigenGroup, k: u64) -> Result<EigenGroup, SpectralError> {
    if k == 0 {
        return Err(SpectralError::ZeroDivisor);
    }
    let den = g.den.checked_mul(k).ok_or_else(|| SpectralError::Overflow(format!("{} * {k}", g.den)))?;
    let mut out = EigenGroup { den, irrational: Vec::new(), exactness: Exactness::Exact };
    for s in &g.irrational {
        out.push_generator(s.div_int(k).expect("fixed division"));
    }
    out.normalize();
    out.exactness = out.exactness.join(g.exactness);
    Ok(out)
}
