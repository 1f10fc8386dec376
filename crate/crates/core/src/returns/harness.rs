//! Cross-checks between return sets computed two different ways.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{return_set, Mode, ReturnError, ReturnQuery};
use crate::polys::PolyTuple;
use crate::systems::{preimage_region, Region, SystemSpec};

/// Both sides of the translation identity `R_q(T^{-p(a)} U) = R_p(U) - a`
/// with `q_i(n) = p_i(n + a) - p_i(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma31Report {
    pub a: i64,
    /// The window on which both sides are compared.
    pub window: (i64, i64),
    pub left_count: u64,
    pub right_count: u64,
    /// Up to 16 values of `n` where the sides differ.
    pub mismatches: Vec<i64>,
    pub mismatch_count: u64,
    pub ambiguity_count: u64,
}

impl Lemma31Report {
    pub fn holds(&self) -> bool {
        self.mismatch_count == 0 && self.ambiguity_count == 0
    }
}

pub fn lemma31_harness(
    sys: &SystemSpec,
    regions: &[Region],
    tuple: &PolyTuple,
    a: i64,
    lo: i64,
    hi: i64,
) -> Result<Lemma31Report, ReturnError> {
    let a_big = BigInt::from(a);
    let right = return_set(&ReturnQuery {
        sys: sys.clone(),
        regions: regions.to_vec(),
        tuple: tuple.clone(),
        lo,
        hi,
        mode: Mode::Exact,
    })?;
    let shifted = regions
        .iter()
        .zip(tuple.entries())
        .map(|(r, p)| {
            let s = p.eval(&a_big).to_i128().ok_or_else(|| ReturnError::Unsupported(format!("p({a}) overflows i128")))?;
            Ok(preimage_region(sys, r, s)?)
        })
        .collect::<Result<Vec<_>, ReturnError>>()?;
    let left = return_set(&ReturnQuery {
        sys: sys.clone(),
        regions: shifted,
        tuple: tuple.shift_root(&a_big),
        lo: lo - a,
        hi: hi - a,
        mode: Mode::Exact,
    })?;
    let ambiguity_count = left.ambiguity_count + right.ambiguity_count;
    let right = right.set.translate(-a);
    let diff_a = left.set.difference(&right)?;
    let diff_b = right.difference(&left.set)?;
    let both = diff_a.union(&diff_b)?;
    Ok(Lemma31Report {
        a,
        window: (both.lo(), both.hi()),
        left_count: left.set.count(),
        right_count: right.count(),
        mismatches: both.iter().take(16).collect(),
        mismatch_count: both.count(),
        ambiguity_count,
    })
}

/// Upstairs sample-mode return set against the exact return set of the
/// projected arcs on the first-coordinate rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorReport {
    pub window: (i64, i64),
    pub upstairs_count: u64,
    pub downstairs_count: u64,
    /// Members upstairs that are missing downstairs (must be none).
    pub violations: Vec<i64>,
    pub violation_count: u64,
    pub ambiguity_count: u64,
}

impl FactorReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }
}

fn project(r: &Region) -> Result<Region, ReturnError> {
    match r {
        Region::Full => Ok(Region::Full),
        Region::Box(arcs) if arcs.len() == 2 => Ok(Region::Box(vec![arcs[0]])),
        Region::Union(parts) => parts.iter().map(project).collect::<Result<_, _>>().map(Region::Union),
        other => Err(ReturnError::Unsupported(format!("cannot project region {other} to the first coordinate"))),
    }
}

pub fn factor_containment_harness(
    skew: &SystemSpec,
    boxes: &[Region],
    tuple: &PolyTuple,
    lo: i64,
    hi: i64,
    resolution: u32,
) -> Result<FactorReport, ReturnError> {
    let SystemSpec::Skew2(alpha) = skew else {
        return Err(ReturnError::Unsupported(format!("factor harness needs a skew2 system, got {skew}")));
    };
    let up = return_set(&ReturnQuery {
        sys: skew.clone(),
        regions: boxes.to_vec(),
        tuple: tuple.clone(),
        lo,
        hi,
        mode: Mode::Sample(resolution),
    })?;
    let down_regions = boxes.iter().map(project).collect::<Result<Vec<_>, _>>()?;
    // the projection of an open box is an open arc, equal to its interior
    let down = return_set(&ReturnQuery {
        sys: SystemSpec::TorusRot(vec![*alpha]),
        regions: down_regions,
        tuple: tuple.clone(),
        lo,
        hi,
        mode: Mode::Exact,
    })?;
    let bad = up.set.difference(&down.set)?;
    Ok(FactorReport {
        window: (lo, hi),
        upstairs_count: up.set.count(),
        downstairs_count: down.set.count(),
        violations: bad.iter().take(16).collect(),
        violation_count: bad.count(),
        ambiguity_count: up.ambiguity_count + down.ambiguity_count,
    })
}
