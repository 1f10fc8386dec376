//! Visit sets `{n : S^n y ∈ V}` and polynomial return sets
//! `{n : T^{-p_1(n)} U_1 ∩ ... ∩ T^{-p_d(n)} U_d ≠ ∅}` on integer windows.
//!
//! Rotations are handled exactly: each preimage is a translated box, and
//! nonemptiness of an intersection of boxes is decided arc by arc. Other
//! systems are sampled on a grid of starting points, which only ever
//! finds genuine witnesses, so the result is a subset of the true set.

mod harness;
mod sample;

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polys::{IntPoly, ModPoly, Modulus, PolyError, PolyTuple};
use crate::systems::flat::{Compiled, FlatRegion, SlotCons, SlotStep, Steps};
use crate::systems::{common_ring, Point, Region, Scalar, SystemError, SystemSpec};
use crate::windows::{WindowError, WindowSet};

pub use harness::{factor_containment_harness, lemma31_harness, FactorReport, Lemma31Report};

/// Default number of grid points per circle coordinate in sample mode.
pub const DEFAULT_RESOLUTION: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReturnError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{0} regions for a tuple of {1} polynomials")]
    Arity(usize, usize),
    #[error("exact mode needs a rotation-type system, got {0}")]
    NotRotation(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    /// Grid points per circle coordinate.
    Sample(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Soundness {
    ExactSet,
    /// A subset of the true set.
    InnerApprox,
}

#[derive(Debug, Clone)]
pub struct ReturnQuery {
    pub sys: SystemSpec,
    pub regions: Vec<Region>,
    pub tuple: PolyTuple,
    pub lo: i64,
    pub hi: i64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnResult {
    pub set: WindowSet,
    pub soundness: Soundness,
    /// Number of `n` whose verdict rests on a comparison within the
    /// fixed-point guard margin.
    pub ambiguity_count: u64,
}

/// `p(n)` as an iterate count.
pub(crate) fn steps_at(p: &IntPoly, n: i64) -> Steps {
    match p.eval_i128(n as i128) {
        Some(v) => Steps::Small(v),
        None => Steps::from_big(&p.eval_i64(n)),
    }
}

fn ring_for<'a>(sys: &SystemSpec, extra: impl IntoIterator<Item = &'a Scalar>) -> Modulus {
    let mut all = sys.scalars();
    all.extend(extra.into_iter().copied());
    common_ring(all.iter(), &[])
}

/// `{n in [lo, hi] : S^n y ∈ V}`.
pub fn visit_set(sys: &SystemSpec, y: &Point, v: &Region, lo: i64, hi: i64) -> Result<ReturnResult, ReturnError> {
    let ys = y.scalars();
    let vs = v.scalars();
    let ring = ring_for(sys, ys.iter().chain(vs.iter()));
    let c = Compiled::new(sys, ring)?;
    let region = c.compile_region(v)?;
    let start = c.flatten_point(y)?;
    let ambiguous = AtomicU64::new(0);
    let set = WindowSet::try_from_predicate(lo, hi, |n| -> Result<bool, SystemError> {
        let mut st = start.clone();
        c.apply(&mut st, &Steps::Small(n as i128))?;
        let r = region.contains(&st)?;
        if r.ambiguous {
            ambiguous.fetch_add(1, Ordering::Relaxed);
        }
        Ok(r.inside)
    })??;
    Ok(ReturnResult { set, soundness: Soundness::ExactSet, ambiguity_count: ambiguous.into_inner() })
}

pub fn return_set(q: &ReturnQuery) -> Result<ReturnResult, ReturnError> {
    if q.regions.len() != q.tuple.len() {
        return Err(ReturnError::Arity(q.regions.len(), q.tuple.len()));
    }
    match q.mode {
        Mode::Exact => exact(q),
        Mode::Sample(res) => sample::sample(q, res),
    }
}

/// Return set along `(0, p, 2p, ..., d p)` with every region equal to `u`.
pub fn return_set_diag(
    sys: &SystemSpec,
    u: &Region,
    d: usize,
    p: &IntPoly,
    lo: i64,
    hi: i64,
    mode: Mode,
) -> Result<ReturnResult, ReturnError> {
    if d == 0 {
        return Err(ReturnError::Unsupported("d must be positive".into()));
    }
    let q = ReturnQuery {
        sys: sys.clone(),
        regions: vec![u.clone(); d + 1],
        tuple: PolyTuple::diagonal(p, d),
        lo,
        hi,
        mode,
    };
    return_set(&q)
}

/// Box combinations (one box per region) beyond which exact mode gives up.
const MAX_COMBOS: usize = 1 << 12;

fn exact(q: &ReturnQuery) -> Result<ReturnResult, ReturnError> {
    if !q.sys.is_rotation_type() {
        return Err(ReturnError::NotRotation(q.sys.to_string()));
    }
    let rs: Vec<Scalar> = q.regions.iter().flat_map(Region::scalars).collect();
    let ring = ring_for(&q.sys, rs.iter());
    let c = Compiled::new(&q.sys, ring)?;
    let steps = c.rotation_vector().ok_or_else(|| ReturnError::NotRotation(q.sys.to_string()))?;
    let regions = q.regions.iter().map(|r| c.compile_region(r)).collect::<Result<Vec<FlatRegion>, _>>()?;

    let combos: usize = regions.iter().map(|r| r.boxes.len()).product();
    if combos > MAX_COMBOS {
        return Err(ReturnError::Unsupported(format!("{combos} box combinations exceed {MAX_COMBOS}")));
    }
    let mut choices: Vec<Vec<&[SlotCons]>> = vec![Vec::new()];
    for r in &regions {
        choices = choices
            .iter()
            .flat_map(|pre| {
                r.boxes.iter().map(move |b| {
                    let mut v = pre.clone();
                    v.push(b.as_slice());
                    v
                })
            })
            .collect();
    }

    let mut cyclic_k: Vec<u64> =
        steps.iter().filter_map(|s| if let SlotStep::Cyclic { k, .. } = s { Some(*k) } else { None }).collect();
    cyclic_k.sort_unstable();
    cyclic_k.dedup();
    let polys: Vec<(ModPoly, Vec<ModPoly>)> = q
        .tuple
        .entries()
        .iter()
        .map(|p| (p.reduce(ring), cyclic_k.iter().map(|&k| p.reduce(Modulus::Small(k))).collect()))
        .collect();

    let ambiguous = AtomicU64::new(0);
    let set = WindowSet::from_predicate(q.lo, q.hi, |n| {
        let shifts: Vec<Vec<u128>> = polys
            .iter()
            .map(|(pr, pk)| {
                let t = pr.eval(n);
                let tk: Vec<u64> = pk.iter().map(|p| p.eval(n) as u64).collect();
                steps
                    .iter()
                    .map(|s| {
                        let t_k = match s {
                            SlotStep::Cyclic { k, .. } => tk[cyclic_k.binary_search(k).expect("collected")],
                            SlotStep::Circle(_) => 0,
                        };
                        s.times(t, t_k, ring)
                    })
                    .collect()
            })
            .collect();
        let mut nominal = false;
        let mut flagged = false;
        for combo in &choices {
            let r = FlatRegion::boxes_intersect(combo, &shifts, &c.slots, ring);
            if r.definitely_inside() {
                return true;
            }
            nominal |= r.inside;
            flagged |= r.ambiguous;
        }
        if flagged {
            ambiguous.fetch_add(1, Ordering::Relaxed);
        }
        nominal
    })?;
    Ok(ReturnResult { set, soundness: Soundness::ExactSet, ambiguity_count: ambiguous.into_inner() })
}

/// Largest `|p_i(n)|` over the window.
pub(crate) fn max_abs_value(tuple: &PolyTuple, lo: i64, hi: i64) -> BigInt {
    let mut best = BigInt::from(0);
    for p in tuple.entries() {
        for n in lo..=hi {
            let v = match p.eval_i128(n as i128) {
                Some(v) => BigInt::from(v.unsigned_abs()),
                None => {
                    let v = p.eval_i64(n);
                    if v < BigInt::from(0) {
                        -v
                    } else {
                        v
                    }
                }
            };
            if v > best {
                best = v;
            }
        }
    }
    best
}
