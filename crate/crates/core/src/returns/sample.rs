//! Grid sampling of starting points for systems without an exact test.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use super::{max_abs_value, ring_for, steps_at, ReturnError, ReturnQuery, ReturnResult, Soundness};
use crate::polys::Modulus;
use crate::systems::flat::{Compiled, FlatRegion, SlotCons, SlotKind};
use crate::systems::{Scalar, SystemError, SystemSpec};
use crate::windows::WindowSet;

/// Largest number of grid points enumerated before filtering.
pub const MAX_GRID: u64 = 1 << 24;

/// `floor(j M / r)` in the circle ring.
fn grid_value(j: u32, r: u32, m: Modulus) -> u128 {
    match m {
        Modulus::Pow128 => ((BigUint::from(j) << 128u32) / r).to_u128().expect("j < r"),
        Modulus::Small(d) => j as u128 * d as u128 / r as u128,
    }
}

fn has_chacon(sys: &SystemSpec) -> bool {
    match sys {
        SystemSpec::Chacon(_) => true,
        SystemSpec::Product(a, b) => has_chacon(a) || has_chacon(b),
        SystemSpec::Power(a, _) | SystemSpec::Diagonal(a, _) => has_chacon(a),
        _ => false,
    }
}

fn word_len(sys: &SystemSpec) -> Option<u64> {
    match sys {
        SystemSpec::Chacon(w) => Some(w.len()),
        SystemSpec::Product(a, b) => match (word_len(a), word_len(b)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        SystemSpec::Power(a, _) | SystemSpec::Diagonal(a, _) => word_len(a),
        _ => None,
    }
}

/// Witness check failed because the orbit left the finite reference word;
/// such a grid point is simply not usable for this `n`.
fn off_word(e: &SystemError) -> bool {
    matches!(e, SystemError::ChaconRange { .. })
}

/// Starting points: the grid, cut down by every region whose polynomial
/// vanishes identically (those need `x ∈ U_i` itself).
fn candidates(c: &Compiled, regions: &[FlatRegion], fixed: &[usize], res: u32) -> Result<Vec<Vec<u128>>, ReturnError> {
    let m = c.modulus;
    // slot constraints that apply on their own: single-box fixed regions
    let single: Vec<&[SlotCons]> =
        fixed.iter().filter(|&&i| regions[i].boxes.len() == 1).map(|&i| regions[i].boxes[0].as_slice()).collect();
    let mut per_slot: Vec<Vec<u128>> = Vec::with_capacity(c.width());
    for (s, kind) in c.slots.iter().enumerate() {
        let raw: Box<dyn Iterator<Item = u128>> = match kind {
            SlotKind::Circle => Box::new((0..res).map(move |j| grid_value(j, res, m))),
            SlotKind::Cyclic(k) => Box::new(0..*k as u128),
            SlotKind::Word => {
                let len = word_len(&c.sys).expect("word slot");
                Box::new(0..len as u128)
            }
        };
        let mut vals = Vec::new();
        for v in raw {
            let mut keep = true;
            for b in &single {
                match b[s].contains_value(v, m) {
                    Ok(r) => keep &= r.definitely_inside(),
                    Err(e) if off_word(&e) => keep = false,
                    Err(e) => return Err(e.into()),
                }
                if !keep {
                    break;
                }
            }
            if keep {
                vals.push(v);
            }
        }
        per_slot.push(vals);
    }
    let total = per_slot.iter().try_fold(1u64, |acc, v| acc.checked_mul(v.len() as u64));
    match total {
        Some(t) if t <= MAX_GRID => {}
        _ => {
            return Err(ReturnError::Unsupported(format!(
                "sample grid of {} points exceeds {MAX_GRID}; lower the resolution",
                total.map_or("more than 2^64".to_string(), |t| t.to_string())
            )))
        }
    }
    let mut out: Vec<Vec<u128>> = vec![Vec::new()];
    for vals in &per_slot {
        out = out
            .iter()
            .flat_map(|pre| {
                vals.iter().map(move |&v| {
                    let mut p = pre.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    let mut kept = Vec::with_capacity(out.len());
    'points: for p in out {
        for &i in fixed {
            match regions[i].contains(&p) {
                Ok(r) if r.definitely_inside() => {}
                Ok(_) => continue 'points,
                Err(e) if off_word(&e) => continue 'points,
                Err(e) => return Err(e.into()),
            }
        }
        kept.push(p);
    }
    Ok(kept)
}

pub(super) fn sample(q: &ReturnQuery, res: u32) -> Result<ReturnResult, ReturnError> {
    if res == 0 {
        return Err(ReturnError::Unsupported("grid resolution must be positive".into()));
    }
    let rs: Vec<Scalar> = q.regions.iter().flat_map(|r| r.scalars()).collect();
    let ring = ring_for(&q.sys, rs.iter());
    let c = Compiled::new(&q.sys, ring)?;
    let regions = q.regions.iter().map(|r| c.compile_region(r)).collect::<Result<Vec<_>, _>>()?;
    let entries = q.tuple.entries();
    let (fixed, moving): (Vec<usize>, Vec<usize>) = (0..entries.len()).partition(|&i| entries[i].is_zero());

    if has_chacon(&q.sys) {
        let len = word_len(&q.sys).expect("chacon present");
        if max_abs_value(&q.tuple, q.lo, q.hi) >= BigInt::from(len / 2) {
            return Err(SystemError::ChaconRange { index: format!("p(n) for n in [{}, {}]", q.lo, q.hi), len }.into());
        }
    }

    let points = candidates(&c, &regions, &fixed, res)?;
    let ambiguous = AtomicU64::new(0);
    let set = WindowSet::try_from_predicate(q.lo, q.hi, |n| -> Result<bool, ReturnError> {
        let steps: Vec<_> = moving.iter().map(|&i| steps_at(&entries[i], n)).collect();
        let mut st = vec![0u128; c.width()];
        let mut flagged = false;
        'points: for p in &points {
            for (k, &i) in moving.iter().enumerate() {
                st.copy_from_slice(p);
                match c.apply(&mut st, &steps[k]).and_then(|_| regions[i].contains(&st)) {
                    Ok(r) if r.definitely_inside() => {}
                    Ok(r) => {
                        flagged |= r.ambiguous;
                        continue 'points;
                    }
                    Err(e) if off_word(&e) => continue 'points,
                    Err(e) => return Err(e.into()),
                }
            }
            return Ok(true);
        }
        if flagged {
            ambiguous.fetch_add(1, Ordering::Relaxed);
        }
        Ok(false)
    })??;
    Ok(ReturnResult { set, soundness: Soundness::InnerApprox, ambiguity_count: ambiguous.into_inner() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_are_floors() {
        assert_eq!(grid_value(1, 4, Modulus::Pow128), 1 << 126);
        assert_eq!(grid_value(3, 64, Modulus::Small(10)), 0);
        assert_eq!(grid_value(32, 64, Modulus::Small(10)), 5);
    }
}
