//! Upward-closed families of sets and the difference criterion.
//!
//! If `F` is upward closed with syndetic finite intersections and
//! `B ⊆ A ⊆ B - F`, then `A \ B` is not piecewise syndetic. On a window we
//! can only collect evidence: check the hypotheses pointwise and watch the
//! covered-run profile of `A \ B` stay bounded.

use serde::{Deserialize, Serialize};

use super::{GapProfile, PwsProfile, WindowError, WindowSet};

/// The upward closure of finitely many generator sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    generators: Vec<WindowSet>,
}

impl FamilySpec {
    pub fn new(generators: Vec<WindowSet>) -> Result<Self, WindowError> {
        if generators.is_empty() {
            return Err(WindowError::EmptyFamily);
        }
        if let Some(i) = generators.iter().position(WindowSet::is_empty) {
            return Err(WindowError::EmptyGenerator(i));
        }
        Ok(Self { generators })
    }

    pub fn generators(&self) -> &[WindowSet] {
        &self.generators
    }
}

/// Index of a generator `g` with `B - a ⊇ g` on their common window, so
/// that `B - a` lies in the family. Generators whose window misses that of
/// `B - a`, or that have no members there, are skipped.
pub fn family_membership_witness(a: i64, b: &WindowSet, fam: &FamilySpec) -> Result<Option<usize>, WindowError> {
    let shifted = b.translate(-a);
    let mut any_overlap = false;
    for (i, g) in fam.generators.iter().enumerate() {
        let Ok(part) = g.restrict(shifted.lo(), shifted.hi()) else { continue };
        any_overlap = true;
        if !part.is_empty() && part.is_subset_on_overlap(&shifted)? {
            return Ok(Some(i));
        }
    }
    if !any_overlap {
        let g = &fam.generators[0];
        return Err(WindowError::Disjoint(shifted.lo(), shifted.hi(), g.lo(), g.hi()));
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Lemma21Status {
    /// Every hypothesis holds on the window.
    Ok,
    /// The first hypothesis that fails, with the offending element if any.
    Violated { reason: String, element: Option<i64> },
}

/// Windowed evidence for the difference criterion; never a proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma21Report {
    pub window: (i64, i64),
    pub status: Lemma21Status,
    /// Gap profile of `g_i ∩ g_j` for every `i <= j`.
    pub intersection_gaps: Vec<(usize, usize, GapProfile)>,
    pub difference_count: u64,
    pub runs: Vec<PwsProfile>,
}

pub fn lemma21_check(
    a: &WindowSet,
    b: &WindowSet,
    fam: &FamilySpec,
    n_list: &[u64],
) -> Result<Lemma21Report, WindowError> {
    let a = a.restrict(b.lo(), b.hi())?;
    let b = b.restrict(a.lo(), a.hi())?;
    let violated = |reason: &str, element| Lemma21Status::Violated { reason: reason.into(), element };

    let mut status = Lemma21Status::Ok;
    if let Some(x) = b.difference(&a)?.first() {
        status = violated("B is not contained in A", Some(x));
    }

    let mut intersection_gaps = Vec::new();
    let gens = fam.generators();
    for i in 0..gens.len() {
        for j in i..gens.len() {
            let gp = gens[i].intersect(&gens[j]).map(|s| s.gap_profile());
            let gp = match gp {
                Ok(gp) => gp,
                Err(_) => GapProfile {
                    max_internal_gap: 0,
                    first_element_offset: 0,
                    last_element_offset: 0,
                    element_count: 0,
                    gap_undefined: true,
                },
            };
            if gp.gap_undefined && status == Lemma21Status::Ok {
                status = violated(&format!("generators {i} and {j} have empty intersection"), None);
            }
            intersection_gaps.push((i, j, gp));
        }
    }

    if status == Lemma21Status::Ok {
        for x in a.iter() {
            if family_membership_witness(x, &b, fam)?.is_none() {
                status = violated("no generator witnesses B - a in the family", Some(x));
                break;
            }
        }
    }

    let diff = a.difference(&b)?;
    let runs = n_list.iter().map(|&n| diff.pws_profile(n)).collect::<Result<_, _>>()?;
    Ok(Lemma21Report { window: (a.lo(), a.hi()), status, intersection_gaps, difference_count: diff.count(), runs })
}
