//! Finite-window subsets of the integers.
//!
//! A [`WindowSet`] is a subset of `[lo, hi]` stored as a packed bit vector.
//! Every notion of largeness that is really about all of `Z` (syndetic,
//! thick, piecewise syndetic, upper Banach density) is reported here as a
//! profile over the window, with the distances to the window edges kept
//! separate so truncation at the boundary never inflates a gap.

mod family;
mod generators;

pub use family::{family_membership_witness, lemma21_check, FamilySpec, Lemma21Report, Lemma21Status};
pub use generators::{gen_beatty, gen_example121, gen_nu2_even, gen_poly_small};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const WORD: i64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("empty window [{lo}, {hi}]")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("element {value} outside window [{lo}, {hi}]")]
    OutOfWindow { value: i64, lo: i64, hi: i64 },
    #[error("windows [{0}, {1}] and [{2}, {3}] do not overlap")]
    Disjoint(i64, i64, i64, i64),
    #[error("parameter {name} = {value} out of range: {reason}")]
    BadParameter { name: &'static str, value: String, reason: &'static str },
    #[error("family has no generators")]
    EmptyFamily,
    #[error("family generator {0} is empty on its window")]
    EmptyGenerator(usize),
}

/// A subset of the integer window `[lo, hi]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WindowSet {
    lo: i64,
    hi: i64,
    bits: Vec<u64>,
}

impl std::fmt::Debug for WindowSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let count = self.count();
        write!(f, "WindowSet[{}, {}]", self.lo, self.hi)?;
        if count <= 32 {
            f.debug_set().entries(self.iter()).finish()
        } else {
            write!(f, "{{{count} elements}}")
        }
    }
}

fn words_for(len: u64) -> usize {
    len.div_ceil(64) as usize
}

impl WindowSet {
    /// Builds a set from an explicit element list.
    pub fn new(lo: i64, hi: i64, elements: &[i64]) -> Result<Self, WindowError> {
        let mut s = Self::empty(lo, hi)?;
        for &e in elements {
            if e < lo || e > hi {
                return Err(WindowError::OutOfWindow { value: e, lo, hi });
            }
            s.insert_unchecked(e);
        }
        Ok(s)
    }

    pub fn empty(lo: i64, hi: i64) -> Result<Self, WindowError> {
        if lo > hi {
            return Err(WindowError::EmptyWindow { lo, hi });
        }
        let len = (hi - lo) as u64 + 1;
        Ok(Self { lo, hi, bits: vec![0; words_for(len)] })
    }

    pub fn full(lo: i64, hi: i64) -> Result<Self, WindowError> {
        let mut s = Self::empty(lo, hi)?;
        s.bits.iter_mut().for_each(|w| *w = !0);
        s.clear_tail();
        Ok(s)
    }

    /// Evaluates `pred` at every integer of the window. Work is split on
    /// word boundaries, so the result does not depend on the thread count.
    pub fn from_predicate<F>(lo: i64, hi: i64, pred: F) -> Result<Self, WindowError>
    where
        F: Fn(i64) -> bool + Sync,
    {
        let mut s = Self::empty(lo, hi)?;
        let hi_ = hi;
        s.bits.par_iter_mut().enumerate().for_each(|(wi, word)| {
            let base = lo + wi as i64 * WORD;
            let mut w = 0u64;
            for b in 0..64 {
                let n = base + b;
                if n > hi_ {
                    break;
                }
                if pred(n) {
                    w |= 1 << b;
                }
            }
            *word = w;
        });
        Ok(s)
    }

    /// Fallible variant of [`from_predicate`](Self::from_predicate); the first
    /// error in window order is returned.
    pub fn try_from_predicate<F, E>(lo: i64, hi: i64, pred: F) -> Result<Result<Self, E>, WindowError>
    where
        F: Fn(i64) -> Result<bool, E> + Sync,
        E: Send,
    {
        let mut s = Self::empty(lo, hi)?;
        let res: Result<Vec<u64>, E> = (0..s.bits.len())
            .into_par_iter()
            .map(|wi| {
                let base = lo + wi as i64 * WORD;
                let mut w = 0u64;
                for b in 0..64 {
                    let n = base + b;
                    if n > hi {
                        break;
                    }
                    if pred(n)? {
                        w |= 1 << b;
                    }
                }
                Ok(w)
            })
            .collect();
        Ok(res.map(|bits| {
            s.bits = bits;
            s
        }))
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Number of integers in the window.
    pub fn window_len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn contains(&self, n: i64) -> bool {
        if n < self.lo || n > self.hi {
            return false;
        }
        let off = (n - self.lo) as u64;
        self.bits[(off / 64) as usize] >> (off % 64) & 1 == 1
    }

    fn insert_unchecked(&mut self, n: i64) {
        let off = (n - self.lo) as u64;
        self.bits[(off / 64) as usize] |= 1 << (off % 64);
    }

    fn clear_tail(&mut self) {
        let rem = self.window_len() % 64;
        if rem != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        let lo = self.lo;
        self.bits.iter().enumerate().flat_map(move |(wi, &w)| {
            let base = lo + wi as i64 * WORD;
            BitIter(w).map(move |b| base + b as i64)
        })
    }

    pub fn elements(&self) -> Vec<i64> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<i64> {
        self.iter().next()
    }

    pub fn last(&self) -> Option<i64> {
        self.bits
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| self.lo + wi as i64 * WORD + (63 - w.leading_zeros()) as i64)
    }

    /// 64 bits of membership starting at `start`; positions outside the
    /// window read as zero.
    fn word_at(&self, start: i64) -> u64 {
        let off = start - self.lo;
        if off >= self.window_len() as i64 || off <= -WORD {
            return 0;
        }
        if off < 0 {
            return self.bits[0] << (-off) as u32;
        }
        let wi = (off / WORD) as usize;
        let sh = (off % WORD) as u32;
        let low = self.bits[wi] >> sh;
        if sh == 0 {
            low
        } else {
            let high = self.bits.get(wi + 1).copied().unwrap_or(0);
            low | high << (64 - sh)
        }
    }

    /// Membership bits over `[lo, hi]`, word-aligned at `lo`.
    fn extract(&self, lo: i64, hi: i64) -> Vec<u64> {
        let len = (hi - lo) as u64 + 1;
        let mut out: Vec<u64> = (0..words_for(len)).map(|i| self.word_at(lo + i as i64 * WORD)).collect();
        let rem = len % 64;
        if rem != 0 {
            if let Some(last) = out.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
        out
    }

    /// Restriction to a subwindow (intersection of windows).
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self, WindowError> {
        let nlo = lo.max(self.lo);
        let nhi = hi.min(self.hi);
        if nlo > nhi {
            return Err(WindowError::Disjoint(self.lo, self.hi, lo, hi));
        }
        Ok(Self { lo: nlo, hi: nhi, bits: self.extract(nlo, nhi) })
    }

    /// `s + t`: the window moves with the set.
    pub fn translate(&self, t: i64) -> Self {
        Self { lo: self.lo + t, hi: self.hi + t, bits: self.bits.clone() }
    }

    fn overlap(&self, other: &Self) -> Result<(i64, i64), WindowError> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Err(WindowError::Disjoint(self.lo, self.hi, other.lo, other.hi))
        } else {
            Ok((lo, hi))
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self, WindowError> {
        let (lo, hi) = self.overlap(other)?;
        let a = self.extract(lo, hi);
        let b = other.extract(lo, hi);
        let bits = a.iter().zip(&b).map(|(&x, &y)| f(x, y)).collect();
        let mut s = Self { lo, hi, bits };
        s.clear_tail();
        Ok(s)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, WindowError> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Result<Self, WindowError> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self, WindowError> {
        self.zip_with(other, |a, b| a & !b)
    }

    /// Complement within the set's own window.
    pub fn complement(&self) -> Self {
        let mut s = Self { lo: self.lo, hi: self.hi, bits: self.bits.iter().map(|w| !w).collect() };
        s.clear_tail();
        s
    }

    /// True iff every member of `self` inside the common window is in `other`.
    pub fn is_subset_on_overlap(&self, other: &Self) -> Result<bool, WindowError> {
        Ok(self.difference(other)?.is_empty())
    }

    /// The members of the residue class `k Z + j` in `[lo, hi]`.
    pub fn progression(lo: i64, hi: i64, k: i64, j: i64) -> Result<Self, WindowError> {
        if k == 0 {
            return Err(WindowError::BadParameter { name: "k", value: "0".into(), reason: "step must be nonzero" });
        }
        let k = k.abs();
        Self::from_predicate(lo, hi, |n| (n - j).rem_euclid(k) == 0)
    }

    pub fn gap_profile(&self) -> GapProfile {
        let mut count = 0u64;
        let mut prev: Option<i64> = None;
        let mut first = None;
        let mut max_gap = 0u64;
        for n in self.iter() {
            if let Some(p) = prev {
                max_gap = max_gap.max((n - p) as u64);
            } else {
                first = Some(n);
            }
            prev = Some(n);
            count += 1;
        }
        match (first, prev) {
            (Some(f), Some(l)) => GapProfile {
                max_internal_gap: max_gap,
                first_element_offset: (f - self.lo) as u64,
                last_element_offset: (self.hi - l) as u64,
                element_count: count,
                gap_undefined: false,
            },
            _ => GapProfile {
                max_internal_gap: 0,
                first_element_offset: self.window_len(),
                last_element_offset: self.window_len(),
                element_count: 0,
                gap_undefined: true,
            },
        }
    }

    /// Longest run of consecutive integers of `[lo, hi - n]` covered by
    /// `s ∪ (s - 1) ∪ ... ∪ (s - n)`.
    ///
    /// `m` is covered iff some member lies in `[m, m + n]`, so the covered
    /// set is the union of the intervals `[a - n, a]` over members `a`.
    pub fn pws_profile(&self, n: u64) -> Result<PwsProfile, WindowError> {
        if n >= self.window_len() {
            return Err(WindowError::BadParameter {
                name: "N",
                value: n.to_string(),
                reason: "translate count must be smaller than the window length",
            });
        }
        let n = n as i64;
        let eval_hi = self.hi - n;
        let mut best = 0u64;
        let mut best_at = self.lo;
        let mut run: Option<(i64, i64)> = None;
        let close = |r: (i64, i64), best: &mut u64, best_at: &mut i64| {
            let len = (r.1 - r.0 + 1) as u64;
            if len > *best {
                *best = len;
                *best_at = r.0;
            }
        };
        for a in self.iter() {
            let start = (a - n).max(self.lo);
            let end = a.min(eval_hi);
            if start > end {
                continue;
            }
            run = match run {
                Some((s, e)) if start <= e + 1 => Some((s, e.max(end))),
                Some(r) => {
                    close(r, &mut best, &mut best_at);
                    Some((start, end))
                }
                None => Some((start, end)),
            };
        }
        if let Some(r) = run {
            close(r, &mut best, &mut best_at);
        }
        Ok(PwsProfile { translate_count: n as u64, longest_covered_run: best, run_location: best_at })
    }

    /// Maximum density of the set over all blocks of `len` consecutive
    /// integers inside the window.
    pub fn banach_density_estimate(&self, len: u64) -> Result<Ratio<u64>, WindowError> {
        if len == 0 || len > self.window_len() {
            return Err(WindowError::BadParameter {
                name: "L",
                value: len.to_string(),
                reason: "block length must be in [1, window length]",
            });
        }
        let wl = self.window_len();
        let bit = |off: u64| self.bits[(off / 64) as usize] >> (off % 64) & 1;
        let mut cur: u64 = (0..len).map(bit).sum();
        let mut best = cur;
        for start in 1..=(wl - len) {
            cur = cur + bit(start + len - 1) - bit(start - 1);
            best = best.max(cur);
        }
        Ok(Ratio::new(best, len))
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Gap statistics of a windowed set. Offsets are measured from the window
/// edges and never enter `max_internal_gap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapProfile {
    pub max_internal_gap: u64,
    pub first_element_offset: u64,
    pub last_element_offset: u64,
    pub element_count: u64,
    /// Set iff the set is empty; the other fields are then meaningless.
    pub gap_undefined: bool,
}

impl GapProfile {
    /// Smallest `N` with `A ∪ (A-1) ∪ ... ∪ (A-N)` covering the window
    /// between the first and last member.
    pub fn syndeticity_bound(&self) -> Option<u64> {
        (!self.gap_undefined).then(|| self.max_internal_gap.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwsProfile {
    pub translate_count: u64,
    pub longest_covered_run: u64,
    pub run_location: i64,
}
