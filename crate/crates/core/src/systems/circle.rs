//! Open arcs of the circle in residue coordinates.
//!
//! A circle point is a residue modulo `M` (`M = 2^128` for fixed point, or
//! the common denominator of a rational computation). An arc is stored as
//! its start and its length, both residues, with `0 < len < M`.

use crate::polys::Modulus;

/// Comparisons closer than `2^-100` of a turn are ambiguous in fixed point.
pub const GUARD_POW128: u128 = 1 << 28;

pub fn guard(m: Modulus) -> u128 {
    match m {
        Modulus::Pow128 => GUARD_POW128,
        Modulus::Small(_) => 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResArc {
    Full,
    Open { start: u128, len: u128 },
}

/// Result of a membership or nonemptiness decision, with a flag raised
/// when fixed-point quantization could have flipped it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Containment {
    pub inside: bool,
    pub ambiguous: bool,
}

impl Containment {
    pub fn exact(inside: bool) -> Self {
        Self { inside, ambiguous: false }
    }

    /// Inside and not ambiguous.
    pub fn definitely_inside(&self) -> bool {
        self.inside && !self.ambiguous
    }
}

fn modulus_minus(m: Modulus, x: u128) -> Option<u128> {
    // M - x, or None when that is M itself (x = 0) and does not fit
    match m {
        Modulus::Pow128 => (x != 0).then(|| x.wrapping_neg()),
        Modulus::Small(d) => Some(d as u128 - x),
    }
}

impl ResArc {
    /// Arc from `a` counterclockwise to `b`; `None` when `a == b`.
    pub fn from_endpoints(a: u128, b: u128, m: Modulus) -> Option<Self> {
        let len = m.sub(b, a);
        (len != 0).then_some(ResArc::Open { start: a, len })
    }

    pub fn translate(&self, t: u128, m: Modulus) -> Self {
        match *self {
            ResArc::Full => ResArc::Full,
            ResArc::Open { start, len } => ResArc::Open { start: m.add(start, t), len },
        }
    }

    /// Offset of `x` from the start, in `[0, M)`.
    fn offset(&self, x: u128, m: Modulus) -> Option<(u128, u128)> {
        match *self {
            ResArc::Full => None,
            ResArc::Open { start, len } => Some((m.sub(x, start), len)),
        }
    }

    pub fn contains(&self, x: u128, m: Modulus) -> Containment {
        let Some((d, len)) = self.offset(x, m) else {
            return Containment::exact(true);
        };
        let inside = d != 0 && d < len;
        let g = guard(m);
        let ambiguous = g > 0 && (d <= g || modulus_minus(m, d).is_some_and(|r| r <= g) || d.abs_diff(len) <= g);
        Containment { inside, ambiguous }
    }

    /// The arc with `g` removed at both ends; `None` if nothing is left.
    fn shrink(&self, g: u128, m: Modulus) -> Option<Self> {
        match *self {
            ResArc::Full => Some(ResArc::Full),
            ResArc::Open { start, len } => {
                (len > 2 * g).then(|| ResArc::Open { start: m.add(start, g), len: len - 2 * g })
            }
        }
    }

    /// The arc with `g` added at both ends, saturating to the full circle.
    fn expand(&self, g: u128, m: Modulus) -> Self {
        match *self {
            ResArc::Full => ResArc::Full,
            ResArc::Open { start, len } => match modulus_minus(m, len) {
                Some(room) if room > 2 * g => ResArc::Open { start: m.sub(start, g), len: len + 2 * g },
                _ => ResArc::Full,
            },
        }
    }

    /// Intersection of two open arcs: at most two arcs.
    pub fn intersect(&self, other: &Self, m: Modulus) -> Vec<ResArc> {
        let (a, b) = match (*self, *other) {
            (ResArc::Full, x) | (x, ResArc::Full) => return vec![x],
            (a, b) => (a, b),
        };
        let (ResArc::Open { start: s1, len: l1 }, ResArc::Open { start: s2, len: l2 }) = (a, b) else {
            unreachable!()
        };
        // Work relative to s1: A = (0, l1), B = (t, t + l2).
        let t = m.sub(s2, s1);
        let mut out = Vec::with_capacity(2);
        let mut push = |x: u128, y: u128| {
            if x < y {
                out.push(ResArc::Open { start: m.add(x, s1), len: y - x });
            }
        };
        let wraps = match modulus_minus(m, t) {
            None => false,
            Some(room) => l2 > room,
        };
        if !wraps {
            push(t, t.checked_add(l2).map_or(l1, |e| e.min(l1)));
        } else {
            // (t, M) and (0, t + l2 - M)
            let tail = l2 - modulus_minus(m, t).expect("t > 0 when wrapping");
            push(t, l1);
            push(0, tail.min(l1));
        }
        out
    }
}

/// Intersects a family of arcs, keeping the partial intersection as a
/// list of disjoint arcs.
pub fn fold_intersection(arcs: &[ResArc], m: Modulus) -> Vec<ResArc> {
    let mut acc = vec![ResArc::Full];
    for arc in arcs {
        acc = acc.iter().flat_map(|piece| piece.intersect(arc, m)).collect();
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Nonemptiness of an intersection of arcs. In fixed point the nominal
/// answer is accompanied by the answers for arcs shrunk and grown by the
/// guard margin; disagreement marks the answer ambiguous.
pub fn intersection_nonempty(arcs: &[ResArc], m: Modulus) -> Containment {
    let nominal = !fold_intersection(arcs, m).is_empty();
    let g = guard(m);
    if g == 0 {
        return Containment::exact(nominal);
    }
    let inner: Option<Vec<ResArc>> = arcs.iter().map(|a| a.shrink(g, m)).collect();
    let inner_ok = inner.is_some_and(|v| !fold_intersection(&v, m).is_empty());
    let outer: Vec<ResArc> = arcs.iter().map(|a| a.expand(g, m)).collect();
    let outer_ok = !fold_intersection(&outer, m).is_empty();
    Containment { inside: nominal, ambiguous: inner_ok != outer_ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const M20: Modulus = Modulus::Small(20);

    fn arc(a: u128, b: u128) -> ResArc {
        ResArc::from_endpoints(a, b, M20).unwrap()
    }

    #[test]
    fn containment_and_wraparound() {
        // (0, 0.3) with M = 20: (0, 6)
        assert!(arc(0, 6).contains(5, M20).inside);
        assert!(!arc(0, 6).contains(6, M20).inside);
        assert!(!arc(0, 6).contains(0, M20).inside);
        // (0.9, 0.2) wraps: (18, 4)
        assert!(arc(18, 4).contains(19, M20).inside);
        assert!(arc(18, 4).contains(1, M20).inside);
        assert!(!arc(18, 4).contains(10, M20).inside);
        assert!(ResArc::from_endpoints(3, 3, M20).is_none());
    }

    #[test]
    fn two_piece_intersection() {
        // (15, 5) ∩ (3, 17): two pieces (15, 17) and (3, 5)
        let v = arc(15, 5).intersect(&arc(3, 17), M20);
        assert_eq!(v.len(), 2);
        assert!(v.contains(&arc(15, 17)));
        assert!(v.contains(&arc(3, 5)));
        assert!(arc(0, 5).intersect(&arc(5, 10), M20).is_empty());
    }

    #[test]
    fn guard_flags_near_touching_arcs() {
        let m = Modulus::Pow128;
        let q = 1u128 << 120;
        let a = ResArc::from_endpoints(0, q, m).unwrap();
        let touching = ResArc::from_endpoints(q - 5, 2 * q, m).unwrap();
        let c = intersection_nonempty(&[a, touching], m);
        assert!(c.inside && c.ambiguous);
        let clear = ResArc::from_endpoints(q / 2, 2 * q, m).unwrap();
        assert_eq!(intersection_nonempty(&[a, clear], m), Containment::exact(true));
        // identical arcs are never ambiguous
        assert_eq!(intersection_nonempty(&[a, a, a], m), Containment::exact(true));
    }

    /// Brute force over the finer grid `Z/(2 * 20)`: an open arc between
    /// grid points of Z/20 contains a point of the finer grid iff nonempty.
    fn brute_nonempty(arcs: &[(u128, u128)]) -> bool {
        (0..40u128).any(|x2| {
            arcs.iter().all(|&(a, b)| {
                let len = (b + 20 - a) % 20;
                let d = (x2 + 40 - 2 * a) % 40;
                d != 0 && d < 2 * len
            })
        })
    }

    proptest! {
        #[test]
        fn fold_matches_brute_force(ends in prop::collection::vec((0u128..20, 0u128..20), 1..5)) {
            prop_assume!(ends.iter().all(|(a, b)| a != b));
            let arcs: Vec<_> = ends.iter().map(|&(a, b)| arc(a, b)).collect();
            let got = intersection_nonempty(&arcs, M20);
            prop_assert!(!got.ambiguous);
            prop_assert_eq!(got.inside, brute_nonempty(&ends));
        }

        #[test]
        fn pieces_lie_in_every_arc(ends in prop::collection::vec((0u128..20, 0u128..20), 1..5)) {
            prop_assume!(ends.iter().all(|(a, b)| a != b));
            let arcs: Vec<_> = ends.iter().map(|&(a, b)| arc(a, b)).collect();
            let pieces = fold_intersection(&arcs, M20);
            prop_assert!(pieces.len() <= 2 * arcs.len());
            for p in pieces {
                if let ResArc::Open { start, len } = p {
                    // the midpoint (on the doubled grid) lies in every arc
                    let mid2 = (2 * start + len) % 40;
                    for &(a, b) in &ends {
                        let l = (b + 20 - a) % 20;
                        let d = (mid2 + 40 - 2 * a) % 40;
                        prop_assert!(d != 0 && d < 2 * l);
                    }
                }
            }
        }
    }
}
