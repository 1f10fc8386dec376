//! Systems, points and regions lowered to flat residue vectors.
//!
//! A point becomes one `u128` per slot (circle coordinate, cyclic residue
//! or word index); a region becomes a union of per-slot constraints. The
//! orbit map works in place on a slot slice, so batch evaluation does not
//! allocate.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::circle::{intersection_nonempty, Containment, ResArc};
use super::{ChaconWord, CircleArc, Point, Region, Scalar, SystemError, SystemSpec};
use crate::polys::Modulus;

/// An iterate count; polynomial values may exceed `i128`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Steps {
    Small(i128),
    Big(BigInt),
}

impl Steps {
    pub fn from_big(n: &BigInt) -> Self {
        match n.to_i128() {
            Some(v) => Steps::Small(v),
            None => Steps::Big(n.clone()),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Steps::Small(v) => BigInt::from(*v),
            Steps::Big(b) => b.clone(),
        }
    }

    pub fn mul(&self, k: i128) -> Steps {
        match self {
            Steps::Small(v) => match v.checked_mul(k) {
                Some(p) => Steps::Small(p),
                None => Steps::Big(BigInt::from(*v) * k),
            },
            Steps::Big(b) => Steps::from_big(&(b * k)),
        }
    }

    pub fn residue(&self, m: Modulus) -> u128 {
        match self {
            Steps::Small(v) => m.reduce_i128(*v),
            Steps::Big(b) => m.reduce_big(b),
        }
    }

    fn residue_mod(&self, k: u64) -> u64 {
        Modulus::Small(k).reduce_big(&self.to_big()) as u64
    }

    /// `n (n - 1) / 2` reduced into the ring. The exact division happens
    /// before reduction, so this is right modulo `2^128` as well.
    pub fn binom2(&self, m: Modulus) -> u128 {
        match self {
            Steps::Small(v) => {
                let (a, b) = if v.rem_euclid(2) == 0 { (v / 2, v - 1) } else { (*v, (v - 1) / 2) };
                m.mul(m.reduce_i128(a), m.reduce_i128(b))
            }
            Steps::Big(n) => {
                let c = n * (n - BigInt::one());
                m.reduce_big(&c.div_floor(&BigInt::from(2)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Circle,
    Cyclic(u64),
    Word,
}

#[derive(Debug, Clone)]
enum Node {
    Cyclic(u64),
    Rot(Vec<u128>),
    Skew2(u128),
    SkewS(u128),
    Chacon(ChaconWord),
    Product(Box<Node>, Box<Node>, usize),
    Power(Box<Node>, i64),
    Diagonal(Box<Node>, usize, usize),
}

impl Node {
    fn build(sys: &SystemSpec, m: Modulus, slots: &mut Vec<SlotKind>) -> Result<Node, SystemError> {
        Ok(match sys {
            SystemSpec::Cyclic(k) => {
                if *k == 0 {
                    return Err(SystemError::Shape("cyclic(0)".into()));
                }
                slots.push(SlotKind::Cyclic(*k));
                Node::Cyclic(*k)
            }
            SystemSpec::TorusRot(a) => {
                if a.is_empty() {
                    return Err(SystemError::Shape("rot() needs at least one coordinate".into()));
                }
                slots.extend(a.iter().map(|_| SlotKind::Circle));
                Node::Rot(a.iter().map(|s| s.residue(m)).collect())
            }
            SystemSpec::Skew2(a) => {
                slots.extend([SlotKind::Circle; 2]);
                Node::Skew2(a.residue(m))
            }
            SystemSpec::SkewS(a) => {
                slots.extend([SlotKind::Circle; 2]);
                Node::SkewS(a.residue(m))
            }
            SystemSpec::Chacon(w) => {
                slots.push(SlotKind::Word);
                Node::Chacon(w.clone())
            }
            SystemSpec::Product(a, b) => {
                let before = slots.len();
                let left = Node::build(a, m, slots)?;
                let width = slots.len() - before;
                let right = Node::build(b, m, slots)?;
                Node::Product(Box::new(left), Box::new(right), width)
            }
            SystemSpec::Power(a, k) => Node::Power(Box::new(Node::build(a, m, slots)?), *k),
            SystemSpec::Diagonal(a, d) => {
                let before = slots.len();
                let base = Node::build(a, m, slots)?;
                let width = slots.len() - before;
                let pattern: Vec<SlotKind> = slots[before..].to_vec();
                for _ in 0..*d {
                    slots.extend_from_slice(&pattern);
                }
                Node::Diagonal(Box::new(base), *d, width)
            }
        })
    }

    fn apply(&self, m: Modulus, st: &mut [u128], n: &Steps) -> Result<(), SystemError> {
        match self {
            Node::Cyclic(k) => {
                st[0] = ((st[0] as u64 + n.residue_mod(*k)) % k) as u128;
            }
            Node::Rot(alphas) => {
                let s = n.residue(m);
                for (x, a) in st.iter_mut().zip(alphas) {
                    *x = m.add(*x, m.mul(s, *a));
                }
            }
            Node::Skew2(a) => {
                let s = n.residue(m);
                let (x, y) = (st[0], st[1]);
                st[1] = m.add(m.add(y, m.mul(s, x)), m.mul(n.binom2(m), *a));
                st[0] = m.add(x, m.mul(s, *a));
            }
            Node::SkewS(a) => {
                let s = n.residue(m);
                let (x, y) = (st[0], st[1]);
                let two_s = m.add(s, s);
                st[1] = m.add(m.add(y, m.mul(two_s, x)), m.mul(m.mul(s, s), *a));
                st[0] = m.add(x, m.mul(s, *a));
            }
            Node::Chacon(w) => {
                let len = w.len();
                let out = || SystemError::ChaconRange { index: format!("{} + {:?}", st[0], n), len };
                let Steps::Small(v) = n else { return Err(out()) };
                let idx = (st[0] as i128).checked_add(*v).ok_or_else(out)?;
                if idx < 0 || idx >= len as i128 {
                    return Err(SystemError::ChaconRange { index: idx.to_string(), len });
                }
                st[0] = idx as u128;
            }
            Node::Product(a, b, w) => {
                let (l, r) = st.split_at_mut(*w);
                a.apply(m, l, n)?;
                b.apply(m, r, n)?;
            }
            Node::Power(a, k) => a.apply(m, st, &n.mul(*k as i128))?,
            Node::Diagonal(a, d, w) => {
                for (i, chunk) in st.chunks_mut(*w).take(d + 1).enumerate() {
                    if i > 0 {
                        a.apply(m, chunk, &n.mul(i as i128))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Per-slot translation step when the node is a group rotation.
    fn rotation_steps(&self, m: Modulus, out: &mut Vec<SlotStep>) -> bool {
        match self {
            Node::Cyclic(k) => {
                out.push(SlotStep::Cyclic { step: 1 % k, k: *k });
                true
            }
            Node::Rot(a) => {
                out.extend(a.iter().map(|&v| SlotStep::Circle(v)));
                true
            }
            Node::Skew2(_) | Node::SkewS(_) | Node::Chacon(_) => false,
            Node::Product(a, b, _) => a.rotation_steps(m, out) && b.rotation_steps(m, out),
            Node::Power(a, k) => {
                let start = out.len();
                if !a.rotation_steps(m, out) {
                    return false;
                }
                for v in &mut out[start..] {
                    *v = v.scale(*k as i128, m);
                }
                true
            }
            Node::Diagonal(a, d, _) => {
                let mut base = Vec::new();
                if !a.rotation_steps(m, &mut base) {
                    return false;
                }
                for i in 0..=*d {
                    out.extend(base.iter().map(|v| v.scale(i as i128, m)));
                }
                true
            }
        }
    }
}

/// Translation of one slot under a single step of a rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotStep {
    Circle(u128),
    Cyclic { step: u64, k: u64 },
}

impl SlotStep {
    fn scale(self, c: i128, m: Modulus) -> Self {
        match self {
            SlotStep::Circle(v) => SlotStep::Circle(m.mul(v, m.reduce_i128(c))),
            SlotStep::Cyclic { step, k } => {
                SlotStep::Cyclic { step: ((step as i128 * c.rem_euclid(k as i128)) % k as i128) as u64, k }
            }
        }
    }

    /// The translation after `t` steps, given `t` reduced into the circle
    /// ring and modulo `k` respectively.
    pub fn times(self, t_ring: u128, t_mod_k: u64, m: Modulus) -> u128 {
        match self {
            SlotStep::Circle(v) => m.mul(v, t_ring),
            SlotStep::Cyclic { step, k } => step as u128 * t_mod_k as u128 % k as u128,
        }
    }
}

/// A system lowered into a fixed residue ring.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub sys: SystemSpec,
    pub modulus: Modulus,
    pub slots: Vec<SlotKind>,
    node: Node,
}

impl Compiled {
    pub fn new(sys: &SystemSpec, modulus: Modulus) -> Result<Self, SystemError> {
        let mut slots = Vec::new();
        let node = Node::build(sys, modulus, &mut slots)?;
        Ok(Self { sys: sys.clone(), modulus, slots, node })
    }

    pub fn width(&self) -> usize {
        self.slots.len()
    }

    pub fn apply(&self, st: &mut [u128], n: &Steps) -> Result<(), SystemError> {
        self.node.apply(self.modulus, st, n)
    }

    /// Per-slot translation steps, or `None` for systems that are not
    /// rotations.
    pub fn rotation_vector(&self) -> Option<Vec<SlotStep>> {
        let mut out = Vec::with_capacity(self.width());
        self.node.rotation_steps(self.modulus, &mut out).then_some(out)
    }

    pub fn flatten_point(&self, p: &Point) -> Result<Vec<u128>, SystemError> {
        let mut out = Vec::with_capacity(self.width());
        flatten(&self.sys, p, self.modulus, &mut out)?;
        Ok(out)
    }

    pub fn unflatten_point(&self, st: &[u128]) -> Point {
        let mut i = 0;
        unflatten(&self.sys, st, &mut i, self.modulus)
    }

    pub fn compile_region(&self, r: &Region) -> Result<FlatRegion, SystemError> {
        let boxes = lower_region(&self.sys, r, self.modulus)?;
        Ok(FlatRegion { boxes, modulus: self.modulus })
    }
}

fn flatten(sys: &SystemSpec, p: &Point, m: Modulus, out: &mut Vec<u128>) -> Result<(), SystemError> {
    let shape = || SystemError::Shape(format!("point {p} does not belong to {}", sys.constructor()));
    match (sys, p) {
        (SystemSpec::Cyclic(k), Point::Residue(r)) if r < k => out.push(*r as u128),
        (SystemSpec::TorusRot(a), Point::Torus(c)) if a.len() == c.len() => out.extend(c.iter().map(|s| s.residue(m))),
        (SystemSpec::Skew2(_) | SystemSpec::SkewS(_), Point::Torus(c)) if c.len() == 2 => {
            out.extend(c.iter().map(|s| s.residue(m)))
        }
        (SystemSpec::Chacon(w), Point::WordIndex(i)) if *i < w.len() => out.push(*i as u128),
        (SystemSpec::Product(a, b), Point::Pair(x, y)) => {
            flatten(a, x, m, out)?;
            flatten(b, y, m, out)?;
        }
        (SystemSpec::Power(a, _), p) => flatten(a, p, m, out)?,
        (SystemSpec::Diagonal(a, d), Point::Tuple(v)) if v.len() == d + 1 => {
            for x in v {
                flatten(a, x, m, out)?;
            }
        }
        _ => return Err(shape()),
    }
    Ok(())
}

fn unflatten(sys: &SystemSpec, st: &[u128], i: &mut usize, m: Modulus) -> Point {
    let mut take = || {
        let v = st[*i];
        *i += 1;
        v
    };
    match sys {
        SystemSpec::Cyclic(_) => Point::Residue(take() as u64),
        SystemSpec::TorusRot(a) => Point::Torus((0..a.len()).map(|_| Scalar::from_residue(take(), m)).collect()),
        SystemSpec::Skew2(_) | SystemSpec::SkewS(_) => {
            Point::Torus((0..2).map(|_| Scalar::from_residue(take(), m)).collect())
        }
        SystemSpec::Chacon(_) => Point::WordIndex(take() as u64),
        SystemSpec::Product(a, b) => {
            let x = unflatten(a, st, i, m);
            let y = unflatten(b, st, i, m);
            Point::pair(x, y)
        }
        SystemSpec::Power(a, _) => unflatten(a, st, i, m),
        SystemSpec::Diagonal(a, d) => Point::Tuple((0..=*d).map(|_| unflatten(a, st, i, m)).collect()),
    }
}

#[derive(Debug, Clone)]
pub enum SlotCons {
    Any,
    Arc(ResArc),
    Residues(Arc<Vec<bool>>),
    Cylinders { occ: Arc<Vec<u64>>, max_len: usize, word_len: u64 },
}

impl SlotCons {
    pub fn contains_value(&self, v: u128, m: Modulus) -> Result<Containment, SystemError> {
        Ok(match self {
            SlotCons::Any => Containment::exact(true),
            SlotCons::Arc(a) => a.contains(v, m),
            SlotCons::Residues(set) => Containment::exact(set[v as usize]),
            SlotCons::Cylinders { occ, max_len, word_len } => {
                if v + *max_len as u128 > *word_len as u128 {
                    return Err(SystemError::ChaconRange { index: (v + *max_len as u128).to_string(), len: *word_len });
                }
                Containment::exact(occ[(v / 64) as usize] >> (v % 64) & 1 == 1)
            }
        })
    }
}

fn lower_region(sys: &SystemSpec, r: &Region, m: Modulus) -> Result<Vec<Vec<SlotCons>>, SystemError> {
    let shape = || SystemError::Shape(format!("region {r} does not fit {}", sys.constructor()));
    if let Region::Union(parts) = r {
        let mut out = Vec::new();
        for p in parts {
            out.extend(lower_region(sys, p, m)?);
        }
        return Ok(out);
    }
    if let Region::Full = r {
        let mut slots = Vec::new();
        Node::build(sys, m, &mut slots)?;
        return Ok(vec![vec![SlotCons::Any; slots.len()]]);
    }
    let arcs_box = |arcs: &[CircleArc]| -> Vec<SlotCons> {
        arcs.iter()
            .map(|a| match a {
                CircleArc::Full => SlotCons::Any,
                CircleArc::Open(x, y) => match ResArc::from_endpoints(x.residue(m), y.residue(m), m) {
                    Some(arc) => SlotCons::Arc(arc),
                    // endpoints merged by rounding: an arc of length < 2^-128
                    None => SlotCons::Arc(ResArc::Open { start: x.residue(m), len: 0 }),
                },
            })
            .collect()
    };
    match (sys, r) {
        (SystemSpec::Cyclic(k), Region::Residues(set)) => {
            if let Some(bad) = set.iter().find(|&&v| v >= *k) {
                return Err(SystemError::Shape(format!("residue {bad} not below {k}")));
            }
            let mut mask = vec![false; *k as usize];
            set.iter().for_each(|&v| mask[v as usize] = true);
            Ok(vec![vec![SlotCons::Residues(Arc::new(mask))]])
        }
        (SystemSpec::TorusRot(a), Region::Box(arcs)) if a.len() == arcs.len() => Ok(vec![arcs_box(arcs)]),
        (SystemSpec::Skew2(_) | SystemSpec::SkewS(_), Region::Box(arcs)) if arcs.len() == 2 => Ok(vec![arcs_box(arcs)]),
        (SystemSpec::Chacon(w), Region::Cylinders(words)) => {
            for c in words {
                if !w.is_factor(c) {
                    return Err(SystemError::Shape(format!(
                        "cylinder {} is not a factor of the level-{} Chacon word",
                        super::word_str(c),
                        w.level()
                    )));
                }
            }
            let max_len = words.iter().map(Vec::len).max().unwrap_or(0);
            Ok(vec![vec![SlotCons::Cylinders { occ: Arc::new(w.occurrences(words)), max_len, word_len: w.len() }]])
        }
        (SystemSpec::Product(a, b), Region::Pair(ra, rb)) => {
            let la = lower_region(a, ra, m)?;
            let lb = lower_region(b, rb, m)?;
            Ok(cross(&[la, lb]))
        }
        (SystemSpec::Power(a, _), r) => lower_region(a, r, m),
        (SystemSpec::Diagonal(a, d), Region::Tuple(parts)) if parts.len() == d + 1 => {
            let lowered = parts.iter().map(|p| lower_region(a, p, m)).collect::<Result<Vec<_>, _>>()?;
            Ok(cross(&lowered))
        }
        _ => Err(shape()),
    }
}

/// Distributes a product of unions into a union of products.
fn cross(factors: &[Vec<Vec<SlotCons>>]) -> Vec<Vec<SlotCons>> {
    let mut acc: Vec<Vec<SlotCons>> = vec![Vec::new()];
    for f in factors {
        acc = acc
            .iter()
            .flat_map(|prefix| {
                f.iter().map(move |b| {
                    let mut v = prefix.clone();
                    v.extend(b.iter().cloned());
                    v
                })
            })
            .collect();
    }
    acc
}

/// A region as a union of boxes of slot constraints.
#[derive(Debug, Clone)]
pub struct FlatRegion {
    pub boxes: Vec<Vec<SlotCons>>,
    pub modulus: Modulus,
}

impl FlatRegion {
    pub fn contains(&self, st: &[u128]) -> Result<Containment, SystemError> {
        let mut any_nominal = false;
        let mut any_ambiguous = false;
        for b in &self.boxes {
            let mut nominal = true;
            let mut ambiguous = false;
            let mut definitely_out = false;
            for (c, &v) in b.iter().zip(st) {
                let r = c.contains_value(v, self.modulus)?;
                nominal &= r.inside;
                ambiguous |= r.ambiguous;
                if !r.inside && !r.ambiguous {
                    definitely_out = true;
                    break;
                }
            }
            if definitely_out {
                continue;
            }
            if nominal && !ambiguous {
                return Ok(Containment::exact(true));
            }
            any_nominal |= nominal;
            any_ambiguous |= ambiguous;
        }
        Ok(Containment { inside: any_nominal, ambiguous: any_ambiguous })
    }

    /// Is the intersection of the given translated boxes (one box per
    /// region, each slot shifted by `-shift[slot]`) nonempty? Only for
    /// rotation slots.
    pub fn boxes_intersect(
        chosen: &[&[SlotCons]],
        shifts: &[Vec<u128>],
        slots: &[SlotKind],
        m: Modulus,
    ) -> Containment {
        let mut ambiguous = false;
        for (s, kind) in slots.iter().enumerate() {
            match kind {
                SlotKind::Circle => {
                    let arcs: Vec<ResArc> = chosen
                        .iter()
                        .zip(shifts)
                        .filter_map(|(b, sh)| match &b[s] {
                            SlotCons::Arc(a) => Some(a.translate(m.neg(sh[s]), m)),
                            _ => None,
                        })
                        .collect();
                    if arcs.iter().any(|a| matches!(a, ResArc::Open { len: 0, .. })) {
                        return Containment::exact(false);
                    }
                    let c = intersection_nonempty(&arcs, m);
                    if !c.inside && !c.ambiguous {
                        return Containment::exact(false);
                    }
                    ambiguous |= c.ambiguous;
                    if !c.inside {
                        return Containment { inside: false, ambiguous: true };
                    }
                }
                SlotKind::Cyclic(k) => {
                    let k = *k as u128;
                    let ok = (0..k).any(|x| {
                        chosen.iter().zip(shifts).all(|(b, sh)| match &b[s] {
                            SlotCons::Residues(mask) => mask[((x + sh[s]) % k) as usize],
                            _ => true,
                        })
                    });
                    if !ok {
                        return Containment::exact(false);
                    }
                }
                SlotKind::Word => unreachable!("word slots are not rotations"),
            }
        }
        Containment { inside: true, ambiguous }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom2_reduces_after_division() {
        let m = Modulus::Pow128;
        for v in [-7i128, -1, 0, 1, 2, 7, 1 << 70, -(1 << 90) + 3] {
            let exact = BigInt::from(v) * BigInt::from(v - 1) / 2;
            assert_eq!(Steps::Small(v).binom2(m), m.reduce_big(&exact));
            assert_eq!(Steps::Big(BigInt::from(v)).binom2(m), m.reduce_big(&exact));
            let s = Modulus::Small(1_000_003);
            assert_eq!(Steps::Small(v).binom2(s), s.reduce_big(&exact));
        }
    }

    #[test]
    fn steps_promote_on_overflow() {
        let s = Steps::Small(i128::MAX / 2).mul(5);
        assert!(matches!(s, Steps::Big(_)));
        assert_eq!(s.residue(Modulus::Small(7)), Modulus::Small(7).reduce_big(&(BigInt::from(i128::MAX / 2) * 5)));
    }
}
