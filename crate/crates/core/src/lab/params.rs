//! Experiment parameters with their defaults.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LabError;
use crate::polys::{IntPoly, PolyTuple};
use crate::returns::{Mode, DEFAULT_RESOLUTION};
use crate::systems::{Point, Region, Scalar, SystemSpec};

/// Nonnegative rational written `p/q`, `p` or as a decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac(pub Ratio<u64>);

impl FromStr for Frac {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let bad = || format!("cannot parse {s:?} as a nonnegative rational");
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u64.pow(frac.len() as u32);
            let i: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            let num = i.checked_mul(den).and_then(|v| v.checked_add(f)).ok_or_else(bad)?;
            return Ok(Frac(Ratio::new(num, den)));
        }
        let r: Ratio<u64> = s.parse().map_err(|_| bad())?;
        if *r.denom() == 0 {
            return Err(bad());
        }
        Ok(Frac(r))
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn frac(n: u64, d: u64) -> Frac {
    Frac(Ratio::new(n, d))
}

fn parse<T: FromStr>(s: &str) -> T
where
    T::Err: fmt::Debug,
{
    s.parse().expect("built-in default parses")
}

/// Closed integer window `[lo, hi]`.
pub type Window = (i64, i64);

fn check_window(name: &str, w: Window) -> Result<(), LabError> {
    if w.0 > w.1 {
        return Err(LabError::Invalid(format!("{name}: empty window [{}, {}]", w.0, w.1)));
    }
    Ok(())
}

fn check_ladder(name: &str, ladder: &[Window]) -> Result<(), LabError> {
    if ladder.is_empty() {
        return Err(LabError::Invalid(format!("{name}: empty ladder")));
    }
    for w in ladder {
        check_window(name, *w)?;
    }
    for pair in ladder.windows(2) {
        let ((a, b), (c, d)) = (pair[0], pair[1]);
        if !(c <= a && b <= d) {
            return Err(LabError::Invalid(format!("{name}: windows must be nested and growing")));
        }
    }
    Ok(())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), LabError> {
    if cond {
        Ok(())
    } else {
        Err(LabError::Invalid(msg()))
    }
}

fn check_eps(name: &str, e: Frac) -> Result<(), LabError> {
    ensure(*e.0.numer() > 0 && e.0 < Ratio::new(1, 2), || format!("{name} = {e} must lie in (0, 1/2)"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prop51 {
    pub alpha: Scalar,
    pub eps: Frac,
    pub window: Window,
    /// Grid points per coordinate for the sampled return set.
    pub resolution: u32,
    /// Also compute the gap of `B \ Q` on the window of twice the length.
    pub doubling: bool,
}

impl Default for Prop51 {
    fn default() -> Self {
        Self { alpha: Scalar::sqrt2_minus_1(), eps: frac(1, 10), window: (1, 200_000), resolution: DEFAULT_RESOLUTION, doubling: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Example121 {
    pub ladder: Vec<Window>,
    pub expected_max_gap: u64,
}

impl Default for Example121 {
    fn default() -> Self {
        Self { ladder: vec![(-8, 1 << 17), (-8, 1 << 20)], expected_max_gap: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThmBRotation {
    pub system: SystemSpec,
    pub regions: Vec<Region>,
    pub tuple: PolyTuple,
    pub mode: Mode,
    /// The second system, with the start point and target of its visit set.
    pub y_system: SystemSpec,
    pub y_point: Point,
    pub y_region: Region,
    pub window: Window,
}

impl Default for ThmBRotation {
    fn default() -> Self {
        Self {
            system: parse("rot(sqrt2m1)"),
            regions: vec![parse("arc(0, 1/10)"), parse("arc(0, 1/10)")],
            tuple: parse("(0, n^2)"),
            mode: Mode::Exact,
            y_system: SystemSpec::Cyclic(3),
            y_point: Point::Residue(0),
            y_region: parse("res{1}"),
            window: (1, 20_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThmCProgression {
    pub system: SystemSpec,
    pub region: Region,
    pub poly: IntPoly,
    pub d: usize,
    pub k: i64,
    pub j: i64,
    pub mode: Mode,
    pub window: Window,
}

impl Default for ThmCProgression {
    fn default() -> Self {
        Self {
            system: parse("rot(sqrt2m1)"),
            region: parse("arc(0, 1/20)"),
            poly: parse("n^2"),
            d: 2,
            k: 3,
            j: 1,
            mode: Mode::Exact,
            window: (1, 1_000_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThmDTotal {
    pub system: SystemSpec,
    pub region: Region,
    pub poly: IntPoly,
    pub d: usize,
    /// Progressions `kZ + j` gated for every `2 <= k <= max_k`.
    pub max_k: u64,
    pub mode: Mode,
    pub window: Window,
}

impl Default for ThmDTotal {
    fn default() -> Self {
        Self {
            system: parse("rot(sqrt2m1)"),
            region: parse("arc(0, 1/20)"),
            poly: parse("n^2 + 1"),
            d: 2,
            max_k: 6,
            mode: Mode::Exact,
            window: (1, 100_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThmAChacon {
    pub level: u32,
    pub regions: Vec<Region>,
    pub tuple: PolyTuple,
    pub resolution: u32,
    pub ladder: Vec<Window>,
    /// Translate count for the covered-run profile of the complement.
    pub n: u64,
}

impl Default for ThmAChacon {
    fn default() -> Self {
        Self {
            level: 11,
            regions: vec![parse("cyl{0010}"), parse("cyl{0100}")],
            tuple: parse("(0, n)"),
            resolution: DEFAULT_RESOLUTION,
            ladder: vec![(1, 10_000), (1, 100_000)],
            n: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma21Demo {
    pub window: Window,
    /// The family is generated by unions of all but one residue class.
    pub modulus: u64,
    /// `A` is the whole window and `B` is `A` without these.
    pub removed: Vec<i64>,
    pub n_list: Vec<u64>,
}

impl Default for Lemma21Demo {
    fn default() -> Self {
        Self { window: (0, 5000), modulus: 3, removed: vec![2500], n_list: vec![0, 1, 5, 20] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma31Identity {
    pub instances: u32,
    pub window: Window,
    /// Shifts `a` are drawn from `[-a_max, a_max]`.
    pub a_max: i64,
}

impl Default for Lemma31Identity {
    fn default() -> Self {
        Self { instances: 20, window: (-200, 200), a_max: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    /// Rational coordinates; used only on systems without fixed scalars.
    Rational,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedFormCheck {
    pub systems: Vec<SystemSpec>,
    pub start_kinds: Vec<StartKind>,
    pub starts: u32,
    pub n_max: u32,
}

impl Default for ClosedFormCheck {
    fn default() -> Self {
        let systems = [
            "cyclic(7)",
            "rot(1/3, 2/7)",
            "skew2(3/11)",
            "skews(5/13)",
            "product(rot(1/5), skew2(2/9))",
            "power(skews(1/7), -3)",
            "diagonal(skew2(2/5), 2)",
            "rot(sqrt2m1, fixed:0x9e3779b97f4a7c15f39cc0605cedc834)",
            "skew2(sqrt2m1)",
            "skews(sqrt2m1)",
            "product(cyclic(5), skew2(sqrt2m1))",
            "power(skew2(sqrt2m1), 2)",
            "diagonal(skews(sqrt2m1), 2)",
        ];
        Self {
            systems: systems.iter().map(|s| parse(s)).collect(),
            start_kinds: vec![StartKind::Rational, StartKind::Fixed],
            starts: 100,
            n_max: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma65Density {
    pub alpha: Scalar,
    /// `(k, re, im)` triples.
    pub f1: Vec<(i64, f64, f64)>,
    pub f2: Vec<(i64, f64, f64)>,
    /// Decreasing thresholds.
    pub eps: Vec<Frac>,
    pub window: Window,
    pub block: u64,
}

impl Default for Lemma65Density {
    fn default() -> Self {
        Self {
            alpha: Scalar::sqrt2_minus_1(),
            f1: vec![
                (1, 0.3, 0.1),
                (-1, 0.3, -0.1),
                (2, 0.2, -0.05),
                (-2, 0.2, 0.05),
                (3, 0.1, 0.1),
                (-3, 0.1, -0.1),
                (5, 0.05, 0.0),
                (-5, 0.05, 0.0),
            ],
            f2: vec![
                (1, 0.25, -0.2),
                (-1, 0.25, 0.2),
                (2, -0.1, 0.15),
                (-2, -0.1, -0.15),
                (3, 0.3, 0.0),
                (-3, 0.3, 0.0),
                (5, 0.02, 0.04),
                (-5, 0.02, -0.04),
            ],
            eps: vec![frac(1, 10), frac(3, 100), frac(1, 100), frac(3, 1000)],
            window: (1, 100_000),
            block: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumDivCheck {
    /// Every `Cyclic(m)` with `2 <= m <= max_m` and every divisor `k > 1`.
    pub max_m: u64,
}

impl Default for SpectrumDivCheck {
    fn default() -> Self {
        Self { max_m: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChangePolyCheck {
    pub instances: u32,
    pub max_degree: usize,
    pub coeff_max: i64,
    pub m_max: i64,
    pub ab_max: i64,
    pub window: Window,
}

impl Default for ChangePolyCheck {
    fn default() -> Self {
        Self { instances: 50, max_degree: 4, coeff_max: 5, m_max: 6, ab_max: 5, window: (-100, 100) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Experiment {
    #[serde(rename = "prop51")]
    Prop51(Prop51),
    #[serde(rename = "example121")]
    Example121(Example121),
    #[serde(rename = "thmB_rotation")]
    ThmBRotation(ThmBRotation),
    #[serde(rename = "thmC_progression")]
    ThmCProgression(ThmCProgression),
    #[serde(rename = "thmD_total")]
    ThmDTotal(ThmDTotal),
    #[serde(rename = "thmA_chacon")]
    ThmAChacon(ThmAChacon),
    #[serde(rename = "lemma21_demo")]
    Lemma21Demo(Lemma21Demo),
    #[serde(rename = "lemma31_identity")]
    Lemma31Identity(Lemma31Identity),
    #[serde(rename = "closedform_check")]
    ClosedFormCheck(ClosedFormCheck),
    #[serde(rename = "lemma65_density")]
    Lemma65Density(Lemma65Density),
    #[serde(rename = "spectrum_div_check")]
    SpectrumDivCheck(SpectrumDivCheck),
    #[serde(rename = "change_poly_check")]
    ChangePolyCheck(ChangePolyCheck),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Prop51(_) => "prop51",
            Experiment::Example121(_) => "example121",
            Experiment::ThmBRotation(_) => "thmB_rotation",
            Experiment::ThmCProgression(_) => "thmC_progression",
            Experiment::ThmDTotal(_) => "thmD_total",
            Experiment::ThmAChacon(_) => "thmA_chacon",
            Experiment::Lemma21Demo(_) => "lemma21_demo",
            Experiment::Lemma31Identity(_) => "lemma31_identity",
            Experiment::ClosedFormCheck(_) => "closedform_check",
            Experiment::Lemma65Density(_) => "lemma65_density",
            Experiment::SpectrumDivCheck(_) => "spectrum_div_check",
            Experiment::ChangePolyCheck(_) => "change_poly_check",
        }
    }

    /// The experiment with every parameter at its default.
    pub fn default_for(kind: &str) -> Option<Self> {
        Some(match kind {
            "prop51" => Experiment::Prop51(Default::default()),
            "example121" => Experiment::Example121(Default::default()),
            "thmB_rotation" => Experiment::ThmBRotation(Default::default()),
            "thmC_progression" => Experiment::ThmCProgression(Default::default()),
            "thmD_total" => Experiment::ThmDTotal(Default::default()),
            "thmA_chacon" => Experiment::ThmAChacon(Default::default()),
            "lemma21_demo" => Experiment::Lemma21Demo(Default::default()),
            "lemma31_identity" => Experiment::Lemma31Identity(Default::default()),
            "closedform_check" => Experiment::ClosedFormCheck(Default::default()),
            "lemma65_density" => Experiment::Lemma65Density(Default::default()),
            "spectrum_div_check" => Experiment::SpectrumDivCheck(Default::default()),
            "change_poly_check" => Experiment::ChangePolyCheck(Default::default()),
            _ => return None,
        })
    }

    pub fn uses_seed(&self) -> bool {
        matches!(self, Experiment::Lemma31Identity(_) | Experiment::ClosedFormCheck(_) | Experiment::ChangePolyCheck(_))
    }

    /// Cheap checks that need no computation.
    pub fn validate(&self) -> Result<(), LabError> {
        match self {
            Experiment::Prop51(p) => {
                check_window("window", p.window)?;
                check_eps("eps", p.eps)?;
                ensure(p.resolution > 0, || "resolution must be positive".into())
            }
            Experiment::Example121(p) => check_ladder("ladder", &p.ladder),
            Experiment::ThmBRotation(p) => {
                check_window("window", p.window)?;
                ensure(p.regions.len() == p.tuple.len(), || {
                    format!("{} regions for a tuple of {} polynomials", p.regions.len(), p.tuple.len())
                })
            }
            Experiment::ThmCProgression(p) => {
                check_window("window", p.window)?;
                ensure(p.d >= 1, || "d must be positive".into())?;
                ensure(p.k >= 1, || "k must be positive".into())
            }
            Experiment::ThmDTotal(p) => {
                check_window("window", p.window)?;
                ensure(p.d >= 1, || "d must be positive".into())?;
                ensure(!p.poly.is_constant(), || "the polynomial must be non-constant".into())?;
                ensure((2..=1000).contains(&p.max_k), || "max_k must lie in [2, 1000]".into())
            }
            Experiment::ThmAChacon(p) => {
                check_ladder("ladder", &p.ladder)?;
                ensure(p.regions.len() == p.tuple.len(), || {
                    format!("{} regions for a tuple of {} polynomials", p.regions.len(), p.tuple.len())
                })?;
                ensure(p.resolution > 0, || "resolution must be positive".into())
            }
            Experiment::Lemma21Demo(p) => {
                check_window("window", p.window)?;
                ensure(p.modulus >= 2, || "modulus must be at least 2".into())?;
                ensure(p.removed.iter().all(|r| (p.window.0..=p.window.1).contains(r)), || {
                    "removed elements must lie in the window".into()
                })
            }
            Experiment::Lemma31Identity(p) => {
                check_window("window", p.window)?;
                ensure(p.a_max >= 0, || "a_max must be nonnegative".into())
            }
            Experiment::ClosedFormCheck(p) => {
                ensure(!p.systems.is_empty(), || "no systems given".into())?;
                ensure(!p.start_kinds.is_empty(), || "no start kinds given".into())?;
                ensure(p.starts > 0, || "starts must be positive".into())
            }
            Experiment::Lemma65Density(p) => {
                check_window("window", p.window)?;
                ensure(!p.eps.is_empty(), || "empty eps ladder".into())?;
                ensure(p.eps.windows(2).all(|w| w[1].0 < w[0].0), || "eps ladder must be strictly decreasing".into())?;
                ensure(p.block >= 1 && p.block <= p.window.1.abs_diff(p.window.0) + 1, || {
                    "block length must fit in the window".into()
                })
            }
            Experiment::SpectrumDivCheck(p) => ensure((2..=10_000).contains(&p.max_m), || "max_m must lie in [2, 10000]".into()),
            Experiment::ChangePolyCheck(p) => {
                check_window("window", p.window)?;
                ensure(p.m_max >= 1 && p.ab_max >= 1 && p.coeff_max >= 1, || "ranges must be positive".into())
            }
        }
    }
}
