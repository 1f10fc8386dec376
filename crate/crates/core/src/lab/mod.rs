//! Scenario files, the experiment registry and reports.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "name": "prop51_default",
//!   "let": { "a": "sqrt2m1" },
//!   "experiment": { "kind": "prop51", "alpha": "$a", "eps": "1/10" },
//!   "output": "out/prop51",
//!   "seed": 7
//! }
//! ```
//!
//! Every string inside `experiment` may mention `$name` for a binding from
//! `let`; bindings may refer to earlier ones. Parameters left out take the
//! defaults listed by [`registry`], and the report echoes the resolved
//! parameters so each number can be traced back.

mod emit;
mod experiments;
mod params;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::windows::{GapProfile, PwsProfile, WindowSet};

pub use emit::{emit, render_text, Format, INLINE_LIMIT};
pub use params::*;

/// Seed used by randomized experiments when neither the scenario nor the
/// caller provides one.
pub const DEFAULT_SEED: u64 = 0x5eed_1234;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Invalid(_) | LabError::Io(_) => 2,
            LabError::Refused(_) => 3,
        }
    }
}

/// Errors from the numerical modules all come from scenario parameters.
macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for LabError {
            fn from(e: $t) -> Self {
                LabError::Invalid(e.to_string())
            }
        }
    )*};
}

invalid_from!(
    crate::returns::ReturnError,
    crate::systems::SystemError,
    crate::windows::WindowError,
    crate::spectral::SpectralError,
    crate::polys::PolyError
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, rename = "let", skip_serializing_if = "BTreeMap::is_empty")]
    pub bindings: BTreeMap<String, String>,
    pub experiment: Experiment,
    /// Report path prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// Replaces every `$name` in `s`.
fn substitute(s: &str, env: &BTreeMap<String, String>) -> Result<String, LabError> {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('$') {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 1..];
        let len = tail.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(tail.len());
        let name = &tail[..len];
        let value = env.get(name).ok_or_else(|| LabError::Invalid(format!("unresolved reference ${name}")))?;
        out.push_str(value);
        rest = &tail[len..];
    }
    out.push_str(rest);
    Ok(out)
}

fn substitute_value(v: &mut Value, env: &BTreeMap<String, String>) -> Result<(), LabError> {
    match v {
        Value::String(s) => *s = substitute(s, env)?,
        Value::Array(items) => items.iter_mut().try_for_each(|x| substitute_value(x, env))?,
        Value::Object(map) => map.values_mut().try_for_each(|x| substitute_value(x, env))?,
        _ => {}
    }
    Ok(())
}

impl Scenario {
    /// Parses, resolves `$name` references and validates parameters.
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let mut raw: Value = serde_json::from_str(text).map_err(|e| LabError::Invalid(e.to_string()))?;
        let obj = raw.as_object_mut().ok_or_else(|| LabError::Invalid("scenario must be a JSON object".into()))?;
        let bindings: BTreeMap<String, String> = match obj.get("let") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| LabError::Invalid(format!("let: {e}")))?,
            None => BTreeMap::new(),
        };
        // bindings resolve in name order against those already resolved
        let mut env = BTreeMap::new();
        let mut pending: Vec<(&String, &String)> = bindings.iter().collect();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|(k, v)| match substitute(v, &env) {
                Ok(s) => {
                    env.insert((*k).clone(), s);
                    false
                }
                Err(_) => true,
            });
            if pending.len() == before {
                let (k, v) = pending[0];
                return Err(LabError::Invalid(format!("binding {k} = {v:?} has an unresolved or cyclic reference")));
            }
        }
        if let Some(k) = env.keys().find(|k| !is_ident(k)) {
            return Err(LabError::Invalid(format!("binding name {k:?} is not an identifier")));
        }
        if let Some(exp) = obj.get_mut("experiment") {
            substitute_value(exp, &env)?;
        }
        let mut s: Scenario = serde_json::from_value(raw).map_err(|e| LabError::Invalid(e.to_string()))?;
        s.bindings = env;
        if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            return Err(LabError::Invalid(format!("scenario name {:?} must be a plain identifier", s.name)));
        }
        s.experiment.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Would pass, but rests on comparisons inside the fixed-point guard.
    Ambiguous,
    /// Evidence only; never affects the exit status.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Ambiguous => "AMBIGUOUS",
            Verdict::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub window: (i64, i64),
    /// How the underlying sets were computed.
    pub mode: String,
    pub detail: String,
    pub ambiguity_count: u64,
}

impl Check {
    pub fn new(name: &str, ok: bool, window: (i64, i64), mode: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            window,
            mode: mode.into(),
            detail,
            ambiguity_count: 0,
        }
    }

    pub fn info(name: &str, window: (i64, i64), mode: &str, detail: String) -> Self {
        Self { verdict: Verdict::Info, ..Self::new(name, true, window, mode, detail) }
    }

    pub fn with_ambiguity(mut self, n: u64) -> Self {
        self.ambiguity_count = n;
        if n > 0 && self.verdict == Verdict::Pass {
            self.verdict = Verdict::Ambiguous;
        }
        self
    }
}

/// A produced set: profiles always, members when small enough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub name: String,
    pub window: (i64, i64),
    pub mode: String,
    pub count: u64,
    pub gap: GapProfile,
    pub pws: Vec<PwsProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<i64>>,
    #[serde(skip)]
    pub set: Option<WindowSet>,
}

impl SetReport {
    pub fn new(name: &str, set: &WindowSet, mode: &str, pws_n: &[u64]) -> Result<Self, LabError> {
        let pws = pws_n.iter().filter(|&&n| n < set.window_len()).map(|&n| set.pws_profile(n)).collect::<Result<_, _>>()?;
        let count = set.count();
        Ok(Self {
            name: name.into(),
            window: (set.lo(), set.hi()),
            mode: mode.into(),
            count,
            gap: set.gap_profile(),
            pws,
            elements: (count <= INLINE_LIMIT).then(|| set.elements()),
            set: Some(set.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timing {
    pub phase: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub kind: String,
    pub seed: Option<u64>,
    /// The experiment exactly as run, defaults filled in.
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub sets: Vec<SetReport>,
    /// Named exact values, e.g. densities as `p/q`.
    pub values: BTreeMap<String, String>,
    pub notes: Vec<String>,
    /// Wall-clock phases; left out of emitted files so they stay
    /// reproducible.
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl Report {
    pub fn ambiguity_count(&self) -> u64 {
        self.checks.iter().map(|c| c.ambiguity_count).sum()
    }

    pub fn passed(&self) -> bool {
        self.ambiguity_count() == 0 && self.checks.iter().all(|c| matches!(c.verdict, Verdict::Pass | Verdict::Info))
    }

    /// 0 when every verdict passes with no ambiguity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Caller-side settings that are not part of the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
}

pub fn run_experiment(s: &Scenario, opts: &RunOptions) -> Result<Report, LabError> {
    s.experiment.validate()?;
    let seed = opts.seed.or(s.seed);
    let mut report = Report {
        scenario: s.name.clone(),
        kind: s.experiment.kind().into(),
        seed: s.experiment.uses_seed().then_some(seed.unwrap_or(DEFAULT_SEED)),
        parameters: serde_json::to_value(&s.experiment).map_err(|e| LabError::Invalid(e.to_string()))?,
        checks: Vec::new(),
        sets: Vec::new(),
        values: BTreeMap::new(),
        notes: Vec::new(),
        timings: Vec::new(),
    };
    experiments::run(&s.experiment, &mut report)?;
    Ok(report)
}

/// One registered experiment kind.
#[derive(Debug, Clone, Copy)]
pub struct KindInfo {
    pub kind: &'static str,
    pub summary: &'static str,
}

pub fn registry() -> &'static [KindInfo] {
    &[
        KindInfo { kind: "prop51", summary: "quadratic Bohr set Q, linear Bohr set B, gaps of B \\ Q, R(U,U,U) within Q on skew2, visit-set realization through skews" },
        KindInfo { kind: "example121", summary: "union of dyadic blocks of 2^k-multiples: max gap 3 across a window ladder" },
        KindInfo { kind: "thmB_rotation", summary: "return set of a rotation or skew product intersected with a cyclic visit set, gated on disjoint spectra" },
        KindInfo { kind: "thmC_progression", summary: "diagonal return set intersected with the progression kZ + j" },
        KindInfo { kind: "thmD_total", summary: "diagonal return set along a polynomial with p(0) != 0 on a totally minimal rotation" },
        KindInfo { kind: "thmA_chacon", summary: "Chacon cylinder return sets; covered runs of the complement across a window ladder" },
        KindInfo { kind: "lemma21_demo", summary: "difference criterion for an upward-closed family of residue unions" },
        KindInfo { kind: "lemma31_identity", summary: "randomized translation identity for rotation return sets" },
        KindInfo { kind: "closedform_check", summary: "closed-form orbits against direct iteration, rational and fixed-point starts" },
        KindInfo { kind: "lemma65_density", summary: "superlevel sets of a Kronecker correlation across an eps ladder" },
        KindInfo { kind: "spectrum_div_check", summary: "spectrum of T from the spectrum of T^k on cyclically permuted components" },
        KindInfo { kind: "change_poly_check", summary: "randomized change of polynomial M q(n) = p(M(an + b))" },
    ]
}

/// `p/q` text for a density.
pub(crate) fn ratio_str(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
