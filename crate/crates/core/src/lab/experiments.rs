use std::time::Instant;

use num_bigint::BigInt;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::*;
use super::{ratio_str, Check, LabError, Report, SetReport, Timing};
use crate::polys::{IntPoly, PolyTuple};
use crate::returns::{lemma31_harness, return_set, return_set_diag, visit_set, Mode, ReturnQuery};
use crate::spectral::{eigen_group, shares_nontrivial_eigenvalue, spectrum_div_k, EigenGroup, FourierData, Shared};
use crate::systems::flat::{Compiled, Steps};
use crate::systems::{common_ring, step, CircleArc, INV_SQRT2_BITS, Point, Rational, Region, Scalar, SystemSpec};
use crate::windows::{gen_example121, gen_poly_small, lemma21_check, FamilySpec, Lemma21Status, WindowSet};

const ENUM: &str = "enumeration";

fn mode_str(m: Mode) -> String {
    match m {
        Mode::Exact => "exact".into(),
        Mode::Sample(r) => format!("sample({r})"),
    }
}

fn timed<T>(report: &mut Report, phase: &str, f: impl FnOnce() -> Result<T, LabError>) -> Result<T, LabError> {
    let t = Instant::now();
    let out = f();
    report.timings.push(Timing { phase: phase.into(), elapsed: t.elapsed() });
    out
}

fn value(report: &mut Report, key: &str, v: impl std::fmt::Display, window: Window, mode: &str) {
    report.values.insert(key.into(), format!("{v} on [{}, {}] ({mode})", window.0, window.1));
}

fn push_set(report: &mut Report, name: &str, set: &WindowSet, mode: &str, pws_n: &[u64]) -> Result<(), LabError> {
    report.sets.push(SetReport::new(name, set, mode, pws_n)?);
    Ok(())
}

fn gap_text(s: &WindowSet) -> String {
    let g = s.gap_profile();
    if g.gap_undefined {
        "empty".into()
    } else {
        format!("max gap {} over {} members", g.max_internal_gap, g.element_count)
    }
}

fn first_extra(sub: &WindowSet, sup: &WindowSet) -> Result<(u64, Option<i64>), LabError> {
    let d = sub.difference(sup)?;
    Ok((d.count(), d.first()))
}

fn subset_check(name: &str, sub: &WindowSet, sup: &WindowSet, mode: &str) -> Result<Check, LabError> {
    let (bad, first) = first_extra(sub, sup)?;
    let detail = match first {
        None => format!("{} members, no violations", sub.count()),
        Some(n) => format!("{bad} violations, first at n = {n}"),
    };
    Ok(Check::new(name, bad == 0, (sub.lo(), sub.hi()), mode, detail))
}

const SYNDETIC_NOTE: &str = "gap profiles are windowed syndeticity evidence; dynamical syndeticity is not certified here";

pub(super) fn run(exp: &Experiment, report: &mut Report) -> Result<(), LabError> {
    match exp {
        Experiment::Prop51(p) => prop51(p, report),
        Experiment::Example121(p) => example121(p, report),
        Experiment::ThmBRotation(p) => thm_b(p, report),
        Experiment::ThmCProgression(p) => thm_c(p, report),
        Experiment::ThmDTotal(p) => thm_d(p, report),
        Experiment::ThmAChacon(p) => thm_a(p, report),
        Experiment::Lemma21Demo(p) => lemma21(p, report),
        Experiment::Lemma31Identity(p) => lemma31(p, report),
        Experiment::ClosedFormCheck(p) => closed_form(p, report),
        Experiment::Lemma65Density(p) => lemma65(p, report),
        Experiment::SpectrumDivCheck(p) => spectrum_div(p, report),
        Experiment::ChangePolyCheck(p) => change_poly(p, report),
    }
}

/// `Q`, `B` and `B \ Q` on `[lo, hi]`.
pub(crate) fn prop51_sets(alpha: Scalar, eps: Ratio<u64>, lo: i64, hi: i64) -> Result<(WindowSet, WindowSet, WindowSet), LabError> {
    let q = gen_poly_small(alpha, &IntPoly::monomial(1, 2), eps, lo, hi)?;
    let b = gen_poly_small(alpha, &IntPoly::identity(), eps / 8, lo, hi)?;
    let d = b.difference(&q)?;
    Ok((q, b, d))
}

fn prop51(p: &Prop51, report: &mut Report) -> Result<(), LabError> {
    let (lo, hi) = p.window;
    let eps = p.eps.0;
    let (q, b, d) = timed(report, "bohr sets", || prop51_sets(p.alpha, eps, lo, hi))?;
    push_set(report, "Q", &q, ENUM, &[])?;
    push_set(report, "B", &b, ENUM, &[])?;
    push_set(report, "B_minus_Q", &d, ENUM, &[1, 10])?;

    // second differences of the fiber coordinate along (0, n, 2n) equal n^2 alpha
    let r = Scalar::fixed(INV_SQRT2_BITS).scale_by(*eps.numer(), 4 * *eps.denom())?;
    let arc = CircleArc::centered(r)?;
    let u = Region::Box(vec![arc, arc]);
    let mode = Mode::Sample(p.resolution);
    let rq = ReturnQuery {
        sys: SystemSpec::Skew2(p.alpha),
        regions: vec![u.clone(), u.clone(), u],
        tuple: "(0, n, 2n)".parse()?,
        lo,
        hi,
        mode,
    };
    let rr = timed(report, "sample return set", || Ok(return_set(&rq)?))?;
    let ms = mode_str(mode);
    push_set(report, "R_UUU", &rr.set, &ms, &[])?;
    report.checks.push(subset_check("R(U,U,U) within Q", &rr.set, &q, &ms)?.with_ambiguity(rr.ambiguity_count));
    report.checks.push(Check::new("B \\ Q nonempty", !d.is_empty(), p.window, ENUM, gap_text(&d)));
    if let Some(g) = d.gap_profile().syndeticity_bound() {
        value(report, "B_minus_Q.syndeticity_bound", g, p.window, ENUM);
    }

    if p.doubling {
        let len = hi - lo + 1;
        let hi2 = lo.checked_add(2 * len - 1).ok_or_else(|| LabError::Invalid("doubled window overflows".into()))?;
        let (_, _, d2) = timed(report, "doubled window", || prop51_sets(p.alpha, eps, lo, hi2))?;
        let (g1, g2) = (d.gap_profile(), d2.gap_profile());
        let ok = !g1.gap_undefined && g1.max_internal_gap == g2.max_internal_gap;
        report.checks.push(Check::new(
            "B \\ Q max gap stable under doubling",
            ok,
            (lo, hi2),
            ENUM,
            format!("{} on [{lo}, {hi}], {} on [{lo}, {hi2}]", g1.max_internal_gap, g2.max_internal_gap),
        ));
    }

    let v = Region::Box(vec![
        CircleArc::centered(Scalar::Rational(Rational::new(
            *eps.numer() as i128,
            8 * *eps.denom() as i128,
        )?))?,
        CircleArc::open(frac_scalar(eps)?, frac_scalar(Ratio::from_integer(1) - eps)?)?,
    ]);
    let origin = Point::torus(vec![Scalar::zero(), Scalar::zero()]);
    let vs = timed(report, "visit set", || Ok(visit_set(&SystemSpec::SkewS(p.alpha), &origin, &v, lo, hi)?))?;
    push_set(report, "visits_S", &vs.set, "exact", &[])?;
    report.checks.push(subset_check("visit set of S within B \\ Q", &vs.set, &d, "exact")?.with_ambiguity(vs.ambiguity_count));
    report.notes.push(SYNDETIC_NOTE.into());
    Ok(())
}

fn frac_scalar(r: Ratio<u64>) -> Result<Scalar, LabError> {
    Ok(Scalar::rational(*r.numer() as i128, *r.denom() as i128)?)
}

fn example121(p: &Example121, report: &mut Report) -> Result<(), LabError> {
    let mut gaps = Vec::new();
    for &(lo, hi) in &p.ladder {
        let s = timed(report, &format!("window [{lo}, {hi}]"), || Ok(gen_example121(lo, hi)?))?;
        let g = s.gap_profile();
        report.checks.push(Check::new(
            "max gap",
            !g.gap_undefined && g.max_internal_gap == p.expected_max_gap,
            (lo, hi),
            ENUM,
            format!("{} (expected {})", g.max_internal_gap, p.expected_max_gap),
        ));
        push_set(report, &format!("example_{lo}_{hi}"), &s, ENUM, &[])?;
        gaps.push(g.max_internal_gap);
    }
    let (lo, hi) = (p.ladder[0].0, p.ladder[p.ladder.len() - 1].1);
    report.checks.push(Check::new(
        "gap profile stable across the ladder",
        gaps.windows(2).all(|w| w[0] == w[1]),
        (lo, hi),
        ENUM,
        format!("{gaps:?}"),
    ));
    report.notes.push("syndetic on every window, yet not dynamically syndetic".into());
    Ok(())
}

/// Refuses unless the spectra are known to be disjoint.
fn disjointness_gate(report: &mut Report, what: &str, g1: &EigenGroup, g2: &EigenGroup) -> Result<(), LabError> {
    match shares_nontrivial_eigenvalue(g1, g2) {
        Shared::No => {
            report.checks.push(Check::new(&format!("{what} disjoint"), true, (0, 0), "spectral", format!("{g1} and {g2}")));
            Ok(())
        }
        Shared::Yes { witness } => {
            Err(LabError::Refused(format!("{what}: {g1} and {g2} share the eigenvalue {witness}")))
        }
        Shared::Unknown { bound } => Err(LabError::Refused(format!(
            "{what}: cannot decide whether {g1} and {g2} share an eigenvalue (multipliers up to {bound})"
        ))),
    }
}

fn half_window(w: Window) -> Window {
    (w.0, w.0 + (w.1 - w.0) / 2)
}

fn stability_check(name: &str, small: &WindowSet, large: &WindowSet, mode: &str) -> Check {
    let (a, b) = (small.gap_profile(), large.gap_profile());
    let detail = format!(
        "{} on [{}, {}], {} on [{}, {}]",
        a.max_internal_gap,
        small.lo(),
        small.hi(),
        b.max_internal_gap,
        large.lo(),
        large.hi()
    );
    Check::info(name, (large.lo(), large.hi()), mode, detail)
}

fn thm_b(p: &ThmBRotation, report: &mut Report) -> Result<(), LabError> {
    let gx = eigen_group(&p.system)?;
    let gy = eigen_group(&p.y_system)?;
    disjointness_gate(report, "spectra of X and Y", &gx, &gy)?;
    let (lo, hi) = p.window;
    let ms = mode_str(p.mode);
    let compute = |lo: i64, hi: i64| -> Result<(WindowSet, u64), LabError> {
        let r = return_set(&ReturnQuery {
            sys: p.system.clone(),
            regions: p.regions.clone(),
            tuple: p.tuple.clone(),
            lo,
            hi,
            mode: p.mode,
        })?;
        let v = visit_set(&p.y_system, &p.y_point, &p.y_region, lo, hi)?;
        Ok((r.set.intersect(&v.set)?, r.ambiguity_count + v.ambiguity_count))
    };
    let (inter, amb) = timed(report, "intersection", || compute(lo, hi))?;
    push_set(report, "R_cap_visits", &inter, &ms, &[])?;
    report.checks.push(Check::new("intersection nonempty", !inter.is_empty(), p.window, &ms, gap_text(&inter)).with_ambiguity(amb));
    let (h_lo, h_hi) = half_window(p.window);
    let (half, _) = timed(report, "half window", || compute(h_lo, h_hi))?;
    report.checks.push(stability_check("intersection max gap, half vs full window", &half, &inter, &ms));
    report.notes.push(SYNDETIC_NOTE.into());
    Ok(())
}

fn thm_c(p: &ThmCProgression, report: &mut Report) -> Result<(), LabError> {
    let ms = mode_str(p.mode);
    let compute = |lo: i64, hi: i64| -> Result<(WindowSet, u64), LabError> {
        let r = return_set_diag(&p.system, &p.region, p.d, &p.poly, lo, hi, p.mode)?;
        let ap = WindowSet::progression(lo, hi, p.k, p.j)?;
        Ok((r.set.intersect(&ap)?, r.ambiguity_count))
    };
    let (inter, amb) = timed(report, "diagonal return set", || compute(p.window.0, p.window.1))?;
    push_set(report, "R_cap_progression", &inter, &ms, &[])?;
    report.checks.push(
        Check::new(&format!("intersection with {}Z + {} nonempty", p.k, p.j), !inter.is_empty(), p.window, &ms, gap_text(&inter))
            .with_ambiguity(amb),
    );
    let (h_lo, h_hi) = half_window(p.window);
    let (half, _) = timed(report, "half window", || compute(h_lo, h_hi))?;
    report.checks.push(stability_check("intersection max gap, half vs full window", &half, &inter, &ms));
    report.notes.push(SYNDETIC_NOTE.into());
    Ok(())
}

fn thm_d(p: &ThmDTotal, report: &mut Report) -> Result<(), LabError> {
    let g = eigen_group(&p.system)?;
    for k in 2..=p.max_k {
        disjointness_gate(report, &format!("spectrum and Z/{k}"), &g, &EigenGroup::cyclic(k))?;
    }
    let ms = mode_str(p.mode);
    let (lo, hi) = p.window;
    // every progression kZ + j must still return
    let mut amb = 0;
    for k in 2..=p.max_k {
        for j in 0..k {
            let q = p.poly.compose_ap(&BigInt::from(k), &BigInt::from(j))?;
            let r = timed(report, &format!("progression {k}Z + {j}"), || {
                Ok(return_set_diag(&p.system, &p.region, p.d, &q, lo, hi, p.mode)?)
            })?;
            amb += r.ambiguity_count;
            if r.set.is_empty() {
                return Err(LabError::Refused(format!(
                    "no return along p({k}n + {j}) on [{lo}, {hi}]; total minimality is not supported"
                )));
            }
        }
    }
    report.checks.push(
        Check::new("returns along every p(kn + j)", true, p.window, &ms, format!("k up to {}", p.max_k)).with_ambiguity(amb),
    );
    let main = timed(report, "diagonal return set", || Ok(return_set_diag(&p.system, &p.region, p.d, &p.poly, lo, hi, p.mode)?))?;
    push_set(report, "R_diag", &main.set, &ms, &[])?;
    report.checks.push(
        Check::new("return set nonempty", !main.set.is_empty(), p.window, &ms, gap_text(&main.set)).with_ambiguity(main.ambiguity_count),
    );
    let (h_lo, h_hi) = half_window(p.window);
    let half = timed(report, "half window", || Ok(return_set_diag(&p.system, &p.region, p.d, &p.poly, h_lo, h_hi, p.mode)?))?;
    report.checks.push(stability_check("return set max gap, half vs full window", &half.set, &main.set, &ms));
    report.notes.push(SYNDETIC_NOTE.into());
    Ok(())
}

fn thm_a(p: &ThmAChacon, report: &mut Report) -> Result<(), LabError> {
    let sys = SystemSpec::chacon(p.level)?;
    let mode = Mode::Sample(p.resolution);
    let ms = mode_str(mode);
    let mut runs = Vec::new();
    for &(lo, hi) in &p.ladder {
        let r = timed(report, &format!("window [{lo}, {hi}]"), || {
            Ok(return_set(&ReturnQuery { sys: sys.clone(), regions: p.regions.clone(), tuple: p.tuple.clone(), lo, hi, mode })?)
        })?;
        report.checks.push(
            Check::new("return set nonempty", !r.set.is_empty(), (lo, hi), &ms, gap_text(&r.set)).with_ambiguity(r.ambiguity_count),
        );
        let comp = r.set.complement();
        let run = comp.pws_profile(p.n)?;
        value(report, &format!("complement.run_N{}.[{lo},{hi}]", p.n), run.longest_covered_run, (lo, hi), &ms);
        push_set(report, &format!("R_{lo}_{hi}"), &r.set, &ms, &[])?;
        push_set(report, &format!("complement_{lo}_{hi}"), &comp, &ms, &[p.n])?;
        runs.push(run.longest_covered_run);
    }
    let (lo, hi) = (p.ladder[0].0, p.ladder[p.ladder.len() - 1].1);
    let bounded = runs.iter().all(|&r| r <= runs[0]);
    let detail = format!("longest covered run of the complement at N = {}: {runs:?}", p.n);
    let name = "complement runs bounded across the ladder";
    report.checks.push(if bounded { Check::new(name, true, (lo, hi), &ms, detail) } else { Check::info(name, (lo, hi), &ms, detail) });
    report.notes.push(
        "sampled return sets are inner approximations, so complement runs are upper estimates; a bounded trend is evidence only".into(),
    );
    Ok(())
}

fn lemma21(p: &Lemma21Demo, report: &mut Report) -> Result<(), LabError> {
    let (lo, hi) = p.window;
    let len = hi - lo + 1;
    let a = WindowSet::full(lo, hi)?;
    let b = a.difference(&WindowSet::new(lo, hi, &p.removed)?)?;
    let m = p.modulus as i64;
    let gens = (0..m)
        .map(|skip| WindowSet::from_predicate(lo - len, hi + len, |n| n.rem_euclid(m) != skip))
        .collect::<Result<Vec<_>, _>>()?;
    let fam = FamilySpec::new(gens)?;
    let rep = timed(report, "difference criterion", || Ok(lemma21_check(&a, &b, &fam, &p.n_list)?))?;
    let (ok, detail) = match &rep.status {
        Lemma21Status::Ok => (true, "every hypothesis holds".to_string()),
        Lemma21Status::Violated { reason, element } => (false, format!("{reason} (element {element:?})")),
    };
    report.checks.push(Check::new("hypotheses hold", ok, rep.window, ENUM, detail));
    let removed = p.removed.iter().collect::<std::collections::BTreeSet<_>>().len() as u64;
    for run in &rep.runs {
        let bound = (run.translate_count + 1) * removed;
        report.checks.push(Check::new(
            &format!("difference runs at N = {}", run.translate_count),
            run.longest_covered_run <= bound,
            rep.window,
            ENUM,
            format!("longest covered run {} (bound {bound})", run.longest_covered_run),
        ));
    }
    value(report, "difference_count", rep.difference_count, rep.window, ENUM);
    Ok(())
}

fn rng_for(report: &Report) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(report.seed.unwrap_or(super::DEFAULT_SEED))
}

fn random_rational<R: Rng>(rng: &mut R, max_den: i128) -> Scalar {
    let d = rng.gen_range(1..=max_den);
    Scalar::rational(rng.gen_range(0..d), d).expect("small")
}

fn random_poly<R: Rng>(rng: &mut R, max_degree: usize, coeff_max: i64, zero_constant: bool) -> IntPoly {
    let deg = rng.gen_range(1..=max_degree);
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-coeff_max..=coeff_max)).collect();
    if zero_constant {
        c[0] = 0;
    }
    if c[deg] == 0 {
        c[deg] = 1;
    }
    IntPoly::new(c)
}

/// A random rotation return-set instance: system, regions and tuple.
pub(crate) fn random_rotation_instance<R: Rng>(rng: &mut R) -> (SystemSpec, Vec<Region>, PolyTuple) {
    let dim = rng.gen_range(1..=2);
    let alpha: Vec<Scalar> =
        (0..dim).map(|_| if rng.gen_bool(0.75) { Scalar::fixed(rng.gen()) } else { random_rational(rng, 40) }).collect();
    let len = rng.gen_range(2..=3);
    let regions = (0..len)
        .map(|_| {
            Region::Box(
                (0..dim)
                    .map(|_| {
                        let a = rng.gen_range(0..30);
                        let b = (a + rng.gen_range(1..=12)) % 30;
                        let at = |v: i128| Scalar::rational(v, 30).expect("small");
                        CircleArc::open(at(a), at(b)).expect("proper arc")
                    })
                    .collect(),
            )
        })
        .collect();
    let mut entries = vec![IntPoly::zero()];
    while entries.len() < len {
        entries.push(random_poly(rng, 2, 4, true));
    }
    (SystemSpec::TorusRot(alpha), regions, PolyTuple::new(entries).expect("nonempty"))
}

fn lemma31(p: &Lemma31Identity, report: &mut Report) -> Result<(), LabError> {
    let mut rng = rng_for(report);
    let (lo, hi) = p.window;
    let (mut mismatches, mut ambiguous, mut failed) = (0u64, 0u64, 0u32);
    let t = Instant::now();
    for i in 0..p.instances {
        let (sys, regions, tuple) = random_rotation_instance(&mut rng);
        let a = rng.gen_range(-p.a_max..=p.a_max);
        let r = lemma31_harness(&sys, &regions, &tuple, a, lo, hi)?;
        mismatches += r.mismatch_count;
        ambiguous += r.ambiguity_count;
        if !r.holds() {
            failed += 1;
            if failed <= 5 {
                report.notes.push(format!("instance {i}: {sys} {tuple} a = {a}: mismatches at {:?}", r.mismatches));
            }
        }
    }
    report.timings.push(Timing { phase: "instances".into(), elapsed: t.elapsed() });
    report.checks.push(
        Check::new(
            "translation identity",
            mismatches == 0,
            p.window,
            "exact",
            format!("{} instances, {failed} failing, {mismatches} mismatches", p.instances),
        )
        .with_ambiguity(ambiguous),
    );
    Ok(())
}

/// A random point of the right shape: rational coordinates with
/// denominators up to 97, or arbitrary fixed-point coordinates.
pub(crate) fn random_point<R: Rng>(sys: &SystemSpec, rng: &mut R, rational: bool) -> Point {
    let coord = |rng: &mut R| if rational { random_rational(rng, 97) } else { Scalar::fixed(rng.gen()) };
    match sys {
        SystemSpec::Cyclic(k) => Point::Residue(rng.gen_range(0..*k)),
        SystemSpec::TorusRot(a) => Point::Torus((0..a.len()).map(|_| coord(rng)).collect()),
        SystemSpec::Skew2(_) | SystemSpec::SkewS(_) => Point::Torus(vec![coord(rng), coord(rng)]),
        SystemSpec::Chacon(w) => Point::WordIndex(rng.gen_range(0..w.len())),
        SystemSpec::Product(a, b) => Point::pair(random_point(a, rng, rational), random_point(b, rng, rational)),
        SystemSpec::Power(a, _) => random_point(a, rng, rational),
        SystemSpec::Diagonal(a, d) => Point::Tuple((0..=*d).map(|_| random_point(a, rng, rational)).collect()),
    }
}

/// Counts the `n` in `[0, n_max]` where `n` single steps from `x` and
/// the closed form disagree; returns the first such `n` too.
pub(crate) fn closed_form_mismatches(sys: &SystemSpec, x: &Point, n_max: u32) -> Result<(u64, Option<u32>), LabError> {
    let mut scalars = sys.scalars();
    scalars.extend(x.scalars());
    let ring = common_ring(scalars.iter(), &[]);
    let c = Compiled::new(sys, ring)?;
    let start = c.flatten_point(x)?;
    let mut y = x.clone();
    let mut st = vec![0u128; c.width()];
    let (mut bad, mut first) = (0u64, None);
    for n in 0..=n_max {
        st.copy_from_slice(&start);
        c.apply(&mut st, &Steps::Small(n as i128))?;
        if c.flatten_point(&y)? != st {
            bad += 1;
            first.get_or_insert(n);
        }
        y = step(sys, &y)?;
    }
    Ok((bad, first))
}

fn closed_form(p: &ClosedFormCheck, report: &mut Report) -> Result<(), LabError> {
    let mut rng = rng_for(report);
    for sys in &p.systems {
        if matches!(sys, SystemSpec::Chacon(_)) {
            return Err(LabError::Invalid("closedform_check covers rotation-type systems only".into()));
        }
        let all_rational = sys.scalars().iter().all(|s| !s.is_fixed());
        let kinds = p.start_kinds.iter().filter(|k| all_rational || **k == StartKind::Fixed);
        for &kind in kinds {
            let rational = kind == StartKind::Rational;
            let label = if rational { "rational" } else { "fixed" };
            let (mut bad, mut first) = (0u64, None);
            let t = Instant::now();
            for _ in 0..p.starts {
                let x = random_point(sys, &mut rng, rational);
                let (b, f) = closed_form_mismatches(sys, &x, p.n_max)?;
                bad += b;
                if first.is_none() {
                    first = f.map(|n| (x.to_string(), n));
                }
            }
            report.timings.push(Timing { phase: format!("{sys} {label}"), elapsed: t.elapsed() });
            let detail = match first {
                None => format!("{} starts, no mismatches", p.starts),
                Some((x, n)) => format!("{bad} mismatches, first from {x} at n = {n}"),
            };
            report.checks.push(Check::new(&format!("{sys} ({label} starts)"), bad == 0, (0, p.n_max as i64), "closed form", detail));
        }
    }
    Ok(())
}

fn lemma65(p: &Lemma65Density, report: &mut Report) -> Result<(), LabError> {
    let f1 = FourierData::from_triples(&p.f1)?;
    let f2 = FourierData::from_triples(&p.f2)?;
    let (lo, hi) = p.window;
    let mode = "fourier";
    let d0 = timed(report, "D_0", || Ok(crate::spectral::d_eps_set(&f1, &f2, &p.alpha, Ratio::from_integer(0), lo, hi)?))?;
    push_set(report, "D_0", &d0, mode, &[])?;
    let mut prev: Option<WindowSet> = None;
    let mut densities = Vec::new();
    for e in &p.eps {
        let de = timed(report, &format!("D_{e}"), || Ok(crate::spectral::d_eps_set(&f1, &f2, &p.alpha, e.0, lo, hi)?))?;
        report.checks.push(subset_check(&format!("D_{e} within D_0"), &de, &d0, mode)?);
        if let Some(prev) = &prev {
            report.checks.push(subset_check(&format!("D_{e} contains the previous level"), prev, &de, mode)?);
        }
        let dens = d0.difference(&de)?.banach_density_estimate(p.block)?;
        value(report, &format!("density(D_0 \\ D_{e})"), ratio_str(dens), p.window, mode);
        densities.push(dens);
        push_set(report, &format!("D_{e}"), &de, mode, &[])?;
        prev = Some(de);
    }
    report.checks.push(Check::new(
        "density of D_0 \\ D_eps nonincreasing",
        densities.windows(2).all(|w| w[1] <= w[0]),
        p.window,
        mode,
        densities.iter().map(|d| ratio_str(*d)).collect::<Vec<_>>().join(", "),
    ));
    let last = *densities.last().expect("nonempty ladder");
    value(report, "terminal_density", format!("{} ({:.6})", ratio_str(last), *last.numer() as f64 / *last.denom() as f64), p.window, mode);
    value(report, "product_bound", format!("{:.6}", f1.product_bound(&f2)), p.window, mode);
    Ok(())
}

fn spectrum_div(p: &SpectrumDivCheck, report: &mut Report) -> Result<(), LabError> {
    let (mut cases, mut bad) = (0u64, Vec::new());
    let t = Instant::now();
    for m in 2..=p.max_m {
        let whole = SystemSpec::Cyclic(m);
        let want = eigen_group(&whole)?;
        for k in (2..=m).filter(|k| m % k == 0) {
            cases += 1;
            // T^k splits into k cyclic components of size m/k
            let power = SystemSpec::power(whole.clone(), k as i64);
            let orbit_ok = (0..k).all(|i| {
                let x = Point::Residue(i);
                let mut y = x.clone();
                let mut size = 0u64;
                loop {
                    y = step(&power, &y).expect("residue point");
                    size += 1;
                    if y == x {
                        break;
                    }
                }
                size == m / k
            });
            let got = spectrum_div_k(&eigen_group(&SystemSpec::Cyclic(m / k))?, k)?;
            if !orbit_ok || got != want {
                bad.push(format!("m = {m}, k = {k}: got {got}, want {want}"));
            }
        }
    }
    report.timings.push(Timing { phase: "cases".into(), elapsed: t.elapsed() });
    let detail = if bad.is_empty() { format!("{cases} cases agree") } else { format!("{} of {cases} disagree: {}", bad.len(), bad[0]) };
    report.checks.push(Check::new("spectrum of T from the spectrum of T^k", bad.is_empty(), (2, p.max_m as i64), "exact", detail));
    Ok(())
}

fn change_poly(p: &ChangePolyCheck, report: &mut Report) -> Result<(), LabError> {
    let mut rng = rng_for(report);
    let (lo, hi) = p.window;
    let (mut bad, mut first) = (0u64, None);
    let t = Instant::now();
    for _ in 0..p.instances {
        let poly = random_poly(&mut rng, p.max_degree, p.coeff_max, true);
        let m = BigInt::from(rng.gen_range(1..=p.m_max));
        let a = loop {
            let a = rng.gen_range(-p.ab_max..=p.ab_max);
            if a != 0 {
                break BigInt::from(a);
            }
        };
        let b = BigInt::from(rng.gen_range(-p.ab_max..=p.ab_max));
        let (q, _) = poly.change_poly(&m, &a, &b)?;
        for n in lo..=hi {
            let n = BigInt::from(n);
            if &m * q.eval(&n) != poly.eval(&(&m * (&a * &n + &b))) {
                bad += 1;
                first.get_or_insert_with(|| format!("p = {poly}, M = {m}, a = {a}, b = {b}, n = {n}"));
            }
        }
    }
    report.timings.push(Timing { phase: "instances".into(), elapsed: t.elapsed() });
    let detail = match first {
        None => format!("{} instances, no mismatches", p.instances),
        Some(f) => format!("{bad} mismatches, first {f}"),
    };
    report.checks.push(Check::new("M q(n) = p(M(an + b))", bad == 0, p.window, "exact", detail));
    Ok(())
}
