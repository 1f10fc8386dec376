use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{Report, SetReport};

/// Sets with more members than this are summarized by their profiles.
pub const INLINE_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}; expected text, csv or json")),
        }
    }
}

/// Human-readable summary; contains no timings.
pub fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", r.scenario);
    let _ = writeln!(s, "kind: {}", r.kind);
    if let Some(seed) = r.seed {
        let _ = writeln!(s, "seed: {seed}");
    }
    let _ = writeln!(s, "parameters: {}", r.parameters);
    let _ = writeln!(s, "\nchecks:");
    for c in &r.checks {
        let _ = write!(s, "  {:<9} {} [{}, {}] {}: {}", c.verdict.to_string(), c.name, c.window.0, c.window.1, c.mode, c.detail);
        if c.ambiguity_count > 0 {
            let _ = write!(s, " ({} ambiguous)", c.ambiguity_count);
        }
        s.push('\n');
    }
    if !r.sets.is_empty() {
        let _ = writeln!(s, "\nsets:");
        for set in &r.sets {
            let g = &set.gap;
            let _ = write!(s, "  {} [{}, {}] {}: {} members", set.name, set.window.0, set.window.1, set.mode, set.count);
            if !g.gap_undefined {
                let _ = write!(s, ", max gap {}", g.max_internal_gap);
            }
            for p in &set.pws {
                let _ = write!(s, ", run(N={}) {} at {}", p.translate_count, p.longest_covered_run, p.run_location);
            }
            s.push('\n');
        }
    }
    if !r.values.is_empty() {
        let _ = writeln!(s, "\nvalues:");
        for (k, v) in &r.values {
            let _ = writeln!(s, "  {k} = {v}");
        }
    }
    if !r.notes.is_empty() {
        let _ = writeln!(s, "\nnotes:");
        for n in &r.notes {
            let _ = writeln!(s, "  - {n}");
        }
    }
    let _ = writeln!(
        s,
        "\nresult: {} (ambiguity count {})",
        if r.passed() { "PASS" } else { "FAIL" },
        r.ambiguity_count()
    );
    s
}

fn file_safe(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn csv_err(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

fn write_checks(r: &Report, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "verdict", "window_lo", "window_hi", "mode", "ambiguity_count", "detail"])?;
    for c in &r.checks {
        w.write_record([
            c.name.clone(),
            c.verdict.to_string(),
            c.window.0.to_string(),
            c.window.1.to_string(),
            c.mode.clone(),
            c.ambiguity_count.to_string(),
            c.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_profiles(r: &Report, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "set",
        "window_lo",
        "window_hi",
        "mode",
        "count",
        "gap_undefined",
        "max_internal_gap",
        "first_element_offset",
        "last_element_offset",
        "translate_count",
        "longest_covered_run",
        "run_location",
    ])?;
    for s in &r.sets {
        let g = &s.gap;
        let head = [
            s.name.clone(),
            s.window.0.to_string(),
            s.window.1.to_string(),
            s.mode.clone(),
            s.count.to_string(),
            g.gap_undefined.to_string(),
            g.max_internal_gap.to_string(),
            g.first_element_offset.to_string(),
            g.last_element_offset.to_string(),
        ];
        if s.pws.is_empty() {
            w.write_record(head.iter().cloned().chain(["".into(), "".into(), "".into()]))?;
        }
        for p in &s.pws {
            w.write_record(head.iter().cloned().chain([
                p.translate_count.to_string(),
                p.longest_covered_run.to_string(),
                p.run_location.to_string(),
            ]))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Members only, one `n,1` row each.
fn write_members(set: &SetReport, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "membership"])?;
    let members: Vec<i64> = match (&set.elements, &set.set) {
        (Some(e), _) => e.clone(),
        (None, Some(s)) => s.elements(),
        (None, None) => Vec::new(),
    };
    for n in members {
        w.write_record([n.to_string(), "1".into()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the report under `prefix` and returns the files written.
///
/// CSV output lists each set with at most [`INLINE_LIMIT`] members in its
/// own file; larger sets are dumped only when `raw` is set.
pub fn emit(r: &Report, format: Format, prefix: &Path, raw: bool) -> io::Result<Vec<PathBuf>> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut out = Vec::new();
    match format {
        Format::Text => {
            let p = with_suffix(prefix, ".txt");
            fs::write(&p, render_text(r))?;
            out.push(p);
        }
        Format::Json => {
            let p = with_suffix(prefix, ".json");
            let mut text = serde_json::to_string_pretty(r).map_err(io::Error::from)?;
            text.push('\n');
            fs::write(&p, text)?;
            out.push(p);
        }
        Format::Csv => {
            let p = with_suffix(prefix, ".checks.csv");
            write_checks(r, &p).map_err(csv_err)?;
            out.push(p);
            let p = with_suffix(prefix, ".profiles.csv");
            write_profiles(r, &p).map_err(csv_err)?;
            out.push(p);
            for s in r.sets.iter().filter(|s| raw || s.count <= INLINE_LIMIT) {
                let p = with_suffix(prefix, &format!(".{}.csv", file_safe(&s.name)));
                write_members(s, &p).map_err(csv_err)?;
                out.push(p);
            }
        }
    }
    Ok(out)
}
