//! Persistence and export: versioned CSV schemas, the count-curve cache
//! file, run manifests, and the compact text syntax for radius families
//! and configuration files.
//!
//! Counts round-trip bit-exactly because the cache stores integer norms and
//! counts; reals print with 17 significant digits, enough to reparse the
//! exact f64.

use std::fmt::Write as _;
use std::path::Path;

use crate::conditions::{ConditionReport, Lemma41Report};
use crate::error::{Error, Result};
use crate::hyperbolic::HPoint;
use crate::lattice::{CountCurve, GroupKind, ShellBoundReport};
use crate::targets::{
    ExperimentReport, RadiusFamily, RadiusSequence, TrialRecord, TwoBallEstimate,
};

/// 17 significant digits: round-trips every finite f64.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a temp file and rename, so readers never observe a torn file.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(parent)
        .map_err(|e| Error::Input(format!("create {}: {e}", parent.display())))?;
    let tmp = parent.join(format!(
        ".tmp_{}_{}",
        std::process::id(),
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    ));
    std::fs::write(&tmp, contents)
        .map_err(|e| Error::Input(format!("write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Input(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// fully resolved parameters, flag name -> value
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub wall_clock_unix_ms: u128,
    pub cache_ids: Vec<String>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("manifest_version=1\n");
        let _ = writeln!(out, "tool_version={}", self.tool_version);
        let _ = writeln!(out, "command={}", self.command);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed={seed}");
        }
        let _ = writeln!(out, "wall_clock_unix_ms={}", self.wall_clock_unix_ms);
        for id in &self.cache_ids {
            let _ = writeln!(out, "cache={id}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k}={v}");
        }
        out
    }
}

const CACHE_HEADER: &str = "shrinktarget-count-cache v1";

/// Serialize a count curve: header, metadata, then `norm,count` rows
/// (cumulative counts). Integers only, so the round trip is bit-exact.
pub fn render_count_cache(curve: &CountCurve, grid: f64) -> String {
    let mut out = String::new();
    out.push_str(CACHE_HEADER);
    out.push('\n');
    let _ = writeln!(out, "group={}", curve.kind().name());
    let _ = writeln!(out, "tmax={}", format_real(curve.t_max()));
    let _ = writeln!(out, "grid={}", format_real(grid));
    let _ = writeln!(out, "rows={}", curve.norm_counts().len());
    for &(m, n) in curve.norm_counts() {
        let _ = writeln!(out, "{m},{n}");
    }
    out
}

/// Parse a cache file back into a curve and its grid spacing.
pub fn parse_count_cache(text: &str) -> Result<(CountCurve, f64)> {
    let mut lines = text.lines();
    if lines.next() != Some(CACHE_HEADER) {
        return Err(Error::Input("not a count cache (bad header)".into()));
    }
    let mut group = None;
    let mut t_max = None;
    let mut grid = None;
    let mut rows_expected = None;
    let mut rows = Vec::new();
    for line in lines {
        if let Some((key, value)) = line.split_once('=') {
            match key {
                "group" => group = Some(GroupKind::parse(value)?),
                "tmax" => t_max = value.parse::<f64>().ok(),
                "grid" => grid = value.parse::<f64>().ok(),
                "rows" => rows_expected = value.parse::<usize>().ok(),
                other => return Err(Error::Input(format!("unknown cache key '{other}'"))),
            }
        } else if let Some((m, n)) = line.split_once(',') {
            let m = m
                .parse::<i64>()
                .map_err(|_| Error::Input(format!("bad norm '{m}'")))?;
            let n = n
                .parse::<u64>()
                .map_err(|_| Error::Input(format!("bad count '{n}'")))?;
            rows.push((m, n));
        } else if !line.trim().is_empty() {
            return Err(Error::Input(format!("unparseable cache line '{line}'")));
        }
    }
    let group = group.ok_or_else(|| Error::Input("cache missing group".into()))?;
    let t_max = t_max.ok_or_else(|| Error::Input("cache missing tmax".into()))?;
    let grid = grid.ok_or_else(|| Error::Input("cache missing grid".into()))?;
    if rows_expected != Some(rows.len()) {
        return Err(Error::Input("cache row count mismatch".into()));
    }
    Ok((CountCurve::from_parts(group, t_max, rows)?, grid))
}

/// CSV of cumulative counts on a regular t-grid up to `t_hi`: `t,N`.
pub fn count_csv(curve: &CountCurve, grid: f64, t_hi: f64) -> Result<String> {
    if !(grid > 0.0) {
        return Err(Error::Input(format!("grid spacing {grid} not positive")));
    }
    let top = t_hi.min(curve.t_max());
    let mut out = String::from("# shrinktarget count v1\nt,N\n");
    let steps = (top / grid).floor() as u64;
    for k in 0..=steps {
        let t = k as f64 * grid;
        let _ = writeln!(out, "{},{}", format_real(t), curve.count(t)?);
    }
    Ok(out)
}

/// CSV of the shell-bound sweep: `h,i,r,count,ratio`. Regime membership and
/// flags stay in the text summary; the columns are the pinned schema.
pub fn shells_csv(report: &ShellBoundReport) -> String {
    let mut out = String::from("# shrinktarget shells v1\nh,i,r,count,ratio\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_real(report.h),
            row.i,
            format_real(row.r),
            row.count,
            format_real(row.ratio),
        );
    }
    out
}

/// CSV of per-trial hit data: `trial,seed,S_T,first_hit,last_hit`.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out =
        String::from("# shrinktarget target-trials v1\ntrial,seed,S_T,first_hit,last_hit\n");
    for r in records {
        let first = r.first_hit().map(|t| t.to_string()).unwrap_or_default();
        let last = r.last_hit().map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{first},{last}", r.trial, r.seed, r.s_t());
    }
    out
}

/// CSV of the aggregated report:
/// `T,I_T,mean_S,mean_ratio,second_moment,frac_late_hit,se_mean,se_m2`.
pub fn target_report_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(
        "# shrinktarget target-report v1\nT,I_T,mean_S,mean_ratio,second_moment,frac_late_hit,se_mean,se_m2\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.horizon,
            format_real(r.i_t),
            format_real(r.mean_s),
            format_real(r.mean_ratio),
            format_real(r.second_moment_ratio),
            format_real(r.frac_late_hit),
            format_real(r.se_mean_s),
            format_real(r.se_second_moment),
        );
    }
    out
}

/// CSV of two-ball estimates: `d,r1,r2,h,gate,estimate,se,bound_ratio`.
pub fn twoball_csv(rows: &[(TwoBallEstimate, f64, f64, f64)]) -> String {
    let mut out =
        String::from("# shrinktarget twoball v1\nd,r1,r2,h,gate,estimate,se,bound_ratio\n");
    for (est, r1, r2, h) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_real(est.d),
            format_real(*r1),
            format_real(*r2),
            format_real(*h),
            est.gate_aligned as u8,
            format_real(est.estimate),
            format_real(est.se),
            format_real(est.bound_ratio),
        );
    }
    out
}

/// CSV of one condition's witness samples: `s,ratio`, preceded by a summary
/// comment line.
pub fn condition_csv(report: &ConditionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# shrinktarget conditions v1 condition={} verdict={} sup_ratio={} excluded={}",
        report.condition,
        report.verdict.as_str(),
        format_real(report.sup_ratio),
        report.excluded,
    );
    out.push_str("s,ratio\n");
    for &(s, ratio) in &report.witness {
        let _ = writeln!(out, "{s},{}", format_real(ratio));
    }
    out
}

/// Human-readable summary of a condition report.
pub fn condition_summary(report: &ConditionReport) -> String {
    let p = &report.params;
    let mut line = format!(
        "{}: {} (sup ratio {:.6e}, {} excluded",
        report.condition,
        report.verdict.as_str(),
        report.sup_ratio,
        report.excluded
    );
    if let Some(c0) = p.c0 {
        let _ = write!(line, ", C0={c0:.6e}");
    }
    if let Some(c1) = p.c1 {
        let _ = write!(line, ", C1={c1}");
    }
    if let Some(c2) = p.c2 {
        let _ = write!(line, ", C2={c2}");
    }
    line.push(')');
    line
}

/// Human-readable summary of the implication test.
pub fn lemma41_summary(report: &Lemma41Report) -> String {
    match report.first_violation {
        Some((s, rho)) => format!(
            "lemma41: VIOLATION at s={s} (rho={rho:.6e} > C3={:.6e}, threshold {})",
            report.c3, report.threshold
        ),
        None => format!(
            "lemma41: {} (C0={:.6e}, C3={:.6e}, threshold {})",
            report.base.verdict.as_str(),
            report.c0,
            report.c3,
            report.threshold
        ),
    }
}

/// Parse the compact radius-family syntax:
/// `powerlaw:C,alpha` | `powerlog:C,beta` | `const:r` | `table:v1;v2;...`.
pub fn parse_radius_spec(spec: &str, n: u32, cutoff: Option<u64>) -> Result<RadiusSequence> {
    let (name, args) = spec
        .split_once(':')
        .ok_or_else(|| Error::Input(format!("radius spec '{spec}' missing ':'")))?;
    let nums = |s: &str| -> Result<Vec<f64>> {
        s.split([',', ';'])
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("bad number '{p}' in radius spec")))
            })
            .collect()
    };
    let family = match name.to_ascii_lowercase().as_str() {
        "powerlaw" => {
            let v = nums(args)?;
            if v.len() != 2 {
                return Err(Error::Input("powerlaw takes C,alpha".into()));
            }
            RadiusFamily::PowerLaw {
                c: v[0],
                alpha: v[1],
            }
        }
        "powerlog" => {
            let v = nums(args)?;
            if v.len() != 2 {
                return Err(Error::Input("powerlog takes C,beta".into()));
            }
            RadiusFamily::PowerLog {
                c: v[0],
                beta: v[1],
            }
        }
        "const" | "constant" => {
            let v = nums(args)?;
            if v.len() != 1 {
                return Err(Error::Input("const takes a single radius".into()));
            }
            RadiusFamily::Constant { r: v[0] }
        }
        "table" => RadiusFamily::Table(nums(args)?),
        other => return Err(Error::Input(format!("unknown radius family '{other}'"))),
    };
    let seq = RadiusSequence::new(family, n)?;
    match cutoff {
        Some(c) => seq.with_cutoff(c),
        None => Ok(seq),
    }
}

/// Parse `x,y` upper half-plane coordinates.
pub fn parse_point(s: &str) -> Result<HPoint> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::Input(format!("point '{s}' must be 'x,y'")))?;
    let x = x
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("bad x in '{s}'")))?;
    let y = y
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("bad y in '{s}'")))?;
    HPoint::new(x, y)
}

/// Flat key=value configuration file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("config line {} is not key=value", idx + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
