use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::run::{RunOutput, TimeseriesRow};
use super::sweep::SweepReport;

pub const CSV_HEADER: &str = "t,J_M,theta_M,diameter,norm_drift,cross_ratio_drift";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Render rows as CSV with 17 significant digits.
pub fn timeseries_csv(rows: &[TimeseriesRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 120);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(r.t),
            num(r.j_m),
            opt(r.theta_m),
            num(r.diameter),
            num(r.norm_drift),
            opt(r.cross_ratio_drift)
        );
    }
    s
}

pub fn write_timeseries(rows: &[TimeseriesRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, timeseries_csv(rows)).map_err(io_err(path))
}

/// `run_<seed>_<kappa0>.csv` inside `dir`.
pub fn run_csv_path(dir: &Path, seed: u64, kappa0: f64) -> PathBuf {
    dir.join(format!("run_{seed}_{kappa0}.csv"))
}

/// `key=value` summary of one run, starting with the config echo.
pub fn run_summary(out: &RunOutput) -> String {
    let mut s = out.config.echo();
    run_body(&mut s, "", out);
    s
}

fn run_body(s: &mut String, prefix: &str, out: &RunOutput) {
    let _ = writeln!(s, "{prefix}init_threshold={}", num(out.init_threshold));
    let _ = writeln!(s, "{prefix}J_M_initial={}", num(out.rows[0].j_m));
    let _ = writeln!(s, "{prefix}J_M_final={}", num(out.rows.last().map_or(f64::NAN, |r| r.j_m)));
    let _ = writeln!(s, "{prefix}tail_sup_J_M={}", num(out.tail_sup_j_m));
    let _ = writeln!(s, "{prefix}max_norm_drift={}", num(out.max_norm_drift));
    let cr = out
        .rows
        .iter()
        .filter_map(|r| r.cross_ratio_drift)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    let _ = writeln!(s, "{prefix}max_cross_ratio_drift={}", opt(cr));
    let _ = writeln!(s, "{prefix}quadruples={}", out.quadruples.len());
    for rep in &out.reports {
        for (k, v) in rep.to_kv() {
            let _ = writeln!(s, "{prefix}{k}={v}");
        }
    }
    let _ = writeln!(s, "{prefix}verdict={}", if out.envelopes_hold() { "pass" } else { "fail" });
}

/// Write the CSV and `summary.txt` of a single run into its output directory.
pub fn write_run(out: &RunOutput) -> Result<PathBuf> {
    let dir = &out.config.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = run_csv_path(dir, out.config.seed, out.config.kappa0);
    write_timeseries(&out.rows, &csv)?;
    let summary = dir.join("summary.txt");
    fs::write(&summary, run_summary(out)).map_err(io_err(&summary))?;
    Ok(csv)
}

/// `key=value` summary of a sweep: config echo, per-run blocks, ordering checks.
pub fn sweep_summary(report: &SweepReport) -> String {
    let mut s = report.config.base.echo();
    let values: Vec<String> = report.config.kappa0_values.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(s, "config.kappa0_values=[{}]", values.join(","));
    let _ = writeln!(s, "config.replicates={}", report.config.replicates);
    for run in &report.runs {
        let prefix = format!("run.{}.{}.", run.seed, run.output.config.kappa0);
        run_body(&mut s, &prefix, &run.output);
    }
    match &report.ordering {
        Some(o) => {
            let _ = writeln!(s, "ordering.decreasing_passes={}/{}", o.decreasing_passes, o.replicates);
            let _ = writeln!(s, "ordering.decreasing={}", verdict(o.decreasing_ok()));
            for b in &o.bounding {
                let _ = writeln!(s, "ordering.bounding.{}.passes={}/{}", b.kappa0, b.passes, o.replicates);
                let _ = writeln!(s, "ordering.bounding.{}={}", b.kappa0, verdict(o.bounding_ok(b.passes)));
            }
        }
        None => {
            let _ = writeln!(s, "ordering=not_applicable");
        }
    }
    let p = &report.practical;
    let _ = writeln!(s, "practical.checked={}", p.checked);
    let _ = writeln!(s, "practical.passed={}", p.passed);
    let _ = writeln!(s, "practical.not_applicable={}", p.not_applicable);
    if let Some(slope) = report.slope {
        let _ = writeln!(s, "scaling.log_tail_slope={}", num(slope));
    }
    s
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Write every sweep CSV and the coordinator's `summary.txt`.
pub fn write_sweep(report: &SweepReport) -> Result<PathBuf> {
    let dir = &report.config.base.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for run in &report.runs {
        write_timeseries(&run.output.rows, &run_csv_path(dir, run.seed, run.output.config.kappa0))?;
    }
    let summary = dir.join("summary.txt");
    fs::write(&summary, sweep_summary(report)).map_err(io_err(&summary))?;
    Ok(summary)
}
