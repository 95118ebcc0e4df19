//! CSV emission and parsing, and the generated plot scripts.
//!
//! Reals are written with 17 significant digits, so a parse and
//! re-serialization reproduces the file byte for byte.

use std::io::Write;
use std::path::Path;

use stlab::BoundsReport;

use crate::error::CliError;
use crate::run::{ConvergenceRow, SweepCell, SweepResult};

pub const CONVERGENCE_HEADER: [&str; 7] = ["nel", "h", "err_h1", "err_l2", "best_h1", "slope_h1", "slope_l2"];
pub const SWEEP_HEADER: [&str; 8] =
    ["mu", "h", "log_mu", "log_h", "beta", "log_beta_or_sentinel", "flag_neg_inf", "flag_oversized"];

pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real(s: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Parse(format!("not a number: '{s}'")))
}

fn parse_flag(s: &str) -> Result<bool, CliError> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(CliError::Parse(format!("flag must be 0 or 1, got '{s}'"))),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory CSV writer");
    String::from_utf8(bytes).expect("CSV output is ASCII")
}

fn record_err(e: csv::Error) -> CliError {
    CliError::Parse(e.to_string())
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CONVERGENCE_HEADER).expect("in-memory write");
    for r in rows {
        let slope = |s: Option<f64>| s.map(fmt_real).unwrap_or_default();
        w.write_record([
            r.nel.to_string(),
            fmt_real(r.h),
            fmt_real(r.err_h1),
            fmt_real(r.err_l2),
            fmt_real(r.best_h1),
            slope(r.slope_h1),
            slope(r.slope_l2),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), CliError> {
    let got = rdr.headers().map_err(record_err)?;
    if got.iter().ne(expected.iter().copied()) {
        return Err(CliError::Parse(format!("expected header {}, got {}", expected.join(","), got.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(())
}

pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut rdr, &CONVERGENCE_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(record_err)?;
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { parse_real(s).map(Some) };
        rows.push(ConvergenceRow {
            nel: rec[0].trim().parse().map_err(|_| CliError::Parse(format!("bad nel '{}'", &rec[0])))?,
            h: parse_real(&rec[1])?,
            err_h1: parse_real(&rec[2])?,
            err_l2: parse_real(&rec[3])?,
            best_h1: parse_real(&rec[4])?,
            slope_h1: opt(&rec[5])?,
            slope_l2: opt(&rec[6])?,
        });
    }
    Ok(rows)
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for c in &result.cells {
        let log_beta = if c.neg_inf() { "-inf".to_string() } else { fmt_real(c.beta.ln()) };
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        w.write_record([
            fmt_real(c.mu),
            fmt_real(c.h),
            fmt_real(c.mu.ln()),
            fmt_real(c.h.ln()),
            fmt_real(c.beta),
            log_beta,
            flag(c.neg_inf()),
            flag(c.oversized()),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Cells of a sweep CSV; the derived columns are checked against `mu`, `h`, `beta`.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepCell>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut rdr, &SWEEP_HEADER)?;
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(record_err)?;
        let cell = SweepCell { mu: parse_real(&rec[0])?, h: parse_real(&rec[1])?, beta: parse_real(&rec[4])? };
        if parse_flag(&rec[6])? != cell.neg_inf() || parse_flag(&rec[7])? != cell.oversized() {
            return Err(CliError::Parse(format!("flags inconsistent with beta = {}", &rec[4])));
        }
        cells.push(cell);
    }
    Ok(cells)
}

/// Writes `content` to `path`, or to stdout when there is no path.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(p, content).map_err(|e| CliError::io(p, e))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// Writes a plot script into `dir` and returns its path.
pub fn write_plot_script(dir: &Path, name: &str, script: &str) -> Result<std::path::PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, script).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

pub fn convergence_plot_script(csv_path: &str, bounds: &BoundsReport, title: &str) -> String {
    format!(
        r#"import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv}
rows = list(csv.DictReader(open(path)))
h = [float(r["h"]) for r in rows]

fig, ax = plt.subplots(figsize=(6, 4.5))
for key, label, style in [("err_h1", "H1 seminorm", "o-"), ("err_l2", "L2", "s-"), ("best_h1", "best approximation", "k--")]:
    ax.loglog(h, [float(r[key]) for r in rows], style, label=label)

# mesh-size thresholds for mu = {mu}, T = {t}
for value, label in [({fem_fd:.16e}, "sqrt(12/mu)"), ({iga_emp:.16e}, "sqrt(9/mu)"), ({fem_raw:.16e}, "FEM bound"), ({iga_zank:.16e}, "IGA bound")]:
    ax.axvline(value, color="r", lw=0.8, ls=":")
    ax.annotate(label, (value, ax.get_ylim()[1]), rotation=90, va="top", ha="right", fontsize=7, color="r")

ax.set_xlabel("h")
ax.set_ylabel("error")
ax.set_title({title})
ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".pdf")
"#,
        csv = py_str(csv_path),
        mu = bounds.mu,
        t = bounds.t_final,
        fem_fd = bounds.fem_fd,
        iga_emp = bounds.iga_empirical,
        fem_raw = bounds.fem_raw,
        iga_zank = bounds.iga_zank,
        title = py_str(title),
    )
}

pub fn sweep_plot_script(csv_path: &str, title: &str) -> String {
    format!(
        r#"import csv
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else {csv}
rows = list(csv.DictReader(open(path)))
log_mu = sorted({{float(r["log_mu"]) for r in rows}})
log_h = sorted({{float(r["log_h"]) for r in rows}})
grid = np.full((len(log_h), len(log_mu)), np.nan)
for r in rows:
    if r["flag_oversized"] == "1":
        continue
    i = log_h.index(float(r["log_h"]))
    j = log_mu.index(float(r["log_mu"]))
    grid[i, j] = float(r["log_beta_or_sentinel"])

finite = grid[np.isfinite(grid)]
floor = finite.min() - 1.0 if finite.size else -1.0
grid[np.isneginf(grid)] = floor

fig, ax = plt.subplots(figsize=(6, 4.5))
mesh = ax.pcolormesh(log_mu, log_h, np.ma.masked_invalid(grid), shading="nearest", cmap="jet")
fig.colorbar(mesh, label="log(beta)")
mu = np.exp(np.linspace(min(log_mu), max(log_mu), 200))
ax.plot(np.log(mu), 0.5 * np.log(12.0 / mu), "r-", label="h = sqrt(12/mu)")
ax.plot(np.log(mu), 0.5 * np.log(9.0 / mu), "r--", label="h = sqrt(9/mu)")
ax.set_ylim(min(log_h), max(log_h))
ax.set_xlabel("log(mu)")
ax.set_ylabel("log(h)")
ax.set_title({title})
ax.legend(loc="lower left")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".pdf")
"#,
        csv = py_str(csv_path),
        title = py_str(title),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_17_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(f64::NAN), "NaN");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        for x in [0.1, 1.0 / 3.0, 2.949e23, 5e-324, f64::MAX] {
            assert_eq!(parse_real(&fmt_real(x)).unwrap(), x);
        }
    }

    #[test]
    fn sweep_round_trip_with_sentinel() {
        let result = SweepResult {
            cells: vec![
                SweepCell { mu: 1000.0, h: 0.15625, beta: 0.0 },
                SweepCell { mu: 1000.0, h: 0.078125, beta: 1.2e-2 },
                SweepCell { mu: 1.0, h: 2.5, beta: 300.0 },
                SweepCell { mu: 1.0, h: 1.25, beta: f64::NAN },
            ],
            method: crate::config::Method::Fem,
            form: "standard".into(),
            degree: 1,
            t_final: 10.0,
        };
        let text = sweep_csv(&result);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].ends_with(",-inf,1,0"));
        assert!(lines[3].ends_with(",0,1"));
        let cells = parse_sweep_csv(&text).unwrap();
        assert_eq!(cells[..3], result.cells[..3]);
        assert!(cells[3].beta.is_nan());
    }

    #[test]
    fn header_mismatch_is_reported() {
        assert!(parse_convergence_csv("nel,h\n4,2.5\n").is_err());
    }

    #[test]
    fn scripts_embed_path() {
        let s = sweep_plot_script("out/sweep.csv", "FEM");
        assert!(s.contains("\"out/sweep.csv\""));
        assert!(s.contains("sqrt(12/mu)"));
    }
}
