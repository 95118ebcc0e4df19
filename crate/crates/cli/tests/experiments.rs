use std::f64::consts::PI;
use std::process::Command;

use stlab_cli::output::{convergence_csv, parse_convergence_csv, parse_sweep_csv, sweep_csv, SWEEP_HEADER};
use stlab_cli::run::{attach_slopes, with_thread_limit};
use stlab_cli::{run_convergence, run_infsup_sweep, ExperimentConfig, FormKind, Method, SweepResult};

fn stlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stlab"))
}

fn small_sweep(method: Method) -> ExperimentConfig {
    ExperimentConfig {
        method,
        mu_grid: "1:4:7".parse().unwrap(),
        nel_max: Some(1024),
        ..Default::default()
    }
}

#[test]
fn empty_sweep_is_header_only() {
    let result = SweepResult { cells: vec![], method: Method::Fem, form: "standard".into(), degree: 1, t_final: 10.0 };
    assert_eq!(sweep_csv(&result), format!("{}\n", SWEEP_HEADER.join(",")));
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let cfg = ExperimentConfig { nel_max: Some(256), mu_grid: "0:4:9".parse().unwrap(), ..Default::default() };
    let one = with_thread_limit(Some(1), || sweep_csv(&run_infsup_sweep(&cfg).unwrap()));
    let four = with_thread_limit(Some(4), || sweep_csv(&run_infsup_sweep(&cfg).unwrap()));
    let again = with_thread_limit(Some(4), || sweep_csv(&run_infsup_sweep(&cfg).unwrap()));
    assert_eq!(one, four);
    assert_eq!(four, again);
    assert_eq!(parse_sweep_csv(&one).unwrap().len(), 9 * 7);
}

#[test]
fn convergence_csv_round_trips() {
    let cfg = ExperimentConfig { method: Method::Iga, nel_max: Some(512), ..Default::default() };
    let mut rows = run_convergence(&cfg).unwrap().rows;
    let text = convergence_csv(&rows);
    let parsed = parse_convergence_csv(&text).unwrap();
    assert_eq!(parsed, rows);
    assert_eq!(convergence_csv(&parsed), text);

    // failed rows carry NaN and still round-trip
    rows[3].err_h1 = f64::NAN;
    rows[3].err_l2 = f64::NAN;
    rows[3].best_h1 = f64::NAN;
    attach_slopes(&mut rows);
    let text = convergence_csv(&rows);
    assert!(text.lines().nth(4).unwrap().contains(",NaN,NaN,NaN,"));
    assert_eq!(convergence_csv(&parse_convergence_csv(&text).unwrap()), text);
}

#[test]
fn rerun_of_binary_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = stlab()
            .args(["converge", "--method", "iga", "--degree", "3", "--nel-max", "256", "--out"])
            .arg(&out)
            .env("STLAB_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv", "1"), run("b.csv", "3"));
}

#[test]
fn invalid_parameters_are_rejected_with_the_flag_name() {
    for (flag, value) in [("--mu", "0"), ("--mu", "-5"), ("--T", "0"), ("--T", "-1"), ("--delta", "0"), ("--delta", "-0.5")] {
        let mut cmd = stlab();
        cmd.args(["bounds", flag, value]);
        if flag == "--delta" {
            cmd.args(["--form", "penalty", "--method", "iga"]);
        }
        let out = cmd.output().unwrap();
        assert!(!out.status.success(), "{flag} {value} accepted");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{flag} {value}: {err}");
    }

    let cfg = ExperimentConfig { form: FormKind::Penalty, method: Method::Iga, delta: Some(0.0), ..Default::default() };
    assert!(cfg.validate().is_err());
    let cfg = ExperimentConfig { degree: Some(2), ..Default::default() };
    assert!(cfg.validate().unwrap_err().to_string().contains("--method iga"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    std::fs::write(&config, r#"{"mu": 50.0, "T": 2.0}"#).unwrap();
    let out = stlab().args(["bounds", "--mu", "1000", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["mu"], 1000.0);
    assert_eq!(json["t_final"], 2.0);

    std::fs::write(&config, r#"{"mu": 50.0, "typo": 1}"#).unwrap();
    let out = stlab().args(["bounds", "--config"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo"));
}

#[test]
fn plot_scripts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let status = stlab()
        .args(["converge", "--nel-max", "128", "--out"])
        .arg(&csv)
        .arg("--plots")
        .arg(dir.path().join("plots"))
        .status()
        .unwrap();
    assert!(status.success());
    let script = std::fs::read_to_string(dir.path().join("plots/plot_convergence.py")).unwrap();
    assert!(script.contains(&csv.display().to_string()));
    assert!(script.contains("sqrt(12/mu)"));

    let status = stlab()
        .args(["infsup", "--nel", "8,64,128", "--plots"])
        .arg(dir.path().join("plots"))
        .arg("--out")
        .arg(dir.path().join("beta.csv"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("plots/plot_sweep.py").exists());
    let cells = parse_sweep_csv(&std::fs::read_to_string(dir.path().join("beta.csv")).unwrap()).unwrap();
    assert_eq!(cells.len(), 3);
}

#[test]
fn solve_samples_the_discrete_solution() {
    let out = stlab().args(["solve", "--method", "iga", "--nel", "256"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u_h,u"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2 * 256 + 1);
    assert_eq!(rows[0][1], 0.0);
    assert!(rows.iter().all(|r| (r[1] - r[2]).abs() < 1e-2));
}

#[test]
fn fem_sweep_beta_scales_like_inverse_sqrt_mu() {
    let cfg = ExperimentConfig { nel: vec![1024], mu_grid: "1:4:7".parse().unwrap(), ..Default::default() };
    let cells = run_infsup_sweep(&cfg).unwrap().cells;
    let pts: Vec<(f64, f64)> = cells.iter().map(|c| (c.mu, c.beta)).collect();
    let slope = stlab::convergence_slope(&pts, None).unwrap();
    assert!((slope + 0.5).abs() < 0.1, "{slope}");
}

/// In the stable regime β follows the continuous value `π/(T√μ)`; unstable
/// cells are zero, tiny or oversized.
fn on_stable_branch(mu: f64, beta: f64, t: f64) -> bool {
    let r = beta * t * mu.sqrt() / PI;
    (0.5..2.0).contains(&r)
}

fn classification_accuracy(cfg: &ExperimentConfig, c: f64) -> f64 {
    let cells = run_infsup_sweep(cfg).unwrap().cells;
    let (mut hit, mut total) = (0, 0);
    for cell in &cells {
        let ratio = cell.h / (c / cell.mu).sqrt();
        if ratio > 1.0 / 1.5 && ratio < 1.5 {
            continue;
        }
        total += 1;
        hit += ((ratio < 1.0) == on_stable_branch(cell.mu, cell.beta, cfg.t_final)) as usize;
    }
    hit as f64 / total as f64
}

#[test]
fn iga_regime_boundary_follows_sqrt_9_over_mu() {
    let acc = classification_accuracy(&small_sweep(Method::Iga), 9.0);
    assert!(acc >= 0.9, "{acc}");
}

#[test]
fn fem_regime_boundary_follows_sqrt_12_over_mu() {
    let acc = classification_accuracy(&small_sweep(Method::Fem), 12.0);
    assert!(acc >= 0.9, "{acc}");
}

#[test]
fn stabilized_fem_has_no_regime_boundary() {
    let mu = 1000.0;
    let sweep = |form| {
        let cfg = ExperimentConfig { form, mu_grid: "3:3:1".parse().unwrap(), ..small_sweep(Method::Fem) };
        run_infsup_sweep(&cfg).unwrap().cells
    };
    let stabilized = sweep(FormKind::FemScaled);
    let lower = stlab::analysis::stabilized_fem_lower_bound(mu, 10.0);
    assert!(stabilized.iter().all(|c| c.beta >= lower));
    // β grows smoothly with the (1 + μh²/12) weight instead of collapsing
    assert!(stabilized.windows(2).all(|w| w[1].beta >= w[0].beta));

    // around h = √(12/μ) the standard form jumps to zero, the stabilized one stays within one order
    let window = |c: &&stlab_cli::SweepCell| c.h <= 0.16;
    assert!(sweep(FormKind::Standard).iter().filter(window).any(|c| c.neg_inf()));
    let betas: Vec<f64> = stabilized.iter().filter(window).map(|c| c.beta).collect();
    let max = betas.iter().cloned().fold(0.0, f64::max);
    let min = betas.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 10.0, "{min} .. {max}");
}

#[test]
fn smallest_delta_gives_smallest_resolved_errors() {
    let deltas = [0.01, 0.1, 1.0, 10.0, 100.0];
    let tables: Vec<_> = deltas
        .iter()
        .map(|&d| {
            let cfg = ExperimentConfig {
                method: Method::Iga,
                form: FormKind::Penalty,
                delta: Some(d),
                nel: vec![64, 128, 256, 512],
                relative: true,
                ..Default::default()
            };
            run_convergence(&cfg).unwrap().rows
        })
        .collect();
    for k in 0..4 {
        for t in &tables[1..] {
            assert!(tables[0][k].err_h1 < t[k].err_h1);
            assert!(tables[0][k].err_l2 < t[k].err_l2);
        }
    }
}

#[test]
fn penalty_errors_stay_below_1e2() {
    let cfg = ExperimentConfig {
        method: Method::Iga,
        form: FormKind::Penalty,
        nel_max: Some(1024),
        relative: true,
        ..Default::default()
    };
    let rows = run_convergence(&cfg).unwrap().rows;
    assert!(rows.iter().all(|r| r.err_h1 < 1e2 && r.err_l2 < 1e2));
}
