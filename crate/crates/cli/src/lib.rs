//! Experiment runner: convergence studies, inf-sup sweeps, stability bounds
//! and single solves, written as CSV with companion plot scripts.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, FormKind, Method, MuGrid};
pub use error::CliError;
pub use run::{
    run_bounds, run_convergence, run_infsup, run_infsup_sweep, run_solve, ConvergenceRow, ConvergenceTable,
    SolveOutput, SweepCell, SweepResult,
};

#[derive(Parser, Debug)]
#[command(name = "stlab", version, about = "Galerkin and B-spline experiments for u'' + mu u = f")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Errors and fitted rates over a sequence of uniform meshes.
    Converge(ExperimentArgs),
    /// Discrete inf-sup constant at the configured mu for each mesh.
    Infsup(ExperimentArgs),
    /// Discrete inf-sup constant over a (mu, h) grid.
    Sweep(ExperimentArgs),
    /// Closed-form mesh-size thresholds and stability constants, as JSON.
    Bounds(ExperimentArgs),
    /// One solve, sampled at breakpoints and element midpoints.
    Solve(ExperimentArgs),
}

impl Command {
    pub fn args(&self) -> &ExperimentArgs {
        match self {
            Command::Converge(a) | Command::Infsup(a) | Command::Sweep(a) | Command::Bounds(a) | Command::Solve(a) => a,
        }
    }
}

/// Flags override values read from `--config`.
#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    /// fem or iga
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// standard, fem_q0, fem_scaled, iga_scaled or penalty
    #[arg(long)]
    pub form: Option<FormKind>,
    /// Penalty weight (penalty form only)
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Derivative order of the penalty (defaults to the degree)
    #[arg(long)]
    pub penalty_order: Option<usize>,
    /// Use element lengths instead of the global h in stabilized forms
    #[arg(long)]
    pub per_element: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Final time
    #[arg(long = "T", allow_hyphen_values = true)]
    pub t_final: Option<f64>,
    /// Frequency of the manufactured solution sin²(ωt)
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Comma-separated element counts
    #[arg(long, value_delimiter = ',')]
    pub nel: Option<Vec<usize>>,
    /// Largest element count when doubling from 4
    #[arg(long)]
    pub nel_max: Option<usize>,
    /// log10 mu grid as min:max:points
    #[arg(long, allow_hyphen_values = true)]
    pub mu_grid: Option<MuGrid>,
    /// Gauss points per element for the load vector
    #[arg(long)]
    pub quad_rhs: Option<usize>,
    /// Report errors relative to the exact solution's norms
    #[arg(long)]
    pub relative: bool,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for generated plot scripts
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// JSON experiment configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if self.degree.is_some() {
            cfg.degree = self.degree;
        }
        if let Some(v) = self.form {
            cfg.form = v;
        }
        if self.delta.is_some() {
            cfg.delta = self.delta;
        }
        if self.penalty_order.is_some() {
            cfg.penalty_order = self.penalty_order;
        }
        cfg.per_element |= self.per_element;
        cfg.relative |= self.relative;
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
        if let Some(v) = self.t_final {
            cfg.t_final = v;
        }
        if let Some(v) = self.omega {
            cfg.omega = v;
        }
        if let Some(v) = &self.nel {
            cfg.nel = v.clone();
        }
        if self.nel_max.is_some() {
            cfg.nel_max = self.nel_max;
        }
        if let Some(v) = self.mu_grid {
            cfg.mu_grid = v;
        }
        if let Some(v) = self.quad_rhs {
            cfg.quad_rhs = v;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.plots.is_some() {
            cfg.plots = self.plots.clone();
        }
        Ok(cfg)
    }
}

fn csv_name(cfg: &ExperimentConfig, fallback: &str) -> String {
    cfg.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| fallback.to_string())
}

fn title(cfg: &ExperimentConfig) -> String {
    let method = match cfg.method {
        Method::Fem => "FEM".to_string(),
        Method::Iga => format!("IGA p={}", cfg.degree()),
    };
    format!("{method}, {}, T = {}", cfg.form().name(), cfg.t_final)
}

/// Runs one subcommand; results go to `--out` or stdout, summaries to stderr.
pub fn execute(command: &Command) -> Result<(), CliError> {
    let cfg = command.args().resolve()?;
    match command {
        Command::Converge(_) => {
            let table = run_convergence(&cfg)?;
            output::write_output(cfg.out.as_deref(), &output::convergence_csv(&table.rows))?;
            if let Some(dir) = &cfg.plots {
                let script = output::convergence_plot_script(&csv_name(&cfg, "convergence.csv"), &table.bounds, &title(&cfg));
                let path = output::write_plot_script(dir, "plot_convergence.py", &script)?;
                eprintln!("plot script: {}", path.display());
            }
            if let Some(last) = table.rows.last() {
                eprintln!(
                    "Nel = {}: |e|_H1 = {:.3e}, |e|_L2 = {:.3e}, slopes {:.3} / {:.3}",
                    last.nel,
                    last.err_h1,
                    last.err_l2,
                    last.slope_h1.unwrap_or(f64::NAN),
                    last.slope_l2.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Infsup(_) | Command::Sweep(_) => {
            let result = match command {
                Command::Sweep(_) => run_infsup_sweep(&cfg)?,
                _ => run_infsup(&cfg)?,
            };
            output::write_output(cfg.out.as_deref(), &output::sweep_csv(&result))?;
            if let Some(dir) = &cfg.plots {
                let script = output::sweep_plot_script(&csv_name(&cfg, "sweep.csv"), &title(&cfg));
                let path = output::write_plot_script(dir, "plot_sweep.py", &script)?;
                eprintln!("plot script: {}", path.display());
            }
            let failed = result.cells.iter().filter(|c| c.failed()).count();
            let zero = result.cells.iter().filter(|c| c.neg_inf()).count();
            eprintln!("{} cells, {zero} with beta = 0, {failed} failed", result.cells.len());
        }
        Command::Bounds(_) => {
            let report = run_bounds(&cfg)?;
            let mut json = serde_json::to_string_pretty(&report).expect("bounds serialize");
            json.push('\n');
            output::write_output(cfg.out.as_deref(), &json)?;
        }
        Command::Solve(_) => {
            let sol = run_solve(&cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
            w.write_record(["t", "u_h", "u"]).map_err(|e| CliError::csv(&path, e))?;
            for (t, uh, u) in &sol.samples {
                w.write_record([output::fmt_real(*t), output::fmt_real(*uh), output::fmt_real(*u)])
                    .map_err(|e| CliError::csv(&path, e))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::io(&path, e.into_error()))?;
            output::write_output(cfg.out.as_deref(), &String::from_utf8_lossy(&bytes))?;
            eprintln!(
                "Nel = {}: |e|_H1 = {:.3e}, |e|_L2 = {:.3e}, best H1 = {:.3e}, pivot ratio {:.1e}",
                sol.nel, sol.report.h1_semi, sol.report.l2, sol.report.best_h1, sol.pivot_ratio
            );
        }
    }
    Ok(())
}
