use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use steinhaus::experiment::{
    box_count_csv, charfn_csv, cmd_charfn, cmd_dim, cmd_eval, cmd_figure, cmd_predict, cmd_sigma_tau, curve_csv, in_pool,
    render_png, to_json_bytes, ExperimentConfig, PredictParams, PredictPreset, Verdict,
};
use steinhaus::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "steinhaus", version, about = "Random lacunary series experiments")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "STEINHAUS_THREADS")]
    threads: Option<usize>,
    /// Output file; otherwise the config's `outputs.output`, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample the series, write `x,re,im` CSV.
    Eval,
    /// Replicated box-counting dimension against the closed-form prediction.
    Dim,
    /// Bessel-product second moment against Monte Carlo, `xi,analytic,mc_mean,mc_stderr` CSV.
    Charfn,
    /// Predicted dimensions and classifications as JSON.
    Predict(PredictArgs),
    /// Render a figure preset to PNG.
    Figure {
        /// fig1a..fig1i, fig2a..fig2c, fig3a, fig3b, fig4a, fig4b, fig5a..fig5c, fig6
        id: String,
    },
    /// Finite-window block exponent estimates as JSON.
    SigmaTau,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PresetKind {
    Weierstrass,
    Riemann,
    Exponents,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long, value_enum)]
    preset: Option<PresetKind>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    dim_a: f64,
}

fn missing(what: &str) -> Error {
    Error::Validation { what: "arguments", reason: format!("missing --{what}") }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| missing("config"))?;
    let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, bytes)?;
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn out_path(cli: &Cli, cfg: Option<&ExperimentConfig>) -> Option<PathBuf> {
    cli.out.clone().or_else(|| cfg.and_then(|c| c.outputs.output.clone()))
}

fn predict_params(cli: &Cli, args: &PredictArgs) -> Result<PredictParams> {
    if let Some(path) = &cli.config {
        return Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?);
    }
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| missing(name));
    let series = match args.preset.ok_or_else(|| missing("preset"))? {
        PresetKind::Weierstrass => PredictPreset::Weierstrass { beta: need(args.beta, "beta")? },
        PresetKind::Riemann => PredictPreset::Riemann { a: need(args.a, "a")?, b: need(args.b, "b")? },
        PresetKind::Exponents => PredictPreset::Exponents { sigma: need(args.sigma, "sigma")?, tau: need(args.tau, "tau")? },
    };
    Ok(PredictParams { series, dim_a: args.dim_a })
}

fn json_out<T: Serialize>(cli: &Cli, cfg: Option<&ExperimentConfig>, value: &T) -> Result<()> {
    write_out(out_path(cli, cfg).as_deref(), &to_json_bytes(value)?)
}

fn run(cli: &Cli) -> Result<Verdict> {
    match &cli.cmd {
        Cmd::Eval => {
            let cfg = load_config(cli)?;
            let curve = cmd_eval(&cfg)?;
            eprintln!("{} points, N = {}, tail bound {:e}", curve.xs.len(), curve.truncation_n, curve.tail_bound);
            write_out(out_path(cli, Some(&cfg)).as_deref(), &curve_csv(&curve)?)?;
            Ok(Verdict::Consistent)
        }
        Cmd::Dim => {
            let cfg = load_config(cli)?;
            let report = cmd_dim(&cfg)?;
            if let (Some(path), Some(curve)) = (&cfg.outputs.box_counts, report.replicates.first().and_then(|r| r.curve.as_ref())) {
                write_out(Some(path), &box_count_csv(curve)?)?;
            }
            eprintln!(
                "mean {:?} ± {:?}, target {:?}, tolerance {:.3}: {:?}",
                report.ensemble_mean, report.ensemble_std, report.target, report.tolerance, report.verdict
            );
            json_out(cli, Some(&cfg), &report)?;
            Ok(report.verdict)
        }
        Cmd::Charfn => {
            let cfg = load_config(cli)?;
            let report = cmd_charfn(&cfg)?;
            eprintln!("{} frequencies, {} replicates: {:?}", report.rows.len(), report.replicates, report.verdict);
            write_out(out_path(cli, Some(&cfg)).as_deref(), &charfn_csv(&report)?)?;
            Ok(report.verdict)
        }
        Cmd::Predict(args) => {
            let p = predict_params(cli, args)?;
            json_out(cli, None, &cmd_predict(p.series, p.dim_a)?)?;
            Ok(Verdict::Consistent)
        }
        Cmd::Figure { id } => {
            let (preset, curve) = cmd_figure(id, cli.seed)?;
            eprintln!("{}: {}", preset.id, preset.caption);
            let path = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("{id}.png")));
            write_out(Some(&path), &render_png(&curve.image())?)?;
            Ok(Verdict::Consistent)
        }
        Cmd::SigmaTau => {
            let cfg = load_config(cli)?;
            json_out(cli, Some(&cfg), &cmd_sigma_tau(&cfg)?)?;
            Ok(Verdict::Consistent)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match in_pool(cli.threads, || run(&cli)).and_then(|r| r) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
