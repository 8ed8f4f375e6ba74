//! Experiment configs, replicate harness and the commands behind the CLI.
//! Every command returns plain data; the `*_csv`, `*_json` and `*_png`
//! helpers turn it into bytes.

use std::io::Cursor;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFunction;
use crate::besselcf::{expected_fourier_sq_multi, mc_fourier_sq_multi};
use crate::error::{Error, Result};
use crate::fracdim::{box_count_with, dyadic_scales, extent, fit_dimension, BoxCountCurve, BoxCountOptions, DimensionEstimate, FitPolicy};
use crate::oracle::{predict, riemann_exponents, Prediction};
use crate::sampler::{eval_series, PhaseModel, SampledCurve, SeriesSpec, TestSet};
use crate::sequences::{estimate_sigma_tau, CoefficientRule, FrequencyRule, GapExponents};

pub const DEFAULT_EPS_TAIL: f64 = 1e-6;
pub const FIGURE_SIZE: u32 = 1024;
pub const FIGURE_POINTS: usize = 1 << 18;
pub const FIGURE_EPS_TAIL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    #[default]
    Image,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalesPolicy {
    /// Box sides are `extent · 2^{−j}` for `j_lo ≤ j ≤ j_hi`.
    pub j_lo: u32,
    pub j_hi: u32,
    #[serde(default)]
    pub box_count: BoxCountOptions,
    #[serde(default)]
    pub fit: FitPolicy,
}

impl Default for ScalesPolicy {
    fn default() -> Self {
        ScalesPolicy { j_lo: 1, j_hi: 16, box_count: BoxCountOptions::default(), fit: FitPolicy::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Added to the ensemble standard deviation.
    pub dimension: f64,
    /// Multiples of the Monte Carlo standard error.
    pub charfn_stderrs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { dimension: 0.2, charfn_stderrs: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub sigma: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharFnConfig {
    /// Radial frequencies; planar series use `ξ = (r, 0)`.
    pub xis: Vec<f64>,
    pub replicates: usize,
    /// Positive-index terms kept on both sides of the comparison.
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Main artifact: CSV for `eval` and `charfn`, JSON for `dim`,
    /// `predict` and `sigma-tau`, PNG for `figure`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// `scale,count` CSV of the first replicate in `dim`.
    #[serde(default)]
    pub box_counts: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SeriesSpec,
    pub test_set: TestSet,
    #[serde(default = "default_eps")]
    pub eps_tail: f64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub scales: ScalesPolicy,
    /// Replaces the seed of Steinhaus phases. Replicate `r` uses stream `r`.
    pub master_seed: u64,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Known block exponents; estimated from the coefficients otherwise.
    #[serde(default)]
    pub exponents: Option<Exponents>,
    #[serde(default = "default_window")]
    pub sigma_tau_window: (u32, u32),
    #[serde(default)]
    pub charfn: Option<CharFnConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_eps() -> f64 {
    DEFAULT_EPS_TAIL
}
fn one() -> usize {
    1
}
fn default_window() -> (u32, u32) {
    (6, 14)
}

impl ExperimentConfig {
    pub fn new(spec: SeriesSpec, test_set: TestSet, master_seed: u64) -> Self {
        ExperimentConfig {
            spec,
            test_set,
            eps_tail: DEFAULT_EPS_TAIL,
            replicates: 1,
            scales: ScalesPolicy::default(),
            master_seed,
            measure: Measure::Image,
            tolerance: Tolerance::default(),
            exponents: None,
            sigma_tau_window: default_window(),
            charfn: None,
            outputs: Outputs::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialise")
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.test_set.validate()?;
        if !(self.eps_tail.is_finite() && self.eps_tail > 0.0) {
            return Err(Error::invalid("eps_tail", "must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "need at least one"));
        }
        if self.scales.j_hi <= self.scales.j_lo || self.scales.j_hi > 20 {
            return Err(Error::invalid("scales", "need j_lo < j_hi ≤ 20"));
        }
        if self.scales.box_count.offsets == 0 {
            return Err(Error::invalid("scales", "need at least one grid offset"));
        }
        let t = self.tolerance;
        if !(t.dimension >= 0.0 && t.charfn_stderrs >= 0.0) {
            return Err(Error::invalid("tolerance", "must be non-negative"));
        }
        Ok(())
    }

    /// The series of replicate `r`: Steinhaus phases take the master seed.
    pub fn replicate_spec(&self) -> SeriesSpec {
        let mut spec = self.spec.clone();
        if let PhaseModel::SteinhausIid { seed } = &mut spec.phases {
            *seed = self.master_seed;
        }
        spec
    }

    /// Deterministic phases make every replicate identical, so only one runs.
    pub fn effective_replicates(&self) -> usize {
        match self.spec.phases {
            PhaseModel::SteinhausIid { .. } => self.replicates,
            _ => 1,
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("threads", "need at least one worker")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Degenerate(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

// ---- eval ----

pub fn cmd_eval(cfg: &ExperimentConfig) -> Result<SampledCurve> {
    cfg.validate()?;
    eval_series(&cfg.replicate_spec(), &cfg.test_set, cfg.eps_tail, 0)
}

/// `x,re,im` rows.
pub fn curve_csv(curve: &SampledCurve) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "re", "im"])?;
    for (x, v) in curve.xs.iter().zip(&curve.values) {
        w.serialize((x, v.re, v.im))?;
    }
    finish(w)
}

/// `scale,count` rows.
pub fn box_count_csv(curve: &BoxCountCurve) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scale", "count"])?;
    for (s, c) in curve.scales.iter().zip(&curve.counts) {
        w.serialize((s, c))?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

// ---- dim ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Inconsistent => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub index: usize,
    pub stream_id: u64,
    pub truncation_n: usize,
    pub tail_bound: f64,
    /// `None` when all points coincide.
    pub curve: Option<BoxCountCurve>,
    /// `None` when the fit policy left too few scales.
    pub estimate: Option<DimensionEstimate>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec_hash: String,
    pub master_seed: u64,
    pub measure: Measure,
    pub replicates: Vec<ReplicateResult>,
    pub ensemble_mean: Option<f64>,
    pub ensemble_std: Option<f64>,
    pub exponents: Option<Exponents>,
    pub prediction: Option<Prediction>,
    /// Predicted interval for the measured quantity.
    pub target: Option<(f64, f64)>,
    /// `tolerance.dimension + ensemble_std`.
    pub tolerance: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn exponents_for(cfg: &ExperimentConfig) -> Result<Option<Exponents>> {
    if let Some(e) = cfg.exponents {
        return Ok(Some(e));
    }
    if cfg.spec.coeffs.is_null() || cfg.spec.two_sided || cfg.spec.mirror {
        return Ok(None);
    }
    let (k_lo, k_hi) = cfg.sigma_tau_window;
    let est = estimate_sigma_tau(&cfg.spec.coeffs, &cfg.spec.freqs, k_lo, k_hi)?;
    Ok(Some(Exponents { sigma: est.sigma_est.max(0.0), tau: est.tau_est.max(0.0) }))
}

/// Target interval for the null series: a point image, a flat graph.
fn null_target(cfg: &ExperimentConfig) -> (f64, f64) {
    let d = cfg.test_set.hausdorff_dim();
    match cfg.measure {
        Measure::Image => (0.0, 0.0),
        Measure::Graph => (d, d),
    }
}

/// Value coordinates are divided by `2 Σ|aₙ| sup|φ|` so the graph has a
/// comparable spread along every axis.
fn graph_scale(spec: &SeriesSpec, n: usize) -> Result<f64> {
    let b = spec.modulus_bound(n)?;
    Ok(if b > 0.0 { 1.0 / (2.0 * b) } else { 1.0 })
}

fn count_points<const D: usize>(pts: &[[f64; D]], p: &ScalesPolicy) -> Result<Option<BoxCountCurve>> {
    let e = extent(pts);
    if e == 0.0 {
        return Ok(None);
    }
    box_count_with(pts, &dyadic_scales(e, p.j_lo, p.j_hi), p.box_count).map(Some)
}

/// `None` when all points coincide.
fn measure_curve(cfg: &ExperimentConfig, spec: &SeriesSpec, curve: &SampledCurve) -> Result<Option<BoxCountCurve>> {
    let p = &cfg.scales;
    match (cfg.measure, curve.codomain_dim) {
        (Measure::Image, _) => count_points(&curve.image(), p),
        (Measure::Graph, 1) => {
            let s = graph_scale(spec, curve.truncation_n)?;
            let pts: Vec<[f64; 2]> = curve.xs.iter().zip(&curve.values).map(|(x, v)| [*x, v.re * s]).collect();
            count_points(&pts, p)
        }
        (Measure::Graph, _) => {
            let s = graph_scale(spec, curve.truncation_n)?;
            let pts: Vec<[f64; 3]> = curve.xs.iter().zip(&curve.values).map(|(x, v)| [*x, v.re * s, v.im * s]).collect();
            count_points(&pts, p)
        }
    }
}

fn run_replicate(cfg: &ExperimentConfig, spec: &SeriesSpec, index: usize) -> Result<ReplicateResult> {
    let stream_id = index as u64;
    let curve = eval_series(spec, &cfg.test_set, cfg.eps_tail, stream_id)?;
    let counts = measure_curve(cfg, spec, &curve)?;
    let (estimate, fit_error) = match counts.as_ref().map(|c| fit_dimension(c, &cfg.scales.fit)) {
        None => (None, Some("all points coincide".to_string())),
        Some(Ok(e)) => (Some(e), None),
        Some(Err(e @ Error::TooFewScales { .. })) => (None, Some(e.to_string())),
        Some(Err(e)) => return Err(e),
    };
    Ok(ReplicateResult {
        index,
        stream_id,
        truncation_n: curve.truncation_n,
        tail_bound: curve.tail_bound,
        curve: counts,
        estimate,
        fit_error,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Distance from `x` to the interval `[lo, hi]`.
fn gap_to(x: f64, (lo, hi): (f64, f64)) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

pub fn cmd_dim(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.replicate_spec();
    let replicates = (0..cfg.effective_replicates())
        .into_par_iter()
        .map(|r| run_replicate(cfg, &spec, r))
        .collect::<Result<Vec<_>>>()?;

    let mut notes = Vec::new();
    let values: Vec<f64> = replicates.iter().filter_map(|r| r.estimate.map(|e| e.value)).collect();
    if values.len() < replicates.len() {
        notes.push(format!("{} of {} replicates had too few usable scales", replicates.len() - values.len(), replicates.len()));
    }
    let (ensemble_mean, ensemble_std) = if values.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&values);
        (Some(m), Some(s))
    };

    let exponents = exponents_for(cfg)?;
    let dim_a = cfg.test_set.hausdorff_dim();
    let prediction = match exponents {
        Some(e) => Some(predict(e.sigma.min(e.tau), e.tau, dim_a, spec.codomain_dim())?),
        None => None,
    };
    let target = if spec.coeffs.is_null() {
        Some(null_target(cfg))
    } else {
        prediction.as_ref().and_then(|p| match cfg.measure {
            Measure::Image => Some((p.image_dim_lo, p.image_dim_hi)),
            Measure::Graph => p.graph_dim_lo.zip(p.graph_dim_hi),
        })
    };
    if target.is_none() {
        notes.push("no closed-form target for this series and measure".into());
    }
    let tolerance = cfg.tolerance.dimension + ensemble_std.unwrap_or(0.0);
    let verdict = match (ensemble_mean, target) {
        (Some(_), Some(_)) if !notes.is_empty() => Verdict::Inconclusive,
        (Some(m), Some(t)) if gap_to(m, t) <= tolerance => Verdict::Consistent,
        (Some(_), Some(_)) => Verdict::Inconsistent,
        _ => Verdict::Inconclusive,
    };
    Ok(ExperimentReport {
        spec_hash: spec.hash(),
        master_seed: cfg.master_seed,
        measure: cfg.measure,
        replicates,
        ensemble_mean,
        ensemble_std,
        exponents,
        prediction,
        target,
        tolerance,
        verdict,
        notes,
    })
}

// ---- charfn ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFnRow {
    pub xi: f64,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFnReport {
    pub rows: Vec<CharFnRow>,
    pub atoms: usize,
    pub replicates: usize,
    pub terms: usize,
    pub stderrs: f64,
    pub verdict: Verdict,
}

/// Absolute slack for rows with zero standard error, where both sides are
/// the same finite sum up to rounding.
pub const CHARFN_ROUNDING: f64 = 1e-12;

pub fn cmd_charfn(cfg: &ExperimentConfig) -> Result<CharFnReport> {
    cfg.validate()?;
    let cf = cfg.charfn.as_ref().ok_or_else(|| Error::invalid("charfn", "config has no charfn section"))?;
    if cf.xis.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("charfn", "frequencies must be finite"));
    }
    let spec = cfg.replicate_spec();
    let xs = cfg.test_set.points()?;
    let w = 1.0 / xs.len() as f64;
    let atoms: Vec<(f64, f64)> = xs.iter().map(|x| (*x, w)).collect();
    let analytic = expected_fourier_sq_multi(&spec, &atoms, &cf.xis, cf.terms)?;
    let planar: Vec<[f64; 2]> = cf.xis.iter().map(|r| [*r, 0.0]).collect();
    let mc = mc_fourier_sq_multi(&spec, &atoms, &planar, cf.replicates, cfg.master_seed, cf.terms)?;
    let k = cfg.tolerance.charfn_stderrs;
    let rows: Vec<CharFnRow> = cf
        .xis
        .iter()
        .zip(analytic)
        .zip(&mc)
        .map(|((xi, a), m)| CharFnRow { xi: *xi, analytic: a, mc_mean: m.mean.re, mc_stderr: m.stderr })
        .collect();
    let ok = rows.iter().all(|r| (r.analytic - r.mc_mean).abs() <= k * r.mc_stderr + CHARFN_ROUNDING);
    Ok(CharFnReport {
        atoms: atoms.len(),
        replicates: cf.replicates,
        terms: cf.terms,
        stderrs: k,
        verdict: if ok { Verdict::Consistent } else { Verdict::Inconsistent },
        rows,
    })
}

/// `xi,analytic,mc_mean,mc_stderr` rows.
pub fn charfn_csv(report: &CharFnReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["xi", "analytic", "mc_mean", "mc_stderr"])?;
    for r in &report.rows {
        w.serialize((r.xi, r.analytic, r.mc_mean, r.mc_stderr))?;
    }
    finish(w)
}

// ---- sigma-tau ----

pub fn cmd_sigma_tau(cfg: &ExperimentConfig) -> Result<GapExponents> {
    cfg.validate()?;
    let (lo, hi) = cfg.sigma_tau_window;
    estimate_sigma_tau(&cfg.spec.coeffs, &cfg.spec.freqs, lo, hi)
}

// ---- predict ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredictPreset {
    /// `σ = τ = β`.
    Weierstrass { beta: f64 },
    Riemann { a: f64, b: f64 },
    Exponents { sigma: f64, tau: f64 },
}

/// JSON form of a `predict` request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictParams {
    pub series: PredictPreset,
    pub dim_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictReport {
    pub series: PredictPreset,
    pub dim_a: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Present for the Riemann preset: whether `1 < b ≤ a + 1/2`.
    pub closed_form_regime: Option<bool>,
    /// Complex series in the plane.
    pub complex: Prediction,
    /// Real part (or the sine series) on the line.
    pub real: Prediction,
}

pub fn cmd_predict(series: PredictPreset, dim_a: f64) -> Result<PredictReport> {
    let (sigma, tau, closed_form_regime) = match series {
        PredictPreset::Weierstrass { beta } => {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::invalid("beta", format!("{beta} must lie in (0, 1]")));
            }
            (beta, beta, None)
        }
        PredictPreset::Riemann { a, b } => {
            let r = riemann_exponents(a, b)?;
            (r.sigma, r.tau, Some(r.closed_form_regime))
        }
        PredictPreset::Exponents { sigma, tau } => (sigma, tau, None),
    };
    Ok(PredictReport {
        series,
        dim_a,
        sigma,
        tau,
        closed_form_regime,
        complex: predict(sigma, tau, dim_a, 2)?,
        real: predict(sigma, tau, dim_a, 1)?,
    })
}

// ---- figures ----

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: &'static str,
    /// `key=value` pairs separated by `, `.
    pub caption: &'static str,
    pub spec: SeriesSpec,
}

pub const FIGURE_IDS: [&str; 20] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig1g", "fig1h", "fig1i", "fig2a", "fig2b", "fig2c", "fig3a",
    "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig6",
];

/// Seed of the random-phase figures.
pub const FIGURE_SEED: u64 = 2024;

fn weierstrass_fig(id: &'static str, caption: &'static str, lambda: f64, beta: f64) -> FigurePreset {
    FigurePreset { id, caption, spec: SeriesSpec::weierstrass(beta, lambda, PhaseModel::Zero) }
}

fn phi_fig(id: &'static str, caption: &'static str, beta: f64, phases: PhaseModel) -> FigurePreset {
    let spec = SeriesSpec {
        basis: BasisFunction::ExpDiff { beta, lambda: 6.0 },
        ..SeriesSpec::weierstrass(beta, 6.0, phases)
    };
    FigurePreset { id, caption, spec }
}

fn takagi_fig(id: &'static str, caption: &'static str, beta: f64) -> FigurePreset {
    let spec = SeriesSpec {
        basis: BasisFunction::TakagiSine,
        ..SeriesSpec::weierstrass(beta, 2.0, PhaseModel::Zero)
    };
    FigurePreset { id, caption, spec }
}

pub fn figure_preset(id: &str) -> Result<FigurePreset> {
    let pi_phases = PhaseModel::Equidistributed { alpha: std::f64::consts::PI };
    let iid = PhaseModel::SteinhausIid { seed: FIGURE_SEED };
    let riemann = |id, caption, a| FigurePreset { id, caption, spec: SeriesSpec::riemann(a, 2.0, PhaseModel::Zero) };
    Ok(match id {
        "fig1a" => weierstrass_fig("fig1a", "basis=exp, lambda=6, beta=0.3, phases=zero", 6.0, 0.3),
        "fig1b" => weierstrass_fig("fig1b", "basis=exp, lambda=6, beta=0.7, phases=zero", 6.0, 0.7),
        "fig1c" => weierstrass_fig("fig1c", "basis=exp, lambda=6, beta=0.9, phases=zero", 6.0, 0.9),
        "fig1d" => weierstrass_fig("fig1d", "basis=exp, lambda=6.5, beta=0.7, phases=zero", 6.5, 0.7),
        "fig1e" => weierstrass_fig("fig1e", "basis=exp, lambda=sqrt43, beta=0.7, phases=zero", 43f64.sqrt(), 0.7),
        "fig1f" => weierstrass_fig("fig1f", "basis=exp, lambda=2pi, beta=0.7, phases=zero", std::f64::consts::TAU, 0.7),
        "fig1g" => weierstrass_fig("fig1g", "basis=exp, lambda=30, beta=0.4, phases=zero", 30.0, 0.4),
        "fig1h" => weierstrass_fig("fig1h", "basis=exp, lambda=30, beta=0.5, phases=zero", 30.0, 0.5),
        "fig1i" => weierstrass_fig("fig1i", "basis=exp, lambda=30, beta=0.6, phases=zero", 30.0, 0.6),
        "fig2a" => riemann("fig2a", "basis=exp, a=6, b=2, tau=0.25, phases=zero", 6.0),
        "fig2b" => riemann("fig2b", "basis=exp, a=3, b=2, tau=0.5, phases=zero", 3.0),
        "fig2c" => riemann("fig2c", "basis=exp, a=2, b=2, tau=0.75, phases=zero", 2.0),
        "fig3a" => phi_fig("fig3a", "basis=expdiff, lambda=6, beta=0.3, phases=n*pi", 0.3, pi_phases),
        "fig3b" => phi_fig("fig3b", "basis=expdiff, lambda=6, beta=0.6, phases=n*pi", 0.6, pi_phases),
        "fig4a" => phi_fig("fig4a", "basis=expdiff, lambda=6, beta=0.3, phases=iid", 0.3, iid),
        "fig4b" => phi_fig("fig4b", "basis=expdiff, lambda=6, beta=0.6, phases=iid", 0.6, iid),
        "fig5a" => takagi_fig("fig5a", "basis=takagi, lambda=2, beta=0.3, phases=zero", 0.3),
        "fig5b" => takagi_fig("fig5b", "basis=takagi, lambda=2, beta=0.6, phases=zero", 0.6),
        "fig5c" => takagi_fig("fig5c", "basis=takagi, lambda=2, beta=1, phases=zero", 1.0),
        "fig6" => FigurePreset {
            id: "fig6",
            caption: "basis=exp, coeff=n^-2, freq=2^n, tau=0, phases=zero",
            spec: SeriesSpec {
                coeffs: CoefficientRule::Power { exponent: 2.0 },
                freqs: FrequencyRule::Geometric { ratio: 2.0 },
                freq_scale: 2.0,
                ..SeriesSpec::riemann(1.0, 2.0, PhaseModel::Zero)
            },
        },
        other => return Err(Error::invalid("figure", format!("unknown preset {other:?}; expected one of {FIGURE_IDS:?}"))),
    })
}

/// Evaluates the preset on `FIGURE_POINTS` points of `[0, 1)`. `seed`
/// replaces the seed of random-phase presets.
pub fn cmd_figure(id: &str, seed: Option<u64>) -> Result<(FigurePreset, SampledCurve)> {
    let mut preset = figure_preset(id)?;
    if let (PhaseModel::SteinhausIid { seed: s }, Some(new)) = (&mut preset.spec.phases, seed) {
        *s = new;
    }
    let set = TestSet::Interval { lo: 0.0, hi: 1.0, points: FIGURE_POINTS };
    let curve = eval_series(&preset.spec, &set, FIGURE_EPS_TAIL, 0)?;
    Ok((preset, curve))
}

/// 8-bit RGB PNG, `FIGURE_SIZE` square, equal axis scaling, one pixel
/// per point.
pub fn render_png(points: &[[f64; 2]]) -> Result<Vec<u8>> {
    const MARGIN: f64 = 16.0;
    let size = FIGURE_SIZE;
    let mut img = image::RgbImage::from_pixel(size, size, image::Rgb([255, 255, 255]));
    if !points.is_empty() {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let usable = size as f64 - 2.0 * MARGIN;
        let scale = if span > 0.0 { usable / span } else { 0.0 };
        let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let half = size as f64 / 2.0;
        for p in points {
            let px = (half + (p[0] - centre[0]) * scale).floor();
            let py = (half - (p[1] - centre[1]) * scale).floor();
            if px >= 0.0 && py >= 0.0 && px < size as f64 && py < size as f64 {
                img.put_pixel(px as u32, py as u32, image::Rgb([16, 32, 96]));
            }
        }
    }
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).map_err(|e| Error::Image(e.to_string()))?;
    Ok(out.into_inner())
}
