//! Phase draws, series recipes and evaluation of partial sums on point sets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlannerScalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::basis::{cis_turns, BasisFunction};
use crate::error::{Error, Result};
use crate::ext::{Ext, NeumaierSum};
use crate::sequences::{l1_tail, CoefficientRule, FrequencyRule};

/// Hard cap on the number of positive-index terms.
pub const MAX_TERMS: usize = 10_000_000;
/// Hard cap on the number of points a Cantor test set may hold.
pub const MAX_CANTOR_LEVEL: u32 = 24;
/// Largest FFT length used by the spectral path.
pub const MAX_SPECTRAL_LEN: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseModel {
    /// Independent uniform phases from a seeded ChaCha8 stream.
    SteinhausIid { seed: u64 },
    /// `θₙ = nα mod 1`.
    Equidistributed { alpha: f64 },
    Zero,
}

/// One random series. The positive-index part is
/// `coeff_scale · Σ aₙ Xₙ φ(freq_scale · λₙ x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub coeffs: CoefficientRule,
    pub freqs: FrequencyRule,
    #[serde(default = "one")]
    pub freq_scale: f64,
    #[serde(default = "one")]
    pub coeff_scale: f64,
    pub basis: BasisFunction,
    pub phases: PhaseModel,
    /// Mandelbrot extension: adds `Σ_{m≥0} λ^{βm} X₋ₘ φ(λ^{−m} x)`. Needs
    /// geometric coefficients and frequencies with a common ratio.
    #[serde(default)]
    pub two_sided: bool,
    /// Adds a mirrored copy of every term (same coefficient and frequency,
    /// independent phase) and the linear term `i x X₀`.
    #[serde(default)]
    pub mirror: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestSet {
    /// `points` grid points `lo + j (hi − lo) / points`, `j < points`.
    Interval { lo: f64, hi: f64, points: usize },
    /// Left endpoints of the `2^level` intervals of the middle Cantor set
    /// with contraction ratio `keep_ratio`.
    CantorMiddle { keep_ratio: f64, level: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub xs: Vec<f64>,
    /// `im` is zero for real-valued series.
    pub values: Vec<Complex64>,
    pub truncation_n: usize,
    /// Negative-side cutoff for two-sided series.
    pub truncation_m: Option<usize>,
    pub tail_bound: f64,
    pub spec_hash: String,
    pub seed: Option<u64>,
    pub stream_id: u64,
    pub codomain_dim: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphPoints {
    /// `(x, S(x))` for real-valued series.
    Planar(Vec<[f64; 2]>),
    /// `(x, Re S(x), Im S(x))`.
    Spatial(Vec<[f64; 3]>),
}

impl GraphPoints {
    pub fn len(&self) -> usize {
        match self {
            GraphPoints::Planar(p) => p.len(),
            GraphPoints::Spatial(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    /// Spectral when the frequencies are integers and the set is a grid of
    /// step `1/P`, direct otherwise.
    #[default]
    Auto,
    Direct,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub n: usize,
    pub m: Option<usize>,
    pub tail_bound: f64,
}

impl SeriesSpec {
    pub fn weierstrass(beta: f64, lambda: f64, phases: PhaseModel) -> Self {
        SeriesSpec {
            coeffs: CoefficientRule::Geometric { beta, ratio: lambda },
            freqs: FrequencyRule::Geometric { ratio: lambda },
            freq_scale: lambda,
            coeff_scale: 1.0,
            basis: BasisFunction::Exp,
            phases,
            two_sided: false,
            mirror: false,
        }
    }

    /// `Σ n^{−b} Xₙ e^{2πi nᵃ x}`.
    pub fn riemann(a: f64, b: f64, phases: PhaseModel) -> Self {
        SeriesSpec {
            coeffs: CoefficientRule::Power { exponent: b },
            freqs: FrequencyRule::Power { exponent: a },
            freq_scale: 1.0,
            coeff_scale: 1.0,
            basis: BasisFunction::Exp,
            phases,
            two_sided: false,
            mirror: false,
        }
    }

    /// Two-sided series with `φ(t) = 1 − e^{2πit}`.
    pub fn weierstrass_mandelbrot(beta: f64, lambda: f64, phases: PhaseModel) -> Self {
        SeriesSpec {
            basis: BasisFunction::OneMinusExp,
            two_sided: true,
            ..Self::weierstrass(beta, lambda, phases)
        }
    }

    /// `Σ_{n≠0} (e^{−4π²in²t} − 1) Xₙ / (−4π²n²) + i t X₀`.
    pub fn riemann_vortex(phases: PhaseModel) -> Self {
        SeriesSpec {
            coeffs: CoefficientRule::Power { exponent: 2.0 },
            freqs: FrequencyRule::Power { exponent: 2.0 },
            freq_scale: -2.0 * PI,
            coeff_scale: 1.0 / (4.0 * PI * PI),
            basis: BasisFunction::OneMinusExp,
            phases,
            two_sided: false,
            mirror: true,
        }
    }

    /// `Σ n^{−b} sin 2π(nᵃ x + θₙ)`.
    pub fn real_sine(a: f64, b: f64, phases: PhaseModel) -> Self {
        SeriesSpec {
            basis: BasisFunction::SineReal,
            ..Self::riemann(a, b, phases)
        }
    }

    /// The identically zero series.
    pub fn null() -> Self {
        SeriesSpec {
            coeffs: CoefficientRule::Explicit { values: vec![] },
            freqs: FrequencyRule::Geometric { ratio: 2.0 },
            freq_scale: 1.0,
            coeff_scale: 1.0,
            basis: BasisFunction::Exp,
            phases: PhaseModel::Zero,
            two_sided: false,
            mirror: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.coeffs.validate()?;
        self.freqs.validate()?;
        self.basis.validate()?;
        if !(self.freq_scale.is_finite() && self.freq_scale != 0.0) {
            return Err(Error::invalid("series", "freq_scale must be finite and non-zero"));
        }
        if !(self.coeff_scale.is_finite() && self.coeff_scale != 0.0) {
            return Err(Error::invalid("series", "coeff_scale must be finite and non-zero"));
        }
        if let PhaseModel::Equidistributed { alpha } = self.phases {
            if !alpha.is_finite() {
                return Err(Error::invalid("phases", "alpha must be finite"));
            }
        }
        if self.two_sided {
            if self.mirror {
                return Err(Error::invalid("series", "two_sided and mirror are exclusive"));
            }
            let (beta, ratio) = self.mandelbrot_params()?;
            if beta >= 1.0 {
                return Err(Error::invalid("series", format!("two-sided series need beta < 1, got {beta}")));
            }
            if self.freq_scale != ratio {
                return Err(Error::invalid("series", "two-sided series need freq_scale equal to the ratio"));
            }
            if crate::basis::eval_basis(&self.basis, 0.0).norm() != 0.0 {
                return Err(Error::invalid("series", "two-sided series need a basis with φ(0) = 0"));
            }
        }
        Ok(())
    }

    fn mandelbrot_params(&self) -> Result<(f64, f64)> {
        match (&self.coeffs, &self.freqs) {
            (CoefficientRule::Geometric { beta, ratio }, FrequencyRule::Geometric { ratio: r2 }) if ratio == r2 => {
                Ok((*beta, *ratio))
            }
            _ => Err(Error::invalid(
                "series",
                "two-sided series need geometric coefficients and frequencies with a common ratio",
            )),
        }
    }

    pub fn codomain_dim(&self) -> u8 {
        self.basis.codomain_dim()
    }

    pub fn seed(&self) -> Option<u64> {
        match self.phases {
            PhaseModel::SteinhausIid { seed } => Some(seed),
            _ => None,
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("series specs always serialise");
        hex::encode(Sha256::digest(&json))
    }

    fn positive_weight(&self) -> f64 {
        let copies = if self.mirror { 2.0 } else { 1.0 };
        copies * self.coeff_scale.abs() * self.basis.sup_norm()
    }

    /// Bound on the omitted positive-index terms beyond `n`.
    pub fn tail_after(&self, n: usize) -> Result<f64> {
        if self.coeffs.is_null() {
            return Ok(0.0);
        }
        Ok(l1_tail(&self.coeffs, &self.freqs, n)? * self.positive_weight())
    }

    /// Bound on the negative-index terms beyond `m`, for `|x| ≤ x_max`.
    pub fn negative_tail_after(&self, m: usize, x_max: f64) -> Result<f64> {
        let (beta, ratio) = self.mandelbrot_params()?;
        let r = ratio.powf(-(1.0 - beta));
        Ok(self.basis.lipschitz_upper() * x_max * r.powi(m as i32 + 1) / (1.0 - r))
    }

    /// `Σ |aₙ| · sup |φ|` including the tail, a bound on `|S|` for the
    /// positive side.
    pub fn modulus_bound(&self, n: usize) -> Result<f64> {
        let coeffs = self.coeffs.coefficients(&self.freqs, self.term_count(n))?;
        let head: f64 = coeffs.iter().map(|a| a.abs()).collect::<NeumaierSum>().sum();
        Ok(head * self.positive_weight() + self.tail_after(n)?)
    }

    fn term_count(&self, n: usize) -> usize {
        let lim = [self.coeffs.len(), self.freqs.len()].into_iter().flatten().min();
        lim.map_or(n, |l| l.min(n))
    }
}

/// Smallest `N` with `tail_after(N) ≤ eps_tail`, found by doubling then
/// bisection.
pub fn truncation_index(spec: &SeriesSpec, eps_tail: f64) -> Result<usize> {
    if !(eps_tail.is_finite() && eps_tail > 0.0) {
        return Err(Error::invalid("eps_tail", format!("{eps_tail} must be positive")));
    }
    spec.validate()?;
    if spec.coeffs.is_null() {
        return Ok(0);
    }
    if let Some(len) = spec.term_count_limit() {
        // a finite list is summed in full when the bound cannot be met earlier
        let mut lo = 0;
        let mut hi = len;
        if spec.tail_after(0)? <= eps_tail {
            return Ok(0);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if spec.tail_after(mid)? <= eps_tail {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(hi);
    }
    if spec.tail_after(0)? <= eps_tail {
        return Ok(0);
    }
    let mut hi = 1usize;
    while spec.tail_after(hi)? > eps_tail {
        if hi >= MAX_TERMS {
            return Err(Error::TruncationUnreachable { eps: eps_tail, cap: MAX_TERMS });
        }
        hi = (hi * 2).min(MAX_TERMS);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if spec.tail_after(mid)? <= eps_tail {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

impl SeriesSpec {
    fn term_count_limit(&self) -> Option<usize> {
        [self.coeffs.len(), self.freqs.len()].into_iter().flatten().min()
    }
}

/// Smallest `M` whose negative-side tail is at most `eps_tail` on
/// `|x| ≤ x_max`.
pub fn negative_truncation_index(spec: &SeriesSpec, eps_tail: f64, x_max: f64) -> Result<usize> {
    let mut m = 0usize;
    while spec.negative_tail_after(m, x_max)? > eps_tail {
        m += 1;
        if m >= MAX_TERMS {
            return Err(Error::TruncationUnreachable { eps: eps_tail, cap: MAX_TERMS });
        }
    }
    Ok(m)
}

/// Positive and (for two-sided series) negative cutoffs for a target total
/// tail. Two-sided series split the budget evenly.
pub fn plan_truncation(spec: &SeriesSpec, eps_tail: f64, x_max: f64) -> Result<Truncation> {
    if spec.two_sided {
        let n = truncation_index(spec, eps_tail / 2.0)?;
        let m = negative_truncation_index(spec, eps_tail / 2.0, x_max)?;
        let tail_bound = spec.tail_after(n)? + spec.negative_tail_after(m, x_max)?;
        Ok(Truncation { n, m: Some(m), tail_bound })
    } else {
        let n = truncation_index(spec, eps_tail)?;
        Ok(Truncation { n, m: None, tail_bound: spec.tail_after(n)? })
    }
}

fn steinhaus_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// `θ₁, …, θ_count`.
pub fn draw_phases(model: &PhaseModel, count: usize, stream_id: u64) -> Vec<f64> {
    match model {
        PhaseModel::Zero => vec![0.0; count],
        PhaseModel::Equidistributed { alpha } => {
            let a = Ext::new(*alpha);
            (1..=count).map(|n| a.frac_mul(n as f64)).collect()
        }
        PhaseModel::SteinhausIid { seed } => {
            let mut rng = steinhaus_stream(*seed, stream_id);
            (0..count).map(|_| rng.random::<f64>()).collect()
        }
    }
}

/// `θ₀, θ₋₁, …, θ₋₍count−1₎`. Random phases for non-positive indices come
/// from the complementary stream `!stream_id`, so the positive-side draws
/// do not depend on how many negative terms are used.
pub fn draw_negative_phases(model: &PhaseModel, count: usize, stream_id: u64) -> Vec<f64> {
    match model {
        PhaseModel::Zero => vec![0.0; count],
        PhaseModel::Equidistributed { alpha } => {
            let a = Ext::new(*alpha);
            (0..count).map(|m| a.frac_mul(-(m as f64))).collect()
        }
        PhaseModel::SteinhausIid { seed } => {
            let mut rng = steinhaus_stream(*seed, !stream_id);
            (0..count).map(|_| rng.random::<f64>()).collect()
        }
    }
}

pub fn cantor_points(r: f64, m: u32) -> Result<Vec<f64>> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::invalid("cantor ratio", format!("{r} must lie in (0, 1/2)")));
    }
    if m > MAX_CANTOR_LEVEL {
        return Err(Error::invalid("cantor level", format!("{m} exceeds the cap {MAX_CANTOR_LEVEL}")));
    }
    // digit weights (1 − r) r^{i−1}, most significant first
    let weights: Vec<f64> = (0..m).map(|i| (1.0 - r) * r.powi(i as i32)).collect();
    Ok((0..1usize << m)
        .map(|j| {
            weights
                .iter()
                .enumerate()
                .filter(|(i, _)| (j >> (m as usize - 1 - i)) & 1 == 1)
                .fold(0.0, |acc, (_, w)| acc + w)
        })
        .collect())
}

impl TestSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            TestSet::Interval { lo, hi, points } => {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return Err(Error::invalid("test set", format!("need lo < hi, got [{lo}, {hi}]")));
                }
                if *points == 0 {
                    return Err(Error::invalid("test set", "interval needs at least one point"));
                }
            }
            TestSet::CantorMiddle { keep_ratio, level } => {
                cantor_points(*keep_ratio, 0)?;
                if *level > MAX_CANTOR_LEVEL {
                    return Err(Error::invalid("test set", format!("level {level} exceeds {MAX_CANTOR_LEVEL}")));
                }
            }
        }
        Ok(())
    }

    pub fn hausdorff_dim(&self) -> f64 {
        match self {
            TestSet::Interval { .. } => 1.0,
            TestSet::CantorMiddle { keep_ratio, .. } => 2f64.ln() / (1.0 / keep_ratio).ln(),
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            TestSet::Interval { lo, hi, points } => {
                let step = (hi - lo) / *points as f64;
                Ok((0..*points).map(|j| lo + j as f64 * step).collect())
            }
            TestSet::CantorMiddle { keep_ratio, level } => cantor_points(*keep_ratio, *level),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TestSet::Interval { points, .. } => *points,
            TestSet::CantorMiddle { level, .. } => 1 << level,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest `|x|` over the set.
    pub fn abs_max(&self) -> f64 {
        match self {
            TestSet::Interval { lo, hi, .. } => lo.abs().max(hi.abs()),
            TestSet::CantorMiddle { .. } => 1.0,
        }
    }

    /// `(x₀, P)` when the stored points are exactly `x₀ + j/P`. `P` has to
    /// be a power of two and `x₀` a multiple of `1/P`: otherwise the stored
    /// floats differ from the rationals by an ulp, and a rough series
    /// evaluated at the two differs far more than that.
    pub fn unit_fraction_grid(&self) -> Option<(f64, usize)> {
        match self {
            TestSet::Interval { lo, hi, points } => {
                let p = *points as f64 / (hi - lo);
                let ok = p.fract() == 0.0
                    && p >= 1.0
                    && p <= MAX_SPECTRAL_LEN as f64
                    && (p as u64).is_power_of_two()
                    && (hi - lo) * p == *points as f64
                    && (lo * p).fract() == 0.0
                    && (lo * p).abs() < 2f64.powi(52);
                ok.then_some((*lo, p as usize))
            }
            TestSet::CantorMiddle { .. } => None,
        }
    }
}

/// Phase-free description of a truncated series. Terms are flattened as
/// positive indices, then the linear term (if any), then the negative or
/// mirrored indices; phases are flattened as the positive draws followed by
/// the non-positive draws, which lines up with that order.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub basis: BasisFunction,
    /// `(coeff_scale · aₙ, frequency)`, increasing `n`.
    pub positive: Vec<(f64, Ext)>,
    /// Whether the linear term `i x X₀` is present.
    pub drift: bool,
    pub negative: Vec<(f64, Ext)>,
}

pub fn skeleton(spec: &SeriesSpec, n: usize, m: Option<usize>) -> Result<Skeleton> {
    spec.validate()?;
    let n = spec.term_count(n);
    let coeffs = if spec.coeffs.is_null() { vec![] } else { spec.coeffs.coefficients(&spec.freqs, n)? };
    let n = coeffs.len();
    let scale = Ext::new(spec.freq_scale);
    let freqs: Vec<Ext> = spec.freqs.frequencies(n)?.into_iter().map(|f| f.mul(scale)).collect();
    let positive: Vec<(f64, Ext)> = coeffs.iter().zip(&freqs).map(|(a, f)| (a * spec.coeff_scale, *f)).collect();
    let mut negative = Vec::new();
    if spec.two_sided {
        let (beta, ratio) = spec.mandelbrot_params()?;
        let inv = Ext::new(ratio).recip();
        for k in 0..=m.unwrap_or(0) {
            let a = (beta * k as f64 * ratio.ln()).exp() * spec.coeff_scale;
            negative.push((a, Ext::powi(inv, k as u32)));
        }
    } else if spec.mirror {
        negative = positive.clone();
    }
    Ok(Skeleton { basis: spec.basis, positive, drift: spec.mirror, negative })
}

impl Skeleton {
    /// Number of flattened terms (and of phases).
    pub fn len(&self) -> usize {
        self.positive.len() + self.drift as usize + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattened phases for one stream.
    pub fn phases(&self, model: &PhaseModel, stream_id: u64) -> Vec<f64> {
        let mut th = draw_phases(model, self.positive.len(), stream_id);
        th.extend(draw_negative_phases(model, self.drift as usize + self.negative.len(), stream_id));
        th
    }

    /// Flattened real coefficients, `1` for the linear term.
    pub fn amplitudes(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.positive.iter().map(|t| t.0).collect();
        if self.drift {
            a.push(1.0);
        }
        a.extend(self.negative.iter().map(|t| t.0));
        a
    }

    /// Phase-free factor of each flattened term at `x`: the basis value, or
    /// the complex carrier `e^{2πiλx}` for real-valued series.
    pub fn carriers(&self, x: f64) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.positive.iter().map(|(_, f)| self.basis.carrier(*f, x)).collect();
        if self.drift {
            out.push(Complex64::new(0.0, x));
        }
        out.extend(self.negative.iter().map(|(_, f)| self.basis.carrier(*f, x)));
        out
    }

    pub fn with_phases(&self, phases: &[f64]) -> Prepared {
        let k = self.positive.len();
        let pos = self.positive.iter().zip(&phases[..k]).map(|((a, f), th)| (cis_turns(*th) * *a, *f)).collect();
        let rest = &phases[k..];
        let (drift, rest) = if self.drift {
            (Some(cis_turns(rest[0]) * Complex64::new(0.0, 1.0)), &rest[1..])
        } else {
            (None, rest)
        };
        let extra = self.negative.iter().zip(rest).map(|((a, f), th)| (cis_turns(*th) * *a, *f)).collect();
        Prepared { basis: self.basis, positive: pos, extra, drift }
    }
}

/// Truncated series with phases folded into the coefficients.
pub struct Prepared {
    basis: BasisFunction,
    positive: Vec<(Complex64, Ext)>,
    extra: Vec<(Complex64, Ext)>,
    /// Coefficient of `x` in the linear term.
    drift: Option<Complex64>,
}

fn prepare(spec: &SeriesSpec, trunc: &Truncation, stream_id: u64) -> Result<Prepared> {
    let sk = skeleton(spec, trunc.n, trunc.m)?;
    Ok(sk.with_phases(&sk.phases(&spec.phases, stream_id)))
}

impl Prepared {
    fn sum_terms(&self, terms: &[(Complex64, Ext)], x: f64, re: &mut NeumaierSum, im: &mut NeumaierSum) {
        for (c, f) in terms {
            let t = c * self.basis.carrier(*f, x);
            re.add(t.re);
            im.add(t.im);
        }
    }

    fn extra_at(&self, x: f64) -> Complex64 {
        let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
        if let Some(d) = self.drift {
            re.add(d.re * x);
            im.add(d.im * x);
        }
        self.sum_terms(&self.extra, x, &mut re, &mut im);
        Complex64::new(re.sum(), im.sum())
    }

    /// `S(x)` by compensated summation in increasing index order.
    pub fn direct(&self, x: f64) -> Complex64 {
        let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
        self.sum_terms(&self.positive, x, &mut re, &mut im);
        if let Some(d) = self.drift {
            re.add(d.re * x);
            im.add(d.im * x);
        }
        self.sum_terms(&self.extra, x, &mut re, &mut im);
        self.basis.project(Complex64::new(re.sum(), im.sum()))
    }

    fn spectral_ok(&self) -> bool {
        let integral = |f: &Ext| f.hi.fract() == 0.0 && f.lo.fract() == 0.0;
        let basis_ok = match self.basis {
            BasisFunction::Exp | BasisFunction::OneMinusExp | BasisFunction::SineReal => true,
            BasisFunction::ExpDiff { lambda, .. } => lambda.fract() == 0.0,
            BasisFunction::TakagiSine => false,
        };
        basis_ok && self.positive.iter().all(|(_, f)| integral(f))
    }

    /// Positive-side sum on `x₀ + j/P`, `j < len`, through one inverse DFT.
    fn spectral(&self, x0: f64, p: usize, len: usize) -> Vec<Complex64> {
        let pf = p as f64;
        let bin = |f: Ext| -> usize {
            let r = (f.hi.rem_euclid(pf) + f.lo.rem_euclid(pf)).rem_euclid(pf);
            r as usize % p
        };
        let mut bins = vec![Complex64::new(0.0, 0.0); p];
        let mut constant = Complex64::new(0.0, 0.0);
        for (c, f) in &self.positive {
            let c0 = *c * cis_turns(f.frac_mul(x0));
            match self.basis {
                BasisFunction::Exp | BasisFunction::SineReal => bins[bin(*f)] += c0,
                BasisFunction::OneMinusExp => {
                    constant += *c;
                    bins[bin(*f)] -= c0;
                }
                BasisFunction::ExpDiff { beta, lambda } => {
                    bins[bin(*f)] += c0;
                    let g = f.mul_f64(lambda);
                    bins[bin(g)] -= *c * cis_turns(g.frac_mul(x0)) * lambda.powf(-beta);
                }
                BasisFunction::TakagiSine => unreachable!("takagi basis has no finite spectrum"),
            }
        }
        let fft = FftPlannerScalar::new().plan_fft_inverse(p);
        fft.process(&mut bins);
        (0..len).map(|j| bins[j % p] + constant).collect()
    }
}

fn evaluate(spec: &SeriesSpec, set: &TestSet, trunc: &Truncation, stream_id: u64, path: EvalPath) -> Result<Vec<Complex64>> {
    let xs = set.points()?;
    let prep = prepare(spec, trunc, stream_id)?;
    let grid = set.unit_fraction_grid().filter(|_| prep.spectral_ok());
    let use_spectral = match path {
        EvalPath::Direct => false,
        EvalPath::Auto => grid.is_some(),
        EvalPath::Spectral => {
            if grid.is_none() {
                return Err(Error::invalid(
                    "eval path",
                    "spectral evaluation needs integer frequencies, a compatible basis and a grid of step 1/P",
                ));
            }
            true
        }
    };
    if let (true, Some((x0, p))) = (use_spectral, grid) {
        let mut vals = prep.spectral(x0, p, xs.len());
        let has_extra = !prep.extra.is_empty() || prep.drift.is_some();
        vals.par_iter_mut().zip(xs.par_iter()).for_each(|(v, &x)| {
            if has_extra {
                *v += prep.extra_at(x);
            }
            *v = prep.basis.project(*v);
        });
        Ok(vals)
    } else {
        Ok(xs.par_iter().map(|&x| prep.direct(x)).collect())
    }
}

/// Partial sums on the test set with a certified tail bound.
pub fn eval_series(spec: &SeriesSpec, set: &TestSet, eps_tail: f64, stream_id: u64) -> Result<SampledCurve> {
    eval_series_with(spec, set, eps_tail, stream_id, EvalPath::Auto)
}

pub fn eval_series_with(
    spec: &SeriesSpec,
    set: &TestSet,
    eps_tail: f64,
    stream_id: u64,
    path: EvalPath,
) -> Result<SampledCurve> {
    spec.validate()?;
    set.validate()?;
    let trunc = plan_truncation(spec, eps_tail, set.abs_max())?;
    let values = evaluate(spec, set, &trunc, stream_id, path)?;
    Ok(SampledCurve {
        xs: set.points()?,
        values,
        truncation_n: trunc.n,
        truncation_m: trunc.m,
        tail_bound: trunc.tail_bound,
        spec_hash: spec.hash(),
        seed: spec.seed(),
        stream_id,
        codomain_dim: spec.codomain_dim(),
    })
}

/// Partial sums with an explicit term count, no tolerance search. The
/// recorded tail bound is the bound for that count.
pub fn eval_series_terms(spec: &SeriesSpec, xs: &[f64], n: usize, m: Option<usize>, stream_id: u64) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let trunc = Truncation { n, m, tail_bound: f64::NAN };
    let prep = prepare(spec, &trunc, stream_id)?;
    Ok(xs.par_iter().map(|&x| prep.direct(x)).collect())
}

/// Graph points `(x, S(x))`.
pub fn eval_graph(spec: &SeriesSpec, set: &TestSet, eps_tail: f64, stream_id: u64) -> Result<GraphPoints> {
    let curve = eval_series(spec, set, eps_tail, stream_id)?;
    Ok(curve.graph())
}

impl SampledCurve {
    pub fn graph(&self) -> GraphPoints {
        if self.codomain_dim == 1 {
            GraphPoints::Planar(self.xs.iter().zip(&self.values).map(|(x, v)| [*x, v.re]).collect())
        } else {
            GraphPoints::Spatial(self.xs.iter().zip(&self.values).map(|(x, v)| [*x, v.re, v.im]).collect())
        }
    }

    /// Image points in the plane (real-valued series sit on the x-axis).
    pub fn image(&self) -> Vec<[f64; 2]> {
        self.values.iter().map(|v| [v.re, v.im]).collect()
    }
}
