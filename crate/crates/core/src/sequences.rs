//! Coefficient and frequency sequences, dyadic-style frequency blocks and the
//! block-decay exponents σ and τ.
//!
//! Frequencies are normalised so that `λ₁ = 1`. A geometric rule with ratio
//! `λ` therefore produces `λₙ = λⁿ⁻¹`; series presets that want the classical
//! `λⁿ` frequencies carry an extra frequency scale (see
//! `SeriesSpec::freq_scale` in the sampler).
//!
//! For a block ratio `q > 1`, block `k` holds the indices with
//! `qᵏ ≤ λₙ < qᵏ⁺¹` and its mass is `s_k = (Σ |aₙ|²)^{1/2}`. The exponents are
//! `σ = liminf −log s_k / (k log q)` and `τ = limsup` of the same ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{Ext, NeumaierSum};

/// Number of leading indices scanned when a sup over the ratio sequence is
/// needed and no closed form exists.
pub const GAP_SCAN: usize = 10_000;

const EXACT_POWER_MAX_EXPONENT: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyRule {
    /// `λₙ = ratioⁿ⁻¹`.
    Geometric { ratio: f64 },
    /// `λₙ = nᵃ`.
    Power { exponent: f64 },
    /// Explicit, strictly increasing list (index 1 is the first entry).
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientRule {
    /// `aₙ = ratio^{−β n}`.
    Geometric { beta: f64, ratio: f64 },
    /// `aₙ = n^{−b}`.
    Power { exponent: f64 },
    /// Inside each frequency block `[qᵏ, qᵏ⁺¹)` a geometric run with first
    /// term `max(k, 1)⁻²` and ratio 1/2.
    PerBlockGeometric { q: f64 },
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub k: u32,
    /// First and last index (inclusive, 1-based) with `qᵏ ≤ λₙ < qᵏ⁺¹`.
    pub index_range: (usize, usize),
    pub s_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapExponents {
    pub q: f64,
    /// `(k, −log s_k / (k log q))` for every block in the window.
    pub per_k: Vec<(u32, f64)>,
    /// `(k, −log(s_k / s_{k_min}) / ((k − k_min) log q))` for `k > k_min`.
    /// Same liminf and limsup as `per_k`, without the constant-prefactor bias.
    pub anchored: Vec<(u32, f64)>,
    pub sigma_est: f64,
    pub tau_est: f64,
    /// Least-squares slope of `−log s_k` against `k log q` over the window.
    pub slope: f64,
    pub window: (u32, u32),
    pub blocks: Vec<BlockStats>,
}

fn q_power(q: f64, k: u32) -> Ext {
    Ext::powi(Ext::new(q), k)
}

fn exact_integer_power(n: usize, a: f64) -> Option<Ext> {
    if a.fract() != 0.0 || !(0.0..=EXACT_POWER_MAX_EXPONENT).contains(&a) {
        return None;
    }
    let mut acc: u128 = 1;
    for _ in 0..a as u32 {
        acc = acc.checked_mul(n as u128)?;
    }
    if acc >= 1u128 << 106 {
        return None;
    }
    Some(Ext::from_u128(acc))
}

impl FrequencyRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            FrequencyRule::Geometric { ratio } => {
                if !(ratio.is_finite() && *ratio > 1.0) {
                    return Err(Error::invalid("frequency rule", format!("geometric ratio {ratio} must be > 1")));
                }
            }
            FrequencyRule::Power { exponent } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::invalid("frequency rule", format!("power exponent {exponent} must be > 0")));
                }
            }
            FrequencyRule::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::invalid("frequency rule", "explicit list is empty"));
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::invalid("frequency rule", "explicit frequencies must be finite and positive"));
                }
                if values.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("frequency rule", "explicit frequencies must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    /// Number of available terms, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            FrequencyRule::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `λₙ` in double-double precision. `n` is 1-based.
    pub fn lambda_ext(&self, n: usize) -> Result<Ext> {
        assert!(n >= 1, "frequency indices are 1-based");
        match self {
            FrequencyRule::Geometric { ratio } => Ok(Ext::powi(Ext::new(*ratio), (n - 1) as u32)),
            FrequencyRule::Power { exponent } => Ok(exact_integer_power(n, *exponent)
                .unwrap_or_else(|| Ext::new((n as f64).powf(*exponent)))),
            FrequencyRule::Explicit { values } => values
                .get(n - 1)
                .map(|v| Ext::new(*v))
                .ok_or(Error::Exhausted { index: n, len: values.len() }),
        }
    }

    /// The first `count` frequencies.
    pub fn frequencies(&self, count: usize) -> Result<Vec<Ext>> {
        (1..=count).map(|n| self.lambda_ext(n)).collect()
    }

    /// Smallest 1-based index with `λₙ ≥ bound`, or `None` if the (finite)
    /// list never reaches it.
    fn first_index_at_least(&self, bound: Ext) -> Result<Option<usize>> {
        let ge = |n: usize| -> Result<bool> {
            Ok(self.lambda_ext(n)?.total_cmp(&bound) != std::cmp::Ordering::Less)
        };
        let limit = self.len().unwrap_or(usize::MAX / 4);
        if limit == 0 {
            return Ok(None);
        }
        if ge(1)? {
            return Ok(Some(1));
        }
        // exponential search for an upper bracket
        let mut lo = 1;
        let mut hi = 2;
        loop {
            if hi >= limit {
                hi = limit;
                if !ge(hi)? {
                    return Ok(None);
                }
                break;
            }
            if ge(hi)? {
                break;
            }
            lo = hi;
            hi *= 2;
        }
        // invariant: λ_lo < bound <= λ_hi
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ge(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }

    /// Block index `k` with `qᵏ ≤ λₙ < qᵏ⁺¹`.
    pub fn block_of(&self, n: usize, q: f64) -> Result<u32> {
        let lam = self.lambda_ext(n)?;
        let guess = (lam.to_f64().ln() / q.ln()).floor().max(0.0) as u32;
        let mut k = guess;
        while k > 0 && lam.total_cmp(&q_power(q, k)) == std::cmp::Ordering::Less {
            k -= 1;
        }
        while lam.total_cmp(&q_power(q, k + 1)) != std::cmp::Ordering::Less {
            k += 1;
        }
        Ok(k)
    }
}

/// `λₙ` for a 1-based index.
pub fn lambda_at(rule: &FrequencyRule, n: usize) -> Result<f64> {
    rule.validate()?;
    if n == 0 {
        return Err(Error::invalid("index", "frequency indices start at 1"));
    }
    Ok(rule.lambda_ext(n)?.to_f64())
}

/// `sup λₙ₊₁/λₙ` over `n < n_max`.
pub fn gap_ratio(rule: &FrequencyRule, n_max: usize) -> f64 {
    match rule {
        FrequencyRule::Geometric { ratio } => *ratio,
        // n ↦ ((n+1)/n)^a is decreasing, so the sup sits at n = 1.
        FrequencyRule::Power { exponent } => 2f64.powf(*exponent),
        FrequencyRule::Explicit { values } => {
            let upto = n_max.min(values.len());
            values[..upto]
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

impl CoefficientRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientRule::Geometric { beta, ratio } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(Error::invalid("coefficient rule", format!("beta {beta} must be > 0")));
                }
                if !(ratio.is_finite() && *ratio > 1.0) {
                    return Err(Error::invalid("coefficient rule", format!("ratio {ratio} must be > 1")));
                }
            }
            CoefficientRule::Power { exponent } => {
                if !(exponent.is_finite() && *exponent > 1.0) {
                    return Err(Error::invalid(
                        "coefficient rule",
                        format!("power exponent {exponent} must be > 1 for absolute summability"),
                    ));
                }
            }
            CoefficientRule::PerBlockGeometric { q } => {
                if !(q.is_finite() && *q > 1.0) {
                    return Err(Error::invalid("coefficient rule", format!("block ratio {q} must be > 1")));
                }
            }
            CoefficientRule::Explicit { values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("coefficient rule", "explicit coefficients must be finite"));
                }
                // An all-zero (or empty) list is the null series and is accepted as such.
                if !self.is_null() && values.iter().any(|v| *v == 0.0) {
                    return Err(Error::invalid("coefficient rule", "coefficients must be non-zero"));
                }
            }
        }
        Ok(())
    }

    /// True for the degenerate all-zero series.
    pub fn is_null(&self) -> bool {
        matches!(self, CoefficientRule::Explicit { values } if values.iter().all(|v| *v == 0.0))
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            CoefficientRule::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `aₙ` for a 1-based index. Frequencies are needed only by the
    /// per-block rule.
    pub fn value_at(&self, freqs: &FrequencyRule, n: usize) -> Result<f64> {
        assert!(n >= 1, "coefficient indices are 1-based");
        match self {
            CoefficientRule::Geometric { beta, ratio } => Ok((-beta * n as f64 * ratio.ln()).exp()),
            CoefficientRule::Power { exponent } => Ok((n as f64).powf(-exponent)),
            CoefficientRule::PerBlockGeometric { q } => {
                let k = freqs.block_of(n, *q)?;
                let first = freqs
                    .first_index_at_least(q_power(*q, k))?
                    .expect("block of an existing index is non-empty");
                let lead = (k.max(1) as f64).powi(-2);
                Ok(lead * 0.5f64.powi((n - first) as i32))
            }
            CoefficientRule::Explicit { values } => values
                .get(n - 1)
                .copied()
                .ok_or(Error::Exhausted { index: n, len: values.len() }),
        }
    }

    pub fn coefficients(&self, freqs: &FrequencyRule, count: usize) -> Result<Vec<f64>> {
        match self {
            CoefficientRule::PerBlockGeometric { q } => {
                // walk blocks instead of searching per index
                let mut out = Vec::with_capacity(count);
                let mut block = None;
                let mut run = 0i32;
                for n in 1..=count {
                    let k = freqs.block_of(n, *q)?;
                    if block != Some(k) {
                        block = Some(k);
                        run = 0;
                    }
                    out.push((k.max(1) as f64).powi(-2) * 0.5f64.powi(run));
                    run += 1;
                }
                Ok(out)
            }
            _ => (1..=count).map(|n| self.value_at(freqs, n)).collect(),
        }
    }
}

/// Upper bound on `Σ_{n>N} |aₙ|`.
pub fn l1_tail(coeffs: &CoefficientRule, freqs: &FrequencyRule, n: usize) -> Result<f64> {
    Ok(match coeffs {
        CoefficientRule::Geometric { beta, ratio } => {
            let r = ratio.powf(-beta);
            // powf is exact on exact powers, so dyadic tails come out exact
            ratio.powf(-beta * (n + 1) as f64) / (1.0 - r)
        }
        CoefficientRule::Power { exponent } => {
            let b = *exponent;
            if n == 0 {
                b / (b - 1.0)
            } else {
                (n as f64).powf(1.0 - b) / (b - 1.0)
            }
        }
        CoefficientRule::PerBlockGeometric { q } => {
            if freqs.len().is_some_and(|len| n >= len) {
                0.0
            } else {
                let next = coeffs.value_at(freqs, n + 1)?;
                let k = freqs.block_of(n + 1, *q)?;
                // remainder of the current run, then every later block k' > k
                // contributes at most 2/k'^2.
                let later = if k == 0 { 2.0 } else { 1.0 / k as f64 };
                2.0 * next + 2.0 * later
            }
        }
        CoefficientRule::Explicit { values } => {
            let upto = freqs.len().map_or(values.len(), |l| l.min(values.len()));
            if n >= upto {
                0.0
            } else {
                values[n..upto].iter().map(|v| v.abs()).collect::<NeumaierSum>().sum()
            }
        }
    })
}

/// Mass of frequency block `k` for block ratio `q`.
pub fn block_stats(coeffs: &CoefficientRule, freqs: &FrequencyRule, q: f64, k: u32) -> Result<BlockStats> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::invalid("block ratio", format!("q = {q} must be > 1")));
    }
    let lower = q_power(q, k);
    let upper = q_power(q, k + 1);
    let first = freqs.first_index_at_least(lower)?.ok_or(Error::EmptyBlock { k })?;
    let end = freqs.first_index_at_least(upper)?;
    let last = match end {
        Some(e) => e - 1,
        // a finite list that never reaches the upper edge cannot certify the block
        None => return Err(Error::EmptyBlock { k }),
    };
    if last < first {
        return Err(Error::EmptyBlock { k });
    }
    let mut acc = NeumaierSum::new();
    if let CoefficientRule::PerBlockGeometric { q: cq } = coeffs {
        if *cq == q {
            // the run restarts at `first`
            let lead = (k.max(1) as f64).powi(-2);
            let len = (last - first + 1).min(i32::MAX as usize) as i32;
            let s2 = lead * lead * (1.0 - 0.25f64.powi(len)) / 0.75;
            return Ok(BlockStats { k, index_range: (first, last), s_k: s2.sqrt() });
        }
    }
    for n in first..=last {
        let a = coeffs.value_at(freqs, n)?;
        acc.add(a * a);
    }
    Ok(BlockStats { k, index_range: (first, last), s_k: acc.sum().sqrt() })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = NeumaierSum::new();
    let mut sxx = NeumaierSum::new();
    for (x, y) in xs.iter().zip(ys) {
        sxy.add((x - mx) * (y - my));
        sxx.add((x - mx) * (x - mx));
    }
    sxy.sum() / sxx.sum()
}

/// Finite-window estimates of σ and τ with the block ratio taken from
/// [`gap_ratio`].
pub fn estimate_sigma_tau(
    coeffs: &CoefficientRule,
    freqs: &FrequencyRule,
    k_min: u32,
    k_max: u32,
) -> Result<GapExponents> {
    let q = gap_ratio(freqs, GAP_SCAN);
    estimate_sigma_tau_with_q(coeffs, freqs, q, k_min, k_max)
}

pub fn estimate_sigma_tau_with_q(
    coeffs: &CoefficientRule,
    freqs: &FrequencyRule,
    q: f64,
    k_min: u32,
    k_max: u32,
) -> Result<GapExponents> {
    coeffs.validate()?;
    freqs.validate()?;
    if !(k_min >= 1 && k_max > k_min) {
        return Err(Error::invalid("window", format!("need k_max > k_min >= 1, got [{k_min}, {k_max}]")));
    }
    let blocks = (k_min..=k_max)
        .map(|k| block_stats(coeffs, freqs, q, k))
        .collect::<Result<Vec<_>>>()?;
    let lq = q.ln();
    let neg_log: Vec<f64> = blocks.iter().map(|b| -b.s_k.ln()).collect();
    let per_k: Vec<(u32, f64)> = blocks
        .iter()
        .zip(&neg_log)
        .map(|(b, y)| (b.k, y / (b.k as f64 * lq)))
        .collect();
    let anchored: Vec<(u32, f64)> = blocks
        .iter()
        .zip(&neg_log)
        .skip(1)
        .map(|(b, y)| (b.k, (y - neg_log[0]) / ((b.k - k_min) as f64 * lq)))
        .collect();
    let sigma_est = anchored.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let tau_est = anchored.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = blocks.iter().map(|b| b.k as f64 * lq).collect();
    let slope = least_squares_slope(&xs, &neg_log);
    Ok(GapExponents {
        q,
        per_k,
        anchored,
        sigma_est,
        tau_est,
        slope,
        window: (k_min, k_max),
        blocks,
    })
}
