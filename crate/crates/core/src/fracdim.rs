//! Box counting, log-log fits, Hölder exponents and an occupancy diagnostic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::NeumaierSum;
use crate::sampler::SampledCurve;

const AXIS_BITS: u32 = 21;
const AXIS_CELLS: u64 = 1 << AXIS_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetAggregation {
    /// Smallest count over the shifted grids.
    #[default]
    Min,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxCountOptions {
    /// Number of grids, shifted by `k/offsets · ε` along every axis.
    pub offsets: usize,
    pub aggregation: OffsetAggregation,
}

impl Default for BoxCountOptions {
    fn default() -> Self {
        BoxCountOptions { offsets: 4, aggregation: OffsetAggregation::Min }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountCurve {
    /// Decreasing box sides.
    pub scales: Vec<f64>,
    /// Occupied boxes per scale after aggregating the offset grids.
    pub counts: Vec<f64>,
    pub offsets_averaged: usize,
    pub aggregation: OffsetAggregation,
    /// Number of input points.
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitPolicy {
    pub min_count: f64,
    /// Scales with more than `max_fraction · points` boxes are saturated.
    pub max_fraction: f64,
    pub min_scales: usize,
}

impl Default for FitPolicy {
    fn default() -> Self {
        FitPolicy { min_count: 10.0, max_fraction: 0.2, min_scales: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Inclusive indices into the curve's scale list.
    pub fit_range: (usize, usize),
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub exponent: f64,
    pub stderr: f64,
    pub r_squared: f64,
    /// `(h, M(h))` for every lag, fitted or not.
    pub oscillation: Vec<(f64, f64)>,
    pub fit_range: (usize, usize),
}

fn bbox<const D: usize>(points: &[[f64; D]]) -> ([f64; D], [f64; D]) {
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for p in points {
        for a in 0..D {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// Largest side of the bounding box.
pub fn extent<const D: usize>(points: &[[f64; D]]) -> f64 {
    let (lo, hi) = bbox(points);
    (0..D).map(|a| hi[a] - lo[a]).fold(0.0, f64::max)
}

/// `extent · 2^{−j}` for `j` in `j_lo..=j_hi`.
pub fn dyadic_scales(extent: f64, j_lo: u32, j_hi: u32) -> Vec<f64> {
    (j_lo..=j_hi).map(|j| extent * 2f64.powi(-(j as i32))).collect()
}

fn count_grid<const D: usize>(points: &[[f64; D]], corner: &[f64; D], caps: Option<&[u64; D]>, eps: f64) -> usize {
    let mut keys: Vec<u64> = points
        .iter()
        .map(|p| {
            let mut key = 0u64;
            for a in 0..D {
                let mut i = ((p[a] - corner[a]) / eps).floor().max(0.0) as u64;
                if let Some(c) = caps {
                    i = i.min(c[a]);
                }
                key = (key << AXIS_BITS) | i.min(AXIS_CELLS - 1);
            }
            key
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

pub fn box_count<const D: usize>(points: &[[f64; D]], scales: &[f64]) -> Result<BoxCountCurve> {
    box_count_with(points, scales, BoxCountOptions::default())
}

/// Occupied-box counts. The unshifted grid is anchored at the bounding-box
/// corner and clamped to `⌈side/ε⌉` cells per axis.
pub fn box_count_with<const D: usize>(points: &[[f64; D]], scales: &[f64], opts: BoxCountOptions) -> Result<BoxCountCurve> {
    if points.is_empty() {
        return Err(Error::invalid("points", "box counting needs a non-empty point set"));
    }
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("points", "non-finite coordinate"));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("scales", "scales must be positive and strictly decreasing"));
    }
    if opts.offsets == 0 {
        return Err(Error::invalid("offsets", "need at least one grid"));
    }
    let (lo, hi) = bbox(points);
    let side = (0..D).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    if let Some(&smallest) = scales.last() {
        if side / smallest >= (AXIS_CELLS - 2) as f64 {
            return Err(Error::invalid("scales", format!("finest scale resolves more than 2^{AXIS_BITS} cells per axis")));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..scales.len()).flat_map(|j| (0..opts.offsets).map(move |k| (j, k))).collect();
    let raw: Vec<usize> = jobs
        .par_iter()
        .map(|&(j, k)| {
            let eps = scales[j];
            let shift = k as f64 / opts.offsets as f64 * eps;
            let corner: [f64; D] = std::array::from_fn(|a| lo[a] - shift);
            if k == 0 {
                let caps: [u64; D] = std::array::from_fn(|a| (((hi[a] - lo[a]) / eps).ceil() as u64).max(1) - 1);
                count_grid(points, &corner, Some(&caps), eps)
            } else {
                count_grid(points, &corner, None, eps)
            }
        })
        .collect();
    let counts = raw
        .chunks(opts.offsets)
        .map(|c| match opts.aggregation {
            OffsetAggregation::Min => *c.iter().min().expect("non-empty") as f64,
            OffsetAggregation::Mean => c.iter().sum::<usize>() as f64 / c.len() as f64,
        })
        .collect();
    Ok(BoxCountCurve {
        scales: scales.to_vec(),
        counts,
        offsets_averaged: opts.offsets,
        aggregation: opts.aggregation,
        points: points.len(),
    })
}

struct LineFit {
    slope: f64,
    stderr: f64,
    r_squared: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).collect::<NeumaierSum>().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect::<NeumaierSum>().sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).collect::<NeumaierSum>().sum();
    let slope = sxy / sxx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let stderr = if xs.len() > 2 { (ss_res / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    LineFit { slope, stderr, r_squared }
}

pub fn fit_dimension(curve: &BoxCountCurve, policy: &FitPolicy) -> Result<DimensionEstimate> {
    let cap = policy.max_fraction * curve.points as f64;
    let usable: Vec<usize> = (0..curve.scales.len())
        .filter(|&j| curve.counts[j] >= policy.min_count && curve.counts[j] <= cap)
        .collect();
    if usable.len() < policy.min_scales.max(2) {
        return Err(Error::TooFewScales { found: usable.len(), needed: policy.min_scales.max(2) });
    }
    let xs: Vec<f64> = usable.iter().map(|&j| -curve.scales[j].ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|&j| curve.counts[j].ln()).collect();
    let fit = fit_line(&xs, &ys);
    Ok(DimensionEstimate {
        value: fit.slope,
        stderr: fit.stderr,
        fit_range: (usable[0], *usable.last().expect("non-empty")),
        r_squared: fit.r_squared,
    })
}

/// Hölder exponent from the maximal oscillation over dyadic lags.
pub fn holder_exponent(curve: &SampledCurve) -> Result<HolderEstimate> {
    let vals: Vec<[f64; 2]> = curve.values.iter().map(|v| [v.re, v.im]).collect();
    holder_exponent_values(&curve.xs, &vals)
}

pub const HOLDER_MIN_POINTS: usize = 1 << 12;

pub fn holder_exponent_values(xs: &[f64], values: &[[f64; 2]]) -> Result<HolderEstimate> {
    let n = xs.len();
    if n != values.len() {
        return Err(Error::invalid("curve", "xs and values differ in length"));
    }
    if n < HOLDER_MIN_POINTS {
        return Err(Error::invalid("curve", format!("need at least {HOLDER_MIN_POINTS} points, got {n}")));
    }
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let uniform = dx > 0.0 && xs.windows(2).all(|w| ((w[1] - w[0]) - dx).abs() <= 1e-9 * dx.abs().max(1e-300));
    if !uniform {
        return Err(Error::invalid("curve", "Hölder estimation needs a uniform grid"));
    }
    // lags 2^k Δ up to a quarter of the record
    let k_max = (n / 4).ilog2() as usize;
    let oscillation: Vec<(f64, f64)> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let lag = 1usize << k;
            let m = (0..n - lag)
                .map(|i| {
                    let d0 = values[i + lag][0] - values[i][0];
                    let d1 = values[i + lag][1] - values[i][1];
                    d0.hypot(d1)
                })
                .fold(0.0, f64::max);
            (lag as f64 * dx, m)
        })
        .collect();
    if oscillation.iter().any(|(_, m)| *m == 0.0) {
        return Err(Error::Degenerate("zero oscillation at some lag; the exponent is undefined".into()));
    }
    // drop the two finest and three coarsest lags
    let (lo, hi) = (2, k_max.saturating_sub(3));
    if hi < lo + 3 {
        return Err(Error::TooFewScales { found: hi.saturating_sub(lo) + 1, needed: 4 });
    }
    let xs_fit: Vec<f64> = oscillation[lo..=hi].iter().map(|(h, _)| h.ln()).collect();
    let ys_fit: Vec<f64> = oscillation[lo..=hi].iter().map(|(_, m)| m.ln()).collect();
    let fit = fit_line(&xs_fit, &ys_fit);
    Ok(HolderEstimate {
        exponent: fit.slope,
        stderr: fit.stderr,
        r_squared: fit.r_squared,
        oscillation,
        fit_range: (lo, hi),
    })
}

/// Fraction of the `resolution`-sided cells of the bounding box that hold
/// at least one point.
pub fn occupied_fraction(points: &[[f64; 2]], resolution: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::invalid("points", "occupancy needs a non-empty point set"));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::invalid("resolution", format!("{resolution} must be positive")));
    }
    let (lo, hi) = bbox(points);
    let cells: [u64; 2] = std::array::from_fn(|a| (((hi[a] - lo[a]) / resolution).ceil() as u64).max(1));
    if cells[0] >= AXIS_CELLS || cells[1] >= AXIS_CELLS {
        return Err(Error::invalid("resolution", "too fine for the point spread"));
    }
    let caps = [cells[0] - 1, cells[1] - 1];
    let occupied = count_grid(points, &lo, Some(&caps), resolution);
    Ok(occupied as f64 / (cells[0] * cells[1]) as f64)
}
