//! `J₀`, Bessel-product characteristic functions of series increments and
//! their Monte Carlo counterparts.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use crate::basis::cis_turns;
use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::sampler::{plan_truncation, skeleton, PhaseModel, SeriesSpec, Skeleton};

/// Below this the power series is summed in double-double; above it the
/// Hankel expansion is accurate to better than `1e-16` relative.
pub const J0_SERIES_MAX: f64 = 20.0;
/// Log-products below this are flushed to an exact zero.
pub const LOG_UNDERFLOW: f64 = -700.0;

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= J0_SERIES_MAX {
        j0_series(x)
    } else {
        j0_asymptotic(x)
    }
}

fn j0_series(x: f64) -> f64 {
    // Σ (−q)^k / (k!)², q = x²/4
    let half = x / 2.0;
    let q = Ext::new(half).mul_f64(half);
    let mut term = Ext::ONE;
    let mut sum = Ext::ONE;
    for k in 1..200u32 {
        let kk = (k * k) as f64;
        term = term.mul(q).div_f64(kk).neg();
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 && (k as f64) > half {
            break;
        }
    }
    sum.to_f64()
}

fn j0_asymptotic(x: f64) -> f64 {
    // a_k = (−1)^k Π_{j≤k} (2j−1)² / (k! 8^k); P and Q take the even and odd terms
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut xp = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..60u32 {
        let t = a / xp;
        if t.abs() > prev {
            break;
        }
        prev = t.abs();
        // (−1)^{⌊k/2⌋}
        let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += s * t;
        } else {
            q += s * t;
        }
        if prev < 1e-18 {
            break;
        }
        let m = (2 * k + 1) as f64;
        a *= -(m * m) / (8.0 * (k + 1) as f64);
        xp *= x;
    }
    let (s, c) = x.sin_cos();
    // cos(x − π/4) and sin(x − π/4) without rounding x − π/4
    let cchi = (c + s) * FRAC_1_SQRT_2;
    let schi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cchi - q * schi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharFnSample {
    pub xi: f64,
    pub value: f64,
    pub terms_used: usize,
    /// Bound on `|log ψ_N − log ψ|` from the omitted factors; infinite when
    /// the omitted arguments are too large for the bound.
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: Complex64,
    /// Standard error of the real part.
    pub stderr: f64,
    pub stderr_im: f64,
    pub replicates: usize,
    pub seed: u64,
}

fn require_random(spec: &SeriesSpec) -> Result<u64> {
    match spec.phases {
        PhaseModel::SteinhausIid { seed } => Ok(seed),
        _ => Err(Error::invalid("phases", "characteristic functions need Steinhaus phases")),
    }
}

/// Radii `|aₙ| · |φ(λₙx) − φ(λₙy)|` of the increment's independent terms.
fn increment_radii(sk: &Skeleton, x: f64, y: f64) -> Vec<f64> {
    let cx = sk.carriers(x);
    let cy = sk.carriers(y);
    sk.amplitudes()
        .iter()
        .zip(cx.iter().zip(&cy))
        .map(|(a, (u, v))| a.abs() * (u - v).norm())
        .collect()
}

/// `Π J₀(2π ξ rₙ)` accumulated in the log domain.
pub fn bessel_product(radii: &[f64], xi: f64) -> f64 {
    let mut log = 0.0;
    let mut negative = false;
    for r in radii {
        let j = bessel_j0(TAU * xi * r);
        if j == 0.0 {
            return 0.0;
        }
        negative ^= j < 0.0;
        log += j.abs().ln();
        if log < LOG_UNDERFLOW {
            return 0.0;
        }
    }
    let v = log.exp();
    if negative {
        -v
    } else {
        v
    }
}

fn log_truncation_bound(spec: &SeriesSpec, n: usize, xi: f64) -> Result<f64> {
    // omitted radii are at most 2 sup|φ| |aₙ|; −log J₀(z) ≤ z²/3 for z ≤ 1
    let z = 2.0 * TAU * xi * spec.tail_after(n)?;
    Ok(if z <= 1.0 { z * z / 3.0 } else { f64::INFINITY })
}

/// `ψ_{x,y}(ξ)` through the first `n` positive terms.
pub fn charfn_increment_terms(spec: &SeriesSpec, x: f64, y: f64, xi: f64, n: usize) -> Result<CharFnSample> {
    require_random(spec)?;
    if spec.two_sided {
        return Err(Error::invalid("series", "use charfn_increment for two-sided series"));
    }
    let sk = skeleton(spec, n, None)?;
    let radii = increment_radii(&sk, x, y);
    Ok(CharFnSample {
        xi,
        value: bessel_product(&radii, xi),
        terms_used: radii.len(),
        truncation_bound: log_truncation_bound(spec, n, xi)?,
    })
}

/// `ψ_{x,y}(ξ)` truncated at the index that certifies `eps_tail`.
pub fn charfn_increment(spec: &SeriesSpec, x: f64, y: f64, xi: f64, eps_tail: f64) -> Result<CharFnSample> {
    require_random(spec)?;
    let trunc = plan_truncation(spec, eps_tail, x.abs().max(y.abs()))?;
    let sk = skeleton(spec, trunc.n, trunc.m)?;
    let radii = increment_radii(&sk, x, y);
    Ok(CharFnSample {
        xi,
        value: bessel_product(&radii, xi),
        terms_used: radii.len(),
        truncation_bound: log_truncation_bound(spec, trunc.n, xi)?,
    })
}

/// Sum with a fixed binary-tree topology, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn estimate(samples: &[Complex64], seed: u64) -> MCEstimate {
    let n = samples.len() as f64;
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let (mr, mi) = (pairwise_sum(&re) / n, pairwise_sum(&im) / n);
    let dr: Vec<f64> = re.iter().map(|v| (v - mr) * (v - mr)).collect();
    let di: Vec<f64> = im.iter().map(|v| (v - mi) * (v - mi)).collect();
    let sd = |d: &[f64]| if n > 1.0 { (pairwise_sum(d) / (n - 1.0)).sqrt() } else { 0.0 };
    MCEstimate {
        mean: Complex64::new(mr, mi),
        stderr: sd(&dr) / n.sqrt(),
        stderr_im: sd(&di) / n.sqrt(),
        replicates: samples.len(),
        seed,
    }
}

pub const MIN_REPLICATES: usize = 100;

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < MIN_REPLICATES {
        return Err(Error::invalid("replicates", format!("need at least {MIN_REPLICATES}, got {replicates}")));
    }
    Ok(())
}

#[inline]
fn pairing(xi: [f64; 2], d: Complex64) -> f64 {
    xi[0] * d.re + xi[1] * d.im
}

/// Monte Carlo mean of `e^{−2πi⟨ξ, S(x)−S(y)⟩}` over `replicates` phase
/// draws (stream `r` for replicate `r`). Real-valued series use `ξ[0]`.
pub fn mc_charfn(spec: &SeriesSpec, x: f64, y: f64, xi: [f64; 2], replicates: usize, seed: u64, n: usize) -> Result<MCEstimate> {
    require_random(spec)?;
    check_replicates(replicates)?;
    let sk = skeleton(spec, n, None)?;
    let amps = sk.amplitudes();
    let diffs: Vec<Complex64> = sk.carriers(x).iter().zip(sk.carriers(y)).map(|(u, v)| u - v).collect();
    let model = PhaseModel::SteinhausIid { seed };
    let samples: Vec<Complex64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let th = sk.phases(&model, r);
            let mut d = Complex64::new(0.0, 0.0);
            for ((a, u), t) in amps.iter().zip(&diffs).zip(&th) {
                d += cis_turns(*t) * (u * *a);
            }
            let d = sk.basis.project(d);
            cis_turns(-pairing(xi, d))
        })
        .collect();
    Ok(estimate(&samples, seed))
}

/// Discrete probability measure `Σ wᵢ δ_{xᵢ}`.
pub fn validate_atoms(atoms: &[(f64, f64)]) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::invalid("atoms", "measure has no atoms"));
    }
    if atoms.iter().any(|(x, w)| !x.is_finite() || !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("atoms", "atoms need finite positions and non-negative weights"));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("atoms", format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// `n` equal atoms `j/n` on `[0, 1)`.
pub fn uniform_atoms(n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|j| (j as f64 / n as f64, 1.0 / n as f64)).collect()
}

/// `Σᵢ Σⱼ wᵢ wⱼ ψ_{xᵢ,xⱼ}(ξ)` through `n` positive terms.
pub fn expected_fourier_sq(spec: &SeriesSpec, atoms: &[(f64, f64)], xi: f64, n: usize) -> Result<f64> {
    Ok(expected_fourier_sq_multi(spec, atoms, &[xi], n)?[0])
}

pub fn expected_fourier_sq_multi(spec: &SeriesSpec, atoms: &[(f64, f64)], xis: &[f64], n: usize) -> Result<Vec<f64>> {
    require_random(spec)?;
    validate_atoms(atoms)?;
    let sk = skeleton(spec, n, None)?;
    let amps = sk.amplitudes();
    let table: Vec<Vec<Complex64>> = atoms.iter().map(|(x, _)| sk.carriers(*x)).collect();
    let pairs: Vec<(usize, usize)> = (0..atoms.len()).flat_map(|i| (i + 1..atoms.len()).map(move |j| (i, j))).collect();
    let diag: f64 = atoms.iter().map(|a| a.1 * a.1).sum();
    Ok(xis
        .iter()
        .map(|&xi| {
            let off: Vec<f64> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let radii: Vec<f64> = amps
                        .iter()
                        .zip(table[i].iter().zip(&table[j]))
                        .map(|(a, (u, v))| a.abs() * (u - v).norm())
                        .collect();
                    2.0 * atoms[i].1 * atoms[j].1 * bessel_product(&radii, xi)
                })
                .collect();
            diag + pairwise_sum(&off)
        })
        .collect())
}

/// Monte Carlo `E|μ̂(ξ)|²` with `μ̂(ξ) = Σ wᵢ e^{−2πi⟨ξ, S(xᵢ)⟩}`.
pub fn mc_fourier_sq(spec: &SeriesSpec, atoms: &[(f64, f64)], xi: [f64; 2], replicates: usize, seed: u64, n: usize) -> Result<MCEstimate> {
    Ok(mc_fourier_sq_multi(spec, atoms, &[xi], replicates, seed, n)?[0])
}

/// Several frequencies from the same phase draws.
pub fn mc_fourier_sq_multi(
    spec: &SeriesSpec,
    atoms: &[(f64, f64)],
    xis: &[[f64; 2]],
    replicates: usize,
    seed: u64,
    n: usize,
) -> Result<Vec<MCEstimate>> {
    require_random(spec)?;
    validate_atoms(atoms)?;
    check_replicates(replicates)?;
    let sk = skeleton(spec, n, None)?;
    let amps = sk.amplitudes();
    let table: Vec<Vec<Complex64>> = atoms.iter().map(|(x, _)| sk.carriers(*x)).collect();
    let model = PhaseModel::SteinhausIid { seed };
    let per_rep: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let th = sk.phases(&model, r);
            let coeffs: Vec<Complex64> = amps.iter().zip(&th).map(|(a, t)| cis_turns(*t) * *a).collect();
            let values: Vec<Complex64> = table
                .iter()
                .map(|row| sk.basis.project(row.iter().zip(&coeffs).map(|(u, c)| u * c).sum()))
                .collect();
            xis.iter()
                .map(|xi| {
                    let mu: Complex64 = values.iter().zip(atoms).map(|(s, (_, w))| cis_turns(-pairing(*xi, *s)) * *w).sum();
                    mu.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok((0..xis.len())
        .map(|k| {
            let s: Vec<Complex64> = per_rep.iter().map(|v| Complex64::new(v[k], 0.0)).collect();
            estimate(&s, seed)
        })
        .collect())
}

/// Trapezoid approximation of `2π ∫₀^{ξmax} |ψ_{x,y}(r)| r dr` (or
/// `2 ∫₀^{ξmax} |ψ| dr` for real-valued series). The tail beyond `xi_max`
/// is not bounded.
pub fn charfn_l1_norm(spec: &SeriesSpec, x: f64, y: f64, xi_max: f64, step: f64, n: usize) -> Result<f64> {
    require_random(spec)?;
    if x == y {
        return Err(Error::invalid("points", "x = y makes ψ identically 1 and the integral diverge"));
    }
    if !(xi_max > 0.0 && step > 0.0 && step <= xi_max) {
        return Err(Error::invalid("quadrature", "need 0 < step ≤ xi_max"));
    }
    let sk = skeleton(spec, n, None)?;
    let radii = increment_radii(&sk, x, y);
    let steps = (xi_max / step).ceil() as usize;
    let h = xi_max / steps as f64;
    let planar = spec.codomain_dim() == 2;
    let f: Vec<f64> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let r = i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let v = bessel_product(&radii, r).abs();
            w * if planar { TAU * r * v } else { 2.0 * v }
        })
        .collect();
    Ok(h * pairwise_sum(&f))
}
