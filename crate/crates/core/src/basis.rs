//! Basis functions `φ` applied to the reduced argument `λₙx mod 1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::ext::Ext;

/// Frozen Lipschitz constant for [`BasisFunction::TakagiSine`] on `δ = 1/4`,
/// taken from a dense probe (observed range about `[0.98, 6.36]`).
pub const TAKAGI_L: f64 = 6.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisFunction {
    /// `e^{2πit}`
    Exp,
    /// `1 − e^{2πit}`
    OneMinusExp,
    /// `e^{2πit} − λ^{−β} e^{2πiλt}`
    ExpDiff { beta: f64, lambda: f64 },
    /// `‖t‖ + i sin 2πt`, with `‖t‖` the distance to the nearest integer.
    TakagiSine,
    /// `sin 2πt`, real valued. Not bi-Lipschitz; only the sine path of
    /// [`crate::besselcf`] applies to it.
    SineReal,
}

/// Local bi-Lipschitz constants: `L⁻¹|x−y| ≤ |φ(x)−φ(y)| ≤ L|x−y|` for
/// `|x−y| ≤ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lipschitz {
    pub l: f64,
    pub delta: f64,
}

/// `(cos 2πu, sin 2πu)` with quarter-turn reduction, so that multiples of
/// 1/4 come out exact.
#[inline]
pub fn cis_turns(u: f64) -> Complex64 {
    let v = 4.0 * u;
    let q = v.round();
    let (s, c) = ((v - q) * FRAC_PI_2).sin_cos();
    match (q as i64).rem_euclid(4) {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

#[inline]
fn frac(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl BasisFunction {
    pub fn validate(&self) -> crate::Result<()> {
        if let BasisFunction::ExpDiff { beta, lambda } = self {
            if !(beta.is_finite() && *beta > 0.0 && lambda.is_finite() && *lambda > 1.0) {
                return Err(crate::Error::invalid(
                    "basis",
                    format!("exp_diff needs beta > 0 and lambda > 1, got beta={beta}, lambda={lambda}"),
                ));
            }
        }
        Ok(())
    }

    pub fn codomain_dim(&self) -> u8 {
        match self {
            BasisFunction::SineReal => 1,
            _ => 2,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            BasisFunction::Exp | BasisFunction::SineReal => 1.0,
            BasisFunction::OneMinusExp => 2.0,
            BasisFunction::ExpDiff { beta, lambda } => 1.0 + lambda.powf(-beta),
            // |Re| ≤ 1/2 and |Im| ≤ 1
            BasisFunction::TakagiSine => 1.25f64.sqrt(),
        }
    }

    /// Global Lipschitz constant of `t ↦ φ(t)`, used for the two-sided tail.
    pub fn lipschitz_upper(&self) -> f64 {
        match self {
            BasisFunction::Exp | BasisFunction::OneMinusExp | BasisFunction::SineReal => TAU,
            BasisFunction::ExpDiff { beta, lambda } => TAU * (1.0 + lambda.powf(1.0 - beta)),
            BasisFunction::TakagiSine => (1.0 + TAU * TAU).sqrt(),
        }
    }

    pub fn lipschitz(&self) -> Option<Lipschitz> {
        match self {
            BasisFunction::Exp | BasisFunction::OneMinusExp => Some(Lipschitz { l: TAU, delta: 0.5 }),
            BasisFunction::TakagiSine => Some(Lipschitz { l: TAKAGI_L, delta: 0.25 }),
            BasisFunction::ExpDiff { .. } | BasisFunction::SineReal => None,
        }
    }

    /// True when `φ(t + 1) = φ(t)`.
    pub fn is_periodic(&self) -> bool {
        match self {
            BasisFunction::ExpDiff { lambda, .. } => lambda.fract() == 0.0,
            _ => true,
        }
    }

    /// `φ` from reduced arguments `u = t mod 1` and, for `ExpDiff` only,
    /// `v = λt mod 1`.
    #[inline]
    pub fn eval_reduced(&self, u: f64, v: f64) -> Complex64 {
        match self {
            BasisFunction::Exp => cis_turns(u),
            BasisFunction::OneMinusExp => Complex64::new(1.0, 0.0) - cis_turns(u),
            BasisFunction::ExpDiff { beta, lambda } => cis_turns(u) - cis_turns(v) * lambda.powf(-beta),
            BasisFunction::TakagiSine => Complex64::new(u.min(1.0 - u), cis_turns(u).im),
            BasisFunction::SineReal => Complex64::new(cis_turns(u).im, 0.0),
        }
    }

    /// `φ(freq · x)` with the argument reduced in double-double.
    #[inline]
    pub fn eval_scaled(&self, freq: Ext, x: f64) -> Complex64 {
        let u = freq.frac_mul(x);
        let v = match self {
            BasisFunction::ExpDiff { lambda, .. } => freq.mul_f64(*lambda).frac_mul(x),
            _ => 0.0,
        };
        self.eval_reduced(u, v)
    }
}

impl BasisFunction {
    /// The complex factor a phase multiplies: `φ(freq · x)` for complex
    /// kinds, `e^{2πi freq x}` for [`BasisFunction::SineReal`] (whose value is
    /// the imaginary part, see [`BasisFunction::project`]).
    #[inline]
    pub fn carrier(&self, freq: Ext, x: f64) -> Complex64 {
        match self {
            BasisFunction::SineReal => cis_turns(freq.frac_mul(x)),
            b => b.eval_scaled(freq, x),
        }
    }

    /// Maps a sum of carriers to the series value.
    #[inline]
    pub fn project(&self, z: Complex64) -> Complex64 {
        match self {
            BasisFunction::SineReal => Complex64::new(z.im, 0.0),
            _ => z,
        }
    }
}

/// `φ(t)`. Real-valued kinds return a zero imaginary part.
pub fn eval_basis(b: &BasisFunction, t: f64) -> Complex64 {
    let v = match b {
        BasisFunction::ExpDiff { lambda, .. } => Ext::new(*lambda).frac_mul(t),
        _ => 0.0,
    };
    b.eval_reduced(frac(t), v)
}

/// Empirical extremes of `|φ(x)−φ(y)|/|x−y|` over random pairs with
/// `0 < |x−y| ≤ delta`.
pub fn bilipschitz_probe(b: &BasisFunction, delta: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for _ in 0..samples {
        let x: f64 = rng.random();
        let h = delta * rng.random::<f64>();
        if h == 0.0 {
            continue;
        }
        let ratio = (eval_basis(b, x + h) - eval_basis(b, x)).norm() / h;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi)
}

/// Whether a declared `(L, δ)` pair covers the probed ratio range.
pub fn lipschitz_holds(b: &BasisFunction, samples: usize, seed: u64) -> Option<bool> {
    let lip = b.lipschitz()?;
    let (lo, hi) = bilipschitz_probe(b, lip.delta, samples, seed);
    Some(lo >= 1.0 / lip.l && hi <= lip.l)
}
