//! Closed-form dimension predictions and measure/interior classifications
//! in terms of the block exponents σ, τ and the dimension of the parameter
//! set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriState {
    #[serde(rename = "yes-a.s.")]
    YesAs,
    #[serde(rename = "unknown")]
    Unknown,
    #[serde(rename = "no")]
    No,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sigma: f64,
    pub tau: f64,
    pub dim_a: f64,
    pub codomain_dim: u8,
    pub image_dim_lo: f64,
    pub image_dim_hi: f64,
    /// `None` when τ > 1.
    pub graph_dim_lo: Option<f64>,
    pub graph_dim_hi: Option<f64>,
    /// Lower bound on the graph dimension that survives for τ > 1 (the
    /// graph projects onto both the image and the parameter set).
    pub graph_dim_partial_lo: f64,
    pub lebesgue_positive: TriState,
    pub has_interior: TriState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannExponents {
    pub sigma: f64,
    pub tau: f64,
    /// `1 < b ≤ a + 1/2`, under which the image and graph formulas are
    /// equalities.
    pub closed_form_regime: bool,
}

fn check_common(sigma: f64, tau: f64, dim_a: f64, codomain_dim: u8) -> Result<f64> {
    if !(codomain_dim == 1 || codomain_dim == 2) {
        return Err(Error::invalid("codomain", format!("dimension must be 1 or 2, got {codomain_dim}")));
    }
    if !(sigma.is_finite() && tau.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("exponents", "σ and τ must be finite and non-negative"));
    }
    if sigma > tau {
        return Err(Error::invalid("exponents", format!("σ = {sigma} exceeds τ = {tau}")));
    }
    if !(0.0..=1.0).contains(&dim_a) {
        return Err(Error::invalid("dim_a", format!("{dim_a} must lie in [0, 1]")));
    }
    Ok(codomain_dim as f64)
}

/// `dim_a / t` capped at `cap`, with `t = 0` giving `cap` for a non-trivial set.
fn ratio_capped(dim_a: f64, t: f64, cap: f64) -> f64 {
    if dim_a == 0.0 {
        0.0
    } else if t == 0.0 {
        cap
    } else {
        (dim_a / t).min(cap)
    }
}

/// Image dimension bounds `(lo, hi)`.
pub fn predict_image(sigma: f64, tau: f64, dim_a: f64, codomain_dim: u8) -> Result<(f64, f64)> {
    let c = check_common(sigma, tau, dim_a, codomain_dim)?;
    Ok((ratio_capped(dim_a, tau, c), ratio_capped(dim_a, sigma.min(1.0), c)))
}

/// `min{dim_a / t, dim_a + c (1 − t)}`, with `t = 0` giving `dim_a + c`.
fn graph_bound(t: f64, dim_a: f64, c: f64) -> f64 {
    if dim_a == 0.0 {
        0.0
    } else if t == 0.0 {
        dim_a + c
    } else {
        (dim_a / t).min(dim_a + c * (1.0 - t))
    }
}

/// The two competing terms of the graph bound, `(dim_a / τ, dim_a + c(1 − τ))`,
/// for `τ > 0`.
pub fn graph_bound_terms(tau: f64, dim_a: f64, codomain_dim: u8) -> (f64, f64) {
    (dim_a / tau, dim_a + codomain_dim as f64 * (1.0 - tau))
}

/// Graph dimension bounds `(lo, hi)`; covered for `τ ≤ 1` only.
pub fn predict_graph(sigma: f64, tau: f64, dim_a: f64, codomain_dim: u8) -> Result<(f64, f64)> {
    let c = check_common(sigma, tau, dim_a, codomain_dim)?;
    if tau > 1.0 {
        return Err(Error::NotCovered(format!("graph bounds need τ ≤ 1, got τ = {tau}")));
    }
    Ok((graph_bound(tau, dim_a, c), graph_bound(sigma, dim_a, c)))
}

/// Sufficient conditions only: anything above the thresholds is `Unknown`.
pub fn classify_measure_interior(tau: f64, dim_a: f64, codomain_dim: u8) -> Result<(TriState, TriState)> {
    check_common(0.0, tau, dim_a, codomain_dim)?;
    let (measure_cut, interior_cut) = if codomain_dim == 2 { (dim_a / 2.0, dim_a / 4.0) } else { (dim_a, dim_a / 2.0) };
    let zero_tau = tau == 0.0 && dim_a > 0.0;
    let yes = |ok: bool| if ok { TriState::YesAs } else { TriState::Unknown };
    Ok((yes(zero_tau || tau < measure_cut), yes(zero_tau || tau < interior_cut)))
}

/// Everything at once. On top of [`classify_measure_interior`], a planar
/// image is marked `No` for both properties when `min{σ, 1} > dim_a / 2`:
/// the Hölder bound then keeps its dimension below 2.
pub fn predict(sigma: f64, tau: f64, dim_a: f64, codomain_dim: u8) -> Result<Prediction> {
    let (image_dim_lo, image_dim_hi) = predict_image(sigma, tau, dim_a, codomain_dim)?;
    let graph = match predict_graph(sigma, tau, dim_a, codomain_dim) {
        Ok(g) => Some(g),
        Err(Error::NotCovered(_)) => None,
        Err(e) => return Err(e),
    };
    let (mut lebesgue_positive, mut has_interior) = classify_measure_interior(tau, dim_a, codomain_dim)?;
    if codomain_dim == 2 && sigma.min(1.0) > dim_a / 2.0 {
        lebesgue_positive = TriState::No;
        has_interior = TriState::No;
    }
    Ok(Prediction {
        sigma,
        tau,
        dim_a,
        codomain_dim,
        image_dim_lo,
        image_dim_hi,
        graph_dim_lo: graph.map(|g| g.0),
        graph_dim_hi: graph.map(|g| g.1),
        graph_dim_partial_lo: image_dim_lo.max(dim_a),
        lebesgue_positive,
        has_interior,
    })
}

/// Block exponents of `Σ n^{−b} Xₙ e^{2πi nᵃ x}`.
pub fn riemann_exponents(a: f64, b: f64) -> Result<RiemannExponents> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 1.0) {
        return Err(Error::invalid("riemann parameters", format!("need a > 0 and b > 1, got a={a}, b={b}")));
    }
    let e = (2.0 * b - 1.0) / (2.0 * a);
    Ok(RiemannExponents { sigma: e, tau: e, closed_form_regime: b <= a + 0.5 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossoverScan {
    pub checked: usize,
    pub mismatches: usize,
}

/// Scans `τ = i·step` for `0 < τ ≤ tau_max` and `dim_a = j·step` in `[0, 1]`,
/// comparing `dim_a + 2 − 2τ < dim_a / τ` against `τ > 1 or τ < dim_a / 2`.
/// Exact ties (equal terms) count as "not less" on both sides.
pub fn crossover_scan(step: f64, tau_max: f64) -> CrossoverScan {
    let nt = (tau_max / step).round() as i64;
    let na = (1.0 / step).round() as i64;
    let mut scan = CrossoverScan { checked: 0, mismatches: 0 };
    for i in 1..=nt {
        for j in 0..=na {
            let (tau, dim_a) = (i as f64 * step, j as f64 * step);
            let (ratio, additive) = graph_bound_terms(tau, dim_a, 2);
            let tie = (ratio - additive).abs() <= 1e-12 * ratio.abs().max(1.0);
            let less = !tie && additive < ratio;
            // integer form of the claimed condition
            let claim = i > na || 2 * i < j;
            scan.checked += 1;
            if less != claim {
                scan.mismatches += 1;
            }
        }
    }
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn image_examples() {
        let (lo, hi) = predict_image(0.7, 0.7, 1.0, 2).unwrap();
        assert_relative_eq!(lo, 10.0 / 7.0, max_relative = 1e-15);
        assert_eq!(lo, hi);
        let r = riemann_exponents(2.0, 2.0).unwrap();
        let (lo, hi) = predict_image(r.sigma, r.tau, 1.0, 2).unwrap();
        assert_relative_eq!(lo, 4.0 / 3.0, max_relative = 1e-15);
        assert_eq!(lo, hi);
        assert_eq!(predict_image(0.3, 0.6, 0.0, 2).unwrap(), (0.0, 0.0));
        assert!(predict_image(0.8, 0.6, 1.0, 2).is_err());
        assert_eq!(predict_image(0.0, 0.0, 0.4, 2).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn graph_examples() {
        let (lo, _) = predict_graph(0.7, 0.7, 1.0, 2).unwrap();
        assert_relative_eq!(lo, 10.0 / 7.0, max_relative = 1e-15);
        let (lo, hi) = predict_graph(0.75, 0.75, 1.0, 1).unwrap();
        assert_relative_eq!(lo, 1.25, max_relative = 1e-15);
        assert_eq!(lo, hi);
        assert_eq!(predict_graph(0.0, 0.0, 0.5, 2).unwrap(), (2.5, 2.5));
        assert!(matches!(predict_graph(1.1, 1.2, 1.0, 2), Err(Error::NotCovered(_))));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_measure_interior(0.3, 1.0, 2).unwrap(), (TriState::YesAs, TriState::Unknown));
        assert_eq!(classify_measure_interior(0.75, 1.0, 2).unwrap(), (TriState::Unknown, TriState::Unknown));
        assert_eq!(classify_measure_interior(0.0, 0.1, 2).unwrap(), (TriState::YesAs, TriState::YesAs));
        assert_eq!(classify_measure_interior(0.4, 0.5, 1).unwrap(), (TriState::YesAs, TriState::Unknown));
        assert_eq!(classify_measure_interior(0.2, 0.5, 1).unwrap(), (TriState::YesAs, TriState::YesAs));
    }

    #[test]
    fn holder_regime_marks_no() {
        let p = predict(0.75, 0.75, 1.0, 2).unwrap();
        assert_eq!((p.lebesgue_positive, p.has_interior), (TriState::No, TriState::No));
        // boundary stays unknown
        let p = predict(0.5, 0.5, 1.0, 2).unwrap();
        assert_eq!((p.lebesgue_positive, p.has_interior), (TriState::Unknown, TriState::Unknown));
        let p = predict(0.75, 0.75, 1.0, 1).unwrap();
        assert_eq!(p.lebesgue_positive, TriState::YesAs);
    }

    #[test]
    fn riemann_examples() {
        assert_eq!(riemann_exponents(2.0, 2.0).unwrap().tau, 0.75);
        assert_eq!(riemann_exponents(6.0, 2.0).unwrap().tau, 0.25);
        assert_eq!(riemann_exponents(3.0, 2.0).unwrap().tau, 0.5);
        assert!(riemann_exponents(2.0, 2.0).unwrap().closed_form_regime);
        assert!(!riemann_exponents(1.0, 2.0).unwrap().closed_form_regime);
    }

    #[test]
    fn partial_graph_bound_above_one() {
        let p = predict(1.2, 1.5, 1.0, 2).unwrap();
        assert_eq!(p.graph_dim_lo, None);
        assert_eq!(p.graph_dim_partial_lo, 1.0);
    }

    #[test]
    fn tristate_json() {
        assert_eq!(serde_json::to_string(&TriState::YesAs).unwrap(), "\"yes-a.s.\"");
    }

    proptest! {
        #[test]
        fn bounds_are_ordered_and_consistent(s in 0.0..1.0f64, ds in 0.0..1.0f64, dim_a in 0.0..=1.0f64, c in 1u8..=2) {
            let tau = (s + ds).min(1.0);
            let (ilo, ihi) = predict_image(s, tau, dim_a, c).unwrap();
            let (glo, ghi) = predict_graph(s, tau, dim_a, c).unwrap();
            prop_assert!(ilo <= ihi && glo <= ghi);
            prop_assert!(ilo <= glo + 1e-12);
            prop_assert!((0.0..=c as f64).contains(&ilo) && ihi <= c as f64);
            prop_assert!(ghi <= 1.0 + c as f64 + 1e-12);
        }

        #[test]
        fn monotone_in_dim_and_tau(tau in 0.01..1.0f64, dt in 0.0..0.5f64, a in 0.0..1.0f64, da in 0.0..1.0f64) {
            let a2 = (a + da).min(1.0);
            let t2 = (tau + dt).min(1.0);
            for c in [1u8, 2] {
                prop_assert!(predict_image(tau, tau, a, c).unwrap().0 <= predict_image(tau, tau, a2, c).unwrap().0);
                prop_assert!(predict_graph(tau, tau, a, c).unwrap().0 <= predict_graph(tau, tau, a2, c).unwrap().0 + 1e-12);
                prop_assert!(predict_image(t2, t2, a, c).unwrap().0 <= predict_image(tau, tau, a, c).unwrap().0);
                prop_assert!(predict_graph(t2, t2, a, c).unwrap().0 <= predict_graph(tau, tau, a, c).unwrap().0 + 1e-12);
            }
        }
    }

    #[test]
    fn crossover_grid() {
        let scan = crossover_scan(0.01, 2.0);
        assert_eq!(scan.checked, 200 * 101);
        assert_eq!(scan.mismatches, 0);
    }
}
