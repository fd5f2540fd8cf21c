//! Normal projection to the sphere at infinity, quasiconformal dilatation,
//! and the scalar chain that turns decay constants into a bound on the
//! skinning-map image.

use std::collections::BTreeMap;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_maps::UnivalentMap;
use crate::epstein::{gauss_map_ray_trace, phi};
use crate::error::{Error, Result};
use crate::hyperbolic_models::FermiPoint;

/// `t` beyond which leaves are pinched within `9e^{-2t}` of horospheres.
pub const PINCH_THRESHOLD: f64 = 2.197_224_577_336_219_4; // ln 9

/// Offset in `n = ⌊d⌋ − 8`.
pub const FLOOR_OFFSET: i64 = 8;

/// Constant multiplying `A₆ e^{-d}` in the final diameter bound.
pub const DIAMETER_CONSTANT: f64 = 56722.0;

/// `diag((1 + κ₁)/2, (1 + κ₂)/2)`.
pub fn normal_projection_derivative(k1: f64, k2: f64) -> Matrix2<f64> {
    Matrix2::new(0.5 * (1.0 + k1), 0.0, 0.0, 0.5 * (1.0 + k2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilatationReport {
    pub linear_map: [[f64; 2]; 2],
    pub dilatation: f64,
}

/// Ratio of singular values, `≥ 1`.
pub fn dilatation(m: &Matrix2<f64>) -> Result<f64> {
    // Singular values are (√p ± √q)/2; the ratio written via the determinant
    // avoids subtracting the square roots.
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let p = (a + d).powi(2) + (b - c).powi(2);
    let q = (a - d).powi(2) + (b + c).powi(2);
    let bc = b * c;
    let det = (a.mul_add(d, -bc) + (-b).mul_add(c, bc)).abs();
    let hi = p.sqrt() + q.sqrt();
    if !(det > 1e-300 * (hi * hi).max(1.0)) || !hi.is_finite() {
        return Err(Error::Singular);
    }
    Ok((hi * hi / (4.0 * det)).max(1.0))
}

pub fn dilatation_report(m: &Matrix2<f64>) -> Result<DilatationReport> {
    Ok(DilatationReport {
        linear_map: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
        dilatation: dilatation(m)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchQc {
    /// `(1 + ε)²`.
    pub bound: f64,
    /// `(1 + ε/2)/(1 − ε/2)`, the worst dilatation of a projection whose
    /// curvatures are within `ε` of 1.
    pub intermediate: f64,
}

/// Quasiconformality bound for the projection of a surface whose principal
/// curvatures are within `eps` of 1.
pub fn qc_bound_from_pinch(eps: f64) -> Result<PinchQc> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("pinch {eps} must lie in (0, 1)")));
    }
    let bound = (1.0 + eps) * (1.0 + eps);
    let intermediate = (1.0 + 0.5 * eps) / (1.0 - 0.5 * eps);
    if intermediate >= bound {
        return Err(Error::Domain(format!(
            "intermediate dilatation {intermediate} is not below {bound}"
        )));
    }
    Ok(PinchQc {
        bound,
        intermediate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchBound {
    /// `9 e^{-2t}`.
    pub bound: f64,
    /// False below the threshold `t = log 9`, where the estimate is not claimed.
    pub valid: bool,
}

pub fn epstein_pinch(t: f64) -> PinchBound {
    PinchBound {
        bound: 9.0 * (-2.0 * t).exp(),
        valid: t >= PINCH_THRESHOLD,
    }
}

/// `Σ log(factor)` for factors of the form `1 + x`.
pub fn teich_distance_chain(factors: &[f64]) -> Result<f64> {
    let excesses: Vec<f64> = factors.iter().map(|f| f - 1.0).collect();
    teich_distance_chain_excess(&excesses)
}

/// `Σ log(1 + x)` taking the `x` directly, so excesses far below machine
/// epsilon are not rounded away.
pub fn teich_distance_chain_excess(excesses: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (index, &x) in excesses.iter().enumerate() {
        if !(x >= 0.0) {
            return Err(Error::NonPositive { index, value: x });
        }
        sum += x.ln_1p();
    }
    Ok(sum)
}

/// Distances are not increased by a 1-lipschitz map; returns `dist_in`.
pub fn onelipschitz_compose(dist_in: f64) -> Result<f64> {
    if !(dist_in >= 0.0) {
        return Err(Error::Domain(format!(
            "distance {dist_in} must be nonnegative"
        )));
    }
    Ok(dist_in)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkinningBound {
    pub n: f64,
    /// `7 A₆ e^{-n}`.
    pub raw: f64,
    /// `56722 A₆ e^{-d}`.
    pub final_bound: f64,
    pub consistent: bool,
    /// `7 e⁹ ≤ 56722`.
    pub constant_check: bool,
}

pub fn skinning_diameter_bound(d: f64, a6: f64) -> Result<SkinningBound> {
    if !(d > 9.0) || !d.is_finite() {
        return Err(Error::Domain(format!("collar depth d = {d} must exceed 9")));
    }
    if !(a6 > 0.0) {
        return Err(Error::Domain(format!(
            "constant A6 = {a6} must be positive"
        )));
    }
    let n = d.floor() - FLOOR_OFFSET as f64;
    let raw = 7.0 * a6 * (-n).exp();
    let final_bound = DIAMETER_CONSTANT * a6 * (-d).exp();
    Ok(SkinningBound {
        n,
        raw,
        final_bound,
        consistent: raw <= final_bound,
        constant_check: 7.0 * (FLOOR_OFFSET as f64 + 1.0).exp() <= DIAMETER_CONSTANT,
    })
}

/// Decay constants feeding the bound chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Supplied,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainFactor {
    pub label: String,
    pub value: f64,
    /// `value − 1`, kept unrounded.
    pub excess: f64,
}

impl ChainFactor {
    fn new(label: &str, excess: f64) -> Self {
        Self {
            label: label.into(),
            value: 1.0 + excess,
            excess,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: f64,
    pub d: f64,
    pub floor_offset: i64,
    pub factors: Vec<ChainFactor>,
    /// `Σ log(factor)`.
    pub chain_total: f64,
    /// `3 A₅ e^{-n}`.
    pub paper_bound: f64,
    pub chain_holds: bool,
    /// Whether `A₅ ≥ A₄` and `9e^{-2n} ≤ A₅ e^{-n}`, under which the chain
    /// bound is guaranteed.
    pub dominance: bool,
    /// Distance after the 1-lipschitz step, doubled by the triangle inequality.
    pub doubled: f64,
    pub skinning: SkinningBound,
    pub constants: BTreeMap<String, f64>,
    pub constants_source: ConstantSource,
}

/// The three quasiconformal factors at depth `n` and their log-sum.
pub fn chain_factors(n: f64, c: &BoundConstants) -> Vec<ChainFactor> {
    let e = (-n).exp();
    vec![
        ChainFactor::new("hyperbolic_correction", c.a4 * e),
        ChainFactor::new("epstein_pinch", 9.0 * e * e),
        ChainFactor::new("boundary_comparison", c.a5 * e),
    ]
}

pub fn bound_report(
    d: f64,
    constants: &BoundConstants,
    source: ConstantSource,
    extra: BTreeMap<String, f64>,
) -> Result<BoundReport> {
    let skinning = skinning_diameter_bound(d, constants.a6)?;
    let n = skinning.n;
    let factors = chain_factors(n, constants);
    let excesses: Vec<f64> = factors.iter().map(|f| f.excess).collect();
    let chain_total = teich_distance_chain_excess(&excesses)?;
    let e = (-n).exp();
    let paper_bound = 3.0 * constants.a5 * e;
    let mut all = extra;
    all.insert("A4".into(), constants.a4);
    all.insert("A5".into(), constants.a5);
    all.insert("A6".into(), constants.a6);
    Ok(BoundReport {
        n,
        d,
        floor_offset: FLOOR_OFFSET,
        factors,
        chain_total,
        paper_bound,
        chain_holds: chain_total <= paper_bound,
        dominance: constants.a5 >= constants.a4 && 9.0 * e * e <= constants.a5 * e,
        doubled: 2.0 * onelipschitz_compose(3.0 * constants.a6 * e)?,
        skinning,
        constants: all,
        constants_source: source,
    })
}

/// Singular values (descending) of the normal projection's derivative at a
/// leaf point, found by tracing normal geodesics to the sphere at infinity.
///
/// Lengths on the leaf use its induced hyperbolic metric. Lengths at infinity
/// use half the visual metric seen from the leaf point, which is
/// `x3/(x3² + |w − w₀|²) |dw|` for the point `(w₀, x3)`.
pub fn normal_projection_ray_trace(
    map: &UnivalentMap,
    p: FermiPoint,
    step: f64,
) -> Result<(f64, f64)> {
    let outer = 20.0 * step;
    let base = p.coords();
    let at = |dx: f64, dy: f64| FermiPoint::from_coords([base[0] + dx, base[1] + dy, base[2]]);
    let d5 = |f: &dyn Fn(f64) -> Result<[f64; 3]>| -> Result<[f64; 3]> {
        let (m2, m1, p1, p2) = (f(-2.0 * outer)?, f(-outer)?, f(outer)?, f(2.0 * outer)?);
        Ok(std::array::from_fn(|r| {
            (m2[r] - 8.0 * m1[r] + 8.0 * p1[r] - p2[r]) / (12.0 * outer)
        }))
    };
    let endpoint = |dx: f64, dy: f64| -> Result<[f64; 3]> {
        let e = gauss_map_ray_trace(map, at(dx, dy)?, step)?;
        Ok([e.re, e.im, 0.0])
    };
    let point = |dx: f64, dy: f64| -> Result<[f64; 3]> { Ok(phi(map, at(dx, dy)?)?.coords()) };

    let ex = d5(&|s| endpoint(s, 0.0))?;
    let ey = d5(&|s| endpoint(0.0, s))?;
    let xx = d5(&|s| point(s, 0.0))?;
    let xy = d5(&|s| point(0.0, s))?;
    let x0 = phi(map, p)?;
    let e0 = gauss_map_ray_trace(map, p, step)?;

    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let s2 = x0.x3 * x0.x3;
    let surf = Matrix2::new(dot(&xx, &xx), dot(&xx, &xy), dot(&xx, &xy), dot(&xy, &xy)) / s2;
    let jac = Matrix2::new(ex[0], ey[0], ex[1], ey[1]);
    let beta = x0.x3 / (s2 + (e0 - Complex64::new(x0.w.re, x0.w.im)).norm_sqr());

    // singular values of β J A^{-1/2}: square roots of the eigenvalues of
    // β² A^{-1} JᵀJ
    let ainv = surf.try_inverse().ok_or(Error::Singular)?;
    let m = ainv * jac.transpose() * jac * (beta * beta);
    let tr = m.trace();
    let det = m.determinant();
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    Ok(((0.5 * tr + disc).sqrt(), (0.5 * tr - disc).max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epstein::principal_curvatures;

    fn fp(x: f64, y: f64, t: f64) -> FermiPoint {
        FermiPoint::from_coords([x, y, t]).unwrap()
    }

    #[test]
    fn projection_derivative_examples() {
        assert_eq!(normal_projection_derivative(1.0, 1.0), Matrix2::identity());
        let m = normal_projection_derivative(1.1, 0.9);
        assert!((m[(0, 0)] - 1.05).abs() < 1e-15 && (m[(1, 1)] - 0.95).abs() < 1e-15);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn dilatation_examples() {
        assert_eq!(dilatation(&Matrix2::identity()).unwrap(), 1.0);
        let m = Matrix2::new(1.05, 0.0, 0.0, 0.95);
        assert!((dilatation(&m).unwrap() - 21.0 / 19.0).abs() < 1e-14);
        let a = Matrix2::new(0.3, -1.2, 0.7, 0.4);
        assert!((dilatation(&a).unwrap() - dilatation(&(a * 3.0)).unwrap()).abs() < 1e-13);
        assert!(matches!(
            dilatation(&Matrix2::new(1.0, 2.0, 2.0, 4.0)),
            Err(Error::Singular)
        ));
        let r = dilatation_report(&m).unwrap();
        assert_eq!(r.linear_map, [[1.05, 0.0], [0.0, 0.95]]);
    }

    #[test]
    fn pinch_qc_examples() {
        let q = qc_bound_from_pinch(0.1).unwrap();
        assert!((q.bound - 1.21).abs() < 1e-14 && (q.intermediate - 1.05 / 0.95).abs() < 1e-14);
        let q = qc_bound_from_pinch(0.5).unwrap();
        assert!((q.bound - 2.25).abs() < 1e-14 && (q.intermediate - 1.25 / 0.75).abs() < 1e-14);
        assert!((qc_bound_from_pinch(1e-9).unwrap().bound - 1.0).abs() < 1e-8);
        assert!(qc_bound_from_pinch(0.0).is_err() && qc_bound_from_pinch(1.0).is_err());
    }

    #[test]
    fn epstein_pinch_examples() {
        let t = 9f64.ln();
        let b = epstein_pinch(t);
        assert!(b.valid && (b.bound - 1.0 / 9.0).abs() < 1e-15);
        // at ‖S‖ = 3/2 the coefficients are 4 and −2: κ = 77/85 and 83/79
        let (kp, km) = crate::epstein::principal_curvatures_from_norm(1.5, t).unwrap();
        assert!(((1.0 - kp) - 8.0 / 85.0).abs() < 1e-14);
        assert!(((km - 1.0) - 4.0 / 79.0).abs() < 1e-14);
        assert!(8.0 / 85.0 <= b.bound);
        assert!(!epstein_pinch(2.0).valid);
    }

    #[test]
    fn chain_examples() {
        let e = (-3.0f64).exp();
        let total = teich_distance_chain(&[1.0 + e, 1.0 + 9.0 * e * e, 1.0 + e]).unwrap();
        assert!((total - 0.1192).abs() < 5e-4 && total <= 3.0 * e);
        assert_eq!(teich_distance_chain(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(teich_distance_chain(&[0.9]).is_err());
        assert!((teich_distance_chain(&[1.3]).unwrap() - 1.3f64.ln()).abs() < 1e-15);
        // 1 + 1e-20 rounds to 1, the excess form keeps it
        assert_eq!(teich_distance_chain_excess(&[1e-20]).unwrap(), 1e-20);
        assert!(teich_distance_chain_excess(&[-1e-3]).is_err());
    }

    #[test]
    fn skinning_examples() {
        assert!(7.0 * 9f64.exp() <= DIAMETER_CONSTANT);
        let b = skinning_diameter_bound(12.0, 1.0).unwrap();
        assert_eq!(b.n, 4.0);
        assert!((b.raw - 0.128_209).abs() < 1e-6 && (b.final_bound - 0.348_51).abs() < 1e-5);
        assert!(b.consistent && b.constant_check);
        let b = skinning_diameter_bound(9.5, 1.0).unwrap();
        assert_eq!(b.n, 1.0);
        assert!(
            (b.raw - 2.575_16).abs() < 1e-5
                && (b.final_bound - 4.245_75).abs() < 1e-5
                && b.consistent
        );
        assert!(skinning_diameter_bound(9.0, 1.0).is_err());
    }

    #[test]
    fn onelipschitz_is_identity() {
        assert_eq!(onelipschitz_compose(0.0).unwrap(), 0.0);
        assert_eq!(onelipschitz_compose(0.37).unwrap(), 0.37);
        assert!(onelipschitz_compose(-1.0).is_err());
    }

    #[test]
    fn report_assembly() {
        let c = BoundConstants {
            a4: 1.0,
            a5: 1.0,
            a6: 1.0,
        };
        let r = bound_report(11.0, &c, ConstantSource::Supplied, BTreeMap::new()).unwrap();
        assert_eq!(r.n, 3.0);
        assert_eq!(r.factors.len(), 3);
        assert!(r.chain_holds && r.dominance && r.skinning.consistent);
        assert!((r.doubled - 6.0 * (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(r.constants["A6"], 1.0);
    }

    #[test]
    fn ray_traced_projection_of_equidistant_surface() {
        for t in [1.0f64, 2.5] {
            let (a, b) =
                normal_projection_ray_trace(&UnivalentMap::Identity, fp(0.2, -0.1, t), 1e-4)
                    .unwrap();
            let want = 0.5 * (1.0 + t.tanh());
            assert!(
                (a - want).abs() < 1e-5 && (b - want).abs() < 1e-5,
                "{a} {b} {want}"
            );
        }
    }

    #[test]
    fn ray_traced_projection_matches_curvatures() {
        let map = UnivalentMap::Koebe;
        let p = fp(0.1, 0.05, 2.0);
        let (kp, km) = principal_curvatures(&map, p).unwrap();
        let (a, b) = normal_projection_ray_trace(&map, p, 1e-4).unwrap();
        // κ₋ is the larger curvature
        assert!(
            (a - 0.5 * (1.0 + km)).abs() < 1e-5,
            "{a} vs {}",
            0.5 * (1.0 + km)
        );
        assert!(
            (b - 0.5 * (1.0 + kp)).abs() < 1e-5,
            "{b} vs {}",
            0.5 * (1.0 + kp)
        );
    }
}
