//! Epstein surfaces: the immersion `Φ(z, t) = M_{φ(z)}(ι(z, t))`, its
//! derivative data and principal curvatures, and the associated Gauss map.
//!
//! Every closed form here has a finite-difference counterpart computed from
//! [`phi`] alone, so the two can be compared point by point.

use num_complex::Complex64;
use serde::Serialize;

use crate::complex_maps::{
    eval_jet, osculating_from_jet, scaled_schwarzian_norm, DiskPoint, UnivalentMap,
};
use crate::error::{Error, Result};
use crate::hyperbolic_models::{
    geodesic_endpoint, iota, mobius_act_halfspace, FermiPoint, HalfSpacePoint, BOUNDARY_RAY_SIGN,
};
use crate::linalg::{cross, dot, norm, scaled};

/// Leaves with `t` above this are immersed for every univalent map.
pub const IMMERSION_THRESHOLD: f64 = std::f64::consts::LN_2 / 2.0;

/// Leaves with `t` above this are locally convex for every univalent map.
pub const CONVEXITY_THRESHOLD: f64 = std::f64::consts::LN_2;

/// Default finite-difference step of the shape-operator oracle.
pub const SHAPE_ORACLE_STEP: f64 = 1e-4;

/// `Φ(z, t)`: the osculating Möbius transformation at `z` applied to `ι(z, t)`.
pub fn phi(map: &UnivalentMap, p: FermiPoint) -> Result<HalfSpacePoint> {
    let jet = eval_jet(map, p.z)?;
    let m = osculating_from_jet(&jet, p.z.z())?;
    mobius_act_halfspace(&m, iota(p))
}

/// `q = ‖Sφ‖ / (e^t cosh t)`, the deviation of `DΦ` from an isometry.
pub fn stretch(norm_s: f64, t: f64) -> f64 {
    // e^t cosh t = (e^{2t} + 1)/2
    2.0 * norm_s / ((2.0 * t).exp() + 1.0)
}

/// Eigenvalues `(1 + q, 1 − q, 1)` of `DΦ` in orthonormal frames.
pub fn dphi_eigen(map: &UnivalentMap, p: FermiPoint) -> Result<(f64, f64, f64)> {
    let q = stretch(scaled_schwarzian_norm(map, p.z)?, p.t);
    Ok((1.0 + q, 1.0 - q, 1.0))
}

/// `det DΦ = 1 − q²`.
pub fn jacobian_determinant(map: &UnivalentMap, p: FermiPoint) -> Result<f64> {
    let q = stretch(scaled_schwarzian_norm(map, p.z)?, p.t);
    Ok(1.0 - q * q)
}

/// Closed-form principal curvatures `(κ₊, κ₋)` of the leaf through `(z, t)`
/// for a given scaled Schwarzian norm:
///
/// `κ± = (1 − (1 ± 2‖S‖) e^{-2t}) / (1 + (1 ± 2‖S‖) e^{-2t})`.
///
/// `κ₊` belongs to the principal direction stretched by `DΦ` (eigenvalue
/// `1 + q`) and `κ₋` to the compressed one. With `1 − 2‖S‖ = −1` the second
/// branch equals `coth t`.
pub fn principal_curvatures_from_norm(norm_s: f64, t: f64) -> Result<(f64, f64)> {
    let e = (-2.0 * t).exp();
    let branch = |coef: f64| -> Result<f64> {
        let den = 1.0 + coef * e;
        if den.abs() < 1e-12 {
            return Err(Error::DenominatorVanishes {
                critical_t: 0.5 * (-coef).ln(),
            });
        }
        Ok((1.0 - coef * e) / den)
    };
    Ok((branch(1.0 + 2.0 * norm_s)?, branch(1.0 - 2.0 * norm_s)?))
}

pub fn principal_curvatures(map: &UnivalentMap, p: FermiPoint) -> Result<(f64, f64)> {
    principal_curvatures_from_norm(scaled_schwarzian_norm(map, p.z)?, p.t)
}

/// Points of the leaf `Φ(·, t)` near `p`, as Euclidean coordinates.
struct Leaf<'a> {
    map: &'a UnivalentMap,
    base: [f64; 3],
    step: f64,
}

impl Leaf<'_> {
    fn at(&self, i: f64, j: f64, dt: f64) -> Result<[f64; 3]> {
        let c = [
            self.base[0] + i * self.step,
            self.base[1] + j * self.step,
            self.base[2] + dt * self.step,
        ];
        let q = FermiPoint::from_coords(c)
            .map_err(|e| Error::StencilOutOfDomain(format!("leaf stencil at {c:?}: {e}")))?;
        Ok(phi(self.map, q)?.coords())
    }

    /// Fourth-order first derivative along a coordinate offset direction.
    fn d1(&self, dir: (f64, f64, f64)) -> Result<[f64; 3]> {
        let f = |k: f64| self.at(k * dir.0, k * dir.1, k * dir.2);
        let (m2, m1, p1, p2) = (f(-2.0)?, f(-1.0)?, f(1.0)?, f(2.0)?);
        Ok(std::array::from_fn(|r| {
            (m2[r] - 8.0 * m1[r] + 8.0 * p1[r] - p2[r]) / (12.0 * self.step)
        }))
    }

    /// Fourth-order pure second derivative.
    fn d2(&self, dir: (f64, f64)) -> Result<[f64; 3]> {
        let f = |k: f64| self.at(k * dir.0, k * dir.1, 0.0);
        let (m2, m1, c, p1, p2) = (f(-2.0)?, f(-1.0)?, f(0.0)?, f(1.0)?, f(2.0)?);
        let h2 = self.step * self.step;
        Ok(std::array::from_fn(|r| {
            (-m2[r] + 16.0 * m1[r] - 30.0 * c[r] + 16.0 * p1[r] - p2[r]) / (12.0 * h2)
        }))
    }

    /// Fourth-order mixed derivative as a tensor product of 5-point stencils.
    fn dxy(&self) -> Result<[f64; 3]> {
        const W: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut acc = [0.0; 3];
        for (i, wi) in W {
            for (j, wj) in W {
                let v = self.at(i, j, 0.0)?;
                for r in 0..3 {
                    acc[r] += wi * wj * v[r];
                }
            }
        }
        let den = 144.0 * self.step * self.step;
        Ok(acc.map(|v| v / den))
    }
}

/// Outward unit normal (Euclidean) of the leaf, its tangent vectors and the
/// image point, all by finite differences of [`phi`].
struct LeafFrame {
    point: [f64; 3],
    xu: [f64; 3],
    xv: [f64; 3],
    normal: [f64; 3],
}

fn leaf_frame(leaf: &Leaf<'_>) -> Result<LeafFrame> {
    let xu = leaf.d1((1.0, 0.0, 0.0))?;
    let xv = leaf.d1((0.0, 1.0, 0.0))?;
    let xt = leaf.d1((0.0, 0.0, 1.0))?;
    let n = cross(&xu, &xv);
    let nn = norm(&n);
    if !(nn > 1e-14 * norm(&xu) * norm(&xv)) {
        return Err(Error::NotImmersed { eigenvalue: 0.0 });
    }
    // orient along the ray toward the ideal boundary, i.e. along ±∂Φ/∂t
    let sign = if dot(&n, &xt) * BOUNDARY_RAY_SIGN >= 0.0 {
        1.0
    } else {
        -1.0
    };
    Ok(LeafFrame {
        point: leaf.at(0.0, 0.0, 0.0)?,
        xu,
        xv,
        normal: scaled(sign / nn, &n),
    })
}

/// Principal curvatures of the leaf through `p` from a finite-difference
/// shape operator of [`phi`].
///
/// Returns `(κ along the stretched principal direction, κ along the
/// compressed one)`, with positive curvature meaning the leaf bends away from
/// the normal that points toward the ideal boundary. The stretched direction
/// is the one in which the leaf's first fundamental form exceeds the Fermi
/// metric the most, so the pairing is decided without the closed form.
pub fn principal_curvatures_numeric_oracle(
    map: &UnivalentMap,
    p: FermiPoint,
    step: f64,
) -> Result<(f64, f64)> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step {step} must be positive")));
    }
    let (_, low, _) = dphi_eigen(map, p)?;
    if low <= 0.0 {
        return Err(Error::NotImmersed { eigenvalue: low });
    }
    let leaf = Leaf {
        map,
        base: p.coords(),
        step,
    };
    let fr = leaf_frame(&leaf)?;
    let xuu = leaf.d2((1.0, 0.0))?;
    let xvv = leaf.d2((0.0, 1.0))?;
    let xuv = leaf.dxy()?;
    let x3 = fr.point[2];
    let n = fr.normal;

    // Euclidean fundamental forms
    let e_uu = dot(&fr.xu, &fr.xu);
    let e_uv = dot(&fr.xu, &fr.xv);
    let e_vv = dot(&fr.xv, &fr.xv);
    let (l, m, nn) = (dot(&xuu, &n), dot(&xuv, &n), dot(&xvv, &n));

    // For the conformal metric |dx|²/x3², II_hyp = (II_e + N3 I_e / x3) / x3
    // and I_hyp = I_e / x3²; flipping the sign turns "bends toward N" into
    // "bends away from N".
    let second = |a: [f64; 2]| -> f64 {
        let ii = l * a[0] * a[0] + 2.0 * m * a[0] * a[1] + nn * a[1] * a[1];
        let i = e_uu * a[0] * a[0] + 2.0 * e_uv * a[0] * a[1] + e_vv * a[1] * a[1];
        -(x3 * ii + n[2] * i) / i
    };

    // Stretched direction: top eigenvector of I_hyp relative to the leaf's
    // Fermi metric, which is a multiple of the identity in (x, y).
    let (a, b, c) = (e_uu, e_uv, e_vv);
    let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let top = 0.5 * (a + c) + half_gap;
    let stretch_dir = if half_gap <= 1e-12 * (a + c) {
        // umbilic: any direction is principal
        [1.0, 0.0]
    } else if (a - top).abs() > (c - top).abs() {
        [b, top - a]
    } else {
        [top - c, b]
    };
    let compress_dir = [-stretch_dir[1], stretch_dir[0]];

    // Rayleigh quotients along principal directions of I_hyp equal the
    // shape-operator eigenvalues when both forms share eigenvectors; fall
    // back to the true eigenvalues to stay honest when they do not.
    let k_s = second(stretch_dir);
    let k_c = second(compress_dir);
    let (k_lo, k_hi) = shape_eigenvalues(e_uu, e_uv, e_vv, l, m, nn, x3, n[2]);
    let pair = if k_s <= k_c {
        (k_lo, k_hi)
    } else {
        (k_hi, k_lo)
    };
    if ((k_s - pair.0).abs() + (k_c - pair.1).abs()) > 1e-6 * (1.0 + k_hi.abs()) {
        log::debug!(
            "principal directions of I and II disagree at {:?}",
            p.coords()
        );
    }
    Ok(pair)
}

#[allow(clippy::too_many_arguments)]
fn shape_eigenvalues(
    e: f64,
    f: f64,
    g: f64,
    l: f64,
    m: f64,
    n: f64,
    x3: f64,
    n3: f64,
) -> (f64, f64) {
    // eigenvalues of -(x3 I^{-1} II + n3 Id)
    let det_i = e * g - f * f;
    let s11 = (g * l - f * m) / det_i;
    let s12 = (g * m - f * n) / det_i;
    let s21 = (e * m - f * l) / det_i;
    let s22 = (e * n - f * m) / det_i;
    let tr = s11 + s22;
    let det = s11 * s22 - s12 * s21;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let lo = 0.5 * tr - disc;
    let hi = 0.5 * tr + disc;
    // map k ↦ -(x3 k + n3) reverses order
    (-(x3 * hi + n3), -(x3 * lo + n3))
}

/// Gauss map of the leaf through `p`: the ideal endpoint of the outward normal
/// ray, which equals `φ(z)`.
pub fn gauss_map(map: &UnivalentMap, p: FermiPoint) -> Result<Complex64> {
    let (kp, km) = principal_curvatures(map, p)?;
    if !(kp > 0.0 && km > 0.0) {
        return Err(Error::NotConvex {
            kappa_plus: kp,
            kappa_minus: km,
        });
    }
    Ok(eval_jet(map, p.z)?.f0)
}

/// Gauss map by ray tracing: follow the geodesic normal to the finite-difference
/// leaf, away from its centre of curvature, to the sphere at infinity.
pub fn gauss_map_ray_trace(map: &UnivalentMap, p: FermiPoint, step: f64) -> Result<Complex64> {
    let leaf = Leaf {
        map,
        base: p.coords(),
        step,
    };
    let fr = leaf_frame(&leaf)?;
    let start = HalfSpacePoint::new(Complex64::new(fr.point[0], fr.point[1]), fr.point[2])?;
    geodesic_endpoint(&start, fr.normal)
        .ok_or_else(|| Error::Domain("normal ray escapes vertically to infinity".into()))
}

/// Per-point surface record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsteinSample {
    pub z: DiskPoint,
    pub t: f64,
    pub norm_s: f64,
    pub dphi_eigen_plus: f64,
    pub dphi_eigen_minus: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub immersed: bool,
    pub locally_convex: bool,
}

impl EpsteinSample {
    pub const CSV_HEADER: &'static str =
        "z_re,z_im,t,norm_S,eig_plus,eig_minus,kappa_plus,kappa_minus,immersed,convex";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.z.z().re,
            self.z.z().im,
            self.t,
            self.norm_s,
            self.dphi_eigen_plus,
            self.dphi_eigen_minus,
            self.kappa_plus,
            self.kappa_minus,
            self.immersed,
            self.locally_convex
        )
    }
}

/// Closed-form surface data at `p`. Undefined curvatures are recorded as NaN.
pub fn epstein_sample(map: &UnivalentMap, p: FermiPoint) -> Result<EpsteinSample> {
    let norm_s = scaled_schwarzian_norm(map, p.z)?;
    let q = stretch(norm_s, p.t);
    let (kappa_plus, kappa_minus) =
        principal_curvatures_from_norm(norm_s, p.t).unwrap_or((f64::NAN, f64::NAN));
    let immersed = 1.0 - q > 0.0 && p.t > IMMERSION_THRESHOLD;
    let locally_convex = immersed && kappa_plus > 0.0 && kappa_minus > 0.0;
    Ok(EpsteinSample {
        z: p.z,
        t: p.t,
        norm_s,
        dphi_eigen_plus: 1.0 + q,
        dphi_eigen_minus: 1.0 - q,
        kappa_plus,
        kappa_minus,
        immersed,
        locally_convex,
    })
}

/// Surface samples over a grid of disk points and leaves.
pub fn surface_probe(
    map: &UnivalentMap,
    zs: &[DiskPoint],
    ts: &[f64],
) -> Result<Vec<EpsteinSample>> {
    let mut out = Vec::with_capacity(zs.len() * ts.len());
    for &z in zs {
        for &t in ts {
            out.push(epstein_sample(map, FermiPoint::new(z, t)?)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_maps::MobiusTransform;
    use crate::hyperbolic_models::{fermi_metric, pullback_metric_numeric};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fp(x: f64, y: f64, t: f64) -> FermiPoint {
        FermiPoint::from_coords([x, y, t]).unwrap()
    }

    fn sample_mobius() -> (MobiusTransform, UnivalentMap) {
        let m = MobiusTransform::new(c(1.0, 0.5), c(0.2, 0.0), c(0.3, -0.1), c(2.0, 0.0)).unwrap();
        (m, UnivalentMap::mobius(m).unwrap())
    }

    #[test]
    fn phi_of_identity_is_iota() {
        let p = fp(0.3, -0.2, 1.1);
        assert_eq!(phi(&UnivalentMap::Identity, p).unwrap(), iota(p));
    }

    #[test]
    fn phi_of_mobius_is_a_global_isometry() {
        let (m, map) = sample_mobius();
        for p in [fp(0.1, 0.2, 0.5), fp(-0.4, 0.1, 2.0)] {
            let a = phi(&map, p).unwrap();
            let b = mobius_act_halfspace(&m, iota(p)).unwrap();
            assert!((a.w - b.w).norm() < 1e-13 && (a.x3 - b.x3).abs() < 1e-13);
        }
    }

    #[test]
    fn phi_of_quadratic_at_origin() {
        // osculator of z + z²/2 at 0 is w/(1 - w/2); applying its Poincaré
        // extension to (0, x3) by hand gives (-x3²/2, x3)/(1 + x3²/4).
        let map = UnivalentMap::quadratic(c(0.5, 0.0)).unwrap();
        let q = phi(&map, fp(0.0, 0.0, 1.0)).unwrap();
        assert!((q.w - c(-0.065_453_112_730_772_12, 0.0)).norm() < 1e-15);
        assert!((q.x3 - 0.355_840_013_904_278_44).abs() < 1e-15);
    }

    #[test]
    fn dphi_examples() {
        let (_, mob) = sample_mobius();
        assert_eq!(dphi_eigen(&mob, fp(0.2, 0.1, 1.0)).unwrap().0, 1.0);
        // ‖S‖ = 3/2 and e^t cosh t = 3/2 at t = log √2
        assert!((stretch(1.5, IMMERSION_THRESHOLD) - 1.0).abs() < 1e-15);
        let (a, b, _) = dphi_eigen(&UnivalentMap::Koebe, fp(0.0, 0.0, 2.0)).unwrap();
        let q = 1.5 / (2f64.exp() * 2f64.cosh());
        assert!((a - 1.0 - q).abs() < 1e-15 && (b - 1.0 + q).abs() < 1e-15);
    }

    #[test]
    fn curvature_examples() {
        let (kp, km) = principal_curvatures_from_norm(0.0, 1.3).unwrap();
        assert!((kp - 1.3f64.tanh()).abs() < 1e-15 && (km - 1.3f64.tanh()).abs() < 1e-15);
        let (kp, _) = principal_curvatures_from_norm(1.5, CONVEXITY_THRESHOLD).unwrap();
        assert!(kp.abs() < 1e-15);
        // coefficient 1 - 2‖S‖ = -1
        let (_, km) = principal_curvatures_from_norm(1.0, 0.8).unwrap();
        assert!((km - 1.0 / 0.8f64.tanh()).abs() < 1e-14);
        // 1 + (1 - 3) e^{-2t} = 0 at t = log(2)/2
        assert!(matches!(
            principal_curvatures_from_norm(1.5, IMMERSION_THRESHOLD),
            Err(Error::DenominatorVanishes { .. })
        ));
    }

    #[test]
    fn oracle_umbilic_cases() {
        let (_, mob) = sample_mobius();
        let (a, b) =
            principal_curvatures_numeric_oracle(&mob, fp(0.1, -0.2, 1.0), SHAPE_ORACLE_STEP)
                .unwrap();
        assert!((a - 1f64.tanh()).abs() < 1e-6 && (b - 1f64.tanh()).abs() < 1e-6);
        let (a, b) = principal_curvatures_numeric_oracle(
            &UnivalentMap::Identity,
            fp(0.0, 0.0, 2.0),
            SHAPE_ORACLE_STEP,
        )
        .unwrap();
        assert!((a - 2f64.tanh()).abs() < 1e-6 && (b - 2f64.tanh()).abs() < 1e-6);
    }

    #[test]
    fn oracle_adjudicates_sign_pairing() {
        let p = fp(0.1, 0.0, 3.0);
        let closed = principal_curvatures(&UnivalentMap::Koebe, p).unwrap();
        let fd = principal_curvatures_numeric_oracle(&UnivalentMap::Koebe, p, SHAPE_ORACLE_STEP)
            .unwrap();
        assert!((closed.0 - fd.0).abs() < 1e-5 * closed.0.abs());
        assert!((closed.1 - fd.1).abs() < 1e-5 * closed.1.abs());
        assert!(closed.0 < closed.1);
    }

    #[test]
    fn oracle_rejects_non_immersed_points() {
        let r = principal_curvatures_numeric_oracle(&UnivalentMap::Koebe, fp(0.0, 0.0, 0.1), 1e-4);
        assert!(matches!(r, Err(Error::NotImmersed { .. })));
    }

    #[test]
    fn jacobian_determinant_matches_fd() {
        let map = UnivalentMap::Koebe;
        for p in [fp(0.1, 0.05, 1.0), fp(-0.2, 0.3, 2.0)] {
            let h = pullback_metric_numeric(|q| phi(&map, q), p, 1e-3).unwrap();
            let fd = (h.determinant() / fermi_metric(p).determinant()).sqrt();
            let closed = jacobian_determinant(&map, p).unwrap();
            assert!((fd - closed).abs() < 1e-5 * closed);
        }
    }

    #[test]
    fn gauss_map_examples() {
        let p = fp(0.3, -0.1, 1.0);
        assert_eq!(gauss_map(&UnivalentMap::Identity, p).unwrap(), p.z.z());
        let (m, mob) = sample_mobius();
        assert!((gauss_map(&mob, p).unwrap() - m.apply(p.z.z())).norm() < 1e-14);

        let q = UnivalentMap::quadratic(c(0.5, 0.0)).unwrap();
        let p = fp(0.2, 0.0, 3.0);
        let g = gauss_map(&q, p).unwrap();
        assert!((g - c(0.22, 0.0)).norm() < 1e-15);
        let traced = gauss_map_ray_trace(&q, p, 1e-4).unwrap();
        assert!((traced - c(0.22, 0.0)).norm() < 1e-5);

        assert!(matches!(
            gauss_map(&UnivalentMap::Koebe, fp(0.0, 0.0, 0.5)),
            Err(Error::NotConvex { .. })
        ));
    }

    #[test]
    fn sample_flags() {
        let s = epstein_sample(&UnivalentMap::Koebe, fp(0.0, 0.0, 0.3)).unwrap();
        assert!(!s.immersed && !s.locally_convex);
        let s = epstein_sample(&UnivalentMap::Koebe, fp(0.0, 0.0, 0.5)).unwrap();
        assert!(s.immersed && !s.locally_convex);
        let s = epstein_sample(&UnivalentMap::Koebe, fp(0.0, 0.0, 0.8)).unwrap();
        assert!(s.immersed && s.locally_convex && s.dphi_eigen_plus >= s.dphi_eigen_minus);
        assert_eq!(
            s.to_csv_row().split(',').count(),
            EpsteinSample::CSV_HEADER.split(',').count()
        );
    }
}
