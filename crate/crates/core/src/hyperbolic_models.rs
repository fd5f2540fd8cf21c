//! Fermi and upper half-space models of hyperbolic 3-space, the isometric
//! action of normalized Möbius transformations, and the isometry `ι` between
//! the two models.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_maps::{disk_mobius_to, hyperbolic_density, DiskPoint, MobiusTransform};
use crate::error::{Error, Result};
pub use crate::linalg::SymMatrix3;

/// Largest |t| accepted in Fermi coordinates; beyond this `e^{-t}` leaves the
/// normal range of `f64`.
pub const MAX_ABS_T: f64 = 700.0;

/// Sign of `∂/∂t` relative to the direction of the normal ray that ends on Δ.
///
/// At `t = +∞` the Fermi chart meets Δ ⊂ Ĉ, and `∂/∂t` points out of
/// hyperbolic space there; rays toward the ideal boundary follow `+∂/∂t`.
pub const BOUNDARY_RAY_SIGN: f64 = 1.0;

/// Point `(z, t)` of the Fermi chart Δ × ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiPoint {
    pub z: DiskPoint,
    pub t: f64,
}

impl FermiPoint {
    pub fn new(z: DiskPoint, t: f64) -> Result<Self> {
        if t.is_finite() && t.abs() <= MAX_ABS_T {
            Ok(Self { z, t })
        } else {
            Err(Error::Domain(format!(
                "t = {t} is outside [-{MAX_ABS_T}, {MAX_ABS_T}]"
            )))
        }
    }

    pub fn from_coords(c: [f64; 3]) -> Result<Self> {
        Self::new(DiskPoint::from_xy(c[0], c[1])?, c[2])
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.z.z().re, self.z.z().im, self.t]
    }
}

/// Point `w + x3·j` of the upper half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub w: Complex64,
    pub x3: f64,
}

impl HalfSpacePoint {
    pub fn new(w: Complex64, x3: f64) -> Result<Self> {
        if x3 > 0.0 && x3.is_finite() && w.norm().is_finite() {
            Ok(Self { w, x3 })
        } else {
            Err(Error::Domain(format!(
                "half-space height {x3} must be positive"
            )))
        }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.w.re, self.w.im, self.x3]
    }
}

/// `g = diag(λ² cosh² t, λ² cosh² t, 1)` in the `(x, y, t)` chart.
pub fn fermi_metric(p: FermiPoint) -> SymMatrix3 {
    let lam = hyperbolic_density(p.z);
    let c = p.t.cosh();
    let a = lam * lam * c * c;
    SymMatrix3::diag(a, a, 1.0)
}

/// Hyperbolic distance between two half-space points.
pub fn halfspace_distance(p: &HalfSpacePoint, q: &HalfSpacePoint) -> f64 {
    let dw = p.w - q.w;
    let dx = p.x3 - q.x3;
    let chord = (dw.norm_sqr() + dx * dx).sqrt();
    2.0 * (chord / (2.0 * (p.x3 * q.x3).sqrt())).asinh()
}

fn act(m: &MobiusTransform, w: Complex64, x3: f64) -> (Complex64, f64) {
    // (a P + b)(c P + d)^{-1} for the quaternion P = w + x3 j
    let cwd = m.c * w + m.d;
    let den = cwd.norm_sqr() + m.c.norm_sqr() * x3 * x3;
    let w_out = ((m.a * w + m.b) * cwd.conj() + m.a * m.c.conj() * (x3 * x3)) / den;
    (w_out, x3 / den)
}

/// Poincaré extension of `m` acting on the upper half-space.
pub fn mobius_act_halfspace(m: &MobiusTransform, p: HalfSpacePoint) -> Result<HalfSpacePoint> {
    let (w, x3) = act(m, p.w, p.x3);
    if !(x3 >= 1e-300) || !w.norm().is_finite() {
        return Err(Error::Underflow(x3));
    }
    Ok(HalfSpacePoint { w, x3 })
}

/// The isometry from the Fermi chart to the half-space model.
///
/// `ι(0, t) = (0, e^{-t})`, so `t = 0` is the hemisphere over the unit circle
/// and `t → +∞` tends to `z ∈ Δ ⊂ ℂ`. Other points follow by equivariance
/// under the disk automorphism carrying 0 to `z`.
pub fn iota(p: FermiPoint) -> HalfSpacePoint {
    let (w, x3) = act(&disk_mobius_to(p.z), Complex64::new(0.0, 0.0), (-p.t).exp());
    HalfSpacePoint { w, x3 }
}

/// Ideal endpoint of the geodesic ray leaving `p` with Euclidean direction
/// `dir` (not necessarily unit). Returns `None` for rays going up vertically.
pub fn geodesic_endpoint(p: &HalfSpacePoint, dir: [f64; 3]) -> Option<Complex64> {
    let horiz = Complex64::new(dir[0], dir[1]);
    let hn = horiz.norm();
    let len = (hn * hn + dir[2] * dir[2]).sqrt();
    if hn <= 1e-15 * len {
        return (dir[2] < 0.0).then_some(p.w);
    }
    // the geodesic is a semicircle in the vertical plane through `horiz`,
    // centred on ℂ at signed offset `centre` from p.w
    let centre = p.x3 * dir[2] / hn;
    let radius = centre.hypot(p.x3);
    Some(p.w + horiz / hn * (centre + radius))
}

/// Condition number above which a pullback Jacobian is reported as
/// near-singular.
pub const JACOBIAN_CONDITION_WARNING: f64 = 1e8;

/// Fourth-order central-difference Jacobian of a chart map into half-space,
/// columns `∂/∂x, ∂/∂y, ∂/∂t`, together with the image of `p`.
pub fn halfspace_jacobian<F>(
    fmap: F,
    p: FermiPoint,
    step: f64,
) -> Result<([[f64; 3]; 3], HalfSpacePoint)>
where
    F: Fn(FermiPoint) -> Result<HalfSpacePoint>,
{
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step {step} must be positive")));
    }
    let base = p.coords();
    let eval = |axis: usize, k: f64| -> Result<[f64; 3]> {
        let mut c = base;
        c[axis] += k * step;
        let q = FermiPoint::from_coords(c)
            .map_err(|e| Error::StencilOutOfDomain(format!("pullback stencil at {c:?}: {e}")))?;
        Ok(fmap(q)?.coords())
    };
    let mut jac = [[0.0; 3]; 3];
    for axis in 0..3 {
        let (m2, m1, p1, p2) = (
            eval(axis, -2.0)?,
            eval(axis, -1.0)?,
            eval(axis, 1.0)?,
            eval(axis, 2.0)?,
        );
        for row in 0..3 {
            jac[row][axis] = (m2[row] - 8.0 * m1[row] + 8.0 * p1[row] - p2[row]) / (12.0 * step);
        }
    }
    Ok((jac, fmap(p)?))
}

/// Pullback of the half-space metric `(|dw|² + dx3²)/x3²` through `fmap` at
/// `p`, using a finite-difference Jacobian.
pub fn pullback_metric_numeric<F>(fmap: F, p: FermiPoint, step: f64) -> Result<SymMatrix3>
where
    F: Fn(FermiPoint) -> Result<HalfSpacePoint>,
{
    let (jac, image) = halfspace_jacobian(fmap, p, step)?;
    let j = nalgebra::Matrix3::from_fn(|r, c| jac[r][c]);
    let sv = j.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= JACOBIAN_CONDITION_WARNING) {
        log::warn!(
            "near-singular pullback Jacobian at {:?} (condition {cond:e})",
            p.coords()
        );
    }
    let g = j.transpose() * j / (image.x3 * image.x3);
    Ok(SymMatrix3::from_matrix(&g))
}
