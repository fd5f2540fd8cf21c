//! Curvature of metric fields given only pointwise: Christoffel symbols,
//! Ricci tensor, sectional curvatures, traceless-Ricci norms and slab
//! integrals.
//!
//! The field is differentiated once, to second order, by central differences
//! with one level of Richardson extrapolation. Everything after that (inverse
//! metric, Christoffels and their derivatives, Ricci) is exact algebra on the
//! resulting 2-jet.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex_maps::{hyperbolic_density, DiskPoint, UnivalentMap};
use crate::error::{Error, Result};
use crate::gluing::{
    chart_convert, glued_metric_eta, pullback_metric_h, Chart, ChartDirection, GluedMetricSpec,
};
use crate::hyperbolic_models::{fermi_metric, FermiPoint};
use crate::linalg::{cross, generalized_eigenvalues, SymMatrix3};

/// A smooth symmetric positive-definite field on an open set of ℝ³.
pub trait MetricField: Sync {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3>;

    /// Values of the third coordinate where the field is only C².
    /// Difference stencils are kept from straddling them.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

fn fermi_point(c: [f64; 3]) -> Result<FermiPoint> {
    FermiPoint::from_coords(c)
}

/// The hyperbolic metric in Fermi coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct FermiField;

impl MetricField for FermiField {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        Ok(fermi_metric(fermi_point(c)?))
    }
}

/// Closed-form `Φ*g` for a map.
#[derive(Debug, Clone)]
pub struct PullbackField(pub UnivalentMap);

impl MetricField for PullbackField {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        pullback_metric_h(&self.0, fermi_point(c)?)
    }
}

/// Evaluates the glued metric in the chart named by the spec.
impl MetricField for GluedMetricSpec {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        match self.chart {
            Chart::Xyt => glued_metric_eta(self, fermi_point(c)?),
            Chart::UCoords => {
                let base = XytSpec(self);
                InUChart(&base).metric_at(c)
            }
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.n, self.n + 1.0]
    }
}

struct XytSpec<'a>(&'a GluedMetricSpec);

impl MetricField for XytSpec<'_> {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        glued_metric_eta(self.0, fermi_point(c)?)
    }
}

/// A Fermi-chart field re-expressed in `u = (cosh t · x, cosh t · y, t)`.
#[derive(Debug, Clone, Copy)]
pub struct InUChart<F>(pub F);

impl<F: MetricField> MetricField for InUChart<F> {
    fn metric_at(&self, u: [f64; 3]) -> Result<SymMatrix3> {
        let c = xyt_from_u(u);
        let m = self.0.metric_at(c)?;
        Ok(chart_convert(&m, fermi_point(c)?, ChartDirection::XytToU))
    }

    fn kinks(&self) -> Vec<f64> {
        self.0.kinks()
    }
}

impl<F: MetricField> MetricField for &F {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        (*self).metric_at(c)
    }

    fn kinks(&self) -> Vec<f64> {
        (*self).kinks()
    }
}

pub fn u_from_xyt(c: [f64; 3]) -> [f64; 3] {
    let ch = c[2].cosh();
    [ch * c[0], ch * c[1], c[2]]
}

pub fn xyt_from_u(u: [f64; 3]) -> [f64; 3] {
    let ch = u[2].cosh();
    [u[0] / ch, u[1] / ch, u[2]]
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EuclideanField;

impl MetricField for EuclideanField {
    fn metric_at(&self, _: [f64; 3]) -> Result<SymMatrix3> {
        Ok(SymMatrix3::IDENTITY)
    }
}

/// Unit round 3-sphere in stereographic coordinates, `4|dx|²/(1 + |x|²)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundSphereField;

impl MetricField for RoundSphereField {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        let r2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        let f = 4.0 / ((1.0 + r2) * (1.0 + r2));
        Ok(SymMatrix3::diag(f, f, f))
    }
}

/// `λ²(dx² + dy²) + dt²` with the Poincaré density `λ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConformalBlockField;

impl MetricField for ConformalBlockField {
    fn metric_at(&self, c: [f64; 3]) -> Result<SymMatrix3> {
        let lam = hyperbolic_density(DiskPoint::from_xy(c[0], c[1])?);
        Ok(SymMatrix3::diag(lam * lam, lam * lam, 1.0))
    }
}

/// Finite-difference steps for the metric 2-jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSteps {
    /// Step of the first-derivative stencils.
    pub first: f64,
    /// Step of the second-derivative stencils.
    pub second: f64,
    pub richardson: bool,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            first: 1e-3,
            second: 3e-3,
            richardson: true,
        }
    }
}

impl FdSteps {
    fn validate(&self) -> Result<()> {
        if !(self.first > 0.0
            && self.second > 0.0
            && self.first.is_finite()
            && self.second.is_finite())
        {
            return Err(Error::Config(format!(
                "finite-difference steps must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Metric with its first and second coordinate derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct MetricJet {
    pub g: SymMatrix3,
    pub d1: [SymMatrix3; 3],
    /// `d2[a][b] = ∂_a ∂_b g`, symmetric in `(a, b)`.
    pub d2: [[SymMatrix3; 3]; 3],
}

/// Shrinks `h` so that a stencil of reach `h` around `t` stays on one side of
/// every kink.
fn kink_safe_step(h: f64, t: f64, kinks: &[f64]) -> Result<f64> {
    let dist = kinks
        .iter()
        .map(|k| (t - k).abs())
        .fold(f64::INFINITY, f64::min);
    if dist >= h {
        return Ok(h);
    }
    if dist < 1e-4 {
        return Err(Error::StencilOutOfDomain(format!(
            "t = {t} is within {dist:e} of a point where the field is only C²"
        )));
    }
    Ok(0.9 * dist)
}

fn eval_offset<F: MetricField + ?Sized>(f: &F, c: [f64; 3], off: [f64; 3]) -> Result<SymMatrix3> {
    let q = [c[0] + off[0], c[1] + off[1], c[2] + off[2]];
    f.metric_at(q).map_err(|e| match e {
        Error::OutsideDisk(_) | Error::Domain(_) => {
            Error::StencilOutOfDomain(format!("stencil point {q:?}: {e}"))
        }
        other => other,
    })
}

fn unit(a: usize, h: f64) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[a] = h;
    v
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn neg3(a: [f64; 3]) -> [f64; 3] {
    [-a[0], -a[1], -a[2]]
}

fn richardson(coarse: SymMatrix3, fine: SymMatrix3) -> SymMatrix3 {
    fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0))
}

/// Central-difference 2-jet of the field at `c`.
pub fn metric_jet<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    steps: &FdSteps,
) -> Result<MetricJet> {
    steps.validate()?;
    let kinks = field.kinks();
    let h1 = kink_safe_step(steps.first, c[2], &kinks)?;
    let h2 = kink_safe_step(steps.second, c[2], &kinks)?;
    let g = field.metric_at(c)?;

    let first = |a: usize, h: f64| -> Result<SymMatrix3> {
        let p = eval_offset(field, c, unit(a, h))?;
        let m = eval_offset(field, c, unit(a, -h))?;
        Ok(p.sub(&m).scale(0.5 / h))
    };
    let pure = |a: usize, h: f64| -> Result<SymMatrix3> {
        let p = eval_offset(field, c, unit(a, h))?;
        let m = eval_offset(field, c, unit(a, -h))?;
        Ok(p.add(&m).sub(&g.scale(2.0)).scale(1.0 / (h * h)))
    };
    let mixed = |a: usize, b: usize, h: f64| -> Result<SymMatrix3> {
        let (ea, eb) = (unit(a, h), unit(b, h));
        let pp = eval_offset(field, c, add3(ea, eb))?;
        let pm = eval_offset(field, c, add3(ea, neg3(eb)))?;
        let mp = eval_offset(field, c, add3(neg3(ea), eb))?;
        let mm = eval_offset(field, c, add3(neg3(ea), neg3(eb)))?;
        Ok(pp.sub(&pm).sub(&mp).add(&mm).scale(0.25 / (h * h)))
    };
    let extrapolate = |f: &dyn Fn(f64) -> Result<SymMatrix3>, h: f64| -> Result<SymMatrix3> {
        if steps.richardson {
            Ok(richardson(f(h)?, f(0.5 * h)?))
        } else {
            f(h)
        }
    };

    let mut d1 = [SymMatrix3::ZERO; 3];
    for (a, slot) in d1.iter_mut().enumerate() {
        *slot = extrapolate(&|h| first(a, h), h1)?;
    }
    let mut d2 = [[SymMatrix3::ZERO; 3]; 3];
    for a in 0..3 {
        d2[a][a] = extrapolate(&|h| pure(a, h), h2)?;
        for b in 0..a {
            let v = extrapolate(&|h| mixed(a, b, h), h2)?;
            d2[a][b] = v;
            d2[b][a] = v;
        }
    }
    Ok(MetricJet { g, d1, d2 })
}

/// `Γ[l][i][j] = Γ^l_ij`.
pub type Christoffel = [[[f64; 3]; 3]; 3];

/// Christoffels and the Ricci tensor derived from one metric 2-jet.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureData {
    pub g: SymMatrix3,
    pub christoffel: Christoffel,
    pub ricci: SymMatrix3,
    /// `max |R_ij − R_ji|` before symmetrization, relative to `max |R_ij|`.
    pub ricci_asymmetry: f64,
}

fn christoffel_first_kind(d1: &[SymMatrix3; 3]) -> [[[f64; 3]; 3]; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for (k, ok) in out.iter_mut().enumerate() {
        for (i, oi) in ok.iter_mut().enumerate() {
            for (j, v) in oi.iter_mut().enumerate() {
                *v = 0.5 * (d1[i].get(k, j) + d1[j].get(i, k) - d1[k].get(i, j));
            }
        }
    }
    out
}

pub fn curvature_from_jet(jet: &MetricJet) -> Result<CurvatureData> {
    let ginv = jet.g.ensure_positive_definite()?.inverse()?.to_array();
    let first = christoffel_first_kind(&jet.d1);

    let mut gam: Christoffel = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                gam[l][i][j] = (0..3).map(|k| ginv[l][k] * first[k][i][j]).sum();
            }
        }
    }

    // ∂_m g^{lk} = −g^{la} ∂_m g_ab g^{bk}
    let mut dginv = [[[0.0; 3]; 3]; 3];
    for (m, dm) in dginv.iter_mut().enumerate() {
        let dg = jet.d1[m].to_array();
        for l in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s += ginv[l][a] * dg[a][b] * ginv[b][k];
                    }
                }
                dm[l][k] = -s;
            }
        }
    }

    // dgam[m][l][i][j] = ∂_m Γ^l_ij
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
    for m in 0..3 {
        let first_m = christoffel_first_kind(&jet.d2[m]);
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dgam[m][l][i][j] = (0..3)
                        .map(|k| dginv[m][l][k] * first[k][i][j] + ginv[l][k] * first_m[k][i][j])
                        .sum();
                }
            }
        }
    }

    let mut ric = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut r = 0.0;
            for l in 0..3 {
                r += dgam[l][l][i][j] - dgam[j][l][i][l];
                for m in 0..3 {
                    r += gam[l][i][j] * gam[m][l][m] - gam[m][i][l] * gam[l][j][m];
                }
            }
            ric[i][j] = r;
        }
    }
    let mut asym = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            asym = asym.max((ric[i][j] - ric[j][i]).abs());
            scale = scale.max(ric[i][j].abs());
        }
    }
    Ok(CurvatureData {
        g: jet.g,
        christoffel: gam,
        ricci: SymMatrix3::from_array(&ric),
        ricci_asymmetry: if scale > 0.0 { asym / scale } else { 0.0 },
    })
}

pub fn curvature_data<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    steps: &FdSteps,
) -> Result<CurvatureData> {
    curvature_from_jet(&metric_jet(field, c, steps)?)
}

pub fn christoffel<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    steps: &FdSteps,
) -> Result<Christoffel> {
    Ok(curvature_data(field, c, steps)?.christoffel)
}

pub fn ricci<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    steps: &FdSteps,
) -> Result<SymMatrix3> {
    Ok(curvature_data(field, c, steps)?.ricci)
}

/// `R_ij uⁱ uʲ`, unnormalized.
pub fn ricci_quadratic<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    u: [f64; 3],
    steps: &FdSteps,
) -> Result<f64> {
    if u.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(ricci(field, c, steps)?.quadratic(&u))
}

/// Sectional curvature of the plane spanned by `u, v` from the 3-dimensional
/// identity `2K(u, v) = Ric(u) − Ric(w) + Ric(v)` in an orthonormal frame.
pub fn sectional_from_ricci(
    ric: &SymMatrix3,
    g: &SymMatrix3,
    u: [f64; 3],
    v: [f64; 3],
) -> Result<f64> {
    let gn = |a: &[f64; 3]| g.quadratic(a).sqrt();
    let nu = gn(&u);
    if !(nu > 0.0) {
        return Err(Error::DegeneratePlane);
    }
    let e1 = u.map(|x| x / nu);
    let proj = g.quadratic_pair(&e1, &v);
    let v_perp = [
        v[0] - proj * e1[0],
        v[1] - proj * e1[1],
        v[2] - proj * e1[2],
    ];
    let nv = gn(&v_perp);
    if !(nv > 1e-12 * gn(&v)) {
        return Err(Error::DegeneratePlane);
    }
    let e2 = v_perp.map(|x| x / nv);
    // g(w, e1) = w · (g e1) = 0 and likewise for e2
    let w = cross(&g.apply(&e1), &g.apply(&e2));
    let nw = gn(&w);
    let e3 = w.map(|x| x / nw);
    Ok(0.5 * (ric.quadratic(&e1) - ric.quadratic(&e3) + ric.quadratic(&e2)))
}

pub fn sectional<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    u: [f64; 3],
    v: [f64; 3],
    steps: &FdSteps,
) -> Result<f64> {
    let d = curvature_data(field, c, steps)?;
    sectional_from_ricci(&d.ricci, &d.g, u, v)
}

/// Smallest and largest sectional curvature over all planes at a point.
///
/// With `ρ` the eigenvalues of `g⁻¹Ric`, the plane with unit normal `n` has
/// `K = scal/2 − Ric(n, n)`, so the extremes are `scal/2 − ρ_max` and
/// `scal/2 − ρ_min`.
pub fn sectional_range(ric: &SymMatrix3, g: &SymMatrix3) -> Result<(f64, f64)> {
    let rho = generalized_eigenvalues(ric, g)?;
    let half_scal = 0.5 * (rho[0] + rho[1] + rho[2]);
    Ok((half_scal - rho[2], half_scal - rho[0]))
}

/// `‖Ric + 2g‖_g`.
pub fn traceless_norm_from_ricci(ric: &SymMatrix3, g: &SymMatrix3) -> Result<f64> {
    let t = ric.add(&g.scale(2.0));
    let mu = generalized_eigenvalues(&t, g)?;
    Ok(mu.iter().map(|m| m * m).sum::<f64>().sqrt())
}

pub fn traceless_ricci_norm<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    steps: &FdSteps,
) -> Result<f64> {
    let d = curvature_data(field, c, steps)?;
    traceless_norm_from_ricci(&d.ricci, &d.g)
}

/// `√det g` in the field's chart.
pub fn volume_element<F: MetricField + ?Sized>(field: &F, c: [f64; 3]) -> Result<f64> {
    Ok(field
        .metric_at(c)?
        .ensure_positive_definite()?
        .determinant()
        .sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneCurvature {
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub point: [f64; 3],
    pub christoffels: Christoffel,
    pub ricci: SymMatrix3,
    pub sectional: Vec<PlaneCurvature>,
    pub sectional_min: f64,
    pub sectional_max: f64,
    pub traceless_norm: f64,
    pub vol_element: f64,
    pub ricci_asymmetry: f64,
}

const AXES: [&str; 3] = ["x", "y", "t"];

impl CurvatureSample {
    pub fn csv_header() -> String {
        let mut cols: Vec<String> = [
            "x",
            "y",
            "t",
            "vol_element",
            "traceless_norm",
            "sectional_min",
            "sectional_max",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for s in ["xx", "yy", "tt", "xy", "xt", "yt"] {
            cols.push(format!("ric_{s}"));
        }
        for l in AXES {
            for i in AXES {
                for j in AXES {
                    cols.push(format!("gamma_{l}_{i}{j}"));
                }
            }
        }
        cols.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        let r = &self.ricci;
        let mut vals = vec![
            self.point[0],
            self.point[1],
            self.point[2],
            self.vol_element,
            self.traceless_norm,
            self.sectional_min,
            self.sectional_max,
            r.xx,
            r.yy,
            r.tt,
            r.xy,
            r.xt,
            r.yt,
        ];
        vals.extend(self.christoffels.iter().flatten().flatten());
        vals.iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Coordinate planes followed by `extra` seeded random planes.
pub fn sample_planes(extra: usize, seed: u64) -> Vec<([f64; 3], [f64; 3])> {
    let e = |a| unit(a, 1.0);
    let mut planes = vec![(e(0), e(1)), (e(0), e(2)), (e(1), e(2))];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let mut r = || std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let (u, v) = (r(), r());
        planes.push((u, v));
    }
    planes
}

pub fn curvature_sample<F: MetricField + ?Sized>(
    field: &F,
    c: [f64; 3],
    steps: &FdSteps,
    planes: &[([f64; 3], [f64; 3])],
) -> Result<CurvatureSample> {
    let d = curvature_data(field, c, steps)?;
    let mut sectional = Vec::with_capacity(planes.len());
    for &(u, v) in planes {
        // random planes can come out degenerate; skip those
        match sectional_from_ricci(&d.ricci, &d.g, u, v) {
            Ok(k) => sectional.push(PlaneCurvature { u, v, k }),
            Err(Error::DegeneratePlane) => {}
            Err(e) => return Err(e),
        }
    }
    let (sectional_min, sectional_max) = sectional_range(&d.ricci, &d.g)?;
    Ok(CurvatureSample {
        point: c,
        christoffels: d.christoffel,
        ricci: d.ricci,
        sectional,
        sectional_min,
        sectional_max,
        traceless_norm: traceless_norm_from_ricci(&d.ricci, &d.g)?,
        vol_element: d.g.determinant().sqrt(),
        ricci_asymmetry: d.ricci_asymmetry,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum QuadratureKind {
    #[default]
    #[serde(rename = "gauss-legendre")]
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    #[serde(default)]
    pub kind: QuadratureKind,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_axis: 8,
            kind: QuadratureKind::GaussLegendre,
        }
    }
}

pub const MIN_NODES: usize = 4;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 1 {
        return Err(Error::Resolution(n));
    }
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    Ok(out)
}

/// `z`-box × `[n, n + 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slab {
    pub center: Complex64,
    pub side: f64,
    pub n: f64,
}

impl Slab {
    pub fn at_depth(n: f64) -> Self {
        Self {
            center: Complex64::new(0.2, 0.0),
            side: 0.5,
            n,
        }
    }
}

/// Nominal Euler characteristic used to scale per-area values to a surface.
pub const NOMINAL_EULER_CHARACTERISTIC: f64 = -2.0;

fn nominal_surface_area() -> f64 {
    -2.0 * std::f64::consts::PI * NOMINAL_EULER_CHARACTERISTIC
}

/// Tensor-product rule over the slab: `(coords, weight)` in a fixed order.
fn slab_nodes(slab: &Slab, quad: &QuadratureSpec) -> Result<Vec<([f64; 3], f64)>> {
    if quad.nodes_per_axis < MIN_NODES {
        return Err(Error::Resolution(quad.nodes_per_axis));
    }
    let gl = gauss_legendre(quad.nodes_per_axis)?;
    let half = 0.5 * slab.side;
    let mut out = Vec::with_capacity(gl.len().pow(3));
    for &(a, wa) in &gl {
        for &(b, wb) in &gl {
            for &(s, ws) in &gl {
                let c = [
                    slab.center.re + half * a,
                    slab.center.im + half * b,
                    slab.n + 0.5 * (s + 1.0),
                ];
                out.push((c, wa * wb * ws * half * half * 0.5));
            }
        }
    }
    Ok(out)
}

/// Hyperbolic area of the slab's `z`-box.
pub fn box_area(slab: &Slab, quad: &QuadratureSpec) -> Result<f64> {
    if quad.nodes_per_axis < MIN_NODES {
        return Err(Error::Resolution(quad.nodes_per_axis));
    }
    let gl = gauss_legendre(quad.nodes_per_axis)?;
    let half = 0.5 * slab.side;
    let mut area = 0.0;
    for &(a, wa) in &gl {
        for &(b, wb) in &gl {
            let z = DiskPoint::from_xy(slab.center.re + half * a, slab.center.im + half * b)?;
            let lam = hyperbolic_density(z);
            area += wa * wb * half * half * lam * lam;
        }
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlabIntegral {
    pub total: f64,
    pub box_area: f64,
    pub per_area: f64,
}

/// Evaluates `f` at every node in parallel, then sums in node order so the
/// result does not depend on the worker count.
fn integrate<G>(nodes: &[([f64; 3], f64)], f: G) -> Result<f64>
where
    G: Fn([f64; 3]) -> Result<f64> + Sync,
{
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|(c, w)| f(*c).map(|v| v * w))
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum())
}

pub fn slab_volume<F: MetricField + ?Sized>(
    field: &F,
    slab: &Slab,
    quad: &QuadratureSpec,
) -> Result<SlabIntegral> {
    let nodes = slab_nodes(slab, quad)?;
    let total = integrate(&nodes, |c| volume_element(field, c))?;
    let area = box_area(slab, quad)?;
    Ok(SlabIntegral {
        total,
        box_area: area,
        per_area: total / area,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Report {
    /// `√(∫ ‖Ric + 2g‖² dV / area)` over the slab.
    pub per_area: f64,
    /// `per_area` scaled to a surface of area `−2πχ` for the nominal `χ`.
    pub surface: f64,
    pub box_area: f64,
}

pub fn l2_traceless_ricci<F: MetricField + ?Sized>(
    field: &F,
    slab: &Slab,
    quad: &QuadratureSpec,
    steps: &FdSteps,
) -> Result<L2Report> {
    let nodes = slab_nodes(slab, quad)?;
    let sq = integrate(&nodes, |c| {
        let d = curvature_data(field, c, steps)?;
        let t = traceless_norm_from_ricci(&d.ricci, &d.g)?;
        Ok(t * t * d.g.determinant().sqrt())
    })?;
    let area = box_area(slab, quad)?;
    let per_area_sq = sq.max(0.0) / area;
    Ok(L2Report {
        per_area: per_area_sq.sqrt(),
        surface: (per_area_sq * nominal_surface_area()).sqrt(),
        box_area: area,
    })
}
