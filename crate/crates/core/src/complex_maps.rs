//! Univalent maps of the unit disk with closed-form 3-jets, their Schwarzian
//! derivatives and osculating Möbius transformations.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to the unit circle are rejected.
pub const DISK_MARGIN: f64 = 1e-12;

/// Kraus–Nehari bound on the scaled Schwarzian norm of a univalent map.
pub const NEHARI_BOUND: f64 = 1.5;

/// Slack used when checking the Kraus–Nehari inequality numerically.
pub const NEHARI_SLACK: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point of the open unit disk Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.norm().is_finite() && z.norm() < 1.0 - DISK_MARGIN {
            Ok(Self(z))
        } else {
            Err(Error::OutsideDisk(z))
        }
    }

    pub fn from_xy(x: f64, y: f64) -> Result<Self> {
        Self::new(Complex64::new(x, y))
    }

    pub fn origin() -> Self {
        Self(ZERO)
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }

    /// Euclidean distance to the unit circle.
    pub fn boundary_distance(&self) -> f64 {
        1.0 - self.0.norm()
    }
}

impl<'de> Deserialize<'de> for DiskPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let z = Complex64::deserialize(d)?;
        DiskPoint::new(z).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for DiskPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Value and first three complex derivatives of a holomorphic map at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub f0: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
}

impl Jet3 {
    /// `f'''/f' - (3/2) (f''/f')^2`.
    pub fn schwarzian(&self) -> Complex64 {
        let r = self.f2 / self.f1;
        self.f3 / self.f1 - 1.5 * r * r
    }

    /// Jet of `outer ∘ inner`, where `outer` is the jet at `inner.f0`.
    fn compose(outer: &Jet3, inner: &Jet3) -> Jet3 {
        let (g1, g2, g3) = (inner.f1, inner.f2, inner.f3);
        Jet3 {
            f0: outer.f0,
            f1: outer.f1 * g1,
            f2: outer.f2 * g1 * g1 + outer.f1 * g2,
            f3: outer.f3 * g1 * g1 * g1 + 3.0 * outer.f2 * g1 * g2 + outer.f1 * g3,
        }
    }
}

/// Möbius transformation `w ↦ (aw + b)/(cw + d)` normalized to `ad − bc = 1`.
///
/// The remaining sign ambiguity is fixed by giving the first nonzero entry of
/// `(a, b, c, d)` a nonnegative real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMobius")]
pub struct MobiusTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

#[derive(Deserialize)]
struct RawMobius {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<RawMobius> for MobiusTransform {
    type Error = Error;
    fn try_from(r: RawMobius) -> Result<Self> {
        MobiusTransform::new(r.a, r.b, r.c, r.d)
    }
}

impl MobiusTransform {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(det.norm() > 1e-24 * scale * scale) || !det.norm().is_finite() {
            return Err(Error::InvalidMap(format!(
                "Möbius determinant {det} is degenerate"
            )));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
        .sign_normalized())
    }

    pub fn identity() -> Self {
        Self {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    fn sign_normalized(self) -> Self {
        let entries = [self.a, self.b, self.c, self.d];
        let scale = entries.iter().fold(0.0_f64, |m, e| m.max(e.norm()));
        let lead = entries
            .iter()
            .find(|e| e.norm() > 1e-12 * scale)
            .copied()
            .unwrap_or(ONE);
        let tie = 1e-14 * lead.norm();
        let flip = lead.re < -tie || (lead.re.abs() <= tie && lead.im < 0.0);
        if flip {
            Self {
                a: -self.a,
                b: -self.b,
                c: -self.c,
                d: -self.d,
            }
        } else {
            self
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Image of `w`; the pole maps to complex infinity.
    pub fn apply(&self, w: Complex64) -> Complex64 {
        let den = self.c * w + self.d;
        if den == ZERO {
            return Complex64::new(f64::INFINITY, f64::INFINITY);
        }
        (self.a * w + self.b) / den
    }

    /// First three derivatives at `w` (uses `det = 1`).
    pub fn jet(&self, w: Complex64) -> Jet3 {
        let den = self.c * w + self.d;
        let inv = 1.0 / den;
        let inv2 = inv * inv;
        Jet3 {
            f0: (self.a * w + self.b) * inv,
            f1: inv2,
            f2: -2.0 * self.c * inv2 * inv,
            f3: 6.0 * self.c * self.c * inv2 * inv2,
        }
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        self.jet(w).f1
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .sign_normalized()
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .sign_normalized()
    }

    /// Entrywise distance between the normalized representatives, taking the
    /// `±` ambiguity into account.
    pub fn distance(&self, o: &Self) -> f64 {
        let plus = (self.a - o.a).norm()
            + (self.b - o.b).norm()
            + (self.c - o.c).norm()
            + (self.d - o.d).norm();
        let minus = (self.a + o.a).norm()
            + (self.b + o.b).norm()
            + (self.c + o.c).norm()
            + (self.d + o.d).norm();
        plus.min(minus)
    }

    /// True when the map preserves the unit disk, i.e. has the form
    /// `±(α β; β̄ ᾱ)` with `|α| > |β|`.
    pub fn stabilizes_disk(&self) -> bool {
        let tol = 1e-9 * self.a.norm().max(1.0);
        (self.d - self.a.conj()).norm() <= tol
            && (self.c - self.b.conj()).norm() <= tol
            && self.a.norm() > self.b.norm()
    }
}

impl Mul for MobiusTransform {
    type Output = MobiusTransform;
    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

/// A closed-form univalent map of the unit disk.
///
/// Configuration form is `{"kind": ..., ...}` with complex parameters written
/// as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawMap")]
pub enum UnivalentMap {
    Identity,
    /// A Möbius map whose pole lies outside the open disk.
    Mobius(MobiusTransform),
    /// `z / (1 − z)^2`.
    Koebe,
    /// `z + a z^2` with `|a| ≤ 1/2`.
    Quadratic {
        a: Complex64,
    },
    /// `outer ∘ inner` for a disk automorphism `inner`.
    Precomposed {
        inner: MobiusTransform,
        outer: Box<UnivalentMap>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawMap {
    Identity,
    Mobius {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    Koebe,
    Quadratic {
        a: Complex64,
    },
    Precomposed {
        inner: MobiusTransform,
        outer: Box<UnivalentMap>,
    },
}

impl TryFrom<RawMap> for UnivalentMap {
    type Error = Error;
    fn try_from(r: RawMap) -> Result<Self> {
        match r {
            RawMap::Identity => Ok(Self::Identity),
            RawMap::Koebe => Ok(Self::Koebe),
            RawMap::Mobius { a, b, c, d } => Self::mobius(MobiusTransform::new(a, b, c, d)?),
            RawMap::Quadratic { a } => Self::quadratic(a),
            RawMap::Precomposed { inner, outer } => Self::precomposed(inner, *outer),
        }
    }
}

impl UnivalentMap {
    pub fn mobius(m: MobiusTransform) -> Result<Self> {
        // pole at -d/c must not lie in the open disk
        if m.c != ZERO && m.d.norm() < m.c.norm() {
            return Err(Error::InvalidMap(format!(
                "Möbius pole {} lies inside the disk",
                -m.d / m.c
            )));
        }
        Ok(Self::Mobius(m))
    }

    pub fn quadratic(a: Complex64) -> Result<Self> {
        if a.norm() > 0.5 + 1e-15 {
            return Err(Error::InvalidMap(format!(
                "quadratic coefficient |a| = {} exceeds 1/2",
                a.norm()
            )));
        }
        Ok(Self::Quadratic { a })
    }

    pub fn precomposed(inner: MobiusTransform, outer: UnivalentMap) -> Result<Self> {
        if !inner.stabilizes_disk() {
            return Err(Error::InvalidMap(
                "inner map of a precomposition must be a disk automorphism".into(),
            ));
        }
        Ok(Self::Precomposed {
            inner,
            outer: Box::new(outer),
        })
    }

    /// Maps used for catalog-wide checks.
    pub fn catalog() -> Vec<(String, UnivalentMap)> {
        let c = Complex64::new;
        let mob = MobiusTransform::new(c(1.0, 0.5), c(0.2, 0.0), c(0.3, -0.1), c(2.0, 0.0))
            .expect("valid Möbius");
        let rot = MobiusTransform::new(
            Complex64::from_polar(1.0, 0.35),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, -0.35),
        )
        .expect("valid rotation");
        vec![
            ("identity".into(), Self::Identity),
            ("mobius".into(), Self::Mobius(mob)),
            ("koebe".into(), Self::Koebe),
            ("quadratic_half".into(), Self::Quadratic { a: c(0.5, 0.0) }),
            (
                "quadratic_complex".into(),
                Self::Quadratic { a: c(0.3, 0.2) },
            ),
            (
                "koebe_rotated".into(),
                Self::precomposed(rot, Self::Koebe).expect("rotation is an automorphism"),
            ),
            (
                "koebe_shifted".into(),
                Self::precomposed(disk_mobius_to(DiskPoint(c(0.3, 0.1))), Self::Koebe)
                    .expect("hyperbolic element is an automorphism"),
            ),
        ]
    }

    /// True when the Schwarzian vanishes identically.
    pub fn is_mobius(&self) -> bool {
        match self {
            Self::Identity | Self::Mobius(_) => true,
            Self::Quadratic { a } => *a == ZERO,
            Self::Koebe => false,
            Self::Precomposed { outer, .. } => outer.is_mobius(),
        }
    }

    /// True when every parameter is real, so the map commutes with conjugation.
    pub fn has_real_coefficients(&self) -> bool {
        let real = |z: &Complex64| z.im == 0.0;
        match self {
            Self::Identity | Self::Koebe => true,
            Self::Mobius(m) => [m.a, m.b, m.c, m.d].iter().all(real),
            Self::Quadratic { a } => real(a),
            Self::Precomposed { inner, outer } => {
                [inner.a, inner.b, inner.c, inner.d].iter().all(real)
                    && outer.has_real_coefficients()
            }
        }
    }

    /// Value of the map computed directly from its formula, without any
    /// derivative bookkeeping.
    pub fn value(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Identity => z,
            Self::Mobius(m) => m.apply(z),
            Self::Koebe => z / ((1.0 - z) * (1.0 - z)),
            Self::Quadratic { a } => z + a * z * z,
            Self::Precomposed { inner, outer } => outer.value(inner.apply(z)),
        }
    }
}

/// Exact value and first three derivatives of `map` at `z`.
pub fn eval_jet(map: &UnivalentMap, z: DiskPoint) -> Result<Jet3> {
    let w = z.z();
    Ok(match map {
        UnivalentMap::Identity => Jet3 {
            f0: w,
            f1: ONE,
            f2: ZERO,
            f3: ZERO,
        },
        UnivalentMap::Mobius(m) => m.jet(w),
        UnivalentMap::Koebe => {
            let u = 1.0 / (1.0 - w);
            let u2 = u * u;
            let u3 = u2 * u;
            Jet3 {
                f0: w * u2,
                f1: (1.0 + w) * u3,
                f2: (4.0 + 2.0 * w) * u3 * u,
                f3: (18.0 + 6.0 * w) * u3 * u2,
            }
        }
        UnivalentMap::Quadratic { a } => Jet3 {
            f0: w + a * w * w,
            f1: 1.0 + 2.0 * a * w,
            f2: 2.0 * a,
            f3: ZERO,
        },
        UnivalentMap::Precomposed { inner, outer } => {
            let ij = inner.jet(w);
            let oj = eval_jet(outer, DiskPoint::new(ij.f0)?)?;
            Jet3::compose(&oj, &ij)
        }
    })
}

pub fn schwarzian(map: &UnivalentMap, z: DiskPoint) -> Result<Complex64> {
    Ok(eval_jet(map, z)?.schwarzian())
}

/// Default oracle step: `1e-3`, shrunk near the boundary so the stencil keeps
/// a margin of four steps.
pub fn default_fd_step(z: DiskPoint) -> f64 {
    1e-3_f64.min(z.boundary_distance() / 8.0)
}

/// Schwarzian from central differences of the map's values alone.
///
/// Second-order stencils along the real direction; the error is `O(step^2)`.
pub fn schwarzian_fd_oracle(map: &UnivalentMap, z: DiskPoint, step: f64) -> Result<Complex64> {
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::Domain(format!("step {step} outside (0, 1e-2]")));
    }
    if z.boundary_distance() <= 4.0 * step {
        return Err(Error::StencilOutOfDomain(format!(
            "z = {} is within 4 steps of the unit circle",
            z
        )));
    }
    let w = z.z();
    let f = |k: f64| map.value(w + Complex64::new(k * step, 0.0));
    let (fm2, fm1, f0, fp1, fp2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
    let d1 = (fp1 - fm1) / (2.0 * step);
    let d2 = (fp1 - 2.0 * f0 + fm1) / (step * step);
    let d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * step * step * step);
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}

/// Density `λ = 2/(1 − |z|^2)` of the Poincaré metric on Δ.
pub fn hyperbolic_density(z: DiskPoint) -> f64 {
    2.0 / (1.0 - z.z().norm_sqr())
}

/// `‖Sφ(z)‖ = |λ^{-2} Sφ(z)|`.
pub fn scaled_schwarzian_norm(map: &UnivalentMap, z: DiskPoint) -> Result<f64> {
    let lam = hyperbolic_density(z);
    Ok(schwarzian(map, z)?.norm() / (lam * lam))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariReport {
    pub max_norm: f64,
    pub witness: DiskPoint,
    pub pass: bool,
}

/// Largest scaled Schwarzian norm over `samples`, checked against 3/2.
pub fn nehari_check(map: &UnivalentMap, samples: &[DiskPoint]) -> Result<NehariReport> {
    let mut best: Option<(f64, DiskPoint)> = None;
    for &z in samples {
        let v = scaled_schwarzian_norm(map, z)?;
        if best.is_none_or(|(m, _)| v > m) {
            best = Some((v, z));
        }
    }
    let (max_norm, witness) = best.ok_or(Error::EmptySamples)?;
    Ok(NehariReport {
        max_norm,
        witness,
        pass: max_norm <= NEHARI_BOUND + NEHARI_SLACK,
    })
}

/// The Möbius transformation sharing the 2-jet of `map` at `z`.
pub fn osculating_mobius(map: &UnivalentMap, z: DiskPoint) -> Result<MobiusTransform> {
    let j = eval_jet(map, z)?;
    osculating_from_jet(&j, z.z())
}

pub(crate) fn osculating_from_jet(j: &Jet3, z0: Complex64) -> Result<MobiusTransform> {
    if j.f1.norm() < 1e-300 || !j.f1.norm().is_finite() {
        return Err(Error::DegenerateJet(z0));
    }
    // f0 + f1 u / (1 - k u) with u = w - z0 and k = f2 / (2 f1); det = f1
    let k = j.f2 / (2.0 * j.f1);
    let a = j.f1 - j.f0 * k;
    MobiusTransform::new(a, j.f0 - a * z0, -k, 1.0 + k * z0)
}

/// The rotation-free hyperbolic disk automorphism `w ↦ (w + z)/(1 + z̄ w)`
/// carrying 0 to `z`; its derivative at 0 is `1 − |z|^2`.
pub fn disk_mobius_to(z: DiskPoint) -> MobiusTransform {
    let z = z.z();
    let s = (1.0 - z.norm_sqr()).sqrt();
    MobiusTransform {
        a: Complex64::new(1.0 / s, 0.0),
        b: z / s,
        c: z.conj() / s,
        d: Complex64::new(1.0 / s, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::from_xy(re, im).unwrap()
    }

    #[test]
    fn disk_point_rejects_boundary() {
        assert!(DiskPoint::new(c(1.0, 0.0)).is_err());
        assert!(DiskPoint::new(c(1.0 - 1e-13, 0.0)).is_err());
        assert!(DiskPoint::new(c(f64::NAN, 0.0)).is_err());
        assert!(DiskPoint::new(c(0.0, 0.999)).is_ok());
    }

    #[test]
    fn identity_jet() {
        let j = eval_jet(&UnivalentMap::Identity, dp(0.3, 0.0)).unwrap();
        assert_eq!(j.f0, c(0.3, 0.0));
        assert_eq!(j.f1, ONE);
        assert_eq!(j.f2, ZERO);
        assert_eq!(j.f3, ZERO);
    }

    #[test]
    fn koebe_jet_at_origin() {
        // k(z) = Σ n z^n
        let j = eval_jet(&UnivalentMap::Koebe, DiskPoint::origin()).unwrap();
        assert_eq!(
            (j.f0, j.f1, j.f2, j.f3),
            (ZERO, ONE, c(4.0, 0.0), c(18.0, 0.0))
        );
    }

    #[test]
    fn quadratic_jet_at_origin() {
        let map = UnivalentMap::quadratic(c(0.5, 0.0)).unwrap();
        let j = eval_jet(&map, DiskPoint::origin()).unwrap();
        assert_eq!((j.f0, j.f1, j.f2, j.f3), (ZERO, ONE, ONE, ZERO));
    }

    #[test]
    fn koebe_jet_matches_series_away_from_origin() {
        let z = c(0.2, -0.1);
        let mut s = [ZERO; 4];
        for n in 1..400u32 {
            let nf = n as f64;
            s[0] += nf * z.powu(n);
            s[1] += nf * nf * z.powu(n - 1);
            if n >= 2 {
                s[2] += nf * nf * (nf - 1.0) * z.powu(n - 2);
            }
            if n >= 3 {
                s[3] += nf * nf * (nf - 1.0) * (nf - 2.0) * z.powu(n - 3);
            }
        }
        let j = eval_jet(&UnivalentMap::Koebe, DiskPoint::new(z).unwrap()).unwrap();
        for (a, b) in [j.f0, j.f1, j.f2, j.f3].iter().zip(s.iter()) {
            assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
        }
    }

    #[test]
    fn schwarzian_examples() {
        let mob =
            MobiusTransform::new(c(1.0, 0.5), c(0.2, 0.0), c(0.3, -0.1), c(2.0, 0.0)).unwrap();
        let m = UnivalentMap::mobius(mob).unwrap();
        assert!(schwarzian(&m, dp(0.4, -0.3)).unwrap().norm() < 1e-12);

        let s = schwarzian(&UnivalentMap::Koebe, DiskPoint::origin()).unwrap();
        assert!((s - c(-6.0, 0.0)).norm() < 1e-14);

        let a = c(0.3, 0.2);
        let q = UnivalentMap::quadratic(a).unwrap();
        let s = schwarzian(&q, DiskPoint::origin()).unwrap();
        assert!((s + 6.0 * a * a).norm() < 1e-14);
    }

    #[test]
    fn koebe_schwarzian_closed_form() {
        for z in [c(0.1, 0.2), c(-0.5, 0.3), c(0.7, -0.1)] {
            let s = schwarzian(&UnivalentMap::Koebe, DiskPoint::new(z).unwrap()).unwrap();
            let expected = -6.0 / ((1.0 - z * z) * (1.0 - z * z));
            assert!((s - expected).norm() < 1e-12 * expected.norm());
        }
    }

    #[test]
    fn fd_oracle_examples() {
        let mob =
            MobiusTransform::new(c(1.0, 0.5), c(0.2, 0.0), c(0.3, -0.1), c(2.0, 0.0)).unwrap();
        let m = UnivalentMap::mobius(mob).unwrap();
        assert!(schwarzian_fd_oracle(&m, dp(0.2, 0.0), 1e-3).unwrap().norm() < 1e-6);

        let s = schwarzian_fd_oracle(&UnivalentMap::Koebe, DiskPoint::origin(), 1e-3).unwrap();
        assert!((s - c(-6.0, 0.0)).norm() / 6.0 < 1e-4);

        let a = c(0.5, 0.0);
        let z = c(0.1, 0.1);
        let q = UnivalentMap::quadratic(a).unwrap();
        let s = schwarzian_fd_oracle(&q, DiskPoint::new(z).unwrap(), 1e-3).unwrap();
        let expected = -6.0 * a * a / ((1.0 + 2.0 * a * z) * (1.0 + 2.0 * a * z));
        assert!((s - expected).norm() / expected.norm() < 1e-4);
    }

    #[test]
    fn fd_oracle_rejects_bad_stencils() {
        assert!(matches!(
            schwarzian_fd_oracle(&UnivalentMap::Koebe, dp(0.995, 0.0), 2e-3),
            Err(Error::StencilOutOfDomain(_))
        ));
        assert!(schwarzian_fd_oracle(&UnivalentMap::Koebe, dp(0.0, 0.0), 0.1).is_err());
        assert!(schwarzian_fd_oracle(&UnivalentMap::Koebe, dp(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn density_examples() {
        assert_eq!(hyperbolic_density(DiskPoint::origin()), 2.0);
        assert!((hyperbolic_density(dp(0.5, 0.0)) - 8.0 / 3.0).abs() < 1e-15);
        assert!((hyperbolic_density(dp(0.9, 0.0)) - 2.0 / 0.19).abs() < 1e-12);
    }

    #[test]
    fn scaled_norm_examples() {
        let k = scaled_schwarzian_norm(&UnivalentMap::Koebe, DiskPoint::origin()).unwrap();
        assert!((k - 1.5).abs() < 1e-15);
        let q = UnivalentMap::quadratic(c(0.5, 0.0)).unwrap();
        let v = scaled_schwarzian_norm(&q, DiskPoint::origin()).unwrap();
        assert!((v - 0.375).abs() < 1e-15);
        let v = scaled_schwarzian_norm(&UnivalentMap::Identity, dp(0.3, 0.3)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn nehari_examples() {
        let grid: Vec<DiskPoint> = (-4..=4)
            .flat_map(|i| (-4..=4).map(move |j| (i as f64 * 0.2, j as f64 * 0.2)))
            .filter_map(|(x, y)| DiskPoint::from_xy(x, y).ok())
            .collect();
        let r = nehari_check(&UnivalentMap::Koebe, &grid).unwrap();
        assert!(r.pass);
        // ‖S‖ = 3/2 along the whole real diameter, so the witness is a tie
        // broken by rounding; it must lie on that diameter.
        assert!((r.max_norm - 1.5).abs() < 1e-12);
        assert_eq!(r.witness.z().im, 0.0);
        let at_zero = nehari_check(&UnivalentMap::Koebe, &[DiskPoint::origin()]).unwrap();
        assert_eq!(at_zero.max_norm, 1.5);

        let q = UnivalentMap::quadratic(c(0.5, 0.0)).unwrap();
        assert!(nehari_check(&q, &grid).unwrap().pass);
        assert!(matches!(nehari_check(&q, &[]), Err(Error::EmptySamples)));
    }

    #[test]
    fn osculating_examples() {
        let q = UnivalentMap::quadratic(c(0.25, 0.1)).unwrap();
        let m = osculating_mobius(&q, DiskPoint::origin()).unwrap();
        let expected = MobiusTransform::new(ONE, ZERO, c(-0.25, -0.1), ONE).unwrap();
        assert!(m.distance(&expected) < 1e-14);

        let m = osculating_mobius(&UnivalentMap::Koebe, DiskPoint::origin()).unwrap();
        let expected = MobiusTransform::new(ONE, ZERO, c(-2.0, 0.0), ONE).unwrap();
        assert!(m.distance(&expected) < 1e-14);

        let mob =
            MobiusTransform::new(c(1.0, 0.5), c(0.2, 0.0), c(0.3, -0.1), c(2.0, 0.0)).unwrap();
        let m = osculating_mobius(&UnivalentMap::Mobius(mob), dp(0.3, -0.4)).unwrap();
        assert!(m.distance(&mob) < 1e-12);
    }

    #[test]
    fn osculator_reproduces_two_jet() {
        for (_, map) in UnivalentMap::catalog() {
            for z in [dp(0.1, 0.2), dp(-0.4, 0.3), dp(0.6, -0.5)] {
                let j = eval_jet(&map, z).unwrap();
                let m = osculating_mobius(&map, z).unwrap().jet(z.z());
                for (a, b) in [(m.f0, j.f0), (m.f1, j.f1), (m.f2, j.f2)] {
                    assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn degenerate_jet_errors() {
        let j = Jet3 {
            f0: ONE,
            f1: ZERO,
            f2: ONE,
            f3: ZERO,
        };
        assert!(matches!(
            osculating_from_jet(&j, ZERO),
            Err(Error::DegenerateJet(_))
        ));
    }

    #[test]
    fn disk_automorphism_examples() {
        assert!(disk_mobius_to(DiskPoint::origin()).distance(&MobiusTransform::identity()) < 1e-15);
        let r = 0.6;
        let m = disk_mobius_to(dp(r, 0.0));
        assert!((m.apply(ZERO) - c(r, 0.0)).norm() < 1e-15);
        assert!((m.derivative(ZERO) - c(1.0 - r * r, 0.0)).norm() < 1e-15);
        let w = c(0.1, -0.2);
        assert!((m.apply(w) - (w + r) / (1.0 + r * w)).norm() < 1e-15);

        let z = Complex64::from_polar(0.7, 2.1);
        let m = disk_mobius_to(DiskPoint::new(z).unwrap());
        let d = m.derivative(ZERO);
        assert!((d - c(1.0 - 0.49, 0.0)).norm() < 1e-14);
        assert!(m.stabilizes_disk());
        for k in 0..16 {
            let b = Complex64::from_polar(1.0, k as f64 * 0.4);
            assert!((m.apply(b).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_is_deterministic() {
        let m = MobiusTransform::new(c(-2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)).unwrap();
        assert!((m.determinant() - ONE).norm() < 1e-12);
        assert!(m.a.re >= 0.0);
        let n = MobiusTransform::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)).unwrap();
        assert!(n.b.re > 0.0 || (n.b.re == 0.0 && n.b.im > 0.0));
        assert!(MobiusTransform::new(ONE, ONE, ONE, ONE).is_err());
    }

    #[test]
    fn config_round_trip() {
        let map: UnivalentMap =
            serde_json::from_str(r#"{"kind":"quadratic","a":[0.5,0.0]}"#).unwrap();
        assert_eq!(map, UnivalentMap::Quadratic { a: c(0.5, 0.0) });
        let bad = serde_json::from_str::<UnivalentMap>(r#"{"kind":"quadratic","a":[0.6,0.0]}"#);
        assert!(bad.is_err());
        let inside_pole = r#"{"kind":"mobius","a":[1,0],"b":[0,0],"c":[1,0],"d":[0.5,0]}"#;
        assert!(serde_json::from_str::<UnivalentMap>(inside_pole).is_err());
        let not_auto = r#"{"kind":"precomposed","inner":{"a":[2,0],"b":[0,0],"c":[0,0],"d":[1,0]},"outer":{"kind":"koebe"}}"#;
        assert!(serde_json::from_str::<UnivalentMap>(not_auto).is_err());
        for (_, map) in UnivalentMap::catalog() {
            let s = serde_json::to_string(&map).unwrap();
            let back: UnivalentMap = serde_json::from_str(&s).unwrap();
            for z in [c(0.1, 0.2), c(-0.3, 0.4)] {
                assert!((back.value(z) - map.value(z)).norm() < 1e-14, "{s}");
            }
        }
    }
}
