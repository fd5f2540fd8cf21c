//! Decay sweeps over the gluing depth `n`: per-depth curvature and distortion
//! defects of the glued metric, log-linear exponent fits, fitted chain
//! constants, and the CSV / JSON / SVG artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex_maps::UnivalentMap;
use crate::curvature::{
    curvature_sample, l2_traceless_ricci, sample_planes, FdSteps, QuadratureSpec, Slab,
};
use crate::error::{Error, Result};
use crate::gluing::{bilipschitz_bounds, GluedMetricSpec};
use crate::hyperbolic_models::FermiPoint;
use crate::qc::BoundConstants;

/// Column order of the per-depth quantities.
pub const METRICS: [&str; 5] = [
    "sectional_defect",
    "traceless_max",
    "l2_traceless",
    "distortion_excess",
    "jacobian_defect",
];

/// Nominal Euler characteristic used when converting the pointwise
/// traceless constant into the `L²` one.
const EULER_CHARACTERISTIC: f64 = -2.0;

/// Keeps sample points this far from the bump's seams.
const SEAM_MARGIN: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZBox {
    pub center: Complex64,
    pub side: f64,
}

impl Default for ZBox {
    fn default() -> Self {
        Self {
            center: Complex64::new(0.2, 0.0),
            side: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Points per side of the `z`-box.
    pub z_points: usize,
    /// Points across the collar `[n, n + 1]`.
    pub t_points: usize,
    /// Extra seeded points drawn uniformly from the slab.
    pub random_points: usize,
    /// Seeded random planes per point, on top of the coordinate planes.
    pub random_planes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            z_points: 5,
            t_points: 5,
            random_points: 16,
            random_planes: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub map: UnivalentMap,
    pub n_values: Vec<f64>,
    pub z_box: ZBox,
    pub grid: GridSpec,
    pub fd: FdSteps,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub output: OutputPaths,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            map: UnivalentMap::Koebe,
            n_values: (3..=8).map(f64::from).collect(),
            z_box: ZBox::default(),
            grid: GridSpec::default(),
            fd: FdSteps::default(),
            quadrature: QuadratureSpec::default(),
            seed: 7,
            output: OutputPaths::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values is empty".into()));
        }
        if let Some(n) = self
            .n_values
            .iter()
            .find(|n| !(**n >= 1.0) || !n.is_finite())
        {
            return Err(Error::Config(format!(
                "gluing depth {n} must be at least 1"
            )));
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_values must be strictly increasing".into()));
        }
        if self.grid.z_points < 3 || self.grid.t_points < 3 {
            return Err(Error::Config(format!(
                "grid resolution must be at least 3, got {}x{}",
                self.grid.z_points, self.grid.t_points
            )));
        }
        if self.quadrature.nodes_per_axis < crate::curvature::MIN_NODES {
            return Err(Error::Resolution(self.quadrature.nodes_per_axis));
        }
        let half = 0.5 * self.z_box.side;
        let far = self.z_box.center.re.abs().max(self.z_box.center.im.abs()) + half;
        if !(self.z_box.side > 0.0) || far * std::f64::consts::SQRT_2 >= 0.99 {
            return Err(Error::Config(
                "z_box must be a nonempty square well inside the disk".into(),
            ));
        }
        if !(self.fd.first > 0.0 && self.fd.second > 0.0) {
            return Err(Error::Config(
                "finite-difference steps must be positive".into(),
            ));
        }
        Ok(())
    }

    fn slab(&self, n: f64) -> Slab {
        Slab {
            center: self.z_box.center,
            side: self.z_box.side,
            n,
        }
    }

    /// Pointwise sample grid in the collar at depth `n`: a regular grid of
    /// cell centres followed by seeded uniform points.
    pub fn sample_points(&self, n: f64) -> Result<Vec<FermiPoint>> {
        let g = &self.grid;
        let half = 0.5 * self.z_box.side;
        let lin = |k: usize, m: usize| (k as f64 + 0.5) / m as f64;
        let mut pts = Vec::new();
        for i in 0..g.z_points {
            for j in 0..g.z_points {
                for k in 0..g.t_points {
                    pts.push(FermiPoint::from_coords([
                        self.z_box.center.re - half + self.z_box.side * lin(i, g.z_points),
                        self.z_box.center.im - half + self.z_box.side * lin(j, g.z_points),
                        n + lin(k, g.t_points),
                    ])?);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ n.to_bits());
        for _ in 0..g.random_points {
            let x = self.z_box.center.re + rng.random_range(-half..half);
            let y = self.z_box.center.im + rng.random_range(-half..half);
            let t = n + rng.random_range(SEAM_MARGIN..1.0 - SEAM_MARGIN);
            pts.push(FermiPoint::from_coords([x, y, t])?);
        }
        Ok(pts)
    }
}

/// Defects of the glued metric at one depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowValues {
    /// `max |K + 1|` over sampled points and all planes.
    pub sectional_defect: f64,
    /// `max ‖Ric + 2η‖_η` over sampled points.
    pub traceless_max: f64,
    /// Area-normalized `L²` norm of the traceless Ricci tensor over the slab.
    pub l2_traceless: f64,
    /// `max distortion − 1` of the identity `g → η`.
    pub distortion_excess: f64,
    /// `max |Jacobian − 1|`.
    pub jacobian_defect: f64,
}

impl RowValues {
    pub fn get(&self, metric: &str) -> Option<f64> {
        Some(match metric {
            "sectional_defect" => self.sectional_defect,
            "traceless_max" => self.traceless_max,
            "l2_traceless" => self.l2_traceless,
            "distortion_excess" => self.distortion_excess,
            "jacobian_defect" => self.jacobian_defect,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: f64,
    pub values: Option<RowValues>,
    /// Why the row was abandoned, when it was.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySeries {
    pub metric_name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

fn evaluate_row(cfg: &SweepConfig, n: f64) -> Result<RowValues> {
    let spec = GluedMetricSpec::new(cfg.map.clone(), n)?;
    let points = cfg.sample_points(n)?;
    let planes = sample_planes(cfg.grid.random_planes, cfg.seed);
    let samples = points
        .par_iter()
        .map(|p| curvature_sample(&spec, p.coords(), &cfg.fd, &planes))
        .collect::<Result<Vec<_>>>()?;
    let mut sectional_defect = 0.0_f64;
    let mut traceless_max = 0.0_f64;
    for s in &samples {
        let planes_max = s
            .sectional
            .iter()
            .map(|k| (k.k + 1.0).abs())
            .fold(0.0, f64::max);
        sectional_defect = sectional_defect
            .max((s.sectional_min + 1.0).abs())
            .max((s.sectional_max + 1.0).abs())
            .max(planes_max);
        traceless_max = traceless_max.max(s.traceless_norm);
    }
    let l2 = l2_traceless_ricci(&spec, &cfg.slab(n), &cfg.quadrature, &cfg.fd)?;
    let bl = bilipschitz_bounds(&spec, &points)?;
    Ok(RowValues {
        sectional_defect,
        traceless_max,
        l2_traceless: l2.per_area,
        distortion_excess: bl.distortion_excess,
        jacobian_defect: bl.jacobian_defect,
    })
}

/// Evaluates every depth in `cfg.n_values`. Rows run concurrently and come
/// back in config order; a failing row records its error and the rest go on.
pub fn run_decay_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let rows = cfg
        .n_values
        .par_iter()
        .map(|&n| match evaluate_row(cfg, n) {
            Ok(v) => SweepRow {
                n,
                values: Some(v),
                error: None,
            },
            Err(e) => {
                log::warn!("sweep row n = {n} abandoned: {e}");
                SweepRow {
                    n,
                    values: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    Ok(SweepResult { rows })
}

impl SweepResult {
    pub fn series(&self) -> Vec<DecaySeries> {
        METRICS
            .iter()
            .map(|m| DecaySeries {
                metric_name: m.to_string(),
                points: self
                    .rows
                    .iter()
                    .filter_map(|r| r.values.as_ref().and_then(|v| v.get(m)).map(|v| (r.n, v)))
                    .collect(),
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "metric", "value", "error"])
            .map_err(csv_err)?;
        for r in &self.rows {
            for m in METRICS {
                let value = r
                    .values
                    .as_ref()
                    .and_then(|v| v.get(m))
                    .map(|v| format!("{v:e}"))
                    .unwrap_or_default();
                let err = r.error.clone().unwrap_or_default();
                w.write_record([format!("{}", r.n), m.to_string(), value, err])
                    .map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    n: f64,
    metric: String,
    value: Option<f64>,
}

/// Reads series back from a sweep CSV; rows without a value are skipped.
pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<DecaySeries>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut by_metric: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in rd.deserialize::<CsvRow>() {
        let rec = rec.map_err(csv_err)?;
        if let Some(v) = rec.value {
            by_metric.entry(rec.metric).or_default().push((rec.n, v));
        }
    }
    if by_metric.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(by_metric
        .into_iter()
        .map(|(metric_name, points)| DecaySeries {
            metric_name,
            points,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Largest absolute residual on the log scale.
    pub residual_max: f64,
}

/// Least squares of `log value` against `n`.
pub fn fit_exponent(series: &DecaySeries) -> Result<FitResult> {
    let pts = &series.points;
    if pts.len() < 2 {
        return Err(Error::EmptySamples);
    }
    if let Some((index, &(_, value))) = pts.iter().enumerate().find(|(_, p)| !(p.1 > 0.0)) {
        return Err(Error::NonPositive { index, value });
    }
    let m = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = 0.0;
    let mut residual_max = 0.0_f64;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
        residual_max = residual_max.max(r.abs());
        ss_tot += (y - ybar) * (y - ybar);
    }
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(FitResult {
        slope,
        intercept,
        r2,
        residual_max,
    })
}

pub fn series_by_name<'a>(series: &'a [DecaySeries], name: &str) -> Option<&'a DecaySeries> {
    series.iter().find(|s| s.metric_name == name)
}

/// Chain constants read off a sweep: each is the smallest multiple of its
/// decay profile dominating the sampled defects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedConstants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub tian_constant: f64,
    pub n_min: f64,
}

impl FittedConstants {
    pub fn bound_constants(&self) -> BoundConstants {
        BoundConstants {
            a4: self.a4,
            a5: self.a5,
            a6: self.a6,
        }
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("A1".to_string(), self.a1),
            ("A2".to_string(), self.a2),
            ("A3".to_string(), self.a3),
            ("C_tian".to_string(), self.tian_constant),
        ])
    }
}

fn scaled_max(s: &DecaySeries, rate: f64) -> f64 {
    s.points
        .iter()
        .map(|(n, v)| v * (rate * n).exp())
        .fold(0.0, f64::max)
}

pub fn fit_constants(series: &[DecaySeries], tian_constant: f64) -> Result<FittedConstants> {
    let need = |name: &str| {
        series_by_name(series, name)
            .filter(|s| !s.points.is_empty())
            .ok_or_else(|| Error::Config(format!("sweep has no '{name}' series")))
    };
    let traceless = need("traceless_max")?;
    let sectional = need("sectional_defect")?;
    let a1 = scaled_max(traceless, 2.0);
    let a2 = a1.max(scaled_max(sectional, 2.0));
    let a3 = (-18.0 * std::f64::consts::PI * a1 * EULER_CHARACTERISTIC)
        .max(a2)
        .max(1.0);
    let a4 = tian_constant * a3;
    let n_min = traceless
        .points
        .iter()
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min);
    let a5 = a4.max(9.0 * (-n_min).exp());
    let a6 = a5.max(1.0);
    Ok(FittedConstants {
        a1,
        a2,
        a3,
        a4,
        a5,
        a6,
        tian_constant,
        n_min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    pub metric: String,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub map: UnivalentMap,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SeriesFit>,
}

pub fn summarize(cfg: &SweepConfig, res: &SweepResult) -> SweepSummary {
    let fits = res
        .series()
        .iter()
        .map(|s| match fit_exponent(s) {
            Ok(f) => SeriesFit {
                metric: s.metric_name.clone(),
                fit: Some(f),
                error: None,
            },
            Err(e) => SeriesFit {
                metric: s.metric_name.clone(),
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    SweepSummary {
        map: cfg.map.clone(),
        seed: cfg.seed,
        rows: res.rows.clone(),
        fits,
    }
}

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Log-linear plot of every series with its fitted line.
pub fn render_svg(series: &[DecaySeries]) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| {
            s.points
                .iter()
                .filter(|p| p.1 > 0.0)
                .map(|p| (p.0, p.1.log10()))
        })
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| {
        (a.0.min(p.0), a.1.max(p.0))
    });
    let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| {
        (a.0.min(p.1), a.1.max(p.1))
    });
    let (y0, y1) = (y0.floor(), y1.ceil());
    let xs = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
    let ys = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
    let _ = writeln!(
        svg,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    for dec in (y0 as i64)..=(y1 as i64) {
        let y = ys(dec as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">1e{dec}</text>"#,
            pad - 4.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">n</text>"#,
        w / 2.0,
        h - 12.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &(n, v) in s.points.iter().filter(|p| p.1 > 0.0) {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                xs(n),
                ys(v.log10())
            );
        }
        if let Ok(f) = fit_exponent(s) {
            let l = |n: f64| (f.intercept + f.slope * n) / std::f64::consts::LN_10;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                xs(x0),
                ys(l(x0)),
                xs(x1),
                ys(l(x1))
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="11" fill="{color}">{} (slope {:.3})</text>"#,
                w - 2.0 * pad - 150.0,
                pad + 14.0 * i as f64,
                s.metric_name,
                f.slope
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes whichever artifacts the config names.
pub fn write_outputs(cfg: &SweepConfig, res: &SweepResult) -> Result<()> {
    let write = |path: &PathBuf, body: &str| -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(body.as_bytes())?;
        Ok(())
    };
    if let Some(p) = &cfg.output.csv {
        write(p, &res.to_csv()?)?;
    }
    if let Some(p) = &cfg.output.json {
        let body = serde_json::to_string_pretty(&summarize(cfg, res))?;
        write(p, &body)?;
    }
    if let Some(p) = &cfg.output.svg {
        write(p, &render_svg(&res.series()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(c: f64, k: f64, ns: &[f64]) -> DecaySeries {
        DecaySeries {
            metric_name: "synthetic".into(),
            points: ns.iter().map(|&n| (n, c * (k * n).exp())).collect(),
        }
    }

    #[test]
    fn fit_recovers_exponent() {
        let f = fit_exponent(&synthetic(5.0, -2.0, &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0])).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-10 && (f.intercept - 5f64.ln()).abs() < 1e-9);
        assert_eq!(f.r2, 1.0);
        let two = fit_exponent(&synthetic(0.3, 1.7, &[1.0, 2.5])).unwrap();
        assert!((two.slope - 1.7).abs() < 1e-12 && two.r2 == 1.0);
    }

    #[test]
    fn fit_rejects_nonpositive() {
        let mut s = synthetic(1.0, -1.0, &[1.0, 2.0, 3.0]);
        s.points[1].1 = 0.0;
        assert!(matches!(
            fit_exponent(&s),
            Err(Error::NonPositive { index: 1, .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        let bad = SweepConfig::from_json(r#"{"n_values":[3,3,4]}"#);
        assert!(matches!(bad, Err(Error::Config(_))));
        assert!(SweepConfig::from_json(r#"{"n_values":[0.5]}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"grid":{"z_points":2}}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"bogus":1}"#).is_err());
        let ok = SweepConfig::from_json(
            r#"{"map":{"kind":"quadratic","a":[0.5,0.0]},"n_values":[2,3,4],
                "quadrature":{"nodes_per_axis":4,"kind":"gauss-legendre"}}"#,
        )
        .unwrap();
        assert_eq!(ok.n_values, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn mobius_sweep_is_flat() {
        let cfg = SweepConfig {
            map: UnivalentMap::Identity,
            n_values: vec![3.0, 4.0],
            grid: GridSpec {
                z_points: 3,
                t_points: 3,
                random_points: 2,
                random_planes: 1,
            },
            quadrature: QuadratureSpec {
                nodes_per_axis: 4,
                ..Default::default()
            },
            ..Default::default()
        };
        let res = run_decay_sweep(&cfg).unwrap();
        for r in &res.rows {
            let v = r.values.unwrap();
            for m in METRICS {
                assert!(v.get(m).unwrap() < 1e-6, "{m} at n = {}", r.n);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let res = SweepResult {
            rows: vec![
                SweepRow {
                    n: 3.0,
                    values: Some(RowValues {
                        sectional_defect: 1e-3,
                        traceless_max: 2e-3,
                        l2_traceless: 3e-2,
                        distortion_excess: 4e-4,
                        jacobian_defect: 5e-7,
                    }),
                    error: None,
                },
                SweepRow {
                    n: 4.0,
                    values: None,
                    error: Some("stencil, out of domain".into()),
                },
            ],
        };
        let text = res.to_csv().unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * METRICS.len());
        let back = read_sweep_csv(text.as_bytes()).unwrap();
        let l2 = series_by_name(&back, "l2_traceless").unwrap();
        assert_eq!(l2.points, vec![(3.0, 3e-2)]);
    }

    #[test]
    fn constants_from_series() {
        let ns = [3.0, 4.0, 5.0];
        let mut tr = synthetic(2.0, -2.0, &ns);
        tr.metric_name = "traceless_max".into();
        let mut se = synthetic(3.0, -2.0, &ns);
        se.metric_name = "sectional_defect".into();
        let c = fit_constants(&[tr, se], 1.0).unwrap();
        assert!((c.a1 - 2.0).abs() < 1e-12 && (c.a2 - 3.0).abs() < 1e-12);
        assert!((c.a3 - 72.0 * std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(c.a4, c.a3);
        assert!(c.a5 >= c.a4 && c.a5 >= 9.0 * (-3.0f64).exp() && c.a6 >= c.a5);
    }

    #[test]
    fn svg_has_points_and_lines() {
        let s = synthetic(1.0, -2.0, &[3.0, 4.0, 5.0]);
        let svg = render_svg(&[s]);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn sample_points_are_seeded() {
        let cfg = SweepConfig::default();
        let a = cfg.sample_points(4.0).unwrap();
        assert_eq!(a, cfg.sample_points(4.0).unwrap());
        let other = SweepConfig {
            seed: cfg.seed + 1,
            ..cfg.clone()
        };
        assert_ne!(a, other.sample_points(4.0).unwrap());
        assert!(a.iter().all(|p| p.t > 4.0 && p.t < 5.0));
    }
}
