//! Verification suites, data exports and their serialized forms.
//!
//! Every suite is a pure function of a [`RunConfig`]. Samples are drawn from
//! per-index streams and reduced in index order, so the serialized output
//! depends only on the configuration, not on the worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finsler::{einstein_scan, sample_base_point, EinsteinScan, FinslerMetric, SamplerConfig};
use crate::flow::{self, BlockRotation};
use crate::geodesic::{conservation_report, integrate, ConservationReport, GeodesicTrace};
use crate::linalg::{self, Vec4, DIM};
use crate::navigation::{
    domain_report, f_bound, randers_components, randers_data, solve_implicit_F, wind, wind_norm_sq,
    wind_norm_sq_direct, NavigationParams, RandersPointData, WindField,
};
use crate::riemann::{
    antisymmetry_residual, bianchi_residual, curvature, decomposition_check, homothety_constant_fit,
    killing_residual, metric_compatibility_residual, metric_matrix, metric_via_oneform, sectional_curvature,
    MetricSpec,
};
use crate::sampling::{purpose, SampleStream};

/// Default tolerances by check name.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("antisymmetry", 1e-14),
    ("b_norm", 1e-12),
    ("bianchi", 1e-9),
    ("bound_chain", 1e-12),
    ("constant_case", 1e-7),
    ("constant_flag", 1e-3),
    ("cross_construction", 1e-13),
    ("decomposition", 1e-14),
    ("einstein", 1e-6),
    ("equivariance", 1e-12),
    ("flag_spread", 1e-3),
    ("generator", 1e-9),
    ("geodesic_drift", 1e-6),
    ("group_law", 1e-13),
    ("homothety", 1e-9),
    ("implicit_root", 1e-12),
    ("isometry", 1e-12),
    ("killing", 1e-9),
    ("metric_compatibility", 1e-10),
    ("norm_preservation", 1e-13),
    ("orthogonality", 1e-14),
    ("periodicity", 1e-12),
    ("ricci", 1e-7),
    ("wind_norm", 1e-12),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub a: f64,
    pub m: f64,
    pub n: f64,
    pub seed: u64,
    pub samples: usize,
    pub radius: f64,
    /// Replace `W_{m,n}` by the zero field.
    pub zero_wind: bool,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            m: 0.5,
            n: 0.5,
            seed: 42,
            samples: 200,
            radius: 2.0,
            zero_wind: false,
            tolerances: DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("invalid value for {key}: {value:?}")))
}

impl RunConfig {
    /// Set one `key = value` entry, as found in a config file or on the
    /// command line. Tolerances use the key `tol.<name>`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "a" => self.a = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "samples" => {
                let s: i64 = parse(key, value)?;
                if s < 1 {
                    return Err(Error::Usage(format!("samples must be >= 1, got {s}")));
                }
                self.samples = s as usize;
            }
            "radius" => self.radius = parse(key, value)?,
            "zero_wind" | "zero-wind" => self.zero_wind = parse(key, value)?,
            _ => match key.strip_prefix("tol.") {
                Some(name) if self.tolerances.contains_key(name) => {
                    let v = parse(key, value)?;
                    self.tolerances.insert(name.to_string(), v);
                }
                Some(name) => return Err(Error::Usage(format!("unknown tolerance {name:?}"))),
                None => return Err(Error::Usage(format!("unknown configuration key {key:?}"))),
            },
        }
        Ok(())
    }

    /// Apply a plain-text `key = value` file; blank lines and `#` comments
    /// are ignored.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |msg: String| Err(Error::Usage(msg));
        if !(self.a.is_finite() && self.a >= 0.0) {
            return usage(format!("a must be finite and >= 0, got {}", self.a));
        }
        for (name, v) in [("m", self.m), ("n", self.n)] {
            if !(v.is_finite() && v > 0.0) {
                return usage(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.samples < 1 {
            return usage("samples must be >= 1".into());
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return usage(format!("radius must be finite and > 0, got {}", self.radius));
        }
        for (name, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return usage(format!("tolerance {name} must be finite and > 0, got {v}"));
            }
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn params(&self) -> NavigationParams {
        NavigationParams {
            a: self.a,
            m: self.m,
            n: self.n,
        }
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::TaubNut { a: self.a }
    }

    pub fn wind(&self) -> WindField {
        if self.zero_wind {
            WindField::Zero
        } else {
            self.params().wind_field()
        }
    }

    pub fn handle(&self) -> FinslerMetric {
        FinslerMetric::new(self.metric(), self.wind())
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig::new(self.samples, self.radius, self.seed)
    }

    fn stream(&self, purpose: u32, index: usize) -> SampleStream {
        SampleStream::new(self.seed, purpose, index as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when `residual < tolerance`.
    Below,
    /// Passes when `residual > tolerance`.
    Above,
    /// Reported only.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub residual: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Below,
            residual,
            tolerance: Some(tolerance),
            pass: residual < tolerance,
        }
    }

    pub fn above(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Above,
            residual,
            tolerance: Some(tolerance),
            pass: residual > tolerance,
        }
    }

    pub fn info(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Info,
            residual: value,
            tolerance: None,
            pass: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Excluded from serialized output so reports stay byte-reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl VerificationReport {
    fn new(suite: &str, config: &RunConfig, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.into(),
            config: config.clone(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            wall_time: Duration::ZERO,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,check,kind,residual,tolerance,pass\n");
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Below => "below",
                CheckKind::Above => "above",
                CheckKind::Info => "info",
            };
            let tol = c.tolerance.map(csv_num).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{}", self.suite, c.name, kind, csv_num(c.residual), tol, c.pass);
        }
        out
    }
}

/// 17 significant digits.
pub fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn timed<F: FnOnce() -> Result<VerificationReport>>(f: F) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let mut report = f()?;
    report.wall_time = start.elapsed();
    Ok(report)
}

fn par_samples<T, F>(cfg: &RunConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..cfg.samples).into_par_iter().map(f).collect()
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Metric construction, the `B·I − A·H` decomposition, curvature identities
/// and Ricci-flatness.
pub fn verify_riemann(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    timed(|| {
        let spec = cfg.metric();
        struct Row {
            cross: f64,
            decomposition: f64,
            compat: f64,
            bianchi: f64,
            antisym: f64,
            ricci: f64,
            sectional: Option<f64>,
        }
        let rows = par_samples(cfg, |i| {
            let x = cfg.stream(purpose::METRIC, i).ball(cfg.radius);
            let mut s = cfg.stream(purpose::CURVATURE, i);
            let xc = s.ball(cfg.radius);
            let (u, v) = (s.unit_vector(), s.unit_vector());
            let curv = curvature(&spec, &xc)?;
            Ok(Row {
                cross: linalg::max_abs_diff(&metric_matrix(&spec, &x).0, &metric_via_oneform(cfg.a, &x).0),
                decomposition: decomposition_check(&spec, &x),
                compat: metric_compatibility_residual(&spec, &xc)?,
                bianchi: bianchi_residual(&curv),
                antisym: antisymmetry_residual(&curv),
                ricci: linalg::max_abs(&curv.ricci),
                sectional: match sectional_curvature(&spec, &xc, &u, &v) {
                    Ok(k) => Some(k),
                    Err(Error::DegenerateFlag { .. }) => None,
                    Err(e) => return Err(e),
                },
            })
        })?;
        let (mut kmin, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in rows.iter().filter_map(|r| r.sectional) {
            kmin = kmin.min(k);
            kmax = kmax.max(k);
        }
        let checks = vec![
            Check::below("cross_construction", max_of(rows.iter().map(|r| r.cross)), cfg.tol("cross_construction")),
            Check::below("decomposition", max_of(rows.iter().map(|r| r.decomposition)), cfg.tol("decomposition")),
            Check::below(
                "metric_compatibility",
                max_of(rows.iter().map(|r| r.compat)),
                cfg.tol("metric_compatibility"),
            ),
            Check::below("bianchi", max_of(rows.iter().map(|r| r.bianchi)), cfg.tol("bianchi")),
            Check::below("antisymmetry", max_of(rows.iter().map(|r| r.antisym)), cfg.tol("antisymmetry")),
            Check::below("ricci", max_of(rows.iter().map(|r| r.ricci)), cfg.tol("ricci")),
            Check::info("sectional_min", kmin),
            Check::info("sectional_max", kmax),
        ];
        Ok(VerificationReport::new("verify-riemann", cfg, checks))
    })
}

/// `W_{i|j} + W_{j|i}` and the fitted homothety constant.
pub fn verify_killing(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    timed(|| {
        let spec = cfg.metric();
        let field = cfg.wind();
        let rows = par_samples(cfg, |i| {
            let x = cfg.stream(purpose::KILLING, i).ball(cfg.radius);
            let res = killing_residual(&spec, &x, &field)?;
            let (c, dev) = homothety_constant_fit(&res, &metric_matrix(&spec, &x).0);
            Ok((linalg::max_abs(&res), c, dev))
        })?;
        let checks = vec![
            Check::below("killing", max_of(rows.iter().map(|r| r.0)), cfg.tol("killing")),
            Check::below("homothety", max_of(rows.iter().map(|r| r.1.abs())), cfg.tol("homothety")),
            Check::info("homothety_deviation", max_of(rows.iter().map(|r| r.2))),
        ];
        Ok(VerificationReport::new("verify-killing", cfg, checks))
    })
}

/// The flow `φ_θ`: rotation structure, isometry, block equivariance, group
/// law and generator.
pub fn verify_isometry(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    timed(|| {
        let (a, m, n) = (cfg.a, cfg.m, cfg.n);
        let pi = std::f64::consts::PI;
        let params = cfg.params();
        let rows = par_samples(cfg, |i| {
            let mut s = cfg.stream(purpose::ISOMETRY, i);
            let x = s.ball(cfg.radius);
            let (t1, t2) = (s.range(-pi, pi), s.range(-pi, pi));
            let r: BlockRotation = flow::rotation(m, n, t1)?;
            let g = flow::generator(m, n, &x)?;
            let w = wind(&params, &x);
            Ok([
                r.orthogonality_residual().max((r.determinant() - 1.0).abs()).max(r.off_block_max()),
                flow::isometry_residual(a, m, n, t1, &x)?,
                flow::h_equivariance_residual(m, n, t1, &x)?,
                flow::norm_residual(m, n, t1, &x)?,
                flow::group_law_residual(m, n, t1, t2, &x)?,
                max_of((0..DIM).map(|k| (g[k] - w[k]).abs())),
            ])
        })?;
        let col = |k: usize| max_of(rows.iter().map(|r| r[k]));
        let (pm, pn) = flow::periodicity_residual(m, n)?;
        let checks = vec![
            Check::below("orthogonality", col(0), cfg.tol("orthogonality")),
            Check::below("isometry", col(1), cfg.tol("isometry")),
            Check::below("equivariance", col(2), cfg.tol("equivariance")),
            Check::below("norm_preservation", col(3), cfg.tol("norm_preservation")),
            Check::below("group_law", col(4), cfg.tol("group_law")),
            Check::below("generator", col(5), cfg.tol("generator")),
            Check::below("periodicity", pm.max(pn), cfg.tol("periodicity")),
        ];
        Ok(VerificationReport::new("verify-isometry", cfg, checks))
    })
}

/// Navigation identities at in-domain samples. Returns the maxima of the
/// `|W|²` closed-form error, the implicit-root error and the `‖b‖_α` error.
fn navigation_identities(cfg: &RunConfig, handle: &FinslerMetric) -> Result<[f64; 3]> {
    let params = cfg.params();
    let sampler = cfg.sampler();
    let rows = par_samples(cfg, |i| {
        let mut s = cfg.stream(purpose::NAVIGATION, i);
        let x = sample_base_point(handle, &sampler, &mut s)?;
        let y = s.unit_vector();
        let data = randers_data(&params, &x)?;
        let f = solve_implicit_F(&params, &x, &y)?;
        let w = wind_norm_sq(&params, &x);
        Ok([
            (w - wind_norm_sq_direct(&params, &x)).abs(),
            (f - data.finsler(&y)).abs() / f.max(1.0),
            (data.b_norm()? - w.sqrt()).abs(),
        ])
    })?;
    Ok(std::array::from_fn(|k| max_of(rows.iter().map(|r| r[k]))))
}

/// Statistics of `f(x)` against `|W|²` on the unit sphere and in the ball.
fn domain_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let params = cfg.params();
    let rows: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut s = cfg.stream(purpose::DOMAIN, i);
            let on_sphere = domain_report(&params, &s.unit_vector());
            let inside = domain_report(&params, &s.ball(cfg.radius));
            (on_sphere, inside)
        })
        .collect();
    let sphere_violations = rows.iter().filter(|r| !r.0.in_domain_exact).count();
    let disagreements = rows
        .iter()
        .filter(|r| r.0.in_domain_sufficient && !r.0.in_domain_exact)
        .count();
    checks.push(Check::info("unit_sphere_exact_violations", sphere_violations as f64));
    checks.push(Check::info("unit_sphere_bound_below_one_but_outside", disagreements as f64));
    checks.push(Check::info(
        "unit_sphere_max_wind_norm_sq",
        max_of(rows.iter().map(|r| r.0.wind_norm_sq)),
    ));
    checks.push(Check::info(
        "unit_sphere_min_bound",
        rows.iter().map(|r| r.0.f_value).fold(f64::INFINITY, f64::min),
    ));
    if cfg.m <= 1.0 && cfg.n <= 1.0 {
        let excess = rows
            .iter()
            .flat_map(|r| [r.0.wind_norm_sq - r.0.f_value, r.1.wind_norm_sq - r.1.f_value])
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        checks.push(Check::below("bound_chain", excess, cfg.tol("bound_chain")));
    } else {
        checks.push(Check::info("bound_chain_not_applicable", 1.0));
    }
}

fn scan_checks(cfg: &RunConfig, scan: &EinsteinScan, checks: &mut Vec<Check>) {
    checks.push(Check::below("einstein", scan.max_einstein_residual, cfg.tol("einstein")));
    checks.push(Check::info("pole_residual", scan.max_pole_residual));
    checks.push(Check::info("flag_min", scan.flag_min));
    checks.push(Check::info("flag_max", scan.flag_max));
    if cfg.a == 0.0 {
        let k_abs = scan.flag_max.abs().max(scan.flag_min.abs());
        let cf_abs = max_of(scan.samples.iter().map(|s| s.constant_flag_residual));
        checks.push(Check::info("constant_case", 1.0));
        checks.push(Check::below("constant_case_flag_curvature", k_abs, cfg.tol("constant_case")));
        checks.push(Check::below("constant_case_flag_residual", cf_abs, cfg.tol("constant_case")));
        checks.push(Check::info("flag_spread", scan.flag_spread));
    } else {
        checks.push(Check::above("flag_spread", scan.flag_spread, cfg.tol("flag_spread")));
        checks.push(Check::above(
            "constant_flag",
            scan.max_constant_flag_residual,
            cfg.tol("constant_flag"),
        ));
    }
}

/// Domain predicates, Randers-data identities, the Einstein scan and the
/// flag-curvature non-constancy test.
pub fn verify_finsler(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    timed(|| {
        let handle = cfg.handle();
        let mut checks = Vec::new();
        if !cfg.zero_wind {
            domain_checks(cfg, &mut checks);
            let [w, f, b] = navigation_identities(cfg, &handle)?;
            checks.push(Check::below("wind_norm", w, cfg.tol("wind_norm")));
            checks.push(Check::below("implicit_root", f, cfg.tol("implicit_root")));
            checks.push(Check::below("b_norm", b, cfg.tol("b_norm")));
        }
        let scan = einstein_scan(&handle, &cfg.sampler())?;
        scan_checks(cfg, &scan, &mut checks);
        Ok(VerificationReport::new("verify-finsler", cfg, checks))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagRow {
    pub x: Vec4,
    pub y: Vec4,
    pub v: Vec4,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagTable {
    pub config: RunConfig,
    pub rows: Vec<FlagRow>,
}

impl FlagTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,x3,x4,y1,y2,y3,y4,v1,v2,v3,v4,k\n");
        for r in &self.rows {
            let cells: Vec<String> = r.x.iter().chain(&r.y).chain(&r.v).chain([&r.k]).map(|&v| csv_num(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn sample_flags(cfg: &RunConfig) -> Result<FlagTable> {
    cfg.validate()?;
    let scan = einstein_scan(&cfg.handle(), &cfg.sampler())?;
    Ok(FlagTable {
        config: cfg.clone(),
        rows: scan
            .samples
            .into_iter()
            .map(|s| FlagRow {
                x: s.x,
                y: s.y,
                v: s.v,
                k: s.flag_curvature,
            })
            .collect(),
    })
}

/// A cubic grid `[-extent, extent]⁴` with `points` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub extent: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 1 {
            return Err(Error::Usage("grid needs at least one point per axis".into()));
        }
        if !(self.extent.is_finite() && self.extent >= 0.0) {
            return Err(Error::Usage(format!("grid extent must be finite and >= 0, got {}", self.extent)));
        }
        Ok(())
    }

    fn coordinate(&self, k: usize) -> f64 {
        if self.points == 1 {
            0.0
        } else {
            -self.extent + 2.0 * self.extent * k as f64 / (self.points - 1) as f64
        }
    }

    pub fn nodes(&self) -> Vec<Vec4> {
        let p = self.points;
        (0..p.pow(4))
            .map(|mut idx| {
                let mut x = [0.0; DIM];
                for c in (0..DIM).rev() {
                    x[c] = self.coordinate(idx % p);
                    idx /= p;
                }
                x
            })
            .collect()
    }
}

/// Randers data at one grid node; `None` fields mark nodes outside the
/// exact domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandersRow {
    pub x: Vec4,
    pub in_domain: bool,
    /// Upper triangle of `a_ij`, row by row.
    pub a: Option<[f64; 10]>,
    pub b: Option<Vec4>,
    pub lambda: Option<f64>,
    pub f_bound: f64,
    pub wind_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandersTable {
    pub config: RunConfig,
    pub grid: GridSpec,
    pub rows: Vec<RandersRow>,
}

const UPPER: [(usize, usize); 10] = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

impl RandersTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,x3,x4,in_domain");
        for (i, j) in UPPER {
            let _ = write!(out, ",a{}{}", i + 1, j + 1);
        }
        out.push_str(",b1,b2,b3,b4,lambda,f_bound,wind_norm_sq\n");
        for r in &self.rows {
            let mut cells: Vec<String> = r.x.iter().map(|&v| csv_num(v)).collect();
            cells.push(r.in_domain.to_string());
            let opt = |v: Option<f64>| v.map(csv_num).unwrap_or_default();
            cells.extend((0..10).map(|k| opt(r.a.map(|a| a[k]))));
            cells.extend((0..DIM).map(|k| opt(r.b.map(|b| b[k]))));
            cells.push(opt(r.lambda));
            cells.push(csv_num(r.f_bound));
            cells.push(csv_num(r.wind_norm_sq));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn export_randers(cfg: &RunConfig, grid: &GridSpec) -> Result<RandersTable> {
    cfg.validate()?;
    grid.validate()?;
    let (metric, wind_field) = (cfg.metric(), cfg.wind());
    let params = cfg.params();
    let rows = grid
        .nodes()
        .into_par_iter()
        .map(|x| {
            let wind_norm_sq = wind_field.norm_sq(&metric, &x);
            let f = if cfg.zero_wind { 0.0 } else { f_bound(&params, &x) };
            let data = match randers_components(&metric, &wind_field, &x) {
                Ok((a, b, lambda)) => Some(RandersPointData { a, b, lambda }),
                Err(Error::OutsideDomain { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(RandersRow {
                x,
                in_domain: data.is_some(),
                a: data.as_ref().map(|d| UPPER.map(|(i, j)| d.a[i][j])),
                b: data.as_ref().map(|d| d.b),
                lambda: data.as_ref().map(|d| d.lambda),
                f_bound: f,
                wind_norm_sq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandersTable {
        config: cfg.clone(),
        grid: *grid,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicRun {
    pub config: RunConfig,
    pub trace: GeodesicTrace,
    pub conservation: ConservationReport,
    pub check: Check,
}

impl GeodesicRun {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,x3,x4,v1,v2,v3,v4,finsler,drift\n");
        let f0 = self.trace.samples.first().map(|s| s.finsler).unwrap_or(0.0);
        for s in &self.trace.samples {
            let cells: Vec<String> = [s.t]
                .iter()
                .chain(&s.x)
                .chain(&s.v)
                .chain([&s.finsler, &(s.finsler - f0)])
                .map(|&v| csv_num(v))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn run_geodesic(cfg: &RunConfig, x0: &Vec4, v0: &Vec4, t_end: f64, steps: usize) -> Result<GeodesicRun> {
    cfg.validate()?;
    let trace = integrate(&cfg.handle(), x0, v0, t_end, steps)?;
    let conservation = conservation_report(&trace)?;
    let check = Check::below("geodesic_drift", conservation.relative, cfg.tol("geodesic_drift"));
    Ok(GeodesicRun {
        config: cfg.clone(),
        trace,
        conservation,
        check,
    })
}
