//! Randers metrics `F = α + β` from navigation data, and their curvature.
//!
//! With `L = F²` seeded as an 8-variable jet in `(x, y)`:
//!
//! ```text
//! g_ij(x, y) = ½ L_{y^i y^j}
//! G^i        = ¼ g^{il} (L_{x^k y^l} y^k − L_{x^l})
//! R^i_k      = 2 ∂G^i/∂x^k − y^j ∂²G^i/∂x^j∂y^k + 2 G^j ∂²G^i/∂y^j∂y^k
//!              − ∂G^i/∂y^j ∂G^j/∂y^k
//! ```
//!
//! The spray is solved directly on jets. An order-4 `L` therefore yields
//! `G^i` as order-2 jets, and every derivative of `G` in `R^i_k` is a
//! coefficient lookup.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{JetConfig, JetScalar};
use crate::linalg::{self, Mat4, Vec4, DIM};
use crate::navigation::{randers_components, NavigationParams, WindField};
use crate::riemann::MetricSpec;
use crate::sampling::{purpose, SampleStream};
use crate::scalar::Scalar;

/// Gram determinants of `(y, V)` in `g_y` below this reject the flag.
pub const DEGENERATE_FLAG: f64 = 1e-12;

/// A Randers metric given by navigation data `(g, W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinslerMetric {
    pub metric: MetricSpec,
    pub wind: WindField,
}

impl FinslerMetric {
    pub fn new(metric: MetricSpec, wind: WindField) -> Self {
        Self { metric, wind }
    }

    pub fn navigation(params: &NavigationParams) -> Self {
        Self::new(params.metric(), params.wind_field())
    }

    /// The underlying Riemannian metric, viewed as a Finsler metric.
    pub fn riemannian(metric: MetricSpec) -> Self {
        Self::new(metric, WindField::Zero)
    }

    /// Short human-readable identifier, e.g. `taub_nut(a=1)+rotation(m=0.5,n=0.5)`.
    pub fn label(&self) -> String {
        let metric = match self.metric {
            MetricSpec::Flat => "flat".to_string(),
            MetricSpec::TaubNut { a } => format!("taub_nut(a={a})"),
        };
        match self.wind {
            WindField::Zero => metric,
            WindField::Rotation { m, n } => format!("{metric}+rotation(m={m},n={n})"),
        }
    }

    pub fn wind_norm_sq(&self, x: &Vec4) -> f64 {
        self.wind.norm_sq(&self.metric, x)
    }

    /// `F = sqrt(a_ij y^i y^j) + b_i y^i` on any scalar type.
    pub fn eval<T: Scalar>(&self, x: &[T; DIM], y: &[T; DIM]) -> Result<T> {
        let (a, b, _) = randers_components(&self.metric, &self.wind, x)?;
        let mut alpha_sq = y[0].lift(0.0);
        let mut beta = y[0].lift(0.0);
        for i in 0..DIM {
            let mut row = a[i][0].clone() * y[0].clone();
            for j in 1..DIM {
                row = row + a[i][j].clone() * y[j].clone();
            }
            alpha_sq = alpha_sq + row * y[i].clone();
            beta = beta + b[i].clone() * y[i].clone();
        }
        Ok(alpha_sq.try_sqrt()? + beta)
    }

    /// `L = F²` as an 8-variable jet in `(x¹..x⁴, y¹..y⁴)`.
    fn lagrangian_jet(&self, x: &Vec4, y: &Vec4, order: usize) -> Result<JetScalar> {
        check_direction(y)?;
        let cfg = JetConfig::new(2 * DIM, order)?;
        let point: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        let seeds = JetScalar::seed(&point, cfg)?;
        let xs: [JetScalar; DIM] = std::array::from_fn(|i| seeds[i].clone());
        let ys: [JetScalar; DIM] = std::array::from_fn(|i| seeds[DIM + i].clone());
        Ok(self.eval(&xs, &ys)?.square())
    }
}

fn check_direction(y: &Vec4) -> Result<()> {
    if y.iter().all(|&c| c == 0.0) {
        Err(Error::Domain("direction y must be non-zero".into()))
    } else {
        Ok(())
    }
}

fn yvar(i: usize) -> usize {
    DIM + i
}

/// `G^i` from a jet of `L`, as jets two orders lower.
fn spray_jets(l: &JetScalar, y: &Vec4) -> Result<[JetScalar; DIM]> {
    let order = l.config().max_order();
    debug_assert!(order >= 2);
    let ly: [JetScalar; DIM] = std::array::from_fn(|i| l.derivative(yvar(i)));
    let lx: [JetScalar; DIM] = std::array::from_fn(|i| l.derivative(i).truncate(order - 2));
    let gyy: [[JetScalar; DIM]; DIM] =
        std::array::from_fn(|i| std::array::from_fn(|j| ly[i].derivative(yvar(j)) * 0.5));
    let low = gyy[0][0].config();
    let yj: Vec<JetScalar> = (0..DIM)
        .map(|k| JetScalar::variable(low, yvar(k), y[k]))
        .collect::<Result<_>>()?;
    let rhs: [JetScalar; DIM] = std::array::from_fn(|l_| {
        let mut s = -&lx[l_];
        for (k, yk) in yj.iter().enumerate() {
            s = s + &ly[l_].derivative(k) * yk;
        }
        s
    });
    let chol = linalg::cholesky(&gyy)?;
    let g = linalg::cholesky_solve(&chol, &rhs)?;
    Ok(g.map(|gi| gi * 0.25))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalTensor(pub Mat4);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SprayCoefficients(pub Vec4);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannEndomorphism(pub Mat4);

impl RiemannEndomorphism {
    pub fn trace(&self) -> f64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        linalg::mat_vec(&self.0, v)
    }
}

pub fn finsler_value(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<f64> {
    if y.iter().all(|&c| c == 0.0) {
        // validates the base point even for the zero vector
        handle.eval(x, &[1.0, 0.0, 0.0, 0.0])?;
        return Ok(0.0);
    }
    handle.eval(x, y)
}

pub fn fundamental_tensor(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<FundamentalTensor> {
    let l = handle.lagrangian_jet(x, y, 2)?;
    Ok(FundamentalTensor(fundamental_from(&l)))
}

fn fundamental_from(l: &JetScalar) -> Mat4 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| 0.5 * l.partial(&[yvar(i), yvar(j)]).expect("order >= 2"))
    })
}

pub fn spray(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<SprayCoefficients> {
    let l = handle.lagrangian_jet(x, y, 2)?;
    let g = spray_jets(&l, y)?;
    Ok(SprayCoefficients(g.map(|gi| gi.value())))
}

/// Every curvature quantity at one flag `(x, y, V)`, from one jet evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagSample {
    pub x: Vec4,
    pub y: Vec4,
    pub v: Vec4,
    pub finsler: f64,
    pub ricci: f64,
    pub flag_curvature: f64,
    pub constant_flag_lambda: f64,
    pub constant_flag_residual: f64,
    pub endomorphism_norm: f64,
    /// `|R^i_k y^k|`.
    pub pole_residual: f64,
}

/// Raw pointwise output of the order-4 evaluation at `(x, y)`.
pub struct CurvatureAtDirection {
    pub finsler: f64,
    pub fundamental: Mat4,
    /// `∂F/∂y^k`.
    pub finsler_dy: Vec4,
    pub spray: Vec4,
    pub endomorphism: RiemannEndomorphism,
}

pub fn curvature_at(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<CurvatureAtDirection> {
    let l = handle.lagrangian_jet(x, y, 4)?;
    let g = spray_jets(&l, y)?;
    let d = |i: usize, vars: &[usize]| g[i].partial(vars).expect("order-2 spray jet");
    let r = std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            let mut s = 2.0 * d(i, &[k]);
            for j in 0..DIM {
                s -= y[j] * d(i, &[j, yvar(k)]);
                s += 2.0 * g[j].value() * d(i, &[yvar(j), yvar(k)]);
                s -= d(i, &[yvar(j)]) * d(j, &[yvar(k)]);
            }
            s
        })
    });
    let finsler = l.value().sqrt();
    Ok(CurvatureAtDirection {
        finsler,
        fundamental: fundamental_from(&l),
        finsler_dy: std::array::from_fn(|k| l.partial(&[yvar(k)]).expect("order >= 1") / (2.0 * finsler)),
        spray: g.map(|gi| gi.value()),
        endomorphism: RiemannEndomorphism(r),
    })
}

pub fn riemann_endomorphism(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<RiemannEndomorphism> {
    Ok(curvature_at(handle, x, y)?.endomorphism)
}

/// `Ric(x, y) = R^k_k`.
pub fn ricci(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<f64> {
    Ok(riemann_endomorphism(handle, x, y)?.trace())
}

impl CurvatureAtDirection {
    /// `g_y(R_y V, V) / (g_y(y,y) g_y(V,V) − g_y(y,V)²)`.
    pub fn flag_curvature(&self, y: &Vec4, v: &Vec4) -> Result<f64> {
        let gy = &self.fundamental;
        let gram = linalg::quad(gy, y, y) * linalg::quad(gy, v, v) - linalg::quad(gy, y, v).powi(2);
        if !(gram >= DEGENERATE_FLAG) {
            return Err(Error::DegenerateFlag { gram });
        }
        Ok(linalg::quad(gy, &self.endomorphism.apply(v), v) / gram)
    }

    /// Least-squares `λ` for `R^i_k = λ(F²δ^i_k − F F_{y^k} y^i)` and the
    /// Frobenius norm of what remains.
    pub fn constant_flag_fit(&self, y: &Vec4) -> (f64, f64) {
        let f = self.finsler;
        let target: Mat4 = std::array::from_fn(|i| {
            std::array::from_fn(|k| {
                let delta = if i == k { f * f } else { 0.0 };
                delta - f * self.finsler_dy[k] * y[i]
            })
        });
        let r = &self.endomorphism.0;
        let rt: f64 = r.iter().flatten().zip(target.iter().flatten()).map(|(a, b)| a * b).sum();
        let tt: f64 = target.iter().flatten().map(|t| t * t).sum();
        let lambda = rt / tt;
        let rest: Mat4 = std::array::from_fn(|i| std::array::from_fn(|k| r[i][k] - lambda * target[i][k]));
        (lambda, linalg::frobenius(&rest))
    }

    pub fn pole_residual(&self, y: &Vec4) -> f64 {
        linalg::norm(&self.endomorphism.apply(y))
    }

    fn sample(&self, x: Vec4, y: Vec4, v: Vec4) -> Result<FlagSample> {
        let flag_curvature = self.flag_curvature(&y, &v)?;
        let (lambda, residual) = self.constant_flag_fit(&y);
        Ok(FlagSample {
            x,
            y,
            v,
            finsler: self.finsler,
            ricci: self.endomorphism.trace(),
            flag_curvature,
            constant_flag_lambda: lambda,
            constant_flag_residual: residual,
            endomorphism_norm: linalg::frobenius(&self.endomorphism.0),
            pole_residual: self.pole_residual(&y),
        })
    }
}

pub fn flag_curvature(handle: &FinslerMetric, x: &Vec4, y: &Vec4, v: &Vec4) -> Result<f64> {
    curvature_at(handle, x, y)?.flag_curvature(y, v)
}

pub fn constant_flag_residual(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Result<(f64, f64)> {
    Ok(curvature_at(handle, x, y)?.constant_flag_fit(y))
}

pub fn evaluate_flag(handle: &FinslerMetric, x: &Vec4, y: &Vec4, v: &Vec4) -> Result<FlagSample> {
    curvature_at(handle, x, y)?.sample(*x, *y, *v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub samples: usize,
    /// Radius of the Euclidean ball the base points are drawn from.
    pub radius: f64,
    pub seed: u64,
    /// Base points are kept only where `|W|² <= margin`.
    pub margin: f64,
}

impl SamplerConfig {
    pub fn new(samples: usize, radius: f64, seed: u64) -> Self {
        Self {
            samples,
            radius,
            seed,
            margin: 0.99,
        }
    }
}

/// Endomorphisms below this multiple of `F²` are treated as rounding noise.
pub const CURVATURE_FLOOR: f64 = 1e-10;

const MAX_DRAWS: usize = 100_000;

/// Base point uniform in the ball, restricted to `|W|² <= margin` by
/// rejection.
pub fn sample_base_point(handle: &FinslerMetric, cfg: &SamplerConfig, stream: &mut SampleStream) -> Result<Vec4> {
    for _ in 0..MAX_DRAWS {
        let x = stream.ball(cfg.radius);
        if handle.wind_norm_sq(&x) <= cfg.margin {
            return Ok(x);
        }
    }
    Err(Error::Domain(format!(
        "no base point with |W|^2 <= {} found in the ball of radius {}",
        cfg.margin, cfg.radius
    )))
}

/// Flag sample `index`: base point as in [`sample_base_point`], pole and
/// transverse edge uniform on the Euclidean unit sphere, the edge redrawn
/// while the flag is degenerate.
pub fn sample_flag(handle: &FinslerMetric, cfg: &SamplerConfig, index: u64) -> Result<FlagSample> {
    let mut stream = SampleStream::new(cfg.seed, purpose::FLAGS, index);
    let x = sample_base_point(handle, cfg, &mut stream)?;
    let y = stream.unit_vector();
    let c = curvature_at(handle, &x, &y)?;
    for _ in 0..MAX_DRAWS {
        let v = stream.unit_vector();
        match c.flag_curvature(&y, &v) {
            Ok(_) => return Ok(c.sample(x, y, v)?),
            Err(Error::DegenerateFlag { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateFlag { gram: 0.0 })
}

/// Einstein and flag-curvature statistics over a seeded batch of flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinScan {
    pub samples: Vec<FlagSample>,
    /// `max |Ric| / F²`.
    pub max_einstein_residual: f64,
    /// `max residual / ‖R‖` of the constant-flag fit, over samples where
    /// `‖R‖ > CURVATURE_FLOOR · F²`.
    pub max_constant_flag_residual: f64,
    pub max_pole_residual: f64,
    pub flag_min: f64,
    pub flag_max: f64,
    pub flag_spread: f64,
}

pub fn einstein_scan(handle: &FinslerMetric, cfg: &SamplerConfig) -> Result<EinsteinScan> {
    if cfg.samples == 0 {
        return Err(Error::Usage("an Einstein scan needs at least one sample".into()));
    }
    let samples = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| sample_flag(handle, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let mut scan = EinsteinScan {
        max_einstein_residual: 0.0,
        max_constant_flag_residual: 0.0,
        max_pole_residual: 0.0,
        flag_min: f64::INFINITY,
        flag_max: f64::NEG_INFINITY,
        flag_spread: 0.0,
        samples: Vec::new(),
    };
    for s in &samples {
        scan.max_einstein_residual = scan.max_einstein_residual.max(s.ricci.abs() / (s.finsler * s.finsler));
        if s.endomorphism_norm > CURVATURE_FLOOR * s.finsler * s.finsler {
            scan.max_constant_flag_residual =
                scan.max_constant_flag_residual.max(s.constant_flag_residual / s.endomorphism_norm);
        }
        scan.max_pole_residual = scan.max_pole_residual.max(s.pole_residual);
        scan.flag_min = scan.flag_min.min(s.flag_curvature);
        scan.flag_max = scan.flag_max.max(s.flag_curvature);
    }
    scan.flag_spread = scan.flag_max - scan.flag_min;
    scan.samples = samples;
    Ok(scan)
}
