//! Zermelo navigation data on the Taub-NUT background.
//!
//! The wind is the rotational field `W_{m,n} = (−m x², m x¹, −n x⁴, n x³)`.
//! Lowering it with the Taub-NUT metric gives the closed form
//! `W_j = W^j (B − σA/m)` on the first plane and `W^j (B − σA/n)` on the
//! second, with `σ = m(x₁² + x₂²) + n(x₃² + x₄²)`. The Randers data follow
//! from `λ = 1 − |W|²`:
//!
//! ```text
//! a_ij = g_ij / λ + W_i W_j / λ²,     b_j = −W_j / λ
//! ```
//!
//! The operative validity condition everywhere in this crate is the exact
//! `|W|² < 1`; the polynomial bound `f(x)` is reported alongside it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, Vec4, DIM};
use crate::riemann::{metric_matrix, MetricSpec, VectorField};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NavigationParams {
    pub a: f64,
    pub m: f64,
    pub n: f64,
}

impl NavigationParams {
    pub fn new(a: f64, m: f64, n: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("a must be finite and >= 0, got {a}")));
        }
        for (name, v) in [("m", m), ("n", n)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { a, m, n })
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::TaubNut { a: self.a }
    }

    pub fn wind_field(&self) -> WindField {
        WindField::Rotation {
            m: self.m,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindField {
    Zero,
    Rotation { m: f64, n: f64 },
}

impl VectorField for WindField {
    fn components<T: Scalar>(&self, x: &[T; DIM]) -> [T; DIM] {
        match *self {
            WindField::Zero => std::array::from_fn(|_| x[0].lift(0.0)),
            WindField::Rotation { m, n } => [
                -(x[1].clone() * m),
                x[0].clone() * m,
                -(x[3].clone() * n),
                x[2].clone() * n,
            ],
        }
    }
}

impl WindField {
    /// `σ = m(x₁² + x₂²) + n(x₃² + x₄²)`; zero for the zero field.
    pub fn sigma<T: Scalar>(&self, x: &[T; DIM]) -> T {
        match *self {
            WindField::Zero => x[0].lift(0.0),
            WindField::Rotation { m, n } => {
                (x[0].square() + x[1].square()) * m + (x[2].square() + x[3].square()) * n
            }
        }
    }

    /// The lowered wind `W_j = g_jk W^k` in closed form.
    pub fn covector<T: Scalar>(&self, metric: &MetricSpec, x: &[T; DIM]) -> [T; DIM] {
        let up = self.components(x);
        match *self {
            WindField::Zero => up,
            WindField::Rotation { m, n } => {
                let (b, am) = metric.coefficients(x);
                let sigma_a = self.sigma(x) * am;
                let first = b.clone() - sigma_a.clone() / m;
                let second = b - sigma_a / n;
                let [w1, w2, w3, w4] = up;
                [
                    w1 * first.clone(),
                    w2 * first,
                    w3 * second.clone(),
                    w4 * second,
                ]
            }
        }
    }

    /// `|W|²` as the sum of the two plane contributions
    /// `(W₁² + W₂²)(B − σA/m) + (W₃² + W₄²)(B − σA/n)`.
    pub fn norm_sq<T: Scalar>(&self, metric: &MetricSpec, x: &[T; DIM]) -> T {
        let up = self.components(x);
        let down = self.covector(metric, x);
        let [u1, u2, u3, u4] = up;
        let [d1, d2, d3, d4] = down;
        u1 * d1 + u2 * d2 + (u3 * d3 + u4 * d4)
    }
}

/// Randers data `(a_ij, b_i, λ)` at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandersPointData {
    pub a: Mat4,
    pub b: Vec4,
    pub lambda: f64,
}

impl RandersPointData {
    pub fn alpha(&self, y: &Vec4) -> f64 {
        linalg::quad(&self.a, y, y).max(0.0).sqrt()
    }

    pub fn beta(&self, y: &Vec4) -> f64 {
        linalg::dot(&self.b, y)
    }

    pub fn finsler(&self, y: &Vec4) -> f64 {
        self.alpha(y) + self.beta(y)
    }

    /// `‖b‖_α = sqrt(a^{ij} b_i b_j)`.
    pub fn b_norm(&self) -> Result<f64> {
        let l = linalg::cholesky(&self.a)?;
        let x = linalg::cholesky_solve(&l, &self.b)?;
        Ok(linalg::dot(&self.b, &x).max(0.0).sqrt())
    }
}

/// Generic Randers assembly shared by the pointwise and jet paths.
/// Fails when `|W|² >= 1`.
pub fn randers_components<T: Scalar>(
    metric: &MetricSpec,
    wind: &WindField,
    x: &[T; DIM],
) -> Result<([[T; DIM]; DIM], [T; DIM], T)> {
    let g = metric.components(x);
    let w_down = wind.covector(metric, x);
    let wind_sq = wind.norm_sq(metric, x);
    if !(wind_sq.value() < 1.0) {
        return Err(Error::OutsideDomain {
            wind_norm_sq: wind_sq.value(),
        });
    }
    let lambda = -wind_sq + 1.0;
    let inv = lambda.lift(1.0).try_div(&lambda)?;
    let inv2 = inv.square();
    let a = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            g[i][j].clone() * inv.clone() + w_down[i].clone() * w_down[j].clone() * inv2.clone()
        })
    });
    let b = std::array::from_fn(|j| -(w_down[j].clone() * inv.clone()));
    Ok((a, b, lambda))
}

pub fn wind(params: &NavigationParams, x: &Vec4) -> Vec4 {
    params.wind_field().components(x)
}

pub fn wind_covector(params: &NavigationParams, x: &Vec4) -> Vec4 {
    params.wind_field().covector(&params.metric(), x)
}

pub fn sigma(params: &NavigationParams, x: &Vec4) -> f64 {
    params.wind_field().sigma(x)
}

pub fn wind_norm_sq(params: &NavigationParams, x: &Vec4) -> f64 {
    params.wind_field().norm_sq(&params.metric(), x)
}

/// `g_a(W, W)` by direct contraction with the metric matrix.
pub fn wind_norm_sq_direct(params: &NavigationParams, x: &Vec4) -> f64 {
    let w = wind(params, x);
    metric_matrix(&params.metric(), x).inner(&w, &w)
}

/// The sufficient bound
/// `f(x) = |x|²/(1 + a|x|²) · (p + 2a|m−n||x|² + a²|m−n||x|⁴)`, `p = max(m, n)`.
pub fn f_bound(params: &NavigationParams, x: &Vec4) -> f64 {
    let NavigationParams { a, m, n } = *params;
    let r2 = linalg::dot(x, x);
    let p = m.max(n);
    let d = (m - n).abs();
    r2 / (1.0 + a * r2) * (p + 2.0 * a * d * r2 + a * a * d * r2 * r2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    pub x: Vec4,
    pub f_value: f64,
    pub wind_norm_sq: f64,
    /// `f(x) < 1`.
    pub in_domain_sufficient: bool,
    /// `|W|²(x) < 1`, the condition actually used downstream.
    pub in_domain_exact: bool,
}

pub fn domain_report(params: &NavigationParams, x: &Vec4) -> DomainReport {
    let f_value = f_bound(params, x);
    let wind_norm_sq = wind_norm_sq(params, x);
    DomainReport {
        x: *x,
        f_value,
        wind_norm_sq,
        in_domain_sufficient: f_value < 1.0,
        in_domain_exact: wind_norm_sq < 1.0,
    }
}

pub fn randers_data(params: &NavigationParams, x: &Vec4) -> Result<RandersPointData> {
    let (a, b, lambda) = randers_components(&params.metric(), &params.wind_field(), x)?;
    Ok(RandersPointData { a, b, lambda })
}

/// Positive root of `λF² + 2g(y,W)F − g(y,y) = 0`, i.e. the `F` solving
/// `F = sqrt(g(y − F W, y − F W))`.
#[allow(non_snake_case)]
pub fn solve_implicit_F(params: &NavigationParams, x: &Vec4, y: &Vec4) -> Result<f64> {
    let g = metric_matrix(&params.metric(), x);
    let w = wind(params, x);
    let wind_sq = g.inner(&w, &w);
    if !(wind_sq < 1.0) {
        return Err(Error::OutsideDomain {
            wind_norm_sq: wind_sq,
        });
    }
    if y.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let lambda = 1.0 - wind_sq;
    let gyy = g.inner(y, y);
    let gyw = g.inner(y, &w);
    let disc = (gyw * gyw + lambda * gyy).sqrt();
    // Same root either way; pick the form without cancellation.
    Ok(if gyw >= 0.0 {
        gyy / (gyw + disc)
    } else {
        (disc - gyw) / lambda
    })
}

/// `F − sqrt(g(y − F W, y − F W))`.
pub fn implicit_residual(params: &NavigationParams, x: &Vec4, y: &Vec4, f: f64) -> f64 {
    let g = metric_matrix(&params.metric(), x);
    let w = wind(params, x);
    let shifted: Vec4 = std::array::from_fn(|i| y[i] - f * w[i]);
    f - g.inner(&shifted, &shifted).max(0.0).sqrt()
}
