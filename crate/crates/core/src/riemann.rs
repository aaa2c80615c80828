//! The Hawking Taub-NUT metrics on R⁴ and their Levi-Civita calculus.
//!
//! In Cartesian coordinates the metric is `G(x) = B(x)·I − A(x)·H(x)` with
//! `B = a|x|² + 1`, `A = a(1 + 1/B)` and `H = v vᵀ` for
//! `v = (x², −x¹, x⁴, −x³)`. All metric derivatives come from order-2 jets
//! seeded in the four base coordinates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{JetConfig, JetScalar};
use crate::linalg::{self, Mat4, Vec4, DIM};
use crate::scalar::Scalar;

/// Gram determinants below this reject a plane as degenerate.
pub const DEGENERATE_PLANE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Flat,
    TaubNut { a: f64 },
}

impl MetricSpec {
    pub fn taub_nut(a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::Config(format!(
                "Taub-NUT parameter must be finite and >= 0, got {a}"
            )));
        }
        Ok(Self::TaubNut { a })
    }

    /// The Taub-NUT parameter; `Flat` behaves as `a = 0`.
    pub fn parameter(&self) -> f64 {
        match *self {
            Self::Flat => 0.0,
            Self::TaubNut { a } => a,
        }
    }

    /// `(B, A)` at `x`.
    pub fn coefficients<T: Scalar>(&self, x: &[T; DIM]) -> (T, T) {
        let a = self.parameter();
        let r2 = x[0].square() + x[1].square() + x[2].square() + x[3].square();
        let b = r2 * a + 1.0;
        // A = a (1 + 1/B); B >= 1 so the division never fails.
        let inv_b = b.lift(1.0) / b.clone();
        let big_a = (inv_b + 1.0) * a;
        (b, big_a)
    }

    /// Metric components written out entry by entry.
    pub fn components<T: Scalar>(&self, x: &[T; DIM]) -> [[T; DIM]; DIM] {
        let (b, am) = self.coefficients(x);
        let [x1, x2, x3, x4] = x.clone();
        let g11 = b.clone() - am.clone() * x2.square();
        let g12 = am.clone() * x1.clone() * x2.clone();
        let g13 = -(am.clone() * x2.clone() * x4.clone());
        let g14 = am.clone() * x2.clone() * x3.clone();
        let g22 = b.clone() - am.clone() * x1.square();
        let g23 = am.clone() * x1.clone() * x4.clone();
        let g24 = -(am.clone() * x1.clone() * x3.clone());
        let g33 = b.clone() - am.clone() * x4.square();
        let g34 = am.clone() * x3.clone() * x4.clone();
        let g44 = b - am * x3.square();
        [
            [g11, g12.clone(), g13.clone(), g14.clone()],
            [g12, g22, g23.clone(), g24.clone()],
            [g13, g23, g33, g34.clone()],
            [g14, g24, g34, g44],
        ]
    }
}

/// A metric tensor value `g_ij` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValue(pub Mat4);

impl MetricValue {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn inner(&self, u: &Vec4, v: &Vec4) -> f64 {
        linalg::quad(&self.0, u, v)
    }

    pub fn lower(&self, v: &Vec4) -> Vec4 {
        linalg::mat_vec(&self.0, v)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..DIM).all(|i| (0..DIM).all(|j| self.0[i][j] == self.0[j][i]))
    }

    pub fn cholesky(&self) -> Result<Mat4> {
        linalg::cholesky(&self.0)
    }

    pub fn inverse(&self) -> Result<Mat4> {
        linalg::spd_inverse(&self.0)
    }
}

pub fn metric_matrix(spec: &MetricSpec, x: &Vec4) -> MetricValue {
    MetricValue(spec.components(x))
}

/// The metric assembled as `(a|x|²+1)·δ − a(a|x|²+2)/(a|x|²+1) · ω⊗ω`
/// with `ω = −x²dx¹ + x¹dx² − x⁴dx³ + x³dx⁴`.
pub fn metric_via_oneform(a: f64, x: &Vec4) -> MetricValue {
    let r2 = linalg::dot(x, x);
    let conformal = a * r2 + 1.0;
    let coupling = a * (a * r2 + 2.0) / (a * r2 + 1.0);
    let omega = [-x[1], x[0], -x[3], x[2]];
    MetricValue(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let delta = if i == j { conformal } else { 0.0 };
            delta - coupling * omega[i] * omega[j]
        })
    }))
}

/// Blocks `H₁ = (x², −x¹)ᵀ(x², −x¹)`, `H₂ = (x², −x¹)ᵀ(x⁴, −x³)` and
/// `H₃ = (x⁴, −x³)ᵀ(x⁴, −x³)`.
pub fn h_blocks(x: &Vec4) -> [[[f64; 2]; 2]; 3] {
    let p = [x[1], -x[0]];
    let q = [x[3], -x[2]];
    let outer = |u: [f64; 2], v: [f64; 2]| -> [[f64; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| u[i] * v[j]))
    };
    [outer(p, p), outer(p, q), outer(q, q)]
}

/// `H` assembled from its blocks as `[[H₁, H₂], [H₂ᵀ, H₃]]`.
pub fn h_matrix(x: &Vec4) -> Mat4 {
    let [h1, h2, h3] = h_blocks(x);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| match (i < 2, j < 2) {
            (true, true) => h1[i][j],
            (true, false) => h2[i][j - 2],
            (false, true) => h2[j][i - 2],
            (false, false) => h3[i - 2][j - 2],
        })
    })
}

/// `‖G(x) − (B·I − A·H)‖∞` with `H` built from its blocks.
pub fn decomposition_check(spec: &MetricSpec, x: &Vec4) -> f64 {
    let g = metric_matrix(spec, x);
    let (b, am) = spec.coefficients(x);
    let h = h_matrix(x);
    let rebuilt: Mat4 = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { b } else { 0.0 } - am * h[i][j])
    });
    linalg::max_abs_diff(g.matrix(), &rebuilt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChristoffelSymbols {
    /// `gamma[i][j][k] = Γ^i_{jk}`.
    pub gamma: [[[f64; DIM]; DIM]; DIM],
}

impl ChristoffelSymbols {
    /// `Γ^i_{jk} u^j v^k`.
    pub fn contract(&self, u: &Vec4, v: &Vec4) -> Vec4 {
        std::array::from_fn(|i| {
            let mut s = 0.0;
            for j in 0..DIM {
                for k in 0..DIM {
                    s += self.gamma[i][j][k] * u[j] * v[k];
                }
            }
            s
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureTensors {
    /// `riemann[i][j][k][l] = R^i_{jkl}`, with `R(∂_k, ∂_l)∂_j = R^i_{jkl} ∂_i`.
    pub riemann: [[[[f64; DIM]; DIM]; DIM]; DIM],
    /// `Ric_{jl} = R^i_{jil}`.
    pub ricci: Mat4,
    pub scalar: f64,
}

/// Metric, inverse, first metric derivatives and the Christoffel symbols with
/// their first derivatives, all at one point.
pub(crate) struct LeviCivita {
    pub metric: Mat4,
    pub inverse: Mat4,
    /// `dmetric[k][i][j] = ∂_k g_ij`.
    pub dmetric: [Mat4; DIM],
    pub gamma: [[[f64; DIM]; DIM]; DIM],
    /// `dgamma[m][i][j][k] = ∂_m Γ^i_{jk}`.
    pub dgamma: [[[[f64; DIM]; DIM]; DIM]; DIM],
}

pub(crate) fn levi_civita(spec: &MetricSpec, x: &Vec4) -> Result<LeviCivita> {
    let cfg = JetConfig::new(DIM, 2)?;
    let seeds: [JetScalar; DIM] = JetScalar::seed(x, cfg)?
        .try_into()
        .expect("four seeds");
    let g = spec.components(&seeds);
    let dg: [[[JetScalar; DIM]; DIM]; DIM] = std::array::from_fn(|k| {
        std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].derivative(k)))
    });
    let g1: [[JetScalar; DIM]; DIM] =
        std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].truncate(1)));
    let ginv = linalg::spd_inverse(&g1)?;

    let zero = JetScalar::constant(g1[0][0].config(), 0.0);
    let mut gamma_jets: Vec<JetScalar> = Vec::with_capacity(DIM * DIM * DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let mut s = zero.clone();
                for l in 0..DIM {
                    let bracket = &(&dg[j][l][k] + &dg[k][j][l]) - &dg[l][j][k];
                    s = &s + &(&ginv[i][l] * &bracket);
                }
                gamma_jets.push(s * 0.5);
            }
        }
    }
    let at = |i: usize, j: usize, k: usize| &gamma_jets[(i * DIM + j) * DIM + k];

    let metric = linalg::values(&g);
    let inverse = linalg::values(&ginv);
    let dmetric = std::array::from_fn(|k| linalg::values(&dg[k]));
    let gamma = std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| at(i, j, k).value()))
    });
    let dgamma = std::array::from_fn(|m| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| at(i, j, k).derivative(m).value())
            })
        })
    });
    Ok(LeviCivita {
        metric,
        inverse,
        dmetric,
        gamma,
        dgamma,
    })
}

pub fn christoffel(spec: &MetricSpec, x: &Vec4) -> Result<ChristoffelSymbols> {
    Ok(ChristoffelSymbols {
        gamma: levi_civita(spec, x)?.gamma,
    })
}

pub(crate) fn curvature_from(lc: &LeviCivita) -> CurvatureTensors {
    let g = &lc.gamma;
    let dg = &lc.dgamma;
    let riemann = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                std::array::from_fn(|l| {
                    let mut r = dg[k][i][l][j] - dg[l][i][k][j];
                    for m in 0..DIM {
                        r += g[i][k][m] * g[m][l][j] - g[i][l][m] * g[m][k][j];
                    }
                    r
                })
            })
        })
    });
    let ricci: Mat4 = std::array::from_fn(|j| {
        std::array::from_fn(|l| (0..DIM).map(|i| riemann[i][j][i][l]).sum())
    });
    let mut scalar = 0.0;
    for j in 0..DIM {
        for l in 0..DIM {
            scalar += lc.inverse[j][l] * ricci[j][l];
        }
    }
    CurvatureTensors {
        riemann,
        ricci,
        scalar,
    }
}

pub fn curvature(spec: &MetricSpec, x: &Vec4) -> Result<CurvatureTensors> {
    Ok(curvature_from(&levi_civita(spec, x)?))
}

/// `max |∇_k g_ij|` for the computed connection.
pub fn metric_compatibility_residual(spec: &MetricSpec, x: &Vec4) -> Result<f64> {
    let lc = levi_civita(spec, x)?;
    let mut worst: f64 = 0.0;
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut r = lc.dmetric[k][i][j];
                for l in 0..DIM {
                    r -= lc.gamma[l][k][i] * lc.metric[l][j] + lc.gamma[l][k][j] * lc.metric[i][l];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

/// `max |R^i_{jkl} + R^i_{klj} + R^i_{ljk}|`.
pub fn bianchi_residual(curv: &CurvatureTensors) -> f64 {
    let r = &curv.riemann;
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    worst = worst.max((r[i][j][k][l] + r[i][k][l][j] + r[i][l][j][k]).abs());
                }
            }
        }
    }
    worst
}

/// `max |R^i_{jkl} + R^i_{jlk}|`.
pub fn antisymmetry_residual(curv: &CurvatureTensors) -> f64 {
    let r = &curv.riemann;
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    worst = worst.max((r[i][j][k][l] + r[i][j][l][k]).abs());
                }
            }
        }
    }
    worst
}

/// `g(R(u,v)v, u) / (g(u,u)g(v,v) − g(u,v)²)`.
pub fn sectional_curvature(spec: &MetricSpec, x: &Vec4, u: &Vec4, v: &Vec4) -> Result<f64> {
    let lc = levi_civita(spec, x)?;
    sectional_from(&lc.metric, &curvature_from(&lc), u, v)
}

pub(crate) fn sectional_from(
    metric: &Mat4,
    curv: &CurvatureTensors,
    u: &Vec4,
    v: &Vec4,
) -> Result<f64> {
    let guu = linalg::quad(metric, u, u);
    let gvv = linalg::quad(metric, v, v);
    let guv = linalg::quad(metric, u, v);
    let gram = guu * gvv - guv * guv;
    if gram < DEGENERATE_PLANE {
        return Err(Error::DegenerateFlag { gram });
    }
    // R(u,v)v
    let rv: Vec4 = std::array::from_fn(|i| {
        let mut s = 0.0;
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    s += curv.riemann[i][j][k][l] * v[j] * u[k] * v[l];
                }
            }
        }
        s
    });
    Ok(linalg::quad(metric, &rv, u) / gram)
}

/// A vector field that can be evaluated on plain points or on jets.
pub trait VectorField {
    fn components<T: Scalar>(&self, x: &[T; DIM]) -> [T; DIM];
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl VectorField for ZeroField {
    fn components<T: Scalar>(&self, x: &[T; DIM]) -> [T; DIM] {
        std::array::from_fn(|_| x[0].lift(0.0))
    }
}

/// `W_{i|j} + W_{j|i}` with `W_i = g_ij W^j` and `|` the Levi-Civita
/// covariant derivative.
pub fn killing_residual<W: VectorField>(spec: &MetricSpec, x: &Vec4, field: &W) -> Result<Mat4> {
    let lc = levi_civita(spec, x)?;
    let cfg = JetConfig::new(DIM, 1)?;
    let seeds: [JetScalar; DIM] = JetScalar::seed(x, cfg)?
        .try_into()
        .expect("four seeds");
    let g = spec.components(&seeds);
    let w_up = field.components(&seeds);
    let w_down: [JetScalar; DIM] = std::array::from_fn(|i| {
        (0..DIM).fold(JetScalar::constant(cfg, 0.0), |acc, j| {
            &acc + &(&g[i][j] * &w_up[j])
        })
    });
    let w_val: Vec4 = std::array::from_fn(|i| w_down[i].value());
    let cov = |i: usize, j: usize| -> f64 {
        let mut s = w_down[i].derivative(j).value();
        for (k, wk) in w_val.iter().enumerate() {
            s -= lc.gamma[k][i][j] * wk;
        }
        s
    };
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| cov(i, j) + cov(j, i))
    }))
}

/// Least-squares `c` minimizing `‖residual + 4c·g‖_F`, and the remaining
/// Frobenius deviation.
pub fn homothety_constant_fit(residual: &Mat4, metric: &Mat4) -> (f64, f64) {
    let rg: f64 = residual
        .iter()
        .flatten()
        .zip(metric.iter().flatten())
        .map(|(r, g)| r * g)
        .sum();
    let gg: f64 = metric.iter().flatten().map(|g| g * g).sum();
    let c = if gg > 0.0 { -rg / (4.0 * gg) } else { 0.0 };
    let dev: Mat4 = std::array::from_fn(|i| {
        std::array::from_fn(|j| residual[i][j] + 4.0 * c * metric[i][j])
    });
    (c, linalg::frobenius(&dev))
}

/// Euclidean Laplacian on R³ of `u_a(y) = (1/|y| + a)/4`.
pub fn harmonicity_check(a: f64, y: &[f64; 3]) -> Result<f64> {
    if y.iter().all(|&c| c == 0.0) {
        return Err(Error::Domain(
            "the harmonic function is singular at the origin".into(),
        ));
    }
    let cfg = JetConfig::new(3, 2)?;
    let v = JetScalar::seed(y, cfg)?;
    let r = (&(&v[0] * &v[0]) + &(&(&v[1] * &v[1]) + &(&v[2] * &v[2]))).checked_sqrt()?;
    let u = (JetScalar::constant(cfg, 1.0).checked_div(&r)? + a) * 0.25;
    Ok((0..3).map(|i| u.extract(&unit3(i)).unwrap_or(0.0)).sum())
}

fn unit3(i: usize) -> [usize; 3] {
    let mut e = [0; 3];
    e[i] = 2;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use crate::sampling::SampleStream;

    const E1: Vec4 = [1.0, 0.0, 0.0, 0.0];
    const E2: Vec4 = [0.0, 1.0, 0.0, 0.0];
    const E3: Vec4 = [0.0, 0.0, 1.0, 0.0];

    fn tn(a: f64) -> MetricSpec {
        MetricSpec::taub_nut(a).unwrap()
    }

    #[test]
    fn metric_at_origin_is_identity() {
        assert_eq!(metric_matrix(&tn(1.7), &[0.0; 4]).0, linalg::identity());
        assert_eq!(
            metric_matrix(&MetricSpec::Flat, &[0.3, -1.0, 2.0, 0.5]).0,
            linalg::identity()
        );
    }

    #[test]
    fn metric_on_first_axis() {
        let expect = [
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 2.0, 0.0],
            [0.0, 0.0, 0.0, 2.0],
        ];
        assert!(linalg::max_abs_diff(&metric_matrix(&tn(1.0), &E1).0, &expect) < 1e-15);
        assert!(linalg::max_abs_diff(&metric_via_oneform(1.0, &E1).0, &expect) < 1e-15);
        assert_eq!(metric_via_oneform(0.0, &[1.0, 2.0, 3.0, 4.0]).0, linalg::identity());
    }

    #[test]
    fn rejects_negative_parameter() {
        assert!(MetricSpec::taub_nut(-0.1).is_err());
        assert!(MetricSpec::taub_nut(f64::NAN).is_err());
    }

    #[test]
    fn constructions_agree() {
        for i in 0..100 {
            let mut s = SampleStream::new(5, 99, i);
            let a = s.range(0.0, 3.0);
            let x = s.ball(3.0);
            let d = linalg::max_abs_diff(&metric_matrix(&tn(a), &x).0, &metric_via_oneform(a, &x).0);
            assert!(d < 1e-13, "sample {i}: {d}");
        }
    }

    #[test]
    fn decomposition_identity() {
        assert_eq!(decomposition_check(&tn(1.0), &[0.0; 4]), 0.0);
        assert!(decomposition_check(&tn(2.0), &[1.0; 4]) < 1e-13);
        let mut s = SampleStream::new(9, 99, 0);
        for _ in 0..50 {
            assert!(decomposition_check(&tn(1.0), &s.ball(2.0)) < 1e-14);
        }
    }

    #[test]
    fn flat_connection_and_curvature_vanish() {
        let x = [0.4, -0.2, 1.1, 0.9];
        let c = christoffel(&MetricSpec::Flat, &x).unwrap();
        assert!(c.gamma.iter().flatten().flatten().all(|&v| v == 0.0));
        let k = curvature(&MetricSpec::Flat, &x).unwrap();
        assert!(k.riemann.iter().flatten().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(
            sectional_curvature(&MetricSpec::Flat, &x, &E1, &E3).unwrap(),
            0.0
        );
    }

    #[test]
    fn christoffel_symmetric_in_lower_indices() {
        let c = christoffel(&tn(1.0), &[0.3, 0.8, -0.5, 1.2]).unwrap();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    assert_eq!(c.gamma[i][j][k], c.gamma[i][k][j]);
                }
            }
        }
    }

    #[test]
    fn christoffel_matches_fd_oracle() {
        let spec = tn(1.0);
        let x = E1;
        let flat = |p: &[f64]| -> Vec<f64> {
            let q = [p[0], p[1], p[2], p[3]];
            metric_matrix(&spec, &q).0.iter().flatten().copied().collect()
        };
        let dg: Vec<Vec<f64>> = (0..4).map(|k| fd::partial_vec(flat, &x, k)).collect();
        let ginv = metric_matrix(&spec, &x).inverse().unwrap();
        let c = christoffel(&spec, &x).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let mut s = 0.0;
                    for l in 0..4 {
                        s += ginv[i][l] * (dg[j][l * 4 + k] + dg[k][j * 4 + l] - dg[l][j * 4 + k]);
                    }
                    assert!((0.5 * s - c.gamma[i][j][k]).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn taub_nut_is_ricci_flat() {
        let spec = tn(1.0);
        for i in 0..100 {
            let x = SampleStream::new(42, 98, i).ball(2.0);
            let k = curvature(&spec, &x).unwrap();
            assert!(linalg::max_abs(&k.ricci) < 1e-7);
            assert!(bianchi_residual(&k) < 1e-9);
            assert!(antisymmetry_residual(&k) < 1e-14);
        }
    }

    #[test]
    fn sectional_curvature_is_not_constant() {
        let spec = tn(1.0);
        let k12 = sectional_curvature(&spec, &E1, &E1, &E2).unwrap();
        let k13 = sectional_curvature(&spec, &E1, &E1, &E3).unwrap();
        assert!((k12 - k13).abs() > 1e-3, "{k12} vs {k13}");
    }

    #[test]
    fn sectional_symmetries() {
        let spec = tn(1.0);
        let x = [0.2, 0.5, -0.7, 0.1];
        let u = [0.3, -1.0, 0.4, 0.2];
        let v = [1.0, 0.1, 0.0, -0.6];
        let k = sectional_curvature(&spec, &x, &u, &v).unwrap();
        assert!((k - sectional_curvature(&spec, &x, &v, &u).unwrap()).abs() < 1e-13);
        let u2 = u.map(|c| 2.0 * c);
        assert!((k - sectional_curvature(&spec, &x, &u2, &v).unwrap()).abs() < 1e-12);
        assert!(matches!(
            sectional_curvature(&spec, &x, &u, &u2),
            Err(Error::DegenerateFlag { .. })
        ));
    }

    #[test]
    fn metric_compatibility() {
        let x = [0.9, -0.4, 0.3, 1.3];
        assert!(metric_compatibility_residual(&tn(2.0), &x).unwrap() < 1e-10);
    }

    struct Stretch;
    impl VectorField for Stretch {
        fn components<T: Scalar>(&self, x: &[T; DIM]) -> [T; DIM] {
            let z = x[0].lift(0.0);
            [x[0].clone(), z.clone(), z.clone(), z]
        }
    }

    #[test]
    fn killing_residual_controls() {
        let x = [0.5, 0.2, -0.3, 0.8];
        let zero = killing_residual(&tn(1.0), &x, &ZeroField).unwrap();
        assert_eq!(linalg::max_abs(&zero), 0.0);
        // A stretch is not Killing for the flat metric: residual 2 e1⊗e1.
        let r = killing_residual(&MetricSpec::Flat, &x, &Stretch).unwrap();
        assert!((r[0][0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn homothety_fit() {
        let g = metric_matrix(&tn(1.0), &[0.1, 0.4, 0.3, -0.2]).0;
        assert_eq!(homothety_constant_fit(&[[0.0; 4]; 4], &g), (0.0, 0.0));
        let res = g.map(|row| row.map(|v| -4.0 * 0.3 * v));
        let (c, dev) = homothety_constant_fit(&res, &g);
        assert!((c - 0.3).abs() < 1e-15);
        assert!(dev < 1e-14);
    }

    #[test]
    fn harmonic_potential() {
        assert!(harmonicity_check(1.0, &[1.0, 0.0, 0.0]).unwrap().abs() < 1e-9);
        assert!(harmonicity_check(1.0, &[1.0, 2.0, 2.0]).unwrap().abs() < 1e-9);
        let a0 = harmonicity_check(0.0, &[0.3, -0.2, 0.5]).unwrap();
        let a5 = harmonicity_check(5.0, &[0.3, -0.2, 0.5]).unwrap();
        assert_eq!(a0, a5);
        assert!(matches!(
            harmonicity_check(1.0, &[0.0; 3]),
            Err(Error::Domain(_))
        ));
    }
}
