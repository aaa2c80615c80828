//! Finite-difference oracles for the jet-computed quantities.
//!
//! These only consume `f64` evaluations through the `fd` helpers.

#![allow(dead_code)]

use einstein_randers::fd;
use einstein_randers::finsler::{finsler_value, spray, FinslerMetric};
use einstein_randers::linalg::{self, Mat4, Vec4, DIM};
use einstein_randers::riemann::{metric_matrix, MetricSpec};

pub type Gamma = [[[f64; DIM]; DIM]; DIM];
pub type Riemann = [[[[f64; DIM]; DIM]; DIM]; DIM];

fn v4(p: &[f64]) -> Vec4 {
    [p[0], p[1], p[2], p[3]]
}

fn flat_metric(spec: &MetricSpec, p: &[f64]) -> Vec<f64> {
    metric_matrix(spec, &v4(p)).0.iter().flatten().copied().collect()
}

fn unflatten_gamma(v: &[f64]) -> Gamma {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| v[(i * DIM + j) * DIM + k])))
}

/// `Γ^i_{jk}` from central differences of the metric matrix.
pub fn christoffel_fd(spec: &MetricSpec, x: &Vec4) -> Gamma {
    let ginv = linalg::spd_inverse(&metric_matrix(spec, x).0).unwrap();
    let dg: Vec<Vec<f64>> = (0..DIM).map(|k| fd::partial_vec(|p| flat_metric(spec, p), x, k)).collect();
    let d = |k: usize, i: usize, j: usize| dg[k][i * DIM + j];
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                0.5 * (0..DIM)
                    .map(|l| ginv[i][l] * (d(j, l, k) + d(k, j, l) - d(l, j, k)))
                    .sum::<f64>()
            })
        })
    })
}

/// `R^i_{jkl}` from differences of [`christoffel_fd`].
pub fn riemann_fd(spec: &MetricSpec, x: &Vec4) -> Riemann {
    let flat = |p: &[f64]| -> Vec<f64> { christoffel_fd(spec, &v4(p)).iter().flatten().flatten().copied().collect() };
    let g = christoffel_fd(spec, x);
    let dg: Vec<Gamma> = (0..DIM).map(|m| unflatten_gamma(&fd::partial_vec(flat, x, m))).collect();
    std::array::from_fn(|i| {
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
    })
}

pub fn ricci_of(r: &Riemann) -> Mat4 {
    std::array::from_fn(|j| std::array::from_fn(|l| (0..DIM).map(|i| r[i][j][i][l]).sum()))
}

fn split(p: &[f64]) -> (Vec4, Vec4) {
    (v4(&p[..4]), v4(&p[4..]))
}

/// `G^i` from differences of `F²` alone.
pub fn spray_fd(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Vec4 {
    let l = |p: &[f64]| {
        let (x, y) = split(p);
        finsler_value(handle, &x, &y).unwrap().powi(2)
    };
    let p: Vec<f64> = x.iter().chain(y).copied().collect();
    let gyy: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * fd::second_partial(l, &p, 4 + i, 4 + j)));
    let rhs: Vec4 = std::array::from_fn(|a| {
        let mixed: f64 = (0..DIM).map(|k| fd::second_partial(l, &p, k, 4 + a) * y[k]).sum();
        mixed - fd::partial(l, &p, a)
    });
    let inv = linalg::spd_inverse(&gyy).unwrap();
    linalg::mat_vec(&inv, &rhs).map(|g| 0.25 * g)
}

/// `R^i_k` assembled from differences of the pointwise spray.
pub fn endomorphism_fd(handle: &FinslerMetric, x: &Vec4, y: &Vec4) -> Mat4 {
    let g = |p: &[f64]| -> Vec<f64> {
        let (x, y) = split(p);
        spray(handle, &x, &y).unwrap().0.to_vec()
    };
    let p: Vec<f64> = x.iter().chain(y).copied().collect();
    let g0 = g(&p);
    let d1: Vec<Vec<f64>> = (0..2 * DIM).map(|a| fd::partial_vec(g, &p, a)).collect();
    let d2 = |a: usize, b: usize| fd::second_partial_vec(g, &p, a, b);
    let dxy: Vec<Vec<Vec<f64>>> = (0..DIM).map(|j| (0..DIM).map(|k| d2(j, 4 + k)).collect()).collect();
    let dyy: Vec<Vec<Vec<f64>>> = (0..DIM).map(|j| (0..DIM).map(|k| d2(4 + j, 4 + k)).collect()).collect();
    std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            let mut s = 2.0 * d1[k][i];
            for j in 0..DIM {
                s -= y[j] * dxy[j][k][i];
                s += 2.0 * g0[j] * dyy[j][k][i];
                s -= d1[4 + j][i] * d1[4 + k][j];
            }
            s
        })
    })
}

/// Flag curvature from [`endomorphism_fd`] and a differenced `g_y`.
pub fn flag_curvature_fd(handle: &FinslerMetric, x: &Vec4, y: &Vec4, v: &Vec4) -> f64 {
    let l = |q: &[f64]| finsler_value(handle, x, &v4(q)).unwrap().powi(2);
    let gy: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * fd::second_partial(l, y, i, j)));
    let r = endomorphism_fd(handle, x, y);
    let gram = linalg::quad(&gy, y, y) * linalg::quad(&gy, v, v) - linalg::quad(&gy, y, v).powi(2);
    linalg::quad(&gy, &linalg::mat_vec(&r, v), v) / gram
}

pub fn max_abs_diff_flat<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

pub fn max_abs_flat<'a>(a: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().map(|p| p.abs()).fold(0.0, f64::max)
}
