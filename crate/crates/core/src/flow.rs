//! The rotation flow `φ_θ(x) = A_θ x` generated by `W_{m,n}`.
//!
//! `A_θ = diag(R(mθ), R(nθ))` with `R(t)` the planar rotation by `t`, acting
//! on the coordinate pairs `(x¹, x²)` and `(x³, x⁴)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, Vec4};
use crate::riemann::{h_blocks, metric_matrix, MetricSpec};

/// Step of the central difference used by [`generator`].
pub const GENERATOR_STEP: f64 = 1e-6;

type Mat2 = [[f64; 2]; 2];

fn planar(t: f64) -> Mat2 {
    let (s, c) = t.sin_cos();
    [[c, -s], [s, c]]
}

fn check_rates(m: f64, n: f64) -> Result<()> {
    for (name, v) in [("m", m), ("n", n)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockRotation {
    pub theta: f64,
    pub m: f64,
    pub n: f64,
    pub matrix: Mat4,
}

impl BlockRotation {
    pub fn block_m(&self) -> Mat2 {
        planar(self.m * self.theta)
    }

    pub fn block_n(&self) -> Mat2 {
        planar(self.n * self.theta)
    }

    pub fn apply(&self, x: &Vec4) -> Vec4 {
        linalg::mat_vec(&self.matrix, x)
    }

    /// `‖AᵀA − I‖∞`.
    pub fn orthogonality_residual(&self) -> f64 {
        let ata = linalg::mat_mul(&linalg::transpose(&self.matrix), &self.matrix);
        linalg::max_abs_diff(&ata, &linalg::identity())
    }

    pub fn determinant(&self) -> f64 {
        let det2 = |b: Mat2| b[0][0] * b[1][1] - b[0][1] * b[1][0];
        det2(self.block_m()) * det2(self.block_n())
    }

    /// Largest entry outside the two diagonal 2×2 blocks.
    pub fn off_block_max(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 2..4 {
                worst = worst.max(self.matrix[i][j].abs()).max(self.matrix[j][i].abs());
            }
        }
        worst
    }
}

pub fn rotation(m: f64, n: f64, theta: f64) -> Result<BlockRotation> {
    check_rates(m, n)?;
    let (bm, bn) = (planar(m * theta), planar(n * theta));
    let mut matrix = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            matrix[i][j] = bm[i][j];
            matrix[2 + i][2 + j] = bn[i][j];
        }
    }
    Ok(BlockRotation { theta, m, n, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowMap {
    pub m: f64,
    pub n: f64,
}

impl FlowMap {
    pub fn new(m: f64, n: f64) -> Result<Self> {
        check_rates(m, n)?;
        Ok(Self { m, n })
    }

    pub fn rotation(&self, theta: f64) -> BlockRotation {
        rotation(self.m, self.n, theta).expect("rates validated")
    }

    pub fn apply(&self, x: &Vec4, theta: f64) -> Vec4 {
        self.rotation(theta).apply(x)
    }
}

/// `‖A_θᵀ G(φ_θ x) A_θ − G(x)‖∞`.
pub fn isometry_residual(a: f64, m: f64, n: f64, theta: f64, x: &Vec4) -> Result<f64> {
    let spec = MetricSpec::taub_nut(a)?;
    let r = rotation(m, n, theta)?;
    let gy = metric_matrix(&spec, &r.apply(x)).0;
    let pulled = linalg::mat_mul(&linalg::transpose(&r.matrix), &linalg::mat_mul(&gy, &r.matrix));
    Ok(linalg::max_abs_diff(&pulled, &metric_matrix(&spec, x).0))
}

fn congruence(left: &Mat2, h: &Mat2, right: &Mat2) -> Mat2 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += left[k][i] * h[k][l] * right[l][j];
                }
            }
            s
        })
    })
}

/// Largest residual of `H₁(x) = A_mᵀH₁(y)A_m`, `H₂(x) = A_mᵀH₂(y)A_n`,
/// `H₃(x) = A_nᵀH₃(y)A_n` with `y = φ_θ(x)`.
pub fn h_equivariance_residual(m: f64, n: f64, theta: f64, x: &Vec4) -> Result<f64> {
    let r = rotation(m, n, theta)?;
    let (bm, bn) = (r.block_m(), r.block_n());
    let hx = h_blocks(x);
    let hy = h_blocks(&r.apply(x));
    let pairs = [(&bm, &bm), (&bm, &bn), (&bn, &bn)];
    let mut worst = 0.0_f64;
    for (b, (left, right)) in pairs.iter().enumerate() {
        let pulled = congruence(left, &hy[b], right);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((pulled[i][j] - hx[b][i][j]).abs());
            }
        }
    }
    Ok(worst)
}

/// `dφ_θ(p)/dθ` at `θ = 0`, by central differences.
pub fn generator(m: f64, n: f64, p: &Vec4) -> Result<Vec4> {
    let flow = FlowMap::new(m, n)?;
    let plus = flow.apply(p, GENERATOR_STEP);
    let minus = flow.apply(p, -GENERATOR_STEP);
    Ok(std::array::from_fn(|i| (plus[i] - minus[i]) / (2.0 * GENERATOR_STEP)))
}

/// `|φ_{θ₁+θ₂}(x) − φ_{θ₁}(φ_{θ₂}(x))|`.
pub fn group_law_residual(m: f64, n: f64, theta1: f64, theta2: f64, x: &Vec4) -> Result<f64> {
    let flow = FlowMap::new(m, n)?;
    let joint = flow.apply(x, theta1 + theta2);
    let composed = flow.apply(&flow.apply(x, theta2), theta1);
    Ok(linalg::norm(&std::array::from_fn(|i| joint[i] - composed[i])))
}

/// `||φ_θ(x)| − |x||`.
pub fn norm_residual(m: f64, n: f64, theta: f64, x: &Vec4) -> Result<f64> {
    Ok((linalg::norm(&rotation(m, n, theta)?.apply(x)) - linalg::norm(x)).abs())
}

/// Residuals of `R(m · 2π/m) = I` and `R(n · 2π/n) = I` on the two blocks.
pub fn periodicity_residual(m: f64, n: f64) -> Result<(f64, f64)> {
    let tau = std::f64::consts::TAU;
    let dev = |b: Mat2| {
        let mut w = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                w = w.max((b[i][j] - id).abs());
            }
        }
        w
    };
    Ok((
        dev(rotation(m, n, tau / m)?.block_m()),
        dev(rotation(m, n, tau / n)?.block_n()),
    ))
}
