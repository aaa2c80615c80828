//! Fixed-size 4×4 helpers and a Cholesky factorization that works for any
//! [`Scalar`], so the same code inverts plain metric values and metric jets.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DIM: usize = 4;

pub type Vec4 = [f64; DIM];
pub type Mat4 = [[f64; DIM]; DIM];

pub fn identity() -> Mat4 {
    let mut m = [[0.0; DIM]; DIM];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn transpose(m: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..DIM).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn mat_vec(a: &Mat4, v: &Vec4) -> Vec4 {
    std::array::from_fn(|i| (0..DIM).map(|k| a[i][k] * v[k]).sum())
}

pub fn dot(u: &Vec4, v: &Vec4) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &Vec4) -> f64 {
    dot(v, v).sqrt()
}

/// `uᵀ M v`.
pub fn quad(m: &Mat4, u: &Vec4, v: &Vec4) -> f64 {
    dot(u, &mat_vec(m, v))
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

pub fn max_abs(a: &Mat4) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| f64::max(m, x.abs()))
}

pub fn frobenius(a: &Mat4) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lower-triangular factor `L` with `M = L Lᵀ`. Fails with
/// [`Error::NotPositiveDefinite`] when a pivot is not strictly positive.
pub fn cholesky<T: Scalar>(m: &[[T; DIM]; DIM]) -> Result<[[T; DIM]; DIM]> {
    let zero = m[0][0].lift(0.0);
    let mut l: [[T; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for j in 0..DIM {
        let mut pivot = m[j][j].clone();
        for k in 0..j {
            pivot = pivot - l[j][k].square();
        }
        if !(pivot.value() > 0.0) {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: pivot.value(),
            });
        }
        let d = pivot.try_sqrt()?;
        for i in j + 1..DIM {
            let mut s = m[i][j].clone();
            for k in 0..j {
                s = s - l[i][k].clone() * l[j][k].clone();
            }
            l[i][j] = s.try_div(&d)?;
        }
        l[j][j] = d;
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Scalar>(l: &[[T; DIM]; DIM], b: &[T; DIM]) -> Result<[T; DIM]> {
    let mut z: [T; DIM] = b.clone();
    for i in 0..DIM {
        let mut s = b[i].clone();
        for k in 0..i {
            s = s - l[i][k].clone() * z[k].clone();
        }
        z[i] = s.try_div(&l[i][i])?;
    }
    let mut x = z.clone();
    for i in (0..DIM).rev() {
        let mut s = z[i].clone();
        for k in i + 1..DIM {
            s = s - l[k][i].clone() * x[k].clone();
        }
        x[i] = s.try_div(&l[i][i])?;
    }
    Ok(x)
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse<T: Scalar>(m: &[[T; DIM]; DIM]) -> Result<[[T; DIM]; DIM]> {
    let l = cholesky(m)?;
    let zero = m[0][0].lift(0.0);
    let mut cols = Vec::with_capacity(DIM);
    for j in 0..DIM {
        let e: [T; DIM] = std::array::from_fn(|i| zero.lift(if i == j { 1.0 } else { 0.0 }));
        cols.push(cholesky_solve(&l, &e)?);
    }
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone())))
}

/// Pointwise values of a jet- or float-valued matrix.
pub fn values<T: Scalar>(m: &[[T; DIM]; DIM]) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].value()))
}
