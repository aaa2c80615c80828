//! Finite-difference oracle used to cross-check the jet derivatives.
//!
//! Central differences with base step [`BASE_STEP`] and one Richardson
//! extrapolation level. Everything here consumes plain `f64` evaluations and
//! never touches the jet code path.

pub const BASE_STEP: f64 = 1e-4;

fn richardson(coarse: Vec<f64>, fine: Vec<f64>) -> Vec<f64> {
    coarse
        .into_iter()
        .zip(fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = x.to_vec();
    for &(i, d) in moves {
        p[i] += d;
    }
    p
}

fn combine(terms: &[(f64, Vec<f64>)], scale: f64) -> Vec<f64> {
    let n = terms[0].1.len();
    (0..n)
        .map(|k| terms.iter().map(|(w, v)| w * v[k]).sum::<f64>() / scale)
        .collect()
}

/// `∂f/∂x_i` of a vector-valued function.
pub fn partial_vec<F>(f: F, x: &[f64], i: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let at = |h: f64| {
        let plus = f(&shifted(x, &[(i, h)]));
        let minus = f(&shifted(x, &[(i, -h)]));
        combine(&[(1.0, plus), (-1.0, minus)], 2.0 * h)
    };
    richardson(at(BASE_STEP), at(BASE_STEP / 2.0))
}

/// `∂²f/∂x_i∂x_j` of a vector-valued function.
pub fn second_partial_vec<F>(f: F, x: &[f64], i: usize, j: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let at = |h: f64| {
        if i == j {
            let plus = f(&shifted(x, &[(i, h)]));
            let mid = f(x);
            let minus = f(&shifted(x, &[(i, -h)]));
            combine(&[(1.0, plus), (-2.0, mid), (1.0, minus)], h * h)
        } else {
            let pp = f(&shifted(x, &[(i, h), (j, h)]));
            let pm = f(&shifted(x, &[(i, h), (j, -h)]));
            let mp = f(&shifted(x, &[(i, -h), (j, h)]));
            let mm = f(&shifted(x, &[(i, -h), (j, -h)]));
            combine(&[(1.0, pp), (-1.0, pm), (-1.0, mp), (1.0, mm)], 4.0 * h * h)
        }
    };
    richardson(at(BASE_STEP), at(BASE_STEP / 2.0))
}

pub fn partial<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], i: usize) -> f64 {
    partial_vec(|p| vec![f(p)], x, i)[0]
}

pub fn second_partial<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], i: usize, j: usize) -> f64 {
    second_partial_vec(|p| vec![f(p)], x, i, j)[0]
}

pub fn first<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    partial(|p| f(p[0]), &[t], 0)
}

pub fn second<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    second_partial(|p| f(p[0]), &[t], 0, 0)
}
