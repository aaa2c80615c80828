//! Truncated multivariate Taylor jets.
//!
//! A [`JetScalar`] carries every mixed partial derivative of a quantity up to
//! a fixed total order, over up to eight seed variables. Coefficients are
//! stored as the partial derivatives themselves (Taylor coefficient times
//! `α!`), indexed by a graded-lexicographic table of multi-indices, so
//! [`JetScalar::extract`] is a lookup. Products use the Leibniz rule with
//! binomial weights.
//!
//! Because the table is graded, the multi-indices of order `k - 1` form a
//! prefix of the table of order `k`. Truncation is therefore a slice, and
//! differentiating a jet with respect to one variable yields a jet of one
//! order less over the same variables.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_VARS: usize = 8;
pub const MAX_ORDER: usize = 4;

type MultiIndex = [u8; MAX_VARS];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JetConfig {
    num_vars: usize,
    max_order: usize,
}

impl JetConfig {
    pub fn new(num_vars: usize, max_order: usize) -> Result<Self> {
        if !(1..=MAX_VARS).contains(&num_vars) {
            return Err(Error::Config(format!(
                "jet variable count {num_vars} outside 1..={MAX_VARS}"
            )));
        }
        if !(1..=MAX_ORDER).contains(&max_order) {
            return Err(Error::Config(format!(
                "jet order {max_order} outside 1..={MAX_ORDER}"
            )));
        }
        Ok(Self {
            num_vars,
            max_order,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of multi-indices of total degree `<= max_order`.
    pub fn len(&self) -> usize {
        binomial(self.num_vars + self.max_order, self.max_order) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same variables, lower order. Order 0 is allowed here: it is what a
    /// first-order jet differentiates into.
    fn with_order(self, max_order: usize) -> Self {
        Self {
            num_vars: self.num_vars,
            max_order,
        }
    }

    fn tables(&self) -> &'static JetTables {
        #[allow(clippy::declare_interior_mutable_const)]
        const EMPTY: OnceLock<JetTables> = OnceLock::new();
        #[allow(clippy::declare_interior_mutable_const)]
        const ROW: [OnceLock<JetTables>; MAX_ORDER + 1] = [EMPTY; MAX_ORDER + 1];
        static TABLES: [[OnceLock<JetTables>; MAX_ORDER + 1]; MAX_VARS + 1] = [ROW; MAX_VARS + 1];
        TABLES[self.num_vars][self.max_order].get_or_init(|| JetTables::build(*self))
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

fn pack(alpha: &MultiIndex) -> u32 {
    alpha
        .iter()
        .enumerate()
        .fold(0u32, |key, (i, &a)| key | (a as u32) << (3 * i))
}

struct JetTables {
    config: JetConfig,
    indices: Vec<MultiIndex>,
    lookup: std::collections::HashMap<u32, usize>,
    /// Leibniz terms for output `g` live in `terms[offsets[g]..offsets[g + 1]]`.
    offsets: Vec<usize>,
    terms: Vec<(u32, u32, f64)>,
    /// `raise[v][i]` is the index of `indices[i] + e_v`, for every `i` in the
    /// order `max_order - 1` prefix.
    raise: Vec<Vec<usize>>,
}

impl JetTables {
    fn build(config: JetConfig) -> Self {
        let n = config.num_vars;
        let k = config.max_order;
        let mut indices = Vec::new();
        for degree in 0..=k {
            let mut alpha = [0u8; MAX_VARS];
            push_degree(&mut indices, &mut alpha, 0, n, degree);
        }
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (pack(a), i))
            .collect::<std::collections::HashMap<_, _>>();

        let mut offsets = Vec::with_capacity(indices.len() + 1);
        let mut terms = Vec::new();
        for gamma in &indices {
            offsets.push(terms.len());
            for (ia, alpha) in indices.iter().enumerate() {
                if (0..n).any(|v| alpha[v] > gamma[v]) {
                    continue;
                }
                let mut beta = [0u8; MAX_VARS];
                let mut weight = 1.0;
                for v in 0..n {
                    beta[v] = gamma[v] - alpha[v];
                    weight *= binomial(gamma[v] as usize, alpha[v] as usize) as f64;
                }
                terms.push((ia as u32, lookup[&pack(&beta)] as u32, weight));
            }
        }
        offsets.push(terms.len());

        let lower = if k == 0 {
            0
        } else {
            config.with_order(k - 1).len()
        };
        let raise = (0..n)
            .map(|v| {
                indices[..lower]
                    .iter()
                    .map(|alpha| {
                        let mut up = *alpha;
                        up[v] += 1;
                        lookup[&pack(&up)]
                    })
                    .collect()
            })
            .collect();

        Self {
            config,
            indices,
            lookup,
            offsets,
            terms,
            raise,
        }
    }

    fn index_of(&self, multi_index: &[usize]) -> Result<usize> {
        if multi_index.len() != self.config.num_vars {
            return Err(Error::Config(format!(
                "multi-index of length {} for a jet over {} variables",
                multi_index.len(),
                self.config.num_vars
            )));
        }
        let total: usize = multi_index.iter().sum();
        if total > self.config.max_order {
            return Err(Error::Config(format!(
                "derivative order {total} exceeds jet order {}",
                self.config.max_order
            )));
        }
        let mut alpha = [0u8; MAX_VARS];
        for (slot, &a) in alpha.iter_mut().zip(multi_index) {
            *slot = a as u8;
        }
        Ok(self.lookup[&pack(&alpha)])
    }
}

// Within one degree, earlier variables carry the larger exponents first.
fn push_degree(
    out: &mut Vec<MultiIndex>,
    alpha: &mut MultiIndex,
    var: usize,
    num_vars: usize,
    remaining: usize,
) {
    if var + 1 == num_vars {
        alpha[var] = remaining as u8;
        out.push(*alpha);
        alpha[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        alpha[var] = e as u8;
        push_degree(out, alpha, var + 1, num_vars, remaining - e);
    }
    alpha[var] = 0;
}

/// A truncated Taylor jet whose coefficients are the partial derivatives of
/// the represented quantity at the expansion point.
#[derive(Clone)]
pub struct JetScalar {
    tables: &'static JetTables,
    coeffs: Vec<f64>,
}

impl fmt::Debug for JetScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetScalar")
            .field("config", &self.tables.config)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for JetScalar {
    fn eq(&self, other: &Self) -> bool {
        self.tables.config == other.tables.config && self.coeffs == other.coeffs
    }
}

impl JetScalar {
    pub fn constant(config: JetConfig, value: f64) -> Self {
        let tables = config.tables();
        let mut coeffs = vec![0.0; tables.indices.len()];
        coeffs[0] = value;
        Self { tables, coeffs }
    }

    /// The seed variable `var` evaluated at `value`.
    pub fn variable(config: JetConfig, var: usize, value: f64) -> Result<Self> {
        if var >= config.num_vars {
            return Err(Error::Config(format!(
                "seed variable {var} out of range for {} variables",
                config.num_vars
            )));
        }
        let mut jet = Self::constant(config, value);
        if config.max_order >= 1 {
            let mut alpha = vec![0; config.num_vars];
            alpha[var] = 1;
            let idx = jet.tables.index_of(&alpha)?;
            jet.coeffs[idx] = 1.0;
        }
        Ok(jet)
    }

    /// One jet per coordinate of `point`, each with unit derivative in its
    /// own variable.
    pub fn seed(point: &[f64], config: JetConfig) -> Result<Vec<Self>> {
        if point.len() != config.num_vars {
            return Err(Error::Config(format!(
                "seed point has {} coordinates but the jet has {} variables",
                point.len(),
                config.num_vars
            )));
        }
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Self::variable(config, i, v))
            .collect()
    }

    /// Builds a jet from raw derivative values in table order.
    pub fn from_coeffs(config: JetConfig, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != config.len() {
            return Err(Error::Config(format!(
                "expected {} coefficients, got {}",
                config.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            tables: config.tables(),
            coeffs,
        })
    }

    pub fn config(&self) -> JetConfig {
        self.tables.config
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-index of coefficient `i` in table order.
    pub fn multi_index(config: JetConfig, i: usize) -> Vec<usize> {
        config.tables().indices[i][..config.num_vars]
            .iter()
            .map(|&a| a as usize)
            .collect()
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// The mixed partial derivative for `multi_index` (exponent per variable).
    pub fn extract(&self, multi_index: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.tables.index_of(multi_index)?])
    }

    /// The mixed partial with respect to the listed variables, e.g. `&[0, 0, 3]`
    /// is the third derivative twice in variable 0 and once in variable 3.
    pub fn partial(&self, vars: &[usize]) -> Result<f64> {
        let mut alpha = vec![0; self.tables.config.num_vars];
        for &v in vars {
            if v >= alpha.len() {
                return Err(Error::Config(format!("variable {v} out of range")));
            }
            alpha[v] += 1;
        }
        self.extract(&alpha)
    }

    /// The jet of `∂/∂x_var` of this quantity, one order lower.
    pub fn derivative(&self, var: usize) -> Self {
        let config = self.tables.config;
        assert!(var < config.num_vars, "derivative variable out of range");
        assert!(config.max_order > 0, "cannot differentiate an order-0 jet");
        let tables = config.with_order(config.max_order - 1).tables();
        let coeffs = self.tables.raise[var]
            .iter()
            .map(|&i| self.coeffs[i])
            .collect();
        Self { tables, coeffs }
    }

    /// Drops every derivative above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let config = self.tables.config;
        assert!(order <= config.max_order, "cannot raise jet order");
        let tables = config.with_order(order).tables();
        Self {
            tables,
            coeffs: self.coeffs[..tables.indices.len()].to_vec(),
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.tables.config, other.tables.config,
            "jet configuration mismatch"
        );
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.check_same(other);
        let t = self.tables;
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (g, out) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(a, b, w) in &t.terms[t.offsets[g]..t.offsets[g + 1]] {
                acc += w * self.coeffs[a as usize] * other.coeffs[b as usize];
            }
            *out = acc;
        }
        Self { tables: t, coeffs }
    }

    /// Division by recursive solution of `w · v = u`, one graded coefficient
    /// at a time.
    pub fn checked_div(&self, divisor: &Self) -> Result<Self> {
        self.check_same(divisor);
        let v0 = divisor.coeffs[0];
        if v0 == 0.0 {
            return Err(Error::SingularJet);
        }
        let t = self.tables;
        let mut w = vec![0.0; self.coeffs.len()];
        for g in 0..w.len() {
            let mut acc = self.coeffs[g];
            for &(a, b, weight) in &t.terms[t.offsets[g]..t.offsets[g + 1]] {
                if b != 0 {
                    acc -= weight * w[a as usize] * divisor.coeffs[b as usize];
                }
            }
            w[g] = acc / v0;
        }
        Ok(Self {
            tables: t,
            coeffs: w,
        })
    }

    /// Composes a univariate function with this jet. `series[k]` must hold
    /// `f^(k)(c) / k!` at the constant term `c`; terms beyond the jet order
    /// are ignored.
    pub fn compose(&self, series: &[f64]) -> Self {
        let order = self.tables.config.max_order.min(series.len().saturating_sub(1));
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Self::constant(self.tables.config, series[order]);
        for k in (0..order).rev() {
            acc = acc.mul_ref(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn checked_sqrt(&self) -> Result<Self> {
        let c = self.coeffs[0];
        if c <= 0.0 {
            return Err(Error::Domain(format!(
                "sqrt of jet with non-positive constant term {c}"
            )));
        }
        // d^k/dc^k sqrt(c) / k! = binom(1/2, k) c^(1/2 - k)
        let mut series = [0.0; MAX_ORDER + 1];
        let mut coef = 1.0;
        let root = c.sqrt();
        for (k, s) in series.iter_mut().enumerate() {
            *s = coef * root / c.powi(k as i32);
            coef *= (0.5 - k as f64) / (k + 1) as f64;
        }
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.coeffs[0].sin_cos();
        self.compose(&[s, c, -s / 2.0, -c / 6.0, s / 24.0])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.coeffs[0].sin_cos();
        self.compose(&[c, -s, -c / 2.0, s / 6.0, c / 24.0])
    }

    fn map(mut self, f: impl Fn(f64) -> f64) -> Self {
        for c in &mut self.coeffs {
            *c = f(*c);
        }
        self
    }
}

impl Add<&JetScalar> for &JetScalar {
    type Output = JetScalar;
    fn add(self, rhs: &JetScalar) -> JetScalar {
        self.check_same(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        JetScalar {
            tables: self.tables,
            coeffs,
        }
    }
}

impl Sub<&JetScalar> for &JetScalar {
    type Output = JetScalar;
    fn sub(self, rhs: &JetScalar) -> JetScalar {
        self.check_same(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        JetScalar {
            tables: self.tables,
            coeffs,
        }
    }
}

impl Mul<&JetScalar> for &JetScalar {
    type Output = JetScalar;
    fn mul(self, rhs: &JetScalar) -> JetScalar {
        self.mul_ref(rhs)
    }
}

/// Panics on a divisor with zero constant term; use
/// [`JetScalar::checked_div`] when that can happen.
impl Div<&JetScalar> for &JetScalar {
    type Output = JetScalar;
    fn div(self, rhs: &JetScalar) -> JetScalar {
        self.checked_div(rhs).expect("jet division by a singular jet")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<JetScalar> for JetScalar {
            type Output = JetScalar;
            fn $m(self, rhs: JetScalar) -> JetScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&JetScalar> for JetScalar {
            type Output = JetScalar;
            fn $m(self, rhs: &JetScalar) -> JetScalar {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for JetScalar {
    type Output = JetScalar;
    fn neg(self) -> JetScalar {
        self.map(|c| -c)
    }
}

impl Neg for &JetScalar {
    type Output = JetScalar;
    fn neg(self) -> JetScalar {
        self.clone().map(|c| -c)
    }
}

impl Add<f64> for JetScalar {
    type Output = JetScalar;
    fn add(mut self, rhs: f64) -> JetScalar {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for JetScalar {
    type Output = JetScalar;
    fn sub(mut self, rhs: f64) -> JetScalar {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for JetScalar {
    type Output = JetScalar;
    fn mul(self, rhs: f64) -> JetScalar {
        self.map(|c| c * rhs)
    }
}

impl Div<f64> for JetScalar {
    type Output = JetScalar;
    fn div(self, rhs: f64) -> JetScalar {
        self.map(|c| c / rhs)
    }
}

impl Scalar for JetScalar {
    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn lift(&self, c: f64) -> Self {
        JetScalar::constant(self.tables.config, c)
    }

    fn try_sqrt(&self) -> Result<Self> {
        self.checked_sqrt()
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.checked_div(rhs)
    }

    fn sin(&self) -> Self {
        JetScalar::sin(self)
    }

    fn cos(&self) -> Self {
        JetScalar::cos(self)
    }

    fn square(&self) -> Self {
        self.mul_ref(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use proptest::prelude::*;

    fn cfg(n: usize, k: usize) -> JetConfig {
        JetConfig::new(n, k).unwrap()
    }

    #[test]
    fn table_sizes() {
        assert_eq!(cfg(8, 4).len(), 495);
        assert_eq!(cfg(4, 2).len(), 15);
        assert_eq!(cfg(1, 1).len(), 2);
        assert!(JetConfig::new(9, 2).is_err());
        assert!(JetConfig::new(2, 5).is_err());
        assert!(JetConfig::new(0, 1).is_err());
    }

    #[test]
    fn square_of_seed() {
        let x = &JetScalar::seed(&[3.0], cfg(1, 2)).unwrap()[0];
        let sq = x * x;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.partial(&[0]).unwrap(), 6.0);
        assert_eq!(sq.partial(&[0, 0]).unwrap(), 2.0);
    }

    #[test]
    fn product_mixed_partial() {
        let v = JetScalar::seed(&[1.5, -2.0], cfg(2, 2)).unwrap();
        let p = &v[0] * &v[1];
        assert_eq!(p.partial(&[0, 1]).unwrap(), 1.0);
        assert_eq!(p.partial(&[0, 0]).unwrap(), 0.0);
        assert_eq!(p.partial(&[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_of_seed() {
        let x = &JetScalar::seed(&[2.0], cfg(1, 3)).unwrap()[0];
        let r = x.checked_sqrt().unwrap();
        assert!((r.value() - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.partial(&[0]).unwrap() - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn seed_length_mismatch() {
        assert!(matches!(
            JetScalar::seed(&[1.0, 2.0], cfg(3, 2)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn constant_products() {
        let p = JetScalar::constant(cfg(3, 4), 4.0) * JetScalar::constant(cfg(3, 4), 0.5);
        assert_eq!(p.value(), 2.0);
        assert!(p.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn geometric_series_quotient() {
        let t = JetScalar::variable(cfg(1, 2), 0, 0.0).unwrap();
        let q = (t.clone() + 1.0).checked_div(&(-t + 1.0)).unwrap();
        assert_eq!(q.value(), 1.0);
        assert_eq!(q.partial(&[0]).unwrap(), 2.0);
        assert_eq!(q.partial(&[0, 0]).unwrap(), 4.0);
    }

    #[test]
    fn division_by_singular_jet() {
        let t = JetScalar::variable(cfg(1, 2), 0, 0.0).unwrap();
        assert_eq!(
            JetScalar::constant(cfg(1, 2), 1.0).checked_div(&t),
            Err(Error::SingularJet)
        );
    }

    #[test]
    fn sqrt_domain() {
        assert!(matches!(
            JetScalar::constant(cfg(2, 2), 0.0).checked_sqrt(),
            Err(Error::Domain(_))
        ));
        let r = JetScalar::constant(cfg(2, 2), 4.0).checked_sqrt().unwrap();
        assert_eq!(r.value(), 2.0);
        assert!(r.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sine_maclaurin() {
        let t = JetScalar::variable(cfg(1, 4), 0, 0.0).unwrap();
        let s = t.sin();
        assert_eq!(s.value(), 0.0);
        assert_eq!(s.partial(&[0]).unwrap(), 1.0);
        assert_eq!(s.partial(&[0, 0]).unwrap(), 0.0);
        assert_eq!(s.partial(&[0, 0, 0]).unwrap(), -1.0);
        let c = t.cos();
        assert_eq!(c.partial(&[0, 0]).unwrap(), -1.0);
        assert_eq!(c.partial(&[0, 0, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn extract_rules() {
        let k = JetScalar::constant(cfg(2, 3), 7.0);
        assert_eq!(k.extract(&[1, 2]).unwrap(), 0.0);
        assert!(k.extract(&[2, 2]).is_err());
        assert!(k.extract(&[1]).is_err());

        let v = JetScalar::seed(&[0.7, -1.3], cfg(2, 3)).unwrap();
        let x2y = &(&v[0] * &v[0]) * &v[1];
        assert_eq!(x2y.extract(&[2, 1]).unwrap(), 2.0);
    }

    #[test]
    fn derivative_and_truncate() {
        let v = JetScalar::seed(&[0.5, 2.0], cfg(2, 3)).unwrap();
        // f = x^3 y
        let f = &(&(&v[0] * &v[0]) * &v[0]) * &v[1];
        let fx = f.derivative(0);
        assert_eq!(fx.config().max_order(), 2);
        assert!((fx.value() - 3.0 * 0.25 * 2.0).abs() < 1e-15);
        assert!((fx.partial(&[0]).unwrap() - 6.0 * 0.5 * 2.0).abs() < 1e-15);
        assert!((fx.partial(&[0, 1]).unwrap() - 6.0 * 0.5).abs() < 1e-15);
        let t = f.truncate(1);
        assert_eq!(t.coeffs(), &f.coeffs()[..3]);
    }

    #[test]
    fn sqrt_one_plus_square_matches_fd() {
        let f = |t: f64| (1.0 + t * t).sqrt();
        for &t0 in &[-0.8, 0.3, 1.7] {
            let t = JetScalar::variable(cfg(1, 2), 0, t0).unwrap();
            let jet = (&t * &t + 1.0).checked_sqrt().unwrap();
            let d1 = fd::first(f, t0);
            let d2 = fd::second(f, t0);
            assert!((jet.partial(&[0]).unwrap() - d1).abs() < 1e-8 * d1.abs().max(1.0));
            assert!((jet.partial(&[0, 0]).unwrap() - d2).abs() < 1e-6 * d2.abs().max(1.0));
        }
    }

    fn random_jet(config: JetConfig, raw: &[f64]) -> JetScalar {
        let coeffs = raw.iter().cycle().take(config.len()).copied().collect();
        JetScalar::from_coeffs(config, coeffs).unwrap()
    }

    fn factorial_weight(config: JetConfig, i: usize) -> f64 {
        JetScalar::multi_index(config, i)
            .iter()
            .map(|&a| (1..=a).product::<usize>() as f64)
            .product()
    }

    /// Jet whose Taylor coefficients (derivative / α!) are taken from `raw`.
    fn taylor_jet(config: JetConfig, raw: &[f64], constant: Option<f64>) -> JetScalar {
        let mut coeffs: Vec<f64> = (0..config.len())
            .map(|i| raw[i % raw.len()] * factorial_weight(config, i))
            .collect();
        if let Some(c) = constant {
            coeffs[0] = c;
        }
        JetScalar::from_coeffs(config, coeffs).unwrap()
    }

    /// Max error over Taylor coefficients, relative to the largest Taylor
    /// coefficient of `exact`.
    fn taylor_rel_err(got: &JetScalar, exact: &JetScalar) -> f64 {
        let c = exact.config();
        let mut scale: f64 = 0.0;
        let mut err: f64 = 0.0;
        for i in 0..c.len() {
            let w = factorial_weight(c, i);
            scale = scale.max((exact.coeffs()[i] / w).abs());
            err = err.max(((got.coeffs()[i] - exact.coeffs()[i]) / w).abs());
        }
        err / scale.max(1e-300)
    }

    fn rel_close(a: &JetScalar, b: &JetScalar, tol: f64) -> bool {
        let scale = a
            .coeffs()
            .iter()
            .chain(b.coeffs())
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(1e-300);
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(
            u in prop::collection::vec(-1.0f64..1.0, 35),
            v in prop::collection::vec(-1.0f64..1.0, 35),
            w in prop::collection::vec(-1.0f64..1.0, 35),
        ) {
            let c = cfg(3, 4);
            let (u, v, w) = (random_jet(c, &u), random_jet(c, &v), random_jet(c, &w));
            prop_assert!(rel_close(&(&u * &v), &(&v * &u), 1e-14));
            prop_assert!(rel_close(&(&(&u * &v) * &w), &(&u * &(&v * &w)), 1e-14));
        }

        #[test]
        fn division_inverts_multiplication(
            u in prop::collection::vec(-1.0f64..1.0, 35),
            v in prop::collection::vec(-1.0f64..1.0, 35),
            v0 in prop_oneof![0.1f64..1.0, -1.0f64..-0.1],
            shape in prop_oneof![Just((4usize, 3usize)), Just((2, 4)), Just((4, 2)), Just((1, 4))],
        ) {
            let c = cfg(shape.0, shape.1);
            let u = taylor_jet(c, &u, None);
            let v = taylor_jet(c, &v, Some(v0));
            let back = (&u * &v).checked_div(&v).unwrap();
            prop_assert!(taylor_rel_err(&back, &u) < 1e-12);
        }

        // Four variables at order 4: rounding of the product is amplified by
        // the Taylor coefficients of 1/v (up to ~1e5 for |v0| = 0.1), so the
        // attainable bound is a few 1e-12.
        #[test]
        fn division_inverts_multiplication_order4(
            u in prop::collection::vec(-1.0f64..1.0, 70),
            v in prop::collection::vec(-1.0f64..1.0, 70),
            v0 in prop_oneof![0.1f64..1.0, -1.0f64..-0.1],
        ) {
            let c = cfg(4, 4);
            let u = taylor_jet(c, &u, None);
            let v = taylor_jet(c, &v, Some(v0));
            let back = (&u * &v).checked_div(&v).unwrap();
            prop_assert!(taylor_rel_err(&back, &u) < 1e-10);
        }

        // Polynomial programs: every partial equals the analytic expansion
        // Σ_α c_α · α!/(α−β)! · x^(α−β).
        #[test]
        fn polynomial_programs_are_exact(
            coef in prop::collection::vec(-1.0f64..1.0, 70),
            point in prop::collection::vec(-1.5f64..1.5, 4),
        ) {
            let c = cfg(4, 4);
            let seeds = JetScalar::seed(&point, c).unwrap();
            let mut p = JetScalar::constant(c, 0.0);
            for (i, &ci) in coef.iter().enumerate() {
                let alpha = JetScalar::multi_index(c, i);
                let mut mono = JetScalar::constant(c, ci);
                for (v, &e) in alpha.iter().enumerate() {
                    for _ in 0..e {
                        mono = &mono * &seeds[v];
                    }
                }
                p = &p + &mono;
            }
            for ib in 0..c.len() {
                let beta = JetScalar::multi_index(c, ib);
                let mut exact = 0.0;
                for (ia, &ca) in coef.iter().enumerate() {
                    let alpha = JetScalar::multi_index(c, ia);
                    if alpha.iter().zip(&beta).any(|(a, b)| b > a) {
                        continue;
                    }
                    let mut term = ca;
                    for v in 0..4 {
                        for k in 0..beta[v] {
                            term *= (alpha[v] - k) as f64;
                        }
                        term *= point[v].powi((alpha[v] - beta[v]) as i32);
                    }
                    exact += term;
                }
                let got = p.extract(&beta).unwrap();
                prop_assert!((got - exact).abs() <= 1e-13 * exact.abs().max(1.0), "{beta:?}: {got} vs {exact}");
            }
        }

        // f(x, y, z) = sqrt(1 + x² + y z) / (2 + x y) + sin(z) cos(x)
        #[test]
        fn smooth_compositions_match_fd(point in prop::collection::vec(-0.7f64..0.7, 3)) {
            let f64_eval = |p: &[f64]| {
                (1.0 + p[0] * p[0] + p[1] * p[2]).sqrt() / (2.0 + p[0] * p[1]) + p[2].sin() * p[0].cos()
            };
            let c = cfg(3, 2);
            let v = JetScalar::seed(&point, c).unwrap();
            let num = (&(&v[0] * &v[0]) + &(&v[1] * &v[2]) + 1.0).checked_sqrt().unwrap();
            let den = &v[0] * &v[1] + 2.0;
            let f = &num.checked_div(&den).unwrap() + &(&v[2].sin() * &v[0].cos());
            // FD rounding noise scales with |f| / h², so |f| floors the denominator.
            let floor = f.value().abs();
            for i in 0..3 {
                let d1 = fd::partial(f64_eval, &point, i);
                let got = f.partial(&[i]).unwrap();
                prop_assert!((got - d1).abs() <= 1e-5 * d1.abs().max(floor));
                for j in i..3 {
                    let d2 = fd::second_partial(f64_eval, &point, i, j);
                    let got = f.partial(&[i, j]).unwrap();
                    prop_assert!((got - d2).abs() <= 1e-5 * d2.abs().max(floor), "({i},{j}) {got} vs {d2}");
                }
            }
        }

        // Leibniz rule d(uv) = u dv + v du on the first-order coefficients.
        #[test]
        fn product_rule(
            u in prop::collection::vec(-1.0f64..1.0, 15),
            v in prop::collection::vec(-1.0f64..1.0, 15),
        ) {
            let c = cfg(4, 2);
            let (u, v) = (random_jet(c, &u), random_jet(c, &v));
            let p = &u * &v;
            for var in 0..4 {
                let lhs = p.partial(&[var]).unwrap();
                let rhs = u.value() * v.partial(&[var]).unwrap() + v.value() * u.partial(&[var]).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }
}
