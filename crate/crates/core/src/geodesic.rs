//! Fixed-step RK4 geodesics of `ẍ^i = −2G^i(x, ẋ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finsler::{finsler_value, spray, FinslerMetric};
use crate::linalg::{self, Vec4, DIM};
use crate::riemann::{christoffel, MetricSpec};

/// Integration stops once `|W|²` reaches this value.
pub const EXIT_MARGIN: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub t: f64,
    pub x: Vec4,
    pub v: Vec4,
    pub finsler: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicTrace {
    pub metric: String,
    pub step: f64,
    pub step_count: usize,
    /// Set when the trajectory left `|W|² < EXIT_MARGIN` before `t_end`.
    pub exited_domain: bool,
    pub samples: Vec<TraceSample>,
}

impl GeodesicTrace {
    pub fn last(&self) -> Option<&TraceSample> {
        self.samples.last()
    }
}

type State = (Vec4, Vec4);

fn axpy(x: &Vec4, h: f64, d: &Vec4) -> Vec4 {
    std::array::from_fn(|i| x[i] + h * d[i])
}

fn rk4_step<A>(accel: &A, (x, v): &State, h: f64) -> Result<State>
where
    A: Fn(&Vec4, &Vec4) -> Result<Vec4>,
{
    let k1x = *v;
    let k1v = accel(x, v)?;
    let k2x = axpy(v, h / 2.0, &k1v);
    let k2v = accel(&axpy(x, h / 2.0, &k1x), &k2x)?;
    let k3x = axpy(v, h / 2.0, &k2v);
    let k3v = accel(&axpy(x, h / 2.0, &k2x), &k3x)?;
    let k4x = axpy(v, h, &k3v);
    let k4v = accel(&axpy(x, h, &k3x), &k4x)?;
    let comb = |a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4| -> Vec4 {
        std::array::from_fn(|i| (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) / 6.0)
    };
    Ok((axpy(x, h, &comb(&k1x, &k2x, &k3x, &k4x)), axpy(v, h, &comb(&k1v, &k2v, &k3v, &k4v))))
}

fn check_start(handle: &FinslerMetric, x0: &Vec4, v0: &Vec4, t_end: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::Usage("steps must be >= 1".into()));
    }
    if !t_end.is_finite() {
        return Err(Error::Usage(format!("t_end must be finite, got {t_end}")));
    }
    if v0.iter().all(|&c| c == 0.0) {
        return Err(Error::Usage("initial velocity must be non-zero".into()));
    }
    let w = handle.wind_norm_sq(x0);
    if !(w < 1.0) {
        return Err(Error::OutsideDomain { wind_norm_sq: w });
    }
    Ok(())
}

fn run<A>(handle: &FinslerMetric, accel: A, x0: &Vec4, v0: &Vec4, t_end: f64, steps: usize) -> Result<GeodesicTrace>
where
    A: Fn(&Vec4, &Vec4) -> Result<Vec4>,
{
    check_start(handle, x0, v0, t_end, steps)?;
    let h = t_end / steps as f64;
    let mut trace = GeodesicTrace {
        metric: handle.label(),
        step: h,
        step_count: 0,
        exited_domain: false,
        samples: Vec::with_capacity(steps + 1),
    };
    let mut state = (*x0, *v0);
    trace.samples.push(TraceSample {
        t: 0.0,
        x: state.0,
        v: state.1,
        finsler: finsler_value(handle, &state.0, &state.1)?,
    });
    for k in 1..=steps {
        let next = match rk4_step(&accel, &state, h) {
            Ok(s) => s,
            Err(Error::OutsideDomain { .. }) => {
                trace.exited_domain = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if !(handle.wind_norm_sq(&next.0) < EXIT_MARGIN) {
            trace.exited_domain = true;
            break;
        }
        state = next;
        trace.step_count = k;
        trace.samples.push(TraceSample {
            t: k as f64 * h,
            x: state.0,
            v: state.1,
            finsler: finsler_value(handle, &state.0, &state.1)?,
        });
    }
    Ok(trace)
}

/// Geodesic of the Randers metric through `(x0, v0)` on `[0, t_end]`.
pub fn integrate(handle: &FinslerMetric, x0: &Vec4, v0: &Vec4, t_end: f64, steps: usize) -> Result<GeodesicTrace> {
    let accel = |x: &Vec4, v: &Vec4| -> Result<Vec4> {
        if v.iter().all(|&c| c == 0.0) {
            return Ok([0.0; DIM]);
        }
        Ok(spray(handle, x, v)?.0.map(|g| -2.0 * g))
    };
    run(handle, accel, x0, v0, t_end, steps)
}

/// Geodesic of the Riemannian metric alone, from its Christoffel symbols.
pub fn integrate_riemannian(metric: &MetricSpec, x0: &Vec4, v0: &Vec4, t_end: f64, steps: usize) -> Result<GeodesicTrace> {
    let handle = FinslerMetric::riemannian(*metric);
    let accel = |x: &Vec4, v: &Vec4| -> Result<Vec4> { Ok(christoffel(metric, x)?.contract(v, v).map(|g| -g)) };
    run(&handle, accel, x0, v0, t_end, steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    pub max_drift: f64,
    pub relative: f64,
}

/// `max |F(t) − F(0)|` and its ratio to `F(0)`.
pub fn conservation_report(trace: &GeodesicTrace) -> Result<ConservationReport> {
    let first = trace
        .samples
        .first()
        .ok_or_else(|| Error::Usage("conservation report of an empty trace".into()))?;
    let max_drift = trace
        .samples
        .iter()
        .map(|s| (s.finsler - first.finsler).abs())
        .fold(0.0, f64::max);
    Ok(ConservationReport {
        max_drift,
        relative: max_drift / first.finsler,
    })
}

/// `|x_N − x_2N| / |x_2N − x_4N|` for endpoints computed with `N`, `2N` and
/// `4N` steps; close to 16 for a fourth-order method.
pub fn step_halving_ratio(handle: &FinslerMetric, x0: &Vec4, v0: &Vec4, t_end: f64, steps: usize) -> Result<f64> {
    let end = |n: usize| -> Result<Vec4> {
        let trace = integrate(handle, x0, v0, t_end, n)?;
        if trace.exited_domain {
            return Err(Error::Domain("geodesic left the domain during the step-halving study".into()));
        }
        Ok(trace.last().expect("non-empty").x)
    };
    let (e1, e2, e4) = (end(steps)?, end(2 * steps)?, end(4 * steps)?);
    let d = |a: &Vec4, b: &Vec4| linalg::norm(&std::array::from_fn(|i| a[i] - b[i]));
    Ok(d(&e1, &e2) / d(&e2, &e4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigation::NavigationParams;

    fn headline() -> FinslerMetric {
        FinslerMetric::navigation(&NavigationParams::new(1.0, 0.5, 0.5).unwrap())
    }

    const X0: Vec4 = [0.3, -0.2, 0.5, 0.1];
    const V0: Vec4 = [0.4, 0.7, -0.3, 0.2];

    #[test]
    fn flat_geodesics_are_straight() {
        let h = FinslerMetric::riemannian(MetricSpec::Flat);
        let trace = integrate(&h, &X0, &V0, 1.0, 50).unwrap();
        for s in &trace.samples {
            for i in 0..DIM {
                assert!((s.x[i] - (X0[i] + s.t * V0[i])).abs() < 1e-12);
            }
        }
        assert!(conservation_report(&trace).unwrap().max_drift < 1e-13);
    }

    #[test]
    fn bad_inputs() {
        let h = headline();
        assert!(matches!(integrate(&h, &X0, &V0, 1.0, 0), Err(Error::Usage(_))));
        assert!(matches!(integrate(&h, &X0, &[0.0; 4], 1.0, 10), Err(Error::Usage(_))));
        let flat_wind = FinslerMetric::navigation(&NavigationParams::new(0.0, 0.5, 0.5).unwrap());
        assert!(matches!(
            integrate(&flat_wind, &[3.0, 0.0, 0.0, 0.0], &V0, 1.0, 10),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn empty_and_single_traces() {
        let mut trace = integrate(&headline(), &X0, &V0, 0.1, 1).unwrap();
        trace.samples.truncate(1);
        assert_eq!(conservation_report(&trace).unwrap().max_drift, 0.0);
        trace.samples.clear();
        assert!(matches!(conservation_report(&trace), Err(Error::Usage(_))));
    }

    #[test]
    fn randers_speed_is_conserved() {
        let trace = integrate(&headline(), &X0, &V0, 1.0, 1000).unwrap();
        assert!(!trace.exited_domain);
        assert_eq!(trace.samples.len(), 1001);
        assert!(conservation_report(&trace).unwrap().relative < 1e-6);
    }

    #[test]
    fn fourth_order_convergence() {
        let r = step_halving_ratio(&headline(), &X0, &V0, 1.0, 20).unwrap();
        assert!((12.0..=20.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn zero_wind_matches_christoffel_integrator() {
        let spec = MetricSpec::taub_nut(1.0).unwrap();
        let a = integrate(&FinslerMetric::riemannian(spec), &X0, &V0, 1.0, 200).unwrap();
        let b = integrate_riemannian(&spec, &X0, &V0, 1.0, 200).unwrap();
        let (ea, eb) = (a.last().unwrap().x, b.last().unwrap().x);
        for i in 0..DIM {
            assert!((ea[i] - eb[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn riemannian_time_reversal() {
        let spec = MetricSpec::taub_nut(1.0).unwrap();
        let fwd = integrate_riemannian(&spec, &X0, &V0, 1.0, 400).unwrap();
        let end = fwd.last().unwrap();
        let back = integrate_riemannian(&spec, &end.x, &end.v.map(|c| -c), 1.0, 400).unwrap();
        let home = back.last().unwrap().x;
        for i in 0..DIM {
            assert!((home[i] - X0[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn leaving_the_domain_truncates() {
        let h = FinslerMetric::navigation(&NavigationParams::new(0.0, 1.0, 1.0).unwrap());
        let trace = integrate(&h, &[0.8, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], 5.0, 500).unwrap();
        assert!(trace.exited_domain);
        assert!(trace.step_count < 500);
        assert_eq!(trace.samples.len(), trace.step_count + 1);
    }
}
