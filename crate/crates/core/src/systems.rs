//! Benchmark dynamical systems: flows integrated with fixed-step RK4 and
//! maps iterated directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::points::PointCloud;
use crate::series::ScalarSeries;

/// States with any component beyond this magnitude count as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Right-hand side of an autonomous ODE `x' = f(x)`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    Lorenz63 { sigma: f64, rho: f64, beta: f64 },
    /// `k` sites on a periodic lattice with constant forcing.
    Lorenz96 { k: usize, forcing: f64 },
    Rossler { a: f64, b: f64, c: f64 },
}

impl Flow {
    pub fn lorenz63() -> Self {
        Flow::Lorenz63 {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }

    pub fn lorenz96(k: usize, forcing: f64) -> Self {
        Flow::Lorenz96 { k, forcing }
    }

    pub fn rossler() -> Self {
        Flow::Rossler {
            a: 0.15,
            b: 0.20,
            c: 10.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Flow::Lorenz63 { .. } => "lorenz63",
            Flow::Lorenz96 { .. } => "lorenz96",
            Flow::Rossler { .. } => "rossler",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Flow::Lorenz96 { k, forcing } => {
                if k < 4 {
                    return Err(Error::invalid(format!("lorenz96 requires K >= 4, got {k}")));
                }
                if !forcing.is_finite() {
                    return Err(Error::invalid("lorenz96 forcing must be finite"));
                }
            }
            Flow::Lorenz63 { sigma, rho, beta } => {
                if ![sigma, rho, beta].iter().all(|v| v.is_finite()) {
                    return Err(Error::invalid("lorenz63 parameters must be finite"));
                }
            }
            Flow::Rossler { a, b, c } => {
                if ![a, b, c].iter().all(|v| v.is_finite()) {
                    return Err(Error::invalid("rossler parameters must be finite"));
                }
            }
        }
        Ok(())
    }
}

impl VectorField for Flow {
    fn dim(&self) -> usize {
        match self {
            Flow::Lorenz63 { .. } | Flow::Rossler { .. } => 3,
            Flow::Lorenz96 { k, .. } => *k,
        }
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Flow::Lorenz63 { sigma, rho, beta } => {
                out[0] = sigma * (x[1] - x[0]);
                out[1] = x[0] * (rho - x[2]) - x[1];
                out[2] = x[0] * x[1] - beta * x[2];
            }
            Flow::Lorenz96 { k, forcing } => {
                for i in 0..k {
                    let next = x[(i + 1) % k];
                    let prev = x[(i + k - 1) % k];
                    let prev2 = x[(i + k - 2) % k];
                    out[i] = (next - prev2) * prev - x[i] + forcing;
                }
            }
            Flow::Rossler { a, b, c } => {
                out[0] = -x[1] - x[2];
                out[1] = x[0] + a * x[1];
                out[2] = b + x[2] * (x[0] - c);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub flow: Flow,
    pub dt: f64,
    pub steps: usize,
    pub transient: usize,
    pub observed_index: usize,
}

impl FlowSpec {
    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps <= self.transient {
            return Err(Error::invalid(format!(
                "steps ({}) must exceed transient ({})",
                self.steps, self.transient
            )));
        }
        if self.observed_index >= self.flow.dim() {
            return Err(Error::invalid(format!(
                "observed index {} out of range for a {}-dimensional state",
                self.observed_index,
                self.flow.dim()
            )));
        }
        Ok(())
    }
}

fn check_state(x: &[f64], step: usize) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::Divergence { step });
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta. Row 0 of the result is `x0`; each
/// following row advances one step of size `dt`.
pub fn integrate_rk4<F: VectorField + ?Sized>(field: &F, x0: &[f64], dt: f64, steps: usize) -> Result<PointCloud> {
    let d = field.dim();
    if x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x0.len(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    check_state(x0, 0)?;
    let mut data = Vec::with_capacity(steps * d);
    if steps == 0 {
        return PointCloud::from_flat(d, data);
    }
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    data.extend_from_slice(&x);
    for step in 1..steps {
        field.eval(&x, &mut k1);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        field.eval(&tmp, &mut k2);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        field.eval(&tmp, &mut k3);
        for i in 0..d {
            tmp[i] = x[i] + dt * k3[i];
        }
        field.eval(&tmp, &mut k4);
        for i in 0..d {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_state(&x, step)?;
        data.extend_from_slice(&x);
    }
    PointCloud::from_flat(d, data)
}

/// Post-transient state trajectory of a flow.
pub fn generate_flow_trajectory(spec: &FlowSpec, x0: &[f64]) -> Result<PointCloud> {
    spec.validate()?;
    let full = integrate_rk4(&spec.flow, x0, spec.dt, spec.steps)?;
    let keep: Vec<usize> = (spec.transient..spec.steps).collect();
    Ok(full.select(&keep))
}

/// Observed coordinate of the post-transient trajectory; length `steps - transient`.
pub fn generate_flow_trace(spec: &FlowSpec, x0: &[f64]) -> Result<ScalarSeries> {
    let traj = generate_flow_trajectory(spec, x0)?;
    let values = traj.iter().map(|p| p[spec.observed_index]).collect();
    ScalarSeries::with_interval(values, spec.dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Map {
    Henon { a: f64, b: f64 },
    Logistic { r: f64 },
}

impl Map {
    pub fn henon() -> Self {
        Map::Henon { a: 1.4, b: 0.3 }
    }

    pub fn logistic(r: f64) -> Self {
        Map::Logistic { r }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Map::Henon { .. } => "henon",
            Map::Logistic { .. } => "logistic",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Map::Henon { .. } => 2,
            Map::Logistic { .. } => 1,
        }
    }

    fn step(&self, x: &mut [f64]) {
        match *self {
            Map::Henon { a, b } => {
                let (xn, yn) = (x[0], x[1]);
                x[0] = 1.0 - a * xn * xn + yn;
                x[1] = b * xn;
            }
            Map::Logistic { r } => x[0] = r * x[0] * (1.0 - x[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub map: Map,
    pub x0: Vec<f64>,
    pub n: usize,
    pub transient: usize,
}

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        if self.x0.len() != self.map.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.map.dim(),
                actual: self.x0.len(),
            });
        }
        if self.n <= self.transient {
            return Err(Error::invalid(format!(
                "n ({}) must exceed transient ({})",
                self.n, self.transient
            )));
        }
        match self.map {
            Map::Logistic { r } => {
                if !(r > 0.0 && r <= 4.0) {
                    return Err(Error::invalid(format!("logistic r must lie in (0, 4], got {r}")));
                }
                if !(0.0..=1.0).contains(&self.x0[0]) {
                    return Err(Error::invalid("logistic x0 must lie in [0, 1]"));
                }
            }
            Map::Henon { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::invalid("henon parameters must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// First coordinate of the post-transient iterates; iterate 0 is `x0`.
pub fn generate_map_trace(spec: &MapSpec) -> Result<ScalarSeries> {
    spec.validate()?;
    let mut x = spec.x0.clone();
    check_state(&x, 0)?;
    let mut out = Vec::with_capacity(spec.n - spec.transient);
    for i in 0..spec.n {
        if i > 0 {
            spec.map.step(&mut x);
            check_state(&x, i)?;
        }
        if i >= spec.transient {
            out.push(x[0]);
        }
    }
    ScalarSeries::new(out)
}

/// Seeded initial condition in the basin of each benchmark system.
pub fn random_flow_initial(flow: &Flow, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *flow {
        Flow::Lorenz63 { .. } => vec![
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(10.0..40.0),
        ],
        Flow::Lorenz96 { k, forcing } => (0..k).map(|_| forcing + rng.random_range(-1.0..1.0)).collect(),
        Flow::Rossler { .. } => vec![
            10.0 + rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..1.0),
        ],
    }
}

pub fn random_map_initial(map: &Map, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match map {
        Map::Henon { .. } => vec![rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)],
        Map::Logistic { .. } => vec![rng.random_range(0.1..0.9)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_keeps_state() {
        let f = FnField::new(2, |_x: &[f64], out: &mut [f64]| out.fill(0.0));
        let t = integrate_rk4(&f, &[1.0, 2.0], 0.3, 5).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.iter().all(|p| p == [1.0, 2.0]));
    }

    #[test]
    fn exponential_growth_one_step() {
        let f = FnField::new(1, |x: &[f64], out: &mut [f64]| out[0] = x[0]);
        let t = integrate_rk4(&f, &[1.0], 0.1, 2).unwrap();
        assert!((t.point(1)[0] - 0.1f64.exp()).abs() < 1e-7);
        assert!((t.point(1)[0] - 1.1051709).abs() < 1e-7);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let f = FnField::new(1, |x: &[f64], out: &mut [f64]| out[0] = x[0]);
        let err = |dt: f64| (integrate_rk4(&f, &[1.0], dt, 2).unwrap().point(1)[0] - dt.exp()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!((28.0..=36.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lorenz63_stays_bounded() {
        let t = integrate_rk4(&Flow::lorenz63(), &[1.0, 1.0, 1.0], 1.0 / 64.0, 50_000).unwrap();
        let max_x = t.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
        assert!(max_x < 25.0, "max |x| = {max_x}");
    }

    #[test]
    fn divergence_names_step() {
        let f = FnField::new(1, |x: &[f64], out: &mut [f64]| out[0] = x[0] * x[0]);
        match integrate_rk4(&f, &[1.0], 0.1, 1000) {
            Err(Error::Divergence { step }) => assert!(step > 1 && step < 1000),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn flow_trace_lengths() {
        let spec = FlowSpec {
            flow: Flow::lorenz96(22, 5.0),
            dt: 1.0 / 64.0,
            steps: 60_000,
            transient: 10_000,
            observed_index: 0,
        };
        let x0 = random_flow_initial(&spec.flow, 7);
        assert_eq!(generate_flow_trace(&spec, &x0).unwrap().len(), 50_000);

        let spec = FlowSpec {
            flow: Flow::rossler(),
            dt: std::f64::consts::PI / 100.0,
            steps: 100_000,
            transient: 1_000,
            observed_index: 0,
        };
        assert_eq!(generate_flow_trace(&spec, &[10.0, 0.0, 0.0]).unwrap().len(), 99_000);

        let spec = FlowSpec {
            flow: Flow::lorenz63(),
            dt: 0.01,
            steps: 10,
            transient: 9,
            observed_index: 2,
        };
        assert_eq!(generate_flow_trace(&spec, &[1.0, 1.0, 1.0]).unwrap().len(), 1);
    }

    #[test]
    fn flow_spec_validation() {
        let mut spec = FlowSpec {
            flow: Flow::lorenz96(3, 5.0),
            dt: 0.01,
            steps: 10,
            transient: 0,
            observed_index: 0,
        };
        assert!(spec.validate().is_err());
        spec.flow = Flow::lorenz96(4, 5.0);
        assert!(spec.validate().is_ok());
        spec.observed_index = 4;
        assert!(spec.validate().is_err());
        spec.observed_index = 0;
        spec.transient = 10;
        assert!(spec.validate().is_err());
        assert!(matches!(
            generate_flow_trace(&FlowSpec { transient: 0, ..spec }, &[0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn logistic_hand_iteration() {
        let spec = MapSpec {
            map: Map::logistic(3.65),
            x0: vec![0.5],
            n: 3,
            transient: 0,
        };
        let v = generate_map_trace(&spec).unwrap();
        assert_eq!(v.values()[0], 0.5);
        assert!((v.values()[1] - 0.9125).abs() < 1e-15);
        assert!((v.values()[2] - 3.65 * 0.9125 * (1.0 - 0.9125)).abs() < 1e-15);
    }

    #[test]
    fn logistic_fixed_point() {
        let r = 3.65;
        let spec = MapSpec {
            map: Map::logistic(r),
            x0: vec![1.0 - 1.0 / r],
            n: 20,
            transient: 0,
        };
        let v = generate_map_trace(&spec).unwrap();
        assert!(v.values().iter().all(|x| (x - (1.0 - 1.0 / r)).abs() < 1e-12));
    }

    #[test]
    fn henon_attractor_is_bounded() {
        let spec = MapSpec {
            map: Map::henon(),
            x0: vec![0.0, 0.0],
            n: 10_000,
            transient: 1_000,
        };
        let v = generate_map_trace(&spec).unwrap();
        assert_eq!(v.len(), 9_000);
        assert!(v.values().iter().all(|x| x.abs() < 1.5));
    }

    #[test]
    fn henon_escape_is_divergence() {
        let spec = MapSpec {
            map: Map::henon(),
            x0: vec![5.0, 5.0],
            n: 100,
            transient: 0,
        };
        assert!(matches!(generate_map_trace(&spec), Err(Error::Divergence { .. })));
    }

    #[test]
    fn determinism() {
        let spec = FlowSpec {
            flow: Flow::lorenz63(),
            dt: 0.01,
            steps: 2_000,
            transient: 100,
            observed_index: 0,
        };
        let x0 = random_flow_initial(&spec.flow, 3);
        let a = generate_flow_trace(&spec, &x0).unwrap();
        let b = generate_flow_trace(&spec, &random_flow_initial(&spec.flow, 3)).unwrap();
        assert_eq!(a.values(), b.values());
    }

    proptest::proptest! {
        #[test]
        fn logistic_stays_in_unit_interval(r in 0.01f64..=4.0, x0 in 0.0f64..=1.0) {
            let spec = MapSpec { map: Map::logistic(r), x0: vec![x0], n: 500, transient: 0 };
            let v = generate_map_trace(&spec).unwrap();
            proptest::prop_assert!(v.values().iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}
