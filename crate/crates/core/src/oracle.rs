//! Fixed-step RK4 integration of the master equation directly on 2×2
//! matrices, plus numeric scanners built on it.

use thiserror::Error;

use crate::generator::rhs_matrix;
use crate::model::{DensityMatrix, SystemSpec};
use crate::numerics::Mat2;

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid integrator config: {0}")]
    InvalidConfig(&'static str),
    #[error("step {dt} exceeds the stability gate {limit}")]
    StepGate { dt: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, record_stride: usize) -> Result<Self, OracleError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(OracleError::InvalidConfig("dt must be positive"));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(OracleError::InvalidConfig("t_end must be positive"));
        }
        if record_stride == 0 {
            return Err(OracleError::InvalidConfig("record_stride must be at least 1"));
        }
        Ok(IntegratorConfig { dt, t_end, record_stride })
    }
}

/// `0.1 / max(‖H‖, c² ‖l‖²)` with spectral norms.
pub fn step_limit(spec: &SystemSpec) -> f64 {
    let c2 = spec.c() * spec.c();
    let l = spec.l.l_matrix().spectral_norm();
    let rate = spec.h.matrix().spectral_norm().max(c2 * l * l);
    if rate == 0.0 {
        f64::INFINITY
    } else {
        0.1 / rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Mat2>,
    /// Step actually taken.
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Mat2) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }
}

pub fn rk4_step(spec: &SystemSpec, rho: &Mat2, dt: f64) -> Mat2 {
    let k1 = rhs_matrix(spec, rho);
    let k2 = rhs_matrix(spec, &(*rho + k1 * (dt / 2.0)));
    let k3 = rhs_matrix(spec, &(*rho + k2 * (dt / 2.0)));
    let k4 = rhs_matrix(spec, &(*rho + k3 * dt));
    *rho + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Advance `rho` by `span` in equal steps no longer than `dt`.
pub fn advance(spec: &SystemSpec, rho: &Mat2, span: f64, dt: f64) -> Mat2 {
    if span <= 0.0 {
        return *rho;
    }
    let n = (span / dt - 1e-9).ceil().max(1.0) as usize;
    let h = span / n as f64;
    (0..n).fold(*rho, |r, _| rk4_step(spec, &r, h))
}

/// Samples at `t = 0`, every `record_stride` steps, and at `t_end`.
pub fn integrate(spec: &SystemSpec, rho0: &DensityMatrix, cfg: &IntegratorConfig) -> Result<Trajectory, OracleError> {
    let limit = step_limit(spec);
    if cfg.dt > limit {
        return Err(OracleError::StepGate { dt: cfg.dt, limit });
    }
    let n = (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let h = cfg.t_end / n as f64;
    let mut times = vec![0.0];
    let mut states = vec![*rho0.matrix()];
    let mut rho = *rho0.matrix();
    for k in 1..=n {
        rho = rk4_step(spec, &rho, h);
        if k % cfg.record_stride == 0 || k == n {
            times.push(k as f64 * h);
            states.push(rho);
        }
    }
    Ok(Trajectory { times, states, dt: h })
}

/// State at `t` re-integrated from the nearest earlier sample.
pub fn state_at(spec: &SystemSpec, traj: &Trajectory, t: f64) -> Mat2 {
    let k = traj.times.partition_point(|&s| s <= t).saturating_sub(1);
    advance(spec, &traj.states[k], t - traj.times[k], traj.dt)
}

/// Largest Frobenius distance between the samples and `reference(t)`.
pub fn max_deviation<F: Fn(f64) -> Mat2>(traj: &Trajectory, reference: F) -> f64 {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (*s - reference(t)).frobenius())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotConvergedReason {
    ClosedSystem,
    TimeCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointerNumeric {
    Converged(DensityMatrix),
    NotConverged(NotConvergedReason),
}

/// Windows of `5/c²` examined before giving up.
const MAX_WINDOWS: usize = 200;

pub fn pointer_numeric(spec: &SystemSpec, rho0: &DensityMatrix, tol: f64) -> PointerNumeric {
    let c = spec.c();
    if c == 0.0 {
        return PointerNumeric::NotConverged(NotConvergedReason::ClosedSystem);
    }
    let window = 5.0 / (c * c);
    let dt = step_limit(spec).min(window / 50.0);
    let mut rho = *rho0.matrix();
    for _ in 0..MAX_WINDOWS {
        let next = advance(spec, &rho, window, dt);
        let moved = (next - rho).frobenius();
        rho = next;
        if moved < tol {
            return PointerNumeric::Converged(DensityMatrix::from_raw((rho + rho.dagger()) * 0.5));
        }
    }
    PointerNumeric::NotConverged(NotConvergedReason::TimeCap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetScan {
    /// Earliest time after which every sample has `det ≥ 0`.
    From(f64),
    NotFound,
}

const BISECTION_TOL: f64 = 1e-10;

pub fn det_scan(spec: &SystemSpec, traj: &Trajectory) -> DetScan {
    let dets: Vec<f64> = traj.states.iter().map(|s| s.det().re).collect();
    let Some(k) = dets.iter().rposition(|&d| d < 0.0) else {
        return DetScan::From(0.0);
    };
    if k + 1 == dets.len() {
        return DetScan::NotFound;
    }
    let (t0, rho0) = (traj.times[k], traj.states[k]);
    let (mut lo, mut hi) = (t0, traj.times[k + 1]);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if advance(spec, &rho0, mid - t0, traj.dt).det().re < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    DetScan::From(hi)
}
