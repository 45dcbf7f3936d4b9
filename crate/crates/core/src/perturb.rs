//! Weak-coupling expansions in `c²`.

use thiserror::Error;

use crate::model::{LindbladShape, SystemSpec};
use crate::numerics::{c64, coincide, Mat2, C64, I, ONE, ZERO};
use crate::spectral::{spectrum, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("the expansion needs a diagonal Hamiltonian (|ε12| = {0})")]
    NonDiagonalH(f64),
    #[error("the expansion needs ε11 ≠ ε22")]
    DegenerateSplitting,
    #[error("the expansion is defined for the diagonal and Jordan forms only")]
    UnsupportedForm,
    #[error("series order must be one of 2, 4, 6, 8 (got {0})")]
    UnsupportedOrder(u32),
    #[error("need at least three coupling values")]
    TooFewPoints,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `Λ = a0 + a1 c² + O(c⁴)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBranch {
    pub a0: C64,
    pub a1: C64,
}

impl RateBranch {
    pub fn eval(&self, c: f64) -> C64 {
        self.a0 + self.a1 * (c * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSeries {
    pub branches: [RateBranch; 3],
}

fn diagonal_h_splitting(spec: &SystemSpec) -> Result<f64, PerturbError> {
    if !coincide(spec.h.eps12(), ZERO) {
        return Err(PerturbError::NonDiagonalH(spec.h.eps12().norm()));
    }
    let de = spec.h.delta_eps();
    if coincide(c64(de, 0.0), ZERO) {
        return Err(PerturbError::DegenerateSplitting);
    }
    Ok(de)
}

pub fn weak_rates(spec: &SystemSpec) -> Result<RateSeries, PerturbError> {
    let de = diagonal_h_splitting(spec)?;
    let branches = match *spec.l.shape() {
        LindbladShape::Diagonal { lambda1, lambda2 } => {
            let a1 = -0.5 * (lambda1.norm_sqr() + lambda2.norm_sqr() - 2.0 * lambda1.conj() * lambda2);
            [
                RateBranch { a0: ZERO, a1: ZERO },
                RateBranch { a0: c64(0.0, de), a1 },
                RateBranch { a0: c64(0.0, -de), a1: a1.conj() },
            ]
        }
        LindbladShape::Jordan { .. } => [
            RateBranch { a0: ZERO, a1: c64(-1.0, 0.0) },
            RateBranch { a0: c64(0.0, de), a1: c64(-0.5, 0.0) },
            RateBranch { a0: c64(0.0, -de), a1: c64(-0.5, 0.0) },
        ],
        LindbladShape::General { .. } => return Err(PerturbError::UnsupportedForm),
    };
    Ok(RateSeries { branches })
}

/// Exact rates of `spec`, each matched to the nearest branch of `series`.
pub fn matched_rates(series: &RateSeries, spec: &SystemSpec) -> Result<[C64; 3], PerturbError> {
    let rates = spectrum(spec)?.rates();
    let c = spec.c();
    Ok(series.branches.map(|b| {
        let target = b.eval(c);
        *rates
            .iter()
            .min_by(|x, y| (**x - target).norm().total_cmp(&(**y - target).norm()))
            .unwrap()
    }))
}

/// Truncated pointer series for the Jordan form with diagonal `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerSeries {
    pub f11: C64,
    pub f12: C64,
    pub f21: C64,
    pub f22: C64,
}

impl PointerSeries {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.f11, self.f12, self.f21, self.f22)
    }
}

pub fn pointer_series(lambda: C64, delta_eps: f64, c: f64, order: u32) -> Result<PointerSeries, PerturbError> {
    if ![2, 4, 6, 8].contains(&order) {
        return Err(PerturbError::UnsupportedOrder(order));
    }
    if delta_eps == 0.0 {
        return Err(PerturbError::DegenerateSplitting);
    }
    let n2 = lambda.norm_sqr();
    let q = 0.5 * n2 + 0.25;
    let c2 = c * c;
    let sgn = |k: u32| if k % 2 == 0 { 1.0 } else { -1.0 };

    let mut s11 = 0.0;
    for k in (1..).take_while(|k| 4 * k <= order) {
        s11 += c2.powi(2 * k as i32) * sgn(k) * q.powi(k as i32 - 1) / delta_eps.powi(2 * k as i32);
    }
    let f11 = 1.0 + 0.25 * n2 * s11;

    let mut f12 = ZERO;
    for k in (1..).take_while(|k| 2 * k <= order) {
        let base = c2.powi(k as i32) / delta_eps.powi(k as i32);
        f12 += if k % 2 == 1 {
            0.5 * I * lambda.conj() * base * sgn((k - 1) / 2) * q.powi((k as i32 - 1) / 2)
        } else {
            0.25 * lambda.conj() * base * sgn(k / 2) * q.powi(k as i32 / 2 - 1)
        };
    }
    Ok(PointerSeries { f11: c64(f11, 0.0), f12, f21: f12.conj(), f22: c64(1.0 - f11, 0.0) })
}

/// Leading-order Jordan mode matrices for diagonal `H`, keyed by `a0`:
/// the slow mode (`a0 = 0`) and the pair `e^{±iΔε t}`.
pub fn leading_jordan_modes(lambda: C64, delta_eps: f64, c: f64) -> [(C64, Mat2); 3] {
    let r = lambda.conj() * (c * c / delta_eps);
    let slow = Mat2::new(ONE, I * r, -I * r.conj(), -ONE);
    let up = Mat2::new(-0.5 * I * r, ZERO, ONE, 0.5 * I * r);
    [(ZERO, slow), (c64(0.0, delta_eps), up), (c64(0.0, -delta_eps), up.dagger())]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderEstimate {
    Slope(f64),
    Saturated,
}

/// Errors at or below this are treated as round-off.
pub const SATURATION_LEVEL: f64 = 1e-13;

/// Least-squares slope of `log |exact(c) - approx(c)|` against `log c`.
pub fn order_estimate<E, A>(exact: E, approx: A, c_list: &[f64]) -> Result<OrderEstimate, PerturbError>
where
    E: Fn(f64) -> C64,
    A: Fn(f64) -> C64,
{
    if c_list.len() < 3 {
        return Err(PerturbError::TooFewPoints);
    }
    let pts: Vec<(f64, f64)> = c_list.iter().map(|&c| (c, (exact(c) - approx(c)).norm())).collect();
    if pts.iter().all(|&(_, e)| e <= SATURATION_LEVEL) {
        return Ok(OrderEstimate::Saturated);
    }
    let logs: Vec<(f64, f64)> =
        pts.iter().filter(|&&(_, e)| e > SATURATION_LEVEL).map(|&(c, e)| (c.ln(), e.ln())).collect();
    if logs.len() < 2 {
        return Ok(OrderEstimate::Saturated);
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(OrderEstimate::Slope(sxy / sxx))
}

/// Default weak-coupling grid.
pub const SMALL_C: [f64; 3] = [0.2, 0.1, 0.05];
