//! Analytic solution `ρ(t) = ρ_p + Σ_k P_k(t) e^{Λ_k t}` and the positivity
//! window of a single excited real mode.

use thiserror::Error;

use crate::generator::{coords, from_coords};
use crate::model::{DensityMatrix, SystemSpec};
use crate::numerics::{c64, solve3, Mat2, Mat3, Solve3, Vec3, C64};
use crate::pointer::{compute_pointer, hermitize, PointerError, PointerResult};
use crate::spectral::{spectrum, ModeDecomposition, SpectralError};

/// Amplitudes below this (times the chain-vector norm) count as unexcited.
pub const AMPLITUDE_TOL: f64 = 1e-10;
/// `min_eig` level above which a sampled state is flagged physical.
pub const PHYSICAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Pointer(#[from] PointerError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("mode vectors do not span the coordinate space")]
    SingularFit,
    #[error("solution is not a single real mode: {0}")]
    NotReducible(&'static str),
    #[error("positivity window needs a decaying mode (s3 = {0})")]
    NotDecaying(f64),
    #[error("pointer is not positive semidefinite")]
    NonPhysicalPointer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    pub pointer: PointerResult,
    /// Stationary part actually used; a member of the pointer family when the
    /// pointer is not unique.
    pub particular: DensityMatrix,
    pub modes: ModeDecomposition,
    /// One amplitude per chain vector, in mode order.
    pub amplitudes: Vec<C64>,
    pub initial: DensityMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: DensityMatrix,
    pub det: f64,
    pub min_eig: f64,
    pub physical: bool,
}

impl AnalyticSolution {
    /// `(mode index, chain index, amplitude)` triples.
    pub fn excitations(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.modes
            .modes
            .iter()
            .enumerate()
            .flat_map(|(k, m)| (0..m.vectors.len()).map(move |j| (k, j)))
            .zip(self.amplitudes.iter())
            .map(|((k, j), a)| (k, j, *a))
    }

    pub fn coords_at(&self, t: f64) -> Vec3 {
        let mut x = coords(self.particular.matrix());
        for (k, j, a) in self.excitations() {
            let mode = &self.modes.modes[k];
            let e = (mode.rate * t).exp() * a;
            let mut fact = 1.0;
            let mut pow = 1.0;
            for i in (0..=j).rev() {
                x = x + mode.vectors[i].scale(e * (pow / fact));
                let n = (j - i + 1) as f64;
                pow *= t;
                fact *= n;
            }
        }
        x
    }

    /// Hermitian, unit trace; positivity is not guaranteed.
    pub fn rho_at(&self, t: f64) -> DensityMatrix {
        DensityMatrix::from_raw(from_coords(&hermitize(&self.coords_at(t))))
    }

    pub fn trajectory(&self, times: &[f64]) -> Vec<TrajectoryPoint> {
        times
            .iter()
            .map(|&t| {
                let rho = self.rho_at(t);
                let min_eig = rho.min_eigenvalue();
                TrajectoryPoint { t, rho, det: rho.det(), min_eig, physical: min_eig >= -PHYSICAL_TOL }
            })
            .collect()
    }
}

/// `points` equally spaced times from `t_start` to `t_end` inclusive.
pub fn time_grid(t_start: f64, t_end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_start],
        n => (0..n).map(|k| t_start + (t_end - t_start) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn solve_ivp(spec: &SystemSpec, rho0: &DensityMatrix) -> Result<AnalyticSolution, EvolutionError> {
    let pointer = compute_pointer(spec)?;
    let modes = spectrum(spec)?;
    let particular = pointer.stationary_member();

    let cols: Vec<Vec3> = modes.modes.iter().flat_map(|m| m.vectors.iter().copied()).collect();
    let norms: Vec<f64> = cols.iter().map(|v| v.norm()).collect();
    if cols.len() != 3 || norms.contains(&0.0) {
        return Err(EvolutionError::SingularFit);
    }
    let unit = [0, 1, 2].map(|k| cols[k].scale(c64(1.0 / norms[k], 0.0)));
    let rhs = coords(rho0.matrix()) - coords(particular.matrix());
    let amplitudes = match solve3(&Mat3::from_columns(&unit), &rhs).map_err(SpectralError::from)? {
        Solve3::Unique(a) => (0..3).map(|k| a[k] / norms[k]).collect(),
        _ => return Err(EvolutionError::SingularFit),
    };
    Ok(AnalyticSolution { pointer, particular, modes, amplitudes, initial: *rho0 })
}

/// `ρ(t) = ρ_p ± w e^{s3 c² t} [[h, p e^{iβ/2}], [p e^{-iβ/2}, -h]]` with
/// `h² + p² = 1`, `h, p ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeReduction {
    pub w: f64,
    pub sign: f64,
    pub h: f64,
    pub p: f64,
    pub beta: f64,
    /// Scaled rate `Λ / c²`.
    pub s3: f64,
}

impl SingleModeReduction {
    pub fn mode_matrix(&self) -> Mat2 {
        let off = C64::from_polar(self.p, self.beta / 2.0);
        Mat2::new(c64(self.h, 0.0), off, off.conj(), c64(-self.h, 0.0))
    }
}

pub fn single_mode_reduction(sol: &AnalyticSolution) -> Result<SingleModeReduction, EvolutionError> {
    let excited: Vec<(usize, usize, C64)> = sol
        .excitations()
        .filter(|&(k, j, a)| a.norm() * sol.modes.modes[k].vectors[j].norm() > AMPLITUDE_TOL)
        .collect();
    let scale = sol.modes.scale;
    match excited.as_slice() {
        [] => {
            let s3 = sol
                .modes
                .modes
                .iter()
                .filter(|m| m.rate.im == 0.0 && m.rate.re < 0.0)
                .map(|m| m.rate.re / scale)
                .fold(f64::NEG_INFINITY, f64::max);
            let s3 = if s3.is_finite() { s3 } else { 0.0 };
            Ok(SingleModeReduction { w: 0.0, sign: 1.0, h: 0.0, p: 0.0, beta: 0.0, s3 })
        }
        [(k, 0, a)] => {
            let mode = &sol.modes.modes[*k];
            if mode.vectors.len() != 1 {
                return Err(EvolutionError::NotReducible("excited mode carries a polynomial chain"));
            }
            if mode.rate.im != 0.0 {
                return Err(EvolutionError::NotReducible("excited mode is complex"));
            }
            let v = hermitize(&mode.vectors[0].scale(*a));
            let (v00, v01) = (v[0].re, v[1]);
            let w = (v00 * v00 + v01.norm_sqr()).sqrt();
            let sign = if v00 >= 0.0 { 1.0 } else { -1.0 };
            let beta = if v01.norm() > 0.0 { 2.0 * (v01 * sign).arg() } else { 0.0 };
            Ok(SingleModeReduction { w, sign, h: v00.abs() / w, p: v01.norm() / w, beta, s3: mode.rate.re / scale })
        }
        _ => Err(EvolutionError::NotReducible("more than one mode excited")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t_min: f64,
    pub valid: bool,
}

/// Roots `x1 ≤ x2` of `det(ρ_p + x M) = 0`, or `None` when the quadratic is
/// degenerate.
pub fn det_quadratic_roots(pointer: &Mat2, m: &Mat2) -> Option<(f64, f64)> {
    let a2 = m.det().re;
    let a1 = (pointer[(0, 0)] * m[(1, 1)] + pointer[(1, 1)] * m[(0, 0)]
        - pointer[(0, 1)] * m[(1, 0)]
        - pointer[(1, 0)] * m[(0, 1)])
        .re;
    let a0 = pointer.det().re;
    if a2 == 0.0 {
        return None;
    }
    let disc = (a1 * a1 - 4.0 * a2 * a0).max(0.0).sqrt();
    let (r1, r2) = ((-a1 + disc) / (2.0 * a2), (-a1 - disc) / (2.0 * a2));
    Some((r1.min(r2), r1.max(r2)))
}

pub fn positivity_window(red: &SingleModeReduction, pointer: &DensityMatrix, c: f64) -> Result<TimeWindow, EvolutionError> {
    let all = TimeWindow { t_min: 0.0, valid: true };
    if red.w == 0.0 || (red.h == 0.0 && red.p == 0.0) {
        return Ok(all);
    }
    let rate = -red.s3 * c * c;
    if !(rate > 0.0) {
        return Err(EvolutionError::NotDecaying(red.s3));
    }
    if pointer.det() < -PHYSICAL_TOL {
        return Err(EvolutionError::NonPhysicalPointer);
    }
    let Some((x1, x2)) = det_quadratic_roots(pointer.matrix(), &red.mode_matrix()) else {
        return Ok(all);
    };
    let bound = if red.sign > 0.0 { x2 } else { -x1 };
    if bound <= 0.0 {
        return Ok(TimeWindow { t_min: f64::INFINITY, valid: false });
    }
    Ok(TimeWindow { t_min: ((red.w / bound).ln() / rate).max(0.0), valid: true })
}
