//! Stationary states ("pointers") of the master equation.

use thiserror::Error;

use crate::generator::{adjoint_coords, build_generator, from_coords, mode_matrix, rhs};
use crate::model::{DensityMatrix, LindbladShape, SystemSpec};
use crate::numerics::{c64, coincide, solve3, Mat2, Solve3, Vec3, C64, I, ONE, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointerError {
    #[error("stationary system is inconsistent")]
    Inconsistent,
    #[error("unexpected stationary family of real dimension {0}")]
    UnexpectedFamily(usize),
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
}

/// Which closed form or path produced a unique pointer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointerCase {
    MaximallyMixed,
    Jordan,
    DegenerateJordan,
    General,
}

impl PointerCase {
    pub fn label(&self) -> &'static str {
        match self {
            PointerCase::MaximallyMixed => "maximally mixed",
            PointerCase::Jordan => "Jordan",
            PointerCase::DegenerateJordan => "degenerate-H Jordan",
            PointerCase::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoAttractorReason {
    /// `c = 0`: pure Liouville dynamics.
    ClosedSystem,
}

/// `ρ(x) = base + x · direction` for real `x`; `direction` is traceless
/// Hermitian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFamily {
    pub base: Mat2,
    pub direction: Mat2,
}

impl LineFamily {
    pub fn at(&self, x: f64) -> DensityMatrix {
        DensityMatrix::from_raw(self.base + self.direction * x)
    }

    /// Interval of `x` on which `ρ(x)` is positive semidefinite.
    pub fn physical_range(&self) -> Option<(f64, f64)> {
        let (b, d) = (&self.base, &self.direction);
        let a2 = d.det().re;
        let a1 = (b[(0, 0)] * d[(1, 1)] + b[(1, 1)] * d[(0, 0)] - b[(0, 1)] * d[(1, 0)] - b[(1, 0)] * d[(0, 1)]).re;
        let a0 = b.det().re;
        if a2 >= 0.0 {
            return None;
        }
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let (r1, r2) = ((-a1 + sq) / (2.0 * a2), (-a1 - sq) / (2.0 * a2));
        Some((r1.min(r2), r1.max(r2)))
    }

    /// Member at `x`, clamped into the physical range when one exists.
    pub fn representative(&self, x: f64) -> DensityMatrix {
        match self.physical_range() {
            Some((lo, hi)) => self.at(x.clamp(lo, hi)),
            None => self.at(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointerResult {
    Unique { rho: DensityMatrix, case: PointerCase },
    /// Every `diag(f11, 1 - f11)` is stationary.
    DiagonalFamily,
    /// Every unit-trace Hermitian matrix is stationary.
    FullFamily,
    LineFamily(LineFamily),
    NoAttractor { reason: NoAttractorReason },
}

impl PointerResult {
    pub fn case_label(&self) -> &'static str {
        match self {
            PointerResult::Unique { case, .. } => case.label(),
            PointerResult::DiagonalFamily => "arbitrary diagonal matrix",
            PointerResult::FullFamily => "arbitrary unit-trace matrix",
            PointerResult::LineFamily(_) => "one-parameter family",
            PointerResult::NoAttractor { .. } => "closed system",
        }
    }

    pub fn unique(&self) -> Option<&DensityMatrix> {
        match self {
            PointerResult::Unique { rho, .. } => Some(rho),
            _ => None,
        }
    }

    /// A stationary Hermitian unit-trace member (for `NoAttractor`, `I/2`,
    /// which commutes with every Hamiltonian).
    pub fn stationary_member(&self) -> DensityMatrix {
        match self {
            PointerResult::Unique { rho, .. } => *rho,
            PointerResult::DiagonalFamily | PointerResult::FullFamily => DensityMatrix::maximally_mixed(),
            PointerResult::LineFamily(f) => {
                let x = f.physical_range().map(|(lo, hi)| (lo + hi) / 2.0).unwrap_or(0.0);
                f.at(x)
            }
            PointerResult::NoAttractor { .. } => DensityMatrix::maximally_mixed(),
        }
    }
}

/// Member of the diagonal family, `f11` clamped to `[0, 1]`.
pub fn diagonal_representative(f11: f64) -> DensityMatrix {
    DensityMatrix::from_bloch_parts(f11.clamp(0.0, 1.0), ZERO)
}

/// Member of the full family with the Bloch vector clamped to the unit ball.
pub fn full_representative(f11: f64, f12: C64) -> DensityMatrix {
    let r = [2.0 * f12.re, -2.0 * f12.im, 2.0 * f11 - 1.0];
    let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len <= 1.0 {
        DensityMatrix::from_bloch_parts(f11, f12)
    } else {
        DensityMatrix::from_bloch_parts(0.5 + (f11 - 0.5) / len, f12 / len)
    }
}

/// Closed-form Jordan pointer with `a = i e21 + λ/2`, `b = -1/2 - i Δe`.
pub fn jordan_pointer(lambda: C64, e21: C64, delta_e: f64) -> DensityMatrix {
    let a = I * e21 + lambda / 2.0;
    let b = c64(-0.5, -delta_e);
    let (a2, b2) = (a.norm_sqr(), b.norm_sqr());
    let gamma = 1.0 / (2.0 * a2 + b2);
    DensityMatrix::from_raw(Mat2::new(
        c64((a2 + b2) * gamma, 0.0),
        a.conj() * b.conj() * gamma,
        a * b * gamma,
        c64(a2 * gamma, 0.0),
    ))
}

/// Jordan pointer for `H ∝ I`; independent of `c`.
pub fn degenerate_jordan_pointer(lambda: C64) -> DensityMatrix {
    let n = lambda.norm_sqr();
    let g = 1.0 / (2.0 * n + 1.0);
    DensityMatrix::from_raw(Mat2::new(c64((n + 1.0) * g, 0.0), -lambda.conj() * g, -lambda * g, c64(n * g, 0.0)))
}

pub fn compute_pointer(spec: &SystemSpec) -> Result<PointerResult, PointerError> {
    let c = spec.c();
    if c == 0.0 {
        return Ok(PointerResult::NoAttractor { reason: NoAttractorReason::ClosedSystem });
    }
    let c2 = c * c;
    let h = &spec.h;
    match *spec.l.shape() {
        LindbladShape::Diagonal { lambda1, lambda2 } => {
            let eps21_zero = coincide(h.eps21(), ZERO);
            let equal = coincide(lambda1, lambda2);
            if eps21_zero {
                let b = c64(0.0, -h.delta_eps() / c2) + lambda1 * lambda2.conj()
                    - 0.5 * lambda1.norm_sqr()
                    - 0.5 * lambda2.norm_sqr();
                return Ok(if coincide(b, ZERO) {
                    PointerResult::FullFamily
                } else {
                    PointerResult::DiagonalFamily
                });
            }
            if equal {
                let de = h.delta_eps();
                if !coincide(c64(de, 0.0), ZERO) {
                    let r12 = h.eps12() / de;
                    let r21 = h.eps21() / de;
                    return Ok(PointerResult::LineFamily(LineFamily {
                        base: Mat2::new(ZERO, -r12, -r21, ONE),
                        direction: Mat2::new(ONE, 2.0 * r12, 2.0 * r21, -ONE),
                    }));
                }
                return general_pointer(spec);
            }
            Ok(PointerResult::Unique { rho: DensityMatrix::maximally_mixed(), case: PointerCase::MaximallyMixed })
        }
        LindbladShape::Jordan { lambda } => {
            if coincide(h.eps12(), ZERO) && coincide(c64(h.delta_eps(), 0.0), ZERO) {
                return Ok(PointerResult::Unique {
                    rho: degenerate_jordan_pointer(lambda),
                    case: PointerCase::DegenerateJordan,
                });
            }
            let rho = jordan_pointer(lambda, h.eps21() / c2, h.delta_eps() / c2);
            Ok(PointerResult::Unique { rho, case: PointerCase::Jordan })
        }
        LindbladShape::General { .. } => general_pointer(spec),
    }
}

/// `(v + v†) / 2` on coordinates.
pub(crate) fn hermitize(v: &Vec3) -> Vec3 {
    (*v + adjoint_coords(v)).scale(c64(0.5, 0.0))
}

/// Real basis of Hermitian-structured vectors spanning the same real space as
/// the Hermitian part of `span_C(basis)`.
pub(crate) fn hermitian_real_basis(basis: &[Vec3]) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for n in basis {
        let cands = [*n + adjoint_coords(n), (*n - adjoint_coords(n)).scale(I)];
        for cand in cands {
            let mut v = cand;
            for q in &out {
                let proj = q.inner(&v).re;
                v = v - q.scale(c64(proj, 0.0));
            }
            if v.norm() > 1e-6 * cand.norm().max(f64::MIN_POSITIVE) && v.norm() > 1e-12 {
                out.push(v.normalized());
            }
        }
    }
    out
}

fn general_pointer(spec: &SystemSpec) -> Result<PointerResult, PointerError> {
    let g = build_generator(spec);
    let rhs_vec = g.b.scale(c64(-1.0, 0.0));
    match solve3(&g.m, &rhs_vec)? {
        Solve3::Unique(x) => Ok(PointerResult::Unique {
            rho: DensityMatrix::from_raw(from_coords(&hermitize(&x))),
            case: PointerCase::General,
        }),
        Solve3::Inconsistent => Err(PointerError::Inconsistent),
        Solve3::Family { particular, nullspace } => {
            let base = from_coords(&hermitize(&particular));
            let dirs = hermitian_real_basis(&nullspace);
            match dirs.len() {
                1 => {
                    let d = mode_matrix(&dirs[0]);
                    let diagonal = |m: &Mat2| m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12;
                    if diagonal(&d) && diagonal(&base) {
                        Ok(PointerResult::DiagonalFamily)
                    } else {
                        Ok(PointerResult::LineFamily(LineFamily { base, direction: d }))
                    }
                }
                3 => Ok(PointerResult::FullFamily),
                k => Err(PointerError::UnexpectedFamily(k)),
            }
        }
    }
}

/// `‖rhs(spec, ρ)‖_F`.
pub fn pointer_residual(spec: &SystemSpec, rho: &DensityMatrix) -> f64 {
    rhs(spec, rho).frobenius()
}
