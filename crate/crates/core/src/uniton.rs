//! Unitons: states on which the dissipative part vanishes, so that they
//! evolve unitarily.

use thiserror::Error;

use crate::model::{DensityMatrix, LindbladForm, SystemSpec};
use crate::numerics::{c64, nullspace, unitary_propagator, Mat2, C64, ZERO};

/// Flattening order of index pairs: (11, 12, 21, 22).
pub const INDEX_ORDER: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

const NULL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitonError {
    #[error("uniton nullspace of dimension {0} is not expected for a two-level system")]
    Unreachable(usize),
}

/// `A[(m,n)][(k,l)] = l_mk l̄_nl - ½ δ_ln Σ_s l̄_sm l_sk - ½ δ_km Σ_s l̄_sl l_sn`,
/// so that the dissipator is `D(ρ)_mn = Σ_kl A[(m,n)][(k,l)] f_kl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitonTensor(pub [[C64; 4]; 4]);

impl UnitonTensor {
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for (r, &(m, n)) in INDEX_ORDER.iter().enumerate() {
            out.0[m][n] = INDEX_ORDER.iter().enumerate().map(|(q, &(k, l))| self.0[r][q] * rho[(k, l)]).sum();
        }
        out
    }
}

pub fn uniton_tensor(l: &LindbladForm) -> UnitonTensor {
    let lm = l.l_matrix();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut a = [[ZERO; 4]; 4];
    for (r, &(m, n)) in INDEX_ORDER.iter().enumerate() {
        for (q, &(k, l)) in INDEX_ORDER.iter().enumerate() {
            let mut v = lm[(m, k)] * lm[(n, l)].conj();
            for s in 0..2 {
                v -= 0.5 * delta(l, n) * lm[(s, m)].conj() * lm[(s, k)];
                v -= 0.5 * delta(k, m) * lm[(s, l)].conj() * lm[(s, n)];
            }
            a[r][q] = v;
        }
    }
    UnitonTensor(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitonCandidate {
    Unique(DensityMatrix),
    /// `base + x · direction`.
    Family { base: Mat2, direction: Mat2 },
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitonVerdict {
    AllStates,
    StationaryPointerOnly { rho_u: DensityMatrix },
    None { candidate: UnitonCandidate },
}

impl UnitonVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            UnitonVerdict::AllStates => "AllStates",
            UnitonVerdict::StationaryPointerOnly { .. } => "StationaryPointerOnly",
            UnitonVerdict::None { .. } => "None",
        }
    }
}

fn to_mat(v: &[C64; 4]) -> Mat2 {
    Mat2::new(v[0], v[1], v[2], v[3])
}

/// Hermitian real basis of the complex span of `ms`.
fn hermitian_span(ms: &[Mat2]) -> Vec<Mat2> {
    let inner = |a: &Mat2, b: &Mat2| (a.dagger() * *b).trace().re;
    let mut out: Vec<Mat2> = Vec::new();
    for m in ms {
        for cand in [*m + m.dagger(), (*m - m.dagger()) * c64(0.0, 1.0)] {
            let mut v = cand;
            for q in &out {
                v = v - *q * inner(q, &v);
            }
            let n = v.frobenius();
            if n > 1e-6 * cand.frobenius().max(f64::MIN_POSITIVE) && n > 1e-12 {
                out.push(v * (1.0 / n));
            }
        }
    }
    out
}

/// `‖H‖`-relative commutation gate.
fn commutes(spec: &SystemSpec, rho: &Mat2) -> bool {
    let h = spec.h.matrix();
    h.commutator(rho).frobenius() < 1e-10 * h.frobenius().max(f64::MIN_POSITIVE)
}

pub fn classify_unitons(spec: &SystemSpec) -> Result<UnitonVerdict, UnitonError> {
    if spec.c() == 0.0 {
        return Ok(UnitonVerdict::AllStates);
    }
    let t = uniton_tensor(&spec.l);
    let kernel: Vec<Mat2> = nullspace(&t.0, NULL_TOL).iter().map(to_mat).collect();
    match kernel.len() {
        4 => Ok(UnitonVerdict::AllStates),
        3 => Err(UnitonError::Unreachable(3)),
        0 => Ok(UnitonVerdict::None { candidate: UnitonCandidate::Nothing }),
        _ => {
            let herm = hermitian_span(&kernel);
            // fix the trace to 1 on the real span
            let Some(pivot) = herm.iter().copied().max_by(|a, b| a.trace().re.abs().total_cmp(&b.trace().re.abs())) else {
                return Ok(UnitonVerdict::None { candidate: UnitonCandidate::Nothing });
            };
            if pivot.trace().re.abs() < 1e-12 {
                return Ok(UnitonVerdict::None { candidate: UnitonCandidate::Nothing });
            }
            let base = pivot * (1.0 / pivot.trace().re);
            let traceless: Vec<Mat2> = herm
                .iter()
                .map(|m| *m - base * m.trace().re)
                .filter(|m| m.frobenius() > 1e-9)
                .collect();
            match traceless.as_slice() {
                [] => {
                    let rho_u = DensityMatrix::from_raw(base);
                    if commutes(spec, &base) {
                        Ok(UnitonVerdict::StationaryPointerOnly { rho_u })
                    } else {
                        Ok(UnitonVerdict::None { candidate: UnitonCandidate::Unique(rho_u) })
                    }
                }
                [d, ..] => Ok(UnitonVerdict::None {
                    candidate: UnitonCandidate::Family { base, direction: *d * (1.0 / d.frobenius()) },
                }),
            }
        }
    }
}

/// Closed-form Jordan candidate `(|λ|²+1, -λ̄; -λ, |λ|²) / (2|λ|²+1)`.
pub fn jordan_candidate(lambda: C64) -> DensityMatrix {
    crate::pointer::degenerate_jordan_pointer(lambda)
}

/// `‖L ρ L† - ½{L†L, ρ}‖` for the full operator `L = c l`.
pub fn dissipator_norm(spec: &SystemSpec, rho: &Mat2) -> f64 {
    let l = spec.l.operator();
    let ld = l.dagger();
    (l * *rho * ld - (ld * l).anticommutator(rho) * 0.5).frobenius()
}

/// Largest dissipator norm along `ρ(t) = e^{-iHt} ρ e^{iHt}` over `samples`
/// points of `[0, t_max]`.
pub fn liouville_defect(spec: &SystemSpec, rho: &Mat2, t_max: f64, samples: usize) -> f64 {
    (0..samples.max(1))
        .map(|k| {
            let t = t_max * k as f64 / (samples.max(2) - 1) as f64;
            let u = unitary_propagator(spec.h.matrix(), t);
            dissipator_norm(spec, &(u * *rho * u.dagger()))
        })
        .fold(0.0, f64::max)
}
