//! The master-equation right-hand side and its affine 3×3 form on the
//! coordinates `(f11, f12, f21)`, with `f22 = 1 - f11` eliminated.

use crate::model::{DensityMatrix, SystemSpec};
use crate::numerics::{Mat2, Mat3, Vec3, C64, I};

/// Coefficients of
///
/// ```text
/// ḟ11 = A f11 + B f22 + E f12 + E* f21
/// ḟ12 = G f11 + H f22 + J f12 + K f21
/// ```
///
/// (`ḟ22 = -ḟ11`, `ḟ21 = conj(ḟ12)` on Hermitian states). Units of energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCoefficients {
    pub a: C64,
    pub b: C64,
    pub e: C64,
    pub g: C64,
    pub h: C64,
    pub j: C64,
    pub k: C64,
}

pub fn coefficients(spec: &SystemSpec) -> RateCoefficients {
    let c2 = spec.c() * spec.c();
    let l = spec.l.l_matrix();
    let (l11, l12, l21, l22) = (l[(0, 0)], l[(0, 1)], l[(1, 0)], l[(1, 1)]);
    let h = &spec.h;
    let (e12, e21) = (h.eps12(), h.eps21());
    let de = h.delta_eps();

    RateCoefficients {
        a: C64::new(-c2 * l21.norm_sqr(), 0.0),
        b: C64::new(c2 * l12.norm_sqr(), 0.0),
        e: I * e21 + 0.5 * c2 * (l11 * l12.conj() - l22.conj() * l21),
        g: I * e12 + c2 * (l11 * l21.conj() - 0.5 * l11.conj() * l12 - 0.5 * l21.conj() * l22),
        h: -I * e12 + c2 * (l22.conj() * l12 - 0.5 * l11.conj() * l12 - 0.5 * l21.conj() * l22),
        j: -I * de
            + c2 * (l11 * l22.conj()
                - 0.5 * (l11.norm_sqr() + l22.norm_sqr() + l12.norm_sqr() + l21.norm_sqr())),
        k: c2 * l12 * l21.conj(),
    }
}

/// `d/dt (f11, f12, f21) = m · f + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineGenerator {
    pub m: Mat3,
    pub b: Vec3,
}

impl AffineGenerator {
    pub fn apply(&self, f: &Vec3) -> Vec3 {
        self.m.mul_vec(f) + self.b
    }
}

/// Unscaled generator: entries carry `ε_ij` and `c²` directly, so `c = 0` is
/// regular.
pub fn build_generator(spec: &SystemSpec) -> AffineGenerator {
    let r = coefficients(spec);
    let m = Mat3([
        [r.a - r.b, r.e, r.e.conj()],
        [r.g - r.h, r.j, r.k],
        [(r.g - r.h).conj(), r.k.conj(), r.j.conj()],
    ]);
    AffineGenerator { m, b: Vec3::new(r.b, r.h, r.h.conj()) }
}

/// `-i[H, ρ] + L ρ L† - ½{L†L, ρ}` for an arbitrary 2×2 `ρ`.
pub fn rhs_matrix(spec: &SystemSpec, rho: &Mat2) -> Mat2 {
    let h = spec.h.matrix();
    let l = spec.l.operator();
    let ld = l.dagger();
    (h.commutator(rho) * (-I)) + l * *rho * ld - (ld * l).anticommutator(rho) * 0.5
}

pub fn rhs(spec: &SystemSpec, rho: &DensityMatrix) -> Mat2 {
    rhs_matrix(spec, rho.matrix())
}

/// `(f11, f12, f21)` of a 2×2 matrix.
pub fn coords(m: &Mat2) -> Vec3 {
    Vec3::new(m[(0, 0)], m[(0, 1)], m[(1, 0)])
}

/// Unit-trace matrix from `(f11, f12, f21)`.
pub fn from_coords(f: &Vec3) -> Mat2 {
    Mat2::new(f[0], f[1], f[2], C64::new(1.0, 0.0) - f[0])
}

/// Traceless mode matrix `[[v1, v2], [v3, -v1]]`.
pub fn mode_matrix(v: &Vec3) -> Mat2 {
    Mat2::new(v[0], v[1], v[2], -v[0])
}

/// The antilinear map `(x11, x12, x21) -> (conj x11, conj x21, conj x12)`,
/// i.e. `X -> X†` on coordinates. The generator commutes with it.
pub fn adjoint_coords(v: &Vec3) -> Vec3 {
    Vec3::new(v[0].conj(), v[2].conj(), v[1].conj())
}
