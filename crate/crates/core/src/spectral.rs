//! Characteristic cubic, root classification and mode chains of the
//! homogeneous generator.

use thiserror::Error;

use crate::generator::{adjoint_coords, build_generator, mode_matrix};
use crate::model::{LindbladShape, SystemSpec};
use crate::numerics::{
    c64, coincide, cubic_roots, null_vector_forced, nullspace, rank, CubicRoots, Mat2, Mat3, NumericsError, Vec3,
    C64, I, ONE, ZERO,
};
use crate::pointer::hermitian_real_basis;

/// Pivot level (relative) separating a defective double/triple root from a
/// diagonalizable one.
const EIGEN_RANK_TOL: f64 = 1e-7;
const ZERO_ROOT_TOL: f64 = 1e-10;
const DAMPED_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("generalized chain for root {root} is inconsistent (relative residual {residual:e})")]
    ChainInconsistent { root: C64, residual: f64 },
    #[error("stability verdict {observed:?} contradicts the predicted {predicted:?}")]
    StabilityMismatch { predicted: Stability, observed: Stability },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Distinct,
    ComplexPairPlusReal,
    DoubleRoot,
    TripleRoot,
    ZeroMode,
    OscillatoryUndamped,
}

impl Structure {
    pub fn label(&self) -> &'static str {
        match self {
            Structure::Distinct => "Distinct",
            Structure::ComplexPairPlusReal => "ComplexPairPlusReal",
            Structure::DoubleRoot => "DoubleRoot",
            Structure::TripleRoot => "TripleRoot",
            Structure::ZeroMode => "ZeroMode",
            Structure::OscillatoryUndamped => "OscillatoryUndamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    AllDamped,
    ZeroModePresent,
    Undamped,
}

impl Stability {
    pub fn label(&self) -> &'static str {
        match self {
            Stability::AllDamped => "AllDamped",
            Stability::ZeroModePresent => "ZeroModePresent",
            Stability::Undamped => "Undamped",
        }
    }
}

/// One exponential `e^{Λt}` with its (possibly generalized) chain.
///
/// `vectors[0]` is an eigenvector of the unscaled generator and
/// `(m - Λ) vectors[j + 1] = vectors[j]`, so the basis solution seeded by
/// `vectors[j]` is `e^{Λt} Σ_{i ≤ j} t^{j-i}/(j-i)! vectors[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub rate: C64,
    pub vectors: Vec<Vec3>,
    pub chain: Vec<Mat2>,
    pub poly_degree: usize,
}

impl Mode {
    fn new(rate: C64, vectors: Vec<Vec3>) -> Self {
        let chain = vectors.iter().map(mode_matrix).collect();
        let poly_degree = vectors.len() - 1;
        Mode { rate, vectors, chain, poly_degree }
    }
}

/// Roots of a cubic where two or three coincide, from the closed-form
/// branch conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoincidingRoots {
    Double { double: f64, simple: f64 },
    Triple(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub modes: Vec<Mode>,
    pub structure: Structure,
    /// `c²` for `c > 0`, else 1; roots below are `Λ / scale`.
    pub scale: f64,
    pub cubic: (C64, C64, C64),
    pub roots: CubicRoots,
    pub branch: Option<CoincidingRoots>,
}

impl ModeDecomposition {
    pub fn scaled_roots(&self) -> [C64; 3] {
        self.roots.expanded()
    }

    pub fn rates(&self) -> [C64; 3] {
        self.scaled_roots().map(|s| s * self.scale)
    }

    /// Largest of the three Vieta residuals of the scaled roots.
    /// Largest Vieta residual, the k-th identity divided by `max(1, R)^k`
    /// with `R = max |s|` so that the roots are brought to unit scale.
    pub fn vieta_residual(&self) -> f64 {
        let [s1, s2, s3] = self.scaled_roots();
        let (p2, p1, p0) = self.cubic;
        let r = s1.norm().max(s2.norm()).max(s3.norm()).max(1.0);
        let a = (s1 + s2 + s3 + p2).norm() / r;
        let b = (s1 * s2 + s1 * s3 + s2 * s3 - p1).norm() / (r * r);
        let c = (s1 * s2 * s3 + p0).norm() / r.powi(3);
        a.max(b).max(c)
    }

    /// `min |Re Λ|` over the rates.
    pub fn min_decay(&self) -> f64 {
        self.rates().iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn stability(&self) -> Stability {
        let s = self.scaled_roots();
        let damped = |z: &C64| z.re < -DAMPED_TOL;
        if s.iter().all(damped) {
            return Stability::AllDamped;
        }
        let zeros = s.iter().filter(|z| is_zero_root(z, &s)).count();
        if zeros == 1 && s.iter().filter(|z| !is_zero_root(z, &s)).all(damped) {
            Stability::ZeroModePresent
        } else {
            Stability::Undamped
        }
    }
}

fn root_scale(s: &[C64; 3]) -> f64 {
    s.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn is_zero_root(z: &C64, all: &[C64; 3]) -> bool {
    z.norm() <= ZERO_ROOT_TOL * root_scale(all)
}

fn is_zero_re(z: &C64, all: &[C64; 3]) -> bool {
    z.re.abs() <= ZERO_ROOT_TOL * root_scale(all)
}

/// Squared distance, `|e12|²` and `(Δe - Im(λ1 λ̄2))²` of the diagonal cubic.
fn diagonal_invariants(spec: &SystemSpec, lambda1: C64, lambda2: C64) -> (f64, f64, f64) {
    let c2 = spec.c() * spec.c();
    let d = (lambda1 - lambda2).norm_sqr();
    let x = (spec.h.eps12() / c2).norm_sqr();
    let shifted = spec.h.delta_eps() / c2 - (lambda1 * lambda2.conj()).im;
    (d, x, shifted * shifted)
}

/// `(Δe)²` and `|λ/2 + i e21|²` of the Jordan cubic.
fn jordan_invariants(spec: &SystemSpec, lambda: C64) -> (f64, f64) {
    let c2 = spec.c() * spec.c();
    let de = spec.h.delta_eps() / c2;
    (de * de, (lambda / 2.0 + I * spec.h.eps21() / c2).norm_sqr())
}

/// Monic characteristic cubic of `m / c²` for `c > 0`, of `m` itself for
/// `c = 0`.
pub fn char_cubic(spec: &SystemSpec) -> (C64, C64, C64) {
    let c = spec.c();
    if c > 0.0 {
        match *spec.l.shape() {
            LindbladShape::Diagonal { lambda1, lambda2 } => {
                let (d, x, y) = diagonal_invariants(spec, lambda1, lambda2);
                return real3(d, 4.0 * x + y + d * d / 4.0, 2.0 * x * d);
            }
            LindbladShape::Jordan { lambda } => {
                let (e, k) = jordan_invariants(spec, lambda);
                return real3(2.0, 1.25 + e + 4.0 * k, 0.25 + e + 2.0 * k);
            }
            LindbladShape::General { .. } => {}
        }
    }
    let m = scaled_matrix(spec).0;
    let (p2, p1, p0) = m.char_poly();
    let n = m.frobenius().max(1.0);
    (clean(p2, n), clean(p1, n * n), clean(p0, n * n * n))
}

fn real3(a: f64, b: f64, c: f64) -> (C64, C64, C64) {
    (c64(a, 0.0), c64(b, 0.0), c64(c, 0.0))
}

fn clean(z: C64, scale: f64) -> C64 {
    if z.im.abs() <= 1e-10 * scale {
        c64(z.re, 0.0)
    } else {
        z
    }
}

fn scaled_matrix(spec: &SystemSpec) -> (Mat3, f64) {
    let c = spec.c();
    let kappa = if c > 0.0 { c * c } else { 1.0 };
    (build_generator(spec).m.scale(c64(1.0 / kappa, 0.0)), kappa)
}

/// Closed-form coinciding roots of `t³ + P t + Q` shifted by `shift`;
/// `sign` is the branch selector (same sign as `Q`).
fn coinciding_from_depressed(shift: f64, p: f64, q: f64, sign: f64, scale: f64, tol: f64) -> Option<CoincidingRoots> {
    if sign.abs() < 1e-12 * scale.powi(3) {
        return (p.abs() <= tol * scale * scale).then_some(CoincidingRoots::Triple(shift));
    }
    if p >= 0.0 {
        return None;
    }
    let lhs = (-p / 3.0).powi(3);
    let rhs = (q / 2.0).powi(2);
    if (lhs - rhs).abs() > tol * lhs.max(rhs) {
        return None;
    }
    let r = (-p / 3.0).sqrt();
    let td = if sign > 0.0 { r } else { -r };
    Some(CoincidingRoots::Double { double: shift + td, simple: shift - 2.0 * td })
}

/// Jordan branch in terms of `E = Δe²`, `K = |λ/2 + i e21|²`.
pub fn jordan_coinciding_roots(e: f64, k: f64, tol: f64) -> Option<CoincidingRoots> {
    if e + 4.0 * k >= 1.0 / 12.0 && (1.0 / 36.0 + e - 2.0 * k).abs() >= 1e-12 {
        return None;
    }
    let sign = 1.0 / 36.0 + e - 2.0 * k;
    coinciding_from_depressed(-2.0 / 3.0, e + 4.0 * k - 1.0 / 12.0, sign / 3.0, sign, 1.0, tol)
}

/// Diagonal branch in terms of `d = |λ1 - λ2|²`, `X = |e12|²`,
/// `Y = (Δe - Im(λ1 λ̄2))²`.
pub fn diagonal_coinciding_roots(d: f64, x: f64, y: f64, tol: f64) -> Option<CoincidingRoots> {
    let scale = d.max(x.sqrt()).max(y.sqrt());
    if scale == 0.0 {
        return Some(CoincidingRoots::Triple(0.0));
    }
    let p = 4.0 * x + y - d * d / 12.0;
    let q = -d.powi(3) / 108.0 + 2.0 * d * x / 3.0 - d * y / 3.0;
    let sign = d * (-d * d / 8.0 + 9.0 * x - 4.5 * y);
    coinciding_from_depressed(-d / 3.0, p, q, sign, scale, tol)
}

/// Closed-form coinciding-root branch of the system's cubic, when the branch
/// conditions hold within `tol`.
pub fn coinciding_roots(spec: &SystemSpec, tol: f64) -> Option<CoincidingRoots> {
    if spec.c() == 0.0 {
        return None;
    }
    match *spec.l.shape() {
        LindbladShape::Diagonal { lambda1, lambda2 } => {
            let (d, x, y) = diagonal_invariants(spec, lambda1, lambda2);
            diagonal_coinciding_roots(d, x, y, tol)
        }
        LindbladShape::Jordan { lambda } => {
            let (e, k) = jordan_invariants(spec, lambda);
            jordan_coinciding_roots(e, k, tol)
        }
        LindbladShape::General { .. } => None,
    }
}

fn sigma_basis() -> [Vec3; 3] {
    [
        Vec3::new(ONE, ZERO, ZERO),
        Vec3::new(ZERO, ONE, ONE),
        Vec3::new(ZERO, I, -I),
    ]
}

/// Eigenvector of a real root chosen invariant under `X -> X†`.
fn hermitian_vector(v: &Vec3) -> Vec3 {
    let a = *v + adjoint_coords(v);
    let b = (*v - adjoint_coords(v)).scale(I);
    if a.norm() >= b.norm() {
        a.normalized()
    } else {
        b.normalized()
    }
}

fn argmax_by<F: Fn(&Vec3) -> f64>(cands: &[Vec3], f: F) -> Vec3 {
    let mut best = cands[0];
    let mut best_val = f(&best);
    for v in &cands[1..] {
        let val = f(v);
        if val > best_val {
            best = *v;
            best_val = val;
        }
    }
    best
}

fn check_chain(a: &Mat3, v1: &Vec3, s: C64) -> Result<(), SpectralError> {
    let residual = a.mul_vec(v1).norm() / (a.frobenius().max(1.0) * v1.norm());
    if residual > 1e-6 {
        return Err(SpectralError::ChainInconsistent { root: s, residual });
    }
    Ok(())
}

/// Scaled (rate, chain) pairs.
fn scaled_modes(w: &Mat3, roots: &CubicRoots) -> Result<Vec<(C64, Vec<Vec3>)>, SpectralError> {
    let wn = w.frobenius().max(1.0);
    let mut out: Vec<(C64, Vec<Vec3>)> = Vec::new();
    for root in &roots.roots {
        let s = root.value;
        let a = w.shifted(s);
        match root.multiplicity {
            1 => {
                let partner = out
                    .iter()
                    .find(|(z, vs)| vs.len() == 1 && z.im > 0.0 && coincide(*z, s.conj()))
                    .map(|(_, vs)| vs[0]);
                let v = match partner {
                    Some(p) if s.im < 0.0 => adjoint_coords(&p),
                    _ => {
                        let v = Vec3(null_vector_forced(&a.0));
                        if s.im == 0.0 {
                            hermitian_vector(&v)
                        } else {
                            v.normalized()
                        }
                    }
                };
                out.push((s, vec![v]));
            }
            2 => {
                // The generalized eigenspace is the range of (W - s_simple I).
                let simple = roots.roots.iter().find(|r| r.multiplicity == 1).map(|r| r.value).unwrap_or(s);
                let b = w.shifted(simple);
                let cols: Vec<Vec3> = (0..3).map(|j| Vec3::new(b.0[0][j], b.0[1][j], b.0[2][j])).collect();
                let basis = hermitian_real_basis(&cols);
                let basis = if basis.len() >= 2 { basis[..2].to_vec() } else { eigen_fallback(&a) };
                let x = argmax_by(&basis, |v| a.mul_vec(v).norm());
                let v1 = a.mul_vec(&x);
                if v1.norm() <= EIGEN_RANK_TOL * wn {
                    for v in basis {
                        out.push((s, vec![v]));
                    }
                } else {
                    check_chain(&a, &v1, s)?;
                    out.push((s, vec![v1, x]));
                }
            }
            _ => {
                let r = rank(&a.0, EIGEN_RANK_TOL);
                let basis = sigma_basis();
                match r {
                    0 => {
                        for v in basis {
                            out.push((s, vec![v]));
                        }
                    }
                    1 => {
                        let x = argmax_by(&basis, |v| a.mul_vec(v).norm());
                        let v1 = a.mul_vec(&x);
                        check_chain(&a, &v1, s)?;
                        let kernel: Vec<Vec3> = nullspace(&a.0, EIGEN_RANK_TOL).into_iter().map(Vec3).collect();
                        let kernel = hermitian_real_basis(&kernel);
                        let u1 = v1.normalized();
                        let other = argmax_by(&kernel, |v| (*v - u1.scale(c64(u1.inner(v).re, 0.0))).norm());
                        out.push((s, vec![v1, x]));
                        out.push((s, vec![other]));
                    }
                    _ => {
                        let x = argmax_by(&basis, |v| a.mul_vec(&a.mul_vec(v)).norm());
                        let v2 = a.mul_vec(&x);
                        let v1 = a.mul_vec(&v2);
                        check_chain(&a, &v1, s)?;
                        out.push((s, vec![v1, v2, x]));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn eigen_fallback(a: &Mat3) -> Vec<Vec3> {
    let kernel: Vec<Vec3> = nullspace(&a.0, EIGEN_RANK_TOL).into_iter().map(Vec3).collect();
    let mut basis = hermitian_real_basis(&kernel);
    for v in sigma_basis() {
        if basis.len() >= 2 {
            break;
        }
        basis.extend(hermitian_real_basis(&[v]));
    }
    basis.truncate(2);
    basis
}

fn classify(s: &[C64; 3], roots: &CubicRoots) -> Structure {
    let zero_re = s.iter().filter(|z| is_zero_re(z, s)).count();
    if zero_re >= 2 {
        return Structure::OscillatoryUndamped;
    }
    if s.iter().filter(|z| is_zero_root(z, s)).count() == 1 {
        return Structure::ZeroMode;
    }
    use crate::numerics::RootPattern::*;
    match roots.pattern {
        Triple => Structure::TripleRoot,
        OneDoubleOneSimple => Structure::DoubleRoot,
        ThreeDistinct if s.iter().any(|z| z.im != 0.0) => Structure::ComplexPairPlusReal,
        ThreeDistinct => Structure::Distinct,
    }
}

pub fn spectrum(spec: &SystemSpec) -> Result<ModeDecomposition, SpectralError> {
    let cubic = char_cubic(spec);
    let roots = cubic_roots(cubic.0, cubic.1, cubic.2)?;
    let (w, kappa) = scaled_matrix(spec);
    let modes = scaled_modes(&w, &roots)?
        .into_iter()
        .map(|(s, vs)| {
            let vectors = vs.iter().enumerate().map(|(j, v)| v.scale(c64(kappa.powi(-(j as i32)), 0.0))).collect();
            Mode::new(s * kappa, vectors)
        })
        .collect();
    let structure = classify(&roots.expanded(), &roots);
    Ok(ModeDecomposition {
        modes,
        structure,
        scale: kappa,
        cubic,
        branch: coinciding_roots(spec, 1e-6),
        roots,
    })
}

/// The verdict expected from the closed-form analysis of the canonical
/// forms; `None` for a general `L`.
pub fn predicted_stability(spec: &SystemSpec) -> Option<Stability> {
    if spec.c() == 0.0 {
        return Some(Stability::Undamped);
    }
    match *spec.l.shape() {
        LindbladShape::Jordan { .. } => Some(Stability::AllDamped),
        LindbladShape::Diagonal { lambda1, lambda2 } => Some(if coincide(lambda1, lambda2) {
            Stability::Undamped
        } else if coincide(spec.h.eps12(), ZERO) {
            Stability::ZeroModePresent
        } else {
            Stability::AllDamped
        }),
        LindbladShape::General { .. } => None,
    }
}

/// Stability verdict of `md`, checked against the closed-form prediction
/// when one exists.
pub fn assert_stability(md: &ModeDecomposition, spec: &SystemSpec) -> Result<Stability, SpectralError> {
    let observed = md.stability();
    match predicted_stability(spec) {
        Some(predicted) if predicted != observed => Err(SpectralError::StabilityMismatch { predicted, observed }),
        _ => Ok(observed),
    }
}
