//! Small dense complex kernel: 2×2 and 3×3 matrices, monic cubic roots with
//! multiplicity detection, rank-revealing elimination and 2×2 Schur form.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Two roots coincide when `|a - b| < COINCIDENCE_TOL * max(1, |a|, |b|)`.
pub const COINCIDENCE_TOL: f64 = 1e-8;
/// `solve3` treats a matrix as singular when `|det| < RANK_TOL * ‖M‖³`.
pub const RANK_TOL: f64 = 1e-10;

// Relative discriminant level below which the closed form snaps to a double
// root. Rounding in the coefficients alone splits an exact double root by
// roughly sqrt(eps) * scale, which is above COINCIDENCE_TOL.
const DOUBLE_SNAP: f64 = 1e-12;
const TRIPLE_SNAP: f64 = 1e-12;
/// Multiple of the propagated rounding error in the discriminant below which
/// it is treated as zero.
const DISC_ERR_FACTOR: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
}

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|a - b| < COINCIDENCE_TOL * max(1, |a|, |b|)`.
pub fn coincide(a: C64, b: C64) -> bool {
    (a - b).norm() < COINCIDENCE_TOL * 1f64.max(a.norm()).max(b.norm())
}

// ---------------------------------------------------------------------------
// 2×2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(c64(a, 0.0), c64(b, 0.0), c64(c, 0.0), c64(d, 0.0))
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    /// σ+ = |1⟩⟨2|.
    pub const fn sigma_plus() -> Self {
        Mat2([[ZERO, ONE], [ZERO, ZERO]])
    }

    /// σ- = |2⟩⟨1|.
    pub const fn sigma_minus() -> Self {
        Mat2([[ZERO, ZERO], [ONE, ZERO]])
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let f2 = self.frobenius().powi(2);
        let d = self.det().norm();
        ((f2 + (f2 * f2 - 4.0 * d * d).max(0.0).sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| is_finite(*z))
    }

    pub fn scale(&self, k: C64) -> Self {
        let m = &self.0;
        Mat2::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        *self * *other + *other * *self
    }

    /// `‖M - M†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.dagger()).frobenius()
    }

    /// Eigenvalues from the quadratic formula, larger modulus first.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let half_tr = self.trace() / 2.0;
        let m = &self.0;
        let half_gap = (m[0][0] - m[1][1]) / 2.0;
        let disc = (half_gap * half_gap + m[0][1] * m[1][0]).sqrt();
        let (a, b) = (half_tr + disc, half_tr - disc);
        if a.norm() >= b.norm() {
            let other = if a.norm() > 0.0 { self.det() / a } else { b };
            (a, other)
        } else {
            let other = if b.norm() > 0.0 { self.det() / b } else { a };
            (b, other)
        }
    }
}

impl Index<(usize, usize)> for Mat2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: C64) -> Mat2 {
        self.scale(k)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: f64) -> Mat2 {
        self.scale(c64(k, 0.0))
    }
}

/// `exp(-i H t)` for Hermitian `h`, via `H = h0 I + n·σ`.
pub fn unitary_propagator(h: &Mat2, t: f64) -> Mat2 {
    let h0 = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
    let nz = (h[(0, 0)].re - h[(1, 1)].re) / 2.0;
    let off = h[(0, 1)];
    let r = (nz * nz + off.norm_sqr()).sqrt();
    let phase = C64::from_polar(1.0, -h0 * t);
    if r == 0.0 {
        return Mat2::identity() * phase;
    }
    let (s, c) = (r * t).sin_cos();
    // n·σ / r
    let k = Mat2::new(c64(nz, 0.0), off, off.conj(), c64(-nz, 0.0)) * (1.0 / r);
    (Mat2::identity() * c - k * (I * s)) * phase
}

/// Unitary Schur triangularization `U† M U = T` with `T[1][0] = 0`.
pub fn schur2(m: &Mat2) -> (Mat2, Mat2) {
    if m[(1, 0)] == ZERO {
        return (Mat2::identity(), *m);
    }
    let (lambda, _) = m.eigenvalues();
    // Two candidate eigenvectors; the larger one is the better conditioned.
    let a = [m[(0, 1)], lambda - m[(0, 0)]];
    let b = [lambda - m[(1, 1)], m[(1, 0)]];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    let v = if n > 0.0 { [v[0] / n, v[1] / n] } else { [ONE, ZERO] };
    let w = if v[0].norm() >= v[1].norm() {
        [-v[1].conj(), v[0].conj()]
    } else {
        [v[1].conj(), -v[0].conj()]
    };
    let u = Mat2::new(v[0], w[0], v[1], w[1]);
    let mut t = u.dagger() * *m * u;
    t[(1, 0)] = ZERO;
    (u, t)
}

// ---------------------------------------------------------------------------
// 3×3

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3(pub [C64; 3]);

impl Vec3 {
    pub const fn new(a: C64, b: C64, c: C64) -> Self {
        Vec3([a, b, c])
    }

    pub const fn zero() -> Self {
        Vec3([ZERO; 3])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, k: C64) -> Self {
        Vec3([k * self.0[0], k * self.0[1], k * self.0[2]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| is_finite(*z))
    }

    /// Hermitian inner product `⟨self, other⟩ = Σ conj(self_i) other_i`.
    pub fn inner(&self, other: &Vec3) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scale(c64(1.0 / n, 0.0))
        } else {
            *self
        }
    }
}

impl Index<usize> for Vec3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[C64; 3]; 3]);

impl Mat3 {
    pub const fn zero() -> Self {
        Mat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Mat3::zero();
        for i in 0..3 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_columns(cols: &[Vec3; 3]) -> Self {
        let mut m = Mat3::zero();
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m.0[i][j] = col.0[i];
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| is_finite(*z))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the three principal 2×2 minors.
    pub fn principal_minor_sum(&self) -> C64 {
        let m = &self.0;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    /// Coefficients `(p2, p1, p0)` of the monic `det(sI - M)`.
    pub fn char_poly(&self) -> (C64, C64, C64) {
        (-self.trace(), self.principal_minor_sum(), -self.det())
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= k);
        out
    }

    /// `M - s I`.
    pub fn shifted(&self, s: C64) -> Self {
        let mut out = *self;
        for i in 0..3 {
            out.0[i][i] -= s;
        }
        out
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        let mut out = Vec3::zero();
        for i in 0..3 {
            out.0[i] = m[i][0] * v.0[0] + m[i][1] * v.0[1] + m[i][2] * v.0[2];
        }
        out
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Cubic roots

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootPattern {
    ThreeDistinct,
    OneDoubleOneSimple,
    Triple,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicRoots {
    pub roots: Vec<Root>,
    pub pattern: RootPattern,
}

impl CubicRoots {
    /// All three roots, repeated according to multiplicity.
    pub fn expanded(&self) -> [C64; 3] {
        let mut out = [ZERO; 3];
        let mut k = 0;
        for r in &self.roots {
            for _ in 0..r.multiplicity {
                out[k] = r.value;
                k += 1;
            }
        }
        out
    }
}

fn eval_cubic(p2: C64, p1: C64, p0: C64, s: C64) -> (C64, C64) {
    let p = ((s + p2) * s + p1) * s + p0;
    let dp = (3.0 * s + 2.0 * p2) * s + p1;
    (p, dp)
}

fn newton_polish(p2: C64, p1: C64, p0: C64, s: C64) -> C64 {
    let (p, dp) = eval_cubic(p2, p1, p0, s);
    if dp.norm() == 0.0 || p.norm() == 0.0 {
        return s;
    }
    let next = s - p / dp;
    if is_finite(next) && eval_cubic(p2, p1, p0, next).0.norm() <= p.norm() {
        next
    } else {
        s
    }
}

/// Roots of `s³ + p2 s² + p1 s + p0` with multiplicities.
///
/// Depressed-cubic closed form followed by one Newton step per simple root.
/// Real coefficients take a real branch so that conjugate pairs come out
/// exactly conjugate and real roots exactly real.
pub fn cubic_roots(p2: C64, p1: C64, p0: C64) -> Result<CubicRoots, NumericsError> {
    if !(is_finite(p2) && is_finite(p1) && is_finite(p0)) {
        return Err(NumericsError::NonFinite("cubic coefficient"));
    }
    let scale = p2.norm().max(p1.norm().sqrt()).max(p0.norm().cbrt());
    let shift = p2 / 3.0;
    if scale == 0.0 {
        return Ok(CubicRoots {
            roots: vec![Root { value: ZERO, multiplicity: 3 }],
            pattern: RootPattern::Triple,
        });
    }
    let p = p1 - p2 * p2 / 3.0;
    let q = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;

    if p.norm() <= TRIPLE_SNAP * scale * scale && q.norm() <= TRIPLE_SNAP * scale.powi(3) {
        return Ok(CubicRoots {
            roots: vec![Root { value: -shift, multiplicity: 3 }],
            pattern: RootPattern::Triple,
        });
    }

    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let disc_scale = half_q.norm_sqr().max(third_p.norm().powi(3));
    let dp = f64::EPSILON * (p1.norm() + p2.norm_sqr());
    let dq = f64::EPSILON * (p2.norm().powi(3) + (p2 * p1).norm() + p0.norm());
    let disc_err = half_q.norm() * dq + third_p.norm_sqr() * dp;
    if disc.norm() <= (DOUBLE_SNAP * disc_scale).max(DISC_ERR_FACTOR * disc_err) {
        let double = -3.0 * q / (2.0 * p) - shift;
        let simple = newton_polish(p2, p1, p0, 3.0 * q / p - shift);
        let real = p2.im == 0.0 && p1.im == 0.0 && p0.im == 0.0;
        let (double, simple) = if real {
            (c64(double.re, 0.0), c64(simple.re, 0.0))
        } else {
            (double, simple)
        };
        return Ok(finish(vec![
            Root { value: simple, multiplicity: 1 },
            Root { value: double, multiplicity: 2 },
        ]));
    }

    let real = p2.im == 0.0 && p1.im == 0.0 && p0.im == 0.0;
    let ys: [C64; 3] = if real {
        real_depressed_roots(p.re, q.re, disc.re)
    } else {
        let sd = disc.sqrt();
        let w = if (-half_q + sd).norm() >= (-half_q - sd).norm() {
            -half_q + sd
        } else {
            -half_q - sd
        };
        let u = w.powf(1.0 / 3.0);
        let v = -p / (3.0 * u);
        let omega = c64(-0.5, 3f64.sqrt() / 2.0);
        let omega2 = omega.conj();
        [u + v, omega * u + omega2 * v, omega2 * u + omega * v]
    };

    let mut roots: Vec<C64> = ys.iter().map(|y| y - shift).collect();
    if real {
        // Polish the real root in real arithmetic and one member of the
        // pair, then mirror the other.
        for r in roots.iter_mut() {
            *r = newton_polish(p2, p1, p0, *r);
        }
        if roots[1].im != 0.0 {
            roots[0].im = 0.0;
            roots[2] = roots[1].conj();
        } else {
            roots.iter_mut().for_each(|r| r.im = 0.0);
        }
    } else {
        for r in roots.iter_mut() {
            *r = newton_polish(p2, p1, p0, *r);
        }
    }
    Ok(finish(roots.into_iter().map(|value| Root { value, multiplicity: 1 }).collect()))
}

fn real_depressed_roots(p: f64, q: f64, disc: f64) -> [C64; 3] {
    if disc > 0.0 {
        let sd = disc.sqrt();
        let w = if -q / 2.0 >= 0.0 { -q / 2.0 + sd } else { -q / 2.0 - sd };
        let u = w.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let re = -(u + v) / 2.0;
        let im = 3f64.sqrt() / 2.0 * (u - v);
        [c64(u + v, 0.0), c64(re, im.abs()), c64(re, -im.abs())]
    } else {
        // Three real roots, trigonometric form; p < 0 here.
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [
            c64(2.0 * r * theta.cos(), 0.0),
            c64(2.0 * r * (theta - tau).cos(), 0.0),
            c64(2.0 * r * (theta - 2.0 * tau).cos(), 0.0),
        ]
    }
}

/// Merge coinciding roots and order the result: descending real part, then
/// descending imaginary part.
fn finish(mut roots: Vec<Root>) -> CubicRoots {
    let mut merged: Vec<Root> = Vec::with_capacity(3);
    for r in roots.drain(..) {
        if let Some(m) = merged.iter_mut().find(|m| coincide(m.value, r.value)) {
            let total = (m.multiplicity + r.multiplicity) as f64;
            m.value = (m.value * m.multiplicity as f64 + r.value * r.multiplicity as f64) / total;
            m.multiplicity += r.multiplicity;
        } else {
            merged.push(r);
        }
    }
    // A cluster merged late can now coincide with another one.
    if merged.len() == 2 && coincide(merged[0].value, merged[1].value) {
        let v = (merged[0].value * merged[0].multiplicity as f64
            + merged[1].value * merged[1].multiplicity as f64)
            / 3.0;
        merged = vec![Root { value: v, multiplicity: 3 }];
    }
    merged.sort_by(|a, b| {
        b.value
            .re
            .total_cmp(&a.value.re)
            .then(b.value.im.total_cmp(&a.value.im))
    });
    let pattern = match merged.iter().map(|r| r.multiplicity).max().unwrap_or(1) {
        3 => RootPattern::Triple,
        2 => RootPattern::OneDoubleOneSimple,
        _ => RootPattern::ThreeDistinct,
    };
    CubicRoots { roots: merged, pattern }
}

// ---------------------------------------------------------------------------
// Rank-revealing elimination

/// Row echelon form from Gaussian elimination with complete pivoting.
struct Echelon<const N: usize> {
    a: [[C64; N]; N],
    b: [C64; N],
    cols: [usize; N],
    rank: usize,
}

fn echelon<const N: usize>(mut a: [[C64; N]; N], mut b: [C64; N], abs_tol: f64) -> Echelon<N> {
    let mut cols = [0usize; N];
    for (k, c) in cols.iter_mut().enumerate() {
        *c = k;
    }
    let mut rank = 0;
    for k in 0..N {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, z) in row.iter().enumerate().skip(k) {
                if z.norm() > best {
                    best = z.norm();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= abs_tol {
            break;
        }
        a.swap(k, pi);
        b.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        cols.swap(k, pj);
        let pivot = a[k][k];
        for i in (k + 1)..N {
            let f = a[i][k] / pivot;
            if f == ZERO {
                continue;
            }
            for j in k..N {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
        rank += 1;
    }
    Echelon { a, b, cols, rank }
}

impl<const N: usize> Echelon<N> {
    fn back_substitute(&self, rhs: &[C64; N], free: Option<usize>) -> [C64; N] {
        let mut y = [ZERO; N];
        if let Some(f) = free {
            y[f] = ONE;
        }
        for k in (0..self.rank).rev() {
            let mut acc = rhs[k];
            for j in (k + 1)..N {
                acc -= self.a[k][j] * y[j];
            }
            y[k] = acc / self.a[k][k];
        }
        let mut x = [ZERO; N];
        for k in 0..N {
            x[self.cols[k]] = y[k];
        }
        x
    }

    fn particular(&self) -> [C64; N] {
        self.back_substitute(&self.b, None)
    }

    fn null_basis(&self) -> Vec<[C64; N]> {
        let zero = [ZERO; N];
        (self.rank..N).map(|f| self.back_substitute(&zero, Some(f))).collect()
    }
}

fn frob<const N: usize>(a: &[[C64; N]; N]) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vnorm<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn matvec<const N: usize>(a: &[[C64; N]; N], x: &[C64; N]) -> [C64; N] {
    let mut out = [ZERO; N];
    for (o, row) in out.iter_mut().zip(a.iter()) {
        *o = row.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
    }
    out
}

/// Basis of the numerical nullspace; pivots below `rel_tol * ‖M‖_F` count as
/// zero. Basis vectors are normalized.
pub fn nullspace<const N: usize>(m: &[[C64; N]; N], rel_tol: f64) -> Vec<[C64; N]> {
    let scale = frob(m);
    let e = echelon(*m, [ZERO; N], rel_tol * scale);
    if scale == 0.0 {
        return (0..N)
            .map(|k| {
                let mut v = [ZERO; N];
                v[k] = ONE;
                v
            })
            .collect();
    }
    e.null_basis()
        .into_iter()
        .map(|v| {
            let n = vnorm(&v);
            let mut out = v;
            out.iter_mut().for_each(|z| *z /= n);
            out
        })
        .collect()
}

/// Numerical rank with pivots below `rel_tol * ‖M‖_F` treated as zero.
pub fn rank<const N: usize>(m: &[[C64; N]; N], rel_tol: f64) -> usize {
    let scale = frob(m);
    if scale == 0.0 {
        return 0;
    }
    echelon(*m, [ZERO; N], rel_tol * scale).rank
}

/// One null vector of a matrix known to have rank `N - 1`: the last pivot is
/// dropped whatever its size.
pub fn null_vector_forced<const N: usize>(m: &[[C64; N]; N]) -> [C64; N] {
    let mut e = echelon(*m, [ZERO; N], 0.0);
    if e.rank == N {
        e.rank = N - 1;
    }
    let v = e.back_substitute(&[ZERO; N], Some(e.rank));
    let n = vnorm(&v);
    let mut out = v;
    if n > 0.0 {
        out.iter_mut().for_each(|z| *z /= n);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solve3 {
    Unique(Vec3),
    Family { particular: Vec3, nullspace: Vec<Vec3> },
    Inconsistent,
}

const CONSISTENCY_TOL: f64 = 1e-9;

/// Solve `M x = b`, reporting the affine solution family when `M` is
/// singular.
pub fn solve3(m: &Mat3, b: &Vec3) -> Result<Solve3, NumericsError> {
    if !m.is_finite() || !b.is_finite() {
        return Err(NumericsError::NonFinite("solve3 input"));
    }
    let scale = m.frobenius();
    if scale == 0.0 {
        if b.norm() == 0.0 {
            let basis = (0..3)
                .map(|k| {
                    let mut v = Vec3::zero();
                    v.0[k] = ONE;
                    v
                })
                .collect();
            return Ok(Solve3::Family { particular: Vec3::zero(), nullspace: basis });
        }
        return Ok(Solve3::Inconsistent);
    }
    let singular = m.det().norm() < RANK_TOL * scale.powi(3);
    let tol = if singular { RANK_TOL * scale } else { 0.0 };
    let e = echelon(m.0, b.0, tol);
    let x = e.particular();
    let residual = vnorm(&sub(&matvec(&m.0, &x), &b.0));
    if residual > CONSISTENCY_TOL * (scale * vnorm(&x) + b.norm()) {
        return Ok(Solve3::Inconsistent);
    }
    if e.rank == 3 {
        return Ok(Solve3::Unique(Vec3(x)));
    }
    let nullspace = e
        .null_basis()
        .into_iter()
        .map(|v| Vec3(v).normalized())
        .collect();
    Ok(Solve3::Family { particular: Vec3(x), nullspace })
}

fn sub<const N: usize>(a: &[C64; N], b: &[C64; N]) -> [C64; N] {
    let mut out = *a;
    out.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= y);
    out
}
