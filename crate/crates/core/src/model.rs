//! Hamiltonian, Lindblad operator forms and density matrices for a two-level
//! system (ħ = 1).

use thiserror::Error;

use crate::numerics::{c64, is_finite, schur2, Mat2, C64, COINCIDENCE_TOL, I, ONE, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("Hamiltonian is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("coupling c must be non-negative, got {0}")]
    NegativeCoupling(f64),
    #[error("density matrix is not Hermitian (defect {0:e})")]
    DensityNotHermitian(f64),
    #[error("density matrix trace deviates from 1 by {0:e}")]
    DensityTrace(f64),
}

const HERMITIAN_TOL: f64 = 1e-14;
const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-12;
const NORMALITY_TOL: f64 = 1e-10;

/// System Hamiltonian with entries `ε_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian(Mat2);

impl Hamiltonian {
    /// Accepts `eps` when it is Hermitian within `1e-14 * max(1, ‖eps‖)`; the
    /// stored matrix is the Hermitian part.
    pub fn new(eps: Mat2) -> Result<Self, ModelError> {
        if !eps.is_finite() {
            return Err(ModelError::NonFinite("Hamiltonian"));
        }
        let defect = eps.hermiticity_defect();
        if defect > HERMITIAN_TOL * eps.frobenius().max(1.0) {
            return Err(ModelError::NotHermitian(defect));
        }
        Ok(Hamiltonian((eps + eps.dagger()) * 0.5))
    }

    /// `diag(e1, e2)`.
    pub fn diagonal(e1: f64, e2: f64) -> Self {
        Hamiltonian(Mat2::from_real(e1, 0.0, 0.0, e2))
    }

    /// Real diagonal `e11`, `e22` and upper off-diagonal `e12`.
    pub fn from_parts(e11: f64, e22: f64, e12: C64) -> Self {
        Hamiltonian(Mat2::new(c64(e11, 0.0), e12, e12.conj(), c64(e22, 0.0)))
    }

    pub fn zero() -> Self {
        Hamiltonian(Mat2::zero())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn eps11(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn eps22(&self) -> f64 {
        self.0[(1, 1)].re
    }

    pub fn eps12(&self) -> C64 {
        self.0[(0, 1)]
    }

    pub fn eps21(&self) -> C64 {
        self.0[(1, 0)]
    }

    /// `Δε = ε11 - ε22`.
    pub fn delta_eps(&self) -> f64 {
        self.eps11() - self.eps22()
    }

    /// `U† H U`.
    pub fn conjugated(&self, u: &Mat2) -> Self {
        let m = u.dagger() * self.0 * *u;
        Hamiltonian((m + m.dagger()) * 0.5)
    }
}

/// Shape of the Lindblad operator `L = c · l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LindbladShape {
    Diagonal { lambda1: C64, lambda2: C64 },
    /// `l = λ I + σ+`.
    Jordan { lambda: C64 },
    General { l: Mat2 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladForm {
    shape: LindbladShape,
    c: f64,
}

impl LindbladForm {
    pub fn new(shape: LindbladShape, c: f64) -> Result<Self, ModelError> {
        if !c.is_finite() {
            return Err(ModelError::NonFinite("coupling"));
        }
        if c < 0.0 {
            return Err(ModelError::NegativeCoupling(c));
        }
        let ok = match shape {
            LindbladShape::Diagonal { lambda1, lambda2 } => is_finite(lambda1) && is_finite(lambda2),
            LindbladShape::Jordan { lambda } => is_finite(lambda),
            LindbladShape::General { l } => l.is_finite(),
        };
        if !ok {
            return Err(ModelError::NonFinite("Lindblad entries"));
        }
        Ok(LindbladForm { shape, c })
    }

    pub fn diagonal(lambda1: C64, lambda2: C64, c: f64) -> Result<Self, ModelError> {
        Self::new(LindbladShape::Diagonal { lambda1, lambda2 }, c)
    }

    pub fn jordan(lambda: C64, c: f64) -> Result<Self, ModelError> {
        Self::new(LindbladShape::Jordan { lambda }, c)
    }

    pub fn general(l: Mat2, c: f64) -> Result<Self, ModelError> {
        Self::new(LindbladShape::General { l }, c)
    }

    pub fn shape(&self) -> &LindbladShape {
        &self.shape
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// The dimensionless matrix `l` (without the coupling).
    pub fn l_matrix(&self) -> Mat2 {
        match self.shape {
            LindbladShape::Diagonal { lambda1, lambda2 } => Mat2::diag(lambda1, lambda2),
            LindbladShape::Jordan { lambda } => Mat2::new(lambda, ONE, ZERO, lambda),
            LindbladShape::General { l } => l,
        }
    }

    /// The full operator `L = c · l`.
    pub fn operator(&self) -> Mat2 {
        self.l_matrix() * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub h: Hamiltonian,
    pub l: LindbladForm,
}

impl SystemSpec {
    pub fn new(h: Hamiltonian, l: LindbladForm) -> Self {
        SystemSpec { h, l }
    }

    pub fn c(&self) -> f64 {
        self.l.c()
    }
}

/// Unit-trace Hermitian 2×2 matrix `f_ij`. Positivity is not enforced; see
/// [`validate_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(f: Mat2) -> Result<Self, ModelError> {
        if !f.is_finite() {
            return Err(ModelError::NonFinite("density matrix"));
        }
        let defect = f.hermiticity_defect();
        if defect > DENSITY_HERMITIAN_TOL * f.frobenius().max(1.0) {
            return Err(ModelError::DensityNotHermitian(defect));
        }
        let dev = (f.trace() - ONE).norm();
        if dev > TRACE_TOL {
            return Err(ModelError::DensityTrace(dev));
        }
        Ok(DensityMatrix(f))
    }

    /// `[[f11, f12], [conj f12, 1 - f11]]`.
    pub fn from_bloch_parts(f11: f64, f12: C64) -> Self {
        DensityMatrix(Mat2::new(c64(f11, 0.0), f12, f12.conj(), c64(1.0 - f11, 0.0)))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_bloch_parts(0.5, ZERO)
    }

    pub(crate) fn from_raw(f: Mat2) -> Self {
        DensityMatrix(f)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn f11(&self) -> C64 {
        self.0[(0, 0)]
    }

    pub fn f12(&self) -> C64 {
        self.0[(0, 1)]
    }

    pub fn f21(&self) -> C64 {
        self.0[(1, 0)]
    }

    pub fn f22(&self) -> C64 {
        self.0[(1, 1)]
    }

    pub fn det(&self) -> f64 {
        self.0.det().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue_hermitian(&self.0)
    }
}

/// Smaller eigenvalue of the Hermitian part: `(Tr - sqrt(Tr² - 4 det)) / 2`.
pub fn min_eigenvalue_hermitian(m: &Mat2) -> f64 {
    let herm = (*m + m.dagger()) * 0.5;
    let tr = herm.trace().re;
    let det = herm.det().re;
    (tr - (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub hermitian: bool,
    pub trace_dev: f64,
    pub min_eigenvalue: f64,
}

pub fn validate_density(rho: &Mat2, tol: f64) -> DensityReport {
    DensityReport {
        hermitian: rho.hermiticity_defect() <= tol,
        trace_dev: (rho.trace() - ONE).norm(),
        min_eigenvalue: min_eigenvalue_hermitian(rho),
    }
}

/// Outcome of reducing a raw Lindblad matrix by a unitary change of basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Canonicalized {
    /// `l_raw = basis · l_canon · basis†` (up to the rescaling folded into
    /// `form.c()`), and `h = basis† H basis`.
    Canonical { form: LindbladForm, h: Hamiltonian, basis: Mat2 },
    /// Non-normal with distinct eigenvalues: no unitary reduction to the two
    /// standard shapes exists.
    NonCanonical(LindbladForm),
}

/// Unitarily reduce `c · l_raw` to a diagonal or Jordan-block operator.
pub fn canonicalize(l_raw: &Mat2, c: f64, h: &Hamiltonian) -> Result<Canonicalized, ModelError> {
    if !l_raw.is_finite() {
        return Err(ModelError::NonFinite("Lindblad entries"));
    }
    let general = LindbladForm::general(*l_raw, c)?;
    let norm2 = l_raw.frobenius().powi(2);
    let defect = (*l_raw * l_raw.dagger() - l_raw.dagger() * *l_raw).frobenius();
    let (u, t) = schur2(l_raw);

    if defect <= NORMALITY_TOL * norm2 {
        let form = LindbladForm::diagonal(t[(0, 0)], t[(1, 1)], c)?;
        return Ok(Canonicalized::Canonical { form, h: h.conjugated(&u), basis: u });
    }
    // (l1 - l2)²/4 from the invariants; the eigenvalues themselves split by
    // √ε on a defective matrix.
    let disc = (l_raw.trace() / 2.0).powi(2) - l_raw.det();
    if disc.norm() > (COINCIDENCE_TOL * COINCIDENCE_TOL * norm2).max(64.0 * f64::EPSILON * norm2) {
        return Ok(Canonicalized::NonCanonical(general));
    }
    // N = l - (tr l / 2) I = mag · e1 e2†, read off directly rather than
    // from the Schur vectors, which are only accurate to √ε here.
    let mean = l_raw.trace() / 2.0;
    let n = *l_raw - Mat2::identity() * mean;
    let mag = n.frobenius();
    let col = if n[(0, 0)].norm_sqr() + n[(1, 0)].norm_sqr() >= n[(0, 1)].norm_sqr() + n[(1, 1)].norm_sqr() { 0 } else { 1 };
    let (a0, a1) = (n[(0, col)], n[(1, col)]);
    let an = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    let (e10, e11) = (a0 / an, a1 / an);
    // e2 ∝ N† e1, which is orthogonal to e1 for nilpotent N; its complement is exact.
    let (e20, e21) = (-e11.conj(), e10.conj());
    let mut basis = Mat2::new(e10, e20, e11, e21);
    let coupling = (basis.dagger() * n * basis)[(0, 1)];
    basis = basis * Mat2::diag(ONE, C64::from_polar(1.0, -coupling.arg()));
    let lambda = mean / mag;
    let form = LindbladForm::jordan(lambda, c * mag)?;
    Ok(Canonicalized::Canonical { form, h: h.conjugated(&basis), basis })
}

/// `H - (i c²/2)(λ σ- - conj(λ) σ+)`: the Hamiltonian that makes `c σ+`
/// equivalent to `c (λ I + σ+)`.
pub fn gauge_shift(h: &Hamiltonian, lambda: C64, c: f64) -> Hamiltonian {
    let shift = (Mat2::sigma_minus() * lambda - Mat2::sigma_plus() * lambda.conj()) * (I * (c * c / 2.0));
    let m = *h.matrix() - shift;
    Hamiltonian((m + m.dagger()) * 0.5)
}
