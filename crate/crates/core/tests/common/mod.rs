#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use qubit_fgkls::model::{DensityMatrix, Hamiltonian, LindbladForm, SystemSpec};
use qubit_fgkls::numerics::{c64, Mat2, C64};

#[derive(Debug, Clone, Copy)]
pub struct Ranges {
    pub c: (f64, f64),
    pub lambda: f64,
    pub eps: f64,
}

/// c ∈ [0.1, 3], |λ| ≤ 3, |ε| ≤ 3.
pub const WIDE: Ranges = Ranges { c: (0.1, 3.0), lambda: 3.0, eps: 3.0 };
/// Ranges keeping RK4 at dt = 1e-3 cheap and well inside its step gate.
pub const MODERATE: Ranges = Ranges { c: (0.5, 1.5), lambda: 1.5, eps: 2.0 };

pub fn complex_in_disk(rng: &mut StdRng, r: f64) -> C64 {
    let rad = r * rng.gen::<f64>().sqrt();
    C64::from_polar(rad, rng.gen_range(0.0..std::f64::consts::TAU))
}

pub fn hamiltonian(rng: &mut StdRng, eps: f64) -> Hamiltonian {
    let e11 = rng.gen_range(-eps..eps);
    let e22 = rng.gen_range(-eps..eps);
    Hamiltonian::from_parts(e11, e22, complex_in_disk(rng, eps))
}

pub fn diagonal_hamiltonian(rng: &mut StdRng, eps: f64) -> Hamiltonian {
    Hamiltonian::diagonal(rng.gen_range(-eps..eps), rng.gen_range(-eps..eps))
}

pub fn coupling(rng: &mut StdRng, r: &Ranges) -> f64 {
    rng.gen_range(r.c.0..r.c.1)
}

pub fn jordan(rng: &mut StdRng, r: &Ranges) -> SystemSpec {
    let c = coupling(rng, r);
    let lambda = complex_in_disk(rng, r.lambda);
    SystemSpec::new(hamiltonian(rng, r.eps), LindbladForm::jordan(lambda, c).unwrap())
}

pub fn diagonal(rng: &mut StdRng, r: &Ranges) -> SystemSpec {
    let c = coupling(rng, r);
    let l1 = complex_in_disk(rng, r.lambda);
    let l2 = complex_in_disk(rng, r.lambda);
    SystemSpec::new(hamiltonian(rng, r.eps), LindbladForm::diagonal(l1, l2, c).unwrap())
}

pub fn general(rng: &mut StdRng, r: &Ranges) -> SystemSpec {
    let c = coupling(rng, r);
    let s = r.lambda / 2.0;
    let l = Mat2::new(
        complex_in_disk(rng, s),
        complex_in_disk(rng, s),
        complex_in_disk(rng, s),
        complex_in_disk(rng, s),
    );
    SystemSpec::new(hamiltonian(rng, r.eps), LindbladForm::general(l, c).unwrap())
}

/// Bloch vector drawn uniformly from the unit ball.
pub fn state(rng: &mut StdRng) -> DensityMatrix {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return DensityMatrix::from_bloch_parts(0.5 * (1.0 + v[2]), c64(0.5 * v[0], -0.5 * v[1]));
        }
    }
}

/// Jordan spec whose scaled cubic has the double root `-2/3 + y`,
/// `y ∈ [-1/12, 1/6] \ {0}`.
pub fn jordan_double_root(rng: &mut StdRng, y: f64, c: f64) -> SystemSpec {
    let e = 1.0 / 108.0 - y * y + 4.0 * y.powi(3);
    let k = 1.0 / 54.0 - y * y / 2.0 - y.powi(3);
    let de = if rng.gen::<bool>() { e.max(0.0).sqrt() } else { -e.max(0.0).sqrt() };
    let z = C64::from_polar(k.max(0.0).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    let lambda = complex_in_disk(rng, 0.3);
    // λ/2 + i e21 = z
    let e21 = (z - lambda / 2.0) * c64(0.0, -1.0);
    let c2 = c * c;
    let shift = rng.gen_range(-0.5..0.5);
    let h = Hamiltonian::from_parts(shift + c2 * de / 2.0, shift - c2 * de / 2.0, (e21 * c2).conj());
    SystemSpec::new(h, LindbladForm::jordan(lambda, c).unwrap())
}

/// Diagonal spec with `|λ1 - λ2| = 1` whose scaled cubic has the double root
/// `-1/3 + y`, `y ∈ [-1/6, 1/12] \ {0}`.
pub fn diagonal_double_root(rng: &mut StdRng, y: f64, c: f64) -> SystemSpec {
    let x = 1.0 / 54.0 - y * y / 2.0 + y.powi(3);
    let yy = 1.0 / 108.0 - y * y - 4.0 * y.powi(3);
    let l1 = complex_in_disk(rng, 0.5);
    let l2 = l1 + C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    let sq = if rng.gen::<bool>() { yy.max(0.0).sqrt() } else { -yy.max(0.0).sqrt() };
    let de = sq + (l1 * l2.conj()).im;
    let e12 = C64::from_polar(x.max(0.0).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    let c2 = c * c;
    let h = Hamiltonian::from_parts(c2 * de / 2.0, -c2 * de / 2.0, e12 * c2);
    SystemSpec::new(h, LindbladForm::diagonal(l1, l2, c).unwrap())
}

pub fn frob_dist(a: &Mat2, b: &Mat2) -> f64 {
    (*a - *b).frobenius()
}
