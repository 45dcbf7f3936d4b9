//! Job file schema and its conversion into library types.

use rand::rngs::StdRng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use qubit_fgkls::model::{DensityMatrix, Hamiltonian, LindbladForm, SystemSpec};
use qubit_fgkls::numerics::{c64, Mat2, C64};

use crate::error::CliError;

/// `[re, im]`.
pub type Complex = [f64; 2];
/// Row-major 2×2 matrix of complex entries.
pub type Matrix = [[Complex; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pointer,
    Spectrum,
    Evolve,
    Positivity,
    Perturb,
    Uniton,
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Diagonal,
    Jordan,
    General,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladJob {
    pub form: Form,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemJob {
    pub hamiltonian: Matrix,
    pub lindblad: LindbladJob,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub format: Option<Format>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub command: Command,
    /// Drawn from `--seed` when absent.
    pub system: Option<SystemJob>,
    pub initial_state: Option<Matrix>,
    pub time_grid: Option<TimeGrid>,
    #[serde(default)]
    pub output: Output,
    /// Pointer series order for `perturb`.
    pub order: Option<u32>,
    /// Integrator step for `oracle-check`.
    pub dt: Option<f64>,
}

/// Job text plus the line each top-level key sits on, for error messages.
pub struct Source<'a> {
    pub name: &'a str,
    pub text: &'a str,
}

impl Source<'_> {
    pub fn line_of(&self, key: &str) -> usize {
        let needle = format!("\"{key}\"");
        self.text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
    }

    pub fn schema_at(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Schema(format!("{}:{}: {msg}", self.name, self.line_of(key)))
    }
}

pub fn parse(src: &Source) -> Result<Job, CliError> {
    serde_json::from_str(src.text)
        .map_err(|e| CliError::Schema(format!("{}:{}:{}: {e}", src.name, e.line(), e.column())))
}

pub fn complex(z: Complex) -> C64 {
    c64(z[0], z[1])
}

pub fn matrix(m: &Matrix) -> Mat2 {
    Mat2::new(complex(m[0][0]), complex(m[0][1]), complex(m[1][0]), complex(m[1][1]))
}

pub fn to_complex(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn to_matrix(m: &Mat2) -> Matrix {
    [
        [to_complex(m[(0, 0)]), to_complex(m[(0, 1)])],
        [to_complex(m[(1, 0)]), to_complex(m[(1, 1)])],
    ]
}

pub fn system(job: &SystemJob, src: &Source) -> Result<SystemSpec, CliError> {
    let h = Hamiltonian::new(matrix(&job.hamiltonian))?;
    let lj = &job.lindblad;
    let need = |v: Option<Complex>, name: &str| {
        v.map(complex).ok_or_else(|| src.schema_at("lindblad", format!("{:?} form requires \"{name}\"", lj.form)))
    };
    let l = match lj.form {
        Form::Diagonal => LindbladForm::diagonal(need(lj.lambda1, "lambda1")?, need(lj.lambda2, "lambda2")?, lj.c)?,
        Form::Jordan => LindbladForm::jordan(need(lj.lambda, "lambda")?, lj.c)?,
        Form::General => {
            let l = lj.l.as_ref().ok_or_else(|| src.schema_at("lindblad", "general form requires \"l\""))?;
            LindbladForm::general(matrix(l), lj.c)?
        }
    };
    Ok(SystemSpec::new(h, l))
}

pub fn density(m: &Matrix) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(matrix(m))?)
}

fn disk(rng: &mut StdRng, r: f64) -> Complex {
    let z = C64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    to_complex(z)
}

/// Jordan system with `c ∈ [0.5, 1.5]`, `|λ| ≤ 1.5` and `|ε| ≤ 2`.
pub fn random_system(rng: &mut StdRng) -> SystemJob {
    let e11 = rng.gen_range(-2.0..2.0);
    let e22 = rng.gen_range(-2.0..2.0);
    let e12 = disk(rng, 2.0);
    let c = rng.gen_range(0.5..1.5);
    let lambda = disk(rng, 1.5);
    SystemJob {
        hamiltonian: [[[e11, 0.0], e12], [[e12[0], -e12[1]], [e22, 0.0]]],
        lindblad: LindbladJob { form: Form::Jordan, c, lambda: Some(lambda), lambda1: None, lambda2: None, l: None },
    }
}

/// Uniform over the Bloch ball.
pub fn random_state(rng: &mut StdRng) -> Matrix {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            let f11 = 0.5 * (1.0 + v[2]);
            return [[[f11, 0.0], [0.5 * v[0], -0.5 * v[1]]], [[0.5 * v[0], 0.5 * v[1]], [1.0 - f11, 0.0]]];
        }
    }
}
