use thiserror::Error;

use qubit_fgkls::evolution::EvolutionError;
use qubit_fgkls::model::ModelError;
use qubit_fgkls::oracle::OracleError;
use qubit_fgkls::perturb::PerturbError;
use qubit_fgkls::pointer::PointerError;
use qubit_fgkls::spectral::SpectralError;
use qubit_fgkls::uniton::UnitonError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Contract(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Contract(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Contract(e.to_string())
    }
}

impl From<PointerError> for CliError {
    fn from(e: PointerError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::NotReducible(_) | EvolutionError::NotDecaying(_) | EvolutionError::NonPhysicalPointer => {
                CliError::Contract(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PerturbError> for CliError {
    fn from(e: PerturbError) -> Self {
        match e {
            PerturbError::Spectral(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Contract(e.to_string())
    }
}

impl From<UnitonError> for CliError {
    fn from(e: UnitonError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qubit_fgkls::numerics::ZERO;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(ModelError::NegativeCoupling(-1.0)).exit_code(), 3);
        assert_eq!(CliError::from(PerturbError::NonDiagonalH(0.3)).exit_code(), 3);
        assert_eq!(CliError::from(EvolutionError::NotDecaying(0.0)).exit_code(), 3);
        assert_eq!(CliError::from(EvolutionError::SingularFit).exit_code(), 4);
        assert_eq!(CliError::from(SpectralError::ChainInconsistent { root: ZERO, residual: 1.0 }).exit_code(), 4);
        assert_eq!(CliError::from(PointerError::Inconsistent).exit_code(), 4);
        assert_eq!(CliError::Schema(String::new()).exit_code(), 2);
    }
}
