pub mod numerics;
pub mod model;
pub mod generator;
pub mod pointer;
pub mod spectral;
pub mod evolution;
pub mod oracle;
pub mod perturb;
pub mod uniton;
