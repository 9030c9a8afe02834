//! Exact desk-scale simulation of collective spin–boson dynamics:
//! superradiant emission, super-transfer between symmetrized groups,
//! cooperative/normal sector decomposition, pure-dephasing scaling, and a
//! coarse-grained Monte Carlo model of coherence-assisted exciton diffusion.

pub mod cli;
pub mod diffusion;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod hamiltonians;
pub mod hilbert;
pub mod output;
pub mod sectors;

pub use error::{Error, Result};
