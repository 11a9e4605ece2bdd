//! Measurement-based quantum computation on one-dimensional
//! symmetry-protected topologically ordered matrix product states.
//!
//! The crate is organised bottom-up:
//!
//! * [`mps`] holds the MPS tensor, transfer channels, canonical form and
//!   brute-force contraction oracles.
//! * [`symmetry`] builds the spin-1 octahedral generators, extracts virtual
//!   symmetry operators, classifies the D2 phase and splits the virtual space
//!   into protected and junk factors.
//! * [`renorm`] implements buffering (postselected Pauli measurements around a
//!   computational site), the Jordan analysis of the junk operators and the
//!   RG fixed point.
//! * [`mqc`] turns buffered tensors into gates: measurement outcomes, gate
//!   fidelity, postselection probability, overhead and a stochastic protocol
//!   simulator.
//! * [`orderparam`] computes bare and renormalized string order parameters.
//! * [`toymodel`] constructs the AKLT state and the two-parameter S4 family.
//! * [`sweep`] runs parameter sweeps and writes the CSV/JSON tables consumed
//!   by plotting scripts and by the acceptance suite.
//!
//! ```
//! use sptmqc::{toymodel, renorm, mqc, BufferAxis};
//!
//! let state = toymodel::toy_tensor(toymodel::ToyModelParams::new(1.2, 0.4)).unwrap();
//! let limit = renorm::fixed_point(&state, BufferAxis::Z).unwrap();
//! let report = mqc::gate_fidelity(&limit, std::f64::consts::FRAC_PI_2, None, None).unwrap();
//! assert!((report.fidelity - 1.0).abs() < 1e-9);
//! ```

mod extended;
pub mod length;
pub mod linalg;
pub mod mps;
pub mod mqc;
pub mod orderparam;
pub mod renorm;
pub mod sweep;
pub mod symmetry;
pub mod toymodel;

pub use length::Length;
pub use linalg::{CMat, C64};
pub use mps::{CanonicalData, MPSTensor, TransferChannel};
pub use renorm::{JordanSpectrum, RenormResult};
pub use symmetry::{Axis, BufferAxis, FactorizedTensor, PhaseLabel, SymmetryAction};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("unknown basis label `{0}`")]
    Label(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("numerical degeneracy: {message} (spectrum moduli: {spectrum:?})")]
    NumericalDegeneracy { message: String, spectrum: Vec<f64> },
    #[error("tensor is not in canonical form (|E(I) - I| = {0:e})")]
    NotCanonical(f64),
    #[error("physical operator is not a symmetry: largest mixed-channel eigenvalue modulus {0}")]
    NotASymmetry(f64),
    #[error("virtual symmetry is ambiguous: {0} eigenvalues of unit modulus")]
    AmbiguousSymmetry(usize),
    #[error("virtual space is reducible: group commutator deviates from a scalar by {0:e}")]
    ReducibleVirtualSpace(f64),
    #[error("protected/junk factorization failed: {0}")]
    Factorization(String),
    #[error("junk symmetry does not commute with the junk operator (|[u, a]| = {0:e})")]
    SymmetryMismatch(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("RG flow stalls: the two largest junk eigenvalues have equal modulus")]
    StalledFlow,
    #[error("measurement outcome has vanishing probability ({0:e})")]
    NullOutcome(f64),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
