//! Matrix concentration inequalities for random Hermitian matrices.
//!
//! The crate is `no_std` (it needs `alloc`) and splits into four layers:
//!
//! * [`linalg`]: dense complex Hermitian algebra. Jacobi eigensolver,
//!   standard matrix functions, Schatten norms, the semidefinite order and
//!   the Hermitian dilation.
//! * [`bounds`]: closed-form tail, mean, moment and trace-mgf bounds
//!   (Hoeffding, Bernstein, refined, BDG, Khintchine, Rosenthal,
//!   combinatorial Bernstein, bounded differences).
//! * [`ensembles`]: concrete random-matrix models over small discrete state
//!   spaces, with seeded samplers and exact enumerators.
//! * [`stein`]: matrix Stein pairs for every ensemble family, exact
//!   conditional variances and the `r(ψ)` statistic.
//!
//! IO, file formats, the Monte Carlo harness and the command line live in
//! the companion `mcx` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod ensembles;
pub mod linalg;
mod math;
pub mod rng;
pub mod stein;

pub use num_complex::Complex64;

pub use bounds::{BoundError, BoundSet, Provenance, TailLaw};
pub use ensembles::{Ensemble, EnsembleError, EnsembleSpec, OutcomeTable, State};
pub use linalg::{EigenDecomposition, GeneralMatrix, HermitianMatrix, LinalgError};
pub use rng::CounterRng;
pub use stein::{PairSample, SteinError, SteinPairModel};
