//! Exact computation with multilinear polynomials on upper triangular
//! matrices: commutator-degree, polynomial-identity testing, and constructive
//! preimages `f(c1, …, cm) = A` inside the radical power the image fills.
//!
//! Everything is generic over the [`Scalar`] coefficient type; the crate-root
//! aliases fix the exact rational instantiation used by the CLI and all
//! certificate formats.
//!
//! ```
//! use utimage::degree::commutator_degree;
//! use utimage::freealg::parse;
//! use utimage::solver::{DEFAULT_MAX_RETRIES, solve_preimage};
//! use utimage::{Matrix, Poly};
//!
//! // [x1,x2][x3,x4] vanishes on 2x2 upper triangular matrices but not on
//! // 3x3 ones, and its values on UT_n fill J^2 exactly.
//! let f: Poly = parse("[x1,x2]*[x3,x4]").unwrap();
//! assert_eq!(commutator_degree(&f).unwrap().degree, 2);
//!
//! let target = Matrix::unit(3, 1, 3).unwrap();
//! let cert = solve_preimage(&f, &target, 0, DEFAULT_MAX_RETRIES).unwrap();
//! assert!(cert.verified);
//! ```

pub mod degree;
pub mod error;
pub mod freealg;
pub mod scalar;
pub mod solver;
pub mod triangular;

pub use error::{Error, Result};
pub use freealg::{MultilinearPoly, Permutation};
pub use scalar::Scalar;
pub use triangular::{MatrixUnit, UTMatrix};

/// Arbitrary-precision rational, the default exact scalar.
pub type Rat = num_rational::BigRational;

/// Multilinear polynomial over exact rationals.
pub type Poly = MultilinearPoly<Rat>;

/// Upper triangular matrix over exact rationals.
pub type Matrix = UTMatrix<Rat>;
