//! Symbols `L(tau, xi)` of constant-coefficient hyperbolic operators.

pub mod config;
pub mod corpus;
pub mod fokker_planck;
pub mod hyperbolic;
pub mod poly;
pub mod spec;
pub mod system;

pub use config::SymbolFile;
pub use fokker_planck::fokker_planck_symbol;
pub use hyperbolic::{hermite_triple_check, interlacing_check, HermiteVerdict};
pub use poly::MonomialPoly;
pub use spec::{LowerTerm, StabilityVerdict, SymbolPartials, SymbolSpec, TauPolynomial};
pub use system::{system_dispersion, SystemMatrix};
