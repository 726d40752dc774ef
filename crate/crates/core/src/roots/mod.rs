//! Root extraction, continuous tracking over frequency grids, pairing with
//! principal roots and implicit derivatives.

pub mod field;
pub mod grid;
pub mod jet;
pub mod pairing;
pub mod solver;

pub use field::{track_field, Coincidence, RootField};
pub use grid::{Axis, FrequencyGrid, GridKind};
pub use jet::{root_jet, RootJet};
pub use pairing::{pair_principal, Pairing};
pub use solver::{assign, nearest_root, solve_roots};
