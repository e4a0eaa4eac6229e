//! Desk-scale workbench for transfinite asymptotic dimension.
//!
//! * [`spaces`] builds finite integer metric spaces: grids, asymptotic sums,
//!   truncated unions of lattices, nets and coarse maps.
//! * [`covers`] checks, solves and transforms s-covers.
//! * [`trees`] computes ranks of finite trees, the Kleene-Brouwer order,
//!   `Ord` of set systems and empirical dimension trees.
//! * [`game`] runs the dimension game with the solver as player A.
//! * [`oracles`] holds brute-force verifiers and seeded property suites.
//! * [`experiment`] tabulates minimal cover sizes on truncated lattice unions.

pub mod canon;
pub mod covers;
pub mod error;
pub mod experiment;
pub mod game;
pub mod oracles;
pub mod spaces;
pub mod trees;

pub use error::{Error, Result};
