//! Random walks on the Bruhat–Tits building of SL₃(ℚ_p): exact p-adic linear
//! algebra, the building and its panel trees, and estimators for the
//! asymptotic behaviour of walk trajectories.

pub mod building;
pub mod cli;
pub mod error;
pub mod padic;
pub mod panel_tree;
pub mod random_walk;
pub mod weyl;

pub use error::{Error, Result};
