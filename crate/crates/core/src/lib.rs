//! Stepdown and stepup multiple testing with maximin-optimal critical
//! constants.
//!
//! The numerical core is generic over [`scalar::Real`] (`f64` and `f32`); the
//! aliases below fix it at the usual precision.
//!
//! ```
//! use stepwise::{Model, constants::solve_stepdown, procedures::stepdown_decide};
//!
//! let model = Model::iid_normal(3).unwrap();
//! let ladder = solve_stepdown(&model, 0.05).unwrap();
//! let decision = stepdown_decide(&[3.1, 0.2, 2.2], &ladder).unwrap();
//! assert_eq!(decision.rejected(), vec![0, 2]);
//! ```

pub mod constants;
pub mod error;
pub mod gridoracle;
pub mod models;
pub mod normal;
pub mod orderstat;
pub mod power;
pub mod procedures;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod simharness;
pub mod verify;

pub use error::{Error, Result};

pub type Model = models::ModelSpec<f64>;
pub type Model32 = models::ModelSpec<f32>;
pub type Theta = models::ThetaVector<f64>;
pub type Ladder = constants::ConstantLadder<f64>;
pub type Ladder32 = constants::ConstantLadder<f32>;
pub type Pair = constants::PairConstants<f64>;
pub type Decision = procedures::Decision<f64>;
pub type Procedure = simharness::Procedure<f64>;
pub type Report = simharness::SimulationReport<f64>;
pub type RationalGrid = gridoracle::GridModel<num_rational::Ratio<i128>>;
