pub mod decaylab;
pub mod error;
pub mod fraccalc;
pub mod linalg;
pub mod multiplier;
pub mod numcore;
pub mod operators;
pub mod resolvent;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};

pub type LogGrid = numcore::LogGrid<f64>;
pub type PowerFit = numcore::PowerFit<f64>;
pub type ExpFit = numcore::ExpFit<f64>;
