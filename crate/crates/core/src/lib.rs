//! Grey-system forecasting.
//!
//! Building blocks for hybrid forecasts of short, noisy series:
//!
//! - [`series`]: accumulated generation (AGO), its inverse and window helpers
//! - [`gm`]: the GM(1,1) grey model and the posterior accuracy test
//! - [`dgm`]: the non-homogeneous discrete grey model with optimal initial value
//! - [`markov`]: residual states, transition counting, the Markov-property
//!   chi-squared test and fuzzy-weight Markov correction
//! - [`neural`]: a small back-propagation network and its grey wrappers
//! - [`hybrid`]: combination weights and combination formulas
//! - [`metrics`]: MSE, MAE, MAPE and the Theil coefficient
//! - [`pipeline`]: the discrete grey / fuzzy Markov composite model

pub mod dgm;
mod error;
pub mod gm;
pub mod hybrid;
pub mod markov;
pub mod metrics;
pub mod neural;
pub mod pipeline;
pub mod series;

pub use error::{Error, Result};
pub use series::TimeSeries;
