//! Downlink coverage of ground and aerial users in a cellular network.
//!
//! Base stations form a Poisson point process thinned into LoS and NLoS
//! processes by a building-blockage model. Users associate with the base
//! station offering the strongest average signal, taking the vertically
//! sectored BS antenna and the drone's downward cone antenna into account.
//! Coverage is computed two independent ways:
//!
//! * [`analytic`]: exact stochastic-geometry evaluation (serving-distance
//!   density, interference Laplace transform and its derivatives, Nakagami
//!   conditional coverage), plus the LoS-only drone approximation.
//! * [`montecarlo`]: network realizations sampled and scored directly.
//!
//! [`experiments`] drives parameter sweeps and writes CSV artifacts.

pub mod analytic;
pub mod config;
pub mod error;
pub mod exclusion;
pub mod experiments;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod region;

pub use config::ScenarioConfig;
pub use error::{ConfigError, Error, ModelError, NumericError};
pub use model::{LinkType, Lobe, Scenario};
pub use region::RegionSet;
