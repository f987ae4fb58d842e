pub mod bandwidth;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod kernels;
pub mod mise;
pub mod numerics;

pub use distributions::TargetDistribution;
pub use error::{Error, Result};
pub use estimator::{MonteCarloMise, Sample};
pub use kernels::Kernel;
pub use mise::{MiseMethod, MiseReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    pub mod estimators {}
    #[doc = include_str!("../../../book/src/exact-mise.md")]
    pub mod exact_mise {}
    #[doc = include_str!("../../../book/src/bandwidth.md")]
    pub mod bandwidth {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    pub mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
