use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{quantity} = {value} is outside its domain ({expected})")]
    Domain { quantity: &'static str, value: f64, expected: &'static str },

    /// A model or traffic parameter violates its invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error(
        "quadrature did not converge: error estimate {estimate:e} > tolerance {tolerance:e} \
         with {nodes} nodes (raise cf_nodes or rel_tol)"
    )]
    QuadratureNotConverged { estimate: f64, tolerance: f64, nodes: usize },

    #[error(
        "inverse Fourier reconstruction needed a renormalization of {correction:e} \
         (budget {budget:e}); raise inversion_t_max or inversion_nodes"
    )]
    Renormalization { correction: f64, budget: f64 },

    #[error(
        "convolution grid too coarse: error estimate {estimate:e} > tolerance {tolerance:e} \
         (raise convolution_nodes)"
    )]
    ConvolutionTooCoarse { estimate: f64, tolerance: f64 },

    #[error("tabulated distribution invariant violated: {0}")]
    InvalidDistribution(&'static str),
}
