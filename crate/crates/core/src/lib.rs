//! Truncated multivariate formal power series with exact Gaussian rational
//! coefficients, and the summability machinery built on them.

pub mod borel;
pub mod config;
pub mod decompose;
pub mod error;
pub mod expr;
pub mod gauss;
pub mod geometry;
pub mod gevrey;
pub mod io;
pub mod mseries;
pub mod operators;
pub mod pade;
pub mod pipeline;
pub mod quadrature;

pub use config::Config;
pub use decompose::{Base, Decomposition, LinearForm};
pub use error::{BorelError, DecomposeError, FitError, GeometryError, OperatorError, ParseError, SeriesError};
pub use gauss::GaussRational;
pub use geometry::{Couple, MonomialMap};
pub use gevrey::{GevreyFit, GrowthVerdict, Thresholds, VerdictKind, Window};
pub use mseries::{Exponent, Germ, MultiSeries};
