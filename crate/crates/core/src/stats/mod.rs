//! Density estimation, gamma fitting, goodness of fit and inequality metrics.

mod gamma;
mod histogram;
mod inequality;
mod ks;
mod reference;

pub use gamma::{fit_gamma, fit_gamma_mle, fit_gamma_moments, gamma_cdf, gamma_pdf, FitMethod, GammaParams};
pub use histogram::{histogram, BinSpec, Histogram, MAX_BINS};
pub use inequality::{
    gini, gini_of_gamma, inequality_report, lorenz_curve, lorenz_curve_resampled, trapezoid_area, InequalityReport,
    REPORT_LORENZ_SEGMENTS,
};
pub use ks::ks_statistic;
pub use reference::{gibrat_index, gibrat_mode, gibrat_pdf, pareto_pdf};
