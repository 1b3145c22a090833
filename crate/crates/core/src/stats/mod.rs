//! Window statistics, equilibration observables and level-spacing diagnostics.

pub mod equilibration;
pub mod spacing;
pub mod window;

pub use equilibration::{
    equilibration_report, report_from_overlaps, universal_curve, EquilibrationReport, EULER_GAMMA, UNIVERSAL_GAP,
};
pub use spacing::{
    brody_fit, brody_pdf, ks_distance, poisson_cdf, spacing_stats, unfold_spectrum, wigner_cdf,
    Histogram, SpacingStats, UnfoldOptions,
};
pub use window::{window_stats, TimeWindow};
