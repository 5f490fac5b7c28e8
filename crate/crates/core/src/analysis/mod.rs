//! Truncation errors and exactness, eigenvalue branches of the block
//! symbol, amplification bounds and stability verdicts.

pub mod functions;
mod spectral;
mod truncation;

pub use functions::{gauss_legendre, gauss_legendre_average, SmoothFn};
pub use spectral::{
    amplification, eigen_scan, lambda0_branch, lambda0_taylor, max_stable_xi, nonphysical_at_zero, scan_frequencies,
    stability_verdict, Amplification, SpectrumScan, StabilityOptions, StabilityReport, TaylorFit, TheoremCondition,
    Verdict, Witness, MAX_TAYLOR_ORDER, SCAN_TOL, TAYLOR_RADIUS, TAYLOR_ZERO,
};
pub use truncation::{
    cell_average_map, corrected_map, exactness_degree, exactness_report, is_exact, map_onto, symbol_truncation,
    truncation_at, truncation_error, ExactnessReport, Geometry, LocalMapping, TruncationError, UnitMesh,
};
