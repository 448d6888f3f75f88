//! Mixing, hitting and bottleneck analysis of policy-induced chains.
//!
//! Distribution mixing times live in [`mixing`], return mixing times in
//! [`ret`]; diameters, bottlenecks and the spectral gap have their own
//! modules. Every report serialises to JSON via serde and to CSV rows via
//! [`ToCsvRows`].

mod bottleneck;
mod hitting;
mod mixing;
mod report;
mod ret;
mod spectral;

pub use bottleneck::{
    bottleneck_ratio, conductance_brute_force, residence_time_simulated, BottleneckReport,
    ResidenceTime,
};
pub use hitting::{
    expected_hitting_times, first_return_times, graph_diameter, hitting_times_fundamental,
    min_diameter, policy_diameter, DiameterReport, MIN_DIAMETER_MAX_ITER,
};
pub use mixing::{
    cesaro_mixing_time, cesaro_mixing_time_capped, exact_mixing_time, exact_mixing_time_capped,
    tv_profile, DEFAULT_HORIZON_CAP,
};
pub use report::{to_csv, CsvRow, ToCsvRows, CSV_HEADER, CSV_SCHEMA};
pub use ret::{
    return_mixing_time_empirical, return_mixing_time_exact, EpsilonGrid, MixingReport, StartPoint,
};
pub use spectral::{spectral_gap, SPECTRAL_LIMIT};
