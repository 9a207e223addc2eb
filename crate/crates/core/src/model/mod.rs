//! Domain types and the analytic network model.

mod accounting;
mod detector;
mod params;

pub use accounting::{
    alpha_dagger, avg_energy, avg_throughput, energy_efficiency, evaluate,
    no_sensing_errors_baseline, scenario_table, scenario_table_with, transmit_power, EeBreakdown,
    Scenario, ScenarioRow,
};
pub(crate) use accounting::log2_1p;
pub use detector::{
    friis_harvested_power, friis_wavelength_for, prob_detection, prob_false_alarm, Detection,
};
pub(crate) use detector::{check_tau, pd_arg, pf_arg, pf_unchecked};
pub use params::{db_to_linear, FriisParams, NetworkParams, SensingParams, TimeSplit};
