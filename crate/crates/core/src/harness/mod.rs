//! Experiment orchestration: scenario ids, configuration, sweeps and CSV
//! output.

mod config;
mod link;
mod output;
mod scenario;
mod sweep;

pub use config::{ConfigFile, ExperimentConfig, ObservationMode, ReferenceChoice, StrategyOverride};
pub use link::{collect_llrs, frames_per_block, map_to_frames, FrameOutcome, Link};
pub use output::{format_number, to_csv_string, write_csv, ResultRow, CSV_HEADER};
pub use scenario::{parse_scenario, CombineMode, Scenario};
pub use sweep::{
    run_ber_sweep, run_detection_sweep, run_mutual_info, run_pmiss_pfalse, simulate_ber_point, uncoded_ber, BerPoint,
    SweepOutput,
};
