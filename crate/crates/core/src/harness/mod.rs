//! Reproducible experiments producing CSV result tables.
//!
//! Every table is a pure function of the [`ExperimentSpec`]; parallel
//! trials are merged in grid-point then trial-index order.

mod experiments;
mod spec;
mod table;

pub use experiments::{
    default_adaptive_scene, default_equal_scene, run, run_mp_check, run_noise_error, run_pd_vs_snr,
    run_pfa_curve, run_roc, NoiseErrorMode,
};
pub use spec::{Experiment, ExperimentSpec, ROC_PFA_GRID};
pub use table::{read_config_hash, write_output, Cell, ResultTable};
