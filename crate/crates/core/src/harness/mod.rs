//! Scenario files, the example gallery, check pipelines and the randomized
//! falsification harness.

pub mod falsify;
pub mod gallery;
pub mod maps;
pub mod run;
pub mod scenario;

pub use falsify::{falsify, FalsifyConfig, FalsifySummary};
pub use gallery::{gallery, gallery_names, truncation_study};
pub use run::{exit_code, run_scenario, RunOutput, RunSummary, EXIT_CONFIG, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS};
pub use scenario::{Check, HomSpec, MetricSpec, Scenario, Side, Tolerances};
