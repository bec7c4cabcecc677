//! Scenario files, the four-subcase case-study runner, summary metrics and
//! CSV/JSON output for [`ffr_inertia`].

pub mod config;
mod error;
pub mod metrics;
pub mod output;
pub mod runner;

pub use config::{
    load_case_study, load_config, load_document, CaseStudyConfig, ConfigDocument, ScenarioConfig,
    Subcase, SubcaseParams,
};
pub use error::{Result, ScenarioError};
pub use metrics::SummaryMetrics;
pub use output::{emit_trace_csv, read_trace_csv};
pub use runner::{run_case_study, run_subcase, CaseStudy, CaseStudyReport, SubcaseRun};
