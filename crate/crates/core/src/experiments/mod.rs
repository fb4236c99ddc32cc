//! Study orchestration: configurations, counterexample studies, the property suite
//! and report rendering.

pub mod cli;
pub mod config;
pub mod props;
pub mod report;
pub mod studies;

pub use config::{Example, Format, Study, StudyConfig};
pub use props::{run_property_suite, suite_passed};
pub use report::{emit, emit_all, Cell, TableReport};
pub use studies::{study_cex1_projection, study_cex1_rom, study_cex2};
