//! Configuration, sweep execution and report generation behind the `qdyn`
//! command-line tool.

pub mod config;
pub mod run;
pub mod table1;

pub use config::{apply_overrides, parse_config, parse_config_value, ConfigError, Overrides, RunConfig};
pub use run::{run, thread_pool, RunError, RunOutput, RunReport, SweepRow};
pub use table1::{render_text, table1_report, Table1Report, Table1Settings};
