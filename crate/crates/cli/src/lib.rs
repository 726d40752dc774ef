//! Configuration, commands and report rendering for the `hyperdisp` binary.

pub mod commands;
pub mod config;
pub mod render;

pub use commands::{analyze, corpus_list, corpus_show, simulate, verify, AnalyzeOutput, SimulateOutput, Verdict, VerifyReport};
pub use config::{load_config, parse_config, JobConfig};
