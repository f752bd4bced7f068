//! Experiment configuration and the operations behind the command-line
//! tool: code info, bound evaluation, file embed/extract and paired
//! QIM vs MD-QIM simulation.

mod commands;
mod config;
mod simulate;

pub use commands::{
    bound_report, embed_file, extract_file, info_report, sidecar_path, BoundReport, EmbedJob,
    EmbedSidecar, ExtractJob, ExtractReport, InfoReport, KindCounts,
};
pub use config::{
    ExperimentConfig, HostBlocks, HostSource, MessageSource, MethodChoice, Sweep,
    DEFAULT_HOST_CELLS, DEFAULT_ORACLE_TRIALS, DEFAULT_TRIALS,
};
pub use simulate::{
    simulate, theory_section, write_series, CodeSummary, Dominance, HostSummary, MethodReport,
    SeriesRow, SimulationReport, TheorySection, TIGHTNESS_ABOVE, TIGHTNESS_BELOW,
    TIGHTNESS_NO_ORACLE,
};
