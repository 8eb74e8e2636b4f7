//! Benchmark harness: suites, the run loop, aggregation, pairwise reports and the
//! protocol snapshot. The `motorscene-bench` binary wraps these for the command line.

pub mod aggregate;
pub mod catalog;
pub mod record;
pub mod report;
pub mod runner;
pub mod snapshot;
pub mod suite;

use thiserror::Error;

pub use aggregate::{aggregate, Endpoint, MethodAggregate};
pub use record::{read_jsonl, write_jsonl, JsonlWriter, Latency, RunRecord, Tokens};
pub use report::{pairwise_report, PairwiseRow};
pub use runner::{run_suite, RunOptions};
pub use snapshot::{protocol_snapshot, ProtocolSnapshot, SnapshotConfig};
pub use suite::{BenchmarkSuite, Block, SceneSpec, ValidatorMode};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("suite: {0}")]
    Suite(String),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error("no records to aggregate")]
    EmptyRecords,
    #[error("records mix suites '{0}' and '{1}'")]
    MixedSuites(String, String),
    #[error("records: {0}")]
    Records(String),
    #[error(transparent)]
    Gateway(#[from] motorscene_gateway::GatewayError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
