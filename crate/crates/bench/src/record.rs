//! Per-row benchmark records and their line-delimited persistence.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use motorscene_core::evaluation::Verdict;
use motorscene_core::templates::Route;
use motorscene_gateway::{CompletionRecord, StrategyName};
use serde::{Deserialize, Serialize};

use crate::aggregate::Endpoint;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Latency {
    pub api_s: f64,
    pub parse_execute_s: f64,
    pub render_ready_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tokens {
    /// Completion tokens of the accepted attempt; `None` when nothing was accepted.
    pub completion_success_rows: Option<u64>,
    /// Prompt plus completion tokens over every attempt issued.
    pub total_all_attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub suite: String,
    pub block: String,
    pub task_id: String,
    pub trial: u32,
    pub method: StrategyName,
    /// Attempt budget this row ran under.
    pub policy_k: u32,
    pub route: Route,
    pub attempts: Vec<CompletionRecord>,
    /// One verdict per attempt, aligned with `attempts`.
    pub attempt_verdicts: Vec<Verdict>,
    /// Verdict of the accepted attempt, or of the last one.
    pub verdict: Verdict,
    /// Endpoints the task defines ground truth for (parse is always applicable).
    pub endpoints: Vec<Endpoint>,
    pub latency: Latency,
    pub tokens: Tokens,
}

impl RunRecord {
    pub fn applies(&self, endpoint: Endpoint) -> bool {
        endpoint == Endpoint::Parse || self.endpoints.contains(&endpoint)
    }

    /// pass@k on one endpoint: some attempt among the first `k` meets it.
    pub fn success_at(&self, endpoint: Endpoint, k: u32) -> bool {
        self.attempt_verdicts.iter().take(k as usize).any(|v| endpoint.met_by(v))
    }

    pub fn outage(&self) -> bool {
        !self.attempts.is_empty() && self.attempts.iter().all(|a| a.error.is_some())
    }
}

/// Append-only JSONL sink; each row is flushed as it is written.
pub struct JsonlWriter {
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let file = File::create(path)?;
        Ok(Self { out: BufWriter::new(file) })
    }

    pub fn append(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { out: BufWriter::new(file) })
    }

    pub fn write(&mut self, record: &RunRecord) -> Result<(), BenchError> {
        serde_json::to_writer(&mut self.out, record).map_err(|e| BenchError::Records(e.to_string()))?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<RunRecord>, BenchError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| BenchError::Records(format!("{}:{}: {e}", path.display(), i + 1)))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn write_jsonl(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<(), BenchError> {
    let mut w = JsonlWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

/// Writes any flat serializable rows as CSV with a header.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::Records(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| BenchError::Records(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, BenchError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::Records(e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| BenchError::Records(e.to_string())))
        .collect()
}
