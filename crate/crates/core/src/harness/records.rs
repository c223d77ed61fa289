//! The results file: one JSON object per line, tagged by `type`. The first
//! line is a header holding the experiment config. Lines are only ever
//! appended, so a crash leaves a readable prefix.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::meta::MetaGeneration;
use crate::params::ParameterSet;
use crate::random_search::{BaselineOutcome, CampaignRecord, SweepRecord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: u32,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    /// Trial index of the tested set in the source campaign.
    pub trial: usize,
    pub params: ParameterSet,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: BaselineOutcome,
}

/// Written once the experiment has finished.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub total: usize,
    pub successes: usize,
    pub yield_percent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solutions_tested: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Header(Header),
    Trial(CampaignRecord),
    Sweep(SweepRecord),
    MetaGeneration(MetaGeneration),
    Baseline(BaselineRecord),
    Summary(RunSummary),
}

impl Record {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("records serialize");
        s.push('\n');
        s
    }
}

/// Everything readable from a results file.
#[derive(Clone, Debug, Default)]
pub struct RecordFile {
    pub header: Option<Header>,
    /// Records other than the header and summary, in file order.
    pub body: Vec<Record>,
    pub summary: Option<RunSummary>,
    /// Lines that failed to parse.
    pub corrupt: usize,
    /// Line numbers (1-based) of the corrupt lines.
    pub corrupt_lines: Vec<usize>,
    /// Byte length of the prefix ending with the last parseable line.
    pub valid_len: u64,
    /// True if the file ends in a line without a newline.
    pub partial_tail: bool,
}

impl RecordFile {
    pub fn trials(&self) -> impl Iterator<Item = &CampaignRecord> {
        self.body.iter().filter_map(|r| match r {
            Record::Trial(t) => Some(t),
            _ => None,
        })
    }

    pub fn sweeps(&self) -> impl Iterator<Item = &SweepRecord> {
        self.body.iter().filter_map(|r| match r {
            Record::Sweep(t) => Some(t),
            _ => None,
        })
    }

    pub fn generations(&self) -> impl Iterator<Item = &MetaGeneration> {
        self.body.iter().filter_map(|r| match r {
            Record::MetaGeneration(t) => Some(t),
            _ => None,
        })
    }

    pub fn baselines(&self) -> impl Iterator<Item = &BaselineRecord> {
        self.body.iter().filter_map(|r| match r {
            Record::Baseline(t) => Some(t),
            _ => None,
        })
    }
}

/// Reads a results file, skipping and counting lines that do not parse.
pub fn read_records(path: &Path) -> Result<RecordFile> {
    let file = File::open(path).map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut reader = BufReader::new(file);
    let mut out = RecordFile::default();
    let mut offset = 0u64;
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            break;
        }
        number += 1;
        offset += n as u64;
        if !line.ends_with('\n') {
            out.partial_tail = true;
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(&line) {
            Ok(Record::Header(h)) if out.header.is_none() && out.body.is_empty() => out.header = Some(h),
            Ok(Record::Summary(s)) => out.summary = Some(s),
            Ok(Record::Header(_)) => {
                out.corrupt += 1;
                out.corrupt_lines.push(number);
                continue;
            }
            Ok(r) => out.body.push(r),
            Err(_) => {
                out.corrupt += 1;
                out.corrupt_lines.push(number);
                continue;
            }
        }
        out.valid_len = offset;
    }
    Ok(out)
}

/// Single appender for a results file.
pub struct ResultsWriter {
    path: PathBuf,
    file: File,
}

impl ResultsWriter {
    /// Opens `path` for appending after cutting it to `keep` bytes.
    pub fn open(path: &Path, keep: u64) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        file.set_len(keep)?;
        Ok(ResultsWriter {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &Record) -> Result<()> {
        self.file.write_all(record.to_line().as_bytes())?;
        self.file.flush()?;
        Ok(())
    }
}
