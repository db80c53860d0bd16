//! The records file: a header line followed by one JSON game record per
//! line, in game-index order.
//!
//! Everything except the `timing` field of each record is a pure function
//! of the configuration, so two runs with the same seed produce files that
//! are identical once timing is stripped.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

pub const RECORDS_VERSION: u32 = 1;

/// Identifies the code that produced a file.
pub fn build_fingerprint() -> String {
    format!("pandemic-lab {} core {}", env!("CARGO_PKG_VERSION"), pandemic_core::VERSION)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub records_version: u32,
    pub map_checksum: String,
    pub build: String,
    pub agent: String,
    pub total_games: usize,
    /// The experiment configuration as TOML.
    pub config: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Won,
    Lost,
    /// The game could not be completed; see `error`.
    Failed,
}

/// Wall-clock measurements, the only nondeterministic part of a record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    /// Seconds spent in each decision, in play order.
    pub decision_seconds: Vec<f64>,
    pub game_seconds: f64,
}

impl Timing {
    pub fn mean_decision(&self) -> Option<f64> {
        (!self.decision_seconds.is_empty())
            .then(|| self.decision_seconds.iter().sum::<f64>() / self.decision_seconds.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameRecord {
    pub game_index: usize,
    pub setup_id: String,
    pub seed: u64,
    pub outcome: Outcome,
    /// `outbreaks`, `cubes` or `player-cards` for lost games.
    pub loss_cause: Option<String>,
    /// Player turns, including the one in which the game ended.
    pub turns: u32,
    /// Applied actions by kind.
    pub action_counts: BTreeMap<String, u32>,
    pub decisions: u32,
    pub wasted_actions: u32,
    pub agent: String,
    pub map_checksum: String,
    pub error: Option<String>,
    pub timing: Timing,
}

impl GameRecord {
    /// The record as a JSON value without its timing field.
    pub fn without_timing(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("record serializes");
        v.as_object_mut().expect("object").remove("timing");
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordsFile {
    pub header: Header,
    pub records: Vec<GameRecord>,
}

/// Reads a records file. A final line without a newline is treated as a
/// torn write and ignored; any other malformed line is an error.
pub fn read(path: &Path) -> Result<RecordsFile> {
    let (file, _) = read_valid_prefix(path)?;
    Ok(file)
}

/// Parses the file and returns it with the byte length of its intact part.
fn read_valid_prefix(path: &Path) -> Result<(RecordsFile, u64)> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(f);
    let mut line = String::new();
    let mut offset = 0u64;
    let mut header: Option<Header> = None;
    let mut records = Vec::new();
    let mut lineno = 0;
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            break;
        }
        lineno += 1;
        if !line.ends_with('\n') {
            log::warn!("{}: ignoring incomplete last line", path.display());
            break;
        }
        let body = line.trim_end();
        match &header {
            None => {
                let h: Header =
                    serde_json::from_str(body).with_context(|| format!("{}: bad header", path.display()))?;
                ensure!(h.records_version == RECORDS_VERSION, "unsupported records version {}", h.records_version);
                header = Some(h);
            }
            Some(_) => {
                let r: GameRecord = serde_json::from_str(body)
                    .with_context(|| format!("{}:{lineno}: bad record", path.display()))?;
                records.push(r);
            }
        }
        offset += n as u64;
    }
    let Some(header) = header else { bail!("{}: no header line", path.display()) };
    Ok((RecordsFile { header, records }, offset))
}

/// Appends records, one flushed line each.
pub struct RecordWriter {
    out: BufWriter<File>,
}

impl RecordWriter {
    /// Starts a new file with `header`, replacing any existing one.
    pub fn create(path: &Path, header: &Header) -> Result<RecordWriter> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = RecordWriter { out: BufWriter::new(f) };
        w.line(header)?;
        Ok(w)
    }

    /// Reopens an existing file for appending after checking that it was
    /// written for `header`. Returns the writer and the records already
    /// present; a torn final line is cut off.
    pub fn resume(path: &Path, header: &Header) -> Result<(RecordWriter, Vec<GameRecord>)> {
        let (file, valid) = read_valid_prefix(path)?;
        let mut theirs = file.header.clone();
        theirs.build = header.build.clone();
        ensure!(
            theirs == *header,
            "{} was written by a different experiment; refusing to resume",
            path.display()
        );
        for (i, r) in file.records.iter().enumerate() {
            ensure!(r.game_index == i, "{}: records out of order at game {}", path.display(), r.game_index);
        }
        let mut f = OpenOptions::new().write(true).open(path)?;
        f.set_len(valid)?;
        f.seek(SeekFrom::End(0))?;
        Ok((RecordWriter { out: BufWriter::new(f) }, file.records))
    }

    pub fn write(&mut self, record: &GameRecord) -> Result<()> {
        self.line(record)
    }

    fn line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, value)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header {
        Header {
            records_version: RECORDS_VERSION,
            map_checksum: "abc".into(),
            build: build_fingerprint(),
            agent: "hpa".into(),
            total_games: 3,
            config: "x = 1\n".into(),
        }
    }

    fn record(i: usize) -> GameRecord {
        GameRecord {
            game_index: i,
            setup_id: format!("s{i}"),
            seed: 40 + i as u64,
            outcome: if i % 2 == 0 { Outcome::Won } else { Outcome::Lost },
            loss_cause: (i % 2 == 1).then(|| "cubes".to_string()),
            turns: 18,
            action_counts: [("drive".to_string(), 7)].into_iter().collect(),
            decisions: 30,
            wasted_actions: 1,
            agent: "hpa".into(),
            map_checksum: "abc".into(),
            error: None,
            timing: Timing { decision_seconds: vec![0.25, 0.5], game_seconds: 1.0 },
        }
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let mut w = RecordWriter::create(&p, &header()).unwrap();
        for i in 0..3 {
            w.write(&record(i)).unwrap();
        }
        drop(w);
        let f = read(&p).unwrap();
        assert_eq!(f.header, header());
        assert_eq!(f.records, (0..3).map(record).collect::<Vec<_>>());
        assert_eq!(f.records[0].timing.mean_decision(), Some(0.375));
        assert!(f.records[0].without_timing().get("timing").is_none());
    }

    #[test]
    fn resume_cuts_a_torn_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let mut w = RecordWriter::create(&p, &header()).unwrap();
        w.write(&record(0)).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&p).unwrap();
        f.write_all(b"{\"game_index\":1,\"setu").unwrap();
        drop(f);
        let (mut w, done) = RecordWriter::resume(&p, &header()).unwrap();
        assert_eq!(done.len(), 1);
        w.write(&record(1)).unwrap();
        drop(w);
        assert_eq!(read(&p).unwrap().records, vec![record(0), record(1)]);
    }

    #[test]
    fn resume_rejects_another_experiment() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        RecordWriter::create(&p, &header()).unwrap();
        let mut other = header();
        other.agent = "rpa".into();
        assert!(RecordWriter::resume(&p, &other).is_err());
    }

    #[test]
    fn garbage_in_the_middle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let mut w = RecordWriter::create(&p, &header()).unwrap();
        w.write(&record(0)).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&p).unwrap();
        f.write_all(b"not json\n").unwrap();
        drop(f);
        assert!(read(&p).is_err());
    }
}
