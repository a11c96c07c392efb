//! Plain-text shot files.
//!
//! ```text
//! # version=1
//! # N=4
//! # seed=7
//! # nbar=0.84
//! shot_id,pattern
//! 0,0110
//! 1,0000
//! ```
//!
//! The header is a block of `#` lines holding `key=value` pairs (several per
//! line may be separated by commas). `version` and `N` are required; `seed`
//! and `nbar` are optional and any other key is kept verbatim. The
//! `shot_id,pattern` column line is optional. Bin 1 is the leftmost pattern
//! character and shot ids must increase strictly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Lines, Write};
use std::path::Path;

use crate::aggregate::{ShotRecord, ShotStatistics, MAX_BINS};
use crate::error::{Error, Result};

pub const SHOT_FORMAT_VERSION: u32 = 1;

const COLUMNS: &str = "shot_id,pattern";

/// Header block of a shot file.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotHeader {
    pub version: u32,
    pub n_bins: usize,
    pub seed: Option<u64>,
    /// Mean photon number of the coherent input, when known.
    pub nbar: Option<f64>,
    /// Any further `key=value` pairs, written back in key order.
    pub extra: BTreeMap<String, String>,
}

impl ShotHeader {
    pub fn new(n_bins: usize) -> Self {
        Self {
            version: SHOT_FORMAT_VERSION,
            n_bins,
            seed: None,
            nbar: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_nbar(mut self, nbar: f64) -> Self {
        self.nbar = Some(nbar);
        self
    }
}

/// A fully loaded shot file.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotFile {
    pub header: ShotHeader,
    pub records: Vec<ShotRecord>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Streaming reader: parses the header eagerly, then yields validated records.
pub struct ShotReader<R> {
    lines: Lines<R>,
    line_no: usize,
    header: ShotHeader,
    pending: Option<String>,
    last_id: Option<u64>,
}

impl<R: BufRead> ShotReader<R> {
    pub fn new(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut line_no = 0;
        let mut fields: Vec<(usize, String, String)> = Vec::new();
        let mut pending = None;
        for line in lines.by_ref() {
            let line = line?;
            line_no += 1;
            let text = line.trim_end_matches('\r');
            if let Some(rest) = text.strip_prefix('#') {
                for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (k, v) = item
                        .split_once('=')
                        .ok_or_else(|| parse_err(line_no, format!("header item `{item}` is not key=value")))?;
                    fields.push((line_no, k.trim().to_string(), v.trim().to_string()));
                }
            } else if text.trim().is_empty() {
                continue;
            } else {
                if text.trim() != COLUMNS {
                    pending = Some(text.to_string());
                }
                break;
            }
        }

        let mut version = None;
        let mut n_bins = None;
        let mut header = ShotHeader::new(0);
        for (line, key, value) in fields {
            let bad = |what: &str| parse_err(line, format!("invalid {what} `{value}`"));
            match key.as_str() {
                "version" => version = Some(value.parse::<u32>().map_err(|_| bad("version"))?),
                "N" => n_bins = Some(value.parse::<usize>().map_err(|_| bad("N"))?),
                "seed" => header.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "nbar" => header.nbar = Some(value.parse().map_err(|_| bad("nbar"))?),
                _ => {
                    header.extra.insert(key, value);
                }
            }
        }
        match version {
            None => return Err(Error::Schema("shot file header lacks `version`".into())),
            Some(SHOT_FORMAT_VERSION) => {}
            Some(v) => return Err(Error::Schema(format!("unsupported shot file version {v}"))),
        }
        header.n_bins = n_bins.ok_or_else(|| Error::Schema("shot file header lacks `N`".into()))?;
        if header.n_bins == 0 || header.n_bins > MAX_BINS {
            return Err(Error::Schema(format!(
                "N must be in 1..={MAX_BINS}, got {}",
                header.n_bins
            )));
        }
        let line_no = if pending.is_some() { line_no - 1 } else { line_no };
        Ok(Self {
            lines,
            line_no,
            header,
            pending,
            last_id: None,
        })
    }

    pub fn header(&self) -> &ShotHeader {
        &self.header
    }

    fn parse_row(&mut self, text: &str) -> Result<ShotRecord> {
        let line = self.line_no;
        let (id, pattern) = text
            .split_once(',')
            .ok_or_else(|| parse_err(line, "expected `shot_id,pattern`"))?;
        let shot_id: u64 = id
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("invalid shot_id `{id}`")))?;
        let pattern = pattern.trim();
        if pattern.len() != self.header.n_bins {
            return Err(parse_err(
                line,
                format!(
                    "pattern `{pattern}` has {} characters, expected {}",
                    pattern.len(),
                    self.header.n_bins
                ),
            ));
        }
        let pattern = pattern
            .bytes()
            .map(|b| match b {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(parse_err(
                    line,
                    format!("pattern character `{}` is not 0 or 1", b as char),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        match self.last_id {
            Some(prev) if shot_id == prev => return Err(parse_err(line, format!("duplicate shot_id {shot_id}"))),
            Some(prev) if shot_id < prev => {
                return Err(parse_err(
                    line,
                    format!("shot_id {shot_id} follows {prev}; ids must increase"),
                ))
            }
            _ => {}
        }
        self.last_id = Some(shot_id);
        Ok(ShotRecord { shot_id, pattern })
    }
}

impl<R: BufRead> Iterator for ShotReader<R> {
    type Item = Result<ShotRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.pending.take() {
                Some(t) => t,
                None => match self.lines.next()? {
                    Ok(t) => t,
                    Err(e) => return Some(Err(e.into())),
                },
            };
            self.line_no += 1;
            let text = text.trim_end_matches('\r');
            if text.trim().is_empty() {
                continue;
            }
            if text.starts_with('#') {
                return Some(Err(parse_err(self.line_no, "header line after data rows")));
            }
            return Some(self.parse_row(text));
        }
    }
}

pub fn open_shots(path: &Path) -> Result<ShotReader<BufReader<File>>> {
    ShotReader::new(BufReader::new(File::open(path)?))
}

pub fn read_shots(path: &Path) -> Result<ShotFile> {
    let reader = open_shots(path)?;
    let header = reader.header().clone();
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok(ShotFile { header, records })
}

/// Tallies a loaded shot file.
pub fn aggregate(file: &ShotFile) -> Result<ShotStatistics> {
    let mut stats = ShotStatistics::new(file.header.n_bins)?;
    for r in &file.records {
        stats.record(r)?;
    }
    Ok(stats)
}

/// Tallies a shot file without holding its records in memory.
pub fn aggregate_path(path: &Path) -> Result<(ShotHeader, ShotStatistics)> {
    let reader = open_shots(path)?;
    let header = reader.header().clone();
    let mut stats = ShotStatistics::new(header.n_bins)?;
    for r in reader {
        stats.record(&r?)?;
    }
    Ok((header, stats))
}

/// Streaming writer enforcing the same invariants the reader checks.
pub struct ShotWriter<W: Write> {
    inner: W,
    n_bins: usize,
    last_id: Option<u64>,
    line: String,
}

impl<W: Write> ShotWriter<W> {
    pub fn new(mut inner: W, header: &ShotHeader) -> Result<Self> {
        if header.n_bins == 0 || header.n_bins > MAX_BINS {
            return Err(Error::Domain(format!(
                "N must be in 1..={MAX_BINS}, got {}",
                header.n_bins
            )));
        }
        writeln!(inner, "# version={}", header.version)?;
        writeln!(inner, "# N={}", header.n_bins)?;
        if let Some(seed) = header.seed {
            writeln!(inner, "# seed={seed}")?;
        }
        if let Some(nbar) = header.nbar {
            writeln!(inner, "# nbar={nbar:?}")?;
        }
        for (k, v) in &header.extra {
            writeln!(inner, "# {k}={v}")?;
        }
        writeln!(inner, "{COLUMNS}")?;
        Ok(Self {
            inner,
            n_bins: header.n_bins,
            last_id: None,
            line: String::new(),
        })
    }

    pub fn write(&mut self, record: &ShotRecord) -> Result<()> {
        if record.pattern.len() != self.n_bins {
            return Err(Error::DimensionMismatch {
                expected: self.n_bins,
                actual: record.pattern.len(),
            });
        }
        if self.last_id.is_some_and(|prev| record.shot_id <= prev) {
            return Err(Error::Domain(format!("shot_id {} does not increase", record.shot_id)));
        }
        self.last_id = Some(record.shot_id);
        self.line.clear();
        self.line.push_str(&record.shot_id.to_string());
        self.line.push(',');
        self.line
            .extend(record.pattern.iter().map(|&b| if b { '1' } else { '0' }));
        self.line.push('\n');
        self.inner.write_all(self.line.as_bytes())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Writes a shot file and returns the number of records written.
pub fn write_shots<I>(path: &Path, header: &ShotHeader, records: I) -> Result<u64>
where
    I: IntoIterator<Item = ShotRecord>,
{
    let mut w = ShotWriter::new(BufWriter::new(File::create(path)?), header)?;
    let mut n = 0;
    for r in records {
        w.write(&r)?;
        n += 1;
    }
    w.finish()?;
    Ok(n)
}
