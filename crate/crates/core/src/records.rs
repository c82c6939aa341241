//! Record CSV (`run,k,l`, one row per run, `\n` line endings) and the
//! plot-ready histogram export.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measurement::StrongOutcome;
use crate::simulator::RunRecord;

pub const RECORD_HEADER: [&str; 3] = ["run", "k", "l"];

#[derive(Serialize, Deserialize)]
struct Row {
    run: u64,
    k: i64,
    l: u8,
}

/// Streams records to CSV; returns the number of rows written.
pub fn write_records<W: Write>(out: W, records: impl IntoIterator<Item = RunRecord>) -> Result<u64> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut n = 0;
    for r in records {
        w.serialize(Row {
            run: r.run_index,
            k: r.k,
            l: r.l.index(),
        })
        .map_err(csv_error)?;
        n += 1;
    }
    if n == 0 {
        w.write_record(RECORD_HEADER).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(n)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Record {
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Parses a record CSV lazily. Every error names its 1-based line number.
pub fn read_records<R: Read>(input: R) -> Result<impl Iterator<Item = Result<RunRecord>>> {
    Ok(read_records_with_lines(input)?.map(|r| r.map(|(_, rec)| rec)))
}

/// As [`read_records`], pairing each record with its line number.
pub fn read_records_with_lines<R: Read>(
    input: R,
) -> Result<impl Iterator<Item = Result<(u64, RunRecord)>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(Error::Record {
            line: 1,
            message: format!("expected header `run,k,l`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(rdr.into_records().map(move |rec| {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: Row = rec.deserialize(Some(&header)).map_err(|e| Error::Record {
            line,
            message: e.to_string(),
        })?;
        let l = StrongOutcome::from_index(row.l).map_err(|e| Error::Record {
            line,
            message: e.to_string(),
        })?;
        Ok((
            line,
            RunRecord {
                run_index: row.run,
                k: row.k,
                l,
            },
        ))
    }))
}

/// Event counts per `(k, l)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KCounts {
    counts: BTreeMap<i64, [u64; 2]>,
    pub n: u64,
}

impl KCounts {
    pub fn push(&mut self, r: &RunRecord) {
        self.counts.entry(r.k).or_default()[r.l.index() as usize - 1] += 1;
        self.n += 1;
    }

    pub fn get(&self, k: i64) -> [u64; 2] {
        self.counts.get(&k).copied().unwrap_or_default()
    }

    /// Equal-width bins over `[k_min − ½, k_max + ½]`.
    pub fn histogram(&self, bins: usize) -> Result<Vec<HistogramBin>> {
        if bins == 0 {
            return Err(domain("bins must be at least 1"));
        }
        let (Some((&lo, _)), Some((&hi, _))) = (self.counts.first_key_value(), self.counts.last_key_value())
        else {
            return Err(Error::NoRecords);
        };
        let width = (hi - lo + 1) as f64 / bins as f64;
        let start = lo as f64 - 0.5;
        let mut out: Vec<HistogramBin> = (0..bins)
            .map(|i| HistogramBin {
                bin_center: start + (i as f64 + 0.5) * width,
                count_l1: 0,
                count_l2: 0,
                count_total: 0,
            })
            .collect();
        for (&k, c) in &self.counts {
            let i = (((k - lo) as f64 + 0.5) / width).floor() as usize;
            let b = &mut out[i.min(bins - 1)];
            b.count_l1 += c[0];
            b.count_l2 += c[1];
            b.count_total += c[0] + c[1];
        }
        Ok(out)
    }
}

impl<'a> FromIterator<&'a RunRecord> for KCounts {
    fn from_iter<I: IntoIterator<Item = &'a RunRecord>>(iter: I) -> Self {
        let mut c = Self::default();
        for r in iter {
            c.push(r);
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_center: f64,
    pub count_l1: u64,
    pub count_l2: u64,
    pub count_total: u64,
}

/// Writes `bin_center,count_l1,count_l2,count_total`, or only
/// `bin_center,count_total` when `split_by_l` is off.
pub fn write_histogram<W: Write>(out: W, bins: &[HistogramBin], split_by_l: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if split_by_l {
        w.write_record(["bin_center", "count_l1", "count_l2", "count_total"])
            .map_err(csv_error)?;
    } else {
        w.write_record(["bin_center", "count_total"]).map_err(csv_error)?;
    }
    for b in bins {
        let center = b.bin_center.to_string();
        if split_by_l {
            w.write_record([
                center,
                b.count_l1.to_string(),
                b.count_l2.to_string(),
                b.count_total.to_string(),
            ])
        } else {
            w.write_record([center, b.count_total.to_string()])
        }
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
