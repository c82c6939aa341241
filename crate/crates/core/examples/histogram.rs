//! Writes simulated records to CSV, reads them back and prints a
//! plot-ready histogram split by the strong outcome.

use std::io;

use weakmeas::records::{read_records, write_histogram, write_records, KCounts};
use weakmeas::simulator::{run_experiment, SimConfig};

fn main() -> weakmeas::Result<()> {
    let cfg = SimConfig { f_avg: 0.05, k_rms: 200.0, alpha: 0.1, runs: 100_000, seed: 1 };
    let mut csv = Vec::new();
    let n = write_records(&mut csv, run_experiment(&cfg)?)?;
    eprintln!("wrote {n} records ({} bytes)", csv.len());

    let mut counts = KCounts::default();
    for r in read_records(csv.as_slice())? {
        counts.push(&r?);
    }
    write_histogram(io::stdout().lock(), &counts.histogram(25)?, true)
}
