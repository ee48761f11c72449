//! CSV persistence for metric series.
//!
//! A file starts with a schema line, then a header row, then one row per
//! record. Floats carry 17 significant digits so reading them back is exact.
//!
//! ```text
//! # schema=fedualex.runrecord/1
//! method,round,cumulative_local_steps,duality_gap,sparsity_x,sparsity_y,rank_x,rank_y,wall_ms,seed
//! ```

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use fedualex::fedsim::{AggregateRecord, RunRecord};
use fedualex::optimizers::Method;

use crate::error::{CliError, Result};

pub const RUN_SCHEMA: &str = "fedualex.runrecord/1";
pub const AGGREGATE_SCHEMA: &str = "fedualex.aggregate/1";

pub const RUN_COLUMNS: [&str; 10] = [
    "method",
    "round",
    "cumulative_local_steps",
    "duality_gap",
    "sparsity_x",
    "sparsity_y",
    "rank_x",
    "rank_y",
    "wall_ms",
    "seed",
];

pub const AGGREGATE_COLUMNS: [&str; 14] = [
    "method",
    "round",
    "cumulative_local_steps",
    "seeds",
    "gap_mean",
    "gap_std",
    "sparsity_x_mean",
    "sparsity_x_std",
    "sparsity_y_mean",
    "sparsity_y_std",
    "rank_x_mean",
    "rank_x_std",
    "rank_y_mean",
    "rank_y_std",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn write_table<W: Write>(
    out: W,
    schema: &str,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "# schema={schema}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}

fn run_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.method.to_string(),
        r.round.to_string(),
        r.cumulative_local_steps.to_string(),
        fmt_float(r.duality_gap),
        fmt_float(r.sparsity_x),
        fmt_float(r.sparsity_y),
        r.rank_x.to_string(),
        r.rank_y.to_string(),
        fmt_float(r.wall_ms),
        r.seed.to_string(),
    ]
}

fn aggregate_row(a: &AggregateRecord) -> Vec<String> {
    let mut row = vec![
        a.method.to_string(),
        a.round.to_string(),
        a.cumulative_local_steps.to_string(),
        a.seeds.to_string(),
    ];
    row.extend(
        [
            a.gap_mean,
            a.gap_std,
            a.sparsity_x_mean,
            a.sparsity_x_std,
            a.sparsity_y_mean,
            a.sparsity_y_std,
            a.rank_x_mean,
            a.rank_x_std,
            a.rank_y_mean,
            a.rank_y_std,
        ]
        .map(fmt_float),
    );
    row
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> std::io::Result<()> {
    write_table(out, RUN_SCHEMA, &RUN_COLUMNS, records.iter().map(run_row))
}

pub fn write_aggregate<W: Write>(out: W, rows: &[AggregateRecord]) -> std::io::Result<()> {
    write_table(
        out,
        AGGREGATE_SCHEMA,
        &AGGREGATE_COLUMNS,
        rows.iter().map(aggregate_row),
    )
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    write_records(create(path)?, records).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_aggregate_csv(rows: &[AggregateRecord], path: &Path) -> Result<()> {
    write_aggregate(create(path)?, rows).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a run-record table. `origin` only labels errors.
pub fn read_records<R: Read>(input: R, origin: &Path) -> Result<Vec<RunRecord>> {
    let bad = |detail: String| CliError::Format {
        path: origin.to_path_buf(),
        detail,
    };
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first).map_err(|source| CliError::Io {
        path: origin.to_path_buf(),
        source,
    })?;
    let expected = format!("# schema={RUN_SCHEMA}");
    if first.trim_end() != expected {
        return Err(bad(format!(
            "line 1: expected `{expected}`, found `{}`",
            first.trim_end()
        )));
    }

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(RUN_COLUMNS.iter().copied()) {
        let found: Vec<&str> = header.iter().collect();
        return Err(bad(format!(
            "line 2: expected columns {}, found {}",
            RUN_COLUMNS.join(","),
            found.join(",")
        )));
    }

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 3;
        let row = row.map_err(|e| bad(format!("line {line}: {e}")))?;
        let field = |c: usize| -> &str { row.get(c).unwrap_or("") };
        macro_rules! parse {
            ($c:expr, $t:ty) => {
                field($c)
                    .parse::<$t>()
                    .map_err(|e| bad(format!("line {line}, column {}: {e}", RUN_COLUMNS[$c])))?
            };
        }
        records.push(RunRecord {
            method: parse!(0, Method),
            round: parse!(1, usize),
            cumulative_local_steps: parse!(2, u64),
            duality_gap: parse!(3, f64),
            sparsity_x: parse!(4, f64),
            sparsity_y: parse!(5, f64),
            rank_x: parse!(6, usize),
            rank_y: parse!(7, usize),
            wall_ms: parse!(8, f64),
            seed: parse!(9, u64),
        });
    }
    Ok(records)
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_records(file, path)
}
