use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Column, ColumnKind, Dataset, Schema, TabularError};

/// What to do with a row that has an empty cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    DropRow,
    #[default]
    Error,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, missing: MissingPolicy) -> Result<Dataset, TabularError> {
    read_csv(std::fs::File::open(path)?, schema, missing)
}

/// Parses CSV with a mandatory header row that must equal the schema's
/// column names in order.
pub fn read_csv<R: Read>(reader: R, schema: &Schema, missing: MissingPolicy) -> Result<Dataset, TabularError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = schema.names().collect();
    if header.iter().ne(expected.iter().copied()) {
        return Err(TabularError::HeaderMismatch {
            expected: expected.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let lookups: Vec<HashMap<&str, u32>> = schema
        .columns()
        .iter()
        .map(|c| c.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect())
        .collect();
    let mut columns: Vec<Column> = schema
        .columns()
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Continuous => Column::Continuous(Vec::new()),
            ColumnKind::Categorical => Column::Categorical(Vec::new()),
        })
        .collect();

    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    let mut parsed: Vec<Option<ParsedCell>> = Vec::with_capacity(schema.len());
    while rdr.read_record(&mut record)? {
        row += 1;
        parsed.clear();
        let mut has_missing = false;
        for (j, spec) in schema.columns().iter().enumerate() {
            let raw = record.get(j).unwrap_or("");
            if raw.is_empty() {
                if missing == MissingPolicy::Error {
                    return Err(TabularError::MissingValue { row, column: spec.name.clone() });
                }
                has_missing = true;
                parsed.push(None);
                continue;
            }
            let cell = match spec.kind {
                ColumnKind::Continuous => match raw.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => ParsedCell::Num(x),
                    _ => {
                        return Err(TabularError::TypeError {
                            row,
                            column: spec.name.clone(),
                            value: raw.to_string(),
                        })
                    }
                },
                ColumnKind::Categorical => match lookups[j].get(raw) {
                    Some(&i) => ParsedCell::Cat(i),
                    None => {
                        return Err(TabularError::UnknownCategory {
                            row,
                            column: spec.name.clone(),
                            value: raw.to_string(),
                        })
                    }
                },
            };
            parsed.push(Some(cell));
        }
        if has_missing {
            continue;
        }
        for (col, cell) in columns.iter_mut().zip(&parsed) {
            match (col, cell) {
                (Column::Continuous(v), Some(ParsedCell::Num(x))) => v.push(*x),
                (Column::Categorical(v), Some(ParsedCell::Cat(i))) => v.push(*i),
                _ => unreachable!("cell kinds follow the schema"),
            }
        }
    }
    Dataset::new(schema.clone(), columns)
}

enum ParsedCell {
    Num(f64),
    Cat(u32),
}

/// Formats a float with 17 significant digits, enough for an exact round trip.
fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a dataset to CSV bytes (header row, RFC 4180 quoting).
pub fn to_csv_bytes(ds: &Dataset) -> Result<Vec<u8>, TabularError> {
    let mut out = Vec::with_capacity(ds.n_rows() * ds.n_cols() * 16 + 64);
    write_to(ds, &mut out)?;
    Ok(out)
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), TabularError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_to(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

fn write_to<W: Write>(ds: &Dataset, w: W) -> Result<(), TabularError> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(ds.schema().names())?;
    let specs = ds.schema().columns();
    let mut rec: Vec<String> = Vec::with_capacity(ds.n_cols());
    for i in 0..ds.n_rows() {
        rec.clear();
        for (spec, col) in specs.iter().zip(ds.columns()) {
            rec.push(match col {
                Column::Continuous(v) => format_f64(v[i]),
                Column::Categorical(v) => spec.labels()[v[i] as usize].clone(),
            });
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
