//! Long-format CSV reading and writing.
//!
//! The on-disk format is UTF-8 CSV with the exact header
//! `group,person,occasion,item,response`. Occasions and items are positive
//! integers; responses use `.` as the decimal point. Missing responses are
//! represented by absent records, never by sentinel values.

use std::io::{Read, Write};
use std::path::Path;

use crate::data::LongRecord;
use crate::error::{Error, Result};

pub(crate) const HEADER: [&str; 5] = ["group", "person", "occasion", "item", "response"];

/// Read long-format records from a reader, with line-numbered diagnostics.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<LongRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv_reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if headers != HEADER {
        return Err(Error::Header {
            found: headers.join(","),
        });
    }

    let mut records = Vec::new();
    for row in csv_reader.records() {
        let row = row.map_err(|e| csv_error(&e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 5 {
            return Err(Error::Csv {
                line,
                message: format!("expected 5 fields, found {}", row.len()),
            });
        }
        let occasion = parse_index(&row[2], "occasion", line)?;
        let item = parse_index(&row[3], "item", line)?;
        let response: f64 = row[4].parse().map_err(|_| Error::Csv {
            line,
            message: format!("invalid response `{}`", &row[4]),
        })?;
        records.push(LongRecord {
            group: row[0].to_string(),
            person: row[1].to_string(),
            occasion,
            item,
            response,
        });
    }
    Ok(records)
}

/// Read long-format records from a file.
pub fn read_records_from_path<P: AsRef<Path>>(path: P) -> Result<Vec<LongRecord>> {
    let file = std::fs::File::open(path)?;
    read_records(std::io::BufReader::new(file))
}

/// Parse records from an in-memory CSV string.
pub fn parse_records(text: &str) -> Result<Vec<LongRecord>> {
    read_records(text.as_bytes())
}

/// Write records in the ingest CSV format. Responses are written with
/// shortest round-trip precision, so write-then-read is lossless.
pub fn write_records<W: Write>(writer: W, records: &[LongRecord]) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer
        .write_record(HEADER)
        .map_err(|e| csv_error(&e))?;
    for record in records {
        csv_writer
            .write_record(&[
                record.group.clone(),
                record.person.clone(),
                record.occasion.to_string(),
                record.item.to_string(),
                record.response.to_string(),
            ])
            .map_err(|e| csv_error(&e))?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Render records to a CSV string.
pub fn records_to_csv(records: &[LongRecord]) -> String {
    let mut buffer = Vec::new();
    write_records(&mut buffer, records).expect("in-memory write cannot fail");
    String::from_utf8(buffer).expect("csv output is utf-8")
}

fn parse_index(field: &str, name: &str, line: u64) -> Result<u32> {
    let value: u32 = field.parse().map_err(|_| Error::Csv {
        line,
        message: format!("invalid {name} `{field}`"),
    })?;
    if value == 0 {
        return Err(Error::Csv {
            line,
            message: format!("{name} indices start at 1"),
        });
    }
    Ok(value)
}

fn csv_error(err: &csv::Error) -> Error {
    let line = match err.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::Csv {
        line,
        message: err.to_string(),
    }
}
