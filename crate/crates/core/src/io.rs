//! Matrix file codecs.
//!
//! CSV: a `rows,cols` header, then one comma-separated line per row.
//! BIN: `RSKM`, version byte `1`, rows and cols as little-endian `u64`, then
//! the entries as little-endian binary64 in row-major order.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

pub const BIN_MAGIC: &[u8; 4] = b"RSKM";
pub const BIN_VERSION: u8 = 1;
const BIN_HEADER: usize = 4 + 1 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Bin,
}

impl Format {
    /// `.bin` selects BIN; anything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("bin") => Format::Bin,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "bin" => Ok(Format::Bin),
            other => Err(Error::Malformed(format!("unknown format {other:?}"))),
        }
    }
}

pub fn encode_bin(m: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(BIN_HEADER + 8 * m.as_slice().len());
    out.extend_from_slice(BIN_MAGIC);
    out.push(BIN_VERSION);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_bin(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile);
    }
    if &bytes[..4] != BIN_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < BIN_HEADER {
        return Err(Error::TruncatedFile);
    }
    if bytes[4] != BIN_VERSION {
        return Err(Error::Malformed(format!("unsupported version {}", bytes[4])));
    }
    let (rows, cols) = (read_u64(bytes, 5), read_u64(bytes, 13));
    let overflow = || Error::DimensionOverflow { rows, cols };
    let count = rows.checked_mul(cols).ok_or_else(overflow)?;
    let payload = count.checked_mul(8).ok_or_else(overflow)?;
    let (r, c) = (usize::try_from(rows).map_err(|_| overflow())?, usize::try_from(cols).map_err(|_| overflow())?);
    let body = &bytes[BIN_HEADER..];
    match (body.len() as u64).cmp(&payload) {
        std::cmp::Ordering::Less => return Err(Error::TruncatedFile),
        std::cmp::Ordering::Greater => return Err(Error::Malformed("trailing bytes after matrix data".into())),
        std::cmp::Ordering::Equal => {}
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Matrix::new(r, c, data)
}

/// Entries are written with 17 significant digits.
pub fn encode_csv(m: &Matrix) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record([m.rows().to_string(), m.cols().to_string()]).expect("in-memory write");
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:.16e}"))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn decode_csv(text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records().filter(|r| !matches!(r, Ok(rec) if rec.iter().all(str::is_empty)));
    let malformed = |e: csv::Error| Error::Malformed(e.to_string());
    let header = records.next().ok_or(Error::TruncatedFile)?.map_err(malformed)?;
    if header.len() != 2 {
        return Err(Error::Malformed(format!("bad header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let parse_dim = |s: &str| s.parse::<u64>().map_err(|_| Error::Malformed(format!("bad dimension {s:?}")));
    let (rows, cols) = (parse_dim(&header[0])?, parse_dim(&header[1])?);
    let overflow = || Error::DimensionOverflow { rows, cols };
    let count = rows.checked_mul(cols).ok_or_else(overflow)?;
    let (r, c) = (usize::try_from(rows).map_err(|_| overflow())?, usize::try_from(cols).map_err(|_| overflow())?);
    let mut data = Vec::with_capacity(usize::try_from(count).map_err(|_| overflow())?.min(1 << 24));
    let mut seen = 0usize;
    for record in records {
        let record = record.map_err(malformed)?;
        if seen == r {
            return Err(Error::Malformed("more rows than declared".into()));
        }
        if record.len() != c {
            return Err(Error::Malformed(format!("row {seen} has {} values, expected {c}", record.len())));
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Malformed(format!("bad number {field:?} on row {seen}")))?;
            data.push(v);
        }
        seen += 1;
    }
    if seen < r {
        return Err(Error::TruncatedFile);
    }
    Matrix::new(r, c, data)
}

pub fn read_matrix(path: &Path, format: Format) -> Result<Matrix> {
    match format {
        Format::Bin => decode_bin(&fs::read(path)?),
        Format::Csv => decode_csv(&fs::read_to_string(path)?),
    }
}

pub fn write_matrix(path: &Path, m: &Matrix, format: Format) -> Result<()> {
    match format {
        Format::Bin => fs::write(path, encode_bin(m))?,
        Format::Csv => fs::write(path, encode_csv(m))?,
    }
    Ok(())
}
