//! File formats.
//!
//! * Point clouds: CSV, one point per row, no header unless asked for; or
//!   JSON `{"d": 2, "points": [[x, y], ...]}`.
//! * Maps: CSV rows `source_index,target_index`; or JSON
//!   `{"method": "HV", "schedule_fingerprint": "...", "sigma": [...]}`.
//!
//! Floats are written in shortest round-trip form, so reading a written file
//! reproduces the object exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::PointCloud;
use crate::transport::TransportMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    d: usize,
    points: Vec<Vec<f64>>,
}

pub fn read_cloud_csv<R: Read>(reader: R, has_header: bool) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {line}: bad coordinate {f:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    PointCloud::from_rows(&rows)
}

pub fn write_cloud_csv<W: Write>(writer: W, cloud: &PointCloud) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let mut record = Vec::with_capacity(cloud.dim());
    for p in cloud.iter() {
        record.clear();
        record.extend(p.iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cloud_json<R: Read>(reader: R) -> Result<PointCloud> {
    let raw: CloudJson = serde_json::from_reader(reader)?;
    let cloud = PointCloud::from_rows(&raw.points)?;
    if cloud.dim() != raw.d {
        return Err(Error::DimensionMismatch {
            expected: raw.d,
            found: cloud.dim(),
        });
    }
    Ok(cloud)
}

pub fn cloud_to_json(cloud: &PointCloud) -> serde_json::Value {
    serde_json::to_value(CloudJson {
        d: cloud.dim(),
        points: cloud.to_rows(),
    })
    .expect("cloud serialises")
}

pub fn write_cloud_json<W: Write>(writer: W, cloud: &PointCloud) -> Result<()> {
    serde_json::to_writer(writer, &cloud_to_json(cloud))?;
    Ok(())
}

pub fn read_cloud(path: &Path, has_header: bool) -> Result<PointCloud> {
    let file = BufReader::new(File::open(path)?);
    match Format::from_path(path) {
        Format::Csv => read_cloud_csv(file, has_header),
        Format::Json => read_cloud_json(file),
    }
}

pub fn write_cloud(path: &Path, cloud: &PointCloud, format: Format) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_cloud_csv(&mut file, cloud)?,
        Format::Json => write_cloud_json(&mut file, cloud)?,
    }
    file.flush()?;
    Ok(())
}

pub fn read_map_csv<R: Read>(reader: R) -> Result<TransportMap> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut pairs = Vec::new();
    for record in rdr.deserialize::<(usize, usize)>() {
        pairs.push(record?);
    }
    let n = pairs.len();
    let mut sigma = vec![usize::MAX; n];
    for (s, t) in pairs {
        let slot = sigma.get_mut(s).ok_or(Error::InvalidIndex { index: s, len: n })?;
        if *slot != usize::MAX {
            return Err(Error::NotPermutation(format!("source {s} listed twice")));
        }
        *slot = t;
    }
    TransportMap::from_sigma(sigma)
}

pub fn write_map_csv<W: Write>(writer: W, map: &TransportMap) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for (s, &t) in map.sigma().iter().enumerate() {
        w.serialize((s, t))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_map_json<R: Read>(reader: R) -> Result<TransportMap> {
    let map: TransportMap = serde_json::from_reader(reader)?;
    // Deserialisation bypasses the constructor, so validate explicitly.
    TransportMap::new(
        map.sigma().to_vec(),
        map.method(),
        map.schedule_fingerprint().map(str::to_owned),
    )
}

pub fn write_map_json<W: Write>(writer: W, map: &TransportMap) -> Result<()> {
    serde_json::to_writer(writer, map)?;
    Ok(())
}

pub fn read_map(path: &Path) -> Result<TransportMap> {
    let file = BufReader::new(File::open(path)?);
    match Format::from_path(path) {
        Format::Csv => read_map_csv(file),
        Format::Json => read_map_json(file),
    }
}

pub fn write_map(path: &Path, map: &TransportMap, format: Format) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_map_csv(&mut file, map)?,
        Format::Json => write_map_json(&mut file, map)?,
    }
    file.flush()?;
    Ok(())
}
