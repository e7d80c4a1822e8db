//! Point-cloud CSV files: one point per row, an optional header, and an
//! optional trailing integer column named `label` (recognised through the
//! header).

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::PointCloud;

#[derive(Debug, Clone, PartialEq)]
pub struct CloudFile {
    pub cloud: PointCloud,
    pub labels: Option<Vec<usize>>,
}

fn parse_coordinate(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        row,
        col,
        message: format!("`{cell}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            col,
            message: format!("`{cell}` is not finite"),
        });
    }
    Ok(v)
}

/// Parses a cloud from CSV text. Rows and columns in errors are 1-based
/// positions in the file.
pub fn read_cloud_csv<R: Read>(reader: R) -> Result<CloudFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map_or(i + 1, |p| p.line() as usize),
            col: 0,
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("csv file has no rows"));
    }

    // A first row in which no cell is numeric is a header.
    let header_present = records[0].1.iter().all(|c| c.parse::<f64>().is_err());
    let mut has_label = false;
    if header_present {
        let (_, header) = records.remove(0);
        has_label = header.iter().next_back() == Some("label");
    }
    let width = records.first().map_or(0, |(_, r)| r.len());
    let n_coords = if has_label {
        width.saturating_sub(1)
    } else {
        width
    };
    if n_coords == 0 {
        return Err(Error::EmptyInput("csv file has no coordinate columns"));
    }

    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::new();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *line,
                col: rec.len().min(width) + 1,
                message: format!("expected {width} columns, found {}", rec.len()),
            });
        }
        let coords = (0..n_coords)
            .map(|c| parse_coordinate(&rec[c], *line, c + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(coords);
        if has_label {
            let cell = &rec[n_coords];
            let label = cell.parse::<usize>().map_err(|_| Error::Parse {
                row: *line,
                col: width,
                message: format!("label `{cell}` is not a nonnegative integer"),
            })?;
            labels.push(label);
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv file has a header but no data"));
    }

    Ok(CloudFile {
        cloud: PointCloud::from_rows(&rows)?,
        labels: has_label.then_some(labels),
    })
}

pub fn load_cloud_csv(path: impl AsRef<Path>) -> Result<CloudFile> {
    read_cloud_csv(File::open(path)?)
}
