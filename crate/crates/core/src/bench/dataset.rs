//! CSV ingestion and emission of labeled point sets.
//!
//! Files carry a header row naming the coordinate columns (`x,y`, `x,y,z` or
//! `x1,y1,x2,y2`) and an optional trailing `label` column (0 = outlier).

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{MshError, Result};
use crate::geometry::DataPoint;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub points: Vec<DataPoint>,
    /// Ground truth, absent when the source has no label column.
    pub gt_labels: Option<Vec<usize>>,
    pub provenance: String,
}

impl LabeledDataset {
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(DataPoint::dim)
    }

    /// Largest ground-truth structure label.
    pub fn structure_count(&self) -> Option<usize> {
        self.gt_labels.as_ref().map(|l| l.iter().copied().max().unwrap_or(0))
    }
}

fn header_for(dim: usize) -> &'static [&'static str] {
    match dim {
        2 => &["x", "y"],
        3 => &["x", "y", "z"],
        _ => &["x1", "y1", "x2", "y2"],
    }
}

fn csv_error(err: csv::Error) -> MshError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            MshError::Parse { line, message: format!("expected {expected_len} fields, found {len}") }
        }
        _ => MshError::Parse { line, message: err.to_string() },
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    read_dataset(File::open(path)?, path.display().to_string())
}

pub fn read_dataset<R: Read>(reader: R, provenance: impl Into<String>) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let has_label = headers.iter().next_back().is_some_and(|h| h.eq_ignore_ascii_case("label"));
    let dim = headers.len() - usize::from(has_label);
    if !(2..=4).contains(&dim) {
        return Err(MshError::Parse {
            line: 1,
            message: format!("expected 2, 3 or 4 coordinate columns, found {dim}"),
        });
    }

    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut coords = Vec::with_capacity(dim);
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        coords.clear();
        for field in record.iter().take(dim) {
            let v: f64 =
                field.parse().map_err(|_| MshError::Parse { line, message: format!("`{field}` is not a number") })?;
            coords.push(v);
        }
        let point = DataPoint::new(&coords).map_err(|e| MshError::Parse { line, message: e.to_string() })?;
        points.push(point);
        if has_label {
            let field = &record[dim];
            let label: usize =
                field.parse().map_err(|_| MshError::Parse { line, message: format!("`{field}` is not a label") })?;
            labels.push(label);
        }
    }

    Ok(LabeledDataset { points, gt_labels: has_label.then_some(labels), provenance: provenance.into() })
}

pub fn write_dataset<W: Write>(dataset: &LabeledDataset, writer: W) -> Result<()> {
    let dim = dataset.dim().unwrap_or(2);
    if let Some(p) = dataset.points.iter().find(|p| p.dim() != dim) {
        return Err(MshError::DimensionMismatch { expected: dim, found: p.dim() });
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = header_for(dim).to_vec();
    if dataset.gt_labels.is_some() {
        header.push("label");
    }
    wtr.write_record(&header).map_err(csv_error)?;
    let mut row: Vec<String> = Vec::with_capacity(dim + 1);
    for (i, p) in dataset.points.iter().enumerate() {
        row.clear();
        row.extend(p.coords().iter().map(|c| c.to_string()));
        if let Some(labels) = &dataset.gt_labels {
            row.push(labels[i].to_string());
        }
        wtr.write_record(&row).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One-column `label` CSV.
pub fn write_labels<W: Write>(labels: &[usize], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["label"]).map_err(csv_error)?;
    for l in labels {
        wtr.write_record([l.to_string()]).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads the `label` column of either a label file or a labeled dataset.
pub fn read_labels<R: Read>(reader: R) -> Result<Vec<usize>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let column = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("label"))
        .ok_or_else(|| MshError::Parse { line: 1, message: "no `label` column".into() })?;
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = &record[column];
        labels.push(field.parse().map_err(|_| MshError::Parse { line, message: format!("`{field}` is not a label") })?);
    }
    Ok(labels)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    read_labels(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correspondences_with_labels() {
        let text = "x1,y1,x2,y2,label\n1,2,3,4,1\n5,6,7,8,0\n";
        let ds = read_dataset(text.as_bytes(), "mem").unwrap();
        assert_eq!(ds.points.len(), 2);
        assert_eq!(ds.points[1].coords(), &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(ds.gt_labels, Some(vec![1, 0]));
        assert_eq!(ds.structure_count(), Some(1));
    }

    #[test]
    fn missing_label_column() {
        let ds = read_dataset("x,y\n0.5,1.5\n2,3\n".as_bytes(), "mem").unwrap();
        assert_eq!(ds.gt_labels, None);
        assert_eq!(ds.dim(), Some(2));
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = read_dataset("x,y,z\n1,2,3\n4,5\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, MshError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn bad_number_reports_line() {
        let err = read_dataset("x,y\n1,2\n3,abc\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, MshError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn too_many_columns() {
        assert!(read_dataset("a,b,c,d,e\n1,2,3,4,5\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn write_then_read() {
        let ds = LabeledDataset {
            points: vec![DataPoint::spatial(0.1, -2.0, 3e-7), DataPoint::spatial(4.0, 5.5, 6.0)],
            gt_labels: Some(vec![2, 0]),
            provenance: "t".into(),
        };
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,y,z,label\n"));
        let back = read_dataset(buf.as_slice(), "t").unwrap();
        assert_eq!(back, ds);

        let mut lbuf = Vec::new();
        write_labels(&[0, 3, 1], &mut lbuf).unwrap();
        assert_eq!(read_labels(lbuf.as_slice()).unwrap(), vec![0, 3, 1]);
        assert_eq!(read_labels(buf.as_slice()).unwrap(), vec![2, 0]);
    }
}
