//! Dataset directories: `view<i>.csv` (one sample per row, no header) and
//! `labels.csv` (one integer per line).

use std::fs::File;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{ModalityMatrix, MultimodalDataset};
use crate::{Error, Result};

fn parse_err(file: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Io {
        file: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_err(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    let msg = match err.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("ragged row: expected {expected_len} fields, found {len}"),
        _ => err.to_string(),
    };
    parse_err(path, line, msg)
}

fn read_view(path: &Path) -> Result<ModalityMatrix> {
    let mut reader = open(path)?;
    let mut values = Vec::new();
    let mut rows = 0usize;
    let mut cols = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        cols = record.len();
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite entry {field:?}")));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(path, 1, "empty view file"));
    }
    let values = Array2::from_shape_vec((rows, cols), values)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    ModalityMatrix::new(values)
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut reader = open(path)?;
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 1 {
            return Err(parse_err(path, line, "expected one label per line"));
        }
        let l: usize = record[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad label {:?}", &record[0])))?;
        labels.push(l);
    }
    Ok(labels)
}

/// Reads `view0.csv`, `view1.csv`, ... (stopping at the first gap) and
/// `labels.csv` from `dir`.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<MultimodalDataset> {
    let dir = dir.as_ref();
    let mut views = Vec::new();
    loop {
        let path = dir.join(format!("view{}.csv", views.len()));
        if !path.exists() {
            break;
        }
        views.push((path.clone(), read_view(&path)?));
    }
    if views.is_empty() {
        return Err(Error::Io {
            file: dir.join("view0.csv"),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "missing file"),
        });
    }
    let labels_path = dir.join("labels.csv");
    let labels = read_labels(&labels_path)?;
    for (path, view) in &views {
        if view.n_rows() != labels.len() {
            return Err(parse_err(
                &labels_path,
                labels.len() as u64,
                format!(
                    "label count mismatch: {} labels but {} has {} rows",
                    labels.len(),
                    path.display(),
                    view.n_rows()
                ),
            ));
        }
    }
    MultimodalDataset::new(views.into_iter().map(|(_, v)| v).collect(), labels).map_err(|e| {
        parse_err(&labels_path, 0, e.to_string())
    })
}

/// Writes `dataset` in the same directory layout [`load_dataset`] reads.
/// Floats use the shortest representation that round-trips exactly.
pub fn write_dataset(dataset: &MultimodalDataset, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let io_err = |file: &Path| {
        let file = file.to_path_buf();
        move |source| Error::Io { file, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (i, view) in dataset.views().iter().enumerate() {
        let path = dir.join(format!("view{i}.csv"));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| csv_err(&path, e))?;
        for row in view.values().rows() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(io_err(&path))?;
        written.push(path);
    }
    let path = dir.join("labels.csv");
    let body: String = dataset.labels().iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, body).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}
