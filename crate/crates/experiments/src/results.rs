//! Result rows and their CSV form.

use std::path::Path;

use chmogp_core::engine::Checkpoint;
use serde::{Deserialize, Serialize};

/// One checkpoint of one (dataset, selector, repeat, fold) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub selector: String,
    pub repeat: usize,
    pub fold: usize,
    pub ratio: f64,
    pub evaluations: u64,
    pub generation: u64,
    pub train_auch: f64,
    pub test_auch: f64,
    pub hull_size: usize,
}

impl ResultRow {
    pub fn from_checkpoint(
        dataset: &str,
        selector: &str,
        repeat: usize,
        fold: usize,
        c: &Checkpoint,
    ) -> Self {
        ResultRow {
            dataset: dataset.to_string(),
            selector: selector.to_string(),
            repeat,
            fold,
            ratio: c.ratio,
            evaluations: c.evaluations,
            generation: c.generation,
            train_auch: c.train_auch,
            test_auch: c.test_auch,
            hull_size: c.hull_size,
        }
    }
}

pub fn write_rows<W: std::io::Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_rows<R: std::io::Read>(input: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn read_rows_file(path: &Path) -> csv::Result<Vec<ResultRow>> {
    read_rows(std::fs::File::open(path)?)
}
