//! Serialization of results. CSV uses a header row, LF line endings and
//! floats printed with 17 significant digits so every value reparses exactly.

use serde::Serialize;
use telewm_core::experiments::{BlpPoint, GridCell, MetricSeries};
use telewm_core::MetricRecord;

use crate::config::Format;

/// A file produced by a command, written only after all work finishes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// One CSV cell.
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(Cell::render))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn json_document<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable result");
    s.push('\n');
    s
}

pub const SERIES_HEADER: [&str; 6] = [
    "t",
    "concurrence",
    "coherence_l1",
    "fidelity",
    "fidelity_deviation",
    "success_prob",
];

pub fn series_file(name: &str, series: &MetricSeries, format: Format) -> OutputFile {
    let contents = match format {
        Format::Csv => csv_table(
            &SERIES_HEADER,
            series.records.iter().map(|r| {
                vec![
                    r.t.into(),
                    r.concurrence.into(),
                    r.coherence_l1.into(),
                    r.fidelity.into(),
                    r.fidelity_deviation.into(),
                    r.success_prob.into(),
                ]
            }),
        ),
        Format::Json => json_document(series),
    };
    OutputFile {
        name: format!("{name}.{}", format.extension()),
        contents,
    }
}

/// Reads a series CSV back into records.
pub fn parse_series_csv(text: &str) -> Result<Vec<MetricRecord>, csv::Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().collect()
}

/// A table whose rows already know how to render themselves in both formats.
pub trait Tabular: Serialize {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
}

pub fn table_file<T: Tabular>(stem: &str, rows: &[T], format: Format) -> OutputFile {
    let contents = match format {
        Format::Csv => csv_table(T::HEADER, rows.iter().map(Tabular::cells)),
        Format::Json => json_document(&rows),
    };
    OutputFile {
        name: format!("{stem}.{}", format.extension()),
        contents,
    }
}

/// A (θ, t) cell tagged with the measurement strengths that produced it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridRow {
    pub w: f64,
    pub wr: f64,
    #[serde(flatten)]
    pub cell: GridCell,
}

impl Tabular for GridRow {
    const HEADER: &'static [&'static str] =
        &["w", "wr", "theta", "t", "fidelity", "fidelity_deviation"];
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.w.into(),
            self.wr.into(),
            self.cell.theta.into(),
            self.cell.t.into(),
            self.cell.fidelity.into(),
            self.cell.fidelity_deviation.into(),
        ]
    }
}

/// BLP samples with the positive part of σ and a backflow flag.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlpRow {
    #[serde(flatten)]
    pub point: BlpPoint,
    pub sigma_positive: f64,
    pub backflow: bool,
}

impl Tabular for BlpRow {
    const HEADER: &'static [&'static str] =
        &["t", "distance", "sigma", "sigma_positive", "backflow"];
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.point.t.into(),
            self.point.distance.into(),
            self.point.sigma.into(),
            self.sigma_positive.into(),
            self.backflow.into(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        let text = csv_table(
            &["a", "b", "c"],
            vec![vec![Cell::Float(1.0), Cell::Empty, Cell::Bool(true)]],
        );
        assert_eq!(text, "a,b,c\n1.0000000000000000e0,,true\n");
        assert!(!text.contains('\r'));
    }
}
