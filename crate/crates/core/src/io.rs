//! JSON field files and CSV tables with every float written to 17
//! significant digits, so that reading and rewriting a file reproduces it
//! byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use thiserror::Error;

use crate::grid::{Chart, GridError, GridField};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected 1)")]
    Schema(u32),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("CSV row {row} has {got} columns, header has {expected}")]
    Ragged {
        row: usize,
        got: usize,
        expected: usize,
    },
}

/// On-disk form of a [`GridField`]. `values` is indexed
/// `(j·dims[0] + i)·components + c`, the first axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub schema_version: u32,
    pub chart: Chart,
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub dims: [usize; 2],
    pub components: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<bool>>,
}

impl From<&GridField> for FieldFile {
    fn from(f: &GridField) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            chart: f.chart(),
            origin: f.origin(),
            spacing: f.spacing(),
            dims: f.dims(),
            components: f.components(),
            values: f.values().to_vec(),
            mask: f.mask().map(|m| m.to_vec()),
        }
    }
}

impl FieldFile {
    pub fn into_field(self) -> Result<GridField, IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::Schema(self.schema_version));
        }
        let mut f = GridField::new(
            self.chart,
            self.origin,
            self.spacing,
            self.dims,
            self.components,
            self.values,
        )?;
        f.set_mask(self.mask)?;
        Ok(f)
    }
}

/// A float with 17 significant digits; non-finite values become `null`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

/// Pretty JSON layout with every float printed to 17 significant digits.
/// serde_json writes non-finite floats as `null` before reaching here.
struct SeventeenDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SeventeenDigits<'_> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialises any value as indented JSON with 17-digit floats and a trailing
/// newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, IoError> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_field(field: &GridField) -> String {
    to_json(&FieldFile::from(field)).expect("field files always serialise")
}

pub fn read_field(text: &str) -> Result<GridField, IoError> {
    serde_json::from_str::<FieldFile>(text)?.into_field()
}

/// A CSV table: header row plus rows of cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), IoError> {
        if row.len() != self.header.len() {
            return Err(IoError::Ragged {
                row: self.rows.len() + 1,
                got: row.len(),
                expected: self.header.len(),
            });
        }
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Float(v) => fmt_f64(v),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => s,
                })
                .collect(),
        );
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for record in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(record)
                .expect("writing to memory cannot fail");
        }
        let bytes = w.into_inner().expect("writing to memory cannot fail");
        String::from_utf8(bytes).expect("cells are UTF-8")
    }
}
