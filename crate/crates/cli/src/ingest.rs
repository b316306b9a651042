//! CSV input: one header row, numeric feature columns, one group column and
//! optionally an id column. Records are read one at a time.

use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::PathBuf;

use fair_kcenter::Point;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("input is empty (no header row)")]
    NoHeader,
    #[error("no column named {0:?} in the header")]
    MissingColumn(String),
    #[error("the header has no feature columns")]
    NoFeatures,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: u64, expected: usize, found: usize },
    #[error("line {line}: column {column:?} holds {value:?}, which is not a finite number")]
    NotNumeric { line: u64, column: String, value: String },
    #[error("line {line}: id {value:?} is not a non-negative integer")]
    BadId { line: u64, value: String },
    #[error("line {line}: unknown group {label:?} (known: {known})")]
    UnknownGroup { line: u64, label: String, known: String },
    #[error("line {line}: group {label:?} arrived after a later group; group-sorted input is required")]
    StreamOrder { line: u64, label: String },
}

impl IngestError {
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::Csv { line, .. }
            | IngestError::Ragged { line, .. }
            | IngestError::NotNumeric { line, .. }
            | IngestError::BadId { line, .. }
            | IngestError::UnknownGroup { line, .. }
            | IngestError::StreamOrder { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// A column picked by header name or by zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    pub fn parse(s: &str) -> Column {
        match s.parse() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        }
    }

    fn resolve(&self, header: &csv::StringRecord) -> Result<usize, IngestError> {
        match self {
            Column::Index(i) if *i < header.len() => Ok(*i),
            Column::Index(i) => Err(IngestError::MissingColumn(i.to_string())),
            Column::Name(n) => header
                .iter()
                .position(|h| h.trim() == n)
                .ok_or_else(|| IngestError::MissingColumn(n.clone())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// `-` reads standard input.
    pub input: String,
    pub group_col: Column,
    pub id_col: Option<Column>,
    /// Fixed label order; otherwise labels are numbered by first appearance.
    pub groups: Option<Vec<String>>,
    /// Number of groups the caller can handle.
    pub max_groups: usize,
    /// Reject a record whose group index is smaller than an earlier one.
    pub group_sorted: bool,
}

impl IngestOptions {
    pub fn path(&self) -> Option<PathBuf> {
        (self.input != "-").then(|| PathBuf::from(&self.input))
    }
}

pub struct Ingest {
    reader: csv::Reader<Box<dyn Read>>,
    features: Vec<(usize, String)>,
    width: usize,
    group_col: usize,
    id_col: Option<usize>,
    labels: Vec<String>,
    fixed_labels: bool,
    max_groups: usize,
    group_sorted: bool,
    last_group: usize,
    next_id: u64,
    record: csv::StringRecord,
}

impl std::fmt::Debug for Ingest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ingest")
            .field("features", &self.features)
            .field("labels", &self.labels)
            .field("next_id", &self.next_id)
            .finish_non_exhaustive()
    }
}

impl Ingest {
    pub fn open(opts: &IngestOptions) -> Result<Self, IngestError> {
        let source: Box<dyn Read> = match opts.path() {
            None => Box::new(io::stdin().lock()),
            Some(path) => Box::new(BufReader::new(File::open(&path).map_err(|source| {
                IngestError::Open {
                    path: path.display().to_string(),
                    source,
                }
            })?)),
        };
        Self::from_reader(source, opts)
    }

    pub fn from_reader(source: Box<dyn Read>, opts: &IngestOptions) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(true)
            .from_reader(source);
        let header = reader.headers().map_err(csv_error)?.clone();
        if header.is_empty() {
            return Err(IngestError::NoHeader);
        }
        let group_col = opts.group_col.resolve(&header)?;
        let id_col = opts.id_col.as_ref().map(|c| c.resolve(&header)).transpose()?;
        let features: Vec<(usize, String)> = header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != group_col && Some(i) != id_col)
            .map(|(i, h)| (i, h.trim().to_string()))
            .collect();
        if features.is_empty() {
            return Err(IngestError::NoFeatures);
        }
        Ok(Ingest {
            reader,
            features,
            width: header.len(),
            group_col,
            id_col,
            labels: opts.groups.clone().unwrap_or_default(),
            fixed_labels: opts.groups.is_some(),
            max_groups: opts.max_groups,
            group_sorted: opts.group_sorted,
            last_group: 0,
            next_id: 0,
            record: csv::StringRecord::new(),
        })
    }

    /// Group labels in index order (`labels[g - 1]` names group `g`).
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn next_point(&mut self) -> Result<Option<Point>, IngestError> {
        if !self.reader.read_record(&mut self.record).map_err(csv_error)? {
            return Ok(None);
        }
        let line = self.record.position().map_or(0, |p| p.line());
        if self.record.len() != self.width {
            return Err(IngestError::Ragged {
                line,
                expected: self.width,
                found: self.record.len(),
            });
        }
        let mut coords = Vec::with_capacity(self.features.len());
        for (i, name) in &self.features {
            let raw = self.record[*i].trim();
            match raw.parse::<f64>() {
                Ok(x) if x.is_finite() => coords.push(x),
                _ => {
                    return Err(IngestError::NotNumeric {
                        line,
                        column: name.clone(),
                        value: raw.to_string(),
                    })
                }
            }
        }
        let label = self.record[self.group_col].trim();
        let group = match self.labels.iter().position(|l| l == label) {
            Some(i) => i + 1,
            None if !self.fixed_labels && self.labels.len() < self.max_groups => {
                self.labels.push(label.to_string());
                self.labels.len()
            }
            None => {
                return Err(IngestError::UnknownGroup {
                    line,
                    label: label.to_string(),
                    known: self.labels.join(", "),
                })
            }
        };
        if self.group_sorted && group < self.last_group {
            return Err(IngestError::StreamOrder {
                line,
                label: label.to_string(),
            });
        }
        self.last_group = self.last_group.max(group);
        let id = match self.id_col {
            Some(c) => {
                let raw = self.record[c].trim();
                raw.parse().map_err(|_| IngestError::BadId {
                    line,
                    value: raw.to_string(),
                })?
            }
            None => self.next_id,
        };
        self.next_id += 1;
        Ok(Some(Point::new(id, coords, group)))
    }

    /// Reads every remaining record.
    pub fn collect(&mut self) -> Result<Vec<Point>, IngestError> {
        let mut points = Vec::new();
        while let Some(p) = self.next_point()? {
            points.push(p);
        }
        Ok(points)
    }
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Csv {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> IngestOptions {
        IngestOptions {
            input: "-".into(),
            group_col: Column::Name("group".into()),
            id_col: None,
            groups: None,
            max_groups: 2,
            group_sorted: false,
        }
    }

    fn read(text: &'static str, opts: &IngestOptions) -> Result<Vec<Point>, IngestError> {
        Ingest::from_reader(Box::new(text.as_bytes()), opts)?.collect()
    }

    #[test]
    fn basic_row() {
        let pts = read("x,y,group\n0,0,1\n", &opts()).unwrap();
        assert_eq!(pts, vec![Point::new(0, vec![0.0, 0.0], 1)]);
    }

    #[test]
    fn non_numeric_reports_line() {
        let err = read("x,y,group\na,0,1\n", &opts()).unwrap_err();
        assert!(matches!(err, IngestError::NotNumeric { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn ragged_row() {
        let err = read("x,y,group\n0,0,1\n1,1\n", &opts()).unwrap_err();
        assert!(matches!(err, IngestError::Ragged { line: 3, expected: 3, found: 2 }));
    }

    #[test]
    fn labels_by_first_appearance() {
        let mut ing = Ingest::from_reader(Box::new(&b"group,x\nb,1\na,2\nb,3\n"[..]), &opts()).unwrap();
        let pts = ing.collect().unwrap();
        assert_eq!(pts.iter().map(|p| p.group).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert_eq!(ing.labels(), &["b", "a"]);
    }

    #[test]
    fn fixed_labels_and_unknown_group() {
        let mut o = opts();
        o.groups = Some(vec!["a".into(), "b".into()]);
        let pts = read("x,group\n1,b\n2,a\n", &o).unwrap();
        assert_eq!(pts[0].group, 2);
        let err = read("x,group\n1,c\n", &o).unwrap_err();
        assert!(matches!(err, IngestError::UnknownGroup { line: 2, .. }));
        let err = read("x,group\n1,a\n1,b\n1,c\n", &opts()).unwrap_err();
        assert!(matches!(err, IngestError::UnknownGroup { line: 4, .. }));
    }

    #[test]
    fn group_sorted_violation_at_third_record() {
        let mut o = opts();
        o.group_sorted = true;
        let err = read("x,group\n0,1\n1,2\n2,1\n", &o).unwrap_err();
        assert!(matches!(err, IngestError::StreamOrder { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn id_and_group_columns_by_index() {
        let mut o = opts();
        o.group_col = Column::parse("0");
        o.id_col = Some(Column::parse("id"));
        let pts = read("g,id,x\n1,40,0.5\n", &o).unwrap();
        assert_eq!(pts, vec![Point::new(40, vec![0.5], 1)]);
        let err = read("g,id,x\n1,-3,0.5\n", &o).unwrap_err();
        assert!(matches!(err, IngestError::BadId { line: 2, .. }));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(read("", &opts()), Err(IngestError::NoHeader)));
        assert_eq!(read("x,group\n", &opts()).unwrap(), vec![]);
        assert!(matches!(read("x,y\n", &opts()), Err(IngestError::MissingColumn(_))));
        assert!(matches!(read("group\n1\n", &opts()), Err(IngestError::NoFeatures)));
    }
}
