//! Planar positions or frame indices keyed by descriptor id, read from CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoseMode {
    /// `id,x,y` in meters.
    Planar,
    /// `id,frame` sequence indices.
    Frame,
}

impl PoseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PoseMode::Planar => "planar",
            PoseMode::Frame => "frame",
        }
    }
}

impl fmt::Display for PoseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PoseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planar" => Ok(PoseMode::Planar),
            "frame" => Ok(PoseMode::Frame),
            other => Err(Error::Config(format!(
                "unknown pose mode {other:?} (expected planar or frame)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pose {
    Planar { x: f64, y: f64 },
    Frame(i64),
}

impl Pose {
    pub fn mode(&self) -> PoseMode {
        match self {
            Pose::Planar { .. } => PoseMode::Planar,
            Pose::Frame(_) => PoseMode::Frame,
        }
    }
}

/// Pose lookup with a single mode for every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTable {
    mode: PoseMode,
    entries: BTreeMap<u64, Pose>,
}

impl PoseTable {
    pub fn new(mode: PoseMode) -> Self {
        Self {
            mode,
            entries: BTreeMap::new(),
        }
    }

    /// Adds an entry; rejects duplicate ids, mixed modes and non-finite coordinates.
    pub fn insert(&mut self, id: u64, pose: Pose) -> Result<()> {
        if pose.mode() != self.mode {
            return Err(Error::ModeMismatch {
                expected: self.mode.as_str(),
                found: pose.mode().as_str(),
            });
        }
        if let Pose::Planar { x, y } = pose {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Data(format!("non-finite coordinate for id {id}")));
            }
        }
        if self.entries.insert(id, pose).is_some() {
            return Err(Error::Validation(format!("duplicate pose id {id}")));
        }
        Ok(())
    }

    pub fn mode(&self) -> PoseMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Pose> {
        self.entries.get(&id)
    }

    pub fn require(&self, id: u64) -> Result<&Pose> {
        self.get(id).ok_or(Error::MissingPose { id })
    }

    /// Planar coordinates of `id`; errors on frame tables or missing entries.
    pub fn planar(&self, id: u64) -> Result<(f64, f64)> {
        match self.require(id)? {
            Pose::Planar { x, y } => Ok((*x, *y)),
            Pose::Frame(_) => Err(Error::ModeMismatch {
                expected: "planar",
                found: "frame",
            }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Pose)> {
        self.entries.iter().map(|(id, p)| (*id, p))
    }
}

pub fn read_poses(path: impl AsRef<Path>, mode: PoseMode) -> Result<PoseTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_poses(file, mode)
}

pub fn parse_poses(reader: impl Read, mode: PoseMode) -> Result<PoseTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(format!("pose CSV header: {e}")))?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("pose CSV is missing column {name:?}")))
    };
    let id_col = column("id")?;
    let value_cols: Vec<usize> = match mode {
        PoseMode::Planar => vec![column("x")?, column("y")?],
        PoseMode::Frame => vec![column("frame")?],
    };

    let mut table = PoseTable::new(mode);
    for (idx, record) in rdr.records().enumerate() {
        // header is line 1
        let line = idx + 2;
        let record = record.map_err(|e| Error::Line {
            line,
            message: e.to_string(),
        })?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let id: u64 = parse_field(field(id_col), "id", line)?;
        let pose = match mode {
            PoseMode::Planar => Pose::Planar {
                x: parse_field(field(value_cols[0]), "x", line)?,
                y: parse_field(field(value_cols[1]), "y", line)?,
            },
            PoseMode::Frame => Pose::Frame(parse_field(field(value_cols[0]), "frame", line)?),
        };
        table.insert(id, pose).map_err(|e| Error::Line {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(table)
}

fn parse_field<T: FromStr>(raw: &str, name: &str, line: usize) -> Result<T> {
    // Accept the Unicode minus sign some spreadsheet tools emit.
    let cleaned = raw.replace('\u{2212}', "-");
    cleaned.parse().map_err(|_| Error::Line {
        line,
        message: format!("non-numeric {name} field {raw:?}"),
    })
}

pub fn write_poses(table: &PoseTable, path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), |w| {
        let mut out = csv::Writer::from_writer(w);
        match table.mode {
            PoseMode::Planar => out.write_record(["id", "x", "y"])?,
            PoseMode::Frame => out.write_record(["id", "frame"])?,
        }
        for (id, pose) in table.iter() {
            match *pose {
                Pose::Planar { x, y } => {
                    out.write_record([id.to_string(), x.to_string(), y.to_string()])?
                }
                Pose::Frame(f) => out.write_record([id.to_string(), f.to_string()])?,
            }
        }
        out.flush()
    })
}
