//! Dense descriptor matrices and the `.vprd` binary container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "VPRD"
//! 4       4     u32 version (= 1)
//! 8       8     u64 row count
//! 16      4     u32 dim
//! 20      1     u8 dtype (= 1, f32)
//! 21      43    zero padding
//! 64      8·n   u64 ids
//! ...     4·n·d f32 values, row-major
//! ```
//!
//! All integers and floats are little-endian.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"VPRD";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u8 = 1;
pub const HEADER_LEN: usize = 64;

/// Total file length in bytes for `count` descriptors of dimension `dim`.
pub fn encoded_len(count: u64, dim: u32) -> u64 {
    HEADER_LEN as u64 + count * 8 + count * dim as u64 * 4
}

/// Row-major matrix of `f32` descriptors, one row per id.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    ids: Vec<u64>,
    dim: usize,
    data: Vec<f32>,
}

impl DescriptorSet {
    /// Builds a set after checking every invariant: positive dim, unique ids,
    /// `data.len() == ids.len() * dim`, and finite entries.
    pub fn new(ids: Vec<u64>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("descriptor dim must be positive".into()));
        }
        if dim > u32::MAX as usize {
            return Err(Error::Validation(format!("descriptor dim {dim} exceeds u32")));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::Validation(format!(
                "{} values cannot form {} rows of dim {dim}",
                data.len(),
                ids.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for &id in &ids {
            if !seen.insert(id) {
                return Err(Error::Validation(format!("duplicate descriptor id {id}")));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let row = pos / dim;
            return Err(Error::Data(format!(
                "non-finite value in row {row} (id {})",
                ids[row]
            )));
        }
        Ok(Self { ids, dim, data })
    }

    /// Builds a set from a list of rows; all rows must share one length.
    pub fn from_rows(ids: Vec<u64>, rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Validation(format!(
                "row {i} has {} entries, expected {dim}",
                r.len()
            )));
        }
        Self::new(ids, dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn into_parts(self) -> (Vec<u64>, usize, Vec<f32>) {
        (self.ids, self.dim, self.data)
    }

    /// Keeps only the rows whose position satisfies `keep`.
    pub fn select(&self, mut keep: impl FnMut(usize, u64) -> bool) -> Self {
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (i, &id) in self.ids.iter().enumerate() {
            if keep(i, id) {
                ids.push(id);
                data.extend_from_slice(self.row(i));
            }
        }
        Self {
            ids,
            dim: self.dim,
            data,
        }
    }

    pub(crate) fn from_parts_unchecked(ids: Vec<u64>, dim: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), ids.len() * dim);
        Self { ids, dim, data }
    }
}

pub fn write_descriptors(set: &DescriptorSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    super::write_atomic(path, |w| encode_descriptors(set, w))
}

/// Serializes `set` into any writer using the `.vprd` layout.
pub fn encode_descriptors(set: &DescriptorSet, w: &mut impl Write) -> std::io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&(set.len() as u64).to_le_bytes());
    header[16..20].copy_from_slice(&(set.dim as u32).to_le_bytes());
    header[20] = DTYPE_F32;
    w.write_all(&header)?;
    for id in &set.ids {
        w.write_all(&id.to_le_bytes())?;
    }
    for v in &set.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_descriptors(path: impl AsRef<Path>) -> Result<DescriptorSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let found = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut r = BufReader::new(file);

    let mut header = [0u8; HEADER_LEN];
    if found < HEADER_LEN as u64 {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            found,
        });
    }
    r.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
    let (count, dim) = parse_header(&header)?;

    let expected = count
        .checked_mul(8 + dim as u64 * 4)
        .and_then(|body| body.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| Error::Format(format!("header declares an impossible size ({count} x {dim})")))?;
    if expected != found {
        return Err(Error::Truncated { expected, found });
    }

    let count = count as usize;
    let dim = dim as usize;
    let mut id_bytes = vec![0u8; count * 8];
    r.read_exact(&mut id_bytes).map_err(|e| Error::io(path, e))?;
    let ids: Vec<u64> = id_bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    drop(id_bytes);

    let mut value_bytes = vec![0u8; count * dim * 4];
    r.read_exact(&mut value_bytes).map_err(|e| Error::io(path, e))?;
    let data: Vec<f32> = value_bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect();

    DescriptorSet::new(ids, dim, data)
}

fn parse_header(header: &[u8; HEADER_LEN]) -> Result<(u64, u32)> {
    if header[0..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected \"VPRD\"",
            String::from_utf8_lossy(&header[0..4])
        )));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let dim = u32::from_le_bytes(header[16..20].try_into().unwrap());
    if header[20] != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported dtype {}", header[20])));
    }
    if header[21..].iter().any(|&b| b != 0) {
        return Err(Error::Format("non-zero header padding".into()));
    }
    if dim == 0 {
        return Err(Error::Format("dim must be positive".into()));
    }
    Ok((count, dim))
}

/// Parses descriptors from plain text: one row per non-empty line, values
/// separated by commas and/or whitespace. Lines starting with `#` are skipped.
///
/// With `ids_first`, the first field of each line is the integer id;
/// otherwise rows are numbered from zero.
pub fn parse_descriptor_text(reader: impl BufRead, ids_first: bool) -> Result<DescriptorSet> {
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Line {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty());
        let id = if ids_first {
            let field = fields.next().unwrap_or_default();
            field.parse::<u64>().map_err(|_| Error::Line {
                line: lineno,
                message: format!("invalid id {field:?}"),
            })?
        } else {
            ids.len() as u64
        };
        let before = data.len();
        for f in fields {
            let v = f.parse::<f32>().map_err(|_| Error::Line {
                line: lineno,
                message: format!("invalid float {f:?}"),
            })?;
            data.push(v);
        }
        let width = data.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Line {
                    line: lineno,
                    message: format!("row has {width} values, expected {d}"),
                })
            }
            _ => {}
        }
        ids.push(id);
    }
    let dim = dim.ok_or_else(|| Error::Validation("no descriptor rows found".into()))?;
    DescriptorSet::new(ids, dim, data)
}

pub fn read_descriptor_text(path: impl AsRef<Path>, ids_first: bool) -> Result<DescriptorSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_descriptor_text(BufReader::new(file), ids_first)
}
