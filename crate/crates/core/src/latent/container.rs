//! Binary container for dense matrices: an 8-byte magic, a format version,
//! the dimensions, then row-major little-endian `f64` values. Labels travel
//! separately as JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DenseMatrix, LatentSpace};
use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 8] = b"QTYPMAT\0";
pub const MATRIX_VERSION: u32 = 1;

#[derive(Default)]
pub(crate) struct ByteWriter {
    pub(crate) buf: Vec<u8>,
}

impl ByteWriter {
    pub(crate) fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    pub(crate) fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub(crate) fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub(crate) fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    /// Length-prefixed byte string.
    pub(crate) fn blob(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.bytes(b);
    }
    pub(crate) fn matrix(&mut self, m: &DenseMatrix) {
        self.u64(m.rows as u64);
        self.u64(m.cols as u64);
        for &x in &m.data {
            self.f64(x);
        }
    }
}

pub(crate) struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        ByteReader { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Corrupt(format!("unexpected end of data at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub(crate) fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Corrupt("length overflows usize".into()))
    }
    pub(crate) fn blob(&mut self) -> Result<&'a [u8]> {
        let n = self.usize()?;
        self.take(n)
    }
    pub(crate) fn matrix(&mut self) -> Result<DenseMatrix> {
        let rows = self.usize()?;
        let cols = self.usize()?;
        let n = rows
            .checked_mul(cols)
            .filter(|n| n.checked_mul(8).is_some_and(|b| b <= self.buf.len() - self.pos))
            .ok_or_else(|| Error::Corrupt(format!("matrix of {rows}x{cols} does not fit in the data")))?;
        let data = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Ok(DenseMatrix { rows, cols, data })
    }
    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Corrupt(format!("{} trailing bytes", self.buf.len() - self.pos)))
        }
    }
}

pub fn encode_matrix(m: &DenseMatrix) -> Vec<u8> {
    let mut w = ByteWriter::default();
    w.bytes(MATRIX_MAGIC);
    w.u32(MATRIX_VERSION);
    w.matrix(m);
    w.buf
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut r = ByteReader::new(bytes);
    if r.take(8)? != MATRIX_MAGIC {
        return Err(Error::Corrupt("not a matrix container".into()));
    }
    let version = r.u32()?;
    if version != MATRIX_VERSION {
        return Err(Error::IncompatibleVersion {
            found: version,
            expected: MATRIX_VERSION,
        });
    }
    let m = r.matrix()?;
    r.finish()?;
    Ok(m)
}

/// CSV with a header row; the first column holds the row labels.
pub fn matrix_csv(m: &DenseMatrix, row_labels: &[String], col_names: &[String]) -> String {
    let mut out = String::from("label");
    for c in col_names {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for i in 0..m.rows {
        out.push_str(&csv_field(&row_labels[i]));
        for x in m.row(i) {
            out.push(',');
            out.push_str(&format!("{x:e}"));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceLabels {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    rank_deficient: bool,
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

impl LatentSpace {
    /// Writes `u.bin`, `s.bin`, `v.bin` and `labels.json` into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        write(&dir.join("u.bin"), encode_matrix(&self.u))?;
        let s = DenseMatrix {
            rows: 1,
            cols: self.s.len(),
            data: self.s.clone(),
        };
        write(&dir.join("s.bin"), encode_matrix(&s))?;
        write(&dir.join("v.bin"), encode_matrix(&self.v))?;
        let labels = SpaceLabels {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            rank_deficient: self.rank_deficient,
        };
        write(
            &dir.join("labels.json"),
            serde_json::to_string(&labels).map_err(|e| Error::json("space labels", e))?,
        )
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let u = decode_matrix(&read(&dir.join("u.bin"))?)?;
        let s = decode_matrix(&read(&dir.join("s.bin"))?)?.data;
        let v = decode_matrix(&read(&dir.join("v.bin"))?)?;
        let labels: SpaceLabels = serde_json::from_slice(&read(&dir.join("labels.json"))?)
            .map_err(|e| Error::json("space labels", e))?;
        let space = LatentSpace {
            u,
            s,
            v,
            row_labels: labels.row_labels,
            col_labels: labels.col_labels,
            rank_deficient: labels.rank_deficient,
        };
        space.check_shape()?;
        Ok(space)
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        let r = self.s.len();
        if self.u.cols != r
            || self.v.cols != r
            || self.u.rows != self.row_labels.len()
            || self.v.rows != self.col_labels.len()
        {
            return Err(Error::Corrupt("latent space factors have inconsistent shapes".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = DenseMatrix::from_rows(&[vec![1.0, -2.5], vec![f64::MIN_POSITIVE, 3.0e300]]);
        let bytes = encode_matrix(&m);
        assert_eq!(&bytes[..8], MATRIX_MAGIC);
        assert_eq!(decode_matrix(&bytes).unwrap(), m);
    }

    #[test]
    fn truncated_matrix_is_corrupt() {
        let bytes = encode_matrix(&DenseMatrix::from_rows(&[vec![1.0, 2.0]]));
        for cut in [0, 5, 12, bytes.len() - 1] {
            assert!(matches!(decode_matrix(&bytes[..cut]), Err(Error::Corrupt(_))), "cut {cut}");
        }
    }

    #[test]
    fn version_checked() {
        let mut bytes = encode_matrix(&DenseMatrix::zeros(1, 1));
        bytes[8] = 9;
        assert!(matches!(
            decode_matrix(&bytes),
            Err(Error::IncompatibleVersion { found: 9, .. })
        ));
    }

    #[test]
    fn csv_quotes_labels() {
        let m = DenseMatrix::from_rows(&[vec![0.5]]);
        let csv = matrix_csv(&m, &["a,b".into()], &["c0".into()]);
        assert_eq!(csv, "label,c0\n\"a,b\",5e-1\n");
    }
}
