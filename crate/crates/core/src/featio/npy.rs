//! Minimal NPY (v1.0) reader and writer for 2-D little-endian f32 matrices.
//!
//! Spectrograms are stored time-major, shape `(tau, nu)`; feature matrices
//! as `(tau, 3 * nu)`. Version 2.0/3.0 headers are accepted on read.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::spectrogram::{FeatureMatrix, Spectrogram};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 6] = *b"\x93NUMPY";
const ALIGN: usize = 64;

/// A row-major 2-D f32 matrix as stored in an NPY file.
#[derive(Clone, Debug, PartialEq)]
pub struct NpyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl NpyMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} values do not fill {rows}x{cols}", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Interprets the matrix as `(tau, nu)`; the result is unnormalized.
    pub fn to_spectrogram(&self) -> Result<Spectrogram> {
        Spectrogram::from_time_major(self.rows, self.cols, &self.data)
    }

    pub fn into_features(self) -> Result<FeatureMatrix> {
        FeatureMatrix::new(self.rows, self.cols, self.data)
    }
}

impl From<&Spectrogram> for NpyMatrix {
    fn from(spec: &Spectrogram) -> Self {
        Self {
            rows: spec.tau(),
            cols: spec.nu(),
            data: spec.to_time_major(),
        }
    }
}

impl From<&FeatureMatrix> for NpyMatrix {
    fn from(feats: &FeatureMatrix) -> Self {
        Self {
            rows: feats.rows(),
            cols: feats.cols(),
            data: feats.values().to_vec(),
        }
    }
}

fn header_bytes(rows: usize, cols: usize) -> Vec<u8> {
    let dict = format!("{{'descr': '<f4', 'fortran_order': False, 'shape': ({rows}, {cols}), }}");
    // magic + version + u16 length + dict + padding + '\n'
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let pad = (ALIGN - unpadded % ALIGN) % ALIGN;
    let header_len = dict.len() + pad + 1;
    let mut out = Vec::with_capacity(unpadded + pad);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.resize(out.len() + pad, b' ');
    out.push(b'\n');
    out
}

pub fn write_npy<W: Write + ?Sized>(writer: &mut W, matrix: &NpyMatrix) -> io::Result<()> {
    writer.write_all(&header_bytes(matrix.rows, matrix.cols))?;
    let mut payload = Vec::with_capacity(matrix.data.len() * 4);
    for v in &matrix.data {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    writer.write_all(&payload)
}

pub fn read_npy<R: Read>(reader: &mut R) -> Result<NpyMatrix> {
    let mut magic = [0u8; 6];
    read_exact(reader, &mut magic)?;
    if magic != MAGIC {
        return Err(Error::Format("bad NPY magic bytes".into()));
    }
    let mut version = [0u8; 2];
    read_exact(reader, &mut version)?;
    let header_len = match version[0] {
        1 => {
            let mut len = [0u8; 2];
            read_exact(reader, &mut len)?;
            usize::from(u16::from_le_bytes(len))
        }
        2 | 3 => {
            let mut len = [0u8; 4];
            read_exact(reader, &mut len)?;
            u32::from_le_bytes(len) as usize
        }
        v => return Err(Error::Format(format!("unsupported NPY version {v}.{}", version[1]))),
    };
    let mut header = vec![0u8; header_len];
    read_exact(reader, &mut header)?;
    let header = std::str::from_utf8(&header).map_err(|_| Error::Format("NPY header is not text".into()))?;
    let (rows, cols) = parse_header(header)?;

    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("NPY shape overflows".into()))?;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    if payload.len() != count * 4 {
        return Err(Error::Format(format!(
            "NPY payload has {} bytes, shape ({rows}, {cols}) needs {}",
            payload.len(),
            count * 4
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(NpyMatrix { rows, cols, data })
}

fn read_exact<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<()> {
    reader.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format("truncated NPY header".into()),
        _ => Error::Io(e),
    })
}

/// Extracts the quoted or bare value following `'key':` in a header dict.
fn dict_value<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    let needle = format!("'{key}'");
    let start = header
        .find(&needle)
        .ok_or_else(|| Error::Format(format!("NPY header has no '{key}'")))?;
    let rest = header[start + needle.len()..].trim_start();
    let rest = rest
        .strip_prefix(':')
        .ok_or_else(|| Error::Format(format!("NPY header: malformed '{key}' entry")))?
        .trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')').map(|i| i + 1)
    } else {
        rest.find([',', '}'])
    }
    .ok_or_else(|| Error::Format(format!("NPY header: unterminated '{key}' value")))?;
    Ok(rest[..end].trim())
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let header = header.trim_end();
    if !header.starts_with('{') || !header.ends_with('}') {
        return Err(Error::Format("NPY header is not a dict".into()));
    }
    let descr = dict_value(header, "descr")?.trim_matches(['\'', '"']);
    if descr != "<f4" {
        return Err(Error::UnsupportedFormat(format!("NPY dtype {descr}, expected <f4")));
    }
    match dict_value(header, "fortran_order")? {
        "False" => {}
        "True" => return Err(Error::UnsupportedFormat("Fortran-order NPY".into())),
        other => return Err(Error::Format(format!("NPY fortran_order `{other}`"))),
    }
    let shape = dict_value(header, "shape")?;
    let dims = shape
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::Format(format!("NPY shape {shape}"))))
        .collect::<Result<Vec<_>>>()?;
    match dims.as_slice() {
        &[rows, cols] => Ok((rows, cols)),
        _ => Err(Error::Shape(format!("expected a 2-D array, found shape {shape}"))),
    }
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<NpyMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).at(path))?;
    read_npy(&mut BufReader::new(file)).map_err(|e| e.at(path))
}

pub fn write_feature_file(path: impl AsRef<Path>, matrix: &NpyMatrix) -> Result<()> {
    let path = path.as_ref();
    let write = || -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        write_npy(&mut out, matrix)?;
        out.flush()
    };
    write().map_err(|e| Error::from(e).at(path))
}
