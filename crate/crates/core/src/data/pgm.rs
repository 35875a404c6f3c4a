//! Binary (P5) 8-bit PGM images and label-prefixed image directories.
//!
//! Files are named `<label>_<anything>.pgm`. Each image is flattened row by
//! row into one feature vector with intensities scaled to `[0, 1]`.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::DatasetPair;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    /// Row-major, `width * height` samples.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    /// Row-major flattening scaled by `maxval` (255 for ordinary files).
    pub fn to_features(&self) -> Vec<f64> {
        let scale = f64::from(self.maxval);
        self.pixels.iter().map(|&p| f64::from(p) / scale).collect()
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    source_name: &'a str,
}

impl Header<'_> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::MalformedPgm {
            source_name: self.source_name.to_owned(),
            reason: reason.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.fail(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.fail(format!("{what} is out of range")))
    }
}

pub fn decode_pgm(bytes: &[u8], source_name: &str) -> Result<GrayImage> {
    let mut h = Header {
        bytes,
        pos: 0,
        source_name,
    };
    if !bytes.starts_with(b"P5") {
        return Err(h.fail("missing P5 magic number"));
    }
    h.pos = 2;
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(h.fail("image has zero size"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(h.fail(format!("maxval {maxval} is not an 8-bit depth")));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(h.fail("missing whitespace after maxval")),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| h.fail("image dimensions overflow"))?;
    let raster = bytes
        .get(h.pos..)
        .filter(|r| r.len() >= len)
        .ok_or_else(|| h.fail(format!("raster truncated: need {len} bytes")))?;
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u8,
        pixels: raster[..len].to_vec(),
    })
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", image.width, image.height, image.maxval).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

/// Leading integer before the first underscore, e.g. `12_smile.pgm` → 12.
pub fn label_from_file_name(name: &str) -> Result<usize> {
    name.split_once('_')
        .and_then(|(prefix, _)| prefix.parse().ok())
        .ok_or_else(|| Error::BadLabel(name.to_owned()))
}

/// Loads every `*.pgm` file in `dir`, in lexicographic file-name order.
pub fn load_pgm_dir(dir: impl AsRef<Path>) -> Result<DataMatrix> {
    let (matrix, _) = load_images(dir.as_ref(), None)?;
    Ok(matrix)
}

fn load_images(
    dir: &Path,
    expected: Option<(usize, usize)>,
) -> Result<(DataMatrix, (usize, usize))> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_pgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            let name = entry
                .file_name()
                .into_string()
                .map_err(|n| Error::BadLabel(n.to_string_lossy().into_owned()))?;
            names.push(name);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Error::EmptyInput("directory contains no .pgm files"));
    }

    let mut size = expected;
    let mut labels = Vec::with_capacity(names.len());
    let mut values = Vec::new();
    for name in &names {
        let label = label_from_file_name(name)?;
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let source_name = path.display().to_string();
        let image = decode_pgm(&bytes, &source_name)?;
        let found = (image.width, image.height);
        let expected = *size.get_or_insert(found);
        if found != expected {
            return Err(Error::ImageSizeMismatch {
                source_name,
                expected,
                found,
            });
        }
        labels.push(label);
        values.extend(image.to_features());
    }
    let (w, h) = size.expect("at least one image");
    let matrix = Array2::from_shape_vec((labels.len(), w * h), values).expect("sizes checked");
    Ok((DataMatrix::new(matrix, Some(labels))?, (w, h)))
}

pub fn load_pgm_dirs(
    train_dir: impl AsRef<Path>,
    test_dir: impl AsRef<Path>,
) -> Result<DatasetPair> {
    let (train_dir, test_dir) = (train_dir.as_ref(), test_dir.as_ref());
    let (train, size) = load_images(train_dir, None)?;
    let (test, _) = load_images(test_dir, Some(size))?;
    DatasetPair::new(
        train,
        test,
        format!("pgm:{},{}", train_dir.display(), test_dir.display()),
    )
}
