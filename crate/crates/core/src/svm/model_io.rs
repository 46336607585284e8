//! Binary model file, format EMBSVM01 (all integers and floats
//! little-endian):
//!
//! ```text
//! magic "EMBSVM01" | u32 version=1 | u32 n_labels | u32 feature_dim
//! | u8 has_bias | f64 lambda | u32 fallback index
//! | n_labels x (u16 byte length + UTF-8 label)
//! | n_labels x feature_dim f32 weights, row-major
//! | n_labels f32 biases
//! ```
//!
//! Weights are stored and reloaded as raw f32 bits, so a reloaded model
//! scores documents identically to the in-process one.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::Error;
use crate::svm::LinearModel;
use crate::Result;

const MAGIC: &[u8; 8] = b"EMBSVM01";
const VERSION: u32 = 1;

fn read_exact<const N: usize>(r: &mut impl Read, path: &Path) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| map_eof(e, path, "truncated model file"))?;
    Ok(buf)
}

fn map_eof(e: std::io::Error, path: &Path, msg: &str) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::format(path, 0, msg)
    } else {
        Error::Io(e)
    }
}

fn read_u16(r: &mut impl Read, path: &Path) -> Result<u16> {
    Ok(u16::from_le_bytes(read_exact(r, path)?))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r, path)?))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact(r, path)?))
}

impl LinearModel {
    /// Writes the model in EMBSVM01 format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(self.labels.len() as u32).to_le_bytes())?;
        out.write_all(&(self.feature_dim as u32).to_le_bytes())?;
        out.write_all(&[u8::from(self.has_bias)])?;
        out.write_all(&self.lambda.to_le_bytes())?;
        out.write_all(&(self.fallback as u32).to_le_bytes())?;
        for label in &self.labels {
            let bytes = label.as_bytes();
            if bytes.len() > usize::from(u16::MAX) {
                return Err(Error::invalid(format!(
                    "label too long for model file: {} bytes",
                    bytes.len()
                )));
            }
            out.write_all(&(bytes.len() as u16).to_le_bytes())?;
            out.write_all(bytes)?;
        }
        for w in &self.weights {
            out.write_all(&w.to_le_bytes())?;
        }
        for b in &self.biases {
            out.write_all(&b.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an EMBSVM01 model, validating magic, version, and all shape
    /// invariants.
    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let magic: [u8; 8] = read_exact(&mut r, path)?;
        if &magic != MAGIC {
            return Err(Error::format(path, 0, "bad magic, not an EMBSVM01 model"));
        }
        let version = read_u32(&mut r, path)?;
        if version != VERSION {
            return Err(Error::format(
                path,
                0,
                format!("unsupported model version {version}"),
            ));
        }
        let n_labels = read_u32(&mut r, path)? as usize;
        let feature_dim = read_u32(&mut r, path)? as usize;
        let has_bias = read_exact::<1>(&mut r, path)?[0] != 0;
        let lambda = read_f64(&mut r, path)?;
        let fallback = read_u32(&mut r, path)? as usize;
        let n_weights = n_labels
            .checked_mul(feature_dim)
            .ok_or_else(|| Error::format(path, 0, "model dimensions overflow"))?;

        let mut labels = Vec::with_capacity(n_labels);
        for _ in 0..n_labels {
            let len = usize::from(read_u16(&mut r, path)?);
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes)
                .map_err(|e| map_eof(e, path, "truncated label block"))?;
            let label = String::from_utf8(bytes)
                .map_err(|_| Error::format(path, 0, "label is not valid UTF-8"))?;
            labels.push(label);
        }
        let mut weights = Vec::with_capacity(n_weights);
        for _ in 0..n_weights {
            weights.push(f32::from_le_bytes(read_exact(&mut r, path)?));
        }
        let mut biases = Vec::with_capacity(n_labels);
        for _ in 0..n_labels {
            biases.push(f32::from_le_bytes(read_exact(&mut r, path)?));
        }
        let mut trailing = [0u8; 1];
        match r.read(&mut trailing)? {
            0 => {}
            _ => return Err(Error::format(path, 0, "trailing bytes after model data")),
        }

        LinearModel::from_parts(
            labels,
            feature_dim,
            lambda,
            has_bias,
            fallback,
            weights,
            biases,
        )
        .map_err(|e| Error::format(path, 0, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> LinearModel {
        LinearModel::from_parts(
            vec!["alpha".into(), "beta".into()],
            3,
            0.125,
            true,
            1,
            vec![1.0, -2.5, 0.375, 4.0, 5.5, -6.25],
            vec![0.5, -0.5],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_model_and_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.bin");
        let p2 = dir.path().join("m2.bin");
        let m = model();
        m.save(&p1).unwrap();
        let loaded = LinearModel::load(&p1).unwrap();
        assert_eq!(loaded, m);
        loaded.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        model().save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(LinearModel::load(&path).is_err());

        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(LinearModel::load(&path).is_err());

        let mut long = bytes.clone();
        long.push(0);
        std::fs::write(&path, &long).unwrap();
        assert!(LinearModel::load(&path).is_err());
    }

    #[test]
    fn rejects_wrong_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        model().save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = 9;
        std::fs::write(&path, &bytes).unwrap();
        assert!(LinearModel::load(&path).is_err());
    }
}
