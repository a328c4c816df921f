//! JSON persistence for tensor trains.
//!
//! Floats are written with 17 significant digits so files round-trip
//! bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Core, TensorTrain};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk layout of a single core. `imag` is only present for complex
/// (state) trains.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoreFile {
    pub shape: [usize; 3],
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TtFile {
    pub version: u32,
    pub dims: Vec<usize>,
    pub cores: Vec<CoreFile>,
}

impl TtFile {
    pub fn check(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported TT file version {}", self.version)));
        }
        if self.dims.len() != self.cores.len() {
            return Err(Error::Format(format!(
                "{} dims but {} cores",
                self.dims.len(),
                self.cores.len()
            )));
        }
        for (l, (c, &d)) in self.cores.iter().zip(&self.dims).enumerate() {
            let n = c.shape.iter().product::<usize>();
            if c.shape[1] != d || c.data.len() != n {
                return Err(Error::Format(format!("core {l}: shape {:?} inconsistent", c.shape)));
            }
            if let Some(im) = &c.imag {
                if im.len() != n {
                    return Err(Error::Format(format!("core {l}: imag length {} != {n}", im.len())));
                }
            }
        }
        Ok(())
    }
}

impl From<&TensorTrain> for TtFile {
    fn from(tt: &TensorTrain) -> Self {
        TtFile {
            version: FORMAT_VERSION,
            dims: tt.dims().to_vec(),
            cores: tt
                .cores()
                .iter()
                .map(|c| CoreFile { shape: c.shape(), data: c.data().to_vec(), imag: None })
                .collect(),
        }
    }
}

impl TryFrom<TtFile> for TensorTrain {
    type Error = Error;

    fn try_from(f: TtFile) -> Result<Self> {
        f.check()?;
        if f.cores.iter().any(|c| c.imag.as_ref().is_some_and(|im| im.iter().any(|&v| v != 0.0))) {
            return Err(Error::Format("complex TT file where a real train was expected".into()));
        }
        let cores = f
            .cores
            .into_iter()
            .map(|c| Core::new(c.shape[0], c.shape[1], c.shape[2], c.data))
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }
}

struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes to compact JSON with full-precision floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

impl TensorTrain {
    pub fn to_json(&self) -> Result<String> {
        to_json(&TtFile::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: TtFile = serde_json::from_str(text)?;
        f.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, &TtFile::from(self))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json::<TtFile>(path)?.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let tt = TensorTrain::product(&[vec![0.1, 1.0 / 3.0], vec![std::f64::consts::PI, -2.5e-300]]).unwrap();
        let text = tt.to_json().unwrap();
        assert!(text.contains("\"version\":1"));
        let back = TensorTrain::from_json(&text).unwrap();
        assert_eq!(tt, back);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.tt.json");
        let tt = TensorTrain::ones(&[2, 3, 2]).unwrap();
        tt.save(&p).unwrap();
        assert_eq!(TensorTrain::load(&p).unwrap(), tt);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let bad = r#"{"version":1,"dims":[2],"cores":[{"shape":[1,2,1],"data":[1.0]}]}"#;
        assert!(matches!(TensorTrain::from_json(bad), Err(Error::Format(_))));
        let ver = r#"{"version":7,"dims":[1],"cores":[{"shape":[1,1,1],"data":[1.0]}]}"#;
        assert!(matches!(TensorTrain::from_json(ver), Err(Error::Format(_))));
    }
}
