//! Model container: `FGCN` magic, u32 version, u32 length of a JSON
//! descriptor, the descriptor, u32 blob count, then per blob a u64 value
//! count followed by f64 values. All numbers are little-endian.
//!
//! The descriptor is free-form JSON with a `kind` key; single networks use
//! `{"kind": "cnn", "architecture": {...}}`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::model::{Architecture, CnnModel};
use super::CnnError;

pub const MAGIC: &[u8; 4] = b"FGCN";
pub const FORMAT_VERSION: u32 = 1;

/// Descriptor plus parameter blobs, independent of the model type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub descriptor: Value,
    pub blobs: Vec<Vec<f64>>,
}

fn io_err(e: std::io::Error) -> CnnError {
    CnnError::Format(e.to_string())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CnnError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| CnnError::Format(format!("truncated at byte {} (need {n} more)", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CnnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CnnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// True when `bytes` starts with the container magic.
pub fn is_fgcn(bytes: &[u8]) -> bool {
    bytes.starts_with(MAGIC)
}

impl Container {
    pub fn kind(&self) -> Option<&str> {
        self.descriptor.get("kind").and_then(Value::as_str)
    }

    pub fn write<W: Write + ?Sized>(&self, w: &mut W) -> Result<(), CnnError> {
        let descriptor = serde_json::to_vec(&self.descriptor).map_err(|e| CnnError::Format(e.to_string()))?;
        let mut buf = Vec::with_capacity(16 + descriptor.len() + self.blobs.iter().map(|b| 8 + 8 * b.len()).sum::<usize>());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(descriptor.len() as u32).to_le_bytes());
        buf.extend_from_slice(&descriptor);
        buf.extend_from_slice(&(self.blobs.len() as u32).to_le_bytes());
        for blob in &self.blobs {
            buf.extend_from_slice(&(blob.len() as u64).to_le_bytes());
            for v in blob {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf).map_err(io_err)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read(bytes: &[u8]) -> Result<Container, CnnError> {
        let mut c = Cursor { bytes, pos: 0 };
        if c.take(4)? != MAGIC {
            return Err(CnnError::Format("missing FGCN magic".into()));
        }
        let version = c.u32()?;
        if version != FORMAT_VERSION {
            return Err(CnnError::Format(format!("unsupported version {version}")));
        }
        let len = c.u32()? as usize;
        let descriptor: Value =
            serde_json::from_slice(c.take(len)?).map_err(|e| CnnError::Format(format!("descriptor: {e}")))?;
        let count = c.u32()? as usize;
        let mut blobs = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let n = usize::try_from(c.u64()?).map_err(|_| CnnError::Format("blob too large".into()))?;
            let raw = c.take(n.checked_mul(8).ok_or_else(|| CnnError::Format("blob too large".into()))?)?;
            blobs.push(
                raw.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                    .collect(),
            );
        }
        if c.pos != bytes.len() {
            return Err(CnnError::Format(format!("{} trailing bytes", bytes.len() - c.pos)));
        }
        Ok(Container { descriptor, blobs })
    }

    /// JSON document with the same content as the binary form.
    pub fn to_json(&self) -> Value {
        json!({
            "format": "FGCN",
            "version": FORMAT_VERSION,
            "descriptor": self.descriptor,
            "blobs": self.blobs,
        })
    }

    pub fn from_json(value: Value) -> Result<Container, CnnError> {
        #[derive(Deserialize)]
        struct Doc {
            format: String,
            version: u32,
            descriptor: Value,
            blobs: Vec<Vec<f64>>,
        }
        let doc: Doc = serde_json::from_value(value).map_err(|e| CnnError::Format(e.to_string()))?;
        if doc.format != "FGCN" || doc.version != FORMAT_VERSION {
            return Err(CnnError::Format(format!("unsupported document {} v{}", doc.format, doc.version)));
        }
        Ok(Container {
            descriptor: doc.descriptor,
            blobs: doc.blobs,
        })
    }
}

impl CnnModel {
    pub fn to_container(&self) -> Container {
        Container {
            descriptor: json!({ "kind": "cnn", "architecture": self.architecture() }),
            blobs: self.blobs().into_iter().cloned().collect(),
        }
    }

    /// Takes the blobs out of a `cnn` container. Extra descriptor keys are ignored.
    pub fn from_container(container: Container) -> Result<CnnModel, CnnError> {
        if container.kind() != Some("cnn") {
            return Err(CnnError::Format(format!("expected a cnn descriptor, found {:?}", container.kind())));
        }
        let arch: Architecture = serde_json::from_value(container.descriptor["architecture"].clone())
            .map_err(|e| CnnError::Format(format!("architecture: {e}")))?;
        CnnModel::from_parameters(arch, container.blobs)
    }
}

pub fn write_model<W: Write + ?Sized>(w: &mut W, model: &CnnModel) -> Result<(), CnnError> {
    model.to_container().write(w)
}

pub fn read_model(bytes: &[u8]) -> Result<CnnModel, CnnError> {
    CnnModel::from_container(Container::read(bytes)?)
}

#[cfg(test)]
mod tests {
    use super::super::arch::emg_cnn;
    use super::*;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let m = emg_cnn(8).unwrap();
        let mut buf = Vec::new();
        write_model(&mut buf, &m).unwrap();
        assert!(is_fgcn(&buf));
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(read_model(&buf).unwrap(), m);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = emg_cnn(9).unwrap();
        let text = serde_json::to_string(&m.to_container().to_json()).unwrap();
        let back = Container::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.to_bytes(), m.to_container().to_bytes());
        assert_eq!(CnnModel::from_container(back).unwrap(), m);
    }

    #[test]
    fn header_layout() {
        let c = Container {
            descriptor: json!({"kind": "x"}),
            blobs: vec![vec![1.5], vec![]],
        };
        let b = c.to_bytes();
        let d = br#"{"kind":"x"}"#;
        assert_eq!(&b[8..12], &(d.len() as u32).to_le_bytes());
        assert_eq!(&b[12..12 + d.len()], d);
        let rest = &b[12 + d.len()..];
        assert_eq!(&rest[..4], &2u32.to_le_bytes());
        assert_eq!(&rest[4..12], &1u64.to_le_bytes());
        assert_eq!(&rest[12..20], &1.5f64.to_le_bytes());
        assert_eq!(&rest[20..28], &0u64.to_le_bytes());
        assert_eq!(rest.len(), 28);
    }

    #[test]
    fn rejects_corruption() {
        let buf = emg_cnn(1).unwrap().to_container().to_bytes();
        assert!(read_model(&buf[..buf.len() - 3]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_model(&extra).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_model(&bad).is_err());
        let mut v2 = buf;
        v2[4] = 2;
        assert!(matches!(read_model(&v2), Err(CnnError::Format(_))));
        let other = Container {
            descriptor: json!({"kind": "fusion"}),
            blobs: vec![],
        };
        assert!(read_model(&other.to_bytes()).is_err());
    }
}
