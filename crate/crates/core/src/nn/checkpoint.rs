//! `.cqn` files: a UTF-8 header, raw little-endian `f64` values, and a
//! trailing little-endian `u64` xxh64 digest of everything before it.
//!
//! ```text
//! CQN 1
//! spec 42:dense64,relu,dense64,relu,dense3
//! meta episodes_trained=300 frames_seen=81234 epsilon_at_save=0.1 seed=7
//! tensor layer0.weight 64x42 offset=0
//! tensor layer0.bias 64 offset=2688
//! ...
//! data 7107
//! <7107 x f64 LE><u64 LE digest>
//! ```

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;
use twox_hash::XxHash64;

use super::params::{NetworkParams, Tensor};
use super::spec::NetworkSpec;
use super::NetError;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "CQN";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported checkpoint format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint shape mismatch: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckpointMeta {
    pub episodes_trained: u64,
    pub frames_seen: u64,
    pub epsilon_at_save: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub spec: NetworkSpec,
    pub params: NetworkParams,
    pub meta: CheckpointMeta,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        let names = self
            .spec
            .param_shapes()
            .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))?;
        self.params
            .check_against(&self.spec)
            .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))?;
        let m = &self.meta;
        let mut header = format!(
            "{MAGIC} {FORMAT_VERSION}\nspec {}\nmeta episodes_trained={} frames_seen={} epsilon_at_save={:?} seed={}\n",
            self.spec, m.episodes_trained, m.frames_seen, m.epsilon_at_save, m.seed
        );
        let mut offset = 0;
        for ((name, shape), t) in names.iter().zip(&self.params.tensors) {
            let dims: Vec<String> = shape.iter().map(usize::to_string).collect();
            header.push_str(&format!("tensor {name} {} offset={offset}\n", dims.join("x")));
            offset += t.len();
        }
        header.push_str(&format!("data {offset}\n"));
        let mut bytes = header.into_bytes();
        bytes.reserve(offset * 8 + 8);
        for v in self.params.values() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let digest = XxHash64::oneshot(0, &bytes);
        bytes.extend_from_slice(&digest.to_le_bytes());
        Ok(bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let corrupt = |msg: &str| CheckpointError::Corrupt(msg.to_string());
        // The version is checked before the digest so that files from a
        // newer writer report the real problem.
        let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
        let first = std::str::from_utf8(first).map_err(|_| corrupt("header is not UTF-8"))?;
        let version = first
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| corrupt("missing magic"))?
            .parse::<u32>()
            .map_err(|_| corrupt("bad version field"))?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::Version { found: version });
        }
        if bytes.len() < 8 {
            return Err(corrupt("truncated"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if XxHash64::oneshot(0, body) != stored {
            return Err(corrupt("digest mismatch"));
        }

        let mut pos = 0;
        let mut next_line = || -> Result<&str, CheckpointError> {
            let end = body[pos..]
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| corrupt("unterminated header"))?;
            let line = std::str::from_utf8(&body[pos..pos + end]).map_err(|_| corrupt("header is not UTF-8"))?;
            pos += end + 1;
            Ok(line)
        };
        next_line()?;
        let spec: NetworkSpec = next_line()?
            .strip_prefix("spec ")
            .ok_or_else(|| corrupt("missing spec line"))?
            .parse()
            .map_err(|e: NetError| CheckpointError::ShapeMismatch(e.to_string()))?;
        let meta = parse_meta(next_line()?)?;
        let expected = spec
            .param_shapes()
            .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))?;
        let mut shapes = Vec::with_capacity(expected.len());
        let mut offset = 0usize;
        let count = loop {
            let line = next_line()?;
            if let Some(n) = line.strip_prefix("data ") {
                break n.parse::<usize>().map_err(|_| corrupt("bad data count"))?;
            }
            let mut parts = line.split(' ');
            let (Some("tensor"), Some(name), Some(dims), Some(off), None) =
                (parts.next(), parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(corrupt("bad tensor line"));
            };
            let dims: Vec<usize> = dims
                .split('x')
                .map(|d| d.parse().map_err(|_| corrupt("bad tensor dims")))
                .collect::<Result<_, _>>()?;
            let off: usize = off
                .strip_prefix("offset=")
                .and_then(|o| o.parse().ok())
                .ok_or_else(|| corrupt("bad tensor offset"))?;
            if off != offset {
                return Err(corrupt("tensor offsets are not contiguous"));
            }
            let i = shapes.len();
            match expected.get(i) {
                Some((en, es)) if en == name && *es == dims => {}
                _ => {
                    return Err(CheckpointError::ShapeMismatch(format!(
                        "tensor {name} {dims:?} does not match spec {spec}"
                    )))
                }
            }
            offset += dims.iter().product::<usize>();
            shapes.push(dims);
        };
        if shapes.len() != expected.len() || count != offset {
            return Err(CheckpointError::ShapeMismatch(format!(
                "{} tensors with {count} values, spec needs {} tensors with {offset}",
                shapes.len(),
                expected.len()
            )));
        }
        let data = &body[pos..];
        if data.len() != count * 8 {
            return Err(corrupt("data section length"));
        }
        let mut values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let tensors = shapes
            .into_iter()
            .map(|shape| {
                let n = shape.iter().product();
                Tensor::from_vec(shape, values.by_ref().take(n).collect())
                    .map_err(|e| CheckpointError::ShapeMismatch(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            spec,
            params: NetworkParams { tensors },
            meta,
        })
    }
}

fn parse_meta(line: &str) -> Result<CheckpointMeta, CheckpointError> {
    let corrupt = |m: &str| CheckpointError::Corrupt(format!("meta: {m}"));
    let rest = line.strip_prefix("meta ").ok_or_else(|| corrupt("missing line"))?;
    let mut meta = CheckpointMeta::default();
    for kv in rest.split(' ') {
        let (k, v) = kv.split_once('=').ok_or_else(|| corrupt(kv))?;
        match k {
            "episodes_trained" => meta.episodes_trained = v.parse().map_err(|_| corrupt(kv))?,
            "frames_seen" => meta.frames_seen = v.parse().map_err(|_| corrupt(kv))?,
            "epsilon_at_save" => meta.epsilon_at_save = v.parse().map_err(|_| corrupt(kv))?,
            "seed" => meta.seed = v.parse().map_err(|_| corrupt(kv))?,
            _ => return Err(corrupt(kv)),
        }
    }
    Ok(meta)
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, ckpt.to_bytes()?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, QNetwork};

    fn sample() -> Checkpoint {
        let spec = NetworkSpec::default_feature(9);
        Checkpoint {
            params: init_params(&spec, 5).unwrap(),
            spec,
            meta: CheckpointMeta {
                episodes_trained: 12,
                frames_seen: 3456,
                epsilon_at_save: 0.1 + 0.2,
                seed: u64::MAX,
            },
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let back = Checkpoint::from_bytes(&c.to_bytes().unwrap()).unwrap();
        assert_eq!(back, c);
        let a = QNetwork::new(c.spec.clone(), c.params).unwrap();
        let b = QNetwork::new(back.spec, back.params).unwrap();
        let x = [0.3; 9];
        let (qa, qb) = (a.forward(&x).unwrap(), b.forward(&x).unwrap());
        assert!(qa.iter().zip(&qb).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn truncated_is_corrupt() {
        let bytes = sample().to_bytes().unwrap();
        for cut in [bytes.len() - 1, bytes.len() / 2, 10] {
            assert!(matches!(
                Checkpoint::from_bytes(&bytes[..cut]),
                Err(CheckpointError::Corrupt(_))
            ));
        }
    }

    #[test]
    fn flipped_bit_is_corrupt() {
        let mut bytes = sample().to_bytes().unwrap();
        let n = bytes.len();
        bytes[n - 20] ^= 1;
        assert!(matches!(
            Checkpoint::from_bytes(&bytes),
            Err(CheckpointError::Corrupt(_))
        ));
    }

    #[test]
    fn future_version_rejected() {
        let bytes = sample().to_bytes().unwrap();
        let mut edited = b"CQN 99".to_vec();
        edited.extend_from_slice(&bytes[5..]);
        assert!(matches!(
            Checkpoint::from_bytes(&edited),
            Err(CheckpointError::Version { found: 99 })
        ));
    }

    #[test]
    fn params_not_matching_spec_rejected_on_save() {
        let mut c = sample();
        c.spec = NetworkSpec::default_feature(10);
        assert!(matches!(c.to_bytes(), Err(CheckpointError::ShapeMismatch(_))));
    }

    #[test]
    fn tensor_lines_must_match_spec() {
        let bytes = sample().to_bytes().unwrap();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let header_end = text.find("data ").unwrap();
        let header = &text[..header_end];
        let edited = header.replace("tensor layer0.weight 64x9", "tensor layer0.weight 9x64");
        let mut out = edited.into_bytes();
        out.extend_from_slice(&bytes[header_end..bytes.len() - 8]);
        let digest = XxHash64::oneshot(0, &out);
        out.extend_from_slice(&digest.to_le_bytes());
        assert!(matches!(
            Checkpoint::from_bytes(&out),
            Err(CheckpointError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.cqn");
        save_checkpoint(&sample(), &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), sample());
        assert!(matches!(
            load_checkpoint(&dir.path().join("missing.cqn")),
            Err(CheckpointError::Io(_))
        ));
    }
}
