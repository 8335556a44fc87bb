//! Model container and pretrained-embedding files.
//!
//! Model layout (little endian):
//!
//! ```text
//! magic  b"SPANPRSR"
//! u32    format version
//! u64    header length in bytes
//! header JSON: config, vocabulary, tensor names and shapes
//! f64 *  tensor data, in header order, row-major
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScorerConfig, ScorerModel};
use crate::error::{Error, Result};
use crate::treebank::Vocabulary;

const MAGIC: &[u8; 8] = b"SPANPRSR";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ScorerConfig,
    vocab: Vocabulary,
    tensors: Vec<TensorInfo>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct TensorInfo {
    name: String,
    shape: Vec<usize>,
}

impl ScorerModel {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = Header {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            tensors: self
                .params
                .named()
                .iter()
                .map(|(name, t)| TensorInfo {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(std::io::Error::other)?;
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(json.len() as u64).to_le_bytes())?;
        out.write_all(&json)?;
        for (_, t) in self.params.named() {
            for v in t.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let fmt = |m: &str| Error::ModelFormat(m.to_string());
        let mut magic = [0u8; 8];
        input
            .read_exact(&mut magic)
            .map_err(|_| fmt("truncated file"))?;
        if &magic != MAGIC {
            return Err(fmt("not a model file"));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word).map_err(|_| fmt("truncated file"))?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let mut len = [0u8; 8];
        input.read_exact(&mut len).map_err(|_| fmt("truncated file"))?;
        let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
        input.read_exact(&mut json).map_err(|_| fmt("truncated header"))?;
        let header: Header =
            serde_json::from_slice(&json).map_err(|e| Error::ModelFormat(e.to_string()))?;
        header.config.validate()?;
        let mut params = ScorerModel::zero_params(&header.config, header.vocab.len());
        let expected: Vec<TensorInfo> = params
            .named()
            .iter()
            .map(|(name, t)| TensorInfo {
                name: name.to_string(),
                shape: t.shape().to_vec(),
            })
            .collect();
        if expected != header.tensors {
            return Err(fmt("tensor layout does not match configuration"));
        }
        let mut buf = [0u8; 8];
        for (_, mut t) in params.named_mut() {
            for v in t.iter_mut() {
                input.read_exact(&mut buf).map_err(|_| fmt("truncated tensor data"))?;
                *v = f64::from_le_bytes(buf);
            }
        }
        if input.read(&mut buf).map_err(|_| fmt("read error"))? != 0 {
            return Err(fmt("trailing bytes after tensor data"));
        }
        Ok(ScorerModel::from_parts(header.config, header.vocab, params))
    }
}

pub fn save_model(model: &ScorerModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    model
        .write_to(BufWriter::new(file))
        .map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ScorerModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ScorerModel::read_from(BufReader::new(file))
}

/// Word vectors read from a text file with one `token v1 v2 ...` line per token.
///
/// A leading `count dim` header line, as written by word2vec, is skipped.
#[derive(Clone, Debug, Default)]
pub struct PretrainedEmbeddings {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl PretrainedEmbeddings {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut dim = 0;
        let mut vectors = HashMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if idx == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
                continue;
            }
            let values = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            if values.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "token without vector".into(),
                });
            }
            if dim == 0 {
                dim = values.len();
            } else if values.len() != dim {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {dim} values, found {}", values.len()),
                });
            }
            vectors.insert(fields[0].to_string(), values);
        }
        Ok(PretrainedEmbeddings { dim, vectors })
    }

    pub fn from_vectors(dim: usize, vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        if vectors.values().any(|v| v.len() != dim) {
            return Err(Error::invalid("vector length differs from dimension"));
        }
        Ok(PretrainedEmbeddings { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}
