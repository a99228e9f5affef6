//! Named trainable tensors and the checkpoint file format.
//!
//! A checkpoint is a single file: a plain-text manifest (meta lines plus one
//! `tensor <name> <shape> <byte-offset> <core|aux>` line per tensor) followed
//! by the raw little-endian f64 payload after the `end` line. Projector
//! parameters are stored with the `aux` flag: they are needed to resume
//! training but not to embed.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "MIXCURV-CKPT v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape/data mismatch");
        Tensor { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![0.0; n] }
    }

    pub fn scalar(x: f64) -> Self {
        Tensor { shape: vec![1], data: vec![x] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// All trainable values, addressed by stable names. Iteration follows
/// insertion order, which fixes tape layout and checkpoint layout.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    entries: Vec<(String, Tensor)>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) {
        match self.index.get(name) {
            Some(i) => self.entries[*i].1 = tensor,
            None => {
                self.index.insert(name.to_string(), self.entries.len());
                self.entries.push((name.to_string(), tensor));
            }
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.index
            .get(name)
            .map(|i| &self.entries[*i].1)
            .ok_or_else(|| Error::invalid(format!("unknown parameter {name:?}")))
    }

    pub fn tensor_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        match self.index.get(name) {
            Some(i) => Ok(&mut self.entries[*i].1),
            None => Err(Error::invalid(format!("unknown parameter {name:?}"))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_values(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.data().len()).sum()
    }

    /// Writes the checkpoint; names starting with an `aux_prefixes` entry are
    /// flagged `aux` in the manifest.
    pub fn save(
        &self,
        path: &Path,
        meta: &[(String, String)],
        aux_prefixes: &[&str],
    ) -> Result<()> {
        let mut manifest = String::new();
        manifest.push_str(MAGIC);
        manifest.push('\n');
        for (k, v) in meta {
            if k.contains(char::is_whitespace) {
                return Err(Error::Checkpoint(format!("meta key {k:?} contains whitespace")));
            }
            manifest.push_str(&format!("meta {k} {v}\n"));
        }
        let mut offset = 0usize;
        for (name, tensor) in &self.entries {
            let shape = tensor
                .shape()
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x");
            let flag = if aux_prefixes.iter().any(|p| name.starts_with(p)) { "aux" } else { "core" };
            manifest.push_str(&format!("tensor {name} {shape} {offset} {flag}\n"));
            offset += tensor.data().len() * 8;
        }
        manifest.push_str("end\n");

        let mut payload = Vec::with_capacity(offset);
        for (_, tensor) in &self.entries {
            for x in tensor.data() {
                payload.extend_from_slice(&x.to_le_bytes());
            }
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(manifest.as_bytes())?;
        file.write_all(&payload)?;
        Ok(())
    }

    /// Loads a checkpoint, returning the store and its meta entries.
    pub fn load(path: &Path) -> Result<(Self, Vec<(String, String)>)> {
        let mut raw = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut raw)?;
        let end_marker = b"end\n";
        let header_end = find_subslice(&raw, end_marker)
            .ok_or_else(|| Error::Checkpoint("missing manifest end marker".into()))?;
        let header = std::str::from_utf8(&raw[..header_end])
            .map_err(|_| Error::Checkpoint("manifest is not utf-8".into()))?;
        let payload = &raw[header_end + end_marker.len()..];

        let mut lines = header.lines();
        if lines.next() != Some(MAGIC) {
            return Err(Error::Checkpoint("bad magic line".into()));
        }
        let mut store = ParamStore::new();
        let mut meta = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["meta", k, rest @ ..] => meta.push((k.to_string(), rest.join(" "))),
                ["tensor", name, shape, offset, _flag] => {
                    let shape: Vec<usize> = shape
                        .split('x')
                        .map(|d| d.parse().map_err(|_| Error::Checkpoint(format!("bad shape in {line:?}"))))
                        .collect::<Result<_>>()?;
                    let offset: usize = offset
                        .parse()
                        .map_err(|_| Error::Checkpoint(format!("bad offset in {line:?}")))?;
                    let n: usize = shape.iter().product();
                    if offset + n * 8 > payload.len() {
                        return Err(Error::Checkpoint(format!(
                            "tensor {name} overruns payload ({} bytes)",
                            payload.len()
                        )));
                    }
                    let data: Vec<f64> = payload[offset..offset + n * 8]
                        .chunks_exact(8)
                        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                        .collect();
                    store.insert(name, Tensor::from_vec(shape, data));
                }
                _ => return Err(Error::Checkpoint(format!("unrecognized manifest line {line:?}"))),
            }
        }
        Ok((store, meta))
    }
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}
