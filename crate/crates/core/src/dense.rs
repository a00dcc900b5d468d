//! Dense array files: a self-describing text header followed by a raw
//! little-endian `f64` payload.
//!
//! ```text
//! pcmlax-dense 1
//! dtype f64
//! shape 32 32 3
//! order site-major i0 i1 component
//! algebra su2
//! method closed
//! convention hodge (*w)_a = w^b eps_ba; top-form dx0^dx1 eps01=1
//! end_header
//! <payload>
//! ```
//!
//! Complex arrays (`dtype c64`) store interleaved `(re, im)` pairs, so the
//! payload holds `2 * prod(shape)` values.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "pcmlax-dense 1";
const END: &str = "end_header";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F64,
    C64,
}

impl DType {
    fn tag(self) -> &'static str {
        match self {
            DType::F64 => "f64",
            DType::C64 => "c64",
        }
    }

    fn width(self) -> usize {
        match self {
            DType::F64 => 1,
            DType::C64 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseArray {
    pub dtype: DType,
    pub shape: Vec<usize>,
    /// Storage order description, outermost index first.
    pub order: String,
    /// Additional header entries (algebra, method, conventions, ...).
    /// Keys are single words; values run to the end of the line.
    pub meta: BTreeMap<String, String>,
    pub data: Vec<f64>,
}

impl DenseArray {
    pub fn new(dtype: DType, shape: Vec<usize>, order: impl Into<String>, data: Vec<f64>) -> Result<Self> {
        let expected = shape.iter().product::<usize>() * dtype.width();
        if data.len() != expected {
            return Err(Error::Dense(format!(
                "payload has {} values, shape {:?} ({}) needs {}",
                data.len(),
                shape,
                dtype.tag(),
                expected
            )));
        }
        Ok(Self {
            dtype,
            shape,
            order: order.into(),
            meta: BTreeMap::new(),
            data,
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let mut header = format!("{MAGIC}\ndtype {}\nshape", self.dtype.tag());
        for s in &self.shape {
            header.push_str(&format!(" {s}"));
        }
        header.push_str(&format!("\norder {}\n", self.order));
        for (k, v) in &self.meta {
            if k.contains(char::is_whitespace) || k.is_empty() || v.contains('\n') {
                return Err(Error::Dense(format!("invalid header entry `{k}`")));
            }
            header.push_str(&format!("{k} {v}\n"));
        }
        header.push_str(END);
        header.push('\n');
        w.write_all(header.as_bytes())?;
        let mut payload = Vec::with_capacity(self.data.len() * 8);
        for x in &self.data {
            payload.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&payload)?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut r = std::io::BufReader::new(r);
        let mut line = String::new();
        let mut next_line = |r: &mut std::io::BufReader<_>| -> Result<String> {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Dense("truncated header".into()));
            }
            Ok(line.trim_end_matches('\n').to_string())
        };
        if next_line(&mut r)? != MAGIC {
            return Err(Error::Dense("missing magic line".into()));
        }
        let mut dtype = None;
        let mut shape = None;
        let mut order = None;
        let mut meta = BTreeMap::new();
        loop {
            let l = next_line(&mut r)?;
            if l == END {
                break;
            }
            let (key, value) = l.split_once(' ').unwrap_or((l.as_str(), ""));
            match key {
                "dtype" => {
                    dtype = Some(match value {
                        "f64" => DType::F64,
                        "c64" => DType::C64,
                        other => return Err(Error::Dense(format!("unknown dtype `{other}`"))),
                    })
                }
                "shape" => {
                    let dims = value
                        .split_whitespace()
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Dense(format!("bad shape: {e}")))?;
                    shape = Some(dims);
                }
                "order" => order = Some(value.to_string()),
                _ => {
                    meta.insert(key.to_string(), value.to_string());
                }
            }
        }
        let dtype = dtype.ok_or_else(|| Error::Dense("header lacks dtype".into()))?;
        let shape = shape.ok_or_else(|| Error::Dense("header lacks shape".into()))?;
        let order = order.ok_or_else(|| Error::Dense("header lacks order".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Dense("payload length is not a multiple of 8".into()));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let mut out = Self::new(dtype, shape, order, data)?;
        out.meta = meta;
        Ok(out)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}
