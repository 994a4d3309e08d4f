//! Binary checkpoint format.
//!
//! ```text
//! "SERM1"
//! u32 config_len, config JSON (UTF-8)
//! u32 n_tensors
//! per tensor: u32 name_len, name, u32 rank, rank × u64 dims, f64 data
//! ```
//! All integers and floats are little-endian.

use std::io::{Read, Write};

use super::{NnError, Result, Tensor};

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"SERM1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// JSON text echoing the configuration that produced the tensors.
    pub config: String,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| NnError::Checkpoint(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_checkpoint<W: Write>(mut w: W, ckpt: &Checkpoint) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    put_u32(&mut w, ckpt.config.len())?;
    w.write_all(ckpt.config.as_bytes())?;
    put_u32(&mut w, ckpt.tensors.len())?;
    for (name, t) in &ckpt.tensors {
        put_u32(&mut w, name.len())?;
        w.write_all(name.as_bytes())?;
        put_u32(&mut w, t.shape().len())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn get_string<R: Read>(r: &mut R, len: usize) -> Result<String> {
    let mut b = vec![0u8; len];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|e| NnError::Checkpoint(format!("invalid UTF-8: {e}")))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(NnError::Checkpoint("bad magic, not a SERM1 checkpoint".into()));
    }
    let len = get_u32(&mut r)?;
    let config = get_string(&mut r, len)?;
    let count = get_u32(&mut r)?;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let len = get_u32(&mut r)?;
        let name = get_string(&mut r, len)?;
        let rank = get_u32(&mut r)?;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            shape.push(u64::from_le_bytes(b) as usize);
        }
        let n: usize = shape.iter().product();
        let mut raw = vec![0u8; n * 8];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        tensors.push((name, Tensor::new(shape, data)?));
    }
    Ok(Checkpoint { config, tensors })
}
