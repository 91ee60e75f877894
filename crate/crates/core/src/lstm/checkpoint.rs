//! Binary checkpoint container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes   "HFLSTMCK"
//! version    u32       CHECKPOINT_VERSION
//! layers     u32       number of LSTM layers L
//! input_dim  u32
//! hidden     L x u32
//! dropout    f64
//! seed       u64
//! tensors    repeated: u64 length, then length x f64
//! ```
//!
//! Tensors follow [`LstmParams::tensors`] order. Values are stored as raw
//! IEEE-754 bits, so a write/read round trip is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::network::{LstmNetwork, LstmParams};
use super::LstmError;

const MAGIC: &[u8; 8] = b"HFLSTMCK";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(net: &LstmNetwork, mut w: W) -> Result<(), LstmError> {
    let hidden = net.hidden_dims();
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(hidden.len() as u32).to_le_bytes())?;
    w.write_all(&(net.input_dim() as u32).to_le_bytes())?;
    for h in &hidden {
        w.write_all(&(*h as u32).to_le_bytes())?;
    }
    w.write_all(&net.dropout_rate().to_le_bytes())?;
    w.write_all(&net.seed().to_le_bytes())?;
    for t in net.params().tensors() {
        w.write_all(&(t.len() as u64).to_le_bytes())?;
        for v in t {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], LstmError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => LstmError::Checkpoint("truncated file".into()),
        _ => LstmError::Io(e),
    })?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, LstmError> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, LstmError> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<LstmNetwork, LstmError> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(LstmError::Checkpoint(
            "not an LSTM checkpoint (bad magic)".into(),
        ));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(LstmError::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let layers = read_u32(&mut r)? as usize;
    if layers == 0 || layers > 64 {
        return Err(LstmError::Checkpoint(format!(
            "implausible layer count {layers}"
        )));
    }
    let input_dim = read_u32(&mut r)? as usize;
    let hidden: Vec<usize> = (0..layers)
        .map(|_| read_u32(&mut r).map(|v| v as usize))
        .collect::<Result<_, _>>()?;
    let dropout = f64::from_le_bytes(read_array(&mut r)?);
    let seed = read_u64(&mut r)?;

    let mut params = LstmParams::zeros(input_dim, &hidden);
    for (k, t) in params.tensors_mut().into_iter().enumerate() {
        let len = read_u64(&mut r)? as usize;
        if len != t.len() {
            return Err(LstmError::Checkpoint(format!(
                "tensor {k} has {len} values, architecture requires {}",
                t.len()
            )));
        }
        for v in t.iter_mut() {
            *v = f64::from_le_bytes(read_array(&mut r)?);
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(LstmError::Checkpoint(
            "trailing bytes after last tensor".into(),
        ));
    }
    LstmNetwork::from_params(params, dropout, seed)
}

pub fn save_checkpoint(net: &LstmNetwork, path: &Path) -> Result<(), LstmError> {
    write_checkpoint(net, BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint(path: &Path) -> Result<LstmNetwork, LstmError> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = LstmNetwork::new(4, &[5, 3], 0.25, 77).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back.hidden_dims(), vec![5, 3]);
        assert_eq!(back.input_dim(), 4);
        assert_eq!(back.seed(), 77);
        assert_eq!(back.dropout_rate().to_bits(), 0.25f64.to_bits());
        for (a, b) in net.params().tensors().iter().zip(back.params().tensors()) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let net = LstmNetwork::new(2, &[3], 0.0, 1).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            read_checkpoint(&bad_magic[..]),
            Err(LstmError::Checkpoint(_))
        ));

        let mut bad_version = buf.clone();
        bad_version[8] = 9;
        assert!(matches!(
            read_checkpoint(&bad_version[..]),
            Err(LstmError::Checkpoint(_))
        ));

        let truncated = &buf[..buf.len() - 3];
        assert!(matches!(
            read_checkpoint(truncated),
            Err(LstmError::Checkpoint(_))
        ));

        let mut trailing = buf.clone();
        trailing.push(0);
        assert!(matches!(
            read_checkpoint(&trailing[..]),
            Err(LstmError::Checkpoint(_))
        ));
    }
}
