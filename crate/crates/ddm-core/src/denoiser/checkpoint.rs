//! Binary checkpoint format.
//!
//! Layout: magic `DDM1`, version u32, length-prefixed JSON header, then per
//! matrix: name length u32 + UTF-8 bytes, rows u64, cols u64, little-endian
//! f64 values. Representation files reuse the same container with a
//! different header payload.

use crate::denoiser::net::DenoiserConfig;
use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, ParamStore};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"DDM1";
const VERSION: u32 = 1;

/// Writes a container: header JSON plus named matrices.
pub fn write_store(path: &Path, header_json: &str, matrices: &[(String, &DenseMatrix)]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    let hb = header_json.as_bytes();
    w.write_all(&(hb.len() as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(hb).map_err(io_err)?;
    w.write_all(&(matrices.len() as u32).to_le_bytes()).map_err(io_err)?;
    for (name, m) in matrices {
        let nb = name.as_bytes();
        w.write_all(&(nb.len() as u32).to_le_bytes()).map_err(io_err)?;
        w.write_all(nb).map_err(io_err)?;
        w.write_all(&(m.rows() as u64).to_le_bytes()).map_err(io_err)?;
        w.write_all(&(m.cols() as u64).to_le_bytes()).map_err(io_err)?;
        for v in m.values() {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a container back; truncated or corrupt files surface as
/// checkpoint errors, never panics.
pub fn read_store(path: &Path) -> Result<(String, Vec<(String, DenseMatrix)>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut r = std::io::BufReader::new(file);
    let trunc = || Error::Checkpoint(format!("{}: truncated or corrupt file", path.display()));

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| trunc())?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{}: bad magic bytes, not a DDM file",
            path.display()
        )));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf).map_err(|_| trunc())?;
    let version = u32::from_le_bytes(u32buf);
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: unsupported version {version}, expected {VERSION}",
            path.display()
        )));
    }
    r.read_exact(&mut u32buf).map_err(|_| trunc())?;
    let hlen = u32::from_le_bytes(u32buf) as usize;
    let mut hbytes = vec![0u8; hlen];
    r.read_exact(&mut hbytes).map_err(|_| trunc())?;
    let header = String::from_utf8(hbytes)
        .map_err(|_| Error::Checkpoint(format!("{}: header is not UTF-8", path.display())))?;

    r.read_exact(&mut u32buf).map_err(|_| trunc())?;
    let count = u32::from_le_bytes(u32buf) as usize;
    let mut matrices = Vec::with_capacity(count);
    let mut u64buf = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut u32buf).map_err(|_| trunc())?;
        let nlen = u32::from_le_bytes(u32buf) as usize;
        let mut nbytes = vec![0u8; nlen];
        r.read_exact(&mut nbytes).map_err(|_| trunc())?;
        let name = String::from_utf8(nbytes)
            .map_err(|_| Error::Checkpoint(format!("{}: matrix name not UTF-8", path.display())))?;
        r.read_exact(&mut u64buf).map_err(|_| trunc())?;
        let rows = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf).map_err(|_| trunc())?;
        let cols = u64::from_le_bytes(u64buf) as usize;
        if rows.saturating_mul(cols) > 1 << 32 {
            return Err(Error::Checkpoint(format!(
                "{}: implausible matrix size {rows}x{cols}",
                path.display()
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            r.read_exact(&mut u64buf).map_err(|_| trunc())?;
            data.push(f64::from_le_bytes(u64buf));
        }
        let m = DenseMatrix::from_vec(rows, cols, data)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        matrices.push((name, m));
    }
    Ok((header, matrices))
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    kind: String,
    config: DenoiserConfig,
}

fn expected_shapes(cfg: &DenoiserConfig) -> Vec<(&'static str, (usize, usize))> {
    let (d, h, te) = (cfg.input_dim, cfg.hidden_dim, cfg.time_embed_dim);
    vec![
        ("enc1.w", (d, h)),
        ("enc2.w", (h, h)),
        ("dec1.w", (h, h)),
        ("dec2.w", (h, h)),
        ("time1.w", (te, d)),
        ("time2.w", (te, h)),
        ("mlp.w1", (h, h)),
        ("mlp.b1", (1, h)),
        ("mlp.w2", (h, d)),
        ("mlp.b2", (1, d)),
    ]
}

pub fn save_checkpoint(params: &ParamStore, cfg: &DenoiserConfig, path: &Path) -> Result<()> {
    let header = serde_json::to_string(&CheckpointHeader {
        kind: "checkpoint".into(),
        config: cfg.clone(),
    })
    .expect("config serializes");
    let matrices: Vec<(String, &DenseMatrix)> = params
        .iter()
        .map(|(name, slot)| (name.to_string(), &slot.value))
        .collect();
    write_store(path, &header, &matrices)
}

pub fn load_checkpoint(path: &Path) -> Result<(ParamStore, DenoiserConfig)> {
    let (header, matrices) = read_store(path)?;
    let header: CheckpointHeader = serde_json::from_str(&header)
        .map_err(|e| Error::Checkpoint(format!("{}: bad header: {e}", path.display())))?;
    if header.kind != "checkpoint" {
        return Err(Error::Checkpoint(format!(
            "{}: expected a checkpoint file, found kind {:?}",
            path.display(),
            header.kind
        )));
    }
    let cfg = header.config;
    let mut params = ParamStore::new();
    for (name, m) in matrices {
        params.insert(name, m);
    }
    for (name, shape) in expected_shapes(&cfg) {
        let slot = params
            .get(name)
            .map_err(|_| Error::Checkpoint(format!("{}: missing slot {name}", path.display())))?;
        if slot.value.shape() != shape {
            return Err(Error::Checkpoint(format!(
                "{}: slot {name} expected {}x{}, got {}x{}",
                path.display(),
                shape.0,
                shape.1,
                slot.value.rows(),
                slot.value.cols()
            )));
        }
    }
    Ok((params, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoiser::net::init_params;
    use crate::numeric::RngStream;

    fn cfg() -> DenoiserConfig {
        DenoiserConfig {
            hidden_dim: 5,
            time_embed_dim: 4,
            ..DenoiserConfig::with_input_dim(3)
        }
    }

    #[test]
    fn roundtrip_bit_exact() {
        let cfg = cfg();
        let params = init_params(&cfg, &mut RngStream::new(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ddm");
        save_checkpoint(&params, &cfg, &path).unwrap();
        let (loaded, lcfg) = load_checkpoint(&path).unwrap();
        assert_eq!(lcfg.hidden_dim, cfg.hidden_dim);
        for (name, slot) in params.iter() {
            assert_eq!(slot.value, loaded.get(name).unwrap().value, "{name}");
        }
    }

    #[test]
    fn truncated_file_is_checkpoint_error() {
        let cfg = cfg();
        let params = init_params(&cfg, &mut RngStream::new(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ddm");
        save_checkpoint(&params, &cfg, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match load_checkpoint(&path) {
            Err(Error::Checkpoint(_)) => {}
            other => panic!("expected checkpoint error, got {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_names_expected_and_actual() {
        let cfg = cfg();
        let params = init_params(&cfg, &mut RngStream::new(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ddm");
        // claim a different input_dim in the stored config
        let lying_cfg = DenoiserConfig {
            input_dim: 7,
            ..cfg
        };
        save_checkpoint(&params, &lying_cfg, &path).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected"), "{msg}");
        assert!(msg.contains("enc1.w"), "{msg}");
    }
}
