//! Model files: a versioned binary container.
//!
//! Layout, all integers little-endian u32 unless noted:
//!
//! ```text
//! magic  b"SNMF"
//! version (=1), n, m, sine_cap, flags (bit0 sine_enabled, bit1 has_generic)
//! rule count, then one u8 code per rule (0 res, 1 fac, 2 sr)
//! m axiom names, each u32 byte length + utf8 bytes
//! tensors as f64 little-endian, row-major, in declared order:
//!   init embeddings (m+2)*n
//!   sine embedder w n*(n+1), b n
//!   per rule: block w, b
//!   per distinct arity ascending: generic w, b
//!   eval hidden w n*n, b n
//!   eval output w n, b 1
//! ```
//!
//! Round trips are bit-exact: save, load, save produces identical
//! bytes.

use std::io::{self, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::saturation::RuleId;

use super::{ModelConfig, ModelError, ModelParams};

const MAGIC: [u8; 4] = *b"SNMF";
const VERSION: u32 = 1;

fn rule_code(rule: RuleId) -> u8 {
    match rule {
        RuleId::Resolution => 0,
        RuleId::Factoring => 1,
        RuleId::SubsumptionResolution => 2,
    }
}

fn rule_from_code(code: u8) -> Option<RuleId> {
    match code {
        0 => Some(RuleId::Resolution),
        1 => Some(RuleId::Factoring),
        2 => Some(RuleId::SubsumptionResolution),
        _ => None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn save_model(
    params: &ModelParams,
    config: &ModelConfig,
    path: impl AsRef<Path>,
) -> Result<(), ModelIoError> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    let u32s = |v: u32, out: &mut Vec<u8>| out.extend_from_slice(&v.to_le_bytes());
    u32s(VERSION, &mut out);
    u32s(config.n as u32, &mut out);
    u32s(config.m() as u32, &mut out);
    u32s(config.sine_cap, &mut out);
    let flags = u32::from(config.sine_enabled) | (u32::from(config.has_generic) << 1);
    u32s(flags, &mut out);
    u32s(config.rules.len() as u32, &mut out);
    for &rule in &config.rules {
        out.push(rule_code(rule));
    }
    for name in &config.revealed_axioms {
        u32s(name.len() as u32, &mut out);
        out.extend_from_slice(name.as_bytes());
    }
    let floats = |values: &mut dyn Iterator<Item = &f64>, out: &mut Vec<u8>| {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    floats(&mut params.init_embeddings.iter(), &mut out);
    floats(&mut params.sine.w.iter(), &mut out);
    floats(&mut params.sine.b.iter(), &mut out);
    for block in &params.rule_blocks {
        floats(&mut block.w.iter(), &mut out);
        floats(&mut block.b.iter(), &mut out);
    }
    for block in &params.generic_blocks {
        floats(&mut block.w.iter(), &mut out);
        floats(&mut block.b.iter(), &mut out);
    }
    floats(&mut params.eval_hidden.w.iter(), &mut out);
    floats(&mut params.eval_hidden.b.iter(), &mut out);
    floats(&mut params.eval_out_w.iter(), &mut out);
    floats(&mut std::iter::once(&params.eval_out_b), &mut out);

    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u32(&mut self) -> Result<u32, ModelIoError> {
        let mut buf = [0u8; 4];
        self.inner.read_exact(&mut buf).map_err(truncated)?;
        Ok(u32::from_le_bytes(buf))
    }

    fn u8(&mut self) -> Result<u8, ModelIoError> {
        let mut buf = [0u8; 1];
        self.inner.read_exact(&mut buf).map_err(truncated)?;
        Ok(buf[0])
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>, ModelIoError> {
        let mut bytes = vec![0u8; count * 8];
        self.inner.read_exact(&mut bytes).map_err(truncated)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn string(&mut self, len: usize) -> Result<String, ModelIoError> {
        let mut bytes = vec![0u8; len];
        self.inner.read_exact(&mut bytes).map_err(truncated)?;
        String::from_utf8(bytes)
            .map_err(|_| ModelError::Format("axiom name is not valid utf-8".into()).into())
    }
}

fn truncated(e: io::Error) -> ModelIoError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        ModelError::Format("file truncated".into()).into()
    } else {
        ModelIoError::Io(e)
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(ModelParams, ModelConfig), ModelIoError> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader {
        inner: io::BufReader::new(file),
    };
    let mut magic = [0u8; 4];
    r.inner.read_exact(&mut magic).map_err(truncated)?;
    if magic != MAGIC {
        return Err(ModelError::Format("bad magic".into()).into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelError::Version(version).into());
    }
    let n = r.u32()? as usize;
    let m = r.u32()? as usize;
    let sine_cap = r.u32()?;
    let flags = r.u32()?;
    let rule_count = r.u32()? as usize;
    let mut rules = Vec::with_capacity(rule_count);
    for _ in 0..rule_count {
        let code = r.u8()?;
        rules.push(
            rule_from_code(code)
                .ok_or_else(|| ModelError::Format(format!("unknown rule code {code}")))?,
        );
    }
    let mut revealed_axioms = Vec::with_capacity(m);
    for _ in 0..m {
        let len = r.u32()? as usize;
        revealed_axioms.push(r.string(len)?);
    }
    let config = ModelConfig {
        n,
        revealed_axioms,
        rules,
        sine_cap,
        sine_enabled: flags & 1 != 0,
        has_generic: flags & 2 != 0,
    };

    let array2 = |r: &mut Reader<_>, rows: usize, cols: usize| -> Result<Array2<f64>, ModelIoError> {
        let data = r.f64s(rows * cols)?;
        Array2::from_shape_vec((rows, cols), data)
            .map_err(|e| ModelError::Format(e.to_string()).into())
    };
    let array1 = |r: &mut Reader<_>, len: usize| -> Result<Array1<f64>, ModelIoError> {
        Ok(Array1::from_vec(r.f64s(len)?))
    };

    let mut params = ModelParams::zeros(&config);
    params.init_embeddings = array2(&mut r, m + 2, n)?;
    params.sine.w = array2(&mut r, n, n + 1)?;
    params.sine.b = array1(&mut r, n)?;
    for i in 0..config.rules.len() {
        let cols = params.rule_blocks[i].w.ncols();
        params.rule_blocks[i].w = array2(&mut r, n, cols)?;
        params.rule_blocks[i].b = array1(&mut r, n)?;
    }
    for i in 0..params.generic_blocks.len() {
        let cols = params.generic_blocks[i].w.ncols();
        params.generic_blocks[i].w = array2(&mut r, n, cols)?;
        params.generic_blocks[i].b = array1(&mut r, n)?;
    }
    params.eval_hidden.w = array2(&mut r, n, n)?;
    params.eval_hidden.b = array1(&mut r, n)?;
    params.eval_out_w = array1(&mut r, n)?;
    params.eval_out_b = r.f64s(1)?[0];

    let mut rest = Vec::new();
    r.inner.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(ModelError::Format(format!("{} trailing bytes", rest.len())).into());
    }
    Ok((params, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (ModelParams, ModelConfig) {
        let mut config = ModelConfig::new(6, vec!["alpha".into(), "beta".into()]);
        config.sine_cap = 12;
        config.has_generic = true;
        let params = ModelParams::init(&config, 99);
        (params, config)
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let (params, config) = sample();
        let p1 = dir.path().join("a.model");
        let p2 = dir.path().join("b.model");
        save_model(&params, &config, &p1).unwrap();
        let (loaded_params, loaded_config) = load_model(&p1).unwrap();
        assert_eq!(loaded_config, config);
        assert_eq!(loaded_params, params);
        save_model(&loaded_params, &loaded_config, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn truncated_file_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let (params, config) = sample();
        let path = dir.path().join("t.model");
        save_model(&params, &config, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"));
    }

    #[test]
    fn version_and_magic_mismatches_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (params, config) = sample();
        let path = dir.path().join("v.model");
        save_model(&params, &config, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9; // version
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_model(&path).unwrap_err(),
            ModelIoError::Model(ModelError::Version(9))
        ));
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_model(&path).is_err());
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (params, config) = sample();
        let path = dir.path().join("x.model");
        save_model(&params, &config, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_model(&path).is_err());
    }
}
