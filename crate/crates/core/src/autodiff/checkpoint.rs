//! Parameter snapshots: a flat little-endian `f64` array plus a JSON
//! manifest describing how to split it back into networks.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{MlpParams, MlpSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkEntry {
    pub name: String,
    #[serde(flatten)]
    pub spec: MlpSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub networks: Vec<NetworkEntry>,
    pub seed: u64,
    pub step: u64,
    /// Extra scalar parameters stored after the networks.
    #[serde(default)]
    pub scalars: Vec<String>,
}

pub fn encode(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidArgument(format!(
            "checkpoint length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Writes `path` (binary) and `path` with extension `.json` (manifest).
pub fn save(
    path: &Path,
    networks: &[(&str, &MlpParams)],
    scalars: &[(&str, f64)],
    seed: u64,
    step: u64,
) -> Result<()> {
    let mut flat = Vec::new();
    for (_, p) in networks {
        flat.extend(p.to_flat());
    }
    flat.extend(scalars.iter().map(|(_, v)| *v));
    let manifest = Manifest {
        networks: networks
            .iter()
            .map(|(name, p)| NetworkEntry {
                name: name.to_string(),
                spec: p.spec().clone(),
            })
            .collect(),
        seed,
        step,
        scalars: scalars.iter().map(|(n, _)| n.to_string()).collect(),
    };
    fs::write(path, encode(&flat))?;
    fs::write(
        path.with_extension("json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Reads a checkpoint written by [`save`].
pub fn load(path: &Path) -> Result<(Manifest, Vec<(String, MlpParams)>, Vec<f64>)> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path.with_extension("json"))?)?;
    let flat = decode(&fs::read(path)?)?;
    let expected: usize = manifest
        .networks
        .iter()
        .map(|n| n.spec.num_params())
        .sum::<usize>()
        + manifest.scalars.len();
    if flat.len() != expected {
        return Err(Error::Shape(format!(
            "checkpoint holds {} values, manifest describes {expected}",
            flat.len()
        )));
    }
    let mut pos = 0;
    let mut nets = Vec::new();
    for n in &manifest.networks {
        let len = n.spec.num_params();
        nets.push((n.name.clone(), MlpParams::from_flat(&n.spec, &flat[pos..pos + len])?));
        pos += len;
    }
    let scalars = flat[pos..].to_vec();
    Ok((manifest, nets, scalars))
}
