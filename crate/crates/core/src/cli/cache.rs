//! On-disk cache of per-angle sector energies, keyed by a SHA-256 of
//! everything the diagonalization depends on. Energies are stored as raw
//! bit patterns so a cache hit reproduces the computed values exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::output::hex_digest;
use crate::couplings::CouplingMatrix;
use crate::eigen::EigenOptions;
use crate::error::Result;
use crate::spectra::{sector_energy_tables, SectorEnergies};

const VERSION: u32 = 1;

fn key(cm: &CouplingMatrix, theta: f64, opts: &EigenOptions) -> String {
    let entries: Vec<String> = cm.entries().iter().map(|x| format!("{:016x}", x.to_bits())).collect();
    let doc = json!({
        "version": VERSION,
        "n": cm.size(),
        "boundary": cm.boundary(),
        "entries": entries,
        "theta": format!("{:016x}", theta.to_bits()),
        "tol": format!("{:016x}", opts.tol.to_bits()),
        "dense_threshold": opts.dense_threshold,
        "max_matvecs": opts.max_matvecs,
        "krylov_dim": opts.krylov_dim,
        "seed": opts.seed,
    });
    hex_digest(doc.to_string().as_bytes())
}

fn path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("sectors-{key}.json"))
}

fn load(dir: &Path, key: &str, n: usize, theta: f64) -> Option<SectorEnergies> {
    let text = fs::read_to_string(path(dir, key)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    let energies = v["energies"]
        .as_array()?
        .iter()
        .map(|b| u64::from_str_radix(b.as_str()?, 16).ok().map(f64::from_bits))
        .collect::<Option<Vec<f64>>>()?;
    (energies.len() == n + 1).then_some(SectorEnergies { n_sites: n, theta, energies })
}

fn store(dir: &Path, key: &str, table: &SectorEnergies) {
    let bits: Vec<String> = table.energies.iter().map(|x| format!("{:016x}", x.to_bits())).collect();
    let doc = json!({ "version": VERSION, "energies": bits });
    // A failed write only costs a recomputation next time.
    if fs::create_dir_all(dir).is_ok() {
        let tmp = dir.join(format!(".{key}.{}", std::process::id()));
        if fs::write(&tmp, doc.to_string()).is_ok() {
            let _ = fs::rename(&tmp, path(dir, key));
        }
    }
}

/// `sector_energy_tables` with lookups in `cache` (when given) for every angle.
pub fn cached_tables(
    cm: &CouplingMatrix,
    thetas: &[f64],
    opts: &EigenOptions,
    cache: Option<&Path>,
) -> Result<Vec<SectorEnergies>> {
    let Some(dir) = cache else {
        return sector_energy_tables(cm, thetas, opts);
    };
    let keys: Vec<String> = thetas.iter().map(|&t| key(cm, t, opts)).collect();
    let mut tables: Vec<Option<SectorEnergies>> =
        thetas.iter().zip(&keys).map(|(&t, k)| load(dir, k, cm.size(), t)).collect();
    let missing: Vec<usize> = (0..thetas.len()).filter(|&i| tables[i].is_none()).collect();
    if !missing.is_empty() {
        let todo: Vec<f64> = missing.iter().map(|&i| thetas[i]).collect();
        for (i, table) in missing.into_iter().zip(sector_energy_tables(cm, &todo, opts)?) {
            store(dir, &keys[i], &table);
            tables[i] = Some(table);
        }
    }
    Ok(tables.into_iter().map(|t| t.expect("filled")).collect())
}
