//! Reference-field persistence: a small binary format for bit-exact reload.
//!
//! Layout: magic `LLGF`, version (u32 LE), node count (u64 LE), then three
//! little-endian f64 per node in node order. A JSON sidecar carries the run
//! provenance and the mesh lineage hash; a reference is only usable on the
//! exact mesh it was computed for.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::VectorField;
use crate::mesh::TriMesh;

const MAGIC: &[u8; 4] = b"LLGF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSidecar {
    pub problem: String,
    pub alpha: f64,
    pub lambda_sq: f64,
    pub t_end: f64,
    pub num_steps: usize,
    pub mesh_family: String,
    pub mesh_level: usize,
    pub extra_bisections: u32,
    pub lineage_hash: String,
}

pub fn write_reference(
    data_path: &Path,
    sidecar_path: &Path,
    field: &VectorField<f64>,
    meta: &ReferenceSidecar,
) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(data_path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.len() as u64).to_le_bytes())?;
    for v in field.vals() {
        for c in v {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    w.flush()?;

    let json = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::Config(format!("sidecar serialization failed: {e}")))?;
    std::fs::write(sidecar_path, json + "\n")?;
    Ok(())
}

pub fn read_reference(
    data_path: &Path,
    sidecar_path: &Path,
    mesh: &Arc<TriMesh<f64>>,
) -> Result<(VectorField<f64>, ReferenceSidecar), Error> {
    let text = std::fs::read_to_string(sidecar_path)?;
    let meta: ReferenceSidecar = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("bad sidecar {}: {e}", sidecar_path.display())))?;
    let mesh_hash = mesh.lineage_hash();
    if meta.lineage_hash != mesh_hash {
        return Err(Error::Config(format!(
            "reference mesh lineage {} does not match the target mesh {}",
            meta.lineage_hash, mesh_hash
        )));
    }

    let mut r = BufReader::new(File::open(data_path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config(format!(
            "{} is not a reference field file",
            data_path.display()
        )));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let version = u32::from_le_bytes(buf4);
    if version != VERSION {
        return Err(Error::Config(format!(
            "unsupported reference format version {version}"
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let count = u64::from_le_bytes(buf8) as usize;
    if count != mesh.num_vertices() {
        return Err(Error::Config(format!(
            "reference holds {count} nodes but the mesh has {}",
            mesh.num_vertices()
        )));
    }
    let mut vals = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = [0.0f64; 3];
        for c in &mut v {
            r.read_exact(&mut buf8)?;
            *c = f64::from_le_bytes(buf8);
        }
        vals.push(v);
    }
    // Trailing bytes mean a corrupt or truncated-then-padded file.
    if r.read(&mut buf8)? != 0 {
        return Err(Error::Config(format!(
            "{} has trailing bytes after the node data",
            data_path.display()
        )));
    }
    Ok((VectorField::new(Arc::clone(mesh), vals), meta))
}
