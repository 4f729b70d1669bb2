//! Content-addressed per-shape cache: normalized geometry, `(L, M)`, the
//! eigenbasis and HKS, each checksummed in a small metadata file.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::io::cache::{decode_basis, decode_laplacian, decode_matrix, encode_basis, encode_laplacian, encode_matrix};
use crate::io::{format_shape, parse_shape, ShapeFormat};
use crate::laplacian::{LaplacianKind, MassDiagonal, SparseSymmetric};
use crate::shape::{normalize_unit_ball, Shape};
use crate::spectral::{decompose, hks, Descriptor, DescriptorKind, SpectralBasis};

const CACHE_FORMAT: u32 = 1;
const META: &str = "meta.txt";
const PAYLOADS: [&str; 4] = ["geometry", "laplacian.bin", "basis.bin", "hks.bin"];

/// Everything precomputed for one shape.
#[derive(Debug, Clone)]
pub struct ShapeEntry {
    pub name: String,
    pub shape: Shape,
    pub stiffness: SparseSymmetric,
    pub mass: MassDiagonal,
    pub basis: SpectralBasis,
    pub hks: Descriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    Computed,
    UpToDate,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Finds `<root>/shapes/<name>.{off,ply,xyz}`.
pub fn shape_path(cfg: &PipelineConfig, name: &str) -> Result<(PathBuf, ShapeFormat)> {
    let dir = cfg.dataset_root.join("shapes");
    for ext in ["off", "ply", "xyz"] {
        let p = dir.join(format!("{name}.{ext}"));
        if p.is_file() {
            let fmt = ShapeFormat::from_path(&p)?;
            return Ok((p, fmt));
        }
    }
    Err(Error::io(
        dir.join(name),
        std::io::Error::new(std::io::ErrorKind::NotFound, "no .off, .ply or .xyz file"),
    ))
}

/// Shape names under `<root>/shapes`, sorted.
pub fn list_shapes(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let dir = cfg.dataset_root.join("shapes");
    let mut names = Vec::new();
    for e in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let p = e.map_err(|e| Error::io(&dir, e))?.path();
        if ShapeFormat::from_path(&p).is_ok() {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    names.dedup();
    Ok(names)
}

fn laplacian_kind(cfg: &PipelineConfig, format: ShapeFormat, bytes: &[u8], name: &str) -> Result<LaplacianKind> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(0, "file is not UTF-8 text"))?;
    let shape = parse_shape(text, format, name)?;
    Ok(LaplacianKind::for_shape(&shape, cfg.cloud))
}

/// Hash of the file contents and every parameter the cached data depends on.
pub fn cache_key(cfg: &PipelineConfig, bytes: &[u8], kind: LaplacianKind) -> String {
    let mut h = Sha256::new();
    h.update(CACHE_FORMAT.to_le_bytes());
    h.update(Sha256::digest(bytes));
    let params = format!(
        "k={};normalize={};laplacian={};hks={}",
        cfg.k,
        cfg.normalize,
        kind.describe(),
        cfg.hks.describe()
    );
    h.update(params.as_bytes());
    hex::encode(h.finalize())
}

pub fn entry_dir(cfg: &PipelineConfig, name: &str, key: &str) -> PathBuf {
    cfg.cache_dir.join(format!("{name}-{}", &key[..16]))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn parse_meta(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Loads and verifies a cache entry. Any checksum or key mismatch is an
/// error, so a damaged entry is never used.
pub fn load_entry(dir: &Path, name: &str, key: &str) -> Result<ShapeEntry> {
    let meta = parse_meta(&String::from_utf8_lossy(&read(&dir.join(META))?));
    let get = |k: &str| meta.iter().find(|(a, _)| a == k).map(|(_, b)| b.as_str());
    if get("key") != Some(key) {
        return Err(Error::CacheHeader(format!("{}: key mismatch", dir.display())));
    }
    let mut files = Vec::new();
    for p in PAYLOADS {
        let bytes = read(&dir.join(p))?;
        if get(p) != Some(sha256_hex(&bytes).as_str()) {
            return Err(Error::CacheHeader(format!("{}: checksum mismatch for {p}", dir.display())));
        }
        files.push(bytes);
    }
    let format = match get("geometry_format") {
        Some("off") => ShapeFormat::Off,
        Some("xyz") => ShapeFormat::Xyz,
        other => return Err(Error::CacheHeader(format!("unknown geometry format {other:?}"))),
    };
    let text = std::str::from_utf8(&files[0]).map_err(|_| Error::CacheHeader("geometry is not text".into()))?;
    let shape = parse_shape(text, format, name)?;
    let (stiffness, mass) = decode_laplacian(&files[1])?;
    let basis = decode_basis(&files[2], Some(shape.n_vertices()))?;
    let hks_values = decode_matrix(&files[3])?;
    if stiffness.n() != shape.n_vertices() || hks_values.nrows() != shape.n_vertices() {
        return Err(Error::CacheHeader(format!("{}: inconsistent sizes", dir.display())));
    }
    Ok(ShapeEntry {
        name: name.to_string(),
        shape,
        stiffness,
        mass,
        basis,
        hks: Descriptor::new(hks_values, DescriptorKind::Hks),
    })
}

fn compute_entry(cfg: &PipelineConfig, name: &str, format: ShapeFormat, bytes: &[u8]) -> Result<ShapeEntry> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(0, "file is not UTF-8 text"))?;
    let mut shape = parse_shape(text, format, name)?;
    if cfg.normalize {
        shape = normalize_unit_ball(&shape)?;
    }
    if shape.n_vertices() <= cfg.k {
        return Err(Error::InvalidArgument(format!(
            "{name}: k = {} needs more than {} vertices",
            cfg.k,
            shape.n_vertices()
        )));
    }
    let dec = decompose(&shape, cfg.k, cfg.cloud)?;
    let hks = hks(&dec.basis, &cfg.hks)?;
    Ok(ShapeEntry {
        name: name.to_string(),
        shape,
        stiffness: dec.stiffness,
        mass: dec.mass,
        basis: dec.basis,
        hks,
    })
}

fn write_entry(dir: &Path, key: &str, source: &Path, entry: &ShapeEntry) -> Result<()> {
    let geometry_format = if entry.shape.is_mesh() { ShapeFormat::Off } else { ShapeFormat::Xyz };
    let payloads: [Vec<u8>; 4] = [
        format_shape(&entry.shape, geometry_format)?.into_bytes(),
        encode_laplacian(&entry.stiffness, &entry.mass),
        encode_basis(&entry.basis),
        encode_matrix(&entry.hks.values),
    ];
    let mut meta = format!(
        "key = {key}\nsource = {}\ngeometry_format = {}\n",
        source.display(),
        geometry_format.extension()
    );
    for (p, bytes) in PAYLOADS.iter().zip(&payloads) {
        meta.push_str(&format!("{p} = {}\n", sha256_hex(bytes)));
    }
    let mut files: Vec<(&str, &[u8])> = PAYLOADS.iter().copied().zip(payloads.iter().map(|b| b.as_slice())).collect();
    files.push((META, meta.as_bytes()));
    write_dir_atomic(dir, &files)
}

/// Writes all files into a temporary sibling directory, then renames it
/// into place.
pub(crate) fn write_dir_atomic(dir: &Path, files: &[(&str, &[u8])]) -> Result<()> {
    let parent = dir.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let leaf = dir.file_name().and_then(|s| s.to_str()).unwrap_or("entry");
    let tmp = parent.join(format!(".tmp-{leaf}-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    for (name, bytes) in files {
        let p = tmp.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))
}

/// Writes one file via a temporary sibling and a rename.
pub(crate) fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let leaf = path.file_name().and_then(|s| s.to_str()).unwrap_or("file");
    let tmp = path.with_file_name(format!(".tmp-{leaf}-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Returns the cached entry for `name`, computing and storing it first if
/// it is missing or fails verification.
pub fn ensure_entry(cfg: &PipelineConfig, name: &str) -> Result<(ShapeEntry, EntryStatus)> {
    let (path, format) = shape_path(cfg, name)?;
    let bytes = read(&path)?;
    let kind = laplacian_kind(cfg, format, &bytes, name)?;
    let key = cache_key(cfg, &bytes, kind);
    let dir = entry_dir(cfg, name, &key);
    if dir.join(META).is_file() {
        match load_entry(&dir, name, &key) {
            Ok(entry) => return Ok((entry, EntryStatus::UpToDate)),
            Err(e) => log::warn!("discarding cache entry {}: {e}", dir.display()),
        }
    }
    let entry = compute_entry(cfg, name, format, &bytes)?;
    write_entry(&dir, &key, &path, &entry)?;
    Ok((entry, EntryStatus::Computed))
}
