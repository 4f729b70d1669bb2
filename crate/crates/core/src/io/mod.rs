//! Readers and writers for shapes, correspondences and cached spectral data.

pub mod cache;
pub mod correspondence;
mod off;
mod ply;
mod xyz;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::shape::Shape;

pub use cache::{read_basis, read_matrix, write_basis, write_matrix};
pub use correspondence::{
    format_correspondence, load_correspondence, parse_correspondence, save_correspondence, CorrespondenceMap,
    Indexing,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeFormat {
    Off,
    Ply,
    Xyz,
}

impl ShapeFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("off") => Ok(Self::Off),
            Some("ply") => Ok(Self::Ply),
            Some("xyz") | Some("txt") | Some("pts") => Ok(Self::Xyz),
            _ => Err(Error::Unsupported(format!(
                "cannot infer shape format from {}",
                path.display()
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Off => "off",
            Self::Ply => "ply",
            Self::Xyz => "xyz",
        }
    }
}

pub fn parse_shape(text: &str, format: ShapeFormat, name: &str) -> Result<Shape> {
    if text.trim().is_empty() {
        return Err(Error::Empty(format!("shape '{name}' file is empty")));
    }
    match format {
        ShapeFormat::Off => off::parse(text, name),
        ShapeFormat::Ply => ply::parse(text, name),
        ShapeFormat::Xyz => xyz::parse(text, name),
    }
}

pub fn format_shape(shape: &Shape, format: ShapeFormat) -> Result<String> {
    match format {
        ShapeFormat::Off => off::format(shape),
        ShapeFormat::Ply => Ok(ply::format(shape)),
        ShapeFormat::Xyz => Ok(xyz::format(shape)),
    }
}

/// Loads a shape; the shape name is the file stem.
pub fn load_shape(path: impl AsRef<Path>, format: ShapeFormat) -> Result<Shape> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("shape")
        .to_string();
    parse_shape(&text, format, &name)
}

pub fn save_shape(shape: &Shape, path: impl AsRef<Path>, format: ShapeFormat) -> Result<()> {
    let path = path.as_ref();
    let text = format_shape(shape, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Iterates over non-blank, non-comment lines as `(1-based line number, trimmed text)`.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub(crate) fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub(crate) fn parse_index(tok: &str, line: usize, bound: usize) -> Result<usize> {
    let v: i64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid index '{tok}'")))?;
    if v < 0 || v as u64 >= bound as u64 {
        return Err(Error::IndexOutOfRange {
            line,
            index: v,
            bound,
        });
    }
    Ok(v as usize)
}

/// Splits a polygon into a triangle fan.
pub(crate) fn fan(poly: &[usize]) -> impl Iterator<Item = [usize; 3]> + '_ {
    (1..poly.len().saturating_sub(1)).map(move |i| [poly[0], poly[i], poly[i + 1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_off() {
        let s = parse_shape("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2", ShapeFormat::Off, "t").unwrap();
        assert_eq!((s.n_vertices(), s.n_faces()), (3, 1));
    }

    #[test]
    fn off_index_out_of_range() {
        let err = parse_shape("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5", ShapeFormat::Off, "t")
            .unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { line: 6, index: 5, bound: 3 }), "{err}");
    }

    #[test]
    fn xyz_is_point_cloud() {
        let text: String = (0..100).map(|i| format!("{i} {} 0.5\n", i * 2)).collect();
        let s = parse_shape(&text, ShapeFormat::Xyz, "pc").unwrap();
        assert_eq!(s.n_vertices(), 100);
        assert!(s.faces().is_none());
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(parse_shape(" \n", ShapeFormat::Off, "e"), Err(Error::Empty(_))));
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse_shape("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2", ShapeFormat::Off, "t")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn ply_ascii_reads_faces() {
        let text = "ply\nformat ascii 1.0\ncomment x\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0 255\n1 0 0 0\n1 1 0 0\n0 1 0 0\n4 0 1 2 3\n";
        let s = parse_shape(text, ShapeFormat::Ply, "q").unwrap();
        assert_eq!((s.n_vertices(), s.n_faces()), (4, 2));
    }

    #[test]
    fn ply_binary_unsupported() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse_shape(text, ShapeFormat::Ply, "b"), Err(Error::Unsupported(_))));
    }

    fn arb_mesh() -> impl Strategy<Value = Shape> {
        (4usize..20).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::array::uniform3(-1e3f64..1e3), n),
                proptest::collection::vec(proptest::array::uniform3(0..n), 1..30),
            )
                .prop_filter_map("needs a valid face", |(v, f)| Shape::mesh("m", v, f).ok())
        })
    }

    proptest! {
        #[test]
        fn save_load_identity(shape in arb_mesh(), fmt in prop_oneof![Just(ShapeFormat::Off), Just(ShapeFormat::Ply)]) {
            let text = format_shape(&shape, fmt).unwrap();
            let back = parse_shape(&text, fmt, "m").unwrap();
            prop_assert_eq!(back.vertices(), shape.vertices());
            prop_assert_eq!(back.faces(), shape.faces());
        }

        #[test]
        fn xyz_roundtrip(pts in proptest::collection::vec(proptest::array::uniform3(-1e6f64..1e6), 1..40)) {
            let shape = Shape::point_cloud("p", pts).unwrap();
            let back = parse_shape(&format_shape(&shape, ShapeFormat::Xyz).unwrap(), ShapeFormat::Xyz, "p").unwrap();
            prop_assert_eq!(back.vertices(), shape.vertices());
        }
    }
}
