use std::fmt::Write;

use super::{content_lines, fan, parse_f64, parse_index};
use crate::error::{Error, Result};
use crate::shape::Shape;

pub(super) fn parse(text: &str, name: &str) -> Result<Shape> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| Error::Empty(name.to_string()))?;
    let mut header_toks = header.split_whitespace();
    if header_toks.next() != Some("OFF") {
        return Err(Error::parse(hl, "expected 'OFF' header"));
    }
    // Counts may follow the keyword on the same line.
    let rest: Vec<&str> = header_toks.collect();
    let (cl, counts): (usize, Vec<&str>) = if rest.is_empty() {
        let (l, c) = lines
            .next()
            .ok_or_else(|| Error::parse(hl, "missing counts line"))?;
        (l, c.split_whitespace().collect())
    } else {
        (hl, rest)
    };
    if counts.len() < 2 {
        return Err(Error::parse(cl, "expected vertex and face counts"));
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| Error::parse(cl, "invalid vertex count"))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| Error::parse(cl, "invalid face count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .ok_or_else(|| Error::parse(cl, format!("expected {nv} vertices")))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::parse(l, "vertex needs 3 coordinates"));
        }
        vertices.push([parse_f64(toks[0], l)?, parse_f64(toks[1], l)?, parse_f64(toks[2], l)?]);
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines
            .next()
            .ok_or_else(|| Error::parse(cl, format!("expected {nf} faces")))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        let count: usize = toks
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(l, "invalid face vertex count"))?;
        if count < 3 || toks.len() < count + 1 {
            return Err(Error::parse(l, "face needs at least 3 indices"));
        }
        let poly = toks[1..=count]
            .iter()
            .map(|t| parse_index(t, l, nv))
            .collect::<Result<Vec<_>>>()?;
        faces.extend(fan(&poly));
    }

    if faces.is_empty() {
        Shape::point_cloud(name, vertices)
    } else {
        Shape::mesh(name, vertices, faces)
    }
}

pub(super) fn format(shape: &Shape) -> Result<String> {
    let faces = shape.faces().unwrap_or(&[]);
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(out, "{} {} 0", shape.n_vertices(), faces.len()).unwrap();
    for v in shape.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
    }
    for f in faces {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    Ok(out)
}
