//! ASCII PLY. Only `x y z` vertex properties and the face index list are read;
//! other properties and elements are skipped.

use std::fmt::Write;

use super::{content_lines, fan, parse_f64, parse_index};
use crate::error::{Error, Result};
use crate::shape::Shape;

struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Property {
    name: String,
    is_list: bool,
}

pub(super) fn parse(text: &str, name: &str) -> Result<Shape> {
    let mut lines = content_lines_keep_comments(text);
    match lines.next() {
        Some((_, "ply")) => {}
        Some((l, _)) => return Err(Error::parse(l, "expected 'ply' magic")),
        None => return Err(Error::Empty(name.to_string())),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut header_end = None;
    for (l, s) in lines.by_ref() {
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, _] => {
                return Err(Error::Unsupported(format!("PLY format '{other}'")));
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", ename, count] => elements.push(Element {
                name: ename.to_string(),
                count: count
                    .parse()
                    .map_err(|_| Error::parse(l, "invalid element count"))?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, pname] => elements
                .last_mut()
                .ok_or_else(|| Error::parse(l, "property before element"))?
                .properties
                .push(Property {
                    name: pname.to_string(),
                    is_list: true,
                }),
            ["property", _, pname] => elements
                .last_mut()
                .ok_or_else(|| Error::parse(l, "property before element"))?
                .properties
                .push(Property {
                    name: pname.to_string(),
                    is_list: false,
                }),
            ["end_header"] => {
                header_end = Some(l);
                break;
            }
            _ => return Err(Error::parse(l, format!("unrecognized header line '{s}'"))),
        }
    }
    let header_end = header_end.ok_or_else(|| Error::parse(0, "missing end_header"))?;

    let mut body = content_lines(text).skip_while(|(l, _)| *l <= header_end);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let pos = |p: &str| el.properties.iter().position(|q| q.name == p);
                let (ix, iy, iz) = match (pos("x"), pos("y"), pos("z")) {
                    (Some(x), Some(y), Some(z)) => (x, y, z),
                    _ => return Err(Error::parse(header_end, "vertex element lacks x/y/z")),
                };
                if el.properties.iter().any(|p| p.is_list) {
                    return Err(Error::Unsupported("list properties on vertices".into()));
                }
                for _ in 0..el.count {
                    let (l, s) = body
                        .next()
                        .ok_or_else(|| Error::parse(header_end, "truncated vertex list"))?;
                    let toks: Vec<&str> = s.split_whitespace().collect();
                    if toks.len() < el.properties.len() {
                        return Err(Error::parse(l, "too few vertex properties"));
                    }
                    vertices.push([
                        parse_f64(toks[ix], l)?,
                        parse_f64(toks[iy], l)?,
                        parse_f64(toks[iz], l)?,
                    ]);
                }
            }
            "face" => {
                let list_pos = el
                    .properties
                    .iter()
                    .position(|p| p.is_list)
                    .ok_or_else(|| Error::parse(header_end, "face element lacks index list"))?;
                for _ in 0..el.count {
                    let (l, s) = body
                        .next()
                        .ok_or_else(|| Error::parse(header_end, "truncated face list"))?;
                    let toks: Vec<&str> = s.split_whitespace().collect();
                    // Scalar properties before the list each take one token.
                    let start = list_pos;
                    let count: usize = toks
                        .get(start)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(l, "invalid face index count"))?;
                    if count < 3 || toks.len() < start + 1 + count {
                        return Err(Error::parse(l, "face needs at least 3 indices"));
                    }
                    let poly = toks[start + 1..start + 1 + count]
                        .iter()
                        .map(|t| parse_index(t, l, vertices.len()))
                        .collect::<Result<Vec<_>>>()?;
                    faces.extend(fan(&poly));
                }
            }
            _ => {
                for _ in 0..el.count {
                    body.next();
                }
            }
        }
    }

    if faces.is_empty() {
        Shape::point_cloud(name, vertices)
    } else {
        Shape::mesh(name, vertices, faces)
    }
}

/// Header lines must keep `comment` lines visible, so `#` is not special here.
fn content_lines_keep_comments(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub(super) fn format(shape: &Shape) -> String {
    let faces = shape.faces().unwrap_or(&[]);
    let mut out = String::new();
    writeln!(out, "ply\nformat ascii 1.0").unwrap();
    writeln!(out, "element vertex {}", shape.n_vertices()).unwrap();
    writeln!(out, "property double x\nproperty double y\nproperty double z").unwrap();
    if !faces.is_empty() {
        writeln!(out, "element face {}", faces.len()).unwrap();
        writeln!(out, "property list uchar int vertex_indices").unwrap();
    }
    writeln!(out, "end_header").unwrap();
    for v in shape.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
    }
    for f in faces {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    out
}
