use std::fmt::Write;

use super::{content_lines, parse_f64};
use crate::error::{Error, Result};
use crate::shape::Shape;

pub(super) fn parse(text: &str, name: &str) -> Result<Shape> {
    let mut vertices = Vec::new();
    for (l, s) in content_lines(text) {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::parse(l, "expected 3 coordinates"));
        }
        vertices.push([parse_f64(toks[0], l)?, parse_f64(toks[1], l)?, parse_f64(toks[2], l)?]);
    }
    Shape::point_cloud(name, vertices)
}

pub(super) fn format(shape: &Shape) -> String {
    let mut out = String::new();
    for v in shape.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
    }
    out
}
