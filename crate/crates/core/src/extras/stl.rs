//! STL reader (ASCII and binary) with vertex merging, plus a small writer.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{bbox_diagonal, single_region_mesh, ElementType, Mesh, Point3};

/// Vertices closer than this fraction of the bounding-box diagonal are merged.
pub const MERGE_TOLERANCE: f64 = 1e-9;

const HEADER_LEN: usize = 84;
const RECORD_LEN: usize = 50;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        format: "STL",
        line,
        message: message.into(),
    }
}

/// Reads an ASCII or binary STL file into a TRIA3 mesh with one region
/// named after the solid (or `stl`).
pub fn read_stl(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_stl(&bytes)
}

/// Parses STL content. Data starting with `solid` is read as ASCII; if that
/// fails and the size matches a binary layout, it is read as binary.
pub fn parse_stl(bytes: &[u8]) -> Result<Mesh> {
    let looks_ascii = bytes.trim_ascii_start().starts_with(b"solid");
    let (name, triangles) = if looks_ascii {
        match parse_ascii(bytes) {
            Ok(r) => r,
            Err(e) if binary_size_matches(bytes) => {
                log::debug!("ASCII STL parse failed ({e}); reading as binary");
                parse_binary(bytes)?
            }
            Err(e) => return Err(e),
        }
    } else {
        parse_binary(bytes)?
    };
    if triangles.is_empty() {
        log::warn!("STL solid '{name}' contains no facets");
    }
    build_mesh(&name, &triangles)
}

fn binary_size_matches(bytes: &[u8]) -> bool {
    bytes.len() >= HEADER_LEN && {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        n.checked_mul(RECORD_LEN).and_then(|b| b.checked_add(HEADER_LEN)) == Some(bytes.len())
    }
}

fn parse_binary(bytes: &[u8]) -> Result<(String, Vec<[Point3; 3]>)> {
    if bytes.len() < HEADER_LEN {
        return Err(parse_err(0, format!("binary STL needs an 84-byte header, file has {} bytes", bytes.len())));
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = n.checked_mul(RECORD_LEN).and_then(|b| b.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(parse_err(
            0,
            format!(
                "binary STL declares {n} triangles ({} bytes) but the file has {} bytes",
                expected.map_or("overflowing".to_string(), |e| e.to_string()),
                bytes.len()
            ),
        ));
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let mut tris = Vec::with_capacity(n);
    for t in 0..n {
        let base = HEADER_LEN + t * RECORD_LEN + 12;
        let mut tri = [[0.0; 3]; 3];
        for (v, p) in tri.iter_mut().enumerate() {
            for (c, x) in p.iter_mut().enumerate() {
                *x = f(base + 12 * v + 4 * c);
            }
        }
        if tri.iter().flatten().any(|x| !x.is_finite()) {
            return Err(parse_err(0, format!("triangle {} has a non-finite coordinate", t + 1)));
        }
        tris.push(tri);
    }
    Ok((binary_name(&bytes[..80]), tris))
}

/// Solid name from a binary header of the form `solid <name> ...`, which
/// many writers emit; "stl" otherwise.
fn binary_name(header: &[u8]) -> String {
    let text: String = header.iter().take_while(|&&b| b != 0).map(|&b| b as char).collect();
    let mut words = text.split_whitespace();
    match (words.next(), words.next()) {
        (Some("solid"), Some(name)) if name.chars().all(|c| c.is_ascii_graphic()) => name.to_string(),
        _ => "stl".to_string(),
    }
}

struct Tokens<'a> {
    inner: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        let last_line = self.inner.last().map_or(1, |t| t.0);
        let t = self
            .inner
            .get(self.pos)
            .copied()
            .ok_or_else(|| parse_err(last_line, "unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let (line, t) = self.next()?;
        if t.eq_ignore_ascii_case(word) {
            Ok(())
        } else {
            Err(parse_err(line, format!("expected '{word}', found '{t}'")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let (line, t) = self.next()?;
        let v: f32 = t.parse().map_err(|_| parse_err(line, format!("invalid number '{t}'")))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("non-finite number '{t}'")));
        }
        Ok(v as f64)
    }

    /// Three coordinates on the line of the preceding keyword.
    fn point(&mut self, what: &str) -> Result<Point3> {
        let line = self.inner[self.pos - 1].0;
        let mut p = [0.0; 3];
        for x in p.iter_mut() {
            if self.inner.get(self.pos).is_none_or(|t| t.0 != line) {
                return Err(parse_err(line, format!("'{what}' needs 3 coordinates")));
            }
            *x = self.number()?;
        }
        Ok(p)
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<(String, Vec<[Point3; 3]>)> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, format!("ASCII STL is not valid UTF-8: {e}")))?;
    let mut name = None;
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("solid") {
            if name.is_none() && (rest.is_empty() || rest.starts_with(char::is_whitespace)) {
                name = Some(rest.trim().to_string());
            }
        }
        tokens.extend(trimmed.split_whitespace().map(|t| (i + 1, t)));
    }
    let mut tk = Tokens { inner: tokens, pos: 0 };
    let mut tris = Vec::new();
    tk.expect("solid")?;
    // skip the solid name
    let first_line = tk.inner[0].0;
    while tk.inner.get(tk.pos).is_some_and(|t| t.0 == first_line) {
        tk.pos += 1;
    }
    loop {
        let (line, t) = tk.next()?;
        match t.to_ascii_lowercase().as_str() {
            "facet" => {
                tk.expect("normal")?;
                tk.point("facet normal")?;
                tk.expect("outer")?;
                tk.expect("loop")?;
                let mut tri = [[0.0; 3]; 3];
                for v in tri.iter_mut() {
                    tk.expect("vertex")?;
                    *v = tk.point("vertex")?;
                }
                tk.expect("endloop")?;
                tk.expect("endfacet")?;
                tris.push(tri);
            }
            "endsolid" => {
                // optional name on the same line, then possibly another solid
                while tk.inner.get(tk.pos).is_some_and(|t| t.0 == line) {
                    tk.pos += 1;
                }
                match tk.inner.get(tk.pos) {
                    None => break,
                    Some(&(l, t)) if t.eq_ignore_ascii_case("solid") => {
                        tk.pos += 1;
                        while tk.inner.get(tk.pos).is_some_and(|t| t.0 == l) {
                            tk.pos += 1;
                        }
                    }
                    Some(&(l, t)) => return Err(parse_err(l, format!("unexpected '{t}' after endsolid"))),
                }
            }
            _ => return Err(parse_err(line, format!("expected 'facet' or 'endsolid', found '{t}'"))),
        }
    }
    let name = name.filter(|n| !n.is_empty()).unwrap_or_else(|| "stl".to_string());
    Ok((name, tris))
}

/// Merges vertices within `MERGE_TOLERANCE * diagonal` using a hash grid
/// and builds the mesh.
fn build_mesh(name: &str, triangles: &[[Point3; 3]]) -> Result<Mesh> {
    let all: Vec<Point3> = triangles.iter().flatten().copied().collect();
    let tol = MERGE_TOLERANCE * bbox_diagonal(&all);
    let h = if tol > 0.0 { tol } else { 1.0 };
    let min = all.iter().fold([f64::INFINITY; 3], |m, p| [m[0].min(p[0]), m[1].min(p[1]), m[2].min(p[2])]);
    let key = |p: &Point3| -> [i64; 3] { std::array::from_fn(|c| ((p[c] - min[c]) / h).floor() as i64) };

    let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    let mut coords: Vec<Point3> = Vec::new();
    let mut find_or_insert = |p: Point3| -> u32 {
        let k = key(&p);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    let nk = [k[0].saturating_add(dx), k[1].saturating_add(dy), k[2].saturating_add(dz)];
                    if let Some(ids) = grid.get(&nk) {
                        for &id in ids {
                            if crate::vec3::dist(coords[id as usize - 1], p) <= tol {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        coords.push(p);
        let id = coords.len() as u32;
        grid.entry(k).or_default().push(id);
        id
    };
    let elements: Vec<Vec<u32>> = triangles
        .iter()
        .map(|t| t.iter().map(|&p| find_or_insert(p)).collect())
        .collect();
    let degenerate = elements.iter().filter(|e| e[0] == e[1] || e[1] == e[2] || e[0] == e[2]).count();
    if degenerate > 0 {
        log::warn!("STL contains {degenerate} degenerate facets (repeated vertex after merging)");
    }
    single_region_mesh(coords, vec![ElementType::Tria3; elements.len()], elements, name)
}

/// Writes the TRIA3 elements of a mesh as STL (QUAD4 elements are split
/// into two triangles). Facet normals follow the node order.
pub fn write_stl(path: impl AsRef<Path>, mesh: &Mesh, solid_name: &str, binary: bool) -> Result<()> {
    let path = path.as_ref();
    let mut tris = Vec::new();
    for i in 0..mesh.num_elements() {
        let n = mesh.element_nodes(i);
        let p = |k: usize| mesh.node(n[k]);
        match mesh.element_type(i) {
            ElementType::Tria3 => tris.push([p(0), p(1), p(2)]),
            ElementType::Quad4 => {
                tris.push([p(0), p(1), p(2)]);
                tris.push([p(0), p(2), p(3)]);
            }
            t => return Err(Error::Unsupported(format!("cannot write {t} elements to STL"))),
        }
    }
    let normal = |t: &[Point3; 3]| {
        crate::vec3::normalize(crate::vec3::cross(crate::vec3::sub(t[1], t[0]), crate::vec3::sub(t[2], t[0])))
            .unwrap_or([0.0; 3])
    };
    let mut out = Vec::new();
    if binary {
        let mut header = [0u8; 80];
        let tag = format!("binary STL {solid_name}");
        let len = tag.len().min(80);
        header[..len].copy_from_slice(&tag.as_bytes()[..len]);
        // a binary header must not start with "solid"
        out.extend_from_slice(&header);
        out.extend_from_slice(&(tris.len() as u32).to_le_bytes());
        for t in &tris {
            for v in std::iter::once(normal(t)).chain(t.iter().copied()) {
                for x in v {
                    out.extend_from_slice(&(x as f32).to_le_bytes());
                }
            }
            out.extend_from_slice(&[0, 0]);
        }
    } else {
        writeln!(out, "solid {solid_name}").unwrap();
        for t in &tris {
            let n = normal(t);
            writeln!(out, "  facet normal {:e} {:e} {:e}", n[0], n[1], n[2]).unwrap();
            writeln!(out, "    outer loop").unwrap();
            for v in t {
                writeln!(out, "      vertex {:e} {:e} {:e}", v[0] as f32, v[1] as f32, v[2] as f32).unwrap();
            }
            writeln!(out, "    endloop").unwrap();
            writeln!(out, "  endfacet").unwrap();
        }
        writeln!(out, "endsolid {solid_name}").unwrap();
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
