//! EnSight Gold case reader (ASCII geometry and variable files, static
//! geometry).
//!
//! Each part becomes one region named after its description line. Element
//! connectivity refers to the part-local node order; node and element ids in
//! the file are labels only and are not used for numbering.

use std::path::{Path, PathBuf};

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::model::{AnalysisType, ElementType, Mesh, Point3, Region, ResType, ResultArray, ResultContainer};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        format: "EnSight",
        line,
        message: message.into(),
    }
}

fn file_err(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message, .. } => parse_err(line, format!("{}: {message}", path.display())),
        e => e,
    }
}

fn element_type(keyword: &str) -> Option<ElementType> {
    Some(match keyword {
        "point" => ElementType::Point,
        "bar2" => ElementType::Line2,
        "tria3" => ElementType::Tria3,
        "quad4" => ElementType::Quad4,
        "tetra4" => ElementType::Tet4,
        "pyramid5" => ElementType::Pyra5,
        "penta6" => ElementType::Wedge6,
        "hexa8" => ElementType::Hexa8,
        _ => return None,
    })
}

/// Line cursor with 1-based line numbers for error messages.
struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    fn line_no(&self) -> usize {
        self.pos
    }

    fn next(&mut self) -> Result<&'a str> {
        let l = self
            .lines
            .get(self.pos)
            .ok_or_else(|| parse_err(self.pos, "unexpected end of file"))?;
        self.pos += 1;
        Ok(l)
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.lines[self.pos..].iter().all(|l| l.trim().is_empty())
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let l = self.next()?;
        if l.trim().eq_ignore_ascii_case(word) {
            Ok(())
        } else {
            Err(parse_err(self.pos, format!("expected '{word}', found '{}'", l.trim())))
        }
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let l = self.next()?.trim();
        l.parse()
            .map_err(|_| parse_err(self.pos, format!("expected {what} count, found '{l}'")))
    }

    fn int(&mut self) -> Result<i64> {
        let l = self.next()?.trim();
        l.parse().map_err(|_| parse_err(self.pos, format!("expected an integer, found '{l}'")))
    }

    fn float(&mut self) -> Result<f64> {
        let l = self.next()?.trim();
        let v: f64 = l
            .parse()
            .map_err(|_| parse_err(self.pos, format!("expected a number, found '{l}'")))?;
        if !v.is_finite() {
            return Err(parse_err(self.pos, format!("non-finite value '{l}'")));
        }
        Ok(v)
    }

    /// `n` integers on the next line, whitespace separated or in 10-wide
    /// fixed columns.
    fn ints(&mut self, n: usize) -> Result<Vec<i64>> {
        let l = self.next()?;
        let parsed: std::result::Result<Vec<i64>, _> = l.split_whitespace().map(str::parse).collect();
        match parsed {
            Ok(v) if v.len() == n => Ok(v),
            _ => {
                let t = l.trim_end();
                let fixed: Option<Vec<i64>> = (t.len() == 10 * n && t.is_ascii())
                    .then(|| (0..n).map(|k| t[10 * k..10 * k + 10].trim().parse().ok()).collect())
                    .flatten();
                fixed.ok_or_else(|| parse_err(self.pos, format!("expected {n} integers, found '{}'", l.trim())))
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let head = &bytes[..bytes.len().min(80)];
    let head = String::from_utf8_lossy(head).to_ascii_lowercase();
    if head.trim_start().starts_with("c binary") || head.trim_start().starts_with("fortran binary") {
        return Err(Error::Unsupported(format!(
            "{}: binary EnSight Gold files are not supported (ASCII only)",
            path.display()
        )));
    }
    String::from_utf8(bytes).map_err(|_| {
        Error::Unsupported(format!("{}: not a text file; only ASCII EnSight Gold is supported", path.display()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IdMode {
    Off,
    Given,
    Assign,
    Ignore,
}

impl IdMode {
    fn parse(line: &str, what: &str, line_no: usize) -> Result<Self> {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 || !t[0].eq_ignore_ascii_case(what) || !t[1].eq_ignore_ascii_case("id") {
            return Err(parse_err(line_no, format!("expected '{what} id <off|given|assign|ignore>', found '{}'", line.trim())));
        }
        match t[2].to_ascii_lowercase().as_str() {
            "off" => Ok(IdMode::Off),
            "given" => Ok(IdMode::Given),
            "assign" => Ok(IdMode::Assign),
            "ignore" => Ok(IdMode::Ignore),
            m => Err(parse_err(line_no, format!("unknown {what} id mode '{m}'"))),
        }
    }

    fn listed(self) -> bool {
        matches!(self, IdMode::Given | IdMode::Ignore)
    }
}

#[derive(Debug)]
struct Part {
    number: i64,
    name: String,
    node_offset: usize,
    num_nodes: usize,
    /// `(type, count)` per element block, in file order.
    blocks: Vec<(ElementType, usize)>,
    element_offset: usize,
}

impl Part {
    fn num_elements(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }
}

struct Geometry {
    coords: Vec<Point3>,
    types: Vec<ElementType>,
    elements: Vec<Vec<u32>>,
    parts: Vec<Part>,
}

fn parse_geometry(text: &str) -> Result<Geometry> {
    let mut l = Lines::new(text);
    l.next()?;
    l.next()?;
    let line = l.next()?;
    let node_ids = IdMode::parse(line, "node", l.line_no())?;
    let line = l.next()?;
    let elem_ids = IdMode::parse(line, "element", l.line_no())?;
    if l.peek().is_some_and(|s| s.trim().eq_ignore_ascii_case("extents")) {
        l.next()?;
        for _ in 0..3 {
            let line = l.next()?;
            let ok = line.split_whitespace().count() == 2
                && line.split_whitespace().all(|t| t.parse::<f64>().is_ok())
                || (line.trim_end().len() == 24 && line.is_ascii());
            if !ok {
                return Err(parse_err(l.line_no(), format!("invalid extents line '{}'", line.trim())));
            }
        }
    }
    let mut g = Geometry {
        coords: Vec::new(),
        types: Vec::new(),
        elements: Vec::new(),
        parts: Vec::new(),
    };
    while !l.at_end() {
        l.keyword("part")?;
        let number = l.int()?;
        if g.parts.iter().any(|p| p.number == number) {
            return Err(parse_err(l.line_no(), format!("duplicate part number {number}")));
        }
        let name = l.next()?.trim().to_string();
        let mut part = Part {
            number,
            name,
            node_offset: g.coords.len(),
            num_nodes: 0,
            blocks: Vec::new(),
            element_offset: g.types.len(),
        };
        if l.peek().is_some_and(|s| s.trim().eq_ignore_ascii_case("coordinates")) {
            l.next()?;
            let nn = l.count("node")?;
            if node_ids.listed() {
                for _ in 0..nn {
                    l.int()?;
                }
            }
            let start = g.coords.len();
            for _ in 0..nn {
                g.coords.push([l.float()?, 0.0, 0.0]);
            }
            for c in 1..3 {
                for k in 0..nn {
                    g.coords[start + k][c] = l.float()?;
                }
            }
            part.num_nodes = nn;
        } else if l.peek().is_some_and(|s| s.trim().to_ascii_lowercase().starts_with("block")) {
            return Err(Error::Unsupported("structured EnSight parts ('block') are not supported".into()));
        }
        while let Some(kw) = l.peek() {
            let kw = kw.trim().to_ascii_lowercase();
            if kw == "part" || kw.is_empty() && l.at_end() {
                break;
            }
            l.next()?;
            let t = element_type(&kw)
                .ok_or_else(|| parse_err(l.line_no(), format!("unknown element keyword '{kw}'")))?;
            let ne = l.count("element")?;
            if elem_ids.listed() {
                for _ in 0..ne {
                    l.int()?;
                }
            }
            for _ in 0..ne {
                let conn = l.ints(t.node_count())?;
                let nodes = conn
                    .iter()
                    .map(|&c| {
                        if c >= 1 && (c as usize) <= part.num_nodes {
                            Ok((part.node_offset + c as usize) as u32)
                        } else {
                            Err(parse_err(
                                l.line_no(),
                                format!("node index {c} outside 1..={} of part {number}", part.num_nodes),
                            ))
                        }
                    })
                    .collect::<Result<Vec<u32>>>()?;
                g.types.push(t);
                g.elements.push(nodes);
            }
            part.blocks.push((t, ne));
        }
        g.parts.push(part);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    ScalarNode,
    VectorNode,
    ScalarElement,
    VectorElement,
}

impl VarKind {
    fn dims(self) -> usize {
        match self {
            VarKind::ScalarNode | VarKind::ScalarElement => 1,
            _ => 3,
        }
    }

    fn res_type(self) -> ResType {
        match self {
            VarKind::ScalarNode | VarKind::VectorNode => ResType::Node,
            _ => ResType::Element,
        }
    }
}

#[derive(Debug)]
struct Variable {
    kind: VarKind,
    time_set: Option<u32>,
    name: String,
    file: String,
}

#[derive(Debug, Default)]
struct TimeSet {
    num_steps: Option<usize>,
    start: i64,
    increment: i64,
    numbers: Vec<i64>,
    values: Vec<f64>,
}

#[derive(Debug, Default)]
struct Case {
    geometry: Option<String>,
    variables: Vec<Variable>,
    time_sets: Vec<(u32, TimeSet)>,
}

fn parse_case(text: &str) -> Result<Case> {
    let mut case = Case::default();
    let mut section = String::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let mut current_ts: Option<usize> = None;
    // after "time values:"/"filename numbers:", following lines may continue the list
    let mut continuing: Option<&str> = None;
    while i < lines.len() {
        let raw = lines[i];
        let line_no = i + 1;
        i += 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !line.contains(':') {
            if let (Some(list), Some(ts)) = (continuing, current_ts) {
                let set = &mut case.time_sets[ts].1;
                for t in line.split_whitespace() {
                    match list {
                        "values" => set.values.push(
                            t.parse().map_err(|_| parse_err(line_no, format!("invalid time value '{t}'")))?,
                        ),
                        _ => set.numbers.push(
                            t.parse().map_err(|_| parse_err(line_no, format!("invalid filename number '{t}'")))?,
                        ),
                    }
                }
                continue;
            }
            section = line.to_ascii_uppercase();
            if !matches!(section.as_str(), "FORMAT" | "GEOMETRY" | "VARIABLE" | "TIME" | "FILE") {
                return Err(parse_err(line_no, format!("unknown case file section '{line}'")));
            }
            continue;
        }
        continuing = None;
        let (key, value) = line.split_once(':').unwrap();
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let tokens: Vec<&str> = value.split_whitespace().collect();
        match (section.as_str(), key.as_str()) {
            ("FORMAT", "type") => {
                if !value.to_ascii_lowercase().contains("gold") {
                    return Err(Error::Unsupported(format!("EnSight format '{value}' (only EnSight Gold)")));
                }
            }
            ("GEOMETRY", "model") => {
                if tokens.iter().any(|t| t.eq_ignore_ascii_case("change_coords_only")) {
                    return Err(Error::Unsupported("change_coords_only geometry is not supported".into()));
                }
                let file = tokens
                    .iter()
                    .rev()
                    .find(|t| t.parse::<i64>().is_err())
                    .ok_or_else(|| parse_err(line_no, "model line without a file name"))?;
                if file.contains('*') {
                    return Err(Error::Unsupported("transient geometry is not supported (static geometry only)".into()));
                }
                case.geometry = Some(file.to_string());
            }
            ("GEOMETRY", _) => {}
            ("VARIABLE", k) => {
                let kind = match k {
                    "scalar per node" => VarKind::ScalarNode,
                    "vector per node" => VarKind::VectorNode,
                    "scalar per element" => VarKind::ScalarElement,
                    "vector per element" => VarKind::VectorElement,
                    _ => return Err(Error::Unsupported(format!("variable type '{k}'"))),
                };
                if tokens.len() < 2 {
                    return Err(parse_err(line_no, "variable line needs a description and a file name"));
                }
                let numeric = tokens.iter().take_while(|t| t.parse::<u32>().is_ok()).count().min(tokens.len() - 2);
                let time_set = (numeric >= 1).then(|| tokens[0].parse().unwrap());
                let rest = &tokens[numeric..];
                case.variables.push(Variable {
                    kind,
                    time_set,
                    name: rest[..rest.len() - 1].join("_"),
                    file: rest[rest.len() - 1].to_string(),
                });
            }
            ("TIME", k) => {
                if k == "time set" {
                    let id: u32 = tokens
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line_no, "time set needs a number"))?;
                    case.time_sets.push((id, TimeSet { increment: 1, ..Default::default() }));
                    current_ts = Some(case.time_sets.len() - 1);
                    continue;
                }
                let ts = match current_ts {
                    Some(ts) => ts,
                    None => {
                        case.time_sets.push((1, TimeSet { increment: 1, ..Default::default() }));
                        current_ts = Some(case.time_sets.len() - 1);
                        case.time_sets.len() - 1
                    }
                };
                let set = &mut case.time_sets[ts].1;
                let int = |t: Option<&&str>| -> Result<i64> {
                    t.and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line_no, format!("'{k}' needs an integer")))
                };
                match k {
                    "number of steps" => {
                        let n = int(tokens.first())?;
                        set.num_steps = Some(
                            usize::try_from(n).map_err(|_| parse_err(line_no, "number of steps must be >= 0"))?,
                        )
                    }
                    "filename start number" => set.start = int(tokens.first())?,
                    "filename increment" => set.increment = int(tokens.first())?,
                    "time values" => {
                        for t in &tokens {
                            set.values.push(
                                t.parse().map_err(|_| parse_err(line_no, format!("invalid time value '{t}'")))?,
                            );
                        }
                        continuing = Some("values");
                    }
                    "filename numbers" => {
                        for t in &tokens {
                            set.numbers.push(
                                t.parse().map_err(|_| parse_err(line_no, format!("invalid filename number '{t}'")))?,
                            );
                        }
                        continuing = Some("numbers");
                    }
                    _ => return Err(parse_err(line_no, format!("unknown time set entry '{k}'"))),
                }
            }
            ("FILE", _) => return Err(Error::Unsupported("FILE section (single-file mode) is not supported".into())),
            (s, k) => return Err(parse_err(line_no, format!("unexpected entry '{k}' in section '{s}'"))),
        }
    }
    if case.geometry.is_none() {
        return Err(parse_err(0, "case file has no GEOMETRY model line"));
    }
    for (id, ts) in &case.time_sets {
        let n = ts.num_steps.ok_or_else(|| parse_err(0, format!("time set {id} has no 'number of steps'")))?;
        if ts.values.len() != n {
            return Err(parse_err(0, format!("time set {id} declares {n} steps but lists {} time values", ts.values.len())));
        }
        if !ts.numbers.is_empty() && ts.numbers.len() != n {
            return Err(parse_err(0, format!("time set {id} declares {n} steps but lists {} filename numbers", ts.numbers.len())));
        }
    }
    Ok(case)
}

/// File names for a (possibly wildcard) variable file pattern.
fn expand_pattern(pattern: &str, ts: Option<&TimeSet>) -> Result<Vec<String>> {
    let Some(start) = pattern.find('*') else {
        return Ok(vec![pattern.to_string()]);
    };
    let width = pattern[start..].chars().take_while(|&c| c == '*').count();
    let ts = ts.ok_or_else(|| {
        Error::InvalidArgument(format!("wildcard file name '{pattern}' needs a time set"))
    })?;
    let n = ts.values.len();
    (0..n)
        .map(|k| {
            let num = if ts.numbers.is_empty() {
                ts.start + ts.increment * k as i64
            } else {
                ts.numbers[k]
            };
            if num < 0 {
                return Err(Error::InvalidArgument(format!("negative file number {num} for '{pattern}'")));
            }
            Ok(format!(
                "{}{:0width$}{}",
                &pattern[..start],
                num,
                &pattern[start + width..],
                width = width
            ))
        })
        .collect()
}

/// Reads one variable file: values per part number, `[M x D]` row-major.
fn parse_variable(text: &str, kind: VarKind, geo: &Geometry) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut l = Lines::new(text);
    l.next()?;
    let d = kind.dims();
    let mut out = Vec::new();
    while !l.at_end() {
        l.keyword("part")?;
        let number = l.int()?;
        let pidx = geo
            .parts
            .iter()
            .position(|p| p.number == number)
            .ok_or_else(|| parse_err(l.line_no(), format!("part {number} is not in the geometry")))?;
        let part = &geo.parts[pidx];
        let mut values;
        if kind.res_type() == ResType::Node {
            let kw = l.next()?.trim().to_ascii_lowercase();
            if kw != "coordinates" {
                return Err(if kw.starts_with("coordinates") {
                    Error::Unsupported(format!("'{kw}' variable sections are not supported"))
                } else {
                    parse_err(l.line_no(), format!("expected 'coordinates', found '{kw}'"))
                });
            }
            let m = part.num_nodes;
            values = vec![0.0; m * d];
            for c in 0..d {
                for k in 0..m {
                    values[k * d + c] = l.float()?;
                }
            }
        } else {
            let m = part.num_elements();
            values = vec![0.0; m * d];
            let mut offset = 0;
            for &(t, ne) in &part.blocks {
                let kw = l.next()?.trim().to_ascii_lowercase();
                if element_type(&kw) != Some(t) {
                    return Err(parse_err(l.line_no(), format!("expected element block '{}', found '{kw}'", t.name().to_ascii_lowercase())));
                }
                for c in 0..d {
                    for k in 0..ne {
                        values[(offset + k) * d + c] = l.float()?;
                    }
                }
                offset += ne;
            }
        }
        if out.iter().any(|(p, _)| *p == pidx) {
            return Err(parse_err(l.line_no(), format!("part {number} appears twice")));
        }
        out.push((pidx, values));
    }
    Ok(out)
}

fn unique_name(base: &str, number: i64, taken: &[String]) -> String {
    let base = if base.is_empty() { format!("part_{number}") } else { base.to_string() };
    if !taken.contains(&base) {
        return base;
    }
    (2..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !taken.contains(n))
        .expect("some suffix is free")
}

/// Reads an EnSight Gold `.case` file and the files it references.
pub fn read_ensight_case(path: impl AsRef<Path>) -> Result<(Mesh, ResultContainer)> {
    let path = path.as_ref();
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let case = parse_case(&read_text(path)?).map_err(|e| file_err(path, e))?;
    let geo_path = dir.join(case.geometry.as_deref().unwrap());
    let geo = parse_geometry(&read_text(&geo_path)?).map_err(|e| file_err(&geo_path, e))?;

    let mut names: Vec<String> = Vec::new();
    let mut regions = Vec::new();
    for p in &geo.parts {
        let name = unique_name(&p.name, p.number, &names);
        let dim = p.blocks.iter().map(|b| b.0.dimension()).max().unwrap_or(0);
        let nodes = (p.node_offset as u32 + 1..=(p.node_offset + p.num_nodes) as u32).collect();
        let elems = (p.element_offset as u32 + 1..=(p.element_offset + p.num_elements()) as u32).collect();
        regions.push(Region::new(name.clone(), dim, nodes, elems, false)?);
        names.push(name);
    }
    let mesh = Mesh::new(geo.coords.clone(), geo.types.clone(), geo.elements.clone(), regions)
        .map_err(|e| file_err(&geo_path, e))?;

    let mut container = ResultContainer::new(AnalysisType::Transient, 1);
    for var in &case.variables {
        let ts = match var.time_set {
            Some(id) => Some(
                case.time_sets
                    .iter()
                    .find(|(i, _)| *i == id)
                    .map(|(_, t)| t)
                    .ok_or_else(|| parse_err(0, format!("variable '{}' uses undefined time set {id}", var.name)))?,
            ),
            None => case.time_sets.first().map(|(_, t)| t),
        };
        let files = expand_pattern(&var.file, ts)?;
        let steps: Vec<f64> = if var.file.contains('*') {
            ts.unwrap().values.clone()
        } else {
            vec![ts.and_then(|t| t.values.first().copied()).unwrap_or(0.0)]
        };
        let mut per_step = Vec::with_capacity(files.len());
        for f in &files {
            let fp = dir.join(f);
            if !fp.exists() {
                return Err(Error::InvalidArgument(format!(
                    "variable '{}': time set has {} steps but file '{}' is missing",
                    var.name,
                    files.len(),
                    fp.display()
                )));
            }
            per_step.push(parse_variable(&read_text(&fp)?, var.kind, &geo).map_err(|e| file_err(&fp, e))?);
        }
        for (pidx, part) in geo.parts.iter().enumerate() {
            let present: Vec<&Vec<f64>> = per_step
                .iter()
                .filter_map(|s| s.iter().find(|(p, _)| *p == pidx).map(|(_, v)| v))
                .collect();
            if present.is_empty() {
                continue;
            }
            if present.len() != per_step.len() {
                return Err(Error::InvalidArgument(format!(
                    "variable '{}' is defined on part {} in only some time steps",
                    var.name, part.number
                )));
            }
            let d = var.kind.dims();
            let m = present[0].len() / d;
            let data = Array3::from_shape_fn((present.len(), m, d), |(s, i, j)| present[s][i * d + j]);
            let array = ResultArray::builder(var.name.clone(), names[pidx].clone(), var.kind.res_type())
                .analysis(AnalysisType::Transient)
                .steps(steps.clone())
                .build(data)?;
            container.push(array)?;
        }
    }
    Ok((mesh, container))
}
