//! Line-oriented text formats for relative categories and diagrams of them.
//!
//! ```text
//! [objects]
//! x
//! y
//! [morphisms]
//! w : x -> y
//! [compose]
//! g . f = h
//! [weq]
//! w
//! ```
//!
//! Identities `1_x` are implicit, as are composites with identities.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::fincat::{validate_category, CategoryBuilder, RelFunctor, RelativeCategory};
use crate::hocolim_cat::{DiagramOfRelCats, Variance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    None,
    Objects,
    Morphisms,
    Compose,
    Weq,
}

/// A whitespace-separated token with its 1-based column.
#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Checks `toks` against a shape like `[None, Some(":"), None, Some("->"), None]`.
fn expect_shape<'a>(toks: &[Token<'a>], shape: &[Option<&str>], line: usize, what: &str) -> Result<Vec<Token<'a>>> {
    if toks.len() != shape.len() {
        let column = toks.get(shape.len()).or(toks.last()).map_or(1, |t| t.column);
        return Err(perr(line, column, format!("expected {what}")));
    }
    let mut names = Vec::new();
    for (t, s) in toks.iter().zip(shape) {
        match s {
            Some(lit) if t.text != *lit => {
                return Err(perr(line, t.column, format!("expected `{lit}` in {what}, found `{}`", t.text)))
            }
            Some(_) => {}
            None => names.push(*t),
        }
    }
    Ok(names)
}

fn section_header(text: &str) -> Option<&str> {
    text.strip_prefix('[').and_then(|s| s.strip_suffix(']'))
}

/// Parses and validates a relative category.
pub fn parse_relcat(text: &str) -> Result<RelativeCategory> {
    let mut section = Section::None;
    let mut b = CategoryBuilder::new();
    let mut objects: HashMap<String, usize> = HashMap::new();
    let mut morphisms: HashMap<String, usize> = HashMap::new();
    let mut compose: Vec<(usize, [Token<'_>; 3])> = Vec::new();
    let mut weq: Vec<(usize, Token<'_>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        if let Some(name) = section_header(toks[0].text) {
            if toks.len() > 1 {
                return Err(perr(line, toks[1].column, "unexpected text after section header"));
            }
            section = match name {
                "objects" => Section::Objects,
                "morphisms" => Section::Morphisms,
                "compose" => Section::Compose,
                "weq" => Section::Weq,
                other => return Err(perr(line, toks[0].column, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(perr(line, toks[0].column, "content before the first section")),
            Section::Objects => {
                let t = expect_shape(&toks, &[None], line, "an object name")?[0];
                if objects.contains_key(t.text) {
                    return Err(perr(line, t.column, format!("duplicate object `{}`", t.text)));
                }
                let x = b.add_object_with_identity(t.text);
                objects.insert(t.text.to_string(), x);
                morphisms.insert(format!("1_{}", t.text), b.identity_of(x).expect("identity"));
            }
            Section::Morphisms => {
                let n = expect_shape(&toks, &[None, Some(":"), None, Some("->"), None], line, "`name : source -> target`")?;
                if morphisms.contains_key(n[0].text) {
                    return Err(perr(line, n[0].column, format!("duplicate morphism `{}`", n[0].text)));
                }
                let obj = |t: &Token<'_>| {
                    objects
                        .get(t.text)
                        .copied()
                        .ok_or_else(|| perr(line, t.column, format!("unknown object `{}`", t.text)))
                };
                let (s, t) = (obj(&n[1])?, obj(&n[2])?);
                let f = b.add_morphism(n[0].text, s, t);
                morphisms.insert(n[0].text.to_string(), f);
            }
            Section::Compose => {
                let n = expect_shape(&toks, &[None, Some("."), None, Some("="), None], line, "`g . f = h`")?;
                compose.push((line, [n[0], n[1], n[2]]));
            }
            Section::Weq => {
                let n = expect_shape(&toks, &[None], line, "a morphism name")?;
                weq.push((line, n[0]));
            }
        }
    }
    let mor = |line: usize, t: &Token<'_>| {
        morphisms
            .get(t.text)
            .copied()
            .ok_or_else(|| perr(line, t.column, format!("unknown morphism `{}`", t.text)))
    };
    let mut seen = HashSet::new();
    for (line, [g, f, h]) in &compose {
        let (gi, fi, hi) = (mor(*line, g)?, mor(*line, f)?, mor(*line, h)?);
        if !seen.insert((gi, fi)) {
            return Err(perr(*line, g.column, format!("composite {} . {} given twice", g.text, f.text)));
        }
        b.set_compose(gi, fi, hi);
    }
    let mut marked_ids = Vec::new();
    for (line, t) in &weq {
        marked_ids.push(mor(*line, t)?);
    }
    let base = b.build()?;
    validate_category(&base).into_result()?;
    let mut marked = vec![false; base.num_morphisms()];
    for &id in base.identities() {
        marked[id] = true;
    }
    for f in marked_ids {
        marked[f] = true;
    }
    RelativeCategory::new(base, marked)
}

/// Writes the canonical text form; `parse_relcat` reads it back to an equal category.
pub fn serialize_relcat(m: &RelativeCategory) -> String {
    let c = m.base();
    let mut out = String::from("[objects]\n");
    for x in c.objects() {
        out.push_str(x);
        out.push('\n');
    }
    out.push_str("[morphisms]\n");
    for f in 0..c.num_morphisms() {
        if !c.is_identity(f) {
            let x = c.morphism(f);
            out.push_str(&format!("{} : {} -> {}\n", x.name, c.object_name(x.source), c.object_name(x.target)));
        }
    }
    out.push_str("[compose]\n");
    let mut table: Vec<_> = c
        .composition_table()
        .iter()
        .filter(|(&(g, f), _)| !c.is_identity(g) && !c.is_identity(f))
        .map(|(&k, &v)| (k, v))
        .collect();
    table.sort_unstable();
    for ((g, f), h) in table {
        out.push_str(&format!("{} . {} = {}\n", c.name(g), c.name(f), c.name(h)));
    }
    out.push_str("[weq]\n");
    for f in m.marked_morphisms() {
        if !c.is_identity(f) {
            out.push_str(c.name(f));
            out.push('\n');
        }
    }
    out
}

/// One `[arrow θ : α -> β]` block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowSpec {
    pub name: String,
    pub source: String,
    pub target: String,
    pub objects: Vec<(String, String)>,
    pub morphisms: Vec<(String, String)>,
    line: usize,
}

/// The syntax of a diagram file, before the referenced categories are loaded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramFile {
    pub variance: Variance,
    pub index: String,
    pub objects: Vec<(String, String)>,
    pub arrows: Vec<ArrowSpec>,
}

pub fn parse_diagram_file(text: &str) -> Result<DiagramFile> {
    let mut variance = None;
    let mut index = None;
    let mut objects: Vec<(String, String)> = Vec::new();
    let mut arrows: Vec<ArrowSpec> = Vec::new();
    let mut in_arrow = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let col = raw.len() - raw.trim_start().len() + 1;
        if let Some(rest) = body.strip_prefix('[') {
            let close = rest
                .find(']')
                .ok_or_else(|| perr(line, col, "unterminated section header"))?;
            let head = tokens(&rest[..close]);
            let after = rest[close + 1..].trim();
            in_arrow = false;
            match head.first().map(|t| t.text) {
                Some("index") if head.len() == 1 => {
                    if after.is_empty() {
                        return Err(perr(line, col, "expected a path after [index]"));
                    }
                    index = Some(after.to_string());
                }
                Some("object") if head.len() == 2 => {
                    if after.is_empty() {
                        return Err(perr(line, col, "expected a path after [object]"));
                    }
                    if objects.iter().any(|(n, _)| n == head[1].text) {
                        return Err(perr(line, col + head[1].column, format!("object `{}` given twice", head[1].text)));
                    }
                    objects.push((head[1].text.to_string(), after.to_string()));
                }
                Some("arrow") => {
                    let n = expect_shape(&head[1..], &[None, Some(":"), None, Some("->"), None], line, "`[arrow θ : α -> β]`")
                        .map_err(|e| shift_column(e, col))?;
                    if !after.is_empty() {
                        return Err(perr(line, col, "unexpected text after arrow header"));
                    }
                    arrows.push(ArrowSpec {
                        name: n[0].text.to_string(),
                        source: n[1].text.to_string(),
                        target: n[2].text.to_string(),
                        objects: Vec::new(),
                        morphisms: Vec::new(),
                        line,
                    });
                    in_arrow = true;
                }
                _ => return Err(perr(line, col, format!("unknown section `[{}]`", &rest[..close]))),
            }
            continue;
        }
        let toks = tokens(body);
        let shift = col - 1;
        if toks[0].text == "variance" {
            let n = expect_shape(&toks, &[Some("variance"), Some("="), None], line, "`variance = left|right`")
                .map_err(|e| shift_column(e, shift))?;
            variance = Some(match n[0].text {
                "left" => Variance::Left,
                "right" => Variance::Right,
                other => {
                    return Err(perr(line, n[0].column + shift, format!("variance must be left or right, found `{other}`")))
                }
            });
            continue;
        }
        if !in_arrow {
            return Err(perr(line, col, "mapping line outside an [arrow] block"));
        }
        let arrow = arrows.last_mut().expect("in arrow block");
        let n = expect_shape(&toks, &[None, None, Some("|->"), None], line, "`obj x |-> y` or `mor f |-> g`")
            .map_err(|e| shift_column(e, shift))?;
        let pair = (n[1].text.to_string(), n[2].text.to_string());
        match n[0].text {
            "obj" => arrow.objects.push(pair),
            "mor" => arrow.morphisms.push(pair),
            other => return Err(perr(line, col, format!("expected `obj` or `mor`, found `{other}`"))),
        }
    }
    Ok(DiagramFile {
        variance: variance.ok_or_else(|| perr(1, 1, "missing `variance = left|right`"))?,
        index: index.ok_or_else(|| perr(1, 1, "missing [index]"))?,
        objects,
        arrows,
    })
}

fn shift_column(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column: column + by,
            message,
        },
        other => other,
    }
}

impl DiagramFile {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "variance = {}\n[index] {}\n",
            match self.variance {
                Variance::Left => "left",
                Variance::Right => "right",
            },
            self.index
        );
        for (name, path) in &self.objects {
            out.push_str(&format!("[object {name}] {path}\n"));
        }
        for a in &self.arrows {
            out.push_str(&format!("[arrow {} : {} -> {}]\n", a.name, a.source, a.target));
            for (x, y) in &a.objects {
                out.push_str(&format!("obj {x} |-> {y}\n"));
            }
            for (f, g) in &a.morphisms {
                out.push_str(&format!("mor {f} |-> {g}\n"));
            }
        }
        out
    }

    /// Loads the referenced categories and checks the result is a diagram.
    pub fn resolve(&self, load: impl Fn(&str) -> Result<RelativeCategory>) -> Result<DiagramOfRelCats> {
        let index = load(&self.index).map_err(|e| e.context(format!("index {}", self.index)))?;
        let index = index.base().clone();
        let mut objects = Vec::with_capacity(index.num_objects());
        for x in index.objects() {
            let (_, path) = self
                .objects
                .iter()
                .find(|(n, _)| n == x)
                .ok_or_else(|| Error::Unknown {
                    kind: "diagram value for index object",
                    name: x.clone(),
                })?;
            objects.push(load(path).map_err(|e| e.context(format!("object {x} ({path})")))?);
        }
        for (n, _) in &self.objects {
            if index.object_by_name(n).is_none() {
                return Err(Error::Unknown {
                    kind: "index object",
                    name: n.clone(),
                });
            }
        }
        let mut arrows = Vec::with_capacity(index.num_morphisms());
        for t in 0..index.num_morphisms() {
            let (a, b) = (index.source(t), index.target(t));
            if index.is_identity(t) {
                arrows.push(RelFunctor::identity(objects[a].base()));
                continue;
            }
            let spec = self
                .arrows
                .iter()
                .find(|s| s.name == index.name(t))
                .ok_or_else(|| Error::Unknown {
                    kind: "functor for index arrow",
                    name: index.name(t).to_string(),
                })?;
            let at = |msg: String| perr(spec.line, 1, msg);
            if spec.source != index.object_name(a) || spec.target != index.object_name(b) {
                return Err(at(format!(
                    "arrow {} runs {} -> {} in the index",
                    spec.name,
                    index.object_name(a),
                    index.object_name(b)
                )));
            }
            let (src, tgt) = (objects[a].base(), objects[b].base());
            let mut object_map = Vec::with_capacity(src.num_objects());
            for x in src.objects() {
                let y = spec
                    .objects
                    .iter()
                    .find(|(p, _)| p == x)
                    .map(|(_, q)| q)
                    .ok_or_else(|| at(format!("arrow {}: object {x} is not mapped", spec.name)))?;
                object_map.push(
                    tgt.object_by_name(y)
                        .ok_or_else(|| at(format!("arrow {}: unknown target object {y}", spec.name)))?,
                );
            }
            let mut morphism_map = Vec::with_capacity(src.num_morphisms());
            for f in 0..src.num_morphisms() {
                if src.is_identity(f) {
                    morphism_map.push(tgt.identity(object_map[src.source(f)]));
                    continue;
                }
                let g = spec
                    .morphisms
                    .iter()
                    .find(|(p, _)| p == src.name(f))
                    .map(|(_, q)| q)
                    .ok_or_else(|| at(format!("arrow {}: morphism {} is not mapped", spec.name, src.name(f))))?;
                morphism_map.push(
                    tgt.morphism_by_name(g)
                        .ok_or_else(|| at(format!("arrow {}: unknown target morphism {g}", spec.name)))?,
                );
            }
            for (p, _) in &spec.objects {
                if src.object_by_name(p).is_none() {
                    return Err(at(format!("arrow {}: unknown source object {p}", spec.name)));
                }
            }
            for (p, _) in &spec.morphisms {
                if src.morphism_by_name(p).is_none() {
                    return Err(at(format!("arrow {}: unknown source morphism {p}", spec.name)));
                }
            }
            arrows.push(RelFunctor {
                object_map,
                morphism_map,
            });
        }
        for s in &self.arrows {
            if index.morphism_by_name(&s.name).is_none_or(|t| index.is_identity(t)) {
                return Err(perr(s.line, 1, format!("`{}` is not a non-identity arrow of the index", s.name)));
            }
        }
        let d = DiagramOfRelCats {
            index,
            objects,
            arrows,
            variance: self.variance,
        };
        d.validate()?;
        Ok(d)
    }
}
