//! Plain-text system definitions:
//!
//! ```text
//! # comment
//! name = heisenberg
//! dim = 3
//! nfields = 2
//! step = 2
//! domain = [-1,1]x[-1,1]x[-1,1]
//! field 1 smooth C{4}: 1 ; 0 ; -x2/2
//! field 2 smooth C{4}: 0 ; 1 ; x1/2
//! drift smooth C{2}: 0 ; 0 ; 0
//! function u: x3
//! ```

use super::{DomainBox, Field, VectorFieldSystem};
use crate::error::{Error, Result};
use crate::expr::{Expression, Smoothness};

fn at(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn shift(e: Error, line: usize, offset: usize) -> Error {
    match e {
        Error::Parse {
            line: l,
            column,
            message,
        } => Error::Parse {
            line: line + l - 1,
            column: if l == 1 { offset + column } else { column },
            message,
        },
        other => other,
    }
}

fn parse_domain(text: &str, line: usize, offset: usize) -> Result<DomainBox> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in text.split('x') {
        let t = part.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| at(line, offset, format!("malformed interval '{}'", t)))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| at(line, offset, format!("malformed interval '{}'", t)))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| at(line, offset, format!("bad bound '{}'", a.trim())))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|_| at(line, offset, format!("bad bound '{}'", b.trim())))?;
        lo.push(a);
        hi.push(b);
    }
    DomainBox::new(lo, hi).map_err(|e| at(line, offset, e.to_string()))
}

fn parse_components(
    text: &str,
    dim: usize,
    line: usize,
    offset: usize,
) -> Result<Vec<Expression>> {
    let mut out = Vec::new();
    let mut base = offset;
    for part in text.split(';') {
        out.push(Expression::parse(part, dim).map_err(|e| shift(e, line, base))?);
        base += part.chars().count() + 1;
    }
    if out.len() != dim {
        return Err(at(
            line,
            offset,
            format!("expected {} components, found {}", dim, out.len()),
        ));
    }
    Ok(out)
}

fn header_value(line: &str, key: &str) -> Option<String> {
    let (k, v) = line.split_once('=')?;
    if k.trim() == key {
        Some(v.trim().to_string())
    } else {
        None
    }
}

/// Parses a system definition; errors carry the line and column.
pub fn parse_system(text: &str) -> Result<VectorFieldSystem> {
    let mut name = String::from("system");
    let mut dim: Option<usize> = None;
    let mut nfields: Option<usize> = None;
    let mut step: Option<usize> = None;
    let mut domain: Option<DomainBox> = None;
    let mut fields: Vec<Option<Field>> = Vec::new();
    let mut drift: Option<Field> = None;
    let mut functions = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let trimmed = content.trim();
        let need_dim = |d: Option<usize>| {
            d.ok_or_else(|| at(line_no, indent + 1, "'dim' must precede fields"))
        };
        if let Some(v) = header_value(trimmed, "name") {
            name = v;
        } else if let Some(v) = header_value(trimmed, "dim") {
            let d: usize = v
                .parse()
                .map_err(|_| at(line_no, indent + 1, format!("bad dimension '{}'", v)))?;
            if d == 0 || d > 16 {
                return Err(at(line_no, indent + 1, "dimension must be in 1..=16"));
            }
            dim = Some(d);
        } else if let Some(v) = header_value(trimmed, "nfields") {
            let n: usize = v
                .parse()
                .map_err(|_| at(line_no, indent + 1, format!("bad field count '{}'", v)))?;
            nfields = Some(n);
            fields = vec![None; n];
        } else if let Some(v) = header_value(trimmed, "step") {
            step = Some(
                v.parse()
                    .map_err(|_| at(line_no, indent + 1, format!("bad step '{}'", v)))?,
            );
        } else if let Some(v) = header_value(trimmed, "domain") {
            let off = raw.find('=').map_or(1, |k| k + 2);
            domain = Some(parse_domain(&v, line_no, off)?);
        } else if trimmed.starts_with("field") || trimmed.starts_with("drift") {
            let d = need_dim(dim)?;
            let colon = content
                .find(':')
                .ok_or_else(|| at(line_no, indent + 1, "expected ':' before components"))?;
            let head: Vec<&str> = content[..colon].split_whitespace().collect();
            let (slot, rest) = if head[0] == "drift" {
                (None, &head[1..])
            } else {
                let k: usize = head
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| at(line_no, indent + 1, "expected a field number"))?;
                (Some(k), &head[2..])
            };
            if rest.len() != 2 || rest[0] != "smooth" {
                return Err(at(
                    line_no,
                    indent + 1,
                    "expected 'smooth C{k}' or 'smooth C{k,1}'",
                ));
            }
            let smooth = Smoothness::parse(rest[1]).ok_or_else(|| {
                at(line_no, indent + 1, format!("bad smoothness '{}'", rest[1]))
            })?;
            let comps = parse_components(&content[colon + 1..], d, line_no, colon + 1)?;
            let field = Field::new(comps, smooth);
            match slot {
                None => {
                    if drift.is_some() {
                        return Err(at(line_no, indent + 1, "duplicate drift"));
                    }
                    drift = Some(field);
                }
                Some(k) => {
                    if nfields.is_none() {
                        return Err(at(line_no, indent + 1, "'nfields' must precede fields"));
                    }
                    if k == 0 || k > fields.len() {
                        return Err(at(
                            line_no,
                            indent + 1,
                            format!("field number {} outside 1..={}", k, fields.len()),
                        ));
                    }
                    if fields[k - 1].is_some() {
                        return Err(at(line_no, indent + 1, format!("duplicate field {}", k)));
                    }
                    fields[k - 1] = Some(field);
                }
            }
        } else if let Some(rest) = trimmed.strip_prefix("function") {
            let d = need_dim(dim)?;
            let (fname, body) = rest
                .split_once(':')
                .ok_or_else(|| at(line_no, indent + 1, "expected 'function NAME: expr'"))?;
            let off = raw.find(':').map_or(0, |k| k + 1);
            let e = Expression::parse(body, d).map_err(|e| shift(e, line_no, off))?;
            functions.push((fname.trim().to_string(), e));
        } else {
            return Err(at(line_no, indent + 1, format!("unrecognised line '{}'", trimmed)));
        }
    }

    let missing = |what: &str| Error::System(format!("missing '{}' line", what));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    nfields.ok_or_else(|| missing("nfields"))?;
    let step = step.ok_or_else(|| missing("step"))?;
    let domain = domain.ok_or_else(|| missing("domain"))?;
    if domain.dim() != dim {
        return Err(Error::System(format!(
            "domain has {} intervals but dim = {}",
            domain.dim(),
            dim
        )));
    }
    let fields = fields
        .into_iter()
        .enumerate()
        .map(|(k, f)| f.ok_or_else(|| Error::System(format!("field {} is not defined", k + 1))))
        .collect::<Result<Vec<_>>>()?;
    let mut sys = VectorFieldSystem::new(&name, fields, drift, step, domain)?;
    sys.functions = functions;
    Ok(sys)
}

fn fmt_bound(v: f64) -> String {
    format!("{}", v)
}

/// Serialises a system in the definition format accepted by [`parse_system`].
pub fn system_to_text(sys: &VectorFieldSystem) -> String {
    let mut s = String::new();
    s.push_str(&format!("name = {}\n", sys.name));
    s.push_str(&format!("dim = {}\n", sys.dim));
    s.push_str(&format!("nfields = {}\n", sys.n()));
    s.push_str(&format!("step = {}\n", sys.step));
    let dom: Vec<String> = sys
        .domain
        .lo
        .iter()
        .zip(&sys.domain.hi)
        .map(|(a, b)| format!("[{},{}]", fmt_bound(*a), fmt_bound(*b)))
        .collect();
    s.push_str(&format!("domain = {}\n", dom.join("x")));
    let comps = |f: &Field| {
        f.coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ; ")
    };
    for (k, f) in sys.fields.iter().enumerate() {
        s.push_str(&format!(
            "field {} smooth {}: {}\n",
            k + 1,
            f.smoothness,
            comps(f)
        ));
    }
    if let Some(d) = &sys.drift {
        s.push_str(&format!("drift smooth {}: {}\n", d.smoothness, comps(d)));
    }
    for (n, e) in &sys.functions {
        s.push_str(&format!("function {}: {}\n", n, e));
    }
    s
}
