//! CPLEX-style LP text format.
//!
//! The writer lists every variable in the `Bounds` section in declaration
//! order, so reading an exported file back restores the model exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{MilpError, MilpModel, Sense, VarKind, Variable};

const WRAP: usize = 200;

fn push_terms(out: &mut String, model: &MilpModel, terms: &[(usize, i64)], indent: usize) {
    let mut line_len = indent;
    for (pos, &(v, c)) in terms.iter().enumerate() {
        let name = &model.variables()[v].name;
        let piece = match (pos, c) {
            (0, 1) => name.to_string(),
            (0, -1) => format!("- {name}"),
            (0, c) => format!("{c} {name}"),
            (_, 1) => format!(" + {name}"),
            (_, -1) => format!(" - {name}"),
            (_, c) if c < 0 => format!(" - {} {name}", -c),
            (_, c) => format!(" + {c} {name}"),
        };
        if line_len + piece.len() > WRAP && pos > 0 {
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            line_len = indent;
        }
        line_len += piece.len();
        out.push_str(&piece);
    }
}

/// Renders `model` in LP format.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem name: {}", model.name());
    out.push_str("Minimize\n obj: ");
    push_terms(&mut out, model, model.objective(), 6);
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}: ", c.name);
        push_terms(&mut out, model, &c.terms, c.name.len() + 3);
        let _ = writeln!(out, " {} {}", c.sense, c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        let _ = match (v.lower, v.upper) {
            (Some(l), Some(u)) if l == u => writeln!(out, " {} = {l}", v.name),
            (Some(l), Some(u)) => writeln!(out, " {l} <= {} <= {u}", v.name),
            (Some(l), None) => writeln!(out, " {} >= {l}", v.name),
            (None, Some(u)) => writeln!(out, " -inf <= {} <= {u}", v.name),
            (None, None) => writeln!(out, " {} free", v.name),
        };
    }
    for (title, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
        let names: Vec<&str> = model
            .variables()
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for chunk in names.chunks(10) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Generals,
    Binaries,
    Done,
}

fn err(line: usize, message: impl Into<String>) -> MilpError {
    MilpError::LpParse {
        line,
        message: message.into(),
    }
}

fn parse_int(tok: &str, line: usize) -> Result<i64, MilpError> {
    match tok {
        "-inf" | "-infinity" => Ok(i64::MIN),
        "+inf" | "inf" | "infinity" | "+infinity" => Ok(i64::MAX),
        _ => tok
            .parse()
            .map_err(|_| err(line, format!("expected an integer, found `{tok}`"))),
    }
}

struct Builder {
    name: String,
    vars: Vec<Variable>,
    declared: Vec<bool>,
    lookup: HashMap<String, usize>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.lookup.get(name) {
            return i;
        }
        self.lookup.insert(name.to_string(), self.vars.len());
        self.vars.push(Variable {
            name: name.to_string(),
            kind: VarKind::Continuous,
            lower: Some(0),
            upper: None,
        });
        self.declared.push(false);
        self.vars.len() - 1
    }
}

/// Parses `(coef, var)` pairs from a token stream until a sense token or the
/// end. Returns the terms and the index of the first unconsumed token.
fn parse_terms(b: &mut Builder, toks: &[(usize, &str)]) -> Result<(Vec<(usize, i64)>, usize), MilpError> {
    let mut terms = Vec::new();
    let mut pos = 0;
    while pos < toks.len() {
        let (line, t) = toks[pos];
        if matches!(t, "<=" | ">=" | "=" | "=<" | "=>") {
            break;
        }
        let mut sign = 1i64;
        let mut t = t;
        if t == "+" || t == "-" {
            if t == "-" {
                sign = -1;
            }
            pos += 1;
            t = toks.get(pos).ok_or_else(|| err(line, "dangling sign"))?.1;
        }
        let coef = if let Ok(c) = t.parse::<i64>() {
            pos += 1;
            t = toks
                .get(pos)
                .ok_or_else(|| err(line, "coefficient without variable"))?
                .1;
            c
        } else {
            1
        };
        terms.push((b.var(t), sign * coef));
        pos += 1;
    }
    Ok((terms, pos))
}

/// Reads an LP file produced by [`export_lp`] or a compatible writer.
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    let mut b = Builder {
        name: String::new(),
        vars: Vec::new(),
        declared: Vec::new(),
        lookup: HashMap::new(),
    };
    let mut section = Section::Preamble;
    let mut objective_toks: Vec<(usize, String)> = Vec::new();
    let mut row_toks: Vec<(usize, String)> = Vec::new();
    let mut bound_order: Vec<usize> = Vec::new();
    let mut bound_lines: Vec<(usize, String)> = Vec::new();
    let mut kinds: Vec<(usize, String, VarKind)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix('\\') {
            if let Some(name) = rest.trim().strip_prefix("Problem name:") {
                b.name = name.trim().to_string();
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let next = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "maximize" | "maximise" | "max" => return Err(err(line, "only minimisation models are supported")),
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "generals" | "general" | "integers" => Some(Section::Generals),
            "binaries" | "binary" => Some(Section::Binaries),
            "end" => Some(Section::Done),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let toks = trimmed.split_whitespace().map(|t| (line, t.to_string()));
        match section {
            Section::Preamble => return Err(err(line, "content before `Minimize`")),
            Section::Objective => objective_toks.extend(toks),
            Section::Rows => row_toks.extend(toks),
            Section::Bounds => bound_lines.push((line, trimmed.to_string())),
            Section::Generals => kinds.extend(toks.map(|(l, t)| (l, t, VarKind::Integer))),
            Section::Binaries => kinds.extend(toks.map(|(l, t)| (l, t, VarKind::Binary))),
            Section::Done => return Err(err(line, "content after `End`")),
        }
    }

    // bounds first, so that declaration order follows the Bounds section
    for (line, text) in &bound_lines {
        let t: Vec<&str> = text.split_whitespace().collect();
        let (name, lower, upper) = match t.as_slice() {
            [v, "free"] => (*v, None, None),
            [v, "=", x] => {
                let x = parse_int(x, *line)?;
                (*v, Some(x), Some(x))
            }
            [v, ">=", x] => (*v, Some(parse_int(x, *line)?), None),
            [v, "<=", x] => (*v, Some(0), Some(parse_int(x, *line)?)),
            [l, "<=", v, "<=", u] => (*v, Some(parse_int(l, *line)?), Some(parse_int(u, *line)?)),
            _ => return Err(err(*line, format!("unsupported bound `{text}`"))),
        };
        let i = b.var(name);
        bound_order.push(i);
        b.vars[i].lower = lower.filter(|&x| x != i64::MIN);
        b.vars[i].upper = upper.filter(|&x| x != i64::MAX);
        b.declared[i] = true;
    }

    let obj_refs: Vec<(usize, &str)> = objective_toks.iter().map(|(l, t)| (*l, t.as_str())).collect();
    let obj_body = match obj_refs.first() {
        Some((_, t)) if t.ends_with(':') => &obj_refs[1..],
        _ => &obj_refs[..],
    };
    let (objective, used) = parse_terms(&mut b, obj_body)?;
    if used != obj_body.len() {
        return Err(err(obj_body[used].0, "unexpected token in objective"));
    }

    let refs: Vec<(usize, &str)> = row_toks.iter().map(|(l, t)| (*l, t.as_str())).collect();
    let mut rows = Vec::new();
    let mut pos = 0;
    while pos < refs.len() {
        let (line, head) = refs[pos];
        let name = head
            .strip_suffix(':')
            .ok_or_else(|| err(line, format!("expected `name:`, found `{head}`")))?
            .to_string();
        pos += 1;
        let (terms, used) = parse_terms(&mut b, &refs[pos..])?;
        pos += used;
        let (line, sense_tok) = *refs.get(pos).ok_or_else(|| err(line, "row without sense"))?;
        let sense = match sense_tok {
            "<=" | "=<" => Sense::Le,
            ">=" | "=>" => Sense::Ge,
            "=" => Sense::Eq,
            _ => return Err(err(line, format!("bad sense `{sense_tok}`"))),
        };
        let (line, rhs_tok) = *refs
            .get(pos + 1)
            .ok_or_else(|| err(line, "row without right-hand side"))?;
        rows.push((name, terms, sense, parse_int(rhs_tok, line)?));
        pos += 2;
    }

    for (line, name, kind) in kinds {
        let i = *b
            .lookup
            .get(&name)
            .ok_or_else(|| err(line, format!("`{name}` is not used anywhere")))?;
        b.vars[i].kind = kind;
        if kind == VarKind::Binary && !b.declared[i] {
            b.vars[i].upper = Some(1);
        }
    }

    // declared variables in Bounds order, then the rest by first use
    let mut order: Vec<usize> = bound_order;
    order.extend((0..b.vars.len()).filter(|&i| !b.declared[i]));
    let mut remap = vec![0; b.vars.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let mut model = MilpModel::new(b.name.clone());
    for &old in &order {
        let v = &b.vars[old];
        model.add_variable(v.name.clone(), v.kind, v.lower, v.upper)?;
    }
    model.set_objective(objective.into_iter().map(|(v, c)| (remap[v], c)));
    for (name, terms, sense, rhs) in rows {
        model.add_constraint(name, terms.into_iter().map(|(v, c)| (remap[v], c)), sense, rhs);
    }
    model.rebuild_index();
    Ok(model)
}
