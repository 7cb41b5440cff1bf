//! CPLEX LP text: writer and a reader for the subset the writer produces
//! (plus the common spelling variants).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use super::SolveError;
use crate::encode::{IlpProblem, MappingTable, Objective, Relation, Row, Sense, VarKind, Variable};

const TERMS_PER_LINE: usize = 8;

/// Numeric literal rounded to 12 significant digits.
fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float");
    format!("{rounded}")
}

fn bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        num(x)
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || "_.#[]".contains(c))
        && !matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "free")
}

fn expr(out: &mut String, p: &IlpProblem, terms: &BTreeMap<usize, f64>, constant: f64) {
    let mut parts: Vec<String> = terms.iter().map(|(&v, &k)| format!("{} {}", num(k.abs()), p.variables[v].name)).collect();
    let mut neg: Vec<bool> = terms.values().map(|k| k.is_sign_negative()).collect();
    if constant != 0.0 || parts.is_empty() {
        parts.push(num(constant.abs()));
        neg.push(constant < 0.0);
    }
    for (i, (part, n)) in parts.iter().zip(neg).enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        match (i, n) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(part);
    }
}

/// Writes `p` in CPLEX LP format. Mapping variables are annotated with
/// their matches in leading comments.
pub fn export_lp(p: &IlpProblem, table: &MappingTable) -> Result<String, SolveError> {
    let mut seen = HashSet::new();
    for name in p.variables.iter().map(|v| &v.name).chain(p.rows.iter().map(|r| &r.name)) {
        if !valid_name(name) {
            return Err(SolveError::LpExport(format!("invalid name {name:?}")));
        }
    }
    for v in &p.variables {
        if !seen.insert(v.name.as_str()) {
            return Err(SolveError::LpExport(format!("duplicate variable name {}", v.name)));
        }
    }
    let mut rows = HashSet::new();
    for r in &p.rows {
        if !rows.insert(r.name.as_str()) {
            return Err(SolveError::LpExport(format!("duplicate row name {}", r.name)));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "\\ {} variables, {} rows", p.variables.len(), p.rows.len());
    for (i, mapping, m) in table.iter() {
        if let Some(v) = p.variables.get(i) {
            let _ = writeln!(out, "\\ {} = {mapping} {m}", v.name);
        }
    }
    out.push_str(match p.objective.sense {
        Sense::Min => "Minimize\n obj: ",
        Sense::Max => "Maximize\n obj: ",
    });
    expr(&mut out, p, &p.objective.terms, p.objective.constant);
    out.push_str("\nSubject To\n");
    for r in &p.rows {
        let _ = write!(out, " {}: ", r.name);
        expr(&mut out, p, &r.coeffs, 0.0);
        let _ = writeln!(out, " {} {}", r.relation.symbol(), num(r.rhs));
    }
    out.push_str("Bounds\n");
    for v in &p.variables {
        let _ = writeln!(out, " {} <= {} <= {}", bound(v.lb), v.name, bound(v.ub));
    }
    let ints: Vec<&str> = p.variables.iter().filter(|v| v.is_integral()).map(|v| v.name.as_str()).collect();
    if !ints.is_empty() {
        out.push_str("Binary\n");
        for name in ints {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective(Sense),
    Constraints,
    Bounds,
    Binary,
    General,
    End,
}

fn header(line: &str) -> Option<Section> {
    let l = line.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Section::Objective(Sense::Min),
        "maximize" | "maximise" | "maximum" | "max" => Section::Objective(Sense::Max),
        "subject to" | "such that" | "st" | "s.t." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "binary" | "binaries" | "bin" => Section::Binary,
        "general" | "generals" | "gen" => Section::General,
        "end" => Section::End,
        _ => return None,
    })
}

fn err(line: usize, message: impl Into<String>) -> SolveError {
    SolveError::LpSyntax { line, message: message.into() }
}

fn tokenize(line: &str, lineno: usize, out: &mut Vec<(Tok, usize)>) -> Result<(), SolveError> {
    let b: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            ':' => Tok::Colon,
            '<' | '>' | '=' => {
                let mut j = i + 1;
                if j < b.len() && matches!(b[j], '<' | '>' | '=') {
                    j += 1;
                }
                let op: String = b[i..j].iter().collect();
                i = j;
                let rel = match op.as_str() {
                    "<" | "<=" | "=<" => Relation::Le,
                    ">" | ">=" | "=>" => Relation::Ge,
                    "=" | "==" => Relation::Eq,
                    _ => return Err(err(lineno, format!("unknown operator {op:?}"))),
                };
                out.push((Tok::Rel(rel), lineno));
                continue;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < b.len() && (b[j].is_ascii_digit() || b[j] == '.') {
                    j += 1;
                }
                if j < b.len() && matches!(b[j], 'e' | 'E') {
                    let mut k = j + 1;
                    if k < b.len() && matches!(b[k], '+' | '-') {
                        k += 1;
                    }
                    if k < b.len() && b[k].is_ascii_digit() {
                        j = k;
                        while j < b.len() && b[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let s: String = b[i..j].iter().collect();
                i = j;
                let v = s.parse().map_err(|_| err(lineno, format!("bad number {s:?}")))?;
                out.push((Tok::Num(v), lineno));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < b.len() && (b[j].is_ascii_alphanumeric() || "_.#[]".contains(b[j])) {
                    j += 1;
                }
                let s: String = b[i..j].iter().collect();
                i = j;
                let lower = s.to_ascii_lowercase();
                let tok = if lower == "inf" || lower == "infinity" { Tok::Num(f64::INFINITY) } else { Tok::Name(s) };
                out.push((tok, lineno));
                continue;
            }
            other => return Err(err(lineno, format!("unexpected character {other:?}"))),
        };
        out.push((tok, lineno));
        i += 1;
    }
    Ok(())
}

struct Reader {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_line: usize,
}

impl Reader {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_line, |t| t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn label(&mut self) -> Option<String> {
        if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (self.peek(), self.peek2()) {
            let n = n.clone();
            self.pos += 2;
            return Some(n);
        }
        None
    }

    /// `[±] [num] [name]` terms until a relation, a label, or the end.
    fn expr(&mut self) -> Result<(Vec<(String, f64)>, f64), SolveError> {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        let mut first = true;
        loop {
            let mut sign = 1.0;
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    sign = -1.0;
                }
                Some(Tok::Name(_)) if first && self.peek2() != Some(&Tok::Colon) => {}
                Some(Tok::Num(_)) if first => {}
                _ => break,
            }
            first = false;
            let line = self.line();
            let coef = if let Some(Tok::Num(v)) = self.peek() {
                let v = *v;
                self.pos += 1;
                Some(v)
            } else {
                None
            };
            match (self.peek(), coef) {
                (Some(Tok::Name(_)), _) if self.peek2() != Some(&Tok::Colon) => {
                    let Some(Tok::Name(n)) = self.next() else { unreachable!() };
                    terms.push((n, sign * coef.unwrap_or(1.0)));
                }
                (_, Some(v)) => constant += sign * v,
                _ => return Err(err(line, "expected a coefficient or variable")),
            }
        }
        Ok((terms, constant))
    }

    fn number(&mut self) -> Result<f64, SolveError> {
        let line = self.line();
        let sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1.0
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1.0
            }
            _ => 1.0,
        };
        match self.next() {
            Some(Tok::Num(v)) => Ok(sign * v),
            _ => Err(err(line, "expected a number")),
        }
    }
}

struct Builder {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Builder {
    fn id(&mut self, name: &str) -> usize {
        if let Some(&i) = self.ids.get(name) {
            return i;
        }
        self.ids.insert(name.to_string(), self.names.len());
        self.names.push(name.to_string());
        self.names.len() - 1
    }
}

/// Section, its header line, its tokens with line numbers, and its raw lines.
type RawSection = (Section, usize, Vec<(Tok, usize)>, Vec<(usize, String)>);
/// Optional label, terms, relation, rhs.
type RawRow = (Option<String>, Vec<(usize, f64)>, Relation, f64);

/// Parses LP text written by [`export_lp`] back into a problem. Variables
/// are numbered in `Bounds` order, then by first appearance.
pub fn import_lp(text: &str) -> Result<IlpProblem, SolveError> {
    let mut sections: Vec<RawSection> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = header(line) {
            if sections.last().is_some_and(|l| l.0 == Section::End) {
                return Err(err(lineno, "content after End"));
            }
            sections.push((s, lineno, Vec::new(), Vec::new()));
            continue;
        }
        let Some(cur) = sections.last_mut() else {
            return Err(err(lineno, "expected a section header (Minimize or Maximize)"));
        };
        if cur.0 == Section::End {
            return Err(err(lineno, "content after End"));
        }
        tokenize(line, lineno, &mut cur.2)?;
        cur.3.push((lineno, line.to_string()));
    }
    let Some(first) = sections.first() else { return Err(err(last_line.max(1), "empty LP file")) };
    let sense = match first.0 {
        Section::Objective(s) => s,
        _ => return Err(err(first.1, "the objective section must come first")),
    };
    if !sections.iter().any(|s| s.0 == Section::End) {
        return Err(err(last_line, "missing End"));
    }
    let mut b = Builder { names: Vec::new(), ids: HashMap::new() };
    let mut bounds: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut binaries: HashSet<usize> = HashSet::new();
    // bounds first so they fix the numbering
    for (sec, _, _, lines) in &sections {
        if *sec != Section::Bounds {
            continue;
        }
        for (lineno, line) in lines {
            let mut toks = Vec::new();
            tokenize(line, *lineno, &mut toks)?;
            let (name, lo, hi) = parse_bound(&toks, *lineno)?;
            let id = b.id(&name);
            let e = bounds.entry(id).or_insert((0.0, f64::INFINITY));
            if let Some(lo) = lo {
                e.0 = lo;
            }
            if let Some(hi) = hi {
                e.1 = hi;
            }
        }
    }
    let mut objective = Objective { sense, ..Objective::default() };
    let mut rows: Vec<RawRow> = Vec::new();
    let mut seen_objective = false;
    for (sec, header_line, toks, _) in sections {
        let end_line = toks.last().map_or(header_line, |t| t.1);
        let mut r = Reader { toks, pos: 0, end_line };
        match sec {
            Section::Objective(_) => {
                if seen_objective {
                    return Err(err(header_line, "second objective section"));
                }
                seen_objective = true;
                r.label();
                let (terms, constant) = r.expr()?;
                if r.peek().is_some() {
                    return Err(err(r.line(), "unexpected token in objective"));
                }
                for (n, k) in terms {
                    let id = b.id(&n);
                    *objective.terms.entry(id).or_insert(0.0) += k;
                }
                objective.constant = constant;
            }
            Section::Constraints => {
                while r.peek().is_some() {
                    let label = r.label();
                    let line = r.line();
                    let (terms, constant) = r.expr()?;
                    let rel = match r.next() {
                        Some(Tok::Rel(rel)) => rel,
                        _ => return Err(err(line, "expected <=, >= or =")),
                    };
                    let rhs = r.number()? - constant;
                    let coeffs = terms.into_iter().map(|(n, k)| (b.id(&n), k)).collect();
                    rows.push((label, coeffs, rel, rhs));
                }
            }
            Section::Binary => {
                while let Some(t) = r.next() {
                    match t {
                        Tok::Name(n) => {
                            binaries.insert(b.id(&n));
                        }
                        _ => return Err(err(r.toks[r.pos - 1].1, "expected a variable name")),
                    }
                }
            }
            Section::General => {
                if r.peek().is_some() {
                    return Err(err(r.line(), "general integer variables are not supported"));
                }
            }
            Section::Bounds | Section::End => {}
        }
    }
    let mut p = IlpProblem { objective, ..IlpProblem::default() };
    for (id, name) in b.names.iter().enumerate() {
        let binary = binaries.contains(&id);
        let kind = match (binary, name.starts_with("aux_")) {
            (true, true) => VarKind::Auxiliary,
            (true, false) => VarKind::Binary,
            (false, _) => VarKind::Slack,
        };
        let (lb, ub) = bounds.get(&id).copied().unwrap_or(if binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) });
        p.variables.push(Variable { name: name.clone(), kind, lb, ub });
    }
    for (k, (label, terms, relation, rhs)) in rows.into_iter().enumerate() {
        let mut coeffs = BTreeMap::new();
        for (v, c) in terms {
            *coeffs.entry(v).or_insert(0.0) += c;
        }
        p.rows.push(Row { name: label.unwrap_or_else(|| format!("r{k}")), coeffs, relation, rhs });
    }
    Ok(p)
}

fn parse_bound(toks: &[(Tok, usize)], line: usize) -> Result<(String, Option<f64>, Option<f64>), SolveError> {
    let mut r = Reader { toks: toks.to_vec(), pos: 0, end_line: line };
    let bad = || err(line, "malformed bound");
    let apply = |rel: Relation, v: f64, var_on_left: bool| -> (Option<f64>, Option<f64>) {
        match (rel, var_on_left) {
            (Relation::Eq, _) => (Some(v), Some(v)),
            (Relation::Le, true) | (Relation::Ge, false) => (None, Some(v)),
            (Relation::Ge, true) | (Relation::Le, false) => (Some(v), None),
        }
    };
    if let Some(Tok::Name(n)) = r.peek().cloned() {
        r.pos += 1;
        match r.next() {
            Some(Tok::Name(f)) if f.eq_ignore_ascii_case("free") && r.peek().is_none() => {
                return Ok((n, Some(f64::NEG_INFINITY), Some(f64::INFINITY)));
            }
            Some(Tok::Rel(rel)) => {
                let v = r.number()?;
                if r.peek().is_some() {
                    return Err(bad());
                }
                let (lo, hi) = apply(rel, v, true);
                return Ok((n, lo, hi));
            }
            _ => return Err(bad()),
        }
    }
    let v1 = r.number()?;
    let Some(Tok::Rel(rel1)) = r.next() else { return Err(bad()) };
    let Some(Tok::Name(n)) = r.next() else { return Err(bad()) };
    let (mut lo, mut hi) = apply(rel1, v1, false);
    if r.peek().is_some() {
        let Some(Tok::Rel(rel2)) = r.next() else { return Err(bad()) };
        let v2 = r.number()?;
        let (lo2, hi2) = apply(rel2, v2, true);
        lo = lo2.or(lo);
        hi = hi2.or(hi);
        if r.peek().is_some() {
            return Err(bad());
        }
    }
    Ok((n, lo, hi))
}
