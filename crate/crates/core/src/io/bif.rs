//! BIF v0.3 reader and writer.
//!
//! `probability` blocks may use `table` (node state fastest, then the
//! declared parents with the last one fastest among them), explicit
//! `(s1, s2) p1, p2;` rows, or `default` rows. Commas between numbers are
//! optional. `property` statements are accepted and ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{PgmError, Result};
use crate::network::{Network, Variable};

/// Rows whose sum is off by more than this are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;
/// Rows closer to 1 than this are taken verbatim.
const EXACT_ENOUGH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Sym(char),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn is_sym(c: char) -> bool {
    matches!(c, '{' | '}' | '(' | ')' | '[' | ']' | ';' | ',' | '|')
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '/' if chars.peek() == Some(&'/') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = ' ';
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                    }
                    if prev == '*' && c == '/' {
                        closed = true;
                        break;
                    }
                    prev = c;
                }
                if !closed {
                    return Err(PgmError::parse(line, "unterminated comment"));
                }
            }
            '"' => {
                let start = line;
                let mut s = String::new();
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == '"' {
                        closed = true;
                        break;
                    }
                    if c == '\n' {
                        line += 1;
                    }
                    s.push(c);
                }
                if !closed {
                    return Err(PgmError::parse(start, "unterminated string"));
                }
                toks.push((Tok::Word(s), start));
            }
            c if is_sym(c) => toks.push((Tok::Sym(c), line)),
            c => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || is_sym(n) || n == '"' {
                        break;
                    }
                    s.push(n);
                    chars.next();
                }
                toks.push((Tok::Word(s), line));
            }
        }
    }
    Ok(toks)
}

impl Lexer {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .map(|t| t.0.clone())
            .ok_or_else(|| PgmError::parse(self.line(), "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn word(&mut self) -> Result<String> {
        let line = self.line();
        match self.next()? {
            Tok::Word(w) => Ok(w),
            Tok::Sym(c) => Err(PgmError::parse(line, format!("expected a name, found '{c}'"))),
        }
    }

    fn expect(&mut self, sym: char) -> Result<()> {
        let line = self.line();
        match self.next()? {
            Tok::Sym(c) if c == sym => Ok(()),
            other => Err(PgmError::parse(line, format!("expected '{sym}', found {}", show(&other)))),
        }
    }

    fn eat(&mut self, sym: char) -> bool {
        if self.peek() == Some(&Tok::Sym(sym)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn skip_statement(&mut self) -> Result<()> {
        while self.next()? != Tok::Sym(';') {}
        Ok(())
    }

    /// Names separated by optional commas, up to `close`.
    fn name_list(&mut self, close: char) -> Result<Vec<String>> {
        let mut out = Vec::new();
        loop {
            if self.eat(close) {
                return Ok(out);
            }
            if self.eat(',') {
                continue;
            }
            out.push(self.word()?);
        }
    }

    /// Numbers separated by optional commas, up to `;`.
    fn numbers(&mut self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        loop {
            let line = self.line();
            match self.next()? {
                Tok::Sym(';') => return Ok(out),
                Tok::Sym(',') => {}
                Tok::Word(w) => out.push(w.parse::<f64>().map_err(|_| {
                    PgmError::parse(line, format!("invalid probability '{w}'"))
                })?),
                Tok::Sym(c) => return Err(PgmError::parse(line, format!("unexpected '{c}'"))),
            }
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("'{w}'"),
        Tok::Sym(c) => format!("'{c}'"),
    }
}

enum Entry {
    Table(Vec<f64>),
    Row(Vec<String>, Vec<f64>),
    Default(Vec<f64>),
}

struct ProbBlock {
    line: usize,
    node: String,
    parents: Vec<String>,
    entries: Vec<(Entry, usize)>,
}

pub fn parse_bif(text: &str) -> Result<Network> {
    let mut lx = Lexer { toks: lex(text)?, pos: 0 };
    let mut name = String::from("unknown");
    let mut vars: Vec<Variable> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut blocks: Vec<ProbBlock> = Vec::new();

    while lx.peek().is_some() {
        let line = lx.line();
        let kw = lx.word()?;
        match kw.as_str() {
            "network" => {
                name = lx.word()?;
                lx.expect('{')?;
                while !lx.eat('}') {
                    lx.skip_statement()?;
                }
            }
            "variable" => {
                let vname = lx.word()?;
                lx.expect('{')?;
                let mut states = None;
                while !lx.eat('}') {
                    let l = lx.line();
                    let w = lx.word()?;
                    if w == "type" {
                        let kind = lx.word()?;
                        if kind != "discrete" {
                            return Err(PgmError::parse(l, format!("unsupported variable type {kind}")));
                        }
                        lx.expect('[')?;
                        let k_line = lx.line();
                        let k: usize = lx
                            .word()?
                            .parse()
                            .map_err(|_| PgmError::parse(k_line, "invalid cardinality"))?;
                        lx.expect(']')?;
                        lx.expect('{')?;
                        let s = lx.name_list('}')?;
                        lx.expect(';')?;
                        if s.len() != k {
                            return Err(PgmError::parse(
                                l,
                                format!("cardinality mismatch for {vname}: declared {k}, listed {}", s.len()),
                            ));
                        }
                        states = Some(s);
                    } else {
                        lx.skip_statement()?;
                    }
                }
                let states = states
                    .ok_or_else(|| PgmError::parse(line, format!("variable {vname} has no type")))?;
                if index.contains_key(&vname) {
                    return Err(PgmError::parse(line, format!("variable {vname} declared twice")));
                }
                let id = vars.len();
                let var = Variable::new(id, vname.clone(), states)
                    .map_err(|e| PgmError::parse(line, e.to_string()))?;
                index.insert(vname, id);
                vars.push(var);
            }
            "probability" => {
                lx.expect('(')?;
                let node = lx.word()?;
                let mut parents = Vec::new();
                if lx.eat('|') {
                    parents = lx.name_list(')')?;
                } else {
                    lx.eat(',');
                    lx.expect(')')?;
                }
                lx.expect('{')?;
                let mut entries = Vec::new();
                while !lx.eat('}') {
                    let l = lx.line();
                    if lx.eat('(') {
                        let states = lx.name_list(')')?;
                        entries.push((Entry::Row(states, lx.numbers()?), l));
                        continue;
                    }
                    match lx.word()?.as_str() {
                        "table" => entries.push((Entry::Table(lx.numbers()?), l)),
                        "default" => entries.push((Entry::Default(lx.numbers()?), l)),
                        _ => lx.skip_statement()?,
                    }
                }
                blocks.push(ProbBlock { line, node, parents, entries });
            }
            other => return Err(PgmError::parse(line, format!("unexpected keyword '{other}'"))),
        }
    }

    let n = vars.len();
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n];
    let resolve = |name: &str, line: usize| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| PgmError::parse(line, format!("unknown variable {name}")))
    };
    for b in blocks {
        let v = resolve(&b.node, b.line)?;
        if parents[v].is_some() {
            return Err(PgmError::parse(b.line, format!("duplicate probability block for {}", b.node)));
        }
        let ps: Vec<usize> = b
            .parents
            .iter()
            .map(|p| resolve(p, b.line))
            .collect::<Result<_>>()?;
        let card = vars[v].card();
        let n_cfg: usize = ps.iter().map(|&p| vars[p].card()).product();
        let mut filled: Vec<Option<Vec<f64>>> = vec![None; n_cfg];
        let mut default = None;
        for (entry, line) in b.entries {
            match entry {
                Entry::Table(vals) => {
                    if vals.len() != card * n_cfg {
                        return Err(PgmError::parse(
                            line,
                            format!("table for {} has {} values, expected {}", b.node, vals.len(), card * n_cfg),
                        ));
                    }
                    for (cfg, slot) in filled.iter_mut().enumerate() {
                        *slot = Some(vals[cfg * card..(cfg + 1) * card].to_vec());
                    }
                }
                Entry::Default(vals) => {
                    if vals.len() != card {
                        return Err(PgmError::parse(line, format!("cardinality mismatch in default row of {}", b.node)));
                    }
                    default = Some(vals);
                }
                Entry::Row(states, vals) => {
                    if states.len() != ps.len() {
                        return Err(PgmError::parse(
                            line,
                            format!("row of {} names {} parent states, expected {}", b.node, states.len(), ps.len()),
                        ));
                    }
                    if vals.len() != card {
                        return Err(PgmError::parse(
                            line,
                            format!("cardinality mismatch: row of {} has {} values, expected {card}", b.node, vals.len()),
                        ));
                    }
                    let mut cfg = 0;
                    for (&p, s) in ps.iter().zip(&states) {
                        let si = vars[p].state_index(s).ok_or_else(|| {
                            PgmError::parse(line, format!("unknown state {s} of {}", vars[p].name))
                        })?;
                        cfg = cfg * vars[p].card() + si;
                    }
                    filled[cfg] = Some(vals);
                }
            }
        }
        let mut flat = Vec::with_capacity(card * n_cfg);
        for slot in filled {
            let row = slot
                .or_else(|| default.clone())
                .ok_or_else(|| PgmError::parse(b.line, format!("missing CPT row for {}", b.node)))?;
            flat.extend(check_row(row, b.line)?);
        }
        parents[v] = Some(ps);
        rows[v] = flat;
    }
    let parents: Vec<Vec<usize>> = parents
        .into_iter()
        .enumerate()
        .map(|(v, p)| {
            p.ok_or_else(|| PgmError::parse(0, format!("no probability block for {}", vars[v].name)))
        })
        .collect::<Result<_>>()?;
    Network::from_rows(name, vars, parents, rows).map_err(|e| match e {
        PgmError::InvalidNetwork(m) => PgmError::parse(0, m),
        other => other,
    })
}

fn check_row(mut row: Vec<f64>, line: usize) -> Result<Vec<f64>> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(PgmError::parse(line, "probabilities must be finite and nonnegative"));
    }
    let sum: f64 = row.iter().sum();
    let off = (sum - 1.0).abs();
    if off > ROW_SUM_TOLERANCE {
        return Err(PgmError::parse(line, format!("row sum {sum} exceeds tolerance")));
    }
    if off > EXACT_ENOUGH {
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(row)
}

pub(crate) fn quote_if_needed(s: &str) -> String {
    let plain = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if plain {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}

fn push_numbers(out: &mut String, vals: &[f64]) {
    for (i, p) in vals.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // shortest representation that reads back to the same f64
        write!(out, "{p}").unwrap();
    }
}

pub fn write_bif(net: &Network) -> String {
    let mut out = String::new();
    writeln!(out, "network {} {{\n}}", quote_if_needed(&net.name)).unwrap();
    for v in net.variables() {
        let states: Vec<String> = v.states.iter().map(|s| quote_if_needed(s)).collect();
        writeln!(
            out,
            "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}",
            quote_if_needed(&v.name),
            v.card(),
            states.join(", ")
        )
        .unwrap();
    }
    for v in 0..net.n() {
        let name = quote_if_needed(&net.variable(v).name);
        let ps = net.parents(v);
        let rows = net.cpt_rows(v);
        let card = net.card(v);
        if ps.is_empty() {
            write!(out, "probability ( {name} ) {{\n  table ").unwrap();
            push_numbers(&mut out, &rows);
            out.push_str(";\n}\n");
            continue;
        }
        let pnames: Vec<String> = ps.iter().map(|&p| quote_if_needed(&net.variable(p).name)).collect();
        writeln!(out, "probability ( {name} | {} ) {{", pnames.join(", ")).unwrap();
        let mut digits = vec![0usize; ps.len()];
        for row in rows.chunks(card) {
            let states: Vec<String> = ps
                .iter()
                .zip(&digits)
                .map(|(&p, &d)| quote_if_needed(&net.variable(p).states[d]))
                .collect();
            write!(out, "  ({}) ", states.join(", ")).unwrap();
            push_numbers(&mut out, row);
            out.push_str(";\n");
            for k in (0..ps.len()).rev() {
                digits[k] += 1;
                if digits[k] < net.card(ps[k]) {
                    break;
                }
                digits[k] = 0;
            }
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = r#"
network test {
}
// comment
variable A {
  type discrete [ 2 ] { a0, a1 };
  property "note";
}
variable B {
  type discrete [2] { b0, b1 };
}
probability ( A ) {
  table 0.7, 0.3;
}
probability ( B | A ) {
  (a0) 0.8, 0.2;
  (a1) 0.1, 0.9;
}
"#;

    #[test]
    fn parses_two_variable_network() {
        let net = parse_bif(TWO).unwrap();
        assert_eq!(net.name, "test");
        assert_eq!(net.n(), 2);
        assert_eq!(net.parents(1), &[0]);
        assert_eq!(net.cpt_rows(0), vec![0.7, 0.3]);
        assert_eq!(net.cpt_rows(1), vec![0.8, 0.2, 0.1, 0.9]);
    }

    #[test]
    fn round_trip_and_determinism() {
        let net = parse_bif(TWO).unwrap();
        let text = write_bif(&net);
        assert_eq!(text, write_bif(&net));
        let back = parse_bif(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn table_with_parents_and_default() {
        let text = r#"
variable A { type discrete [ 2 ] { x, y }; }
variable B { type discrete [ 3 ] { p, q, r }; }
probability ( A ) { table 0.5 0.5; }
probability ( B | A ) { default 0.2 0.3 0.5; (y) 1 0 0; }
"#;
        let net = parse_bif(text).unwrap();
        assert_eq!(net.cpt_rows(1), vec![0.2, 0.3, 0.5, 1.0, 0.0, 0.0]);
        let text2 = text.replace("default 0.2 0.3 0.5; (y) 1 0 0;", "table 0.2 0.3 0.5 1 0 0;");
        assert_eq!(parse_bif(&text2).unwrap().cpt_rows(1), net.cpt_rows(1));
    }

    #[test]
    fn uniform_root_writes_plain_table() {
        let text = "variable A { type discrete [ 2 ] { s0, s1 }; }\nprobability ( A ) { table 0.5, 0.5; }";
        let out = write_bif(&parse_bif(text).unwrap());
        assert!(out.contains("table 0.5 0.5;"), "{out}");
    }

    #[test]
    fn bad_row_sum() {
        let text = "variable A { type discrete [ 2 ] { s0, s1 }; }\nprobability ( A ) { table 0.5, 0.6; }";
        let err = parse_bif(text).unwrap_err().to_string();
        assert!(err.contains("row sum 1.1 exceeds tolerance"), "{err}");
    }

    #[test]
    fn small_deviation_renormalized() {
        let text = "variable A { type discrete [ 2 ] { s0, s1 }; }\nprobability ( A ) { table 0.5, 0.5000005; }";
        let net = parse_bif(text).unwrap();
        let rows = net.cpt_rows(0);
        assert!((rows.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn structural_errors() {
        let unknown = "variable A { type discrete [ 2 ] { s0, s1 }; }\nprobability ( A | Z ) { table 0.5 0.5; }";
        assert!(parse_bif(unknown).unwrap_err().to_string().contains("unknown variable Z"));
        let card = "variable A { type discrete [ 3 ] { s0, s1 }; }";
        assert!(parse_bif(card).unwrap_err().to_string().contains("cardinality mismatch"));
        let cyc = r#"
variable A { type discrete [ 2 ] { s0, s1 }; }
variable B { type discrete [ 2 ] { s0, s1 }; }
probability ( A | B ) { table 0.5 0.5 0.5 0.5; }
probability ( B | A ) { table 0.5 0.5 0.5 0.5; }
"#;
        assert!(parse_bif(cyc).unwrap_err().to_string().contains("cyclic"));
    }
}
