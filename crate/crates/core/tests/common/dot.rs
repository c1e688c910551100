//! Recognizer for the DOT grammar in `tests/fixtures/dot.grammar`.
//! Returns the node ids and edges it saw so tests can inspect structure.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum T {
    Id(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Result<Vec<T>, String> {
    let b: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let mut line_start = true;
    while i < b.len() {
        let c = b[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if line_start && c == '#' {
            while i < b.len() && b[i] != '\n' {
                i += 1;
            }
            continue;
        }
        line_start = false;
        if c == '/' && b.get(i + 1) == Some(&'/') {
            while i < b.len() && b[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && b.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < b.len() && !(b[i] == '*' && b[i + 1] == '/') {
                i += 1;
            }
            if i + 1 >= b.len() {
                return Err("unterminated comment".into());
            }
            i += 2;
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match b.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if b.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(T::Id(s));
            continue;
        }
        if c == '<' {
            let mut depth = 0;
            let start = i;
            loop {
                match b.get(i) {
                    None => return Err("unterminated HTML string".into()),
                    Some('<') => depth += 1,
                    Some('>') => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            i += 1;
            out.push(T::Id(b[start..i].iter().collect()));
            continue;
        }
        let word = |ch: char| ch.is_ascii_alphanumeric() || ch == '_' || ch as u32 >= 0x80;
        if c.is_ascii_alphabetic() || c == '_' || c as u32 >= 0x80 {
            let start = i;
            while i < b.len() && word(b[i]) {
                i += 1;
            }
            out.push(T::Id(b[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_digit() || c == '.' || (c == '-' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.')) {
            let start = i;
            if c == '-' {
                i += 1;
            }
            let mut digits = 0;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
                digits += 1;
            }
            if i < b.len() && b[i] == '.' {
                i += 1;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                    digits += 1;
                }
            }
            if digits == 0 {
                return Err(format!("bad numeral at {start}"));
            }
            out.push(T::Id(b[start..i].iter().collect()));
            continue;
        }
        let two: String = b[i..(i + 2).min(b.len())].iter().collect();
        let sym = match (two.as_str(), c) {
            ("->", _) => "->",
            ("--", _) => "--",
            (_, '{') => "{",
            (_, '}') => "}",
            (_, '[') => "[",
            (_, ']') => "]",
            (_, ';') => ";",
            (_, ',') => ",",
            (_, '=') => "=",
            (_, ':') => ":",
            _ => return Err(format!("unexpected character {c:?}")),
        };
        i += sym.len();
        out.push(T::Sym(sym));
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct DotGraph {
    pub directed: bool,
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
}

struct P {
    t: Vec<T>,
    i: usize,
    directed: bool,
    g: DotGraph,
}

fn kw(t: Option<&T>, k: &str) -> bool {
    matches!(t, Some(T::Id(s)) if s.eq_ignore_ascii_case(k))
}

impl P {
    fn peek(&self) -> Option<&T> {
        self.t.get(self.i)
    }
    fn sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(T::Sym(x)) if *x == s) {
            self.i += 1;
            true
        } else {
            false
        }
    }
    fn need(&mut self, s: &str) -> Result<(), String> {
        if self.sym(s) {
            Ok(())
        } else {
            Err(format!("expected {s} at token {}, found {:?}", self.i, self.peek()))
        }
    }
    fn id(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(T::Id(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            other => Err(format!("expected ID at token {}, found {other:?}", self.i)),
        }
    }
    fn graph(&mut self) -> Result<(), String> {
        if kw(self.peek(), "strict") {
            self.i += 1;
        }
        if kw(self.peek(), "digraph") {
            self.directed = true;
        } else if !kw(self.peek(), "graph") {
            return Err("expected graph or digraph".into());
        }
        self.i += 1;
        if matches!(self.peek(), Some(T::Id(_))) {
            self.i += 1;
        }
        self.need("{")?;
        self.stmt_list()?;
        self.need("}")?;
        if self.i != self.t.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }
    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(T::Sym("}")) | None) {
            self.stmt()?;
            self.sym(";");
        }
        Ok(())
    }
    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut attrs = BTreeMap::new();
        while self.sym("[") {
            while !self.sym("]") {
                let k = self.id()?;
                self.need("=")?;
                let v = self.id()?;
                attrs.insert(k, v);
                if !self.sym(";") {
                    self.sym(",");
                }
            }
        }
        Ok(attrs)
    }
    fn node_id(&mut self) -> Result<String, String> {
        let id = self.id()?;
        if self.sym(":") {
            self.id()?;
            if self.sym(":") {
                self.id()?;
            }
        }
        Ok(id)
    }
    fn subgraph(&mut self) -> Result<(), String> {
        if kw(self.peek(), "subgraph") {
            self.i += 1;
            if matches!(self.peek(), Some(T::Id(_))) {
                self.i += 1;
            }
        }
        self.need("{")?;
        self.stmt_list()?;
        self.need("}")
    }
    fn endpoint(&mut self) -> Result<Option<String>, String> {
        if kw(self.peek(), "subgraph") || matches!(self.peek(), Some(T::Sym("{"))) {
            self.subgraph()?;
            Ok(None)
        } else {
            self.node_id().map(Some)
        }
    }
    fn stmt(&mut self) -> Result<(), String> {
        if kw(self.peek(), "graph") || kw(self.peek(), "node") || kw(self.peek(), "edge") {
            self.i += 1;
            if !matches!(self.peek(), Some(T::Sym("["))) {
                return Err("attr_stmt needs an attribute list".into());
            }
            self.attr_list()?;
            return Ok(());
        }
        if matches!(self.peek(), Some(T::Id(_))) && matches!(self.t.get(self.i + 1), Some(T::Sym("="))) {
            self.i += 2;
            self.id()?;
            return Ok(());
        }
        let first = self.endpoint()?;
        let op = if self.directed { "->" } else { "--" };
        let mut chain = vec![first];
        while self.sym(op) {
            chain.push(self.endpoint()?);
        }
        let attrs = self.attr_list()?;
        if chain.len() == 1 {
            if let Some(n) = &chain[0] {
                self.g.nodes.entry(n.clone()).or_default().extend(attrs);
            }
        } else {
            for w in chain.windows(2) {
                if let (Some(a), Some(b)) = (&w[0], &w[1]) {
                    self.g.edges.push((a.clone(), b.clone(), attrs.clone()));
                }
            }
        }
        Ok(())
    }
}

/// Parses `src` as DOT, or reports the first grammar violation.
pub fn check_dot(src: &str) -> Result<DotGraph, String> {
    let mut p = P {
        t: lex(src)?,
        i: 0,
        directed: false,
        g: DotGraph::default(),
    };
    p.graph()?;
    p.g.directed = p.directed;
    Ok(p.g)
}
