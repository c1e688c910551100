use std::collections::{BTreeSet, HashMap};

use super::lexer::{lex, Tok, Token};
use super::{ParseError, ParseErrorCode, SourceSpan};
use crate::model::{
    Assignment, CmpOp, Comparison, Domain, Guard, GuardOwner, Kind, Label, Location, Model, Parameter, RateExpr, Rhs, Tag, Transition, Value,
    VariableDecl,
};

const KEYWORDS: [&str; 13] = ["model", "param", "var", "init", "timed", "immediate", "rate", "prio", "weight", "when", "label", "tags", "true"];
const ITEM_START: [&str; 5] = ["param", "var", "timed", "immediate", "label"];
/// Guard nesting bound; deeper input is rejected rather than risking the
/// stack.
const MAX_DEPTH: usize = 200;

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Where each part of a parsed model came from.
#[derive(Debug, Default)]
pub(crate) struct SpanMap {
    map: HashMap<Location, SourceSpan>,
}

impl SpanMap {
    pub(crate) fn get(&self, mut loc: Location) -> SourceSpan {
        loop {
            if let Some(s) = self.map.get(&loc) {
                return *s;
            }
            let parent = loc.parent();
            if parent == loc {
                return self.map.get(&Location::Model).copied().unwrap_or_default();
            }
            loc = parent;
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    depth: usize,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&mut self, code: ParseErrorCode, message: String, span: SourceSpan, hint: Option<&str>) -> PResult<T> {
        let mut e = ParseError::new(code, message, span);
        e.hint = hint.map(str::to_string);
        self.errors.push(e);
        Err(())
    }

    fn unexpected<T>(&mut self, wanted: &str) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.fail(ParseErrorCode::UnexpectedToken, format!("expected {wanted}, found {found}"), span, None)
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{}`", tok.symbol()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.at_keyword(kw) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            Tok::Ident(s) => {
                let span = self.span();
                self.fail(ParseErrorCode::UnexpectedToken, format!("`{s}` is a keyword and cannot name {what}"), span, None)
            }
            _ => self.unexpected(what),
        }
    }

    fn number(&mut self) -> PResult<(f64, SourceSpan)> {
        match self.peek().clone() {
            Tok::Num(raw) => {
                let span = self.bump().span;
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok((v, span)),
                    _ => self.fail(ParseErrorCode::BadLiteral, format!("number `{raw}` is out of range"), span, None),
                }
            }
            _ => self.unexpected("a number"),
        }
    }

    /// Optionally signed integer.
    fn integer(&mut self) -> PResult<(i64, SourceSpan)> {
        let start = self.span();
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Num(raw) => {
                let span = self.bump().span;
                let full = SourceSpan::join(start, span);
                let text = if negative { format!("-{raw}") } else { raw.clone() };
                match text.parse::<i64>() {
                    Ok(v) => Ok((v, full)),
                    Err(_) => self.fail(ParseErrorCode::BadLiteral, format!("`{text}` is not an integer in range"), full, None),
                }
            }
            _ => self.unexpected("an integer"),
        }
    }

    /// Skips to the start of the next item or the end of input.
    /// Skips to the next item keyword, or to a `}` that closes the model.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Ident(s) if ITEM_START.contains(&s.as_str()) => return,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => depth -= 1,
                Tok::LBrace => depth += 1,
                _ => {}
            }
            self.bump();
        }
    }
}

struct Builder {
    model: Model,
    spans: SpanMap,
}

impl Builder {
    fn mark(&mut self, loc: Location, span: SourceSpan) {
        self.spans.map.insert(loc, span);
    }
}

/// Parses a whole model. On syntax errors the partial model is discarded.
pub(crate) fn parse(text: &str) -> Result<(Model, SpanMap), Vec<ParseError>> {
    let (tokens, lex_errors) = lex(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
        depth: 0,
    };
    let mut b = Builder {
        model: Model::new(""),
        spans: SpanMap::default(),
    };
    let _ = parse_model(&mut p, &mut b);
    if p.errors.is_empty() {
        Ok((b.model, b.spans))
    } else {
        p.errors.sort_by_key(|e| e.span.offset);
        Err(p.errors)
    }
}

fn parse_model(p: &mut Parser, b: &mut Builder) -> PResult<()> {
    p.keyword("model")?;
    let (name, span) = p.ident("the model")?;
    b.model.name = name;
    b.mark(Location::Model, span);
    p.expect(Tok::LBrace)?;
    loop {
        match p.peek().clone() {
            Tok::RBrace => {
                p.bump();
                break;
            }
            Tok::Eof => return p.unexpected("`}` closing the model"),
            _ => {
                if parse_item(p, b).is_err() {
                    p.recover();
                }
            }
        }
    }
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input after the model");
    }
    Ok(())
}

fn parse_item(p: &mut Parser, b: &mut Builder) -> PResult<()> {
    let kw = match p.peek() {
        Tok::Ident(s) => s.clone(),
        _ => return p.unexpected("`param`, `var`, `timed`, `immediate` or `label`"),
    };
    match kw.as_str() {
        "param" => {
            p.bump();
            let (name, span) = p.ident("a parameter")?;
            p.expect(Tok::Eq)?;
            let (value, _) = p.number()?;
            p.expect(Tok::Semi)?;
            b.mark(Location::Parameter(b.model.parameters.len()), span);
            b.model.parameters.push(Parameter { name, value });
        }
        "var" => {
            p.bump();
            let (name, span) = p.ident("a variable")?;
            p.expect(Tok::Colon)?;
            let domain = match p.peek() {
                Tok::LBrace => {
                    p.bump();
                    let mut values = vec![p.ident("an enum value")?.0];
                    while *p.peek() == Tok::Comma {
                        p.bump();
                        values.push(p.ident("an enum value")?.0);
                    }
                    p.expect(Tok::RBrace)?;
                    Domain::Enum(values)
                }
                Tok::LBracket => {
                    p.bump();
                    let (lo, _) = p.integer()?;
                    p.expect(Tok::DotDot)?;
                    let (hi, _) = p.integer()?;
                    p.expect(Tok::RBracket)?;
                    Domain::Range { lo, hi }
                }
                _ => return p.unexpected("`{` or `[` starting a domain"),
            };
            p.keyword("init")?;
            let init = literal(p)?;
            p.expect(Tok::Semi)?;
            b.mark(Location::Variable(b.model.variables.len()), span);
            b.model.variables.push(VariableDecl { name, domain, init });
        }
        "timed" | "immediate" => {
            p.bump();
            let ti = b.model.transitions.len();
            let (name, span) = p.ident("a transition")?;
            let kind = if kw == "timed" {
                p.keyword("rate")?;
                let start = p.span();
                let rate = rate_expr(p)?;
                b.mark(Location::Rate(ti), SourceSpan::join(start, p.prev_span()));
                Kind::Timed { rate }
            } else {
                p.keyword("prio")?;
                let (prio, prio_span) = p.integer()?;
                let priority = match u32::try_from(prio) {
                    Ok(v) => v,
                    Err(_) => return p.fail(ParseErrorCode::BadLiteral, format!("priority {prio} is not a non-negative 32-bit integer"), prio_span, None),
                };
                p.keyword("weight")?;
                let (weight, _) = p.number()?;
                Kind::Immediate { priority, weight }
            };
            p.keyword("when")?;
            let mut atoms = Vec::new();
            let guard = guard(p, &mut atoms)?;
            p.expect(Tok::Arrow)?;
            p.expect(Tok::LBrace)?;
            let mut update = Vec::new();
            let mut update_spans = Vec::new();
            while *p.peek() != Tok::RBrace {
                let start = p.span();
                update.push(assignment(p)?);
                update_spans.push(SourceSpan::join(start, p.prev_span()));
            }
            p.bump();
            let mut tags = BTreeSet::new();
            if p.at_keyword("tags") {
                p.bump();
                p.expect(Tok::LParen)?;
                loop {
                    let (tag, span) = p.ident("a tag")?;
                    match Tag::from_name(&tag) {
                        Some(t) => {
                            tags.insert(t);
                        }
                        None => {
                            let known: Vec<&str> = Tag::ALL.iter().map(|t| t.as_str()).collect();
                            let hint = format!("known tags: {}", known.join(", "));
                            return p.fail(ParseErrorCode::UndeclaredIdent, format!("unknown tag `{tag}`"), span, Some(&hint));
                        }
                    }
                    if *p.peek() == Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
                p.expect(Tok::RParen)?;
            }
            p.expect(Tok::Semi)?;
            b.mark(Location::Transition(ti), span);
            for (atom, s) in atoms.into_iter().enumerate() {
                b.mark(
                    Location::GuardAtom {
                        owner: GuardOwner::Transition(ti),
                        atom,
                    },
                    s,
                );
            }
            for (index, s) in update_spans.into_iter().enumerate() {
                b.mark(Location::Assignment { transition: ti, index }, s);
            }
            b.model.transitions.push(Transition {
                name,
                kind,
                guard,
                update,
                tags,
            });
        }
        "label" => {
            p.bump();
            let li = b.model.labels.len();
            let (name, span) = p.ident("a label")?;
            p.expect(Tok::Assign)?;
            let mut atoms = Vec::new();
            let predicate = guard(p, &mut atoms)?;
            p.expect(Tok::Semi)?;
            b.mark(Location::Label(li), span);
            for (atom, s) in atoms.into_iter().enumerate() {
                b.mark(
                    Location::GuardAtom {
                        owner: GuardOwner::Label(li),
                        atom,
                    },
                    s,
                );
            }
            b.model.labels.push(Label { name, predicate });
        }
        _ => return p.unexpected("`param`, `var`, `timed`, `immediate` or `label`"),
    }
    Ok(())
}

fn literal(p: &mut Parser) -> PResult<Value> {
    match p.peek() {
        Tok::Ident(_) => Ok(Value::Sym(p.ident("a value")?.0)),
        Tok::Num(_) | Tok::Minus => Ok(Value::Int(p.integer()?.0)),
        _ => p.unexpected("a value"),
    }
}

fn rate_expr(p: &mut Parser) -> PResult<RateExpr> {
    match p.peek() {
        Tok::Num(_) => {
            let (v, _) = p.number()?;
            if *p.peek() == Tok::Star {
                p.bump();
                let (name, _) = p.ident("a parameter")?;
                Ok(RateExpr::Scaled(v, name))
            } else {
                Ok(RateExpr::Literal(v))
            }
        }
        Tok::Ident(_) => {
            let (name, _) = p.ident("a parameter")?;
            if *p.peek() == Tok::Star {
                p.bump();
                let (v, _) = p.number()?;
                Ok(RateExpr::Scaled(v, name))
            } else {
                Ok(RateExpr::Param(name))
            }
        }
        _ => p.unexpected("a rate"),
    }
}

fn assignment(p: &mut Parser) -> PResult<Assignment> {
    let (target, _) = p.ident("a variable")?;
    p.expect(Tok::Assign)?;
    let rhs = match p.peek() {
        Tok::Ident(_) => {
            let (name, _) = p.ident("a value or variable")?;
            match p.peek() {
                Tok::Plus | Tok::Minus => {
                    let inc = *p.peek() == Tok::Plus;
                    p.bump();
                    let (one, span) = p.integer()?;
                    if one != 1 {
                        return p.fail(ParseErrorCode::BadLiteral, format!("only ±1 steps are allowed, found {one}"), span, None);
                    }
                    if inc {
                        Rhs::Inc(name)
                    } else {
                        Rhs::Dec(name)
                    }
                }
                _ => Rhs::Literal(Value::Sym(name)),
            }
        }
        Tok::Num(_) | Tok::Minus => Rhs::Literal(Value::Int(p.integer()?.0)),
        _ => return p.unexpected("a value"),
    };
    p.expect(Tok::Semi)?;
    Ok(Assignment { target, rhs })
}

/// `atoms` receives the span of every comparison in textual order.
fn guard(p: &mut Parser, atoms: &mut Vec<SourceSpan>) -> PResult<Guard> {
    p.depth += 1;
    if p.depth > MAX_DEPTH {
        let span = p.span();
        return p.fail(ParseErrorCode::UnexpectedToken, format!("guard nesting deeper than {MAX_DEPTH}"), span, None);
    }
    let result = disjunction(p, atoms);
    p.depth -= 1;
    result
}

fn disjunction(p: &mut Parser, atoms: &mut Vec<SourceSpan>) -> PResult<Guard> {
    let mut parts = vec![conjunction(p, atoms)?];
    while *p.peek() == Tok::OrOr {
        p.bump();
        parts.push(conjunction(p, atoms)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Guard::Or(parts) })
}

fn conjunction(p: &mut Parser, atoms: &mut Vec<SourceSpan>) -> PResult<Guard> {
    let mut parts = vec![unary(p, atoms)?];
    while *p.peek() == Tok::AndAnd {
        p.bump();
        parts.push(unary(p, atoms)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Guard::And(parts) })
}

fn unary(p: &mut Parser, atoms: &mut Vec<SourceSpan>) -> PResult<Guard> {
    match p.peek().clone() {
        Tok::Bang => {
            p.bump();
            p.depth += 1;
            let inner = if p.depth > MAX_DEPTH {
                let span = p.span();
                p.fail(ParseErrorCode::UnexpectedToken, format!("guard nesting deeper than {MAX_DEPTH}"), span, None)
            } else {
                unary(p, atoms)
            };
            p.depth -= 1;
            Ok(Guard::Not(Box::new(inner?)))
        }
        Tok::LParen => {
            p.bump();
            let g = guard(p, atoms)?;
            p.expect(Tok::RParen)?;
            Ok(g)
        }
        Tok::Ident(s) if s == "true" => {
            p.bump();
            Ok(Guard::True)
        }
        Tok::Ident(_) => {
            let start = p.span();
            let (var, _) = p.ident("a variable")?;
            let op = match p.peek() {
                Tok::EqEq => CmpOp::Eq,
                Tok::Ne => CmpOp::Ne,
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Gt => CmpOp::Gt,
                Tok::Ge => CmpOp::Ge,
                _ => return p.unexpected("a comparison operator"),
            };
            p.bump();
            let value = literal(p)?;
            atoms.push(SourceSpan::join(start, p.prev_span()));
            Ok(Guard::Cmp(Comparison { var, op, value }))
        }
        _ => p.unexpected("a comparison, `!`, `(` or `true`"),
    }
}

/// Parses a standalone guard expression.
pub(crate) fn parse_guard_text(text: &str) -> Result<Guard, Vec<ParseError>> {
    let (tokens, lex_errors) = lex(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
        depth: 0,
    };
    let mut atoms = Vec::new();
    let g = guard(&mut p, &mut atoms);
    if g.is_ok() && *p.peek() != Tok::Eof {
        let _ = p.unexpected::<()>("end of guard");
    }
    match g {
        Ok(g) if p.errors.is_empty() => Ok(g),
        _ => Err(p.errors),
    }
}
