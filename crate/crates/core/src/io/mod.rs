//! Text format for models (`.gsts`), DOT export of state graphs and JSON
//! export of results.
//!
//! Grammar (EBNF; `#` starts a comment that runs to the end of the line):
//!
//! ```text
//! model      = "model" IDENT "{" { item } "}" ;
//! item       = param | var | transition | label ;
//! param      = "param" IDENT "=" NUMBER ";" ;
//! var        = "var" IDENT ":" ( "{" IDENT { "," IDENT } "}" | "[" INT ".." INT "]" )
//!              "init" ( IDENT | INT ) ";" ;
//! transition = ( "timed" IDENT "rate" rexpr
//!              | "immediate" IDENT "prio" INT "weight" NUMBER )
//!              "when" guard "->" "{" { assign } "}" [ tags ] ";" ;
//! rexpr      = NUMBER | IDENT | NUMBER "*" IDENT | IDENT "*" NUMBER ;
//! guard      = conj { "||" conj } ;
//! conj       = unary { "&&" unary } ;
//! unary      = "!" unary | "(" guard ")" | "true" | IDENT cmpop ( IDENT | INT ) ;
//! cmpop      = "==" | "!=" | "<" | "<=" | ">" | ">=" ;
//! assign     = IDENT ":=" ( IDENT | INT | IDENT "+" "1" | IDENT "-" "1" ) ";" ;
//! label      = "label" IDENT ":=" guard ";" ;
//! tags       = "tags" "(" IDENT { "," IDENT } ")" ;
//! IDENT      = [A-Za-z_][A-Za-z0-9_]* , excluding keywords ;
//! INT        = [ "-" ] digit { digit } ;
//! NUMBER     = digit { digit } [ "." digit { digit } ] [ ( "e" | "E" ) [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! Keywords: `model param var init timed immediate rate prio weight when
//! label tags true`. Tags: `cascading escalating common_cause restoration
//! attack internal`.

mod dot;
mod lexer;
mod parser;
mod serialize;

use std::fmt;

use serde::Serialize;

use crate::model::{validate_model, Guard, IssueCode, Model, Severity, ValidationIssue};
use crate::solvers::MeasureResult;

pub use dot::{export_dot, DotOptions};
pub use serialize::serialize_model;

/// Position in source text. Line and column are 1-based; the column
/// counts characters, offset and length count bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, offset: usize, length: usize) -> Self {
        SourceSpan { line, column, offset, length }
    }

    /// From the start of `a` to the end of `b`.
    pub fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
        let end = (b.offset + b.length).max(a.offset + a.length);
        SourceSpan { length: end - a.offset, ..a }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorCode {
    UnexpectedToken,
    UndeclaredIdent,
    TypeMismatch,
    DuplicateName,
    BadLiteral,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::UnexpectedToken => "UNEXPECTED_TOKEN",
            ParseErrorCode::UndeclaredIdent => "UNDECLARED_IDENT",
            ParseErrorCode::TypeMismatch => "TYPE_MISMATCH",
            ParseErrorCode::DuplicateName => "DUPLICATE_NAME",
            ParseErrorCode::BadLiteral => "BAD_LITERAL",
        }
    }

    fn from_issue(code: IssueCode) -> Option<ParseErrorCode> {
        match code {
            IssueCode::UndeclaredIdent => Some(ParseErrorCode::UndeclaredIdent),
            IssueCode::TypeMismatch => Some(ParseErrorCode::TypeMismatch),
            IssueCode::DuplicateName => Some(ParseErrorCode::DuplicateName),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub message: String,
    pub span: SourceSpan,
    pub hint: Option<String>,
}

impl ParseError {
    pub fn new(code: ParseErrorCode, message: String, span: SourceSpan) -> Self {
        ParseError {
            code,
            message,
            span,
            hint: None,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.code.as_str(), self.message)?;
        if let Some(h) = &self.hint {
            write!(f, " (hint: {h})")?;
        }
        Ok(())
    }
}

/// A validation issue attached to the source text it concerns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpannedIssue {
    pub issue: ValidationIssue,
    pub span: SourceSpan,
}

impl fmt::Display for SpannedIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.issue.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev} {}: {}", self.span, self.issue.code.as_str(), self.issue.message)
    }
}

/// Why a model text was rejected. Syntax, name and type errors are parse
/// errors; everything else found by validation is `Invalid`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Parse(Vec<ParseError>),
    Invalid(Vec<SpannedIssue>),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = match self {
            ModelError::Parse(es) => es.iter().map(|e| e.to_string()).collect(),
            ModelError::Invalid(es) => es.iter().map(|e| e.to_string()).collect(),
        };
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ModelError {}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    parse_model_with_warnings(text).map(|(m, _)| m)
}

/// As [`parse_model`], also returning validation warnings.
pub fn parse_model_with_warnings(text: &str) -> Result<(Model, Vec<SpannedIssue>), ModelError> {
    let (model, spans) = parser::parse(text).map_err(ModelError::Parse)?;
    let report = validate_model(&model);
    let mut parse_errors = Vec::new();
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    for issue in report.issues {
        let span = spans.get(issue.location);
        match (issue.severity, ParseErrorCode::from_issue(issue.code)) {
            (Severity::Error, Some(code)) => parse_errors.push(ParseError::new(code, issue.message, span)),
            (Severity::Error, None) => errors.push(SpannedIssue { issue, span }),
            (Severity::Warning, _) => warnings.push(SpannedIssue { issue, span }),
        }
    }
    if !parse_errors.is_empty() {
        parse_errors.sort_by_key(|e| e.span.offset);
        return Err(ModelError::Parse(parse_errors));
    }
    if !errors.is_empty() {
        return Err(ModelError::Invalid(errors));
    }
    Ok((model, warnings))
}

/// Parses a guard expression on its own, without resolving names.
pub fn parse_guard(text: &str) -> Result<Guard, Vec<ParseError>> {
    parser::parse_guard_text(text)
}

/// JSON array of results with fields in the order name, value, method,
/// ci_halfwidth, metadata.
pub fn export_results_json(results: &[MeasureResult]) -> String {
    serde_json::to_string_pretty(results).expect("results serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model m { var x : {a,b} init a; timed t rate 1.0 when x==a -> { x:=b; }; }";

    #[test]
    fn minimal_model() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.variables.len(), 1);
        assert_eq!(m.transitions.len(), 1);
    }

    #[test]
    fn undeclared_variable_position() {
        let text = "model m {\n  var x : {a,b} init a;\n  timed t rate 1.0 when x == a && y == b -> { x := b; };\n}\n";
        match parse_model(text) {
            Err(ModelError::Parse(es)) => {
                assert_eq!(es.len(), 1);
                assert_eq!(es[0].code, ParseErrorCode::UndeclaredIdent);
                assert_eq!((es[0].span.line, es[0].span.column), (3, 35));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn several_errors_in_one_run() {
        let text = "model m {\n param = 1;\n var x : {a} init a;\n timed t rate 1..0 when x == a -> {};\n label l := x ==;\n}";
        match parse_model(text) {
            Err(ModelError::Parse(es)) => assert_eq!(es.len(), 3, "{es:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_errors_keep_spans() {
        let text = "model m {\n  param p = 1;\n  var n : [0..2] init 0;\n  timed up rate p when true -> { n := n + 1; };\n}";
        match parse_model(text) {
            Err(ModelError::Invalid(es)) => {
                assert_eq!(es[0].issue.code, IssueCode::OutOfDomainUpdate);
                assert_eq!(es[0].span.line, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn results_json() {
        assert_eq!(export_results_json(&[]), "[]");
    }
}
