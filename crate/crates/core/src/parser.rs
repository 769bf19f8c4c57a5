//! Readers for program (`.dl`), hypothesis (`.hyp`) and observation (`.obs`)
//! files.
//!
//! Programs use the usual rule syntax with `not` as negation as failure,
//! `:-` for rules and strong constraints, and `:~ body. [w:]` for weak
//! constraints. Built-in comparisons are written infix (`X != Y`, `N > 50`,
//! `T1 = T + 1`). `%` starts a comment that runs to the end of the line.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::model::{
    record_arity, Atom, BodyElement, CmpOp, Comparison, Expr, Literal, ModelError, Program, Rule, Symbol, Term,
    WeakConstraint,
};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HypothesisDecl {
    pub atom: Atom,
    pub penalty: u64,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ObservationDecl {
    pub literal: Literal,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    Unexpected {
        found: String,
        expected: BTreeSet<&'static str>,
    },
    InvalidCharacter(char),
    ReservedWord,
    IntegerTooLarge,
    ArityClash {
        predicate: Symbol,
        expected: usize,
        found: usize,
    },
    DuplicateHypothesis(Atom),
    NegativeWeight,
    NonGroundHypothesis(Atom),
    NonGroundObservation(Atom),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "unexpected {found}, expected one of: ")?;
                let list: Vec<_> = expected.iter().copied().collect();
                f.write_str(&list.join(", "))
            }
            ParseErrorKind::InvalidCharacter(c) => write!(f, "invalid character {c:?}"),
            ParseErrorKind::ReservedWord => f.write_str("`not` is reserved and cannot be an identifier"),
            ParseErrorKind::IntegerTooLarge => f.write_str("integer literal too large"),
            ParseErrorKind::ArityClash {
                predicate,
                expected,
                found,
            } => write!(
                f,
                "predicate `{predicate}` used with arity {found}, previously {expected}"
            ),
            ParseErrorKind::DuplicateHypothesis(a) => write!(f, "duplicate hypothesis `{a}`"),
            ParseErrorKind::NegativeWeight => f.write_str("penalties must be non-negative"),
            ParseErrorKind::NonGroundHypothesis(a) => write!(f, "hypothesis `{a}` is not ground"),
            ParseErrorKind::NonGroundObservation(a) => write!(f, "observation `{a}` is not ground"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Var(String),
    Anon,
    Int(u64),
    Not,
    If,
    Weak,
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Ne,
    Lt,
    Gt,
    Eq,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Anon => "`_`".into(),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Not => "`not`".into(),
            Tok::If => "`:-`".into(),
            Tok::Weak => "`:~`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, kind| ParseError { line, column, kind };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ':' => match chars.get(i + 1) {
                Some('-') => push(Tok::If, 2, &mut i, &mut col),
                Some('~') => push(Tok::Weak, 2, &mut i, &mut col),
                _ => push(Tok::Colon, 1, &mut i, &mut col),
            },
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Ne, 2, &mut i, &mut col)
                } else {
                    return Err(err(tl, tc, ParseErrorKind::InvalidCharacter('!')));
                }
            }
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '>' => push(Tok::Gt, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let n = s
                    .parse::<u64>()
                    .map_err(|_| err(tl, tc, ParseErrorKind::IntegerTooLarge))?;
                out.push(Token {
                    tok: Tok::Int(n),
                    line: tl,
                    column: tc,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let second = s.chars().nth(1);
                let tok = if s == "_" {
                    Tok::Anon
                } else if s == "not" {
                    if chars.get(i).is_some_and(|c| c.is_whitespace()) {
                        Tok::Not
                    } else {
                        return Err(err(tl, tc, ParseErrorKind::ReservedWord));
                    }
                } else if c.is_ascii_lowercase() || (c == '_' && second.is_some_and(|d| d.is_ascii_lowercase())) {
                    Tok::Ident(s)
                } else {
                    Tok::Var(s)
                };
                out.push(Token {
                    tok,
                    line: tl,
                    column: tc,
                });
            }
            other => return Err(err(tl, tc, ParseErrorKind::InvalidCharacter(other))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

const ATOM: &str = "atom";
const TERM: &str = "term";

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            anon: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        self.error_at(ParseErrorKind::Unexpected {
            found: self.peek().describe(),
            expected: expected.iter().copied().collect(),
        })
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = match self.peek().clone() {
            Tok::Ident(s) => Term::Constant(Symbol::new(&s)),
            Tok::Var(s) => Term::Variable(Symbol::new(&s)),
            Tok::Int(n) => Term::Integer(n),
            Tok::Anon => {
                self.anon += 1;
                Term::Variable(Symbol::new(&format!("_{}", self.anon)))
            }
            _ => return Err(self.unexpected(&[TERM])),
        };
        self.bump();
        Ok(t)
    }

    /// Parses an atom; the current token must be an identifier.
    fn atom(&mut self) -> Result<Atom, ParseError> {
        let Tok::Ident(name) = self.peek().clone() else {
            return Err(self.unexpected(&[ATOM]));
        };
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected(&["`,`", "`)`"])),
                }
            }
        }
        Ok(Atom::new(&name, args))
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn expr_rest(&mut self, first: Term) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Plus {
            self.bump();
            let second = self.term()?;
            Ok(Expr::Sum(first, second))
        } else {
            Ok(Expr::Term(first))
        }
    }

    fn builtin_from(&mut self, first: Term) -> Result<Comparison, ParseError> {
        let left = self.expr_rest(first)?;
        let Some(op) = self.cmp_op() else {
            return Err(self.unexpected(&["`=`", "`!=`", "`<`", "`>`", "`+`"]));
        };
        let t = self.term()?;
        let right = self.expr_rest(t)?;
        Ok(Comparison { left, op, right })
    }

    fn body_element(&mut self) -> Result<BodyElement, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Literal::negative(self.atom()?).into())
            }
            Tok::Ident(_) => {
                let bare = !matches!(self.peek2(), Tok::LParen);
                let is_builtin = bare && matches!(self.peek2(), Tok::Eq | Tok::Ne | Tok::Lt | Tok::Gt | Tok::Plus);
                if is_builtin {
                    let t = self.term()?;
                    return Ok(BodyElement::Builtin(self.builtin_from(t)?));
                }
                let a = self.atom()?;
                if matches!(self.peek(), Tok::Eq | Tok::Ne | Tok::Lt | Tok::Gt | Tok::Plus) {
                    return Err(self.unexpected(&["`,`", "`.`"]));
                }
                Ok(Literal::positive(a).into())
            }
            Tok::Var(_) | Tok::Int(_) | Tok::Anon => {
                let t = self.term()?;
                Ok(BodyElement::Builtin(self.builtin_from(t)?))
            }
            _ => Err(self.unexpected(&[ATOM, "`not`", TERM])),
        }
    }

    fn body(&mut self) -> Result<Vec<BodyElement>, ParseError> {
        let mut body = vec![self.body_element()?];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    body.push(self.body_element()?);
                }
                Tok::Dot => {
                    self.bump();
                    return Ok(body);
                }
                _ => return Err(self.unexpected(&["`,`", "`.`"])),
            }
        }
    }

    fn weight(&mut self) -> Result<Option<u64>, ParseError> {
        if *self.peek() != Tok::LBracket {
            return Ok(None);
        }
        self.bump();
        if *self.peek() == Tok::Minus {
            return Err(self.error_at(ParseErrorKind::NegativeWeight));
        }
        let Tok::Int(w) = *self.peek() else {
            return Err(self.unexpected(&["integer"]));
        };
        self.bump();
        Ok(Some(w))
    }
}

fn arity_check(arities: &mut BTreeMap<Symbol, usize>, atom: &Atom, at: (usize, usize)) -> Result<(), ParseError> {
    record_arity(arities, atom).map_err(|e| match e {
        ModelError::ArityClash {
            predicate,
            expected,
            found,
        } => ParseError {
            line: at.0,
            column: at.1,
            kind: ParseErrorKind::ArityClash {
                predicate,
                expected,
                found,
            },
        },
        ModelError::NonGround(_) => unreachable!("arity checks never report ground-ness"),
    })
}

fn check_body_arities(
    arities: &mut BTreeMap<Symbol, usize>,
    body: &[BodyElement],
    at: (usize, usize),
) -> Result<(), ParseError> {
    for l in body.iter().filter_map(BodyElement::as_literal) {
        arity_check(arities, &l.atom, at)?;
    }
    Ok(())
}

/// Parses a program text into rules, strong constraints and weak constraints.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut program = Program::default();
    let mut arities = BTreeMap::new();
    while !p.at_eof() {
        let start = p.here();
        p.anon = 0;
        match p.peek() {
            Tok::If => {
                p.bump();
                let body = p.body()?;
                check_body_arities(&mut arities, &body, start)?;
                program.rules.push(Rule::constraint(body));
            }
            Tok::Weak => {
                p.bump();
                let body = p.body()?;
                let weight = match p.weight()? {
                    Some(w) => {
                        p.expect(Tok::Colon, "`:`")?;
                        p.expect(Tok::RBracket, "`]`")?;
                        w
                    }
                    None => 1,
                };
                check_body_arities(&mut arities, &body, start)?;
                program.weak_constraints.push(WeakConstraint::new(body, weight));
            }
            Tok::Ident(_) => {
                let head = p.atom()?;
                arity_check(&mut arities, &head, start)?;
                match p.peek() {
                    Tok::Dot => {
                        p.bump();
                        program.rules.push(Rule::fact(head));
                    }
                    Tok::If => {
                        p.bump();
                        let body = p.body()?;
                        check_body_arities(&mut arities, &body, start)?;
                        program.rules.push(Rule::new(head, body));
                    }
                    _ => return Err(p.unexpected(&["`.`", "`:-`"])),
                }
            }
            _ => return Err(p.unexpected(&[ATOM, "`:-`", "`:~`"])),
        }
    }
    Ok(program)
}

/// Parses `atom [w].` / `atom.` lines; a missing penalty defaults to 1.
pub fn parse_hypotheses(text: &str) -> Result<Vec<HypothesisDecl>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut arities = BTreeMap::new();
    while !p.at_eof() {
        let start = p.here();
        let atom = p.atom()?;
        let penalty = match p.weight()? {
            Some(w) => {
                p.expect(Tok::RBracket, "`]`")?;
                w
            }
            None => 1,
        };
        p.expect(Tok::Dot, "`.`")?;
        let err = |kind| ParseError {
            line: start.0,
            column: start.1,
            kind,
        };
        if !atom.is_ground() {
            return Err(err(ParseErrorKind::NonGroundHypothesis(atom)));
        }
        arity_check(&mut arities, &atom, start)?;
        if !seen.insert(atom.clone()) {
            return Err(err(ParseErrorKind::DuplicateHypothesis(atom)));
        }
        out.push(HypothesisDecl { atom, penalty });
    }
    Ok(out)
}

/// Parses `atom.` / `not atom.` lines; duplicates are collapsed, first
/// occurrence order is kept.
pub fn parse_observations(text: &str) -> Result<Vec<ObservationDecl>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut arities = BTreeMap::new();
    while !p.at_eof() {
        let start = p.here();
        let negative = *p.peek() == Tok::Not;
        if negative {
            p.bump();
        }
        let atom = p.atom()?;
        p.expect(Tok::Dot, "`.`")?;
        if !atom.is_ground() {
            return Err(ParseError {
                line: start.0,
                column: start.1,
                kind: ParseErrorKind::NonGroundObservation(atom),
            });
        }
        arity_check(&mut arities, &atom, start)?;
        let literal = if negative {
            Literal::negative(atom)
        } else {
            Literal::positive(atom)
        };
        if seen.insert(literal.clone()) {
            out.push(ObservationDecl { literal });
        }
    }
    Ok(out)
}

/// Parses a list of ground atoms written as facts (`atom.` per entry), as
/// used for candidate solution files.
pub fn parse_atom_list(text: &str) -> Result<Vec<Atom>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out: Vec<Atom> = Vec::new();
    while !p.at_eof() {
        let start = p.here();
        let atom = p.atom()?;
        p.expect(Tok::Dot, "`.`")?;
        if !atom.is_ground() {
            return Err(ParseError {
                line: start.0,
                column: start.1,
                kind: ParseErrorKind::NonGroundHypothesis(atom),
            });
        }
        if !out.contains(&atom) {
            out.push(atom);
        }
    }
    Ok(out)
}

/// Parses a single ground atom such as `offline(c)`.
pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let atom = p.atom()?;
    if !p.at_eof() {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(atom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_program_has_four_rules() {
        let p = parse_program("a :- not b. b :- not a. c :- a. c :- b.").unwrap();
        assert_eq!(p.rules.len(), 4);
        assert_eq!(p.rules[0].negative_body().count(), 1);
        assert!(p.weak_constraints.is_empty());
    }

    #[test]
    fn weak_constraint_weight() {
        let p = parse_program(":~ b. [2:]").unwrap();
        assert_eq!(p.weak_constraints.len(), 1);
        assert_eq!(p.weak_constraints[0].weight, 2);
        assert_eq!(p.weak_constraints[0].body.len(), 1);
        let q = parse_program(":~ a, c.").unwrap();
        assert_eq!(q.weak_constraints[0].weight, 1);
    }

    #[test]
    fn empty_body_is_rejected() {
        let e = parse_program("a :- .").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        match e.kind {
            ParseErrorKind::Unexpected { expected, .. } => assert!(expected.contains(ATOM)),
            k => panic!("unexpected kind {k:?}"),
        }
    }

    #[test]
    fn builtins_parse() {
        let p = parse_program(
            "badTour :- c(I,J), c(I,K), J != K.\n\
             controlled(X) :- share(X,Y,N), share(X,Z,M), controlled(Y), controlled(Z), M + N > 50, Y != Z.\n\
             on(B,L,T1) :- move(B,L,T), T1 = T + 1.",
        )
        .unwrap();
        let builtins: Vec<_> = p
            .rules
            .iter()
            .flat_map(|r| r.body.iter())
            .filter(|b| b.as_literal().is_none())
            .collect();
        assert_eq!(builtins.len(), 4);
        assert_eq!(builtins[3].to_string(), "T1 = T + 1");
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program("moved(B,T) :- move(B,_,T). q :- r(_,_).").unwrap();
        let r = &p.rules[1];
        let args = &r.positive_body().next().unwrap().args;
        assert_ne!(args[0], args[1]);
    }

    #[test]
    fn comments_and_positions() {
        let e = parse_program("% header\na.\nb :- c d.").unwrap_err();
        assert_eq!((e.line, e.column), (3, 8));
    }

    #[test]
    fn arity_clash_is_reported() {
        let e = parse_program("p(a). q :- p(a,b).").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ArityClash { .. }));
    }

    #[test]
    fn not_is_reserved() {
        assert!(matches!(
            parse_program("not(a).").unwrap_err().kind,
            ParseErrorKind::ReservedWord
        ));
    }

    #[test]
    fn hypotheses() {
        let h = parse_hypotheses("offline(a) [1]. offline(b) [1].").unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.iter().all(|d| d.penalty == 1));
        let h = parse_hypotheses("bought(barilla) [500].").unwrap();
        assert_eq!(h[0].penalty, 500);
        let h = parse_hypotheses("x.").unwrap();
        assert_eq!(h[0].penalty, 1);
        assert!(matches!(
            parse_hypotheses("h. h.").unwrap_err().kind,
            ParseErrorKind::DuplicateHypothesis(_)
        ));
        assert!(matches!(
            parse_hypotheses("h [-3].").unwrap_err().kind,
            ParseErrorKind::NegativeWeight
        ));
    }

    #[test]
    fn observations() {
        let o = parse_observations("not offline(a). not offline(e). not reaches(a,e).").unwrap();
        assert_eq!(o.len(), 3);
        assert!(o.iter().all(|d| !d.literal.is_positive()));
        let o = parse_observations("ok.").unwrap();
        assert_eq!(o.len(), 1);
        assert!(o[0].literal.is_positive());
        assert!(matches!(
            parse_observations("p(X).").unwrap_err().kind,
            ParseErrorKind::NonGroundObservation(_)
        ));
        assert_eq!(parse_observations("ok. ok.").unwrap().len(), 1);
    }

    #[test]
    fn reserved_namespace_symbols_parse() {
        let p = parse_program("offline(a) :- _sol(1). _sol(1) :- not _nsol(1).").unwrap();
        assert_eq!(p.rules[1].head.as_ref().unwrap().predicate.as_str(), "_sol");
    }

    #[test]
    fn garbage_is_an_error_not_a_panic() {
        for text in [
            "(",
            ":-",
            ":~ a. [",
            "a(",
            "a :- b(c",
            "X.",
            "a :- X.",
            "é.",
            "!",
            "a :- 1 +",
            "99999999999999999999999.",
        ] {
            assert!(parse_program(text).is_err(), "{text}");
        }
    }
}
