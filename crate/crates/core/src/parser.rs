//! Recursive-descent parser for the annotated rule language.
//!
//! ```text
//! program   := (clause)*
//! clause    := literal annots? ( ":-" body )? "."
//! body      := disj (("," | "&") disj)*
//! disj      := goal ("|" goal)*
//! goal      := "not" goal | "(" body ")" | literal | builtin
//! literal   := "~"? atomname ("(" term ("," term)* ")")?
//! builtin   := term ("=" | "\==" | "<" | ">" | "=<" | ">=") expr
//! expr      := term (("+"|"-") term)*
//! annots    := "[" annot ("," annot)* "]"
//! ```
//!
//! `%` starts a comment that runs to the end of the line.

use std::collections::HashMap;

use crate::error::ParseError;
use crate::kb::KnowledgeBase;
use crate::term::{
    neg_functor, Annotations, ArithOp, Clause, CmpOp, Expr, Goal, Literal, Sym, Term, Var,
};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: [&str; 18] = [
    ":-", "\\==", "=<", ">=", ".", ",", "|", "&", "(", ")", "[", "]", "~", "=", "<", ">", "+", "-",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if c.is_ascii_uppercase() || c == '_' { Tok::Var(word) } else { Tok::Atom(word) };
            out.push(Token { tok, line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits.parse::<i64>().map_err(|_| ParseError::Syntax {
                line: start_line,
                col: start_col,
                expected: "integer within 64 bits".into(),
            })?;
            out.push(Token { tok: Tok::Int(n), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push(Token { tok: Tok::Punct(p), line: start_line, col: start_col });
            }
            None => {
                return Err(ParseError::Syntax {
                    line: start_line,
                    col: start_col,
                    expected: format!("a token, found {c:?}"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: HashMap<String, Var>,
    names: Vec<Sym>,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0, vars: HashMap::new(), names: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError::Syntax { line: t.line, col: t.col, expected: expected.to_string() })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn expect(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("'{p}'"))
        }
    }

    fn reset_vars(&mut self) {
        self.vars.clear();
        self.names.clear();
    }

    fn var(&mut self, name: &str) -> Term {
        if name == "_" {
            let v = Var(self.names.len() as u32);
            self.names.push(Sym::new("_"));
            return Term::Var(v);
        }
        if let Some(v) = self.vars.get(name) {
            return Term::Var(*v);
        }
        let v = Var(self.names.len() as u32);
        self.names.push(Sym::new(name));
        self.vars.insert(name.to_string(), v);
        Term::Var(v)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Var(name) => {
                self.bump();
                Ok(self.var(&name))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Punct("~") => {
                self.bump();
                let inner = self.term()?;
                match inner {
                    Term::Atom(_) | Term::Compound(..) => {
                        Ok(Term::Compound(neg_functor(), vec![inner].into()))
                    }
                    _ => self.error("a literal after '~'"),
                }
            }
            Tok::Atom(name) => {
                self.bump();
                if self.is_punct("(") {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while self.is_punct(",") {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(")")?;
                    Ok(Term::Compound(Sym::new(&name), args.into()))
                } else {
                    Ok(Term::Atom(Sym::new(&name)))
                }
            }
            _ => self.error("a term"),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let t = self.term()?;
        match Literal::from_term(&t) {
            Some(l) => Ok(l),
            None => self.error("a literal"),
        }
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Punct("=") => Some(CmpOp::Eq),
            Tok::Punct("\\==") => Some(CmpOp::NotIdentical),
            Tok::Punct("<") => Some(CmpOp::Lt),
            Tok::Punct(">") => Some(CmpOp::Gt),
            Tok::Punct("=<") => Some(CmpOp::Le),
            Tok::Punct(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let head = self.term()?;
        let mut tail = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => ArithOp::Add,
                Tok::Punct("-") => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            tail.push((op, self.term()?));
        }
        Ok(Expr { head, tail })
    }

    fn goal(&mut self) -> Result<Goal, ParseError> {
        if matches!(self.peek(), Tok::Atom(a) if a == "not")
            && !matches!(self.peek_at(1), Tok::Punct(p) if [",", ".", ")", "|", "&"].contains(p))
        {
            self.bump();
            return Ok(Goal::Not(Box::new(self.goal()?)));
        }
        if self.is_punct("(") {
            self.bump();
            let g = self.body()?;
            self.expect(")")?;
            return Ok(g);
        }
        let t = self.term()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Goal::Cmp(op, t, rhs));
        }
        if t == Term::atom("true") {
            return Ok(Goal::True);
        }
        match Literal::from_term(&t) {
            Some(l) => Ok(Goal::Lit(l)),
            None => self.error("a literal or a comparison"),
        }
    }

    fn disj(&mut self) -> Result<Goal, ParseError> {
        let first = self.goal()?;
        if !self.is_punct("|") {
            return Ok(first);
        }
        let mut branches = vec![first];
        while self.is_punct("|") {
            self.bump();
            branches.push(self.goal()?);
        }
        Ok(Goal::Or(branches))
    }

    fn body(&mut self) -> Result<Goal, ParseError> {
        let first = self.disj()?;
        if !(self.is_punct(",") || self.is_punct("&")) {
            return Ok(first);
        }
        let mut conj = vec![first];
        while self.is_punct(",") || self.is_punct("&") {
            self.bump();
            conj.push(self.disj()?);
        }
        Ok(Goal::And(conj))
    }

    fn annotations(&mut self) -> Result<Annotations, ParseError> {
        let mut ann = Annotations::default();
        if !self.is_punct("[") {
            return Ok(ann);
        }
        self.bump();
        loop {
            let name = match self.bump() {
                Tok::Atom(a) => a,
                _ => {
                    self.pos -= 1;
                    return self.error("'priority' or 'source'");
                }
            };
            self.expect("(")?;
            match name.as_str() {
                "priority" => match self.bump() {
                    Tok::Int(n) => ann.priority = Some(n),
                    _ => {
                        self.pos -= 1;
                        return self.error("an integer priority");
                    }
                },
                "source" => match self.bump() {
                    Tok::Atom(s) => ann.source = Some(Sym::new(&s)),
                    _ => {
                        self.pos -= 1;
                        return self.error("a source symbol");
                    }
                },
                _ => {
                    self.pos -= 2;
                    return self.error("'priority' or 'source'");
                }
            }
            self.expect(")")?;
            if self.is_punct(",") {
                self.bump();
                continue;
            }
            self.expect("]")?;
            return Ok(ann);
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        self.reset_vars();
        let head = self.literal()?;
        let annotations = self.annotations()?;
        let body = if self.is_punct(":-") {
            self.bump();
            self.body()?
        } else {
            Goal::True
        };
        self.expect(".")?;
        Ok(Clause { head, body, annotations, var_names: std::mem::take(&mut self.names) })
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}

/// Parses clauses without the category checks applied by [`parse_program`].
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    while !p.at_eof() {
        clauses.push(p.clause()?);
    }
    Ok(clauses)
}

/// Parses a program and validates the knowledge-clause and abducible restrictions.
pub fn parse_program(text: &str) -> Result<KnowledgeBase, ParseError> {
    let clauses = parse_clauses(text)?;
    validate_clauses(&clauses)?;
    let mut kb = KnowledgeBase::new();
    for c in clauses {
        let tag = crate::kb::Provenance::classify(&c);
        kb.assert(c, tag);
    }
    Ok(kb)
}

/// Checks the clause-category restrictions over a complete set of clauses.
pub fn validate_clauses(clauses: &[Clause]) -> Result<(), ParseError> {
    let knows = Sym::new("knows");
    let abducible = Sym::new("abducible");
    for c in clauses {
        if c.head.pred == knows && !c.head.negated && c.head.args.len() == 2 {
            let ok = Literal::from_term(&c.head.args[1]).is_some_and(|fact| c.body.mentions_literal(&fact));
            if !ok {
                return Err(ParseError::TomRestrictionViolated(c.to_string()));
            }
        }
    }
    for c in clauses {
        if c.head.pred != abducible || c.head.negated || c.head.args.len() != 1 {
            continue;
        }
        let Some(inner) = Literal::from_term(&c.head.args[0]) else { continue };
        let key = inner.key();
        let conflict = clauses.iter().any(|other| !other.is_fact() && other.head.key() == key);
        if conflict {
            return Err(ParseError::AbduciblePredicateConflict(key.to_string()));
        }
    }
    Ok(())
}

/// A parsed query goal together with its variable names.
#[derive(Clone, Debug)]
pub struct Query {
    pub goal: Goal,
    pub var_names: Vec<Sym>,
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text)?;
    let goal = p.body()?;
    if p.is_punct(".") {
        p.bump();
    }
    if !p.at_eof() {
        return p.error("end of query");
    }
    Ok(Query { goal, var_names: p.names })
}

pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(text)?;
    let l = p.literal()?;
    if !p.at_eof() {
        return p.error("end of literal");
    }
    Ok(l)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if !p.at_eof() {
        return p.error("end of term");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn playable_clause_has_four_body_goals() {
        let cs = parse_clauses("playable(C,R) :- colour(C), rank(R), stack(C,S), S=R-1.").unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].head.key().to_string(), "playable/2");
        assert_eq!(cs[0].body.conjuncts().len(), 4);
        assert_eq!(cs[0].to_string(), "playable(C,R) :- colour(C), rank(R), stack(C,S), S = R-1.");
    }

    #[test]
    fn empty_program_is_empty() {
        assert_eq!(parse_program("").unwrap().len(), 0);
        assert_eq!(parse_program("  % only a comment\n").unwrap().len(), 0);
    }

    #[test]
    fn knows_clause_must_call_its_fact() {
        let err = parse_program("knows(A, f(X)) :- g(X).").unwrap_err();
        assert!(matches!(err, ParseError::TomRestrictionViolated(_)));
        parse_program("knows(A, f(X)) :- f(X), g(A).").unwrap();
        parse_program("knows(A, ~f(X)) :- ~f(X).").unwrap();
    }

    #[test]
    fn abducible_heads_cannot_be_rule_heads() {
        let text = "abducible(p(X)) :- q(X).\np(X) :- r(X).";
        assert!(matches!(parse_program(text), Err(ParseError::AbduciblePredicateConflict(_))));
        // facts of an abducible predicate are allowed
        parse_program("abducible(p(X)) :- q(X).\np(a).").unwrap();
    }

    #[test]
    fn annotations_and_disjunctions() {
        let cs = parse_clauses(
            "action(P, play(S)) [priority(2), source(fallback)] :- p(P, S).\n\
             imp [source(abduction)] :- (~a | ~b) & ~c.",
        )
        .unwrap();
        assert_eq!(cs[0].annotations.priority, Some(2));
        assert_eq!(cs[0].annotations.source, Some(Sym::new("fallback")));
        assert!(cs[1].annotations.is_abduction());
        match &cs[1].body {
            Goal::And(gs) => {
                assert!(matches!(&gs[0], Goal::Or(b) if b.len() == 2));
                assert!(matches!(&gs[1], Goal::Lit(l) if l.negated));
            }
            other => panic!("unexpected body {other:?}"),
        }
    }

    #[test]
    fn naf_and_strong_negation_differ() {
        let cs = parse_clauses("p(X) :- q(X), not r(X), not ~s(X), ~t(X).").unwrap();
        let gs = cs[0].body.conjuncts();
        assert!(matches!(&gs[1], Goal::Not(inner) if matches!(**inner, Goal::Lit(ref l) if !l.negated)));
        assert!(matches!(&gs[2], Goal::Not(inner) if matches!(**inner, Goal::Lit(ref l) if l.negated)));
        assert!(matches!(&gs[3], Goal::Lit(l) if l.negated));
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_program("p(a).\nq(b) :- .").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 9)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_program("p(a)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_program("p(a) [priority(N)]."), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let cs = parse_clauses("p :- q(_, _).").unwrap();
        match &cs[0].body {
            Goal::Lit(l) => assert_ne!(l.args[0], l.args[1]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
