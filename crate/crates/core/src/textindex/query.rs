//! Boolean query language.
//!
//! ```text
//! or      := and ( "OR" and )*
//! and     := unary ( "AND"? unary )*      adjacency is an implicit AND
//! unary   := "NOT" unary | primary
//! primary := WORD | "(" or ")"
//! ```
//!
//! Keywords are case-insensitive. A word is passed through the tokenizer, so
//! `ohm's` becomes `ohm AND s`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::tokenize::tokenize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("empty query")]
    Empty,
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("operator {0} is missing an operand")]
    DanglingOperator(String),
    #[error("word {0:?} contains no searchable characters")]
    EmptyTerm(String),
    #[error("query has no positive term; NOT-only queries are not allowed")]
    NoPositiveTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryAst {
    Term(String),
    And(Box<QueryAst>, Box<QueryAst>),
    Or(Box<QueryAst>, Box<QueryAst>),
    Not(Box<QueryAst>),
}

impl QueryAst {
    pub fn term(t: impl Into<String>) -> Self {
        QueryAst::Term(t.into())
    }

    pub fn and(l: QueryAst, r: QueryAst) -> Self {
        QueryAst::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: QueryAst, r: QueryAst) -> Self {
        QueryAst::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: QueryAst) -> Self {
        QueryAst::Not(Box::new(c))
    }

    /// Distinct terms that occur outside every NOT. These define the
    /// candidate set and are the only terms that contribute to scores.
    pub fn positive_terms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_positive(&mut out);
        out
    }

    fn collect_positive<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            QueryAst::Term(t) => {
                out.insert(t);
            }
            QueryAst::And(l, r) | QueryAst::Or(l, r) => {
                l.collect_positive(out);
                r.collect_positive(out);
            }
            QueryAst::Not(_) => {}
        }
    }
}

/// Fully parenthesized form; parses back to the same tree.
impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryAst::Term(t) => f.write_str(t),
            QueryAst::And(l, r) => write!(f, "({l} AND {r})"),
            QueryAst::Or(l, r) => write!(f, "({l} OR {r})"),
            QueryAst::Not(c) => write!(f, "NOT {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    LParen,
    RParen,
    And,
    Or,
    Not,
    Word(String),
}

fn lex(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<Token>| {
        if word.is_empty() {
            return;
        }
        let tok = match word.to_ascii_uppercase().as_str() {
            "AND" => Token::And,
            "OR" => Token::Or,
            "NOT" => Token::Not,
            _ => Token::Word(word.clone()),
        };
        tokens.push(tok);
        word.clear();
    };
    for c in text.chars() {
        match c {
            '(' | ')' => {
                flush(&mut word, &mut tokens);
                tokens.push(if c == '(' { Token::LParen } else { Token::RParen });
            }
            c if c.is_whitespace() => flush(&mut word, &mut tokens),
            c => word.push(c),
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn or(&mut self) -> Result<QueryAst, QueryError> {
        let mut node = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            let rhs = self.operand("OR", Self::and)?;
            node = QueryAst::or(node, rhs);
        }
        Ok(node)
    }

    fn and(&mut self) -> Result<QueryAst, QueryError> {
        let mut node = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::And) => {
                    self.pos += 1;
                    let rhs = self.operand("AND", Self::unary)?;
                    node = QueryAst::and(node, rhs);
                }
                Some(Token::Word(_) | Token::Not | Token::LParen) => {
                    let rhs = self.unary()?;
                    node = QueryAst::and(node, rhs);
                }
                _ => return Ok(node),
            }
        }
    }

    fn unary(&mut self) -> Result<QueryAst, QueryError> {
        if self.peek() == Some(&Token::Not) {
            self.pos += 1;
            let child = self.operand("NOT", Self::unary)?;
            return Ok(QueryAst::not(child));
        }
        self.primary()
    }

    /// Parses the operand after an operator, reporting a dangling operator
    /// when the input ends or a closing/binary token follows instead.
    fn operand(
        &mut self,
        op: &str,
        rule: fn(&mut Self) -> Result<QueryAst, QueryError>,
    ) -> Result<QueryAst, QueryError> {
        match self.peek() {
            None | Some(Token::RParen | Token::And | Token::Or) => {
                Err(QueryError::DanglingOperator(op.to_string()))
            }
            _ => rule(self),
        }
    }

    fn primary(&mut self) -> Result<QueryAst, QueryError> {
        match self.next() {
            Some(Token::Word(w)) => {
                let mut terms = tokenize(&w).into_iter().map(QueryAst::Term);
                let first = terms.next().ok_or(QueryError::EmptyTerm(w))?;
                Ok(terms.fold(first, QueryAst::and))
            }
            Some(Token::LParen) => {
                if self.peek() == Some(&Token::RParen) {
                    return Err(QueryError::Empty);
                }
                let inner = self.or()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(QueryError::Unbalanced),
                }
            }
            Some(Token::RParen) => Err(QueryError::Unbalanced),
            Some(Token::And) => Err(QueryError::DanglingOperator("AND".into())),
            Some(Token::Or) => Err(QueryError::DanglingOperator("OR".into())),
            Some(Token::Not) => unreachable!("NOT is consumed by unary"),
            None => Err(QueryError::Empty),
        }
    }
}

pub fn parse_query(text: &str) -> Result<QueryAst, QueryError> {
    let tokens = lex(text);
    if tokens.is_empty() {
        return Err(QueryError::Empty);
    }
    let mut p = Parser { tokens, pos: 0 };
    let ast = p.or()?;
    match p.peek() {
        None => {}
        Some(Token::RParen) => return Err(QueryError::Unbalanced),
        Some(t) => return Err(QueryError::DanglingOperator(format!("{t:?}").to_uppercase())),
    }
    if ast.positive_terms().is_empty() {
        return Err(QueryError::NoPositiveTerm);
    }
    Ok(ast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use QueryAst as Q;

    fn t(s: &str) -> QueryAst {
        Q::term(s)
    }

    #[test]
    fn examples() {
        assert_eq!(parse_query("shock").unwrap(), t("shock"));
        assert_eq!(
            parse_query("electric AND current").unwrap(),
            Q::and(t("electric"), t("current"))
        );
        assert_eq!(
            parse_query("ohm OR ampere NOT shock").unwrap(),
            Q::or(t("ohm"), Q::and(t("ampere"), Q::not(t("shock"))))
        );
        assert_eq!(parse_query("NOT shock"), Err(QueryError::NoPositiveTerm));
    }

    #[test]
    fn precedence_and_grouping() {
        assert_eq!(
            parse_query("a b c").unwrap(),
            Q::and(Q::and(t("a"), t("b")), t("c"))
        );
        assert_eq!(
            parse_query("a or b and c").unwrap(),
            Q::or(t("a"), Q::and(t("b"), t("c")))
        );
        assert_eq!(
            parse_query("(a OR b) c").unwrap(),
            Q::and(Q::or(t("a"), t("b")), t("c"))
        );
        assert_eq!(
            parse_query("NOT (a OR b) AND c").unwrap(),
            Q::and(Q::not(Q::or(t("a"), t("b"))), t("c"))
        );
        assert_eq!(parse_query("NOT NOT a"), Err(QueryError::NoPositiveTerm));
        assert_eq!(parse_query("a OR NOT b").unwrap(), Q::or(t("a"), Q::not(t("b"))));
    }

    #[test]
    fn words_go_through_tokenizer() {
        assert_eq!(parse_query("Ohm's").unwrap(), Q::and(t("ohm"), t("s")));
        assert_eq!(parse_query("SHOCK").unwrap(), t("shock"));
        assert_eq!(parse_query("(ohm)").unwrap(), t("ohm"));
        assert_eq!(parse_query("---"), Err(QueryError::EmptyTerm("---".into())));
    }

    #[test]
    fn errors() {
        assert_eq!(parse_query(""), Err(QueryError::Empty));
        assert_eq!(parse_query("   "), Err(QueryError::Empty));
        assert_eq!(parse_query("()"), Err(QueryError::Empty));
        assert_eq!(parse_query("(a"), Err(QueryError::Unbalanced));
        assert_eq!(parse_query("a)"), Err(QueryError::Unbalanced));
        assert_eq!(parse_query("a OR"), Err(QueryError::DanglingOperator("OR".into())));
        assert_eq!(parse_query("AND a"), Err(QueryError::DanglingOperator("AND".into())));
        assert_eq!(parse_query("a AND OR b"), Err(QueryError::DanglingOperator("AND".into())));
        assert_eq!(parse_query("a NOT"), Err(QueryError::DanglingOperator("NOT".into())));
        assert_eq!(parse_query("(a AND) b"), Err(QueryError::DanglingOperator("AND".into())));
        assert_eq!(parse_query("NOT a NOT b"), Err(QueryError::NoPositiveTerm));
    }

    #[test]
    fn positive_terms_skip_negations() {
        let q = parse_query("a OR (b NOT (c OR d)) a").unwrap();
        assert_eq!(q.positive_terms().into_iter().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn display_round_trips() {
        for q in ["a", "a b OR c", "NOT (a OR b) AND c", "x OR NOT y z", "a NOT NOT b"] {
            let ast = parse_query(q).unwrap();
            assert_eq!(parse_query(&ast.to_string()).unwrap(), ast, "{q}");
        }
    }
}
