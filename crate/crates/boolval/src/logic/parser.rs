//! Recursive-descent parser for the concrete formula grammar.

use thiserror::Error;

use super::{Formula, Signature, Term};

/// Default cap on formula nesting depth.
pub const DEFAULT_MAX_DEPTH: usize = 32;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at byte {pos}: not a variable (variables are lowercase) and not in the signature")]
    UnknownSymbol { pos: usize, name: String },
    #[error("symbol `{symbol}` at byte {pos} expects {expected} arguments, found {found}")]
    Arity {
        pos: usize,
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot bind `{name}` at byte {pos}: it is a signature symbol")]
    BindsSymbol { pos: usize, name: String },
    #[error("formula depth exceeds the bound {0}")]
    TooDeep(usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Not,
    And,
    Or,
    Implies,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            '.' => {
                toks.push((i, Tok::Dot));
                i += 1;
            }
            '=' => {
                toks.push((i, Tok::Eq));
                i += 1;
            }
            '~' => {
                toks.push((i, Tok::Not));
                i += 1;
            }
            '&' => {
                toks.push((i, Tok::And));
                i += 1;
            }
            '|' => {
                toks.push((i, Tok::Or));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Implies));
                    i += 2;
                } else {
                    return Err(ParseError::Syntax {
                        pos: i,
                        msg: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_owned())));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    lexer: Lexer,
    sig: &'a Signature,
    bound: Vec<String>,
    // Every identifier occurring in the input, plus fresh names already
    // handed out; renamed binders must avoid all of them or they could
    // capture a variable that appears later in the text.
    used: std::collections::BTreeSet<String>,
    max_depth: usize,
    end: usize,
}

impl Lexer {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn peek2(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos + 1)
    }

    fn peek3(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos + 2)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
}

fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl<'a> Parser<'a> {
    fn expect(&mut self, tok: Tok, what: &str) -> Result<usize, ParseError> {
        match self.lexer.next() {
            Some((pos, t)) if t == tok => Ok(pos),
            Some((pos, _)) => Err(ParseError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
            None => Err(ParseError::Syntax {
                pos: self.end,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    /// Picks a fresh variable name for a shadowed binder: `x` becomes `x1`,
    /// `x2`, ... skipping anything already used in the input.
    fn fresh_name(&mut self, base: &str) -> String {
        let stem: String = base
            .trim_end_matches(|c: char| c.is_ascii_digit())
            .to_owned();
        let mut n = 1;
        loop {
            let candidate = format!("{stem}{n}");
            if !self.used.contains(&candidate) && !self.sig.has_symbol(&candidate) {
                self.used.insert(candidate.clone());
                return candidate;
            }
            n += 1;
        }
    }

    fn formula(&mut self, depth: usize) -> Result<Formula, ParseError> {
        if depth > self.max_depth {
            return Err(ParseError::TooDeep(self.max_depth));
        }
        let lhs = self.or_expr(depth)?;
        if matches!(self.lexer.peek(), Some((_, Tok::Implies))) {
            self.lexer.next();
            let rhs = self.formula(depth + 1)?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self, depth: usize) -> Result<Formula, ParseError> {
        let mut lhs = self.and_expr(depth)?;
        while matches!(self.lexer.peek(), Some((_, Tok::Or))) {
            self.lexer.next();
            let rhs = self.and_expr(depth + 1)?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, depth: usize) -> Result<Formula, ParseError> {
        let mut lhs = self.unary(depth)?;
        while matches!(self.lexer.peek(), Some((_, Tok::And))) {
            self.lexer.next();
            let rhs = self.unary(depth + 1)?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    /// Is the upcoming token sequence a quantifier head `A x .` / `E x .`?
    fn at_quantifier(&self) -> bool {
        match (self.lexer.peek(), self.lexer.peek2(), self.lexer.peek3()) {
            (Some((_, Tok::Ident(q))), Some((_, Tok::Ident(_))), Some((_, Tok::Dot))) => {
                q == "A" || q == "E"
            }
            _ => false,
        }
    }

    fn unary(&mut self, depth: usize) -> Result<Formula, ParseError> {
        if depth > self.max_depth {
            return Err(ParseError::TooDeep(self.max_depth));
        }
        match self.lexer.peek() {
            Some((_, Tok::Not)) => {
                self.lexer.next();
                let inner = self.unary(depth + 1)?;
                Ok(Formula::not(inner))
            }
            _ if self.at_quantifier() => self.quantifier(depth),
            Some((_, Tok::LParen)) => {
                self.lexer.next();
                let inner = self.formula(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.atom(depth),
        }
    }

    fn quantifier(&mut self, depth: usize) -> Result<Formula, ParseError> {
        let (_, quant) = self.lexer.next().expect("peeked quantifier");
        let existential = matches!(&quant, Tok::Ident(q) if q == "E");
        let (vpos, var) = match self.lexer.next() {
            Some((pos, Tok::Ident(v))) => (pos, v),
            _ => unreachable!("peeked quantifier shape"),
        };
        self.expect(Tok::Dot, "`.`")?;
        if self.sig.has_symbol(&var) {
            return Err(ParseError::BindsSymbol {
                pos: vpos,
                name: var,
            });
        }
        if !is_variable_name(&var) {
            return Err(ParseError::Syntax {
                pos: vpos,
                msg: format!("`{var}` is not a valid variable name"),
            });
        }
        // No shadowing within a quantifier chain: rename the inner binder.
        let name = if self.bound.contains(&var) {
            self.fresh_name(&var)
        } else {
            var.clone()
        };
        self.bound.push(name.clone());
        let body_raw = self.formula(depth + 1);
        self.bound.pop();
        let mut body = body_raw?;
        if name != var {
            body = body.rename_free_variable(&var, &name);
        }
        Ok(if existential {
            Formula::exists(&name, body)
        } else {
            Formula::forall(&name, body)
        })
    }

    fn atom(&mut self, depth: usize) -> Result<Formula, ParseError> {
        // Relation atom or `term = term`, disambiguated by the signature.
        if let Some((pos, Tok::Ident(name))) = self.lexer.peek().cloned() {
            if let Some(arity) = self.sig.relation_arity(&name) {
                self.lexer.next();
                let args = self.argument_list(depth)?;
                if args.len() != arity {
                    return Err(ParseError::Arity {
                        pos,
                        symbol: name,
                        expected: arity,
                        found: args.len(),
                    });
                }
                return Ok(Formula::rel(&name, args));
            }
        }
        let t1 = self.term(depth)?;
        self.expect(Tok::Eq, "`=`")?;
        let t2 = self.term(depth)?;
        Ok(Formula::Eq(t1, t2))
    }

    fn argument_list(&mut self, depth: usize) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if matches!(self.lexer.peek(), Some((_, Tok::RParen))) {
            self.lexer.next();
            return Ok(args);
        }
        loop {
            args.push(self.term(depth + 1)?);
            match self.lexer.next() {
                Some((_, Tok::Comma)) => continue,
                Some((_, Tok::RParen)) => break,
                Some((pos, _)) => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "expected `,` or `)`".into(),
                    });
                }
                None => {
                    return Err(ParseError::Syntax {
                        pos: self.end,
                        msg: "unterminated argument list".into(),
                    });
                }
            }
        }
        Ok(args)
    }

    fn term(&mut self, depth: usize) -> Result<Term, ParseError> {
        if depth > self.max_depth {
            return Err(ParseError::TooDeep(self.max_depth));
        }
        let (pos, name) = match self.lexer.next() {
            Some((pos, Tok::Ident(name))) => (pos, name),
            Some((pos, _)) => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "expected a term".into(),
                });
            }
            None => {
                return Err(ParseError::Syntax {
                    pos: self.end,
                    msg: "expected a term, found end of input".into(),
                });
            }
        };
        if let Some(arity) = self.sig.function_arity(&name) {
            let args = if matches!(self.lexer.peek(), Some((_, Tok::LParen))) {
                if arity == 0 {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("constant `{name}` is written without parentheses"),
                    });
                }
                self.argument_list(depth)?
            } else {
                Vec::new()
            };
            if args.len() != arity {
                return Err(ParseError::Arity {
                    pos,
                    symbol: name,
                    expected: arity,
                    found: args.len(),
                });
            }
            return Ok(Term::Apply { symbol: name, args });
        }
        if self.sig.relation_arity(&name).is_some() {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("relation `{name}` used as a term"),
            });
        }
        if !is_variable_name(&name) {
            return Err(ParseError::UnknownSymbol { pos, name });
        }
        Ok(Term::Var(name))
    }
}

/// Parses a formula in the concrete grammar against `sig`, with the default
/// depth bound.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    parse_formula_with_depth(text, sig, DEFAULT_MAX_DEPTH)
}

pub fn parse_formula_with_depth(
    text: &str,
    sig: &Signature,
    max_depth: usize,
) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let used = toks
        .iter()
        .filter_map(|(_, t)| match t {
            Tok::Ident(name) => Some(name.clone()),
            _ => None,
        })
        .collect();
    let mut parser = Parser {
        lexer: Lexer { toks, pos: 0 },
        sig,
        bound: Vec::new(),
        used,
        max_depth,
        end: text.len(),
    };
    let formula = parser.formula(0)?;
    if let Some((pos, _)) = parser.lexer.peek() {
        return Err(ParseError::Syntax {
            pos: *pos,
            msg: "trailing input after formula".into(),
        });
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::super::format_formula;
    use super::*;

    fn sig() -> Signature {
        Signature::of(&[("R", 2), ("P", 1)], &[("c", 0), ("f", 1)])
    }

    #[test]
    fn parses_spec_examples() {
        let f = parse_formula("E x . x = c", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::exists("x", Formula::eq(Term::var("x"), Term::constant("c")))
        );

        let f = parse_formula("A x . E y . R(x,y)", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::forall(
                "x",
                Formula::exists("y", Formula::rel("R", vec![Term::var("x"), Term::var("y")]))
            )
        );
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        assert!(matches!(
            parse_formula("R(x)", &sig()).unwrap_err(),
            ParseError::Arity { symbol, expected: 2, found: 1, .. } if symbol == "R"
        ));
    }

    #[test]
    fn unknown_symbols_and_syntax_errors_carry_positions() {
        match parse_formula("X = x", &sig()).unwrap_err() {
            ParseError::UnknownSymbol { pos, name } => {
                assert_eq!((pos, name.as_str()), (0, "X"));
            }
            other => panic!("unexpected: {other:?}"),
        }
        match parse_formula("x =", &sig()).unwrap_err() {
            ParseError::Syntax { pos, .. } => assert_eq!(pos, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("~P(x) & P(y) | P(x) -> P(y) -> P(x)", &sig()).unwrap();
        // (((~P(x) & P(y)) | P(x)) -> (P(y) -> P(x)))
        assert_eq!(
            f,
            Formula::implies(
                Formula::or(
                    Formula::and(
                        Formula::not(Formula::rel("P", vec![Term::var("x")])),
                        Formula::rel("P", vec![Term::var("y")])
                    ),
                    Formula::rel("P", vec![Term::var("x")])
                ),
                Formula::implies(
                    Formula::rel("P", vec![Term::var("y")]),
                    Formula::rel("P", vec![Term::var("x")])
                )
            )
        );
    }

    #[test]
    fn quantifier_scope_is_maximal() {
        let f = parse_formula("E x . P(x) & P(y)", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "x",
                Formula::and(
                    Formula::rel("P", vec![Term::var("x")]),
                    Formula::rel("P", vec![Term::var("y")])
                )
            )
        );
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let f = parse_formula("E x . E x . P(x)", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "x",
                Formula::exists("x1", Formula::rel("P", vec![Term::var("x1")]))
            )
        );
    }

    #[test]
    fn binding_a_signature_symbol_is_an_error() {
        assert!(matches!(
            parse_formula("E c . c = c", &sig()).unwrap_err(),
            ParseError::BindsSymbol { .. }
        ));
    }

    #[test]
    fn constants_take_no_parentheses() {
        assert!(parse_formula("c = c", &sig()).is_ok());
        assert!(matches!(
            parse_formula("c() = c", &sig()).unwrap_err(),
            ParseError::Syntax { .. }
        ));
        assert!(parse_formula("f(c) = x", &sig()).is_ok());
    }

    #[test]
    fn depth_cap() {
        let mut text = String::new();
        for _ in 0..40 {
            text.push('~');
        }
        text.push_str("P(x)");
        assert!(matches!(
            parse_formula(&text, &sig()).unwrap_err(),
            ParseError::TooDeep(32)
        ));
    }

    #[test]
    fn format_then_parse_round_trips() {
        let cases = [
            "E x . x = c",
            "A x . E y . R(x, y)",
            "~(x = y) & P(x) | P(y) -> P(c)",
            "(P(x) -> P(y)) -> P(c)",
            "A x . (E y . R(x, y)) & P(x)",
            "f(f(c)) = x",
        ];
        for text in cases {
            let f = parse_formula(text, &sig()).unwrap();
            let printed = format_formula(&f);
            let reparsed = parse_formula(&printed, &sig()).unwrap();
            assert_eq!(reparsed, f, "round trip through `{printed}`");
        }
    }
}
