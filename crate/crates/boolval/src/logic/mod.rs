//! First-order syntax: signatures, terms, formulas, and a concrete grammar.
//!
//! The concrete grammar is ASCII-only:
//!
//! ```text
//! formula  := implies
//! implies  := or ("->" implies)?          right-associative
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "~" unary | quantifier | primary
//! quantifier := ("A" | "E") var "." formula      maximal scope
//! primary  := "(" formula ")" | atom
//! atom     := rel "(" term{","} ")" | term "=" term
//! term     := symbol "(" term{","} ")" | symbol | var
//! ```
//!
//! Precedence is `~ > & > | > ->`. Identifiers are `[a-z][a-z0-9_]*` for
//! variables; relation and function symbols come from the signature and may
//! use any case. Nullary function symbols (constants) are written without
//! parentheses. Equality `=` is built in and never declared.

mod parser;

pub use parser::{parse_formula, parse_formula_with_depth, ParseError, DEFAULT_MAX_DEPTH};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` declared both as relation and function")]
    DuplicateSymbol(String),
    #[error("the equality symbol `=` is implicit and cannot be declared")]
    EqualityDeclared,
}

/// Relation and function symbols with their arities. Nullary functions are
/// constants.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SignatureLiteral", into = "SignatureLiteral")]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SignatureLiteral {
    #[serde(default)]
    relations: BTreeMap<String, usize>,
    #[serde(default)]
    functions: BTreeMap<String, usize>,
}

impl TryFrom<SignatureLiteral> for Signature {
    type Error = SignatureError;
    fn try_from(lit: SignatureLiteral) -> Result<Self, Self::Error> {
        Signature::new(lit.relations, lit.functions)
    }
}

impl From<Signature> for SignatureLiteral {
    fn from(sig: Signature) -> Self {
        SignatureLiteral {
            relations: sig.relations,
            functions: sig.functions,
        }
    }
}

impl Signature {
    pub fn new(
        relations: BTreeMap<String, usize>,
        functions: BTreeMap<String, usize>,
    ) -> Result<Self, SignatureError> {
        for name in relations.keys().chain(functions.keys()) {
            if name == "=" {
                return Err(SignatureError::EqualityDeclared);
            }
        }
        if let Some(name) = relations.keys().find(|r| functions.contains_key(*r)) {
            return Err(SignatureError::DuplicateSymbol(name.clone()));
        }
        Ok(Signature {
            relations,
            functions,
        })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    /// Convenience constructor from slices of `(name, arity)` pairs.
    pub fn of(relations: &[(&str, usize)], functions: &[(&str, usize)]) -> Self {
        Signature::new(
            relations
                .iter()
                .map(|(n, a)| (n.to_string(), *a))
                .collect(),
            functions
                .iter()
                .map(|(n, a)| (n.to_string(), *a))
                .collect(),
        )
        .expect("valid signature literal")
    }

    pub fn relations(&self) -> &BTreeMap<String, usize> {
        &self.relations
    }

    pub fn functions(&self) -> &BTreeMap<String, usize> {
        &self.functions
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.relations.contains_key(name) || self.functions.contains_key(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Apply { symbol: String, args: Vec<Term> },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_owned())
    }

    pub fn constant(name: &str) -> Term {
        Term::Apply {
            symbol: name.to_owned(),
            args: Vec::new(),
        }
    }

    pub fn apply(symbol: &str, args: Vec<Term>) -> Term {
        Term::Apply {
            symbol: symbol.to_owned(),
            args,
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(v) => {
                out.insert(v);
            }
            Term::Apply { args, .. } => {
                for t in args {
                    t.collect_vars(out);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Rel { symbol: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists { var: String, body: Box<Formula> },
    Forall { var: String, body: Box<Formula> },
}

impl Formula {
    pub fn eq(t1: Term, t2: Term) -> Formula {
        Formula::Eq(t1, t2)
    }

    pub fn rel(symbol: &str, args: Vec<Term>) -> Formula {
        Formula::Rel {
            symbol: symbol.to_owned(),
            args,
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists {
            var: var.to_owned(),
            body: Box::new(body),
        }
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall {
            var: var.to_owned(),
            body: Box::new(body),
        }
    }

    /// Iff, as the conjunction of two implications.
    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::and(
            Formula::implies(l.clone(), r.clone()),
            Formula::implies(r, l),
        )
    }

    /// Free variables, in lexicographic order.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Eq(t1, t2) => {
                let mut vars = BTreeSet::new();
                t1.collect_vars(&mut vars);
                t2.collect_vars(&mut vars);
                out.extend(
                    vars.into_iter()
                        .filter(|v| !bound.iter().any(|b| b == v))
                        .map(str::to_owned),
                );
            }
            Formula::Rel { args, .. } => {
                let mut vars = BTreeSet::new();
                for t in args {
                    t.collect_vars(&mut vars);
                }
                out.extend(
                    vars.into_iter()
                        .filter(|v| !bound.iter().any(|b| b == v))
                        .map(str::to_owned),
                );
            }
            Formula::Not(f) => f.free_into(bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.free_into(bound, out);
                r.free_into(bound, out);
            }
            Formula::Exists { var, body } | Formula::Forall { var, body } => {
                bound.push(var.clone());
                body.free_into(bound, out);
                bound.pop();
            }
        }
    }

    /// Nesting depth of the syntax tree (atoms have depth 1).
    pub fn depth(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::Rel { .. } => 1,
            Formula::Not(f) => 1 + f.depth(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                1 + l.depth().max(r.depth())
            }
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => 1 + body.depth(),
        }
    }

    /// Renames free occurrences of a variable. Callers keep binders disjoint
    /// from `to`; no capture check is performed.
    pub fn rename_free_variable(&self, from: &str, to: &str) -> Formula {
        fn term(t: &Term, from: &str, to: &str) -> Term {
            match t {
                Term::Var(v) if v == from => Term::Var(to.to_owned()),
                Term::Var(_) => t.clone(),
                Term::Apply { symbol, args } => Term::Apply {
                    symbol: symbol.clone(),
                    args: args.iter().map(|a| term(a, from, to)).collect(),
                },
            }
        }
        match self {
            Formula::Eq(t1, t2) => Formula::Eq(term(t1, from, to), term(t2, from, to)),
            Formula::Rel { symbol, args } => Formula::Rel {
                symbol: symbol.clone(),
                args: args.iter().map(|a| term(a, from, to)).collect(),
            },
            Formula::Not(f) => Formula::not(f.rename_free_variable(from, to)),
            Formula::And(l, r) => Formula::and(
                l.rename_free_variable(from, to),
                r.rename_free_variable(from, to),
            ),
            Formula::Or(l, r) => Formula::or(
                l.rename_free_variable(from, to),
                r.rename_free_variable(from, to),
            ),
            Formula::Implies(l, r) => Formula::implies(
                l.rename_free_variable(from, to),
                r.rename_free_variable(from, to),
            ),
            Formula::Exists { var, body } | Formula::Forall { var, body } => {
                let body = if var == from {
                    body.as_ref().clone()
                } else {
                    body.rename_free_variable(from, to)
                };
                match self {
                    Formula::Exists { .. } => Formula::exists(var, body),
                    _ => Formula::forall(var, body),
                }
            }
        }
    }

    /// Checks that every symbol occurs with its declared arity and that no
    /// variable collides with a signature symbol.
    pub fn validate(&self, sig: &Signature) -> Result<(), ArityError> {
        match self {
            Formula::Eq(t1, t2) => {
                validate_term(t1, sig)?;
                validate_term(t2, sig)
            }
            Formula::Rel { symbol, args } => {
                let arity = sig
                    .relation_arity(symbol)
                    .ok_or_else(|| ArityError::UnknownRelation(symbol.clone()))?;
                if args.len() != arity {
                    return Err(ArityError::RelationArity {
                        symbol: symbol.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                for t in args {
                    validate_term(t, sig)?;
                }
                Ok(())
            }
            Formula::Not(f) => f.validate(sig),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.validate(sig)?;
                r.validate(sig)
            }
            Formula::Exists { var, body } | Formula::Forall { var, body } => {
                if sig.has_symbol(var) {
                    return Err(ArityError::BoundSymbol(var.clone()));
                }
                body.validate(sig)
            }
        }
    }
}

fn validate_term(term: &Term, sig: &Signature) -> Result<(), ArityError> {
    match term {
        Term::Var(v) => {
            if sig.relation_arity(v).is_some() {
                Err(ArityError::UnknownFunction(v.clone()))
            } else {
                Ok(())
            }
        }
        Term::Apply { symbol, args } => {
            let arity = sig
                .function_arity(symbol)
                .ok_or_else(|| ArityError::UnknownFunction(symbol.clone()))?;
            if args.len() != arity {
                return Err(ArityError::FunctionArity {
                    symbol: symbol.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
            for t in args {
                validate_term(t, sig)?;
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ArityError {
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("relation `{symbol}` expects {expected} arguments, found {found}")]
    RelationArity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("function `{symbol}` expects {expected} arguments, found {found}")]
    FunctionArity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot bind `{0}`: it is a signature symbol")]
    BoundSymbol(String),
}

/// Assignment of domain-element identifiers to variable names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation(pub BTreeMap<String, String>);

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn of(pairs: &[(&str, &str)]) -> Self {
        Valuation(
            pairs
                .iter()
                .map(|(v, e)| (v.to_string(), e.to_string()))
                .collect(),
        )
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn bind(&self, var: &str, elem: &str) -> Valuation {
        let mut map = self.0.clone();
        map.insert(var.to_owned(), elem.to_owned());
        Valuation(map)
    }

    /// True when every free variable of `formula` is assigned.
    pub fn covers(&self, formula: &Formula) -> bool {
        formula
            .free_variables()
            .iter()
            .all(|v| self.0.contains_key(v))
    }
}

// Precedence levels used by the printer; higher binds tighter.
const PREC_IMPLIES: u8 = 0;
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

fn fmt_term(term: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match term {
        Term::Var(v) => write!(f, "{v}"),
        Term::Apply { symbol, args } => {
            write!(f, "{symbol}")?;
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt_term(a, f)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn fmt_formula(formula: &Formula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match formula {
        Formula::Eq(..) | Formula::Rel { .. } => PREC_UNARY,
        Formula::Not(..) => PREC_UNARY,
        Formula::And(..) => PREC_AND,
        Formula::Or(..) => PREC_OR,
        Formula::Implies(..) => PREC_IMPLIES,
        // Quantifiers scope maximally, so they parenthesize like implications.
        Formula::Exists { .. } | Formula::Forall { .. } => PREC_IMPLIES,
    };
    let parens = own < prec;
    if parens {
        write!(f, "(")?;
    }
    match formula {
        Formula::Eq(t1, t2) => {
            fmt_term(t1, f)?;
            write!(f, " = ")?;
            fmt_term(t2, f)?;
        }
        Formula::Rel { symbol, args } => {
            write!(f, "{symbol}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_term(a, f)?;
            }
            write!(f, ")")?;
        }
        Formula::Not(inner) => {
            write!(f, "~")?;
            fmt_formula(inner, PREC_UNARY + 1, f)?;
        }
        Formula::And(l, r) => {
            fmt_formula(l, PREC_AND, f)?;
            write!(f, " & ")?;
            fmt_formula(r, PREC_AND + 1, f)?;
        }
        Formula::Or(l, r) => {
            fmt_formula(l, PREC_OR, f)?;
            write!(f, " | ")?;
            fmt_formula(r, PREC_OR + 1, f)?;
        }
        Formula::Implies(l, r) => {
            fmt_formula(l, PREC_IMPLIES + 1, f)?;
            write!(f, " -> ")?;
            fmt_formula(r, PREC_IMPLIES, f)?;
        }
        Formula::Exists { var, body } => {
            write!(f, "E {var} . ")?;
            fmt_formula(body, PREC_IMPLIES, f)?;
        }
        Formula::Forall { var, body } => {
            write!(f, "A {var} . ")?;
            fmt_formula(body, PREC_IMPLIES, f)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, PREC_IMPLIES, f)
    }
}

/// Renders a formula in the concrete grammar; `parse_formula` inverts this.
pub fn format_formula(formula: &Formula) -> String {
    formula.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::of(&[("R", 2)], &[("c", 0), ("f", 1)])
    }

    #[test]
    fn signature_rules() {
        let mut rels = BTreeMap::new();
        rels.insert("R".to_string(), 1);
        let mut funs = BTreeMap::new();
        funs.insert("R".to_string(), 2);
        assert_eq!(
            Signature::new(rels.clone(), funs).unwrap_err(),
            SignatureError::DuplicateSymbol("R".into())
        );
        let mut eq = BTreeMap::new();
        eq.insert("=".to_string(), 2);
        assert_eq!(
            Signature::new(eq, BTreeMap::new()).unwrap_err(),
            SignatureError::EqualityDeclared
        );
    }

    #[test]
    fn signature_json() {
        let s: Signature =
            serde_json::from_str(r#"{"relations":{"R":2},"functions":{"c":0}}"#).unwrap();
        assert_eq!(s.relation_arity("R"), Some(2));
        assert_eq!(s.function_arity("c"), Some(0));
    }

    #[test]
    fn free_variables() {
        let f = Formula::exists("x", Formula::eq(Term::var("x"), Term::var("y")));
        assert_eq!(
            f.free_variables().into_iter().collect::<Vec<_>>(),
            vec!["y".to_string()]
        );
        let f = Formula::eq(Term::var("x"), Term::var("x"));
        assert_eq!(f.free_variables().len(), 1);
        let closed = Formula::forall("x", Formula::eq(Term::var("x"), Term::var("x")));
        assert!(closed.free_variables().is_empty());
    }

    #[test]
    fn validation_catches_arity_errors() {
        let f = Formula::rel("R", vec![Term::var("x")]);
        assert!(matches!(
            f.validate(&sig()).unwrap_err(),
            ArityError::RelationArity { expected: 2, found: 1, .. }
        ));
        let f = Formula::eq(Term::apply("f", vec![]), Term::var("x"));
        assert!(matches!(
            f.validate(&sig()).unwrap_err(),
            ArityError::FunctionArity { .. }
        ));
    }

    #[test]
    fn display_examples() {
        assert_eq!(
            Formula::eq(Term::var("x"), Term::var("x")).to_string(),
            "x = x"
        );
        assert_eq!(
            Formula::not(Formula::eq(Term::var("x"), Term::var("y"))).to_string(),
            "~(x = y)"
        );
    }
}
