//! The Boolean value `⟦φ(ν)⟧` of a formula in a structure, computed by the
//! literal recursion: atomic formulas distribute term equality over the full
//! domain, negation is complement, conjunction is meet, and the existential
//! quantifier is a supremum over the domain. Disjunction, implication, and
//! the universal quantifier are evaluated through their Boolean duals, which
//! coincide with lowering them to `~`, `&`, `E` first.

use thiserror::Error;

use crate::algebra::{AlgElement, Mask};
use crate::logic::{ArityError, Formula, Term, Valuation};

use super::BValuedStructure;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is not bound by the valuation")]
    UnboundVariable(String),
    #[error("valuation maps `{var}` to unknown element `{element}`")]
    UnknownElement { var: String, element: String },
    #[error(transparent)]
    Arity(#[from] ArityError),
}

struct Evaluator<'a> {
    s: &'a BValuedStructure,
    full: Mask,
    n: usize,
    // Innermost bindings last; quantifiers push and pop.
    env: Vec<(String, usize)>,
}

impl<'a> Evaluator<'a> {
    fn lookup(&self, var: &str) -> Result<usize, EvalError> {
        self.env
            .iter()
            .rev()
            .find(|(name, _)| name == var)
            .map(|(_, idx)| *idx)
            .ok_or_else(|| EvalError::UnboundVariable(var.to_owned()))
    }

    /// `⟦(t = target)(ν)⟧`.
    fn term_eq_mask(&mut self, term: &Term, target: usize) -> Result<Mask, EvalError> {
        match term {
            Term::Var(v) => {
                let idx = self.lookup(v)?;
                Ok(self.s.eq_mask(idx, target))
            }
            Term::Apply { symbol, args } => {
                // ⋁_{σ⃗} (⋀_i ⟦t_i = σ_i⟧) ∧ ⟦f(σ⃗) = target⟧
                let arg_vectors = args
                    .iter()
                    .map(|t| self.term_vector(t))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut sup = 0;
                for sigma in self.s.tuples(args.len()) {
                    let mut meet = self.full;
                    for (vec, &s_i) in arg_vectors.iter().zip(&sigma) {
                        meet &= vec[s_i];
                        if meet == 0 {
                            break;
                        }
                    }
                    if meet == 0 {
                        continue;
                    }
                    sup |= meet & self.s.fun_mask(symbol, &sigma, target);
                    if sup == self.full {
                        break;
                    }
                }
                Ok(sup)
            }
        }
    }

    /// `⟦t = τ⟧` for every domain element τ at once.
    fn term_vector(&mut self, term: &Term) -> Result<Vec<Mask>, EvalError> {
        (0..self.n).map(|tau| self.term_eq_mask(term, tau)).collect()
    }

    fn formula_mask(&mut self, formula: &Formula) -> Result<Mask, EvalError> {
        match formula {
            Formula::Eq(t1, t2) => {
                let v1 = self.term_vector(t1)?;
                let v2 = self.term_vector(t2)?;
                Ok(v1.iter().zip(&v2).fold(0, |acc, (a, b)| acc | (a & b)))
            }
            Formula::Rel { symbol, args } => {
                let arg_vectors = args
                    .iter()
                    .map(|t| self.term_vector(t))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut sup = 0;
                for tau in self.s.tuples(args.len()) {
                    let mut meet = self.full;
                    for (vec, &t_i) in arg_vectors.iter().zip(&tau) {
                        meet &= vec[t_i];
                        if meet == 0 {
                            break;
                        }
                    }
                    if meet == 0 {
                        continue;
                    }
                    sup |= meet & self.s.rel_mask(symbol, &tau);
                    if sup == self.full {
                        break;
                    }
                }
                Ok(sup)
            }
            Formula::Not(inner) => Ok(self.full & !self.formula_mask(inner)?),
            Formula::And(l, r) => Ok(self.formula_mask(l)? & self.formula_mask(r)?),
            Formula::Or(l, r) => Ok(self.formula_mask(l)? | self.formula_mask(r)?),
            Formula::Implies(l, r) => {
                let l = self.formula_mask(l)?;
                let r = self.formula_mask(r)?;
                Ok((self.full & !l) | r)
            }
            Formula::Exists { var, body } => {
                let mut sup = 0;
                for tau in 0..self.n {
                    self.env.push((var.clone(), tau));
                    let v = self.formula_mask(body);
                    self.env.pop();
                    sup |= v?;
                    if sup == self.full {
                        break;
                    }
                }
                Ok(sup)
            }
            Formula::Forall { var, body } => {
                let mut inf = self.full;
                for tau in 0..self.n {
                    self.env.push((var.clone(), tau));
                    let v = self.formula_mask(body);
                    self.env.pop();
                    inf &= v?;
                    if inf == 0 {
                        break;
                    }
                }
                Ok(inf)
            }
        }
    }
}

/// Computes `⟦φ(ν)⟧` in `s`. The valuation must cover the free variables of
/// `φ` with names of domain elements, and `φ` must fit the signature.
pub fn eval_boolean(
    s: &BValuedStructure,
    formula: &Formula,
    valuation: &Valuation,
) -> Result<AlgElement, EvalError> {
    formula.validate(s.signature())?;
    let mut env = Vec::new();
    for var in formula.free_variables() {
        let element = valuation
            .get(&var)
            .ok_or_else(|| EvalError::UnboundVariable(var.clone()))?;
        let idx = s
            .element_index(element)
            .ok_or_else(|| EvalError::UnknownElement {
                var: var.clone(),
                element: element.to_owned(),
            })?;
        env.push((var, idx));
    }
    let mut evaluator = Evaluator {
        s,
        full: s.algebra().full_mask(),
        n: s.domain_size(),
        env,
    };
    let mask = evaluator.formula_mask(formula)?;
    Ok(s.algebra().element_from_mask(mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BooleanAlgebra;
    use crate::logic::{parse_formula, Signature};

    /// Domain {t, s} over P({a, b}) with ⟦t = s⟧ = {a}.
    fn glued_pair() -> (BooleanAlgebra, BValuedStructure) {
        let b = BooleanAlgebra::powerset(["a", "b"]).unwrap();
        let sig = Signature::of(&[], &[("c", 0)]);
        let mut s = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["t".into(), "s".into()],
        )
        .unwrap();
        let a = b.element_from_atom_names(["a"]).unwrap();
        s.set_eq("t", "s", &a).unwrap();
        s.set_eq("s", "t", &a).unwrap();
        s.set_fun("c", &[], "t", &b.top()).unwrap();
        (b, s)
    }

    #[test]
    fn reflexivity_evaluates_to_one() {
        let (_, s) = glued_pair();
        let sig = s.signature().clone();
        let f = parse_formula("x = x", &sig).unwrap();
        let v = Valuation::of(&[("x", "t")]);
        assert!(eval_boolean(&s, &f, &v).unwrap().is_one());
    }

    #[test]
    fn contradiction_evaluates_to_zero() {
        let (_, s) = glued_pair();
        let sig = s.signature().clone();
        for text in ["x = u & ~(x = u)", "E y . y = x & ~(y = x)"] {
            let f = parse_formula(text, &sig).unwrap();
            let v = Valuation::of(&[("x", "t"), ("u", "s")]);
            assert!(eval_boolean(&s, &f, &v).unwrap().is_zero(), "{text}");
        }
    }

    /// Hand-evaluated: in the glued pair, ⟦∃x (x = σ ∧ ~(x = τ))⟧ = {b}.
    /// Witness σ contributes ⟦σ = σ⟧ ∧ ¬⟦σ = τ⟧ = {b}, witness τ contributes
    /// ⟦τ = σ⟧ ∧ ¬⟦τ = τ⟧ = 0. Confirmed below by brute force over the
    /// two-element domain straight from the tables.
    #[test]
    fn existential_is_supremum_of_witnesses() {
        let (b, s) = glued_pair();
        let sig = s.signature().clone();
        let f = parse_formula("E x . x = u & ~(x = w)", &sig).unwrap();
        let v = Valuation::of(&[("u", "s"), ("w", "t")]);
        let got = eval_boolean(&s, &f, &v).unwrap();

        let eq = |x: &str, y: &str| s.eq_value(x, y).unwrap();
        let witness = |cand: &str| {
            eq(cand, "s")
                .meet(&eq(cand, "t").complement())
                .unwrap()
        };
        let brute = b.sup([&witness("t"), &witness("s")]).unwrap();
        assert_eq!(got, brute);
        assert_eq!(got, b.element_from_atom_names(["b"]).unwrap());
    }

    #[test]
    fn constant_terms_use_function_tables() {
        let (_, s) = glued_pair();
        let sig = s.signature().clone();
        let f = parse_formula("E x . x = c", &sig).unwrap();
        let v = Valuation::new();
        assert!(eval_boolean(&s, &f, &v).unwrap().is_one());

        // ⟦c = u⟧ under u ↦ s is ⟦t = s⟧ = {a}.
        let f = parse_formula("c = u", &sig).unwrap();
        let v = Valuation::of(&[("u", "s")]);
        assert_eq!(
            eval_boolean(&s, &f, &v).unwrap().atom_names(),
            vec!["a"]
        );
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let (_, s) = glued_pair();
        let sig = s.signature().clone();
        let f = parse_formula("x = x", &sig).unwrap();
        assert_eq!(
            eval_boolean(&s, &f, &Valuation::new()).unwrap_err(),
            EvalError::UnboundVariable("x".into())
        );
    }

    /// Forall lowers to ~E~ exactly.
    #[test]
    fn forall_matches_lowered_form() {
        let (_, s) = glued_pair();
        let sig = s.signature().clone();
        let direct = parse_formula("A x . x = u", &sig).unwrap();
        let lowered = parse_formula("~(E x . ~(x = u))", &sig).unwrap();
        for elem in ["t", "s"] {
            let v = Valuation::of(&[("u", elem)]);
            assert_eq!(
                eval_boolean(&s, &direct, &v).unwrap(),
                eval_boolean(&s, &lowered, &v).unwrap()
            );
        }
    }
}
