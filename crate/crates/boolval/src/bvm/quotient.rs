//! Quotients of Boolean-valued structures by ultrafilters, classical Tarski
//! evaluation on the quotients, and the Łoś comparison between the two.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::Ultrafilter;
use crate::logic::{ArityError, Formula, Term, Valuation};

use super::eval::{eval_boolean, EvalError};
use super::BValuedStructure;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum QuotientError {
    #[error("ultrafilter belongs to a different algebra")]
    AlgebraMismatch,
    #[error("equality classes are inconsistent at `{0}`: the structure violates clauses (i)-(iii)")]
    BadEquality(String),
    #[error("quotient function `{symbol}` has no value on ({tuple}): the structure violates clause (vi)")]
    FunctionTotality { symbol: String, tuple: String },
    #[error("quotient function `{symbol}` is multi-valued on ({tuple}): the structure violates clauses (vi)/(vii)")]
    FunctionMultiValued { symbol: String, tuple: String },
}

/// A plain two-valued structure: named elements, relation tuple sets, and
/// total function tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstOrderStructure {
    pub elements: Vec<String>,
    pub relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    pub functions: BTreeMap<String, BTreeMap<Vec<usize>, usize>>,
    /// For quotients: index of each original domain element's class.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_of: Option<Vec<usize>>,
}

impl FirstOrderStructure {
    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn rel_holds(&self, symbol: &str, tuple: &[usize]) -> bool {
        self.relations
            .get(symbol)
            .is_some_and(|rows| rows.contains(tuple))
    }

    pub fn fun_apply(&self, symbol: &str, tuple: &[usize]) -> Option<usize> {
        self.functions
            .get(symbol)
            .and_then(|rows| rows.get(tuple))
            .copied()
    }
}

/// Quotients `s` by the ultrafilter `G`: elements are identified when their
/// equality value lies in `G`, a relation holds when its value lies in `G`,
/// and functions pick the unique class with `⟦f(τ⃗) = σ⟧ ∈ G`. Class
/// representatives are the lowest-index members, so the construction is
/// deterministic.
pub fn quotient(
    s: &BValuedStructure,
    g: &Ultrafilter,
) -> Result<FirstOrderStructure, QuotientError> {
    if g.algebra() != s.algebra() {
        return Err(QuotientError::AlgebraMismatch);
    }
    let bit = 1u64 << g.atom_index();
    let n = s.domain_size();
    let related = |i: usize, j: usize| s.eq_mask(i, j) & bit != 0;

    // reps[i] = least j related to i; requires the relation restricted to
    // the atom to be an equivalence.
    let mut reps = Vec::with_capacity(n);
    for i in 0..n {
        let rep = (0..=i)
            .find(|&j| related(i, j))
            .ok_or_else(|| QuotientError::BadEquality(s.element_name(i).to_owned()))?;
        reps.push(rep);
    }
    for i in 0..n {
        if reps[reps[i]] != reps[i] || !related(i, reps[i]) || reps[i] > i {
            return Err(QuotientError::BadEquality(s.element_name(i).to_owned()));
        }
    }

    // Classes in order of their representative's index.
    let mut rep_list: Vec<usize> = Vec::new();
    let mut class_of = vec![0usize; n];
    for i in 0..n {
        if reps[i] == i {
            rep_list.push(i);
        }
        class_of[i] = rep_list
            .iter()
            .position(|&r| r == reps[i])
            .ok_or_else(|| QuotientError::BadEquality(s.element_name(i).to_owned()))?;
    }
    let elements: Vec<String> = rep_list
        .iter()
        .map(|&r| s.element_name(r).to_owned())
        .collect();
    let k = rep_list.len();

    let mut relations = BTreeMap::new();
    for (symbol, &arity) in s.signature().relations() {
        let mut rows = BTreeSet::new();
        for tuple in class_tuples(k, arity) {
            let orig: Vec<usize> = tuple.iter().map(|&c| rep_list[c]).collect();
            if s.rel_mask(symbol, &orig) & bit != 0 {
                rows.insert(tuple);
            }
        }
        relations.insert(symbol.clone(), rows);
    }

    let mut functions = BTreeMap::new();
    for (symbol, &arity) in s.signature().functions() {
        let mut rows = BTreeMap::new();
        for tuple in class_tuples(k, arity) {
            let orig: Vec<usize> = tuple.iter().map(|&c| rep_list[c]).collect();
            let mut value: Option<usize> = None;
            for out in 0..n {
                if s.fun_mask(symbol, &orig, out) & bit == 0 {
                    continue;
                }
                let class = class_of[out];
                match value {
                    None => value = Some(class),
                    Some(prior) if prior != class => {
                        return Err(QuotientError::FunctionMultiValued {
                            symbol: symbol.clone(),
                            tuple: tuple_names(s, &orig),
                        });
                    }
                    Some(_) => {}
                }
            }
            let value = value.ok_or_else(|| QuotientError::FunctionTotality {
                symbol: symbol.clone(),
                tuple: tuple_names(s, &orig),
            })?;
            rows.insert(tuple, value);
        }
        functions.insert(symbol.clone(), rows);
    }

    Ok(FirstOrderStructure {
        elements,
        relations,
        functions,
        class_of: Some(class_of),
    })
}

fn tuple_names(s: &BValuedStructure, tuple: &[usize]) -> String {
    tuple
        .iter()
        .map(|&i| s.element_name(i))
        .collect::<Vec<_>>()
        .join(",")
}

fn class_tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size).map(move |c| {
                    let mut t = t.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    out
}

fn tarski_term(
    f: &FirstOrderStructure,
    term: &Term,
    env: &[(String, usize)],
) -> Result<usize, EvalError> {
    match term {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, idx)| *idx)
            .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        Term::Apply { symbol, args } => {
            let values = args
                .iter()
                .map(|t| tarski_term(f, t, env))
                .collect::<Result<Vec<_>, _>>()?;
            f.fun_apply(symbol, &values)
                .ok_or_else(|| EvalError::Arity(ArityError::UnknownFunction(symbol.clone())))
        }
    }
}

fn tarski_formula(
    f: &FirstOrderStructure,
    formula: &Formula,
    env: &mut Vec<(String, usize)>,
) -> Result<bool, EvalError> {
    match formula {
        Formula::Eq(t1, t2) => Ok(tarski_term(f, t1, env)? == tarski_term(f, t2, env)?),
        Formula::Rel { symbol, args } => {
            let values = args
                .iter()
                .map(|t| tarski_term(f, t, env))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(f.rel_holds(symbol, &values))
        }
        Formula::Not(inner) => Ok(!tarski_formula(f, inner, env)?),
        Formula::And(l, r) => Ok(tarski_formula(f, l, env)? && tarski_formula(f, r, env)?),
        Formula::Or(l, r) => Ok(tarski_formula(f, l, env)? || tarski_formula(f, r, env)?),
        Formula::Implies(l, r) => Ok(!tarski_formula(f, l, env)? || tarski_formula(f, r, env)?),
        Formula::Exists { var, body } => {
            for idx in 0..f.len() {
                env.push((var.clone(), idx));
                let v = tarski_formula(f, body, env);
                env.pop();
                if v? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Forall { var, body } => {
            for idx in 0..f.len() {
                env.push((var.clone(), idx));
                let v = tarski_formula(f, body, env);
                env.pop();
                if !v? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Standard two-valued evaluation by exhaustive quantifier sweep.
pub fn eval_tarski(
    f: &FirstOrderStructure,
    formula: &Formula,
    valuation: &Valuation,
) -> Result<bool, EvalError> {
    let mut env = Vec::new();
    for var in formula.free_variables() {
        let element = valuation
            .get(&var)
            .ok_or_else(|| EvalError::UnboundVariable(var.clone()))?;
        let idx = f
            .element_index(element)
            .ok_or_else(|| EvalError::UnknownElement {
                var: var.clone(),
                element: element.to_owned(),
            })?;
        env.push((var, idx));
    }
    tarski_formula(f, formula, &mut env)
}

#[derive(Clone, Debug, Serialize)]
pub struct LosMismatch {
    pub formula: String,
    pub valuation: BTreeMap<String, String>,
    /// Atom of the ultrafilter, or the element `a` for clause (ii) entries.
    pub site: String,
    pub clause: &'static str,
    pub boolean_value: Vec<String>,
    pub quotient_truth: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LosReport {
    pub cases: usize,
    pub mismatches: Vec<LosMismatch>,
}

impl LosReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares, for every formula, valuation, and ultrafilter, the membership
/// `⟦φ(ν)⟧ ∈ G` with Tarski truth in the quotient `M/G` (clause (i)), and
/// for every algebra element `a` the inequality `⟦φ(ν)⟧ >= a` with truth at
/// all ultrafilters below `a` (clause (ii)).
pub fn los_check(
    s: &BValuedStructure,
    formulas: &[Formula],
    valuations: &[Valuation],
) -> Result<LosReport, LosCheckError> {
    let ultrafilters = s.algebra().ultrafilters();
    let quotients = ultrafilters
        .iter()
        .map(|g| quotient(s, g))
        .collect::<Result<Vec<_>, _>>()?;

    let mut cases = 0;
    let mut mismatches = Vec::new();
    for formula in formulas {
        for valuation in valuations {
            if !valuation.covers(formula) {
                continue;
            }
            let bv = eval_boolean(s, formula, valuation)?;
            let mut truths = Vec::with_capacity(quotients.len());
            for (g, q) in ultrafilters.iter().zip(&quotients) {
                // Map the valuation through the class function.
                let mapped = Valuation(
                    valuation
                        .0
                        .iter()
                        .map(|(var, elem)| {
                            let idx = s.element_index(elem).expect("checked by eval");
                            let class = q.class_of.as_ref().expect("quotient")[idx];
                            (var.clone(), q.elements[class].clone())
                        })
                        .collect(),
                );
                let truth = eval_tarski(q, formula, &mapped)?;
                truths.push(truth);
                cases += 1;
                if g.contains(&bv).expect("same algebra") != truth {
                    mismatches.push(LosMismatch {
                        formula: formula.to_string(),
                        valuation: valuation.0.clone(),
                        site: format!("G@{}", g.atom_name()),
                        clause: "i",
                        boolean_value: bv.atom_names_owned(),
                        quotient_truth: truth,
                    });
                }
            }
            // Clause (ii): ⟦φ⟧ >= a iff the quotient satisfies φ at every
            // ultrafilter whose atom lies below a.
            for a in s.algebra().elements() {
                cases += 1;
                let lhs = a.leq(&bv).expect("same algebra");
                let rhs = ultrafilters
                    .iter()
                    .zip(&truths)
                    .all(|(g, &t)| t || !g.contains(&a).expect("same algebra"));
                if lhs != rhs {
                    mismatches.push(LosMismatch {
                        formula: formula.to_string(),
                        valuation: valuation.0.clone(),
                        site: a.to_string(),
                        clause: "ii",
                        boolean_value: bv.atom_names_owned(),
                        quotient_truth: rhs,
                    });
                }
            }
        }
    }
    Ok(LosReport { cases, mismatches })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LosCheckError {
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
