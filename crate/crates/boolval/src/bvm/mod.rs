//! Boolean-valued structures and their semantics.
//!
//! A structure assigns to equality, to each relation symbol, and to each
//! function symbol a value map into a finite complete Boolean algebra. Value
//! maps can be stored tables (built directly or read from JSON) or computed
//! views (the function-space module supplies one); evaluation and checking
//! code sees both through the same interface.

mod axioms;
mod eval;
mod morphism;
mod quotient;
mod soundness;
mod witness;

pub use axioms::{check_structure_axioms, AxiomClause, AxiomReport, AxiomViolation};
pub use eval::{eval_boolean, EvalError};
pub use morphism::{
    check_morphism, identity_witness, MorphismClass, MorphismError, MorphismReport,
    MorphismWitness,
};
pub use quotient::{
    eval_tarski, los_check, quotient, FirstOrderStructure, LosMismatch, LosReport, QuotientError,
};
pub use soundness::{soundness_suite, SchemaCheck, SoundnessReport};
pub use witness::{find_witness, WitnessError, WitnessReport};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgElement, BooleanAlgebra, Mask};
use crate::logic::Signature;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("duplicate domain element `{0}`")]
    DuplicateElement(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("symbol `{0}` is not declared in the signature")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown atom `{0}` in a table value")]
    UnknownAtom(String),
    #[error("malformed table key `{key}`")]
    BadTableKey { key: String, function: bool },
}

/// Value maps backed by explicit tables. Equality defaults to the identity
/// table; relation and function rows default to `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTables {
    size: usize,
    eq: Vec<Mask>,
    rels: HashMap<String, HashMap<Vec<usize>, Mask>>,
    funs: HashMap<String, HashMap<Vec<usize>, Mask>>,
}

impl ValueTables {
    fn identity(size: usize, full: Mask) -> Self {
        let mut eq = vec![0; size * size];
        for i in 0..size {
            eq[i * size + i] = full;
        }
        ValueTables {
            size,
            eq,
            rels: HashMap::new(),
            funs: HashMap::new(),
        }
    }
}

/// A computed view of the three value maps, plus an optional mixing
/// capability. Implementors must be deterministic.
pub trait StructureView: Send + Sync {
    fn eq_mask(&self, left: usize, right: usize) -> Mask;
    fn rel_mask(&self, symbol: &str, tuple: &[usize]) -> Mask;
    fn fun_mask(&self, symbol: &str, args: &[usize], out: usize) -> Mask;
    /// Returns a domain element agreeing with element `g` below `b` for
    /// every piece `(b, g)`, if the view can build one.
    fn mix(&self, pieces: &[(Mask, usize)]) -> Option<usize>;
}

#[derive(Clone)]
enum Backing {
    Tables(ValueTables),
    View(Arc<dyn StructureView>),
}

/// How a structure supports the mixing step of witness search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixCapability {
    /// No mix rule; `find_witness` reports an error.
    Unavailable,
    /// Mix by searching the domain for an element above every piece. This is
    /// the table-backed mix rule: it succeeds exactly when the domain already
    /// contains a suitable element.
    DomainSearch,
    /// Delegate to the computed view's constructive mixing.
    View,
}

#[derive(Clone)]
pub struct BValuedStructure {
    algebra: BooleanAlgebra,
    sig: Signature,
    domain: Vec<String>,
    backing: Backing,
    mixing: MixCapability,
}

impl fmt::Debug for BValuedStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BValuedStructure")
            .field("algebra", &self.algebra)
            .field("domain", &self.domain)
            .field(
                "backing",
                &match &self.backing {
                    Backing::Tables(_) => "tables",
                    Backing::View(_) => "view",
                },
            )
            .finish()
    }
}

fn check_domain(domain: &[String]) -> Result<(), StructureError> {
    if domain.is_empty() {
        return Err(StructureError::EmptyDomain);
    }
    for (i, e) in domain.iter().enumerate() {
        if domain[..i].contains(e) {
            return Err(StructureError::DuplicateElement(e.clone()));
        }
    }
    Ok(())
}

impl BValuedStructure {
    /// A structure with identity equality and all-zero relation and function
    /// tables; rows are then filled in through [`set_eq`](Self::set_eq),
    /// [`set_rel`](Self::set_rel) and [`set_fun`](Self::set_fun).
    pub fn from_identity_tables(
        algebra: BooleanAlgebra,
        sig: Signature,
        domain: Vec<String>,
    ) -> Result<Self, StructureError> {
        check_domain(&domain)?;
        let tables = ValueTables::identity(domain.len(), algebra.full_mask());
        Ok(BValuedStructure {
            algebra,
            sig,
            domain,
            backing: Backing::Tables(tables),
            mixing: MixCapability::Unavailable,
        })
    }

    /// Wraps a computed view. The view is trusted to answer for the whole
    /// domain; constructive mixing is enabled.
    pub fn from_view(
        algebra: BooleanAlgebra,
        sig: Signature,
        domain: Vec<String>,
        view: Arc<dyn StructureView>,
    ) -> Result<Self, StructureError> {
        check_domain(&domain)?;
        Ok(BValuedStructure {
            algebra,
            sig,
            domain,
            backing: Backing::View(view),
            mixing: MixCapability::View,
        })
    }

    /// Enables the table-backed mix rule (domain search) on this structure.
    pub fn with_search_mixing(mut self) -> Self {
        if matches!(self.backing, Backing::Tables(_)) {
            self.mixing = MixCapability::DomainSearch;
        }
        self
    }

    pub fn algebra(&self) -> &BooleanAlgebra {
        &self.algebra
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.len()
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|e| e == name)
    }

    pub fn element_name(&self, idx: usize) -> &str {
        &self.domain[idx]
    }

    pub fn mixing(&self) -> MixCapability {
        self.mixing
    }

    fn index_of(&self, name: &str) -> Result<usize, StructureError> {
        self.element_index(name)
            .ok_or_else(|| StructureError::UnknownElement(name.to_owned()))
    }

    fn tables_mut(&mut self) -> &mut ValueTables {
        match &mut self.backing {
            Backing::Tables(t) => t,
            Backing::View(_) => panic!("computed views have no tables to set"),
        }
    }

    /// Sets `⟦left = right⟧` for this ordered pair only; symmetry is the
    /// checker's business, not the builder's.
    pub fn set_eq(
        &mut self,
        left: &str,
        right: &str,
        value: &AlgElement,
    ) -> Result<(), StructureError> {
        let (i, j) = (self.index_of(left)?, self.index_of(right)?);
        let mask = value.mask();
        let size = self.domain.len();
        self.tables_mut().eq[i * size + j] = mask;
        Ok(())
    }

    pub fn set_rel(
        &mut self,
        symbol: &str,
        tuple: &[&str],
        value: &AlgElement,
    ) -> Result<(), StructureError> {
        let arity = self
            .sig
            .relation_arity(symbol)
            .ok_or_else(|| StructureError::UnknownSymbol(symbol.to_owned()))?;
        if tuple.len() != arity {
            return Err(StructureError::ArityMismatch {
                symbol: symbol.to_owned(),
                expected: arity,
                found: tuple.len(),
            });
        }
        let indices = tuple
            .iter()
            .map(|e| self.index_of(e))
            .collect::<Result<Vec<_>, _>>()?;
        let mask = value.mask();
        self.tables_mut()
            .rels
            .entry(symbol.to_owned())
            .or_default()
            .insert(indices, mask);
        Ok(())
    }

    /// Sets `⟦f(args) = out⟧`.
    pub fn set_fun(
        &mut self,
        symbol: &str,
        args: &[&str],
        out: &str,
        value: &AlgElement,
    ) -> Result<(), StructureError> {
        let arity = self
            .sig
            .function_arity(symbol)
            .ok_or_else(|| StructureError::UnknownSymbol(symbol.to_owned()))?;
        if args.len() != arity {
            return Err(StructureError::ArityMismatch {
                symbol: symbol.to_owned(),
                expected: arity,
                found: args.len(),
            });
        }
        let mut indices = args
            .iter()
            .map(|e| self.index_of(e))
            .collect::<Result<Vec<_>, _>>()?;
        indices.push(self.index_of(out)?);
        let mask = value.mask();
        self.tables_mut()
            .funs
            .entry(symbol.to_owned())
            .or_default()
            .insert(indices, mask);
        Ok(())
    }

    pub(crate) fn eq_mask(&self, left: usize, right: usize) -> Mask {
        match &self.backing {
            Backing::Tables(t) => t.eq[left * t.size + right],
            Backing::View(v) => v.eq_mask(left, right),
        }
    }

    pub(crate) fn rel_mask(&self, symbol: &str, tuple: &[usize]) -> Mask {
        match &self.backing {
            Backing::Tables(t) => t
                .rels
                .get(symbol)
                .and_then(|rows| rows.get(tuple))
                .copied()
                .unwrap_or(0),
            Backing::View(v) => v.rel_mask(symbol, tuple),
        }
    }

    pub(crate) fn fun_mask(&self, symbol: &str, args: &[usize], out: usize) -> Mask {
        match &self.backing {
            Backing::Tables(t) => {
                let mut key = args.to_vec();
                key.push(out);
                t.funs
                    .get(symbol)
                    .and_then(|rows| rows.get(&key))
                    .copied()
                    .unwrap_or(0)
            }
            Backing::View(v) => v.fun_mask(symbol, args, out),
        }
    }

    pub(crate) fn view_mix(&self, pieces: &[(Mask, usize)]) -> Option<usize> {
        match &self.backing {
            Backing::Tables(_) => None,
            Backing::View(v) => v.mix(pieces),
        }
    }

    /// `⟦left = right⟧` as an element.
    pub fn eq_value(&self, left: &str, right: &str) -> Result<AlgElement, StructureError> {
        let (i, j) = (self.index_of(left)?, self.index_of(right)?);
        Ok(self.algebra.element_from_mask(self.eq_mask(i, j)))
    }

    /// `⟦R(tuple)⟧` as an element.
    pub fn rel_value(&self, symbol: &str, tuple: &[&str]) -> Result<AlgElement, StructureError> {
        let arity = self
            .sig
            .relation_arity(symbol)
            .ok_or_else(|| StructureError::UnknownSymbol(symbol.to_owned()))?;
        if tuple.len() != arity {
            return Err(StructureError::ArityMismatch {
                symbol: symbol.to_owned(),
                expected: arity,
                found: tuple.len(),
            });
        }
        let indices = tuple
            .iter()
            .map(|e| self.index_of(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .algebra
            .element_from_mask(self.rel_mask(symbol, &indices)))
    }

    /// `⟦f(args) = out⟧` as an element.
    pub fn fun_value(
        &self,
        symbol: &str,
        args: &[&str],
        out: &str,
    ) -> Result<AlgElement, StructureError> {
        let arity = self
            .sig
            .function_arity(symbol)
            .ok_or_else(|| StructureError::UnknownSymbol(symbol.to_owned()))?;
        if args.len() != arity {
            return Err(StructureError::ArityMismatch {
                symbol: symbol.to_owned(),
                expected: arity,
                found: args.len(),
            });
        }
        let indices = args
            .iter()
            .map(|e| self.index_of(e))
            .collect::<Result<Vec<_>, _>>()?;
        let out = self.index_of(out)?;
        Ok(self
            .algebra
            .element_from_mask(self.fun_mask(symbol, &indices, out)))
    }

    /// All tuples of the given arity over the domain, in odometer order.
    pub(crate) fn tuples(&self, arity: usize) -> TupleIter {
        TupleIter::new(self.domain.len(), arity)
    }

    pub fn to_literal(&self) -> StructureLiteral {
        StructureLiteral::from_structure(self)
    }

    pub fn from_literal(lit: &StructureLiteral) -> Result<Self, StructureError> {
        lit.to_structure()
    }
}

/// Odometer over `size^arity` tuples.
pub(crate) struct TupleIter {
    size: usize,
    current: Option<Vec<usize>>,
}

impl TupleIter {
    fn new(size: usize, arity: usize) -> Self {
        TupleIter {
            size,
            current: Some(vec![0; arity]),
        }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let mut next = current.clone();
        for slot in next.iter_mut().rev() {
            *slot += 1;
            if *slot < self.size {
                self.current = Some(next);
                return Some(current);
            }
            *slot = 0;
        }
        // Odometer wrapped: `current` was the last tuple.
        Some(current)
    }
}

/// JSON form of a table-backed structure. Equality keys are `"t,s"`,
/// function keys are `"args->out"`; missing equality rows default to the
/// identity table and missing relation/function rows default to `0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureLiteral {
    pub algebra: BooleanAlgebra,
    pub signature: Signature,
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub eq: std::collections::BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub relations: std::collections::BTreeMap<String, std::collections::BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub functions: std::collections::BTreeMap<String, std::collections::BTreeMap<String, Vec<String>>>,
}

impl StructureLiteral {
    fn from_structure(s: &BValuedStructure) -> StructureLiteral {
        let mut eq = std::collections::BTreeMap::new();
        for i in 0..s.domain_size() {
            for j in 0..s.domain_size() {
                let mask = s.eq_mask(i, j);
                let identity = if i == j { s.algebra.full_mask() } else { 0 };
                if mask != identity {
                    eq.insert(
                        format!("{},{}", s.domain[i], s.domain[j]),
                        s.algebra.element_from_mask(mask).atom_names_owned(),
                    );
                }
            }
        }
        let mut relations = std::collections::BTreeMap::new();
        for (symbol, &arity) in s.sig.relations() {
            let mut rows = std::collections::BTreeMap::new();
            for tuple in s.tuples(arity) {
                let mask = s.rel_mask(symbol, &tuple);
                if mask != 0 {
                    let key = tuple
                        .iter()
                        .map(|&i| s.domain[i].as_str())
                        .collect::<Vec<_>>()
                        .join(",");
                    rows.insert(key, s.algebra.element_from_mask(mask).atom_names_owned());
                }
            }
            relations.insert(symbol.clone(), rows);
        }
        let mut functions = std::collections::BTreeMap::new();
        for (symbol, &arity) in s.sig.functions() {
            let mut rows = std::collections::BTreeMap::new();
            for tuple in s.tuples(arity) {
                for out in 0..s.domain_size() {
                    let mask = s.fun_mask(symbol, &tuple, out);
                    if mask != 0 {
                        let key = format!(
                            "{}->{}",
                            tuple
                                .iter()
                                .map(|&i| s.domain[i].as_str())
                                .collect::<Vec<_>>()
                                .join(","),
                            s.domain[out]
                        );
                        rows.insert(key, s.algebra.element_from_mask(mask).atom_names_owned());
                    }
                }
            }
            functions.insert(symbol.clone(), rows);
        }
        StructureLiteral {
            algebra: s.algebra.clone(),
            signature: s.sig.clone(),
            domain: s.domain.clone(),
            eq,
            relations,
            functions,
        }
    }

    fn to_structure(&self) -> Result<BValuedStructure, StructureError> {
        let mut s = BValuedStructure::from_identity_tables(
            self.algebra.clone(),
            self.signature.clone(),
            self.domain.clone(),
        )?;
        let parse_value = |atoms: &[String]| {
            self.algebra
                .element_from_atom_names(atoms)
                .map_err(|_| StructureError::UnknownAtom(atoms.join(",")))
        };
        for (key, atoms) in &self.eq {
            let parts: Vec<&str> = key.split(',').collect();
            if parts.len() != 2 {
                return Err(StructureError::BadTableKey {
                    key: key.clone(),
                    function: false,
                });
            }
            s.set_eq(parts[0], parts[1], &parse_value(atoms)?)?;
        }
        for (symbol, rows) in &self.relations {
            for (key, atoms) in rows {
                let tuple: Vec<&str> = if key.is_empty() {
                    Vec::new()
                } else {
                    key.split(',').collect()
                };
                s.set_rel(symbol, &tuple, &parse_value(atoms)?)?;
            }
        }
        for (symbol, rows) in &self.functions {
            for (key, atoms) in rows {
                let (args_key, out) =
                    key.split_once("->")
                        .ok_or_else(|| StructureError::BadTableKey {
                            key: key.clone(),
                            function: true,
                        })?;
                let args: Vec<&str> = if args_key.is_empty() {
                    Vec::new()
                } else {
                    args_key.split(',').collect()
                };
                s.set_fun(symbol, &args, out, &parse_value(atoms)?)?;
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Signature;

    fn two_atom_algebra() -> BooleanAlgebra {
        BooleanAlgebra::powerset(["a", "b"]).unwrap()
    }

    #[test]
    fn identity_tables_have_reflexive_equality() {
        let b = two_atom_algebra();
        let s = BValuedStructure::from_identity_tables(
            b.clone(),
            Signature::empty(),
            vec!["t".into(), "s".into()],
        )
        .unwrap();
        assert!(s.eq_value("t", "t").unwrap().is_one());
        assert!(s.eq_value("t", "s").unwrap().is_zero());
    }

    #[test]
    fn empty_domain_is_rejected() {
        let b = two_atom_algebra();
        assert_eq!(
            BValuedStructure::from_identity_tables(b, Signature::empty(), vec![]).unwrap_err(),
            StructureError::EmptyDomain
        );
    }

    #[test]
    fn tuple_iter_covers_all() {
        let b = two_atom_algebra();
        let s = BValuedStructure::from_identity_tables(
            b,
            Signature::empty(),
            vec!["t".into(), "s".into(), "u".into()],
        )
        .unwrap();
        assert_eq!(s.tuples(2).count(), 9);
        assert_eq!(s.tuples(0).count(), 1);
        assert_eq!(s.tuples(1).next().unwrap(), vec![0]);
    }

    #[test]
    fn literal_round_trip() {
        let b = two_atom_algebra();
        let sig = Signature::of(&[("R", 1)], &[("f", 1)]);
        let mut s = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["t".into(), "s".into()],
        )
        .unwrap();
        let a = b.element_from_atom_names(["a"]).unwrap();
        s.set_eq("t", "s", &a).unwrap();
        s.set_eq("s", "t", &a).unwrap();
        s.set_rel("R", &["t"], &b.top()).unwrap();
        s.set_fun("f", &["t"], "s", &b.top()).unwrap();

        let lit = s.to_literal();
        let json = serde_json::to_string(&lit).unwrap();
        let back = BValuedStructure::from_literal(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.eq_value("t", "s").unwrap(), a);
        assert_eq!(back.rel_value("R", &["t"]).unwrap(), b.top());
        assert_eq!(back.fun_value("f", &["t"], "s").unwrap(), b.top());
        assert!(back.fun_value("f", &["s"], "s").unwrap().is_zero());
    }
}
