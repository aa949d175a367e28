//! Witness search for existential values: build an antichain of conditions
//! whose pieces are realized by pool elements, then mix the pieces into a
//! single witness. On structures with constructive mixing and a rich enough
//! pool this attains `⟦∃x φ⟧ = ⟦φ(g)⟧` exactly.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgElement, Mask};
use crate::logic::{Formula, Valuation};

use super::eval::{eval_boolean, EvalError};
use super::{BValuedStructure, MixCapability};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("witness pool is empty")]
    EmptyPool,
    #[error("unknown pool element `{0}`")]
    UnknownElement(String),
    #[error("structure lacks a mixing capability")]
    MixingUnavailable,
    #[error("mixing failed: no domain element realizes the antichain pieces")]
    MixingFailed,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    /// `⟦∃x φ⟧`.
    pub target: AlgElement,
    /// `⟦φ(g)⟧` for the returned witness `g`.
    pub achieved: AlgElement,
    /// Whether the two are equal (otherwise only `achieved <= target`: the
    /// pool was too small to cover the supremum).
    pub exact: bool,
    /// The antichain pieces and the pool element realizing each.
    pub pieces: Vec<(AlgElement, String)>,
}

/// Greedy witness search for `⟦∃ var . body⟧` under `valuation`: pool
/// elements are scanned in order, each contributing the part of its value
/// not yet covered; the pieces are then mixed into a single element.
pub fn find_witness(
    s: &BValuedStructure,
    var: &str,
    body: &Formula,
    valuation: &Valuation,
    pool: &[String],
) -> Result<(String, WitnessReport), WitnessError> {
    if pool.is_empty() {
        return Err(WitnessError::EmptyPool);
    }
    if s.mixing() == MixCapability::Unavailable {
        return Err(WitnessError::MixingUnavailable);
    }
    let pool_indices = pool
        .iter()
        .map(|name| {
            s.element_index(name)
                .ok_or_else(|| WitnessError::UnknownElement(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let exists = Formula::exists(var, body.clone());
    let target = eval_boolean(s, &exists, valuation)?;
    let target_mask = target.mask();

    let mut covered: Mask = 0;
    let mut pieces: Vec<(Mask, usize)> = Vec::new();
    for &g in &pool_indices {
        if covered == target_mask {
            break;
        }
        let value = eval_boolean(s, body, &valuation.bind(var, s.element_name(g)))?;
        let piece = value.mask() & !covered;
        if piece != 0 {
            pieces.push((piece, g));
            covered |= piece;
        }
    }

    let witness = match s.mixing() {
        MixCapability::Unavailable => unreachable!("checked above"),
        MixCapability::DomainSearch => (0..s.domain_size())
            .find(|&h| pieces.iter().all(|&(b, g)| b & !s.eq_mask(h, g) == 0))
            .ok_or(WitnessError::MixingFailed)?,
        MixCapability::View => s.view_mix(&pieces).ok_or(WitnessError::MixingFailed)?,
    };

    let achieved = eval_boolean(s, body, &valuation.bind(var, s.element_name(witness)))?;
    let report = WitnessReport {
        exact: achieved == target,
        pieces: pieces
            .iter()
            .map(|&(b, g)| {
                (
                    s.algebra().element_from_mask(b),
                    s.element_name(g).to_owned(),
                )
            })
            .collect(),
        target,
        achieved,
    };
    Ok((s.element_name(witness).to_owned(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BooleanAlgebra;
    use crate::logic::{parse_formula, Signature};

    /// Domain {t, s, m} over P({a, b}) where m mixes t and s: ⟦m = t⟧ = {a},
    /// ⟦m = s⟧ = {b}. R holds on t at a and on s at b.
    fn mixing_triple() -> BValuedStructure {
        let b = BooleanAlgebra::powerset(["a", "b"]).unwrap();
        let sig = Signature::of(&[("R", 1)], &[("c", 0)]);
        let mut s = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["t".into(), "s".into(), "m".into()],
        )
        .unwrap();
        let a = b.element_from_atom_names(["a"]).unwrap();
        let bb = b.element_from_atom_names(["b"]).unwrap();
        s.set_eq("m", "t", &a).unwrap();
        s.set_eq("t", "m", &a).unwrap();
        s.set_eq("m", "s", &bb).unwrap();
        s.set_eq("s", "m", &bb).unwrap();
        s.set_rel("R", &["t"], &a).unwrap();
        s.set_rel("R", &["s"], &bb).unwrap();
        s.set_rel("R", &["m"], &b.top()).unwrap();
        s.set_fun("c", &[], "t", &b.top()).unwrap();
        s.with_search_mixing()
    }

    #[test]
    fn witness_for_constant_formula_is_exact() {
        let s = mixing_triple();
        let sig = s.signature().clone();
        let body = parse_formula("x = c", &sig).unwrap();
        let pool: Vec<String> = s.domain().to_vec();
        let (witness, report) =
            find_witness(&s, "x", &body, &Valuation::new(), &pool).unwrap();
        assert!(report.exact);
        assert!(report.target.is_one());
        // t realizes the whole value already.
        assert_eq!(witness, "t");
    }

    #[test]
    fn pieces_mix_into_a_single_witness() {
        let s = mixing_triple();
        let sig = s.signature().clone();
        let pool = vec!["t".to_string(), "s".to_string()];
        let body = parse_formula("R(x)", &sig).unwrap();
        let (witness, report) = find_witness(&s, "x", &body, &Valuation::new(), &pool).unwrap();
        assert!(report.exact, "{report:?}");
        assert!(report.target.is_one());
        // Mixing t below {a} with s below {b} lands on m.
        assert_eq!(witness, "m");
        assert_eq!(report.pieces.len(), 2);
    }

    #[test]
    fn empty_valued_existential() {
        let s = mixing_triple();
        let sig = s.signature().clone();
        let body = parse_formula("~(x = x)", &sig).unwrap();
        let pool: Vec<String> = s.domain().to_vec();
        let (_, report) = find_witness(&s, "x", &body, &Valuation::new(), &pool).unwrap();
        assert!(report.target.is_zero());
        assert!(report.achieved.is_zero());
        assert!(report.exact);
    }

    #[test]
    fn table_structure_without_mix_rule_errors() {
        let b = BooleanAlgebra::powerset(["a"]).unwrap();
        let s = BValuedStructure::from_identity_tables(
            b,
            Signature::empty(),
            vec!["t".into()],
        )
        .unwrap();
        let body = parse_formula("x = x", &Signature::empty()).unwrap();
        assert_eq!(
            find_witness(&s, "x", &body, &Valuation::new(), &["t".to_string()]).unwrap_err(),
            WitnessError::MixingUnavailable
        );
    }

    #[test]
    fn empty_pool_is_an_error() {
        let s = mixing_triple();
        let body = parse_formula("x = x", s.signature()).unwrap();
        assert_eq!(
            find_witness(&s, "x", &body, &Valuation::new(), &[]).unwrap_err(),
            WitnessError::EmptyPool
        );
    }
}
