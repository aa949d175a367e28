//! Names for points of a Polish space as basis assignments, and the
//! round trips between names and Stone-space functions.
//!
//! A name assigns to each basis ball `U_n` (below a resolution bound) the
//! truth value of "the named point lies in `U_n`". Reading a function `f`
//! into a name takes `assign(n) = {atoms a : f(a) ∈ U_n}`; realizing a name
//! back into a function picks, at each atom, the unique candidate point that
//! lies in the closure of every assigned ball and outside every unassigned
//! one. Closed-ball membership and ball inclusion are decided exactly from
//! center distances and radii.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgElement, BooleanAlgebra, Mask, Ultrafilter};
use crate::fspace::{self, CPlusFunction, FspaceError, SpaceRef};
use crate::space::{BasisBall, BorelCode, RationalPoint, SpaceError, MAX_BALL_INDEX};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NameError {
    #[error("values {left} and {right} are not separated by any ball below index {bound}; increase resolution")]
    SeparationFailure {
        left: String,
        right: String,
        bound: usize,
    },
    #[error("point {0} is not covered by any ball below the resolution bound; increase resolution")]
    CoverageFailure(String),
    #[error("unrealizable name: no candidate survives at atom `{atom}`")]
    Unrealizable { atom: String },
    #[error("under-determined name: {survivors} candidates survive at atom `{atom}`")]
    UnderDetermined { atom: String, survivors: usize },
    #[error("candidate pool is empty")]
    EmptyCandidatePool,
    #[error("operands belong to different algebras or spaces")]
    MixedStructures,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Fspace(#[from] FspaceError),
}

/// A name for a point of `Y`: Boolean values `assign(n) = ⟦· ∈ U_n⟧` for
/// every basis index `n` below the resolution bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisAssignment {
    algebra: BooleanAlgebra,
    space: SpaceRef,
    bound: usize,
    assign: Vec<Mask>,
}

/// JSON form: `{"bound": k, "assign": {"n": [atoms]}}` with zero entries
/// omitted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NameLiteral {
    pub bound: usize,
    pub assign: BTreeMap<String, Vec<String>>,
}

impl BasisAssignment {
    pub fn algebra(&self) -> &BooleanAlgebra {
        &self.algebra
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// `⟦· ∈ U_n⟧` for an index below the bound.
    pub fn value(&self, index: usize) -> Option<AlgElement> {
        self.assign
            .get(index)
            .map(|&m| self.algebra.element_from_mask(m))
    }

    pub fn to_literal(&self) -> NameLiteral {
        let mut assign = BTreeMap::new();
        for (n, &mask) in self.assign.iter().enumerate() {
            if mask != 0 {
                assign.insert(
                    n.to_string(),
                    self.algebra.element_from_mask(mask).atom_names_owned(),
                );
            }
        }
        NameLiteral {
            bound: self.bound,
            assign,
        }
    }

    pub fn from_literal(
        literal: &NameLiteral,
        algebra: &BooleanAlgebra,
        space: &SpaceRef,
    ) -> Result<Self, NameError> {
        let mut assign = vec![0; literal.bound];
        for (key, atoms) in &literal.assign {
            let index: usize = key
                .parse()
                .map_err(|_| SpaceError::BadRational(key.clone()))?;
            if index >= literal.bound {
                return Err(SpaceError::BallIndexOutOfRange(index).into());
            }
            let element = algebra
                .element_from_atom_names(atoms)
                .map_err(|_| NameError::MixedStructures)?;
            assign[index] = element.mask();
        }
        Ok(BasisAssignment {
            algebra: algebra.clone(),
            space: space.clone(),
            bound: literal.bound,
            assign,
        })
    }
}

/// The name of a function: `assign(n) = {a : f(a) ∈ U_n}` for `n < bound`.
/// Fails unless every pair of distinct values of `f` is separated by a ball
/// below the bound.
pub fn name_from_function(f: &CPlusFunction, bound: usize) -> Result<BasisAssignment, NameError> {
    let space = f.space();
    let balls = space.basis_enumerate(bound)?;
    for (i, left) in f.values().iter().enumerate() {
        for right in &f.values()[i + 1..] {
            if left == right {
                continue;
            }
            let separated = balls
                .iter()
                .any(|ball| ball.contains(left) != ball.contains(right));
            if !separated {
                return Err(NameError::SeparationFailure {
                    left: left.to_string(),
                    right: right.to_string(),
                    bound,
                });
            }
        }
    }
    let mut assign = Vec::with_capacity(bound);
    for ball in &balls {
        let mut mask = 0;
        for (atom, value) in f.values().iter().enumerate() {
            if ball.contains(value) {
                mask |= 1 << atom;
            }
        }
        assign.push(mask);
    }
    Ok(BasisAssignment {
        algebra: f.algebra().clone(),
        space: space.clone(),
        bound,
        assign,
    })
}

/// Realizes a name as a function: at each atom the unique candidate lying in
/// the closure of every assigned ball and outside every unassigned ball.
pub fn function_from_name(
    name: &BasisAssignment,
    candidates: &[RationalPoint],
) -> Result<CPlusFunction, NameError> {
    if candidates.is_empty() {
        return Err(NameError::EmptyCandidatePool);
    }
    let mut pool: Vec<&RationalPoint> = Vec::new();
    for c in candidates {
        if name.space.contains(c) && !pool.contains(&c) {
            pool.push(c);
        }
    }
    if pool.is_empty() {
        return Err(NameError::EmptyCandidatePool);
    }
    let balls = name.space.basis_enumerate(name.bound)?;
    let mut values = Vec::with_capacity(name.algebra.atom_count());
    for atom in 0..name.algebra.atom_count() {
        let survives = |p: &RationalPoint| {
            balls.iter().all(|ball| {
                if name.assign[ball.index] & (1 << atom) != 0 {
                    ball.closed_contains(p)
                } else {
                    !ball.contains(p)
                }
            })
        };
        let mut found: Vec<&RationalPoint> = Vec::new();
        for &p in &pool {
            if survives(p) {
                found.push(p);
            }
        }
        match found.len() {
            0 => {
                return Err(NameError::Unrealizable {
                    atom: name.algebra.atoms()[atom].clone(),
                })
            }
            1 => values.push(found[0].clone()),
            k => {
                return Err(NameError::UnderDetermined {
                    atom: name.algebra.atoms()[atom].clone(),
                    survivors: k,
                })
            }
        }
    }
    Ok(CPlusFunction::from_points(
        name.algebra.clone(),
        name.space.clone(),
        values,
    )?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoherenceKind {
    /// `Cl(U_m) ⊆ U_n` but `assign(m)` is not below `assign(n)`.
    Monotonicity,
    /// The assigned values do not cover the unit.
    Covering,
    /// Closure-disjoint balls have overlapping values.
    Disjointness,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceViolation {
    pub kind: CoherenceKind,
    pub indices: Vec<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    pub violations: Vec<CoherenceViolation>,
}

impl CoherenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three name invariants: monotonicity along closure inclusion of
/// balls, covering, and disjointness on closure-disjoint balls.
pub fn check_name_coherence(name: &BasisAssignment) -> Result<CoherenceReport, NameError> {
    let balls = name.space.basis_enumerate(name.bound)?;
    let mut violations = Vec::new();
    let mut covered: Mask = 0;
    for m in 0..name.bound {
        covered |= name.assign[m];
        for n in 0..name.bound {
            if m == n {
                continue;
            }
            if balls[m].closure_subset_of(&balls[n])
                && name.assign[m] & !name.assign[n] != 0
            {
                violations.push(CoherenceViolation {
                    kind: CoherenceKind::Monotonicity,
                    indices: vec![m, n],
                    detail: format!(
                        "closure of ball {m} lies in ball {n} but the assignment does not grow"
                    ),
                });
            }
            if n > m && balls[m].closure_disjoint(&balls[n]) && name.assign[m] & name.assign[n] != 0
            {
                violations.push(CoherenceViolation {
                    kind: CoherenceKind::Disjointness,
                    indices: vec![m, n],
                    detail: format!("balls {m} and {n} have disjoint closures but meet"),
                });
            }
        }
    }
    if covered != name.algebra.full_mask() {
        let missing = name.algebra.element_from_mask(!covered);
        violations.push(CoherenceViolation {
            kind: CoherenceKind::Covering,
            indices: vec![],
            detail: format!("atoms {missing} are not covered by any assigned ball"),
        });
    }
    Ok(CoherenceReport { violations })
}

/// Lifts a Borel predicate to names by realizing them and lifting the
/// predicate on the realized functions (the two routes agree on names of
/// functions, which the round-trip sweeps verify).
pub fn lift_relation_on_names(
    code: &BorelCode,
    names: &[&BasisAssignment],
    candidates: &[RationalPoint],
) -> Result<AlgElement, NameError> {
    for pair in names.windows(2) {
        if pair[0].algebra != pair[1].algebra || pair[0].space.as_ref() != pair[1].space.as_ref() {
            return Err(NameError::MixedStructures);
        }
    }
    let realized = names
        .iter()
        .map(|n| function_from_name(n, candidates))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&CPlusFunction> = realized.iter().collect();
    Ok(fspace::lift_relation(code, &refs)?)
}

/// Smallest resolution bound adequate for the given points: every point lies
/// in some ball below the bound, and for every ordered pair of distinct
/// points some ball below the bound contains the second and excludes the
/// first. Realizing any name built from functions with these values is then
/// uniquely determined over any candidate pool drawn from them.
///
/// Single pass over the enumeration, growing the examined prefix until every
/// pair is separated and every point covered.
pub fn adequate_resolution(
    points: &[RationalPoint],
    space: &SpaceRef,
    max_bound: usize,
) -> Result<usize, NameError> {
    for p in points {
        if !space.contains(p) {
            return Err(SpaceError::NotInSpace(p.to_string()).into());
        }
    }
    let mut distinct: Vec<&RationalPoint> = Vec::new();
    for p in points {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    // Ordered pairs still waiting for a ball around the second point that
    // excludes the first, and points not yet inside any ball.
    let mut pairs: Vec<(usize, usize)> = (0..distinct.len())
        .flat_map(|v| (0..distinct.len()).map(move |w| (v, w)))
        .filter(|&(v, w)| v != w)
        .collect();
    let mut uncovered: Vec<usize> = (0..distinct.len()).collect();

    let mut needed = 1usize;
    let mut scanned = 0usize;
    let mut prefix = 64.min(max_bound).max(1);
    loop {
        for ball in &space.basis_enumerate(prefix)?[scanned..] {
            if pairs.is_empty() && uncovered.is_empty() {
                break;
            }
            pairs.retain(|&(v, w)| {
                let separates = ball.contains(distinct[w]) && !ball.contains(distinct[v]);
                if separates {
                    needed = needed.max(ball.index + 1);
                }
                !separates
            });
            uncovered.retain(|&p| {
                let covers = ball.contains(distinct[p]);
                if covers {
                    needed = needed.max(ball.index + 1);
                }
                !covers
            });
        }
        scanned = prefix;
        if pairs.is_empty() && uncovered.is_empty() {
            return Ok(needed);
        }
        if prefix >= max_bound {
            return match pairs.first() {
                Some(&(v, w)) => Err(NameError::SeparationFailure {
                    left: distinct[v].to_string(),
                    right: distinct[w].to_string(),
                    bound: max_bound,
                }),
                None => Err(NameError::CoverageFailure(
                    distinct[uncovered[0]].to_string(),
                )),
            };
        }
        prefix = (prefix * 2).min(max_bound);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientEquivEntry {
    pub index: usize,
    /// Least basis index whose value contains the ultrafilter's atom.
    pub ball_index: usize,
    /// Whether `⟦f = f̃⟧ ∈ G` for the rebuilt function.
    pub equivalent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientEquivReport {
    pub entries: Vec<QuotientEquivEntry>,
}

impl QuotientEquivReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.equivalent)
    }
}

/// For each carrier function `f`, rebuilds the function that agrees with `f`
/// on `a_m = ⟦f ∈ U_m⟧` (for the least `m` with `a_m ∈ G`) and is the
/// default value elsewhere, then checks it is `G`-equivalent to `f`. This is
/// the construction behind the identification of the two quotients
/// `C⁺(St(B))/G` and `C(St(B))/G`; at finite scale both spaces coincide and
/// the check always passes, which the report demonstrates constructively.
pub fn quotient_equivalence_check(
    carrier: &[CPlusFunction],
    g: &Ultrafilter,
) -> Result<QuotientEquivReport, NameError> {
    let mut entries = Vec::new();
    for (index, f) in carrier.iter().enumerate() {
        if f.algebra() != g.algebra() {
            return Err(NameError::MixedStructures);
        }
        let space = f.space();
        let atom = g.atom_index();
        let value = &f.values()[atom];
        // Least m with the atom in a_m, i.e. the first enumerated ball
        // containing f(atom).
        let ball = first_ball_containing(space, value)?;
        let mut a_m: Mask = 0;
        for (i, v) in f.values().iter().enumerate() {
            if ball.contains(v) {
                a_m |= 1 << i;
            }
        }
        let piece = f.algebra().element_from_mask(a_m);
        let rebuilt = fspace::mix(
            &[piece],
            std::slice::from_ref(f),
            &space.default_point(),
        )?;
        let equal = f.eq_value(&rebuilt)?;
        entries.push(QuotientEquivEntry {
            index,
            ball_index: ball.index,
            equivalent: g.contains(&equal).unwrap_or(false),
        });
    }
    Ok(QuotientEquivReport { entries })
}

fn first_ball_containing(
    space: &SpaceRef,
    point: &RationalPoint,
) -> Result<BasisBall, NameError> {
    let mut bound = 64;
    loop {
        for ball in space.basis_enumerate(bound.min(MAX_BALL_INDEX))? {
            if ball.contains(point) {
                return Ok(ball);
            }
        }
        if bound >= MAX_BALL_INDEX {
            return Err(NameError::CoverageFailure(point.to_string()));
        }
        bound *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::PolishPresentation;
    use std::sync::Arc;

    fn setup() -> (BooleanAlgebra, SpaceRef) {
        (
            BooleanAlgebra::powerset(["a", "b"]).unwrap(),
            Arc::new(PolishPresentation::complex_rational()),
        )
    }

    fn int_fun(algebra: &BooleanAlgebra, space: &SpaceRef, vals: &[i64]) -> CPlusFunction {
        CPlusFunction::from_points(
            algebra.clone(),
            space.clone(),
            vals.iter()
                .map(|&v| RationalPoint::from_integers(&[v]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_names_assign_full_or_empty_values() {
        let (b, space) = setup();
        let c0 =
            CPlusFunction::constant(b.clone(), space.clone(), RationalPoint::origin()).unwrap();
        let bound =
            adequate_resolution(&[RationalPoint::origin()], &space, MAX_BALL_INDEX).unwrap();
        let name = name_from_function(&c0, bound).unwrap();
        for (n, ball) in space.basis_enumerate(bound).unwrap().iter().enumerate() {
            let value = name.value(n).unwrap();
            if ball.contains(&RationalPoint::origin()) {
                assert!(value.is_one());
            } else {
                assert!(value.is_zero());
            }
        }
    }

    #[test]
    fn separation_failure_asks_for_higher_resolution() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 1]);
        // Bound 1 has only the unit ball, which contains 0 but not 1...
        // that already separates. Bound 0 cannot.
        assert!(matches!(
            name_from_function(&f, 0).unwrap_err(),
            NameError::SeparationFailure { .. }
        ));
    }

    #[test]
    fn name_assigns_pointwise_membership() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 1]);
        let points: Vec<RationalPoint> = f.values().to_vec();
        let bound = adequate_resolution(&points, &space, MAX_BALL_INDEX).unwrap();
        let name = name_from_function(&f, bound).unwrap();
        // Ball 0 = unit ball at the origin: contains 0, not 1.
        assert_eq!(
            name.value(0).unwrap(),
            b.element_from_atom_names(["a"]).unwrap()
        );
        // Extensionality: equal functions give identical assignments.
        let g = int_fun(&b, &space, &[0, 1]);
        assert_eq!(name, name_from_function(&g, bound).unwrap());
    }

    #[test]
    fn round_trip_function_name_function() {
        let (b, space) = setup();
        for vals in [[0, 1], [2, 2], [-1, 3]] {
            let f = int_fun(&b, &space, &vals);
            let points: Vec<RationalPoint> = f.values().to_vec();
            let bound = adequate_resolution(&points, &space, MAX_BALL_INDEX).unwrap();
            let name = name_from_function(&f, bound).unwrap();
            let back = function_from_name(&name, &points).unwrap();
            assert_eq!(back.values(), f.values());

            // Round trip B: the name of the realized function agrees on all
            // indices below the bound.
            let name_again = name_from_function(&back, bound).unwrap();
            assert_eq!(name, name_again);
        }
    }

    #[test]
    fn realization_errors() {
        let (b, space) = setup();
        let c0 =
            CPlusFunction::constant(b.clone(), space.clone(), RationalPoint::origin()).unwrap();
        let bound =
            adequate_resolution(&[RationalPoint::origin()], &space, MAX_BALL_INDEX).unwrap();
        let name = name_from_function(&c0, bound).unwrap();

        // A pool missing the named point cannot realize the name.
        let five = RationalPoint::from_integers(&[5]);
        assert!(matches!(
            function_from_name(&name, &[five]).unwrap_err(),
            NameError::Unrealizable { .. }
        ));
        assert!(matches!(
            function_from_name(&name, &[]).unwrap_err(),
            NameError::EmptyCandidatePool
        ));

        // Two indistinguishable nearby candidates: under-determined. Points
        // 0 and a tiny offset both sit inside every assigned ball if the
        // offset is far smaller than the resolution distinguishes... build
        // the failure directly with a coarse bound instead.
        let coarse = name_from_function(&c0, 1).unwrap();
        let eps = RationalPoint::parse(&["1/100"]).unwrap();
        let err = function_from_name(&coarse, &[RationalPoint::origin(), eps]).unwrap_err();
        assert!(matches!(err, NameError::UnderDetermined { survivors: 2, .. }));
    }

    #[test]
    fn coherence_checks() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 1]);
        let points: Vec<RationalPoint> = f.values().to_vec();
        let bound = adequate_resolution(&points, &space, MAX_BALL_INDEX).unwrap();
        let name = name_from_function(&f, bound).unwrap();
        assert!(check_name_coherence(&name).unwrap().passed());

        // All-zero assignment: covering fails.
        let empty = BasisAssignment {
            algebra: b.clone(),
            space: space.clone(),
            bound: 4,
            assign: vec![0; 4],
        };
        let report = check_name_coherence(&empty).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == CoherenceKind::Covering));

        // Two closure-disjoint balls both assigned the unit: disjointness
        // fails. Find two such balls in the enumeration prefix.
        let balls = space.basis_enumerate(64).unwrap();
        let (m, n) = {
            let mut found = None;
            'outer: for i in 0..balls.len() {
                for j in i + 1..balls.len() {
                    if balls[i].closure_disjoint(&balls[j]) {
                        found = Some((i, j));
                        break 'outer;
                    }
                }
            }
            found.expect("the prefix contains disjoint balls")
        };
        let mut assign = vec![0; 64];
        assign[m] = b.full_mask();
        assign[n] = b.full_mask();
        let clashing = BasisAssignment {
            algebra: b.clone(),
            space: space.clone(),
            bound: 64,
            assign,
        };
        let report = check_name_coherence(&clashing).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == CoherenceKind::Disjointness));
    }

    #[test]
    fn lifted_predicates_agree_through_names() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 1]);
        let g = int_fun(&b, &space, &[0, 0]);
        let points: Vec<RationalPoint> = f
            .values()
            .iter()
            .chain(g.values())
            .cloned()
            .collect();
        let bound = adequate_resolution(&points, &space, MAX_BALL_INDEX).unwrap();
        let nf = name_from_function(&f, bound).unwrap();
        let ng = name_from_function(&g, bound).unwrap();
        let code = crate::space::equality_code(&space).unwrap();
        let through_names = lift_relation_on_names(&code, &[&nf, &ng], &points).unwrap();
        let direct = fspace::lift_relation(&code, &[&f, &g]).unwrap();
        assert_eq!(through_names, direct);
        assert_eq!(through_names, b.element_from_atom_names(["a"]).unwrap());

        // Equality of a name with itself is the unit.
        let same = lift_relation_on_names(&code, &[&nf, &nf], &points).unwrap();
        assert!(same.is_one());
    }

    #[test]
    fn quotient_equivalence() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[5, 7]);
        let c = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[2]),
        )
        .unwrap();
        for g in b.ultrafilters() {
            let report = quotient_equivalence_check(&[f.clone(), c.clone()], &g).unwrap();
            assert!(report.passed(), "{report:?}");
        }
        // Empty carrier passes vacuously.
        let g = Ultrafilter::at_atom_name(&b, "a").unwrap();
        assert!(quotient_equivalence_check(&[], &g).unwrap().passed());
    }

    #[test]
    fn name_literal_round_trip() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 1]);
        let bound = adequate_resolution(f.values(), &space, MAX_BALL_INDEX).unwrap();
        let name = name_from_function(&f, bound).unwrap();
        let lit = name.to_literal();
        let json = serde_json::to_string(&lit).unwrap();
        let parsed: NameLiteral = serde_json::from_str(&json).unwrap();
        let back = BasisAssignment::from_literal(&parsed, &b, &space).unwrap();
        assert_eq!(back, name);
    }
}
