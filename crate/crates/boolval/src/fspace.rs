//! The function space `C(St(B), Y)` over a finite Stone space, with lifted
//! Borel predicates, mixing along antichains, and germ quotients.
//!
//! On a finite algebra the Stone space is discrete, so a continuous function
//! into the compactification is just a choice of a point per atom; meager
//! sets are empty, every "modulo meager" clause collapses to exact equality,
//! and `C⁺(St(B), Y) = C(St(B), Y)`. The extended space with a nonempty
//! escape set needs an atomless algebra and is out of reach here, which is
//! why construction rejects the infinity marker outright.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgElement, BooleanAlgebra, Mask, Ultrafilter};
use crate::bvm::{BValuedStructure, FirstOrderStructure, StructureError, StructureView};
use crate::logic::Signature;
use crate::space::{
    complex_apply, eval_borel, ArithOp, BorelCode, ExtendedPoint, PolishPresentation,
    RationalPoint, SpaceError,
};

pub type SpaceRef = Arc<PolishPresentation>;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FspaceError {
    #[error("value at atom `{0}` is the point at infinity; the escape set must be nowhere dense, hence empty over a finite algebra")]
    InfinityValue(String),
    #[error("value at atom `{atom}` is {point}, which is not a member of the space")]
    ValueOutsideSpace { atom: String, point: String },
    #[error("expected one value per atom ({expected}), found {found}")]
    ValuesNotTotal { expected: usize, found: usize },
    #[error("operands belong to different algebras or spaces")]
    MixedStructures,
    #[error("code has arity {code}, but {supplied} functions were supplied")]
    ArityMismatch { code: usize, supplied: usize },
    #[error("family is not an antichain")]
    NotAnAntichain,
    #[error("antichain has {pieces} members but {functions} functions were supplied")]
    MixLengthMismatch { pieces: usize, functions: usize },
    #[error("non-functional graph at atom `{atom}`: {candidates} candidate values survive")]
    NonFunctionalGraph { atom: String, candidates: usize },
    #[error("signature symbol `{0}` has no code")]
    MissingCode(String),
    #[error("code for `{symbol}` has arity {code}, expected {expected}")]
    CodeArity {
        symbol: String,
        code: usize,
        expected: usize,
    },
    #[error("mixing closure would exceed the bound {bound} ({size} functions)")]
    ClosureBoundExceeded { size: usize, bound: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A point of `C(St(B), Y)`: one member of `Y` per atom of `B`. Equality is
/// extensional on the atom values.
#[derive(Clone, Debug, PartialEq)]
pub struct CPlusFunction {
    algebra: BooleanAlgebra,
    space: SpaceRef,
    values: Vec<RationalPoint>,
}

impl CPlusFunction {
    /// Builds a function from per-atom values. Points must lie in the space;
    /// the infinity marker is rejected (its preimage would be a nonempty
    /// clopen set, never nowhere dense at this scale).
    pub fn make(
        algebra: BooleanAlgebra,
        space: SpaceRef,
        values: Vec<ExtendedPoint>,
    ) -> Result<Self, FspaceError> {
        if values.len() != algebra.atom_count() {
            return Err(FspaceError::ValuesNotTotal {
                expected: algebra.atom_count(),
                found: values.len(),
            });
        }
        let mut points = Vec::with_capacity(values.len());
        for (idx, value) in values.into_iter().enumerate() {
            match value {
                ExtendedPoint::Infinity => {
                    return Err(FspaceError::InfinityValue(algebra.atoms()[idx].clone()));
                }
                ExtendedPoint::Point(p) => {
                    if !space.contains(&p) {
                        return Err(FspaceError::ValueOutsideSpace {
                            atom: algebra.atoms()[idx].clone(),
                            point: p.to_string(),
                        });
                    }
                    points.push(p);
                }
            }
        }
        Ok(CPlusFunction {
            algebra,
            space,
            values: points,
        })
    }

    pub fn from_points(
        algebra: BooleanAlgebra,
        space: SpaceRef,
        values: Vec<RationalPoint>,
    ) -> Result<Self, FspaceError> {
        Self::make(
            algebra,
            space,
            values.into_iter().map(ExtendedPoint::Point).collect(),
        )
    }

    /// The constant function `c_y`.
    pub fn constant(
        algebra: BooleanAlgebra,
        space: SpaceRef,
        value: RationalPoint,
    ) -> Result<Self, FspaceError> {
        let n = algebra.atom_count();
        Self::from_points(algebra, space, vec![value; n])
    }

    pub fn algebra(&self) -> &BooleanAlgebra {
        &self.algebra
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn value(&self, atom: usize) -> &RationalPoint {
        &self.values[atom]
    }

    pub fn values(&self) -> &[RationalPoint] {
        &self.values
    }

    /// `⟦self = other⟧`: the atoms where the two functions agree.
    pub fn eq_value(&self, other: &CPlusFunction) -> Result<AlgElement, FspaceError> {
        if self.algebra != other.algebra || self.space.as_ref() != other.space.as_ref() {
            return Err(FspaceError::MixedStructures);
        }
        let mut mask = 0;
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            if a == b {
                mask |= 1 << i;
            }
        }
        Ok(self.algebra.element_from_mask(mask))
    }

    /// JSON form `{atom: point}`.
    pub fn to_literal(&self) -> BTreeMap<String, RationalPoint> {
        self.algebra
            .atoms()
            .iter()
            .cloned()
            .zip(self.values.iter().cloned())
            .collect()
    }

    pub fn from_literal(
        algebra: BooleanAlgebra,
        space: SpaceRef,
        literal: &BTreeMap<String, ExtendedPoint>,
    ) -> Result<Self, FspaceError> {
        let values = algebra
            .atoms()
            .iter()
            .map(|atom| {
                literal
                    .get(atom)
                    .cloned()
                    .ok_or_else(|| FspaceError::ValuesNotTotal {
                        expected: algebra.atom_count(),
                        found: literal.len(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::make(algebra, space, values)
    }
}

fn check_family(funs: &[&CPlusFunction]) -> Result<(), FspaceError> {
    for pair in funs.windows(2) {
        if pair[0].algebra != pair[1].algebra || pair[0].space.as_ref() != pair[1].space.as_ref() {
            return Err(FspaceError::MixedStructures);
        }
    }
    Ok(())
}

/// Lifts a Borel predicate pointwise: the returned element is the set of
/// atoms where the code holds on the tuple of values. On a finite discrete
/// Stone space the regularization `Int Cl` is the identity, so the pointwise
/// set already is the lifted value.
///
/// The code may reference fewer coordinates than functions supplied (a code
/// can ignore a slot), but never more.
pub fn lift_relation(
    code: &BorelCode,
    funs: &[&CPlusFunction],
) -> Result<AlgElement, FspaceError> {
    check_family(funs)?;
    let first = funs.first().ok_or(FspaceError::ArityMismatch {
        code: code.arity(),
        supplied: 0,
    })?;
    if code.arity() > funs.len() {
        return Err(FspaceError::ArityMismatch {
            code: code.arity(),
            supplied: funs.len(),
        });
    }
    let mut mask = 0;
    for atom in 0..first.algebra.atom_count() {
        let points: Vec<RationalPoint> = funs.iter().map(|f| f.values[atom].clone()).collect();
        if eval_borel(&first.space, code, &points)? {
            mask |= 1 << atom;
        }
    }
    Ok(first.algebra.element_from_mask(mask))
}

/// Options for the candidate pool used when realizing a lifted function.
#[derive(Clone, Debug)]
pub struct CandidateOptions {
    /// Basis-ball centers with index below this bound join the pool.
    pub ball_center_bound: usize,
    /// Complex-rational arithmetic closure depth applied to the argument
    /// values (sums, products, negations, inverses).
    pub arith_depth: usize,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions {
            ball_center_bound: 8,
            arith_depth: 2,
        }
    }
}

fn candidate_pool(
    space: &PolishPresentation,
    funs: &[&CPlusFunction],
    opts: &CandidateOptions,
) -> Result<Vec<RationalPoint>, FspaceError> {
    let mut seen: Vec<RationalPoint> = Vec::new();
    let push = |p: RationalPoint, seen: &mut Vec<RationalPoint>| {
        if space.contains(&p) && !seen.contains(&p) {
            seen.push(p);
        }
    };
    for f in funs {
        for v in &f.values {
            push(v.clone(), &mut seen);
        }
    }
    // Finite-discrete spaces already enumerate all their points.
    if let Some(points) = space.finite_points() {
        for p in points {
            push(p.clone(), &mut seen);
        }
        return Ok(seen);
    }
    for ball in space.basis_enumerate(opts.ball_center_bound)? {
        push(ball.center.clone(), &mut seen);
    }
    if matches!(space.mode(), crate::space::SpaceMode::ComplexRational) {
        let mut frontier: Vec<RationalPoint> = Vec::new();
        for f in funs {
            for v in &f.values {
                if !frontier.contains(v) {
                    frontier.push(v.clone());
                }
            }
        }
        for _ in 0..opts.arith_depth {
            let base = frontier.clone();
            let mut next = Vec::new();
            for a in &base {
                for op in [ArithOp::Add, ArithOp::Mul] {
                    for b in &base {
                        next.push(complex_apply(op, a, b));
                    }
                }
                next.push(complex_apply(
                    ArithOp::Mul,
                    a,
                    &RationalPoint::from_integers(&[-1]),
                ));
                if let Some(inv) = complex_inverse(a) {
                    next.push(inv);
                }
            }
            for p in next {
                if !frontier.contains(&p) {
                    frontier.push(p);
                }
            }
        }
        for p in frontier {
            push(p, &mut seen);
        }
    }
    Ok(seen)
}

fn complex_inverse(p: &RationalPoint) -> Option<RationalPoint> {
    use num_traits::Zero;
    let (re, im) = (p.coord(0), p.coord(1));
    let norm = &re * &re + &im * &im;
    if norm.is_zero() {
        return None;
    }
    Some(RationalPoint::new(vec![&re / &norm, -(&im / &norm)]))
}

/// Lifts the graph of a Borel function pointwise: at each atom exactly one
/// candidate value may satisfy the graph. A partial operation (division at
/// zero, say) surfaces as a non-functional graph error, since there is no
/// dense open set to repair it on over a discrete space.
pub fn lift_function(
    graph: &BorelCode,
    funs: &[&CPlusFunction],
    opts: &CandidateOptions,
) -> Result<CPlusFunction, FspaceError> {
    check_family(funs)?;
    let first = funs.first().ok_or(FspaceError::ArityMismatch {
        code: graph.arity(),
        supplied: 0,
    })?;
    if graph.arity() > funs.len() + 1 {
        return Err(FspaceError::ArityMismatch {
            code: graph.arity(),
            supplied: funs.len(),
        });
    }
    let candidates = candidate_pool(&first.space, funs, opts)?;
    let mut values = Vec::with_capacity(first.algebra.atom_count());
    for atom in 0..first.algebra.atom_count() {
        let mut points: Vec<RationalPoint> =
            funs.iter().map(|f| f.values[atom].clone()).collect();
        let mut survivors = Vec::new();
        for candidate in &candidates {
            points.push(candidate.clone());
            if eval_borel(&first.space, graph, &points)? {
                survivors.push(candidate.clone());
            }
            points.pop();
        }
        if survivors.len() != 1 {
            return Err(FspaceError::NonFunctionalGraph {
                atom: first.algebra.atoms()[atom].clone(),
                candidates: survivors.len(),
            });
        }
        values.push(survivors.pop().expect("one survivor"));
    }
    CPlusFunction::from_points(first.algebra.clone(), first.space.clone(), values)
}

/// Glues functions along an antichain: the result agrees with `fs[i]` on the
/// atoms of `antichain[i]` and takes the default value outside the union.
pub fn mix(
    antichain: &[AlgElement],
    fs: &[CPlusFunction],
    default: &RationalPoint,
) -> Result<CPlusFunction, FspaceError> {
    if antichain.len() != fs.len() {
        return Err(FspaceError::MixLengthMismatch {
            pieces: antichain.len(),
            functions: fs.len(),
        });
    }
    let refs: Vec<&CPlusFunction> = fs.iter().collect();
    check_family(&refs)?;
    let first = fs.first().ok_or(FspaceError::NotAnAntichain)?;
    let algebra = &first.algebra;
    for a in antichain {
        if a.algebra() != algebra {
            return Err(FspaceError::MixedStructures);
        }
    }
    if !algebra.is_antichain(antichain).unwrap_or(false) {
        return Err(FspaceError::NotAnAntichain);
    }
    if !first.space.contains(default) {
        return Err(FspaceError::ValueOutsideSpace {
            atom: "(default)".into(),
            point: default.to_string(),
        });
    }
    let values = (0..algebra.atom_count())
        .map(|atom| {
            antichain
                .iter()
                .position(|a| a.contains_atom(atom))
                .map(|i| fs[i].values[atom].clone())
                .unwrap_or_else(|| default.clone())
        })
        .collect();
    CPlusFunction::from_points(algebra.clone(), first.space.clone(), values)
}

/// Mixes the empty antichain: the constant default.
pub fn mix_empty(
    algebra: &BooleanAlgebra,
    space: &SpaceRef,
    default: &RationalPoint,
) -> Result<CPlusFunction, FspaceError> {
    CPlusFunction::constant(algebra.clone(), space.clone(), default.clone())
}

/// The computed view behind function-space structures.
///
/// Carrier values are interned per atom, so a lifted value at an atom is
/// evaluated once per distinct value tuple there and shared by every carrier
/// tuple that hits it.
pub struct FnSpaceView {
    algebra: BooleanAlgebra,
    space: SpaceRef,
    carrier: Vec<CPlusFunction>,
    rel_codes: BTreeMap<String, BorelCode>,
    fun_codes: BTreeMap<String, BorelCode>,
    default: RationalPoint,
    eq: Vec<Mask>,
    by_values: HashMap<Vec<RationalPoint>, usize>,
    /// Distinct values occurring at each atom.
    palettes: Vec<Vec<RationalPoint>>,
    /// Palette index of each carrier element's value at each atom.
    value_ids: Vec<Vec<u16>>,
    point_cache: Mutex<HashMap<(u32, usize, Vec<u16>), bool>>,
}

impl FnSpaceView {
    /// Stable id for a symbol's code: relations first, then functions, in
    /// map order.
    fn code_id(&self, symbol: &str, function: bool) -> u32 {
        if function {
            self.rel_codes.len() as u32
                + self.fun_codes.keys().position(|k| k == symbol).expect("known symbol") as u32
        } else {
            self.rel_codes.keys().position(|k| k == symbol).expect("known symbol") as u32
        }
    }

    fn lift_tuple(&self, code_id: u32, code: &BorelCode, tuple: &[usize]) -> Mask {
        let mut mask = 0;
        for atom in 0..self.algebra.atom_count() {
            let ids: Vec<u16> = tuple.iter().map(|&i| self.value_ids[i][atom]).collect();
            let key = (code_id, atom, ids);
            let mut cache = self.point_cache.lock().unwrap();
            let hit = match cache.get(&key) {
                Some(&h) => h,
                None => {
                    let points: Vec<RationalPoint> = key
                        .2
                        .iter()
                        .map(|&id| self.palettes[atom][id as usize].clone())
                        .collect();
                    let h = eval_borel(&self.space, code, &points)
                        .expect("carrier points are members");
                    cache.insert(key, h);
                    h
                }
            };
            if hit {
                mask |= 1 << atom;
            }
        }
        mask
    }
}

impl StructureView for FnSpaceView {
    fn eq_mask(&self, left: usize, right: usize) -> Mask {
        self.eq[left * self.carrier.len() + right]
    }

    fn rel_mask(&self, symbol: &str, tuple: &[usize]) -> Mask {
        let code = &self.rel_codes[symbol];
        self.lift_tuple(self.code_id(symbol, false), code, tuple)
    }

    fn fun_mask(&self, symbol: &str, args: &[usize], out: usize) -> Mask {
        let mut tuple = args.to_vec();
        tuple.push(out);
        let code = &self.fun_codes[symbol];
        self.lift_tuple(self.code_id(symbol, true), code, &tuple)
    }

    fn mix(&self, pieces: &[(Mask, usize)]) -> Option<usize> {
        let values: Vec<RationalPoint> = (0..self.algebra.atom_count())
            .map(|atom| {
                pieces
                    .iter()
                    .find(|&&(b, _)| b & (1 << atom) != 0)
                    .map(|&(_, g)| self.carrier[g].values[atom].clone())
                    .unwrap_or_else(|| self.default.clone())
            })
            .collect();
        self.by_values.get(&values).copied()
    }
}

/// A Boolean-valued structure whose domain is a mixing-closed family of
/// functions and whose value maps are lifted Borel codes.
pub struct FunctionSpaceStructure {
    structure: BValuedStructure,
    view: Arc<FnSpaceView>,
}

#[derive(Clone, Debug)]
pub struct FunctionSpaceOptions {
    /// Default value used to complete mixes; `None` picks the space's
    /// designated point (the origin, or the first listed point).
    pub default_point: Option<RationalPoint>,
    /// Cap on the carrier size after mixing closure.
    pub closure_bound: usize,
}

impl Default for FunctionSpaceOptions {
    fn default() -> Self {
        FunctionSpaceOptions {
            default_point: None,
            closure_bound: 4096,
        }
    }
}

/// Closes the carrier under mixing and wraps it as a Boolean-valued
/// structure. Equality is the lifted diagonal; relation and function symbols
/// evaluate their codes pointwise. The closure adds every function whose
/// value at each atom is a carrier value at that atom or the default, which
/// realizes all mixes used by witness search.
pub fn as_bvalued_structure(
    algebra: &BooleanAlgebra,
    space: &SpaceRef,
    sig: &Signature,
    rel_codes: &BTreeMap<String, BorelCode>,
    fun_codes: &BTreeMap<String, BorelCode>,
    carrier: Vec<CPlusFunction>,
    opts: &FunctionSpaceOptions,
) -> Result<FunctionSpaceStructure, FspaceError> {
    for f in &carrier {
        if f.algebra != *algebra || f.space.as_ref() != space.as_ref() {
            return Err(FspaceError::MixedStructures);
        }
    }
    for (symbol, &arity) in sig.relations() {
        let code = rel_codes
            .get(symbol)
            .ok_or_else(|| FspaceError::MissingCode(symbol.clone()))?;
        if code.arity() > arity {
            return Err(FspaceError::CodeArity {
                symbol: symbol.clone(),
                code: code.arity(),
                expected: arity,
            });
        }
    }
    for (symbol, &arity) in sig.functions() {
        let code = fun_codes
            .get(symbol)
            .ok_or_else(|| FspaceError::MissingCode(symbol.clone()))?;
        if code.arity() > arity + 1 {
            return Err(FspaceError::CodeArity {
                symbol: symbol.clone(),
                code: code.arity(),
                expected: arity + 1,
            });
        }
    }
    let default = match &opts.default_point {
        Some(p) => {
            if !space.contains(p) {
                return Err(FspaceError::ValueOutsideSpace {
                    atom: "(default)".into(),
                    point: p.to_string(),
                });
            }
            p.clone()
        }
        None => space.default_point(),
    };

    let atoms = algebra.atom_count();
    let mut palettes: Vec<Vec<RationalPoint>> = vec![Vec::new(); atoms];
    for (atom, palette) in palettes.iter_mut().enumerate() {
        for f in &carrier {
            if !palette.contains(&f.values[atom]) {
                palette.push(f.values[atom].clone());
            }
        }
        if !palette.contains(&default) {
            palette.push(default.clone());
        }
    }
    let closure_size: usize = palettes.iter().map(Vec::len).product();
    if closure_size > opts.closure_bound {
        return Err(FspaceError::ClosureBoundExceeded {
            size: closure_size,
            bound: opts.closure_bound,
        });
    }

    let mut closed = carrier;
    let mut counter = vec![0usize; atoms];
    loop {
        let values: Vec<RationalPoint> = counter
            .iter()
            .enumerate()
            .map(|(atom, &i)| palettes[atom][i].clone())
            .collect();
        if !closed.iter().any(|f| f.values == values) {
            closed.push(CPlusFunction {
                algebra: algebra.clone(),
                space: space.clone(),
                values,
            });
        }
        let mut pos = 0;
        loop {
            if pos == atoms {
                break;
            }
            counter[pos] += 1;
            if counter[pos] < palettes[pos].len() {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
        if pos == atoms {
            break;
        }
    }

    let n = closed.len();
    let mut eq = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut mask = 0;
            for atom in 0..atoms {
                if closed[i].values[atom] == closed[j].values[atom] {
                    mask |= 1 << atom;
                }
            }
            eq[i * n + j] = mask;
        }
    }
    let by_values = closed
        .iter()
        .enumerate()
        .map(|(i, f)| (f.values.clone(), i))
        .collect();
    let value_ids: Vec<Vec<u16>> = closed
        .iter()
        .map(|f| {
            f.values
                .iter()
                .enumerate()
                .map(|(atom, v)| {
                    palettes[atom]
                        .iter()
                        .position(|p| p == v)
                        .expect("closure values come from the palettes") as u16
                })
                .collect()
        })
        .collect();

    let domain: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    let view = Arc::new(FnSpaceView {
        algebra: algebra.clone(),
        space: space.clone(),
        carrier: closed,
        rel_codes: rel_codes.clone(),
        fun_codes: fun_codes.clone(),
        default,
        eq,
        by_values,
        palettes,
        value_ids,
        point_cache: Mutex::new(HashMap::new()),
    });
    let structure =
        BValuedStructure::from_view(algebra.clone(), sig.clone(), domain, view.clone())?;
    Ok(FunctionSpaceStructure { structure, view })
}

impl FunctionSpaceStructure {
    pub fn as_structure(&self) -> &BValuedStructure {
        &self.structure
    }

    pub fn carrier(&self) -> &[CPlusFunction] {
        &self.view.carrier
    }

    pub fn carrier_index(&self, f: &CPlusFunction) -> Option<usize> {
        self.view.by_values.get(&f.values).copied()
    }

    pub fn element_name_of(&self, f: &CPlusFunction) -> Option<&str> {
        self.carrier_index(f)
            .map(|i| self.structure.element_name(i))
    }

    pub fn default_point(&self) -> &RationalPoint {
        &self.view.default
    }

    /// The germ structure at a point of the Stone space. At finite scale a
    /// germ is determined by the value at the point's atom, and relations on
    /// germs evaluate their codes directly on those values.
    pub fn germ_quotient(&self, p: &Ultrafilter) -> Result<GermStructure, FspaceError> {
        if p.algebra() != &self.view.algebra {
            return Err(FspaceError::MixedStructures);
        }
        let atom = p.atom_index();
        let mut points: Vec<RationalPoint> = Vec::new();
        let mut class_of = Vec::with_capacity(self.view.carrier.len());
        for f in &self.view.carrier {
            let v = &f.values[atom];
            let class = match points.iter().position(|p| p == v) {
                Some(c) => c,
                None => {
                    points.push(v.clone());
                    points.len() - 1
                }
            };
            class_of.push(class);
        }
        Ok(GermStructure {
            view: self.view.clone(),
            base: p.clone(),
            points,
            class_of,
        })
    }
}

/// The ring of germs of a function-space structure at a Stone-space point.
#[derive(Clone)]
pub struct GermStructure {
    view: Arc<FnSpaceView>,
    base: Ultrafilter,
    points: Vec<RationalPoint>,
    class_of: Vec<usize>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GermError {
    #[error("graph of `{symbol}` is not functional on the germs at {base}")]
    NonFunctional { symbol: String, base: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

impl GermStructure {
    pub fn base(&self) -> &Ultrafilter {
        &self.base
    }

    pub fn germ_count(&self) -> usize {
        self.points.len()
    }

    /// The point of `Y` a germ is identified with (the value at the base
    /// atom); the map `[f] ↦ f(atom)` embeds the germs into `Y`.
    pub fn point_of(&self, germ: usize) -> &RationalPoint {
        &self.points[germ]
    }

    /// Germ class of a carrier element.
    pub fn class_of(&self, carrier_index: usize) -> usize {
        self.class_of[carrier_index]
    }

    pub fn classes(&self) -> &[usize] {
        &self.class_of
    }

    pub fn rel_holds(&self, symbol: &str, germs: &[usize]) -> Result<bool, GermError> {
        let code = &self.view.rel_codes[symbol];
        let points: Vec<RationalPoint> = germs.iter().map(|&g| self.points[g].clone()).collect();
        Ok(eval_borel(&self.view.space, code, &points)?)
    }

    pub fn fun_apply(&self, symbol: &str, germs: &[usize]) -> Result<usize, GermError> {
        let code = &self.view.fun_codes[symbol];
        let mut points: Vec<RationalPoint> =
            germs.iter().map(|&g| self.points[g].clone()).collect();
        let mut found = None;
        for (out, out_point) in self.points.iter().enumerate() {
            points.push(out_point.clone());
            let hit = eval_borel(&self.view.space, code, &points)?;
            points.pop();
            if hit {
                if found.is_some() {
                    return Err(GermError::NonFunctional {
                        symbol: symbol.to_owned(),
                        base: format!("G@{}", self.base.atom_name()),
                    });
                }
                found = Some(out);
            }
        }
        found.ok_or_else(|| GermError::NonFunctional {
            symbol: symbol.to_owned(),
            base: format!("G@{}", self.base.atom_name()),
        })
    }

    /// Renders the germs as a plain first-order structure (element names are
    /// the germ points) for Tarski evaluation and cross-checks.
    pub fn to_first_order(&self, sig: &Signature) -> Result<FirstOrderStructure, GermError> {
        let elements: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        let mut relations = BTreeMap::new();
        for (symbol, &arity) in sig.relations() {
            let mut rows = std::collections::BTreeSet::new();
            for tuple in tuples(self.points.len(), arity) {
                if self.rel_holds(symbol, &tuple)? {
                    rows.insert(tuple);
                }
            }
            relations.insert(symbol.clone(), rows);
        }
        let mut functions = BTreeMap::new();
        for (symbol, &arity) in sig.functions() {
            let mut rows = BTreeMap::new();
            for tuple in tuples(self.points.len(), arity) {
                rows.insert(tuple.clone(), self.fun_apply(symbol, &tuple)?);
            }
            functions.insert(symbol.clone(), rows);
        }
        Ok(FirstOrderStructure {
            elements,
            relations,
            functions,
            class_of: Some(self.class_of.clone()),
        })
    }
}

fn tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
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

/// Comparison data for the germ/quotient cross-check.
#[derive(Clone, Debug, Serialize)]
pub struct GermQuotientAgreement {
    pub partitions_agree: bool,
    pub relations_agree: bool,
    pub functions_agree: bool,
}

impl GermQuotientAgreement {
    pub fn agrees(&self) -> bool {
        self.partitions_agree && self.relations_agree && self.functions_agree
    }
}

/// Checks that the germ structure coincides with the ultrafilter quotient of
/// the same structure: same partition of the carrier (both pick classes in
/// first-occurrence order) and the same relation and function tables.
pub fn germ_agrees_with_quotient(
    germ: &GermStructure,
    quotient: &FirstOrderStructure,
    sig: &Signature,
) -> Result<GermQuotientAgreement, GermError> {
    let partitions_agree =
        quotient.class_of.as_deref() == Some(germ.classes()) && quotient.len() == germ.germ_count();
    let mut relations_agree = true;
    'rels: for (symbol, &arity) in sig.relations() {
        for tuple in tuples(germ.germ_count(), arity) {
            if germ.rel_holds(symbol, &tuple)? != quotient.rel_holds(symbol, &tuple) {
                relations_agree = false;
                break 'rels;
            }
        }
    }
    let mut functions_agree = true;
    'funs: for (symbol, &arity) in sig.functions() {
        for tuple in tuples(germ.germ_count(), arity) {
            if Some(germ.fun_apply(symbol, &tuple)?) != quotient.fun_apply(symbol, &tuple) {
                functions_agree = false;
                break 'funs;
            }
        }
    }
    Ok(GermQuotientAgreement {
        partitions_agree,
        relations_agree,
        functions_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvm::{check_structure_axioms, quotient as bvm_quotient};
    use crate::poset::FinitePoset;
    use crate::space::BorelCode;

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
    fn construction_validates_values() {
        let (b, space) = setup();
        assert!(CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[5])
        )
        .is_ok());

        let err = CPlusFunction::make(
            b.clone(),
            space.clone(),
            vec![
                ExtendedPoint::Infinity,
                ExtendedPoint::Point(RationalPoint::origin()),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, FspaceError::InfinityValue(atom) if atom == "a"));

        let nat = Arc::new(PolishPresentation::naturals());
        let err = CPlusFunction::from_points(
            b.clone(),
            nat,
            vec![
                RationalPoint::parse(&["1/2"]).unwrap(),
                RationalPoint::origin(),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, FspaceError::ValueOutsideSpace { .. }));
    }

    #[test]
    fn lifted_equality_diagonal() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 1]);
        let g = int_fun(&b, &space, &[0, 0]);
        let code = crate::space::equality_code(&space).unwrap();
        assert!(lift_relation(&code, &[&f, &f]).unwrap().is_one());
        assert_eq!(
            lift_relation(&code, &[&f, &g]).unwrap(),
            b.element_from_atom_names(["a"]).unwrap()
        );
        assert_eq!(
            lift_relation(&code, &[&f, &g]).unwrap(),
            f.eq_value(&g).unwrap()
        );
    }

    #[test]
    fn lifted_unit_ball() {
        let (b, space) = setup();
        let f = CPlusFunction::from_points(
            b.clone(),
            space.clone(),
            vec![
                RationalPoint::origin(),
                RationalPoint::from_integers(&[2, 0]),
            ],
        )
        .unwrap();
        // Ball 0 is the unit ball at the origin.
        let value = lift_relation(&BorelCode::ball(0), &[&f]).unwrap();
        assert_eq!(value, b.element_from_atom_names(["a"]).unwrap());
    }

    /// Int-closure is the identity on the discrete Stone space: every subset
    /// of the antichain poset of atoms is its own regularization.
    #[test]
    fn int_closure_is_identity_on_atoms() {
        let (b, _) = setup();
        let poset = FinitePoset::new(b.atoms().iter().cloned(), &[]).unwrap();
        for set in 0u64..4 {
            assert_eq!(poset.int_closure(set).unwrap(), set);
        }
    }

    #[test]
    fn lift_function_addition_and_inverse() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[1, 2]);
        let g = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[1]),
        )
        .unwrap();
        let sum = lift_function(
            &BorelCode::sum_graph(0, 1, 2),
            &[&f, &g],
            &CandidateOptions::default(),
        )
        .unwrap();
        assert_eq!(sum.values(), int_fun(&b, &space, &[2, 3]).values());

        let two = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[2]),
        )
        .unwrap();
        let three = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[3]),
        )
        .unwrap();
        let five = lift_function(
            &BorelCode::sum_graph(0, 1, 2),
            &[&two, &three],
            &CandidateOptions::default(),
        )
        .unwrap();
        assert!(five
            .values()
            .iter()
            .all(|p| *p == RationalPoint::from_integers(&[5])));

        // Multiplicative inverse of a function vanishing at an atom: the
        // singularity is not repairable over a discrete space.
        let vanishing = int_fun(&b, &space, &[0, 2]);
        let err = lift_function(
            &BorelCode::inverse_graph(),
            &[&vanishing],
            &CandidateOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            FspaceError::NonFunctionalGraph { atom, candidates: 0 } if atom == "a"
        ));
    }

    #[test]
    fn mix_follows_the_antichain() {
        let b = BooleanAlgebra::powerset(["a", "b", "c"]).unwrap();
        let space: SpaceRef = Arc::new(PolishPresentation::complex_rational());
        let f5 = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[5]),
        )
        .unwrap();
        let f7 = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[7]),
        )
        .unwrap();
        let antichain = vec![
            b.element_from_atom_names(["a"]).unwrap(),
            b.element_from_atom_names(["b"]).unwrap(),
        ];
        let mixed = mix(
            &antichain,
            &[f5.clone(), f7.clone()],
            &RationalPoint::origin(),
        )
        .unwrap();
        assert_eq!(mixed.value(0), &RationalPoint::from_integers(&[5]));
        assert_eq!(mixed.value(1), &RationalPoint::from_integers(&[7]));
        assert_eq!(mixed.value(2), &RationalPoint::origin());

        // a <= ⟦mix = f_a⟧, through the lifted diagonal.
        let code = crate::space::equality_code(&space).unwrap();
        for (a, f) in antichain.iter().zip([&f5, &f7]) {
            let eq = lift_relation(&code, &[&mixed, f]).unwrap();
            assert!(a.leq(&eq).unwrap());
        }

        // Singleton antichain of 1 reproduces the function.
        let whole = vec![b.top()];
        let same = mix(&whole, &[f5.clone()], &RationalPoint::origin()).unwrap();
        assert_eq!(same.values(), f5.values());

        // Non-antichain input is rejected.
        let overlapping = vec![b.top(), b.element_from_atom_names(["a"]).unwrap()];
        assert_eq!(
            mix(&overlapping, &[f5.clone(), f7], &RationalPoint::origin()).unwrap_err(),
            FspaceError::NotAnAntichain
        );

        // Empty antichain gives the constant default.
        let empty = mix_empty(&b, &space, &RationalPoint::origin()).unwrap();
        assert!(empty.values().iter().all(|p| *p == RationalPoint::origin()));
    }

    fn small_structure() -> (BooleanAlgebra, SpaceRef, FunctionSpaceStructure) {
        let (b, space) = setup();
        let sig = Signature::of(&[("inball", 1)], &[]);
        let mut rel_codes = BTreeMap::new();
        rel_codes.insert("inball".to_string(), BorelCode::ball(0));
        let carrier = vec![
            int_fun(&b, &space, &[0, 1]),
            CPlusFunction::constant(b.clone(), space.clone(), RationalPoint::from_integers(&[1]))
                .unwrap(),
        ];
        let fss = as_bvalued_structure(
            &b,
            &space,
            &sig,
            &rel_codes,
            &BTreeMap::new(),
            carrier,
            &FunctionSpaceOptions::default(),
        )
        .unwrap();
        (b, space, fss)
    }

    #[test]
    fn structure_passes_axioms_and_closes_carrier() {
        let (_, _, fss) = small_structure();
        // Palettes: atom a has {0, 1} (0 is also the default), atom b has
        // {1, 0}; the closure is all four value combinations.
        assert_eq!(fss.carrier().len(), 4);
        let report = check_structure_axioms(fss.as_structure());
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn constant_embedding_equalities() {
        let (b, space) = setup();
        let code = crate::space::equality_code(&space).unwrap();
        let c0 =
            CPlusFunction::constant(b.clone(), space.clone(), RationalPoint::origin()).unwrap();
        let c1 = CPlusFunction::constant(
            b.clone(),
            space.clone(),
            RationalPoint::from_integers(&[1]),
        )
        .unwrap();
        assert!(lift_relation(&code, &[&c0, &c0]).unwrap().is_one());
        assert!(lift_relation(&code, &[&c0, &c1]).unwrap().is_zero());
    }

    #[test]
    fn germ_quotient_matches_bvm_quotient() {
        let (b, _, fss) = small_structure();
        for g in b.ultrafilters() {
            let germ = fss.germ_quotient(&g).unwrap();
            let q = bvm_quotient(fss.as_structure(), &g).unwrap();
            let agreement =
                germ_agrees_with_quotient(&germ, &q, fss.as_structure().signature()).unwrap();
            assert!(agreement.agrees(), "{agreement:?} at {g:?}");
        }
    }

    #[test]
    fn germs_of_constants_embed_into_the_space() {
        let (b, space) = setup();
        let sig = Signature::of(&[("inball", 1)], &[]);
        let mut rel_codes = BTreeMap::new();
        rel_codes.insert("inball".to_string(), BorelCode::ball(0));
        let carrier = vec![
            CPlusFunction::constant(b.clone(), space.clone(), RationalPoint::origin()).unwrap(),
            CPlusFunction::constant(
                b.clone(),
                space.clone(),
                RationalPoint::from_integers(&[1]),
            )
            .unwrap(),
        ];
        let fss = as_bvalued_structure(
            &b,
            &space,
            &sig,
            &rel_codes,
            &BTreeMap::new(),
            carrier,
            &FunctionSpaceOptions::default(),
        )
        .unwrap();
        let g = Ultrafilter::at_atom_name(&b, "a").unwrap();
        let germ = fss.germ_quotient(&g).unwrap();
        assert_eq!(germ.germ_count(), 2);
        // R^X/p([f]) iff R(f(atom)): the origin is in the unit ball, 1 is
        // on its boundary, hence outside.
        assert!(germ.rel_holds("inball", &[0]).unwrap());
        assert!(!germ.rel_holds("inball", &[1]).unwrap());
    }

    #[test]
    fn mixed_function_relation_value_is_mix_of_pieces() {
        let (b, space) = setup();
        let f = int_fun(&b, &space, &[0, 2]);
        let g = int_fun(&b, &space, &[2, 0]);
        let pieces = vec![
            b.element_from_atom_names(["a"]).unwrap(),
            b.element_from_atom_names(["b"]).unwrap(),
        ];
        let mixed = mix(&pieces, &[f.clone(), g.clone()], &RationalPoint::origin()).unwrap();
        let ball = BorelCode::ball(0);
        let vf = lift_relation(&ball, &[&f]).unwrap();
        let vg = lift_relation(&ball, &[&g]).unwrap();
        let vm = lift_relation(&ball, &[&mixed]).unwrap();
        // On each piece, the mixed value agrees with the piece's value.
        assert_eq!(vm.meet(&pieces[0]).unwrap(), vf.meet(&pieces[0]).unwrap());
        assert_eq!(vm.meet(&pieces[1]).unwrap(), vg.meet(&pieces[1]).unwrap());
    }
}
