//! The linear inequality system attached to a core graph.
//!
//! Fix a factor index `alpha` and a set `T` of at least two distinct
//! elements of that factor. Choosing one nonempty set of primary vertices
//! per element of `T` induces pairs (element, vertex); two pairs are related
//! when their vertices carry `alpha`-edges into a common secondary vertex
//! whose label quotient equals the element quotient. The choice is
//! *admissible* when every class of the induced partition has size at least
//! two, and each admissible choice contributes one inequality over subset
//! variables `x_A` and a slack variable `x_s`. The deduplicated system over
//! all `2 <= |T| <= d` feeds an exact linear program whose optimum is
//! `-sigma_d * brr` for the subgroup carried by the graph (see `lp`).

use crate::agraph::AGraph;
use crate::fiber::FiberCore;
use crate::groups::{FactorGroup, GroupElem, GroupError};
use crate::lp::{rat, LinearProgram, Rational};
use crate::par::par_map;
use itertools::Itertools;
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Set of primary vertices as a bitset; bit `i` is primary vertex `i`.
pub type VertexSet = u64;

/// Largest primary-vertex count representable by `VertexSet`.
pub const MAX_PRIMARIES: usize = 63;

/// Errors from system generation and the sigma pipeline.
#[derive(Debug, Error)]
pub enum SliError {
    #[error("the inequality system needs exactly two factors, got {0}; embed the product first")]
    NotTwoFactor(usize),
    #[error("graph has {0} primary vertices, more than the supported {MAX_PRIMARIES}")]
    TooManyPrimaries(usize),
    #[error("degree bound must be at least 3, got {0}")]
    DegreeBoundTooSmall(usize),
    #[error("factor {0} is infinite; use the word-oracle enumeration for it")]
    InfiniteFactor(usize),
    #[error("anchor elements must be distinct")]
    DuplicateAnchors,
    #[error("function is not admissible")]
    NotAdmissible,
    #[error("no fiber primary vertex projects onto partner primary vertex {0}")]
    NotPartner(usize),
    #[error("graph has no edges of factor {0}, so the optimum is unbounded")]
    MissingFactor(usize),
    #[error("graph carries a cyclic subgroup; reduced rank must be positive")]
    RankZero,
    #[error("graph must be connected")]
    Disconnected,
    #[error("graph must be irreducible")]
    NotIrreducible,
    #[error("solver contradiction: {0}")]
    Solver(&'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A labeling candidate: for each element of `T` (distinct, kept sorted) a
/// nonempty set of primary vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AdmissibleFunction {
    pub alpha: usize,
    pub terms: Vec<(GroupElem, VertexSet)>,
}

/// One inequality of the system:
/// `sign * (x_{A_1} + .. + x_{A_k}) - (k-2) x_s <= -excess`
/// with `sign = -1` for factor 0 and `+1` for factor 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    /// A representative admissible function producing this inequality.
    pub defining: AdmissibleFunction,
    /// Image multiset of `defining`, sorted; with `alpha` and `excess` this
    /// is the deduplication key.
    pub images: Vec<VertexSet>,
    /// Total class size beyond two per class.
    pub excess: u64,
}

impl Inequality {
    fn new(defining: AdmissibleFunction, excess: u64) -> Self {
        let mut images: Vec<VertexSet> = defining.terms.iter().map(|(_, a)| *a).collect();
        images.sort_unstable();
        Inequality { defining, images, excess }
    }

    pub fn alpha(&self) -> usize {
        self.defining.alpha
    }

    pub fn k(&self) -> usize {
        self.images.len()
    }

    pub fn sign(&self) -> i64 {
        if self.alpha() == 0 {
            -1
        } else {
            1
        }
    }

    pub fn xs_coeff(&self) -> i64 {
        -((self.k() - 2) as i64)
    }

    pub fn rhs(&self) -> i64 {
        -(self.excess as i64)
    }

    fn key(&self) -> (usize, Vec<VertexSet>, u64) {
        (self.alpha(), self.images.clone(), self.excess)
    }
}

/// The deduplicated inequality system of a graph for degree bound `d`.
#[derive(Clone, Debug)]
pub struct SliSystem {
    pub y1: AGraph,
    pub d: usize,
    /// Canonically ordered by (alpha, sorted images, excess).
    pub inequalities: Vec<Inequality>,
    /// Sorted distinct subsets appearing in any inequality; the LP variables
    /// are these subsets followed by `x_s`.
    pub subsets: Vec<VertexSet>,
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// The unique `alpha`-edge at each primary vertex that has one, as
/// `(primary, secondary, label)` in edge order.
fn alpha_stars(y: &AGraph, alpha: usize) -> Vec<(usize, usize, GroupElem)> {
    let mut out: Vec<(usize, usize, GroupElem)> = Vec::new();
    for e in y.edges() {
        if y.secondary_type(e.secondary) == alpha {
            debug_assert!(
                out.iter().all(|(u, _, _)| *u != e.primary),
                "each primary vertex has at most one edge per factor"
            );
            out.push((e.primary, e.secondary, e.label.clone()));
        }
    }
    out
}

/// Pair classes of a labeling, including singleton classes for vertices
/// without an `alpha`-edge. Pairs are `(term index, primary vertex)`; class
/// order is deterministic.
pub fn equivalence_classes(y: &AGraph, f: &AdmissibleFunction) -> Vec<Vec<(usize, usize)>> {
    let fac = y.spec().factor(f.alpha);
    let star: BTreeMap<usize, (usize, GroupElem)> = alpha_stars(y, f.alpha)
        .into_iter()
        .map(|(u, w, g)| (u, (w, g)))
        .collect();
    let mut keyed: BTreeMap<(usize, GroupElem), Vec<(usize, usize)>> = BTreeMap::new();
    let mut single = Vec::new();
    for (i, (ti, img)) in f.terms.iter().enumerate() {
        let inv = fac.inv(ti);
        for u in bits(*img) {
            match star.get(&u) {
                Some((w, g)) => keyed.entry((*w, fac.mul(&inv, g))).or_default().push((i, u)),
                None => single.push(vec![(i, u)]),
            }
        }
    }
    keyed.into_values().chain(single).collect()
}

/// Excess of an admissible labeling: the sum over classes of (size - 2).
/// Errors when some image is empty, elements repeat, or a class has size
/// below two.
pub fn n_alpha(y: &AGraph, f: &AdmissibleFunction) -> Result<u64, SliError> {
    if f.terms.len() < 2 || f.terms.iter().any(|(_, img)| *img == 0) {
        return Err(SliError::NotAdmissible);
    }
    let distinct: BTreeSet<&GroupElem> = f.terms.iter().map(|(t, _)| t).collect();
    if distinct.len() != f.terms.len() {
        return Err(SliError::NotAdmissible);
    }
    let classes = equivalence_classes(y, f);
    if classes.iter().any(|c| c.len() < 2) {
        return Err(SliError::NotAdmissible);
    }
    Ok(classes.iter().map(|c| (c.len() - 2) as u64).sum())
}

/// All inequalities of admissible labelings over the fixed sorted set `t`,
/// deduplicated within this call, in a deterministic order.
///
/// Classes are in bijection with class keys (secondary vertex, element
/// quotient), and a key meets each term in at most one vertex. A labeling is
/// therefore a choice, per key, of a sub-multiset of its incidences of size
/// zero or at least two, covering every term; the search walks those choices
/// directly.
pub fn inequalities_for_t(y: &AGraph, alpha: usize, t: &[GroupElem]) -> Vec<Inequality> {
    debug_assert!(t.len() >= 2 && t.windows(2).all(|w| w[0] < w[1]), "t must be sorted and distinct");
    let fac = y.spec().factor(alpha);
    let k = t.len();
    let stars = alpha_stars(y, alpha);
    let mut keyed: BTreeMap<(usize, GroupElem), Vec<(usize, usize)>> = BTreeMap::new();
    for (i, ti) in t.iter().enumerate() {
        let inv = fac.inv(ti);
        for (u, w, g) in &stars {
            keyed.entry((*w, fac.mul(&inv, g))).or_default().push((i, *u));
        }
    }
    // Keys met by a single pair can only take the empty choice.
    let keys: Vec<Vec<(usize, usize)>> = keyed.into_values().filter(|c| c.len() >= 2).collect();
    let all = (1u64 << k) - 1;
    let mut suffix = vec![0u64; keys.len() + 1];
    for j in (0..keys.len()).rev() {
        suffix[j] = suffix[j + 1] | keys[j].iter().fold(0u64, |m, &(i, _)| m | 1 << i);
    }
    let mut images = vec![0u64; k];
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    choose(alpha, t, &keys, &suffix, all, 0, 0, 0, &mut images, &mut seen, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn choose(
    alpha: usize,
    t: &[GroupElem],
    keys: &[Vec<(usize, usize)>],
    suffix: &[u64],
    all: u64,
    j: usize,
    covered: u64,
    excess: u64,
    images: &mut [u64],
    seen: &mut BTreeSet<(Vec<VertexSet>, u64)>,
    out: &mut Vec<Inequality>,
) {
    let need = all & !covered;
    if need & suffix[j] != need {
        return;
    }
    if j == keys.len() {
        let terms: Vec<(GroupElem, VertexSet)> =
            t.iter().cloned().zip(images.iter().copied()).collect();
        let ineq = Inequality::new(AdmissibleFunction { alpha, terms }, excess);
        if seen.insert((ineq.images.clone(), ineq.excess)) {
            out.push(ineq);
        }
        return;
    }
    let entries = &keys[j];
    let c = entries.len();
    debug_assert!(c <= t.len(), "a key meets each term at most once");
    for sel in 0..(1u32 << c) {
        let picks = sel.count_ones();
        if picks == 1 {
            continue;
        }
        let mut mask = 0u64;
        for (b, &(i, u)) in entries.iter().enumerate() {
            if sel >> b & 1 == 1 {
                images[i] |= 1 << u;
                mask |= 1 << i;
            }
        }
        let gain = if picks == 0 { 0 } else { (picks - 2) as u64 };
        choose(alpha, t, keys, suffix, all, j + 1, covered | mask, excess + gain, images, seen, out);
        for (b, &(i, u)) in entries.iter().enumerate() {
            if sel >> b & 1 == 1 {
                images[i] &= !(1 << u);
            }
        }
    }
}

fn validate_base(y: &AGraph, d: usize) -> Result<(), SliError> {
    // The inequality families are a two-factor theory: a core primary vertex
    // has degree exactly 2 there, which drives the sign split and the rank
    // identities. Products with more factors go through the embedding first.
    if y.spec().num_factors() != 2 {
        return Err(SliError::NotTwoFactor(y.spec().num_factors()));
    }
    if y.primary_count() > MAX_PRIMARIES {
        return Err(SliError::TooManyPrimaries(y.primary_count()));
    }
    if d < 3 {
        return Err(SliError::DegreeBoundTooSmall(d));
    }
    Ok(())
}

/// All sorted element sets `T` for a finite factor. With `anchored` only
/// sets containing the identity are produced; right translation carries any
/// set onto an anchored one without changing its inequalities.
fn table_subsets(
    fac: &FactorGroup,
    alpha: usize,
    d: usize,
    anchored: bool,
) -> Result<Vec<Vec<GroupElem>>, SliError> {
    let order = fac.order().ok_or(SliError::InfiniteFactor(alpha))?;
    let elems = fac.elements(order)?;
    let mut out = Vec::new();
    if anchored {
        for size in 1..=(d - 1).min(order - 1) {
            for combo in elems[1..].iter().combinations(size) {
                let mut t = vec![elems[0].clone()];
                t.extend(combo.into_iter().cloned());
                out.push(t);
            }
        }
    } else {
        for size in 2..=d.min(order) {
            for combo in elems.iter().combinations(size) {
                out.push(combo.into_iter().cloned().collect());
            }
        }
    }
    Ok(out)
}

fn finite_alpha(y: &AGraph, d: usize, alpha: usize, anchored: bool) -> Result<Vec<Inequality>, SliError> {
    let ts = table_subsets(y.spec().factor(alpha), alpha, d, anchored)?;
    Ok(par_map(ts, |t| inequalities_for_t(y, alpha, &t)).into_iter().flatten().collect())
}

/// The full system for a graph whose factors are all finite, using the
/// identity-anchored enumeration.
pub fn enumerate_sli_finite(y: &AGraph, d: usize) -> Result<SliSystem, SliError> {
    validate_base(y, d)?;
    let mut all = Vec::new();
    for alpha in 0..y.spec().num_factors() {
        all.extend(finite_alpha(y, d, alpha, true)?);
    }
    Ok(SliSystem::assemble(y.clone(), d, all))
}

/// Exhaustive variant of [`enumerate_sli_finite`] walking every element set
/// rather than only anchored ones; kept as a cross-check oracle.
pub fn enumerate_sli_finite_exhaustive(y: &AGraph, d: usize) -> Result<SliSystem, SliError> {
    validate_base(y, d)?;
    let mut all = Vec::new();
    for alpha in 0..y.spec().num_factors() {
        all.extend(finite_alpha(y, d, alpha, false)?);
    }
    Ok(SliSystem::assemble(y.clone(), d, all))
}

/// Default anchor set for the word-oracle enumeration: the first `d^2 + d`
/// elements of the factor in its canonical order (all of them for a smaller
/// finite factor).
pub fn default_anchors(fac: &FactorGroup, d: usize) -> Result<Vec<GroupElem>, GroupError> {
    let want = d * d + d;
    let n = match fac.order() {
        Some(order) => want.min(order),
        None => want,
    };
    fac.elements(n)
}

/// Inequalities of factor `alpha` found through the word-oracle search: `T`
/// sets are grown from anchor elements by the finitely many label quotients
/// that can link two elements inside one class, and every grown set runs
/// through the same exact engine as the finite path.
///
/// Relative to the anchor set this is complete: a class chains its elements
/// by label quotients, so each admissible labeling can be translated, class
/// by class, onto a grown set with the same inequality.
pub fn enumerate_sli_generic(
    y: &AGraph,
    d: usize,
    alpha: usize,
    anchors: &[GroupElem],
) -> Result<Vec<Inequality>, SliError> {
    validate_base(y, d)?;
    let fac = y.spec().factor(alpha);
    for a in anchors {
        fac.validate_elem(alpha, a)?;
    }
    if anchors.iter().collect::<BTreeSet<_>>().len() != anchors.len() {
        return Err(SliError::DuplicateAnchors);
    }
    let stars = alpha_stars(y, alpha);
    let mut by_w: BTreeMap<usize, Vec<&GroupElem>> = BTreeMap::new();
    for (_, w, g) in &stars {
        by_w.entry(*w).or_default().push(g);
    }
    let mut moves: BTreeSet<GroupElem> = BTreeSet::new();
    for labels in by_w.values() {
        for a in labels {
            for b in labels {
                if a != b {
                    moves.insert(fac.mul(a, &fac.inv(b)));
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut seen_ineq = BTreeSet::new();
    let mut visited: BTreeSet<Vec<GroupElem>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<GroupElem>> = VecDeque::new();
    for a in anchors {
        let t = vec![a.clone()];
        if visited.insert(t.clone()) {
            queue.push_back(t);
        }
    }
    while let Some(tset) = queue.pop_front() {
        if tset.len() >= 2 {
            for q in inequalities_for_t(y, alpha, &tset) {
                if seen_ineq.insert((q.images.clone(), q.excess)) {
                    out.push(q);
                }
            }
        }
        if tset.len() >= d {
            continue;
        }
        let mut cands: BTreeSet<GroupElem> = anchors.iter().cloned().collect();
        for t in &tset {
            for h in &moves {
                cands.insert(fac.mul(h, t));
            }
        }
        for v in cands {
            if tset.binary_search(&v).is_err() {
                let mut nt = tset.clone();
                nt.push(v);
                nt.sort();
                if visited.insert(nt.clone()) {
                    queue.push_back(nt);
                }
            }
        }
    }
    Ok(out)
}

/// The full system for any graph: finite factors run the anchored finite
/// path, inner free products run the word-oracle path with default anchors.
pub fn build_system(y: &AGraph, d: usize) -> Result<SliSystem, SliError> {
    validate_base(y, d)?;
    let mut all = Vec::new();
    for alpha in 0..y.spec().num_factors() {
        let fac = y.spec().factor(alpha);
        match fac {
            FactorGroup::Table(_) => all.extend(finite_alpha(y, d, alpha, true)?),
            FactorGroup::Product(_) => {
                let anchors = default_anchors(fac, d)?;
                all.extend(enumerate_sli_generic(y, d, alpha, &anchors)?);
            }
        }
    }
    Ok(SliSystem::assemble(y.clone(), d, all))
}

impl SliSystem {
    fn assemble(y1: AGraph, d: usize, raw: Vec<Inequality>) -> SliSystem {
        let mut dedup: BTreeMap<(usize, Vec<VertexSet>, u64), Inequality> = BTreeMap::new();
        for q in raw {
            dedup.entry(q.key()).or_insert(q);
        }
        let inequalities: Vec<Inequality> = dedup.into_values().collect();
        let subsets: Vec<VertexSet> = inequalities
            .iter()
            .flat_map(|q| q.images.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        SliSystem { y1, d, inequalities, subsets }
    }

    /// Number of LP variables: one per appearing subset plus `x_s`.
    pub fn num_vars(&self) -> usize {
        self.subsets.len() + 1
    }

    pub fn subset_index(&self, a: VertexSet) -> usize {
        self.subsets.binary_search(&a).expect("subset appears in the system")
    }

    /// LP variable names aligned with [`SliSystem::lp`] columns.
    pub fn variable_names(&self) -> Vec<String> {
        self.subsets
            .iter()
            .map(|s| format!("xA_{s:x}"))
            .chain(std::iter::once("xs".to_string()))
            .collect()
    }

    /// The program `max -x_s` subject to all inequalities.
    pub fn lp(&self) -> LinearProgram {
        let n = self.num_vars();
        let mut objective = vec![Rational::zero(); n];
        objective[n - 1] = -Rational::one();
        let mut lp = LinearProgram::new(n, objective);
        for q in &self.inequalities {
            let mut row = vec![Rational::zero(); n];
            let s = rat(q.sign());
            for a in &q.images {
                let idx = self.subset_index(*a);
                row[idx] = row[idx].clone() + &s;
            }
            row[n - 1] = rat(q.xs_coeff());
            lp.push_row(row, rat(q.rhs()));
        }
        lp
    }

    /// The text form of [`SliSystem::lp`], written one row at a time so
    /// large systems never materialize the dense program. Byte-identical to
    /// `write_lp_text(&self.lp(), &self.variable_names())`.
    pub fn lp_text(&self) -> String {
        let names = self.variable_names();
        let n = self.num_vars();
        let mut out = String::from("max -1 xs\nsubject to\n");
        for q in &self.inequalities {
            let mut coefs: BTreeMap<usize, i64> = BTreeMap::new();
            for a in &q.images {
                *coefs.entry(self.subset_index(*a)).or_default() += q.sign();
            }
            let mut line = String::new();
            for (idx, c) in coefs {
                if c == 0 {
                    continue;
                }
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(&format!("{} {}", c, names[idx]));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&format!("{} {} <= {}\n", q.xs_coeff(), names[n - 1], q.rhs()));
            out.push_str(&line);
        }
        out
    }

    /// Exact feasibility of a full-length primal point (one value per
    /// subset, then `x_s`), checked row by row without materializing the
    /// dense program.
    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        if point.len() != self.num_vars() {
            return false;
        }
        let xs = &point[self.num_vars() - 1];
        self.inequalities.iter().all(|q| {
            let mut lhs = rat(q.xs_coeff()) * xs;
            for a in &q.images {
                let term = &point[self.subset_index(*a)];
                if q.sign() > 0 {
                    lhs = lhs + term;
                } else {
                    lhs = lhs - term;
                }
            }
            lhs <= rat(q.rhs())
        })
    }

    /// Exact feasibility of a dual vector: nonnegative weights, one per
    /// inequality, whose weighted rows sum to the objective `-x_s` (subset
    /// terms cancel and the slack coefficients sum to minus one).
    pub fn dual_satisfied_by(&self, y: &[Rational]) -> bool {
        if y.len() != self.inequalities.len() || y.iter().any(|w| w.is_negative()) {
            return false;
        }
        let mut acc = vec![Rational::zero(); self.subsets.len()];
        let mut xs = Rational::zero();
        for (q, w) in self.inequalities.iter().zip(y) {
            if w.is_zero() {
                continue;
            }
            for a in &q.images {
                let idx = self.subset_index(*a);
                if q.sign() > 0 {
                    acc[idx] = acc[idx].clone() + w;
                } else {
                    acc[idx] = acc[idx].clone() - w;
                }
            }
            xs = xs + rat(q.xs_coeff()) * w;
        }
        acc.iter().all(|v| v.is_zero()) && xs == -Rational::one()
    }

    /// Closed-form feasible point: `x_A = 0` for every subset and
    /// `x_s = 2 (q*/(q*-2)) brr(Y1)`. Feasibility holds whenever some factor
    /// has a finite subgroup of order above two (finite `q*`).
    pub fn certificate_point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.num_vars()];
        let brr = rat(self.y1.reduced_rank() as i64);
        let n = self.num_vars();
        x[n - 1] = rat(2) * self.y1.spec().q_star().ratio() * brr;
        x
    }
}

/// The inequality a partner-graph secondary vertex `u` imposes: elements are
/// the labels at `u`, the image of each endpoint is its fiber preimage
/// pushed to the first graph.
pub fn vertex_to_inequality(
    y1: &AGraph,
    y2: &AGraph,
    fiber: &FiberCore,
    u: usize,
) -> Result<Inequality, SliError> {
    let alpha = y2.secondary_type(u);
    let mut pre: BTreeMap<usize, VertexSet> = BTreeMap::new();
    for p in 0..fiber.graph.primary_count() {
        *pre.entry(fiber.tau2_primary[p]).or_default() |= 1 << fiber.tau1_primary[p];
    }
    let mut terms: Vec<(GroupElem, VertexSet)> = Vec::new();
    for e in y2.edges().iter().filter(|e| e.secondary == u) {
        let img = pre.get(&e.primary).copied().unwrap_or(0);
        if img == 0 {
            return Err(SliError::NotPartner(e.primary));
        }
        terms.push((e.label.clone(), img));
    }
    terms.sort();
    let f = AdmissibleFunction { alpha, terms };
    let excess = n_alpha(y1, &f)?;
    Ok(Inequality::new(f, excess))
}

/// A solved instance: the system, the exact coefficient, and both solver
/// certificates (primal vertex over the reduced rows, dual vertex over the
/// full rows).
#[derive(Clone, Debug)]
pub struct SigmaComputation {
    pub system: SliSystem,
    pub sigma: Rational,
    pub primal: crate::lp::BasicSolution,
    pub dual: crate::lp::BasicSolution,
}

/// Compute the extremal rank coefficient of the subgroup carried by `y` for
/// degree bound `d`. The graph is passed to its core first; the core must be
/// connected, irreducible, of positive rank, and must touch every factor.
/// The primal and dual optima are both computed and must agree exactly.
pub fn compute_sigma(y: &AGraph, d: usize) -> Result<SigmaComputation, SliError> {
    let core = y.core();
    if core.reduced_rank() == 0 {
        return Err(SliError::RankZero);
    }
    if !core.is_connected() {
        return Err(SliError::Disconnected);
    }
    if !core.is_irreducible() {
        return Err(SliError::NotIrreducible);
    }
    for alpha in 0..core.spec().num_factors() {
        if (0..core.secondary_count()).all(|s| core.secondary_type(s) != alpha) {
            return Err(SliError::MissingFactor(alpha));
        }
    }
    let brr = core.reduced_rank();
    let system = build_system(&core, d)?;
    let primal = crate::lp::primal_vertex(&system)?;
    let dual = crate::lp::dual_vertex_solution(&system)?;
    if primal.value != dual.value {
        return Err(SliError::Solver("primal and dual optima disagree"));
    }
    let sigma = -primal.value.clone() / rat(brr as i64);
    Ok(SigmaComputation { system, sigma, primal, dual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::fiber_core;
    use crate::testkit::{commutator_generators, cyclic_product, full_graph, ladder_c2c4};
    use crate::lp::dot;

    fn idx(i: u32) -> GroupElem {
        GroupElem::Idx(i)
    }

    fn ineq_set(v: &[Inequality]) -> BTreeSet<(usize, Vec<VertexSet>, u64)> {
        v.iter().map(|q| q.key()).collect()
    }

    /// Every choice of nonempty images over the star vertices, checked by the
    /// class definition directly.
    fn naive_for_t(y: &AGraph, alpha: usize, t: &[GroupElem]) -> BTreeSet<(Vec<VertexSet>, u64)> {
        let verts: Vec<usize> = alpha_stars(y, alpha).iter().map(|(u, _, _)| *u).collect();
        let nsub = (1usize << verts.len()) - 1;
        let mut set = BTreeSet::new();
        for combo in (0..t.len()).map(|_| 1..=nsub).multi_cartesian_product() {
            let terms: Vec<(GroupElem, VertexSet)> = t
                .iter()
                .cloned()
                .zip(combo.iter().map(|&m| {
                    bits(m as u64).fold(0u64, |acc, b| acc | 1 << verts[b])
                }))
                .collect();
            let f = AdmissibleFunction { alpha, terms };
            if let Ok(n) = n_alpha(y, &f) {
                let mut imgs: Vec<VertexSet> = f.terms.iter().map(|(_, a)| *a).collect();
                imgs.sort_unstable();
                set.insert((imgs, n));
            }
        }
        set
    }

    #[test]
    fn pair_classes_follow_label_quotients() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        // Vertex p_i carries the alpha-edge labeled i, so (0, p1) and (1, p2)
        // share the class keyed by quotient 1.
        let f = AdmissibleFunction { alpha: 0, terms: vec![(idx(0), 1 << 1), (idx(1), 1 << 2)] };
        let classes = equivalence_classes(&y, &f);
        assert_eq!(classes, vec![vec![(0, 1), (1, 2)]]);
        assert_eq!(n_alpha(&y, &f).unwrap(), 0);
        // Shifting the second image breaks the quotient match.
        let g = AdmissibleFunction { alpha: 0, terms: vec![(idx(0), 1 << 1), (idx(1), 1 << 0)] };
        assert_eq!(equivalence_classes(&y, &g).len(), 2);
        assert!(matches!(n_alpha(&y, &g), Err(SliError::NotAdmissible)));
    }

    #[test]
    fn vertices_without_edges_of_the_factor_are_singletons() {
        // Two primaries joined through one factor-0 secondary; no factor-1
        // edges exist, so factor-1 pairs can never share a class.
        let spec = cyclic_product(&[2, 3]);
        let y = AGraph::from_parts(
            spec,
            2,
            vec![0],
            vec![
                crate::agraph::Edge { primary: 0, secondary: 0, label: idx(0) },
                crate::agraph::Edge { primary: 1, secondary: 0, label: idx(1) },
            ],
            None,
        )
        .unwrap();
        let f = AdmissibleFunction { alpha: 1, terms: vec![(idx(0), 1 << 0), (idx(1), 1 << 1)] };
        assert!(equivalence_classes(&y, &f).iter().all(|c| c.len() == 1));
        assert!(matches!(n_alpha(&y, &f), Err(SliError::NotAdmissible)));
        assert!(inequalities_for_t(&y, 1, &[idx(0), idx(1)]).is_empty());
    }

    #[test]
    fn engine_matches_naive_enumeration_on_full_graph() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        for alpha in 0..2 {
            for t in table_subsets(y.spec().factor(alpha), alpha, 3, false).unwrap() {
                let fast: BTreeSet<(Vec<VertexSet>, u64)> = inequalities_for_t(&y, alpha, &t)
                    .iter()
                    .map(|q| (q.images.clone(), q.excess))
                    .collect();
                assert_eq!(fast, naive_for_t(&y, alpha, &t), "alpha {alpha} t {t:?}");
            }
        }
    }

    #[test]
    fn engine_matches_naive_enumeration_on_ladder() {
        let y = ladder_c2c4();
        for (alpha, t) in [
            (0, vec![idx(0), idx(1)]),
            (1, vec![idx(0), idx(2)]),
            (1, vec![idx(0), idx(1), idx(3)]),
            (1, vec![idx(0), idx(1), idx(2), idx(3)]),
        ] {
            let fast: BTreeSet<(Vec<VertexSet>, u64)> = inequalities_for_t(&y, alpha, &t)
                .iter()
                .map(|q| (q.images.clone(), q.excess))
                .collect();
            assert_eq!(fast, naive_for_t(&y, alpha, &t), "alpha {alpha} t {t:?}");
        }
    }

    #[test]
    fn right_translation_preserves_classes_and_excess() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        let fac = y.spec().factor(1);
        for q in inequalities_for_t(&y, 1, &[idx(0), idx(1), idx(2)]) {
            for g in 1..3 {
                let mut terms: Vec<(GroupElem, VertexSet)> = q
                    .defining
                    .terms
                    .iter()
                    .map(|(t, a)| (fac.mul(t, &idx(g)), *a))
                    .collect();
                terms.sort();
                let f = AdmissibleFunction { alpha: 1, terms };
                assert_eq!(n_alpha(&y, &f).unwrap(), q.excess);
            }
        }
    }

    #[test]
    fn anchored_system_equals_exhaustive_system() {
        let k1 = full_graph(&cyclic_product(&[3, 3]), 3);
        let ladder = ladder_c2c4();
        let (spec, gens) = commutator_generators();
        let comm = AGraph::wedge(&spec, &gens).fold().unwrap().core();
        for (y, d) in [(&k1, 3), (&ladder, 4), (&comm, 3)] {
            let fast = enumerate_sli_finite(y, d).unwrap();
            let full = enumerate_sli_finite_exhaustive(y, d).unwrap();
            assert_eq!(ineq_set(&fast.inequalities), ineq_set(&full.inequalities));
            assert_eq!(fast.subsets, full.subsets);
        }
    }

    #[test]
    fn full_graph_system_has_frozen_shape() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        let sys = enumerate_sli_finite(&y, 3).unwrap();
        // Golden count from the exhaustive enumeration.
        assert_eq!(sys.inequalities.len(), 88);
        for q in &sys.inequalities {
            assert!(q.excess <= (q.k() as u64 - 2) * 3, "class bound violated");
            assert_eq!(n_alpha(&y, &q.defining).unwrap(), q.excess);
            let mut imgs: Vec<VertexSet> = q.defining.terms.iter().map(|(_, a)| *a).collect();
            imgs.sort_unstable();
            assert_eq!(imgs, q.images);
        }
    }

    #[test]
    fn word_oracle_path_matches_finite_path_on_wrapped_factor() {
        // C2 * C7 with a ladder-like core; factor 1 is treated as a word
        // oracle whose anchors cover the whole group, so the grown sets must
        // reproduce the exhaustive finite enumeration exactly.
        let spec = cyclic_product(&[2, 7]);
        let e = |p: usize, s: usize, l: u32| crate::agraph::Edge {
            primary: p,
            secondary: s,
            label: idx(l),
        };
        let y = AGraph::from_parts(
            spec,
            4,
            vec![0, 0, 1],
            vec![
                e(0, 0, 0),
                e(1, 0, 1),
                e(2, 1, 0),
                e(3, 1, 1),
                e(0, 2, 0),
                e(1, 2, 1),
                e(2, 2, 2),
                e(3, 2, 3),
            ],
            None,
        )
        .unwrap();
        assert!(y.is_irreducible());
        let d = 3;
        let anchors = default_anchors(y.spec().factor(1), d).unwrap();
        assert_eq!(anchors.len(), 7);
        let generic = enumerate_sli_generic(&y, d, 1, &anchors).unwrap();
        let finite = finite_alpha(&y, d, 1, false).unwrap();
        assert_eq!(ineq_set(&generic), ineq_set(&finite));
    }

    #[test]
    fn full_graph_sigma_is_three() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        let out = compute_sigma(&y, 3).unwrap();
        assert_eq!(out.sigma, rat(3));
        assert_eq!(out.primal.value, rat(-3));
        assert_eq!(out.dual.value, rat(-3));
        // The certificate point is feasible and bounds the optimum.
        let lp = out.system.lp();
        assert!(lp.is_feasible(&out.system.certificate_point()));
        assert!(lp.is_feasible(&out.primal.point));
    }

    #[test]
    fn secondary_vertices_of_a_partner_give_member_inequalities() {
        let y1 = full_graph(&cyclic_product(&[3, 3]), 3);
        let mut y2 = full_graph(&cyclic_product(&[3, 3]), 3);
        y2.set_base(None);
        let f = fiber_core(&y1, &y2);
        let sys = enumerate_sli_finite(&y1, 3).unwrap();
        let keys = ineq_set(&sys.inequalities);
        let mut lhs_xs = 0i64;
        let mut rhs = 0i64;
        let mut subset_coef: BTreeMap<VertexSet, i64> = BTreeMap::new();
        for u in 0..y2.secondary_count() {
            let q = vertex_to_inequality(&y1, &y2, &f, u).unwrap();
            assert_eq!(q.k(), 3);
            assert_eq!(q.xs_coeff(), -1);
            assert!(keys.contains(&q.key()));
            lhs_xs += q.xs_coeff();
            rhs += q.rhs();
            for a in &q.images {
                *subset_coef.entry(*a).or_default() += q.sign();
            }
        }
        // Telescoping: subset terms cancel, x_s collects -2 brr(y2), and the
        // right side collects -2 brr(fiber core).
        assert!(subset_coef.values().all(|&c| c == 0));
        assert_eq!(lhs_xs, -2 * y2.reduced_rank() as i64);
        assert_eq!(rhs, -2 * f.graph.reduced_rank() as i64);
    }

    #[test]
    fn sigma_rejects_degenerate_inputs() {
        let spec = cyclic_product(&[3, 3]);
        let y = AGraph::wedge(&spec, &[crate::groups::Word::from_letters(vec![
            crate::groups::Letter::idx(0, 1),
            crate::groups::Letter::idx(1, 1),
        ])])
        .fold()
        .unwrap();
        assert!(matches!(compute_sigma(&y, 3), Err(SliError::RankZero)));
        let k1 = full_graph(&spec, 3);
        assert!(matches!(compute_sigma(&k1, 2), Err(SliError::DegreeBoundTooSmall(2))));
    }

    #[test]
    fn lp_text_round_trips_through_names() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        let sys = enumerate_sli_finite(&y, 3).unwrap();
        let lp = sys.lp();
        let text = crate::lp::write_lp_text(&lp, &sys.variable_names());
        assert_eq!(sys.lp_text(), text);
        let (parsed, names) = crate::lp::parse_lp_text(&text).unwrap();
        assert_eq!(names, sys.variable_names());
        assert_eq!(parsed.nvars, lp.nvars);
        assert_eq!(parsed.rows, lp.rows);
        assert_eq!(parsed.rhs, lp.rhs);
        assert_eq!(
            dot(&parsed.objective, &sys.certificate_point()),
            dot(&lp.objective, &sys.certificate_point())
        );
    }
}
