//! Bipartite labeled subgroup graphs over a free product.
//!
//! A graph has primary vertices and typed secondary vertices; every edge
//! joins a primary vertex to a secondary vertex of some type `alpha` and
//! carries a label in the factor `G_alpha`. A path step
//! `u --e--> w --f--> v` through a secondary vertex `w` reads the letter
//! `label(e) * label(f)^-1`, so a based graph reads a subgroup: the words of
//! all closed paths at the base vertex.
//!
//! The graph of a finitely generated subgroup is obtained by folding the
//! wedge of its generators. Folded graphs are irreducible:
//!
//! * (P1) edges at one primary vertex to distinct secondary vertices have
//!   distinct types;
//! * (P2) edges at one secondary vertex have distinct labels;
//! * (P3) no two edges share both endpoints, every vertex has positive
//!   degree, and at most one vertex has degree one, namely the base.
//!
//! Labels are meaningful only up to a right translation at each secondary
//! vertex (the fold rewrites them that way), so graph identity, the
//! canonical form, and everything downstream use only label quotients
//! `label(e) * label(f)^-1` at shared secondary vertices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{FreeProduct, GroupElem, GroupError, Word};

/// Errors from graph construction and folding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("subgroup is not factor-free: a conjugate of the factor-{} element {element} lies in it", factor + 1)]
    NotFactorFree { factor: usize, element: GroupElem },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A geometric edge between a primary and a secondary vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub primary: usize,
    pub secondary: usize,
    pub label: GroupElem,
}

/// Canonical encoding: per component, the minimal relabeled-and-regauged
/// edge list `(primary, secondary, type, label)` over all traversal starts.
pub type CanonicalKey = Vec<Vec<(usize, usize, usize, GroupElem)>>;

/// A bipartite labeled graph over a free product, with an optional base
/// primary vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AGraph {
    spec: FreeProduct,
    primary_count: usize,
    secondary_types: Vec<usize>,
    edges: Vec<Edge>,
    base: Option<usize>,
}

/// Serialization form of a graph. Secondary types and word factors are
/// 1-based here, matching the input format; they are 0-based in code.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawGraph {
    pub primary: Vec<usize>,
    pub secondary: Vec<RawSecondary>,
    pub edges: Vec<(usize, usize, GroupElem)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawSecondary {
    pub id: usize,
    #[serde(rename = "type")]
    pub vtype: usize,
}

impl AGraph {
    pub fn new(spec: FreeProduct) -> Self {
        Self { spec, primary_count: 0, secondary_types: Vec::new(), edges: Vec::new(), base: None }
    }

    /// Build and validate a graph from explicit parts.
    pub fn from_parts(
        spec: FreeProduct,
        primary_count: usize,
        secondary_types: Vec<usize>,
        edges: Vec<Edge>,
        base: Option<usize>,
    ) -> Result<Self, GraphError> {
        let m = spec.num_factors();
        for (s, t) in secondary_types.iter().enumerate() {
            if *t >= m {
                return Err(GraphError::Invalid(format!(
                    "secondary vertex {s} has type {} out of range",
                    t + 1
                )));
            }
        }
        for e in &edges {
            if e.primary >= primary_count {
                return Err(GraphError::Invalid(format!("edge endpoint p{} out of range", e.primary)));
            }
            if e.secondary >= secondary_types.len() {
                return Err(GraphError::Invalid(format!(
                    "edge endpoint s{} out of range",
                    e.secondary
                )));
            }
            let t = secondary_types[e.secondary];
            spec.factor(t).validate_elem(t, &e.label)?;
        }
        if let Some(b) = base {
            if b >= primary_count {
                return Err(GraphError::Invalid(format!("base vertex {b} out of range")));
            }
        }
        let mut g = Self { spec, primary_count, secondary_types, edges, base };
        g.edges.sort();
        Ok(g)
    }

    pub fn from_raw(spec: FreeProduct, raw: &RawGraph) -> Result<Self, GraphError> {
        for (i, p) in raw.primary.iter().enumerate() {
            if *p != i {
                return Err(GraphError::Invalid("primary ids must be 0..n in order".into()));
            }
        }
        let mut types = Vec::with_capacity(raw.secondary.len());
        for (i, s) in raw.secondary.iter().enumerate() {
            if s.id != i {
                return Err(GraphError::Invalid("secondary ids must be 0..n in order".into()));
            }
            if s.vtype == 0 {
                return Err(GraphError::Invalid("secondary types are 1-based".into()));
            }
            types.push(s.vtype - 1);
        }
        let edges = raw
            .edges
            .iter()
            .map(|(p, s, l)| Edge { primary: *p, secondary: *s, label: l.clone() })
            .collect();
        Self::from_parts(spec, raw.primary.len(), types, edges, raw.base)
    }

    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            primary: (0..self.primary_count).collect(),
            secondary: (0..self.secondary_types.len())
                .map(|i| RawSecondary { id: i, vtype: self.secondary_types[i] + 1 })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.primary, e.secondary, e.label.clone()))
                .collect(),
            base: self.base,
        }
    }

    /// Wedge of generator loops at a common base vertex: each letter `x` in
    /// factor `alpha` contributes a secondary vertex of type `alpha` with an
    /// incoming edge labeled `x` and an outgoing edge labeled by the
    /// identity.
    pub fn wedge(spec: &FreeProduct, generators: &[Word]) -> Self {
        let mut g = AGraph::new(spec.clone());
        let base = g.add_primary();
        g.base = Some(base);
        for w in generators {
            let w = spec.normalize(w);
            let k = w.len();
            let mut prev = base;
            for (j, l) in w.0.iter().enumerate() {
                let s = g.add_secondary(l.factor);
                let next = if j + 1 == k { base } else { g.add_primary() };
                g.add_edge(prev, s, l.elem.clone());
                g.add_edge(next, s, spec.factor(l.factor).identity());
                prev = next;
            }
        }
        g.edges.sort();
        g
    }

    pub fn add_primary(&mut self) -> usize {
        self.primary_count += 1;
        self.primary_count - 1
    }

    pub fn add_secondary(&mut self, vtype: usize) -> usize {
        assert!(vtype < self.spec.num_factors());
        self.secondary_types.push(vtype);
        self.secondary_types.len() - 1
    }

    /// Insert an edge, keeping the edge list sorted (the edge order is part
    /// of every serialized and compared form).
    pub fn add_edge(&mut self, primary: usize, secondary: usize, label: GroupElem) {
        assert!(primary < self.primary_count && secondary < self.secondary_types.len());
        let e = Edge { primary, secondary, label };
        let at = self.edges.partition_point(|x| *x <= e);
        self.edges.insert(at, e);
    }

    pub fn set_base(&mut self, base: Option<usize>) {
        if let Some(b) = base {
            assert!(b < self.primary_count);
        }
        self.base = base;
    }

    pub fn spec(&self) -> &FreeProduct {
        &self.spec
    }

    pub fn primary_count(&self) -> usize {
        self.primary_count
    }

    pub fn secondary_count(&self) -> usize {
        self.secondary_types.len()
    }

    pub fn secondary_type(&self, s: usize) -> usize {
        self.secondary_types[s]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn base(&self) -> Option<usize> {
        self.base
    }

    /// Oriented edge count `|E|`; each geometric edge counts twice.
    pub fn oriented_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Degrees of (primary, secondary) vertices.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut dp = vec![0; self.primary_count];
        let mut ds = vec![0; self.secondary_types.len()];
        for e in &self.edges {
            dp[e.primary] += 1;
            ds[e.secondary] += 1;
        }
        (dp, ds)
    }

    pub fn max_degree(&self) -> usize {
        let (dp, ds) = self.degrees();
        dp.into_iter().chain(ds).max().unwrap_or(0)
    }

    /// `label(e) * label(f)^-1` for two edges at a common secondary vertex:
    /// the letter read by passing from `e.primary` to `f.primary`.
    pub fn label_quotient(&self, e: &Edge, f: &Edge) -> GroupElem {
        debug_assert_eq!(e.secondary, f.secondary);
        let fac = self.spec.factor(self.secondary_types[e.secondary]);
        fac.mul(&e.label, &fac.inv(&f.label))
    }

    // -----------------------------------------------------------------------
    // Folding.

    /// Fold to an irreducible graph reading the same subgroup, or report that
    /// the subgroup is not factor-free.
    pub fn fold(self) -> Result<AGraph, GraphError> {
        let spec = self.spec;
        let s_type = self.secondary_types;
        let mut edges: Vec<(usize, usize, GroupElem)> =
            self.edges.into_iter().map(|e| (e.primary, e.secondary, e.label)).collect();
        let mut base = self.base;
        'scan: loop {
            edges.sort();
            edges.dedup();
            // P2 first: two edges with one label at one secondary vertex
            // identify their primary endpoints.
            for i in 0..edges.len() {
                for j in i + 1..edges.len() {
                    if edges[i].1 == edges[j].1 && edges[i].2 == edges[j].2 {
                        let keep = edges[i].0.min(edges[j].0);
                        let drop = edges[i].0.max(edges[j].0);
                        for e in edges.iter_mut() {
                            if e.0 == drop {
                                e.0 = keep;
                            }
                        }
                        if base == Some(drop) {
                            base = Some(keep);
                        }
                        continue 'scan;
                    }
                }
            }
            // P1: two same-type edges at one primary vertex identify their
            // secondary endpoints, after translating one side's labels.
            for i in 0..edges.len() {
                for j in i + 1..edges.len() {
                    let (p1, s1, x1) = &edges[i];
                    let (p2, s2, x2) = &edges[j];
                    if p1 == p2 && s1 != s2 && s_type[*s1] == s_type[*s2] {
                        let (keep, drop, xk, xd) =
                            if s1 < s2 { (*s1, *s2, x1.clone(), x2.clone()) } else { (*s2, *s1, x2.clone(), x1.clone()) };
                        let fac = spec.factor(s_type[keep]);
                        // Right-translate labels at `drop` so the two edges
                        // agree; quotients at `drop` are unchanged.
                        let t = fac.mul(&fac.inv(&xd), &xk);
                        for e in edges.iter_mut() {
                            if e.1 == drop {
                                e.2 = fac.mul(&e.2, &t);
                                e.1 = keep;
                            }
                        }
                        continue 'scan;
                    }
                }
            }
            // P3: parallel edges with distinct labels read a nontrivial
            // factor element on a closed path.
            for i in 0..edges.len() {
                for j in i + 1..edges.len() {
                    let (p1, s1, x1) = &edges[i];
                    let (p2, s2, x2) = &edges[j];
                    if p1 == p2 && s1 == s2 {
                        let t = s_type[*s1];
                        let fac = spec.factor(t);
                        return Err(GraphError::NotFactorFree {
                            factor: t,
                            element: fac.mul(x1, &fac.inv(x2)),
                        });
                    }
                }
            }
            // Prune a dangling vertex (degree one, not the base).
            let mut dp: BTreeMap<usize, usize> = BTreeMap::new();
            let mut ds: BTreeMap<usize, usize> = BTreeMap::new();
            for (p, s, _) in &edges {
                *dp.entry(*p).or_default() += 1;
                *ds.entry(*s).or_default() += 1;
            }
            let dangling = edges.iter().position(|(p, s, _)| {
                (dp[p] == 1 && base != Some(*p)) || ds[s] == 1
            });
            match dangling {
                Some(i) => {
                    edges.remove(i);
                    continue 'scan;
                }
                None => break,
            }
        }
        // Compact ids, keeping relative order; unreferenced vertices vanish.
        let mut used_p: BTreeSet<usize> = edges.iter().map(|e| e.0).collect();
        if let Some(b) = base {
            used_p.insert(b);
        }
        let used_s: BTreeSet<usize> = edges.iter().map(|e| e.1).collect();
        let pmap: BTreeMap<usize, usize> =
            used_p.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let smap: BTreeMap<usize, usize> =
            used_s.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let folded = AGraph {
            spec,
            primary_count: used_p.len(),
            secondary_types: used_s.iter().map(|&s| s_type[s]).collect(),
            edges: {
                let mut v: Vec<Edge> = edges
                    .into_iter()
                    .map(|(p, s, l)| Edge { primary: pmap[&p], secondary: smap[&s], label: l })
                    .collect();
                v.sort();
                v
            },
            base: base.map(|b| pmap[&b]),
        };
        debug_assert!(folded.irreducibility_violations().is_empty());
        Ok(folded)
    }

    // -----------------------------------------------------------------------
    // Structure checks.

    /// All violations of the irreducibility conditions, human-readable.
    pub fn irreducibility_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut by_primary_type: BTreeMap<(usize, usize), Vec<&Edge>> = BTreeMap::new();
        let mut by_secondary: BTreeMap<usize, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            by_primary_type
                .entry((e.primary, self.secondary_types[e.secondary]))
                .or_default()
                .push(e);
            by_secondary.entry(e.secondary).or_default().push(e);
        }
        for ((p, t), es) in &by_primary_type {
            let targets: BTreeSet<usize> = es.iter().map(|e| e.secondary).collect();
            if targets.len() > 1 {
                out.push(format!(
                    "P1: primary {p} has type-{} edges to {} secondary vertices",
                    t + 1,
                    targets.len()
                ));
            }
        }
        for (s, es) in &by_secondary {
            let labels: BTreeSet<&GroupElem> = es.iter().map(|e| &e.label).collect();
            if labels.len() < es.len() {
                out.push(format!("P2: secondary {s} has a repeated label"));
            }
        }
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for e in &self.edges {
            if !pairs.insert((e.primary, e.secondary)) {
                out.push(format!("P3: multiple edges between p{} and s{}", e.primary, e.secondary));
            }
        }
        let (dp, ds) = self.degrees();
        let trivial = self.primary_count == 1 && self.edges.is_empty();
        if !trivial {
            for (p, d) in dp.iter().enumerate() {
                if *d == 0 {
                    out.push(format!("P3: primary {p} is isolated"));
                }
            }
        }
        for (s, d) in ds.iter().enumerate() {
            if *d == 0 {
                out.push(format!("P3: secondary {s} is isolated"));
            }
        }
        let deg1: Vec<usize> = dp.iter().enumerate().filter(|(_, d)| **d == 1).map(|(p, _)| p).collect();
        let sdeg1 = ds.iter().filter(|d| **d == 1).count();
        let bad_p1count = deg1.iter().filter(|p| Some(**p) != self.base).count();
        if sdeg1 > 0 {
            out.push(format!("P3: {sdeg1} secondary vertices have degree one"));
        }
        if bad_p1count > 0 || deg1.len() + sdeg1 > 1 {
            if !(deg1.len() == 1 && sdeg1 == 0 && Some(deg1[0]) == self.base) {
                out.push("P3: a vertex of degree one is not the base".into());
            }
        }
        out
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducibility_violations().is_empty()
    }

    // -----------------------------------------------------------------------
    // Core, rank, components.

    /// Maximal subgraph of minimum degree two (the base is not protected).
    pub fn core(&self) -> AGraph {
        self.core_with_maps().0
    }

    /// Core plus, for each surviving primary vertex, secondary vertex and
    /// edge, its index in this graph.
    pub fn core_with_maps(&self) -> (AGraph, Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut alive_e: Vec<bool> = vec![true; self.edges.len()];
        loop {
            let mut dp = vec![0usize; self.primary_count];
            let mut ds = vec![0usize; self.secondary_types.len()];
            for (i, e) in self.edges.iter().enumerate() {
                if alive_e[i] {
                    dp[e.primary] += 1;
                    ds[e.secondary] += 1;
                }
            }
            let cut = (0..self.edges.len()).find(|&i| {
                alive_e[i]
                    && (dp[self.edges[i].primary] <= 1 || ds[self.edges[i].secondary] <= 1)
            });
            match cut {
                Some(i) => alive_e[i] = false,
                None => break,
            }
        }
        let kept: Vec<usize> = (0..self.edges.len()).filter(|&i| alive_e[i]).collect();
        let used_p: BTreeSet<usize> = kept.iter().map(|&i| self.edges[i].primary).collect();
        let used_s: BTreeSet<usize> = kept.iter().map(|&i| self.edges[i].secondary).collect();
        let pmap: BTreeMap<usize, usize> =
            used_p.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let smap: BTreeMap<usize, usize> =
            used_s.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let core = AGraph {
            spec: self.spec.clone(),
            primary_count: used_p.len(),
            secondary_types: used_s.iter().map(|&s| self.secondary_types[s]).collect(),
            // A monotone id remap of a sorted subsequence stays sorted.
            edges: kept
                .iter()
                .map(|&i| {
                    let e = &self.edges[i];
                    Edge { primary: pmap[&e.primary], secondary: smap[&e.secondary], label: e.label.clone() }
                })
                .collect(),
            base: None,
        };
        (core, used_p.into_iter().collect(), used_s.into_iter().collect(), kept)
    }

    /// Component index per (primary, secondary) vertex, and the count.
    pub fn component_ids(&self) -> (Vec<usize>, Vec<usize>, usize) {
        let np = self.primary_count;
        let ns = self.secondary_types.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); np + ns];
        for e in &self.edges {
            adj[e.primary].push(np + e.secondary);
            adj[np + e.secondary].push(e.primary);
        }
        let mut comp = vec![usize::MAX; np + ns];
        let mut count = 0;
        for start in 0..np + ns {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = count;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &u in &adj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = count;
                        queue.push_back(u);
                    }
                }
            }
            count += 1;
        }
        (comp[..np].to_vec(), comp[np..].to_vec(), count)
    }

    pub fn is_connected(&self) -> bool {
        self.component_ids().2 <= 1
    }

    /// Reduced rank: the sum over components of the core of
    /// `edges - vertices` (for a connected core component this is
    /// `rank - 1` of the subgroup it reads).
    pub fn reduced_rank(&self) -> u64 {
        let core = self.core();
        let (pc, sc, ncomp) = core.component_ids();
        let mut e = vec![0i64; ncomp];
        let mut v = vec![0i64; ncomp];
        for edge in &core.edges {
            e[pc[edge.primary]] += 1;
        }
        for c in pc.iter().chain(&sc) {
            v[*c] += 1;
        }
        let mut total = 0u64;
        for c in 0..ncomp {
            let rr = e[c] - v[c];
            assert!(rr >= 0, "core component has a vertex of degree below two");
            total += rr as u64;
        }
        total
    }

    // -----------------------------------------------------------------------
    // Membership.

    /// Whether the based graph's subgroup contains the word. Requires an
    /// irreducible graph with a base.
    pub fn contains(&self, w: &Word) -> bool {
        let base = self.base.expect("membership needs a based graph");
        let mut p_alpha: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let prev =
                p_alpha.insert((e.primary, self.secondary_types[e.secondary]), i);
            debug_assert!(prev.is_none(), "membership tracing needs property P1");
        }
        let mut s_label: BTreeMap<(usize, &GroupElem), usize> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let prev = s_label.insert((e.secondary, &e.label), i);
            debug_assert!(prev.is_none(), "membership tracing needs property P2");
        }
        let w = self.spec.normalize(w);
        let mut at = base;
        for l in &w.0 {
            let Some(&ei) = p_alpha.get(&(at, l.factor)) else {
                return false;
            };
            let e = &self.edges[ei];
            let fac = self.spec.factor(l.factor);
            // Need f at the same secondary with label(e) * label(f)^-1 = a.
            let want = fac.mul(&fac.inv(&l.elem), &e.label);
            let Some(&fi) = s_label.get(&(e.secondary, &want)) else {
                return false;
            };
            at = self.edges[fi].primary;
        }
        at == base
    }

    // -----------------------------------------------------------------------
    // Canonical form.

    /// Traversal encoding from one start, relabeling vertices in discovery
    /// order and regauging each secondary vertex by its discovering edge.
    fn encode_from(&self, start: usize, adj_p: &[Vec<usize>], adj_s: &[Vec<usize>]) -> Vec<(usize, usize, usize, GroupElem)> {
        enum V {
            P(usize),
            S(usize),
        }
        let mut pmap: BTreeMap<usize, usize> = BTreeMap::new();
        let mut smap: BTreeMap<usize, usize> = BTreeMap::new();
        let mut gauge: BTreeMap<usize, GroupElem> = BTreeMap::new();
        let mut queue = VecDeque::new();
        pmap.insert(start, 0);
        queue.push_back(V::P(start));
        while let Some(v) = queue.pop_front() {
            match v {
                V::P(p) => {
                    let mut by_type: Vec<&Edge> =
                        adj_p[p].iter().map(|&i| &self.edges[i]).collect();
                    by_type.sort_by_key(|e| self.secondary_types[e.secondary]);
                    for e in by_type {
                        if !smap.contains_key(&e.secondary) {
                            smap.insert(e.secondary, smap.len());
                            let fac = self.spec.factor(self.secondary_types[e.secondary]);
                            gauge.insert(e.secondary, fac.inv(&e.label));
                            queue.push_back(V::S(e.secondary));
                        }
                    }
                }
                V::S(s) => {
                    let fac = self.spec.factor(self.secondary_types[s]);
                    let t = gauge[&s].clone();
                    let mut outs: Vec<(GroupElem, usize)> = adj_s[s]
                        .iter()
                        .map(|&i| (fac.mul(&self.edges[i].label, &t), self.edges[i].primary))
                        .collect();
                    outs.sort();
                    for (_, p) in outs {
                        if !pmap.contains_key(&p) {
                            pmap.insert(p, pmap.len());
                            queue.push_back(V::P(p));
                        }
                    }
                }
            }
        }
        let mut enc: Vec<(usize, usize, usize, GroupElem)> = self
            .edges
            .iter()
            .filter(|e| pmap.contains_key(&e.primary))
            .map(|e| {
                let t = self.secondary_types[e.secondary];
                let fac = self.spec.factor(t);
                (pmap[&e.primary], smap[&e.secondary], t, fac.mul(&e.label, &gauge[&e.secondary]))
            })
            .collect();
        enc.sort();
        enc
    }

    /// Canonical key: equal exactly for graphs that are isomorphic up to a
    /// relabeling of vertices and a right label translation at each
    /// secondary vertex. Requires properties P1 and P2.
    pub fn canonical_key(&self) -> CanonicalKey {
        let np = self.primary_count;
        let mut adj_p: Vec<Vec<usize>> = vec![Vec::new(); np];
        let mut adj_s: Vec<Vec<usize>> = vec![Vec::new(); self.secondary_types.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj_p[e.primary].push(i);
            adj_s[e.secondary].push(i);
        }
        let (pc, _, ncomp) = self.component_ids();
        let mut keys: Vec<Vec<(usize, usize, usize, GroupElem)>> = Vec::new();
        for c in 0..ncomp {
            let encodings = (0..np)
                .filter(|&p| pc[p] == c)
                .map(|p| self.encode_from(p, &adj_p, &adj_s))
                .min();
            // Every component contains a primary vertex: edges are bipartite
            // and isolated secondary vertices are excluded upstream.
            keys.push(encodings.expect("component without a primary vertex"));
        }
        keys.sort();
        keys
    }

    /// Isomorphism of unbased graphs over the same product, up to gauge.
    pub fn is_isomorphic(&self, other: &AGraph) -> bool {
        assert_eq!(self.spec, other.spec, "graphs over different products");
        self.primary_count == other.primary_count
            && self.secondary_count() == other.secondary_count()
            && self.edges.len() == other.edges.len()
            && self.canonical_key() == other.canonical_key()
    }

    // -----------------------------------------------------------------------
    // Generators.

    /// Free generators of the subgroup read by this based graph: one per
    /// non-tree edge of a breadth-first spanning tree rooted at the base.
    pub fn subgroup_generators(&self) -> Vec<Word> {
        let base = self.base.expect("generators need a based graph");
        let np = self.primary_count;
        let ns = self.secondary_types.len();
        // Vertex ids: primaries 0..np, secondaries np..np+ns.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); np + ns];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.primary].push(i);
            adj[np + e.secondary].push(i);
        }
        let mut parent_edge: Vec<Option<usize>> = vec![None; np + ns];
        let mut seen = vec![false; np + ns];
        let mut tree = vec![false; self.edges.len()];
        seen[base] = true;
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for &ei in &adj[v] {
                let e = &self.edges[ei];
                let u = if v < np { np + e.secondary } else { e.primary };
                if !seen[u] {
                    seen[u] = true;
                    parent_edge[u] = Some(ei);
                    tree[ei] = true;
                    queue.push_back(u);
                }
            }
        }
        // Edge path base -> v along the tree.
        let path_to = |mut v: usize| -> Vec<usize> {
            let mut up = Vec::new();
            while v != base {
                let ei = parent_edge[v].expect("vertex not reachable from base");
                up.push(ei);
                let e = &self.edges[ei];
                v = if v < np { np + e.secondary } else { e.primary };
            }
            up.reverse();
            up
        };
        let mut gens = Vec::new();
        for (ei, e) in self.edges.iter().enumerate() {
            if tree[ei] {
                continue;
            }
            // Closed walk: base -> e.primary, cross e, secondary -> base.
            let mut walk = path_to(e.primary);
            walk.push(ei);
            let mut back = path_to(np + e.secondary);
            back.reverse();
            walk.extend(back);
            gens.push(self.read_walk(&walk));
        }
        gens
    }

    /// Read the word of an alternating closed walk given as edge indices
    /// (primary, secondary, primary, ...); pairs of consecutive edges share
    /// a secondary vertex and read one letter each.
    fn read_walk(&self, walk: &[usize]) -> Word {
        assert!(walk.len() % 2 == 0);
        let mut letters = Vec::with_capacity(walk.len() / 2);
        for pair in walk.chunks(2) {
            let (e, f) = (&self.edges[pair[0]], &self.edges[pair[1]]);
            let t = self.secondary_types[e.secondary];
            letters.push(crate::groups::Letter::new(t, self.label_quotient(e, f)));
        }
        self.spec.normalize(&Word(letters))
    }
}

impl fmt::Display for AGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "graph: {} primary, {} secondary, {} edges{}",
            self.primary_count,
            self.secondary_types.len(),
            self.edges.len(),
            match self.base {
                Some(b) => format!(", base p{b}"),
                None => String::new(),
            }
        )?;
        for (s, t) in self.secondary_types.iter().enumerate() {
            write!(f, "  s{s} (type {}):", t + 1)?;
            for e in &self.edges {
                if e.secondary == s {
                    write!(f, " p{}[{}]", e.primary, e.label)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupTable, Letter};

    fn c33() -> FreeProduct {
        FreeProduct::of_tables(vec![GroupTable::cyclic(3), GroupTable::cyclic(3)]).unwrap()
    }

    fn word(letters: &[(usize, u32)]) -> Word {
        Word(letters.iter().map(|&(f, e)| Letter::idx(f, e)).collect())
    }

    /// The full graph on n primary vertices over a two-factor product: one
    /// secondary vertex per factor carrying labels 0..n.
    fn full_graph(spec: &FreeProduct, n: u32) -> AGraph {
        let mut g = AGraph::new(spec.clone());
        for _ in 0..n {
            g.add_primary();
        }
        for t in 0..2 {
            let s = g.add_secondary(t);
            for p in 0..n {
                g.add_edge(p as usize, s, GroupElem::Idx(p));
            }
        }
        g.set_base(Some(0));
        g
    }

    #[test]
    fn wedge_reads_generators() {
        let spec = c33();
        let gens = vec![word(&[(0, 2), (1, 1)]), word(&[(0, 1), (1, 2)])];
        let g = AGraph::wedge(&spec, &gens);
        assert_eq!(g.primary_count(), 3);
        assert_eq!(g.secondary_count(), 4);
        assert_eq!(g.edges().len(), 8);
        assert_eq!(g.base(), Some(0));
    }

    #[test]
    fn fold_commutator_like_pair_gives_full_graph() {
        // <a^2 b, a b^2> over C3 * C3 folds to the full graph on three
        // primary vertices (up to gauge).
        let spec = c33();
        let gens = vec![word(&[(0, 2), (1, 1)]), word(&[(0, 1), (1, 2)])];
        let folded = AGraph::wedge(&spec, &gens).fold().unwrap();
        assert!(folded.is_irreducible());
        assert_eq!(folded.primary_count(), 3);
        assert_eq!(folded.secondary_count(), 2);
        assert_eq!(folded.edges().len(), 6);
        assert!(folded.is_isomorphic(&full_graph(&spec, 3)));
        assert_eq!(folded.reduced_rank(), 1);
    }

    #[test]
    fn fold_flags_factor_elements() {
        let spec = c33();
        // <a> contains a factor element outright.
        let err = AGraph::wedge(&spec, &[word(&[(0, 1)])]).fold().unwrap_err();
        match err {
            GraphError::NotFactorFree { factor: 0, element } => {
                // The witness is a power of a, read off a parallel edge pair.
                assert_ne!(element, GroupElem::Idx(0));
            }
            other => panic!("unexpected: {other:?}"),
        }
        // <ab, ab^2> contains (ab)(ab^2)^-1 = a b^-1 a^-1, conjugate of a
        // factor element.
        let err = AGraph::wedge(&spec, &[word(&[(0, 1), (1, 1)]), word(&[(0, 1), (1, 2)])])
            .fold()
            .unwrap_err();
        assert!(matches!(err, GraphError::NotFactorFree { factor: 1, .. }));
    }

    #[test]
    fn fold_trivial_and_cyclic() {
        let spec = c33();
        let trivial = AGraph::wedge(&spec, &[]).fold().unwrap();
        assert_eq!(trivial.primary_count(), 1);
        assert_eq!(trivial.edges().len(), 0);
        assert_eq!(trivial.reduced_rank(), 0);
        let cyclic = AGraph::wedge(&spec, &[word(&[(0, 2), (1, 1)])]).fold().unwrap();
        assert_eq!(cyclic.reduced_rank(), 0);
        assert!(cyclic.contains(&word(&[(0, 2), (1, 1)])));
    }

    #[test]
    fn membership_in_commutator_like_subgroup() {
        let spec = c33();
        let x = word(&[(0, 2), (1, 1)]);
        let y = word(&[(0, 1), (1, 2)]);
        let g = AGraph::wedge(&spec, &[x.clone(), y.clone()]).fold().unwrap();
        assert!(g.contains(&Word::identity()));
        assert!(g.contains(&x));
        assert!(g.contains(&y));
        assert!(g.contains(&spec.mul(&x, &y)));
        assert!(g.contains(&spec.mul(&spec.inv(&y), &x)));
        // Not in the subgroup: the image of <a^2 b, a b^2> in the
        // abelianization C3 x C3 is the order-three subgroup {(0,0), (2,1),
        // (1,2)}, and each of these words lands outside it.
        for w in [
            word(&[(0, 1)]),
            word(&[(1, 1)]),
            word(&[(0, 1), (1, 1)]),
            word(&[(1, 1), (0, 1)]),
            word(&[(0, 2), (1, 2)]),
        ] {
            assert!(!g.contains(&w), "{w} should not be a member");
        }
    }

    #[test]
    fn membership_matches_generated_products() {
        let spec = c33();
        let x = word(&[(0, 2), (1, 1)]);
        let y = word(&[(0, 1), (1, 2)]);
        let g = AGraph::wedge(&spec, &[x.clone(), y.clone()]).fold().unwrap();
        // Every short product of generators is a member.
        let gens = [x.clone(), y.clone(), spec.inv(&x), spec.inv(&y)];
        let mut words = vec![Word::identity()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for w in &words {
                for h in &gens {
                    next.push(spec.mul(w, h));
                }
            }
            words.extend(next.iter().cloned());
            words.sort();
            words.dedup();
        }
        for w in &words {
            assert!(g.contains(w), "{w} generated but rejected");
        }
    }

    #[test]
    fn core_and_rank() {
        let spec = c33();
        let full = full_graph(&spec, 3);
        assert_eq!(full.core().edges().len(), 6);
        assert_eq!(full.reduced_rank(), 1);
        // A wedge before folding has dangling structure but the same rank
        // after folding; its core rank counts cycles only.
        let gens = vec![word(&[(0, 2), (1, 1)]), word(&[(0, 1), (1, 2)])];
        let wedge = AGraph::wedge(&spec, &gens);
        assert_eq!(wedge.reduced_rank(), 1);
    }

    #[test]
    fn canonical_form_ignores_gauge_and_ids() {
        let spec = c33();
        let a = full_graph(&spec, 3);
        // Same graph with labels right-translated at each secondary vertex
        // and primary ids permuted.
        let mut b = AGraph::new(spec.clone());
        for _ in 0..3 {
            b.add_primary();
        }
        let s0 = b.add_secondary(0);
        let s1 = b.add_secondary(1);
        for p in 0..3u32 {
            // translate type-1 labels by +1, permute primaries by p -> p+1.
            b.add_edge(((p + 1) % 3) as usize, s0, GroupElem::Idx((p + 1) % 3));
            b.add_edge(((p + 1) % 3) as usize, s1, GroupElem::Idx(p));
        }
        assert!(a.is_isomorphic(&b));
        // The twist (second secondary pairs labels by inversion) is a
        // genuinely different graph.
        let mut c = AGraph::new(spec.clone());
        for _ in 0..3 {
            c.add_primary();
        }
        let s0 = c.add_secondary(0);
        let s1 = c.add_secondary(1);
        for p in 0..3u32 {
            c.add_edge(p as usize, s0, GroupElem::Idx(p));
            c.add_edge(p as usize, s1, GroupElem::Idx((3 - p) % 3));
        }
        assert!(!a.is_isomorphic(&c));
        assert!(c.is_irreducible());
    }

    #[test]
    fn fold_result_independent_of_generator_presentation() {
        let spec = c33();
        let x = word(&[(0, 2), (1, 1)]);
        let y = word(&[(0, 1), (1, 2)]);
        let g1 = AGraph::wedge(&spec, &[x.clone(), y.clone()]).fold().unwrap();
        // Same subgroup, different generating set: {x, x y}.
        let g2 = AGraph::wedge(&spec, &[x.clone(), spec.mul(&x, &y)]).fold().unwrap();
        assert!(g1.is_isomorphic(&g2));
    }

    #[test]
    fn generators_roundtrip_through_fold() {
        let spec = c33();
        let x = word(&[(0, 2), (1, 1)]);
        let y = word(&[(0, 1), (1, 2)]);
        let g = AGraph::wedge(&spec, &[x, y]).fold().unwrap();
        let gens = g.subgroup_generators();
        assert_eq!(gens.len() as u64, g.reduced_rank() + 1);
        for w in &gens {
            assert!(!w.is_empty());
            assert!(g.contains(w));
        }
        let back = AGraph::wedge(&spec, &gens).fold().unwrap();
        assert!(back.is_isomorphic(&g));
    }

    #[test]
    fn raw_roundtrip_and_validation() {
        let spec = c33();
        let g = full_graph(&spec, 3);
        let raw = g.to_raw();
        let back = AGraph::from_raw(spec.clone(), &raw).unwrap();
        assert_eq!(g, back);
        let json = serde_json::to_string(&raw).unwrap();
        let reraw: RawGraph = serde_json::from_str(&json).unwrap();
        let again = AGraph::from_raw(spec.clone(), &reraw).unwrap();
        assert_eq!(g, again);
        // Bad label rejected.
        let mut bad = g.to_raw();
        bad.edges[0].2 = GroupElem::Idx(7);
        assert!(AGraph::from_raw(spec, &bad).is_err());
    }

    #[test]
    fn violations_reported() {
        let spec = c33();
        let mut g = AGraph::new(spec);
        g.add_primary();
        g.add_primary();
        let s0 = g.add_secondary(0);
        let s1 = g.add_secondary(0);
        g.add_edge(0, s0, GroupElem::Idx(1));
        g.add_edge(0, s1, GroupElem::Idx(2));
        g.add_edge(1, s0, GroupElem::Idx(1));
        g.add_edge(1, s1, GroupElem::Idx(1));
        let v = g.irreducibility_violations();
        assert!(v.iter().any(|s| s.starts_with("P1")), "{v:?}");
        // s0 has labels 1, 1: a P2 violation too.
        assert!(v.iter().any(|s| s.starts_with("P2")), "{v:?}");
    }
}
