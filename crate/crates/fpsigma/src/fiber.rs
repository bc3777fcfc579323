//! Fiber product of two labeled graphs over the same free product.
//!
//! The fiber product encodes, up to conjugacy, all intersections of
//! conjugates of the two subgroups the factor graphs represent. Its core
//! carries projections onto the two factors; those projections drive both
//! the reduced-rank computation and the partner-graph checks used by the
//! coefficient machinery.

use crate::agraph::{AGraph, Edge, GraphError};
use crate::groups::GroupElem;
use num::BigRational;
use num::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FiberError {
    /// Every component of the projected image has reduced rank zero, so no
    /// partner graph can be extracted.
    #[error("no component of the projected image has positive reduced rank")]
    NoPositiveComponent,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Core of the fiber product of two graphs, with vertex and edge
/// projections onto each factor.
///
/// Index `i` of each `tau*` vector holds the factor-graph index of the
/// image of vertex or edge `i` of `graph`.
#[derive(Debug, Clone)]
pub struct FiberCore {
    pub graph: AGraph,
    pub tau1_primary: Vec<usize>,
    pub tau2_primary: Vec<usize>,
    pub tau1_secondary: Vec<usize>,
    pub tau2_secondary: Vec<usize>,
    pub tau1_edge: Vec<usize>,
    pub tau2_edge: Vec<usize>,
}

/// Core of the fiber product of `y1` and `y2`, which must share a spec.
///
/// Primary vertices of the full product are pairs `(v1, v2)`; for each
/// factor index `alpha`, a pair with an `alpha`-edge on both sides carries
/// one `alpha`-edge, and two such edges meet the same secondary vertex
/// exactly when their edge pairs `(e1, e2)` and `(f1, f2)` satisfy
/// `label(e2)^-1 label(e1) = label(f2)^-1 label(f1)` with matching
/// secondary endpoints on both sides. Edge labels are taken from the `y1`
/// side, which is a valid gauge choice.
pub fn fiber_core(y1: &AGraph, y2: &AGraph) -> FiberCore {
    assert_eq!(y1.spec(), y2.spec(), "fiber product requires a common spec");
    let spec = y1.spec();
    let m = spec.num_factors();

    // Unique alpha-edge per primary vertex per type; the inputs satisfy the
    // one-secondary-per-type condition.
    let slot = |g: &AGraph| -> BTreeMap<(usize, usize), usize> {
        let mut out = BTreeMap::new();
        for (i, e) in g.edges().iter().enumerate() {
            let t = g.secondary_type(e.secondary);
            let prev = out.insert((e.primary, t), i);
            debug_assert!(prev.is_none(), "primary vertex with two edges of one type");
        }
        out
    };
    let s1 = slot(y1);
    let s2 = slot(y2);

    let mut pair_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut class_ids: BTreeMap<(usize, usize, usize, GroupElem), usize> = BTreeMap::new();
    let mut classes: Vec<(usize, usize)> = Vec::new();
    let mut class_types: Vec<usize> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut edge_pairs: Vec<(usize, usize)> = Vec::new();

    for alpha in 0..m {
        let fac = spec.factor(alpha);
        for v1 in 0..y1.primary_count() {
            let Some(&i1) = s1.get(&(v1, alpha)) else { continue };
            let e1 = &y1.edges()[i1];
            for v2 in 0..y2.primary_count() {
                let Some(&i2) = s2.get(&(v2, alpha)) else { continue };
                let e2 = &y2.edges()[i2];
                let kappa = fac.mul(&fac.inv(&e2.label), &e1.label);
                let np = pairs.len();
                let pid = *pair_ids.entry((v1, v2)).or_insert_with(|| {
                    pairs.push((v1, v2));
                    np
                });
                let ns = classes.len();
                let sid = *class_ids
                    .entry((alpha, e1.secondary, e2.secondary, kappa))
                    .or_insert_with(|| {
                        classes.push((e1.secondary, e2.secondary));
                        class_types.push(alpha);
                        ns
                    });
                edges.push(Edge { primary: pid, secondary: sid, label: e1.label.clone() });
                edge_pairs.push((i1, i2));
            }
        }
    }

    // from_parts sorts the edge list, so carry the pair data through the
    // same permutation.
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| edges[a].cmp(&edges[b]));
    let sorted_edges: Vec<Edge> = order.iter().map(|&i| edges[i].clone()).collect();
    let sorted_pairs: Vec<(usize, usize)> = order.iter().map(|&i| edge_pairs[i]).collect();
    let full = AGraph::from_parts(spec.clone(), pairs.len(), class_types, sorted_edges, None)
        .expect("fiber product parts are valid by construction");

    let (core, pmap, smap, emap) = full.core_with_maps();
    FiberCore {
        graph: core,
        tau1_primary: pmap.iter().map(|&p| pairs[p].0).collect(),
        tau2_primary: pmap.iter().map(|&p| pairs[p].1).collect(),
        tau1_secondary: smap.iter().map(|&s| classes[s].0).collect(),
        tau2_secondary: smap.iter().map(|&s| classes[s].1).collect(),
        tau1_edge: emap.iter().map(|&e| sorted_pairs[e].0).collect(),
        tau2_edge: emap.iter().map(|&e| sorted_pairs[e].1).collect(),
    }
}

/// Sum over conjugacy classes of intersections: the reduced rank of the
/// fiber product core.
pub fn intersection_rank(y1: &AGraph, y2: &AGraph) -> u64 {
    fiber_core(y1, y2).graph.reduced_rank()
}

/// True when the second projection hits every vertex and every edge of
/// `y2`.
pub fn tau2_surjective(f: &FiberCore, y2: &AGraph) -> bool {
    let mut hit_p = vec![false; y2.primary_count()];
    let mut hit_s = vec![false; y2.secondary_count()];
    let mut hit_e = vec![false; y2.edges().len()];
    for &p in &f.tau2_primary {
        hit_p[p] = true;
    }
    for &s in &f.tau2_secondary {
        hit_s[s] = true;
    }
    for &e in &f.tau2_edge {
        hit_e[e] = true;
    }
    hit_p.into_iter().all(|b| b) && hit_s.into_iter().all(|b| b) && hit_e.into_iter().all(|b| b)
}

/// Partner conditions for a candidate second graph at degree bound `d`:
/// finite, irreducible and baseless with no vertex of degree below two,
/// positive reduced rank, every vertex degree at most `d`, and a second
/// projection from the fiber core that is surjective on vertices and
/// edges.
pub fn is_partner_graph(y1: &AGraph, y2: &AGraph, d: usize) -> bool {
    if y2.base().is_some() || !y2.is_irreducible() {
        return false;
    }
    let (dp, ds) = y2.degrees();
    if dp.iter().chain(ds.iter()).any(|&x| x < 2) {
        return false;
    }
    if y2.reduced_rank() == 0 || y2.max_degree() > d {
        return false;
    }
    tau2_surjective(&fiber_core(y1, y2), y2)
}

fn rank_ratio(y1: &AGraph, y2: &AGraph) -> BigRational {
    BigRational::new(intersection_rank(y1, y2).into(), y2.reduced_rank().into())
}

/// Replace `y2` by the component of its fiber image with the largest ratio
/// of intersection rank to own reduced rank, repeating until the second
/// projection is surjective and the graph is connected.
///
/// The result is a partner graph for `y1` whose ratio is at least that of
/// any positive-rank component of the original.
pub fn trim_to_partner(y1: &AGraph, y2: AGraph) -> Result<AGraph, FiberError> {
    let mut cur = y2.core();
    loop {
        // Rank never grows under passing to subgraph cores, so a rank-zero
        // graph cannot yield a partner.
        if cur.reduced_rank() == 0 {
            return Err(FiberError::NoPositiveComponent);
        }
        let f = fiber_core(y1, &cur);
        if tau2_surjective(&f, &cur) && cur.is_connected() {
            return Ok(cur);
        }

        // Restrict to the image subgraph, split into components, and keep
        // the best one. The image is a proper subgraph here, so the edge
        // count strictly drops and the loop terminates.
        let mut hit_e = vec![false; cur.edges().len()];
        for &e in &f.tau2_edge {
            hit_e[e] = true;
        }
        let image_edges: Vec<Edge> =
            cur.edges().iter().enumerate().filter(|(i, _)| hit_e[*i]).map(|(_, e)| e.clone()).collect();
        let image = AGraph::from_parts(
            cur.spec().clone(),
            cur.primary_count(),
            (0..cur.secondary_count()).map(|s| cur.secondary_type(s)).collect(),
            image_edges,
            None,
        )?
        .core();
        let (pc, sc, n) = image.component_ids();
        let mut best: Option<(BigRational, AGraph)> = None;
        for c in 0..n {
            let keep_s: Vec<usize> =
                (0..image.secondary_count()).filter(|&s| sc[s] == c).collect();
            let smap: BTreeMap<usize, usize> =
                keep_s.iter().enumerate().map(|(new, &old)| (old, new)).collect();
            let keep_p: Vec<usize> = (0..image.primary_count()).filter(|&p| pc[p] == c).collect();
            let pmap: BTreeMap<usize, usize> =
                keep_p.iter().enumerate().map(|(new, &old)| (old, new)).collect();
            let comp = AGraph::from_parts(
                image.spec().clone(),
                keep_p.len(),
                keep_s.iter().map(|&s| image.secondary_type(s)).collect(),
                image
                    .edges()
                    .iter()
                    .filter(|e| pc[e.primary] == c)
                    .map(|e| Edge {
                        primary: pmap[&e.primary],
                        secondary: smap[&e.secondary],
                        label: e.label.clone(),
                    })
                    .collect(),
                None,
            )?;
            if comp.reduced_rank() == 0 {
                continue;
            }
            let ratio = rank_ratio(y1, &comp);
            match &best {
                Some((r, _)) if *r >= ratio => {}
                _ => best = Some((ratio, comp)),
            }
        }
        match best {
            Some((r, g)) => {
                debug_assert!(r > BigRational::zero());
                // Every vertex of `cur` has degree at least two, so a failed
                // surjectivity check already drops an edge; a disconnected
                // image loses edges by component selection.
                debug_assert!(g.edges().len() < cur.edges().len());
                cur = g;
            }
            None => return Err(FiberError::NoPositiveComponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FreeProduct, GroupTable, Letter, Word};
    use crate::testkit::full_graph;

    fn c3c3() -> FreeProduct {
        FreeProduct::of_tables(vec![GroupTable::cyclic(3), GroupTable::cyclic(3)]).unwrap()
    }

    #[test]
    fn fiber_of_full_graph_with_itself_splits_into_copies() {
        let spec = c3c3();
        let g = full_graph(&spec, 3);
        let f = fiber_core(&g, &g);
        assert_eq!(f.graph.primary_count(), 9);
        assert_eq!(f.graph.secondary_count(), 6);
        assert_eq!(f.graph.edges().len(), 18);
        let (_, _, n) = f.graph.component_ids();
        assert_eq!(n, 3);
        assert_eq!(f.graph.reduced_rank(), 3);
        assert_eq!(intersection_rank(&g, &g), 3);
        // The diagonal component contains the pair (0, 0) and is a copy of
        // the factor graph.
        let mut unbased = g.clone();
        unbased.set_base(None);
        let (pc, sc, _) = f.graph.component_ids();
        let diag = (0..f.graph.primary_count())
            .find(|&p| f.tau1_primary[p] == 0 && f.tau2_primary[p] == 0)
            .unwrap();
        let c = pc[diag];
        let keep_p: Vec<usize> =
            (0..f.graph.primary_count()).filter(|&p| pc[p] == c).collect();
        let keep_s: Vec<usize> =
            (0..f.graph.secondary_count()).filter(|&s| sc[s] == c).collect();
        let pmap: BTreeMap<usize, usize> =
            keep_p.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let smap: BTreeMap<usize, usize> =
            keep_s.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let comp = AGraph::from_parts(
            f.graph.spec().clone(),
            keep_p.len(),
            keep_s.iter().map(|&s| f.graph.secondary_type(s)).collect(),
            f.graph
                .edges()
                .iter()
                .filter(|e| pc[e.primary] == c)
                .map(|e| Edge {
                    primary: pmap[&e.primary],
                    secondary: smap[&e.secondary],
                    label: e.label.clone(),
                })
                .collect(),
            None,
        )
        .unwrap();
        assert!(comp.is_isomorphic(&unbased));
    }

    #[test]
    fn projections_commute_with_incidence() {
        let spec = c3c3();
        let g = full_graph(&spec, 3);
        let h = {
            let w = Word::from_letters(vec![
                Letter { factor: 0, elem: GroupElem::Idx(1) },
                Letter { factor: 1, elem: GroupElem::Idx(1) },
            ]);
            AGraph::wedge(&spec, &[w]).fold().unwrap()
        };
        let f = fiber_core(&g, &h);
        for (i, e) in f.graph.edges().iter().enumerate() {
            let e1 = &g.edges()[f.tau1_edge[i]];
            let e2 = &h.edges()[f.tau2_edge[i]];
            assert_eq!(e1.primary, f.tau1_primary[e.primary]);
            assert_eq!(e2.primary, f.tau2_primary[e.primary]);
            assert_eq!(e1.secondary, f.tau1_secondary[e.secondary]);
            assert_eq!(e2.secondary, f.tau2_secondary[e.secondary]);
            assert_eq!(e1.label, e.label);
        }
    }

    #[test]
    fn cyclic_partner_has_rank_zero_intersection() {
        let spec = c3c3();
        let g = full_graph(&spec, 3);
        let w = Word::from_letters(vec![
            Letter { factor: 0, elem: GroupElem::Idx(1) },
            Letter { factor: 1, elem: GroupElem::Idx(1) },
        ]);
        let h = AGraph::wedge(&spec, &[w]).fold().unwrap();
        assert_eq!(h.reduced_rank(), 0);
        assert_eq!(intersection_rank(&g, &h), 0);
    }

    #[test]
    fn full_graph_is_its_own_partner() {
        let spec = c3c3();
        let g = full_graph(&spec, 3);
        let mut unbased = g.clone();
        unbased.set_base(None);
        assert!(is_partner_graph(&g, &unbased, 3));
        assert!(!is_partner_graph(&g, &unbased, 2));
    }

    #[test]
    fn trim_keeps_best_component_of_disjoint_union() {
        let spec = c3c3();
        let g = full_graph(&spec, 3);
        // Disjoint union of a full graph and a rank-zero cycle; trimming
        // must return the full-graph component.
        let full = full_graph(&spec, 3);
        let w = Word::from_letters(vec![
            Letter { factor: 0, elem: GroupElem::Idx(1) },
            Letter { factor: 1, elem: GroupElem::Idx(1) },
        ]);
        let cyc = AGraph::wedge(&spec, &[w]).fold().unwrap();
        let np = full.primary_count();
        let ns = full.secondary_count();
        let mut types: Vec<usize> =
            (0..ns).map(|s| full.secondary_type(s)).collect();
        types.extend((0..cyc.secondary_count()).map(|s| cyc.secondary_type(s)));
        let mut edges: Vec<Edge> = full.edges().to_vec();
        edges.extend(cyc.edges().iter().map(|e| Edge {
            primary: e.primary + np,
            secondary: e.secondary + ns,
            label: e.label.clone(),
        }));
        let union = AGraph::from_parts(
            spec.clone(),
            np + cyc.primary_count(),
            types,
            edges,
            None,
        )
        .unwrap();
        let trimmed = trim_to_partner(&g, union).unwrap();
        let mut unbased = full.clone();
        unbased.set_base(None);
        assert!(trimmed.is_isomorphic(&unbased));
    }

    #[test]
    fn trim_rejects_rank_zero_candidates() {
        let spec = c3c3();
        let g = full_graph(&spec, 3);
        let w = Word::from_letters(vec![
            Letter { factor: 0, elem: GroupElem::Idx(1) },
            Letter { factor: 1, elem: GroupElem::Idx(1) },
        ]);
        let cyc = AGraph::wedge(&spec, &[w]).fold().unwrap();
        assert!(matches!(trim_to_partner(&g, cyc), Err(FiberError::NoPositiveComponent)));
    }
}
