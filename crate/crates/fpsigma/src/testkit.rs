//! Shared fixtures: small deterministic graphs and a seeded random graph
//! generator used by tests and benchmarks.

use crate::agraph::{AGraph, Edge};
use crate::groups::{FreeProduct, GroupElem, GroupTable, Letter, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Free product of cyclic groups of the given orders.
pub fn cyclic_product(orders: &[usize]) -> FreeProduct {
    FreeProduct::of_tables(orders.iter().map(|&n| GroupTable::cyclic(n)).collect())
        .expect("cyclic product spec")
}

/// Graph with `n` primary vertices, one secondary vertex per factor, and an
/// edge from every primary vertex to every secondary vertex labeled by the
/// primary index. Needs `n` distinct elements in every factor. Based at
/// vertex zero; reduced rank is `nm - n - m` for `m` factors.
pub fn full_graph(spec: &FreeProduct, n: usize) -> AGraph {
    let m = spec.num_factors();
    for (alpha, f) in spec.factors().iter().enumerate() {
        let ord = f.order().unwrap_or(usize::MAX);
        assert!(n <= ord, "factor {alpha} has fewer than {n} elements");
    }
    let edges = (0..n)
        .flat_map(|p| (0..m).map(move |s| Edge { primary: p, secondary: s, label: GroupElem::Idx(p as u32) }))
        .collect();
    AGraph::from_parts(spec.clone(), n, (0..m).collect(), edges, Some(0)).expect("full graph parts")
}

/// Rank-one graph over an order-2 and an order-4 factor: two 2-port
/// secondary vertices on the first factor and one 4-port secondary vertex
/// on the second.
pub fn ladder_c2c4() -> AGraph {
    let spec = cyclic_product(&[2, 4]);
    let edges = vec![
        Edge { primary: 0, secondary: 0, label: GroupElem::Idx(0) },
        Edge { primary: 1, secondary: 0, label: GroupElem::Idx(1) },
        Edge { primary: 2, secondary: 1, label: GroupElem::Idx(0) },
        Edge { primary: 3, secondary: 1, label: GroupElem::Idx(1) },
        Edge { primary: 0, secondary: 2, label: GroupElem::Idx(0) },
        Edge { primary: 1, secondary: 2, label: GroupElem::Idx(1) },
        Edge { primary: 2, secondary: 2, label: GroupElem::Idx(2) },
        Edge { primary: 3, secondary: 2, label: GroupElem::Idx(3) },
    ];
    AGraph::from_parts(spec, 4, vec![0, 0, 1], edges, Some(0)).expect("ladder parts")
}

/// Generators `abab^2` and `ab^2ab` over an order-2 and an order-3 factor:
/// an index-6, rank-2 subgroup whose graph has reduced rank 1.
pub fn commutator_generators() -> (FreeProduct, Vec<Word>) {
    let spec = cyclic_product(&[2, 3]);
    let a = Letter::idx(0, 1);
    let b = Letter::idx(1, 1);
    let b2 = Letter::idx(1, 2);
    let g1 = Word::from_letters(vec![a.clone(), b.clone(), a.clone(), b2.clone()]);
    let g2 = Word::from_letters(vec![a.clone(), b2, a, b]);
    (spec, vec![g1, g2])
}

/// Seeded random baseless graph in which every vertex has degree at least
/// two and at most `d`: for each factor the primary vertices are shuffled
/// and split into secondary-vertex groups of 2 to `min(d, order)` ports
/// with distinct labels. `size` is rounded up to keep every factor
/// partitionable. The result is irreducible but its reduced rank may be
/// zero; callers needing positive rank must reject and redraw.
pub fn random_core_graph(spec: &FreeProduct, d: usize, size: usize, seed: u64) -> AGraph {
    let m = spec.num_factors();
    assert!(d >= m, "degree bound below the primary vertex degree");
    assert!(size >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_group: Vec<usize> = spec
        .factors()
        .iter()
        .map(|f| d.min(f.order().unwrap_or(usize::MAX)))
        .collect();
    assert!(max_group.iter().all(|&g| g >= 2), "a factor admits no 2-port group");
    // A factor capped at 2-port groups forces an even vertex count.
    let size = if max_group.iter().any(|&g| g == 2) { size + size % 2 } else { size };

    let mut types = Vec::new();
    let mut edges = Vec::new();
    for (alpha, f) in spec.factors().iter().enumerate() {
        let mut verts: Vec<usize> = (0..size).collect();
        verts.shuffle(&mut rng);
        let mut sizes = Vec::new();
        let mut rem = size;
        while rem >= 4 {
            let hi = max_group[alpha].min(rem - 2);
            let s = rng.gen_range(2..=hi.max(2));
            sizes.push(s);
            rem -= s;
        }
        if rem > 0 {
            debug_assert!(rem >= 2 && rem <= max_group[alpha]);
            sizes.push(rem);
        }
        let ord = f.order().expect("random graphs need finite factor tables");
        let mut at = 0;
        for s in sizes {
            let sec = types.len();
            types.push(alpha);
            let mut labels: Vec<usize> = (0..ord).collect();
            labels.shuffle(&mut rng);
            for (i, &p) in verts[at..at + s].iter().enumerate() {
                edges.push(Edge { primary: p, secondary: sec, label: GroupElem::Idx(labels[i] as u32) });
            }
            at += s;
        }
    }
    AGraph::from_parts(spec.clone(), size, types, edges, None).expect("random graph parts")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_ranks() {
        let g = full_graph(&cyclic_product(&[3, 3]), 3);
        assert!(g.is_irreducible());
        assert_eq!(g.reduced_rank(), 1);
        let l = ladder_c2c4();
        assert!(l.is_irreducible());
        assert_eq!(l.reduced_rank(), 1);
        assert_eq!(l.max_degree(), 4);
        let (spec, gens) = commutator_generators();
        let c = AGraph::wedge(&spec, &gens).fold().unwrap();
        assert_eq!(c.primary_count(), 6);
        assert_eq!(c.reduced_rank(), 1);
    }

    #[test]
    fn random_graphs_are_irreducible_cores_within_degree() {
        let spec = cyclic_product(&[2, 4]);
        for seed in 0..30 {
            let g = random_core_graph(&spec, 4, 6, seed);
            assert!(g.is_irreducible(), "seed {seed}: {:?}", g.irreducibility_violations());
            assert!(g.max_degree() <= 4);
            let (dp, ds) = g.degrees();
            assert!(dp.iter().chain(ds.iter()).all(|&x| x >= 2));
            assert_eq!(g.core().edges().len(), g.edges().len());
        }
    }

    #[test]
    fn random_graphs_vary_and_replay_by_seed() {
        let spec = cyclic_product(&[3, 3]);
        let a = random_core_graph(&spec, 3, 6, 7);
        let b = random_core_graph(&spec, 3, 6, 7);
        assert!(a.is_isomorphic(&b));
        let c = random_core_graph(&spec, 3, 6, 8);
        let distinct = !a.is_isomorphic(&c);
        let d = random_core_graph(&spec, 3, 6, 9);
        assert!(distinct || !a.is_isomorphic(&d));
    }
}
