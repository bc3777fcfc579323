//! Brute-force cross-checks: enumerate small bounded-degree graphs and
//! maximize the fiber rank ratio directly.
//!
//! The coefficient is a supremum of fiber rank ratios over partner graphs,
//! so every enumerated candidate bounds it from below, and an exhaustive
//! enumeration under a cap attains it whenever some extremal graph fits
//! under that cap. This module never defines the coefficient; it only
//! cross-checks the solver from below.

use crate::agraph::{AGraph, CanonicalKey, Edge};
use crate::fiber::{intersection_rank, trim_to_partner};
use crate::groups::{FreeProduct, GroupElem};
use crate::lp::{rat, Rational};
use crate::par::par_map;
use itertools::Itertools;
use std::collections::BTreeMap;

/// Push every partition of `rest` into blocks of size `2..=cap` onto `out`,
/// each prefixed by `acc`, keeping at most `max_blocks` blocks. Blocks form
/// in order of their least elements, so each partition appears once.
fn extend_partitions(
    rest: &[usize],
    cap: usize,
    max_blocks: usize,
    acc: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    let Some((&first, tail)) = rest.split_first() else {
        out.push(acc.clone());
        return;
    };
    if acc.len() == max_blocks {
        return;
    }
    let n = tail.len();
    for mask in 0u32..1 << n {
        let size = mask.count_ones() as usize + 1;
        if size < 2 || size > cap {
            continue;
        }
        let mut block = vec![first];
        let mut remaining = Vec::new();
        for (i, &v) in tail.iter().enumerate() {
            if mask >> i & 1 == 1 {
                block.push(v);
            } else {
                remaining.push(v);
            }
        }
        acc.push(block);
        extend_partitions(&remaining, cap, max_blocks, acc, out);
        acc.pop();
    }
}

/// Families of pairwise disjoint blocks of `{0..p}`, each of size
/// `2..=cap`, with at most `max_blocks` blocks. The empty family, standing
/// for a factor with no secondary vertices, is included.
fn block_families(p: usize, cap: usize, max_blocks: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for mask in 0u32..1 << p {
        let covered: Vec<usize> = (0..p).filter(|&v| mask >> v & 1 == 1).collect();
        extend_partitions(&covered, cap, max_blocks, &mut Vec::new(), &mut out);
    }
    out
}

/// Ordered label tuples for a block of the given size in a factor of order
/// `ord`: the block's least vertex takes the identity and the rest take
/// pairwise distinct non-identity elements, which exhausts all labelings up
/// to the right-translation gauge of the block's secondary vertex.
fn label_choices(ord: usize, size: usize) -> Vec<Vec<GroupElem>> {
    (1..ord as u32)
        .permutations(size - 1)
        .map(|tail| {
            let mut labels = vec![GroupElem::Idx(0)];
            labels.extend(tail.into_iter().map(GroupElem::Idx));
            labels
        })
        .collect()
}

/// All irreducible core graphs over `spec`, up to isomorphism, with at most
/// `max_secondary` secondary vertices, every degree at most `d`, and
/// positive reduced rank, ordered by canonical form.
///
/// The walk chooses, per factor, a family of disjoint primary-vertex blocks
/// (one block per secondary vertex, sizes within both `d` and the factor
/// order), keeps the choices that cover every primary vertex at least
/// twice, and then assigns all label tuples. Exponential, but capped.
pub fn enumerate_bd_graphs(spec: &FreeProduct, d: usize, max_secondary: usize) -> Vec<AGraph> {
    let m = spec.num_factors();
    let caps: Vec<usize> = spec
        .factors()
        .iter()
        .map(|f| d.min(f.order().expect("enumeration needs finite factors")))
        .collect();
    // Degree two everywhere forces 2 |V_P| <= sum of secondary degrees.
    let max_primary = max_secondary * d / 2;
    assert!(max_primary <= 10, "cap admits too many primary vertices to enumerate");
    let mut seen: BTreeMap<CanonicalKey, AGraph> = BTreeMap::new();
    for p in 2..=max_primary {
        let families: Vec<Vec<Vec<Vec<usize>>>> =
            (0..m).map(|alpha| block_families(p, caps[alpha], max_secondary)).collect();
        for combo in families.iter().multi_cartesian_product() {
            if combo.iter().map(|f| f.len()).sum::<usize>() > max_secondary {
                continue;
            }
            let mut coverage = vec![0usize; p];
            for family in &combo {
                for block in family.iter() {
                    for &v in block {
                        coverage[v] += 1;
                    }
                }
            }
            if coverage.iter().any(|&c| c < 2) {
                continue;
            }
            let blocks: Vec<(usize, &Vec<usize>)> = combo
                .iter()
                .enumerate()
                .flat_map(|(alpha, family)| family.iter().map(move |b| (alpha, b)))
                .collect();
            let per_block: Vec<Vec<Vec<GroupElem>>> = blocks
                .iter()
                .map(|(alpha, block)| {
                    label_choices(spec.factor(*alpha).order().unwrap(), block.len())
                })
                .collect();
            for labeling in per_block.iter().multi_cartesian_product() {
                let mut types = Vec::with_capacity(blocks.len());
                let mut edges = Vec::new();
                for (sid, ((alpha, block), labels)) in
                    blocks.iter().zip(&labeling).enumerate()
                {
                    types.push(*alpha);
                    for (&v, label) in block.iter().zip(labels.iter()) {
                        edges.push(Edge { primary: v, secondary: sid, label: label.clone() });
                    }
                }
                let g = AGraph::from_parts(spec.clone(), p, types, edges, None)
                    .expect("enumerated parts are valid");
                if !g.is_connected() || !g.is_irreducible() || g.reduced_rank() == 0 {
                    continue;
                }
                seen.entry(g.canonical_key()).or_insert(g);
            }
        }
    }
    seen.into_values().collect()
}

/// Largest fiber rank ratio over the enumerated stream, with an attaining
/// partner graph; ties prefer the least canonical form. `None` when nothing
/// under the cap yields a partner.
///
/// Every candidate is trimmed to a partner graph first, so the returned
/// value is a true lower bound for the coefficient of `y1` at `d`, and it
/// reaches the coefficient exactly once the cap admits an extremal graph.
pub fn best_ratio(y1: &AGraph, d: usize, max_secondary: usize) -> Option<(Rational, AGraph)> {
    let core = y1.core();
    let brr1 = core.reduced_rank();
    assert!(brr1 > 0, "the ratio needs positive reduced rank");
    let stream = enumerate_bd_graphs(core.spec(), d, max_secondary);
    let scored = par_map(stream, |y2| {
        let partner = trim_to_partner(&core, y2).ok()?;
        let ratio = rat(intersection_rank(&core, &partner) as i64)
            / (rat(brr1 as i64) * rat(partner.reduced_rank() as i64));
        Some((ratio, partner.canonical_key(), partner))
    });
    scored
        .into_iter()
        .flatten()
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)))
        .map(|(ratio, _, g)| (ratio, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sli::compute_sigma;
    use crate::testkit::{commutator_generators, cyclic_product, full_graph};

    fn unbased(mut g: AGraph) -> AGraph {
        g.set_base(None);
        g
    }

    /// Full graph with the second factor's labels reversed: the other
    /// matching of two three-element label sets.
    fn twisted_full_graph() -> AGraph {
        let spec = cyclic_product(&[3, 3]);
        let edges = (0..3)
            .flat_map(|i| {
                [
                    Edge { primary: i, secondary: 0, label: GroupElem::Idx(i as u32) },
                    Edge { primary: i, secondary: 1, label: GroupElem::Idx(((3 - i) % 3) as u32) },
                ]
            })
            .collect();
        AGraph::from_parts(spec, 3, vec![0, 1], edges, None).expect("twist parts")
    }

    #[test]
    fn two_cyclic_factors_admit_exactly_the_two_matchings() {
        let spec = cyclic_product(&[3, 3]);
        let stream = enumerate_bd_graphs(&spec, 3, 2);
        assert_eq!(stream.len(), 2);
        let full = unbased(full_graph(&spec, 3));
        let twist = twisted_full_graph();
        assert!(stream.iter().any(|g| g.is_isomorphic(&full)));
        assert!(stream.iter().any(|g| g.is_isomorphic(&twist)));
        assert!(!full.is_isomorphic(&twist));
    }

    #[test]
    fn theta_is_the_only_graph_under_the_smallest_three_factor_cap() {
        let spec = cyclic_product(&[2, 2, 2]);
        let stream = enumerate_bd_graphs(&spec, 3, 3);
        assert_eq!(stream.len(), 1);
        let theta_edges = (0..3)
            .flat_map(|s| {
                [
                    Edge { primary: 0, secondary: s, label: GroupElem::Idx(0) },
                    Edge { primary: 1, secondary: s, label: GroupElem::Idx(1) },
                ]
            })
            .collect();
        let theta =
            AGraph::from_parts(spec, 2, vec![0, 1, 2], theta_edges, None).expect("theta parts");
        assert!(stream[0].is_isomorphic(&theta));
        assert_eq!(stream[0].reduced_rank(), 1);
    }

    #[test]
    fn stream_graphs_are_distinct_bounded_cores_of_positive_rank() {
        let spec = cyclic_product(&[3, 3]);
        let stream = enumerate_bd_graphs(&spec, 3, 4);
        // Cap four admits the five-primary split blocks beyond the matchings.
        assert!(stream.len() > 2);
        for g in &stream {
            assert!(g.is_irreducible());
            assert!(g.reduced_rank() > 0);
            assert!(g.max_degree() <= 3);
            let (dp, ds) = g.degrees();
            assert!(dp.iter().chain(ds.iter()).all(|&x| x >= 2));
        }
        for (i, a) in stream.iter().enumerate() {
            for b in &stream[i + 1..] {
                assert!(!a.is_isomorphic(b));
            }
        }
    }

    #[test]
    fn best_ratio_attains_the_full_graph_coefficient() {
        let y1 = full_graph(&cyclic_product(&[3, 3]), 3);
        let sigma = compute_sigma(&y1, 3).unwrap().sigma;
        assert_eq!(sigma, rat(3));
        let (value, partner) = best_ratio(&y1, 3, 2).expect("cap two admits partners");
        assert_eq!(value, sigma);
        assert!(partner.is_isomorphic(&unbased(full_graph(&cyclic_product(&[3, 3]), 3))));
    }

    #[test]
    fn best_ratio_grows_with_the_cap_and_never_passes_the_coefficient() {
        let y1 = full_graph(&cyclic_product(&[3, 3]), 3);
        let sigma = compute_sigma(&y1, 3).unwrap().sigma;
        assert!(best_ratio(&y1, 3, 1).is_none());
        let (v2, _) = best_ratio(&y1, 3, 2).unwrap();
        let (v3, _) = best_ratio(&y1, 3, 3).unwrap();
        assert!(v2 <= v3);
        assert!(v3 <= sigma);
    }

    #[test]
    fn commutator_oracle_stays_below_its_coefficient() {
        let (spec, gens) = commutator_generators();
        let y1 = AGraph::wedge(&spec, &gens).fold().unwrap().core();
        let sigma = compute_sigma(&y1, 3).unwrap().sigma;
        // The order-2 factor forces perfect matchings, so positive rank needs
        // six primary vertices and five secondary vertices; caps below five
        // admit nothing at all.
        assert!(best_ratio(&y1, 3, 4).is_none());
        let (value, partner) = best_ratio(&y1, 3, 5).expect("cap five admits partners");
        assert!(value <= sigma, "ratio {value} exceeds {sigma}");
        assert!(value > rat(0));
        assert!(partner.max_degree() <= 3);
    }
}
