//! Reduction of free products with three or more factors to two factors.
//!
//! Pick a nontrivial element `g_i` in every factor and send each letter `a`
//! of factor `i` to the conjugate `w_i^-1 a w_i`, where
//! `w_i = g_{i+1} ... g_{m-1} g_0 ... g_i` is the cyclic permutation of
//! `g_0 g_1 ... g_{m-1}` ending in `g_i`. Seams between images of adjacent
//! letters never cancel completely (consecutive conjugators end and start in
//! different factors), so the extension to words is an injective
//! homomorphism. Regrouping an image over the split
//! `G_0 * (G_1 * ... * G_{m-1})` reads it as a word over two factors, the
//! second an infinite one whose elements are normalized inner words.
//!
//! Subgroup graphs of images keep the reduced rank and the maximal vertex
//! degree of the originals, and intersection ranks against embedded partners
//! are preserved, so a coefficient computed over the two-factor split bounds
//! every intersection ratio of the source subgroup from above.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::agraph::{AGraph, GraphError};
use crate::groups::{FactorGroup, FreeProduct, GroupElem, GroupError, Letter, Word};
use crate::sli::{compute_sigma, SigmaComputation, SliError};

/// Errors from embedding construction and the combined pipeline.
#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding needs at least three factors, got {0}")]
    TooFewFactors(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sli(#[from] SliError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A conjugated embedding of a many-factor product into the two-factor
/// split `G_0 * (G_1 * ... * G_{m-1})` of the same product.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FreeProduct,
    target: FreeProduct,
    chosen: Vec<GroupElem>,
    conjugators: Vec<Word>,
}

impl Embedding {
    /// Fixes the chosen elements (the first nontrivial element of every
    /// factor) and the conjugators, and builds the two-factor target.
    pub fn new(source: &FreeProduct) -> Result<Self, EmbedError> {
        let m = source.num_factors();
        if m < 3 {
            return Err(EmbedError::TooFewFactors(m));
        }
        // Factors of a valid product are nontrivial, so element 1 exists.
        let mut chosen = Vec::with_capacity(m);
        for f in source.factors() {
            chosen.push(f.elements(2)?[1].clone());
        }
        let conjugators = (0..m)
            .map(|i| {
                let letters = (1..=m)
                    .map(|j| {
                        let k = (i + j) % m;
                        Letter::new(k, chosen[k].clone())
                    })
                    .collect();
                Word::from_letters(letters)
            })
            .collect();
        let inner = FreeProduct::new(source.factors()[1..].to_vec())?;
        let target = FreeProduct::new(vec![
            source.factor(0).clone(),
            FactorGroup::Product(inner),
        ])?;
        Ok(Embedding { source: source.clone(), target, chosen, conjugators })
    }

    pub fn source(&self) -> &FreeProduct {
        &self.source
    }

    /// The two-factor product the embedding maps into.
    pub fn target(&self) -> &FreeProduct {
        &self.target
    }

    /// The chosen nontrivial element of each source factor.
    pub fn chosen(&self) -> &[GroupElem] {
        &self.chosen
    }

    /// The conjugator for letters of factor `i`, as a source word.
    pub fn conjugator(&self, i: usize) -> &Word {
        &self.conjugators[i]
    }

    /// Image of a source word inside the source product: every letter is
    /// conjugated by the cyclic permutation ending in its factor.
    pub fn source_image(&self, w: &Word) -> Word {
        let mut letters = Vec::new();
        for l in &self.source.normalize(w).0 {
            let wi = &self.conjugators[l.factor];
            letters.extend(self.source.inv(wi).0);
            letters.push(l.clone());
            letters.extend(wi.0.iter().cloned());
        }
        self.source.normalize(&Word::from_letters(letters))
    }

    /// The same group element read over the two-factor split: factor-0
    /// letters stay letters, maximal runs of other letters become single
    /// letters of the infinite factor.
    pub fn regroup(&self, w: &Word) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        let mut run: Vec<Letter> = Vec::new();
        for l in self.source.normalize(w).0 {
            if l.factor == 0 {
                if !run.is_empty() {
                    let inner = Word::from_letters(std::mem::take(&mut run));
                    out.push(Letter::new(1, GroupElem::Word(inner)));
                }
                out.push(l);
            } else {
                run.push(Letter::new(l.factor - 1, l.elem));
            }
        }
        if !run.is_empty() {
            out.push(Letter::new(1, GroupElem::Word(Word::from_letters(run))));
        }
        let out = Word::from_letters(out);
        debug_assert_eq!(self.target.normalize(&out), out);
        out
    }

    /// Image of a source word over the two-factor target.
    pub fn embed_word(&self, w: &Word) -> Word {
        self.regroup(&self.source_image(w))
    }

    /// Graph of the image subgroup: the fold of the wedge of the embedded
    /// generators over the target. The result is based; its core has the
    /// reduced rank and the maximal degree of the input core.
    pub fn embed_graph(&self, g: &AGraph) -> Result<AGraph, EmbedError> {
        let images: Vec<Word> =
            g.subgroup_generators().iter().map(|u| self.embed_word(u)).collect();
        let folded = AGraph::wedge(&self.target, &images).fold()?;
        debug_assert_eq!(folded.reduced_rank(), g.reduced_rank());
        debug_assert_eq!(folded.core().max_degree(), g.core().max_degree());
        Ok(folded)
    }
}

/// The set of secondary types that occur in a graph.
pub fn types_present(g: &AGraph) -> BTreeSet<usize> {
    (0..g.secondary_count()).map(|s| g.secondary_type(s)).collect()
}

/// Result of the combined pipeline: the graph the coefficient was computed
/// over (the input itself, or its embedded image), the degree bound used,
/// and the full computation.
pub struct PipelineOutput {
    pub embedding: Option<Embedding>,
    pub image: AGraph,
    pub d: usize,
    pub computation: SigmaComputation,
}

/// Computes a coefficient for a subgroup of an arbitrary finite-factor
/// product: two-factor inputs run directly, inputs with more factors are
/// embedded first. The default degree bound is the larger of the factor
/// count and the largest factor order; at that bound the reported
/// coefficient bounds every intersection ratio of the source subgroup.
pub fn two_factor_pipeline(g: &AGraph, d: Option<usize>) -> Result<PipelineOutput, EmbedError> {
    let spec = g.spec().clone();
    let d = d.unwrap_or_else(|| spec.default_degree_bound());
    if spec.num_factors() == 2 {
        let computation = compute_sigma(g, d)?;
        return Ok(PipelineOutput { embedding: None, image: g.clone(), d, computation });
    }
    let emb = Embedding::new(&spec)?;
    let image = emb.embed_graph(g)?;
    let computation = compute_sigma(&image, d)?;
    Ok(PipelineOutput { embedding: Some(emb), image, d, computation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rat;
    use crate::testkit::{cyclic_product, full_graph};

    fn c222() -> FreeProduct {
        cyclic_product(&[2, 2, 2])
    }

    fn word(letters: &[(usize, u32)]) -> Word {
        Word::from_letters(letters.iter().map(|&(f, e)| Letter::idx(f, e)).collect())
    }

    #[test]
    fn conjugators_cyclically_permute_the_chosen_product() {
        let e = Embedding::new(&c222()).unwrap();
        assert_eq!(e.conjugator(0), &word(&[(1, 1), (2, 1), (0, 1)]));
        assert_eq!(e.conjugator(1), &word(&[(2, 1), (0, 1), (1, 1)]));
        assert_eq!(e.conjugator(2), &word(&[(0, 1), (1, 1), (2, 1)]));
        for i in 0..3 {
            assert_eq!(e.chosen()[i], GroupElem::Idx(1));
        }
    }

    #[test]
    fn letter_images_are_conjugates() {
        let spec = cyclic_product(&[2, 3, 4]);
        let e = Embedding::new(&spec).unwrap();
        for (f, x) in [(0usize, 1u32), (1, 2), (2, 3)] {
            let a = word(&[(f, x)]);
            assert_eq!(e.source_image(&a), spec.conjugate(&a, e.conjugator(f)));
        }
    }

    #[test]
    fn source_images_preserve_cyclic_reducedness() {
        let e = Embedding::new(&c222()).unwrap();
        let cyclically_reduced = [
            word(&[(0, 1), (1, 1), (0, 1), (1, 1)]),
            word(&[(0, 1), (1, 1), (0, 1), (2, 1)]),
            word(&[(1, 1), (2, 1)]),
        ];
        for u in &cyclically_reduced {
            assert!(u.is_cyclically_reduced());
            assert!(e.source_image(u).is_cyclically_reduced());
        }
        let not_reduced = [
            word(&[(0, 1), (1, 1), (0, 1)]),
            word(&[(1, 1), (0, 1), (2, 1), (0, 1), (1, 1)]),
        ];
        for u in &not_reduced {
            assert!(!u.is_cyclically_reduced());
            assert!(!e.source_image(u).is_cyclically_reduced());
        }
    }

    #[test]
    fn embedding_is_homomorphic_and_injective_on_short_words() {
        let spec = cyclic_product(&[2, 2, 3]);
        let e = Embedding::new(&spec).unwrap();
        let words = spec.elements(40).unwrap();
        let mut images = BTreeSet::new();
        for u in &words {
            let img = e.embed_word(u);
            assert_eq!(e.target().normalize(&img), img);
            e.target().validate_word(&img).unwrap();
            images.insert(img);
        }
        assert_eq!(images.len(), words.len());
        for u in words.iter().take(8) {
            for v in words.iter().take(8) {
                let uv = spec.mul(u, v);
                assert_eq!(
                    e.embed_word(&uv),
                    e.target().mul(&e.embed_word(u), &e.embed_word(v))
                );
            }
        }
    }

    #[test]
    fn regrouping_splits_words_into_two_factor_syllables() {
        let spec = c222();
        let e = Embedding::new(&spec).unwrap();
        let u = word(&[(1, 1), (2, 1), (0, 1), (2, 1)]);
        let img = e.regroup(&u);
        assert_eq!(img.len(), 3);
        assert_eq!(img.0[0].factor, 1);
        assert_eq!(img.0[1].factor, 0);
        assert_eq!(img.0[2].factor, 1);
        let GroupElem::Word(inner) = &img.0[0].elem else { panic!("inner word") };
        assert_eq!(inner, &word(&[(0, 1), (1, 1)]));
        assert!(e.regroup(&Word::identity()).is_empty());
    }

    #[test]
    fn graph_images_preserve_rank_degree_and_membership() {
        let spec = c222();
        let a = |f: usize| Letter::idx(f, 1);
        let gens = vec![
            Word::from_letters(vec![a(0), a(1), a(0), a(1)]),
            Word::from_letters(vec![a(0), a(2), a(0), a(2)]),
        ];
        let g = AGraph::wedge(&spec, &gens).fold().unwrap();
        let e = Embedding::new(&spec).unwrap();
        let image = e.embed_graph(&g).unwrap();
        assert_eq!(image.reduced_rank(), g.reduced_rank());
        assert_eq!(image.core().max_degree(), g.core().max_degree());
        assert_eq!(types_present(&image.core()), BTreeSet::from([0, 1]));
        let inside = [
            gens[0].clone(),
            gens[1].clone(),
            spec.mul(&gens[0], &gens[1]),
            spec.mul(&spec.inv(&gens[1]), &gens[0]),
        ];
        let outside = [
            word(&[(0, 1)]),
            word(&[(0, 1), (1, 1)]),
            word(&[(1, 1), (2, 1)]),
            word(&[(0, 1), (1, 1), (0, 1), (2, 1)]),
        ];
        for w in &inside {
            assert!(g.contains(w));
            assert!(image.contains(&e.embed_word(w)));
        }
        for w in &outside {
            assert!(!g.contains(w));
            assert!(!image.contains(&e.embed_word(w)));
        }
    }

    #[test]
    fn pipeline_embeds_three_factor_inputs() {
        let spec = c222();
        let a = |f: usize| Letter::idx(f, 1);
        let gens = vec![
            Word::from_letters(vec![a(0), a(1)]),
            Word::from_letters(vec![a(0), a(2)]),
        ];
        let g = AGraph::wedge(&spec, &gens).fold().unwrap();
        // The inequality system is a two-factor theory; many-factor inputs
        // must go through the embedding.
        assert!(matches!(compute_sigma(&g, 3), Err(SliError::NotTwoFactor(3))));
        let out = two_factor_pipeline(&g, None).unwrap();
        assert_eq!(out.d, 3);
        assert!(out.embedding.is_some());
        assert_eq!(out.image.reduced_rank(), 1);
        // The image meets itself with ratio one, and no factor of the
        // source has a finite subgroup of order above two, so the
        // coefficient lands between one and two.
        assert!(out.computation.sigma >= rat(1));
        assert!(out.computation.sigma <= spec.sigma_upper_bound());
        assert_eq!(spec.sigma_upper_bound(), rat(2));
    }

    #[test]
    fn pipeline_on_two_factors_matches_the_direct_computation() {
        let y = full_graph(&cyclic_product(&[3, 3]), 3);
        let out = two_factor_pipeline(&y, Some(3)).unwrap();
        assert!(out.embedding.is_none());
        assert_eq!(out.d, 3);
        assert_eq!(out.computation.sigma, rat(3));
    }

    #[test]
    fn embedding_rejects_two_factor_products() {
        let two = cyclic_product(&[2, 2]);
        assert!(matches!(Embedding::new(&two), Err(EmbedError::TooFewFactors(2))));
    }
}

