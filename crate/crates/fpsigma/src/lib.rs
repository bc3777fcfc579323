//! Exact computation of intersection-rank coefficients for finitely generated
//! factor-free subgroups of free products of groups.
//!
//! Given a free product `F = G_1 * ... * G_m` of finite groups and a finitely
//! generated factor-free noncyclic subgroup `H_1 <= F`, this crate computes the
//! exact rational coefficient
//!
//! ```text
//! sigma_d(H_1) = sup { rr(H_1, H_2) / (rr(H_1) rr(H_2)) }
//! ```
//!
//! where the supremum runs over factor-free subgroups `H_2` of bounded degree
//! `d`, `rr` is the reduced rank `max(rank - 1, 0)`, and `rr(H_1, H_2)` sums
//! reduced ranks over all essentially distinct conjugate intersections
//! `H_1 ∩ s H_2 s^-1`. The computation reduces to an exact rational linear
//! program over a finite inequality system derived from the subgroup graph of
//! `H_1`; the dual solution is rounded to an integer combination from which an
//! extremal witness subgroup `H_2*` attaining the supremum is built and then
//! verified independently.
//!
//! Modules follow the pipeline order:
//!
//! * [`groups`] - finite group tables, free products, words and their arithmetic;
//! * [`agraph`] - bipartite labeled subgroup graphs, folding, membership, rank;
//! * [`fiber`] - fiber products of subgroup graphs and conjugate intersections;
//! * [`sli`] - the system of linear inequalities attached to a subgroup graph;
//! * [`lp`] - exact rational simplex with primal/dual certificates;
//! * [`witness`] - extremal witness graphs from dual vertex solutions;
//! * [`embed`] - reduction of many-factor products to two-factor products;
//! * [`oracle`] - brute-force enumeration of candidate partner graphs.

pub mod agraph;
pub mod embed;
pub mod fiber;
pub mod groups;
pub mod lp;
pub mod oracle;
mod par;
pub mod sli;
pub mod testkit;
pub mod witness;

pub use agraph::AGraph;
pub use groups::{FactorGroup, FreeProduct, GroupElem, Letter, Word};
pub use lp::Rational;
