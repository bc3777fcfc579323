//! The subcommands. Each one builds a serializable report, writes it as
//! pretty JSON to standard output (or `--output`), and prints a short human
//! summary to standard error, so reports stay machine-readable and
//! byte-identical across runs.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use fpsigma::embed::{two_factor_pipeline, Embedding};
use fpsigma::fiber::{fiber_core, intersection_rank, trim_to_partner};
use fpsigma::groups::QStar;
use fpsigma::lp::rat;
use fpsigma::oracle::enumerate_bd_graphs;
use fpsigma::witness::{extremal_witness, verify_witness};
use fpsigma::{AGraph, Rational};

use crate::input::{
    embed_error, load_input, read_json, witness_error, CliError, LoadedInput,
};
use crate::report::{
    rational, BundleIn, CandidateOut, CertificateOut, CheckOut, ChosenOut, ComponentOut,
    IntersectOut, OracleOut, ProvenanceOut, ReportOut, SigmaOut, SystemOut, VerifyOut, WitnessOut,
};

/// Write a report as pretty JSON to the given file, or standard output.
fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reject inputs whose factor count disagrees with the `--embed` flag.
fn gate_embed(loaded: &LoadedInput, embed: bool) -> Result<(), CliError> {
    let m = loaded.spec.num_factors();
    if embed && m == 2 {
        return Err(CliError::Usage(
            "--embed needs at least three factors; the input already has two".to_string(),
        ));
    }
    if !embed && m > 2 {
        return Err(CliError::Usage(format!(
            "the input has {m} factors; pass --embed to reduce to a two-factor product"
        )));
    }
    Ok(())
}

fn chosen_out(e: &Embedding) -> Vec<ChosenOut> {
    e.chosen()
        .iter()
        .enumerate()
        .map(|(i, g)| ChosenOut { factor: i + 1, element: g.clone() })
        .collect()
}

pub fn cmd_check(
    input: &Path,
    graph_out: Option<&Path>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let loaded = match load_input(input) {
        Ok(l) => l,
        Err(CliError::NotFactorFree(msg)) => {
            let out = CheckOut {
                factor_free: false,
                noncyclic: None,
                reduced_rank: None,
                reason: Some(msg.clone()),
                graph: None,
            };
            write_json(output, &out)?;
            return Err(CliError::NotFactorFree(msg));
        }
        Err(e) => return Err(e),
    };
    let brr = loaded.graph.reduced_rank();
    let raw = loaded.graph.to_raw();
    if let Some(p) = graph_out {
        write_json(Some(p), &raw)?;
    }
    let out = CheckOut {
        factor_free: true,
        noncyclic: Some(brr > 0),
        reduced_rank: Some(brr),
        reason: None,
        graph: Some(raw),
    };
    write_json(output, &out)?;
    eprintln!("factor-free: yes");
    eprintln!("noncyclic: {} (reduced rank {brr})", if brr > 0 { "yes" } else { "no" });
    Ok(())
}

pub fn cmd_sigma(
    input: &Path,
    d: Option<usize>,
    embed: bool,
    emit_lp: Option<&Path>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let loaded = load_input(input)?;
    gate_embed(&loaded, embed)?;
    let pipe = two_factor_pipeline(&loaded.graph, d).map_err(embed_error)?;
    if let Some(p) = emit_lp {
        fs::write(p, pipe.computation.system.lp_text())
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
    }
    let spec = pipe.image.spec();
    let out = SigmaOut {
        d: pipe.d,
        sigma: rational(&pipe.computation.sigma),
        upper_bound: rational(&spec.sigma_upper_bound()),
        q_star: match spec.q_star() {
            QStar::Finite(q) => Some(q),
            QStar::Infinite => None,
        },
        reduced_rank: pipe.computation.system.y1.reduced_rank(),
        system: SystemOut {
            inequalities: pipe.computation.system.inequalities.len(),
            variables: pipe.computation.system.num_vars(),
        },
        primal: CertificateOut::new(&pipe.computation.primal),
        dual: CertificateOut::new(&pipe.computation.dual),
        embedded: pipe.embedding.is_some(),
        chosen: pipe.embedding.as_ref().map(chosen_out),
        image: pipe.embedding.as_ref().map(|_| pipe.image.to_raw()),
    };
    write_json(output, &out)?;
    eprintln!(
        "sigma_{} = {} (reduced rank {}, {} inequalities, {} variables)",
        out.d, out.sigma, out.reduced_rank, out.system.inequalities, out.system.variables
    );
    eprintln!("upper bound 2q*/(q*-2) = {}", out.upper_bound);
    if out.embedded {
        eprintln!("computed over the embedded two-factor image");
    }
    Ok(())
}

pub fn cmd_witness(
    input: &Path,
    d: Option<usize>,
    embed: bool,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let loaded = load_input(input)?;
    gate_embed(&loaded, embed)?;
    let d = d.unwrap_or_else(|| loaded.spec.default_degree_bound());
    let (graph, chosen) = if embed {
        let emb = Embedding::new(&loaded.spec).map_err(embed_error)?;
        let image = emb.embed_graph(&loaded.graph).map_err(embed_error)?;
        (image, Some(chosen_out(&emb)))
    } else {
        (loaded.graph, None)
    };
    let solved = extremal_witness(&graph, d).map_err(witness_error)?;
    let bundle = WitnessOut {
        d,
        sigma: rational(&solved.computation.sigma),
        product: graph.spec().clone(),
        y1: solved.computation.system.y1.to_raw(),
        witness: solved.witness.to_raw(),
        report: ReportOut::new(&solved.report),
        provenance: ProvenanceOut {
            dual_objective: rational(&solved.computation.dual.value),
            basis: solved.computation.dual.basis.clone(),
            eta: solved.combination.eta.iter().map(|e| e.to_string()).collect(),
            c: solved.combination.c.to_string(),
        },
        chosen,
    };
    write_json(output, &bundle)?;
    eprintln!("sigma_{d} = {}", bundle.sigma);
    eprintln!(
        "witness: {} primary, {} secondary, {} edges, reduced rank {}",
        solved.witness.primary_count(),
        solved.witness.secondary_count(),
        solved.witness.edges().len(),
        bundle.report.brr_y2
    );
    eprintln!("checks: connected, partner, size bound, rank equality all pass");
    Ok(())
}

pub fn cmd_intersect(
    input1: &Path,
    input2: &Path,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let a = load_input(input1)?;
    let b = load_input(input2)?;
    if a.spec != b.spec {
        return Err(CliError::Usage(
            "the two inputs live over different free products".to_string(),
        ));
    }
    let c1 = a.graph.core();
    let c2 = b.graph.core();
    let fiber = fiber_core(&c1, &c2);
    let components = component_table(&fiber.graph);
    let out = IntersectOut {
        brr_1: c1.reduced_rank(),
        brr_2: c2.reduced_rank(),
        intersection_rank: fiber.graph.reduced_rank(),
        components,
    };
    write_json(output, &out)?;
    eprintln!(
        "reduced ranks {} and {}, intersection rank {}",
        out.brr_1, out.brr_2, out.intersection_rank
    );
    for (i, c) in out.components.iter().enumerate() {
        eprintln!(
            "component {i}: {} primary, {} secondary, {} edges, reduced rank {}",
            c.primary, c.secondary, c.edges, c.reduced_rank
        );
    }
    Ok(())
}

/// Per-component sizes and reduced rank of a core graph; on a core every
/// component has at least as many edges as vertices.
fn component_table(g: &AGraph) -> Vec<ComponentOut> {
    let (pc, sc, n) = g.component_ids();
    let mut rows: Vec<ComponentOut> = (0..n)
        .map(|_| ComponentOut { primary: 0, secondary: 0, edges: 0, reduced_rank: 0 })
        .collect();
    for &c in &pc {
        rows[c].primary += 1;
    }
    for &c in &sc {
        rows[c].secondary += 1;
    }
    for e in g.edges() {
        rows[pc[e.primary]].edges += 1;
    }
    for r in &mut rows {
        r.reduced_rank = (r.edges - r.primary - r.secondary) as u64;
    }
    rows
}

pub fn cmd_oracle(
    input: &Path,
    d: Option<usize>,
    max_secondary: usize,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let loaded = load_input(input)?;
    let core = loaded.graph.core();
    let brr1 = core.reduced_rank();
    if brr1 == 0 {
        return Err(CliError::Usage(
            "the brute-force table needs a noncyclic subgroup".to_string(),
        ));
    }
    let d = d.unwrap_or_else(|| loaded.spec.default_degree_bound());
    let stream = enumerate_bd_graphs(core.spec(), d, max_secondary);
    let mut scored: Vec<(Rational, CandidateOut)> = Vec::new();
    let mut best: Option<(Rational, fpsigma::agraph::CanonicalKey, AGraph)> = None;
    for y2 in stream {
        let row_sizes = (y2.primary_count(), y2.secondary_count(), y2.edges().len());
        let row_brr = y2.reduced_rank();
        let ratio = match trim_to_partner(&core, y2) {
            Ok(partner) => {
                let r = rat(intersection_rank(&core, &partner) as i64)
                    / (rat(brr1 as i64) * rat(partner.reduced_rank() as i64));
                let key = partner.canonical_key();
                // Same maximum and tie rule as the library's single-best scan.
                let better = match &best {
                    Some((br, bk, _)) => r > *br || (r == *br && key < *bk),
                    None => true,
                };
                if better {
                    best = Some((r.clone(), key, partner));
                }
                r
            }
            Err(_) => rat(0),
        };
        scored.push((
            ratio.clone(),
            CandidateOut {
                ratio: rational(&ratio),
                primary: row_sizes.0,
                secondary: row_sizes.1,
                edges: row_sizes.2,
                reduced_rank: row_brr,
            },
        ));
    }
    // Stable sort: descending ratio, canonical stream order within ties.
    scored.sort_by(|a, b| b.0.cmp(&a.0));
    let out = OracleOut {
        d,
        max_secondary,
        reduced_rank: brr1,
        candidates: scored.into_iter().map(|(_, row)| row).collect(),
        best_ratio: best.as_ref().map(|(r, _, _)| rational(r)),
        best_partner: best.as_ref().map(|(_, _, g)| g.to_raw()),
    };
    write_json(output, &out)?;
    eprintln!("ratio  primary  secondary  edges  brr");
    for c in &out.candidates {
        eprintln!(
            "{}  {}  {}  {}  {}",
            c.ratio, c.primary, c.secondary, c.edges, c.reduced_rank
        );
    }
    match &out.best_ratio {
        Some(r) => eprintln!("best lower bound: {r}"),
        None => eprintln!("no partner graph under the cap"),
    }
    Ok(())
}

pub fn cmd_verify(bundle: &Path, d: Option<usize>, output: Option<&Path>) -> Result<(), CliError> {
    let b: BundleIn = read_json(bundle)?;
    let y1 = AGraph::from_raw(b.product.clone(), &b.y1)
        .map_err(|e| CliError::Usage(format!("{}: y1: {e}", bundle.display())))?;
    let y2 = AGraph::from_raw(b.product, &b.witness)
        .map_err(|e| CliError::Usage(format!("{}: witness: {e}", bundle.display())))?;
    let sigma = Rational::from_str(&b.sigma)
        .map_err(|e| CliError::Usage(format!("{}: sigma: {e}", bundle.display())))?;
    let d = d.unwrap_or(b.d);
    let report = ReportOut::new(&verify_witness(&y1, &y2, &sigma, d));
    let ok = report.all_ok();
    let out = VerifyOut { ok, report };
    write_json(output, &out)?;
    eprintln!(
        "connected: {}, partner: {}, size bound: {}, rank equality: {}",
        out.report.connected, out.report.partner_ok, out.report.size_bound_ok, out.report.equality_ok
    );
    if ok {
        eprintln!("witness verifies");
        Ok(())
    } else {
        Err(CliError::Contradiction(
            "the witness bundle fails re-verification".to_string(),
        ))
    }
}
