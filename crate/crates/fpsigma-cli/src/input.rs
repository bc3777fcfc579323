//! Input loading: the JSON input document, its translation to a folded
//! graph, and the classification of library errors into exit codes.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use fpsigma::agraph::{GraphError, RawGraph};
use fpsigma::embed::EmbedError;
use fpsigma::sli::SliError;
use fpsigma::witness::WitnessError;
use fpsigma::{AGraph, FactorGroup, FreeProduct, Word};

/// A classified failure. `Usage` exits 1, `NotFactorFree` exits 2, and
/// `Contradiction` exits 3; a contradiction means a computed certificate
/// failed its own recheck, which no input should be able to cause.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotFactorFree(String),
    Contradiction(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NotFactorFree(_) => 2,
            CliError::Contradiction(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::NotFactorFree(m) | CliError::Contradiction(m) => m,
        }
    }
}

/// The input document: the ambient free product plus either subgroup
/// generators (words over the factors, 1-based) or an explicit graph.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    factors: Vec<FactorGroup>,
    #[serde(default)]
    generators: Option<Vec<Word>>,
    #[serde(default)]
    graph: Option<RawGraph>,
}

/// A parsed input: the product and the folded (irreducible) graph of the
/// subgroup it describes.
pub struct LoadedInput {
    pub spec: FreeProduct,
    pub graph: AGraph,
}

/// Read and deserialize one JSON file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Load an input document and fold its graph. Folding is where a subgroup
/// that is not factor-free reveals itself.
pub fn load_input(path: &Path) -> Result<LoadedInput, CliError> {
    let input: InputFile = read_json(path)?;
    let spec = FreeProduct::new(input.factors)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let unfolded = match (input.generators, input.graph) {
        (Some(gens), None) => {
            for w in &gens {
                spec.validate_word(w)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            }
            AGraph::wedge(&spec, &gens)
        }
        (None, Some(raw)) => AGraph::from_raw(spec.clone(), &raw)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(format!(
                "{}: give either generators or a graph, not both",
                path.display()
            )))
        }
        (None, None) => {
            return Err(CliError::Usage(format!(
                "{}: the input needs generators or a graph",
                path.display()
            )))
        }
    };
    let graph = unfolded.fold().map_err(load_graph_error)?;
    Ok(LoadedInput { spec, graph })
}

/// Graph errors at load time: the fold deciding against factor-freeness is
/// a verdict, everything else is a malformed input.
pub fn load_graph_error(e: GraphError) -> CliError {
    match e {
        GraphError::NotFactorFree { .. } => CliError::NotFactorFree(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

/// Inequality-system errors after a successful load: solver contradictions
/// are bug reports, everything else rejects the input.
pub fn sli_error(e: SliError) -> CliError {
    match e {
        SliError::Solver(_) => CliError::Contradiction(e.to_string()),
        SliError::NotTwoFactor(_) => {
            CliError::Usage(format!("{e}; pass --embed to reduce to a two-factor product"))
        }
        other => CliError::Usage(other.to_string()),
    }
}

/// Pipeline errors: graph trouble after the input already folded cleanly
/// means the embedding produced a bad image, which is a bug report.
pub fn embed_error(e: EmbedError) -> CliError {
    match e {
        EmbedError::TooFewFactors(_) => CliError::Usage(e.to_string()),
        EmbedError::Graph(g) => CliError::Contradiction(g.to_string()),
        EmbedError::Sli(s) => sli_error(s),
        EmbedError::Group(g) => CliError::Usage(g.to_string()),
    }
}

/// Witness-stage errors: everything downstream of a solved system is a
/// certificate recheck, so any failure is a contradiction.
pub fn witness_error(e: WitnessError) -> CliError {
    match e {
        WitnessError::NotTwoFactor => {
            CliError::Usage(format!("{e}; pass --embed to reduce to a two-factor product"))
        }
        WitnessError::Sli(s) => sli_error(s),
        other => CliError::Contradiction(other.to_string()),
    }
}
