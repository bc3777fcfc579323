//! Serializable report bodies shared by the subcommands. Exact numbers are
//! carried as strings: rationals in lowest terms such as `3` or `10/3`, big
//! integers in decimal.

use serde::{Deserialize, Serialize};

use fpsigma::agraph::RawGraph;
use fpsigma::lp::BasicSolution;
use fpsigma::witness::WitnessReport;
use fpsigma::{FreeProduct, GroupElem, Rational};

/// Canonical string form of an exact rational.
pub fn rational(r: &Rational) -> String {
    r.to_string()
}

/// One LP certificate: objective value, vertex point, supporting index set.
#[derive(Serialize)]
pub struct CertificateOut {
    pub value: String,
    pub point: Vec<String>,
    pub basis: Vec<usize>,
}

impl CertificateOut {
    pub fn new(s: &BasicSolution) -> Self {
        CertificateOut {
            value: rational(&s.value),
            point: s.point.iter().map(rational).collect(),
            basis: s.basis.clone(),
        }
    }
}

/// Verdict of `check`: factor-freeness, cyclicity, and the folded graph.
#[derive(Serialize)]
pub struct CheckOut {
    pub factor_free: bool,
    pub noncyclic: Option<bool>,
    pub reduced_rank: Option<u64>,
    pub reason: Option<String>,
    pub graph: Option<RawGraph>,
}

/// One chosen element of the embedding, reported per source factor
/// (1-based, matching the word format).
#[derive(Serialize)]
pub struct ChosenOut {
    pub factor: usize,
    pub element: GroupElem,
}

/// Size of the solved inequality system.
#[derive(Serialize)]
pub struct SystemOut {
    pub inequalities: usize,
    pub variables: usize,
}

/// Report of `sigma`: the exact coefficient with both certificates.
#[derive(Serialize)]
pub struct SigmaOut {
    pub d: usize,
    pub sigma: String,
    pub upper_bound: String,
    pub q_star: Option<u64>,
    pub reduced_rank: u64,
    pub system: SystemOut,
    pub primal: CertificateOut,
    pub dual: CertificateOut,
    pub embedded: bool,
    pub chosen: Option<Vec<ChosenOut>>,
    pub image: Option<RawGraph>,
}

/// Recheck flags of a witness, mirrored from [`WitnessReport`].
#[derive(Serialize, Deserialize)]
pub struct ReportOut {
    pub sigma: String,
    pub brr_y1: u64,
    pub brr_y2: u64,
    pub brr_fiber: u64,
    pub connected: bool,
    pub partner_ok: bool,
    pub size_bound_ok: bool,
    pub equality_ok: bool,
}

impl ReportOut {
    pub fn new(r: &WitnessReport) -> Self {
        ReportOut {
            sigma: rational(&r.sigma),
            brr_y1: r.brr_y1,
            brr_y2: r.brr_y2,
            brr_fiber: r.brr_fiber,
            connected: r.connected,
            partner_ok: r.partner_ok,
            size_bound_ok: r.size_bound_ok,
            equality_ok: r.equality_ok,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.connected && self.partner_ok && self.size_bound_ok && self.equality_ok
    }
}

/// How the witness was obtained: the optimal dual objective and basis, and
/// the integer weights of the combination the graph was assembled from.
#[derive(Serialize)]
pub struct ProvenanceOut {
    pub dual_objective: String,
    pub basis: Vec<usize>,
    pub eta: Vec<String>,
    pub c: String,
}

/// Self-contained witness bundle: everything `verify` needs to recheck the
/// extremal identity from scratch.
#[derive(Serialize)]
pub struct WitnessOut {
    pub d: usize,
    pub sigma: String,
    pub product: FreeProduct,
    pub y1: RawGraph,
    pub witness: RawGraph,
    pub report: ReportOut,
    pub provenance: ProvenanceOut,
    pub chosen: Option<Vec<ChosenOut>>,
}

/// The parts of a bundle `verify` reads back.
#[derive(Deserialize)]
pub struct BundleIn {
    pub d: usize,
    pub sigma: String,
    pub product: FreeProduct,
    pub y1: RawGraph,
    pub witness: RawGraph,
}

/// Report of `verify`: the recomputed flags and their conjunction.
#[derive(Serialize)]
pub struct VerifyOut {
    pub ok: bool,
    pub report: ReportOut,
}

/// One connected component of a fiber core.
#[derive(Serialize)]
pub struct ComponentOut {
    pub primary: usize,
    pub secondary: usize,
    pub edges: usize,
    pub reduced_rank: u64,
}

/// Report of `intersect`: component table and total intersection rank.
#[derive(Serialize)]
pub struct IntersectOut {
    pub brr_1: u64,
    pub brr_2: u64,
    pub intersection_rank: u64,
    pub components: Vec<ComponentOut>,
}

/// One row of the brute-force table: an enumerated candidate and the ratio
/// its trimmed partner attains (0 when no partner can be extracted).
#[derive(Serialize)]
pub struct CandidateOut {
    pub ratio: String,
    pub primary: usize,
    pub secondary: usize,
    pub edges: usize,
    pub reduced_rank: u64,
}

/// Report of `oracle`: the full ratio table and the best partner found.
#[derive(Serialize)]
pub struct OracleOut {
    pub d: usize,
    pub max_secondary: usize,
    pub reduced_rank: u64,
    pub candidates: Vec<CandidateOut>,
    pub best_ratio: Option<String>,
    pub best_partner: Option<RawGraph>,
}
