//! Experiment configuration (TOML). Every table rejects unknown keys so a
//! typo fails validation instead of silently running a default.

use serde::{Deserialize, Serialize};

use nilseq_core::sum::SumMethod;
use nilseq_core::torus::Precision;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Classify,
    TorusSeq,
    NcSeq,
    Decompose,
    Correlate,
    Weyl,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Classify => "classify",
            Kind::TorusSeq => "torus-seq",
            Kind::NcSeq => "nc-seq",
            Kind::Decompose => "decompose",
            Kind::Correlate => "correlate",
            Kind::Weyl => "weyl",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Generator declarations, e.g. `"g1 = sqrt2 : 1.41421356237309504880"`.
    #[serde(default)]
    pub generators: Vec<String>,
    /// Declared products `"g1*g2 = g3"` (only needed for nonlinear phase
    /// arithmetic).
    #[serde(default)]
    pub products: Vec<String>,
    /// Worker threads; `0` lets rayon decide. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub sum_method: SumMethod,
    #[serde(default = "yes")]
    pub plotdata: bool,
    pub classify: Option<ClassifyConfig>,
    pub torus_seq: Option<TorusSeqConfig>,
    pub nc_seq: Option<NcSeqConfig>,
    pub decompose: Option<DecomposeConfig>,
    pub correlate: Option<CorrelateConfig>,
    pub weyl: Option<WeylConfig>,
}

fn yes() -> bool {
    true
}

fn default_range() -> [i64; 2] {
    [-20, 20]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(rename = "S")]
    pub s: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSeqConfig {
    #[serde(rename = "S")]
    pub s: Vec<Vec<i64>>,
    /// Base point, PhaseScalar literals.
    pub point: Vec<String>,
    /// Character `v ∈ Z^d`.
    pub character: Vec<i64>,
    #[serde(default = "default_range")]
    pub range: [i64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Word {
    pub exponents: Vec<i64>,
    #[serde(default = "zero_literal")]
    pub phase: String,
}

fn zero_literal() -> String {
    "0".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    pub site: Vec<i64>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NcSeqConfig {
    #[serde(rename = "S")]
    pub s: Vec<Vec<i64>>,
    /// Full skew matrix of PhaseScalar literals.
    pub theta: Vec<Vec<String>>,
    pub word: Word,
    pub state_vector: Vec<SiteEntry>,
    /// Rescale `state_vector` to unit norm before use.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default = "default_range")]
    pub range: [i64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub shift: Vec<i64>,
    #[serde(default = "zero_literal")]
    pub phase: String,
    pub form: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub id: u64,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub eigenphases: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorConfig {
    #[serde(default)]
    pub sites: Vec<SiteEntry>,
    #[serde(default)]
    pub atoms: Vec<AtomEntry>,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub dim: usize,
    pub generators: Vec<OperatorConfig>,
    /// Binomial-basis coefficients of each exponent polynomial.
    pub exponents: Vec<Vec<i64>>,
    pub u: VectorConfig,
    pub v: VectorConfig,
    #[serde(default = "default_range")]
    pub range: [i64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateConfig {
    /// Constructor expression, or `nc_seq` / `torus_seq` / `decompose` to
    /// use the sequence configured in that table.
    pub sequence: String,
    /// Sieve limit; defaults to the largest checkpoint.
    pub limit: Option<u64>,
    /// Defaults to powers of ten up to `limit`.
    pub checkpoints: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodCheckConfig {
    #[serde(default = "default_repeats")]
    pub repeats: u64,
    #[serde(default = "default_max_period")]
    pub max_period: u64,
}

fn default_repeats() -> u64 {
    5
}

fn default_max_period() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylConfig {
    /// Monomial coefficients `c_0, c_1, ...` of `p(n) = Σ c_j n^j`.
    pub coeffs: Vec<String>,
    pub harmonics: Vec<i64>,
    pub checkpoints: Vec<u64>,
    /// Exact periodicity check, run when every coefficient is rational.
    pub period_check: Option<PeriodCheckConfig>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
