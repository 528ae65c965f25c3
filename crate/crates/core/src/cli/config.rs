//! Run configuration: JSON schema, validation and construction of the model.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dynamics::{Configuration, IntegratorParams};
use crate::graph::{Graph, VertexPartition};
use crate::interaction::{InteractionFunction, InteractionMap, LennardJones, TabulatedFunction, DEFAULT_ROOT_MARGIN};

pub const CONFIG_VERSION: u64 = 1;

/// Paths that must be present, checked before typed parsing so each gets its
/// own error.
const REQUIRED: &[&[&str]] = &[
    &["version"],
    &["graph"],
    &["graph", "vertices"],
    &["graph", "edges"],
    &["interaction"],
    &["initial"],
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON: {0}")]
    Json(#[source] serde_json::Error),

    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u64),

    #[error("schema error: {0}")]
    Schema(#[source] serde_json::Error),

    #[error("unknown vertex label `{0}`")]
    UnknownVertex(String),

    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),

    #[error("edge ({0}, {1}) has no interaction and no default is given")]
    MissingInteraction(String, String),

    #[error("edge ({0}, {1}) listed in interaction overrides is not a graph edge")]
    OverrideNotAnEdge(String, String),

    #[error("{count} initial positions for {vertices} vertices")]
    PositionCount { count: usize, vertices: usize },

    #[error("initial positions must have dimension {0}")]
    PositionDimension(usize),

    #[error("edge ({a}, {b}): {condition} violated: {detail}")]
    InvalidLaw {
        a: String,
        b: String,
        condition: String,
        detail: String,
    },

    #[error(transparent)]
    Model(#[from] crate::error::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u64,
    pub graph: GraphSpec,
    pub interaction: InteractionSpec,
    pub initial: InitialSpec,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub integrator: IntegratorParams,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_dimension() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSpec {
    #[serde(default)]
    pub default: Option<LawSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeLawSpec>,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_ROOT_MARGIN
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeLawSpec {
    pub edge: (String, String),
    pub law: LawSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    LennardJones {
        sigma1: f64,
        sigma2: f64,
        n1: u32,
        n2: u32,
    },
    /// `(d, g(d))` samples; `alpha_plus` certifies positivity beyond it.
    Tabulated {
        samples: Vec<(f64, f64)>,
        alpha_plus: f64,
    },
}

impl LawSpec {
    pub fn build(&self) -> crate::error::Result<InteractionFunction> {
        match self {
            LawSpec::LennardJones { sigma1, sigma2, n1, n2 } => {
                LennardJones::new(*sigma1, *sigma2, *n1, *n2).map(InteractionFunction::LennardJones)
            }
            LawSpec::Tabulated { samples, alpha_plus } => {
                TabulatedFunction::from_samples(samples, *alpha_plus).map(InteractionFunction::Tabulated)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Positions(Vec<Vec<f64>>),
    /// Uniform placement drawn from the run seed.
    Random {},
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    /// Dilute-partition threshold for snapshot `i` is `base (i + 1)`;
    /// defaults to `α₊`.
    pub dilute_base: Option<f64>,
    /// Partition to track, as lists of vertex labels; defaults to the
    /// diluting-subsequence witness.
    pub partition: Option<Vec<Vec<String>>>,
    /// `(l0, l1)` pairs for self-clustering and growth checks.
    pub clustering: Vec<(f64, f64)>,
    /// Largest `k` reported in `Π` tables.
    pub pi_depth: Option<usize>,
    pub mu: Option<MuSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuSpec {
    pub distances: Vec<f64>,
    pub budget: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(ConfigError::Json)?;
        for path in REQUIRED {
            let mut node = &value;
            for key in path.iter() {
                match node.get(key) {
                    Some(v) => node = v,
                    None => return Err(ConfigError::MissingField(path.join("."))),
                }
            }
        }
        if let Some(v) = value.get("version").and_then(Value::as_u64) {
            if v != CONFIG_VERSION {
                return Err(ConfigError::Version(v));
            }
        }
        serde_json::from_value(value).map_err(ConfigError::Schema)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// A configuration turned into model objects.
#[derive(Clone, Debug)]
pub struct Model {
    pub labels: Vec<String>,
    pub graph: Graph,
    pub laws: InteractionMap,
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, ConfigError> {
        let labels = cfg.graph.vertices.clone();
        let index = label_index(&labels)?;
        let edges = cfg
            .graph
            .edges
            .iter()
            .map(|(a, b)| Ok((lookup(&index, a)?, lookup(&index, b)?)))
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let graph = Graph::new(labels.len(), edges)?;
        if !graph.is_connected() {
            return Err(crate::error::Error::Disconnected.into());
        }
        let laws = edge_laws(cfg, &graph, &index, &labels)?;
        for (k, law) in laws.iter().enumerate() {
            let (a, b) = graph.edges()[k];
            if let Some(fail) = law.validate().failures().next() {
                return Err(ConfigError::InvalidLaw {
                    a: labels[a].clone(),
                    b: labels[b].clone(),
                    condition: fail.condition.to_string(),
                    detail: fail.detail.clone(),
                });
            }
        }
        let laws = InteractionMap::new(&graph, laws, cfg.interaction.margin)?;
        Ok(Self { labels, graph, laws })
    }

    /// The initial configuration; random placement uses `seed`.
    pub fn initial(&self, cfg: &RunConfig, seed: u64) -> Result<Configuration, ConfigError> {
        match &cfg.initial {
            InitialSpec::Positions(points) => {
                if points.len() != self.labels.len() {
                    return Err(ConfigError::PositionCount {
                        count: points.len(),
                        vertices: self.labels.len(),
                    });
                }
                if points.iter().any(|p| p.len() != cfg.dimension) {
                    return Err(ConfigError::PositionDimension(cfg.dimension));
                }
                Ok(Configuration::from_points(points)?)
            }
            InitialSpec::Random {} => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(Configuration::random(
                    &self.graph,
                    cfg.dimension,
                    self.laws.alpha_minus(),
                    self.laws.alpha_plus(),
                    &mut rng,
                )?)
            }
        }
    }

    pub fn partition(&self, blocks: &[Vec<String>]) -> Result<VertexPartition, ConfigError> {
        let index = label_index(&self.labels)?;
        let blocks = blocks
            .iter()
            .map(|b| b.iter().map(|l| lookup(&index, l)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VertexPartition::new(blocks)?)
    }
}

fn label_index(labels: &[String]) -> Result<HashMap<&str, usize>, ConfigError> {
    let mut index = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.as_str(), i).is_some() {
            return Err(ConfigError::DuplicateVertex(l.clone()));
        }
    }
    Ok(index)
}

fn lookup(index: &HashMap<&str, usize>, label: &str) -> Result<usize, ConfigError> {
    index
        .get(label)
        .copied()
        .ok_or_else(|| ConfigError::UnknownVertex(label.to_string()))
}

/// Per-edge validation results, in graph edge order.
pub fn validation_reports(
    cfg: &RunConfig,
) -> Result<Vec<(String, String, crate::interaction::ValidationReport)>, ConfigError> {
    let labels = cfg.graph.vertices.clone();
    let index = label_index(&labels)?;
    let edges = cfg
        .graph
        .edges
        .iter()
        .map(|(a, b)| Ok((lookup(&index, a)?, lookup(&index, b)?)))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let graph = Graph::new(labels.len(), edges)?;
    let laws = edge_laws(cfg, &graph, &index, &labels)?;
    Ok(graph
        .edges()
        .iter()
        .zip(laws)
        .map(|(&(a, b), law)| (labels[a].clone(), labels[b].clone(), law.validate()))
        .collect())
}

fn edge_laws(
    cfg: &RunConfig,
    graph: &Graph,
    index: &HashMap<&str, usize>,
    labels: &[String],
) -> Result<Vec<InteractionFunction>, ConfigError> {
    let default = cfg.interaction.default.as_ref().map(LawSpec::build).transpose()?;
    let mut laws: Vec<Option<InteractionFunction>> = vec![default; graph.edge_count()];
    for o in &cfg.interaction.edges {
        let (a, b) = (lookup(index, &o.edge.0)?, lookup(index, &o.edge.1)?);
        let k = graph
            .edge_index(a, b)
            .ok_or_else(|| ConfigError::OverrideNotAnEdge(o.edge.0.clone(), o.edge.1.clone()))?;
        laws[k] = Some(o.law.build()?);
    }
    laws.into_iter()
        .enumerate()
        .map(|(k, law)| {
            let (a, b) = graph.edges()[k];
            law.ok_or_else(|| ConfigError::MissingInteraction(labels[a].clone(), labels[b].clone()))
        })
        .collect()
}
