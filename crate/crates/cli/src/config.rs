//! Experiment configuration: a TOML file (JSON equivalent accepted by
//! extension) with nested sections, schema-validated before any run.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use stosync::graph::Graph;

use crate::error::CliError;
use crate::graph_file;

/// Root experiment configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub graph: Option<GraphSection>,
    #[serde(default)]
    pub noise_layer: Option<NoiseLayerSection>,
    pub integration: IntegrationSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    pub outputs: OutputsSection,
    #[serde(default)]
    pub constants: Option<ConstantsSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// One of `fn_env`, `fn_full`, `ddm`, `linear_consensus`, `custom`.
    pub name: String,
    // FitzHugh-Nagumo parameters.
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub n_nodes: Option<usize>,
    /// Coupling strength (linear_consensus, custom).
    pub sigma: Option<f64>,
    // Custom-model drift: f(x) = A x + affine - cubic .* x^3 per node.
    pub node_dim: Option<usize>,
    pub drift_linear: Option<Vec<Vec<f64>>>,
    pub drift_affine: Option<Vec<f64>>,
    pub drift_cubic: Option<Vec<f64>>,
    #[serde(default)]
    pub diffusion: Option<DiffusionSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSection {
    /// One of `none`, `additive`, `shared_linear`, `mean_field`.
    pub kind: String,
    /// Per-component noise amplitude (`additive`).
    pub amplitude: Option<Vec<f64>>,
    /// Coefficient of `g(X) = coef * X` (`shared_linear`).
    pub coef: Option<f64>,
    /// Mean-field intensity (`mean_field`).
    pub gamma: Option<f64>,
    /// Components the mean-field noise acts on (`mean_field`, default all).
    pub components: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub nodes: Option<usize>,
    pub edges: Option<Vec<(usize, usize)>>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseLayerSection {
    pub nodes: Option<usize>,
    pub edges: Option<Vec<(usize, usize)>>,
    pub file: Option<PathBuf>,
    /// Layer gain for simulate/check; `design` computes its own.
    pub sigma_star: Option<f64>,
    /// Safety factor for `design` (default 1.1).
    pub safety: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub t_end: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    pub x0: Option<Vec<f64>>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_n_seeds() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    #[serde(default)]
    pub component: usize,
    /// Fraction of the horizon to discard as transient (default 0.3).
    #[serde(default = "default_transient_cut")]
    pub transient_cut: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection { component: 0, transient_cut: default_transient_cut() }
    }
}

fn default_transient_cut() -> f64 {
    0.3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of `gamma`, `sigma`, `sigma_star`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub plot: bool,
}

fn default_true() -> bool {
    true
}

/// Pinned certificate constants; anything set here overrides the model's
/// own values with `user_supplied` provenance.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub k_f: Option<f64>,
    pub k_g: Option<f64>,
    pub k_g_bar: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda2: Option<f64>,
    pub sigma_star: Option<f64>,
    pub lambda2_star: Option<f64>,
    pub lambda_n_star: Option<f64>,
}

impl ExperimentConfig {
    /// Load and validate a configuration file. `.json` files are parsed
    /// as JSON, everything else as TOML.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: ExperimentConfig =
            if path.extension().and_then(|s| s.to_str()) == Some("json") {
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("config parse error: {e}")))?
            } else {
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("config parse error: {e}")))?
            };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, msg: &str| Err(CliError::Config(format!("{name}: {msg}")));

        if !(self.integration.dt > 0.0) || !self.integration.dt.is_finite() {
            return field("integration.dt", "must be > 0 and finite");
        }
        if !(self.integration.t_end > self.integration.t0) {
            return field("integration.t_end", "must be greater than integration.t0");
        }
        if self.integration.n_seeds == 0 {
            return field("integration.n_seeds", "must be >= 1");
        }
        if !(0.0..1.0).contains(&self.metrics.transient_cut) {
            return field("metrics.transient_cut", "must be a fraction in [0, 1)");
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return field("sweep.values", "must not be empty");
            }
            if !matches!(sweep.parameter.as_str(), "gamma" | "sigma" | "sigma_star") {
                return field("sweep.parameter", "must be one of gamma, sigma, sigma_star");
            }
        }
        if let Some(layer) = &self.noise_layer {
            if let Some(s) = layer.sigma_star {
                if !(s >= 0.0) || !s.is_finite() {
                    return field("noise_layer.sigma_star", "must be >= 0");
                }
            }
            if let Some(s) = layer.safety {
                if !(s >= 1.0) || !s.is_finite() {
                    return field("noise_layer.safety", "must be >= 1");
                }
            }
        }
        match self.model.name.as_str() {
            "fn_env" | "fn_full" => {
                if self.graph.is_some() {
                    return field(
                        "graph",
                        "fn_env/fn_full have no communication graph; remove this section",
                    );
                }
                if self.model.n_nodes.is_none() {
                    return field("model.n_nodes", "required for fn_env/fn_full");
                }
            }
            "ddm" => {
                if self.graph.is_none() {
                    return field("graph", "required for the ddm model");
                }
                if self.model.sigma.is_some() {
                    return field("model.sigma", "ddm coupling is fixed to 1; remove this key");
                }
            }
            "linear_consensus" => {
                if self.graph.is_none() {
                    return field("graph", "required for linear_consensus");
                }
            }
            "custom" => {
                if self.graph.is_none() {
                    return field("graph", "required for the custom model");
                }
                if self.model.node_dim.is_none() {
                    return field("model.node_dim", "required for the custom model");
                }
                if self.model.drift_linear.is_none() {
                    return field("model.drift_linear", "required for the custom model");
                }
            }
            other => {
                return field(
                    "model.name",
                    &format!(
                        "unknown model `{other}` (expected fn_env, fn_full, ddm, \
                         linear_consensus, or custom)"
                    ),
                );
            }
        }
        Ok(())
    }

    /// Resolve the communication graph, if the model takes one.
    pub fn build_graph(&self, base_dir: &Path) -> Result<Option<Graph>, CliError> {
        match &self.graph {
            None => Ok(None),
            Some(section) => Ok(Some(build_graph_section(section, base_dir, "graph")?)),
        }
    }

    /// Resolve the noise-layer graph, if configured.
    pub fn build_noise_layer_graph(&self, base_dir: &Path) -> Result<Option<Graph>, CliError> {
        match &self.noise_layer {
            None => Ok(None),
            Some(section) => {
                let as_graph = GraphSection {
                    nodes: section.nodes,
                    edges: section.edges.clone(),
                    file: section.file.clone(),
                };
                Ok(Some(build_graph_section(&as_graph, base_dir, "noise_layer")?))
            }
        }
    }
}

fn build_graph_section(
    section: &GraphSection,
    base_dir: &Path,
    name: &str,
) -> Result<Graph, CliError> {
    match (§ion.file, §ion.nodes, §ion.edges) {
        (Some(file), None, None) => {
            let path = if file.is_absolute() { file.clone() } else { base_dir.join(file) };
            graph_file::read_edge_list(&path)
        }
        (None, Some(nodes), edges) => {
            let edges = edges.cloned().unwrap_or_default();
            Graph::new(*nodes, edges)
                .map_err(|e| CliError::Config(format!("{name}: {e}")))
        }
        _ => Err(CliError::Config(format!(
            "{name}: specify either `file` or inline `nodes` (+ optional `edges`), not both"
        ))),
    }
}
