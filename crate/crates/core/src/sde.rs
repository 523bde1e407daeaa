//! Brownian path generation and fixed-step Euler-Maruyama integration of
//! the coupled network SDE
//!
//! ```text
//! dX = [F(t, X) - sigma (L (x) I_n) X] dt + G(t, X) dB - sigma* (L* (x) I_n) X db
//! ```
//!
//! All stochastic integrals are Ito integrals: drift and diffusion are
//! evaluated at the left endpoint of each step and there is no
//! Stratonovich correction anywhere. With zero diffusion the scheme
//! reduces to forward Euler bit for bit.
//!
//! Reproducibility: every Brownian channel draws from its own counter
//! stream of a ChaCha generator keyed by the trajectory seed, so the
//! increments of channel `c` do not depend on how many other channels
//! exist, and a `(seed, dt, steps, channels)` tuple always produces
//! bit-identical increments.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::graph::Graph;
use crate::linalg::norm2;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// States with Euclidean norm beyond this abort the integration; the
/// built-in models are globally attracting at their reference parameters,
/// so crossing it signals a configuration error rather than dynamics.
pub const BLOWUP_LIMIT: f64 = 1e8;

/// Errors from path sampling and integration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdeError {
    /// A step size or horizon argument is not usable.
    #[error("invalid time step: dt = {dt} (must be positive and finite)")]
    InvalidTimeStep {
        /// Offending step size.
        dt: f64,
    },
    /// The requested number of steps is zero.
    #[error("integration must take at least one step (t_end - t0 = {span}, dt = {dt})")]
    NoSteps {
        /// Requested time span.
        span: f64,
        /// Step size.
        dt: f64,
    },
    /// A Brownian path needs at least one channel.
    #[error("brownian path must have at least one channel")]
    NoChannels,
    /// A state or increment slice has the wrong length.
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        /// Which argument is wrong.
        what: &'static str,
        /// Expected length.
        expected: usize,
        /// Actual length.
        got: usize,
    },
    /// The supplied path does not match the system's channel layout.
    #[error("brownian path has {got} channels but the system needs {expected}")]
    ChannelLayoutMismatch {
        /// Channels the system requires.
        expected: usize,
        /// Channels the path provides.
        got: usize,
    },
    /// The state left the trust region (or became non-finite).
    #[error("integration blew up at t = {t}: |X| = {norm:e}")]
    Blowup {
        /// Time at which the guard tripped.
        t: f64,
        /// State norm at that time (may be NaN/inf).
        norm: f64,
    },
    /// Noise layer graph does not match the system size.
    #[error("noise layer has {layer_nodes} nodes but the system has {system_nodes}")]
    LayerSizeMismatch {
        /// Nodes in the layer graph.
        layer_nodes: usize,
        /// Nodes in the system.
        system_nodes: usize,
    },
    /// A strength or dimension parameter is out of range.
    #[error("invalid parameter: {what}")]
    InvalidParameter {
        /// Description of the violated constraint.
        what: String,
    },
}

/// Discretized Brownian increments on a uniform grid.
///
/// Increment `(k, c)` is the change of channel `c` over `[k dt, (k+1) dt)`,
/// drawn i.i.d. Gaussian with mean 0 and variance `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    dt: f64,
    steps: usize,
    channels: usize,
    seed: u64,
    /// Row-major `steps x channels`.
    increments: Vec<f64>,
}

impl BrownianPath {
    /// Step size.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of channels.
    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Seed the path was drawn from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// All increments, row-major `steps x channels`.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increment of `channel` over step `step`.
    pub fn increment(&self, step: usize, channel: usize) -> f64 {
        self.increments[step * self.channels + channel]
    }

    /// The increments of all channels for one step.
    pub fn step_row(&self, step: usize) -> &[f64] {
        &self.increments[step * self.channels..(step + 1) * self.channels]
    }

    /// Brownian position `B(t_k)` of `channel`, with `B(t_0) = 0`.
    pub fn cumulative(&self, channel: usize, step: usize) -> f64 {
        let mut acc = 0.0;
        for k in 0..step {
            acc += self.increment(k, channel);
        }
        acc
    }

    /// Aggregate groups of `factor` increments into a path on a grid
    /// coarser by `factor`. `steps` must be divisible by `factor`.
    ///
    /// The coarse path traverses the same Brownian trajectory, which is
    /// what strong-convergence measurements need.
    pub fn coarsen(&self, factor: usize) -> Result<BrownianPath, SdeError> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(SdeError::InvalidParameter {
                what: alloc::format!(
                    "coarsening factor {factor} does not divide {} steps",
                    self.steps
                ),
            });
        }
        let coarse_steps = self.steps / factor;
        let mut increments = vec![0.0; coarse_steps * self.channels];
        for k in 0..coarse_steps {
            for c in 0..self.channels {
                let mut acc = 0.0;
                for sub in 0..factor {
                    acc += self.increment(k * factor + sub, c);
                }
                increments[k * self.channels + c] = acc;
            }
        }
        Ok(BrownianPath {
            dt: self.dt * factor as f64,
            steps: coarse_steps,
            channels: self.channels,
            seed: self.seed,
            increments,
        })
    }

    /// Path with zero channels, for deterministic systems.
    fn empty(dt: f64, steps: usize, seed: u64) -> BrownianPath {
        BrownianPath { dt, steps, channels: 0, seed, increments: Vec::new() }
    }
}

/// Draw a Brownian path: `steps x channels` i.i.d. increments of variance
/// `dt`, deterministic in `seed`.
///
/// Channel `c` draws from ChaCha stream `c + 1` keyed by `seed`, so each
/// channel is an independent stream and its draws do not depend on the
/// total channel count.
pub fn sample_brownian(
    seed: u64,
    dt: f64,
    steps: usize,
    channels: usize,
) -> Result<BrownianPath, SdeError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SdeError::InvalidTimeStep { dt });
    }
    if steps == 0 {
        return Err(SdeError::NoSteps { span: 0.0, dt });
    }
    if channels == 0 {
        return Err(SdeError::NoChannels);
    }
    let scale = dt.sqrt();
    let mut increments = vec![0.0; steps * channels];
    for c in 0..channels {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(c as u64 + 1);
        for k in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            increments[k * channels + c] = scale * z;
        }
    }
    Ok(BrownianPath { dt, steps, channels, seed, increments })
}

/// Derive a child seed from a master seed and a salt (SplitMix64 mixing).
///
/// Used to give every (sweep cell, trajectory, purpose) its own
/// reproducible stream regardless of scheduling order.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-node drift `f(t, x_i)`: writes the derivative of one node's state
/// into `out` (`node_dim` long). The same `f` applies to every node.
pub type DriftFn = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Diffusion block `g_i(t, X)` for one node: given the full network state,
/// writes the `node_dim x channels_per_node` block of node `i`, row-major.
pub type NodeDiffusionFn = Box<dyn Fn(f64, &[f64], usize, &mut [f64]) + Send + Sync>;

/// Shared-channel diffusion `g(t, X)`: writes the full-state coefficient
/// vector (`node_dim * node_count` long) multiplying the single scalar
/// Brownian increment.
pub type SharedDiffusionFn = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// How noise enters the network.
pub enum DiffusionSpec {
    /// No diffusion.
    None,
    /// Each node has its own `d`-dimensional Brownian motion; channel
    /// layout is node-major (`node i` owns channels `i*d .. (i+1)*d`).
    PerNodeIndependent {
        /// Brownian dimension `d` per node.
        channels_per_node: usize,
        /// Per-node diffusion block.
        g: NodeDiffusionFn,
    },
    /// One scalar Brownian motion drives the whole network.
    SharedScalar {
        /// Full-state coefficient vector.
        g: SharedDiffusionFn,
    },
}

impl DiffusionSpec {
    /// Name of the variant, for labels and reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            DiffusionSpec::None => "none",
            DiffusionSpec::PerNodeIndependent { .. } => "per_node_independent",
            DiffusionSpec::SharedScalar { .. } => "shared_scalar",
        }
    }

    /// Brownian channels this diffusion consumes.
    pub fn channel_count(&self, node_count: usize) -> usize {
        match self {
            DiffusionSpec::None => 0,
            DiffusionSpec::PerNodeIndependent { channels_per_node, .. } => {
                node_count * channels_per_node
            }
            DiffusionSpec::SharedScalar { .. } => 1,
        }
    }
}

impl core::fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("DiffusionSpec::")?;
        f.write_str(self.kind_name())
    }
}

/// A second graph through which a single scalar Brownian signal couples
/// the nodes: the `- strength * (L* (x) I_n) X db` term.
#[derive(Debug)]
pub struct NoiseLayer {
    /// Topology of the layer.
    pub graph: Graph,
    /// Noise gain `sigma*`.
    pub strength: f64,
}

/// A network of `node_count` identical `node_dim`-dimensional nodes:
/// drift, deterministic Laplacian coupling, diffusion, and an optional
/// noise layer.
pub struct NetworkSystem {
    node_dim: usize,
    node_count: usize,
    drift: DriftFn,
    coupling_strength: f64,
    graph: Graph,
    diffusion: DiffusionSpec,
    noise_layer: Option<NoiseLayer>,
    label: String,
}

impl NetworkSystem {
    /// Assemble a system. The node count is taken from `graph`.
    pub fn new(
        node_dim: usize,
        drift: DriftFn,
        coupling_strength: f64,
        graph: Graph,
        diffusion: DiffusionSpec,
    ) -> Result<Self, SdeError> {
        if node_dim == 0 {
            return Err(SdeError::InvalidParameter { what: "node_dim must be >= 1".into() });
        }
        if !(coupling_strength >= 0.0) || !coupling_strength.is_finite() {
            return Err(SdeError::InvalidParameter {
                what: alloc::format!("coupling strength {coupling_strength} must be >= 0"),
            });
        }
        let node_count = graph.node_count();
        Ok(NetworkSystem {
            node_dim,
            node_count,
            drift,
            coupling_strength,
            graph,
            diffusion,
            noise_layer: None,
            label: String::from("network"),
        })
    }

    /// Attach a noise layer. Its graph must have the same node count.
    pub fn with_noise_layer(mut self, layer: NoiseLayer) -> Result<Self, SdeError> {
        if layer.graph.node_count() != self.node_count {
            return Err(SdeError::LayerSizeMismatch {
                layer_nodes: layer.graph.node_count(),
                system_nodes: self.node_count,
            });
        }
        if !(layer.strength >= 0.0) || !layer.strength.is_finite() {
            return Err(SdeError::InvalidParameter {
                what: alloc::format!("noise layer strength {} must be >= 0", layer.strength),
            });
        }
        self.noise_layer = Some(layer);
        Ok(self)
    }

    /// Attach a descriptive label (folded into the descriptor hash).
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// State dimension per node.
    pub fn node_dim(&self) -> usize {
        self.node_dim
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Full state dimension `node_dim * node_count`.
    pub fn state_dim(&self) -> usize {
        self.node_dim * self.node_count
    }

    /// Deterministic coupling strength `sigma`.
    pub fn coupling_strength(&self) -> f64 {
        self.coupling_strength
    }

    /// Communication graph.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Diffusion specification.
    pub fn diffusion(&self) -> &DiffusionSpec {
        &self.diffusion
    }

    /// Optional noise layer.
    pub fn noise_layer(&self) -> Option<&NoiseLayer> {
        self.noise_layer.as_ref()
    }

    /// Label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Channels consumed by the diffusion alone.
    pub fn diffusion_channels(&self) -> usize {
        self.diffusion.channel_count(self.node_count)
    }

    /// Total Brownian channels: diffusion channels plus one for the noise
    /// layer when present.
    pub fn total_channels(&self) -> usize {
        self.diffusion_channels() + usize::from(self.noise_layer.is_some())
    }

    /// Evaluate the stacked drift `F(t, X)` into `out`.
    pub fn eval_drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let n = self.node_dim;
        for i in 0..self.node_count {
            (self.drift)(t, &x[i * n..(i + 1) * n], &mut out[i * n..(i + 1) * n]);
        }
    }

    /// Accumulate `factor * sum_{j ~ i} (x_j - x_i)` into `out`, edge-wise
    /// over `graph` (this is `-factor * (L (x) I_n) x`).
    fn accumulate_coupling(graph: &Graph, node_dim: usize, factor: f64, x: &[f64], out: &mut [f64]) {
        if factor == 0.0 {
            return;
        }
        for &(a, b) in graph.edges() {
            let (oa, ob) = (a * node_dim, b * node_dim);
            for k in 0..node_dim {
                let diff = x[ob + k] - x[oa + k];
                out[oa + k] += factor * diff;
                out[ob + k] -= factor * diff;
            }
        }
    }

    /// Evaluate the full diffusion matrix `G(t, X)` (shape
    /// `state_dim x diffusion_channels`, row-major) into `buf`.
    ///
    /// This is the matrix the constant estimators in
    /// [`crate::conditions`] sample; the integrator itself applies `G`
    /// without materializing it.
    pub fn diffusion_matrix(&self, t: f64, x: &[f64], buf: &mut [f64]) {
        let cols = self.diffusion_channels();
        let rows = self.state_dim();
        assert_eq!(buf.len(), rows * cols, "diffusion matrix buffer size");
        buf.fill(0.0);
        match &self.diffusion {
            DiffusionSpec::None => {}
            DiffusionSpec::PerNodeIndependent { channels_per_node, g } => {
                let (n, d) = (self.node_dim, *channels_per_node);
                let mut block = vec![0.0; n * d];
                for i in 0..self.node_count {
                    block.fill(0.0);
                    g(t, x, i, &mut block);
                    for c in 0..n {
                        for m in 0..d {
                            buf[(i * n + c) * cols + (i * d + m)] = block[c * d + m];
                        }
                    }
                }
            }
            DiffusionSpec::SharedScalar { g } => {
                let mut column = vec![0.0; rows];
                g(t, x, &mut column);
                for (r, v) in column.iter().enumerate() {
                    buf[r * cols] = *v;
                }
            }
        }
    }

    /// Structural fingerprint of the system (label, sizes, coupling,
    /// graphs, diffusion kind); recorded on every trajectory.
    pub fn descriptor_hash(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write(self.label.as_bytes());
        h.write_usize(self.node_dim);
        h.write_usize(self.node_count);
        h.write_f64(self.coupling_strength);
        for &(a, b) in self.graph.edges() {
            h.write_usize(a);
            h.write_usize(b);
        }
        h.write(self.diffusion.kind_name().as_bytes());
        h.write_usize(self.diffusion_channels());
        if let Some(layer) = &self.noise_layer {
            h.write_f64(layer.strength);
            for &(a, b) in layer.graph.edges() {
                h.write_usize(a);
                h.write_usize(b);
            }
        }
        h.finish()
    }
}

impl core::fmt::Debug for NetworkSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NetworkSystem")
            .field("label", &self.label)
            .field("node_dim", &self.node_dim)
            .field("node_count", &self.node_count)
            .field("coupling_strength", &self.coupling_strength)
            .field("diffusion", &self.diffusion)
            .field("noise_layer", &self.noise_layer.is_some())
            .finish()
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    fn write_usize(&mut self, v: usize) {
        self.write(&(v as u64).to_le_bytes());
    }
    fn write_f64(&mut self, v: f64) {
        self.write(&v.to_bits().to_le_bytes());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// A simulated trajectory: uniform time grid and the full state history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    node_dim: usize,
    node_count: usize,
    dt: f64,
    seed: u64,
    system_hash: u64,
    times: Vec<f64>,
    /// Row-major `(steps + 1) x state_dim`.
    states: Vec<f64>,
}

impl Trajectory {
    /// Assemble a trajectory from raw data (recorded by another tool, or
    /// constructed in tests). `states` is row-major
    /// `times.len() x (node_dim * node_count)`; the grid must be uniform.
    pub fn from_parts(
        node_dim: usize,
        node_count: usize,
        times: Vec<f64>,
        states: Vec<f64>,
    ) -> Result<Trajectory, SdeError> {
        if node_dim == 0 || node_count == 0 {
            return Err(SdeError::InvalidParameter {
                what: "node_dim and node_count must be >= 1".into(),
            });
        }
        if times.len() < 2 {
            return Err(SdeError::InvalidParameter {
                what: "a trajectory needs at least two grid points".into(),
            });
        }
        let dim = node_dim * node_count;
        if states.len() != times.len() * dim {
            return Err(SdeError::DimensionMismatch {
                what: "state history",
                expected: times.len() * dim,
                got: states.len(),
            });
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SdeError::InvalidTimeStep { dt });
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                return Err(SdeError::InvalidParameter {
                    what: "time grid is not uniform".into(),
                });
            }
        }
        Ok(Trajectory { node_dim, node_count, dt, seed: 0, system_hash: 0, times, states })
    }

    /// Time grid, `steps + 1` points.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of integration steps.
    pub fn step_count(&self) -> usize {
        self.times.len() - 1
    }

    /// State dimension `node_dim * node_count`.
    pub fn state_dim(&self) -> usize {
        self.node_dim * self.node_count
    }

    /// Per-node state dimension.
    pub fn node_dim(&self) -> usize {
        self.node_dim
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Step size.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Seed that generated the driving noise.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fingerprint of the system that produced this trajectory.
    pub fn system_hash(&self) -> u64 {
        self.system_hash
    }

    /// Full network state at grid point `k`.
    pub fn state(&self, k: usize) -> &[f64] {
        let d = self.state_dim();
        &self.states[k * d..(k + 1) * d]
    }

    /// State of node `i` at grid point `k`.
    pub fn node_state(&self, k: usize, i: usize) -> &[f64] {
        let d = self.state_dim();
        let base = k * d + i * self.node_dim;
        &self.states[base..base + self.node_dim]
    }

    /// Final network state.
    pub fn final_state(&self) -> &[f64] {
        self.state(self.step_count())
    }

    /// Time series of one component of one node.
    pub fn component_series(
        &self,
        node: usize,
        component: usize,
    ) -> impl Iterator<Item = f64> + '_ {
        let d = self.state_dim();
        let offset = node * self.node_dim + component;
        (0..self.times.len()).map(move |k| self.states[k * d + offset])
    }
}

/// Scratch buffers reused across steps.
struct StepScratch {
    rhs: Vec<f64>,
    block: Vec<f64>,
    shared: Vec<f64>,
}

impl StepScratch {
    fn new(sys: &NetworkSystem) -> Self {
        let block_len = match &sys.diffusion {
            DiffusionSpec::PerNodeIndependent { channels_per_node, .. } => {
                sys.node_dim * channels_per_node
            }
            _ => 0,
        };
        let shared_len = match &sys.diffusion {
            DiffusionSpec::SharedScalar { .. } => sys.state_dim(),
            _ => 0,
        };
        StepScratch {
            rhs: vec![0.0; sys.state_dim()],
            block: vec![0.0; block_len],
            shared: vec![0.0; shared_len],
        }
    }
}

/// One Euler-Maruyama step from state `x` at time `t`, writing into `out`.
fn em_step_into(
    sys: &NetworkSystem,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
    out: &mut [f64],
    scratch: &mut StepScratch,
) -> Result<(), SdeError> {
    let n = sys.node_dim;

    // Deterministic part: rhs = F(t, x) + sigma * coupling.
    sys.eval_drift(t, x, &mut scratch.rhs);
    NetworkSystem::accumulate_coupling(
        &sys.graph,
        n,
        sys.coupling_strength,
        x,
        &mut scratch.rhs,
    );
    for k in 0..x.len() {
        out[k] = x[k] + scratch.rhs[k] * dt;
    }

    // Diffusion term G(t, x) dW.
    match &sys.diffusion {
        DiffusionSpec::None => {}
        DiffusionSpec::PerNodeIndependent { channels_per_node, g } => {
            let d = *channels_per_node;
            for i in 0..sys.node_count {
                scratch.block.fill(0.0);
                g(t, x, i, &mut scratch.block);
                for c in 0..n {
                    let mut acc = 0.0;
                    for m in 0..d {
                        acc += scratch.block[c * d + m] * dw[i * d + m];
                    }
                    out[i * n + c] += acc;
                }
            }
        }
        DiffusionSpec::SharedScalar { g } => {
            g(t, x, &mut scratch.shared);
            let db = dw[0];
            for k in 0..x.len() {
                out[k] += scratch.shared[k] * db;
            }
        }
    }

    // Noise layer term: strength * sum_{j ~* i} (x_j - x_i) db on the last
    // channel. Vanishes exactly when all nodes agree.
    if let Some(layer) = &sys.noise_layer {
        let db = dw[dw.len() - 1];
        NetworkSystem::accumulate_coupling(&layer.graph, n, layer.strength * db, x, out);
    }

    let norm = norm2(out);
    if !norm.is_finite() || norm > BLOWUP_LIMIT {
        return Err(SdeError::Blowup { t: t + dt, norm });
    }
    Ok(())
}

/// One Euler-Maruyama step: returns
/// `x + [F(t,x) + sigma * coupling] dt + G(t,x) dW (+ layer term)`.
///
/// `dw` must follow the system's channel layout: diffusion channels first
/// (node-major for per-node diffusion), then the noise-layer channel.
pub fn em_step(
    sys: &NetworkSystem,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SdeError> {
    if x.len() != sys.state_dim() {
        return Err(SdeError::DimensionMismatch {
            what: "state vector",
            expected: sys.state_dim(),
            got: x.len(),
        });
    }
    if dw.len() != sys.total_channels() {
        return Err(SdeError::ChannelLayoutMismatch {
            expected: sys.total_channels(),
            got: dw.len(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SdeError::InvalidTimeStep { dt });
    }
    let mut out = vec![0.0; x.len()];
    let mut scratch = StepScratch::new(sys);
    em_step_into(sys, t, x, dw, dt, &mut out, &mut scratch)?;
    Ok(out)
}

/// Integrate the system from `t0` to `t_end` with step `dt`, drawing the
/// noise from `seed`.
///
/// The step count is `round((t_end - t0) / dt)`; the final grid point is
/// `t0 + steps * dt`.
pub fn simulate(
    sys: &NetworkSystem,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory, SdeError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SdeError::InvalidTimeStep { dt });
    }
    let span = t_end - t0;
    if !(span > 0.0) {
        return Err(SdeError::NoSteps { span, dt });
    }
    let steps_f = span / dt;
    let steps = if steps_f - steps_f.floor() >= 0.5 {
        steps_f.floor() as usize + 1
    } else {
        steps_f.floor() as usize
    };
    if steps == 0 {
        return Err(SdeError::NoSteps { span, dt });
    }
    let channels = sys.total_channels();
    let path = if channels > 0 {
        sample_brownian(seed, dt, steps, channels)?
    } else {
        BrownianPath::empty(dt, steps, seed)
    };
    simulate_with_path(sys, x0, t0, &path)
}

/// Integrate the system along an explicitly supplied Brownian path.
///
/// This is the entry point for strong-convergence measurements, where the
/// same path must drive several step sizes.
pub fn simulate_with_path(
    sys: &NetworkSystem,
    x0: &[f64],
    t0: f64,
    path: &BrownianPath,
) -> Result<Trajectory, SdeError> {
    let dim = sys.state_dim();
    if x0.len() != dim {
        return Err(SdeError::DimensionMismatch {
            what: "initial condition",
            expected: dim,
            got: x0.len(),
        });
    }
    if path.channels() != sys.total_channels() {
        return Err(SdeError::ChannelLayoutMismatch {
            expected: sys.total_channels(),
            got: path.channels(),
        });
    }
    let steps = path.steps();
    let dt = path.dt();

    let mut times = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        times.push(t0 + k as f64 * dt);
    }

    let mut states = vec![0.0; (steps + 1) * dim];
    states[..dim].copy_from_slice(x0);
    let mut scratch = StepScratch::new(sys);
    let empty_row: [f64; 0] = [];
    for k in 0..steps {
        let (done, rest) = states.split_at_mut((k + 1) * dim);
        let x = &done[k * dim..];
        let dw: &[f64] =
            if path.channels() > 0 { path.step_row(k) } else { &empty_row };
        em_step_into(sys, times[k], x, dw, dt, &mut rest[..dim], &mut scratch)?;
    }

    Ok(Trajectory {
        node_dim: sys.node_dim,
        node_count: sys.node_count,
        dt,
        seed: path.seed(),
        system_hash: sys.descriptor_hash(),
        times,
        states,
    })
}
