//! Ready-made network systems: FitzHugh-Nagumo oscillators coupled through
//! a noisy mean field, a nonlinear drift-diffusion decision network, and
//! linear consensus.
//!
//! Every built-in diffusion vanishes identically on the synchronous
//! manifold (all nodes equal), which is the structural property the
//! certificates in [`crate::conditions`] require. User-defined systems are
//! assembled directly through [`NetworkSystem::new`].

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use crate::conditions::{CouplingConstants, NoiseLayerConstants, TaggedConstant};
use crate::graph::{Graph, GraphError};
use crate::sde::{DiffusionSpec, NetworkSystem, NoiseLayer, SdeError};

/// External stimulus `u(t)` fed to every oscillator.
pub type StimulusFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Errors from model construction.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    /// A model parameter violates its constraint.
    #[error("invalid model parameter: {what}")]
    InvalidParameter {
        /// Description of the violated constraint.
        what: String,
    },
    /// The model needs more nodes than were requested.
    #[error("model needs at least {needed} nodes, got {got}")]
    TooFewNodes {
        /// Nodes requested.
        got: usize,
        /// Minimum nodes required.
        needed: usize,
    },
    /// Underlying system assembly failed.
    #[error(transparent)]
    Sde(#[from] SdeError),
    /// Graph construction or spectrum failure.
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parameters of one FitzHugh-Nagumo oscillator plus the mean-field noise
/// intensity.
///
/// Node state is `(v, w)` — membrane potential and recovery variable:
///
/// ```text
/// dv = c (v + w - v^3/3 + u(t)) dt + noise on v
/// dw = -(v - a + b w) / c dt      (+ noise on w in the fully coupled case)
/// ```
pub struct FnParams {
    /// Recovery offset `a`.
    pub a: f64,
    /// Recovery slope `b`.
    pub b: f64,
    /// Time-scale separation `c` (appears as `1/c`; must be nonzero).
    pub c: f64,
    /// External stimulus `u(t)`, shared by all nodes.
    pub stimulus: StimulusFn,
    /// Mean-field noise intensity (`gamma >= 0`).
    pub noise_intensity: f64,
}

impl FnParams {
    /// Parameters with `u(t) = 0`.
    pub fn new(a: f64, b: f64, c: f64, noise_intensity: f64) -> Result<Self, ModelError> {
        if !a.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(ModelError::InvalidParameter {
                what: format!("a={a}, b={b}, c={c} must be finite"),
            });
        }
        if c == 0.0 {
            return Err(ModelError::InvalidParameter { what: "c must be nonzero".into() });
        }
        if !(noise_intensity >= 0.0) || !noise_intensity.is_finite() {
            return Err(ModelError::InvalidParameter {
                what: format!("noise intensity {noise_intensity} must be >= 0"),
            });
        }
        Ok(FnParams { a, b, c, stimulus: Box::new(|_| 0.0), noise_intensity })
    }

    /// The parameter set used throughout the oscillator experiments:
    /// `a = 0.7, b = 0.4, c = 2.8, u = 0`.
    pub fn reference(noise_intensity: f64) -> Result<Self, ModelError> {
        FnParams::new(0.7, 0.4, 2.8, noise_intensity)
    }

    /// Replace the stimulus callback.
    pub fn with_stimulus(mut self, stimulus: StimulusFn) -> Self {
        self.stimulus = stimulus;
        self
    }
}

/// FitzHugh-Nagumo network coupled only through a noisy environmental
/// mean field acting on the membrane potential:
///
/// ```text
/// dv_i = c (v_i + w_i - v_i^3/3 + u(t)) dt
///        + gamma ((1/N) sum_j v_j - v_i) db
/// dw_i = -(v_i - a + b w_i) / c dt
/// ```
///
/// One scalar Brownian motion `db` drives every node. There is no
/// deterministic coupling (`sigma = 0`, edgeless graph).
pub fn fn_env_system(params: FnParams, node_count: usize) -> Result<NetworkSystem, ModelError> {
    fn_system(params, node_count, false)
}

/// FitzHugh-Nagumo network with the mean-field noise coupling acting on
/// both state components — the membrane potential and the recovery
/// variable each feel `gamma ((1/N) sum_j x_j - x_i) db`.
pub fn fn_full_system(params: FnParams, node_count: usize) -> Result<NetworkSystem, ModelError> {
    fn_system(params, node_count, true)
}

fn fn_system(
    params: FnParams,
    node_count: usize,
    couple_both_components: bool,
) -> Result<NetworkSystem, ModelError> {
    if node_count < 2 {
        return Err(ModelError::TooFewNodes { got: node_count, needed: 2 });
    }
    let FnParams { a, b, c, stimulus, noise_intensity } = params;
    let gamma = noise_intensity;
    let n = node_count;

    let drift: crate::sde::DriftFn = Box::new(move |t, x, out| {
        let (v, w) = (x[0], x[1]);
        out[0] = c * (v + w - v * v * v / 3.0 + stimulus(t));
        out[1] = -(v - a + b * w) / c;
    });

    // The mean-field term gamma ((1/N) sum_j x_j - x_i) is accumulated as
    // (gamma/N) sum_j (x_j - x_i) so it vanishes exactly (not just to
    // rounding) on synchronous states.
    let g: crate::sde::SharedDiffusionFn = Box::new(move |_t, x, out| {
        let scale = gamma / n as f64;
        for i in 0..n {
            let mut dv = 0.0;
            let mut dw = 0.0;
            for j in 0..n {
                dv += x[2 * j] - x[2 * i];
                dw += x[2 * j + 1] - x[2 * i + 1];
            }
            out[2 * i] = scale * dv;
            out[2 * i + 1] = if couple_both_components { scale * dw } else { 0.0 };
        }
    });

    let label = format!(
        "{}(a={a}, b={b}, c={c}, gamma={gamma}, N={n})",
        if couple_both_components { "fn_full" } else { "fn_env" }
    );
    Ok(NetworkSystem::new(
        2,
        drift,
        0.0,
        Graph::new(n, [])?,
        DiffusionSpec::SharedScalar { g },
    )?
    .with_label(label))
}

/// Nonlinear drift-diffusion decision network: scalar agents with bistable
/// drift `x - x^3`, unit-strength Laplacian coupling over `graph`, and
/// per-node noise proportional to the deviation from the group mean:
///
/// ```text
/// dx_i = [x_i - x_i^3 + sum_{j ~ i} (x_j - x_i)] dt
///        + [x_i - (1/N) sum_j x_j] db_i
/// ```
pub fn ddm_system(graph: Graph) -> Result<NetworkSystem, ModelError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(ModelError::TooFewNodes { got: n, needed: 2 });
    }
    let drift: crate::sde::DriftFn = Box::new(|_t, x, out| {
        out[0] = x[0] - x[0] * x[0] * x[0];
    });
    // x_i - mean accumulated as (1/N) sum_j (x_i - x_j): exactly zero on
    // consensus states.
    let g: crate::sde::NodeDiffusionFn = Box::new(move |_t, x, i, out| {
        let mut acc = 0.0;
        for &xj in x.iter() {
            acc += x[i] - xj;
        }
        out[0] = acc / x.len() as f64;
    });
    let label = format!("ddm(N={n})");
    Ok(NetworkSystem::new(
        1,
        drift,
        1.0,
        graph,
        DiffusionSpec::PerNodeIndependent { channels_per_node: 1, g },
    )?
    .with_label(label))
}

/// Linear consensus: integrator nodes (`f = 0`) with Laplacian coupling
/// `sigma` and an optional noise layer.
pub fn linear_consensus_system(
    graph: Graph,
    sigma: f64,
    noise_layer: Option<NoiseLayer>,
) -> Result<NetworkSystem, ModelError> {
    let n = graph.node_count();
    let drift: crate::sde::DriftFn = Box::new(|_t, _x, out| out.fill(0.0));
    let mut sys = NetworkSystem::new(1, drift, sigma, graph, DiffusionSpec::None)?
        .with_label(format!("linear_consensus(sigma={sigma}, N={n})"));
    if let Some(layer) = noise_layer {
        sys = sys.with_noise_layer(layer)?;
    }
    Ok(sys)
}

/// The coupling-condition constants the environment-coupled oscillator
/// network satisfies on paper: no deterministic coupling
/// (`sigma = lambda_2 = 0`), closed-form drift bound, diffusion gain
/// `gamma * N` from the mean-field matrix reading without the `1/N`
/// factor, and zero persistence (the recovery components carry no noise).
///
/// The dynamics as implemented keep the printed `1/N` factor, under which
/// the numerically estimated gain is `gamma * 1`; use
/// [`crate::conditions::estimate_diffusion_constants`] to compute that
/// reading and report both side by side.
pub fn fn_env_coupling_constants(
    b: f64,
    c: f64,
    noise_intensity: f64,
    node_count: usize,
) -> Result<CouplingConstants, ModelError> {
    let k_f = crate::conditions::kf_fitzhugh_nagumo(b, c)
        .map_err(|e| ModelError::InvalidParameter { what: format!("{e}") })?;
    Ok(CouplingConstants {
        k_f: TaggedConstant::closed_form(k_f),
        k_g: TaggedConstant::closed_form(noise_intensity * node_count as f64),
        k_g_bar: TaggedConstant::closed_form(0.0),
        sigma: TaggedConstant::closed_form(0.0),
        lambda2: TaggedConstant::closed_form(0.0),
    })
}

/// The noise-design constants claimed for the fully coupled oscillator
/// network: `sigma* = gamma` and both transverse layer eigenvalues equal
/// to `N` (again the reading without the `1/N` factor; the implemented
/// dynamics give transverse eigenvalues 1 instead, which a checking front
/// end can report side by side).
pub fn fn_full_noise_layer_constants(
    b: f64,
    c: f64,
    noise_intensity: f64,
    node_count: usize,
) -> Result<NoiseLayerConstants, ModelError> {
    let k_f = crate::conditions::kf_fitzhugh_nagumo(b, c)
        .map_err(|e| ModelError::InvalidParameter { what: format!("{e}") })?;
    Ok(NoiseLayerConstants {
        k_f: TaggedConstant::closed_form(k_f),
        sigma: TaggedConstant::closed_form(0.0),
        lambda2: TaggedConstant::closed_form(0.0),
        sigma_star: TaggedConstant::closed_form(noise_intensity),
        lambda2_star: TaggedConstant::closed_form(node_count as f64),
        lambda_n_star: TaggedConstant::closed_form(node_count as f64),
    })
}

/// Coupling-condition constants of the decision network: `K_f = 1` from
/// the scalar bistable drift, unit coupling, and gain/persistence
/// constants `K_g = Kbar_g = 1` (the shared-noise reading under which the
/// `lambda_2 > 0.5` decision threshold is derived — the per-channel
/// estimate of the persistence constant comes out lower, see
/// [`crate::conditions::estimate_diffusion_constants`]).
///
/// `lambda2` is the algebraic connectivity of the supplied graph.
pub fn ddm_coupling_constants(graph: &Graph) -> Result<CouplingConstants, ModelError> {
    let spectrum = graph.spectrum()?;
    Ok(CouplingConstants {
        k_f: TaggedConstant::closed_form(1.0),
        k_g: TaggedConstant::closed_form(1.0),
        k_g_bar: TaggedConstant::closed_form(1.0),
        sigma: TaggedConstant::closed_form(1.0),
        lambda2: TaggedConstant::numeric(spectrum.lambda2()),
    })
}

/// Coupling-condition constants for linear consensus: integrators are
/// exactly QUAD with `K_f = 0` and carry no diffusion.
pub fn linear_consensus_coupling_constants(
    graph: &Graph,
    sigma: f64,
) -> Result<CouplingConstants, ModelError> {
    let spectrum = graph.spectrum()?;
    Ok(CouplingConstants {
        k_f: TaggedConstant::closed_form(0.0),
        k_g: TaggedConstant::closed_form(0.0),
        k_g_bar: TaggedConstant::closed_form(0.0),
        sigma: TaggedConstant::user(sigma),
        lambda2: TaggedConstant::numeric(spectrum.lambda2()),
    })
}

/// Noise-design constants for linear consensus with an explicit layer:
/// `K_f = 0`, communication-side `sigma lambda_2` from the graph, layer
/// eigenvalues from the layer spectrum.
pub fn linear_consensus_noise_layer_constants(
    graph: &Graph,
    sigma: f64,
    layer_graph: &Graph,
    sigma_star: f64,
) -> Result<NoiseLayerConstants, ModelError> {
    let spectrum = graph.spectrum()?;
    let layer = layer_graph.spectrum()?;
    Ok(NoiseLayerConstants {
        k_f: TaggedConstant::closed_form(0.0),
        sigma: TaggedConstant::user(sigma),
        lambda2: TaggedConstant::numeric(spectrum.lambda2()),
        sigma_star: TaggedConstant::user(sigma_star),
        lambda2_star: TaggedConstant::numeric(layer.lambda2()),
        lambda_n_star: TaggedConstant::numeric(layer.lambda_n()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::metrics;
    use crate::sde::{em_step, sample_brownian, simulate};
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_state(rng: &mut ChaCha12Rng, len: usize, half_width: f64) -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-half_width..half_width)).collect()
    }

    /// All built-in diffusions vanish exactly on synchronous states.
    #[test]
    fn diffusion_vanishes_on_the_synchronous_manifold() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xD1FF);
        let n_nodes = 6;
        let systems = [
            fn_env_system(FnParams::reference(1.7).unwrap(), n_nodes).unwrap(),
            fn_full_system(FnParams::reference(2.3).unwrap(), n_nodes).unwrap(),
            ddm_system(Graph::complete(n_nodes)).unwrap(),
        ];
        for sys in &systems {
            let cols = sys.diffusion_channels();
            let mut buf = alloc::vec![0.0; sys.state_dim() * cols];
            for _ in 0..100 {
                let node = random_state(&mut rng, sys.node_dim(), 5.0);
                let mut state = Vec::with_capacity(sys.state_dim());
                for _ in 0..sys.node_count() {
                    state.extend_from_slice(&node);
                }
                sys.diffusion_matrix(0.0, &state, &mut buf);
                assert!(
                    buf.iter().all(|&v| v == 0.0),
                    "synchronous state leaks noise in {}",
                    sys.label()
                );
            }
        }
    }

    /// The oscillator drift satisfies the one-sided quadratic bound with
    /// the closed-form constant.
    #[test]
    fn fn_drift_satisfies_quad_bound() {
        let params = FnParams::reference(0.0).unwrap();
        let k_f = crate::conditions::kf_fitzhugh_nagumo(params.b, params.c).unwrap();
        let sys = fn_env_system(params, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0x0F1A);
        // Two-node synchronous states exercise the single-node drift.
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        for _ in 0..10_000 {
            let x = random_state(&mut rng, 2, 5.0);
            let y = random_state(&mut rng, 2, 5.0);
            let xs = [x[0], x[1], x[0], x[1]];
            let ys = [y[0], y[1], y[0], y[1]];
            sys.eval_drift(0.0, &xs, &mut fx[..]);
            sys.eval_drift(0.0, &ys, &mut fy[..]);
            let lhs: f64 = (0..2).map(|k| (x[k] - y[k]) * (fx[k] - fy[k])).sum();
            let dist2: f64 = (0..2).map(|k| (x[k] - y[k]) * (x[k] - y[k])).sum();
            assert!(lhs <= k_f * dist2 + 1e-9, "lhs={lhs}, bound={}", k_f * dist2);
        }
    }

    /// The decision drift satisfies `(x-y)(f(x)-f(y)) <= (x-y)^2`.
    #[test]
    fn ddm_drift_satisfies_quad_bound_with_unit_constant() {
        let mut rng = ChaCha12Rng::seed_from_u64(0x0F1B);
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(-5.0..5.0);
            let y: f64 = rng.random_range(-5.0..5.0);
            let lhs = (x - y) * ((x - x * x * x) - (y - y * y * y));
            assert!(lhs <= (x - y) * (x - y) + 1e-12);
        }
    }

    /// Frobenius norm of the decision network's diffusion equals the
    /// deviation norm exactly, and the row-contraction identity
    /// `|e^T G|^2 = sum e_i^4` holds (the per-channel persistence is
    /// therefore below 1 for spread-out deviations).
    #[test]
    fn ddm_diffusion_norm_identities() {
        let n = 5;
        let sys = ddm_system(Graph::complete(n)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0x0F1C);
        let mut g = alloc::vec![0.0; n * n];
        for _ in 0..1000 {
            let x = random_state(&mut rng, n, 4.0);
            let mean = x.iter().sum::<f64>() / n as f64;
            let e: Vec<f64> = x.iter().map(|v| v - mean).collect();
            sys.diffusion_matrix(0.0, &x, &mut g);

            let frob: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((frob - norm2(&e)).abs() <= 1e-12 * norm2(&e).max(1.0));

            // e^T G has entries e_i * g_ii = e_i^2.
            let mut row_sq = 0.0;
            for col in 0..n {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += e[r] * g[r * n + col];
                }
                row_sq += acc * acc;
            }
            let quartic: f64 = e.iter().map(|v| v * v * v * v).sum();
            assert!((row_sq - quartic).abs() <= 1e-9 * quartic.max(1e-12));
        }
    }

    /// Uncoupled oscillators started apart stay apart.
    #[test]
    fn fn_without_noise_does_not_synchronize() {
        let sys = fn_env_system(FnParams::reference(0.0).unwrap(), 2).unwrap();
        let x0 = [1.5, 0.0, -1.5, 0.6];
        let traj = simulate(&sys, &x0, 0.0, 40.0, 1e-3, 1).unwrap();
        let err = metrics::sync_error(&traj);
        let tail_max = err[err.len() / 2..].iter().cloned().fold(0.0, f64::max);
        assert!(tail_max > 0.5, "oscillators collapsed: max {tail_max}");
    }

    /// Decision network on the weakly connected path graph with the
    /// reference initial condition: disagreement persists through the
    /// early phase, but unit coupling exceeds the bistable barrier at any
    /// basin boundary, so the group still ends in one basin.
    #[test]
    fn ddm_on_path_graph_disagrees_before_settling() {
        let sys = ddm_system(Graph::path(5)).unwrap();
        let x0 = [10.3469, 7.2689, -3.0344, 2.9387, -7.8728];
        let traj = simulate(&sys, &x0, 0.0, 50.0, 1e-3, 3).unwrap();

        let spread_at = |t: f64| {
            let k = (t / traj.dt()).round() as usize;
            let x = traj.state(k);
            x.iter()
                .flat_map(|a| x.iter().map(move |b| (a - b).abs()))
                .fold(0.0, f64::max)
        };
        assert!(spread_at(1.5) > 1.0, "early disagreement missing: {}", spread_at(1.5));
        assert!(spread_at(50.0) < 0.05, "no agreement: {}", spread_at(50.0));
        for v in traj.final_state() {
            assert!((v.abs() - 1.0).abs() < 0.05, "agent outside both basins: {v}");
        }
    }

    #[test]
    fn linear_consensus_without_noise_settles_at_the_initial_mean() {
        let sys = linear_consensus_system(Graph::complete(4), 1.0, None).unwrap();
        let x0 = [2.0, -1.0, 0.5, 3.0];
        let mean = x0.iter().sum::<f64>() / 4.0;
        let traj = simulate(&sys, &x0, 0.0, 10.0, 1e-3, 0).unwrap();
        for v in traj.final_state() {
            assert!((v - mean).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_consensus_with_zero_coupling_is_frozen() {
        let sys = linear_consensus_system(Graph::new(3, []).unwrap(), 0.0, None).unwrap();
        let x0 = [1.0, 2.0, 3.0];
        let traj = simulate(&sys, &x0, 0.0, 1.0, 0.01, 0).unwrap();
        assert_eq!(traj.final_state(), x0.as_slice());
    }

    /// Pure noise-layer consensus: no drift, no deterministic coupling,
    /// the layer alone contracts the disagreement.
    #[test]
    fn noise_layer_alone_drives_consensus() {
        let layer = NoiseLayer { graph: Graph::complete(5), strength: 0.5 };
        let sys =
            linear_consensus_system(Graph::new(5, []).unwrap(), 0.0, Some(layer)).unwrap();
        let x0 = [1.0, -2.0, 0.3, 1.7, -0.4];
        let traj = simulate(&sys, &x0, 0.0, 30.0, 1e-3, 3).unwrap();
        let err = metrics::sync_error(&traj);
        assert!(err[err.len() - 1] < 1e-3 * err[0], "no contraction");
    }

    #[test]
    fn model_constants_match_hand_values() {
        let env = fn_env_coupling_constants(0.4, 2.8, 0.25, 10).unwrap();
        assert!((env.k_f.value - 3.2408971842726815).abs() < 1e-12);
        assert_eq!(env.k_g.value, 2.5);
        assert_eq!(env.k_g_bar.value, 0.0);

        let full = fn_full_noise_layer_constants(0.4, 2.8, 3.75, 10).unwrap();
        assert_eq!(full.sigma_star.value, 3.75);
        assert_eq!(full.lambda2_star.value, 10.0);

        let ddm = ddm_coupling_constants(&Graph::complete_minus_edge(5)).unwrap();
        assert_eq!(ddm.k_f.value, 1.0);
        assert!((ddm.lambda2.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn parameter_validation() {
        assert!(FnParams::new(0.7, 0.4, 0.0, 1.0).is_err());
        assert!(FnParams::new(0.7, 0.4, 2.8, -1.0).is_err());
        assert!(FnParams::new(f64::NAN, 0.4, 2.8, 1.0).is_err());
        assert!(matches!(
            fn_env_system(FnParams::reference(1.0).unwrap(), 1),
            Err(ModelError::TooFewNodes { .. })
        ));
        assert!(matches!(
            ddm_system(Graph::new(1, []).unwrap()),
            Err(ModelError::TooFewNodes { .. })
        ));
    }

    /// A shared stimulus displaces every node identically, so a
    /// synchronous state stays synchronous under it.
    #[test]
    fn stimulus_is_shared_and_additive() {
        let params = FnParams::new(0.7, 0.4, 2.8, 0.5)
            .unwrap()
            .with_stimulus(Box::new(|t: f64| 0.3 * t.sin()));
        let sys = fn_env_system(params, 2).unwrap();
        let path = sample_brownian(5, 1e-3, 100, 1).unwrap();
        let mut state = alloc::vec![0.4, -0.1, 0.4, -0.1];
        for k in 0..100 {
            state =
                em_step(&sys, k as f64 * 1e-3, &state, path.step_row(k), 1e-3).unwrap();
            assert!((state[0] - state[2]).abs() < 1e-14);
            assert!((state[1] - state[3]).abs() < 1e-14);
        }
    }
}
