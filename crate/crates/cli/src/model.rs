//! Bridge from configuration sections to core systems, initial
//! conditions, and certificate inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use stosync::conditions::{CouplingConstants, NoiseLayerConstants, TaggedConstant};
use stosync::graph::Graph;
use stosync::models::{
    ddm_coupling_constants, ddm_system, fn_env_coupling_constants, fn_env_system,
    fn_full_noise_layer_constants, fn_full_system, linear_consensus_coupling_constants,
    linear_consensus_noise_layer_constants, linear_consensus_system, FnParams,
};
use stosync::sde::{derive_seed, DiffusionSpec, NetworkSystem, NoiseLayer};

use crate::config::{ConstantsSection, ExperimentConfig};
use crate::error::CliError;

pub const FN_DEFAULT_A: f64 = 0.7;
pub const FN_DEFAULT_B: f64 = 0.4;
pub const FN_DEFAULT_C: f64 = 2.8;

/// Salt for deriving initial-condition streams from a cell seed.
const IC_SALT: u64 = 0x1C;

pub struct BuiltModel {
    pub system: NetworkSystem,
    pub warnings: Vec<String>,
}

fn fn_params(config: &ExperimentConfig) -> Result<(FnParams, usize), CliError> {
    let m = &config.model;
    let params = FnParams::new(
        m.a.unwrap_or(FN_DEFAULT_A),
        m.b.unwrap_or(FN_DEFAULT_B),
        m.c.unwrap_or(FN_DEFAULT_C),
        m.gamma.unwrap_or(0.0),
    )?;
    Ok((params, m.n_nodes.expect("validated")))
}

/// Assemble the network system. `graph` and `layer_graph` must already be
/// resolved; `layer_strength` (when `Some`) overrides the configured
/// `noise_layer.sigma_star`.
pub fn build_system(
    config: &ExperimentConfig,
    graph: Option<&Graph>,
    layer_graph: Option<&Graph>,
    layer_strength: Option<f64>,
) -> Result<BuiltModel, CliError> {
    let mut warnings = Vec::new();
    let layer = match layer_graph {
        None => None,
        Some(lg) => {
            let strength = layer_strength
                .or(config.noise_layer.as_ref().and_then(|l| l.sigma_star))
                .ok_or_else(|| {
                    CliError::Config(
                        "noise_layer.sigma_star: required to simulate with a noise layer"
                            .to_string(),
                    )
                })?;
            Some(NoiseLayer { graph: lg.clone(), strength })
        }
    };

    let system = match config.model.name.as_str() {
        "fn_env" => {
            let (params, n) = fn_params(config)?;
            reject_layer(&layer, "fn_env")?;
            fn_env_system(params, n)?
        }
        "fn_full" => {
            let (params, n) = fn_params(config)?;
            reject_layer(&layer, "fn_full")?;
            fn_full_system(params, n)?
        }
        "ddm" => {
            let graph = graph.expect("validated").clone();
            if !graph.spectrum().map(|s| s.is_connected_default()).unwrap_or(false) {
                warnings.push(
                    "graph: the communication graph is disconnected; agreement across \
                     components cannot be reached"
                        .to_string(),
                );
            }
            reject_layer(&layer, "ddm")?;
            ddm_system(graph)?
        }
        "linear_consensus" => {
            let graph = graph.expect("validated").clone();
            let sigma = config.model.sigma.unwrap_or(1.0);
            linear_consensus_system(graph, sigma, layer)?
        }
        "custom" => build_custom(config, graph.expect("validated"), layer)?,
        _ => unreachable!("validated"),
    };
    Ok(BuiltModel { system, warnings })
}

fn reject_layer(layer: &Option<NoiseLayer>, model: &str) -> Result<(), CliError> {
    if layer.is_some() {
        return Err(CliError::Config(format!(
            "noise_layer: not supported for model {model} (its noise coupling is built in)"
        )));
    }
    Ok(())
}

fn build_custom(
    config: &ExperimentConfig,
    graph: &Graph,
    layer: Option<NoiseLayer>,
) -> Result<NetworkSystem, CliError> {
    let m = &config.model;
    let n = m.node_dim.expect("validated");
    let a = m.drift_linear.clone().expect("validated");
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(CliError::Config(format!(
            "model.drift_linear: must be a {n}x{n} matrix"
        )));
    }
    let affine = m.drift_affine.clone().unwrap_or_else(|| vec![0.0; n]);
    let cubic = m.drift_cubic.clone().unwrap_or_else(|| vec![0.0; n]);
    if affine.len() != n {
        return Err(CliError::Config(format!("model.drift_affine: must have length {n}")));
    }
    if cubic.len() != n {
        return Err(CliError::Config(format!("model.drift_cubic: must have length {n}")));
    }

    let drift: stosync::sde::DriftFn = Box::new(move |_t, x, out| {
        for r in 0..x.len() {
            let mut acc = affine[r] - cubic[r] * x[r] * x[r] * x[r];
            for (c, &xc) in x.iter().enumerate() {
                acc += a[r][c] * xc;
            }
            out[r] = acc;
        }
    });

    let nodes = graph.node_count();
    let diffusion = match &m.diffusion {
        None => DiffusionSpec::None,
        Some(section) => match section.kind.as_str() {
            "none" => DiffusionSpec::None,
            "additive" => {
                let amplitude = section.amplitude.clone().ok_or_else(|| {
                    CliError::Config(
                        "model.diffusion.amplitude: required for kind = additive".to_string(),
                    )
                })?;
                if amplitude.len() != n {
                    return Err(CliError::Config(format!(
                        "model.diffusion.amplitude: must have length {n}"
                    )));
                }
                DiffusionSpec::PerNodeIndependent {
                    channels_per_node: 1,
                    g: Box::new(move |_t, _x, _i, out| out.copy_from_slice(&amplitude)),
                }
            }
            "shared_linear" => {
                let coef = section.coef.ok_or_else(|| {
                    CliError::Config(
                        "model.diffusion.coef: required for kind = shared_linear".to_string(),
                    )
                })?;
                DiffusionSpec::SharedScalar {
                    g: Box::new(move |_t, x, out| {
                        for (o, v) in out.iter_mut().zip(x) {
                            *o = coef * v;
                        }
                    }),
                }
            }
            "mean_field" => {
                let gamma = section.gamma.ok_or_else(|| {
                    CliError::Config(
                        "model.diffusion.gamma: required for kind = mean_field".to_string(),
                    )
                })?;
                let components =
                    section.components.clone().unwrap_or_else(|| (0..n).collect());
                if components.iter().any(|&c| c >= n) {
                    return Err(CliError::Config(format!(
                        "model.diffusion.components: entries must be < node_dim = {n}"
                    )));
                }
                let dim = n;
                DiffusionSpec::SharedScalar {
                    g: Box::new(move |_t, x, out| {
                        out.fill(0.0);
                        let scale = gamma / nodes as f64;
                        for &c in &components {
                            for i in 0..nodes {
                                let mut acc = 0.0;
                                for j in 0..nodes {
                                    acc += x[j * dim + c] - x[i * dim + c];
                                }
                                out[i * dim + c] = scale * acc;
                            }
                        }
                    }),
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "model.diffusion.kind: unknown kind `{other}`"
                )));
            }
        },
    };

    let sigma = m.sigma.unwrap_or(0.0);
    let mut sys = NetworkSystem::new(n, drift, sigma, graph.clone(), diffusion)?
        .with_label(format!("custom(n={n}, N={nodes}, sigma={sigma})"));
    if let Some(layer) = layer {
        sys = sys.with_noise_layer(layer)?;
    }
    Ok(sys)
}

/// Initial condition: pinned `integration.x0` when present, otherwise the
/// model's default distribution, drawn reproducibly from `seed`.
pub fn initial_state(
    config: &ExperimentConfig,
    system: &NetworkSystem,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    if let Some(x0) = &config.integration.x0 {
        if x0.len() != system.state_dim() {
            return Err(CliError::Config(format!(
                "integration.x0: expected {} values, got {}",
                system.state_dim(),
                x0.len()
            )));
        }
        return Ok(x0.clone());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, IC_SALT));
    let dim = system.state_dim();
    let values = match config.model.name.as_str() {
        // Oscillators start uniform in [-2, 2] per component.
        "fn_env" | "fn_full" => (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
        // Decision agents start from a wide normal (std 10).
        "ddm" => (0..dim)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr_standard_normal());
                10.0 * z
            })
            .collect(),
        _ => (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    Ok(values)
}

// Standard normal via Box-Muller (the CLI does not link rand_distr).
fn rand_distr_standard_normal() -> impl rand::distr::Distribution<f64> {
    struct BoxMuller;
    impl rand::distr::Distribution<f64> for BoxMuller {
        fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }
    BoxMuller
}

/// Certificate inputs with any `[constants]` overrides applied.
pub enum CertificateInputs {
    Coupling(CouplingConstants),
    Layer(NoiseLayerConstants),
}

pub fn certificate_inputs(
    config: &ExperimentConfig,
    graph: Option<&Graph>,
    layer_graph: Option<&Graph>,
) -> Result<CertificateInputs, CliError> {
    let m = &config.model;
    let mut inputs = match m.name.as_str() {
        "fn_env" => CertificateInputs::Coupling(fn_env_coupling_constants(
            m.b.unwrap_or(FN_DEFAULT_B),
            m.c.unwrap_or(FN_DEFAULT_C),
            m.gamma.unwrap_or(0.0),
            m.n_nodes.expect("validated"),
        )?),
        "fn_full" => CertificateInputs::Layer(fn_full_noise_layer_constants(
            m.b.unwrap_or(FN_DEFAULT_B),
            m.c.unwrap_or(FN_DEFAULT_C),
            m.gamma.unwrap_or(0.0),
            m.n_nodes.expect("validated"),
        )?),
        "ddm" => {
            CertificateInputs::Coupling(ddm_coupling_constants(graph.expect("validated"))?)
        }
        "linear_consensus" => {
            let graph = graph.expect("validated");
            let sigma = m.sigma.unwrap_or(1.0);
            match layer_graph {
                None => CertificateInputs::Coupling(linear_consensus_coupling_constants(
                    graph, sigma,
                )?),
                Some(lg) => {
                    let sigma_star = config
                        .noise_layer
                        .as_ref()
                        .and_then(|l| l.sigma_star)
                        .ok_or_else(|| {
                            CliError::Config(
                                "noise_layer.sigma_star: required to check a configured \
                                 noise layer (or use the design command)"
                                    .to_string(),
                            )
                        })?;
                    CertificateInputs::Layer(linear_consensus_noise_layer_constants(
                        graph, sigma, lg, sigma_star,
                    )?)
                }
            }
        }
        "custom" => custom_certificate_inputs(config, graph, layer_graph)?,
        _ => unreachable!("validated"),
    };
    apply_overrides(&mut inputs, config.constants.as_ref().unwrap_or(&Default::default()));
    Ok(inputs)
}

fn custom_certificate_inputs(
    config: &ExperimentConfig,
    graph: Option<&Graph>,
    layer_graph: Option<&Graph>,
) -> Result<CertificateInputs, CliError> {
    let pins = config.constants.clone().unwrap_or_default();
    let need = |name: &str, v: Option<f64>| {
        v.map(TaggedConstant::user).ok_or_else(|| {
            CliError::Config(format!(
                "constants.{name}: no closed form exists for model custom; pin it in \
                 [constants] to evaluate the condition"
            ))
        })
    };
    let graph = graph.expect("validated");
    let spectrum = graph.spectrum()?;
    let sigma =
        TaggedConstant::user(pins.sigma.unwrap_or(config.model.sigma.unwrap_or(0.0)));
    let lambda2 = pins
        .lambda2
        .map(TaggedConstant::user)
        .unwrap_or(TaggedConstant::numeric(spectrum.lambda2()));
    match layer_graph {
        None => Ok(CertificateInputs::Coupling(CouplingConstants {
            k_f: need("k_f", pins.k_f)?,
            k_g: need("k_g", pins.k_g)?,
            k_g_bar: need("k_g_bar", pins.k_g_bar)?,
            sigma,
            lambda2,
        })),
        Some(lg) => {
            let layer_spectrum = lg.spectrum()?;
            let sigma_star = pins
                .sigma_star
                .or(config.noise_layer.as_ref().and_then(|l| l.sigma_star));
            Ok(CertificateInputs::Layer(NoiseLayerConstants {
                k_f: need("k_f", pins.k_f)?,
                sigma,
                lambda2,
                sigma_star: need("sigma_star", sigma_star)?,
                lambda2_star: TaggedConstant::numeric(layer_spectrum.lambda2()),
                lambda_n_star: TaggedConstant::numeric(layer_spectrum.lambda_n()),
            }))
        }
    }
}

fn apply_overrides(inputs: &mut CertificateInputs, pins: &ConstantsSection) {
    let set = |slot: &mut TaggedConstant, v: Option<f64>| {
        if let Some(v) = v {
            *slot = TaggedConstant::user(v);
        }
    };
    match inputs {
        CertificateInputs::Coupling(c) => {
            set(&mut c.k_f, pins.k_f);
            set(&mut c.k_g, pins.k_g);
            set(&mut c.k_g_bar, pins.k_g_bar);
            set(&mut c.sigma, pins.sigma);
            set(&mut c.lambda2, pins.lambda2);
        }
        CertificateInputs::Layer(c) => {
            set(&mut c.k_f, pins.k_f);
            set(&mut c.sigma, pins.sigma);
            set(&mut c.lambda2, pins.lambda2);
            set(&mut c.sigma_star, pins.sigma_star);
            set(&mut c.lambda2_star, pins.lambda2_star);
            set(&mut c.lambda_n_star, pins.lambda_n_star);
        }
    }
}

/// The communication-side quantities the noise designer needs: drift
/// bound `K_f`, coupling `sigma`, and connectivity `lambda2`.
pub fn design_inputs(
    config: &ExperimentConfig,
    graph: Option<&Graph>,
) -> Result<(TaggedConstant, TaggedConstant, TaggedConstant), CliError> {
    let m = &config.model;
    let pins = config.constants.clone().unwrap_or_default();
    let (k_f, sigma, lambda2) = match m.name.as_str() {
        "fn_env" | "fn_full" => (
            TaggedConstant::closed_form(stosync::conditions::kf_fitzhugh_nagumo(
                m.b.unwrap_or(FN_DEFAULT_B),
                m.c.unwrap_or(FN_DEFAULT_C),
            )?),
            TaggedConstant::closed_form(0.0),
            TaggedConstant::closed_form(0.0),
        ),
        "ddm" => {
            let spectrum = graph.expect("validated").spectrum()?;
            (
                TaggedConstant::closed_form(1.0),
                TaggedConstant::closed_form(1.0),
                TaggedConstant::numeric(spectrum.lambda2()),
            )
        }
        "linear_consensus" => {
            let spectrum = graph.expect("validated").spectrum()?;
            (
                TaggedConstant::closed_form(0.0),
                TaggedConstant::user(m.sigma.unwrap_or(1.0)),
                TaggedConstant::numeric(spectrum.lambda2()),
            )
        }
        "custom" => {
            let spectrum = graph.expect("validated").spectrum()?;
            let k_f = pins.k_f.map(TaggedConstant::user).ok_or_else(|| {
                CliError::Config(
                    "constants.k_f: no closed form exists for model custom; pin it in \
                     [constants] to design a noise layer"
                        .to_string(),
                )
            })?;
            (
                k_f,
                TaggedConstant::user(m.sigma.unwrap_or(0.0)),
                TaggedConstant::numeric(spectrum.lambda2()),
            )
        }
        _ => unreachable!("validated"),
    };
    let or_pin = |slot: TaggedConstant, pin: Option<f64>| match pin {
        Some(v) => TaggedConstant::user(v),
        None => slot,
    };
    Ok((
        or_pin(k_f, pins.k_f),
        or_pin(sigma, pins.sigma),
        or_pin(lambda2, pins.lambda2),
    ))
}

/// Apply a sweep parameter value to a configuration copy.
pub fn apply_sweep_value(
    config: &mut ExperimentConfig,
    parameter: &str,
    value: f64,
) -> Result<(), CliError> {
    match parameter {
        "gamma" => match config.model.name.as_str() {
            "fn_env" | "fn_full" => {
                config.model.gamma = Some(value);
                Ok(())
            }
            "custom" if config.model.diffusion.is_some() => {
                config.model.diffusion.as_mut().unwrap().gamma = Some(value);
                Ok(())
            }
            other => Err(CliError::Config(format!(
                "sweep.parameter: model {other} has no gamma parameter"
            ))),
        },
        "sigma" => match config.model.name.as_str() {
            "linear_consensus" | "custom" => {
                config.model.sigma = Some(value);
                Ok(())
            }
            other => Err(CliError::Config(format!(
                "sweep.parameter: model {other} has no sweepable sigma"
            ))),
        },
        "sigma_star" => match &mut config.noise_layer {
            Some(layer) => {
                layer.sigma_star = Some(value);
                Ok(())
            }
            None => Err(CliError::Config(
                "sweep.parameter: sigma_star needs a [noise_layer] section".to_string(),
            )),
        },
        _ => unreachable!("validated"),
    }
}
