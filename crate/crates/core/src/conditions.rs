//! Algebraic sufficient conditions for almost-sure exponential
//! synchronization, estimators for the constants they consume, and a
//! designer for noise-layer strengths.
//!
//! Two certificates are implemented:
//!
//! - **Coupling threshold** — the network synchronizes despite noise if
//!   `sigma * lambda_2 > K_f + (K_g^2 - 2 Kbar_g^2) / 2`, where `K_f` is
//!   the one-sided quadratic (QUAD) bound on the drift, `K_g` bounds the
//!   diffusion gain, and `Kbar_g` bounds its persistence along the
//!   deviation direction.
//! - **Noise-layer design** — injected noise over a second graph
//!   synchronizes the network if
//!   `(sigma*)^2 ((lambda2*)^2 - (lambdaN*)^2 / 2) > K_f - sigma * lambda_2`.
//!
//! Both conditions are sufficient only. A failed certificate means "not
//! certified", never "will not synchronize"; margins are always reported
//! so borderline cases are visible.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::graph::{Graph, GraphError};
use crate::linalg::{self, norm2, LinalgError, Matrix};
use crate::sde::NetworkSystem;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Errors from certificate evaluation and constant estimation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionsError {
    /// A constant that must be finite is not.
    #[error("constant {name} is not finite")]
    NonFiniteConstant {
        /// Name of the offending constant.
        name: &'static str,
    },
    /// A constant that must be nonnegative is negative.
    #[error("constant {name} = {value} must be >= 0")]
    NegativeConstant {
        /// Name of the offending constant.
        name: &'static str,
        /// Offending value.
        value: f64,
    },
    /// Layer eigenvalues are out of order.
    #[error("lambda2* = {lambda2_star} exceeds lambdaN* = {lambda_n_star}")]
    EigenvalueOrder {
        /// Claimed algebraic connectivity of the layer.
        lambda2_star: f64,
        /// Claimed largest eigenvalue of the layer.
        lambda_n_star: f64,
    },
    /// A sampling or design argument is unusable.
    #[error("invalid argument: {what}")]
    InvalidArgument {
        /// Description of the violated constraint.
        what: String,
    },
    /// The drift produced a non-finite value inside the sampling box.
    #[error("drift produced a non-finite value inside the sampling box")]
    NonFiniteDrift,
    /// The diffusion does not vanish on synchronous states, so the
    /// gain/persistence constants are meaningless for it.
    #[error(
        "diffusion does not vanish on synchronous states \
         (worst entry {worst:e}); the certificates do not apply"
    )]
    DiffusionNotVanishing {
        /// Largest diffusion entry seen on a synchronous state.
        worst: f64,
    },
    /// Every sampled deviation was too small to divide by.
    #[error("no usable samples (all deviations numerically zero)")]
    NoValidSamples,
    /// The noise layer must be connected to certify anything.
    #[error("noise layer graph is disconnected (lambda2* = {lambda2_star:e})")]
    LayerDisconnected {
        /// Computed algebraic connectivity of the layer.
        lambda2_star: f64,
    },
    /// The layer spectrum makes the left side nonpositive.
    #[error(
        "layer topology cannot certify synchronization; choose a layer with \
         lambda2*/lambdaN* > 1/sqrt(2) (e.g. a complete graph, ratio 1)"
    )]
    LayerCannotCertify {
        /// Algebraic connectivity of the layer.
        lambda2_star: f64,
        /// Largest layer eigenvalue.
        lambda_n_star: f64,
    },
    /// Spectrum computation failed.
    #[error(transparent)]
    Graph(#[from] GraphError),
    /// Dense eigensolver failed.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How a constant entering a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    /// Derived in closed form.
    ClosedForm,
    /// Estimated by sampling; a lower bound for suprema and an upper bound
    /// for infima — never a proven global bound.
    NumericEstimate,
    /// Supplied by the user or a configuration file.
    UserSupplied,
}

/// A constant together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaggedConstant {
    /// Numeric value.
    pub value: f64,
    /// How the value was obtained.
    pub provenance: Provenance,
}

impl TaggedConstant {
    /// A closed-form constant.
    pub fn closed_form(value: f64) -> Self {
        TaggedConstant { value, provenance: Provenance::ClosedForm }
    }

    /// A sampled numeric estimate.
    pub fn numeric(value: f64) -> Self {
        TaggedConstant { value, provenance: Provenance::NumericEstimate }
    }

    /// A user-supplied value.
    pub fn user(value: f64) -> Self {
        TaggedConstant { value, provenance: Provenance::UserSupplied }
    }
}

/// Inputs of the coupling-threshold certificate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingConstants {
    /// QUAD bound on the drift.
    pub k_f: TaggedConstant,
    /// Diffusion gain bound (Frobenius, `>= 0`).
    pub k_g: TaggedConstant,
    /// Diffusion persistence bound (`>= 0`).
    pub k_g_bar: TaggedConstant,
    /// Deterministic coupling strength (`>= 0`).
    pub sigma: TaggedConstant,
    /// Algebraic connectivity of the communication graph.
    pub lambda2: TaggedConstant,
}

/// Inputs of the noise-layer-design certificate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseLayerConstants {
    /// QUAD bound on the drift.
    pub k_f: TaggedConstant,
    /// Deterministic coupling strength (`>= 0`).
    pub sigma: TaggedConstant,
    /// Algebraic connectivity of the communication graph.
    pub lambda2: TaggedConstant,
    /// Noise gain of the layer (`>= 0`).
    pub sigma_star: TaggedConstant,
    /// Algebraic connectivity of the layer (`>= 0`).
    pub lambda2_star: TaggedConstant,
    /// Largest layer eigenvalue (`>= lambda2_star`).
    pub lambda_n_star: TaggedConstant,
}

/// Which sufficient condition a certificate evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SyncCondition {
    /// Coupling strength and topology overcome the noise threshold.
    CouplingThreshold,
    /// A designed noise layer induces synchronization.
    NoiseLayerDesign,
}

/// A named constant inside a certificate report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NamedConstant {
    /// Report name (e.g. `K_f`).
    pub name: String,
    /// Value.
    pub value: f64,
    /// Provenance tag.
    pub provenance: Provenance,
}

/// The outcome of evaluating a sufficient synchronization condition.
///
/// `verdict` is exactly `margin > 0`. A `false` verdict means the
/// condition did not certify synchronization — the conditions are
/// one-directional, so it never means the network will fail to
/// synchronize.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyncCertificate {
    /// Which condition was evaluated.
    pub condition: SyncCondition,
    /// Constants entering the inequality, with provenance.
    pub constants: Vec<NamedConstant>,
    /// Left-hand side of the inequality.
    pub lhs: f64,
    /// Right-hand side of the inequality.
    pub rhs: f64,
    /// `lhs - rhs`.
    pub margin: f64,
    /// `margin > 0`.
    pub verdict: bool,
    /// Human-readable form of the inequality.
    pub inequality: String,
}

impl core::fmt::Display for SyncCertificate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "condition: {}", self.inequality)?;
        for c in &self.constants {
            writeln!(f, "  {:>12} = {:<22} [{:?}]", c.name, c.value, c.provenance)?;
        }
        writeln!(f, "  lhs = {}, rhs = {}, margin = {}", self.lhs, self.rhs, self.margin)?;
        write!(
            f,
            "  verdict: {}",
            if self.verdict { "certified" } else { "not certified (sufficient condition not met)" }
        )
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<(), ConditionsError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ConditionsError::NonFiniteConstant { name })
    }
}

fn require_nonnegative(name: &'static str, value: f64) -> Result<(), ConditionsError> {
    require_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ConditionsError::NegativeConstant { name, value })
    }
}

/// Evaluate the coupling-threshold condition
/// `sigma * lambda2 > K_f + (K_g^2 - 2 Kbar_g^2) / 2`.
pub fn check_coupling_sync(c: &CouplingConstants) -> Result<SyncCertificate, ConditionsError> {
    require_finite("K_f", c.k_f.value)?;
    require_finite("lambda2", c.lambda2.value)?;
    require_nonnegative("K_g", c.k_g.value)?;
    require_nonnegative("Kbar_g", c.k_g_bar.value)?;
    require_nonnegative("sigma", c.sigma.value)?;

    let lhs = c.sigma.value * c.lambda2.value;
    let kg2 = c.k_g.value * c.k_g.value;
    let kbar2 = c.k_g_bar.value * c.k_g_bar.value;
    let rhs = c.k_f.value + (kg2 - 2.0 * kbar2) / 2.0;
    let margin = lhs - rhs;
    Ok(SyncCertificate {
        condition: SyncCondition::CouplingThreshold,
        constants: vec![
            named("K_f", c.k_f),
            named("K_g", c.k_g),
            named("Kbar_g", c.k_g_bar),
            named("sigma", c.sigma),
            named("lambda2", c.lambda2),
        ],
        lhs,
        rhs,
        margin,
        verdict: margin > 0.0,
        inequality: String::from("sigma*lambda2 > K_f + (K_g^2 - 2*Kbar_g^2)/2"),
    })
}

/// Evaluate the noise-layer-design condition
/// `(sigma*)^2 ((lambda2*)^2 - (lambdaN*)^2 / 2) > K_f - sigma * lambda2`.
pub fn check_noise_layer_sync(
    c: &NoiseLayerConstants,
) -> Result<SyncCertificate, ConditionsError> {
    require_finite("K_f", c.k_f.value)?;
    require_finite("lambda2", c.lambda2.value)?;
    require_nonnegative("sigma", c.sigma.value)?;
    require_nonnegative("sigma_star", c.sigma_star.value)?;
    require_nonnegative("lambda2_star", c.lambda2_star.value)?;
    require_nonnegative("lambdaN_star", c.lambda_n_star.value)?;
    if c.lambda2_star.value > c.lambda_n_star.value {
        return Err(ConditionsError::EigenvalueOrder {
            lambda2_star: c.lambda2_star.value,
            lambda_n_star: c.lambda_n_star.value,
        });
    }

    let s2 = c.sigma_star.value * c.sigma_star.value;
    let l2 = c.lambda2_star.value * c.lambda2_star.value;
    let ln = c.lambda_n_star.value * c.lambda_n_star.value;
    let lhs = s2 * (l2 - ln / 2.0);
    let rhs = c.k_f.value - c.sigma.value * c.lambda2.value;
    let margin = lhs - rhs;
    Ok(SyncCertificate {
        condition: SyncCondition::NoiseLayerDesign,
        constants: vec![
            named("K_f", c.k_f),
            named("sigma", c.sigma),
            named("lambda2", c.lambda2),
            named("sigma_star", c.sigma_star),
            named("lambda2_star", c.lambda2_star),
            named("lambdaN_star", c.lambda_n_star),
        ],
        lhs,
        rhs,
        margin,
        verdict: margin > 0.0,
        inequality: String::from(
            "(sigma*)^2*((lambda2*)^2 - (lambdaN*)^2/2) > K_f - sigma*lambda2",
        ),
    })
}

fn named(name: &str, c: TaggedConstant) -> NamedConstant {
    NamedConstant { name: String::from(name), value: c.value, provenance: c.provenance }
}

/// Closed-form QUAD constant of the FitzHugh-Nagumo drift: the largest
/// eigenvalue of the symmetric part of its Jacobian, attained at `v = 0`:
///
/// ```text
/// K_f = (-b + c^2 + sqrt(1 + b^2 + 2(b-1)c^2 + 2c^4)) / (2c)
/// ```
///
/// Requires `c > 0` (the maximum-at-zero argument uses the sign of `c`).
pub fn kf_fitzhugh_nagumo(b: f64, c: f64) -> Result<f64, ConditionsError> {
    if !(c > 0.0) || !c.is_finite() || !b.is_finite() {
        return Err(ConditionsError::InvalidArgument {
            what: format!("kf closed form needs finite b and c > 0 (got b={b}, c={c})"),
        });
    }
    let c2 = c * c;
    let inner = 1.0 + b * b + 2.0 * (b - 1.0) * c2 + 2.0 * c2 * c2;
    Ok((-b + c2 + inner.sqrt()) / (2.0 * c))
}

/// Sampled estimate of the QUAD constant of an arbitrary drift: the
/// maximum over sampled points of the largest eigenvalue of the symmetric
/// part of the Jacobian (central differences, step `1e-5 *` box
/// half-width per dimension).
///
/// The drift is evaluated at `t = 0`; the constant is only meaningful for
/// drifts whose Jacobian does not depend on time (an additive shared
/// stimulus cancels from drift differences and is fine).
///
/// The result is a sampled lower bound on the true supremum — tag it
/// [`Provenance::NumericEstimate`], never treat it as a proven global
/// bound.
pub fn estimate_kf(
    drift: impl Fn(f64, &[f64], &mut [f64]),
    dim: usize,
    domain: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<f64, ConditionsError> {
    validate_box(domain, dim)?;
    if samples == 0 {
        return Err(ConditionsError::InvalidArgument {
            what: String::from("samples must be >= 1"),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let points = latin_hypercube(&mut rng, domain, samples);

    let mut fp = vec![0.0; dim];
    let mut fm = vec![0.0; dim];
    let mut probe = vec![0.0; dim];
    let mut best = f64::NEG_INFINITY;
    for s in 0..samples {
        let x = &points[s * dim..(s + 1) * dim];
        let mut jac = Matrix::zeros(dim);
        for col in 0..dim {
            let h = 1e-5 * 0.5 * (domain[col].1 - domain[col].0);
            probe.copy_from_slice(x);
            probe[col] = x[col] + h;
            drift(0.0, &probe, &mut fp);
            probe[col] = x[col] - h;
            drift(0.0, &probe, &mut fm);
            for row in 0..dim {
                let d = (fp[row] - fm[row]) / (2.0 * h);
                if !d.is_finite() {
                    return Err(ConditionsError::NonFiniteDrift);
                }
                jac.set(row, col, d);
            }
        }
        let sym = jac.symmetric_part();
        let eigs = linalg::sym_eigenvalues(&sym)?;
        best = best.max(*eigs.last().expect("dim >= 1"));
    }
    Ok(best)
}

/// Sampled diffusion constants of a network system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiffusionConstants {
    /// Gain bound estimate: `max ||G(X)||_F / |e|` over samples (a lower
    /// bound on the supremum).
    pub k_g: TaggedConstant,
    /// Persistence bound estimate: `min |e^T G(X)| / |e|^2` over samples
    /// (an upper bound on the infimum).
    pub k_g_bar: TaggedConstant,
}

/// Estimate the diffusion gain and persistence constants of `sys` by
/// sampling states in a per-node-component box.
///
/// First verifies that the diffusion vanishes exactly on synchronous
/// states (a structural requirement of the certificates); then samples a
/// Latin hypercube over the full network state space plus one axis probe
/// per (node, component) so single-direction deviations are always
/// covered.
pub fn estimate_diffusion_constants(
    sys: &NetworkSystem,
    samples: usize,
    domain: &[(f64, f64)],
    seed: u64,
) -> Result<DiffusionConstants, ConditionsError> {
    let n = sys.node_dim();
    let nodes = sys.node_count();
    validate_box(domain, n)?;
    if samples == 0 {
        return Err(ConditionsError::InvalidArgument {
            what: String::from("samples must be >= 1"),
        });
    }

    let dim = sys.state_dim();
    let cols = sys.diffusion_channels();
    let mut gbuf = vec![0.0; dim * cols];

    // Structural precheck: G must vanish exactly when all nodes agree.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sync_probes = latin_hypercube(&mut rng, domain, 64);
    for s in 0..64 {
        let node = &sync_probes[s * n..(s + 1) * n];
        let mut state = Vec::with_capacity(dim);
        for _ in 0..nodes {
            state.extend_from_slice(node);
        }
        sys.diffusion_matrix(0.0, &state, &mut gbuf);
        let worst = gbuf.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if worst != 0.0 {
            return Err(ConditionsError::DiffusionNotVanishing { worst });
        }
    }

    // Sampling set: Latin hypercube over the full state space, plus axis
    // probes around the box center.
    let full_domain: Vec<(f64, f64)> = core::iter::repeat(domain)
        .take(nodes)
        .flat_map(|d| d.iter().copied())
        .collect();
    let lhs_points = latin_hypercube(&mut rng, &full_domain, samples);

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let center: Vec<f64> = domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    for i in 0..nodes {
        for c in 0..n {
            for sign in [1.0, -1.0] {
                let mut state = Vec::with_capacity(dim);
                for _ in 0..nodes {
                    state.extend_from_slice(&center);
                }
                state[i * n + c] += sign * 0.25 * (domain[c].1 - domain[c].0);
                candidates.push(state);
            }
        }
    }

    let scale: f64 = domain.iter().map(|(lo, hi)| (hi - lo).abs()).fold(0.0, f64::max);
    let mut k_g = 0.0f64;
    let mut k_g_bar = f64::INFINITY;
    let mut usable = 0usize;
    let mut deviation = vec![0.0; dim];
    let mut row = vec![0.0; cols];

    let mut evaluate = |state: &[f64],
                        gbuf: &mut Vec<f64>,
                        deviation: &mut Vec<f64>,
                        row: &mut Vec<f64>| {
        // Deviation from the per-component network mean.
        for c in 0..n {
            let mut mean = 0.0;
            for i in 0..nodes {
                mean += state[i * n + c];
            }
            mean /= nodes as f64;
            for i in 0..nodes {
                deviation[i * n + c] = state[i * n + c] - mean;
            }
        }
        let e_norm = norm2(deviation);
        if e_norm <= 1e-9 * scale {
            return false;
        }
        sys.diffusion_matrix(0.0, state, gbuf);
        let frob = norm2(gbuf);
        k_g = k_g.max(frob / e_norm);

        for (col, r) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for rix in 0..dim {
                acc += deviation[rix] * gbuf[rix * cols + col];
            }
            *r = acc;
        }
        k_g_bar = k_g_bar.min(norm2(row) / (e_norm * e_norm));
        true
    };

    for s in 0..samples {
        let state = &lhs_points[s * dim..(s + 1) * dim];
        usable += usize::from(evaluate(state, &mut gbuf, &mut deviation, &mut row));
    }
    for state in &candidates {
        usable += usize::from(evaluate(state, &mut gbuf, &mut deviation, &mut row));
    }
    if usable == 0 {
        return Err(ConditionsError::NoValidSamples);
    }
    Ok(DiffusionConstants {
        k_g: TaggedConstant::numeric(k_g),
        k_g_bar: TaggedConstant::numeric(k_g_bar),
    })
}

/// Design the noise strength `sigma*` for a given layer topology so the
/// noise-layer certificate holds:
///
/// - already-certified systems (`K_f - sigma lambda_2 < 0`) need no noise
///   and get `sigma* = 0`;
/// - otherwise `sigma* = safety * sqrt(deficit / ((lambda2*)^2 -
///   (lambdaN*)^2/2))`, which passes the certificate for `safety > 1`. A
///   deficit of exactly zero still needs strictly positive noise for the
///   strict inequality, so the designer substitutes a unit deficit there.
///
/// Fails when the layer is disconnected or its spectrum makes the left
/// side nonpositive (`lambda2*/lambdaN* <= 1/sqrt(2)`).
pub fn design_noise_strength(
    k_f: f64,
    sigma: f64,
    lambda2: f64,
    layer_graph: &Graph,
    safety: f64,
) -> Result<f64, ConditionsError> {
    require_finite("K_f", k_f)?;
    require_nonnegative("sigma", sigma)?;
    require_nonnegative("lambda2", lambda2)?;
    if !(safety >= 1.0) || !safety.is_finite() {
        return Err(ConditionsError::InvalidArgument {
            what: format!("safety factor {safety} must be >= 1"),
        });
    }
    let spectrum = layer_graph.spectrum()?;
    if !spectrum.is_connected_default() {
        return Err(ConditionsError::LayerDisconnected { lambda2_star: spectrum.lambda2() });
    }
    let l2 = spectrum.lambda2();
    let ln = spectrum.lambda_n();

    // Deficits within rounding of zero (e.g. sigma * lambda2 carrying
    // eigensolver dust on a disconnected graph) are treated as exactly
    // zero rather than trusted for a sign.
    let deficit = k_f - sigma * lambda2;
    let zero_band = 1e-12 * k_f.abs().max(sigma * lambda2).max(1.0);
    if deficit < -zero_band {
        return Ok(0.0);
    }
    let denom = l2 * l2 - ln * ln / 2.0;
    if denom <= 0.0 {
        return Err(ConditionsError::LayerCannotCertify {
            lambda2_star: l2,
            lambda_n_star: ln,
        });
    }
    let effective = if deficit <= zero_band { 1.0 } else { deficit };
    Ok(safety * (effective / denom).sqrt())
}

/// An almost-sure exponential stability rate bound in the Lyapunov
/// framework: a function `V` with `c1 |x|^p <= V^p`, `LV <= c2 V`, and
/// `|V_x g|^2 >= c3 V^2` forces
/// `limsup (1/t) log |x(t)| <= -(c3 - 2 c2)/p` almost surely, so the
/// trivial solution is a.s. exponentially stable when `c3 > 2 c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityRateBound {
    /// Exponent `p > 0`.
    pub p: f64,
    /// Lower-bound constant `c1 > 0` (normalized to 1 here; it does not
    /// enter the rate).
    pub c1: f64,
    /// Generator bound `LV <= c2 V`.
    pub c2: f64,
    /// Noise persistence bound `|V_x g|^2 >= c3 V^2`, `c3 >= 0`.
    pub c3: f64,
    /// The guaranteed rate `-(c3 - 2 c2) / p`.
    pub rate_bound: f64,
    /// `c3 > 2 c2`: the rate bound is negative, stability certified.
    pub stable: bool,
}

/// Evaluate the stability rate bound from `c2`, `c3`, and `p`.
pub fn stability_rate_bound(
    c2: f64,
    c3: f64,
    p: f64,
) -> Result<StabilityRateBound, ConditionsError> {
    require_finite("c2", c2)?;
    require_nonnegative("c3", c3)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(ConditionsError::InvalidArgument {
            what: format!("p = {p} must be > 0"),
        });
    }
    Ok(StabilityRateBound {
        p,
        c1: 1.0,
        c2,
        c3,
        rate_bound: -(c3 - 2.0 * c2) / p,
        stable: c3 > 2.0 * c2,
    })
}

fn validate_box(domain: &[(f64, f64)], dim: usize) -> Result<(), ConditionsError> {
    if domain.len() != dim {
        return Err(ConditionsError::InvalidArgument {
            what: format!("domain has {} dimensions, expected {dim}", domain.len()),
        });
    }
    for (i, (lo, hi)) in domain.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
            return Err(ConditionsError::InvalidArgument {
                what: format!("degenerate box in dimension {i}: [{lo}, {hi}]"),
            });
        }
    }
    Ok(())
}

/// Latin hypercube sample: `samples` points over `domain`, flattened
/// row-major (`samples x domain.len()`); every dimension is stratified
/// into `samples` equal slices.
fn latin_hypercube(rng: &mut ChaCha12Rng, domain: &[(f64, f64)], samples: usize) -> Vec<f64> {
    let dim = domain.len();
    let mut points = vec![0.0; samples * dim];
    let mut strata: Vec<usize> = (0..samples).collect();
    for (d, (lo, hi)) in domain.iter().enumerate() {
        // Fisher-Yates reshuffle per dimension.
        for i in (1..samples).rev() {
            let j = rng.random_range(0..=i);
            strata.swap(i, j);
        }
        let width = (hi - lo) / samples as f64;
        for s in 0..samples {
            let u: f64 = rng.random_range(0.0..1.0);
            points[s * dim + d] = lo + (strata[s] as f64 + u) * width;
        }
    }
    points
}
