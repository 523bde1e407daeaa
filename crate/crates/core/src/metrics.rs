//! Quantifying synchronization from trajectories: deviation-from-mean
//! error, the order parameter, and fitted sample Lyapunov exponents.
//!
//! The synchronization error measures each node against the instantaneous
//! network mean. The deviation vector then satisfies `e^T 1 = 0` exactly,
//! which is the property the stability arguments rest on; this replaces
//! the reference trajectory that integrates the averaged drift.
//!
//! The order parameter
//!
//! ```text
//! R = (<M^2> - <M>^2) / avg_i(<x_i^2> - <x_i>^2)
//! ```
//!
//! compares the time variance of the network mean signal `M(t)` of one
//! chosen component against the node-averaged per-node time variance:
//! near 1 when the nodes move together, near `1/N` when they fluctuate
//! independently. Time averages run over `t >= transient_cut` only.

use alloc::vec;
use alloc::vec::Vec;

use crate::sde::Trajectory;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Errors from metric computation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    /// Synchronization metrics need at least two nodes.
    #[error("metrics need at least 2 nodes, got {got}")]
    NotEnoughNodes {
        /// Nodes in the trajectory.
        got: usize,
    },
    /// The selected component does not exist.
    #[error("component {component} out of range for node dimension {node_dim}")]
    ComponentOutOfRange {
        /// Requested component.
        component: usize,
        /// Per-node state dimension.
        node_dim: usize,
    },
    /// The analysis window holds too few samples.
    #[error("window holds {samples} samples, need at least {needed}")]
    WindowTooShort {
        /// Samples in the window.
        samples: usize,
        /// Minimum required.
        needed: usize,
    },
    /// Every node signal is constant over the window, so the order
    /// parameter denominator is zero.
    #[error("order parameter undefined: signals are constant over the window")]
    ConstantSignals,
    /// Every error sample in the window sits below the clipping floor.
    #[error("log fit impossible: all error samples at or below the 1e-300 floor")]
    AllClipped,
}

/// Synchronization metrics of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    /// Order parameter of the selected component.
    pub order_parameter: f64,
    /// Fitted sample Lyapunov exponent of the synchronization error
    /// (1/time units); `-inf` when the error hit exactly zero.
    pub lyapunov_estimate: f64,
    /// Window `(t_start, t_end)` of the Lyapunov fit.
    pub fit_window: (f64, f64),
    /// `max_i |x_i(T) - mean(T)|` at the final grid point.
    pub final_spread: f64,
    /// Absolute time before which samples are discarded.
    pub transient_cut: f64,
}

/// Euclidean norm of the deviation-from-mean vector at every grid point.
///
/// `e_i(t) = x_i(t) - (1/N) sum_j x_j(t)` per component; the result is
/// `|e(t)|` over all nodes and components. Identically zero on
/// synchronized trajectories and invariant under adding a common vector
/// to every node.
pub fn sync_error(traj: &Trajectory) -> Vec<f64> {
    let n = traj.node_dim();
    let nodes = traj.node_count();
    let points = traj.times().len();
    let mut out = vec![0.0; points];
    for k in 0..points {
        let state = traj.state(k);
        let mut acc = 0.0;
        for c in 0..n {
            let mut mean = 0.0;
            for i in 0..nodes {
                mean += state[i * n + c];
            }
            mean /= nodes as f64;
            for i in 0..nodes {
                let d = state[i * n + c] - mean;
                acc += d * d;
            }
        }
        out[k] = acc.sqrt();
    }
    out
}

/// Largest per-node deviation from the network mean at the final grid
/// point (Euclidean over components).
pub fn final_spread(traj: &Trajectory) -> f64 {
    let n = traj.node_dim();
    let nodes = traj.node_count();
    let state = traj.final_state();
    let mut means = vec![0.0; n];
    for c in 0..n {
        for i in 0..nodes {
            means[c] += state[i * n + c];
        }
        means[c] /= nodes as f64;
    }
    let mut worst = 0.0f64;
    for i in 0..nodes {
        let mut acc = 0.0;
        for c in 0..n {
            let d = state[i * n + c] - means[c];
            acc += d * d;
        }
        worst = worst.max(acc.sqrt());
    }
    worst
}

/// Order parameter of `component` over `t >= transient_cut`.
///
/// Needs at least 100 post-transient samples and a nonzero node-averaged
/// variance.
pub fn order_parameter(
    traj: &Trajectory,
    component: usize,
    transient_cut: f64,
) -> Result<f64, MetricsError> {
    let n = traj.node_dim();
    let nodes = traj.node_count();
    if nodes < 2 {
        return Err(MetricsError::NotEnoughNodes { got: nodes });
    }
    if component >= n {
        return Err(MetricsError::ComponentOutOfRange { component, node_dim: n });
    }
    let window: Vec<usize> = (0..traj.times().len())
        .filter(|&k| traj.times()[k] >= transient_cut)
        .collect();
    if window.len() < 100 {
        return Err(MetricsError::WindowTooShort { samples: window.len(), needed: 100 });
    }

    let count = window.len() as f64;
    // Mean signal M(t) and per-node signals share one pass for the means.
    let mut node_mean = vec![0.0; nodes];
    let mut mean_signal_mean = 0.0;
    for &k in &window {
        let state = traj.state(k);
        let mut m = 0.0;
        for i in 0..nodes {
            let v = state[i * n + component];
            node_mean[i] += v;
            m += v;
        }
        mean_signal_mean += m / nodes as f64;
    }
    for v in &mut node_mean {
        *v /= count;
    }
    mean_signal_mean /= count;

    let mut mean_signal_var = 0.0;
    let mut node_var = vec![0.0; nodes];
    for &k in &window {
        let state = traj.state(k);
        let mut m = 0.0;
        for i in 0..nodes {
            let v = state[i * n + component];
            let d = v - node_mean[i];
            node_var[i] += d * d;
            m += v;
        }
        let dm = m / nodes as f64 - mean_signal_mean;
        mean_signal_var += dm * dm;
    }
    mean_signal_var /= count;
    let denominator = node_var.iter().map(|v| v / count).sum::<f64>() / nodes as f64;
    if denominator <= 0.0 || !denominator.is_finite() {
        return Err(MetricsError::ConstantSignals);
    }
    Ok(mean_signal_var / denominator)
}

/// Least-squares slope of `log err(t)` over the window — the sample
/// Lyapunov exponent of the error signal.
///
/// The fit is robust to downward spikes: after an ordinary fit, the most
/// negative decile of residuals is discarded and the slope refitted.
/// Samples below `1e-300` are clipped to `1e-300`; an exact zero anywhere
/// in the window short-circuits to `-inf` (the error reached the
/// synchronous manifold identically).
pub fn lyapunov_fit(
    times: &[f64],
    err: &[f64],
    window: (f64, f64),
) -> Result<f64, MetricsError> {
    assert_eq!(times.len(), err.len(), "times and series must align");
    let idx: Vec<usize> = (0..times.len())
        .filter(|&k| times[k] >= window.0 && times[k] <= window.1)
        .collect();
    if idx.len() < 50 {
        return Err(MetricsError::WindowTooShort { samples: idx.len(), needed: 50 });
    }
    if idx.iter().any(|&k| err[k] == 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut clipped = 0usize;
    let points: Vec<(f64, f64)> = idx
        .iter()
        .map(|&k| {
            let mut v = err[k];
            if v < 1e-300 {
                v = 1e-300;
                clipped += 1;
            }
            (times[k], v.ln())
        })
        .collect();
    if clipped == idx.len() {
        return Err(MetricsError::AllClipped);
    }

    let (slope, intercept) = ols(&points);
    // Discard the bottom decile of residuals (stochastic dips), refit.
    let mut residuals: Vec<f64> =
        points.iter().map(|&(t, y)| y - (intercept + slope * t)).collect();
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let cutoff = sorted[points.len() / 10];
    let kept: Vec<(f64, f64)> = points
        .iter()
        .zip(residuals.drain(..))
        .filter_map(|(&p, r)| (r >= cutoff).then_some(p))
        .collect();
    let (slope, _) = if kept.len() >= 2 { ols(&kept) } else { (slope, intercept) };
    Ok(slope)
}

fn ols(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let tm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, y) in points {
        num += (t - tm) * (y - ym);
        den += (t - tm) * (t - tm);
    }
    let slope = num / den;
    (slope, ym - slope * tm)
}

/// Full metrics of a trajectory: order parameter of `component`,
/// Lyapunov fit of the synchronization error over
/// `[transient_cut, t_end]`, and the final spread.
pub fn compute_report(
    traj: &Trajectory,
    component: usize,
    transient_cut: f64,
) -> Result<MetricsReport, MetricsError> {
    if traj.node_count() < 2 {
        return Err(MetricsError::NotEnoughNodes { got: traj.node_count() });
    }
    let order = order_parameter(traj, component, transient_cut)?;
    let err = sync_error(traj);
    let t_end = *traj.times().last().expect("nonempty grid");
    let window = (transient_cut, t_end);
    let lyapunov = lyapunov_fit(traj.times(), &err, window)?;
    Ok(MetricsReport {
        order_parameter: order,
        lyapunov_estimate: lyapunov,
        fit_window: window,
        final_spread: final_spread(traj),
        transient_cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::models;
    use crate::sde::{simulate, DiffusionSpec, NetworkSystem};
    use alloc::boxed::Box;
    use proptest::prelude::*;

    /// Synthetic trajectory from a per-node, per-component signal
    /// function.
    fn synthetic(
        node_dim: usize,
        node_count: usize,
        steps: usize,
        dt: f64,
        f: impl Fn(usize, usize, f64) -> f64,
    ) -> Trajectory {
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        let mut states = Vec::with_capacity(times.len() * node_dim * node_count);
        for &t in &times {
            for i in 0..node_count {
                for c in 0..node_dim {
                    states.push(f(i, c, t));
                }
            }
        }
        Trajectory::from_parts(node_dim, node_count, times, states).unwrap()
    }

    #[test]
    fn sync_error_is_zero_on_synchronous_trajectories() {
        let traj = synthetic(2, 4, 100, 0.1, |_i, c, t| (t + c as f64).sin());
        for v in sync_error(&traj) {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn sync_error_of_two_antipodal_nodes_is_sqrt_two() {
        let traj = synthetic(1, 2, 60, 0.1, |i, _c, _t| if i == 0 { 1.0 } else { -1.0 });
        for v in sync_error(&traj) {
            assert!((v - 2.0f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn consensus_error_decays_at_the_complete_graph_rate() {
        // On the complete graph all transverse modes contract by
        // (1 - N sigma dt) per Euler step, so |e| follows that geometric
        // envelope and the fitted exponent is ~ -N sigma.
        let sigma = 1.0;
        let dt = 1e-3;
        let sys = models::linear_consensus_system(Graph::complete(5), sigma, None).unwrap();
        let x0 = [2.0, -1.0, 0.5, 1.5, -3.0];
        let traj = simulate(&sys, &x0, 0.0, 4.0, dt, 0).unwrap();
        let err = sync_error(&traj);
        let per_step = 1.0 - 5.0 * sigma * dt;
        let expected_final = err[0] * per_step.powi(traj.step_count() as i32);
        assert!(
            (err[traj.step_count()] - expected_final).abs() <= 1e-6 * expected_final,
            "{} vs {expected_final}",
            err[traj.step_count()]
        );

        let exponent = lyapunov_fit(traj.times(), &err, (0.0, 4.0)).unwrap();
        assert!((exponent + 5.0).abs() < 0.05, "{exponent}");
    }

    #[test]
    fn order_parameter_is_one_for_identical_signals() {
        let traj = synthetic(1, 8, 400, 0.05, |_i, _c, t| t.sin());
        let r = order_parameter(&traj, 0, 5.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn order_parameter_of_independent_noise_scales_as_one_over_n() {
        // N independent Ornstein-Uhlenbeck signals: variance of the mean
        // is 1/N of the node variance.
        let n_nodes = 10;
        let sys = NetworkSystem::new(
            1,
            Box::new(|_t, x: &[f64], out: &mut [f64]| out[0] = -x[0]),
            0.0,
            Graph::new(n_nodes, []).unwrap(),
            DiffusionSpec::PerNodeIndependent {
                channels_per_node: 1,
                g: Box::new(|_t, _x, _i, out: &mut [f64]| out[0] = 0.5),
            },
        )
        .unwrap();
        let mut sum = 0.0;
        let seeds = 20;
        for seed in 0..seeds {
            let x0 = alloc::vec![0.0; n_nodes];
            let traj = simulate(&sys, &x0, 0.0, 400.0, 0.01, seed).unwrap();
            sum += order_parameter(&traj, 0, 120.0).unwrap();
        }
        let mean_r = sum / seeds as f64;
        assert!((mean_r - 0.1).abs() < 0.05, "mean R = {mean_r}");
    }

    #[test]
    fn lyapunov_fit_recovers_exact_exponential_decay() {
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
        let err: Vec<f64> = times.iter().map(|t| 3.0 * (-2.0 * t).exp()).collect();
        let slope = lyapunov_fit(&times, &err, (0.0, 10.0)).unwrap();
        assert!((slope + 2.0).abs() < 1e-6, "{slope}");
    }

    #[test]
    fn lyapunov_fit_reports_negative_infinity_on_exact_zero() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let mut err = alloc::vec![1.0; 101];
        err[60] = 0.0;
        assert_eq!(
            lyapunov_fit(&times, &err, (0.0, 10.0)).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn lyapunov_fit_clips_subnormal_errors() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        // All samples below the floor: no information left.
        let err = alloc::vec![1e-305; 101];
        assert!(matches!(
            lyapunov_fit(&times, &err, (0.0, 10.0)),
            Err(MetricsError::AllClipped)
        ));
    }

    #[test]
    fn lyapunov_fit_rejects_short_windows() {
        let times: Vec<f64> = (0..=30).map(|k| k as f64).collect();
        let err = alloc::vec![1.0; 31];
        assert!(matches!(
            lyapunov_fit(&times, &err, (0.0, 30.0)),
            Err(MetricsError::WindowTooShort { .. })
        ));
    }

    #[test]
    fn order_parameter_errors() {
        // Constant signals: undefined denominator.
        let traj = synthetic(1, 3, 200, 0.1, |i, _c, _t| i as f64);
        assert!(matches!(
            order_parameter(&traj, 0, 0.0),
            Err(MetricsError::ConstantSignals)
        ));
        // Component out of range.
        assert!(matches!(
            order_parameter(&traj, 3, 0.0),
            Err(MetricsError::ComponentOutOfRange { .. })
        ));
        // Window too short.
        assert!(matches!(
            order_parameter(&traj, 0, 19.5),
            Err(MetricsError::WindowTooShort { .. })
        ));
    }

    #[test]
    fn final_spread_measures_the_worst_node() {
        let traj = synthetic(1, 4, 10, 0.1, |i, _c, t| {
            if t >= 0.99 && i == 2 {
                5.0
            } else {
                1.0
            }
        });
        // Final state (1, 1, 5, 1): mean 2, worst deviation 3.
        assert!((final_spread(&traj) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn report_on_a_synchronizing_system() {
        let layer = crate::sde::NoiseLayer { graph: Graph::complete(4), strength: 0.6 };
        let sys = models::linear_consensus_system(
            Graph::new(4, []).unwrap(),
            0.0,
            Some(layer),
        )
        .unwrap();
        let traj = simulate(&sys, &[1.0, -1.0, 0.5, 0.25], 0.0, 20.0, 1e-3, 9).unwrap();
        let report = compute_report(&traj, 0, 6.0).unwrap();
        assert!(report.lyapunov_estimate < 0.0);
        assert!(report.final_spread < 1e-2);
        assert_eq!(report.fit_window.0, 6.0);
        assert_eq!(report.transient_cut, 6.0);
    }

    proptest! {
        /// Adding a common offset to every node leaves the error series
        /// unchanged.
        #[test]
        fn sync_error_is_translation_invariant(
            offset in -50.0f64..50.0,
            phase in 0.0f64..6.0,
        ) {
            let base = synthetic(1, 3, 200, 0.05, |i, _c, t| (t + i as f64).sin() + i as f64);
            let shifted = synthetic(1, 3, 200, 0.05, |i, _c, t| {
                (t + i as f64).sin() + i as f64 + offset + phase
            });
            let e1 = sync_error(&base);
            let e2 = sync_error(&shifted);
            for (a, b) in e1.iter().zip(&e2) {
                prop_assert!((a - b).abs() < 1e-9 * (1.0 + offset.abs()));
            }
        }

        /// R is invariant under affine rescaling applied to all nodes and
        /// always lies in [0, 1] up to rounding.
        #[test]
        fn order_parameter_affine_invariance_and_bounds(
            alpha in prop::sample::select(alloc::vec![-3.0f64, -0.5, 0.25, 2.0]),
            beta in -5.0f64..5.0,
            seed in 0u64..200,
        ) {
            // Random-ish distinguishable node signals.
            let freq = 1.0 + (seed % 7) as f64 * 0.3;
            let base = synthetic(1, 4, 300, 0.05, |i, _c, t| {
                (freq * t + i as f64).sin() + 0.2 * i as f64 * t.cos()
            });
            let scaled = synthetic(1, 4, 300, 0.05, |i, _c, t| {
                alpha * ((freq * t + i as f64).sin() + 0.2 * i as f64 * t.cos()) + beta
            });
            let r1 = order_parameter(&base, 0, 0.0).unwrap();
            let r2 = order_parameter(&scaled, 0, 0.0).unwrap();
            prop_assert!((r1 - r2).abs() < 1e-9, "{r1} vs {r2}");
            prop_assert!(r1 >= 0.0);
            prop_assert!(r1 <= 1.0 + 1e-12);
        }
    }
}
