//! The five subcommands: simulate, check, design, sweep, graph-info.

use std::path::Path;

use rayon::prelude::*;

use stosync::conditions::{
    check_coupling_sync, check_noise_layer_sync, design_noise_strength,
    estimate_diffusion_constants, CouplingConstants, NoiseLayerConstants, SyncCertificate,
    TaggedConstant,
};
use stosync::graph::{Graph, LaplacianSpectrum};
use stosync::metrics::{compute_report, MetricsError};
use stosync::sde::{derive_seed, simulate};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::gformat::format_g;
use crate::model::{
    self, apply_sweep_value, build_system, certificate_inputs, initial_state, CertificateInputs,
};
use crate::output::{
    metrics_json, sweep_csv, to_pretty_json, write_atomic, write_trajectory_csv, SweepRow,
};
use crate::svg::{render_chart, Series, SeriesKind};

fn transient_cut_time(config: &ExperimentConfig) -> f64 {
    let t0 = config.integration.t0;
    t0 + config.metrics.transient_cut * (config.integration.t_end - t0)
}

pub fn cmd_simulate(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let graph = config.build_graph(base_dir)?;
    let layer_graph = config.build_noise_layer_graph(base_dir)?;
    let built = build_system(config, graph.as_ref(), layer_graph.as_ref(), None)?;
    for w in &built.warnings {
        eprintln!("warning: {w}");
    }

    let seed = config.integration.seed;
    let x0 = initial_state(config, &built.system, seed)?;
    let traj = simulate(
        &built.system,
        &x0,
        config.integration.t0,
        config.integration.t_end,
        config.integration.dt,
        seed,
    )?;

    let csv_path = out_dir.join("trajectory.csv");
    write_trajectory_csv(&csv_path, &traj)?;

    let cut = transient_cut_time(config);
    let metrics_value = match compute_report(&traj, config.metrics.component, cut) {
        Ok(report) => {
            println!(
                "order parameter R = {:.4}, lyapunov = {}, final spread = {}",
                report.order_parameter,
                format_g(report.lyapunov_estimate, 6),
                format_g(report.final_spread, 6)
            );
            metrics_json(&report)
        }
        Err(e @ (MetricsError::NotEnoughNodes { .. } | MetricsError::ConstantSignals)) => {
            eprintln!("warning: metrics unavailable: {e}");
            serde_json::json!({ "unavailable": e.to_string() })
        }
        Err(other) => return Err(other.into()),
    };
    write_atomic(&out_dir.join("metrics.json"), &to_pretty_json(&metrics_value))?;

    if config.outputs.plot {
        let comp = config.metrics.component;
        let series: Vec<Series> = (0..traj.node_count())
            .map(|node| Series {
                label: format!("node {node}"),
                kind: SeriesKind::Line,
                points: traj
                    .times()
                    .iter()
                    .copied()
                    .zip(traj.component_series(node, comp))
                    .collect(),
            })
            .collect();
        let svg = render_chart(
            &format!("{} (seed {seed})", built.system.label()),
            "t",
            &format!("component {comp}"),
            &series,
        );
        write_atomic(&out_dir.join("trajectory.svg"), svg.as_bytes())?;
    }
    println!(
        "wrote {} ({} steps, {} nodes)",
        csv_path.display(),
        traj.step_count(),
        traj.node_count()
    );
    Ok(())
}

fn evaluate(inputs: &CertificateInputs) -> Result<SyncCertificate, CliError> {
    Ok(match inputs {
        CertificateInputs::Coupling(c) => check_coupling_sync(c)?,
        CertificateInputs::Layer(c) => check_noise_layer_sync(c)?,
    })
}

pub fn cmd_check(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let graph = config.build_graph(base_dir)?;
    let layer_graph = config.build_noise_layer_graph(base_dir)?;
    let inputs = certificate_inputs(config, graph.as_ref(), layer_graph.as_ref())?;
    let certificate = evaluate(&inputs)?;
    println!("{certificate}");

    // For the oscillator models the gain/persistence constants are
    // contested (mean-field matrix with or without the 1/N factor), so a
    // sampled estimate of the implemented dynamics is reported alongside.
    let numeric = match config.model.name.as_str() {
        "fn_env" | "fn_full" => {
            let built = build_system(config, graph.as_ref(), layer_graph.as_ref(), None)?;
            let est = estimate_diffusion_constants(
                &built.system,
                4000,
                &[(-5.0, 5.0), (-5.0, 5.0)],
                config.integration.seed,
            )?;
            let k_f = stosync::conditions::kf_fitzhugh_nagumo(
                config.model.b.unwrap_or(model::FN_DEFAULT_B),
                config.model.c.unwrap_or(model::FN_DEFAULT_C),
            )?;
            let cert = check_coupling_sync(&CouplingConstants {
                k_f: TaggedConstant::closed_form(k_f),
                k_g: est.k_g,
                k_g_bar: est.k_g_bar,
                sigma: TaggedConstant::closed_form(0.0),
                lambda2: TaggedConstant::closed_form(0.0),
            })?;
            println!("\nwith sampled diffusion constants of the implemented dynamics:");
            println!("{cert}");
            Some(cert)
        }
        _ => None,
    };

    let mut value = serde_json::json!({ "certificate": certificate });
    if let Some(numeric) = numeric {
        value["numeric_certificate"] = serde_json::to_value(&numeric).expect("serializable");
    }
    write_atomic(&out_dir.join("certificate.json"), &to_pretty_json(&value))?;
    Ok(())
}

pub fn cmd_design(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let graph = config.build_graph(base_dir)?;
    let layer_graph = config.build_noise_layer_graph(base_dir)?.ok_or_else(|| {
        CliError::Config("noise_layer: a layer graph is required for design".to_string())
    })?;
    let (k_f, sigma, lambda2) = model::design_inputs(config, graph.as_ref())?;
    let safety = config.noise_layer.as_ref().and_then(|l| l.safety).unwrap_or(1.1);

    let sigma_star =
        design_noise_strength(k_f.value, sigma.value, lambda2.value, &layer_graph, safety)?;
    let spectrum = layer_graph.spectrum()?;
    let certificate = check_noise_layer_sync(&NoiseLayerConstants {
        k_f,
        sigma,
        lambda2,
        sigma_star: TaggedConstant::numeric(sigma_star),
        lambda2_star: TaggedConstant::numeric(spectrum.lambda2()),
        lambda_n_star: TaggedConstant::numeric(spectrum.lambda_n()),
    })?;

    println!("designed noise strength sigma* = {}", format_g(sigma_star, 10));
    println!("{certificate}");
    let value = serde_json::json!({
        "sigma_star": sigma_star,
        "safety": safety,
        "certificate": certificate,
    });
    write_atomic(&out_dir.join("design.json"), &to_pretty_json(&value))?;
    Ok(())
}

pub fn cmd_sweep(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep: section required for the sweep command".into()))?;
    // Fail fast on configs the parameter cannot apply to.
    {
        let mut probe = config.clone();
        apply_sweep_value(&mut probe, &sweep.parameter, sweep.values[0])?;
    }

    let master = config.integration.seed;
    let n_seeds = config.integration.n_seeds;
    let cut = transient_cut_time(config);
    let cells: Vec<(usize, usize)> = (0..sweep.values.len())
        .flat_map(|vi| (0..n_seeds).map(move |si| (vi, si)))
        .collect();

    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(vi, si)| {
            let value = sweep.values[vi];
            let cell_seed = derive_seed(master, (vi * 1_000_003 + si) as u64);
            let result: Result<(f64, f64), CliError> = (|| {
                let mut cell_config = config.clone();
                apply_sweep_value(&mut cell_config, &sweep.parameter, value)?;
                let graph = cell_config.build_graph(base_dir)?;
                let layer_graph = cell_config.build_noise_layer_graph(base_dir)?;
                let built =
                    build_system(&cell_config, graph.as_ref(), layer_graph.as_ref(), None)?;
                let x0 = initial_state(&cell_config, &built.system, cell_seed)?;
                let traj = simulate(
                    &built.system,
                    &x0,
                    cell_config.integration.t0,
                    cell_config.integration.t_end,
                    cell_config.integration.dt,
                    cell_seed,
                )?;
                let report = compute_report(&traj, cell_config.metrics.component, cut)?;
                Ok((report.order_parameter, report.lyapunov_estimate))
            })();
            match result {
                Ok((r, lyap)) => SweepRow {
                    value,
                    seed_index: si,
                    order_parameter: r,
                    lyapunov: lyap,
                },
                Err(e) => {
                    eprintln!(
                        "warning: cell ({} = {value}, seed {si}) failed: {e}",
                        sweep.parameter
                    );
                    SweepRow {
                        value,
                        seed_index: si,
                        order_parameter: f64::NAN,
                        lyapunov: f64::NAN,
                    }
                }
            }
        })
        .collect();

    // rayon preserves input order for indexed parallel iterators, but the
    // contract is deterministic output, so sort explicitly.
    let mut rows = rows;
    rows.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then(a.seed_index.cmp(&b.seed_index))
    });
    write_atomic(&out_dir.join("sweep.csv"), sweep_csv(&sweep.parameter, &rows).as_bytes())?;

    if config.outputs.plot {
        let scatter = Series {
            label: "per-seed R".to_string(),
            kind: SeriesKind::Scatter,
            points: rows.iter().map(|r| (r.value, r.order_parameter)).collect(),
        };
        let mean_line = Series {
            label: "mean R".to_string(),
            kind: SeriesKind::Line,
            points: sweep
                .values
                .iter()
                .map(|&v| {
                    let group: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.value == v && r.order_parameter.is_finite())
                        .map(|r| r.order_parameter)
                        .collect();
                    (v, group.iter().sum::<f64>() / group.len().max(1) as f64)
                })
                .collect(),
        };
        let svg = render_chart(
            &format!("order parameter vs {}", sweep.parameter),
            &sweep.parameter,
            "R",
            &[mean_line, scatter],
        );
        write_atomic(&out_dir.join("sweep.svg"), svg.as_bytes())?;
    }
    println!(
        "wrote {} ({} values x {} seeds)",
        out_dir.join("sweep.csv").display(),
        sweep.values.len(),
        n_seeds
    );
    Ok(())
}

fn print_spectrum(name: &str, graph: &Graph, spectrum: &LaplacianSpectrum) {
    println!("{name}: {} nodes, {} edges", graph.node_count(), graph.edges().len());
    println!("  lambda2   = {}", format_g(spectrum.lambda2(), 10));
    println!("  lambdaN   = {}", format_g(spectrum.lambda_n(), 10));
    println!(
        "  connected = {} (tolerance 1e-9 * lambdaN)",
        spectrum.is_connected_default()
    );
    let eigenvalues: Vec<String> =
        spectrum.eigenvalues().iter().map(|v| format_g(*v, 6)).collect();
    println!("  spectrum  = [{}]", eigenvalues.join(", "));
}

pub fn cmd_graph_info(config: &ExperimentConfig, base_dir: &Path) -> Result<(), CliError> {
    let graph = config.build_graph(base_dir)?.ok_or_else(|| {
        CliError::Config("graph: section required for graph-info".to_string())
    })?;
    print_spectrum("graph", &graph, &graph.spectrum()?);
    if let Some(layer) = config.build_noise_layer_graph(base_dir)? {
        print_spectrum("noise_layer", &layer, &layer.spectrum()?);
    }
    Ok(())
}
