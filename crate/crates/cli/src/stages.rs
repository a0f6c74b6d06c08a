//! Pipeline stages.  Every stage communicates with its neighbours through
//! files in the output directory only, so any stage can be rerun in
//! isolation and the whole chain is reproducible from disk.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Value};

use dbar_core::boundary::{green_riemann_residual, solve_psi_boundary};
use dbar_core::conductivity::{ConductivityField, PhantomSpec};
use dbar_core::faddeev_kernel::LambdaGrid;
use dbar_core::forward::ForwardSolver;
use dbar_core::grid::Grid;
use dbar_core::io;
use dbar_core::reconstruct::{
    error_metrics, q_from_sampling, sigma_from_q, MuSampling, ReconstructionSettings,
};
use dbar_core::scattering::{b_at_lambda, scattering_from_dtn, theil_sen_slope};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::Manifest;

pub const PIPELINE: [&str; 7] = [
    "phantom",
    "forward",
    "dtn",
    "boundary-psi",
    "scatter",
    "dbar",
    "reconstruct",
];

pub fn phantom_field(cfg: &RunConfig) -> Result<ConductivityField, CliError> {
    let p = &cfg.phantom;
    if p.preset == "gaussian" && (p.amp.is_some() || p.width.is_some() || p.center.is_some()) {
        let spec = PhantomSpec::Gaussian {
            amp: p.amp.unwrap_or(0.5),
            center: p.center.map(|c| (c[0], c[1])).unwrap_or((0.0, 0.0)),
            width: p.width.unwrap_or(0.3),
        };
        let field = match p.support {
            Some(rho) if rho > 0.0 => ConductivityField::with_support(spec, rho),
            _ => ConductivityField::from_spec(spec),
        };
        return field.map_err(CliError::numeric);
    }
    ConductivityField::named(&p.preset).map_err(CliError::numeric)
}

fn z_grid(cfg: &RunConfig) -> Grid {
    Grid::new(cfg.domain.grid, cfg.domain.half_width)
}

fn lambda_grid(cfg: &RunConfig) -> Grid {
    Grid::new(cfg.lambda.nodes, cfg.lambda.radius)
}

/// Run one stage by name, appending its record to the manifest.
pub fn run_stage(name: &str, cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), CliError> {
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(CliError::numeric)?;
    let t0 = Instant::now();
    let diagnostics = match name {
        "phantom" => stage_phantom(cfg, &dir),
        "forward" => stage_forward(cfg, &dir),
        "dtn" => stage_dtn(cfg, &dir),
        "boundary-psi" => stage_boundary_psi(cfg, &dir),
        "scatter" => stage_scatter(cfg, &dir),
        "dbar" => stage_dbar(cfg, &dir),
        "reconstruct" => stage_reconstruct(cfg, &dir),
        other => Err(CliError::Config(format!("unknown stage {other:?}"))),
    };
    let elapsed = t0.elapsed().as_secs_f64();
    match diagnostics {
        Ok(d) => {
            manifest.record(name, elapsed, d);
            manifest.save(&dir)?;
            Ok(())
        }
        Err(e) => {
            // partial manifest: the failure is recorded before bailing out
            manifest.record(name, elapsed, json!({ "error": e.to_string() }));
            manifest.save(&dir)?;
            Err(e)
        }
    }
}

fn stage_phantom(cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let field = phantom_field(cfg)?;
    let grid = z_grid(cfg);
    let n = grid.n;
    let sigma = field.sigma_grid(&grid);
    let meta = json!({ "grid_n": n, "grid_half_width": grid.half_width });
    io::write_real_with_meta(&dir.join("sigma_true.bin"), &[n, n], &sigma, Some(meta.clone()))
        .map_err(CliError::numeric)?;
    let q = field.q_grid(&grid);
    io::write_real_with_meta(&dir.join("q_true.bin"), &[n, n], &q.values, Some(meta))
        .map_err(CliError::numeric)?;
    let (lo, hi) = sigma
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    Ok(json!({ "sigma_min": lo, "sigma_max": hi, "q_l1": q.l1() }))
}

fn stage_forward(cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let field = phantom_field(cfg)?;
    let solver = ForwardSolver::new(&field, cfg.forward_resolution(), cfg.domain.boundary_nodes)
        .map_err(CliError::numeric)?;
    // reference Dirichlet datum: the first Fourier mode
    let k = solver.k_theta;
    let g: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();
    let u = solver.solve_dirichlet(&g).map_err(CliError::numeric)?;
    let meta = json!({ "m_r": u.m_r, "k_theta": u.k_theta, "boundary_datum": "exp(i theta)" });
    io::write_complex_with_meta(&dir.join("forward_u.bin"), &[u.m_r, u.k_theta], &u.values, Some(meta))
        .map_err(CliError::numeric)?;
    // total current through the boundary must vanish (conservation)
    let trace = solver.boundary_trace(&u);
    let neumann_mean: Complex64 =
        trace.iter().map(|t| -2.0 * Complex64::i() * t).sum::<Complex64>() / k as f64;
    Ok(json!({ "flux_conservation_residual": neumann_mean.norm() }))
}

fn stage_dtn(cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let field = phantom_field(cfg)?;
    let solver = ForwardSolver::new(&field, cfg.forward_resolution(), cfg.domain.boundary_nodes)
        .map_err(CliError::numeric)?;
    let mut dtn = solver.dtn_operators().map_err(CliError::numeric)?;
    if cfg.noise.level > 0.0 {
        dtn.add_noise(cfg.noise.level, cfg.noise.seed);
    }
    io::write_dtn(dir, "dtn", &dtn).map_err(CliError::numeric)?;
    let profile = dtn.singularity_profile();
    Ok(json!({
        "n_b": dtn.n_b,
        "diff_max_norm": dtn.diff_max_norm(),
        "noise_level": cfg.noise.level,
        "singularity_max_ratio": profile.max_ratio,
    }))
}

fn stage_boundary_psi(_cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let dtn = io::read_dtn(dir, "dtn").map_err(|e| CliError::missing_input("boundary-psi", e))?;
    let lambda = Complex64::new(1.0, 0.0);
    let psi = solve_psi_boundary(&dtn, lambda).map_err(CliError::numeric)?;
    let meta = json!({ "lambda": [lambda.re, lambda.im] });
    io::write_complex_with_meta(&dir.join("psi_boundary.bin"), &[dtn.n_b], &psi.values, Some(meta))
        .map_err(CliError::numeric)?;
    Ok(json!({
        "lambda": [lambda.re, lambda.im],
        "scattered_fraction": psi.scattered_fraction(),
        "green_riemann_residual": green_riemann_residual(lambda, dtn.n_b),
    }))
}

fn stage_scatter(cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let dtn = io::read_dtn(dir, "dtn").map_err(|e| CliError::missing_input("scatter", e))?;
    let grid = lambda_grid(cfg);
    let scat = scattering_from_dtn(&dtn, &grid, cfg.solver.b_delta, cfg.solver.mask_threshold)
        .map_err(CliError::numeric)?;
    io::write_scattering(dir, "scatter", &scat).map_err(CliError::numeric)?;
    let masked = scat.masked.iter().filter(|&&m| m).count();
    let b_max = scat.b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut diag = json!({
        "masked_fraction": masked as f64 / scat.masked.len() as f64,
        "b_max": b_max,
        "b_zero": b_max < 1e-6,
    });

    // optional polar decay sweep for the log-log trend diagnostic
    if cfg.lambda.sweep_radii > 0 {
        let sweep = LambdaGrid::polar(cfg.lambda.radius, cfg.lambda.sweep_radii, cfg.lambda.sweep_angles);
        let mut values = Vec::new();
        let mut points = Vec::new();
        for i in 0..cfg.lambda.sweep_radii {
            for k in 0..cfg.lambda.sweep_angles {
                let l = sweep.node(i, k);
                let s = b_at_lambda(&dtn, l, cfg.solver.b_delta).map_err(CliError::numeric)?;
                if l.norm() >= 1.0 && s.value.norm() > 0.0 {
                    points.push((l.norm().ln(), s.value.norm().ln()));
                }
                values.push(s.value);
            }
        }
        let meta = json!({
            "radius": cfg.lambda.radius,
            "n_radii": cfg.lambda.sweep_radii,
            "n_angles": cfg.lambda.sweep_angles,
        });
        io::write_complex_with_meta(
            &dir.join("b_sweep.bin"),
            &[cfg.lambda.sweep_radii, cfg.lambda.sweep_angles],
            &values,
            Some(meta),
        )
        .map_err(CliError::numeric)?;
        if points.len() >= 2 {
            diag["decay_slope"] = json!(theil_sen_slope(&points));
        }
    }
    Ok(diag)
}

fn settings(cfg: &RunConfig) -> ReconstructionSettings {
    let _ = cfg; // probe schedule is currently fixed; kept for future knobs
    ReconstructionSettings::default()
}

fn stage_dbar(cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let scat = io::read_scattering(dir, "scatter").map_err(|e| CliError::missing_input("dbar", e))?;
    let grid = z_grid(cfg);
    let s = settings(cfg);
    let sampling =
        dbar_core::reconstruct::sample_mu_fields(&scat, &grid, &s).map_err(CliError::numeric)?;
    let n = grid.n;
    let meta = json!({
        "grid_n": n,
        "grid_half_width": grid.half_width,
        "lambda_a": [s.lambda_a.re, s.lambda_a.im],
        "rings": sampling.rings,
        "ring_fracs": s.b_ring_fracs,
        "n_ring_angles": s.n_ring_angles,
        "c_lambdas": s.c_lambdas.iter().map(|l| vec![l.re, l.im]).collect::<Vec<_>>(),
        "mu_floor": s.mu_floor,
    });
    io::write_complex_with_meta(&dir.join("mu_a.bin"), &[n, n], &sampling.mu_a, Some(meta))
        .map_err(CliError::numeric)?;
    for (k, field) in sampling.ring_means.iter().enumerate() {
        io::write_complex(&dir.join(format!("ring_mean_{k}.bin")), &[n, n], field)
            .map_err(CliError::numeric)?;
    }
    for (k, field) in sampling.mu_c.iter().enumerate() {
        io::write_complex(&dir.join(format!("mu_c_{k}.bin")), &[n, n], field)
            .map_err(CliError::numeric)?;
    }
    let dev = sampling
        .mu_a
        .iter()
        .map(|m| (m - 1.0).norm())
        .fold(0.0, f64::max);
    Ok(json!({ "mu_a_max_deviation": dev, "rings": sampling.rings }))
}

fn stage_reconstruct(cfg: &RunConfig, dir: &Path) -> Result<Value, CliError> {
    let missing = |e| CliError::missing_input("reconstruct", e);
    let (mu_a, sc) = io::read_complex(&dir.join("mu_a.bin")).map_err(missing)?;
    let meta = sc
        .meta
        .ok_or_else(|| CliError::Config("mu_a.bin sidecar carries no probe metadata".into()))?;

    #[derive(serde::Deserialize)]
    struct DbarMeta {
        grid_n: usize,
        grid_half_width: f64,
        lambda_a: [f64; 2],
        rings: Vec<f64>,
        ring_fracs: [f64; 3],
        n_ring_angles: usize,
        c_lambdas: Vec<[f64; 2]>,
        mu_floor: f64,
    }
    let m: DbarMeta = serde_json::from_value(meta).map_err(CliError::numeric)?;
    let grid = Grid::new(m.grid_n, m.grid_half_width);
    let mut ring_means = Vec::new();
    for k in 0..m.rings.len() {
        let (field, _) = io::read_complex(&dir.join(format!("ring_mean_{k}.bin"))).map_err(missing)?;
        ring_means.push(field);
    }
    let mut mu_c = Vec::new();
    for k in 0..m.c_lambdas.len() {
        let (field, _) = io::read_complex(&dir.join(format!("mu_c_{k}.bin"))).map_err(missing)?;
        mu_c.push(field);
    }
    let s = ReconstructionSettings {
        lambda_a: Complex64::new(m.lambda_a[0], m.lambda_a[1]),
        b_ring_fracs: m.ring_fracs,
        n_ring_angles: m.n_ring_angles,
        c_lambdas: [
            Complex64::new(m.c_lambdas[0][0], m.c_lambdas[0][1]),
            Complex64::new(m.c_lambdas[1][0], m.c_lambdas[1][1]),
        ],
        mu_floor: m.mu_floor,
    };
    let sampling = MuSampling {
        z_grid: grid,
        settings: s,
        mu_a,
        rings: m.rings,
        ring_means,
        mu_c,
    };

    let est = q_from_sampling(&sampling);
    let (q_rec, spread, mask): (&[Complex64], f64, Option<&[bool]>) =
        match cfg.reconstruct.formula.as_str() {
            "a" => (&est.q_a, 0.0, Some(&est.mask_a)),
            "b" => (&est.q_b, est.spread_b, None),
            "c" => (&est.q_c, est.spread_c, Some(&est.mask_c)),
            other => return Err(CliError::Config(format!("unknown formula {other:?}"))),
        };
    let masked_fraction = mask
        .map(|m| m.iter().filter(|&&x| x).count() as f64 / m.len() as f64)
        .unwrap_or(0.0);
    let sigma = sigma_from_q(&grid, q_rec).map_err(CliError::numeric)?;

    let n = grid.n;
    let meta = json!({ "grid_n": n, "grid_half_width": grid.half_width, "formula": cfg.reconstruct.formula });
    io::write_complex_with_meta(&dir.join("q_rec.bin"), &[n, n], q_rec, Some(meta.clone()))
        .map_err(CliError::numeric)?;
    io::write_real_with_meta(&dir.join("sigma_rec.bin"), &[n, n], &sigma.sigma, Some(meta))
        .map_err(CliError::numeric)?;

    let reference = phantom_field(cfg)?;
    let metrics = error_metrics(&grid, &sigma.sigma, &reference);
    let mut out = serde_json::to_value(&metrics).map_err(CliError::numeric)?;
    out["formula"] = json!(cfg.reconstruct.formula);
    out["masked_fraction"] = json!(masked_fraction);
    out["extrapolation_spread"] = json!(spread);
    out["sigma_solver_iterations"] = json!(sigma.iterations);
    out["sigma_solver_residual"] = json!(sigma.residual);
    if let Some(w) = est.unreliable_limit_warning(0.5) {
        out["warning"] = json!(w);
    }
    std::fs::write(
        dir.join("metrics.json"),
        serde_json::to_string_pretty(&out).map_err(CliError::numeric)?,
    )
    .map_err(CliError::numeric)?;
    Ok(out)
}
