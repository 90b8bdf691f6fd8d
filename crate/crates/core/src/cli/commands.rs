//! One function per subcommand, each returning the tables it produces.

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{format_number, Table};
use crate::error::{Error, Result};
use crate::fokker_planck::{DensityOnGrid, FpProblem};
use crate::langevin::simulate_ensemble;
use crate::model::ModelParams;
use crate::scattering::{probability_grid, transition_probability};
use crate::stationary::{normalization, qs_unnormalized};
use crate::thermo::{energy_curve, internal_energy_from_density, level_width_quadrature, thermo_report};
use crate::wavefunction::{psi_br_estimate, sample_psi, solve_xi};

/// Normalised `Q̃(θ̄)` at `γ = 1` for every λ of the grid.
fn stationary_curves(cfg: &RunConfig) -> Result<Vec<(f64, Vec<(f64, f64)>)>> {
    let thetas = cfg.grids.theta_bar.values();
    cfg.grids
        .lambda
        .values()
        .par_iter()
        .map(|&lam| {
            ModelParams::from_lambda(lam)?;
            let norm = normalization(lam)?;
            let curve = thetas
                .iter()
                .map(|&tb| Ok((tb, qs_unnormalized(tb, lam)? / norm)))
                .collect::<Result<Vec<_>>>()?;
            Ok((lam, curve))
        })
        .collect()
}

pub fn stationary(cfg: &RunConfig) -> Result<Vec<Table>> {
    Ok(stationary_curves(cfg)?
        .into_iter()
        .map(|(lam, curve)| {
            let mut t = Table::new(format!("stationary_lambda_{}", format_number(lam)), &["theta_bar", "density"]);
            for (tb, q) in curve {
                t.push(vec![tb, q]);
            }
            t
        })
        .collect())
}

pub fn fig1(cfg: &RunConfig) -> Result<Vec<Table>> {
    let mut t = Table::new("fig1", &["theta_bar", "density", "lambda"]);
    for (lam, curve) in stationary_curves(cfg)? {
        for (tb, q) in curve {
            t.push(vec![tb, q, lam]);
        }
    }
    Ok(vec![t])
}

pub fn fig2(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.barrier()?;
    let mut t = Table::new("fig2", &["t", "omega"]);
    for s in cfg.grids.time.values() {
        t.push(vec![s, p.omega0(s)]);
    }
    Ok(vec![t])
}

pub fn paths(cfg: &RunConfig) -> Result<Vec<Table>> {
    let sde = cfg.sde_config()?;
    let s = &cfg.sde;
    let ensemble = simulate_ensemble(&sde, s.t0, s.t1, s.theta0)?;
    let mut summary = Table::new(
        "paths",
        &["path", "t_end", "theta_end", "int_theta_end", "int_exp_end", "reinjections"],
    );
    let mut tables = Vec::new();
    for (i, p) in ensemble.iter().enumerate() {
        summary.push(vec![
            i as f64,
            p.t_end,
            p.theta_end,
            p.int_theta_end,
            p.int_exp_end,
            p.reinjections.len() as f64,
        ]);
        if s.dump_paths {
            let mut d = Table::new(format!("path_{i:05}"), &["t", "theta"]);
            for (&t, &th) in p.times.iter().zip(&p.values) {
                d.push(vec![t, th]);
            }
            tables.push(d);
        }
    }
    tables.insert(0, summary);
    Ok(tables)
}

pub fn fp(cfg: &RunConfig) -> Result<Vec<Table>> {
    let grid = cfg.fp_grid()?;
    let f = &cfg.fp;
    let problem = FpProblem::theta_process(grid, cfg.barrier()?, cfg.model.epsilon)?;
    let q0 = DensityOnGrid::spike(grid, cfg.sde.theta0, f.initial_width);
    let steps = (f.t_end / f.dt).ceil().max(1.0) as usize;
    let every = if f.snapshots > 0 { steps.div_ceil(f.snapshots) } else { 0 };
    let mut snaps = vec![q0.clone()];
    snaps.extend(problem.evolve(&q0, f.dt, f.t_end, every)?);
    let mut t = Table::new("fp", &["t", "theta", "q"]);
    for s in &snaps {
        for (x, &q) in grid.points().into_iter().zip(&s.values) {
            t.push(vec![s.time, x, q]);
        }
    }
    Ok(vec![t])
}

pub fn wavefunction(cfg: &RunConfig) -> Result<Vec<Table>> {
    let profile = cfg.barrier()?;
    let w = &cfg.wavefunction;
    let (t0, t1) = (cfg.sde.t0, cfg.sde.t1);
    let xs = cfg.grids.x.values();
    if w.ensemble {
        let sde = cfg.sde_config()?.with_xi(true);
        let ensemble = simulate_ensemble(&sde, t0, t1, cfg.sde.theta0)?;
        let mut t = Table::new("wavefunction", &["x", "re_psi", "im_psi", "abs2_psi", "se_re", "se_im"]);
        let mut noisy = 0;
        for x in xs {
            let e = psi_br_estimate(w.level, x, t1, &ensemble, &profile)?;
            noisy += usize::from(e.warning.is_some());
            t.push(vec![x, e.mean.re, e.mean.im, e.mean.norm_sqr(), e.std_error.re, e.std_error.im]);
        }
        if noisy > 0 {
            log::warn!("{noisy} of {} points have relative standard error above 0.2", t.rows.len());
        }
        return Ok(vec![t]);
    }
    let traj = solve_xi(&profile, t0, t1, w.dt)?;
    let mut t = Table::new("wavefunction", &["x", "re_psi", "im_psi", "abs2_psi"]);
    for s in sample_psi(w.level, &xs, t1, &traj)? {
        t.push(vec![s.x, s.value.re, s.value.im, s.value.norm_sqr()]);
    }
    Ok(vec![t])
}

pub fn fig3(cfg: &RunConfig) -> Result<Vec<Table>> {
    let results = probability_grid(&cfg.grids.lambda.values(), &cfg.grids.rho.values())?;
    let mut t = Table::new("fig3", &["lambda", "rho", "probability"]);
    for r in results {
        t.push(vec![r.lambda, r.rho, r.probability]);
    }
    Ok(vec![t])
}

pub fn fig4(cfg: &RunConfig) -> Result<Vec<Table>> {
    let lambdas = cfg.grids.lambda.values();
    let probs = lambdas
        .par_iter()
        .map(|&l| transition_probability(l, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("fig4", &["lambda", "probability"]);
    for (l, p) in lambdas.into_iter().zip(probs) {
        t.push(vec![l, p]);
    }
    Ok(vec![t])
}

pub fn thermo(cfg: &RunConfig) -> Result<Vec<Table>> {
    let r = thermo_report(&cfg.model)?;
    let mut t = Table::new(
        "thermo",
        &[
            "lambda",
            "omega_as",
            "epsilon",
            "energy_shift",
            "level_width",
            "level_width_quadrature",
            "decay_time",
            "internal_energy",
            "internal_energy_density_form",
            "free_energy",
            "entropy_over_k",
            "divergent_vacuum_term",
        ],
    );
    t.push(vec![
        r.lambda,
        r.omega_as,
        r.epsilon,
        r.energy_shift,
        r.level_width,
        level_width_quadrature(r.lambda, r.omega_as)?,
        r.decay_time,
        r.internal_energy,
        internal_energy_from_density(r.epsilon, r.omega_as)?,
        r.free_energy,
        r.entropy_over_k,
        if r.divergent_vacuum_term_flag { 1.0 } else { 0.0 },
    ]);
    let mut tables = vec![t];
    tables.extend(fig5(cfg)?);
    Ok(tables)
}

pub fn fig5(cfg: &RunConfig) -> Result<Vec<Table>> {
    let mut t = Table::new("fig5", &["lambda", "energy_shifted", "shift_only", "entropy_over_k"]);
    for r in energy_curve(&cfg.grids.lambda.values(), cfg.model.omega_as)? {
        t.push(vec![r.lambda, r.energy_shifted, r.shift_only, r.entropy_over_k]);
    }
    Ok(vec![t])
}

pub fn figure(cfg: &RunConfig, n: u8) -> Result<Vec<Table>> {
    match n {
        1 => fig1(cfg),
        2 => fig2(cfg),
        3 => fig3(cfg),
        4 => fig4(cfg),
        5 => fig5(cfg),
        _ => Err(Error::config("fig", format!("unknown figure {n}, expected 1-5"))),
    }
}
