//! Time evolution from the joint ground state, with an optional ringdown fit.

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use ionsync_core::{
    build_liouvillian, eigenspectrum, evolve, fit_decaying_oscillation, DecayFit, QuantumState,
    Trajectory,
};

use crate::config::{ParamSet, RunConfig};
use crate::output::{self, fval, Table};

/// Switches specific to the dynamics command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DynamicsArgs {
    /// Final time of the output grid.
    #[arg(long, default_value_t = 25.0)]
    pub t_max: f64,
    /// Uniform time steps; the trajectory has steps + 1 rows.
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Fit a decaying oscillation to the entanglement trace.
    #[arg(long)]
    pub fit: bool,
    /// Fit window start; defaults to the relaxation time of mode 3.
    #[arg(long)]
    pub fit_t_min: Option<f64>,
}

const TRACKS: [&str; 5] = ["n_phonon", "sigma_z", "a_re", "a_im", "entanglement"];

struct PointValues {
    times: Vec<f64>,
    tracks: Vec<Vec<f64>>,
    fit: Option<ionsync_core::Result<DecayFit>>,
}

fn compute(p: ParamSet, opts: &DynamicsArgs) -> ionsync_core::Result<PointValues> {
    let params = p.to_params();
    let l = build_liouvillian(&params)?;
    let state0 = QuantumState::ground(params.n_fock)?;
    let h = opts.t_max / opts.steps.max(1) as f64;
    let times: Vec<f64> = (0..=opts.steps).map(|k| h * k as f64).collect();
    let traj = evolve(&l, &state0, &times)?;
    let tracks: Vec<Vec<f64>> = TRACKS
        .iter()
        .map(|name| {
            traj.observable(name)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| ionsync_core::Error::NotFound(format!("observable '{name}'")))
        })
        .collect::<ionsync_core::Result<_>>()?;
    let fit = opts.fit.then(|| {
        let modes = eigenspectrum(&l, 4)?;
        let t_min = opts.fit_t_min.unwrap_or(1.0 / modes[3].decay_rate);
        let hint = Some((modes[1].decay_rate, modes[1].frequency));
        let slim =
            Trajectory::from_observable(traj.times.clone(), "entanglement", tracks[4].clone());
        fit_decaying_oscillation(&slim, "entanglement", t_min, hint)
    });
    Ok(PointValues { times: traj.times, tracks, fit })
}

pub fn run(cfg: &RunConfig, opts: &DynamicsArgs, meta: &serde_json::Value) -> Result<bool> {
    let points = cfg.points();
    let sweeping = !cfg.sweep.is_empty();
    let results: Vec<ionsync_core::Result<PointValues>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let r = compute(*p, opts);
            match &r {
                Ok(_) => eprintln!("dynamics[{i}]: done"),
                Err(e) => eprintln!("dynamics[{i}]: {e}"),
            }
            r
        })
        .collect();

    let mut index_columns = output::PARAM_COLUMNS.to_vec();
    index_columns.extend(["file", "error"]);
    let mut index = Table::create(&cfg.out_dir, "dynamics_points.csv", &index_columns)?;
    let mut fit_table = if opts.fit {
        let mut columns = output::PARAM_COLUMNS.to_vec();
        columns.extend([
            "amplitude", "decay", "frequency", "phase", "offset", "t_min", "residual", "error",
        ]);
        Some(Table::create(&cfg.out_dir, "fit.csv", &columns)?)
    } else {
        None
    };

    let mut clean = true;
    for (i, (p, r)) in points.iter().zip(&results).enumerate() {
        match r {
            Ok(v) => {
                let name = output::point_file("dynamics", i, sweeping);
                let mut columns = vec!["time"];
                columns.extend(TRACKS);
                let mut table = Table::create(&cfg.out_dir, &name, &columns)?;
                for (k, t) in v.times.iter().enumerate() {
                    let mut fields = vec![fval(*t)];
                    fields.extend(v.tracks.iter().map(|track| fval(track[k])));
                    table.row(&fields)?;
                }
                table.finish(meta)?;
                let mut fields = output::param_fields(p);
                fields.extend([name, String::new()]);
                index.row(&fields)?;
                match (fit_table.as_mut(), v.fit.as_ref()) {
                    (Some(ft), Some(Ok(fit))) => {
                        let mut fields = output::param_fields(p);
                        fields.extend([
                            fval(fit.amplitude),
                            fval(fit.decay),
                            fval(fit.frequency),
                            fval(fit.phase),
                            fval(fit.offset),
                            fval(fit.t_min),
                            fval(fit.residual),
                            String::new(),
                        ]);
                        ft.row(&fields)?;
                    }
                    (Some(ft), Some(Err(e))) => {
                        clean = false;
                        ft.row(&output::error_row(p, 7, &e.to_string()))?;
                    }
                    _ => {}
                }
            }
            Err(e) => {
                clean = false;
                index.row(&output::error_row(p, 1, &e.to_string()))?;
                if let Some(ft) = fit_table.as_mut() {
                    ft.row(&output::error_row(p, 7, &e.to_string()))?;
                }
            }
        }
    }
    index.finish(meta)?;
    if let Some(ft) = fit_table {
        ft.finish(meta)?;
    }
    Ok(clean)
}
