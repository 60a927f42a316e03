//! Steady-state sweep: entanglement, phase locking, occupation, truncation tail.

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use ionsync_core::{
    build_liouvillian, log_negativity, mean_phonon, phonon_reduced, steady_state, sync_measure,
    tail_population, wigner, WignerField,
};

use crate::config::{ParamSet, RunConfig};
use crate::output::{self, fval, Table};

/// Switches specific to the steady command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SteadyArgs {
    /// Also write a phonon Wigner field file per sweep point.
    #[arg(long)]
    pub wigner: bool,
    /// Wigner grid points per axis.
    #[arg(long, default_value_t = 201)]
    pub wigner_points: usize,
    /// Wigner grid half-width in phase space.
    #[arg(long, default_value_t = 5.0)]
    pub wigner_span: f64,
}

struct PointValues {
    e_n: f64,
    s_abs: f64,
    s_arg: f64,
    n_phonon: f64,
    tail: f64,
    wigner: Option<WignerField>,
}

fn compute(p: ParamSet, opts: &SteadyArgs) -> ionsync_core::Result<PointValues> {
    let params = p.to_params();
    let l = build_liouvillian(&params)?;
    let ss = steady_state(&l)?;
    let e_n = log_negativity(&ss.rho)?;
    let reduced = phonon_reduced(&ss.rho);
    let s = sync_measure(&reduced)?;
    let n_phonon = mean_phonon(&ss.rho);
    let tail = tail_population(&ss.rho, params.n_fock.saturating_sub(2));
    let wig = if opts.wigner {
        let m = opts.wigner_points.max(2);
        let h = 2.0 * opts.wigner_span / (m - 1) as f64;
        let grid: Vec<f64> = (0..m).map(|k| -opts.wigner_span + h * k as f64).collect();
        Some(wigner(&reduced, &grid, &grid)?)
    } else {
        None
    };
    Ok(PointValues { e_n, s_abs: s.norm(), s_arg: s.arg(), n_phonon, tail, wigner: wig })
}

pub fn run(cfg: &RunConfig, opts: &SteadyArgs, meta: &serde_json::Value) -> Result<bool> {
    let points = cfg.points();
    let sweeping = !cfg.sweep.is_empty();
    let results: Vec<ionsync_core::Result<PointValues>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let r = compute(*p, opts);
            match &r {
                Ok(v) => eprintln!("steady[{i}]: e_n = {:.6}, n = {:.4}", v.e_n, v.n_phonon),
                Err(e) => eprintln!("steady[{i}]: {e}"),
            }
            r
        })
        .collect();

    let mut columns = output::PARAM_COLUMNS.to_vec();
    columns.extend(["e_n", "s_abs", "s_arg", "n_phonon", "tail_population", "error"]);
    let mut table = Table::create(&cfg.out_dir, "steady.csv", &columns)?;
    let mut clean = true;
    for (i, (p, r)) in points.iter().zip(&results).enumerate() {
        match r {
            Ok(v) => {
                let mut fields = output::param_fields(p);
                fields.extend([fval(v.e_n), fval(v.s_abs), fval(v.s_arg), fval(v.n_phonon), fval(v.tail)]);
                fields.push(String::new());
                table.row(&fields)?;
                if let Some(w) = &v.wigner {
                    write_field(cfg, i, sweeping, w, meta)?;
                }
            }
            Err(e) => {
                clean = false;
                table.row(&output::error_row(p, 5, &e.to_string()))?;
            }
        }
    }
    table.finish(meta)?;
    Ok(clean)
}

fn write_field(
    cfg: &RunConfig,
    index: usize,
    sweeping: bool,
    field: &WignerField,
    meta: &serde_json::Value,
) -> Result<()> {
    let name = output::point_file("wigner", index, sweeping);
    let mut table = Table::create(&cfg.out_dir, &name, &["x", "p", "value"])?;
    for (ix, x) in field.x.iter().enumerate() {
        for (ip, p) in field.p.iter().enumerate() {
            table.row(&[fval(*x), fval(*p), fval(field.values[[ix, ip]])])?;
        }
    }
    table.finish(meta)
}
