//! Liouvillian eigenspectrum tables, exceptional-point scans, power spectra.

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use ionsync_core::{
    build_liouvillian, build_operators, eigenspectrum, find_lep, power_spectrum, steady_state,
    EigenMode, LepClass, LepScanResult, PowerSpectrum,
};

use crate::config::{self, ParamSet, RunConfig};
use crate::output::{self, fval, Table};

/// Switches specific to the spectrum command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Modes per table, capped at the squared space dimension.
    #[arg(long, default_value_t = 40)]
    pub modes: usize,
    /// Exceptional-point bisection range over detuning, as "lo:hi".
    #[arg(long, value_name = "LO:HI")]
    pub lep: Option<String>,
    /// Emission-spectrum frequency grid, as "lo:hi:n".
    #[arg(long, value_name = "LO:HI:N")]
    pub omega_grid: Option<String>,
}

struct PointValues {
    modes: Vec<EigenMode>,
    spectrum: Option<PowerSpectrum>,
    lep: Option<ionsync_core::Result<LepScanResult>>,
}

fn compute(
    p: ParamSet,
    opts: &SpectrumArgs,
    lep_range: Option<(f64, f64)>,
    omega: Option<&[f64]>,
    tol: f64,
) -> ionsync_core::Result<PointValues> {
    let params = p.to_params();
    let l = build_liouvillian(&params)?;
    let d2 = l.dim * l.dim;
    let modes = eigenspectrum(&l, opts.modes.clamp(1, d2))?;
    let spectrum = match omega {
        Some(grid) => {
            let ss = steady_state(&l)?;
            let ops = build_operators(&params)?;
            Some(power_spectrum(&modes, &ss, &ops.a, grid)?)
        }
        None => None,
    };
    let lep = lep_range.map(|range| find_lep(&params, range, tol));
    Ok(PointValues { modes, spectrum, lep })
}

fn class_name(class: LepClass) -> &'static str {
    match class {
        LepClass::RealPair => "real_pair",
        LepClass::ConjugatePair => "conjugate_pair",
    }
}

pub fn run(cfg: &RunConfig, opts: &SpectrumArgs, meta: &serde_json::Value) -> Result<bool> {
    let lep_range = opts.lep.as_deref().map(config::parse_range).transpose()?;
    let omega = opts.omega_grid.as_deref().map(config::parse_grid).transpose()?;
    let points = cfg.points();
    let sweeping = !cfg.sweep.is_empty();
    let results: Vec<ionsync_core::Result<PointValues>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let r = compute(*p, opts, lep_range, omega.as_deref(), cfg.tol);
            match &r {
                Ok(_) => eprintln!("spectrum[{i}]: done"),
                Err(e) => eprintln!("spectrum[{i}]: {e}"),
            }
            r
        })
        .collect();

    let mut summary_columns = output::PARAM_COLUMNS.to_vec();
    summary_columns.extend(["gamma_1", "nu_1", "omega_obs", "error"]);
    let mut summary = Table::create(&cfg.out_dir, "summary.csv", &summary_columns)?;
    let mut lep_table = if lep_range.is_some() {
        let mut columns = output::PARAM_COLUMNS.to_vec();
        columns.extend(["delta_ep", "error"]);
        Some(Table::create(&cfg.out_dir, "lep.csv", &columns)?)
    } else {
        None
    };

    let mut clean = true;
    for (i, (p, r)) in points.iter().zip(&results).enumerate() {
        match r {
            Ok(v) => {
                write_modes(cfg, i, sweeping, &v.modes, meta)?;
                let slow = v.modes.get(1);
                let mut fields = output::param_fields(p);
                fields.push(slow.map(|m| fval(m.decay_rate)).unwrap_or_default());
                fields.push(slow.map(|m| fval(m.frequency)).unwrap_or_default());
                fields.push(v.spectrum.as_ref().map(|s| fval(s.omega_obs)).unwrap_or_default());
                fields.push(String::new());
                summary.row(&fields)?;
                if let Some(s) = &v.spectrum {
                    let name = output::point_file("spectrum", i, sweeping);
                    let mut table = Table::create(&cfg.out_dir, &name, &["omega", "value"])?;
                    for (w, s_w) in s.omega.iter().zip(&s.values) {
                        table.row(&[fval(*w), fval(*s_w)])?;
                    }
                    table.finish(meta)?;
                }
                match (lep_table.as_mut(), v.lep.as_ref()) {
                    (Some(lt), Some(Ok(scan))) => {
                        let mut fields = output::param_fields(p);
                        fields.extend([fval(scan.delta_ep), String::new()]);
                        lt.row(&fields)?;
                        write_probes(cfg, i, sweeping, scan, meta)?;
                    }
                    (Some(lt), Some(Err(e))) => {
                        clean = false;
                        lt.row(&output::error_row(p, 1, &e.to_string()))?;
                    }
                    _ => {}
                }
            }
            Err(e) => {
                clean = false;
                summary.row(&output::error_row(p, 3, &e.to_string()))?;
                if let Some(lt) = lep_table.as_mut() {
                    lt.row(&output::error_row(p, 1, &e.to_string()))?;
                }
            }
        }
    }
    summary.finish(meta)?;
    if let Some(lt) = lep_table {
        lt.finish(meta)?;
    }
    Ok(clean)
}

fn write_modes(
    cfg: &RunConfig,
    index: usize,
    sweeping: bool,
    modes: &[EigenMode],
    meta: &serde_json::Value,
) -> Result<()> {
    let name = output::point_file("modes", index, sweeping);
    let columns =
        ["index", "lambda_re", "lambda_im", "decay_rate", "frequency", "decay_ratio", "defective"];
    let mut table = Table::create(&cfg.out_dir, &name, &columns)?;
    let gamma1 = modes.get(1).map(|m| m.decay_rate).filter(|g| *g > 0.0);
    for m in modes {
        table.row(&[
            m.index.to_string(),
            fval(m.lambda.re),
            fval(m.lambda.im),
            fval(m.decay_rate),
            fval(m.frequency),
            gamma1.map(|g| fval(m.decay_rate / g)).unwrap_or_default(),
            m.defective.to_string(),
        ])?;
    }
    table.finish(meta)
}

fn write_probes(
    cfg: &RunConfig,
    index: usize,
    sweeping: bool,
    scan: &LepScanResult,
    meta: &serde_json::Value,
) -> Result<()> {
    let name = output::point_file("lep_probes", index, sweeping);
    let columns =
        ["detuning", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "class"];
    let mut table = Table::create(&cfg.out_dir, &name, &columns)?;
    for probe in &scan.probes {
        table.row(&[
            fval(probe.detuning),
            fval(probe.lambda1.re),
            fval(probe.lambda1.im),
            fval(probe.lambda2.re),
            fval(probe.lambda2.im),
            class_name(probe.class).to_string(),
        ])?;
    }
    table.finish(meta)
}
