//! Classical layer: fixed points, trajectories, phase-diagram raster.

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use ionsync_core::{
    find_fixed_points, integrate_mf, phase_diagram, FixedPoint, MeanFieldState, MfTrajectory,
    RegionLabel, Stability,
};

use crate::config::{self, ParamSet, RunConfig};
use crate::output::{self, fval, Table};

/// Switches specific to the meanfield command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct MeanfieldArgs {
    /// Final time of the classical trajectory.
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    /// Trajectory steps; the output has steps + 1 rows.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Initial state as "x1,y1,x2,y2,z"; defaults to the origin.
    #[arg(long, value_name = "STATE")]
    pub initial: Option<String>,
    /// Also compute the region raster and refined boundaries.
    #[arg(long)]
    pub phase_diagram: bool,
    /// Raster detuning range, as "lo:hi".
    #[arg(long, default_value = "0:2.5", value_name = "LO:HI")]
    pub delta_range: String,
    /// Raster drive range, as "lo:hi".
    #[arg(long, default_value = "0:2", value_name = "LO:HI")]
    pub f_range: String,
    /// Raster cells per axis.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
}

fn parse_initial(text: &str) -> Result<MeanFieldState> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad component in {text:?}")))
        .collect::<Result<_>>()?;
    if parts.len() != 5 {
        bail!("initial state {text:?} must have five components x1,y1,x2,y2,z");
    }
    Ok(MeanFieldState::from_array([parts[0], parts[1], parts[2], parts[3], parts[4]]))
}

struct PointValues {
    roots: Vec<FixedPoint>,
    traj: ionsync_core::Result<MfTrajectory>,
}

fn compute(p: ParamSet, initial: &MeanFieldState, times: &[f64]) -> ionsync_core::Result<PointValues> {
    let params = p.to_params();
    let roots = find_fixed_points(&params)?;
    let traj = integrate_mf(initial, &params, times);
    Ok(PointValues { roots, traj })
}

fn region_name(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::A => "A",
        RegionLabel::B => "B",
        RegionLabel::C => "C",
        RegionLabel::Unknown => "unknown",
    }
}

pub fn run(cfg: &RunConfig, opts: &MeanfieldArgs, meta: &serde_json::Value) -> Result<bool> {
    let initial = match &opts.initial {
        Some(text) => parse_initial(text)?,
        None => MeanFieldState::default(),
    };
    let h = opts.t_max / opts.steps.max(1) as f64;
    let times: Vec<f64> = (0..=opts.steps).map(|k| h * k as f64).collect();
    let points = cfg.points();
    let sweeping = !cfg.sweep.is_empty();
    let results: Vec<ionsync_core::Result<PointValues>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let r = compute(*p, &initial, &times);
            match &r {
                Ok(v) => eprintln!("meanfield[{i}]: {} fixed points", v.roots.len()),
                Err(e) => eprintln!("meanfield[{i}]: {e}"),
            }
            r
        })
        .collect();

    let mut root_columns = output::PARAM_COLUMNS.to_vec();
    root_columns.extend([
        "root", "x1", "y1", "x2", "y2", "z", "max_re", "stable", "degenerate", "n_fixed_points",
        "error",
    ]);
    let mut roots_table = Table::create(&cfg.out_dir, "fixed_points.csv", &root_columns)?;
    let mut index_columns = output::PARAM_COLUMNS.to_vec();
    index_columns.extend(["n_fixed_points", "file", "error"]);
    let mut index = Table::create(&cfg.out_dir, "meanfield_points.csv", &index_columns)?;

    let mut clean = true;
    for (i, (p, r)) in points.iter().zip(&results).enumerate() {
        match r {
            Ok(v) => {
                write_roots(&mut roots_table, p, &v.roots)?;
                let mut fields = output::param_fields(p);
                fields.push(v.roots.len().to_string());
                match &v.traj {
                    Ok(traj) => {
                        let name = output::point_file("trajectory", i, sweeping);
                        write_trajectory(cfg, &name, traj, meta)?;
                        fields.extend([name, String::new()]);
                    }
                    Err(e) => {
                        clean = false;
                        fields.extend([String::new(), e.to_string()]);
                    }
                }
                index.row(&fields)?;
            }
            Err(e) => {
                clean = false;
                roots_table.row(&output::error_row(p, 10, &e.to_string()))?;
                index.row(&output::error_row(p, 2, &e.to_string()))?;
            }
        }
    }
    roots_table.finish(meta)?;
    index.finish(meta)?;

    if opts.phase_diagram {
        let delta = config::parse_range(&opts.delta_range)?;
        let f = config::parse_range(&opts.f_range)?;
        let diagram = phase_diagram(&cfg.base.to_params(), delta, f, opts.resolution)?;
        let mut raster =
            Table::create(&cfg.out_dir, "phase_diagram.csv", &["delta", "f", "region", "n_fixed_points"])?;
        for (i, d) in diagram.delta.iter().enumerate() {
            for (j, fj) in diagram.f.iter().enumerate() {
                raster.row(&[
                    fval(*d),
                    fval(*fj),
                    region_name(diagram.labels[[i, j]]).to_string(),
                    diagram.counts[[i, j]].to_string(),
                ])?;
            }
        }
        raster.finish(meta)?;
        let boundaries = serde_json::json!({
            "hopf": diagram.hopf.iter().map(|(d, fv)| vec![*d, *fv]).collect::<Vec<_>>(),
            "saddle_node": diagram.saddle_node.iter().map(|(d, fv)| vec![*d, *fv]).collect::<Vec<_>>(),
        });
        let path = cfg.out_dir.join("boundaries.json");
        std::fs::write(&path, serde_json::to_string_pretty(&boundaries)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        output::write_sidecar(&path, meta)?;
    }
    Ok(clean)
}

fn write_roots(table: &mut Table, p: &ParamSet, roots: &[FixedPoint]) -> Result<()> {
    if roots.is_empty() {
        let mut fields = output::param_fields(p);
        fields.extend((0..8).map(|_| String::new()));
        fields.extend(["0".to_string(), String::new()]);
        return table.row(&fields);
    }
    for (k, root) in roots.iter().enumerate() {
        let s = &root.state;
        let max_re = root.eigenvalues.last().map(|e| e.re).unwrap_or(f64::NAN);
        let mut fields = output::param_fields(p);
        fields.extend([
            k.to_string(),
            fval(s.x1),
            fval(s.y1),
            fval(s.x2),
            fval(s.y2),
            fval(s.z),
            fval(max_re),
            (root.stability == Stability::Stable).to_string(),
            root.degenerate.to_string(),
            roots.len().to_string(),
            String::new(),
        ]);
        table.row(&fields)?;
    }
    Ok(())
}

fn write_trajectory(
    cfg: &RunConfig,
    name: &str,
    traj: &MfTrajectory,
    meta: &serde_json::Value,
) -> Result<()> {
    let mut table =
        Table::create(&cfg.out_dir, name, &["time", "x1", "y1", "x2", "y2", "z"])?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        table.row(&[fval(*t), fval(s.x1), fval(s.y1), fval(s.x2), fval(s.y2), fval(s.z)])?;
    }
    table.finish(meta)
}
