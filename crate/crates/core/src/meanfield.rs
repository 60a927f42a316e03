//! Mean-field reduction of the driven ion laser: the five-dimensional flow,
//! its fixed points and their stability, limit-cycle diagnostics, and the
//! drive-detuning phase diagram.

use ndarray as nd;
use ndarray_linalg::{EigVals, Solve};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::SystemParams;

/// Factorized first moments: oscillator quadratures (x1, y1), qubit
/// coherences (x2, y2), and the inversion z.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanFieldState {
    /// Re of the oscillator amplitude.
    pub x1: f64,
    /// Im of the oscillator amplitude.
    pub y1: f64,
    /// Re of the qubit coherence.
    pub x2: f64,
    /// Im of the qubit coherence.
    pub y2: f64,
    /// Qubit inversion.
    pub z: f64,
}

impl MeanFieldState {
    /// Components in the order (x1, y1, x2, y2, z).
    pub fn as_array(&self) -> [f64; 5] {
        [self.x1, self.y1, self.x2, self.y2, self.z]
    }

    /// Rebuild from the (x1, y1, x2, y2, z) component order.
    pub fn from_array(v: [f64; 5]) -> Self {
        Self { x1: v[0], y1: v[1], x2: v[2], y2: v[3], z: v[4] }
    }
}

/// Time derivative of the mean-field state.
pub fn mf_rhs(st: &MeanFieldState, params: &SystemParams) -> MeanFieldState {
    let eo = params.eta * params.omega;
    MeanFieldState {
        x1: eo * st.x2 - 0.5 * params.big_gamma * st.x1 - params.detuning * st.y1
            + params.drive_f,
        y1: eo * st.y2 - 0.5 * params.big_gamma * st.y1 + params.detuning * st.x1,
        x2: -eo * st.z * st.x1 - 0.5 * params.gamma * st.x2 - params.detuning * st.y2,
        y2: -eo * st.z * st.y1 - 0.5 * params.gamma * st.y2 + params.detuning * st.x2,
        z: 4.0 * eo * (st.x1 * st.x2 + st.y1 * st.y2) - params.gamma * (st.z + 1.0),
    }
}

/// Linearization of the flow at a state, rows and columns in component order.
pub fn jacobian(st: &MeanFieldState, params: &SystemParams) -> nd::Array2<f64> {
    let eo = params.eta * params.omega;
    let g = params.gamma;
    let gg = params.big_gamma;
    let d = params.detuning;
    nd::arr2(&[
        [-0.5 * gg, -d, eo, 0.0, 0.0],
        [d, -0.5 * gg, 0.0, eo, 0.0],
        [-eo * st.z, 0.0, -0.5 * g, -d, -eo * st.x1],
        [0.0, -eo * st.z, d, -0.5 * g, -eo * st.y1],
        [4.0 * eo * st.x2, 4.0 * eo * st.y2, 4.0 * eo * st.x1, 4.0 * eo * st.y1, -g],
    ])
}

/// Lasing threshold Rabi frequency and the limit-cycle amplitude above it.
///
/// Below threshold the amplitude is exactly zero.
pub fn threshold_and_amplitude(params: &SystemParams) -> (f64, f64) {
    let omega_th = (params.gamma * params.big_gamma).sqrt() / (2.0 * params.eta);
    let eo = params.eta * params.omega;
    let r2 = params.gamma / (2.0 * params.big_gamma)
        - params.gamma * params.gamma / (8.0 * eo * eo);
    let amplitude = if r2 > 0.0 { r2.sqrt() } else { 0.0 };
    (omega_th, amplitude)
}

/// Linear stability of a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// All eigenvalues have a negative real part.
    Stable,
    /// At least one eigenvalue has a non-negative real part.
    Unstable,
}

/// A root of the mean-field flow with its linearized spectrum.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    /// Location of the root.
    pub state: MeanFieldState,
    /// Eigenvalues of the linearization, sorted by (re, im).
    pub eigenvalues: Vec<C64>,
    /// Sign of the leading real part.
    pub stability: Stability,
    /// True when the leading real part is within 1e-8 of zero, so the
    /// stability call is not meaningful.
    pub degenerate: bool,
}

fn norm5(v: &[f64; 5]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton iteration from one seed; None when it fails to converge.
fn newton_root(seed: [f64; 5], params: &SystemParams) -> Option<[f64; 5]> {
    let f = |v: &[f64; 5]| mf_rhs(&MeanFieldState::from_array(*v), params).as_array();
    let mut x = seed;
    let mut fx = f(&x);
    let mut res = norm5(&fx);
    for _ in 0..80 {
        if res <= 1e-11 {
            return Some(x);
        }
        let j = jacobian(&MeanFieldState::from_array(x), params);
        let rhs = nd::arr1(&fx.map(|v| -v));
        let delta = j.solve(&rhs).ok()?;
        let mut alpha = 1.0;
        let mut advanced = false;
        for _ in 0..40 {
            let mut cand = x;
            for i in 0..5 {
                cand[i] += alpha * delta[i];
            }
            let fc = f(&cand);
            let rc = norm5(&fc);
            if rc.is_finite() && rc < res {
                x = cand;
                fx = fc;
                res = rc;
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    if res <= 1e-11 {
        Some(x)
    } else {
        None
    }
}

/// Complete an oscillator amplitude guess to a stationary qubit coherence.
fn completed_seed(a: C64, z: f64, params: &SystemParams) -> [f64; 5] {
    let eo = params.eta * params.omega;
    let s = -eo * z * a / C64::new(0.5 * params.gamma, -params.detuning);
    [a.re, a.im, s.re, s.im, z]
}

/// Exact driven fixed points from the amplitude response.
///
/// With s and z eliminated, the stationary conditions close into a cubic in
/// v = 1 + c|a|^2, so every driven root is in hand before Newton polishing.
fn driven_response_seeds(params: &SystemParams) -> Vec<[f64; 5]> {
    let e = (params.eta * params.omega).powi(2);
    let big_g = 0.5 * params.big_gamma;
    let g = 0.5 * params.gamma;
    let dd = params.detuning;
    let w2 = g * g + dd * dd;
    let c = 2.0 * e / w2;
    let ff = params.drive_f * params.drive_f;
    if ff == 0.0 || c < 1e-14 {
        return Vec::new();
    }
    let p3 = (big_g * big_g + dd * dd) * w2;
    let q = -2.0 * e * (big_g * g - dd * dd);
    let r = e * e;
    let s = 2.0 * e * ff;
    // p3 v^3 + (q - p3 - s) v^2 + (r - q) v - r = 0
    let b2 = (q - p3 - s) / p3;
    let b1 = (r - q) / p3;
    let b0 = -r / p3;
    let companion = nd::arr2(&[
        [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-b0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(-b1, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(-b2, 0.0)],
    ]);
    let roots = match companion.eigvals() {
        Ok(v) => v,
        Err(_) => return Vec::new(),
    };
    let mut seeds = Vec::new();
    for v in roots.iter() {
        if v.im.abs() > 1e-6 * v.norm().max(1.0) || v.re < 1.0 - 1e-9 {
            continue;
        }
        let vv = v.re.max(1.0);
        let z = -1.0 / vv;
        let chi = C64::new(big_g, -dd) - C64::new(e, 0.0) / (vv * C64::new(g, -dd));
        if chi.norm() < 1e-14 {
            continue;
        }
        let a = C64::new(params.drive_f, 0.0) / chi;
        seeds.push(completed_seed(a, z, params));
    }
    seeds
}

/// Locate the fixed points of the mean-field flow.
///
/// A deterministic family of seeds (the undriven inversion point, the linear
/// drive response, the limit-cycle ring, and a coarse amplitude grid) is
/// polished by damped Newton iteration; converged roots are deduplicated and
/// classified by the eigenvalues of the linearization.
pub fn find_fixed_points(params: &SystemParams) -> Result<Vec<FixedPoint>> {
    params.validate()?;
    let eo = params.eta * params.omega;
    let mut seeds: Vec<[f64; 5]> = vec![
        [0.0, 0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
    ];
    let chi = C64::new(0.5 * params.big_gamma, -params.detuning)
        - eo * eo / C64::new(0.5 * params.gamma, -params.detuning);
    if chi.norm() > 1e-12 {
        let a = C64::new(params.drive_f, 0.0) / chi;
        seeds.push(completed_seed(a, -1.0, params));
    }
    seeds.extend(driven_response_seeds(params));
    let (_omega_th, amp) = threshold_and_amplitude(params);
    let phases: Vec<f64> =
        (0..8).map(|k| 2.0 * std::f64::consts::PI * k as f64 / 8.0).collect();
    if amp > 0.0 {
        let z0 = -params.gamma * params.big_gamma / (4.0 * eo * eo);
        for &ph in &phases {
            let a = C64::from_polar(amp, ph);
            seeds.push(completed_seed(a, z0, params));
        }
    }
    for &r in &[0.3, 0.8, 1.5, 2.5] {
        for &ph in &phases {
            for &z in &[-1.0, -0.4] {
                seeds.push(completed_seed(C64::from_polar(r, ph), z, params));
            }
        }
    }

    let mut roots: Vec<[f64; 5]> = Vec::new();
    for seed in seeds {
        if let Some(x) = newton_root(seed, params) {
            let dup = roots.iter().any(|r| {
                let mut s = 0.0;
                for i in 0..5 {
                    s += (r[i] - x[i]) * (r[i] - x[i]);
                }
                s.sqrt() <= 1e-5
            });
            if !dup {
                roots.push(x);
            }
        }
    }
    if roots.is_empty() {
        eprintln!(
            "warning: no mean-field fixed points converged at omega = {}, drive_f = {}, detuning = {}",
            params.omega, params.drive_f, params.detuning
        );
        return Ok(Vec::new());
    }
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let state = MeanFieldState::from_array(r);
        let j = jacobian(&state, params).mapv(C64::from);
        let mut eigenvalues: Vec<C64> = j.eigvals().map_err(Error::Linalg)?.to_vec();
        eigenvalues.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let stability = if max_re < 0.0 { Stability::Stable } else { Stability::Unstable };
        out.push(FixedPoint { state, eigenvalues, stability, degenerate: max_re.abs() <= 1e-8 });
    }
    Ok(out)
}

/// Mean-field trajectory on an output grid.
#[derive(Debug, Clone)]
pub struct MfTrajectory {
    /// Output times.
    pub times: Vec<f64>,
    /// State at each output time.
    pub states: Vec<MeanFieldState>,
}

/// Integrate the mean-field flow, reporting the state on the output grid.
pub fn integrate_mf(
    state0: &MeanFieldState,
    params: &SystemParams,
    times: &[f64],
) -> Result<MfTrajectory> {
    params.validate()?;
    let t0 = *times
        .first()
        .ok_or_else(|| Error::InvalidParameter("output grid is empty".into()))?;
    let f = |v: &[f64; 5]| mf_rhs(&MeanFieldState::from_array(*v), params).as_array();
    let ys = crate::ode::integrate_r5(f, t0, state0.as_array(), times, 1e-9, 1e-12, 1e6)?;
    Ok(MfTrajectory {
        times: times.to_vec(),
        states: ys.into_iter().map(MeanFieldState::from_array).collect(),
    })
}

/// Minimum distance between the closing stretch of a trajectory and its
/// final state, with the samples immediately before the end excluded.
///
/// The tail is scanned through a cubic interpolant between samples, so a
/// recurring orbit scores near zero even when the grid straddles the close
/// pass. Returns infinity when the tail is too short to scan.
pub fn tail_recurrence(traj: &MfTrajectory, frac: f64) -> f64 {
    let len = traj.states.len();
    if len < 2 || !frac.is_finite() {
        return f64::INFINITY;
    }
    let tail_len = ((frac * len as f64).ceil().max(4.0) as usize).min(len);
    let guard = (tail_len / 10).max(4);
    if tail_len <= guard + 4 {
        return f64::INFINITY;
    }
    let start = len - tail_len;
    let end = len - guard;
    if end - start < 5 {
        return f64::INFINITY;
    }
    let target = traj.states[len - 1].as_array();
    let dist = |v: &[f64; 5]| {
        let mut s = 0.0;
        for i in 0..5 {
            s += (v[i] - target[i]) * (v[i] - target[i]);
        }
        s.sqrt()
    };
    let mut best = f64::INFINITY;
    for i in start..end {
        best = best.min(dist(&traj.states[i].as_array()));
    }
    // cubic Lagrange through each 4-sample window, scanned on the middle span
    for i in start..end.saturating_sub(3) {
        let ts = [traj.times[i], traj.times[i + 1], traj.times[i + 2], traj.times[i + 3]];
        let ys = [
            traj.states[i].as_array(),
            traj.states[i + 1].as_array(),
            traj.states[i + 2].as_array(),
            traj.states[i + 3].as_array(),
        ];
        for m in 1..64 {
            let tau = ts[1] + (ts[2] - ts[1]) * m as f64 / 64.0;
            let mut v = [0.0; 5];
            for (j, y) in ys.iter().enumerate() {
                let mut w = 1.0;
                for k in 0..4 {
                    if k != j {
                        w *= (tau - ts[k]) / (ts[j] - ts[k]);
                    }
                }
                for c in 0..5 {
                    v[c] += w * y[c];
                }
            }
            best = best.min(dist(&v));
        }
    }
    best
}

/// Qualitative fate of the mean-field flow at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// A single stable fixed point.
    A,
    /// Three fixed points with exactly one stable.
    B,
    /// A single unstable fixed point.
    C,
    /// Anything else, including marginal or unresolved cases.
    Unknown,
}

/// Raster of region labels over detuning and drive with refined boundaries.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    /// Detuning grid.
    pub delta: Vec<f64>,
    /// Drive amplitude grid.
    pub f: Vec<f64>,
    /// Region label at (delta_i, f_j), indexed [i, j].
    pub labels: nd::Array2<RegionLabel>,
    /// Number of fixed points found at each grid cell.
    pub counts: nd::Array2<usize>,
    /// Refined (delta, f) boundary points where the fixed-point count is
    /// conserved across the crossing.
    pub hopf: Vec<(f64, f64)>,
    /// Refined (delta, f) boundary points where the count changes.
    pub saddle_node: Vec<(f64, f64)>,
}

fn classify(params: &SystemParams, delta: f64, f: f64) -> (RegionLabel, usize) {
    let p = SystemParams { detuning: delta, drive_f: f, ..*params };
    let fps = match find_fixed_points(&p) {
        Ok(v) => v,
        Err(_) => return (RegionLabel::Unknown, 0),
    };
    let n = fps.len();
    if n == 0 || fps.iter().any(|fp| fp.degenerate) {
        return (RegionLabel::Unknown, n);
    }
    let stable = fps.iter().filter(|fp| fp.stability == Stability::Stable).count();
    let label = match (n, stable) {
        (1, 1) => RegionLabel::A,
        (3, 1) => RegionLabel::B,
        (1, 0) => RegionLabel::C,
        _ => RegionLabel::Unknown,
    };
    (label, n)
}

/// Classify the mean-field flow over a (detuning, drive) rectangle and
/// refine the region boundaries along the detuning axis by bisection.
pub fn phase_diagram(
    params: &SystemParams,
    delta_range: (f64, f64),
    f_range: (f64, f64),
    resolution: usize,
) -> Result<PhaseDiagram> {
    params.validate()?;
    if resolution < 16 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} is below the minimum of 16"
        )));
    }
    let (dlo, dhi) = delta_range;
    let (flo, fhi) = f_range;
    if dhi <= dlo || fhi <= flo || !dlo.is_finite() || !dhi.is_finite()
        || !flo.is_finite() || !fhi.is_finite()
    {
        return Err(Error::InvalidParameter(
            "phase-diagram ranges must be finite and increasing".into(),
        ));
    }
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
    let delta: Vec<f64> = (0..resolution).map(|i| step(dlo, dhi, i)).collect();
    let f: Vec<f64> = (0..resolution).map(|j| step(flo, fhi, j)).collect();

    let cells: Vec<(RegionLabel, usize)> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| classify(params, delta[idx / resolution], f[idx % resolution]))
        .collect();
    let mut labels = nd::Array2::from_elem((resolution, resolution), RegionLabel::Unknown);
    let mut counts = nd::Array2::<usize>::zeros((resolution, resolution));
    for (idx, (lab, n)) in cells.iter().enumerate() {
        labels[[idx / resolution, idx % resolution]] = *lab;
        counts[[idx / resolution, idx % resolution]] = *n;
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..resolution {
        for i in 0..resolution - 1 {
            let a = labels[[i, j]];
            let b = labels[[i + 1, j]];
            if a != b && a != RegionLabel::Unknown && b != RegionLabel::Unknown {
                pairs.push((i, j));
            }
        }
    }
    let refined: Vec<(f64, f64, bool)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let fv = f[j];
            let lo_label = labels[[i, j]];
            let (mut lo, mut hi) = (delta[i], delta[i + 1]);
            while hi - lo > 1e-3 {
                let mid = 0.5 * (lo + hi);
                let (ml, _) = classify(params, mid, fv);
                if ml == lo_label {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let conserved = counts[[i, j]] == counts[[i + 1, j]];
            (0.5 * (lo + hi), fv, conserved)
        })
        .collect();
    let mut hopf = Vec::new();
    let mut saddle_node = Vec::new();
    for (d, fv, conserved) in refined {
        if conserved {
            hopf.push((d, fv));
        } else {
            saddle_node.push((d, fv));
        }
    }
    Ok(PhaseDiagram { delta, f, labels, counts, hopf, saddle_node })
}
