//! Validated density-matrix states, adaptive master-equation propagation,
//! and the damped-oscillation fit applied to trajectory observables.

use ndarray as nd;
use ndarray_linalg::{EigValshInto, Solve, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitize, max_abs, trace, unvec_density, vec_density};
use crate::liouvillian::SuperOperator;
use crate::observables;

/// Density matrix tagged with the time it refers to.
#[derive(Debug, Clone)]
pub struct QuantumState {
    /// Density matrix in the joint qubit-phonon basis.
    pub rho: nd::Array2<C64>,
    /// Time label of the state.
    pub time: f64,
}

impl QuantumState {
    /// Validate and wrap a density matrix.
    pub fn new(rho: nd::Array2<C64>, time: f64) -> Result<Self> {
        let state = Self { rho, time };
        state.validate()?;
        Ok(state)
    }

    /// Check Hermiticity, unit trace, and positivity up to numerical slack.
    pub fn validate(&self) -> Result<()> {
        let d = self.rho.nrows();
        if d == 0 || self.rho.ncols() != d {
            return Err(Error::InvalidParameter("density matrix must be square".into()));
        }
        let skew = max_abs(&(&self.rho - &crate::linalg::dagger(&self.rho)));
        if skew > 1e-8 {
            return Err(Error::InvariantViolation(format!(
                "density matrix is not Hermitian: max skew {skew:e}"
            )));
        }
        let tr = trace(&self.rho);
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvariantViolation(format!("trace {tr} is not 1")));
        }
        let evals = hermitize(&self.rho)
            .eigvalsh_into(UPLO::Lower)
            .map_err(Error::Linalg)?;
        let min = evals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-8 {
            return Err(Error::InvariantViolation(format!(
                "negative population {min:e}"
            )));
        }
        Ok(())
    }

    /// Pure basis state |index><index| in a dim-dimensional space.
    pub fn pure_basis(dim: usize, index: usize, time: f64) -> Result<Self> {
        if dim == 0 || index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut rho = nd::Array2::<C64>::zeros((dim, dim));
        rho[[index, index]] = C64::new(1.0, 0.0);
        Ok(Self { rho, time })
    }

    /// Qubit ground state with zero phonons, |g,0><g,0|.
    pub fn ground(n_fock: usize) -> Result<Self> {
        if n_fock < 1 {
            return Err(Error::InvalidParameter("n_fock must be at least 1".into()));
        }
        Self::pure_basis(2 * n_fock, 0, 0.0)
    }
}

/// Time grid, propagated states, and named scalar observables.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Output times.
    pub times: Vec<f64>,
    /// State at each output time; empty for synthetic trajectories.
    pub states: Vec<QuantumState>,
    /// Named observable columns, one value per output time.
    pub observables: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    /// Wrap a single named signal, with no attached states.
    pub fn from_observable(times: Vec<f64>, name: &str, values: Vec<f64>) -> Self {
        Self { times, states: Vec::new(), observables: vec![(name.to_string(), values)] }
    }

    /// Look up an observable column by name.
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Propagate the master equation and record states plus standard observables
/// at each output time.
pub fn evolve(l: &SuperOperator, state0: &QuantumState, times: &[f64]) -> Result<Trajectory> {
    state0.validate()?;
    let d = l.dim;
    if state0.rho.nrows() != d {
        return Err(Error::InvalidParameter(format!(
            "state dimension {} does not match the generator dimension {d}",
            state0.rho.nrows()
        )));
    }
    let v0 = vec_density(&state0.rho);
    let vs = crate::ode::integrate_c64(
        |v| l.matrix.dot(v),
        state0.time,
        &v0,
        times,
        1e-8,
        1e-10,
    )?;

    let mut states = Vec::with_capacity(times.len());
    let mut n_phonon = Vec::with_capacity(times.len());
    let mut sigma_z = Vec::with_capacity(times.len());
    let mut a_re = Vec::with_capacity(times.len());
    let mut a_im = Vec::with_capacity(times.len());
    let mut entanglement = Vec::with_capacity(times.len());
    let n = d / 2;
    for (v, &t) in vs.iter().zip(times) {
        let rho = hermitize(&unvec_density(&v.view(), d));
        n_phonon.push(observables::mean_phonon(&rho));
        let mut sz = 0.0;
        let mut am = C64::new(0.0, 0.0);
        for q in 0..2 {
            let sign = if q == 0 { -1.0 } else { 1.0 };
            for kk in 0..n {
                sz += sign * rho[[q * n + kk, q * n + kk]].re;
                if kk > 0 {
                    am += (kk as f64).sqrt() * rho[[q * n + kk, q * n + kk - 1]];
                }
            }
        }
        sigma_z.push(sz);
        a_re.push(am.re);
        a_im.push(am.im);
        entanglement.push(observables::log_negativity(&rho)?);
        states.push(QuantumState { rho, time: t });
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        observables: vec![
            ("n_phonon".to_string(), n_phonon),
            ("sigma_z".to_string(), sigma_z),
            ("a_re".to_string(), a_re),
            ("a_im".to_string(), a_im),
            ("entanglement".to_string(), entanglement),
        ],
    })
}

/// Parameters of A exp(-b t) sin(w t + phi) + c fitted over [t_min, end].
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Envelope amplitude A.
    pub amplitude: f64,
    /// Envelope decay rate b.
    pub decay: f64,
    /// Angular frequency w.
    pub frequency: f64,
    /// Phase offset phi.
    pub phase: f64,
    /// Constant offset c.
    pub offset: f64,
    /// Start of the fit window.
    pub t_min: f64,
    /// Root-mean-square residual over the window.
    pub residual: f64,
}

fn model_residual(theta: &[f64; 5], ts: &[f64], vs: &[f64]) -> f64 {
    let [a, b, w, phi, c] = *theta;
    let mut s = 0.0;
    for (&t, &v) in ts.iter().zip(vs) {
        let r = a * (-b * t).exp() * (w * t + phi).sin() + c - v;
        s += r * r;
    }
    (s / ts.len() as f64).sqrt()
}

/// One Levenberg-Marquardt descent from a given start; returns (theta, rms).
fn lm_descent(start: [f64; 5], ts: &[f64], vs: &[f64]) -> ([f64; 5], f64) {
    let mut theta = start;
    let mut rms = model_residual(&theta, ts, vs);
    let mut lambda = 1e-3;
    for _ in 0..300 {
        let [a, b, w, phi, c] = theta;
        let mut jtj = nd::Array2::<f64>::zeros((5, 5));
        let mut jtr = nd::Array1::<f64>::zeros(5);
        for (&t, &v) in ts.iter().zip(vs) {
            let env = (-b * t).exp();
            let s = (w * t + phi).sin();
            let cs = (w * t + phi).cos();
            let r = a * env * s + c - v;
            let row = [env * s, -t * a * env * s, t * a * env * cs, a * env * cs, 1.0];
            for i in 0..5 {
                jtr[i] += row[i] * r;
                for j in 0..5 {
                    jtj[[i, j]] += row[i] * row[j];
                }
            }
        }
        let max_diag = (0..5).map(|i| jtj[[i, i]]).fold(0.0, f64::max);
        let floor = 1e-10 * max_diag.max(1e-300);
        let mut damped = jtj.clone();
        for i in 0..5 {
            damped[[i, i]] += lambda * (jtj[[i, i]] + floor);
        }
        let delta = match damped.solve(&jtr.mapv(|x| -x)) {
            Ok(d) => d,
            Err(_) => {
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
                continue;
            }
        };
        let mut cand = theta;
        for i in 0..5 {
            cand[i] += delta[i];
        }
        let cand_rms = model_residual(&cand, ts, vs);
        if cand_rms.is_finite() && cand_rms <= rms {
            let step: f64 = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
            let size: f64 = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
            let gain = rms - cand_rms;
            theta = cand;
            rms = cand_rms;
            lambda = (lambda / 10.0).max(1e-14);
            if step <= 1e-13 * (1.0 + size) || gain < 1e-15 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (theta, rms)
}

/// Fit A exp(-b t) sin(w t + phi) + c to a named observable from t_min on.
///
/// The optional hint seeds the decay rate and frequency; otherwise both are
/// estimated from sign crossings and the envelope of the early window, and
/// a small grid of starts guards against local minima.
pub fn fit_decaying_oscillation(
    traj: &Trajectory,
    name: &str,
    t_min: f64,
    hint: Option<(f64, f64)>,
) -> Result<DecayFit> {
    let values = traj
        .observable(name)
        .ok_or_else(|| Error::NotFound(format!("observable '{name}' not present")))?;
    if values.len() != traj.times.len() {
        return Err(Error::InvalidParameter(format!(
            "observable '{name}' length {} does not match the time grid {}",
            values.len(),
            traj.times.len()
        )));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (&t, &v) in traj.times.iter().zip(values) {
        if t >= t_min {
            ts.push(t);
            vs.push(v);
        }
    }
    if ts.len() < 50 {
        return Err(Error::InvalidParameter(format!(
            "only {} samples past t_min = {t_min}; at least 50 required",
            ts.len()
        )));
    }

    let c0 = vs.iter().sum::<f64>() / vs.len() as f64;
    let detrended: Vec<f64> = vs.iter().map(|v| v - c0).collect();
    let rms0 = (detrended.iter().map(|r| r * r).sum::<f64>() / vs.len() as f64).sqrt();

    let (b0, w0, a0) = if rms0 < 1e-13 * (1.0 + c0.abs()) {
        (0.1, 1.0, 0.0)
    } else {
        // frequency from sign crossings over the early quarter of the window
        let q = (ts.len() / 4).max(8).min(ts.len() - 1);
        let mut crossings = 0usize;
        for k in 1..q {
            if detrended[k - 1] * detrended[k] < 0.0 {
                crossings += 1;
            }
        }
        let span_q = (ts[q - 1] - ts[0]).max(1e-12);
        let w_est = (std::f64::consts::PI * crossings as f64 / span_q).max(0.1);
        // decay from the drop of the envelope between the two early quarters
        let half = ts.len() / 2;
        let rms_a = (detrended[..half].iter().map(|r| r * r).sum::<f64>() / half as f64).sqrt();
        let rms_b = (detrended[half..].iter().map(|r| r * r).sum::<f64>()
            / (ts.len() - half) as f64)
            .sqrt();
        let dt_half = (ts[half] - ts[0]).max(1e-12);
        let b_est = if rms_b > 0.0 { ((rms_a / rms_b).ln() / dt_half).clamp(0.0, 5.0) } else { 1.0 };
        (b_est, w_est, std::f64::consts::SQRT_2 * rms0)
    };

    let mut w_starts = vec![0.25 * w0, 0.5 * w0, w0, 2.0 * w0, 4.0 * w0];
    let mut b_starts = vec![b0];
    if let Some((bh, wh)) = hint {
        w_starts.push(wh);
        w_starts.push(-wh);
        b_starts.push(bh.abs());
    }
    let phis = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, -std::f64::consts::FRAC_PI_2];

    let mut best: Option<([f64; 5], f64)> = None;
    for &bs in &b_starts {
        for &ws in &w_starts {
            for &ph in &phis {
                let (theta, rms) = lm_descent([a0, bs, ws, ph, c0], &ts, &vs);
                if rms.is_finite() && best.as_ref().is_none_or(|(_, r)| rms < *r) {
                    best = Some((theta, rms));
                }
            }
        }
    }
    let (mut theta, mut rms) = best.ok_or(Error::FitFailure { residual: f64::NAN })?;

    if theta[1] < 0.0 {
        if theta[0].abs() <= 1e-8 * (1.0 + theta[4].abs()) {
            theta[1] = 0.0;
            rms = model_residual(&theta, &ts, &vs);
        } else {
            let retry = [theta[0], theta[1].abs(), theta[2], theta[3], theta[4]];
            let (t2, r2) = lm_descent(retry, &ts, &vs);
            if r2 <= rms {
                theta = t2;
                rms = r2;
            }
        }
    }
    if !rms.is_finite() {
        return Err(Error::FitFailure { residual: rms });
    }
    Ok(DecayFit {
        amplitude: theta[0],
        decay: theta[1],
        frequency: theta[2],
        phase: theta[3],
        offset: theta[4],
        t_min,
        residual: rms,
    })
}
