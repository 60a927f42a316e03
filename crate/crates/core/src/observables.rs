//! State diagnostics: entanglement negativity, Wigner and phase
//! distributions, a phase-locking measure, and emission power spectra.

use ndarray as nd;
use ndarray_linalg::{EigValshInto, UPLO};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::linalg::{dagger, hermitize, max_abs, trace_of_product};
use crate::liouvillian::{EigenMode, SuperOperator};

const PI: f64 = std::f64::consts::PI;

/// Expectation value Tr[rho op].
pub fn expectation(rho: &nd::Array2<C64>, op: &nd::Array2<C64>) -> C64 {
    trace_of_product(rho, op)
}

/// Mean phonon number of a joint qubit-phonon density matrix.
pub fn mean_phonon(rho: &nd::Array2<C64>) -> f64 {
    let n = rho.nrows() / 2;
    let mut s = 0.0;
    for q in 0..2 {
        for k in 0..n {
            s += k as f64 * rho[[q * n + k, q * n + k]].re;
        }
    }
    s
}

/// Combined population of phonon levels at or above `m` in a joint state.
pub fn tail_population(rho: &nd::Array2<C64>, m: usize) -> f64 {
    let n = rho.nrows() / 2;
    let mut s = 0.0;
    for q in 0..2 {
        for k in m..n {
            s += rho[[q * n + k, q * n + k]].re;
        }
    }
    s
}

/// Phonon density matrix obtained by tracing out the qubit.
pub fn phonon_reduced(rho: &nd::Array2<C64>) -> nd::Array2<C64> {
    let d = rho.nrows();
    assert!(d.is_multiple_of(2), "joint dimension must be even");
    let n = d / 2;
    let mut out = nd::Array2::<C64>::zeros((n, n));
    for q in 0..2 {
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] += rho[[q * n + i, q * n + j]];
            }
        }
    }
    out
}

/// Logarithmic negativity across the qubit-phonon split.
pub fn log_negativity(rho: &nd::Array2<C64>) -> Result<f64> {
    let d = rho.nrows();
    if d == 0 || rho.ncols() != d || !d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "partial transpose needs an even square dimension, got {}x{}",
            d,
            rho.ncols()
        )));
    }
    let skew = max_abs(&(rho - &dagger(rho)));
    if skew > 1e-8 {
        return Err(Error::InvariantViolation(format!(
            "input is not Hermitian: max skew {skew:e}"
        )));
    }
    let h = hermitize(rho);
    let n = d / 2;
    let mut pt = nd::Array2::<C64>::zeros((d, d));
    for qi in 0..2 {
        for qj in 0..2 {
            for ki in 0..n {
                for kj in 0..n {
                    pt[[qi * n + ki, qj * n + kj]] = h[[qj * n + ki, qi * n + kj]];
                }
            }
        }
    }
    let evals = pt.eigvalsh_into(UPLO::Lower).map_err(Error::Linalg)?;
    let sum: f64 = evals.iter().map(|v| v.abs()).sum();
    let e = sum.log2();
    if (-1e-10..0.0).contains(&e) {
        return Ok(0.0);
    }
    Ok(e)
}

/// Wigner quasiprobability sampled on a rectangular phase-space grid.
#[derive(Debug, Clone)]
pub struct WignerField {
    /// Position grid.
    pub x: Vec<f64>,
    /// Momentum grid.
    pub p: Vec<f64>,
    /// W(x_i, p_j) indexed [i, j].
    pub values: nd::Array2<f64>,
}

/// W(x, p) for one phonon-space density matrix at one phase-space point.
///
/// Accumulates the displacement bands through the generalized Laguerre
/// recurrence, so no factorials or matrix exponentials are formed.
fn wigner_point(rho: &nd::Array2<C64>, x: f64, p: f64) -> f64 {
    let d = rho.nrows();
    let beta = C64::new(x, p) * std::f64::consts::SQRT_2;
    let u = beta.norm_sqr();
    let damp = (-0.5 * u).exp();
    let mut acc = C64::new(0.0, 0.0);
    let mut beta_a = C64::new(1.0, 0.0);
    let mut mbar_a = C64::new(1.0, 0.0);
    let mut r0 = 1.0_f64;
    for a in 0..d {
        let mut r = r0;
        let mut l_prev = 0.0_f64;
        let mut l_cur = 1.0_f64;
        for k in 0..(d - a) {
            let scale = r * damp * l_cur;
            let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
            let sign_ka = if (k + a) % 2 == 0 { 1.0 } else { -1.0 };
            acc += rho[[k, k + a]] * (sign_k * scale) * beta_a;
            if a > 0 {
                acc += rho[[k + a, k]] * (sign_ka * scale) * mbar_a;
            }
            r *= ((k + 1) as f64 / (k + 1 + a) as f64).sqrt();
            let l_next =
                ((2 * k + 1 + a) as f64 - u) * l_cur - (k + a) as f64 * l_prev;
            l_prev = l_cur;
            l_cur = l_next / (k + 1) as f64;
        }
        beta_a *= beta;
        mbar_a *= -beta.conj();
        r0 /= ((a + 1) as f64).sqrt();
    }
    acc.re / PI
}

/// Evaluate the Wigner function of a phonon-space density matrix on a grid.
pub fn wigner(rho: &nd::Array2<C64>, xs: &[f64], ps: &[f64]) -> Result<WignerField> {
    let d = rho.nrows();
    if d == 0 || rho.ncols() != d {
        return Err(Error::InvalidParameter("density matrix must be square".into()));
    }
    if xs.is_empty() || ps.is_empty() {
        return Err(Error::InvalidParameter("phase-space grid must be non-empty".into()));
    }
    if xs.iter().chain(ps).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("phase-space grid must be finite".into()));
    }
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ps.iter().map(|&p| wigner_point(rho, x, p)).collect())
        .collect();
    let mut values = nd::Array2::<f64>::zeros((xs.len(), ps.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            values[[i, j]] = w;
        }
    }
    Ok(WignerField { x: xs.to_vec(), p: ps.to_vec(), values })
}

/// Phase marginal P(phi) on a uniform angular grid.
#[derive(Debug, Clone)]
pub struct PhaseDistribution {
    /// Angular grid phi_k = 2 pi k / n.
    pub phi: Vec<f64>,
    /// P(phi_k), normalized so the 2 pi integral is the trace.
    pub values: Vec<f64>,
}

/// Phase distribution of a phonon-space density matrix.
pub fn phase_distribution(rho: &nd::Array2<C64>, n_phi: usize) -> Result<PhaseDistribution> {
    let d = rho.nrows();
    if d == 0 || rho.ncols() != d {
        return Err(Error::InvalidParameter("density matrix must be square".into()));
    }
    if n_phi < 64 {
        return Err(Error::InvalidParameter(format!(
            "angular resolution {n_phi} is below the minimum of 64"
        )));
    }
    let mut phi = Vec::with_capacity(n_phi);
    let mut values = Vec::with_capacity(n_phi);
    for k in 0..n_phi {
        let ph = 2.0 * PI * k as f64 / n_phi as f64;
        let v: Vec<C64> = (0..d).map(|m| (C64::i() * (m as f64 * ph)).exp()).collect();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..d {
                row += rho[[i, j]] * v[j];
            }
            s += v[i].conj() * row;
        }
        phi.push(ph);
        values.push(s.re / (2.0 * PI));
    }
    Ok(PhaseDistribution { phi, values })
}

/// Phase-locking measure Tr[rho a] / sqrt(Tr[rho n]) of a phonon state.
pub fn sync_measure(rho: &nd::Array2<C64>) -> Result<C64> {
    let d = rho.nrows();
    if d == 0 || rho.ncols() != d {
        return Err(Error::InvalidParameter("density matrix must be square".into()));
    }
    let mut ta = C64::new(0.0, 0.0);
    let mut nn = 0.0;
    for k in 1..d {
        ta += (k as f64).sqrt() * rho[[k, k - 1]];
        nn += k as f64 * rho[[k, k]].re;
    }
    if nn <= 1e-12 {
        return Err(Error::UndefinedMeasure(format!(
            "mean phonon number {nn:e} leaves the phase measure undefined"
        )));
    }
    Ok(ta / nn.sqrt())
}

/// Emission spectrum on a frequency grid, with the interpolated peak position.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    /// Frequency grid.
    pub omega: Vec<f64>,
    /// S(omega_k).
    pub values: Vec<f64>,
    /// Peak frequency from a three-point parabolic fit around the maximum.
    pub omega_obs: f64,
}

fn peak_position(omega: &[f64], values: &[f64]) -> f64 {
    let m = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if m == 0 || m + 1 >= omega.len() {
        return omega[m];
    }
    let (x0, x1, x2) = (omega[m - 1], omega[m], omega[m + 1]);
    let (y0, y1, y2) = (values[m - 1], values[m], values[m + 1]);
    let dl = x1 - x0;
    let dr = x2 - x1;
    let denom = dl * (y1 - y2) + dr * (y1 - y0);
    if denom.abs() < 1e-300 {
        return x1;
    }
    x1 + 0.5 * (dl * dl * (y1 - y2) - dr * dr * (y1 - y0)) / denom
}

/// Spectrum of a dagger(a)-a correlation from the generator eigenmodes.
///
/// Stationary modes are dropped, which removes the coherent delta line, and
/// the remaining modes are kept in descending weight until they carry all but
/// one part in a thousand of the total weight.
pub fn power_spectrum(
    modes: &[EigenMode],
    rho_ss: &QuantumState,
    a: &nd::Array2<C64>,
    omega: &[f64],
) -> Result<PowerSpectrum> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("no eigenmodes supplied".into()));
    }
    if omega.is_empty() {
        return Err(Error::InvalidParameter("frequency grid must be non-empty".into()));
    }
    if let Some(m) = modes.iter().find(|m| m.defective) {
        return Err(Error::Defective(format!(
            "mode {} is defective; the spectral expansion is unavailable",
            m.index
        )));
    }
    let scale = modes.iter().map(|m| m.lambda.norm()).fold(0.0, f64::max);
    let a_rho = a.dot(&rho_ss.rho);
    let mut contribs: Vec<(C64, C64)> = Vec::new();
    for m in modes {
        if m.decay_rate <= 1e-9 * scale {
            continue;
        }
        let c = trace_of_product(&m.left_matrix, &a_rho);
        let mut proj = C64::new(0.0, 0.0);
        for (av, rv) in a.iter().zip(m.right_matrix.iter()) {
            proj += av.conj() * rv;
        }
        contribs.push((c * proj, m.lambda));
    }
    contribs.sort_by(|a, b| {
        b.0.norm().partial_cmp(&a.0.norm()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let total: f64 = contribs.iter().map(|(w, _)| w.norm()).sum();
    let mut kept = Vec::new();
    let mut acc = 0.0;
    for (w, lam) in contribs {
        kept.push((w, lam));
        acc += w.norm();
        if acc >= 0.999 * total {
            break;
        }
    }
    let values: Vec<f64> = omega
        .iter()
        .map(|&w| {
            kept.iter()
                .map(|&(wt, lam)| 2.0 * (wt / (C64::i() * w - lam)).re)
                .sum()
        })
        .collect();
    let omega_obs = peak_position(omega, &values);
    Ok(PowerSpectrum { omega: omega.to_vec(), values, omega_obs })
}

/// Spectrum by direct propagation of the correlation and a windowed
/// trapezoid Fourier transform.
pub fn power_spectrum_direct(
    l: &SuperOperator,
    rho_ss: &QuantumState,
    a: &nd::Array2<C64>,
    t_max: f64,
    n_t: usize,
    omega: &[f64],
) -> Result<PowerSpectrum> {
    if t_max.is_nan() || t_max <= 0.0 || n_t < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation window t_max = {t_max}, n_t = {n_t} is not usable"
        )));
    }
    if omega.is_empty() {
        return Err(Error::InvalidParameter("frequency grid must be non-empty".into()));
    }
    let d = l.dim;
    if rho_ss.rho.nrows() != d || a.nrows() != d || a.ncols() != d {
        return Err(Error::InvalidParameter(
            "state and operator dimensions must match the generator".into(),
        ));
    }
    let ts: Vec<f64> = (0..n_t).map(|k| k as f64 * t_max / (n_t - 1) as f64).collect();
    let v0 = crate::linalg::vec_density(&a.dot(&rho_ss.rho));
    let vs = crate::ode::integrate_c64(|v| l.matrix.dot(v), 0.0, &v0, &ts, 1e-8, 1e-10)?;
    let mean_a = expectation(&rho_ss.rho, a);
    let offset = mean_a.conj() * mean_a;
    let corr: Vec<C64> = vs
        .iter()
        .map(|v| {
            let m = crate::linalg::unvec_density(&v.view(), d);
            let mut s = C64::new(0.0, 0.0);
            for (av, mv) in a.iter().zip(m.iter()) {
                s += av.conj() * mv;
            }
            s - offset
        })
        .collect();
    let dt = t_max / (n_t - 1) as f64;
    let values: Vec<f64> = omega
        .iter()
        .map(|&w| {
            let mut s = C64::new(0.0, 0.0);
            for (k, (&t, &c)) in ts.iter().zip(&corr).enumerate() {
                let wgt = if k == 0 || k == n_t - 1 { 0.5 * dt } else { dt };
                s += c * (C64::i() * (-w * t)).exp() * wgt;
            }
            2.0 * s.re
        })
        .collect();
    let omega_obs = peak_position(omega, &values);
    Ok(PowerSpectrum { omega: omega.to_vec(), values, omega_obs })
}
