//! Embedded Dormand-Prince 5(4) steppers: one over complex state vectors for
//! the master equation, one over the five mean-field variables.

use ndarray as nd;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn check_grid(t0: f64, touts: &[f64]) -> Result<()> {
    if touts.is_empty() {
        return Err(Error::InvalidParameter("empty output time grid".into()));
    }
    if !touts.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite output time".into()));
    }
    if touts[0] < t0 {
        return Err(Error::InvalidParameter(format!(
            "first output time {} precedes the initial time {t0}",
            touts[0]
        )));
    }
    if touts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("output times must increase strictly".into()));
    }
    Ok(())
}

fn reached(t: f64, tout: f64) -> bool {
    tout <= t + 1e-14 * t.abs().max(1.0)
}

/// Integrate dy/dt = f(y) from t0, returning the state at each output time.
pub(crate) fn integrate_c64<F>(
    f: F,
    t0: f64,
    y0: &nd::Array1<C64>,
    touts: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<nd::Array1<C64>>>
where
    F: Fn(&nd::Array1<C64>) -> nd::Array1<C64>,
{
    check_grid(t0, touts)?;
    let n = y0.len();
    let mut out = Vec::with_capacity(touts.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(&y);
    let span = touts[touts.len() - 1] - t0;
    let mut h = if span > 0.0 { (1e-2 * span).min(1e-2) } else { 1e-2 };

    for &tout in touts {
        while !reached(t, tout) {
            let mut hs = h.min(tout - t);
            loop {
                if hs < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Stiffness(t));
                }
                let mut k = Vec::with_capacity(7);
                k.push(k1.clone());
                for a_row in A.iter().take(6) {
                    let mut ys = y.clone();
                    for (j, kj) in k.iter().enumerate() {
                        let c = a_row[j];
                        if c != 0.0 {
                            ys.zip_mut_with(kj, |a, b| *a += C64::new(hs * c, 0.0) * b);
                        }
                    }
                    k.push(f(&ys));
                }
                let mut y5 = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    if B5[j] != 0.0 {
                        y5.zip_mut_with(kj, |a, b| *a += C64::new(hs * B5[j], 0.0) * b);
                    }
                }
                let mut err2 = 0.0;
                for i in 0..n {
                    let mut e = C64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate() {
                        if E[j] != 0.0 {
                            e += C64::new(hs * E[j], 0.0) * kj[i];
                        }
                    }
                    let sc = atol + rtol * y[i].norm().max(y5[i].norm());
                    let r = e.norm() / sc;
                    err2 += r * r;
                }
                let err = (err2 / n as f64).sqrt();
                if err <= 1.0 {
                    t += hs;
                    y = y5;
                    k1 = k.pop().unwrap();
                    let grow =
                        if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = hs * grow;
                    break;
                }
                hs *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn add5(y: &[f64; 5], h: f64, coeffs: &[f64], k: &[[f64; 5]]) -> [f64; 5] {
    let mut out = *y;
    for (j, kj) in k.iter().enumerate() {
        let c = coeffs[j];
        if c != 0.0 {
            for i in 0..5 {
                out[i] += h * c * kj[i];
            }
        }
    }
    out
}

/// Integrate the five-variable flow, erroring out if the state norm passes
/// the blow-up guard.
pub(crate) fn integrate_r5<F>(
    f: F,
    t0: f64,
    y0: [f64; 5],
    touts: &[f64],
    rtol: f64,
    atol: f64,
    max_abs: f64,
) -> Result<Vec<[f64; 5]>>
where
    F: Fn(&[f64; 5]) -> [f64; 5],
{
    check_grid(t0, touts)?;
    let mut out = Vec::with_capacity(touts.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y);
    let span = touts[touts.len() - 1] - t0;
    let mut h = if span > 0.0 { (1e-2 * span).min(1e-2) } else { 1e-2 };

    for &tout in touts {
        while !reached(t, tout) {
            let mut hs = h.min(tout - t);
            loop {
                if hs < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Stiffness(t));
                }
                let mut k: Vec<[f64; 5]> = Vec::with_capacity(7);
                k.push(k1);
                for s in 0..6 {
                    let ys = add5(&y, hs, &A[s][..=s], &k);
                    k.push(f(&ys));
                }
                let y5 = add5(&y, hs, &B5, &k);
                let mut err2 = 0.0;
                for i in 0..5 {
                    let mut e = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        e += hs * E[j] * kj[i];
                    }
                    let sc = atol + rtol * y[i].abs().max(y5[i].abs());
                    let r = e / sc;
                    err2 += r * r;
                }
                let err = (err2 / 5.0).sqrt();
                if err <= 1.0 {
                    t += hs;
                    y = y5;
                    k1 = k[6];
                    if y.iter().any(|v| !v.is_finite() || v.abs() > max_abs) {
                        return Err(Error::BlowUp(t));
                    }
                    let grow =
                        if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = hs * grow;
                    break;
                }
                hs *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            }
        }
        out.push(y);
    }
    Ok(out)
}
