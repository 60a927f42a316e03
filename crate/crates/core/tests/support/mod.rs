//! Shared oracles for the integration tests: matrix exponential, a brute-force
//! superoperator assembled straight from the master-equation definition, and
//! reference formulas evaluated independently of the library code paths.
#![allow(dead_code)]

use ndarray as nd;
use ndarray_linalg::{OperationNorm, Solve};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard-normal sample via Box-Muller.
pub fn randn(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn randc(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(randn(rng), randn(rng))
}

/// Random density matrix of the given rank (Ginibre construction).
pub fn random_density(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> nd::Array2<C64> {
    let g = nd::Array2::from_shape_fn((d, rank), |_| randc(rng));
    let rho = g.dot(&g.mapv(|z| z.conj()).t());
    let tr: C64 = rho.diag().sum();
    rho / tr
}

/// Haar-like random unitary: QR of a Ginibre matrix with phases fixed from R.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> nd::Array2<C64> {
    use ndarray_linalg::QR;
    let g = nd::Array2::from_shape_fn((d, d), |_| randc(rng));
    let (q, r) = g.qr().unwrap();
    let phases: Vec<C64> = (0..d).map(|i| r[[i, i]] / r[[i, i]].norm()).collect();
    let mut q = q;
    for (j, ph) in phases.iter().enumerate() {
        q.column_mut(j).mapv_inplace(|z| z * ph);
    }
    q
}

pub fn dagger(m: &nd::Array2<C64>) -> nd::Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn eye(d: usize) -> nd::Array2<C64> {
    nd::Array2::eye(d)
}

/// Matrix exponential by Pade-13 approximation with scaling and squaring.
pub fn expm(a: &nd::Array2<C64>) -> nd::Array2<C64> {
    const THETA13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let d = a.nrows();
    let norm = a.opnorm_one().unwrap();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let id = eye(d);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = a6.mapv(|z| z * B[13]) + a4.mapv(|z| z * B[11]) + a2.mapv(|z| z * B[9]);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|z| z * B[7])
            + a4.mapv(|z| z * B[5])
            + a2.mapv(|z| z * B[3])
            + id.mapv(|z| z * B[1])),
    );
    let v_inner = a6.mapv(|z| z * B[12]) + a4.mapv(|z| z * B[10]) + a2.mapv(|z| z * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * B[6])
        + a4.mapv(|z| z * B[4])
        + a2.mapv(|z| z * B[2])
        + id.mapv(|z| z * B[0]);
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = nd::Array2::zeros((d, d));
    for j in 0..d {
        let col = lhs.solve(&rhs.column(j).to_owned()).unwrap();
        x.column_mut(j).assign(&col);
    }
    for _ in 0..s {
        x = x.dot(&x);
    }
    x
}

/// Column-stacked vectorization, vec(M)[i + d*j] = M[i, j].
pub fn vec_cs(m: &nd::Array2<C64>) -> nd::Array1<C64> {
    let d = m.nrows();
    nd::Array1::from_shape_fn(d * d, |alpha| m[[alpha % d, alpha / d]])
}

pub fn unvec_cs(v: &nd::Array1<C64>, d: usize) -> nd::Array2<C64> {
    nd::Array2::from_shape_fn((d, d), |(i, j)| v[i + d * j])
}

/// Superoperator assembled entry-by-entry from the master-equation definition:
/// feed every basis matrix unit through rho-dot and record the output column.
/// Uses only dense matrix products, no Kronecker identities.
pub fn brute_force_superop(h: &nd::Array2<C64>, collapse: &[nd::Array2<C64>]) -> nd::Array2<C64> {
    let d = h.nrows();
    let mut l = nd::Array2::<C64>::zeros((d * d, d * d));
    let cdc: Vec<nd::Array2<C64>> = collapse.iter().map(|c| dagger(c).dot(c)).collect();
    for b in 0..d {
        for a in 0..d {
            let mut unit = nd::Array2::<C64>::zeros((d, d));
            unit[[a, b]] = C64::new(1.0, 0.0);
            let mut rhs = (h.dot(&unit) - unit.dot(h)).mapv(|z| -C64::i() * z);
            for (c, cc) in collapse.iter().zip(&cdc) {
                rhs = rhs + c.dot(&unit).dot(&dagger(c))
                    - (cc.dot(&unit) + unit.dot(cc)).mapv(|z| 0.5 * z);
            }
            l.column_mut(a + d * b).assign(&vec_cs(&rhs));
        }
    }
    l
}

/// Position-basis diagonal of a Fock-space density matrix,
/// <x|rho|x> with x = (a + a^dag)/sqrt(2), via Hermite functions.
pub fn position_density(rho_ph: &nd::Array2<C64>, x: f64) -> f64 {
    let n = rho_ph.nrows();
    // psi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))
    let mut psi = vec![0.0f64; n];
    let norm0 = (std::f64::consts::PI).powf(-0.25) * (-0.5 * x * x).exp();
    psi[0] = norm0;
    if n > 1 {
        psi[1] = std::f64::consts::SQRT_2 * x * norm0;
    }
    for k in 2..n {
        let kf = k as f64;
        psi[k] = ((2.0 / kf).sqrt() * x * psi[k - 1]) - (((kf - 1.0) / kf).sqrt() * psi[k - 2]);
    }
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += rho_ph[[i, j]] * psi[i] * psi[j];
        }
    }
    s.re
}

/// Wigner value at one phase-space point from numerically exponentiated
/// displacement operators: W = (1/pi) sum_n (-1)^n <n|D^dag rho D|n>.
/// The exponentiation runs in a padded embedding wide enough that the
/// displaced state never reaches the artificial edge.
pub fn wigner_displaced_parity(rho_ph: &nd::Array2<C64>, x: f64, p: f64) -> f64 {
    let n = rho_ph.nrows();
    let alpha = C64::new(x, p) / C64::new(std::f64::consts::SQRT_2, 0.0);
    let pad = n
        + (8.0 * alpha.norm_sqr() + 12.0 * alpha.norm() * (n as f64).sqrt() + 24.0).ceil()
            as usize;
    let mut rho = nd::Array2::<C64>::zeros((pad, pad));
    rho.slice_mut(nd::s![..n, ..n]).assign(rho_ph);
    let mut gen = nd::Array2::<C64>::zeros((pad, pad));
    for k in 1..pad {
        let r = (k as f64).sqrt();
        gen[[k, k - 1]] = alpha * r; // alpha * a^dag
        gen[[k - 1, k]] = -alpha.conj() * r; // -conj(alpha) * a
    }
    let disp = expm(&gen);
    let rot = dagger(&disp).dot(&rho).dot(&disp);
    let mut w = 0.0;
    for k in 0..pad {
        w += if k % 2 == 0 { rot[[k, k]].re } else { -rot[[k, k]].re };
    }
    w / std::f64::consts::PI
}

pub fn max_abs_diff(a: &nd::Array2<C64>, b: &nd::Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Map fit parameters of A exp(-b t) sin(w t + phi) + c onto the equivalent
/// representative with positive amplitude and sign(w) matching ref_w, using
/// (A, w, phi) ~ (-A, -w, -phi) and (A, phi) ~ (-A, phi + pi), phi in (-pi, pi].
pub fn canonical_fit(
    a: f64,
    b: f64,
    w: f64,
    phi: f64,
    c: f64,
    ref_w: f64,
) -> (f64, f64, f64, f64, f64) {
    use std::f64::consts::PI;
    let (mut a, mut w, mut phi) = (a, w, phi);
    if w * ref_w < 0.0 {
        a = -a;
        w = -w;
        phi = -phi;
    }
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    phi = phi.rem_euclid(2.0 * PI);
    if phi > PI {
        phi -= 2.0 * PI;
    }
    (a, b, w, phi, c)
}

/// Truncated coherent-state density matrix, renormalized to unit trace.
pub fn coherent_density(alpha: C64, n: usize) -> nd::Array2<C64> {
    let mut amp = nd::Array1::<C64>::zeros(n);
    amp[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 1..n {
        amp[k] = amp[k - 1] * alpha / C64::new((k as f64).sqrt(), 0.0);
    }
    let norm: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
    let mut rho = nd::Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            rho[[i, j]] = amp[i] * amp[j].conj() / norm;
        }
    }
    rho
}

/// Embed a Fock-space density matrix as (ground qubit) x rho_ph.
pub fn embed_phonon(rho_ph: &nd::Array2<C64>) -> nd::Array2<C64> {
    let n = rho_ph.nrows();
    let mut rho = nd::Array2::<C64>::zeros((2 * n, 2 * n));
    rho.slice_mut(nd::s![..n, ..n]).assign(rho_ph);
    rho
}
