//! Dense Liouvillian superoperator in column-stacking convention: assembly,
//! steady-state solve, eigenmode decomposition, and the exceptional-point
//! scan of the two slowest modes.

use ndarray as nd;
use ndarray::linalg::kron;
use ndarray_linalg::{Eig, EigVals, Inverse, Solve};
use num_complex::Complex64 as C64;

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, build_operators, SystemParams};
use crate::linalg::{dagger, eye, frobenius, unvec_density, vec_density};

/// Generator of the master equation acting on column-stacked densities.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    /// Dense d^2 x d^2 generator matrix.
    pub matrix: nd::Array2<C64>,
    /// Hilbert-space dimension d.
    pub dim: usize,
}

/// Collapse operators with rates folded in: sqrt(gamma) sigma_- and
/// sqrt(Gamma) a.
pub fn collapse_operators(params: &SystemParams) -> Result<Vec<nd::Array2<C64>>> {
    let ops = build_operators(params)?;
    Ok(vec![
        ops.sigma_minus.mapv(|z| z * params.gamma.sqrt()),
        ops.a.mapv(|z| z * params.big_gamma.sqrt()),
    ])
}

/// Assemble the Liouvillian from Kronecker identities on the column-stacking
/// convention vec(A X B) = kron(B^T, A) vec(X).
pub fn build_liouvillian(params: &SystemParams) -> Result<SuperOperator> {
    let h = build_hamiltonian(params)?;
    let d = params.dim();
    let id = eye(d);
    let mut m = (kron(&id, &h) - kron(&h.t(), &id)).mapv(|z| -C64::i() * z);
    for c in collapse_operators(params)? {
        let cdc = dagger(&c).dot(&c);
        let cbar = c.mapv(|z| z.conj());
        m = m + kron(&cbar, &c) - (kron(&id, &cdc) + kron(&cdc.t(), &id)).mapv(|z| 0.5 * z);
    }
    Ok(SuperOperator { matrix: m, dim: d })
}

/// Replace one row of the generator with the trace functional and solve for
/// the unit-trace null vector.
fn solve_with_trace_row(l: &SuperOperator, row: usize, weight: f64) -> Result<nd::Array1<C64>> {
    let d = l.dim;
    let mut a = l.matrix.clone();
    for z in a.row_mut(row).iter_mut() {
        *z = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[[row, i + d * i]] = C64::new(weight, 0.0);
    }
    let mut b = nd::Array1::<C64>::zeros(d * d);
    b[row] = C64::new(weight, 0.0);
    a.solve(&b).map_err(|_| Error::DegenerateSteadyState)
}

/// Solve L rho = 0 with Tr rho = 1 by trace-row replacement.
///
/// Uniqueness of the zero eigenvalue is checked by re-solving with the
/// replaced row at the opposite end of the system; a disagreement means a
/// second null direction exists.
pub fn steady_state(l: &SuperOperator) -> Result<QuantumState> {
    let d = l.dim;
    let n2 = d * d;
    if l.matrix.nrows() != n2 || l.matrix.ncols() != n2 {
        return Err(Error::InvalidParameter("superoperator shape mismatch".into()));
    }
    let norm_l = frobenius(&l.matrix);
    // weight the trace row like a typical generator row so pivoting stays sane
    let w = (norm_l / d as f64).max(1e-300);

    let v0 = solve_with_trace_row(l, 0, w)?;
    let v1 = solve_with_trace_row(l, n2 - 1, w)?;
    let gap = (&v0 - &v1).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = v0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    if gap > 1e-6 * scale {
        return Err(Error::DegenerateSteadyState);
    }

    let mut rho = unvec_density(&v0.view(), d);
    rho = crate::linalg::hermitize(&rho);
    let tr = crate::linalg::trace(&rho);
    if tr.norm() < 1e-12 {
        return Err(Error::DegenerateSteadyState);
    }
    rho.mapv_inplace(|z| z / tr);

    let residual = l
        .matrix
        .dot(&vec_density(&rho))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-8 * norm_l {
        return Err(Error::Convergence(format!(
            "steady-state residual {residual:e} exceeds 1e-8 |L| = {:e}",
            1e-8 * norm_l
        )));
    }
    QuantumState::new(rho, 0.0)
}

/// One eigenmode of the generator in the sorted spectrum.
#[derive(Debug, Clone)]
pub struct EigenMode {
    /// Position in the sorted spectrum; 0 is the stationary mode.
    pub index: usize,
    /// Eigenvalue.
    pub lambda: C64,
    /// |Re lambda|.
    pub decay_rate: f64,
    /// Im lambda.
    pub frequency: f64,
    /// Right eigenmatrix, unit Frobenius norm.
    pub right_matrix: nd::Array2<C64>,
    /// Left eigenmatrix, scaled so Tr[rho_i sigma_j] = delta_ij.
    pub left_matrix: nd::Array2<C64>,
    /// Eigenvalue condition number above 1e6: the pair is numerically
    /// inseparable and expansion coefficients are unreliable.
    pub defective: bool,
}

/// Sort eigenvalue indices by ascending |Re|, resolving near-ties (conjugate
/// pairs agree only to roundoff) by ascending Im.
fn sorted_order(vals: &nd::Array1<C64>) -> Vec<usize> {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        vals[a]
            .re
            .abs()
            .partial_cmp(&vals[b].re.abs())
            .unwrap()
            .then(vals[a].im.partial_cmp(&vals[b].im).unwrap())
    });
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-11 * scale.max(1e-300);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (vals[order[j]].re.abs() - vals[order[j - 1]].re.abs()).abs() <= tol {
            j += 1;
        }
        order[i..j].sort_by(|&a, &b| {
            vals[a]
                .im
                .partial_cmp(&vals[b].im)
                .unwrap()
                .then(vals[a].re.abs().partial_cmp(&vals[b].re.abs()).unwrap())
        });
        i = j;
    }
    order
}

/// Full eigendecomposition returning the k slowest modes.
///
/// Right matrices are unit Frobenius norm with the trace (or, if traceless,
/// the largest entry) rotated to the positive real axis; left matrices come
/// from the inverse eigenvector basis so the biorthonormality
/// Tr[rho_i sigma_j] = delta_ij holds without further scaling.
pub fn eigenspectrum(l: &SuperOperator, k: usize) -> Result<Vec<EigenMode>> {
    let d = l.dim;
    let n2 = d * d;
    if k == 0 || k > n2 {
        return Err(Error::InvalidParameter(format!("mode count {k} outside 1..={n2}")));
    }
    let (vals, vecs) = l.matrix.eig()?;
    let mut v = vecs;
    for j in 0..n2 {
        let mut col = v.column_mut(j);
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            col.mapv_inplace(|z| z / nrm);
        }
        let tr: C64 = (0..d).map(|i| col[i + d * i]).sum();
        let anchor = if tr.norm() > 1e-12 {
            tr
        } else {
            let mut best = C64::new(1.0, 0.0);
            let mut bn = 0.0;
            for z in col.iter() {
                if z.norm() > bn {
                    bn = z.norm();
                    best = *z;
                }
            }
            best
        };
        let phase = anchor / anchor.norm();
        col.mapv_inplace(|z| z * phase.conj());
    }
    let w = v.inv()?;

    let order = sorted_order(&vals);
    let mut modes = Vec::with_capacity(k);
    for (pos, &j) in order.iter().take(k).enumerate() {
        let lambda = vals[j];
        let col = v.column(j);
        let right = unvec_density(&col, d);
        // left row in the same pairing, transposed without conjugation so
        // Tr[right . left] equals the plain dot product of the two vectors
        let mut left = nd::Array2::<C64>::zeros((d, d));
        for p in 0..d {
            for q in 0..d {
                left[[p, q]] = w[[j, q + d * p]];
            }
        }
        let kappa = w.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        modes.push(EigenMode {
            index: pos,
            lambda,
            decay_rate: lambda.re.abs(),
            frequency: lambda.im,
            right_matrix: right,
            left_matrix: left,
            defective: !kappa.is_finite() || kappa > 1e6,
        });
    }
    Ok(modes)
}

/// Evaluate the eigenmode expansion sum_j Tr[sigma_j rho0] e^(lambda_j t) rho_j.
pub fn reconstruct_state(
    modes: &[EigenMode],
    rho0: &QuantumState,
    t: f64,
) -> Result<nd::Array2<C64>> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("no modes supplied".into()));
    }
    if let Some(bad) = modes.iter().find(|m| m.defective) {
        return Err(Error::Defective(format!(
            "mode {} is too ill-conditioned for expansion",
            bad.index
        )));
    }
    let d = modes[0].right_matrix.nrows();
    if rho0.rho.nrows() != d {
        return Err(Error::InvalidParameter("state dimension mismatch".into()));
    }
    let mut out = nd::Array2::<C64>::zeros((d, d));
    for m in modes {
        let c = crate::linalg::trace_of_product(&m.left_matrix, &rho0.rho);
        let amp = c * (m.lambda * t).exp();
        out.zip_mut_with(&m.right_matrix, |o, r| *o += amp * r);
    }
    Ok(out)
}

/// Classification of the two slowest decaying modes at one detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LepClass {
    /// Both modes relax without oscillating.
    RealPair,
    /// The modes form a complex-conjugate pair.
    ConjugatePair,
}

/// One detuning probe of the exceptional-point scan.
#[derive(Debug, Clone)]
pub struct LepProbe {
    /// Detuning at which the spectrum was evaluated.
    pub detuning: f64,
    /// Slowest nonstationary eigenvalue.
    pub lambda1: C64,
    /// Second slowest nonstationary eigenvalue.
    pub lambda2: C64,
    /// Pair classification at this detuning.
    pub class: LepClass,
}

/// Result of the exceptional-point bisection scan.
#[derive(Debug, Clone)]
pub struct LepScanResult {
    /// All probes evaluated, ascending in detuning.
    pub probes: Vec<LepProbe>,
    /// Detuning of the classification change, to the requested precision.
    pub delta_ep: f64,
}

fn probe_pair(params: &SystemParams, delta: f64) -> Result<LepProbe> {
    let p = SystemParams { detuning: delta, ..*params };
    let l = build_liouvillian(&p)?;
    let vals = l.matrix.eigvals()?;
    let order = sorted_order(&vals);
    let lambda1 = vals[order[1]];
    let lambda2 = vals[order[2]];
    let class = if lambda1.im.abs() < 1e-6 * params.big_gamma {
        LepClass::RealPair
    } else {
        LepClass::ConjugatePair
    };
    Ok(LepProbe { detuning: delta, lambda1, lambda2, class })
}

/// Locate the detuning where the two slowest modes switch between a real
/// pair and a conjugate pair, by bisection on the classifier.
pub fn find_lep(params: &SystemParams, range: (f64, f64), tol: f64) -> Result<LepScanResult> {
    params.validate()?;
    let (mut lo, mut hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad detuning range ({lo}, {hi})")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bad tolerance {tol}")));
    }
    let first = probe_pair(params, lo)?;
    let last = probe_pair(params, hi)?;
    if first.class == last.class {
        return Err(Error::NotFound(format!(
            "no pair-class change in detuning range ({lo}, {hi})"
        )));
    }
    let lo_class = first.class;
    let mut probes = vec![first, last];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let pm = probe_pair(params, mid)?;
        if pm.class == lo_class {
            lo = mid;
        } else {
            hi = mid;
        }
        probes.push(pm);
    }
    probes.sort_by(|a, b| a.detuning.partial_cmp(&b.detuning).unwrap());
    Ok(LepScanResult { probes, delta_ep: 0.5 * (lo + hi) })
}
