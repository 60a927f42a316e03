//! Truncated ion-oscillator Hilbert space: parameters, ladder operators, and
//! the rotating-frame Hamiltonian. Basis ordering is qubit-slowest, index
//! q * n_fock + n with q = 0 the ground sector.

use ndarray as nd;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Physical parameters in units of the oscillator damping rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Lamb-Dicke parameter, dimensionless.
    pub eta: f64,
    /// Blue-sideband Rabi frequency.
    pub omega: f64,
    /// Qubit (spin) decay rate.
    pub gamma: f64,
    /// Oscillator (phonon) decay rate; the unit of all rates.
    pub big_gamma: f64,
    /// Resonant drive strength on the oscillator.
    pub drive_f: f64,
    /// Drive detuning from the oscillator frequency.
    pub detuning: f64,
    /// Fock-space truncation, states |0> .. |n_fock - 1>.
    pub n_fock: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            eta: 0.1,
            omega: 25.0,
            gamma: 10.0,
            big_gamma: 1.0,
            drive_f: 0.0,
            detuning: 0.0,
            n_fock: 30,
        }
    }
}

impl SystemParams {
    /// Full Hilbert-space dimension, 2 * n_fock.
    pub fn dim(&self) -> usize {
        2 * self.n_fock
    }

    /// Reject non-finite, out-of-range, or unusably small values.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.eta, self.omega, self.gamma, self.big_gamma, self.drive_f, self.detuning]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        if self.eta <= 0.0 {
            return Err(Error::InvalidParameter(format!("eta = {} must be > 0", self.eta)));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParameter(format!("omega = {} must be >= 0", self.omega)));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma = {} must be > 0", self.gamma)));
        }
        if self.big_gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "big_gamma = {} must be > 0",
                self.big_gamma
            )));
        }
        if self.drive_f < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "drive_f = {} must be >= 0",
                self.drive_f
            )));
        }
        if self.n_fock < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_fock = {} must be >= 2",
                self.n_fock
            )));
        }
        Ok(())
    }
}

/// System operators on the truncated qubit x Fock space.
#[derive(Debug, Clone)]
pub struct Operators {
    /// Phonon annihilation, identity on the qubit.
    pub a: nd::Array2<C64>,
    /// Phonon creation.
    pub a_dag: nd::Array2<C64>,
    /// Qubit lowering |g><e|, identity on the Fock factor.
    pub sigma_minus: nd::Array2<C64>,
    /// Qubit raising |e><g|.
    pub sigma_plus: nd::Array2<C64>,
    /// Qubit inversion, -1 on the ground sector and +1 on the excited one.
    pub sigma_z: nd::Array2<C64>,
}

/// Build the ladder and qubit operators for the given truncation.
pub fn build_operators(params: &SystemParams) -> Result<Operators> {
    params.validate()?;
    let n = params.n_fock;
    let d = 2 * n;

    let mut a = nd::Array2::<C64>::zeros((d, d));
    for q in 0..2 {
        for k in 1..n {
            a[[q * n + k - 1, q * n + k]] = C64::new((k as f64).sqrt(), 0.0);
        }
    }
    let a_dag = crate::linalg::dagger(&a);

    let mut sigma_minus = nd::Array2::<C64>::zeros((d, d));
    for k in 0..n {
        sigma_minus[[k, n + k]] = C64::new(1.0, 0.0);
    }
    let sigma_plus = crate::linalg::dagger(&sigma_minus);

    let mut sigma_z = nd::Array2::<C64>::zeros((d, d));
    for k in 0..n {
        sigma_z[[k, k]] = C64::new(-1.0, 0.0);
        sigma_z[[n + k, n + k]] = C64::new(1.0, 0.0);
    }

    Ok(Operators { a, a_dag, sigma_minus, sigma_plus, sigma_z })
}

/// Rotating-frame Hamiltonian: detuned oscillator and qubit, blue-sideband
/// coupling i eta Omega (a^dag sigma_+ - a sigma_-), and resonant drive
/// i F (a^dag - a). Assembled entry by entry so it is Hermitian to the bit.
pub fn build_hamiltonian(params: &SystemParams) -> Result<nd::Array2<C64>> {
    params.validate()?;
    let n = params.n_fock;
    let d = 2 * n;
    let (eta, om, f, del) = (params.eta, params.omega, params.drive_f, params.detuning);

    let mut h = nd::Array2::<C64>::zeros((d, d));
    for q in 0..2 {
        let sz = if q == 1 { 1.0 } else { -1.0 };
        for k in 0..n {
            let i = q * n + k;
            h[[i, i]] = C64::new(-del * k as f64 + sz * del / 2.0, 0.0);
        }
    }
    // sideband: couples |g,k> with |e,k+1>
    for k in 0..n.saturating_sub(1) {
        let v = eta * om * ((k + 1) as f64).sqrt();
        h[[n + k + 1, k]] = C64::new(0.0, v);
        h[[k, n + k + 1]] = C64::new(0.0, -v);
    }
    // drive: couples |q,k> with |q,k+1> inside each sector
    for q in 0..2 {
        for k in 0..n - 1 {
            let v = f * ((k + 1) as f64).sqrt();
            h[[q * n + k + 1, q * n + k]] = C64::new(0.0, v);
            h[[q * n + k, q * n + k + 1]] = C64::new(0.0, -v);
        }
    }
    Ok(h)
}
