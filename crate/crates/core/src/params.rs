use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Modular parameter `τ` together with the dynamical step `γ` and the
/// quantities derived from it: `ℏ = -γ`, `η = γ/2` and the nome `e^{2πiτ}`.
///
/// Construct through [`ModularParams::new`]; the derived fields are always
/// consistent with `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularParams {
    tau: Complex64,
    gamma: Complex64,
    hbar: Complex64,
    eta: Complex64,
    q_nome: Complex64,
}

impl ModularParams {
    pub fn new(tau: Complex64, gamma: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() {
            return Err(Error::InvalidParams(format!(
                "Im(tau) > 0 required, got tau = {tau}"
            )));
        }
        if !gamma.re.is_finite() || !gamma.im.is_finite() {
            return Err(Error::InvalidParams(format!("gamma must be finite, got {gamma}")));
        }
        let q_nome = (Complex64::i() * 2.0 * std::f64::consts::PI * tau).exp();
        Ok(ModularParams {
            tau,
            gamma,
            hbar: -gamma,
            eta: gamma * 0.5,
            q_nome,
        })
    }

    /// Same `τ`, different step.
    pub fn with_gamma(&self, gamma: Complex64) -> Self {
        ModularParams::new(self.tau, gamma).expect("tau already validated")
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn hbar(&self) -> Complex64 {
        self.hbar
    }

    pub fn eta(&self) -> Complex64 {
        self.eta
    }

    pub fn q_nome(&self) -> Complex64 {
        self.q_nome
    }
}
