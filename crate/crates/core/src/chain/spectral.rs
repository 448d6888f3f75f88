use nalgebra::Schur;

use crate::mdp::MarkovChain;
use crate::{invalid, Error, Result};

/// Largest chain accepted by [`spectral_gap`].
pub const SPECTRAL_LIMIT: usize = 2000;

/// `1 − |λ₂|`, where `λ₂` is the second-largest eigenvalue in modulus.
pub fn spectral_gap(chain: &MarkovChain) -> Result<f64> {
    let n = chain.n_states();
    if n > SPECTRAL_LIMIT {
        return Err(invalid(format!(
            "spectral gap needs a dense eigensolve; {n} states exceeds {SPECTRAL_LIMIT}"
        )));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let schur = Schur::try_new(chain.to_matrix(), 1e-14, 100_000).ok_or(Error::Eigen)?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|m| !m.is_finite()) {
        return Err(Error::Eigen);
    }
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok((1.0 - moduli[1]).clamp(0.0, 1.0))
}
