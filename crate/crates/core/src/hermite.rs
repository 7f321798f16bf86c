//! Harmonic-oscillator eigenfunctions by normalized three-term recurrence.

use crate::error::{Error, Result};

/// Highest order accepted by [`fock_wavefunction`].
pub const MAX_ORDER: usize = 170;

/// `ψ_n(x) = H_n(x) e^{-x²/2} / (π^{1/4} √(2ⁿ n!))`.
pub fn fock_wavefunction(n: usize, x: f64) -> Result<f64> {
    Ok(*fock_wavefunctions(n + 1, x)?.last().expect("len >= 1"))
}

/// `[ψ_0(x), .., ψ_{len-1}(x)]`.
pub fn fock_wavefunctions(len: usize, x: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; len];
    fill_wavefunctions(&mut out, x)?;
    Ok(out)
}

/// Writes `ψ_0(x)..ψ_{out.len()-1}(x)` into `out`.
pub fn fill_wavefunctions(out: &mut [f64], x: f64) -> Result<()> {
    if out.len() > MAX_ORDER + 1 {
        return Err(Error::OrderOverflow(out.len() - 1));
    }
    if out.is_empty() {
        return Ok(());
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for n in 1..out.len().saturating_sub(1) {
        let k = n as f64;
        out[n + 1] = x * (2.0 / (k + 1.0)).sqrt() * out[n] - (k / (k + 1.0)).sqrt() * out[n - 1];
    }
    Ok(())
}
