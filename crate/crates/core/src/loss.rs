//! Pure-loss (beam-splitter) channel in the Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_closed, Error, Result};
use crate::fock::{binomial, DensityMatrix};

/// Trace deficits below this are renormalized away; larger ones are errors.
pub const MAX_TRACE_DEFICIT: f64 = 1e-6;

// Kraus weight linking ρ_{m+k,n+k} to ρ'_{m,n}.
fn coefficient(m: usize, n: usize, k: usize, sqrt_eta: f64, loss: f64) -> f64 {
    (binomial(m + k, k) * binomial(n + k, k)).sqrt() * sqrt_eta.powi((m + n) as i32) * loss.powi(k as i32)
}

/// Applies a loss channel with transmission `eta`:
/// `ρ'_{mn} = Σ_k √(C(m+k,k) C(n+k,k)) η^{(m+n)/2} (1−η)^k ρ_{m+k,n+k}`.
pub fn apply_loss(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    check_closed("eta", eta, 0.0, 1.0, "[0, 1]")?;
    let d = rho.dim();
    let (se, loss) = (eta.sqrt(), 1.0 - eta);
    let src = rho.matrix();
    let out = DMatrix::from_fn(d, d, |m, n| {
        let kmax = d - m.max(n);
        (0..kmax)
            .map(|k| src[(m + k, n + k)] * coefficient(m, n, k, se, loss))
            .sum::<Complex64>()
    });
    let out = DensityMatrix::from_matrix(out)?;
    renormalize(out, rho.trace())
}

/// Heisenberg-picture dual of [`apply_loss`]: `Tr(Λ(ρ) A) = Tr(ρ Λ*(A))`.
pub fn apply_loss_adjoint(op: &DMatrix<Complex64>, eta: f64) -> Result<DMatrix<Complex64>> {
    check_closed("eta", eta, 0.0, 1.0, "[0, 1]")?;
    if op.nrows() != op.ncols() {
        return Err(Error::Shape("operator must be square".into()));
    }
    let d = op.nrows();
    let (se, loss) = (eta.sqrt(), 1.0 - eta);
    Ok(DMatrix::from_fn(d, d, |j, l| {
        (0..=j.min(l))
            .map(|k| op[(j - k, l - k)] * coefficient(l - k, j - k, k, se, loss))
            .sum::<Complex64>()
    }))
}

/// Diagonal fast path: `p'_m = Σ_{j≥m} C(j,m) η^m (1−η)^{j−m} p_j`.
pub fn apply_loss_diagonal(probs: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_closed("eta", eta, 0.0, 1.0, "[0, 1]")?;
    Ok((0..probs.len())
        .map(|m| {
            (m..probs.len())
                .map(|j| binomial(j, m) * eta.powi(m as i32) * (1.0 - eta).powi((j - m) as i32) * probs[j])
                .sum()
        })
        .collect())
}

fn renormalize(out: DensityMatrix, trace_in: f64) -> Result<DensityMatrix> {
    let deficit = (trace_in - out.trace()).abs();
    if deficit > MAX_TRACE_DEFICIT {
        return Err(Error::TraceDeficit { deficit });
    }
    if deficit == 0.0 || trace_in == 0.0 {
        return Ok(out);
    }
    let scale = trace_in / out.trace();
    DensityMatrix::from_matrix(out.into_matrix().scale(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_state;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_diag(weights: &[f64]) -> DensityMatrix {
        let s: f64 = weights.iter().sum();
        DensityMatrix::from_diagonal(&weights.iter().map(|w| w / s).collect::<Vec<_>>()).unwrap()
    }

    fn random_state(re: &[f64], im: &[f64], d: usize) -> DensityMatrix {
        // ρ = A A† / Tr
        let a = DMatrix::from_fn(d, d, |i, j| Complex64::new(re[i * d + j], im[i * d + j]));
        let m = &a * a.adjoint();
        let tr = m.trace().re;
        DensityMatrix::from_matrix(m.unscale(tr)).unwrap()
    }

    #[test]
    fn single_photon_binomial() {
        let out = apply_loss(&fock_state(1, 2).unwrap(), 0.3).unwrap();
        assert_abs_diff_eq!(out.get(0, 0).re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(1, 1).re, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn two_photon_preparation_loss() {
        let out = apply_loss(&fock_state(2, 5).unwrap(), 0.81).unwrap();
        let expected = [0.0361, 0.3078, 0.6561, 0.0, 0.0];
        for (a, b) in out.diagonal().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        assert!(out.max_off_diagonal() == 0.0);
    }

    #[test]
    fn identity_and_domain() {
        let rho = random_state(&[0.3, 0.1, -0.4, 0.9, 0.2, 0.5, 0.7, -0.2, 0.1], &[0.2; 9], 3);
        let out = apply_loss(&rho, 1.0).unwrap();
        assert!((out.matrix() - rho.matrix()).iter().all(|z| z.norm() < 1e-15));
        assert!(apply_loss(&rho, 1.1).is_err());
        assert!(apply_loss(&rho, -0.01).is_err());
        let vac = apply_loss(&rho, 0.0).unwrap();
        assert_abs_diff_eq!(vac.get(0, 0).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn diagonal_fast_path_agrees() {
        let p = [0.1, 0.2, 0.3, 0.15, 0.25];
        let full = apply_loss(&random_diag(&p), 0.42).unwrap().diagonal();
        let fast = apply_loss_diagonal(&p, 0.42).unwrap();
        for (a, b) in full.iter().zip(&fast) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn composition(w in prop::collection::vec(0.01f64..1.0, 2..=10), e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
            let rho = random_diag(&w);
            let twice = apply_loss(&apply_loss(&rho, e1).unwrap(), e2).unwrap();
            let once = apply_loss(&rho, e1 * e2).unwrap();
            for (a, b) in twice.matrix().iter().zip(once.matrix().iter()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn preserves_state_properties(
            re in prop::collection::vec(-1.0f64..1.0, 36),
            im in prop::collection::vec(-1.0f64..1.0, 36),
            d in 2usize..=6,
            eta in 0.0f64..=1.0,
        ) {
            let rho = random_state(&re, &im, d);
            let out = apply_loss(&rho, eta).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-10);
            prop_assert!(out.hermiticity_error() < 1e-12);
            prop_assert!(out.min_eigenvalue() > -1e-10);
        }

        #[test]
        fn adjoint_duality(
            re in prop::collection::vec(-1.0f64..1.0, 25),
            im in prop::collection::vec(-1.0f64..1.0, 25),
            ore in prop::collection::vec(-1.0f64..1.0, 25),
            oim in prop::collection::vec(-1.0f64..1.0, 25),
            eta in 0.0f64..=1.0,
        ) {
            let rho = random_state(&re, &im, 5);
            let op = DMatrix::from_fn(5, 5, |i, j| Complex64::new(ore[i * 5 + j], oim[i * 5 + j]));
            let lhs = apply_loss(&rho, eta).unwrap().expectation(&op);
            let rhs = rho.expectation(&apply_loss_adjoint(&op, eta).unwrap());
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
