//! Homodyne quadrature statistics of Fock-basis states.

use num_complex::Complex64;

use crate::fock::DensityMatrix;
use crate::hermite::fill_wavefunctions;

/// Probability density of quadrature `x` at local-oscillator phase `theta`:
/// `p(x|θ) = Σ_{mn} ρ_mn e^{i(n−m)θ} ψ_m(x) ψ_n(x)`.
pub fn quadrature_pdf(rho: &DensityMatrix, theta: f64, x: f64) -> f64 {
    let d = rho.dim();
    let mut psi = vec![0.0; d];
    fill_wavefunctions(&mut psi, x).expect("density matrix dim within Hermite limit");
    pdf_from_wavefunctions(rho, theta, &psi)
}

/// Same as [`quadrature_pdf`] with the wavefunction values supplied.
pub(crate) fn pdf_from_wavefunctions(rho: &DensityMatrix, theta: f64, psi: &[f64]) -> f64 {
    let d = rho.dim();
    let v: Vec<Complex64> = (0..d)
        .map(|n| Complex64::from_polar(psi[n], n as f64 * theta))
        .collect();
    let m = rho.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..d {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_state;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn random_state(re: &[f64], im: &[f64], d: usize) -> DensityMatrix {
        let a = DMatrix::from_fn(d, d, |i, j| Complex64::new(re[i * d + j], im[i * d + j]));
        let m = &a * a.adjoint();
        let tr = m.trace().re;
        DensityMatrix::from_matrix(m.unscale(tr)).unwrap()
    }

    #[test]
    fn vacuum_is_gaussian() {
        let vac = fock_state(0, 3).unwrap();
        for &t in &[0.0, 0.7, 2.5] {
            for &x in &[-2.0, -0.3, 0.0, 1.1] {
                assert_abs_diff_eq!(quadrature_pdf(&vac, t, x), (-x * x).exp() / PI.sqrt(), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn single_photon_node() {
        let one = fock_state(1, 3).unwrap();
        assert_abs_diff_eq!(quadrature_pdf(&one, 1.3, 0.0), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn phase_convention_matches_rotated_quadrature() {
        // ⟨x_θ⟩ = (⟨a⟩ e^{-iθ} + c.c.)/√2 with ⟨a⟩ = ρ_10, i.e. √2 Re(ρ_01 e^{iθ}).
        let s = 1.0 / 2f64.sqrt();
        let rho = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(0.0, s)]).unwrap();
        for &t in &[0.0, PI / 2.0, 1.0] {
            let mean = simpson(|x| x * quadrature_pdf(&rho, t, x), -10.0, 10.0, 4000);
            let expected = 2f64.sqrt() * (rho.get(0, 1) * Complex64::from_polar(1.0, t)).re;
            assert_abs_diff_eq!(mean, expected, epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn nonnegative_and_normalized(
            re in prop::collection::vec(-1.0f64..1.0, 64),
            im in prop::collection::vec(-1.0f64..1.0, 64),
            d in 1usize..=8,
            theta in 0.0f64..PI,
        ) {
            let rho = random_state(&re, &im, d);
            let total = simpson(|x| quadrature_pdf(&rho, theta, x), -6.0, 6.0, 2400);
            prop_assert!((total - 1.0).abs() < 1e-6, "total {}", total);
            for i in 0..=120 {
                let x = -6.0 + 0.1 * i as f64;
                prop_assert!(quadrature_pdf(&rho, theta, x) >= -1e-12);
            }
        }

        #[test]
        fn diagonal_states_are_phase_invariant(
            w in prop::collection::vec(0.0f64..1.0, 6),
            t1 in 0.0f64..PI, t2 in 0.0f64..PI, x in -4.0f64..4.0,
        ) {
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            let rho = DensityMatrix::from_diagonal(&w.iter().map(|v| v / s).collect::<Vec<_>>()).unwrap();
            prop_assert!((quadrature_pdf(&rho, t1, x) - quadrature_pdf(&rho, t2, x)).abs() < 1e-14);
        }
    }
}
