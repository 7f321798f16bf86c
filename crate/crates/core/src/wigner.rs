//! Wigner quasi-probability distributions of Fock-basis states.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::format::sig9;

/// Generalized Laguerre polynomial `L_n^{(alpha)}(y)` by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, y: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - y;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - y) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `W(x, p)` of a single state.
pub fn wigner_point(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    let d = rho.dim();
    let r2 = x * x + p * p;
    let gauss = (-r2).exp() / PI;
    let z = Complex64::new(x, -p) * std::f64::consts::SQRT_2;
    let mut acc = 0.0;
    for n in 0..d {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        // diagonal term
        acc += rho.get(n, n).re * sign * laguerre(n, 0.0, 2.0 * r2);
        // ratio sqrt(n!/m!) and z^{m-n} built up incrementally
        let mut ratio = 1.0;
        let mut zpow = Complex64::new(1.0, 0.0);
        for m in (n + 1)..d {
            ratio /= (m as f64).sqrt();
            zpow *= z;
            let kernel = zpow * (sign * ratio * laguerre(n, (m - n) as f64, 2.0 * r2));
            // ρ_mn W_{mn} + ρ_nm conj(W_{mn})
            acc += 2.0 * (rho.get(m, n) * kernel).re;
        }
    }
    acc * gauss
}

/// Radial profile `W(r) = Σ_n p_n (−1)ⁿ/π L_n(2r²) e^{−r²}` of a phase-symmetric state.
pub fn radial_wigner(probs: &[f64], r: f64) -> f64 {
    let y = 2.0 * r * r;
    let s: f64 = probs
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p } * laguerre(n, 0.0, y))
        .sum();
    s * (-r * r).exp() / PI
}

/// Rectangular phase-space lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl Default for GridSpec {
    /// 121×121 points over [−4, 4]².
    fn default() -> Self {
        Self::square(4.0, 121)
    }
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            nx: n,
            p_min: -half_width,
            p_max: half_width,
            np: n,
        }
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        let h = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| lo + i as f64 * h).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        Self::axis(self.p_min, self.p_max, self.np)
    }
}

/// Wigner values on a lattice, x-major (`values[i * ps.len() + j] = W(xs[i], ps[j])`).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ps.len() + j]
    }

    /// Smallest value and its location `(w, x, p)`.
    pub fn min(&self) -> (f64, f64, f64) {
        let np = self.ps.len();
        let (k, w) =
            self.values.iter().copied().enumerate().fold(
                (0, f64::INFINITY),
                |best, (k, w)| if w < best.1 { (k, w) } else { best },
            );
        (w, self.xs[k / np], self.ps[k % np])
    }

    /// Riemann-sum estimate of `∫∫ W dx dp` (uniform spacing assumed).
    pub fn integral(&self) -> f64 {
        let dx = if self.xs.len() > 1 {
            self.xs[1] - self.xs[0]
        } else {
            1.0
        };
        let dp = if self.ps.len() > 1 {
            self.ps[1] - self.ps[0]
        } else {
            1.0
        };
        self.values.iter().sum::<f64>() * dx * dp
    }

    /// CSV with header `x,p,w`, row-major, 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,p,w")?;
        for (i, x) in self.xs.iter().enumerate() {
            for (j, p) in self.ps.iter().enumerate() {
                writeln!(out, "{},{},{}", sig9(*x), sig9(*p), sig9(self.at(i, j)))?;
            }
        }
        Ok(())
    }
}

/// Evaluates `W` over `grid`, parallel over rows.
pub fn wigner(rho: &DensityMatrix, grid: &GridSpec) -> WignerGrid {
    let xs = grid.xs();
    let ps = grid.ps();
    let values: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| ps.iter().map(move |&p| wigner_point(rho, x, p)).collect::<Vec<_>>())
        .collect();
    WignerGrid { xs, ps, values }
}

/// Minimum of a radial Wigner profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerMinimum {
    pub value: f64,
    pub radius: f64,
}

const RADIAL_MAX: f64 = 6.0;
const RADIAL_STEPS: usize = 6000;

/// Minimum of the radial profile over r ∈ [0, 6] for a phase-symmetric
/// (diagonal) state: dense scan, then golden-section refinement.
pub fn wigner_min(rho: &DensityMatrix) -> Result<WignerMinimum> {
    if !rho.is_diagonal(1e-12) {
        return Err(Error::Unsupported(
            "radial Wigner minimum needs a diagonal state; evaluate the full grid instead".into(),
        ));
    }
    let probs = rho.diagonal();
    let f = |r: f64| radial_wigner(&probs, r);
    let h = RADIAL_MAX / RADIAL_STEPS as f64;
    let (best, _) = (0..=RADIAL_STEPS)
        .map(|i| (i, f(i as f64 * h)))
        .fold((0, f64::INFINITY), |b, (i, v)| if v < b.1 { (i, v) } else { b });
    let lo = best.saturating_sub(1) as f64 * h;
    let hi = ((best + 1).min(RADIAL_STEPS)) as f64 * h;
    let r = golden_section_min(&f, lo, hi, 1e-12);
    let (r, v) = [(r, f(r)), (best as f64 * h, f(best as f64 * h))]
        .into_iter()
        .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    Ok(WignerMinimum { value: v, radius: r })
}

fn golden_section_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_state;
    use crate::loss::apply_loss;
    use crate::quadrature::quadrature_pdf;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn laguerre_closed_forms() {
        for &y in &[0.0, 0.3, 1.7, 4.0] {
            assert_abs_diff_eq!(laguerre(2, 0.0, y), 1.0 - 2.0 * y + y * y / 2.0, epsilon = 1e-13);
            assert_abs_diff_eq!(laguerre(1, 3.0, y), 4.0 - y, epsilon = 1e-13);
            assert_abs_diff_eq!(laguerre(2, 1.0, y), (y * y - 6.0 * y + 6.0) / 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn origin_values() {
        assert_abs_diff_eq!(
            wigner_point(&fock_state(0, 3).unwrap(), 0.0, 0.0),
            1.0 / PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            wigner_point(&fock_state(1, 3).unwrap(), 0.0, 0.0),
            -1.0 / PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            wigner_point(&fock_state(2, 3).unwrap(), 0.0, 0.0),
            1.0 / PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn normalization_on_default_grid() {
        for n in 0..5 {
            let w = wigner(&fock_state(n, 5).unwrap(), &GridSpec::square(6.0, 241));
            assert_abs_diff_eq!(w.integral(), 1.0, epsilon = 1e-4);
        }
        let w = wigner(&fock_state(2, 5).unwrap(), &GridSpec::default());
        assert_eq!(w.values.len(), 121 * 121);
    }

    #[test]
    fn coherent_superposition_marginals() {
        // (|0⟩ + i|1⟩ + |2⟩)/√3: both quadrature marginals must match the
        // homodyne densities at θ = 0 and θ = π/2.
        let s = 1.0 / 3f64.sqrt();
        let rho =
            DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(s, 0.0)]).unwrap();
        for &u in &[-1.5, -0.4, 0.0, 0.8, 2.1] {
            let px = simpson(|p| wigner_point(&rho, u, p), -8.0, 8.0, 1600);
            let pp = simpson(|x| wigner_point(&rho, x, u), -8.0, 8.0, 1600);
            assert_abs_diff_eq!(px, quadrature_pdf(&rho, 0.0, u), epsilon = 1e-10);
            assert_abs_diff_eq!(pp, quadrature_pdf(&rho, PI / 2.0, u), epsilon = 1e-10);
        }
    }

    #[test]
    fn radial_profile_matches_full_kernel() {
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.4, 0.1]).unwrap();
        for &(x, p) in &[(0.3, 0.1), (1.0, -0.5), (0.0, 2.0)] {
            let r = f64::hypot(x, p);
            assert_abs_diff_eq!(
                wigner_point(&rho, x, p),
                radial_wigner(&rho.diagonal(), r),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn minimum_of_anchor_states() {
        let vac = wigner_min(&fock_state(0, 3).unwrap()).unwrap();
        assert!(vac.value >= 0.0);
        let one = wigner_min(&fock_state(1, 3).unwrap()).unwrap();
        assert_abs_diff_eq!(one.value, -1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(one.radius, 0.0, epsilon = 1e-6);
        // |2⟩: W = (1 − 4u + 2u²) e^{−u}/π with u = r²; stationary where
        // 2u² − 8u + 5 = 0, minimum at u = 2 − √(3/2).
        let two = wigner_min(&fock_state(2, 3).unwrap()).unwrap();
        let r2 = 2.0 - 1.5f64.sqrt();
        assert_abs_diff_eq!(two.radius, r2.sqrt(), epsilon = 1e-7);
        let expected = (1.0 - 4.0 * r2 + 2.0 * r2 * r2) * (-r2).exp() / PI;
        assert_abs_diff_eq!(two.value, expected, epsilon = 1e-14);
    }

    #[test]
    fn lossy_two_photon_ring() {
        let rho = apply_loss(&fock_state(2, 5).unwrap(), 0.81).unwrap();
        let m = wigner_min(&rho).unwrap();
        // independent oracle: brute scan at 1e-5 resolution
        let probs = rho.diagonal();
        let (v, r) = (0..=600_000)
            .map(|i| {
                let r = i as f64 * 1e-5;
                (radial_wigner(&probs, r), r)
            })
            .fold((f64::INFINITY, 0.0), |b, c| if c.0 < b.0 { c } else { b });
        assert!(m.value < 0.0);
        assert_abs_diff_eq!(m.value, v, epsilon = 1e-9);
        assert_abs_diff_eq!(m.radius, r, epsilon = 1e-4);
        // origin stays positive: (1 − 2η)²/π
        let w0 = wigner_point(&rho, 0.0, 0.0);
        assert_abs_diff_eq!(w0, (1.0 - 2.0 * 0.81f64).powi(2) / PI, epsilon = 1e-14);
        assert!(w0 >= 0.0);
    }

    #[test]
    fn min_rejects_coherences() {
        let rho = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(wigner_min(&rho), Err(Error::Unsupported(_))));
    }

    #[test]
    fn csv_layout() {
        let w = wigner(&fock_state(0, 2).unwrap(), &GridSpec::square(1.0, 2));
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,p,w");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("-1,1,"));
    }

    proptest! {
        #[test]
        fn marginal_consistency(w in prop::collection::vec(0.0f64..1.0, 5), x in -4.0f64..4.0) {
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            let rho = DensityMatrix::from_diagonal(&w.iter().map(|v| v / s).collect::<Vec<_>>()).unwrap();
            let marg = simpson(|p| wigner_point(&rho, x, p), -8.0, 8.0, 800);
            prop_assert!((marg - quadrature_pdf(&rho, 0.0, x)).abs() < 1e-4);
        }

        #[test]
        fn origin_is_parity(w in prop::collection::vec(0.0f64..1.0, 6)) {
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            let p: Vec<f64> = w.iter().map(|v| v / s).collect();
            let rho = DensityMatrix::from_diagonal(&p).unwrap();
            let parity: f64 = p.iter().enumerate().map(|(n, v)| if n % 2 == 0 { *v } else { -*v }).sum();
            prop_assert!((wigner_point(&rho, 0.0, 0.0) - parity / PI).abs() < 1e-14);
        }

        #[test]
        fn lossy_two_photon_origin(eta in 0.0f64..=1.0) {
            let rho = apply_loss(&crate::fock::fock_state(2, 3).unwrap(), eta).unwrap();
            let w0 = wigner_point(&rho, 0.0, 0.0);
            prop_assert!((w0 - (1.0 - 2.0 * eta).powi(2) / PI).abs() < 1e-14);
            prop_assert!(w0 >= 0.0);
        }
    }
}
