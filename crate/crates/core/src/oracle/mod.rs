//! Independent brute-force machinery: a truncated Fock-basis integrator for
//! the damped-oscillator master equation
//!
//!   dρ/dt = −iω₀[a†a, ρ] + γ(n̄+1)(2aρa† − a†aρ − ρa†a)
//!                         + γn̄(2a†ρa − aa†ρ − ρaa†),
//!
//! Wigner reconstruction from a density matrix, purities, and tensor-product
//! Gauss–Legendre quadrature. Everything here is ground truth for the closed
//! forms in the other modules and is deliberately written from the defining
//! expressions, not from the formulas it checks.

mod matrix;
mod quad;

pub use matrix::{hermitian_eigen, CMatrix};
pub use quad::{
    diagonal_purity_quadrature, gauss_legendre, phonon_quadrature, purity_quadrature,
    quad2d_adaptive, quad_nd, support_halfwidth, wigner_convolution, QuadAxis, QuadResult,
    QuadratureRule, RefineOpts,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::phasespace::ReservoirParams;
use crate::specfun::ln_factorial;
use crate::states::FockVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },
    #[error("truncation leakage {leak:.3e} at dim {dim}; rerun with dim >= {required_dim}")]
    TruncationLeakage { leak: f64, dim: usize, required_dim: usize },
    #[error("step doubling exceeded {steps} steps without meeting the tolerance")]
    StepLimit { steps: usize },
    #[error("quadrature budget exhausted at {nodes} nodes per axis (last change {last_change:.3e})")]
    QuadratureBudget { last_change: f64, nodes: usize },
}

/// Truncated Fock-basis density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    dim: usize,
    rho: Vec<Complex64>,
}

impl FockDensity {
    pub fn from_pure(state: &FockVector) -> Self {
        let dim = state.dim();
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for m in 0..dim {
            for k in 0..dim {
                rho[m * dim + k] = state.amp(m) * state.amp(k).conj();
            }
        }
        Self { dim, rho }
    }

    /// diag(n̄^m/(1+n̄)^{m+1}), the channel's fixed point.
    pub fn thermal(dim: usize, nbar: f64) -> Self {
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for m in 0..dim {
            let p = if nbar == 0.0 {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (m as f64 * (nbar / (1.0 + nbar)).ln() - (1.0 + nbar).ln()).exp()
            };
            rho[m * dim + m] = Complex64::new(p, 0.0);
        }
        Self { dim, rho }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, m: usize, k: usize) -> Complex64 {
        self.rho[m * self.dim + k]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|m| self.element(m, m)).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.dim {
            for k in m..self.dim {
                worst = worst.max((self.element(m, k) - self.element(k, m).conj()).norm());
            }
        }
        worst
    }

    /// Hermiticity (≤ 1e-10) and unit trace (≤ 1e-8) checks.
    pub fn validate(&self) -> Result<(), OracleError> {
        let h = self.hermiticity_defect();
        if h > 1e-10 {
            return Err(OracleError::InvalidDensity {
                reason: format!("hermiticity defect {h:.3e}"),
            });
        }
        let t = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        if t > 1e-8 {
            return Err(OracleError::InvalidDensity { reason: format!("trace defect {t:.3e}") });
        }
        Ok(())
    }

    /// Smallest eigenvalue, by the Jacobi eigensolver. O(dim³); oracle use.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = CMatrix::from_fn(self.dim, |i, j| self.element(i, j));
        let (eigs, _) = hermitian_eigen(&m);
        eigs.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Tr ρ².
pub fn purity(rho: &FockDensity) -> f64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..rho.dim {
        for k in 0..rho.dim {
            sum += rho.element(m, k) * rho.element(k, m);
        }
    }
    sum.re
}

/// Σ_m ρ_mm².
pub fn diagonal_purity_fock(rho: &FockDensity) -> f64 {
    (0..rho.dim).map(|m| rho.element(m, m).re.powi(2)).sum()
}

/// diag ρ.
pub fn populations(rho: &FockDensity) -> Vec<f64> {
    (0..rho.dim).map(|m| rho.element(m, m).re).collect()
}

/// Step-doubling control for [`evolve_density`].
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Bound on both the Richardson error estimate and the trace defect.
    pub tol: f64,
    /// Hard cap on the step count.
    pub max_steps: usize,
    /// Override the stability-based initial step count.
    pub initial_steps: Option<usize>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { tol: 1e-9, max_steps: 1 << 21, initial_steps: None }
    }
}

/// dρ/dt in the Fock basis; banded in the index difference, O(dim²).
fn lindblad_apply(
    dim: usize,
    omega0: f64,
    gamma: f64,
    nbar: f64,
    sqrt_table: &[f64],
    rho: &[Complex64],
    out: &mut [Complex64],
) {
    let g_down = gamma * (nbar + 1.0);
    let g_up = gamma * nbar;
    for m in 0..dim {
        for k in 0..dim {
            let idx = m * dim + k;
            let mut v = Complex64::new(0.0, -omega0 * (m as f64 - k as f64)) * rho[idx];
            let mk = (m + k) as f64;
            v -= (g_down * mk + g_up * (mk + 2.0)) * rho[idx];
            if m + 1 < dim && k + 1 < dim {
                v += 2.0 * g_down * sqrt_table[m + 1] * sqrt_table[k + 1]
                    * rho[(m + 1) * dim + k + 1];
            }
            if m >= 1 && k >= 1 {
                v += 2.0 * g_up * sqrt_table[m] * sqrt_table[k] * rho[(m - 1) * dim + k - 1];
            }
            out[idx] = v;
        }
    }
}

fn rk4_run(
    dim: usize,
    res: &ReservoirParams,
    rho0: &[Complex64],
    t: f64,
    steps: usize,
) -> Vec<Complex64> {
    let sqrt_table: Vec<f64> = (0..=dim).map(|m| (m as f64).sqrt()).collect();
    let dt = t / steps as f64;
    let n = dim * dim;
    let mut rho = rho0.to_vec();
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for _ in 0..steps {
        lindblad_apply(dim, res.omega0, res.gamma, res.nbar, &sqrt_table, &rho, &mut k1);
        for i in 0..n {
            tmp[i] = rho[i] + 0.5 * dt * k1[i];
        }
        lindblad_apply(dim, res.omega0, res.gamma, res.nbar, &sqrt_table, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = rho[i] + 0.5 * dt * k2[i];
        }
        lindblad_apply(dim, res.omega0, res.gamma, res.nbar, &sqrt_table, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = rho[i] + dt * k3[i];
        }
        lindblad_apply(dim, res.omega0, res.gamma, res.nbar, &sqrt_table, &tmp, &mut k4);
        for i in 0..n {
            rho[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
    rho
}

/// Integrate the master equation from `rho0` over [0, t] with classic RK4,
/// doubling the step count until both the Richardson error estimate
/// (sup-norm difference / 15) and the trace defect fall below `ctrl.tol`.
/// The trace is never renormalized; its defect is a diagnostic. Population
/// reaching the top two levels beyond 1e-8 fails with a leakage error.
pub fn evolve_density(
    rho0: &FockDensity,
    res: &ReservoirParams,
    t: f64,
    ctrl: &StepControl,
) -> Result<FockDensity, OracleError> {
    rho0.validate()?;
    res.validate().map_err(|e| OracleError::InvalidDensity { reason: e.to_string() })?;
    let dim = rho0.dim;
    let edge0: f64 = (dim.saturating_sub(2)..dim).map(|m| rho0.element(m, m).re).sum();
    if edge0 > 1e-8 {
        return Err(OracleError::TruncationLeakage {
            leak: edge0,
            dim,
            required_dim: dim + dim / 4 + 8,
        });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }

    // explicit-RK4 stability sets the floor for the step count
    let rate = 4.0 * res.gamma * (2.0 * res.nbar + 1.0) * dim as f64
        + res.omega0.abs() * dim as f64;
    let mut steps = ctrl
        .initial_steps
        .unwrap_or(((t * rate / 2.0).ceil() as usize).max(16));

    let mut coarse = rk4_run(dim, res, &rho0.rho, t, steps);
    loop {
        if steps * 2 > ctrl.max_steps {
            return Err(OracleError::StepLimit { steps });
        }
        steps *= 2;
        let fine = rk4_run(dim, res, &rho0.rho, t, steps);
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        let trace_defect = {
            let tr: Complex64 = (0..dim).map(|m| fine[m * dim + m]).sum();
            (tr - Complex64::new(1.0, 0.0)).norm()
        };
        if diff / 15.0 <= ctrl.tol {
            // steps are converged; a persistent trace defect is physical
            // leakage through the truncation edge, not integration error
            if trace_defect > ctrl.tol {
                return Err(OracleError::TruncationLeakage {
                    leak: trace_defect,
                    dim,
                    required_dim: dim + dim / 4 + 8,
                });
            }
            let result = FockDensity { dim, rho: fine };
            let edge: f64 = (dim.saturating_sub(2)..dim)
                .map(|m| result.element(m, m).re)
                .sum();
            if edge > 1e-8 {
                return Err(OracleError::TruncationLeakage {
                    leak: edge,
                    dim,
                    required_dim: dim + dim / 4 + 8,
                });
            }
            return Ok(result);
        }
        coarse = fine;
    }
}

/// Wigner function of a (Hermitian) density matrix at a phase-space point:
///
///   W(p,q) = (1/π) Σ_{m,k} ρ_{mk} (−1)^m ⟨k|D(ζ)|m⟩,   ζ = √2 (q + ip),
///
/// normalized so the |n⟩⟨n| kernel is ((−1)^n/π) e^{−(p²+q²)} L_n(2(p²+q²))
/// and ∫W dp dq = 1 for unit trace. Magnitudes are assembled in log space.
pub fn wigner_from_density(rho: &FockDensity, p: f64, q: f64) -> f64 {
    let dim = rho.dim;
    let zeta = std::f64::consts::SQRT_2 * Complex64::new(q, p);
    let az2 = zeta.norm_sqr();
    let ln_abs_zeta = if az2 > 0.0 { zeta.norm().ln() } else { f64::NEG_INFINITY };
    let phase = Complex64::from_polar(1.0, zeta.arg());
    let mut total = Complex64::new(0.0, 0.0);
    for d in 0..dim {
        // Σ_m ρ_{m,m+d} (−1)^m √(m!/(m+d)!) ζ^d L_m^{(d)}(|ζ|²), L by upward recurrence in m
        let mut acc = Complex64::new(0.0, 0.0);
        let mut lm1 = 0.0;
        let mut l = 1.0;
        for m in 0..(dim - d) {
            if m == 1 {
                lm1 = 1.0;
                l = 1.0 + d as f64 - az2;
            } else if m >= 2 {
                let mf = (m - 1) as f64;
                let next = ((2.0 * mf + 1.0 + d as f64 - az2) * l - (mf + d as f64) * lm1)
                    / (mf + 1.0);
                lm1 = l;
                l = next;
            }
            let ln_pre = 0.5 * (ln_factorial(m) - ln_factorial(m + d))
                + if d > 0 { d as f64 * ln_abs_zeta } else { 0.0 }
                - az2 / 2.0;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            acc += rho.element(m, m + d) * sign * ln_pre.exp() * l;
        }
        let dir = if d == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            phase.powu(d as u32)
        };
        let term = acc * dir;
        total += if d == 0 { term } else { term + term.conj() };
    }
    total.re / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::laguerre_real;
    use crate::states::{build_fock_vector, SuperpositionSpec};
    use approx::assert_relative_eq;

    fn res(omega0: f64, gamma: f64, nbar: f64) -> ReservoirParams {
        ReservoirParams::new(omega0, gamma, nbar).unwrap()
    }

    fn coherent(beta: f64, dim: usize) -> FockVector {
        let spec = SuperpositionSpec::new(0, 1, beta).unwrap();
        build_fock_vector(&spec, dim).unwrap()
    }

    #[test]
    fn pure_state_density_is_valid_and_pure() {
        let rho = FockDensity::from_pure(&coherent(1.2, 32));
        rho.validate().unwrap();
        assert_relative_eq!(purity(&rho), 1.0, epsilon = 1e-10);
        assert!(rho.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn maximally_mixed_purity() {
        let d = 8;
        let mut rho = FockDensity::thermal(d, 0.0);
        for m in 0..d {
            rho.rho[m * d + m] = Complex64::new(1.0 / d as f64, 0.0);
        }
        assert_relative_eq!(purity(&rho), 1.0 / d as f64, epsilon = 1e-12);
        assert_relative_eq!(diagonal_purity_fock(&rho), 1.0 / d as f64, epsilon = 1e-12);
    }

    #[test]
    fn nearly_closed_system_keeps_populations_and_rotates_coherences() {
        let dim = 24;
        let rho0 = FockDensity::from_pure(&coherent(1.0, dim));
        let r = res(1.0, 1e-12, 0.0);
        let t = 0.7;
        let rho = evolve_density(&rho0, &r, t, &StepControl::default()).unwrap();
        for m in 0..dim {
            assert_relative_eq!(
                rho.element(m, m).re,
                rho0.element(m, m).re,
                epsilon = 1e-8
            );
        }
        // coherences pick up e^{−iω₀(m−k)t}
        let expect = rho0.element(2, 5) * Complex64::from_polar(1.0, 3.0 * t);
        assert!((rho.element(2, 5) - expect).norm() < 1e-8);
    }

    #[test]
    fn long_time_limit_is_thermal() {
        // dim 44 keeps the n̄=1 thermal tail leak below the 1e-9 tolerance
        let dim = 44;
        let nbar = 1.0;
        let rho0 = FockDensity::from_pure(&coherent(1.0, dim));
        let r = res(1.0, 1.0, nbar);
        // u = 1 − 1e-6
        let t = -(1e-6f64).ln() / 2.0;
        let rho = evolve_density(&rho0, &r, t, &StepControl::default()).unwrap();
        let thermal = FockDensity::thermal(dim, nbar);
        for m in 0..dim {
            assert!((rho.element(m, m) - thermal.element(m, m)).norm() < 1e-5);
        }
        // purity is non-increasing from a pure state into the thermal channel
        assert!(purity(&rho) <= 1.0 + 1e-10);
    }

    #[test]
    fn first_moment_decays_as_closed_form() {
        let dim = 40;
        let beta0 = 1.3;
        let rho0 = FockDensity::from_pure(&coherent(beta0, dim));
        let r = res(0.8, 0.5, 0.7);
        let t = 0.6;
        let rho = evolve_density(&rho0, &r, t, &StepControl::default()).unwrap();
        // ⟨a⟩(t) = β₀ e^{−(γ+iω₀)t}
        let mut mean_a = Complex64::new(0.0, 0.0);
        for m in 1..dim {
            mean_a += (m as f64).sqrt() * rho.element(m, m - 1);
        }
        let spec = SuperpositionSpec::new(0, 1, beta0).unwrap();
        let beta_c = spec.component(0);
        let expect = beta_c * (-Complex64::new(r.gamma, r.omega0) * t).exp();
        assert!((mean_a - expect).norm() < 1e-7, "got {mean_a}, expected {expect}");
    }

    #[test]
    fn evolve_rejects_leaky_truncation() {
        // fits at t = 0, but heating with n̄ = 3 pushes population into the edge
        let rho0 = FockDensity::from_pure(&coherent(2.0, 24));
        let r = res(1.0, 1.0, 3.0);
        assert!(matches!(
            evolve_density(&rho0, &r, 1.0, &StepControl::default()),
            Err(OracleError::TruncationLeakage { .. })
        ));
    }

    #[test]
    fn vacuum_wigner_is_gaussian() {
        let rho = FockDensity::from_pure(&coherent(0.0, 16));
        for &(p, q) in &[(0.0f64, 0.0f64), (1.0, -0.5), (2.0, 2.0)] {
            let expect = (-(p * p + q * q)).exp() / std::f64::consts::PI;
            assert_relative_eq!(wigner_from_density(&rho, p, q), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn number_state_wigner_kernel() {
        let dim = 24;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[3] = Complex64::new(1.0, 0.0);
        let rho = FockDensity::from_pure(&FockVector::from_amplitudes(amps));
        for &(p, q) in &[(0.3f64, 0.1f64), (1.1, -1.3)] {
            let r2 = p * p + q * q;
            let expect =
                -(-r2).exp() * laguerre_real(3, 0.0, 2.0 * r2) / std::f64::consts::PI;
            assert_relative_eq!(wigner_from_density(&rho, p, q), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn wigner_reconstruction_matches_closed_form_superposition() {
        let spec = SuperpositionSpec::new(2, 4, 2.0).unwrap();
        let rho = FockDensity::from_pure(&build_fock_vector(&spec, 64).unwrap());
        for &(p, q) in &[(0.0, 0.0), (1.5, 1.5), (-2.8, 0.3), (0.1, -2.9)] {
            let expect = crate::phasespace::wigner0(&spec, p, q);
            assert!((wigner_from_density(&rho, p, q) - expect).abs() <= 1e-6);
        }
    }
}
