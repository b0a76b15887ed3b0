//! The target superposition of N displaced number states on a circle,
//!
//!   |Ψ_n^(N)(β)⟩ = Ν_n^(N) Σ_r D(β_r)|n⟩,  β_r = |β| e^{iθ_r},
//!
//! with evenly spaced phases θ_r = θ₁ + 2π(r−1)/N, its normalization constant,
//! and truncated Fock-basis representations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::{laguerre, laguerre_real, ln_factorial};

/// Squared-norm loss tolerated by [`build_fock_vector`] before it rejects the
/// truncation dimension.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatesError {
    #[error("invalid superposition spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("normalization radicand {radicand} is not positive (near-degenerate superposition)")]
    DegenerateState { radicand: f64 },
    #[error("Fock truncation at dim {dim} loses {loss:.3e} of the norm; need dim >= {required_dim}")]
    Truncation { dim: usize, loss: f64, required_dim: usize },
}

/// Parameters of the target state |Ψ_n^(N)(β)⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionSpec {
    excitation: usize,
    components: usize,
    radius: f64,
    theta1: f64,
}

impl SuperpositionSpec {
    /// Spec with the default phase convention θ_r = 2πr/N.
    pub fn new(excitation: usize, components: usize, radius: f64) -> Result<Self, StatesError> {
        let theta1 = std::f64::consts::TAU / components.max(1) as f64;
        Self::with_theta1(excitation, components, radius, theta1)
    }

    pub fn with_theta1(
        excitation: usize,
        components: usize,
        radius: f64,
        theta1: f64,
    ) -> Result<Self, StatesError> {
        if components == 0 {
            return Err(StatesError::InvalidSpec { reason: "component count must be >= 1".into() });
        }
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(StatesError::InvalidSpec {
                reason: format!("radius must be finite and >= 0, got {radius}"),
            });
        }
        if !theta1.is_finite() {
            return Err(StatesError::InvalidSpec { reason: "theta1 must be finite".into() });
        }
        Ok(Self { excitation, components, radius, theta1 })
    }

    /// Spec produced by an ℓ-cycle sequence: N = 2^(ℓ+1) components.
    pub fn for_cycles(excitation: usize, cycles: u32, radius: f64) -> Result<Self, StatesError> {
        Self::new(excitation, 1usize << (cycles + 1), radius)
    }

    pub fn excitation(&self) -> usize {
        self.excitation
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    /// Half the angle between adjacent components, φ = π/N.
    pub fn half_angle(&self) -> f64 {
        std::f64::consts::PI / self.components as f64
    }

    /// Phase of component k (0-based), θ = θ₁ + 2πk/N.
    pub fn component_phase(&self, k: usize) -> f64 {
        self.theta1 + std::f64::consts::TAU * k as f64 / self.components as f64
    }

    /// Displacement β_k of component k (0-based).
    pub fn component(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.radius, self.component_phase(k))
    }
}

/// The positive radicand Ν^{−2} = N + 2 Σ_{r=1}^{N−1} r e^{−2|β|² sin²[(N−r)φ]}
/// cos(|β|² sin[2(N−r)φ]) L_n(4|β|² sin²[(N−r)φ]), φ = π/N.
///
/// Equals the squared norm of the unnormalized sum Σ_r D(β_r)|n⟩ and depends
/// only on |β| and the (even) phase spacing, never on θ₁.
pub fn norm_radicand(spec: &SuperpositionSpec) -> f64 {
    let n = spec.excitation;
    let nc = spec.components;
    let b2 = spec.radius * spec.radius;
    let phi = spec.half_angle();
    let mut sum = nc as f64;
    for r in 1..nc {
        let arg = (nc - r) as f64 * phi;
        let s2 = arg.sin() * arg.sin();
        sum += 2.0
            * r as f64
            * (-2.0 * b2 * s2).exp()
            * (b2 * (2.0 * arg).sin()).cos()
            * laguerre_real(n, 0.0, 4.0 * b2 * s2);
    }
    sum
}

/// Normalization constant Ν_n^(N) = radicand^{−1/2}.
pub fn normalization_constant(spec: &SuperpositionSpec) -> Result<f64, StatesError> {
    let radicand = norm_radicand(spec);
    if radicand <= 0.0 || !radicand.is_finite() {
        return Err(StatesError::DegenerateState { radicand });
    }
    Ok(radicand.powf(-0.5))
}

/// Matrix element ⟨m|D(β)|n⟩ of the displacement operator
/// D(β) = exp(β a† − β* a), in the associated-Laguerre closed form
///
///   ⟨m|D(β)|n⟩ = √(n!/m!) β^{m−n} e^{−|β|²/2} L_n^{(m−n)}(|β|²)      (m ≥ n),
///   ⟨m|D(β)|n⟩ = √(m!/n!) (−β*)^{n−m} e^{−|β|²/2} L_m^{(n−m)}(|β|²)  (m < n).
///
/// Magnitudes are assembled in log space so the formula stays finite for
/// dimensions up to several hundred.
pub fn displaced_number_overlap(m: usize, n: usize, beta: Complex64) -> Complex64 {
    let b2 = beta.norm_sqr();
    if b2 == 0.0 {
        return if m == n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let (lo, hi, base) = if m >= n { (n, m, beta) } else { (m, n, -beta.conj()) };
    let d = hi - lo;
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + d as f64 * base.norm().ln()
        - 0.5 * b2;
    let phase = d as f64 * base.arg();
    let lag = laguerre(lo, d as f64, Complex64::new(b2, 0.0)).re;
    Complex64::from_polar(ln_mag.exp(), phase) * lag
}

/// Truncated Fock-basis amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
    truncation_loss: f64,
}

impl FockVector {
    /// Wrap raw amplitudes; no normalization is implied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        Self { amps, truncation_loss: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, m: usize) -> Complex64 {
        self.amps[m]
    }

    /// 1 − ‖amps‖² recorded when the vector was built from a spec.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &FockVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        let n = n2.sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
        n2
    }

    /// ⟨a†a⟩ = Σ m |c_m|².
    pub fn mean_occupation(&self) -> f64 {
        self.amps.iter().enumerate().map(|(m, a)| m as f64 * a.norm_sqr()).sum()
    }

    /// ⟨a†²a²⟩ = Σ m(m−1) |c_m|².
    pub fn second_factorial_moment(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(m, a)| (m * m.saturating_sub(1)) as f64 * a.norm_sqr())
            .sum()
    }
}

/// Truncation rule dim = ⌈|β|²⌉ + 6⌈|β|⌉ + n + 10, sized to the Poisson tail
/// of the displaced components.
pub fn default_fock_dim(spec: &SuperpositionSpec) -> usize {
    let b = spec.radius;
    (b * b).ceil() as usize + 6 * b.ceil() as usize + spec.excitation + 10
}

/// Fock amplitudes of the normalized superposition, c_m = Ν Σ_r ⟨m|D(β_r)|n⟩.
///
/// The squared norm of the result must reach 1 within [`TRUNCATION_TOL`];
/// otherwise the dimension is rejected with the rule-of-thumb requirement.
pub fn build_fock_vector(spec: &SuperpositionSpec, dim: usize) -> Result<FockVector, StatesError> {
    if dim <= spec.excitation {
        return Err(StatesError::Truncation {
            dim,
            loss: 1.0,
            required_dim: default_fock_dim(spec),
        });
    }
    let norm = normalization_constant(spec)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..spec.components {
        let beta_k = spec.component(k);
        for (m, amp) in amps.iter_mut().enumerate() {
            *amp += displaced_number_overlap(m, spec.excitation, beta_k);
        }
    }
    for amp in &mut amps {
        *amp *= norm;
    }
    let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let loss = 1.0 - norm_sqr;
    if loss.abs() > TRUNCATION_TOL {
        return Err(StatesError::Truncation { dim, loss, required_dim: default_fock_dim(spec) });
    }
    Ok(FockVector { amps, truncation_loss: loss })
}
