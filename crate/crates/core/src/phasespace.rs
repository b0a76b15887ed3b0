//! Wigner-function statics and dynamics for the circle superposition.
//!
//! The initial Wigner function is
//!
//!   W_n(p,q;0) = ((−1)^n/π) |Ν|² { Σ_r e^{−ℛ_rr} L_n(2ℛ_rr)
//!                + 2 Σ_{s<r} e^{−Re ℛ_rs} cos(Im ℛ_rs) L_n(2 Re ℛ_rs) },
//!
//! with ℛ_rs(0) = [(q+ip) − √2 β_r][(q+ip) − √2 β_s]* + |β|² − β_r β_s*.
//! Under the damped-oscillator channel it evolves through a Gaussian
//! propagator ([`fp_kernel`]); carrying out that convolution in closed form
//! gives [`wigner_t`]. Both split exactly into diagonal (r = s) and
//! nondiagonal (r ≠ s, interference) parts.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

use crate::specfun::{binomial, laguerre, laguerre_real};
use crate::states::{norm_radicand, SuperpositionSpec};

/// |1 − 2(n̄+1)u| below which the removable singularity of the time-evolved
/// closed form is evaluated through the cancelled polynomial expansion.
pub const SINGULAR_CROSSOVER: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseSpaceError {
    #[error("invalid reservoir parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("propagator kernel degenerates to a delta distribution at t = 0; evaluate the initial Wigner function directly")]
    DeltaLimit,
    #[error("invalid time argument {t}")]
    InvalidTime { t: f64 },
}

/// Thermal damping channel: trap frequency ω₀, relaxation rate γ > 0, and
/// equilibrium mean quantum number n̄ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub omega0: f64,
    pub gamma: f64,
    pub nbar: f64,
}

impl ReservoirParams {
    pub fn new(omega0: f64, gamma: f64, nbar: f64) -> Result<Self, PhaseSpaceError> {
        let r = Self { omega0, gamma, nbar };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), PhaseSpaceError> {
        if !(self.gamma > 0.0) {
            return Err(PhaseSpaceError::InvalidParams { reason: "gamma must be > 0".into() });
        }
        if !(self.nbar >= 0.0) {
            return Err(PhaseSpaceError::InvalidParams { reason: "nbar must be >= 0".into() });
        }
        if !self.omega0.is_finite() {
            return Err(PhaseSpaceError::InvalidParams { reason: "omega0 must be finite".into() });
        }
        Ok(())
    }

    /// Compact time u(t) = 1 − e^{−2γt}.
    pub fn compact_time(&self, t: f64) -> f64 {
        1.0 - (-2.0 * self.gamma * t).exp()
    }
}

/// A time together with its compact-time image u = 1 − e^{−2γt} ∈ [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompactTime {
    time: f64,
    u: f64,
}

impl CompactTime {
    pub fn from_time(gamma: f64, t: f64) -> Result<Self, PhaseSpaceError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(PhaseSpaceError::InvalidTime { t });
        }
        Ok(Self { time: t, u: 1.0 - (-2.0 * gamma * t).exp() })
    }

    pub fn from_u(gamma: f64, u: f64) -> Result<Self, PhaseSpaceError> {
        if !(0.0..1.0).contains(&u) {
            return Err(PhaseSpaceError::InvalidTime { t: u });
        }
        Ok(Self { time: -(1.0 - u).ln() / (2.0 * gamma), u })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn u(&self) -> f64 {
        self.u
    }
}

/// Which part of the term sum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerPart {
    /// r = s single sum (one hump per component).
    Diagonal,
    /// Doubled r > s sum (interference).
    Nondiagonal,
    /// Both.
    Full,
}

fn part_weights(part: WignerPart) -> (f64, f64) {
    match part {
        WignerPart::Diagonal => (1.0, 0.0),
        WignerPart::Nondiagonal => (0.0, 1.0),
        WignerPart::Full => (1.0, 1.0),
    }
}

/// Initial Wigner function W_n(p,q;0).
pub fn wigner0(spec: &SuperpositionSpec, p: f64, q: f64) -> f64 {
    wigner0_part(spec, p, q, WignerPart::Full)
}

/// Diagonal or nondiagonal part of W_n(p,q;0); the parts sum to the total
/// exactly (term partition).
pub fn wigner0_part(spec: &SuperpositionSpec, p: f64, q: f64, part: WignerPart) -> f64 {
    let (w_diag, w_cross) = part_weights(part);
    let n = spec.excitation();
    let nc = spec.components();
    let b2 = spec.radius() * spec.radius();
    let z = Complex64::new(q, p);
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut sum = 0.0;
    for lo in 0..nc {
        let beta_lo = spec.component(lo);
        let zl = z - sqrt2 * beta_lo;
        if w_diag != 0.0 {
            let r = zl.norm_sqr();
            sum += w_diag * (-r).exp() * laguerre_real(n, 0.0, 2.0 * r);
        }
        if w_cross != 0.0 {
            for hi in (lo + 1)..nc {
                let beta_hi = spec.component(hi);
                let r = (z - sqrt2 * beta_hi) * zl.conj() + b2 - beta_hi * beta_lo.conj();
                sum += 2.0
                    * w_cross
                    * (-r.re).exp()
                    * r.im.cos()
                    * laguerre_real(n, 0.0, 2.0 * r.re);
            }
        }
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / std::f64::consts::PI / norm_radicand(spec) * sum
}

/// Gaussian propagator kernel of the damped-oscillator channel,
///
///   𝕂(p,q;t|p′,q′;0) = [π(1+2n̄)u]^{−1}
///       exp{ −[(p_t − e^{−γt}p′)² + (q_t − e^{−γt}q′)²] / [(1+2n̄)u] },
///
/// with rotated coordinates p_t = p cos ω₀t + q sin ω₀t,
/// q_t = q cos ω₀t − p sin ω₀t and u = 1 − e^{−2γt}.
pub fn fp_kernel(
    res: &ReservoirParams,
    t: f64,
    p: f64,
    q: f64,
    p_prime: f64,
    q_prime: f64,
) -> Result<f64, PhaseSpaceError> {
    res.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(PhaseSpaceError::InvalidTime { t });
    }
    if t == 0.0 {
        return Err(PhaseSpaceError::DeltaLimit);
    }
    let u = res.compact_time(t);
    let s = (1.0 + 2.0 * res.nbar) * u;
    let (p_t, q_t) = rotate(res.omega0 * t, p, q);
    let decay = (-res.gamma * t).exp();
    let d2 = (p_t - decay * p_prime).powi(2) + (q_t - decay * q_prime).powi(2);
    Ok((-d2 / s).exp() / (std::f64::consts::PI * s))
}

#[inline]
fn rotate(angle: f64, p: f64, q: f64) -> (f64, f64) {
    let (sin, cos) = angle.sin_cos();
    (p * cos + q * sin, q * cos - p * sin)
}

/// Time-evolved Wigner function W_n(p,q;t), the closed-form convolution of
/// [`wigner0`] with [`fp_kernel`]. u = 0 falls back to the initial function.
pub fn wigner_t(spec: &SuperpositionSpec, res: &ReservoirParams, t: f64, p: f64, q: f64) -> f64 {
    wigner_t_part(spec, res, t, p, q, WignerPart::Full)
}

/// Diagonal/nondiagonal split of [`wigner_t`], exact term partition.
pub fn wigner_t_part(
    spec: &SuperpositionSpec,
    res: &ReservoirParams,
    t: f64,
    p: f64,
    q: f64,
    part: WignerPart,
) -> f64 {
    let u = res.compact_time(t);
    if u == 0.0 {
        return wigner0_part(spec, p, q, part);
    }
    let nbar = res.nbar;
    let ds = 1.0 - 2.0 * (nbar + 1.0) * u;
    let expanded = ds.abs() <= SINGULAR_CROSSOVER;
    let (p_t, q_t) = rotate(res.omega0 * t, p, q);
    wigner_t_pair_sum(spec, nbar, u, Complex64::new(q_t, p_t), part, expanded)
}

/// Term sum of the time-evolved closed form with the evaluation path pinned:
/// `expanded` uses the polynomial form in which the 1/(1−2(n̄+1)u) poles of
/// the Laguerre argument cancel against the prefactor analytically.
fn wigner_t_pair_sum(
    spec: &SuperpositionSpec,
    nbar: f64,
    u: f64,
    z_t: Complex64,
    part: WignerPart,
    expanded: bool,
) -> f64 {
    let (w_diag, w_cross) = part_weights(part);
    let n = spec.excitation();
    let nc = spec.components();
    let b2 = spec.radius() * spec.radius();
    let c = (2.0 * (1.0 - u)).sqrt();
    let om = 1.0 - u;
    let s = (1.0 + 2.0 * nbar) * u;
    let d1 = 1.0 + 2.0 * nbar * u;
    let ds = 1.0 - 2.0 * (nbar + 1.0) * u;

    let mut sum = 0.0;
    for lo in 0..nc {
        let beta_lo = spec.component(lo);
        let zl = (z_t - c * beta_lo).conj();
        for hi in lo..nc {
            let mult = if hi == lo { w_diag } else { 2.0 * w_cross };
            if mult == 0.0 {
                continue;
            }
            let beta_hi = spec.component(hi);
            let r = (z_t - c * beta_hi) * zl + (b2 - beta_hi * beta_lo.conj()) * om;
            let d = (hi - lo) as f64;
            let ang = std::f64::consts::PI * d / nc as f64;
            let sin2 = ang.sin().powi(2);
            let sin2d = (2.0 * ang).sin();
            let f = Complex64::new(
                (r.re + 2.0 * s * b2 * sin2) / d1,
                (-r.im + s * b2 * sin2d) / d1,
            );
            // G = ĝ/(d1·ds); ĝ is polynomial in u, so the 1/ds pole is explicit
            let g_hat = Complex64::new(
                om * r.re - 2.0 * s * s * b2 * sin2,
                s * r.im + om * s * b2 * sin2d,
            );
            let lag = if expanded {
                // (ds/d1)^n L_n(2ĝ/(d1·ds)) = Σ_k C(n,k)(−2ĝ)^k/k! ds^{n−k}/d1^{n+k}
                let mut acc = Complex64::new(0.0, 0.0);
                let mut pow = Complex64::new(1.0, 0.0); // (−2ĝ)^k/k!
                for k in 0..=n {
                    if k > 0 {
                        pow *= -2.0 * g_hat / k as f64;
                    }
                    acc += binomial(n, k)
                        * pow
                        * ds.powi((n - k) as i32)
                        * d1.powi(-((n + k) as i32));
                }
                acc
            } else {
                let g = g_hat / (d1 * ds);
                laguerre(n, 0.0, 2.0 * g) * (ds / d1).powi(n as i32)
            };
            sum += mult * ((-f).exp() * lag).re;
        }
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / std::f64::consts::PI / norm_radicand(spec) / d1 * sum
}

/// Rectangular evaluation window and point counts for grid dumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub np: usize,
    pub nq: usize,
}

impl GridBounds {
    /// Window used for the figure dumps: p,q ∈ [−6.5, 6.5] at 261×261, wide
    /// enough for |β| = 3.03 lobes (√2|β| ≈ 4.3) plus three Gaussian widths.
    pub fn default_figure() -> Self {
        Self { p_min: -6.5, p_max: 6.5, q_min: -6.5, q_max: 6.5, np: 261, nq: 261 }
    }

    pub fn p_at(&self, i: usize) -> f64 {
        lerp(self.p_min, self.p_max, i, self.np)
    }

    pub fn q_at(&self, j: usize) -> f64 {
        lerp(self.q_min, self.q_max, j, self.nq)
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Row-major grid of real values: `value(i, j)` is the integrand at
/// (p_i, q_j), rows indexed by p.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    bounds: GridBounds,
    values: Vec<f64>,
}

impl PhaseGrid {
    pub fn bounds(&self) -> &GridBounds {
        &self.bounds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.bounds.nq + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid-rule integral over the window.
    pub fn trapezoid_sum(&self) -> f64 {
        let b = &self.bounds;
        if b.np < 2 || b.nq < 2 {
            return 0.0;
        }
        let dp = (b.p_max - b.p_min) / (b.np - 1) as f64;
        let dq = (b.q_max - b.q_min) / (b.nq - 1) as f64;
        let mut sum = 0.0;
        for i in 0..b.np {
            let wi = if i == 0 || i == b.np - 1 { 0.5 } else { 1.0 };
            for j in 0..b.nq {
                let wj = if j == 0 || j == b.nq - 1 { 0.5 } else { 1.0 };
                sum += wi * wj * self.value(i, j);
            }
        }
        sum * dp * dq
    }

    /// CSV dump: a name row, a row with the window bounds and point counts,
    /// then np rows of nq row-major values. Plain `Display` float formatting
    /// (shortest round-trip representation, '.' decimal separator).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let b = &self.bounds;
        writeln!(w, "p_min,p_max,q_min,q_max,np,nq")?;
        writeln!(w, "{},{},{},{},{},{}", b.p_min, b.p_max, b.q_min, b.q_max, b.np, b.nq)?;
        for i in 0..b.np {
            let mut line = String::new();
            for j in 0..b.nq {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", self.value(i, j)));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Evaluate `f(p, q)` over the window. Rows are filled in parallel; every
/// point is computed independently, so the output is bit-identical regardless
/// of thread count.
pub fn grid_eval<F>(bounds: GridBounds, f: F) -> PhaseGrid
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let mut values = vec![0.0f64; bounds.np * bounds.nq];
    values
        .par_chunks_mut(bounds.nq)
        .enumerate()
        .for_each(|(i, row)| {
            let p = bounds.p_at(i);
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = f(p, bounds.q_at(j));
            }
        });
    PhaseGrid { bounds, values }
}

/// Sidecar metadata for a serialized grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridMetadata {
    pub spec: SuperpositionSpec,
    pub reservoir: Option<ReservoirParams>,
    pub time: f64,
    pub u: f64,
    pub part: String,
    pub bounds: GridBounds,
    pub sha256: String,
}
