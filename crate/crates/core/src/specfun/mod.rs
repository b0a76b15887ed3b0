//! Special functions and truncated bivariate Taylor-jet arithmetic.
//!
//! Only what the closed forms in this crate actually need: associated Laguerre
//! polynomials L_n^(α)(z), modified Bessel functions I_m(z), log-factorials,
//! and the [`Jet2`] engine for mixed partial derivatives at (x,y)=(1,1).

mod jet;

pub use jet::{compose_analytic, AnalyticFn, Jet2, JetError, JetVar};

use num_complex::Complex64;
use std::sync::OnceLock;

/// |z| above which `bessel_i` switches from the power series to the
/// large-argument asymptotic expansion. Both branches are tested against the
/// integral representation over the overlap window 15 ≤ |z| ≤ 25.
pub const BESSEL_SERIES_LIMIT: f64 = 20.0;

const LN_FACT_LEN: usize = 2048;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_LEN);
        t.push(0.0);
        for k in 1..LN_FACT_LEN {
            t.push(t[k - 1] + (k as f64).ln());
        }
        t
    })
}

/// ln(n!) via a cached running sum; exact to f64 rounding for n < 2048.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    assert!(n < table.len(), "ln_factorial: n = {n} out of supported range");
    table[n]
}

/// Binomial coefficient C(n, k) as f64.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
}

/// Associated Laguerre polynomial L_n^(α)(z) by the three-term recurrence
///
///   (k+1) L_{k+1}^(α) = (2k+1+α−z) L_k^(α) − (k+α) L_{k−1}^(α),
///
/// numerically stable for the moderate degrees (n ≲ 50) used here.
/// α = 0 gives the ordinary Laguerre polynomial. Requires α > −1.
pub fn laguerre(n: usize, alpha: f64, z: Complex64) -> Complex64 {
    debug_assert!(alpha > -1.0, "laguerre: alpha must exceed -1");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut lm1 = Complex64::new(1.0, 0.0);
    let mut l = Complex64::new(1.0 + alpha, 0.0) - z;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * l - (kf + alpha) * lm1) / (kf + 1.0);
        lm1 = l;
        l = next;
    }
    l
}

/// `laguerre` restricted to a real argument.
pub fn laguerre_real(n: usize, alpha: f64, x: f64) -> f64 {
    laguerre(n, alpha, Complex64::new(x, 0.0)).re
}

/// Modified Bessel function of the first kind I_m(z) for complex z.
///
/// Power series Σ_j (z/2)^{m+2j} / (j! (m+j)!) for |z| ≤ [`BESSEL_SERIES_LIMIT`],
/// otherwise the large-argument asymptotic expansion with the e^{−z} reflection
/// term. Arguments with Re z < 0 are reduced by I_m(−z) = (−1)^m I_m(z).
pub fn bessel_i(order: u32, z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        let v = bessel_i(order, -z);
        return if order % 2 == 0 { v } else { -v };
    }
    if z.norm() <= BESSEL_SERIES_LIMIT {
        bessel_i_series(order, z)
    } else {
        bessel_i_asymptotic(order, z)
    }
}

/// I₀(z); the even-order workhorse of the diagonal-purity closed form.
pub fn bessel_i0(z: Complex64) -> Complex64 {
    bessel_i(0, z)
}

fn bessel_i_series(order: u32, z: Complex64) -> Complex64 {
    let m = order as usize;
    let half = z / 2.0;
    let q = half * half;
    // t_0 = (z/2)^m / m!
    let mut term = Complex64::new((-ln_factorial(m)).exp(), 0.0);
    for _ in 0..m {
        term *= half;
    }
    let mut sum = term;
    for j in 1..400 {
        let jf = j as f64;
        term *= q / (jf * (jf + m as f64));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn bessel_i_asymptotic(order: u32, z: Complex64) -> Complex64 {
    // I_m(z) ~ [e^z Σ_k (−1)^k a_k/z^k + σ e^{−z} Σ_k a_k/z^k] / sqrt(2πz),
    // a_k = (4m²−1)(4m²−9)…(4m²−(2k−1)²)/(k! 8^k), σ = ±i for Im z ≷ 0 (×(−1)^m).
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut grow = Complex64::new(1.0, 0.0);
    let mut decay = Complex64::new(1.0, 0.0);
    let mut ak = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60u32 {
        let kf = k as f64;
        ak *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf) / z;
        let mag = ak.norm();
        if mag >= last {
            break; // divergent tail reached
        }
        last = mag;
        grow += if k % 2 == 0 { ak } else { -ak };
        decay += ak;
        if mag < 1e-18 {
            break;
        }
    }
    let sigma = Complex64::new(0.0, if z.im >= 0.0 { 1.0 } else { -1.0 })
        * if order % 2 == 0 { 1.0 } else { -1.0 };
    let front = (2.0 * std::f64::consts::PI * z).sqrt();
    (z.exp() * grow + sigma * (-z).exp() * decay) / front
}
