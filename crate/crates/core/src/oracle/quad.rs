//! Tensor-product Gauss–Legendre quadrature and the specialized phase-space
//! integrals used as ground truth: the purity kernel Ξ, the diagonal-purity
//! kernel Δ, the phonon kernel, and the propagator convolution.

use num_complex::Complex64;
use rayon::prelude::*;

use super::OracleError;
use crate::phasespace::{wigner0, ReservoirParams};
use crate::specfun::binomial;
use crate::states::SuperpositionSpec;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x) by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One quadrature axis mapped onto [a, b].
#[derive(Debug, Clone)]
pub struct QuadAxis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadAxis {
    pub fn legendre(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadAxis {
            nodes: x.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&t| half * t).collect(),
        }
    }
}

/// Tensor-product rule over 2 or 4 (or any small number of) axes.
/// Exactness degree per axis: 2n − 1 for n nodes.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub axes: Vec<QuadAxis>,
}

impl QuadratureRule {
    pub fn tensor(bounds: &[(f64, f64)], nodes_per_axis: usize) -> Self {
        QuadratureRule {
            axes: bounds.iter().map(|&(a, b)| QuadAxis::legendre(nodes_per_axis, a, b)).collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }
}

/// Evaluate the tensor-product sum Σ w_i1…w_id f(x_i1,…,x_id).
///
/// Parallelized over the first axis; per-slab partial sums are reduced in
/// index order so the result does not depend on the thread count.
pub fn quad_nd<F>(rule: &QuadratureRule, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = rule.dims();
    assert!(d >= 1);
    let outer = &rule.axes[0];
    let partials: Vec<f64> = (0..outer.nodes.len())
        .into_par_iter()
        .map(|i0| {
            let mut point = vec![0.0; d];
            point[0] = outer.nodes[i0];
            let mut idx = vec![0usize; d];
            let mut sum = 0.0;
            loop {
                let mut wt = 1.0;
                for k in 1..d {
                    point[k] = rule.axes[k].nodes[idx[k]];
                    wt *= rule.axes[k].weights[idx[k]];
                }
                sum += wt * f(&point);
                // odometer over axes 1..d
                let mut k = d;
                loop {
                    if k == 1 {
                        return outer.weights[i0] * sum;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < rule.axes[k].nodes.len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        })
        .collect();
    partials.iter().sum()
}

/// Node-doubling control for the adaptive wrappers.
#[derive(Debug, Clone, Copy)]
pub struct RefineOpts {
    /// Stop when successive refinements change by less than this.
    pub tol: f64,
    pub start_nodes: usize,
    pub max_nodes: usize,
}

impl Default for RefineOpts {
    fn default() -> Self {
        Self { tol: 1e-8, start_nodes: 32, max_nodes: 256 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub last_change: f64,
    pub nodes_per_axis: usize,
}

fn refine<E>(opts: &RefineOpts, mut eval: E) -> Result<QuadResult, OracleError>
where
    E: FnMut(usize) -> f64,
{
    let mut n = opts.start_nodes;
    let mut prev = eval(n);
    loop {
        let next_n = n * 2;
        if next_n > opts.max_nodes {
            return Err(OracleError::QuadratureBudget { last_change: f64::NAN, nodes: n });
        }
        let value = eval(next_n);
        let change = (value - prev).abs();
        if change <= opts.tol {
            return Ok(QuadResult { value, last_change: change, nodes_per_axis: next_n });
        }
        if next_n == opts.max_nodes {
            return Err(OracleError::QuadratureBudget { last_change: change, nodes: next_n });
        }
        prev = value;
        n = next_n;
    }
}

/// 2D adaptive tensor quadrature of `f(p, q)` with node doubling.
pub fn quad2d_adaptive<F>(
    p_bounds: (f64, f64),
    q_bounds: (f64, f64),
    f: F,
    opts: &RefineOpts,
) -> Result<QuadResult, OracleError>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    refine(opts, |n| {
        let rule = QuadratureRule::tensor(&[p_bounds, q_bounds], n);
        quad_nd(&rule, |x| f(x[0], x[1]))
    })
}

/// Half-width of the evaluation box for a spec: the smallest L (in steps of
/// 0.25 from √2|β| + 4) whose boundary maximum of |W₀| falls below 1e-14.
pub fn support_halfwidth(spec: &SuperpositionSpec) -> f64 {
    let base = std::f64::consts::SQRT_2 * spec.radius();
    let mut half = base + 4.0;
    let cap = base + 9.0;
    while half < cap {
        let mut boundary_max = 0.0f64;
        let samples = 96;
        for k in 0..samples {
            let t = -half + 2.0 * half * k as f64 / (samples - 1) as f64;
            for (p, q) in [(t, half), (t, -half), (half, t), (-half, t)] {
                boundary_max = boundary_max.max(wigner0(spec, p, q).abs());
            }
        }
        if boundary_max < 1e-14 {
            return half;
        }
        half += 0.25;
    }
    cap
}

fn weighted_wigner0_grid(spec: &SuperpositionSpec, axis: &QuadAxis) -> Vec<f64> {
    let n = axis.nodes.len();
    let mut grid = vec![0.0f64; n * n];
    grid.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let p = axis.nodes[i];
        let wi = axis.weights[i];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = wi * axis.weights[j] * wigner0(spec, p, axis.nodes[j]);
        }
    });
    grid
}

/// e^{−x} I₀(x) for real x ≥ 0; never overflows.
fn bessel_i0_scaled(x: f64) -> f64 {
    if x <= crate::specfun::BESSEL_SERIES_LIMIT {
        crate::specfun::bessel_i0(Complex64::new(x, 0.0)).re * (-x).exp()
    } else {
        let mut grow = 1.0f64;
        let mut decay = 1.0f64;
        let mut ak = 1.0f64;
        let mut last = f64::INFINITY;
        for k in 1..40 {
            let kf = k as f64;
            ak *= -(2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (8.0 * kf) / x;
            if ak.abs() >= last {
                break;
            }
            last = ak.abs();
            grow += ak.abs(); // e^{+x} series has all-positive coefficients
            decay += ak;
            if ak.abs() < 1e-18 {
                break;
            }
        }
        (grow + (-2.0 * x).exp() * decay) / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// Total purity by 4D quadrature of the Ξ-kernel double integral:
///
///   μ(t) = [(1+2n̄)u]^{−1} ∫∫∫∫ e^{−(1−u)[(p′−p″)²+(q′−q″)²]/(2(1+2n̄)u)}
///          W₀(p′,q′) W₀(p″,q″) dΓ′ dΓ″.
///
/// The kernel factorizes over the p- and q-pairs, so the tensor sum is
/// evaluated as two dense contractions; the rule itself is the plain
/// tensor-product Gauss–Legendre rule over the clipped support box.
pub fn purity_quadrature(
    spec: &SuperpositionSpec,
    nbar: f64,
    u: f64,
    opts: &RefineOpts,
) -> Result<QuadResult, OracleError> {
    let s = (1.0 + 2.0 * nbar) * u;
    let om = 1.0 - u;
    let half = support_halfwidth(spec);
    refine(opts, |n| {
        let axis = QuadAxis::legendre(n, -half, half);
        let a = weighted_wigner0_grid(spec, &axis);
        // E[i][k] = exp(−ω (x_i − x_k)² / (2s))
        let mut e = vec![0.0f64; n * n];
        for i in 0..n {
            for k in 0..n {
                e[i * n + k] = (-om * (axis.nodes[i] - axis.nodes[k]).powi(2) / (2.0 * s)).exp();
            }
        }
        // μ s = Σ_{ik} E[i,k] (A E Aᵀ)[i,k]
        let mut ae = vec![0.0f64; n * n]; // A·E
        ae.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (l, slot) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += a[i * n + j] * e[j * n + l];
                }
                *slot = acc;
            }
        });
        let partials: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for k in 0..n {
                    let mut m = 0.0;
                    for l in 0..n {
                        m += ae[i * n + l] * a[k * n + l];
                    }
                    acc += e[i * n + k] * m;
                }
                acc
            })
            .collect();
        partials.iter().sum::<f64>() / s
    })
}

/// Diagonal purity by 4D quadrature of the Δ-kernel double integral. The
/// kernel couples only the radii r′, r″:
///
///   Δ = [(1+2n̄)u]^{−1} e^{−(1−u)(r′−r″)²/(2(1+2n̄)u)} · i0e[(1−u) r′r″/((1+2n̄)u)]
///
/// written with the scaled Bessel function i0e(x) = e^{−x} I₀(x) so large
/// boxes cannot overflow.
pub fn diagonal_purity_quadrature(
    spec: &SuperpositionSpec,
    nbar: f64,
    u: f64,
    opts: &RefineOpts,
) -> Result<QuadResult, OracleError> {
    let s = (1.0 + 2.0 * nbar) * u;
    let om = 1.0 - u;
    let half = support_halfwidth(spec);
    refine(opts, |n| {
        let axis = QuadAxis::legendre(n, -half, half);
        let a = weighted_wigner0_grid(spec, &axis);
        let radii: Vec<f64> = (0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                (axis.nodes[i].powi(2) + axis.nodes[j].powi(2)).sqrt()
            })
            .collect();
        let partials: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let w = a[ij];
                if w == 0.0 {
                    return 0.0;
                }
                let r1 = radii[ij];
                let mut acc = 0.0;
                for kl in 0..n * n {
                    let r2 = radii[kl];
                    acc += a[kl]
                        * (-om * (r1 - r2).powi(2) / (2.0 * s)).exp()
                        * bessel_i0_scaled(om * r1 * r2 / s);
                }
                w * acc
            })
            .collect();
        partials.iter().sum::<f64>() / s
    })
}

/// Phonon distribution by 2D quadrature: P_m(t) = ∫ K_m(p,q;t) W₀(p,q) dΓ,
/// with the kernel written in the pole-free expanded form
///
///   K_m = 2(−1)^m/(1+S) e^{−(1−u)r²/(1+S)}
///         Σ_k C(m,k) (−2(1−u)r²)^k/k! (1−S)^{m−k}/(1+S)^{m+k},   S = (1+2n̄)u.
pub fn phonon_quadrature(
    spec: &SuperpositionSpec,
    nbar: f64,
    u: f64,
    m: usize,
    opts: &RefineOpts,
) -> Result<QuadResult, OracleError> {
    let s_big = (1.0 + 2.0 * nbar) * u;
    let om = 1.0 - u;
    let half = support_halfwidth(spec);
    let kernel = move |p: f64, q: f64| -> f64 {
        let r2 = p * p + q * q;
        let mut sum = 0.0;
        let mut pow = 1.0; // (−2(1−u)r²)^k / k!
        for k in 0..=m {
            if k > 0 {
                pow *= -2.0 * om * r2 / k as f64;
            }
            sum += binomial(m, k)
                * pow
                * (1.0 - s_big).powi((m - k) as i32)
                * (1.0 + s_big).powi(-((m + k) as i32));
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        2.0 * sign / (1.0 + s_big) * (-om * r2 / (1.0 + s_big)).exp() * sum
    };
    quad2d_adaptive(
        (-half, half),
        (-half, half),
        |p, q| kernel(p, q) * wigner0(spec, p, q),
        opts,
    )
}

/// Time-evolved Wigner values at `points` by direct propagator convolution
/// of the initial Wigner function (the integral form of the dynamics).
pub fn wigner_convolution(
    spec: &SuperpositionSpec,
    res: &ReservoirParams,
    t: f64,
    points: &[(f64, f64)],
    opts: &RefineOpts,
) -> Result<Vec<f64>, OracleError> {
    let u = res.compact_time(t);
    let s = (1.0 + 2.0 * nbar_of(res)) * u;
    let decay = (-res.gamma * t).exp();
    let angle = res.omega0 * t;
    let half = support_halfwidth(spec);
    let mut n = opts.start_nodes;
    let mut prev: Option<Vec<f64>> = None;
    loop {
        if n > opts.max_nodes {
            return Err(OracleError::QuadratureBudget { last_change: f64::NAN, nodes: n / 2 });
        }
        let axis = QuadAxis::legendre(n, -half, half);
        let a = weighted_wigner0_grid(spec, &axis);
        let values: Vec<f64> = points
            .par_iter()
            .map(|&(p, q)| {
                let p_t = p * angle.cos() + q * angle.sin();
                let q_t = q * angle.cos() - p * angle.sin();
                let mut acc = 0.0;
                for i in 0..n {
                    let dp = p_t - decay * axis.nodes[i];
                    for j in 0..n {
                        let dq = q_t - decay * axis.nodes[j];
                        acc += a[i * n + j] * (-(dp * dp + dq * dq) / s).exp();
                    }
                }
                acc / (std::f64::consts::PI * s)
            })
            .collect();
        if let Some(prev) = prev {
            let change = values
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if change <= opts.tol {
                return Ok(values);
            }
            if 2 * n > opts.max_nodes {
                return Err(OracleError::QuadratureBudget { last_change: change, nodes: n });
            }
        }
        prev = Some(values);
        n *= 2;
    }
}

fn nbar_of(res: &ReservoirParams) -> f64 {
    res.nbar
}
