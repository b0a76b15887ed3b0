//! Truncated bivariate Taylor jets around (x, y) = (1, 1).
//!
//! A [`Jet2`] of orders (Ox, Oy) stores the scaled derivatives
//! coeffs[i][j] = f^(i,j)(1,1) / (i! j!) for i ≤ Ox, j ≤ Oy. Ring operations
//! truncate silently at the fixed orders; analytic functions are applied by
//! composing their univariate Taylor expansion about the jet's constant term.
//! Mixed partials come back out through [`Jet2::extract`].

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

use super::{bessel_i, binomial, laguerre, ln_factorial};

/// Errors from data-dependent jet operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    /// Reciprocal of a jet whose constant term vanishes.
    #[error("reciprocal of a jet with (near-)zero constant term {constant_term}")]
    SingularReciprocal { constant_term: Complex64 },
    /// Derivative index outside the stored orders.
    #[error("derivative index ({i},{j}) out of range for jet of orders ({order_x},{order_y})")]
    IndexOutOfRange { i: usize, j: usize, order_x: usize, order_y: usize },
}

/// Which of the two variables a seed jet represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetVar {
    X,
    Y,
}

/// Analytic functions composable onto a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFn {
    Exp,
    Reciprocal,
    BesselI0,
    IntegerPower(u32),
    /// Associated Laguerre polynomial of fixed degree and order.
    Laguerre { degree: usize, alpha: f64 },
}

/// Apply an analytic function to a jet. See the inherent methods for the
/// individual composition rules.
pub fn compose_analytic(f: AnalyticFn, a: &Jet2) -> Result<Jet2, JetError> {
    match f {
        AnalyticFn::Exp => Ok(a.exp()),
        AnalyticFn::Reciprocal => a.recip(),
        AnalyticFn::BesselI0 => Ok(a.bessel_i0()),
        AnalyticFn::IntegerPower(p) => Ok(a.powi(p)),
        AnalyticFn::Laguerre { degree, alpha } => Ok(a.laguerre(degree, alpha)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    order_x: usize,
    order_y: usize,
    /// Row-major (order_x+1) × (order_y+1).
    coeffs: Vec<Complex64>,
}

impl Jet2 {
    const ZERO_CONSTANT_TOL: f64 = 1e-300;

    pub fn zero(order_x: usize, order_y: usize) -> Self {
        Self {
            order_x,
            order_y,
            coeffs: vec![Complex64::new(0.0, 0.0); (order_x + 1) * (order_y + 1)],
        }
    }

    pub fn constant(value: impl Into<Complex64>, order_x: usize, order_y: usize) -> Self {
        let mut jet = Self::zero(order_x, order_y);
        jet.coeffs[0] = value.into();
        jet
    }

    /// Jet of f(x,y) = x or f(x,y) = y: value 1 at the expansion point and a
    /// unit first derivative in the chosen variable.
    pub fn variable(which: JetVar, order_x: usize, order_y: usize) -> Self {
        let mut jet = Self::constant(1.0, order_x, order_y);
        match which {
            JetVar::X if order_x >= 1 => {
                let idx = jet.idx(1, 0);
                jet.coeffs[idx] = Complex64::new(1.0, 0.0);
            }
            JetVar::Y if order_y >= 1 => {
                let idx = jet.idx(0, 1);
                jet.coeffs[idx] = Complex64::new(1.0, 0.0);
            }
            _ => {}
        }
        jet
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.order_y + 1) + j
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.order_x, self.order_y)
    }

    /// Scaled coefficient f^(i,j)(1,1)/(i! j!).
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs[self.idx(i, j)]
    }

    /// Value at the expansion point.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// The mixed partial derivative ∂^{i+j} f / ∂x^i ∂y^j at (1,1),
    /// i.e. i!·j!·coeffs[i][j].
    pub fn extract(&self, i: usize, j: usize) -> Result<Complex64, JetError> {
        if i > self.order_x || j > self.order_y {
            return Err(JetError::IndexOutOfRange {
                i,
                j,
                order_x: self.order_x,
                order_y: self.order_y,
            });
        }
        Ok(self.coeff(i, j) * (ln_factorial(i) + ln_factorial(j)).exp())
    }

    fn assert_same_orders(&self, other: &Self) {
        assert!(
            self.order_x == other.order_x && self.order_y == other.order_y,
            "jet order mismatch: ({},{}) vs ({},{})",
            self.order_x,
            self.order_y,
            other.order_x,
            other.order_y
        );
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let f = factor.into();
        Self {
            order_x: self.order_x,
            order_y: self.order_y,
            coeffs: self.coeffs.iter().map(|c| c * f).collect(),
        }
    }

    /// Truncated Cauchy product.
    fn mul_impl(&self, other: &Self) -> Self {
        self.assert_same_orders(other);
        let mut out = Self::zero(self.order_x, self.order_y);
        for i in 0..=self.order_x {
            for j in 0..=self.order_y {
                let a = self.coeff(i, j);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..=(self.order_x - i) {
                    for q in 0..=(self.order_y - j) {
                        let k = out.idx(i + p, j + q);
                        out.coeffs[k] += a * other.coeff(p, q);
                    }
                }
            }
        }
        out
    }

    /// Result of Σ_k taylor[k]·h^k with h = self − value(); taylor[k] must be
    /// the scaled outer derivative f^(k)(c)/k!. Evaluated by Horner in h.
    fn compose(&self, taylor: &[Complex64]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        let top = taylor.len().min(self.order_x + self.order_y + 1);
        let mut acc = Self::constant(
            *taylor.get(top.saturating_sub(1)).unwrap_or(&Complex64::new(0.0, 0.0)),
            self.order_x,
            self.order_y,
        );
        for k in (0..top.saturating_sub(1)).rev() {
            acc = acc.mul_impl(&h);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    /// exp of the jet.
    pub fn exp(&self) -> Self {
        let c = self.value().exp();
        let depth = self.order_x + self.order_y + 1;
        let mut taylor = Vec::with_capacity(depth);
        let mut t = c;
        taylor.push(t);
        for k in 1..depth {
            t /= k as f64;
            taylor.push(t);
        }
        self.compose(&taylor)
    }

    /// 1/jet; errors when the constant term vanishes.
    pub fn recip(&self) -> Result<Self, JetError> {
        let c = self.value();
        if c.norm() <= Self::ZERO_CONSTANT_TOL {
            return Err(JetError::SingularReciprocal { constant_term: c });
        }
        let depth = self.order_x + self.order_y + 1;
        let mut taylor = Vec::with_capacity(depth);
        let mut t = 1.0 / c;
        taylor.push(t);
        for _ in 1..depth {
            t = -t / c;
            taylor.push(t);
        }
        Ok(self.compose(&taylor))
    }

    /// I₀ of the jet, through the derivative identity
    /// I₀^(k)(c) = 2^{−k} Σ_j C(k,j) I_{|k−2j|}(c).
    pub fn bessel_i0(&self) -> Self {
        let c = self.value();
        let depth = self.order_x + self.order_y + 1;
        let base: Vec<Complex64> = (0..depth as u32).map(|m| bessel_i(m, c)).collect();
        let mut taylor = Vec::with_capacity(depth);
        for k in 0..depth {
            let mut d = Complex64::new(0.0, 0.0);
            for j in 0..=k {
                d += binomial(k, j) * base[(k as isize - 2 * j as isize).unsigned_abs()];
            }
            taylor.push(d / 2f64.powi(k as i32) / ln_factorial(k).exp());
        }
        self.compose(&taylor)
    }

    /// Integer power; exact (the composition terminates at k = p).
    pub fn powi(&self, p: u32) -> Self {
        let c = self.value();
        let depth = (self.order_x + self.order_y + 1).min(p as usize + 1);
        let mut taylor = Vec::with_capacity(depth);
        for k in 0..depth {
            taylor.push(binomial(p as usize, k) * c.powu(p - k as u32));
        }
        self.compose(&taylor)
    }

    /// L_n^(α) of the jet via the explicit finite expansion: the composition
    /// terminates at degree n by d^k/dz^k L_n^(α) = (−1)^k L_{n−k}^(α+k), so
    /// truncation is exact.
    pub fn laguerre(&self, n: usize, alpha: f64) -> Self {
        let c = self.value();
        let depth = (self.order_x + self.order_y + 1).min(n + 1);
        let mut taylor = Vec::with_capacity(depth);
        for k in 0..depth {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            taylor.push(sign * laguerre(n - k, alpha + k as f64, c) / ln_factorial(k).exp());
        }
        self.compose(&taylor)
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.assert_same_orders(rhs);
        Jet2 {
            order_x: self.order_x,
            order_y: self.order_y,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.assert_same_orders(rhs);
        Jet2 {
            order_x: self.order_x,
            order_y: self.order_y,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        self.mul_impl(rhs)
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn x(ox: usize, oy: usize) -> Jet2 {
        Jet2::variable(JetVar::X, ox, oy)
    }
    fn y(ox: usize, oy: usize) -> Jet2 {
        Jet2::variable(JetVar::Y, ox, oy)
    }

    #[test]
    fn variable_seed_coefficients() {
        let j = x(2, 2);
        assert_eq!(j.coeff(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(j.coeff(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(j.coeff(0, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn square_of_x() {
        // x² = 1 + 2(x−1) + (x−1)²
        let j = x(2, 0);
        let sq = &j * &j;
        assert_eq!(sq.coeff(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(sq.coeff(1, 0), Complex64::new(2.0, 0.0));
        assert_eq!(sq.coeff(2, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn additive_inverse_is_zero() {
        let a = &(&x(2, 2) * &y(2, 2)) + &Jet2::constant(Complex64::new(0.3, -0.7), 2, 2);
        let z = &a + &(-&a);
        assert!(z.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn exp_of_zero_jet_is_one() {
        let e = Jet2::zero(3, 3).exp();
        assert_eq!(e.coeff(0, 0), Complex64::new(1.0, 0.0));
        for i in 0..=3 {
            for j in 0..=3 {
                if i + j > 0 {
                    assert_eq!(e.coeff(i, j), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn reciprocal_of_x_is_geometric() {
        // 1/x about x=1: coefficients (−1)^k
        let r = x(4, 0).recip().unwrap();
        for k in 0..=4 {
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(r.coeff(k, 0).re, expect, epsilon = 1e-14);
            assert_relative_eq!(r.coeff(k, 0).im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reciprocal_of_zero_constant_errors() {
        let j = &x(2, 0) - &Jet2::constant(1.0, 2, 0);
        assert!(matches!(j.recip(), Err(JetError::SingularReciprocal { .. })));
    }

    #[test]
    fn exp_xy_mixed_partial() {
        // ∂²(e^{xy})/∂x∂y at (1,1) = (1+xy)e^{xy}|₁,₁ = 2e
        let j = (&x(1, 1) * &y(1, 1)).exp();
        let d = j.extract(1, 1).unwrap();
        assert_relative_eq!(d.re, 2.0 * std::f64::consts::E, epsilon = 1e-12);
        assert_relative_eq!(d.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exp_of_sum_of_shifts() {
        // exp((x−1)+(y−1)): every extracted partial is 1
        let arg = &(&x(3, 3) + &y(3, 3)) - &Jet2::constant(2.0, 3, 3);
        let e = arg.exp();
        for i in 0..=3 {
            for j in 0..=3 {
                let d = e.extract(i, j).unwrap();
                assert_relative_eq!(d.re, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn extract_power_gives_factorial() {
        let j = x(3, 0).powi(3);
        assert_relative_eq!(j.extract(3, 0).unwrap().re, 6.0, epsilon = 1e-12);
        let c = Jet2::constant(Complex64::new(2.5, 1.5), 2, 2);
        assert_eq!(c.extract(0, 0).unwrap(), Complex64::new(2.5, 1.5));
    }

    #[test]
    fn extract_out_of_range_errors() {
        assert!(matches!(
            x(1, 1).extract(2, 0),
            Err(JetError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn laguerre_composition_matches_scalar() {
        // L_2(z) at the constant term of 2x(y+1) about (1,1): value path only
        let arg = (&x(2, 2) * &(&y(2, 2) + &Jet2::constant(1.0, 2, 2))).scale(2.0);
        let j = arg.laguerre(2, 0.0);
        let direct = laguerre(2, 0.0, Complex64::new(4.0, 0.0));
        assert_relative_eq!(j.value().re, direct.re, epsilon = 1e-13);
    }

    #[test]
    fn compose_analytic_dispatch() {
        let a = x(2, 1);
        assert_eq!(compose_analytic(AnalyticFn::Exp, &a).unwrap(), a.exp());
        assert_eq!(
            compose_analytic(AnalyticFn::IntegerPower(3), &a).unwrap(),
            a.powi(3)
        );
        assert!(compose_analytic(
            AnalyticFn::Reciprocal,
            &(&a - &Jet2::constant(1.0, 2, 1))
        )
        .is_err());
    }

    /// Mixed partials of an entire composite test function (exp, I₀, Laguerre,
    /// powers, products) against Richardson-extrapolated central differences.
    #[test]
    fn jet_derivatives_match_finite_differences() {
        // f(x,y) = exp(x·y/4)·x³ + I₀(x·y/2) + L₂(x·y/3)
        let f = |xv: f64, yv: f64| -> f64 {
            let xy = Complex64::new(xv * yv, 0.0);
            ((xy / 4.0).exp() * xv.powi(3)
                + bessel_i(0, xy / 2.0)
                + laguerre(2, 0.0, xy / 3.0))
            .re
        };
        let xx = x(3, 3);
        let yy = y(3, 3);
        let xy = &xx * &yy;
        let jet = &(&(&xy.scale(0.25).exp() * &xx.powi(3)) + &xy.scale(0.5).bessel_i0())
            + &xy.scale(1.0 / 3.0).laguerre(2, 0.0);
        for i in 0..=3usize {
            for j in 0..=3usize {
                if i + j == 0 {
                    continue;
                }
                let exact = jet.extract(i, j).unwrap().re;
                let fd = |h: f64| -> f64 {
                    let mut acc = 0.0;
                    for a in 0..=i {
                        for b in 0..=j {
                            let sign = if (i - a + j - b) % 2 == 0 { 1.0 } else { -1.0 };
                            let xv = 1.0 + (a as f64 - i as f64 / 2.0) * 2.0 * h;
                            let yv = 1.0 + (b as f64 - j as f64 / 2.0) * 2.0 * h;
                            acc += sign * binomial(i, a) * binomial(j, b) * f(xv, yv);
                        }
                    }
                    acc / (2.0 * h).powi((i + j) as i32)
                };
                // five-level Neville tableau eliminating h², h⁴, …
                let levels = 5;
                let mut row: Vec<f64> = (0..levels).map(|k| fd(0.4 / 2f64.powi(k))).collect();
                for m in 1..levels {
                    let fac = 4f64.powi(m);
                    row = (0..row.len() - 1)
                        .map(|k| (fac * row[k + 1] - row[k]) / (fac - 1.0))
                        .collect();
                }
                let richardson = row[0];
                let scale = exact.abs().max(1.0);
                assert!(
                    (richardson - exact).abs() <= 1e-7 * scale,
                    "({i},{j}): jet {exact} vs fd {richardson}"
                );
            }
        }
    }

    #[test]
    fn reciprocal_jet_matches_analytic_derivatives() {
        // ∂^{i+j} (x+2y)^{-1} / ∂xⁱ∂yʲ at (1,1) = (−1)^{i+j} (i+j)! 2ʲ / 3^{i+j+1}
        let jet = (&x(3, 3) + &y(3, 3).scale(2.0)).recip().unwrap();
        for i in 0..=3usize {
            for j in 0..=3usize {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let expect = sign * (ln_factorial(i + j)).exp() * 2f64.powi(j as i32)
                    / 3f64.powi((i + j + 1) as i32);
                let got = jet.extract(i, j).unwrap();
                assert_relative_eq!(got.re, expect, epsilon = 1e-12);
                assert_relative_eq!(got.im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn jets_are_finite() {
        let j = (&x(2, 2) * &y(2, 2)).exp();
        assert!(j.is_finite());
    }
}
