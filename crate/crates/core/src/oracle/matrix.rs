//! Minimal dense complex matrix support for the brute-force oracles:
//! multiplication, matrix exponential, and a Hermitian eigensolver.
//! Dimensions stay ≤ a few hundred, so naive O(dim³) arithmetic is fine.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Truncated annihilation operator: a|m⟩ = √m |m−1⟩.
    pub fn annihilation(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    fn one_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor core.
    pub fn expm(&self) -> Self {
        let norm = self.one_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = self.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut acc = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..60 {
            term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
            acc = acc.add(&term);
            if term.one_norm() < 1e-18 * acc.one_norm() {
                break;
            }
        }
        for _ in 0..squarings {
            acc = acc.mul(&acc);
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
/// Returns (eigenvalues, eigenvector matrix with eigenvectors as columns),
/// unsorted. Intended for oracle work at dim ≤ ~200.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = a.dim();
    let mut m = a.clone();
    let mut v = CMatrix::identity(d);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G: identity except G[p][p]=c, G[p][q]=s·e^{iφ}, G[q][p]=−s·e^{−iφ}, G[q][q]=c
                let gpq = s * phase;
                let gqp = -s * phase.conj();
                // m ← G† m G, applied as row and column updates
                for j in 0..d {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = c * mpj + gqp.conj() * mqj;
                    m[(q, j)] = gpq.conj() * mpj + c * mqj;
                }
                for i in 0..d {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = c * mip + gqp * miq;
                    m[(i, q)] = gpq * mip + c * miq;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip + gqp * viq;
                    v[(i, q)] = gpq * vip + c * viq;
                }
            }
        }
    }
    let eigs = (0..d).map(|i| m[(i, i)].re).collect();
    (eigs, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm_of_zero_is_identity() {
        let e = CMatrix::zeros(4).expm();
        assert_eq!(e, CMatrix::identity(4));
    }

    #[test]
    fn expm_matches_scalar_for_diagonal() {
        let mut a = CMatrix::zeros(3);
        a[(0, 0)] = Complex64::new(0.3, 1.1);
        a[(1, 1)] = Complex64::new(-2.0, 0.0);
        a[(2, 2)] = Complex64::new(0.0, -3.5);
        let e = a.expm();
        for i in 0..3 {
            let expect = a[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn displacement_via_expm_is_unitary() {
        let dim = 32;
        let beta = Complex64::new(0.7, -0.4);
        let a = CMatrix::annihilation(dim);
        let k = a.adjoint().scale(beta).add(&a.scale(-beta.conj()));
        let d = k.expm();
        let du = d.adjoint().mul(&d);
        for i in 0..dim - 4 {
            for j in 0..dim - 4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (du[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-10,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn jacobi_eigen_reconstructs_matrix() {
        // pseudo-random Hermitian matrix from a fixed recurrence
        let d = 24;
        let mut seed = 0x243f6a88u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = CMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let v = Complex64::new(next(), if i == j { 0.0 } else { next() });
                a[(i, j)] = v;
                a[(j, i)] = v.conj();
            }
        }
        let (eigs, v) = hermitian_eigen(&a);
        // A v_k = λ_k v_k
        for k in 0..d {
            let col: Vec<Complex64> = (0..d).map(|i| v[(i, k)]).collect();
            let av = a.apply(&col);
            for i in 0..d {
                assert!(
                    (av[i] - eigs[k] * col[i]).norm() < 1e-10,
                    "eigenpair {k} row {i}"
                );
            }
        }
        // orthonormal columns
        let vv = v.adjoint().mul(&v);
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(vv[(i, j)].norm(), expect, epsilon = 1e-11);
            }
        }
    }
}
