//! Dense LU with the extras the solver needs: adjoint solves, a 1-norm
//! condition estimate and inverse iteration for the smallest singular value.

use nalgebra::{DMatrix, DVector, PermutationSequence, Dyn};
use num_complex::Complex64;

/// LU factors of a square complex matrix with partial pivoting.
pub struct Factorization {
    p: PermutationSequence<Dyn>,
    l: DMatrix<Complex64>,
    u: DMatrix<Complex64>,
    norm1: f64,
}

pub(crate) fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn vec_norm1(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

impl Factorization {
    pub fn new(matrix: &DMatrix<Complex64>) -> Self {
        let norm1 = norm1(matrix);
        let (p, l, u) = matrix.clone().lu().unpack();
        Self { p, l, u, norm1 }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `true` when a pivot vanished exactly.
    pub fn is_singular(&self) -> bool {
        self.u.diagonal().iter().any(|z| *z == Complex64::new(0.0, 0.0) || !z.is_finite())
    }

    pub fn solve(&self, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
        let mut x = b.clone();
        self.p.permute_rows(&mut x);
        if !self.l.solve_lower_triangular_with_diag_mut(&mut x, Complex64::new(1.0, 0.0)) {
            return None;
        }
        self.u.solve_upper_triangular_mut(&mut x).then_some(x)
    }

    /// Sign of the determinant of a real matrix factored in complex
    /// arithmetic (imaginary parts stay exactly zero).
    pub fn det_sign_real(&self) -> f64 {
        let perm: f64 = self.p.determinant();
        self.u.diagonal().iter().fold(perm, |acc, z| acc * z.re.signum())
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
        // PA = LU, so Aᴴ = Uᴴ Lᴴ P and x = Pᵀ L⁻ᴴ U⁻ᴴ b.
        let z = self.u.ad_solve_upper_triangular(b)?;
        let mut w = self.l.ad_solve_lower_triangular(&z)?;
        self.p.inv_permute_rows(&mut w);
        Some(w)
    }

    /// Hager–Higham estimate of `‖A‖₁ ‖A⁻¹‖₁`. Infinite when singular.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 1.0;
        }
        if self.is_singular() {
            return f64::INFINITY;
        }
        let mut x = DVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
        let mut est = 0.0;
        for iter in 0..5 {
            let Some(y) = self.solve(&x) else { return f64::INFINITY };
            let ny = vec_norm1(&y);
            if !ny.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && ny <= est {
                break;
            }
            est = ny;
            let xi = y.map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) });
            let Some(z) = self.solve_adjoint(&xi) else { return f64::INFINITY };
            let (j, zmax) = z.iter().enumerate().map(|(j, v)| (j, v.norm())).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            let zx = z.dotc(&x).re;
            if iter > 0 && zmax <= zx {
                break;
            }
            x.fill(Complex64::new(0.0, 0.0));
            x[j] = Complex64::new(1.0, 0.0);
        }
        // alternating test vector guards against the classic failure cases
        let alt = DVector::from_fn(n, |i, _| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        });
        if let Some(y) = self.solve(&alt) {
            est = est.max(2.0 * vec_norm1(&y) / (3.0 * n as f64));
        }
        est * self.norm1
    }

    /// Smallest singular value by inverse iteration on `AᴴA`, with the
    /// corresponding right singular vector.
    pub fn smallest_singular(&self, tol: f64, max_iter: usize) -> (f64, DVector<Complex64>) {
        let n = self.dim();
        if self.is_singular() {
            let v = DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
            return (0.0, v);
        }
        let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.0));
        v /= Complex64::new(v.norm(), 0.0);
        let mut sigma = f64::INFINITY;
        for _ in 0..max_iter {
            let Some(w) = self.solve_adjoint(&v).and_then(|y| self.solve(&y)) else { return (0.0, v) };
            let nw = w.norm();
            if !(nw.is_finite() && nw > 0.0) {
                return (0.0, v);
            }
            let next = 1.0 / nw.sqrt();
            v = w / Complex64::new(nw, 0.0);
            let done = (sigma - next).abs() <= tol * next;
            sigma = next;
            if done {
                break;
            }
        }
        (sigma, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 4.0 } else { 0.0 };
            Complex64::new(d + ((i * 3 + j * 5) % 7) as f64 * 0.1, ((i + 2 * j) % 5) as f64 * 0.07)
        })
    }

    #[test]
    fn adjoint_solve_matches_explicit_adjoint() {
        let a = sample(9);
        let f = Factorization::new(&a);
        let b = DVector::from_fn(9, |i, _| Complex64::new(i as f64, 1.0));
        let x = f.solve_adjoint(&b).unwrap();
        assert!((a.adjoint() * x - b).norm() < 1e-12);
    }

    #[test]
    fn condition_estimate_close_to_exact() {
        let a = sample(12);
        let f = Factorization::new(&a);
        let inv = a.clone().try_inverse().unwrap();
        let exact = norm1(&a) * norm1(&inv);
        let est = f.condition_estimate();
        assert!(est <= exact * (1.0 + 1e-12) && est >= 0.3 * exact, "{est} vs {exact}");
        let id = DMatrix::<Complex64>::identity(5, 5);
        assert!((Factorization::new(&id).condition_estimate() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn determinant_sign() {
        let mut a = DMatrix::<Complex64>::identity(4, 4);
        assert_eq!(Factorization::new(&a).det_sign_real(), 1.0);
        a[(2, 2)] = Complex64::new(-3.0, 0.0);
        assert_eq!(Factorization::new(&a).det_sign_real(), -1.0);
        a.swap_rows(0, 1);
        assert_eq!(Factorization::new(&a).det_sign_real(), 1.0);
    }

    #[test]
    fn smallest_singular_matches_svd() {
        let a = sample(10);
        let f = Factorization::new(&a);
        let (s, v) = f.smallest_singular(1e-13, 500);
        let svd = a.clone().svd(false, false);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((s - smin).abs() < 1e-9 * smin);
        assert!(((&a * v).norm() - smin).abs() < 1e-8);
    }
}
