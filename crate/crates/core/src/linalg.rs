//! Dense complex LU with partial pivoting, used for the dual-basis solve,
//! R-matrix inversion and condition-number reporting.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// `P A = L U` of a square row-major matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &[C64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix is not {n}x{n}");
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return Err(Error::Domain(format!("singular matrix (zero pivot in column {k})")));
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / piv;
                lu[r * n + k] = f;
                for c in k + 1..n {
                    let u = lu[k * n + c];
                    lu[r * n + c] -= f * u;
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let v = x[c];
                x[r] -= self.lu[r * n + c] * v;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let v = x[c];
                x[r] -= self.lu[r * n + c] * v;
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }

    pub fn inverse(&self) -> Vec<C64> {
        let n = self.n;
        let mut inv = vec![C64::new(0.0, 0.0); n * n];
        let mut e = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            e[c] = C64::new(1.0, 0.0);
            let col = self.solve(&e);
            for r in 0..n {
                inv[r * n + c] = col[r];
            }
        }
        inv
    }
}

pub fn inverse(a: &[C64], n: usize) -> Result<Vec<C64>> {
    Ok(Lu::new(a, n)?.inverse())
}

/// Maximum absolute column sum.
pub fn norm1(a: &[C64], n: usize) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| a[r * n + c].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁`; infinite for exactly singular input.
pub fn condition_number(a: &[C64], n: usize) -> f64 {
    match inverse(a, n) {
        Ok(inv) => norm1(a, n) * norm1(&inv, n),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn solves_and_inverts() {
        let a = vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0), c(3.0, 0.5), c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 1.0), c(0.5, 0.0), c(2.0, 2.0)];
        let inv = inverse(&a, 3).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                let s: C64 = (0..3).map(|k| a[r * 3 + k] * inv[k * 3 + col]).sum();
                let expect = if r == col { 1.0 } else { 0.0 };
                assert!((s - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        assert!(Lu::new(&a, 2).is_err());
        assert!(condition_number(&a, 2).is_infinite());
    }

    #[test]
    fn condition_of_diagonal() {
        let a = vec![c(1e-3, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(10.0, 0.0)];
        assert!((condition_number(&a, 2) - 1e4).abs() < 1e-8);
    }
}
