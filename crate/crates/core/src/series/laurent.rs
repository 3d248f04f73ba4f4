use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use super::powser;
use crate::error::{Error, Result};

/// Truncated Laurent series `Σ_{j} c_j z^{min_degree + j}` whose coefficients
/// are trusted up to and including degree `order_valid`.
///
/// The leading stored coefficient is nonzero unless the series is zero, in
/// which case `coeffs` is empty and `min_degree = order_valid + 1`.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries {
    min_degree: i64,
    coeffs: Vec<C64>,
    order_valid: i64,
}

impl LaurentSeries {
    /// Builds from raw coefficients starting at `min_degree`. Coefficients
    /// past `order_valid` are dropped and missing ones are zero.
    pub fn new(min_degree: i64, coeffs: Vec<C64>, order_valid: i64) -> Self {
        let mut s = LaurentSeries {
            min_degree,
            coeffs,
            order_valid,
        };
        s.normalize();
        s
    }

    /// Taylor data `c_0 + c_1 z + …` valid through `z^{len-1}`.
    pub fn from_taylor(coeffs: Vec<C64>) -> Self {
        let ov = coeffs.len() as i64 - 1;
        LaurentSeries::new(0, coeffs, ov)
    }

    pub fn monomial(degree: i64, c: C64, order_valid: i64) -> Self {
        LaurentSeries::new(degree, vec![c], order_valid)
    }

    pub fn zero(order_valid: i64) -> Self {
        LaurentSeries::new(order_valid + 1, Vec::new(), order_valid)
    }

    fn normalize(&mut self) {
        let keep = (self.order_valid - self.min_degree + 1).max(0) as usize;
        self.coeffs.resize(keep, C64::new(0.0, 0.0));
        let lead = self
            .coeffs
            .iter()
            .position(|c| *c != C64::new(0.0, 0.0))
            .unwrap_or(self.coeffs.len());
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_degree += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.min_degree = self.order_valid + 1;
        }
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    pub fn order_valid(&self) -> i64 {
        self.order_valid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^degree`, `None` beyond the validity window.
    pub fn coeff(&self, degree: i64) -> Option<C64> {
        if degree > self.order_valid {
            None
        } else if degree < self.min_degree {
            Some(C64::new(0.0, 0.0))
        } else {
            Some(self.coeffs[(degree - self.min_degree) as usize])
        }
    }

    /// Order of the pole at 0 (0 for regular series).
    pub fn pole_order(&self) -> usize {
        if self.is_zero() {
            0
        } else {
            (-self.min_degree).max(0) as usize
        }
    }

    pub fn is_regular(&self) -> bool {
        self.is_zero() || self.min_degree >= 0
    }

    /// Part with negative degrees, validity unchanged.
    pub fn pole_part(&self) -> LaurentSeries {
        let n = (-self.min_degree).clamp(0, self.coeffs.len() as i64) as usize;
        LaurentSeries::new(self.min_degree, self.coeffs[..n].to_vec(), self.order_valid)
    }

    pub fn truncate(&self, order_valid: i64) -> LaurentSeries {
        LaurentSeries::new(self.min_degree, self.coeffs.clone(), order_valid.min(self.order_valid))
    }

    pub fn scale(&self, c: C64) -> LaurentSeries {
        LaurentSeries::new(
            self.min_degree,
            self.coeffs.iter().map(|x| x * c).collect(),
            self.order_valid,
        )
    }

    pub fn derive(&self) -> LaurentSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * (self.min_degree + j as i64) as f64)
            .collect();
        LaurentSeries::new(self.min_degree - 1, coeffs, self.order_valid - 1)
    }

    pub fn derive_n(&self, n: usize) -> LaurentSeries {
        (0..n).fold(self.clone(), |s, _| s.derive())
    }

    pub fn invert(&self) -> Result<LaurentSeries> {
        if self.is_zero() {
            return Err(Error::Domain("cannot invert the zero series".into()));
        }
        let m = self.min_degree;
        let rel = self.order_valid - m;
        let n = (rel + 1) as usize;
        let inv = powser::inv(&self.coeffs, n);
        Ok(LaurentSeries::new(-m, inv, -m + rel))
    }

    /// Coefficient of `z^{-1}`; zero if the window ends before it.
    pub fn residue(&self) -> C64 {
        self.coeff(-1).unwrap_or_default()
    }

    pub fn eval(&self, z: C64) -> C64 {
        // Horner on the stored block, then the monomial prefactor.
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.min_degree as i32)
    }

    /// Largest coefficient difference over the common validity window.
    pub fn max_abs_diff(&self, other: &LaurentSeries) -> f64 {
        let lo = self.min_degree.min(other.min_degree);
        let hi = self.order_valid.min(other.order_valid);
        (lo..=hi)
            .map(|d| (self.coeff(d).unwrap() - other.coeff(d).unwrap()).norm())
            .fold(0.0, f64::max)
    }
}

/// Residue pairing `⟨f, g⟩ = res_0(f g dz)`.
pub fn pairing(f: &LaurentSeries, g: &LaurentSeries) -> Result<C64> {
    let prod = f * g;
    if prod.order_valid() < -1 {
        return Err(Error::Precision(format!(
            "product valid only through z^{}, residue needs z^-1",
            prod.order_valid()
        )));
    }
    Ok(prod.residue())
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        let lo = self.min_degree.min(rhs.min_degree);
        let hi = self.order_valid.min(rhs.order_valid);
        let coeffs = (lo..=hi)
            .map(|d| self.coeff(d).unwrap() + rhs.coeff(d).unwrap())
            .collect();
        LaurentSeries::new(lo, coeffs, hi)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self + &(-rhs)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        let ov = (self.order_valid + rhs.min_degree).min(rhs.order_valid + self.min_degree);
        if self.is_zero() || rhs.is_zero() {
            return LaurentSeries::zero(ov);
        }
        let min = self.min_degree + rhs.min_degree;
        let n = (ov - min + 1).max(0) as usize;
        LaurentSeries::new(min, powser::mul(&self.coeffs, &rhs.coeffs, n), ov)
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent[")?;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})z^{}", self.min_degree + j as i64)?;
        }
        write!(f, " + O(z^{})]", self.order_valid + 1)
    }
}
