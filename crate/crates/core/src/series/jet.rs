use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::powser;
use crate::error::{Error, Result};

/// Which formal parameter a [`Jet`] is expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    Gamma,
    Hbar,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Gamma => write!(f, "γ"),
            Param::Hbar => write!(f, "ℏ"),
        }
    }
}

/// Truncated Taylor series `c_0 + c_1 t + … + c_N t^N` in a formal
/// parameter `t` (`γ` or `ℏ`).
///
/// Binary operations truncate to the shorter operand. Mixing parameters is
/// a logic error and panics.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    param: Param,
    coeffs: Vec<C64>,
}

impl Jet {
    pub fn new(param: Param, coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet carries at least the constant term");
        Jet { param, coeffs }
    }

    pub fn constant(param: Param, c: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Jet { param, coeffs }
    }

    pub fn zero(param: Param, order: usize) -> Self {
        Jet::constant(param, C64::new(0.0, 0.0), order)
    }

    pub fn one(param: Param, order: usize) -> Self {
        Jet::constant(param, C64::new(1.0, 0.0), order)
    }

    /// The parameter itself, `t`.
    pub fn variable(param: Param, order: usize) -> Self {
        let mut j = Jet::zero(param, order);
        if order >= 1 {
            j.coeffs[1] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn param(&self) -> Param {
        self.param
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let n = (order + 1).min(self.coeffs.len());
        Jet::new(self.param, self.coeffs[..n].to_vec())
    }

    pub fn scale(&self, c: C64) -> Jet {
        Jet::new(self.param, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn exp(&self) -> Jet {
        Jet::new(self.param, powser::exp(&self.coeffs, self.coeffs.len()))
    }

    /// Principal-branch logarithm. Requires `c_0 != 0`.
    pub fn log(&self) -> Result<Jet> {
        if self.coeffs[0] == C64::new(0.0, 0.0) {
            return Err(Error::Domain("log of a jet with vanishing constant term".into()));
        }
        Ok(Jet::new(self.param, powser::log(&self.coeffs, self.coeffs.len())))
    }

    pub fn reciprocal(&self) -> Result<Jet> {
        if self.coeffs[0] == C64::new(0.0, 0.0) {
            return Err(Error::Domain("reciprocal of a jet with vanishing constant term".into()));
        }
        Ok(Jet::new(self.param, powser::inv(&self.coeffs, self.coeffs.len())))
    }

    /// Integer power; negative exponents go through [`Jet::reciprocal`].
    pub fn powi(&self, e: i32) -> Result<Jet> {
        let base = if e < 0 { self.reciprocal()? } else { self.clone() };
        let mut acc = Jet::one(self.param, self.order());
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Numerical value at `t`.
    pub fn eval(&self, t: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    /// Per-order absolute differences over the common order.
    pub fn diff_by_order(&self, other: &Jet) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.diff_by_order(other).into_iter().fold(0.0, f64::max)
    }

    fn zip_with(&self, rhs: &Jet, f: impl Fn(C64, C64) -> C64) -> Jet {
        assert_eq!(self.param, rhs.param, "jets in different parameters");
        Jet::new(
            self.param,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| f(*a, *b)).collect(),
        )
    }
}

/// Jet of `f(λ + step·t)` from the derivatives `f^{(α)}(λ)`, `α = 0..=order`.
pub fn shift_jet(param: Param, derivs: &[C64], step: C64, order: usize) -> Result<Jet> {
    if derivs.len() < order + 1 {
        return Err(Error::Capability {
            requested: order,
            max: derivs.len().saturating_sub(1),
        });
    }
    let mut fact = 1.0;
    let mut pw = C64::new(1.0, 0.0);
    let mut coeffs = Vec::with_capacity(order + 1);
    for (a, d) in derivs.iter().take(order + 1).enumerate() {
        if a > 0 {
            fact *= a as f64;
            pw *= step;
        }
        coeffs.push(d * pw / fact);
    }
    Ok(Jet::new(param, coeffs))
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.param, rhs.param, "jets in different parameters");
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet::new(self.param, powser::mul(&self.coeffs, &rhs.coeffs, n))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet<{}>{:?}", self.param, self.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_of_zero_is_one() {
        let j = Jet::zero(Param::Gamma, 6).exp();
        assert_eq!(j, Jet::one(Param::Gamma, 6));
    }

    #[test]
    fn log_needs_constant_term() {
        assert!(Jet::variable(Param::Hbar, 3).log().is_err());
        assert!(Jet::variable(Param::Hbar, 3).reciprocal().is_err());
    }

    #[test]
    fn mul_matches_brute_force_convolution() {
        let a = Jet::new(Param::Gamma, vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.3, 0.3), c(0.0, 1.0), c(4.0, -1.0)]);
        let b = Jet::new(Param::Gamma, vec![c(0.2, 0.0), c(1.0, 1.0), c(-0.5, 0.0), c(2.0, 0.0), c(0.1, 0.7)]);
        // brute force: expand both as full polynomials, then drop t^5 and up
        let mut full = vec![C64::new(0.0, 0.0); 9];
        for i in 0..5 {
            for j in 0..5 {
                full[i + j] += a.coeff(i) * b.coeff(j);
            }
        }
        let p = &a * &b;
        for k in 0..5 {
            assert!((p.coeff(k) - full[k]).norm() < 1e-14);
        }
        assert_eq!(p.order(), 4);
    }

    #[test]
    fn shift_jet_conventions() {
        let d = [c(2.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)];
        let j0 = shift_jet(Param::Gamma, &d, C64::new(0.0, 0.0), 2).unwrap();
        assert_eq!(j0.coeffs(), &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let j = shift_jet(Param::Gamma, &d, c(-1.0, 0.0), 2).unwrap();
        assert_eq!(j.coeff(1), c(-3.0, 0.0));
        assert_eq!(j.coeff(2), c(2.5, 0.0));
        assert!(matches!(
            shift_jet(Param::Gamma, &d, c(1.0, 0.0), 3),
            Err(Error::Capability { .. })
        ));
    }

    #[test]
    fn powi_negative() {
        let a = Jet::new(Param::Hbar, vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let p = &a.powi(-2).unwrap() * &a.powi(2).unwrap();
        assert!(p.max_abs_diff(&Jet::one(Param::Hbar, 2)) < 1e-15);
    }
}
