//! Operators on `(C²)^{⊗n}` in the weight basis.
//!
//! Basis vectors are tensor products of `v₁, v₋₁`, ordered lexicographically
//! with `v₁` first, so site 1 is the most significant binary digit and a 0
//! digit means weight `+1`. Sites are numbered from 1.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::series::Jet;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Weight (`±1`) of `site` in basis vector `index` of an `n`-site space.
pub fn site_weight(index: usize, site: usize, sites: usize) -> i32 {
    if (index >> (sites - site)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Sum of all site weights of a basis vector.
pub fn total_weight(index: usize, sites: usize) -> i32 {
    (1..=sites).map(|k| site_weight(index, k, sites)).sum()
}

pub(crate) fn check_site(site: usize, sites: usize) -> Result<()> {
    if site == 0 || site > sites {
        Err(Error::BadSite { site, sites })
    } else {
        Ok(())
    }
}

#[derive(Clone, PartialEq)]
pub struct TensorOperator {
    sites: usize,
    data: Vec<C64>,
}

impl TensorOperator {
    /// Row-major entries of a `2^sites` square matrix.
    pub fn new(sites: usize, data: Vec<C64>) -> Self {
        let dim = 1usize << sites;
        assert_eq!(data.len(), dim * dim, "expected a {dim}x{dim} matrix");
        TensorOperator { sites, data }
    }

    pub fn zeros(sites: usize) -> Self {
        let dim = 1usize << sites;
        TensorOperator::new(sites, vec![zero(); dim * dim])
    }

    pub fn identity(sites: usize) -> Self {
        let mut op = TensorOperator::zeros(sites);
        for i in 0..op.dim() {
            op.set(i, i, C64::new(1.0, 0.0));
        }
        op
    }

    pub fn from_fn(sites: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let dim = 1usize << sites;
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        TensorOperator::new(sites, data)
    }

    pub fn diagonal(sites: usize, diag: &[C64]) -> Self {
        TensorOperator::from_fn(sites, |r, c| if r == c { diag[r] } else { zero() })
    }

    /// Matrix unit `E_{ij}` on one site, `i, j ∈ {1, -1}`.
    pub fn unit(i: i32, j: i32) -> Self {
        let idx = |w: i32| if w == 1 { 0 } else { 1 };
        TensorOperator::from_fn(1, |r, c| {
            if r == idx(i) && c == idx(j) {
                C64::new(1.0, 0.0)
            } else {
                zero()
            }
        })
    }

    /// `e = E_{1,-1}`.
    pub fn e() -> Self {
        TensorOperator::unit(1, -1)
    }

    /// `f = E_{-1,1}`.
    pub fn f() -> Self {
        TensorOperator::unit(-1, 1)
    }

    /// `h = E_{11} - E_{-1,-1}`.
    pub fn h() -> Self {
        &TensorOperator::unit(1, 1) - &TensorOperator::unit(-1, -1)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        let d = self.dim();
        self.data[r * d + c] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn scale(&self, s: C64) -> Self {
        TensorOperator::new(self.sites, self.data.iter().map(|x| x * s).collect())
    }

    /// `self ⊗ other`, with `self` on the leading sites.
    pub fn kron(&self, other: &TensorOperator) -> Self {
        let db = other.dim();
        TensorOperator::from_fn(self.sites + other.sites, |r, c| {
            self.get(r / db, c / db) * other.get(r % db, c % db)
        })
    }

    /// Places a two-site operator on sites `(i, j)` of an `n`-site space,
    /// its first factor on `i`.
    pub fn embed2(&self, i: usize, j: usize, n: usize) -> Result<Self> {
        assert_eq!(self.sites, 2, "embed2 takes a two-site operator");
        check_site(i, n)?;
        check_site(j, n)?;
        if i == j {
            return Err(Error::BadSite { site: j, sites: n });
        }
        let bit = |idx: usize, k: usize| (idx >> (n - k)) & 1;
        let mask = (1usize << (n - i)) | (1usize << (n - j));
        Ok(TensorOperator::from_fn(n, |r, c| {
            if (r & !mask) != (c & !mask) {
                return zero();
            }
            let lr = 2 * bit(r, i) + bit(r, j);
            let lc = 2 * bit(c, i) + bit(c, j);
            self.get(lr, lc)
        }))
    }

    /// Places a one-site operator on `site` of an `n`-site space.
    pub fn embed1(&self, site: usize, n: usize) -> Result<Self> {
        assert_eq!(self.sites, 1, "embed1 takes a one-site operator");
        check_site(site, n)?;
        let shift = n - site;
        let mask = 1usize << shift;
        Ok(TensorOperator::from_fn(n, |r, c| {
            if (r & !mask) != (c & !mask) {
                zero()
            } else {
                self.get((r >> shift) & 1, (c >> shift) & 1)
            }
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &TensorOperator) -> f64 {
        (self - other).max_abs()
    }

    /// Largest entry connecting basis vectors of different total weight.
    pub fn weight_leakage(&self) -> f64 {
        let n = self.sites;
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                if total_weight(r, n) != total_weight(c, n) {
                    worst = worst.max(self.get(r, c).norm());
                }
            }
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `self - (tr/dim)·Id`, the part orthogonal to the identity.
    pub fn traceless_part(&self) -> Self {
        let s = self.trace() / self.dim() as f64;
        self - &TensorOperator::identity(self.sites).scale(s)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(TensorOperator::new(
            self.sites,
            linalg::inverse(&self.data, self.dim())?,
        ))
    }

    /// Swaps the two factors of a two-site operator, `X ↦ P X P`.
    pub fn swap_factors(&self) -> Self {
        assert_eq!(self.sites, 2, "swap_factors takes a two-site operator");
        let p = |i: usize| ((i & 1) << 1) | (i >> 1);
        TensorOperator::from_fn(2, |r, c| self.get(p(r), p(c)))
    }
}

impl Add for &TensorOperator {
    type Output = TensorOperator;
    fn add(self, rhs: &TensorOperator) -> TensorOperator {
        assert_eq!(self.sites, rhs.sites);
        TensorOperator::new(self.sites, self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &TensorOperator {
    type Output = TensorOperator;
    fn sub(self, rhs: &TensorOperator) -> TensorOperator {
        assert_eq!(self.sites, rhs.sites);
        TensorOperator::new(self.sites, self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect())
    }
}

impl Mul for &TensorOperator {
    type Output = TensorOperator;
    fn mul(self, rhs: &TensorOperator) -> TensorOperator {
        assert_eq!(self.sites, rhs.sites);
        let d = self.dim();
        let mut out = vec![zero(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == zero() {
                    continue;
                }
                for c in 0..d {
                    out[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        TensorOperator::new(self.sites, out)
    }
}

impl fmt::Debug for TensorOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TensorOperator({} sites)", self.sites)?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let v = self.get(r, c);
                    format!("{:+.6e}{:+.6e}i", v.re, v.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Operator whose entries are jets in a formal parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorJet {
    sites: usize,
    entries: Vec<Jet>,
}

impl OperatorJet {
    pub fn new(sites: usize, entries: Vec<Jet>) -> Self {
        let dim = 1usize << sites;
        assert_eq!(entries.len(), dim * dim);
        OperatorJet { sites, entries }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn get(&self, r: usize, c: usize) -> &Jet {
        &self.entries[r * self.dim() + c]
    }

    pub fn order(&self) -> usize {
        self.entries.iter().map(|j| j.order()).min().unwrap_or(0)
    }

    /// The matrix of order-`k` coefficients.
    pub fn coefficient(&self, k: usize) -> TensorOperator {
        TensorOperator::new(self.sites, self.entries.iter().map(|j| j.coeff(k)).collect())
    }

    /// Per-order maximum entry difference.
    pub fn diff_by_order(&self, other: &OperatorJet) -> Vec<f64> {
        let order = self.order().min(other.order());
        (0..=order)
            .map(|k| self.coefficient(k).max_abs_diff(&other.coefficient(k)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn weights_follow_basis_order() {
        // (v1v1, v1v-1, v-1v1, v-1v-1)
        let w: Vec<(i32, i32)> = (0..4).map(|i| (site_weight(i, 1, 2), site_weight(i, 2, 2))).collect();
        assert_eq!(w, vec![(1, 1), (1, -1), (-1, 1), (-1, -1)]);
        assert_eq!(total_weight(5, 3), -1);
    }

    #[test]
    fn matrix_units_and_kron() {
        let ef = TensorOperator::e().kron(&TensorOperator::f());
        // E_{1,-1} ⊗ E_{-1,1}: row idx(1,-1) = 1, col idx(-1,1) = 2
        assert_eq!(ef.get(1, 2), c(1.0));
        assert_eq!(ef.max_abs(), 1.0);
        let h = TensorOperator::h();
        assert_eq!(h.get(0, 0), c(1.0));
        assert_eq!(h.get(1, 1), c(-1.0));
    }

    #[test]
    fn embed_matches_kron() {
        let a = TensorOperator::from_fn(2, |r, col| C64::new(r as f64 + 1.0, col as f64 - 0.5));
        let id = TensorOperator::identity(1);
        assert_eq!(a.embed2(1, 2, 3).unwrap(), a.kron(&id));
        assert_eq!(a.embed2(2, 3, 3).unwrap(), id.kron(&a));
        // order of factors matters
        assert_eq!(a.embed2(2, 1, 2).unwrap(), a.swap_factors());
        let x = TensorOperator::e();
        assert_eq!(x.embed1(2, 3).unwrap(), id.kron(&x).kron(&id));
        assert!(a.embed2(1, 4, 3).is_err());
        assert!(a.embed2(2, 2, 3).is_err());
    }

    #[test]
    fn inverse_and_traceless() {
        let a = TensorOperator::diagonal(1, &[c(2.0), c(4.0)]);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).max_abs_diff(&TensorOperator::identity(1)) < 1e-15);
        let t = a.traceless_part();
        assert_eq!(t.trace(), c(0.0));
        assert_eq!(t.get(0, 0), c(-1.0));
    }

    #[test]
    fn leakage_detects_weight_violation() {
        let mut a = TensorOperator::identity(2);
        assert_eq!(a.weight_leakage(), 0.0);
        a.set(1, 2, c(3.0));
        assert_eq!(a.weight_leakage(), 0.0);
        a.set(0, 1, c(0.5));
        assert_eq!(a.weight_leakage(), 0.5);
    }
}
