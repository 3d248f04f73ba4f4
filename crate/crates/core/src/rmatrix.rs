//! The dynamical R-matrices `R⁻`, `R⁺ = (R⁻)^{-1}` and the gauge-equivalent `R̄`, the
//! classical r-matrix, the twist `t_λ` and the `φ`-gauge taking `R⁺` to `R̄`.
//!
//! Operators act on `C² ⊗ C²` in the basis `(v₁v₁, v₁v₋₁, v₋₁v₁, v₋₁v₋₁)`;
//! `E_{ij} ⊗ E_{kl}` sits at row `(i,k)`, column `(j,l)`. Every entry of the
//! three quantum families is a signed monomial in theta values at integer
//! combinations of `z`, `λ`, `γ`, so one description yields numeric values,
//! γ-jets and λ-Taylor coefficients.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModularParams;
use crate::series::solvers::{self, with_capacity};
use crate::series::{powser, Jet, Param};
use crate::tensor::{site_weight, OperatorJet, TensorOperator};
use crate::theta::{Theta, POLE_GUARD};

pub use crate::series::solvers::phi_ratio;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `a z + b λ + c γ` with small integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaArg {
    pub z: i32,
    pub lambda: i32,
    pub gamma: i32,
}

impl ThetaArg {
    pub fn value(&self, z: C64, lambda: C64, gamma: C64) -> C64 {
        z * self.z as f64 + lambda * self.lambda as f64 + gamma * self.gamma as f64
    }
}

impl fmt::Display for ThetaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (c, name) in [(self.z, "z"), (self.lambda, "λ"), (self.gamma, "γ")] {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            out.push_str(&format!("{sign}{mag}{name}"));
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "θ({out})")
    }
}

#[derive(Debug, Clone, Copy)]
struct Factor {
    arg: ThetaArg,
    power: i32,
}

const fn th(z: i32, lambda: i32, gamma: i32, power: i32) -> Factor {
    Factor {
        arg: ThetaArg { z, lambda, gamma },
        power,
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    row: usize,
    col: usize,
    sign: f64,
    factors: &'static [Factor],
}

const fn entry(row: usize, col: usize, sign: f64, factors: &'static [Factor]) -> Entry {
    Entry { row, col, sign, factors }
}

const UNIT: [Entry; 2] = [entry(0, 0, 1.0, &[]), entry(3, 3, 1.0, &[])];

const R_MINUS: [Entry; 4] = [
    entry(1, 1, 1.0, &[th(1, 0, 0, 1), th(1, 0, 1, -1)]),
    entry(
        2,
        2,
        1.0,
        &[th(0, 1, -1, 1), th(0, 1, 1, 1), th(1, 0, 0, 1), th(0, 1, 0, -2), th(1, 0, 1, -1)],
    ),
    entry(1, 2, 1.0, &[th(1, 1, 0, 1), th(0, 0, 1, 1), th(1, 0, 1, -1), th(0, 1, 0, -1)]),
    entry(2, 1, -1.0, &[th(1, -1, 0, 1), th(0, 0, 1, 1), th(1, 0, 1, -1), th(0, 1, 0, -1)]),
];

const R_PLUS: [Entry; 4] = [
    entry(
        1,
        1,
        1.0,
        &[th(1, 0, 0, 1), th(1, 0, -1, -1), th(0, 1, -1, 1), th(0, 1, 1, 1), th(0, 1, 0, -2)],
    ),
    entry(2, 2, 1.0, &[th(1, 0, 0, 1), th(1, 0, -1, -1)]),
    entry(1, 2, -1.0, &[th(1, 1, 0, 1), th(0, 0, 1, 1), th(1, 0, -1, -1), th(0, 1, 0, -1)]),
    entry(2, 1, 1.0, &[th(1, -1, 0, 1), th(0, 0, 1, 1), th(1, 0, -1, -1), th(0, 1, 0, -1)]),
];

const R_BAR: [Entry; 4] = [
    entry(1, 1, 1.0, &[th(0, 1, 1, 1), th(1, 0, 0, 1), th(0, 1, 0, -1), th(1, 0, -1, -1)]),
    entry(2, 2, 1.0, &[th(0, 1, -1, 1), th(1, 0, 0, 1), th(0, 1, 0, -1), th(1, 0, -1, -1)]),
    entry(1, 2, -1.0, &[th(1, 1, 0, 1), th(0, 0, 1, 1), th(0, 1, 0, -1), th(1, 0, -1, -1)]),
    entry(2, 1, -1.0, &[th(1, -1, 0, 1), th(0, 0, 1, 1), th(0, -1, 0, -1), th(1, 0, -1, -1)]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RKind {
    Rminus,
    Rplus,
    Rbar,
    /// The classical r-matrix; it has no γ-dependence.
    ClassicalShadow,
}

impl RKind {
    pub fn label(&self) -> &'static str {
        match self {
            RKind::Rminus => "rminus",
            RKind::Rplus => "rplus",
            RKind::Rbar => "rbar",
            RKind::ClassicalShadow => "classical",
        }
    }

    fn entries(&self) -> Option<&'static [Entry; 4]> {
        match self {
            RKind::Rminus => Some(&R_MINUS),
            RKind::Rplus => Some(&R_PLUS),
            RKind::Rbar => Some(&R_BAR),
            RKind::ClassicalShadow => None,
        }
    }
}

impl fmt::Display for RKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One R-matrix family bound to a theta evaluator (and so to `τ`, `γ`).
#[derive(Debug, Clone)]
pub struct RFamily {
    kind: RKind,
    theta: Theta,
}

impl RFamily {
    pub fn new(kind: RKind, params: &ModularParams) -> Self {
        RFamily {
            kind,
            theta: Theta::new(params),
        }
    }

    pub fn from_theta(kind: RKind, theta: Theta) -> Self {
        RFamily { kind, theta }
    }

    pub fn kind(&self) -> RKind {
        self.kind
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn params(&self) -> &ModularParams {
        self.theta.params()
    }

    pub fn gamma(&self) -> C64 {
        self.theta.params().gamma()
    }

    pub fn with_gamma(&self, gamma: C64) -> Self {
        RFamily {
            kind: self.kind,
            theta: self.theta.with_gamma(gamma),
        }
    }

    pub fn with_kind(&self, kind: RKind) -> Self {
        RFamily {
            kind,
            theta: self.theta.clone(),
        }
    }

    /// `R(z, λ)` at the bound `γ`.
    pub fn eval(&self, z: C64, lambda: C64) -> Result<TensorOperator> {
        let Some(entries) = self.kind.entries() else {
            return classical_r_with(&self.theta, z, lambda);
        };
        let g = self.gamma();
        let mut op = TensorOperator::zeros(2);
        for e in UNIT.iter().chain(entries.iter()) {
            let mut v = C64::new(e.sign, 0.0);
            for f in e.factors {
                let arg = f.arg.value(z, lambda, g);
                if f.power < 0 {
                    self.theta.guard(arg, POLE_GUARD, &f.arg.to_string())?;
                }
                v *= self.theta.eval(arg).powi(f.power);
            }
            op.set(e.row, e.col, v);
        }
        Ok(op)
    }

    /// Smallest lattice distance over the denominator factors at `(z, λ)`.
    pub fn denominator_distance(&self, z: C64, lambda: C64) -> f64 {
        let g = self.gamma();
        match self.kind.entries() {
            Some(entries) => entries
                .iter()
                .flat_map(|e| e.factors.iter())
                .filter(|f| f.power < 0)
                .map(|f| self.theta.lattice_distance(f.arg.value(z, lambda, g)))
                .fold(f64::INFINITY, f64::min),
            None => self
                .theta
                .lattice_distance(z)
                .min(self.theta.lattice_distance(lambda)),
        }
    }

    /// Jets of every entry of `R(z + dz·t, λ + dλ·t, γ + dγ·t)` in `t`.
    fn direction_jets(&self, z: C64, lambda: C64, gamma: C64, dir: (C64, C64, C64), order: usize) -> Result<Vec<Jet>> {
        let entries = self.kind.entries().ok_or_else(|| {
            Error::Domain("the classical r-matrix has no γ-expansion".into())
        })?;
        let th = with_capacity(&self.theta, order)?;
        let mut out = vec![Jet::zero(Param::Gamma, order); 16];
        for e in UNIT.iter().chain(entries.iter()) {
            let mut acc = Jet::constant(Param::Gamma, C64::new(e.sign, 0.0), order);
            for f in e.factors {
                let base = f.arg.value(z, lambda, gamma);
                let slope = f.arg.value(dir.0, dir.1, dir.2);
                if f.power < 0 {
                    th.guard(base, POLE_GUARD, &f.arg.to_string())?;
                }
                let t = th.taylor_coeffs(base, order)?;
                let j = Jet::new(Param::Gamma, powser::rescale(&t, slope));
                acc = &acc * &j.powi(f.power)?;
            }
            out[e.row * 4 + e.col] = acc;
        }
        Ok(out)
    }

    /// γ-jet of `R(z, λ)` about `γ = 0`.
    pub fn gamma_jet(&self, z: C64, lambda: C64, order: usize) -> Result<OperatorJet> {
        let jets = self.direction_jets(z, lambda, zero(), (zero(), zero(), one()), order)?;
        Ok(OperatorJet::new(2, jets))
    }

    /// `∂_λ^α R(z, λ)/α!` at the bound `γ`, for `α = 0..=order`.
    pub fn lambda_taylor(&self, z: C64, lambda: C64, order: usize) -> Result<Vec<TensorOperator>> {
        let jets = self.direction_jets(z, lambda, self.gamma(), (zero(), one(), zero()), order)?;
        Ok((0..=order)
            .map(|k| TensorOperator::new(2, jets.iter().map(|j| j.coeff(k)).collect()))
            .collect())
    }
}

pub fn r_minus(z: C64, lambda: C64, p: &ModularParams) -> Result<TensorOperator> {
    RFamily::new(RKind::Rminus, p).eval(z, lambda)
}

pub fn r_plus(z: C64, lambda: C64, p: &ModularParams) -> Result<TensorOperator> {
    RFamily::new(RKind::Rplus, p).eval(z, lambda)
}

pub fn r_bar(z: C64, lambda: C64, p: &ModularParams) -> Result<TensorOperator> {
    RFamily::new(RKind::Rbar, p).eval(z, lambda)
}

/// `diag(e^{-iπλ}, e^{iπλ})`.
pub fn t_matrix(lambda: C64) -> TensorOperator {
    let a = (-C64::i() * std::f64::consts::PI * lambda).exp();
    TensorOperator::diagonal(1, &[a, a.inv()])
}

pub fn classical_r(z: C64, lambda: C64, p: &ModularParams) -> Result<TensorOperator> {
    classical_r_with(&Theta::new(p), z, lambda)
}

/// `½(θ'/θ)(z) h⊗h + θ(z+λ)/(θ(z)θ(λ)) e⊗f + θ(z-λ)/(θ(z)θ(-λ)) f⊗e`.
pub fn classical_r_with(theta: &Theta, z: C64, lambda: C64) -> Result<TensorOperator> {
    theta.guard(z, POLE_GUARD, "θ(z)")?;
    theta.guard(lambda, POLE_GUARD, "θ(λ)")?;
    let tz = theta.eval(z);
    let cartan = theta.log_deriv(z)? * 0.5;
    let ef = theta.eval(z + lambda) / (tz * theta.eval(lambda));
    let fe = theta.eval(z - lambda) / (tz * theta.eval(-lambda));
    let mut op = TensorOperator::diagonal(2, &[cartan, -cartan, -cartan, cartan]);
    op.set(1, 2, ef);
    op.set(2, 1, fe);
    Ok(op)
}

/// γ-jet of `φ(λ - γh⁽²⁾) R⁺(z, λ) φ(λ - γh⁽¹⁾)^{-1}`: each entry of `R⁺`
/// times `φ(λ - γk)/φ(λ - γj)`, `k` the site-2 weight of its row and `j` the
/// site-1 weight of its column.
pub fn gauge_conjugate(theta: &Theta, z: C64, lambda: C64, order: usize) -> Result<OperatorJet> {
    let rp = RFamily::from_theta(RKind::Rplus, theta.clone()).gamma_jet(z, lambda, order)?;
    let mut entries = Vec::with_capacity(16);
    for r in 0..4 {
        for c in 0..4 {
            let k = site_weight(r, 2, 2) as f64;
            let j = site_weight(c, 1, 2) as f64;
            let ratio = solvers::phi_ratio(theta, C64::new(k, 0.0), C64::new(j, 0.0), lambda, order)?;
            entries.push(rp.get(r, c) * &ratio);
        }
    }
    Ok(OperatorJet::new(2, entries))
}

/// Per-order residuals between the gauge-conjugated `R⁺` and the γ-jet of `R̄`.
pub fn gauge_residuals(theta: &Theta, z: C64, lambda: C64, order: usize) -> Result<Vec<f64>> {
    let lhs = gauge_conjugate(theta, z, lambda, order)?;
    let rhs = RFamily::from_theta(RKind::Rbar, theta.clone()).gamma_jet(z, lambda, order)?;
    Ok(lhs.diff_by_order(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params(g: f64) -> ModularParams {
        ModularParams::new(c(0.0, 0.75), c(g, 0.0)).unwrap()
    }

    #[test]
    fn arg_names() {
        assert_eq!(th(1, 0, 1, -1).arg.to_string(), "θ(z+γ)");
        assert_eq!(th(0, -1, 0, -1).arg.to_string(), "θ(-λ)");
        assert_eq!(th(0, 1, -2, 1).arg.to_string(), "θ(λ-2γ)");
    }

    /// Direct transcription of the six-vertex-type layout for `R⁻`.
    fn r_minus_oracle(z: C64, l: C64, p: &ModularParams) -> [[C64; 4]; 4] {
        let t = Theta::new(p);
        let g = p.gamma();
        let o = c(0.0, 0.0);
        let e = c(1.0, 0.0);
        let a = t.eval(z) / t.eval(z + g);
        let b = t.eval(l - g) * t.eval(l + g) * t.eval(z) / (t.eval(l).powi(2) * t.eval(z + g));
        let x = t.eval(z + l) * t.eval(g) / (t.eval(z + g) * t.eval(l));
        let y = -t.eval(z - l) * t.eval(g) / (t.eval(z + g) * t.eval(l));
        [[e, o, o, o], [o, a, x, o], [o, y, b, o], [o, o, o, e]]
    }

    #[test]
    fn r_minus_matches_transcription() {
        let p = ModularParams::new(c(0.0, 0.75), c(0.02, 0.0)).unwrap();
        let (z, l) = (c(0.31, 0.0), c(0.17, 0.05));
        let r = r_minus(z, l, &p).unwrap();
        let o = r_minus_oracle(z, l, &p);
        for i in 0..4 {
            for j in 0..4 {
                assert!((r.get(i, j) - o[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gamma_zero_is_identity() {
        let p = params(0.0);
        let id = TensorOperator::identity(2);
        for kind in [RKind::Rminus, RKind::Rplus, RKind::Rbar] {
            let r = RFamily::new(kind, &p).eval(c(0.3, 0.1), c(0.2, -0.1)).unwrap();
            assert!(r.max_abs_diff(&id) < 1e-15, "{kind}");
        }
    }

    #[test]
    fn plus_inverts_minus() {
        let p = params(0.07);
        let (z, l) = (c(0.3, 0.1), c(0.2, -0.1));
        let rm = r_minus(z, l, &p).unwrap();
        let rp = r_plus(z, l, &p).unwrap();
        assert!((&rp * &rm).max_abs_diff(&TensorOperator::identity(2)) < 1e-13);
        assert!(rm.inverse().unwrap().max_abs_diff(&rp) < 1e-13);
    }

    #[test]
    fn weight_conserved() {
        let p = params(0.07);
        for kind in [RKind::Rminus, RKind::Rplus, RKind::Rbar, RKind::ClassicalShadow] {
            let r = RFamily::new(kind, &p).eval(c(0.3, 0.1), c(0.2, -0.1)).unwrap();
            assert_eq!(r.weight_leakage(), 0.0);
        }
    }

    #[test]
    fn singular_names_factor() {
        let p = params(0.05);
        let err = r_minus(c(-0.05, 0.0), c(0.2, 0.0), &p).unwrap_err();
        match err {
            Error::Singular { factor, .. } => assert_eq!(factor, "θ(z+γ)"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn t_matrix_basics() {
        let id = TensorOperator::identity(1);
        assert!(t_matrix(c(0.0, 0.0)).max_abs_diff(&id) < 1e-16);
        let l = c(0.3, 0.2);
        assert!((&t_matrix(l) * &t_matrix(-l)).max_abs_diff(&id) < 1e-15);
        let t = t_matrix(l);
        assert!((t.get(0, 0) * t.get(1, 1) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn classical_entries_and_antisymmetry() {
        let p = params(0.05);
        let t = Theta::new(&p);
        let (z, l) = (c(0.3, 0.0), c(0.2, 0.1));
        let r = classical_r(z, l, &p).unwrap();
        assert!((r.get(0, 0) - t.log_deriv(z).unwrap() * 0.5).norm() < 1e-14);
        assert!((r.get(1, 2) - t.eval(z + l) / (t.eval(z) * t.eval(l))).norm() < 1e-14);
        let flipped = classical_r(-z, l, &p).unwrap().swap_factors();
        assert!((&flipped + &r).max_abs() < 1e-12);
    }

    #[test]
    fn gamma_jet_matches_numeric() {
        let p = params(0.0);
        let fam = RFamily::new(RKind::Rbar, &p);
        let (z, l) = (c(0.3, 0.1), c(0.2, -0.1));
        let jet = fam.gamma_jet(z, l, 10).unwrap();
        let g = c(0.01, 0.005);
        let direct = fam.with_gamma(g).eval(z, l).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                assert!((jet.get(r, col).eval(g) - direct.get(r, col)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_taylor_matches_numeric() {
        let fam = RFamily::new(RKind::Rminus, &params(0.05));
        let (z, l) = (c(0.3, 0.1), c(0.2, -0.1));
        let tay = fam.lambda_taylor(z, l, 12).unwrap();
        let d = c(0.02, 0.01);
        let direct = fam.eval(z, l + d).unwrap();
        let mut sum = TensorOperator::zeros(2);
        for (k, m) in tay.iter().enumerate() {
            sum = &sum + &m.scale(d.powi(k as i32));
        }
        assert!(sum.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn gauge_takes_plus_to_bar() {
        let t = Theta::new(&params(0.0));
        let r = gauge_residuals(&t, c(0.3, 0.1), c(0.2, -0.1), 6).unwrap();
        assert!(r.iter().all(|x| *x < 1e-8), "{r:?}");
        // order 0 is identity on both sides
        let g = gauge_conjugate(&t, c(0.3, 0.1), c(0.2, -0.1), 6).unwrap();
        assert!(g.coefficient(0).max_abs_diff(&TensorOperator::identity(2)) < 1e-14);
    }
}
