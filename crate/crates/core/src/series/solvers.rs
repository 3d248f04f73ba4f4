//! Order-by-order solutions of the shift equations
//!
//! ```text
//! φ(λ+γ)/φ(λ-γ) = θ(λ)/θ(λ-γ)
//! f_K(ζ) f_K(ζ-ℏ) = [θ(ζ+ℏ)/θ(ζ)] / [θ(ζ+ℏ+ℏK)/θ(ζ+ℏK)]
//! A(x) A(x+ℏ)     = θ(x)/θ(x+ℏ)
//! ```
//!
//! All three are handled through logarithms. `φ` has the closed form
//! `θ^{1/2}(λ) exp(-(1/(2∂)) tanh(γ∂/2) θ'/θ)(λ)` and is only ever returned
//! divided by `θ^{1/2}(λ)`, or as a ratio of two `φ`s where the half powers
//! combine into integer powers. `log f_K` and `log A` are solved
//! triangularly in `ℏ`; their coefficients are Taylor polynomials in
//! `s = ζ - ζ0` about a base point `ζ0` off the lattice, because `log f_K`
//! has poles at the lattice from order `ℏ²` on.

use std::borrow::Cow;

use num_complex::Complex64 as C64;

use super::{powser, Jet, Param};
use crate::error::{Error, Result};
use crate::theta::{Theta, ThetaConfig, POLE_GUARD};

/// Largest number of theta derivatives the solvers will request.
pub const MAX_SERIES_ORDER: usize = 64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `theta` itself if it supports `need` derivatives, otherwise an evaluator
/// for the same parameters with enough headroom.
pub(crate) fn with_capacity(theta: &Theta, need: usize) -> Result<Cow<'_, Theta>> {
    if need <= theta.config().deriv_max {
        return Ok(Cow::Borrowed(theta));
    }
    if need > MAX_SERIES_ORDER {
        return Err(Error::Capability {
            requested: need,
            max: MAX_SERIES_ORDER,
        });
    }
    let cfg = ThetaConfig::for_tau(theta.params().tau(), need);
    Ok(Cow::Owned(Theta::with_config(theta.params(), cfg)?))
}

/// `t_1, …, t_n` with `tanh(x/2)/(2x) = Σ_k t_k x^{2k-2}`, read off the
/// Taylor series of `tanh`.
pub fn tanh_t_coeffs(n: usize) -> Vec<f64> {
    let tanh = powser::tanh_coeffs(2 * n);
    (1..=n)
        .map(|k| tanh[2 * k - 1] / 4f64.powi(k as i32))
        .collect()
}

/// γ-jet of `log(φ(λ + cγ) / θ^{1/2}(λ))`.
pub fn log_phi_shifted(theta: &Theta, lambda: C64, c: C64, order: usize) -> Result<Jet> {
    theta.guard(lambda, POLE_GUARD, "θ(λ)")?;
    let l = theta.log_taylor(lambda, order)?;
    let mut out = vec![zero(); order + 1];
    let mut cp = C64::new(1.0, 0.0);
    for k in 1..=order {
        cp *= c;
        out[k] += l[k] * cp * 0.5;
    }
    let t = tanh_t_coeffs(order.div_ceil(2));
    for (idx, tk) in t.iter().enumerate() {
        let lead = 2 * idx + 1; // power of γ carried by t_k
        if lead > order {
            break;
        }
        let mut cm = C64::new(1.0, 0.0);
        for m in 0..=order - lead {
            if m > 0 {
                cm *= c / m as f64;
            }
            // (θ'/θ)^{(j)}(λ) = (j+1)! ℓ_{j+1}
            let j = 2 * idx + m;
            let g = l[j + 1] * factorial(j + 1);
            out[lead + m] -= g * cm * *tk;
        }
    }
    Ok(Jet::new(Param::Gamma, out))
}

/// γ-jet of `φ(λ)/θ^{1/2}(λ)`.
pub fn solve_phi(theta: &Theta, lambda: C64, order: usize) -> Result<Jet> {
    let max = theta.config().deriv_max.saturating_sub(2);
    if order > max {
        return Err(Error::Capability {
            requested: order,
            max,
        });
    }
    Ok(log_phi_shifted(theta, lambda, zero(), order)?.exp())
}

/// γ-jet of `φ(λ - γu)/φ(λ - γu')`. The `θ^{1/2}` prefactors cancel.
pub fn phi_ratio(theta: &Theta, u: C64, u_prime: C64, lambda: C64, order: usize) -> Result<Jet> {
    let a = log_phi_shifted(theta, lambda, -u, order)?;
    let b = log_phi_shifted(theta, lambda, -u_prime, order)?;
    Ok((&a - &b).exp())
}

/// γ-jet of `θ(λ + aγ)/θ(λ + bγ)` straight from the Taylor coefficients of `θ`.
pub fn theta_ratio_jet(theta: &Theta, lambda: C64, a: C64, b: C64, order: usize) -> Result<Jet> {
    theta.guard(lambda, POLE_GUARD, "θ(λ)")?;
    let t = theta.taylor_coeffs(lambda, order)?;
    let num = Jet::new(Param::Gamma, powser::rescale(&t, a));
    let den = Jet::new(Param::Gamma, powser::rescale(&t, b));
    Ok(&num * &den.reciprocal()?)
}

/// Per-order residuals of `φ(λ+γ)/φ(λ-γ) - θ(λ)/θ(λ-γ)`.
pub fn phi_functional_residuals(theta: &Theta, lambda: C64, order: usize) -> Result<Vec<f64>> {
    let one = C64::new(1.0, 0.0);
    let lhs = phi_ratio(theta, -one, one, lambda, order)?;
    let rhs = theta_ratio_jet(theta, lambda, zero(), -one, order)?;
    Ok(lhs.diff_by_order(&rhs))
}

/// Solution of `g(ζ) + g(ζ + σℏ) = ρ(ζ)` with `g = O(ℏ)`, stored as
/// `g = Σ_n ℏ^n Σ_j c_{n,j} (ζ - ζ0)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSolution {
    zeta0: C64,
    coeffs: Vec<Vec<C64>>,
    zeta_order: usize,
}

impl ShiftSolution {
    /// `rho[n][j]` is the `ℏ^n s^j` coefficient of the right-hand side, given
    /// through `s^{zeta_order + hbar_order}`; `rho[0]` must vanish.
    fn solve(zeta0: C64, sigma: f64, rho: &[Vec<C64>], zeta_order: usize) -> Self {
        let h = rho.len() - 1;
        let w = zeta_order + h;
        let mut g: Vec<Vec<C64>> = vec![vec![zero(); w + 1]];
        for n in 1..=h {
            let avail = w - n;
            let mut gn = vec![zero(); avail + 1];
            for (j, slot) in gn.iter_mut().enumerate() {
                let mut acc = rho[n][j];
                let mut sm = 1.0;
                for m in 1..=n {
                    sm *= sigma / m as f64;
                    let src = &g[n - m];
                    // m-th derivative of g_{n-m} at degree j
                    let d = src[j + m] * (factorial(j + m) / factorial(j));
                    acc -= d * sm;
                }
                *slot = acc * 0.5;
            }
            g.push(gn);
        }
        let coeffs = g.into_iter().map(|mut v| {
            v.truncate(zeta_order + 1);
            v
        });
        ShiftSolution {
            zeta0,
            coeffs: coeffs.collect(),
            zeta_order,
        }
    }

    pub fn zeta0(&self) -> C64 {
        self.zeta0
    }

    pub fn hbar_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn zeta_order(&self) -> usize {
        self.zeta_order
    }

    /// Coefficient of `ℏ^n (ζ - ζ0)^j`.
    pub fn coeff(&self, n: usize, j: usize) -> C64 {
        self.coeffs
            .get(n)
            .and_then(|v| v.get(j))
            .copied()
            .unwrap_or_default()
    }

    /// ℏ-jet of `g(ζ0 + s)`.
    pub fn log_jet_at(&self, s: C64) -> Jet {
        let c = self
            .coeffs
            .iter()
            .map(|v| v.iter().rev().fold(zero(), |acc, x| acc * s + x))
            .collect();
        Jet::new(Param::Hbar, c)
    }

    /// ℏ-jet of `exp g(ζ0 + s)`.
    pub fn jet_at(&self, s: C64) -> Jet {
        self.log_jet_at(s).exp()
    }

    /// ℏ-jet of `g(ζ0 + s + cℏ)`. Needs `zeta_order ≥ hbar_order`.
    pub fn log_jet_shifted(&self, s: C64, c: C64) -> Result<Jet> {
        let h = self.hbar_order();
        if self.zeta_order < h {
            return Err(Error::Capability {
                requested: h,
                max: self.zeta_order,
            });
        }
        let mut out = vec![zero(); h + 1];
        for (n, v) in self.coeffs.iter().enumerate() {
            let mut cm = C64::new(1.0, 0.0);
            for m in 0..=h - n {
                if m > 0 {
                    cm *= c / m as f64;
                }
                let mut d = zero();
                for j in (m..v.len()).rev() {
                    d = d * s + v[j] * (factorial(j) / factorial(j - m));
                }
                out[n + m] += d * cm;
            }
        }
        Ok(Jet::new(Param::Hbar, out))
    }
}

/// Taylor coefficients of `log θ` at `zeta0`, through `s^order`.
fn log_theta_taylor(theta: &Theta, zeta0: C64, order: usize) -> Result<Vec<C64>> {
    let th = with_capacity(theta, order)?;
    th.guard(zeta0, POLE_GUARD, "θ(ζ0)")?;
    th.log_taylor(zeta0, order)
}

/// `log f_K` solving `log f_K(ζ) + log f_K(ζ - ℏ) = log RHS(ζ)` with the
/// right-hand side read as the quotient of the two theta ratios.
pub fn solve_fk_series(
    theta: &Theta,
    k: C64,
    zeta0: C64,
    zeta_order: usize,
    hbar_order: usize,
) -> Result<ShiftSolution> {
    let w = zeta_order + hbar_order;
    let l = log_theta_taylor(theta, zeta0, w + hbar_order)?;
    let mut rho = vec![vec![zero(); w + 1]];
    let one = C64::new(1.0, 0.0);
    for n in 1..=hbar_order {
        // ℏ^n part of ℓ(ζ+ℏ) - ℓ(ζ) - ℓ(ζ+ℏ+ℏK) + ℓ(ζ+ℏK)
        let weight = one - (one + k).powu(n as u32) + k.powu(n as u32);
        rho.push(
            (0..=w)
                .map(|j| l[n + j] * binomial(n + j, n) * weight)
                .collect(),
        );
    }
    Ok(ShiftSolution::solve(zeta0, -1.0, &rho, zeta_order))
}

/// `log A` solving `a(x) + a(x+ℏ) = log θ(x) - log θ(x+ℏ)`, as a double
/// series about `x0`.
pub fn solve_a_double(theta: &Theta, x0: C64, zeta_order: usize, hbar_order: usize) -> Result<ShiftSolution> {
    let w = zeta_order + hbar_order;
    let l = log_theta_taylor(theta, x0, w + hbar_order)?;
    let mut rho = vec![vec![zero(); w + 1]];
    for n in 1..=hbar_order {
        rho.push((0..=w).map(|j| -l[n + j] * binomial(n + j, n)).collect());
    }
    Ok(ShiftSolution::solve(x0, 1.0, &rho, zeta_order))
}

/// ℏ-jet of `log A(x)`.
pub fn solve_a_series(theta: &Theta, x: C64, order: usize) -> Result<Jet> {
    Ok(solve_a_double(theta, x, 0, order)?.log_jet_at(zero()))
}

/// Theta factors `(multiplicity, shift in units of ℏ)` of the displayed
/// `K = -2p` product.
fn fk_factors(p: u32) -> Vec<(f64, f64)> {
    let p = p as i64;
    let mut f = vec![(1.0, 0.0), (1.0, (-2 * p) as f64)];
    for k in 1..p {
        f.push((2.0, (-2 * k) as f64));
    }
    for k in 0..p {
        f.push((-2.0, (-(2 * k + 1)) as f64));
    }
    f
}

/// `θ(ζ) (Π_{k=1}^{p-1} θ(ζ-2kℏ))² θ(ζ-2pℏ) / (Π_{k=0}^{p-1} θ(ζ-(2k+1)ℏ))²`.
pub fn fk_closed(theta: &Theta, p: u32, zeta: C64) -> Result<C64> {
    if p == 0 {
        return Err(Error::InvalidParams("p must be a positive integer".into()));
    }
    let hbar = theta.params().hbar();
    let mut acc = C64::new(1.0, 0.0);
    for (mult, shift) in fk_factors(p) {
        let arg = zeta + hbar * shift;
        if mult < 0.0 {
            theta.guard(arg, POLE_GUARD, &format!("θ(ζ{:+}ℏ)", shift))?;
        }
        acc *= theta.eval(arg).powf(mult);
    }
    Ok(acc)
}

/// The displayed product evaluated at `ζ + ℏ`; this is the function that
/// solves the division reading of the `f_K` equation at `K = -2p`.
pub fn fk_closed_solution(theta: &Theta, p: u32, zeta: C64) -> Result<C64> {
    fk_closed(theta, p, zeta + theta.params().hbar())
}

/// ℏ-jet of `log F(ζ + offset·ℏ)` for the displayed product `F`.
pub fn fk_closed_log_jet(theta: &Theta, p: u32, zeta: C64, offset: f64, order: usize) -> Result<Jet> {
    if p == 0 {
        return Err(Error::InvalidParams("p must be a positive integer".into()));
    }
    let l = log_theta_taylor(theta, zeta, order)?;
    let mut out = vec![zero(); order + 1];
    for (mult, shift) in fk_factors(p) {
        let c = shift + offset;
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            *slot += l[n] * mult * c.powi(n as i32);
        }
    }
    Ok(Jet::new(Param::Hbar, out))
}

/// How the two theta ratios on the right of the `f_K` equation combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reading {
    Division,
    Multiplication,
}

/// Right-hand side of the `f_K` equation at the current `ℏ`.
pub fn fk_rhs(theta: &Theta, zeta: C64, k: C64, reading: Reading) -> Result<C64> {
    let h = theta.params().hbar();
    let ev = |arg: C64, name: &str, denom: bool| -> Result<C64> {
        if denom {
            theta.guard(arg, POLE_GUARD, name)?;
        }
        Ok(theta.eval(arg))
    };
    let first = ev(zeta + h, "θ(ζ+ℏ)", false)? / ev(zeta, "θ(ζ)", true)?;
    let second_num = zeta + h + h * k;
    let second_den = zeta + h * k;
    match reading {
        Reading::Division => {
            let second = ev(second_num, "θ(ζ+ℏ+ℏK)", true)? / ev(second_den, "θ(ζ+ℏK)", true)?;
            Ok(first / second)
        }
        Reading::Multiplication => {
            let second = ev(second_num, "θ(ζ+ℏ+ℏK)", false)? / ev(second_den, "θ(ζ+ℏK)", true)?;
            Ok(first * second)
        }
    }
}

/// Which `K = -2p` closed form to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkForm {
    /// The product exactly as displayed.
    Displayed,
    /// The displayed product at `ζ + ℏ`.
    Shifted,
}

/// Relative residual `|f(ζ) f(ζ-ℏ) - RHS(ζ)| / |RHS(ζ)|` at `K = -2p`.
pub fn fk_functional_residual(theta: &Theta, p: u32, zeta: C64, form: FkForm, reading: Reading) -> Result<f64> {
    let h = theta.params().hbar();
    let f = |z: C64| match form {
        FkForm::Displayed => fk_closed(theta, p, z),
        FkForm::Shifted => fk_closed_solution(theta, p, z),
    };
    let lhs = f(zeta)? * f(zeta - h)?;
    let rhs = fk_rhs(theta, zeta, C64::new(-2.0 * p as f64, 0.0), reading)?;
    Ok((lhs - rhs).norm() / rhs.norm())
}

/// Per-order residuals of `log A(x - Kℏ) - log A(x) = -log f_K(-x-ℏ)`.
pub fn a_fk_link_residuals(theta: &Theta, x: C64, k: C64, order: usize) -> Result<Vec<f64>> {
    let a = solve_a_double(theta, x, order, order)?;
    let lhs = &a.log_jet_shifted(zero(), -k)? - &a.log_jet_at(zero());
    let f = solve_fk_series(theta, k, -x, order, order)?;
    let rhs = -&f.log_jet_shifted(zero(), C64::new(-1.0, 0.0))?;
    Ok(lhs.diff_by_order(&rhs))
}

/// Both sides of `exp((e^{ℏ∂} - 1)/∂ · θ'/θ)(x) = θ(x+ℏ)/θ(x)` as ℏ-jets.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftIdentity {
    pub lhs: Jet,
    pub rhs: Jet,
}

impl ShiftIdentity {
    pub fn residuals(&self) -> Vec<f64> {
        self.lhs.diff_by_order(&self.rhs)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }
}

pub fn shift_operator_identity_check(theta: &Theta, x: C64, order: usize) -> Result<ShiftIdentity> {
    theta.guard(x, POLE_GUARD, "θ(x)")?;
    let th = with_capacity(theta, order)?;
    let t = th.taylor_coeffs(x, order)?;
    // θ'/θ as a power series in the local variable, by series division
    let dt: Vec<C64> = (1..t.len()).map(|k| t[k] * k as f64).collect();
    let g = powser::mul(&dt, &powser::inv(&t, order), order);
    // Σ_{m≥1} ℏ^m g^{(m-1)}(x)/m! ; g^{(m-1)}(x) = (m-1)! g[m-1]
    let mut op = vec![zero(); order + 1];
    for m in 1..=order {
        op[m] = g[m - 1] / m as f64;
    }
    let lhs = Jet::new(Param::Hbar, op).exp();
    let t0 = t[0];
    let rhs = Jet::new(Param::Hbar, t.iter().map(|c| c / t0).collect());
    Ok(ShiftIdentity { lhs, rhs })
}
