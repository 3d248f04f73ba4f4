//! The spaces `L_λ` and `L_0`, their dual bases in `O = C[[z]]` under the
//! residue pairing, the projection onto `L_{-μ}` along `O`, and the kernel
//! identities
//!
//! ```text
//! Σ_i e_{i;λ}(z) e^i(w) = θ(z-w+λ) / (θ(z-w) θ(λ))
//! Σ_i e_{i;0}(z) e^i(w) = (θ'/θ)(z-w)
//! ```
//!
//! with `e_{i;λ} = ∂^i (θ(λ+z)/θ(z))` and `e_{i;0} = (θ'/θ)^{(i)}`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::series::solvers::with_capacity;
use crate::series::{pairing, powser, LaurentSeries};
use crate::theta::Theta;

/// Condition number above which [`dual_basis`] refuses to return.
pub const CONDITION_THRESHOLD: f64 = 1e6;

/// Extra rows in the dual solve beyond the requested order.
pub const GUARD_COLUMNS: usize = 4;

const ON_LATTICE: f64 = 1e-12;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// `L_λ` for `λ` off the lattice.
    Lambda(C64),
    /// `L_0`, spanned by the derivatives of `θ'/θ`.
    Zero,
}

/// Paired bases `(e_{i;λ})` of the sector and `(e^i)` of `O`, `i < order`.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub sector: Sector,
    pub order: usize,
    /// Laurent expansions at 0 of `e_{i;λ}`.
    pub primal: Vec<LaurentSeries>,
    /// Coefficients of `e^i` as polynomials of degree `< order + GUARD_COLUMNS`.
    pub dual: Vec<Vec<C64>>,
    /// Condition number of the pole-part system.
    pub condition: f64,
}

impl KernelBasis {
    pub fn dual_series(&self, i: usize) -> LaurentSeries {
        let n = self.dual[i].len();
        LaurentSeries::new(0, self.dual[i].clone(), n as i64 - 1 + 64)
    }

    /// `⟨e^i, e_{j;λ}⟩` for `i, j < order`.
    pub fn duality_matrix(&self) -> Result<Vec<Vec<C64>>> {
        (0..self.order)
            .map(|i| {
                let d = self.dual_series(i);
                (0..self.order).map(|j| pairing(&d, &self.primal[j])).collect()
            })
            .collect()
    }

    /// Largest entry of the duality matrix minus the identity.
    pub fn duality_deviation(&self) -> Result<f64> {
        let m = self.duality_matrix()?;
        let mut worst: f64 = 0.0;
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        Ok(worst)
    }
}

fn check_order(theta: &Theta, n: usize) -> Result<()> {
    let max = theta.config().deriv_max.saturating_sub(2);
    if n > max {
        Err(Error::Capability { requested: n, max })
    } else {
        Ok(())
    }
}

/// `θ` at 0 expanded through `z^m`.
fn theta_at_zero(theta: &Theta, m: usize) -> Result<LaurentSeries> {
    with_capacity(theta, m)?.taylor_at(zero(), m)
}

/// `e_{i;λ}` for `i < n`, each valid through at least `z^n`.
pub fn basis_l_lambda(theta: &Theta, lambda: C64, n: usize) -> Result<Vec<LaurentSeries>> {
    check_order(theta, n)?;
    if theta.lattice_distance(lambda) < ON_LATTICE {
        return Err(Error::Domain(format!("λ = {lambda} lies on the lattice")));
    }
    let m = 2 * n + 2;
    let th = with_capacity(theta, m)?;
    let num = th.taylor_at(lambda, m)?;
    let den = theta_at_zero(&th, m)?.invert()?;
    let e0 = &num * &den;
    Ok((0..n).map(|i| e0.derive_n(i)).collect())
}

/// `e_{j;0} = (θ'/θ)^{(j)}` for `j < n`.
pub fn basis_l0(theta: &Theta, n: usize) -> Result<Vec<LaurentSeries>> {
    check_order(theta, n)?;
    let m = 2 * n + 3;
    let t = theta_at_zero(theta, m)?;
    let e0 = &t.derive() * &t.invert()?;
    Ok((0..n).map(|j| e0.derive_n(j)).collect())
}

fn primal(theta: &Theta, sector: Sector, n: usize) -> Result<Vec<LaurentSeries>> {
    match sector {
        Sector::Lambda(l) => basis_l_lambda(theta, l, n),
        Sector::Zero => basis_l0(theta, n),
    }
}

/// Solves `⟨Σ_m c^i_m z^m, e_{j;λ}⟩ = δ_ij` for `i, j < n + GUARD_COLUMNS`.
pub fn dual_basis(theta: &Theta, sector: Sector, n: usize) -> Result<KernelBasis> {
    let np = n + GUARD_COLUMNS;
    // guard columns may need more derivatives than the caller's evaluator has
    let th = with_capacity(theta, np + 2)?;
    let basis = primal(&th, sector, np)?;

    // pairing(z^m, e_j) is the z^{-m-1} coefficient of e_j
    let mut m = vec![zero(); np * np];
    for (j, e) in basis.iter().enumerate() {
        for k in 0..np {
            m[j * np + k] = e.coeff(-(k as i64) - 1).ok_or_else(|| {
                Error::Precision(format!("e_{j} not valid through z^-{}", k + 1))
            })?;
        }
    }

    // pole parts of the scaled e_j together with the constant function 1,
    // degree -np..=0; this is the system that degenerates as λ nears L
    let d = np + 1;
    let mut aug = vec![zero(); d * d];
    for (j, e) in basis.iter().enumerate() {
        let s = 1.0 / factorial(j);
        for r in 0..d {
            let deg = r as i64 - np as i64;
            aug[r * d + j] = e.coeff(deg).unwrap_or_default() * s;
        }
    }
    aug[(d - 1) * d + np] = C64::new(1.0, 0.0);
    let condition = linalg::condition_number(&aug, d);
    if !(condition <= CONDITION_THRESHOLD) {
        return Err(Error::Conditioning {
            condition,
            threshold: CONDITION_THRESHOLD,
        });
    }

    // rows of C = (M^T)^{-1}
    let mt: Vec<C64> = (0..np * np).map(|k| m[(k % np) * np + k / np]).collect();
    let inv = linalg::inverse(&mt, np)?;
    let dual = (0..n).map(|i| inv[i * np..(i + 1) * np].to_vec()).collect();
    Ok(KernelBasis {
        sector,
        order: n,
        primal: basis.into_iter().take(n).collect(),
        dual,
        condition,
    })
}

/// `e_{i;λ}(z)` evaluated directly from theta.
pub fn basis_value(theta: &Theta, sector: Sector, i: usize, z: C64) -> Result<C64> {
    let th = with_capacity(theta, i + 1)?;
    th.guard(z, crate::theta::POLE_GUARD, "θ(z)")?;
    match sector {
        Sector::Lambda(l) => {
            let num = th.taylor_coeffs(z + l, i)?;
            let den = th.taylor_coeffs(z, i)?;
            let q = powser::mul(&num, &powser::inv(&den, i + 1), i + 1);
            Ok(q[i] * factorial(i))
        }
        Sector::Zero => Ok(th.log_deriv_derivs(z, i)?[i]),
    }
}

/// Largest `w`-coefficient discrepancy, through `w^{n-1}`, between
/// `Σ_{i<n} e_{i;λ}(z) e^i(w)` and the theta kernel.
pub fn kernel_sum_residual(theta: &Theta, sector: Sector, z: C64, n: usize) -> Result<f64> {
    let kb = dual_basis(theta, sector, n)?;
    let (lhs, rhs) = kernel_sum_coefficients(theta, &kb, z)?;
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// The two sides of the kernel identity as `w`-Taylor coefficients.
pub fn kernel_sum_coefficients(theta: &Theta, kb: &KernelBasis, z: C64) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = kb.order;
    let mut lhs = vec![zero(); n];
    for i in 0..n {
        let v = basis_value(theta, kb.sector, i, z)?;
        for (m, slot) in lhs.iter_mut().enumerate() {
            *slot += v * kb.dual[i][m];
        }
    }
    let th = with_capacity(theta, n)?;
    let flip = |c: Vec<C64>| -> Vec<C64> {
        c.into_iter()
            .enumerate()
            .map(|(k, x)| if k % 2 == 0 { x } else { -x })
            .collect()
    };
    let rhs = match kb.sector {
        Sector::Lambda(l) => {
            th.guard(l, crate::theta::POLE_GUARD, "θ(λ)")?;
            th.guard(z, crate::theta::POLE_GUARD, "θ(z)")?;
            let num = flip(th.taylor_coeffs(z + l, n - 1)?);
            let den = flip(th.taylor_coeffs(z, n - 1)?);
            let tl = th.eval(l);
            powser::mul(&num, &powser::inv(&den, n), n)
                .into_iter()
                .map(|c| c / tl)
                .collect()
        }
        Sector::Zero => {
            let g = th.log_deriv_derivs(z, n - 1)?;
            flip(g.into_iter().enumerate().map(|(k, x)| x / factorial(k)).collect())
        }
    };
    Ok((lhs, rhs))
}

/// Splits `eps` as `π + ρ` with `π ∈ L_{-μ}` carrying the whole pole part
/// and `ρ` regular.
pub fn project_minus(
    theta: &Theta,
    eps: &LaurentSeries,
    mu: C64,
    n: usize,
) -> Result<(LaurentSeries, LaurentSeries)> {
    let pole = eps.pole_order();
    if pole >= n {
        return Err(Error::Capability {
            requested: pole,
            max: n.saturating_sub(1),
        });
    }
    if pole == 0 {
        return Ok((LaurentSeries::zero(eps.order_valid()), eps.clone()));
    }
    let basis = basis_l_lambda(theta, -mu, n)?;
    let ov = basis
        .iter()
        .map(|b| b.order_valid())
        .min()
        .unwrap_or(eps.order_valid())
        .min(eps.order_valid());
    let mut pi = LaurentSeries::zero(ov);
    let mut rest = eps.truncate(ov);
    for d in (1..=pole).rev() {
        let e = &basis[d - 1];
        let lead = e.coeff(-(d as i64)).unwrap_or_default();
        let c = rest.coeff(-(d as i64)).unwrap_or_default() / lead;
        let term = e.scale(c);
        pi = &pi + &term;
        rest = &rest - &term;
    }
    // what is left below degree 0 is rounding
    let reg: Vec<C64> = (0..=rest.order_valid()).map(|k| rest.coeff(k).unwrap()).collect();
    let rho = LaurentSeries::new(0, reg, rest.order_valid());
    Ok((pi, rho))
}

/// Residue at 0 of `e_{i;λ} e_{j;-λ}` computed from the series and by the
/// trapezoidal rule on `|z| = radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityCheck {
    pub series: C64,
    pub quadrature: C64,
}

impl OrthogonalityCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.series - self.quadrature).norm()
    }
}

pub fn orthogonality_check(
    theta: &Theta,
    lambda: C64,
    i: usize,
    j: usize,
    radius: f64,
    nodes: usize,
) -> Result<OrthogonalityCheck> {
    let n = i.max(j) + 1;
    let a = basis_l_lambda(&*with_capacity(theta, n + 2)?, lambda, n)?;
    let b = basis_l_lambda(&*with_capacity(theta, n + 2)?, -lambda, n)?;
    let series = pairing(&a[i], &b[j])?;
    let mut acc = zero();
    for k in 0..nodes {
        let u = C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        let z = u * radius;
        let f = basis_value(theta, Sector::Lambda(lambda), i, z)? * basis_value(theta, Sector::Lambda(-lambda), j, z)?;
        acc += f * z;
    }
    Ok(OrthogonalityCheck {
        series,
        quadrature: acc / nodes as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ModularParams;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn theta() -> Theta {
        Theta::new(&ModularParams::new(c(0.0, 0.8), c(0.05, 0.0)).unwrap())
    }

    #[test]
    fn l_lambda_structure() {
        let th = theta();
        let lam = c(0.3, 0.1);
        let b = basis_l_lambda(&th, lam, 6).unwrap();
        assert_eq!(b[0].min_degree(), -1);
        assert!((b[0].coeff(-1).unwrap() - th.eval(lam)).norm() < 1e-14);
        assert!(b[1].max_abs_diff(&b[0].derive()) < 1e-15);
        for (i, e) in b.iter().enumerate() {
            assert_eq!(e.pole_order(), i + 1);
            assert!(e.order_valid() >= 6);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let lead = th.eval(lam) * sign * factorial(i);
            assert!((e.coeff(-(i as i64) - 1).unwrap() - lead).norm() < 1e-12 * lead.norm());
        }
        let z = c(0.04, 0.0);
        assert!((b[0].eval(z) - th.eval(lam + z) / th.eval(z)).norm() < 1e-9);
    }

    #[test]
    fn l0_structure() {
        let th = theta();
        let b = basis_l0(&th, 8).unwrap();
        assert_eq!(b[0].min_degree(), -1);
        assert!((b[0].coeff(-1).unwrap() - 1.0).norm() < 1e-15);
        let z = c(0.05, 0.02);
        let wp = th.wp(z).unwrap();
        assert!((b[1].eval(z) + wp).norm() < 1e-9 * wp.norm());
        let one = LaurentSeries::from_taylor(vec![c(1.0, 0.0)]);
        assert!((pairing(&one, &b[0]).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn duals_are_dual() {
        let th = theta();
        let lam = c(0.3, 0.1);
        let kb = dual_basis(&th, Sector::Lambda(lam), 8).unwrap();
        assert!(kb.duality_deviation().unwrap() < 1e-9);
        assert!((kb.dual[0][0] - th.eval(lam).inv()).norm() < 1e-13);
        for (i, d) in kb.dual.iter().enumerate() {
            let val = d.iter().position(|x| x.norm() > 1e-12).unwrap();
            assert_eq!(val, i);
        }
        let kb0 = dual_basis(&th, Sector::Zero, 8).unwrap();
        assert!(kb0.duality_deviation().unwrap() < 1e-9);
    }

    #[test]
    fn near_lattice_is_ill_conditioned() {
        let th = theta();
        let err = dual_basis(&th, Sector::Lambda(c(1e-7, 0.0)), 4).unwrap_err();
        assert!(matches!(err, Error::Conditioning { .. }), "{err}");
        assert!(matches!(basis_l_lambda(&th, c(0.0, 0.0), 4), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_identity() {
        let th = theta();
        let z = c(0.4, 0.2);
        let lam = c(0.3, 0.1);
        let kb = dual_basis(&th, Sector::Lambda(lam), 12).unwrap();
        let (lhs, rhs) = kernel_sum_coefficients(&th, &kb, z).unwrap();
        let w0 = th.eval(z + lam) / (th.eval(z) * th.eval(lam));
        assert!((lhs[0] - w0).norm() < 1e-9);
        assert!((rhs[0] - w0).norm() < 1e-12);
        assert!(kernel_sum_residual(&th, Sector::Lambda(lam), z, 12).unwrap() < 1e-8);
        let kb0 = dual_basis(&th, Sector::Zero, 12).unwrap();
        let (lhs0, _) = kernel_sum_coefficients(&th, &kb0, z).unwrap();
        assert!((lhs0[0] - th.log_deriv(z).unwrap()).norm() < 1e-9);
        assert!(kernel_sum_residual(&th, Sector::Zero, z, 12).unwrap() < 1e-8);
    }

    #[test]
    fn projection() {
        let th = theta();
        let mu = c(0.2, 0.15);
        let reg = LaurentSeries::from_taylor(vec![c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let (pi, rho) = project_minus(&th, &reg, mu, 6).unwrap();
        assert!(pi.is_zero());
        assert_eq!(rho, reg);

        let inv_z = LaurentSeries::new(-1, vec![c(1.0, 0.0)], 10);
        let (pi, rho) = project_minus(&th, &inv_z, mu, 6).unwrap();
        let e0 = &basis_l_lambda(&th, -mu, 6).unwrap()[0];
        assert!(pi.max_abs_diff(&e0.scale(th.eval(-mu).inv())) < 1e-14);
        assert!(rho.is_regular());

        let (pi2, rho2) = project_minus(&th, &pi, mu, 6).unwrap();
        assert!(pi2.max_abs_diff(&pi) < 1e-13);
        assert!(rho2.coeffs().iter().all(|x| x.norm() < 1e-13));

        let deep = LaurentSeries::new(-6, vec![c(1.0, 0.0)], 4);
        assert!(matches!(project_minus(&th, &deep, mu, 6), Err(Error::Capability { .. })));
    }

    #[test]
    fn orthogonality_residue_vanishes() {
        let th = theta();
        let o = orthogonality_check(&th, c(0.3, 0.1), 1, 2, 0.1, 128).unwrap();
        assert!(o.discrepancy() < 1e-8, "{o:?}");
        assert!(o.series.norm() < 1e-8);
    }
}
