//! Dynamical shifts on `(C²)^{⊗n}` and residuals of the matrix identities.
//!
//! `f(λ - γ Σ_k m_k h⁽ᵏ⁾)` is evaluated by splitting along the weight spaces of
//! the shift sites: on a basis vector whose site-`k` weight is `μ_k` it acts
//! as `f(λ - γ Σ_k m_k μ_k)`. Since every `h⁽ᵏ⁾` is diagonal with spectrum
//! `±1` this agrees with the Taylor-series definition
//! `Σ_α (-γH)^α ∂^α_λ f(λ)/α!`, which [`shifted_embed_taylor`] keeps as a
//! cross-check.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmatrix::{t_matrix, RFamily, RKind};
use crate::tensor::{check_site, site_weight, TensorOperator};
use crate::theta::POLE_GUARD;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Subtract `multiplier · γ · h⁽ˢⁱᵗᵉ⁾` from `λ`. Sites are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynShift {
    pub site: usize,
    pub multiplier: C64,
}

impl DynShift {
    pub fn on(site: usize) -> Self {
        DynShift {
            site,
            multiplier: C64::new(1.0, 0.0),
        }
    }
}

/// Projector onto `h⁽ᵏ⁾ = sign` in an `n`-site space.
pub fn weight_projector(n: usize, k: usize, sign: i32) -> Result<TensorOperator> {
    check_site(k, n)?;
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParams(format!("weight sign must be ±1, got {sign}")));
    }
    let dim = 1usize << n;
    let diag: Vec<C64> = (0..dim)
        .map(|i| {
            if site_weight(i, k, n) == sign {
                C64::new(1.0, 0.0)
            } else {
                zero()
            }
        })
        .collect();
    Ok(TensorOperator::diagonal(n, &diag))
}

fn check_shifts(acting: (usize, usize), shifts: &[DynShift], n: usize) -> Result<()> {
    for s in shifts {
        check_site(s.site, n)?;
        if s.site == acting.0 || s.site == acting.1 {
            return Err(Error::BadSite { site: s.site, sites: n });
        }
    }
    Ok(())
}

fn shifted_lambda(lambda: C64, gamma: C64, shifts: &[DynShift], index: usize, n: usize) -> C64 {
    let s: C64 = shifts
        .iter()
        .map(|d| d.multiplier * site_weight(index, d.site, n) as f64)
        .sum();
    lambda - gamma * s
}

/// `family(z, λ - γ Σ m_k h⁽ᵏ⁾)` acting on sites `acting` of an `n`-site space.
pub fn shifted_embed(
    family: &RFamily,
    acting: (usize, usize),
    z: C64,
    lambda: C64,
    shifts: &[DynShift],
    n: usize,
) -> Result<TensorOperator> {
    check_shifts(acting, shifts, n)?;
    let gamma = family.gamma();
    let dim = 1usize << n;
    let mut cache: HashMap<Vec<i32>, TensorOperator> = HashMap::new();
    let mut out = TensorOperator::zeros(n);
    for col in 0..dim {
        let key: Vec<i32> = shifts.iter().map(|d| site_weight(col, d.site, n)).collect();
        if !cache.contains_key(&key) {
            let l = shifted_lambda(lambda, gamma, shifts, col, n);
            let op = family.eval(z, l)?.embed2(acting.0, acting.1, n)?;
            cache.insert(key.clone(), op);
        }
        let op = &cache[&key];
        for row in 0..dim {
            out.set(row, col, op.get(row, col));
        }
    }
    Ok(out)
}

/// The same operator from the truncated series `Σ_{α≤order} (-γH)^α ∂^α_λ R/α!`.
pub fn shifted_embed_taylor(
    family: &RFamily,
    acting: (usize, usize),
    z: C64,
    lambda: C64,
    shifts: &[DynShift],
    n: usize,
    order: usize,
) -> Result<TensorOperator> {
    check_shifts(acting, shifts, n)?;
    let gamma = family.gamma();
    let coeffs = family.lambda_taylor(z, lambda, order)?;
    let dim = 1usize << n;
    // (-γH) is diagonal: entry for basis vector i is λ'(i) - λ
    let step: Vec<C64> = (0..dim)
        .map(|i| shifted_lambda(lambda, gamma, shifts, i, n) - lambda)
        .collect();
    let mut out = TensorOperator::zeros(n);
    for (a, m) in coeffs.iter().enumerate() {
        let e = m.embed2(acting.0, acting.1, n)?;
        let d: Vec<C64> = step.iter().map(|s| s.powi(a as i32)).collect();
        out = &out + &(&e * &TensorOperator::diagonal(n, &d));
    }
    Ok(out)
}

/// Which sites shift `λ` in each factor of the dynamical Yang-Baxter equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPattern {
    /// `R¹²(λ) R¹³(λ-γh⁽²⁾) R²³(λ) = R²³(λ-γh⁽¹⁾) R¹³(λ) R¹²(λ-γh⁽³⁾)`.
    Stated,
    /// `R¹²(λ-γh⁽³⁾) R¹³(λ) R²³(λ-γh⁽¹⁾) = R²³(λ) R¹³(λ-γh⁽²⁾) R¹²(λ)`.
    Mirrored,
}

/// Both sides of the dynamical Yang-Baxter equation on three sites.
pub fn dybe_sides(
    family: &RFamily,
    z: [C64; 3],
    lambda: C64,
    pattern: ShiftPattern,
) -> Result<(TensorOperator, TensorOperator)> {
    let (z12, z13, z23) = (z[0] - z[1], z[0] - z[2], z[1] - z[2]);
    let r = |a: (usize, usize), zz: C64, s: Option<usize>| {
        let shifts: Vec<DynShift> = s.into_iter().map(DynShift::on).collect();
        shifted_embed(family, a, zz, lambda, &shifts, 3)
    };
    let (lhs, rhs) = match pattern {
        ShiftPattern::Stated => (
            [r((1, 2), z12, None)?, r((1, 3), z13, Some(2))?, r((2, 3), z23, None)?],
            [r((2, 3), z23, Some(1))?, r((1, 3), z13, None)?, r((1, 2), z12, Some(3))?],
        ),
        ShiftPattern::Mirrored => (
            [r((1, 2), z12, Some(3))?, r((1, 3), z13, None)?, r((2, 3), z23, Some(1))?],
            [r((2, 3), z23, None)?, r((1, 3), z13, Some(2))?, r((1, 2), z12, None)?],
        ),
    };
    let prod = |f: &[TensorOperator; 3]| &(&f[0] * &f[1]) * &f[2];
    Ok((prod(&lhs), prod(&rhs)))
}

pub fn dybe_residual(family: &RFamily, z: [C64; 3], lambda: C64, pattern: ShiftPattern) -> Result<f64> {
    let (l, r) = dybe_sides(family, z, lambda, pattern)?;
    Ok(l.max_abs_diff(&r))
}

/// Both sides of
/// `R¹²(z₁-z₂, λ-γh⁽³⁾) L¹(z₁, λ) L²(z₂, λ-γh⁽¹⁾) = L²(z₂, λ) L¹(z₁, λ-γh⁽²⁾) R¹²(z₁-z₂, λ)`
/// with auxiliary sites 1, 2, quantum site 3 and `Lᵃ(z_a, ·) = family(z_a - w, ·)`.
pub fn rll_sides(family: &RFamily, z1: C64, z2: C64, w: C64, lambda: C64) -> Result<(TensorOperator, TensorOperator)> {
    let e = |a: (usize, usize), zz: C64, s: Option<usize>| {
        let shifts: Vec<DynShift> = s.into_iter().map(DynShift::on).collect();
        shifted_embed(family, a, zz, lambda, &shifts, 3)
    };
    let lhs = &(&e((1, 2), z1 - z2, Some(3))? * &e((1, 3), z1 - w, None)?) * &e((2, 3), z2 - w, Some(1))?;
    let rhs = &(&e((2, 3), z2 - w, None)? * &e((1, 3), z1 - w, Some(2))?) * &e((1, 2), z1 - z2, None)?;
    Ok((lhs, rhs))
}

pub fn rll_residual(family: &RFamily, z1: C64, z2: C64, w: C64, lambda: C64) -> Result<f64> {
    let (l, r) = rll_sides(family, z1, z2, w, lambda)?;
    Ok(l.max_abs_diff(&r))
}

/// Block `L_{ij}` of a two-site `L` as an operator on the quantum (second)
/// site, `i, j ∈ {1, -1}`.
fn block(l: &TensorOperator, i: i32, j: i32) -> TensorOperator {
    let a = |w: i32| if w == 1 { 0 } else { 1 };
    TensorOperator::from_fn(1, |q, qq| l.get(2 * a(i) + q, 2 * a(j) + qq))
}

/// Quantum determinant of the fundamental `L(z, λ) = family(z - w, λ)`.
///
/// For `R⁺`: `d(z+γ,λ) a(z,λ+γ) - b(z+γ,λ) c(z,λ+γ) θ(λ-γh-γ)/θ(λ-γh)`.
/// For `R̄`: `θ(λ)/θ(λ-γh) · (d(z+γ,λ) a(z,λ+γ) - b(z+γ,λ) c(z,λ+γ))`.
/// `h` is the weight of the quantum site.
pub fn quantum_det(family: &RFamily, z: C64, w: C64, lambda: C64) -> Result<TensorOperator> {
    let g = family.gamma();
    let th = family.theta();
    let l_shift = family.eval(z + g - w, lambda)?;
    let l_base = family.eval(z - w, lambda + g)?;
    let da = &block(&l_shift, -1, -1) * &block(&l_base, 1, 1);
    let bc = &block(&l_shift, 1, -1) * &block(&l_base, -1, 1);
    let ratio = |num: &dyn Fn(C64) -> C64, den: &dyn Fn(C64) -> C64| -> Result<TensorOperator> {
        let mut d = Vec::with_capacity(2);
        for mu in [1.0, -1.0] {
            let arg = den(lambda - g * mu);
            th.guard(arg, POLE_GUARD, "θ(λ-γh)")?;
            d.push(th.eval(num(lambda - g * mu)) / th.eval(arg));
        }
        Ok(TensorOperator::diagonal(1, &d))
    };
    match family.kind() {
        RKind::Rplus => {
            let t = ratio(&|x| x - g, &|x| x)?;
            Ok(&da - &(&bc * &t))
        }
        RKind::Rbar => {
            let t = ratio(&|_| lambda, &|x| x)?;
            Ok(&t * &(&da - &bc))
        }
        other => Err(Error::Domain(format!("no quantum determinant for {other}"))),
    }
}

/// `max(|off-diagonal|, |d₁ - d₂|)` for a one-site operator.
pub fn scalar_defect(op: &TensorOperator) -> f64 {
    op.get(0, 1)
        .norm()
        .max(op.get(1, 0).norm())
        .max((op.get(0, 0) - op.get(1, 1)).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    One,
    Tau,
}

/// Twist in the `τ`-quasi-periodicity law
/// `R(z+τ, λ) = e^{iπ·phase·γ} t⁽¹⁾_{λ-mγh⁽²⁾} R(z, λ) (t⁽¹⁾_λ)^{-1}`,
/// with `h⁽²⁾` read on the output side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    /// `m`.
    pub multiplier: f64,
    pub phase: f64,
}

impl Twist {
    /// `m = 1`, no scalar phase.
    pub const STATED: Twist = Twist {
        multiplier: 1.0,
        phase: 0.0,
    };

    /// The twist that holds exactly for `kind`: the stated one times
    /// `e^{-iπγ}` for `R⁺` and `R̄`, and the `γ → -γ` image for `R⁻`.
    pub fn exact(kind: RKind) -> Twist {
        match kind {
            RKind::Rminus => Twist {
                multiplier: -1.0,
                phase: 1.0,
            },
            _ => Twist {
                multiplier: 1.0,
                phase: -1.0,
            },
        }
    }
}

/// `‖R(z+1, λ) - R(z, λ)‖`, or the `τ`-law residual for `twist`.
pub fn periodicity_residual(family: &RFamily, z: C64, lambda: C64, period: Period, twist: Twist) -> Result<f64> {
    let r = family.eval(z, lambda)?;
    match period {
        Period::One => Ok(family.eval(z + 1.0, lambda)?.max_abs_diff(&r)),
        Period::Tau => {
            let g = family.gamma();
            let shifted = family.eval(z + family.params().tau(), lambda)?;
            let scalar = (C64::i() * std::f64::consts::PI * g * twist.phase).exp();
            let left: Vec<C64> = (0..4)
                .map(|i| {
                    let l = lambda - g * twist.multiplier * site_weight(i, 2, 2) as f64;
                    t_matrix(l).get(i >> 1, i >> 1) * scalar
                })
                .collect();
            let right = t_matrix(lambda).inverse()?.kron(&TensorOperator::identity(1));
            let pred = &(&TensorOperator::diagonal(2, &left) * &r) * &right;
            Ok(shifted.max_abs_diff(&pred))
        }
    }
}

/// `‖R⁺(z, λ) R⁻(z, λ) - Id‖`.
pub fn unitarity_residual(family: &RFamily, z: C64, lambda: C64) -> Result<f64> {
    let rp = family.with_kind(RKind::Rplus).eval(z, lambda)?;
    let rm = family.with_kind(RKind::Rminus).eval(z, lambda)?;
    Ok((&rp * &rm).max_abs_diff(&TensorOperator::identity(2)))
}

/// Finite-difference scheme for the first γ-coefficient of `R⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Richardson {
    /// `2S(γ₂) - S(γ₁)` with `S(γ) = (R⁻(γ) - Id)/γ`, `γ₂ = γ₁/2`.
    Forward,
    /// `(4C(γ₂) - C(γ₁))/3` with `C(γ) = (R⁻(γ) - R⁻(-γ))/(2γ)`.
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Semiclassical {
    /// Max entry of the part of `S - r` orthogonal to the identity.
    pub residual: f64,
    /// Coefficient of the identity in `S - r`.
    pub offset: C64,
}

/// Compares the extrapolated first γ-coefficient of `R⁻` with the classical
/// r-matrix at steps `γ₁`, `γ₂ = γ₁/2`.
pub fn semiclassical(family: &RFamily, z: C64, lambda: C64, gamma1: f64, scheme: Richardson) -> Result<Semiclassical> {
    let rm = family.with_kind(RKind::Rminus);
    let id = TensorOperator::identity(2);
    let at = |g: f64| rm.with_gamma(C64::new(g, 0.0)).eval(z, lambda);
    let s = |g: f64| -> Result<TensorOperator> {
        match scheme {
            Richardson::Forward => Ok((&at(g)? - &id).scale(C64::new(1.0 / g, 0.0))),
            Richardson::Central => Ok((&at(g)? - &at(-g)?).scale(C64::new(0.5 / g, 0.0))),
        }
    };
    let g2 = gamma1 / 2.0;
    let extrap = match scheme {
        Richardson::Forward => &s(g2)?.scale(C64::new(2.0, 0.0)) - &s(gamma1)?,
        Richardson::Central => (&s(g2)?.scale(C64::new(4.0, 0.0)) - &s(gamma1)?).scale(C64::new(1.0 / 3.0, 0.0)),
    };
    let r = crate::rmatrix::classical_r_with(family.theta(), z, lambda)?;
    let d = &extrap - &r;
    Ok(Semiclassical {
        residual: d.traceless_part().max_abs(),
        offset: d.trace() / 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModularParams;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn family(kind: RKind, g: f64) -> RFamily {
        RFamily::new(kind, &ModularParams::new(c(0.1, 0.8), c(g, 0.02)).unwrap())
    }

    const Z: [C64; 3] = [C64::new(0.31, 0.12), C64::new(-0.07, 0.2), C64::new(0.12, -0.18)];
    const LAM: C64 = C64::new(0.23, 0.09);

    #[test]
    fn projectors() {
        let p = weight_projector(1, 1, 1).unwrap();
        assert_eq!(p, TensorOperator::unit(1, 1));
        let pp = weight_projector(3, 2, 1).unwrap();
        let pm = weight_projector(3, 2, -1).unwrap();
        assert_eq!((&pp * &pm).max_abs(), 0.0);
        assert_eq!(&pp + &pm, TensorOperator::identity(3));
        assert_eq!(pp.trace(), c(4.0, 0.0));
        assert!(weight_projector(2, 3, 1).is_err());
    }

    #[test]
    fn shifted_embed_basics() {
        let f = family(RKind::Rminus, 0.05);
        let plain = shifted_embed(&f, (1, 2), Z[0], LAM, &[], 3).unwrap();
        let direct = f.eval(Z[0], LAM).unwrap().kron(&TensorOperator::identity(1));
        assert!(plain.max_abs_diff(&direct) < 1e-16);

        let f0 = family(RKind::Rminus, 0.0).with_gamma(c(0.0, 0.0));
        let a = shifted_embed(&f0, (1, 2), Z[0], LAM, &[DynShift::on(3)], 3).unwrap();
        let b = f0.eval(Z[0], LAM).unwrap().kron(&TensorOperator::identity(1));
        assert!(a.max_abs_diff(&b) < 1e-16);

        // on v₁ at site 3 the shift is by exactly γ·multiplier
        let m = c(1.5, 0.0);
        let s = shifted_embed(&f, (1, 2), Z[0], LAM, &[DynShift { site: 3, multiplier: m }], 3).unwrap();
        let r = f.eval(Z[0], LAM - f.gamma() * m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((s.get(2 * i, 2 * j) - r.get(i, j)).norm() < 1e-15);
            }
        }
        assert!(shifted_embed(&f, (1, 2), Z[0], LAM, &[DynShift::on(2)], 3).is_err());
    }

    #[test]
    fn taylor_definition_agrees() {
        let f = family(RKind::Rbar, 0.05).with_gamma(c(0.05, 0.0));
        let shifts = [DynShift::on(2)];
        let exact = shifted_embed(&f, (1, 3), Z[1], LAM, &shifts, 3).unwrap();
        let taylor = shifted_embed_taylor(&f, (1, 3), Z[1], LAM, &shifts, 3, 12).unwrap();
        assert!(exact.max_abs_diff(&taylor) < 1e-8);
    }

    #[test]
    fn dybe_patterns() {
        let rm = family(RKind::Rminus, 0.07);
        assert!(dybe_residual(&rm, Z, LAM, ShiftPattern::Stated).unwrap() < 1e-9);
        for kind in [RKind::Rplus, RKind::Rbar] {
            let f = rm.with_kind(kind);
            assert!(dybe_residual(&f, Z, LAM, ShiftPattern::Mirrored).unwrap() < 1e-9, "{kind}");
        }
        let f0 = rm.with_kind(RKind::Rbar).with_gamma(c(0.0, 0.0));
        assert_eq!(dybe_residual(&f0, Z, LAM, ShiftPattern::Stated).unwrap(), 0.0);
    }

    #[test]
    fn rll_holds_for_plus_and_bar() {
        let f = family(RKind::Rplus, 0.07);
        let w = c(0.05, -0.03);
        assert!(rll_residual(&f, Z[0], Z[1], w, LAM).unwrap() < 1e-9);
        assert!(rll_residual(&f.with_kind(RKind::Rbar), Z[0], Z[1], w, LAM).unwrap() < 1e-9);
    }

    #[test]
    fn determinant_is_scalar() {
        for kind in [RKind::Rplus, RKind::Rbar] {
            let f = family(kind, 0.07);
            let d = quantum_det(&f, Z[0], c(0.05, -0.03), LAM).unwrap();
            assert!(scalar_defect(&d) < 1e-10, "{kind}: {d:?}");
        }
        let f0 = family(RKind::Rplus, 0.0).with_gamma(c(0.0, 0.0));
        let d = quantum_det(&f0, Z[0], c(0.05, -0.03), LAM).unwrap();
        assert!(d.max_abs_diff(&TensorOperator::identity(1)) < 1e-15);
    }

    #[test]
    fn periodicity() {
        for kind in [RKind::Rminus, RKind::Rplus, RKind::Rbar] {
            let f = family(kind, 0.07);
            assert!(periodicity_residual(&f, Z[0], LAM, Period::One, Twist::STATED).unwrap() < 1e-10);
            assert!(periodicity_residual(&f, Z[0], LAM, Period::Tau, Twist::exact(kind)).unwrap() < 1e-9, "{kind}");
        }
        // without the scalar the stated twist is off by exactly e^{-iπγ}
        let f = family(RKind::Rplus, 0.07);
        let stated = periodicity_residual(&f, Z[0], LAM, Period::Tau, Twist::STATED).unwrap();
        assert!(stated > 1e-3);
    }

    #[test]
    fn semiclassical_offset_is_log_derivative() {
        let f = family(RKind::Rminus, 0.05);
        let s = semiclassical(&f, Z[0], LAM, 1e-3, Richardson::Central).unwrap();
        assert!(s.residual < 1e-6, "{s:?}");
        let expect = -f.theta().log_deriv(Z[0]).unwrap() * 0.5;
        assert!((s.offset - expect).norm() < 1e-5);
    }
}
