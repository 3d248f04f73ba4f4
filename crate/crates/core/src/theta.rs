//! The odd theta function `θ(z|τ)` normalised by `θ'(0) = 1`.
//!
//! `θ` is the unique entire function with `θ'(0) = 1`, zeros exactly on
//! `L = Z + τZ`, `θ(z+1) = -θ(z)` and `θ(z+τ) = -e^{-iπτ} e^{-2iπz} θ(z)`.
//! It is evaluated from the sine series of the classical `θ₁`
//!
//! ```text
//! s(z) = Σ_{j≥0} (-1)^j e^{iπτ(j+1/2)^2} sin((2j+1)πz),      θ = s / s'(0)
//! ```
//!
//! after reducing `z` into the cell `|Re z| ≤ 1/2`, `|Im z| ≤ Im τ / 2` with the
//! two quasi-periodicity laws. Derivatives are taken term by term.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::ModularParams;
use crate::series::{powser, LaurentSeries};

/// Default highest derivative order an evaluator supports.
pub const DEFAULT_DERIV_MAX: usize = 16;

/// Distance to the lattice below which `θ'/θ` and `℘` refuse to evaluate.
pub const POLE_GUARD: f64 = 1e-6;

const TAIL_LOG_RATIO: f64 = -69.077_552_789_821_37; // ln(1e-30)

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    /// Number of retained terms of the sine series.
    pub series_terms: usize,
    /// Reduce the argument into the fundamental cell before summing.
    pub reduce_domain: bool,
    /// Highest analytic derivative order supported.
    pub deriv_max: usize,
}

impl ThetaConfig {
    /// Smallest truncation whose dropped tail (including the growth of the
    /// `deriv_max`-th derivative) is below `1e-30` of the leading term on the
    /// reduced cell.
    pub fn for_tau(tau: C64, deriv_max: usize) -> Self {
        let t = tau.im;
        let d = deriv_max as f64;
        let log_term = |n: f64| {
            -PI * t * (n + 0.5).powi(2) + d * ((2.0 * n + 1.0) * PI).ln() + (2.0 * n + 1.0) * PI * t / 2.0
        };
        let lead = log_term(0.0);
        let mut n = 1usize;
        while n < 1_000_000 {
            let cur = log_term(n as f64);
            if cur - lead < TAIL_LOG_RATIO && log_term(n as f64 + 1.0) < cur {
                break;
            }
            n += 1;
        }
        ThetaConfig {
            series_terms: n,
            reduce_domain: true,
            deriv_max,
        }
    }
}

/// Theta evaluator bound to one set of [`ModularParams`].
#[derive(Debug, Clone)]
pub struct Theta {
    params: ModularParams,
    config: ThetaConfig,
    amps: Vec<C64>,
    freqs: Vec<f64>,
}

impl Theta {
    pub fn new(params: &ModularParams) -> Self {
        let config = ThetaConfig::for_tau(params.tau(), DEFAULT_DERIV_MAX);
        Theta::with_config(params, config).expect("automatic config is valid")
    }

    pub fn with_config(params: &ModularParams, config: ThetaConfig) -> Result<Self> {
        if config.series_terms == 0 {
            return Err(Error::InvalidParams("series_terms must be positive".into()));
        }
        let tau = params.tau();
        let mut amps = Vec::with_capacity(config.series_terms);
        let mut freqs = Vec::with_capacity(config.series_terms);
        let mut norm = C64::new(0.0, 0.0);
        for j in 0..config.series_terms {
            let half = j as f64 + 0.5;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = (C64::i() * PI * tau * half * half).exp() * sign;
            let w = (2 * j + 1) as f64 * PI;
            norm += c * w;
            amps.push(c);
            freqs.push(w);
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Theta {
            params: *params,
            config,
            amps,
            freqs,
        })
    }

    pub fn params(&self) -> &ModularParams {
        &self.params
    }

    /// Same evaluator with a different step `γ`; the series only depends on `τ`.
    pub fn with_gamma(&self, gamma: C64) -> Theta {
        let mut t = self.clone();
        t.params = self.params.with_gamma(gamma);
        t
    }

    pub fn config(&self) -> &ThetaConfig {
        &self.config
    }

    /// Splits `z = w + m + nτ` with `w` in the fundamental cell.
    pub fn reduce(&self, z: C64) -> (C64, i64, i64) {
        let tau = self.params.tau();
        let n = (z.im / tau.im).round();
        let z1 = z - tau * n;
        let m = z1.re.round();
        (z1 - m, m as i64, n as i64)
    }

    /// Euclidean distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: C64) -> f64 {
        let (w, _, _) = self.reduce(z);
        let tau = self.params.tau();
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                best = best.min((w - a as f64 - tau * b as f64).norm());
            }
        }
        best
    }

    /// Errors when `z` is within `threshold` of the lattice; `factor` names
    /// the theta factor for the report.
    pub fn guard(&self, z: C64, threshold: f64, factor: &str) -> Result<()> {
        let distance = self.lattice_distance(z);
        if distance < threshold {
            Err(Error::Singular {
                factor: factor.to_string(),
                arg: z,
                distance,
            })
        } else {
            Ok(())
        }
    }

    /// Taylor coefficients of the unreduced sine series at `w`.
    fn series_taylor(&self, w: C64, order: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); order + 1];
        for (a, &om) in self.amps.iter().zip(&self.freqs) {
            let x = w * om;
            let (s, c) = (x.sin(), x.cos());
            let cycle = [s, c, -s, -c];
            let mut scale = 1.0;
            for (k, slot) in out.iter_mut().enumerate() {
                if k > 0 {
                    scale *= om / k as f64;
                }
                *slot += a * cycle[k % 4] * scale;
            }
        }
        out
    }

    /// `θ^{(k)}(a)/k!` for `k = 0..=order`.
    pub fn taylor_coeffs(&self, a: C64, order: usize) -> Result<Vec<C64>> {
        if order > self.config.deriv_max {
            return Err(Error::Capability {
                requested: order,
                max: self.config.deriv_max,
            });
        }
        if !self.config.reduce_domain {
            return Ok(self.series_taylor(a, order));
        }
        let (w, m, n) = self.reduce(a);
        let base = self.series_taylor(w, order);
        let sign = if (m + n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        if n == 0 {
            return Ok(base.into_iter().map(|c| c * sign).collect());
        }
        // θ(w + s + m + nτ) = ± e^{-iπn²τ} e^{-2iπn(w+s)} θ(w+s)
        let nf = n as f64;
        let tau = self.params.tau();
        let pref = (-C64::i() * PI * (tau * nf * nf + 2.0 * nf * w)).exp() * sign;
        let k = -C64::i() * 2.0 * PI * nf;
        let mut mult = Vec::with_capacity(order + 1);
        let mut term = pref;
        for j in 0..=order {
            if j > 0 {
                term *= k / j as f64;
            }
            mult.push(term);
        }
        Ok(powser::mul(&mult, &base, order + 1))
    }

    pub fn taylor_at(&self, a: C64, order: usize) -> Result<LaurentSeries> {
        Ok(LaurentSeries::from_taylor(self.taylor_coeffs(a, order)?))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.taylor_coeffs(z, 0).expect("order 0 always supported")[0]
    }

    /// `θ^{(n)}(z)`.
    pub fn deriv(&self, z: C64, n: usize) -> Result<C64> {
        let t = self.taylor_coeffs(z, n)?;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        Ok(t[n] * fact)
    }

    /// `θ'(z)/θ(z)`.
    pub fn log_deriv(&self, z: C64) -> Result<C64> {
        self.guard(z, POLE_GUARD, "θ")?;
        let t = self.taylor_coeffs(z, 1)?;
        Ok(t[1] / t[0])
    }

    /// `℘(z) = -(θ'/θ)'(z)`.
    pub fn wp(&self, z: C64) -> Result<C64> {
        self.guard(z, POLE_GUARD, "θ")?;
        let t = self.taylor_coeffs(z, 2)?;
        let l = t[1] / t[0];
        Ok(l * l - t[2] * 2.0 / t[0])
    }

    /// Taylor coefficients of `log(θ(z+s)/θ(z))` in `s` through `s^order`
    /// (constant term 0).
    pub fn log_taylor(&self, z: C64, order: usize) -> Result<Vec<C64>> {
        self.guard(z, POLE_GUARD, "θ")?;
        let t = self.taylor_coeffs(z, order)?;
        let t0 = t[0];
        let normed: Vec<C64> = t.iter().map(|c| c / t0).collect();
        let mut l = powser::log(&normed, order + 1);
        l[0] = C64::new(0.0, 0.0);
        Ok(l)
    }

    /// `(θ'/θ)^{(m)}(z)` for `m = 0..=n`.
    pub fn log_deriv_derivs(&self, z: C64, n: usize) -> Result<Vec<C64>> {
        let l = self.log_taylor(z, n + 1)?;
        let mut fact = 1.0;
        Ok((0..=n)
            .map(|m| {
                fact *= (m + 1) as f64;
                l[m + 1] * fact
            })
            .collect())
    }
}

/// One-shot `θ(z)`; build a [`Theta`] when evaluating repeatedly.
pub fn theta(z: C64, p: &ModularParams) -> C64 {
    Theta::new(p).eval(z)
}

pub fn theta_deriv(z: C64, n: usize, p: &ModularParams) -> Result<C64> {
    Theta::new(p).deriv(z, n)
}

pub fn log_deriv(z: C64, p: &ModularParams) -> Result<C64> {
    Theta::new(p).log_deriv(z)
}

pub fn wp(z: C64, p: &ModularParams) -> Result<C64> {
    Theta::new(p).wp(z)
}

pub fn taylor_at(a: C64, order: usize, p: &ModularParams) -> Result<LaurentSeries> {
    Theta::new(p).taylor_at(a, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn th(tau_im: f64) -> Theta {
        Theta::new(&ModularParams::new(c(0.0, tau_im), c(0.05, 0.0)).unwrap())
    }

    /// Jacobi triple product form of θ₁, independent of the sine series:
    /// θ₁(πz) = 2 q^{1/4} sin(πz) Π (1-q^{2n})(1-q^{2n}e^{2iπz})(1-q^{2n}e^{-2iπz}),
    /// q = e^{iπτ}; normalised by θ₁'(0) = 2π q^{1/4} Π (1-q^{2n})^3.
    fn product_form(z: C64, tau: C64) -> C64 {
        let q = (C64::i() * PI * tau).exp();
        let e = (C64::i() * 2.0 * PI * z).exp();
        let mut num = (z * PI).sin();
        let mut den = c(PI, 0.0);
        let mut q2n = c(1.0, 0.0);
        for _ in 1..60 {
            q2n *= q * q;
            num *= (1.0 - q2n) * (1.0 - q2n * e) * (1.0 - q2n / e);
            den *= (1.0 - q2n).powi(3);
        }
        num / den
    }

    #[test]
    fn sum_form_matches_product_form() {
        let t = th(0.5);
        let z = c(0.25, 0.0);
        let a = t.eval(z);
        let b = product_form(z, t.params().tau());
        assert!((a - b).norm() < 1e-12 * b.norm(), "{a} vs {b}");
        for z in [c(0.31, -0.12), c(1.7, 0.9), c(-2.2, -1.3)] {
            let a = t.eval(z);
            let b = product_form(z, t.params().tau());
            assert!((a - b).norm() < 1e-11 * b.norm().max(1.0), "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn normalisation_and_zero() {
        let t = th(0.8);
        assert_eq!(t.eval(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((t.deriv(c(0.0, 0.0), 1).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(t.deriv(c(0.0, 0.0), 0).unwrap(), c(0.0, 0.0));
        let tau = t.params().tau();
        for p in [c(1.0, 0.0), tau, tau * 2.0 - 3.0] {
            assert!(t.eval(p).norm() < 1e-14);
        }
    }

    #[test]
    fn odd() {
        let t = th(0.8);
        let z = c(0.23, 0.11);
        assert!((t.eval(-z) + t.eval(z)).norm() < 1e-15);
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let t = th(0.6);
        let z = c(0.3, 0.0);
        let h = 1e-4;
        let fd = (t.eval(z + h) - t.eval(z) * 2.0 + t.eval(z - h)) / (h * h);
        let exact = t.deriv(z, 2).unwrap();
        assert!((fd - exact).norm() < 1e-7 * exact.norm().max(1.0), "{fd} vs {exact}");
    }

    #[test]
    fn capability_error() {
        let t = th(0.8);
        assert!(matches!(t.deriv(c(0.1, 0.0), 17), Err(Error::Capability { .. })));
        assert!(t.taylor_at(c(0.1, 0.0), 16).is_ok());
    }

    #[test]
    fn log_deriv_properties() {
        let t = th(0.7);
        let z = c(0.21, 0.13);
        let l = t.log_deriv(z).unwrap();
        assert!((t.log_deriv(-z).unwrap() + l).norm() < 1e-13);
        assert!((t.log_deriv(z + 1.0).unwrap() - l).norm() < 1e-13);
        for h in [1e-2, 1e-3] {
            let r = t.log_deriv(c(h, 0.0)).unwrap() * h;
            assert!((r - 1.0).norm() < 2.0 * h * h * 10.0, "{h}: {r}");
        }
        assert!(t.log_deriv(c(1e-8, 0.0)).unwrap_err().is_singular());
    }

    #[test]
    fn wp_properties() {
        let t = th(0.9);
        let z = c(0.31, 0.07);
        let w = t.wp(z).unwrap();
        assert!((t.wp(-z).unwrap() - w).norm() < 1e-12);
        let tau = t.params().tau();
        assert!((t.wp(z + tau).unwrap() - w).norm() < 1e-10 * w.norm().max(1.0));
        for h in [1e-2, 1e-3] {
            let r = t.wp(c(h, 0.0)).unwrap() * h * h;
            assert!((r - 1.0).norm() < 50.0 * h * h, "{h}: {r}");
        }
    }

    #[test]
    fn taylor_at_origin_and_evaluation() {
        let t = th(0.8);
        let s = t.taylor_at(c(0.0, 0.0), 2).unwrap();
        assert_eq!(s.coeff(0), Some(c(0.0, 0.0)));
        assert!((s.coeff(1).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(s.coeff(2), Some(c(0.0, 0.0)));

        let a = c(0.37, -0.21);
        let s = t.taylor_at(a, 12).unwrap();
        let h = C64::from_polar(0.05, 0.7);
        assert!((s.eval(h) - t.eval(a + h)).norm() < 1e-10);

        let s3 = t.taylor_at(c(0.0, 0.0), 3).unwrap();
        let d3 = t.deriv(c(0.0, 0.0), 3).unwrap();
        assert!((s3.coeff(3).unwrap() - d3 / 6.0).norm() < 1e-14);
    }

    #[test]
    fn reduced_and_unreduced_agree_near_cell() {
        let p = ModularParams::new(c(0.2, 0.9), c(0.05, 0.0)).unwrap();
        let red = Theta::new(&p);
        let mut cfg = *red.config();
        cfg.reduce_domain = false;
        let raw = Theta::with_config(&p, cfg).unwrap();
        for z in [c(0.4, 0.3), c(-0.6, -0.5), c(1.1, 0.2)] {
            let a = red.taylor_coeffs(z, 5).unwrap();
            let b = raw.taylor_coeffs(z, 5).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-11 * y.norm().max(1.0));
            }
        }
    }
}
