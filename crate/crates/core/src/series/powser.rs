//! Slice-level truncated power series kernels shared by [`super::LaurentSeries`]
//! and [`super::Jet`]. Every routine returns exactly `n` coefficients.

use num_complex::Complex64 as C64;

pub(crate) fn mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        if ai == C64::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal; caller guarantees `a[0] != 0`.
pub(crate) fn inv(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    let a0 = a[0];
    out[0] = a0.inv();
    for k in 1..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 1..=k.min(a.len().saturating_sub(1)) {
            s += a[j] * out[k - j];
        }
        out[k] = -s / a0;
    }
    out
}

pub(crate) fn exp(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    out[0] = a.first().copied().unwrap_or_default().exp();
    for k in 1..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 1..=k.min(a.len().saturating_sub(1)) {
            s += a[j] * out[k - j] * j as f64;
        }
        out[k] = s / k as f64;
    }
    out
}

/// Principal-branch logarithm; caller guarantees `a[0] != 0`.
pub(crate) fn log(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    let a0 = a[0];
    out[0] = a0.ln();
    // k b_k a_0 = k a_k - sum_{j=1}^{k-1} j b_j a_{k-j}
    for k in 1..n {
        let ak = a.get(k).copied().unwrap_or_default();
        let mut s = ak * k as f64;
        for j in 1..k {
            if let Some(&akj) = a.get(k - j) {
                s -= out[j] * akj * j as f64;
            }
        }
        out[k] = s / (a0 * k as f64);
    }
    out
}

/// Coefficients of `a(c t)`.
pub(crate) fn rescale(a: &[C64], c: C64) -> Vec<C64> {
    let mut p = C64::new(1.0, 0.0);
    a.iter()
        .map(|&x| {
            let v = x * p;
            p *= c;
            v
        })
        .collect()
}

/// Taylor coefficients of `tanh(x)` up to (excluding) `x^n`, from `sinh/cosh`.
pub(crate) fn tanh_coeffs(n: usize) -> Vec<f64> {
    let mut sinh = vec![C64::new(0.0, 0.0); n];
    let mut cosh = vec![C64::new(0.0, 0.0); n];
    let mut fact = 1.0;
    for k in 0..n {
        if k > 0 {
            fact *= k as f64;
        }
        if k % 2 == 1 {
            sinh[k] = C64::new(1.0 / fact, 0.0);
        } else {
            cosh[k] = C64::new(1.0 / fact, 0.0);
        }
    }
    mul(&sinh, &inv(&cosh, n), n).iter().map(|c| c.re).collect()
}
