//! Kummer's confluent hypergeometric function M(a, b, x) and its positive zeros.

use serde::Serialize;
use thiserror::Error;

pub const X_GUARD: f64 = 700.0;
const ZERO_GRID: usize = 4096;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("second parameter must be positive, got b = {0}")]
    NonPositiveB(f64),
    #[error("argument x = {0} outside [0, {X_GUARD}]")]
    OutOfRange(f64),
    #[error("series did not converge for a = {a}, b = {b}, x = {x}")]
    NoConvergence { a: f64, b: f64, x: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KummerArgs {
    pub a: f64,
    pub b: f64,
    pub x: f64,
}

impl KummerArgs {
    pub fn new(a: f64, b: f64, x: f64) -> Self {
        Self { a, b, x }
    }
}

/// Degree of the polynomial when `a` is a non-positive integer (to rounding).
pub fn polynomial_degree(a: f64) -> Option<u32> {
    let m = (-a).round();
    if m >= 0.0 && (a + m).abs() <= 1e-12 * m.max(1.0) {
        Some(m as u32)
    } else {
        None
    }
}

pub fn kummer_m(args: KummerArgs) -> Result<f64, SpecfunError> {
    let KummerArgs { a, b, x } = args;
    if !(b > 0.0) {
        return Err(SpecfunError::NonPositiveB(b));
    }
    if !(0.0..=X_GUARD).contains(&x) {
        return Err(SpecfunError::OutOfRange(x));
    }
    if let Some(m) = polynomial_degree(a) {
        return Ok(poly_eval(-(m as f64), b, x, m));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small = 0;
    for k in 0..20_000u32 {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(SpecfunError::NoConvergence { a, b, x })
}

fn poly_eval(a: f64, b: f64, x: f64, m: u32) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..m {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// d/dx M(a, b, x) = (a/b) M(a+1, b+1, x).
pub fn kummer_m_prime(args: KummerArgs) -> Result<f64, SpecfunError> {
    let KummerArgs { a, b, x } = args;
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(a / b * kummer_m(KummerArgs::new(a + 1.0, b + 1.0, x))?)
}

/// ⌈−a⌉, the number of positive zeros of M(a, b, ·) for b > 0, a < 0.
pub fn predicted_zero_count(a: f64) -> usize {
    if a >= 0.0 {
        return 0;
    }
    match polynomial_degree(a) {
        Some(m) => m as usize,
        None => (-a).ceil() as usize,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSearch {
    pub roots: Vec<f64>,
    pub predicted: usize,
    /// Whether every predicted root was found below `x_max`.
    pub saturated: bool,
}

pub fn kummer_zeros(a: f64, b: f64, x_max: f64) -> Result<ZeroSearch, SpecfunError> {
    if !(b > 0.0) {
        return Err(SpecfunError::NonPositiveB(b));
    }
    if !(x_max > 0.0 && x_max <= X_GUARD) {
        return Err(SpecfunError::OutOfRange(x_max));
    }
    let f = |x: f64| kummer_m(KummerArgs::new(a, b, x));
    let mut roots = Vec::new();
    let dx = x_max / ZERO_GRID as f64;
    let mut x_prev = 0.0;
    let mut f_prev = 1.0;
    for k in 1..=ZERO_GRID {
        let x = k as f64 * dx;
        let fx = f(x)?;
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && (fx > 0.0) != (f_prev > 0.0) {
            let (mut lo, mut hi, mut flo) = (x_prev, x, f_prev);
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x_prev = x;
        f_prev = fx;
    }
    let predicted = predicted_zero_count(a);
    Ok(ZeroSearch { saturated: roots.len() >= predicted, roots, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(a: f64, b: f64, x: f64) -> f64 {
        kummer_m(KummerArgs::new(a, b, x)).unwrap()
    }

    #[test]
    fn basic_values() {
        assert_eq!(m(3.7, 2.5, 0.0), 1.0);
        for &n in &[3.0, 5.0, 12.0] {
            for &r in &[0.3, 1.0, 2.5] {
                let got = m(-1.0, n / 2.0, r * r / 2.0);
                assert!((got - (1.0 - r * r / n)).abs() < 1e-15);
            }
        }
        // 1 - 2x/3 + x^2/12 at x = 1.
        assert!((m(-2.0, 3.0, 1.0) - 5.0 / 12.0).abs() < 1e-15);
        // M(a, a, x) = e^x.
        assert!((m(2.3, 2.3, 5.0) / 5.0f64.exp() - 1.0).abs() < 1e-13);
        // M(1, 2, x) = (e^x - 1)/x.
        let x = 40.0f64;
        assert!((m(1.0, 2.0, x) / (x.exp_m1() / x) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(kummer_m(KummerArgs::new(1.0, 0.0, 1.0)), Err(SpecfunError::NonPositiveB(_))));
        assert!(matches!(kummer_m(KummerArgs::new(1.0, 2.0, 701.0)), Err(SpecfunError::OutOfRange(_))));
        assert!(matches!(kummer_m(KummerArgs::new(1.0, 2.0, -1.0)), Err(SpecfunError::OutOfRange(_))));
    }

    #[test]
    fn zero_counts() {
        let z = kummer_zeros(-1.0, 2.5, 200.0).unwrap();
        assert_eq!(z.roots.len(), 1);
        assert!((z.roots[0] - 2.5).abs() < 1e-10);
        assert_eq!(kummer_zeros(-4.0, 4.0, 200.0).unwrap().roots.len(), 4);
        let z7 = kummer_zeros(-7.0, 3.5, 200.0).unwrap();
        assert_eq!(z7.roots.len(), 7);
        assert!(z7.saturated);
        for &a in &[-1.5, -2.0, -3.3, -4.0, -7.0] {
            for &b in &[2.5, 3.5, 4.5] {
                let z = kummer_zeros(a, b, 200.0).unwrap();
                assert_eq!(z.roots.len(), predicted_zero_count(a), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn degree_seven_sign_changes() {
        // Independent check: the explicit coefficients of M(-7, 7/2, x).
        let (a, b) = (-7.0, 3.5);
        let mut coef = vec![1.0];
        for k in 0..7 {
            let kf = k as f64;
            let c = coef[k] * (a + kf) / ((b + kf) * (kf + 1.0));
            coef.push(c);
        }
        let horner = |x: f64| coef.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let mut changes = 0;
        let mut prev = horner(0.0);
        for k in 1..=200_000 {
            let v = horner(k as f64 * 1e-3);
            if (v > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = v;
        }
        assert_eq!(changes, 7);
    }

    #[test]
    fn truncated_zero_search_not_saturated() {
        let z = kummer_zeros(-7.0, 3.5, 1.0).unwrap();
        assert!(!z.saturated);
        assert!(z.roots.len() < 7);
    }

    #[test]
    fn predicted_counts() {
        assert_eq!(predicted_zero_count(-7.0), 7);
        assert_eq!(predicted_zero_count(-2.2), 3);
        assert_eq!(predicted_zero_count(-4.0), 4);
        assert_eq!(predicted_zero_count(-4.0 - 1e-14), 4);
    }

    proptest! {
        #[test]
        fn derivative_identity(a in -8.0f64..8.0, b in 0.5f64..10.0, x in 0.1f64..30.0) {
            let h = 1e-4 * x.min(1.0);
            let fd = (m(a, b, x + h) - m(a, b, x - h)) / (2.0 * h);
            let exact = kummer_m_prime(KummerArgs::new(a, b, x)).unwrap();
            let scale = exact.abs().max(m(a, b, x).abs()).max(1.0);
            prop_assert!((fd - exact).abs() <= 1e-8 * scale, "fd {} exact {}", fd, exact);
        }

        #[test]
        fn polynomial_matches_horner(mm in 0u32..10, b in 0.5f64..8.0, x in 0.0f64..40.0) {
            let a = -(mm as f64);
            let mut coef = vec![1.0f64];
            for k in 0..mm as usize {
                let kf = k as f64;
                let c = coef[k] * (a + kf) / ((b + kf) * (kf + 1.0));
                coef.push(c);
            }
            let horner = coef.iter().rev().fold(0.0, |acc, c| acc * x + c);
            let got = m(a, b, x);
            let scale = coef.iter().enumerate().map(|(k, c)| (c * x.powi(k as i32)).abs()).sum::<f64>();
            prop_assert!((got - horner).abs() <= 1e-13 * scale);
        }
    }
}
