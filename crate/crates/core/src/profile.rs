//! Sampled radial profiles and the small least-squares fits used to tag
//! their asymptotics.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// Abscissa is the radius r.
    R,
    /// Abscissa is s = log r.
    S,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::R => "r",
            Chart::S => "s",
        }
    }
}

/// Fitted end behaviour `value ~ x^exponent` (r-chart), optionally with a
/// logarithmic correction `x^exponent (log_coefficient*log x + c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticTag {
    pub exponent: f64,
    pub log_coefficient: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub chart: Chart,
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub head: Option<AsymptoticTag>,
    pub tail: Option<AsymptoticTag>,
}

impl Profile {
    pub fn new(chart: Chart, abscissa: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64>) -> Self {
        debug_assert_eq!(abscissa.len(), values.len());
        debug_assert_eq!(abscissa.len(), derivatives.len());
        Self { chart, abscissa, values, derivatives, head: None, tail: None }
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        self.abscissa.windows(2).all(|w| w[1] > w[0])
    }

    pub fn first(&self) -> f64 {
        self.abscissa[0]
    }

    pub fn last(&self) -> f64 {
        *self.abscissa.last().unwrap()
    }

    /// Cubic Hermite interpolation; `None` outside the sampled range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let n = self.abscissa.len();
        if n == 0 || x < self.abscissa[0] || x > self.abscissa[n - 1] {
            return None;
        }
        if n == 1 {
            return Some(self.values[0]);
        }
        let k = self.abscissa.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.abscissa[k], self.abscissa[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivatives[k] * h, self.derivatives[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * d0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * d1,
        )
    }

    /// Restriction to `lo <= x <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Profile {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.abscissa[k] >= lo && self.abscissa[k] <= hi).collect();
        Profile::new(
            self.chart,
            keep.iter().map(|&k| self.abscissa[k]).collect(),
            keep.iter().map(|&k| self.values[k]).collect(),
            keep.iter().map(|&k| self.derivatives[k]).collect(),
        )
    }

    /// Power-law fit `|value| ~ C x^p` on `[lo, hi]` (r-chart abscissa).
    pub fn fit_power(&self, lo: f64, hi: f64) -> Option<AsymptoticTag> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .abscissa
            .iter()
            .zip(&self.values)
            .filter(|(x, v)| **x >= lo && **x <= hi && **x > 0.0 && v.abs() > 0.0)
            .map(|(x, v)| (x.ln(), v.abs().ln()))
            .unzip();
        let fit = linear_fit(&xs, &ys)?;
        Some(AsymptoticTag { exponent: fit.slope, log_coefficient: None, residual: fit.rms })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope*x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit { intercept, slope, rms: (sse / nf).sqrt(), r_squared })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub rms: f64,
}

/// Least squares `y = c0 + c1 x + c2 x²`.
pub fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Option<QuadraticFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return None;
    }
    // Centre and scale x for conditioning.
    let mx = xs.iter().sum::<f64>() / n as f64;
    let sx = xs.iter().map(|x| (x - mx).abs()).fold(0.0, f64::max);
    if sx == 0.0 {
        return None;
    }
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (x, y) in xs.iter().zip(ys) {
        let t = (x - mx) / sx;
        let b = [1.0, t, t * t];
        for i in 0..3 {
            rhs[i] += b[i] * y;
            for j in 0..3 {
                m[i][j] += b[i] * b[j];
            }
        }
    }
    let q = solve3(m, rhs)?;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let t = (x - mx) / sx;
            (y - q[0] - q[1] * t - q[2] * t * t).powi(2)
        })
        .sum();
    // Back to powers of x.
    let c2 = q[2] / (sx * sx);
    let c1 = q[1] / sx - 2.0 * c2 * mx;
    let c0 = q[0] - q[1] * mx / sx + c2 * mx * mx;
    Some(QuadraticFit { c0, c1, c2, rms: (sse / n as f64).sqrt() })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_is_exact_for_cubics() {
        let xs: Vec<f64> = (0..11).map(|k| k as f64 * 0.3).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let df = |x: f64| -2.0 + 1.5 * x * x;
        let p = Profile::new(Chart::R, xs.clone(), xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| df(x)).collect());
        for k in 0..100 {
            let x = k as f64 * 0.03;
            assert!((p.eval(x).unwrap() - f(x)).abs() < 1e-12);
        }
        assert!(p.eval(3.1).is_none());
        assert!(p.is_monotone());
    }

    #[test]
    fn power_fit_recovers_exponent() {
        let xs: Vec<f64> = (1..=50).map(|k| 10.0 + k as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-2.0)).collect();
        let p = Profile::new(Chart::R, xs.clone(), vs, vec![0.0; xs.len()]);
        let tag = p.fit_power(10.0, 60.0).unwrap();
        assert!((tag.exponent + 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_fit_exact() {
        let xs: Vec<f64> = (0..20).map(|k| 1e-3 + 1e-4 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 12.5 - 60.0 * x + 900.0 * x * x).collect();
        let f = quadratic_fit(&xs, &ys).unwrap();
        assert!((f.c0 - 12.5).abs() < 1e-9 && (f.c1 + 60.0).abs() < 1e-5 && (f.c2 - 900.0).abs() < 1e-2);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }
}
