//! Method-of-lines integration of the radial model PDE
//! v_t = v_rr + (n+1)/r v_r + 3 r v v_r + (n+2) v²
//! on [0, L] with even reflection at the origin and v(L) = 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase::{barrier_bound, Regime, SteadyParams};
use crate::profile::{linear_fit, Chart, Profile};

pub const MIN_GRID: usize = 256;
pub const DEFAULT_CAP: f64 = 1e8;
/// Diffusive step factor: dt ≤ DIFFUSIVE·Δr²/(n+2).
const DIFFUSIVE: f64 = 0.4;
const NONLINEAR: f64 = 0.1;
/// The reciprocal fit uses the final two decades of growth.
const FIT_DECADES: f64 = 2.0;
const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("grid size {0} below the minimum {MIN_GRID}")]
    Grid(usize),
    #[error("domain radius must be positive, got {0}")]
    Domain(f64),
    #[error("dimension must exceed 2, got {0}")]
    Dimension(f64),
    #[error("initial data not finite at r = {0}")]
    NonFiniteData(f64),
    #[error("initial data nonzero at r = {r} ≥ 0.9L (value {value})")]
    Support { r: f64, value: f64 },
    #[error("sampled data needs matching, increasing radii covering [0, L]")]
    Samples,
    #[error("non-finite value at t = {t}, step {step}, node {node} (r = {r}); last v_max {last_vmax}")]
    NonFinite { t: f64, step: usize, node: usize, r: f64, last_vmax: f64 },
    #[error("blow-up fit needs {MIN_FIT_SAMPLES} samples in the final window, found {0}")]
    FitSamples(usize),
    #[error("run did not reach the blow-up cap")]
    NoBlowup,
    #[error("rescaling window [0, {needed}] spans only {nodes} grid nodes; refine the grid")]
    Resolution { needed: f64, nodes: usize },
}

/// Initial data families; everything but `Sampled` is multiplied by a
/// smooth cutoff that falls from 1 at `0.6L` to 0 at `0.9L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    Constant { c: f64 },
    /// amplitude·(1 − (r/radius)²)₊²
    Bump { amplitude: f64, radius: f64 },
    /// c(1+r)^(−exponent)
    Decay { c: f64, exponent: f64 },
    /// c/(1+r²)
    Lorentzian { c: f64 },
    /// Linear interpolation of (r, v) pairs; zero beyond the last radius.
    Sampled { r: Vec<f64>, v: Vec<f64> },
}

fn cutoff(r: f64, l: f64) -> f64 {
    let (a, b) = (0.6 * l, 0.9 * l);
    if r <= a {
        1.0
    } else if r >= b {
        0.0
    } else {
        let x = (b - r) / (b - a);
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

impl InitialData {
    pub fn sample(&self, grid: &[f64], l: f64) -> Result<Vec<f64>, EvolveError> {
        let raw: Vec<f64> = match self {
            InitialData::Zero => vec![0.0; grid.len()],
            InitialData::Constant { c } => grid.iter().map(|_| *c).collect(),
            InitialData::Bump { amplitude, radius } => grid
                .iter()
                .map(|r| {
                    let t = 1.0 - (r / radius).powi(2);
                    if t > 0.0 {
                        amplitude * t * t
                    } else {
                        0.0
                    }
                })
                .collect(),
            InitialData::Decay { c, exponent } => grid.iter().map(|r| c * (1.0 + r).powf(-exponent)).collect(),
            InitialData::Lorentzian { c } => grid.iter().map(|r| c / (1.0 + r * r)).collect(),
            InitialData::Sampled { r, v } => {
                if r.len() != v.len() || r.len() < 2 || r[0] > 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(EvolveError::Samples);
                }
                return Ok(grid.iter().map(|&x| interp(r, v, x)).collect());
            }
        };
        Ok(grid.iter().zip(raw).map(|(&r, v)| v * cutoff(r, l)).collect())
    }
}

fn interp(r: &[f64], v: &[f64], x: f64) -> f64 {
    let last = r.len() - 1;
    if x >= r[last] {
        return if x == r[last] { v[last] } else { 0.0 };
    }
    let k = r.partition_point(|&a| a <= x).clamp(1, last) - 1;
    let t = (x - r[k]) / (r[k + 1] - r[k]);
    v[k] + t * (v[k + 1] - v[k])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnapshotSchedule {
    /// Fixed output times.
    pub times: Vec<f64>,
    /// Extra snapshot each time v_max grows by this factor.
    pub growth_factor: Option<f64>,
}

impl Default for SnapshotSchedule {
    fn default() -> Self {
        Self { times: Vec::new(), growth_factor: Some(10f64.sqrt()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub n: f64,
    pub radius: f64,
    pub grid: usize,
    pub initial: InitialData,
    pub t_end: f64,
    #[serde(default = "default_cap")]
    pub v_cap: f64,
    #[serde(default)]
    pub snapshots: SnapshotSchedule,
    /// Optional ceiling on the time step, e.g. to force matched steps.
    #[serde(default)]
    pub dt_max: Option<f64>,
}

fn default_cap() -> f64 {
    DEFAULT_CAP
}

impl EvolveConfig {
    pub fn new(n: f64, radius: f64, grid: usize, initial: InitialData, t_end: f64) -> Self {
        Self { n, radius, grid, initial, t_end, v_cap: DEFAULT_CAP, snapshots: SnapshotSchedule::default(), dt_max: None }
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.grid as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        let h = self.dr();
        (0..=self.grid).map(|i| i as f64 * h).collect()
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.grid < MIN_GRID {
            return Err(EvolveError::Grid(self.grid));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(EvolveError::Domain(self.radius));
        }
        if !(self.n > 2.0) {
            return Err(EvolveError::Dimension(self.n));
        }
        Ok(())
    }

    /// Validated initial samples on the grid.
    pub fn initial_samples(&self) -> Result<Vec<f64>, EvolveError> {
        self.validate()?;
        let grid = self.radii();
        let v = self.initial.sample(&grid, self.radius)?;
        for (&r, &x) in grid.iter().zip(&v) {
            if !x.is_finite() {
                return Err(EvolveError::NonFiniteData(r));
            }
            if r >= 0.9 * self.radius && x != 0.0 {
                return Err(EvolveError::Support { r, value: x });
            }
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveEnd {
    ReachedEnd,
    BlowupCap,
    StepUnderflow,
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub v_max: f64,
    pub profile: Profile,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub v_max: f64,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlowupRecord {
    pub detected: bool,
    pub t_est: f64,
    /// Slope of 1/v_max against t; −2κ/w(0) for a self-similar solution.
    pub slope: f64,
    /// The profile height 2/|slope| the fit implies at κ = 1.
    pub effective_alpha: f64,
    pub r_squared: f64,
    pub fit_rms: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

impl BlowupRecord {
    pub fn is_self_similar(&self) -> bool {
        self.detected && self.r_squared >= 0.999
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Boundedness {
    pub initial_max: f64,
    pub run_max: f64,
    /// Max of v_max over the second half of the run.
    pub late_max: f64,
    /// Largest ratio v / barrier over the recorded snapshots, with the
    /// barrier constant fixed by the initial data.
    pub barrier_margin: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionResult {
    pub config: EvolveConfig,
    pub end: EvolveEnd,
    pub steps: usize,
    pub t_final: f64,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<Snapshot>,
    pub blowup: Option<BlowupRecord>,
    pub boundedness: Option<Boundedness>,
}

impl EvolutionResult {
    pub fn times(&self) -> Vec<f64> {
        self.series.iter().map(|s| s.t).collect()
    }

    pub fn v_max(&self) -> Vec<f64> {
        self.series.iter().map(|s| s.v_max).collect()
    }
}

struct Stepper {
    n: f64,
    h: f64,
    r: Vec<f64>,
}

impl Stepper {
    fn rhs(&self, v: &[f64], out: &mut [f64]) {
        let m = v.len() - 1;
        let (n, h) = (self.n, self.h);
        let h2 = h * h;
        out[0] = (n + 2.0) * (2.0 * (v[1] - v[0]) / h2 + v[0] * v[0]);
        for i in 1..m {
            let r = self.r[i];
            let vr = (v[i + 1] - v[i - 1]) / (2.0 * h);
            let vrr = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
            out[i] = vrr + (n + 1.0) / r * vr + 3.0 * r * v[i] * vr + (n + 2.0) * v[i] * v[i];
        }
        out[m] = 0.0;
    }

    fn dt_bound(&self, v: &[f64]) -> f64 {
        let diffusive = DIFFUSIVE * self.h * self.h / (self.n + 2.0);
        let mut rate: f64 = 0.0;
        for (i, &x) in v.iter().enumerate() {
            let a = x.abs();
            rate = rate.max(3.0 * self.r[i] * a / self.h).max((self.n + 2.0) * a);
        }
        if rate > 0.0 {
            diffusive.min(NONLINEAR / rate)
        } else {
            diffusive
        }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn first_non_finite(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

fn snapshot(r: &[f64], v: &[f64], t: f64) -> Snapshot {
    let m = v.len() - 1;
    let h = r[1] - r[0];
    let d: Vec<f64> = (0..=m)
        .map(|i| match i {
            0 => 0.0,
            _ if i == m => (v[m] - v[m - 1]) / h,
            _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect();
    Snapshot { t, v_max: max_norm(v), profile: Profile::new(Chart::R, r.to_vec(), v.to_vec(), d) }
}

/// SSP-RK3 in time with the diffusive and nonlinear step guards.
pub fn evolve_radial(cfg: &EvolveConfig) -> Result<EvolutionResult, EvolveError> {
    let mut v = cfg.initial_samples()?;
    let r = cfg.radii();
    let st = Stepper { n: cfg.n, h: cfg.dr(), r: r.clone() };
    let len = v.len();
    let (mut k, mut v1, mut v2) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut vmax = max_norm(&v);
    let mut series = vec![SeriesRow { t, v_max: vmax, dt: 0.0 }];
    let mut snapshots = vec![snapshot(&r, &v, t)];
    let mut pending: Vec<f64> = cfg.snapshots.times.iter().copied().filter(|&s| s > 0.0 && s <= cfg.t_end).collect();
    pending.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut next_level = cfg.snapshots.growth_factor.map(|f| vmax.max(1e-300) * f);

    let end = loop {
        if t >= cfg.t_end {
            break EvolveEnd::ReachedEnd;
        }
        if vmax > cfg.v_cap {
            break EvolveEnd::BlowupCap;
        }
        let mut dt = st.dt_bound(&v).min(cfg.t_end - t);
        if let Some(cap) = cfg.dt_max {
            dt = dt.min(cap);
        }
        if let Some(&ts) = pending.last() {
            dt = dt.min(ts - t);
        }
        if !(dt > f64::EPSILON * t.max(1e-300)) {
            break EvolveEnd::StepUnderflow;
        }

        st.rhs(&v, &mut k);
        for i in 0..len {
            v1[i] = v[i] + dt * k[i];
        }
        st.rhs(&v1, &mut k);
        for i in 0..len {
            v2[i] = 0.75 * v[i] + 0.25 * (v1[i] + dt * k[i]);
        }
        st.rhs(&v2, &mut k);
        for i in 0..len {
            v[i] = (v[i] + 2.0 * (v2[i] + dt * k[i])) / 3.0;
        }
        v[len - 1] = 0.0;
        steps += 1;
        t = match pending.last() {
            Some(&ts) if t + dt >= ts => ts,
            _ => t + dt,
        };

        if let Some(node) = first_non_finite(&v) {
            return Err(EvolveError::NonFinite { t, step: steps, node, r: r[node], last_vmax: vmax });
        }
        vmax = max_norm(&v);
        series.push(SeriesRow { t, v_max: vmax, dt });

        let mut take = false;
        while pending.last().is_some_and(|&ts| ts <= t) {
            pending.pop();
            take = true;
        }
        if let (Some(level), Some(f)) = (next_level, cfg.snapshots.growth_factor) {
            if vmax >= level {
                take = true;
                let mut l = level;
                while l <= vmax {
                    l *= f;
                }
                next_level = Some(l);
            }
        }
        if take {
            snapshots.push(snapshot(&r, &v, t));
        }
    };
    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(snapshot(&r, &v, t));
    }

    let mut res = EvolutionResult {
        config: cfg.clone(),
        end,
        steps,
        t_final: t,
        series,
        snapshots,
        blowup: None,
        boundedness: None,
    };
    if end == EvolveEnd::BlowupCap {
        res.blowup = Some(detect_blowup(&res)?);
    } else {
        res.boundedness = Some(boundedness(&res));
    }
    Ok(res)
}

/// Least squares of 1/v_max against t over the final two decades of growth.
pub fn detect_blowup(res: &EvolutionResult) -> Result<BlowupRecord, EvolveError> {
    if res.end != EvolveEnd::BlowupCap {
        return Err(EvolveError::NoBlowup);
    }
    let last = res.series.last().map(|s| s.v_max).unwrap_or(0.0);
    let floor = last / 10f64.powf(FIT_DECADES);
    let start = res.series.iter().rposition(|s| s.v_max < floor).map_or(0, |k| k + 1);
    let window = &res.series[start..];
    if window.len() < MIN_FIT_SAMPLES {
        return Err(EvolveError::FitSamples(window.len()));
    }
    let ts: Vec<f64> = window.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = window.iter().map(|s| 1.0 / s.v_max).collect();
    let fit = linear_fit(&ts, &ys).ok_or(EvolveError::FitSamples(window.len()))?;
    Ok(BlowupRecord {
        detected: fit.slope < 0.0,
        t_est: -fit.intercept / fit.slope,
        slope: fit.slope,
        effective_alpha: 2.0 / fit.slope.abs(),
        r_squared: fit.r_squared,
        fit_rms: fit.rms,
        samples: window.len(),
        window: (ts[0], ts[ts.len() - 1]),
    })
}

fn boundedness(res: &EvolutionResult) -> Boundedness {
    let initial_max = res.series[0].v_max;
    let run_max = res.series.iter().fold(0.0, |m: f64, s| m.max(s.v_max));
    let half = res.t_final / 2.0;
    let late_max = res.series.iter().filter(|s| s.t >= half).fold(0.0, |m: f64, s| m.max(s.v_max));
    let barrier_margin = barrier_check(&res.config).ok().and_then(|b| {
        let clause = b.clause?;
        let p = SteadyParams::new(res.config.n).ok()?;
        let (c, g) = clause.constants(b.constant);
        let worst = res
            .snapshots
            .iter()
            .flat_map(|s| s.profile.abscissa.iter().zip(&s.profile.values))
            .map(|(&r, &v)| v / barrier_bound(&p, r, c, g))
            .fold(f64::NEG_INFINITY, f64::max);
        Some(worst)
    });
    Boundedness { initial_max, run_max, late_max, barrier_margin }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    /// n < 4: v₀ ≤ C(1+r)^(−(n+2)/3).
    I,
    /// n = 4: v₀ ≤ r^(−2)((4/3)log(e+r) + C).
    II,
    /// n > 4: v₀ ≤ γβ/(1+r)² with γ < 1.
    III,
}

impl Clause {
    /// (C, γ) arguments for `barrier_bound` given the clause's constant.
    pub fn constants(self, constant: f64) -> (f64, f64) {
        match self {
            Clause::I | Clause::II => (constant, 1.0),
            Clause::III => (0.0, constant),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BarrierVerdict {
    pub n: f64,
    pub clause: Option<Clause>,
    /// Smallest C (clauses i, ii) or γ (clause iii) that the data needs.
    pub constant: f64,
    /// Lower bound −C the data needs.
    pub lower: f64,
}

/// Which global-existence condition the initial data meets.
pub fn barrier_check(cfg: &EvolveConfig) -> Result<BarrierVerdict, EvolveError> {
    let v = cfg.initial_samples()?;
    let r = cfg.radii();
    let p = SteadyParams::new(cfg.n).map_err(|_| EvolveError::Dimension(cfg.n))?;
    let lower = v.iter().fold(0.0, |m: f64, x| m.max(-x));
    let (clause, constant) = match p.regime() {
        Regime::Below4 => {
            let c = r.iter().zip(&v).map(|(&r, &x)| x / barrier_bound(&p, r, 1.0, 1.0)).fold(0.0, f64::max);
            (Some(Clause::I), c)
        }
        Regime::Four => {
            // Affine in C, and infinite at the origin.
            let c = r
                .iter()
                .zip(&v)
                .filter(|(&r, _)| r > 0.0)
                .map(|(&r, &x)| x * r * r - barrier_bound(&p, r, 0.0, 1.0) * r * r)
                .fold(0.0, f64::max);
            (c.is_finite().then_some(Clause::II), c)
        }
        Regime::Above4 => {
            let g = r.iter().zip(&v).map(|(&r, &x)| x / barrier_bound(&p, r, 0.0, 1.0)).fold(0.0, f64::max);
            ((g < 1.0).then_some(Clause::III), g)
        }
    };
    Ok(BarrierVerdict { n: cfg.n, clause, constant, lower })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CollapseSample {
    pub t: f64,
    pub v_max: f64,
    /// Length scale √(α/v(0)).
    pub scale: f64,
    pub deviation: f64,
}

/// Sup-norm deviation, relative to α, between ℓ²v(ℓξ) with ℓ² = α/v(0) and
/// the reference profile, on the region where the reference exceeds 0.1α.
pub fn profile_collapse(
    res: &EvolutionResult,
    reference: &Profile,
    alpha: f64,
    last: usize,
) -> Result<Vec<CollapseSample>, EvolveError> {
    if !res.blowup.is_some_and(|b| b.detected) {
        return Err(EvolveError::NoBlowup);
    }
    let xi_max = reference
        .abscissa
        .iter()
        .zip(&reference.values)
        .filter(|(_, &w)| w > 0.1 * alpha)
        .map(|(&x, _)| x)
        .fold(0.0, f64::max);
    let h = res.config.dr();
    let take = res.snapshots.len().min(last);
    let mut out = Vec::with_capacity(take);
    for s in &res.snapshots[res.snapshots.len() - take..] {
        let v0 = s.profile.values[0];
        if v0 <= 0.0 {
            continue;
        }
        let scale = (alpha / v0).sqrt();
        let needed = xi_max * scale;
        let nodes = (needed / h) as usize;
        if nodes < 4 {
            return Err(EvolveError::Resolution { needed, nodes });
        }
        out.push(CollapseSample { t: s.t, v_max: s.v_max, scale, deviation: rescaled_deviation(&s.profile, reference, alpha, scale) });
    }
    Ok(out)
}

fn rescaled_deviation(data: &Profile, reference: &Profile, alpha: f64, scale: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (&xi, &w) in reference.abscissa.iter().zip(&reference.values) {
        if w <= 0.1 * alpha {
            continue;
        }
        let v = match data.eval(xi * scale) {
            Some(v) => v,
            None => return f64::INFINITY,
        };
        worst = worst.max((scale * scale * v - w).abs());
    }
    worst / alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: f64, data: InitialData) -> EvolveConfig {
        EvolveConfig::new(n, 4.0, 256, data, 1e-3)
    }

    #[test]
    fn zero_is_fixed_point() {
        let res = evolve_radial(&base(5.0, InitialData::Zero)).unwrap();
        assert!(res.steps > 0);
        assert!(res.snapshots.last().unwrap().profile.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = base(5.0, InitialData::Zero);
        c.grid = 100;
        assert!(matches!(evolve_radial(&c), Err(EvolveError::Grid(100))));
        let c = base(5.0, InitialData::Sampled { r: vec![0.0, 4.0], v: vec![1.0, 1.0] });
        assert!(matches!(evolve_radial(&c), Err(EvolveError::Support { .. })));
    }

    #[test]
    fn smooth_data_keeps_shape_and_decays() {
        let mut c = base(5.0, InitialData::Bump { amplitude: 0.5, radius: 1.0 });
        c.t_end = 0.05;
        let res = evolve_radial(&c).unwrap();
        assert_eq!(res.end, EvolveEnd::ReachedEnd);
        let b = res.boundedness.unwrap();
        assert!(b.run_max <= b.initial_max * (1.0 + 1e-12));
        assert!(res.snapshots.iter().all(|s| s.profile.derivatives[0] == 0.0));
    }

    #[test]
    fn constant_data_follows_riccati() {
        let mut c = EvolveConfig::new(5.0, 1e6, 512, InitialData::Constant { c: 1.0 }, 1.0);
        c.snapshots.growth_factor = None;
        let res = evolve_radial(&c).unwrap();
        let b = res.blowup.unwrap();
        assert!(b.detected);
        assert!((b.t_est * 7.0 - 1.0).abs() < 1e-3, "{}", b.t_est);
        assert!((b.slope + 7.0).abs() < 1e-2);
    }

    #[test]
    fn barrier_clauses() {
        let d = |n, data| barrier_check(&EvolveConfig::new(n, 40.0, 512, data, 1.0)).unwrap();
        assert_eq!(d(3.0, InitialData::Decay { c: 0.5, exponent: 5.0 / 3.0 }).clause, Some(Clause::I));
        assert_eq!(d(4.0, InitialData::Lorentzian { c: 0.5 }).clause, Some(Clause::II));
        let v = d(5.0, InitialData::Decay { c: 5.4, exponent: 2.0 });
        assert_eq!(v.clause, Some(Clause::III));
        assert!((v.constant - 0.9).abs() < 1e-12);
        assert_eq!(d(5.0, InitialData::Constant { c: 1.0 }).clause, None);
    }

    #[test]
    fn comparison_on_matched_steps() {
        let run = |a: f64| {
            let mut c = base(5.0, InitialData::Bump { amplitude: a, radius: 1.0 });
            c.dt_max = Some(1e-6);
            c.t_end = 2e-3;
            evolve_radial(&c).unwrap()
        };
        let (lo, hi) = (run(2.0), run(3.0));
        assert_eq!(lo.series.len(), hi.series.len());
        for (a, b) in lo.series.iter().zip(&hi.series) {
            assert!(a.t == b.t && a.v_max <= b.v_max + 1e-8);
        }
    }
}
