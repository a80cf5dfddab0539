//! Self-similar profiles of the semilinear heat equation v_t = Δv + v^{2σ+1}.
//!
//! The profile solves
//!
//! ```text
//! w'' + (n−1)/r w' − κ r w' + w^{2σ+1} − (κ/σ) w = 0,   w(0) = α, w'(0) = 0,
//! ```
//!
//! with w ~ r^{−1/σ} at infinity. With u = r^{1/σ} w and s = log r,
//! u'' + A u' − β u + u^{2σ+1} = κ e^{2s} u', A = n − 2 − 2/σ,
//! β = (n − 2 − 1/σ)/σ. The singular steady state is u ≡ β^{1/(2σ)}.

use crate::profile::{linear_fit, Profile};
use crate::selfsim::SensitivitySample;
use crate::shooting::{
    self, bisect, confirm, grid_jumps, log_grid, scan, Acceptance, Confirmation, IndexKind, Jump, ProfileEquation,
    ShootConfig, Shot, ShotEnd,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Relative distance of the fitted tail plateau from u*.
pub const TAIL_TOLERANCE: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatError {
    #[error("dimension n = {0} must exceed 2")]
    Dimension(f64),
    #[error("σ = {0} must be positive")]
    Sigma(f64),
    #[error("κ = {0} must be positive")]
    Kappa(f64),
    #[error("σ = {sigma} has n − 2 − 1/σ ≤ 0 at n = {n}: no singular steady state")]
    NoSingularState { n: f64, sigma: f64 },
    #[error("R_max = {0} violates the κR²/2 ≤ 700 guard")]
    RadiusGuard(f64),
    #[error("no j = 2 solution found at the start of the path")]
    NoSeed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatParams {
    pub n: f64,
    pub sigma: f64,
    pub kappa: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub sigma_s: f64,
    pub sigma_c: f64,
    pub sigma_l: f64,
}

/// σ_s = 2/(n−2), σ_c = 2/(n−4−2√(n−1)), σ_l = 3/(n−10); +∞ where the
/// denominator is not positive.
pub fn critical_exponents(n: f64) -> CriticalExponents {
    let inv = |d: f64, num: f64| if d > 0.0 { num / d } else { f64::INFINITY };
    CriticalExponents {
        sigma_s: inv(n - 2.0, 2.0),
        sigma_c: inv(n - 4.0 - 2.0 * (n - 1.0).max(0.0).sqrt(), 2.0),
        sigma_l: inv(n - 10.0, 3.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRoots {
    /// lambda1 ≥ lambda2.
    Real { lambda1: f64, lambda2: f64 },
    Complex { re: f64, im: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JLimit {
    Infinite,
    Finite(usize),
}

impl HeatParams {
    pub fn new(n: f64, sigma: f64, kappa: f64) -> Result<Self, HeatError> {
        if !(n > 2.0) {
            return Err(HeatError::Dimension(n));
        }
        if !(sigma > 0.0) {
            return Err(HeatError::Sigma(sigma));
        }
        if !(kappa > 0.0) {
            return Err(HeatError::Kappa(kappa));
        }
        let p = Self { n, sigma, kappa };
        if !(p.beta() > 0.0) {
            return Err(HeatError::NoSingularState { n, sigma });
        }
        Ok(p)
    }

    /// Constant equilibrium, w̄^{2σ} = κ/σ.
    pub fn abar(&self) -> f64 {
        (self.kappa / self.sigma).powf(0.5 / self.sigma)
    }

    pub fn beta(&self) -> f64 {
        (self.n - 2.0 - 1.0 / self.sigma) / self.sigma
    }

    /// u* = β^{1/(2σ)}, the log-chart value of the singular steady state.
    pub fn singular_amplitude(&self) -> f64 {
        self.beta().powf(0.5 / self.sigma)
    }

    pub fn a_coef(&self) -> f64 {
        self.n - 2.0 - 2.0 / self.sigma
    }

    pub fn b_coef(&self) -> f64 {
        2.0 * (self.n - 2.0 - 1.0 / self.sigma)
    }

    /// σ above σ_s(n), where the tail linearization is damped.
    pub fn is_supercritical(&self) -> bool {
        self.a_coef() > 0.0
    }

    /// n − 10 − 3/σ; negative inside Lepin's existence region.
    pub fn lepin_gap(&self) -> f64 {
        self.n - 10.0 - 3.0 / self.sigma
    }

    /// Roots of λ² + Aλ + B = 0.
    pub fn lambda_roots(&self) -> LambdaRoots {
        let (a, b) = (self.a_coef(), self.b_coef());
        let disc = a * a - 4.0 * b;
        if disc >= 0.0 {
            let q = disc.sqrt();
            LambdaRoots::Real { lambda1: (-a + q) / 2.0, lambda2: (-a - q) / 2.0 }
        } else {
            LambdaRoots::Complex { re: -a / 2.0, im: (-disc).sqrt() / 2.0 }
        }
    }

    /// ν(n, σ) = ⌈−λ₁/2⌉ for real roots.
    pub fn nu(&self) -> Option<usize> {
        match self.lambda_roots() {
            LambdaRoots::Real { lambda1, .. } => {
                let x = -lambda1 / 2.0;
                let k = x.round();
                Some(if (x - k).abs() <= 1e-12 * k.max(1.0) { k } else { x.ceil() }.max(0.0) as usize)
            }
            LambdaRoots::Complex { .. } => None,
        }
    }

    /// Predicted lim j(α) as α → ∞.
    pub fn j_limit_prediction(&self) -> JLimit {
        match self.nu() {
            None => JLimit::Infinite,
            Some(nu) if nu % 2 == 0 => JLimit::Finite(nu),
            Some(nu) => JLimit::Finite(nu + 1),
        }
    }

    pub fn check_radius(&self, r_max: f64) -> Result<(), HeatError> {
        if self.kappa * r_max * r_max / 2.0 > 700.0 {
            Err(HeatError::RadiusGuard(r_max))
        } else {
            Ok(())
        }
    }

    fn power(&self, u: f64) -> f64 {
        u.signum() * u.abs().powf(2.0 * self.sigma + 1.0)
    }
}

impl ProfileEquation for HeatParams {
    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn weight(&self) -> f64 {
        1.0 / self.sigma
    }

    fn level(&self) -> f64 {
        self.abar()
    }

    fn singular_level(&self) -> f64 {
        self.singular_amplitude()
    }

    fn taylor_c2(&self, alpha: f64) -> f64 {
        (self.kappa / self.sigma * alpha - self.power(alpha)) / (2.0 * self.n)
    }

    fn core_radius(&self, alpha: f64) -> f64 {
        alpha.powf(-self.sigma).min(1.0 / self.kappa.sqrt())
    }

    fn u_accel(&self, s: f64, u: f64, up: f64) -> f64 {
        -(self.a_coef() - self.kappa * (2.0 * s).exp()) * up + self.beta() * u - self.power(u)
    }

    fn d_accel(&self, s: f64, d: f64, dp: f64) -> f64 {
        let us = self.singular_amplitude();
        let beta = self.beta();
        // f(u*+d) − f(u*) − βd without cancellation for small d.
        let nl = if d > -us {
            beta * us * ((2.0 * self.sigma + 1.0) * (d / us).ln_1p()).exp_m1() - beta * d
        } else {
            self.power(us + d) - beta * us - beta * d
        };
        -(self.a_coef() - self.kappa * (2.0 * s).exp()) * dp - nl
    }

    fn r_residual(&self, r: f64, w: f64, wp: f64, wpp: f64) -> f64 {
        wpp + (self.n - 1.0) / r * wp - self.kappa * r * wp + self.power(w) - self.kappa / self.sigma * w
    }
}

pub fn shoot_heat(p: &HeatParams, alpha: f64, cfg: &ShootConfig) -> Result<Shot, HeatError> {
    p.check_radius(cfg.r_max)?;
    Ok(shooting::shoot(p, alpha, cfg, true))
}

/// ∂w/∂α at w̄ = 1 − κr²/n, the closed-form linearization.
pub fn linearized_center(p: &HeatParams, r: f64) -> f64 {
    1.0 - p.kappa * r * r / p.n
}

pub fn sensitivity_check(
    p: &HeatParams,
    h: f64,
    radii: &[f64],
    cfg: &ShootConfig,
) -> Result<Vec<SensitivitySample>, HeatError> {
    let a = p.abar();
    let up = shoot_heat(p, a + h, cfg)?;
    let dn = shoot_heat(p, a - h, cfg)?;
    Ok(radii
        .iter()
        .map(|&r| {
            let wu = up.w_at(r).map(|v| v[0]).unwrap_or(f64::NAN);
            let wd = dn.w_at(r).map(|v| v[0]).unwrap_or(f64::NAN);
            SensitivitySample { r, finite_difference: (wu - wd) / (2.0 * h), linearized: linearized_center(p, r) }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatSolveConfig {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub per_decade: usize,
    pub bisect_width: f64,
    pub shoot: ShootConfig,
    pub acceptance: Acceptance,
}

impl Default for HeatSolveConfig {
    fn default() -> Self {
        Self {
            alpha_lo: 1e-3,
            alpha_hi: 1e3,
            per_decade: 400,
            bisect_width: 1e-14,
            shoot: ShootConfig::default(),
            acceptance: Acceptance::default(),
        }
    }
}

impl HeatSolveConfig {
    pub fn window(&self, lo: f64, hi: f64) -> Self {
        Self { alpha_lo: lo, alpha_hi: hi, ..self.clone() }
    }
}

/// Parity of j(α) read off the direction of an i-jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatSolution {
    pub n: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub alpha: f64,
    /// j of the solution itself, counted before the bracket trajectories part.
    pub index_j: usize,
    pub index_i: usize,
    /// From the i-jump: 1 → 3 (α increasing) is even, 3 → 1 is odd.
    pub parity: Option<Parity>,
    pub detected_by: Vec<IndexKind>,
    pub bracket: (f64, f64),
    pub confirmation: Confirmation,
    pub profile: Profile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatSweepRow {
    pub alpha: f64,
    pub index_i: usize,
    pub index_j: usize,
    pub r_alpha: f64,
    pub end: ShotEnd,
    pub tail_limit: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatSolutionSet {
    pub params: HeatParams,
    pub solutions: Vec<HeatSolution>,
    pub suspicious: Vec<HeatSolution>,
    /// Sweep shots with finite R_α and odd j.
    pub odd_j_violations: usize,
    #[serde(skip)]
    pub sweep: Vec<HeatSweepRow>,
}

impl HeatSolutionSet {
    pub fn alphas(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.alpha).collect()
    }
}

fn parity_of(j: &Jump) -> Option<Parity> {
    match (j.kind, j.k_lo, j.k_hi) {
        (IndexKind::I, 1, 3) => Some(Parity::Even),
        (IndexKind::I, 3, 1) => Some(Parity::Odd),
        (IndexKind::J, _, _) => Some(Parity::Even),
        _ => None,
    }
}

pub fn odd_j_count(rows: &[HeatSweepRow]) -> usize {
    rows.iter().filter(|r| r.end == ShotEnd::HitZero && r.index_j % 2 == 1).count()
}

fn solve_grid(p: &HeatParams, grid: &[f64], cfg: &HeatSolveConfig) -> HeatSolutionSet {
    let a = p.abar();
    let below: Vec<f64> = grid.iter().copied().filter(|&x| x < a * (1.0 - 1e-9)).collect();
    let above: Vec<f64> = grid.iter().copied().filter(|&x| x > a * (1.0 + 1e-9)).collect();
    let mut jumps = Vec::new();
    let mut sweep = Vec::new();
    for side in [below, above] {
        let shots = scan(p, &side, &cfg.shoot);
        jumps.extend(grid_jumps(&shots, IndexKind::I));
        jumps.extend(grid_jumps(&shots, IndexKind::J));
        sweep.extend(shots.iter().map(|s| HeatSweepRow {
            alpha: s.alpha,
            index_i: s.index_i,
            index_j: s.index_j,
            r_alpha: s.r_alpha,
            end: s.end,
            tail_limit: s.tail_limit,
        }));
    }
    let refined: Vec<Jump> =
        jumps.par_iter().flat_map_iter(|j| bisect(p, *j, cfg.bisect_width, &cfg.shoot)).collect();
    let candidates: Vec<HeatSolution> = refined
        .par_iter()
        .map(|j| {
            let (mut c, shot) = confirm(p, j, &cfg.shoot, &cfg.acceptance);
            // Unlike the model equation, the tail settles on the singular state.
            let us = p.singular_amplitude();
            if let (true, Some(q)) = (c.accepted, c.plateau) {
                if (q.limit / us - 1.0).abs() > TAIL_TOLERANCE {
                    c.accepted = false;
                    c.reason = Some(format!("tail limit {:.4e} is not u* = {:.4e}", q.limit, us));
                }
            }
            HeatSolution {
                n: p.n,
                sigma: p.sigma,
                kappa: p.kappa,
                alpha: c.alpha,
                index_j: c.index_j,
                index_i: c.index_i,
                parity: parity_of(j),
                detected_by: vec![j.kind],
                bracket: (j.lo, j.hi),
                profile: shot.profile(c.r_split, 400),
                confirmation: c,
            }
        })
        .collect();
    let (ok, bad): (Vec<_>, Vec<_>) = candidates.into_iter().partition(|s| s.confirmation.accepted);
    HeatSolutionSet {
        params: *p,
        solutions: merge_duplicates(ok),
        suspicious: merge_duplicates(bad),
        odd_j_violations: odd_j_count(&sweep),
        sweep,
    }
}

/// An i-jump and a j-jump at the same α describe one solution.
fn merge_duplicates(mut sols: Vec<HeatSolution>) -> Vec<HeatSolution> {
    sols.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
    let mut out: Vec<HeatSolution> = Vec::new();
    for s in sols {
        match out.last_mut() {
            Some(prev) if (s.alpha / prev.alpha - 1.0).abs() < 1e-6 => {
                for k in s.detected_by {
                    if !prev.detected_by.contains(&k) {
                        prev.detected_by.push(k);
                    }
                }
                // The i-jump direction is the only parity witness for odd j.
                if s.parity == Some(Parity::Odd) {
                    prev.parity = s.parity;
                }
            }
            _ => out.push(s),
        }
    }
    out
}

/// Validated solutions with α in the configured range, from jumps of either
/// index.
pub fn find_solutions_heat(p: &HeatParams, cfg: &HeatSolveConfig) -> Result<HeatSolutionSet, HeatError> {
    p.check_radius(cfg.shoot.r_max)?;
    let grid = log_grid(cfg.alpha_lo, cfg.alpha_hi, cfg.per_decade);
    Ok(solve_grid(p, &grid, cfg))
}

/// Measured j(α) at the given α, next to the predicted limit.
pub fn measured_j(p: &HeatParams, alphas: &[f64], cfg: &ShootConfig) -> Vec<(f64, usize)> {
    scan(p, alphas, cfg).into_iter().map(|s| (s.alpha, s.index_j)).collect()
}

/// Straight path in (n, σ) parametrized by t ∈ [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LepinPath {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

impl LepinPath {
    pub fn at(&self, t: f64) -> (f64, f64) {
        (self.start.0 + t * (self.end.0 - self.start.0), self.start.1 + t * (self.end.1 - self.start.1))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LepinConfig {
    pub kappa: f64,
    pub t_step: f64,
    pub min_step: f64,
    /// Largest accepted growth of α* over one step before the step is halved.
    pub max_growth: f64,
    pub divergence: f64,
    pub seed: HeatSolveConfig,
    pub solve: HeatSolveConfig,
}

impl Default for LepinConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            t_step: 0.1,
            min_step: 1e-9,
            max_growth: 4.0,
            divergence: 1e5,
            seed: HeatSolveConfig { alpha_lo: 1.0, alpha_hi: 100.0, ..HeatSolveConfig::default() },
            solve: HeatSolveConfig { per_decade: 300, ..HeatSolveConfig::default() },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LepinPoint {
    pub t: f64,
    pub n: f64,
    pub sigma: f64,
    /// 10 + 3/σ − n.
    pub distance: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LepinStatus {
    Diverged,
    /// Step fell below the minimum without relocating the solution.
    Lost,
    /// Reached t = 1 with the solution still present.
    ReachedEnd,
}

#[derive(Clone, Debug, Serialize)]
pub struct LepinTrace {
    pub path: LepinPath,
    pub points: Vec<LepinPoint>,
    pub status: LepinStatus,
    /// Last interval in t between the final accepted point and the failed try.
    pub last_bracket: Option<(f64, f64)>,
    /// Slope of log α* against log(10 + 3/σ − n).
    pub growth_exponent: Option<f64>,
}

fn j2_near(p: &HeatParams, alpha_prev: f64, cfg: &HeatSolveConfig, reach: f64) -> Option<HeatSolution> {
    let grid = log_grid(alpha_prev / 1.5, alpha_prev * reach, cfg.per_decade);
    let set = solve_grid(p, &grid, cfg);
    set.solutions.into_iter().filter(|s| s.index_j == 2).min_by(|x, y| {
        let dx = (x.alpha / alpha_prev).ln().abs();
        let dy = (y.alpha / alpha_prev).ln().abs();
        dx.partial_cmp(&dy).unwrap()
    })
}

/// Follow the j = 2 solution with the smallest α along `path`.
pub fn lepin_scan(path: LepinPath, cfg: &LepinConfig) -> Result<LepinTrace, HeatError> {
    let (n0, s0) = path.at(0.0);
    let p0 = HeatParams::new(n0, s0, cfg.kappa)?;
    let seed = find_solutions_heat(&p0, &cfg.seed)?;
    let first = seed.solutions.iter().find(|s| s.index_j == 2).ok_or(HeatError::NoSeed)?;
    let point = |t: f64, a: f64| {
        let (n, sigma) = path.at(t);
        LepinPoint { t, n, sigma, distance: 10.0 + 3.0 / sigma - n, alpha: a }
    };
    let mut points = vec![point(0.0, first.alpha)];
    let mut step = cfg.t_step;
    let (mut t, mut a) = (0.0, first.alpha);
    let finish = |points: Vec<LepinPoint>, status, last_bracket| {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            points.iter().filter(|q| q.distance > 0.0).map(|q| (q.distance.ln(), q.alpha.ln())).unzip();
        let growth_exponent = linear_fit(&xs, &ys).map(|f| f.slope);
        LepinTrace { path, points, status, last_bracket, growth_exponent }
    };
    while t < 1.0 {
        let t_try = (t + step).min(1.0);
        let (n, sigma) = path.at(t_try);
        let p = HeatParams::new(n, sigma, cfg.kappa)?;
        match j2_near(&p, a, &cfg.solve, 2.0 * cfg.max_growth) {
            Some(s) if s.alpha <= cfg.max_growth * a => {
                t = t_try;
                a = s.alpha;
                points.push(point(t, a));
                if a > cfg.divergence {
                    return Ok(finish(points, LepinStatus::Diverged, None));
                }
            }
            _ => {
                if step <= cfg.min_step {
                    return Ok(finish(points, LepinStatus::Lost, Some((t, t_try))));
                }
                step *= 0.5;
            }
        }
    }
    Ok(finish(points, LepinStatus::ReachedEnd, None))
}
