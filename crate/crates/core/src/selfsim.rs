//! Self-similar blow-up profiles of the radial model equation.
//!
//! The profile w(r) solves
//!
//! ```text
//! w'' + (n+1)/r w' − κ r w' + 3 r w w' + (n+2) w² − 2κ w = 0,
//! w(0) = α, w'(0) = 0,   w(r) ~ r⁻² as r → ∞,
//! ```
//!
//! and is found by shooting on α. In the log chart u = r²w obeys
//! u'' + (n−4+3u)u' + (n−4)u² − 2(n−2)u = κ e^{2s} u'.

use crate::shooting::{
    self, bisect, confirm, grid_jumps, log_grid, merge_grids, near_level_grid, scan, Acceptance, Confirmation,
    IndexKind, Jump, ProfileEquation, ShootConfig, Shot, ShotEnd,
};
use crate::specfun::{kummer_m, kummer_zeros, KummerArgs, SpecfunError, ZeroSearch};
use crate::profile::{linear_fit, Profile};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub type ShootOutcome = Shot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelfSimError {
    #[error("dimension n = {0} must exceed 4 for non-trivial profiles")]
    Dimension(f64),
    #[error("κ = {0} must be positive")]
    Kappa(f64),
    #[error("R_max = {0} violates the κR²/2 ≤ 700 guard")]
    RadiusGuard(f64),
    #[error("seed α = {alpha} at n = {n} is not a validated solution")]
    InvalidSeed { n: f64, alpha: f64 },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfSimParams {
    pub n: f64,
    pub kappa: f64,
}

impl SelfSimParams {
    pub fn new(n: f64, kappa: f64) -> Result<Self, SelfSimError> {
        if !(n > 4.0) {
            return Err(SelfSimError::Dimension(n));
        }
        if !(kappa > 0.0) {
            return Err(SelfSimError::Kappa(kappa));
        }
        Ok(Self { n, kappa })
    }

    /// Shooting is also meaningful for 2 < n ≤ 4 (no solutions exist there).
    pub fn any_dimension(n: f64, kappa: f64) -> Self {
        Self { n, kappa }
    }

    /// Trivial equilibrium w̄ = 2κ/(n+2).
    pub fn abar(&self) -> f64 {
        2.0 * self.kappa / (self.n + 2.0)
    }

    /// β_n = 2(n−2)/(n−4), the limit of r²V for the steady profile.
    pub fn beta(&self) -> f64 {
        2.0 * (self.n - 2.0) / (self.n - 4.0)
    }

    /// (n+2)/(n−4), minus the first Kummer parameter of the linearization.
    pub fn ratio(&self) -> f64 {
        (self.n + 2.0) / (self.n - 4.0)
    }

    /// ν(n) = ⌈(n+2)/(n−4)⌉.
    pub fn nu(&self) -> usize {
        crate::specfun::predicted_zero_count(-self.ratio())
    }

    /// Whether (n+2)/(n−4) is an integer, to within `tol`.
    pub fn is_boundary(&self, tol: f64) -> bool {
        let q = self.ratio();
        (q - q.round()).abs() <= tol
    }

    /// Solution count ν(n) − 2 expected away from integer ratios.
    pub fn predicted_count(&self) -> usize {
        self.nu().saturating_sub(2)
    }

    /// Predicted i(α) just above and just below w̄.
    pub fn predicted_near_limits(&self) -> (usize, usize) {
        let nu = self.nu();
        if nu % 2 == 1 {
            (nu, nu + 1)
        } else {
            (nu + 1, nu)
        }
    }

    pub fn check_radius(&self, r_max: f64) -> Result<(), SelfSimError> {
        if self.kappa * r_max * r_max / 2.0 > 700.0 {
            Err(SelfSimError::RadiusGuard(r_max))
        } else {
            Ok(())
        }
    }
}

impl ProfileEquation for SelfSimParams {
    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn weight(&self) -> f64 {
        2.0
    }

    fn level(&self) -> f64 {
        self.abar()
    }

    fn singular_level(&self) -> f64 {
        self.beta()
    }

    fn taylor_c2(&self, alpha: f64) -> f64 {
        (2.0 * self.kappa * alpha - (self.n + 2.0) * alpha * alpha) / (2.0 * (self.n + 2.0))
    }

    fn core_radius(&self, alpha: f64) -> f64 {
        1.0 / alpha.max(self.kappa).sqrt()
    }

    fn u_accel(&self, s: f64, u: f64, up: f64) -> f64 {
        let n = self.n;
        -(n - 4.0 + 3.0 * u - self.kappa * (2.0 * s).exp()) * up - (n - 4.0) * u * u + 2.0 * (n - 2.0) * u
    }

    fn d_accel(&self, s: f64, d: f64, dp: f64) -> f64 {
        let n = self.n;
        -(n - 4.0 + 3.0 * self.beta() + 3.0 * d - self.kappa * (2.0 * s).exp()) * dp
            - 2.0 * (n - 2.0) * d
            - (n - 4.0) * d * d
    }

    fn r_residual(&self, r: f64, w: f64, wp: f64, wpp: f64) -> f64 {
        let n = self.n;
        wpp + (n + 1.0) / r * wp - self.kappa * r * wp + 3.0 * r * w * wp + (n + 2.0) * w * w - 2.0 * self.kappa * w
    }
}

pub fn shoot(p: &SelfSimParams, alpha: f64, cfg: &ShootConfig) -> Result<ShootOutcome, SelfSimError> {
    p.check_radius(cfg.r_max)?;
    Ok(shooting::shoot(p, alpha, cfg, true))
}

pub fn index_profile(p: &SelfSimParams, alphas: &[f64], cfg: &ShootConfig) -> Vec<(f64, usize)> {
    scan(p, alphas, cfg).into_iter().map(|s| (s.alpha, s.index_i)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndexLimits {
    pub near_plus: usize,
    pub near_minus: usize,
    pub large: usize,
    pub small: usize,
    pub predicted_plus: usize,
    pub predicted_minus: usize,
}

impl IndexLimits {
    pub fn holds(&self) -> bool {
        self.near_plus == self.predicted_plus
            && self.near_minus == self.predicted_minus
            && self.large == 3
            && self.small == 2
    }
}

/// i(α) at ᾱ(1 ± δ), at `large` and at `small`.
pub fn index_limits(p: &SelfSimParams, delta: f64, large: f64, small: f64, cfg: &ShootConfig) -> IndexLimits {
    let a = p.abar();
    let ks = index_profile(p, &[a * (1.0 + delta), a * (1.0 - delta), large, small], cfg);
    let (pp, pm) = p.predicted_near_limits();
    IndexLimits {
        near_plus: ks[0].1,
        near_minus: ks[1].1,
        large: ks[2].1,
        small: ks[3].1,
        predicted_plus: pp,
        predicted_minus: pm,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveConfig {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub per_decade: usize,
    /// Relative offsets |α/ᾱ − 1| covered by the refinement around ᾱ.
    pub near_lo: f64,
    pub near_hi: f64,
    pub near_per_decade: usize,
    pub bisect_width: f64,
    pub shoot: ShootConfig,
    pub acceptance: Acceptance,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            alpha_lo: 1e-5,
            alpha_hi: 1e3,
            per_decade: 2000,
            near_lo: 1e-8,
            near_hi: 0.3,
            near_per_decade: 40,
            bisect_width: 1e-15,
            shoot: ShootConfig::default(),
            acceptance: Acceptance::default(),
        }
    }
}

impl SolveConfig {
    /// Restrict to a window, keeping the near-ᾱ refinement inside it.
    pub fn window(&self, lo: f64, hi: f64) -> Self {
        Self { alpha_lo: lo, alpha_hi: hi, ..self.clone() }
    }

    /// The κ = 1 configuration carried over to another gauge: α scales like
    /// κ and radii like 1/√κ.
    pub fn for_kappa(&self, kappa: f64) -> Self {
        Self {
            alpha_lo: self.alpha_lo * kappa,
            alpha_hi: self.alpha_hi * kappa,
            shoot: self.shoot.for_kappa(kappa),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub n: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub index_i: usize,
    pub bracket: (f64, f64),
    pub confirmation: Confirmation,
    /// Set for the limit point of a branch that ends exactly at this
    /// dimension; evaluated just below it.
    pub boundary: Option<BoundaryTag>,
    pub profile: Profile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryTag {
    pub evaluated_at_n: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub index_i: usize,
    pub r_alpha: f64,
    pub end: ShotEnd,
    pub tail_limit: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSet {
    pub n: f64,
    pub kappa: f64,
    pub solutions: Vec<Solution>,
    /// Jumps that failed validation.
    pub suspicious: Vec<Solution>,
    /// ν(n) − 2, or `None` at integer-ratio dimensions.
    pub predicted_count: Option<usize>,
    #[serde(skip)]
    pub sweep: Vec<SweepRow>,
}

impl SolutionSet {
    /// Validated solutions that are not boundary limit points.
    pub fn interior(&self) -> impl Iterator<Item = &Solution> {
        self.solutions.iter().filter(|s| s.boundary.is_none())
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.alpha).collect()
    }
}

fn build_grid(p: &SelfSimParams, cfg: &SolveConfig) -> (Vec<f64>, Vec<f64>) {
    let a = p.abar();
    let global = log_grid(cfg.alpha_lo, cfg.alpha_hi, cfg.per_decade);
    let near = near_level_grid(a, cfg.near_lo, cfg.near_hi, cfg.near_per_decade);
    let all = merge_grids(&[global, near]);
    let margin = 0.5 * cfg.near_lo * a;
    let below: Vec<f64> =
        all.iter().copied().filter(|&x| x < a - margin && x >= cfg.alpha_lo && x <= cfg.alpha_hi).collect();
    let above: Vec<f64> =
        all.iter().copied().filter(|&x| x > a + margin && x >= cfg.alpha_lo && x <= cfg.alpha_hi).collect();
    (below, above)
}

/// Bisect and validate jumps of i(α) into solutions.
fn resolve<E: ProfileEquation>(
    eq: &E,
    jumps: Vec<Jump>,
    cfg: &SolveConfig,
    make: impl Fn(&Jump, Confirmation, Profile) -> Solution + Sync,
) -> (Vec<Solution>, Vec<Solution>) {
    let refined: Vec<Jump> =
        jumps.par_iter().flat_map_iter(|j| bisect(eq, *j, cfg.bisect_width, &cfg.shoot)).collect();
    let confirmed: Vec<Solution> = refined
        .par_iter()
        .map(|j| {
            let (c, shot) = confirm(eq, j, &cfg.shoot, &cfg.acceptance);
            let profile = shot.profile(c.r_split, 400);
            make(j, c, profile)
        })
        .collect();
    let (mut ok, mut bad): (Vec<Solution>, Vec<Solution>) =
        confirmed.into_iter().partition(|s| s.confirmation.accepted);
    ok.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
    bad.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
    (ok, bad)
}

fn solutions_in_grid(p: &SelfSimParams, cfg: &SolveConfig) -> (Vec<Solution>, Vec<Solution>, Vec<SweepRow>) {
    let (below, above) = build_grid(p, cfg);
    let shots_b = scan(p, &below, &cfg.shoot);
    let shots_a = scan(p, &above, &cfg.shoot);
    let mut jumps = grid_jumps(&shots_b, IndexKind::I);
    jumps.extend(grid_jumps(&shots_a, IndexKind::I));
    let sweep = shots_b
        .iter()
        .chain(&shots_a)
        .map(|s| SweepRow { alpha: s.alpha, index_i: s.index_i, r_alpha: s.r_alpha, end: s.end, tail_limit: s.tail_limit })
        .collect();
    let (ok, bad) = resolve(p, jumps, cfg, |j, c, profile| Solution {
        n: p.n,
        kappa: p.kappa,
        alpha: c.alpha,
        index_i: j.k_lo.min(j.k_hi),
        bracket: (j.lo, j.hi),
        confirmation: c,
        boundary: None,
        profile,
    });
    (ok, bad, sweep)
}

/// Every validated solution with α in the configured range.
///
/// At dimensions where (n+2)/(n−4) = k is an integer, branch k ends exactly
/// here by merging into ᾱ. Its limit point is reported as an extra solution
/// tagged `boundary`, evaluated slightly below n.
pub fn find_solutions(p: &SelfSimParams, cfg: &SolveConfig) -> Result<SolutionSet, SelfSimError> {
    p.check_radius(cfg.shoot.r_max)?;
    let (mut solutions, suspicious, sweep) = solutions_in_grid(p, cfg);
    let boundary = p.is_boundary(1e-9);
    if boundary {
        let k = p.ratio().round() as usize;
        let a = p.abar();
        let near = |s: &Solution| s.index_i == k && (s.alpha / a - 1.0).abs() < 0.05;
        if let Some(s) = solutions.iter_mut().find(|s| near(s)) {
            s.boundary = Some(BoundaryTag { evaluated_at_n: p.n });
        } else {
            let nb = p.n - 1e-3;
            let pb = SelfSimParams { n: nb, ..*p };
            let ab = pb.abar();
            let (found, _, _) = solutions_in_grid(&pb, &cfg.window(ab * 0.95, ab * 1.05));
            if let Some(s) = found.into_iter().find(|s| s.index_i == k) {
                solutions.push(Solution { boundary: Some(BoundaryTag { evaluated_at_n: nb }), n: p.n, ..s });
            }
            solutions.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
        }
    }
    Ok(SolutionSet {
        n: p.n,
        kappa: p.kappa,
        solutions,
        suspicious,
        predicted_count: (!boundary).then(|| p.predicted_count()),
        sweep,
    })
}

/// Z(r) = M(−(n+2)/(n−4), (n+2)/2, κ(n−4)r²/(2(n+2))), the sensitivity ∂w/∂α
/// at the trivial equilibrium.
pub fn linearized_center(p: &SelfSimParams, r: f64) -> Result<f64, SelfSimError> {
    let x = p.kappa * (p.n - 4.0) / (p.n + 2.0) * r * r / 2.0;
    Ok(kummer_m(KummerArgs::new(-p.ratio(), (p.n + 2.0) / 2.0, x))?)
}

/// Positive zeros of the linearized center solution, as values of x.
pub fn center_zero_count(p: &SelfSimParams) -> Result<ZeroSearch, SelfSimError> {
    Ok(kummer_zeros(-p.ratio(), (p.n + 2.0) / 2.0, 400.0)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensitivitySample {
    pub r: f64,
    pub finite_difference: f64,
    pub linearized: f64,
}

/// Central difference (w_{ᾱ+h} − w_{ᾱ−h})/(2h) against the linearization.
pub fn sensitivity_check(
    p: &SelfSimParams,
    h: f64,
    radii: &[f64],
    cfg: &ShootConfig,
) -> Result<Vec<SensitivitySample>, SelfSimError> {
    let a = p.abar();
    let up = shoot(p, a + h, cfg)?;
    let dn = shoot(p, a - h, cfg)?;
    radii
        .iter()
        .map(|&r| {
            let wu = up.w_at(r).map(|v| v[0]).unwrap_or(f64::NAN);
            let wd = dn.w_at(r).map(|v| v[0]).unwrap_or(f64::NAN);
            Ok(SensitivitySample { r, finite_difference: (wu - wd) / (2.0 * h), linearized: linearized_center(p, r)? })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailLinearization {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Kummer parameters of the far-field factor M(λ₁/2, b₁, κe^{2s}/2).
    pub a1: f64,
    pub b1: f64,
    pub kummer_roots: usize,
}

/// Roots of λ² + (n−4+3β)λ + 2(n−2) = 0, the linearization of the log-chart
/// equation at u = β.
pub fn tail_linearization(p: &SelfSimParams) -> Result<TailLinearization, SelfSimError> {
    let damping = p.n - 4.0 + 3.0 * p.beta();
    let c = 2.0 * (p.n - 2.0);
    let disc = (damping * damping - 4.0 * c).sqrt();
    let lambda1 = (-damping + disc) / 2.0;
    let lambda2 = (-damping - disc) / 2.0;
    let a1 = lambda1 / 2.0;
    let b1 = 1.0 + lambda1 + damping / 2.0;
    let roots = kummer_zeros(a1, b1, 600.0)?.roots.len();
    Ok(TailLinearization { lambda1, lambda2, a1, b1, kummer_roots: roots })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproximantFit {
    pub gamma: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    /// max |u − U| / β over the window.
    pub max_deviation: f64,
}

/// Least-squares fit of U = β − γ e^{λ₁s} M(λ₁/2, b₁, κe^{2s}/2) to a shot
/// between `r_lo` and the first crossing of ᾱ (or `r_hi`).
pub fn fit_tail_approximant(
    p: &SelfSimParams,
    shot: &Shot,
    r_lo: f64,
    r_hi: f64,
) -> Result<ApproximantFit, SelfSimError> {
    let tl = tail_linearization(p)?;
    let beta = p.beta();
    let r_hi = shot.level_crossings.first().copied().unwrap_or(r_hi).min(r_hi).min(shot.s_stop.exp());
    let mut basis = Vec::new();
    let mut dev = Vec::new();
    for k in 0..=200 {
        let r = r_lo * (r_hi / r_lo).powf(k as f64 / 200.0);
        let s = r.ln();
        let Some([u, _]) = shot.u_at(s) else { continue };
        let x = p.kappa * (2.0 * s).exp() / 2.0;
        let phi = (tl.lambda1 * s).exp() * kummer_m(KummerArgs::new(tl.a1, tl.b1, x.min(700.0)))?;
        basis.push(phi);
        dev.push(beta - u);
    }
    let num: f64 = basis.iter().zip(&dev).map(|(b, d)| b * d).sum();
    let den: f64 = basis.iter().map(|b| b * b).sum();
    let gamma = num / den;
    let max_deviation =
        basis.iter().zip(&dev).map(|(b, d)| (d - gamma * b).abs() / beta).fold(0.0, f64::max);
    Ok(ApproximantFit { gamma, r_lo, r_hi, max_deviation })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchSample {
    pub n: f64,
    pub alpha: f64,
    pub kappa: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchEnd {
    /// The index jump could no longer be found; the solution merged into ᾱ
    /// or otherwise ceased to exist.
    JumpLost,
    /// α* exceeded the divergence threshold.
    Diverged,
    /// Continuation reached the requested limit without terminating.
    ReachedLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    pub index_i: usize,
    pub samples: Vec<BranchSample>,
    pub end: BranchEnd,
    /// Interval in n containing the termination point.
    pub termination: Option<(f64, f64)>,
}

impl Branch {
    pub fn termination_estimate(&self) -> Option<f64> {
        self.termination.map(|(a, b)| 0.5 * (a + b))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationConfig {
    pub n_step: f64,
    pub min_step: f64,
    pub n_limit: f64,
    pub alpha_cap: f64,
    pub solve: SolveConfig,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self { n_step: 0.05, min_step: 0.008, n_limit: 12.0, alpha_cap: 1e6, solve: SolveConfig::default() }
    }
}

/// Local search for the index-`k` solution near `alpha_prev` at a new `n`.
fn relocate(p: &SelfSimParams, alpha_prev: f64, abar_prev: f64, k: usize, cfg: &SolveConfig) -> Option<f64> {
    let a = p.abar();
    let rel_prev = alpha_prev / abar_prev - 1.0;
    let grid: Vec<f64> = if rel_prev.abs() < 0.05 {
        let d = rel_prev.abs();
        let side = rel_prev.signum();
        log_grid((d * 1e-4).max(1e-10), (d * 20.0).min(0.5), 40).into_iter().map(|x| a * (1.0 + side * x)).collect()
    } else {
        let side = rel_prev.signum();
        log_grid(alpha_prev / 1.6, alpha_prev * 1.6, 300)
            .into_iter()
            .filter(|&x| (x / a - 1.0) * side > 1e-10)
            .collect()
    };
    let mut grid = grid;
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let shots = scan(p, &grid, &cfg.shoot);
    let jumps: Vec<Jump> =
        grid_jumps(&shots, IndexKind::I).into_iter().filter(|j| j.k_lo.min(j.k_hi) == k).collect();
    let (ok, _) = resolve(p, jumps, cfg, |j, c, profile| Solution {
        n: p.n,
        kappa: p.kappa,
        alpha: c.alpha,
        index_i: j.k_lo.min(j.k_hi),
        bracket: (j.lo, j.hi),
        confirmation: c,
        boundary: None,
        profile,
    });
    ok.into_iter()
        .filter(|s| s.index_i == k)
        .min_by(|x, y| {
            let dx = (x.alpha / alpha_prev).ln().abs();
            let dy = (y.alpha / alpha_prev).ln().abs();
            dx.partial_cmp(&dy).unwrap()
        })
        .map(|s| s.alpha)
}

/// Follow the solution of index `k` from `(n0, alpha0)` towards `cfg.n_limit`.
pub fn continue_branch(
    kappa: f64,
    n0: f64,
    alpha0: f64,
    k: usize,
    cfg: &ContinuationConfig,
) -> Result<Branch, SelfSimError> {
    let p0 = SelfSimParams::new(n0, kappa)?;
    let check = relocate(&p0, alpha0, p0.abar(), k, &cfg.solve)
        .ok_or(SelfSimError::InvalidSeed { n: n0, alpha: alpha0 })?;
    let dir = (cfg.n_limit - n0).signum();
    let mut samples = vec![BranchSample { n: n0, alpha: check, kappa }];
    let (mut n_cur, mut a_cur) = (n0, check);
    let mut step = cfg.n_step;
    loop {
        let n_try = n_cur + dir * step;
        if (n_try - cfg.n_limit) * dir > 0.0 {
            return Ok(Branch { index_i: k, samples, end: BranchEnd::ReachedLimit, termination: None });
        }
        let p_prev = SelfSimParams::new(n_cur, kappa)?;
        let p = SelfSimParams::new(n_try, kappa)?;
        match relocate(&p, a_cur, p_prev.abar(), k, &cfg.solve) {
            Some(a) if a > cfg.alpha_cap => {
                let bracket = (n_cur.min(n_try), n_cur.max(n_try));
                return Ok(Branch { index_i: k, samples, end: BranchEnd::Diverged, termination: Some(bracket) });
            }
            Some(a) => {
                samples.push(BranchSample { n: n_try, alpha: a, kappa });
                n_cur = n_try;
                a_cur = a;
            }
            None => {
                if step <= cfg.min_step {
                    let bracket = (n_cur.min(n_try), n_cur.max(n_try));
                    return Ok(Branch { index_i: k, samples, end: BranchEnd::JumpLost, termination: Some(bracket) });
                }
                step *= 0.5;
            }
        }
    }
}

/// Residual of the r-chart ODE along a profile, by differentiating the
/// interpolated derivative.
pub fn profile_residual(p: &SelfSimParams, shot: &Shot, radii: &[f64]) -> f64 {
    radii
        .iter()
        .filter_map(|&r| {
            let h = 1e-5 * r;
            let [w, wp] = shot.w_at(r)?;
            let [_, wp_plus] = shot.w_at(r + h)?;
            let [_, wp_minus] = shot.w_at(r - h)?;
            let wpp = (wp_plus - wp_minus) / (2.0 * h);
            Some(p.r_residual(r, w, wp, wpp).abs())
        })
        .fold(0.0, f64::max)
}

/// Linear regression of log α* on log(n_end − n) for a branch that diverges.
pub fn growth_exponent(samples: &[(f64, f64)], n_end: f64) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|(n, _)| n_end - n > 0.0).map(|(n, a)| ((n_end - n).ln(), a.ln())).unzip();
    linear_fit(&xs, &ys).map(|f| f.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> SelfSimParams {
        SelfSimParams::new(5.0, 1.0).unwrap()
    }

    #[test]
    fn derived_constants() {
        let p = p5();
        assert!((p.abar() - 2.0 / 7.0).abs() < 1e-15);
        assert_eq!(p.beta(), 6.0);
        assert_eq!(p.nu(), 7);
        assert_eq!(p.predicted_near_limits(), (7, 8));
        assert_eq!(SelfSimParams::new(8.0, 1.0).unwrap().predicted_near_limits(), (3, 4));
        assert!(SelfSimParams::new(6.0, 1.0).unwrap().is_boundary(1e-12));
        assert!(SelfSimParams::new(4.0, 1.0).is_err());
    }

    #[test]
    fn equilibrium_shot() {
        let p = p5();
        let s = shoot(&p, p.abar(), &ShootConfig::default()).unwrap();
        assert_eq!(s.end, ShotEnd::Equilibrium);
        assert_eq!(s.index_i, 0);
        let [w, _] = s.w_at(3.0).unwrap();
        assert!((w - p.abar()).abs() < 1e-14);
    }

    #[test]
    fn large_alpha_hits_zero_with_index_three() {
        let s = shoot(&p5(), 10.0, &ShootConfig::default()).unwrap();
        assert_eq!(s.end, ShotEnd::HitZero);
        assert_eq!(s.index_i, 3);
        assert!(s.r_alpha.is_finite());
        let [w, _] = s.w_at(s.r_alpha).unwrap();
        assert!(w.abs() < 1e-8);
    }

    #[test]
    fn taylor_start_solves_ode() {
        let p = p5();
        let s = shoot(&p, 0.7, &ShootConfig::default()).unwrap();
        let radii: Vec<f64> = (1..30).map(|k| 0.1 * k as f64).collect();
        assert!(profile_residual(&p, &s, &radii) < 1e-5);
    }

    #[test]
    fn radius_guard() {
        let p = p5();
        let cfg = ShootConfig { r_max: 40.0, ..ShootConfig::default() };
        assert!(matches!(shoot(&p, 0.1, &cfg), Err(SelfSimError::RadiusGuard(_))));
    }

    #[test]
    fn tail_roots_for_n5() {
        let t = tail_linearization(&p5()).unwrap();
        assert!((t.lambda1 - (-19.0 + 337f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(t.lambda2 < -1.0 && -1.0 < t.lambda1 && t.lambda1 < 0.0);
        assert_eq!(t.kummer_roots, 1);
    }

    #[test]
    fn center_zero_counts() {
        for (n, k) in [(5.0, 7), (6.0, 4), (8.0, 3)] {
            let p = SelfSimParams::new(n, 1.0).unwrap();
            assert_eq!(center_zero_count(&p).unwrap().roots.len(), k, "n = {n}");
        }
        assert_eq!(linearized_center(&p5(), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn kappa_gauge() {
        // (α, κ) = (λ²α₀, λ²) reproduces λ² w₀(λ r).
        let cfg = ShootConfig::default();
        let (a0, lam) = (0.7, 1.7f64);
        let base = shoot(&p5(), a0, &cfg).unwrap();
        let scaled = shoot(&SelfSimParams::new(5.0, lam * lam).unwrap(), lam * lam * a0, &cfg.for_kappa(lam * lam)).unwrap();
        for k in 1..20 {
            let r = 0.1 * k as f64;
            let w0 = base.w_at(lam * r).unwrap()[0];
            let w1 = scaled.w_at(r).unwrap()[0];
            assert!((w1 - lam * lam * w0).abs() < 1e-8 * (1.0 + w1.abs()), "r = {r}");
        }
    }
}
