//! Shooting engine shared by the model-equation and heat-equation profile
//! problems.
//!
//! Both profile ODEs are integrated in the log chart s = log r for the
//! rescaled unknown u = r^m w. Away from the origin the trajectory of a
//! boundary-value solution hugs the singular level u_eq, and deviations from
//! it carry all the information that distinguishes neighbouring α. Once u
//! enters the band |u − u_eq| < u_eq/2 the integration continues in the
//! deviation d = u − u_eq, with error control relative to |(d, d')|, so that
//! those deviations keep full relative precision even when they are many
//! orders of magnitude below u_eq.

use crate::ivp::{integrate, DenseOutput, Event, Options, Record, Termination, Tolerances};
use crate::profile::{quadratic_fit, Chart, Profile};
use rayon::prelude::*;
use serde::Serialize;

pub trait ProfileEquation: Sync {
    fn kappa(&self) -> f64;
    /// Exponent m of the rescaling u = r^m w.
    fn weight(&self) -> f64;
    /// Constant equilibrium of the r-chart equation; crossings give i(α).
    fn level(&self) -> f64;
    /// Level of u corresponding to the singular solution; crossings give j(α).
    fn singular_level(&self) -> f64;
    /// Coefficient c₂ of the regular expansion w = α + c₂r² + ….
    fn taylor_c2(&self, alpha: f64) -> f64;
    /// Radius of the core where w drops appreciably from α.
    fn core_radius(&self, alpha: f64) -> f64;
    /// u'' in terms of (s, u, u').
    fn u_accel(&self, s: f64, u: f64, up: f64) -> f64;
    /// d'' in terms of (s, d, d') with d = u − singular_level.
    fn d_accel(&self, s: f64, d: f64, dp: f64) -> f64;
    /// Residual of the r-chart profile ODE.
    fn r_residual(&self, r: f64, w: f64, wp: f64, wpp: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShootConfig {
    pub r_max: f64,
    pub tol: Tolerances,
    /// Start radius as a fraction of min(1, core radius).
    pub start_fraction: f64,
    pub max_steps: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            r_max: 37.0,
            tol: Tolerances::state_norm(1e-11, 1e-300),
            start_fraction: 1e-6,
            max_steps: 400_000,
        }
    }
}

impl ShootConfig {
    /// Same configuration with `r_max` rescaled from κ = 1 to `kappa`.
    pub fn for_kappa(&self, kappa: f64) -> Self {
        Self { r_max: self.r_max / kappa.sqrt(), ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotEnd {
    HitZero,
    SurvivedToRmax,
    Overflow,
    /// α sits on the constant equilibrium; no integration performed.
    Equilibrium,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PhaseKind {
    Direct,
    Deviation,
}

#[derive(Clone, Debug)]
struct Phase {
    kind: PhaseKind,
    dense: DenseOutput<2>,
}

#[derive(Clone, Debug)]
pub struct Shot {
    pub alpha: f64,
    /// First zero of w, or +∞.
    pub r_alpha: f64,
    pub index_i: usize,
    pub index_j: usize,
    pub end: ShotEnd,
    /// Radii where w crosses the constant equilibrium.
    pub level_crossings: Vec<f64>,
    /// Radii where u crosses the singular level.
    pub singular_crossings: Vec<f64>,
    pub s_start: f64,
    pub s_stop: f64,
    pub s_switch: Option<f64>,
    pub tail_limit: Option<f64>,
    m: f64,
    u_eq: f64,
    phases: Vec<Phase>,
}

impl Shot {
    /// Dense (u, u') at s, when the shot was recorded densely.
    pub fn u_at(&self, s: f64) -> Option<[f64; 2]> {
        if self.end == ShotEnd::Equilibrium {
            let u = self.alpha * (self.m * s).exp();
            return Some([u, self.m * u]);
        }
        for ph in &self.phases {
            if let Some(y) = ph.dense.eval(s) {
                return Some(match ph.kind {
                    PhaseKind::Direct => y,
                    PhaseKind::Deviation => [y[0] + self.u_eq, y[1]],
                });
            }
        }
        None
    }

    /// (w, w') at radius r.
    pub fn w_at(&self, r: f64) -> Option<[f64; 2]> {
        let s = r.ln();
        let [u, up] = self.u_at(s)?;
        let w = u * (-self.m * s).exp();
        let wp = (up - self.m * u) * (-(self.m + 1.0) * s).exp();
        Some([w, wp])
    }

    pub fn is_dense(&self) -> bool {
        !self.phases.is_empty() || self.end == ShotEnd::Equilibrium
    }

    /// r-chart profile of w on `[r_lo, r_hi]` with `n` log-spaced samples
    /// plus the origin value.
    pub fn profile(&self, r_hi: f64, n: usize) -> Profile {
        let r_lo = self.s_start.exp();
        let r_hi = r_hi.min(self.s_stop.exp());
        let mut xs = vec![0.0];
        let mut vs = vec![self.alpha];
        let mut ds = vec![0.0];
        for k in 0..n {
            let r = r_lo * (r_hi / r_lo).powf(k as f64 / (n - 1) as f64);
            if let Some([w, wp]) = self.w_at(r) {
                xs.push(r);
                vs.push(w);
                ds.push(wp);
            }
        }
        Profile::new(Chart::R, xs, vs, ds)
    }
}

fn start_state<E: ProfileEquation>(eq: &E, alpha: f64, r0: f64) -> [f64; 2] {
    let m = eq.weight();
    let c2 = eq.taylor_c2(alpha);
    let w = alpha + c2 * r0 * r0;
    let wp = 2.0 * c2 * r0;
    let rm = r0.powf(m);
    [rm * w, m * rm * w + rm * r0 * wp]
}

pub fn start_radius<E: ProfileEquation>(eq: &E, alpha: f64, cfg: &ShootConfig) -> f64 {
    cfg.start_fraction * eq.core_radius(alpha).min(1.0)
}

/// Shoot from the origin with w(0) = α.
pub fn shoot<E: ProfileEquation>(eq: &E, alpha: f64, cfg: &ShootConfig, dense: bool) -> Shot {
    let m = eq.weight();
    let level = eq.level();
    let u_eq = eq.singular_level();
    let r0 = start_radius(eq, alpha, cfg);
    let s0 = r0.ln();
    let s1 = cfg.r_max.ln();
    let mut shot = Shot {
        alpha,
        r_alpha: f64::INFINITY,
        index_i: 0,
        index_j: 0,
        end: ShotEnd::SurvivedToRmax,
        level_crossings: Vec::new(),
        singular_crossings: Vec::new(),
        s_start: s0,
        s_stop: s1,
        s_switch: None,
        tail_limit: None,
        m,
        u_eq,
        phases: Vec::new(),
    };
    if (alpha - level).abs() <= 1e-14 * level {
        shot.end = ShotEnd::Equilibrium;
        shot.tail_limit = None;
        return shot;
    }
    let record = if dense { Record::Dense } else { Record::EndOnly };
    let opts = Options { tol: cfg.tol, max_steps: cfg.max_steps, record, ..Options::default() };

    let direct = |s: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
        dy[0] = y[1];
        dy[1] = eq.u_accel(s, y[0], y[1]);
    };
    let events = [
        Event::new(|_s, y: &[f64; 2]| y[0]).falling().terminal(),
        Event::new(move |s, y: &[f64; 2]| y[0] * (-m * s).exp() - level),
        Event::new(move |_s, y: &[f64; 2]| y[0] - u_eq),
        Event::new(move |_s, y: &[f64; 2]| if u_eq > 0.0 { (y[0] - u_eq).abs() - 0.5 * u_eq } else { 1.0 })
            .falling()
            .terminal(),
    ];
    let y0 = start_state(eq, alpha, r0);
    let tr = integrate(&direct, y0, s0, s1, &opts, &events);
    let mut stop = tr.termination;
    let mut s_end = tr.t_end();
    let mut hit_zero = false;
    let mut switch_at = None;
    for e in &tr.events {
        match e.id {
            0 => hit_zero = true,
            1 => shot.level_crossings.push(e.t.exp()),
            2 => shot.singular_crossings.push(e.t.exp()),
            _ => switch_at = Some((e.t, e.y)),
        }
    }
    if let Some(d) = tr.dense {
        shot.phases.push(Phase { kind: PhaseKind::Direct, dense: d });
    }

    if let (Some((ss, ys)), false) = (switch_at, hit_zero) {
        shot.s_switch = Some(ss);
        let deviation = |s: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = eq.d_accel(s, y[0], y[1]);
        };
        let events = [
            Event::new(move |_s, y: &[f64; 2]| y[0] + u_eq).falling().terminal(),
            Event::new(move |s, y: &[f64; 2]| (y[0] + u_eq) * (-m * s).exp() - level),
            Event::new(|_s, y: &[f64; 2]| y[0]),
        ];
        let d0 = [ys[0] - u_eq, ys[1]];
        let opts2 = Options { max_steps: cfg.max_steps.saturating_sub(tr.steps).max(1000), ..opts.clone() };
        let tr2 = integrate(&deviation, d0, ss, s1, &opts2, &events);
        stop = tr2.termination;
        s_end = tr2.t_end();
        for e in &tr2.events {
            match e.id {
                0 => hit_zero = true,
                1 => shot.level_crossings.push(e.t.exp()),
                _ => shot.singular_crossings.push(e.t.exp()),
            }
        }
        if let Some(d) = tr2.dense {
            shot.phases.push(Phase { kind: PhaseKind::Deviation, dense: d });
        }
    }
    shot.s_stop = s_end;
    shot.index_i = shot.level_crossings.len();
    shot.index_j = shot.singular_crossings.len();
    shot.end = if hit_zero {
        shot.r_alpha = s_end.exp();
        ShotEnd::HitZero
    } else {
        match stop {
            Termination::ReachedEnd => ShotEnd::SurvivedToRmax,
            // After the solution leaves its slow manifold it reaches zero
            // with steep slope; an underflowing step there is a blow-down.
            Termination::StepUnderflow | Termination::MaxSteps | Termination::NonFinite => {
                shot.r_alpha = s_end.exp();
                ShotEnd::HitZero
            }
            _ => ShotEnd::Overflow,
        }
    };
    if shot.end == ShotEnd::SurvivedToRmax && dense {
        shot.tail_limit = plateau_fit(&shot, 0.6 * cfg.r_max, cfg.r_max).map(|p| p.limit);
    }
    shot
}

/// Fit `u = limit + slope/r² + curvature/r⁴` on `[r_lo, r_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub limit: f64,
    pub slope: f64,
    pub curvature: f64,
    /// rms misfit relative to |limit|.
    pub residual: f64,
}

pub fn plateau_fit(shot: &Shot, r_lo: f64, r_hi: f64) -> Option<Plateau> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..=60 {
        let r = r_lo + (r_hi - r_lo) * k as f64 / 60.0;
        let [u, _] = shot.u_at(r.ln())?;
        xs.push(1.0 / (r * r));
        ys.push(u);
    }
    let f = quadratic_fit(&xs, &ys)?;
    Some(Plateau { limit: f.c0, slope: f.c1, curvature: f.c2, residual: f.rms / f.c0.abs().max(1e-300) })
}

/// Shots on a grid, without dense output.
pub fn scan<E: ProfileEquation>(eq: &E, alphas: &[f64], cfg: &ShootConfig) -> Vec<Shot> {
    alphas.par_iter().map(|&a| shoot(eq, a, cfg, false)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    I,
    J,
}

impl IndexKind {
    pub fn of(self, shot: &Shot) -> usize {
        match self {
            IndexKind::I => shot.index_i,
            IndexKind::J => shot.index_j,
        }
    }
}

/// A bracket [lo, hi] across which the chosen index changes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub lo: f64,
    pub hi: f64,
    pub k_lo: usize,
    pub k_hi: usize,
    pub kind: IndexKind,
}

/// Adjacent grid pairs with different index; the grid must be sorted and must
/// not straddle the constant equilibrium.
pub fn grid_jumps(shots: &[Shot], kind: IndexKind) -> Vec<Jump> {
    shots
        .windows(2)
        .filter(|w| w[0].end != ShotEnd::Equilibrium && w[1].end != ShotEnd::Equilibrium)
        .filter(|w| kind.of(&w[0]) != kind.of(&w[1]))
        .map(|w| Jump { lo: w[0].alpha, hi: w[1].alpha, k_lo: kind.of(&w[0]), k_hi: kind.of(&w[1]), kind })
        .collect()
}

/// Refine a jump down to neighbouring floating-point values (or relative width
/// `rel_width`). A midpoint whose index matches neither end splits the bracket.
pub fn bisect<E: ProfileEquation>(eq: &E, jump: Jump, rel_width: f64, cfg: &ShootConfig) -> Vec<Jump> {
    let mut out = Vec::new();
    let mut stack = vec![(jump, 0usize)];
    while let Some((j, depth)) = stack.pop() {
        let Jump { mut lo, mut hi, k_lo, k_hi, kind } = j;
        let mut split = false;
        while (hi - lo) > rel_width * hi.abs() {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let k = kind.of(&shoot(eq, mid, cfg, false));
            if k == k_lo {
                lo = mid;
            } else if k == k_hi {
                hi = mid;
            } else {
                if depth < 12 {
                    stack.push((Jump { lo, hi: mid, k_lo, k_hi: k, kind }, depth + 1));
                    stack.push((Jump { lo: mid, hi, k_lo: k, k_hi, kind }, depth + 1));
                }
                split = true;
                break;
            }
        }
        if !split {
            out.push(Jump { lo, hi, k_lo, k_hi, kind });
        }
    }
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Confirmation {
    pub alpha: f64,
    /// Radius where the two bracket trajectories separate.
    pub r_split: f64,
    pub plateau: Option<Plateau>,
    /// Smallest w before the split radius.
    pub min_w: f64,
    /// j(α) of the solution: singular-level crossings before the split.
    pub index_j: usize,
    /// i(α) of the solution: level crossings before the split.
    pub index_i: usize,
    pub accepted: bool,
    pub reason: Option<String>,
}

/// Validation thresholds for a located jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Acceptance {
    /// Minimum separation radius, in units of 1/√κ.
    pub min_split: f64,
    /// Maximum relative rms misfit of the plateau fit.
    pub max_residual: f64,
}

impl Default for Acceptance {
    fn default() -> Self {
        Self { min_split: 4.0, max_residual: 0.02 }
    }
}

/// Check that a refined jump is a boundary-value solution: the trajectories at
/// both bracket ends stay together up to a large radius, stay positive there,
/// and u settles on a positive plateau before they part.
pub fn confirm<E: ProfileEquation>(eq: &E, jump: &Jump, cfg: &ShootConfig, acc: &Acceptance) -> (Confirmation, Shot) {
    let a = shoot(eq, jump.lo, cfg, true);
    let b = shoot(eq, jump.hi, cfg, true);
    let s_lo = a.s_start.max(b.s_start);
    let s_hi = a.s_stop.min(b.s_stop);
    let n = 4000;
    let mut s_split = s_hi;
    let mut min_w = f64::INFINITY;
    for k in 0..=n {
        let s = s_lo + (s_hi - s_lo) * k as f64 / n as f64;
        let (Some([ua, _]), Some([ub, _])) = (a.u_at(s), b.u_at(s)) else { break };
        if (ua - ub).abs() > 1e-3 * ua.abs().max(ub.abs()) {
            s_split = s;
            break;
        }
        min_w = min_w.min(ua.min(ub));
    }
    let r_split = s_split.exp();
    let kappa = eq.kappa();
    let plateau = plateau_fit(&a, 0.6 * r_split, 0.95 * r_split);
    let index_i = a.level_crossings.iter().filter(|&&r| r < r_split).count();
    let index_j = a.singular_crossings.iter().filter(|&&r| r < r_split).count();
    let mut reason = None;
    if r_split * kappa.sqrt() < acc.min_split {
        reason = Some(format!("trajectories separate early, at r = {r_split:.4}"));
    } else if !(min_w > 0.0) {
        reason = Some("profile not positive before separation".into());
    } else {
        match plateau {
            None => reason = Some("plateau fit unavailable".into()),
            Some(p) if !(p.limit > 0.0) => reason = Some(format!("non-positive tail limit {:.4e}", p.limit)),
            Some(p) if p.residual > acc.max_residual => {
                reason = Some(format!("tail not on a plateau (misfit {:.3e})", p.residual))
            }
            _ => {}
        }
    }
    let alpha = 0.5 * (jump.lo + jump.hi);
    let c = Confirmation { alpha, r_split, plateau, min_w, index_j, index_i, accepted: reason.is_none(), reason };
    (c, a)
}

/// Log-spaced grid from `lo` to `hi` with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=n).map(|k| lo * (hi / lo).powf(k as f64 / n as f64)).collect()
}

/// Points ᾱ(1 ± δ) with δ log-spaced on `[d_lo, d_hi]`, sorted, both sides.
pub fn near_level_grid(level: f64, d_lo: f64, d_hi: f64, per_decade: usize) -> Vec<f64> {
    let ds = log_grid(d_lo, d_hi, per_decade);
    let mut g: Vec<f64> = ds.iter().flat_map(|d| [level * (1.0 - d), level * (1.0 + d)]).collect();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g
}

/// Union of grids, sorted, with near-duplicates removed.
pub fn merge_grids(grids: &[Vec<f64>]) -> Vec<f64> {
    let mut g: Vec<f64> = grids.iter().flatten().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    g
}
