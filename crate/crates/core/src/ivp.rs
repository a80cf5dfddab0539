//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)) with
//! 7th-order dense output and event location.
//!
//! States are fixed-size arrays: every system integrated in this crate has
//! two or three components, and keeping them on the stack matters for the
//! shooting sweeps, which run this integrator hundreds of thousands of times.

use crate::tableau::{A, B, C, D, E3, E5, STAGES, STAGES_EXT};
use serde::Serialize;

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]) {
        self(t, y, dy)
    }
}

/// How the per-step error is scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ErrorNorm {
    /// `atol + rtol*|y_i|` per component.
    Componentwise,
    /// `atol + rtol*max|y|` shared by all components. Keeps relative accuracy
    /// when one component passes through zero while the other is large.
    StateNorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub norm: ErrorNorm,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, norm: ErrorNorm::Componentwise }
    }

    pub fn state_norm(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, norm: ErrorNorm::StateNorm }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Rising,
    Falling,
    Any,
}

impl Direction {
    fn accepts(self, g_old: f64, g_new: f64) -> bool {
        match self {
            Direction::Rising => g_old < 0.0 && g_new >= 0.0,
            Direction::Falling => g_old > 0.0 && g_new <= 0.0,
            Direction::Any => (g_old < 0.0 && g_new >= 0.0) || (g_old > 0.0 && g_new <= 0.0),
        }
    }
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// A scalar event function watched along the trajectory.
pub struct Event<'a, const N: usize> {
    g: EventFn<'a, N>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(g: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Self { g: Box::new(g), direction: Direction::Any, terminal: false }
    }

    pub fn rising(mut self) -> Self {
        self.direction = Direction::Rising;
        self
    }

    pub fn falling(mut self) -> Self {
        self.direction = Direction::Falling;
        self
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn eval(&self, t: f64, y: &[f64; N]) -> f64 {
        (self.g)(t, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventRecord<const N: usize> {
    pub id: usize,
    pub t: f64,
    #[serde(with = "arr")]
    pub y: [f64; N],
    /// +1 for an upward crossing, -1 for a downward one.
    pub sense: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    TerminalEvent,
    StepUnderflow,
    StateOverflow,
    MaxSteps,
    NonFinite,
}

/// What the integrator keeps besides events and the final state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Record {
    EndOnly,
    Steps,
    Dense,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub tol: Tolerances,
    pub max_steps: usize,
    pub first_step: Option<f64>,
    pub max_step: f64,
    pub overflow: f64,
    pub record: Record,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_steps: 200_000,
            first_step: None,
            max_step: f64::INFINITY,
            overflow: 1e12,
            record: Record::Steps,
        }
    }
}

impl Options {
    pub fn with_tol(tol: Tolerances) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }
}

/// One step's interpolant: `y(t_old + x*h)` for `x` in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Segment<const N: usize> {
    pub t_old: f64,
    pub h: f64,
    y_old: [f64; N],
    f: [[f64; N]; 7],
}

impl<const N: usize> Segment<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let x = (t - self.t_old) / self.h;
        let mut y = [0.0; N];
        for (i, fi) in self.f.iter().rev().enumerate() {
            for k in 0..N {
                y[k] += fi[k];
                y[k] *= if i % 2 == 0 { x } else { 1.0 - x };
            }
        }
        for k in 0..N {
            y[k] += self.y_old[k];
        }
        y
    }

    pub fn t_new(&self) -> f64 {
        self.t_old + self.h
    }
}

#[derive(Clone, Debug, Default)]
pub struct DenseOutput<const N: usize> {
    pub segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseOutput<N> {
    /// Interpolated state, or `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let first = self.segments.first()?;
        let last = self.segments.last()?;
        let forward = first.h > 0.0;
        let (lo, hi) = if forward { (first.t_old, last.t_new()) } else { (last.t_new(), first.t_old) };
        if t < lo || t > hi {
            return None;
        }
        let idx = self.segments.partition_point(|s| if forward { s.t_new() < t } else { s.t_new() > t });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Some(seg.eval(t))
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub events: Vec<EventRecord<N>>,
    pub termination: Termination,
    pub dense: Option<DenseOutput<N>>,
    pub steps: usize,
    pub rejected: usize,
    pub evals: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn y_end(&self) -> [f64; N] {
        *self.states.last().unwrap()
    }

    pub fn events_of(&self, id: usize) -> impl Iterator<Item = &EventRecord<N>> {
        self.events.iter().filter(move |e| e.id == id)
    }
}

fn norm_inf<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn scale<const N: usize>(tol: &Tolerances, y: &[f64; N], y_new: &[f64; N]) -> [f64; N] {
    let mut sc = [0.0; N];
    match tol.norm {
        ErrorNorm::Componentwise => {
            for k in 0..N {
                sc[k] = tol.atol + tol.rtol * y[k].abs().max(y_new[k].abs());
            }
        }
        ErrorNorm::StateNorm => {
            let s = tol.atol + tol.rtol * norm_inf(y).max(norm_inf(y_new));
            sc = [s; N];
        }
    }
    sc
}

struct Stepper<'s, S, const N: usize> {
    sys: &'s S,
    k: [[f64; N]; STAGES_EXT],
    evals: usize,
}

impl<'s, S: OdeSystem<N>, const N: usize> Stepper<'s, S, N> {
    fn f(&mut self, t: f64, y: &[f64; N]) -> [f64; N] {
        let mut dy = [0.0; N];
        self.sys.rhs(t, y, &mut dy);
        self.evals += 1;
        dy
    }

    /// One trial step; `k[0]` must hold `f(t, y)`. Returns the new state and
    /// the scipy-style combined 5th/3rd-order error norm.
    fn trial(&mut self, t: f64, y: &[f64; N], h: f64, tol: &Tolerances) -> ([f64; N], f64) {
        for s in 1..STAGES {
            let mut ys = *y;
            for j in 0..s {
                let a = A[s][j];
                if a != 0.0 {
                    for c in 0..N {
                        ys[c] += h * a * self.k[j][c];
                    }
                }
            }
            self.k[s] = self.f(t + C[s] * h, &ys);
        }
        let mut y_new = *y;
        for j in 0..STAGES {
            for c in 0..N {
                y_new[c] += h * B[j] * self.k[j][c];
            }
        }
        self.k[STAGES] = self.f(t + h, &y_new);
        let sc = scale(tol, y, &y_new);
        let (mut n5, mut n3) = (0.0, 0.0);
        for c in 0..N {
            let (mut e5, mut e3) = (0.0, 0.0);
            for j in 0..=STAGES {
                e5 += self.k[j][c] * E5[j];
                e3 += self.k[j][c] * E3[j];
            }
            n5 += (e5 / sc[c]).powi(2);
            n3 += (e3 / sc[c]).powi(2);
        }
        let denom = n5 + 0.01 * n3;
        let err = if denom == 0.0 { 0.0 } else { h.abs() * n5 / (denom * N as f64).sqrt() };
        (y_new, err)
    }

    fn segment(&mut self, t: f64, y: &[f64; N], y_new: &[f64; N], h: f64) -> Segment<N> {
        for s in (STAGES + 1)..STAGES_EXT {
            let mut ys = *y;
            for j in 0..s {
                let a = A[s][j];
                if a != 0.0 {
                    for c in 0..N {
                        ys[c] += h * a * self.k[j][c];
                    }
                }
            }
            self.k[s] = self.f(t + C[s] * h, &ys);
        }
        let mut f = [[0.0; N]; 7];
        for c in 0..N {
            let dy = y_new[c] - y[c];
            let f_old = self.k[0][c];
            let f_new = self.k[STAGES][c];
            f[0][c] = dy;
            f[1][c] = h * f_old - dy;
            f[2][c] = 2.0 * dy - h * (f_new + f_old);
            for i in 0..4 {
                let mut acc = 0.0;
                for j in 0..STAGES_EXT {
                    acc += D[i][j] * self.k[j][c];
                }
                f[3 + i][c] = h * acc;
            }
        }
        Segment { t_old: t, h, y_old: *y, f }
    }
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    st: &mut Stepper<'_, S, N>,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    tol: &Tolerances,
    span: f64,
) -> f64 {
    let sc = scale(tol, y0, y0);
    let d0 = (0..N).map(|c| (y0[c] / sc[c]).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let d1 = (0..N).map(|c| (f0[c] / sc[c]).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let mut y1 = *y0;
    for c in 0..N {
        y1[c] += dir * h0 * f0[c];
    }
    let f1 = st.f(t0 + dir * h0, &y1);
    let d2 = (0..N).map(|c| ((f1[c] - f0[c]) / sc[c]).powi(2)).sum::<f64>().sqrt()
        / (N as f64).sqrt()
        / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Root of `g` on the segment between `ta` and `tb` (values of opposite sign),
/// by Illinois-modified regula falsi.
fn locate<const N: usize>(
    ev: &Event<'_, N>,
    seg: &Segment<N>,
    mut ta: f64,
    mut ga: f64,
    mut tb: f64,
    mut gb: f64,
    ttol: f64,
) -> f64 {
    let mut side = 0;
    for _ in 0..200 {
        if (tb - ta).abs() <= ttol {
            break;
        }
        let mut tm = (ta * gb - tb * ga) / (gb - ga);
        if !tm.is_finite() || (tm - ta) * (tm - tb) > 0.0 {
            tm = 0.5 * (ta + tb);
        }
        let gm = ev.eval(tm, &seg.eval(tm));
        if gm == 0.0 {
            return tm;
        }
        if (gm > 0.0) == (gb > 0.0) {
            tb = tm;
            gb = gm;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            ta = tm;
            ga = gm;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    // The bracket end on the far side of the crossing, so the recorded state
    // is already past the event.
    tb
}

/// Integrate `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    opts: &Options,
    events: &[Event<'_, N>],
) -> Trajectory<N> {
    assert!(t0 != t1, "empty integration interval");
    let span = (t1 - t0).abs();
    let dir = (t1 - t0).signum();
    let tol = opts.tol;
    let min_step = 1e-14 * span;
    let ttol = 1e-12 * span;

    let mut st = Stepper { sys, k: [[0.0; N]; STAGES_EXT], evals: 0 };
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        events: Vec::new(),
        termination: Termination::ReachedEnd,
        dense: (opts.record == Record::Dense).then(DenseOutput::default),
        steps: 0,
        rejected: 0,
        evals: 0,
    };
    if y0.iter().any(|v| !v.is_finite()) {
        traj.termination = Termination::NonFinite;
        return traj;
    }

    let mut t = t0;
    let mut y = y0;
    let mut f0 = st.f(t, &y);
    let mut g_old: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();
    let mut h = match opts.first_step {
        Some(h) => h.abs().min(span),
        None => initial_step(&mut st, t0, &y0, &f0, dir, &tol, span),
    }
    .min(opts.max_step);
    let mut err_old: f64 = 1e-4;
    let (alpha, beta) = (0.7 / 8.0, 0.4 / 8.0);

    loop {
        if traj.steps >= opts.max_steps {
            traj.termination = Termination::MaxSteps;
            break;
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < min_step && !last {
            traj.termination = Termination::StepUnderflow;
            break;
        }
        st.k[0] = f0;
        let (y_new, err) = st.trial(t, &y, dir * h, &tol);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            traj.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err > 1.0 {
            traj.rejected += 1;
            let fac = (0.9 * err.powf(-alpha)).clamp(0.2, 1.0);
            h *= fac;
            continue;
        }
        let hs = dir * h;
        let t_new = if last { t1 } else { t + hs };
        let need_segment = opts.record == Record::Dense || !events.is_empty();
        let seg = need_segment.then(|| st.segment(t, &y, &y_new, hs));
        traj.steps += 1;

        // Events, in time order; stop at the first terminal one.
        let mut stop: Option<(f64, [f64; N])> = None;
        if let Some(seg) = seg.as_ref() {
            let mut found: Vec<(f64, usize, i8)> = Vec::new();
            let mut g_new = Vec::with_capacity(events.len());
            for (id, ev) in events.iter().enumerate() {
                let gn = ev.eval(t_new, &y_new);
                g_new.push(gn);
                let go = g_old[id];
                if ev.direction.accepts(go, gn) {
                    let te = locate(ev, seg, t, go, t_new, gn, ttol);
                    found.push((te, id, if gn > go { 1 } else { -1 }));
                }
            }
            found.sort_by(|a, b| (dir * a.0).partial_cmp(&(dir * b.0)).unwrap());
            for (te, id, sense) in found {
                let ye = seg.eval(te);
                traj.events.push(EventRecord { id, t: te, y: ye, sense });
                if events[id].terminal {
                    stop = Some((te, ye));
                    break;
                }
            }
            g_old = g_new;
        }
        if let Some(d) = traj.dense.as_mut() {
            d.segments.push(seg.clone().unwrap());
        }

        if let Some((te, ye)) = stop {
            traj.times.push(te);
            traj.states.push(ye);
            traj.termination = Termination::TerminalEvent;
            break;
        }

        t = t_new;
        y = y_new;
        f0 = st.k[STAGES];
        if opts.record != Record::EndOnly || last {
            traj.times.push(t);
            traj.states.push(y);
        }
        if norm_inf(&y) > opts.overflow {
            if opts.record == Record::EndOnly && !last {
                traj.times.push(t);
                traj.states.push(y);
            }
            traj.termination = Termination::StateOverflow;
            break;
        }
        if last {
            break;
        }
        let fac = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-alpha) * err_old.powf(beta)).clamp(0.2, 10.0)
        };
        err_old = err.max(1e-4);
        h = (h * fac).min(opts.max_step);
    }
    traj.evals = st.evals;
    if opts.record == Record::EndOnly && traj.times.len() == 1 && traj.termination != Termination::ReachedEnd {
        traj.times.push(t);
        traj.states.push(y);
    }
    traj
}

mod arr {
    use serde::ser::{SerializeSeq, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(v: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(N))?;
        for x in v {
            seq.serialize_element(x)?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64; 1], dy: &mut [f64; 1]) {
        dy[0] = -y[0];
    }

    #[test]
    fn linear_decay() {
        let tr = integrate(&decay, [1.0], 0.0, 1.0, &Options::default(), &[]);
        assert_eq!(tr.termination, Termination::ReachedEnd);
        assert!((tr.y_end()[0] - (-1.0f64).exp()).abs() < 1e-9);
        assert_eq!(tr.t_end(), 1.0);
    }

    #[test]
    fn backward_integration() {
        let tr = integrate(&decay, [1.0], 1.0, 0.0, &Options::default(), &[]);
        assert!((tr.y_end()[0] - 1.0f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn riccati_overflow_and_blowup_time() {
        // y' = 7 y^2, y(0) = 1 blows up at t = 1/7.
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = 7.0 * y[0] * y[0];
        let tr = integrate(&sys, [1.0], 0.0, 1.0, &Options::default(), &[]);
        assert_eq!(tr.termination, Termination::StateOverflow);
        // Fit 1/y = a + b t over samples with y >= 1e4.
        let pts: Vec<(f64, f64)> = tr
            .times
            .iter()
            .zip(&tr.states)
            .filter(|(_, y)| y[0] > 1e4)
            .map(|(t, y)| (*t, 1.0 / y[0]))
            .collect();
        assert!(pts.len() >= 2);
        let (t0, r0) = pts[0];
        let (t1, r1) = *pts.last().unwrap();
        let b = (r1 - r0) / (t1 - t0);
        let tb = t0 - r0 / b;
        assert!((tb - 1.0 / 7.0).abs() < 1e-4, "{tb}");
    }

    #[test]
    fn harmonic_energy_drift() {
        let sys = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let opts = Options::with_tol(Tolerances::new(1e-10, 1e-12));
        let t1 = 200.0 * std::f64::consts::PI;
        let tr = integrate(&sys, [1.0, 0.0], 0.0, t1, &opts, &[]);
        let y = tr.y_end();
        assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-6);
        assert!((y[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn level_event_matches_dense_bisection() {
        // y = e^t crosses 3 at ln 3.
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = y[0];
        let ev = [Event::new(|_t, y: &[f64; 1]| y[0] - 3.0).rising()];
        let opts = Options::default().record(Record::Dense);
        let tr = integrate(&sys, [1.0], 0.0, 2.0, &opts, &ev);
        assert_eq!(tr.events.len(), 1);
        let te = tr.events[0].t;
        let dense = tr.dense.as_ref().unwrap();
        let (mut a, mut b) = (0.0, 2.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if dense.eval(m).unwrap()[0] < 3.0 {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((te - 0.5 * (a + b)).abs() < 1e-10);
        assert!((te - 3.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn direction_filter_and_terminal() {
        let sys = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        // cos t: falling zeros at pi/2 + 2k pi, rising at 3pi/2 + 2k pi.
        let ev = [
            Event::new(|_t, y: &[f64; 2]| y[0]).falling(),
            Event::new(|_t, y: &[f64; 2]| y[0]).rising(),
            Event::new(|t, _y: &[f64; 2]| t - 10.0).terminal(),
        ];
        let tr = integrate(&sys, [1.0, 0.0], 0.0, 20.0, &Options::default(), &ev);
        assert_eq!(tr.termination, Termination::TerminalEvent);
        assert!((tr.t_end() - 10.0).abs() < 1e-9);
        assert_eq!(tr.events_of(0).count(), 2);
        assert_eq!(tr.events_of(1).count(), 1);
        for e in tr.events_of(0) {
            assert_eq!(e.sense, -1);
        }
        let first = tr.events_of(0).next().unwrap().t;
        assert!((first - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn dense_output_accuracy() {
        let sys = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let opts = Options::default().record(Record::Dense);
        let tr = integrate(&sys, [1.0, 0.0], 0.0, 10.0, &opts, &[]);
        let d = tr.dense.unwrap();
        for k in 0..=100 {
            let t = 0.1 * k as f64;
            let y = d.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8, "{t}");
        }
        assert!(d.eval(10.5).is_none());
    }

    #[test]
    fn error_decreases_at_high_order() {
        // Global error at the end of y' = -y vs tolerance.
        let mut pts = Vec::new();
        for k in 0..6 {
            let rtol = 1e-4 * 10f64.powi(-k);
            let opts = Options::with_tol(Tolerances::new(rtol, rtol * 1e-2));
            let tr = integrate(&decay, [1.0], 0.0, 5.0, &opts, &[]);
            let err = (tr.y_end()[0] - (-5.0f64).exp()).abs().max(1e-18);
            pts.push((tr.evals as f64, err));
        }
        // Error against work: an 8th-order pair reduces error at least like
        // evals^-4 over this range.
        let (e0, r0) = pts[0];
        let (e1, r1) = pts[pts.len() - 1];
        let slope = -(r1.ln() - r0.ln()) / (e1.ln() - e0.ln());
        assert!(slope >= 4.0, "slope {slope}");
    }

    #[test]
    fn state_norm_tracks_small_components() {
        let sys = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let opts = Options::with_tol(Tolerances::state_norm(1e-11, 1e-300));
        let tr = integrate(&sys, [1e-30, 0.0], 0.0, 3.0, &opts, &[]);
        assert!((tr.y_end()[0] / 1e-30 - 3.0f64.cos()).abs() < 1e-9);
    }
}
