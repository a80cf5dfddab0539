//! Steady states of the radial model equation,
//!
//! ```text
//! v'' + (n+1)/r v' + 3 r v v' + (n+2) v² = 0,
//! ```
//!
//! studied through the autonomous form in s = log r for w = r²v,
//!
//! ```text
//! w'' + (n−4) w' + 3 w w' + (n−4) w² − 2(n−2) w = 0,
//! ```
//!
//! and its compactification (w, w') = (tan φ, tan ψ / cos²φ) with time τ,
//! ds/dτ = cos φ cos ψ.

use crate::ivp::{integrate, DenseOutput, Event, Options, Record, Termination, Tolerances};
use crate::profile::{linear_fit, AsymptoticTag, Chart, Profile};
use serde::Serialize;
use std::f64::consts::{E, FRAC_PI_2};
use thiserror::Error;

/// Distance in the (φ, ψ) chart at which an orbit counts as arrived at a
/// hyperbolic equilibrium.
pub const ARRIVAL: f64 = 1e-8;
/// Offset from a hyperbolic source along its eigenvector.
pub const DEPARTURE: f64 = 1e-7;
/// |w| at which orbits are cut on the centre manifold of e3. Reaching e3
/// itself requires resolving a fast direction whose rate grows like 3|w|.
pub const CENTRE_CUT: f64 = 1e4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("dimension n = {0} must exceed 2")]
    Dimension(f64),
    #[error("orbit ({label}) does not exist for n = {n}")]
    Regime { label: char, n: f64 },
    #[error("orbit ({label}) left its basin: integration stopped with {termination:?} at s = {s}")]
    Escaped { label: char, termination: Termination, s: f64 },
    #[error("w' = {0} ≥ 4/3 outside the domain of the first integral")]
    Domain(f64),
    #[error("boundary value b = {0} must be non-negative")]
    NegativeBoundary(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Below4,
    Four,
    Above4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyParams {
    pub n: f64,
}

impl SteadyParams {
    pub fn new(n: f64) -> Result<Self, PhaseError> {
        if !(n > 2.0) {
            return Err(PhaseError::Dimension(n));
        }
        Ok(Self { n })
    }

    pub fn regime(&self) -> Regime {
        if (self.n - 4.0).abs() <= 1e-9 {
            Regime::Four
        } else if self.n < 4.0 {
            Regime::Below4
        } else {
            Regime::Above4
        }
    }

    /// Nontrivial equilibrium 2(n−2)/(n−4) of the autonomous equation.
    pub fn beta(&self) -> f64 {
        2.0 * (self.n - 2.0) / (self.n - 4.0)
    }

    /// w'' of the autonomous equation.
    pub fn accel(&self, w: f64, wp: f64) -> f64 {
        let n = self.n;
        -(n - 4.0) * wp - 3.0 * w * wp - (n - 4.0) * w * w + 2.0 * (n - 2.0) * w
    }

    /// (P, Q) of the compactified field.
    pub fn torus_field(&self, phi: f64, psi: f64) -> [f64; 2] {
        let n = self.n;
        let (sf, cf) = phi.sin_cos();
        let (sp, cp) = psi.sin_cos();
        let p = cf * sp;
        let q = -sp * cp * sf * (2.0 * sp + 3.0 * cp) + 2.0 * (n - 2.0) * sf * cf * cf * cp * cp * cp
            - (n - 4.0) * cp * cp * cf * (sf * sf * cp + sp);
        [p, q]
    }

    /// Residual of the r-chart steady equation.
    pub fn r_residual(&self, r: f64, v: f64, vp: f64, vpp: f64) -> f64 {
        vpp + (self.n + 1.0) / r * vp + 3.0 * r * v * vp + (self.n + 2.0) * v * v
    }
}

/// First-order system for (w, w') in s.
pub fn autonomous_rhs(p: SteadyParams) -> impl Fn(f64, &[f64; 2], &mut [f64; 2]) + Copy {
    move |_s, y, dy| {
        dy[0] = y[1];
        dy[1] = p.accel(y[0], y[1]);
    }
}

/// (dφ/dτ, dψ/dτ, ds/dτ).
pub fn torus_rhs(p: SteadyParams) -> impl Fn(f64, &[f64; 3], &mut [f64; 3]) + Copy {
    move |_t, y, dy| {
        let [a, b] = p.torus_field(y[0], y[1]);
        dy[0] = a;
        dy[1] = b;
        dy[2] = y[0].cos() * y[1].cos();
    }
}

pub fn to_torus(w: f64, wp: f64) -> (f64, f64) {
    (w.atan(), (wp / (1.0 + w * w)).atan())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumLabel {
    E1,
    E2,
    E3,
    E4,
    E5,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Eigenvalues {
    Real([f64; 2]),
    Complex { re: f64, im: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Source,
    Sink,
    Saddle,
    /// A zero eigenvalue.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumInfo {
    pub label: EquilibriumLabel,
    pub phi: f64,
    pub psi: f64,
    pub jacobian: [[f64; 2]; 2],
    /// From the numerical Jacobian, sorted decreasing when real.
    pub eigenvalues: Eigenvalues,
    /// Closed forms, sorted decreasing.
    pub closed_form: [f64; 2],
    /// Eigenvectors for the closed-form eigenvalues, where known.
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    pub stability: Stability,
}

impl EquilibriumInfo {
    /// Largest deviation of the computed eigenvalues from the closed forms.
    pub fn eigen_error(&self) -> f64 {
        match self.eigenvalues {
            Eigenvalues::Real(l) => (l[0] - self.closed_form[0]).abs().max((l[1] - self.closed_form[1]).abs()),
            Eigenvalues::Complex { .. } => f64::INFINITY,
        }
    }
}

/// Fourth-order central differences of (P, Q).
pub fn jacobian(p: &SteadyParams, phi: f64, psi: f64) -> [[f64; 2]; 2] {
    let h = 1e-3;
    let d = |f: &dyn Fn(f64) -> [f64; 2]| {
        let (a, b, c, e) = (f(2.0 * h), f(h), f(-h), f(-2.0 * h));
        [(-a[0] + 8.0 * b[0] - 8.0 * c[0] + e[0]) / (12.0 * h), (-a[1] + 8.0 * b[1] - 8.0 * c[1] + e[1]) / (12.0 * h)]
    };
    let dphi = d(&|x| p.torus_field(phi + x, psi));
    let dpsi = d(&|x| p.torus_field(phi, psi + x));
    [[dphi[0], dpsi[0]], [dphi[1], dpsi[1]]]
}

fn eigen2(m: [[f64; 2]; 2]) -> Eigenvalues {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let q = disc.sqrt();
        Eigenvalues::Real([tr / 2.0 + q, tr / 2.0 - q])
    } else {
        Eigenvalues::Complex { re: tr / 2.0, im: (-disc).sqrt() }
    }
}

fn classify(l: [f64; 2]) -> Stability {
    let tol = 1e-9;
    if l.iter().any(|x| x.abs() <= tol) {
        Stability::Degenerate
    } else if l[0] > 0.0 && l[1] > 0.0 {
        Stability::Source
    } else if l[0] < 0.0 && l[1] < 0.0 {
        Stability::Sink
    } else {
        Stability::Saddle
    }
}

fn sorted(a: f64, b: f64) -> [f64; 2] {
    if a >= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Roots of λ² + (n−4+3β)λ + 2(n−2) = 0, the linearization at w = β in s.
pub fn e2_rates(p: &SteadyParams) -> [f64; 2] {
    let damping = p.n - 4.0 + 3.0 * p.beta();
    let c = 2.0 * (p.n - 2.0);
    let q = (damping * damping / 4.0 - c).sqrt();
    [-damping / 2.0 + q, -damping / 2.0 - q]
}

/// The equilibria in (−π/2, π/2]²; e2 is omitted at n = 4 where it merges
/// into e3.
pub fn equilibria(p: &SteadyParams) -> Vec<EquilibriumInfo> {
    let n = p.n;
    let psi4 = (-1.5f64).atan();
    let mut list = vec![
        (EquilibriumLabel::E1, 0.0, 0.0, sorted(2.0, -(n - 2.0)), Some([[1.0, 2.0], [-1.0, n - 2.0]])),
        (EquilibriumLabel::E3, FRAC_PI_2, 0.0, sorted(0.0, -3.0), Some([[3.0, n - 4.0], [0.0, 1.0]])),
        (EquilibriumLabel::E4, FRAC_PI_2, psi4, sorted(-psi4.sin(), 39.0 / 4.0 * psi4.cos().powi(3)), None),
        (EquilibriumLabel::E5, FRAC_PI_2, FRAC_PI_2, sorted(2.0, -1.0), Some([[0.0, 1.0], [1.0, 0.0]])),
    ];
    if p.regime() != Regime::Four {
        let phi2 = p.beta().atan();
        let [a, b] = e2_rates(p);
        list.insert(1, (EquilibriumLabel::E2, phi2, 0.0, sorted(phi2.cos() * a, phi2.cos() * b), None));
    }
    list.into_iter()
        .map(|(label, phi, psi, closed_form, eigenvectors)| {
            let jac = jacobian(p, phi, psi);
            let eigenvalues = eigen2(jac);
            let stability = match eigenvalues {
                Eigenvalues::Real(l) => classify(l),
                Eigenvalues::Complex { re, .. } if re > 0.0 => Stability::Source,
                Eigenvalues::Complex { .. } => Stability::Sink,
            };
            EquilibriumInfo { label, phi, psi, jacobian: jac, eigenvalues, closed_form, eigenvectors, stability }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitLabel {
    /// e1 → e2 for n > 4: the regular profile.
    A,
    /// e3 → e2 for n > 4: singular at the origin, v ~ r^{−(n+2)/3}.
    B,
    /// The copy of e3 at φ = −π/2 → e1 for n > 4: the stable manifold of e1.
    C,
    /// e1 → e3 for n < 4: the regular profile.
    D,
    /// e1 → e3 for n = 4: the regular profile with a logarithmic tail.
    F,
}

impl OrbitLabel {
    pub fn letter(self) -> char {
        match self {
            OrbitLabel::A => 'a',
            OrbitLabel::B => 'b',
            OrbitLabel::C => 'c',
            OrbitLabel::D => 'd',
            OrbitLabel::F => 'f',
        }
    }

    pub fn parse(c: char) -> Option<Self> {
        Some(match c.to_ascii_lowercase() {
            'a' => OrbitLabel::A,
            'b' => OrbitLabel::B,
            'c' => OrbitLabel::C,
            'd' => OrbitLabel::D,
            'f' => OrbitLabel::F,
            _ => return None,
        })
    }

    pub fn valid_for(self, r: Regime) -> bool {
        matches!(
            (self, r),
            (OrbitLabel::A | OrbitLabel::B | OrbitLabel::C, Regime::Above4)
                | (OrbitLabel::D, Regime::Below4)
                | (OrbitLabel::F, Regime::Four)
        )
    }
}

/// Integration variables: (w, w'), or at n = 4 (w, y) with
/// y = −log(1 − 3w'/4), in which the first integral is regular.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coordinates {
    Slope,
    LogSlope,
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub label: OrbitLabel,
    pub n: f64,
    pub s_start: f64,
    pub s_end: f64,
    /// Distance in the (φ, ψ) chart from the target at the final point.
    pub arrival_distance: f64,
    coords: Coordinates,
    dense: DenseOutput<2>,
}

impl Orbit {
    pub fn s_range(&self) -> (f64, f64) {
        (self.s_start.min(self.s_end), self.s_start.max(self.s_end))
    }

    /// (w, w') at s.
    pub fn state(&self, s: f64) -> Option<[f64; 2]> {
        let y = self.dense.eval(s)?;
        Some(match self.coords {
            Coordinates::Slope => y,
            Coordinates::LogSlope => [y[0], 4.0 / 3.0 * (-(-y[1]).exp_m1())],
        })
    }

    /// Raw integration state; at n = 4 the second entry is −log(1 − 3w'/4).
    fn raw(&self, s: f64) -> Option<[f64; 2]> {
        self.dense.eval(s)
    }

    /// (v, v') at radius r.
    pub fn v_at(&self, r: f64) -> Option<[f64; 2]> {
        let s = r.ln();
        let [w, wp] = self.state(s)?;
        Some([w / (r * r), (wp - 2.0 * w) / (r * r * r)])
    }

    fn sample_s(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.s_range();
        (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
    }

    /// w and w' against s.
    pub fn s_profile(&self, count: usize) -> Profile {
        let ss = self.sample_s(count);
        let st: Vec<[f64; 2]> = ss.iter().map(|&s| self.state(s).unwrap()).collect();
        Profile::new(Chart::S, ss, st.iter().map(|x| x[0]).collect(), st.iter().map(|x| x[1]).collect())
    }

    /// v and v' against r, with asymptotic tags over the first and last
    /// decade.
    pub fn r_profile(&self, count: usize) -> Profile {
        let ss = self.sample_s(count);
        let rs: Vec<f64> = ss.iter().map(|s| s.exp()).collect();
        let st: Vec<[f64; 2]> = rs.iter().map(|&r| self.v_at(r).unwrap()).collect();
        let mut prof = Profile::new(Chart::R, rs, st.iter().map(|x| x[0]).collect(), st.iter().map(|x| x[1]).collect());
        let (lo, hi) = (prof.first(), prof.last());
        prof.head = prof.fit_power(lo, lo * 10.0);
        prof.tail = if self.coords == Coordinates::LogSlope {
            log_tail(&prof, hi / 10.0, hi)
        } else {
            prof.fit_power(hi / 10.0, hi)
        };
        prof
    }

    /// (φ, ψ) samples.
    pub fn torus_points(&self, count: usize) -> Vec<(f64, f64)> {
        self.sample_s(count)
            .into_iter()
            .map(|s| {
                let [w, wp] = self.state(s).unwrap();
                to_torus(w, wp)
            })
            .collect()
    }

    /// Largest relative residual of the r-chart steady equation at interior
    /// samples, with v'' from differencing the interpolated v'.
    pub fn steady_residual(&self, count: usize) -> f64 {
        let p = SteadyParams { n: self.n };
        let (lo, hi) = self.s_range();
        let span = hi - lo;
        (1..count - 1)
            .filter_map(|k| {
                let s = lo + span * k as f64 / (count - 1) as f64;
                let r = s.exp();
                let h = 1e-3 * r;
                let [v, vp] = self.v_at(r)?;
                let d = |k: f64| self.v_at(r + k * h).map(|x| x[1]);
                let vpp = (-d(2.0)? + 8.0 * d(1.0)? - 8.0 * d(-1.0)? + d(-2.0)?) / (12.0 * h);
                let scale = vpp.abs()
                    + ((p.n + 1.0) / r * vp).abs()
                    + (3.0 * r * v * vp).abs()
                    + ((p.n + 2.0) * v * v).abs();
                Some(p.r_residual(r, v, vp, vpp).abs() / scale.max(1e-300))
            })
            .fold(0.0, f64::max)
    }
}

/// Regression of r²v on log r; the exponent field holds −2.
fn log_tail(prof: &Profile, lo: f64, hi: f64) -> Option<AsymptoticTag> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = prof
        .abscissa
        .iter()
        .zip(&prof.values)
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(r, v)| (r.ln(), r * r * v))
        .unzip();
    let f = linear_fit(&xs, &ys)?;
    Some(AsymptoticTag { exponent: -2.0, log_coefficient: Some(f.slope), residual: f.rms })
}

fn orbit_options() -> Options {
    Options {
        tol: Tolerances::state_norm(1e-12, 1e-20),
        max_steps: 2_000_000,
        overflow: 1e12,
        record: Record::Dense,
        ..Options::default()
    }
}

fn run(
    p: SteadyParams,
    label: OrbitLabel,
    coords: Coordinates,
    y0: [f64; 2],
    s0: f64,
    s1: f64,
    stop: &dyn Fn(&[f64; 2]) -> f64,
    distance: &dyn Fn(&[f64; 2]) -> f64,
) -> Result<Orbit, PhaseError> {
    let rhs = autonomous_rhs(p);
    let log_slope = |_s: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
        dy[0] = 4.0 / 3.0 * (-(-y[1]).exp_m1());
        dy[1] = 3.0 * y[0];
    };
    let events = [Event::new(|_s, y: &[f64; 2]| stop(y)).falling().terminal()];
    let tr = match coords {
        Coordinates::Slope => integrate(&rhs, y0, s0, s1, &orbit_options(), &events),
        Coordinates::LogSlope => integrate(&log_slope, y0, s0, s1, &orbit_options(), &events),
    };
    if tr.termination != Termination::TerminalEvent {
        return Err(PhaseError::Escaped { label: label.letter(), termination: tr.termination, s: tr.t_end() });
    }
    Ok(Orbit {
        label,
        n: p.n,
        s_start: s0,
        s_end: tr.t_end(),
        arrival_distance: distance(&tr.y_end()),
        coords,
        dense: tr.dense.unwrap_or_default(),
    })
}

/// Slow-manifold slope at e3: w' ≈ a w + c with a = −(n−4)/3.
fn centre_manifold(p: &SteadyParams, w: f64) -> f64 {
    let a = -(p.n - 4.0) / 3.0;
    let c = (2.0 * (p.n - 2.0) + 2.0 * (p.n - 4.0).powi(2) / 9.0) / 3.0;
    a * w + c
}

/// Regular start w = r²(1 − r²/2) at r = √DEPARTURE, which is V(0) = 1,
/// V'(0) = 0 to O(r⁴) and lies along the unstable eigenvector (1, 2) of e1.
fn regular_start() -> (f64, [f64; 2]) {
    let x = DEPARTURE;
    let s0 = 0.5 * x.ln();
    (s0, [x * (1.0 - x / 2.0), 2.0 * x - 2.0 * x * x])
}

pub fn heteroclinic_orbit(p: &SteadyParams, label: OrbitLabel) -> Result<Orbit, PhaseError> {
    if !label.valid_for(p.regime()) {
        return Err(PhaseError::Regime { label: label.letter(), n: p.n });
    }
    let q = *p;
    let to_e2 = move |y: &[f64; 2]| {
        let (phi, psi) = to_torus(y[0], y[1]);
        ((phi - q.beta().atan()).powi(2) + psi * psi).sqrt()
    };
    let to_e1 = |y: &[f64; 2]| {
        let (phi, psi) = to_torus(y[0], y[1]);
        (phi * phi + psi * psi).sqrt()
    };
    let to_e3 = |y: &[f64; 2]| {
        let (phi, psi) = to_torus(y[0], y[1]);
        ((FRAC_PI_2 - phi.abs()).powi(2) + psi * psi).sqrt()
    };
    match label {
        OrbitLabel::A => {
            let (s0, y0) = regular_start();
            let stop = |y: &[f64; 2]| to_e2(y) - ARRIVAL;
            run(q, label, Coordinates::Slope, y0, s0, 400.0, &stop, &to_e2)
        }
        OrbitLabel::B => {
            let w0 = CENTRE_CUT;
            let y0 = [w0, centre_manifold(p, w0)];
            let stop = |y: &[f64; 2]| to_e2(y) - ARRIVAL;
            run(q, label, Coordinates::Slope, y0, 0.0, 400.0, &stop, &to_e2)
        }
        OrbitLabel::C => {
            // Backwards along the stable eigenvector (−1, n−2) of e1.
            let norm = (1.0 + (p.n - 2.0).powi(2)).sqrt();
            let y0 = [-DEPARTURE / norm, DEPARTURE * (p.n - 2.0) / norm];
            let stop = |y: &[f64; 2]| y[0] + CENTRE_CUT;
            let mut o = run(q, label, Coordinates::Slope, y0, 0.0, -400.0, &stop, &to_e3)?;
            o.arrival_distance = to_e1(&y0);
            Ok(o)
        }
        OrbitLabel::D => {
            let (s0, y0) = regular_start();
            let stop = |y: &[f64; 2]| CENTRE_CUT - y[0];
            run(q, label, Coordinates::Slope, y0, s0, 400.0, &stop, &to_e3)
        }
        OrbitLabel::F => {
            let (s0, [w, wp]) = regular_start();
            let y0 = [w, -(-0.75 * wp).ln_1p()];
            // w grows linearly in s here; stop well inside the last decade.
            let stop = |y: &[f64; 2]| 200.0 - y[0];
            let to_e3_log = |y: &[f64; 2]| {
                let wp = 4.0 / 3.0 * (-(-y[1]).exp_m1());
                to_e3(&[y[0], wp])
            };
            run(q, label, Coordinates::LogSlope, y0, s0, 1e4, &stop, &to_e3_log)
        }
    }
}

/// max |−w'/3 + (4/9) log(1/(1 − 3w'/4)) − w²/2| along an n = 4 orbit.
pub fn orbit_f_residual(orbit: &Orbit, samples: usize) -> Result<f64, PhaseError> {
    let mut worst: f64 = 0.0;
    for s in orbit.sample_s(samples) {
        let y = orbit.raw(s).ok_or(PhaseError::Domain(f64::NAN))?;
        let (w, log_term) = match orbit.coords {
            Coordinates::LogSlope => (y[0], y[1]),
            Coordinates::Slope => {
                if y[1] >= 4.0 / 3.0 {
                    return Err(PhaseError::Domain(y[1]));
                }
                (y[0], -(-0.75 * y[1]).ln_1p())
            }
        };
        let wp = 4.0 / 3.0 * (-(-log_term).exp_m1());
        worst = worst.max(first_integral_n4(w, wp, log_term).abs());
    }
    Ok(worst)
}

/// The first integral at n = 4, given w, w' and log(1/(1 − 3w'/4)).
pub fn first_integral_n4(w: f64, wp: f64, log_term: f64) -> f64 {
    -wp / 3.0 + 4.0 / 9.0 * log_term - w * w / 2.0
}

/// The regular steady profile V with V(0) = 1, V'(0) = 0.
#[derive(Clone, Debug)]
pub struct SteadyProfile {
    pub orbit: Orbit,
}

/// V of the regular orbit for the regime of n.
pub fn steady_profile_v(p: &SteadyParams) -> Result<SteadyProfile, PhaseError> {
    let label = match p.regime() {
        Regime::Above4 => OrbitLabel::A,
        Regime::Four => OrbitLabel::F,
        Regime::Below4 => OrbitLabel::D,
    };
    Ok(SteadyProfile { orbit: heteroclinic_orbit(p, label)? })
}

impl SteadyProfile {
    /// (V, V') at r. Below the first integration point the Taylor form
    /// 1 − r²/2 is used.
    pub fn v(&self, r: f64) -> Option<[f64; 2]> {
        if r <= self.orbit.s_start.exp() {
            return Some([1.0 - r * r / 2.0, -r]);
        }
        self.orbit.v_at(r)
    }

    pub fn r_max(&self) -> f64 {
        self.orbit.s_end.exp()
    }

    /// Member λ²V(λr) of the scaling family, with its derivative.
    pub fn v_lambda(&self, lambda: f64, r: f64) -> Option<[f64; 2]> {
        let [v, vp] = self.v(lambda * r)?;
        Some([lambda * lambda * v, lambda * lambda * lambda * vp])
    }

    /// λ²V(λ), the boundary value at r = 1 of the family member.
    pub fn boundary_value(&self, lambda: f64) -> Option<f64> {
        if lambda == 0.0 {
            return Some(0.0);
        }
        self.v_lambda(lambda, 1.0).map(|x| x[0])
    }

    /// r-chart profile on [0, r_max] with `count` log-spaced samples.
    pub fn profile(&self, count: usize) -> Profile {
        let mut prof = self.orbit.r_profile(count);
        prof.abscissa.insert(0, 0.0);
        prof.values.insert(0, 1.0);
        prof.derivatives.insert(0, 0.0);
        prof
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BvpClass {
    /// v = λ²V(λr) with λ²V(λ) = b.
    Smooth { lambda: f64 },
    /// v(r) = r⁻² w(log r + shift) on the singular orbit, w(shift) = b.
    SingularSuitable {
        shift: f64,
        /// Fitted exponent of v at the origin.
        v_exponent: f64,
        /// The same for |u| = r v.
        u_rate: f64,
    },
}

/// Radial steady states on the unit ball with boundary value b, for n > 4.
#[derive(Clone, Debug)]
pub struct BallProblem {
    pub params: SteadyParams,
    pub regular: SteadyProfile,
    pub singular: Orbit,
}

impl BallProblem {
    pub fn new(p: &SteadyParams) -> Result<Self, PhaseError> {
        if p.regime() != Regime::Above4 {
            return Err(PhaseError::Regime { label: 'b', n: p.n });
        }
        Ok(Self { params: *p, regular: steady_profile_v(p)?, singular: heteroclinic_orbit(p, OrbitLabel::B)? })
    }

    pub fn classify(&self, b: f64) -> Result<BvpClass, PhaseError> {
        if !(b >= 0.0) {
            return Err(PhaseError::NegativeBoundary(b));
        }
        let beta = self.params.beta();
        if b == 0.0 {
            return Ok(BvpClass::Smooth { lambda: 0.0 });
        }
        if b < beta {
            return Ok(BvpClass::Smooth { lambda: self.solve_lambda(b) });
        }
        if b == beta {
            // The singular steady state β r⁻² itself.
            return Ok(BvpClass::SingularSuitable { shift: f64::INFINITY, v_exponent: -2.0, u_rate: -1.0 });
        }
        let o = &self.singular;
        // w decreases monotonically from the cut to β along orbit (b).
        let w0 = o.state(o.s_start).unwrap()[0];
        if b > w0 {
            // Above the cut the centre-manifold expansion is used directly.
            let shift = o.s_start - 3.0 / (self.params.n - 4.0) * (b / w0).ln();
            return Ok(BvpClass::SingularSuitable {
                shift,
                v_exponent: -(self.params.n + 2.0) / 3.0,
                u_rate: -(self.params.n - 1.0) / 3.0,
            });
        }
        let shift = bisect_monotone(|s| o.state(s).unwrap()[0] - b, o.s_start, o.s_end);
        // Near-origin exponent of v(r) = r⁻² w(log r + shift) over the
        // first decade of the orbit.
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..=50)
            .map(|k| {
                let s = o.s_start + (10f64.ln()) * k as f64 / 50.0;
                let w = o.state(s).unwrap()[0];
                let log_r = s - shift;
                (log_r, w.ln() - 2.0 * log_r)
            })
            .unzip();
        let v_exponent = linear_fit(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
        Ok(BvpClass::SingularSuitable { shift, v_exponent, u_rate: v_exponent + 1.0 })
    }

    /// λ with λ²V(λ) = b < β, from the monotone orbit (a).
    fn solve_lambda(&self, b: f64) -> f64 {
        let o = &self.regular.orbit;
        let w_end = o.state(o.s_end).unwrap()[0];
        if b >= w_end {
            // Beyond the computed orbit: the slow approach to β.
            let beta = self.params.beta();
            let rate = e2_rates(&self.params)[0];
            return (o.s_end + ((beta - b) / (beta - w_end)).ln() / rate).exp();
        }
        let w_start = o.state(o.s_start).unwrap()[0];
        if b <= w_start {
            // λ²V(λ) ≈ λ² on the Taylor part.
            return b.sqrt();
        }
        bisect_monotone(|s| o.state(s).unwrap()[0] - b, o.s_start, o.s_end).exp()
    }
}

/// Root of a function that changes sign once on [lo, hi].
fn bisect_monotone(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn classify_bvp(p: &SteadyParams, b: f64) -> Result<BvpClass, PhaseError> {
    BallProblem::new(p)?.classify(b)
}

/// Upper barrier in the v-normalization: C(1+r)^{−(n+2)/3} for n < 4,
/// r⁻²((4/3) log(e+r) + C) for n = 4, γβ/(1+r)² for n > 4.
pub fn barrier_bound(p: &SteadyParams, r: f64, c: f64, gamma: f64) -> f64 {
    match p.regime() {
        Regime::Below4 => c * (1.0 + r).powf(-(p.n + 2.0) / 3.0),
        Regime::Four => (4.0 / 3.0 * (E + r).ln() + c) / (r * r),
        Regime::Above4 => gamma * p.beta() / (1.0 + r).powi(2),
    }
}

/// Portrait grid row (φ, ψ, P, Q).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub phi: f64,
    pub psi: f64,
    pub p: f64,
    pub q: f64,
}

/// (P, Q) on an m × m grid of (−π/2, π/2]².
pub fn portrait_grid(p: &SteadyParams, m: usize) -> Vec<FieldSample> {
    let step = std::f64::consts::PI / m as f64;
    let mut out = Vec::with_capacity(m * m);
    for i in 1..=m {
        for j in 1..=m {
            let phi = -FRAC_PI_2 + step * i as f64;
            let psi = -FRAC_PI_2 + step * j as f64;
            let [a, b] = p.torus_field(phi, psi);
            out.push(FieldSample { phi, psi, p: a, q: b });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn autonomous_equilibria() {
        let p = SteadyParams::new(5.0).unwrap();
        assert_eq!(p.beta(), 6.0);
        assert_eq!(p.accel(6.0, 0.0), 0.0);
        assert_eq!(p.accel(0.0, 0.0), 0.0);
        let p4 = SteadyParams::new(4.0).unwrap();
        // Only w = 0 is an equilibrium when the (n−4) terms vanish.
        for w in [0.5, 1.0, 3.0] {
            assert!(p4.accel(w, 0.0) != 0.0);
        }
    }

    #[test]
    fn field_sign_periodicity() {
        let p = SteadyParams::new(5.0).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                let phi = -PI + 2.0 * PI * i as f64 / 100.0;
                let psi = -PI + 2.0 * PI * j as f64 / 100.0;
                let base = p.torus_field(phi, psi);
                for sh in [p.torus_field(phi + PI, psi), p.torus_field(phi, psi + PI)] {
                    assert!((sh[0] + base[0]).abs() <= 1e-14 && (sh[1] + base[1]).abs() <= 1e-14);
                }
            }
        }
        for psi in [-1.0, 0.2, 1.3] {
            assert!(p.torus_field(FRAC_PI_2, psi)[0].abs() < 1e-16);
        }
    }

    #[test]
    fn torus_matches_autonomous_flow() {
        // dφ/dτ and dψ/dτ equal the chain rule through (w, w') times cos φ cos ψ.
        let p = SteadyParams::new(5.5).unwrap();
        for (w, wp) in [(0.3, -0.2), (2.0, 1.5), (-1.0, 0.7)] {
            let (phi, psi) = to_torus(w, wp);
            let scale = phi.cos() * psi.cos();
            let wpp = p.accel(w, wp);
            let dphi = wp / (1.0 + w * w);
            let x = wp / (1.0 + w * w);
            let dx = wpp / (1.0 + w * w) - 2.0 * w * wp * wp / (1.0 + w * w).powi(2);
            let dpsi = dx / (1.0 + x * x);
            let [a, b] = p.torus_field(phi, psi);
            assert!((a - scale * dphi).abs() < 1e-13);
            assert!((b - scale * dpsi).abs() < 1e-13);
        }
    }

    #[test]
    fn equilibria_match_closed_forms() {
        for n in [3.0, 5.0, 8.0] {
            let p = SteadyParams::new(n).unwrap();
            for e in equilibria(&p) {
                assert!(e.eigen_error() < 1e-10, "n = {n} {:?}: {:?} vs {:?}", e.label, e.eigenvalues, e.closed_form);
                let [a, b] = p.torus_field(e.phi, e.psi);
                assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
            }
        }
        let e2 = |n| equilibria(&SteadyParams::new(n).unwrap())[1];
        assert_eq!(e2(3.0).stability, Stability::Source);
        assert_eq!(e2(5.0).stability, Stability::Sink);
        assert!((e2(5.0).phi - 1.405648).abs() < 1e-6);
        assert_eq!(equilibria(&SteadyParams::new(4.0).unwrap()).len(), 4);
    }

    #[test]
    fn e4_eigenvalue() {
        let e4 = equilibria(&SteadyParams::new(5.0).unwrap())[3];
        assert_eq!(e4.label, EquilibriumLabel::E4);
        assert!((e4.closed_form[0] - 6.0 / 13f64.sqrt()).abs() < 1e-14);
        assert!((e4.closed_form[1] - 3.0 / 13f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orbit_regimes() {
        let p = SteadyParams::new(5.0).unwrap();
        assert!(matches!(heteroclinic_orbit(&p, OrbitLabel::D), Err(PhaseError::Regime { .. })));
        assert!(matches!(heteroclinic_orbit(&SteadyParams::new(3.0).unwrap(), OrbitLabel::A), Err(_)));
    }

    #[test]
    fn first_integral_vanishes_at_origin() {
        assert_eq!(first_integral_n4(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn barriers() {
        assert_eq!(barrier_bound(&SteadyParams::new(3.0).unwrap(), 0.0, 1.0, 0.0), 1.0);
        let p5 = SteadyParams::new(5.0).unwrap();
        let r = 1e6;
        assert!((barrier_bound(&p5, r, 0.0, 0.9) * r * r / 5.4 - 1.0).abs() < 1e-5);
    }
}
