use std::fs;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use blowup::evolve::{self, EvolveConfig, EvolveEnd, InitialData};
use blowup::heat::{self, HeatParams, HeatSolveConfig, LepinConfig, LepinPath, LambdaRoots};
use blowup::ivp::Tolerances as IvpTolerances;
use blowup::phase::{self, OrbitLabel, SteadyParams};
use blowup::profile::{AsymptoticTag, Profile};
use blowup::selfsim::{self, ContinuationConfig, SelfSimParams, SolveConfig};
use blowup::shooting::ShootConfig;
use blowup::specfun::{self, KummerArgs};

use crate::error::CliError;
use crate::output::{f17, Run, Tolerances};
use crate::Global;

const EVIDENCE_NOTE: &str = "bounded numerical search: evidence, not proof";

fn tag<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(f17).unwrap_or_default()
}

fn params<A: Serialize>(g: &Global, a: &A) -> Value {
    json!({ "args": a, "rtol": g.rtol, "atol": g.atol, "threads": g.threads, "check": g.check })
}

fn shoot_config(g: &Global, base: ShootConfig) -> ShootConfig {
    ShootConfig {
        tol: IvpTolerances { rtol: g.rtol.unwrap_or(base.tol.rtol), atol: g.atol.unwrap_or(base.tol.atol), ..base.tol },
        ..base
    }
}

fn tolerances(s: &ShootConfig) -> Tolerances {
    Tolerances { rtol: s.tol.rtol, atol: s.tol.atol }
}

fn profile_rows(p: &Profile) -> Vec<Vec<String>> {
    (0..p.len()).map(|k| vec![f17(p.abscissa[k]), f17(p.values[k]), f17(p.derivatives[k])]).collect()
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| CliError::args(format!("bad {what} entry '{x}'"))))
        .collect()
}

// ---------------------------------------------------------------- portrait

#[derive(Args, Debug, Serialize)]
pub struct PortraitArgs {
    #[arg(long)]
    pub n: f64,
    /// Vector-field samples per axis.
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// Comma-separated orbit letters (a-f); default: every orbit of the regime.
    #[arg(long)]
    pub orbits: Option<String>,
    /// Samples per orbit.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Serialize)]
struct OrbitSummary {
    label: char,
    s_start: f64,
    s_end: f64,
    arrival_distance: f64,
    head: Option<AsymptoticTag>,
    tail: Option<AsymptoticTag>,
    steady_residual: f64,
    first_integral_residual: Option<f64>,
}

pub fn portrait(g: &Global, a: PortraitArgs) -> Result<PathBuf, CliError> {
    let p = SteadyParams::new(a.n)?;
    if a.grid < 2 || a.samples < 10 {
        return Err(CliError::args("--grid must be ≥ 2 and --samples ≥ 10"));
    }
    let labels: Vec<OrbitLabel> = match &a.orbits {
        Some(s) => s
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| {
                let c = x.trim().chars().next().unwrap_or(' ');
                let l = OrbitLabel::parse(c).ok_or_else(|| CliError::args(format!("unknown orbit '{x}'")))?;
                if l.valid_for(p.regime()) {
                    Ok(l)
                } else {
                    Err(CliError::args(format!("orbit ({c}) does not exist for n = {}", a.n)))
                }
            })
            .collect::<Result<_, _>>()?,
        None => [OrbitLabel::A, OrbitLabel::B, OrbitLabel::C, OrbitLabel::D, OrbitLabel::F]
            .into_iter()
            .filter(|l| l.valid_for(p.regime()))
            .collect(),
    };
    let mut run = Run::new(
        &g.out_dir,
        &format!("portrait_n{}", a.n),
        "portrait",
        params(g, &a),
        Tolerances { rtol: 1e-12, atol: 1e-20 },
    )?;

    let field = phase::portrait_grid(&p, a.grid);
    run.csv("portrait_grid.csv", &["phi", "psi", "p", "q"], field.iter().map(|f| vec![f17(f.phi), f17(f.psi), f17(f.p), f17(f.q)]))?;
    let eq = phase::equilibria(&p);
    run.json("equilibria.json", &eq)?;
    if g.check {
        for e in &eq {
            let err = e.eigen_error();
            run.check(&format!("eigenvalues {}", tag(&e.label)), err <= 1e-10, format!("error {err:.2e}"));
        }
    }

    let orbits: Vec<_> = labels.par_iter().map(|&l| phase::heteroclinic_orbit(&p, l)).collect();
    let mut summaries = Vec::new();
    for orbit in orbits {
        let o = orbit?;
        let letter = o.label.letter();
        let sp = o.s_profile(a.samples);
        let rows = sp.abscissa.iter().zip(sp.values.iter().zip(&sp.derivatives)).map(|(&s, (&w, &wp))| {
            let (phi, psi) = phase::to_torus(w, wp);
            vec![f17(s), f17(w), f17(wp), f17(phi), f17(psi)]
        });
        run.csv(&format!("orbit_{letter}.csv"), &["s", "w", "w_s", "phi", "psi"], rows.collect::<Vec<_>>())?;
        let rp = o.r_profile(a.samples);
        let f_res = if o.label == OrbitLabel::F { Some(phase::orbit_f_residual(&o, a.samples)?) } else { None };
        let s = OrbitSummary {
            label: letter,
            s_start: o.s_start,
            s_end: o.s_end,
            arrival_distance: o.arrival_distance,
            head: rp.head,
            tail: rp.tail,
            steady_residual: o.steady_residual(a.samples.min(1000)),
            first_integral_residual: f_res,
        };
        if g.check {
            run.check(&format!("orbit {letter} steady residual"), s.steady_residual <= 1e-6, format!("{:.2e}", s.steady_residual));
            if let Some(r) = f_res {
                run.check("orbit f first integral", r <= 1e-6, format!("{r:.2e}"));
            }
            match (o.label, s.tail) {
                (OrbitLabel::A, Some(t)) => run.check("orbit a tail exponent", (t.exponent + 2.0).abs() <= 0.05, format!("{:.5}", t.exponent)),
                (OrbitLabel::D, Some(t)) => {
                    let want = -(a.n + 2.0) / 3.0;
                    run.check("orbit d tail exponent", (t.exponent - want).abs() <= 0.05, format!("{:.5} vs {want:.5}", t.exponent))
                }
                (OrbitLabel::F, Some(t)) => {
                    let c = t.log_coefficient.unwrap_or(f64::NAN);
                    run.check("orbit f log coefficient", (c - 4.0 / 3.0).abs() <= 0.05, format!("{c:.5}"))
                }
                _ => {}
            }
        }
        summaries.push(s);
    }
    run.json("orbits.json", &summaries)?;
    run.finish()
}

// ---------------------------------------------------------------- profiles

#[derive(Args, Debug, Serialize)]
pub struct ProfilesArgs {
    #[arg(long)]
    pub n: f64,
    /// Gauge; κ = 7/2 puts the constant equilibrium at 1 for n = 5.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long)]
    pub alpha_lo: Option<f64>,
    #[arg(long)]
    pub alpha_hi: Option<f64>,
    /// Grid density of the α sweep.
    #[arg(long)]
    pub per_decade: Option<usize>,
}

#[derive(Serialize)]
struct SolutionSummary {
    alpha: f64,
    index_i: usize,
    bracket: (f64, f64),
    r_split: f64,
    plateau: Option<f64>,
    boundary: Option<f64>,
    file: String,
}

pub fn profiles(g: &Global, a: ProfilesArgs) -> Result<PathBuf, CliError> {
    let p = SelfSimParams::new(a.n, a.kappa)?;
    let mut cfg = SolveConfig::default().for_kappa(a.kappa);
    cfg.shoot = shoot_config(g, cfg.shoot);
    if let Some(lo) = a.alpha_lo {
        cfg.alpha_lo = lo;
    }
    if let Some(hi) = a.alpha_hi {
        cfg.alpha_hi = hi;
    }
    if let Some(d) = a.per_decade {
        cfg.per_decade = d;
    }
    if !(cfg.alpha_lo > 0.0 && cfg.alpha_hi > cfg.alpha_lo) {
        return Err(CliError::args("need 0 < alpha-lo < alpha-hi"));
    }
    let mut run = Run::new(
        &g.out_dir,
        &format!("profiles_n{}_kappa{}", a.n, a.kappa),
        "profiles",
        params(g, &a),
        tolerances(&cfg.shoot),
    )?;
    let set = selfsim::find_solutions(&p, &cfg)?;
    run.csv(
        "sweep.csv",
        &["alpha", "index_i", "r_alpha", "end", "tail_limit"],
        set.sweep.iter().map(|r| vec![f17(r.alpha), r.index_i.to_string(), f17(r.r_alpha), tag(&r.end), opt(r.tail_limit)]),
    )?;
    let mut list = Vec::new();
    for (k, s) in set.solutions.iter().enumerate() {
        let file = format!("profile_{k}_i{}.csv", s.index_i);
        run.csv(&file, &["r", "w", "w_r"], profile_rows(&s.profile))?;
        list.push(SolutionSummary {
            alpha: s.alpha,
            index_i: s.index_i,
            bracket: s.bracket,
            r_split: s.confirmation.r_split,
            plateau: s.confirmation.plateau.map(|pl| pl.limit),
            boundary: s.boundary.map(|b| b.evaluated_at_n),
            file,
        });
    }
    run.json(
        "solutions.json",
        &json!({
            "n": a.n,
            "kappa": a.kappa,
            "abar": p.abar(),
            "beta": p.beta(),
            "nu": p.nu(),
            "predicted_count": set.predicted_count,
            "interior_count": set.interior().count(),
            "validated": list,
            "rejected_jumps": set.suspicious.iter().map(|s| json!({"alpha": s.alpha, "index_i": s.index_i, "bracket": s.bracket})).collect::<Vec<_>>(),
        }),
    )?;
    if g.check {
        if let Some(want) = set.predicted_count {
            let got = set.interior().count();
            run.check("solution count", got == want, format!("{got} interior solutions, predicted {want}"));
        }
        let lim = selfsim::index_limits(&p, 1e-4, 1e3 * a.kappa, 1e-4 * a.kappa, &cfg.shoot);
        run.check("index limits", lim.holds(), format!("{lim:?}"));
        let radii: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64 / a.kappa.sqrt()).collect();
        let sens = selfsim::sensitivity_check(&p, 1e-6 * p.abar(), &radii, &cfg.shoot)?;
        let worst = sens.iter().map(|s| (s.finite_difference - s.linearized).abs()).fold(0.0, f64::max);
        run.check("linearization", worst <= 1e-4, format!("max deviation {worst:.2e}"));
    }
    run.finish()
}

// ---------------------------------------------------------------- branches

#[derive(Args, Debug, Serialize)]
pub struct BranchesArgs {
    #[arg(long, default_value_t = 5.0)]
    pub from_n: f64,
    /// Comma-separated indices i of the branches to follow.
    #[arg(long, default_value = "2,3,4,5,6")]
    pub indices: String,
    #[arg(long, default_value_t = 12.0)]
    pub n_limit: f64,
    #[arg(long, default_value_t = 0.05)]
    pub n_step: f64,
}

pub fn branches(g: &Global, a: BranchesArgs) -> Result<PathBuf, CliError> {
    let indices: Vec<usize> = list(&a.indices, "index")?;
    if indices.is_empty() {
        return Err(CliError::args("no indices given"));
    }
    let p = SelfSimParams::new(a.from_n, 1.0)?;
    let mut cfg = ContinuationConfig { n_step: a.n_step, n_limit: a.n_limit, ..ContinuationConfig::default() };
    cfg.solve.shoot = shoot_config(g, cfg.solve.shoot);
    let seeds = selfsim::find_solutions(&p, &cfg.solve)?;
    let seed_of = |k: usize| seeds.interior().find(|s| s.index_i == k).map(|s| s.alpha);
    let mut jobs = Vec::new();
    for &k in &indices {
        let alpha = seed_of(k).ok_or_else(|| CliError::validation(format!("no index-{k} solution at n = {}", a.from_n)))?;
        jobs.push((k, alpha));
    }
    let name = format!("branches_from{}_i{}", a.from_n, a.indices.replace(',', "-"));
    let mut run = Run::new(&g.out_dir, &name, "branches", params(g, &a), tolerances(&cfg.solve.shoot))?;
    let results: Vec<_> =
        jobs.par_iter().map(|&(k, alpha)| selfsim::continue_branch(1.0, a.from_n, alpha, k, &cfg)).collect();
    let mut summary = Vec::new();
    for b in results {
        let b = b?;
        run.csv(
            &format!("branch_i{}.csv", b.index_i),
            &["n", "alpha"],
            b.samples.iter().map(|s| vec![f17(s.n), f17(s.alpha)]),
        )?;
        if g.check {
            run.check(&format!("branch {} terminates", b.index_i), b.termination.is_some(), tag(&b.end));
        }
        summary.push(json!({
            "index_i": b.index_i,
            "end": b.end,
            "termination": b.termination,
            "max_n": b.termination_estimate(),
            "samples": b.samples.len(),
        }));
    }
    run.json("branches.json", &summary)?;
    run.finish()
}

// ---------------------------------------------------------------- heat

#[derive(Args, Debug, Serialize)]
pub struct HeatArgs {
    #[arg(long)]
    pub n: f64,
    /// Nonlinearity exponent; defaults to 3/(n−10) with --scan-lepin.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha_lo: f64,
    #[arg(long, default_value_t = 1e6)]
    pub alpha_hi: f64,
    #[arg(long, default_value_t = 400)]
    pub per_decade: usize,
    /// Continue the j = 2 solution towards n = 10 + 3/σ.
    #[arg(long)]
    pub scan_lepin: bool,
    /// Length in n of the continuation path ending at n.
    #[arg(long, default_value_t = 0.5)]
    pub lepin_span: f64,
}

pub fn heat(g: &Global, a: HeatArgs) -> Result<PathBuf, CliError> {
    if a.scan_lepin {
        return lepin(g, a);
    }
    let sigma = a.sigma.ok_or_else(|| CliError::args("--sigma is required unless --scan-lepin is given"))?;
    let p = HeatParams::new(a.n, sigma, a.kappa)?;
    let base = HeatSolveConfig::default();
    let cfg = HeatSolveConfig {
        alpha_lo: a.alpha_lo,
        alpha_hi: a.alpha_hi,
        per_decade: a.per_decade,
        shoot: shoot_config(g, base.shoot.for_kappa(a.kappa)),
        ..base
    };
    if !(cfg.alpha_lo > 0.0 && cfg.alpha_hi > cfg.alpha_lo) {
        return Err(CliError::args("need 0 < alpha-lo < alpha-hi"));
    }
    let mut run = Run::new(
        &g.out_dir,
        &format!("heat_n{}_sigma{}_kappa{}", a.n, sigma, a.kappa),
        "heat",
        params(g, &a),
        tolerances(&cfg.shoot),
    )?;
    let set = heat::find_solutions_heat(&p, &cfg)?;
    run.csv(
        "sweep.csv",
        &["alpha", "index_i", "index_j", "r_alpha", "end", "tail_limit"],
        set.sweep.iter().map(|r| {
            vec![f17(r.alpha), r.index_i.to_string(), r.index_j.to_string(), f17(r.r_alpha), tag(&r.end), opt(r.tail_limit)]
        }),
    )?;
    let mut list = Vec::new();
    for (k, s) in set.solutions.iter().enumerate() {
        let file = format!("profile_{k}_j{}.csv", s.index_j);
        run.csv(&file, &["r", "w", "w_r"], profile_rows(&s.profile))?;
        list.push(json!({
            "alpha": s.alpha,
            "index_j": s.index_j,
            "index_i": s.index_i,
            "parity": s.parity,
            "detected_by": s.detected_by,
            "bracket": s.bracket,
            "file": file,
        }));
    }
    run.json(
        "solutions.json",
        &json!({
            "params": p,
            "note": EVIDENCE_NOTE,
            "alpha_range": [cfg.alpha_lo, cfg.alpha_hi],
            "abar": p.abar(),
            "singular_amplitude": p.singular_amplitude(),
            "critical_exponents": heat::critical_exponents(a.n),
            "supercritical": p.is_supercritical(),
            "lambda_roots": p.lambda_roots(),
            "nu": p.nu(),
            "j_limit": p.j_limit_prediction(),
            "validated": list,
            "rejected_jumps": set.suspicious.len(),
            "odd_j_violations": set.odd_j_violations,
        }),
    )?;
    if g.check {
        run.check("finite-R j is even", set.odd_j_violations == 0, format!("{} violations", set.odd_j_violations));
        let radii: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64 / a.kappa.sqrt()).collect();
        let sens = heat::sensitivity_check(&p, 1e-6 * p.abar(), &radii, &cfg.shoot)?;
        let worst = sens.iter().map(|s| (s.finite_difference - s.linearized).abs()).fold(0.0, f64::max);
        run.check("linearization", worst <= 1e-4, format!("max deviation {worst:.2e}"));
    }
    run.finish()
}

fn lepin(g: &Global, a: HeatArgs) -> Result<PathBuf, CliError> {
    let sigma = match a.sigma {
        Some(s) => s,
        None if a.n > 10.0 => 3.0 / (a.n - 10.0),
        None => return Err(CliError::args("--scan-lepin without --sigma needs n > 10")),
    };
    // The path ends on n = 10 + 3/σ.
    let n_end = 10.0 + 3.0 / sigma;
    let path = LepinPath { start: (n_end - a.lepin_span, sigma), end: (n_end, sigma) };
    let mut cfg = LepinConfig { kappa: a.kappa, ..LepinConfig::default() };
    cfg.seed.shoot = shoot_config(g, cfg.seed.shoot.for_kappa(a.kappa));
    cfg.solve.shoot = shoot_config(g, cfg.solve.shoot.for_kappa(a.kappa));
    let mut run = Run::new(
        &g.out_dir,
        &format!("heat_lepin_n{}_sigma{}", n_end, sigma),
        "heat",
        params(g, &a),
        tolerances(&cfg.solve.shoot),
    )?;
    let trace = heat::lepin_scan(path, &cfg)?;
    run.csv(
        "lepin_trace.csv",
        &["t", "n", "sigma", "distance", "alpha"],
        trace.points.iter().map(|p| vec![f17(p.t), f17(p.n), f17(p.sigma), f17(p.distance), f17(p.alpha)]),
    )?;
    let end = HeatParams::new(n_end, sigma, a.kappa)?;
    let lambda1 = match end.lambda_roots() {
        LambdaRoots::Real { lambda1, .. } => Some(lambda1),
        LambdaRoots::Complex { .. } => None,
    };
    let max_alpha = trace.points.iter().map(|p| p.alpha).fold(0.0, f64::max);
    run.json(
        "lepin.json",
        &json!({
            "note": EVIDENCE_NOTE,
            "path": trace.path,
            "status": trace.status,
            "last_bracket": trace.last_bracket,
            "growth_exponent": trace.growth_exponent,
            "max_alpha": max_alpha,
            "lambda1_at_end": lambda1,
        }),
    )?;
    if g.check {
        run.check("alpha* exceeds 1e4", max_alpha > 1e4, format!("max α* {max_alpha:.4e}"));
        let dev = lambda1.map_or(f64::INFINITY, |l| (l + 4.0).abs());
        run.check("lambda1 = -4 on the boundary", dev <= 1e-10, format!("{dev:.2e}"));
    }
    run.finish()
}

// ---------------------------------------------------------------- evolve

#[derive(Args, Debug, Serialize)]
pub struct EvolveArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Compare the final snapshots with the i = 2 self-similar profile.
    #[arg(long)]
    pub collapse: bool,
    /// Number of final snapshots used for the collapse.
    #[arg(long, default_value_t = 5)]
    pub last: usize,
}

pub fn evolve(g: &Global, a: EvolveArgs) -> Result<PathBuf, CliError> {
    let text = fs::read_to_string(&a.config).map_err(|e| CliError::io(&a.config, e))?;
    let cfg: EvolveConfig = serde_json::from_str(&text).map_err(|e| CliError::args(format!("{}: {e}", a.config.display())))?;
    cfg.validate()?;
    let stem = a.config.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
    let mut run = Run::new(
        &g.out_dir,
        &format!("evolve_{stem}"),
        "evolve",
        json!({ "args": &a, "config": &cfg, "check": g.check }),
        Tolerances { rtol: 0.0, atol: 0.0 },
    )?;
    let verdict = evolve::barrier_check(&cfg)?;
    let res = evolve::evolve_radial(&cfg)?;
    run.csv("series.csv", &["t", "v_max", "dt"], res.series.iter().map(|s| vec![f17(s.t), f17(s.v_max), f17(s.dt)]))?;
    let mut index = Vec::new();
    for (k, s) in res.snapshots.iter().enumerate() {
        let file = format!("snapshot_{k:03}.csv");
        run.csv(&file, &["r", "v", "v_r"], profile_rows(&s.profile))?;
        index.push(vec![k.to_string(), f17(s.t), f17(s.v_max), file]);
    }
    run.csv("snapshots.csv", &["k", "t", "v_max", "file"], index)?;

    let collapse = if a.collapse && res.blowup.is_some() {
        let p = SelfSimParams::new(cfg.n, 1.0)?;
        let set = selfsim::find_solutions(&p, &SolveConfig::default())?;
        let report = match set.interior().find(|s| s.index_i == 2) {
            Some(s) => match evolve::profile_collapse(&res, &s.profile, s.alpha, a.last) {
                Ok(v) => json!({ "reference_alpha": s.alpha, "samples": v }),
                Err(e) => json!({ "reference_alpha": s.alpha, "error": e.to_string() }),
            },
            None => json!({ "error": "no i = 2 solution found" }),
        };
        Some(report)
    } else {
        None
    };
    run.json(
        "result.json",
        &json!({
            "end": res.end,
            "steps": res.steps,
            "t_final": res.t_final,
            "blowup": res.blowup,
            "self_similar_fit": res.blowup.map(|b| b.is_self_similar()),
            "boundedness": res.boundedness,
            "barrier": verdict,
            "collapse": collapse,
        }),
    )?;
    if g.check {
        let zero = EvolveConfig { initial: InitialData::Zero, t_end: cfg.t_end.min(1e-3), ..cfg.clone() };
        let z = evolve::evolve_radial(&zero)?;
        let fixed = z.snapshots.iter().all(|s| s.profile.values.iter().all(|&v| v == 0.0));
        run.check("zero data fixed", fixed, format!("{} steps", z.steps));
        let sym = res.snapshots.iter().all(|s| s.profile.derivatives[0].abs() <= 1e-10 * s.v_max.max(1e-300));
        run.check("origin symmetry", sym, "v_r(0) from even reflection");
        if let Some(b) = res.blowup {
            run.check("reciprocal fit", b.is_self_similar(), format!("R² {:.7}", b.r_squared));
        }
        if let Some(b) = res.boundedness {
            run.check("bounded", b.late_max <= 2.0 * b.initial_max, format!("late max {:.4e}, initial {:.4e}", b.late_max, b.initial_max));
        }
    }
    let out = run.finish()?;
    if res.end == EvolveEnd::StepUnderflow {
        return Err(CliError::numerical(format!("step underflow at t = {}", res.t_final)));
    }
    Ok(out)
}

// ---------------------------------------------------------------- bvp

#[derive(Args, Debug, Serialize)]
pub struct BvpArgs {
    #[arg(long)]
    pub n: f64,
    /// Comma-separated boundary values.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Samples of the regular steady profile V.
    #[arg(long, default_value_t = 800)]
    pub samples: usize,
}

pub fn bvp(g: &Global, a: BvpArgs) -> Result<PathBuf, CliError> {
    let bs: Vec<f64> = list(&a.b, "boundary value")?;
    let p = SteadyParams::new(a.n)?;
    let ball = phase::BallProblem::new(&p)?;
    let mut run = Run::new(&g.out_dir, &format!("bvp_n{}", a.n), "bvp", params(g, &a), Tolerances { rtol: 1e-12, atol: 1e-20 })?;
    let mut rows = Vec::new();
    for &b in &bs {
        rows.push(json!({ "b": b, "class": ball.classify(b)? }));
    }
    run.json("bvp.json", &json!({ "n": a.n, "threshold": p.beta(), "results": rows }))?;
    run.csv("steady_profile.csv", &["r", "v", "v_r"], profile_rows(&ball.regular.profile(a.samples)))?;
    if g.check {
        let beta = p.beta();
        let below = matches!(ball.classify(beta - 1e-3)?, phase::BvpClass::Smooth { .. });
        let above = matches!(ball.classify(beta + 1e-3)?, phase::BvpClass::SingularSuitable { .. });
        run.check("threshold at beta", below && above, format!("beta = {beta}"));
    }
    run.finish()
}

// ---------------------------------------------------------------- specfun

#[derive(Args, Debug, Serialize)]
pub struct SpecfunArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub xmax: f64,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

pub fn specfun(g: &Global, a: SpecfunArgs) -> Result<PathBuf, CliError> {
    if a.samples < 2 {
        return Err(CliError::args("--samples must be ≥ 2"));
    }
    let zeros = specfun::kummer_zeros(a.a, a.b, a.xmax)?;
    let mut run = Run::new(
        &g.out_dir,
        &format!("specfun_a{}_b{}", a.a, a.b),
        "specfun",
        params(g, &a),
        Tolerances { rtol: f64::EPSILON, atol: 0.0 },
    )?;
    let mut rows = Vec::with_capacity(a.samples);
    for k in 0..a.samples {
        let x = a.xmax * k as f64 / (a.samples - 1) as f64;
        let args = KummerArgs::new(a.a, a.b, x);
        rows.push(vec![f17(x), f17(specfun::kummer_m(args)?), f17(specfun::kummer_m_prime(args)?)]);
    }
    run.csv("kummer.csv", &["x", "m", "m_x"], rows)?;
    run.json("zeros.json", &zeros)?;
    if g.check {
        run.check(
            "zero count",
            zeros.roots.len() == zeros.predicted,
            format!("{} roots, predicted {}", zeros.roots.len(), zeros.predicted),
        );
    }
    run.finish()
}
