//! Command dispatch. Every command yields an `Artifact` that `main` writes.

use rand::rngs::StdRng;
use serde_json::{json, Value};

use qubit_fgkls::evolution::{positivity_window, single_mode_reduction, solve_ivp, time_grid, TrajectoryPoint};
use qubit_fgkls::model::{DensityMatrix, LindbladForm, LindbladShape, SystemSpec};
use qubit_fgkls::numerics::{Mat2, C64};
use qubit_fgkls::oracle::{integrate, max_deviation, IntegratorConfig, DEFAULT_DT};
use qubit_fgkls::perturb::{matched_rates, order_estimate, pointer_series, weak_rates, OrderEstimate, SMALL_C};
use qubit_fgkls::pointer::{compute_pointer, PointerResult};
use qubit_fgkls::spectral::{spectrum, CoincidingRoots};
use qubit_fgkls::uniton::{classify_unitons, UnitonCandidate, UnitonVerdict};

use crate::error::CliError;
use crate::job::{self, Command, Format, Job, Source, SystemJob};

pub const CSV_HEADER: &str = "t,f11_re,f11_im,f12_re,f12_im,f21_re,f21_im,f22_re,f22_im,det,min_eig,physical";

pub enum Artifact {
    Json(Value),
    Csv(String),
}

fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

fn mat(m: &Mat2) -> Value {
    json!(job::to_matrix(m))
}

fn slope(e: OrderEstimate) -> Value {
    match e {
        OrderEstimate::Slope(s) => json!(s),
        OrderEstimate::Saturated => json!("saturated"),
    }
}

struct Resolved {
    system: SystemJob,
    spec: SystemSpec,
    /// `true` when the system was drawn from the seed.
    drawn: bool,
}

fn resolve_system(job: &Job, src: &Source, rng: &mut StdRng) -> Result<Resolved, CliError> {
    let (system, drawn) = match &job.system {
        Some(s) => (s.clone(), false),
        None => (job::random_system(rng), true),
    };
    let spec = job::system(&system, src)?;
    Ok(Resolved { system, spec, drawn })
}

fn initial_state(job: &Job, src: &Source, rng: &mut StdRng, required: bool) -> Result<DensityMatrix, CliError> {
    match &job.initial_state {
        Some(m) => job::density(m),
        None if required => Err(src.schema_at("command", format!("{:?} requires \"initial_state\"", job.command))),
        None => job::density(&job::random_state(rng)),
    }
}

fn with_system(mut doc: Value, r: &Resolved) -> Value {
    if r.drawn {
        doc["system"] = serde_json::to_value(&r.system).expect("system serializes");
    }
    doc
}

pub fn run(job: &Job, src: &Source, rng: &mut StdRng) -> Result<Artifact, CliError> {
    let format = job.output.format.unwrap_or(if job.command == Command::Evolve { Format::Csv } else { Format::Json });
    if format == Format::Csv && job.command != Command::Evolve {
        return Err(src.schema_at("output", "csv output is only available for evolve"));
    }
    let r = resolve_system(job, src, rng)?;
    let spec = &r.spec;
    let doc = match job.command {
        Command::Pointer => pointer(spec)?,
        Command::Spectrum => spectrum_doc(spec)?,
        Command::Evolve => {
            let rho0 = initial_state(job, src, rng, false)?;
            let grid = job.time_grid.ok_or_else(|| src.schema_at("command", "evolve requires \"time_grid\""))?;
            if grid.points < 2 || !(grid.t_end > grid.t_start) {
                return Err(src.schema_at("time_grid", "time_grid needs t_end > t_start and at least 2 points"));
            }
            let sol = solve_ivp(spec, &rho0)?;
            let points = sol.trajectory(&time_grid(grid.t_start, grid.t_end, grid.points));
            return Ok(match format {
                Format::Csv => Artifact::Csv(csv(&points)),
                Format::Json => Artifact::Json(with_system(json!({ "trajectory": points_json(&points) }), &r)),
            });
        }
        Command::Positivity => {
            let rho0 = initial_state(job, src, rng, true)?;
            let sol = solve_ivp(spec, &rho0)?;
            let red = single_mode_reduction(&sol)?;
            let win = positivity_window(&red, &sol.particular, spec.c())?;
            json!({
                "t_min": win.t_min,
                "valid": win.valid,
                "sign": red.sign,
                "w": red.w,
                "h": red.h,
                "p": red.p,
                "s3": red.s3,
            })
        }
        Command::Perturb => perturb(spec, job.order.unwrap_or(4))?,
        Command::Uniton => uniton(spec)?,
        Command::OracleCheck => {
            let rho0 = initial_state(job, src, rng, false)?;
            let c = spec.c();
            let t_end = match job.time_grid {
                Some(g) => g.t_end,
                None if c > 0.0 => 10.0 / (c * c),
                None => 10.0,
            };
            let dt = job.dt.unwrap_or(DEFAULT_DT);
            let cfg = IntegratorConfig::new(dt, t_end, ((t_end / dt) as usize / 1000).max(1))?;
            let sol = solve_ivp(spec, &rho0)?;
            let traj = integrate(spec, &rho0, &cfg)?;
            json!({
                "max_deviation": max_deviation(&traj, |t| *sol.rho_at(t).matrix()),
                "dt": traj.dt,
                "t_end": t_end,
                "samples": traj.times.len(),
                "initial_state": mat(rho0.matrix()),
            })
        }
    };
    Ok(Artifact::Json(with_system(doc, &r)))
}

fn pointer(spec: &SystemSpec) -> Result<Value, CliError> {
    let p = compute_pointer(spec)?;
    let mut doc = json!({
        "case": p.case_label(),
        "stationary_member": mat(p.stationary_member().matrix()),
    });
    match &p {
        PointerResult::Unique { rho, .. } => {
            doc["kind"] = json!("unique");
            doc["rho"] = mat(rho.matrix());
        }
        PointerResult::DiagonalFamily => doc["kind"] = json!("diagonal-family"),
        PointerResult::FullFamily => doc["kind"] = json!("full-family"),
        PointerResult::LineFamily(line) => {
            doc["kind"] = json!("line-family");
            doc["base"] = mat(&line.base);
            doc["direction"] = mat(&line.direction);
            doc["physical_range"] = json!(line.physical_range());
        }
        PointerResult::NoAttractor { .. } => doc["kind"] = json!("no-attractor"),
    }
    Ok(doc)
}

fn spectrum_doc(spec: &SystemSpec) -> Result<Value, CliError> {
    let md = spectrum(spec)?;
    let branch = match md.branch {
        Some(CoincidingRoots::Double { double, simple }) => json!({ "double": double, "simple": simple }),
        Some(CoincidingRoots::Triple(s)) => json!({ "triple": s }),
        None => Value::Null,
    };
    Ok(json!({
        "roots": md.scaled_roots().iter().map(|z| cx(*z)).collect::<Vec<_>>(),
        "rates": md.rates().iter().map(|z| cx(*z)).collect::<Vec<_>>(),
        "scale": md.scale,
        "structure": md.structure.label(),
        "stability": md.stability().label(),
        "vieta_residual": md.vieta_residual(),
        "modes": md.modes.iter().map(|m| json!({ "rate": cx(m.rate), "chain_length": m.vectors.len() })).collect::<Vec<_>>(),
        "coinciding_roots": branch,
    }))
}

fn at_coupling(spec: &SystemSpec, c: f64) -> SystemSpec {
    SystemSpec::new(spec.h, LindbladForm::new(*spec.l.shape(), c).expect("coupling grid is positive"))
}

fn perturb(spec: &SystemSpec, order: u32) -> Result<Value, CliError> {
    let series = weak_rates(spec)?;
    let mut branches = Vec::new();
    for (k, b) in series.branches.iter().enumerate() {
        let est = order_estimate(
            |c| matched_rates(&series, &at_coupling(spec, c)).map_or(C64::new(f64::NAN, 0.0), |r| r[k]),
            |c| b.eval(c),
            &SMALL_C,
        )?;
        branches.push(json!({ "a0": cx(b.a0), "a1": cx(b.a1), "slope": slope(est) }));
    }
    let pointer = match *spec.l.shape() {
        LindbladShape::Jordan { lambda } => {
            let de = spec.h.delta_eps();
            let ps = pointer_series(lambda, de, spec.c(), order)?;
            let exact = |c: f64| {
                compute_pointer(&at_coupling(spec, c))
                    .ok()
                    .and_then(|p| p.unique().map(|r| r.f11()))
                    .unwrap_or(C64::new(f64::NAN, 0.0))
            };
            let est = order_estimate(exact, |c| pointer_series(lambda, de, c, order).map_or(C64::new(f64::NAN, 0.0), |s| s.f11), &SMALL_C)?;
            json!({ "order": order, "at_c": mat(&ps.matrix()), "f11_slope": slope(est) })
        }
        _ => Value::Null,
    };
    Ok(json!({ "coupling_grid": SMALL_C, "rate_branches": branches, "pointer_series": pointer }))
}

fn uniton(spec: &SystemSpec) -> Result<Value, CliError> {
    let v = classify_unitons(spec)?;
    let mut doc = json!({ "verdict": v.label() });
    match v {
        UnitonVerdict::AllStates => {}
        UnitonVerdict::StationaryPointerOnly { rho_u } => doc["rho_u"] = mat(rho_u.matrix()),
        UnitonVerdict::None { candidate } => {
            doc["candidate"] = match candidate {
                UnitonCandidate::Unique(rho) => json!({ "kind": "unique", "rho": mat(rho.matrix()) }),
                UnitonCandidate::Family { base, direction } => {
                    json!({ "kind": "family", "base": mat(&base), "direction": mat(&direction) })
                }
                UnitonCandidate::Nothing => json!({ "kind": "nothing" }),
            }
        }
    }
    Ok(doc)
}

fn points_json(points: &[TrajectoryPoint]) -> Value {
    points
        .iter()
        .map(|p| json!({ "t": p.t, "rho": mat(p.rho.matrix()), "det": p.det, "min_eig": p.min_eig, "physical": p.physical }))
        .collect()
}

/// Floats use Rust's shortest round-trip formatting.
pub fn csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        let m = p.rho.matrix();
        let mut row = vec![p.t.to_string()];
        for z in [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]] {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        row.push(p.det.to_string());
        row.push(p.min_eig.to_string());
        row.push(p.physical.to_string());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
