//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use qubit_fgkls::evolution::{
    det_quadratic_roots, positivity_window, single_mode_reduction, solve_ivp, time_grid,
};
use qubit_fgkls::generator::mode_matrix;
use qubit_fgkls::model::{gauge_shift, DensityMatrix, Hamiltonian, LindbladForm, LindbladShape, SystemSpec};
use qubit_fgkls::numerics::{Mat2, C64, ONE, ZERO};
use qubit_fgkls::oracle::{det_scan, integrate, max_deviation, DetScan, IntegratorConfig};
use qubit_fgkls::perturb::{
    matched_rates, order_estimate, pointer_series, weak_rates, OrderEstimate, SMALL_C,
};
use qubit_fgkls::pointer::{compute_pointer, jordan_pointer, pointer_residual, PointerCase, PointerResult};
use qubit_fgkls::spectral::{spectrum, CoincidingRoots, Stability, Structure};
use qubit_fgkls::uniton::{
    classify_unitons, dissipator_norm, jordan_candidate, liouville_defect, UnitonCandidate, UnitonVerdict,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pointer_stationarity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let (mut worst_res, mut min_det, mut min_jordan_det) = (0.0f64, f64::INFINITY, f64::INFINITY);
    let mut unique = 0;
    for k in 0..1000 {
        let spec = if k % 2 == 0 { jordan(&mut rng, &WIDE) } else { diagonal(&mut rng, &WIDE) };
        let p = compute_pointer(&spec).map_err(|e| format!("spec {k}: {e}"))?;
        let Some(rho) = p.unique() else { continue };
        unique += 1;
        let res = pointer_residual(&spec, rho);
        worst_res = worst_res.max(res);
        min_det = min_det.min(rho.det());
        check(res < 1e-10, || format!("spec {k}: residual {res:e}"))?;
        check(rho.det() >= -1e-12, || format!("spec {k}: det {:e}", rho.det()))?;
        if let LindbladShape::Jordan { .. } = spec.l.shape() {
            min_jordan_det = min_jordan_det.min(rho.det());
            check(rho.det() > 0.0, || format!("spec {k}: Jordan det {:e} not > 0", rho.det()))?;
        }
    }
    Ok(format!(
        "{unique} unique pointers, max residual {worst_res:.1e}, min det {min_det:.1e}, min Jordan det {min_jordan_det:.1e}"
    ))
}

fn maximally_mixed_branch() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let half = Mat2::from_real(0.5, 0.0, 0.0, 0.5);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let spec = diagonal(&mut rng, &WIDE);
        let p = compute_pointer(&spec).map_err(|e| e.to_string())?;
        let rho = match p {
            PointerResult::Unique { rho, case: PointerCase::MaximallyMixed } => rho,
            other => return Err(format!("spec {k}: got {other:?}")),
        };
        let d = frob_dist(rho.matrix(), &half);
        worst = worst.max(d);
        check(d < 1e-12, || format!("spec {k}: distance {d:e}"))?;
    }
    Ok(format!("200 specs, max distance from I/2 {worst:.1e}"))
}

fn degenerate_jordan() -> Outcome {
    let want = Mat2::from_real(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0);
    let at = |c: f64| -> Result<Mat2, String> {
        let spec = SystemSpec::new(Hamiltonian::diagonal(0.25, 0.25), LindbladForm::jordan(ONE, c).unwrap());
        let p = compute_pointer(&spec).map_err(|e| e.to_string())?;
        p.unique().map(|r| *r.matrix()).ok_or_else(|| format!("not unique at c = {c}"))
    };
    let (a, b) = (at(0.5)?, at(2.0)?);
    let d = frob_dist(&a, &want);
    check(d < 1e-12, || format!("distance {d:e} from (1/3)[[2,-1],[-1,1]]"))?;
    let dc = frob_dist(&a, &b);
    check(dc < 1e-12, || format!("c = 0.5 vs c = 2 differ by {dc:e}"))?;
    Ok(format!("distance {d:.1e}, c-dependence {dc:.1e}"))
}

fn stability() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst_vieta = 0.0f64;
    let mut max_re = f64::NEG_INFINITY;
    for k in 0..10_000 {
        let spec = jordan(&mut rng, &WIDE);
        let md = spectrum(&spec).map_err(|e| format!("Jordan {k}: {e}"))?;
        worst_vieta = worst_vieta.max(md.vieta_residual());
        let re = md.scaled_roots().iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max);
        max_re = max_re.max(re);
        check(re < 0.0, || format!("Jordan {k}: root with Re s = {re:e}"))?;
        check(md.stability() == Stability::AllDamped, || format!("Jordan {k}: {:?}", md.stability()))?;
    }
    for k in 0..500 {
        let c = coupling(&mut rng, &WIDE);
        let l1 = complex_in_disk(&mut rng, 3.0);
        let l2 = complex_in_disk(&mut rng, 3.0);
        let spec = SystemSpec::new(diagonal_hamiltonian(&mut rng, 3.0), LindbladForm::diagonal(l1, l2, c).unwrap());
        let md = spectrum(&spec).map_err(|e| e.to_string())?;
        worst_vieta = worst_vieta.max(md.vieta_residual());
        let zeros = md.scaled_roots().iter().filter(|s| s.re.abs() < 1e-12 && s.im.abs() < 1e-12).count();
        check(zeros == 1, || format!("diagonal e12 = 0 spec {k}: {zeros} zero roots"))?;

        let spec = SystemSpec::new(hamiltonian(&mut rng, 3.0), LindbladForm::diagonal(l1, l1, c).unwrap());
        let md = spectrum(&spec).map_err(|e| e.to_string())?;
        worst_vieta = worst_vieta.max(md.vieta_residual());
        let s = md.scaled_roots();
        let imaginary = s.iter().filter(|z| z.re.abs() < 1e-12 && z.im.abs() > 1e-12).count();
        check(imaginary == 2 && s.iter().all(|z| z.re.abs() < 1e-12), || format!("λ1 = λ2 spec {k}: roots {s:?}"))?;
        check(md.structure == Structure::OscillatoryUndamped, || format!("λ1 = λ2 spec {k}: {:?}", md.structure))?;
    }
    check(worst_vieta < 1e-10, || format!("Vieta residual {worst_vieta:e}"))?;
    Ok(format!("10000 Jordan (max Re s {max_re:.3}), 500 + 500 diagonal, max Vieta residual {worst_vieta:.1e}"))
}

fn analytic_vs_rk4(spec: &SystemSpec, rho0: &DensityMatrix) -> Result<f64, String> {
    let c = spec.c();
    let sol = solve_ivp(spec, rho0).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig::new(1e-3, 10.0 / (c * c), 50).map_err(|e| e.to_string())?;
    let traj = integrate(spec, rho0, &cfg).map_err(|e| e.to_string())?;
    Ok(max_deviation(&traj, |t| *sol.rho_at(t).matrix()))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut specs: Vec<SystemSpec> = Vec::new();
    for _ in 0..50 {
        specs.push(jordan(&mut rng, &MODERATE));
        specs.push(diagonal(&mut rng, &MODERATE));
        specs.push(general(&mut rng, &MODERATE));
    }
    let mut branch_specs = 0;
    while specs.len() < 200 {
        let c = rng.gen_range(0.7..1.3);
        let spec = if specs.len() % 3 == 0 {
            let y = [-1.0, 1.0][rng.gen_range(0..2)] * rng.gen_range(0.02..0.08);
            diagonal_double_root(&mut rng, y, c)
        } else {
            let y: f64 = rng.gen_range(-1.0 / 12.0..1.0 / 6.0);
            if y.abs() < 0.02 {
                continue;
            }
            jordan_double_root(&mut rng, y, c)
        };
        let md = spectrum(&spec).map_err(|e| e.to_string())?;
        let chained = md.modes.iter().any(|m| m.poly_degree > 0);
        let on_branch = matches!(md.branch, Some(CoincidingRoots::Double { .. }));
        check(md.structure == Structure::DoubleRoot && on_branch && chained, || {
            format!("constructed double root not detected: {:?} {:?}", md.structure, md.branch)
        })?;
        branch_specs += 1;
        specs.push(spec);
    }
    let mut worst = 0.0f64;
    for (k, spec) in specs.iter().enumerate() {
        let rho0 = state(&mut rng);
        let d = analytic_vs_rk4(spec, &rho0).map_err(|e| format!("spec {k}: {e}"))?;
        worst = worst.max(d);
        check(d < 1e-6, || format!("spec {k}: deviation {d:e}"))?;
    }
    check(branch_specs >= 20, || format!("only {branch_specs} double-root specs"))?;
    Ok(format!("{} specs ({branch_specs} on double-root branches with polynomial modes), max deviation {worst:.1e}", specs.len()))
}

fn convergence_to_pointer() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 300 {
        let spec = if n % 2 == 0 { jordan(&mut rng, &WIDE) } else { diagonal(&mut rng, &WIDE) };
        let md = spectrum(&spec).map_err(|e| e.to_string())?;
        if md.stability() != Stability::AllDamped {
            continue;
        }
        let sol = solve_ivp(&spec, &state(&mut rng)).map_err(|e| e.to_string())?;
        let p = compute_pointer(&spec).map_err(|e| e.to_string())?;
        let rho_p = p.unique().ok_or("AllDamped spec without a unique pointer")?;
        let t = 30.0 / md.min_decay();
        let d = frob_dist(sol.rho_at(t).matrix(), rho_p.matrix());
        worst = worst.max(d);
        check(d < 1e-6, || format!("spec {n}: distance {d:e} at T = {t:.3}"))?;
        n += 1;
    }
    Ok(format!("300 AllDamped specs, max ‖ρ(T) - ρ_p‖ {worst:.1e}"))
}

fn gauge_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let c = coupling(&mut rng, &MODERATE);
        let lambda = complex_in_disk(&mut rng, 1.5);
        let h = hamiltonian(&mut rng, 2.0);
        let a = SystemSpec::new(h, LindbladForm::jordan(lambda, c).unwrap());
        let b = SystemSpec::new(gauge_shift(&h, lambda, c), LindbladForm::jordan(ZERO, c).unwrap());
        let rho0 = state(&mut rng);
        let sa = solve_ivp(&a, &rho0).map_err(|e| e.to_string())?;
        let sb = solve_ivp(&b, &rho0).map_err(|e| e.to_string())?;
        for t in time_grid(0.0, 10.0 / (c * c), 101) {
            let d = frob_dist(sa.rho_at(t).matrix(), sb.rho_at(t).matrix());
            worst = worst.max(d);
            check(d < 1e-9, || format!("draw {k}: distance {d:e} at t = {t:.3}"))?;
        }
    }
    Ok(format!("100 draws, max pointwise distance {worst:.1e}"))
}

fn slope(e: OrderEstimate) -> Result<f64, String> {
    match e {
        OrderEstimate::Slope(s) => Ok(s),
        OrderEstimate::Saturated => Err("unexpectedly saturated".into()),
    }
}

fn perturbation_orders() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let jordan_at = |lambda: C64, de: f64, c: f64| {
        SystemSpec::new(Hamiltonian::diagonal(de / 2.0, -de / 2.0), LindbladForm::jordan(lambda, c).unwrap())
    };
    let mut rate_slopes = Vec::new();
    let mut f11_slopes = Vec::new();
    for _ in 0..5 {
        let lambda = complex_in_disk(&mut rng, 1.0);
        let de = [-1.0, 1.0][rng.gen_range(0..2)] * rng.gen_range(0.8..1.5);
        let series = weak_rates(&jordan_at(lambda, de, 1.0)).map_err(|e| e.to_string())?;
        for k in 0..3 {
            let exact = |c: f64| matched_rates(&series, &jordan_at(lambda, de, c)).unwrap()[k];
            let s = slope(order_estimate(exact, |c| series.branches[k].eval(c), &SMALL_C).map_err(|e| e.to_string())?)?;
            if k == 0 {
                check(s >= 3.5, || format!("slow branch slope {s:.3} below 3.5"))?;
            } else {
                check((s - 4.0).abs() <= 0.5, || format!("±iΔε branch slope {s:.3}"))?;
                rate_slopes.push(s);
            }
        }
        let exact = |c: f64| jordan_pointer(lambda, ZERO, de / (c * c)).f11();
        let approx = |c: f64| pointer_series(lambda, de, c, 4).unwrap().f11;
        let s = slope(order_estimate(exact, approx, &SMALL_C).map_err(|e| e.to_string())?)?;
        check((s - 8.0).abs() <= 0.5, || format!("f11 slope {s:.3}"))?;
        f11_slopes.push(s);
    }
    let series = weak_rates(&jordan_at(ZERO, 1.0, 1.0)).map_err(|e| e.to_string())?;
    for k in 0..3 {
        let exact = |c: f64| matched_rates(&series, &jordan_at(ZERO, 1.0, c)).unwrap()[k];
        let est = order_estimate(exact, |c| series.branches[k].eval(c), &SMALL_C).map_err(|e| e.to_string())?;
        check(est == OrderEstimate::Saturated, || format!("λ = 0 branch {k}: {est:?}"))?;
    }
    let range = |v: &[f64]| (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let (r0, r1) = range(&rate_slopes);
    let (f0, f1) = range(&f11_slopes);
    Ok(format!("rate slopes {r0:.2}..{r1:.2}, f11 slopes {f0:.2}..{f1:.2}, λ = 0 saturated"))
}

fn positivity_windows() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst_formula = 0.0f64;
    let mut worst_scan = 0.0f64;
    let mut cases = 0;
    while cases < 10 {
        let c = rng.gen_range(0.7..1.3);
        let spec = SystemSpec::new(
            hamiltonian(&mut rng, 1.5),
            LindbladForm::jordan(complex_in_disk(&mut rng, 1.0), c).unwrap(),
        );
        let md = spectrum(&spec).map_err(|e| e.to_string())?;
        let Some(mode) = md.modes.iter().find(|m| m.rate.im == 0.0 && m.vectors.len() == 1) else { continue };
        let rho_p = *compute_pointer(&spec).map_err(|e| e.to_string())?.unique().ok_or("no pointer")?;
        let v = mode_matrix(&mode.vectors[0]);
        let norm = (v[(0, 0)].re.powi(2) + v[(0, 1)].norm_sqr()).sqrt();
        let m = v * (v[(0, 0)].re.signum() / norm);
        let (x1, x2) = det_quadratic_roots(rho_p.matrix(), &m).ok_or("degenerate quadratic")?;
        let s3 = mode.rate.re / (c * c);
        for sign in [1.0, -1.0] {
            let bound = if sign > 0.0 { x2 } else { -x1 };
            let w = 2.0 * bound;
            let rho0 = DensityMatrix::new(*rho_p.matrix() + m * (sign * w)).map_err(|e| e.to_string())?;
            let sol = solve_ivp(&spec, &rho0).map_err(|e| e.to_string())?;
            let red = single_mode_reduction(&sol).map_err(|e| e.to_string())?;
            check(red.sign == sign, || format!("reduction sign {} vs {sign}", red.sign))?;
            let win = positivity_window(&red, &sol.particular, c).map_err(|e| e.to_string())?;
            let expected = 2f64.ln() / (-s3 * c * c);
            let df = (win.t_min - expected).abs();
            worst_formula = worst_formula.max(df);
            check(win.valid && df < 1e-8, || format!("t_min {} vs ln2/(-s3 c²) = {expected}", win.t_min))?;

            let cfg = IntegratorConfig::new(1e-3, 3.0 * expected, 1).map_err(|e| e.to_string())?;
            let traj = integrate(&spec, &rho0, &cfg).map_err(|e| e.to_string())?;
            let scanned = match det_scan(&spec, &traj) {
                DetScan::From(t) => t,
                DetScan::NotFound => return Err("det scan found no positive tail".into()),
            };
            let ds = (scanned - win.t_min).abs();
            worst_scan = worst_scan.max(ds);
            check(ds < 1e-8, || format!("det scan {scanned} vs window {}", win.t_min))?;
        }
        cases += 1;
    }
    Ok(format!("{} constructed cases, formula error {worst_formula:.1e}, det-scan error {worst_scan:.1e}", 2 * cases))
}

fn uniton_table() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let (mut all, mut none) = (0, 0);
    for k in 0..100 {
        let c = coupling(&mut rng, &MODERATE);
        let l1 = complex_in_disk(&mut rng, 1.5);
        let l2 = complex_in_disk(&mut rng, 1.5);
        let h = hamiltonian(&mut rng, 2.0);
        let t_max = 10.0 / h.matrix().spectral_norm().max(1e-3);

        let spec = SystemSpec::new(h, LindbladForm::diagonal(l1, l1, c).unwrap());
        let v = classify_unitons(&spec).map_err(|e| e.to_string())?;
        check(v == UnitonVerdict::AllStates, || format!("draw {k}: λ1 = λ2 gave {v:?}"))?;
        for _ in 0..5 {
            let rho = state(&mut rng);
            let d = dissipator_norm(&spec, rho.matrix()).max(liouville_defect(&spec, rho.matrix(), t_max, 20));
            worst = worst.max(d);
            check(d < 1e-10, || format!("draw {k}: AllStates member fails with {d:e}"))?;
        }
        all += 1;

        for h in [diagonal_hamiltonian(&mut rng, 2.0), h] {
            let spec = SystemSpec::new(h, LindbladForm::diagonal(l1, l2, c).unwrap());
            let v = classify_unitons(&spec).map_err(|e| e.to_string())?;
            check(matches!(v, UnitonVerdict::None { .. }), || format!("draw {k}: λ1 ≠ λ2 gave {v:?}"))?;
            none += 1;
        }

        let lambda = complex_in_disk(&mut rng, 1.5);
        let spec = SystemSpec::new(h, LindbladForm::jordan(lambda, c).unwrap());
        match classify_unitons(&spec).map_err(|e| e.to_string())? {
            UnitonVerdict::None { candidate: UnitonCandidate::Unique(rho) } => {
                let d = frob_dist(rho.matrix(), jordan_candidate(lambda).matrix());
                check(d < 1e-10, || format!("draw {k}: Jordan candidate off by {d:e}"))?;
                let diss = dissipator_norm(&spec, rho.matrix());
                check(diss < 1e-10, || format!("draw {k}: Jordan candidate dissipator {diss:e}"))?;
            }
            other => return Err(format!("draw {k}: Jordan gave {other:?}")),
        }
        none += 1;
    }
    Ok(format!("{all} AllStates, {none} None, max uniton condition defect {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pointer stationarity", pointer_stationarity),
        ("maximally mixed branch", maximally_mixed_branch),
        ("degenerate-H Jordan pointer", degenerate_jordan),
        ("stability", stability),
        ("oracle equivalence", oracle_equivalence),
        ("convergence to pointer", convergence_to_pointer),
        ("gauge equivalence", gauge_equivalence),
        ("perturbation orders", perturbation_orders),
        ("positivity window", positivity_windows),
        ("uniton table", uniton_table),
    ];
    let start = Instant::now();
    let results: Vec<(usize, &str, Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .map(|(i, (name, f))| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (i + 1, *name, out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, name, out, secs) in &results {
        match out {
            Ok(detail) => println!("acceptance {i:>2} PASS  {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("acceptance {i:>2} FAIL  {name}: {why} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", results.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
