//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use smoothmin::domains::grid_search_aminus;
use smoothmin::properties::DEFAULT_DELTA_GRID;
use smoothmin::*;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> std::result::Result<(), String> {
    let e = started.elapsed();
    ensure(e < limit, || format!("runtime {:.2}s exceeds {:.0}s", e.as_secs_f64(), limit.as_secs_f64()))
}

fn campaign_spec(n: usize) -> DomainSpec {
    match n {
        2 => DomainSpec::new(2, 0.2, 0.5).unwrap(),
        7 => DomainSpec::new(7, 0.1, 0.075).unwrap(),
        _ => DomainSpec::new(n, 0.2, 0.9 * feasibility_bound(n, 0.2).unwrap()).unwrap(),
    }
}

fn count_violations(r: &PropertyReport, name: &str) -> std::result::Result<u64, String> {
    r.check(name)
        .map(|c| c.violations)
        .ok_or_else(|| format!("{}: check {name} missing", r.lemma_id))
}

fn crit1() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=7 {
        for delta in [1e-2, 1e-4] {
            let cfg = ApproxConfig::new(n, delta).map_err(|e| e.to_string())?;
            for p in sample_a(&campaign_spec(n), 100 + n as u64, 100).map_err(|e| e.to_string())? {
                let a = mun(&p, &cfg).map_err(|e| e.to_string())?;
                let b = mun_bruteforce(&p, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max |dp - recursion| = {worst:e}"))?;
    within(Duration::from_secs(10), started)?;
    Ok(format!("max |dp - recursion| = {worst:e} over 1200 points"))
}

fn fd_gradient(x: &[f64], cfg: &ApproxConfig, h: f64) -> Vec<f64> {
    let f = |c: &[f64]| mun(&Point::new(c.to_vec()), cfg).unwrap();
    (0..x.len())
        .map(|j| {
            let at = |t: f64| {
                let mut c = x.to_vec();
                c[j] += t;
                f(&c)
            };
            (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
        })
        .collect()
}

fn fd_hessian(x: &[f64], cfg: &ApproxConfig, h: f64) -> Vec<Vec<f64>> {
    let g = |c: &[f64]| mun_grad(&Point::new(c.to_vec()), cfg).unwrap().1;
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        let at = |t: f64| {
            let mut c = x.to_vec();
            c[j] += t;
            g(&c)
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        for i in 0..n {
            out[i][j] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
        }
    }
    out
}

fn crit2() -> Outcome {
    let started = Instant::now();
    let (mut wg, mut ws, mut wh) = (0.0f64, 0.0f64, 0.0f64);
    for n in 3..=7 {
        for delta in [1e-2, 1e-4] {
            let cfg = ApproxConfig::new(n, delta).unwrap();
            for p in sample_a(&campaign_spec(n), 200 + n as u64, 1000).unwrap() {
                let h = f64::EPSILON.powf(0.2) * delta.sqrt() * p.sum();
                let r = mun_eval(&p, &cfg).map_err(|e| e.to_string())?;
                let fd = fd_gradient(p.coords(), &cfg, h);
                let gscale = r.gradient.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let gerr = r.gradient.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                wg = wg.max(gerr / gscale);
                let hscale = r.hessian.amax();
                ws = ws.max((&r.hessian - r.hessian.transpose()).amax() / hscale);
                let hf = fd_hessian(p.coords(), &cfg, h);
                let mut herr = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        herr = herr.max((r.hessian[(i, j)] - hf[i][j]).abs());
                    }
                }
                wh = wh.max(herr / hscale);
            }
        }
    }
    ensure(wg <= 1e-6, || format!("gradient relative error {wg:e}"))?;
    ensure(ws <= 1e-10, || format!("Hessian asymmetry {ws:e}"))?;
    ensure(wh <= 1e-5, || format!("Hessian relative error {wh:e}"))?;
    within(Duration::from_secs(60), started)?;
    Ok(format!("gradient rel err {wg:.2e}, Hessian asymmetry {ws:.2e}, Hessian rel err {wh:.2e}"))
}

fn crit3() -> Outcome {
    let mut parts = Vec::new();
    for n in 3..=6 {
        for delta in [1e-2, 1e-4] {
            let r = check_cor25(&campaign_spec(n), delta, 300 + n as u64, 10_000).map_err(|e| e.to_string())?;
            for name in
                ["ii.partials_lower", "ii.partials_upper", "iii.euler", "ii.concavity", "iv.mean_bound"]
            {
                let v = count_violations(&r, name)?;
                ensure(v == 0, || format!("n={n} delta={delta}: {name} has {v} violations"))?;
            }
            ensure(r.violations == 0, || format!("n={n} delta={delta}: {} violations", r.violations))?;
            ensure(r.samples_tested == 10_000, || "sample count".to_string())?;
        }
        parts.push(format!("n={n}"));
    }
    Ok(format!("zero violations over 10^4 samples per n and delta ({})", parts.join(" ")))
}

fn crit4() -> Outcome {
    let mut parts = Vec::new();
    let mut coarse = Vec::new();
    for n in 3..=6 {
        let mut c = Vec::new();
        for delta in [1e-2, 1e-4] {
            let r = check_lemma24(&campaign_spec(n), delta, 400 + n as u64, 5_000).map_err(|e| e.to_string())?;
            let cn = r.measured_constants.get("c_n").copied().unwrap_or(f64::NAN);
            ensure(cn.is_finite(), || format!("n={n} delta={delta}: c(n) = {cn}"))?;
            // The pair checks need delta small relative to beta; only the
            // smaller delta is held to zero violations.
            if delta < 1e-3 {
                ensure(r.violations == 0, || format!("n={n} delta={delta}: {} violations", r.violations))?;
            } else if r.violations > 0 {
                coarse.push(format!("n={n}: {} pair violations at 1e-2", r.violations));
            }
            c.push(cn);
        }
        let ratio = c[0].max(c[1]) / c[0].min(c[1]);
        ensure(ratio <= 3.0, || format!("n={n}: c(n) {:.4} vs {:.4}, ratio {ratio:.3}", c[0], c[1]))?;
        parts.push(format!("c({n}) = {:.4}/{:.4}", c[0], c[1]));
    }
    let mut detail = format!("{} at delta = 1e-2/1e-4", parts.join(", "));
    if !coarse.is_empty() {
        detail.push_str(&format!(" ({})", coarse.join(", ")));
    }
    Ok(detail)
}

fn crit5() -> Outcome {
    let mut parts = Vec::new();
    for n in 3..=5 {
        let r = check_lemma26(&campaign_spec(n), &DEFAULT_DELTA_GRID, 500 + n as u64, 1000)
            .map_err(|e| e.to_string())?;
        for name in ["i.ordering@1e-4", "iii.diag_negative@1e-4"] {
            let v = count_violations(&r, name)?;
            ensure(v == 0, || format!("n={n}: {name} has {v} violations"))?;
        }
        for name in ["ii.min_partial_gap_decreasing", "ii.other_partial_decreasing"] {
            let c = r.check(name).ok_or_else(|| format!("{name} missing"))?;
            ensure(c.tested == 3 && c.violations == 0, || format!("n={n}: {name}: {c:?}"))?;
        }
        let terminal = r.measured_constants["terminal_min_partial_gap"];
        ensure(terminal <= 0.1, || format!("n={n}: terminal |mu_xmin - 1| = {terminal:e}"))?;
        parts.push(format!("n={n} terminal {terminal:.2e}"));
    }
    Ok(format!("ordering and diagonal negativity hold at 1e-4, limits decrease; {}", parts.join(", ")))
}

fn crit6() -> Outcome {
    let mut parts = Vec::new();
    for n in 3..=5 {
        let r = check_lemma27(&campaign_spec(n), 1e-4, 600 + n as u64, 10_000).map_err(|e| e.to_string())?;
        let c = r.check("quotient.bound").ok_or("quotient.bound missing")?;
        ensure(c.violations == 0 && c.tested > 0, || format!("n={n}: {c:?}"))?;
        parts.push(format!("n={n}: {} pairs", c.tested));
    }
    let r = check_lemma27(&campaign_spec(2), 0.2, 602, 10_000).map_err(|e| e.to_string())?;
    for name in ["quotient.closed_form", "quotient.base_bound"] {
        let c = r.check(name).ok_or_else(|| format!("{name} missing"))?;
        ensure(c.violations == 0 && c.tested > 9_000, || format!("n=2: {name}: {c:?}"))?;
    }
    Ok(format!("zero violations ({}; n=2 base case at delta 0.2)", parts.join(", ")))
}

fn crit7() -> Outcome {
    let (n, alpha) = (3, 0.2);
    let beta_max = feasibility_bound(n, alpha).map_err(|e| e.to_string())?;
    let at_max = DomainSpec::new(n, alpha, beta_max).unwrap();
    let pts = sample_aminus(&at_max, 7, 1000).map_err(|e| e.to_string())?;
    ensure(pts.iter().all(|p| at_max.contains_minus(p)), || "sample outside A_3^-".to_string())?;
    let beyond = DomainSpec::new(n, alpha, 1.01 * beta_max).unwrap();
    match sample_aminus(&beyond, 7, 10) {
        Err(Error::EmptyDomain { .. }) => {}
        other => return Err(format!("expected EmptyDomain, got {other:?}")),
    }
    let (found, first) = grid_search_aminus(&beyond, 0.01);
    ensure(found == 0, || format!("grid search found {found} members, e.g. {first:?}"))?;
    let (at_max_found, _) = grid_search_aminus(&at_max, 0.01);
    ensure(at_max_found > 0, || "grid search finds nothing even at beta_max".to_string())?;
    Ok(format!(
        "beta_max = {beta_max}: 1000 samples; at 1.01 beta_max EmptyDomain and 0 of 201^3 grid points (vs {at_max_found} at beta_max)"
    ))
}

fn residual(samples: &[OperatorSample], f: impl Fn(&OperatorSample) -> f64) -> f64 {
    samples.iter().map(f).fold(0.0, |m, v: f64| m.max(v.abs()))
}

fn stable_constants(c: &[f64]) -> std::result::Result<(), String> {
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    ensure(hi / lo <= 1.25, || format!("constants {c:?} not stable"))
}

fn crit8() -> Outcome {
    let n = 3;
    let steps = [0.02, 0.01, 0.005];
    let mut tr = Vec::new();
    let mut c18 = Vec::new();
    for &h in &steps {
        let p = solve_bowl(n, 30.0, h).map_err(|e| e.to_string())?;
        if h == 0.01 {
            ensure((p.h[0] - 1.0).abs() <= 1e-6, || format!("H(0) = {}", p.h[0]))?;
        }
        tr.push(p.translator_residual());
        let cfg = ApproxConfig::new(n, 1e-4).unwrap();
        let ops = operator_samples(&p, &cfg).map_err(|e| e.to_string())?;
        c18.push(residual(&ops, |o| o.residual18) / (h * h));
    }
    ensure(tr[1] <= 1e-6, || format!("translator residual {:e} at step 0.01", tr[1]))?;
    let ratios = [tr[0] / tr[1], tr[1] / tr[2]];
    ensure(ratios.iter().all(|r| (12.0..=20.0).contains(r)), || format!("refinement ratios {ratios:?}"))?;
    stable_constants(&c18)?;
    Ok(format!(
        "translator residual {:.2e} at 0.01, ratios {:.1}/{:.1}; residual18 constants {:.4}/{:.4}/{:.4}",
        tr[1], ratios[0], ratios[1], c18[0], c18[1], c18[2]
    ))
}

fn crit9() -> Outcome {
    let started = Instant::now();
    let n = 3;
    let mut notes = Vec::new();
    for delta in [1e-2, 1e-4] {
        let cfg = ApproxConfig::new(n, delta).unwrap();
        let mut c21 = Vec::new();
        let mut c22 = Vec::new();
        for h in [0.02, 0.01, 0.005] {
            let p = solve_bowl(n, 30.0, h).map_err(|e| e.to_string())?;
            let ops = operator_samples(&p, &cfg).map_err(|e| e.to_string())?;
            let t24 = ops.iter().map(|o| o.term24).fold(f64::NEG_INFINITY, f64::max);
            ensure(t24 <= 1e-10, || format!("term24 max {t24:e}"))?;
            let qmax = 1.0 / (n - 1) as f64;
            ensure(
                ops.iter().all(|o| o.q_delta > 0.0 && o.q_delta <= qmax),
                || "Q_delta outside (0, 1/(n-1)]".to_string(),
            )?;
            c21.push(residual(&ops, |o| o.residual21) / (h * h));
            c22.push(residual(&ops, |o| o.lhs22 - o.rhs22) / (h * h));
            if h == 0.005 {
                let lhs = ops.iter().map(|o| o.lhs22).fold(f64::NEG_INFINITY, f64::max);
                ensure(lhs <= 1e-4, || format!("max lhs22 {lhs:e} at step 0.005"))?;
                notes.push(format!("delta {delta:e}: max lhs22 {lhs:.2e}"));
            }
        }
        stable_constants(&c21).map_err(|e| format!("residual21 {e}"))?;
        stable_constants(&c22).map_err(|e| format!("lhs22 - rhs22 {e}"))?;
        notes.push(format!("C21 = {:.3}, C22 = {:.3}", c21[2], c22[2]));
    }
    within(Duration::from_secs(60), started)?;
    Ok(notes.join("; "))
}

fn crit10() -> Outcome {
    let mut tested = 0;
    for n in 3..=5 {
        for beta in [0.01, 0.1, 0.36] {
            let spec = DomainSpec::new(n, 0.2, beta).unwrap();
            for k in -20..=20 {
                let x1 = k as f64 * 0.075;
                let kappa = grim_reaper_product(n, x1).map_err(|e| e.to_string())?;
                ensure(two_convexity_ratio_of(&kappa) == 0.0, || format!("ratio nonzero at {x1}"))?;
                ensure(!in_a(&Point::new(kappa), &spec), || format!("member at n={n} beta={beta} x1={x1}"))?;
                tested += 1;
            }
        }
    }
    Ok(format!("{tested} grim reaper tuples rejected, ratio 0"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "oracle equivalence", crit1),
        (2, "derivative correctness", crit2),
        (3, "mu^n structure suite", crit3),
        (4, "sqrt(delta) approximation constant", crit4),
        (5, "derivative limits as delta decreases", crit5),
        (6, "difference-quotient bound", crit6),
        (7, "feasibility sharpness", crit7),
        (8, "bowl geometry convergence", crit8),
        (9, "operator identities on the bowl", crit9),
        (10, "grim reaper negative control", crit10),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())))));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({secs:.2}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({secs:.2}s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
