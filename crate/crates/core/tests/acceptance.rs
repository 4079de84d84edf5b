//! Acceptance runner: one line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use tm_ode::cost::{paper_example_cost, paper_example_cost_extended};
use tm_ode::discrete::{nominal_parameters, run_discrete};
use tm_ode::iqc::{
    assemble_lmi, build_embedding, iqc_sweep, nsd_check, sector_quadratic, IqcOptions, NSD_MARGIN,
};
use tm_ode::linalg::symmetric_eigen;
use tm_ode::ode::{integrate, IntegrateOptions, OdeModel};
use tm_ode::params::log_grid;
use tm_ode::rates::{
    cost_bound_prefactor_rho, maximize_rate, p_nag, p_star_nag, p_star_numeric, p_star_tm, verify_decay,
};
use tm_ode::{mu_from_kappa, tm_parameters, Algorithm, DoubleDouble, Real, Trajectory};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mu_bounds() -> Outcome {
    let l = 1.0;
    let mut worst_ratio: f64 = 0.0;
    for kappa in log_grid(1.0, 1e6, 200).map_err(|e| e.to_string())? {
        let m = l / kappa;
        let mu = mu_from_kappa(kappa, l).map_err(|e| e.to_string())?;
        ensure(mu > 0.0 && mu <= l, || format!("κ={kappa}: μ={mu} outside (0, L]"))?;
        ensure(mu >= m, || format!("κ={kappa}: μ={mu} < M={m}"))?;
        ensure(mu <= 1.3661 * m + 1e-6 * m, || format!("κ={kappa}: μ/M={}", mu / m))?;
        worst_ratio = worst_ratio.max(mu / m);
    }
    let at_one = mu_from_kappa(1.0, l).map_err(|e| e.to_string())?;
    ensure((at_one - l).abs() <= 1e-10, || format!("μ(κ=1)={at_one}"))?;
    Ok(format!("max μ/M = {worst_ratio:.6}"))
}

fn nag_rate() -> Outcome {
    let mut detail = String::new();
    for m in [1.0, 0.038, 1e-4] {
        let (phi, p) = maximize_rate(|phi| p_nag(phi, m).unwrap_or(f64::NEG_INFINITY));
        let want = 3.0 / 7.0 * m.sqrt();
        ensure((phi - 0.75).abs() <= 1e-6 * 0.75, || format!("M={m}: φ*={phi}"))?;
        ensure((p - want).abs() <= 1e-6 * want, || format!("M={m}: p*={p}, want {want}"))?;
        ensure(p > m.sqrt() / 4.0, || format!("M={m}: p*={p} not above √M/4"))?;
        let cert = p_star_nag(m).map_err(|e| e.to_string())?;
        ensure((cert.rate - want).abs() <= 1e-6 * want, || format!("M={m}: certificate {}", cert.rate))?;
        detail = format!("φ* = {phi:.9}, p*/√M = {:.9}", p / m.sqrt());
    }
    Ok(detail)
}

fn tm_vs_nag() -> Outcome {
    let l = 1.0;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    let mut min_gain = f64::INFINITY;
    for kappa in log_grid(1.1, 1e4, 50).map_err(|e| e.to_string())? {
        let m = l / kappa;
        let tm = p_star_tm(&tm_parameters(m, l).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .rate;
        let nag = p_star_nag(m).map_err(|e| e.to_string())?.rate;
        ensure(tm >= nag, || format!("κ={kappa}: TM {tm} < NAG {nag}"))?;
        ensure(tm <= prev.0 && nag <= prev.1, || format!("κ={kappa}: rate increased"))?;
        prev = (tm, nag);
        min_gain = min_gain.min(tm / nag);
    }
    Ok(format!("min p*_TM/p*_NAG = {min_gain:.4}"))
}

fn envelope() -> Outcome {
    let f = paper_example_cost();
    let p = tm_parameters(f.m(), f.l()).map_err(|e| e.to_string())?;
    let cert = p_star_tm(&p).map_err(|e| e.to_string())?;
    let model = OdeModel::tm_high_res(&p);
    let y0 = [3.0];
    let init = model.rest_initial_state(&f, &y0).map_err(|e| e.to_string())?;
    let sl = f.l().sqrt();
    let opts = IntegrateOptions::new(f.l(), 200.0 / sl).dt(0.01 / sl).lyapunov(true);
    let tr = integrate(&model, &f, &init, opts).map_err(|e| e.to_string())?;
    let xs = f.minimizer().ok_or("no minimizer")?[0];
    let c = cost_bound_prefactor_rho(p.rho, p.alpha);
    let report = verify_decay(&tr, &cert, Some((c, (y0[0] - xs).powi(2)))).map_err(|e| e.to_string())?;
    let cost = report.cost_bound.clone().ok_or("no cost check")?;
    ensure(cost.passed, || format!("cost bound violated by {:e} at t={}", cost.worst_margin, cost.worst_t))?;
    ensure(report.monotone.passed, || {
        format!(
            "V·e^(pt) increased by {:e} at t={}",
            report.monotone.worst_margin, report.monotone.worst_t
        )
    })?;
    Ok(format!(
        "p* = {:.6}, C·α = {:.4}, worst cost margin {:.2e}",
        cert.rate,
        c * p.alpha,
        cost.worst_margin
    ))
}

fn discrete_runs(scale: f64) -> Result<Vec<Trajectory>, String> {
    let f = paper_example_cost_extended();
    let x0 = [<DoubleDouble as Real>::from_f64(3.0)];
    Algorithm::ALL
        .iter()
        .map(|&alg| {
            let p = nominal_parameters(alg, f.m(), f.l()).map_err(|e| e.to_string())?;
            run_discrete(alg, &f, &p, &x0, 200, scale).map_err(|e| e.to_string())
        })
        .collect()
}

fn final_of(tr: &Trajectory) -> f64 {
    tr.final_error().unwrap_or(f64::NAN)
}

fn ordering() -> Outcome {
    let runs = discrete_runs(1.0)?;
    let (tm, nag, gd) = (final_of(&runs[0]), final_of(&runs[1]), final_of(&runs[2]));
    ensure(tm < nag && nag < gd, || format!("TM {tm:e}, NAG {nag:e}, GD {gd:e}"))?;
    Ok(format!("TM {tm:.2e} < NAG {nag:.2e} < GD {gd:.2e}"))
}

fn tracking() -> Outcome {
    let f = paper_example_cost_extended();
    let p = tm_parameters(f.m(), f.l()).map_err(|e| e.to_string())?;
    let disc = run_discrete(Algorithm::Tm, &f, &p, &[<DoubleDouble as Real>::from_f64(3.0)], 200, 1.0)
        .map_err(|e| e.to_string())?;
    let model = OdeModel::tm_high_res(&p);
    let init = model
        .rest_initial_state(&f, &[<DoubleDouble as Real>::from_f64(3.0)])
        .map_err(|e| e.to_string())?;
    let h = p.alpha.sqrt();
    let opts = IntegrateOptions::new(f.l(), 200.0 * h).dt(0.01 / f.l().sqrt());
    let ode = integrate(&model, &f, &init, opts).map_err(|e| e.to_string())?;
    let mut worst = (1.0f64, 0usize);
    for s in disc.samples.iter().filter(|s| s.k >= 100) {
        let o = ode.f_error_at(s.k as f64 * h).ok_or("ODE sample missing")?;
        let gap = (o / s.f_error).max(s.f_error / o);
        if !(gap <= worst.0) {
            worst = (gap, s.k);
        }
    }
    ensure(worst.0 <= 10.0, || {
        format!("ODE/discrete gap {:.1}x at k={} (limit 10x)", worst.0, worst.1)
    })?;
    Ok(format!("largest gap {:.2}x at k={}", worst.0, worst.1))
}

fn stepsize_scaling() -> Outcome {
    let base = discrete_runs(1.0)?;
    let scaled = discrete_runs(0.3)?;
    for tr in &scaled[..2] {
        let start = tr.len() / 20;
        for w in tr.samples[start..].windows(2) {
            let inc = w[1].f_error - w[0].f_error;
            ensure(inc <= 1e-12, || {
                format!("{} increased by {inc:e} at k={}", tr.algorithm, w[1].k)
            })?;
        }
    }
    for (a, b) in scaled.iter().zip(&base) {
        ensure(final_of(a) > final_of(b), || {
            format!("{}: scaled final {:e} not above {:e}", a.algorithm, final_of(a), final_of(b))
        })?;
    }
    Ok(format!(
        "finals TM {:.2e}, NAG {:.2e}, GD {:.2e}",
        final_of(&scaled[0]),
        final_of(&scaled[1]),
        final_of(&scaled[2])
    ))
}

fn alpha_robustness() -> Outcome {
    let l = 1.0;
    let mut margin = f64::INFINITY;
    for kappa in log_grid(2.0, 1e3, 20).map_err(|e| e.to_string())? {
        let base = tm_parameters(l / kappa, l).map_err(|e| e.to_string())?;
        let (_, at_tm) = p_star_numeric(&base);
        for factor in [0.25, 0.5, 2.0] {
            let scaled = base.with_alpha_scaled(factor).map_err(|e| e.to_string())?;
            let (_, v) = p_star_numeric(&scaled);
            ensure(v <= at_tm, || format!("κ={kappa}, factor {factor}: {v} > {at_tm}"))?;
            margin = margin.min(at_tm - v);
        }
    }
    Ok(format!("smallest advantage {margin:.3e}"))
}

fn iqc() -> Outcome {
    let ms = [0.01, 0.1, 1.0];
    let kappas = [2.0, 5.0, 10.0, 50.0, 100.0];
    let rows = iqc_sweep(&ms, &kappas, IqcOptions::default()).map_err(|e| e.to_string())?;
    let mut certified = 0;
    for &m in &ms {
        let mut prev = f64::INFINITY;
        for r in rows.iter().filter(|r| r.m == m) {
            let Some(cert) = r.outcome.certificate() else { continue };
            certified += 1;
            ensure(cert.rate > 0.0, || format!("M={m}, κ={}: rate {}", r.kappa, cert.rate))?;
            let w = cert.witness.as_ref().ok_or("certificate without witness")?;
            let params = tm_parameters(m, r.kappa * m).map_err(|e| e.to_string())?;
            let qf = sector_quadratic(params.m, params.l).map_err(|e| e.to_string())?;
            let lmi = assemble_lmi(&build_embedding(&params), &qf, &w.p0, w.sigma, cert.rate)
                .map_err(|e| e.to_string())?;
            ensure(nsd_check(&lmi.assembled, NSD_MARGIN).map_err(|e| e.to_string())?, || {
                format!("M={m}, κ={}: witness fails the NSD check", r.kappa)
            })?;
            let p0_min = symmetric_eigen(&w.p0, 1e-12).map_err(|e| e.to_string())?.min();
            ensure(p0_min > 0.0, || format!("M={m}, κ={}: P0 not positive", r.kappa))?;
            ensure(cert.rate <= prev, || format!("M={m}: rate increased at κ={}", r.kappa))?;
            prev = cert.rate;
        }
    }
    Ok(format!("{certified} of {} grid points certified", rows.len()))
}

fn properties() -> Outcome {
    let (violations, worst) = common::class_inequality_violations(7, 2000);
    ensure(violations == 0, || format!("{violations} class-inequality violations ({worst:e})"))?;
    let blind = common::low_resolution_blindness(11, 1000);
    ensure(blind == 0.0, || format!("low-resolution models differ by {blind:e}"))?;
    let drift = common::equilibrium_drift();
    ensure(drift <= 1e-12, || format!("equilibrium drift {drift:e}"))?;
    let residual = common::output_form_residual_along_example();
    ensure(residual <= 1e-8, || format!("output-form residual {residual:e}"))?;
    let dev = common::max_recursion_deviation(&[0.1, 1.0, 4.0], &[1.0, -2.0, 0.5], 150);
    ensure(dev <= 1e-9, || format!("recursion deviates from closed form by {dev:e}"))?;
    let f = tm_ode::quadratic_cost(&[0.05, 1.0]).map_err(|e| e.to_string())?;
    let p = tm_parameters(f.m(), f.l()).map_err(|e| e.to_string())?;
    let model = OdeModel::tm_high_res(&p);
    let (e1, e2) = common::rk4_halving_errors(&model, &[0.05, 1.0], &[1.0, 1.0], 0.1, 20.0);
    ensure(e1 / e2 >= 8.0, || format!("RK4 halving ratio {:.2}", e1 / e2))?;
    Ok(format!("RK4 halving ratio {:.2}, recursion deviation {dev:.1e}", e1 / e2))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, u64, fn() -> Outcome); 10] = [
        ("AC1", "mu bounds", 1, mu_bounds),
        ("AC2", "nesterov rate", 1, nag_rate),
        ("AC3", "tm vs nesterov rates", 5, tm_vs_nag),
        ("AC4", "cost envelope", 10, envelope),
        ("AC5a", "final error ordering", 5, ordering),
        ("AC5b", "ode tracks discrete", 5, tracking),
        ("AC6", "reduced stepsize", 5, stepsize_scaling),
        ("AC7", "stepsize robustness", 5, alpha_robustness),
        ("AC8", "iqc sweep", 60, iqc),
        ("AC9", "property suites", 30, properties),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > Duration::from_secs(budget) => Err(format!("{d}; over the {budget} s budget")),
            o => o,
        };
        match outcome {
            Ok(d) => println!("{id} PASS {name} ({:.2} s): {d}", elapsed.as_secs_f64()),
            Err(d) => {
                failed += 1;
                println!("{id} FAIL {name} ({:.2} s): {d}", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
