//! Plug a user-defined cost into the iterations and the flow.
use tm_ode::cost::CostFunction;
use tm_ode::discrete::{nominal_parameters, run_discrete};
use tm_ode::ode::{integrate, IntegrateOptions, OdeModel};
use tm_ode::{tm_parameters, Algorithm};

fn main() -> tm_ode::Result<()> {
    // f(x) = ½x₀² + 2x₁² + ln cosh(x₀ − x₁), with 1 ≤ ∇²f ≤ 6
    let f = CostFunction::from_fns(
        "logcosh",
        2,
        |x: &[f64]| 0.5 * x[0] * x[0] + 2.0 * x[1] * x[1] + (x[0] - x[1]).cosh().ln(),
        |x: &[f64]| {
            let t = (x[0] - x[1]).tanh();
            vec![x[0] + t, 4.0 * x[1] - t]
        },
        1.0,
        6.0,
    )?
    .with_minimizer(vec![0.0, 0.0])?;
    for alg in Algorithm::ALL {
        let p = nominal_parameters(alg, f.m(), f.l())?;
        let tr = run_discrete(alg, &f, &p, &[2.0, -1.0], 40, 1.0)?;
        println!("{alg:>3} after 40 iterations: {:.3e}", tr.final_error().unwrap_or(f64::NAN));
    }
    let p = tm_parameters(f.m(), f.l())?;
    let model = OdeModel::tm_high_res(&p);
    let init = model.rest_initial_state(&f, &[2.0, -1.0])?;
    let tr = integrate(&model, &f, &init, IntegrateOptions::new(f.l(), 10.0))?;
    println!("tm flow at t = 10: {:.3e}", tr.final_error().unwrap_or(f64::NAN));
    Ok(())
}
