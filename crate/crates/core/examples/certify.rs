//! Integrate the triple momentum flow on the example cost and check the
//! Lyapunov decay and the cost envelope along the way.
use tm_ode::cost::paper_example_cost;
use tm_ode::ode::{integrate, IntegrateOptions, OdeModel};
use tm_ode::rates::{cost_bound_prefactor, p_star_tm, verify_decay};
use tm_ode::tm_parameters;

fn main() -> tm_ode::Result<()> {
    let f = paper_example_cost();
    let p = tm_parameters(f.m(), f.l())?;
    let cert = p_star_tm(&p)?;
    let model = OdeModel::tm_high_res(&p);
    let y0 = [3.0];
    let init = model.rest_initial_state(&f, &y0)?;
    let opts = IntegrateOptions::new(f.l(), 200.0 / f.l().sqrt()).lyapunov(true);
    let tr = integrate(&model, &f, &init, opts)?;
    let xs = f.minimizer().expect("known minimizer")[0];
    let bound = (cost_bound_prefactor(&p), (y0[0] - xs).powi(2));
    let report = verify_decay(&tr, &cert, Some(bound))?;
    println!("phi* = {:.6}, closed form consistent: {}", cert.phi_star, cert.closed_form_consistent);
    print!("{}", report.summary());
    Ok(())
}
