//! Discrete TM, Nesterov and gradient descent on the example cost in
//! double-double arithmetic, at full and reduced stepsize.
use tm_ode::cost::paper_example_cost_extended;
use tm_ode::discrete::{nominal_parameters, run_discrete};
use tm_ode::{Algorithm, DoubleDouble};

fn main() -> tm_ode::Result<()> {
    let f = paper_example_cost_extended();
    let x0 = [DoubleDouble::from_f64(3.0)];
    for scale in [1.0, 0.3] {
        println!("stepsize scale {scale}");
        for alg in Algorithm::ALL {
            let p = nominal_parameters(alg, f.m(), f.l())?;
            let tr = run_discrete(alg, &f, &p, &x0, 200, scale)?;
            let errs = tr.f_errors();
            println!(
                "  {alg:>3}: k=50 {:.3e}  k=100 {:.3e}  k=200 {:.3e}",
                errs[50], errs[100], errs[200]
            );
        }
    }
    Ok(())
}
