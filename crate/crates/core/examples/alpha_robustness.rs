//! How the certified rate reacts when only the stepsize α is rescaled.
use tm_ode::params::log_grid;
use tm_ode::rates::alpha_robustness_sweep;

fn main() -> tm_ode::Result<()> {
    let factors = [0.25, 0.5, 1.0, 2.0];
    let rows = alpha_robustness_sweep(&log_grid(2.0, 1e3, 6)?, 1.0, &factors)?;
    print!("{:>10}", "kappa");
    for f in factors {
        print!(" {:>10}", format!("x{f}"));
    }
    println!();
    for chunk in rows.chunks(factors.len()) {
        print!("{:>10.3e}", chunk[0].kappa);
        for r in chunk {
            print!(" {:>10.6}", r.p_star_over_sqrt_l);
        }
        println!();
    }
    Ok(())
}
