//! Ratio μ/M of the effective strong-convexity constant across condition numbers.
use tm_ode::params::{log_grid, mu_bounds_sweep};

fn main() -> tm_ode::Result<()> {
    let rows = mu_bounds_sweep(&log_grid(1.0, 1e6, 13)?, 1.0)?;
    println!("{:>12} {:>12} {:>10}", "kappa", "mu/L", "mu/M");
    for r in rows {
        println!("{:>12.4e} {:>12.4e} {:>10.6}", r.kappa, r.mu_over_l, r.mu_over_m);
    }
    Ok(())
}
