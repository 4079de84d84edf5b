//! Certified rates of the triple momentum and Nesterov flows, normalised by √L.
use tm_ode::params::log_grid;
use tm_ode::rates::rate_sweep;

fn main() -> tm_ode::Result<()> {
    println!("{:>10} {:>12} {:>12} {:>8}", "kappa", "p_TM/sqrtL", "p_NAG/sqrtL", "gain");
    for r in rate_sweep(&log_grid(1.1, 1e4, 12)?, 1.0)? {
        println!(
            "{:>10.3e} {:>12.6} {:>12.6} {:>8.4}",
            r.kappa,
            r.p_tm_over_sqrt_l,
            r.p_nag_over_sqrt_l,
            r.p_tm_over_sqrt_l / r.p_nag_over_sqrt_l
        );
    }
    Ok(())
}
