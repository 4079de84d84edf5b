//! Lyapunov rate of the Nesterov flow: numeric maximum against the closed form.
use tm_ode::rates::{maximize_rate, p_nag, p_star_nag};

fn main() -> tm_ode::Result<()> {
    for m in [1.0, 0.1, 0.038, 1e-3] {
        let (phi, p) = maximize_rate(|phi| p_nag(phi, m).unwrap_or(f64::NEG_INFINITY));
        let cert = p_star_nag(m)?;
        println!("M = {m:<6} phi* = {phi:.8}  p* = {p:.10}  closed form = {:.10}", cert.rate);
    }
    Ok(())
}
