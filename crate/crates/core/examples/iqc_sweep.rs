//! IQC rate bounds for the triple momentum flow on a small grid.
use tm_ode::iqc::{iqc_sweep, IqcOptions};

fn main() -> tm_ode::Result<()> {
    let rows = iqc_sweep(&[1.0], &[2.0, 5.0, 10.0, 50.0], IqcOptions::default())?;
    for r in rows {
        match r.outcome.certificate() {
            Some(c) => {
                let w = c.witness.as_ref().expect("IQC certificates carry a witness");
                println!(
                    "kappa {:>5}: p/sqrtL = {:.4}  sigma = {:.4e}  max eig = {:.2e}",
                    r.kappa,
                    c.rate / c.l.sqrt(),
                    w.sigma,
                    w.lmi_max_eigenvalue
                );
            }
            None => println!("kappa {:>5}: no certificate found", r.kappa),
        }
    }
    Ok(())
}
