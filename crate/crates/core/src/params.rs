//! Closed-form parameter algebra for the triple momentum method.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

/// Relative tolerance of the `κ = L/M` consistency check.
const KAPPA_CONSISTENCY: f64 = 1e-12;

/// The tuple `(α, β, γ, δ)` of the generic three-momentum iteration together
/// with the problem constants it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TMParameters {
    /// Stepsize.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Condition number `L/M`.
    pub kappa: f64,
    /// `1 − 1/√κ`.
    pub rho: f64,
    /// Damping parameter `((1−β)/(√α(1+β)))²`.
    pub mu: f64,
    /// Strong convexity constant.
    pub m: f64,
    /// Lipschitz constant of the gradient.
    pub l: f64,
}

fn check_constants(m: f64, l: f64) -> Result<()> {
    if !(m > 0.0 && l > 0.0 && m.is_finite() && l.is_finite()) {
        return Err(invalid(format!("M and L must be positive, got M={m}, L={l}")));
    }
    if m > l {
        return Err(invalid(format!("M={m} exceeds L={l}")));
    }
    Ok(())
}

/// The triple momentum tuple for `f` with constants `(M, L)`.
pub fn tm_parameters(m: f64, l: f64) -> Result<TMParameters> {
    check_constants(m, l)?;
    let kappa = l / m;
    let rho = 1.0 - 1.0 / kappa.sqrt();
    let alpha = (1.0 + rho) / l;
    let beta = rho * rho / (2.0 - rho);
    let gamma = rho * rho / ((1.0 + rho) * (2.0 - rho));
    let delta = rho * rho / (1.0 - rho * rho);
    TMParameters::custom(alpha, beta, gamma, delta, m, l)
}

/// `μ(α, β) = ((1−β) / (√α (1+β)))²`.
pub fn mu_from_alpha_beta(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("stepsize must be positive, got {alpha}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("momentum must be nonnegative, got {beta}")));
    }
    if beta == 1.0 {
        return Err(Error::SingularParameter("μ is undefined for β = 1".into()));
    }
    let r = (1.0 - beta) / (alpha.sqrt() * (1.0 + beta));
    Ok(r * r)
}

/// μ of the triple momentum tuple as a rational function of `√κ`, times `L`.
pub fn mu_from_kappa(kappa: f64, l: f64) -> Result<f64> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(invalid(format!("condition number must be at least 1, got {kappa}")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(invalid(format!("L must be positive, got {l}")));
    }
    let s = kappa.sqrt();
    let k2 = kappa * kappa;
    let k3 = k2 * kappa;
    let num = 9.0 * k2 * s - 6.0 * k2 + kappa * s;
    let den = 8.0 * k3 * s - 12.0 * k3 + 14.0 * k2 * s - 9.0 * k2 + 4.0 * kappa * s - kappa;
    Ok(num * l / den)
}

impl TMParameters {
    /// An arbitrary tuple; `μ` is computed from `(α, β)`.
    pub fn custom(alpha: f64, beta: f64, gamma: f64, delta: f64, m: f64, l: f64) -> Result<Self> {
        check_constants(m, l)?;
        for (name, v) in [("gamma", gamma), ("delta", delta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        let mu = mu_from_alpha_beta(alpha, beta)?;
        let kappa = l / m;
        let p = Self {
            alpha,
            beta,
            gamma,
            delta,
            kappa,
            rho: 1.0 - 1.0 / kappa.sqrt(),
            mu,
            m,
            l,
        };
        debug_assert!((p.kappa * p.m / p.l - 1.0).abs() <= KAPPA_CONSISTENCY);
        Ok(p)
    }

    /// The same `β, γ, δ` with the stepsize multiplied by `factor`.
    pub fn with_alpha_scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid(format!("scale factor must be positive, got {factor}")));
        }
        Self::custom(
            self.alpha * factor,
            self.beta,
            self.gamma,
            self.delta,
            self.m,
            self.l,
        )
    }

    /// `√(μα)`.
    pub fn sqrt_mu_alpha(&self) -> f64 {
        (self.mu * self.alpha).sqrt()
    }

    /// The gradient gain `1 + √(μα)` of the high-resolution model.
    pub fn gain(&self) -> f64 {
        1.0 + self.sqrt_mu_alpha()
    }

    /// Nesterov parameters `(s, β, β, 0)` with `s = 1/L` and the
    /// constant momentum `(1 − √(M/L)) / (1 + √(M/L))`.
    pub fn nesterov(m: f64, l: f64) -> Result<Self> {
        check_constants(m, l)?;
        let q = (m / l).sqrt();
        let beta = (1.0 - q) / (1.0 + q);
        Self::custom(1.0 / l, beta, beta, 0.0, m, l)
    }

    /// Gradient descent `(1/L, 0, 0, 0)`.
    pub fn gradient_descent(m: f64, l: f64) -> Result<Self> {
        Self::custom(1.0 / l, 0.0, 0.0, 0.0, m, l)
    }
}

/// `points` values spaced evenly in `log10` between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(invalid(format!("bad log grid bounds [{lo}, {hi}]")));
    }
    match points {
        0 => Err(invalid("grid needs at least one point")),
        1 => Ok(vec![lo]),
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let mut g: Vec<f64> = (0..points)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
                .collect();
            g[0] = lo;
            g[points - 1] = hi;
            Ok(g)
        }
    }
}

/// One row of [`mu_bounds_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRow {
    pub kappa: f64,
    pub mu_over_l: f64,
    pub mu_over_m: f64,
}

/// `μ/L` and `μ/M` along a grid of condition numbers.
pub fn mu_bounds_sweep(kappa_grid: &[f64], l: f64) -> Result<Vec<MuRow>> {
    if kappa_grid.is_empty() {
        return Err(invalid("empty condition-number grid"));
    }
    if kappa_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("condition-number grid must be ascending"));
    }
    kappa_grid
        .iter()
        .map(|&kappa| {
            let mu_over_l = mu_from_kappa(kappa, l)? / l;
            Ok(MuRow {
                kappa,
                mu_over_l,
                mu_over_m: mu_over_l * kappa,
            })
        })
        .collect()
}

pub fn mu_bounds_csv(rows: &[MuRow]) -> String {
    let mut s = String::from("kappa,mu_over_L,mu_over_M\n");
    for r in rows {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", r.kappa, r.mu_over_l, r.mu_over_m);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn kappa_one_collapses_to_gradient_step() {
        let p = tm_parameters(2.0, 2.0).unwrap();
        assert_eq!(p.rho, 0.0);
        assert_eq!(p.alpha, 0.5);
        assert_eq!((p.beta, p.gamma, p.delta), (0.0, 0.0, 0.0));
        assert!(close(p.mu, 2.0, 1e-15));
        assert!(close(mu_from_kappa(1.0, 2.0).unwrap(), 2.0, 1e-15));
    }

    #[test]
    fn example_constants() {
        let p = tm_parameters(0.038, 1.443).unwrap();
        assert!((p.kappa - 37.973_684_210_526_315).abs() < 1e-12);
        // high-precision reference values
        assert!(close(p.rho, 0.837_722_378_825_586_9, 1e-14));
        assert!(close(p.alpha, 1.273_542_882_069_013_8, 1e-14));
        assert!(close(p.beta, 0.603_796_176_748_283_2, 1e-14));
        assert!(close(p.gamma, 0.328_556_796_012_978_1, 1e-14));
        assert!(close(p.delta, 2.353_215_486_688_823_4, 1e-13));
        assert!(close(p.mu, 0.047_920_948_285_613_57, 1e-13));
        assert!(close(p.mu, mu_from_kappa(p.kappa, 1.443).unwrap(), 1e-10));
    }

    #[test]
    fn beta_mu_identities() {
        for &kappa in &[1.0, 1.5, 10.0, 37.713, 1e3, 1e6] {
            let p = tm_parameters(1.0, kappa).unwrap();
            let r = p.sqrt_mu_alpha();
            assert!((2.0 / (1.0 + p.beta) - (1.0 + r)).abs() < 1e-12);
            assert!((p.beta - (1.0 - r) / (1.0 + r)).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_limits() {
        assert_eq!(mu_from_alpha_beta(0.25, 0.0).unwrap(), 4.0);
        assert!(matches!(
            mu_from_alpha_beta(1.0, 1.0),
            Err(Error::SingularParameter(_))
        ));
        assert!(mu_from_kappa(0.5, 1.0).is_err());
        let a = mu_from_kappa(1e8, 1.0).unwrap();
        let b = mu_from_kappa(2e8, 1.0).unwrap();
        assert!(a <= 1e-3 && b < a);
    }

    #[test]
    fn nesterov_damping_is_m() {
        // μ(s, β_NAG) with s = 1/L equals M exactly
        for &(m, l) in &[(1.0, 1.0), (0.038, 1.443), (1e-3, 10.0)] {
            let p = TMParameters::nesterov(m, l).unwrap();
            assert!(close(p.mu, m, 1e-12), "{} vs {m}", p.mu);
        }
    }

    #[test]
    fn sweep_shape() {
        let rows = mu_bounds_sweep(&[1.0], 3.0).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(close(rows[0].mu_over_l, 1.0, 1e-15));
        assert!(close(rows[0].mu_over_m, 1.0, 1e-15));
        assert!(mu_bounds_sweep(&[], 1.0).is_err());
        assert!(mu_bounds_sweep(&[2.0, 1.0], 1.0).is_err());
        let csv = mu_bounds_csv(&rows);
        assert!(csv.starts_with("kappa,mu_over_L,mu_over_M\n"));
    }

    #[test]
    fn mu_over_m_peak() {
        let grid = log_grid(1.0, 1e6, 20_000).unwrap();
        let rows = mu_bounds_sweep(&grid, 1.0).unwrap();
        let peak = rows.iter().map(|r| r.mu_over_m).fold(0.0, f64::max);
        assert!((peak - 1.3661).abs() < 1e-3, "peak {peak}");
        assert!(rows.windows(2).all(|w| w[1].mu_over_l < w[0].mu_over_l));
    }

    #[test]
    fn invalid_constants() {
        assert!(tm_parameters(2.0, 1.0).is_err());
        assert!(tm_parameters(0.0, 1.0).is_err());
        assert!(tm_parameters(-1.0, 1.0).is_err());
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }
}
