//! Lyapunov-based rate certificates.
//!
//! The rate of the high-resolution triple momentum flow is
//!
//! ```text
//! p(φ) = min{ √μ/2,  3L/(4κ(1+φ)√μ),  1/(γ√α(1+1/φ)),  4√μ/(3+2/φ) }
//! ```
//!
//! and the certified rate is `p* = max_φ p(φ)`. For Nesterov's flow the
//! same construction gives `min{1/2, 3/(4(1+φ)), 1/(1+1/φ), 4/(3+2/φ)}·√M`,
//! maximised at `φ = 3/4` with value `3√M/7`.

use std::fmt::Write as _;

use crate::cost::CostFunction;
use crate::error::{invalid, Error, Result};
use crate::iqc::IqcWitness;
use crate::linalg;
use crate::params::{log_grid, tm_parameters, TMParameters};
use crate::trajectory::Trajectory;
use crate::Real;

/// Search interval for `φ`.
pub const PHI_RANGE: (f64, f64) = (1e-6, 1e6);

/// Relative agreement required between the closed-form and numeric maxima.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// Relative disagreement that is reported as an error.
pub const INCONSISTENCY_TOL: f64 = 1e-4;

/// Absolute slack, relative to `V(0)`, of the decay checks.
pub const DECAY_TOL: f64 = 1e-8;

/// Additive slack of the cost bound.
pub const COST_BOUND_SLACK: f64 = 1e-10;

/// `V = K(f(Y) − f⋆) + ¼‖Ẏ‖² + ¼‖Ẏ + a(Y − x⋆) + b∇f(Y)‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovWeights {
    /// `K`
    pub gain: f64,
    /// `a`
    pub anchor: f64,
    /// `b`
    pub gradient: f64,
}

impl LyapunovWeights {
    /// `K = 1 + √(μα)`, `a = 2√μ`, `b = γK√α`.
    pub fn tm(p: &TMParameters) -> Self {
        let gain = p.gain();
        Self {
            gain,
            anchor: 2.0 * p.mu.sqrt(),
            gradient: p.gamma * gain * p.alpha.sqrt(),
        }
    }

    /// `K = 1 + √(Ms)`, `a = √M`, `b = √s`.
    pub fn nag(m: f64, s: f64) -> Self {
        Self {
            gain: 1.0 + (m * s).sqrt(),
            anchor: m.sqrt(),
            gradient: s.sqrt(),
        }
    }

    pub fn value<R: Real>(&self, f: &CostFunction<R>, y: &[R], y_dot: &[R], xs: &[R]) -> Result<f64> {
        let gap = f
            .error(y)
            .ok_or(Error::MissingCapability("cost without a known minimizer"))?;
        let g = f.gradient(y);
        let mut mixed = R::zero();
        for i in 0..y.len() {
            let w = y_dot[i] + (y[i] - xs[i]).scale(self.anchor) + g[i].scale(self.gradient);
            mixed = mixed + w * w;
        }
        let v = gap.scale(self.gain) + (linalg::dot(y_dot, y_dot) + mixed).scale(0.25);
        Ok(v.to_f64())
    }
}

/// The triple momentum Lyapunov function at output `Y` and velocity `Ẏ`.
pub fn lyapunov_value<R: Real>(
    params: &TMParameters,
    f: &CostFunction<R>,
    y: &[R],
    y_dot: &[R],
) -> Result<f64> {
    f.check_point(y)?;
    f.check_point(y_dot)?;
    let xs = f
        .minimizer()
        .ok_or(Error::MissingCapability("cost without a known minimizer"))?;
    LyapunovWeights::tm(params).value(f, y, y_dot, xs)
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(invalid(format!("φ must be positive, got {phi}")));
    }
    Ok(())
}

/// The four terms of `p(φ)`; the third is `+∞` when `γ = 0`.
pub fn p_tm_terms(phi: f64, p: &TMParameters) -> [f64; 4] {
    let sm = p.mu.sqrt();
    let third = if p.gamma == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (p.gamma * p.alpha.sqrt() * (1.0 + 1.0 / phi))
    };
    [
        0.5 * sm,
        3.0 * p.l / (4.0 * p.kappa * (1.0 + phi) * sm),
        third,
        4.0 * sm / (3.0 + 2.0 / phi),
    ]
}

pub fn p_tm(phi: f64, params: &TMParameters) -> Result<f64> {
    check_phi(phi)?;
    Ok(p_tm_terms(phi, params).into_iter().fold(f64::INFINITY, f64::min))
}

pub fn p_nag(phi: f64, m: f64) -> Result<f64> {
    check_phi(phi)?;
    if !(m > 0.0) {
        return Err(invalid("M must be positive"));
    }
    let v = [
        0.5,
        3.0 / (4.0 * (1.0 + phi)),
        1.0 / (1.0 + 1.0 / phi),
        4.0 / (3.0 + 2.0 / phi),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Ok(v * m.sqrt())
}

/// Maximises a quasi-concave `p` over `φ ∈ [1e-6, 1e6]` by a log grid
/// followed by golden-section search on `ln φ`. Returns `(φ, p(φ))`.
pub fn maximize_rate(p: impl Fn(f64) -> f64) -> (f64, f64) {
    const GRID: usize = 2001;
    let (lo, hi) = (PHI_RANGE.0.ln(), PHI_RANGE.1.ln());
    let at = |i: usize| lo + (hi - lo) * i as f64 / (GRID - 1) as f64;
    let (mut best, mut best_v) = (0, f64::NEG_INFINITY);
    for i in 0..GRID {
        let v = p(at(i).exp());
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    let mut a = at(best.saturating_sub(1));
    let mut b = at((best + 1).min(GRID - 1));
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (p(c.exp()), p(d.exp()));
    while b - a > 1e-13 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = p(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = p(d.exp());
        }
    }
    let x = 0.5 * (a + b);
    let v = p(x.exp());
    if v >= best_v {
        (x.exp(), v)
    } else {
        (at(best).exp(), best_v)
    }
}

/// `φ* = (9L − 16μκ + √(256(μκ)² + 96μκL + 81L²)) / (32μκ)`, where the
/// second and fourth terms of `p(φ)` cross.
pub fn phi_star_closed_form(params: &TMParameters) -> f64 {
    let (l, mk) = (params.l, params.mu * params.kappa);
    (9.0 * l - 16.0 * mk + (256.0 * mk * mk + 96.0 * mk * l + 81.0 * l * l).sqrt()) / (32.0 * mk)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    LyapunovTm,
    LyapunovNag,
    Iqc,
}

impl RateSource {
    pub fn as_str(self) -> &'static str {
        match self {
            RateSource::LyapunovTm => "lyapunov_tm",
            RateSource::LyapunovNag => "lyapunov_nag",
            RateSource::Iqc => "iqc",
        }
    }
}

/// A certified exponential rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCertificate {
    /// Certified rate of the Lyapunov function (or of `ξᵀPξ` for IQC).
    pub rate: f64,
    /// Maximising `φ`; `NaN` for IQC certificates.
    pub phi_star: f64,
    pub source: RateSource,
    pub mu: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub l: f64,
    pub m: f64,
    pub tolerance: f64,
    /// Rate at the closed-form `φ*`, when one exists.
    pub closed_form_rate: Option<f64>,
    /// Numerically maximised rate.
    pub numeric_rate: Option<f64>,
    /// Whether the closed form agreed with the numeric maximum.
    pub closed_form_consistent: bool,
    /// LMI witness for IQC certificates.
    pub witness: Option<IqcWitness>,
}

impl RateCertificate {
    /// Decay rate of `‖Y − x⋆‖` implied by an IQC certificate: half the rate
    /// of the quadratic form.
    pub fn norm_rate(&self) -> f64 {
        0.5 * self.rate
    }

    pub fn with_rate(&self, rate: f64) -> Self {
        Self {
            rate,
            ..self.clone()
        }
    }
}

/// `p*` for the high-resolution triple momentum flow.
///
/// The rate is `p(φ*)` at the closed-form `φ*` when it is within `1e-6`
/// (relative) of the numeric maximum; otherwise the numeric maximum wins and
/// the certificate is flagged. A gap above `1e-4` is an error.
pub fn p_star_tm(params: &TMParameters) -> Result<RateCertificate> {
    let phi_cf = phi_star_closed_form(params);
    let closed = if phi_cf > 0.0 && phi_cf.is_finite() {
        Some(p_tm(phi_cf, params)?)
    } else {
        None
    };
    let (phi_num, numeric) = maximize_rate(|phi| p_tm(phi, params).unwrap_or(f64::NEG_INFINITY));
    let (rate, phi, consistent) = match closed {
        Some(c) if (numeric - c).abs() <= CROSS_CHECK_TOL * numeric => (c, phi_cf, true),
        Some(c) if (numeric - c).abs() > INCONSISTENCY_TOL * numeric => {
            return Err(Error::CertificateInconsistency {
                closed_form: c,
                numeric,
            })
        }
        _ => (numeric, phi_num, false),
    };
    Ok(RateCertificate {
        rate,
        phi_star: phi,
        source: RateSource::LyapunovTm,
        mu: params.mu,
        alpha: params.alpha,
        gamma: params.gamma,
        kappa: params.kappa,
        l: params.l,
        m: params.m,
        tolerance: CROSS_CHECK_TOL,
        closed_form_rate: closed,
        numeric_rate: Some(numeric),
        closed_form_consistent: consistent,
        witness: None,
    })
}

/// Numeric `max_φ p(φ)` for an arbitrary tuple (no closed form assumed).
pub fn p_star_numeric(params: &TMParameters) -> (f64, f64) {
    maximize_rate(|phi| p_tm(phi, params).unwrap_or(f64::NEG_INFINITY))
}

/// `p*_NAG = 3√M/7` at `φ* = 3/4`, confirmed numerically.
pub fn p_star_nag(m: f64) -> Result<RateCertificate> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(invalid("M must be positive"));
    }
    let closed = 3.0 / 7.0 * m.sqrt();
    let (_, numeric) = maximize_rate(|phi| p_nag(phi, m).unwrap_or(f64::NEG_INFINITY));
    if (numeric - closed).abs() > INCONSISTENCY_TOL * closed {
        return Err(Error::CertificateInconsistency {
            closed_form: closed,
            numeric,
        });
    }
    Ok(RateCertificate {
        rate: closed,
        phi_star: 0.75,
        source: RateSource::LyapunovNag,
        mu: m,
        alpha: f64::NAN,
        gamma: f64::NAN,
        kappa: f64::NAN,
        l: f64::NAN,
        m,
        tolerance: CROSS_CHECK_TOL,
        closed_form_rate: Some(closed),
        numeric_rate: Some(numeric),
        closed_form_consistent: (numeric - closed).abs() <= CROSS_CHECK_TOL * closed,
        witness: None,
    })
}

/// Constant `C` in `f(Y(t)) − f⋆ ≤ C ‖Y0 − x⋆‖² e^{−pt}` for the rest
/// initialisation: `L/2 + 2μ/K + γ²KαL²/2` with `K = 1 + √(μα)`.
pub fn cost_bound_prefactor(params: &TMParameters) -> f64 {
    let k = params.gain();
    let (l, g) = (params.l, params.gamma);
    0.5 * l + 2.0 * params.mu / k + 0.5 * g * g * k * params.alpha * l * l
}

/// The same constant for the triple momentum tuple written in `ρ`:
/// `(1.5ρ⁴ + 3ρ³ − 3.5ρ² − 4ρ + 6) / (α(−ρ³ + 3ρ² − 4ρ + 4))`, which tends
/// to `1.5/α` as `ρ → 1`.
pub fn cost_bound_prefactor_rho(rho: f64, alpha: f64) -> f64 {
    let r2 = rho * rho;
    let num = 1.5 * r2 * r2 + 3.0 * r2 * rho - 3.5 * r2 - 4.0 * rho + 6.0;
    let den = -r2 * rho + 3.0 * r2 - 4.0 * rho + 4.0;
    num / (alpha * den)
}

/// Outcome of one check in [`DecayReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Largest violation (positive means violated) over all samples.
    pub worst_margin: f64,
    /// Time of the worst sample.
    pub worst_t: f64,
}

impl CheckOutcome {
    fn new() -> Self {
        Self {
            passed: true,
            worst_margin: f64::NEG_INFINITY,
            worst_t: 0.0,
        }
    }

    fn observe(&mut self, margin: f64, t: f64) {
        if margin > self.worst_margin {
            self.worst_margin = margin;
            self.worst_t = t;
        }
        if margin > 0.0 || margin.is_nan() {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub rate: f64,
    pub v0: f64,
    /// `V(t) ≤ V(0)e^{−pt} + 1e-8·V(0)`.
    pub envelope: CheckOutcome,
    /// Central-difference `V̇ + pV ≤ 0`, up to `1e-8·V(0)` plus the
    /// difference quotient's truncation error.
    pub derivative: CheckOutcome,
    /// `f(Y) − f⋆ ≤ C ‖Y0 − x⋆‖² e^{−pt} + 1e-10` with the exact constant.
    pub cost_bound: Option<CheckOutcome>,
    /// Whether `1.5/α` dominates the exact constant.
    pub limit_constant_dominates: Option<bool>,
    /// `V(t)e^{pt}` nonincreasing up to `1e-8·V(0)`.
    pub monotone: CheckOutcome,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.envelope.passed
            && self.derivative.passed
            && self.monotone.passed
            && self.cost_bound.as_ref().map_or(true, |c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let line = |s: &mut String, name: &str, c: &CheckOutcome| {
            let _ = writeln!(
                s,
                "{name}: {} (worst margin {:.3e} at t = {:.6})",
                if c.passed { "pass" } else { "FAIL" },
                c.worst_margin,
                c.worst_t
            );
        };
        let _ = writeln!(s, "rate: {:.16e}", self.rate);
        let _ = writeln!(s, "V(0): {:.16e}", self.v0);
        line(&mut s, "envelope", &self.envelope);
        line(&mut s, "derivative", &self.derivative);
        if let Some(c) = &self.cost_bound {
            line(&mut s, "cost_bound", c);
        }
        if let Some(b) = self.limit_constant_dominates {
            let _ = writeln!(s, "limit_constant_dominates: {b}");
        }
        line(&mut s, "monotone", &self.monotone);
        let _ = writeln!(s, "overall: {}", if self.passed() { "pass" } else { "FAIL" });
        s
    }
}

/// Checks a trajectory carrying Lyapunov samples against `certificate.rate`.
///
/// `cost_bound` supplies the constant `C` and `‖Y0 − x⋆‖²` for the cost
/// check when the run started from rest.
pub fn verify_decay(
    trajectory: &Trajectory,
    certificate: &RateCertificate,
    cost_bound: Option<(f64, f64)>,
) -> Result<DecayReport> {
    let samples = &trajectory.samples;
    let vs: Vec<f64> = samples
        .iter()
        .map(|s| s.lyapunov.ok_or(Error::MissingCapability("trajectory without Lyapunov samples")))
        .collect::<Result<_>>()?;
    if vs.is_empty() {
        return Err(invalid("empty trajectory"));
    }
    let r = certificate.rate;
    let v0 = vs[0];
    let t0 = samples[0].t;
    let tol = DECAY_TOL * v0;

    let mut envelope = CheckOutcome::new();
    let mut monotone = CheckOutcome::new();
    for (i, s) in samples.iter().enumerate() {
        let dt = s.t - t0;
        envelope.observe(vs[i] - v0 * (-r * dt).exp() - tol, s.t);
        if i > 0 {
            let prev = vs[i - 1] * (r * (samples[i - 1].t - t0)).exp();
            let cur = vs[i] * (r * dt).exp();
            monotone.observe(cur - prev - tol, s.t);
        }
    }

    let mut derivative = CheckOutcome::new();
    for i in 2..samples.len().saturating_sub(2) {
        let h = 0.5 * (samples[i + 1].t - samples[i - 1].t);
        let vdot = (vs[i + 1] - vs[i - 1]) / (2.0 * h);
        let third = (vs[i + 2] - 2.0 * vs[i + 1] + 2.0 * vs[i - 1] - vs[i - 2]) / (2.0 * h * h * h);
        let trunc = 2.0 * h * h / 6.0 * third.abs();
        derivative.observe(vdot + r * vs[i] - tol - trunc, samples[i].t);
    }
    if samples.len() < 5 {
        derivative.worst_margin = 0.0;
    }

    let cost = cost_bound.map(|(c, dist2)| {
        let mut out = CheckOutcome::new();
        for s in samples {
            let bound = c * dist2 * (-r * (s.t - t0)).exp() + COST_BOUND_SLACK;
            out.observe(s.f_error - bound, s.t);
        }
        out
    });
    let limit = cost_bound.and(
        (certificate.alpha.is_finite() && certificate.alpha > 0.0)
            .then(|| cost_bound.unwrap().0 <= 1.5 / certificate.alpha * (1.0 + 1e-12)),
    );

    Ok(DecayReport {
        rate: r,
        v0,
        envelope,
        derivative,
        cost_bound: cost,
        limit_constant_dominates: limit,
        monotone,
    })
}

/// One row of [`rate_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub kappa: f64,
    pub p_tm_over_sqrt_l: f64,
    pub p_nag_over_sqrt_l: f64,
    pub phi_star_tm: f64,
}

/// `p*_TM/√L` and `p*_NAG/√L` along a grid of condition numbers.
pub fn rate_sweep(kappa_grid: &[f64], l: f64) -> Result<Vec<RateRow>> {
    if kappa_grid.is_empty() {
        return Err(invalid("empty condition-number grid"));
    }
    let sl = l.sqrt();
    kappa_grid
        .iter()
        .map(|&kappa| {
            if !(kappa >= 1.0) {
                return Err(invalid(format!("condition number below 1: {kappa}")));
            }
            let m = l / kappa;
            let tm = p_star_tm(&tm_parameters(m, l)?)?;
            let nag = p_star_nag(m)?;
            Ok(RateRow {
                kappa,
                p_tm_over_sqrt_l: tm.rate / sl,
                p_nag_over_sqrt_l: nag.rate / sl,
                phi_star_tm: tm.phi_star,
            })
        })
        .collect()
}

pub fn rate_sweep_csv(rows: &[RateRow]) -> String {
    let mut s = String::from("kappa,p_tm_over_sqrtL,p_nag_over_sqrtL,phi_star_tm\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            r.kappa, r.p_tm_over_sqrt_l, r.p_nag_over_sqrt_l, r.phi_star_tm
        );
    }
    s
}

/// One row of [`alpha_robustness_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRow {
    pub kappa: f64,
    pub alpha_scale: f64,
    pub p_star_over_sqrt_l: f64,
    pub phi_star: f64,
}

/// `max_φ p(φ)/√L` with `α` replaced by `factor·α_TM` and the triple
/// momentum `β, γ` kept, for each factor and each grid point.
pub fn alpha_robustness_sweep(kappa_grid: &[f64], l: f64, factors: &[f64]) -> Result<Vec<AlphaRow>> {
    if kappa_grid.is_empty() || factors.is_empty() {
        return Err(invalid("empty sweep"));
    }
    let sl = l.sqrt();
    let mut rows = Vec::with_capacity(kappa_grid.len() * factors.len());
    for &kappa in kappa_grid {
        let base = tm_parameters(l / kappa, l)?;
        for &factor in factors {
            let (phi, v) = p_star_numeric(&base.with_alpha_scaled(factor)?);
            rows.push(AlphaRow {
                kappa,
                alpha_scale: factor,
                p_star_over_sqrt_l: v / sl,
                phi_star: phi,
            });
        }
    }
    Ok(rows)
}

pub fn alpha_robustness_csv(rows: &[AlphaRow]) -> String {
    let mut s = String::from("kappa,alpha_scale,p_star_over_sqrtL,phi_star\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            r.kappa, r.alpha_scale, r.p_star_over_sqrt_l, r.phi_star
        );
    }
    s
}

/// Default grid used by the rate sweeps.
pub fn default_kappa_grid() -> Vec<f64> {
    log_grid(1.0, 1e4, 100).expect("valid grid")
}
