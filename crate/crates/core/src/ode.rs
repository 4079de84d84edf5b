//! Continuous-time models and a fixed-step RK4 integrator.
//!
//! Every second-order model here has the form
//!
//! ```text
//! ε̈ = −d ε̇ − K ∇f(Y),    Y = ε + c ε̇,    X = ε + c_x ε̇
//! ```
//!
//! which is equivalent to the output equation
//! `Ÿ + d Ẏ + cK ∇²f(Y) Ẏ + K ∇f(Y) = 0`. The integrator works in `(ε, ε̇)`
//! so no Hessian is needed; the output form is only used as a residual check.

use crate::cost::CostFunction;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::params::TMParameters;
use crate::rates::LyapunovWeights;
use crate::trajectory::{Algorithm, Mode, Sample, Trajectory};
use crate::Real;

/// Largest admissible `dt·√L`.
pub const MAX_DT_SQRT_L: f64 = 0.1;

/// Default `dt·√L`.
pub const DEFAULT_DT_SQRT_L: f64 = 0.01;

/// Threshold on `|1 − c d|` below which the rest initialisation is singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeState<R: Real = f64> {
    pub eps: Vec<R>,
    pub eps_dot: Vec<R>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeKind {
    TmHighRes,
    NagHighRes,
    LowRes,
    GradientFlow,
}

impl OdeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OdeKind::TmHighRes => "tm_high_res",
            OdeKind::NagHighRes => "nag_high_res",
            OdeKind::LowRes => "low_res",
            OdeKind::GradientFlow => "gradient_flow",
        }
    }
}

/// Coefficients `(d, K, c, c_x)` of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeModel {
    pub kind: OdeKind,
    /// Damping `d`.
    pub damping: f64,
    /// Gradient gain `K`.
    pub gain: f64,
    /// Offset `c` of the output `Y = ε + c ε̇`.
    pub y_offset: f64,
    /// Offset `c_x` of the output `X = ε + c_x ε̇`.
    pub x_offset: f64,
    /// Weights of the model's Lyapunov function, if it has one.
    pub lyapunov: Option<LyapunovWeights>,
}

impl OdeModel {
    /// High-resolution triple momentum model: `d = 2√μ`, `K = 1 + √(μα)`,
    /// `c = √α γ`, `c_x = √α δ`.
    pub fn tm_high_res(p: &TMParameters) -> Self {
        let sa = p.alpha.sqrt();
        let gain = p.gain();
        Self {
            kind: OdeKind::TmHighRes,
            damping: 2.0 * p.mu.sqrt(),
            gain,
            y_offset: sa * p.gamma,
            x_offset: sa * p.delta,
            lyapunov: Some(LyapunovWeights::tm(p)),
        }
    }

    /// High-resolution Nesterov model `Ÿ + 2√M Ẏ + √s ∇²f Ẏ + (1+√(Ms)) ∇f = 0`.
    pub fn nag_high_res(m: f64, s: f64) -> Result<Self> {
        if !(m > 0.0 && s > 0.0) {
            return Err(invalid("M and s must be positive"));
        }
        let gain = 1.0 + (m * s).sqrt();
        let c = s.sqrt() / gain;
        Ok(Self {
            kind: OdeKind::NagHighRes,
            damping: 2.0 * m.sqrt(),
            gain,
            y_offset: c,
            x_offset: c,
            lyapunov: Some(LyapunovWeights::nag(m, s)),
        })
    }

    /// Low-resolution model `ε̈ + 2√μ ε̇ + ∇f(ε) = 0`.
    pub fn low_res(mu: f64) -> Self {
        Self {
            kind: OdeKind::LowRes,
            damping: 2.0 * mu.sqrt(),
            gain: 1.0,
            y_offset: 0.0,
            x_offset: 0.0,
            lyapunov: None,
        }
    }

    /// Gradient flow `ẋ = −∇f(x)`.
    pub fn gradient_flow() -> Self {
        Self {
            kind: OdeKind::GradientFlow,
            damping: 0.0,
            gain: 1.0,
            y_offset: 0.0,
            x_offset: 0.0,
            lyapunov: None,
        }
    }

    /// The model with its `O(√α)` terms dropped: `K → 1` and `c, c_x → 0`.
    pub fn leading_order(&self) -> Self {
        if self.is_first_order() {
            return *self;
        }
        Self {
            kind: OdeKind::LowRes,
            gain: 1.0,
            y_offset: 0.0,
            x_offset: 0.0,
            lyapunov: None,
            ..*self
        }
    }

    pub fn is_first_order(&self) -> bool {
        self.kind == OdeKind::GradientFlow
    }

    pub fn algorithm(&self) -> Algorithm {
        match self.kind {
            OdeKind::TmHighRes | OdeKind::LowRes => Algorithm::Tm,
            OdeKind::NagHighRes => Algorithm::Nag,
            OdeKind::GradientFlow => Algorithm::Gd,
        }
    }

    pub fn output_y<R: Real>(&self, eps: &[R], eps_dot: &[R]) -> Vec<R> {
        if self.is_first_order() {
            return eps.to_vec();
        }
        linalg::axpy(eps, R::from_f64(self.y_offset), eps_dot)
    }

    pub fn output_x<R: Real>(&self, eps: &[R], eps_dot: &[R]) -> Vec<R> {
        if self.is_first_order() {
            return eps.to_vec();
        }
        linalg::axpy(eps, R::from_f64(self.x_offset), eps_dot)
    }

    /// `ε̈` (or `ẋ` for gradient flow) at the given state.
    pub fn acceleration<R: Real>(&self, f: &CostFunction<R>, eps: &[R], eps_dot: &[R]) -> Vec<R> {
        let g = f.gradient(&self.output_y(eps, eps_dot));
        if self.is_first_order() {
            return g.into_iter().map(|v| -v).collect();
        }
        eps_dot
            .iter()
            .zip(&g)
            .map(|(&v, &gi)| -(v.scale(self.damping) + gi.scale(self.gain)))
            .collect()
    }

    /// `Ẏ = ε̇ + c ε̈`.
    pub fn output_velocity<R: Real>(&self, f: &CostFunction<R>, eps: &[R], eps_dot: &[R]) -> Vec<R> {
        if self.is_first_order() {
            return self.acceleration(f, eps, eps_dot);
        }
        let acc = self.acceleration(f, eps, eps_dot);
        linalg::axpy(eps_dot, R::from_f64(self.y_offset), &acc)
    }

    /// State with `Y(0) = y0` and `Ẏ(0) = 0`:
    /// `ε̇(0) = cK∇f(y0) / (1 − cd)`, `ε(0) = y0 − c ε̇(0)`.
    pub fn rest_initial_state<R: Real>(&self, f: &CostFunction<R>, y0: &[R]) -> Result<OdeState<R>> {
        f.check_point(y0)?;
        let n = y0.len();
        if self.is_first_order() {
            return Ok(OdeState {
                eps: y0.to_vec(),
                eps_dot: vec![R::zero(); n],
                t: 0.0,
            });
        }
        let c = self.y_offset;
        let denom = 1.0 - c * self.damping;
        if denom.abs() <= SINGULAR_TOL {
            return Err(Error::SingularParameter(format!(
                "1 − c·d = {denom:e} in the rest initialisation"
            )));
        }
        let w = R::from_f64(c * self.gain / denom);
        let eps_dot: Vec<R> = f.gradient(y0).into_iter().map(|g| g * w).collect();
        let eps = linalg::axpy(y0, R::from_f64(-c), &eps_dot);
        Ok(OdeState {
            eps,
            eps_dot,
            t: 0.0,
        })
    }

    fn derivative<R: Real>(&self, f: &CostFunction<R>, eps: &[R], eps_dot: &[R]) -> (Vec<R>, Vec<R>) {
        if self.is_first_order() {
            let v = self.acceleration(f, eps, eps_dot);
            let n = v.len();
            return (v, vec![R::zero(); n]);
        }
        (eps_dot.to_vec(), self.acceleration(f, eps, eps_dot))
    }
}

/// Initial state of the triple momentum flow with `Y(0) = y0`, `Ẏ(0) = 0`:
/// `ε(0) = y0 − αγ²(1+√(μα))∇f(y0) / (1 − 2γ√(μα))`.
pub fn tm_initial_state<R: Real>(
    y0: &[R],
    params: &TMParameters,
    f: &CostFunction<R>,
) -> Result<OdeState<R>> {
    OdeModel::tm_high_res(params).rest_initial_state(f, y0)
}

/// Initial state of the Nesterov flow with `Y(0) = y0`, `Ẏ(0) = 0`.
pub fn nag_initial_state<R: Real>(
    y0: &[R],
    m: f64,
    s: f64,
    f: &CostFunction<R>,
) -> Result<OdeState<R>> {
    OdeModel::nag_high_res(m, s)?.rest_initial_state(f, y0)
}

/// Options of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Record every this many steps; the final state is always recorded.
    pub sample_every: usize,
    /// Evaluate the model's Lyapunov function at each sample.
    pub lyapunov: bool,
}

impl IntegrateOptions {
    /// `dt = 0.01/√L`, every step sampled.
    pub fn new(l: f64, t_end: f64) -> Self {
        Self {
            dt: DEFAULT_DT_SQRT_L / l.sqrt(),
            t_end,
            sample_every: 1,
            lyapunov: false,
        }
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn sample_every(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }

    pub fn lyapunov(mut self, on: bool) -> Self {
        self.lyapunov = on;
        self
    }
}

/// Classical fixed-step RK4 from `initial` to `t_end`.
///
/// The last step is shortened when `t_end` is not a multiple of `dt`.
pub fn integrate<R: Real>(
    model: &OdeModel,
    f: &CostFunction<R>,
    initial: &OdeState<R>,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    let IntegrateOptions {
        dt,
        t_end,
        sample_every,
        lyapunov,
    } = opts;
    let dt_max = MAX_DT_SQRT_L / f.l().sqrt();
    if !(dt > 0.0 && dt <= dt_max * (1.0 + 1e-12)) {
        return Err(invalid(format!("dt = {dt} outside (0, {dt_max}] = (0, 0.1/√L]")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid(format!("t_end must be nonnegative, got {t_end}")));
    }
    if sample_every == 0 {
        return Err(invalid("sample_every must be positive"));
    }
    f.check_point(&initial.eps)?;
    f.check_point(&initial.eps_dot)?;
    if lyapunov && model.lyapunov.is_none() {
        return Err(Error::MissingCapability("Lyapunov function for this model"));
    }
    let minimizer = f
        .minimizer()
        .ok_or(Error::MissingCapability("cost without a known minimizer"))?
        .to_vec();

    let mut traj = Trajectory::new(model.algorithm(), Mode::Ode, model.kind.as_str(), dt);
    let t0 = initial.t;
    let steps = ((t_end - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut eps = initial.eps.clone();
    let mut eps_dot = initial.eps_dot.clone();
    let rec = |i: usize, t: f64, eps: &[R], eps_dot: &[R]| -> Result<Sample> {
        record(model, f, &minimizer, i, t, eps, eps_dot, lyapunov)
    };
    traj.samples.push(rec(0, t0, &eps, &eps_dot)?);
    let mut t_prev = t0;
    for i in 1..=steps {
        let t = if i == steps { t_end } else { t0 + i as f64 * dt };
        let h = t - t_prev;
        rk4_step(model, f, &mut eps, &mut eps_dot, h);
        if !(linalg::all_finite(&eps) && linalg::all_finite(&eps_dot)) {
            return Err(Error::NumericalFailure {
                location: format!("t = {t_prev}"),
                message: "nonfinite state after RK4 step (last good time shown)".into(),
            });
        }
        t_prev = t;
        if i % sample_every == 0 || i == steps {
            traj.samples.push(rec(i, t, &eps, &eps_dot)?);
        }
    }
    Ok(traj)
}

fn rk4_step<R: Real>(model: &OdeModel, f: &CostFunction<R>, eps: &mut Vec<R>, eps_dot: &mut Vec<R>, h: f64) {
    let half = R::from_f64(0.5 * h);
    let full = R::from_f64(h);
    let (k1e, k1v) = model.derivative(f, eps, eps_dot);
    let (k2e, k2v) = model.derivative(
        f,
        &linalg::axpy(eps, half, &k1e),
        &linalg::axpy(eps_dot, half, &k1v),
    );
    let (k3e, k3v) = model.derivative(
        f,
        &linalg::axpy(eps, half, &k2e),
        &linalg::axpy(eps_dot, half, &k2v),
    );
    let (k4e, k4v) = model.derivative(
        f,
        &linalg::axpy(eps, full, &k3e),
        &linalg::axpy(eps_dot, full, &k3v),
    );
    let w = R::from_f64(h / 6.0);
    let two = R::from_f64(2.0);
    for i in 0..eps.len() {
        eps[i] = eps[i] + w * (k1e[i] + two * (k2e[i] + k3e[i]) + k4e[i]);
        eps_dot[i] = eps_dot[i] + w * (k1v[i] + two * (k2v[i] + k3v[i]) + k4v[i]);
    }
}

#[allow(clippy::too_many_arguments)]
fn record<R: Real>(
    model: &OdeModel,
    f: &CostFunction<R>,
    minimizer: &[R],
    k: usize,
    t: f64,
    eps: &[R],
    eps_dot: &[R],
    lyapunov: bool,
) -> Result<Sample> {
    let y = model.output_y(eps, eps_dot);
    let x = model.output_x(eps, eps_dot);
    let y_dot = model.output_velocity(f, eps, eps_dot);
    let f_error = f.error(&y).expect("minimizer checked").to_f64();
    let g = f.gradient(&y);
    let v = match (lyapunov, &model.lyapunov) {
        (true, Some(w)) => Some(w.value(f, &y, &y_dot, minimizer)?),
        _ => None,
    };
    Ok(Sample {
        k,
        t,
        eps: linalg::to_f64_vec(eps),
        velocity: linalg::to_f64_vec(eps_dot),
        y: linalg::to_f64_vec(&y),
        x: linalg::to_f64_vec(&x),
        y_dot: Some(linalg::to_f64_vec(&y_dot)),
        f_error,
        grad_norm: linalg::norm_f64(&g),
        lyapunov: v,
    })
}

/// Norm of `Ÿ + d Ẏ + cK ∇²f(Y) Ẏ + K ∇f(Y)` at `(ε, ε̇)`, with `Ÿ` obtained
/// by differentiating `Y = ε + c ε̇` twice through the first-order system.
///
/// Needs an analytic Hessian-vector product.
pub fn y_form_residual(model: &OdeModel, f: &CostFunction, eps: &[f64], eps_dot: &[f64]) -> Result<f64> {
    if model.is_first_order() {
        return Err(invalid("the output form applies to second-order models only"));
    }
    f.check_point(eps)?;
    f.check_point(eps_dot)?;
    let y = model.output_y(eps, eps_dot);
    let acc = model.acceleration(f, eps, eps_dot);
    let y_dot = linalg::axpy(eps_dot, model.y_offset, &acc);
    let hv = f
        .hessian_vector(&y, &y_dot)
        .ok_or(Error::MissingCapability("analytic Hessian-vector product"))?;
    let g = f.gradient(&y);
    let (d, k, c) = (model.damping, model.gain, model.y_offset);
    // d³ε/dt³ = −d ε̈ − K ∇²f(Y) Ẏ
    let jerk: Vec<f64> = acc.iter().zip(&hv).map(|(&a, &h)| -d * a - k * h).collect();
    let y_ddot = linalg::axpy(&acc, c, &jerk);
    let r: Vec<f64> = (0..eps.len())
        .map(|i| y_ddot[i] + d * y_dot[i] + c * k * hv[i] + k * g[i])
        .collect();
    Ok(linalg::norm(&r))
}
