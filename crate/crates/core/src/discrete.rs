//! Discrete-time iterations.
//!
//! All three methods are instances of one two-step recursion
//!
//! ```text
//! ε_{k+1} = (1+β) ε_k − β ε_{k−1} − α ∇f(y_k)
//! y_k     = (1+γ) ε_k − γ ε_{k−1}
//! x_k     = (1+δ) ε_k − δ ε_{k−1}
//! ```
//!
//! with `(α, β, γ, δ)` the triple momentum tuple, `(s, β, β, 0)` for
//! Nesterov's method and `(s, 0, 0, 0)` for gradient descent. The history is
//! initialised with `ε_{−1} = ε_0 = x0`, so the first step is a plain
//! gradient step.

use crate::cost::CostFunction;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::params::{tm_parameters, TMParameters};
use crate::trajectory::{Algorithm, Mode, Sample, Trajectory};
use crate::Real;

/// Growth factor of `f_error` over its initial value that aborts a run.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState<R: Real = f64> {
    /// `ε_k`
    pub eps_curr: Vec<R>,
    /// `ε_{k−1}`
    pub eps_prev: Vec<R>,
    /// Gradient evaluation point `y_k`.
    pub y: Vec<R>,
    /// Output `x_k`.
    pub x: Vec<R>,
    pub k: usize,
}

fn combine<R: Real>(curr: &[R], prev: &[R], c: f64) -> Vec<R> {
    // (1 + c) curr − c prev = curr + c (curr − prev)
    curr.iter()
        .zip(prev)
        .map(|(&a, &b)| a + (a - b).scale(c))
        .collect()
}

impl<R: Real> DiscreteState<R> {
    /// State with `ε_{−1} = ε_0 = x0`.
    pub fn new(x0: &[R]) -> Self {
        Self {
            eps_curr: x0.to_vec(),
            eps_prev: x0.to_vec(),
            y: x0.to_vec(),
            x: x0.to_vec(),
            k: 0,
        }
    }

    /// State from an explicit history pair, with outputs for `(γ, δ)`.
    pub fn from_history(eps_curr: Vec<R>, eps_prev: Vec<R>, gamma: f64, delta: f64) -> Self {
        let y = combine(&eps_curr, &eps_prev, gamma);
        let x = combine(&eps_curr, &eps_prev, delta);
        Self {
            eps_curr,
            eps_prev,
            y,
            x,
            k: 0,
        }
    }
}

/// One step of the generic recursion with the tuple in `params`.
pub fn tm_step<R: Real>(
    state: &DiscreteState<R>,
    params: &TMParameters,
    f: &CostFunction<R>,
) -> Result<DiscreteState<R>> {
    step(state, params.alpha, params.beta, params.gamma, params.delta, f)
}

/// One Nesterov step with stepsize `s` and constant `momentum`.
pub fn nag_step<R: Real>(
    state: &DiscreteState<R>,
    f: &CostFunction<R>,
    s: f64,
    momentum: f64,
) -> Result<DiscreteState<R>> {
    step(state, s, momentum, momentum, 0.0, f)
}

/// `x_{k+1} = x_k − s ∇f(x_k)`.
pub fn gd_step<R: Real>(
    state: &DiscreteState<R>,
    f: &CostFunction<R>,
    s: f64,
) -> Result<DiscreteState<R>> {
    step(state, s, 0.0, 0.0, 0.0, f)
}

/// Nesterov's constant momentum `(1 − √(M/L)) / (1 + √(M/L))`.
pub fn nag_momentum(m: f64, l: f64) -> f64 {
    let q = (m / l).sqrt();
    (1.0 - q) / (1.0 + q)
}

fn step<R: Real>(
    state: &DiscreteState<R>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    f: &CostFunction<R>,
) -> Result<DiscreteState<R>> {
    f.check_point(&state.eps_curr)?;
    let g = f.gradient(&state.y);
    if !linalg::all_finite(&g) {
        return Err(Error::NumericalFailure {
            location: format!("iteration {}", state.k),
            message: "nonfinite gradient".into(),
        });
    }
    let next: Vec<R> = state
        .eps_curr
        .iter()
        .zip(&state.eps_prev)
        .zip(&g)
        .map(|((&e, &p), &gi)| e + (e - p).scale(beta) - gi.scale(alpha))
        .collect();
    if !linalg::all_finite(&next) {
        return Err(Error::NumericalFailure {
            location: format!("iteration {}", state.k + 1),
            message: "nonfinite iterate".into(),
        });
    }
    let y = combine(&next, &state.eps_curr, gamma);
    let x = combine(&next, &state.eps_curr, delta);
    Ok(DiscreteState {
        eps_prev: state.eps_curr.clone(),
        eps_curr: next,
        y,
        x,
        k: state.k + 1,
    })
}

/// Nominal parameter tuple of `algorithm` for constants `(M, L)`.
pub fn nominal_parameters(algorithm: Algorithm, m: f64, l: f64) -> Result<TMParameters> {
    match algorithm {
        Algorithm::Tm => tm_parameters(m, l),
        Algorithm::Nag => TMParameters::nesterov(m, l),
        Algorithm::Gd => TMParameters::gradient_descent(m, l),
    }
}

/// Iteration-to-time map: `t = k√α` for the momentum methods, whose flows
/// evolve on the `√α` scale, and `t = k α` for gradient descent.
pub fn time_per_iteration(algorithm: Algorithm, stepsize: f64) -> f64 {
    match algorithm {
        Algorithm::Tm | Algorithm::Nag => stepsize.sqrt(),
        Algorithm::Gd => stepsize,
    }
}

/// Runs `iterations` steps of `algorithm` from `x0`.
///
/// `params` holds the nominal tuple (see [`nominal_parameters`]); its
/// stepsize is multiplied by `stepsize_scale` while the momentum coefficients
/// are kept. Aborts with [`Error::Divergence`] once `f_error` exceeds
/// `1e6` times its initial value.
pub fn run_discrete<R: Real>(
    algorithm: Algorithm,
    f: &CostFunction<R>,
    params: &TMParameters,
    x0: &[R],
    iterations: usize,
    stepsize_scale: f64,
) -> Result<Trajectory> {
    if !(stepsize_scale > 0.0 && stepsize_scale <= 1.0) {
        return Err(invalid(format!(
            "stepsize scale must lie in (0, 1], got {stepsize_scale}"
        )));
    }
    f.check_point(x0)?;
    if f.minimizer().is_none() {
        return Err(Error::MissingCapability("cost without a known minimizer"));
    }
    let p = params.with_alpha_scaled(stepsize_scale)?;
    let dt = time_per_iteration(algorithm, p.alpha);
    let mut traj = Trajectory::new(algorithm, Mode::Discrete, algorithm.as_str(), p.alpha);
    let mut state = DiscreteState::new(x0);
    let first = record(f, &state, dt)?;
    let initial = first.f_error;
    traj.samples.push(first);
    for _ in 0..iterations {
        state = tm_step(&state, &p, f)?;
        let s = record(f, &state, dt)?;
        if initial > 0.0 && s.f_error > DIVERGENCE_FACTOR * initial {
            return Err(Error::Divergence {
                iteration: state.k,
                initial,
                current: s.f_error,
            });
        }
        traj.samples.push(s);
    }
    Ok(traj)
}

fn record<R: Real>(f: &CostFunction<R>, state: &DiscreteState<R>, dt: f64) -> Result<Sample> {
    let f_error = f
        .error(&state.x)
        .ok_or(Error::MissingCapability("cost without a known minimizer"))?
        .to_f64();
    if !f_error.is_finite() {
        return Err(Error::NumericalFailure {
            location: format!("iteration {}", state.k),
            message: "nonfinite cost".into(),
        });
    }
    Ok(Sample {
        k: state.k,
        t: state.k as f64 * dt,
        eps: linalg::to_f64_vec(&state.eps_curr),
        velocity: linalg::to_f64_vec(&linalg::sub(&state.eps_curr, &state.eps_prev)),
        y: linalg::to_f64_vec(&state.y),
        x: linalg::to_f64_vec(&state.x),
        y_dot: None,
        f_error,
        grad_norm: linalg::norm_f64(&f.gradient(&state.x)),
        lyapunov: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{paper_example_cost, quadratic_cost};

    #[test]
    fn minimizer_is_fixed_point() {
        let f = paper_example_cost();
        let xs = f.minimizer().unwrap().to_vec();
        let p = tm_parameters(f.m(), f.l()).unwrap();
        let s0 = DiscreteState::new(&xs);
        let s1 = tm_step(&s0, &p, &f).unwrap();
        assert!((s1.eps_curr[0] - xs[0]).abs() < 1e-15);
        let s1 = nag_step(&s0, &f, 1.0 / f.l(), 0.5).unwrap();
        assert!((s1.eps_curr[0] - xs[0]).abs() < 1e-15);
        let s1 = gd_step(&s0, &f, 1.0 / f.l()).unwrap();
        assert!((s1.eps_curr[0] - xs[0]).abs() < 1e-15);
    }

    #[test]
    fn well_conditioned_tm_is_one_gradient_step() {
        let f = quadratic_cost(&[2.5]).unwrap();
        let p = tm_parameters(2.5, 2.5).unwrap();
        let s1 = tm_step(&DiscreteState::new(&[1.0]), &p, &f).unwrap();
        assert_eq!(s1.eps_curr, vec![0.0]);
        let s1 = gd_step(&DiscreteState::new(&[1.0]), &f, 1.0 / 2.5).unwrap();
        assert_eq!(s1.eps_curr, vec![0.0]);
    }

    #[test]
    fn gd_contracts_each_coordinate() {
        let f = quadratic_cost(&[1.0, 10.0]).unwrap();
        let s1 = gd_step(&DiscreteState::new(&[1.0, 1.0]), &f, 0.1).unwrap();
        assert!((s1.x[0] - 0.9).abs() < 1e-15);
        assert_eq!(s1.x[1], 0.0);
    }

    #[test]
    fn outputs_follow_history() {
        let f = quadratic_cost(&[1.0, 10.0]).unwrap();
        let p = tm_parameters(1.0, 10.0).unwrap();
        let mut s = DiscreteState::new(&[1.0, -2.0]);
        for _ in 0..5 {
            s = tm_step(&s, &p, &f).unwrap();
            for i in 0..2 {
                let d = s.eps_curr[i] - s.eps_prev[i];
                assert!((s.y[i] - (s.eps_curr[i] + p.gamma * d)).abs() < 1e-15);
                assert!((s.x[i] - (s.eps_curr[i] + p.delta * d)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_iterations_give_initial_sample() {
        let f = paper_example_cost();
        let p = nominal_parameters(Algorithm::Tm, f.m(), f.l()).unwrap();
        let tr = run_discrete(Algorithm::Tm, &f, &p, &[3.0], 0, 1.0).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.samples[0].x, vec![3.0]);
    }

    #[test]
    fn tm_rate_on_quadratic() {
        let f = quadratic_cost(&[1.0, 10.0]).unwrap();
        let p = tm_parameters(1.0, 10.0).unwrap();
        let tr = run_discrete(Algorithm::Tm, &f, &p, &[1.0, 1.0], 200, 1.0).unwrap();
        let dist = |k: usize| crate::linalg::norm(&tr.samples[k].x);
        // ‖x_k‖ ≤ C ρ^k with C fitted at k = 20
        let c = dist(20) / p.rho.powi(20);
        for k in 20..=200 {
            assert!(dist(k) <= 1.01 * c * p.rho.powi(k as i32) + 1e-300, "k={k}");
        }
    }

    #[test]
    fn divergence_is_reported() {
        let f = quadratic_cost(&[1.0]).unwrap();
        let p = TMParameters::custom(3.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let r = run_discrete(Algorithm::Gd, &f, &p, &[1.0], 100, 1.0);
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }

    #[test]
    fn scale_outside_unit_interval_rejected() {
        let f = quadratic_cost(&[1.0]).unwrap();
        let p = nominal_parameters(Algorithm::Gd, 1.0, 1.0).unwrap();
        assert!(run_discrete(Algorithm::Gd, &f, &p, &[1.0], 1, 0.0).is_err());
        assert!(run_discrete(Algorithm::Gd, &f, &p, &[1.0], 1, 1.5).is_err());
    }

    #[test]
    fn nonfinite_gradient_is_a_numerical_failure() {
        let f = CostFunction::<f64>::from_fns("nan", 1, |_| 0.0, |_| vec![f64::NAN], 1.0, 1.0)
            .unwrap();
        let r = gd_step(&DiscreteState::new(&[1.0]), &f, 1.0);
        assert!(matches!(r, Err(Error::NumericalFailure { .. })));
    }
}
