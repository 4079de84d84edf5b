//! Independent oracles shared by the property suite and the acceptance runner.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tm_ode::cost::{self, sample_class_inequalities, CostFunction};
use tm_ode::discrete::{nominal_parameters, run_discrete};
use tm_ode::ode::{integrate, y_form_residual, IntegrateOptions, OdeModel};
use tm_ode::{tm_parameters, Algorithm};

pub type M2 = [[f64; 2]; 2];

pub fn mul(a: M2, b: M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn power(mut a: M2, mut k: usize) -> M2 {
    let mut r = [[1.0, 0.0], [0.0, 1.0]];
    while k > 0 {
        if k & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        k >>= 1;
    }
    r
}

/// `exp(A)` by scaling and squaring of a 30-term Taylor series.
pub fn expm(a: M2) -> M2 {
    let norm = a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = 0.5f64.powi(s);
    let b = [[a[0][0] * scale, a[0][1] * scale], [a[1][0] * scale, a[1][1] * scale]];
    let mut term = [[1.0, 0.0], [0.0, 1.0]];
    let mut sum = term;
    for n in 1..30 {
        term = mul(term, b);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = mul(sum, sum);
    }
    sum
}

/// Closed-form output `x_k` of the two-step recursion with tuple
/// `(a, b, g, d)` on `½ Σ λᵢ xᵢ²` from `ε_{−1} = ε_0 = x0`.
///
/// Per coordinate `[ε_k; ε_{k−1}] = T^k [x0; x0]` with
/// `T = [[1 + b − aλ(1+g), −(b − aλg)], [1, 0]]`.
pub fn quadratic_recursion_oracle(tuple: [f64; 4], diag: &[f64], x0: &[f64], k: usize) -> Vec<f64> {
    let [a, b, g, d] = tuple;
    diag.iter()
        .zip(x0)
        .map(|(&lam, &x)| {
            let t = [[1.0 + b - a * lam * (1.0 + g), -(b - a * lam * g)], [1.0, 0.0]];
            if k == 0 {
                return x;
            }
            let p = power(t, k);
            let e_k = (p[0][0] + p[0][1]) * x;
            let e_km1 = (p[1][0] + p[1][1]) * x;
            (1.0 + d) * e_k - d * e_km1
        })
        .collect()
}

/// Largest deviation between `run_discrete` and the closed-form oracle over
/// every step, for all three algorithms.
pub fn max_recursion_deviation(diag: &[f64], x0: &[f64], steps: usize) -> f64 {
    let f = cost::quadratic_cost(diag).unwrap();
    let mut worst: f64 = 0.0;
    for alg in Algorithm::ALL {
        let p = nominal_parameters(alg, f.m(), f.l()).unwrap();
        let tr = run_discrete(alg, &f, &p, x0, steps, 1.0).unwrap();
        let tuple = [p.alpha, p.beta, p.gamma, p.delta];
        for s in &tr.samples {
            let want = quadratic_recursion_oracle(tuple, diag, x0, s.k);
            for (u, v) in s.x.iter().zip(&want) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    worst
}

/// Exact `Y(t)` of a second-order model on `½ Σ λᵢ xᵢ²`.
pub fn linear_flow_oracle(model: &OdeModel, diag: &[f64], eps0: &[f64], eps_dot0: &[f64], t: f64) -> Vec<f64> {
    (0..diag.len())
        .map(|i| {
            let lam = diag[i];
            let (d, k, c) = (model.damping, model.gain, model.y_offset);
            // d/dt [ε; ε̇] = [[0, 1], [−Kλ, −d − Kλc]] [ε; ε̇]
            let a = [[0.0, t], [-k * lam * t, -(d + k * lam * c) * t]];
            let e = expm(a);
            let eps = e[0][0] * eps0[i] + e[0][1] * eps_dot0[i];
            let vel = e[1][0] * eps0[i] + e[1][1] * eps_dot0[i];
            eps + c * vel
        })
        .collect()
}

/// Final-time errors of RK4 against the exact flow at `dt` and `dt/2`.
pub fn rk4_halving_errors(model: &OdeModel, diag: &[f64], y0: &[f64], dt: f64, t_end: f64) -> (f64, f64) {
    let f = cost::quadratic_cost(diag).unwrap();
    let init = model.rest_initial_state(&f, y0).unwrap();
    let exact = linear_flow_oracle(model, diag, &init.eps, &init.eps_dot, t_end);
    let err = |h: f64| {
        let opts = IntegrateOptions::new(f.l(), t_end).dt(h).sample_every(1_000_000);
        let tr = integrate(model, &f, &init, opts).unwrap();
        let y = &tr.last().unwrap().y;
        y.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    (err(dt), err(dt / 2.0))
}

/// Largest difference between the leading-order triple momentum model with
/// `μ := M`, the leading-order Nesterov model and the plain low-resolution
/// model, on random states.
pub fn low_resolution_blindness(seed: u64, states: usize) -> f64 {
    let f = cost::paper_example_cost();
    let mut p = tm_parameters(f.m(), f.l()).unwrap();
    p.mu = f.m();
    let tm = OdeModel::tm_high_res(&p).leading_order();
    let nag = OdeModel::nag_high_res(f.m(), 1.0 / f.l()).unwrap().leading_order();
    let low = OdeModel::low_res(f.m());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let e = [rng.gen_range(-10.0..10.0)];
        let v = [rng.gen_range(-10.0..10.0)];
        let a = tm.acceleration(&f, &e, &v)[0];
        let b = nag.acceleration(&f, &e, &v)[0];
        let c = low.acceleration(&f, &e, &v)[0];
        worst = worst.max((a - b).abs()).max((a - c).abs());
    }
    worst
}

/// Largest per-unit-time drift of any model started at the minimizer at rest.
pub fn equilibrium_drift() -> f64 {
    let mut worst: f64 = 0.0;
    for f in cost::zoo() {
        let p = tm_parameters(f.m(), f.l()).unwrap();
        let xs = f.minimizer().unwrap().to_vec();
        let models = [
            OdeModel::tm_high_res(&p),
            OdeModel::nag_high_res(f.m(), 1.0 / f.l()).unwrap(),
            OdeModel::low_res(p.mu),
            OdeModel::gradient_flow(),
        ];
        for m in models {
            let init = tm_ode::ode::OdeState {
                eps: xs.clone(),
                eps_dot: vec![0.0; xs.len()],
                t: 0.0,
            };
            let t_end = 10.0 / f.l().sqrt();
            let tr = integrate(&m, &f, &init, IntegrateOptions::new(f.l(), t_end)).unwrap();
            for s in &tr.samples {
                let moved = s
                    .eps
                    .iter()
                    .zip(&xs)
                    .map(|(a, b)| (a - b).abs())
                    .chain(s.velocity.iter().map(|v| v.abs()))
                    .fold(0.0, f64::max);
                worst = worst.max(moved / t_end);
            }
        }
    }
    worst
}

/// Largest `residual / (1 + ‖∇f(Y)‖)` of the output equation along the
/// example-cost trajectory from `Y0 = 3`.
pub fn output_form_residual_along_example() -> f64 {
    let f = cost::paper_example_cost();
    let p = tm_parameters(f.m(), f.l()).unwrap();
    let model = OdeModel::tm_high_res(&p);
    let init = model.rest_initial_state(&f, &[3.0]).unwrap();
    let tr = integrate(&model, &f, &init, IntegrateOptions::new(f.l(), 200.0 / f.l().sqrt())).unwrap();
    tr.samples
        .iter()
        .map(|s| {
            let r = y_form_residual(&model, &f, &s.eps, &s.velocity).unwrap();
            r / (1.0 + s.grad_norm)
        })
        .fold(0.0, f64::max)
}

/// Violations of the five class inequalities over the zoo.
pub fn class_inequality_violations(seed: u64, pairs: usize) -> (usize, f64) {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for (i, f) in cost::zoo().iter().enumerate() {
        let r = sample_class_inequalities(f, -5.0, 5.0, pairs, seed + i as u64).unwrap();
        violations += r.violations;
        worst = worst.min(r.worst_margin);
    }
    (violations, worst)
}

pub fn example_cost() -> CostFunction {
    cost::paper_example_cost()
}
