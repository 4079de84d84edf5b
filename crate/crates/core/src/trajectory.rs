//! Result container shared by the discrete iterations and the ODE integrator.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Lower bound tolerated for a recorded `f_error`.
pub const F_ERROR_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Triple momentum.
    Tm,
    /// Nesterov's accelerated gradient with constant momentum.
    Nag,
    /// Gradient descent.
    Gd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Tm, Algorithm::Nag, Algorithm::Gd];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Tm => "tm",
            Algorithm::Nag => "nag",
            Algorithm::Gd => "gd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tm" => Ok(Algorithm::Tm),
            "nag" => Ok(Algorithm::Nag),
            "gd" => Ok(Algorithm::Gd),
            other => Err(invalid(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Discrete,
    Ode,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Ode => "ode",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded point of a trajectory.
///
/// For iterations `eps` is `ε_k` and `velocity` is `ε_k − ε_{k−1}`; for flows
/// they are `ε(t)` and `ε̇(t)`. Vectors are stored in `f64` whatever precision
/// the run used; `f_error` is computed in the run's precision first.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Iteration counter, or the RK4 step index for flows.
    pub k: usize,
    pub t: f64,
    pub eps: Vec<f64>,
    pub velocity: Vec<f64>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// `Ẏ`, flows only.
    pub y_dot: Option<Vec<f64>>,
    /// `f(output) − f(x⋆)`; the output is `x` for iterations and `Y` for flows.
    pub f_error: f64,
    /// `‖∇f(output)‖`.
    pub grad_norm: f64,
    pub lyapunov: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    pub mode: Mode,
    /// Model name, e.g. `tm_high_res` or `low_res`.
    pub label: String,
    /// Stepsize actually used (`α` or `s`), or the RK4 `dt` for flows.
    pub stepsize: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(algorithm: Algorithm, mode: Mode, label: impl Into<String>, stepsize: f64) -> Self {
        Self {
            algorithm,
            mode,
            label: label.into(),
            stepsize,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn f_errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f_error).collect()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.last().map(|s| s.f_error)
    }

    /// Checks that time strictly increases and `f_error ≥ −1e-12`.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(invalid(format!(
                    "time axis not increasing at t = {}",
                    w[1].t
                )));
            }
        }
        if let Some(s) = self.samples.iter().find(|s| s.f_error < F_ERROR_FLOOR) {
            return Err(invalid(format!(
                "negative f_error {:e} at t = {}",
                s.f_error, s.t
            )));
        }
        Ok(())
    }

    /// Linear interpolation of `f_error` at time `t`, `None` outside the range.
    pub fn f_error_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|p| p.t <= t);
        if i == 0 {
            return Some(s[0].f_error);
        }
        if i == s.len() {
            return Some(s[i - 1].f_error);
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let w = (t - a.t) / (b.t - a.t);
        Some(a.f_error + w * (b.f_error - a.f_error))
    }

    /// CSV: `k,t,f_error,grad_norm,x_0,…` for iterations and
    /// `t,f_error,grad_norm,V,Y_0,…,X_0,…` for flows.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.y.len());
        let mut out = String::new();
        match self.mode {
            Mode::Discrete => {
                out.push_str("k,t,f_error,grad_norm");
                for i in 0..n {
                    let _ = write!(out, ",x_{i}");
                }
                out.push('\n');
                for s in &self.samples {
                    let _ = write!(
                        out,
                        "{},{:.16e},{:.16e},{:.16e}",
                        s.k, s.t, s.f_error, s.grad_norm
                    );
                    for v in &s.x {
                        let _ = write!(out, ",{v:.16e}");
                    }
                    out.push('\n');
                }
            }
            Mode::Ode => {
                out.push_str("t,f_error,grad_norm,V");
                for i in 0..n {
                    let _ = write!(out, ",Y_{i}");
                }
                for i in 0..n {
                    let _ = write!(out, ",X_{i}");
                }
                out.push('\n');
                for s in &self.samples {
                    let v = s.lyapunov.unwrap_or(f64::NAN);
                    let _ = write!(
                        out,
                        "{:.16e},{:.16e},{:.16e},{:.16e}",
                        s.t, s.f_error, s.grad_norm, v
                    );
                    for v in s.y.iter().chain(&s.x) {
                        let _ = write!(out, ",{v:.16e}");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}
