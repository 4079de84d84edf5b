//! Cost-function oracles for the class of `M`-strongly convex functions with
//! `L`-Lipschitz gradient, a zoo of test costs, and checkers for the
//! inequalities characterising that class.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::Real;

/// Additive slack used by the inequality checkers.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Largest gradient norm accepted at a declared minimizer.
pub const MINIMIZER_GRADIENT_TOL: f64 = 1e-10;

/// Value and gradient oracle.
pub trait Objective<R: Real = f64>: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[R]) -> R;
    fn gradient(&self, x: &[R]) -> Vec<R>;

    /// Analytic Hessian-vector product, when one is available.
    fn hessian_vector(&self, _x: &[R], _v: &[R]) -> Option<Vec<R>> {
        None
    }
}

/// A cost function `f` together with its strong-convexity constant `M`, the
/// Lipschitz constant `L` of its gradient, and (optionally) its minimizer.
///
/// Cheap to clone; the oracle is shared.
#[derive(Clone)]
pub struct CostFunction<R: Real = f64> {
    name: String,
    objective: Arc<dyn Objective<R>>,
    strong_convexity: f64,
    lipschitz: f64,
    minimizer: Option<Vec<R>>,
    optimal_value: Option<R>,
}

impl<R: Real> fmt::Debug for CostFunction<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("name", &self.name)
            .field("dimension", &self.dimension())
            .field("M", &self.strong_convexity)
            .field("L", &self.lipschitz)
            .field("minimizer", &self.minimizer)
            .finish()
    }
}

impl<R: Real> CostFunction<R> {
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective<R>>,
        strong_convexity: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        validate_constants(strong_convexity, lipschitz)?;
        if objective.dimension() == 0 {
            return Err(invalid("cost dimension must be positive"));
        }
        Ok(Self {
            name: name.into(),
            objective,
            strong_convexity,
            lipschitz,
            minimizer: None,
            optimal_value: None,
        })
    }

    /// Builds a cost from plain closures.
    pub fn from_fns<V, G>(
        name: impl Into<String>,
        dimension: usize,
        value: V,
        gradient: G,
        strong_convexity: f64,
        lipschitz: f64,
    ) -> Result<Self>
    where
        V: Fn(&[R]) -> R + Send + Sync + 'static,
        G: Fn(&[R]) -> Vec<R> + Send + Sync + 'static,
    {
        let objective = FnObjective {
            dimension,
            value,
            gradient,
        };
        Self::new(name, Arc::new(objective), strong_convexity, lipschitz)
    }

    /// Attaches a known minimizer; its gradient norm must not exceed `1e-10`.
    pub fn with_minimizer(mut self, minimizer: Vec<R>) -> Result<Self> {
        self.check_point(&minimizer)?;
        let g = linalg::norm_f64(&self.objective.gradient(&minimizer));
        if !(g <= MINIMIZER_GRADIENT_TOL) {
            return Err(invalid(format!(
                "declared minimizer of `{}` has gradient norm {g:e}",
                self.name
            )));
        }
        self.optimal_value = Some(self.objective.value(&minimizer));
        self.minimizer = Some(minimizer);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    /// Strong convexity constant `M`.
    pub fn m(&self) -> f64 {
        self.strong_convexity
    }

    /// Lipschitz constant `L` of the gradient.
    pub fn l(&self) -> f64 {
        self.lipschitz
    }

    pub fn kappa(&self) -> f64 {
        self.lipschitz / self.strong_convexity
    }

    pub fn minimizer(&self) -> Option<&[R]> {
        self.minimizer.as_deref()
    }

    pub fn optimal_value(&self) -> Option<R> {
        self.optimal_value
    }

    pub fn check_point(&self, x: &[R]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[R]) -> R {
        debug_assert_eq!(x.len(), self.dimension());
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &[R]) -> Vec<R> {
        debug_assert_eq!(x.len(), self.dimension());
        self.objective.gradient(x)
    }

    /// Analytic Hessian-vector product, `None` when the oracle has none.
    pub fn hessian_vector(&self, x: &[R], v: &[R]) -> Option<Vec<R>> {
        self.objective.hessian_vector(x, v)
    }

    pub fn has_hessian_vector(&self) -> bool {
        let x = vec![R::zero(); self.dimension()];
        self.objective.hessian_vector(&x, &x).is_some()
    }

    /// Hessian-vector product, falling back to a central difference of the
    /// gradient with step `1e-5 (1 + ‖x‖)` along `v / ‖v‖`.
    pub fn hessian_vector_or_fd(&self, x: &[R], v: &[R]) -> Vec<R> {
        if let Some(hv) = self.objective.hessian_vector(x, v) {
            return hv;
        }
        let vn = linalg::norm(v);
        if vn.to_f64() == 0.0 {
            return vec![R::zero(); v.len()];
        }
        let h = R::from_f64(1e-5 * (1.0 + linalg::norm_f64(x)));
        let dir: Vec<R> = v.iter().map(|&vi| vi / vn).collect();
        let gp = self.gradient(&linalg::axpy(x, h, &dir));
        let gm = self.gradient(&linalg::axpy(x, -h, &dir));
        gp.iter()
            .zip(&gm)
            .map(|(&a, &b)| (a - b) / (h + h) * vn)
            .collect()
    }

    /// `f(x) - f(x⋆)`, or `None` when the minimizer is unknown.
    ///
    /// Close to the minimizer the direct difference loses all significant
    /// digits, so there the gap is evaluated as the line integral of the
    /// gradient from `x⋆` to `x` (8-point Gauss–Legendre).
    pub fn error(&self, x: &[R]) -> Option<R> {
        let xs = self.minimizer.as_deref()?;
        let fs = self.optimal_value?;
        let direct = self.value(x) - fs;
        let floor = 1e-8 * (1.0 + fs.to_f64().abs());
        if direct.to_f64() > floor {
            return Some(direct);
        }
        let d = linalg::sub(x, xs);
        let mut acc = R::zero();
        for (node, weight) in GAUSS_LEGENDRE_8 {
            let t = 0.5 * (node + 1.0);
            let p = linalg::axpy(xs, R::from_f64(t), &d);
            acc = acc + linalg::dot(&self.gradient(&p), &d).scale(0.5 * weight);
        }
        Some(acc)
    }

    /// The translated cost `x ↦ f(x - shift)`.
    pub fn shifted(&self, shift: &[R]) -> Result<Self> {
        self.check_point(shift)?;
        let objective = Shifted {
            inner: self.objective.clone(),
            shift: shift.to_vec(),
        };
        let mut out = Self::new(
            format!("{} (shifted)", self.name),
            Arc::new(objective),
            self.strong_convexity,
            self.lipschitz,
        )?;
        if let Some(xs) = &self.minimizer {
            let moved: Vec<R> = xs.iter().zip(shift).map(|(&a, &b)| a + b).collect();
            out.optimal_value = self.optimal_value;
            out.minimizer = Some(moved);
        }
        Ok(out)
    }
}

fn validate_constants(m: f64, l: f64) -> Result<()> {
    if !(m > 0.0 && l > 0.0 && m.is_finite() && l.is_finite()) {
        return Err(invalid(format!("M and L must be positive, got M={m}, L={l}")));
    }
    if m > l {
        return Err(invalid(format!("M={m} exceeds L={l}")));
    }
    Ok(())
}

const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

struct FnObjective<V, G> {
    dimension: usize,
    value: V,
    gradient: G,
}

impl<R, V, G> Objective<R> for FnObjective<V, G>
where
    R: Real,
    V: Fn(&[R]) -> R + Send + Sync,
    G: Fn(&[R]) -> Vec<R> + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value(&self, x: &[R]) -> R {
        (self.value)(x)
    }
    fn gradient(&self, x: &[R]) -> Vec<R> {
        (self.gradient)(x)
    }
}

struct Shifted<R: Real> {
    inner: Arc<dyn Objective<R>>,
    shift: Vec<R>,
}

impl<R: Real> Shifted<R> {
    fn back(&self, x: &[R]) -> Vec<R> {
        linalg::sub(x, &self.shift)
    }
}

impl<R: Real> Objective<R> for Shifted<R> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn value(&self, x: &[R]) -> R {
        self.inner.value(&self.back(x))
    }
    fn gradient(&self, x: &[R]) -> Vec<R> {
        self.inner.gradient(&self.back(x))
    }
    fn hessian_vector(&self, x: &[R], v: &[R]) -> Option<Vec<R>> {
        self.inner.hessian_vector(&self.back(x), v)
    }
}

// ---------------------------------------------------------------------------
// Zoo
// ---------------------------------------------------------------------------

/// `f(x) = ½ Σ dᵢ xᵢ²`.
#[derive(Debug, Clone)]
pub struct DiagonalQuadratic {
    pub diag: Vec<f64>,
}

impl<R: Real> Objective<R> for DiagonalQuadratic {
    fn dimension(&self) -> usize {
        self.diag.len()
    }
    fn value(&self, x: &[R]) -> R {
        x.iter()
            .zip(&self.diag)
            .fold(R::zero(), |acc, (&xi, &d)| acc + (xi * xi).scale(0.5 * d))
    }
    fn gradient(&self, x: &[R]) -> Vec<R> {
        x.iter().zip(&self.diag).map(|(&xi, &d)| xi.scale(d)).collect()
    }
    fn hessian_vector(&self, _x: &[R], v: &[R]) -> Option<Vec<R>> {
        Some(v.iter().zip(&self.diag).map(|(&vi, &d)| vi.scale(d)).collect())
    }
}

/// `½ Σ dᵢ xᵢ²` with `M = min dᵢ`, `L = max dᵢ` and minimizer 0.
pub fn quadratic_cost(diag: &[f64]) -> Result<CostFunction> {
    quadratic_cost_in(diag)
}

pub fn quadratic_cost_in<R: Real>(diag: &[f64]) -> Result<CostFunction<R>> {
    if diag.is_empty() {
        return Err(invalid("quadratic needs at least one diagonal entry"));
    }
    if let Some(bad) = diag.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(invalid(format!("diagonal entries must be positive, got {bad}")));
    }
    let m = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let l = diag.iter().copied().fold(0.0, f64::max);
    let n = diag.len();
    CostFunction::new(
        "quadratic",
        Arc::new(DiagonalQuadratic {
            diag: diag.to_vec(),
        }),
        m,
        l,
    )?
    .with_minimizer(vec![R::zero(); n])
}

/// `f(x) = ½ xᵀ Q x` for a dense symmetric positive definite `Q`.
#[derive(Debug, Clone)]
pub struct DenseQuadratic {
    q: Matrix,
}

impl<R: Real> Objective<R> for DenseQuadratic {
    fn dimension(&self) -> usize {
        self.q.dim()
    }
    fn value(&self, x: &[R]) -> R {
        linalg::dot(x, &self.gradient(x)).scale(0.5)
    }
    fn gradient(&self, x: &[R]) -> Vec<R> {
        let n = self.q.dim();
        (0..n)
            .map(|i| {
                (0..n).fold(R::zero(), |acc, j| acc + x[j].scale(self.q[(i, j)]))
            })
            .collect()
    }
    fn hessian_vector(&self, _x: &[R], v: &[R]) -> Option<Vec<R>> {
        Some(self.gradient(v))
    }
}

/// Dense quadratic; `M` and `L` are the extreme eigenvalues of `Q`.
pub fn dense_quadratic_cost(q: Matrix) -> Result<CostFunction> {
    let eig = linalg::symmetric_eigen(&q, 1e-12)?;
    let (m, l) = (eig.min(), eig.max());
    if m <= 0.0 {
        return Err(invalid("quadratic form is not positive definite"));
    }
    let n = q.dim();
    CostFunction::new("dense quadratic", Arc::new(DenseQuadratic { q }), m, l)?
        .with_minimizer(vec![0.0; n])
}

/// `f(x) = Σ [ln(1 + exp(xᵢ − cᵢ)) + (m/2) xᵢ²]`, a separable smooth cost
/// with `M = m` and `L = m + 1/4`.
#[derive(Debug, Clone)]
pub struct RegularizedSoftplus {
    pub centers: Vec<f64>,
    pub m: f64,
}

impl RegularizedSoftplus {
    fn sigmoid<R: Real>(z: R) -> R {
        if z.to_f64() >= 0.0 {
            R::one() / (R::one() + (-z).exp())
        } else {
            let e = z.exp();
            e / (R::one() + e)
        }
    }
}

impl<R: Real> Objective<R> for RegularizedSoftplus {
    fn dimension(&self) -> usize {
        self.centers.len()
    }
    fn value(&self, x: &[R]) -> R {
        x.iter().zip(&self.centers).fold(R::zero(), |acc, (&xi, &c)| {
            let z = xi - R::from_f64(c);
            // ln(1 + e^z) = max(z, 0) + ln(1 + e^{-|z|})
            let softplus = if z.to_f64() > 0.0 {
                z + (R::one() + (-z).exp()).ln()
            } else {
                (R::one() + z.exp()).ln()
            };
            acc + softplus + (xi * xi).scale(0.5 * self.m)
        })
    }
    fn gradient(&self, x: &[R]) -> Vec<R> {
        x.iter()
            .zip(&self.centers)
            .map(|(&xi, &c)| Self::sigmoid(xi - R::from_f64(c)) + xi.scale(self.m))
            .collect()
    }
    fn hessian_vector(&self, x: &[R], v: &[R]) -> Option<Vec<R>> {
        Some(
            x.iter()
                .zip(&self.centers)
                .zip(v)
                .map(|((&xi, &c), &vi)| {
                    let s = Self::sigmoid(xi - R::from_f64(c));
                    (s * (R::one() - s) + R::from_f64(self.m)) * vi
                })
                .collect(),
        )
    }
}

pub fn softplus_cost(centers: &[f64], m: f64) -> Result<CostFunction> {
    softplus_cost_in(centers, m)
}

pub fn softplus_cost_in<R: Real>(centers: &[f64], m: f64) -> Result<CostFunction<R>> {
    if centers.is_empty() {
        return Err(invalid("softplus cost needs at least one coordinate"));
    }
    if !(m > 0.0) {
        return Err(invalid("regularization must be positive"));
    }
    let obj = RegularizedSoftplus {
        centers: centers.to_vec(),
        m,
    };
    // separable: solve σ(x − c) + m x = 0 per coordinate; the root lies in [−1/m, 0]
    let minimizer: Vec<R> = centers
        .iter()
        .map(|&c| {
            bisect_root(
                |x: R| RegularizedSoftplus::sigmoid(x - R::from_f64(c)) + x.scale(m),
                R::from_f64(-1.0 / m),
                R::zero(),
            )
        })
        .collect();
    CostFunction::new("softplus", Arc::new(obj), m, m + 0.25)?.with_minimizer(minimizer)
}

/// The one-dimensional cost `f(x) = x² / (2 ln(2 + x²)) − x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PaperExample;

impl PaperExample {
    /// Strong convexity constant used for this cost.
    pub const M: f64 = 0.038;
    /// Lipschitz constant of the gradient used for this cost.
    pub const L: f64 = 1.443;

    pub fn derivative<R: Real>(x: R) -> R {
        let u = x * x + R::from_f64(2.0);
        let g = u.ln();
        x / g - x * x * x / (u * g * g) - R::one()
    }

    pub fn second_derivative<R: Real>(x: R) -> R {
        let x2 = x * x;
        let u = x2 + R::from_f64(2.0);
        let g = u.ln();
        R::one() / g - x2.scale(5.0) / (u * g * g)
            + (x2 * x2).scale(2.0) * (g + R::from_f64(2.0)) / (u * u * g * g * g)
    }

    /// Smallest and largest curvature on a uniform grid of `[-r, r]` with
    /// `points` samples.
    pub fn curvature_range(r: f64, points: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..points {
            let x = -r + 2.0 * r * i as f64 / (points - 1) as f64;
            let c = Self::second_derivative(x);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }
}

impl<R: Real> Objective<R> for PaperExample {
    fn dimension(&self) -> usize {
        1
    }
    fn value(&self, x: &[R]) -> R {
        let x = x[0];
        let u = x * x + R::from_f64(2.0);
        x * x / (u.ln().scale(2.0)) - x
    }
    fn gradient(&self, x: &[R]) -> Vec<R> {
        vec![Self::derivative(x[0])]
    }
    fn hessian_vector(&self, x: &[R], v: &[R]) -> Option<Vec<R>> {
        Some(vec![Self::second_derivative(x[0]) * v[0]])
    }
}

/// The one-dimensional example cost with `M = 0.038`, `L = 1.443` and its
/// minimizer located by bisection on the gradient.
pub fn paper_example_cost() -> CostFunction {
    paper_example_cost_in()
}

/// The example cost in double-double arithmetic.
pub fn paper_example_cost_extended() -> CostFunction<crate::DoubleDouble> {
    paper_example_cost_in()
}

pub fn paper_example_cost_in<R: Real>() -> CostFunction<R> {
    // f'(0) = −1 < 0 and f'(10) ≈ 0.70 > 0
    let root = bisect_root(PaperExample::derivative, R::zero(), R::from_f64(10.0));
    CostFunction::new(
        "paper_example",
        Arc::new(PaperExample),
        PaperExample::M,
        PaperExample::L,
    )
    .and_then(|c| c.with_minimizer(vec![root]))
    .expect("example cost constants are valid")
}

/// Bisection for an increasing function with `g(lo) < 0 < g(hi)`, run until
/// the bracket stops shrinking in the working precision.
fn bisect_root<R: Real>(g: impl Fn(R) -> R, mut lo: R, mut hi: R) -> R {
    for _ in 0..256 {
        let mid = (lo + hi).scale(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = g(mid);
        if v.to_f64() > 0.0 || (v.to_f64() == 0.0 && v > R::zero()) {
            hi = mid;
        } else if v < R::zero() {
            lo = mid;
        } else {
            return mid;
        }
    }
    (lo + hi).scale(0.5)
}

/// The default collection of test costs with known minimizers.
pub fn zoo() -> Vec<CostFunction> {
    let rotated = Matrix::from_rows([[3.0, 1.0, 0.5], [1.0, 2.0, 0.3], [0.5, 0.3, 1.5]]);
    vec![
        quadratic_cost(&[1.0, 10.0]).expect("valid"),
        quadratic_cost(&[0.038, 1.443]).expect("valid"),
        dense_quadratic_cost(rotated).expect("valid"),
        softplus_cost(&[1.0, -2.0], 0.2).expect("valid"),
        paper_example_cost(),
    ]
}

// ---------------------------------------------------------------------------
// Class inequalities
// ---------------------------------------------------------------------------

fn pair_terms(f: &CostFunction, x: &[f64], y: &[f64]) -> Result<PairTerms> {
    f.check_point(x)?;
    f.check_point(y)?;
    let gx = f.gradient(x);
    let gy = f.gradient(y);
    let dy = linalg::sub(y, x);
    let dg = linalg::sub(&gy, &gx);
    Ok(PairTerms {
        df: f.value(y) - f.value(x),
        lin: linalg::dot(&gx, &dy),
        dist: linalg::norm(&dy),
        gdist: linalg::norm(&dg),
        inner: linalg::dot(&dy, &dg),
    })
}

struct PairTerms {
    /// f(y) − f(x)
    df: f64,
    /// ∇f(x)ᵀ(y − x)
    lin: f64,
    /// ‖y − x‖
    dist: f64,
    /// ‖∇f(y) − ∇f(x)‖
    gdist: f64,
    /// (y − x)ᵀ(∇f(y) − ∇f(x))
    inner: f64,
}

/// Slack (right side minus left side) of the three strong-convexity
/// inequalities at `(x, y)`:
///
/// 1. `f(y) − f(x) ≤ ∇f(x)ᵀ(y−x) + ‖∇f(y)−∇f(x)‖² / (2M)`
/// 2. `M‖y−x‖² ≤ (y−x)ᵀ(∇f(y)−∇f(x))`
/// 3. `M‖y−x‖ ≤ ‖∇f(y)−∇f(x)‖`
pub fn strong_convexity_margins(f: &CostFunction, x: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    let t = pair_terms(f, x, y)?;
    let m = f.m();
    Ok([
        t.lin + t.gdist * t.gdist / (2.0 * m) - t.df,
        t.inner - m * t.dist * t.dist,
        t.gdist - m * t.dist,
    ])
}

/// Whether each strong-convexity inequality holds up to [`INEQUALITY_SLACK`].
pub fn check_strong_convexity(f: &CostFunction, x: &[f64], y: &[f64]) -> Result<[bool; 3]> {
    Ok(strong_convexity_margins(f, x, y)?.map(|s| s >= -INEQUALITY_SLACK))
}

/// Slack of the Lipschitz-gradient inequalities at `(x, y)`:
///
/// 1. `‖∇f(y)−∇f(x)‖ ≤ L‖y−x‖`
/// 2. `f(y) − f(x) ≤ ∇f(x)ᵀ(y−x) + (L/2)‖y−x‖²`
/// 3. `f(y) − f(x) ≥ ∇f(x)ᵀ(y−x) + ‖∇f(y)−∇f(x)‖² / (2L)`
pub fn lipschitz_gradient_margins(f: &CostFunction, x: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    let t = pair_terms(f, x, y)?;
    let l = f.l();
    Ok([
        l * t.dist - t.gdist,
        t.lin + 0.5 * l * t.dist * t.dist - t.df,
        t.df - t.lin - t.gdist * t.gdist / (2.0 * l),
    ])
}

pub fn check_lipschitz_gradient(f: &CostFunction, x: &[f64], y: &[f64]) -> Result<[bool; 3]> {
    Ok(lipschitz_gradient_margins(f, x, y)?.map(|s| s >= -INEQUALITY_SLACK))
}

/// Result of [`sample_class_inequalities`].
#[derive(Debug, Clone)]
pub struct ClassCheckReport {
    pub pairs: usize,
    pub violations: usize,
    /// Most negative slack over all five inequalities and all pairs.
    pub worst_margin: f64,
}

/// Samples `pairs` random point pairs uniformly in `[lo, hi]^n` and evaluates
/// all five class inequalities.
pub fn sample_class_inequalities(
    f: &CostFunction,
    lo: f64,
    hi: f64,
    pairs: usize,
    seed: u64,
) -> Result<ClassCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.dimension();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        let margins = strong_convexity_margins(f, &x, &y)?
            .into_iter()
            .chain(lipschitz_gradient_margins(f, &x, &y)?);
        for s in margins {
            worst = worst.min(s);
            if s < -INEQUALITY_SLACK {
                violations += 1;
            }
        }
    }
    Ok(ClassCheckReport {
        pairs,
        violations,
        worst_margin: worst,
    })
}
