//! IQC analysis of the high-resolution triple momentum flow.
//!
//! Writing `ξ = [ε̇; ε]` and `q = ∇f(Y)`, the flow is the feedback
//! interconnection of the LTI system `ξ̇ = Aξ + Bq`, `Y = C_Y ξ` with the
//! gradient, which satisfies the pointwise sector IQC with
//! `Q_f = [−2ML, L+M; L+M, −2]`. Every block is `S ⊗ I_n`, so all matrix
//! checks are done at `n = 1`.
//!
//! The rate `p` is certified when there are `P ≻ 0` and `σ ≥ 0` with
//!
//! ```text
//! [AᵀP + PA + pP, PB; BᵀP, 0] + σ Gᵀ Q_f G ⪯ 0,   G = [C_Y, 0; 0, 1].
//! ```
//!
//! The LMI is homogeneous in `(P, σ)`, so `P₁₁ = 1` is fixed and the
//! remaining `(P₁₂, P₂₂, σ)` are searched by a grid followed by Nelder–Mead
//! on the convex function `max(λ_max(LMI), −λ_min(P))`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::params::{tm_parameters, TMParameters};
use crate::rates::{RateCertificate, RateSource};

/// Margin required of `λ_max` of an accepted LMI.
pub const NSD_MARGIN: f64 = -1e-10;

/// Box of the witness search: `P₁₂`, `P₂₂` and `σ`.
pub const P12_RANGE: (f64, f64) = (-10.0, 10.0);
pub const P22_RANGE: (f64, f64) = (1e-8, 100.0);
pub const SIGMA_RANGE: (f64, f64) = (0.0, 1e4);

/// Reduced (`n = 1`) blocks of the LTI embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiEmbedding {
    /// `[[−2√μ, 0], [1, 0]]`
    pub a0: Matrix,
    /// `[−(1 + √(μα)), 0]ᵀ`
    pub b0: [f64; 2],
    /// Output row of `Y`: `[√α γ, 1]`.
    pub c_y: [f64; 2],
    /// Output row of `X`: `[√α δ, 1]` (not used by the LMI).
    pub c_x: [f64; 2],
    /// Feedthrough, zero.
    pub d0: f64,
    pub mu: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
}

pub fn build_embedding(params: &TMParameters) -> LtiEmbedding {
    let sa = params.alpha.sqrt();
    LtiEmbedding {
        a0: Matrix::from_rows([[-2.0 * params.mu.sqrt(), 0.0], [1.0, 0.0]]),
        b0: [-params.gain(), 0.0],
        c_y: [sa * params.gamma, 1.0],
        c_x: [sa * params.delta, 1.0],
        d0: 0.0,
        mu: params.mu,
        alpha: params.alpha,
        gamma: params.gamma,
        delta: params.delta,
    }
}

/// `Q_f = [[−2ML, L+M], [L+M, −2]]`.
pub fn sector_quadratic(m: f64, l: f64) -> Result<Matrix> {
    if !(m > 0.0 && l > 0.0) {
        return Err(invalid("M and L must be positive"));
    }
    if m > l {
        return Err(invalid(format!("M={m} exceeds L={l}")));
    }
    Ok(Matrix::from_rows([[-2.0 * m * l, l + m], [l + m, -2.0]]))
}

/// Value of the sector quadratic form at `(Y − x⋆, ∇f(Y))`, which is
/// nonnegative for every function of the class.
pub fn sector_value(qf: &Matrix, dy: &[f64], g: &[f64]) -> f64 {
    dy.iter()
        .zip(g)
        .map(|(&u, &v)| qf[(0, 0)] * u * u + 2.0 * qf[(0, 1)] * u * v + qf[(1, 1)] * v * v)
        .sum()
}

/// The assembled 3×3 LMI matrix at one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    pub p_iqc: f64,
    pub p0: Matrix,
    pub sigma: f64,
    pub assembled: Matrix,
}

pub fn assemble_lmi(
    embedding: &LtiEmbedding,
    qf: &Matrix,
    p0: &Matrix,
    sigma: f64,
    p_iqc: f64,
) -> Result<LmiProblem> {
    if p0.dim() != 2 || qf.dim() != 2 {
        return Err(invalid("P0 and Q_f must be 2×2"));
    }
    if !p0.is_symmetric(1e-12) {
        return Err(invalid(format!("P0 is not symmetric ({:e})", p0.max_asymmetry())));
    }
    if !(sigma >= 0.0 && p_iqc >= 0.0) {
        return Err(invalid("σ and p must be nonnegative"));
    }
    let a = &embedding.a0;
    let b = embedding.b0;
    let mut m = Matrix::zeros(3);
    for i in 0..2 {
        for j in 0..2 {
            let mut v = p_iqc * p0[(i, j)];
            for k in 0..2 {
                v += a[(k, i)] * p0[(k, j)] + p0[(i, k)] * a[(k, j)];
            }
            m[(i, j)] = v;
        }
        let pb = p0[(i, 0)] * b[0] + p0[(i, 1)] * b[1];
        m[(i, 2)] = pb;
        m[(2, i)] = pb;
    }
    // G = [c_y 0; 0 1], so GᵀQG has entries from Q scaled by c_y
    let c = [embedding.c_y[0], embedding.c_y[1], 0.0];
    let e = [0.0, 0.0, 1.0];
    for i in 0..3 {
        for j in 0..3 {
            let g = qf[(0, 0)] * c[i] * c[j]
                + qf[(0, 1)] * (c[i] * e[j] + e[i] * c[j])
                + qf[(1, 1)] * e[i] * e[j];
            m[(i, j)] += sigma * g;
        }
    }
    // enforce exact symmetry
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    Ok(LmiProblem {
        p_iqc,
        p0: p0.clone(),
        sigma,
        assembled: m,
    })
}

/// Whether the largest eigenvalue of a symmetric matrix is `≤ tolerance`.
pub fn nsd_check(a: &Matrix, tolerance: f64) -> Result<bool> {
    Ok(symmetric_eigen(a, 1e-12)?.max() <= tolerance)
}

/// A feasible `(P0, σ)` at rate `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct IqcWitness {
    pub p_iqc: f64,
    pub p0: Matrix,
    pub sigma: f64,
    pub lmi_max_eigenvalue: f64,
    pub p0_min_eigenvalue: f64,
}

impl IqcWitness {
    /// Re-checks the witness at another rate.
    pub fn is_feasible_at(&self, embedding: &LtiEmbedding, qf: &Matrix, p_iqc: f64) -> Result<bool> {
        let lmi = assemble_lmi(embedding, qf, &self.p0, self.sigma, p_iqc)?;
        Ok(nsd_check(&lmi.assembled, NSD_MARGIN)? && self.p0_min_eigenvalue > 0.0)
    }
}

/// Settings of the witness search and the rate bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqcOptions {
    /// Bisection tolerance in units of `√L`.
    pub tolerance: f64,
    pub seed: u64,
    /// Random Nelder–Mead restarts per feasibility probe.
    pub restarts: usize,
}

impl Default for IqcOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            seed: 0,
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IqcOutcome {
    Certified(RateCertificate),
    /// Even `p = 0` admits no witness within the search box.
    NoCertificate,
}

impl IqcOutcome {
    pub fn certificate(&self) -> Option<&RateCertificate> {
        match self {
            IqcOutcome::Certified(c) => Some(c),
            IqcOutcome::NoCertificate => None,
        }
    }
}

fn unpack(z: [f64; 3]) -> (Matrix, f64) {
    let p12 = z[0].clamp(P12_RANGE.0, P12_RANGE.1);
    let p22 = z[1].exp().clamp(P22_RANGE.0, P22_RANGE.1);
    let sigma = z[2].exp().clamp(SIGMA_RANGE.0, SIGMA_RANGE.1);
    (Matrix::from_rows([[1.0, p12], [p12, p22]]), sigma)
}

/// `(λ_max(LMI), λ_min(P0))` at the unconstrained coordinates
/// `(P₁₂, ln P₂₂, ln σ)`.
fn evaluate(emb: &LtiEmbedding, qf: &Matrix, p: f64, z: [f64; 3]) -> (f64, f64) {
    let (p0, sigma) = unpack(z);
    let lmi = assemble_lmi(emb, qf, &p0, sigma, p).expect("valid by construction");
    let top = symmetric_eigen(&lmi.assembled, 1e-12).expect("symmetric").max();
    // eigenvalues of [[1, b], [b, c]]
    let (b, c) = (p0[(0, 1)], p0[(1, 1)]);
    let low = 0.5 * (1.0 + c) - (0.25 * (1.0 - c) * (1.0 - c) + b * b).sqrt();
    (top, low)
}

fn objective(emb: &LtiEmbedding, qf: &Matrix, p: f64, z: [f64; 3]) -> f64 {
    let (top, low) = evaluate(emb, qf, p, z);
    // outside the box the clamping makes the function flat; add a tiny pull back
    let out = (z[0].abs() - P12_RANGE.1).max(0.0)
        + (z[1] - P22_RANGE.1.ln()).max(0.0)
        + (P22_RANGE.0.ln() - z[1]).max(0.0)
        + (z[2] - SIGMA_RANGE.1.ln()).max(0.0);
    top.max(-low) + out
}

fn nelder_mead(f: impl Fn([f64; 3]) -> f64, start: [f64; 3], step: [f64; 3], iters: usize, stop: f64) -> ([f64; 3], f64) {
    let mut pts = [start; 4];
    for (i, p) in pts.iter_mut().skip(1).enumerate() {
        p[i] += step[i];
    }
    let mut vals: Vec<f64> = pts.iter().map(|&p| f(p)).collect();
    for _ in 0..iters {
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (idx[0], idx[3], idx[2]);
        if vals[best] < stop {
            break;
        }
        let spread = (vals[worst] - vals[best]).abs();
        if spread < 1e-15 * (1.0 + vals[best].abs()) {
            break;
        }
        let mut centroid = [0.0; 3];
        for &i in &idx[..3] {
            for d in 0..3 {
                centroid[d] += pts[i][d] / 3.0;
            }
        }
        let along = |t: f64| {
            let mut q = [0.0; 3];
            for d in 0..3 {
                q[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
            }
            q
        };
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < vals[best] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            let t = if fr < vals[worst] { -0.5 } else { 0.5 };
            let xc = along(t);
            let fc = f(xc);
            if fc < vals[worst].min(fr) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for &i in &idx[1..] {
                    for d in 0..3 {
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    }
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    let best = (0..4).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best], vals[best])
}

/// Searches for a witness at rate `p`; `warm` seeds the search.
pub fn find_witness(
    embedding: &LtiEmbedding,
    qf: &Matrix,
    p: f64,
    warm: Option<&IqcWitness>,
    rng: &mut ChaCha8Rng,
    restarts: usize,
) -> Result<Option<IqcWitness>> {
    let obj = |z: [f64; 3]| objective(embedding, qf, p, z);
    let accept = |z: [f64; 3]| -> Result<Option<IqcWitness>> {
        let (p0, sigma) = unpack(z);
        let lmi = assemble_lmi(embedding, qf, &p0, sigma, p)?;
        let top = symmetric_eigen(&lmi.assembled, 1e-12)?.max();
        let low = symmetric_eigen(&p0, 1e-12)?.min();
        if top <= NSD_MARGIN && low > 0.0 {
            Ok(Some(IqcWitness {
                p_iqc: p,
                p0,
                sigma,
                lmi_max_eigenvalue: top,
                p0_min_eigenvalue: low,
            }))
        } else {
            Ok(None)
        }
    };
    let stop = 10.0 * NSD_MARGIN;
    let step = [0.5, 1.0, 1.0];
    let mut starts: Vec<[f64; 3]> = Vec::new();
    if let Some(w) = warm {
        let z = [w.p0[(0, 1)], w.p0[(1, 1)].ln(), w.sigma.max(1e-12).ln()];
        if let Some(found) = accept(z)? {
            return Ok(Some(found));
        }
        starts.push(z);
    }
    // coarse grid over the box
    let mut scored: Vec<(f64, [f64; 3])> = Vec::new();
    for i in 0..9 {
        let p12 = -8.0 + 2.0 * i as f64;
        for j in 0..9 {
            let lp22 = (1e-4f64).ln() + (1e6f64).ln() * j as f64 / 8.0;
            for k in 0..9 {
                let ls = (1e-4f64).ln() + (1e8f64).ln() * k as f64 / 8.0;
                let z = [p12, lp22, ls];
                scored.push((obj(z), z));
            }
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.extend(scored.iter().take(3).map(|s| s.1));
    for _ in 0..restarts {
        starts.push([
            rng.gen_range(P12_RANGE.0..P12_RANGE.1),
            rng.gen_range((1e-4f64).ln()..P22_RANGE.1.ln()),
            rng.gen_range((1e-4f64).ln()..SIGMA_RANGE.1.ln()),
        ]);
    }
    for s in starts {
        let (mut z, mut v) = nelder_mead(obj, s, step, 600, stop);
        // restart from the optimum to escape a collapsed simplex
        for _ in 0..3 {
            if v < stop {
                break;
            }
            let (z2, v2) = nelder_mead(obj, z, [0.1, 0.3, 0.3], 600, stop);
            if v2 >= v - 1e-14 {
                break;
            }
            z = z2;
            v = v2;
        }
        if let Some(found) = accept(z)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Largest certified `p` in `[0, 2√L]` by bisection.
pub fn iqc_rate(params: &TMParameters, opts: IqcOptions) -> Result<IqcOutcome> {
    if !(opts.tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let (m, l) = (params.m, params.l);
    let emb = build_embedding(params);
    let qf = sector_quadratic(m, l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let Some(mut best) = find_witness(&emb, &qf, 0.0, None, &mut rng, opts.restarts)? else {
        return Ok(IqcOutcome::NoCertificate);
    };
    let tol = opts.tolerance * l.sqrt();
    let (mut lo, mut hi) = (0.0, 2.0 * l.sqrt());
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match find_witness(&emb, &qf, mid, Some(&best), &mut rng, opts.restarts)? {
            Some(w) => {
                lo = mid;
                best = w;
            }
            None => hi = mid,
        }
    }
    Ok(IqcOutcome::Certified(RateCertificate {
        rate: lo,
        phi_star: f64::NAN,
        source: RateSource::Iqc,
        mu: params.mu,
        alpha: params.alpha,
        gamma: params.gamma,
        kappa: params.kappa,
        l,
        m,
        tolerance: tol,
        closed_form_rate: None,
        numeric_rate: None,
        closed_form_consistent: true,
        witness: Some(best),
    }))
}

/// One row of [`iqc_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct IqcRow {
    pub m: f64,
    pub kappa: f64,
    pub outcome: IqcOutcome,
}

/// Runs [`iqc_rate`] for every `(M, κ)` pair with `L = κM`.
pub fn iqc_sweep(ms: &[f64], kappas: &[f64], opts: IqcOptions) -> Result<Vec<IqcRow>> {
    let mut rows = Vec::new();
    for &m in ms {
        for &kappa in kappas {
            let params = tm_parameters(m, kappa * m)?;
            rows.push(IqcRow {
                m,
                kappa,
                outcome: iqc_rate(&params, opts)?,
            });
        }
    }
    Ok(rows)
}

pub fn iqc_sweep_csv(rows: &[IqcRow]) -> String {
    let mut s = String::from("M,kappa,p_iqc_star,sigma,P11,P12,P22,status\n");
    for r in rows {
        match r.outcome.certificate().and_then(|c| c.witness.as_ref().map(|w| (c, w))) {
            Some((c, w)) => {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},certified",
                    r.m, r.kappa, c.rate, w.sigma, w.p0[(0, 0)], w.p0[(0, 1)], w.p0[(1, 1)]
                );
            }
            None => {
                let _ = writeln!(s, "{:.16e},{:.16e},nan,nan,nan,nan,nan,infeasible_search", r.m, r.kappa);
            }
        }
    }
    s
}
