//! Sample-complexity bounds, the Fano tree family behind the lower bound, and
//! error exponents of the quartet tests as constrained KL minimizations.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bfgs::{minimize, Tolerances};
use crate::error::{Error, Result};
use crate::model::{joint_distribution, noisy_joint_distribution, spin, IsingNoiseSpec, IsingTreeModel};
use crate::quartet::alpha;
use crate::recovery::thresholds_ising;
use crate::sim::substream;
use crate::tree_core::{enumerate_equivalence_class, make_named_tree, NamedTree, TreeStructure};

/// Smallest `d` covered by the lower bound.
pub const NECESSARY_MIN_D: usize = 33;
/// Largest Fano family size whose joints are built explicitly.
pub const FANO_MAX_D: usize = 15;

fn check_params(rho_min: f64, rho_max: f64, q_max: f64) -> Result<()> {
    if !(rho_min > 0.0 && rho_min <= rho_max && rho_max < 1.0) {
        return Err(Error::Domain(format!("need 0 < rho_min <= rho_max < 1, got {rho_min}, {rho_max}")));
    }
    if !(0.0..0.5).contains(&q_max) {
        return Err(Error::Domain(format!("q_max must lie in [0, 0.5), got {q_max}")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    Ok(())
}

/// Which effective leaf correlation enters the symmetric KL closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoQ {
    /// `(1 - 2 q_max) rho_min`
    TwoQ,
    /// `(1 - q_max) rho_min`
    OneQ,
}

impl RhoQ {
    pub fn value(self, rho_min: f64, q_max: f64) -> f64 {
        match self {
            RhoQ::TwoQ => (1.0 - 2.0 * q_max) * rho_min,
            RhoQ::OneQ => (1.0 - q_max) * rho_min,
        }
    }
}

impl fmt::Display for RhoQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoQ::TwoQ => "(1-2q_max)*rho_min",
            RhoQ::OneQ => "(1-q_max)*rho_min",
        })
    }
}

/// Sample size below which every estimator misses the class with
/// probability at least one half.
pub fn necessary_samples(d: usize, rho_min: f64, rho_max: f64, q_max: f64) -> Result<f64> {
    check_params(rho_min, rho_max, q_max)?;
    if d < NECESSARY_MIN_D {
        return Err(Error::Domain(format!("the lower bound needs d > 32, got {d}")));
    }
    let rq = RhoQ::TwoQ.value(rho_min, q_max);
    if rq <= 0.0 {
        return Err(Error::Domain("effective correlation vanishes".into()));
    }
    Ok((d as f64).ln() / (4.0 * (1.0 - rho_max) * rq * rq.atanh()))
}

/// Sufficient samples for the estimator with the KA quartet test.
pub fn sufficient_samples_ka(d: usize, tau: f64, rho_min: f64, rho_max: f64, q_max: f64) -> Result<f64> {
    check_tau(tau)?;
    let (_, t2) = thresholds_ising(rho_min, rho_max, q_max)?;
    let delta = t2.powi(3) * (1.0 - alpha(rho_max)?) / 128.0;
    let d = d as f64;
    Ok(128.0 / (delta * delta) * (6.0 * d * d / tau).ln())
}

/// Sufficient samples from the sharper analysis; covers both KA and SGA.
pub fn sufficient_samples_improved(d: usize, tau: f64, rho_min: f64, rho_max: f64, q_max: f64) -> Result<f64> {
    check_tau(tau)?;
    let (_, t2) = thresholds_ising(rho_min, rho_max, q_max)?;
    let delta = t2 * (1.0 - alpha(rho_max)?) / 20.0;
    let d = d as f64;
    Ok(2.0 / (delta * delta) * (d * d / tau).ln())
}

/// `2 atanh(rho_q) rho_q (1 - rho_max)` with `rho_q = (1 - 2 q_max) rho_min`.
pub fn symmetric_kl_closed_form(rho_min: f64, rho_max: f64, q_max: f64) -> Result<f64> {
    symmetric_kl_closed_form_with(RhoQ::TwoQ, rho_min, rho_max, q_max)
}

pub fn symmetric_kl_closed_form_with(rho_q: RhoQ, rho_min: f64, rho_max: f64, q_max: f64) -> Result<f64> {
    check_params(rho_min, rho_max, q_max)?;
    let r = rho_q.value(rho_min, q_max);
    Ok(2.0 * r.atanh() * r * (1.0 - rho_max))
}

/// All four bounds for one parameter set; the necessary bound is absent when `d <= 32`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub necessary: Option<f64>,
    pub sufficient_ka: f64,
    pub sufficient_improved: f64,
    pub symmetric_kl: f64,
}

pub fn bounds(d: usize, tau: f64, rho_min: f64, rho_max: f64, q_max: f64) -> Result<Bounds> {
    Ok(Bounds {
        necessary: match necessary_samples(d, rho_min, rho_max, q_max) {
            Ok(v) => Some(v),
            Err(_) if d < NECESSARY_MIN_D => None,
            Err(e) => return Err(e),
        },
        sufficient_ka: sufficient_samples_ka(d, tau, rho_min, rho_max, q_max)?,
        sufficient_improved: sufficient_samples_improved(d, tau, rho_min, rho_max, q_max)?,
        symmetric_kl: symmetric_kl_closed_form(rho_min, rho_max, q_max)?,
    })
}

/// `D(q || p)` in nats.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    let mut sum = 0.0;
    for (&a, &b) in q.iter().zip(p) {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::SupportViolation);
            }
            sum += a * (a / b).ln();
        }
    }
    Ok(sum)
}

/// Star on `2t + 1` nodes and its `t^2` single-edge rewirings, with noise on nodes `1..=t`.
#[derive(Debug, Clone)]
pub struct FanoFamily {
    pub t: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub q_max: f64,
    /// `T_0, ..., T_M`.
    pub trees: Vec<TreeStructure>,
    /// Edge correlations aligned with each tree's sorted edge list.
    pub edge_corr: Vec<Vec<f64>>,
    pub noise: IsingNoiseSpec,
}

impl FanoFamily {
    pub fn d(&self) -> usize {
        2 * self.t + 1
    }

    /// `M = t^2`.
    pub fn m(&self) -> usize {
        self.t * self.t
    }

    /// `(k_a, k_b)` for `1 <= k <= M`.
    pub fn rewiring(&self, k: usize) -> (usize, usize) {
        let ka = 1 + (k - 1) / self.t;
        (ka, k - (ka - 1) * self.t)
    }

    pub fn models(&self) -> Result<Vec<IsingTreeModel>> {
        self.trees.iter().zip(&self.edge_corr).map(|(t, c)| IsingTreeModel::new(t.clone(), c.clone())).collect()
    }
}

pub fn fano_family(t: usize, rho_min: f64, rho_max: f64, q_max: f64) -> Result<FanoFamily> {
    check_params(rho_min, rho_max, q_max)?;
    if t < 2 {
        return Err(Error::Domain(format!("t must be at least 2, got {t}")));
    }
    let d = 2 * t + 1;
    if d > FANO_MAX_D {
        return Err(Error::SizeGuard { d, max: FANO_MAX_D });
    }
    let hub = d;
    let hub_corr = |j: usize| if j <= t { rho_min } else { rho_max };
    let mut trees = Vec::with_capacity(t * t + 1);
    let mut edge_corr = Vec::with_capacity(t * t + 1);
    let star = TreeStructure::new(d, (1..hub).map(|j| (j, hub)))?;
    edge_corr.push(star.edges().iter().map(|&(j, _)| hub_corr(j)).collect());
    trees.push(star);
    for k in 1..=t * t {
        let ka = 1 + (k - 1) / t;
        let kb = k - (ka - 1) * t;
        let edges = (1..hub).map(|j| if j == ka { (ka, kb + t) } else { (j, hub) });
        let tree = TreeStructure::new(d, edges)?;
        edge_corr.push(
            tree.edges().iter().map(|&(i, j)| if j == hub { hub_corr(i) } else { rho_min }).collect(),
        );
        trees.push(tree);
    }
    let q = (1..=d).map(|i| if i <= t { q_max } else { 0.0 }).collect();
    Ok(FanoFamily { t, rho_min, rho_max, q_max, trees, edge_corr, noise: IsingNoiseSpec::new(q)? })
}

/// Outcome of checking a Fano family against its closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct FanoReport {
    pub t: usize,
    pub d: usize,
    /// Pairs `(i, j)` of trees whose equivalence classes intersect.
    pub overlapping_classes: Vec<(usize, usize)>,
    /// Exact `J(P_k, P_0)` for `k = 1..=M`.
    pub exact: Vec<f64>,
    pub closed_two_q: f64,
    pub closed_one_q: f64,
    pub max_err_two_q: f64,
    pub max_err_one_q: f64,
    /// Every definition of `rho_q` whose closed form matches all exact values to `tol`.
    pub matching: Vec<RhoQ>,
    pub tol: f64,
}

impl FanoReport {
    pub fn classes_disjoint(&self) -> bool {
        self.overlapping_classes.is_empty()
    }

    /// Disjoint classes and the `(1 - 2 q_max)` closed form holds.
    pub fn passes(&self) -> bool {
        self.classes_disjoint() && self.matching.contains(&RhoQ::TwoQ)
    }
}

impl fmt::Display for FanoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.matching.iter().map(|r| r.to_string()).collect();
        write!(
            f,
            "t={} d={} disjoint={} |err| (1-2q)={:.3e} (1-q)={:.3e} matching=[{}]",
            self.t,
            self.d,
            self.classes_disjoint(),
            self.max_err_two_q,
            self.max_err_one_q,
            names.join(", ")
        )
    }
}

/// Symmetric KL `D(p || q) + D(q || p)`.
fn symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&a, &b)| (a - b) * (a.ln() - b.ln())).sum()
}

pub fn verify_fano_family(f: &FanoFamily) -> Result<FanoReport> {
    let d = f.d();
    if d > FANO_MAX_D {
        return Err(Error::SizeGuard { d, max: FANO_MAX_D });
    }
    let classes: Vec<HashSet<Vec<(usize, usize)>>> = f
        .trees
        .iter()
        .map(|t| Ok(enumerate_equivalence_class(t)?.into_iter().map(|m| m.edges().to_vec()).collect()))
        .collect::<Result<_>>()?;
    let mut overlapping_classes = Vec::new();
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            if !classes[i].is_disjoint(&classes[j]) {
                overlapping_classes.push((i, j));
            }
        }
    }
    let joints: Vec<Vec<f64>> = f
        .models()?
        .iter()
        .map(|m| noisy_joint_distribution(&joint_distribution(m)?, &f.noise))
        .collect::<Result<_>>()?;
    let exact: Vec<f64> = joints[1..].iter().map(|p| symmetric_kl(p, &joints[0])).collect();
    let closed_two_q = symmetric_kl_closed_form_with(RhoQ::TwoQ, f.rho_min, f.rho_max, f.q_max)?;
    let closed_one_q = symmetric_kl_closed_form_with(RhoQ::OneQ, f.rho_min, f.rho_max, f.q_max)?;
    let max_err = |c: f64| exact.iter().fold(0.0f64, |m, &e| m.max((e - c).abs()));
    let (max_err_two_q, max_err_one_q) = (max_err(closed_two_q), max_err(closed_one_q));
    let tol = 1e-9;
    let matching = [(RhoQ::TwoQ, max_err_two_q), (RhoQ::OneQ, max_err_one_q)]
        .into_iter()
        .filter(|&(_, e)| e <= tol)
        .map(|(r, _)| r)
        .collect();
    Ok(FanoReport {
        t: f.t,
        d,
        overlapping_classes,
        exact,
        closed_two_q,
        closed_one_q,
        max_err_two_q,
        max_err_one_q,
        matching,
        tol,
    })
}

/// Feasible sets of the exponent problems. All ratio conditions are stated in
/// product form on the region where every pairwise correlation is non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExponentConstraint {
    /// `r13 r24 >= alpha r12 r34`
    E1,
    /// `r13 r24 <= alpha r14 r23`
    E2,
    /// `r13 r24 r14 r23 >= alpha^2 (r12 r34)^2`
    E3,
    /// `r13 r24 >= r12 r34`
    E4,
    /// `r14 r23 >= r12 r34`
    E5,
    /// `r13 r24 <= alpha r12 r34` and `r13 r24 >= alpha r14 r23`
    KaStar,
    /// `r13 r24 r14 r23 <= alpha^2 (r12 r34)^2`
    SgaStar,
}

/// Monomial `coef * P12^a * P13^b * P14^c` in the pair products
/// `P12 = r12 r34`, `P13 = r13 r24`, `P14 = r14 r23`.
type Monomial = (f64, [i32; 3]);

impl ExponentConstraint {
    fn polynomials(self, alpha: f64) -> Vec<Vec<Monomial>> {
        let a2 = alpha * alpha;
        match self {
            Self::E1 => vec![vec![(1.0, [0, 1, 0]), (-alpha, [1, 0, 0])]],
            Self::E2 => vec![vec![(alpha, [0, 0, 1]), (-1.0, [0, 1, 0])]],
            Self::E3 => vec![vec![(1.0, [0, 1, 1]), (-a2, [2, 0, 0])]],
            Self::E4 => vec![vec![(1.0, [0, 1, 0]), (-1.0, [1, 0, 0])]],
            Self::E5 => vec![vec![(1.0, [0, 0, 1]), (-1.0, [1, 0, 0])]],
            Self::KaStar => vec![
                vec![(alpha, [1, 0, 0]), (-1.0, [0, 1, 0])],
                vec![(1.0, [0, 1, 0]), (-alpha, [0, 0, 1])],
            ],
            Self::SgaStar => vec![vec![(a2, [2, 0, 0]), (-1.0, [0, 1, 1])]],
        }
    }
}

impl fmt::Display for ExponentConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E3 => "E3",
            Self::E4 => "E4",
            Self::E5 => "E5",
            Self::KaStar => "KA_STAR",
            Self::SgaStar => "SGA_STAR",
        })
    }
}

/// Pairs in the order `r12, r13, r14, r23, r24, r34`.
const PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Minimize `D(Q || base)` over distributions `Q` on `{+1, -1}^4` in the set `constraint`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentProblem {
    base: Vec<f64>,
    constraint: ExponentConstraint,
    alpha: f64,
}

impl ExponentProblem {
    pub fn new(base: Vec<f64>, constraint: ExponentConstraint, alpha: f64) -> Result<Self> {
        if base.len() != 16 {
            return Err(Error::DimensionMismatch { expected: 16, got: base.len() });
        }
        if base.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Domain("base distribution must be strictly positive".into()));
        }
        let total: f64 = base.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("base distribution sums to {total}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        let r = correlations(&base);
        if r.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain("base correlations must be positive".into()));
        }
        Ok(ExponentProblem { base, constraint, alpha })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn constraint(&self) -> ExponentConstraint {
        self.constraint
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Constraint values `g_k(Q) >= 0`, polynomial ones rescaled by their size at the base.
    pub fn constraint_values(&self, q: &[f64]) -> Vec<f64> {
        let set = ConstraintSet::new(self);
        let r = correlations(q);
        (0..set.len()).map(|k| set.eval(k, &r, None)).collect()
    }

    /// Largest constraint violation at `q`.
    pub fn residual(&self, q: &[f64]) -> f64 {
        self.constraint_values(q).into_iter().fold(0.0, |m, g| m.max(-g))
    }
}

/// `E_Q[x_j x_k]` for the six pairs.
fn correlations(q: &[f64]) -> [f64; 6] {
    let mut r = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        r[k] = q.iter().enumerate().map(|(s, &w)| w * spin(s, i) * spin(s, j)).sum();
    }
    r
}

struct ConstraintSet {
    polys: Vec<Vec<Monomial>>,
    scale: Vec<f64>,
}

impl ConstraintSet {
    fn new(p: &ExponentProblem) -> Self {
        let polys = p.constraint.polynomials(p.alpha);
        let r0 = correlations(&p.base);
        let prod0 = products(&r0);
        let scale = polys
            .iter()
            .map(|poly| poly.iter().map(|&(c, e)| (c * monomial(&prod0, e)).abs()).fold(1e-300, f64::max))
            .collect();
        ConstraintSet { polys, scale }
    }

    /// Polynomial constraints followed by `r_k >= 0`.
    fn len(&self) -> usize {
        self.polys.len() + 6
    }

    /// Value of constraint `k`; adds `weight * d g_k / d r` into `grad` when given.
    fn eval(&self, k: usize, r: &[f64; 6], grad: Option<(&mut [f64; 6], f64)>) -> f64 {
        if k >= self.polys.len() {
            let i = k - self.polys.len();
            if let Some((g, w)) = grad {
                g[i] += w;
            }
            return r[i];
        }
        let p = products(r);
        let s = self.scale[k];
        let mut value = 0.0;
        let mut dp = [0.0; 3];
        for &(c, e) in &self.polys[k] {
            value += c * monomial(&p, e);
            for m in 0..3 {
                if e[m] > 0 {
                    let mut e2 = e;
                    e2[m] -= 1;
                    dp[m] += c * e[m] as f64 * monomial(&p, e2);
                }
            }
        }
        if let Some((g, w)) = grad {
            let w = w / s;
            // P12 = r12 r34, P13 = r13 r24, P14 = r14 r23
            g[0] += w * dp[0] * r[5];
            g[5] += w * dp[0] * r[0];
            g[1] += w * dp[1] * r[4];
            g[4] += w * dp[1] * r[1];
            g[2] += w * dp[2] * r[3];
            g[3] += w * dp[2] * r[2];
        }
        value / s
    }
}

fn products(r: &[f64; 6]) -> [f64; 3] {
    [r[0] * r[5], r[1] * r[4], r[2] * r[3]]
}

fn monomial(p: &[f64; 3], e: [i32; 3]) -> f64 {
    p[0].powi(e[0]) * p[1].powi(e[1]) * p[2].powi(e[2])
}

/// Multistart settings for [`error_exponent_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub starts: usize,
    /// Starts are doubled up to this count while fewer than two agree.
    pub max_starts: usize,
    pub seed: u64,
    /// Two starts agree when their values differ by at most this.
    pub agreement: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { starts: 32, max_starts: 128, seed: 0x5eed, agreement: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSolution {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub residual: f64,
    pub starts: usize,
    /// Feasible starts within the agreement tolerance of the best.
    pub agreeing: usize,
}

const FEASIBILITY_TOL: f64 = 1e-8;

fn softmax(x: &[f64]) -> Vec<f64> {
    // First logit pinned at zero.
    let m = x.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut q: Vec<f64> = std::iter::once(0.0).chain(x.iter().copied()).map(|z| (z - m).exp()).collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    q
}

struct Local {
    value: f64,
    q: Vec<f64>,
    residual: f64,
}

/// Augmented Lagrangian from one start, with BFGS on the free logits.
fn solve_from(problem: &ExponentProblem, set: &ConstraintSet, x0: Vec<f64>) -> Local {
    let log_p: Vec<f64> = problem.base.iter().map(|p| p.ln()).collect();
    let nc = set.len();
    let mut lambda = vec![0.0; nc];
    let mut mu = 10.0;
    let mut x = x0;
    let mut last_viol = f64::INFINITY;
    let tol = Tolerances { grad: 1e-11, f: 1e-15, max_iter: 400 };
    for _ in 0..80 {
        let (lam, m) = (lambda.clone(), mu);
        let fg = |z: &[f64], grad: &mut [f64]| -> f64 {
            let q = softmax(z);
            let r = correlations(&q);
            let mut kl = 0.0;
            let mut dq = [0.0; 16];
            for s in 0..16 {
                let lq = q[s].max(1e-300).ln();
                kl += q[s] * (lq - log_p[s]);
                dq[s] = lq - log_p[s] + 1.0;
            }
            let mut dr = [0.0; 6];
            let mut pen = 0.0;
            for k in 0..nc {
                let g = set.eval(k, &r, None);
                let a = (lam[k] - m * g).max(0.0);
                pen += (a * a - lam[k] * lam[k]) / (2.0 * m);
                if a > 0.0 {
                    set.eval(k, &r, Some((&mut dr, -a)));
                }
            }
            for s in 0..16 {
                for (k, &(i, j)) in PAIRS.iter().enumerate() {
                    dq[s] += dr[k] * spin(s, i) * spin(s, j);
                }
            }
            let mean: f64 = (0..16).map(|s| q[s] * dq[s]).sum();
            for s in 1..16 {
                grad[s - 1] = q[s] * (dq[s] - mean);
            }
            kl + pen
        };
        x = minimize(fg, x, &tol);
        let r = correlations(&softmax(&x));
        let gs: Vec<f64> = (0..nc).map(|k| set.eval(k, &r, None)).collect();
        let viol = gs.iter().fold(0.0f64, |a, &g| a.max(-g));
        let slack = gs.iter().zip(&lambda).fold(0.0f64, |a, (&g, &l)| a.max((l * g).abs()));
        for k in 0..nc {
            lambda[k] = (lambda[k] - mu * gs[k]).max(0.0);
        }
        if viol <= 1e-12 && slack <= 1e-11 {
            break;
        }
        if viol > 0.25 * last_viol {
            mu = (mu * 10.0).min(1e12);
        }
        last_viol = viol;
    }
    let q = softmax(&x);
    let r = correlations(&q);
    let residual = (0..nc).map(|k| set.eval(k, &r, None)).fold(0.0f64, |a, g| a.max(-g));
    let value = q.iter().zip(&problem.base).map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 }).sum();
    Local { value, q, residual }
}

fn start_point(problem: &ExponentProblem, seed: u64, k: usize) -> Vec<f64> {
    let mut rng = substream(seed, k as u64);
    let log_p: Vec<f64> = problem.base.iter().map(|p| (p / problem.base[0]).ln()).collect();
    let spreads = [0.1, 0.3, 0.7, 1.5];
    (1..16)
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            match k {
                0 => log_p[s],
                _ if k % 2 == 1 => log_p[s] + spreads[(k / 2) % 4] * e,
                _ => 1.5 * e,
            }
        })
        .collect()
}

/// Minimum of `D(Q || base)` over the constraint set, with the default multistart.
pub fn error_exponent(problem: &ExponentProblem) -> Result<ExponentSolution> {
    error_exponent_with(problem, &SolverOptions::default())
}

pub fn error_exponent_with(problem: &ExponentProblem, opts: &SolverOptions) -> Result<ExponentSolution> {
    if problem.residual(&problem.base) == 0.0 {
        return Ok(ExponentSolution {
            value: 0.0,
            argmin: problem.base.clone(),
            residual: 0.0,
            starts: 0,
            agreeing: 0,
        });
    }
    let set = ConstraintSet::new(problem);
    let mut locals: Vec<Local> = Vec::new();
    let mut starts = opts.starts.max(1);
    loop {
        let fresh: Vec<Local> = (locals.len()..starts)
            .into_par_iter()
            .map(|k| solve_from(problem, &set, start_point(problem, opts.seed, k)))
            .collect();
        locals.extend(fresh);
        let mut feasible: Vec<&Local> =
            locals.iter().filter(|l| l.residual <= FEASIBILITY_TOL && l.value.is_finite()).collect();
        feasible.sort_by(|a, b| a.value.total_cmp(&b.value));
        if let Some(best) = feasible.first() {
            let agreeing = feasible.iter().filter(|l| l.value - best.value <= opts.agreement).count();
            if agreeing >= 2 || starts == 1 {
                return Ok(ExponentSolution {
                    value: best.value.max(0.0),
                    argmin: best.q.clone(),
                    residual: best.residual,
                    starts,
                    agreeing,
                });
            }
            if starts >= opts.max_starts {
                let spread = feasible.get(1).map_or(f64::INFINITY, |s| s.value - best.value);
                return Err(Error::NonConvergence { spread });
            }
        } else if starts >= opts.max_starts {
            return Err(Error::Infeasible(format!(
                "no start reached {} with alpha = {}",
                problem.constraint, problem.alpha
            )));
        }
        starts = (starts * 2).min(opts.max_starts);
    }
}

/// Shape of a homogeneous 4-node tree; the star is centered at node 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuartetShape {
    Chain,
    Star,
}

/// Noisy joint of a homogeneous 4-node tree with crossover probabilities `q`.
pub fn four_node_base(shape: QuartetShape, rho: f64, q: [f64; 4]) -> Result<Vec<f64>> {
    let kind = match shape {
        QuartetShape::Chain => NamedTree::Chain,
        QuartetShape::Star => NamedTree::Star,
    };
    let m = IsingTreeModel::homogeneous(make_named_tree(kind, 4)?, rho)?;
    noisy_joint_distribution(&joint_distribution(&m)?, &IsingNoiseSpec::new(q.to_vec())?)
}

/// Exponent of the KA test: `min{e1, e2}` on a chain, the star set otherwise.
pub fn exponent_ka(shape: QuartetShape, base: &[f64], alpha: f64) -> Result<f64> {
    let tags: &[ExponentConstraint] = match shape {
        QuartetShape::Chain => &[ExponentConstraint::E1, ExponentConstraint::E2],
        QuartetShape::Star => &[ExponentConstraint::KaStar],
    };
    min_over(tags, base, alpha)
}

/// Exponent of the SGA test: `min{e3, e4, e5}` on a chain, the star set otherwise.
pub fn exponent_sga(shape: QuartetShape, base: &[f64], alpha: f64) -> Result<f64> {
    let tags: &[ExponentConstraint] = match shape {
        QuartetShape::Chain => &[ExponentConstraint::E3, ExponentConstraint::E4, ExponentConstraint::E5],
        QuartetShape::Star => &[ExponentConstraint::SgaStar],
    };
    min_over(tags, base, alpha)
}

fn min_over(tags: &[ExponentConstraint], base: &[f64], alpha: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for &tag in tags {
        best = best.min(error_exponent(&ExponentProblem::new(base.to_vec(), tag, alpha)?)?.value);
    }
    Ok(best)
}

/// The four exponent sweeps over homogeneous 4-node trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentScenario {
    ChainVsRho,
    ChainVsQmax,
    StarVsRho,
    StarVsQmax,
}

impl ExponentScenario {
    pub const ALL: [ExponentScenario; 4] = [Self::ChainVsRho, Self::ChainVsQmax, Self::StarVsRho, Self::StarVsQmax];

    pub fn shape(self) -> QuartetShape {
        match self {
            Self::ChainVsRho | Self::ChainVsQmax => QuartetShape::Chain,
            Self::StarVsRho | Self::StarVsQmax => QuartetShape::Star,
        }
    }

    /// Edge correlation held fixed in the noise sweeps.
    pub fn fixed_rho(self) -> Option<f64> {
        match self {
            Self::ChainVsQmax => Some(0.74),
            Self::StarVsQmax => Some(0.4),
            _ => None,
        }
    }

    pub fn parameter_name(self) -> &'static str {
        if self.fixed_rho().is_some() {
            "q_max"
        } else {
            "rho"
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self.fixed_rho() {
            None => (1..=9).map(|k| k as f64 / 10.0).collect(),
            Some(_) => (0..=8).map(|k| k as f64 * 0.05).collect(),
        }
    }
}

impl FromStr for ExponentScenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scenario `{s}`")))
    }
}

impl fmt::Display for ExponentScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ChainVsRho => "chain_vs_rho",
            Self::ChainVsQmax => "chain_vs_qmax",
            Self::StarVsRho => "star_vs_rho",
            Self::StarVsQmax => "star_vs_qmax",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentRow {
    pub param: f64,
    pub e_ka: f64,
    pub e_sga: f64,
}

/// `(parameter, E_KA, E_SGA)` over `grid`. Noise sweeps flip node 4 only.
pub fn exponent_curves(scenario: ExponentScenario, grid: &[f64]) -> Result<Vec<ExponentRow>> {
    grid.iter()
        .map(|&x| {
            let (rho, q4) = match scenario.fixed_rho() {
                Some(rho) => (rho, x),
                None => (x, 0.0),
            };
            let base = four_node_base(scenario.shape(), rho, [0.0, 0.0, 0.0, q4])?;
            let a = alpha(rho)?;
            Ok(ExponentRow {
                param: x,
                e_ka: exponent_ka(scenario.shape(), &base, a)?,
                e_sga: exponent_sga(scenario.shape(), &base, a)?,
            })
        })
        .collect()
}

pub fn write_exponent_csv<W: Write>(scenario: ExponentScenario, rows: &[ExponentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([scenario.parameter_name(), "e_ka", "e_sga"])?;
    for r in rows {
        w.write_record([r.param.to_string(), r.e_ka.to_string(), r.e_sga.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad grid value `{s}`")));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h > 0.0) || b < a {
                return Err(Error::Parse(format!("bad grid range `{spec}`")));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize;
            (0..=count).map(|k| a + k as f64 * h).collect()
        }
        [_] => spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Parse(format!("bad grid `{spec}`"))),
    };
    if grid.is_empty() {
        return Err(Error::Parse("empty grid".into()));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn necessary_example() {
        let v = necessary_samples(64, 0.5, 0.5, 0.0).unwrap();
        assert!((v - 7.571).abs() < 1e-3, "{v}");
        assert!(necessary_samples(32, 0.5, 0.5, 0.0).is_err());
        assert!(necessary_samples(200, 0.5, 0.5, 0.0).unwrap() > v);
    }

    #[test]
    fn noise_penalty_on_lower_bound() {
        let clean = necessary_samples(100, 0.4, 0.6, 0.0).unwrap();
        let noisy = necessary_samples(100, 0.4, 0.6, 0.25).unwrap();
        assert!(noisy / clean >= 4.0);
    }

    #[test]
    fn sufficient_bound_scaling() {
        let ka = |r| sufficient_samples_ka(12, 0.05, r, 0.8, 0.2).unwrap();
        let imp = |r| sufficient_samples_improved(12, 0.05, r, 0.8, 0.2).unwrap();
        assert!(close(ka(0.3) / ka(0.6), 2f64.powi(24), 1e-9));
        assert!(close(imp(0.3) / imp(0.6), 2f64.powi(8), 1e-9));
        assert!(ka(0.6) > imp(0.6));
    }

    #[test]
    fn tau_shift_is_additive() {
        let a = sufficient_samples_improved(12, 0.05, 0.6, 0.8, 0.2).unwrap();
        let b = sufficient_samples_improved(12, 0.005, 0.6, 0.8, 0.2).unwrap();
        let delta = 0.034992 * 0.18 / 20.0;
        assert!(close(b - a, 2.0 * 10f64.ln() / (delta * delta), 1e-9));
    }

    #[test]
    fn closed_form_example() {
        let j = symmetric_kl_closed_form(0.5, 0.5, 0.0).unwrap();
        assert!((j - 0.274653).abs() < 1e-6);
        assert!(symmetric_kl_closed_form(0.5, 0.999999, 0.0).unwrap() < 1e-5);
    }

    #[test]
    fn kl_basics() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::SupportViolation));
    }

    #[test]
    fn fano_rewiring() {
        let f = fano_family(2, 0.4, 0.7, 0.1).unwrap();
        assert_eq!(f.trees.len(), 5);
        assert_eq!(f.rewiring(1), (1, 1));
        assert!(f.trees[1].has_edge(1, 3) && !f.trees[1].has_edge(1, 5));
        let f = fano_family(4, 0.4, 0.7, 0.1).unwrap();
        let pairs: HashSet<(usize, usize)> = (1..=f.m()).map(|k| f.rewiring(k)).collect();
        assert_eq!(pairs.len(), 16);
        for tree in &f.trees[1..] {
            let diff = tree.edges().iter().filter(|e| !f.trees[0].edges().contains(e)).count();
            assert_eq!(diff, 1);
        }
        assert!(matches!(fano_family(8, 0.4, 0.7, 0.1), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn fano_small_family() {
        let r = verify_fano_family(&fano_family(3, 0.4, 0.7, 0.0).unwrap()).unwrap();
        assert!(r.classes_disjoint());
        assert_eq!(r.exact.len(), 9);
        assert_eq!(r.matching, vec![RhoQ::TwoQ, RhoQ::OneQ]);
        let r = verify_fano_family(&fano_family(2, 0.4, 0.7, 0.2).unwrap()).unwrap();
        assert_eq!(r.matching, vec![RhoQ::TwoQ]);
        assert!(r.passes());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.2,0.4").unwrap(), vec![0.2, 0.4]);
        let g = parse_grid("0.1:0.5:0.1").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.5).abs() < 1e-12);
        assert!(parse_grid("0.5:0.1:0.1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn feasible_base_has_zero_exponent() {
        let base = four_node_base(QuartetShape::Chain, 0.5, [0.0; 4]).unwrap();
        let p = ExponentProblem::new(base.clone(), ExponentConstraint::E2, 1.0 - 1e-9).unwrap();
        assert!(p.residual(&base) > 0.0);
        let p = ExponentProblem::new(base.clone(), ExponentConstraint::E1, 0.1).unwrap();
        let s = error_exponent(&p).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.argmin, base);
    }

    #[test]
    fn solver_returns_feasible_minimizer() {
        let base = four_node_base(QuartetShape::Chain, 0.5, [0.0; 4]).unwrap();
        let p = ExponentProblem::new(base, ExponentConstraint::E1, alpha(0.5).unwrap()).unwrap();
        let s = error_exponent(&p).unwrap();
        assert!(s.value > 0.0 && s.residual <= 1e-8);
        assert!(s.agreeing >= 2);
        assert!((kl_divergence(&s.argmin, p.base()).unwrap() - s.value).abs() < 1e-12);
        assert!((s.argmin.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in ExponentScenario::ALL {
            assert_eq!(s.to_string().parse::<ExponentScenario>().unwrap(), s);
        }
    }
}
