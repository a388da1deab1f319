//! Exact Ising and Gaussian tree models, node-noise channels and their
//! correlation matrices.
//!
//! Joint distributions over `{+1, -1}^d` are indexed by a bit mask: bit
//! `i - 1` set means `x_i = -1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tree_core::{content_lines, TreeStructure};

/// Largest `d` for which explicit joint distributions are built.
pub const JOINT_MAX_D: usize = 16;

/// Symmetric correlation matrix with unit diagonal, indexed `1..=d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    d: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn identity(d: usize) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        CorrelationMatrix { d, data }
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(d: usize, mut f: F) -> Self {
        let mut m = Self::identity(d);
        for i in 1..=d {
            for j in i + 1..=d {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Validating constructor from row-major rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let mut data = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        for i in 0..d {
            if data[i * d + i] != 1.0 {
                return Err(Error::Domain(format!("diagonal entry {} is not 1", i + 1)));
            }
            for j in 0..d {
                let v = data[i * d + j];
                if v != data[j * d + i] || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Domain(format!("invalid entry at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(CorrelationMatrix { d, data })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i - 1) * self.d + (j - 1)]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        let d = self.d;
        self.data[(i - 1) * d + (j - 1)] = v;
        self.data[(j - 1) * d + (i - 1)] = v;
    }

    /// The 4x4 principal submatrix on `nodes`, in the given order.
    pub fn submatrix(&self, nodes: &[usize]) -> CorrelationMatrix {
        CorrelationMatrix::from_fn(nodes.len(), |a, b| self.get(nodes[a - 1], nodes[b - 1]))
    }

    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `atanh(rho)`.
pub fn theta_from_rho(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!("|rho| must be below 1, got {rho}")));
    }
    Ok(rho.atanh())
}

/// Tree with one correlation per edge; marginals are uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingTreeModel {
    tree: TreeStructure,
    /// Aligned with `tree.edges()`.
    edge_corr: Vec<f64>,
}

impl IsingTreeModel {
    /// Edge correlations must be non-zero with magnitude below 1.
    pub fn new(tree: TreeStructure, edge_corr: Vec<f64>) -> Result<Self> {
        if let Some(r) = edge_corr.iter().find(|r| !(r.abs() < 1.0) || **r == 0.0) {
            return Err(Error::Domain(format!("edge correlation {r} outside (-1, 1) \\ {{0}}")));
        }
        Self::new_degenerate(tree, edge_corr)
    }

    /// Like [`IsingTreeModel::new`] but also accepts `|rho| = 1`.
    pub fn new_degenerate(tree: TreeStructure, edge_corr: Vec<f64>) -> Result<Self> {
        if edge_corr.len() != tree.edges().len() {
            return Err(Error::DimensionMismatch { expected: tree.edges().len(), got: edge_corr.len() });
        }
        if let Some(r) = edge_corr.iter().find(|r| !(r.abs() <= 1.0)) {
            return Err(Error::Domain(format!("edge correlation {r} outside [-1, 1]")));
        }
        Ok(IsingTreeModel { tree, edge_corr })
    }

    /// Also checks `rho_min <= |rho_e| <= rho_max` on every edge.
    pub fn with_bounds(tree: TreeStructure, edge_corr: Vec<f64>, rho_min: f64, rho_max: f64) -> Result<Self> {
        if let Some(r) = edge_corr.iter().find(|r| r.abs() < rho_min || r.abs() > rho_max) {
            return Err(Error::Domain(format!("|{r}| outside [{rho_min}, {rho_max}]")));
        }
        Self::new(tree, edge_corr)
    }

    pub fn homogeneous(tree: TreeStructure, rho: f64) -> Result<Self> {
        let n = tree.edges().len();
        Self::new(tree, vec![rho; n])
    }

    pub fn tree(&self) -> &TreeStructure {
        &self.tree
    }

    pub fn d(&self) -> usize {
        self.tree.d()
    }

    pub fn edge_corr(&self) -> &[f64] {
        &self.edge_corr
    }

    /// Correlation on edge `{i, j}`, if it is an edge.
    pub fn rho(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.tree.edges().binary_search(&key).ok().map(|k| self.edge_corr[k])
    }

    /// `(min |rho_e|, max |rho_e|)`.
    pub fn rho_bounds(&self) -> (f64, f64) {
        let mags = self.edge_corr.iter().map(|r| r.abs());
        (mags.clone().fold(f64::INFINITY, f64::min), mags.fold(0.0, f64::max))
    }

    /// Tree file followed by one `i j rho` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = self.tree.to_text();
        for (&(i, j), r) in self.tree.edges().iter().zip(&self.edge_corr) {
            s.push_str(&format!("{i} {j} {r}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let tree = TreeStructure::parse_lines(&mut lines)?;
        let mut corr = vec![f64::NAN; tree.edges().len()];
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("bad correlation line `{line}`"));
            if toks.len() != 3 {
                return Err(bad());
            }
            let i: usize = toks[0].parse().map_err(|_| bad())?;
            let j: usize = toks[1].parse().map_err(|_| bad())?;
            let r: f64 = toks[2].parse().map_err(|_| bad())?;
            let k = tree.edges().binary_search(&(i.min(j), i.max(j))).map_err(|_| bad())?;
            corr[k] = r;
        }
        if corr.iter().any(|r| r.is_nan()) {
            return Err(Error::Parse("missing edge correlation".into()));
        }
        Self::new(tree, corr)
    }
}

/// Per-node crossover probabilities of the sign-flip channel.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingNoiseSpec {
    q: Vec<f64>,
}

impl IsingNoiseSpec {
    /// Requires `0 <= q_i < 0.5`.
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some(v) = q.iter().find(|v| !(0.0..0.5).contains(*v)) {
            return Err(Error::Domain(format!("crossover {v} outside [0, 0.5)")));
        }
        Ok(IsingNoiseSpec { q })
    }

    /// Accepts any `q_i` in `[0, 1]`.
    pub fn new_unchecked(q: Vec<f64>) -> Result<Self> {
        if let Some(v) = q.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("crossover {v} outside [0, 1]")));
        }
        Ok(IsingNoiseSpec { q })
    }

    pub fn none(d: usize) -> Self {
        IsingNoiseSpec { q: vec![0.0; d] }
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn d(&self) -> usize {
        self.q.len()
    }

    pub fn q_max(&self) -> f64 {
        self.q.iter().copied().fold(0.0, f64::max)
    }
}

/// Path products of edge correlations.
pub fn exact_correlations(m: &IsingTreeModel) -> CorrelationMatrix {
    let d = m.d();
    let mut c = CorrelationMatrix::identity(d);
    for root in 1..=d {
        let (order, parent) = m.tree().bfs(root);
        let mut prod = vec![1.0; d + 1];
        for &u in order.iter().skip(1) {
            let p = parent[u];
            prod[u] = prod[p] * m.rho(p, u).expect("parent edge exists");
            if u > root {
                c.set(root, u, prod[u]);
            }
        }
    }
    c
}

/// Scales off-diagonal entries by `(1 - 2 q_i)(1 - 2 q_j)`.
pub fn noisy_correlations(clean: &CorrelationMatrix, noise: &IsingNoiseSpec) -> Result<CorrelationMatrix> {
    if clean.d() != noise.d() {
        return Err(Error::DimensionMismatch { expected: clean.d(), got: noise.d() });
    }
    let a: Vec<f64> = noise.q().iter().map(|q| 1.0 - 2.0 * q).collect();
    Ok(CorrelationMatrix::from_fn(clean.d(), |i, j| a[i - 1] * a[j - 1] * clean.get(i, j)))
}

/// `x_i` for state `s`.
#[inline]
pub fn spin(s: usize, i: usize) -> f64 {
    if s >> (i - 1) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Explicit distribution over `{+1, -1}^d`.
pub fn joint_distribution(m: &IsingTreeModel) -> Result<Vec<f64>> {
    let d = m.d();
    if d > JOINT_MAX_D {
        return Err(Error::SizeGuard { d, max: JOINT_MAX_D });
    }
    let edges = m.tree().edges();
    Ok((0..1usize << d)
        .map(|s| {
            edges.iter().zip(m.edge_corr()).fold(0.5, |acc, (&(i, j), r)| {
                acc * 0.5 * (1.0 + r * spin(s, i) * spin(s, j))
            })
        })
        .collect())
}

/// Pushes `p` through independent per-node sign flips.
pub fn noisy_joint_distribution(p: &[f64], noise: &IsingNoiseSpec) -> Result<Vec<f64>> {
    let d = noise.d();
    if d > JOINT_MAX_D {
        return Err(Error::SizeGuard { d, max: JOINT_MAX_D });
    }
    if p.len() != 1 << d {
        return Err(Error::DimensionMismatch { expected: 1 << d, got: p.len() });
    }
    let mut out = p.to_vec();
    for (k, &q) in noise.q().iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        let bit = 1usize << k;
        for s in 0..out.len() {
            if s & bit == 0 {
                let (a, b) = (out[s], out[s | bit]);
                out[s] = (1.0 - q) * a + q * b;
                out[s | bit] = q * a + (1.0 - q) * b;
            }
        }
    }
    Ok(out)
}

/// `E[x_i x_j]` under an explicit distribution.
pub fn pair_expectation(p: &[f64], i: usize, j: usize) -> f64 {
    p.iter().enumerate().map(|(s, &w)| w * spin(s, i) * spin(s, j)).sum()
}

/// Zero-mean Gaussian tree model with unit-diagonal precision and weight `w`
/// on every tree edge.
#[derive(Debug, Clone)]
pub struct GaussianTreeModel {
    tree: TreeStructure,
    w: f64,
    precision: DMatrix<f64>,
    covariance: DMatrix<f64>,
    correlation: CorrelationMatrix,
}

pub fn gaussian_model(tree: TreeStructure, w: f64) -> Result<GaussianTreeModel> {
    let d = tree.d();
    let mut precision = DMatrix::identity(d, d);
    for &(i, j) in tree.edges() {
        precision[(i - 1, j - 1)] = w;
        precision[(j - 1, i - 1)] = w;
    }
    let covariance = precision.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    let correlation = normalize(&covariance);
    Ok(GaussianTreeModel { tree, w, precision, covariance, correlation })
}

fn normalize(cov: &DMatrix<f64>) -> CorrelationMatrix {
    let d = cov.nrows();
    let mut c = CorrelationMatrix::from_fn(d, |i, j| {
        cov[(i - 1, j - 1)] / (cov[(i - 1, i - 1)] * cov[(j - 1, j - 1)]).sqrt()
    });
    for i in 1..=d {
        for j in i + 1..=d {
            let v = c.get(i, j).clamp(-1.0, 1.0);
            c.set(i, j, v);
        }
    }
    c
}

impl GaussianTreeModel {
    pub fn tree(&self) -> &TreeStructure {
        &self.tree
    }

    pub fn d(&self) -> usize {
        self.tree.d()
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// The normalized covariance of the clean variables.
    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.correlation
    }

    /// `(min, max)` of `|K_ij|` over tree edges.
    pub fn rho_bounds(&self) -> (f64, f64) {
        let mags: Vec<f64> = self.tree.edges().iter().map(|&(i, j)| self.correlation.get(i, j).abs()).collect();
        (mags.iter().copied().fold(f64::INFINITY, f64::min), mags.iter().copied().fold(0.0, f64::max))
    }

    /// Tree file followed by a single `w` line.
    pub fn to_text(&self) -> String {
        format!("{}{}\n", self.tree.to_text(), self.w)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let tree = TreeStructure::parse_lines(&mut lines)?;
        let line = lines.next().ok_or_else(|| Error::Parse("missing w line".into()))?;
        let w: f64 = line.parse().map_err(|_| Error::Parse(format!("bad w line `{line}`")))?;
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected trailing line `{extra}`")));
        }
        gaussian_model(tree, w)
    }
}

/// Additive noise variances, the diagonal of `D*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNoiseSpec {
    variances: Vec<f64>,
}

impl GaussianNoiseSpec {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if let Some(v) = variances.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("noise variance {v} is negative or not finite")));
        }
        Ok(GaussianNoiseSpec { variances })
    }

    pub fn none(d: usize) -> Self {
        GaussianNoiseSpec { variances: vec![0.0; d] }
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn d(&self) -> usize {
        self.variances.len()
    }

    /// Noise-to-signal ratios `S_i = sigma_i^2 / E[X_i^2]`.
    pub fn snr_terms(&self, m: &GaussianTreeModel) -> Vec<f64> {
        self.variances.iter().enumerate().map(|(k, v)| v / m.covariance()[(k, k)]).collect()
    }

    pub fn s_max(&self, m: &GaussianTreeModel) -> f64 {
        self.snr_terms(m).into_iter().fold(0.0, f64::max)
    }
}

/// Covariance of the observations, `Sigma* + D*`.
pub fn observed_covariance(m: &GaussianTreeModel, noise: &GaussianNoiseSpec) -> Result<DMatrix<f64>> {
    if m.d() != noise.d() {
        return Err(Error::DimensionMismatch { expected: m.d(), got: noise.d() });
    }
    let mut cov = m.covariance().clone();
    for (k, v) in noise.variances().iter().enumerate() {
        cov[(k, k)] += v;
    }
    Ok(cov)
}

/// Correlation matrix of `Sigma* + D*`.
pub fn gaussian_noisy_correlations(m: &GaussianTreeModel, noise: &GaussianNoiseSpec) -> Result<CorrelationMatrix> {
    Ok(normalize(&observed_covariance(m, noise)?))
}

/// One value per line.
pub fn parse_noise_values(text: &str) -> Result<Vec<f64>> {
    content_lines(text)
        .map(|l| l.parse::<f64>().map_err(|_| Error::Parse(format!("bad noise line `{l}`"))))
        .collect()
}

pub fn noise_values_to_text(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::{make_named_tree, NamedTree};

    fn chain(d: usize, rho: f64) -> IsingTreeModel {
        IsingTreeModel::homogeneous(make_named_tree(NamedTree::Chain, d).unwrap(), rho).unwrap()
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta_from_rho(0.0).unwrap(), 0.0);
        assert!((theta_from_rho(0.8).unwrap() - 1.0986122886681098).abs() < 1e-12);
        assert_eq!(theta_from_rho(-0.5).unwrap(), -theta_from_rho(0.5).unwrap());
        assert!(theta_from_rho(1.0).is_err());
        assert!(theta_from_rho(-1.5).is_err());
    }

    #[test]
    fn path_products() {
        let c = exact_correlations(&chain(12, 0.8));
        assert!((c.get(1, 3) - 0.64).abs() < 1e-15);
        assert_eq!(c.get(4, 5), 0.8);
        let star = IsingTreeModel::homogeneous(make_named_tree(NamedTree::Star, 6).unwrap(), 0.7).unwrap();
        assert!((exact_correlations(&star).get(3, 5) - 0.49).abs() < 1e-15);
    }

    #[test]
    fn noisy_examples() {
        let clean = exact_correlations(&chain(12, 0.8));
        let q: Vec<f64> = (1..=12).map(|i| if i % 2 == 1 { 0.2 } else { 0.0 }).collect();
        let noisy = noisy_correlations(&clean, &IsingNoiseSpec::new(q).unwrap()).unwrap();
        assert!((noisy.get(4, 6) - 0.64).abs() < 1e-12);
        assert!((noisy.get(4, 5) - 0.48).abs() < 1e-12);
        assert_eq!(noisy_correlations(&clean, &IsingNoiseSpec::none(12)).unwrap(), clean);
        let two = exact_correlations(&chain(2, 0.8));
        let both = noisy_correlations(&two, &IsingNoiseSpec::new(vec![0.2, 0.2]).unwrap()).unwrap();
        assert!((both.get(1, 2) - 0.288).abs() < 1e-12);
        assert!(noisy_correlations(&two, &IsingNoiseSpec::none(3)).is_err());
    }

    #[test]
    fn joint_examples() {
        let single = IsingTreeModel::new(TreeStructure::new(1, []).unwrap(), vec![]).unwrap();
        assert_eq!(joint_distribution(&single).unwrap(), vec![0.5, 0.5]);
        let p = joint_distribution(&chain(2, 0.5)).unwrap();
        let expect = [0.375, 0.125, 0.125, 0.375];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let big = chain(17, 0.5);
        assert!(matches!(joint_distribution(&big), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn full_randomization_decouples_node() {
        let m = chain(4, 0.9);
        let p = joint_distribution(&m).unwrap();
        let noisy = noisy_joint_distribution(&p, &IsingNoiseSpec::new_unchecked(vec![0.0, 0.5, 0.0, 0.0]).unwrap()).unwrap();
        assert!((noisy.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for j in [1, 3, 4] {
            assert!(pair_expectation(&noisy, 2, j).abs() < 1e-15);
        }
        assert!((pair_expectation(&noisy, 1, 3) - 0.81).abs() < 1e-12);
        assert_eq!(noisy_joint_distribution(&p, &IsingNoiseSpec::none(4)).unwrap(), p);
    }

    #[test]
    fn bounds_are_enforced() {
        let tree = make_named_tree(NamedTree::Chain, 3).unwrap();
        assert!(IsingTreeModel::with_bounds(tree.clone(), vec![0.5, 0.95], 0.3, 0.9).is_err());
        assert!(IsingTreeModel::with_bounds(tree.clone(), vec![0.5, -0.2], 0.3, 0.9).is_err());
        assert!(IsingTreeModel::with_bounds(tree.clone(), vec![-0.5, 0.9], 0.3, 0.9).is_ok());
        assert!(IsingTreeModel::new(tree.clone(), vec![0.0, 0.5]).is_err());
        assert!(IsingTreeModel::new(tree.clone(), vec![1.0, 0.5]).is_err());
        assert!(IsingTreeModel::new_degenerate(tree, vec![1.0, 0.5]).is_ok());
        assert!(IsingNoiseSpec::new(vec![0.5]).is_err());
        assert!(IsingNoiseSpec::new(vec![-0.1]).is_err());
    }

    #[test]
    fn gaussian_chain() {
        let tree = make_named_tree(NamedTree::Chain, 10).unwrap();
        let m = gaussian_model(tree.clone(), 0.5).unwrap();
        let prod = m.covariance() * m.precision();
        assert!((prod - DMatrix::<f64>::identity(10, 10)).abs().max() < 1e-10);
        let (_, rho_max) = m.rho_bounds();
        assert!((rho_max - 0.8).abs() < 0.05, "{rho_max}");
        for i in 1..=10 {
            assert!((m.correlation().get(i, i) - 1.0).abs() < 1e-15);
        }
        let zero = gaussian_model(tree.clone(), 0.0).unwrap();
        assert_eq!(zero.correlation(), &CorrelationMatrix::identity(10));
        assert!(matches!(gaussian_model(tree, 2.0), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn gaussian_noise_routes_agree() {
        let tree = make_named_tree(NamedTree::GaussHybrid10, 10).unwrap();
        let m = gaussian_model(tree, 0.38).unwrap();
        let vars: Vec<f64> = (1..=10).map(|i| if i % 2 == 1 { 2.0 } else { 0.0 }).collect();
        let noise = GaussianNoiseSpec::new(vars).unwrap();
        let direct = gaussian_noisy_correlations(&m, &noise).unwrap();
        let s = noise.snr_terms(&m);
        let att: Vec<f64> = s.iter().map(|v| 1.0 / (1.0 + v).sqrt()).collect();
        let routed = CorrelationMatrix::from_fn(10, |i, j| m.correlation().get(i, j) * att[i - 1] * att[j - 1]);
        assert!(direct.max_abs_diff(&routed) < 1e-12);
        let clean = gaussian_noisy_correlations(&m, &GaussianNoiseSpec::none(10)).unwrap();
        assert!(clean.max_abs_diff(m.correlation()) < 1e-15);
    }

    #[test]
    fn unit_variance_attenuation() {
        // Isolated node: Sigma_ii = 1, so variance 2 gives S = 2.
        let tree = make_named_tree(NamedTree::Chain, 2).unwrap();
        let m = gaussian_model(tree, 0.0).unwrap();
        let noise = GaussianNoiseSpec::new(vec![2.0, 0.0]).unwrap();
        let s = noise.snr_terms(&m);
        assert!((1.0 / (1.0 + s[0]).sqrt() - 0.5773502691896258).abs() < 1e-12);
    }

    #[test]
    fn model_files_round_trip() {
        let tree = make_named_tree(NamedTree::Star, 4).unwrap();
        let m = IsingTreeModel::new(tree.clone(), vec![0.5, -0.3, 0.9]).unwrap();
        assert_eq!(IsingTreeModel::from_text(&m.to_text()).unwrap(), m);
        let g = gaussian_model(tree, 0.3).unwrap();
        let back = GaussianTreeModel::from_text(&g.to_text()).unwrap();
        assert_eq!(back.w(), 0.3);
        assert_eq!(back.tree(), g.tree());
        assert_eq!(parse_noise_values(&noise_values_to_text(&[0.1, 0.0, 0.25])).unwrap(), vec![0.1, 0.0, 0.25]);
        assert!(IsingTreeModel::from_text("3\n1 2\n2 3\n1 2 0.5\n").is_err());
    }
}
