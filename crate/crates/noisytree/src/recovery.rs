//! Partial recovery of the tree from a correlation matrix: proximal sets,
//! quartet-based cluster detection, and assembly of the clusters into a tree.
//! Also the Chow-Liu baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CorrelationMatrix;
use crate::quartet::{alpha, EPS_DEN, classify_corr, Classifier, QuartetCorr, QuartetVerdict, VerdictKind};
use crate::tree_core::TreeStructure;

/// Witnesses consulted per decision when locating an attachment point.
const MAX_OUTSIDE_WITNESSES: usize = 4;
const MAX_BEYOND_WITNESSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising,
    Gaussian,
}

/// Parameters known to the learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    /// `q_max` for Ising models, `S_max` for Gaussian models.
    pub noise_bound: f64,
    pub classifier: Classifier,
    pub model_kind: ModelKind,
    /// Replaces `t2`/`h2` as the proximal threshold when set.
    pub threshold_override: Option<f64>,
}

impl RecoveryConfig {
    pub fn new(rho_min: f64, rho_max: f64, noise_bound: f64, classifier: Classifier, model_kind: ModelKind) -> Result<Self> {
        let cfg = RecoveryConfig { rho_min, rho_max, noise_bound, classifier, model_kind, threshold_override: None };
        cfg.proximal_threshold()?;
        Ok(cfg)
    }

    pub fn with_classifier(self, classifier: Classifier) -> Self {
        RecoveryConfig { classifier, ..self }
    }

    pub fn alpha(&self) -> Result<f64> {
        alpha(self.rho_max)
    }

    /// `t2` (Ising) or `h2` (Gaussian) unless overridden.
    pub fn proximal_threshold(&self) -> Result<f64> {
        let (_, second) = match self.model_kind {
            ModelKind::Ising => thresholds_ising(self.rho_min, self.rho_max, self.noise_bound)?,
            ModelKind::Gaussian => thresholds_gaussian(self.rho_min, self.rho_max, self.noise_bound)?,
        };
        match self.threshold_override {
            Some(t) if t > 0.0 => Ok(t),
            Some(t) => Err(Error::Domain(format!("threshold override {t} must be positive"))),
            None => Ok(second),
        }
    }
}

fn check_bounds(rho_min: f64, rho_max: f64) -> Result<()> {
    if !(rho_min > 0.0 && rho_min <= rho_max && rho_max < 1.0) {
        return Err(Error::Domain(format!("need 0 < rho_min <= rho_max < 1, got {rho_min}, {rho_max}")));
    }
    Ok(())
}

/// `(t1, t2)` for Ising models.
pub fn thresholds_ising(rho_min: f64, rho_max: f64, q_max: f64) -> Result<(f64, f64)> {
    check_bounds(rho_min, rho_max)?;
    if !(0.0..0.5).contains(&q_max) {
        return Err(Error::Domain(format!("q_max must lie in [0, 0.5), got {q_max}")));
    }
    let a = 1.0 - 2.0 * q_max;
    let t1 = a * a * rho_min.powi(4);
    Ok((t1, t1.min(t1 * a / rho_max)))
}

/// `(h1, h2)` for Gaussian models.
pub fn thresholds_gaussian(rho_min: f64, rho_max: f64, s_max: f64) -> Result<(f64, f64)> {
    check_bounds(rho_min, rho_max)?;
    if !(s_max >= 0.0 && s_max.is_finite()) {
        return Err(Error::Domain(format!("S_max must be non-negative, got {s_max}")));
    }
    let h1 = rho_min.powi(4) / (1.0 + s_max);
    Ok((h1, h1.min(h1 / (rho_max * (1.0 + s_max).sqrt()))))
}

/// `N(i) = { j != i : |c_ij| >= threshold / 2 }`, indexed by node (slot 0 empty).
pub fn proximal_sets(c: &CorrelationMatrix, threshold: f64) -> Vec<Vec<usize>> {
    let d = c.d();
    let mut out = vec![Vec::new(); d + 1];
    for i in 1..=d {
        out[i] = (1..=d).filter(|&j| j != i && c.get(i, j).abs() >= 0.5 * threshold).collect();
    }
    out
}

fn proximity_matrix(c: &CorrelationMatrix, threshold: f64) -> Vec<Vec<bool>> {
    let d = c.d();
    let mut prox = vec![vec![false; d + 1]; d + 1];
    for i in 1..=d {
        for j in 1..=d {
            prox[i][j] = i != j && c.get(i, j).abs() >= 0.5 * threshold;
        }
    }
    prox
}

/// Detected clusters, their representatives and the tree joining them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterView {
    /// Sorted members, clusters ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// One representative per cluster, aligned with `clusters`.
    pub representatives: Vec<usize>,
    /// Edges between representatives; empty until assembled.
    pub rep_edges: Vec<(usize, usize)>,
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn proximal_weight(c: &CorrelationMatrix, prox: &[Vec<bool>], i: usize) -> f64 {
    (1..=c.d()).filter(|&j| prox[i][j]).map(|j| c.get(i, j).abs()).sum()
}

/// Index of the node with the largest weight, lowest label on ties.
fn heaviest(c: &CorrelationMatrix, prox: &[Vec<bool>], nodes: &[usize]) -> usize {
    let mut best = nodes[0];
    let mut best_w = proximal_weight(c, prox, best);
    for &i in &nodes[1..] {
        let w = proximal_weight(c, prox, i);
        if w > best_w || (w == best_w && i < best) {
            best = i;
            best_w = w;
        }
    }
    best
}

/// Groups nodes that no admissible quartet separates.
pub fn detect_clusters<F>(c: &CorrelationMatrix, threshold: f64, classify: &F) -> ClusterView
where
    F: Fn(&QuartetCorr) -> Result<QuartetVerdict>,
{
    let d = c.d();
    let prox = proximity_matrix(c, threshold);
    let mut separated = vec![vec![false; d + 1]; d + 1];
    for i in 1..=d {
        for j in i + 1..=d {
            if !prox[i][j] {
                continue;
            }
            for k in j + 1..=d {
                if !(prox[i][k] && prox[j][k]) {
                    continue;
                }
                for l in k + 1..=d {
                    if !(prox[i][l] && prox[j][l] && prox[k][l]) {
                        continue;
                    }
                    let nodes = [i, j, k, l];
                    let Ok(v) = classify(&QuartetCorr::from_nodes(c, nodes)) else { continue };
                    if let Some(p) = v.pairing() {
                        let (x, y) = p.positions();
                        for a in x {
                            for b in y {
                                separated[nodes[a]][nodes[b]] = true;
                                separated[nodes[b]][nodes[a]] = true;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut sets = DisjointSets::new(d + 1);
    for i in 1..=d {
        for j in i + 1..=d {
            if prox[i][j] && !separated[i][j] {
                sets.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d + 1];
    for i in 1..=d {
        let r = sets.find(i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let representatives = groups.iter().map(|g| heaviest(c, &prox, g)).collect();
    ClusterView { clusters: groups, representatives, rep_edges: Vec::new() }
}

struct Assembler<'a, F> {
    c: &'a CorrelationMatrix,
    prox: Vec<Vec<bool>>,
    classify: &'a F,
    /// Other members of each representative's cluster, indexed by node.
    mates: Vec<Vec<usize>>,
}

impl<'a, F> Assembler<'a, F>
where
    F: Fn(&QuartetCorr) -> Result<QuartetVerdict>,
{
    fn verdict(&self, nodes: [usize; 4]) -> Option<QuartetVerdict> {
        (self.classify)(&QuartetCorr::from_nodes(self.c, nodes)).ok()
    }

    fn abs(&self, i: usize, j: usize) -> f64 {
        self.c.get(i, j).abs()
    }

    /// Representatives plus their cluster-mates.
    fn with_mates(&self, reps: &[usize]) -> Vec<usize> {
        reps.iter().flat_map(|&r| std::iter::once(r).chain(self.mates[r].iter().copied())).collect()
    }

    /// Edges of the tree over `reps`.
    fn build(&self, reps: &[usize]) -> Vec<(usize, usize)> {
        match reps.len() {
            0 | 1 => return Vec::new(),
            2 => return vec![(reps[0], reps[1])],
            _ => {}
        }
        let Some((split, _)) = self.best_split(reps) else {
            return self.star(reps);
        };
        let [a, b, c, d] = split;
        let mut side_a = vec![a, b];
        let mut side_b = vec![c, d];
        for &u in reps.iter().filter(|u| !split.contains(u)) {
            let votes: Vec<Option<bool>> = [c, d]
                .iter()
                .map(|&x| {
                    self.verdict([a, b, u, x]).map(|v| !v.joins(0, 1))
                })
                .collect();
            let in_a = match (votes[0], votes[1]) {
                (Some(x), Some(y)) if x == y => x,
                _ => self.abs(u, a) * self.abs(u, b) >= self.abs(u, c) * self.abs(u, d),
            };
            if in_a {
                side_a.push(u);
            } else {
                side_b.push(u);
            }
        }
        side_a.sort_unstable();
        side_b.sort_unstable();
        let beyond_a = self.with_mates(&side_b);
        let beyond_b = self.with_mates(&side_a);
        let mut edges = self.build(&side_a);
        let edges_b = self.build(&side_b);
        let x = self.attachment(&side_a, &edges, &beyond_a);
        let y = self.attachment(&side_b, &edges_b, &beyond_b);
        edges.extend(edges_b);
        edges.push((x, y));
        edges
    }

    /// Most confident non-star quartet among mutually proximal representatives.
    fn best_split(&self, reps: &[usize]) -> Option<([usize; 4], f64)> {
        let p = &self.prox;
        let n = reps.len();
        let mut best: Option<([usize; 4], f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let (ri, rj) = (reps[i], reps[j]);
                if !p[ri][rj] {
                    continue;
                }
                for k in j + 1..n {
                    let rk = reps[k];
                    if !(p[ri][rk] && p[rj][rk]) {
                        continue;
                    }
                    for l in k + 1..n {
                        let rl = reps[l];
                        if !(p[ri][rl] && p[rj][rl] && p[rk][rl]) {
                            continue;
                        }
                        let nodes = [ri, rj, rk, rl];
                        let Some(v) = self.verdict(nodes) else { continue };
                        let Some(pairing) = v.pairing() else { continue };
                        if best.is_none_or(|(_, m)| v.margin > m) {
                            let (x, y) = pairing.positions();
                            best = Some(([nodes[x[0]], nodes[x[1]], nodes[y[0]], nodes[y[1]]], v.margin));
                        }
                    }
                }
            }
        }
        best
    }

    /// Up to `k` nodes from `pool` ranked by `score`, highest first.
    fn strongest(pool: impl Iterator<Item = usize>, k: usize, score: impl Fn(usize) -> f64) -> Vec<usize> {
        let mut v: Vec<(f64, usize)> = pool.map(|x| (score(x), x)).collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        v.into_iter().take(k).map(|(_, x)| x).collect()
    }

    /// Tree over representatives whose restricted structure has no internal
    /// edge: one center adjacent to all others.
    fn star(&self, reps: &[usize]) -> Vec<(usize, usize)> {
        let n = reps.len();
        let mut end = vec![0usize; n];
        let mut mid = vec![0usize; n];
        let others = |i: usize| -> [usize; 2] {
            let r = reps[i];
            let best = Self::strongest(
                reps.iter().copied().filter(|&s| s != r),
                2,
                |s| self.abs(r, s),
            );
            [best[0], best[1]]
        };
        for i in 0..n {
            let r = reps[i];
            let [s, t] = others(i);
            for &w in &self.mates[r] {
                match self.verdict([w, r, s, t]) {
                    Some(v) if v.joins(0, 1) => end[i] += 1,
                    Some(v) if v.kind == VerdictKind::Star => mid[i] += 1,
                    _ => {}
                }
            }
            // Nodes hanging off r correlate with it more than with s or t.
            let pool = (1..=self.c.d())
                .filter(|&w| self.prox[w][r] && !reps.contains(&w) && !self.mates[r].contains(&w));
            let witnesses = Self::strongest(pool, MAX_OUTSIDE_WITNESSES, |o| {
                self.abs(o, r) / self.abs(o, s).max(self.abs(o, t)).max(EPS_DEN)
            });
            for w in witnesses {
                if let Some(v) = self.verdict([w, r, s, t]) {
                    if v.joins(0, 1) {
                        end[i] += 1;
                    }
                }
            }
        }
        let unnamed: Vec<usize> = (0..n).filter(|&i| end[i] == 0).collect();
        let center = if unnamed.len() == 1 {
            reps[unnamed[0]]
        } else {
            let score = |i: usize| mid[i] as i64 - end[i] as i64;
            let top = (0..n).map(score).max().unwrap_or(0);
            let leaders: Vec<usize> = (0..n).filter(|&i| score(i) == top).collect();
            if leaders.len() == 1 && (end.iter().any(|&e| e > 0) || mid.iter().any(|&m| m > 0)) {
                reps[leaders[0]]
            } else if n == 3 {
                self.middle_by_ratio(reps)
            } else {
                heaviest(self.c, &self.prox, reps)
            }
        };
        reps.iter().filter(|&&r| r != center).map(|&r| (center, r)).collect()
    }

    /// Middle of three as `argmax_m |c_xm c_my| / |c_xy|`.
    fn middle_by_ratio(&self, reps: &[usize]) -> usize {
        let mut best = reps[0];
        let mut best_v = f64::NEG_INFINITY;
        for (k, &m) in reps.iter().enumerate() {
            let x = reps[(k + 1) % 3];
            let y = reps[(k + 2) % 3];
            let v = self.abs(x, m) * self.abs(m, y) / self.abs(x, y);
            if v > best_v || (v == best_v && m < best) {
                best = m;
                best_v = v;
            }
        }
        best
    }

    /// Node of the tree `(nodes, edges)` at which every node of `outside` attaches.
    fn attachment(&self, nodes: &[usize], edges: &[(usize, usize)], outside: &[usize]) -> usize {
        if nodes.len() == 1 {
            return nodes[0];
        }
        let d = self.c.d();
        let mut adj = vec![Vec::new(); d + 1];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let component = |start: usize, blocked: usize| -> Vec<usize> {
            let mut seen = vec![start];
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if y != blocked && !seen.contains(&y) {
                        seen.push(y);
                        stack.push(y);
                    }
                }
            }
            seen
        };
        let witnesses = Self::strongest(outside.iter().copied(), MAX_OUTSIDE_WITNESSES, |o| {
            nodes.iter().map(|&s| self.abs(o, s)).fold(0.0, f64::max)
        });
        let mut score = vec![0.0f64; d + 1];
        for &(u, v) in edges {
            let side_u = component(u, v);
            let side_v = component(v, u);
            // Positive favors u's side.
            let mut vote = 0.0;
            let beyond = |near: usize, side: &[usize]| -> Vec<usize> {
                let pool = self.mates[near]
                    .iter()
                    .copied()
                    .chain(side.iter().copied().filter(|&s| s != near).flat_map(|s| {
                        std::iter::once(s).chain(self.mates[s].iter().copied())
                    }));
                Self::strongest(pool, MAX_BEYOND_WITNESSES, |x| self.abs(near, x))
            };
            let beyond_v = beyond(v, &side_v);
            let beyond_u = beyond(u, &side_u);
            for &o in &witnesses {
                for &x in &beyond_v {
                    match self.verdict([u, v, x, o]) {
                        Some(q) if q.joins(0, 3) => vote += 1.0,
                        Some(_) => vote -= 1.0,
                        None => {}
                    }
                }
                for &x in &beyond_u {
                    match self.verdict([v, u, x, o]) {
                        Some(q) if q.joins(0, 3) => vote -= 1.0,
                        Some(_) => vote += 1.0,
                        None => {}
                    }
                }
            }
            if vote == 0.0 {
                // Nodes hanging off the side elsewhere separate u from v
                // whenever they sit on the end the opposite side avoids.
                let inside = &self.with_mates(nodes);
                let rest = |near: usize| {
                    (1..=d).filter(move |&g| self.prox[near][g] && !inside.contains(&g) && !outside.contains(&g))
                };
                let closer = |a: usize, b: usize| move |g: usize| self.abs(a, g) / self.abs(b, g).max(EPS_DEN);
                let mut extra = Self::strongest(rest(u), MAX_BEYOND_WITNESSES, closer(u, v));
                extra.extend(Self::strongest(rest(v), MAX_BEYOND_WITNESSES, closer(v, u)));
                extra.sort_unstable();
                extra.dedup();
                for &o in &witnesses {
                    for &g in &extra {
                        if let Some(q) = self.verdict([u, v, g, o]) {
                            if q.joins(0, 3) {
                                vote += 1.0;
                            } else if q.joins(1, 3) {
                                vote -= 1.0;
                            }
                        }
                    }
                }
            }
            if vote == 0.0 {
                let reach = |side: &[usize]| {
                    side.iter().flat_map(|&s| witnesses.iter().map(move |&o| (s, o))).map(|(s, o)| self.abs(s, o)).fold(0.0, f64::max)
                };
                vote = reach(&side_u) - reach(&side_v);
            }
            let winner = if vote > 0.0 { &side_u } else { &side_v };
            for &s in winner {
                score[s] += 1.0;
            }
        }
        let mut best = nodes[0];
        for &s in nodes {
            if score[s] > score[best] || (score[s] == score[best] && s < best) {
                best = s;
            }
        }
        best
    }
}

/// Joins the detected clusters into a tree; non-representatives become
/// leaves of their representative.
pub fn assemble_tree<F>(view: &mut ClusterView, c: &CorrelationMatrix, threshold: f64, classify: &F) -> Result<TreeStructure>
where
    F: Fn(&QuartetCorr) -> Result<QuartetVerdict>,
{
    let d = c.d();
    let mut mates = vec![Vec::new(); d + 1];
    for (members, &rep) in view.clusters.iter().zip(&view.representatives) {
        mates[rep] = members.iter().copied().filter(|&m| m != rep).collect();
    }
    let asm = Assembler { c, prox: proximity_matrix(c, threshold), classify, mates };
    let mut reps = view.representatives.clone();
    reps.sort_unstable();
    view.rep_edges = asm.build(&reps);
    let mut edges = view.rep_edges.clone();
    for (members, &rep) in view.clusters.iter().zip(&view.representatives) {
        edges.extend(members.iter().filter(|&&m| m != rep).map(|&m| (rep, m)));
    }
    TreeStructure::new(d, edges).map_err(|e| Error::AssemblyAmbiguous(e.to_string()))
}

/// The full pipeline with an arbitrary quartet test.
pub fn recover_with<F>(c: &CorrelationMatrix, threshold: f64, classify: &F) -> Result<TreeStructure>
where
    F: Fn(&QuartetCorr) -> Result<QuartetVerdict>,
{
    if c.d() < 3 {
        return Err(Error::Domain(format!("recovery needs d >= 3, got {}", c.d())));
    }
    let mut view = detect_clusters(c, threshold, classify);
    assemble_tree(&mut view, c, threshold, classify)
}

/// Thresholds, proximal sets, cluster detection and assembly with the
/// configured classifier.
pub fn recover(c: &CorrelationMatrix, cfg: &RecoveryConfig) -> Result<TreeStructure> {
    let a = cfg.alpha()?;
    let classifier = cfg.classifier;
    recover_with(c, cfg.proximal_threshold()?, &|q: &QuartetCorr| classify_corr(classifier, q, a))
}

/// Maximum-weight spanning tree on `|c_ij|`; ties go to the
/// lexicographically smaller edge.
pub fn chow_liu(c: &CorrelationMatrix) -> Result<TreeStructure> {
    let d = c.d();
    if d < 2 {
        return Err(Error::Domain("Chow-Liu needs at least two nodes".into()));
    }
    let mut cand: Vec<(f64, usize, usize)> =
        (1..=d).flat_map(|i| (i + 1..=d).map(move |j| (i, j))).map(|(i, j)| (c.get(i, j).abs(), i, j)).collect();
    cand.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut sets = DisjointSets::new(d + 1);
    let edges: Vec<(usize, usize)> =
        cand.into_iter().filter(|&(_, i, j)| sets.union(i, j)).map(|(_, i, j)| (i, j)).take(d - 1).collect();
    TreeStructure::new(d, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_correlations, noisy_correlations, IsingNoiseSpec, IsingTreeModel};
    use crate::tree_core::{is_equivalent, make_named_tree, NamedTree};

    fn exact(tree: TreeStructure, rho: f64, q: Vec<f64>) -> CorrelationMatrix {
        let m = IsingTreeModel::homogeneous(tree, rho).unwrap();
        noisy_correlations(&exact_correlations(&m), &IsingNoiseSpec::new(q).unwrap()).unwrap()
    }

    fn cfg(rho_min: f64, rho_max: f64, q: f64, cls: Classifier) -> RecoveryConfig {
        RecoveryConfig::new(rho_min, rho_max, q, cls, ModelKind::Ising).unwrap()
    }

    #[test]
    fn ising_thresholds() {
        let (t1, t2) = thresholds_ising(0.6, 0.8, 0.2).unwrap();
        assert!((t1 - 0.046656).abs() < 1e-15);
        assert!((t2 - 0.034992).abs() < 1e-15);
        let (t1, t2) = thresholds_ising(0.5, 0.7, 0.0).unwrap();
        assert_eq!(t1, t2);
        assert!(thresholds_ising(0.01, 0.7, 0.1).unwrap().0 < thresholds_ising(0.02, 0.7, 0.1).unwrap().0);
        assert!(thresholds_ising(0.9, 0.7, 0.1).is_err());
        assert!(thresholds_ising(0.5, 0.7, 0.5).is_err());
    }

    #[test]
    fn gaussian_thresholds() {
        let (h1, _) = thresholds_gaussian(0.5, 0.8, 0.0).unwrap();
        assert_eq!(h1, 0.0625);
        let (h1, h2) = thresholds_gaussian(0.3, 0.8, 2.0).unwrap();
        assert!((h1 - 0.0027).abs() < 1e-15);
        assert!((h2 - 0.0027 / (0.8 * 3f64.sqrt())).abs() < 1e-15);
        assert!(h2 <= h1);
        assert!(thresholds_gaussian(0.3, 0.8, -1.0).is_err());
    }

    #[test]
    fn proximal_examples() {
        let q: Vec<f64> = (1..=12).map(|i| if i % 2 == 1 { 0.2 } else { 0.0 }).collect();
        let c = exact(make_named_tree(NamedTree::Chain, 12).unwrap(), 0.8, q);
        let (_, t2) = thresholds_ising(0.6, 0.8, 0.2).unwrap();
        assert!((0.5 * t2 - 0.017496).abs() < 1e-12);
        let sets = proximal_sets(&c, t2);
        for i in 1..=12 {
            assert_eq!(sets[i].len(), 11);
        }
        assert!(proximal_sets(&c, 3.0).iter().all(Vec::is_empty));
        let sparse = proximal_sets(&c, 0.5);
        for i in 1..=12 {
            for &j in &sparse[i] {
                assert!(sparse[j].contains(&i));
            }
        }
    }

    #[test]
    fn clusters_of_exact_small_trees() {
        let star = TreeStructure::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let c = exact(star, 0.6, vec![0.0; 4]);
        let cfg = cfg(0.6, 0.6, 0.0, Classifier::Sga);
        let a = cfg.alpha().unwrap();
        let classify = |q: &QuartetCorr| classify_corr(Classifier::Sga, q, a);
        let view = detect_clusters(&c, cfg.proximal_threshold().unwrap(), &classify);
        assert_eq!(view.clusters, vec![vec![1, 2, 3, 4]]);

        let c = exact(make_named_tree(NamedTree::Chain, 4).unwrap(), 0.6, vec![0.0; 4]);
        let view = detect_clusters(&c, cfg.proximal_threshold().unwrap(), &classify);
        assert_eq!(view.clusters, vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn recovers_hybrid_with_even_noise() {
        let tree = make_named_tree(NamedTree::Hybrid12, 12).unwrap();
        let q: Vec<f64> = (1..=12).map(|i| if i % 2 == 0 { 0.2 } else { 0.0 }).collect();
        let c = exact(tree.clone(), 0.8, q);
        for cls in [Classifier::Ka, Classifier::Sga] {
            let out = recover(&c, &cfg(0.8, 0.8, 0.2, cls)).unwrap();
            assert!(is_equivalent(&tree, &out).unwrap(), "{cls:?}: {out}");
        }
    }

    #[test]
    fn three_nodes_give_a_path() {
        let c = exact(make_named_tree(NamedTree::Chain, 3).unwrap(), 0.5, vec![0.0; 3]);
        let out = recover(&c, &cfg(0.5, 0.5, 0.0, Classifier::Ka)).unwrap();
        assert_eq!(out.leaves().len(), 2);
        assert!(recover(&CorrelationMatrix::identity(2), &cfg(0.5, 0.5, 0.0, Classifier::Ka)).is_err());
    }

    #[test]
    fn chow_liu_examples() {
        let tree = make_named_tree(NamedTree::Hybrid12, 12).unwrap();
        assert_eq!(chow_liu(&exact(tree.clone(), 0.7, vec![0.0; 12])).unwrap(), tree);
        let q: Vec<f64> = (1..=12).map(|i| if i % 2 == 1 { 0.2 } else { 0.0 }).collect();
        let chain = make_named_tree(NamedTree::Chain, 12).unwrap();
        let out = chow_liu(&exact(chain.clone(), 0.8, q)).unwrap();
        assert!(out.has_edge(4, 6));
        assert!(!is_equivalent(&chain, &out).unwrap());
        let two = CorrelationMatrix::from_fn(2, |_, _| 0.3);
        assert_eq!(chow_liu(&two).unwrap().edges(), &[(1, 2)]);
    }

    #[test]
    fn single_cluster_becomes_star_on_representative() {
        let star = make_named_tree(NamedTree::Star, 6).unwrap();
        let c = exact(star.clone(), 0.7, vec![0.1, 0.0, 0.2, 0.0, 0.3, 0.0]);
        let cfg = cfg(0.7, 0.7, 0.3, Classifier::Ka);
        let a = cfg.alpha().unwrap();
        let classify = |q: &QuartetCorr| classify_corr(Classifier::Ka, q, a);
        let t = cfg.proximal_threshold().unwrap();
        let mut view = detect_clusters(&c, t, &classify);
        assert_eq!(view.clusters.len(), 1);
        let out = assemble_tree(&mut view, &c, t, &classify).unwrap();
        assert_eq!(out.degree(view.representatives[0]), 5);
        assert!(is_equivalent(&star, &out).unwrap());
    }
}
