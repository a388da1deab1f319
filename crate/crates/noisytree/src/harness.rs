//! Monte Carlo experiments: paired trials of the KA, SGA and Chow-Liu
//! learners, preset catalog, CSV output and family aggregation.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gaussian_model, GaussianNoiseSpec, GaussianTreeModel, IsingNoiseSpec, IsingTreeModel};
use crate::quartet::Classifier;
use crate::recovery::{chow_liu, recover, ModelKind, RecoveryConfig};
use crate::sim::{apply_ising_noise, gaussian_correlations, ising_correlations, sample_gaussian, sample_ising, substream};
use crate::tree_core::{all_labeled_trees, is_equivalent, make_named_tree, NamedTree, TreeStructure};

pub const DEFAULT_TRIALS: usize = 2000;
pub const DEFAULT_SEED: u64 = 2021;
/// Largest `d` for the `all_chains` and `all_stars` families.
pub const FAMILY_MAX_D: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "KA", alias = "ka")]
    Ka,
    #[serde(rename = "SGA", alias = "sga")]
    Sga,
    #[serde(rename = "CL", alias = "cl")]
    Cl,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Ka, Estimator::Sga, Estimator::Cl];
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Ka => "KA",
            Estimator::Sga => "SGA",
            Estimator::Cl => "CL",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ka" => Ok(Estimator::Ka),
            "sga" => Ok(Estimator::Sga),
            "cl" => Ok(Estimator::Cl),
            _ => Err(Error::Parse(format!("unknown estimator `{s}`"))),
        }
    }
}

/// Which trees an experiment runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StructureSpec {
    Named { tree: NamedTree, d: usize },
    Edges { d: usize, edges: Vec<(usize, usize)> },
    /// Every labeled chain on `d` nodes.
    AllChains { d: usize },
    /// Every labeled star on `d` nodes.
    AllStars { d: usize },
}

impl StructureSpec {
    pub fn d(&self) -> usize {
        match *self {
            StructureSpec::Named { d, .. }
            | StructureSpec::Edges { d, .. }
            | StructureSpec::AllChains { d }
            | StructureSpec::AllStars { d } => d,
        }
    }

    pub fn trees(&self) -> Result<Vec<TreeStructure>> {
        match self {
            StructureSpec::Named { tree, d } => Ok(vec![make_named_tree(*tree, *d)?]),
            StructureSpec::Edges { d, edges } => Ok(vec![TreeStructure::new(*d, edges.iter().copied())?]),
            StructureSpec::AllChains { d } | StructureSpec::AllStars { d } => {
                let d = *d;
                if d > FAMILY_MAX_D {
                    return Err(Error::SizeGuard { d, max: FAMILY_MAX_D });
                }
                if d < 3 {
                    return Err(Error::InvalidShape(format!("families need d >= 3, got {d}")));
                }
                let chains = matches!(self, StructureSpec::AllChains { .. });
                let keep = |t: &TreeStructure| {
                    let top = (1..=d).map(|i| t.degree(i)).max().unwrap_or(0);
                    if chains { top <= 2 } else { top == d - 1 }
                };
                Ok(all_labeled_trees(d).into_iter().filter(keep).collect())
            }
        }
    }
}

/// The generating model. Homogeneous models carry one or more edge
/// parameters and are run once per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Ising { structure: StructureSpec, rho: Vec<f64> },
    Gaussian { structure: StructureSpec, w: Vec<f64> },
    /// An Ising model file: the tree followed by `i j rho` lines.
    IsingFile { path: PathBuf },
    /// A Gaussian model file: the tree followed by `w`.
    GaussianFile { path: PathBuf },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Ising { .. } | ModelSpec::IsingFile { .. } => ModelKind::Ising,
            ModelSpec::Gaussian { .. } | ModelSpec::GaussianFile { .. } => ModelKind::Gaussian,
        }
    }
}

/// Per-node noise: crossover probabilities for Ising models, variances for
/// Gaussian models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum NoisePattern {
    None,
    Odd { q: f64 },
    Even { q: f64 },
    Custom { values: Vec<f64> },
}

impl NoisePattern {
    pub fn values(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            NoisePattern::None => Ok(vec![0.0; d]),
            NoisePattern::Odd { q } => Ok((1..=d).map(|i| if i % 2 == 1 { *q } else { 0.0 }).collect()),
            NoisePattern::Even { q } => Ok((1..=d).map(|i| if i % 2 == 0 { *q } else { 0.0 }).collect()),
            NoisePattern::Custom { values } if values.len() == d => Ok(values.clone()),
            NoisePattern::Custom { values } => Err(Error::DimensionMismatch { expected: d, got: values.len() }),
        }
    }
}

impl fmt::Display for NoisePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoisePattern::None => f.write_str("none"),
            NoisePattern::Odd { q } => write!(f, "odd({q})"),
            NoisePattern::Even { q } => write!(f, "even({q})"),
            NoisePattern::Custom { values } => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "custom({})", parts.join(" "))
            }
        }
    }
}

/// Parameters handed to KA and SGA. Unset fields are read off the model:
/// the extreme edge correlations, and `q_max` or `S_max`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerBounds {
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub noise_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub model: ModelSpec,
    pub noise_pattern: NoisePattern,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    #[serde(default)]
    pub learner: LearnerBounds,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("n_grid must be nonempty, positive and strictly ascending".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Domain("no estimators requested".into()));
        }
        if let ModelSpec::Ising { rho: p, structure } | ModelSpec::Gaussian { w: p, structure } = &self.model {
            if p.is_empty() {
                return Err(Error::Domain("no model parameters given".into()));
            }
            self.noise_pattern.values(structure.d())?;
        }
        Ok(())
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: String,
    /// Edge list, `i-j` separated by spaces.
    pub structure: String,
    pub d: usize,
    pub rho_or_w: f64,
    pub noise_pattern: String,
    pub n: usize,
    pub estimator: Estimator,
    pub trials: usize,
    pub errors: usize,
    pub err_prob: f64,
    pub stderr: f64,
}

impl ResultRow {
    pub fn combined_stderr(&self, other: &ResultRow) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    /// The row for one estimator at one `n`, taking the first structure and parameter.
    pub fn row(&self, estimator: Estimator, n: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }

    /// The rows of one estimator, in grid order.
    pub fn series(&self, estimator: Estimator) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.estimator == estimator).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(ExperimentResult { rows })
    }
}

pub const CSV_HEADER: [&str; 11] =
    ["experiment_id", "structure", "d", "rho_or_w", "noise_pattern", "n", "estimator", "trials", "errors", "err_prob", "stderr"];

enum Generator {
    Ising(IsingTreeModel, IsingNoiseSpec),
    Gaussian(GaussianTreeModel, GaussianNoiseSpec),
}

impl Generator {
    fn tree(&self) -> &TreeStructure {
        match self {
            Generator::Ising(m, _) => m.tree(),
            Generator::Gaussian(m, _) => m.tree(),
        }
    }

    fn config(&self, learner: &LearnerBounds) -> Result<RecoveryConfig> {
        let ((lo, hi), noise, kind) = match self {
            Generator::Ising(m, q) => (m.rho_bounds(), q.q_max(), ModelKind::Ising),
            Generator::Gaussian(m, v) => (m.rho_bounds(), v.s_max(m), ModelKind::Gaussian),
        };
        RecoveryConfig::new(
            learner.rho_min.unwrap_or(lo),
            learner.rho_max.unwrap_or(hi),
            learner.noise_bound.unwrap_or(noise),
            Classifier::Sga,
            kind,
        )
    }

    fn correlations(&self, n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Result<crate::CorrelationMatrix> {
        match self {
            Generator::Ising(m, q) => Ok(ising_correlations(&apply_ising_noise(&sample_ising(m, n, rng), q, rng)?)),
            Generator::Gaussian(m, v) => gaussian_correlations(&sample_gaussian(m, v, n, rng)?, false),
        }
    }
}

struct Setting {
    generator: Generator,
    param: f64,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn settings(spec: &ExperimentSpec) -> Result<Vec<Setting>> {
    let mut out = Vec::new();
    match &spec.model {
        ModelSpec::Ising { structure, rho } => {
            for tree in structure.trees()? {
                for &r in rho {
                    let q = IsingNoiseSpec::new(spec.noise_pattern.values(tree.d())?)?;
                    let m = IsingTreeModel::homogeneous(tree.clone(), r)?;
                    out.push(Setting { generator: Generator::Ising(m, q), param: r });
                }
            }
        }
        ModelSpec::Gaussian { structure, w } => {
            for tree in structure.trees()? {
                for &wv in w {
                    let v = GaussianNoiseSpec::new(spec.noise_pattern.values(tree.d())?)?;
                    let m = gaussian_model(tree.clone(), wv)?;
                    out.push(Setting { generator: Generator::Gaussian(m, v), param: wv });
                }
            }
        }
        ModelSpec::IsingFile { path } => {
            let m = IsingTreeModel::from_text(&read_file(path)?)?;
            let q = IsingNoiseSpec::new(spec.noise_pattern.values(m.d())?)?;
            let param = m.rho_bounds().0;
            out.push(Setting { generator: Generator::Ising(m, q), param });
        }
        ModelSpec::GaussianFile { path } => {
            let m = GaussianTreeModel::from_text(&read_file(path)?)?;
            let v = GaussianNoiseSpec::new(spec.noise_pattern.values(m.d())?)?;
            let param = m.w();
            out.push(Setting { generator: Generator::Gaussian(m, v), param });
        }
    }
    Ok(out)
}

fn structure_label(t: &TreeStructure) -> String {
    t.edges().iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" ")
}

fn stream_id(setting: usize, grid_point: usize, trial: usize) -> u64 {
    ((setting as u64) << 48) | ((grid_point as u64) << 32) | trial as u64
}

/// Runs every (structure, parameter, n) cell of the experiment. Within a trial all
/// estimators see the same correlation matrix; a learner that returns an
/// error is scored as wrong.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    if spec.trials > u32::MAX as usize || spec.n_grid.len() > u16::MAX as usize {
        return Err(Error::Domain("trial count or grid too large for the stream layout".into()));
    }
    let settings = settings(spec)?;
    let mut estimators = spec.estimators.clone();
    estimators.sort();
    estimators.dedup();
    let noise_label = spec.noise_pattern.to_string();
    let mut rows = Vec::new();
    for (si, setting) in settings.iter().enumerate() {
        let truth = setting.generator.tree();
        let cfg = setting.generator.config(&spec.learner)?;
        for (gi, &n) in spec.n_grid.iter().enumerate() {
            let run = |trial: usize| -> Result<Vec<usize>> {
                let mut rng = substream(spec.seed, stream_id(si, gi, trial));
                let c = setting.generator.correlations(n, &mut rng)?;
                estimators
                    .iter()
                    .map(|e| {
                        let est = match e {
                            Estimator::Ka => recover(&c, &cfg.with_classifier(Classifier::Ka)),
                            Estimator::Sga => recover(&c, &cfg.with_classifier(Classifier::Sga)),
                            Estimator::Cl => chow_liu(&c),
                        };
                        Ok(match est {
                            Ok(t) => usize::from(!is_equivalent(truth, &t)?),
                            Err(_) => 1,
                        })
                    })
                    .collect()
            };
            let counts = (0..spec.trials).into_par_iter().map(run).try_reduce(
                || vec![0; estimators.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?;
            for (e, errors) in estimators.iter().zip(counts) {
                let p = errors as f64 / spec.trials as f64;
                rows.push(ResultRow {
                    experiment_id: spec.id.clone(),
                    structure: structure_label(truth),
                    d: truth.d(),
                    rho_or_w: setting.param,
                    noise_pattern: noise_label.clone(),
                    n,
                    estimator: *e,
                    trials: spec.trials,
                    errors,
                    err_prob: p,
                    stderr: (p * (1.0 - p) / spec.trials as f64).sqrt(),
                });
            }
        }
    }
    Ok(ExperimentResult { rows })
}

/// `points` integers spaced evenly in `log n` between `lo` and `hi`.
pub fn log_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    if points <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut g: Vec<usize> =
        (0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp().round() as usize).collect();
    g.dedup();
    g
}

pub const PRESETS: [&str; 17] = [
    "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b", "fig5c", "fig5d", "fig6a", "fig6b", "appH_4chain",
    "appH_4star", "gauss_fig9", "gauss_fig10", "gauss_fig11", "gauss_fig9_noiseless", "gauss_fig11_noiseless",
];

/// One-line description of a preset.
pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig4a" => "12-node chain, rho 0.8, noiseless",
        "fig4b" => "12-node chain, rho 0.8, q 0.2 on odd nodes",
        "fig4c" => "12-node chain, rho 0.6, noiseless",
        "fig4d" => "12-node chain, rho 0.6, q 0.2 on odd nodes",
        "fig5a" => "12-node hybrid, rho 0.8, noiseless",
        "fig5b" => "12-node hybrid, rho 0.8, q 0.2 on even nodes",
        "fig5c" => "12-node hybrid, rho 0.6, noiseless",
        "fig5d" => "12-node hybrid, rho 0.6, q 0.2 on even nodes",
        "fig6a" => "12-node star, rho 0.6, noiseless",
        "fig6b" => "12-node star, rho 0.6, q 0.2 on odd nodes",
        "appH_4chain" => "all 12 labeled 4-node chains, rho 0.4 and 0.8, noiseless",
        "appH_4star" => "all 4 labeled 4-node stars, rho 0.6, noiseless",
        "gauss_fig9" => "Gaussian 10-node chain, w 0.5, variance 2 on odd nodes",
        "gauss_fig10" => "Gaussian 10-node hybrid, w 0.38, variance 2 on odd nodes",
        "gauss_fig11" => "Gaussian 10-node star, w 0.325, variance 2 on odd nodes",
        "gauss_fig9_noiseless" => "Gaussian 10-node chain, w 0.5, noiseless",
        "gauss_fig11_noiseless" => "Gaussian 10-node star, w 0.325, noiseless",
        _ => return None,
    })
}

/// A catalog entry with desk-scale defaults.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let ising = |tree: NamedTree, rho: f64| ModelSpec::Ising { structure: StructureSpec::Named { tree, d: 12 }, rho: vec![rho] };
    let gauss = |tree: NamedTree, w: f64| ModelSpec::Gaussian { structure: StructureSpec::Named { tree, d: 10 }, w: vec![w] };
    let odd = NoisePattern::Odd { q: 0.2 };
    let even = NoisePattern::Even { q: 0.2 };
    let var2 = NoisePattern::Odd { q: 2.0 };
    let none = NoisePattern::None;
    let (model, noise, n_grid) = match name {
        "fig4a" => (ising(NamedTree::Chain, 0.8), none, log_grid(100, 3200, 6)),
        "fig4b" => (ising(NamedTree::Chain, 0.8), odd, log_grid(500, 16000, 6)),
        "fig4c" => (ising(NamedTree::Chain, 0.6), none, log_grid(250, 8000, 6)),
        "fig4d" => (ising(NamedTree::Chain, 0.6), odd, log_grid(500, 32000, 7)),
        "fig5a" => (ising(NamedTree::Hybrid12, 0.8), none, log_grid(100, 3200, 6)),
        "fig5b" => (ising(NamedTree::Hybrid12, 0.8), even, log_grid(500, 8000, 5)),
        "fig5c" => (ising(NamedTree::Hybrid12, 0.6), none, log_grid(125, 4000, 6)),
        "fig5d" => (ising(NamedTree::Hybrid12, 0.6), even, log_grid(1000, 32000, 6)),
        "fig6a" => (ising(NamedTree::Star, 0.6), none, log_grid(100, 1600, 5)),
        "fig6b" => (ising(NamedTree::Star, 0.6), odd, log_grid(500, 8000, 5)),
        "appH_4chain" => (
            ModelSpec::Ising { structure: StructureSpec::AllChains { d: 4 }, rho: vec![0.4, 0.8] },
            none,
            log_grid(50, 1600, 6),
        ),
        "appH_4star" => (
            ModelSpec::Ising { structure: StructureSpec::AllStars { d: 4 }, rho: vec![0.6] },
            none,
            log_grid(50, 1600, 6),
        ),
        "gauss_fig9" => (gauss(NamedTree::Chain, 0.5), var2, log_grid(250, 8000, 6)),
        "gauss_fig10" => (gauss(NamedTree::GaussHybrid10, 0.38), var2, log_grid(250, 8000, 6)),
        "gauss_fig11" => (gauss(NamedTree::Star, 0.325), var2, log_grid(125, 2000, 5)),
        "gauss_fig9_noiseless" => (gauss(NamedTree::Chain, 0.5), none, log_grid(125, 4000, 6)),
        "gauss_fig11_noiseless" => (gauss(NamedTree::Star, 0.325), none, log_grid(50, 800, 5)),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(ExperimentSpec {
        id: name.to_string(),
        model,
        noise_pattern: noise,
        n_grid,
        trials: DEFAULT_TRIALS,
        estimators: Estimator::ALL.to_vec(),
        seed: DEFAULT_SEED,
        learner: LearnerBounds::default(),
    })
}

/// Mean and spread of the error probability across a structure family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPoint {
    pub estimator: Estimator,
    pub rho_or_w: f64,
    pub n: usize,
    pub structures: usize,
    pub mean: f64,
    /// Population standard deviation over structures.
    pub stddev: f64,
}

/// Groups rows by (estimator, parameter) and summarizes each `n` over the
/// structures in the group. Every structure in a group must cover the same
/// `n` values.
pub fn aggregate_family(rows: &[ResultRow]) -> Result<Vec<FamilyPoint>> {
    use std::collections::BTreeMap;
    type Cell = Vec<(String, BTreeMap<usize, f64>)>;
    let mut groups: BTreeMap<(Estimator, u64), Cell> = BTreeMap::new();
    for r in rows {
        let cell = groups.entry((r.estimator, r.rho_or_w.to_bits())).or_default();
        match cell.iter_mut().find(|(s, m)| *s == r.structure && !m.contains_key(&r.n)) {
            Some((_, m)) => {
                m.insert(r.n, r.err_prob);
            }
            None => cell.push((r.structure.clone(), BTreeMap::from([(r.n, r.err_prob)]))),
        }
    }
    let mut out = Vec::new();
    for ((estimator, bits), structs) in groups {
        let mut grids = structs.iter().map(|(_, m)| m.keys().copied().collect::<Vec<_>>());
        let grid = grids.next().unwrap_or_default();
        if grids.any(|g| g != grid) {
            return Err(Error::GridMismatch);
        }
        for n in grid {
            let vals: Vec<f64> = structs.iter().map(|(_, m)| m[&n]).collect();
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
            out.push(FamilyPoint { estimator, rho_or_w: f64::from_bits(bits), n, structures: vals.len(), mean, stddev: var.sqrt() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ModelSpec, noise: NoisePattern, n_grid: Vec<usize>, trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            id: "t".into(),
            model,
            noise_pattern: noise,
            n_grid,
            trials,
            estimators: Estimator::ALL.to_vec(),
            seed: 7,
            learner: LearnerBounds::default(),
        }
    }

    fn row(structure: &str, n: usize, p: f64) -> ResultRow {
        ResultRow {
            experiment_id: "x".into(),
            structure: structure.into(),
            d: 4,
            rho_or_w: 0.4,
            noise_pattern: "none".into(),
            n,
            estimator: Estimator::Ka,
            trials: 10,
            errors: (p * 10.0) as usize,
            err_prob: p,
            stderr: 0.0,
        }
    }

    #[test]
    fn preset_catalog() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            s.validate().unwrap();
            assert!(preset_description(name).is_some());
            assert_eq!(s.trials, DEFAULT_TRIALS);
        }
        assert_eq!(preset("fig6b").unwrap().noise_pattern, NoisePattern::Odd { q: 0.2 });
        assert_eq!(preset("fig6b").unwrap().noise_pattern.values(12).unwrap()[..3], [0.2, 0.0, 0.2]);
        assert_eq!(preset("fig5b").unwrap().noise_pattern.values(12).unwrap()[..3], [0.0, 0.2, 0.0]);
        assert_eq!(preset("fig4a").unwrap().noise_pattern, NoisePattern::None);
        let g = preset("gauss_fig9").unwrap();
        assert_eq!(
            g.model,
            ModelSpec::Gaussian { structure: StructureSpec::Named { tree: NamedTree::Chain, d: 10 }, w: vec![0.5] }
        );
        assert_eq!(g.noise_pattern.values(10).unwrap(), [2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0]);
        assert_eq!(preset("fig7"), Err(Error::UnknownPreset("fig7".into())));
    }

    #[test]
    fn families() {
        assert_eq!(StructureSpec::AllChains { d: 4 }.trees().unwrap().len(), 12);
        assert_eq!(StructureSpec::AllStars { d: 4 }.trees().unwrap().len(), 4);
        assert_eq!(StructureSpec::AllChains { d: 5 }.trees().unwrap().len(), 60);
        assert!(StructureSpec::AllStars { d: 9 }.trees().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(log_grid(100, 10000, 3), [100, 1000, 10000]);
        assert_eq!(log_grid(5, 5, 4), [5]);
        let g = log_grid(500, 16000, 6);
        assert_eq!((g[0], g[5], g.len()), (500, 16000, 6));
    }

    #[test]
    fn spec_validation() {
        let mut s = preset("fig4a").unwrap();
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = preset("fig4a").unwrap();
        s.n_grid = vec![10, 10];
        assert!(s.validate().is_err());
        let mut s = preset("fig4a").unwrap();
        s.noise_pattern = NoisePattern::Custom { values: vec![0.1; 11] };
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        for name in ["fig4b", "appH_4chain", "gauss_fig10"] {
            let s = preset(name).unwrap();
            assert_eq!(ExperimentSpec::from_json(&s.to_json()).unwrap(), s);
        }
        let text = r#"{"id":"mine","model":{"kind":"ising","structure":{"family":"edges","d":4,"edges":[[1,2],[2,3],[3,4]]},"rho":[0.5]},
            "noise_pattern":{"pattern":"custom","values":[0,0.1,0,0.1]},"n_grid":[100,200],"trials":5,"estimators":["ka","SGA"],"seed":3}"#;
        let s = ExperimentSpec::from_json(text).unwrap();
        assert_eq!(s.estimators, [Estimator::Ka, Estimator::Sga]);
        assert_eq!(s.learner, LearnerBounds::default());
        assert!(ExperimentSpec::from_json("{}").is_err());
    }

    #[test]
    fn large_n_is_error_free() {
        let s = small(
            ModelSpec::Ising { structure: StructureSpec::Named { tree: NamedTree::Chain, d: 12 }, rho: vec![0.8] },
            NoisePattern::None,
            vec![1_000_000],
            1,
        );
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.errors == 0), "{r:?}");
    }

    #[test]
    fn gaussian_runs_and_tiny_n_fails() {
        let s = small(
            ModelSpec::Gaussian { structure: StructureSpec::Named { tree: NamedTree::Chain, d: 6 }, w: vec![0.5] },
            NoisePattern::Odd { q: 2.0 },
            vec![3, 200_000],
            4,
        );
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.row(Estimator::Sga, 200_000).unwrap().errors, 0);
        assert!(r.rows.iter().all(|row| row.errors <= row.trials));
    }

    #[test]
    fn csv_layout() {
        let mut s = preset("appH_4star").unwrap();
        s.trials = 20;
        s.n_grid = vec![50, 100];
        let r = run_experiment(&s).unwrap();
        let text = r.to_csv_string();
        assert!(!text.contains('\r'));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), 4 * 2 * 3);
        assert_eq!(ExperimentResult::read_csv(text.as_bytes()).unwrap(), r);
        assert_eq!(ExperimentResult::default().to_csv_string().trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn aggregation() {
        let one = aggregate_family(&[row("a", 10, 0.3), row("a", 20, 0.1)]).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one.iter().all(|p| p.stddev == 0.0));
        let twin = aggregate_family(&[row("a", 10, 0.3), row("a", 10, 0.3)]).unwrap();
        assert_eq!((twin[0].mean, twin[0].stddev, twin[0].structures), (0.3, 0.0, 2));
        let spread = aggregate_family(&[row("a", 10, 0.2), row("b", 10, 0.4)]).unwrap();
        assert!((spread[0].mean - 0.3).abs() < 1e-15 && (spread[0].stddev - 0.1).abs() < 1e-15);
        assert_eq!(aggregate_family(&[row("a", 10, 0.2), row("b", 20, 0.4)]), Err(Error::GridMismatch));
    }
}
