use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use noisytree::harness::{preset, run_experiment, ExperimentSpec, PRESETS};
use noisytree::model::{parse_noise_values, GaussianNoiseSpec, GaussianTreeModel, IsingNoiseSpec, IsingTreeModel};
use noisytree::quartet::Classifier;
use noisytree::recovery::{chow_liu, recover, ModelKind, RecoveryConfig};
use noisytree::sim::{apply_ising_noise, empirical_correlations, read_samples_csv, sample_gaussian, sample_ising, substream, write_samples_csv, SampleMatrix};
use noisytree::theory::{bounds, exponent_curves, parse_grid, write_exponent_csv, ExponentScenario};

#[derive(Parser)]
#[command(name = "noisytree", version, about = "Learn tree-structured models from noisy samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ka,
    Sga,
    Cl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ising,
    Gaussian,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a tree from a sample CSV and write it as a tree file.
    Recover {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        rho_min: Option<f64>,
        #[arg(long)]
        rho_max: Option<f64>,
        /// Largest crossover probability (Ising) or noise-to-signal ratio S_max (Gaussian).
        #[arg(long)]
        qmax: Option<f64>,
        #[arg(long, value_enum)]
        classifier: Method,
        #[arg(long, value_enum, default_value = "ising")]
        model: Kind,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw noisy samples from a model file.
    Sample {
        /// Ising: tree then `i j rho` lines. Gaussian: tree then `w`.
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long, value_enum, default_value = "ising")]
        model: Kind,
        /// One value per node: crossover probabilities or noise variances.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the sample-complexity bounds and the symmetric KL term.
    Bounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        rho_min: f64,
        #[arg(long)]
        rho_max: f64,
        #[arg(long, default_value_t = 0.0)]
        qmax: f64,
    },
    /// Sweep the KA and SGA error exponents of a 4-node scenario.
    Exponent {
        /// chain_vs_rho, chain_vs_qmax, star_vs_rho or star_vs_qmax.
        #[arg(long)]
        scenario: String,
        /// `a,b,c` or `start:stop:step`; defaults to the scenario's grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment from a preset or a JSON spec.
    Experiment {
        #[arg(long, conflicts_with = "spec", required_unless_present_any = ["spec", "list"])]
        preset: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated sample counts.
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the resolved spec as JSON instead of running it.
        #[arg(long)]
        dump_spec: bool,
        /// List the preset names.
        #[arg(long)]
        list: bool,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Recover { samples, rho_min, rho_max, qmax, classifier, model, out } => {
            let file = File::open(&samples).with_context(|| format!("opening {}", samples.display()))?;
            let s = read_samples_csv(file, matches!(model, Kind::Ising))?;
            let c = empirical_correlations(&s)?;
            let tree = match classifier {
                Method::Cl => chow_liu(&c)?,
                Method::Ka | Method::Sga => {
                    let (Some(lo), Some(hi), Some(q)) = (rho_min, rho_max, qmax) else {
                        bail!("--rho-min, --rho-max and --qmax are required for ka and sga");
                    };
                    let cls = if matches!(classifier, Method::Ka) { Classifier::Ka } else { Classifier::Sga };
                    let kind = if matches!(model, Kind::Ising) { ModelKind::Ising } else { ModelKind::Gaussian };
                    recover(&c, &RecoveryConfig::new(lo, hi, q, cls, kind)?)?
                }
            };
            let mut w = output(out.as_deref())?;
            w.write_all(tree.to_text().as_bytes())?;
            w.flush()?;
        }
        Command::Sample { model_file, model, noise, n, seed, out } => {
            let text = read(&model_file)?;
            let values = noise.map(|p| read(&p).and_then(|t| Ok(parse_noise_values(&t)?))).transpose()?;
            let mut rng = substream(seed, 0);
            let s = match model {
                Kind::Ising => {
                    let m = IsingTreeModel::from_text(&text)?;
                    let q = values.map(IsingNoiseSpec::new).transpose()?.unwrap_or_else(|| IsingNoiseSpec::none(m.d()));
                    let clean = sample_ising(&m, n, &mut rng);
                    SampleMatrix::Ising(apply_ising_noise(&clean, &q, &mut rng)?)
                }
                Kind::Gaussian => {
                    let m = GaussianTreeModel::from_text(&text)?;
                    let v = values.map(GaussianNoiseSpec::new).transpose()?.unwrap_or_else(|| GaussianNoiseSpec::none(m.d()));
                    SampleMatrix::Gaussian(sample_gaussian(&m, &v, n, &mut rng)?)
                }
            };
            write_samples_csv(&s, output(out.as_deref())?)?;
        }
        Command::Bounds { d, tau, rho_min, rho_max, qmax } => {
            let b = bounds(d, tau, rho_min, rho_max, qmax)?;
            match b.necessary {
                Some(v) => println!("necessary_samples {v}"),
                None => println!("necessary_samples undefined (needs d > 32)"),
            }
            println!("sufficient_samples_ka {}", b.sufficient_ka);
            println!("sufficient_samples_improved {}", b.sufficient_improved);
            println!("symmetric_kl {}", b.symmetric_kl);
        }
        Command::Exponent { scenario, grid, out } => {
            let scenario: ExponentScenario = scenario.parse()?;
            let grid = match grid {
                Some(g) => parse_grid(&g)?,
                None => scenario.default_grid(),
            };
            let rows = exponent_curves(scenario, &grid)?;
            write_exponent_csv(scenario, &rows, output(out.as_deref())?)?;
        }
        Command::Experiment { preset: name, spec, trials, n_grid, seed, out, dump_spec, list } => {
            if list {
                PRESETS.iter().for_each(|p| println!("{p}"));
                return Ok(());
            }
            let mut s = match (name, spec) {
                (Some(n), _) => preset(&n)?,
                (None, Some(p)) => ExperimentSpec::from_json(&read(&p)?)?,
                (None, None) => bail!("give --preset or --spec"),
            };
            if let Some(t) = trials {
                s.trials = t;
            }
            if let Some(g) = n_grid {
                s.n_grid = g;
            }
            if let Some(v) = seed {
                s.seed = v;
            }
            s.validate()?;
            if dump_spec {
                println!("{}", s.to_json());
                return Ok(());
            }
            run_experiment(&s)?.write_csv(output(out.as_deref())?)?;
        }
    }
    Ok(())
}
