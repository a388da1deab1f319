//! Forward sampling, noise application and empirical correlations.
//!
//! Ising samples are stored column-wise as packed bits (a set bit is `-1`),
//! which keeps the correlation of two columns a single popcount pass.

use std::io::{Read, Write};

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{observed_covariance, CorrelationMatrix, GaussianNoiseSpec, GaussianTreeModel, IsingNoiseSpec, IsingTreeModel};

/// Independent generator for substream `stream` of master seed `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` samples of `d` spins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingSamples {
    n: usize,
    d: usize,
    cols: Vec<Vec<u64>>,
}

impl IsingSamples {
    fn words(n: usize) -> usize {
        n.div_ceil(64)
    }

    fn tail_mask(n: usize) -> u64 {
        match n % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    /// Builds from rows of `+1`/`-1` values.
    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut cols = vec![vec![0u64; Self::words(n)]; d];
        for (k, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    1 => {}
                    -1 => cols[j][k / 64] |= 1 << (k % 64),
                    other => return Err(Error::Parse(format!("Ising entry {other} is not 1 or -1"))),
                }
            }
        }
        Ok(IsingSamples { n, d, cols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Entry of sample `k` (0-based) at node `j` (1-based).
    pub fn get(&self, k: usize, j: usize) -> i8 {
        if self.cols[j - 1][k / 64] >> (k % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }
}

/// `n` real-valued samples in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSamples {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl GaussianSamples {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(GaussianSamples { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.d + j - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleMatrix {
    Ising(IsingSamples),
    Gaussian(GaussianSamples),
}

impl SampleMatrix {
    pub fn n(&self) -> usize {
        match self {
            SampleMatrix::Ising(s) => s.n(),
            SampleMatrix::Gaussian(s) => s.n(),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            SampleMatrix::Ising(s) => s.d(),
            SampleMatrix::Gaussian(s) => s.d(),
        }
    }
}

/// Word of independent bits, each set with the given law, truncated to `mask`.
fn bernoulli_word<R: Rng + ?Sized>(law: &Bernoulli, mask: u64, rng: &mut R) -> u64 {
    let mut w = 0u64;
    for b in 0..64 - mask.leading_zeros() {
        if law.sample(rng) {
            w |= 1 << b;
        }
    }
    w
}

/// Ancestral sampling rooted at node 1 in breadth-first order.
pub fn sample_ising<R: Rng + ?Sized>(m: &IsingTreeModel, n: usize, rng: &mut R) -> IsingSamples {
    let d = m.d();
    let words = IsingSamples::words(n);
    let tail = IsingSamples::tail_mask(n);
    let mask = |w: usize| if w + 1 == words { tail } else { u64::MAX };
    let mut cols = vec![vec![0u64; words]; d];
    let (order, parent) = m.tree().bfs(1);
    for w in 0..words {
        cols[0][w] = rng.random::<u64>() & mask(w);
    }
    for &u in order.iter().skip(1) {
        let p = parent[u];
        let rho = m.rho(p, u).expect("parent edge exists");
        let law = Bernoulli::new(((1.0 - rho) / 2.0).clamp(0.0, 1.0)).expect("probability in range");
        for w in 0..words {
            cols[u - 1][w] = cols[p - 1][w] ^ bernoulli_word(&law, mask(w), rng);
        }
    }
    IsingSamples { n, d, cols }
}

/// Flips column `j` of every sample independently with probability `q_j`.
pub fn apply_ising_noise<R: Rng + ?Sized>(s: &IsingSamples, noise: &IsingNoiseSpec, rng: &mut R) -> Result<IsingSamples> {
    if noise.d() != s.d {
        return Err(Error::DimensionMismatch { expected: s.d, got: noise.d() });
    }
    let words = IsingSamples::words(s.n);
    let tail = IsingSamples::tail_mask(s.n);
    let mut out = s.clone();
    for (j, &q) in noise.q().iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        let law = Bernoulli::new(q).map_err(|e| Error::Domain(e.to_string()))?;
        for w in 0..words {
            let mask = if w + 1 == words { tail } else { u64::MAX };
            out.cols[j][w] ^= bernoulli_word(&law, mask, rng);
        }
    }
    Ok(out)
}

/// `n` draws from `N(0, Sigma* + D*)` via the Cholesky factor.
pub fn sample_gaussian<R: Rng + ?Sized>(
    m: &GaussianTreeModel,
    noise: &GaussianNoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<GaussianSamples> {
    let cov = observed_covariance(m, noise)?;
    let l = cov.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    let d = m.d();
    let mut data = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    for k in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let row = &mut data[k * d..(k + 1) * d];
        for i in 0..d {
            row[i] = (0..=i).map(|j| l[(i, j)] * z[j]).sum();
        }
    }
    Ok(GaussianSamples { n, d, data })
}

pub fn ising_correlations(s: &IsingSamples) -> CorrelationMatrix {
    let n = s.n as f64;
    CorrelationMatrix::from_fn(s.d, |i, j| {
        let diff: u32 = s.cols[i - 1].iter().zip(&s.cols[j - 1]).map(|(a, b)| (a ^ b).count_ones()).sum();
        1.0 - 2.0 * diff as f64 / n
    })
}

/// Normalized inner products; with `centered` the column means are removed first.
pub fn gaussian_correlations(s: &GaussianSamples, centered: bool) -> Result<CorrelationMatrix> {
    let (n, d) = (s.n, s.d);
    let mut means = vec![0.0; d];
    if centered {
        for k in 0..n {
            for j in 0..d {
                means[j] += s.data[k * d + j];
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
    }
    let mut gram = vec![0.0; d * d];
    let mut row = vec![0.0; d];
    for k in 0..n {
        for j in 0..d {
            row[j] = s.data[k * d + j] - means[j];
        }
        for i in 0..d {
            for j in i..d {
                gram[i * d + j] += row[i] * row[j];
            }
        }
    }
    if let Some(j) = (0..d).find(|&j| !(gram[j * d + j] > 0.0)) {
        return Err(Error::ZeroVariance(j + 1));
    }
    Ok(CorrelationMatrix::from_fn(d, |i, j| {
        let (a, b) = (i - 1, j - 1);
        (gram[a * d + b] / (gram[a * d + a] * gram[b * d + b]).sqrt()).clamp(-1.0, 1.0)
    }))
}

/// Ising: average products; Gaussian: zero-mean normalized inner products.
pub fn empirical_correlations(s: &SampleMatrix) -> Result<CorrelationMatrix> {
    if s.n() == 0 {
        return Err(Error::Domain("no samples".into()));
    }
    match s {
        SampleMatrix::Ising(x) => Ok(ising_correlations(x)),
        SampleMatrix::Gaussian(x) => gaussian_correlations(x, false),
    }
}

/// One row per sample, `d` comma-separated entries, no header.
pub fn write_samples_csv<W: Write>(s: &SampleMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for k in 0..s.n() {
        let row: Vec<String> = (1..=s.d())
            .map(|j| match s {
                SampleMatrix::Ising(x) => x.get(k, j).to_string(),
                SampleMatrix::Gaussian(x) => x.get(k, j).to_string(),
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the sample CSV; `ising` selects the `1`/`-1` parser.
pub fn read_samples_csv<R: Read>(input: R, ising: bool) -> Result<SampleMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad sample entry `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if ising {
        let spins = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| match v {
                        1.0 => Ok(1i8),
                        -1.0 => Ok(-1i8),
                        v => Err(Error::Parse(format!("Ising entry {v} is not 1 or -1"))),
                    })
                    .collect::<Result<Vec<i8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleMatrix::Ising(IsingSamples::from_rows(&spins)?))
    } else {
        Ok(SampleMatrix::Gaussian(GaussianSamples::from_rows(&rows)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_correlations, gaussian_model, noisy_correlations};
    use crate::tree_core::{make_named_tree, NamedTree};

    fn chain(d: usize, rho: f64) -> IsingTreeModel {
        IsingTreeModel::homogeneous(make_named_tree(NamedTree::Chain, d).unwrap(), rho).unwrap()
    }

    #[test]
    fn perfect_correlation_gives_constant_rows() {
        let tree = make_named_tree(NamedTree::Star, 5).unwrap();
        let m = IsingTreeModel::new_degenerate(tree, vec![1.0; 4]).unwrap();
        let s = sample_ising(&m, 300, &mut substream(1, 0));
        for k in 0..300 {
            let first = s.get(k, 1);
            assert!((2..=5).all(|j| s.get(k, j) == first));
        }
    }

    #[test]
    fn marginals_and_pair_moments() {
        let m = chain(5, 0.7);
        let n = 100_000;
        let s = sample_ising(&m, n, &mut substream(2, 0));
        let tol_mean = 4.0 / (n as f64).sqrt();
        for j in 1..=5 {
            let mean: f64 = (0..n).map(|k| s.get(k, j) as f64).sum::<f64>() / n as f64;
            assert!(mean.abs() < tol_mean, "node {j}: {mean}");
        }
        let emp = ising_correlations(&s);
        let exact = exact_correlations(&m);
        assert!(emp.max_abs_diff(&exact) < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn noise_channel_rates() {
        let m = chain(4, 0.5);
        let n = 100_000;
        let s = sample_ising(&m, n, &mut substream(3, 0));
        let same = apply_ising_noise(&s, &IsingNoiseSpec::none(4), &mut substream(3, 1)).unwrap();
        assert_eq!(same, s);
        let flip = apply_ising_noise(&s, &IsingNoiseSpec::new_unchecked(vec![0.0, 1.0, 0.0, 0.0]).unwrap(), &mut substream(3, 2)).unwrap();
        assert!((0..n).all(|k| flip.get(k, 2) == -s.get(k, 2)));
        let q = [0.05, 0.2, 0.35, 0.0];
        let noisy = apply_ising_noise(&s, &IsingNoiseSpec::new(q.to_vec()).unwrap(), &mut substream(3, 3)).unwrap();
        for (j, &qj) in q.iter().enumerate() {
            let flips = (0..n).filter(|&k| noisy.get(k, j + 1) != s.get(k, j + 1)).count() as f64 / n as f64;
            let tol = 4.0 * (qj * (1.0 - qj) / n as f64).sqrt() + 1e-12;
            assert!((flips - qj).abs() <= tol, "column {}: {flips}", j + 1);
        }
        let exact = noisy_correlations(&exact_correlations(&m), &IsingNoiseSpec::new(q.to_vec()).unwrap()).unwrap();
        assert!(ising_correlations(&noisy).max_abs_diff(&exact) < 5.0 / (n as f64).sqrt());
        assert!(apply_ising_noise(&s, &IsingNoiseSpec::none(3), &mut substream(3, 4)).is_err());
    }

    #[test]
    fn samplers_are_deterministic() {
        let m = chain(6, 0.6);
        assert_eq!(sample_ising(&m, 777, &mut substream(9, 4)), sample_ising(&m, 777, &mut substream(9, 4)));
        assert_ne!(sample_ising(&m, 777, &mut substream(9, 4)), sample_ising(&m, 777, &mut substream(9, 5)));
        let g = gaussian_model(make_named_tree(NamedTree::Chain, 4).unwrap(), 0.4).unwrap();
        let noise = GaussianNoiseSpec::new(vec![1.0, 0.0, 2.0, 0.0]).unwrap();
        let a = sample_gaussian(&g, &noise, 50, &mut substream(5, 0)).unwrap();
        let b = sample_gaussian(&g, &noise, 50, &mut substream(5, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_sample_covariance() {
        let g = gaussian_model(make_named_tree(NamedTree::Chain, 5).unwrap(), 0.5).unwrap();
        let n = 100_000;
        let s = sample_gaussian(&g, &GaussianNoiseSpec::none(5), n, &mut substream(6, 0)).unwrap();
        for i in 1..=5 {
            for j in 1..=5 {
                let cov: f64 = (0..n).map(|k| s.get(k, i) * s.get(k, j)).sum::<f64>() / n as f64;
                assert!((cov - g.covariance()[(i - 1, j - 1)]).abs() < 0.05);
            }
        }
        let indep = gaussian_model(make_named_tree(NamedTree::Chain, 5).unwrap(), 0.0).unwrap();
        let s = sample_gaussian(&indep, &GaussianNoiseSpec::none(5), n, &mut substream(6, 1)).unwrap();
        let c = gaussian_correlations(&s, false).unwrap();
        assert!(c.max_abs_diff(&CorrelationMatrix::identity(5)) < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn empirical_examples() {
        let s = IsingSamples::from_rows(&[vec![1, 1], vec![1, -1], vec![-1, -1]]).unwrap();
        assert!((ising_correlations(&s).get(1, 2) - 1.0 / 3.0).abs() < 1e-15);
        let one = IsingSamples::from_rows(&[vec![1, 1, 1]]).unwrap();
        assert!(ising_correlations(&one).max_abs_diff(&CorrelationMatrix::from_fn(3, |_, _| 1.0)) == 0.0);
        let g = GaussianSamples::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(gaussian_correlations(&g, false), Err(Error::ZeroVariance(2)));
        let g = GaussianSamples::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0], vec![-1.0, 0.5]]).unwrap();
        let centered = gaussian_correlations(&g, true).unwrap();
        assert!((centered.get(1, 2) - 0.32732683535398854).abs() < 1e-12);
    }

    #[test]
    fn tail_bits_stay_clear() {
        let m = chain(3, 0.1);
        let s = sample_ising(&m, 70, &mut substream(8, 0));
        let noisy = apply_ising_noise(&s, &IsingNoiseSpec::new(vec![0.4; 3]).unwrap(), &mut substream(8, 1)).unwrap();
        for col in &noisy.cols {
            assert_eq!(col[1] >> 6, 0);
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = chain(4, 0.5);
        let s = SampleMatrix::Ising(sample_ising(&m, 20, &mut substream(4, 0)));
        let mut buf = Vec::new();
        write_samples_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().all(|l| l.split(',').all(|t| t == "1" || t == "-1")));
        assert_eq!(read_samples_csv(&buf[..], true).unwrap(), s);
        assert!(read_samples_csv(&b"1,0\n"[..], true).is_err());
        let g = read_samples_csv(&b"0.5,-1.25\n2,3\n"[..], false).unwrap();
        assert_eq!(g.n(), 2);
    }
}
