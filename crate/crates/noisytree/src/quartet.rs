//! Star / non-star classification of four nodes from their pairwise
//! correlations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CorrelationMatrix;

/// Entries below this magnitude make the ratio tests meaningless.
pub const EPS_DEN: f64 = 1e-12;

/// The three ways to split positions `1..4` into two pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// `{1,2 | 3,4}`
    P12,
    /// `{1,3 | 2,4}`
    P13,
    /// `{1,4 | 2,3}`
    P14,
}

impl Pairing {
    /// Position of the node paired with position 1 (2, 3 or 4).
    pub fn partner_of_first(self) -> usize {
        match self {
            Pairing::P12 => 2,
            Pairing::P13 => 3,
            Pairing::P14 => 4,
        }
    }

    /// The two pairs as 0-based positions.
    pub fn positions(self) -> ([usize; 2], [usize; 2]) {
        match self {
            Pairing::P12 => ([0, 1], [2, 3]),
            Pairing::P13 => ([0, 2], [1, 3]),
            Pairing::P14 => ([0, 3], [1, 2]),
        }
    }

    /// Pairing that puts 0-based positions `a` and `b` together.
    pub fn joining(a: usize, b: usize) -> Pairing {
        let other = |x: usize, y: usize| match (x.min(y), x.max(y)) {
            (0, 1) | (2, 3) => Pairing::P12,
            (0, 2) | (1, 3) => Pairing::P13,
            _ => Pairing::P14,
        };
        other(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Star,
    NonStar(Pairing),
}

/// A decision together with the distance of its deciding statistic from the
/// threshold. Larger margins are more confident.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartetVerdict {
    pub kind: VerdictKind,
    pub margin: f64,
}

impl QuartetVerdict {
    pub fn pairing(&self) -> Option<Pairing> {
        match self.kind {
            VerdictKind::Star => None,
            VerdictKind::NonStar(p) => Some(p),
        }
    }

    /// Whether positions `a` and `b` (0-based) end up in different pairs.
    pub fn separates(&self, a: usize, b: usize) -> bool {
        self.pairing().is_some_and(|p| p != Pairing::joining(a, b))
    }

    /// Whether positions `a` and `b` (0-based) form one of the pairs.
    pub fn joins(&self, a: usize, b: usize) -> bool {
        self.pairing() == Some(Pairing::joining(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Ka,
    Sga,
}

/// The six correlations of an ordered quartet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartetCorr {
    pub r12: f64,
    pub r13: f64,
    pub r14: f64,
    pub r23: f64,
    pub r24: f64,
    pub r34: f64,
}

impl QuartetCorr {
    /// Reads nodes `[a, b, c, d]` from a larger matrix.
    pub fn from_nodes(c: &CorrelationMatrix, n: [usize; 4]) -> Self {
        QuartetCorr {
            r12: c.get(n[0], n[1]),
            r13: c.get(n[0], n[2]),
            r14: c.get(n[0], n[3]),
            r23: c.get(n[1], n[2]),
            r24: c.get(n[1], n[3]),
            r34: c.get(n[2], n[3]),
        }
    }

    pub fn from_matrix(c: &CorrelationMatrix) -> Result<Self> {
        if c.d() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: c.d() });
        }
        Ok(Self::from_nodes(c, [1, 2, 3, 4]))
    }

    fn min_abs(&self) -> f64 {
        [self.r12, self.r13, self.r14, self.r23, self.r24, self.r34]
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
}

/// `(1 + rho_max^2) / 2`.
pub fn alpha(rho_max: f64) -> Result<f64> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::Domain(format!("rho_max must lie in (0, 1), got {rho_max}")));
    }
    Ok((1.0 + rho_max * rho_max) / 2.0)
}

fn guard(q: &QuartetCorr) -> Result<()> {
    let m = q.min_abs();
    if !(m >= EPS_DEN) {
        return Err(Error::InsufficientCorrelation(m));
    }
    Ok(())
}

/// Signed ratio tests, evaluated for pairs `{1,2}`, `{1,3}`, `{1,4}` in that order.
pub fn classify_ka_corr(q: &QuartetCorr, alpha: f64) -> Result<QuartetVerdict> {
    guard(q)?;
    let p12 = q.r12 * q.r34;
    let p13 = q.r13 * q.r24;
    let p14 = q.r14 * q.r23;
    let branches = [
        (Pairing::P12, p13 / p12, p13 / p14),
        (Pairing::P13, p12 / p13, p12 / p14),
        (Pairing::P14, p12 / p14, p12 / p13),
    ];
    let mut best_miss = f64::NEG_INFINITY;
    for (pairing, below, above) in branches {
        let slack = (alpha - below).min(above - alpha);
        if below < alpha && above > alpha {
            return Ok(QuartetVerdict { kind: VerdictKind::NonStar(pairing), margin: slack });
        }
        best_miss = best_miss.max(slack);
    }
    Ok(QuartetVerdict { kind: VerdictKind::Star, margin: -best_miss })
}

/// Geometric-mean statistics `v_2, v_3, v_4`.
pub fn sga_statistics(q: &QuartetCorr) -> [f64; 3] {
    let p12 = (q.r12 * q.r34).abs();
    let p13 = (q.r13 * q.r24).abs();
    let p14 = (q.r14 * q.r23).abs();
    [(p13 * p14).sqrt() / p12, (p12 * p14).sqrt() / p13, (p12 * p13).sqrt() / p14]
}

pub fn classify_sga_corr(q: &QuartetCorr, alpha: f64) -> Result<QuartetVerdict> {
    guard(q)?;
    let v = sga_statistics(q);
    let mut best = 0;
    for k in 1..3 {
        if v[k] < v[best] {
            best = k;
        }
    }
    let pairing = [Pairing::P12, Pairing::P13, Pairing::P14][best];
    if v[best] < alpha {
        Ok(QuartetVerdict { kind: VerdictKind::NonStar(pairing), margin: alpha - v[best] })
    } else {
        Ok(QuartetVerdict { kind: VerdictKind::Star, margin: v[best] - alpha })
    }
}

pub fn classify_corr(classifier: Classifier, q: &QuartetCorr, alpha: f64) -> Result<QuartetVerdict> {
    match classifier {
        Classifier::Ka => classify_ka_corr(q, alpha),
        Classifier::Sga => classify_sga_corr(q, alpha),
    }
}

/// KA test on a 4x4 correlation matrix.
pub fn classify_ka(c: &CorrelationMatrix, alpha: f64) -> Result<QuartetVerdict> {
    classify_ka_corr(&QuartetCorr::from_matrix(c)?, alpha)
}

/// SGA test on a 4x4 correlation matrix.
pub fn classify_sga(c: &CorrelationMatrix, alpha: f64) -> Result<QuartetVerdict> {
    classify_sga_corr(&QuartetCorr::from_matrix(c)?, alpha)
}
