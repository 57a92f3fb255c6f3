//! Adaptive synthetic oversampling for the minority (adversarial) class.
//!
//! The attack corpus is a sliver of the deployment stream, so the feature
//! classifier trains on a rebalanced set: each minority point spawns
//! synthetics in proportion to how surrounded by majority neighbors it
//! is, placing new points on segments toward nearby minority neighbors.
//! Density allocation:
//!
//!   G = (ml - ms) * beta,  ri = majority-in-kNN(xi)/k,
//!   gi = round(ri / sum(r) * G)
//!
//! When no minority point has majority neighbors (sum r = 0) the
//! allocation is undefined; this implementation falls back to a uniform
//! gi = round(G/ms) per point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::MlError;

/// One synthetic row with its provenance, so tests can verify the
/// placement identity s = base + lambda * (neighbor - base) exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub row: Vec<f64>,
    /// Index into the original dataset of the seeding minority point.
    pub base: usize,
    /// Index into the original dataset of the chosen minority neighbor.
    pub neighbor: usize,
    pub lambda: f64,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest indices from `candidates` to `x[target]`, excluding the
/// target itself; ties resolve by index so the result is deterministic.
fn nearest(x: &[Vec<f64>], target: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let mut by_distance: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != target)
        .map(|&c| (squared_distance(&x[target], &x[c]), c))
        .collect();
    by_distance.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    by_distance.truncate(k);
    by_distance.into_iter().map(|(_, c)| c).collect()
}

/// Full ADASYN with provenance. The plain [`adasyn`] wrapper discards it.
pub fn adasyn_trace(
    x: &[Vec<f64>],
    y: &[u8],
    beta: f64,
    k: usize,
    seed: u64,
) -> Result<Vec<SyntheticSample>, MlError> {
    if x.len() != y.len() {
        return Err(MlError::BadInput(format!("{} rows against {} labels", x.len(), y.len())));
    }
    if !(0.0..=1.0).contains(&beta) || beta == 0.0 {
        return Err(MlError::BadInput(format!("beta {beta} not in (0,1]")));
    }
    let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
    let majority_count = y.len() - minority.len();
    let ms = minority.len();
    if ms < 2 {
        return Err(MlError::BadInput(format!(
            "minority class has {ms} samples, oversampling needs at least 2"
        )));
    }
    if k == 0 || k >= ms {
        return Err(MlError::BadInput(format!("k {k} must satisfy 0 < k < {ms}")));
    }
    let g_total = (majority_count as f64 - ms as f64) * beta;
    if g_total <= 0.0 {
        return Ok(Vec::new());
    }

    let all: Vec<usize> = (0..x.len()).collect();
    let r: Vec<f64> = minority
        .iter()
        .map(|&i| {
            let majority_neighbors =
                nearest(x, i, &all, k).into_iter().filter(|&n| y[n] == 0).count();
            majority_neighbors as f64 / k as f64
        })
        .collect();
    let r_sum: f64 = r.iter().sum();

    let allocations: Vec<u64> = if r_sum == 0.0 {
        vec![(g_total / ms as f64).round() as u64; ms]
    } else {
        r.iter().map(|ri| (ri / r_sum * g_total).round() as u64).collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (mi, &i) in minority.iter().enumerate() {
        if allocations[mi] == 0 {
            continue;
        }
        // synthesis neighbors are the nearest minority points; the kNN for
        // ri ran over the full set
        let neighbors = nearest(x, i, &minority, k);
        for _ in 0..allocations[mi] {
            let z = neighbors[rng.random_range(0..neighbors.len())];
            let lambda: f64 = rng.random_range(0.0..=1.0);
            let row = x[i]
                .iter()
                .zip(&x[z])
                .map(|(a, b)| a + lambda * (b - a))
                .collect();
            out.push(SyntheticSample { row, base: i, neighbor: z, lambda });
        }
    }
    Ok(out)
}

/// Appends the synthetic minority rows to the dataset; original rows are
/// untouched and keep their positions.
pub fn adasyn(
    x: &[Vec<f64>],
    y: &[u8],
    beta: f64,
    k: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<u8>), MlError> {
    let synthetics = adasyn_trace(x, y, beta, k, seed)?;
    let mut xr: Vec<Vec<f64>> = x.to_vec();
    let mut yr = y.to_vec();
    for s in synthetics {
        xr.push(s.row);
        yr.push(1);
    }
    Ok((xr, yr))
}
