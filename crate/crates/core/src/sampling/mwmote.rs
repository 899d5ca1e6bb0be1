//! Majority-weighted minority selection and cluster-based generation.
//!
//! Selection runs in stages over the minority set `S_min` and majority set
//! `S_maj`:
//!
//! 1. `S_minf`: minority rows with at least one minority row among their `k1`
//!    nearest neighbours in `S_min ∪ S_maj`.
//! 2. `S_bmaj`: union of the `k2` nearest majority rows of every `S_minf` row.
//! 3. `S_imin`: union of the `k3` nearest `S_minf` rows, `N_min(y)`, of every
//!    `y ∈ S_bmaj`.
//! 4. For `y ∈ S_bmaj`, `x ∈ S_imin`: closeness
//!    `C_f(y, x) = min(1 / d_n, Cf_th) · CMAX / Cf_th` with
//!    `d_n = ‖y − x‖ / d`, zero when `x ∉ N_min(y)`; density
//!    `D_f(y, x) = C_f(y, x) / Σ_q C_f(y, q)`; information weight
//!    `I_w = C_f · D_f`.
//! 5. `S_w(x) = Σ_y I_w(y, x)`, normalized into selection probabilities `S_p`.
//!
//! Generation clusters `S_minf` by average linkage, stopping once the closest
//! pair of clusters is farther apart than `Cp` times the mean nearest-neighbour
//! distance inside `S_minf`.

use crate::data::{RowMatrix, SamplerParams};
use crate::error::Result;
use crate::rng::RandomSource;
use crate::sampling::knn::{dist, knn, knn_among};
use crate::sampling::smote::{interpolate, smote};

/// Informative minority rows and their selection distribution. All indices
/// refer to rows of the minority (`filtered`, `informative`) or majority
/// (`borderline`) input.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMinoritySet {
    pub filtered: Vec<usize>,
    pub borderline: Vec<usize>,
    pub informative: Vec<usize>,
    /// `S_w`, aligned with `informative`.
    pub weights: Vec<f64>,
    /// `S_p`, aligned with `informative`.
    pub probabilities: Vec<f64>,
}

impl WeightedMinoritySet {
    pub fn cumulative(&self) -> Vec<f64> {
        self.probabilities
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Minority rows whose `k1` nearest neighbours (self excluded) in
/// `S_min ∪ S_maj` include at least one minority row.
pub fn filtered_minority(minority: &RowMatrix, majority: &RowMatrix, k1: usize) -> Result<Vec<usize>> {
    let m = minority.n_rows();
    let mut pool = minority.clone();
    pool.extend(majority)?;
    let k = k1.min(pool.n_rows().saturating_sub(1));
    let mut kept = Vec::new();
    for i in 0..m {
        let nn = knn(minority.row(i), &pool, k, Some(i))?;
        if nn.iter().any(|&j| j < m) {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Sorted union of the `k2` nearest majority rows of each filtered minority row.
pub fn borderline_majority(minority: &RowMatrix, filtered: &[usize], majority: &RowMatrix, k2: usize) -> Result<Vec<usize>> {
    let k = k2.min(majority.n_rows());
    let mut out = Vec::new();
    for &i in filtered {
        out.extend(knn(minority.row(i), majority, k, None)?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Sorted union of `N_min(y)` over borderline majority rows, plus each
/// `N_min(y)` (minority indices, nearest first) aligned with `borderline`.
pub fn informative_minority(
    minority: &RowMatrix,
    filtered: &[usize],
    majority: &RowMatrix,
    borderline: &[usize],
    k3: usize,
) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let k = k3.min(filtered.len());
    let mut neighbourhoods = Vec::with_capacity(borderline.len());
    let mut all = Vec::new();
    for &y in borderline {
        let nn = knn_among(majority.row(y), minority, filtered.iter().copied(), k)?;
        all.extend_from_slice(&nn);
        neighbourhoods.push(nn);
    }
    all.sort_unstable();
    all.dedup();
    Ok((all, neighbourhoods))
}

/// `C_f(y, x)`: capped inverse of the dimension-normalized distance, scaled
/// to `[0, CMAX]`. Coincident points get the cap.
pub fn closeness(y: &[f64], x: &[f64], cf_th: f64, cmax: f64) -> f64 {
    let dn = dist(y, x) / y.len().max(1) as f64;
    let inv = if dn > 0.0 { 1.0 / dn } else { f64::INFINITY };
    inv.min(cf_th) * (cmax / cf_th)
}

/// `I_w(y, x) = C_f(y, x) · D_f(y, x)` where the density term normalizes over
/// `neighbourhood = N_min(y)`. `x` must be a member of the neighbourhood;
/// for non-members the weight is 0 and callers skip them.
pub fn information_weight(y: &[f64], x: &[f64], neighbourhood: &[&[f64]], cf_th: f64, cmax: f64) -> f64 {
    let cf = closeness(y, x, cf_th, cmax);
    let total: f64 = neighbourhood.iter().map(|q| closeness(y, q, cf_th, cmax)).sum();
    if total > 0.0 {
        cf * cf / total
    } else {
        0.0
    }
}

/// Steps 1–5 of the module overview.
pub fn selection_probabilities(minority: &RowMatrix, majority: &RowMatrix, params: &SamplerParams) -> Result<WeightedMinoritySet> {
    let filtered = filtered_minority(minority, majority, params.k1)?;
    let borderline = borderline_majority(minority, &filtered, majority, params.k2)?;
    let k3 = params.k3_for(minority.n_rows());
    let (informative, neighbourhoods) = informative_minority(minority, &filtered, majority, &borderline, k3)?;

    let mut weights = vec![0.0; informative.len()];
    for (&y, nn) in borderline.iter().zip(&neighbourhoods) {
        let yrow = majority.row(y);
        let rows: Vec<&[f64]> = nn.iter().map(|&i| minority.row(i)).collect();
        for &x in nn {
            let slot = informative.binary_search(&x).expect("neighbour is informative");
            weights[slot] += information_weight(yrow, minority.row(x), &rows, params.cf_th, params.cmax);
        }
    }
    let total: f64 = weights.iter().sum();
    let probabilities = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        if !informative.is_empty() {
            log::warn!("all selection weights are zero; using uniform selection");
        }
        vec![1.0 / informative.len().max(1) as f64; informative.len()]
    };
    Ok(WeightedMinoritySet {
        filtered,
        borderline,
        informative,
        weights,
        probabilities,
    })
}

/// Cluster id per row, numbered by first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub assignment: Vec<usize>,
    pub n_clusters: usize,
    pub threshold: f64,
}

impl ClusterAssignment {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Mean distance from each row to its nearest other row.
pub fn mean_nearest_distance(rows: &RowMatrix) -> f64 {
    let n = rows.n_rows();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist(rows.row(i), rows.row(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / n as f64
}

/// Average-linkage agglomerative clustering with merge threshold
/// `T = Cp · mean_nearest_distance`.
///
/// Clusters live in the slot of their smallest member; the closest pair is
/// merged first, ties going to the lexicographically smallest slot pair.
pub fn agglomerative_clusters(rows: &RowMatrix, cp: f64) -> ClusterAssignment {
    let n = rows.n_rows();
    let threshold = mean_nearest_distance(rows) * cp;
    if n <= 1 {
        return ClusterAssignment {
            assignment: vec![0; n],
            n_clusters: n,
            threshold,
        };
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = dist(rows.row(i), rows.row(j));
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut slot_of: Vec<usize> = (0..n).collect();

    let nearest = |d: &[f64], active: &[bool], i: usize| -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..n {
            if j != i && active[j] && d[i * n + j] < best.0 {
                best = (d[i * n + j], j);
            }
        }
        best
    };
    let mut nn: Vec<(f64, usize)> = (0..n).map(|i| nearest(&d, &active, i)).collect();

    loop {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if active[i] && nn[i].1 != usize::MAX && pick.is_none_or(|p| nn[i].0 < nn[p].0) {
                pick = Some(i);
            }
        }
        let Some(a) = pick else { break };
        let (gap, b) = nn[a];
        if gap > threshold {
            break;
        }
        let (keep, gone) = (a.min(b), a.max(b));
        let (sk, sg) = (size[keep] as f64, size[gone] as f64);
        for k in 0..n {
            if active[k] && k != keep && k != gone {
                let v = (sk * d[k * n + keep] + sg * d[k * n + gone]) / (sk + sg);
                d[k * n + keep] = v;
                d[keep * n + k] = v;
            }
        }
        active[gone] = false;
        size[keep] += size[gone];
        for s in slot_of.iter_mut() {
            if *s == gone {
                *s = keep;
            }
        }
        nn[keep] = nearest(&d, &active, keep);
        for k in 0..n {
            if !active[k] || k == keep {
                continue;
            }
            if nn[k].1 == keep || nn[k].1 == gone {
                nn[k] = nearest(&d, &active, k);
            } else {
                let v = d[k * n + keep];
                if v < nn[k].0 || (v == nn[k].0 && keep < nn[k].1) {
                    nn[k] = (v, keep);
                }
            }
        }
    }

    let mut ids = vec![usize::MAX; n];
    let mut next = 0;
    let assignment = slot_of
        .iter()
        .map(|&s| {
            if ids[s] == usize::MAX {
                ids[s] = next;
                next += 1;
            }
            ids[s]
        })
        .collect();
    ClusterAssignment {
        assignment,
        n_clusters: next,
        threshold,
    }
}

/// Weighted base selection, then interpolation towards a random member of the
/// base's cluster (the base itself for singleton clusters).
pub fn mwmote(majority: &RowMatrix, minority: &RowMatrix, n: usize, params: &SamplerParams, rng: &mut RandomSource) -> Result<RowMatrix> {
    if minority.n_rows() < 2 {
        return smote(minority, n, params.k, rng);
    }
    let weighted = selection_probabilities(minority, majority, params)?;
    if weighted.informative.is_empty() {
        log::warn!("no informative minority rows; MWMOTE falls back to SMOTE");
        return smote(minority, n, params.k, rng);
    }
    let filtered_rows = minority.select_rows(&weighted.filtered);
    let clusters = agglomerative_clusters(&filtered_rows, params.cp);
    let members = clusters.members();
    let cumulative = weighted.cumulative();
    let mut out = RowMatrix::new(minority.n_cols());
    for _ in 0..n {
        let base = weighted.informative[rng.choose_cumulative(&cumulative)];
        let pos = weighted.filtered.binary_search(&base).expect("informative rows are filtered rows");
        let cluster = &members[clusters.assignment[pos]];
        let partner = if cluster.len() > 1 {
            let mut pick = cluster[rng.below(cluster.len() - 1)];
            if pick == pos {
                pick = *cluster.last().expect("non-empty cluster");
            }
            weighted.filtered[pick]
        } else {
            base
        };
        out.push_row(&interpolate(minority.row(base), minority.row(partner), rng))?;
    }
    Ok(out)
}
