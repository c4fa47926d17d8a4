//! Zero-forcing precoding inside one cluster.
//!
//! Every transmitter of the cluster sends a precoded copy of every slow
//! block, `x_l = sum_j V_{l,j} s_j`. Receiver `k` sees block `j` through
//! `E_{k,j} = sum_l H_{k,l} V_{l,j}` over its own transmitter and its
//! in-cluster interferers. Constraints pin `E_{j,j}` to the identity and
//! force selected cross terms to zero.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::clustering::{ClusterPlan, Role};
use crate::error::{Error, Result};
use crate::lattice::SectorId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZfScheme {
    /// Null every foreign slow block at every slow receiver.
    S3,
    /// As `S3`, and also null all slow blocks at fast receivers.
    S4,
    /// Slow receivers decode in a fixed order and subtract blocks decoded
    /// earlier; only later blocks are nulled. Fast receivers as in `S4`.
    S5,
}

/// Channel matrices of one cluster, keyed by (receiver, transmitter).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub seed: u64,
    pub m: usize,
    links: BTreeMap<(SectorId, SectorId), DMatrix<f64>>,
}

impl ChannelRealization {
    pub fn get(&self, rx: SectorId, tx: SectorId) -> Option<&DMatrix<f64>> {
        self.links.get(&(rx, tx))
    }

    pub fn links(&self) -> impl Iterator<Item = (&(SectorId, SectorId), &DMatrix<f64>)> {
        self.links.iter()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn set(&mut self, rx: SectorId, tx: SectorId, h: DMatrix<f64>) -> Result<()> {
        if h.shape() != (self.m, self.m) {
            return Err(Error::DimensionMismatch(format!(
                "channel is {:?}, expected {m}x{m}",
                h.shape(),
                m = self.m
            )));
        }
        match self.links.get_mut(&(rx, tx)) {
            Some(slot) => {
                *slot = h;
                Ok(())
            }
            None => Err(Error::UnknownSector(tx)),
        }
    }
}

fn cluster_sectors<'a>(plan: &'a ClusterPlan<'_>, cluster: usize) -> Result<&'a [SectorId]> {
    let cl = plan
        .clusters()
        .get(cluster)
        .ok_or_else(|| Error::invalid("cluster", format!("no cluster with id {cluster}")))?;
    if cl.sectors.is_empty() {
        return Err(Error::EmptyCluster);
    }
    Ok(&cl.sectors)
}

/// In-cluster transmitters heard by `k`, `k` itself first.
fn heard(plan: &ClusterPlan<'_>, cluster: usize, k: SectorId) -> Result<Vec<SectorId>> {
    let mut v = vec![k];
    for l in plan.network().tx_neighbors(k)? {
        if plan.cluster_of(l) == Some(cluster) {
            v.push(l);
        }
    }
    Ok(v)
}

/// Standard normal M x M matrices for every self-link and in-cluster
/// interference link, drawn in sorted link order.
pub fn sample_channels(
    plan: &ClusterPlan<'_>,
    cluster: usize,
    m: usize,
    seed: u64,
) -> Result<ChannelRealization> {
    if m == 0 {
        return Err(Error::invalid("M", "must be at least 1"));
    }
    let sectors = cluster_sectors(plan, cluster)?;
    let mut keys = Vec::new();
    for &k in sectors {
        for l in heard(plan, cluster, k)? {
            keys.push((k, l));
        }
    }
    keys.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let links = keys
        .into_iter()
        .map(|key| {
            let h = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(&mut rng));
            (key, h)
        })
        .collect();
    Ok(ChannelRealization { seed, m, links })
}

/// Linear constraints on the precoder of one cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZfSystem {
    pub scheme: ZfScheme,
    pub m: usize,
    pub cluster: usize,
    /// Every transmitter (and receiver) of the cluster, sorted.
    pub sectors: Vec<SectorId>,
    /// Slow sectors in decoding order.
    pub slow: Vec<SectorId>,
    pub fast: Vec<SectorId>,
    /// Neighbour lists per receiver, indices into `sectors`.
    heard: Vec<Vec<usize>>,
}

impl ZfSystem {
    pub fn num_unknowns(&self) -> usize {
        self.sectors.len() * self.slow.len() * self.m * self.m
    }

    pub fn num_constraints(&self) -> usize {
        let b = self.m * self.m;
        let n = self.slow.len();
        match self.scheme {
            ZfScheme::S3 => n * n * b,
            ZfScheme::S4 => (n + self.fast.len()) * n * b,
            // Block j constrains itself, the j earlier slow receivers and the fast ones.
            ZfScheme::S5 => (n * (n + 1) / 2 + self.fast.len() * n) * b,
        }
    }

    /// Receivers constrained for slow block `j` (index into `slow`), as
    /// (sector, must equal identity).
    fn rows_for_block(&self, j: usize) -> Vec<(SectorId, bool)> {
        let mut rows: Vec<(SectorId, bool)> = match self.scheme {
            ZfScheme::S3 | ZfScheme::S4 => self
                .slow
                .iter()
                .enumerate()
                .map(|(k, &s)| (s, k == j))
                .collect(),
            ZfScheme::S5 => self.slow[..=j]
                .iter()
                .enumerate()
                .map(|(k, &s)| (s, k == j))
                .collect(),
        };
        if self.scheme != ZfScheme::S3 {
            rows.extend(self.fast.iter().map(|&s| (s, false)));
        }
        rows
    }

    fn index_of(&self, k: SectorId) -> usize {
        self.sectors.binary_search(&k).expect("cluster sector")
    }
}

/// Builds the constraint system for one cluster of an assigned plan.
pub fn build_zf_system(
    plan: &ClusterPlan<'_>,
    cluster: usize,
    m: usize,
    scheme: ZfScheme,
) -> Result<ZfSystem> {
    if plan.assignment_mode().is_none() {
        return Err(Error::AssignmentMissing);
    }
    if m == 0 {
        return Err(Error::invalid("M", "must be at least 1"));
    }
    let sectors = cluster_sectors(plan, cluster)?.to_vec();
    let master = plan.clusters()[cluster].master;
    let mut slow = Vec::new();
    let mut fast = Vec::new();
    for &s in &sectors {
        match plan.role(s) {
            Some(Role::Slow) => slow.push(s),
            Some(Role::Fast) => fast.push(s),
            _ => {}
        }
    }
    if slow.is_empty() {
        return Err(Error::EmptyCluster);
    }
    if let Some(mc) = master {
        slow.sort_by_key(|s| (s.cell.distance(mc), *s));
    }
    let index: HashMap<SectorId, usize> =
        sectors.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let heard = sectors
        .iter()
        .map(|&k| heard(plan, cluster, k).map(|v| v.iter().map(|l| index[l]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZfSystem {
        scheme,
        m,
        cluster,
        sectors,
        slow,
        fast,
        heard,
    })
}

/// Precoder blocks `V_{l,j}` for transmitter `l` and slow block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub m: usize,
    pub num_tx: usize,
    pub num_blocks: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl Precoder {
    pub fn zeros(system: &ZfSystem) -> Self {
        let m = system.m;
        let (num_tx, num_blocks) = (system.sectors.len(), system.slow.len());
        Precoder {
            m,
            num_tx,
            num_blocks,
            blocks: vec![DMatrix::zeros(m, m); num_tx * num_blocks],
        }
    }

    pub fn block(&self, tx: usize, j: usize) -> &DMatrix<f64> {
        &self.blocks[tx * self.num_blocks + j]
    }

    pub fn block_mut(&mut self, tx: usize, j: usize) -> &mut DMatrix<f64> {
        &mut self.blocks[tx * self.num_blocks + j]
    }
}

fn channel_matrix(
    system: &ZfSystem,
    ch: &ChannelRealization,
    rows: &[(SectorId, bool)],
) -> Result<DMatrix<f64>> {
    let m = system.m;
    if ch.m != m {
        return Err(Error::DimensionMismatch(format!(
            "channels are {0}x{0}, system expects {m}x{m}",
            ch.m
        )));
    }
    let mut a = DMatrix::zeros(rows.len() * m, system.sectors.len() * m);
    for (ri, &(k, _)) in rows.iter().enumerate() {
        let ki = system.index_of(k);
        for &li in &system.heard[ki] {
            let h = ch
                .get(k, system.sectors[li])
                .ok_or(Error::UnknownSector(system.sectors[li]))?;
            a.view_mut((ri * m, li * m), (m, m)).copy_from(h);
        }
    }
    Ok(a)
}

fn min_norm_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10 * (a.nrows().max(a.ncols()) as f64);
    let rank = svd.rank(eps);
    if rank < a.nrows() {
        return Err(Error::RankDeficient {
            rank,
            rows: a.nrows(),
        });
    }
    svd.solve(b, eps)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}

/// Minimum-norm precoder meeting every constraint exactly.
pub fn solve_precoder(system: &ZfSystem, ch: &ChannelRealization) -> Result<Precoder> {
    let m = system.m;
    let mut p = Precoder::zeros(system);
    let n = system.slow.len();
    match system.scheme {
        ZfScheme::S3 | ZfScheme::S4 => {
            // Same coefficient matrix for every block: solve all at once.
            let rows = system.rows_for_block(0);
            let a = channel_matrix(system, ch, &rows)?;
            let mut b = DMatrix::zeros(rows.len() * m, n * m);
            for j in 0..n {
                b.view_mut((j * m, j * m), (m, m)).fill_with_identity();
            }
            let x = min_norm_solve(&a, &b)?;
            for li in 0..system.sectors.len() {
                for j in 0..n {
                    *p.block_mut(li, j) = x.view((li * m, j * m), (m, m)).into_owned();
                }
            }
        }
        ZfScheme::S5 => {
            for j in 0..n {
                let rows = system.rows_for_block(j);
                let a = channel_matrix(system, ch, &rows)?;
                let mut b = DMatrix::zeros(rows.len() * m, m);
                let pos = rows.iter().position(|r| r.1).expect("intended row");
                b.view_mut((pos * m, 0), (m, m)).fill_with_identity();
                let x = min_norm_solve(&a, &b)?;
                for li in 0..system.sectors.len() {
                    *p.block_mut(li, j) = x.view((li * m, 0), (m, m)).into_owned();
                }
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullingReport {
    /// Largest spectral norm of a term that must vanish, relative to the
    /// largest intended one.
    pub max_cross_residual: f64,
    pub min_self_rank: usize,
    pub solvable: bool,
}

fn spectral_norm(x: &DMatrix<f64>) -> f64 {
    x.clone().svd(false, false).singular_values.max()
}

/// Effective channel of block `j` at receiver `k` (indices into the system).
fn effective(
    system: &ZfSystem,
    ch: &ChannelRealization,
    p: &Precoder,
    k: usize,
    j: usize,
) -> Result<DMatrix<f64>> {
    let m = system.m;
    let mut e = DMatrix::zeros(m, m);
    for &li in &system.heard[k] {
        let h = ch
            .get(system.sectors[k], system.sectors[li])
            .ok_or(Error::UnknownSector(system.sectors[li]))?;
        e += h * p.block(li, j);
    }
    Ok(e)
}

/// Substitutes the precoder into the channels and measures every term.
pub fn verify_nulling(
    p: &Precoder,
    system: &ZfSystem,
    ch: &ChannelRealization,
    tol: f64,
) -> Result<NullingReport> {
    let m = system.m;
    if p.m != m
        || p.num_tx != system.sectors.len()
        || p.num_blocks != system.slow.len()
        || ch.m != m
    {
        return Err(Error::DimensionMismatch(format!(
            "precoder {}x{} blocks of size {}, system {}x{} of size {m}",
            p.num_tx,
            p.num_blocks,
            p.m,
            system.sectors.len(),
            system.slow.len()
        )));
    }
    let mut max_self = 0.0f64;
    let mut max_cross = 0.0f64;
    let mut min_rank = m;
    for j in 0..system.slow.len() {
        for (k, is_self) in system.rows_for_block(j) {
            let e = effective(system, ch, p, system.index_of(k), j)?;
            if is_self {
                let svd = e.svd(false, false);
                let smax = svd.singular_values.max();
                max_self = max_self.max(smax);
                let rank = if smax > 0.0 { svd.rank(smax * 1e-9) } else { 0 };
                min_rank = min_rank.min(rank);
            } else {
                max_cross = max_cross.max(spectral_norm(&e));
            }
        }
    }
    let residual = if max_self > 0.0 {
        max_cross / max_self
    } else {
        max_cross
    };
    Ok(NullingReport {
        max_cross_residual: residual,
        min_self_rank: min_rank,
        solvable: residual <= tol && min_rank == m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub report: std::result::Result<NullingReport, Error>,
}

impl TrialOutcome {
    pub fn passed(&self) -> bool {
        matches!(self.report, Ok(r) if r.solvable)
    }
}

/// Runs independent trials in parallel; trial `i` uses `seed + i`.
pub fn run_trials(
    plan: &ClusterPlan<'_>,
    cluster: usize,
    m: usize,
    scheme: ZfScheme,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<TrialOutcome>> {
    let system = build_zf_system(plan, cluster, m, scheme)?;
    let mut out: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let report = sample_channels(plan, cluster, m, s).and_then(|ch| {
                let p = solve_precoder(&system, &ch)?;
                verify_nulling(&p, &system, &ch, tol)
            });
            TrialOutcome {
                trial: i,
                seed: s,
                report,
            }
        })
        .collect();
    out.sort_by_key(|o| o.trial);
    Ok(out)
}
