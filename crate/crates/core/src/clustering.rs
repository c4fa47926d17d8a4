//! Master-cell grids, silencing, cluster decomposition and fast/slow packing.
//!
//! Master cells sit on the triangular sublattice spanned by `(2t, -t)` and
//! `(t, t)`: neighbouring masters are `2t` hops apart and every master owns
//! `3t²` cells. Cells exactly `t` hops from their nearest master are on a
//! cluster border:
//!
//! * a cell halfway between two masters loses the one sector that straddles
//!   the border, chosen by the direction joining the two masters;
//! * of the two cells equidistant to three masters, one loses all three
//!   sectors and the other keeps all of them (each of its sectors then belongs
//!   to a different cluster).
//!
//! This removes `3t` of the `9t²` sectors per master and splits the
//! interference graph into one component per master.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Network, Orientation, SectorId, Sublattice};
use crate::rational::{int, ratio};

/// Sublattice of master cells for parameter `t`.
pub fn master_lattice(t: u32) -> Sublattice {
    let t = t as i32;
    Sublattice::spanned_by(CellCoord::new(2 * t, -t))
}

fn check_t(net: &Network, t: u32) -> Result<()> {
    if t == 0 {
        return Err(Error::invalid("t", "must be at least 1"));
    }
    let needed = 2 * t;
    if net.radius() < needed {
        return Err(Error::LatticeTooSmall {
            t,
            radius: net.radius(),
            needed,
        });
    }
    Ok(())
}

/// Master cells inside the network, sorted.
pub fn master_grid(net: &Network, t: u32) -> Result<Vec<CellCoord>> {
    check_t(net, t)?;
    let lat = master_lattice(t);
    Ok(net
        .cells()
        .iter()
        .copied()
        .filter(|&c| lat.contains(c))
        .collect())
}

/// Which orientations of `cell` are silenced for parameter `t`.
pub fn silenced_orientations(t: u32, cell: CellCoord) -> [bool; 3] {
    let lat = master_lattice(t);
    let (d, near) = lat.nearest(cell);
    if d != t {
        return [false; 3];
    }
    let ti = t as i32;
    match near.len() {
        2 => {
            let dq = near[1].q - near[0].q;
            let dr = near[1].r - near[0].r;
            let along = |q: i32, r: i32| (dq, dr) == (q, r) || (dq, dr) == (-q, -r);
            let mut out = [false; 3];
            if along(2 * ti, -ti) {
                out[0] = true;
            } else if along(ti, -2 * ti) {
                out[1] = true;
            } else if along(ti, ti) {
                out[2] = true;
            }
            out
        }
        3 => {
            let off = (cell.q - near[0].q, cell.r - near[0].r);
            let corner_a = [(ti, 0), (-ti, ti), (0, -ti)];
            [corner_a.contains(&off); 3]
        }
        _ => [false; 3],
    }
}

/// Silenced sectors of the network, sorted.
pub fn silenced_sectors(net: &Network, t: u32) -> Result<Vec<SectorId>> {
    check_t(net, t)?;
    let mut out = Vec::new();
    for &c in net.cells() {
        let mask = silenced_orientations(t, c);
        for o in Orientation::ALL {
            if mask[o as usize] {
                out.push(SectorId::new(c, o));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Fast,
    Slow,
    Silent,
}

impl Role {
    pub fn label(self) -> &'static str {
        match self {
            Role::Fast => "FAST",
            Role::Slow => "SLOW",
            Role::Silent => "SILENT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignMode {
    SlowOnly,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkSide {
    Tx,
    Rx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    S1,
    S2,
    S3,
    S4,
    S5,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Master cell, if it lies inside the network.
    pub master: Option<CellCoord>,
    /// Member sectors, sorted.
    pub sectors: Vec<SectorId>,
}

impl Cluster {
    pub fn master_user(&self) -> Option<SectorId> {
        self.master.map(|c| SectorId::new(c, Orientation::South))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleCensus {
    pub fast: usize,
    pub slow: usize,
    pub silent: usize,
    pub total: usize,
}

impl RoleCensus {
    pub fn fraction(&self, role: Role) -> f64 {
        let n = match role {
            Role::Fast => self.fast,
            Role::Slow => self.slow,
            Role::Silent => self.silent,
        };
        n as f64 / self.total as f64
    }
}

/// Clusters for one value of `t`, optionally with a message assignment.
#[derive(Debug, Clone)]
pub struct ClusterPlan<'n> {
    net: &'n Network,
    t: u32,
    masters: Vec<CellCoord>,
    silenced: Vec<bool>,
    clusters: Vec<Cluster>,
    cluster_of: Vec<Option<usize>>,
    assignment: Option<(AssignMode, Vec<Role>)>,
}

/// Decomposes the active sectors into interference-connected clusters.
pub fn clusters(net: &Network, t: u32) -> Result<ClusterPlan<'_>> {
    let masters = master_grid(net, t)?;
    let mut silenced = vec![false; net.num_sectors()];
    for s in silenced_sectors(net, t)? {
        silenced[net.sector_index(s).expect("own sector")] = true;
    }

    let mut comp: Vec<Option<usize>> = vec![None; net.num_sectors()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..net.num_sectors() {
        if silenced[start] || comp[start].is_some() {
            continue;
        }
        let id = members.len();
        let mut list = vec![start];
        comp[start] = Some(id);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in net.tx_indices(i) {
                if !silenced[j] && comp[j].is_none() {
                    comp[j] = Some(id);
                    list.push(j);
                    queue.push_back(j);
                }
            }
        }
        list.sort_unstable();
        members.push(list);
    }

    let master_set: HashSet<CellCoord> = masters.iter().copied().collect();
    let mut raw: Vec<Cluster> = members
        .iter()
        .map(|list| {
            let master = list
                .iter()
                .map(|&i| net.sector_at(i).cell)
                .find(|c| master_set.contains(c));
            Cluster {
                master,
                sectors: list.iter().map(|&i| net.sector_at(i)).collect(),
            }
        })
        .collect();
    // Master clusters first in master order, then the rest by first sector.
    raw.sort_by(|a, b| match (a.master, b.master) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.sectors[0].cmp(&b.sectors[0]),
    });
    let mut cluster_of = vec![None; net.num_sectors()];
    for (id, cl) in raw.iter().enumerate() {
        for &s in &cl.sectors {
            cluster_of[net.sector_index(s).expect("own sector")] = Some(id);
        }
    }

    Ok(ClusterPlan {
        net,
        t,
        masters,
        silenced,
        clusters: raw,
        cluster_of,
        assignment: None,
    })
}

impl<'n> ClusterPlan<'n> {
    pub fn network(&self) -> &'n Network {
        self.net
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn masters(&self) -> &[CellCoord] {
        &self.masters
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn is_silenced(&self, k: SectorId) -> bool {
        self.net
            .sector_index(k)
            .map(|i| self.silenced[i])
            .unwrap_or(false)
    }

    pub fn silenced(&self) -> Vec<SectorId> {
        (0..self.net.num_sectors())
            .filter(|&i| self.silenced[i])
            .map(|i| self.net.sector_at(i))
            .collect()
    }

    pub fn cluster_of(&self, k: SectorId) -> Option<usize> {
        self.net.sector_index(k).and_then(|i| self.cluster_of[i])
    }

    /// Cluster led by master cell `m`.
    pub fn cluster_with_master(&self, m: CellCoord) -> Option<usize> {
        self.clusters.iter().position(|c| c.master == Some(m))
    }

    /// The cluster of the origin master if it lies entirely in the network
    /// together with all sectors interfering with it.
    pub fn interior_cluster(&self) -> Result<usize> {
        let err = Error::NoInteriorCluster {
            t: self.t,
            radius: self.net.radius(),
        };
        if self.net.radius() < self.t + 1 {
            return Err(err);
        }
        self.cluster_with_master(CellCoord::ORIGIN).ok_or(err)
    }

    pub fn is_master_user(&self, k: SectorId) -> bool {
        k.orientation == Orientation::South && self.masters.binary_search(&k.cell).is_ok()
    }

    pub fn assignment_mode(&self) -> Option<AssignMode> {
        self.assignment.as_ref().map(|(m, _)| *m)
    }

    pub fn role(&self, k: SectorId) -> Option<Role> {
        let (_, roles) = self.assignment.as_ref()?;
        self.net.sector_index(k).map(|i| roles[i])
    }

    /// Role census over sectors whose cell lies within `max_norm` hops of the
    /// origin (the whole network when `None`).
    pub fn census(&self, max_norm: Option<u32>) -> Result<RoleCensus> {
        let (_, roles) = self.assignment.as_ref().ok_or(Error::AssignmentMissing)?;
        let mut c = RoleCensus::default();
        for (i, role) in roles.iter().enumerate() {
            let cell = self.net.sector_at(i).cell;
            if max_norm.is_some_and(|n| cell.norm() > n) {
                continue;
            }
            c.total += 1;
            match role {
                Role::Fast => c.fast += 1,
                Role::Slow => c.slow += 1,
                Role::Silent => c.silent += 1,
            }
        }
        Ok(c)
    }

    /// Census over interior sectors, i.e. cells at least two hops from the
    /// boundary.
    pub fn interior_census(&self) -> Result<RoleCensus> {
        self.census(Some(self.net.radius().saturating_sub(2)))
    }

    /// Cells whose nearest master (ties to the smallest `(q, r)`) is the
    /// origin. This is one period of the cluster pattern.
    pub fn origin_domain(&self) -> Vec<CellCoord> {
        let lat = master_lattice(self.t);
        let t = self.t as i32;
        let mut out = Vec::new();
        for q in -t..=t {
            for r in -t..=t {
                let c = CellCoord::new(q, r);
                if c.norm() > self.t {
                    continue;
                }
                if lat.nearest(c).1[0] == CellCoord::ORIGIN {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Assigns FAST/SLOW/SILENT roles.
pub fn assign_messages<'n>(plan: &ClusterPlan<'n>, mode: AssignMode) -> Result<ClusterPlan<'n>> {
    let net = plan.net;
    let fast: HashSet<(CellCoord, Orientation)> = match mode {
        AssignMode::SlowOnly => HashSet::new(),
        AssignMode::Mixed => fast_pattern(plan.t)?,
    };
    let lat = master_lattice(plan.t);
    let roles = (0..net.num_sectors())
        .map(|i| {
            if plan.silenced[i] {
                return Role::Silent;
            }
            let k = net.sector_at(i);
            if fast.contains(&(lat.reduce(k.cell), k.orientation)) {
                Role::Fast
            } else {
                Role::Slow
            }
        })
        .collect();
    let mut out = plan.clone();
    out.assignment = Some((mode, roles));
    Ok(out)
}

/// One period of the FAST pattern as (cell representative, orientation).
///
/// Every interference triangle must contain exactly one FAST sector, which
/// makes the FAST set a perfect matching between the two triangle classes.
/// The matching is found on the torus of cells modulo the master lattice, so
/// tiling it keeps the pattern aligned with the clusters.
pub fn fast_pattern(t: u32) -> Result<HashSet<(CellCoord, Orientation)>> {
    if t == 0 {
        return Err(Error::invalid("t", "must be at least 1"));
    }
    let lat = master_lattice(t);
    let span = 3 * t as i32;
    let mut reps = BTreeSet::new();
    for q in -span..=span {
        for r in -span..=span {
            reps.insert(lat.reduce(CellCoord::new(q, r)));
        }
    }
    debug_assert_eq!(reps.len() as u64, lat.index());

    let mut left: BTreeMap<CellCoord, Vec<(Orientation, CellCoord, CellCoord)>> = BTreeMap::new();
    for &c in &reps {
        let mask = silenced_orientations(t, c);
        for o in Orientation::ALL {
            if mask[o as usize] || (c == CellCoord::ORIGIN && o == Orientation::South) {
                continue;
            }
            let [t1, t2] = SectorId::new(c, o).triangles();
            left.entry(lat.reduce(t1.anchor))
                .or_default()
                .push((o, c, lat.reduce(t2.anchor)));
        }
    }
    for edges in left.values_mut() {
        edges.sort();
    }

    let lefts: Vec<CellCoord> = reps.iter().copied().collect();
    let mut matched: HashMap<CellCoord, (CellCoord, Orientation, CellCoord)> = HashMap::new();
    for &u in &lefts {
        let mut visited = HashSet::new();
        if !augment(u, &left, &mut matched, &mut visited) {
            return Err(Error::NoPacking { t });
        }
    }
    Ok(matched.values().map(|&(_, o, c)| (c, o)).collect())
}

/// Kuhn's augmenting path step. `matched` maps a right triangle to
/// `(left triangle, orientation, sector cell)`.
fn augment(
    u: CellCoord,
    adj: &BTreeMap<CellCoord, Vec<(Orientation, CellCoord, CellCoord)>>,
    matched: &mut HashMap<CellCoord, (CellCoord, Orientation, CellCoord)>,
    visited: &mut HashSet<CellCoord>,
) -> bool {
    let Some(edges) = adj.get(&u) else {
        return false;
    };
    for &(o, cell, v) in edges {
        if !visited.insert(v) {
            continue;
        }
        let free = match matched.get(&v) {
            None => true,
            Some(&(w, _, _)) => augment(w, adj, matched, visited),
        };
        if free {
            matched.insert(v, (u, o, cell));
            return true;
        }
    }
    false
}

/// Directed links counted over one period of the cluster pattern.
pub fn count_links(plan: &ClusterPlan<'_>, side: LinkSide) -> Result<u64> {
    let net = plan.net;
    if net.radius() < plan.t + 1 {
        return Err(Error::NoInteriorCluster {
            t: plan.t,
            radius: net.radius(),
        });
    }
    let mut n = 0u64;
    for c in plan.origin_domain() {
        match side {
            LinkSide::Tx => {
                for o in Orientation::ALL {
                    n += net.tx_neighbors(SectorId::new(c, o))?.len() as u64;
                }
            }
            LinkSide::Rx => {
                n += net.rx_neighbors(c).map(|v| v.len()).unwrap_or(0) as u64;
            }
        }
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrelogRequirement {
    pub mu_tx: BigRational,
    pub mu_rx: BigRational,
}

impl PrelogRequirement {
    pub fn total(&self) -> BigRational {
        &self.mu_tx + &self.mu_rx
    }

    pub fn side(&self, side: LinkSide) -> &BigRational {
        match side {
            LinkSide::Tx => &self.mu_tx,
            LinkSide::Rx => &self.mu_rx,
        }
    }
}

/// Per-link conferencing prelog each scheme needs.
pub fn required_prelogs(scheme: Scheme, t: u32, m: u32) -> Result<PrelogRequirement> {
    if t == 0 {
        return Err(Error::invalid("t", "must be at least 1"));
    }
    if m == 0 {
        return Err(Error::invalid("M", "must be at least 1"));
    }
    let (t, m) = (t as i64, m as i64);
    let zero = BigRational::zero();
    let slow = ratio(m * (2 * t - 1), 3);
    Ok(match scheme {
        Scheme::S1 => PrelogRequirement {
            mu_tx: zero.clone(),
            mu_rx: zero,
        },
        Scheme::S2 => PrelogRequirement {
            mu_tx: zero,
            mu_rx: slow,
        },
        Scheme::S3 => PrelogRequirement {
            mu_tx: slow,
            mu_rx: zero,
        },
        Scheme::S4 => PrelogRequirement {
            mu_tx: ratio(2 * m * t * (8 * t * t + 3 * t - 2), 36 * t * t),
            mu_rx: ratio(3 * m * (3 * t * t - 1), 18 * t * t),
        },
        Scheme::S5 => PrelogRequirement {
            mu_tx: ratio(6 * m * t * (2 * t - 1), 36 * t * t),
            mu_rx: ratio(m * (8 * t * t * t + 6 * t * t + t - 3), 18 * t * t),
        },
    })
}

/// Conferencing messages of prelog one sent per cluster: required per-link
/// prelog times the enumerated link count.
pub fn conferencing_message_count(
    plan: &ClusterPlan<'_>,
    scheme: Scheme,
    m: u32,
    side: LinkSide,
) -> Result<u64> {
    if matches!(scheme, Scheme::S1 | Scheme::S2) {
        return Err(Error::invalid(
            "scheme",
            "message counts are defined for S3, S4 and S5 only",
        ));
    }
    let req = required_prelogs(scheme, plan.t, m)?;
    let links = count_links(plan, side)?;
    let total = req.side(side) * int(links as i64);
    if !total.is_integer() {
        return Err(Error::invalid(
            "scheme",
            format!("non-integral message count {total}"),
        ));
    }
    total
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::invalid("scheme", "message count overflows"))
}
