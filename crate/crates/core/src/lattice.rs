//! Finite sectorized hexagonal network.
//!
//! Cells live on flat-topped hexagons addressed by axial coordinates `(q, r)`.
//! With the y axis pointing up, the unit directions are
//!
//! ```text
//!   N  = ( 0, +1)    NE = (+1, 0)    SE = (+1, -1)
//!   S  = ( 0, -1)    SW = (-1, 0)    NW = (-1, +1)
//! ```
//!
//! Each cell is split into three kite-shaped sectors by segments from the
//! cell centre to the midpoints of its N, SE and SW edges. The sector facing
//! S owns the whole S edge and half of the SE and SW edges, and similarly for
//! the NE and NW sectors. Two sectors interfere exactly when they share a
//! piece of a cell border, which gives every sector four interferers in two
//! neighbouring cells plus one more cell on each side. Equivalently the
//! interference graph is the line graph of the honeycomb formed by the cell
//! borders, and every honeycomb vertex is a triangle of mutually interfering
//! sectors (see [`Triangle`]).

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Axial unit vectors in the order N, NE, SE, S, SW, NW.
pub const HEX_DIRECTIONS: [(i32, i32); 6] = [(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCoord {
    pub q: i32,
    pub r: i32,
}

impl CellCoord {
    pub const ORIGIN: CellCoord = CellCoord { q: 0, r: 0 };

    pub const fn new(q: i32, r: i32) -> Self {
        CellCoord { q, r }
    }

    pub fn offset(self, dq: i32, dr: i32) -> Self {
        CellCoord::new(self.q + dq, self.r + dr)
    }

    /// Hexagonal hop distance.
    pub fn distance(self, other: CellCoord) -> u32 {
        let dq = (self.q - other.q) as i64;
        let dr = (self.r - other.r) as i64;
        dq.abs().max(dr.abs()).max((dq + dr).abs()) as u32
    }

    pub fn norm(self) -> u32 {
        self.distance(CellCoord::ORIGIN)
    }

    pub fn neighbors(self) -> [CellCoord; 6] {
        HEX_DIRECTIONS.map(|(dq, dr)| self.offset(dq, dr))
    }

    pub fn is_adjacent(self, other: CellCoord) -> bool {
        self.distance(other) == 1
    }

    /// Rotation by +60 degrees about the origin.
    pub fn rotate60(self) -> Self {
        CellCoord::new(-self.r, self.q + self.r)
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

pub fn cell_distance(c1: CellCoord, c2: CellCoord) -> u32 {
    c1.distance(c2)
}

/// Sector orientation. The labels mean the same direction in every cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    /// Faces the S edge.
    South = 0,
    /// Faces the NE edge.
    NorthEast = 1,
    /// Faces the NW edge.
    NorthWest = 2,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [
        Orientation::South,
        Orientation::NorthEast,
        Orientation::NorthWest,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Orientation::South),
            1 => Some(Orientation::NorthEast),
            2 => Some(Orientation::NorthWest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorId {
    pub cell: CellCoord,
    pub orientation: Orientation,
}

impl SectorId {
    pub const fn new(cell: CellCoord, orientation: Orientation) -> Self {
        SectorId { cell, orientation }
    }

    pub fn translate(self, dq: i32, dr: i32) -> Self {
        SectorId::new(self.cell.offset(dq, dr), self.orientation)
    }

    /// The four interferers on the infinite lattice.
    pub fn lattice_interferers(self) -> [SectorId; 4] {
        use Orientation::*;
        let c = self.cell;
        let s = |dq, dr, o| SectorId::new(c.offset(dq, dr), o);
        match self.orientation {
            South => [
                s(0, -1, NorthEast),
                s(0, -1, NorthWest),
                s(1, -1, NorthWest),
                s(-1, 0, NorthEast),
            ],
            NorthEast => [
                s(1, 0, South),
                s(1, 0, NorthWest),
                s(0, 1, South),
                s(1, -1, NorthWest),
            ],
            NorthWest => [
                s(-1, 1, South),
                s(-1, 1, NorthEast),
                s(0, 1, South),
                s(-1, 0, NorthEast),
            ],
        }
    }

    /// The two interference triangles (honeycomb vertices) this sector belongs to.
    pub fn triangles(self) -> [Triangle; 2] {
        use Orientation::*;
        let c = self.cell;
        match self.orientation {
            South => [Triangle::lower_left(c), Triangle::lower_right(c)],
            NorthEast => [
                Triangle::lower_left(c.offset(1, 0)),
                Triangle::lower_right(c.offset(0, 1)),
            ],
            NorthWest => [
                Triangle::lower_left(c.offset(0, 1)),
                Triangle::lower_right(c.offset(-1, 1)),
            ],
        }
    }
}

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.cell, self.orientation.index())
    }
}

/// A honeycomb vertex: three sectors of three mutually adjacent cells that
/// pairwise interfere. Each cell anchors two of them, at the two ends of its
/// S edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub anchor: CellCoord,
    pub right: bool,
}

impl Triangle {
    pub fn lower_left(anchor: CellCoord) -> Self {
        Triangle {
            anchor,
            right: false,
        }
    }

    pub fn lower_right(anchor: CellCoord) -> Self {
        Triangle {
            anchor,
            right: true,
        }
    }

    pub fn sectors(self) -> [SectorId; 3] {
        use Orientation::*;
        let c = self.anchor;
        if self.right {
            [
                SectorId::new(c, South),
                SectorId::new(c.offset(0, -1), NorthEast),
                SectorId::new(c.offset(1, -1), NorthWest),
            ]
        } else {
            [
                SectorId::new(c, South),
                SectorId::new(c.offset(0, -1), NorthWest),
                SectorId::new(c.offset(-1, 0), NorthEast),
            ]
        }
    }
}

/// Immutable hexagonal ball of cells with its interference and receiver
/// cooperation topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    radius: u32,
    antennas: u32,
    cells: Vec<CellCoord>,
    cell_index: HashMap<CellCoord, usize>,
    tx: Vec<Vec<usize>>,
    rx: Vec<Vec<usize>>,
}

pub fn build_network(radius: u32, antennas_per_user: u32) -> Result<Network> {
    Network::new(radius, antennas_per_user)
}

impl Network {
    pub fn new(radius: u32, antennas_per_user: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::invalid("radius", "must be at least 1"));
        }
        if antennas_per_user == 0 {
            return Err(Error::invalid("M", "must be at least 1"));
        }
        let rad = radius as i32;
        let mut cells = Vec::with_capacity(1 + 3 * (radius as usize) * (radius as usize + 1));
        for q in -rad..=rad {
            let lo = (-rad).max(-q - rad);
            let hi = rad.min(-q + rad);
            for r in lo..=hi {
                cells.push(CellCoord::new(q, r));
            }
        }
        let cell_index: HashMap<CellCoord, usize> =
            cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();

        let mut tx = Vec::with_capacity(cells.len() * 3);
        for &cell in &cells {
            for o in Orientation::ALL {
                let mut nb: Vec<usize> = SectorId::new(cell, o)
                    .lattice_interferers()
                    .iter()
                    .filter_map(|s| {
                        cell_index
                            .get(&s.cell)
                            .map(|ci| ci * 3 + s.orientation as usize)
                    })
                    .collect();
                nb.sort_unstable();
                tx.push(nb);
            }
        }
        let rx = cells
            .iter()
            .map(|c| {
                let mut nb: Vec<usize> = c
                    .neighbors()
                    .iter()
                    .filter_map(|n| cell_index.get(n).copied())
                    .collect();
                nb.sort_unstable();
                nb
            })
            .collect();

        Ok(Network {
            radius,
            antennas: antennas_per_user,
            cells,
            cell_index,
            tx,
            rx,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn antennas_per_user(&self) -> u32 {
        self.antennas
    }

    /// Cells in lexicographic `(q, r)` order.
    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_sectors(&self) -> usize {
        self.cells.len() * 3
    }

    pub fn contains_cell(&self, c: CellCoord) -> bool {
        self.cell_index.contains_key(&c)
    }

    pub fn contains_sector(&self, k: SectorId) -> bool {
        self.contains_cell(k.cell)
    }

    pub fn cell_index(&self, c: CellCoord) -> Option<usize> {
        self.cell_index.get(&c).copied()
    }

    pub fn sector_index(&self, k: SectorId) -> Option<usize> {
        self.cell_index(k.cell)
            .map(|ci| ci * 3 + k.orientation as usize)
    }

    pub fn sector_at(&self, idx: usize) -> SectorId {
        SectorId::new(
            self.cells[idx / 3],
            Orientation::from_index((idx % 3) as u8).expect("index mod 3"),
        )
    }

    /// Sectors in lexicographic order.
    pub fn sectors(&self) -> impl Iterator<Item = SectorId> + '_ {
        self.cells
            .iter()
            .flat_map(|&c| Orientation::ALL.map(|o| SectorId::new(c, o)))
    }

    /// Hops from `c` to the lattice boundary; 0 on the outermost ring.
    pub fn depth(&self, c: CellCoord) -> Option<u32> {
        self.contains_cell(c).then(|| self.radius - c.norm())
    }

    pub(crate) fn tx_indices(&self, idx: usize) -> &[usize] {
        &self.tx[idx]
    }

    pub fn tx_neighbors(&self, k: SectorId) -> Result<Vec<SectorId>> {
        let idx = self.sector_index(k).ok_or(Error::UnknownSector(k))?;
        Ok(self.tx[idx].iter().map(|&j| self.sector_at(j)).collect())
    }

    pub fn rx_neighbors(&self, c: CellCoord) -> Option<Vec<CellCoord>> {
        let idx = self.cell_index(c)?;
        Some(self.rx[idx].iter().map(|&j| self.cells[j]).collect())
    }

    /// Each unordered interfering pair once, `(a, b)` with `a < b`, sorted.
    pub fn interference_graph(&self) -> Vec<(SectorId, SectorId)> {
        let mut edges = Vec::with_capacity(self.num_sectors() * 2);
        for (i, nb) in self.tx.iter().enumerate() {
            for &j in nb {
                if i < j {
                    edges.push((self.sector_at(i), self.sector_at(j)));
                }
            }
        }
        edges
    }

    /// Every directed interference relation, sorted lexicographically.
    pub fn directed_interference(&self) -> Vec<(SectorId, SectorId)> {
        let mut out = Vec::with_capacity(self.num_sectors() * 4);
        for (i, nb) in self.tx.iter().enumerate() {
            for &j in nb {
                out.push((self.sector_at(i), self.sector_at(j)));
            }
        }
        out
    }
}

pub fn tx_neighbors(net: &Network, k: SectorId) -> Result<Vec<SectorId>> {
    net.tx_neighbors(k)
}

pub fn interference_graph(net: &Network) -> Vec<(SectorId, SectorId)> {
    net.interference_graph()
}

/// A sublattice of the cell lattice spanned by `a` and its 60-degree rotation.
/// Such sublattices are invariant under the hexagonal rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sublattice {
    a: CellCoord,
    b: CellCoord,
}

impl Sublattice {
    pub fn spanned_by(a: CellCoord) -> Self {
        assert!(a != CellCoord::ORIGIN, "generator must be non-zero");
        Sublattice { a, b: a.rotate60() }
    }

    pub fn generators(&self) -> (CellCoord, CellCoord) {
        (self.a, self.b)
    }

    /// Number of cells per sublattice point.
    pub fn index(&self) -> u64 {
        self.det().unsigned_abs()
    }

    fn det(&self) -> i64 {
        self.a.q as i64 * self.b.r as i64 - self.b.q as i64 * self.a.r as i64
    }

    /// Coordinates `(i, j)` with `c = i a + j b`, as exact numerators over `det`.
    fn raw_coords(&self, c: CellCoord) -> (i64, i64) {
        let (q, r) = (c.q as i64, c.r as i64);
        (
            self.b.r as i64 * q - self.b.q as i64 * r,
            -(self.a.r as i64) * q + self.a.q as i64 * r,
        )
    }

    pub fn coords(&self, c: CellCoord) -> Option<(i64, i64)> {
        let det = self.det();
        let (ni, nj) = self.raw_coords(c);
        (ni % det == 0 && nj % det == 0).then(|| (ni / det, nj / det))
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.coords(c).is_some()
    }

    pub fn point(&self, i: i64, j: i64) -> CellCoord {
        CellCoord::new(
            (i * self.a.q as i64 + j * self.b.q as i64) as i32,
            (i * self.a.r as i64 + j * self.b.r as i64) as i32,
        )
    }

    /// Canonical representative of `c` modulo the sublattice (lies in the
    /// fundamental parallelogram at the origin).
    pub fn reduce(&self, c: CellCoord) -> CellCoord {
        let det = self.det();
        let (ni, nj) = self.raw_coords(c);
        let fi = ni.div_euclid(det);
        let fj = nj.div_euclid(det);
        let p = self.point(fi, fj);
        CellCoord::new(c.q - p.q, c.r - p.r)
    }

    /// Minimal hop distance from `c` to the sublattice and every sublattice
    /// point at that distance, sorted.
    pub fn nearest(&self, c: CellCoord) -> (u32, Vec<CellCoord>) {
        let det = self.det();
        let (ni, nj) = self.raw_coords(c);
        let fi = ni.div_euclid(det);
        let fj = nj.div_euclid(det);
        let mut best = u32::MAX;
        let mut found = Vec::new();
        for di in -2..=3 {
            for dj in -2..=3 {
                let p = self.point(fi + di, fj + dj);
                let d = c.distance(p);
                if d < best {
                    best = d;
                    found.clear();
                    found.push(p);
                } else if d == best {
                    found.push(p);
                }
            }
        }
        found.sort_unstable();
        (best, found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashSet, VecDeque};

    fn bfs_distance(net: &Network, from: CellCoord, to: CellCoord) -> Option<u32> {
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([(from, 0)]);
        while let Some((c, d)) = queue.pop_front() {
            if c == to {
                return Some(d);
            }
            for n in net.rx_neighbors(c).unwrap() {
                if seen.insert(n) {
                    queue.push_back((n, d + 1));
                }
            }
        }
        None
    }

    #[test]
    fn ball_sizes() {
        let n1 = build_network(1, 1).unwrap();
        assert_eq!((n1.num_cells(), n1.num_sectors()), (7, 21));
        let n2 = build_network(2, 1).unwrap();
        assert_eq!((n2.num_cells(), n2.num_sectors()), (19, 57));
    }

    #[test]
    fn rejects_zero_parameters() {
        assert!(matches!(
            build_network(0, 1),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            build_network(3, 0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn interior_sectors_have_four_interferers() {
        let net = build_network(8, 3).unwrap();
        for k in net.sectors() {
            let nb = net.tx_neighbors(k).unwrap();
            if net.depth(k.cell).unwrap() >= 2 {
                assert_eq!(nb.len(), 4, "{k}");
            }
            assert!(nb.len() <= 4);
            for n in nb {
                assert!(k.cell.is_adjacent(n.cell), "{k} -> {n}");
            }
        }
    }

    #[test]
    fn corner_sector_is_truncated() {
        let net = build_network(1, 1).unwrap();
        let corner = SectorId::new(CellCoord::new(1, 0), Orientation::NorthEast);
        assert!(net.tx_neighbors(corner).unwrap().len() < 4);
    }

    #[test]
    fn unknown_sector_is_rejected() {
        let net = build_network(1, 1).unwrap();
        let far = SectorId::new(CellCoord::new(5, 0), Orientation::South);
        assert_eq!(net.tx_neighbors(far), Err(Error::UnknownSector(far)));
    }

    #[test]
    fn symmetric_on_radius_four() {
        let net = build_network(4, 1).unwrap();
        for k in net.sectors() {
            for l in net.tx_neighbors(k).unwrap() {
                assert!(net.tx_neighbors(l).unwrap().contains(&k), "{k} {l}");
            }
        }
    }

    #[test]
    fn distances_against_bfs() {
        let net = build_network(4, 1).unwrap();
        assert_eq!(cell_distance(CellCoord::ORIGIN, CellCoord::ORIGIN), 0);
        assert_eq!(cell_distance(CellCoord::ORIGIN, CellCoord::new(0, 1)), 1);
        assert_eq!(cell_distance(CellCoord::ORIGIN, CellCoord::new(3, 0)), 3);
        for &a in net.cells() {
            for &b in net.cells().iter().step_by(5) {
                assert_eq!(Some(a.distance(b)), bfs_distance(&net, a, b));
            }
        }
    }

    #[test]
    fn triangles_are_cliques() {
        let c = CellCoord::new(2, -1);
        for tri in [Triangle::lower_left(c), Triangle::lower_right(c)] {
            let s = tri.sectors();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(s[i].lattice_interferers().contains(&s[j]));
                    }
                }
            }
            for k in s {
                assert!(k.triangles().contains(&tri));
            }
        }
    }

    #[test]
    fn sublattice_index_and_reduction() {
        let l = Sublattice::spanned_by(CellCoord::new(4, -2));
        assert_eq!(l.index(), 12);
        assert!(l.contains(CellCoord::new(2, 2)));
        assert!(!l.contains(CellCoord::new(1, 0)));
        let reps: HashSet<CellCoord> = build_network(10, 1)
            .unwrap()
            .cells()
            .iter()
            .map(|&c| l.reduce(c))
            .collect();
        assert_eq!(reps.len(), 12);
        let (d, near) = l.nearest(CellCoord::new(2, 0));
        assert_eq!(d, 2);
        assert_eq!(near.len(), 3);
    }
}
