//! Cell partitions and decoding schedules of the converse argument.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Network, Sublattice};
use crate::rational::{int, ratio};
use crate::regions::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Pink,
    Blue,
    White,
}

impl Color {
    pub fn label(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Pink => "pink",
            Color::Blue => "blue",
            Color::White => "white",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    TwoColor,
    FourColor { d: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    kind: PartitionKind,
    cells: Vec<CellCoord>,
    colors: Vec<Color>,
    census: BTreeMap<Color, usize>,
}

impl Partition {
    fn new(kind: PartitionKind, cells: Vec<CellCoord>, colors: Vec<Color>) -> Self {
        let mut census = BTreeMap::new();
        let palette: &[Color] = match kind {
            PartitionKind::TwoColor => &[Color::Red, Color::White],
            PartitionKind::FourColor { .. } => {
                &[Color::Red, Color::Pink, Color::Blue, Color::White]
            }
        };
        for &c in palette {
            census.insert(c, 0);
        }
        for &c in &colors {
            *census.entry(c).or_insert(0) += 1;
        }
        Partition {
            kind,
            cells,
            colors,
            census,
        }
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn color_of(&self, c: CellCoord) -> Option<Color> {
        self.cells.binary_search(&c).ok().map(|i| self.colors[i])
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellCoord, Color)> + '_ {
        self.cells.iter().copied().zip(self.colors.iter().copied())
    }

    pub fn census(&self) -> &BTreeMap<Color, usize> {
        &self.census
    }

    pub fn count(&self, c: Color) -> usize {
        self.census.get(&c).copied().unwrap_or(0)
    }

    /// Limiting fraction of each color on the infinite lattice.
    pub fn limit(&self, c: Color) -> BigRational {
        match self.kind {
            PartitionKind::TwoColor => match c {
                Color::Red | Color::White => ratio(1, 2),
                _ => BigRational::zero(),
            },
            PartitionKind::FourColor { d } => {
                let n = (d as i64) * (d as i64) + d as i64 + 1;
                match c {
                    Color::Red | Color::Blue => ratio(1, 2 * n),
                    Color::Pink => ratio(3, n),
                    Color::White => ratio(n - 4, n),
                }
            }
        }
    }

    /// Per-color count, exact fraction, limit and absolute deviation.
    pub fn fraction_report(&self) -> Vec<CensusRow> {
        let k = self.num_cells() as i64;
        self.census
            .iter()
            .map(|(&color, &count)| {
                let fraction = ratio(count as i64, k);
                let limit = self.limit(color);
                let abs_error = (&fraction - &limit).abs();
                CensusRow {
                    color,
                    count,
                    fraction,
                    limit,
                    abs_error,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub color: Color,
    pub count: usize,
    pub fraction: BigRational,
    pub limit: BigRational,
    pub abs_error: BigRational,
}

/// Alternating columns: red when `q` is even.
pub fn partition_two(net: &Network) -> Partition {
    let cells = net.cells().to_vec();
    let colors = cells
        .iter()
        .map(|c| {
            if c.q.rem_euclid(2) == 0 {
                Color::Red
            } else {
                Color::White
            }
        })
        .collect();
    Partition::new(PartitionKind::TwoColor, cells, colors)
}

/// Sublattice spanned by `(d, 1)` holding the red and blue cells.
pub fn four_color_lattice(d: u32) -> Sublattice {
    Sublattice::spanned_by(CellCoord::new(d as i32, 1))
}

/// Red and blue cells alternate on the sublattice spanned by `(D, 1)`; the
/// six neighbours of every red cell are pink; everything else is white.
pub fn partition_four(net: &Network, d: u32) -> Result<Partition> {
    if d < 2 {
        return Err(Error::invalid("D", "four-color partition needs D >= 2"));
    }
    if net.radius() < 3 * d {
        return Err(Error::invalid(
            "radius",
            format!("need radius >= {} for D = {d}", 3 * d),
        ));
    }
    let lat = four_color_lattice(d);
    let cells = net.cells().to_vec();
    let mut colors = vec![Color::White; cells.len()];
    for (i, &c) in cells.iter().enumerate() {
        if let Some((a, _)) = lat.coords(c) {
            colors[i] = if a.rem_euclid(2) == 0 {
                Color::Red
            } else {
                Color::Blue
            };
        }
    }
    for i in 0..cells.len() {
        if colors[i] != Color::Red {
            continue;
        }
        for n in cells[i].neighbors() {
            if let Ok(j) = cells.binary_search(&n) {
                colors[j] = Color::Pink;
            }
        }
    }
    Ok(Partition::new(
        PartitionKind::FourColor { d },
        cells,
        colors,
    ))
}

/// Sum multiplexing-gain bound per user evaluated on the finite census.
pub fn bound_arithmetic(p: &Partition, params: &SystemParams) -> BigRational {
    let k = int(p.num_cells() as i64);
    let m = int(params.m as i64);
    let red = int(p.count(Color::Red) as i64);
    match p.kind {
        PartitionKind::TwoColor => {
            let conf = &params.mu_rx + int(2) * &params.mu_tx;
            (int(3) * &m * &red + int(4) * (&k - &red) * conf) / (int(3) * k)
        }
        PartitionKind::FourColor { .. } => {
            let kept =
                int((p.count(Color::Red) + p.count(Color::Pink) + p.count(Color::White)) as i64);
            m * kept / k
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    /// Output signals of all cells of a color.
    Y(Color),
    /// Inputs of all users in cells of a color.
    X(Color),
    /// Decoded messages of all users in cells of a color.
    MHat(Color),
    /// Receiver conferencing messages of one round.
    Q {
        pass: u8,
        round: u32,
        from: Color,
        to: Color,
    },
    /// Transmitter conferencing messages of one round.
    T {
        round: u32,
        from: Color,
        to: Color,
    },
    Genie,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Y(c) => write!(f, "Y[{c}]"),
            Resource::X(c) => write!(f, "X[{c}]"),
            Resource::MHat(c) => write!(f, "M^[{c}]"),
            Resource::Q {
                pass,
                round,
                from,
                to,
            } => write!(f, "Q{pass}.{round}[{from}->{to}]"),
            Resource::T { round, from, to } => write!(f, "T.{round}[{from}->{to}]"),
            Resource::Genie => write!(f, "G"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    RxConf,
    TxConf,
    Decode,
    Encode,
    Reconstruct,
}

impl StepKind {
    pub fn label(self) -> &'static str {
        match self {
            StepKind::RxConf => "RX_CONF",
            StepKind::TxConf => "TX_CONF",
            StepKind::Decode => "DECODE",
            StepKind::Encode => "ENCODE",
            StepKind::Reconstruct => "RECONSTRUCT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub kind: StepKind,
    pub phase: u32,
    pub round: Option<u32>,
    pub consumes: Vec<Resource>,
    pub produces: Vec<Resource>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulePlan {
    pub algorithm: u8,
    pub d_t: u32,
    pub d_r: u32,
    pub d: u32,
    pub initial: BTreeSet<Resource>,
    pub steps: Vec<Step>,
    /// Message sets the plan claims to decode.
    pub claims: Vec<Resource>,
}

fn q(pass: u8, round: u32, pairs: &[(Color, Color)]) -> Vec<Resource> {
    pairs
        .iter()
        .map(|&(from, to)| Resource::Q {
            pass,
            round,
            from,
            to,
        })
        .collect()
}

fn t_msgs(round: u32, pairs: &[(Color, Color)]) -> Vec<Resource> {
    pairs
        .iter()
        .map(|&(from, to)| Resource::T { round, from, to })
        .collect()
}

fn q_upto(
    pass: u8,
    rounds: std::ops::RangeInclusive<u32>,
    pairs: &[(Color, Color)],
) -> Vec<Resource> {
    rounds.flat_map(|r| q(pass, r, pairs)).collect()
}

fn t_upto(rounds: std::ops::RangeInclusive<u32>, pairs: &[(Color, Color)]) -> Vec<Resource> {
    rounds.flat_map(|r| t_msgs(r, pairs)).collect()
}

fn step(
    kind: StepKind,
    phase: u32,
    round: Option<u32>,
    consumes: Vec<Resource>,
    produces: Vec<Resource>,
) -> Step {
    Step {
        kind,
        phase,
        round,
        consumes,
        produces,
    }
}

use Color::{Blue, Pink, Red, White};

/// Plan for the two-color partition.
pub fn schedule_algorithm1(p: &Partition, d_t: u32, d_r: u32, d: u32) -> Result<SchedulePlan> {
    if p.kind != PartitionKind::TwoColor {
        return Err(Error::WrongPartition {
            expected: "two-color",
        });
    }
    const WR: (Color, Color) = (White, Red);
    const RR: (Color, Color) = (Red, Red);
    const RW: (Color, Color) = (Red, White);
    const WW: (Color, Color) = (White, White);

    let mut initial = BTreeSet::from([Resource::Y(Red), Resource::Genie]);
    initial.extend(q_upto(1, 1..=d_r, &[WR]));
    initial.extend(t_upto(1..=d_t, &[WR]));

    let mut steps = Vec::new();
    for j in 1..=d_r {
        let mut c = vec![Resource::Y(Red)];
        c.extend(q_upto(1, 1..=j - 1, &[WR, RR]));
        steps.push(step(StepKind::RxConf, 1, Some(j), c, q(1, j, &[RR])));
    }
    let mut c = vec![Resource::Y(Red)];
    c.extend(q_upto(1, 1..=d_r, &[WR, RR]));
    steps.push(step(
        StepKind::Decode,
        2,
        None,
        c,
        vec![Resource::MHat(Red)],
    ));
    for j in 1..=d_t {
        let mut c = vec![Resource::MHat(Red)];
        c.extend(t_upto(1..=j - 1, &[WR, RR]));
        steps.push(step(StepKind::TxConf, 3, Some(j), c, t_msgs(j, &[RR])));
    }
    let mut c = vec![Resource::MHat(Red)];
    c.extend(t_upto(1..=d_t, &[WR, RR]));
    steps.push(step(StepKind::Encode, 4, None, c, vec![Resource::X(Red)]));
    steps.push(step(
        StepKind::Reconstruct,
        4,
        None,
        vec![Resource::X(Red), Resource::Y(Red), Resource::Genie],
        vec![Resource::Y(White)],
    ));
    for j in 1..=d_r {
        let mut c = vec![Resource::Y(White), Resource::Y(Red)];
        c.extend(q_upto(2, 1..=j - 1, &[RW, WW]));
        steps.push(step(StepKind::RxConf, 5, Some(j), c, q(2, j, &[RW, WW])));
    }
    let mut c = vec![Resource::Y(White)];
    c.extend(q_upto(2, 1..=d_r, &[RW, WW]));
    steps.push(step(
        StepKind::Decode,
        5,
        None,
        c,
        vec![Resource::MHat(White)],
    ));

    Ok(SchedulePlan {
        algorithm: 1,
        d_t,
        d_r,
        d,
        initial,
        steps,
        claims: vec![Resource::MHat(Red), Resource::MHat(White)],
    })
}

/// Plan for the four-color partition.
pub fn schedule_algorithm2(p: &Partition, d_t: u32, d_r: u32, d: u32) -> Result<SchedulePlan> {
    if !matches!(p.kind, PartitionKind::FourColor { .. }) {
        return Err(Error::WrongPartition {
            expected: "four-color",
        });
    }
    const FIRST: [(Color, Color); 6] = [
        (White, Pink),
        (Pink, White),
        (Red, Pink),
        (Pink, Red),
        (Pink, Pink),
        (White, White),
    ];
    let colors = [Red, Pink, Blue, White];
    let all: Vec<(Color, Color)> = colors
        .iter()
        .flat_map(|&a| colors.iter().map(move |&b| (a, b)))
        .collect();
    let observed = [Resource::Y(Red), Resource::Y(Pink), Resource::Y(White)];

    let mut initial: BTreeSet<Resource> = observed.iter().copied().collect();
    initial.insert(Resource::Genie);

    let mut steps = Vec::new();
    for j in 1..=d_r {
        let mut c = observed.to_vec();
        c.extend(q_upto(1, 1..=j - 1, &FIRST));
        steps.push(step(StepKind::RxConf, 1, Some(j), c, q(1, j, &FIRST)));
    }
    let mut c = vec![Resource::Y(Red)];
    c.extend(q_upto(1, 1..=d_r, &[(Pink, Red)]));
    steps.push(step(
        StepKind::Decode,
        2,
        None,
        c,
        vec![Resource::MHat(Red)],
    ));
    for j in 1..=d_t {
        let mut c = vec![Resource::MHat(Red)];
        c.extend(t_upto(1..=j - 1, &FIRST));
        steps.push(step(StepKind::TxConf, 3, Some(j), c, t_msgs(j, &FIRST)));
    }
    let mut c = vec![Resource::MHat(Red)];
    c.extend(t_upto(1..=d_t, &[(Pink, Red)]));
    steps.push(step(StepKind::Encode, 4, None, c, vec![Resource::X(Red)]));
    let mut c = vec![Resource::X(Red)];
    c.extend(observed);
    c.push(Resource::Genie);
    steps.push(step(
        StepKind::Reconstruct,
        4,
        None,
        c,
        vec![Resource::Y(Blue)],
    ));
    for j in 1..=d_r {
        let mut c = vec![
            Resource::Y(Red),
            Resource::Y(Pink),
            Resource::Y(White),
            Resource::Y(Blue),
        ];
        c.extend(q_upto(2, 1..=j - 1, &all));
        steps.push(step(StepKind::RxConf, 5, Some(j), c, q(2, j, &all)));
    }
    for target in [Pink, White, Blue] {
        let mut c = vec![Resource::Y(target)];
        let into: Vec<(Color, Color)> = colors.iter().map(|&a| (a, target)).collect();
        c.extend(q_upto(2, 1..=d_r, &into));
        steps.push(step(
            StepKind::Decode,
            5,
            None,
            c,
            vec![Resource::MHat(target)],
        ));
    }

    Ok(SchedulePlan {
        algorithm: 2,
        d_t,
        d_r,
        d,
        initial,
        steps,
        claims: [Red, Pink, White, Blue].map(Resource::MHat).to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// (a) a step consumed something not yet available.
    MissingInput { step: usize, resource: Resource },
    /// (b) conferencing round outside `1..=budget`.
    RoundOutOfBudget {
        step: usize,
        round: u32,
        budget: u32,
    },
    /// (b) the same round used twice within one phase.
    DuplicateRound { step: usize, round: u32 },
    /// (c) a claimed message set was never decoded.
    MissingClaim(Resource),
    /// (d) `D_t + D_r > D`.
    DelayBudget { d_t: u32, d_r: u32, d: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingInput { step, resource } => {
                write!(f, "(a) step {step} consumes unavailable {resource}")
            }
            Violation::RoundOutOfBudget {
                step,
                round,
                budget,
            } => {
                write!(f, "(b) step {step} uses round {round} outside 1..={budget}")
            }
            Violation::DuplicateRound { step, round } => {
                write!(f, "(b) step {step} repeats round {round} within its phase")
            }
            Violation::MissingClaim(r) => write!(f, "(c) {r} is never produced"),
            Violation::DelayBudget { d_t, d_r, d } => {
                write!(f, "(d) D_t + D_r = {} exceeds D = {d}", d_t + d_r)
            }
        }
    }
}

/// Replays the plan. A step with missing inputs produces nothing.
pub fn validate_schedule(plan: &SchedulePlan) -> Vec<Violation> {
    let mut out = Vec::new();
    if plan.d_t + plan.d_r > plan.d {
        out.push(Violation::DelayBudget {
            d_t: plan.d_t,
            d_r: plan.d_r,
            d: plan.d,
        });
    }
    let mut have = plan.initial.clone();
    let mut seen: BTreeSet<(u32, StepKind, u32)> = BTreeSet::new();
    for (i, s) in plan.steps.iter().enumerate() {
        if let Some(round) = s.round {
            let budget = match s.kind {
                StepKind::RxConf => plan.d_r,
                StepKind::TxConf => plan.d_t,
                _ => 0,
            };
            if round == 0 || round > budget {
                out.push(Violation::RoundOutOfBudget {
                    step: i,
                    round,
                    budget,
                });
            }
            if !seen.insert((s.phase, s.kind, round)) {
                out.push(Violation::DuplicateRound { step: i, round });
            }
        }
        let missing: Vec<Resource> = s
            .consumes
            .iter()
            .filter(|r| !have.contains(r))
            .copied()
            .collect();
        if missing.is_empty() {
            have.extend(s.produces.iter().copied());
        } else {
            out.extend(
                missing
                    .into_iter()
                    .map(|resource| Violation::MissingInput { step: i, resource }),
            );
        }
    }
    for c in &plan.claims {
        if !have.contains(c) {
            out.push(Violation::MissingClaim(*c));
        }
    }
    out
}
