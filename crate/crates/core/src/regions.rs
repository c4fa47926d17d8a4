//! Exact multiplexing-gain regions in the `(S^F, S^S)` quadrant.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_decimal, int, ratio};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MGPoint {
    pub sf: BigRational,
    pub ss: BigRational,
}

impl MGPoint {
    pub fn new(sf: BigRational, ss: BigRational) -> Self {
        MGPoint { sf, ss }
    }

    pub fn origin() -> Self {
        MGPoint::new(BigRational::zero(), BigRational::zero())
    }

    pub fn sum(&self) -> BigRational {
        &self.sf + &self.ss
    }

    /// Both coordinates rounded to `places` decimals.
    pub fn display(&self, places: usize) -> (String, String) {
        (
            format_decimal(&self.sf, places),
            format_decimal(&self.ss, places),
        )
    }
}

impl fmt::Display for MGPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.display(4);
        write!(f, "({a}, {b})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    pub m: u32,
    pub mu_tx: BigRational,
    pub mu_rx: BigRational,
    pub d: u32,
}

impl SystemParams {
    pub fn new(m: u32, mu_tx: BigRational, mu_rx: BigRational, d: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("M", "must be at least 1"));
        }
        if d == 0 {
            return Err(Error::invalid("D", "must be at least 1"));
        }
        if mu_tx.is_negative() {
            return Err(Error::invalid("mu_tx", "must be non-negative"));
        }
        if mu_rx.is_negative() {
            return Err(Error::invalid("mu_rx", "must be non-negative"));
        }
        Ok(SystemParams { m, mu_tx, mu_rx, d })
    }

    fn half_m(&self) -> BigRational {
        ratio(self.m as i64, 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// No cooperation, fast messages only.
    S1,
    /// Slow messages only, Rx- or Tx-conferencing (time-shared with alignment).
    SlowOnly,
    /// Fast and slow messages with precoding (time-shared with `S1`).
    Mixed,
}

/// Which values of `t` enter the inner bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TRange {
    All,
    UpTo(u32),
    Only(u32),
}

impl TRange {
    fn admits(self, t: u32) -> bool {
        match self {
            TRange::All => true,
            TRange::UpTo(n) => t <= n,
            TRange::Only(n) => t == n,
        }
    }
}

/// Largest admissible `t` for a scheme at delay budget `d`, and the largest
/// `t` for which Tx and Rx prelogs can be pooled.
pub fn t_ranges(kind: SchemeKind, d: u32) -> (u32, u32) {
    match kind {
        SchemeKind::S1 => (0, 0),
        SchemeKind::SlowOnly => (d / 2, d / 4),
        SchemeKind::Mixed => {
            let e = d.saturating_sub(2);
            (e / 2, e / 4)
        }
    }
}

/// Prelog per link a scheme needs at full rate.
pub fn full_rate_prelog(kind: SchemeKind, t: u32, m: u32) -> BigRational {
    let (t, m) = (t as i64, m as i64);
    match kind {
        SchemeKind::S1 => BigRational::zero(),
        SchemeKind::SlowOnly => ratio(m * (2 * t - 1), 3),
        SchemeKind::Mixed => ratio(m * (4 * t * t - 1) * (2 * t + 3), 18 * t * t),
    }
}

/// Multiplexing-gain pair of one scheme, time-shared with its zero-prelog
/// partner as far as the conferencing budget allows.
pub fn scheme_point(kind: SchemeKind, t: u32, p: &SystemParams) -> Result<MGPoint> {
    let m = p.m as i64;
    if kind == SchemeKind::S1 {
        return Ok(MGPoint::new(p.half_m(), BigRational::zero()));
    }
    let (max_t, pooled) = t_ranges(kind, p.d);
    if t == 0 || t > max_t {
        return Err(Error::invalid(
            "t",
            format!("t = {t} outside 1..={max_t} for D = {}", p.d),
        ));
    }
    let available = if t <= pooled {
        &p.mu_tx + &p.mu_rx
    } else {
        p.mu_rx.clone()
    };
    let need = full_rate_prelog(kind, t, p.m);
    let lambda = (available / need).min(BigRational::one());
    let ti = t as i64;
    Ok(match kind {
        SchemeKind::SlowOnly => MGPoint::new(
            BigRational::zero(),
            p.half_m() + lambda * ratio(m * (3 * ti - 2), 6 * ti),
        ),
        SchemeKind::Mixed => MGPoint::new(
            p.half_m() - &lambda * ratio(m, 6),
            lambda * ratio(m * (2 * ti - 1), 3 * ti),
        ),
        SchemeKind::S1 => unreachable!(),
    })
}

/// Convex, downward-closed polygon with vertices listed counterclockwise
/// starting at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    vertices: Vec<MGPoint>,
}

impl Region {
    pub fn vertices(&self) -> &[MGPoint] {
        &self.vertices
    }

    pub fn sf_max(&self) -> BigRational {
        self.vertices
            .iter()
            .map(|v| v.sf.clone())
            .max()
            .unwrap_or_default()
    }

    pub fn ss_max(&self) -> BigRational {
        self.vertices
            .iter()
            .map(|v| v.ss.clone())
            .max()
            .unwrap_or_default()
    }

    pub fn has_vertex(&self, p: &MGPoint) -> bool {
        self.vertices.contains(p)
    }
}

fn cross(o: &MGPoint, a: &MGPoint, b: &MGPoint) -> BigRational {
    (&a.sf - &o.sf) * (&b.ss - &o.ss) - (&a.ss - &o.ss) * (&b.sf - &o.sf)
}

/// Smallest downward-closed convex region containing the points and the origin.
pub fn convex_hull(points: &[MGPoint]) -> Result<Region> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let zero = BigRational::zero();
    let mut pts: Vec<MGPoint> = Vec::with_capacity(points.len() * 3 + 1);
    pts.push(MGPoint::origin());
    for p in points {
        if p.sf.is_negative() || p.ss.is_negative() {
            return Err(Error::invalid(
                "point",
                format!("{p} leaves the first quadrant"),
            ));
        }
        pts.push(p.clone());
        pts.push(MGPoint::new(p.sf.clone(), zero.clone()));
        pts.push(MGPoint::new(zero.clone(), p.ss.clone()));
    }
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return Ok(Region { vertices: pts });
    }
    let mut lower: Vec<MGPoint> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= zero
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<MGPoint> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= zero
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // All points collinear: the chain doubles back on itself.
    if lower.len() == 2
        || (lower.len() > 2
            && lower
                .iter()
                .skip(1)
                .all(|p| cross(&lower[0], &lower[1], p).is_zero()))
    {
        let first = pts.first().cloned().expect("non-empty");
        let last = pts.last().cloned().expect("non-empty");
        return Ok(Region {
            vertices: vec![first, last],
        });
    }
    Ok(Region { vertices: lower })
}

pub fn contains(r: &Region, pt: &MGPoint) -> bool {
    let v = &r.vertices;
    match v.len() {
        0 => false,
        1 => &v[0] == pt,
        2 => {
            cross(&v[0], &v[1], pt).is_zero()
                && pt.sf >= v[0].sf.clone().min(v[1].sf.clone())
                && pt.sf <= v[0].sf.clone().max(v[1].sf.clone())
                && pt.ss >= v[0].ss.clone().min(v[1].ss.clone())
                && pt.ss <= v[0].ss.clone().max(v[1].ss.clone())
        }
        n => (0..n).all(|i| !cross(&v[i], &v[(i + 1) % n], pt).is_negative()),
    }
}

pub fn is_subset(a: &Region, b: &Region) -> bool {
    a.vertices.iter().all(|p| contains(b, p))
}

pub fn max_sum_mg(r: &Region) -> BigRational {
    r.vertices
        .iter()
        .map(MGPoint::sum)
        .max()
        .unwrap_or_default()
}

/// Achievable region: hull of every admissible scheme point.
pub fn inner_bound(p: &SystemParams) -> Region {
    inner_bound_for(p, TRange::All)
}

pub fn inner_bound_for(p: &SystemParams, range: TRange) -> Region {
    let mut pts = vec![
        MGPoint::origin(),
        scheme_point(SchemeKind::S1, 0, p).expect("S1 is always admissible"),
    ];
    for kind in [SchemeKind::SlowOnly, SchemeKind::Mixed] {
        let (max_t, _) = t_ranges(kind, p.d);
        for t in (1..=max_t).filter(|&t| range.admits(t)) {
            pts.push(scheme_point(kind, t, p).expect("t in range"));
        }
    }
    convex_hull(&pts).expect("non-empty")
}

/// Bound on `S^F + S^S` from the converse.
pub fn outer_sum_bound(p: &SystemParams) -> BigRational {
    let d = p.d as i64;
    let m = int(p.m as i64);
    let conf = p.half_m() + (int(2) * &p.mu_rx + int(4) * &p.mu_tx) / int(3);
    let geo = &m * (BigRational::one() - ratio(1, 2 * (1 + d + d * d)));
    conf.min(geo)
}

/// Value of `mu_rx + 2 mu_tx` beyond which the outer bound stops growing.
pub fn outer_saturation_level(m: u32, d: u32) -> BigRational {
    let (m, d) = (m as i64, d as i64);
    ratio(3 * m * (d * d + d), 4 * (d * d + d + 1))
}

/// Converse region: `S^F <= M/2` and `S^F + S^S <= outer_sum_bound`.
pub fn outer_bound(p: &SystemParams) -> Region {
    let b = outer_sum_bound(p);
    let h = p.half_m();
    let zero = BigRational::zero();
    convex_hull(&[
        MGPoint::new(h.clone(), zero.clone()),
        MGPoint::new(h.clone(), &b - &h),
        MGPoint::new(zero, b),
    ])
    .expect("non-empty")
}

/// Points along the upper-right boundary from `(0, ss_max)` to `(sf_max, 0)`.
/// Every vertex on that chain is included; the remaining `n - vertices`
/// points subdivide edges in proportion to their L1 length.
pub fn boundary_samples(r: &Region, n: usize) -> Result<Vec<MGPoint>> {
    if n < 2 {
        return Err(Error::invalid("samples", "need at least 2"));
    }
    let zero = BigRational::zero();
    let mut chain = vec![MGPoint::new(zero.clone(), r.ss_max())];
    for v in r.vertices.iter().skip(1).rev() {
        if v.sf.is_positive() && v.ss.is_positive() {
            chain.push(v.clone());
        }
    }
    chain.push(MGPoint::new(r.sf_max(), zero));
    chain.dedup();

    let edges = chain.len().saturating_sub(1);
    let extra = n.saturating_sub(chain.len());
    if edges == 0 || extra == 0 {
        return Ok(chain);
    }
    let lens: Vec<BigRational> = chain
        .windows(2)
        .map(|w| (&w[1].sf - &w[0].sf).abs() + (&w[1].ss - &w[0].ss).abs())
        .collect();
    let total: BigRational = lens.iter().cloned().sum();
    let quotas: Vec<BigRational> = lens
        .iter()
        .map(|l| l * int(extra as i64) / &total)
        .collect();
    let mut alloc: Vec<usize> = quotas
        .iter()
        .map(|q| usize::try_from(q.floor().to_integer()).unwrap_or(0))
        .collect();
    let mut left = extra - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..edges).collect();
    order.sort_by(|&a, &b| {
        let fa = &quotas[a] - quotas[a].floor();
        let fb = &quotas[b] - quotas[b].floor();
        fb.cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }

    let mut out = Vec::with_capacity(n);
    for (i, w) in chain.windows(2).enumerate() {
        out.push(w[0].clone());
        let parts = alloc[i] as i64 + 1;
        for k in 1..parts {
            let f = ratio(k, parts);
            let one_minus = BigRational::one() - &f;
            out.push(MGPoint::new(
                &w[0].sf * &one_minus + &w[1].sf * &f,
                &w[0].ss * &one_minus + &w[1].ss * &f,
            ));
        }
    }
    out.push(chain.last().cloned().expect("non-empty"));
    Ok(out)
}

/// Exact `(numerator, denominator)` pair.
pub fn num_den(x: &BigRational) -> (BigInt, BigInt) {
    (x.numer().clone(), x.denom().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: (i64, i64), b: (i64, i64)) -> MGPoint {
        MGPoint::new(ratio(a.0, a.1), ratio(b.0, b.1))
    }

    fn params(m: u32, tx: (i64, i64), rx: (i64, i64), d: u32) -> SystemParams {
        SystemParams::new(m, ratio(tx.0, tx.1), ratio(rx.0, rx.1), d).unwrap()
    }

    #[test]
    fn hull_basics() {
        assert!(matches!(convex_hull(&[]), Err(Error::EmptyInput)));
        let single = convex_hull(&[MGPoint::origin()]).unwrap();
        assert_eq!(single.vertices(), &[MGPoint::origin()]);
        let tri =
            convex_hull(&[pt((0, 1), (1, 1)), pt((1, 1), (0, 1)), pt((1, 2), (1, 2))]).unwrap();
        assert_eq!(
            tri.vertices(),
            &[MGPoint::origin(), pt((1, 1), (0, 1)), pt((0, 1), (1, 1))]
        );
        let dup =
            convex_hull(&[pt((0, 1), (1, 1)), pt((1, 1), (0, 1)), pt((1, 1), (0, 1))]).unwrap();
        assert_eq!(dup, tri);
    }

    #[test]
    fn segment_regions() {
        let seg = convex_hull(&[pt((2, 1), (0, 1))]).unwrap();
        assert_eq!(seg.vertices().len(), 2);
        assert!(contains(&seg, &pt((1, 1), (0, 1))));
        assert!(!contains(&seg, &pt((1, 1), (1, 1))));
    }

    #[test]
    fn mixed_point_examples() {
        let big = params(3, (100, 1), (100, 1), 20);
        assert_eq!(
            scheme_point(SchemeKind::Mixed, 4, &big).unwrap(),
            pt((1, 1), (7, 4))
        );
        let small = params(3, (1, 10), (1, 5), 20);
        let p = scheme_point(SchemeKind::Mixed, 4, &small).unwrap();
        assert_eq!(p.display(4), ("1.4792".into(), "0.0727".into()));
        let s = scheme_point(SchemeKind::SlowOnly, 4, &small).unwrap();
        assert_eq!(s.display(4), ("0.0000".into(), "1.5536".into()));
    }

    #[test]
    fn scheme_point_rejects_bad_t() {
        let p = params(3, (1, 1), (1, 1), 20);
        assert!(scheme_point(SchemeKind::SlowOnly, 11, &p).is_err());
        assert!(scheme_point(SchemeKind::Mixed, 10, &p).is_err());
        assert!(scheme_point(SchemeKind::Mixed, 0, &p).is_err());
        assert!(SystemParams::new(3, ratio(-1, 2), int(0), 4).is_err());
    }

    #[test]
    fn zero_prelog_inner_bound() {
        let r = inner_bound(&params(3, (0, 1), (0, 1), 20));
        assert_eq!(
            r.vertices(),
            &[MGPoint::origin(), pt((3, 2), (0, 1)), pt((0, 1), (3, 2))]
        );
    }

    #[test]
    fn outer_at_zero_prelog_is_triangle() {
        for d in 1..6 {
            let r = outer_bound(&params(2, (0, 1), (0, 1), d));
            assert_eq!(
                r.vertices(),
                &[MGPoint::origin(), pt((1, 1), (0, 1)), pt((0, 1), (1, 1))]
            );
        }
    }

    #[test]
    fn outer_saturation_matches_legend() {
        assert_eq!(format_decimal(&outer_saturation_level(3, 20), 4), "2.2447");
        let x = outer_saturation_level(3, 20);
        // The legend truncates rather than rounds.
        assert!(x > ratio(22446, 10000) && x < ratio(22447, 10000));
    }

    #[test]
    fn samples_include_vertices() {
        let r = inner_bound_for(&params(3, (100, 1), (100, 1), 20), TRange::Only(4));
        let s = boundary_samples(&r, 2).unwrap();
        assert_eq!(
            s,
            vec![pt((0, 1), (11, 4)), pt((1, 1), (7, 4)), pt((3, 2), (0, 1))]
        );
        let s = boundary_samples(&r, 12).unwrap();
        assert_eq!(s.len(), 12);
        for v in r.vertices().iter().skip(1) {
            assert!(s.contains(v));
        }
        for p in &s {
            assert!(contains(&r, p));
        }
        assert!(boundary_samples(&r, 1).is_err());
    }

    #[test]
    fn samples_on_triangle() {
        let r = outer_bound(&params(2, (0, 1), (0, 1), 3));
        assert_eq!(
            boundary_samples(&r, 2).unwrap(),
            vec![pt((0, 1), (1, 1)), pt((1, 1), (0, 1))]
        );
    }
}
