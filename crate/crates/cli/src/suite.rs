//! Checks run by `verify-all`. Each check is deterministic given its
//! arguments and reports a single line.

use std::collections::HashMap;
use std::fmt;

use hexmg::clustering::{
    assign_messages, clusters, conferencing_message_count, count_links, required_prelogs,
    AssignMode, LinkSide, Role, Scheme,
};
use hexmg::converse::{
    partition_four, partition_two, schedule_algorithm1, schedule_algorithm2, validate_schedule,
    Partition, Resource, SchedulePlan, StepKind,
};
use hexmg::lattice::{build_network, SectorId};
use hexmg::rational::{int, ratio, to_f64};
use hexmg::regions::{
    inner_bound, inner_bound_for, is_subset, outer_bound, scheme_point, t_ranges, MGPoint, Region,
    SchemeKind, SystemParams, TRange,
};
use hexmg::zf::{run_trials, ZfScheme};
use hexmg::Result;
use num_rational::BigRational;

pub const FRACTION_TOL: f64 = 0.02;
pub const ZF_TOL: f64 = 1e-9;
pub const ZF_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((ok, detail)) => Check::new(name, ok, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn shown(r: &Region) -> Vec<(String, String)> {
    r.vertices().iter().map(|v| v.display(4)).collect()
}

fn has_all(r: &Region, want: &[(&str, &str)]) -> bool {
    let s = shown(r);
    want.iter()
        .all(|(a, b)| s.contains(&(a.to_string(), b.to_string())))
}

/// Interior 4-regularity, symmetry and cross-cell edges.
pub fn lattice_check(radius: u32) -> Check {
    Check::from_result(
        "lattice",
        (|| {
            let net = build_network(radius, 1)?;
            let edges = net.interference_graph();
            let mut degree: HashMap<SectorId, usize> = HashMap::new();
            for (a, b) in &edges {
                *degree.entry(*a).or_default() += 1;
                *degree.entry(*b).or_default() += 1;
            }
            let mut ok = edges.iter().all(|(a, b)| a.cell != b.cell);
            let mut interior = 0;
            for k in net.sectors() {
                let nb = net.tx_neighbors(k)?;
                for l in &nb {
                    ok &= net.tx_neighbors(*l)?.contains(&k);
                }
                if net.depth(k.cell).unwrap_or(0) >= 2 {
                    interior += 1;
                    ok &= nb.len() == 4;
                }
            }
            Ok((
                ok,
                format!(
                    "radius {radius}, {} edges, {interior} interior sectors of degree 4",
                    edges.len()
                ),
            ))
        })(),
    )
}

/// Intercepts and vertices at M = 3, D = 20, t = 4.
pub fn region_vertices_check() -> Check {
    Check::from_result(
        "region vertices",
        (|| {
            let large = SystemParams::new(3, int(100), int(100), 20)?;
            let small = SystemParams::new(3, ratio(1, 10), ratio(1, 5), 20)?;
            let ok = has_all(
                &outer_bound(&large),
                &[("0.0000", "2.9964"), ("1.5000", "1.4964")],
            ) && has_all(
                &outer_bound(&small),
                &[("0.0000", "1.7667"), ("1.5000", "0.2667")],
            ) && has_all(
                &inner_bound_for(&large, TRange::Only(4)),
                &[
                    ("0.0000", "2.7500"),
                    ("1.0000", "1.7500"),
                    ("1.5000", "0.0000"),
                ],
            ) && has_all(
                &inner_bound_for(&small, TRange::Only(4)),
                &[
                    ("0.0000", "1.5536"),
                    ("1.4792", "0.0727"),
                    ("1.5000", "0.0000"),
                ],
            );
            Ok((
                ok,
                "outer and inner vertices at large and small prelogs".into(),
            ))
        })(),
    )
}

/// Enumerated link counts, message counts and prelog formulas.
pub fn counts_check() -> Check {
    Check::from_result(
        "counts",
        (|| {
            let mut ok = true;
            for t in 1..=4u32 {
                let net = build_network(6 * t, 1)?;
                let plan = clusters(&net, t)?;
                let t2 = (t * t) as u64;
                ok &= count_links(&plan, LinkSide::Tx)? == 36 * t2;
                ok &= count_links(&plan, LinkSide::Rx)? == 18 * t2;
                let tt = t as u64;
                for m in [1u32, 3] {
                    let mm = m as u64;
                    ok &= conferencing_message_count(&plan, Scheme::S4, m, LinkSide::Tx)?
                        == 2 * mm * tt * (8 * t2 + 3 * tt - 2);
                    ok &= conferencing_message_count(&plan, Scheme::S4, m, LinkSide::Rx)?
                        == 3 * mm * (3 * t2 - 1);
                }
            }
            ok &= required_prelogs(Scheme::S4, 1, 3)?.mu_tx == ratio(3, 2);
            ok &= required_prelogs(Scheme::S4, 1, 3)?.mu_rx == int(1);
            ok &= required_prelogs(Scheme::S5, 1, 3)?.mu_tx == ratio(1, 2);
            ok &= required_prelogs(Scheme::S5, 1, 3)?.mu_rx == int(2);
            Ok((ok, "t in 1..=4 at radius 6t, M in {1, 3}".into()))
        })(),
    )
}

/// Largest deviation of the interior role fractions from their limits.
pub fn role_error(t: u32, radius: u32, mode: AssignMode) -> Result<f64> {
    let net = build_network(radius, 1)?;
    let plan = assign_messages(&clusters(&net, t)?, mode)?;
    let c = plan.interior_census()?;
    let tf = t as f64;
    let (fast, slow) = match mode {
        AssignMode::Mixed => (1.0 / 3.0, (2.0 * tf - 1.0) / (3.0 * tf)),
        AssignMode::SlowOnly => (0.0, (3.0 * tf - 1.0) / (3.0 * tf)),
    };
    Ok([
        (c.fraction(Role::Silent) - 1.0 / (3.0 * tf)).abs(),
        (c.fraction(Role::Fast) - fast).abs(),
        (c.fraction(Role::Slow) - slow).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

pub fn partition_error(p: &Partition) -> BigRational {
    p.fraction_report()
        .into_iter()
        .map(|r| r.abs_error)
        .max()
        .unwrap_or_else(|| int(0))
}

/// Role fractions for t in 1..=4 and both partitions at `radius`, and
/// shrinking errors from radius 20 to 40.
pub fn fractions_check(radius: u32) -> Check {
    Check::from_result(
        "fractions",
        (|| {
            let mut ok = true;
            let mut worst = 0.0f64;
            for t in 1..=4 {
                for mode in [AssignMode::Mixed, AssignMode::SlowOnly] {
                    let e = role_error(t, radius, mode)?;
                    worst = worst.max(e);
                    ok &= e <= FRACTION_TOL;
                    ok &= role_error(t, 40, mode)? < role_error(t, 20, mode)?;
                }
            }
            let two =
                |r| Ok::<_, hexmg::Error>(partition_error(&partition_two(&build_network(r, 1)?)));
            let four = |r| {
                Ok::<_, hexmg::Error>(partition_error(&partition_four(&build_network(r, 1)?, 3)?))
            };
            let (e2, e4) = (two(radius)?, four(radius)?);
            worst = worst.max(to_f64(&e2)).max(to_f64(&e4));
            ok &= to_f64(&e2) <= FRACTION_TOL && to_f64(&e4) <= FRACTION_TOL;
            ok &= two(40)? < two(20)? && four(40)? < four(20)?;
            Ok((ok, format!("radius {radius}, largest error {worst:.6}")))
        })(),
    )
}

/// Seeded zero-forcing trials for (t, M) in {1, 2}^2 and every scheme.
pub fn zf_checks(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for t in 1..=2u32 {
        for m in 1..=2usize {
            for (mode, scheme, label) in [
                (AssignMode::SlowOnly, ZfScheme::S3, "s3"),
                (AssignMode::Mixed, ZfScheme::S4, "s4"),
                (AssignMode::Mixed, ZfScheme::S5, "s5"),
            ] {
                let name = format!("zf t={t} m={m} {label}");
                out.push(Check::from_result(
                    &name,
                    (|| {
                        let net = build_network(3 * t + 2, 1)?;
                        let plan = assign_messages(&clusters(&net, t)?, mode)?;
                        let c = plan.interior_cluster()?;
                        let trials = run_trials(&plan, c, m, scheme, seed, ZF_TRIALS, ZF_TOL)?;
                        let passed = trials
                            .iter()
                            .filter(
                                |o| matches!(o.report, Ok(r) if r.solvable && r.min_self_rank == m),
                            )
                            .count();
                        Ok((passed == ZF_TRIALS, format!("{passed}/{ZF_TRIALS} trials")))
                    })(),
                ));
            }
        }
    }
    out
}

fn plans(d: u32, dt: u32, dr: u32) -> Result<[SchedulePlan; 2]> {
    let net = build_network(3 * d.max(2), 1)?;
    Ok([
        schedule_algorithm1(&partition_two(&net), dt, dr, d)?,
        schedule_algorithm2(&partition_four(&net, d.max(2))?, dt, dr, d)?,
    ])
}

/// Canonical plans validate, and losing a decode, reconstruct or the genie
/// breaks them.
pub fn schedule_check() -> Check {
    Check::from_result(
        "schedules",
        (|| {
            let mut ok = true;
            let mut checked = 0;
            for d in [3u32, 20] {
                for dt in 0..=d {
                    for dr in 0..=d - dt {
                        for plan in plans(d, dt, dr)? {
                            checked += 1;
                            ok &= validate_schedule(&plan).is_empty();
                            for (i, s) in plan.steps.iter().enumerate() {
                                if matches!(s.kind, StepKind::Decode | StepKind::Reconstruct) {
                                    let mut cut = plan.clone();
                                    cut.steps.remove(i);
                                    ok &= !validate_schedule(&cut).is_empty();
                                }
                            }
                            let mut blind = plan.clone();
                            blind.initial.remove(&Resource::Genie);
                            ok &= !validate_schedule(&blind).is_empty();
                        }
                    }
                }
            }
            Ok((ok, format!("{checked} canonical plans for D in {{3, 20}}")))
        })(),
    )
}

/// Inner inside outer over the sweep, sum preservation and duality.
pub fn structure_check() -> Check {
    Check::from_result(
        "structure",
        (|| {
            let mus = [int(0), ratio(1, 10), ratio(1, 5), int(1), int(10)];
            let mut ok = true;
            for m in 1..=3 {
                for d in [4, 8, 12, 20] {
                    for tx in &mus {
                        for rx in &mus {
                            let p = SystemParams::new(m, tx.clone(), rx.clone(), d)?;
                            ok &= is_subset(&inner_bound(&p), &outer_bound(&p));
                            let q = SystemParams::new(m, rx.clone(), tx.clone(), d)?;
                            let (_, pooled) = t_ranges(SchemeKind::Mixed, d);
                            for t in 1..=pooled {
                                ok &= scheme_point(SchemeKind::Mixed, t, &p)?
                                    == scheme_point(SchemeKind::Mixed, t, &q)?;
                            }
                        }
                    }
                }
            }
            for m in 1..=3u32 {
                let p = SystemParams::new(m, int(1000), int(1000), 40)?;
                for t in 1..=9u32 {
                    let (mi, ti) = (m as i64, t as i64);
                    let expect = ratio(mi * (3 * ti - 1), 3 * ti);
                    let a = scheme_point(SchemeKind::Mixed, t, &p)?;
                    let b = scheme_point(SchemeKind::SlowOnly, t, &p)?;
                    ok &= a.sum() == expect && b.sum() == expect;
                    ok &= a == MGPoint::new(ratio(mi, 3), ratio(mi * (2 * ti - 1), 3 * ti));
                    let s4 = required_prelogs(Scheme::S4, t, m)?.total();
                    let s5 = required_prelogs(Scheme::S5, t, m)?.total();
                    ok &= s4 == s5;
                }
            }
            Ok((ok, "inclusion, sum preservation and duality".into()))
        })(),
    )
}

/// Every check `verify-all` runs, in report order.
pub fn run_all(radius: u32, seed: u64) -> Vec<Check> {
    let mut out = vec![
        lattice_check(radius),
        region_vertices_check(),
        counts_check(),
        fractions_check(radius),
    ];
    out.extend(zf_checks(seed));
    out.push(schedule_check());
    out.push(structure_check());
    out
}

pub fn render(radius: u32, seed: u64, checks: &[Check]) -> String {
    let mut s = format!("verify-all radius={radius} seed={seed}\n");
    for c in checks {
        s.push_str(&format!("{c}\n"));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let verdict = if passed == checks.len() {
        "PASS"
    } else {
        "FAIL"
    };
    s.push_str(&format!("{verdict} {passed}/{} checks\n", checks.len()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_counts_passes() {
        let checks = vec![Check::new("a", true, "ok"), Check::new("b", false, "bad")];
        let s = render(5, 1, &checks);
        assert_eq!(
            s,
            "verify-all radius=5 seed=1\nPASS a: ok\nFAIL b: bad\nFAIL 1/2 checks\n"
        );
    }

    #[test]
    fn errors_become_failures() {
        let c = lattice_check(0);
        assert!(!c.passed);
        assert!(c.detail.starts_with("error: "));
    }

    #[test]
    fn fixed_checks_pass() {
        assert!(region_vertices_check().passed);
        assert!(counts_check().passed);
        assert!(structure_check().passed);
    }
}
