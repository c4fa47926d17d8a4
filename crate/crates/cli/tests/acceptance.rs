//! Acceptance criteria. Runs sequentially, prints one line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hexmg::clustering::{
    assign_messages, clusters, conferencing_message_count, count_links, required_prelogs,
    AssignMode, LinkSide, Role, Scheme,
};
use hexmg::converse::{
    partition_four, partition_two, schedule_algorithm1, schedule_algorithm2, validate_schedule,
    Color, Partition, Resource, StepKind, Violation,
};
use hexmg::lattice::build_network;
use hexmg::rational::{format_decimal, int, ratio};
use hexmg::regions::{
    inner_bound, inner_bound_for, is_subset, outer_bound, scheme_point, t_ranges, MGPoint, Region,
    SchemeKind, SystemParams, TRange,
};
use hexmg::zf::{run_trials, ZfScheme};
use num_rational::BigRational;
use num_traits::Signed;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(m: u32, tx: BigRational, rx: BigRational, d: u32) -> SystemParams {
    SystemParams::new(m, tx, rx, d).expect("valid parameters")
}

fn shown(r: &Region) -> Vec<(String, String)> {
    r.vertices()
        .iter()
        .map(|v| (format_decimal(&v.sf, 4), format_decimal(&v.ss, 4)))
        .collect()
}

fn expect_vertices(label: &str, r: &Region, want: &[(&str, &str)]) -> Result<(), String> {
    let got = shown(r);
    for (a, b) in want {
        ensure(got.contains(&(a.to_string(), b.to_string())), || {
            format!("{label}: vertex ({a}, {b}) missing from {got:?}")
        })?;
    }
    Ok(())
}

fn region_vertices() -> Outcome {
    let large = params(3, int(100), int(100), 20);
    let small = params(3, ratio(1, 10), ratio(1, 5), 20);
    expect_vertices(
        "outer, large",
        &outer_bound(&large),
        &[("0.0000", "2.9964"), ("1.5000", "1.4964")],
    )?;
    expect_vertices(
        "outer, small",
        &outer_bound(&small),
        &[("0.0000", "1.7667"), ("1.5000", "0.2667")],
    )?;
    let inner_large = inner_bound_for(&large, TRange::Only(4));
    expect_vertices(
        "inner, large",
        &inner_large,
        &[
            ("0.0000", "2.7500"),
            ("1.0000", "1.7500"),
            ("1.5000", "0.0000"),
        ],
    )?;
    ensure(inner_large.vertices().len() == 4, || {
        format!("inner, large: {:?}", shown(&inner_large))
    })?;
    expect_vertices(
        "inner, small",
        &inner_bound_for(&small, TRange::Only(4)),
        &[
            ("0.0000", "1.5536"),
            ("1.4792", "0.0727"),
            ("1.5000", "0.0000"),
        ],
    )?;
    Ok("outer and inner vertices match at 4 decimals".into())
}

fn counting_formulas() -> Outcome {
    for t in 1..=4u64 {
        let net = build_network(6 * t as u32, 1).map_err(|e| e.to_string())?;
        let plan = clusters(&net, t as u32).map_err(|e| e.to_string())?;
        let tx = count_links(&plan, LinkSide::Tx).map_err(|e| e.to_string())?;
        let rx = count_links(&plan, LinkSide::Rx).map_err(|e| e.to_string())?;
        ensure(tx == 36 * t * t && rx == 18 * t * t, || {
            format!("t={t}: links {tx}/{rx}")
        })?;
        for m in [1u64, 3] {
            let mt = conferencing_message_count(&plan, Scheme::S4, m as u32, LinkSide::Tx)
                .map_err(|e| e.to_string())?;
            let mr = conferencing_message_count(&plan, Scheme::S4, m as u32, LinkSide::Rx)
                .map_err(|e| e.to_string())?;
            ensure(mt == 2 * m * t * (8 * t * t + 3 * t - 2), || {
                format!("t={t} M={m}: tx messages {mt}")
            })?;
            ensure(mr == 3 * m * (3 * t * t - 1), || {
                format!("t={t} M={m}: rx messages {mr}")
            })?;
        }
    }
    for t in 1..=4i64 {
        for m in 1..=3i64 {
            let (tu, mu) = (t as u32, m as u32);
            let get = |s| required_prelogs(s, tu, mu).map_err(|e| e.to_string());
            let slow = ratio(m * (2 * t - 1), 3);
            let table = [
                (Scheme::S1, int(0), int(0)),
                (Scheme::S2, int(0), slow.clone()),
                (Scheme::S3, slow, int(0)),
                (
                    Scheme::S4,
                    ratio(2 * m * t * (8 * t * t + 3 * t - 2), 36 * t * t),
                    ratio(3 * m * (3 * t * t - 1), 18 * t * t),
                ),
                (
                    Scheme::S5,
                    ratio(6 * m * t * (2 * t - 1), 36 * t * t),
                    ratio(m * (8 * t * t * t + 6 * t * t + t - 3), 18 * t * t),
                ),
            ];
            for (s, tx, rx) in table {
                let p = get(s)?;
                ensure(p.mu_tx == tx && p.mu_rx == rx, || {
                    format!("{s:?} t={t} M={m}: {p:?}")
                })?;
            }
        }
    }
    Ok("links 36t^2 / 18t^2, message counts and prelogs exact for t in 1..=4".into())
}

/// Largest |count/total - limit| over the roles of an interior census.
fn role_error(t: u32, radius: u32, mode: AssignMode) -> Result<BigRational, String> {
    let net = build_network(radius, 1).map_err(|e| e.to_string())?;
    let plan = assign_messages(&clusters(&net, t).map_err(|e| e.to_string())?, mode)
        .map_err(|e| e.to_string())?;
    let mut counts: BTreeMap<Role, i64> = BTreeMap::new();
    let mut total = 0i64;
    for s in net.sectors() {
        if net.depth(s.cell) < Some(2) {
            continue;
        }
        total += 1;
        *counts
            .entry(plan.role(s).ok_or("unassigned sector")?)
            .or_default() += 1;
    }
    let t = t as i64;
    let limits = match mode {
        AssignMode::Mixed => [
            (Role::Silent, ratio(1, 3 * t)),
            (Role::Fast, ratio(1, 3)),
            (Role::Slow, ratio(2 * t - 1, 3 * t)),
        ],
        AssignMode::SlowOnly => [
            (Role::Silent, ratio(1, 3 * t)),
            (Role::Fast, int(0)),
            (Role::Slow, ratio(3 * t - 1, 3 * t)),
        ],
    };
    Ok(limits
        .into_iter()
        .map(|(role, lim)| (ratio(counts.get(&role).copied().unwrap_or(0), total) - lim).abs())
        .max()
        .expect("three roles"))
}

fn colour_error(p: &Partition, limits: &[(Color, BigRational)]) -> BigRational {
    let mut counts: BTreeMap<Color, i64> = BTreeMap::new();
    let mut total = 0i64;
    for (_, c) in p.cells() {
        *counts.entry(c).or_default() += 1;
        total += 1;
    }
    limits
        .iter()
        .map(|(c, lim)| (ratio(counts.get(c).copied().unwrap_or(0), total) - lim).abs())
        .max()
        .expect("non-empty palette")
}

fn fraction_limits() -> Outcome {
    let tol = ratio(1, 50);
    let mut worst = int(0);
    for t in 1..=4 {
        for mode in [AssignMode::Mixed, AssignMode::SlowOnly] {
            let (e20, e30, e40) = (
                role_error(t, 20, mode)?,
                role_error(t, 30, mode)?,
                role_error(t, 40, mode)?,
            );
            ensure(e30 <= tol && e40 <= tol, || {
                format!("t={t} {mode:?}: error {e30} at radius 30")
            })?;
            ensure(e40 < e20, || {
                format!("t={t} {mode:?}: error {e20} -> {e40} from radius 20 to 40")
            })?;
            worst = worst.max(e30);
        }
    }
    let two_limits = [(Color::Red, ratio(1, 2)), (Color::White, ratio(1, 2))];
    let four_limits = [
        (Color::Red, ratio(1, 26)),
        (Color::Blue, ratio(1, 26)),
        (Color::Pink, ratio(3, 13)),
        (Color::White, ratio(9, 13)),
    ];
    let mut two = Vec::new();
    let mut four = Vec::new();
    for r in [20, 30, 40] {
        let net = build_network(r, 1).map_err(|e| e.to_string())?;
        two.push(colour_error(&partition_two(&net), &two_limits));
        four.push(colour_error(
            &partition_four(&net, 3).map_err(|e| e.to_string())?,
            &four_limits,
        ));
    }
    for (name, e) in [("two-color", &two), ("four-color", &four)] {
        ensure(e[1] <= tol && e[2] <= tol, || {
            format!("{name}: error {} at radius 30", e[1])
        })?;
        ensure(e[2] < e[0], || {
            format!("{name}: error {} -> {} from radius 20 to 40", e[0], e[2])
        })?;
        worst = worst.max(e[1].clone());
    }
    Ok(format!(
        "largest error at radius 30 is {}",
        format_decimal(&worst, 6)
    ))
}

fn zero_forcing() -> Outcome {
    let mut runs = 0;
    for t in 1..=2u32 {
        let net = build_network(3 * t + 2, 1).map_err(|e| e.to_string())?;
        for m in 1..=2usize {
            for (mode, scheme) in [
                (AssignMode::SlowOnly, ZfScheme::S3),
                (AssignMode::Mixed, ZfScheme::S4),
                (AssignMode::Mixed, ZfScheme::S5),
            ] {
                let plan = assign_messages(&clusters(&net, t).map_err(|e| e.to_string())?, mode)
                    .map_err(|e| e.to_string())?;
                let c = plan.interior_cluster().map_err(|e| e.to_string())?;
                let out = run_trials(&plan, c, m, scheme, 20_240_601, 100, 1e-9)
                    .map_err(|e| e.to_string())?;
                ensure(out.len() == 100, || format!("{} trials", out.len()))?;
                for o in &out {
                    let r = o
                        .report
                        .as_ref()
                        .map_err(|e| format!("t={t} M={m} {scheme:?} trial {}: {e}", o.trial))?;
                    ensure(
                        r.solvable && r.max_cross_residual <= 1e-9 && r.min_self_rank == m,
                        || format!("t={t} M={m} {scheme:?} trial {}: {r:?}", o.trial),
                    )?;
                }
                runs += out.len();
            }
        }
    }
    Ok(format!(
        "{runs} seeded trials solvable with residual <= 1e-9 and full rank"
    ))
}

fn converse_schedules() -> Outcome {
    let mut plans = 0;
    for d in [3u32, 20] {
        let net = build_network(3 * d, 1).map_err(|e| e.to_string())?;
        let two = partition_two(&net);
        let four = partition_four(&net, d).map_err(|e| e.to_string())?;
        for dt in 0..=d {
            for dr in 0..=d - dt {
                let both = [
                    schedule_algorithm1(&two, dt, dr, d).map_err(|e| e.to_string())?,
                    schedule_algorithm2(&four, dt, dr, d).map_err(|e| e.to_string())?,
                ];
                for plan in both {
                    let tag = format!("algorithm {} D={d} dt={dt} dr={dr}", plan.algorithm);
                    let v = validate_schedule(&plan);
                    ensure(v.is_empty(), || format!("{tag}: {v:?}"))?;
                    for (i, s) in plan.steps.iter().enumerate() {
                        if matches!(s.kind, StepKind::Decode | StepKind::Reconstruct) {
                            let mut cut = plan.clone();
                            cut.steps.remove(i);
                            ensure(!validate_schedule(&cut).is_empty(), || {
                                format!("{tag}: deleting step {i} goes unnoticed")
                            })?;
                        }
                    }
                    let mut blind = plan.clone();
                    blind.initial.remove(&Resource::Genie);
                    let rec = blind
                        .steps
                        .iter()
                        .position(|s| s.kind == StepKind::Reconstruct)
                        .ok_or_else(|| format!("{tag}: no reconstruct step"))?;
                    ensure(
                        validate_schedule(&blind).contains(&Violation::MissingInput {
                            step: rec,
                            resource: Resource::Genie,
                        }),
                        || format!("{tag}: genie removal goes unnoticed"),
                    )?;
                    plans += 1;
                }
            }
        }
    }
    Ok(format!(
        "{plans} canonical plans validate; deletions and genie removal detected"
    ))
}

fn structural_checks() -> Outcome {
    let mus = [int(0), ratio(1, 10), ratio(1, 5), int(1), int(10)];
    let mut pairs = 0;
    for m in 1..=3 {
        for d in [4, 8, 12, 20] {
            for tx in &mus {
                for rx in &mus {
                    let p = params(m, tx.clone(), rx.clone(), d);
                    ensure(is_subset(&inner_bound(&p), &outer_bound(&p)), || {
                        format!("M={m} D={d} tx={tx} rx={rx}")
                    })?;
                    let swapped = params(m, rx.clone(), tx.clone(), d);
                    for t in 1..=(d - 2) / 4 {
                        let a =
                            scheme_point(SchemeKind::Mixed, t, &p).map_err(|e| e.to_string())?;
                        let b = scheme_point(SchemeKind::Mixed, t, &swapped)
                            .map_err(|e| e.to_string())?;
                        ensure(a == b, || format!("duality at M={m} D={d} t={t}"))?;
                    }
                    pairs += 1;
                }
            }
        }
    }
    for m in 1..=3i64 {
        let d = 40;
        let p = params(m as u32, int(1000), int(1000), d);
        let (max_t, _) = t_ranges(SchemeKind::Mixed, d);
        for t in 1..=max_t as i64 {
            let want = ratio(m * (3 * t - 1), 3 * t);
            let mixed = scheme_point(SchemeKind::Mixed, t as u32, &p).map_err(|e| e.to_string())?;
            let slow =
                scheme_point(SchemeKind::SlowOnly, t as u32, &p).map_err(|e| e.to_string())?;
            ensure(
                mixed == MGPoint::new(ratio(m, 3), ratio(m * (2 * t - 1), 3 * t)),
                || format!("M={m} t={t}: {mixed}"),
            )?;
            ensure(mixed.sum() == want && slow.sum() == want, || {
                format!("M={m} t={t}: sums {} {}", mixed.sum(), slow.sum())
            })?;
        }
        for t in 1..=(d - 2) / 4 {
            let s4 = required_prelogs(Scheme::S4, t, m as u32).map_err(|e| e.to_string())?;
            let s5 = required_prelogs(Scheme::S5, t, m as u32).map_err(|e| e.to_string())?;
            let ti = t as i64;
            let want = ratio(m * (4 * ti * ti - 1) * (2 * ti + 3), 18 * ti * ti);
            ensure(s4.total() == want && s5.total() == want, || {
                format!("prelog sums at M={m} t={t}")
            })?;
        }
    }
    Ok(format!(
        "inner inside outer for {pairs} parameter sets; sums and duality exact"
    ))
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_hexmg"))
            .args(["verify-all", "--radius", "30", "--seed", "42"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || {
        format!(
            "exit status {:?}: {}",
            a.status.code(),
            String::from_utf8_lossy(&a.stdout)
        )
    })?;
    ensure(a.stdout == b.stdout, || "reports differ".into())?;
    let text = String::from_utf8_lossy(&a.stdout);
    let last = text.lines().last().unwrap_or_default().to_string();
    ensure(last.starts_with("PASS "), || format!("final line {last:?}"))?;
    Ok(format!("{} identical bytes, {last}", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("region vertices", region_vertices, Duration::from_secs(1)),
        (
            "counting formulas",
            counting_formulas,
            Duration::from_secs(10),
        ),
        ("fraction limits", fraction_limits, Duration::from_secs(30)),
        (
            "zero-forcing certification",
            zero_forcing,
            Duration::from_secs(60),
        ),
        (
            "converse schedules",
            converse_schedules,
            Duration::from_secs(5),
        ),
        (
            "structural checks",
            structural_checks,
            Duration::from_secs(5),
        ),
        ("determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if took <= limit {
                Ok(d)
            } else {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS ({took:.2?}) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({took:.2?}) {d}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
