use std::collections::BTreeSet;

use hexmg::clustering::{assign_messages, clusters, AssignMode, ClusterPlan};
use hexmg::lattice::{build_network, Network};
use hexmg::zf::*;
use nalgebra::DMatrix;

fn plan(net: &Network, t: u32, mode: AssignMode) -> (ClusterPlan<'_>, usize) {
    let p = assign_messages(&clusters(net, t).unwrap(), mode).unwrap();
    let c = p.interior_cluster().unwrap();
    (p, c)
}

#[test]
fn certification_grid() {
    for t in 1..=2u32 {
        let net = build_network(3 * t + 2, 1).unwrap();
        for m in 1..=2usize {
            for (mode, scheme) in [
                (AssignMode::SlowOnly, ZfScheme::S3),
                (AssignMode::Mixed, ZfScheme::S4),
                (AssignMode::Mixed, ZfScheme::S5),
            ] {
                let (p, c) = plan(&net, t, mode);
                let out = run_trials(&p, c, m, scheme, 1000, 100, 1e-9).unwrap();
                assert_eq!(out.len(), 100);
                for o in &out {
                    let r = o.report.as_ref().unwrap();
                    assert!(
                        r.solvable,
                        "t={t} M={m} {scheme:?} trial {}: {r:?}",
                        o.trial
                    );
                    assert!(r.max_cross_residual <= 1e-9);
                    assert_eq!(r.min_self_rank, m);
                }
            }
        }
    }
}

#[test]
fn channels_are_deterministic_and_nonzero() {
    let net = build_network(4, 1).unwrap();
    let (p, c) = plan(&net, 1, AssignMode::SlowOnly);
    let a = sample_channels(&p, c, 1, 42).unwrap();
    let b = sample_channels(&p, c, 1, 42).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, sample_channels(&p, c, 1, 43).unwrap());
    for (_, h) in a.links() {
        assert_eq!(h.shape(), (1, 1));
        assert_ne!(h[(0, 0)], 0.0);
    }
}

#[test]
fn link_set_matches_interference_graph() {
    let net = build_network(6, 1).unwrap();
    for t in 1..=2 {
        let (p, c) = plan(&net, t, AssignMode::Mixed);
        let ch = sample_channels(&p, c, 2, 1).unwrap();
        let got: BTreeSet<_> = ch.links().map(|(k, _)| *k).collect();
        let mut expect = BTreeSet::new();
        for &s in &p.clusters()[c].sectors {
            expect.insert((s, s));
        }
        for (a, b) in net.interference_graph() {
            if p.cluster_of(a) == Some(c) && p.cluster_of(b) == Some(c) {
                expect.insert((a, b));
                expect.insert((b, a));
            }
        }
        assert_eq!(got, expect);
    }
}

#[test]
fn constraint_counts() {
    let net = build_network(5, 1).unwrap();
    let (p, c) = plan(&net, 1, AssignMode::SlowOnly);
    let s3 = build_zf_system(&p, c, 1, ZfScheme::S3).unwrap();
    assert!(s3.num_unknowns() >= s3.num_constraints());

    for m in 1..=2 {
        let (p, c) = plan(&net, 1, AssignMode::Mixed);
        let s3 = build_zf_system(&p, c, m, ZfScheme::S3).unwrap();
        let s4 = build_zf_system(&p, c, m, ZfScheme::S4).unwrap();
        assert_eq!(s3.slow, s4.slow);
        assert_eq!(
            s4.num_constraints() - s3.num_constraints(),
            m * m * s4.fast.len() * s4.slow.len()
        );
        assert_eq!(s4.num_constraints(), s4.num_unknowns());
        let s5 = build_zf_system(&p, c, m, ZfScheme::S5).unwrap();
        assert!(s5.num_constraints() < s4.num_constraints());
    }
}

#[test]
fn identical_channels_can_break_rank() {
    // Two transmitters reaching a receiver through the same matrix is a
    // measure-zero event; it must either solve or be reported, never panic.
    let net = build_network(4, 1).unwrap();
    let (p, c) = plan(&net, 1, AssignMode::Mixed);
    let sys = build_zf_system(&p, c, 1, ZfScheme::S4).unwrap();
    let mut ch = sample_channels(&p, c, 1, 5).unwrap();
    let keys: Vec<_> = ch.links().map(|(k, _)| *k).collect();
    for &(rx, tx) in &keys {
        ch.set(rx, tx, DMatrix::from_element(1, 1, 1.0)).unwrap();
    }
    match solve_precoder(&sys, &ch) {
        Ok(pc) => {
            let _ = verify_nulling(&pc, &sys, &ch, 1e-9).unwrap();
        }
        Err(e) => assert!(matches!(e, hexmg::Error::RankDeficient { .. })),
    }
}

#[test]
fn reports_are_reproducible() {
    let net = build_network(5, 1).unwrap();
    let (p, c) = plan(&net, 1, AssignMode::Mixed);
    let a = run_trials(&p, c, 2, ZfScheme::S4, 9, 8, 1e-9).unwrap();
    let b = run_trials(&p, c, 2, ZfScheme::S4, 9, 8, 1e-9).unwrap();
    assert_eq!(a, b);
}
