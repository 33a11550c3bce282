mod common;

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use commwheel::geometry::{distance, Point};
use commwheel::io::load_network;
use commwheel::network::{build_udg, classify_by_oracle, Network, NodeClass};
use commwheel::protocol::{
    run_simulation, verify_localization, ProtocolError, SimConfig, TraceEntry,
};
use commwheel::rigidity::check_construction;
use commwheel::wheel::classify_by_wheels;

/// Hub, five rim nodes at 0.5 and ten outer nodes just beyond the hub's
/// range, nudged off the symmetric positions.
fn two_ring_pentagon(center: Point, first_id: u64) -> Vec<(u64, Point)> {
    let mut nodes = vec![(first_id, center + Point::new(0.003, -0.002))];
    for i in 0..5 {
        let a = TAU * i as f64 / 5.0 + 0.01 * i as f64;
        nodes.push((first_id + 1 + i, center + Point::from_polar(0.5 + 0.01 * i as f64, a)));
    }
    for i in 0..10 {
        let a = TAU * i as f64 / 10.0 - 0.007 * i as f64;
        nodes.push((first_id + 6 + i, center + Point::from_polar(1.06 + 0.004 * i as f64, a)));
    }
    nodes
}

fn fixture(text: &str) -> Network {
    load_network(text).expect("fixture parses")
}

#[test]
fn two_ring_pentagon_localizes_every_node() {
    let net = build_udg(&two_ring_pentagon(Point::ORIGIN, 0), 1.0).unwrap();
    let classes = classify_by_wheels(&net);
    assert_eq!(classes.class(0), NodeClass::StronglyInterior);
    assert_eq!(classes.strong, vec![0]);
    for rim in 1..=5 {
        assert_eq!(classes.class(rim), NodeClass::NonIsolatedWeaklyInterior);
    }
    for outer in 6..=15 {
        assert_eq!(classes.class(outer), NodeClass::Boundary);
    }
    assert_eq!(classes, classify_by_oracle(&net));

    let result = run_simulation(&net, &SimConfig::default());
    assert_eq!(result.leader, Some(0));
    assert_eq!(result.localized_count(), 16);
    assert!(result.faults.is_empty(), "{:?}", result.faults);
    let report = verify_localization(&result, &net);
    assert!(report.max_residual.unwrap() < 1e-6);
    assert_eq!(report.protocol.holds, Some(true));
    // the leader's wheel frame is the global frame
    assert_eq!(result.positions[0], Some(Point::ORIGIN));
    // only the leader has strongly interior duties here
    assert_eq!(result.trace.count("construct_wheel_find"), 0);
    assert!(check_construction(&net, &result).passed());
}

#[test]
fn rim_nodes_announce_to_all_neighbors() {
    let net = build_udg(&two_ring_pentagon(Point::ORIGIN, 0), 1.0).unwrap();
    let result = run_simulation(&net, &SimConfig::default());
    for v in 0..net.len() {
        let told: BTreeSet<u64> = result
            .trace
            .entries
            .iter()
            .filter(|e| e.kind == "i_am_at" && e.from == net.id(v))
            .map(|e| e.to)
            .collect();
        let expected: BTreeSet<u64> = net.neighbors(v).iter().map(|&(u, _)| net.id(u)).collect();
        assert_eq!(told, expected, "node {v}");
    }
}

#[test]
fn disconnected_strong_interior_has_no_leader() {
    let mut nodes = two_ring_pentagon(Point::ORIGIN, 0);
    nodes.extend(two_ring_pentagon(Point::new(3.9, 0.05), 100));
    // a sparse bridge between the outer rings
    nodes.extend([
        (200, Point::new(1.75, 0.15)),
        (201, Point::new(2.4, -0.12)),
    ]);
    let net = build_udg(&nodes, 1.0).unwrap();
    let classes = classify_by_wheels(&net);
    assert!(classes.strong.len() >= 2);
    assert!(!commwheel::network::strong_interior_connected(&net, &classes));

    let result = run_simulation(&net, &SimConfig::default());
    assert_eq!(result.error, Some(ProtocolError::NoLeader));
    assert_eq!(result.leader, None);
    assert_eq!(result.localized_count(), 0);
    let report = verify_localization(&result, &net);
    assert_eq!(report.protocol.holds, None);
    assert_eq!(report.max_residual, None);
    assert_eq!(report.protocol.fraction(NodeClass::StronglyInterior), Some(0.0));
}

#[test]
fn single_rim_contact_goes_through_one_find_exchange() {
    let net = fixture(include_str!("fixtures/single_rim_contact.json"));
    let result = run_simulation(&net, &SimConfig::default());
    assert_eq!(result.trace.count("construct_wheel_find"), 1);
    assert_eq!(result.trace.count("found_at"), 1);
    let find: &TraceEntry = result.trace.entries.iter().find(|e| e.kind == "construct_wheel_find").unwrap();
    let reply = result.trace.entries.iter().find(|e| e.kind == "found_at").unwrap();
    assert_eq!((reply.from, reply.to), (find.to, find.from));
    assert!(reply.step > find.step);

    let requester = net.index_of(find.from).unwrap();
    let rim_node = net.index_of(find.to).unwrap();
    let wheel = result.wheels[requester].as_ref().unwrap();
    assert!(wheel.rim.contains(&rim_node));
    let single: Vec<usize> = net
        .neighbors(requester)
        .iter()
        .map(|&(u, _)| u)
        .filter(|&u| !wheel.rim.contains(&u))
        .filter(|&u| wheel.rim.iter().filter(|&&w| net.are_adjacent(u, w)).count() == 1)
        .collect();
    assert!(!single.is_empty());
    assert!(single.iter().all(|&u| result.is_localized(u)));
    assert_eq!(result.localized_count(), net.len());
    assert!(result.faults.is_empty());
    assert!(verify_localization(&result, &net).max_residual.unwrap() < 1e-6);
}

#[test]
fn leader_uses_the_construct_variant() {
    let net = fixture(include_str!("fixtures/leader_construct.json"));
    let result = run_simulation(&net, &SimConfig::default());
    let leader = net.id(result.leader.unwrap());
    let constructs: Vec<&TraceEntry> = result.trace.entries.iter().filter(|e| e.kind == "construct_wheel").collect();
    assert_eq!(constructs.len(), 1);
    assert_eq!(constructs[0].from, leader);
    // the rim node answers by placing nodes directly
    assert!(result
        .trace
        .entries
        .iter()
        .any(|e| e.kind == "you_are_at" && e.from == constructs[0].to && e.step > constructs[0].step));
    assert_eq!(result.localized_count(), net.len());
    assert!(verify_localization(&result, &net).max_residual.unwrap() < 1e-6);
}

#[test]
fn honeycomb_members_localize_completely() {
    for k in 1..=2 {
        let report = commwheel::network::generate_honeycomb_family(k).unwrap();
        let result = run_simulation(&report.network, &SimConfig::default());
        assert_eq!(result.localized_count(), report.network.len());
        let check = verify_localization(&result, &report.network);
        assert!(check.max_residual.unwrap() < 1e-6);
        assert_eq!(check.protocol.holds, Some(true));
        assert_eq!(check.oracle.holds, Some(true));
    }
}

#[test]
fn replay_gives_identical_traces() {
    let net = common::family_network(7);
    for cfg in [SimConfig::default(), SimConfig::random(99)] {
        let a = run_simulation(&net, &cfg);
        let b = run_simulation(&net, &cfg);
        assert_eq!(a.trace.hash(), b.trace.hash());
        assert_eq!(a, b);
    }
}

#[test]
fn interleaving_changes_order_but_not_outcome() {
    let net = common::family_network(19);
    let base = run_simulation(&net, &SimConfig::default());
    assert!(base.leader.is_some());
    let mut hashes = BTreeSet::new();
    for seed in 0..8 {
        let run = run_simulation(&net, &SimConfig::random(seed));
        hashes.insert(run.trace.hash());
        assert_eq!(run.localized(), base.localized());
        assert_eq!(run.classes, base.classes);
        let (pa, pb) = (&base.positions, &run.positions);
        for v in 0..net.len() {
            if let (Some(a), Some(b)) = (pa[v], pb[v]) {
                assert!(distance(a, b) < 1e-6, "node {v} moved by {}", distance(a, b));
            }
        }
    }
    assert!(hashes.len() > 1, "random interleavings all produced one trace");
}

#[test]
fn family_runs_stay_sound_and_quiesce() {
    for i in 0..40 {
        let net = common::family_network(i);
        let result = run_simulation(&net, &SimConfig::default());
        assert!(!result.trace.budget_exhausted, "network {i}");
        assert!(result.faults.is_empty(), "network {i}: {:?}", result.faults);
        let report = verify_localization(&result, &net);
        if let Some(res) = report.max_residual {
            assert!(res < 1e-6, "network {i}: residual {res}");
        }
        assert_ne!(report.protocol.holds, Some(false), "network {i}: missing {:?}", report.protocol.missing);
        assert!(result.message_ratio(&net).is_finite());
    }
}

#[test]
fn trace_lines_carry_the_documented_fields() {
    let net = build_udg(&two_ring_pentagon(Point::ORIGIN, 0), 1.0).unwrap();
    let result = run_simulation(&net, &SimConfig::default());
    let text = result.trace.to_jsonl();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let keys: BTreeSet<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, BTreeSet::from(["step", "from", "to", "type", "digest"]));
    assert_eq!(text.lines().count(), result.trace.total());
    assert_eq!(result.trace.hash().len(), 64);
}
