#![allow(dead_code)]

use qualinet::{compile, parse_model, resolve_goal, Evidence, Network, NetworkNode, NodeKind, QualityModel};
use rand::Rng;

pub const CM1: &str = include_str!("../../models/cm1.qm");
pub const MEASURED: &str = include_str!("../../models/measured.json");
pub const BASELINE: &str = include_str!("../../models/baseline.json");

pub fn cm1_model() -> QualityModel {
    parse_model(CM1).expect("bundled model parses")
}

pub fn cm1() -> Network {
    let model = cm1_model();
    let goal = resolve_goal(&model, Some("maintenance")).unwrap();
    compile(&model, goal).unwrap()
}

fn node(id: &str, states: &[&str], parents: &[&str], cpt: Vec<f64>) -> NetworkNode<f64> {
    NetworkNode {
        id: id.into(),
        kind: NodeKind::Activity,
        states: states.iter().map(|s| s.to_string()).collect(),
        bounds: None,
        parents: parents.iter().map(|s| s.to_string()).collect(),
        cpt,
    }
}

/// Two uniform parents and the example child table (true, false per column).
pub fn two_parent() -> Network {
    let true_row = [0.6, 0.65, 0.3, 0.45, 0.23, 0.05];
    let cpt = true_row.iter().flat_map(|&t| [t, 1.0 - t]).collect();
    Network::new(
        "two_parent",
        vec![
            node("X", &["low", "high"], &[], vec![0.5, 0.5]),
            node("Y", &["low", "med", "high"], &[], vec![1.0 / 3.0; 3]),
            node("C", &["true", "false"], &["X", "Y"], cpt),
        ],
    )
    .unwrap()
}

/// DAG with up to `max_nodes` nodes of 1 to `max_states` states, up to three
/// parents each, and random tables with occasional zeros.
pub fn random_network<R: Rng>(rng: &mut R, max_nodes: usize, max_states: usize) -> Network {
    let n = rng.gen_range(1..=max_nodes);
    let mut nodes: Vec<NetworkNode<f64>> = Vec::with_capacity(n);
    let mut cards = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(1..=max_states);
        let mut parents: Vec<usize> = (0..i).filter(|_| rng.gen_bool(0.45)).collect();
        parents.truncate(3);
        let columns: usize = parents.iter().map(|&p| cards[p]).product();
        let mut cpt = Vec::with_capacity(columns * k);
        for _ in 0..columns {
            let mut col: Vec<f64> = (0..k)
                .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen::<f64>() })
                .collect();
            let total: f64 = col.iter().sum();
            if total == 0.0 {
                col = vec![1.0 / k as f64; k];
            } else {
                col.iter_mut().for_each(|p| *p /= total);
            }
            cpt.extend(col);
        }
        cards.push(k);
        nodes.push(NetworkNode {
            id: format!("n{i}"),
            kind: NodeKind::Activity,
            states: (0..k).map(|s| format!("s{s}")).collect(),
            bounds: None,
            parents: parents.iter().map(|p| format!("n{p}")).collect(),
            cpt,
        });
    }
    // Shuffle declaration order so ids and topological order disagree.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let shuffled = order.into_iter().map(|i| nodes[i].clone()).collect();
    Network::new("random", shuffled).unwrap()
}

pub fn random_evidence<R: Rng>(rng: &mut R, net: &Network) -> Evidence {
    let mut ev = Evidence::new();
    for node in net.nodes() {
        if rng.gen_bool(0.3) {
            ev.set(node.id.clone(), rng.gen_range(0..node.cardinality()));
        }
    }
    ev
}
