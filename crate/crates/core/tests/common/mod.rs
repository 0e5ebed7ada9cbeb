//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use navflow::route_graph::{
    validate_coverage, AnnotationSet, NodeId, NodeKind, Port, SegmentRef, TopologicalMap,
    TripletAnnotation, TripletKey,
};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Cheapest simple path by exhaustive enumeration. Among equally cheap
/// paths the lexicographically smallest node sequence is returned.
pub fn brute_force_shortest(
    map: &TopologicalMap,
    start: &NodeId,
    goal: &NodeId,
) -> Option<(u64, Vec<NodeId>)> {
    fn dfs(
        map: &TopologicalMap,
        at: &NodeId,
        goal: &NodeId,
        seq: &mut Vec<NodeId>,
        cost: u64,
        best: &mut Option<(u64, Vec<NodeId>)>,
    ) {
        if at == goal {
            let better = match best {
                None => true,
                Some((c, s)) => cost < *c || (cost == *c && seq < s),
            };
            if better {
                *best = Some((cost, seq.clone()));
            }
            return;
        }
        let next: Vec<(NodeId, u64)> = map
            .incident_edges(at)
            .map(|e| {
                let edge = map.edge(e).unwrap();
                (edge.other(at).unwrap().clone(), edge.weight_frames)
            })
            .collect();
        for (n, w) in next {
            if seq.contains(&n) {
                continue;
            }
            seq.push(n.clone());
            dfs(map, &n, goal, seq, cost + w, best);
            seq.pop();
        }
    }
    let mut best = None;
    let mut seq = vec![start.clone()];
    dfs(map, start, goal, &mut seq, 0, &mut best);
    best
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

/// Random multigraph with `n` nodes; each unordered pair gets an edge with
/// probability `density`, and occasionally a parallel one.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, max_weight: u64) -> TopologicalMap {
    let mut map = TopologicalMap::new();
    for i in 0..n {
        map.add_node(node_name(i), NodeKind::Intersection).unwrap();
    }
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let copies = if rng.random_bool(density) {
                if rng.random_bool(0.1) { 2 } else { 1 }
            } else {
                0
            };
            for _ in 0..copies {
                let w = rng.random_range(1..=max_weight);
                map.add_edge(format!("e{k}"), node_name(i), node_name(j), w).unwrap();
                k += 1;
            }
        }
    }
    map
}

/// Random connected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize, max_weight: u64) -> TopologicalMap {
    let mut map = TopologicalMap::new();
    for i in 0..n {
        map.add_node(node_name(i), NodeKind::Intersection).unwrap();
    }
    let mut k = 0;
    for i in 1..n {
        let j = rng.random_range(0..i);
        map.add_edge(format!("e{k}"), node_name(j), node_name(i), rng.random_range(1..=max_weight))
            .unwrap();
        k += 1;
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            map.add_edge(format!("e{k}"), node_name(a), node_name(b), rng.random_range(1..=max_weight))
                .unwrap();
            k += 1;
        }
    }
    map
}

/// Every interior triplet annotated with a distinct segment, plus terminal
/// triplets for every node/edge pair when `terminals` is set.
pub fn full_annotations<R: Rng>(rng: &mut R, map: &TopologicalMap, terminals: bool) -> AnnotationSet {
    let mut set = AnnotationSet::new();
    let mut frame = 0u64;
    let mut seg = |rng: &mut R| {
        let len = rng.random_range(10..200);
        let s = SegmentRef::new("fuzz", frame, frame + len).unwrap();
        frame += len;
        s
    };
    for key in validate_coverage(map, &AnnotationSet::new()) {
        set.insert(TripletAnnotation::new(key, seg(rng))).unwrap();
    }
    if terminals {
        for (node, _) in map.nodes() {
            let incident: Vec<_> = map.incident_edges(node).cloned().collect();
            for e in incident {
                for key in [
                    TripletKey::new(Port::Terminal, node.clone(), Port::Edge(e.clone())),
                    TripletKey::new(Port::Edge(e.clone()), node.clone(), Port::Terminal),
                ] {
                    set.insert(TripletAnnotation::new(key, seg(rng))).unwrap();
                }
            }
        }
    }
    set
}
