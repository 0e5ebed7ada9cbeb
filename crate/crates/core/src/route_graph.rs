//! Topological corridor map and synthetic path generation.
//!
//! Intersections and exits are nodes, corridors are undirected edges
//! weighted by the length of their footage in frames. Video is annotated per
//! triplet `(incoming corridor, node, outgoing corridor)`, so a new route can
//! be assembled from footage that was never filmed end to end: find the
//! shortest route between two nodes and look up the triplet for every node
//! it passes through.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_owned())
    }
}

/// One side of a triplet: a corridor, or the terminal marker for a route
/// that starts or ends at the through-node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Port {
    Terminal,
    Edge(EdgeId),
}

impl Port {
    pub fn edge(&self) -> Option<&EdgeId> {
        match self {
            Port::Edge(e) => Some(e),
            Port::Terminal => None,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::Terminal => f.write_str("-"),
            Port::Edge(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripletKey {
    pub incoming: Port,
    pub node: NodeId,
    pub outgoing: Port,
}

impl TripletKey {
    pub fn new(incoming: Port, node: impl Into<NodeId>, outgoing: Port) -> Self {
        Self {
            incoming,
            node: node.into(),
            outgoing,
        }
    }

    pub fn through(incoming: &str, node: &str, outgoing: &str) -> Self {
        Self::new(
            Port::Edge(incoming.into()),
            node,
            Port::Edge(outgoing.into()),
        )
    }

    pub fn is_interior(&self) -> bool {
        self.incoming != Port::Terminal && self.outgoing != Port::Terminal
    }
}

impl fmt::Display for TripletKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.incoming, self.node, self.outgoing)
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl From<String> for EdgeId {
    fn from(s: String) -> Self {
        EdgeId(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("no path from {from} to {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("missing triplet annotation {0}")]
    MissingTriplet(TripletKey),
    #[error("graph has {0} nodes, at least 2 are needed")]
    GraphTooSmall(usize),
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {0} has zero weight")]
    ZeroWeight(EdgeId),
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("duplicate triplet annotation {0}")]
    DuplicateTriplet(TripletKey),
    #[error("invalid triplet {key}: {reason}")]
    InvalidTriplet { key: TripletKey, reason: String },
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    #[default]
    Intersection,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub weight_frames: u64,
}

impl Edge {
    pub fn touches(&self, node: &NodeId) -> bool {
        &self.a == node || &self.b == node
    }

    pub fn other(&self, node: &NodeId) -> Option<&NodeId> {
        if &self.a == node {
            Some(&self.b)
        } else if &self.b == node {
            Some(&self.a)
        } else {
            None
        }
    }
}

/// Undirected corridor graph. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopologicalMap {
    nodes: BTreeMap<NodeId, NodeKind>,
    edges: BTreeMap<EdgeId, Edge>,
    incident: BTreeMap<NodeId, BTreeSet<EdgeId>>,
}

impl TopologicalMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: impl Into<NodeId>, kind: NodeKind) -> Result<(), RouteError> {
        let id = id.into();
        if self.nodes.contains_key(&id) {
            return Err(RouteError::DuplicateNode(id));
        }
        self.incident.insert(id.clone(), BTreeSet::new());
        self.nodes.insert(id, kind);
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        id: impl Into<EdgeId>,
        a: impl Into<NodeId>,
        b: impl Into<NodeId>,
        weight_frames: u64,
    ) -> Result<(), RouteError> {
        let (id, a, b) = (id.into(), a.into(), b.into());
        if self.edges.contains_key(&id) {
            return Err(RouteError::DuplicateEdge(id));
        }
        for n in [&a, &b] {
            if !self.nodes.contains_key(n) {
                return Err(RouteError::UnknownNode(n.clone()));
            }
        }
        if a == b {
            return Err(RouteError::SelfLoop(id));
        }
        if weight_frames == 0 {
            return Err(RouteError::ZeroWeight(id));
        }
        self.incident.get_mut(&a).unwrap().insert(id.clone());
        self.incident.get_mut(&b).unwrap().insert(id.clone());
        self.edges.insert(id, Edge { a, b, weight_frames });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, NodeKind)> {
        self.nodes.iter().map(|(id, k)| (id, *k))
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.keys().cloned().collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &Edge)> {
        self.edges.iter()
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn incident_edges(&self, node: &NodeId) -> impl Iterator<Item = &EdgeId> {
        self.incident.get(node).into_iter().flatten()
    }

    fn require_node(&self, id: &NodeId) -> Result<(), RouteError> {
        if self.nodes.contains_key(id) {
            Ok(())
        } else {
            Err(RouteError::UnknownNode(id.clone()))
        }
    }

    /// Cheapest edge to each neighbor of `node`; ties go to the smaller edge id.
    fn neighbors(&self, node: &NodeId) -> BTreeMap<&NodeId, (&EdgeId, u64)> {
        let mut out: BTreeMap<&NodeId, (&EdgeId, u64)> = BTreeMap::new();
        for eid in self.incident_edges(node) {
            let e = &self.edges[eid];
            let other = e.other(node).expect("incident edge touches node");
            match out.get(other) {
                Some(&(_, w)) if w <= e.weight_frames => {}
                _ => {
                    out.insert(other, (eid, e.weight_frames));
                }
            }
        }
        out
    }

    /// Distance from every reachable node to `goal`.
    fn distances_to(&self, goal: &NodeId) -> HashMap<&NodeId, u64> {
        let mut dist: HashMap<&NodeId, u64> = HashMap::new();
        let goal = self.nodes.get_key_value(goal).expect("goal exists").0;
        let mut heap = BinaryHeap::new();
        dist.insert(goal, 0);
        heap.push(Reverse((0u64, goal)));
        while let Some(Reverse((d, node))) = heap.pop() {
            if dist.get(node).is_some_and(|&best| d > best) {
                continue;
            }
            for (next, (_, w)) in self.neighbors(node) {
                let nd = d + w;
                if dist.get(next).is_none_or(|&best| nd < best) {
                    dist.insert(next, nd);
                    heap.push(Reverse((nd, next)));
                }
            }
        }
        dist
    }
}

/// A route through the map: `nodes[i]` and `nodes[i + 1]` are joined by
/// `edges[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub total_weight: u64,
}

impl Route {
    /// `(node, edge leaving it)` pairs; the goal has no outgoing edge.
    pub fn steps(&self) -> impl Iterator<Item = (&NodeId, Option<&EdgeId>)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n, self.edges.get(i)))
    }

    /// `(e_i, v_i, e_{i+1})` for every node strictly inside the route.
    pub fn interior_triplets(&self) -> Vec<TripletKey> {
        self.edges
            .windows(2)
            .zip(&self.nodes[1..])
            .map(|(pair, node)| {
                TripletKey::new(
                    Port::Edge(pair[0].clone()),
                    node.clone(),
                    Port::Edge(pair[1].clone()),
                )
            })
            .collect()
    }
}

/// Dijkstra shortest route by total frame count. Among equal-weight routes
/// the one with the lexicographically smallest node-id sequence wins.
pub fn shortest_path(
    map: &TopologicalMap,
    start: &NodeId,
    goal: &NodeId,
) -> Result<Route, RouteError> {
    map.require_node(start)?;
    map.require_node(goal)?;
    let dist = map.distances_to(goal);
    let Some(&total_weight) = dist.get(start) else {
        return Err(RouteError::NoPath {
            from: start.clone(),
            to: goal.clone(),
        });
    };

    // Every step that stays on a shortest route keeps the remainder optimal,
    // so picking the smallest qualifying neighbor is lexicographically minimal.
    let mut nodes = vec![start.clone()];
    let mut edges = Vec::new();
    let mut current = start;
    while current != goal {
        let here = dist[current];
        let (next, (eid, _)) = map
            .neighbors(current)
            .into_iter()
            .find(|(n, (_, w))| dist.get(n).is_some_and(|&d| d + w == here))
            .expect("a neighbor on a shortest route exists");
        nodes.push(next.clone());
        edges.push(eid.clone());
        current = next;
    }
    Ok(Route {
        nodes,
        edges,
        total_weight,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRef {
    pub video_id: String,
    pub frame_start: u64,
    pub frame_end: u64,
    #[serde(default)]
    pub reversed: bool,
}

impl SegmentRef {
    pub fn new(video_id: impl Into<String>, frame_start: u64, frame_end: u64) -> Result<Self, RouteError> {
        let seg = Self {
            video_id: video_id.into(),
            frame_start,
            frame_end,
            reversed: false,
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        if self.frame_start >= self.frame_end {
            return Err(RouteError::InvalidSegment(format!(
                "{}: frame_start {} must be below frame_end {}",
                self.video_id, self.frame_start, self.frame_end
            )));
        }
        Ok(())
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_end - self.frame_start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletAnnotation {
    pub key: TripletKey,
    pub segment: SegmentRef,
}

impl TripletAnnotation {
    pub fn new(key: TripletKey, segment: SegmentRef) -> Self {
        Self { key, segment }
    }

    /// Checks the annotation against the map: both corridors must touch the
    /// through-node, and the two sides may only coincide for a dead-end
    /// turn-around.
    pub fn validate(&self, map: &TopologicalMap) -> Result<(), RouteError> {
        self.segment.validate()?;
        let key = &self.key;
        map.require_node(&key.node)?;
        let invalid = |reason: &str| RouteError::InvalidTriplet {
            key: key.clone(),
            reason: reason.to_owned(),
        };
        for port in [&key.incoming, &key.outgoing] {
            if let Port::Edge(eid) = port {
                let edge = map
                    .edge(eid)
                    .ok_or_else(|| RouteError::UnknownEdge(eid.clone()))?;
                if !edge.touches(&key.node) {
                    return Err(invalid("corridor does not touch the through-node"));
                }
            }
        }
        if key.incoming == Port::Terminal && key.outgoing == Port::Terminal {
            return Err(invalid("at least one side must be a corridor"));
        }
        if key.is_interior()
            && key.incoming == key.outgoing
            && map.incident_edges(&key.node).count() > 1
        {
            return Err(invalid("turn-around triplets are only allowed at dead ends"));
        }
        Ok(())
    }
}

/// Swaps the two sides of a triplet and marks its footage as played
/// backwards.
pub fn reverse_segment(annotation: &TripletAnnotation) -> TripletAnnotation {
    TripletAnnotation {
        key: TripletKey {
            incoming: annotation.key.outgoing.clone(),
            node: annotation.key.node.clone(),
            outgoing: annotation.key.incoming.clone(),
        },
        segment: SegmentRef {
            reversed: !annotation.segment.reversed,
            ..annotation.segment.clone()
        },
    }
}

/// Annotations keyed by triplet; at most one segment per key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    by_key: BTreeMap<TripletKey, TripletAnnotation>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, annotation: TripletAnnotation) -> Result<(), RouteError> {
        if self.by_key.contains_key(&annotation.key) {
            return Err(RouteError::DuplicateTriplet(annotation.key));
        }
        self.by_key.insert(annotation.key.clone(), annotation);
        Ok(())
    }

    /// Inserts unless the key is already covered. Returns whether it was added.
    pub fn insert_if_absent(&mut self, annotation: TripletAnnotation) -> bool {
        if self.by_key.contains_key(&annotation.key) {
            return false;
        }
        self.by_key.insert(annotation.key.clone(), annotation);
        true
    }

    pub fn remove(&mut self, key: &TripletKey) -> Option<TripletAnnotation> {
        self.by_key.remove(key)
    }

    pub fn get(&self, key: &TripletKey) -> Option<&TripletAnnotation> {
        self.by_key.get(key)
    }

    pub fn contains(&self, key: &TripletKey) -> bool {
        self.by_key.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TripletAnnotation> {
        self.by_key.values()
    }

    /// The set plus the reversed counterpart of every annotation whose
    /// reversed key is not already covered.
    pub fn with_reversals(&self) -> AnnotationSet {
        let mut out = self.clone();
        for a in self.iter() {
            out.insert_if_absent(reverse_segment(a));
        }
        out
    }
}

impl FromIterator<TripletAnnotation> for AnnotationSet {
    /// Later duplicates are dropped.
    fn from_iter<I: IntoIterator<Item = TripletAnnotation>>(iter: I) -> Self {
        let mut set = AnnotationSet::new();
        for a in iter {
            set.insert_if_absent(a);
        }
        set
    }
}

/// Every ordered `(e_in, v, e_out)` with two distinct corridors at `v` that
/// has no annotation. Terminal triplets are never required.
pub fn validate_coverage(map: &TopologicalMap, annotations: &AnnotationSet) -> Vec<TripletKey> {
    let mut missing = Vec::new();
    for (node, _) in map.nodes() {
        let incident: Vec<&EdgeId> = map.incident_edges(node).collect();
        for e_in in &incident {
            for e_out in &incident {
                if e_in == e_out {
                    continue;
                }
                let key = TripletKey::new(
                    Port::Edge((*e_in).clone()),
                    node.clone(),
                    Port::Edge((*e_out).clone()),
                );
                if !annotations.contains(&key) {
                    missing.push(key);
                }
            }
        }
    }
    missing
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticPath {
    pub start_node: NodeId,
    pub goal_node: NodeId,
    pub route: Route,
    pub triplets: Vec<TripletAnnotation>,
}

impl SyntheticPath {
    /// Checks that consecutive triplets share a corridor and that the chain
    /// starts at `start_node` and ends at `goal_node`.
    pub fn check_chaining(&self, map: &TopologicalMap) -> Result<(), String> {
        for w in self.triplets.windows(2) {
            if w[0].key.outgoing != w[1].key.incoming {
                return Err(format!("{} does not chain into {}", w[0].key, w[1].key));
            }
            if w[0].key.outgoing == Port::Terminal {
                return Err(format!("{} ends the chain early", w[0].key));
            }
        }
        let touches = |port: &Port, through: &NodeId, end: &NodeId| match port {
            Port::Terminal => through == end,
            Port::Edge(e) => map.edge(e).is_some_and(|edge| edge.touches(end)),
        };
        if let Some(first) = self.triplets.first() {
            if !touches(&first.key.incoming, &first.key.node, &self.start_node) {
                return Err(format!("{} does not start at {}", first.key, self.start_node));
            }
        }
        if let Some(last) = self.triplets.last() {
            if !touches(&last.key.outgoing, &last.key.node, &self.goal_node) {
                return Err(format!("{} does not end at {}", last.key, self.goal_node));
            }
        }
        if self.start_node == self.goal_node {
            return Err("start equals goal".into());
        }
        Ok(())
    }

    pub fn frame_count(&self) -> u64 {
        self.triplets.iter().map(|t| t.segment.frame_count()).sum()
    }
}

/// Assembles the footage for the shortest route from `start` to `goal`.
///
/// Every interior triplet must be annotated. Terminal triplets at the start
/// and goal are prepended/appended when the set has them.
pub fn path_between(
    map: &TopologicalMap,
    annotations: &AnnotationSet,
    start: &NodeId,
    goal: &NodeId,
) -> Result<SyntheticPath, RouteError> {
    let route = shortest_path(map, start, goal)?;
    let mut triplets = Vec::with_capacity(route.nodes.len());
    if let Some(first) = route.edges.first() {
        let head = TripletKey::new(Port::Terminal, start.clone(), Port::Edge(first.clone()));
        if let Some(a) = annotations.get(&head) {
            triplets.push(a.clone());
        }
    }
    for key in route.interior_triplets() {
        match annotations.get(&key) {
            Some(a) => triplets.push(a.clone()),
            None => return Err(RouteError::MissingTriplet(key)),
        }
    }
    if let Some(last) = route.edges.last() {
        let tail = TripletKey::new(Port::Edge(last.clone()), goal.clone(), Port::Terminal);
        if let Some(a) = annotations.get(&tail) {
            triplets.push(a.clone());
        }
    }
    Ok(SyntheticPath {
        start_node: start.clone(),
        goal_node: goal.clone(),
        route,
        triplets,
    })
}

/// Random start and goal, resampled until they differ and are connected,
/// then [`path_between`]. Deterministic for a given seed.
pub fn generate_path(
    map: &TopologicalMap,
    annotations: &AnnotationSet,
    rng_seed: u64,
) -> Result<SyntheticPath, RouteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    generate_path_with(map, annotations, &mut rng)
}

pub fn generate_path_with<R: Rng + ?Sized>(
    map: &TopologicalMap,
    annotations: &AnnotationSet,
    rng: &mut R,
) -> Result<SyntheticPath, RouteError> {
    let (start, goal) = sample_endpoints(map, rng)?;
    path_between(map, annotations, &start, &goal)
}

/// Uniform ordered pair of distinct nodes that are connected.
pub fn sample_endpoints<R: Rng + ?Sized>(
    map: &TopologicalMap,
    rng: &mut R,
) -> Result<(NodeId, NodeId), RouteError> {
    let nodes = map.node_ids();
    if nodes.len() < 2 {
        return Err(RouteError::GraphTooSmall(nodes.len()));
    }
    let component = components(map);
    if !component.values().any(|c| component.values().filter(|d| *d == c).count() > 1) {
        return Err(RouteError::NoPath {
            from: nodes[0].clone(),
            to: nodes[1].clone(),
        });
    }
    loop {
        let s = &nodes[rng.random_range(0..nodes.len())];
        let g = &nodes[rng.random_range(0..nodes.len())];
        if s != g && component[s] == component[g] {
            return Ok((s.clone(), g.clone()));
        }
    }
}

fn components(map: &TopologicalMap) -> HashMap<NodeId, usize> {
    let mut label: HashMap<NodeId, usize> = HashMap::new();
    for (root, _) in map.nodes() {
        if label.contains_key(root) {
            continue;
        }
        let id = label.len();
        let mut stack = vec![root.clone()];
        label.insert(root.clone(), id);
        while let Some(n) = stack.pop() {
            for eid in map.incident_edges(&n) {
                let other = map.edge(eid).unwrap().other(&n).unwrap();
                if !label.contains_key(other) {
                    label.insert(other.clone(), id);
                    stack.push(other.clone());
                }
            }
        }
    }
    label
}
