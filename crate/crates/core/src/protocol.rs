//! Deterministic event-driven simulation of the distributed localization
//! protocol: neighbor-list exchange, wheel construction and status
//! announcements, min-id leader election over the strong interior, then
//! position propagation outward from the leader.
//!
//! Node handlers only see their own [`NodeState`] and the incoming message.
//! The simulator owns the queue and the ground-truth network, and hands each
//! node nothing but its own measured distances at start.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{distance, fit_isometry_points, locate_by_distances, GeometryError, Isometry, Point, RESIDUAL_TOL};
use crate::network::{classify_by_oracle, strong_interior_connected, Classification, Network, NodeClass, NodeKnowledge};
use crate::seed;
use crate::wheel::{construct_communication_wheel, Verdict, Wheel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("no leader: the strong interior is empty or disconnected")]
    NoLeader,
}

/// Node references are network indices. The sender travels in the envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    NeighborExchange {
        list: Vec<(usize, f64)>,
    },
    /// Interior verdict, and once known, whether the sender is strongly interior.
    Status {
        interior: bool,
        strong: Option<bool>,
    },
    LeaderElection {
        candidate: u64,
    },
    /// Sender's global position.
    IAmAt {
        pos: Point,
    },
    /// Target's global position.
    YouAreAt {
        target: usize,
        pos: Point,
    },
    /// Global positions of the sender and of the next rim node.
    ConstructWheel {
        sender_pos: Point,
        next_rim: usize,
        next_rim_pos: Point,
    },
    /// Positions in the sender's local frame.
    ConstructWheelFind {
        sender_pos: Point,
        recipient_pos: Point,
        next_rim: usize,
        next_rim_pos: Point,
        target: usize,
    },
    /// Target's position in the requester's local frame.
    FoundAt {
        target: usize,
        pos: Point,
    },
}

impl Message {
    pub const KINDS: [&'static str; 8] = [
        "neighbor_exchange",
        "status",
        "leader_election",
        "i_am_at",
        "you_are_at",
        "construct_wheel",
        "construct_wheel_find",
        "found_at",
    ];

    pub fn kind(&self) -> &'static str {
        match self {
            Message::NeighborExchange { .. } => "neighbor_exchange",
            Message::Status { .. } => "status",
            Message::LeaderElection { .. } => "leader_election",
            Message::IAmAt { .. } => "i_am_at",
            Message::YouAreAt { .. } => "you_are_at",
            Message::ConstructWheel { .. } => "construct_wheel",
            Message::ConstructWheelFind { .. } => "construct_wheel_find",
            Message::FoundAt { .. } => "found_at",
        }
    }

    fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("messages serialize");
        hex8(&Sha256::digest(bytes))
    }
}

fn hex8(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Status {
    Unlocalized,
    Localized(Point),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionKind {
    /// A node's own wheel, used as the seed of a local frame.
    Wheel,
    /// Everything a node placed in its local frame starting from its wheel.
    Union,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub kind: ConstructionKind,
    pub hub: usize,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Routine {
    Idle,
    AwaitingFound(BTreeSet<usize>),
    /// Neighbors placed; waiting for enough announced positions to stitch.
    Stitching,
    Done,
}

/// Everything one node knows. Handlers read and write nothing else.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub node: usize,
    pub id: u64,
    pub knowledge: NodeKnowledge,
    pub wheel: Option<Wheel>,
    pub interior: Option<bool>,
    neighbor_interior: BTreeMap<usize, bool>,
    pub strong: Option<bool>,
    neighbor_strong: BTreeMap<usize, bool>,
    pub class: Option<NodeClass>,
    best_candidate: u64,
    pub is_leader: bool,
    pub status: Status,
    /// Global positions announced by neighbors.
    pub iamat: BTreeMap<usize, Point>,
    /// Positions in this node's wheel frame.
    pub local: BTreeMap<usize, Point>,
    closure: Option<BTreeMap<usize, Point>>,
    routine: Routine,
    deferred: Vec<(usize, Message)>,
    sent: BTreeSet<(usize, String)>,
}

/// What a handler asks the simulator to do.
#[derive(Debug, Default)]
pub struct Outbox {
    pub sends: Vec<(usize, Message)>,
    pub faults: Vec<String>,
    pub constructions: Vec<ConstructionRecord>,
}

impl NodeState {
    pub fn new(node: usize, id: u64, r: f64, measured: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self {
            node,
            id,
            knowledge: NodeKnowledge::own(node, r, measured),
            wheel: None,
            interior: None,
            neighbor_interior: BTreeMap::new(),
            strong: None,
            neighbor_strong: BTreeMap::new(),
            class: None,
            best_candidate: id,
            is_leader: false,
            status: Status::Unlocalized,
            iamat: BTreeMap::new(),
            local: BTreeMap::new(),
            closure: None,
            routine: Routine::Idle,
            deferred: Vec::new(),
            sent: BTreeSet::new(),
        }
    }

    pub fn position(&self) -> Option<Point> {
        match self.status {
            Status::Localized(p) => Some(p),
            Status::Unlocalized => None,
        }
    }

    fn neighbors(&self) -> Vec<usize> {
        self.knowledge.neighbor_ids().collect()
    }

    fn tol(&self) -> f64 {
        RESIDUAL_TOL * self.knowledge.r
    }

    fn broadcast(&self, out: &mut Outbox, msg: Message) {
        for u in self.neighbors() {
            out.sends.push((u, msg.clone()));
        }
    }

    /// Send unless this exact message already went to `to`.
    fn send_once(&mut self, out: &mut Outbox, to: usize, msg: Message) {
        if self.sent.insert((to, msg.digest())) {
            out.sends.push((to, msg));
        }
    }

    fn fault(&self, out: &mut Outbox, what: String) {
        out.faults.push(format!("node {}: {what}", self.id));
    }

    pub fn start_exchange(&self, out: &mut Outbox) {
        let list: Vec<(usize, f64)> = self.knowledge.neighbors().collect();
        self.broadcast(out, Message::NeighborExchange { list });
    }

    /// Run the wheel construction on the exchanged lists and announce the verdict.
    pub fn decide_interior(&mut self, out: &mut Outbox) {
        let verdict = construct_communication_wheel(&self.knowledge);
        self.interior = Some(verdict.is_interior());
        if let Verdict::Interior(w) = verdict {
            self.wheel = Some(w);
        }
        self.broadcast(
            out,
            Message::Status {
                interior: self.interior.unwrap(),
                strong: None,
            },
        );
    }

    pub fn decide_strong(&mut self, out: &mut Outbox) {
        let all_interior = self.neighbors().iter().all(|u| self.neighbor_interior.get(u) == Some(&true));
        let strong = self.interior == Some(true) && all_interior;
        self.strong = Some(strong);
        self.broadcast(
            out,
            Message::Status {
                interior: self.interior.unwrap(),
                strong: Some(strong),
            },
        );
    }

    pub fn decide_class(&mut self) {
        let class = if self.interior != Some(true) {
            NodeClass::Boundary
        } else if self.strong == Some(true) {
            NodeClass::StronglyInterior
        } else if self.neighbor_strong.values().any(|&s| s) {
            NodeClass::NonIsolatedWeaklyInterior
        } else {
            NodeClass::IsolatedWeaklyInterior
        };
        self.class = Some(class);
    }

    fn strong_neighbors(&self) -> Vec<usize> {
        self.neighbor_strong.iter().filter(|(_, &s)| s).map(|(&u, _)| u).collect()
    }

    pub fn start_election(&self, out: &mut Outbox) {
        if self.strong == Some(true) {
            for u in self.strong_neighbors() {
                out.sends.push((u, Message::LeaderElection { candidate: self.id }));
            }
        }
    }

    /// Whether flooding left this node with its own id as the minimum.
    pub fn elected(&self) -> bool {
        self.strong == Some(true) && self.best_candidate == self.id
    }

    /// Become the leader: the wheel frame is the global frame.
    pub fn lead(&mut self, out: &mut Outbox) {
        self.is_leader = true;
        let Some(wheel) = self.wheel.clone() else {
            self.fault(out, "elected without a wheel".into());
            return;
        };
        self.status = Status::Localized(Point::ORIGIN);
        self.broadcast(out, Message::IAmAt { pos: Point::ORIGIN });
        for &w in &wheel.rim {
            let pos = wheel.local_pos[&w];
            self.send_once(out, w, Message::YouAreAt { target: w, pos });
        }
        self.maybe_localize_neighbors(out);
    }

    pub fn handle(&mut self, from: usize, msg: Message, out: &mut Outbox) {
        let known = |s: &Self, v: usize| v == s.node || s.knowledge.is_neighbor(v);
        if !self.knowledge.is_neighbor(from) {
            self.fault(out, format!("dropped {} from non-neighbor {from}", msg.kind()));
            return;
        }
        match msg {
            Message::NeighborExchange { list } => {
                self.knowledge.record_list(from, list);
            }
            Message::Status { interior, strong } => {
                self.neighbor_interior.insert(from, interior);
                if let Some(s) = strong {
                    self.neighbor_strong.insert(from, s);
                }
            }
            Message::LeaderElection { candidate } => {
                if self.strong == Some(true) && candidate < self.best_candidate {
                    self.best_candidate = candidate;
                    for u in self.strong_neighbors() {
                        if u != from {
                            out.sends.push((u, Message::LeaderElection { candidate }));
                        }
                    }
                }
            }
            Message::IAmAt { pos } => {
                self.iamat.insert(from, pos);
                if self.status == Status::Unlocalized && self.iamat.len() >= 3 {
                    let refs: Vec<(Point, f64)> = self
                        .iamat
                        .iter()
                        .filter_map(|(&s, &p)| self.knowledge.dist(self.node, s).map(|d| (p, d)))
                        .collect();
                    match locate_by_distances(&refs) {
                        Ok(p) => self.localize(p, out),
                        Err(GeometryError::Collinear) => {}
                        Err(e) => self.fault(out, format!("announced positions inconsistent: {e}")),
                    }
                }
                if self.routine == Routine::Stitching {
                    self.stitch(out);
                }
                self.maybe_localize_neighbors(out);
            }
            Message::YouAreAt { target, pos } => {
                if target != self.node {
                    self.fault(out, format!("YouAreAt addressed to {target}"));
                    return;
                }
                match self.status {
                    Status::Unlocalized => self.localize(pos, out),
                    Status::Localized(own) => {
                        let gap = distance(own, pos);
                        if gap > self.tol() {
                            self.fault(out, format!("YouAreAt from {from} contradicts own position by {gap:e}"));
                        }
                    }
                }
            }
            msg @ Message::ConstructWheel { next_rim, .. } => {
                if !known(self, next_rim) {
                    self.fault(out, format!("ConstructWheel names unknown node {next_rim}"));
                    return;
                }
                if self.status == Status::Unlocalized {
                    self.deferred.push((from, msg));
                } else {
                    self.construct_wheel(from, msg, out);
                }
            }
            Message::ConstructWheelFind {
                sender_pos,
                recipient_pos,
                next_rim,
                next_rim_pos,
                target,
            } => {
                if !known(self, next_rim) || !known(self, target) {
                    self.fault(out, "ConstructWheelFind names an unknown node".into());
                    return;
                }
                let Some(placed) = self.wheel_closure(out) else {
                    return;
                };
                let (Some(&p_req), Some(&p_next), Some(&p_target)) =
                    (placed.get(&from), placed.get(&next_rim), placed.get(&target))
                else {
                    self.fault(out, format!("cannot place {from}, {next_rim} and {target} for a find request"));
                    return;
                };
                let iso = fit_isometry_points(
                    &[Point::ORIGIN, p_req, p_next],
                    &[recipient_pos, sender_pos, next_rim_pos],
                );
                match iso {
                    Ok(iso) => out.sends.push((
                        from,
                        Message::FoundAt {
                            target,
                            pos: iso.apply(p_target),
                        },
                    )),
                    Err(e) => self.fault(out, format!("find request from {from}: {e}")),
                }
            }
            Message::FoundAt { target, pos } => {
                let done = match &mut self.routine {
                    Routine::AwaitingFound(pending) if pending.contains(&target) => {
                        pending.remove(&target);
                        self.local.entry(target).or_insert(pos);
                        pending.is_empty()
                    }
                    _ => {
                        self.fault(out, format!("unexpected FoundAt for {target}"));
                        false
                    }
                };
                if done {
                    self.finish_localizing(out);
                }
            }
        }
    }

    fn localize(&mut self, p: Point, out: &mut Outbox) {
        self.status = Status::Localized(p);
        self.broadcast(out, Message::IAmAt { pos: p });
        for (from, msg) in std::mem::take(&mut self.deferred) {
            self.construct_wheel(from, msg, out);
        }
        self.maybe_localize_neighbors(out);
    }

    /// Own wheel extended to every neighbor placeable from at least three
    /// already placed adjacent nodes. Computed once.
    fn wheel_closure(&mut self, out: &mut Outbox) -> Option<BTreeMap<usize, Point>> {
        if self.closure.is_none() {
            let Some(wheel) = &self.wheel else {
                self.fault(out, "wheel request received without a wheel".into());
                return None;
            };
            let mut placed = wheel.local_pos.clone();
            place_closure(&self.knowledge, &mut placed, &self.neighbors());
            out.constructions.push(ConstructionRecord {
                kind: ConstructionKind::Wheel,
                hub: self.node,
                vertices: std::iter::once(wheel.hub).chain(wheel.rim.iter().copied()).collect(),
            });
            out.constructions.push(ConstructionRecord {
                kind: ConstructionKind::Union,
                hub: self.node,
                vertices: placed.keys().copied().collect(),
            });
            self.closure = Some(placed);
        }
        self.closure.clone()
    }

    /// Handle a deferred or immediate ConstructWheel: place the requester and
    /// the next rim node in the own frame, stitch to the global frame from
    /// three correspondences, and tell every placed node where it is.
    fn construct_wheel(&mut self, from: usize, msg: Message, out: &mut Outbox) {
        let Message::ConstructWheel {
            sender_pos,
            next_rim,
            next_rim_pos,
        } = msg
        else {
            unreachable!("only ConstructWheel is deferred");
        };
        let own = self.position().expect("construct_wheel runs once localized");
        let Some(placed) = self.wheel_closure(out) else {
            return;
        };
        let (Some(&p_req), Some(&p_next)) = (placed.get(&from), placed.get(&next_rim)) else {
            self.fault(out, format!("cannot place {from} and {next_rim} for a wheel request"));
            return;
        };
        let iso = match fit_isometry_points(&[Point::ORIGIN, p_req, p_next], &[own, sender_pos, next_rim_pos]) {
            Ok(iso) => iso,
            Err(e) => {
                self.fault(out, format!("wheel request from {from}: {e}"));
                return;
            }
        };
        for (&w, &p) in &placed {
            if w != self.node && w != from {
                self.send_once(out, w, Message::YouAreAt { target: w, pos: iso.apply(p) });
            }
        }
    }

    fn maybe_localize_neighbors(&mut self, out: &mut Outbox) {
        let ready = self.routine == Routine::Idle
            && self.wheel.is_some()
            && self.position().is_some()
            && (self.is_leader || self.iamat.len() >= 2);
        if ready {
            self.localize_neighbors(out);
        }
    }

    /// Place every neighbor in the own frame, asking rim nodes for help with
    /// neighbors that touch a single rim node, then hand out global positions.
    pub fn localize_neighbors(&mut self, out: &mut Outbox) {
        let wheel = self.wheel.clone().expect("gated on having a wheel");
        let Some(placed) = self.wheel_closure(out) else {
            return;
        };
        self.local = placed;
        let mut pending = BTreeSet::new();
        let mut requested = BTreeSet::new();
        let strong = self.strong == Some(true);
        for u in self.neighbors() {
            if self.local.contains_key(&u) || !strong {
                continue;
            }
            let touching: Vec<usize> = wheel
                .rim
                .iter()
                .copied()
                .filter(|&w| self.knowledge.adjacent(u, w) == Some(true))
                .collect();
            let [vi] = touching[..] else {
                self.fault(out, format!("neighbor {u} touches {} rim nodes and is not placed", touching.len()));
                continue;
            };
            let next = wheel.ccw_next(vi).expect("rim node has a successor");
            if self.is_leader {
                // the recipient places and notifies everything itself
                if requested.insert(vi) {
                    let msg = Message::ConstructWheel {
                        sender_pos: Point::ORIGIN,
                        next_rim: next,
                        next_rim_pos: self.local[&next],
                    };
                    self.send_once(out, vi, msg);
                }
            } else {
                let msg = Message::ConstructWheelFind {
                    sender_pos: Point::ORIGIN,
                    recipient_pos: self.local[&vi],
                    next_rim: next,
                    next_rim_pos: self.local[&next],
                    target: u,
                };
                self.send_once(out, vi, msg);
                pending.insert(u);
            }
        }
        if pending.is_empty() {
            self.finish_localizing(out);
        } else {
            self.routine = Routine::AwaitingFound(pending);
        }
    }

    fn finish_localizing(&mut self, out: &mut Outbox) {
        let before = self.local.len();
        let neighbors = self.neighbors();
        place_closure(&self.knowledge, &mut self.local, &neighbors);
        if self.local.len() > before {
            out.constructions.push(ConstructionRecord {
                kind: ConstructionKind::Union,
                hub: self.node,
                vertices: self.local.keys().copied().collect(),
            });
        }
        self.routine = Routine::Stitching;
        self.stitch(out);
    }

    /// Map the local frame to the global one through the own position and
    /// the announced positions of placed neighbors, then hand out global
    /// positions. Waits for more announcements while they are too few.
    fn stitch(&mut self, out: &mut Outbox) {
        let own = self.position().expect("localized before localizing neighbors");
        let iso = if self.is_leader {
            Isometry::IDENTITY
        } else {
            let mut src = vec![Point::ORIGIN];
            let mut dst = vec![own];
            for (s, &g) in &self.iamat {
                if let Some(&p) = self.local.get(s) {
                    src.push(p);
                    dst.push(g);
                }
            }
            match fit_isometry_points(&src, &dst) {
                Ok(iso) => iso,
                Err(GeometryError::TooFewPoints { .. } | GeometryError::Collinear) => return,
                Err(e) => {
                    self.routine = Routine::Done;
                    self.fault(out, format!("cannot stitch local frame to global: {e}"));
                    return;
                }
            }
        };
        self.routine = Routine::Done;
        let targets: Vec<(usize, Point)> = self
            .neighbors()
            .into_iter()
            .filter(|u| !self.iamat.contains_key(u))
            .filter_map(|u| self.local.get(&u).map(|&p| (u, iso.apply(p))))
            .collect();
        for (u, pos) in targets {
            self.send_once(out, u, Message::YouAreAt { target: u, pos });
        }
    }

    /// Problems visible once the queue has drained.
    fn leftover_faults(&self, out: &mut Outbox) {
        match &self.routine {
            Routine::AwaitingFound(pending) => self.fault(out, format!("still waiting for FoundAt on {pending:?}")),
            Routine::Stitching if self.strong == Some(true) => {
                self.fault(out, "never heard enough placed neighbors to stitch".into())
            }
            _ => {}
        }
        if !self.deferred.is_empty() {
            self.fault(out, format!("{} wheel requests never served", self.deferred.len()));
        }
    }
}

/// Extend `placed` by every candidate with at least three placed neighbors,
/// until nothing changes.
pub fn place_closure(k: &NodeKnowledge, placed: &mut BTreeMap<usize, Point>, candidates: &[usize]) {
    loop {
        let mut progress = false;
        for &x in candidates {
            if placed.contains_key(&x) {
                continue;
            }
            let refs: Vec<(Point, f64)> = placed
                .iter()
                .filter_map(|(&y, &p)| k.dist(x, y).filter(|_| x != y).map(|d| (p, d)))
                .collect();
            if refs.len() < 3 {
                continue;
            }
            if let Ok(p) = locate_by_distances(&refs) {
                placed.insert(x, p);
                progress = true;
            }
        }
        if !progress {
            return;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interleaving {
    /// Single global queue in enqueue order.
    Fifo,
    /// Seeded random choice among non-empty links; per-link order kept.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub interleaving: Interleaving,
    /// Event budget is `budget_factor · n · (maxdeg + 1)²`.
    pub budget_factor: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            interleaving: Interleaving::Fifo,
            budget_factor: 64,
        }
    }
}

impl SimConfig {
    pub fn random(seed: u64) -> Self {
        Self {
            seed,
            interleaving: Interleaving::Random,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub from: u64,
    pub to: u64,
    #[serde(rename = "type")]
    pub kind: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimTrace {
    pub entries: Vec<TraceEntry>,
    pub counts: BTreeMap<String, usize>,
    /// Longest causal chain of deliveries.
    pub rounds: usize,
    pub budget_exhausted: bool,
}

impl SimTrace {
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("trace entries serialize"));
            s.push('\n');
        }
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_jsonl().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.counts.get(kind).copied().unwrap_or(0)
    }
}

struct Envelope {
    from: usize,
    to: usize,
    msg: Message,
    depth: usize,
}

enum Queue {
    Fifo(VecDeque<Envelope>),
    Random {
        rng: Box<ChaCha8Rng>,
        links: BTreeMap<(usize, usize), VecDeque<Envelope>>,
        active: Vec<(usize, usize)>,
    },
}

impl Queue {
    fn new(cfg: &SimConfig) -> Self {
        match cfg.interleaving {
            Interleaving::Fifo => Queue::Fifo(VecDeque::new()),
            Interleaving::Random => Queue::Random {
                rng: Box::new(seed::rng(cfg.seed, "protocol/interleaving")),
                links: BTreeMap::new(),
                active: Vec::new(),
            },
        }
    }

    fn push(&mut self, e: Envelope) {
        match self {
            Queue::Fifo(q) => q.push_back(e),
            Queue::Random { links, active, .. } => {
                let link = links.entry((e.from, e.to)).or_default();
                if link.is_empty() {
                    active.push((e.from, e.to));
                }
                link.push_back(e);
            }
        }
    }

    fn pop(&mut self) -> Option<Envelope> {
        match self {
            Queue::Fifo(q) => q.pop_front(),
            Queue::Random { rng, links, active } => {
                if active.is_empty() {
                    return None;
                }
                let i = rng.gen_range(0..active.len());
                let key = active[i];
                let link = links.get_mut(&key).expect("active links exist");
                let e = link.pop_front();
                if link.is_empty() {
                    active.swap_remove(i);
                }
                e
            }
        }
    }
}

struct Sim<'a> {
    net: &'a Network,
    nodes: Vec<NodeState>,
    queue: Queue,
    trace: SimTrace,
    faults: Vec<String>,
    constructions: Vec<ConstructionRecord>,
    budget: usize,
}

impl<'a> Sim<'a> {
    fn new(net: &'a Network, cfg: &SimConfig) -> Self {
        let nodes = (0..net.len())
            .map(|v| NodeState::new(v, net.id(v), net.r(), net.neighbors(v).iter().copied()))
            .collect();
        let d = net.max_degree() + 1;
        Self {
            net,
            nodes,
            queue: Queue::new(cfg),
            trace: SimTrace::default(),
            faults: Vec::new(),
            constructions: Vec::new(),
            budget: cfg.budget_factor * net.len() * d * d,
        }
    }

    fn absorb(&mut self, from: usize, out: Outbox, depth: usize) {
        for (to, msg) in out.sends {
            self.queue.push(Envelope {
                from,
                to,
                msg,
                depth: depth + 1,
            });
        }
        self.faults.extend(out.faults);
        self.constructions.extend(out.constructions);
    }

    /// Let every node act once outside of message handling.
    fn each(&mut self, f: impl Fn(&mut NodeState, &mut Outbox)) {
        for v in 0..self.nodes.len() {
            let mut out = Outbox::default();
            f(&mut self.nodes[v], &mut out);
            self.absorb(v, out, 0);
        }
    }

    /// Deliver until the queue is empty or the budget is spent.
    fn drain(&mut self) {
        while let Some(e) = self.queue.pop() {
            if self.trace.entries.len() >= self.budget {
                self.trace.budget_exhausted = true;
                self.faults.push(format!("event budget of {} exhausted", self.budget));
                return;
            }
            let kind = e.msg.kind();
            self.trace.entries.push(TraceEntry {
                step: self.trace.entries.len(),
                from: self.net.id(e.from),
                to: self.net.id(e.to),
                kind: kind.to_string(),
                digest: e.msg.digest(),
            });
            *self.trace.counts.entry(kind.to_string()).or_insert(0) += 1;
            self.trace.rounds = self.trace.rounds.max(e.depth);
            let mut out = Outbox::default();
            self.nodes[e.to].handle(e.from, e.msg, &mut out);
            self.absorb(e.to, out, e.depth);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    /// Classes as the nodes decided them.
    pub classes: Vec<NodeClass>,
    pub wheels: Vec<Option<Wheel>>,
    pub leader: Option<usize>,
    pub error: Option<ProtocolError>,
    /// Global-frame positions; `None` for unlocalized nodes.
    pub positions: Vec<Option<Point>>,
    pub constructions: Vec<ConstructionRecord>,
    pub faults: Vec<String>,
    pub trace: SimTrace,
}

impl LocalizationResult {
    pub fn is_localized(&self, v: usize) -> bool {
        self.positions[v].is_some()
    }

    pub fn localized_count(&self) -> usize {
        self.positions.iter().filter(|p| p.is_some()).count()
    }

    pub fn localized(&self) -> Vec<usize> {
        (0..self.positions.len()).filter(|&v| self.is_localized(v)).collect()
    }

    /// Messages per `Σ_v (deg(v) + |rim(v)|)`.
    pub fn message_ratio(&self, net: &Network) -> f64 {
        let denom: usize = (0..net.len())
            .map(|v| net.degree(v) + self.wheels[v].as_ref().map_or(0, |w| w.rim.len()))
            .sum();
        self.trace.total() as f64 / denom.max(1) as f64
    }
}

/// Min-id flooding over the strongly interior subgraph. Returns the leader
/// and the number of election messages.
pub fn elect_leader(net: &Network, classes: &Classification) -> Result<(usize, usize), ProtocolError> {
    if !strong_interior_connected(net, classes) {
        return Err(ProtocolError::NoLeader);
    }
    let strong = |v: usize| classes.class(v) == NodeClass::StronglyInterior;
    let mut best: Vec<u64> = (0..net.len()).map(|v| net.id(v)).collect();
    let mut queue: VecDeque<(usize, usize, u64)> = VecDeque::new();
    for &v in &classes.strong {
        for &(u, _) in net.neighbors(v) {
            if strong(u) {
                queue.push_back((v, u, net.id(v)));
            }
        }
    }
    let mut messages = 0;
    while let Some((from, to, candidate)) = queue.pop_front() {
        messages += 1;
        if candidate < best[to] {
            best[to] = candidate;
            for &(u, _) in net.neighbors(to) {
                if strong(u) && u != from {
                    queue.push_back((to, u, candidate));
                }
            }
        }
    }
    let leader = classes.strong.iter().copied().find(|&v| best[v] == net.id(v)).expect("minimum keeps its own id");
    Ok((leader, messages))
}

/// Run the whole protocol on `net` until quiescence.
pub fn run_simulation(net: &Network, cfg: &SimConfig) -> LocalizationResult {
    let mut sim = Sim::new(net, cfg);

    sim.each(|s, out| s.start_exchange(out));
    sim.drain();
    sim.each(|s, out| s.decide_interior(out));
    sim.drain();
    sim.each(|s, out| s.decide_strong(out));
    sim.drain();
    sim.each(|s, _| s.decide_class());
    sim.each(|s, out| s.start_election(out));
    sim.drain();

    let elected: Vec<usize> = (0..net.len()).filter(|&v| sim.nodes[v].elected()).collect();
    // More than one local minimum means the strong interior is disconnected.
    let (leader, error) = match elected[..] {
        [leader] => {
            let mut out = Outbox::default();
            sim.nodes[leader].lead(&mut out);
            sim.absorb(leader, out, 0);
            sim.drain();
            (Some(leader), None)
        }
        _ => (None, Some(ProtocolError::NoLeader)),
    };

    for v in 0..net.len() {
        let mut out = Outbox::default();
        sim.nodes[v].leftover_faults(&mut out);
        sim.faults.extend(out.faults);
    }
    let Sim {
        nodes,
        trace,
        faults,
        constructions,
        ..
    } = sim;
    LocalizationResult {
        classes: nodes.iter().map(|s| s.class.expect("every node decides a class")).collect(),
        wheels: nodes.iter().map(|s| s.wheel.clone()).collect(),
        positions: nodes.iter().map(NodeState::position).collect(),
        leader,
        error,
        constructions,
        faults,
        trace,
    }
}

/// Whether the nodes that must be localized were, under one classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionCheck {
    /// Whether every strongly interior and non-isolated weakly interior node
    /// is localized; `None` when the strong interior is disconnected.
    pub holds: Option<bool>,
    /// Nodes that should be localized and are not.
    pub missing: Vec<u64>,
    /// Per class: (localized, total).
    pub per_class: BTreeMap<NodeClass, (usize, usize)>,
}

impl InclusionCheck {
    pub fn new(result: &LocalizationResult, net: &Network, classes: &Classification) -> Self {
        let expected = |v: usize| {
            matches!(
                classes.class(v),
                NodeClass::StronglyInterior | NodeClass::NonIsolatedWeaklyInterior
            )
        };
        let missing: Vec<u64> = (0..net.len())
            .filter(|&v| expected(v) && !result.is_localized(v))
            .map(|v| net.id(v))
            .collect();
        let mut per_class: BTreeMap<NodeClass, (usize, usize)> = NodeClass::ALL.iter().map(|&c| (c, (0, 0))).collect();
        for v in 0..net.len() {
            let e = per_class.get_mut(&classes.class(v)).unwrap();
            e.1 += 1;
            if result.is_localized(v) {
                e.0 += 1;
            }
        }
        Self {
            holds: strong_interior_connected(net, classes).then_some(missing.is_empty()),
            missing,
            per_class,
        }
    }

    pub fn fraction(&self, class: NodeClass) -> Option<f64> {
        self.per_class
            .get(&class)
            .filter(|(_, total)| *total > 0)
            .map(|&(l, t)| l as f64 / t as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub localized: usize,
    /// Max distance to ground truth after alignment, when at least three
    /// nodes are localized.
    pub max_residual: Option<f64>,
    pub alignment: Option<Isometry>,
    /// Inclusion under the classes the nodes computed with their wheels.
    pub protocol: InclusionCheck,
    /// Inclusion under the exact arc-union classes.
    pub oracle: InclusionCheck,
}

/// Three well-spread localized reference nodes: the lowest index, the node
/// farthest from it, and the node spanning the largest triangle with both.
pub fn reference_nodes(positions: &[Option<Point>]) -> Option<[usize; 3]> {
    let located: Vec<(usize, Point)> = positions.iter().enumerate().filter_map(|(v, p)| p.map(|p| (v, p))).collect();
    let &(a, pa) = located.first()?;
    let &(b, pb) = located
        .iter()
        .max_by(|x, y| distance(pa, x.1).total_cmp(&distance(pa, y.1)).then(y.0.cmp(&x.0)))?;
    let &(c, _) = located.iter().max_by(|x, y| {
        let ax = (pb - pa).cross(x.1 - pa).abs();
        let ay = (pb - pa).cross(y.1 - pa).abs();
        ax.total_cmp(&ay).then(y.0.cmp(&x.0))
    })?;
    (a != b && b != c && a != c).then_some([a, b, c])
}

/// Compare a run against ground truth modulo one isometry.
pub fn verify_localization(result: &LocalizationResult, net: &Network) -> LocalizationReport {
    let localized = result.localized_count();
    let alignment = reference_nodes(&result.positions).and_then(|refs| {
        let src: Vec<Point> = refs.iter().map(|&v| result.positions[v].unwrap()).collect();
        let dst: Vec<Point> = refs.iter().map(|&v| net.position(v)).collect();
        fit_isometry_points(&src, &dst).ok()
    });
    let max_residual = alignment.map(|iso| {
        result
            .positions
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| distance(iso.apply(p), net.position(v))))
            .fold(0.0, f64::max)
    });
    let own = Classification {
        strong: (0..net.len()).filter(|&v| result.classes[v] == NodeClass::StronglyInterior).collect(),
        classes: result.classes.clone(),
    };
    LocalizationReport {
        localized,
        max_residual: if localized >= 3 { max_residual } else { None },
        alignment,
        protocol: InclusionCheck::new(result, net, &own),
        oracle: InclusionCheck::new(result, net, &classify_by_oracle(net)),
    }
}
