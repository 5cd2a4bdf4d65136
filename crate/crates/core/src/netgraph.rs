//! Directed acyclic networks carrying three unicast sessions.
//!
//! A [`Network`] is the validated user graph. [`ExtendedNetwork`] adds a
//! virtual sender edge `sigma:i` in front of every source and a virtual
//! receiver edge `tau:i` behind every sink, fixes a deterministic topological
//! order of edges, and indexes the adjacent edge pairs `(e', e)` that carry
//! coding coefficients.
//!
//! Sessions are indexed `0..3` in code and printed `1..=3`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SESSIONS: usize = 3;

pub type NodeIdx = usize;
pub type EdgeIdx = usize;
/// Index of an adjacent edge pair, i.e. of one coding coefficient.
pub type PairId = usize;

const SENDER_PREFIX: &str = "sigma:";
const RECEIVER_PREFIX: &str = "tau:";

/// On-disk graph format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeEntry>,
    pub sessions: Vec<SessionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionEntry {
    pub source: String,
    pub sink: String,
}

impl GraphFile {
    /// Convenience constructor; edges get ids `e0`, `e1`, ... in list order.
    pub fn from_edge_list(
        nodes: &[&str],
        edges: &[(&str, &str)],
        sessions: &[(&str, &str)],
    ) -> GraphFile {
        GraphFile {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .iter()
                .enumerate()
                .map(|(k, (from, to))| EdgeEntry {
                    id: format!("e{k}"),
                    from: from.to_string(),
                    to: to.to_string(),
                })
                .collect(),
            sessions: sessions
                .iter()
                .map(|(source, sink)| SessionEntry {
                    source: source.to_string(),
                    sink: sink.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed graph JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("node {0:?} declared twice")]
    DuplicateNode(String),
    #[error("edge id {0:?} used twice")]
    DuplicateEdge(String),
    #[error("edge id {0:?} is reserved for virtual edges")]
    ReservedEdgeId(String),
    #[error("edge {edge:?} references undeclared node {node:?}")]
    UnknownEdgeNode { edge: String, node: String },
    #[error("session {session} references undeclared node {node:?}")]
    UnknownSessionNode { session: usize, node: String },
    #[error("expected exactly 3 sessions, found {0}")]
    SessionCount(usize),
    #[error("session {0} has the same source and sink")]
    SourceIsSink(usize),
    #[error("graph has a cycle closed by edge {edge:?} ({from} -> {to})")]
    Cycle {
        edge: String,
        from: String,
        to: String,
    },
}

impl From<serde_json::Error> for GraphError {
    fn from(e: serde_json::Error) -> Self {
        GraphError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Reasons a flow-based test on an extended network cannot be run.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("zero transfer function m{}{}: no path from sender {} to receiver {}; use the regime classifier", .receiver + 1, .sender + 1, .sender + 1, .receiver + 1)]
    ZeroTransfer { receiver: usize, sender: usize },
    #[error("session index {0} out of range")]
    BadSession(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: NodeIdx,
    pub head: NodeIdx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Session {
    pub source: NodeIdx,
    pub sink: NodeIdx,
}

/// A validated DAG with three sessions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    sessions: [Session; SESSIONS],
}

pub fn parse_network(text: &[u8]) -> Result<Network, GraphError> {
    let file: GraphFile = serde_json::from_slice(text)?;
    Network::from_file(&file)
}

impl Network {
    pub fn from_file(file: &GraphFile) -> Result<Network, GraphError> {
        let mut index = HashMap::with_capacity(file.nodes.len());
        for (k, name) in file.nodes.iter().enumerate() {
            if index.insert(name.as_str(), k).is_some() {
                return Err(GraphError::DuplicateNode(name.clone()));
            }
        }

        let mut seen = HashSet::with_capacity(file.edges.len());
        let mut edges = Vec::with_capacity(file.edges.len());
        for entry in &file.edges {
            if entry.id.starts_with(SENDER_PREFIX) || entry.id.starts_with(RECEIVER_PREFIX) {
                return Err(GraphError::ReservedEdgeId(entry.id.clone()));
            }
            if !seen.insert(entry.id.as_str()) {
                return Err(GraphError::DuplicateEdge(entry.id.clone()));
            }
            let lookup = |node: &str| {
                index
                    .get(node)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownEdgeNode {
                        edge: entry.id.clone(),
                        node: node.to_string(),
                    })
            };
            edges.push(Edge {
                id: entry.id.clone(),
                tail: lookup(&entry.from)?,
                head: lookup(&entry.to)?,
            });
        }

        if file.sessions.len() != SESSIONS {
            return Err(GraphError::SessionCount(file.sessions.len()));
        }
        let mut sessions = [Session { source: 0, sink: 0 }; SESSIONS];
        for (i, s) in file.sessions.iter().enumerate() {
            let lookup = |node: &str| {
                index
                    .get(node)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownSessionNode {
                        session: i + 1,
                        node: node.to_string(),
                    })
            };
            sessions[i] = Session {
                source: lookup(&s.source)?,
                sink: lookup(&s.sink)?,
            };
            if sessions[i].source == sessions[i].sink {
                return Err(GraphError::SourceIsSink(i + 1));
            }
        }

        let net = Network {
            nodes: file.nodes.clone(),
            edges,
            sessions,
        };
        net.check_acyclic()?;
        Ok(net)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    id: e.id.clone(),
                    from: self.nodes[e.tail].clone(),
                    to: self.nodes[e.head].clone(),
                })
                .collect(),
            sessions: self
                .sessions
                .iter()
                .map(|s| SessionEntry {
                    source: self.nodes[s.source].clone(),
                    sink: self.nodes[s.sink].clone(),
                })
                .collect(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sessions(&self) -> &[Session; SESSIONS] {
        &self.sessions
    }

    /// Iterative three-colour DFS; reports the edge that reaches a node still on the stack.
    fn check_acyclic(&self) -> Result<(), GraphError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Grey,
            Black,
        }
        let mut out: Vec<Vec<EdgeIdx>> = vec![Vec::new(); self.nodes.len()];
        for (k, e) in self.edges.iter().enumerate() {
            out[e.tail].push(k);
        }
        let mut mark = vec![Mark::White; self.nodes.len()];
        for root in 0..self.nodes.len() {
            if mark[root] != Mark::White {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Grey;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(&k) = out[node].get(*next) {
                    *next += 1;
                    let head = self.edges[k].head;
                    match mark[head] {
                        Mark::White => {
                            mark[head] = Mark::Grey;
                            stack.push((head, 0));
                        }
                        Mark::Grey => {
                            let e = &self.edges[k];
                            return Err(GraphError::Cycle {
                                edge: e.id.clone(),
                                from: self.nodes[e.tail].clone(),
                                to: self.nodes[e.head].clone(),
                            });
                        }
                        Mark::Black => {}
                    }
                } else {
                    mark[node] = Mark::Black;
                    stack.pop();
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Base,
    /// `sigma_i = (s'_i, s_i)`
    Sender(usize),
    /// `tau_i = (d_i, d'_i)`
    Receiver(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XEdge {
    pub id: String,
    pub tail: NodeIdx,
    pub head: NodeIdx,
    pub kind: EdgeKind,
}

/// The network plus virtual sender/receiver edges, a topological edge order
/// and the coding-coefficient index.
#[derive(Debug, Clone)]
pub struct ExtendedNetwork {
    base: Network,
    node_count: usize,
    /// Base edges keep their indices; then `sigma` 1..3, then `tau` 1..3.
    edges: Vec<XEdge>,
    sigma: [EdgeIdx; SESSIONS],
    tau: [EdgeIdx; SESSIONS],
    order: Vec<EdgeIdx>,
    position: Vec<usize>,
    pairs: Vec<(EdgeIdx, EdgeIdx)>,
    pair_index: HashMap<(EdgeIdx, EdgeIdx), PairId>,
    in_pairs: Vec<Vec<PairId>>,
    out_edges: Vec<Vec<EdgeIdx>>,
    in_edges: Vec<Vec<EdgeIdx>>,
    /// `reach[i][j]`: some path runs from `sigma_j` to `tau_i`.
    reach: [[bool; SESSIONS]; SESSIONS],
    /// `longest[j][e]`: edge count of the longest path from `sigma_j` ending with `e`.
    longest: [Vec<Option<usize>>; SESSIONS],
}

impl ExtendedNetwork {
    pub fn new(net: &Network) -> ExtendedNetwork {
        let base_nodes = net.nodes.len();
        let node_count = base_nodes + 2 * SESSIONS;
        let mut edges: Vec<XEdge> = net
            .edges
            .iter()
            .map(|e| XEdge {
                id: e.id.clone(),
                tail: e.tail,
                head: e.head,
                kind: EdgeKind::Base,
            })
            .collect();
        let mut sigma = [0; SESSIONS];
        let mut tau = [0; SESSIONS];
        for (i, s) in net.sessions.iter().enumerate() {
            sigma[i] = edges.len();
            edges.push(XEdge {
                id: format!("{SENDER_PREFIX}{}", i + 1),
                tail: base_nodes + i,
                head: s.source,
                kind: EdgeKind::Sender(i),
            });
        }
        for (i, s) in net.sessions.iter().enumerate() {
            tau[i] = edges.len();
            edges.push(XEdge {
                id: format!("{RECEIVER_PREFIX}{}", i + 1),
                tail: s.sink,
                head: base_nodes + SESSIONS + i,
                kind: EdgeKind::Receiver(i),
            });
        }

        let mut out_edges = vec![Vec::new(); node_count];
        let mut in_edges = vec![Vec::new(); node_count];
        for (k, e) in edges.iter().enumerate() {
            out_edges[e.tail].push(k);
            in_edges[e.head].push(k);
        }

        let order = topological_edge_order(&edges, &in_edges, &out_edges);
        let mut position = vec![0; edges.len()];
        for (pos, &e) in order.iter().enumerate() {
            position[e] = pos;
        }

        // Pairs sorted by (position of downstream edge, position of upstream edge).
        let mut pairs = Vec::new();
        for &e in &order {
            let mut ups: Vec<EdgeIdx> = in_edges[edges[e].tail].clone();
            ups.sort_by_key(|&u| position[u]);
            pairs.extend(ups.into_iter().map(|u| (u, e)));
        }
        let mut in_pairs = vec![Vec::new(); edges.len()];
        let mut pair_index = HashMap::with_capacity(pairs.len());
        for (id, &(u, e)) in pairs.iter().enumerate() {
            in_pairs[e].push(id);
            pair_index.insert((u, e), id);
        }

        let mut longest: [Vec<Option<usize>>; SESSIONS] = Default::default();
        for j in 0..SESSIONS {
            let mut dist = vec![None; edges.len()];
            dist[sigma[j]] = Some(1);
            for &e in &order {
                if e == sigma[j] {
                    continue;
                }
                dist[e] = in_edges[edges[e].tail]
                    .iter()
                    .filter_map(|&u| dist[u])
                    .max()
                    .map(|d: usize| d + 1);
            }
            longest[j] = dist;
        }
        let mut reach = [[false; SESSIONS]; SESSIONS];
        for (i, row) in reach.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = longest[j][tau[i]].is_some();
            }
        }

        ExtendedNetwork {
            base: net.clone(),
            node_count,
            edges,
            sigma,
            tau,
            order,
            position,
            pairs,
            pair_index,
            in_pairs,
            out_edges,
            in_edges,
            reach,
            longest,
        }
    }

    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[XEdge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIdx) -> &XEdge {
        &self.edges[e]
    }

    pub fn sigma(&self, i: usize) -> EdgeIdx {
        self.sigma[i]
    }

    pub fn tau(&self, i: usize) -> EdgeIdx {
        self.tau[i]
    }

    /// Edges in topological order.
    pub fn edge_order(&self) -> &[EdgeIdx] {
        &self.order
    }

    /// Topological position `o(e)`.
    pub fn position(&self, e: EdgeIdx) -> usize {
        self.position[e]
    }

    /// Adjacent edge pairs `(upstream, downstream)`, indexed by [`PairId`].
    pub fn pairs(&self) -> &[(EdgeIdx, EdgeIdx)] {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_id(&self, upstream: EdgeIdx, downstream: EdgeIdx) -> Option<PairId> {
        self.pair_index.get(&(upstream, downstream)).copied()
    }

    /// Pairs whose downstream edge is `e`.
    pub fn in_pairs(&self, e: EdgeIdx) -> &[PairId] {
        &self.in_pairs[e]
    }

    pub fn out_edges(&self, node: NodeIdx) -> &[EdgeIdx] {
        &self.out_edges[node]
    }

    pub fn in_edges(&self, node: NodeIdx) -> &[EdgeIdx] {
        &self.in_edges[node]
    }

    /// Whether the path set from sender `j` to receiver `i` is nonempty.
    pub fn has_path(&self, receiver: usize, sender: usize) -> bool {
        self.reach[receiver][sender]
    }

    /// Edge count of the longest sender-to-receiver path.
    pub fn max_distance(&self) -> usize {
        (0..SESSIONS)
            .flat_map(|j| (0..SESSIONS).map(move |i| (i, j)))
            .filter_map(|(i, j)| self.longest[j][self.tau[i]])
            .max()
            .unwrap_or(0)
    }

    /// Largest in-degree of any node of the extended graph.
    pub fn max_in_degree(&self) -> usize {
        self.in_edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_ids(&self, path: &[EdgeIdx]) -> Vec<String> {
        path.iter().map(|&e| self.edges[e].id.clone()).collect()
    }

    /// Max-flow value from the tails of the given sender edges to the heads of
    /// the given receiver edges, unit capacity on every edge, stopping once
    /// `cap` units have been routed.
    pub fn max_flow_value(&self, senders: &[usize], receivers: &[usize], cap: usize) -> usize {
        self.sender_receiver_flow(senders, receivers, Some(cap))
            .value
    }

    fn sender_receiver_flow(
        &self,
        senders: &[usize],
        receivers: &[usize],
        cap: Option<usize>,
    ) -> Flow {
        let sources: Vec<NodeIdx> = senders
            .iter()
            .map(|&i| self.edges[self.sigma[i]].tail)
            .collect();
        let sinks: Vec<NodeIdx> = receivers
            .iter()
            .map(|&i| self.edges[self.tau[i]].head)
            .collect();
        unit_flow(self, &sources, &sinks, cap)
    }

    /// Min cut between `s_i` and `d_i` in the user graph.
    pub fn session_min_cut(&self, i: usize) -> usize {
        let s = self.base.sessions[i];
        unit_flow(self, &[s.source], &[s.sink], None).value
    }

    /// Looks for an edge-disjoint path pair realising either the numerator
    /// pairing `(P_ab, P_pq)` or the denominator pairing `(P_aq, P_pb)` of `quad`.
    ///
    /// Runs a max-flow from `{sigma_b, sigma_q}` to `{tau_a, tau_p}` capped at
    /// two; since the virtual edges carry one unit each, a flow of two
    /// decomposes into exactly one of the two pairings.
    pub fn disjoint_pair(&self, quad: Quad) -> Result<Option<DisjointPair>, NetError> {
        for (i, j) in quad.numerator().into_iter().chain(quad.denominator()) {
            if !self.has_path(i, j) {
                return Err(NetError::ZeroTransfer {
                    receiver: i,
                    sender: j,
                });
            }
        }
        let flow = self.sender_receiver_flow(&[quad.b, quad.q], &[quad.a, quad.p], Some(2));
        if flow.value < 2 {
            return Ok(None);
        }
        let [first, second]: [Vec<EdgeIdx>; 2] = flow.paths.try_into().expect("two flow paths");
        let starts_at = |path: &[EdgeIdx], i: usize| path.first() == Some(&self.sigma[i]);
        let ends_at = |path: &[EdgeIdx], i: usize| path.last() == Some(&self.tau[i]);
        // Order the two paths as (from sigma_b, from sigma_q).
        let (from_b, from_q) = if starts_at(&first, quad.b) {
            (first, second)
        } else {
            (second, first)
        };
        debug_assert!(starts_at(&from_b, quad.b) && starts_at(&from_q, quad.q));
        let pairing = if ends_at(&from_b, quad.a) {
            Pairing::Numerator
        } else {
            Pairing::Denominator
        };
        let paths = match pairing {
            // (P_ab, P_pq)
            Pairing::Numerator => [from_b, from_q],
            // (P_aq, P_pb)
            Pairing::Denominator => [from_q, from_b],
        };
        Ok(Some(DisjointPair { pairing, paths }))
    }

    pub fn disjoint_pair_exists(&self, quad: Quad) -> Result<bool, NetError> {
        self.disjoint_pair(quad).map(|p| p.is_some())
    }
}

/// Kahn's algorithm on the edge graph (`e'` precedes `e` when `head(e') = tail(e)`),
/// always releasing the ready edge with the lexicographically least id.
fn topological_edge_order(
    edges: &[XEdge],
    in_edges: &[Vec<EdgeIdx>],
    out_edges: &[Vec<EdgeIdx>],
) -> Vec<EdgeIdx> {
    let mut pending: Vec<usize> = edges.iter().map(|e| in_edges[e.tail].len()).collect();
    let mut ready: BinaryHeap<Reverse<(&str, EdgeIdx)>> = edges
        .iter()
        .enumerate()
        .filter(|(k, _)| pending[*k] == 0)
        .map(|(k, e)| Reverse((e.id.as_str(), k)))
        .collect();
    let mut order = Vec::with_capacity(edges.len());
    while let Some(Reverse((_, e))) = ready.pop() {
        order.push(e);
        for &next in &out_edges[edges[e].head] {
            pending[next] -= 1;
            if pending[next] == 0 {
                ready.push(Reverse((edges[next].id.as_str(), next)));
            }
        }
    }
    debug_assert_eq!(order.len(), edges.len(), "validated networks are acyclic");
    order
}

struct Flow {
    value: usize,
    /// Edge-disjoint source-to-sink paths realising the flow.
    paths: Vec<Vec<EdgeIdx>>,
}

const UNBOUNDED: u32 = u32::MAX;

/// Breadth-first augmenting paths; every edge has capacity one, the
/// super-source and super-sink arcs are unbounded.
fn unit_flow(
    xnet: &ExtendedNetwork,
    sources: &[NodeIdx],
    sinks: &[NodeIdx],
    cap: Option<usize>,
) -> Flow {
    struct Arc {
        to: usize,
        cap: u32,
        rev: usize,
        edge: Option<EdgeIdx>,
    }
    let n = xnet.node_count + 2;
    let (src, dst) = (n - 2, n - 1);
    let mut adj: Vec<Vec<Arc>> = (0..n).map(|_| Vec::new()).collect();
    let add = |adj: &mut Vec<Vec<Arc>>, from: usize, to: usize, cap: u32, edge: Option<EdgeIdx>| {
        let (rf, rt) = (adj[to].len(), adj[from].len());
        adj[from].push(Arc {
            to,
            cap,
            rev: rf,
            edge,
        });
        adj[to].push(Arc {
            to: from,
            cap: 0,
            rev: rt,
            edge: None,
        });
    };
    for (k, e) in xnet.edges.iter().enumerate() {
        add(&mut adj, e.tail, e.head, 1, Some(k));
    }
    for &s in sources {
        add(&mut adj, src, s, UNBOUNDED, None);
    }
    for &t in sinks {
        add(&mut adj, t, dst, UNBOUNDED, None);
    }

    let limit = cap.unwrap_or(usize::MAX);
    let mut value = 0;
    while value < limit {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut queue = VecDeque::from([src]);
        let mut found = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for (k, arc) in adj[u].iter().enumerate() {
                if arc.cap > 0 && arc.to != src && prev[arc.to].is_none() {
                    prev[arc.to] = Some((u, k));
                    if arc.to == dst {
                        found = true;
                        break 'bfs;
                    }
                    queue.push_back(arc.to);
                }
            }
        }
        if !found {
            break;
        }
        let mut v = dst;
        while let Some((u, k)) = prev[v] {
            let rev = adj[u][k].rev;
            adj[u][k].cap -= 1;
            adj[v][rev].cap += 1;
            v = u;
        }
        value += 1;
    }

    // Saturated forward arcs of real edges carry the flow.
    let mut used: Vec<Vec<EdgeIdx>> = vec![Vec::new(); xnet.node_count];
    for (u, arcs) in adj.iter().enumerate().take(xnet.node_count) {
        for arc in arcs {
            if let (Some(e), 0) = (arc.edge, arc.cap) {
                used[u].push(e);
            }
        }
    }
    let mut starts: Vec<NodeIdx> = adj[src]
        .iter()
        .flat_map(|a| std::iter::repeat_n(a.to, (UNBOUNDED - a.cap) as usize))
        .collect();
    starts.sort_unstable();
    // Exact when sinks have no outgoing edges, as for receiver edges.
    let paths = starts
        .into_iter()
        .map(|mut node| {
            let mut path = Vec::new();
            while let Some(e) = used[node].pop() {
                path.push(e);
                node = xnet.edges[e].head;
            }
            path
        })
        .collect();

    Flow { value, paths }
}

/// Session index quadruple `(a, b, p, q)` naming the ratio
/// `m_ab * m_pq / (m_aq * m_pb)`, with `a != p` and `b != q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quad {
    pub a: usize,
    pub b: usize,
    pub p: usize,
    pub q: usize,
}

impl Quad {
    pub fn new(a: usize, b: usize, p: usize, q: usize) -> Option<Quad> {
        let ok = [a, b, p, q].iter().all(|&x| x < SESSIONS) && a != p && b != q;
        ok.then_some(Quad { a, b, p, q })
    }

    /// `(receiver, sender)` index pairs of the numerator transfer functions.
    pub fn numerator(&self) -> [(usize, usize); 2] {
        [(self.a, self.b), (self.p, self.q)]
    }

    pub fn denominator(&self) -> [(usize, usize); 2] {
        [(self.a, self.q), (self.p, self.b)]
    }

    /// The same ratio with the roles of the two numerator factors exchanged.
    pub fn swapped(&self) -> Quad {
        Quad {
            a: self.p,
            b: self.q,
            p: self.a,
            q: self.b,
        }
    }

    /// All 36 valid quadruples in lexicographic order.
    pub fn all() -> impl Iterator<Item = Quad> {
        (0..SESSIONS).flat_map(|a| {
            (0..SESSIONS).flat_map(move |b| {
                (0..SESSIONS)
                    .flat_map(move |p| (0..SESSIONS).filter_map(move |q| Quad::new(a, b, p, q)))
            })
        })
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m{}{}*m{}{}/(m{}{}*m{}{})",
            self.a + 1,
            self.b + 1,
            self.p + 1,
            self.q + 1,
            self.a + 1,
            self.q + 1,
            self.p + 1,
            self.b + 1
        )
    }
}

/// Which product a disjoint path pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `(P_ab, P_pq)`
    Numerator,
    /// `(P_aq, P_pb)`
    Denominator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointPair {
    pub pairing: Pairing,
    /// For [`Pairing::Numerator`], paths in `P_ab` and `P_pq`; otherwise in `P_aq` and `P_pb`.
    pub paths: [Vec<EdgeIdx>; 2],
}

/// The ratio functions `p_i`, `q_i = eta / p_i` and `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioKind {
    P1,
    P2,
    P3,
    Q1,
    Q2,
    Q3,
    Eta,
}

impl RatioKind {
    pub const P: [RatioKind; 3] = [RatioKind::P1, RatioKind::P2, RatioKind::P3];
    pub const Q: [RatioKind; 3] = [RatioKind::Q1, RatioKind::Q2, RatioKind::Q3];

    pub fn quad(self) -> Option<Quad> {
        let (a, b, p, q) = match self {
            RatioKind::P1 => (3, 1, 1, 2),
            RatioKind::P2 => (3, 1, 2, 2),
            RatioKind::P3 => (1, 2, 3, 3),
            RatioKind::Q1 => (1, 1, 2, 3),
            RatioKind::Q2 => (1, 2, 2, 3),
            RatioKind::Q3 => (3, 1, 2, 3),
            RatioKind::Eta => return None,
        };
        Quad::new(a - 1, b - 1, p - 1, q - 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            RatioKind::P1 => "p1",
            RatioKind::P2 => "p2",
            RatioKind::P3 => "p3",
            RatioKind::Q1 => "q1",
            RatioKind::Q2 => "q2",
            RatioKind::Q3 => "q3",
            RatioKind::Eta => "eta",
        }
    }
}

/// `(receiver, sender)` pairs of the numerator and denominator of `eta`.
pub const ETA_NUMERATOR: [(usize, usize); 3] = [(2, 0), (0, 1), (1, 2)];
pub const ETA_DENOMINATOR: [(usize, usize); 3] = [(1, 0), (2, 1), (0, 2)];

#[cfg(test)]
mod tests {
    use super::*;

    fn net(nodes: &[&str], edges: &[(&str, &str)], sessions: &[(&str, &str)]) -> Network {
        Network::from_file(&GraphFile::from_edge_list(nodes, edges, sessions)).unwrap()
    }

    fn line() -> Network {
        net(
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c")],
            &[("a", "c"), ("a", "b"), ("b", "c")],
        )
    }

    #[test]
    fn parse_line_graph() {
        let text = serde_json::to_vec(&line().to_file()).unwrap();
        let parsed = parse_network(&text).unwrap();
        assert_eq!(parsed.nodes().len(), 3);
        assert_eq!(parsed.edges().len(), 2);
        assert_eq!(parsed, line());
    }

    #[test]
    fn parse_rejects_cycle_naming_back_edge() {
        let file =
            GraphFile::from_edge_list(&["u", "v"], &[("u", "v"), ("v", "u")], &[("u", "v"); 3]);
        match Network::from_file(&file) {
            Err(GraphError::Cycle { edge, .. }) => assert_eq!(edge, "e1"),
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_session_arity_and_bad_refs() {
        let two = GraphFile::from_edge_list(&["u", "v"], &[("u", "v")], &[("u", "v"); 2]);
        assert!(matches!(
            Network::from_file(&two),
            Err(GraphError::SessionCount(2))
        ));

        let undeclared = GraphFile::from_edge_list(&["u", "v"], &[("u", "w")], &[("u", "v"); 3]);
        assert!(matches!(
            Network::from_file(&undeclared),
            Err(GraphError::UnknownEdgeNode { .. })
        ));

        let same = GraphFile::from_edge_list(
            &["u", "v"],
            &[("u", "v")],
            &[("u", "v"), ("v", "v"), ("u", "v")],
        );
        assert!(matches!(
            Network::from_file(&same),
            Err(GraphError::SourceIsSink(2))
        ));

        let mut dup =
            GraphFile::from_edge_list(&["u", "v"], &[("u", "v"), ("u", "v")], &[("u", "v"); 3]);
        dup.edges[1].id = "e0".into();
        assert!(matches!(
            Network::from_file(&dup),
            Err(GraphError::DuplicateEdge(_))
        ));

        let mut reserved = GraphFile::from_edge_list(&["u", "v"], &[("u", "v")], &[("u", "v"); 3]);
        reserved.edges[0].id = "sigma:1".into();
        assert!(matches!(
            Network::from_file(&reserved),
            Err(GraphError::ReservedEdgeId(_))
        ));
    }

    #[test]
    fn parse_rejects_unknown_keys_and_bad_json() {
        let text = br#"{"nodes":["a","b"],"edges":[],"sessions":[],"extra":1}"#;
        assert!(matches!(parse_network(text), Err(GraphError::Json { .. })));
        assert!(matches!(
            parse_network(b"{not json"),
            Err(GraphError::Json { .. })
        ));
    }

    #[test]
    fn extension_adds_six_virtual_edges() {
        let n = line();
        let x = ExtendedNetwork::new(&n);
        assert_eq!(x.edges().len(), n.edges().len() + 6);
        for i in 0..SESSIONS {
            assert!(x.in_edges(x.edge(x.sigma(i)).tail).is_empty());
            assert!(x.out_edges(x.edge(x.tau(i)).head).is_empty());
            assert!(x.in_pairs(x.sigma(i)).is_empty());
        }
    }

    #[test]
    fn edge_order_is_topological_and_deterministic() {
        let n = net(
            &["s", "a", "b", "t"],
            &[("s", "a"), ("s", "b"), ("a", "t"), ("b", "t"), ("a", "b")],
            &[("s", "t"), ("a", "t"), ("s", "b")],
        );
        let x = ExtendedNetwork::new(&n);
        let y = ExtendedNetwork::new(&n);
        assert_eq!(x.edge_order(), y.edge_order());
        let mut sorted = x.edge_order().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..x.edges().len()).collect::<Vec<_>>());
        for &(u, e) in x.pairs() {
            assert!(x.position(u) < x.position(e));
            assert_eq!(x.edge(u).head, x.edge(e).tail);
        }
        // sigma_1 precedes everything reachable from s_1.
        for k in 0..x.edges().len() {
            if x.edge(k).kind == EdgeKind::Base {
                assert!(x.position(x.sigma(0)) < x.position(k));
            }
        }
    }

    #[test]
    fn flow_values() {
        // Both sessions squeezed through u -> v.
        let shared = net(
            &["s1", "s2", "u", "v", "d1", "d2"],
            &[
                ("s1", "u"),
                ("s2", "u"),
                ("u", "v"),
                ("v", "d1"),
                ("v", "d2"),
            ],
            &[("s1", "d1"), ("s2", "d2"), ("s1", "d2")],
        );
        assert_eq!(
            ExtendedNetwork::new(&shared).max_flow_value(&[0, 1], &[0, 1], 2),
            1
        );

        let disjoint = net(
            &["s1", "s2", "d1", "d2"],
            &[("s1", "d1"), ("s2", "d2")],
            &[("s1", "d1"), ("s2", "d2"), ("s1", "d2")],
        );
        assert_eq!(
            ExtendedNetwork::new(&disjoint).max_flow_value(&[0, 1], &[0, 1], 2),
            2
        );
    }

    #[test]
    fn session_min_cuts() {
        let x = ExtendedNetwork::new(&line());
        assert_eq!(x.session_min_cut(0), 1);

        let branches = net(
            &["s", "a", "b", "t", "z"],
            &[("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")],
            &[("s", "t"), ("s", "a"), ("t", "z")],
        );
        let x = ExtendedNetwork::new(&branches);
        assert_eq!(x.session_min_cut(0), 2);
        assert_eq!(x.session_min_cut(2), 0);
    }

    #[test]
    fn max_distance_counts_virtual_edges() {
        let x = ExtendedNetwork::new(&line());
        // sigma_1, a->b, b->c, tau_1
        assert_eq!(x.max_distance(), 4);
        assert_eq!(x.max_in_degree(), 2);
    }

    #[test]
    fn ratio_quadruples() {
        for kind in RatioKind::P.into_iter().chain(RatioKind::Q) {
            let q = kind.quad().unwrap();
            assert!(q.a != q.p && q.b != q.q);
        }
        assert_eq!(RatioKind::Eta.quad(), None);
        assert_eq!(Quad::all().count(), 36);
        let p1 = RatioKind::P1.quad().unwrap();
        assert_eq!(p1.to_string(), "m31*m12/(m32*m11)");
    }

    #[test]
    fn disjoint_pair_reports_zero_transfer() {
        let disjoint = net(
            &["s1", "s2", "s3", "d1", "d2", "d3"],
            &[("s1", "d1"), ("s2", "d2"), ("s3", "d3")],
            &[("s1", "d1"), ("s2", "d2"), ("s3", "d3")],
        );
        let x = ExtendedNetwork::new(&disjoint);
        assert!(matches!(
            x.disjoint_pair(RatioKind::P1.quad().unwrap()),
            Err(NetError::ZeroTransfer { .. })
        ));
    }
}
