//! Small graph families for exhaustive and randomized sweeps.
//!
//! Nodes are named `v0`, `v1`, ... in a topological order, so every edge
//! `(u, w)` has `u < w` and acyclicity holds by construction.

use rand::Rng;

use crate::netgraph::{ExtendedNetwork, GraphFile, Network, SESSIONS};

/// Session endpoints as node indices, `(source, sink)` per session.
pub type Placement = [(usize, usize); SESSIONS];

pub fn network(nodes: usize, edges: &[(usize, usize)], sessions: &Placement) -> Network {
    let names: Vec<String> = (0..nodes).map(|v| format!("v{v}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let edges: Vec<(&str, &str)> = edges.iter().map(|&(u, w)| (refs[u], refs[w])).collect();
    let sessions: Vec<(&str, &str)> = sessions.iter().map(|&(s, d)| (refs[s], refs[d])).collect();
    Network::from_file(&GraphFile::from_edge_list(&refs, &edges, &sessions))
        .expect("family graphs are valid DAGs")
}

/// All forward pairs `(u, w)`, `u < w`, in lexicographic order.
pub fn forward_pairs(nodes: usize) -> Vec<(usize, usize)> {
    (0..nodes)
        .flat_map(|u| (u + 1..nodes).map(move |w| (u, w)))
        .collect()
}

/// Every simple edge set over the forward pairs of `nodes` nodes with at most
/// `max_edges` edges, enumerated by bitmask.
pub fn simple_dags(nodes: usize, max_edges: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    let pairs = forward_pairs(nodes);
    assert!(pairs.len() < 32, "too many node pairs to enumerate");
    (0u32..1 << pairs.len())
        .filter(move |mask| mask.count_ones() as usize <= max_edges)
        .map(move |mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
}

/// Every assignment of sources and sinks to the three sessions with
/// source != sink. Endpoints may be shared between sessions.
pub fn placements(nodes: usize) -> impl Iterator<Item = Placement> {
    let ends: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|s| (0..nodes).filter(move |&d| d != s).map(move |d| (s, d)))
        .collect();
    let n = ends.len();
    (0..n * n * n).map(move |k| [ends[k / (n * n)], ends[k / n % n], ends[k % n]])
}

/// A random DAG on 3 to 6 nodes with 1 to `max_edges` edges (parallel edges
/// allowed). Sources are drawn from the earlier half of the node order and
/// sinks from the later half, which makes reachability likely.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, max_edges: usize) -> Network {
    let nodes = rng.gen_range(3..=6);
    let pairs = forward_pairs(nodes);
    let count = rng.gen_range(1..=max_edges);
    let edges: Vec<(usize, usize)> = (0..count)
        .map(|_| pairs[rng.gen_range(0..pairs.len())])
        .collect();
    let half = nodes / 2;
    let sessions: Placement =
        std::array::from_fn(|_| (rng.gen_range(0..half), rng.gen_range(half..nodes)));
    network(nodes, &edges, &sessions)
}

/// Like [`random_network`], redrawn until every sender reaches every
/// receiver so that all nine transfer functions are nonzero.
pub fn random_full_network<R: Rng + ?Sized>(rng: &mut R, max_edges: usize) -> Network {
    loop {
        let net = random_network(rng, max_edges);
        let x = ExtendedNetwork::new(&net);
        if (0..SESSIONS).all(|i| (0..SESSIONS).all(|j| x.has_path(i, j))) {
            return net;
        }
    }
}
