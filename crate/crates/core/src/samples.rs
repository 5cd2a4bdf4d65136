//! Example networks shipped with the crate.

use crate::netgraph::{parse_network, Network};

pub const TWO_RELAY: &str = include_str!("../graphs/two-relay.json");
pub const SHARED_BOTTLENECK: &str = include_str!("../graphs/shared-bottleneck.json");
pub const DISJOINT_SESSIONS: &str = include_str!("../graphs/disjoint-sessions.json");
pub const DIAMOND: &str = include_str!("../graphs/diamond.json");

/// `(name, JSON text)` for every bundled graph.
pub const ALL: [(&str, &str); 4] = [
    ("two-relay", TWO_RELAY),
    ("shared-bottleneck", SHARED_BOTTLENECK),
    ("disjoint-sessions", DISJOINT_SESSIONS),
    ("diamond", DIAMOND),
];

pub fn by_name(name: &str) -> Option<Network> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_network(text.as_bytes()).expect("bundled graphs are valid"))
}

pub fn two_relay() -> Network {
    by_name("two-relay").unwrap()
}

pub fn shared_bottleneck() -> Network {
    by_name("shared-bottleneck").unwrap()
}

pub fn disjoint_sessions() -> Network {
    by_name("disjoint-sessions").unwrap()
}

pub fn diamond() -> Network {
    by_name("diamond").unwrap()
}
