//! Joint distribution of the numbers of compromised nodes of each type in a
//! heterogeneous network under L-hop risk propagation.
//!
//! A node is compromised directly with probability `p_i`; a node compromised
//! in round `r` gets one attempt at each intact neighbour `j` in round
//! `r + 1` (success probability `q_ij`), and propagation stops after `L`
//! rounds. The crate computes the joint PMF of per-type counts exactly
//! ([`exact`], [`closed_form`]) or by simulation ([`sim`]), and derives
//! moments, dependence measures, orthant-order checks ([`stats`]) and
//! rule-based risk scores ([`score`]).

pub mod closed_form;
pub mod error;
pub mod exact;
pub mod network;
pub mod nodeset;
pub mod pmf;
pub mod score;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use network::{
    build_network, generate_ba, BaParams, EdgeSpec, NetworkBuilder, NetworkModel, NodeSpec,
};
pub use nodeset::NodeSet;
pub use pmf::JointPmf;
