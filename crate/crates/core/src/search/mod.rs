//! Interest search over the social overlay.
//!
//! [`interest_search_experiment`] measures how far a user has to look in the
//! static friendship graph to find someone sharing an interest.
//! [`run_query_sim`] simulates TTL-limited query forwarding between peers
//! whose friend lists adapt to which friends answer.

mod experiment;
mod peer;
mod routing;
mod sim;

pub use experiment::{
    interest_search_experiment, CategoryCdf, SearchExperimentParams, SearchExperimentResult, SEARCH_CDF_HEADER,
};
pub use peer::{evict, on_hit_update, record_miss, AdaptParams, FriendEntry, PeerState};
pub use routing::{forward_set, RoutingPolicy};
pub use sim::{
    generate_workload, run_queries, run_query_sim, QueryMetrics, QueryRecord, SimAudit, SimOutput, SimParams,
    TokenDistribution, Workload, QUERY_CSV_HEADER,
};

use crate::socialgraph::{InterestCategory, Token, UserId};

/// A lookup for `token` in `category`, issued by `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    /// Unique and increasing in injection order.
    pub id: u64,
    pub origin: UserId,
    pub category: InterestCategory,
    pub token: Token,
    pub ttl: u32,
}
