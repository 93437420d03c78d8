//! Application-layer multicast over a placed friend group: trees along
//! friendships, ESM/Narada meshes and NICE hierarchies, compared on delivery
//! delay, stretch and link stress.

mod esm;
mod experiment;
mod group;
mod nice;
mod stats;
mod tree;

pub use esm::{build_esm_mesh, build_esm_tree, esm_tree, EsmMesh, EsmParams};
pub use experiment::{fig8_experiment, Fig8Params, Fig8Result, Fig8Row, Fig8Summary, Protocol, FIG8_CSV_HEADER};
pub use group::{select_friend_group, DelayMatrix, MulticastGroup};
pub use nice::{build_nice_hierarchy, nice_tree, Cluster, NiceHierarchy};
pub use stats::{delay_stats, delivery_stats, DeliveryStats};
pub use tree::{build_social_tree, OverlayTree, SocialTreeMode};
