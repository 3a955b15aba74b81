//! Spatial relations between sites and against administrative boundaries.

mod admin;
mod classify;
mod index;
mod overlap;

pub use admin::{admin_area_match, AdminLayer, AdminMatch, AdminUnit, ADMIN_MATCH_THRESHOLD};
pub use classify::{
    classify_pair, classify_relations, classify_relations_brute_force, summarize_relations, Relation,
    RelationOutput, RelationRecord, RelationWarning, SiteRelations, DUPLICATE_THRESHOLD,
};
pub use index::{build_site_index, SiteIndex, SitePolygon};
pub use overlap::{multi_overlap_ratio, pairwise_overlap_ratio, OverlapOptions};
