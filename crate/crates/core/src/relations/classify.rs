//! Duplicate / nesting / intersection classification of site pairs.

use std::collections::BTreeMap;

use geo::Polygon;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::{SiteIndex, SitePolygon};
use super::overlap::{pairwise_overlap_ratio, OverlapOptions};
use crate::error::{Error, Result};
use crate::geometry::planar::polygon_area;
use crate::ids::SiteId;
use crate::Scalar;

/// Default share of both areas above which two sites are duplicates.
pub const DUPLICATE_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Duplicate,
    ANestedInB,
    BNestedInA,
    Intersecting,
    Disjoint,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Duplicate => "duplicate",
            Relation::ANestedInB => "a_nested_in_b",
            Relation::BNestedInA => "b_nested_in_a",
            Relation::Intersecting => "intersecting",
            Relation::Disjoint => "disjoint",
        }
    }

    pub fn parse(s: &str) -> Option<Relation> {
        Some(match s {
            "duplicate" => Relation::Duplicate,
            "a_nested_in_b" => Relation::ANestedInB,
            "b_nested_in_a" => Relation::BNestedInA,
            "intersecting" => Relation::Intersecting,
            "disjoint" => Relation::Disjoint,
            _ => return None,
        })
    }

    pub fn flipped(self) -> Relation {
        match self {
            Relation::ANestedInB => Relation::BNestedInA,
            Relation::BNestedInA => Relation::ANestedInB,
            other => other,
        }
    }
}

/// Comparisons are strict ("more than").
pub fn classify_pair<T: Scalar>(ratio_a: T, ratio_b: T, threshold: T) -> Relation {
    match (ratio_a > threshold, ratio_b > threshold) {
        (true, true) => Relation::Duplicate,
        (true, false) => Relation::ANestedInB,
        (false, true) => Relation::BNestedInA,
        (false, false) if ratio_a > T::zero() || ratio_b > T::zero() => Relation::Intersecting,
        _ => Relation::Disjoint,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationRecord<T: Scalar> {
    pub site_a: SiteId,
    pub site_b: SiteId,
    pub ratio_a: T,
    pub ratio_b: T,
    pub relation: Relation,
}

impl<T: Scalar> RelationRecord<T> {
    pub fn mirrored(&self) -> Self {
        RelationRecord {
            site_a: self.site_b.clone(),
            site_b: self.site_a.clone(),
            ratio_a: self.ratio_b,
            ratio_b: self.ratio_a,
            relation: self.relation.flipped(),
        }
    }
}

/// Site or pair that could not be classified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationWarning {
    pub site: SiteId,
    pub other: Option<SiteId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationOutput<T: Scalar> {
    /// Non-disjoint pairs in both orientations, sorted by `(site_a, site_b)`.
    pub records: Vec<RelationRecord<T>>,
    pub warnings: Vec<RelationWarning>,
}

fn is_degenerate<T: Scalar>(p: &Polygon<T>) -> bool {
    !(polygon_area(p) > T::zero())
}

fn evaluate_pair<T: Scalar>(
    a: &SitePolygon<T>,
    b: &SitePolygon<T>,
    threshold: T,
    opts: &OverlapOptions,
) -> std::result::Result<Option<RelationRecord<T>>, RelationWarning> {
    match pairwise_overlap_ratio(&a.polygon, &b.polygon, opts) {
        Ok((ra, rb)) => {
            let relation = classify_pair(ra, rb, threshold);
            Ok((relation != Relation::Disjoint).then(|| RelationRecord {
                site_a: a.id.clone(),
                site_b: b.id.clone(),
                ratio_a: ra,
                ratio_b: rb,
                relation,
            }))
        }
        Err(e) => Err(RelationWarning {
            site: a.id.clone(),
            other: Some(b.id.clone()),
            message: Error::Intersection {
                a: a.id.to_string(),
                b: b.id.to_string(),
                reason: e.to_string(),
            }
            .to_string(),
        }),
    }
}

fn degenerate_warnings<T: Scalar>(sites: &[SitePolygon<T>]) -> (Vec<bool>, Vec<RelationWarning>) {
    let skip: Vec<bool> = sites.iter().map(|s| is_degenerate(&s.polygon)).collect();
    let mut warnings: Vec<RelationWarning> = sites
        .iter()
        .zip(&skip)
        .filter(|(_, &d)| d)
        .map(|(s, _)| RelationWarning {
            site: s.id.clone(),
            other: None,
            message: "zero-area polygon skipped in relation detection".into(),
        })
        .collect();
    warnings.sort_by(|x, y| x.site.cmp(&y.site));
    (skip, warnings)
}

fn finish<T: Scalar>(
    results: Vec<std::result::Result<Option<RelationRecord<T>>, RelationWarning>>,
    mut warnings: Vec<RelationWarning>,
) -> RelationOutput<T> {
    let mut records = Vec::new();
    for r in results {
        match r {
            Ok(Some(rec)) => {
                records.push(rec.mirrored());
                records.push(rec);
            }
            Ok(None) => {}
            Err(w) => warnings.push(w),
        }
    }
    records.sort_by(|x, y| (&x.site_a, &x.site_b).cmp(&(&y.site_a, &y.site_b)));
    warnings.sort_by(|x, y| (&x.site, &x.other).cmp(&(&y.site, &y.other)));
    RelationOutput { records, warnings }
}

/// Classifies every candidate pair of the index.
///
/// Each unordered pair is evaluated once and emitted in both orientations.
/// The output does not depend on input order or on the number of workers.
pub fn classify_relations<T: Scalar>(
    index: &SiteIndex<T>,
    sites: &[SitePolygon<T>],
    threshold: T,
    opts: &OverlapOptions,
) -> Result<RelationOutput<T>> {
    if index.len() != sites.len() || sites.iter().enumerate().any(|(i, s)| index.id(i) != &s.id) {
        return Err(Error::InvalidInput("site index was built over a different collection".into()));
    }
    let (skip, warnings) = degenerate_warnings(sites);
    let results: Vec<_> = index
        .candidate_pairs()
        .into_par_iter()
        .filter(|&(a, b)| !skip[a] && !skip[b])
        .map(|(a, b)| evaluate_pair(&sites[a], &sites[b], threshold, opts))
        .collect();
    Ok(finish(results, warnings))
}

/// All-pairs reference implementation used to check the indexed path.
pub fn classify_relations_brute_force<T: Scalar>(
    sites: &[SitePolygon<T>],
    threshold: T,
    opts: &OverlapOptions,
) -> RelationOutput<T> {
    let (skip, warnings) = degenerate_warnings(sites);
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&i, &j| sites[i].id.cmp(&sites[j].id));
    let results: Vec<_> = (0..order.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let order = &order;
            let skip = &skip;
            (i + 1..order.len()).filter_map(move |j| {
                let (a, b) = (order[i], order[j]);
                if skip[a] || skip[b] {
                    return None;
                }
                match evaluate_pair(&sites[a], &sites[b], threshold, opts) {
                    Ok(None) => None,
                    other => Some(other),
                }
            })
        })
        .collect();
    finish(results, warnings)
}

/// Per-site view of the relation records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SiteRelations {
    pub nested_in: Vec<SiteId>,
    pub contains: Vec<SiteId>,
    pub intersecting_with: Vec<SiteId>,
    pub duplicate_of: Vec<SiteId>,
}

impl SiteRelations {
    /// Subset of another site, or a duplicate whose partner has a smaller id
    /// (the smallest id represents a duplicate group).
    pub fn is_subset(&self, own: &SiteId) -> bool {
        !self.nested_in.is_empty() || self.duplicate_of.iter().any(|d| d < own)
    }

    pub fn is_superset(&self) -> bool {
        !self.contains.is_empty()
    }

    pub fn has_intersections(&self) -> bool {
        !self.intersecting_with.is_empty()
    }
}

/// Groups mirrored records by their `site_a`.
pub fn summarize_relations<T: Scalar>(records: &[RelationRecord<T>]) -> BTreeMap<SiteId, SiteRelations> {
    let mut out: BTreeMap<SiteId, SiteRelations> = BTreeMap::new();
    for r in records {
        let entry = out.entry(r.site_a.clone()).or_default();
        let other = r.site_b.clone();
        match r.relation {
            Relation::Duplicate => entry.duplicate_of.push(other),
            Relation::ANestedInB => entry.nested_in.push(other),
            Relation::BNestedInA => entry.contains.push(other),
            Relation::Intersecting => entry.intersecting_with.push(other),
            Relation::Disjoint => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_classification() {
        assert_eq!(classify_pair(0.96, 0.97, 0.95), Relation::Duplicate);
        assert_eq!(classify_pair(1.0, 0.5, 0.95), Relation::ANestedInB);
        assert_eq!(classify_pair(0.5, 1.0, 0.95), Relation::BNestedInA);
        assert_eq!(classify_pair(0.4, 0.3, 0.95), Relation::Intersecting);
        assert_eq!(classify_pair(0.0, 0.0, 0.95), Relation::Disjoint);
        // strict comparison
        assert_eq!(classify_pair(0.95, 0.95, 0.95), Relation::Intersecting);
    }

    #[test]
    fn mirroring_flips_nesting() {
        let r = RelationRecord {
            site_a: SiteId::from("a"),
            site_b: SiteId::from("b"),
            ratio_a: 1.0,
            ratio_b: 0.5,
            relation: Relation::ANestedInB,
        };
        let m = r.mirrored();
        assert_eq!(m.site_a.as_str(), "b");
        assert_eq!(m.relation, Relation::BNestedInA);
        assert_eq!((m.ratio_a, m.ratio_b), (0.5, 1.0));
        assert_eq!(m.mirrored(), r);
    }

    #[test]
    fn duplicate_representative_is_smallest_id() {
        let rel = SiteRelations {
            duplicate_of: vec![SiteId::from("b")],
            ..Default::default()
        };
        assert!(!rel.is_subset(&SiteId::from("a")));
        assert!(rel.is_subset(&SiteId::from("c")));
    }
}
