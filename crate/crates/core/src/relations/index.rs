//! Bounding-box tree over site polygons.

use std::collections::BTreeMap;

use geo::{Polygon, Rect};
use rayon::prelude::*;
use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use crate::error::{Error, Result};
use crate::geometry::polygon_bounds;
use crate::ids::SiteId;
use crate::Scalar;

/// A site id paired with its derived lon/lat polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct SitePolygon<T: Scalar> {
    pub id: SiteId,
    pub polygon: Polygon<T>,
}

impl<T: Scalar> SitePolygon<T> {
    pub fn new(id: impl Into<SiteId>, polygon: Polygon<T>) -> Self {
        SitePolygon {
            id: id.into(),
            polygon,
        }
    }
}

type Entry<T> = GeomWithData<Rectangle<[T; 2]>, usize>;

/// Read-only R-tree over the bounding boxes of a site collection.
///
/// Slots refer to positions in the slice the index was built from.
#[derive(Debug)]
pub struct SiteIndex<T: Scalar> {
    tree: RTree<Entry<T>>,
    ids: Vec<SiteId>,
    bounds: Vec<Option<Rect<T>>>,
}

pub(crate) fn rect_envelope<T: Scalar>(r: &Rect<T>) -> AABB<[T; 2]> {
    AABB::from_corners([r.min().x, r.min().y], [r.max().x, r.max().y])
}

pub(crate) fn rects_overlap<T: Scalar>(a: &Rect<T>, b: &Rect<T>) -> bool {
    a.min().x <= b.max().x && b.min().x <= a.max().x && a.min().y <= b.max().y && b.min().y <= a.max().y
}

/// Bulk-loads the index. Duplicate ids are rejected.
pub fn build_site_index<T: Scalar>(sites: &[SitePolygon<T>]) -> Result<SiteIndex<T>> {
    let mut seen: BTreeMap<&SiteId, usize> = BTreeMap::new();
    for s in sites {
        *seen.entry(&s.id).or_default() += 1;
    }
    let dups: Vec<String> = seen
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(id, _)| id.to_string())
        .collect();
    if !dups.is_empty() {
        return Err(Error::DuplicateSiteIds(dups));
    }
    let bounds: Vec<Option<Rect<T>>> = sites.iter().map(|s| polygon_bounds(&s.polygon)).collect();
    let entries: Vec<Entry<T>> = bounds
        .iter()
        .enumerate()
        .filter_map(|(slot, b)| {
            b.as_ref().map(|r| {
                GeomWithData::new(
                    Rectangle::from_corners([r.min().x, r.min().y], [r.max().x, r.max().y]),
                    slot,
                )
            })
        })
        .collect();
    Ok(SiteIndex {
        tree: RTree::bulk_load(entries),
        ids: sites.iter().map(|s| s.id.clone()).collect(),
        bounds,
    })
}

impl<T: Scalar> SiteIndex<T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, slot: usize) -> &SiteId {
        &self.ids[slot]
    }

    pub fn bounds(&self, slot: usize) -> Option<&Rect<T>> {
        self.bounds[slot].as_ref()
    }

    /// Slots whose boxes intersect `query` (touching counts), ascending.
    pub fn query(&self, query: &Rect<T>) -> Vec<usize> {
        let mut hits: Vec<usize> = self
            .tree
            .locate_in_envelope_intersecting(&rect_envelope(query))
            .map(|e| e.data)
            .collect();
        hits.sort_unstable();
        hits
    }

    /// Every unordered pair of slots with overlapping boxes, as `(a, b)` with
    /// `id(a) < id(b)`, sorted by id.
    pub fn candidate_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = (0..self.ids.len())
            .into_par_iter()
            .flat_map_iter(|a| {
                let hits = match &self.bounds[a] {
                    Some(r) => self.query(r),
                    None => Vec::new(),
                };
                hits.into_iter()
                    .filter(move |&b| self.ids[a] < self.ids[b])
                    .map(move |b| (a, b))
            })
            .collect();
        pairs.sort_unstable_by(|x, y| (&self.ids[x.0], &self.ids[x.1]).cmp(&(&self.ids[y.0], &self.ids[y.1])));
        pairs
    }
}
