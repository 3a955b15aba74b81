//! Output tables. Numbers use the shortest text that round-trips, so
//! identical values always give identical bytes.

use std::path::Path;

use crate::augment::{AugmentationRecord, LossWindow, CLIMATE_OFFSETS};
use crate::error::{Error, Evaluated, Result};
use crate::relations::{AdminMatch, RelationRecord, SiteRelations};
use crate::scoring::{Indicator, IndicatorVector, LdisScore};
use crate::vegetation::ZoneIndexSeries;

use super::catalog::{DroppedRecord, CANONICAL_FIELDS};
use super::run::PreparedSite;

pub const NA: &str = "na";

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn eval_num(v: &Evaluated<f64>) -> String {
    match v {
        Ok(x) => num(*x),
        Err(_) => NA.into(),
    }
}

fn join_ids<T: std::fmt::Display>(ids: &[T]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

pub fn sites_table(sites: &[PreparedSite]) -> Table {
    let mut header: Vec<String> = vec!["site_id".into(), "parent_id".into(), "source_kind".into(), "geometry_kind".into()];
    header.extend(CANONICAL_FIELDS.iter().skip(1).map(|f| format!("{f}_reported")));
    header.extend(
        [
            "extra_reported",
            "iso3_derived",
            "planting_date_derived",
            "planting_date_type_derived",
            "planting_date_low_confidence",
            "area_km2_normalized",
            "area_km2_derived",
            "perimeter_km_derived",
            "centroid_lon",
            "centroid_lat",
            "is_valid",
            "circularity",
            "is_perfectly_circular",
            "is_point_origin",
        ]
        .map(String::from),
    );
    let mut t = Table::new(header);
    for s in sites {
        let r = &s.record;
        let q = &s.quality;
        let mut row = vec![
            r.site_id.to_string(),
            r.parent_id.to_string(),
            r.source_kind.as_str().to_string(),
            r.geometry.kind().as_str().to_string(),
        ];
        row.extend(CANONICAL_FIELDS.iter().skip(1).map(|f| r.reported_field(f).unwrap_or("").to_string()));
        let extra = if r.extra.is_empty() {
            String::new()
        } else {
            serde_json::to_string(&r.extra).unwrap_or_default()
        };
        let centroid = r.geometry.centroid;
        row.extend([
            extra,
            r.iso3.clone().unwrap_or_default(),
            r.planting_date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default(),
            r.planting_date_type.as_str().to_string(),
            (r.planting_date_type != super::catalog::PlantingDateType::Planting).to_string(),
            opt_num(r.area_km2_reported),
            num(q.area_km2),
            num(q.perimeter_km),
            opt_num(centroid.map(|c| c.x)),
            opt_num(centroid.map(|c| c.y)),
            q.is_valid.to_string(),
            opt_num(q.circularity),
            q.is_perfectly_circular.to_string(),
            q.is_point_origin.to_string(),
        ]);
        t.push(row);
    }
    t
}

pub fn dropped_table(dropped: &[DroppedRecord]) -> Table {
    let mut t = Table::new(["site_id", "project_id", "name", "reason"]);
    for d in dropped {
        t.push(vec![d.site_id.clone(), d.project_id.clone(), d.name.clone(), d.reason.clone()]);
    }
    t
}

pub fn relations_table(records: &[RelationRecord<f64>]) -> Table {
    let mut t = Table::new(["site_a", "site_b", "ratio_a", "ratio_b", "relation"]);
    for r in records {
        t.push(vec![
            r.site_a.to_string(),
            r.site_b.to_string(),
            num(r.ratio_a),
            num(r.ratio_b),
            r.relation.as_str().to_string(),
        ]);
    }
    t
}

pub fn flags_table(
    sites: &[PreparedSite],
    relations: &[Option<SiteRelations>],
    admin: &[Option<AdminMatch<f64>>],
    annulus_overlap: Option<&[Option<bool>]>,
) -> Table {
    let mut t = Table::new([
        "site_id",
        "relations_evaluated",
        "is_subset",
        "is_superset",
        "nested_in",
        "contains",
        "duplicate_of",
        "intersecting_with",
        "admin_unit",
        "admin_site_ratio",
        "admin_unit_ratio",
        "admin_matched",
        "annulus_overlaps_site",
    ]);
    for (k, s) in sites.iter().enumerate() {
        let id = &s.record.site_id;
        let mut row = vec![id.to_string()];
        match &relations[k] {
            Some(r) => row.extend([
                "true".into(),
                r.is_subset(id).to_string(),
                r.is_superset().to_string(),
                join_ids(&r.nested_in),
                join_ids(&r.contains),
                join_ids(&r.duplicate_of),
                join_ids(&r.intersecting_with),
            ]),
            None => row.extend(["false".to_string()].into_iter().chain(std::iter::repeat_n(String::new(), 6))),
        }
        match &admin[k] {
            Some(m) => row.extend([m.unit_id.clone(), num(m.site_ratio), num(m.unit_ratio), m.matched.to_string()]),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.push(
            annulus_overlap
                .and_then(|a| a[k])
                .map(|b| b.to_string())
                .unwrap_or_default(),
        );
        t.push(row);
    }
    t
}

fn loss_cells(w: Option<&LossWindow<f64>>) -> [String; 2] {
    match w {
        Some(w) => [
            w.fraction.map(num).unwrap_or_else(|| NA.into()),
            format!("{:?}", w.window.coverage).to_lowercase(),
        ],
        None => [NA.into(), String::new()],
    }
}

pub fn augment_table(records: &[AugmentationRecord<f64>]) -> Table {
    let mut header: Vec<String> = [
        "site_id",
        "built_fraction",
        "water_fraction",
        "other_landcover_fraction",
        "stable_cropland_fraction",
        "treecover_at_planting_fraction",
        "cropland_from_tree_fraction",
        "cropland_to_tree_fraction",
        "short_veg_after_loss_fraction",
        "road_km_per_km2",
        "road_area_fraction",
        "loss_pre5",
        "loss_pre5_coverage",
        "loss_pre1",
        "loss_pre1_coverage",
        "loss_post5",
        "loss_post5_coverage",
        "loss_pixels",
        "mean_elevation_m",
        "mean_slope_deg",
        "terrain_pixels",
    ]
    .map(String::from)
    .to_vec();
    for off in CLIMATE_OFFSETS {
        for var in ["precip", "tmin", "tmax"] {
            header.push(format!("{var}_plus{off}"));
        }
    }
    header.push("not_evaluable".into());
    let mut t = Table::new(header);
    for a in records {
        let mut reasons: Vec<String> = Vec::new();
        let mut cell = |name: &str, v: &Evaluated<f64>| {
            if let Err(e) = v {
                reasons.push(format!("{name}={}", e.as_str()));
            }
            eval_num(v)
        };
        let mut row = vec![
            a.site_id.to_string(),
            cell("built_fraction", &a.built_fraction),
            cell("water_fraction", &a.water_fraction),
            cell("other_landcover_fraction", &a.other_landcover_fraction),
            cell("stable_cropland_fraction", &a.stable_cropland_fraction),
            cell("treecover_at_planting_fraction", &a.treecover_at_planting_fraction),
            cell("cropland_from_tree_fraction", &a.cropland_from_tree_fraction),
            cell("cropland_to_tree_fraction", &a.cropland_to_tree_fraction),
            cell("short_veg_after_loss_fraction", &a.short_veg_after_loss_fraction),
            cell("road_km_per_km2", &a.road_km_per_km2),
            match &a.road_area_fraction {
                Some(v) => cell("road_area_fraction", v),
                None => String::new(),
            },
        ];
        let loss = a.loss.as_ref().ok();
        if let Err(e) = &a.loss {
            reasons.push(format!("loss={}", e.as_str()));
        }
        for w in [loss.map(|l| &l.pre5), loss.map(|l| &l.pre1), loss.map(|l| &l.post5)] {
            row.extend(loss_cells(w));
        }
        row.push(loss.map(|l| l.pixel_count.to_string()).unwrap_or_default());
        match &a.terrain {
            Ok(tr) => row.extend([num(tr.mean_elevation_m), num(tr.mean_slope_deg), tr.pixel_count.to_string()]),
            Err(e) => {
                reasons.push(format!("terrain={}", e.as_str()));
                row.extend([NA.into(), NA.into(), String::new()]);
            }
        }
        for off in CLIMATE_OFFSETS {
            match a.climate.iter().find(|c| c.offset == off) {
                Some(c) => {
                    for (var, v) in [("precip", &c.precip), ("tmin", &c.tmin), ("tmax", &c.tmax)] {
                        if let Err(e) = v {
                            reasons.push(format!("{var}_plus{off}={}", e.as_str()));
                        }
                        row.push(eval_num(v));
                    }
                }
                None => row.extend(std::iter::repeat_n(NA.to_string(), 3)),
            }
        }
        row.push(reasons.join(";"));
        t.push(row);
    }
    t
}

pub fn veg_table(series: &[ZoneIndexSeries<f64>]) -> Table {
    let mut t = Table::new(["site_id", "zone", "period", "index", "mean", "pixel_count", "evaluable"]);
    for s in series {
        t.push(vec![
            s.site_id.to_string(),
            s.zone.as_str().to_string(),
            s.period.to_string(),
            s.index.as_str().to_string(),
            eval_num(&s.mean),
            s.pixel_count.to_string(),
            s.mean.is_ok().to_string(),
        ]);
    }
    t
}

pub fn scores_table(vectors: &[IndicatorVector], scores: &[LdisScore]) -> Table {
    let mut header = vec!["site_id".to_string()];
    header.extend(Indicator::ALL.iter().map(|i| i.as_str().to_string()));
    header.extend(["passed", "evaluated", "perfect"].map(String::from));
    let mut t = Table::new(header);
    for (v, s) in vectors.iter().zip(scores) {
        let mut row = vec![s.site_id.to_string()];
        row.extend(v.0.iter().map(|o| o.as_str().to_string()));
        row.extend([s.passed.to_string(), s.evaluated.to_string(), s.perfect.to_string()]);
        t.push(row);
    }
    t
}

/// Pretty JSON with a trailing newline.
pub fn write_json<V: serde::Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_text_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.5e-12, 12364.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(2.0), "2");
        assert_eq!(eval_num(&Err(crate::NotEvaluable::LayerMissing)), "na");
    }
}
