//! Stage orchestration. Stages run in sequence; work inside a stage runs on
//! a pool of `workers` threads and is collected in site order, so outputs do
//! not depend on the worker count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geo::{Coord, LineString, MultiPolygon, Polygon, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{ingest_catalog, Catalog, DroppedRecord, SiteRecord};
use super::config::{LoadedConfig, MonthsConfig, RunConfig};
use super::layers::{load_layers, LoadedLayers, StackEntry};
use super::output::{self, num, Table, NA};
use super::summary::{build_summary, rows_from_outputs, SummaryRow};
use crate::augment::{augment_site, AugmentOptions, AugmentationRecord};
use crate::error::{Error, Evaluated, NotEvaluable, Result};
use crate::geometry::{assess_geometry, derive_geometry_with, outer_buffer_annulus, GeometryQuality};
use crate::relations::{
    admin_area_match, build_site_index, classify_relations, multi_overlap_ratio, summarize_relations, AdminLayer,
    AdminMatch, RelationRecord, RelationWarning, SiteIndex, SitePolygon, SiteRelations,
};
use crate::scoring::{evaluate_indicators, ldis_score, Indicator, IndicatorVector, LdisScore, Outcome, SiteEvidence};
use crate::stats::{
    bootstrap_mean_ci, build_did_panel, confusion_metrics, did_fit, horizon_periods, read_panel_csv,
    synthetic_control_series, ConfusionCounts, ConfusionMetrics, ControlPoint, DidResult,
};
use crate::vegetation::{zone_index_series, Continent, MonthChoice, VegIndex, Zone, ZoneIndexSeries};
use crate::SiteId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Relate,
    Augment,
    Veg,
    Score,
    Did,
    Synth,
    Report,
    Run,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Relate => "relate",
            Stage::Augment => "augment",
            Stage::Veg => "veg",
            Stage::Score => "score",
            Stage::Did => "did",
            Stage::Synth => "synth",
            Stage::Report => "report",
            Stage::Run => "run",
        }
    }
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    /// Panel CSV for the `did` stage, bypassing the vegetation series.
    pub panel: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// Some sites have indicators that could not be evaluated.
    Partial,
}

impl ExitStatus {
    pub fn code(&self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Partial => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub sites: usize,
}

/// A site whose analysis polygon has been derived and assessed.
#[derive(Debug, Clone)]
pub struct PreparedSite {
    /// `record.geometry` holds the derived geometry.
    pub record: SiteRecord,
    pub quality: GeometryQuality<f64>,
}

impl PreparedSite {
    pub fn polygon(&self) -> Option<&Polygon<f64>> {
        self.record.geometry.derived.as_ref()
    }

    fn centroid(&self) -> Option<Coord<f64>> {
        self.record.geometry.centroid
    }

    fn usable(&self) -> bool {
        self.quality.is_valid && self.polygon().is_some()
    }
}

/// Derives and assesses every site; sites whose geometry cannot be used at
/// all (bad coordinates, points at the poles) are dropped with a reason.
pub fn prepare_sites(sites: Vec<SiteRecord>, cfg: &RunConfig) -> (Vec<PreparedSite>, Vec<DroppedRecord>) {
    let g = &cfg.geometry;
    let results: Vec<std::result::Result<PreparedSite, DroppedRecord>> = sites
        .into_par_iter()
        .map(|mut record| {
            let id = record.site_id.to_string();
            let derived = derive_geometry_with(&record.geometry, &id, g.point_buffer_m, g.point_buffer_segments)
                .and_then(|mut parts| {
                    let first = parts.drain(..).next().ok_or_else(|| {
                        Error::DegenerateGeometry(format!("site {id}: geometry has no parts"))
                    })?;
                    let quality = assess_geometry(&first, &id, g.circle_flag_threshold)?;
                    Ok((first, quality))
                });
            match derived {
                Ok((geometry, quality)) => {
                    record.geometry = geometry;
                    Ok(PreparedSite { record, quality })
                }
                Err(e) => Err(DroppedRecord {
                    site_id: id,
                    project_id: record.project_id.clone().unwrap_or_default(),
                    name: record.reported_field("name").unwrap_or("").to_string(),
                    reason: e.to_string(),
                }),
            }
        })
        .collect();
    let mut kept = Vec::with_capacity(results.len());
    let mut dropped = Vec::new();
    for r in results {
        match r {
            Ok(s) => kept.push(s),
            Err(d) => dropped.push(d),
        }
    }
    (kept, dropped)
}

pub struct RelationStage {
    pub records: Vec<RelationRecord<f64>>,
    pub warnings: Vec<RelationWarning>,
    /// `None` for sites left out of the relation check (invalid geometry).
    pub per_site: Vec<Option<SiteRelations>>,
    /// `None` when there is no admin layer or the site is invalid.
    pub admin: Vec<Option<AdminMatch<f64>>>,
}

struct IndexedSites {
    polygons: Vec<SitePolygon<f64>>,
    index: SiteIndex<f64>,
}

fn index_sites(sites: &[PreparedSite]) -> Result<IndexedSites> {
    let polygons: Vec<SitePolygon<f64>> = sites
        .iter()
        .filter(|s| s.usable())
        .map(|s| SitePolygon::new(s.record.site_id.clone(), s.polygon().unwrap().clone()))
        .collect();
    let index = build_site_index(&polygons)?;
    Ok(IndexedSites { polygons, index })
}

pub fn relate(sites: &[PreparedSite], admin: Option<&AdminLayer<f64>>, cfg: &RunConfig) -> Result<RelationStage> {
    let indexed = index_sites(sites)?;
    let out = classify_relations(&indexed.index, &indexed.polygons, cfg.scoring.dup_threshold, &cfg.overlap)?;
    let summary = summarize_relations(&out.records);
    let per_site = sites
        .iter()
        .map(|s| s.usable().then(|| summary.get(&s.record.site_id).cloned().unwrap_or_default()))
        .collect();
    let mut warnings = out.warnings;
    let admin_results: Vec<(Option<AdminMatch<f64>>, Option<RelationWarning>)> = sites
        .par_iter()
        .map(|s| {
            let (Some(layer), true) = (admin, s.usable()) else {
                return (None, None);
            };
            match admin_area_match(s.polygon().unwrap(), layer, cfg.scoring.admin_threshold, &cfg.overlap) {
                Ok(m) => (m, None),
                Err(e) => (
                    None,
                    Some(RelationWarning {
                        site: s.record.site_id.clone(),
                        other: None,
                        message: format!("admin match failed: {e}"),
                    }),
                ),
            }
        })
        .collect();
    let mut admin_matches = Vec::with_capacity(sites.len());
    for (m, w) in admin_results {
        admin_matches.push(m);
        warnings.extend(w);
    }
    Ok(RelationStage {
        records: out.records,
        warnings,
        per_site,
        admin: admin_matches,
    })
}

pub fn augment(sites: &[PreparedSite], layers: &LoadedLayers, cfg: &RunConfig) -> Vec<AugmentationRecord<f64>> {
    let opts = AugmentOptions {
        road_buffer_m: cfg.scoring.road_buffer_m,
    };
    sites
        .par_iter()
        .map(|s| {
            let id = s.record.site_id.clone();
            match (s.polygon(), s.centroid()) {
                (Some(p), Some(c)) => augment_site(id, p, c, s.record.planting_year(), &layers.augment, &opts),
                _ => AugmentationRecord::not_evaluable(id, NotEvaluable::InvalidGeometry),
            }
        })
        .collect()
}

pub struct VegStage {
    pub series: Vec<ZoneIndexSeries<f64>>,
    pub months: Vec<Evaluated<[u32; 3]>>,
    pub annulus_overlap: Vec<Option<bool>>,
    pub warnings: Vec<String>,
}

fn rect_of(spec: &crate::raster::GridSpec<f64>) -> Rect<f64> {
    spec.extent()
}

fn rects_touch(a: &Rect<f64>, b: &Rect<f64>) -> bool {
    a.min().x <= b.max().x && b.min().x <= a.max().x && a.min().y <= b.max().y && b.min().y <= a.max().y
}

fn bounds(p: &Polygon<f64>) -> Option<Rect<f64>> {
    crate::geometry::polygon_bounds(p)
}

fn multi_bounds(mp: &MultiPolygon<f64>) -> Option<Rect<f64>> {
    mp.0.iter().filter_map(bounds).reduce(|a, b| {
        Rect::new(
            Coord { x: a.min().x.min(b.min().x), y: a.min().y.min(b.min().y) },
            Coord { x: a.max().x.max(b.max().x), y: a.max().y.max(b.max().y) },
        )
    })
}

fn stacks_for<'a>(stacks: &'a [StackEntry], site: &str, area: Option<&Rect<f64>>) -> Vec<&'a crate::vegetation::BandStack<f64>> {
    stacks
        .iter()
        .filter(|e| e.sites.is_empty() || e.sites.binary_search_by(|s| s.as_str().cmp(site)).is_ok())
        .filter(|e| match (e.stack.spec(), area) {
            (Some(spec), Some(r)) => rects_touch(&rect_of(spec), r),
            _ => false,
        })
        .map(|e| &e.stack)
        .collect()
}

fn parse_continent(name: &str) -> Option<Continent> {
    let key = name.trim().to_ascii_lowercase().replace([' ', '-'], "_");
    serde_json::from_value(serde_json::Value::String(key)).ok()
}

fn month_choice(cfg: &RunConfig, site: &SiteRecord) -> MonthChoice {
    match &cfg.vegetation.months {
        MonthsConfig::Fixed(m) => {
            let mut m = *m;
            m.sort_unstable();
            MonthChoice::Fixed(m)
        }
        MonthsConfig::Named(n) if n == "continent" => site
            .continent
            .as_deref()
            .and_then(parse_continent)
            .and_then(crate::vegetation::continent_months)
            .map(MonthChoice::Fixed)
            .unwrap_or(MonthChoice::PerSite),
        MonthsConfig::Named(_) => MonthChoice::PerSite,
    }
}

fn unevaluable_series(id: &SiteId, periods: &[i32], reason: NotEvaluable) -> Vec<ZoneIndexSeries<f64>> {
    let mut periods = periods.to_vec();
    periods.sort_unstable();
    periods.dedup();
    let mut out = Vec::new();
    for zone in [Zone::Site, Zone::Annulus] {
        for &period in &periods {
            for index in VegIndex::ALL {
                out.push(ZoneIndexSeries {
                    site_id: id.clone(),
                    zone,
                    period,
                    index,
                    mean: Err(reason),
                    pixel_count: 0,
                });
            }
        }
    }
    out
}

pub fn vegetation(sites: &[PreparedSite], layers: &LoadedLayers, cfg: &RunConfig) -> Result<VegStage> {
    let opts = cfg.vegetation.options();
    let indexed = index_sites(sites)?;
    let results: Vec<Result<(Vec<ZoneIndexSeries<f64>>, Evaluated<[u32; 3]>, Option<bool>, Option<String>)>> = sites
        .par_iter()
        .map(|s| {
            let id = &s.record.site_id;
            let Some(poly) = s.polygon().filter(|_| s.usable()) else {
                let r = NotEvaluable::InvalidGeometry;
                return Ok((unevaluable_series(id, &opts.periods, r), Err(r), None, None));
            };
            let (annulus, warning) = match outer_buffer_annulus(poly, cfg.geometry.annulus_m) {
                Ok(a) => (a.zone, None),
                Err(e) => (MultiPolygon(vec![]), Some(format!("site {id}: {e}"))),
            };
            let overlap = (!annulus.0.is_empty()).then(|| annulus_overlaps(&annulus, id, &indexed, cfg));
            let area = multi_bounds(&annulus).or_else(|| bounds(poly));
            let stacks = stacks_for(&layers.stacks, id.as_str(), area.as_ref());
            let choice = month_choice(cfg, &s.record);
            let out = zone_index_series(&stacks, id, poly, &annulus, s.record.planting_year(), choice, &opts)?;
            Ok((out.records, out.months, overlap, warning))
        })
        .collect();
    let mut stage = VegStage {
        series: Vec::new(),
        months: Vec::with_capacity(sites.len()),
        annulus_overlap: Vec::with_capacity(sites.len()),
        warnings: Vec::new(),
    };
    for r in results {
        let (series, months, overlap, warning) = r?;
        stage.series.extend(series);
        stage.months.push(months);
        stage.annulus_overlap.push(overlap);
        stage.warnings.extend(warning);
    }
    Ok(stage)
}

fn annulus_overlaps(annulus: &MultiPolygon<f64>, own: &SiteId, indexed: &IndexedSites, cfg: &RunConfig) -> bool {
    let Some(r) = multi_bounds(annulus) else {
        return false;
    };
    let mut hits = indexed.index.query(&r);
    hits.sort_unstable();
    hits.into_iter().filter(|&slot| indexed.index.id(slot) != own).any(|slot| {
        let other = MultiPolygon(vec![indexed.polygons[slot].polygon.clone()]);
        multi_overlap_ratio(annulus, &other, &cfg.overlap).is_ok_and(|(ra, _)| ra > 0.0)
    })
}

pub fn score(
    sites: &[PreparedSite],
    relations: Option<&RelationStage>,
    augment: Option<&[AugmentationRecord<f64>]>,
    cfg: &RunConfig,
) -> (Vec<IndicatorVector>, Vec<LdisScore>) {
    sites
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let ev = SiteEvidence {
                site_id: &s.record.site_id,
                quality: Some(&s.quality),
                relations: relations.and_then(|r| r.per_site[k].as_ref()),
                admin: relations.and_then(|r| r.admin[k].as_ref()),
                augment: augment.map(|a| &a[k]),
            };
            let v = evaluate_indicators(&ev, &cfg.scoring);
            let score = ldis_score(s.record.site_id.clone(), &v);
            (v, score)
        })
        .unzip()
}

#[derive(Debug, Clone, Serialize)]
pub struct DidModel {
    pub index: String,
    pub horizon: i32,
    pub pre_period: i32,
    pub post_period: i32,
    pub units: usize,
    pub dropped_units: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<DidResult<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fits one DiD model per (index, horizon), in parallel.
pub fn did_models(series: &[ZoneIndexSeries<f64>], horizons: &[i32]) -> Vec<DidModel> {
    let tasks: Vec<(VegIndex, i32)> = VegIndex::ALL
        .iter()
        .flat_map(|&i| horizons.iter().map(move |&h| (i, h)))
        .collect();
    tasks
        .into_par_iter()
        .map(|(index, horizon)| {
            let panel = build_did_panel(series, index, horizon);
            let (pre, post) = horizon_periods(horizon);
            let fit = did_fit(&panel.rows);
            DidModel {
                index: index.as_str().into(),
                horizon,
                pre_period: pre,
                post_period: post,
                units: panel.units,
                dropped_units: panel.dropped_units,
                error: fit.as_ref().err().map(ToString::to_string),
                result: fit.ok(),
            }
        })
        .collect()
}

/// Bootstrap band of cross-site means per (zone, period, index).
pub fn bootstrap_bands(series: &[ZoneIndexSeries<f64>], cfg: &RunConfig, seed: u64) -> Table {
    let mut groups: BTreeMap<(Zone, i32, VegIndex), Vec<f64>> = BTreeMap::new();
    for s in series {
        let g = groups.entry((s.zone, s.period, s.index)).or_default();
        if let Ok(v) = s.mean {
            g.push(v);
        }
    }
    let keyed: Vec<_> = groups.into_iter().collect();
    let rows: Vec<Vec<String>> = keyed
        .par_iter()
        .enumerate()
        .map(|(task, ((zone, period, index), values))| {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let mean = (!sorted.is_empty()).then(|| sorted.iter().sum::<f64>() / sorted.len() as f64);
            let ci = bootstrap_mean_ci(values, cfg.stats.bootstrap_level, cfg.stats.bootstrap_reps, seed.wrapping_add(task as u64));
            let (lo, hi) = match ci {
                Ok((lo, hi)) => (num(lo), num(hi)),
                Err(_) => (NA.into(), NA.into()),
            };
            vec![
                zone.as_str().into(),
                period.to_string(),
                index.as_str().into(),
                values.len().to_string(),
                mean.map(num).unwrap_or_else(|| NA.into()),
                lo,
                hi,
            ]
        })
        .collect();
    let mut t = Table::new(["zone", "period", "index", "n", "mean", "ci_lo", "ci_hi"]);
    rows.into_iter().for_each(|r| t.push(r));
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub periods: Vec<i32>,
    pub synthetic: Vec<f64>,
    /// Mean site-zone NDVI per period over sites evaluable in that period.
    pub site_mean: Vec<Option<f64>>,
    pub bucket_edges: Vec<f64>,
    pub bucket_weights: Vec<f64>,
    pub controls_per_bucket: Vec<usize>,
    pub empty_buckets: Vec<usize>,
    pub controls: usize,
    pub excluded_controls: usize,
    pub incomplete_controls: usize,
    pub control_source: String,
}

fn site_ndvi(series: &[ZoneIndexSeries<f64>]) -> BTreeMap<(SiteId, i32), f64> {
    series
        .iter()
        .filter(|s| s.zone == Zone::Site && s.index == VegIndex::Ndvi)
        .filter_map(|s| s.mean.ok().map(|v| ((s.site_id.clone(), s.period), v)))
        .collect()
}

fn read_controls(path: &Path, periods: &[i32]) -> Result<(Vec<ControlPoint<f64>>, usize)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut by_point: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    for rec in rdr.deserialize::<(String, i32, f64)>() {
        let (id, period, ndvi) = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        by_point.entry(id).or_default().insert(period, ndvi);
    }
    let mut incomplete = 0;
    let mut out = Vec::new();
    for values in by_point.values() {
        match (values.get(&0), periods.iter().map(|p| values.get(p).copied()).collect::<Option<Vec<_>>>()) {
            (Some(&at), Some(series)) => out.push(ControlPoint {
                ndvi_at_planting: at,
                series,
            }),
            _ => incomplete += 1,
        }
    }
    Ok((out, incomplete))
}

/// Draws random control pixels from the band stacks, each borrowing the
/// planting year and composite months of a randomly chosen site.
fn sample_controls(
    sites: &[PreparedSite],
    veg: &VegStage,
    layers: &LoadedLayers,
    cfg: &RunConfig,
    seed: u64,
    periods: &[i32],
) -> Result<(Vec<ControlPoint<f64>>, usize)> {
    let donors: Vec<(i32, [u32; 3])> = sites
        .iter()
        .zip(&veg.months)
        .filter_map(|(s, m)| Some((s.record.planting_year()?, *m.as_ref().ok()?)))
        .collect();
    if donors.is_empty() || layers.stacks.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let draws: Vec<(usize, Coord<f64>, f64, f64, (i32, [u32; 3]))> = (0..cfg.stats.synth_control_points)
        .map(|k| {
            let e = &layers.stacks[rng.random_range(0..layers.stacks.len())];
            let spec = *e.stack.spec().expect("band stacks hold four bands");
            let (row, col) = (rng.random_range(0..spec.height), rng.random_range(0..spec.width));
            let donor = donors[rng.random_range(0..donors.len())];
            (k, spec.pixel_center(row, col), spec.pixel_width, spec.pixel_height, donor)
        })
        .collect();
    let opts = crate::vegetation::VegOptions {
        periods: periods.to_vec(),
        ..cfg.vegetation.options()
    };
    let all: Vec<&crate::vegetation::BandStack<f64>> = layers.stacks.iter().map(|e| &e.stack).collect();
    let evaluated: Vec<Result<Option<ControlPoint<f64>>>> = draws
        .into_par_iter()
        .map(|(k, c, pw, ph, (year, months))| {
            let (hx, hy) = (pw * 0.25, ph * 0.25);
            let cell = Polygon::new(
                LineString::from(vec![
                    (c.x - hx, c.y - hy),
                    (c.x + hx, c.y - hy),
                    (c.x + hx, c.y + hy),
                    (c.x - hx, c.y + hy),
                    (c.x - hx, c.y - hy),
                ]),
                vec![],
            );
            let id = SiteId::new(format!("control-{k}"));
            let out = zone_index_series(&all, &id, &cell, &MultiPolygon(vec![]), Some(year), MonthChoice::Fixed(months), &opts)?;
            let values: BTreeMap<i32, f64> = out
                .records
                .iter()
                .filter(|r| r.zone == Zone::Site && r.index == VegIndex::Ndvi)
                .filter_map(|r| r.mean.ok().map(|v| (r.period, v)))
                .collect();
            Ok(match (values.get(&0), periods.iter().map(|p| values.get(p).copied()).collect::<Option<Vec<_>>>()) {
                (Some(&at), Some(series)) => Some(ControlPoint {
                    ndvi_at_planting: at,
                    series,
                }),
                _ => None,
            })
        })
        .collect();
    let mut out = Vec::new();
    let mut incomplete = 0;
    for r in evaluated {
        match r? {
            Some(c) => out.push(c),
            None => incomplete += 1,
        }
    }
    Ok((out, incomplete))
}

pub fn synth(
    sites: &[PreparedSite],
    veg: &VegStage,
    layers: &LoadedLayers,
    cfg: &RunConfig,
    seed: u64,
) -> Result<SynthReport> {
    let mut periods = cfg.vegetation.periods.clone();
    periods.sort_unstable();
    periods.dedup();
    let ndvi = site_ndvi(&veg.series);
    let at_planting: Vec<f64> = sites
        .iter()
        .filter_map(|s| ndvi.get(&(s.record.site_id.clone(), 0)).copied())
        .collect();
    let site_mean = periods
        .iter()
        .map(|&p| {
            let mut v: Vec<f64> = sites
                .iter()
                .filter_map(|s| ndvi.get(&(s.record.site_id.clone(), p)).copied())
                .collect();
            v.sort_by(f64::total_cmp);
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let (controls, incomplete, source) = match &cfg.stats.synth_controls {
        Some(path) => {
            let (c, i) = read_controls(path, &periods)?;
            (c, i, path.display().to_string())
        }
        None => {
            let (c, i) = sample_controls(sites, veg, layers, cfg, seed, &periods)?;
            (c, i, "sampled".to_string())
        }
    };
    let s = synthetic_control_series(&controls, &at_planting, cfg.stats.synth_buckets)?;
    Ok(SynthReport {
        periods,
        synthetic: s.values,
        site_mean,
        bucket_edges: s.edges,
        bucket_weights: s.weights,
        controls_per_bucket: s.controls_per_bucket,
        empty_buckets: s.empty_buckets,
        controls: controls.len(),
        excluded_controls: s.excluded_controls,
        incomplete_controls: incomplete,
        control_source: source,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfusionEntry {
    pub indicator: String,
    pub counts: ConfusionCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ConfusionMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Agreement of derived outcomes with manual labels; the positive class is
/// a failing indicator.
pub fn confusion_from_labels(path: &Path, scores_path: &Path) -> Result<Vec<ConfusionEntry>> {
    let mut rdr = csv::Reader::from_path(scores_path).map_err(|e| Error::parse(scores_path, e.to_string()))?;
    let header = rdr.headers().map_err(|e| Error::parse(scores_path, e.to_string()))?.clone();
    let mut derived: BTreeMap<(String, String), Outcome> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(scores_path, e.to_string()))?;
        for ind in Indicator::ALL {
            if let Some(c) = header.iter().position(|h| h == ind.as_str()) {
                if let Some(o) = Outcome::parse(&rec[c]) {
                    derived.insert((rec[0].to_string(), ind.as_str().to_string()), o);
                }
            }
        }
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut pairs: BTreeMap<String, Vec<(bool, bool)>> = BTreeMap::new();
    for rec in rdr.deserialize::<(String, String, String)>() {
        let (site, indicator, label) = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let actual_fail = match label.trim().to_ascii_lowercase().as_str() {
            "fail" | "1" | "true" => true,
            "pass" | "0" | "false" => false,
            other => return Err(Error::parse(path, format!("label {other:?} is not pass or fail"))),
        };
        if let Some(o) = derived.get(&(site, indicator.clone())) {
            if o.is_evaluated() {
                pairs.entry(indicator).or_default().push((*o == Outcome::Fail, actual_fail));
            }
        }
    }
    Ok(pairs
        .into_iter()
        .map(|(indicator, p)| {
            let counts = ConfusionCounts::from_pairs(p);
            let m = confusion_metrics(&counts);
            ConfusionEntry {
                indicator,
                counts,
                error: m.as_ref().err().map(ToString::to_string),
                metrics: m.ok(),
            }
        })
        .collect())
}

struct Context {
    cfg: RunConfig,
    source: Option<String>,
    out: PathBuf,
    panel: Option<PathBuf>,
    seed: u64,
    artifacts: Vec<PathBuf>,
}

impl Context {
    fn write_table(&mut self, name: &str, t: &Table) -> Result<()> {
        let p = self.out.join(name);
        t.write(&p)?;
        self.artifacts.push(p);
        Ok(())
    }

    fn write_json<V: Serialize>(&mut self, name: &str, v: &V) -> Result<()> {
        let p = self.out.join(name);
        output::write_json(&p, v)?;
        self.artifacts.push(p);
        Ok(())
    }

    fn copy_config(&mut self) -> Result<()> {
        let p = self.out.join("config.json");
        let text = match &self.source {
            Some(s) => s.clone(),
            None => serde_json::to_string_pretty(&self.cfg)? + "\n",
        };
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        self.artifacts.push(p);
        Ok(())
    }
}

fn ingest(cfg: &RunConfig) -> Result<(Catalog, Vec<PreparedSite>, Vec<DroppedRecord>)> {
    let mut catalog = ingest_catalog(&cfg.catalog, &cfg.filter)?;
    for w in &catalog.warnings {
        log::warn!("{w}");
    }
    let records = std::mem::take(&mut catalog.sites);
    let (sites, geom_dropped) = prepare_sites(records, cfg);
    let mut dropped = catalog.dropped.clone();
    dropped.extend(geom_dropped);
    dropped.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    log::info!("ingest: {} sites kept, {} dropped", sites.len(), dropped.len());
    Ok((catalog, sites, dropped))
}

fn require_stacks(layers: &LoadedLayers, stage: Stage) -> Result<()> {
    if layers.stacks.is_empty() {
        return Err(Error::MissingLayer {
            stage: stage.as_str().into(),
            what: "band stacks (layers.bands)".into(),
        });
    }
    Ok(())
}

fn parse_veg_series(path: &Path) -> Result<Vec<ZoneIndexSeries<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let r = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let bad = |what: &str| Error::parse(path, format!("bad {what} in {:?}", r));
        let zone = match &r[1] {
            "site" => Zone::Site,
            "annulus" => Zone::Annulus,
            _ => return Err(bad("zone")),
        };
        let index = VegIndex::ALL.into_iter().find(|i| i.as_str() == &r[3]).ok_or_else(|| bad("index"))?;
        let mean = if &r[6] == "true" {
            Ok(r[4].parse().map_err(|_| bad("mean"))?)
        } else {
            Err(NotEvaluable::NoComposite)
        };
        out.push(ZoneIndexSeries {
            site_id: SiteId::new(&r[0]),
            zone,
            period: r[2].parse().map_err(|_| bad("period"))?,
            index,
            mean,
            pixel_count: r[5].parse().map_err(|_| bad("pixel_count"))?,
        });
    }
    Ok(out)
}

fn partial_if(cond: bool) -> ExitStatus {
    if cond {
        ExitStatus::Partial
    } else {
        ExitStatus::Success
    }
}

fn stage_body(stage: Stage, ctx: &mut Context) -> Result<(ExitStatus, usize)> {
    let cfg = ctx.cfg.clone();
    match stage {
        Stage::Report => {
            let (rows, dropped) = rows_from_outputs(&ctx.out)?;
            let summary = build_summary(&rows, dropped);
            ctx.write_json("summary.json", &summary)?;
            if let Some(labels) = &cfg.stats.labels {
                let c = confusion_from_labels(labels, &ctx.out.join("ldis_scores.csv"))?;
                ctx.write_json("confusion.json", &c)?;
            }
            let partial = rows.is_empty() || rows.iter().any(|r| r.vector.0.contains(&Outcome::NotEvaluable));
            return Ok((partial_if(partial), rows.len()));
        }
        Stage::Did => {
            if let Some(panel) = ctx.panel.clone() {
                let fit = did_fit(&read_panel_csv(&panel)?)?;
                ctx.write_json("did.json", &fit)?;
                return Ok((ExitStatus::Success, 0));
            }
            let path = ctx.out.join("veg_series.csv");
            if path.exists() {
                let models = did_models(&parse_veg_series(&path)?, &cfg.stats.did_horizons);
                let failed = models.iter().any(|m| m.error.is_some());
                ctx.write_json("did.json", &models)?;
                return Ok((partial_if(failed), 0));
            }
        }
        _ => {}
    }

    let (_, sites, dropped) = ingest(&cfg)?;
    let n = sites.len();
    ctx.copy_config()?;
    if stage == Stage::Ingest {
        ctx.write_table("sites.csv", &output::sites_table(&sites))?;
        ctx.write_table("dropped.csv", &output::dropped_table(&dropped))?;
        return Ok((partial_if(n == 0), n));
    }
    let layers = load_layers(&cfg.layers)?;
    let needs_relations = matches!(stage, Stage::Relate | Stage::Score | Stage::Run);
    let relations = if needs_relations {
        let r = relate(&sites, layers.admin.as_ref(), &cfg)?;
        for w in &r.warnings {
            log::warn!("relations: site {}: {}", w.site, w.message);
        }
        Some(r)
    } else {
        None
    };
    let has_augment = cfg.layers.has_augment_layers();
    if stage == Stage::Augment && !has_augment {
        return Err(Error::MissingLayer {
            stage: "augment".into(),
            what: "at least one overlay layer".into(),
        });
    }
    let augmented = (matches!(stage, Stage::Augment | Stage::Score | Stage::Run) && has_augment)
        .then(|| augment(&sites, &layers, &cfg));
    if matches!(stage, Stage::Veg | Stage::Did | Stage::Synth) {
        require_stacks(&layers, stage)?;
    }
    let veg = if matches!(stage, Stage::Veg | Stage::Did | Stage::Synth) || (stage == Stage::Run && !layers.stacks.is_empty()) {
        let v = vegetation(&sites, &layers, &cfg)?;
        for w in &v.warnings {
            log::warn!("{w}");
        }
        Some(v)
    } else {
        None
    };

    let mut status = partial_if(n == 0);
    if matches!(stage, Stage::Run) {
        ctx.write_table("sites.csv", &output::sites_table(&sites))?;
        ctx.write_table("dropped.csv", &output::dropped_table(&dropped))?;
    }
    if let Some(r) = &relations {
        if matches!(stage, Stage::Relate | Stage::Run) {
            ctx.write_table("relations.csv", &output::relations_table(&r.records))?;
            let overlap = veg.as_ref().map(|v| v.annulus_overlap.as_slice());
            ctx.write_table("site_flags.csv", &output::flags_table(&sites, &r.per_site, &r.admin, overlap))?;
        }
    }
    if let Some(a) = &augmented {
        if matches!(stage, Stage::Augment | Stage::Run) {
            ctx.write_table("augment.csv", &output::augment_table(a))?;
        }
    }
    if let Some(v) = &veg {
        if matches!(stage, Stage::Veg | Stage::Run) {
            ctx.write_table("veg_series.csv", &output::veg_table(&v.series))?;
            ctx.write_table("veg_bands.csv", &bootstrap_bands(&v.series, &cfg, ctx.seed))?;
        }
        if matches!(stage, Stage::Did | Stage::Run) {
            let models = did_models(&v.series, &cfg.stats.did_horizons);
            ctx.write_json("did.json", &models)?;
        }
        if matches!(stage, Stage::Synth | Stage::Run) {
            match synth(&sites, v, &layers, &cfg, ctx.seed) {
                Ok(s) => ctx.write_json("synth.json", &s)?,
                Err(e) if stage == Stage::Run => {
                    log::warn!("synthetic control skipped: {e}");
                    status = ExitStatus::Partial;
                }
                Err(e) => return Err(e),
            }
        }
    }
    if matches!(stage, Stage::Score | Stage::Run) {
        let (vectors, scores) = score(&sites, relations.as_ref(), augmented.as_deref(), &cfg);
        ctx.write_table("ldis_scores.csv", &output::scores_table(&vectors, &scores))?;
        if scores.iter().any(|s| s.evaluated < 10) {
            status = ExitStatus::Partial;
        }
        if stage == Stage::Run {
            let rows: Vec<SummaryRow> = sites
                .iter()
                .zip(&vectors)
                .map(|(s, v)| SummaryRow {
                    site_id: s.record.site_id.to_string(),
                    source_kind: s.record.source_kind.as_str().into(),
                    area_km2: s.quality.area_km2,
                    planting_year: s.record.planting_year(),
                    planting_date_type: s.record.planting_date_type.as_str().into(),
                    vector: *v,
                })
                .collect();
            ctx.write_json("summary.json", &build_summary(&rows, dropped.len()))?;
            if let Some(labels) = &cfg.stats.labels {
                let c = confusion_from_labels(labels, &ctx.out.join("ldis_scores.csv"))?;
                ctx.write_json("confusion.json", &c)?;
            }
        }
    }
    Ok((status, n))
}

/// Runs one stage (or the whole pipeline) with CLI overrides applied.
pub fn execute(stage: Stage, loaded: &LoadedConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let mut cfg = loaded.config.clone();
    cfg.resolve_paths(&loaded.base_dir);
    if let Some(w) = opts.workers {
        cfg.workers = w;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let needs_inputs = !matches!(stage, Stage::Report) && !(stage == Stage::Did && opts.panel.is_some());
    if needs_inputs {
        cfg.validate()?;
    } else {
        cfg.scoring.validate()?;
    }
    let out = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("ldis-out"));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut ctx = Context {
        seed: cfg.seed,
        cfg,
        source: loaded.source.clone(),
        out: out.clone(),
        panel: opts.panel.clone(),
        artifacts: Vec::new(),
    };
    log::info!("stage {} -> {}", stage.as_str(), out.display());
    let (status, sites) = pool.install(|| stage_body(stage, &mut ctx))?;
    Ok(RunOutcome {
        status,
        out_dir: out,
        artifacts: ctx.artifacts,
        sites,
    })
}
