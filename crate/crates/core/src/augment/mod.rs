//! Per-site overlay indicators from raster and vector layers.

mod climate;
mod loss;
mod roads;
mod terrain;

use std::collections::BTreeMap;

use geo::{Coord, Polygon};
use serde::{Deserialize, Serialize};

pub use climate::{
    annual_mean_at, sample_climate_at_centroid, ClimateLayers, ClimateSample, ClimateVar, CLIMATE_OFFSETS,
};
pub use loss::{
    loss_windows_for, tree_loss_windows, LossWindow, LossWindows, WindowCoverage, YearWindow, LOSS_FIRST_YEAR,
    LOSS_LAST_YEAR, PLANTING_YEAR_RANGE,
};
pub use roads::{clipped_road_length, road_area_fraction, road_density, RoadLayer};
pub use terrain::{horn_slope_deg, terrain_stats, TerrainStats};

use crate::error::{Evaluated, NotEvaluable};
use crate::ids::SiteId;
use crate::raster::{class_fraction, polygon_mask, GridLayer, GridSpec, ZoneMask};
use crate::Scalar;

/// Class codes of the land-cover layers. Every list is required for the
/// fraction it feeds; an empty list makes that fraction not evaluable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassMap {
    pub built: Vec<f64>,
    pub water: Vec<f64>,
    pub other_landcover: Vec<f64>,
    pub stable_cropland: Vec<f64>,
    pub tree_cover: Vec<f64>,
    pub cropland_from_tree: Vec<f64>,
    pub cropland_to_tree: Vec<f64>,
    pub short_veg_after_loss: Vec<f64>,
}

/// All overlay inputs. Absent layers leave their fields not evaluable.
#[derive(Debug, Default)]
pub struct AugmentLayers<T: Scalar> {
    /// Land cover / land use classes (water, cropland, transitions, ...).
    pub landcover: Option<GridLayer<T>>,
    /// Built-up layer; when absent the built classes are read from `landcover`.
    pub built: Option<GridLayer<T>>,
    /// Tree-cover layers by year.
    pub forest: BTreeMap<i32, GridLayer<T>>,
    pub lossyear: Option<GridLayer<T>>,
    pub dem: Option<GridLayer<T>>,
    pub roads: Option<RoadLayer<T>>,
    pub climate: ClimateLayers<T>,
    pub classes: ClassMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentOptions<T: Scalar> {
    /// 0 measures road presence by length; otherwise roads are buffered by
    /// this many metres and the covered share of the site is reported.
    pub road_buffer_m: T,
}

impl<T: Scalar> Default for AugmentOptions<T> {
    fn default() -> Self {
        AugmentOptions { road_buffer_m: T::zero() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentationRecord<T: Scalar> {
    pub site_id: SiteId,
    pub built_fraction: Evaluated<T>,
    pub water_fraction: Evaluated<T>,
    pub other_landcover_fraction: Evaluated<T>,
    pub stable_cropland_fraction: Evaluated<T>,
    pub treecover_at_planting_fraction: Evaluated<T>,
    pub cropland_from_tree_fraction: Evaluated<T>,
    pub cropland_to_tree_fraction: Evaluated<T>,
    pub short_veg_after_loss_fraction: Evaluated<T>,
    pub road_km_per_km2: Evaluated<T>,
    /// Only computed in buffered-road mode.
    pub road_area_fraction: Option<Evaluated<T>>,
    pub loss: Evaluated<LossWindows<T>>,
    pub terrain: Evaluated<TerrainStats<T>>,
    pub climate: Vec<ClimateSample<T>>,
}

impl<T: Scalar> AugmentationRecord<T> {
    /// Record for a site whose geometry could not be derived.
    pub fn not_evaluable(site_id: SiteId, reason: NotEvaluable) -> Self {
        AugmentationRecord {
            site_id,
            built_fraction: Err(reason),
            water_fraction: Err(reason),
            other_landcover_fraction: Err(reason),
            stable_cropland_fraction: Err(reason),
            treecover_at_planting_fraction: Err(reason),
            cropland_from_tree_fraction: Err(reason),
            cropland_to_tree_fraction: Err(reason),
            short_veg_after_loss_fraction: Err(reason),
            road_km_per_km2: Err(reason),
            road_area_fraction: None,
            loss: Err(reason),
            terrain: Err(reason),
            climate: CLIMATE_OFFSETS
                .iter()
                .map(|&offset| ClimateSample {
                    offset,
                    precip: Err(reason),
                    tmin: Err(reason),
                    tmax: Err(reason),
                })
                .collect(),
        }
    }
}

/// Share of zone pixel centres whose class is in `classes`.
pub fn zonal_class_fraction<T: Scalar>(layer: &GridLayer<T>, zone: &Polygon<T>, classes: &[T]) -> Evaluated<T> {
    let mask = polygon_mask(&layer.spec, zone)?;
    class_fraction(layer, &mask, classes)
}

/// Zone masks memoised per grid.
struct MaskCache<'a, T: Scalar> {
    zone: &'a Polygon<T>,
    entries: Vec<(GridSpec<T>, Evaluated<ZoneMask>)>,
}

impl<'a, T: Scalar> MaskCache<'a, T> {
    fn get(&mut self, spec: &GridSpec<T>) -> Evaluated<&ZoneMask> {
        let pos = match self.entries.iter().position(|(s, _)| s == spec) {
            Some(p) => p,
            None => {
                self.entries.push((*spec, polygon_mask(spec, self.zone)));
                self.entries.len() - 1
            }
        };
        self.entries[pos].1.as_ref().map_err(|e| *e)
    }
}

fn fraction_of<T: Scalar>(cache: &mut MaskCache<'_, T>, layer: Option<&GridLayer<T>>, codes: &[f64]) -> Evaluated<T> {
    let layer = layer.ok_or(NotEvaluable::LayerMissing)?;
    if codes.is_empty() {
        return Err(NotEvaluable::LayerMissing);
    }
    let classes: Vec<T> = codes.iter().map(|&c| T::lit(c)).collect();
    let mask = cache.get(&layer.spec)?;
    class_fraction(layer, mask, &classes)
}

/// Latest tree-cover layer not after the planting year.
fn forest_layer_for<T: Scalar>(forest: &BTreeMap<i32, GridLayer<T>>, planting_year: Option<i32>) -> Evaluated<&GridLayer<T>> {
    if forest.is_empty() {
        return Err(NotEvaluable::LayerMissing);
    }
    let y = planting_year.ok_or(NotEvaluable::NoPlantingYear)?;
    forest
        .range(..=y)
        .next_back()
        .map(|(_, l)| l)
        .ok_or(NotEvaluable::MissingYear)
}

/// Computes every overlay field for one site.
pub fn augment_site<T: Scalar>(
    site_id: SiteId,
    zone: &Polygon<T>,
    centroid: Coord<T>,
    planting_year: Option<i32>,
    layers: &AugmentLayers<T>,
    opts: &AugmentOptions<T>,
) -> AugmentationRecord<T> {
    let mut cache = MaskCache { zone, entries: Vec::new() };
    let c = &layers.classes;
    let lc = layers.landcover.as_ref();
    let built_fraction = match layers.built.as_ref() {
        Some(b) => fraction_of(&mut cache, Some(b), &c.built),
        None => fraction_of(&mut cache, lc, &c.built),
    };
    let treecover_at_planting_fraction = forest_layer_for(&layers.forest, planting_year)
        .and_then(|l| fraction_of(&mut cache, Some(l), &c.tree_cover));

    let (road_km_per_km2, road_area_fraction) = match layers.roads.as_ref() {
        None => (
            Err(NotEvaluable::LayerMissing),
            (opts.road_buffer_m > T::zero()).then_some(Err(NotEvaluable::LayerMissing)),
        ),
        Some(r) => (
            road_density(r, zone),
            (opts.road_buffer_m > T::zero()).then(|| road_area_fraction(r, zone, opts.road_buffer_m)),
        ),
    };

    let loss = match (layers.lossyear.as_ref(), planting_year) {
        (None, _) => Err(NotEvaluable::LayerMissing),
        (Some(_), None) => Err(NotEvaluable::NoPlantingYear),
        (Some(l), Some(y)) => cache.get(&l.spec).and_then(|m| tree_loss_windows(l, m, y)),
    };
    let terrain = match layers.dem.as_ref() {
        None => Err(NotEvaluable::LayerMissing),
        Some(d) => cache.get(&d.spec).and_then(|m| terrain_stats(d, m)),
    };

    AugmentationRecord {
        site_id,
        built_fraction,
        water_fraction: fraction_of(&mut cache, lc, &c.water),
        other_landcover_fraction: fraction_of(&mut cache, lc, &c.other_landcover),
        stable_cropland_fraction: fraction_of(&mut cache, lc, &c.stable_cropland),
        treecover_at_planting_fraction,
        cropland_from_tree_fraction: fraction_of(&mut cache, lc, &c.cropland_from_tree),
        cropland_to_tree_fraction: fraction_of(&mut cache, lc, &c.cropland_to_tree),
        short_veg_after_loss_fraction: fraction_of(&mut cache, lc, &c.short_veg_after_loss),
        road_km_per_km2,
        road_area_fraction,
        loss,
        terrain,
        climate: sample_climate_at_centroid(&layers.climate, centroid, planting_year, &CLIMATE_OFFSETS),
    }
}
