//! The ten binary integrity indicators.

use serde::{Deserialize, Serialize};

use crate::augment::AugmentationRecord;
use crate::error::{Error, Evaluated, Result};
use crate::geometry::GeometryQuality;
use crate::ids::SiteId;
use crate::relations::{AdminMatch, SiteRelations};
use crate::Scalar;

/// Thresholds of the indicators. All must lie in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    /// Built-up + water share above which a site fails (strict).
    pub infra_threshold: f64,
    /// Other-land-cover share at or above which a site fails.
    pub landcover_threshold: f64,
    pub forest_at_planting_threshold: f64,
    pub stable_cropland_threshold: f64,
    /// Circularity at or above which a site fails.
    pub circle_threshold: f64,
    /// Both overlap ratios with an admin unit above this fail (strict).
    pub admin_threshold: f64,
    /// Both overlap ratios above this make two sites duplicates (strict).
    pub dup_threshold: f64,
    /// 0 tests road presence by length; otherwise roads are buffered by this
    /// many metres and the covered share is tested against `infra_threshold`.
    pub road_buffer_m: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            infra_threshold: 0.10,
            landcover_threshold: 0.20,
            forest_at_planting_threshold: 0.20,
            stable_cropland_threshold: 0.20,
            circle_threshold: 0.95,
            admin_threshold: 0.98,
            dup_threshold: 0.95,
            road_buffer_m: 0.0,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("infra_threshold", self.infra_threshold),
            ("landcover_threshold", self.landcover_threshold),
            ("forest_at_planting_threshold", self.forest_at_planting_threshold),
            ("stable_cropland_threshold", self.stable_cropland_threshold),
            ("circle_threshold", self.circle_threshold),
            ("admin_threshold", self.admin_threshold),
            ("dup_threshold", self.dup_threshold),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.road_buffer_m >= 0.0) || !self.road_buffer_m.is_finite() {
            return Err(Error::Config(format!("road_buffer_m must be >= 0, got {}", self.road_buffer_m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    #[serde(rename = "na")]
    NotEvaluable,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotEvaluable => "na",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "pass" => Some(Outcome::Pass),
            "fail" => Some(Outcome::Fail),
            "na" => Some(Outcome::NotEvaluable),
            _ => None,
        }
    }

    /// `Pass` when `fails` is false.
    pub fn from_failure(fails: bool) -> Self {
        if fails {
            Outcome::Fail
        } else {
            Outcome::Pass
        }
    }

    fn of<T>(v: Evaluated<T>, fails: impl FnOnce(T) -> bool) -> Self {
        match v {
            Ok(x) => Outcome::from_failure(fails(x)),
            Err(_) => Outcome::NotEvaluable,
        }
    }

    pub fn is_evaluated(&self) -> bool {
        *self != Outcome::NotEvaluable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    RoadPresence,
    BuiltAreaPresence,
    ForestAtPlantingGlad,
    OtherLandcoverScore,
    NestingPolygon,
    IntersectingPolygon,
    ExactAdminArea,
    PerfectCircleIndicator,
    GeometryValidity,
    StableCroplandScore,
}

impl Indicator {
    pub const ALL: [Indicator; 10] = [
        Indicator::RoadPresence,
        Indicator::BuiltAreaPresence,
        Indicator::ForestAtPlantingGlad,
        Indicator::OtherLandcoverScore,
        Indicator::NestingPolygon,
        Indicator::IntersectingPolygon,
        Indicator::ExactAdminArea,
        Indicator::PerfectCircleIndicator,
        Indicator::GeometryValidity,
        Indicator::StableCroplandScore,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Indicator::RoadPresence => "road_presence",
            Indicator::BuiltAreaPresence => "built_area_presence",
            Indicator::ForestAtPlantingGlad => "forest_at_planting_glad",
            Indicator::OtherLandcoverScore => "other_landcover_score",
            Indicator::NestingPolygon => "nesting_polygon",
            Indicator::IntersectingPolygon => "intersecting_polygon",
            Indicator::ExactAdminArea => "exact_admin_area",
            Indicator::PerfectCircleIndicator => "perfect_circle_indicator",
            Indicator::GeometryValidity => "geometry_validity",
            Indicator::StableCroplandScore => "stable_cropland_score",
        }
    }
}

/// Outcomes in [`Indicator::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndicatorVector(pub [Outcome; 10]);

impl IndicatorVector {
    pub fn get(&self, i: Indicator) -> Outcome {
        self.0[i as usize]
    }

    pub fn set(&mut self, i: Indicator, o: Outcome) {
        self.0[i as usize] = o;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Indicator, Outcome)> + '_ {
        Indicator::ALL.iter().map(|&i| (i, self.get(i)))
    }
}

/// Everything the indicators read for one site. `None` marks an input that
/// is unavailable for the site.
#[derive(Debug, Clone, Copy)]
pub struct SiteEvidence<'a, T: Scalar> {
    pub site_id: &'a SiteId,
    pub quality: Option<&'a GeometryQuality<T>>,
    pub relations: Option<&'a SiteRelations>,
    pub admin: Option<&'a AdminMatch<T>>,
    pub augment: Option<&'a AugmentationRecord<T>>,
}

pub fn evaluate_indicators<T: Scalar>(ev: &SiteEvidence<'_, T>, cfg: &ScoringConfig) -> IndicatorVector {
    use Indicator::*;
    let na = Outcome::NotEvaluable;
    let mut v = IndicatorVector([na; 10]);
    let t = T::lit;

    if let Some(a) = ev.augment {
        let road = if cfg.road_buffer_m > 0.0 {
            match a.road_area_fraction {
                Some(f) => Outcome::of(f, |x| x > t(cfg.infra_threshold)),
                None => na,
            }
        } else {
            Outcome::of(a.road_km_per_km2, |d| d > T::zero())
        };
        v.set(RoadPresence, road);
        let infra = a.built_fraction.and_then(|b| a.water_fraction.map(|w| b + w));
        v.set(BuiltAreaPresence, Outcome::of(infra, |x| x > t(cfg.infra_threshold)));
        v.set(
            ForestAtPlantingGlad,
            Outcome::of(a.treecover_at_planting_fraction, |x| x >= t(cfg.forest_at_planting_threshold)),
        );
        v.set(
            OtherLandcoverScore,
            Outcome::of(a.other_landcover_fraction, |x| x >= t(cfg.landcover_threshold)),
        );
        v.set(
            StableCroplandScore,
            Outcome::of(a.stable_cropland_fraction, |x| x >= t(cfg.stable_cropland_threshold)),
        );
    }
    if let Some(r) = ev.relations {
        v.set(NestingPolygon, Outcome::from_failure(r.is_subset(ev.site_id)));
        v.set(IntersectingPolygon, Outcome::from_failure(r.has_intersections()));
    }
    if let Some(m) = ev.admin {
        v.set(ExactAdminArea, Outcome::from_failure(m.matched));
    }
    if let Some(q) = ev.quality {
        v.set(GeometryValidity, Outcome::from_failure(!q.is_valid));
        if let Some(c) = q.circularity {
            v.set(PerfectCircleIndicator, Outcome::from_failure(c >= t(cfg.circle_threshold)));
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LdisScore {
    pub site_id: SiteId,
    pub passed: u8,
    pub evaluated: u8,
    pub perfect: bool,
}

pub fn ldis_score(site_id: SiteId, v: &IndicatorVector) -> LdisScore {
    let passed = v.0.iter().filter(|o| **o == Outcome::Pass).count() as u8;
    let evaluated = v.0.iter().filter(|o| o.is_evaluated()).count() as u8;
    LdisScore {
        site_id,
        passed,
        evaluated,
        perfect: passed == 10 && evaluated == 10,
    }
}
