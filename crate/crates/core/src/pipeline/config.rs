//! Run configuration: one JSON document naming the catalog, the layers and
//! every threshold. Relative paths resolve against the config file's folder.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::ClassMap;
use crate::error::{Error, Result};
use crate::relations::OverlapOptions;
use crate::scoring::ScoringConfig;
use crate::vegetation::{VegOptions, VEG_PERIODS};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogConfig {
    /// GeoJSON Feature or FeatureCollection files.
    pub sites: Vec<PathBuf>,
    /// CSV files joined on `site_id`.
    pub metadata: Vec<PathBuf>,
    /// Unit assumed for bare area numbers: `ha`, `km2`, `m2` or `acre`.
    pub default_area_unit: Option<String>,
    /// Extra source names per canonical field, tried after the built-in ones.
    pub aliases: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub enabled: bool,
    pub classifications: Vec<String>,
    pub keywords: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            enabled: true,
            classifications: ["ARR", "afforestation", "reforestation"].map(String::from).to_vec(),
            keywords: ["afforestation", "reforestation", "tree planting", "revegetation"]
                .map(String::from)
                .to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub point_buffer_m: f64,
    pub point_buffer_segments: usize,
    /// Threshold of the `is_perfectly_circular` preprocessing flag.
    pub circle_flag_threshold: f64,
    pub annulus_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            point_buffer_m: crate::geometry::POINT_BUFFER_M,
            point_buffer_segments: crate::geometry::POINT_BUFFER_SEGMENTS,
            circle_flag_threshold: 0.98,
            annulus_m: crate::geometry::DEFAULT_ANNULUS_M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimateVarName {
    Precip,
    Tmin,
    Tmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClimateEntry {
    pub var: ClimateVarName,
    pub year: i32,
    pub month: u32,
    pub path: PathBuf,
}

/// One month of imagery. A stack listing `sites` is used for those sites
/// only; otherwise for every site its grid covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandStackEntry {
    pub year: i32,
    pub month: u32,
    pub red: PathBuf,
    pub nir: PathBuf,
    pub rededge: PathBuf,
    pub qa_cloud: PathBuf,
    #[serde(default)]
    pub sites: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerConfig {
    pub landcover: Option<PathBuf>,
    pub built: Option<PathBuf>,
    /// Tree-cover layers keyed by year.
    pub forest: BTreeMap<i32, PathBuf>,
    pub lossyear: Option<PathBuf>,
    pub dem: Option<PathBuf>,
    /// GeoJSON LineString / MultiLineString features.
    pub roads: Option<PathBuf>,
    /// GeoJSON Polygon / MultiPolygon features.
    pub admin: Option<PathBuf>,
    pub climate: Vec<ClimateEntry>,
    pub bands: Vec<BandStackEntry>,
    pub classes: ClassMap,
}

impl LayerConfig {
    pub fn has_augment_layers(&self) -> bool {
        self.landcover.is_some()
            || self.built.is_some()
            || !self.forest.is_empty()
            || self.lossyear.is_some()
            || self.dem.is_some()
            || self.roads.is_some()
            || !self.climate.is_empty()
    }
}

/// Composite month selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MonthsConfig {
    /// `"per_site"` or `"continent"`.
    Named(String),
    Fixed([u32; 3]),
}

impl Default for MonthsConfig {
    fn default() -> Self {
        MonthsConfig::Named("per_site".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VegetationConfig {
    pub max_cloud_fraction: f64,
    pub reference_year: i32,
    pub periods: Vec<i32>,
    pub months: MonthsConfig,
}

impl Default for VegetationConfig {
    fn default() -> Self {
        let d = VegOptions::default();
        VegetationConfig {
            max_cloud_fraction: d.max_cloud_fraction,
            reference_year: d.reference_year,
            periods: VEG_PERIODS.to_vec(),
            months: MonthsConfig::default(),
        }
    }
}

impl VegetationConfig {
    pub fn options(&self) -> VegOptions {
        VegOptions {
            max_cloud_fraction: self.max_cloud_fraction,
            reference_year: self.reference_year,
            periods: self.periods.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub did_horizons: Vec<i32>,
    pub bootstrap_reps: usize,
    pub bootstrap_level: f64,
    pub synth_buckets: usize,
    /// Random control points drawn when no control file is given.
    pub synth_control_points: usize,
    /// CSV with columns `point_id,period,ndvi`; period 0 is planting.
    pub synth_controls: Option<PathBuf>,
    /// CSV with columns `site_id,indicator,label` (`pass` / `fail`).
    pub labels: Option<PathBuf>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            did_horizons: crate::stats::DID_HORIZONS.to_vec(),
            bootstrap_reps: 1000,
            bootstrap_level: 0.95,
            synth_buckets: crate::stats::DEFAULT_BUCKETS,
            synth_control_points: 1000,
            synth_controls: None,
            labels: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub catalog: CatalogConfig,
    pub filter: FilterConfig,
    pub layers: LayerConfig,
    pub geometry: GeometryConfig,
    pub overlap: OverlapOptions,
    pub scoring: ScoringConfig,
    pub vegetation: VegetationConfig,
    pub stats: StatsConfig,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// 0 uses one worker per core.
    pub workers: usize,
}

/// A parsed config together with the exact bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: Option<String>,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig {
            config,
            source: Some(text),
            base_dir,
        })
    }

    /// Rewrites relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.catalog.sites.iter_mut().for_each(fix);
        self.catalog.metadata.iter_mut().for_each(fix);
        let l = &mut self.layers;
        for p in [&mut l.landcover, &mut l.built, &mut l.lossyear, &mut l.dem, &mut l.roads, &mut l.admin]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        l.forest.values_mut().for_each(fix);
        l.climate.iter_mut().for_each(|c| fix(&mut c.path));
        for b in &mut l.bands {
            for p in [&mut b.red, &mut b.nir, &mut b.rededge, &mut b.qa_cloud] {
                fix(p);
            }
        }
        for p in [&mut self.stats.synth_controls, &mut self.stats.labels].into_iter().flatten() {
            fix(p);
        }
        if let Some(p) = self.output_dir.as_mut() {
            fix(p);
        }
    }

    fn all_input_paths(&self) -> Vec<&Path> {
        let l = &self.layers;
        let mut v: Vec<&Path> = self.catalog.sites.iter().chain(&self.catalog.metadata).map(PathBuf::as_path).collect();
        v.extend(
            [&l.landcover, &l.built, &l.lossyear, &l.dem, &l.roads, &l.admin]
                .into_iter()
                .flatten()
                .map(PathBuf::as_path),
        );
        v.extend(l.forest.values().map(PathBuf::as_path));
        v.extend(l.climate.iter().map(|c| c.path.as_path()));
        for b in &l.bands {
            v.extend([b.red.as_path(), b.nir.as_path(), b.rededge.as_path(), b.qa_cloud.as_path()]);
        }
        v.extend([&self.stats.synth_controls, &self.stats.labels].into_iter().flatten().map(PathBuf::as_path));
        v
    }

    /// Checks thresholds and that every referenced input exists.
    pub fn validate(&self) -> Result<()> {
        self.scoring.validate()?;
        if self.catalog.sites.is_empty() {
            return Err(Error::Config("catalog.sites lists no files".into()));
        }
        let missing: Vec<String> = self
            .all_input_paths()
            .into_iter()
            .filter(|p| !p.exists())
            .map(|p| p.display().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing input files: {}", missing.join(", "))));
        }
        let g = &self.geometry;
        if !(g.point_buffer_m > 0.0) || g.point_buffer_segments < 3 {
            return Err(Error::Config("point buffer needs a positive radius and at least 3 segments".into()));
        }
        if !(g.circle_flag_threshold > 0.0 && g.circle_flag_threshold <= 1.0) {
            return Err(Error::Config("geometry.circle_flag_threshold must lie in (0, 1]".into()));
        }
        if !(g.annulus_m >= 0.0) {
            return Err(Error::Config("geometry.annulus_m must be >= 0".into()));
        }
        let v = &self.vegetation;
        if !(v.max_cloud_fraction > 0.0 && v.max_cloud_fraction <= 1.0) {
            return Err(Error::Config("vegetation.max_cloud_fraction must lie in (0, 1]".into()));
        }
        match &v.months {
            MonthsConfig::Named(n) if n != "per_site" && n != "continent" => {
                return Err(Error::Config(format!(
                    "vegetation.months must be \"per_site\", \"continent\" or three months, got {n:?}"
                )))
            }
            MonthsConfig::Fixed(m) if m.iter().any(|&x| !(1..=12).contains(&x)) => {
                return Err(Error::Config(format!("vegetation.months out of range: {m:?}")))
            }
            _ => {}
        }
        for b in &self.layers.bands {
            if !(1..=12).contains(&b.month) {
                return Err(Error::Config(format!("band stack {}-{} has an invalid month", b.year, b.month)));
            }
        }
        for c in &self.layers.climate {
            if !(1..=12).contains(&c.month) {
                return Err(Error::Config(format!("climate layer {} has an invalid month", c.path.display())));
            }
        }
        let s = &self.stats;
        if !(s.bootstrap_level > 0.0 && s.bootstrap_level < 1.0) || s.bootstrap_reps == 0 || s.synth_buckets == 0 {
            return Err(Error::Config(
                "stats needs bootstrap_level in (0, 1) and positive reps and buckets".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert!(c.filter.enabled);
        assert_eq!(c.geometry.circle_flag_threshold, 0.98);
        assert_eq!(c.scoring.circle_threshold, 0.95);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"scoring": {"infra": 0.1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"colour": 1}"#).is_err());
    }

    #[test]
    fn months_forms() {
        let c = RunConfig::from_json(r#"{"vegetation": {"months": [6, 7, 8]}}"#).unwrap();
        assert_eq!(c.vegetation.months, MonthsConfig::Fixed([6, 7, 8]));
        let c = RunConfig::from_json(r#"{"vegetation": {"months": "continent"}}"#).unwrap();
        assert_eq!(c.vegetation.months, MonthsConfig::Named("continent".into()));
    }

    #[test]
    fn relative_paths_resolve_and_missing_files_fail() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("sites.geojson"), "{}").unwrap();
        let mut c = RunConfig::from_json(r#"{"catalog": {"sites": ["sites.geojson"]}, "layers": {"dem": "dem.asc"}}"#)
            .unwrap();
        c.resolve_paths(dir.path());
        assert_eq!(c.catalog.sites[0], dir.path().join("sites.geojson"));
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("dem.asc"), "{err}");
        c.layers.dem = None;
        c.validate().unwrap();
    }
}
