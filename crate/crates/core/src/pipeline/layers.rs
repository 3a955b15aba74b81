//! Loading the layers named in the run config.

use std::collections::BTreeMap;
use std::path::Path;

use geo::{Coord, LineString, MultiPolygon, Polygon};
use geojson::{GeoJson, GeometryValue};

use super::config::{ClimateVarName, LayerConfig};
use crate::augment::{AugmentLayers, ClimateLayers, ClimateVar, RoadLayer};
use crate::error::{Error, Result};
use crate::raster::{read_grid, GridLayer, Semantics};
use crate::relations::{AdminLayer, AdminUnit};
use crate::vegetation::{Band, BandStack};

/// A band stack and the sites it is restricted to (empty: any site).
#[derive(Debug)]
pub struct StackEntry {
    pub stack: BandStack<f64>,
    pub sites: Vec<String>,
}

#[derive(Debug, Default)]
pub struct LoadedLayers {
    pub augment: AugmentLayers<f64>,
    pub admin: Option<AdminLayer<f64>>,
    pub stacks: Vec<StackEntry>,
}

fn features(path: &Path) -> Result<Vec<geojson::Feature>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let gj: GeoJson = text.parse().map_err(|e: geojson::Error| Error::parse(path, e.to_string()))?;
    Ok(match gj {
        GeoJson::FeatureCollection(fc) => fc.features,
        GeoJson::Feature(f) => vec![f],
        GeoJson::Geometry(g) => vec![geojson::Feature::from(g)],
    })
}

fn coord(p: &geojson::Position, path: &Path) -> Result<Coord<f64>> {
    match p.as_slice() {
        [x, y, ..] => Ok(Coord { x: *x, y: *y }),
        _ => Err(Error::parse(path, "position with fewer than 2 values")),
    }
}

fn line(pts: &[geojson::Position], path: &Path) -> Result<LineString<f64>> {
    pts.iter().map(|p| coord(p, path)).collect::<Result<Vec<_>>>().map(LineString)
}

fn polygon(rings: &[Vec<geojson::Position>], path: &Path) -> Result<Polygon<f64>> {
    let mut it = rings.iter();
    let shell = it.next().ok_or_else(|| Error::parse(path, "polygon without rings"))?;
    let holes = it.map(|r| line(r, path)).collect::<Result<Vec<_>>>()?;
    Ok(Polygon::new(line(shell, path)?, holes))
}

/// Road polylines from LineString / MultiLineString features.
pub fn load_roads(path: &Path) -> Result<RoadLayer<f64>> {
    let mut lines = Vec::new();
    for f in features(path)? {
        match f.geometry.map(|g| g.value) {
            Some(GeometryValue::LineString { coordinates }) => lines.push(line(&coordinates, path)?),
            Some(GeometryValue::MultiLineString { coordinates }) => {
                for l in &coordinates {
                    lines.push(line(l, path)?);
                }
            }
            None => {}
            Some(other) => {
                return Err(Error::parse(path, format!("road layer holds a {}", other.type_name())));
            }
        }
    }
    Ok(RoadLayer::new(lines))
}

/// Admin units from Polygon / MultiPolygon features. The unit id is taken
/// from the feature id or an `id`, `admin_id`, `gid` or `name` property.
pub fn load_admin(path: &Path) -> Result<AdminLayer<f64>> {
    let mut units = Vec::new();
    for (k, f) in features(path)?.into_iter().enumerate() {
        let prop = |key: &str| {
            f.properties.as_ref().and_then(|p| p.get(key)).and_then(|v| match v {
                serde_json::Value::String(s) => Some(s.clone()),
                serde_json::Value::Number(n) => Some(n.to_string()),
                _ => None,
            })
        };
        let id = match &f.id {
            Some(geojson::feature::Id::String(s)) => Some(s.clone()),
            Some(geojson::feature::Id::Number(n)) => Some(n.to_string()),
            None => None,
        }
        .or_else(|| ["id", "admin_id", "gid", "name"].into_iter().find_map(prop))
        .unwrap_or_else(|| format!("unit-{}", k + 1));
        let geometry = match f.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::Polygon { coordinates }) => MultiPolygon(vec![polygon(coordinates, path)?]),
            Some(GeometryValue::MultiPolygon { coordinates }) => MultiPolygon(
                coordinates.iter().map(|p| polygon(p, path)).collect::<Result<Vec<_>>>()?,
            ),
            None => continue,
            Some(other) => {
                return Err(Error::parse(path, format!("admin layer holds a {}", other.type_name())));
            }
        };
        units.push(AdminUnit { id, geometry });
    }
    Ok(AdminLayer::new(units))
}

fn grid(path: &Path, semantics: Semantics) -> Result<GridLayer<f64>> {
    read_grid(path, semantics)
}

pub fn load_layers(cfg: &LayerConfig) -> Result<LoadedLayers> {
    let mut augment = AugmentLayers {
        classes: cfg.classes.clone(),
        ..Default::default()
    };
    augment.landcover = cfg.landcover.as_deref().map(|p| grid(p, Semantics::ClassCoded)).transpose()?;
    augment.built = cfg.built.as_deref().map(|p| grid(p, Semantics::ClassCoded)).transpose()?;
    augment.lossyear = cfg.lossyear.as_deref().map(|p| grid(p, Semantics::LossYear)).transpose()?;
    augment.dem = cfg.dem.as_deref().map(|p| grid(p, Semantics::Continuous)).transpose()?;
    augment.roads = cfg.roads.as_deref().map(load_roads).transpose()?;
    let mut forest = BTreeMap::new();
    for (year, p) in &cfg.forest {
        forest.insert(*year, grid(p, Semantics::ClassCoded)?);
    }
    augment.forest = forest;
    let mut climate = ClimateLayers::new();
    for c in &cfg.climate {
        let var = match c.var {
            ClimateVarName::Precip => ClimateVar::Precip,
            ClimateVarName::Tmin => ClimateVar::Tmin,
            ClimateVarName::Tmax => ClimateVar::Tmax,
        };
        climate.insert(var, c.year, c.month, grid(&c.path, Semantics::MonthlyBand)?);
    }
    augment.climate = climate;
    let admin = cfg.admin.as_deref().map(load_admin).transpose()?;
    let mut stacks = Vec::with_capacity(cfg.bands.len());
    for b in &cfg.bands {
        let mut bands = BTreeMap::new();
        for (band, p) in [(Band::Red, &b.red), (Band::Nir, &b.nir), (Band::RedEdge, &b.rededge), (Band::QaCloud, &b.qa_cloud)] {
            bands.insert(band, grid(p, Semantics::Continuous)?);
        }
        let mut sites = b.sites.clone();
        sites.sort();
        stacks.push(StackEntry {
            stack: BandStack::new(b.year, b.month, bands)?,
            sites,
        });
    }
    Ok(LoadedLayers { augment, admin, stacks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roads_and_admin_from_geojson() {
        let dir = tempfile::tempdir().unwrap();
        let roads = dir.path().join("roads.geojson");
        std::fs::write(
            &roads,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","properties":{},"geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]}},
              {"type":"Feature","properties":{},"geometry":{"type":"MultiLineString","coordinates":[[[0,0],[1,0]],[[0,1],[1,1]]]}}]}"#,
        )
        .unwrap();
        assert_eq!(load_roads(&roads).unwrap().len(), 3);
        let admin = dir.path().join("admin.geojson");
        std::fs::write(
            &admin,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","properties":{"name":"North"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]}"#,
        )
        .unwrap();
        let layer = load_admin(&admin).unwrap();
        assert_eq!(layer.units()[0].id, "North");
        assert!(load_roads(&admin).is_err());
    }
}
