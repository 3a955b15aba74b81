//! Catalog ingestion: GeoJSON site features plus optional metadata CSVs,
//! field-name alignment, unit normalisation and planting-date typing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use geo::{Coord, LineString};
use geojson::{Feature, GeoJson, GeometryValue};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{CatalogConfig, FilterConfig};
use crate::error::{Error, Result};
use crate::geometry::{GeometryKind, ReportedGeometry, SiteGeometry};
use crate::SiteId;

/// Canonical metadata fields and the source names recognised for each.
const FIELD_ALIASES: &[(&str, &[&str])] = &[
    ("site_id", &["site_id", "site_id_reported", "siteid", "site", "id"]),
    ("project_id", &["project_id", "project_id_reported", "projectid", "project"]),
    ("host_name", &["host_name", "host", "platform", "source"]),
    ("url", &["url", "link", "project_url"]),
    ("iso3", &["iso3", "country_iso3", "country_code", "iso"]),
    ("name", &["name", "project_name", "title"]),
    ("description", &["description", "project_description", "summary"]),
    ("classification", &["classification", "project_type", "category", "methodology"]),
    ("planting_date", &["planting_date", "planting_date_reported", "date_planted", "planted_on"]),
    ("planting_date_type", &["planting_date_type", "date_type"]),
    ("intervention_year", &["intervention_year", "year_of_intervention"]),
    ("crediting_start", &["crediting_start", "crediting_period_start", "crediting_start_date"]),
    ("registration_date", &["registration_date", "registered_on", "registration"]),
    ("area", &["area", "site_area", "area_reported", "site_sqkm", "size"]),
    ("trees_planted", &["trees_planted", "trees_planted_reported", "tree_count", "n_trees"]),
    ("species", &["species", "species_reported", "species_planted"]),
    ("survival_rate", &["survival_rate", "survival_rate_reported", "survival"]),
    ("continent", &["continent", "region"]),
];

pub const CANONICAL_FIELDS: [&str; 18] = [
    "site_id",
    "project_id",
    "host_name",
    "url",
    "iso3",
    "name",
    "description",
    "classification",
    "planting_date",
    "planting_date_type",
    "intervention_year",
    "crediting_start",
    "registration_date",
    "area",
    "trees_planted",
    "species",
    "survival_rate",
    "continent",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantingDateType {
    Planting,
    Registration,
    InterventionYear,
    CreditingStart,
    Unknown,
}

impl PlantingDateType {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlantingDateType::Planting => "planting",
            PlantingDateType::Registration => "registration",
            PlantingDateType::InterventionYear => "intervention_year",
            PlantingDateType::CreditingStart => "crediting_start",
            PlantingDateType::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "planting" | "planting_date" => PlantingDateType::Planting,
            "registration" | "registration_date" => PlantingDateType::Registration,
            "intervention_year" | "intervention" => PlantingDateType::InterventionYear,
            "crediting_start" | "crediting" => PlantingDateType::CreditingStart,
            "unknown" => PlantingDateType::Unknown,
            _ => return None,
        })
    }
}

/// One planting site after ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteRecord {
    pub site_id: SiteId,
    /// Id of the feature this site was split from; equals `site_id` for
    /// single-part sites.
    pub parent_id: SiteId,
    /// Kind of the source feature (a split child keeps `multipart`).
    pub source_kind: GeometryKind,
    pub project_id: Option<String>,
    pub host_name: Option<String>,
    pub url: Option<String>,
    pub iso3: Option<String>,
    pub geometry: SiteGeometry<f64>,
    pub planting_date: Option<NaiveDate>,
    pub planting_date_type: PlantingDateType,
    pub area_km2_reported: Option<f64>,
    pub continent: Option<String>,
    /// Reported values of every recognised field, verbatim.
    pub reported: BTreeMap<String, String>,
    /// Properties that matched no recognised field, verbatim.
    pub extra: BTreeMap<String, String>,
}

impl SiteRecord {
    pub fn planting_year(&self) -> Option<i32> {
        self.planting_date.map(|d| d.year())
    }

    pub fn reported_field(&self, field: &str) -> Option<&str> {
        self.reported.get(field).map(String::as_str)
    }
}

/// A record removed during ingestion, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedRecord {
    pub site_id: String,
    pub project_id: String,
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub sites: Vec<SiteRecord>,
    pub dropped: Vec<DroppedRecord>,
    pub warnings: Vec<String>,
}

/// Textual form of a JSON property; objects and arrays keep their JSON text.
fn value_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => {
            let t = s.trim();
            (!t.is_empty()).then(|| t.to_string())
        }
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        other => Some(other.to_string()),
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace([' ', '-'], "_")
}

struct FieldResolver {
    lookup: BTreeMap<String, &'static str>,
}

impl FieldResolver {
    fn new(extra: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut lookup = BTreeMap::new();
        for (canon, aliases) in FIELD_ALIASES {
            for a in *aliases {
                lookup.insert(a.to_string(), *canon);
            }
        }
        for (canon, aliases) in extra {
            let Some(&c) = CANONICAL_FIELDS.iter().find(|c| **c == canon.as_str()) else {
                return Err(Error::Config(format!("catalog.aliases: unknown field {canon:?}")));
            };
            for a in aliases {
                lookup.insert(normalize_key(a), c);
            }
        }
        Ok(FieldResolver { lookup })
    }

    /// Splits raw properties into recognised fields and leftovers. The first
    /// alias in declaration order wins when several are present.
    fn split(&self, props: &BTreeMap<String, String>) -> (BTreeMap<String, String>, BTreeMap<String, String>) {
        let mut known: BTreeMap<String, (usize, String, String)> = BTreeMap::new();
        let mut extra = BTreeMap::new();
        for (k, v) in props {
            let nk = normalize_key(k);
            match self.lookup.get(&nk) {
                Some(canon) => {
                    let rank = FIELD_ALIASES
                        .iter()
                        .find(|(c, _)| c == canon)
                        .and_then(|(_, a)| a.iter().position(|x| *x == nk))
                        .unwrap_or(usize::MAX);
                    match known.get(*canon) {
                        Some((r, _, _)) if *r <= rank => {
                            extra.insert(k.clone(), v.clone());
                        }
                        _ => {
                            if let Some((_, old_k, old_v)) = known.insert(canon.to_string(), (rank, k.clone(), v.clone())) {
                                extra.insert(old_k, old_v);
                            }
                        }
                    }
                }
                None => {
                    extra.insert(k.clone(), v.clone());
                }
            }
        }
        (known.into_iter().map(|(k, (_, _, v))| (k, v)).collect(), extra)
    }
}

/// Area in km² from text such as `"250 ha"`, `"2.5 km2"` or `"12000 m²"`.
/// Bare numbers use `default_unit`.
pub fn parse_area_km2(text: &str, default_unit: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase().replace(',', "");
    let split = t
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e'))
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num.trim().parse().ok()?;
    let unit = unit.trim();
    let unit = if unit.is_empty() { default_unit } else { unit };
    let factor = match unit.trim_end_matches('.') {
        "ha" | "hectare" | "hectares" | "hectareas" => 0.01,
        "km2" | "km²" | "sqkm" | "sq km" | "square kilometres" | "square kilometers" | "km^2" => 1.0,
        "m2" | "m²" | "sqm" | "sq m" | "square metres" | "square meters" | "m^2" => 1e-6,
        "acre" | "acres" | "ac" => 0.004_046_856_422_4,
        _ => return None,
    };
    (value.is_finite() && value >= 0.0).then_some(value * factor)
}

/// Parses common date spellings; a bare year maps to 1 January.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let t = text.trim();
    for fmt in ["%Y-%m-%d", "%Y/%m/%d", "%d.%m.%Y", "%Y%m%d"] {
        if let Ok(d) = NaiveDate::parse_from_str(t, fmt) {
            return Some(d);
        }
    }
    if t.len() > 10 && t.is_char_boundary(10) {
        if let Ok(d) = NaiveDate::parse_from_str(&t[..10], "%Y-%m-%d") {
            if matches!(t.as_bytes()[10], b'T' | b' ') {
                return Some(d);
            }
        }
    }
    if let Some((y, m)) = t.split_once('-').or_else(|| t.split_once('/')) {
        if y.len() == 4 && (1..=2).contains(&m.len()) {
            if let (Ok(y), Ok(m)) = (y.parse(), m.parse()) {
                return NaiveDate::from_ymd_opt(y, m, 1);
            }
        }
    }
    let year = t.strip_suffix(".0").unwrap_or(t);
    if year.len() == 4 {
        if let Ok(y) = year.parse::<i32>() {
            return NaiveDate::from_ymd_opt(y, 1, 1);
        }
    }
    None
}

/// Chooses the planting date by precedence: explicit planting date (typed by
/// a declared `planting_date_type` when given), intervention year, crediting
/// start, registration date. Unparseable values are skipped with a warning;
/// if nothing parses the type is unknown.
pub fn resolve_planting_date(
    fields: &BTreeMap<String, String>,
    site: &str,
    warnings: &mut Vec<String>,
) -> (Option<NaiveDate>, PlantingDateType) {
    let declared = fields.get("planting_date_type").map(|s| (s, PlantingDateType::parse(s)));
    if let Some((raw, None)) = declared {
        warnings.push(format!("site {site}: unrecognised planting_date_type {raw:?}"));
    }
    let order = [
        ("planting_date", declared.and_then(|d| d.1).unwrap_or(PlantingDateType::Planting)),
        ("intervention_year", PlantingDateType::InterventionYear),
        ("crediting_start", PlantingDateType::CreditingStart),
        ("registration_date", PlantingDateType::Registration),
    ];
    for (field, ty) in order {
        if let Some(raw) = fields.get(field) {
            match parse_date(raw) {
                Some(d) => return (Some(d), ty),
                None => warnings.push(format!("site {site}: cannot parse {field} {raw:?}")),
            }
        }
    }
    (None, PlantingDateType::Unknown)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FilterRule {
    Classification(String),
    Keyword(String),
    /// No name, description or classification to judge by.
    NoMetadata,
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterDecision {
    pub keep: bool,
    pub rule: FilterRule,
}

impl FilterDecision {
    pub fn reason(&self) -> String {
        match &self.rule {
            FilterRule::Classification(c) => format!("classification matches {c:?}"),
            FilterRule::Keyword(k) => format!("keyword {k:?} in name or description"),
            FilterRule::NoMetadata => "no project-type metadata".into(),
            FilterRule::NoMatch => "not an afforestation or reforestation project".into(),
        }
    }
}

/// Project-type filter. Classification takes precedence over keywords;
/// records without any type metadata are kept.
pub fn filter_afforestation(
    name: Option<&str>,
    description: Option<&str>,
    classification: Option<&str>,
    cfg: &FilterConfig,
) -> FilterDecision {
    fn nonempty(s: Option<&str>) -> Option<&str> {
        s.map(str::trim).filter(|s| !s.is_empty())
    }
    let (name, description, classification) = (nonempty(name), nonempty(description), nonempty(classification));
    if let Some(c) = classification {
        let lc = c.to_lowercase();
        let tokens: Vec<&str> = lc.split(|ch: char| !ch.is_alphanumeric()).filter(|t| !t.is_empty()).collect();
        for allowed in &cfg.classifications {
            let a = allowed.to_lowercase();
            if lc == a || tokens.contains(&a.as_str()) {
                return FilterDecision {
                    keep: true,
                    rule: FilterRule::Classification(allowed.clone()),
                };
            }
        }
    }
    let text = [name, description].into_iter().flatten().collect::<Vec<_>>().join(" ").to_lowercase();
    for k in &cfg.keywords {
        if !k.is_empty() && text.contains(&k.to_lowercase()) {
            return FilterDecision {
                keep: true,
                rule: FilterRule::Keyword(k.clone()),
            };
        }
    }
    if name.is_none() && description.is_none() && classification.is_none() {
        return FilterDecision {
            keep: true,
            rule: FilterRule::NoMetadata,
        };
    }
    FilterDecision {
        keep: false,
        rule: FilterRule::NoMatch,
    }
}

fn position(p: &geojson::Position, site: &str) -> Result<Coord<f64>> {
    let s = p.as_slice();
    if s.len() < 2 {
        return Err(Error::InvalidInput(format!("site {site}: position with fewer than 2 values")));
    }
    Ok(Coord { x: s[0], y: s[1] })
}

fn rings(poly: &[Vec<geojson::Position>], site: &str) -> Result<Vec<LineString<f64>>> {
    poly.iter()
        .map(|r| r.iter().map(|p| position(p, site)).collect::<Result<Vec<_>>>().map(LineString))
        .collect()
}

fn reported_geometry(v: &GeometryValue, site: &str) -> Result<ReportedGeometry<f64>> {
    match v {
        GeometryValue::Point { coordinates } => Ok(ReportedGeometry::Point(position(coordinates, site)?)),
        GeometryValue::Polygon { coordinates } => Ok(ReportedGeometry::Polygon(rings(coordinates, site)?)),
        GeometryValue::MultiPolygon { coordinates } => {
            let parts = coordinates.iter().map(|p| rings(p, site)).collect::<Result<Vec<_>>>()?;
            Ok(match parts.len() {
                1 => ReportedGeometry::Polygon(parts.into_iter().next().unwrap()),
                _ => ReportedGeometry::MultiPolygon(parts),
            })
        }
        other => Err(Error::InvalidInput(format!(
            "site {site}: unsupported geometry type {}",
            other.type_name()
        ))),
    }
}

fn read_features(path: &Path) -> Result<Vec<Feature>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let gj: GeoJson = text.parse().map_err(|e: geojson::Error| Error::parse(path, e.to_string()))?;
    match gj {
        GeoJson::FeatureCollection(fc) => Ok(fc.features),
        GeoJson::Feature(f) => Ok(vec![f]),
        GeoJson::Geometry(_) => Err(Error::parse(path, "expected a Feature or FeatureCollection")),
    }
}

/// Reads metadata CSVs into raw property maps keyed by site id.
fn read_metadata(paths: &[std::path::PathBuf], resolver: &FieldResolver) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for path in paths {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        let headers = rdr.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
        let id_col = headers
            .iter()
            .position(|h| resolver.lookup.get(&normalize_key(h)) == Some(&"site_id"))
            .ok_or_else(|| Error::parse(path, "metadata CSV has no site id column"))?;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
            let id = rec.get(id_col).unwrap_or("").trim().to_string();
            if id.is_empty() {
                continue;
            }
            let entry = out.entry(id).or_default();
            for (h, v) in headers.iter().zip(rec.iter()) {
                if !v.trim().is_empty() {
                    entry.entry(h.to_string()).or_insert_with(|| v.trim().to_string());
                }
            }
        }
    }
    Ok(out)
}

fn feature_id(f: &Feature) -> Option<String> {
    match &f.id {
        Some(geojson::feature::Id::String(s)) => Some(s.clone()),
        Some(geojson::feature::Id::Number(n)) => Some(n.to_string()),
        None => None,
    }
}

/// Reads, harmonises and filters the catalog. Records are sorted by site
/// id; duplicate ids are a hard error.
pub fn ingest_catalog(cfg: &CatalogConfig, filter: &FilterConfig) -> Result<Catalog> {
    let resolver = FieldResolver::new(&cfg.aliases)?;
    let default_unit = cfg.default_area_unit.clone().unwrap_or_else(|| "ha".into());
    if parse_area_km2("1", &default_unit).is_none() {
        return Err(Error::Config(format!("unknown default_area_unit {default_unit:?}")));
    }
    let metadata = read_metadata(&cfg.metadata, &resolver)?;
    let mut catalog = Catalog::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut feature_no = 0usize;
    for path in &cfg.sites {
        for f in read_features(path)? {
            feature_no += 1;
            let mut props: BTreeMap<String, String> = f
                .properties
                .iter()
                .flatten()
                .filter_map(|(k, v)| value_text(v).map(|t| (k.clone(), t)))
                .collect();
            let (known, _) = resolver.split(&props);
            let id = known
                .get("site_id")
                .cloned()
                .or_else(|| feature_id(&f))
                .unwrap_or_else(|| {
                    let g = format!("feature-{feature_no}");
                    catalog.warnings.push(format!("{}: feature {feature_no} has no site id, using {g}", path.display()));
                    g
                });
            if let Some(meta) = metadata.get(&id) {
                for (k, v) in meta {
                    props.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
            let (mut fields, extra) = resolver.split(&props);
            fields.insert("site_id".into(), id.clone());
            *seen.entry(id.clone()).or_default() += 1;
            ingest_feature(&f, id, fields, extra, &default_unit, filter, &mut catalog);
        }
    }
    let dups: Vec<String> = seen.into_iter().filter(|(_, n)| *n > 1).map(|(id, _)| id).collect();
    if !dups.is_empty() {
        return Err(Error::DuplicateSiteIds(dups));
    }
    catalog.sites.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    let mut child_ids = BTreeSet::new();
    for s in &catalog.sites {
        if !child_ids.insert(s.site_id.clone()) {
            return Err(Error::DuplicateSiteIds(vec![s.site_id.to_string()]));
        }
    }
    catalog.dropped.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    Ok(catalog)
}

#[allow(clippy::too_many_arguments)]
fn ingest_feature(
    f: &Feature,
    id: String,
    fields: BTreeMap<String, String>,
    extra: BTreeMap<String, String>,
    default_unit: &str,
    filter: &FilterConfig,
    catalog: &mut Catalog,
) {
    let get = |k: &str| fields.get(k).map(String::as_str);
    let drop = |reason: String| DroppedRecord {
        site_id: id.clone(),
        project_id: get("project_id").unwrap_or("").to_string(),
        name: get("name").unwrap_or("").to_string(),
        reason,
    };
    if filter.enabled {
        let d = filter_afforestation(get("name"), get("description"), get("classification"), filter);
        if !d.keep {
            catalog.dropped.push(drop(d.reason()));
            return;
        }
    }
    let Some(geom) = f.geometry.as_ref() else {
        catalog.dropped.push(drop("feature has no geometry".into()));
        return;
    };
    let reported = match reported_geometry(&geom.value, &id) {
        Ok(r) => r,
        Err(e) => {
            catalog.dropped.push(drop(e.to_string()));
            return;
        }
    };
    let (planting_date, planting_date_type) = resolve_planting_date(&fields, &id, &mut catalog.warnings);
    let area_km2_reported = get("area").and_then(|a| {
        let v = parse_area_km2(a, default_unit);
        if v.is_none() {
            catalog.warnings.push(format!("site {id}: cannot parse area {a:?}"));
        }
        v
    });
    let iso3 = get("iso3").map(|s| s.trim().to_ascii_uppercase()).filter(|s| {
        s.len() == 3 && s.chars().all(|c| c.is_ascii_alphabetic())
    });
    if iso3.is_none() {
        if let Some(raw) = get("iso3") {
            catalog.warnings.push(format!("site {id}: {raw:?} is not an ISO3 code"));
        }
    }
    let parent = SiteId::new(id.clone());
    let source_kind = reported.kind();
    let parts: Vec<ReportedGeometry<f64>> = match reported {
        ReportedGeometry::MultiPolygon(parts) => parts.into_iter().map(ReportedGeometry::Polygon).collect(),
        other => vec![other],
    };
    let split = parts.len() > 1;
    for (k, part) in parts.into_iter().enumerate() {
        catalog.sites.push(SiteRecord {
            site_id: if split { parent.part(k + 1) } else { parent.clone() },
            parent_id: parent.clone(),
            source_kind,
            project_id: get("project_id").map(String::from),
            host_name: get("host_name").map(String::from),
            url: get("url").map(String::from),
            iso3: iso3.clone(),
            geometry: SiteGeometry::new(part),
            planting_date,
            planting_date_type,
            area_km2_reported,
            continent: get("continent").map(String::from),
            reported: fields.clone(),
            extra: extra.clone(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn area_units() {
        assert_eq!(parse_area_km2("250 ha", "ha"), Some(2.5));
        assert_eq!(parse_area_km2("2.5 km2", "ha"), Some(2.5));
        assert_eq!(parse_area_km2("1,000,000 m²", "ha"), Some(1.0));
        assert_eq!(parse_area_km2("300", "ha"), Some(3.0));
        assert_eq!(parse_area_km2("300", "km2"), Some(300.0));
        assert_eq!(parse_area_km2("lots", "ha"), None);
        assert_eq!(parse_area_km2("5 furlongs", "ha"), None);
    }

    #[test]
    fn dates() {
        let d = |y, m, dd| NaiveDate::from_ymd_opt(y, m, dd);
        assert_eq!(parse_date("2015-03-04"), d(2015, 3, 4));
        assert_eq!(parse_date("2015/03/04"), d(2015, 3, 4));
        assert_eq!(parse_date("04.03.2015"), d(2015, 3, 4));
        assert_eq!(parse_date("2015-03-04T10:00:00Z"), d(2015, 3, 4));
        assert_eq!(parse_date("2015-03"), d(2015, 3, 1));
        assert_eq!(parse_date("2015"), d(2015, 1, 1));
        assert_eq!(parse_date("2015.0"), d(2015, 1, 1));
        assert_eq!(parse_date("spring"), None);
    }

    #[test]
    fn date_precedence() {
        let mut w = vec![];
        let f = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let all = f(&[
            ("registration_date", "2010-01-01"),
            ("crediting_start", "2011-01-01"),
            ("intervention_year", "2012"),
            ("planting_date", "2013-05-01"),
        ]);
        assert_eq!(resolve_planting_date(&all, "s", &mut w).1, PlantingDateType::Planting);
        let no_planting = f(&[("registration_date", "2010-01-01"), ("crediting_start", "2011-01-01")]);
        assert_eq!(resolve_planting_date(&no_planting, "s", &mut w).1, PlantingDateType::CreditingStart);
        let declared = f(&[("planting_date", "2010-01-01"), ("planting_date_type", "registration")]);
        assert_eq!(resolve_planting_date(&declared, "s", &mut w).1, PlantingDateType::Registration);
        assert!(w.is_empty());
        let bad = f(&[("planting_date", "soon")]);
        assert_eq!(resolve_planting_date(&bad, "s", &mut w), (None, PlantingDateType::Unknown));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn filter_rules() {
        let cfg = FilterConfig::default();
        let d = filter_afforestation(Some("Community reforestation, Kenya"), None, None, &cfg);
        assert_eq!(d.rule, FilterRule::Keyword("reforestation".into()));
        let d = filter_afforestation(Some("Improved cookstoves phase 2"), None, None, &cfg);
        assert!(!d.keep);
        let d = filter_afforestation(Some("Improved cookstoves phase 2"), None, Some("ARR"), &cfg);
        assert_eq!(d.rule, FilterRule::Classification("ARR".into()));
        let d = filter_afforestation(None, Some("Large-scale TREE PLANTING"), Some("VM0047 / other"), &cfg);
        assert_eq!(d.rule, FilterRule::Keyword("tree planting".into()));
        assert_eq!(filter_afforestation(None, None, None, &cfg).rule, FilterRule::NoMetadata);
    }

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    const SQUARE: &str = "[[[0,0],[0.01,0],[0.01,0.01],[0,0.01],[0,0]]]";

    #[test]
    fn ingest_two_features_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let gj = format!(
            r#"{{"type":"FeatureCollection","features":[
            {{"type":"Feature","properties":{{"site_id":"b","Project Name":"Reforestation A","area":"250 ha","planted_on":"2016-04-02"}},
              "geometry":{{"type":"Polygon","coordinates":{SQUARE}}}}},
            {{"type":"Feature","properties":{{"id":"a","colour":"green"}},
              "geometry":{{"type":"Point","coordinates":[36.8,-1.3]}}}}]}}"#
        );
        let sites = write(dir.path(), "s.geojson", &gj);
        let meta = write(dir.path(), "m.csv", "site_id,iso3,registration_date\na,ken,2012-01-01\nb,KEN,2010-01-01\n");
        let cfg = CatalogConfig {
            sites: vec![sites],
            metadata: vec![meta],
            ..Default::default()
        };
        let c = ingest_catalog(&cfg, &FilterConfig::default()).unwrap();
        assert_eq!(c.sites.len(), 2);
        let (a, b) = (&c.sites[0], &c.sites[1]);
        assert_eq!(a.site_id.as_str(), "a");
        assert_eq!(a.iso3.as_deref(), Some("KEN"));
        assert_eq!(a.planting_date_type, PlantingDateType::Registration);
        assert_eq!(a.extra.get("colour").map(String::as_str), Some("green"));
        assert_eq!(b.area_km2_reported, Some(2.5));
        assert_eq!(b.planting_date_type, PlantingDateType::Planting);
        assert_eq!(b.planting_year(), Some(2016));
        assert_eq!(b.reported_field("name"), Some("Reforestation A"));
    }

    #[test]
    fn multipolygon_is_split_and_duplicates_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mp = format!("[{SQUARE},{SQUARE},{SQUARE}]");
        let gj = format!(
            r#"{{"type":"FeatureCollection","features":[{{"type":"Feature","id":"m","properties":{{}},
               "geometry":{{"type":"MultiPolygon","coordinates":{mp}}}}}]}}"#
        );
        let p = write(dir.path(), "s.geojson", &gj);
        let cfg = CatalogConfig {
            sites: vec![p.clone(), p.clone()],
            ..Default::default()
        };
        let err = ingest_catalog(&cfg, &FilterConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateSiteIds(ref v) if v == &["m".to_string()]));
        let cfg = CatalogConfig {
            sites: vec![p],
            ..Default::default()
        };
        let c = ingest_catalog(&cfg, &FilterConfig::default()).unwrap();
        let ids: Vec<&str> = c.sites.iter().map(|s| s.site_id.as_str()).collect();
        assert_eq!(ids, ["m#1", "m#2", "m#3"]);
        assert!(c.sites.iter().all(|s| s.parent_id.as_str() == "m" && s.source_kind == GeometryKind::Multipart));
    }

    #[test]
    fn dropped_records_carry_reasons() {
        let dir = tempfile::tempdir().unwrap();
        let gj = format!(
            r#"{{"type":"FeatureCollection","features":[
            {{"type":"Feature","properties":{{"site_id":"x","name":"Improved cookstoves phase 2"}},
              "geometry":{{"type":"Polygon","coordinates":{SQUARE}}}}},
            {{"type":"Feature","properties":{{"site_id":"y"}},"geometry":null}}]}}"#
        );
        let p = write(dir.path(), "s.geojson", &gj);
        let cfg = CatalogConfig {
            sites: vec![p],
            ..Default::default()
        };
        let c = ingest_catalog(&cfg, &FilterConfig::default()).unwrap();
        assert!(c.sites.is_empty());
        assert_eq!(c.dropped.len(), 2);
        assert!(c.dropped.iter().all(|d| !d.reason.is_empty()));
    }
}
