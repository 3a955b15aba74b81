//! Corpus summary: score distributions, completeness, size bins and
//! planting-year counts. Built from plain rows so that the `report` stage can
//! rebuild it from the CSV outputs alone.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scoring::{
    completeness_report, ldis_score, size_bin_label, size_bin_of, CompletenessReport, Indicator, IndicatorVector,
    Outcome, SiteSize, SIZE_BIN_EDGES,
};
use crate::SiteId;

/// What the summary needs to know about one scored site.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub site_id: String,
    pub source_kind: String,
    pub area_km2: f64,
    pub planting_year: Option<i32>,
    pub planting_date_type: String,
    pub vector: IndicatorVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub sites: usize,
    pub passed_histogram: Vec<usize>,
    pub perfect: usize,
    pub perfect_pct: f64,
    pub mean_passed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub sites: usize,
    pub dropped: usize,
    /// Share of sites with fewer than 10 passes.
    pub share_below_perfect: f64,
    /// Share of sites failing at least one evaluated indicator.
    pub share_failing_any: f64,
    pub report: CompletenessReport,
    pub by_source_kind: BTreeMap<String, GroupStats>,
    pub by_size_bin: BTreeMap<String, GroupStats>,
    /// Keyed by year; sites without a date count under `unknown`.
    pub planting_year_counts: BTreeMap<String, usize>,
    pub planting_date_type_counts: BTreeMap<String, usize>,
}

fn group_stats(passed: &[u8], perfect: &[bool]) -> GroupStats {
    let mut hist = vec![0usize; 11];
    for &p in passed {
        hist[p as usize] += 1;
    }
    let n = passed.len();
    let perfect_n = perfect.iter().filter(|p| **p).count();
    let sum: usize = passed.iter().map(|&p| p as usize).sum();
    GroupStats {
        sites: n,
        passed_histogram: hist,
        perfect: perfect_n,
        perfect_pct: if n > 0 { 100.0 * perfect_n as f64 / n as f64 } else { 0.0 },
        mean_passed: if n > 0 { sum as f64 / n as f64 } else { 0.0 },
    }
}

pub fn build_summary(rows: &[SummaryRow], dropped: usize) -> Summary {
    let vectors: Vec<IndicatorVector> = rows.iter().map(|r| r.vector).collect();
    let scores: Vec<_> = rows.iter().map(|r| ldis_score(SiteId::new(r.site_id.clone()), &r.vector)).collect();
    let sizes: Vec<SiteSize> = rows
        .iter()
        .map(|r| SiteSize {
            area_km2: r.area_km2,
            nested: r.vector.get(Indicator::NestingPolygon) == Outcome::Fail,
        })
        .collect();
    let report = completeness_report(&vectors, &scores, &sizes);
    let n = rows.len();
    let share = |k: usize| if n > 0 { k as f64 / n as f64 } else { 0.0 };
    let below = scores.iter().filter(|s| s.passed < 10).count();
    let failing = vectors.iter().filter(|v| v.0.contains(&Outcome::Fail)).count();

    let mut kinds: BTreeMap<String, (Vec<u8>, Vec<bool>)> = BTreeMap::new();
    let mut bins: Vec<(Vec<u8>, Vec<bool>)> = vec![(vec![], vec![]); SIZE_BIN_EDGES.len()];
    let mut years: BTreeMap<String, usize> = BTreeMap::new();
    let mut types: BTreeMap<String, usize> = BTreeMap::new();
    for (r, s) in rows.iter().zip(&scores) {
        let k = kinds.entry(r.source_kind.clone()).or_default();
        k.0.push(s.passed);
        k.1.push(s.perfect);
        let b = &mut bins[size_bin_of(r.area_km2)];
        b.0.push(s.passed);
        b.1.push(s.perfect);
        let year = r.planting_year.map(|y| y.to_string()).unwrap_or_else(|| "unknown".into());
        *years.entry(year).or_default() += 1;
        *types.entry(r.planting_date_type.clone()).or_default() += 1;
    }
    Summary {
        sites: n,
        dropped,
        share_below_perfect: share(below),
        share_failing_any: share(failing),
        report,
        by_source_kind: kinds.into_iter().map(|(k, (p, f))| (k, group_stats(&p, &f))).collect(),
        by_size_bin: bins
            .iter()
            .enumerate()
            .map(|(k, (p, f))| (format!("{k}:{}", size_bin_label(k)), group_stats(p, f)))
            .collect(),
        planting_year_counts: years,
        planting_date_type_counts: types,
    }
}

fn read_table(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let header = rdr.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    let rows = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(path, e.to_string()))?;
    Ok((header, rows))
}

fn column(header: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::parse(path, format!("missing column {name}")))
}

/// Rebuilds the summary rows from `sites.csv` and `ldis_scores.csv`.
pub fn rows_from_outputs(dir: &Path) -> Result<(Vec<SummaryRow>, usize)> {
    let sites_path = dir.join("sites.csv");
    let scores_path = dir.join("ldis_scores.csv");
    let (sh, srows) = read_table(&sites_path)?;
    let (id_c, kind_c, area_c, date_c, type_c) = (
        column(&sh, "site_id", &sites_path)?,
        column(&sh, "source_kind", &sites_path)?,
        column(&sh, "area_km2_derived", &sites_path)?,
        column(&sh, "planting_date_derived", &sites_path)?,
        column(&sh, "planting_date_type_derived", &sites_path)?,
    );
    let mut meta: BTreeMap<String, (String, f64, Option<i32>, String)> = BTreeMap::new();
    for r in &srows {
        let area: f64 = r[area_c]
            .parse()
            .map_err(|_| Error::parse(&sites_path, format!("bad area {:?}", &r[area_c])))?;
        let year = r[date_c].get(..4).and_then(|y| y.parse().ok());
        meta.insert(r[id_c].to_string(), (r[kind_c].to_string(), area, year, r[type_c].to_string()));
    }
    let (ch, crows) = read_table(&scores_path)?;
    let cid = column(&ch, "site_id", &scores_path)?;
    let cols = Indicator::ALL
        .iter()
        .map(|i| column(&ch, i.as_str(), &scores_path))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(crows.len());
    for r in &crows {
        let id = r[cid].to_string();
        let (kind, area, year, ty) = meta
            .get(&id)
            .cloned()
            .ok_or_else(|| Error::parse(&scores_path, format!("site {id} is not in sites.csv")))?;
        let mut v = IndicatorVector([Outcome::NotEvaluable; 10]);
        for (ind, &c) in Indicator::ALL.iter().zip(&cols) {
            let o = Outcome::parse(&r[c]).ok_or_else(|| Error::parse(&scores_path, format!("bad outcome {:?}", &r[c])))?;
            v.set(*ind, o);
        }
        rows.push(SummaryRow {
            site_id: id,
            source_kind: kind,
            area_km2: area,
            planting_year: year,
            planting_date_type: ty,
            vector: v,
        });
    }
    let dropped_path = dir.join("dropped.csv");
    let dropped = if dropped_path.exists() { read_table(&dropped_path)?.1.len() } else { 0 };
    Ok((rows, dropped))
}
