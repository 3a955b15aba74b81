//! Cloud screening, median composites and site/annulus index series.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::BTreeMap;

use geo::{MultiPolygon, Polygon};
use serde::{Deserialize, Serialize};

use super::bands::{compute_index, Band, BandStack, VegIndex};
use super::months::top_green_months;
use crate::error::{Evaluated, NotEvaluable, Result};
use crate::ids::SiteId;
use crate::raster::{zonal_mean, zone_mask, GridLayer, GridSpec, Semantics, ZoneMask};
use crate::Scalar;

/// Periods, in years relative to planting, of the index series.
pub const VEG_PERIODS: [i32; 5] = [-1, 0, 1, 2, 5];
/// Stacks are kept only when strictly less than this share of the site is cloudy.
pub const MAX_CLOUD_FRACTION: f64 = 0.20;
pub const DEFAULT_REFERENCE_YEAR: i32 = 2023;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Site,
    Annulus,
}

impl Zone {
    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::Site => "site",
            Zone::Annulus => "annulus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneIndexSeries<T: Scalar> {
    pub site_id: SiteId,
    pub zone: Zone,
    pub period: i32,
    pub index: VegIndex,
    pub mean: Evaluated<T>,
    pub pixel_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VegOptions {
    pub max_cloud_fraction: f64,
    /// Year whose monthly NDVI decides the greenest months.
    pub reference_year: i32,
    pub periods: Vec<i32>,
}

impl Default for VegOptions {
    fn default() -> Self {
        VegOptions {
            max_cloud_fraction: MAX_CLOUD_FRACTION,
            reference_year: DEFAULT_REFERENCE_YEAR,
            periods: VEG_PERIODS.to_vec(),
        }
    }
}

/// How composite months are chosen for a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonthChoice {
    Fixed([u32; 3]),
    /// Greenest months of the site in the reference year.
    PerSite,
}

/// Share of valid QA pixels in the zone flagged cloudy (any nonzero value).
pub fn cloud_fraction<T: Scalar>(stack: &BandStack<T>, mask: &ZoneMask) -> Result<Evaluated<T>> {
    let qa = stack.band(Band::QaCloud)?;
    let (mut cloudy, mut valid) = (0usize, 0usize);
    for &i in mask.indices() {
        let v = qa.values[i];
        if qa.is_valid(v) {
            valid += 1;
            if v != T::zero() {
                cloudy += 1;
            }
        }
    }
    if valid == 0 {
        return Ok(Err(NotEvaluable::NoValidPixels));
    }
    Ok(Ok(T::from_count(cloudy) / T::from_count(valid)))
}

/// Keep/reject decision for one stack over a zone. Zones without valid QA
/// pixels are rejected as not evaluable.
pub fn cloud_fraction_screen<T: Scalar>(
    stack: &BandStack<T>,
    zone: &MultiPolygon<T>,
    max_fraction: T,
) -> Result<Evaluated<bool>> {
    let spec = match stack.spec() {
        Some(s) => *s,
        None => return Ok(Err(NotEvaluable::LayerMissing)),
    };
    let mask = match zone_mask(&spec, zone) {
        Ok(m) => m,
        Err(e) => return Ok(Err(e)),
    };
    Ok(cloud_fraction(stack, &mask)?.map(|f| f < max_fraction))
}

fn median<T: Scalar>(v: &mut [T]) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Per-pixel median of each reflectance band across `stacks`, skipping
/// missing and cloudy pixels. All stacks must share one grid.
pub fn median_composite<T: Scalar>(stacks: &[&BandStack<T>], year: i32, month: u32) -> Result<BandStack<T>> {
    let mut bands = BTreeMap::new();
    let Some(spec) = stacks.first().and_then(|s| s.spec()).copied() else {
        return BandStack::new(year, month, bands);
    };
    for b in [Band::Red, Band::Nir, Band::RedEdge] {
        if !stacks.iter().all(|s| s.has_band(b)) {
            continue;
        }
        let layers: Vec<&GridLayer<T>> = stacks.iter().map(|s| s.band(b)).collect::<Result<_>>()?;
        let qas: Vec<Option<&GridLayer<T>>> = stacks.iter().map(|s| s.band(Band::QaCloud).ok()).collect();
        let mut buf = Vec::with_capacity(stacks.len());
        let values = (0..spec.len())
            .map(|i| {
                buf.clear();
                for (l, qa) in layers.iter().zip(&qas) {
                    let v = l.values[i];
                    let clear = qa.is_none_or(|q| q.is_valid(q.values[i]) && q.values[i] == T::zero());
                    if clear && l.is_valid(v) {
                        buf.push(v);
                    }
                }
                if buf.is_empty() {
                    T::nan()
                } else {
                    median(&mut buf)
                }
            })
            .collect();
        bands.insert(b, GridLayer::new(spec, None, values, Semantics::MonthlyBand)?);
    }
    BandStack::new(year, month, bands)
}

fn spec_key<T: Scalar>(s: &GridSpec<T>) -> (T, T, T, T, usize, usize) {
    (s.origin.x, s.origin.y, s.pixel_width, s.pixel_height, s.width, s.height)
}

fn cmp_spec<T: Scalar>(a: &GridSpec<T>, b: &GridSpec<T>) -> Ordering {
    spec_key(a).partial_cmp(&spec_key(b)).unwrap_or(Ordering::Equal)
}

/// Stacks accepted by the cloud screen over the site, restricted to one grid
/// (the smallest by origin and size, so the choice is order independent).
fn accepted<'a, T: Scalar>(
    stacks: &[&'a BandStack<T>],
    site: &MultiPolygon<T>,
    max_cloud: T,
) -> Result<Vec<&'a BandStack<T>>> {
    let mut keep = Vec::new();
    for s in stacks {
        if let Ok(true) = cloud_fraction_screen(s, site, max_cloud)? {
            keep.push(*s);
        }
    }
    let Some(grid) = keep.iter().filter_map(|s| s.spec()).min_by(|a, b| cmp_spec(a, b)).copied() else {
        return Ok(keep);
    };
    let before = keep.len();
    keep.retain(|s| s.spec() == Some(&grid));
    if keep.len() < before {
        log::warn!("{} stacks on a different grid ignored", before - keep.len());
    }
    Ok(keep)
}

fn zone_mean<T: Scalar>(layer: &GridLayer<T>, zone: &MultiPolygon<T>) -> (Evaluated<T>, usize) {
    match zone_mask(&layer.spec, zone).and_then(|m| zonal_mean(layer, &m)) {
        Ok((mean, n)) => (Ok(mean), n),
        Err(e) => (Err(e), 0),
    }
}

/// Site-zone NDVI mean for each month of `year` (composite of that month's
/// accepted stacks).
pub fn monthly_ndvi_means<T: Scalar, S: Borrow<BandStack<T>>>(
    stacks: &[S],
    site: &Polygon<T>,
    year: i32,
    max_cloud: T,
) -> Result<[Option<T>; 12]> {
    let zone = MultiPolygon(vec![site.clone()]);
    let mut out = [None; 12];
    for (m, slot) in (1..=12u32).zip(out.iter_mut()) {
        let of_month: Vec<&BandStack<T>> = stacks
            .iter()
            .map(Borrow::borrow)
            .filter(|s: &&BandStack<T>| s.year == year && s.month == m)
            .collect();
        let acc = accepted(&of_month, &zone, max_cloud)?;
        if acc.is_empty() {
            continue;
        }
        let comp = median_composite(&acc, year, m)?;
        let ndvi = compute_index(&comp, VegIndex::Ndvi)?;
        *slot = zone_mean(&ndvi, &zone).0.ok();
    }
    Ok(out)
}

/// Outcome of [`zone_index_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct VegOutcome<T: Scalar> {
    pub records: Vec<ZoneIndexSeries<T>>,
    pub months: Evaluated<[u32; 3]>,
}

/// Site and annulus index means per period, from per-period median
/// composites of the chosen months.
///
/// Records are ordered by zone, period and index. A period with no accepted
/// stack yields records flagged not evaluable.
#[allow(clippy::too_many_arguments)]
pub fn zone_index_series<T: Scalar, S: Borrow<BandStack<T>>>(
    stacks: &[S],
    site_id: &SiteId,
    site: &Polygon<T>,
    annulus: &MultiPolygon<T>,
    planting_year: Option<i32>,
    months: MonthChoice,
    opts: &VegOptions,
) -> Result<VegOutcome<T>> {
    let max_cloud = T::lit(opts.max_cloud_fraction);
    let months = match months {
        MonthChoice::Fixed(m) => Ok(m),
        MonthChoice::PerSite => top_green_months(&monthly_ndvi_means(stacks, site, opts.reference_year, max_cloud)?),
    };
    let site_zone = MultiPolygon(vec![site.clone()]);
    let mut periods = opts.periods.clone();
    periods.sort_unstable();
    periods.dedup();

    let mut per_zone: BTreeMap<(Zone, i32, VegIndex), (Evaluated<T>, usize)> = BTreeMap::new();
    for &period in &periods {
        let results: Evaluated<BandStack<T>> = match (planting_year, months) {
            (None, _) => Err(NotEvaluable::NoPlantingYear),
            (_, Err(e)) => Err(e),
            (Some(y), Ok(m)) => {
                let year = y + period;
                let cands: Vec<&BandStack<T>> =
                    stacks
                    .iter()
                    .map(Borrow::borrow)
                    .filter(|s: &&BandStack<T>| s.year == year && m.contains(&s.month))
                    .collect();
                let acc = accepted(&cands, &site_zone, max_cloud)?;
                if acc.is_empty() {
                    Err(NotEvaluable::NoComposite)
                } else {
                    Ok(median_composite(&acc, year, m[0])?)
                }
            }
        };
        for index in VegIndex::ALL {
            let layer = match &results {
                Ok(comp) => Ok(compute_index(comp, index)?),
                Err(e) => Err(*e),
            };
            for (zone, geom) in [(Zone::Site, &site_zone), (Zone::Annulus, annulus)] {
                let v = match &layer {
                    Ok(_) if zone == Zone::Annulus && annulus.0.is_empty() => (Err(NotEvaluable::InvalidGeometry), 0),
                    Ok(l) => zone_mean(l, geom),
                    Err(e) => (Err(*e), 0),
                };
                per_zone.insert((zone, period, index), v);
            }
        }
    }
    let records = per_zone
        .into_iter()
        .map(|((zone, period, index), (mean, pixel_count))| ZoneIndexSeries {
            site_id: site_id.clone(),
            zone,
            period,
            index,
            mean,
            pixel_count,
        })
        .collect();
    Ok(VegOutcome { records, months })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::outer_buffer_annulus;
    use crate::geometry::planar::polygon_contains;
    use geo::{Coord, LineString};

    fn spec() -> GridSpec<f64> {
        GridSpec::new(Coord { x: 0.0, y: 0.1 }, 0.001, 0.001, 100, 100).unwrap()
    }

    fn site() -> Polygon<f64> {
        Polygon::new(
            LineString::from(vec![(0.04, 0.04), (0.06, 0.04), (0.06, 0.06), (0.04, 0.06), (0.04, 0.04)]),
            vec![],
        )
    }

    /// Stack whose NDVI is `inside` over the site and `outside` elsewhere.
    fn stack(year: i32, month: u32, inside: f64, outside: f64, cloud_share: f64) -> BandStack<f64> {
        let s = spec();
        let p = site();
        let (mut red, mut nir, mut re, mut qa) = (vec![], vec![], vec![], vec![]);
        let mut k = 0usize;
        for r in 0..s.height {
            for c in 0..s.width {
                let ctr = s.pixel_center(r, c);
                let inside_site = polygon_contains(&p, ctr);
                let v = if inside_site { inside } else { outside };
                // nir = 0.5, red chosen so (nir-red)/(nir+red) = v
                let rd = 0.5 * (1.0 - v) / (1.0 + v);
                red.push(rd);
                nir.push(0.5);
                re.push(rd);
                let cloudy = inside_site && {
                    k += 1;
                    (k as f64) <= cloud_share * 400.0
                };
                qa.push(if cloudy { 1.0 } else { 0.0 });
            }
        }
        let mut b = BTreeMap::new();
        b.insert(Band::Red, GridLayer::new(s, None, red, Semantics::MonthlyBand).unwrap());
        b.insert(Band::Nir, GridLayer::new(s, None, nir, Semantics::MonthlyBand).unwrap());
        b.insert(Band::RedEdge, GridLayer::new(s, None, re, Semantics::MonthlyBand).unwrap());
        b.insert(Band::QaCloud, GridLayer::new(s, None, qa, Semantics::MonthlyBand).unwrap());
        BandStack::new(year, month, b).unwrap()
    }

    fn site_zone() -> MultiPolygon<f64> {
        MultiPolygon(vec![site()])
    }

    #[test]
    fn site_has_400_pixels() {
        assert_eq!(zone_mask(&spec(), &site_zone()).unwrap().len(), 400);
    }

    #[test]
    fn cloud_screen_boundaries() {
        let z = site_zone();
        assert_eq!(cloud_fraction_screen(&stack(2020, 1, 0.5, 0.5, 0.10), &z, 0.2).unwrap(), Ok(true));
        assert_eq!(cloud_fraction_screen(&stack(2020, 1, 0.5, 0.5, 0.25), &z, 0.2).unwrap(), Ok(false));
        assert_eq!(cloud_fraction_screen(&stack(2020, 1, 0.5, 0.5, 0.20), &z, 0.2).unwrap(), Ok(false));
    }

    fn run(stacks: &[BandStack<f64>]) -> VegOutcome<f64> {
        let annulus = outer_buffer_annulus(&site(), 500.0).unwrap().zone;
        zone_index_series(
            stacks,
            &SiteId::from("s1"),
            &site(),
            &annulus,
            Some(2018),
            MonthChoice::Fixed([6, 7, 8]),
            &VegOptions::default(),
        )
        .unwrap()
    }

    fn ndvi(out: &VegOutcome<f64>, zone: Zone, period: i32) -> Evaluated<f64> {
        out.records
            .iter()
            .find(|r| r.zone == zone && r.period == period && r.index == VegIndex::Ndvi)
            .unwrap()
            .mean
    }

    #[test]
    fn constant_and_separated_zones() {
        let out = run(&[stack(2018, 6, 0.5, 0.5, 0.0)]);
        assert!((ndvi(&out, Zone::Site, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!((ndvi(&out, Zone::Annulus, 0).unwrap() - 0.5).abs() < 1e-12);
        let out = run(&[stack(2018, 7, 0.6, 0.3, 0.0)]);
        assert!((ndvi(&out, Zone::Site, 0).unwrap() - 0.6).abs() < 1e-12);
        assert!((ndvi(&out, Zone::Annulus, 0).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(ndvi(&out, Zone::Site, 1), Err(NotEvaluable::NoComposite));
        assert_eq!(out.records.len(), 2 * 5 * 3);
    }

    #[test]
    fn growth_sequence_and_order_invariance() {
        let levels = [(-1, 0.38), (0, 0.39), (1, 0.41), (2, 0.43), (5, 0.47)];
        let mut stacks: Vec<BandStack<f64>> = levels
            .iter()
            .flat_map(|&(p, v)| [stack(2018 + p, 6, v, 0.3, 0.0), stack(2018 + p, 8, v, 0.3, 0.05)])
            .collect();
        let a = run(&stacks);
        let series: Vec<f64> = levels.iter().map(|&(p, _)| ndvi(&a, Zone::Site, p).unwrap()).collect();
        assert!(series.windows(2).all(|w| w[1] > w[0]));
        assert!((series[1] - 0.39).abs() < 1e-9 && (series[4] - 0.47).abs() < 1e-9);
        stacks.reverse();
        assert_eq!(run(&stacks), a);
    }

    #[test]
    fn per_site_month_choice() {
        let stacks: Vec<BandStack<f64>> = (1..=12u32)
            .map(|m| stack(2023, m, if [2, 3, 10].contains(&m) { 0.8 } else { 0.2 }, 0.1, 0.0))
            .collect();
        let means = monthly_ndvi_means(&stacks, &site(), 2023, 0.2).unwrap();
        assert_eq!(top_green_months(&means), Ok([2, 3, 10]));
    }
}
