use proptest::prelude::*;

use ldis_core::augment::AugmentationRecord;
use ldis_core::scoring::{
    completeness_report, evaluate_indicators, ldis_score, size_bins, Indicator, IndicatorVector, Outcome, ScoringConfig,
    SiteEvidence, SiteSize,
};
use ldis_core::{NotEvaluable, SiteId};

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![Just(Outcome::Pass), Just(Outcome::Fail), Just(Outcome::NotEvaluable)]
}

fn vector() -> impl Strategy<Value = IndicatorVector> {
    prop::array::uniform10(outcome()).prop_map(IndicatorVector)
}

fn fraction() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![1 => Just(None), 4 => (0.0..1.0f64).prop_map(Some)]
}

fn record(id: &SiteId, f: [Option<f64>; 5]) -> AugmentationRecord<f64> {
    let mut r = AugmentationRecord::not_evaluable(id.clone(), NotEvaluable::LayerMissing);
    let ev = |x: Option<f64>| x.ok_or(NotEvaluable::NoValidPixels);
    r.built_fraction = ev(f[0]);
    r.water_fraction = ev(f[1]);
    r.other_landcover_fraction = ev(f[2]);
    r.stable_cropland_fraction = ev(f[3]);
    r.treecover_at_planting_fraction = ev(f[4]);
    r
}

fn passes(id: &SiteId, f: [Option<f64>; 5]) -> u8 {
    let rec = record(id, f);
    let ev = SiteEvidence::<f64> {
        site_id: id,
        quality: None,
        relations: None,
        admin: None,
        augment: Some(&rec),
    };
    ldis_score(id.clone(), &evaluate_indicators(&ev, &ScoringConfig::default())).passed
}

proptest! {
    #[test]
    fn perfect_means_ten_passes(v in vector()) {
        let s = ldis_score(SiteId::new("s"), &v);
        prop_assert_eq!(s.perfect, v.0.iter().all(|o| *o == Outcome::Pass));
        prop_assert!(s.passed <= s.evaluated && s.evaluated <= 10);
    }

    #[test]
    fn more_coverage_never_adds_passes(
        f in prop::array::uniform5(fraction()),
        k in 0usize..5,
        bump in 0.0..1.0f64,
    ) {
        let id = SiteId::new("s");
        let mut g = f;
        if let Some(x) = g[k] {
            g[k] = Some(x + (1.0 - x) * bump);
        }
        prop_assert!(passes(&id, g) <= passes(&id, f));
    }

    #[test]
    fn histograms_count_every_site(
        rows in prop::collection::vec((vector(), 0.0..6000.0f64, any::<bool>()), 0..60),
    ) {
        let vectors: Vec<IndicatorVector> = rows.iter().map(|r| r.0).collect();
        let scores: Vec<_> = vectors.iter().map(|v| ldis_score(SiteId::new("s"), v)).collect();
        let sizes: Vec<SiteSize> = rows.iter().map(|r| SiteSize { area_km2: r.1, nested: r.2 }).collect();
        let rep = completeness_report(&vectors, &scores, &sizes);
        prop_assert_eq!(rep.passed_histogram.iter().sum::<usize>(), rows.len());
        prop_assert_eq!(rep.evaluated_histogram.iter().sum::<usize>(), rows.len());
        prop_assert_eq!(rep.perfect, scores.iter().filter(|s| s.perfect).count());
        for ind in Indicator::ALL {
            match rep.completeness.get(ind.as_str()) {
                Some(c) => prop_assert!((0.0..=1.0).contains(c)),
                None => prop_assert!(rows.is_empty()),
            }
        }
    }

    #[test]
    fn size_bins_partition_the_corpus(sizes in prop::collection::vec((0.0..8000.0f64, any::<bool>()), 0..80)) {
        let sizes: Vec<SiteSize> = sizes.into_iter().map(|(a, n)| SiteSize { area_km2: a, nested: n }).collect();
        let bins = size_bins(&sizes);
        prop_assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), sizes.len());
        let total: f64 = sizes.iter().map(|s| s.area_km2).sum();
        let nested: f64 = sizes.iter().filter(|s| s.nested).map(|s| s.area_km2).sum();
        prop_assert!((bins.iter().map(|b| b.total_area_km2).sum::<f64>() - total).abs() <= 1e-9 * total.max(1.0));
        prop_assert!((bins.iter().map(|b| b.nested_area_km2).sum::<f64>() - nested).abs() <= 1e-9 * total.max(1.0));
        for b in &bins {
            prop_assert!(b.nested_area_km2 <= b.total_area_km2);
        }
    }
}
