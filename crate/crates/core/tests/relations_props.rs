use std::f64::consts::PI;

use geo::{Coord, LineString, Polygon};
use proptest::prelude::*;

use ldis_core::relations::{
    build_site_index, classify_relations, classify_relations_brute_force, OverlapOptions, Relation, SitePolygon,
};
use ldis_core::SiteId;

fn poly(cx: f64, cy: f64, r: f64, n: usize, rot: f64) -> Polygon<f64> {
    let mut v: Vec<Coord<f64>> = (0..n)
        .map(|k| {
            let a = rot + 2.0 * PI * k as f64 / n as f64;
            Coord {
                x: cx + r * a.cos(),
                y: cy + r * a.sin(),
            }
        })
        .collect();
    v.push(v[0]);
    Polygon::new(LineString(v), vec![])
}

/// A handful of polygons in a small window, with exact copies and shrunken
/// copies mixed in.
fn corpus() -> impl Strategy<Value = Vec<Polygon<f64>>> {
    prop::collection::vec(
        (0.0..0.05f64, 0.0..0.05f64, 0.002..0.015f64, 3usize..9, 0.0..PI, 0u8..4),
        2..24,
    )
    .prop_map(|specs| {
        let mut out: Vec<Polygon<f64>> = Vec::new();
        for (cx, cy, r, n, rot, kind) in specs {
            let p = match (kind, out.last()) {
                (0, Some(prev)) => prev.clone(),
                (1, Some(_)) => {
                    let c = out.last().unwrap().exterior().0[0];
                    poly(c.x, c.y, r * 0.2, n, rot)
                }
                _ => poly(5.0 + cx, 5.0 + cy, r, n, rot),
            };
            out.push(p);
        }
        out
    })
}

fn sites(polys: &[Polygon<f64>]) -> Vec<SitePolygon<f64>> {
    polys
        .iter()
        .enumerate()
        .map(|(i, p)| SitePolygon::new(SiteId::new(format!("s{i:02}")), p.clone()))
        .collect()
}

proptest! {
    #[test]
    fn index_matches_all_pairs(polys in corpus()) {
        let s = sites(&polys);
        let opts = OverlapOptions::default();
        let idx = build_site_index(&s).unwrap();
        let fast = classify_relations(&idx, &s, 0.95, &opts).unwrap();
        let slow = classify_relations_brute_force(&s, 0.95, &opts);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn output_ignores_input_order(polys in corpus(), seed in any::<u64>()) {
        let s = sites(&polys);
        let mut shuffled = s.clone();
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let opts = OverlapOptions::default();
        let a = classify_relations(&build_site_index(&s).unwrap(), &s, 0.95, &opts).unwrap();
        let b = classify_relations(&build_site_index(&shuffled).unwrap(), &shuffled, 0.95, &opts).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn records_come_in_mirrored_pairs(polys in corpus()) {
        let s = sites(&polys);
        let out = classify_relations(&build_site_index(&s).unwrap(), &s, 0.95, &OverlapOptions::default()).unwrap();
        for r in &out.records {
            let m = out
                .records
                .iter()
                .find(|o| o.site_a == r.site_b && o.site_b == r.site_a)
                .expect("mirror record");
            prop_assert_eq!(m, &r.mirrored());
            if r.relation == Relation::Duplicate {
                prop_assert_eq!(m.relation, Relation::Duplicate);
            }
            prop_assert!(r.relation != Relation::Disjoint);
        }
    }
}
