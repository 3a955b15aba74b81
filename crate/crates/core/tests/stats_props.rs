use proptest::prelude::*;

use ldis_core::stats::{bootstrap_mean_ci, did_fit, synthetic_control_series, ControlPoint, PanelRow};

fn panel() -> impl Strategy<Value = Vec<PanelRow<f64>>> {
    prop::collection::vec(prop::array::uniform4(-2.0..2.0f64), 2..20).prop_map(|units| {
        units
            .iter()
            .enumerate()
            .flat_map(|(u, ys)| {
                (0..4).map(move |k| PanelRow {
                    unit_id: format!("u{u}"),
                    g: (k / 2) as u8,
                    t: (k % 2) as u8,
                    y: ys[k],
                })
            })
            .collect()
    })
}

fn controls() -> impl Strategy<Value = Vec<ControlPoint<f64>>> {
    prop::collection::vec((0.0..1.0f64, prop::collection::vec(-1.0..1.0f64, 3)), 1..40).prop_map(|v| {
        v.into_iter()
            .map(|(ndvi_at_planting, series)| ControlPoint { ndvi_at_planting, series })
            .collect()
    })
}

proptest! {
    #[test]
    fn did_ignores_row_order(rows in panel(), seed in any::<u64>()) {
        let mut shuffled = rows.clone();
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let (a, b) = (did_fit(&rows).unwrap(), did_fit(&shuffled).unwrap());
        for ((_, x), (_, y)) in a.coefficients().iter().zip(b.coefficients().iter()) {
            prop_assert!((x.estimate - y.estimate).abs() < 1e-12);
            prop_assert!((x.se - y.se).abs() < 1e-12);
        }
        prop_assert!((a.r2 - b.r2).abs() < 1e-12);
    }

    #[test]
    fn constant_outcome_has_zero_r2(units in 2usize..20, c in -5.0..5.0f64) {
        let rows: Vec<PanelRow<f64>> = (0..units)
            .flat_map(|u| (0..4).map(move |k| PanelRow { unit_id: format!("u{u}"), g: k / 2, t: k % 2, y: c }))
            .collect();
        let fit = did_fit(&rows).unwrap();
        prop_assert_eq!(fit.r2, 0.0);
        prop_assert!(fit.f_stat.is_none());
        prop_assert!((fit.beta0.estimate - c).abs() < 1e-12);
    }

    #[test]
    fn wider_level_gives_wider_interval(
        sample in prop::collection::vec(-10.0..10.0f64, 2..200),
        seed in any::<u64>(),
        lo in 0.5..0.9f64,
        gap in 0.01..0.09f64,
    ) {
        let narrow = bootstrap_mean_ci(&sample, lo, 300, seed).unwrap();
        let wide = bootstrap_mean_ci(&sample, lo + gap, 300, seed).unwrap();
        prop_assert!(wide.0 <= narrow.0 && narrow.1 <= wide.1);
        prop_assert!(narrow.0 <= narrow.1);
    }

    #[test]
    fn synthetic_series_ignores_control_order_and_duplication(
        ctl in controls(),
        sites in prop::collection::vec(0.0..1.0f64, 1..30),
        buckets in 1usize..12,
    ) {
        let Ok(base) = synthetic_control_series(&ctl, &sites, buckets) else {
            return Ok(());
        };
        let reversed: Vec<ControlPoint<f64>> = ctl.iter().rev().cloned().collect();
        let doubled: Vec<ControlPoint<f64>> = ctl.iter().chain(&ctl).cloned().collect();
        for other in [reversed, doubled] {
            let s = synthetic_control_series(&other, &sites, buckets).unwrap();
            prop_assert_eq!(s.values.len(), base.values.len());
            for (a, b) in s.values.iter().zip(&base.values) {
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
            prop_assert_eq!(&s.weights, &base.weights);
        }
    }
}
