//! Greenest-month selection.

use serde::{Deserialize, Serialize};

use crate::error::{Evaluated, NotEvaluable};
use crate::Scalar;

/// Months (1-based, ascending) of the three largest means. Ties go to the
/// earlier month; missing months are skipped.
pub fn top_green_months<T: Scalar>(monthly_means: &[Option<T>; 12]) -> Evaluated<[u32; 3]> {
    let mut valid: Vec<(u32, T)> = monthly_means
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.filter(|x| x.is_finite()).map(|x| (i as u32 + 1, x)))
        .collect();
    if valid.len() < 3 {
        return Err(NotEvaluable::TooFewMonths);
    }
    valid.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    let mut top = [valid[0].0, valid[1].0, valid[2].0];
    top.sort_unstable();
    Ok(top)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continent {
    Africa,
    Asia,
    Europe,
    SouthAmerica,
    NorthAmerica,
    Oceania,
}

/// Fixed greenest-month lists for the continents that have one.
pub fn continent_months(c: Continent) -> Option<[u32; 3]> {
    match c {
        Continent::Africa => Some([1, 4, 5]),
        Continent::Asia => Some([6, 7, 8]),
        Continent::Europe => Some([4, 5, 6]),
        Continent::SouthAmerica => Some([2, 3, 10]),
        Continent::NorthAmerica | Continent::Oceania => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: [f64; 12]) -> [Option<f64>; 12] {
        v.map(Some)
    }

    #[test]
    fn summer_peak() {
        let s = series([0.1, 0.1, 0.2, 0.3, 0.4, 0.7, 0.8, 0.75, 0.5, 0.3, 0.2, 0.1]);
        assert_eq!(top_green_months(&s), Ok([6, 7, 8]));
    }

    #[test]
    fn african_pattern() {
        let s = series([0.7, 0.3, 0.4, 0.65, 0.6, 0.2, 0.2, 0.2, 0.3, 0.3, 0.4, 0.5]);
        assert_eq!(top_green_months(&s), Ok([1, 4, 5]));
    }

    #[test]
    fn ties_prefer_earlier_month() {
        let s = series([0.1, 0.1, 0.5, 0.1, 0.1, 0.1, 0.9, 0.1, 0.1, 0.1, 0.5, 0.5]);
        assert_eq!(top_green_months(&s), Ok([3, 7, 11]));
    }

    #[test]
    fn too_few_months() {
        let mut s = [None; 12];
        assert_eq!(top_green_months::<f64>(&s), Err(NotEvaluable::TooFewMonths));
        s[0] = Some(0.2);
        s[5] = Some(0.3);
        assert_eq!(top_green_months(&s), Err(NotEvaluable::TooFewMonths));
        s[6] = Some(0.1);
        assert_eq!(top_green_months(&s), Ok([1, 6, 7]));
    }

    #[test]
    fn continent_tables() {
        assert_eq!(continent_months(Continent::Africa), Some([1, 4, 5]));
        assert_eq!(continent_months(Continent::SouthAmerica), Some([2, 3, 10]));
        assert_eq!(continent_months(Continent::Oceania), None);
    }
}
