//! Two-period, two-group difference-in-differences by least squares.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow<T: Scalar> {
    pub unit_id: String,
    /// 1 = treated (site), 0 = control (annulus).
    pub g: u8,
    /// 1 = post, 0 = pre.
    pub t: u8,
    pub y: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient<T: Scalar> {
    pub estimate: T,
    pub se: T,
    pub t_stat: Option<T>,
    pub p_value: Option<f64>,
    pub stars: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DidResult<T: Scalar> {
    pub beta0: Coefficient<T>,
    pub beta_g: Coefficient<T>,
    pub beta_t: Coefficient<T>,
    pub beta_gt: Coefficient<T>,
    pub r2: T,
    pub adj_r2: T,
    pub n_obs: usize,
    pub df_resid: usize,
    /// `None` when the residual sum of squares is zero.
    pub f_stat: Option<T>,
    pub f_p_value: Option<f64>,
    pub residual_se: T,
}

impl<T: Scalar> DidResult<T> {
    pub fn coefficients(&self) -> [(&'static str, &Coefficient<T>); 4] {
        [
            ("const", &self.beta0),
            ("g", &self.beta_g),
            ("t", &self.beta_t),
            ("g_t", &self.beta_gt),
        ]
    }
}

/// Significance stars at the 0.1 / 0.05 / 0.01 levels.
pub fn stars(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.01 => "***",
        Some(p) if p < 0.05 => "**",
        Some(p) if p < 0.1 => "*",
        _ => "",
    }
}

const CELL_NAMES: [[&str; 2]; 2] = [["control-pre", "control-post"], ["treated-pre", "treated-post"]];

/// Checks that every unit has exactly one row in each of the four cells and
/// that responses are finite.
pub fn check_balanced<T: Scalar>(rows: &[PanelRow<T>]) -> Result<()> {
    let mut cells: BTreeMap<&str, [[u32; 2]; 2]> = BTreeMap::new();
    for r in rows {
        if r.g > 1 || r.t > 1 {
            return Err(Error::InvalidInput(format!("unit {}: g and t must be 0 or 1", r.unit_id)));
        }
        if !r.y.is_finite() {
            return Err(Error::InvalidInput(format!("unit {}: non-finite response", r.unit_id)));
        }
        cells.entry(&r.unit_id).or_default()[r.g as usize][r.t as usize] += 1;
    }
    for (unit, c) in cells {
        for g in 0..2 {
            for t in 0..2 {
                if c[g][t] != 1 {
                    return Err(Error::DegeneratePanel(format!(
                        "unit {unit} has {} rows in cell {}",
                        c[g][t], CELL_NAMES[g][t]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Householder QR of an n x 4 column-major matrix, applied in place to `y`.
/// Returns the upper-triangular factor.
fn householder_qr<T: Scalar>(cols: &mut [Vec<T>; 4], y: &mut [T]) -> Result<[[T; 4]; 4]> {
    let mut r = [[T::zero(); 4]; 4];
    for k in 0..4 {
        let norm = cols[k][k..].iter().fold(T::zero(), |acc, &v| acc.hypot(v));
        if norm == T::zero() {
            return Err(Error::DegeneratePanel(format!("design column {k} is linearly dependent")));
        }
        let alpha = if cols[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = cols[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        let two = T::lit(2.0);
        let reflect = |col: &mut [T]| {
            let dot = v.iter().zip(col.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            let s = two * dot / vnorm2;
            for (c, &vi) in col.iter_mut().zip(&v) {
                *c = *c - s * vi;
            }
        };
        for col in cols.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut y[k..]);
        for (j, col) in cols.iter().enumerate().skip(k) {
            r[k][j] = col[k];
        }
    }
    Ok(r)
}

fn back_substitute<T: Scalar>(r: &[[T; 4]; 4], b: &[T]) -> [T; 4] {
    let mut x = [T::zero(); 4];
    for i in (0..4).rev() {
        let mut s = b[i];
        for j in i + 1..4 {
            s = s - r[i][j] * x[j];
        }
        x[i] = s / r[i][i];
    }
    x
}

fn upper_inverse<T: Scalar>(r: &[[T; 4]; 4]) -> [[T; 4]; 4] {
    let mut inv = [[T::zero(); 4]; 4];
    for col in 0..4 {
        let mut e = [T::zero(); 4];
        e[col] = T::one();
        let x = back_substitute(r, &e);
        for row in 0..4 {
            inv[row][col] = x[row];
        }
    }
    inv
}

/// OLS of `y` on `[1, g, t, g·t]` with classical standard errors.
///
/// Rows are put in a canonical order first, so the fit does not depend on
/// the order they are supplied in. Every unit must be balanced over the
/// four cells.
pub fn did_fit<T: Scalar>(rows: &[PanelRow<T>]) -> Result<DidResult<T>> {
    for (g, t) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        if !rows.iter().any(|r| r.g == g && r.t == t) {
            return Err(Error::DegeneratePanel(format!("cell {} is empty", CELL_NAMES[g as usize][t as usize])));
        }
    }
    check_balanced(rows)?;
    let n = rows.len();
    let p = 4usize;
    if n <= p {
        return Err(Error::InsufficientData(format!("{n} observations leave no residual degrees of freedom")));
    }
    let mut sorted: Vec<&PanelRow<T>> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.unit_id, a.g, a.t)
            .cmp(&(&b.unit_id, b.g, b.t))
            .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
    });

    let mut cols: [Vec<T>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut y: Vec<T> = Vec::with_capacity(n);
    for r in &sorted {
        let g = T::from_count(r.g as usize);
        let t = T::from_count(r.t as usize);
        cols[0].push(T::one());
        cols[1].push(g);
        cols[2].push(t);
        cols[3].push(g * t);
        y.push(r.y);
    }
    let y_orig = y.clone();
    let r = householder_qr(&mut cols, &mut y)?;
    let beta = back_substitute(&r, &y[..4]);

    let nn = T::from_count(n);
    // Residual energy at rounding level is treated as an exact fit.
    let scale = y_orig.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let noise_floor = (T::epsilon() * scale).powi(2) * nn * T::lit(64.0);
    let rss = y[4..].iter().fold(T::zero(), |acc, &e| acc + e * e);
    let rss = if rss <= noise_floor { T::zero() } else { rss };
    let pivot = y_orig[0];
    let mean = pivot + y_orig.iter().fold(T::zero(), |acc, &v| acc + (v - pivot)) / nn;
    let tss = y_orig.iter().fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
    let tss = if tss <= noise_floor { T::zero() } else { tss };
    let df = n - p;
    let dft = T::from_count(df);
    let sigma2 = rss / dft;
    let (r2, adj_r2) = if tss > T::zero() {
        let r2 = (T::one() - rss / tss).max(T::zero());
        let adj = T::one() - (T::one() - r2) * (nn - T::one()) / dft;
        (r2, adj)
    } else {
        (T::zero(), T::zero())
    };
    let (f_stat, f_p_value) = if rss > T::zero() && tss > T::zero() {
        let f = ((tss - rss).max(T::zero()) / T::lit(3.0)) / sigma2;
        let pv = FisherSnedecor::new(3.0, df as f64).ok().map(|d| d.sf(f.as_f64()));
        (Some(f), pv)
    } else {
        (None, None)
    };

    let rinv = upper_inverse(&r);
    let tdist = StudentsT::new(0.0, 1.0, df as f64).ok();
    let coef = |j: usize| {
        let var = (0..4).fold(T::zero(), |acc, k| acc + rinv[j][k] * rinv[j][k]) * sigma2;
        let se = var.max(T::zero()).sqrt();
        let t_stat = (se > T::zero()).then(|| beta[j] / se);
        let p_value = match (t_stat, &tdist) {
            (Some(t), Some(d)) => Some(2.0 * d.sf(t.as_f64().abs())),
            _ => None,
        };
        Coefficient {
            estimate: beta[j],
            se,
            t_stat,
            p_value,
            stars: stars(p_value),
        }
    };
    Ok(DidResult {
        beta0: coef(0),
        beta_g: coef(1),
        beta_t: coef(2),
        beta_gt: coef(3),
        r2,
        adj_r2,
        n_obs: n,
        df_resid: df,
        f_stat,
        f_p_value,
        residual_se: sigma2.sqrt(),
    })
}

#[derive(Debug, Deserialize)]
struct PanelCsvRow {
    unit_id: String,
    g: u8,
    t: u8,
    y: f64,
}

/// Reads a panel from CSV with columns `unit_id,g,t,y`.
pub fn read_panel_csv(path: &Path) -> Result<Vec<PanelRow<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<PanelCsvRow>() {
        let r = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        rows.push(PanelRow {
            unit_id: r.unit_id,
            g: r.g,
            t: r.t,
            y: r.y,
        });
    }
    Ok(rows)
}
