//! Pixel-centre zone masks and zonal statistics.

use geo::{Coord, MultiPolygon, Polygon};

use super::grid::{GridLayer, GridSpec};
use crate::error::{Evaluated, NotEvaluable};
use crate::Scalar;

/// Row-major indices of the pixels whose centres fall inside a zone.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZoneMask {
    indices: Vec<usize>,
}

impl ZoneMask {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn rings<T: Scalar>(zone: &MultiPolygon<T>) -> Vec<&[Coord<T>]> {
    zone.0
        .iter()
        .flat_map(|p| std::iter::once(p.exterior()).chain(p.interiors()))
        .map(|r| r.0.as_slice())
        .filter(|r| r.len() >= 3)
        .collect()
}

fn clamp_index<T: Scalar>(f: T, n: usize) -> usize {
    if !(f > T::zero()) {
        0
    } else {
        f.to_usize().unwrap_or(n).min(n)
    }
}

/// Pixels whose centre lies inside `zone` under the even-odd rule over all
/// rings. Membership agrees exactly with [`crate::geometry::planar::ring_contains`]
/// applied per pixel.
pub fn zone_mask<T: Scalar>(spec: &GridSpec<T>, zone: &MultiPolygon<T>) -> Evaluated<ZoneMask> {
    let rings = rings(zone);
    let mut coords = rings.iter().flat_map(|r| r.iter());
    let Some(first) = coords.next() else {
        return Err(NotEvaluable::InvalidGeometry);
    };
    let (mut min, mut max) = (*first, *first);
    for c in coords {
        min.x = min.x.min(c.x);
        min.y = min.y.min(c.y);
        max.x = max.x.max(c.x);
        max.y = max.y.max(c.y);
    }
    let ext = spec.extent();
    if max.x < ext.min().x || min.x > ext.max().x || max.y < ext.min().y || min.y > ext.max().y {
        return Err(NotEvaluable::OutsideExtent);
    }

    // Candidate ranges are widened by one pixel; the crossing test decides.
    let half = T::lit(0.5);
    let one = T::one();
    let r0 = clamp_index((spec.origin.y - max.y) / spec.pixel_height - half - one, spec.height);
    let r1 = clamp_index((spec.origin.y - min.y) / spec.pixel_height + one, spec.height);
    let c0 = clamp_index((min.x - spec.origin.x) / spec.pixel_width - half - one, spec.width);
    let c1 = clamp_index((max.x - spec.origin.x) / spec.pixel_width + one, spec.width);

    let mut indices = Vec::new();
    let mut xs: Vec<T> = Vec::new();
    for row in r0..r1 {
        let y = spec.center_y(row);
        xs.clear();
        for ring in &rings {
            let n = ring.len();
            let mut j = n - 1;
            for i in 0..n {
                let (vi, vj) = (ring[i], ring[j]);
                if (vi.y > y) != (vj.y > y) {
                    xs.push((vj.x - vi.x) * (y - vi.y) / (vj.y - vi.y) + vi.x);
                }
                j = i;
            }
        }
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        for col in c0..c1 {
            let x = spec.center_x(col);
            let above = xs.len() - xs.partition_point(|&xi| xi <= x);
            if above % 2 == 1 {
                indices.push(row * spec.width + col);
            }
        }
    }
    if indices.is_empty() {
        return Err(NotEvaluable::NoValidPixels);
    }
    Ok(ZoneMask { indices })
}

pub fn polygon_mask<T: Scalar>(spec: &GridSpec<T>, zone: &Polygon<T>) -> Evaluated<ZoneMask> {
    zone_mask(spec, &MultiPolygon(vec![zone.clone()]))
}

/// Share of valid zone pixels whose value is one of `classes`.
pub fn class_fraction<T: Scalar>(layer: &GridLayer<T>, mask: &ZoneMask, classes: &[T]) -> Evaluated<T> {
    let (mut hit, mut valid) = (0usize, 0usize);
    for &i in mask.indices() {
        let v = layer.values[i];
        if layer.is_valid(v) {
            valid += 1;
            if classes.contains(&v) {
                hit += 1;
            }
        }
    }
    if valid == 0 {
        return Err(NotEvaluable::NoValidPixels);
    }
    Ok(T::from_count(hit) / T::from_count(valid))
}

/// Share of valid zone pixels satisfying `pred`, plus the valid count.
pub fn fraction_where<T: Scalar>(
    layer: &GridLayer<T>,
    mask: &ZoneMask,
    pred: impl Fn(T) -> bool,
) -> Evaluated<(T, usize)> {
    let (mut hit, mut valid) = (0usize, 0usize);
    for &i in mask.indices() {
        let v = layer.values[i];
        if layer.is_valid(v) {
            valid += 1;
            if pred(v) {
                hit += 1;
            }
        }
    }
    if valid == 0 {
        return Err(NotEvaluable::NoValidPixels);
    }
    Ok((T::from_count(hit) / T::from_count(valid), valid))
}

/// Mean of the valid zone pixels, summed in row-major order.
pub fn zonal_mean<T: Scalar>(layer: &GridLayer<T>, mask: &ZoneMask) -> Evaluated<(T, usize)> {
    let (mut sum, mut n) = (T::zero(), 0usize);
    for &i in mask.indices() {
        let v = layer.values[i];
        if layer.is_valid(v) {
            sum = sum + v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(NotEvaluable::NoValidPixels);
    }
    Ok((sum / T::from_count(n), n))
}
