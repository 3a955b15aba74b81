//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Geometry, zonal statistics, band math and the validation estimators are all
//! written against [`Scalar`], which is implemented for `f32` and `f64`. The
//! pipeline and file formats use `f64` through the aliases in the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use geo::algorithm::buffer::{BufferStyle, LineJoin};
use geo::{BooleanOps, Buffer, GeoFloat, MultiLineString, MultiPolygon, Polygon};
use num_traits::{FromPrimitive, ToPrimitive};
use rstar::RTreeNum;

/// Floating point type usable throughout the engine.
///
/// Boolean overlay and buffering are exposed as associated functions rather
/// than through geo's overlay bound, whose float trait shadows the `Float`
/// method names (`min`, `sin`, ...) in every generic body.
pub trait Scalar:
    GeoFloat
    + RTreeNum
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this type.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("constant representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn intersection(a: &MultiPolygon<Self>, b: &MultiPolygon<Self>) -> MultiPolygon<Self>;

    fn union(a: &MultiPolygon<Self>, b: &MultiPolygon<Self>) -> MultiPolygon<Self>;

    /// Outward offset with round joins, each arc step at most `join_step` rad.
    fn offset_polygon(p: &Polygon<Self>, distance: Self, join_step: Self) -> MultiPolygon<Self>;

    /// Round-capped buffer around line work.
    fn buffer_lines(lines: &MultiLineString<Self>, distance: Self, join_step: Self) -> MultiPolygon<Self>;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn intersection(a: &MultiPolygon<Self>, b: &MultiPolygon<Self>) -> MultiPolygon<Self> {
                BooleanOps::intersection(a, b)
            }

            fn union(a: &MultiPolygon<Self>, b: &MultiPolygon<Self>) -> MultiPolygon<Self> {
                BooleanOps::union(a, b)
            }

            fn offset_polygon(p: &Polygon<Self>, distance: Self, join_step: Self) -> MultiPolygon<Self> {
                p.buffer_with_style(BufferStyle::new(distance).line_join(LineJoin::Round(join_step)))
            }

            fn buffer_lines(lines: &MultiLineString<Self>, distance: Self, join_step: Self) -> MultiPolygon<Self> {
                lines.buffer_with_style(BufferStyle::new(distance).line_join(LineJoin::Round(join_step)))
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
