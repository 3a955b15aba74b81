//! Vegetation indices, greenest months and site-versus-annulus series.

mod bands;
mod months;
mod series;

pub use bands::{compute_index, index_value, Band, BandStack, VegIndex, SAVI_L};
pub use months::{continent_months, top_green_months, Continent};
pub use series::{
    cloud_fraction, cloud_fraction_screen, median_composite, monthly_ndvi_means, zone_index_series, MonthChoice,
    VegOptions, VegOutcome, Zone, ZoneIndexSeries, DEFAULT_REFERENCE_YEAR, MAX_CLOUD_FRACTION, VEG_PERIODS,
};
