//! Reading and writing single-band grids.
//!
//! Two formats are supported: GeoTIFF (`.tif`, `.tiff`) with the model pixel
//! scale / tiepoint tags and the GDAL nodata tag, and a plain-text grid in the
//! ESRI ASCII layout:
//!
//! ```text
//! ncols 4
//! nrows 3
//! xllcorner 10.0
//! yllcorner 20.0
//! cellsize 0.25        (or: dx 0.25 / dy 0.125)
//! nodata_value -9999   (optional)
//! <nrows lines of ncols values, northernmost row first>
//! ```
//!
//! `xllcenter`/`yllcenter` are accepted in place of the corner keys.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use geo::Coord;
use tiff::decoder::{Decoder, DecodingResult, Limits};
use tiff::encoder::{colortype::Gray64Float, TiffEncoder};
use tiff::tags::Tag;

use super::grid::{GridLayer, GridSpec, Semantics};
use crate::error::{Error, Result};
use crate::Scalar;

/// Reads a grid, choosing the format from the file extension.
pub fn read_grid<T: Scalar>(path: &Path, semantics: Semantics) -> Result<GridLayer<T>> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "tif" || e == "tiff" => read_geotiff(path, semantics),
        _ => read_ascii_grid(path, semantics),
    }
}

pub fn read_ascii_grid<T: Scalar>(path: &Path, semantics: Semantics) -> Result<GridLayer<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ascii_grid(&text, semantics).map_err(|m| Error::parse(path, m))
}

pub fn parse_ascii_grid<T: Scalar>(text: &str, semantics: Semantics) -> std::result::Result<GridLayer<T>, String> {
    let mut tokens = text.split_ascii_whitespace().peekable();
    let mut header = std::collections::BTreeMap::new();
    while let Some(&tok) = tokens.peek() {
        if tok.parse::<f64>().is_ok() {
            break;
        }
        let key = tok.to_ascii_lowercase();
        tokens.next();
        let val = tokens
            .next()
            .ok_or_else(|| format!("header key `{key}` without value"))?
            .parse::<f64>()
            .map_err(|e| format!("header `{key}`: {e}"))?;
        header.insert(key, val);
    }
    let get = |k: &str| header.get(k).copied();
    let ncols = get("ncols").ok_or("missing ncols")?;
    let nrows = get("nrows").ok_or("missing nrows")?;
    if ncols < 1.0 || nrows < 1.0 || ncols.fract() != 0.0 || nrows.fract() != 0.0 {
        return Err(format!("invalid grid size {ncols} x {nrows}"));
    }
    let (w, h) = (ncols as usize, nrows as usize);
    let (dx, dy) = match (get("cellsize"), get("dx"), get("dy")) {
        (Some(c), _, _) => (c, c),
        (None, Some(dx), Some(dy)) => (dx, dy),
        _ => return Err("missing cellsize (or dx and dy)".into()),
    };
    let xll = match (get("xllcorner"), get("xllcenter")) {
        (Some(x), _) => x,
        (None, Some(x)) => x - dx / 2.0,
        _ => return Err("missing xllcorner".into()),
    };
    let yll = match (get("yllcorner"), get("yllcenter")) {
        (Some(y), _) => y,
        (None, Some(y)) => y - dy / 2.0,
        _ => return Err("missing yllcorner".into()),
    };
    let nodata = get("nodata_value");
    let mut values = Vec::with_capacity(w * h);
    for tok in tokens {
        let v: f64 = tok.parse().map_err(|e| format!("value `{tok}`: {e}"))?;
        values.push(T::lit(v));
    }
    if values.len() != w * h {
        return Err(format!("expected {} values, found {}", w * h, values.len()));
    }
    let spec = GridSpec::new(
        Coord {
            x: T::lit(xll),
            y: T::lit(yll + h as f64 * dy),
        },
        T::lit(dx),
        T::lit(dy),
        w,
        h,
    )
    .map_err(|e| e.to_string())?;
    GridLayer::new(spec, nodata.map(T::lit), values, semantics).map_err(|e| e.to_string())
}

pub fn write_ascii_grid<T: Scalar>(path: &Path, layer: &GridLayer<T>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let s = &layer.spec;
    let ext = s.extent();
    let mut out = format!("ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\n", s.width, s.height, ext.min().x, ext.min().y);
    if s.pixel_width == s.pixel_height {
        out.push_str(&format!("cellsize {}\n", s.pixel_width));
    } else {
        out.push_str(&format!("dx {}\ndy {}\n", s.pixel_width, s.pixel_height));
    }
    if let Some(nd) = layer.nodata {
        out.push_str(&format!("nodata_value {nd}\n"));
    }
    for row in layer.values.chunks(s.width.max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    w.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn decoded_to_f64(d: DecodingResult) -> Vec<f64> {
    match d {
        DecodingResult::U8(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::U16(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::U32(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::U64(v) => v.into_iter().map(|x| x as f64).collect(),
        DecodingResult::F16(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::F32(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::F64(v) => v,
        DecodingResult::I8(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::I16(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::I32(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::I64(v) => v.into_iter().map(|x| x as f64).collect(),
    }
}

pub fn read_geotiff<T: Scalar>(path: &Path, semantics: Semantics) -> Result<GridLayer<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let perr = |e: tiff::TiffError| Error::parse(path, e.to_string());
    let mut dec = Decoder::new(BufReader::new(f)).map_err(perr)?.with_limits(Limits::unlimited());
    match dec.colortype().map_err(perr)? {
        tiff::ColorType::Gray(_) => {}
        other => return Err(Error::parse(path, format!("expected a single-band image, found {other:?}"))),
    }
    let (w, h) = dec.dimensions().map_err(perr)?;
    let scale = dec.get_tag_f64_vec(Tag::ModelPixelScaleTag).map_err(perr)?;
    let tie = dec.get_tag_f64_vec(Tag::ModelTiepointTag).map_err(perr)?;
    if scale.len() < 2 || tie.len() < 6 {
        return Err(Error::parse(path, "malformed georeferencing tags"));
    }
    let nodata = match dec.find_tag(Tag::GdalNodata).map_err(perr)? {
        Some(v) => {
            let s = v.into_string().map_err(perr)?;
            let s = s.trim_matches(|c: char| c == '\0' || c.is_whitespace());
            Some(s.parse::<f64>().map_err(|e| Error::parse(path, format!("nodata `{s}`: {e}")))?)
        }
        None => None,
    };
    let values = decoded_to_f64(dec.read_image().map_err(perr)?);
    let (sx, sy) = (scale[0], scale[1]);
    let origin = Coord {
        x: T::lit(tie[3] - tie[0] * sx),
        y: T::lit(tie[4] + tie[1] * sy),
    };
    let spec = GridSpec::new(origin, T::lit(sx), T::lit(sy), w as usize, h as usize)?;
    GridLayer::new(spec, nodata.map(T::lit), values.into_iter().map(T::lit).collect(), semantics)
}

/// Writes a 64-bit float GeoTIFF in WGS84.
pub fn write_geotiff<T: Scalar>(path: &Path, layer: &GridLayer<T>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let perr = |e: tiff::TiffError| Error::parse(path, e.to_string());
    let mut enc = TiffEncoder::new(BufWriter::new(f)).map_err(perr)?;
    let s = &layer.spec;
    let mut img = enc
        .new_image::<Gray64Float>(s.width as u32, s.height as u32)
        .map_err(perr)?;
    let d = img.encoder();
    d.write_tag(Tag::ModelPixelScaleTag, &[s.pixel_width.as_f64(), s.pixel_height.as_f64(), 0.0][..])
        .map_err(perr)?;
    d.write_tag(
        Tag::ModelTiepointTag,
        &[0.0, 0.0, 0.0, s.origin.x.as_f64(), s.origin.y.as_f64(), 0.0][..],
    )
    .map_err(perr)?;
    // Geographic model, pixel-is-area, EPSG:4326.
    d.write_tag(
        Tag::GeoKeyDirectoryTag,
        &[1u16, 1, 0, 3, 1024, 0, 1, 2, 1025, 0, 1, 1, 2048, 0, 1, 4326][..],
    )
    .map_err(perr)?;
    if let Some(nd) = layer.nodata {
        d.write_tag(Tag::GdalNodata, nd.to_string().as_str()).map_err(perr)?;
    }
    let data: Vec<f64> = layer.values.iter().map(|v| v.as_f64()).collect();
    img.write_data(&data).map_err(perr)
}
