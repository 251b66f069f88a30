//! Browser bindings: a carpet preview, a pinned distance histogram with its
//! covered interval, and an epsilon-thickness curve. Every call returns JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use thickset::distance::coverage::{certify_coverage, CoverageRegion};
use thickset::distance::sets::pinned_distance_set;
use thickset::fractal::{build_approx, enumerate_gaps, hausdorff_dimension, FractalKind, FractalSpec, SampleLimit};
use thickset::geometry::{BoxRegion, Point};
use thickset::thickness::{epsilon_thickness, thickness};

/// Work caps that keep the page responsive.
const MAX_PREVIEW_CELLS: usize = 200_000;
const MAX_PAIRS: usize = 4_000_000;

#[derive(Serialize)]
struct Preview {
    dim: usize,
    depth: u32,
    cells: Vec<BoxRegion>,
    gaps: Vec<BoxRegion>,
    tau: Option<f64>,
    dimension: Option<f64>,
}

#[derive(Serialize)]
struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    samples: usize,
    tau_product: f64,
    covered: bool,
    interval: [f64; 2],
    resolution: f64,
}

#[derive(Serialize)]
struct CurvePoint {
    epsilon: f64,
    tau: Option<f64>,
}

#[derive(Serialize)]
struct Curve {
    tau: Option<f64>,
    points: Vec<CurvePoint>,
}

fn carpet_spec(family: &str, n: u32, depth: u32) -> Result<FractalSpec, String> {
    let kind = match family {
        "A" | "a" => FractalKind::CarpetA { n, d: 2 },
        "B" | "b" => FractalKind::CarpetB { n, d: 2 },
        other => return Err(format!("unknown carpet family {other:?}")),
    };
    let spec = FractalSpec::new(kind, depth);
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Cells, gaps, thickness and dimension of a planar carpet.
pub fn carpet_preview_json(family: &str, n: u32, depth: u32) -> Result<String, String> {
    let spec = carpet_spec(family, n, depth)?;
    let cap = MAX_PREVIEW_CELLS;
    let approx = thickset::fractal::build_approx_with_cap(&spec, cap).map_err(|e| e.to_string())?;
    let catalog = enumerate_gaps(&spec).map_err(|e| e.to_string())?;
    let tau = if depth == 0 { None } else { thickness(&catalog).ok().and_then(|r| r.value) };
    let preview = Preview {
        dim: approx.dim,
        depth,
        cells: approx.boxes,
        gaps: catalog.regions(),
        tau,
        dimension: hausdorff_dimension(&spec).ok().and_then(finite),
    };
    serde_json::to_string(&preview).map_err(|e| e.to_string())
}

/// Histogram of the distances from `(px, py)` to `C(r1) x C(r2)` and the
/// longest covered interval at twice the product cell diameter.
pub fn pinned_histogram_json(r1: f64, r2: f64, depth: u32, px: f64, py: f64, bins: usize) -> Result<String, String> {
    if bins == 0 || bins > 10_000 {
        return Err("bins must lie in 1..=10000".into());
    }
    let s1 = FractalSpec::cantor(r1, depth);
    let s2 = FractalSpec::cantor(r2, depth);
    let limit = SampleLimit { cap: MAX_PAIRS, subsample: true };
    let set = pinned_distance_set(&s1, &s2, &Point(vec![px, py]), limit).map_err(|e| e.to_string())?;
    let values = set.scalars().ok_or("expected scalar distances")?;
    let (Some(&lo), Some(&hi)) = (values.first(), values.last()) else {
        return Err("no nonzero distances".into());
    };
    let width = (hi - lo).max(f64::MIN_POSITIVE) / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let cell = |s: &FractalSpec| build_approx(s).map(|a| a.cell_diameter).map_err(|e| e.to_string());
    let resolution = 2.0 * cell(&s1)?.hypot(cell(&s2)?);
    let cert = certify_coverage(&set, resolution, 0.0).map_err(|e| e.to_string())?;
    let CoverageRegion::Interval { lo: a, hi: b } = cert.region else {
        return Err("expected an interval certificate".into());
    };
    let tau = |r: f64| r / (1.0 - 2.0 * r);
    let hist = Histogram {
        lo,
        hi,
        counts,
        samples: values.len(),
        tau_product: tau(r1) * tau(r2),
        covered: b > a,
        interval: [a, b],
        resolution,
    };
    serde_json::to_string(&hist).map_err(|e| e.to_string())
}

/// `tau_eps` of a planar carpet at `steps` values of epsilon spread
/// geometrically over `[0.005, 0.9]`.
pub fn epsilon_curve_json(family: &str, n: u32, depth: u32, steps: usize) -> Result<String, String> {
    if !(2..=200).contains(&steps) {
        return Err("steps must lie in 2..=200".into());
    }
    let spec = carpet_spec(family, n, depth.max(1))?;
    let catalog = enumerate_gaps(&spec).map_err(|e| e.to_string())?;
    let (first, last) = (0.005f64, 0.9f64);
    let points = (0..steps)
        .map(|k| {
            let epsilon = first * (last / first).powf(k as f64 / (steps - 1) as f64);
            let tau = epsilon_thickness(&catalog, epsilon).map_err(|e| e.to_string())?.value;
            Ok(CurvePoint { epsilon, tau })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let tau = thickness(&catalog).map_err(|e| e.to_string())?.value;
    serde_json::to_string(&Curve { tau, points }).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn carpet_preview(family: &str, n: u32, depth: u32) -> Result<String, JsError> {
    carpet_preview_json(family, n, depth).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pinned_histogram(r1: f64, r2: f64, depth: u32, px: f64, py: f64, bins: usize) -> Result<String, JsError> {
    pinned_histogram_json(r1, r2, depth, px, py, bins).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn epsilon_curve(family: &str, n: u32, depth: u32, steps: usize) -> Result<String, JsError> {
    epsilon_curve_json(family, n, depth, steps).map_err(|e| JsError::new(&e))
}
