//! Finite-resolution certificates that a sampled distance set fills an
//! interval (scalar samples) or a box (vector samples).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::distance::sets::{pinned_from_model, sq_dist, DistanceSampleSet, DistanceValues, ProductModel, Provenance};
use crate::error::{Error, Result};
use crate::fractal::{FractalSpec, SampleLimit, POINT_TOL};
use crate::geometry::{BoxRegion, Point};

/// Number of densest coarse cells tried as candidate boxes.
const CANDIDATES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CoverageRegion {
    Interval { lo: f64, hi: f64 },
    Box { region: BoxRegion },
}

impl CoverageRegion {
    /// Shortest edge of the region.
    pub fn extent(&self) -> f64 {
        match self {
            Self::Interval { lo, hi } => hi - lo,
            Self::Box { region } => region
                .lo
                .iter()
                .zip(region.hi.iter())
                .map(|(l, h)| h - l)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageCertificate {
    pub region: CoverageRegion,
    pub resolution: f64,
    pub min_extent: f64,
    pub covered: bool,
    /// Scalar samples: largest gap between consecutive samples inside the
    /// region. Vector samples: longest run of empty grid cells along an axis
    /// times the cell edge (0 when every cell is occupied).
    pub max_gap_found: f64,
    pub sample_count: usize,
    pub candidate_rule: String,
    pub source: Provenance,
    /// Pins whose covered intervals were intersected, if more than one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<Point>,
}

/// Maximal runs `[lo, hi]` of sorted `values` whose consecutive gaps are at
/// most `resolution`.
pub fn covered_runs(values: &[f64], resolution: f64) -> Vec<(f64, f64)> {
    let mut runs = Vec::new();
    let Some(&first) = values.first() else {
        return runs;
    };
    let mut start = first;
    for w in values.windows(2) {
        if w[1] - w[0] > resolution {
            runs.push((start, w[0]));
            start = w[1];
        }
    }
    runs.push((start, *values.last().expect("non-empty")));
    runs
}

fn longest(runs: &[(f64, f64)]) -> Option<(f64, f64)> {
    // First of the longest, so ties resolve to the leftmost run.
    runs.iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, r| match best {
            Some(b) if b.1 - b.0 >= r.1 - r.0 => Some(b),
            _ => Some(r),
        })
}

/// Largest gap between consecutive samples lying in `[lo, hi]`.
fn max_gap_within(values: &[f64], lo: f64, hi: f64) -> f64 {
    let start = values.partition_point(|v| *v < lo);
    let end = values.partition_point(|v| *v <= hi);
    values[start..end]
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

fn check_resolution(resolution: f64, min_extent: f64) -> Result<()> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
    }
    if !(min_extent >= 0.0) || !min_extent.is_finite() {
        return Err(Error::InvalidParameter(format!("min_extent must be non-negative, got {min_extent}")));
    }
    Ok(())
}

pub fn certify_coverage(samples: &DistanceSampleSet, resolution: f64, min_extent: f64) -> Result<CoverageCertificate> {
    check_resolution(resolution, min_extent)?;
    if samples.values.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (region, max_gap_found, covered, rule) = match &samples.values {
        DistanceValues::Scalar { values } => {
            let (lo, hi) = longest(&covered_runs(values, resolution)).expect("non-empty");
            let gap = max_gap_within(values, lo, hi);
            (CoverageRegion::Interval { lo, hi }, gap, hi - lo >= min_extent, "longest run of gaps <= resolution")
        }
        DistanceValues::Vector { dim, values } => {
            let (region, gap) = certify_boxes(*dim, values, resolution, min_extent)?;
            (
                CoverageRegion::Box { region },
                gap,
                gap == 0.0,
                "densest coarse cells of edge min_extent, fine grid of edge <= resolution",
            )
        }
    };
    Ok(CoverageCertificate {
        region,
        resolution,
        min_extent,
        covered,
        max_gap_found,
        sample_count: samples.values.len(),
        candidate_rule: rule.into(),
        source: samples.source.clone(),
        pins: Vec::new(),
    })
}

/// Best candidate box and its empty-run measure (0 means fully occupied).
fn certify_boxes(dim: usize, values: &[Vec<f64>], resolution: f64, min_extent: f64) -> Result<(BoxRegion, f64)> {
    if dim == 0 {
        return Err(Error::InvalidParameter("vector samples of dimension 0".into()));
    }
    let mut lo = vec![f64::INFINITY; dim];
    for v in values {
        for (l, x) in lo.iter_mut().zip(v) {
            *l = l.min(*x);
        }
    }
    let edge = if min_extent > 0.0 { min_extent } else { resolution };
    let coarse_key = |v: &[f64]| -> Vec<i64> {
        v.iter().zip(&lo).map(|(x, l)| ((x - l) / edge).floor() as i64).collect()
    };
    let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
    for v in values {
        *counts.entry(coarse_key(v)).or_default() += 1;
    }
    let mut ranked: Vec<(Vec<i64>, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let fine = (edge / resolution).ceil().max(1.0) as usize;
    let cell = edge / fine as f64;
    let mut best: Option<(BoxRegion, f64)> = None;
    for (key, _) in ranked.into_iter().take(CANDIDATES) {
        let corner: Vec<f64> = key.iter().zip(&lo).map(|(k, l)| l + *k as f64 * edge).collect();
        let upper: Vec<f64> = corner.iter().map(|c| c + edge).collect();
        let region = BoxRegion::from_raw(corner, upper);
        let gap = empty_run(&region, values, fine, cell);
        let better = best.as_ref().is_none_or(|(_, g)| gap < *g);
        if better {
            best = Some((region, gap));
        }
        if gap == 0.0 {
            break;
        }
    }
    Ok(best.expect("at least one occupied cell"))
}

/// Longest axis-parallel run of empty fine cells in `region`, times `cell`.
fn empty_run(region: &BoxRegion, values: &[Vec<f64>], fine: usize, cell: f64) -> f64 {
    let dim = region.dim();
    let total = fine.checked_pow(dim as u32).expect("fine grid fits in memory");
    let mut occupied = vec![false; total];
    for v in values {
        if !region.contains_point(v, 0.0) {
            continue;
        }
        let mut flat = 0usize;
        for k in 0..dim {
            let i = (((v[k] - region.lo[k]) / cell).floor() as usize).min(fine - 1);
            flat = flat * fine + i;
        }
        occupied[flat] = true;
    }
    if occupied.iter().all(|o| *o) {
        return 0.0;
    }
    let mut longest_run = 0usize;
    for axis in 0..dim {
        let stride = fine.pow((dim - 1 - axis) as u32);
        for start in 0..total {
            if !(start / stride).is_multiple_of(fine) {
                continue;
            }
            let mut run = 0;
            for step in 0..fine {
                if occupied[start + step * stride] {
                    run = 0;
                } else {
                    run += 1;
                    longest_run = longest_run.max(run);
                }
            }
        }
    }
    longest_run as f64 * cell
}

/// Covered intervals common to several pins near `pin`: pins are exact
/// product points within `radius` of `pin` (closest first), `count` of them
/// spread evenly over that list; each pin's pinned set is reduced to its
/// runs and the runs are intersected across pins.
#[allow(clippy::too_many_arguments)]
pub fn pinned_intersection_over_neighborhood(
    spec1: &FractalSpec,
    spec2: &FractalSpec,
    pin: &Point,
    radius: f64,
    count: usize,
    resolution: f64,
    min_extent: f64,
    limit: SampleLimit,
) -> Result<CoverageCertificate> {
    check_resolution(resolution, min_extent)?;
    if !(radius >= 0.0) || count == 0 {
        return Err(Error::InvalidParameter("radius must be >= 0 and count >= 1".into()));
    }
    let model = ProductModel::build(spec1, spec2)?;
    let (p1, p2) = model.split(pin)?;
    let r2 = (radius + POINT_TOL).powi(2);
    let da: Vec<f64> = model.a.exact_points.iter().map(|a| sq_dist(a, &p1)).collect();
    let db: Vec<f64> = model.b.exact_points.iter().map(|b| sq_dist(b, &p2)).collect();
    let mut near: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in da.iter().enumerate().filter(|(_, x)| **x <= r2) {
        for (j, y) in db.iter().enumerate() {
            if x + y <= r2 {
                near.push((x + y, i, j));
            }
        }
    }
    if near.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no exact product point within {radius} of the pin"
        )));
    }
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let m = count.min(near.len());
    let pins: Vec<Point> = (0..m)
        .map(|k| {
            let at = if m == 1 { 0 } else { k * (near.len() - 1) / (m - 1) };
            model.point(near[at].1, near[at].2)
        })
        .collect();

    let mut common: Option<Vec<(f64, f64)>> = None;
    let mut sets = Vec::with_capacity(m);
    for p in &pins {
        let set = pinned_from_model(&model, spec1, spec2, p, limit)?;
        let values = set.scalars().expect("pinned sets are scalar");
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        let runs = covered_runs(values, resolution);
        common = Some(match common {
            None => runs,
            Some(prev) => intersect_runs(&prev, &runs),
        });
        sets.push(set);
    }
    let common = common.expect("at least one pin");
    let (lo, hi) = longest(&common).unwrap_or((f64::NAN, f64::NAN));
    let (max_gap_found, covered) = if lo.is_nan() {
        (f64::INFINITY, false)
    } else {
        let gap = sets
            .iter()
            .map(|s| max_gap_within(s.scalars().expect("scalar"), lo, hi))
            .fold(0.0, f64::max);
        (gap, hi - lo >= min_extent)
    };
    let mut source = sets[0].source.clone();
    source.pin = pin.clone();
    source.pin_exact = model.locate(pin)?.is_some();
    Ok(CoverageCertificate {
        region: CoverageRegion::Interval { lo, hi },
        resolution,
        min_extent,
        covered,
        max_gap_found,
        sample_count: sets.iter().map(|s| s.values.len()).sum(),
        candidate_rule: "longest interval common to every pin's covered runs".into(),
        source,
        pins,
    })
}

/// Pairwise intersections of two sorted, disjoint interval lists.
fn intersect_runs(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}
