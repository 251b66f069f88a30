//! Pinned distance sets of products `C1 x C2`, membership through `g_{x,t}`,
//! coordinate-distinct pins and diagonal steps from right endpoints.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::distance::map::DistanceMapParams;
use crate::distance::tree::TreeGraph;
use crate::error::{check_dim, Error, Result};
use crate::fractal::{build_approx, enumerate_gaps, seed_from, FractalSpec, SampleLimit, SetApprox, POINT_TOL};
use crate::geometry::{BoxRegion, Point, LINALG_TOL};
use crate::index::{bounding_box, GridIndex};

/// Distances at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DistanceValues {
    Scalar { values: Vec<f64> },
    Vector { dim: usize, values: Vec<Vec<f64>> },
}

impl DistanceValues {
    pub fn len(&self) -> usize {
        match self {
            Self::Scalar { values } => values.len(),
            Self::Vector { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subsampling {
    pub total: u128,
    pub kept: usize,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec1: FractalSpec,
    pub spec2: FractalSpec,
    pub pin: Point,
    /// Whether the pin is an exact point of the product model.
    pub pin_exact: bool,
    pub tree: Option<TreeGraph>,
    pub subsampling: Option<Subsampling>,
    pub spec_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSampleSet {
    pub values: DistanceValues,
    pub source: Provenance,
}

impl DistanceSampleSet {
    pub fn scalars(&self) -> Option<&[f64]> {
        match &self.values {
            DistanceValues::Scalar { values } => Some(values),
            DistanceValues::Vector { .. } => None,
        }
    }
}

/// Exact points of both factors, kept as separate blocks.
pub(crate) struct ProductModel {
    pub a: SetApprox,
    pub b: SetApprox,
}

impl ProductModel {
    pub(crate) fn build(spec1: &FractalSpec, spec2: &FractalSpec) -> Result<Self> {
        check_dim(spec1.dim()?, spec2.dim()?)?;
        Ok(Self {
            a: build_approx(spec1)?,
            b: build_approx(spec2)?,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.a.dim
    }

    pub(crate) fn size(&self) -> u128 {
        self.a.exact_points.len() as u128 * self.b.exact_points.len() as u128
    }

    /// Index `(i, j)` of `pin` among the product points.
    pub(crate) fn locate(&self, pin: &Point) -> Result<Option<(usize, usize)>> {
        let (p1, p2) = self.split(pin)?;
        Ok(self
            .a
            .find_exact(&p1, POINT_TOL)
            .zip(self.b.find_exact(&p2, POINT_TOL)))
    }

    pub(crate) fn split(&self, pin: &Point) -> Result<(Point, Point)> {
        check_dim(2 * self.dim(), pin.dim())?;
        pin.split_half()
    }

    pub(crate) fn point(&self, i: usize, j: usize) -> Point {
        self.a.exact_points[i].concat(&self.b.exact_points[j])
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance between product points `(a1, b1)` and `(a2, b2)`, evaluated
/// blockwise so every pipeline rounds identically.
#[inline]
pub(crate) fn product_distance(a1: &[f64], b1: &[f64], a2: &[f64], b2: &[f64]) -> f64 {
    (sq_dist(a1, a2) + sq_dist(b1, b2)).sqrt()
}

pub(crate) fn pair_seed(spec1: &FractalSpec, spec2: &FractalSpec, pin: &Point, extra: &str) -> (u64, String) {
    let key = serde_json::to_vec(&(spec1, spec2, pin, extra)).expect("inputs serialize");
    (seed_from(&key), crate::fractal::hex_digest(&key))
}

/// Sorted distances from `pin` to every exact product point, zero excluded.
pub fn pinned_distance_set(
    spec1: &FractalSpec,
    spec2: &FractalSpec,
    pin: &Point,
    limit: SampleLimit,
) -> Result<DistanceSampleSet> {
    let model = ProductModel::build(spec1, spec2)?;
    pinned_from_model(&model, spec1, spec2, pin, limit)
}

pub(crate) fn pinned_from_model(
    model: &ProductModel,
    spec1: &FractalSpec,
    spec2: &FractalSpec,
    pin: &Point,
    limit: SampleLimit,
) -> Result<DistanceSampleSet> {
    let (p1, p2) = model.split(pin)?;
    let pin_exact = model.locate(pin)?.is_some();
    let da: Vec<f64> = model.a.exact_points.iter().map(|a| sq_dist(a, &p1)).collect();
    let db: Vec<f64> = model.b.exact_points.iter().map(|b| sq_dist(b, &p2)).collect();
    let (seed, spec_hash) = pair_seed(spec1, spec2, pin, "pinned");
    let nb = db.len() as u128;
    let total = model.size();
    let selection = limit.select(total, seed)?;
    let mut values: Vec<f64> = match &selection {
        Some(idx) => idx
            .iter()
            .map(|&k| (da[(k / nb) as usize] + db[(k % nb) as usize]).sqrt())
            .filter(|v| *v > ZERO_TOL)
            .collect(),
        None => {
            let mut out = Vec::with_capacity(total as usize);
            for x in &da {
                out.extend(db.iter().map(|y| (x + y).sqrt()).filter(|v| *v > ZERO_TOL));
            }
            out
        }
    };
    values.sort_unstable_by(f64::total_cmp);
    Ok(DistanceSampleSet {
        values: DistanceValues::Scalar { values },
        source: Provenance {
            spec1: spec1.clone(),
            spec2: spec2.clone(),
            pin: pin.clone(),
            pin_exact,
            tree: None,
            subsampling: selection.map(|idx| Subsampling {
                total,
                kept: idx.len(),
                rule: "seeded stride".into(),
            }),
            spec_hash,
        },
    })
}

/// Whether `t` is a distance from `x` to the product, detected through
/// `g_{x,t}`: some exact point `q` of the first set has `g(q)` inside the
/// second set's cells (up to `tol`) and `|(q, g(q)) - x| = t`.
pub fn membership_via_g(spec1: &FractalSpec, spec2: &FractalSpec, x: &Point, t: f64, tol: f64) -> Result<bool> {
    let model = ProductModel::build(spec1, spec2)?;
    membership_in_model(&model, x, t, tol)
}

pub(crate) fn membership_in_model(model: &ProductModel, x: &Point, t: f64, tol: f64) -> Result<bool> {
    let params = DistanceMapParams::new(x.clone(), t)?;
    check_dim(2 * model.dim(), x.dim())?;
    let boxes = &model.b.boxes;
    let Some(bounds) = bounding_box(boxes) else {
        return Ok(false);
    };
    let hint = model.b.cell_diameter.max(tol);
    let mut index = GridIndex::new(&bounds, hint);
    for (k, b) in boxes.iter().enumerate() {
        index.insert(k, b);
    }
    for q in &model.a.exact_points {
        let Ok(image) = params.apply(q) else {
            continue;
        };
        let local = model.b.to_local(&image);
        if !index.contains_point(boxes, &local, tol) {
            continue;
        }
        let direct = q.concat(&image).dist(x);
        if (direct - t).abs() <= 1e-9 * t.max(1.0) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exact product points with pairwise distinct coordinates, starting from
/// `seed_pin`, chosen greedily; deepens both models up to `max_extra_depth`
/// times when the current depth is too coarse.
pub fn generate_distinct_pins(
    spec1: &FractalSpec,
    spec2: &FractalSpec,
    seed_pin: &Point,
    count: usize,
    max_extra_depth: u32,
) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let model = ProductModel::build(spec1, spec2)?;
    if model.locate(seed_pin)?.is_none() {
        return Err(Error::InvalidParameter(
            "seed pin is not an exact point of the product model".into(),
        ));
    }
    if count == 1 {
        return Ok(vec![seed_pin.clone()]);
    }
    let (p1, p2) = model.split(seed_pin)?;
    let mut blocked = String::new();
    for extra in 0..=max_extra_depth {
        let s1 = spec1.with_depth(spec1.depth + extra);
        let s2 = spec2.with_depth(spec2.depth + extra);
        let model = ProductModel::build(&s1, &s2)?;
        let first = distinct_block(&model.a.exact_points, &p1, count);
        let second = distinct_block(&model.b.exact_points, &p2, count);
        match (first, second) {
            (Ok(a), Ok(b)) => return Ok(a.iter().zip(&b).map(|(x, y)| x.concat(y)).collect()),
            (Err(k), _) => blocked = format!("coordinate {k} of the first factor"),
            (_, Err(k)) => blocked = format!("coordinate {} of the second factor", k + model.dim()),
        }
    }
    Err(Error::Exhausted(format!(
        "no {count} coordinate-distinct pins after {max_extra_depth} extra levels; blocked on {blocked}"
    )))
}

/// `count` points (the seed first) whose coordinates are pairwise distinct
/// in every slot; on failure returns the slot that ran out.
fn distinct_block(points: &[Point], seed: &Point, count: usize) -> std::result::Result<Vec<Point>, usize> {
    let dim = seed.dim();
    let key = |v: f64| (v + 0.0).to_bits();
    let mut used: Vec<HashSet<u64>> = (0..dim).map(|k| HashSet::from([key(seed[k])])).collect();
    let mut out = vec![seed.clone()];
    for p in points {
        if out.len() == count {
            break;
        }
        if (0..dim).all(|k| !used[k].contains(&key(p[k]))) {
            (0..dim).for_each(|k| {
                used[k].insert(key(p[k]));
            });
            out.push(p.clone());
        }
    }
    if out.len() == count {
        return Ok(out);
    }
    // Report the slot with the fewest distinct values available.
    let slot = (0..dim)
        .min_by_key(|&k| points.iter().map(|p| key(p[k])).collect::<HashSet<_>>().len())
        .unwrap_or(0);
    Err(slot)
}

/// Whether `u` (hull frame) is a right endpoint of a bounded gap or of the
/// unbounded gap: `u` is on the gap's boundary and `u + (e, ..., e)` leaves
/// the gap for all small `e > 0`.
pub fn is_right_endpoint(hull: &BoxRegion, gaps: &[BoxRegion], u: &[f64]) -> bool {
    let tol = LINALG_TOL;
    let of_bounded = gaps.iter().any(|g| {
        g.contains_point(u, tol) && (0..u.len()).any(|i| u[i] >= g.hi[i] - tol)
    });
    let of_unbounded = (0..u.len()).all(|i| u[i] >= hull.lo[i] - tol && u[i] < hull.hi[i] - tol)
        && (0..u.len()).any(|i| (u[i] - hull.lo[i]).abs() <= tol);
    of_bounded || of_unbounded
}

/// Smallest diagonal step `delta = s (1, ..., 1)`, `s > 0`, `|delta| < eta`,
/// with `u + delta` an exact point of the model. Deepens the model up to
/// `max_extra_depth` times.
pub fn diagonal_delta_search(spec: &FractalSpec, u: &Point, eta: f64, max_extra_depth: u32) -> Result<Point> {
    check_dim(spec.dim()?, u.dim())?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let catalog = enumerate_gaps(spec)?;
    let local = catalog.hull.to_local(u);
    if !is_right_endpoint(&catalog.hull.carrier, &catalog.regions(), &local) {
        return Err(Error::InvalidParameter(
            "u is not a right endpoint of a gap of the set".into(),
        ));
    }
    let d = u.dim();
    let root_d = (d as f64).sqrt();
    for extra in 0..=max_extra_depth {
        let approx = build_approx(&spec.with_depth(spec.depth + extra))?;
        let best = approx
            .exact_points
            .iter()
            .filter_map(|p| {
                let s = p[0] - u[0];
                let on_ray = s > POINT_TOL && (0..d).all(|k| (p[k] - u[k] - s).abs() <= POINT_TOL);
                (on_ray && s * root_d < eta).then_some(s)
            })
            .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |v| v.min(s))));
        if let Some(s) = best {
            return Ok(Point::splat(d, s));
        }
    }
    Err(Error::Exhausted(format!(
        "no exact point on the diagonal ray within eta = {eta} up to depth {}; increase depth or eta",
        spec.depth + max_extra_depth
    )))
}
