//! Points, axis-aligned boxes, proper rotations and box-shaped convex hulls.
//!
//! Every set the crate builds is the image of a subset of `[0,1]^d` under a
//! similarity, so boxes (possibly carried by a rotation) are the only convex
//! bodies needed.

use std::ops::Deref;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tolerance for pure linear algebra (orthogonality, determinants, sidedness).
pub const LINALG_TOL: f64 = 1e-12;
/// Tolerance for quantities that pass through a square root.
pub const SQRT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn splat(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean distance; panics on dimension mismatch.
    pub fn dist(&self, other: &Point) -> f64 {
        euclid(&self.0, &other.0)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// Concatenation `(self, other)`, used for points of a product set.
    pub fn concat(&self, other: &Point) -> Point {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Point(v)
    }

    /// Splits a point of `R^{2d}` into its two `R^d` blocks.
    pub fn split_half(&self) -> Result<(Point, Point)> {
        if !self.dim().is_multiple_of(2) || self.dim() == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected an even-dimensional point, got dimension {}",
                self.dim()
            )));
        }
        let d = self.dim() / 2;
        Ok((Point(self.0[..d].to_vec()), Point(self.0[d..].to_vec())))
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[inline]
pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Closed axis-aligned hyperrectangle `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Point,
    pub hi: Point,
}

impl BoxRegion {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        check_dim(lo.dim(), hi.dim())?;
        if lo.iter().chain(hi.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite box corner".into()));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter(format!(
                "box corners out of order: lo={:?} hi={:?}",
                lo.0, hi.0
            )));
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn from_raw(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
        Self {
            lo: Point(lo),
            hi: Point(hi),
        }
    }

    pub fn unit(dim: usize) -> Self {
        Self::from_raw(vec![0.0; dim], vec![1.0; dim])
    }

    /// The cube `lo + [0, side]^d`.
    pub fn cube(lo: &[f64], side: f64) -> Self {
        Self::from_raw(lo.to_vec(), lo.iter().map(|l| l + side).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn diameter(&self) -> f64 {
        euclid(&self.lo, &self.hi)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(self.hi.iter()).map(|(l, h)| h - l).product()
    }

    pub fn center(&self) -> Point {
        Point(
            self.lo
                .iter()
                .zip(self.hi.iter())
                .map(|(l, h)| 0.5 * (l + h))
                .collect(),
        )
    }

    pub fn contains_point(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)
    }

    /// Strict containment in the open box, with `tol` of clearance.
    pub fn strictly_contains_point(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(x, (l, h))| *x > l + tol && *x < h - tol)
    }

    pub fn contains_box(&self, other: &BoxRegion, tol: f64) -> bool {
        self.contains_point(&other.lo, tol) && self.contains_point(&other.hi, tol)
    }

    /// Closed boxes share at least one point.
    pub fn intersects(&self, other: &BoxRegion) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }

    /// Open interiors overlap by more than `tol` along every axis.
    pub fn interiors_overlap(&self, other: &BoxRegion, tol: f64) -> bool {
        (0..self.dim()).all(|i| self.hi[i].min(other.hi[i]) - self.lo[i].max(other.lo[i]) > tol)
    }

    pub fn intersection(&self, other: &BoxRegion) -> Option<BoxRegion> {
        if !self.intersects(other) {
            return None;
        }
        let lo = (0..self.dim()).map(|i| self.lo[i].max(other.lo[i])).collect();
        let hi = (0..self.dim()).map(|i| self.hi[i].min(other.hi[i])).collect();
        Some(BoxRegion::from_raw(lo, hi))
    }

    pub fn expand(&self, r: f64) -> BoxRegion {
        BoxRegion::from_raw(
            self.lo.iter().map(|l| l - r).collect(),
            self.hi.iter().map(|h| h + r).collect(),
        )
    }

    pub fn translate(&self, v: &[f64]) -> BoxRegion {
        BoxRegion::from_raw(
            self.lo.iter().zip(v).map(|(l, t)| l + t).collect(),
            self.hi.iter().zip(v).map(|(h, t)| h + t).collect(),
        )
    }

    /// Image under `x -> s x` with `s > 0`.
    pub fn scale(&self, s: f64) -> BoxRegion {
        BoxRegion::from_raw(
            self.lo.iter().map(|l| l * s).collect(),
            self.hi.iter().map(|h| h * s).collect(),
        )
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                Point(
                    (0..d)
                        .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                        .collect(),
                )
            })
            .collect()
    }

    /// Distance between closed boxes without the dimension check.
    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &BoxRegion) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            let gap = (other.lo[i] - self.hi[i]).max(self.lo[i] - other.hi[i]);
            if gap > 0.0 {
                acc += gap * gap;
            }
        }
        acc.sqrt()
    }

    /// Distance from the box to the complement of `hull`'s interior, i.e. to
    /// the unbounded gap when `hull` is the convex hull of the set.
    pub(crate) fn distance_to_outside(&self, hull: &BoxRegion) -> f64 {
        (0..self.dim())
            .map(|i| (self.lo[i] - hull.lo[i]).min(hull.hi[i] - self.hi[i]))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }
}

/// Euclidean distance between two closed boxes (0 iff they intersect).
pub fn box_distance(a: &BoxRegion, b: &BoxRegion) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.distance_unchecked(b))
}

pub fn box_diameter(a: &BoxRegion) -> f64 {
    a.diameter()
}

pub fn is_rotation(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let gram = m.transpose() * m;
    let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    (gram - id).amax() < tol && (m.determinant() - 1.0).abs() < tol
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

pub(crate) fn mat_t_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols())
        .map(|c| (0..m.nrows()).map(|r| m[(r, c)] * v[r]).sum())
        .collect()
}

fn householder(n: &[f64]) -> DMatrix<f64> {
    let d = n.len();
    DMatrix::from_fn(d, d, |r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        delta - 2.0 * n[r] * n[c]
    })
}

/// A proper rotation `R` with `R v = (|v| / sqrt(d)) (1, ..., 1)`.
///
/// Built from two Householder reflections: one sends `v/|v|` to the unit
/// diagonal, the second (with normal `(e_1 - e_2)/sqrt 2`, orthogonal to the
/// diagonal) restores `det R = +1`. In one dimension every point already lies
/// on the diagonal and `SO(1)` is trivial, so the identity is returned.
pub fn rotation_to_diagonal(v: &Point) -> Result<DMatrix<f64>> {
    let d = v.dim();
    if d == 0 {
        return Err(Error::InvalidParameter("empty vector".into()));
    }
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    if d == 1 {
        return Ok(DMatrix::identity(1, 1));
    }
    let w = 1.0 / (d as f64).sqrt();
    let diff: Vec<f64> = v.iter().map(|x| x / norm - w).collect();
    let diff_norm = euclid(&diff, &vec![0.0; d]);
    if diff_norm < 1e-15 {
        return Ok(DMatrix::identity(d, d));
    }
    let n: Vec<f64> = diff.iter().map(|x| x / diff_norm).collect();
    let mut m = vec![0.0; d];
    m[0] = std::f64::consts::FRAC_1_SQRT_2;
    m[1] = -std::f64::consts::FRAC_1_SQRT_2;
    Ok(householder(&m) * householder(&n))
}

mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err("rotation must be a square matrix".into());
        }
        Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<DMatrix<f64>>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_rows).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<DMatrix<f64>>, D::Error> {
            match Option::<Vec<Vec<f64>>>::deserialize(d)? {
                Some(rows) => from_rows(&rows).map(Some).map_err(D::Error::custom),
                None => Ok(None),
            }
        }
    }
}

/// Isometry `S(x) = R (x + t)` with `R` in `SO(d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(with = "matrix_rows")]
    pub rotation: DMatrix<f64>,
    pub translation: Point,
}

impl AffineMap {
    pub fn new(rotation: DMatrix<f64>, translation: Point) -> Result<Self> {
        let map = Self {
            rotation,
            translation,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            rotation: DMatrix::identity(dim, dim),
            translation: Point::zeros(dim),
        }
    }

    pub fn translation(t: Point) -> Self {
        Self {
            rotation: DMatrix::identity(t.dim(), t.dim()),
            translation: t,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.rotation.nrows(), self.translation.dim())?;
        if !is_rotation(&self.rotation, LINALG_TOL) {
            return Err(Error::InvalidParameter(
                "affine map rotation is not in SO(d)".into(),
            ));
        }
        Ok(())
    }

    pub fn is_pure_translation(&self) -> bool {
        let d = self.dim();
        (self.rotation.clone() - DMatrix::<f64>::identity(d, d)).amax() == 0.0
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        let shifted: Vec<f64> = x.iter().zip(self.translation.iter()).map(|(a, t)| a + t).collect();
        Point(mat_vec(&self.rotation, &shifted))
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Point {
        let back = mat_t_vec(&self.rotation, y);
        Point(back.iter().zip(self.translation.iter()).map(|(a, t)| a - t).collect())
    }
}

/// Maps for which `S_1(pin_1) = 0`, `S_2(pin_2) = 0` and `S_k(u_k)` lies on
/// the diagonal, where `pin = (pin_1, pin_2)` in `R^{2d}`.
pub fn normalize_pair(pin: &Point, u1: &Point, u2: &Point) -> Result<(AffineMap, AffineMap)> {
    let (p1, p2) = pin.split_half()?;
    check_dim(p1.dim(), u1.dim())?;
    check_dim(p2.dim(), u2.dim())?;
    let build = |p: &Point, u: &Point, which: usize| -> Result<AffineMap> {
        let shift = p.scale(-1.0);
        let v = u.add(&shift);
        let rotation = rotation_to_diagonal(&v).map_err(|e| match e {
            Error::ZeroVector => Error::Degenerate(format!(
                "u{which} coincides with pin block {which}"
            )),
            other => other,
        })?;
        Ok(AffineMap {
            rotation,
            translation: shift,
        })
    };
    Ok((build(&p1, u1, 1)?, build(&p2, u2, 2)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullKind {
    AxisBox,
    RotatedBox,
}

/// Convex hull of a set, stored as a box `carrier` in a local frame; the
/// world-space hull is `rotation * carrier` (identity when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexHullProxy {
    pub kind: HullKind,
    pub carrier: BoxRegion,
    #[serde(with = "matrix_rows::option", default)]
    pub rotation: Option<DMatrix<f64>>,
}

impl ConvexHullProxy {
    pub fn axis(carrier: BoxRegion) -> Self {
        Self {
            kind: HullKind::AxisBox,
            carrier,
            rotation: None,
        }
    }

    pub fn rotated(carrier: BoxRegion, rotation: DMatrix<f64>) -> Self {
        Self {
            kind: HullKind::RotatedBox,
            carrier,
            rotation: Some(rotation),
        }
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn volume(&self) -> f64 {
        self.carrier.volume()
    }

    pub fn has_interior(&self) -> bool {
        self.carrier
            .lo
            .iter()
            .zip(self.carrier.hi.iter())
            .all(|(l, h)| h - l > LINALG_TOL)
    }

    pub fn to_local(&self, p: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(r) => mat_t_vec(r, p),
            None => p.to_vec(),
        }
    }

    pub fn to_world(&self, p: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(r) => mat_vec(r, p),
            None => p.to_vec(),
        }
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.carrier
            .corners()
            .into_iter()
            .map(|c| Point(self.to_world(&c)))
            .collect()
    }

    pub fn contains_world(&self, p: &[f64], tol: f64) -> bool {
        self.carrier.contains_point(&self.to_local(p), tol)
    }

    /// Unit face normals in world coordinates.
    fn face_normals(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|i| match &self.rotation {
                Some(r) => r.column(i).iter().copied().collect(),
                None => {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                }
            })
            .collect()
    }

    pub(crate) fn same_frame(&self, other: &ConvexHullProxy) -> bool {
        match (&self.rotation, &other.rotation) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).amax() < LINALG_TOL,
            (Some(a), None) | (None, Some(a)) => {
                (a - DMatrix::<f64>::identity(a.nrows(), a.ncols())).amax() < LINALG_TOL
            }
        }
    }
}

fn project(vertices: &[Point], axis: &[f64]) -> (f64, f64) {
    vertices
        .iter()
        .map(|v| v.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Separating-axis test for overlap of the open interiors. Exact for boxes
/// in up to three dimensions.
fn interiors_overlap_sat(h1: &ConvexHullProxy, h2: &ConvexHullProxy, tol: f64) -> Result<bool> {
    let d = h1.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!(
            "overlap of differently rotated boxes in dimension {d}"
        )));
    }
    let n1 = h1.face_normals();
    let n2 = h2.face_normals();
    let mut axes: Vec<Vec<f64>> = n1.iter().chain(n2.iter()).cloned().collect();
    if d == 3 {
        for a in &n1 {
            for b in &n2 {
                let c = cross3(a, b);
                let len = euclid(&c, &[0.0; 3]);
                if len > 1e-9 {
                    axes.push(c.iter().map(|x| x / len).collect());
                }
            }
        }
    }
    let v1 = h1.vertices();
    let v2 = h2.vertices();
    Ok(axes.iter().all(|axis| {
        let (lo1, hi1) = project(&v1, axis);
        let (lo2, hi2) = project(&v2, axis);
        hi1.min(hi2) - lo1.max(lo2) > tol
    }))
}

/// Whether the open interiors of two hulls meet.
pub fn hull_interiors_overlap(h1: &ConvexHullProxy, h2: &ConvexHullProxy) -> Result<bool> {
    check_dim(h1.dim(), h2.dim())?;
    if h1.same_frame(h2) {
        Ok(h1.carrier.interiors_overlap(&h2.carrier, LINALG_TOL))
    } else {
        interiors_overlap_sat(h1, h2, LINALG_TOL)
    }
}

/// Sufficient witness that two convex hulls are linked: their open
/// interiors meet and each has a vertex strictly outside the other's closure.
pub fn hulls_linked(h1: &ConvexHullProxy, h2: &ConvexHullProxy) -> Result<bool> {
    check_dim(h1.dim(), h2.dim())?;
    if !h1.has_interior() || !h2.has_interior() {
        return Err(Error::Degenerate("convex hull has empty interior".into()));
    }
    let tol = LINALG_TOL;
    if !hull_interiors_overlap(h1, h2)? {
        return Ok(false);
    }
    let escapes = |a: &ConvexHullProxy, b: &ConvexHullProxy| {
        a.vertices().iter().any(|v| !b.contains_world(v, tol))
    };
    Ok(escapes(h1, h2) && escapes(h2, h1))
}
