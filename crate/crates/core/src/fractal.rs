//! Finite-depth models of self-similar sets: cylinder cells, exact attractor
//! points (cell corners) and catalogs of bounded gaps.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{
    is_rotation, mat_t_vec, mat_vec, AffineMap, BoxRegion, ConvexHullProxy, Point,
};

pub const DEFAULT_MAX_CELLS: usize = 10_000_000;
pub const MAX_CELLS_ENV: &str = "THICKSET_MAX_CELLS";

/// Cell cap, overridable through `THICKSET_MAX_CELLS`.
pub fn max_cells() -> usize {
    std::env::var(MAX_CELLS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_CELLS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FractalKind {
    /// Symmetric Cantor set of `[0,1]` with maps `x -> rx`, `x -> rx + 1 - r`.
    #[serde(rename = "cantor1D", alias = "cantor1d")]
    Cantor1D { ratio: f64 },
    /// `[0,1]` minus the listed disjoint open intervals.
    CantorGaps { gaps: Vec<[f64; 2]> },
    /// Carpet with only the central subcube removed at every level.
    CarpetA { n: u32, d: u32 },
    /// Carpet keeping only the boundary layer of subcubes at every level.
    CarpetB { n: u32, d: u32 },
    AffineImage { base: Box<FractalKind>, map: AffineMap },
    /// Image under `x -> scale * x + offset`.
    Similar {
        base: Box<FractalKind>,
        scale: f64,
        offset: Vec<f64>,
    },
    /// Base set placed in the coordinate subspace `R^d x {0}` of `R^ambient_dim`.
    #[serde(rename_all = "camelCase")]
    Embedded {
        base: Box<FractalKind>,
        ambient_dim: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalSpec {
    #[serde(flatten)]
    pub kind: FractalKind,
    #[serde(default)]
    pub depth: u32,
}

impl FractalSpec {
    pub fn new(kind: FractalKind, depth: u32) -> Self {
        Self { kind, depth }
    }

    pub fn cantor(ratio: f64, depth: u32) -> Self {
        Self::new(FractalKind::Cantor1D { ratio }, depth)
    }

    pub fn cantor_gaps(gaps: Vec<[f64; 2]>) -> Self {
        Self::new(FractalKind::CantorGaps { gaps }, 0)
    }

    pub fn carpet_a(n: u32, d: u32, depth: u32) -> Self {
        Self::new(FractalKind::CarpetA { n, d }, depth)
    }

    pub fn carpet_b(n: u32, d: u32, depth: u32) -> Self {
        Self::new(FractalKind::CarpetB { n, d }, depth)
    }

    pub fn with_depth(&self, depth: u32) -> Self {
        Self {
            kind: self.kind.clone(),
            depth,
        }
    }

    pub fn translated(&self, offset: Vec<f64>) -> Self {
        Self::new(
            FractalKind::Similar {
                base: Box::new(self.kind.clone()),
                scale: 1.0,
                offset,
            },
            self.depth,
        )
    }

    pub fn dim(&self) -> Result<usize> {
        self.kind.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash_hex(&self) -> String {
        hex_digest(&serde_json::to_vec(self).expect("spec serializes"))
    }

    /// Seed for deterministic subsampling, derived from the spec hash.
    pub fn seed(&self) -> u64 {
        seed_from(&serde_json::to_vec(self).expect("spec serializes"))
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub(crate) fn seed_from(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

impl FractalKind {
    pub fn dim(&self) -> Result<usize> {
        match self {
            Self::Cantor1D { .. } | Self::CantorGaps { .. } => Ok(1),
            Self::CarpetA { d, .. } | Self::CarpetB { d, .. } => Ok(*d as usize),
            Self::AffineImage { base, .. } | Self::Similar { base, .. } => base.dim(),
            Self::Embedded { ambient_dim, .. } => Ok(*ambient_dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Self::Cantor1D { ratio } => {
                if !(ratio.is_finite() && *ratio > 0.0 && *ratio < 0.5) {
                    return bad(format!("Cantor ratio must lie in (0, 1/2), got {ratio}"));
                }
            }
            Self::CantorGaps { gaps } => {
                let mut sorted = gaps.clone();
                sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
                for g in &sorted {
                    if !(g[0].is_finite() && g[1].is_finite() && 0.0 <= g[0] && g[0] < g[1] && g[1] <= 1.0)
                    {
                        return bad(format!("gap ({}, {}) is not an interval inside [0, 1]", g[0], g[1]));
                    }
                }
                for w in sorted.windows(2) {
                    if w[1][0] < w[0][1] {
                        return bad(format!(
                            "gaps ({}, {}) and ({}, {}) overlap",
                            w[0][0], w[0][1], w[1][0], w[1][1]
                        ));
                    }
                }
            }
            Self::CarpetA { n, d } => {
                if *n < 3 || n % 2 == 0 {
                    return bad(format!("carpetA needs odd n >= 3, got {n}"));
                }
                if *d == 0 {
                    return bad("dimension must be at least 1".into());
                }
            }
            Self::CarpetB { n, d } => {
                if *n < 5 || n % 2 == 0 {
                    return bad(format!("carpetB needs odd n >= 5, got {n}"));
                }
                if *d == 0 {
                    return bad("dimension must be at least 1".into());
                }
            }
            Self::AffineImage { base, map } => {
                base.validate()?;
                crate::error::check_dim(base.dim()?, map.dim())?;
                map.validate()?;
            }
            Self::Similar {
                base,
                scale,
                offset,
            } => {
                base.validate()?;
                crate::error::check_dim(base.dim()?, offset.len())?;
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
                if offset.iter().any(|o| !o.is_finite()) {
                    return bad("non-finite offset".into());
                }
            }
            Self::Embedded { base, ambient_dim } => {
                base.validate()?;
                if *ambient_dim < base.dim()? {
                    return bad(format!(
                        "ambient dimension {ambient_dim} is below the base dimension {}",
                        base.dim()?
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of IFS maps and the common contraction `1/n`, for the
    /// self-similar families.
    fn ifs_size(&self) -> Option<(f64, f64)> {
        match self {
            Self::Cantor1D { ratio } => Some((2.0, 1.0 / ratio)),
            Self::CarpetA { n, d } => {
                let n = *n as f64;
                Some((n.powi(*d as i32) - 1.0, n))
            }
            Self::CarpetB { n, d } => {
                let (n, d) = (*n as f64, *d as i32);
                Some((n.powi(d) - (n - 2.0).powi(d), n))
            }
            _ => None,
        }
    }
}

/// Closed-form Hausdorff dimension `log #D / log n` of the IFS families.
pub fn hausdorff_dimension(spec: &FractalSpec) -> Result<f64> {
    spec.validate()?;
    kind_dimension(&spec.kind)
}

fn kind_dimension(kind: &FractalKind) -> Result<f64> {
    match kind {
        FractalKind::CarpetA { n, d } => Ok(carpet_a_dimension(*n as u64, *d)),
        FractalKind::CarpetB { n, d } => Ok(carpet_b_dimension(*n as u64, *d)),
        FractalKind::AffineImage { base, .. }
        | FractalKind::Similar { base, .. }
        | FractalKind::Embedded { base, .. } => kind_dimension(base),
        FractalKind::CantorGaps { .. } => Err(Error::Unsupported(
            "Hausdorff dimension of an explicit gap list".into(),
        )),
        other => {
            let (maps, n) = other.ifs_size().expect("self-similar kind");
            Ok(maps.ln() / n.ln())
        }
    }
}

/// `log(n^d - 1) / log n`, stable for very large `n`.
pub fn carpet_a_dimension(n: u64, d: u32) -> f64 {
    let ln_n = (n as f64).ln();
    (d as f64 * ln_n + (-(-(d as f64) * ln_n).exp()).ln_1p()) / ln_n
}

/// `log(n^d - (n-2)^d) / log n`, stable for very large `n`.
pub fn carpet_b_dimension(n: u64, d: u32) -> f64 {
    let nf = n as f64;
    let ln_n = nf.ln();
    let shrink = (d as f64 * (-2.0 / nf).ln_1p()).exp_m1();
    (d as f64 * ln_n + (-shrink).ln()) / ln_n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteriorStatus {
    NonEmpty,
    Empty,
    Unknown,
}

/// Depth-k model of a set. `boxes` live in the hull frame: world
/// coordinates are `hull.rotation * box` (identity when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetApprox {
    pub dim: usize,
    pub depth: u32,
    pub boxes: Vec<BoxRegion>,
    /// Cell corners in world coordinates; each lies in the attractor.
    pub exact_points: Vec<Point>,
    pub hull: ConvexHullProxy,
    /// Largest cell diameter at this depth.
    pub cell_diameter: f64,
}

impl SetApprox {
    pub fn to_world(&self, p: &[f64]) -> Point {
        Point(self.hull.to_world(p))
    }

    pub fn to_local(&self, p: &[f64]) -> Vec<f64> {
        self.hull.to_local(p)
    }

    /// Whether a world point lies in the union of cells, up to `tol`.
    pub fn covers(&self, p: &[f64], tol: f64) -> bool {
        let q = self.to_local(p);
        self.boxes.iter().any(|b| b.contains_point(&q, tol))
    }

    /// Index of an exact point equal to `p` up to `tol`.
    pub fn find_exact(&self, p: &[f64], tol: f64) -> Option<usize> {
        self.exact_points
            .iter()
            .position(|q| q.iter().zip(p).all(|(a, b)| (a - b).abs() <= tol))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub region: BoxRegion,
    pub diameter: f64,
}

/// Bounded gaps sorted by non-increasing diameter (ties by centre, lexicographic).
/// The unbounded gap is the complement of `hull`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCatalog {
    pub dim: usize,
    pub depth: u32,
    pub gaps: Vec<Gap>,
    pub hull: ConvexHullProxy,
    pub interior: InteriorStatus,
}

impl GapCatalog {
    /// Catalog from explicit gap boxes in the hull frame; diameters are the
    /// box diameters and the list is sorted canonically.
    pub fn from_boxes(gaps: Vec<BoxRegion>, hull: ConvexHullProxy, interior: InteriorStatus) -> Result<Self> {
        let dim = hull.dim();
        for g in &gaps {
            crate::error::check_dim(dim, g.dim())?;
        }
        let gaps = gaps
            .into_iter()
            .map(|region| Gap {
                diameter: region.diameter(),
                region,
            })
            .collect();
        Ok(Self::sorted(dim, 0, gaps, hull, interior))
    }

    fn sorted(dim: usize, depth: u32, mut gaps: Vec<Gap>, hull: ConvexHullProxy, interior: InteriorStatus) -> Self {
        sort_gaps(&mut gaps);
        Self {
            dim,
            depth,
            gaps,
            hull,
            interior,
        }
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn regions(&self) -> Vec<BoxRegion> {
        self.gaps.iter().map(|g| g.region.clone()).collect()
    }

    /// Distance from gap `i` to the unbounded gap.
    pub fn distance_to_unbounded(&self, i: usize) -> f64 {
        self.gaps[i].region.distance_to_outside(&self.hull.carrier)
    }
}

pub(crate) fn sort_gaps(gaps: &mut [Gap]) {
    gaps.sort_by(|a, b| {
        b.diameter.total_cmp(&a.diameter).then_with(|| {
            let (ca, cb) = (a.region.center(), b.region.center());
            ca.iter()
                .zip(cb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

/// Which parts of the model to compute.
#[derive(Clone, Copy)]
struct Want {
    cells: bool,
    gaps: bool,
}

/// Model in a local frame; world = rotation * local.
struct Local {
    dim: usize,
    cells: Vec<BoxRegion>,
    corners: Vec<Vec<f64>>,
    gaps: Vec<Gap>,
    hull: BoxRegion,
    rotation: Option<DMatrix<f64>>,
    interior: InteriorStatus,
    cell_diameter: f64,
}

impl Local {
    fn map_boxes(&mut self, f: impl Fn(&BoxRegion) -> BoxRegion, diam_scale: f64) {
        for c in &mut self.cells {
            *c = f(c);
        }
        for g in &mut self.gaps {
            g.region = f(&g.region);
            g.diameter *= diam_scale;
        }
        self.hull = f(&self.hull);
        self.cell_diameter *= diam_scale;
    }
}

fn check_cap(cells: u128, cap: usize) -> Result<()> {
    if cells > cap as u128 {
        Err(Error::CellCapExceeded { cells, cap })
    } else {
        Ok(())
    }
}

fn cantor_local(ratio: f64, depth: u32, want: Want, cap: usize) -> Result<Local> {
    let needed = if want.cells { depth } else { depth.saturating_sub(1) };
    check_cap(1u128.checked_shl(needed).unwrap_or(u128::MAX), cap)?;
    // Intervals as (lo, len) pairs, refined level by level in address order.
    let mut cells: Vec<f64> = vec![0.0];
    let mut gaps = Vec::new();
    for level in 1..=depth {
        let parent_len = ratio.powi(level as i32 - 1);
        let child_len = ratio.powi(level as i32);
        let gap_diam = (1.0 - 2.0 * ratio) * parent_len;
        if want.gaps {
            for &lo in &cells {
                gaps.push(Gap {
                    region: BoxRegion::from_raw(vec![lo + child_len], vec![lo + (1.0 - ratio) * parent_len]),
                    diameter: gap_diam,
                });
            }
        }
        if level < depth || want.cells {
            cells = cells
                .iter()
                .flat_map(|&lo| [lo, lo + (1.0 - ratio) * parent_len])
                .collect();
        }
    }
    let len = ratio.powi(depth as i32);
    let (boxes, corners) = if want.cells {
        let boxes: Vec<BoxRegion> = cells.iter().map(|&lo| BoxRegion::from_raw(vec![lo], vec![lo + len])).collect();
        let corners = boxes.iter().flat_map(|b| [b.lo.0.clone(), b.hi.0.clone()]).collect();
        (boxes, corners)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(Local {
        dim: 1,
        cells: boxes,
        corners,
        gaps,
        hull: BoxRegion::unit(1),
        rotation: None,
        interior: if depth == 0 { InteriorStatus::Unknown } else { InteriorStatus::Empty },
        cell_diameter: len,
    })
}

fn cantor_gaps_local(gaps: &[[f64; 2]]) -> Local {
    let mut sorted = gaps.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut cells = Vec::new();
    let mut cursor = 0.0;
    for g in &sorted {
        cells.push(BoxRegion::from_raw(vec![cursor], vec![g[0]]));
        cursor = g[1];
    }
    cells.push(BoxRegion::from_raw(vec![cursor], vec![1.0]));
    let mut corners: Vec<Vec<f64>> = cells.iter().flat_map(|b| [b.lo.0.clone(), b.hi.0.clone()]).collect();
    corners.dedup();
    let interior = if cells.iter().any(|c| c.hi[0] > c.lo[0]) {
        InteriorStatus::NonEmpty
    } else {
        InteriorStatus::Empty
    };
    let cell_diameter = cells.iter().map(|c| c.hi[0] - c.lo[0]).fold(0.0, f64::max);
    let gaps = sorted
        .iter()
        .map(|g| Gap {
            region: BoxRegion::from_raw(vec![g[0]], vec![g[1]]),
            diameter: g[1] - g[0],
        })
        .collect();
    Local {
        dim: 1,
        cells,
        corners,
        gaps,
        hull: BoxRegion::unit(1),
        rotation: None,
        interior,
        cell_diameter,
    }
}

/// Digit vectors kept by a carpet, in lexicographic order.
fn carpet_digits(n: u32, d: u32, boundary_only: bool) -> Vec<Vec<u64>> {
    let n = n as u64;
    let d = d as usize;
    let centre = (n - 1) / 2;
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut code| {
            let mut digits = vec![0u64; d];
            for slot in digits.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            digits
        })
        .filter(|digits| {
            if boundary_only {
                digits.iter().any(|&x| x == 0 || x == n - 1)
            } else {
                digits.iter().any(|&x| x != centre)
            }
        })
        .collect()
}

fn carpet_local(n: u32, d: u32, boundary_only: bool, depth: u32, want: Want, cap: usize) -> Result<Local> {
    let dim = d as usize;
    let digits = carpet_digits(n, d, boundary_only);
    let needed = if want.cells { depth } else { depth.saturating_sub(1) };
    let count = (digits.len() as u128)
        .checked_pow(needed)
        .unwrap_or(u128::MAX);
    check_cap(count, cap)?;
    let nn = n as u64;
    if nn.checked_pow(depth).filter(|s| *s <= 1u64 << 53).is_none() {
        return Err(Error::InvalidParameter(format!(
            "n^depth = {n}^{depth} exceeds the exact float range"
        )));
    }
    // Integer lower corners of level-j cells at scale n^j, flattened.
    let mut cells: Vec<u64> = vec![0; dim];
    let mut gaps = Vec::new();
    let (gap_offset, gap_side) = if boundary_only { (1u64, nn - 2) } else { ((nn - 1) / 2, 1u64) };
    let sqrt_d = (dim as f64).sqrt();
    for level in 1..=depth {
        let scale = (nn.pow(level)) as f64;
        if want.gaps {
            let diameter = gap_side as f64 / scale * sqrt_d;
            for c in cells.chunks(dim) {
                let lo: Vec<f64> = c.iter().map(|&x| (x * nn + gap_offset) as f64 / scale).collect();
                let hi: Vec<f64> = c.iter().map(|&x| (x * nn + gap_offset + gap_side) as f64 / scale).collect();
                gaps.push(Gap {
                    region: BoxRegion::from_raw(lo, hi),
                    diameter,
                });
            }
        }
        if level < depth || want.cells {
            let mut next = Vec::with_capacity(cells.len() * digits.len());
            for c in cells.chunks(dim) {
                for dg in &digits {
                    next.extend(c.iter().zip(dg).map(|(&x, &y)| x * nn + y));
                }
            }
            cells = next;
        }
    }
    let scale = nn.pow(depth) as f64;
    let (boxes, corners) = if want.cells {
        let boxes = cells
            .chunks(dim)
            .map(|c| {
                BoxRegion::from_raw(
                    c.iter().map(|&x| x as f64 / scale).collect(),
                    c.iter().map(|&x| (x + 1) as f64 / scale).collect(),
                )
            })
            .collect();
        let mut int_corners: Vec<Vec<u64>> = Vec::with_capacity((cells.len() / dim) << dim);
        for c in cells.chunks(dim) {
            for mask in 0..1usize << dim {
                int_corners.push(c.iter().enumerate().map(|(i, &x)| x + (mask >> i & 1) as u64).collect());
            }
        }
        int_corners.sort_unstable();
        int_corners.dedup();
        let corners = int_corners
            .into_iter()
            .map(|c| c.into_iter().map(|x| x as f64 / scale).collect())
            .collect();
        (boxes, corners)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(Local {
        dim,
        cells: boxes,
        corners,
        gaps,
        hull: BoxRegion::unit(dim),
        rotation: None,
        interior: if depth == 0 { InteriorStatus::Unknown } else { InteriorStatus::Empty },
        cell_diameter: sqrt_d / scale,
    })
}

fn build_local(kind: &FractalKind, depth: u32, want: Want, cap: usize) -> Result<Local> {
    match kind {
        FractalKind::Cantor1D { ratio } => cantor_local(*ratio, depth, want, cap),
        FractalKind::CantorGaps { gaps } => Ok(cantor_gaps_local(gaps)),
        FractalKind::CarpetA { n, d } => carpet_local(*n, *d, false, depth, want, cap),
        FractalKind::CarpetB { n, d } => carpet_local(*n, *d, true, depth, want, cap),
        FractalKind::AffineImage { base, map } => {
            let mut local = build_local(base, depth, want, cap)?;
            // A(R p + u) = (A R)(p + R^T u)
            let shift = match &local.rotation {
                Some(r) => mat_t_vec(r, &map.translation),
                None => map.translation.0.clone(),
            };
            local.map_boxes(|b| b.translate(&shift), 1.0);
            for c in &mut local.corners {
                c.iter_mut().zip(&shift).for_each(|(x, s)| *x += s);
            }
            let rotation = match &local.rotation {
                Some(r) => &map.rotation * r,
                None => map.rotation.clone(),
            };
            local.rotation = simplify_rotation(rotation);
            Ok(local)
        }
        FractalKind::Similar {
            base,
            scale,
            offset,
        } => {
            let mut local = build_local(base, depth, want, cap)?;
            let shift = match &local.rotation {
                Some(r) => mat_t_vec(r, offset),
                None => offset.clone(),
            };
            let s = *scale;
            local.map_boxes(|b| b.scale(s).translate(&shift), s);
            for c in &mut local.corners {
                c.iter_mut().zip(&shift).for_each(|(x, t)| *x = *x * s + t);
            }
            Ok(local)
        }
        FractalKind::Embedded { base, ambient_dim } => {
            let mut local = build_local(base, depth, want, cap)?;
            let extra = ambient_dim - local.dim;
            if extra == 0 {
                return Ok(local);
            }
            let pad = |b: &BoxRegion| {
                let mut lo = b.lo.0.clone();
                let mut hi = b.hi.0.clone();
                lo.resize(*ambient_dim, 0.0);
                hi.resize(*ambient_dim, 0.0);
                BoxRegion::from_raw(lo, hi)
            };
            local.map_boxes(pad, 1.0);
            for c in &mut local.corners {
                c.resize(*ambient_dim, 0.0);
            }
            local.rotation = local.rotation.map(|r| {
                let mut big = DMatrix::identity(*ambient_dim, *ambient_dim);
                big.view_mut((0, 0), (r.nrows(), r.ncols())).copy_from(&r);
                big
            });
            // A set inside a hyperplane has a connected complement: the only
            // gap is the unbounded one.
            local.gaps.clear();
            local.interior = InteriorStatus::Empty;
            local.dim = *ambient_dim;
            Ok(local)
        }
    }
}

fn simplify_rotation(r: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let id = DMatrix::<f64>::identity(r.nrows(), r.ncols());
    if (&r - id).amax() == 0.0 {
        None
    } else {
        debug_assert!(is_rotation(&r, 1e-9));
        Some(r)
    }
}

fn hull_of(local: &Local) -> ConvexHullProxy {
    match &local.rotation {
        Some(r) => ConvexHullProxy::rotated(local.hull.clone(), r.clone()),
        None => ConvexHullProxy::axis(local.hull.clone()),
    }
}

pub fn build_approx(spec: &FractalSpec) -> Result<SetApprox> {
    build_approx_with_cap(spec, max_cells())
}

pub fn build_approx_with_cap(spec: &FractalSpec, cap: usize) -> Result<SetApprox> {
    spec.validate()?;
    let local = build_local(
        &spec.kind,
        spec.depth,
        Want {
            cells: true,
            gaps: false,
        },
        cap,
    )?;
    let hull = hull_of(&local);
    let exact_points = local
        .corners
        .iter()
        .map(|c| match &local.rotation {
            Some(r) => Point(mat_vec(r, c)),
            None => Point(c.clone()),
        })
        .collect();
    Ok(SetApprox {
        dim: local.dim,
        depth: spec.depth,
        boxes: local.cells,
        exact_points,
        cell_diameter: local.cell_diameter,
        hull,
    })
}

/// Convex hull of the attractor (independent of depth).
pub fn convex_hull(spec: &FractalSpec) -> Result<ConvexHullProxy> {
    spec.validate()?;
    let none = Want {
        cells: false,
        gaps: false,
    };
    Ok(hull_of(&build_local(&spec.kind, 0, none, usize::MAX)?))
}

pub fn enumerate_gaps(spec: &FractalSpec) -> Result<GapCatalog> {
    enumerate_gaps_with_cap(spec, max_cells())
}

pub fn enumerate_gaps_with_cap(spec: &FractalSpec, cap: usize) -> Result<GapCatalog> {
    spec.validate()?;
    let local = build_local(
        &spec.kind,
        spec.depth,
        Want {
            cells: false,
            gaps: true,
        },
        cap,
    )?;
    let hull = hull_of(&local);
    Ok(GapCatalog::sorted(local.dim, spec.depth, local.gaps, hull, local.interior))
}

/// Limit on the number of generated samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleLimit {
    pub cap: usize,
    pub subsample: bool,
}

impl SampleLimit {
    pub fn unlimited() -> Self {
        Self {
            cap: usize::MAX,
            subsample: false,
        }
    }

    /// `cap` indices out of `total`, deterministic in `seed`, in increasing
    /// order; `None` when no subsampling is needed.
    pub(crate) fn select(&self, total: u128, seed: u64) -> Result<Option<Vec<u128>>> {
        if total <= self.cap as u128 {
            return Ok(None);
        }
        if !self.subsample {
            return Err(Error::SampleCapExceeded {
                count: total,
                cap: self.cap,
            });
        }
        Ok(Some(stride_indices(total, self.cap as u128, seed)))
    }
}

/// Evenly strided indices with a seed-dependent phase.
pub(crate) fn stride_indices(total: u128, count: u128, seed: u64) -> Vec<u128> {
    let start = seed as u128 % total;
    let mut idx: Vec<u128> = (0..count).map(|i| (start + i * total / count) % total).collect();
    idx.sort_unstable();
    idx
}

/// Points of the product `a x b`, row-major in (a index, b index).
pub fn product_points(a: &SetApprox, b: &SetApprox, limit: SampleLimit, seed: u64) -> Result<Vec<Point>> {
    crate::error::check_dim(a.dim, b.dim)?;
    let nb = b.exact_points.len() as u128;
    let total = a.exact_points.len() as u128 * nb;
    let make = |k: u128| a.exact_points[(k / nb) as usize].concat(&b.exact_points[(k % nb) as usize]);
    Ok(match limit.select(total, seed)? {
        Some(idx) => idx.into_iter().map(make).collect(),
        None => (0..total).map(make).collect(),
    })
}

/// Tolerance for identifying exact points.
pub const POINT_TOL: f64 = 1e-12;
