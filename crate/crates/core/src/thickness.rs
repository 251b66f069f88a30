//! Thickness of a gap catalog, its equal-or-larger-competitor form, and
//! epsilon-thickness.
//!
//! All three share one kernel: gap `n` is compared against a prefix of the
//! sorted catalog (minus itself) and against the unbounded gap. The prefix
//! end is monotone in `n`, so gaps are inserted into a grid index once.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractal::{enumerate_gaps, FractalSpec, GapCatalog, InteriorStatus};
use crate::geometry::Point;
use crate::index::GridIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThicknessForm {
    /// Competitors are the gaps listed before `n`.
    Ordered,
    /// Competitors are all other gaps of diameter at least `diam(G_n)`.
    LargerOrEqual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRatio {
    pub index: usize,
    pub ratio: f64,
    /// Closest competitor; `None` when it is the unbounded gap.
    pub nearest_gap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    /// `None` when the thickness is infinite.
    pub value: Option<f64>,
    pub infinite: bool,
    pub argmin_gap_index: Option<usize>,
    pub per_gap_ratios: Vec<GapRatio>,
    pub depth_used: u32,
    pub form: ThicknessForm,
}

impl ThicknessReport {
    pub fn tau(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonThicknessReport {
    pub epsilon: f64,
    pub value: Option<f64>,
    pub infinite: bool,
    pub argmin_gap_index: Option<usize>,
    /// Number of competing bounded gaps for each gap.
    pub h_set_sizes: Vec<usize>,
    pub depth_used: u32,
}

impl EpsilonThicknessReport {
    pub fn tau(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

fn check_order(catalog: &GapCatalog) -> Result<()> {
    if catalog.gaps.windows(2).any(|w| w[0].diameter < w[1].diameter) {
        return Err(Error::InvalidParameter(
            "gaps must be listed by non-increasing diameter".into(),
        ));
    }
    Ok(())
}

/// Value for a catalog without bounded gaps.
fn no_gap_value(catalog: &GapCatalog) -> Result<f64> {
    match catalog.interior {
        InteriorStatus::NonEmpty => Ok(f64::INFINITY),
        InteriorStatus::Empty => Ok(0.0),
        InteriorStatus::Unknown => Err(Error::UndecidableInterior),
    }
}

/// Ratio of every gap against competitors `[0, prefix_end(n)) \ {n}` and the
/// unbounded gap. `prefix_end` must be non-decreasing in `n`.
fn ratio_scan(catalog: &GapCatalog, prefix_end: impl Fn(usize) -> usize) -> Vec<GapRatio> {
    let regions = catalog.regions();
    let hint = regions
        .iter()
        .map(|r| (0..r.dim()).map(|i| r.hi[i] - r.lo[i]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let mut index = GridIndex::new(&catalog.hull.carrier, hint);
    let mut inserted = 0;
    (0..regions.len())
        .map(|n| {
            let end = prefix_end(n);
            while inserted < end {
                index.insert(inserted, &regions[inserted]);
                inserted += 1;
            }
            let to_e = catalog.distance_to_unbounded(n);
            let (dist, nearest_gap) = match index.nearest(&regions, &regions[n], Some(n), to_e) {
                Some((d, i)) => (d, Some(i)),
                None => (to_e, None),
            };
            GapRatio {
                index: n,
                ratio: dist / catalog.gaps[n].diameter,
                nearest_gap,
            }
        })
        .collect()
}

fn argmin(ratios: &[GapRatio]) -> Option<(usize, f64)> {
    ratios.iter().fold(None, |best, r| match best {
        Some((_, v)) if v <= r.ratio => best,
        _ => Some((r.index, r.ratio)),
    })
}

fn report(catalog: &GapCatalog, ratios: Vec<GapRatio>, form: ThicknessForm) -> Result<ThicknessReport> {
    let (value, argmin_gap_index) = match argmin(&ratios) {
        Some((i, v)) => (v, Some(i)),
        None => (no_gap_value(catalog)?, None),
    };
    Ok(ThicknessReport {
        value: value.is_finite().then_some(value),
        infinite: value.is_infinite(),
        argmin_gap_index,
        per_gap_ratios: ratios,
        depth_used: catalog.depth,
        form,
    })
}

/// Thickness with each gap measured against the gaps listed before it.
/// The catalog order is used as given (it must be non-increasing in diameter).
pub fn thickness(catalog: &GapCatalog) -> Result<ThicknessReport> {
    check_order(catalog)?;
    let ratios = ratio_scan(catalog, |n| n);
    report(catalog, ratios, ThicknessForm::Ordered)
}

/// Thickness with each gap measured against every other gap of equal or
/// larger diameter, independent of how ties are ordered.
pub fn thickness_lambda_form(catalog: &GapCatalog) -> Result<ThicknessReport> {
    check_order(catalog)?;
    let gaps = &catalog.gaps;
    let ratios = ratio_scan(catalog, |n| {
        let d = gaps[n].diameter;
        n + gaps[n..].partition_point(|g| g.diameter >= d)
    });
    report(catalog, ratios, ThicknessForm::LargerOrEqual)
}

/// Thickness where gap `n` competes with every other gap of diameter above
/// `(1 - epsilon) diam(G_n)`.
pub fn epsilon_thickness(catalog: &GapCatalog, epsilon: f64) -> Result<EpsilonThicknessReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    check_order(catalog)?;
    let gaps = &catalog.gaps;
    let end = |n: usize| {
        let cut = (1.0 - epsilon) * gaps[n].diameter;
        n + gaps[n..].partition_point(|g| g.diameter > cut)
    };
    let h_set_sizes = (0..gaps.len()).map(|n| end(n) - 1).collect();
    let ratios = ratio_scan(catalog, end);
    let (value, argmin_gap_index) = match argmin(&ratios) {
        Some((i, v)) => (v, Some(i)),
        None => (no_gap_value(catalog)?, None),
    };
    Ok(EpsilonThicknessReport {
        epsilon,
        value: value.is_finite().then_some(value),
        infinite: value.is_infinite(),
        argmin_gap_index,
        h_set_sizes,
        depth_used: catalog.depth,
    })
}

/// Thickness of the depth-k model of `spec`.
pub fn thickness_of(spec: &FractalSpec) -> Result<f64> {
    Ok(thickness(&enumerate_gaps(spec)?)?.tau())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneFit {
    pub normal: Point,
    pub offset: f64,
    pub max_residual: f64,
}

/// Least-squares hyperplane through `points`: unit normal `n` and offset `c`
/// with `n . p ~ c`.
pub fn fit_hyperplane(points: &[Point]) -> Result<HyperplaneFit> {
    let first = points.first().ok_or(Error::EmptySamples)?;
    let d = first.dim();
    for p in points {
        crate::error::check_dim(d, p.dim())?;
    }
    if points.len() <= d {
        return Err(Error::Underdetermined {
            points: points.len(),
            dim: d,
        });
    }
    let count = points.len() as f64;
    let centroid: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / count).collect();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for p in points {
        for r in 0..d {
            for c in 0..d {
                cov[(r, c)] += (p[r] - centroid[r]) * (p[c] - centroid[c]);
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let normal: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let offset: f64 = normal.iter().zip(&centroid).map(|(a, b)| a * b).sum();
    let max_residual = points
        .iter()
        .map(|p| (normal.iter().zip(p.iter()).map(|(a, b)| a * b).sum::<f64>() - offset).abs())
        .fold(0.0, f64::max);
    Ok(HyperplaneFit {
        normal: Point(normal),
        offset,
        max_residual,
    })
}

/// Whether all points lie within `tolerance` of one hyperplane; such a set
/// has thickness 0.
pub fn hyperplane_thickness_check(points: &[Point], tolerance: f64) -> Result<bool> {
    Ok(fit_hyperplane(points)?.max_residual <= tolerance)
}
