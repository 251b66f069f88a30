//! Hypotheses and finite-depth conclusion of the gap lemma for a pair of sets.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fractal::{build_approx, convex_hull, enumerate_gaps, FractalSpec, SetApprox};
use crate::geometry::{hull_interiors_overlap, hulls_linked, BoxRegion, LINALG_TOL};
use crate::index::{bounding_box, GridIndex};
use crate::serde_ext::extended_f64;
use crate::thickness::thickness_of;

/// Slack for deciding `tau1 * tau2 > 1` in floating point.
pub const PRODUCT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthWitness {
    pub depth: u32,
    /// Lexicographically first pair of intersecting cells `(i, j)`.
    pub pair: Option<(usize, usize)>,
    pub region: Option<BoxRegion>,
    /// Whether the region lies inside the previous depth's region.
    pub nested_in_previous: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLemmaVerdict {
    #[serde(with = "extended_f64")]
    pub tau1: f64,
    #[serde(with = "extended_f64")]
    pub tau2: f64,
    #[serde(with = "extended_f64")]
    pub tau_product: f64,
    pub product_exceeds_one: bool,
    pub linked: bool,
    pub hypothesis_met: bool,
    /// Common region at the deepest checked depth.
    pub intersection_witness: Option<BoxRegion>,
    pub depths_checked: Vec<u32>,
    pub witnesses: Vec<DepthWitness>,
    /// Hypothesis met but some depth had no intersecting cells.
    pub falsification: bool,
    pub spec1_hash: String,
    pub spec2_hash: String,
}

impl GapLemmaVerdict {
    pub fn summary(&self) -> &'static str {
        match (self.hypothesis_met, self.falsification) {
            (false, _) => "condition not satisfied",
            (true, false) => "intersection witnessed at every checked depth",
            (true, true) => "FALSIFICATION: hypothesis met but no intersecting cells",
        }
    }
}

/// Lexicographically first pair of intersecting cells, and their overlap.
pub fn first_intersecting_pair(a: &SetApprox, b: &SetApprox) -> Result<Option<(usize, usize, BoxRegion)>> {
    check_dim(a.dim, b.dim)?;
    if !a.hull.same_frame(&b.hull) {
        return Err(Error::Unsupported(
            "witness search between sets in different rotation frames".into(),
        ));
    }
    let Some(bounds) = bounding_box(&b.boxes) else {
        return Ok(None);
    };
    let hint = b.boxes[0]
        .lo
        .iter()
        .zip(b.boxes[0].hi.iter())
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max);
    let mut index = GridIndex::new(&bounds, hint);
    for (j, cell) in b.boxes.iter().enumerate() {
        index.insert(j, cell);
    }
    for (i, cell) in a.boxes.iter().enumerate() {
        if let Some(j) = index.first_intersecting(&b.boxes, cell) {
            let region = cell.intersection(&b.boxes[j]).expect("pair intersects");
            return Ok(Some((i, j, region)));
        }
    }
    Ok(None)
}

pub fn check_gap_lemma(spec1: &FractalSpec, spec2: &FractalSpec, depths: &[u32]) -> Result<GapLemmaVerdict> {
    check_dim(spec1.dim()?, spec2.dim()?)?;
    let tau1 = thickness_of(spec1)?;
    let tau2 = thickness_of(spec2)?;
    let tau_product = tau1 * tau2;
    let product_exceeds_one = tau_product > 1.0 + PRODUCT_TOL;
    let linked = hulls_linked(&convex_hull(spec1)?, &convex_hull(spec2)?)?;
    let hypothesis_met = product_exceeds_one && linked;

    let mut depths_checked = depths.to_vec();
    depths_checked.sort_unstable();
    depths_checked.dedup();
    let mut witnesses: Vec<DepthWitness> = Vec::with_capacity(depths_checked.len());
    for &depth in &depths_checked {
        let a = build_approx(&spec1.with_depth(depth))?;
        let b = build_approx(&spec2.with_depth(depth))?;
        let found = first_intersecting_pair(&a, &b)?;
        let region = found.as_ref().map(|f| f.2.clone());
        let nested_in_previous = match (witnesses.last().and_then(|w| w.region.as_ref()), &region) {
            (Some(prev), Some(cur)) => Some(prev.contains_box(cur, LINALG_TOL)),
            _ => None,
        };
        witnesses.push(DepthWitness {
            depth,
            pair: found.map(|f| (f.0, f.1)),
            region,
            nested_in_previous,
        });
    }
    let falsification = hypothesis_met && witnesses.iter().any(|w| w.region.is_none());
    Ok(GapLemmaVerdict {
        tau1,
        tau2,
        tau_product,
        product_exceeds_one,
        linked,
        hypothesis_met,
        intersection_witness: witnesses.last().and_then(|w| w.region.clone()),
        depths_checked,
        witnesses,
        falsification,
        spec1_hash: spec1.hash_hex(),
        spec2_hash: spec2.hash_hex(),
    })
}

/// First (largest) bounded gap of `big` whose closure contains the convex
/// hull of `small`.
pub fn contained_in_gap(small: &FractalSpec, big: &FractalSpec) -> Result<Option<usize>> {
    check_dim(small.dim()?, big.dim()?)?;
    let hull = convex_hull(small)?;
    let catalog = enumerate_gaps(big)?;
    let vertices: Vec<Vec<f64>> = hull.vertices().iter().map(|v| catalog.hull.to_local(v)).collect();
    Ok(catalog
        .gaps
        .iter()
        .position(|g| vertices.iter().all(|v| g.region.contains_point(v, LINALG_TOL))))
}

/// Whether `small` lies in the unbounded gap of `big`, i.e. their convex
/// hulls have disjoint interiors.
pub fn in_unbounded_gap(small: &FractalSpec, big: &FractalSpec) -> Result<bool> {
    check_dim(small.dim()?, big.dim()?)?;
    Ok(!hull_interiors_overlap(&convex_hull(small)?, &convex_hull(big)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::FractalKind;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn shifted(ratio: f64, shift: f64) -> FractalSpec {
        FractalSpec::cantor(ratio, 6).translated(vec![shift])
    }

    #[test]
    fn thick_shifted_pair_intersects() {
        let v = check_gap_lemma(&FractalSpec::cantor(0.4, 6), &shifted(0.4, 0.3), &(2..=10).collect::<Vec<_>>())
            .unwrap();
        assert_abs_diff_eq!(v.tau_product, 4.0, epsilon = 1e-9);
        assert!(v.linked && v.hypothesis_met && !v.falsification);
        assert!(v.witnesses.iter().all(|w| w.region.is_some()));
        assert_eq!(v.depths_checked, (2..=10).collect::<Vec<_>>());
    }

    #[test]
    fn identical_sets_intersect_without_hypothesis() {
        let s = FractalSpec::cantor(0.4, 5);
        let v = check_gap_lemma(&s, &s, &[3]).unwrap();
        assert!(!v.linked);
        assert!(!v.hypothesis_met);
        assert_eq!(v.witnesses[0].pair, Some((0, 0)));
    }

    #[test]
    fn middle_thirds_fail_the_product_condition() {
        let v = check_gap_lemma(&FractalSpec::cantor(1.0 / 3.0, 6), &shifted(1.0 / 3.0, 0.3), &[2, 4]).unwrap();
        assert_abs_diff_eq!(v.tau_product, 1.0, epsilon = 1e-12);
        assert!(!v.product_exceeds_one);
        assert!(!v.hypothesis_met);
        assert!(!v.falsification);
        assert_eq!(v.summary(), "condition not satisfied");
    }

    #[test]
    fn verdict_json_round_trip() {
        let full = FractalSpec::cantor_gaps(vec![]);
        let v = check_gap_lemma(&full, &shifted(0.4, 0.5), &[2]).unwrap();
        assert!(v.tau1.is_infinite());
        let text = serde_json::to_string(&v).unwrap();
        let back: GapLemmaVerdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn containment_examples() {
        let carpet = FractalSpec::carpet_a(3, 2, 2);
        let inside = FractalSpec::new(
            FractalKind::Similar {
                base: Box::new(FractalKind::CarpetA { n: 3, d: 2 }),
                scale: 0.2,
                offset: vec![0.4, 0.4],
            },
            2,
        );
        assert_eq!(contained_in_gap(&inside, &carpet).unwrap(), Some(0));
        assert_eq!(
            contained_in_gap(&FractalSpec::cantor(0.4, 6), &shifted(0.4, 0.3)).unwrap(),
            None
        );
        let far = FractalSpec::carpet_a(3, 2, 2).translated(vec![3.0, 3.0]);
        assert_eq!(contained_in_gap(&far, &carpet).unwrap(), None);
        assert!(in_unbounded_gap(&far, &carpet).unwrap());
        assert!(!in_unbounded_gap(&inside, &carpet).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symmetric_hypothesis(r1 in 0.2..0.49f64, r2 in 0.2..0.49f64, shift in -1.2..1.2f64) {
            let a = FractalSpec::cantor(r1, 5);
            let b = FractalSpec::cantor(r2, 5).translated(vec![shift]);
            let ab = check_gap_lemma(&a, &b, &[3]).unwrap();
            let ba = check_gap_lemma(&b, &a, &[3]).unwrap();
            prop_assert_eq!(ab.hypothesis_met, ba.hypothesis_met);
            if ab.hypothesis_met {
                prop_assert!(!ab.falsification && !ba.falsification);
            }
        }

        #[test]
        fn linked_pairs_are_not_nested_in_gaps(r in 0.34..0.49f64, shift in 0.05..0.95f64) {
            let a = FractalSpec::cantor(r, 6);
            let b = FractalSpec::cantor(r, 6).translated(vec![shift]);
            prop_assert_eq!(contained_in_gap(&a, &b).unwrap(), None);
            prop_assert_eq!(contained_in_gap(&b, &a).unwrap(), None);
        }
    }
}
