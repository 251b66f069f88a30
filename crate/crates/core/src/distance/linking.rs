//! Parameters `(x, t)` for which `g_{x,t}` carries a small box at `u1` onto
//! a box linked with a small box at `u2`, and a numerical check that `g`
//! nearly preserves thickness on such boxes.

use serde::{Deserialize, Serialize};

use crate::distance::map::DistanceMapParams;
use crate::error::{check_dim, Error, Result};
use crate::fractal::{GapCatalog, InteriorStatus};
use crate::geometry::{BoxRegion, ConvexHullProxy, Point};
use crate::thickness::{epsilon_thickness, thickness};

/// Whether, for every coordinate `i`,
/// `g^i(u1_i + d1) < u2_i < g^i(u1_i) < u2_i + d2`, where `d1`, `d2` are the
/// diagonal steps at `u1`, `u2`.
pub fn in_linking_set(params: &DistanceMapParams, u1: &Point, delta1: f64, u2: &Point, delta2: f64) -> Result<bool> {
    let d = params.dim();
    check_dim(d, u1.dim())?;
    check_dim(d, u2.dim())?;
    for i in 0..d {
        let (Ok(far), Ok(near)) = (params.component(i, u1[i] + delta1), params.component(i, u1[i])) else {
            return Ok(false);
        };
        if !(far < u2[i] && u2[i] < near && near < u2[i] + delta2) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Open interval of `t` with `(x, t)` in the linking set, or `None`.
pub fn linking_window(x: &Point, u1: &Point, delta1: f64, u2: &Point, delta2: f64) -> Result<Option<(f64, f64)>> {
    if !x.dim().is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: 2 * u1.dim(),
            found: x.dim(),
        });
    }
    let d = x.dim() / 2;
    check_dim(d, u1.dim())?;
    check_dim(d, u2.dim())?;
    // Bounds on s = t^2 / d, one coordinate at a time.
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for i in 0..d {
        let (xi, yi) = (x[i], x[i + d]);
        let far = (xi - u1[i] - delta1).powi(2);
        let near = (xi - u1[i]).powi(2);
        let rise = u2[i] - yi;
        if rise <= 0.0 {
            // g^i >= x_{i+d} >= u2_i, so g^i(u1_i + d1) < u2_i fails.
            return Ok(None);
        }
        lo = lo.max(far).max(near + rise * rise);
        hi = hi.min(far + rise * rise).min(near + (rise + delta2).powi(2));
    }
    Ok((lo < hi).then(|| ((d as f64 * lo).sqrt(), (d as f64 * hi).sqrt())))
}

/// Gap catalog of the image of a set under `g_{x,t}`. Every coordinate map
/// must be strictly monotone on the hull, so gaps map to gaps and boxes map
/// to boxes.
pub fn map_catalog_through_g(catalog: &GapCatalog, params: &DistanceMapParams) -> Result<GapCatalog> {
    check_dim(params.dim(), catalog.dim)?;
    if catalog.hull.rotation.is_some() {
        return Err(Error::Unsupported("mapping a rotated catalog through g".into()));
    }
    let hull = &catalog.hull.carrier;
    for i in 0..catalog.dim {
        let x = params.x[i];
        if hull.lo[i] < x && x < hull.hi[i] {
            return Err(Error::InvalidParameter(format!(
                "g is not monotone on the hull in coordinate {i}"
            )));
        }
    }
    let map_box = |b: &BoxRegion| -> Result<BoxRegion> {
        let mut lo = Vec::with_capacity(b.dim());
        let mut hi = Vec::with_capacity(b.dim());
        for i in 0..b.dim() {
            let p = params.component(i, b.lo[i])?;
            let q = params.component(i, b.hi[i])?;
            lo.push(p.min(q));
            hi.push(p.max(q));
        }
        BoxRegion::new(Point(lo), Point(hi))
    };
    let gaps = catalog.gaps.iter().map(|g| map_box(&g.region)).collect::<Result<Vec<_>>>()?;
    GapCatalog::from_boxes(gaps, ConvexHullProxy::axis(map_box(hull)?), catalog.interior)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageThicknessCheck {
    /// `1 - epsilon` is the ratio of the smallest to the largest `|g'|` on the hull.
    pub epsilon: f64,
    pub tau_image: f64,
    /// Epsilon-thickness of the source at `2 epsilon - epsilon^2`.
    pub tau_source_eps: f64,
    /// `tau_source_eps * (1 - epsilon)`.
    pub bound: f64,
    pub holds: bool,
}

/// Compares the thickness of `g_{x,t}(C)` with `(1 - e) tau_{2e - e^2}(C)`,
/// where `1 - e` bounds the distortion of `g` on the hull of `C`.
pub fn image_thickness_check(catalog: &GapCatalog, params: &DistanceMapParams) -> Result<ImageThicknessCheck> {
    if catalog.interior == InteriorStatus::Unknown {
        return Err(Error::UndecidableInterior);
    }
    let image = map_catalog_through_g(catalog, params)?;
    let hull = &catalog.hull.carrier;
    // |g^i'| grows with |x_i - z|, so its extremes sit at the hull faces.
    let slopes = (0..catalog.dim)
        .flat_map(|i| [hull.lo[i], hull.hi[i]].map(|z| params.derivative(i, z).map(f64::abs)))
        .collect::<Result<Vec<f64>>>()?;
    let min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let max = slopes.iter().copied().fold(0.0, f64::max);
    if !(min > 0.0) {
        return Err(Error::Degenerate("g is flat somewhere on the hull".into()));
    }
    let epsilon = 1.0 - min / max;
    let tau_image = thickness(&image)?.tau();
    let eps2 = 2.0 * epsilon - epsilon * epsilon;
    let tau_source_eps = if eps2 > 0.0 {
        epsilon_thickness(catalog, eps2)?.tau()
    } else {
        thickness(catalog)?.tau()
    };
    let bound = tau_source_eps * (1.0 - epsilon);
    Ok(ImageThicknessCheck {
        epsilon,
        tau_image,
        tau_source_eps,
        bound,
        holds: tau_image >= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{enumerate_gaps, FractalKind, FractalSpec};
    use crate::geometry::hulls_linked;
    use proptest::prelude::*;

    fn small_carpet(depth: u32) -> FractalSpec {
        FractalSpec::new(
            FractalKind::Similar {
                base: Box::new(FractalKind::CarpetA { n: 3, d: 2 }),
                scale: 0.05,
                offset: vec![0.5, 0.5],
            },
            depth,
        )
    }

    #[test]
    fn window_contains_the_touching_radius() {
        let x = Point::zeros(4);
        let u1 = Point(vec![0.3, 0.3]);
        let u2 = Point(vec![0.4, 0.4]);
        let (lo, hi) = linking_window(&x, &u1, 0.01, &u2, 0.01).unwrap().unwrap();
        // At t1 with t1^2 / d = |u1_i|^2 + |u2_i|^2, g(u1) = u2 exactly.
        let t1 = (2.0 * (0.09 + 0.16f64)).sqrt();
        assert!((lo - t1).abs() < 1e-12);
        assert!(hi > lo);
        let mid = 0.5 * (lo + hi);
        let params = DistanceMapParams::new(x.clone(), mid).unwrap();
        assert!(in_linking_set(&params, &u1, 0.01, &u2, 0.01).unwrap());
        let outside = DistanceMapParams::new(x, lo * 0.99).unwrap();
        assert!(!in_linking_set(&outside, &u1, 0.01, &u2, 0.01).unwrap());
    }

    #[test]
    fn image_of_small_carpet_keeps_thickness() {
        let catalog = enumerate_gaps(&small_carpet(3)).unwrap();
        let params = DistanceMapParams::new(Point::zeros(4), 1.2).unwrap();
        let check = image_thickness_check(&catalog, &params).unwrap();
        assert!(check.epsilon > 0.0 && check.epsilon < 0.5);
        assert!(check.holds, "{check:?}");
        assert!(check.tau_image > 0.0);
        // Thickness of the source for reference: (n - 1) / (2 sqrt 2).
        assert!((thickness(&catalog).unwrap().tau() - 1.0 / 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn mapping_requires_monotone_coordinates() {
        let catalog = enumerate_gaps(&small_carpet(2)).unwrap();
        let x = Point(vec![0.52, 0.0, 0.0, 0.0]);
        let params = DistanceMapParams::new(x, 1.2).unwrap();
        assert!(map_catalog_through_g(&catalog, &params).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn window_matches_direct_test(
            a in 0.05..0.5f64, b in 0.05..0.5f64,
            d1 in 0.001..0.05f64, d2 in 0.001..0.05f64,
            frac in -0.5..1.5f64,
        ) {
            let x = Point::zeros(4);
            let u1 = Point::splat(2, a);
            let u2 = Point::splat(2, b);
            if let Some((lo, hi)) = linking_window(&x, &u1, d1, &u2, d2).unwrap() {
                let t = lo + frac * (hi - lo);
                let margin = 1e-9 * hi;
                prop_assume!((t - lo).abs() > margin && (t - hi).abs() > margin);
                let params = DistanceMapParams::new(x, t).unwrap();
                let inside = in_linking_set(&params, &u1, d1, &u2, d2).unwrap();
                prop_assert_eq!(inside, t > lo && t < hi);
                if inside {
                    // The image box and the box at u2 have linked hulls.
                    let img_lo: Vec<f64> = (0..2).map(|i| params.component(i, a + d1).unwrap()).collect();
                    let img_hi: Vec<f64> = (0..2).map(|i| params.component(i, a).unwrap()).collect();
                    let image = ConvexHullProxy::axis(BoxRegion::new(Point(img_lo), Point(img_hi)).unwrap());
                    let target = ConvexHullProxy::axis(BoxRegion::new(Point::splat(2, b), Point::splat(2, b + d2)).unwrap());
                    prop_assert!(hulls_linked(&image, &target).unwrap());
                }
            }
        }

        #[test]
        fn image_check_holds_on_carpets(t in 1.0..1.4f64, sx in 0.0..0.2f64) {
            let catalog = enumerate_gaps(&small_carpet(2)).unwrap();
            let x = Point(vec![sx, 0.0, 0.0, sx]);
            let params = DistanceMapParams::new(x, t).unwrap();
            let check = image_thickness_check(&catalog, &params).unwrap();
            prop_assert!(check.holds, "{:?}", check);
        }
    }
}
