//! Closed-form dimension bounds in terms of thickness, and the dimension
//! table for products of the two carpet families as `n` grows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractal::{carpet_a_dimension, carpet_b_dimension};
use crate::serde_ext::extended_f64;

/// Interior points of the uniform grid on `(0, d)` scanned for the exponent `c`.
pub const C_GRID_POINTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundApplicability {
    pub grid_points: usize,
    /// Smallest grid exponent satisfying the hypothesis, if any.
    pub qualifying_c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub d: u32,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_f64")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `d - K1 tau^-d / (beta^d |ln beta|)`; needs `tau` and `beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub large_thickness_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub large_thickness_applicability: Option<LowerBoundApplicability>,
    /// `d - 1 + ln 2 / ln(2 + 1/tau)`; needs `tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_bound: Option<f64>,
    /// `2 (d - 1 + ln 2 / ln 3)`, the bound for products with `tau > 1`.
    pub thickness_floor: f64,
}

mod opt_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::extended_f64")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

fn check_d(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    Ok(())
}

pub fn k1(d: u32) -> f64 {
    let d = d as f64;
    let r = 24.0 * d.sqrt();
    2.0 * d * r.powf(d) * (16.0 * d.sqrt()).ln() / (1.0 - 0.5f64.powf(d))
}

pub fn k2(d: u32) -> f64 {
    let d = d as f64;
    let r = 24.0 * d.sqrt();
    (r.powf(d) * (1.0 + 4f64.powf(d) * 2.0) / (1.0 - 0.5f64.powf(d))).powi(2)
}

pub fn thickness_floor(d: u32) -> f64 {
    2.0 * (d as f64 - 1.0 + 2f64.ln() / 3f64.ln())
}

/// `d - 1 + ln 2 / ln(2 + 1/tau)`; equals `d` at `tau = inf`.
pub fn tau_bound(d: u32, tau: f64) -> Result<f64> {
    check_d(d)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    Ok(d as f64 - 1.0 + 2f64.ln() / (2.0 + tau.recip()).ln())
}

pub fn large_thickness_bound(d: u32, tau: f64, beta: f64) -> Result<f64> {
    check_d(d)?;
    check_tau_beta(tau, beta)?;
    let df = d as f64;
    Ok(df - k1(d) * tau.powf(-df) / (beta.powf(df) * beta.ln().abs()))
}

fn check_tau_beta(tau: f64, beta: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    Ok(())
}

/// Scans `c = d j / (N + 1)`, `j = 1..=N`, for
/// `tau^-c <= beta^c (1 - beta^(d - c)) / K2`.
pub fn large_thickness_applicability(d: u32, tau: f64, beta: f64) -> Result<LowerBoundApplicability> {
    check_d(d)?;
    check_tau_beta(tau, beta)?;
    let df = d as f64;
    let k2 = k2(d);
    let qualifying_c = (1..=C_GRID_POINTS)
        .map(|j| df * j as f64 / (C_GRID_POINTS + 1) as f64)
        .find(|&c| tau.powf(-c) <= beta.powf(c) * (1.0 - beta.powf(df - c)) / k2);
    Ok(LowerBoundApplicability {
        grid_points: C_GRID_POINTS,
        qualifying_c,
    })
}

pub fn compute_bounds(d: u32, tau: Option<f64>, beta: Option<f64>) -> Result<BoundsReport> {
    check_d(d)?;
    let tau_bound = tau.map(|t| tau_bound(d, t)).transpose()?;
    if let Some(b) = beta {
        check_tau_beta(1.0, b)?;
    }
    let (large_thickness_bound, large_thickness_applicability) = match (tau, beta) {
        (Some(t), Some(b)) => (
            Some(large_thickness_bound(d, t, b)?),
            Some(large_thickness_applicability(d, t, b)?),
        ),
        _ => (None, None),
    };
    Ok(BoundsReport {
        d,
        k1: k1(d),
        k2: k2(d),
        tau,
        beta,
        large_thickness_bound,
        large_thickness_applicability,
        tau_bound,
        thickness_floor: thickness_floor(d),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub n: u64,
    pub m_n: u64,
    #[serde(rename = "condition")]
    pub condition_holds: bool,
    #[serde(rename = "dimA")]
    pub dim_a: f64,
    #[serde(rename = "dimB")]
    pub dim_b: f64,
    pub dim_sum: f64,
    /// `m_n >= 5`, the smallest admissible size for the second family.
    #[serde(skip)]
    pub feasible: bool,
}

/// Largest odd `m` with `m < (n - 1 + 4d) / (2d)`.
pub fn paired_size(d: u32, n: u64) -> u64 {
    let num = n - 1 + 4 * d as u64;
    let den = 2 * d as u64;
    // Largest integer strictly below num / den.
    let m = (num - 1) / den;
    if m.is_multiple_of(2) {
        m.saturating_sub(1)
    } else {
        m
    }
}

/// One row per `n`: the paired size, the check `2d (m - 2) < n - 1`, and the
/// dimensions of the two carpets and of their product.
pub fn carpet_sequence_table(d: u32, n_values: &[u64]) -> Result<Vec<SequenceRow>> {
    check_d(d)?;
    n_values
        .iter()
        .map(|&n| {
            if n < 3 || n % 2 == 0 {
                return Err(Error::InvalidParameter(format!("n must be odd and at least 3, got {n}")));
            }
            let m = paired_size(d, n);
            let condition_holds = m >= 3 && 2 * d as u64 * (m - 2) < n - 1;
            let feasible = m >= 5;
            let dim_a = carpet_a_dimension(n, d);
            let dim_b = if m >= 3 { carpet_b_dimension(m, d) } else { f64::NAN };
            Ok(SequenceRow {
                n,
                m_n: m,
                condition_holds,
                dim_a,
                dim_b,
                dim_sum: dim_a + dim_b,
                feasible,
            })
        })
        .collect()
}

pub fn write_sequence_csv<W: std::io::Write>(rows: &[SequenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence_csv<R: std::io::Read>(input: R) -> Result<Vec<SequenceRow>> {
    let mut rows: Vec<SequenceRow> = csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    for row in &mut rows {
        row.feasible = row.m_n >= 5;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn floor_and_tau_bound() {
        assert_abs_diff_eq!(thickness_floor(2), 3.261859507, epsilon = 1e-9);
        assert_abs_diff_eq!(tau_bound(2, 1.0).unwrap(), 1.0 + 2f64.ln() / 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(tau_bound(2, 1.0).unwrap(), 1.630929754, epsilon = 1e-9);
        assert_eq!(tau_bound(2, f64::INFINITY).unwrap(), 2.0);
        assert!(tau_bound(2, 0.0).is_err());
        assert!(compute_bounds(0, None, None).is_err());
        assert!(compute_bounds(2, Some(1.0), Some(1.0)).is_err());
    }

    #[test]
    fn constants() {
        // d = 1: 2 * 24 * ln 16 / (1/2) and (24 * 9 / (1/2))^2.
        assert_abs_diff_eq!(k1(1), 96.0 * 16f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(k2(1), 432f64 * 432.0, epsilon = 1e-6);
    }

    #[test]
    fn no_exponent_qualifies_at_moderate_thickness() {
        let r = compute_bounds(2, Some(1.5), Some(0.25)).unwrap();
        let app = r.large_thickness_applicability.unwrap();
        assert_eq!(app.grid_points, 1000);
        assert_eq!(app.qualifying_c, None);
        // Huge thickness makes some exponent qualify.
        let big = large_thickness_applicability(2, 1e12, 0.25).unwrap();
        assert!(big.qualifying_c.is_some());
    }

    #[test]
    fn report_json_round_trip() {
        for r in [
            compute_bounds(2, None, None).unwrap(),
            compute_bounds(3, Some(f64::INFINITY), Some(0.5)).unwrap(),
            compute_bounds(2, Some(1.5), Some(0.25)).unwrap(),
        ] {
            let back: BoundsReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn sequence_rows() {
        let rows = carpet_sequence_table(2, &[101, 1_000_001, 3]).unwrap();
        let r = &rows[0];
        assert_eq!(r.m_n, 25);
        assert!(r.condition_holds && r.feasible);
        assert_abs_diff_eq!(r.dim_a, 10200f64.ln() / 101f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.dim_b, 96f64.ln() / 25f64.ln(), epsilon = 1e-12);
        assert!(rows[1].dim_sum - 3.0 < 0.12 && rows[1].dim_sum < r.dim_sum);
        assert!(!rows[2].feasible);
        assert!(carpet_sequence_table(2, &[100]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = carpet_sequence_table(2, &[101, 1001, 100_001]).unwrap();
        let mut buf = Vec::new();
        write_sequence_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,m_n,condition,dimA,dimB,dim_sum\n"));
        assert_eq!(read_sequence_csv(buf.as_slice()).unwrap(), rows);
    }

    proptest! {
        #[test]
        fn paired_size_is_largest_odd_below(d in 1u32..5, half in 1u64..100_000) {
            let n = 2 * half + 1;
            let m = paired_size(d, n);
            let limit = (n - 1 + 4 * d as u64) as f64 / (2 * d) as f64;
            prop_assert!(m % 2 == 1);
            prop_assert!((m as f64) < limit);
            prop_assert!((m + 2) as f64 >= limit);
        }

        #[test]
        fn bounds_increase_with_tau(d in 1u32..4, t in 0.01..100.0f64, beta in 0.05..0.95f64) {
            let t2 = t * 1.01;
            prop_assert!(tau_bound(d, t2).unwrap() > tau_bound(d, t).unwrap());
            prop_assert!(tau_bound(d, t).unwrap() < d as f64);
            prop_assert!(large_thickness_bound(d, t2, beta).unwrap() > large_thickness_bound(d, t, beta).unwrap());
        }
    }
}
