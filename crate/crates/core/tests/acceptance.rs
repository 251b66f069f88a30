#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! End-to-end acceptance suite. Each criterion runs under a wall-clock
//! budget and prints one PASS/FAIL line; the process exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use thickset::bounds::{carpet_sequence_table, compute_bounds, large_thickness_applicability, tau_bound};
use thickset::distance::coverage::{certify_coverage, pinned_intersection_over_neighborhood, CoverageRegion};
use thickset::distance::map::DistanceMapParams;
use thickset::distance::sets::{pinned_distance_set, DistanceValues};
use thickset::distance::tree::{tree_distance_set, DistinctMode, TreeGraph};
use thickset::fractal::{build_approx, enumerate_gaps, FractalKind, FractalSpec, SampleLimit};
use thickset::gap_lemma::check_gap_lemma;
use thickset::geometry::{normalize_pair, AffineMap, Point};
use thickset::thickness::{epsilon_thickness, hyperplane_thickness_check, thickness, thickness_lambda_form, thickness_of};

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x7431_c4e5 ^ stream)
}

fn thickness_closed_forms() -> Check {
    let mut worst: f64 = 0.0;
    let families: Vec<(FractalKind, f64)> = [(3, 2), (5, 2), (3, 3), (7, 2)]
        .into_iter()
        .map(|(n, d)| (FractalKind::CarpetA { n, d }, (n as f64 - 1.0) / (2.0 * (d as f64).sqrt())))
        .chain(
            [(5, 2), (7, 2), (5, 3)]
                .into_iter()
                .map(|(n, d)| (FractalKind::CarpetB { n, d }, 1.0 / ((n as f64 - 2.0) * (d as f64).sqrt()))),
        )
        .collect();
    for (kind, expected) in families {
        let v2 = ok(thickness_of(&FractalSpec::new(kind.clone(), 2)))?;
        let v3 = ok(thickness_of(&FractalSpec::new(kind.clone(), 3)))?;
        for v in [v2, v3] {
            worst = worst.max((v - expected).abs());
            ensure!((v - expected).abs() < 1e-9, "{kind:?}: {v} vs {expected}");
        }
        ensure!((v2 - v3).abs() <= 1e-12, "{kind:?}: depth 2 gives {v2}, depth 3 gives {v3}");
    }
    Ok(format!("7 families x depths 2,3; max error {worst:.1e}"))
}

/// Thickness of the symmetric Cantor set at `depth` by the definition:
/// explicit gap intervals, each compared with every gap at least as long and
/// with the two unbounded rays.
fn brute_force_cantor(ratio: f64, depth: u32) -> f64 {
    let mut intervals = vec![(0.0f64, 1.0f64)];
    let mut gaps = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * intervals.len());
        for (a, b) in intervals {
            let len = b - a;
            let (l, r) = (a + ratio * len, b - ratio * len);
            gaps.push((l, r));
            next.push((a, l));
            next.push((r, b));
        }
        intervals = next;
    }
    gaps.iter()
        .map(|&(lo, hi)| {
            let len = hi - lo;
            let mut best = lo.min(1.0 - hi);
            for &(a, b) in &gaps {
                if (a, b) != (lo, hi) && b - a >= len * (1.0 - 1e-12) {
                    let dist = if b <= lo { lo - b } else { a - hi };
                    best = best.min(dist);
                }
            }
            best / len
        })
        .fold(f64::INFINITY, f64::min)
}

fn cantor_oracle() -> Check {
    let mut lines = Vec::new();
    for ratio in [0.3, 1.0 / 3.0, 0.4, 0.45] {
        let oracle = brute_force_cantor(ratio, 8);
        let closed = ratio / (1.0 - 2.0 * ratio);
        ensure!((oracle - closed).abs() < 1e-9, "oracle {oracle} vs closed form {closed} at {ratio}");
        let computed = ok(thickness(&ok(enumerate_gaps(&FractalSpec::cantor(ratio, 8)))?))?.tau();
        ensure!((computed - oracle).abs() < 1e-9, "ratio {ratio}: {computed} vs oracle {oracle}");
        lines.push(format!("{ratio:.4}->{computed:.6}"));
    }
    Ok(lines.join(", "))
}

/// Disjoint gaps on the grid of 1/64, with lengths 1, 2 or 4 cells so that
/// many diameters tie exactly.
fn random_dyadic_gaps(r: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut gaps = Vec::new();
    let mut cell = r.gen_range(1..4);
    loop {
        let len = [1, 2, 4][r.gen_range(0..3)];
        if cell + len >= 64 {
            break;
        }
        gaps.push([cell as f64 / 64.0, (cell + len) as f64 / 64.0]);
        cell += len + r.gen_range(1..4);
    }
    gaps
}

fn rotation2(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn lambda_form_equivalence() -> Check {
    let rotated = FractalKind::AffineImage {
        base: Box::new(FractalKind::CarpetA { n: 3, d: 2 }),
        map: ok(AffineMap::new(rotation2(0.7), Point(vec![0.2, -0.1])))?,
    };
    let mut specs = vec![
        FractalSpec::cantor(0.3, 7),
        FractalSpec::cantor(1.0 / 3.0, 7),
        FractalSpec::cantor(0.4, 7),
        FractalSpec::cantor(0.45, 7),
        FractalSpec::carpet_a(3, 2, 3),
        FractalSpec::carpet_a(5, 2, 2),
        FractalSpec::carpet_a(3, 3, 2),
        FractalSpec::carpet_b(5, 2, 2),
        FractalSpec::carpet_b(7, 2, 2),
        FractalSpec::carpet_b(5, 3, 2),
        FractalSpec::new(rotated, 2),
        FractalSpec::carpet_a(3, 2, 2).translated(vec![1.5, -2.0]),
    ];
    let mut r = rng(3);
    let mut ties = 0;
    for _ in 0..50 {
        let gaps = random_dyadic_gaps(&mut r);
        let mut lens: Vec<f64> = gaps.iter().map(|g| g[1] - g[0]).collect();
        lens.sort_by(f64::total_cmp);
        ties += lens.windows(2).filter(|w| w[0] == w[1]).count();
        let mut permuted = gaps.clone();
        permuted.shuffle(&mut r);
        specs.push(FractalSpec::cantor_gaps(gaps));
        specs.push(FractalSpec::cantor_gaps(permuted));
    }
    ensure!(ties > 0, "random specs produced no diameter ties");
    let mut values = Vec::new();
    for spec in &specs {
        let catalog = ok(enumerate_gaps(spec))?;
        let a = ok(thickness(&catalog))?.tau();
        let b = ok(thickness_lambda_form(&catalog))?.tau();
        ensure!(a == b || (a - b).abs() < 1e-12, "{spec:?}: {a} vs {b}");
        values.push(a);
    }
    for pair in values[12..].chunks(2) {
        ensure!(pair[0] == pair[1], "permuting gap order changed thickness: {} vs {}", pair[0], pair[1]);
    }
    Ok(format!("{} specs, {ties} tied diameter pairs among random ones", specs.len()))
}

fn epsilon_properties() -> Check {
    let catalog = ok(enumerate_gaps(&FractalSpec::carpet_a(3, 2, 3)))?;
    let tau = ok(thickness(&catalog))?.tau();
    let eps = [0.5, 0.25, 0.1, 0.05, 0.01];
    let vals = eps
        .iter()
        .map(|&e| epsilon_thickness(&catalog, e).map(|r| r.tau()))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    for k in 1..vals.len() {
        ensure!(vals[k - 1] <= vals[k], "tau_eps increases with eps between {} and {}", eps[k - 1], eps[k]);
    }
    ensure!((vals[4] - tau).abs() < 1e-6, "tau_0.01 = {} vs tau = {tau}", vals[4]);
    Ok(format!("tau_eps = {vals:.6?}, tau = {tau:.6}"))
}

fn gap_lemma_soundness() -> Check {
    let depths: Vec<u32> = (2..=10).collect();
    let mut r = rng(5);
    for k in 0..100 {
        let ratio = r.gen_range(0.34..0.49);
        let shift = r.gen_range(0.05..0.95);
        let a = FractalSpec::cantor(ratio, 6);
        let b = FractalSpec::cantor(ratio, 6).translated(vec![shift]);
        let v = ok(check_gap_lemma(&a, &b, &depths))?;
        ensure!(v.product_exceeds_one && v.linked, "pair {k} (ratio {ratio}, shift {shift}) fails the hypothesis");
        ensure!(!v.falsification, "pair {k}: FALSIFICATION at ratio {ratio}, shift {shift}");
        ensure!(
            v.witnesses.len() == 9 && v.witnesses.iter().all(|w| w.region.is_some()),
            "pair {k}: missing witness"
        );
    }
    let mut thin = 0;
    for k in 0..30 {
        let ratio = if k == 0 { 1.0 / 3.0 } else { r.gen_range(0.2..1.0 / 3.0) };
        let shift = r.gen_range(0.05..0.95);
        let a = FractalSpec::cantor(ratio, 6);
        let b = FractalSpec::cantor(ratio, 6).translated(vec![shift]);
        let v = ok(check_gap_lemma(&a, &b, &depths))?;
        ensure!(!v.hypothesis_met && !v.falsification, "thin pair {k} (ratio {ratio}) not gated");
        ensure!(v.summary() == "condition not satisfied", "thin pair {k}: {}", v.summary());
        thin += 1;
    }
    Ok(format!("100 thick pairs witnessed at depths 2..10; {thin} thin pairs gated"))
}

fn distance_map_calculus() -> Check {
    let mut r = rng(6);
    let mut worst = [0.0f64; 4];
    let draw = |r: &mut ChaCha8Rng, margin: f64| -> (DistanceMapParams, Vec<f64>, usize) {
        let d = r.gen_range(1..=3usize);
        let x: Vec<f64> = (0..2 * d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let t = r.gen_range(0.5..2.0);
        let reach = t / (d as f64).sqrt();
        let y: Vec<f64> = (0..d).map(|i| x[i] + reach * r.gen_range(-margin..margin)).collect();
        (DistanceMapParams::new(Point(x), t).unwrap(), y, d)
    };
    for _ in 0..1000 {
        let (p, y, d) = draw(&mut r, 1.0);
        let g = ok(p.apply(&y))?;
        let direct = (0..d)
            .map(|i| (y[i] - p.x[i]).powi(2) + (g[i] - p.x[i + d]).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = (direct - p.t).abs() / p.t;
        worst[0] = worst[0].max(rel);
        ensure!(rel <= 1e-12, "distance identity off by {rel:e}");
    }
    let h = 1e-6;
    for _ in 0..100 {
        let (p, z, d) = draw(&mut r, 0.8);
        let jac = ok(p.jacobian(&z))?;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    ensure!(jac[(i, j)] == 0.0, "off-diagonal Jacobian entry");
                }
            }
            let fd = (ok(p.component(i, z[i] + h))? - ok(p.component(i, z[i] - h))?) / (2.0 * h);
            let err = (fd - jac[(i, i)]).abs();
            worst[1] = worst[1].max(err);
            ensure!(err < 1e-6, "Jacobian vs central difference: {err:e}");
        }
        let eig = SymmetricEigen::new(jac.transpose() * &jac);
        let oracle = eig.eigenvalues.max().sqrt();
        let err = (ok(p.operator_norm(&z))? - oracle).abs();
        worst[2] = worst[2].max(err);
        ensure!(err < 1e-12, "operator norm vs eigensolve: {err:e}");
    }
    for _ in 0..100 {
        let d = r.gen_range(1..=3usize);
        let x: Vec<f64> = (0..2 * d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let t = r.gen_range(0.5..2.0);
        let reach = t / (d as f64).sqrt();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for &xi in &x[..d] {
            let u = r.gen_range(-0.95..0.9);
            let v = r.gen_range(u + 1e-3..0.95);
            a.push(xi + reach * u);
            b.push(xi + reach * v);
        }
        let p = ok(DistanceMapParams::new(Point(x.clone()), t))?;
        let z = ok(p.mvt_witness(&a, &b))?;
        let s2 = t * t / d as f64;
        let g = |i: usize, y: f64| x[i + d] + (s2 - (x[i] - y).powi(2)).sqrt();
        for i in 0..d {
            ensure!(a[i] < z[i] && z[i] < b[i], "witness outside the box");
            let slope = (x[i] - z[i]) / (s2 - (x[i] - z[i]).powi(2)).sqrt();
            let res = ((b[i] - a[i]) * slope - (g(i, b[i]) - g(i, a[i]))).abs();
            worst[3] = worst[3].max(res);
            ensure!(res < 1e-10, "MVT residual {res:e}");
        }
    }
    Ok(format!(
        "max errors: identity {:.1e}, jacobian {:.1e}, op-norm {:.1e}, mvt {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn run_cli(args: &[&str]) -> (i32, Value, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = thickset::cli::run(std::iter::once("thickset").chain(args.iter().copied()), &mut out, &mut err);
    let json = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, json, String::from_utf8_lossy(&err).into_owned())
}

fn pinned_certification() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let thick = dir.path().join("thick.json");
    let thin = dir.path().join("thin.json");
    ok(std::fs::write(&thick, r#"{"kind": "cantor1D", "ratio": 0.4, "depth": 10}"#))?;
    ok(std::fs::write(&thin, r#"{"kind": "cantor1D", "ratio": 0.3333333333333333, "depth": 10}"#))?;
    let res = format!("{}", 4.0 * 0.4f64.powi(10));
    let thick = thick.to_str().unwrap();
    let (code, report, err) = run_cli(&[
        "pinned-distance", "--spec1", thick, "--spec2", thick, "--pin", "0,0", "--resolution", &res,
        "--min-extent", "0.05", "--summary-only", "--falsify-hard",
    ]);
    ensure!(code == 0, "thick pair exit {code}: {err}");
    let cert = &report["certificate"];
    ensure!(cert["covered"] == Value::Bool(true), "thick pair not covered: {cert}");
    let (lo, hi) = (cert["region"]["lo"].as_f64().unwrap(), cert["region"]["hi"].as_f64().unwrap());

    let res_thin = format!("{}", 4.0 * (1.0f64 / 3.0).powi(10));
    let thin = thin.to_str().unwrap();
    let (code, report, err) = run_cli(&[
        "pinned-distance", "--spec1", thin, "--spec2", thin, "--pin", "0,0", "--resolution", &res_thin,
        "--min-extent", "0.05", "--summary-only", "--falsify-hard",
    ]);
    ensure!(code == 2, "thin pair exit {code}, expected hypothesis-not-met");
    ensure!(report["hypothesis_met"] == Value::Bool(false), "thin pair claims the hypothesis");
    ensure!(err.contains("condition not satisfied"), "thin pair message: {err}");
    Ok(format!("covered interval [{lo:.4}, {hi:.4}] (length {:.4}); thin pair gated", hi - lo))
}

fn neighborhood_intersection() -> Check {
    let c = FractalSpec::cantor(0.4, 10);
    let radius = 0.4f64.powi(8);
    let res = 4.0 * 0.4f64.powi(10);
    let pin = Point(vec![0.0, 0.0]);
    let cert = ok(pinned_intersection_over_neighborhood(&c, &c, &pin, radius, 5, res, 0.02, SampleLimit::unlimited()))?;
    ensure!(cert.pins.len() == 5, "only {} pins in the neighbourhood", cert.pins.len());
    ensure!(cert.pins.iter().all(|p| p.dist(&pin) <= radius + 1e-12), "pin outside the radius");
    let model = ok(build_approx(&c))?;
    for p in &cert.pins {
        let (a, b) = ok(p.split_half())?;
        ensure!(model.covers(&a, 0.0) && model.covers(&b, 0.0), "pin {p:?} outside the cells");
    }
    let CoverageRegion::Interval { lo, hi } = cert.region else {
        return Err("expected an interval".into());
    };
    ensure!(cert.covered && hi - lo >= 0.02, "common interval [{lo}, {hi}] too short");
    Ok(format!("common interval [{lo:.4}, {hi:.4}] over 5 pins"))
}

fn pinned_tree_certification() -> Check {
    let c = FractalSpec::cantor(0.4, 6);
    let pin = Point(vec![0.0, 0.0]);
    let limit = SampleLimit { cap: 100_000, subsample: true };
    let chain = ok(TreeGraph::chain(2))?;
    let set = ok(tree_distance_set(&c, &c, &chain, &pin, limit, DistinctMode::AllPairs))?;
    ensure!(set.source.subsampling.is_some(), "expected subsampling at this size");
    let cert = ok(certify_coverage(&set, 0.01, 0.02))?;
    ensure!(cert.covered, "no certified box: {:?}", cert.region);
    ensure!(cert.region.extent() >= 0.02 - 1e-12, "box edge {}", cert.region.extent());

    let one = ok(tree_distance_set(&c, &c, &ok(TreeGraph::chain(1))?, &pin, limit, DistinctMode::AllPairs))?;
    let pinned = ok(pinned_distance_set(&c, &c, &pin, SampleLimit::unlimited()))?;
    let DistanceValues::Vector { values, .. } = &one.values else {
        return Err("expected vectors".into());
    };
    let flat: Vec<f64> = values.iter().map(|v| v[0]).collect();
    ensure!(flat.as_slice() == pinned.scalars().unwrap(), "one-edge tree differs from the pinned set");
    let CoverageRegion::Box { region } = &cert.region else {
        return Err("expected a box".into());
    };
    Ok(format!(
        "{} samples; box [{:.3},{:.3}]x[{:.3},{:.3}]; base case equal on {} values",
        set.values.len(),
        region.lo[0],
        region.hi[0],
        region.lo[1],
        region.hi[1],
        flat.len()
    ))
}

fn normalization_invariance() -> Check {
    let k1 = FractalKind::CarpetA { n: 3, d: 2 };
    let k2 = FractalKind::CarpetB { n: 5, d: 2 };
    let s1 = FractalSpec::new(k1.clone(), 2);
    let s2 = FractalSpec::new(k2.clone(), 1);
    let (a, b) = (ok(build_approx(&s1))?, ok(build_approx(&s2))?);
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p1 = a.exact_points.choose(&mut r).unwrap().clone();
        let p2 = b.exact_points.choose(&mut r).unwrap().clone();
        let u1 = loop {
            let u = a.exact_points.choose(&mut r).unwrap();
            if *u != p1 {
                break u.clone();
            }
        };
        let u2 = loop {
            let u = b.exact_points.choose(&mut r).unwrap();
            if *u != p2 {
                break u.clone();
            }
        };
        let pin = p1.concat(&p2);
        let (m1, m2) = ok(normalize_pair(&pin, &u1, &u2))?;
        for m in [&m1, &m2] {
            let rtr = m.rotation.transpose() * &m.rotation - DMatrix::identity(2, 2);
            ensure!(rtr.amax() < 1e-12, "rotation not orthogonal: {}", rtr.amax());
            ensure!((m.rotation.determinant() - 1.0).abs() < 1e-12, "determinant {}", m.rotation.determinant());
        }
        let w1 = m1.apply(&u1);
        ensure!((w1[0] - w1[1]).abs() < 1e-12 && m1.apply(&p1).norm() < 1e-12, "u1 not sent to the diagonal");
        let t1 = FractalSpec::new(FractalKind::AffineImage { base: Box::new(k1.clone()), map: m1 }, 2);
        let t2 = FractalSpec::new(FractalKind::AffineImage { base: Box::new(k2.clone()), map: m2 }, 1);
        let before = ok(pinned_distance_set(&s1, &s2, &pin, SampleLimit::unlimited()))?;
        let after = ok(pinned_distance_set(&t1, &t2, &Point::zeros(4), SampleLimit::unlimited()))?;
        let (x, y) = (before.scalars().unwrap(), after.scalars().unwrap());
        ensure!(x.len() == y.len(), "multiset sizes differ: {} vs {}", x.len(), y.len());
        for (p, q) in x.iter().zip(y) {
            worst = worst.max((p - q).abs());
        }
        ensure!(worst <= 1e-12, "sorted distances differ by {worst:e}");
    }
    Ok(format!("20 draws, max deviation {worst:.1e}"))
}

fn bound_formulas() -> Check {
    let floor = ok(compute_bounds(2, None, None))?.thickness_floor;
    let expected = 2.0 * (1.0 + 2f64.ln() / 3f64.ln());
    ensure!((floor - expected).abs() < 1e-9, "floor {floor} vs {expected}");
    ensure!((floor - 3.261859).abs() < 1e-6, "floor {floor} vs 3.261859");
    let grid: Vec<f64> = (0..100).map(|k| 0.05 * 1.07f64.powi(k)).collect();
    let vals = grid.iter().map(|&t| tau_bound(2, t)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    ensure!(vals.windows(2).all(|w| w[0] < w[1]), "tau bound not increasing");
    // Independent scan of the hypothesis with the constant recomputed here.
    let k2 = ((24.0 * 2f64.sqrt()).powi(2) * (1.0 + 16.0 * 2.0) / 0.75).powi(2);
    for beta in [0.25, 0.5, 0.75] {
        let app = ok(large_thickness_applicability(2, 1.5, beta))?;
        ensure!(app.qualifying_c.is_none(), "beta {beta}: reported c = {:?}", app.qualifying_c);
        let any = (1..=1000).map(|j| 2.0 * j as f64 / 1001.0).any(|c| {
            1.5f64.powf(-c) <= beta.powf(c) * (1.0 - beta.powf(2.0 - c)) / k2
        });
        ensure!(!any, "independent scan finds a qualifying c at beta {beta}");
    }
    Ok(format!("floor {floor:.9}; tau bound increasing on 100 points; no qualifying c at tau = 1.5"))
}

fn sequence_table() -> Check {
    let ns = [101u64, 1001, 100_001, 1_000_001];
    let rows = ok(carpet_sequence_table(2, &ns))?;
    for row in &rows {
        ensure!(row.condition_holds, "condition fails at n = {}", row.n);
        let n = row.n as f64;
        let m = row.m_n as f64;
        let dim_a = (n * n - 1.0).ln() / n.ln();
        let dim_b = (m * m - (m - 2.0) * (m - 2.0)).ln() / m.ln();
        ensure!((row.dim_a - dim_a).abs() < 1e-12, "dimA at n = {}: {} vs {dim_a}", row.n, row.dim_a);
        ensure!((row.dim_b - dim_b).abs() < 1e-12, "dimB at n = {}: {} vs {dim_b}", row.n, row.dim_b);
    }
    ensure!(rows.windows(2).all(|w| w[1].dim_sum < w[0].dim_sum), "dim_sum not strictly decreasing");
    let last = rows.last().unwrap().dim_sum;
    ensure!(last - 3.0 < 0.12, "dim_sum at n = 10^6 + 1 is {last}");
    Ok(format!("dim_sum {:?}", rows.iter().map(|r| format!("{:.4}", r.dim_sum)).collect::<Vec<_>>()))
}

fn hyperplane_degeneracy() -> Check {
    let mut r = rng(13);
    let mut count = 0;
    for k in 0..6 {
        let gaps = random_dyadic_gaps(&mut r);
        let ambient = 2 + k % 2;
        let embedded = FractalKind::Embedded {
            base: Box::new(FractalKind::CantorGaps { gaps }),
            ambient_dim: ambient,
        };
        let kind = if ambient == 2 && k % 4 == 0 {
            FractalKind::AffineImage {
                base: Box::new(embedded),
                map: ok(AffineMap::new(rotation2(0.4 + k as f64), Point(vec![0.3, 0.1])))?,
            }
        } else {
            embedded
        };
        let spec = FractalSpec::new(kind, 0);
        let tau = ok(thickness_of(&spec))?;
        ensure!(tau == 0.0, "collapsed set {k} has thickness {tau}");
        let points = ok(build_approx(&spec))?.exact_points;
        ensure!(ok(hyperplane_thickness_check(&points, 1e-12))?, "detector silent on collapsed set {k}");
        count += 1;
    }
    let solid = ok(build_approx(&FractalSpec::carpet_a(3, 2, 1)))?.exact_points;
    ensure!(!ok(hyperplane_thickness_check(&solid, 1e-12))?, "detector fires on a genuine carpet");
    Ok(format!("{count} collapsed sets: thickness 0, detector fired; control carpet not flagged"))
}

type Criterion = (u32, &'static str, u64, fn() -> Check);

const CRITERIA: &[Criterion] = &[
    (1, "carpet thickness closed forms", 5, thickness_closed_forms),
    (2, "cantor thickness vs brute-force oracle", 2, cantor_oracle),
    (3, "ordered and larger-or-equal forms agree", 5, lambda_form_equivalence),
    (4, "epsilon-thickness monotone and convergent", 1, epsilon_properties),
    (5, "gap lemma soundness on random pairs", 30, gap_lemma_soundness),
    (6, "distance-map calculus", 5, distance_map_calculus),
    (7, "pinned interval certification", 60, pinned_certification),
    (8, "neighbourhood intersection of pinned sets", 120, neighborhood_intersection),
    (9, "pinned tree certification", 120, pinned_tree_certification),
    (10, "normalization invariance", 5, normalization_invariance),
    (11, "dimension bound formulas", 1, bound_formulas),
    (12, "carpet sequence table", 1, sequence_table),
    (13, "hyperplane degeneracy", 1, hyperplane_degeneracy),
];

fn main() {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for &(id, name, budget, check) in CRITERIA {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let within = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match outcome {
            Ok(d) if within => (true, d),
            Ok(d) => (false, format!("over budget; {d}")),
            Err(e) => (false, e),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{id:>2}] {name} ({:.2} s / {budget} s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
