//! Pinned tree distance sets: vectors of edge lengths over assignments of
//! product points to the vertices of a tree, one vertex held at the pin.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::sets::{
    pair_seed, product_distance, DistanceSampleSet, DistanceValues, ProductModel, Provenance, Subsampling, ZERO_TOL,
};
use crate::error::{Error, Result};
use crate::fractal::{FractalSpec, SampleLimit};
use crate::geometry::Point;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RawTree {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    pin: usize,
}

/// Tree on vertices `1..=vertices`. Edges are stored canonically: each as
/// `[small, large]`, the list sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTree", into = "RawTree")]
pub struct TreeGraph {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    pin: usize,
}

impl TryFrom<RawTree> for TreeGraph {
    type Error = Error;

    fn try_from(raw: RawTree) -> Result<Self> {
        TreeGraph::new(raw.vertices, raw.edges, raw.pin)
    }
}

impl From<TreeGraph> for RawTree {
    fn from(t: TreeGraph) -> Self {
        RawTree {
            vertices: t.vertices,
            edges: t.edges,
            pin: t.pin,
        }
    }
}

impl TreeGraph {
    pub fn new(vertices: usize, edges: Vec<[usize; 2]>, pin: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if vertices < 2 {
            return bad(format!("a tree needs at least 2 vertices, got {vertices}"));
        }
        if edges.len() != vertices - 1 {
            return bad(format!("{vertices} vertices need {} edges, got {}", vertices - 1, edges.len()));
        }
        if !(1..=vertices).contains(&pin) {
            return bad(format!("pin vertex {pin} outside 1..={vertices}"));
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for [a, b] in edges {
            if !(1..=vertices).contains(&a) || !(1..=vertices).contains(&b) {
                return bad(format!("edge [{a}, {b}] has a vertex outside 1..={vertices}"));
            }
            if a == b {
                return bad(format!("self-loop at vertex {a}"));
            }
            canonical.push([a.min(b), a.max(b)]);
        }
        canonical.sort_unstable();
        if canonical.windows(2).any(|w| w[0] == w[1]) {
            return bad("repeated edge".into());
        }
        let tree = Self {
            vertices,
            edges: canonical,
            pin,
        };
        if tree.reachable_from(pin).len() != vertices {
            return bad("graph is not connected".into());
        }
        Ok(tree)
    }

    /// Path `1 - 2 - ... - (k+1)` pinned at vertex 1.
    pub fn chain(k: usize) -> Result<Self> {
        Self::new(k + 1, (1..=k).map(|i| [i, i + 1]).collect(), 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn pin(&self) -> usize {
        self.pin
    }

    fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&[a, b]| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    fn reachable_from(&self, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in self.neighbours(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Repeatedly removes the smallest leaf other than the pin. Each entry is
    /// `(leaf, parent)`; reversing the list rebuilds the tree from the pin.
    pub fn leaf_removal_order(&self) -> Vec<(usize, usize)> {
        let mut edges = self.edges.clone();
        let mut order = Vec::with_capacity(edges.len());
        while !edges.is_empty() {
            let degree = |v: usize, es: &[[usize; 2]]| es.iter().filter(|e| e.contains(&v)).count();
            let leaf = (1..=self.vertices)
                .filter(|&v| v != self.pin && degree(v, &edges) == 1)
                .min()
                .expect("a finite tree with edges has two leaves");
            let k = edges.iter().position(|e| e.contains(&leaf)).expect("leaf has an edge");
            let [a, b] = edges.remove(k);
            order.push((leaf, if a == leaf { b } else { a }));
        }
        order
    }
}

/// Which vertex pairs must be assigned different points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistinctMode {
    #[default]
    AllPairs,
    Adjacent,
}

/// Rejection budget per requested random assignment.
const ATTEMPTS_PER_SAMPLE: usize = 20;

/// Edge-length vectors of `tree` over assignments of exact product points,
/// with the pinned vertex at `pin`. Exhaustive when the number of
/// assignments is within `limit.cap`; otherwise `limit.cap` seeded random
/// assignments (when `limit.subsample`) and the subsampling is recorded.
/// Vectors are sorted lexicographically.
pub fn tree_distance_set(
    spec1: &FractalSpec,
    spec2: &FractalSpec,
    tree: &TreeGraph,
    pin: &Point,
    limit: SampleLimit,
    mode: DistinctMode,
) -> Result<DistanceSampleSet> {
    let model = ProductModel::build(spec1, spec2)?;
    let (p1, p2) = model.split(pin)?;
    let pin_exact = model.locate(pin)?.is_some();
    let nb = model.b.exact_points.len();
    let n = model.a.exact_points.len() * nb;
    if n == 0 {
        return Err(Error::EmptySamples);
    }

    // Assignment order: pin, then leaves in reverse removal order, so each
    // new vertex hangs off an already placed one.
    let removal = tree.leaf_removal_order();
    let mut slot_of = vec![usize::MAX; tree.vertices + 1];
    slot_of[tree.pin] = 0;
    for (k, &(leaf, _)) in removal.iter().rev().enumerate() {
        slot_of[leaf] = k + 1;
    }
    let k = removal.len();
    let edge_slots: Vec<[usize; 2]> = tree.edges.iter().map(|&[a, b]| [slot_of[a], slot_of[b]]).collect();
    let checked_pairs: Vec<[usize; 2]> = match mode {
        DistinctMode::Adjacent => edge_slots.clone(),
        DistinctMode::AllPairs => (0..=k).flat_map(|i| (i + 1..=k).map(move |j| [i, j])).collect(),
    };

    let point = |slot_idx: usize| -> (&[f64], &[f64]) {
        (&model.a.exact_points[slot_idx / nb], &model.b.exact_points[slot_idx % nb])
    };
    let blocks = |assign: &[usize], s: usize| -> (&[f64], &[f64]) {
        if s == 0 {
            (&p1, &p2)
        } else {
            point(assign[s - 1])
        }
    };
    let dist = |assign: &[usize], [s, t]: [usize; 2]| {
        let (a1, b1) = blocks(assign, s);
        let (a2, b2) = blocks(assign, t);
        product_distance(a1, b1, a2, b2)
    };
    let evaluate = |assign: &[usize]| -> Option<Vec<f64>> {
        if checked_pairs.iter().any(|&pair| dist(assign, pair) <= ZERO_TOL) {
            return None;
        }
        Some(edge_slots.iter().map(|&e| dist(assign, e)).collect())
    };

    let total = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    let tree_key = serde_json::to_string(tree).expect("tree serializes");
    let (seed, spec_hash) = pair_seed(spec1, spec2, pin, &format!("tree {tree_key} {mode:?}"));
    let mut values = Vec::new();
    let mut subsampling = None;
    if total <= limit.cap as u128 {
        let mut assign = vec![0usize; k];
        'outer: loop {
            values.extend(evaluate(&assign));
            for digit in assign.iter_mut().rev() {
                *digit += 1;
                if *digit < n {
                    continue 'outer;
                }
                *digit = 0;
            }
            break;
        }
    } else {
        if !limit.subsample {
            return Err(Error::SampleCapExceeded {
                count: total,
                cap: limit.cap,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assign = vec![0usize; k];
        let budget = limit.cap.saturating_mul(ATTEMPTS_PER_SAMPLE);
        for _ in 0..budget {
            if values.len() == limit.cap {
                break;
            }
            assign.iter_mut().for_each(|a| *a = rng.gen_range(0..n));
            values.extend(evaluate(&assign));
        }
        subsampling = Some(Subsampling {
            total,
            kept: values.len(),
            rule: "seeded random assignments".into(),
        });
    }
    values.sort_unstable_by(|a: &Vec<f64>, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(DistanceSampleSet {
        values: DistanceValues::Vector { dim: k, values },
        source: Provenance {
            spec1: spec1.clone(),
            spec2: spec2.clone(),
            pin: pin.clone(),
            pin_exact,
            tree: Some(tree.clone()),
            subsampling,
            spec_hash,
        },
    })
}
