//! Uniform grid over boxes, used for nearest-box and box-overlap queries.

use crate::geometry::BoxRegion;

/// Total grid cells are capped so tiny boxes cannot blow up memory.
const MAX_GRID_CELLS: f64 = (1u64 << 20) as f64;

pub(crate) struct GridIndex {
    dim: usize,
    origin: Vec<f64>,
    cell: f64,
    shape: Vec<i64>,
    buckets: Vec<Vec<u32>>,
}

impl GridIndex {
    /// Grid covering `bounds` whose cells have edge roughly `hint`.
    pub(crate) fn new(bounds: &BoxRegion, hint: f64) -> Self {
        let dim = bounds.dim();
        let extent = (0..dim)
            .map(|i| bounds.hi[i] - bounds.lo[i])
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let per_axis = MAX_GRID_CELLS.powf(1.0 / dim.max(1) as f64).floor().max(1.0);
        let mut cell = if hint.is_finite() && hint > 0.0 { hint } else { extent };
        cell = cell.max(extent / per_axis);
        let shape: Vec<i64> = (0..dim)
            .map(|i| (((bounds.hi[i] - bounds.lo[i]) / cell).floor() as i64 + 1).max(1))
            .collect();
        let total = shape.iter().product::<i64>() as usize;
        Self {
            dim,
            origin: bounds.lo.0.clone(),
            cell,
            shape,
            buckets: vec![Vec::new(); total],
        }
    }

    #[inline]
    fn axis_cell(&self, i: usize, x: f64) -> i64 {
        (((x - self.origin[i]) / self.cell).floor() as i64).clamp(0, self.shape[i] - 1)
    }

    fn cell_range(&self, b: &BoxRegion) -> (Vec<i64>, Vec<i64>) {
        let lo = (0..self.dim).map(|i| self.axis_cell(i, b.lo[i])).collect();
        let hi = (0..self.dim).map(|i| self.axis_cell(i, b.hi[i])).collect();
        (lo, hi)
    }

    fn flat(&self, c: &[i64]) -> usize {
        let mut idx = 0i64;
        for i in 0..self.dim {
            idx = idx * self.shape[i] + c[i];
        }
        idx as usize
    }

    /// Calls `f` on every cell index in the closed range `[lo, hi]`.
    fn for_each_cell(&self, lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return;
        }
        let mut c = lo.to_vec();
        loop {
            f(&c);
            let mut i = self.dim;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if c[i] < hi[i] {
                    c[i] += 1;
                    break;
                }
                c[i] = lo[i];
            }
        }
    }

    pub(crate) fn insert(&mut self, id: usize, b: &BoxRegion) {
        let (lo, hi) = self.cell_range(b);
        let mut cells = Vec::new();
        self.for_each_cell(&lo, &hi, |c| cells.push(self.flat(c)));
        for k in cells {
            self.buckets[k].push(id as u32);
        }
    }

    /// Nearest indexed box to `query` with distance strictly below `bound`,
    /// ignoring `exclude`. Ties go to the smallest id.
    pub(crate) fn nearest(
        &self,
        boxes: &[BoxRegion],
        query: &BoxRegion,
        exclude: Option<usize>,
        bound: f64,
    ) -> Option<(f64, usize)> {
        let (qlo, qhi) = self.cell_range(query);
        let max_ring = (0..self.dim)
            .map(|i| qlo[i].max(self.shape[i] - 1 - qhi[i]))
            .max()
            .unwrap_or(0);
        let mut best: Option<(f64, usize)> = None;
        let mut best_d = bound;
        for r in 0..=max_ring {
            // Boxes first met in ring r are at least (r - 1) cells away.
            if r >= 1 && (r - 1) as f64 * self.cell > best_d {
                break;
            }
            let lo: Vec<i64> = qlo.iter().map(|c| c - r).collect();
            let hi: Vec<i64> = qhi.iter().map(|c| c + r).collect();
            let clo: Vec<i64> = lo.iter().map(|c| (*c).max(0)).collect();
            let chi: Vec<i64> = (0..self.dim).map(|i| hi[i].min(self.shape[i] - 1)).collect();
            self.for_each_cell(&clo, &chi, |c| {
                let on_shell = r == 0 || (0..self.dim).any(|i| c[i] == lo[i] || c[i] == hi[i]);
                if !on_shell {
                    return;
                }
                for &id in &self.buckets[self.flat(c)] {
                    let id = id as usize;
                    if Some(id) == exclude {
                        continue;
                    }
                    let dist = query.distance_unchecked(&boxes[id]);
                    let better = match best {
                        None => dist < best_d,
                        Some((bd, bi)) => dist < bd || (dist == bd && id < bi),
                    };
                    if better {
                        best = Some((dist, id));
                        best_d = dist;
                    }
                }
            });
        }
        best
    }

    /// Smallest id among indexed boxes meeting the closed box `query`.
    pub(crate) fn first_intersecting(&self, boxes: &[BoxRegion], query: &BoxRegion) -> Option<usize> {
        let (lo, hi) = self.cell_range(query);
        let mut found: Option<usize> = None;
        self.for_each_cell(&lo, &hi, |c| {
            for &id in &self.buckets[self.flat(c)] {
                let id = id as usize;
                if found.is_some_and(|f| f <= id) {
                    continue;
                }
                if boxes[id].intersects(query) {
                    found = Some(id);
                }
            }
        });
        found
    }

    /// Whether some indexed box contains `p` up to `tol`.
    pub(crate) fn contains_point(&self, boxes: &[BoxRegion], p: &[f64], tol: f64) -> bool {
        let probe = BoxRegion::from_raw(
            p.iter().map(|x| x - tol).collect(),
            p.iter().map(|x| x + tol).collect(),
        );
        let (lo, hi) = self.cell_range(&probe);
        let mut hit = false;
        self.for_each_cell(&lo, &hi, |c| {
            if !hit {
                hit = self.buckets[self.flat(c)]
                    .iter()
                    .any(|&id| boxes[id as usize].contains_point(p, tol));
            }
        });
        hit
    }
}

/// Bounding box of a non-empty box list.
pub(crate) fn bounding_box(boxes: &[BoxRegion]) -> Option<BoxRegion> {
    let first = boxes.first()?;
    let mut lo = first.lo.0.clone();
    let mut hi = first.hi.0.clone();
    for b in &boxes[1..] {
        for i in 0..lo.len() {
            lo[i] = lo[i].min(b.lo[i]);
            hi[i] = hi[i].max(b.hi[i]);
        }
    }
    Some(BoxRegion::from_raw(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_box() -> impl Strategy<Value = BoxRegion> {
        (0.0..1.0f64, 0.0..1.0f64, 0.0..0.2f64, 0.0..0.2f64).prop_map(|(x, y, w, h)| {
            BoxRegion::from_raw(vec![x, y], vec![x + w, y + h])
        })
    }

    proptest! {
        #[test]
        fn nearest_matches_scan(
            boxes in prop::collection::vec(arb_box(), 1..40),
            q in arb_box(),
            hint in 0.01..0.5f64,
        ) {
            let bounds = bounding_box(&boxes).unwrap();
            let mut index = GridIndex::new(&bounds, hint);
            for (i, b) in boxes.iter().enumerate() {
                index.insert(i, b);
            }
            let got = index.nearest(&boxes, &q, None, f64::INFINITY).unwrap();
            let want = boxes
                .iter()
                .map(|b| q.distance_unchecked(b))
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(got.0, want);

            let first = boxes.iter().position(|b| b.intersects(&q));
            prop_assert_eq!(index.first_intersecting(&boxes, &q), first);
        }
    }
}
