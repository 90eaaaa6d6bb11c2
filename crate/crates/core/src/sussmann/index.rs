use rustc_hash::FxHashMap;

/// Odd multipliers for the linear cell key. Distinct cells may share a key;
/// that only adds candidates, which are distance-checked anyway.
const KEY_WEIGHTS: [u64; 8] = [
    0x9e37_79b9_7f4a_7c15,
    0xc2b2_ae3d_27d4_eb4f,
    0x1656_67b1_9e37_79f9,
    0x27d4_eb2f_1656_67c5,
    0x94d0_49bb_1331_11eb,
    0xbf58_476d_1ce4_e5b9,
    0xd6e8_feb8_6659_fd93,
    0xa076_1d64_78bd_642f,
];

/// Spatial hash over a flat point array with cubic cells of side `cell`.
/// Radius queries must use `r ≤ cell`, so only the 3^N surrounding cells
/// can hold matches; cells farther than `r` from the query are pruned.
#[derive(Clone, Debug)]
pub struct PointIndex {
    dim: usize,
    cell: f64,
    buckets: FxHashMap<u64, Vec<usize>>,
}

impl PointIndex {
    pub fn new(dim: usize, cell: f64) -> Self {
        PointIndex {
            dim,
            cell,
            buckets: FxHashMap::default(),
        }
    }

    fn weight(axis: usize) -> u64 {
        KEY_WEIGHTS[axis % KEY_WEIGHTS.len()].rotate_left(7 * (axis / KEY_WEIGHTS.len()) as u32)
    }

    fn cell_of(&self, v: f64) -> i64 {
        (v / self.cell).floor() as i64
    }

    fn key(&self, p: &[f64]) -> u64 {
        p.iter().enumerate().fold(0u64, |k, (a, &v)| {
            k.wrapping_add((self.cell_of(v) as u64).wrapping_mul(Self::weight(a)))
        })
    }

    pub fn insert(&mut self, p: &[f64], id: usize) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Nearest indexed point within `r` of `p`, as `(id, distance)`.
    pub fn nearest_within(&self, points: &[f64], p: &[f64], r: f64) -> Option<(usize, f64)> {
        self.nearest_within_excluding(points, p, r, usize::MAX)
    }

    /// As `nearest_within`, ignoring the point with id `skip`.
    pub fn nearest_within_excluding(&self, points: &[f64], p: &[f64], r: f64, skip: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.for_each_within(points, p, r, &mut |id, d2| {
            if id != skip && best.is_none_or(|(bi, bd)| d2 < bd || (d2 == bd && id < bi)) {
                best = Some((id, d2));
            }
        });
        best.map(|(i, d2)| (i, d2.sqrt()))
    }

    /// Ids of all indexed points within `r` of `p`, in increasing order.
    pub fn all_within(&self, points: &[f64], p: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(points, p, r, &mut |id, _| out.push(id));
        out.sort_unstable();
        out
    }

    fn for_each_within(&self, points: &[f64], p: &[f64], r: f64, f: &mut dyn FnMut(usize, f64)) {
        debug_assert!(r <= self.cell * (1.0 + 1e-12));
        // Squared distance from p to the slab of cell offset d ∈ {-1,0,1} per axis.
        let gaps: Vec<[f64; 3]> = (0..self.dim)
            .map(|a| {
                let lo = self.cell_of(p[a]) as f64 * self.cell;
                [p[a] - lo, 0.0, lo + self.cell - p[a]].map(|g| g * g)
            })
            .collect();
        let q = Query {
            r2: r * r,
            gaps: &gaps,
            points,
            p,
        };
        self.visit(0, 0.0, self.key(p), &q, f);
    }

    fn visit(&self, axis: usize, acc: f64, key: u64, q: &Query, f: &mut dyn FnMut(usize, f64)) {
        if axis == self.dim {
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    let pt = &q.points[id * self.dim..(id + 1) * self.dim];
                    let d2: f64 = pt.iter().zip(q.p).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 <= q.r2 {
                        f(id, d2);
                    }
                }
            }
            return;
        }
        let w = Self::weight(axis);
        for (slot, offset) in [-1i64, 0, 1].iter().enumerate() {
            let a = acc + q.gaps[axis][slot];
            if a <= q.r2 {
                let k = key.wrapping_add((*offset as u64).wrapping_mul(w));
                self.visit(axis + 1, a, k, q, f);
            }
        }
    }
}

struct Query<'a> {
    r2: f64,
    gaps: &'a [[f64; 3]],
    points: &'a [f64],
    p: &'a [f64],
}
