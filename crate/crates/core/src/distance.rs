//! Point-cloud intrinsic distances: kNN graphs, shortest paths and the
//! empirical 2-point constant.

use crate::conifold::{ct_point, feps_conormal};
use crate::conormal::{ConormalCoords, FramedKnot};
use crate::error::{GeomError, Result};
use crate::sample::{Axis, GridSpec};
use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

pub fn chord(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sampled points with a symmetric kNN graph weighted by chordal distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMesh {
    pub params: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    /// Sorted by neighbor index.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    pub component: Vec<usize>,
    pub components: usize,
}

impl SampleMesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn ambient_distance(&self, i: usize, j: usize) -> f64 {
        chord(&self.points[i], &self.points[j])
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Near(f64, usize);

impl Eq for Near {}

impl PartialOrd for Near {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Near {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// k nearest other points of every point (ties broken by index), by a sweep
/// along the coordinate of largest spread.
pub fn knn(points: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let dim = points.first().map_or(0, Vec::len);
    let axis = (0..dim)
        .map(|a| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[a]), h.max(p[a])));
            (hi - lo, a)
        })
        .fold((f64::NEG_INFINITY, 0), |best, c| if c.0 > best.0 { c } else { best })
        .1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| points[i][axis].total_cmp(&points[j][axis]).then(i.cmp(&j)));
    let mut out = alloc::vec![Vec::new(); n];
    for (pos, &i) in order.iter().enumerate() {
        let mut heap: BinaryHeap<Near> = BinaryHeap::with_capacity(k + 1);
        let x = points[i][axis];
        let bound = |heap: &BinaryHeap<Near>| if heap.len() < k { f64::INFINITY } else { heap.peek().map_or(f64::INFINITY, |w| w.0) };
        let consider = |j: usize, heap: &mut BinaryHeap<Near>| {
            // squared distance with early exit once it exceeds the current k-th
            let limit = bound(heap);
            let limit2 = limit * limit;
            let mut d2 = 0.0;
            for (a, b) in points[i].iter().zip(&points[j]) {
                d2 += (a - b) * (a - b);
                if d2 > limit2 {
                    return;
                }
            }
            heap.push(Near(d2.sqrt(), j));
            if heap.len() > k {
                heap.pop();
            }
        };
        let (mut lo, mut hi) = (pos, pos + 1);
        loop {
            let gl = if lo > 0 { x - points[order[lo - 1]][axis] } else { f64::INFINITY };
            let gh = if hi < n { points[order[hi]][axis] - x } else { f64::INFINITY };
            let g = gl.min(gh);
            if g == f64::INFINITY || g > bound(&heap) {
                break;
            }
            if gl <= gh {
                lo -= 1;
                consider(order[lo], &mut heap);
            } else {
                consider(order[hi], &mut heap);
                hi += 1;
            }
        }
        let mut v: Vec<Near> = heap.into_vec();
        v.sort();
        out[i] = v.into_iter().map(|w| w.1).collect();
    }
    out
}

/// kNN graph over `points`; `params` are carried along for export.
pub fn build_mesh(params: Vec<Vec<f64>>, points: Vec<Vec<f64>>, k: usize) -> Result<SampleMesh> {
    if points.is_empty() {
        return Err(GeomError::Parameter("cannot build a mesh from an empty grid".into()));
    }
    if params.len() != points.len() {
        return Err(GeomError::Usage("params and points differ in length".into()));
    }
    if k == 0 {
        return Err(GeomError::Parameter("neighbor count must be positive".into()));
    }
    let n = points.len();
    let near = knn(&points, k);
    let mut neighbors: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n];
    for (i, list) in near.iter().enumerate() {
        for &j in list {
            let d = chord(&points[i], &points[j]);
            neighbors[i].push((j, d));
            neighbors[j].push((i, d));
        }
    }
    for list in &mut neighbors {
        list.sort_by(|a, b| a.0.cmp(&b.0));
        list.dedup_by_key(|e| e.0);
    }
    let mut component = alloc::vec![usize::MAX; n];
    let mut components = 0;
    for s in 0..n {
        if component[s] != usize::MAX {
            continue;
        }
        let mut stack = alloc::vec![s];
        component[s] = components;
        while let Some(v) = stack.pop() {
            for &(w, _) in &neighbors[v] {
                if component[w] == usize::MAX {
                    component[w] = components;
                    stack.push(w);
                }
            }
        }
        components += 1;
    }
    Ok(SampleMesh { params, points, neighbors, component, components })
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Single-source graph distances up to `limit` (∞ beyond it or when
/// unreachable), with predecessors.
pub fn dijkstra(mesh: &SampleMesh, source: usize, limit: f64) -> (Vec<f64>, Vec<usize>) {
    let n = mesh.len();
    let mut dist = alloc::vec![f64::INFINITY; n];
    let mut prev = alloc::vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Item(0.0, source));
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &mesh.neighbors[v] {
            let nd = d + len;
            if nd < dist[w] && nd <= limit {
                dist[w] = nd;
                prev[w] = v;
                heap.push(Item(nd, w));
            }
        }
    }
    (dist, prev)
}

/// Shortest-path distance; ∞ for vertices in different components.
pub fn intrinsic_distance(mesh: &SampleMesh, i: usize, j: usize) -> f64 {
    if mesh.component[i] != mesh.component[j] {
        return f64::INFINITY;
    }
    dijkstra(mesh, i, f64::INFINITY).0[j]
}

pub fn shortest_path(mesh: &SampleMesh, i: usize, j: usize) -> Option<Vec<usize>> {
    if mesh.component[i] != mesh.component[j] {
        return None;
    }
    let (_, prev) = dijkstra(mesh, i, f64::INFINITY);
    let mut path = alloc::vec![j];
    let mut v = j;
    while v != i {
        v = prev[v];
        path.push(v);
    }
    path.reverse();
    Some(path)
}

pub fn path_length(points: &[Vec<f64>]) -> f64 {
    points.windows(2).map(|w| chord(&w[0], &w[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub intrinsic: f64,
    pub ambient: f64,
    pub ratio: f64,
}

fn witness_order(a: &Witness, b: &Witness) -> Ordering {
    b.ratio.total_cmp(&a.ratio).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j))
}

pub const WITNESS_COUNT: usize = 10;

/// Empirical 2-point constant: max dist^L/dist^M over pairs with
/// dist^M < ρ, the number of such pairs and the largest ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPoint {
    pub constant: f64,
    pub pairs: usize,
    /// Qualifying pairs the truncated search did not reach.
    pub unreached: usize,
    pub witnesses: Vec<Witness>,
}

impl TwoPoint {
    pub fn empty() -> Self {
        Self { constant: 0.0, pairs: 0, unreached: 0, witnesses: Vec::new() }
    }

    pub fn push(&mut self, w: Witness) {
        self.pairs += 1;
        if !w.intrinsic.is_finite() {
            self.unreached += 1;
        }
        if w.ratio > self.constant {
            self.constant = w.ratio;
        }
        let at = self.witnesses.partition_point(|x| witness_order(x, &w) == Ordering::Less);
        if at < WITNESS_COUNT {
            self.witnesses.insert(at, w);
            self.witnesses.truncate(WITNESS_COUNT);
        }
    }

    /// Order-independent merge.
    pub fn merge(mut self, other: Self) -> Self {
        self.pairs += other.pairs;
        self.unreached += other.unreached;
        self.constant = self.constant.max(other.constant);
        self.witnesses.extend(other.witnesses);
        self.witnesses.sort_by(witness_order);
        self.witnesses.truncate(WITNESS_COUNT);
        self
    }
}

/// Pairs (source, j), j > source, with dist^M < ρ. Graph search stops at
/// `cutoff`·ρ; pairs beyond it get an infinite ratio.
pub fn two_point_from(mesh: &SampleMesh, source: usize, rho: f64, cutoff: f64) -> TwoPoint {
    let (dist, _) = dijkstra(mesh, source, cutoff * rho);
    let mut out = TwoPoint::empty();
    for j in (source + 1)..mesh.len() {
        let dm = mesh.ambient_distance(source, j);
        if dm < rho && dm > 0.0 {
            let dl = dist[j];
            out.push(Witness { i: source, j, intrinsic: dl, ambient: dm, ratio: dl / dm });
        }
    }
    out
}

pub fn two_point_scan<I: IntoIterator<Item = usize>>(mesh: &SampleMesh, rho: f64, cutoff: f64, sources: I) -> Result<TwoPoint> {
    if !(rho > 0.0) {
        return Err(GeomError::Parameter(format!("rho must be positive, got {rho}")));
    }
    let out = sources
        .into_iter()
        .map(|s| two_point_from(mesh, s, rho, cutoff))
        .fold(TwoPoint::empty(), TwoPoint::merge);
    check_pairs(out, rho)
}

pub fn check_pairs(out: TwoPoint, rho: f64) -> Result<TwoPoint> {
    if out.pairs == 0 {
        return Err(GeomError::Parameter(format!("no pairs closer than rho = {rho}; try a larger rho")));
    }
    Ok(out)
}

/// n points on the unit circle.
pub fn circle_fixture(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (0..n)
        .map(|i| {
            let t = core::f64::consts::TAU * i as f64 / n as f64;
            (alloc::vec![t], alloc::vec![t.cos(), t.sin()])
        })
        .unzip()
}

/// Graph of y = sin(πeˣ) between its zeros ln n and ln(n+1), widened by one
/// hump on each side, sampled at arclength spacing ≈ `spacing`. Returns the
/// sample and the indices of the two zeros.
pub fn sine_exp_fixture(n: usize, spacing: f64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, usize, usize)> {
    if n < 2 || !(spacing > 0.0) {
        return Err(GeomError::Parameter("need n ≥ 2 and positive spacing".into()));
    }
    let f = |x: f64| (core::f64::consts::PI * x.exp()).sin();
    let df = |x: f64| core::f64::consts::PI * x.exp() * (core::f64::consts::PI * x.exp()).cos();
    let zeros: Vec<f64> = ((n - 1)..=(n + 2)).map(|k| (k as f64).ln()).collect();
    let (mut params, mut points) = (Vec::new(), Vec::new());
    let mut marks = [0usize; 2];
    for (s, seg) in zeros.windows(2).enumerate() {
        // cumulative arclength on a fine grid, then inverse interpolation
        let fine = 4000;
        let h = (seg[1] - seg[0]) / fine as f64;
        let mut cum = alloc::vec![0.0; fine + 1];
        for i in 0..fine {
            let (a, b) = (seg[0] + i as f64 * h, seg[0] + (i + 1) as f64 * h);
            let mid = 0.5 * (a + b);
            cum[i + 1] = cum[i] + h * (1.0 + df(mid) * df(mid)).sqrt();
        }
        let total = cum[fine];
        let m = (total / spacing).ceil().max(1.0) as usize;
        if s == 1 {
            marks[0] = points.len() - 1;
        }
        let start = if s == 0 { 0 } else { 1 };
        let mut cursor = 0;
        for q in start..=m {
            let target = total * q as f64 / m as f64;
            while cursor + 1 < fine && cum[cursor + 1] < target {
                cursor += 1;
            }
            let span = cum[cursor + 1] - cum[cursor];
            let frac = if span > 0.0 { ((target - cum[cursor]) / span).clamp(0.0, 1.0) } else { 0.0 };
            let x = if q == m { seg[1] } else { seg[0] + (cursor as f64 + frac) * h };
            let y = if q == 0 || q == m { 0.0 } else { f(x) };
            params.push(alloc::vec![x]);
            points.push(alloc::vec![x, y]);
        }
        if s == 1 {
            marks[1] = points.len() - 1;
        }
    }
    Ok((params, points, marks[0], marks[1]))
}

/// (x, p) ↦ (x·√((r²+ε²)/(1+ε²)), r·p): the slice |p| = 1 of F_ε(N*_k) onto |p| = r.
pub fn dilate(point: &[f64], r: f64, eps: f64) -> Vec<f64> {
    let sx = ((r * r + eps * eps) / (1.0 + eps * eps)).sqrt();
    point.iter().enumerate().map(|(k, v)| if k < 4 { v * sx } else { v * r }).collect()
}

/// r-range of the default CT mesh: the r-spacing stays below the angular
/// spacing so the k = 12 graph is connected at 64×64×8.
pub const CT_MESH_R_RANGE: (f64, f64) = (0.75, 1.25);

/// kNN mesh of CT(N*_{k,ε}) over a (t, θ, r) grid, embedded in ℝ³×ℝ⁸.
pub fn ct_mesh(framed: &FramedKnot, eps: f64, grid: &GridSpec, k: usize) -> Result<SampleMesh> {
    let (mut params, mut points) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for i in 0..grid.len() {
        let u = grid.point(i);
        let pt = ct_point(framed, eps, &ConormalCoords::polar(u[0], u[2], u[1]))?;
        points.push(pt.ambient_point().to_vec());
        params.push(u);
    }
    build_mesh(params, points, k)
}

/// kNN mesh of the slice |p| = r of F_ε(N*_k) over an (t, θ) grid, in ℝ⁴×ℝ⁴.
pub fn slice_mesh(framed: &FramedKnot, eps: f64, r: f64, n_t: usize, n_theta: usize, k: usize) -> Result<SampleMesh> {
    let tau = core::f64::consts::TAU;
    let grid = GridSpec::new(alloc::vec![Axis::periodic(0.0, tau, n_t), Axis::periodic(0.0, tau, n_theta)])?;
    let (mut params, mut points) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for i in 0..grid.len() {
        let u = grid.point(i);
        let pt = feps_conormal(framed, eps, &ConormalCoords::polar(u[0], r, u[1]))?;
        points.push(pt.to_vec8().as_slice().to_vec());
        params.push(u);
    }
    build_mesh(params, points, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};

    fn grid2(n: usize, h: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(alloc::vec![i as f64 * h, j as f64 * h]);
            }
        }
        (pts.clone(), pts)
    }

    #[test]
    fn knn_matches_brute_force() {
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|i| {
                let t = i as f64 * 0.7;
                alloc::vec![t.sin() * 3.0, (1.3 * t).cos(), (0.1 * t).sin()]
            })
            .collect();
        let fast = knn(&pts, 5);
        for i in 0..pts.len() {
            let mut all: Vec<Near> = (0..pts.len()).filter(|&j| j != i).map(|j| Near(chord(&pts[i], &pts[j]), j)).collect();
            all.sort();
            let want: Vec<usize> = all.iter().take(5).map(|w| w.1).collect();
            assert_eq!(fast[i], want);
        }
    }

    #[test]
    fn circle_is_a_cycle() {
        let (p, x) = circle_fixture(256);
        let m = build_mesh(p, x, 2).unwrap();
        assert!(m.is_connected());
        assert!(m.neighbors.iter().all(|n| n.iter().filter(|e| e.1 > 0.0).count() == 2));
        let d = intrinsic_distance(&m, 0, 128);
        assert!((d - core::f64::consts::PI).abs() < 2e-2);
        assert_eq!(intrinsic_distance(&m, 5, 5), 0.0);
        let path = shortest_path(&m, 0, 3).unwrap();
        assert_eq!(path, alloc::vec![0, 1, 2, 3]);
        let c = two_point_scan(&m, 0.5, 20.0, 0..m.len()).unwrap();
        assert!(c.constant <= core::f64::consts::FRAC_PI_2 + 5e-2 && c.constant >= 1.0);
        assert!(c.witnesses.len() == WITNESS_COUNT && c.witnesses.windows(2).all(|w| w[0].ratio >= w[1].ratio));
        assert!(two_point_scan(&m, 1e-6, 20.0, 0..m.len()).is_err());
        assert!(two_point_scan(&m, -1.0, 20.0, 0..1).is_err());
    }

    #[test]
    fn empty_and_disconnected() {
        assert!(build_mesh(Vec::new(), Vec::new(), 3).is_err());
        let pts = alloc::vec![alloc::vec![0.0], alloc::vec![0.1], alloc::vec![5.0], alloc::vec![5.1]];
        let m = build_mesh(pts.clone(), pts, 1).unwrap();
        assert_eq!(m.components, 2);
        assert_eq!(intrinsic_distance(&m, 0, 3), f64::INFINITY);
        assert!(shortest_path(&m, 0, 2).is_none());
    }

    #[test]
    fn refinement_never_lengthens_paths() {
        let (p, x) = grid2(9, 0.25);
        let coarse = build_mesh(p, x, 8).unwrap();
        let (p, x) = grid2(17, 0.125);
        let fine = build_mesh(p, x, 8).unwrap();
        let idx_c = |i: usize, j: usize| i * 9 + j;
        let idx_f = |i: usize, j: usize| 2 * i * 17 + 2 * j;
        for (a, b) in [((2, 2), (6, 5)), ((3, 2), (3, 6)), ((2, 6), (5, 3)), ((4, 4), (6, 6))] {
            let dc = intrinsic_distance(&coarse, idx_c(a.0, a.1), idx_c(b.0, b.1));
            let df = intrinsic_distance(&fine, idx_f(a.0, a.1), idx_f(b.0, b.1));
            assert!(df <= dc + 1e-9, "{dc} -> {df}");
        }
    }

    #[test]
    fn sine_exp_ratio_grows() {
        let mut last = 0.0;
        for n in [5, 10, 20] {
            let (p, x, i, j) = sine_exp_fixture(n, 2e-3).unwrap();
            assert_eq!(x[i][1], 0.0);
            assert!((x[i][0] - (n as f64).ln()).abs() < 1e-12 && (x[j][0] - ((n + 1) as f64).ln()).abs() < 1e-12);
            let m = build_mesh(p, x, 4).unwrap();
            assert!(m.is_connected());
            let ratio = intrinsic_distance(&m, i, j) / m.ambient_distance(i, j);
            // the hump reaches |y| = 1, so the arc is at least 2 up to chord error
            assert!(intrinsic_distance(&m, i, j) >= 2.0 * (1.0 - 1e-2));
            assert!(ratio > last);
            last = ratio;
        }
        assert!(last > 30.0);
    }

    #[test]
    fn dilation_scales_paths() {
        let eps = 0.1;
        for r in [1.0, 2.0, 4.0] {
            let path: Vec<Vec<f64>> = (0..50)
                .map(|i| {
                    let t = i as f64 * 0.05;
                    let s = (1.0f64 + eps * eps).sqrt();
                    alloc::vec![s * t.cos(), s * t.sin(), 0.0, 0.0, 0.0, 0.0, (2.0 * t).cos(), (2.0 * t).sin()]
                })
                .collect();
            let scaled: Vec<Vec<f64>> = path.iter().map(|p| dilate(p, r, eps)).collect();
            let f = path_length(&scaled) / path_length(&path);
            let sx = ((r * r + eps * eps) / (1.0 + eps * eps)).sqrt();
            assert!(f >= sx - 1e-12 && f <= r + 1e-12);
            assert!(f >= r * 0.98 && f <= (r * r + eps * eps).sqrt() * 1.02);
        }
    }

    proptest! {
        #[test]
        fn triangle_inequality(seed in 0u64..1000) {
            let pts: Vec<Vec<f64>> = (0..60)
                .map(|i| {
                    let t = (i as f64 + seed as f64 * 0.37) * 1.7;
                    alloc::vec![t.sin(), (0.6 * t).cos(), (1.9 * t).sin() * 0.5]
                })
                .collect();
            let m = build_mesh(pts.clone(), pts, 6).unwrap();
            let d: Vec<Vec<f64>> = (0..m.len()).map(|i| dijkstra(&m, i, f64::INFINITY).0).collect();
            for a in 0..m.len() {
                for b in 0..m.len() {
                    prop_assert!(d[a][b] >= m.ambient_distance(a, b) - 1e-12 || d[a][b].is_infinite());
                    for c in (0..m.len()).step_by(7) {
                        if d[a][c].is_finite() && d[c][b].is_finite() {
                            prop_assert!(d[a][b] <= d[a][c] + d[c][b] + 1e-12);
                        }
                    }
                }
            }
        }
    }
}
