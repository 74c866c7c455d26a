use crate::error::{invalid, Result};
use crate::geometry::DiscreteSpace;
use crate::linalg::sym_eigen;
use serde::{Deserialize, Serialize};

/// A finite metric space given by its dense distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
}

impl FiniteMetric {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return invalid("distance matrix must be n×n");
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return invalid(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(v >= 0.0) || v != d[j * n + i] {
                    return invalid(format!("distance ({i},{j}) is negative or asymmetric"));
                }
            }
        }
        Ok(FiniteMetric { n, d })
    }

    /// Intrinsic distances of `space` restricted to `vertices`.
    pub fn from_space(space: &DiscreteSpace, vertices: &[usize]) -> Result<Self> {
        let m = vertices.len();
        let mut d = vec![0.0; m * m];
        for (a, &p) in vertices.iter().enumerate() {
            space.check_vertex(p)?;
            let row = space.distances_from(p);
            for (b, &q) in vertices.iter().enumerate() {
                d[a * m + b] = row[q];
            }
        }
        for a in 0..m {
            for b in 0..a {
                let v = 0.5 * (d[a * m + b] + d[b * m + a]);
                d[a * m + b] = v;
                d[b * m + a] = v;
            }
        }
        FiniteMetric::new(m, d)
    }

    /// Euclidean distances between points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let m = points.len();
        let mut d = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..a {
                let v = points[a].iter().zip(&points[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                d[a * m + b] = v;
                d[b * m + a] = v;
            }
        }
        FiniteMetric::new(m, d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }

    pub fn radius(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().cloned().fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
    }

    /// Relabeled (or restricted) space: new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.dist(perm[i], perm[j]);
            }
        }
        FiniteMetric { n, d }
    }

    pub fn scaled(&self, s: f64) -> Self {
        FiniteMetric { n: self.n, d: self.d.iter().map(|v| v * s).collect() }
    }

    /// Farthest-point ordering from `start`; ties go to the lowest index.
    pub fn farthest_point_order(&self, start: usize) -> Vec<usize> {
        let mut order = vec![start];
        let mut best: Vec<f64> = self.row(start).to_vec();
        let mut used = vec![false; self.n];
        used[start] = true;
        while order.len() < self.n {
            let mut pick = usize::MAX;
            for i in 0..self.n {
                if !used[i] && (pick == usize::MAX || best[i] > best[pick]) {
                    pick = i;
                }
            }
            used[pick] = true;
            order.push(pick);
            for i in 0..self.n {
                best[i] = best[i].min(self.dist(pick, i));
            }
        }
        order
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GhMethod {
    Exhaustive,
    Greedy,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GHEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Witnessing correspondence as `(x, y)` pairs.
    pub correspondence: Vec<(usize, usize)>,
    pub method: GhMethod,
}

/// `max |d_X(x,x') − d_Y(y,y')|` over pairs of the correspondence.
pub fn distortion(x: &FiniteMetric, y: &FiniteMetric, corr: &[(usize, usize)]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &(p, q)) in corr.iter().enumerate() {
        for &(p2, q2) in &corr[..a] {
            d = d.max((x.dist(p, p2) - y.dist(q, q2)).abs());
        }
    }
    d
}

pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Exact GH distance (half the minimal distortion over correspondences) for spaces of at
/// most 8 points; larger inputs fall back to [`gh_upper_bound`].
pub fn gh_distance_small(x: &FiniteMetric, y: &FiniteMetric) -> Result<GHEstimate> {
    if x.is_empty() || y.is_empty() {
        return invalid("spaces must be nonempty");
    }
    if x.len() > EXHAUSTIVE_LIMIT || y.len() > EXHAUSTIVE_LIMIT {
        return Ok(gh_upper_bound(x, y, 64));
    }
    let (nx, ny) = (x.len(), y.len());
    let mut cand: Vec<f64> = Vec::new();
    for a in 0..nx {
        for b in 0..nx {
            for c in 0..ny {
                for d in 0..ny {
                    cand.push((x.dist(a, b) - y.dist(c, d)).abs());
                }
            }
        }
    }
    cand.sort_by(|a, b| a.total_cmp(b));
    cand.dedup();
    let (mut lo, mut hi) = (0, cand.len() - 1);
    let mut witness = feasible(x, y, cand[hi]).expect("largest distortion is always feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible(x, y, cand[mid]) {
            Some(w) => {
                hi = mid;
                witness = w;
            }
            None => lo = mid + 1,
        }
    }
    if let Some(w) = feasible(x, y, cand[lo]) {
        witness = w;
    }
    let v = 0.5 * cand[lo];
    Ok(GHEstimate { lower: v, upper: v, correspondence: witness, method: GhMethod::Exhaustive })
}

/// Backtracking search for a correspondence of distortion `≤ eta`, over pair bitmasks
/// on `X × Y` (at most 64 pairs).
fn feasible(x: &FiniteMetric, y: &FiniteMetric, eta: f64) -> Option<Vec<(usize, usize)>> {
    let (nx, ny) = (x.len(), y.len());
    let np = nx * ny;
    let mut compat = vec![0u64; np];
    for p in 0..np {
        for q in 0..np {
            let (a, b, c, d) = (p / ny, p % ny, q / ny, q % ny);
            if (x.dist(a, c) - y.dist(b, d)).abs() <= eta {
                compat[p] |= 1 << q;
            }
        }
    }
    let row = |a: usize| ((1u64 << ny) - 1) << (a * ny);
    let col = |b: usize| (0..nx).fold(0u64, |m, a| m | 1 << (a * ny + b));
    let full = if np == 64 { u64::MAX } else { (1u64 << np) - 1 };

    fn cover(ny: usize, allowed: u64, covered: u64, col: &dyn Fn(usize) -> u64, compat: &[u64], pairs: &mut Vec<usize>) -> bool {
        let next = (0..ny).find(|&b| covered & col(b) == 0);
        let b = match next {
            None => return true,
            Some(b) => b,
        };
        let mut opts = allowed & col(b);
        while opts != 0 {
            let p = opts.trailing_zeros() as usize;
            opts &= opts - 1;
            pairs.push(p);
            if cover(ny, allowed & compat[p], covered | 1 << p, col, compat, pairs) {
                return true;
            }
            pairs.pop();
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        a: usize,
        nx: usize,
        ny: usize,
        allowed: u64,
        covered: u64,
        row: &dyn Fn(usize) -> u64,
        col: &dyn Fn(usize) -> u64,
        compat: &[u64],
        pairs: &mut Vec<usize>,
    ) -> bool {
        if a == nx {
            return cover(ny, allowed, covered, col, compat, pairs);
        }
        if (a..nx).any(|r| allowed & row(r) == 0) {
            return false;
        }
        let mut opts = allowed & row(a);
        while opts != 0 {
            let p = opts.trailing_zeros() as usize;
            opts &= opts - 1;
            pairs.push(p);
            if assign(a + 1, nx, ny, allowed & compat[p], covered | 1 << p, row, col, compat, pairs) {
                return true;
            }
            pairs.pop();
        }
        false
    }

    let mut pairs = Vec::new();
    // pairs are only usable if compatible with themselves
    let self_ok = (0..np).fold(0u64, |m, p| if compat[p] & (1 << p) != 0 { m | 1 << p } else { m });
    if assign(0, nx, ny, full & self_ok, 0, &row, &col, &compat, &mut pairs) {
        Some(pairs.iter().map(|&p| (p / ny, p % ny)).collect())
    } else {
        None
    }
}

fn greedy_map(x: &FiniteMetric, y: &FiniteMetric, starts: usize) -> Vec<usize> {
    let order = x.farthest_point_order(0);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for y0 in y.farthest_point_order(0).into_iter().take(starts.max(1)) {
        let mut f = vec![usize::MAX; x.len()];
        f[order[0]] = y0;
        let mut dis: f64 = 0.0;
        for (k, &p) in order.iter().enumerate().skip(1) {
            let mut pick = (f64::INFINITY, 0);
            for q in 0..y.len() {
                let c = order[..k].iter().map(|&p2| (x.dist(p, p2) - y.dist(q, f[p2])).abs()).fold(0.0, f64::max);
                if c < pick.0 {
                    pick = (c, q);
                }
            }
            f[p] = pick.1;
            dis = dis.max(pick.0);
            if best.as_ref().map_or(false, |b| dis >= b.0) {
                break;
            }
        }
        if f.iter().all(|&v| v != usize::MAX) && best.as_ref().map_or(true, |b| dis < b.0) {
            best = Some((dis, f));
        }
    }
    best.unwrap().1
}

/// Greedy farthest-point matching both ways plus local reassignment; the upper bound is
/// half the distortion of the produced correspondence.
pub fn gh_upper_bound(x: &FiniteMetric, y: &FiniteMetric, budget: usize) -> GHEstimate {
    let f = greedy_map(x, y, budget);
    let g = greedy_map(y, x, budget);
    let mut corr: Vec<(usize, usize)> = f.iter().enumerate().map(|(p, &q)| (p, q)).collect();
    corr.extend(g.iter().enumerate().map(|(q, &p)| (p, q)));
    corr.sort_unstable();
    corr.dedup();
    let mut dis = distortion(x, y, &corr);
    for _ in 0..budget {
        let mut improved = false;
        let worst = worst_pair(x, y, &corr);
        for &idx in &[worst.0, worst.1] {
            let (p, q) = corr[idx];
            let x_side = corr.iter().filter(|c| c.0 == p).count() > 1;
            let y_side = corr.iter().filter(|c| c.1 == q).count() > 1;
            let mut candidates: Vec<(usize, usize)> = Vec::new();
            if y_side {
                candidates.extend((0..y.len()).map(|q2| (p, q2)));
            }
            if x_side {
                candidates.extend((0..x.len()).map(|p2| (p2, q)));
            }
            if !x_side && !y_side {
                continue;
            }
            for c in candidates {
                let mut trial = corr.clone();
                trial[idx] = c;
                if !covers(&trial, x.len(), y.len()) {
                    continue;
                }
                let d = distortion(x, y, &trial);
                if d < dis {
                    trial.sort_unstable();
                    trial.dedup();
                    corr = trial;
                    dis = d;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    let lower = 0.5 * (x.diameter() - y.diameter()).abs().max((x.radius() - y.radius()).abs());
    let upper = 0.5 * dis;
    GHEstimate { lower: lower.min(upper), upper, correspondence: corr, method: GhMethod::Greedy }
}

fn covers(corr: &[(usize, usize)], nx: usize, ny: usize) -> bool {
    let mut cx = vec![false; nx];
    let mut cy = vec![false; ny];
    for &(p, q) in corr {
        cx[p] = true;
        cy[q] = true;
    }
    cx.iter().all(|&b| b) && cy.iter().all(|&b| b)
}

fn worst_pair(x: &FiniteMetric, y: &FiniteMetric, corr: &[(usize, usize)]) -> (usize, usize) {
    let mut best = (0.0, 0, 0);
    for (a, &(p, q)) in corr.iter().enumerate() {
        for (b, &(p2, q2)) in corr[..a].iter().enumerate() {
            let d = (x.dist(p, p2) - y.dist(q, q2)).abs();
            if d > best.0 {
                best = (d, a, b);
            }
        }
    }
    (best.1, best.2)
}

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// `m` points of the Euclidean `k`-ball of radius `r`: the center, then Halton points
/// of the cube kept when inside the ball.
pub fn euclidean_ball_sample(k: usize, r: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 || k > PRIMES.len() {
        return invalid(format!("dimension {k} outside 1..={}", PRIMES.len()));
    }
    let mut pts = vec![vec![0.0; k]];
    let mut i = 1;
    while pts.len() < m {
        let p: Vec<f64> = (0..k).map(|a| (2.0 * halton(i, PRIMES[a]) - 1.0) * r).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= r * r {
            pts.push(p);
        }
        i += 1;
    }
    Ok(pts)
}

/// GH estimate between `B_r(x)` and the Euclidean `k`-ball of radius `r`, both sampled
/// by `m` points. The ball is thinned by farthest-point sampling from `x`; its covering
/// radius is added to the upper bound. Distances are handled in units of `r` on a `2⁻³⁰`
/// grid, so exact ties on symmetric meshes survive rescaling and the estimate is equivariant.
pub fn ball_gh_to_euclidean(space: &DiscreteSpace, x: usize, r: f64, k: usize, m: usize) -> Result<GHEstimate> {
    if !(r > 0.0) {
        return invalid("radius must be positive");
    }
    let ball = space.ball(x, r)?;
    let raw = FiniteMetric::from_space(space, &ball.vertices)?;
    let grid = (1u64 << 30) as f64;
    let full = FiniteMetric { n: raw.n, d: raw.d.iter().map(|v| (v / r * grid).round() / grid).collect() };
    let start = ball.vertices.iter().position(|&v| v == x).unwrap();
    let order = full.farthest_point_order(start);
    let keep: Vec<usize> = order.iter().take(m.max(1)).copied().collect();
    let cover = (0..full.len()).map(|i| keep.iter().map(|&j| full.dist(i, j)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let sub = full.permuted(&keep);
    let pts = euclidean_ball_sample(k, 1.0, m.max(1))?;
    let euc = FiniteMetric::from_points(&pts)?;
    let mut est = gh_upper_bound(&sub, &euc, 16);
    let corr = mds_correspondence(&sub, 0, &pts)?;
    let dis = distortion(&sub, &euc, &corr);
    if 0.5 * dis < est.upper {
        est.upper = 0.5 * dis;
        est.correspondence = corr;
    }
    est.lower = r * est.lower.min(est.upper);
    est.upper = r * (est.upper + cover);
    est.correspondence = est.correspondence.iter().map(|&(p, q)| (ball.vertices[keep[p]], q)).collect();
    est.method = GhMethod::Sampled;
    Ok(est)
}

/// Correspondence through a classical multidimensional-scaling embedding of `x` into
/// `R^k` centered at `center`, matched to `pts` by nearest neighbours in both directions.
fn mds_correspondence(x: &FiniteMetric, center: usize, pts: &[Vec<f64>]) -> Result<Vec<(usize, usize)>> {
    let n = x.len();
    let k = pts[0].len();
    let sq: Vec<f64> = x.d.iter().map(|v| v * v).collect();
    let row_mean: Vec<f64> = (0..n).map(|i| sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let all_mean = row_mean.iter().sum::<f64>() / n as f64;
    let b: Vec<f64> = (0..n * n).map(|q| -0.5 * (sq[q] - row_mean[q / n] - row_mean[q % n] + all_mean)).collect();
    let eig = sym_eigen(&b, n)?;
    let mut coords = vec![vec![0.0; k]; n];
    for a in 0..k.min(n) {
        let col = n - 1 - a;
        let scale = eig.values[col].max(0.0).sqrt();
        for (i, c) in coords.iter_mut().enumerate() {
            c[a] = scale * eig.vectors[col * n + i];
        }
    }
    let origin = coords[center].clone();
    for c in coords.iter_mut() {
        c.iter_mut().zip(&origin).for_each(|(v, o)| *v -= o);
    }
    let d2 = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let nearest = |p: &[f64], set: &[Vec<f64>]| {
        (0..set.len()).min_by(|&i, &j| d2(p, &set[i]).total_cmp(&d2(p, &set[j])).then(i.cmp(&j))).unwrap()
    };
    let mut corr: Vec<(usize, usize)> = (0..n).map(|i| (i, nearest(&coords[i], pts))).collect();
    corr.extend(pts.iter().enumerate().map(|(q, p)| (nearest(p, &coords), q)));
    corr.sort_unstable();
    corr.dedup();
    Ok(corr)
}

/// Transfers `φ` on `X` to `Y` through a correspondence: `Σ_p φ(x_p) ξ_p`, with `ξ_p` the
/// normalized bumps `χ(d_Y(p,·)/2ε)` over a maximal `2ε`-separated set `D ⊂ Y`.
pub fn transfer_function(corr: &[(usize, usize)], y: &FiniteMetric, phi: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return invalid("ε must be positive");
    }
    let mut partner = vec![usize::MAX; y.len()];
    for &(p, q) in corr {
        if q >= y.len() || p >= phi.len() {
            return invalid(format!("pair ({p},{q}) out of range"));
        }
        if partner[q] == usize::MAX {
            partner[q] = p;
        }
    }
    let uncovered: Vec<usize> = (0..y.len()).filter(|&q| partner[q] == usize::MAX).collect();
    if !uncovered.is_empty() {
        return invalid(format!("vertices of Y without a partner: {uncovered:?}"));
    }
    let mut net: Vec<usize> = Vec::new();
    for q in 0..y.len() {
        if net.iter().all(|&p| y.dist(p, q) >= 2.0 * eps) {
            net.push(q);
        }
    }
    let hinge = |t: f64| {
        if t <= 1.0 {
            1.0
        } else if t <= 2.0 {
            2.0 - t
        } else {
            0.0
        }
    };
    Ok((0..y.len())
        .map(|q| {
            let (mut num, mut sigma) = (0.0, 0.0);
            for &p in &net {
                let b = hinge(y.dist(p, q) / (2.0 * eps));
                num += b * phi[partner[p]];
                sigma += b;
            }
            num / sigma
        })
        .collect())
}
