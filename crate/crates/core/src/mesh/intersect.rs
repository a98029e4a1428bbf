//! Triangle-triangle intersection and a bounding-volume hierarchy for
//! self-intersection queries.
//!
//! Coordinates are normalized into the unit box of the input before any
//! predicate runs, so the fixed tolerance below is scale independent.

use super::Vec3;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb { min: Vec3::repeat(f64::INFINITY), max: Vec3::repeat(f64::NEG_INFINITY) }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&other.min), max: self.max.sup(&other.max) }
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|a| self.min[a] <= other.max[a] && other.min[a] <= self.max[a])
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        0.5 * (self.min + self.max)
    }

    pub fn expanded(&self, margin: f64) -> Aabb {
        Aabb { min: self.min.add_scalar(-margin), max: self.max.add_scalar(margin) }
    }
}

/// Binary BVH over a set of boxes. Leaves hold a few primitive indices.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
}

#[derive(Debug, Clone)]
struct BvhNode {
    bounds: Aabb,
    // Leaf: [start, start + count) into `order`. Inner: children indices.
    left: u32,
    right: u32,
    start: u32,
    count: u32,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Self {
        let mut bvh = Bvh { nodes: Vec::with_capacity(2 * boxes.len() / LEAF_SIZE + 1), order: (0..boxes.len() as u32).collect() };
        if !boxes.is_empty() {
            let centers: Vec<Vec3> = boxes.iter().map(Aabb::center).collect();
            bvh.build_node(boxes, &centers, 0, boxes.len());
        }
        bvh
    }

    fn build_node(&mut self, boxes: &[Aabb], centers: &[Vec3], start: usize, end: usize) -> u32 {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &i in &self.order[start..end] {
            bounds = bounds.union(&boxes[i as usize]);
            cbounds.grow(&centers[i as usize]);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(BvhNode { bounds, left: 0, right: 0, start: start as u32, count: (end - start) as u32 });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = cbounds.extent().imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centers[a as usize][axis].total_cmp(&centers[b as usize][axis]).then(a.cmp(&b))
        });
        let left = self.build_node(boxes, centers, start, mid);
        let right = self.build_node(boxes, centers, mid, end);
        let node = &mut self.nodes[id as usize];
        node.left = left;
        node.right = right;
        node.count = 0;
        id
    }

    fn is_leaf(&self, n: u32) -> bool {
        self.nodes[n as usize].count > 0
    }

    fn leaf_items(&self, n: u32) -> &[u32] {
        let node = &self.nodes[n as usize];
        &self.order[node.start as usize..(node.start + node.count) as usize]
    }

    /// Calls `f(i)` for every primitive whose box overlaps `query`.
    pub fn query(&self, query: &Aabb, mut f: impl FnMut(u32)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !node.bounds.overlaps(query) {
                continue;
            }
            if self.is_leaf(n) {
                for &i in self.leaf_items(n) {
                    f(i);
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }

    /// Branch-and-bound nearest search. `visit(i)` evaluates primitive `i`
    /// and returns the best distance so far; `gap` gives a lower bound for
    /// points outside a node box (nodes containing `p` are always opened).
    pub fn visit_nearest(
        &self,
        p: &Vec3,
        stack: &mut Vec<u32>,
        mut visit: impl FnMut(u32) -> f64,
        gap: impl Fn(&Aabb, &Vec3) -> f64,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let bound = |n: u32| {
            let b = &self.nodes[n as usize].bounds;
            if b.contains_point(p) {
                f64::NEG_INFINITY
            } else {
                gap(b, p)
            }
        };
        let mut best = f64::INFINITY;
        stack.clear();
        stack.push(0);
        while let Some(n) = stack.pop() {
            if bound(n) > best {
                continue;
            }
            if self.is_leaf(n) {
                for &i in self.leaf_items(n) {
                    best = visit(i);
                }
            } else {
                let node = &self.nodes[n as usize];
                let (l, r) = (node.left, node.right);
                if bound(l) <= bound(r) {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
    }

    /// Visits every unordered pair (i, j), i != j, of primitives whose boxes
    /// overlap, stopping early when `f` returns true. Returns whether it
    /// stopped early.
    pub fn any_overlapping_pair(&self, boxes: &[Aabb], mut f: impl FnMut(u32, u32) -> bool) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack: Vec<(u32, u32)> = vec![(0, 0)];
        while let Some((a, b)) = stack.pop() {
            let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
            if a != b && !na.bounds.overlaps(&nb.bounds) {
                continue;
            }
            match (self.is_leaf(a), self.is_leaf(b)) {
                (true, true) => {
                    let (ia, ib) = (self.leaf_items(a), self.leaf_items(b));
                    for (k, &i) in ia.iter().enumerate() {
                        let candidates = if a == b { &ib[k + 1..] } else { ib };
                        for &j in candidates {
                            if boxes[i as usize].overlaps(&boxes[j as usize]) && f(i, j) {
                                return true;
                            }
                        }
                    }
                }
                (true, false) => {
                    stack.push((a, nb.left));
                    stack.push((a, nb.right));
                }
                (false, true) => {
                    stack.push((na.left, b));
                    stack.push((na.right, b));
                }
                (false, false) => {
                    if a == b {
                        stack.push((na.left, na.left));
                        stack.push((na.right, na.right));
                        stack.push((na.left, na.right));
                    } else {
                        stack.push((na.left, b));
                        stack.push((na.right, b));
                    }
                }
            }
        }
        false
    }
}

#[inline]
fn orient(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a))
}

#[inline]
fn sign(x: f64) -> i8 {
    if x > EPS {
        1
    } else if x < -EPS {
        -1
    } else {
        0
    }
}

/// Closed segment `pq` against closed triangle `abc`, non-coplanar case.
/// A coplanar segment is reported as not hitting; callers handle coplanar
/// triangle pairs separately.
pub fn segment_hits_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let sp = sign(orient(a, b, c, p));
    let sq = sign(orient(a, b, c, q));
    if sp == sq {
        return false;
    }
    let s1 = sign(orient(p, q, a, b));
    let s2 = sign(orient(p, q, b, c));
    let s3 = sign(orient(p, q, c, a));
    let has_pos = s1 > 0 || s2 > 0 || s3 > 0;
    let has_neg = s1 < 0 || s2 < 0 || s3 < 0;
    !(has_pos && has_neg)
}

fn project_2d(v: &Vec3, drop: usize) -> [f64; 2] {
    match drop {
        0 => [v.y, v.z],
        1 => [v.z, v.x],
        _ => [v.x, v.y],
    }
}

fn orient2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross_2d(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let d1 = sign(orient2(a, b, p));
    let d2 = sign(orient2(a, b, q));
    let d3 = sign(orient2(p, q, a));
    let d4 = sign(orient2(p, q, b));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    let on = |u: [f64; 2], v: [f64; 2], w: [f64; 2]| {
        w[0] >= u[0].min(v[0]) - EPS
            && w[0] <= u[0].max(v[0]) + EPS
            && w[1] >= u[1].min(v[1]) - EPS
            && w[1] <= u[1].max(v[1]) + EPS
    };
    (d1 == 0 && on(a, b, p)) || (d2 == 0 && on(a, b, q)) || (d3 == 0 && on(p, q, a)) || (d4 == 0 && on(p, q, b))
}

fn point_in_triangle_2d(p: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let s = [
        sign(orient2(t[0], t[1], p)),
        sign(orient2(t[1], t[2], p)),
        sign(orient2(t[2], t[0], p)),
    ];
    !(s.iter().any(|&x| x > 0) && s.iter().any(|&x| x < 0))
}

fn coplanar_overlap(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    let n = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let drop = n.iamax();
    let a = t1.map(|v| project_2d(&v, drop));
    let b = t2.map(|v| project_2d(&v, drop));
    for i in 0..3 {
        for j in 0..3 {
            if segments_cross_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle_2d(a[0], &b) || point_in_triangle_2d(b[0], &a)
}

/// Whether two closed triangles share any point. Inputs are expected in
/// normalized coordinates.
pub fn triangles_intersect(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    let s2: Vec<i8> = t2.iter().map(|p| sign(orient(&t1[0], &t1[1], &t1[2], p))).collect();
    if s2.iter().all(|&s| s > 0) || s2.iter().all(|&s| s < 0) {
        return false;
    }
    let s1: Vec<i8> = t1.iter().map(|p| sign(orient(&t2[0], &t2[1], &t2[2], p))).collect();
    if s1.iter().all(|&s| s > 0) || s1.iter().all(|&s| s < 0) {
        return false;
    }
    if s2.iter().all(|&s| s == 0) {
        return coplanar_overlap(t1, t2);
    }
    for k in 0..3 {
        if segment_hits_triangle(&t1[k], &t1[(k + 1) % 3], &t2[0], &t2[1], &t2[2])
            || segment_hits_triangle(&t2[k], &t2[(k + 1) % 3], &t1[0], &t1[1], &t1[2])
        {
            return true;
        }
    }
    false
}

/// Two triangles with exactly one common vertex `v` overlap beyond `v`
/// iff the edge opposite `v` in one of them meets the other.
fn shared_vertex_pair_intersects(t1: &[Vec3; 3], k1: usize, t2: &[Vec3; 3], k2: usize) -> bool {
    let opp1 = (t1[(k1 + 1) % 3], t1[(k1 + 2) % 3]);
    let opp2 = (t2[(k2 + 1) % 3], t2[(k2 + 2) % 3]);
    let n1 = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let coplanar = t2.iter().all(|p| sign(n1.dot(&(p - t1[0]))) == 0);
    if coplanar {
        let drop = n1.iamax();
        let a = t1.map(|v| project_2d(&v, drop));
        let b = t2.map(|v| project_2d(&v, drop));
        let (o1a, o1b) = (project_2d(&opp1.0, drop), project_2d(&opp1.1, drop));
        let (o2a, o2b) = (project_2d(&opp2.0, drop), project_2d(&opp2.1, drop));
        for j in 0..3 {
            if segments_cross_2d(o1a, o1b, b[j], b[(j + 1) % 3])
                || segments_cross_2d(o2a, o2b, a[j], a[(j + 1) % 3])
            {
                return true;
            }
        }
        // One triangle's far edge inside the other, or the wedges overlap.
        let mid1 = [(o1a[0] + o1b[0]) * 0.5, (o1a[1] + o1b[1]) * 0.5];
        let mid2 = [(o2a[0] + o2b[0]) * 0.5, (o2a[1] + o2b[1]) * 0.5];
        return point_in_triangle_2d(mid1, &b) || point_in_triangle_2d(mid2, &a);
    }
    segment_hits_triangle(&opp1.0, &opp1.1, &t2[0], &t2[1], &t2[2])
        || segment_hits_triangle(&opp2.0, &opp2.1, &t1[0], &t1[1], &t1[2])
}

/// Separating-axis test of a closed triangle against a closed box.
pub fn triangle_overlaps_box(tri: &[Vec3; 3], b: &Aabb) -> bool {
    let c = b.center();
    let h = 0.5 * b.extent();
    let v = tri.map(|p| p - c);
    let separated = |axis: Vec3| {
        if axis.norm_squared() < 1e-300 {
            return false;
        }
        let p = v.map(|q| q.dot(&axis));
        let r = h.x * axis.x.abs() + h.y * axis.y.abs() + h.z * axis.z.abs();
        p.iter().cloned().fold(f64::INFINITY, f64::min) > r || p.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < -r
    };
    for a in 0..3 {
        let lo = v.iter().map(|q| q[a]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|q| q[a]).fold(f64::NEG_INFINITY, f64::max);
        if lo > h[a] || hi < -h[a] {
            return false;
        }
    }
    let edges = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    if separated(edges[0].cross(&edges[1])) {
        return false;
    }
    for e in &edges {
        for a in 0..3 {
            if separated(Vec3::ith(a, 1.0).cross(e)) {
                return false;
            }
        }
    }
    true
}

/// True iff two faces that do not share an edge intersect anywhere other
/// than at a shared vertex. Works on arbitrary triangle soups.
pub fn triangles_self_intersect(vertices: &[Vec3], faces: &[[u32; 3]]) -> bool {
    first_self_intersection(vertices, faces).is_some()
}

/// Some intersecting face pair, if any (see [`triangles_self_intersect`]).
pub fn first_self_intersection(vertices: &[Vec3], faces: &[[u32; 3]]) -> Option<(u32, u32)> {
    if faces.len() < 2 {
        return None;
    }
    let bounds = Aabb::from_points(vertices.iter());
    let scale = bounds.extent().max().max(f64::MIN_POSITIVE);
    let norm: Vec<Vec3> = vertices.iter().map(|v| (v - bounds.min) / scale).collect();
    let tri = |f: usize| {
        let t = faces[f];
        [norm[t[0] as usize], norm[t[1] as usize], norm[t[2] as usize]]
    };
    let boxes: Vec<Aabb> = (0..faces.len())
        .map(|f| Aabb::from_points(tri(f).iter()).expanded(EPS))
        .collect();
    let bvh = Bvh::build(&boxes);
    let mut found = None;
    bvh.any_overlapping_pair(&boxes, |i, j| {
        let (fi, fj) = (faces[i as usize], faces[j as usize]);
        let mut shared = Vec::with_capacity(3);
        for (ki, vi) in fi.iter().enumerate() {
            if let Some(kj) = fj.iter().position(|vj| vj == vi) {
                shared.push((ki, kj));
            }
        }
        let (ti, tj) = (tri(i as usize), tri(j as usize));
        let hit = match shared.len() {
            0 => triangles_intersect(&ti, &tj),
            1 => shared_vertex_pair_intersects(&ti, shared[0].0, &tj, shared[0].1),
            _ => false,
        };
        if hit {
            found = Some((i.min(j), i.max(j)));
        }
        hit
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_genus_g_seed, SeedParams};

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn triangle_box_overlap_cases() {
        let b = Aabb { min: v(0., 0., 0.), max: v(1., 1., 1.) };
        assert!(triangle_overlaps_box(&[v(0.5, 0.5, 0.5), v(3., 0.5, 0.5), v(0.5, 3., 0.5)], &b));
        assert!(triangle_overlaps_box(&[v(-1., -1., 0.5), v(3., -1., 0.5), v(-1., 3., 0.5)], &b));
        assert!(!triangle_overlaps_box(&[v(2., 2., 2.), v(3., 2., 2.), v(2., 3., 2.)], &b));
        // Cuts past the corner (x + y = 2.2 plane) without touching the box.
        assert!(!triangle_overlaps_box(&[v(2.2, 0., -5.), v(0., 2.2, -5.), v(1.1, 1.1, 5.)], &b));
        assert!(triangle_overlaps_box(&[v(1.8, 0., -5.), v(0., 1.8, -5.), v(0.9, 0.9, 5.)], &b));
    }

    #[test]
    fn disjoint_triangles_do_not_intersect() {
        let verts = vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(5., 5., 5.), v(6., 5., 5.), v(5., 6., 5.)];
        assert!(!triangles_self_intersect(&verts, &[[0, 1, 2], [3, 4, 5]]));
    }

    #[test]
    fn interpenetrating_triangles_intersect() {
        let verts = vec![
            v(0., 0., 0.),
            v(2., 0., 0.),
            v(0., 2., 0.),
            v(0.5, 0.5, -1.),
            v(0.5, 0.5, 1.),
            v(1.5, -1., 0.3),
        ];
        assert!(triangles_self_intersect(&verts, &[[0, 1, 2], [3, 4, 5]]));
    }

    #[test]
    fn shared_vertex_only_is_not_intersection() {
        let verts = vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(-1., 0., 0.5), v(0., -1., 0.5)];
        assert!(!triangles_self_intersect(&verts, &[[0, 1, 2], [0, 3, 4]]));
    }

    #[test]
    fn shared_vertex_fold_through_is_detected() {
        // Second triangle shares vertex 0 and pierces the first.
        let verts = vec![v(0., 0., 0.), v(2., 0., 0.), v(0., 2., 0.), v(1., 0.5, -1.), v(0.5, 1., 1.)];
        assert!(triangles_self_intersect(&verts, &[[0, 1, 2], [0, 3, 4]]));
    }

    #[test]
    fn coplanar_overlap_is_detected() {
        let verts = vec![v(0., 0., 0.), v(2., 0., 0.), v(0., 2., 0.), v(0.5, 0.5, 0.), v(3., 0.5, 0.), v(0.5, 3., 0.)];
        assert!(triangles_self_intersect(&verts, &[[0, 1, 2], [3, 4, 5]]));
        let apart = vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(2., 2., 0.), v(3., 2., 0.), v(2., 3., 0.)];
        assert!(!triangles_self_intersect(&apart, &[[0, 1, 2], [3, 4, 5]]));
    }

    #[test]
    fn bvh_pairs_match_brute_force() {
        let mesh = make_genus_g_seed(3, &SeedParams::default()).unwrap();
        let boxes: Vec<Aabb> = (0..mesh.faces().len()).map(|f| Aabb::from_points(mesh.triangle(f).iter())).collect();
        let bvh = Bvh::build(&boxes);
        let mut found = Vec::new();
        bvh.any_overlapping_pair(&boxes, |i, j| {
            found.push((i.min(j), i.max(j)));
            false
        });
        found.sort_unstable();
        let mut brute = Vec::new();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].overlaps(&boxes[j]) {
                    brute.push((i as u32, j as u32));
                }
            }
        }
        assert_eq!(found, brute);
    }

    #[test]
    fn seeds_have_no_self_intersection() {
        for g in [0, 1, 4, 7] {
            let mesh = make_genus_g_seed(g, &SeedParams::default()).unwrap();
            assert!(!mesh.has_self_intersection(), "genus {g}");
        }
    }

    #[test]
    fn pushed_vertex_creates_intersection() {
        let params = SeedParams { bar_blocks: 1, thickness_blocks: 1, subdivisions: 2, ..SeedParams::default() };
        let mesh = make_genus_g_seed(1, &params).unwrap();
        // Pull one top-face vertex down through the plate.
        let mut verts = mesh.vertices().to_vec();
        let k = verts.iter().position(|p| p.z == 1.0 && p.x == 0.5 && p.y == 0.5).unwrap();
        verts[k].z = -1.0;
        assert!(triangles_self_intersect(&verts, mesh.faces()));
    }
}
