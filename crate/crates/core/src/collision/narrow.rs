//! Pairwise contact generation between primitive shapes.

use std::cmp::Ordering;

use super::geometry::{closest_point_on_segment, closest_point_on_triangle, closest_points_segments};
use crate::math::{Pose, Vec3};
use crate::shape::Shape;
use crate::Error;

/// One contact between shapes `a` and `b`.
///
/// `normal` points from `b` toward `a`; `point` lies on the surface of `a`;
/// `separation` is the signed surface gap along the normal (negative when
/// the shapes overlap).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    pub point: Vec3,
    pub normal: Vec3,
    pub separation: f64,
}

impl ContactPoint {
    pub fn depth(&self) -> f64 {
        (-self.separation).max(0.0)
    }

    /// The same contact seen from the other shape.
    fn swapped(self) -> Self {
        ContactPoint {
            point: self.point - self.normal * self.separation,
            normal: -self.normal,
            separation: self.separation,
        }
    }
}

/// Contacts between touching or overlapping shapes.
pub fn narrowphase(sa: &Shape, pa: &Pose, sb: &Shape, pb: &Pose) -> Result<Vec<ContactPoint>, Error> {
    narrowphase_with_margin(sa, pa, sb, pb, 0.0)
}

/// Contacts whose separation is at most `margin` (speculative contacts for
/// `margin > 0`).
///
/// Pairs are always evaluated in one canonical order and then flipped, so
/// swapping the arguments flips normals and leaves separations bit-identical.
pub fn narrowphase_with_margin(
    sa: &Shape,
    pa: &Pose,
    sb: &Shape,
    pb: &Pose,
    margin: f64,
) -> Result<Vec<ContactPoint>, Error> {
    let (ra, rb) = (rank(sa), rank(sb));
    if ra >= 3 && rb >= 3 {
        return Err(Error::UnsupportedPair(sa.kind(), sb.kind()));
    }
    let flip = match ra.cmp(&rb) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => pose_key(pa, pb) == Ordering::Greater,
    };
    if flip {
        Ok(ordered_pair(sb, pb, sa, pa, margin).into_iter().map(ContactPoint::swapped).collect())
    } else {
        Ok(ordered_pair(sa, pa, sb, pb, margin))
    }
}

fn rank(s: &Shape) -> u8 {
    match s {
        Shape::Sphere { .. } => 0,
        Shape::Capsule { .. } => 1,
        Shape::Box { .. } => 2,
        Shape::HalfSpace { .. } => 3,
        Shape::TriMesh { .. } => 4,
    }
}

fn pose_key(a: &Pose, b: &Pose) -> Ordering {
    let ka = [a.position.x, a.position.y, a.position.z, a.orientation.w, a.orientation.x, a.orientation.y, a.orientation.z];
    let kb = [b.position.x, b.position.y, b.position.z, b.orientation.w, b.orientation.x, b.orientation.y, b.orientation.z];
    ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// `a` never ranks after `b` here.
fn ordered_pair(sa: &Shape, pa: &Pose, sb: &Shape, pb: &Pose, margin: f64) -> Vec<ContactPoint> {
    use Shape::*;
    let mut out = Vec::new();
    match (sa, sb) {
        (Sphere { radius: r1 }, Sphere { radius: r2 }) => {
            out.extend(round_contact(pa.position, *r1, pb.position, *r2, Vec3::Z, margin));
        }
        (Sphere { radius }, Capsule { radius: rc, half_length }) => {
            let (e0, e1) = segment(pb, *half_length);
            let (c, _) = closest_point_on_segment(pa.position, e0, e1);
            out.extend(round_contact(pa.position, *radius, c, *rc, Vec3::Z, margin));
        }
        (Sphere { radius }, Box { half_extents }) => {
            out.extend(point_box(pa.position, *radius, pb, *half_extents, margin));
        }
        (Sphere { radius }, HalfSpace { normal, offset }) => {
            let (n, d) = world_plane(pb, *normal, *offset);
            out.extend(point_plane(pa.position, *radius, n, d, margin));
        }
        (Sphere { radius }, TriMesh { vertices, triangles }) => {
            for [a, b, c] in world_triangles(pb, vertices, triangles) {
                let cp = closest_point_on_triangle(pa.position, a, b, c);
                out.extend(round_contact(pa.position, *radius, cp, 0.0, face_normal(a, b, c), margin));
            }
        }
        (Capsule { radius: r1, half_length: h1 }, Capsule { radius: r2, half_length: h2 }) => {
            capsule_capsule(segment(pa, *h1), *r1, segment(pb, *h2), *r2, margin, &mut out);
        }
        (Capsule { radius, half_length }, Box { half_extents }) => {
            capsule_box(segment(pa, *half_length), *radius, pb, *half_extents, margin, &mut out);
        }
        (Capsule { radius, half_length }, HalfSpace { normal, offset }) => {
            let (n, d) = world_plane(pb, *normal, *offset);
            let (e0, e1) = segment(pa, *half_length);
            out.extend(point_plane(e0, *radius, n, d, margin));
            if *half_length > 0.0 {
                out.extend(point_plane(e1, *radius, n, d, margin));
            }
        }
        (Capsule { radius, half_length }, TriMesh { vertices, triangles }) => {
            let seg = segment(pa, *half_length);
            for tri in world_triangles(pb, vertices, triangles) {
                capsule_triangle(seg, *radius, tri, margin, &mut out);
            }
        }
        (Box { half_extents: h1 }, Box { half_extents: h2 }) => {
            box_box(pa, *h1, pb, *h2, margin, &mut out);
        }
        (Box { half_extents }, HalfSpace { normal, offset }) => {
            let (n, d) = world_plane(pb, *normal, *offset);
            for v in box_vertices(pa, *half_extents) {
                out.extend(point_plane(v, 0.0, n, d, margin));
            }
        }
        (Box { half_extents }, TriMesh { vertices, triangles }) => {
            for tri in world_triangles(pb, vertices, triangles) {
                box_triangle(pa, *half_extents, tri, margin, &mut out);
            }
        }
        _ => unreachable!("pair ordering excludes {} vs {}", sa.kind(), sb.kind()),
    }
    out
}

fn segment(pose: &Pose, half_length: f64) -> (Vec3, Vec3) {
    let axis = pose.orientation.rotate(Vec3::Z) * half_length;
    (pose.position - axis, pose.position + axis)
}

fn world_plane(pose: &Pose, normal: Vec3, offset: f64) -> (Vec3, f64) {
    let n = pose.transform_vector(normal);
    (n, offset + n.dot(pose.position))
}

fn world_triangles<'a>(
    pose: &'a Pose,
    vertices: &'a [Vec3],
    triangles: &'a [[usize; 3]],
) -> impl Iterator<Item = [Vec3; 3]> + 'a {
    triangles.iter().map(move |t| t.map(|i| pose.transform_point(vertices[i])))
}

fn face_normal(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    (b - a).cross(c - a).normalize()
}

/// Rounded point `ca` (radius `ra`) against rounded point `cb` (radius `rb`).
fn round_contact(ca: Vec3, ra: f64, cb: Vec3, rb: f64, fallback: Vec3, margin: f64) -> Option<ContactPoint> {
    let d = ca - cb;
    let dist = d.norm();
    let sep = dist - ra - rb;
    if sep > margin {
        return None;
    }
    let normal = if dist > 1e-12 { d / dist } else { fallback };
    Some(ContactPoint { point: ca - normal * ra, normal, separation: sep })
}

fn point_plane(p: Vec3, radius: f64, n: Vec3, d: f64, margin: f64) -> Option<ContactPoint> {
    let sep = n.dot(p) - d - radius;
    (sep <= margin).then(|| ContactPoint { point: p - n * radius, normal: n, separation: sep })
}

/// Signed distance from local point `q` to a box of half extents `h`, with
/// the outward direction of steepest ascent.
pub(crate) fn box_sdf(h: Vec3, q: Vec3) -> (f64, Vec3) {
    let d = q.abs() - h;
    if d.max_elem() > 0.0 {
        let clamped = q.max(-h).min(h);
        let diff = q - clamped;
        let dist = diff.norm();
        (dist, diff / dist)
    } else {
        let mut k = 0;
        for i in 1..3 {
            if d[i] > d[k] {
                k = i;
            }
        }
        let mut n = Vec3::ZERO;
        let s = if q[k] < 0.0 { -1.0 } else { 1.0 };
        match k {
            0 => n.x = s,
            1 => n.y = s,
            _ => n.z = s,
        }
        (d[k], n)
    }
}

fn point_box(p: Vec3, radius: f64, pose: &Pose, h: Vec3, margin: f64) -> Option<ContactPoint> {
    let (dist, nl) = box_sdf(h, pose.inverse_transform_point(p));
    let sep = dist - radius;
    if sep > margin {
        return None;
    }
    let normal = pose.transform_vector(nl);
    Some(ContactPoint { point: p - normal * radius, normal, separation: sep })
}

fn capsule_capsule(
    (a0, a1): (Vec3, Vec3),
    ra: f64,
    (b0, b1): (Vec3, Vec3),
    rb: f64,
    margin: f64,
    out: &mut Vec<ContactPoint>,
) {
    let da = a1 - a0;
    let db = b1 - b0;
    let (la, lb) = (da.norm(), db.norm());
    if la > 1e-12 && lb > 1e-12 && da.cross(db).norm() < 1e-3 * la * lb {
        // Nearly parallel: one contact at each end of the overlap interval.
        let ta = |p: Vec3| (p - a0).dot(da) / (la * la);
        let (t0, t1) = {
            let (x, y) = (ta(b0), ta(b1));
            (x.min(y).max(0.0), x.max(y).min(1.0))
        };
        if t1 - t0 > 1e-9 {
            let fallback = da.orthonormal_basis().0;
            for t in [t0, t1] {
                let pa = a0 + da * t;
                let (pb, _) = closest_point_on_segment(pa, b0, b1);
                out.extend(round_contact(pa, ra, pb, rb, fallback, margin));
            }
            return;
        }
    }
    let (_, _, pa, pb) = closest_points_segments(a0, a1, b0, b1);
    let fallback = da.cross(db).try_normalize().unwrap_or(Vec3::Z);
    out.extend(round_contact(pa, ra, pb, rb, fallback, margin));
}

/// Minimizer of a convex function on `[0, 1]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Endpoint contacts plus the deepest interior point when it is strictly
/// deeper than both ends. `dist(p)` must be convex along the segment.
fn segment_candidates(e0: Vec3, e1: Vec3, dist: impl Fn(Vec3) -> f64) -> Vec<Vec3> {
    if e0 == e1 {
        return vec![e0];
    }
    let at = |s: f64| e0 + (e1 - e0) * s;
    let s = golden_min(|s| dist(at(s)));
    let inner = at(s);
    let ends = dist(e0).min(dist(e1));
    if dist(inner) < ends - 1e-9 {
        vec![e0, e1, inner]
    } else {
        vec![e0, e1]
    }
}

fn capsule_box((e0, e1): (Vec3, Vec3), radius: f64, pose: &Pose, h: Vec3, margin: f64, out: &mut Vec<ContactPoint>) {
    let sdf = |p: Vec3| box_sdf(h, pose.inverse_transform_point(p)).0;
    for p in segment_candidates(e0, e1, sdf) {
        out.extend(point_box(p, radius, pose, h, margin));
    }
}

/// Closest points between a segment and a triangle (segment side first).
fn segment_triangle(e0: Vec3, e1: Vec3, [a, b, c]: [Vec3; 3]) -> (Vec3, Vec3) {
    let n = (b - a).cross(c - a);
    let (d0, d1) = ((e0 - a).dot(n), (e1 - a).dot(n));
    if d0 * d1 < 0.0 {
        let p = e0 + (e1 - e0) * (d0 / (d0 - d1));
        if closest_point_on_triangle(p, a, b, c).distance(p) < 1e-12 {
            return (p, p);
        }
    }
    let mut best = (e0, closest_point_on_triangle(e0, a, b, c));
    let mut consider = |p: Vec3, q: Vec3| {
        if p.distance(q) < best.0.distance(best.1) {
            best = (p, q);
        }
    };
    consider(e1, closest_point_on_triangle(e1, a, b, c));
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let (_, _, p, q) = closest_points_segments(e0, e1, u, v);
        consider(p, q);
    }
    best
}

fn capsule_triangle((e0, e1): (Vec3, Vec3), radius: f64, tri: [Vec3; 3], margin: f64, out: &mut Vec<ContactPoint>) {
    let [a, b, c] = tri;
    let fnormal = face_normal(a, b, c);
    let fallback = if ((e0 + e1) * 0.5 - a).dot(fnormal) >= 0.0 { fnormal } else { -fnormal };
    let (ps, pt) = segment_triangle(e0, e1, tri);
    let best = ps.distance(pt);
    let mut pairs = vec![(e0, closest_point_on_triangle(e0, a, b, c))];
    if e1 != e0 {
        pairs.push((e1, closest_point_on_triangle(e1, a, b, c)));
    }
    if pairs.iter().all(|(p, q)| p.distance(*q) > best + 1e-9) {
        pairs.push((ps, pt));
    }
    for (p, q) in pairs {
        out.extend(round_contact(p, radius, q, 0.0, fallback, margin));
    }
}

fn box_axes(pose: &Pose) -> [Vec3; 3] {
    [pose.orientation.rotate(Vec3::X), pose.orientation.rotate(Vec3::Y), pose.orientation.rotate(Vec3::Z)]
}

fn box_vertices(pose: &Pose, h: Vec3) -> [Vec3; 8] {
    std::array::from_fn(|k| {
        let local = Vec3::new(
            if k & 1 == 0 { -h.x } else { h.x },
            if k & 2 == 0 { -h.y } else { h.y },
            if k & 4 == 0 { -h.z } else { h.z },
        );
        pose.transform_point(local)
    })
}

fn box_triangle(pose: &Pose, h: Vec3, tri: [Vec3; 3], margin: f64, out: &mut Vec<ContactPoint>) {
    let [a, b, c] = tri;
    let mut n = face_normal(a, b, c);
    if (pose.position - a).dot(n) < 0.0 {
        n = -n;
    }
    for v in box_vertices(pose, h) {
        let cp = closest_point_on_triangle(v, a, b, c);
        let plane = (v - a).dot(n);
        let projected = v - n * plane;
        if projected.distance(cp) < 1e-12 {
            if plane <= margin && plane > -2.0 * h.max_elem() {
                out.push(ContactPoint { point: v, normal: n, separation: plane });
            }
        } else if plane >= 0.0 {
            out.extend(round_contact(v, 0.0, cp, 0.0, n, margin));
        }
    }
    for t in tri {
        let (dist, nl) = box_sdf(h, pose.inverse_transform_point(t));
        if dist <= margin {
            let grad = pose.transform_vector(nl);
            out.push(ContactPoint { point: t - grad * dist, normal: -grad, separation: dist });
        }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    FaceA(usize),
    FaceB(usize),
    Edge(usize, usize),
}

/// Separating-axis test with a clipped face manifold (at most 4 points) or a
/// single edge-edge point.
fn box_box(pa: &Pose, ha: Vec3, pb: &Pose, hb: Vec3, margin: f64, out: &mut Vec<ContactPoint>) {
    let ua = box_axes(pa);
    let ub = box_axes(pb);
    let d = pb.position - pa.position;
    let sep_on = |l: Vec3| {
        let ra: f64 = (0..3).map(|k| ha[k] * ua[k].dot(l).abs()).sum();
        let rb: f64 = (0..3).map(|k| hb[k] * ub[k].dot(l).abs()).sum();
        d.dot(l).abs() - ra - rb
    };
    let mut best_a = (f64::NEG_INFINITY, 0);
    let mut best_b = (f64::NEG_INFINITY, 0);
    let mut best_e = (f64::NEG_INFINITY, 0, 0, Vec3::ZERO);
    for k in 0..3 {
        let s = sep_on(ua[k]);
        if s > margin {
            return;
        }
        if s > best_a.0 {
            best_a = (s, k);
        }
    }
    for k in 0..3 {
        let s = sep_on(ub[k]);
        if s > margin {
            return;
        }
        if s > best_b.0 {
            best_b = (s, k);
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let c = ua[i].cross(ub[j]);
            if c.norm() < 1e-6 {
                continue;
            }
            let l = c.normalize();
            let s = sep_on(l);
            if s > margin {
                return;
            }
            if s > best_e.0 {
                best_e = (s, i, j, l);
            }
        }
    }
    let (mut sep, mut axis, mut l) = (best_a.0, Axis::FaceA(best_a.1), ua[best_a.1]);
    if best_b.0 > sep + 1e-6 {
        (sep, axis, l) = (best_b.0, Axis::FaceB(best_b.1), ub[best_b.1]);
    }
    if best_e.0 > sep + 1e-5 {
        axis = Axis::Edge(best_e.1, best_e.2);
        l = best_e.3;
    }
    // Orient from b toward a.
    let n = if l.dot(d) > 0.0 { -l } else { l };
    match axis {
        Axis::FaceA(k) => {
            let nr = -n;
            for (p, s) in clip_faces(pa.position, ua, ha, k, nr, pb.position, ub, hb, margin) {
                out.push(ContactPoint { point: p - nr * s, normal: n, separation: s });
            }
        }
        Axis::FaceB(k) => {
            for (p, s) in clip_faces(pb.position, ub, hb, k, n, pa.position, ua, ha, margin) {
                out.push(ContactPoint { point: p, normal: n, separation: s });
            }
        }
        Axis::Edge(i, j) => {
            let edge = |c: Vec3, u: [Vec3; 3], h: Vec3, axis: usize, toward: Vec3| {
                let mut mid = c;
                for k in (0..3).filter(|&k| k != axis) {
                    let s = if u[k].dot(toward) >= 0.0 { 1.0 } else { -1.0 };
                    mid += u[k] * (s * h[k]);
                }
                (mid - u[axis] * h[axis], mid + u[axis] * h[axis])
            };
            let (a0, a1) = edge(pa.position, ua, ha, i, -n);
            let (b0, b1) = edge(pb.position, ub, hb, j, n);
            let (_, _, qa, qb) = closest_points_segments(a0, a1, b0, b1);
            let s = (qa - qb).dot(n);
            if s <= margin {
                out.push(ContactPoint { point: qa, normal: n, separation: s });
            }
        }
    }
}

/// Clips the incident face of box `i` against reference face `k` of box `r`
/// (outward normal `nr`). Returns incident-surface points with their
/// separation from the reference face.
#[allow(clippy::too_many_arguments)]
fn clip_faces(
    rc: Vec3,
    ru: [Vec3; 3],
    rh: Vec3,
    k: usize,
    nr: Vec3,
    ic: Vec3,
    iu: [Vec3; 3],
    ih: Vec3,
    margin: f64,
) -> Vec<(Vec3, f64)> {
    // Incident face: most anti-parallel to the reference normal.
    let mut best = 0;
    for m in 1..3 {
        if iu[m].dot(nr).abs() > iu[best].dot(nr).abs() {
            best = m;
        }
    }
    let sign = if iu[best].dot(nr) > 0.0 { -1.0 } else { 1.0 };
    let (i1, i2) = ((best + 1) % 3, (best + 2) % 3);
    let fc = ic + iu[best] * (sign * ih[best]);
    let (e1, e2) = (iu[i1] * ih[i1], iu[i2] * ih[i2]);
    let mut poly = vec![fc + e1 + e2, fc - e1 + e2, fc - e1 - e2, fc + e1 - e2];

    let ref_center = rc + nr * rh[k];
    for m in [(k + 1) % 3, (k + 2) % 3] {
        for s in [1.0, -1.0] {
            let pn = ru[m] * s;
            let off = pn.dot(rc) + rh[m];
            poly = clip_polygon(&poly, pn, off);
            if poly.is_empty() {
                return Vec::new();
            }
        }
    }
    let mut pts: Vec<(Vec3, f64)> = poly
        .into_iter()
        .map(|p| (p, (p - ref_center).dot(nr)))
        .filter(|&(_, s)| s <= margin)
        .collect();
    reduce_manifold(&mut pts);
    pts
}

/// Sutherland-Hodgman clip keeping `pn · p <= off`.
fn clip_polygon(poly: &[Vec3], pn: Vec3, off: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 4);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (da, db) = (pn.dot(a) - off, pn.dot(b) - off);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

/// Keeps at most four points: the deepest, then greedily the point farthest
/// from those already kept.
fn reduce_manifold(pts: &mut Vec<(Vec3, f64)>) {
    if pts.len() <= 4 {
        return;
    }
    let mut deepest = 0;
    for i in 1..pts.len() {
        if pts[i].1 < pts[deepest].1 {
            deepest = i;
        }
    }
    let mut keep = vec![deepest];
    while keep.len() < 4 {
        let mut best = None;
        let mut best_d = -1.0;
        for i in 0..pts.len() {
            if keep.contains(&i) {
                continue;
            }
            let d = keep.iter().map(|&j| pts[i].0.distance(pts[j].0)).fold(f64::INFINITY, f64::min);
            if d > best_d {
                best_d = d;
                best = Some(i);
            }
        }
        keep.push(best.expect("more than four points"));
    }
    keep.sort_unstable();
    *pts = keep.into_iter().map(|i| pts[i]).collect();
}
