//! Rod geometry: segment intersection and distance predicates.
//!
//! The intersection predicate uses orientation tests with a fixed tolerance
//! of 1e-12 on the determinant; ambiguous near-parallel cases resolve to
//! "intersecting", which is conservative for hard-core exclusion.

use crate::config::{Location, Mark, Particle};

pub const ORIENT_TOL: f64 = 1e-12;

/// Endpoints of the rod of half-length `r` at angle `gamma` centered at `c`.
pub fn rod_endpoints(c: [f64; 2], gamma: f64, r: f64) -> ([f64; 2], [f64; 2]) {
    let (s, cos) = gamma.sin_cos();
    (
        [c[0] - r * cos, c[1] - r * s],
        [c[0] + r * cos, c[1] + r * s],
    )
}

/// Sign of the orientation of (p, q, r) with the declared tolerance.
fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> i32 {
    let det = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    if det > ORIENT_TOL {
        1
    } else if det < -ORIENT_TOL {
        -1
    } else {
        0
    }
}

fn on_segment(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
    r[0] >= p[0].min(q[0]) - ORIENT_TOL
        && r[0] <= p[0].max(q[0]) + ORIENT_TOL
        && r[1] >= p[1].min(q[1]) - ORIENT_TOL
        && r[1] <= p[1].max(q[1]) + ORIENT_TOL
}

/// Whether two closed segments intersect.
pub fn segments_intersect(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> bool {
    let o1 = orient(a1, a2, b1);
    let o2 = orient(a1, a2, b2);
    let o3 = orient(b1, b2, a1);
    let o4 = orient(b1, b2, a2);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    // collinear or degenerate cases; ties count as intersecting
    (o1 == 0 && on_segment(a1, a2, b1))
        || (o2 == 0 && on_segment(a1, a2, b2))
        || (o3 == 0 && on_segment(b1, b2, a1))
        || (o4 == 0 && on_segment(b1, b2, a2))
}

/// Whether the rods carried by two particles intersect.
pub fn rods_intersect(a: &Particle, b: &Particle, half_length: f64) -> bool {
    let (ca, ga) = rod_data(a);
    let (cb, gb) = rod_data(b);
    let (a1, a2) = rod_endpoints(ca, ga, half_length);
    let (b1, b2) = rod_endpoints(cb, gb, half_length);
    segments_intersect(a1, a2, b1, b2)
}

fn rod_data(p: &Particle) -> ([f64; 2], f64) {
    let c = p.location.as_real();
    let gamma = match p.mark {
        Mark::Angle(g) => g,
        _ => panic!("rod particle must carry an angle mark"),
    };
    ([c[0], c[1]], gamma)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(ap, ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Euclidean distance between two closed segments.
pub fn segment_distance(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> f64 {
    if segments_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    point_segment_distance(a1, b1, b2)
        .min(point_segment_distance(a2, b1, b2))
        .min(point_segment_distance(b1, a1, a2))
        .min(point_segment_distance(b2, a1, a2))
}

/// Membership test behind `Region::RodNeighborhood`: the particle's rod
/// intersects (inflate = 0) or comes within `inflate` of the anchored rod.
pub fn rod_region_contains(
    center: [f64; 2],
    angle: f64,
    half_length: f64,
    inflate: f64,
    p: &Particle,
) -> bool {
    if !matches!(p.mark, Mark::Angle(_))
        || !matches!(p.location, Location::Real(_) | Location::Lattice(_))
    {
        return false;
    }
    if p.location.dim() != 2 {
        return false;
    }
    let (cp, gp) = rod_data(p);
    let (a1, a2) = rod_endpoints(center, angle, half_length);
    let (b1, b2) = rod_endpoints(cp, gp, half_length);
    if inflate == 0.0 {
        segments_intersect(a1, a2, b1, b2)
    } else {
        segment_distance(a1, a2, b1, b2) <= inflate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rod(x: f64, y: f64, gamma: f64) -> Particle {
        Particle::real(&[x, y], Mark::Angle(gamma))
    }

    #[test]
    fn identical_rods_intersect() {
        let a = rod(0.3, -0.7, 0.9);
        assert!(rods_intersect(&a, &a, 1.5));
    }

    #[test]
    fn parallel_disjoint_rods_do_not_intersect() {
        let a = rod(0.0, 0.0, 0.0);
        let b = rod(0.0, 1.0, 0.0);
        assert!(!rods_intersect(&a, &b, 2.0));
    }

    #[test]
    fn crossing_rods_intersect() {
        let a = rod(0.0, 0.0, 0.0);
        let b = rod(1.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert!(rods_intersect(&a, &b, 2.0));
    }

    #[test]
    fn touching_endpoints_count_as_intersecting() {
        let a = rod(0.0, 0.0, 0.0);
        let b = rod(2.0, 0.0, 0.0); // rods [-1,1] and [1,3] touch at x=1
        assert!(rods_intersect(&a, &b, 1.0));
    }

    #[test]
    fn intersection_is_symmetric() {
        let mut s = crate::rng::Stream::keyed(3, 3);
        for _ in 0..500 {
            let a = rod(
                s.uniform() * 4.0 - 2.0,
                s.uniform() * 4.0 - 2.0,
                s.uniform() * std::f64::consts::PI,
            );
            let b = rod(
                s.uniform() * 4.0 - 2.0,
                s.uniform() * 4.0 - 2.0,
                s.uniform() * std::f64::consts::PI,
            );
            assert_eq!(rods_intersect(&a, &b, 1.0), rods_intersect(&b, &a, 1.0));
        }
    }

    #[test]
    fn segment_distance_matches_hand_cases() {
        // parallel horizontal segments one unit apart
        let d = segment_distance([-1.0, 0.0], [1.0, 0.0], [-1.0, 1.0], [1.0, 1.0]);
        assert!((d - 1.0).abs() < 1e-12);
        // crossing segments have distance zero
        let d = segment_distance([-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]);
        assert_eq!(d, 0.0);
        // endpoint-to-endpoint diagonal
        let d = segment_distance([0.0, 0.0], [1.0, 0.0], [2.0, 1.0], [3.0, 1.0]);
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-12);
    }
}
