//! Particle configurations and the primitives on them: counting, restriction,
//! superposition, delta-embedding and neighborhood membership.
//!
//! A configuration is a finite multiset of particles on a window. The product
//! metric on particles is the sup-norm on locations plus a mark distance
//! (discrete for spins and contour shapes, arc distance for angles); the
//! delta-embedding predicate is decided by exact maximum bipartite matching.

use crate::contours::ContourShape;
use std::fmt;
use std::sync::Arc;

/// Location in the underlying space: a lattice site or a point of R^d.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Lattice(Vec<i64>),
    Real(Vec<f64>),
}

impl Location {
    pub fn dim(&self) -> usize {
        match self {
            Location::Lattice(v) => v.len(),
            Location::Real(v) => v.len(),
        }
    }

    pub fn as_real(&self) -> Vec<f64> {
        match self {
            Location::Lattice(v) => v.iter().map(|&c| c as f64).collect(),
            Location::Real(v) => v.clone(),
        }
    }

    /// Sup-norm distance; locations of different kinds or dimensions are
    /// infinitely far apart.
    pub fn sup_distance(&self, other: &Location) -> f64 {
        match (self, other) {
            (Location::Lattice(a), Location::Lattice(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y).abs() as f64)
                .fold(0.0, f64::max),
            (Location::Real(a), Location::Real(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y).abs())
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }

    fn key(&self) -> (u8, Vec<i64>) {
        match self {
            Location::Lattice(v) => (0, v.clone()),
            Location::Real(v) => (1, v.iter().map(|c| order_key_f64(*c)).collect()),
        }
    }
}

/// Total-order key for f64 that agrees with the numeric order on non-NaN.
fn order_key_f64(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        i64::MIN ^ bits
    } else {
        bits
    }
}

/// Animal mark: a spin, a rod orientation in [0, pi), or a rooted contour.
#[derive(Clone, Debug, PartialEq)]
pub enum Mark {
    Plus,
    Minus,
    Angle(f64),
    Contour(Arc<ContourShape>),
}

impl Mark {
    pub fn opposite(&self) -> Mark {
        match self {
            Mark::Plus => Mark::Minus,
            Mark::Minus => Mark::Plus,
            other => other.clone(),
        }
    }

    /// Mark distance: discrete metric on spins and shapes, arc distance on
    /// angles; marks of different kinds are infinitely far apart.
    pub fn distance(&self, other: &Mark) -> f64 {
        match (self, other) {
            (Mark::Plus, Mark::Plus) | (Mark::Minus, Mark::Minus) => 0.0,
            (Mark::Plus, Mark::Minus) | (Mark::Minus, Mark::Plus) => 1.0,
            (Mark::Angle(a), Mark::Angle(b)) => {
                let d = (a - b).abs() % std::f64::consts::PI;
                d.min(std::f64::consts::PI - d)
            }
            (Mark::Contour(a), Mark::Contour(b)) => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            _ => f64::INFINITY,
        }
    }

    fn key(&self) -> (u8, i64, Vec<(i16, i16, u8)>) {
        match self {
            Mark::Plus => (0, 0, Vec::new()),
            Mark::Minus => (1, 0, Vec::new()),
            Mark::Angle(a) => (2, order_key_f64(*a), Vec::new()),
            Mark::Contour(c) => (3, 0, c.edge_key()),
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mark::Plus => write!(f, "+"),
            Mark::Minus => write!(f, "-"),
            Mark::Angle(a) => write!(f, "a:{:.17e}", a),
            Mark::Contour(c) => write!(f, "c:{}", c.encode()),
        }
    }
}

/// A particle: an animal mark positioned at a location.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub location: Location,
    pub mark: Mark,
}

impl Particle {
    pub fn lattice(coords: &[i64], mark: Mark) -> Self {
        Particle {
            location: Location::Lattice(coords.to_vec()),
            mark,
        }
    }

    pub fn real(coords: &[f64], mark: Mark) -> Self {
        Particle {
            location: Location::Real(coords.to_vec()),
            mark,
        }
    }

    /// Product metric d = d_S + d_G.
    pub fn distance(&self, other: &Particle) -> f64 {
        self.location.sup_distance(&other.location) + self.mark.distance(&other.mark)
    }

    fn key(&self) -> ParticleKey {
        (self.location.key(), self.mark.key())
    }
}

type ParticleKey = ((u8, Vec<i64>), (u8, i64, Vec<(i16, i16, u8)>));

/// Spin subset selector for product regions.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkSet {
    All,
    Spins { plus: bool, minus: bool },
}

impl MarkSet {
    pub fn contains(&self, mark: &Mark) -> bool {
        match self {
            MarkSet::All => true,
            MarkSet::Spins { plus, minus } => match mark {
                Mark::Plus => *plus,
                Mark::Minus => *minus,
                _ => false,
            },
        }
    }

    pub fn both() -> Self {
        MarkSet::Spins {
            plus: true,
            minus: true,
        }
    }

    pub fn only(mark: &Mark) -> Self {
        match mark {
            Mark::Plus => MarkSet::Spins {
                plus: true,
                minus: false,
            },
            Mark::Minus => MarkSet::Spins {
                plus: false,
                minus: true,
            },
            _ => MarkSet::All,
        }
    }
}

/// Finitely describable region of the particle space. Membership is exact and
/// decidable for every particle; general Borel sets are out of scope.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// The whole space.
    All,
    /// Lattice box, inclusive bounds, times a mark set.
    LatticeBox {
        lo: Vec<i64>,
        hi: Vec<i64>,
        marks: MarkSet,
    },
    /// Closed real box times a mark set.
    RealBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        marks: MarkSet,
    },
    /// Finite set of lattice sites times a mark set.
    LatticeSites {
        sites: Vec<Vec<i64>>,
        marks: MarkSet,
    },
    /// Particles whose rod intersects (inflate = 0) or comes within `inflate`
    /// of the anchored rod.
    RodNeighborhood {
        center: [f64; 2],
        angle: f64,
        half_length: f64,
        inflate: f64,
    },
    /// Contours sharing a dual site with the given site set.
    ContourMeeting { sites: Vec<(i64, i64)> },
    /// Complement of `inner` within `within`.
    Complement {
        inner: Box<Region>,
        within: Box<Region>,
    },
    /// Finite union.
    Union(Vec<Region>),
}

impl Region {
    pub fn lattice_box(lo: &[i64], hi: &[i64]) -> Region {
        Region::LatticeBox {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            marks: MarkSet::All,
        }
    }

    pub fn real_box(lo: &[f64], hi: &[f64]) -> Region {
        Region::RealBox {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            marks: MarkSet::All,
        }
    }

    pub fn contains(&self, p: &Particle) -> bool {
        match self {
            Region::All => true,
            Region::LatticeBox { lo, hi, marks } => {
                marks.contains(&p.mark)
                    && match &p.location {
                        Location::Lattice(v) => {
                            v.len() == lo.len()
                                && v.iter()
                                    .zip(lo.iter().zip(hi))
                                    .all(|(&c, (&l, &h))| l <= c && c <= h)
                        }
                        Location::Real(_) => false,
                    }
            }
            Region::RealBox { lo, hi, marks } => {
                marks.contains(&p.mark) && {
                    let v = p.location.as_real();
                    v.len() == lo.len()
                        && v.iter()
                            .zip(lo.iter().zip(hi))
                            .all(|(&c, (&l, &h))| l <= c && c <= h)
                }
            }
            Region::LatticeSites { sites, marks } => {
                marks.contains(&p.mark)
                    && match &p.location {
                        Location::Lattice(v) => sites.iter().any(|s| s == v),
                        Location::Real(_) => false,
                    }
            }
            Region::RodNeighborhood {
                center,
                angle,
                half_length,
                inflate,
            } => crate::models::geometry::rod_region_contains(
                *center,
                *angle,
                *half_length,
                *inflate,
                p,
            ),
            Region::ContourMeeting { sites } => match (&p.location, &p.mark) {
                (Location::Lattice(v), Mark::Contour(shape)) if v.len() == 2 => shape
                    .sites()
                    .iter()
                    .any(|&(dx, dy)| sites.contains(&(v[0] + dx as i64, v[1] + dy as i64))),
                _ => false,
            },
            Region::Complement { inner, within } => within.contains(p) && !inner.contains(p),
            Region::Union(parts) => parts.iter().any(|r| r.contains(p)),
        }
    }

    /// Conservative cover test: returns true only when self provably contains
    /// every particle of `other`.
    pub fn covers(&self, other: &Region) -> bool {
        if self == other {
            return true;
        }
        match (self, other) {
            (Region::All, _) => true,
            (
                Region::LatticeBox { lo, hi, marks },
                Region::LatticeBox {
                    lo: l2,
                    hi: h2,
                    marks: m2,
                },
            ) => {
                mark_covers(marks, m2)
                    && lo.iter().zip(l2).all(|(a, b)| a <= b)
                    && hi.iter().zip(h2).all(|(a, b)| a >= b)
            }
            (
                Region::RealBox { lo, hi, marks },
                Region::RealBox {
                    lo: l2,
                    hi: h2,
                    marks: m2,
                },
            ) => {
                mark_covers(marks, m2)
                    && lo.iter().zip(l2).all(|(a, b)| a <= b)
                    && hi.iter().zip(h2).all(|(a, b)| a >= b)
            }
            (Region::LatticeBox { lo, hi, marks }, Region::LatticeSites { sites, marks: m2 }) => {
                mark_covers(marks, m2)
                    && sites.iter().all(|s| {
                        s.len() == lo.len()
                            && s.iter()
                                .zip(lo.iter().zip(hi))
                                .all(|(&c, (&l, &h))| l <= c && c <= h)
                    })
            }
            (
                Region::RealBox { lo, hi, marks },
                Region::RodNeighborhood {
                    center,
                    angle: _,
                    half_length,
                    inflate,
                },
            ) => {
                // rod neighborhoods live within a sup-ball of radius
                // 2 half_length + inflate around the anchor center
                let radius = 2.0 * half_length + inflate;
                matches!(marks, MarkSet::All)
                    && lo.len() == 2
                    && lo.iter().zip(center).all(|(&l, &c)| l <= c - radius)
                    && hi.iter().zip(center).all(|(&h, &c)| h >= c + radius)
            }
            (_, Region::Union(parts)) => parts.iter().all(|r| self.covers(r)),
            (Region::Union(parts), _) => parts.iter().any(|r| r.covers(other)),
            _ => false,
        }
    }

    /// Box inflated by `delta` in the sup-norm (real boxes only); other
    /// regions are returned unchanged wrapped in a union with themselves.
    pub fn inflate(&self, delta: f64) -> Region {
        match self {
            Region::RealBox { lo, hi, marks } => Region::RealBox {
                lo: lo.iter().map(|&c| c - delta).collect(),
                hi: hi.iter().map(|&c| c + delta).collect(),
                marks: marks.clone(),
            },
            Region::LatticeBox { lo, hi, marks } => {
                let d = delta.ceil() as i64;
                Region::LatticeBox {
                    lo: lo.iter().map(|&c| c - d).collect(),
                    hi: hi.iter().map(|&c| c + d).collect(),
                    marks: marks.clone(),
                }
            }
            Region::Union(parts) => Region::Union(parts.iter().map(|r| r.inflate(delta)).collect()),
            other => other.clone(),
        }
    }
}

fn mark_covers(a: &MarkSet, b: &MarkSet) -> bool {
    match (a, b) {
        (MarkSet::All, _) => true,
        (
            MarkSet::Spins { plus, minus },
            MarkSet::Spins {
                plus: p2,
                minus: m2,
            },
        ) => (*plus || !p2) && (*minus || !m2),
        _ => false,
    }
}

/// A finite multiset of particles supported on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleConfiguration {
    entries: Vec<(Particle, u32)>,
    pub window: Region,
}

impl ParticleConfiguration {
    pub fn empty(window: Region) -> Self {
        ParticleConfiguration {
            entries: Vec::new(),
            window,
        }
    }

    pub fn from_particles<I: IntoIterator<Item = Particle>>(window: Region, it: I) -> Self {
        let mut cfg = ParticleConfiguration::empty(window);
        for p in it {
            cfg.add(p, 1);
        }
        cfg
    }

    /// Adds `mult` copies of a particle, merging with an existing entry. The
    /// particle must lie in the configuration's window.
    pub fn add(&mut self, particle: Particle, mult: u32) {
        if mult == 0 {
            return;
        }
        debug_assert!(
            self.window.contains(&particle),
            "particle outside the window"
        );
        let key = particle.key();
        match self.entries.binary_search_by(|(p, _)| p.key().cmp(&key)) {
            Ok(i) => self.entries[i].1 += mult,
            Err(i) => self.entries.insert(i, (particle, mult)),
        }
    }

    pub fn entries(&self) -> &[(Particle, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of particles counting multiplicity.
    pub fn total_mass(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| m as u64).sum()
    }

    pub fn multiplicity(&self, p: &Particle) -> u32 {
        let key = p.key();
        match self.entries.binary_search_by(|(q, _)| q.key().cmp(&key)) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    /// The counting variable: total multiplicity inside the region.
    pub fn count(&self, region: &Region) -> u64 {
        self.entries
            .iter()
            .filter(|(p, _)| region.contains(p))
            .map(|&(_, m)| m as u64)
            .sum()
    }

    /// Restriction to a region; multiplicities preserved, window kept.
    pub fn restrict(&self, region: &Region) -> ParticleConfiguration {
        ParticleConfiguration {
            entries: self
                .entries
                .iter()
                .filter(|(p, _)| region.contains(p))
                .cloned()
                .collect(),
            window: self.window.clone(),
        }
    }

    /// Superposition: multiplicities add per particle; windows merge.
    pub fn superpose(&self, other: &ParticleConfiguration) -> ParticleConfiguration {
        let window = merge_windows(&self.window, &other.window);
        let mut out = ParticleConfiguration {
            entries: self.entries.clone(),
            window,
        };
        for (p, m) in &other.entries {
            out.add(p.clone(), *m);
        }
        out
    }

    /// Weighted support: one slot per particle copy.
    pub fn weighted_support(&self) -> Vec<&Particle> {
        let mut out = Vec::with_capacity(self.total_mass() as usize);
        for (p, m) in &self.entries {
            for _ in 0..*m {
                out.push(p);
            }
        }
        out
    }

    /// Canonical ordering key of entries, used for hashing into histograms.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (p, m) in &self.entries {
            out.extend_from_slice(format!("{:?}|{m};", p.key()).as_bytes());
        }
        out
    }
}

pub fn merge_windows(a: &Region, b: &Region) -> Region {
    if a == b {
        a.clone()
    } else if matches!(a, Region::All) || matches!(b, Region::All) {
        Region::All
    } else {
        Region::Union(vec![a.clone(), b.clone()])
    }
}

/// True iff `xi` is delta-embedded in `eta`: an injection from the weighted
/// support of `xi` into that of `eta` moving every copy by less than `delta`.
/// Decided by maximum bipartite matching on the strict-distance graph.
pub fn is_delta_embedded(
    xi: &ParticleConfiguration,
    eta: &ParticleConfiguration,
    delta: f64,
) -> bool {
    assert!(delta > 0.0, "delta must be positive");
    let sources = xi.weighted_support();
    let targets = eta.weighted_support();
    if sources.len() > targets.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = sources
        .iter()
        .map(|s| {
            targets
                .iter()
                .enumerate()
                .filter(|(_, t)| s.distance(t) < delta)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    maximum_matching(&adj, targets.len()) == sources.len()
}

/// Kuhn's augmenting-path maximum bipartite matching; exact.
fn maximum_matching(adj: &[Vec<usize>], n_targets: usize) -> usize {
    let mut match_target: Vec<Option<usize>> = vec![None; n_targets];
    let mut size = 0;
    for source in 0..adj.len() {
        let mut visited = vec![false; n_targets];
        if augment(source, adj, &mut match_target, &mut visited) {
            size += 1;
        }
    }
    size
}

fn augment(
    source: usize,
    adj: &[Vec<usize>],
    match_target: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &t in &adj[source] {
        if !visited[t] {
            visited[t] = true;
            if match_target[t].is_none()
                || augment(match_target[t].unwrap(), adj, match_target, visited)
            {
                match_target[t] = Some(source);
                return true;
            }
        }
    }
    false
}

/// Membership of `eta` in the (K, delta)-neighborhood of `xi`: both
/// restrictions embed into the other full configuration.
pub fn in_neighborhood(
    xi: &ParticleConfiguration,
    eta: &ParticleConfiguration,
    k: &Region,
    delta: f64,
) -> bool {
    is_delta_embedded(&xi.restrict(k), eta, delta) && is_delta_embedded(&eta.restrict(k), xi, delta)
}

pub mod serialization {
    //! Delimiter-separated configuration records.
    //!
    //! One record per entry: replica id, epsilon tag, coordinates, mark,
    //! multiplicity, tab-separated with coordinates space-joined. Lattice
    //! coordinates round-trip exactly as decimals; real coordinates are
    //! printed with 17 significant digits.

    use super::*;

    pub fn format_coord(value: f64) -> String {
        format!("{:.16e}", value)
    }

    pub fn record(replica: u64, eps: f64, particle: &Particle, mult: u32) -> String {
        let coords = match &particle.location {
            Location::Lattice(v) => v
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            Location::Real(v) => v
                .iter()
                .map(|&c| format_coord(c))
                .collect::<Vec<_>>()
                .join(" "),
        };
        let kind = match &particle.location {
            Location::Lattice(_) => "z",
            Location::Real(_) => "r",
        };
        format!(
            "{replica}\t{}\t{kind}\t{coords}\t{}\t{mult}",
            format_coord(eps),
            particle.mark
        )
    }

    pub fn write_config(out: &mut String, replica: u64, eps: f64, cfg: &ParticleConfiguration) {
        for (p, m) in cfg.entries() {
            out.push_str(&record(replica, eps, p, *m));
            out.push('\n');
        }
    }

    /// Parses a record line; the window of the resulting entry is unknown to
    /// the record format and must be supplied by the caller.
    pub fn parse_record(line: &str) -> Option<(u64, f64, Particle, u32)> {
        let mut parts = line.split('\t');
        let replica: u64 = parts.next()?.parse().ok()?;
        let eps: f64 = parts.next()?.parse().ok()?;
        let kind = parts.next()?;
        let coords = parts.next()?;
        let mark_text = parts.next()?;
        let mult: u32 = parts.next()?.parse().ok()?;
        let location = match kind {
            "z" => Location::Lattice(
                coords
                    .split(' ')
                    .map(|c| c.parse().ok())
                    .collect::<Option<Vec<i64>>>()?,
            ),
            "r" => Location::Real(
                coords
                    .split(' ')
                    .map(|c| c.parse().ok())
                    .collect::<Option<Vec<f64>>>()?,
            ),
            _ => return None,
        };
        let mark = match mark_text {
            "+" => Mark::Plus,
            "-" => Mark::Minus,
            other if other.starts_with("a:") => Mark::Angle(other[2..].parse().ok()?),
            other if other.starts_with("c:") => {
                Mark::Contour(Arc::new(ContourShape::decode(&other[2..])?))
            }
            _ => return None,
        };
        Some((replica, eps, Particle { location, mark }, mult))
    }
}
