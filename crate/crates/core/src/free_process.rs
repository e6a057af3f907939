//! Lazy, exact generation of the stationary free cylinder process.
//!
//! The free process is a Poisson process of cylinders (basis particle, birth
//! time, mean-1 exponential lifespan, uniform flag) with intensity
//! e^(-delta_E) nu per unit time. The substrate partitions the location
//! space into cells of finite intensity mass and maintains one backward
//! timeline per cell: queries must arrive in non-increasing time order per
//! cell, and each query reveals exactly the cylinders alive at the query
//! time that were not already revealed.
//!
//! Conditional on the last query time t_last, the cylinders alive at t < t_last
//! but dead by t_last form an independent Poisson batch of mean
//! m_c (1 - e^-(t_last - t)); their ages are mean-1 exponentials and their
//! residual lifetimes are mean-1 exponentials conditioned to end before
//! t_last. All draws come from the cell's dedicated stream, keyed by
//! (seed, cell id), so reveal sequences do not depend on the interleaving of
//! queries across cells.

use crate::config::{Location, Mark, Particle, Region};
use crate::contours::ContourCatalog;
use crate::error::ProcessError;
use crate::models::{IntensityMeasure, OrientationMeasure, Reach};
use crate::rng::{fnv1a, Stream};
use std::collections::HashMap;

/// Stable cylinder identity: (cell index in discovery order, reveal index
/// within the cell).
pub type CylinderId = (u32, u32);

/// A space-time cylinder with its acceptance flag.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    pub id: CylinderId,
    pub basis: Particle,
    pub birth: f64,
    pub lifespan: f64,
    pub flag: f64,
}

impl Cylinder {
    pub fn death(&self) -> f64 {
        self.birth + self.lifespan
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death()
    }
}

/// Cell identifier within a partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CellKey {
    /// Lattice site (unit or scaled lattice).
    Site(Vec<i64>),
    /// Continuum box with corner at (index * edge).
    Box(Vec<i64>),
    /// Contour class: root site and perimeter.
    Contour((i64, i64), u32),
}

impl CellKey {
    fn label(&self) -> u64 {
        let text = match self {
            CellKey::Site(v) => format!("s:{v:?}"),
            CellKey::Box(v) => format!("b:{v:?}"),
            CellKey::Contour(site, l) => format!("c:{site:?}:{l}"),
        };
        fnv1a(text.as_bytes())
    }
}

/// Cell partition: geometry plus the intensity restricted to each cell.
#[derive(Clone, Debug)]
pub struct Partition {
    pub intensity: IntensityMeasure,
    /// Edge length of continuum cells; ignored for lattice intensities.
    pub cell_edge: f64,
    contour_offsets: Option<HashMap<u32, (i64, i64, i64, i64)>>,
}

impl Partition {
    pub fn new(intensity: IntensityMeasure, cell_edge: f64) -> Partition {
        assert!(cell_edge > 0.0);
        let contour_offsets = match &intensity {
            IntensityMeasure::Contours { catalog, .. } => Some(per_class_offsets(catalog)),
            _ => None,
        };
        Partition {
            intensity,
            cell_edge,
            contour_offsets,
        }
    }

    /// Intensity mass of one cell (before the e^(-delta_E) time scaling).
    pub fn cell_mass(&self, key: &CellKey) -> f64 {
        match (&self.intensity, key) {
            (
                IntensityMeasure::LatticeSpins {
                    lambda_plus,
                    lambda_minus,
                    ..
                },
                CellKey::Site(_),
            ) => lambda_plus + lambda_minus,
            (
                IntensityMeasure::ScaledLatticeSpins {
                    mass_plus,
                    mass_minus,
                    ..
                },
                CellKey::Site(_),
            ) => mass_plus + mass_minus,
            (
                IntensityMeasure::ContinuumSpins {
                    dim,
                    lambda_plus,
                    lambda_minus,
                },
                CellKey::Box(_),
            ) => (lambda_plus + lambda_minus) * self.cell_edge.powi(*dim as i32),
            (IntensityMeasure::LatticeRods { lambda, .. }, CellKey::Site(_)) => *lambda,
            (IntensityMeasure::ContinuumRods { lambda, .. }, CellKey::Box(_)) => {
                lambda * self.cell_edge * self.cell_edge
            }
            (IntensityMeasure::Contours { beta, catalog }, CellKey::Contour(_, l)) => {
                catalog.count(*l) as f64 * (-2.0 * beta * *l as f64).exp()
            }
            _ => panic!("cell key does not match the partition intensity"),
        }
    }

    /// Draws a basis particle from the normalized cell restriction. Draw
    /// order per cylinder is fixed: location coordinates first, mark second.
    pub fn sample_basis(&self, key: &CellKey, stream: &mut Stream) -> Particle {
        match (&self.intensity, key) {
            (
                IntensityMeasure::LatticeSpins {
                    lambda_plus,
                    lambda_minus,
                    ..
                },
                CellKey::Site(v),
            ) => Particle {
                location: Location::Lattice(v.clone()),
                mark: sample_spin(*lambda_plus, *lambda_minus, stream),
            },
            (
                IntensityMeasure::ScaledLatticeSpins {
                    spacing,
                    mass_plus,
                    mass_minus,
                    ..
                },
                CellKey::Site(v),
            ) => Particle {
                location: Location::Real(v.iter().map(|&n| n as f64 * spacing).collect()),
                mark: sample_spin(*mass_plus, *mass_minus, stream),
            },
            (
                IntensityMeasure::ContinuumSpins {
                    lambda_plus,
                    lambda_minus,
                    ..
                },
                CellKey::Box(v),
            ) => {
                let location = self.sample_box_location(v, stream);
                Particle {
                    location,
                    mark: sample_spin(*lambda_plus, *lambda_minus, stream),
                }
            }
            (IntensityMeasure::LatticeRods { orientation, .. }, CellKey::Site(v)) => Particle {
                location: Location::Lattice(v.clone()),
                mark: sample_orientation(orientation, stream),
            },
            (IntensityMeasure::ContinuumRods { orientation, .. }, CellKey::Box(v)) => {
                let location = self.sample_box_location(v, stream);
                Particle {
                    location,
                    mark: sample_orientation(orientation, stream),
                }
            }
            (IntensityMeasure::Contours { catalog, .. }, CellKey::Contour(site, l)) => {
                let shapes = catalog.shapes(*l);
                let idx = ((stream.uniform() * shapes.len() as f64) as usize).min(shapes.len() - 1);
                Particle {
                    location: Location::Lattice(vec![site.0, site.1]),
                    mark: Mark::Contour(shapes[idx].clone()),
                }
            }
            _ => panic!("cell key does not match the partition intensity"),
        }
    }

    fn sample_box_location(&self, index: &[i64], stream: &mut Stream) -> Location {
        Location::Real(
            index
                .iter()
                .map(|&i| (i as f64 + stream.uniform()) * self.cell_edge)
                .collect(),
        )
    }

    /// Cells overlapping a finite window region (for root reveals).
    pub fn cells_covering(&self, window: &Region) -> Vec<CellKey> {
        match window {
            Region::Union(parts) => {
                let mut out: Vec<CellKey> = Vec::new();
                for part in parts {
                    for key in self.cells_covering(part) {
                        if !out.contains(&key) {
                            out.push(key);
                        }
                    }
                }
                out
            }
            Region::LatticeBox { lo, hi, .. } => self.site_cells_in_box(lo, hi),
            Region::LatticeSites { sites, .. } => match &self.intensity {
                IntensityMeasure::Contours { .. } => sites
                    .iter()
                    .flat_map(|s| self.contour_cells_for_site((s[0], s[1])))
                    .collect(),
                _ => sites.iter().map(|s| CellKey::Site(s.clone())).collect(),
            },
            Region::RealBox { lo, hi, .. } => self.cells_in_real_box(lo, hi),
            _ => panic!("window must be a finite box, site set, or union"),
        }
    }

    fn site_cells_in_box(&self, lo: &[i64], hi: &[i64]) -> Vec<CellKey> {
        match &self.intensity {
            IntensityMeasure::LatticeSpins { .. } | IntensityMeasure::LatticeRods { .. } => {
                enumerate_box(lo, hi)
                    .into_iter()
                    .map(CellKey::Site)
                    .collect()
            }
            IntensityMeasure::Contours { .. } => enumerate_box(lo, hi)
                .into_iter()
                .flat_map(|s| self.contour_cells_for_site((s[0], s[1])))
                .collect(),
            _ => panic!("lattice window over a non-lattice intensity"),
        }
    }

    fn contour_cells_for_site(&self, site: (i64, i64)) -> Vec<CellKey> {
        match &self.intensity {
            IntensityMeasure::Contours { catalog, .. } => catalog
                .perimeters()
                .filter(|&l| catalog.count(l) > 0)
                .map(|l| CellKey::Contour(site, l))
                .collect(),
            _ => unreachable!(),
        }
    }

    fn cells_in_real_box(&self, lo: &[f64], hi: &[f64]) -> Vec<CellKey> {
        match &self.intensity {
            IntensityMeasure::ContinuumSpins { .. } | IntensityMeasure::ContinuumRods { .. } => {
                let a = self.cell_edge;
                let lo_idx: Vec<i64> = lo.iter().map(|&c| (c / a).floor() as i64).collect();
                let hi_idx: Vec<i64> = hi.iter().map(|&c| (c / a).floor() as i64).collect();
                enumerate_box(&lo_idx, &hi_idx)
                    .into_iter()
                    .map(CellKey::Box)
                    .collect()
            }
            IntensityMeasure::ScaledLatticeSpins { spacing, .. } => {
                let lo_idx: Vec<i64> = lo.iter().map(|&c| (c / spacing).ceil() as i64).collect();
                let hi_idx: Vec<i64> = hi.iter().map(|&c| (c / spacing).floor() as i64).collect();
                enumerate_box(&lo_idx, &hi_idx)
                    .into_iter()
                    .map(CellKey::Site)
                    .collect()
            }
            IntensityMeasure::LatticeSpins { .. } | IntensityMeasure::LatticeRods { .. } => {
                let lo_idx: Vec<i64> = lo.iter().map(|&c| c.ceil() as i64).collect();
                let hi_idx: Vec<i64> = hi.iter().map(|&c| c.floor() as i64).collect();
                enumerate_box(&lo_idx, &hi_idx)
                    .into_iter()
                    .map(CellKey::Site)
                    .collect()
            }
            IntensityMeasure::Contours { .. } => {
                panic!("contour windows are lattice site sets")
            }
        }
    }

    /// Cells whose particles could lie in the relation region with the given
    /// location reach. The ball is padded by a relative epsilon so that
    /// boundary sites are never lost to rounding in the index arithmetic.
    pub fn cells_for_reach(&self, reach: &Reach) -> Vec<CellKey> {
        match reach {
            Reach::Ball { center, radius } => {
                let pad = radius * 1e-12 + 1e-12;
                let lo: Vec<f64> = center.iter().map(|&c| c - radius - pad).collect();
                let hi: Vec<f64> = center.iter().map(|&c| c + radius + pad).collect();
                self.cells_in_real_box(&lo, &hi)
            }
            Reach::ContourSites { sites } => {
                let offsets = self.contour_offsets.as_ref().expect("contour partition");
                let mut out = Vec::new();
                for (&l, &(min_x, min_y, max_x, max_y)) in offsets {
                    for &(sx, sy) in sites {
                        for rx in (sx - max_x)..=(sx - min_x) {
                            for ry in (sy - max_y)..=(sy - min_y) {
                                let key = CellKey::Contour((rx, ry), l);
                                if !out.contains(&key) {
                                    out.push(key);
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

fn per_class_offsets(catalog: &ContourCatalog) -> HashMap<u32, (i64, i64, i64, i64)> {
    let mut out = HashMap::new();
    for l in catalog.perimeters() {
        let mut b = (0i64, 0i64, 0i64, 0i64);
        for shape in catalog.shapes(l) {
            for &(x, y) in shape.sites() {
                b.0 = b.0.min(x as i64);
                b.1 = b.1.min(y as i64);
                b.2 = b.2.max(x as i64);
                b.3 = b.3.max(y as i64);
            }
        }
        out.insert(l, b);
    }
    out
}

fn enumerate_box(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Vec::new();
    }
    let mut out = vec![Vec::new()];
    for (l, h) in lo.iter().zip(hi) {
        let mut next = Vec::with_capacity(out.len() * (h - l + 1) as usize);
        for prefix in &out {
            for c in *l..=*h {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn sample_spin(mass_plus: f64, mass_minus: f64, stream: &mut Stream) -> Mark {
    if stream.uniform() * (mass_plus + mass_minus) < mass_plus {
        Mark::Plus
    } else {
        Mark::Minus
    }
}

fn sample_orientation(orientation: &OrientationMeasure, stream: &mut Stream) -> Mark {
    match orientation {
        OrientationMeasure::Uniform => Mark::Angle(stream.uniform() * std::f64::consts::PI),
        OrientationMeasure::Atoms(atoms) => {
            let weights: Vec<f64> = atoms.iter().map(|&(_, w)| w).collect();
            Mark::Angle(atoms[stream.weighted_index(&weights)].0)
        }
    }
}

struct CellTimeline {
    mass: f64,
    stream: Stream,
    revealed: Vec<Cylinder>,
    last_query: f64,
    reveal_count: u32,
}

/// Deterministic realization of the flagged free process, one backward
/// timeline per cell. A substrate is confined to one sampler activity at a
/// time; replicas use independent substrates with derived seeds.
pub struct Substrate {
    pub seed: u64,
    pub delta_e: f64,
    pub partition: Partition,
    cells: Vec<CellTimeline>,
    index: HashMap<CellKey, u32>,
}

impl Substrate {
    pub fn new(partition: Partition, delta_e: f64, seed: u64) -> Substrate {
        Substrate {
            seed,
            delta_e,
            partition,
            cells: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn for_model(model: &crate::models::GasModel, cell_edge: f64, seed: u64) -> Substrate {
        Substrate::new(
            Partition::new(model.intensity(), cell_edge),
            model.delta_e,
            seed,
        )
    }

    fn cell_index(&mut self, key: &CellKey) -> u32 {
        if let Some(&i) = self.index.get(key) {
            return i;
        }
        let mass = self.partition.cell_mass(key) * (-self.delta_e).exp();
        let stream = Stream::keyed(self.seed, key.label());
        let i = self.cells.len() as u32;
        self.cells.push(CellTimeline {
            mass,
            stream,
            revealed: Vec::new(),
            last_query: f64::INFINITY,
            reveal_count: 0,
        });
        self.index.insert(key.clone(), i);
        i
    }

    pub fn total_reveals(&self) -> u64 {
        self.cells.iter().map(|c| c.reveal_count as u64).sum()
    }

    /// All cylinders with basis in the cell alive at time t: previously
    /// revealed survivors plus the conditional batch of cylinders alive at t
    /// but dead by the previous query time.
    pub fn alive_at(&mut self, key: &CellKey, t: f64) -> Result<Vec<Cylinder>, ProcessError> {
        let idx = self.cell_index(key) as usize;
        let cell = &mut self.cells[idx];
        if t > cell.last_query {
            return Err(ProcessError::QueryOrderViolation {
                requested: t,
                last: cell.last_query,
            });
        }
        let gap = cell.last_query - t;
        let mean = if gap.is_finite() {
            cell.mass * (1.0 - (-gap).exp())
        } else {
            cell.mass
        };
        let count = if mean > 0.0 {
            cell.stream.poisson(mean)
        } else {
            0
        };
        for _ in 0..count {
            let age = cell.stream.exp1();
            let residual = if gap.is_finite() {
                cell.stream.exp1_truncated(gap)
            } else {
                cell.stream.exp1()
            };
            let basis = self.partition.sample_basis(key, &mut cell.stream);
            let flag = cell.stream.uniform();
            let cylinder = Cylinder {
                id: (idx as u32, cell.reveal_count),
                basis,
                birth: t - age,
                lifespan: age + residual,
                flag,
            };
            cell.reveal_count += 1;
            cell.revealed.push(cylinder);
        }
        cell.last_query = t;
        Ok(cell
            .revealed
            .iter()
            .filter(|c| c.alive_at(t))
            .cloned()
            .collect())
    }

    /// Union of `alive_at` over the cells meeting the window, filtered to
    /// exact window membership.
    pub fn reveal_window(
        &mut self,
        window: &Region,
        t: f64,
    ) -> Result<Vec<Cylinder>, ProcessError> {
        let mut out = Vec::new();
        for key in self.partition.cells_covering(window) {
            for cylinder in self.alive_at(&key, t)? {
                if window.contains(&cylinder.basis) {
                    out.push(cylinder);
                }
            }
        }
        Ok(out)
    }

    /// Cells to reveal for ancestors of a particle with the given reach.
    pub fn cells_for_reach(&self, reach: &Reach) -> Vec<CellKey> {
        self.partition.cells_for_reach(reach)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GasModel, ModelKind};
    use crate::stats;

    fn wr_partition() -> Partition {
        let model = GasModel::new(ModelKind::DiscreteWr {
            lambda_plus: 0.05,
            lambda_minus: 0.05,
            k: 1,
            dim: 2,
        });
        Partition::new(model.intensity(), 1.0)
    }

    #[test]
    fn zero_mass_cell_is_always_empty() {
        let intensity = IntensityMeasure::LatticeSpins {
            dim: 2,
            lambda_plus: 0.0,
            lambda_minus: 0.0,
        };
        let mut sub = Substrate::new(Partition::new(intensity, 1.0), 0.0, 1);
        let key = CellKey::Site(vec![0, 0]);
        assert!(sub.alive_at(&key, 0.0).unwrap().is_empty());
        assert!(sub.alive_at(&key, -5.0).unwrap().is_empty());
    }

    #[test]
    fn first_query_count_is_poisson_of_cell_mass() {
        let key = CellKey::Site(vec![0, 0]);
        let n = 10_000;
        let mass = 0.1; // lattice WR with both fugacities 0.05
        let mut counts = vec![0.0; 8];
        let mut total = 0u64;
        for rep in 0..n {
            let mut sub = Substrate::new(wr_partition(), 0.0, crate::rng::derive_seed(77, rep));
            let alive = sub.alive_at(&key, 0.0).unwrap();
            total += alive.len() as u64;
            let k = alive.len().min(7);
            counts[k] += 1.0;
        }
        let mean = total as f64 / n as f64;
        let sigma = (mass / n as f64).sqrt();
        assert!((mean - mass).abs() < 3.0 * sigma, "mean {mean}");
        let expected: Vec<f64> = stats::poisson_pmf(mass, 7)
            .iter()
            .map(|p| p * n as f64)
            .collect();
        let (_, _, p) = stats::chi_square_gof(&counts, &expected, 5.0);
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn repeated_query_at_same_time_is_idempotent() {
        let mut sub = Substrate::new(wr_partition(), 0.0, 5);
        let key = CellKey::Site(vec![3, -1]);
        let first = sub.alive_at(&key, 0.0).unwrap();
        let second = sub.alive_at(&key, 0.0).unwrap();
        assert_eq!(first, second);
        let earlier = sub.alive_at(&key, -2.5).unwrap();
        let again = sub.alive_at(&key, -2.5).unwrap();
        assert_eq!(earlier, again);
    }

    #[test]
    fn empty_window_reveals_nothing() {
        let mut sub = Substrate::new(wr_partition(), 0.0, 5);
        let empty = crate::config::Region::LatticeSites {
            sites: vec![],
            marks: crate::config::MarkSet::All,
        };
        assert!(sub.reveal_window(&empty, 0.0).unwrap().is_empty());
    }

    #[test]
    fn query_order_violation_is_reported() {
        let mut sub = Substrate::new(wr_partition(), 0.0, 5);
        let key = CellKey::Site(vec![0, 0]);
        sub.alive_at(&key, -1.0).unwrap();
        let err = sub.alive_at(&key, 0.0);
        assert!(matches!(err, Err(ProcessError::QueryOrderViolation { .. })));
    }

    #[test]
    fn same_seed_reproduces_identical_cylinders() {
        let run = |seed: u64| -> Vec<Cylinder> {
            let mut sub = Substrate::new(wr_partition(), 0.0, seed);
            let mut out = Vec::new();
            for t in [0.0, -0.5, -2.0] {
                for x in -1..=1 {
                    out.extend(sub.alive_at(&CellKey::Site(vec![x, 0]), t).unwrap());
                }
            }
            out
        };
        let a = run(99);
        let b = run(99);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.basis, y.basis);
            assert_eq!(x.birth.to_bits(), y.birth.to_bits());
            assert_eq!(x.lifespan.to_bits(), y.lifespan.to_bits());
            assert_eq!(x.flag.to_bits(), y.flag.to_bits());
        }
        assert_ne!(run(100).len(), 0);
    }

    #[test]
    fn ages_and_residuals_are_unit_exponentials() {
        // use a large-mass cell so one substrate yields many cylinders
        let intensity = IntensityMeasure::LatticeSpins {
            dim: 2,
            lambda_plus: 1.0,
            lambda_minus: 1.0,
        };
        let key = CellKey::Site(vec![0, 0]);
        let mut ages = Vec::new();
        let mut residuals = Vec::new();
        let mut rep = 0;
        while ages.len() < 10_000 {
            let mut sub = Substrate::new(Partition::new(intensity.clone(), 1.0), 0.0, 1_000 + rep);
            for c in sub.alive_at(&key, 0.0).unwrap() {
                ages.push(-c.birth);
                residuals.push(c.death());
            }
            rep += 1;
        }
        // independence of age and residual: covariance within 3 sigma of 0
        // (var of the product of two unit exponentials is 3)
        let n = ages.len() as f64;
        let ma = ages.iter().sum::<f64>() / n;
        let mr = residuals.iter().sum::<f64>() / n;
        let cov: f64 = ages
            .iter()
            .zip(&residuals)
            .map(|(a, r)| (a - ma) * (r - mr))
            .sum::<f64>()
            / n;
        assert!(cov.abs() < 3.0 * 3.0f64.sqrt() / n.sqrt(), "cov {cov}");
        // ks_test sorts its input; run it after the covariance check
        let (_, p_age) = stats::ks_test(&mut ages, |x| 1.0 - (-x).exp());
        assert!(p_age > 1e-3, "age KS p = {p_age}");
        let (_, p_res) = stats::ks_test(&mut residuals, |x| 1.0 - (-x).exp());
        assert!(p_res > 1e-3, "residual KS p = {p_res}");
    }

    #[test]
    fn disjoint_cells_are_independent() {
        let a = CellKey::Site(vec![0, 0]);
        let b = CellKey::Site(vec![5, 5]);
        let n = 10_000;
        let mut table = vec![vec![0.0; 4]; 4];
        let intensity = IntensityMeasure::LatticeSpins {
            dim: 2,
            lambda_plus: 0.4,
            lambda_minus: 0.4,
        };
        for rep in 0..n {
            let mut sub = Substrate::new(
                Partition::new(intensity.clone(), 1.0),
                0.0,
                crate::rng::derive_seed(31, rep),
            );
            let ca = sub.alive_at(&a, 0.0).unwrap().len().min(3);
            let cb = sub.alive_at(&b, 0.0).unwrap().len().min(3);
            table[ca][cb] += 1.0;
        }
        let (_, _, p) = stats::chi_square_independence(&table);
        assert!(p > 1e-3, "independence p = {p}");
    }

    /// Forward full-timeline simulator for one cell on a truncated horizon,
    /// independent of the backward implementation.
    fn brute_force_alive(
        mass: f64,
        horizon_start: f64,
        stream: &mut Stream,
        t1: f64,
        t2: f64,
    ) -> (u64, u64) {
        let mut t = horizon_start;
        let mut alive_t1 = 0;
        let mut alive_t2 = 0;
        loop {
            t += stream.exp1() / mass;
            if t > t1 {
                break;
            }
            let death = t + stream.exp1();
            if t <= t1 && t1 < death {
                alive_t1 += 1;
            }
            if t <= t2 && t2 < death {
                alive_t2 += 1;
            }
        }
        (alive_t2, alive_t1)
    }

    #[test]
    fn two_query_law_matches_forward_simulation() {
        let mass = 0.8;
        let (t1, t2) = (0.0, -1.3);
        let n = 10_000u64;
        let mut back = (0.0, 0.0, 0.0);
        let mut fwd = (0.0, 0.0, 0.0);
        let intensity = IntensityMeasure::LatticeSpins {
            dim: 2,
            lambda_plus: 0.4,
            lambda_minus: 0.4,
        };
        let mut fwd_stream = Stream::keyed(4242, 0);
        for rep in 0..n {
            let mut sub = Substrate::new(
                Partition::new(intensity.clone(), 1.0),
                0.0,
                crate::rng::derive_seed(53, rep),
            );
            let key = CellKey::Site(vec![0, 0]);
            let a1 = sub.alive_at(&key, t1).unwrap().len() as f64;
            let a2 = sub.alive_at(&key, t2).unwrap().len() as f64;
            back.0 += a1;
            back.1 += a2;
            back.2 += a1 * a2;
            let (b2, b1) = brute_force_alive(mass, t2 - 40.0, &mut fwd_stream, t1, t2);
            fwd.0 += b1 as f64;
            fwd.1 += b2 as f64;
            fwd.2 += (b1 * b2) as f64;
        }
        let nf = n as f64;
        // Poisson(mass) marginals at both times: sd of the mean ~ sqrt(m/n)
        let sigma = (mass / nf).sqrt();
        assert!(
            (back.0 / nf - fwd.0 / nf).abs() < 3.0 * 1.42 * sigma,
            "t1 means"
        );
        assert!(
            (back.1 / nf - fwd.1 / nf).abs() < 3.0 * 1.42 * sigma,
            "t2 means"
        );
        // cross moment captures the shared-survivor correlation
        let cross_sigma = 3.0 * (2.0 * mass.powi(2) + mass) / nf.sqrt();
        assert!(
            (back.2 / nf - fwd.2 / nf).abs() < cross_sigma,
            "cross moment"
        );
    }

    #[test]
    fn continuum_cells_cover_reach_balls() {
        let intensity = IntensityMeasure::ContinuumSpins {
            dim: 2,
            lambda_plus: 0.1,
            lambda_minus: 0.1,
        };
        let p = Partition::new(intensity, 1.0);
        let cells = p.cells_for_reach(&Reach::Ball {
            center: vec![0.5, 0.5],
            radius: 1.0,
        });
        // ball [-0.5, 1.5]^2 overlaps boxes with indices -1..=1 in each axis
        assert_eq!(cells.len(), 9);
        assert!(cells.contains(&CellKey::Box(vec![-1, -1])));
        assert!(cells.contains(&CellKey::Box(vec![1, 1])));
    }

    #[test]
    fn contour_cells_have_class_masses_and_uniform_shapes() {
        let catalog = std::sync::Arc::new(crate::contours::enumerate_contours(6).unwrap());
        let beta = 0.8;
        let intensity = IntensityMeasure::Contours {
            beta,
            catalog: catalog.clone(),
        };
        let p = Partition::new(intensity, 1.0);
        let m4 = p.cell_mass(&CellKey::Contour((0, 0), 4));
        assert!((m4 - (-2.0f64 * beta * 4.0).exp()).abs() < 1e-15);
        let m6 = p.cell_mass(&CellKey::Contour((0, 0), 6));
        assert!((m6 - 2.0 * (-2.0f64 * beta * 6.0).exp()).abs() < 1e-15);

        // reach cells for a unit-square contour must include roots that can
        // touch it with any catalogued shape
        let shape = catalog.shapes(4)[0].clone();
        let model = GasModel::new(ModelKind::Peierls {
            beta,
            catalog: catalog.clone(),
        });
        let particle = Particle {
            location: Location::Lattice(vec![0, 0]),
            mark: Mark::Contour(shape),
        };
        let reach = model.reach(&particle, crate::models::RelationKind::Impact);
        let cells = p.cells_for_reach(&reach);
        assert!(cells.contains(&CellKey::Contour((-1, -1), 6)));
        assert!(cells.contains(&CellKey::Contour((1, 1), 4)));
    }
}
