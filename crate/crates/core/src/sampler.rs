//! Clan-of-ancestors construction, deterministic thinning, and the perfect
//! samplers built on them.
//!
//! A clan is the backward-in-time dependency DAG of the cylinders alive at
//! time zero in a window: the first-generation ancestors of a cylinder are
//! the cylinders alive at its birth whose bases lie in the relation region
//! (impact or envelope) of its basis. Heavy diluteness makes clans finite;
//! one pass over the clan in increasing birth order then decides which
//! cylinders are kept, and the kept cylinders alive at time zero are an
//! exact draw from the gas measure restricted to the window.

use crate::config::{Particle, ParticleConfiguration, Region};
use crate::error::SamplerError;
use crate::free_process::{Cylinder, CylinderId, Substrate};
use crate::models::{GasModel, RelationKind};
use crate::rng::Stream;
use std::collections::{BinaryHeap, HashMap, HashSet};

pub const DEFAULT_CLAN_CAP: usize = 1_000_000;

/// Finite DAG of cylinders with first-generation-ancestor edges.
#[derive(Clone, Debug)]
pub struct Clan {
    cylinders: Vec<Cylinder>,
    /// Ancestor indices per cylinder (first generation).
    in_edges: Vec<Vec<u32>>,
    /// Cylinders alive at time zero in the reveal window.
    roots: Vec<u32>,
}

impl Clan {
    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }

    pub fn ancestors_of(&self, idx: usize) -> &[u32] {
        &self.in_edges[idx]
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    pub fn size(&self) -> usize {
        self.cylinders.len()
    }

    /// Longest ancestor chain length (0 for clans of isolated roots).
    pub fn depth(&self) -> usize {
        let n = self.cylinders.len();
        let mut depth = vec![usize::MAX; n];
        fn rec(i: usize, edges: &[Vec<u32>], depth: &mut [usize]) -> usize {
            if depth[i] != usize::MAX {
                return depth[i];
            }
            let d = edges[i]
                .iter()
                .map(|&j| 1 + rec(j as usize, edges, depth))
                .max()
                .unwrap_or(0);
            depth[i] = d;
            d
        }
        (0..n)
            .map(|i| rec(i, &self.in_edges, &mut depth))
            .max()
            .unwrap_or(0)
    }
}

/// Keep/reject decisions for every clan cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct KeepDecision {
    kept: Vec<bool>,
}

impl KeepDecision {
    pub fn is_kept(&self, idx: usize) -> bool {
        self.kept[idx]
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }
}

/// Relation driving clan construction.
#[derive(Clone, Copy, Debug)]
pub struct RelationSpec<'a> {
    pub model: &'a GasModel,
    pub kind: RelationKind,
}

/// Clan construction options.
#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub cap: usize,
    /// Confine the clan to this volume (finite-volume dynamics).
    pub volume: Option<Region>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            cap: DEFAULT_CLAN_CAP,
            volume: None,
        }
    }
}

#[derive(PartialEq)]
struct BirthOrdered(f64, u32);
impl Eq for BirthOrdered {}
impl PartialOrd for BirthOrdered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BirthOrdered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Builds the clan of ancestors of the window at time zero: roots are the
/// cylinders alive at time zero in the window; unexplored cylinders are
/// processed in strictly decreasing birth order, revealing the cells that
/// meet the relation region of their basis.
pub fn build_clan(
    substrate: &mut Substrate,
    window: &Region,
    relation: RelationSpec<'_>,
    options: &BuildOptions,
) -> Result<Clan, SamplerError> {
    let volume_cells: Option<HashSet<_>> = options
        .volume
        .as_ref()
        .map(|v| substrate.partition.cells_covering(v).into_iter().collect());

    let mut cylinders: Vec<Cylinder> = Vec::new();
    let mut in_edges: Vec<Vec<u32>> = Vec::new();
    let mut index_of: HashMap<CylinderId, u32> = HashMap::new();
    let mut queue: BinaryHeap<BirthOrdered> = BinaryHeap::new();

    let mut roots = Vec::new();
    for cylinder in substrate.reveal_window(window, 0.0)? {
        if let Some(volume) = &options.volume {
            if !volume.contains(&cylinder.basis) {
                continue;
            }
        }
        let idx = cylinders.len() as u32;
        index_of.insert(cylinder.id, idx);
        queue.push(BirthOrdered(cylinder.birth, idx));
        roots.push(idx);
        cylinders.push(cylinder);
        in_edges.push(Vec::new());
    }

    while let Some(BirthOrdered(birth, idx)) = queue.pop() {
        let target = cylinders[idx as usize].basis.clone();
        let reach = relation.model.reach(&target, relation.kind);
        for cell in substrate.cells_for_reach(&reach) {
            if let Some(allowed) = &volume_cells {
                if !allowed.contains(&cell) {
                    continue;
                }
            }
            for cylinder in substrate.alive_at(&cell, birth)? {
                if cylinder.id == cylinders[idx as usize].id {
                    continue;
                }
                if !relation
                    .model
                    .in_relation(&target, &cylinder.basis, relation.kind)
                {
                    continue;
                }
                if let Some(volume) = &options.volume {
                    if !volume.contains(&cylinder.basis) {
                        continue;
                    }
                }
                if cylinder.birth == birth {
                    return Err(SamplerError::BirthTimeCollision {
                        a: cylinders[idx as usize].id,
                        b: cylinder.id,
                        time: birth,
                    });
                }
                let ancestor = match index_of.get(&cylinder.id) {
                    Some(&j) => j,
                    None => {
                        let j = cylinders.len() as u32;
                        if cylinders.len() + 1 > options.cap {
                            return Err(SamplerError::ClanCapExceeded {
                                count: cylinders.len() + 1,
                                cap: options.cap,
                            });
                        }
                        index_of.insert(cylinder.id, j);
                        queue.push(BirthOrdered(cylinder.birth, j));
                        cylinders.push(cylinder);
                        in_edges.push(Vec::new());
                        j
                    }
                };
                if !in_edges[idx as usize].contains(&ancestor) {
                    in_edges[idx as usize].push(ancestor);
                }
            }
        }
    }

    Ok(Clan {
        cylinders,
        in_edges,
        roots,
    })
}

/// Thinning context: the model whose leaps drive the decisions, the
/// reference lower bound of the driving free process, an optional particle
/// map applied to bases, and an optional finite volume with its boundary
/// condition.
pub struct ThinContext<'a> {
    pub model: &'a GasModel,
    pub reference_delta_e: f64,
    pub map: Option<&'a dyn Fn(&Particle) -> Particle>,
    pub volume: Option<(&'a Region, &'a ParticleConfiguration)>,
    /// With a map present, verify that every kept cylinder seen by a mapped
    /// impact region is an in-edge of the envelope clan.
    pub check_envelope: bool,
}

impl<'a> ThinContext<'a> {
    pub fn standalone(model: &'a GasModel) -> ThinContext<'a> {
        ThinContext {
            model,
            reference_delta_e: model.delta_e,
            map: None,
            volume: None,
            check_envelope: false,
        }
    }

    fn mapped(&self, p: &Particle) -> Particle {
        match self.map {
            Some(map) => map(p),
            None => p.clone(),
        }
    }

    fn acceptance(
        &self,
        basis: &Particle,
        config: &ParticleConfiguration,
    ) -> Result<f64, SamplerError> {
        let leap = match self.volume {
            Some((volume, boundary)) => {
                self.model
                    .leap_in_volume(volume, basis, &config.superpose(boundary))
            }
            None => self.model.leap_unchecked(basis, config),
        };
        let m = (-(leap - self.reference_delta_e)).exp();
        if m > 1.0 + 1e-9 {
            return Err(SamplerError::Model(
                crate::error::ModelError::UnboundedDensity {
                    leap,
                    bound: self.reference_delta_e,
                },
            ));
        }
        Ok(m.min(1.0))
    }
}

fn birth_order(clan: &Clan) -> Result<Vec<u32>, SamplerError> {
    let mut order: Vec<u32> = (0..clan.cylinders.len() as u32).collect();
    order.sort_by(|&a, &b| {
        clan.cylinders[a as usize]
            .birth
            .total_cmp(&clan.cylinders[b as usize].birth)
            .then(a.cmp(&b))
    });
    for pair in order.windows(2) {
        let (a, b) = (
            &clan.cylinders[pair[0] as usize],
            &clan.cylinders[pair[1] as usize],
        );
        if a.birth == b.birth {
            return Err(SamplerError::BirthTimeCollision {
                a: a.id,
                b: b.id,
                time: a.birth,
            });
        }
    }
    Ok(order)
}

/// Decides every clan cylinder in increasing birth order: a cylinder is kept
/// iff its flag is below the acceptance probability evaluated on the
/// configuration of kept first-generation ancestors alive at its birth.
pub fn thin_clan(clan: &Clan, ctx: &ThinContext<'_>) -> Result<KeepDecision, SamplerError> {
    let order = birth_order(clan)?;
    let mapped: Vec<Particle> = clan
        .cylinders
        .iter()
        .map(|c| ctx.mapped(&c.basis))
        .collect();
    let mut kept = vec![false; clan.cylinders.len()];
    for &idx in &order {
        let i = idx as usize;
        let cylinder = &clan.cylinders[i];
        let mut config = ParticleConfiguration::empty(Region::All);
        for &j in &clan.in_edges[i] {
            if kept[j as usize] && clan.cylinders[j as usize].alive_at(cylinder.birth) {
                config.add(mapped[j as usize].clone(), 1);
            }
        }
        if ctx.check_envelope && ctx.map.is_some() {
            verify_envelope(clan, ctx, &mapped, &kept, i)?;
        }
        let m = ctx.acceptance(&mapped[i], &config)?;
        kept[i] = cylinder.flag < m;
    }
    Ok(KeepDecision { kept })
}

fn verify_envelope(
    clan: &Clan,
    ctx: &ThinContext<'_>,
    mapped: &[Particle],
    kept: &[bool],
    i: usize,
) -> Result<(), SamplerError> {
    let cylinder = &clan.cylinders[i];
    for (j, other) in clan.cylinders.iter().enumerate() {
        if j == i || !kept[j] || !other.alive_at(cylinder.birth) || other.birth >= cylinder.birth {
            continue;
        }
        let impacts = ctx
            .model
            .in_relation(&mapped[i], &mapped[j], RelationKind::Impact);
        if impacts && !clan.in_edges[i].contains(&(j as u32)) {
            return Err(SamplerError::EnvelopeViolation);
        }
    }
    Ok(())
}

/// Reference implementation of the thinning by the generation-indexed
/// backward recursion: ancestor layers of the root set are decided from the
/// deepest generation upward, each cylinder once, against the kept cylinders
/// of deeper layers. Equivalent to `thin_clan`; kept as an independent
/// validation route.
pub fn thin_clan_by_generations(
    clan: &Clan,
    ctx: &ThinContext<'_>,
) -> Result<KeepDecision, SamplerError> {
    birth_order(clan)?; // collision check
    let mapped: Vec<Particle> = clan
        .cylinders
        .iter()
        .map(|c| ctx.mapped(&c.basis))
        .collect();
    // generation layers of the window clan
    let mut layers: Vec<Vec<u32>> = Vec::new();
    let mut current: Vec<u32> = clan.roots.clone();
    while !current.is_empty() {
        layers.push(current.clone());
        let mut next: Vec<u32> = Vec::new();
        let mut seen = HashSet::new();
        for &idx in &current {
            for &j in &clan.in_edges[idx as usize] {
                if seen.insert(j) {
                    next.push(j);
                }
            }
        }
        current = next;
        if layers.len() > clan.cylinders.len() + 1 {
            break; // defensive; a DAG cannot have longer chains
        }
    }
    let mut decided = vec![None::<bool>; clan.cylinders.len()];
    for layer in layers.iter().rev() {
        // within a layer, any member impacting another member also belongs
        // to the deeper layer and is already decided; order is immaterial
        for &idx in layer {
            let i = idx as usize;
            if decided[i].is_some() {
                continue;
            }
            let cylinder = &clan.cylinders[i];
            let mut config = ParticleConfiguration::empty(Region::All);
            for &j in &clan.in_edges[i] {
                if decided[j as usize] == Some(true)
                    && clan.cylinders[j as usize].alive_at(cylinder.birth)
                {
                    config.add(mapped[j as usize].clone(), 1);
                }
            }
            let m = ctx.acceptance(&mapped[i], &config)?;
            decided[i] = Some(cylinder.flag < m);
        }
    }
    // cylinders not reachable from the roots cannot affect the output
    let kept = decided.into_iter().map(|d| d.unwrap_or(false)).collect();
    Ok(KeepDecision { kept })
}

/// Configuration of kept cylinders alive at time zero with basis in the
/// window, with the optional map applied.
pub fn kept_configuration(
    clan: &Clan,
    decisions: &KeepDecision,
    window: &Region,
    map: Option<&dyn Fn(&Particle) -> Particle>,
) -> ParticleConfiguration {
    let mut config = ParticleConfiguration::empty(window.clone());
    for (i, cylinder) in clan.cylinders.iter().enumerate() {
        if decisions.kept[i] && cylinder.alive_at(0.0) {
            let basis = match map {
                Some(f) => f(&cylinder.basis),
                None => cylinder.basis.clone(),
            };
            if window.contains(&basis) {
                config.add(basis, 1);
            }
        }
    }
    config
}

/// Summary statistics of one sampler run.
#[derive(Clone, Debug, Default)]
pub struct SampleStats {
    pub clan_size: usize,
    pub clan_depth: usize,
    pub root_count: usize,
    pub reveals: u64,
}

/// Sampler configuration.
#[derive(Clone, Debug)]
pub struct SamplerOptions {
    pub cell_edge: f64,
    pub cap: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            cell_edge: 1.0,
            cap: DEFAULT_CLAN_CAP,
        }
    }
}

/// Exact draw from the unique gas measure restricted to the window.
pub fn perfect_sample(
    model: &GasModel,
    window: &Region,
    seed: u64,
    options: &SamplerOptions,
) -> Result<(ParticleConfiguration, SampleStats), SamplerError> {
    let mut substrate = Substrate::for_model(model, options.cell_edge, seed);
    let relation = RelationSpec {
        model,
        kind: RelationKind::Impact,
    };
    let build = BuildOptions {
        cap: options.cap,
        volume: None,
    };
    let clan = build_clan(&mut substrate, window, relation, &build)?;
    let decisions = thin_clan(&clan, &ThinContext::standalone(model))?;
    let config = kept_configuration(&clan, &decisions, window, None);
    let stats = SampleStats {
        clan_size: clan.size(),
        clan_depth: clan.depth(),
        root_count: clan.roots.len(),
        reveals: substrate.total_reveals(),
    };
    Ok((config, stats))
}

/// Exact draw from the finite-volume kernel on `volume` with boundary
/// condition `boundary`; the clan is confined to cells meeting the volume
/// and leaps are taken relative to the volume with the boundary merged in.
pub fn finite_volume_sample(
    model: &GasModel,
    volume: &Region,
    boundary: &ParticleConfiguration,
    seed: u64,
    options: &SamplerOptions,
) -> Result<(ParticleConfiguration, SampleStats), SamplerError> {
    let mut substrate = Substrate::for_model(model, options.cell_edge, seed);
    let relation = RelationSpec {
        model,
        kind: RelationKind::Impact,
    };
    let build = BuildOptions {
        cap: options.cap,
        volume: Some(volume.clone()),
    };
    let clan = build_clan(&mut substrate, volume, relation, &build)?;
    let ctx = ThinContext {
        model,
        reference_delta_e: model.delta_e,
        map: None,
        volume: Some((volume, boundary)),
        check_envelope: false,
    };
    let decisions = thin_clan(&clan, &ctx)?;
    let config = kept_configuration(&clan, &decisions, volume, None);
    let stats = SampleStats {
        clan_size: clan.size(),
        clan_depth: clan.depth(),
        root_count: clan.roots.len(),
        reveals: substrate.total_reveals(),
    };
    Ok((config, stats))
}

/// One event of the forward dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub birth: bool,
    pub particle: Particle,
}

/// Time-ordered birth/death events of the finite-volume dynamics run
/// forward from `initial` over `[0, horizon]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub initial: ParticleConfiguration,
    pub events: Vec<Event>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> ParticleConfiguration {
        let mut alive: Vec<Particle> = self
            .initial
            .weighted_support()
            .into_iter()
            .cloned()
            .collect();
        for event in &self.events {
            if event.birth {
                alive.push(event.particle.clone());
            } else if let Some(pos) = alive.iter().position(|p| *p == event.particle) {
                alive.swap_remove(pos);
            }
        }
        ParticleConfiguration::from_particles(self.initial.window.clone(), alive)
    }
}

/// Event-driven simulation of the finite-volume dynamics: births proposed at
/// rate e^(-delta_E) nu(volume x G), accepted against the current state plus
/// the boundary, unit-mean exponential lifetimes.
pub fn forward_dynamics(
    model: &GasModel,
    volume: &Region,
    boundary: &ParticleConfiguration,
    initial: &ParticleConfiguration,
    horizon: f64,
    seed: u64,
) -> Trajectory {
    let mut stream = Stream::keyed(seed, crate::rng::fnv1a(b"forward-dynamics"));
    let intensity = model.intensity();
    let mass = intensity_mass_of(&intensity, volume);
    let rate = (-model.delta_e).exp() * mass;

    // (death time, particle); initial particles get fresh unit exponentials
    let mut alive: Vec<(f64, Particle)> = initial
        .weighted_support()
        .into_iter()
        .map(|p| (stream.exp1(), p.clone()))
        .collect();
    let mut events: Vec<Event> = Vec::new();
    let mut t = 0.0;
    loop {
        let next_proposal = if rate > 0.0 {
            t + stream.exp1() / rate
        } else {
            f64::INFINITY
        };
        let next_death = alive
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, &(d, _))| (i, d));
        match next_death {
            Some((i, d)) if d <= next_proposal => {
                if d > horizon {
                    break;
                }
                t = d;
                let (_, particle) = alive.swap_remove(i);
                events.push(Event {
                    time: t,
                    birth: false,
                    particle,
                });
            }
            _ => {
                if next_proposal > horizon {
                    break;
                }
                t = next_proposal;
                let particle = sample_from_intensity(&intensity, volume, &mut stream);
                let mut state = ParticleConfiguration::empty(volume.clone());
                for (_, p) in &alive {
                    state.add(p.clone(), 1);
                }
                let leap = model.leap_in_volume(volume, &particle, &state.superpose(boundary));
                let m = (-(leap - model.delta_e)).exp();
                if stream.uniform() < m {
                    alive.push((t + stream.exp1(), particle.clone()));
                    events.push(Event {
                        time: t,
                        birth: true,
                        particle,
                    });
                }
            }
        }
    }
    Trajectory {
        initial: initial.clone(),
        events,
        horizon,
    }
}

/// nu(volume x G) for the supported window shapes.
pub fn intensity_mass_of(intensity: &crate::models::IntensityMeasure, volume: &Region) -> f64 {
    use crate::models::IntensityMeasure as I;
    match (intensity, volume) {
        (
            I::LatticeSpins {
                lambda_plus,
                lambda_minus,
                ..
            },
            region,
        ) => (lambda_plus + lambda_minus) * lattice_site_count(region) as f64,
        (I::LatticeRods { lambda, .. }, region) => lambda * lattice_site_count(region) as f64,
        (
            I::ContinuumSpins {
                lambda_plus,
                lambda_minus,
                ..
            },
            Region::RealBox { lo, hi, .. },
        ) => (lambda_plus + lambda_minus) * box_volume(lo, hi),
        (I::ContinuumRods { lambda, .. }, Region::RealBox { lo, hi, .. }) => {
            lambda * box_volume(lo, hi)
        }
        (
            I::ScaledLatticeSpins {
                mass_plus,
                mass_minus,
                spacing,
                ..
            },
            Region::RealBox { lo, hi, .. },
        ) => {
            let count: i64 = lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| {
                    ((h / spacing).floor() as i64 - (l / spacing).ceil() as i64 + 1).max(0)
                })
                .product();
            (mass_plus + mass_minus) * count as f64
        }
        (I::Contours { beta, catalog }, region) => {
            let sites = lattice_site_count(region);
            let per_site: f64 = catalog
                .perimeters()
                .map(|l| catalog.count(l) as f64 * (-2.0 * beta * l as f64).exp())
                .sum();
            per_site * sites as f64
        }
        _ => panic!("unsupported volume shape for this intensity"),
    }
}

fn lattice_site_count(region: &Region) -> u64 {
    match region {
        Region::LatticeBox { lo, hi, .. } => lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| (h - l + 1).max(0) as u64)
            .product(),
        Region::LatticeSites { sites, .. } => sites.len() as u64,
        Region::Union(parts) => parts.iter().map(lattice_site_count).sum(),
        _ => panic!("expected a lattice volume"),
    }
}

fn box_volume(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(&l, &h)| (h - l).max(0.0)).product()
}

/// Uniform draw from the normalized restriction of the intensity to the
/// volume.
fn sample_from_intensity(
    intensity: &crate::models::IntensityMeasure,
    volume: &Region,
    stream: &mut Stream,
) -> Particle {
    use crate::config::{Location, Mark};
    use crate::models::{IntensityMeasure as I, OrientationMeasure};
    let site_in = |region: &Region, stream: &mut Stream| -> Vec<i64> {
        match region {
            Region::LatticeBox { lo, hi, .. } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + (stream.uniform() * (h - l + 1) as f64).floor() as i64)
                .collect(),
            Region::LatticeSites { sites, .. } => {
                sites[(stream.uniform() * sites.len() as f64) as usize].clone()
            }
            _ => panic!("expected a lattice volume"),
        }
    };
    match (intensity, volume) {
        (
            I::LatticeSpins {
                lambda_plus,
                lambda_minus,
                ..
            },
            region,
        ) => {
            let site = site_in(region, stream);
            let mark = if stream.uniform() * (lambda_plus + lambda_minus) < *lambda_plus {
                Mark::Plus
            } else {
                Mark::Minus
            };
            Particle {
                location: Location::Lattice(site),
                mark,
            }
        }
        (I::LatticeRods { orientation, .. }, region) => {
            let site = site_in(region, stream);
            let mark = match orientation {
                OrientationMeasure::Uniform => Mark::Angle(stream.uniform() * std::f64::consts::PI),
                OrientationMeasure::Atoms(atoms) => {
                    let weights: Vec<f64> = atoms.iter().map(|&(_, w)| w).collect();
                    Mark::Angle(atoms[stream.weighted_index(&weights)].0)
                }
            };
            Particle {
                location: Location::Lattice(site),
                mark,
            }
        }
        (
            I::ContinuumSpins {
                lambda_plus,
                lambda_minus,
                ..
            },
            Region::RealBox { lo, hi, .. },
        ) => {
            let coords: Vec<f64> = lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + stream.uniform() * (h - l))
                .collect();
            let mark = if stream.uniform() * (lambda_plus + lambda_minus) < *lambda_plus {
                Mark::Plus
            } else {
                Mark::Minus
            };
            Particle {
                location: Location::Real(coords),
                mark,
            }
        }
        (I::Contours { beta, catalog }, region) => {
            let site = site_in(region, stream);
            let weights: Vec<f64> = catalog
                .perimeters()
                .map(|l| catalog.count(l) as f64 * (-2.0 * beta * l as f64).exp())
                .collect();
            let ls: Vec<u32> = catalog.perimeters().collect();
            let l = ls[stream.weighted_index(&weights)];
            let shapes = catalog.shapes(l);
            let idx = ((stream.uniform() * shapes.len() as f64) as usize).min(shapes.len() - 1);
            Particle {
                location: Location::Lattice(site),
                mark: Mark::Contour(shapes[idx].clone()),
            }
        }
        _ => panic!("unsupported volume shape for this intensity"),
    }
}
