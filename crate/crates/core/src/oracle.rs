//! Exact finite-volume enumeration of gas kernels for small lattice models,
//! the spin/contour identity check, and statistical comparison utilities.

use crate::config::{Location, Mark, Particle, ParticleConfiguration, Region};
use crate::contours::{spins_to_contours, ContourShape, SpinGrid};
use crate::error::OracleError;
use crate::models::{GasModel, IntensityMeasure, ModelKind, OrientationMeasure};
use crate::rng::Stream;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

pub const DEFAULT_STATE_CAP: u64 = 10_000_000;

/// Exact distribution of a finite-volume kernel over its admissible
/// configurations. The normalizer is the partition sum relative to the empty
/// configuration (weight one), matching closed-form hand counts.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub support: Vec<ParticleConfiguration>,
    pub probabilities: Vec<f64>,
    pub normalizer: f64,
    index: HashMap<Vec<u8>, usize>,
}

impl ExactDistribution {
    fn from_weights(support: Vec<ParticleConfiguration>, weights: Vec<f64>) -> ExactDistribution {
        let normalizer: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / normalizer).collect();
        let index = support
            .iter()
            .enumerate()
            .map(|(i, cfg)| (cfg.canonical_key(), i))
            .collect();
        ExactDistribution {
            support,
            probabilities,
            normalizer,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability_of(&self, config: &ParticleConfiguration) -> Option<f64> {
        self.index
            .get(&config.canonical_key())
            .map(|&i| self.probabilities[i])
    }

    pub fn index_of(&self, config: &ParticleConfiguration) -> Option<usize> {
        self.index.get(&config.canonical_key()).copied()
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, stream: &mut Stream) -> &ParticleConfiguration {
        let mut target = stream.uniform();
        for (i, p) in self.probabilities.iter().enumerate() {
            target -= p;
            if target < 0.0 {
                return &self.support[i];
            }
        }
        self.support.last().expect("nonempty support")
    }

    /// (state, probability) records: one line per support configuration,
    /// entries as `coords mark mult` groups joined by `;`, probability with
    /// 17 significant digits.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for (cfg, p) in self.support.iter().zip(&self.probabilities) {
            let state = cfg
                .entries()
                .iter()
                .map(|(particle, m)| {
                    let coords = match &particle.location {
                        Location::Lattice(v) => v
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(" "),
                        Location::Real(v) => v
                            .iter()
                            .map(|&c| crate::config::serialization::format_coord(c))
                            .collect::<Vec<_>>()
                            .join(" "),
                    };
                    format!("{coords} {} {m}", particle.mark)
                })
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!("{state}\t{:.16e}\n", p));
        }
        out
    }

    /// Total variation distance to an empirical histogram of sample counts
    /// indexed by canonical keys; mass outside the support counts in full.
    pub fn tv_from_counts(&self, counts: &HashMap<Vec<u8>, u64>, total: u64) -> f64 {
        let n = total as f64;
        let mut tv = 0.0;
        let mut seen_mass = 0.0;
        for (key, &c) in counts {
            let emp = c as f64 / n;
            match self.index.get(key) {
                Some(&i) => {
                    tv += (emp - self.probabilities[i]).abs();
                    seen_mass += self.probabilities[i];
                }
                None => tv += emp,
            }
        }
        // support states never observed
        tv += 1.0 - seen_mass;
        0.5 * tv
    }
}

/// Total variation distance between two distributions on a shared index.
pub fn tv_distance(empirical: &[f64], exact: &[f64]) -> f64 {
    assert_eq!(empirical.len(), exact.len());
    0.5 * empirical
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Enumeration options.
#[derive(Clone, Debug)]
pub struct EnumOptions {
    pub state_cap: u64,
    pub multiplicity_cap: Option<u32>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            state_cap: DEFAULT_STATE_CAP,
            multiplicity_cap: None,
        }
    }
}

/// Per-site candidate: a particle with its intensity atom mass.
struct SiteState {
    particle: Particle,
    weight: f64,
}

/// Exhaustive enumeration of the gas kernel on a finite lattice volume with
/// boundary condition `boundary`. Supported for lattice models that exclude
/// per-site multiplicity; every admissible configuration is listed with its
/// Boltzmann weight relative to the empty configuration.
pub fn enumerate_gibbs(
    model: &GasModel,
    volume: &Region,
    boundary: &ParticleConfiguration,
    options: &EnumOptions,
) -> Result<ExactDistribution, OracleError> {
    let sites = lattice_sites_of(volume)?;
    if !site_hard_core(model) && options.multiplicity_cap.is_none() {
        return Err(OracleError::MultiplicityUnbounded);
    }
    // contour candidates are enumerated once for the whole volume and
    // distributed to their root sites
    let contour_pool = contour_pool_for(model, &sites)?;
    let mut states: Vec<Vec<SiteState>> = sites
        .iter()
        .map(|site| site_states(model, site, contour_pool.as_deref()))
        .collect::<Result<_, _>>()?;

    // contour conflicts reduce to dual-site disjointness; with at most 64
    // volume sites the pairwise checks become single mask intersections
    let masks = contour_masks(model, &sites, boundary, &mut states);

    let mut support = Vec::new();
    let mut weights = Vec::new();
    let mut chosen: Vec<Option<usize>> = vec![None; sites.len()];
    let mut visited = 0u64;
    backtrack(
        &Enumeration {
            model,
            volume,
            boundary,
            states: &states,
            masks,
            cap: options.state_cap,
        },
        &mut chosen,
        0,
        0.0,
        0,
        &mut support,
        &mut weights,
        &mut visited,
    )?;
    Ok(ExactDistribution::from_weights(support, weights))
}

struct Enumeration<'a> {
    model: &'a GasModel,
    volume: &'a Region,
    boundary: &'a ParticleConfiguration,
    states: &'a [Vec<SiteState>],
    /// Per-site, per-candidate dual-site bitmasks (contour models only).
    masks: Option<Vec<Vec<u64>>>,
    cap: u64,
}

/// Builds dual-site bitmasks for contour candidates and drops candidates
/// conflicting with the boundary; returns `None` for non-contour models.
fn contour_masks(
    model: &GasModel,
    sites: &[Vec<i64>],
    boundary: &ParticleConfiguration,
    states: &mut [Vec<SiteState>],
) -> Option<Vec<Vec<u64>>> {
    fn is_contour_model(model: &GasModel) -> bool {
        match &model.kind {
            ModelKind::Peierls { .. } => true,
            ModelKind::Effective { base, .. } => is_contour_model(base),
            _ => false,
        }
    }
    if !is_contour_model(model) || sites.len() > 64 {
        return None;
    }
    let bit_of: HashMap<(i64, i64), u32> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| ((s[0], s[1]), i as u32))
        .collect();
    let mut masks = Vec::with_capacity(states.len());
    for per_site in states.iter_mut() {
        per_site.retain(|state| {
            boundary
                .entries()
                .iter()
                .all(|(q, _)| pair_energy(model, &state.particle, q) == 0.0)
        });
        let mut site_masks = Vec::with_capacity(per_site.len());
        for state in per_site.iter() {
            let (root, shape) = contour_of(&state.particle);
            let mut mask = 0u64;
            for s in shape.absolute_sites(root) {
                mask |= 1u64 << bit_of[&s];
            }
            site_masks.push(mask);
        }
        masks.push(site_masks);
    }
    Some(masks)
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    en: &Enumeration<'_>,
    chosen: &mut Vec<Option<usize>>,
    site: usize,
    log_weight: f64,
    placed_mask: u64,
    support: &mut Vec<ParticleConfiguration>,
    weights: &mut Vec<f64>,
    visited: &mut u64,
) -> Result<(), OracleError> {
    if site == en.states.len() {
        *visited += 1;
        if *visited > en.cap {
            return Err(OracleError::StateSpaceTooLarge { cap: en.cap });
        }
        let mut config = ParticleConfiguration::empty(en.volume.clone());
        for (i, c) in chosen.iter().enumerate() {
            if let Some(j) = c {
                config.add(en.states[i][*j].particle.clone(), 1);
            }
        }
        support.push(config);
        weights.push(log_weight.exp());
        return Ok(());
    }
    // empty site
    chosen[site] = None;
    backtrack(
        en,
        chosen,
        site + 1,
        log_weight,
        placed_mask,
        support,
        weights,
        visited,
    )?;
    'states: for j in 0..en.states[site].len() {
        let candidate = &en.states[site][j].particle;
        let mut energy = 0.0;
        let mut next_mask = placed_mask;
        match &en.masks {
            Some(masks) => {
                // hard-core by dual-site disjointness; boundary conflicts
                // were filtered out of the candidate lists
                let mask = masks[site][j];
                if mask & placed_mask != 0 {
                    continue 'states;
                }
                next_mask |= mask;
            }
            None => {
                for (i, c) in chosen.iter().enumerate().take(site) {
                    if let Some(k) = c {
                        let phi = pair_energy(en.model, candidate, &en.states[i][*k].particle);
                        if phi == f64::INFINITY {
                            continue 'states;
                        }
                        energy += phi;
                    }
                }
                for (q, m) in en.boundary.entries() {
                    let phi = pair_energy(en.model, candidate, q);
                    if phi == f64::INFINITY {
                        continue 'states;
                    }
                    energy += *m as f64 * phi;
                }
            }
        }
        chosen[site] = Some(j);
        backtrack(
            en,
            chosen,
            site + 1,
            log_weight + en.states[site][j].weight.ln() - energy,
            next_mask,
            support,
            weights,
            visited,
        )?;
        chosen[site] = None;
    }
    Ok(())
}

fn lattice_sites_of(region: &Region) -> Result<Vec<Vec<i64>>, OracleError> {
    match region {
        Region::LatticeBox { lo, hi, .. } => {
            let mut out = vec![Vec::new()];
            for (l, h) in lo.iter().zip(hi) {
                let mut next = Vec::new();
                for prefix in &out {
                    for c in *l..=*h {
                        let mut v = prefix.clone();
                        v.push(c);
                        next.push(v);
                    }
                }
                out = next;
            }
            Ok(out)
        }
        Region::LatticeSites { sites, .. } => Ok(sites.clone()),
        Region::Union(parts) => {
            let mut out = Vec::new();
            for part in parts {
                for s in lattice_sites_of(part)? {
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
            }
            Ok(out)
        }
        _ => Err(OracleError::NotLattice),
    }
}

fn site_hard_core(model: &GasModel) -> bool {
    match &model.kind {
        ModelKind::DiscreteWr { .. }
        | ModelKind::ThinRodsLattice { .. }
        | ModelKind::Peierls { .. }
        | ModelKind::DiscretizedWr { .. } => true,
        ModelKind::Effective { base, .. } => site_hard_core(base),
        _ => false,
    }
}

fn contour_pool_for(
    model: &GasModel,
    sites: &[Vec<i64>],
) -> Result<Option<Vec<((i64, i64), ContourShape)>>, OracleError> {
    fn beta_of(model: &GasModel) -> Option<f64> {
        match &model.kind {
            ModelKind::Peierls { beta, .. } => Some(*beta),
            ModelKind::Effective { base, .. } => beta_of(base),
            _ => None,
        }
    }
    match beta_of(model) {
        None => Ok(None),
        Some(_) => {
            let site_set: HashSet<(i64, i64)> = sites.iter().map(|s| (s[0], s[1])).collect();
            Ok(Some(confined_contours(&site_set)?))
        }
    }
}

fn site_states(
    model: &GasModel,
    site: &[i64],
    contour_pool: Option<&[((i64, i64), ContourShape)]>,
) -> Result<Vec<SiteState>, OracleError> {
    match (&model.kind, model.intensity()) {
        (
            ModelKind::DiscreteWr { .. },
            IntensityMeasure::LatticeSpins {
                lambda_plus,
                lambda_minus,
                ..
            },
        ) => Ok(vec![
            SiteState {
                particle: Particle::lattice(site, Mark::Plus),
                weight: lambda_plus,
            },
            SiteState {
                particle: Particle::lattice(site, Mark::Minus),
                weight: lambda_minus,
            },
        ]),
        (
            ModelKind::ThinRodsLattice { orientation, .. },
            IntensityMeasure::LatticeRods { lambda, .. },
        ) => match orientation {
            OrientationMeasure::Atoms(atoms) => {
                let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
                Ok(atoms
                    .iter()
                    .map(|&(theta, w)| SiteState {
                        particle: Particle::lattice(site, Mark::Angle(theta)),
                        weight: lambda * w / total,
                    })
                    .collect())
            }
            OrientationMeasure::Uniform => Err(OracleError::NotLattice),
        },
        (ModelKind::Peierls { beta, .. }, _) => {
            let pool = contour_pool.expect("contour pool precomputed for contour models");
            Ok(pool
                .iter()
                .filter(|(root, _)| root.0 == site[0] && root.1 == site[1])
                .map(|(_, shape)| {
                    let weight = (-2.0 * beta * shape.perimeter() as f64).exp();
                    SiteState {
                        particle: Particle {
                            location: Location::Lattice(site.to_vec()),
                            mark: Mark::Contour(Arc::new(shape.clone())),
                        },
                        weight,
                    }
                })
                .collect())
        }
        (ModelKind::Effective { base, density, .. }, _) => {
            let inner = site_states(base, site, contour_pool)?;
            Ok(inner
                .into_iter()
                .map(|s| SiteState {
                    weight: s.weight * density.log_at(&s.particle).exp(),
                    particle: s.particle,
                })
                .collect())
        }
        _ => Err(OracleError::NotLattice),
    }
}

fn pair_energy(model: &GasModel, a: &Particle, b: &Particle) -> f64 {
    match &model.kind {
        ModelKind::DiscreteWr { k, .. } => {
            let conflict = a.location == b.location
                || (a.mark == b.mark.opposite()
                    && a.location.sup_distance(&b.location) <= *k as f64);
            if conflict {
                f64::INFINITY
            } else {
                0.0
            }
        }
        ModelKind::ThinRodsLattice { half_length, .. } => {
            if crate::models::rods_intersect(a, b, *half_length) {
                f64::INFINITY
            } else {
                0.0
            }
        }
        ModelKind::Peierls { .. } => {
            let (ra, sa) = contour_of(a);
            let (rb, sb) = contour_of(b);
            if sa.intersects(ra, sb, rb) {
                f64::INFINITY
            } else {
                0.0
            }
        }
        ModelKind::Effective { base, .. } => pair_energy(base, a, b),
        _ => panic!("pair energy requested for a non-lattice model"),
    }
}

fn contour_of(p: &Particle) -> ((i64, i64), &Arc<ContourShape>) {
    match (&p.location, &p.mark) {
        (Location::Lattice(v), Mark::Contour(s)) => ((v[0], v[1]), s),
        _ => panic!("expected a contour particle"),
    }
}

/// All single contours whose dual sites lie in the given site set, rooted;
/// enumerated through the cycle space of the confined grid graph.
pub fn confined_contours(
    sites: &HashSet<(i64, i64)>,
) -> Result<Vec<((i64, i64), ContourShape)>, OracleError> {
    // edges with both endpoints inside
    let mut edges: Vec<(i64, i64, u8)> = Vec::new();
    for &(x, y) in sites {
        if sites.contains(&(x + 1, y)) {
            edges.push((x, y, crate::contours::DIR_H));
        }
        if sites.contains(&(x, y + 1)) {
            edges.push((x, y, crate::contours::DIR_V));
        }
    }
    edges.sort_unstable();

    // spanning forest; non-tree edges generate the cycle space
    let mut parent: HashMap<(i64, i64), (i64, i64)> = HashMap::new();
    fn find(parent: &mut HashMap<(i64, i64), (i64, i64)>, v: (i64, i64)) -> (i64, i64) {
        let p = *parent.entry(v).or_insert(v);
        if p == v {
            v
        } else {
            let r = find(parent, p);
            parent.insert(v, r);
            r
        }
    }
    let mut tree_adj: HashMap<(i64, i64), Vec<((i64, i64), usize)>> = HashMap::new();
    let mut generators: Vec<usize> = Vec::new();
    for (i, &(x, y, d)) in edges.iter().enumerate() {
        let a = (x, y);
        let b = if d == crate::contours::DIR_H {
            (x + 1, y)
        } else {
            (x, y + 1)
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            generators.push(i);
        } else {
            parent.insert(ra, rb);
            tree_adj.entry(a).or_default().push((b, i));
            tree_adj.entry(b).or_default().push((a, i));
        }
    }
    if generators.len() > 22 {
        return Err(OracleError::StateSpaceTooLarge { cap: 1 << 22 });
    }
    if edges.len() > 64 {
        return Err(OracleError::StateSpaceTooLarge { cap: 64 });
    }
    // fundamental cycle of each generator as an edge bitset
    let cycle_of = |gen: usize| -> u64 {
        let (x, y, d) = edges[gen];
        let a = (x, y);
        let b = if d == crate::contours::DIR_H {
            (x + 1, y)
        } else {
            (x, y + 1)
        };
        // tree path from a to b by BFS
        let mut prev: HashMap<(i64, i64), ((i64, i64), usize)> = HashMap::new();
        let mut queue = std::collections::VecDeque::from([a]);
        let mut seen = HashSet::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            if let Some(nbrs) = tree_adj.get(&v) {
                for &(w, ei) in nbrs {
                    if seen.insert(w) {
                        prev.insert(w, (v, ei));
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut mask = 1u64 << gen;
        let mut v = b;
        while v != a {
            let (p, ei) = prev[&v];
            mask ^= 1u64 << ei;
            v = p;
        }
        mask
    };
    let cycles: Vec<u64> = generators.iter().map(|&g| cycle_of(g)).collect();

    // every even subgraph is an XOR of fundamental cycles; its single
    // edge-connected nonempty instances are exactly the confined contours
    let mut unique: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    for combo in 1u64..(1 << cycles.len()) {
        let mut mask = 0u64;
        for (i, c) in cycles.iter().enumerate() {
            if (combo >> i) & 1 == 1 {
                mask ^= c;
            }
        }
        if mask == 0 || !unique.insert(mask) {
            continue;
        }
        let subset: Vec<(i64, i64, u8)> = edges
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask >> i) & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let rel: Vec<(i16, i16, u8)> = subset
            .iter()
            .map(|&(x, y, d)| (x as i16, y as i16, d))
            .collect();
        if !crate::contours::is_single_contour(&rel) {
            continue;
        }
        let (root, shape) = ContourShape::rooted(&subset);
        out.push((root, shape));
    }
    Ok(out)
}

/// Truncated Peierls bound: sum over even perimeters of
/// l * N_l * e^(-2 beta l), with a geometric tail estimate from the growth
/// of the last two terms.
#[derive(Clone, Debug)]
pub struct PeierlsLhs {
    pub value: f64,
    pub l_max: u32,
    pub terms: Vec<(u32, f64)>,
    pub tail_estimate: Option<f64>,
}

pub fn peierls_lhs(beta: f64, catalog: &crate::contours::ContourCatalog) -> PeierlsLhs {
    let terms: Vec<(u32, f64)> = catalog
        .perimeters()
        .map(|l| {
            (
                l,
                l as f64 * catalog.count(l) as f64 * (-2.0 * beta * l as f64).exp(),
            )
        })
        .collect();
    let value = terms.iter().map(|&(_, t)| t).sum();
    let tail_estimate = match terms.len() {
        0 | 1 => None,
        n => {
            let (last, prev) = (terms[n - 1].1, terms[n - 2].1);
            if prev > 0.0 && last / prev < 1.0 {
                let r = last / prev;
                Some(last * r / (1.0 - r))
            } else {
                None
            }
        }
    };
    PeierlsLhs {
        value,
        l_max: catalog.l_max,
        terms,
        tail_estimate,
    }
}

/// Maximum absolute probability discrepancy between the Ising kernel with
/// plus boundary on an n x n square at inverse temperature beta and the
/// contour-gas kernel with empty boundary on the dual volume.
pub fn check_contour_identity(n: i64, beta: f64) -> Result<f64, OracleError> {
    assert!(
        n >= 1 && n * n <= 16,
        "volume too large for double enumeration"
    );
    // dual volume: sites touched by dual edges of e(volume)
    let dual_sites: Vec<Vec<i64>> = (-1..n)
        .flat_map(|x| (-1..n).map(move |y| vec![x, y]))
        .collect();
    let dual_volume = Region::LatticeSites {
        sites: dual_sites,
        marks: crate::config::MarkSet::All,
    };
    let catalog = Arc::new(crate::contours::enumerate_contours(4).unwrap());
    let contour_model = GasModel::new(ModelKind::Peierls { beta, catalog });
    let empty = ParticleConfiguration::empty(Region::All);
    let dist = enumerate_gibbs(
        &contour_model,
        &dual_volume,
        &empty,
        &EnumOptions::default(),
    )?;

    // Ising side: enumerate all spin assignments
    let states = 1u64 << (n * n) as u32;
    let mut ising_weights = Vec::with_capacity(states as usize);
    let mut contour_probs = Vec::with_capacity(states as usize);
    let mut total = 0.0;
    for index in 0..states {
        let grid = SpinGrid::from_bits((0, 0), (n - 1, n - 1), index);
        let contours = spins_to_contours(&grid);
        let weight = (-2.0 * beta * contours.total_length() as f64).exp();
        ising_weights.push(weight);
        total += weight;
        let config = contour_set_config(&contours);
        match dist.probability_of(&config) {
            Some(p) => contour_probs.push(p),
            None => return Err(OracleError::NotRealizable),
        }
    }
    if dist.len() != states as usize {
        // the bijection must account for every contour configuration
        return Err(OracleError::NotRealizable);
    }
    let mut max_diff: f64 = 0.0;
    for (w, p) in ising_weights.iter().zip(&contour_probs) {
        max_diff = max_diff.max((w / total - p).abs());
    }
    Ok(max_diff)
}

fn contour_set_config(contours: &crate::contours::ContourSet) -> ParticleConfiguration {
    let mut config = ParticleConfiguration::empty(Region::All);
    for (root, shape) in &contours.contours {
        config.add(
            Particle {
                location: Location::Lattice(vec![root.0, root.1]),
                mark: Mark::Contour(Arc::new(shape.clone())),
            },
            1,
        );
    }
    config
}
