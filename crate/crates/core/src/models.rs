//! Gas models: intensity measures, interactions, energy leaps, impact and
//! envelope regions, and the built-in model families.
//!
//! A model is a pair of an intensity measure and an interaction. The
//! interaction is exposed through the energy leap of a particle relative to
//! a configuration (+infinity encodes exclusion), the impact region
//! containing every particle able to alter that leap, and an optional
//! envelope region enlarging the impact region uniformly over an
//! approximation family.

pub mod alpha;
pub mod geometry;

use crate::config::{Location, Mark, MarkSet, Particle, ParticleConfiguration, Region};
use crate::contours::ContourCatalog;
use crate::error::ModelError;
use std::sync::Arc;

pub use alpha::{alpha_closed_form, diluteness_coefficient, DilutenessReport};

/// Finite nonnegative step function with bounded support, non-increasing:
/// `value_at(d)` is `values[i]` on the band `(thresholds[i-1], thresholds[i]]`
/// starting at zero, and 0 beyond the last threshold. Values may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFn {
    steps: Vec<(f64, f64)>,
}

impl StepFn {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<StepFn, ModelError> {
        let mut last_t = 0.0;
        let mut last_v = f64::INFINITY;
        for &(t, v) in &steps {
            if t <= last_t && !(last_t == 0.0 && t == 0.0) {
                return Err(ModelError::InvalidParameter(
                    "step thresholds must increase".into(),
                ));
            }
            if v > last_v || v <= 0.0 {
                return Err(ModelError::InvalidParameter(
                    "step values must be positive and non-increasing".into(),
                ));
            }
            last_t = t;
            last_v = v;
        }
        Ok(StepFn { steps })
    }

    pub fn zero() -> StepFn {
        StepFn { steps: Vec::new() }
    }

    pub fn hard_core(radius: f64) -> StepFn {
        StepFn {
            steps: vec![(radius, f64::INFINITY)],
        }
    }

    pub fn value_at(&self, d: f64) -> f64 {
        for &(t, v) in &self.steps {
            if d <= t {
                return v;
            }
        }
        0.0
    }

    /// Supremum of the support.
    pub fn support(&self) -> f64 {
        self.steps.last().map_or(0.0, |&(t, _)| t)
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }
}

/// Orientation measure on [0, pi).
#[derive(Clone, Debug, PartialEq)]
pub enum OrientationMeasure {
    Uniform,
    /// Weighted atoms; weights need not be normalized.
    Atoms(Vec<(f64, f64)>),
}

impl OrientationMeasure {
    pub fn nematic(p: f64) -> OrientationMeasure {
        OrientationMeasure::Atoms(vec![(0.0, p), (std::f64::consts::FRAC_PI_2, 1.0 - p)])
    }

    pub fn total(&self) -> f64 {
        match self {
            OrientationMeasure::Uniform => 1.0,
            OrientationMeasure::Atoms(atoms) => atoms.iter().map(|&(_, w)| w).sum(),
        }
    }
}

/// Intensity measure of a gas model; S-locally finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub enum IntensityMeasure {
    /// Counting measure on Z^d with per-site, per-spin fugacities.
    LatticeSpins {
        dim: usize,
        lambda_plus: f64,
        lambda_minus: f64,
    },
    /// Atoms on (spacing * Z^d) in real coordinates with per-site masses.
    ScaledLatticeSpins {
        dim: usize,
        spacing: f64,
        mass_plus: f64,
        mass_minus: f64,
    },
    /// Lebesgue measure with per-unit-volume, per-spin densities.
    ContinuumSpins {
        dim: usize,
        lambda_plus: f64,
        lambda_minus: f64,
    },
    /// Counting measure on Z^2 times an orientation measure, scaled by the
    /// rod fugacity.
    LatticeRods {
        lambda: f64,
        orientation: OrientationMeasure,
    },
    /// Lebesgue measure on R^2 times an orientation measure.
    ContinuumRods {
        lambda: f64,
        orientation: OrientationMeasure,
    },
    /// Mass e^(-2 beta l) per rooted contour shape of perimeter l.
    Contours {
        beta: f64,
        catalog: Arc<ContourCatalog>,
    },
}

impl IntensityMeasure {
    pub fn dim(&self) -> usize {
        match self {
            IntensityMeasure::LatticeSpins { dim, .. }
            | IntensityMeasure::ScaledLatticeSpins { dim, .. }
            | IntensityMeasure::ContinuumSpins { dim, .. } => *dim,
            _ => 2,
        }
    }

    /// Mass of (one lattice site | one unit cube) x G.
    pub fn unit_mass(&self) -> f64 {
        match self {
            IntensityMeasure::LatticeSpins {
                lambda_plus,
                lambda_minus,
                ..
            }
            | IntensityMeasure::ContinuumSpins {
                lambda_plus,
                lambda_minus,
                ..
            } => lambda_plus + lambda_minus,
            IntensityMeasure::ScaledLatticeSpins {
                mass_plus,
                mass_minus,
                ..
            } => mass_plus + mass_minus,
            // orientation measures are normalized to probability at use sites
            IntensityMeasure::LatticeRods { lambda, .. }
            | IntensityMeasure::ContinuumRods { lambda, .. } => *lambda,
            IntensityMeasure::Contours { beta, catalog } => catalog
                .perimeters()
                .map(|l| catalog.count(l) as f64 * (-2.0 * beta * l as f64).exp())
                .sum(),
        }
    }
}

/// Density of an absolutely continuous intensity modification.
#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    Uniform(f64),
    PerMark {
        plus: f64,
        minus: f64,
    },
    /// exp(-coefficient * perimeter) for contour marks.
    PerimeterExp {
        coefficient: f64,
    },
}

impl Density {
    pub fn log_at(&self, p: &Particle) -> f64 {
        match self {
            Density::Uniform(c) => c.ln(),
            Density::PerMark { plus, minus } => match p.mark {
                Mark::Plus => plus.ln(),
                Mark::Minus => minus.ln(),
                _ => 0.0,
            },
            Density::PerimeterExp { coefficient } => match &p.mark {
                Mark::Contour(shape) => -coefficient * shape.perimeter() as f64,
                _ => 0.0,
            },
        }
    }

    /// Exact infimum of -log density over the support of the intensity.
    fn min_neg_log(&self, intensity: &IntensityMeasure) -> f64 {
        match self {
            Density::Uniform(c) => -c.ln(),
            Density::PerMark { plus, minus } => -plus.ln().max(minus.ln()),
            Density::PerimeterExp { coefficient } => {
                let l_max = match intensity {
                    IntensityMeasure::Contours { catalog, .. } => catalog.l_max as f64,
                    _ => 4.0,
                };
                if *coefficient >= 0.0 {
                    4.0 * coefficient
                } else {
                    l_max * coefficient
                }
            }
        }
    }
}

/// Interaction family plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    DiscreteWr {
        lambda_plus: f64,
        lambda_minus: f64,
        k: i64,
        dim: usize,
    },
    ContinuumWr {
        lambda_plus: f64,
        lambda_minus: f64,
        radius: f64,
        dim: usize,
    },
    /// Continuum Widom-Rowlinson with soft repulsion; `h` acts between
    /// opposite spins, `j_plus`/`j_minus` within a species.
    GeneralizedWr {
        lambda_plus: f64,
        lambda_minus: f64,
        h: StepFn,
        j_plus: StepFn,
        j_minus: StepFn,
        dim: usize,
    },
    ThinRodsLattice {
        lambda: f64,
        half_length: f64,
        orientation: OrientationMeasure,
    },
    ThinRodsContinuum {
        lambda: f64,
        half_length: f64,
        orientation: OrientationMeasure,
    },
    Peierls {
        beta: f64,
        catalog: Arc<ContourCatalog>,
    },
    /// Grid model in real coordinates: sites at (spacing * Z^d), one particle
    /// per site, opposite spins excluded within `radius`. The spacing-zero
    /// limit of this family is `ContinuumWr`.
    DiscretizedWr {
        mass_plus: f64,
        mass_minus: f64,
        spacing: f64,
        radius: f64,
        dim: usize,
    },
    /// Base interaction with the leap shifted by -log density; the intensity
    /// is the reference measure of the modification.
    Effective {
        base: Arc<GasModel>,
        density: Density,
        reference: IntensityMeasure,
    },
}

/// A gas model: interaction kind plus the uniform lower bound on leaps used
/// by the dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct GasModel {
    pub kind: ModelKind,
    pub delta_e: f64,
}

/// Location reach of the relation region of a particle, used to decide which
/// substrate cells to reveal.
#[derive(Clone, Debug)]
pub enum Reach {
    /// Closed sup-norm ball in real coordinates.
    Ball { center: Vec<f64>, radius: f64 },
    /// Absolute dual sites of a contour particle.
    ContourSites { sites: Vec<(i64, i64)> },
}

/// Relation used to build clans: the model's own impact relation or an
/// envelope enlarged by `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelationKind {
    Impact,
    Envelope { delta: f64 },
}

impl GasModel {
    pub fn new(kind: ModelKind) -> GasModel {
        // every built-in interaction is purely repulsive
        GasModel { kind, delta_e: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.intensity().dim()
    }

    pub fn intensity(&self) -> IntensityMeasure {
        match &self.kind {
            ModelKind::DiscreteWr {
                lambda_plus,
                lambda_minus,
                dim,
                ..
            } => IntensityMeasure::LatticeSpins {
                dim: *dim,
                lambda_plus: *lambda_plus,
                lambda_minus: *lambda_minus,
            },
            ModelKind::ContinuumWr {
                lambda_plus,
                lambda_minus,
                dim,
                ..
            } => IntensityMeasure::ContinuumSpins {
                dim: *dim,
                lambda_plus: *lambda_plus,
                lambda_minus: *lambda_minus,
            },
            ModelKind::GeneralizedWr {
                lambda_plus,
                lambda_minus,
                dim,
                ..
            } => IntensityMeasure::ContinuumSpins {
                dim: *dim,
                lambda_plus: *lambda_plus,
                lambda_minus: *lambda_minus,
            },
            ModelKind::ThinRodsLattice {
                lambda,
                orientation,
                ..
            } => IntensityMeasure::LatticeRods {
                lambda: *lambda,
                orientation: orientation.clone(),
            },
            ModelKind::ThinRodsContinuum {
                lambda,
                orientation,
                ..
            } => IntensityMeasure::ContinuumRods {
                lambda: *lambda,
                orientation: orientation.clone(),
            },
            ModelKind::Peierls { beta, catalog } => IntensityMeasure::Contours {
                beta: *beta,
                catalog: catalog.clone(),
            },
            ModelKind::DiscretizedWr {
                mass_plus,
                mass_minus,
                spacing,
                dim,
                ..
            } => IntensityMeasure::ScaledLatticeSpins {
                dim: *dim,
                spacing: *spacing,
                mass_plus: *mass_plus,
                mass_minus: *mass_minus,
            },
            ModelKind::Effective { reference, .. } => reference.clone(),
        }
    }

    /// All built-in interactions are invariant under lattice or continuum
    /// translations of the location space.
    pub fn is_translation_invariant(&self) -> bool {
        true
    }

    /// Infinite-volume energy leap of `particle` relative to `config`,
    /// without checking that the configuration's window covers the impact
    /// region; the caller guarantees support sufficiency.
    pub fn leap_unchecked(&self, particle: &Particle, config: &ParticleConfiguration) -> f64 {
        match &self.kind {
            ModelKind::DiscreteWr { k, .. } => {
                for (q, _) in config.entries() {
                    if q.location == particle.location {
                        return f64::INFINITY;
                    }
                    if q.mark == particle.mark.opposite()
                        && particle.location.sup_distance(&q.location) <= *k as f64
                    {
                        return f64::INFINITY;
                    }
                }
                0.0
            }
            ModelKind::ContinuumWr { radius, .. } => {
                for (q, _) in config.entries() {
                    if q.mark == particle.mark.opposite()
                        && particle.location.sup_distance(&q.location) <= *radius
                    {
                        return f64::INFINITY;
                    }
                }
                0.0
            }
            ModelKind::GeneralizedWr {
                h, j_plus, j_minus, ..
            } => {
                let mut total = 0.0;
                for (q, m) in config.entries() {
                    let d = particle.location.sup_distance(&q.location);
                    let phi = if q.mark == particle.mark.opposite() {
                        h.value_at(d)
                    } else {
                        match particle.mark {
                            Mark::Plus => j_plus.value_at(d),
                            Mark::Minus => j_minus.value_at(d),
                            _ => 0.0,
                        }
                    };
                    if phi == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    total += *m as f64 * phi;
                }
                total
            }
            ModelKind::ThinRodsLattice { half_length, .. }
            | ModelKind::ThinRodsContinuum { half_length, .. } => {
                for (q, _) in config.entries() {
                    if geometry::rods_intersect(particle, q, *half_length) {
                        return f64::INFINITY;
                    }
                }
                0.0
            }
            ModelKind::Peierls { .. } => {
                let (root, shape) = contour_data(particle);
                for (q, _) in config.entries() {
                    let (q_root, q_shape) = contour_data(q);
                    if shape.intersects(root, q_shape, q_root) {
                        return f64::INFINITY;
                    }
                }
                0.0
            }
            ModelKind::DiscretizedWr { radius, .. } => {
                for (q, _) in config.entries() {
                    if q.location == particle.location {
                        return f64::INFINITY;
                    }
                    let d = particle.location.sup_distance(&q.location);
                    if q.mark == particle.mark.opposite() && d > 0.0 && d <= *radius {
                        return f64::INFINITY;
                    }
                }
                0.0
            }
            ModelKind::Effective { base, density, .. } => {
                base.leap_unchecked(particle, config) - density.log_at(particle)
            }
        }
    }

    /// Infinite-volume energy leap; reports insufficient support when the
    /// configuration's window does not cover the impact region.
    pub fn energy_leap(
        &self,
        particle: &Particle,
        config: &ParticleConfiguration,
    ) -> Result<f64, ModelError> {
        if !config.window.covers(&self.impact_region(particle)) {
            return Err(ModelError::InsufficientSupport);
        }
        Ok(self.leap_unchecked(particle, config))
    }

    /// Finite-volume leap with the configuration already merged with the
    /// boundary condition. For potential-specified models this equals the
    /// infinite-volume leap; the contour ensemble additionally bans contours
    /// not confined to the volume.
    pub fn leap_in_volume(
        &self,
        volume: &Region,
        particle: &Particle,
        config: &ParticleConfiguration,
    ) -> f64 {
        if let ModelKind::Peierls { .. } = &self.kind {
            let (root, shape) = contour_data(particle);
            let confined = shape
                .absolute_sites(root)
                .all(|s| volume.contains_lattice_site(&[s.0, s.1]));
            if !confined {
                return f64::INFINITY;
            }
        }
        if let ModelKind::Effective { base, density, .. } = &self.kind {
            return base.leap_in_volume(volume, particle, config) - density.log_at(particle);
        }
        self.leap_unchecked(particle, config)
    }

    /// Whether `source` lies in the impact region of `target` (impact
    /// relation) or in its envelope enlarged by `delta`.
    pub fn in_relation(&self, target: &Particle, source: &Particle, rel: RelationKind) -> bool {
        let delta = match rel {
            RelationKind::Impact => 0.0,
            RelationKind::Envelope { delta } => delta,
        };
        match &self.kind {
            ModelKind::DiscreteWr { k, .. } => {
                let d = target.location.sup_distance(&source.location);
                (source.mark == target.mark && d <= delta)
                    || (source.mark == target.mark.opposite() && d <= *k as f64 + delta)
            }
            ModelKind::ContinuumWr { radius, .. } => {
                let d = target.location.sup_distance(&source.location);
                (source.mark == target.mark && delta > 0.0 && d <= delta)
                    || (source.mark == target.mark.opposite() && d <= radius + delta)
            }
            ModelKind::DiscretizedWr { radius, .. } => {
                let d = target.location.sup_distance(&source.location);
                (source.location == target.location)
                    || (source.mark == target.mark && delta > 0.0 && d <= delta)
                    || (source.mark == target.mark.opposite() && d <= radius + delta)
            }
            ModelKind::GeneralizedWr {
                h, j_plus, j_minus, ..
            } => {
                let d = target.location.sup_distance(&source.location);
                if source.mark == target.mark.opposite() {
                    h.value_at((d - delta).max(0.0)) != 0.0
                } else {
                    let j = match target.mark {
                        Mark::Plus => j_plus,
                        Mark::Minus => j_minus,
                        _ => return false,
                    };
                    j.value_at((d - delta).max(0.0)) != 0.0
                }
            }
            ModelKind::ThinRodsLattice { half_length, .. }
            | ModelKind::ThinRodsContinuum { half_length, .. } => {
                let region = Region::RodNeighborhood {
                    center: center2(target),
                    angle: angle_of(target),
                    half_length: *half_length,
                    inflate: delta,
                };
                region.contains(source)
            }
            ModelKind::Peierls { .. } => {
                let (root, shape) = contour_data(target);
                let (q_root, q_shape) = contour_data(source);
                shape.intersects(root, q_shape, q_root)
            }
            ModelKind::Effective { base, .. } => base.in_relation(target, source, rel),
        }
    }

    /// The impact region as an explicit region value.
    pub fn impact_region(&self, particle: &Particle) -> Region {
        match &self.kind {
            ModelKind::DiscreteWr { k, .. } => {
                let x = lattice_coords(particle);
                let lo: Vec<i64> = x.iter().map(|&c| c - k).collect();
                let hi: Vec<i64> = x.iter().map(|&c| c + k).collect();
                Region::Union(vec![
                    Region::LatticeSites {
                        sites: vec![x.clone()],
                        marks: MarkSet::only(&particle.mark),
                    },
                    Region::LatticeBox {
                        lo,
                        hi,
                        marks: MarkSet::only(&particle.mark.opposite()),
                    },
                ])
            }
            ModelKind::ContinuumWr { radius, .. } => {
                ball_region(particle, *radius, MarkSet::only(&particle.mark.opposite()))
            }
            ModelKind::DiscretizedWr { radius, .. } => Region::Union(vec![
                ball_region(particle, 0.0, MarkSet::only(&particle.mark)),
                ball_region(particle, *radius, MarkSet::only(&particle.mark.opposite())),
            ]),
            ModelKind::GeneralizedWr {
                h, j_plus, j_minus, ..
            } => {
                let j = match particle.mark {
                    Mark::Plus => j_plus,
                    Mark::Minus => j_minus,
                    _ => j_plus,
                };
                Region::Union(vec![
                    ball_region(
                        particle,
                        h.support(),
                        MarkSet::only(&particle.mark.opposite()),
                    ),
                    ball_region(particle, j.support(), MarkSet::only(&particle.mark)),
                ])
            }
            ModelKind::ThinRodsLattice { half_length, .. }
            | ModelKind::ThinRodsContinuum { half_length, .. } => Region::RodNeighborhood {
                center: center2(particle),
                angle: angle_of(particle),
                half_length: *half_length,
                inflate: 0.0,
            },
            ModelKind::Peierls { .. } => {
                let (root, shape) = contour_data(particle);
                Region::ContourMeeting {
                    sites: shape.absolute_sites(root).collect(),
                }
            }
            ModelKind::Effective { base, .. } => base.impact_region(particle),
        }
    }

    /// Envelope region enlarged by `delta`; contains the impact region.
    pub fn envelope_region(&self, particle: &Particle, delta: f64) -> Region {
        match &self.kind {
            ModelKind::DiscreteWr { k, .. } => {
                let x = lattice_coords(particle);
                let d = delta.ceil() as i64;
                let mk = |r: i64, marks: MarkSet| Region::LatticeBox {
                    lo: x.iter().map(|&c| c - r).collect(),
                    hi: x.iter().map(|&c| c + r).collect(),
                    marks,
                };
                Region::Union(vec![
                    mk(d, MarkSet::only(&particle.mark)),
                    mk(*k + d, MarkSet::only(&particle.mark.opposite())),
                ])
            }
            ModelKind::ContinuumWr { radius, .. } | ModelKind::DiscretizedWr { radius, .. } => {
                Region::Union(vec![
                    ball_region(particle, delta, MarkSet::only(&particle.mark)),
                    ball_region(
                        particle,
                        radius + delta,
                        MarkSet::only(&particle.mark.opposite()),
                    ),
                ])
            }
            ModelKind::GeneralizedWr { .. } => self.impact_region(particle).inflate(delta),
            ModelKind::ThinRodsLattice { half_length, .. }
            | ModelKind::ThinRodsContinuum { half_length, .. } => Region::RodNeighborhood {
                center: center2(particle),
                angle: angle_of(particle),
                half_length: *half_length,
                inflate: delta,
            },
            ModelKind::Peierls { .. } => self.impact_region(particle),
            ModelKind::Effective { base, .. } => base.envelope_region(particle, delta),
        }
    }

    /// Sup-norm location reach of the relation region, for cell covers.
    pub fn reach(&self, particle: &Particle, rel: RelationKind) -> Reach {
        let delta = match rel {
            RelationKind::Impact => 0.0,
            RelationKind::Envelope { delta } => delta,
        };
        match &self.kind {
            ModelKind::DiscreteWr { k, .. } => Reach::Ball {
                center: particle.location.as_real(),
                radius: *k as f64 + delta,
            },
            ModelKind::ContinuumWr { radius, .. } | ModelKind::DiscretizedWr { radius, .. } => {
                Reach::Ball {
                    center: particle.location.as_real(),
                    radius: radius + delta,
                }
            }
            ModelKind::GeneralizedWr {
                h, j_plus, j_minus, ..
            } => Reach::Ball {
                center: particle.location.as_real(),
                radius: h.support().max(j_plus.support()).max(j_minus.support()) + delta,
            },
            ModelKind::ThinRodsLattice { half_length, .. }
            | ModelKind::ThinRodsContinuum { half_length, .. } => Reach::Ball {
                center: particle.location.as_real(),
                radius: 2.0 * half_length + delta,
            },
            ModelKind::Peierls { .. } => {
                let (root, shape) = contour_data(particle);
                Reach::ContourSites {
                    sites: shape.absolute_sites(root).collect(),
                }
            }
            ModelKind::Effective { base, .. } => base.reach(particle, rel),
        }
    }

    /// Canonical description used for hashing into manifests.
    pub fn describe(&self) -> String {
        format!("{:?} delta_e={:.17e}", self.kind_summary(), self.delta_e)
    }

    fn kind_summary(&self) -> String {
        match &self.kind {
            ModelKind::Peierls { beta, catalog } => {
                format!("Peierls beta={beta} l_max={}", catalog.l_max)
            }
            ModelKind::Effective { base, density, .. } => {
                format!("Effective base=[{}] density={density:?}", base.describe())
            }
            other => format!("{other:?}"),
        }
    }
}

/// The effective model of an absolutely continuous intensity modification:
/// same interaction, leap shifted by -log density, intensity replaced by the
/// reference measure. `delta_e_bound` is the caller-supplied uniform lower
/// bound on the shifted leaps; it is validated against the exact infimum of
/// the shift over the reference support.
pub fn effective_model(
    base: &GasModel,
    reference: IntensityMeasure,
    density: Density,
    delta_e_bound: f64,
) -> Result<GasModel, ModelError> {
    let min_shift = base.delta_e + density.min_neg_log(&reference);
    if min_shift < delta_e_bound - 1e-12 {
        return Err(ModelError::UnboundedDensity {
            leap: min_shift,
            bound: delta_e_bound,
        });
    }
    Ok(GasModel {
        kind: ModelKind::Effective {
            base: Arc::new(base.clone()),
            density,
            reference,
        },
        delta_e: delta_e_bound,
    })
}

/// Lattice model embedded in continuum coordinates via the shrinking map:
/// sites at (eps * Z^d) with unchanged per-site masses, exclusion radius
/// scaled to eps * k, and the one-particle-per-site term active for eps > 0.
pub fn shrink_adapter(model: &GasModel, eps: f64) -> Result<GasModel, ModelError> {
    match &model.kind {
        ModelKind::DiscreteWr {
            lambda_plus,
            lambda_minus,
            k,
            dim,
        } => {
            if eps <= 0.0 {
                return Err(ModelError::InvalidParameter("eps must be positive".into()));
            }
            Ok(GasModel {
                kind: ModelKind::DiscretizedWr {
                    mass_plus: *lambda_plus,
                    mass_minus: *lambda_minus,
                    spacing: eps,
                    radius: eps * *k as f64,
                    dim: *dim,
                },
                delta_e: model.delta_e,
            })
        }
        _ => Err(ModelError::InvalidParameter(
            "shrink adapter requires a lattice model".into(),
        )),
    }
}

/// Built-in dynamically negligible sets, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NegligibleFamily {
    /// Continuum Widom-Rowlinson: multiple particles on one location, or an
    /// opposite-spin pair at sup-distance exactly r0.
    ContinuumWr { r0: f64 },
    /// Nematic thin rods: two horizontal rods sharing the first coordinate
    /// or two vertical rods sharing the second.
    NematicRods,
}

pub fn negligible_set_membership(family: NegligibleFamily, config: &ParticleConfiguration) -> bool {
    match family {
        NegligibleFamily::ContinuumWr { r0 } => {
            let entries = config.entries();
            for (i, (p, m)) in entries.iter().enumerate() {
                if *m > 1 {
                    return true;
                }
                for (q, _) in entries.iter().skip(i + 1) {
                    let d = p.location.sup_distance(&q.location);
                    if d == 0.0 {
                        return true; // one location, two marks
                    }
                    if p.mark == q.mark.opposite() && d == r0 {
                        return true;
                    }
                }
            }
            false
        }
        NegligibleFamily::NematicRods => {
            let entries = config.entries();
            for (i, (p, _)) in entries.iter().enumerate() {
                for (q, _) in entries.iter().skip(i + 1) {
                    let (pa, qa) = (angle_of(p), angle_of(q));
                    if pa != qa {
                        continue;
                    }
                    let (pc, qc) = (p.location.as_real(), q.location.as_real());
                    if pa == 0.0 && pc[0] == qc[0] {
                        return true;
                    }
                    if pa == std::f64::consts::FRAC_PI_2 && pc[1] == qc[1] {
                        return true;
                    }
                }
            }
            false
        }
    }
}

pub use geometry::rods_intersect;

fn lattice_coords(p: &Particle) -> Vec<i64> {
    match &p.location {
        Location::Lattice(v) => v.clone(),
        Location::Real(_) => panic!("expected a lattice location"),
    }
}

fn center2(p: &Particle) -> [f64; 2] {
    let v = p.location.as_real();
    [v[0], v[1]]
}

fn angle_of(p: &Particle) -> f64 {
    match p.mark {
        Mark::Angle(a) => a,
        _ => panic!("expected an angle mark"),
    }
}

fn contour_data(p: &Particle) -> ((i64, i64), &Arc<crate::contours::ContourShape>) {
    match (&p.location, &p.mark) {
        (Location::Lattice(v), Mark::Contour(shape)) => ((v[0], v[1]), shape),
        _ => panic!("expected a contour particle"),
    }
}

fn ball_region(p: &Particle, radius: f64, marks: MarkSet) -> Region {
    let c = p.location.as_real();
    Region::RealBox {
        lo: c.iter().map(|&x| x - radius).collect(),
        hi: c.iter().map(|&x| x + radius).collect(),
        marks,
    }
}

impl Region {
    /// Whether a lattice site (ignoring marks) belongs to the region.
    pub fn contains_lattice_site(&self, site: &[i64]) -> bool {
        match self {
            Region::All => true,
            Region::LatticeBox { lo, hi, .. } => {
                site.len() == lo.len()
                    && site
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(&c, (&l, &h))| l <= c && c <= h)
            }
            Region::LatticeSites { sites, .. } => sites.iter().any(|s| s == site),
            Region::Union(parts) => parts.iter().any(|r| r.contains_lattice_site(site)),
            Region::Complement { inner, within } => {
                within.contains_lattice_site(site) && !inner.contains_lattice_site(site)
            }
            _ => false,
        }
    }
}
