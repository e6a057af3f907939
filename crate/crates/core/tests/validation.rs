//! Cross-module validation: sampler marginals against near-exact references,
//! coupled marginal laws, contour identity on the largest supported square,
//! and leap locality for the contour ensemble.

use gassim_core::config::{Location, Mark, MarkSet, Particle, ParticleConfiguration, Region};
use gassim_core::contours::enumerate_contours;
use gassim_core::coupling::{coupled_sample, CoupledRunSpec};
use gassim_core::models::{GasModel, ModelKind, RelationKind};
use gassim_core::oracle::check_contour_identity;
use gassim_core::rng::{derive_seed, Stream};
use gassim_core::sampler::{finite_volume_sample, perfect_sample, SamplerOptions};
use std::collections::HashMap;
use std::sync::Arc;

fn wr_2d(lambda: f64) -> GasModel {
    GasModel::new(ModelKind::DiscreteWr {
        lambda_plus: lambda,
        lambda_minus: lambda,
        k: 1,
        dim: 2,
    })
}

#[test]
fn contour_identity_up_to_four_by_four() {
    for n in [1, 2, 3, 4] {
        for beta in [0.5, 0.8, 1.2] {
            let diff = check_contour_identity(n, beta).unwrap();
            assert!(diff <= 1e-10, "square {n}x{n}, beta {beta}: diff {diff}");
        }
    }
}

/// Infinite-volume marginal of a single site against a 7x7 finite-volume
/// reference with empty boundary (exponential mixing makes the boundary
/// influence negligible at this depth).
#[test]
fn single_site_marginal_matches_deep_finite_volume() {
    let model = wr_2d(0.05);
    let n = 20_000u64;
    let single = Region::LatticeBox {
        lo: vec![0, 0],
        hi: vec![0, 0],
        marks: MarkSet::All,
    };
    let mut inf_counts = [0u64; 3]; // empty, plus, minus
    let options = SamplerOptions::default();
    for rep in 0..n {
        let (cfg, _) = perfect_sample(&model, &single, derive_seed(0xBB01, rep), &options).unwrap();
        inf_counts[state_of(&cfg, &[0, 0])] += 1;
    }
    let seven = Region::LatticeBox {
        lo: vec![-3, -3],
        hi: vec![3, 3],
        marks: MarkSet::All,
    };
    let boundary = ParticleConfiguration::empty(Region::All);
    let mut fv_counts = [0u64; 3];
    for rep in 0..n {
        let (cfg, _) = finite_volume_sample(
            &model,
            &seven,
            &boundary,
            derive_seed(0xBB02, rep),
            &options,
        )
        .unwrap();
        fv_counts[state_of(&cfg, &[0, 0])] += 1;
    }
    let tv: f64 = inf_counts
        .iter()
        .zip(&fv_counts)
        .map(|(&a, &b)| ((a as f64 - b as f64) / n as f64).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv <= 0.01, "single-site marginal TV {tv}");
}

fn state_of(cfg: &ParticleConfiguration, site: &[i64]) -> usize {
    for (p, _) in cfg.entries() {
        if p.location == Location::Lattice(site.to_vec()) {
            return match p.mark {
                Mark::Plus => 1,
                Mark::Minus => 2,
                _ => unreachable!(),
            };
        }
    }
    0
}

/// Thinning only removes cylinders: the mean count of plus particles per
/// unit window is at most the free intensity.
#[test]
fn continuum_sample_is_dominated_by_free_intensity() {
    let model = GasModel::new(ModelKind::ContinuumWr {
        lambda_plus: 0.1,
        lambda_minus: 0.1,
        radius: 0.5,
        dim: 2,
    });
    let window = Region::real_box(&[0.0, 0.0], &[1.0, 1.0]);
    let n = 20_000u64;
    let mut plus_total = 0u64;
    for rep in 0..n {
        let (cfg, _) = perfect_sample(
            &model,
            &window,
            derive_seed(0xBB03, rep),
            &SamplerOptions::default(),
        )
        .unwrap();
        plus_total += cfg
            .entries()
            .iter()
            .filter(|(p, _)| p.mark == Mark::Plus)
            .map(|&(_, m)| m as u64)
            .sum::<u64>();
    }
    let mean = plus_total as f64 / n as f64;
    let sigma = (0.1 / n as f64).sqrt();
    assert!(
        mean <= 0.1 + 3.0 * sigma,
        "plus mean {mean} exceeds the free intensity"
    );
}

/// Peierls sampling at high beta: clans stay small, outputs are families of
/// pairwise disjoint contours, and runs are reproducible.
#[test]
fn peierls_sampler_produces_disjoint_contours() {
    let catalog = Arc::new(enumerate_contours(8).unwrap());
    let model = GasModel::new(ModelKind::Peierls { beta: 0.7, catalog });
    let window = Region::LatticeBox {
        lo: vec![0, 0],
        hi: vec![4, 4],
        marks: MarkSet::All,
    };
    let options = SamplerOptions::default();
    let mut nonempty = 0;
    for rep in 0..2000u64 {
        let (cfg, _) = perfect_sample(&model, &window, derive_seed(0xBB04, rep), &options).unwrap();
        let parts: Vec<&Particle> = cfg.weighted_support();
        nonempty += usize::from(!parts.is_empty());
        for (i, p) in parts.iter().enumerate() {
            for q in parts.iter().skip(i + 1) {
                let (rp, sp) = contour_of(p);
                let (rq, sq) = contour_of(q);
                assert!(!sp.intersects(rp, sq, rq), "intersecting contours sampled");
            }
        }
    }
    assert!(
        nonempty > 0,
        "no contour ever appeared; beta too large for the test"
    );
    let (a, _) = perfect_sample(&model, &window, 424_242, &options).unwrap();
    let (b, _) = perfect_sample(&model, &window, 424_242, &options).unwrap();
    assert_eq!(a, b);
}

fn contour_of(p: &Particle) -> ((i64, i64), &Arc<gassim_core::contours::ContourShape>) {
    match (&p.location, &p.mark) {
        (Location::Lattice(v), Mark::Contour(s)) => ((v[0], v[1]), s),
        _ => panic!("expected contour particle"),
    }
}

/// Marginal law of the coupled sampler at a fixed positive epsilon equals
/// the standalone law of the corresponding perturbed model (different
/// seeds, same model): TV at most 0.02 over 1e4 samples each.
#[test]
fn coupled_marginal_matches_standalone_law() {
    let base = wr_2d(0.05);
    let eps = 0.1f64;
    let window = Region::LatticeBox {
        lo: vec![0, 0],
        hi: vec![1, 1],
        marks: MarkSet::All,
    };
    let spec = CoupledRunSpec::fugacity(base, window.clone(), vec![eps, 0.0]);
    let n = 10_000u64;
    let mut coupled_counts: HashMap<Vec<u8>, f64> = HashMap::new();
    for rep in 0..n {
        let out = coupled_sample(&spec, derive_seed(0xBB05, rep)).unwrap();
        *coupled_counts
            .entry(out.outputs[0].1.canonical_key())
            .or_insert(0.0) += 1.0;
    }
    // reference: the standalone perfect sampler for the scaled model, with
    // different seeds
    let scaled = wr_2d(0.05 * (1.0 + eps));
    let mut standalone_counts: HashMap<Vec<u8>, f64> = HashMap::new();
    for rep in 0..n {
        let (cfg, _) = perfect_sample(
            &scaled,
            &window,
            derive_seed(0xBB55, rep),
            &SamplerOptions::default(),
        )
        .unwrap();
        *standalone_counts.entry(cfg.canonical_key()).or_insert(0.0) += 1.0;
    }
    let mut keys: Vec<Vec<u8>> = coupled_counts.keys().cloned().collect();
    for k in standalone_counts.keys() {
        if !keys.contains(k) {
            keys.push(k.clone());
        }
    }
    let tv: f64 = keys
        .iter()
        .map(|k| {
            (coupled_counts.get(k).unwrap_or(&0.0) - standalone_counts.get(k).unwrap_or(&0.0)).abs()
                / n as f64
        })
        .sum::<f64>()
        / 2.0;
    assert!(tv <= 0.02, "coupled marginal TV {tv}");
}

/// Leap locality and the uniform lower bound for the contour ensemble,
/// probed with random contour particles and configurations.
#[test]
fn peierls_leap_locality_probes() {
    let catalog = Arc::new(enumerate_contours(8).unwrap());
    let model = GasModel::new(ModelKind::Peierls {
        beta: 0.8,
        catalog: catalog.clone(),
    });
    let mut s = Stream::keyed(0xBB06, 0);
    let random_contour = |s: &mut Stream| -> Particle {
        let ls: Vec<u32> = catalog.perimeters().collect();
        let l = ls[(s.uniform() * ls.len() as f64) as usize];
        let shapes = catalog.shapes(l);
        let shape = shapes[(s.uniform() * shapes.len() as f64) as usize].clone();
        Particle {
            location: Location::Lattice(vec![
                (s.next_u64() % 7) as i64 - 3,
                (s.next_u64() % 7) as i64 - 3,
            ]),
            mark: Mark::Contour(shape),
        }
    };
    for _ in 0..1000 {
        let target = random_contour(&mut s);
        let mut config = ParticleConfiguration::empty(Region::All);
        for _ in 0..(s.next_u64() % 5) {
            config.add(random_contour(&mut s), 1);
        }
        let full = model.leap_unchecked(&target, &config);
        assert!(full >= model.delta_e);
        let restricted = config.restrict(&model.impact_region(&target));
        assert_eq!(full, model.leap_unchecked(&target, &restricted));
        // relation membership agrees with the leap being affected
        for (q, _) in config.entries() {
            let impacted = model.in_relation(&target, q, RelationKind::Impact);
            let single = ParticleConfiguration::from_particles(Region::All, [q.clone()]);
            let affects = model.leap_unchecked(&target, &single) != 0.0;
            assert_eq!(impacted, affects);
        }
    }
}

/// Continuum kernel against a closed form: in a box of diameter at most the
/// exclusion radius, opposite spins are mutually exclusive, so the kernel
/// with empty boundary is two independent Poisson species conditioned never
/// to coexist, with normalizer 2 e^(lambda V) - 1.
#[test]
fn continuum_small_box_kernel_matches_closed_form() {
    let lambda = 0.4;
    let model = GasModel::new(ModelKind::ContinuumWr {
        lambda_plus: lambda,
        lambda_minus: lambda,
        radius: 0.5,
        dim: 2,
    });
    let volume = Region::real_box(&[0.0, 0.0], &[0.5, 0.5]);
    let boundary = ParticleConfiguration::empty(Region::All);
    let v = 0.25;
    let z = 2.0 * (lambda * v as f64).exp() - 1.0;

    let n = 20_000u64;
    let mut joint: HashMap<(u64, u64), f64> = HashMap::new();
    for rep in 0..n {
        let (cfg, _) = finite_volume_sample(
            &model,
            &volume,
            &boundary,
            derive_seed(0xBB07, rep),
            &SamplerOptions::default(),
        )
        .unwrap();
        let plus = cfg
            .entries()
            .iter()
            .filter(|(p, _)| p.mark == Mark::Plus)
            .map(|&(_, m)| m as u64)
            .sum::<u64>();
        let minus = cfg.total_mass() - plus;
        *joint.entry((plus, minus)).or_insert(0.0) += 1.0;
    }
    let p_empty = joint.get(&(0, 0)).copied().unwrap_or(0.0) / n as f64;
    let p_exact = 1.0 / z;
    let sigma = (p_exact * (1.0 - p_exact) / n as f64).sqrt();
    assert!(
        (p_empty - p_exact).abs() < 3.0 * sigma,
        "empty probability {p_empty} vs {p_exact}"
    );

    let factorial = |k: u64| -> f64 { (1..=k).map(|i| i as f64).product::<f64>().max(1.0) };
    let mut tv = 0.0;
    let mut covered = 0.0;
    for ((a, b), count) in &joint {
        let exact = if *a == 0 || *b == 0 {
            (lambda * v).powi((a + b) as i32) / (factorial(*a) * factorial(*b)) / z
        } else {
            0.0
        };
        assert!(exact > 0.0, "forbidden pair ({a}, {b}) sampled");
        tv += (count / n as f64 - exact).abs();
        covered += exact;
    }
    tv += 1.0 - covered;
    tv *= 0.5;
    assert!(tv <= 0.01, "small-box TV {tv}");
}

/// The contour sampler against the enumerated contour-gas kernel on the
/// dual volume of the 3x3 square.
#[test]
fn peierls_finite_volume_sampler_matches_enumeration() {
    let beta = 0.6;
    let catalog = Arc::new(enumerate_contours(12).unwrap());
    let model = GasModel::new(ModelKind::Peierls { beta, catalog });
    let volume = Region::LatticeBox { lo: vec![-1, -1], hi: vec![2, 2], marks: MarkSet::All };
    let boundary = ParticleConfiguration::empty(Region::All);
    let exact = gassim_core::oracle::enumerate_gibbs(
        &model,
        &volume,
        &boundary,
        &gassim_core::oracle::EnumOptions::default(),
    )
    .unwrap();
    assert_eq!(exact.len(), 512); // one per spin assignment of the square

    let n = 10_000u64;
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut nonempty = 0u64;
    for rep in 0..n {
        let (cfg, _) = finite_volume_sample(
            &model,
            &volume,
            &boundary,
            derive_seed(0xBB08, rep),
            &SamplerOptions::default(),
        )
        .unwrap();
        nonempty += u64::from(!cfg.is_empty());
        *counts.entry(cfg.canonical_key()).or_insert(0) += 1;
    }
    assert!(nonempty > 500, "almost no contours sampled ({nonempty})");
    let tv = exact.tv_from_counts(&counts, n);
    assert!(tv <= 0.02, "contour kernel TV {tv}");
}
