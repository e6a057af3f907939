use gassim_core::config::{serialization, MarkSet, ParticleConfiguration, Region};
use gassim_core::contours::{enumerate_contours, enumerate_contours_by_trails, ContourCatalog};
use gassim_core::coupling::{
    coupled_sample, ApproximationFamily, CoupledRunSpec, MapKind, PerEpsilonModels,
};
use gassim_core::error::SamplerError;
use gassim_core::manifest::{format_real, RunManifest};
use gassim_core::models::alpha::{
    alpha_closed_form, diluteness_coefficient, SizeFunction, Verdict,
};
use gassim_core::models::{GasModel, ModelKind};
use gassim_core::oracle::{enumerate_gibbs, peierls_lhs, EnumOptions};
use gassim_core::rng::derive_seed;
use gassim_core::sampler::{
    finite_volume_sample, forward_dynamics, perfect_sample, SampleStats, SamplerOptions,
};
use gassim_core::spec_file::{parse_model_spec, ModelSpec};
use rayon::prelude::*;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

pub enum CliError {
    Usage(String),
    ClanCap(SamplerError),
    Strict(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn load_spec(path: &Path) -> Result<ModelSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_model_spec(&text).map_err(|e| CliError::Usage(e.to_string()))
}

fn is_lattice_model(model: &GasModel) -> bool {
    matches!(
        model.kind,
        ModelKind::DiscreteWr { .. }
            | ModelKind::ThinRodsLattice { .. }
            | ModelKind::Peierls { .. }
    )
}

fn parse_window(text: &str, model: &GasModel) -> Result<Region, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad window `{text}`: {e}")))?;
    if values.len() % 2 != 0 || values.is_empty() {
        return Err(CliError::Usage(format!(
            "window `{text}` must list lo and hi corners of equal dimension"
        )));
    }
    let dim = values.len() / 2;
    let (lo, hi) = values.split_at(dim);
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(CliError::Usage(format!(
            "window `{text}` has inverted corners"
        )));
    }
    if is_lattice_model(model) {
        let as_int = |x: &f64| -> Result<i64, CliError> {
            if x.fract() == 0.0 {
                Ok(*x as i64)
            } else {
                Err(CliError::Usage(format!(
                    "lattice window needs integer corners, got {x}"
                )))
            }
        };
        Ok(Region::LatticeBox {
            lo: lo.iter().map(as_int).collect::<Result<_, _>>()?,
            hi: hi.iter().map(as_int).collect::<Result<_, _>>()?,
            marks: MarkSet::All,
        })
    } else {
        Ok(Region::RealBox {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            marks: MarkSet::All,
        })
    }
}

fn write_output(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn coeff(spec_path: &Path, strict: bool, envelope: Option<f64>) -> Result<ExitCode, CliError> {
    let spec = load_spec(spec_path)?;
    let size_fn = if matches!(spec.model.kind, ModelKind::Peierls { .. }) {
        SizeFunction::Perimeter
    } else {
        SizeFunction::Constant
    };
    let delta = envelope.or(spec.envelope_delta);
    let report = diluteness_coefficient(&spec.model, size_fn, delta)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("model            {}", spec.model.describe());
    match alpha_closed_form(&spec.model) {
        Ok(closed) => println!("alpha_closed     {}", format_real(closed)),
        Err(_) => println!("alpha_closed     (no closed form)"),
    }
    println!("alpha_generic    {}", format_real(report.alpha));
    println!("size_function    {:?}", report.size_function);
    println!("envelope_used    {}", report.envelope_used);
    if let Some(t) = &report.truncation {
        println!("l_max            {}", t.l_max);
        match t.tail_estimate {
            Some(tail) => println!("tail_estimate    {}", format_real(tail)),
            None => println!("tail_estimate    (inconclusive growth ratio)"),
        }
    }
    let verdict = match report.verdict {
        Verdict::HeavilyDiluted => "heavily diluted",
        Verdict::NotHeavilyDiluted => "not heavily diluted",
        Verdict::Inconclusive => "inconclusive (truncation cannot certify)",
    };
    println!("verdict          {verdict}");
    if strict && report.verdict != Verdict::HeavilyDiluted {
        return Err(CliError::Strict(format!(
            "strict mode: verdict `{verdict}` (alpha = {})",
            format_real(report.alpha)
        )));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
pub fn sample(
    spec_path: &Path,
    window_text: &str,
    replicas: u64,
    seed: u64,
    out: &Path,
    finite_volume: bool,
    boundary_path: Option<&Path>,
    cap: Option<usize>,
    cell_edge: Option<f64>,
) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let window = parse_window(window_text, &spec.model)?;
    let mut options = SamplerOptions::default();
    if let Some(c) = cap {
        options.cap = c;
    }
    if let Some(a) = cell_edge.or(spec.cell_edge) {
        options.cell_edge = a;
    }
    let boundary = match boundary_path {
        Some(path) => read_boundary(path)?,
        None => ParticleConfiguration::empty(Region::All),
    };

    let results: Vec<(
        u64,
        Result<(ParticleConfiguration, SampleStats), SamplerError>,
    )> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(seed, rep);
            let result = if finite_volume {
                finite_volume_sample(&spec.model, &window, &boundary, rep_seed, &options)
            } else {
                perfect_sample(&spec.model, &window, rep_seed, &options)
            };
            (rep, result)
        })
        .collect();

    let mut rows = String::new();
    let mut manifest = RunManifest {
        command: format!(
            "sample --window {window_text} --replicas {replicas} --seed {seed}{}",
            if finite_volume {
                " --finite-volume"
            } else {
                ""
            }
        ),
        seed,
        model_description: spec.model.describe(),
        replicas,
        cell_edge: Some(options.cell_edge),
        cap: Some(options.cap),
        ..Default::default()
    };
    let size_fn = if matches!(spec.model.kind, ModelKind::Peierls { .. }) {
        SizeFunction::Perimeter
    } else {
        SizeFunction::Constant
    };
    manifest.alpha = diluteness_coefficient(&spec.model, size_fn, spec.envelope_delta).ok();
    if let Some(report) = &manifest.alpha {
        if report.verdict != Verdict::HeavilyDiluted {
            eprintln!(
                "warning: diluteness not certified (alpha = {}); clans may grow unboundedly",
                format_real(report.alpha)
            );
        }
    }
    if let ModelKind::Peierls { catalog, .. } = &spec.model.kind {
        manifest.l_max = Some(catalog.l_max);
    }
    let mut sorted = results;
    sorted.sort_by_key(|&(rep, _)| rep);
    for (rep, result) in sorted {
        let (config, stats) = result?;
        serialization::write_config(&mut rows, rep, 0.0, &config);
        manifest.record_stats(&stats);
    }
    manifest.wall_clock_ms = start.elapsed().as_millis();
    write_output(out, "samples.tsv", &rows)?;
    write_output(out, "manifest.txt", &manifest.render())?;
    println!("wrote {} replicas to {}", replicas, out.display());
    Ok(ExitCode::SUCCESS)
}

fn read_boundary(path: &Path) -> Result<ParticleConfiguration, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ParticleConfiguration::empty(Region::All);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (_, _, particle, mult) = serialization::parse_record(line)
            .ok_or_else(|| CliError::Usage(format!("bad boundary record: {line}")))?;
        config.add(particle, mult);
    }
    Ok(config)
}

#[allow(clippy::too_many_arguments)]
pub fn couple(
    spec_path: &Path,
    family_name: &str,
    window_text: &str,
    eps_grid: Option<&str>,
    replicas: u64,
    seed: u64,
    out: &Path,
    cap: Option<usize>,
    cell_edge: Option<f64>,
) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let window = parse_window(window_text, &spec.model)?;
    let grid: Vec<f64> = match eps_grid {
        Some(text) => text
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("bad eps grid: {e}")))?,
        None => gassim_core::coupling::default_grid(),
    };
    let mut run_spec = build_family(&spec.model, family_name, window, grid.clone())?;
    if let Some(c) = cap {
        run_spec.options.cap = c;
    }
    if let Some(a) = cell_edge.or(spec.cell_edge) {
        run_spec.options.cell_edge = a;
    }
    if let Some(delta) = spec.envelope_delta {
        run_spec.envelope_delta = delta;
    }

    let results: Vec<(u64, Result<_, SamplerError>)> = (0..replicas)
        .into_par_iter()
        .map(|rep| (rep, coupled_sample(&run_spec, derive_seed(seed, rep))))
        .collect();

    let mut rows = String::new();
    let mut stab = String::new();
    let mut manifest = RunManifest {
        command: format!(
            "couple --family {family_name} --window {window_text} --replicas {replicas} --seed {seed}"
        ),
        seed,
        model_description: spec.model.describe(),
        replicas,
        eps_grid: grid,
        cell_edge: Some(run_spec.options.cell_edge),
        cap: Some(run_spec.options.cap),
        ..Default::default()
    };
    let base = run_spec.models.base();
    manifest.alpha = diluteness_coefficient(
        &base,
        SizeFunction::Constant,
        Some(run_spec.envelope_delta).filter(|&d| d > 0.0),
    )
    .ok();
    if let Some(report) = &manifest.alpha {
        if report.verdict != Verdict::HeavilyDiluted {
            eprintln!(
                "warning: envelope diluteness not certified (alpha = {}); clans may grow unboundedly",
                format_real(report.alpha)
            );
        }
    }
    let mut sorted = results;
    sorted.sort_by_key(|&(rep, _)| rep);
    let mut flagged = 0u64;
    for (rep, result) in sorted {
        let output = result?;
        for (eps, config) in &output.outputs {
            serialization::write_config(&mut rows, rep, *eps, config);
        }
        match output.stabilization_epsilon() {
            Some(eps) => stab.push_str(&format!("{rep}\t{}\n", format_real(eps))),
            None => stab.push_str(&format!("{rep}\tnone-on-grid\n")),
        }
        if output.negligible_flagged {
            flagged += 1;
        }
        manifest.record_stats(&output.stats);
    }
    manifest
        .extra
        .push(("negligible_flagged_replicas".into(), flagged.to_string()));
    manifest.wall_clock_ms = start.elapsed().as_millis();
    write_output(out, "samples.tsv", &rows)?;
    write_output(out, "stabilization.tsv", &stab)?;
    write_output(out, "manifest.txt", &manifest.render())?;
    println!("wrote {} coupled replicas to {}", replicas, out.display());
    Ok(ExitCode::SUCCESS)
}

fn build_family(
    model: &GasModel,
    family_name: &str,
    window: Region,
    grid: Vec<f64>,
) -> Result<CoupledRunSpec, CliError> {
    match family_name {
        "identity" => Ok(CoupledRunSpec::identity(model.clone(), window, grid)),
        "fugacity" => Ok(CoupledRunSpec::fugacity(model.clone(), window, grid)),
        "spatial-disc" => match &model.kind {
            ModelKind::ContinuumWr {
                lambda_plus,
                lambda_minus,
                radius,
                dim,
            } => {
                if (lambda_plus - lambda_minus).abs() > 1e-15 {
                    return Err(CliError::Usage(
                        "spatial-disc coupling expects symmetric fugacities".into(),
                    ));
                }
                Ok(CoupledRunSpec::wr_discretization(
                    *lambda_plus,
                    *radius,
                    *dim,
                    window,
                    grid,
                ))
            }
            _ => Err(CliError::Usage(
                "spatial-disc coupling requires a continuum-wr model".into(),
            )),
        },
        "spin-disc" => match &model.kind {
            ModelKind::ThinRodsContinuum { half_length, .. } => {
                let family = ApproximationFamily {
                    kind: MapKind::SpinDiscretization,
                };
                let eps_max = grid.first().copied().unwrap_or(0.0);
                // rotating a rod about its center moves its points by at
                // most half_length * eps; a mapped conflicting pair moves
                // both rods
                let envelope_delta = 2.0 * half_length * family.modulus(eps_max);
                Ok(CoupledRunSpec {
                    family,
                    models: PerEpsilonModels::Fixed(model.clone()),
                    grid,
                    envelope_delta,
                    window,
                    options: SamplerOptions::default(),
                })
            }
            _ => Err(CliError::Usage(
                "spin-disc coupling requires a thin-rods model".into(),
            )),
        },
        other => Err(CliError::Usage(format!("unknown family `{other}`"))),
    }
}

pub fn contours(lmax: u32, beta: Option<f64>, cache: Option<&Path>) -> Result<ExitCode, CliError> {
    if lmax < 4 || lmax % 2 != 0 {
        return Err(CliError::Usage("lmax must be even and at least 4".into()));
    }
    let catalog: ContourCatalog = match cache {
        Some(path) if path.exists() => {
            let text = std::fs::read_to_string(path)?;
            match ContourCatalog::from_cache_text(&text).filter(|c| c.l_max >= lmax) {
                Some(c) => c,
                None => enumerate_contours(lmax).map_err(|e| CliError::Usage(e.to_string()))?,
            }
        }
        _ => enumerate_contours(lmax).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    if let Some(path) = cache {
        if !path.exists() {
            std::fs::write(path, catalog.to_cache_text())?;
        }
    }
    println!("perimeter  shapes  through-site");
    for l in (4..=lmax).step_by(2) {
        println!(
            "{l:>9}  {:>6}  {:>12}",
            catalog.count(l),
            catalog.through_site_count(l)
        );
    }
    if let Some(beta) = beta {
        let lhs = peierls_lhs(beta, &catalog);
        println!("peierls_lhs(beta = {beta}) = {}", format_real(lhs.value));
        match lhs.tail_estimate {
            Some(t) => println!("tail_estimate = {}", format_real(t)),
            None => println!("tail_estimate = (inconclusive growth ratio)"),
        }
        let bound = gassim_core::models::alpha::peierls_alpha(beta, &catalog);
        println!(
            "alpha_bound(beta = {beta}) = {}",
            format_real(bound.truncated)
        );
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
pub fn dynamics(
    spec_path: &Path,
    volume_text: &str,
    horizon: f64,
    replicas: u64,
    seed: u64,
    out: &Path,
    initial: &str,
) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let volume = parse_window(volume_text, &spec.model)?;
    let boundary = ParticleConfiguration::empty(Region::All);
    let exact = match initial {
        "exact" => Some(
            enumerate_gibbs(&spec.model, &volume, &boundary, &EnumOptions::default())
                .map_err(|e| CliError::Usage(format!("exact initial draw unavailable: {e}")))?,
        ),
        "empty" => None,
        other => return Err(CliError::Usage(format!("unknown initial mode `{other}`"))),
    };
    let mut rows = String::new();
    for rep in 0..replicas {
        let rep_seed = derive_seed(seed, rep);
        let initial_config = match &exact {
            Some(dist) => {
                let mut stream = gassim_core::rng::Stream::keyed(rep_seed, 0x1217);
                dist.sample(&mut stream).clone()
            }
            None => ParticleConfiguration::empty(volume.clone()),
        };
        let trajectory = forward_dynamics(
            &spec.model,
            &volume,
            &boundary,
            &initial_config,
            horizon,
            rep_seed,
        );
        for event in &trajectory.events {
            let kind = if event.birth { "B" } else { "D" };
            let record = serialization::record(rep, 0.0, &event.particle, 1);
            rows.push_str(&format!(
                "{rep}\t{}\t{kind}\t{record}\n",
                format_real(event.time)
            ));
        }
    }
    let manifest = RunManifest {
        command: format!(
            "dynamics --volume {volume_text} --horizon {horizon} --replicas {replicas} --seed {seed} --initial {initial}"
        ),
        seed,
        model_description: spec.model.describe(),
        replicas,
        wall_clock_ms: start.elapsed().as_millis(),
        ..Default::default()
    };
    write_output(out, "events.tsv", &rows)?;
    write_output(out, "manifest.txt", &manifest.render())?;
    println!("wrote {} trajectories to {}", replicas, out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn validate(suite: &str, seed: u64) -> Result<ExitCode, CliError> {
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };
    let suites: Vec<&str> = if suite == "all" {
        vec![
            "oracle-wr",
            "substrate",
            "contours",
            "embedding",
            "coupling-ac",
        ]
    } else {
        vec![suite]
    };
    for name in suites {
        match name {
            "oracle-wr" => {
                let model = GasModel::new(ModelKind::DiscreteWr {
                    lambda_plus: 0.05,
                    lambda_minus: 0.05,
                    k: 1,
                    dim: 2,
                });
                let volume = Region::LatticeBox {
                    lo: vec![0, 0],
                    hi: vec![1, 1],
                    marks: MarkSet::All,
                };
                let boundary = ParticleConfiguration::empty(Region::All);
                let exact = enumerate_gibbs(&model, &volume, &boundary, &EnumOptions::default())
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let n = 100_000u64;
                let counts: Vec<(Vec<u8>, u64)> = (0..n)
                    .into_par_iter()
                    .map(|rep| {
                        let (cfg, _) = finite_volume_sample(
                            &model,
                            &volume,
                            &boundary,
                            derive_seed(seed, rep),
                            &SamplerOptions::default(),
                        )
                        .expect("sampling failed");
                        (cfg.canonical_key(), 1u64)
                    })
                    .collect();
                let mut histogram = std::collections::HashMap::new();
                for (key, c) in counts {
                    *histogram.entry(key).or_insert(0) += c;
                }
                let tv = exact.tv_from_counts(&histogram, n);
                check(
                    "oracle-wr",
                    tv <= 0.01,
                    format!("TV = {tv:.5} over {n} samples"),
                );
            }
            "substrate" => {
                use gassim_core::free_process::{CellKey, Substrate};
                use gassim_core::stats;
                let model = GasModel::new(ModelKind::DiscreteWr {
                    lambda_plus: 0.05,
                    lambda_minus: 0.05,
                    k: 1,
                    dim: 2,
                });
                let key = CellKey::Site(vec![0, 0]);
                let n = 10_000u64;
                let mut counts = vec![0.0; 8];
                let mut ages = Vec::new();
                for rep in 0..n {
                    let mut sub = Substrate::for_model(&model, 1.0, derive_seed(seed, rep));
                    let alive = sub.alive_at(&key, 0.0).unwrap();
                    counts[alive.len().min(7)] += 1.0;
                    ages.extend(alive.iter().map(|c| -c.birth));
                }
                let expected: Vec<f64> = stats::poisson_pmf(0.1, 7)
                    .iter()
                    .map(|p| p * n as f64)
                    .collect();
                let (_, _, p_count) = stats::chi_square_gof(&counts, &expected, 5.0);
                let (_, p_age) = stats::ks_test(&mut ages, |x| 1.0 - (-x).exp());
                check(
                    "substrate",
                    p_count > 1e-3 && p_age > 1e-3,
                    format!("count p = {p_count:.4}, age p = {p_age:.4}"),
                );
            }
            "contours" => {
                let a = enumerate_contours(8).map_err(|e| CliError::Usage(e.to_string()))?;
                let b =
                    enumerate_contours_by_trails(8).map_err(|e| CliError::Usage(e.to_string()))?;
                let counts_ok =
                    a.count(4) == 1 && b.count(4) == 1 && a.count(6) == 2 && b.count(6) == 2;
                let identity = gassim_core::oracle::check_contour_identity(3, 0.8)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                check(
                    "contours",
                    counts_ok && identity <= 1e-10,
                    format!("N_4/N_6 confirmed twice, identity diff = {identity:.2e}"),
                );
            }
            "embedding" => {
                use gassim_core::config::{is_delta_embedded, Mark, Particle};
                let mut s = gassim_core::rng::Stream::keyed(seed, 0xE0);
                let mut ok = true;
                for _ in 0..1000 {
                    let n = (s.next_u64() % 5) as usize;
                    let m = (s.next_u64() % 6) as usize;
                    let mk = |s: &mut gassim_core::rng::Stream, n: usize| {
                        ParticleConfiguration::from_particles(
                            Region::All,
                            (0..n).map(|_| {
                                Particle::real(
                                    &[s.uniform() * 2.0, s.uniform() * 2.0],
                                    if s.uniform() < 0.5 {
                                        Mark::Plus
                                    } else {
                                        Mark::Minus
                                    },
                                )
                            }),
                        )
                    };
                    let xi = mk(&mut s, n);
                    let eta = mk(&mut s, m);
                    let delta = 0.05 + s.uniform() * 0.5;
                    ok &= is_delta_embedded(&xi, &eta, delta) == brute_embedded(&xi, &eta, delta);
                }
                check("embedding", ok, "1000 instances vs brute force".into());
            }
            "coupling-ac" => {
                let base = GasModel::new(ModelKind::DiscreteWr {
                    lambda_plus: 0.05,
                    lambda_minus: 0.05,
                    k: 1,
                    dim: 2,
                });
                let window = Region::LatticeBox {
                    lo: vec![0, 0],
                    hi: vec![2, 2],
                    marks: MarkSet::All,
                };
                let grid = vec![0.2, 0.1, 0.05, 0.02, 0.01, 0.0];
                let spec = CoupledRunSpec::fugacity(base, window, grid.clone());
                let n = 300u64;
                let mut holds = std::collections::HashMap::new();
                for rep in 0..n {
                    let out = coupled_sample(&spec, derive_seed(seed, rep))
                        .map_err(|e| CliError::Usage(format!("{e}")))?;
                    for (eps, ok) in out.identity {
                        if ok {
                            *holds.entry(eps.to_bits()).or_insert(0u64) += 1;
                        }
                    }
                }
                let f = |e: f64| *holds.get(&e.to_bits()).unwrap_or(&0) as f64 / n as f64;
                let ok = f(0.01) > f(0.2);
                check(
                    "coupling-ac",
                    ok,
                    format!(
                        "identity fraction 0.01: {:.3} vs 0.2: {:.3}",
                        f(0.01),
                        f(0.2)
                    ),
                );
            }
            other => return Err(CliError::Usage(format!("unknown suite `{other}`"))),
        }
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn brute_embedded(xi: &ParticleConfiguration, eta: &ParticleConfiguration, delta: f64) -> bool {
    let sources = xi.weighted_support();
    let targets = eta.weighted_support();
    fn rec(
        i: usize,
        sources: &[&gassim_core::config::Particle],
        targets: &[&gassim_core::config::Particle],
        used: &mut Vec<bool>,
        delta: f64,
    ) -> bool {
        if i == sources.len() {
            return true;
        }
        for j in 0..targets.len() {
            if !used[j] && sources[i].distance(targets[j]) < delta {
                used[j] = true;
                if rec(i + 1, sources, targets, used, delta) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let mut used = vec![false; targets.len()];
    rec(0, &sources, &targets, &mut used, delta)
}
