//! Declarative model specification files.
//!
//! Key-value text, one `key = value` pair per line, `#` comments. Unknown
//! keys are rejected. Example:
//!
//! ```text
//! family = discrete-wr
//! dim = 2
//! lambda_plus = 0.05
//! lambda_minus = 0.05
//! k = 1
//! ```
//!
//! Orientation measures are `uniform` or a weighted atom list
//! `angle:weight,angle:weight`; repulsion step functions are breakpoint
//! lists `threshold:value,...` with `inf` allowed as a value.

use crate::error::SpecError;
use crate::models::{GasModel, ModelKind, OrientationMeasure, StepFn};
use std::collections::HashMap;
use std::sync::Arc;

/// Parsed specification: the model plus sampler-facing knobs.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub model: GasModel,
    pub envelope_delta: Option<f64>,
    pub cell_edge: Option<f64>,
    /// Canonical text for hashing into manifests.
    pub canonical: String,
}

const KNOWN_KEYS: &[&str] = &[
    "family",
    "dim",
    "lambda",
    "lambda_plus",
    "lambda_minus",
    "k",
    "radius",
    "half_length",
    "beta",
    "l_max",
    "orientation",
    "h",
    "j_plus",
    "j_minus",
    "delta_e",
    "envelope_delta",
    "cell_size",
];

pub fn parse_model_spec(text: &str) -> Result<ModelSpec, SpecError> {
    let mut pairs: HashMap<String, String> = HashMap::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| SpecError::InvalidValue {
                key: line.to_string(),
                message: "expected `key = value`".into(),
            })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(SpecError::UnknownKey(key));
        }
        pairs.insert(key, value.trim().to_string());
    }

    let family = pairs
        .get("family")
        .ok_or(SpecError::MissingKey("family".into()))?
        .clone();
    let get_f64 = |key: &str| -> Result<f64, SpecError> {
        let raw = pairs
            .get(key)
            .ok_or_else(|| SpecError::MissingKey(key.into()))?;
        raw.parse().map_err(|_| SpecError::InvalidValue {
            key: key.into(),
            message: format!("not a number: {raw}"),
        })
    };
    let get_f64_or = |key: &str, default: f64| -> Result<f64, SpecError> {
        match pairs.get(key) {
            Some(raw) => raw.parse().map_err(|_| SpecError::InvalidValue {
                key: key.into(),
                message: format!("not a number: {raw}"),
            }),
            None => Ok(default),
        }
    };
    let get_usize_or = |key: &str, default: usize| -> Result<usize, SpecError> {
        match pairs.get(key) {
            Some(raw) => raw.parse().map_err(|_| SpecError::InvalidValue {
                key: key.into(),
                message: format!("not an integer: {raw}"),
            }),
            None => Ok(default),
        }
    };

    let kind = match family.as_str() {
        "discrete-wr" => ModelKind::DiscreteWr {
            lambda_plus: get_f64("lambda_plus")?,
            lambda_minus: get_f64("lambda_minus")?,
            k: get_f64("k")? as i64,
            dim: get_usize_or("dim", 2)?,
        },
        "continuum-wr" => ModelKind::ContinuumWr {
            lambda_plus: get_f64("lambda_plus")?,
            lambda_minus: get_f64("lambda_minus")?,
            radius: get_f64("radius")?,
            dim: get_usize_or("dim", 2)?,
        },
        "generalized-wr" => ModelKind::GeneralizedWr {
            lambda_plus: get_f64("lambda_plus")?,
            lambda_minus: get_f64("lambda_minus")?,
            h: parse_step_fn(pairs.get("h").map(String::as_str).unwrap_or(""))?,
            j_plus: parse_step_fn(pairs.get("j_plus").map(String::as_str).unwrap_or(""))?,
            j_minus: parse_step_fn(pairs.get("j_minus").map(String::as_str).unwrap_or(""))?,
            dim: get_usize_or("dim", 2)?,
        },
        "thin-rods" => ModelKind::ThinRodsContinuum {
            lambda: get_f64("lambda")?,
            half_length: get_f64("half_length")?,
            orientation: parse_orientation(
                pairs
                    .get("orientation")
                    .map(String::as_str)
                    .unwrap_or("uniform"),
            )?,
        },
        "thin-rods-lattice" => ModelKind::ThinRodsLattice {
            lambda: get_f64("lambda")?,
            half_length: get_f64("half_length")?,
            orientation: parse_orientation(
                pairs
                    .get("orientation")
                    .map(String::as_str)
                    .unwrap_or("uniform"),
            )?,
        },
        "peierls" => {
            let l_max = get_usize_or("l_max", 10)? as u32;
            let catalog = crate::contours::enumerate_contours(l_max).map_err(|e| {
                SpecError::InvalidValue {
                    key: "l_max".into(),
                    message: format!("{e}"),
                }
            })?;
            ModelKind::Peierls {
                beta: get_f64("beta")?,
                catalog: Arc::new(catalog),
            }
        }
        other => {
            return Err(SpecError::InvalidValue {
                key: "family".into(),
                message: format!("unknown family `{other}`"),
            })
        }
    };
    let mut model = GasModel::new(kind);
    if let Some(raw) = pairs.get("delta_e") {
        model.delta_e = raw.parse().map_err(|_| SpecError::InvalidValue {
            key: "delta_e".into(),
            message: format!("not a number: {raw}"),
        })?;
    }
    let envelope_delta = match pairs.get("envelope_delta") {
        Some(_) => Some(get_f64_or("envelope_delta", 0.0)?),
        None => None,
    };
    let cell_edge = match pairs.get("cell_size") {
        Some(_) => Some(get_f64_or("cell_size", 1.0)?),
        None => None,
    };

    let mut keys: Vec<&String> = pairs.keys().collect();
    keys.sort();
    let canonical = keys
        .iter()
        .map(|k| format!("{k} = {}", pairs[k.as_str()]))
        .collect::<Vec<_>>()
        .join("\n");

    Ok(ModelSpec {
        model,
        envelope_delta,
        cell_edge,
        canonical,
    })
}

fn parse_step_fn(text: &str) -> Result<StepFn, SpecError> {
    let text = text.trim();
    if text.is_empty() || text == "none" {
        return Ok(StepFn::zero());
    }
    let mut steps = Vec::new();
    for part in text.split(',') {
        let (t, v) = part
            .split_once(':')
            .ok_or_else(|| SpecError::InvalidValue {
                key: "step function".into(),
                message: format!("expected threshold:value, got {part}"),
            })?;
        let threshold: f64 = t.trim().parse().map_err(|_| SpecError::InvalidValue {
            key: "step function".into(),
            message: format!("bad threshold {t}"),
        })?;
        let value: f64 = match v.trim() {
            "inf" | "+inf" => f64::INFINITY,
            raw => raw.parse().map_err(|_| SpecError::InvalidValue {
                key: "step function".into(),
                message: format!("bad value {raw}"),
            })?,
        };
        steps.push((threshold, value));
    }
    StepFn::new(steps).map_err(|e| SpecError::InvalidValue {
        key: "step function".into(),
        message: format!("{e}"),
    })
}

fn parse_orientation(text: &str) -> Result<OrientationMeasure, SpecError> {
    if text.trim() == "uniform" {
        return Ok(OrientationMeasure::Uniform);
    }
    let mut atoms = Vec::new();
    for part in text.split(',') {
        let (a, w) = part
            .split_once(':')
            .ok_or_else(|| SpecError::InvalidValue {
                key: "orientation".into(),
                message: format!("expected angle:weight, got {part}"),
            })?;
        let angle: f64 = a.trim().parse().map_err(|_| SpecError::InvalidValue {
            key: "orientation".into(),
            message: format!("bad angle {a}"),
        })?;
        let weight: f64 = w.trim().parse().map_err(|_| SpecError::InvalidValue {
            key: "orientation".into(),
            message: format!("bad weight {w}"),
        })?;
        if !(0.0..std::f64::consts::PI).contains(&angle) {
            return Err(SpecError::InvalidValue {
                key: "orientation".into(),
                message: format!("angle {angle} outside [0, pi)"),
            });
        }
        if weight <= 0.0 {
            return Err(SpecError::InvalidValue {
                key: "orientation".into(),
                message: format!("weight {weight} must be positive"),
            });
        }
        atoms.push((angle, weight));
    }
    Ok(OrientationMeasure::Atoms(atoms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_discrete_wr() {
        let spec = parse_model_spec(
            "# canonical test model\nfamily = discrete-wr\nlambda_plus = 0.05\nlambda_minus = 0.05\nk = 1\ndim = 2\n",
        )
        .unwrap();
        match spec.model.kind {
            ModelKind::DiscreteWr { lambda_plus, k, .. } => {
                assert_eq!(lambda_plus, 0.05);
                assert_eq!(k, 1);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse_model_spec("family = discrete-wr\nfoo = 1\n");
        assert_eq!(err.unwrap_err(), SpecError::UnknownKey("foo".into()));
    }

    #[test]
    fn parses_rods_with_atoms_and_step_functions() {
        let spec = parse_model_spec(
            "family = thin-rods\nlambda = 0.1\nhalf_length = 0.5\norientation = 0:0.5,1.5707963267948966:0.5\n",
        )
        .unwrap();
        match spec.model.kind {
            ModelKind::ThinRodsContinuum {
                orientation: OrientationMeasure::Atoms(a),
                ..
            } => {
                assert_eq!(a.len(), 2);
            }
            _ => panic!("wrong kind"),
        }

        let spec = parse_model_spec(
            "family = generalized-wr\nlambda_plus = 0.1\nlambda_minus = 0.1\nh = 1.0:2.0\nj_plus = 0.5:inf\n",
        )
        .unwrap();
        match spec.model.kind {
            ModelKind::GeneralizedWr {
                h, j_plus, j_minus, ..
            } => {
                assert_eq!(h.value_at(0.5), 2.0);
                assert_eq!(j_plus.value_at(0.2), f64::INFINITY);
                assert_eq!(j_minus.value_at(0.2), 0.0);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn parses_peierls_and_overrides() {
        let spec = parse_model_spec(
            "family = peierls\nbeta = 0.9\nl_max = 8\ncell_size = 1.0\nenvelope_delta = 0.0\n",
        )
        .unwrap();
        assert_eq!(spec.cell_edge, Some(1.0));
        assert_eq!(spec.envelope_delta, Some(0.0));
        match spec.model.kind {
            ModelKind::Peierls { beta, catalog } => {
                assert_eq!(beta, 0.9);
                assert_eq!(catalog.l_max, 8);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn missing_required_key_is_reported() {
        let err = parse_model_spec("family = continuum-wr\nlambda_plus = 0.1\n");
        assert!(matches!(err, Err(SpecError::MissingKey(_))));
    }
}
