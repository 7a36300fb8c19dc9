//! JSON document form of a kernel spec.
//!
//! ```json
//! {"schema_version": 1, "kind": "carleman", "params": {"gamma": {"family": "gaussian"}},
//!  "domain": [null, null],
//!  "quadrature": {"rule": "gauss_legendre_composite", "resolution": 64, "truncation_radius": 8.0}}
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{Basis, ClosedForm, FeatureFamily, KernelKind, KernelSpec};
use crate::domain::Domain;
use crate::error::{Result, RksError};
use crate::io::schema_error;
use crate::quadrature::{QuadratureConfig, QuadratureMeasure, QuadratureRule};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureDoc {
    pub rule: QuadratureRule,
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    /// Integration domain; defaults to the kernel's input domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianParams {
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TanhParams {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CarlemanParams {
    gamma: FeatureFamily,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisParams {
    basis: Basis,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DualityParams {
    gamma: FeatureFamily,
    lambda: FeatureFamily,
}

fn params<T: DeserializeOwned>(map: &Map<String, Value>) -> Result<T> {
    serde_path_to_error::deserialize(Value::Object(map.clone()))
        .map_err(|e| schema_error("/params", e))
}

fn schema(pointer: &str, message: impl Into<String>) -> RksError {
    RksError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

pub(crate) fn closed_form_from_params(name: &str, map: &Map<String, Value>) -> Result<ClosedForm> {
    let form = match name {
        "min" => {
            params::<NoParams>(map)?;
            ClosedForm::Min
        }
        "gaussian" => ClosedForm::Gaussian {
            sigma: params::<GaussianParams>(map)?.sigma,
        },
        "linear_plus_one" => {
            params::<NoParams>(map)?;
            ClosedForm::LinearPlusOne
        }
        "tanh" => {
            let p: TanhParams = params(map)?;
            ClosedForm::Tanh { a: p.a, b: p.b }
        }
        "indicator_equal" => {
            params::<NoParams>(map)?;
            ClosedForm::IndicatorEqual
        }
        other => return Err(RksError::UnknownKernel(other.to_string())),
    };
    form.validate()
        .map_err(|e| schema("/params", e.to_string()))?;
    Ok(form)
}

fn measure(doc: &KernelDoc, domain: Domain) -> Result<QuadratureMeasure> {
    let q = doc.quadrature.as_ref().ok_or_else(|| {
        schema(
            "/quadrature",
            format!("`{}` kernels need a quadrature", doc.kind),
        )
    })?;
    let config = QuadratureConfig {
        rule: q.rule,
        resolution: q.resolution,
        truncation_radius: q.truncation_radius,
    };
    QuadratureMeasure::new(q.domain.unwrap_or(domain), config)
}

impl TryFrom<KernelDoc> for KernelSpec {
    type Error = RksError;

    fn try_from(doc: KernelDoc) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(schema(
                "/schema_version",
                format!("unsupported schema version {}", doc.schema_version),
            ));
        }
        let no_quadrature = || -> Result<()> {
            match doc.quadrature {
                Some(_) => Err(schema(
                    "/quadrature",
                    format!("`{}` kernels take no quadrature", doc.kind),
                )),
                None => Ok(()),
            }
        };
        let mut spec = match doc.kind.as_str() {
            "closed_form" => {
                no_quadrature()?;
                let name = doc
                    .name
                    .as_deref()
                    .ok_or_else(|| schema("/name", "closed-form kernels need a name"))?;
                super::closed_form_kernel(closed_form_from_params(name, &doc.params)?)?
            }
            "carleman" => {
                let p: CarlemanParams = params(&doc.params)?;
                let domain = doc
                    .domain
                    .ok_or_else(|| schema("/domain", "missing domain"))?;
                super::carleman_kernel(p.gamma, measure(&doc, domain)?)?
            }
            "basis_sum" => {
                no_quadrature()?;
                let p: BasisParams = params(&doc.params)?;
                super::basis_kernel(p.basis, p.weights)?
            }
            "duality_pair" => {
                let p: DualityParams = params(&doc.params)?;
                let domain = doc
                    .domain
                    .ok_or_else(|| schema("/domain", "missing domain"))?;
                super::duality_kernel(p.gamma, p.lambda, measure(&doc, domain)?)?
            }
            other => return Err(schema("/kind", format!("unknown kernel kind `{other}`"))),
        };
        if let Some(d) = doc.domain {
            spec = spec.with_domain(d);
        }
        if doc.kind != "closed_form" {
            if let Some(name) = doc.name {
                spec = spec.with_label(name);
            }
        }
        Ok(spec)
    }
}

impl From<KernelSpec> for KernelDoc {
    fn from(spec: KernelSpec) -> Self {
        let domain = spec.domain;
        let quad = |m: &QuadratureMeasure| QuadratureDoc {
            rule: m.config().rule,
            resolution: m.config().resolution,
            truncation_radius: m.config().truncation_radius,
            domain: (m.domain() != domain).then(|| m.domain()),
        };
        let family =
            |f: &FeatureFamily| serde_json::to_value(f).expect("feature family serializes");
        let mut params = Map::new();
        let (name, quadrature) = match &spec.kind {
            KernelKind::ClosedForm(c) => {
                params = c.params();
                (Some(c.name().to_string()), None)
            }
            KernelKind::Carleman { gamma, measure } => {
                params.insert("gamma".into(), family(gamma));
                (spec.label.clone(), Some(quad(measure)))
            }
            KernelKind::BasisSum { basis, weights } => {
                params.insert(
                    "basis".into(),
                    serde_json::to_value(basis).expect("basis serializes"),
                );
                if let Some(w) = weights {
                    params.insert("weights".into(), w.clone().into());
                }
                (spec.label.clone(), None)
            }
            KernelKind::DualityPair {
                gamma,
                lambda,
                measure,
            } => {
                params.insert("gamma".into(), family(gamma));
                params.insert("lambda".into(), family(lambda));
                (spec.label.clone(), Some(quad(measure)))
            }
        };
        KernelDoc {
            schema_version: SCHEMA_VERSION,
            kind: spec.kind_name().to_string(),
            name,
            params,
            domain: Some(domain),
            quadrature,
        }
    }
}

impl KernelSpec {
    /// Parses a kernel spec, reporting schema errors with a JSON pointer.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: KernelDoc = crate::io::from_json_str(s)?;
        KernelSpec::try_from(doc)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel spec serializes")
    }
}
