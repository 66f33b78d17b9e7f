//! Configuration files.
//!
//! ```toml
//! [space]
//! p = 2
//! n = 2
//! K = 1.0
//!
//! [metric.h]
//! components = [["1", "0"], ["0", "1"]]
//!
//! [metric.phi]
//! components = [["1", "0"], ["0", "sin(x1)^2"]]
//!
//! [sigma]
//! preset = "linear-U"        # or: expr = "x1*y_1_1"
//! U = [["x2/3", "t1/4"], ["1/5", "0"]]
//!
//! [verify]
//! points = 20
//! seed = 7
//! tolerance = 1e-9
//! box_x = [0.4, 2.6]
//! ```

use std::path::Path;

use jetfield_core::expr::parse;
use jetfield_core::{SigmaSpec, SpaceSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub p: usize,
    pub n: usize,
    #[serde(rename = "K", default = "default_k")]
    pub k: f64,
}

fn default_k() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSection {
    pub components: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub h: MatrixSection,
    pub phi: MatrixSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Vec<String>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<String>>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub box_t: [f64; 2],
    pub box_x: [f64; 2],
    pub box_y: [f64; 2],
    pub degeneracy_threshold: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            points: 20,
            seed: 0,
            tolerance: 1e-9,
            box_t: [-1.0, 1.0],
            box_x: [-1.0, 1.0],
            box_y: [-1.0, 1.0],
            degeneracy_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub space: SpaceSection,
    pub metric: MetricSection,
    #[serde(default)]
    pub sigma: SigmaSection,
    #[serde(default)]
    pub verify: VerifySection,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceConfig {
    pub file: ConfigFile,
    pub spec: SpaceSpec,
}

impl SpaceConfig {
    pub fn verify(&self) -> &VerifySection {
        &self.file.verify
    }

    /// SHA-256 of the parsed content, insensitive to layout and comments.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&self.file).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

pub fn load_config(path: &Path) -> Result<SpaceConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SpaceConfig, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    from_file(file)
}

fn need<T: Clone>(v: &Option<T>, key: &str, preset: &str) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Config(format!("sigma preset {preset} needs `{key}`")))
}

fn sigma_spec(s: &SigmaSection) -> Result<SigmaSpec, CliError> {
    match (&s.expr, s.preset.as_deref()) {
        (Some(_), Some(_)) => Err(CliError::Config("sigma: give either `expr` or `preset`, not both".into())),
        (Some(e), None) => Ok(SigmaSpec::Expr(e.clone())),
        (None, None) | (None, Some("zero")) => Ok(SigmaSpec::Zero),
        (None, Some("linear-U")) => Ok(SigmaSpec::LinearU { u: need(&s.u, "U", "linear-U")? }),
        (None, Some("quadratic-A")) => Ok(SigmaSpec::QuadraticA { a: need(&s.a, "A", "quadratic-A")? }),
        (None, Some("quadratic-X")) => Ok(SigmaSpec::QuadraticX { x: need(&s.x, "X", "quadratic-X")? }),
        (None, Some(other)) => Err(CliError::Config(format!(
            "unknown sigma preset `{other}` (known: zero, linear-U, quadratic-A, quadratic-X)"
        ))),
    }
}

fn check_box(name: &str, b: [f64; 2]) -> Result<(), CliError> {
    if b[0].is_finite() && b[1].is_finite() && b[0] <= b[1] {
        Ok(())
    } else {
        Err(CliError::Config(format!("verify.{name} must be a finite [lo, hi] with lo <= hi")))
    }
}

pub fn from_file(file: ConfigFile) -> Result<SpaceConfig, CliError> {
    let (p, n) = (file.space.p, file.space.n);
    if p == 0 || n == 0 {
        return Err(CliError::Config("space.p and space.n must be positive".into()));
    }
    if !file.space.k.is_finite() || file.space.k == 0.0 {
        return Err(CliError::Config("space.K must be finite and nonzero".into()));
    }
    let v = &file.verify;
    if v.points == 0 {
        return Err(CliError::Config("verify.points must be positive".into()));
    }
    if !(v.tolerance > 0.0) || !(v.degeneracy_threshold >= 0.0) {
        return Err(CliError::Config("verify.tolerance must be positive and the threshold nonnegative".into()));
    }
    check_box("box_t", v.box_t)?;
    check_box("box_x", v.box_x)?;
    check_box("box_y", v.box_y)?;

    let spec = SpaceSpec {
        p,
        n,
        h: file.metric.h.components.clone(),
        phi: file.metric.phi.components.clone(),
        sigma: sigma_spec(&file.sigma)?,
        k: file.space.k,
    };
    let dims = spec.dims();
    for (name, rows) in [("metric.h", &spec.h), ("metric.phi", &spec.phi)] {
        for (r, row) in rows.iter().enumerate() {
            for (c, src) in row.iter().enumerate() {
                parse(src, dims).map_err(|e| CliError::Config(format!("{name}[{r}][{c}]: {e}")))?;
            }
        }
    }
    let (h, phi) = spec.metrics().map_err(|e| CliError::Config(e.to_string()))?;
    spec.sigma_expr(&h, &phi)
        .map_err(|e| CliError::Config(format!("sigma: {e}")))?;
    Ok(SpaceConfig { file, spec })
}
