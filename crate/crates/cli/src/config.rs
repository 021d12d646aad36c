use std::path::{Path, PathBuf};

use hopfield::medium::{MediumSpec, OscillatorSpec, PerturbationProfile, ProfileKind};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub medium: MediumConfig,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    pub scan: ScanConfig,
    #[serde(default)]
    pub scattering: ScatteringConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    #[serde(default = "one")]
    pub c: f64,
    /// Medium velocity along x in the frame used by the lattice checks.
    #[serde(default)]
    pub velocity: f64,
    pub oscillators: Vec<OscillatorConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub chi: f64,
    pub omega0: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ProfileName {
    None,
    Gaussian,
    Sech2,
    TanhStepPair,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub kind: ProfileName,
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub sites: usize,
    pub dim: usize,
    pub spacing: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            sites: 16,
            dim: 1,
            spacing: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub k: Range,
    pub omega_prime: Range,
    #[serde(default = "zero_list")]
    pub ky: Vec<f64>,
    #[serde(default = "zero_list")]
    pub kz: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringConfig {
    /// Medium velocity along x in the frame where the perturbation is at rest.
    pub velocity: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        ScatteringConfig { velocity: -0.3 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub integrator: f64,
    pub bracket: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            integrator: 1e-11,
            bracket: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    pub path: PathBuf,
    #[serde(default = "one_usize")]
    pub threads: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            format: Format::Csv,
            path: PathBuf::from("out"),
            threads: 1,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Loaded, ConfigError> {
    let config: RunConfig = toml::from_str(text)?;
    config.validate()?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(Loaded { config, hash })
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |s: String| Err(ConfigError::Invalid(s));
        if self.medium.oscillators.is_empty() {
            return bad("medium.oscillators is empty".into());
        }
        if !(self.medium.c > 0.0) {
            return bad("medium.c must be positive".into());
        }
        if !(self.tolerances.integrator > 0.0) || !(self.tolerances.bracket > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.scan.k.count == 0 || self.scan.omega_prime.count == 0 {
            return bad("scan ranges must be nonempty".into());
        }
        if self.scan.ky.is_empty() || self.scan.kz.is_empty() {
            return bad("scan.ky and scan.kz must be nonempty".into());
        }
        if self.scan.k.values().iter().any(|&k| !(k > 0.0)) {
            return bad("scan.k values must be positive".into());
        }
        if self.output.threads == 0 {
            return bad("output.threads must be at least 1".into());
        }
        if self.grid.sites < 3 || !(self.grid.dim == 1 || self.grid.dim == 3) {
            return bad("grid needs at least 3 sites and dim 1 or 3".into());
        }
        Ok(())
    }

    pub fn oscillators(&self) -> Result<Vec<OscillatorSpec>, hopfield::Error> {
        self.medium
            .oscillators
            .iter()
            .map(|o| OscillatorSpec::new(o.chi, o.omega0, o.g))
            .collect()
    }

    /// Medium at rest with no perturbation.
    pub fn rest_medium(&self) -> Result<MediumSpec, hopfield::Error> {
        MediumSpec::moving(
            self.oscillators()?,
            0.0,
            PerturbationProfile::none(),
            self.medium.c,
        )
    }

    /// Medium moving with `medium.velocity`, used by the lattice checks.
    pub fn frame_medium(&self) -> Result<MediumSpec, hopfield::Error> {
        MediumSpec::moving(
            self.oscillators()?,
            self.medium.velocity,
            PerturbationProfile::none(),
            self.medium.c,
        )
    }

    pub fn profile(&self) -> Result<PerturbationProfile, hopfield::Error> {
        match self.perturbation {
            None => Ok(PerturbationProfile::none()),
            Some(p) => {
                let kind = match p.kind {
                    ProfileName::None => return Ok(PerturbationProfile::none()),
                    ProfileName::Gaussian => ProfileKind::Gaussian,
                    ProfileName::Sech2 => ProfileKind::Sech2,
                    ProfileName::TanhStepPair => ProfileKind::TanhStepPair,
                };
                PerturbationProfile::new(kind, p.amplitude, p.width, p.center)
            }
        }
    }

    /// Medium seen from the frame where the perturbation is static.
    pub fn scattering_medium(&self) -> Result<MediumSpec, hopfield::Error> {
        MediumSpec::moving(
            self.oscillators()?,
            self.scattering.velocity,
            self.profile()?,
            self.medium.c,
        )
    }
}
