//! Run configuration: TOML file, command-line overrides, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub phantom: PhantomConfig,
    pub lambda: LambdaConfig,
    pub solver: SolverConfig,
    pub reconstruct: ReconstructConfig,
    pub noise: NoiseConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// cells per side of the square reconstruction grid
    pub grid: usize,
    /// half width of that grid; the conductivity lives in the unit disk
    pub half_width: f64,
    /// nodes on the unit-circle boundary
    pub boundary_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomConfig {
    /// constant | gaussian | two-bump | annulus
    pub preset: String,
    /// optional overrides, honored by the gaussian preset only
    pub amp: Option<f64>,
    pub width: Option<f64>,
    pub center: Option<[f64; 2]>,
    /// cutoff radius confining the bump strictly inside the disk (0 = off)
    pub support: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaConfig {
    /// half width of the square spectral grid
    pub radius: f64,
    /// cells per side of the spectral grid
    pub nodes: usize,
    /// optional polar decay sweep appended by the scatter stage (0 = off)
    pub sweep_radii: usize,
    /// angles of the polar sweep; must be even so the node set is closed
    /// under conjugation
    pub sweep_angles: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// radial nodes of the polar forward grid (0: same as boundary_nodes)
    pub forward_resolution: usize,
    /// stencil width of the spectral-derivative extraction of b
    pub b_delta: f64,
    /// relative node-spread above which a b sample is masked and infilled
    pub mask_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructConfig {
    /// a | b | c
    pub formula: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// DtN perturbation level, relative to the RMS entry of Φ − Φ0
    pub level: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            grid: 64,
            half_width: 2.0,
            boundary_nodes: 64,
        }
    }
}

impl Default for PhantomConfig {
    fn default() -> Self {
        PhantomConfig {
            preset: "gaussian".to_owned(),
            amp: None,
            width: None,
            center: None,
            support: None,
        }
    }
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig {
            radius: 4.0,
            nodes: 16,
            sweep_radii: 0,
            sweep_angles: 4,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            forward_resolution: 0,
            b_delta: 0.02,
            mask_threshold: 0.2,
        }
    }
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig {
            formula: "a".to_owned(),
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { level: 0.0, seed: 0 }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainConfig::default(),
            phantom: PhantomConfig::default(),
            lambda: LambdaConfig::default(),
            solver: SolverConfig::default(),
            reconstruct: ReconstructConfig::default(),
            noise: NoiseConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Command-line overrides applied on top of the file (or default) config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub lambda_radius: Option<f64>,
    pub grid: Option<usize>,
    pub boundary_nodes: Option<usize>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, over: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &over.out {
            cfg.output.dir = v.clone();
        }
        if let Some(v) = over.lambda_radius {
            cfg.lambda.radius = v;
        }
        if let Some(v) = over.grid {
            cfg.domain.grid = v;
        }
        if let Some(v) = over.boundary_nodes {
            cfg.domain.boundary_nodes = v;
        }
        if let Some(v) = over.noise {
            cfg.noise.level = v;
        }
        if let Some(v) = over.seed {
            cfg.noise.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.domain.grid < 8 {
            return bad(format!("domain.grid = {} is below the minimum of 8", self.domain.grid));
        }
        if !(self.domain.half_width > 1.0) {
            return bad("domain.half_width must exceed the unit-disk radius 1".into());
        }
        if self.domain.boundary_nodes < 8 || self.domain.boundary_nodes % 2 != 0 {
            return bad(format!(
                "domain.boundary_nodes = {} must be even and at least 8",
                self.domain.boundary_nodes
            ));
        }
        if !(self.lambda.radius > 0.0) {
            return bad("lambda.radius must be positive".into());
        }
        if self.lambda.nodes < 4 {
            return bad(format!("lambda.nodes = {} is below the minimum of 4", self.lambda.nodes));
        }
        if self.lambda.sweep_radii > 0 && self.lambda.sweep_angles % 2 != 0 {
            return bad(format!(
                "lambda.sweep_angles = {} is odd: the polar sweep must be closed under conjugation",
                self.lambda.sweep_angles
            ));
        }
        if !(self.solver.b_delta > 0.0) {
            return bad("solver.b_delta must be positive".into());
        }
        if !(self.solver.mask_threshold > 0.0) {
            return bad("solver.mask_threshold must be positive".into());
        }
        if !matches!(self.reconstruct.formula.as_str(), "a" | "b" | "c") {
            return bad(format!(
                "reconstruct.formula = {:?} (expected \"a\", \"b\", or \"c\")",
                self.reconstruct.formula
            ));
        }
        if self.noise.level < 0.0 {
            return bad("noise.level must be nonnegative".into());
        }
        match self.phantom.preset.as_str() {
            "constant" | "gaussian" | "two-bump" | "annulus" => {}
            other => return bad(format!("unknown phantom preset {other:?}")),
        }
        Ok(())
    }

    /// Radial resolution of the polar forward grid.
    pub fn forward_resolution(&self) -> usize {
        if self.solver.forward_resolution == 0 {
            self.domain.boundary_nodes.max(32)
        } else {
            self.solver.forward_resolution
        }
    }

    /// SHA-256 over the canonical serialized form of the effective config.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_hash_is_stable() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.hash(), cfg.clone().hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn odd_sweep_angles_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.lambda.sweep_radii = 3;
        cfg.lambda.sweep_angles = 5;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn overrides_take_effect() {
        let over = Overrides {
            grid: Some(32),
            noise: Some(0.01),
            ..Default::default()
        };
        let cfg = RunConfig::load(None, &over).unwrap();
        assert_eq!(cfg.domain.grid, 32);
        assert_eq!(cfg.noise.level, 0.01);
    }
}
