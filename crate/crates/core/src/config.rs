//! Run configuration, parsed strictly from TOML.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evolution::QuadratureParams;
use crate::grid::Grid;
use crate::pencil::DEFAULT_REAL_TOLERANCE;
use crate::profile::Profile;
use crate::regions::{RingConvention, DEFAULT_BOUNDARY_TOL};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub real_tolerance: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            real_tolerance: DEFAULT_REAL_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionsConfig {
    pub ring_convention: RingConvention,
    pub boundary_tol: f64,
}

impl Default for RegionsConfig {
    fn default() -> Self {
        RegionsConfig {
            ring_convention: RingConvention::default(),
            boundary_tol: DEFAULT_BOUNDARY_TOL,
        }
    }
}

/// Initial displacement or velocity on the grid nodes.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero {},
    /// `amplitude · sin⁴(πx/L)`.
    Bump { amplitude: f64 },
    /// `amplitude ·` the `index`-th eigenvector of `A`.
    Mode { index: usize, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub psi0: InitialData,
    pub psi1: InitialData,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            psi0: InitialData::Bump { amplitude: 1.0 },
            psi1: InitialData::Zero {},
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub initial: InitialConfig,
    /// Also write `state.bin`.
    pub dump_state: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_end: 1.0,
            dt: 1e-3,
            initial: InitialConfig::default(),
            dump_state: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaplaceConfig {
    pub sigma0: f64,
    pub half_width: f64,
    pub m: usize,
    pub times: Vec<f64>,
    pub tolerance: f64,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        let q = QuadratureParams::default();
        LaplaceConfig {
            sigma0: q.sigma0,
            half_width: q.half_width,
            m: q.m,
            times: vec![0.5, 1.0],
            tolerance: 1e-3,
        }
    }
}

impl LaplaceConfig {
    pub fn quadrature(&self) -> QuadratureParams {
        QuadratureParams {
            sigma0: self.sigma0,
            half_width: self.half_width,
            m: self.m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub xi_decades: [f64; 2],
    pub per_decade: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            xi_decades: [-2.0, 4.0],
            per_decade: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Limits for the heavier checks run by `verify-all`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub surrogates: usize,
    pub surrogate_max_n: usize,
    pub laplace_max_n: usize,
    pub resolvent_max_n: usize,
    pub dissipativity_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            surrogates: 200,
            surrogate_max_n: 30,
            laplace_max_n: 50,
            resolvent_max_n: 150,
            dissipativity_samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub grid: GridConfig,
    #[serde(default = "zero_profile")]
    pub tension: Profile,
    #[serde(default = "zero_profile")]
    pub damping: Profile,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub regions: RegionsConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub laplace: LaplaceConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: u64,
}

fn zero_profile() -> Profile {
    Profile::Zero
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: must be finite and positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        self.grid()?;
        self.tension
            .validate()
            .map_err(|e| Error::Config(format!("tension: {e}")))?;
        self.damping
            .validate()
            .map_err(|e| Error::Config(format!("damping: {e}")))?;
        positive("spectrum.real_tolerance", self.spectrum.real_tolerance)?;
        let bt = self.regions.boundary_tol;
        if !(bt.is_finite() && (0.0..1.0).contains(&bt)) {
            return Err(Error::Config(format!("regions.boundary_tol: must lie in [0, 1), got {bt}")));
        }
        positive("evolve.t_end", self.evolve.t_end)?;
        positive("evolve.dt", self.evolve.dt)?;
        if self.evolve.dt > self.evolve.t_end {
            return Err(Error::Config(format!(
                "evolve.dt: must satisfy dt <= t_end, got dt = {} and t_end = {}",
                self.evolve.dt, self.evolve.t_end
            )));
        }
        for (key, data) in [("evolve.initial.psi0", &self.evolve.initial.psi0), ("evolve.initial.psi1", &self.evolve.initial.psi1)] {
            match data {
                InitialData::Zero {} => {}
                InitialData::Bump { amplitude } | InitialData::Mode { amplitude, .. } if !amplitude.is_finite() => {
                    return Err(Error::Config(format!("{key}.amplitude: must be finite")));
                }
                InitialData::Mode { index, .. } if *index >= self.grid.n => {
                    return Err(Error::Config(format!("{key}.index: must be below grid.n = {}", self.grid.n)));
                }
                _ => {}
            }
        }
        positive("laplace.sigma0", self.laplace.sigma0)?;
        positive("laplace.half_width", self.laplace.half_width)?;
        positive("laplace.tolerance", self.laplace.tolerance)?;
        if self.laplace.m < 100 || self.laplace.m % 4 != 0 {
            return Err(Error::Config(format!(
                "laplace.m: must be a multiple of 4 and at least 100, got {}",
                self.laplace.m
            )));
        }
        for &t in &self.laplace.times {
            if !(t.is_finite() && t > 0.0 && t <= self.evolve.t_end) {
                return Err(Error::Config(format!("laplace.times: {t} must lie in (0, evolve.t_end]")));
            }
        }
        let [lo, hi] = self.scan.xi_decades;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("scan.xi_decades: need finite lo < hi, got [{lo}, {hi}]")));
        }
        if self.scan.per_decade == 0 {
            return Err(Error::Config("scan.per_decade: must be positive".into()));
        }
        if self.verify.surrogate_max_n < 2 {
            return Err(Error::Config("verify.surrogate_max_n: must be at least 2".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.length, self.grid.n).map_err(|e| Error::Config(format!("grid: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "alpha = 1.0\n[grid]\nlength = 10.0\nn = 50\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.tension, Profile::Zero);
        assert_eq!(cfg.laplace.quadrature(), QuadratureParams::default());
        assert_eq!(cfg.regions.ring_convention, RingConvention::CenterMinusInvAlpha);
        assert_eq!(cfg.seed, 0);
        assert!(cfg.output.wants(Format::Csv) && cfg.output.wants(Format::Json));
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
alpha = 0.5
seed = 9
[grid]
length = 8.0
n = 100
[tension]
kind = "square_well"
height = 10.0
support = [0.0, 1.0]
[damping]
kind = "table"
breakpoints = [0.0, 8.0]
values = [0.3]
[spectrum]
real_tolerance = 1e-9
[regions]
ring_convention = "center_plus_inv_alpha"
[evolve]
t_end = 2.0
dt = 0.01
dump_state = true
[evolve.initial.psi0]
kind = "mode"
index = 0
amplitude = 2.0
[evolve.initial.psi1]
kind = "zero"
[laplace]
sigma0 = 1.5
half_width = 300.0
m = 8000
[scan]
xi_decades = [-1.0, 3.0]
per_decade = 5
[output]
dir = "results"
formats = ["json"]
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.evolve.initial.psi0, InitialData::Mode { index: 0, amplitude: 2.0 });
        assert!(!cfg.output.wants(Format::Csv));
        assert_eq!(cfg.regions.ring_convention, RingConvention::CenterPlusInvAlpha);
    }

    #[test]
    fn missing_alpha_names_the_key() {
        let err = RunConfig::from_toml_str("[grid]\nlength = 1.0\nn = 10\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for extra in ["bogus = 1\n", "[grid2]\nx = 1\n", "[evolve]\ndtt = 0.1\n", "[tension]\nkind = \"zero\"\nheight = 1.0\n"] {
            let err = RunConfig::from_toml_str(&format!("{MINIMAL}{extra}")).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{extra}");
        }
        let err = RunConfig::from_toml_str(&format!("{MINIMAL}[evolve]\ndtt = 0.1\n")).unwrap_err();
        assert!(err.to_string().contains("dtt"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in [
            "alpha = -1.0\n[grid]\nlength = 1.0\nn = 10\n",
            "alpha = nan\n[grid]\nlength = 1.0\nn = 10\n",
            "alpha = 1.0\n[grid]\nlength = 1.0\nn = 2\n",
            "alpha = 1.0\n[grid]\nlength = 1.0\nn = 10\n[evolve]\nt_end = 1.0\ndt = 2.0\n",
            "alpha = 1.0\n[grid]\nlength = 1.0\nn = 10\n[laplace]\nm = 50\n",
            "alpha = 1.0\n[grid]\nlength = 1.0\nn = 10\n[scan]\nxi_decades = [2.0, 1.0]\n",
        ] {
            let err = RunConfig::from_toml_str(text).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}");
        }
        let err = RunConfig::from_toml_str("alpha = 1.0\n[grid]\nlength = 1.0\nn = 10\n[evolve]\nt_end = 1.0\ndt = 2.0\n")
            .unwrap_err();
        assert!(err.to_string().contains("evolve.dt"));
    }
}
