//! Scenario files (TOML) and their merge with command-line flags.
//!
//! ```toml
//! [params]            # optional, defaults to the reference instance
//! mu1 = 5.0
//! mu2 = 8.0
//! q1 = 2.0
//! q2 = 10.0
//! x1 = -1.0
//! x2 = 1.0
//!
//! [output]
//! times = [0.01, 0.0125]   # positive, strictly increasing
//! samples = 2000
//! dir = "out"
//! format = "csv"           # or "json"
//!
//! [fv]
//! cells = 2000
//! cfl = 0.45
//! flux = "hll"             # or "rusanov"
//! domain = [-2.0, 6.0]     # optional, sized from the wave layout otherwise
//! refine = 1               # number of grids, each doubling the last
//!
//! [general]                # optional, the plateau data otherwise
//! mobilities = [5.0, 8.0]  # optional, defaults to params
//! breaks = [-1.0, 1.0]
//! r1 = [5.0, 2.0, 5.0]
//! r2 = [8.0, 10.0, 8.0]
//! domain = [-5.0, 5.0]
//! window = [1.2, 5.6]      # optional x window of the march
//! seed_a = 0.0             # optional A-curve parameter of the seed ray
//! h_max = 0.02
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use zonesep::{MixtureParams, NumericalFlux};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: Option<MixtureParams>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub fv: FvSection,
    pub general: Option<GeneralSection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub times: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FvSection {
    pub cells: Option<usize>,
    pub cfl: Option<f64>,
    pub flux: Option<NumericalFlux>,
    pub domain: Option<[f64; 2]>,
    pub refine: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    pub mobilities: Option<[f64; 2]>,
    pub breaks: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub domain: [f64; 2],
    pub window: Option<[f64; 2]>,
    pub seed_a: Option<f64>,
    pub h_max: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub times: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub cells: Option<usize>,
    pub cfl: Option<f64>,
    pub format: Option<Format>,
    pub flux: Option<NumericalFlux>,
    pub refine: Option<usize>,
}

/// Fully resolved settings of one invocation.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub params: MixtureParams,
    pub times: Vec<f64>,
    pub samples: usize,
    pub out_dir: PathBuf,
    pub format: Format,
    pub cells: usize,
    pub cfl: f64,
    pub flux: NumericalFlux,
    pub fv_domain: Option<(f64, f64)>,
    pub refine: usize,
    pub general: Option<GeneralSection>,
}

impl Scenario {
    pub fn resolve(
        cfg: ScenarioConfig,
        o: Overrides,
        default_times: &[f64],
    ) -> Result<Self, String> {
        let s = Self {
            params: cfg.params.unwrap_or_else(MixtureParams::reference),
            times: o
                .times
                .or(cfg.output.times)
                .unwrap_or_else(|| default_times.to_vec()),
            samples: o.samples.or(cfg.output.samples).unwrap_or(2000),
            out_dir: o
                .out
                .or(cfg.output.dir)
                .unwrap_or_else(|| PathBuf::from("out")),
            format: o.format.or(cfg.output.format).unwrap_or_default(),
            cells: o.cells.or(cfg.fv.cells).unwrap_or(2000),
            cfl: o.cfl.or(cfg.fv.cfl).unwrap_or(0.45),
            flux: o.flux.or(cfg.fv.flux).unwrap_or_default(),
            fv_domain: cfg.fv.domain.map(|[a, b]| (a, b)),
            refine: o.refine.or(cfg.fv.refine).unwrap_or(1),
            general: cfg.general,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(t) = self.times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(format!("output time {t} is not positive"));
        }
        if let Some(w) = self.times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(format!(
                "output times must be strictly increasing ({} then {})",
                w[0], w[1]
            ));
        }
        if self.samples < 2 {
            return Err("samples must be at least 2".into());
        }
        if self.cells == 0 {
            return Err("cells must be positive".into());
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(format!("cfl {} outside (0, 1)", self.cfl));
        }
        if self.refine == 0 || self.refine > 6 {
            return Err(format!("refine {} outside 1..=6", self.refine));
        }
        if let Some((a, b)) = self.fv_domain {
            if !(a < b) {
                return Err(format!("fv domain [{a}, {b}] is empty"));
            }
        }
        Ok(())
    }
}

/// Parses `0.01,0.0125` into times.
pub fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad time '{p}': {e}"))
        })
        .collect()
}
