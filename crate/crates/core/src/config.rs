//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! preset = shear            # pair and modes of a named preset
//! domain = 1 0 0 1          # lattice basis, column-major
//! target = 2 0 0 1
//! class = 1 0 0 1           # integer matrix in the lattice bases, column-major
//! mode = 1 0 0.05 0.02 0.0  # k1 k2 amp1 amp2 phase; repeatable
//! random_modes = 4 2 0.01   # count kmax amplitude, drawn from `seed`
//! resolution = 64           # or `n1 n2`
//! cfl_safety = 0.5
//! t_end = 2
//! stepper = rk2             # or euler
//! snapshot_stride = 100
//! diagnostics_stride = 10
//! flow_kind = paper         # or hmhf
//! q_tol = 1e-12
//! output = out
//! seed = 0
//! ```
//!
//! Explicit `domain`/`target`/`class` override the preset's pair; explicit
//! `mode` lines replace the preset's modes.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::MapField;
use crate::flow::{FlowConfig, FlowKind};
use crate::initial_maps::{build_map, random_modes, ModeSpec, Preset};
use crate::lattice::{Lattice, TorusPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModes {
    pub count: usize,
    pub kmax: i64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub domain: Option<Lattice>,
    pub target: Option<Lattice>,
    pub class: Option<[[i64; 2]; 2]>,
    pub modes: Vec<ModeSpec>,
    pub random_modes: Option<RandomModes>,
    pub n1: usize,
    pub n2: usize,
    pub flow: FlowConfig,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            domain: None,
            target: None,
            class: None,
            modes: Vec::new(),
            random_modes: None,
            n1: 64,
            n2: 64,
            flow: FlowConfig::default(),
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn numbers<T: FromStr>(line: usize, key: &str, value: &str, count: usize) -> Result<Vec<T>> {
    let parsed: Vec<T> = value
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| err(line, format!("`{key}`: cannot parse `{t}`"))))
        .collect::<Result<_>>()?;
    if parsed.len() != count {
        return Err(err(line, format!("`{key}` expects {count} values, got {}", parsed.len())));
    }
    Ok(parsed)
}

fn one<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    Ok(numbers::<T>(line, key, value, 1)?.remove(0))
}

fn with_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { msg, .. } => err(line, msg),
        other => err(line, other.to_string()),
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut modes_given = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "preset" => cfg.preset = Some(with_line(line, value.parse())?),
                "domain" | "target" => {
                    let v = numbers::<f64>(line, key, value, 4)?;
                    let lattice = with_line(line, Lattice::from_column_major([v[0], v[1], v[2], v[3]]))?;
                    if key == "domain" {
                        cfg.domain = Some(lattice);
                    } else {
                        cfg.target = Some(lattice);
                    }
                }
                "class" => {
                    let v = numbers::<i64>(line, key, value, 4)?;
                    cfg.class = Some([[v[0], v[2]], [v[1], v[3]]]);
                }
                "mode" => {
                    let v = value.split_whitespace().collect::<Vec<_>>();
                    if v.len() != 5 {
                        return Err(err(line, "`mode` expects k1 k2 amp1 amp2 phase"));
                    }
                    let k = numbers::<i64>(line, key, &v[..2].join(" "), 2)?;
                    let rest = numbers::<f64>(line, key, &v[2..].join(" "), 3)?;
                    cfg.modes.push(ModeSpec::new([k[0], k[1]], [rest[0], rest[1]], rest[2]));
                    modes_given = true;
                }
                "random_modes" => {
                    let v = value.split_whitespace().collect::<Vec<_>>();
                    if v.len() != 3 {
                        return Err(err(line, "`random_modes` expects count kmax amplitude"));
                    }
                    cfg.random_modes = Some(RandomModes {
                        count: one(line, key, v[0])?,
                        kmax: one(line, key, v[1])?,
                        amplitude: one(line, key, v[2])?,
                    });
                }
                "resolution" => {
                    let v = value.split_whitespace().count();
                    let n = match v {
                        1 => vec![one::<usize>(line, key, value)?; 2],
                        _ => numbers::<usize>(line, key, value, 2)?,
                    };
                    cfg.n1 = n[0];
                    cfg.n2 = n[1];
                }
                "cfl_safety" => cfg.flow.cfl_safety = one(line, key, value)?,
                "t_end" => cfg.flow.t_end = one(line, key, value)?,
                "stepper" => cfg.flow.stepper = with_line(line, value.parse())?,
                "snapshot_stride" => cfg.flow.snapshot_stride = one(line, key, value)?,
                "diagnostics_stride" => cfg.flow.diagnostics_stride = one(line, key, value)?,
                "flow_kind" => cfg.flow.flow_kind = with_line(line, value.parse::<FlowKind>())?,
                "q_tol" => cfg.flow.q_tol = one(line, key, value)?,
                "max_steps" => cfg.flow.max_steps = one(line, key, value)?,
                "output" => cfg.output = PathBuf::from(value),
                "seed" => cfg.seed = one(line, key, value)?,
                _ => return Err(err(line, format!("unknown key `{key}`"))),
            }
        }
        if !modes_given {
            cfg.modes.clear();
        }
        cfg.flow.validate()?;
        Ok(cfg)
    }

    pub fn from_preset(preset: Preset) -> Self {
        Self {
            preset: Some(preset),
            ..Default::default()
        }
    }

    pub fn pair(&self) -> Result<TorusPair> {
        let base = self.preset.map(|p| p.pair());
        let domain = self
            .domain
            .or(base.map(|b| *b.domain()))
            .unwrap_or_else(Lattice::unit);
        let target = self
            .target
            .or(base.map(|b| *b.target()))
            .unwrap_or_else(Lattice::unit);
        let class = self.class.or(base.map(|b| b.class())).unwrap_or([[1, 0], [0, 1]]);
        TorusPair::from_class(domain, target, class)
    }

    /// Explicit modes, or the preset's, followed by any seeded random modes.
    pub fn modes(&self) -> Vec<ModeSpec> {
        let mut modes = if self.modes.is_empty() {
            self.preset.map(|p| p.modes()).unwrap_or_default()
        } else {
            self.modes.clone()
        };
        if let Some(r) = self.random_modes {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            modes.extend(random_modes(&mut rng, r.count, r.kmax, r.amplitude));
        }
        modes
    }

    pub fn initial_map(&self) -> Result<MapField> {
        build_map(self.pair()?, &self.modes(), self.n1, self.n2)
    }
}
