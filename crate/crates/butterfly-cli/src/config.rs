//! Run configuration: a TOML file plus command-line overrides, with the
//! command line winning wherever both speak.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use butterfly_core::analysis::{self, GenieCut};
use butterfly_core::netmodel::{Dest, Node, Relay, Source, TopologyVariant};
use butterfly_core::schemes::Scheme;

use crate::error::CliError;

/// Raw TOML shape; every field optional so partial files work.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scheme: Option<String>,
    pub topology: Option<String>,
    pub pdb: Option<String>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<String>,
    pub tol_residual: Option<f64>,
    pub tol_rank: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub frame_slots: Option<u64>,
    pub cut: Option<CutFile>,
}

/// Genie cut named by node tags, e.g. `left = ["S1", "R1", "S4"]`.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct CutFile {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub bridge: Vec<String>,
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug)]
pub struct Config {
    pub scheme: String,
    pub topology: Option<String>,
    pub pdb: String,
    pub p: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    pub out: PathBuf,
    pub tol_residual: f64,
    pub tol_rank: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub frame_slots: u64,
    pub cut: Option<GenieCut>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scheme: String::from("no_cache"),
            topology: None,
            pdb: String::from("40:100:10"),
            p: None,
            seed: 7,
            trials: 1,
            out: PathBuf::from("out"),
            tol_residual: 1e-9,
            tol_rank: 1e-9,
            h_min: 0.5,
            h_max: 2.0,
            frame_slots: 10_000,
            cut: None,
        }
    }
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_node(tag: &str) -> Result<Node, CliError> {
    for s in Source::ALL {
        if s.tag() == tag {
            return Ok(Node::Src(s));
        }
    }
    for r in Relay::ALL {
        if r.tag() == tag {
            return Ok(Node::Rel(r));
        }
    }
    for d in Dest::ALL {
        if d.tag() == tag {
            return Ok(Node::Dst(d));
        }
    }
    Err(CliError::Config(format!(
        "unknown node tag \"{tag}\" (expected S1..S4, R1..R3, or D1..D4)"
    )))
}

fn parse_relay(tag: &str) -> Result<Relay, CliError> {
    match parse_node(tag)? {
        Node::Rel(r) => Ok(r),
        _ => Err(CliError::Config(format!(
            "bridge entry \"{tag}\" is not a relay"
        ))),
    }
}

fn parse_cut(file: &CutFile) -> Result<GenieCut, CliError> {
    let side = |tags: &[String]| -> Result<Vec<Node>, CliError> {
        tags.iter().map(|t| parse_node(t)).collect()
    };
    Ok(GenieCut {
        left: side(&file.left)?,
        right: side(&file.right)?,
        bridge: file
            .bridge
            .iter()
            .map(|t| parse_relay(t))
            .collect::<Result<_, _>>()?,
    })
}

impl Config {
    /// Layer a parsed file over the defaults.
    pub fn from_file(file: ConfigFile) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        if let Some(v) = file.scheme {
            cfg.scheme = v;
        }
        cfg.topology = file.topology.or(cfg.topology);
        if let Some(v) = file.pdb {
            cfg.pdb = v;
        }
        cfg.p = file.p.or(cfg.p);
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.trials {
            cfg.trials = v;
        }
        if let Some(v) = file.out {
            cfg.out = PathBuf::from(v);
        }
        if let Some(v) = file.tol_residual {
            cfg.tol_residual = v;
        }
        if let Some(v) = file.tol_rank {
            cfg.tol_rank = v;
        }
        if let Some(v) = file.h_min {
            cfg.h_min = v;
        }
        if let Some(v) = file.h_max {
            cfg.h_max = v;
        }
        if let Some(v) = file.frame_slots {
            cfg.frame_slots = v;
        }
        if let Some(c) = &file.cut {
            cfg.cut = Some(parse_cut(c)?);
        }
        Ok(cfg)
    }

    /// The scheme this configuration names.
    pub fn scheme(&self) -> Result<Scheme, CliError> {
        match self.scheme.as_str() {
            "no_cache" => Ok(Scheme::NoCache),
            "cache" => Ok(Scheme::Cache),
            "cache_partial" => {
                let p = self.p.ok_or_else(|| {
                    CliError::Config(String::from(
                        "scheme cache_partial needs a caching fraction (--p or p = ...)",
                    ))
                })?;
                if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                    return Err(CliError::Config(format!(
                        "caching fraction {p} must lie in [0, 1]"
                    )));
                }
                Ok(Scheme::TimeShare(p))
            }
            "mimo" => Ok(Scheme::Mimo {
                use_side_relays: true,
            }),
            "mimo_no_side" => Ok(Scheme::Mimo {
                use_side_relays: false,
            }),
            other => Err(CliError::Config(format!(
                "unknown scheme \"{other}\" (expected no_cache, cache, cache_partial, mimo, or mimo_no_side)"
            ))),
        }
    }

    /// The topology to run on: explicit if named, otherwise the scheme's own.
    pub fn variant(&self) -> Result<TopologyVariant, CliError> {
        let derived = analysis::scheme_topology(self.scheme()?).variant;
        match self.topology.as_deref() {
            None => Ok(derived),
            Some("single") => Ok(TopologyVariant::SingleAntennaRelay),
            Some("mimo") => Ok(TopologyVariant::MultiAntennaRelay(3)),
            Some("mimo_no_side") => Ok(TopologyVariant::MultiAntennaRelayOnly(3)),
            Some(other) => Err(CliError::Config(format!(
                "unknown topology \"{other}\" (expected single, mimo, or mimo_no_side)"
            ))),
        }
        .and_then(|named| {
            if self.topology.is_some() && named != derived {
                return Err(CliError::Config(format!(
                    "topology \"{}\" does not match scheme \"{}\"",
                    self.topology.as_deref().unwrap_or(""),
                    self.scheme
                )));
            }
            Ok(named)
        })
    }

    /// Parse the dB grid `start:stop:step` into linear powers.
    pub fn powers(&self) -> Result<Vec<f64>, CliError> {
        let parts: Vec<&str> = self.pdb.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!(
                "power grid \"{}\" must look like start:stop:step (dB)",
                self.pdb
            )));
        }
        let mut vals = [0.0f64; 3];
        for (i, part) in parts.iter().enumerate() {
            vals[i] = part.trim().parse().map_err(|_| {
                CliError::Config(format!("\"{part}\" in power grid is not a number"))
            })?;
        }
        let [start, stop, step] = vals;
        if step <= 0.0 || stop < start {
            return Err(CliError::Config(format!(
                "power grid \"{}\" must increase with a positive step",
                self.pdb
            )));
        }
        let mut powers = Vec::new();
        let mut db = start;
        while db <= stop + 1e-9 {
            powers.push(f64::powf(10.0, db / 10.0));
            db += step;
        }
        Ok(powers)
    }

    /// Sanity checks shared by all subcommands.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = self.p {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(CliError::Config(format!(
                    "caching fraction {p} must lie in [0, 1]"
                )));
            }
        }
        for (name, tol) in [
            ("tol_residual", self.tol_residual),
            ("tol_rank", self.tol_rank),
        ] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Config(format!(
                    "{name} = {tol} must be positive"
                )));
            }
        }
        if !(self.h_min.is_finite() && self.h_max.is_finite() && 0.0 < self.h_min && self.h_min < self.h_max)
        {
            return Err(CliError::Config(format!(
                "magnitude bounds ({}, {}) must satisfy 0 < h_min < h_max",
                self.h_min, self.h_max
            )));
        }
        if self.frame_slots == 0 {
            return Err(CliError::Config(String::from(
                "frame_slots must be at least 1",
            )));
        }
        if self.trials == 0 {
            return Err(CliError::Config(String::from("trials must be at least 1")));
        }
        self.variant()?;
        Ok(())
    }

    /// Extra check for slope runs: the grid must span enough of the
    /// high-power regime for the least-squares fit to be meaningful.
    pub fn validate_for_slope(&self) -> Result<(), CliError> {
        let powers = self.powers()?;
        let usable: Vec<f64> = powers
            .iter()
            .copied()
            .filter(|p| *p >= analysis::FIT_MIN_POWER)
            .collect();
        if usable.len() < 3 {
            return Err(CliError::Config(format!(
                "power grid \"{}\" leaves fewer than 3 points at or above {:.0} dB",
                self.pdb,
                10.0 * analysis::FIT_MIN_POWER.log10()
            )));
        }
        let span_db = 10.0 * (usable[usable.len() - 1] / usable[0]).log10();
        if span_db + 1e-9 < analysis::FIT_MIN_SPAN_DB {
            return Err(CliError::Config(format!(
                "power grid \"{}\" spans {span_db:.1} dB above the fit floor; slope runs need at least {} dB",
                self.pdb,
                analysis::FIT_MIN_SPAN_DB
            )));
        }
        Ok(())
    }
}

/// Command-line overrides; `None` means the flag was not given.
#[derive(Default, Debug)]
pub struct Overrides {
    pub scheme: Option<String>,
    pub topology: Option<String>,
    pub pdb: Option<String>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<String>,
    pub tol_residual: Option<f64>,
    pub tol_rank: Option<f64>,
}

/// Resolve a run configuration: defaults, then the file, then the flags.
pub fn resolve(config_path: Option<&Path>, over: Overrides) -> Result<Config, CliError> {
    let mut cfg = match config_path {
        Some(path) => Config::from_file(load_config_file(path)?)?,
        None => Config::default(),
    };
    if let Some(v) = over.scheme {
        cfg.scheme = v;
    }
    if let Some(v) = over.topology {
        cfg.topology = Some(v);
    }
    if let Some(v) = over.pdb {
        cfg.pdb = v;
    }
    if let Some(v) = over.p {
        cfg.p = Some(v);
    }
    if let Some(v) = over.seed {
        cfg.seed = v;
    }
    if let Some(v) = over.trials {
        cfg.trials = v;
    }
    if let Some(v) = over.out {
        cfg.out = PathBuf::from(v);
    }
    if let Some(v) = over.tol_residual {
        cfg.tol_residual = v;
    }
    if let Some(v) = over.tol_rank {
        cfg.tol_rank = v;
    }
    cfg.validate()?;
    Ok(cfg)
}
