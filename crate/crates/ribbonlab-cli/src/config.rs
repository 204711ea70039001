//! Run configuration: JSON document, flag overlay, and validation.
//!
//! A run is described by one JSON object with optional keys; command-line
//! flags override file values, and anything still missing falls back to the
//! documented defaults.  Unknown keys are rejected.  Validation happens in
//! [`RunConfig::resolve`], which produces the concrete inputs the commands
//! consume plus a fully-populated echo of the configuration that re-parses
//! to an equivalent run.

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use ribbonlab::material::{MaterialParams, Texture};
use ribbonlab::plate::PlateDomain;
use ribbonlab::relaxation::{Quadratic2, DEFAULT_PROFILE_ORDER};

use crate::CliError;

/// Default thickness list for scaling sweeps.
pub const DEFAULT_H_LIST: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

/// Default trajectory sample count for shape export.
pub const DEFAULT_SAMPLES: usize = 1001;

/// Default grid resolution per axis for rod tabulation.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// An angle given either as radians or as a string with a `deg:` prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Tagged(String),
}

impl AngleSpec {
    /// Parses a command-line angle argument (`0.785` or `deg:45`).
    pub fn from_cli(text: &str) -> Result<Self, CliError> {
        if let Ok(value) = text.parse::<f64>() {
            return Ok(AngleSpec::Radians(value));
        }
        if text.starts_with("deg:") {
            return Ok(AngleSpec::Tagged(text.to_string()));
        }
        Err(CliError::Config(format!(
            "angle `{text}` is neither a number (radians) nor a `deg:` value"
        )))
    }

    /// The angle in radians.
    pub fn to_radians(&self) -> Result<f64, CliError> {
        match self {
            AngleSpec::Radians(value) => Ok(*value),
            AngleSpec::Tagged(text) => match text.strip_prefix("deg:") {
                Some(rest) => rest
                    .trim()
                    .parse::<f64>()
                    .map(f64::to_radians)
                    .map_err(|_| {
                        CliError::Config(format!("cannot parse degrees in angle `{text}`"))
                    }),
                None => Err(CliError::Config(format!(
                    "string angles must use the `deg:` prefix, got `{text}`"
                ))),
            },
        }
    }
}

/// One axis of a tabulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridAxis {
    /// Grid coordinate `i` of `n` (endpoints included).
    pub fn point(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
    }

    fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!(
                "grid axis `{text}` must have the form MIN:MAX:N"
            )));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid minimum `{}`", parts[0])))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid maximum `{}`", parts[1])))?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Config(format!("bad grid count `{}`", parts[2])))?;
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(CliError::Config(format!(
                "grid axis `{text}` needs finite MIN < MAX"
            )));
        }
        if n < 2 {
            return Err(CliError::Config(format!(
                "grid axis `{text}` needs at least 2 points"
            )));
        }
        Ok(GridAxis { min, max, n })
    }

    fn canonical(&self) -> String {
        format!("{}:{}:{}", self.min, self.max, self.n)
    }
}

/// Parses `MIN:MAX:N` or `MIN:MAX:N,MIN:MAX:N`; a single axis applies to
/// both coordinates.
pub fn parse_grid(text: &str) -> Result<(GridAxis, GridAxis), CliError> {
    let axes: Vec<&str> = text.split(',').collect();
    match axes.as_slice() {
        [one] => {
            let axis = GridAxis::parse(one)?;
            Ok((axis, axis))
        }
        [first, second] => Ok((GridAxis::parse(first)?, GridAxis::parse(second)?)),
        _ => Err(CliError::Config(format!(
            "grid spec `{text}` must have one or two axes"
        ))),
    }
}

/// Parses a comma-separated thickness list.
pub fn parse_h_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad thickness `{part}` in h list")))
        })
        .collect()
}

/// The JSON run configuration.  All keys are optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Shear modulus `mu > 0`.
    pub mu: Option<f64>,
    /// Volumetric coupling ratio `gamma ∈ (0, 1)`; mutually exclusive with
    /// `wvol2`.
    pub gamma: Option<f64>,
    /// Second derivative of the volumetric term at 1; `gamma` is then
    /// `wvol2 / (2 mu + wvol2)`.
    pub wvol2: Option<f64>,
    /// Activation slope `alpha0`.
    pub alpha0: Option<f64>,
    /// Reference thickness scale `h0 > 0`.
    pub h0: Option<f64>,
    /// Texture name: `twist`, `splaybend`, `director`, or `bilayer`.
    pub texture: Option<String>,
    /// Director axis for the `director` texture.
    pub director: Option<[f64; 3]>,
    /// Upper-layer spontaneous curvature, packed `xx,yy,zz,xy,xz,yz`.
    pub bilayer_m1: Option<[f64; 6]>,
    /// Lower-layer spontaneous curvature, packed `xx,yy,zz,xy,xz,yz`.
    pub bilayer_m2: Option<[f64; 6]>,
    /// Strip cut angle (radians, or `deg:` string).
    pub theta: Option<AngleSpec>,
    /// Strip length.
    pub length: Option<f64>,
    /// Strip width (must be smaller than the length).
    pub width: Option<f64>,
    /// Thickness-profile quadrature order.
    pub quad: Option<usize>,
    /// Trajectory sample count for shape export.
    pub samples: Option<usize>,
    /// Rod tabulation grid, `MIN:MAX:N` or `MIN:MAX:N,MIN:MAX:N`.
    pub grid: Option<String>,
    /// Thickness list for scaling sweeps (strictly decreasing).
    pub h_list: Option<Vec<f64>>,
    /// Position inside the rod minimum set (0 = left end, 1 = right end).
    pub from_min_set: Option<f64>,
    /// Explicit flexure rate for shape export.
    pub flexure: Option<f64>,
    /// Explicit torsion rate for shape export.
    pub torsion: Option<f64>,
    /// Output path (report file, CSV file, or shape file stem).
    pub out: Option<String>,
}

/// Flag values that override the configuration file.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub texture: Option<String>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha0: Option<f64>,
    pub h0: Option<f64>,
    pub theta: Option<String>,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub h: Option<String>,
    pub from_min_set: Option<f64>,
    pub quad: Option<usize>,
    pub flexure: Option<f64>,
    pub torsion: Option<f64>,
}

/// Texture choice with its config-facing name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureChoice {
    Twist,
    SplayBend,
    Director,
    Bilayer,
}

impl TextureChoice {
    fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "twist" => Ok(TextureChoice::Twist),
            "splaybend" => Ok(TextureChoice::SplayBend),
            "director" => Ok(TextureChoice::Director),
            "bilayer" => Ok(TextureChoice::Bilayer),
            other => Err(CliError::Config(format!(
                "unknown texture `{other}` (expected twist|splaybend|director|bilayer)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TextureChoice::Twist => "twist",
            TextureChoice::SplayBend => "splaybend",
            TextureChoice::Director => "director",
            TextureChoice::Bilayer => "bilayer",
        }
    }
}

/// Fully validated inputs for one command.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: MaterialParams,
    pub form: Quadratic2,
    pub texture: Texture,
    pub theta: f64,
    pub domain: PlateDomain,
    pub quad: usize,
    pub samples: usize,
    pub grid: Option<(GridAxis, GridAxis)>,
    pub h_list: Vec<f64>,
    pub from_min_set: Option<f64>,
    pub flexure: Option<f64>,
    pub torsion: Option<f64>,
    pub out: Option<PathBuf>,
    /// Fully-populated configuration echo; re-parsing it reproduces this
    /// resolution.
    pub echo: RunConfig,
}

fn sym_from_pack(pack: &[f64; 6]) -> Matrix3<f64> {
    let [xx, yy, zz, xy, xz, yz] = *pack;
    Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
}

fn require_finite(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {value}")))
    }
}

impl RunConfig {
    /// Parses a JSON configuration document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("configuration does not parse: {e}")))
    }

    /// Applies command-line flag overrides on top of the file values.
    pub fn overlay(mut self, flags: &FlagOverrides) -> Result<Self, CliError> {
        if let Some(texture) = &flags.texture {
            self.texture = Some(texture.clone());
        }
        if let Some(mu) = flags.mu {
            self.mu = Some(mu);
        }
        if let Some(gamma) = flags.gamma {
            // The flag names gamma directly, so it supersedes a file-level
            // wvol2 instead of colliding with it.
            self.gamma = Some(gamma);
            self.wvol2 = None;
        }
        if let Some(alpha0) = flags.alpha0 {
            self.alpha0 = Some(alpha0);
        }
        if let Some(h0) = flags.h0 {
            self.h0 = Some(h0);
        }
        if let Some(theta) = &flags.theta {
            self.theta = Some(AngleSpec::from_cli(theta)?);
        }
        if let Some(length) = flags.length {
            self.length = Some(length);
        }
        if let Some(width) = flags.width {
            self.width = Some(width);
        }
        if let Some(out) = &flags.out {
            self.out = Some(out.display().to_string());
        }
        if let Some(grid) = &flags.grid {
            self.grid = Some(grid.clone());
        }
        if let Some(h) = &flags.h {
            self.h_list = Some(parse_h_list(h)?);
        }
        if let Some(t) = flags.from_min_set {
            self.from_min_set = Some(t);
        }
        if let Some(quad) = flags.quad {
            self.quad = Some(quad);
        }
        if let Some(flexure) = flags.flexure {
            self.flexure = Some(flexure);
        }
        if let Some(torsion) = flags.torsion {
            self.torsion = Some(torsion);
        }
        Ok(self)
    }

    /// Validates everything and fills in defaults.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mu = require_finite("mu", self.mu.unwrap_or(1.0))?;
        let gamma = match (self.gamma, self.wvol2) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "specify either gamma or wvol2, not both".into(),
                ))
            }
            (Some(gamma), None) => require_finite("gamma", gamma)?,
            (None, Some(wvol2)) => {
                let wvol2 = require_finite("wvol2", wvol2)?;
                if wvol2 <= 0.0 {
                    return Err(CliError::Config(format!(
                        "wvol2 must be positive, got {wvol2}"
                    )));
                }
                wvol2 / (2.0 * mu + wvol2)
            }
            (None, None) => 0.3,
        };
        let alpha0 = require_finite("alpha0", self.alpha0.unwrap_or(1.0))?;
        let h0 = require_finite("h0", self.h0.unwrap_or(1.0))?;
        let params = MaterialParams::new(mu, gamma, alpha0, h0)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let form = Quadratic2::from_material(&params);

        let texture_choice =
            TextureChoice::parse(self.texture.as_deref().unwrap_or("twist"))?;
        let mut echo_director = None;
        let mut echo_m1 = None;
        let mut echo_m2 = None;
        let texture = match texture_choice {
            TextureChoice::Twist => Texture::Twist,
            TextureChoice::SplayBend => Texture::SplayBend,
            TextureChoice::Director => {
                let axis = self.director.unwrap_or([0.0, 0.0, 1.0]);
                echo_director = Some(axis);
                Texture::constant_director(Vector3::new(axis[0], axis[1], axis[2]))
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
            TextureChoice::Bilayer => {
                let m1 = self.bilayer_m1.ok_or_else(|| {
                    CliError::Config("bilayer texture needs bilayer_m1".into())
                })?;
                let m2 = self.bilayer_m2.unwrap_or([0.0; 6]);
                echo_m1 = Some(m1);
                echo_m2 = Some(m2);
                Texture::bilayer(sym_from_pack(&m1), sym_from_pack(&m2))
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
        };

        let theta = match &self.theta {
            Some(spec) => spec.to_radians()?,
            None => 0.0,
        };
        if !theta.is_finite() || !(0.0..PI).contains(&theta) {
            return Err(CliError::Config(format!(
                "theta must lie in [0, pi), got {theta}"
            )));
        }

        let length = require_finite("length", self.length.unwrap_or(2.0))?;
        let width = require_finite("width", self.width.unwrap_or(0.5))?;
        let domain = PlateDomain::new(length, width, 0.0)
            .map_err(|e| CliError::Config(e.to_string()))?;

        let quad = self.quad.unwrap_or(DEFAULT_PROFILE_ORDER);
        if quad < 2 {
            return Err(CliError::Config(format!(
                "quadrature order must be at least 2, got {quad}"
            )));
        }
        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 3 {
            return Err(CliError::Config(format!(
                "shape export needs at least 3 samples, got {samples}"
            )));
        }

        let grid = match &self.grid {
            Some(text) => Some(parse_grid(text)?),
            None => None,
        };

        let h_list = self
            .h_list
            .clone()
            .unwrap_or_else(|| DEFAULT_H_LIST.to_vec());
        if h_list.is_empty() || h_list.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(CliError::Config(
                "h list must be non-empty with positive entries".into(),
            ));
        }
        if h_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(CliError::Config(
                "h list must be strictly decreasing".into(),
            ));
        }

        if let Some(t) = self.from_min_set {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Config(format!(
                    "from_min_set must lie in [0, 1], got {t}"
                )));
            }
        }
        if let Some(f) = self.flexure {
            require_finite("flexure", f)?;
        }
        if let Some(t) = self.torsion {
            require_finite("torsion", t)?;
        }

        let echo = RunConfig {
            mu: Some(mu),
            gamma: Some(gamma),
            wvol2: None,
            alpha0: Some(alpha0),
            h0: Some(h0),
            texture: Some(texture_choice.name().to_string()),
            director: echo_director,
            bilayer_m1: echo_m1,
            bilayer_m2: echo_m2,
            theta: Some(AngleSpec::Radians(theta)),
            length: Some(length),
            width: Some(width),
            quad: Some(quad),
            samples: Some(samples),
            grid: grid.map(|(a, b)| format!("{},{}", a.canonical(), b.canonical())),
            h_list: Some(h_list.clone()),
            from_min_set: self.from_min_set,
            flexure: self.flexure,
            torsion: self.torsion,
            out: self.out.clone(),
        };

        Ok(Resolved {
            params,
            form,
            texture,

            theta,
            domain,
            quad,
            samples,
            grid,
            h_list,
            from_min_set: self.from_min_set,
            flexure: self.flexure,
            torsion: self.torsion,
            out: self.out.clone().map(PathBuf::from),
            echo,
        })
    }
}
