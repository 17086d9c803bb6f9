//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::remainders::IdentityKind;

/// Every key a configuration file may contain.
pub const ACCEPTED_KEYS: &[&str] = &[
    "experiment",
    "model",
    "kind",
    "c",
    "rho0",
    "nu",
    "gamma",
    "eps",
    "grid.points",
    "grid.transverse_points",
    "grid.extent",
    "grid.transverse_extent",
    "grid.depth",
    "grid.depth_points",
    "sponge.fraction",
    "dt",
    "dz",
    "T",
    "T_mode",
    "C",
    "delta",
    "delta_over_eps",
    "amplitude",
    "out_dir",
    "eps_list",
    "tol",
    "seed",
    "workers",
    "richardson",
    "z_probe",
    "levels",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentId {
    E1Npe,
    E2Westervelt,
    E3KzkIbvp,
    E4KzkPeriodic,
    Identity,
    Dispersion,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::E1Npe,
        ExperimentId::E2Westervelt,
        ExperimentId::E3KzkIbvp,
        ExperimentId::E4KzkPeriodic,
        ExperimentId::Identity,
        ExperimentId::Dispersion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::E1Npe => "E1_npe",
            ExperimentId::E2Westervelt => "E2_westervelt",
            ExperimentId::E3KzkIbvp => "E3_kzk_ibvp",
            ExperimentId::E4KzkPeriodic => "E4_kzk_periodic",
            ExperimentId::Identity => "identity",
            ExperimentId::Dispersion => "dispersion",
        }
    }

    /// Accepts the full names and the short forms `E1`..`E4`, case-insensitively.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        ExperimentId::ALL.into_iter().find(|id| {
            let name = id.name();
            name.eq_ignore_ascii_case(s)
                || (name.starts_with('E') && name[..2].eq_ignore_ascii_case(s))
        })
    }

    /// E1 to E4: runs that produce an error series.
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            ExperimentId::E1Npe
                | ExperimentId::E2Westervelt
                | ExperimentId::E3KzkIbvp
                | ExperimentId::E4KzkPeriodic
        )
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Model integrated by `simulate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Kuznetsov,
    Westervelt,
    Kzk,
    Npe,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Kuznetsov,
        ModelKind::Westervelt,
        ModelKind::Kzk,
        ModelKind::Npe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Kuznetsov => "kuznetsov",
            ModelKind::Westervelt => "westervelt",
            ModelKind::Kzk => "kzk",
            ModelKind::Npe => "npe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
    }
}

/// Length of a comparison run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Fixed(f64),
    /// `T = C / eps`.
    InverseEps(f64),
}

impl Horizon {
    pub fn at(self, eps: f64) -> Result<f64> {
        match self {
            Horizon::Fixed(t) => Ok(t),
            Horizon::InverseEps(_) if eps <= 0.0 => {
                Err(Error::Config("T_mode = inverse_eps needs eps > 0".into()))
            }
            Horizon::InverseEps(c) => Ok(c / eps),
        }
    }
}

/// Size of the initial-data mismatch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mismatch {
    Fixed(f64),
    /// `delta = ratio * eps`.
    OverEps(f64),
}

impl Mismatch {
    pub fn at(self, eps: f64) -> f64 {
        match self {
            Mismatch::Fixed(d) => d,
            Mismatch::OverEps(r) => r * eps,
        }
    }
}

/// Grid overrides; `None` leaves the experiment's default.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GridSettings {
    /// Points along the periodic coordinate (`x1`, `z` or `tau`).
    pub points: Option<usize>,
    pub transverse_points: Option<usize>,
    /// Period of the periodic coordinate.
    pub extent: Option<f64>,
    pub transverse_extent: Option<f64>,
    /// Half-space depth and its point count (E3, E4).
    pub depth: Option<f64>,
    pub depth_points: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub model: Option<ModelKind>,
    pub kind: Option<IdentityKind>,
    pub params: ModelParams,
    pub grid: GridSettings,
    pub sponge_fraction: Option<f64>,
    pub dt: Option<f64>,
    /// March step of the paraxial model.
    pub dz: Option<f64>,
    pub horizon: Horizon,
    pub delta: Mismatch,
    pub amplitude: Option<f64>,
    pub eps_list: Vec<f64>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    /// Combine runs at `dt` and `dt/2` to cancel the second-order time error.
    pub richardson: Option<bool>,
    pub z_probe: Option<f64>,
    pub levels: usize,
    /// The `key = value` pairs as given, for the manifest.
    pub echo: Vec<(String, String)>,
}

fn default_params() -> ModelParams {
    ModelParams {
        c: 1.0,
        rho0: 1.0,
        nu: 0.1,
        gamma: 1.4,
        eps: 0.02,
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            experiment,
            model: None,
            kind: None,
            params: default_params(),
            grid: GridSettings::default(),
            sponge_fraction: None,
            dt: None,
            dz: None,
            horizon: Horizon::Fixed(10.0),
            delta: Mismatch::Fixed(0.0),
            amplitude: None,
            eps_list: Vec::new(),
            out_dir: None,
            tol: None,
            seed: 0,
            workers: 1,
            richardson: None,
            z_probe: None,
            levels: 3,
            echo: Vec::new(),
        }
    }

    /// Parses a configuration text. `experiment` fills in when the text has no
    /// `experiment` key (the CLI subcommand names it); a key in the text wins otherwise.
    pub fn parse(text: &str, experiment: Option<ExperimentId>) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let id = match pairs.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => ExperimentId::parse(v).ok_or_else(|| {
                Error::Config(format!(
                    "unknown experiment {v:?}; expected one of {}",
                    ExperimentId::ALL.map(ExperimentId::name).join(", ")
                ))
            })?,
            None => experiment.ok_or_else(|| Error::Config("no experiment given".into()))?,
        };
        let mut cfg = ExperimentConfig::new(id);
        let mut t_mode: Option<String> = None;
        let (mut t, mut c_const) = (None, None);
        for (key, value) in &pairs {
            let v = value.as_str();
            match key.as_str() {
                "experiment" => {}
                "model" => {
                    cfg.model = Some(ModelKind::parse(v).ok_or_else(|| {
                        Error::Config(format!(
                            "unknown model {v:?}; expected one of {}",
                            ModelKind::ALL.map(ModelKind::name).join(", ")
                        ))
                    })?)
                }
                "kind" => {
                    cfg.kind = Some(
                        IdentityKind::parse(v)
                            .ok_or_else(|| Error::Config(format!("unknown identity kind {v:?}")))?,
                    )
                }
                "c" => cfg.params.c = number(key, v)?,
                "rho0" => cfg.params.rho0 = number(key, v)?,
                "nu" => cfg.params.nu = number(key, v)?,
                "gamma" => cfg.params.gamma = number(key, v)?,
                "eps" => cfg.params.eps = number(key, v)?,
                "grid.points" => cfg.grid.points = Some(count(key, v)?),
                "grid.transverse_points" => cfg.grid.transverse_points = Some(count(key, v)?),
                "grid.extent" => cfg.grid.extent = Some(positive(key, v)?),
                "grid.transverse_extent" => cfg.grid.transverse_extent = Some(positive(key, v)?),
                "grid.depth" => cfg.grid.depth = Some(positive(key, v)?),
                "grid.depth_points" => cfg.grid.depth_points = Some(count(key, v)?),
                "sponge.fraction" => cfg.sponge_fraction = Some(number(key, v)?),
                "dt" => cfg.dt = Some(positive(key, v)?),
                "dz" => cfg.dz = Some(positive(key, v)?),
                "T" => t = Some(positive(key, v)?),
                "T_mode" => t_mode = Some(v.to_string()),
                "C" => c_const = Some(positive(key, v)?),
                "delta" => cfg.delta = Mismatch::Fixed(non_negative(key, v)?),
                "delta_over_eps" => cfg.delta = Mismatch::OverEps(non_negative(key, v)?),
                "amplitude" => cfg.amplitude = Some(positive(key, v)?),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(v)),
                "eps_list" => {
                    cfg.eps_list = v
                        .split(',')
                        .map(|s| number(key, s.trim()))
                        .collect::<Result<_>>()?
                }
                "tol" => cfg.tol = Some(positive(key, v)?),
                "seed" => {
                    cfg.seed = v
                        .parse()
                        .map_err(|_| bad_value(key, v, "an unsigned integer"))?
                }
                "workers" => cfg.workers = count(key, v)?,
                "richardson" => cfg.richardson = Some(boolean(key, v)?),
                "z_probe" => cfg.z_probe = Some(positive(key, v)?),
                "levels" => cfg.levels = count(key, v)?,
                other => return Err(unknown_key(other)),
            }
        }
        if pairs.iter().any(|(k, _)| k == "delta")
            && pairs.iter().any(|(k, _)| k == "delta_over_eps")
        {
            return Err(Error::Config(
                "give either delta or delta_over_eps, not both".into(),
            ));
        }
        cfg.horizon = match t_mode.as_deref().unwrap_or("fixed") {
            "fixed" => Horizon::Fixed(t.unwrap_or(10.0)),
            "inverse_eps" => Horizon::InverseEps(c_const.ok_or_else(|| {
                Error::Config("T_mode = inverse_eps needs the constant C".into())
            })?),
            other => {
                return Err(Error::Config(format!(
                    "T_mode must be fixed or inverse_eps, got {other:?}"
                )))
            }
        };
        cfg.echo = pairs;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, experiment: Option<ExperimentId>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text, experiment)
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.horizon {
            Horizon::Fixed(t) | Horizon::InverseEps(t) if !(t.is_finite() && t > 0.0) => {
                return Err(Error::Config(format!("horizons must be positive, got {t}")));
            }
            _ => {}
        }
        if !self.eps_list.is_empty() {
            check_eps_list(&self.eps_list)?;
            for &e in &self.eps_list {
                self.params
                    .with_eps(e)
                    .map_err(|err| Error::Config(format!("eps_list entry {e}: {err}")))?;
            }
        }
        if let Some(f) = self.sponge_fraction {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::Config(format!(
                    "sponge.fraction must lie in [0, 1), got {f}"
                )));
            }
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Copy with `eps` replaced, as run by one sweep point.
    pub fn at_eps(&self, eps: f64) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.params = self.params.with_eps(eps)?;
        Ok(cfg)
    }

    pub fn delta_at(&self, eps: f64) -> f64 {
        self.delta.at(eps)
    }

    /// Output root: `out_dir`, else `$NLAC_OUT_DIR`, else `./nlac_out`.
    pub fn output_root(&self) -> PathBuf {
        if let Some(d) = &self.out_dir {
            return d.clone();
        }
        match std::env::var_os("NLAC_OUT_DIR") {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from("nlac_out"),
        }
    }
}

/// Sweep lists must be strictly decreasing with at least three entries.
pub fn check_eps_list(list: &[f64]) -> Result<()> {
    if list.len() < 3 {
        return Err(Error::Config(format!(
            "eps_list needs at least 3 entries for a slope fit, got {}",
            list.len()
        )));
    }
    if list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config(format!(
            "eps_list must be strictly decreasing, got {list:?}"
        )));
    }
    Ok(())
}

fn unknown_key(key: &str) -> Error {
    Error::Config(format!(
        "unknown key {key:?}; accepted keys: {}",
        ACCEPTED_KEYS.join(", ")
    ))
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected key = value, got {raw:?}",
                no + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !ACCEPTED_KEYS.contains(&key) {
            return Err(unknown_key(key));
        }
        if value.is_empty() {
            return Err(Error::Config(format!(
                "line {}: {key} has no value",
                no + 1
            )));
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(Error::Config(format!("line {}: {key} given twice", no + 1)));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

fn bad_value(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key} = {value:?}: expected {expected}"))
}

fn number(key: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(bad_value(key, v, "a finite number")),
    }
}

fn positive(key: &str, v: &str) -> Result<f64> {
    match number(key, v)? {
        x if x > 0.0 => Ok(x),
        _ => Err(bad_value(key, v, "a positive number")),
    }
}

fn non_negative(key: &str, v: &str) -> Result<f64> {
    match number(key, v)? {
        x if x >= 0.0 => Ok(x),
        _ => Err(bad_value(key, v, "a non-negative number")),
    }
}

fn count(key: &str, v: &str) -> Result<usize> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(bad_value(key, v, "a positive integer")),
    }
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(bad_value(key, v, "true or false")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let text = "experiment = E3\n# comment\nc = 1.5\neps = 0.01 # inline\ngrid.points = 64\n\
                    T_mode = inverse_eps\nC = 0.5\ndelta_over_eps = 0.5\neps_list = 0.04, 0.02, 0.01\n\
                    richardson = false\nseed = 7\n";
        let cfg = ExperimentConfig::parse(text, None).unwrap();
        assert_eq!(cfg.experiment, ExperimentId::E3KzkIbvp);
        assert_eq!(cfg.params.c, 1.5);
        assert_eq!(cfg.grid.points, Some(64));
        assert_eq!(cfg.horizon, Horizon::InverseEps(0.5));
        assert_eq!(cfg.horizon.at(0.01).unwrap(), 50.0);
        assert_eq!(cfg.delta_at(0.02), 0.01);
        assert_eq!(cfg.eps_list, vec![0.04, 0.02, 0.01]);
        assert_eq!(cfg.richardson, Some(false));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.echo.len(), 10);
    }

    #[test]
    fn unknown_key_lists_the_accepted_ones() {
        let err = ExperimentConfig::parse("speed = 3\n", Some(ExperimentId::E1Npe)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("speed"));
        for k in ACCEPTED_KEYS {
            assert!(msg.contains(k), "{k} missing from {msg}");
        }
    }

    #[test]
    fn rejects_bad_lists_and_values() {
        let id = Some(ExperimentId::E2Westervelt);
        for text in [
            "eps_list = 0.01, 0.02, 0.04",
            "eps_list = 0.04, 0.02",
            "T = -1",
            "T = 0",
            "eps = 0.6",
            "eps = 0,02",
            "grid.points = many",
            "c = 1\nc = 2",
            "delta = 0.1\ndelta_over_eps = 0.5",
            "T_mode = inverse_eps",
            "T_mode = sometimes",
            "c",
        ] {
            let err = ExperimentConfig::parse(text, id).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        }
    }

    #[test]
    fn experiment_names_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(ExperimentId::parse(id.name()), Some(id));
        }
        assert_eq!(ExperimentId::parse("e2"), Some(ExperimentId::E2Westervelt));
        assert_eq!(ExperimentId::parse("E5"), None);
        assert!(ExperimentConfig::parse("", None).is_err());
    }
}
