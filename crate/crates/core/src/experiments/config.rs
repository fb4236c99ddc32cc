//! Study configuration: defaults per study, TOML overlay and validation.

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{PodError, Result};
use crate::fem1d::{build_mesh, Mesh1D, SpaceTag};
use crate::rom::IcKind;
use crate::snapshots::check_integer_rate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Cex1,
    Cex2,
    Custom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    #[serde(alias = "md")]
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = PodError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(PodError::Parse(format!(
                "unknown format '{other}' (expected csv or md)"
            ))),
        }
    }
}

/// Which study a configuration is for; selects the defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    Cex1Projection,
    Cex1Rom,
    Cex2,
    Props,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Cex1Projection => "cex1-proj",
            Study::Cex1Rom => "cex1-rom",
            Study::Cex2 => "cex2",
            Study::Props => "props",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub example: Example,
    pub k: u32,
    pub alpha: f64,
    pub delta: f64,
    pub nu: f64,
    /// Final time of the snapshot (basis) horizon.
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: f64,
    #[serde(deserialize_with = "de_dt_list")]
    pub dt_list: Vec<f64>,
    /// Empty means `r = N`.
    pub r_list: Vec<usize>,
    pub h: f64,
    pub space: SpaceTag,
    /// `None` runs both cases.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dq: Option<bool>,
    /// `None` picks L2 for noDQ and Ritz for DQ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ic_kind: Option<IcKind>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Time step of the per-step projection error tables; `None` skips them.
    #[serde(default, deserialize_with = "de_opt_dt", skip_serializing_if = "Option::is_none")]
    pub pointwise_dt: Option<f64>,
    /// Rank of the cex2 projection tables.
    pub proj_r: usize,
    /// Time step of the cex2 ROM tables.
    #[serde(deserialize_with = "de_dt")]
    pub rom_dt: f64,
    /// Horizon on which cex2 ROM errors are measured.
    pub rom_t_final: f64,
    pub sobolev_cases: usize,
    pub random_families: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrRatio {
    Num(f64),
    Text(String),
}

impl NumOrRatio {
    fn value(self) -> std::result::Result<f64, String> {
        match self {
            NumOrRatio::Num(x) => Ok(x),
            NumOrRatio::Text(s) => parse_real(&s).map_err(|e| e.to_string()),
        }
    }
}

fn de_dt<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    NumOrRatio::deserialize(d)?.value().map_err(serde::de::Error::custom)
}

fn de_opt_dt<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    de_dt(d).map(Some)
}

fn de_dt_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Vec::<NumOrRatio>::deserialize(d)?
        .into_iter()
        .map(|v| v.value().map_err(serde::de::Error::custom))
        .collect()
}

/// Parses `0.25`, `1/4` or `1e-2`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || PodError::Parse(format!("not a number: '{s}'"));
    let x = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if !x.is_finite() {
        return Err(bad());
    }
    Ok(x)
}

/// Comma separated list of [`parse_real`] values.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_real).collect()
}

/// Comma separated list of ranks; `a..b` is inclusive.
pub fn parse_rank_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let p = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| PodError::Parse(format!("not a rank: '{tok}'")))
        };
        match tok.split_once("..") {
            Some((a, b)) => out.extend(p(a)?..=p(b.trim_start_matches('='))?),
            None => out.push(p(tok)?),
        }
    }
    Ok(out)
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0)
}

fn steps(t: f64, dt: f64, what: &str) -> Result<usize> {
    let n = t / dt;
    if !is_integer(n) || n.round() < 1.0 {
        return Err(PodError::InvalidParameter(format!(
            "{what}: T/dt = {t}/{dt} = {n} is not a positive integer"
        )));
    }
    Ok(n.round() as usize)
}

impl StudyConfig {
    /// Defaults for `study`.
    pub fn defaults(study: Study) -> Self {
        let cex1 = Self {
            example: Example::Cex1,
            k: 128,
            alpha: 1.0,
            delta: 0.01,
            nu: 1.0,
            t_final: 1.0,
            dt_list: [4.0, 8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|n| 1.0 / n).collect(),
            r_list: Vec::new(),
            h: 1.0 / 4096.0,
            space: SpaceTag::L2,
            dq: None,
            ic_kind: None,
            seed: 0,
            output: None,
            format: Format::Csv,
            pointwise_dt: None,
            proj_r: 4,
            rom_dt: 0.01,
            rom_t_final: 0.05,
            sobolev_cases: 1000,
            random_families: 100,
        };
        match study {
            Study::Cex1Projection => Self {
                pointwise_dt: Some(1.0 / 16.0),
                ..cex1
            },
            Study::Cex1Rom => cex1,
            Study::Cex2 => Self {
                example: Example::Cex2,
                k: 100,
                t_final: 0.2,
                dt_list: vec![0.05, 0.04, 0.02, 0.01],
                r_list: (1..=6).collect(),
                ..cex1
            },
            Study::Props => Self {
                h: 1.0 / 256.0,
                dt_list: vec![0.25, 0.125, 0.0625, 0.03125],
                ..cex1
            },
        }
    }

    /// Overlays the keys of a TOML document on `base`.
    pub fn from_toml_str(text: &str, base: &StudyConfig) -> Result<Self> {
        let overlay: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| PodError::Parse(e.to_string()))?;
        let mut table = toml::Table::try_from(base).map_err(|e| PodError::Parse(e.to_string()))?;
        for (key, value) in overlay {
            table.insert(key, value);
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| PodError::Parse(e.to_string()))
    }

    pub fn from_toml_file(path: &std::path::Path, base: &StudyConfig) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?, base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        let n = 1.0 / self.h;
        if !(self.h > 0.0) || !is_integer(n) || n.round() < 2.0 {
            return Err(PodError::InvalidMesh(format!("1/h = {n} must be an integer >= 2")));
        }
        build_mesh(n.round() as usize)
    }

    /// Number of steps of `dt` on the basis horizon.
    pub fn n_steps(&self, dt: f64) -> Result<usize> {
        steps(self.t_final, dt, "dt_list")
    }

    /// Which DQ cases to run, noDQ first.
    pub fn cases(&self) -> Vec<bool> {
        match self.dq {
            Some(b) => vec![b],
            None => vec![false, true],
        }
    }

    pub fn ic_for(&self, dq: bool) -> IcKind {
        self.ic_kind.unwrap_or(if dq { IcKind::Ritz } else { IcKind::L2 })
    }

    /// Checks every invariant the studies rely on.
    pub fn validate(&self) -> Result<()> {
        self.mesh()?;
        for (name, v) in [
            ("nu", self.nu),
            ("T", self.t_final),
            ("alpha", self.alpha),
            ("delta", self.delta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PodError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.dt_list.is_empty() {
            return Err(PodError::InvalidParameter("dt_list is empty".into()));
        }
        if self.r_list.contains(&0) || self.proj_r == 0 {
            return Err(PodError::InvalidParameter("ranks must be positive".into()));
        }
        let counterexample = matches!(self.example, Example::Cex1 | Example::Cex2);
        if counterexample && self.k == 0 {
            return Err(PodError::InvalidParameter("k must be positive".into()));
        }
        let mut dts = self.dt_list.clone();
        dts.extend(self.pointwise_dt);
        if self.example == Example::Cex2 {
            dts.push(self.rom_dt);
            steps(self.rom_t_final, self.rom_dt, "rom_t_final")?;
            if self.rom_t_final > self.t_final * (1.0 + 1e-12) {
                return Err(PodError::InvalidParameter(format!(
                    "rom_t_final = {} exceeds the basis horizon T = {}",
                    self.rom_t_final, self.t_final
                )));
            }
        }
        for &dt in &dts {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(PodError::InvalidParameter(format!(
                    "time step must be positive, got {dt}"
                )));
            }
            if counterexample {
                check_integer_rate(self.k, dt)?;
            }
            steps(self.t_final, dt, "dt")?;
        }
        Ok(())
    }
}
