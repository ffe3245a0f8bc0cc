use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{
    Estimator, MaxEstimator, ParetoQuantizedEstimator, ProtocolOptions, ScalarRunsEstimator,
    ThresholdEstimator, XVecEstimator,
};
use crate::linalg::CorrelationMatrix;
use crate::protocol::{LedgerMode, WaitCap};
use crate::sources::{JointModel, MarginalLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Max,
    Threshold,
    YVec,
    Naive,
    XVec,
    Clt,
    Additive,
    Pareto,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::Max,
        Scheme::Threshold,
        Scheme::YVec,
        Scheme::Naive,
        Scheme::XVec,
        Scheme::Clt,
        Scheme::Additive,
        Scheme::Pareto,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Max => "max",
            Scheme::Threshold => "threshold",
            Scheme::YVec => "yvec",
            Scheme::Naive => "naive",
            Scheme::XVec => "xvec",
            Scheme::Clt => "clt",
            Scheme::Additive => "additive",
            Scheme::Pareto => "pareto",
        }
    }

    fn default_model(&self) -> ModelKind {
        match self {
            Scheme::Max | Scheme::Threshold => ModelKind::Gaussian,
            Scheme::YVec => ModelKind::YVec,
            Scheme::Naive | Scheme::XVec => ModelKind::XVec,
            Scheme::Clt => ModelKind::Binary,
            Scheme::Additive | Scheme::Pareto => ModelKind::Additive,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("scheme: unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Gaussian,
    YVec,
    XVec,
    Additive,
    Binary,
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => ModelKind::Gaussian,
            "yvec" => ModelKind::YVec,
            "xvec" => ModelKind::XVec,
            "additive" => ModelKind::Additive,
            "binary" => ModelKind::Binary,
            _ => return Err(Error::Config(format!("model.kind: unknown kind '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub x_law: MarginalLaw,
    pub z_law: MarginalLaw,
    /// Off-diagonal entry of an equicorrelated Σ_X.
    pub sigma_x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub k: Vec<f64>,
    /// Each point is a correlation vector; scalar schemes use length 1.
    pub rho: Vec<Vec<f64>>,
    pub m: Vec<usize>,
    pub alpha: Vec<f64>,
    pub b0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub model: ModelSpec,
    pub grid: Grid,
    pub trials: u64,
    pub seed: u64,
    pub ledger: LedgerMode,
    pub wait_cap: WaitCap,
    pub charge_sigma_x: bool,
    pub output: Option<PathBuf>,
}

/// One cell of the grid. Axes that the scheme ignores are None.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub k: f64,
    pub rho: Vec<f64>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub b0: Option<f64>,
}

impl GridPoint {
    /// `a|b|c`
    pub fn rho_spec(&self) -> String {
        self.rho
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

fn field<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", v.trim())))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| field(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

const KEYS: [&str; 16] = [
    "scheme",
    "model.kind",
    "model.x_law",
    "model.z_law",
    "model.sigma_x",
    "grid.k",
    "grid.rho",
    "grid.m",
    "grid.alpha",
    "grid.b0",
    "trials",
    "seed",
    "ledger",
    "wait_cap",
    "charge_sigma_x",
    "output",
];

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment. Vector correlations
    /// are written `0.9|0.5` and separated by commas.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("expected 'key = value', got '{line}'"),
                });
            };
            let k = k.trim().to_string();
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("unknown key '{k}'"),
                });
            }
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("duplicate key '{k}'"),
                });
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let scheme: Scheme = field("scheme", get("scheme").ok_or_else(|| Error::Config("scheme: missing".into()))?)?;
        let kind = match get("model.kind") {
            Some(v) => field("model.kind", v)?,
            None => scheme.default_model(),
        };
        let default_x = if scheme == Scheme::Pareto {
            MarginalLaw::ParetoTwoSided { alpha: 4.0 }
        } else if kind == ModelKind::Additive {
            MarginalLaw::Laplace
        } else {
            MarginalLaw::StdNormal
        };
        let model = ModelSpec {
            kind,
            x_law: get("model.x_law").map_or(Ok(default_x), |v| field("model.x_law", v))?,
            z_law: get("model.z_law").map_or(Ok(MarginalLaw::StdNormal), |v| field("model.z_law", v))?,
            sigma_x: get("model.sigma_x").map_or(Ok(0.0), |v| field("model.sigma_x", v))?,
        };
        let rho = match get("grid.rho") {
            Some(v) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|p| p.split('|').map(|c| field("grid.rho", c)).collect())
                .collect::<Result<Vec<Vec<f64>>>>()?,
            None => return Err(Error::Config("grid.rho: missing".into())),
        };
        let grid = Grid {
            k: list("grid.k", get("grid.k").ok_or_else(|| Error::Config("grid.k: missing".into()))?)?,
            rho,
            m: get("grid.m").map_or(Ok(vec![]), |v| list("grid.m", v))?,
            alpha: get("grid.alpha").map_or(Ok(vec![]), |v| list("grid.alpha", v))?,
            b0: get("grid.b0").map_or(Ok(vec![0.3]), |v| list("grid.b0", v))?,
        };
        let cfg = ExperimentConfig {
            scheme,
            model,
            grid,
            trials: get("trials").map_or(Ok(10_000), |v| field("trials", v))?,
            seed: get("seed").map_or(Ok(1), |v| field("seed", v))?,
            ledger: get("ledger").map_or(Ok(LedgerMode::ExpectedOnly), |v| {
                v.parse().map_err(|_| Error::Config(format!("ledger: expected 'expected' or 'realized', got '{v}'")))
            })?,
            wait_cap: WaitCap {
                factor: get("wait_cap").map_or(Ok(1024.0), |v| field("wait_cap", v))?,
            },
            charge_sigma_x: get("charge_sigma_x").map_or(Ok(false), |v| parse_bool("charge_sigma_x", v))?,
            output: get("output").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn options(&self) -> ProtocolOptions {
        ProtocolOptions {
            ledger: self.ledger,
            wait_cap: self.wait_cap,
            charge_sigma_x: self.charge_sigma_x,
            literal: false,
        }
    }

    /// Grid cells in a fixed order: k, then ρ, then the scheme's extra axis.
    pub fn points(&self) -> Vec<GridPoint> {
        let extra: Vec<(Option<usize>, Option<f64>, Option<f64>)> = match self.scheme {
            Scheme::Clt => self.grid.m.iter().map(|m| (Some(*m), None, None)).collect(),
            Scheme::Pareto => self.grid.alpha.iter().map(|a| (None, Some(*a), None)).collect(),
            Scheme::Additive if !self.grid.alpha.is_empty() => {
                self.grid.alpha.iter().map(|a| (None, Some(*a), None)).collect()
            }
            Scheme::XVec => self.grid.b0.iter().map(|b| (None, None, Some(*b))).collect(),
            _ => vec![(None, None, None)],
        };
        let mut out = Vec::new();
        for &k in &self.grid.k {
            for rho in &self.grid.rho {
                for &(m, alpha, b0) in &extra {
                    out.push(GridPoint {
                        k,
                        rho: rho.clone(),
                        m,
                        alpha,
                        b0,
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::Config(format!("trials: {} is below the minimum of 100", self.trials)));
        }
        if !(self.wait_cap.factor >= 1.0) {
            return Err(Error::Config("wait_cap: must be at least 1".into()));
        }
        if self.grid.k.is_empty() || self.grid.rho.is_empty() {
            return Err(Error::Config("grid: k and rho must be non-empty".into()));
        }
        match self.scheme {
            Scheme::Clt if self.grid.m.is_empty() => {
                return Err(Error::Config("grid.m: required by the clt scheme".into()))
            }
            Scheme::Pareto if self.grid.alpha.is_empty() => {
                return Err(Error::Config("grid.alpha: required by the pareto scheme".into()))
            }
            _ => {}
        }
        for p in self.points() {
            self.estimator(&p)
                .map_err(|e| Error::Config(format!("grid point k = {}, rho = {}: {e}", p.k, p.rho_spec())))?;
        }
        Ok(())
    }

    pub fn model_at(&self, p: &GridPoint) -> Result<JointModel> {
        let scalar = |what: &str| -> Result<f64> {
            match p.rho.as_slice() {
                [r] => Ok(*r),
                _ => Err(Error::Config(format!("grid.rho: {what} takes a single correlation per point"))),
            }
        };
        let m = match self.model.kind {
            ModelKind::Gaussian => JointModel::GaussianScalar { rho: scalar("gaussian model")? },
            ModelKind::YVec => JointModel::yvec_independent_noise(&p.rho)?,
            ModelKind::XVec => JointModel::GaussianXVec {
                rho: p.rho.clone(),
                sigma_x: CorrelationMatrix::equicorrelated(p.rho.len(), self.model.sigma_x)?,
            },
            ModelKind::Additive => {
                // an alpha axis always means Pareto X
                let x_law = match p.alpha {
                    Some(alpha) => MarginalLaw::ParetoTwoSided { alpha },
                    None => self.model.x_law,
                };
                JointModel::AdditiveNoise {
                    rho: scalar("additive model")?,
                    x_law,
                    z_law: self.model.z_law,
                }
            }
            ModelKind::Binary => JointModel::DoublySymmetricBinary {
                p: (1.0 - scalar("binary model")?) / 2.0,
            },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn estimator(&self, p: &GridPoint) -> Result<Box<dyn Estimator>> {
        let model = self.model_at(p)?;
        let o = self.options();
        Ok(match self.scheme {
            Scheme::Max => {
                if p.k.fract() != 0.0 || p.k < 1.0 || p.k > 1000.0 {
                    return Err(Error::Config(format!("grid.k: max scheme needs an integer k >= 1, got {}", p.k)));
                }
                Box::new(MaxEstimator::new(&model, p.k as u32, o)?)
            }
            Scheme::Threshold | Scheme::YVec => Box::new(ThresholdEstimator::gaussian(&model, p.k, o)?),
            Scheme::Naive => Box::new(ScalarRunsEstimator::naive(&model, p.k, o)?),
            Scheme::XVec => Box::new(XVecEstimator::new(&model, p.k, p.b0.unwrap_or(0.3), o)?),
            Scheme::Clt => Box::new(ThresholdEstimator::clt(&model, p.m.unwrap_or(1), p.k, o)?),
            Scheme::Additive => Box::new(ThresholdEstimator::additive(&model, p.k, o)?),
            Scheme::Pareto => Box::new(ParetoQuantizedEstimator::new(&model, p.k, o)?),
        })
    }
}
