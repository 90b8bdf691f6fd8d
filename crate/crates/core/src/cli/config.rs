//! Run configuration: TOML file with one section per module.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fokker_planck::Grid1D;
use crate::langevin::{default_theta_cut, SdeConfig};
use crate::model::{BarrierProfile, ModelParams, ProfileKind};
use crate::wavefunction::MAX_LEVEL;

/// A list of sample points: `log:a:b:n`, `lin:a:b:n` or `v1,v2,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Grid {
    Log { lo: f64, hi: f64, n: usize },
    Lin { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let ramp = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                return vec![lo];
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        match self {
            Grid::Lin { lo, hi, n } => ramp(*lo, *hi, *n),
            Grid::Log { lo, hi, n } => {
                let mut v: Vec<f64> = ramp(lo.ln(), hi.ln(), *n).into_iter().map(f64::exp).collect();
                v[0] = *lo;
                if *n > 1 {
                    v[*n - 1] = *hi;
                }
                v
            }
            Grid::List(v) => v.clone(),
        }
    }

    fn check(&self, field: &str) -> Result<()> {
        let bad = |r: &str| Err(Error::config(field, r.to_string()));
        match self {
            Grid::Lin { lo, hi, n } | Grid::Log { lo, hi, n } => {
                if *n == 0 {
                    return bad("grid needs at least one point");
                }
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return bad("grid bounds must be finite with lo <= hi");
                }
                if matches!(self, Grid::Log { .. }) && *lo <= 0.0 {
                    return bad("log grid bounds must be > 0");
                }
                Ok(())
            }
            Grid::List(v) if v.is_empty() => bad("grid needs at least one point"),
            Grid::List(v) if v.iter().any(|x| !x.is_finite()) => bad("grid values must be finite"),
            Grid::List(_) => Ok(()),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        if let Some(rest) = s.strip_prefix("log:").or_else(|| s.strip_prefix("lin:")) {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("expected {}a:b:n, got {s:?}", &s[..4]));
            }
            let (lo, hi) = (num(parts[0])?, num(parts[1])?);
            let n = parts[2].trim().parse::<usize>().map_err(|e| format!("bad count {:?}: {e}", parts[2]))?;
            return Ok(if s.starts_with("log:") {
                Grid::Log { lo, hi, n }
            } else {
                Grid::Lin { lo, hi, n }
            });
        }
        s.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>().map(Grid::List)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Log { lo, hi, n } => write!(f, "log:{lo:?}:{hi:?}:{n}"),
            Grid::Lin { lo, hi, n } => write!(f, "lin:{lo:?}:{hi:?}:{n}"),
            Grid::List(v) => {
                let s: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&s.join(","))
            }
        }
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: ProfileKind,
    pub transition_time: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdeSection {
    pub dt: f64,
    pub theta_cut: Option<f64>,
    pub n_paths: usize,
    pub record_stride: usize,
    pub t0: f64,
    pub t1: f64,
    pub theta0: f64,
    /// Write one `t,theta` file per path.
    pub dump_paths: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub lambda: Grid,
    pub rho: Grid,
    pub theta_bar: Grid,
    pub x: Grid,
    pub time: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpSection {
    pub theta_min: f64,
    pub theta_max: f64,
    pub points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
    /// Width of the initial Gaussian at `sde.theta0`.
    pub initial_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavefunctionSection {
    pub level: usize,
    /// Integration step for the deterministic trajectory.
    pub dt: f64,
    /// Average over the Langevin ensemble instead of the deterministic path.
    pub ensemble: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: Format,
    pub workers: Option<usize>,
    #[serde(with = "model_section")]
    pub model: ModelParams<f64>,
    pub profile: ProfileSection,
    pub sde: SdeSection,
    pub grids: GridSection,
    pub fp: FpSection,
    pub wavefunction: WavefunctionSection,
}

mod model_section {
    use super::ModelParams;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct Section {
        epsilon: f64,
        omega_in: f64,
        omega_out: f64,
        omega_as: f64,
    }

    impl Default for Section {
        fn default() -> Self {
            Self {
                epsilon: 1.0,
                omega_in: 1.0,
                omega_out: 1.5,
                omega_as: 1.5,
            }
        }
    }

    pub fn default() -> ModelParams<f64> {
        let s = Section::default();
        ModelParams {
            epsilon: s.epsilon,
            omega_in: s.omega_in,
            omega_out: s.omega_out,
            omega_as: s.omega_as,
        }
    }

    pub fn serialize<S: Serializer>(m: &ModelParams<f64>, ser: S) -> Result<S::Ok, S::Error> {
        Section {
            epsilon: m.epsilon,
            omega_in: m.omega_in,
            omega_out: m.omega_out,
            omega_as: m.omega_as,
        }
        .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<ModelParams<f64>, D::Error> {
        let s = Section::deserialize(de)?;
        Ok(ModelParams {
            epsilon: s.epsilon,
            omega_in: s.omega_in,
            omega_out: s.omega_out,
            omega_as: s.omega_as,
        })
    }
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            kind: ProfileKind::Step,
            transition_time: 0.0,
            width: 0.0,
        }
    }
}

impl Default for SdeSection {
    fn default() -> Self {
        Self {
            dt: 2e-4,
            theta_cut: None,
            n_paths: 1000,
            record_stride: 50,
            t0: -2.0,
            t1: 2.0,
            theta0: 0.0,
            dump_paths: false,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        let g = |s: &str| s.parse::<Grid>().unwrap();
        Self {
            lambda: g("log:0.01:100:40"),
            rho: g("lin:0:0.95:40"),
            theta_bar: g("lin:-10:10:401"),
            x: g("lin:-4:4:161"),
            time: g("lin:-5:5:201"),
        }
    }
}

impl Default for FpSection {
    fn default() -> Self {
        Self {
            theta_min: -40.0,
            theta_max: 40.0,
            points: 2048,
            dt: 5e-3,
            t_end: 20.0,
            snapshots: 4,
            initial_width: 0.5,
        }
    }
}

impl Default for WavefunctionSection {
    fn default() -> Self {
        Self {
            level: 0,
            dt: 1e-3,
            ensemble: false,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            format: Format::Csv,
            workers: None,
            model: model_section::default(),
            profile: ProfileSection::default(),
            sde: SdeSection::default(),
            grids: GridSection::default(),
            fp: FpSection::default(),
            wavefunction: WavefunctionSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// SHA-256 of the serialized configuration, excluding where output goes
    /// and how many threads produce it.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.workers = None;
        Ok(hex::encode(Sha256::digest(c.to_toml()?.as_bytes())))
    }

    pub fn barrier(&self) -> Result<BarrierProfile<f64>> {
        let m = &self.model;
        let p = match self.profile.kind {
            ProfileKind::Constant => BarrierProfile::constant(m.omega_in),
            ProfileKind::Step => BarrierProfile::step(m.omega_in, m.omega_out, self.profile.transition_time),
            ProfileKind::SmoothStep => {
                BarrierProfile::smooth_step(m.omega_in, m.omega_out, self.profile.transition_time, self.profile.width)?
            }
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sde_config(&self) -> Result<SdeConfig> {
        let profile = self.barrier()?;
        let s = &self.sde;
        let cut = s.theta_cut.unwrap_or_else(|| default_theta_cut(&profile, self.model.epsilon));
        let cfg = SdeConfig {
            dt: s.dt,
            theta_cut: cut,
            n_paths: s.n_paths,
            seed: self.seed,
            profile,
            epsilon: self.model.epsilon,
            record_stride: s.record_stride.max(1),
            track_xi: false,
        };
        cfg.validate()?;
        if !(s.t1 > s.t0) {
            return Err(Error::config("sde.t1", "must exceed sde.t0"));
        }
        if !s.theta0.is_finite() || s.theta0.abs() > cut {
            return Err(Error::config("sde.theta0", "must lie in [-theta_cut, theta_cut]"));
        }
        Ok(cfg)
    }

    pub fn fp_grid(&self) -> Result<Grid1D> {
        let f = &self.fp;
        if !(f.dt > 0.0) || !(f.t_end > 0.0) {
            return Err(Error::config("fp.dt", "dt and t_end must be > 0"));
        }
        if !(f.initial_width > 0.0) {
            return Err(Error::config("fp.initial_width", "must be > 0"));
        }
        Grid1D::new(f.theta_min, f.theta_max, f.points).map_err(|e| Error::config("fp.points", e.to_string()))
    }

    /// Checks every section before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.sde_config()?;
        self.fp_grid()?;
        let g = &self.grids;
        g.lambda.check("grids.lambda")?;
        if g.lambda.values().iter().any(|&l| l <= 0.0) {
            return Err(Error::config("grids.lambda", "values must be > 0"));
        }
        g.rho.check("grids.rho")?;
        if g.rho.values().iter().any(|&r| !(0.0..1.0).contains(&r)) {
            return Err(Error::config("grids.rho", "values must lie in [0, 1)"));
        }
        g.theta_bar.check("grids.theta_bar")?;
        g.x.check("grids.x")?;
        g.time.check("grids.time")?;
        if self.wavefunction.level > MAX_LEVEL {
            return Err(Error::config("wavefunction.level", format!("must be <= {MAX_LEVEL}")));
        }
        if !(self.wavefunction.dt > 0.0) {
            return Err(Error::config("wavefunction.dt", "must be > 0"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be >= 1"));
        }
        Ok(())
    }
}
