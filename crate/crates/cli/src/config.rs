//! Run configuration: a TOML document with every section optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use perfolayer::expr::Expr;
use perfolayer::fem::{CgOptions, EigenOptions, ElasticityTensor4};
use perfolayer::geometry::{reciprocal_integer, Extent, Perforation};
use perfolayer::micro::preset_loads;
use perfolayer::plate::{LoadModel, NewmarkParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometryConfig {
    Full {
        #[serde(default = "one")]
        m: usize,
    },
    Box {
        #[serde(default = "four")]
        m: usize,
        #[serde(default = "box_lo")]
        lo: [f64; 3],
        #[serde(default = "box_hi")]
        hi: [f64; 3],
    },
    Corner {
        #[serde(default = "four")]
        m: usize,
        half_width: f64,
        half_height: f64,
    },
    /// `solid` lists the `m × m × 2m` voxels as `0`/`1`, third index fastest.
    Mask { m: usize, solid: String },
}

fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn box_lo() -> [f64; 3] {
    [0.25, 0.25, -0.5]
}
fn box_hi() -> [f64; 3] {
    [0.75, 0.75, 0.5]
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig::Box { m: 4, lo: box_lo(), hi: box_hi() }
    }
}

impl GeometryConfig {
    pub fn m(&self) -> usize {
        match self {
            GeometryConfig::Full { m } | GeometryConfig::Box { m, .. } | GeometryConfig::Corner { m, .. } | GeometryConfig::Mask { m, .. } => *m,
        }
    }

    pub fn perforation(&self) -> CliResult<Perforation> {
        Ok(match self {
            GeometryConfig::Full { .. } => Perforation::Full,
            GeometryConfig::Box { lo, hi, .. } => Perforation::BoxHole { lo: *lo, hi: *hi },
            GeometryConfig::Corner { half_width, half_height, .. } => {
                Perforation::CornerHole { half_width: *half_width, half_height: *half_height }
            }
            GeometryConfig::Mask { solid, .. } => {
                let bits: Result<Vec<bool>, _> = solid
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(CliError::Validation(format!("geometry.solid: unexpected character '{other}'"))),
                    })
                    .collect();
                Perforation::Mask { solid: bits? }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// All 81 components `A_ijkl`, last index fastest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<f64>>,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig { lambda: Some(1.0), mu: Some(1.0), components: None }
    }
}

impl MaterialConfig {
    pub fn tensor(&self) -> CliResult<ElasticityTensor4> {
        let bad = |msg: String| CliError::Validation(msg);
        match (&self.components, self.lambda, self.mu) {
            (Some(c), None, None) => {
                if c.len() != 81 {
                    return Err(bad(format!("material.components: expected 81 entries, got {}", c.len())));
                }
                let a = std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| c[((i * 3 + j) * 3 + k) * 3 + l]))));
                ElasticityTensor4::new(a).map_err(|e| bad(format!("material.components: {e}")))
            }
            (None, Some(l), Some(m)) => ElasticityTensor4::isotropic(l, m).map_err(|e| bad(format!("material: {e}"))),
            (None, _, _) => Err(bad("material: give both lambda and mu".into())),
            (Some(_), _, _) => Err(bad("material: give either lambda/mu or components, not both".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayerConfig {
    pub eps: Vec<f64>,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Default for LayerConfig {
    fn default() -> Self {
        LayerConfig { eps: vec![0.5, 0.25, 0.125], lo: [0.0, 0.0], hi: [1.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolutionConfig {
    /// Elements per cell edge (cell and layer meshes).
    pub n: usize,
    /// Plate elements per unit length.
    pub n_sigma: usize,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        ResolutionConfig { n: 4, n_sigma: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    /// `dt = dt_factor · ε` unless `dt` is given.
    pub dt_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { t_end: 0.5, dt_factor: 0.125, dt: None, beta: 0.25, gamma: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub linear: f64,
    pub eigen: f64,
    pub eigen_max_iter: usize,
    pub picard: f64,
    pub picard_max: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { linear: 1e-10, eigen: 1e-10, eigen_max_iter: 500, picard: 1e-10, picard_max: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadConfig {
    /// Built-in load set; ignored when `f` or `g` are given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<[String; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<[String; 3]>,
    /// Lipschitz constant of `f` in `z`; estimated by sampling if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig { preset: Some("linear".into()), f: None, g: None, lipschitz: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub probes: Vec<[f64; 2]>,
    /// Norm exponent echoed in reports; all computed norms are L².
    pub norm_p: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), probes: vec![[0.5, 0.5]], norm_p: 2.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    pub layer: LayerConfig,
    pub resolution: ResolutionConfig,
    pub time: TimeConfig,
    pub tolerances: ToleranceConfig,
    pub loads: LoadConfig,
    pub output: OutputConfig,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {msg}"))
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> CliResult<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<SimConfig> {
    let mut cfg: SimConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("parse error: {e}")))?;
    cfg.normalize()?;
    cfg.validate()?;
    Ok(cfg)
}

impl SimConfig {
    /// Snaps every ε to the exact reciprocal `1/k`.
    fn normalize(&mut self) -> CliResult<()> {
        for e in self.layer.eps.iter_mut() {
            let k = reciprocal_integer(*e).map_err(|err| invalid("layer.eps", err))?;
            *e = 1.0 / k as f64;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.layer.eps.is_empty() {
            return Err(invalid("layer.eps", "list is empty"));
        }
        for &e in &self.layer.eps {
            reciprocal_integer(e).map_err(|err| invalid("layer.eps", err))?;
        }
        self.extent()?;
        let m = self.geometry.m();
        if m == 0 {
            return Err(invalid("geometry.m", "must be positive"));
        }
        let r = &self.resolution;
        if r.n == 0 || r.n % m != 0 {
            return Err(invalid("resolution.n", format!("{} is not a positive multiple of geometry.m = {m}", r.n)));
        }
        if r.n_sigma == 0 {
            return Err(invalid("resolution.n_sigma", "must be positive"));
        }
        let t = &self.time;
        if !(t.t_end >= 0.0) || !t.t_end.is_finite() {
            return Err(invalid("time.t_end", "must be finite and nonnegative"));
        }
        if !(t.dt_factor > 0.0) || !t.dt_factor.is_finite() {
            return Err(invalid("time.dt_factor", "must be positive"));
        }
        if let Some(dt) = t.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(invalid("time.dt", "must be positive"));
            }
        }
        if !(t.beta > 0.0 && t.beta <= 0.5) {
            return Err(invalid("time.beta", "must lie in (0, 1/2]"));
        }
        if !(t.gamma >= 0.5 && t.gamma <= 1.0) {
            return Err(invalid("time.gamma", "must lie in [1/2, 1]"));
        }
        let tol = &self.tolerances;
        for (key, v) in [("tolerances.linear", tol.linear), ("tolerances.eigen", tol.eigen), ("tolerances.picard", tol.picard)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(key, "must be positive"));
            }
        }
        if tol.eigen_max_iter == 0 {
            return Err(invalid("tolerances.eigen_max_iter", "must be positive"));
        }
        if tol.picard_max == 0 {
            return Err(invalid("tolerances.picard_max", "must be positive"));
        }
        if !(self.output.norm_p > 1.0) || !self.output.norm_p.is_finite() {
            return Err(invalid("output.norm_p", "must lie in (1, ∞)"));
        }
        self.geometry.perforation()?;
        self.material.tensor()?;
        self.load_model()?;
        Ok(())
    }

    pub fn extent(&self) -> CliResult<Extent> {
        let e = Extent::new(self.layer.lo, self.layer.hi);
        for d in 0..2 {
            let int = |v: f64| (v - v.round()).abs() < 1e-12;
            if !int(e.lo[d]) || !int(e.hi[d]) || e.hi[d] <= e.lo[d] {
                return Err(invalid("layer.lo/layer.hi", "corners must be integers with lo < hi"));
            }
        }
        Ok(e)
    }

    pub fn dt(&self, eps: f64) -> f64 {
        self.time.dt.unwrap_or(self.time.dt_factor * eps)
    }

    pub fn newmark(&self, eps: f64) -> NewmarkParams {
        NewmarkParams {
            dt: self.dt(eps),
            beta: self.time.beta,
            gamma: self.time.gamma,
            picard_tol: self.tolerances.picard,
            picard_max: self.tolerances.picard_max,
        }
    }

    pub fn cg(&self) -> CgOptions {
        CgOptions::with_tol(self.tolerances.linear)
    }

    pub fn eigen(&self, seed: u64) -> EigenOptions {
        EigenOptions { tol: self.tolerances.eigen, max_iter: self.tolerances.eigen_max_iter, seed, ..EigenOptions::default() }
    }

    pub fn load_model(&self) -> CliResult<LoadModel> {
        let l = &self.loads;
        if l.f.is_none() && l.g.is_none() {
            let name = l.preset.as_deref().unwrap_or("zero");
            return preset_loads(name).map_err(|e| invalid("loads.preset", e));
        }
        let parse = |key: &str, src: &Option<[String; 3]>| -> CliResult<[Expr; 3]> {
            match src {
                None => Ok([Expr::zero(), Expr::zero(), Expr::zero()]),
                Some(s) => {
                    let mut out = [Expr::zero(), Expr::zero(), Expr::zero()];
                    for (i, text) in s.iter().enumerate() {
                        out[i] = Expr::parse(text).map_err(|e| invalid(&format!("loads.{key}[{i}]"), e))?;
                    }
                    Ok(out)
                }
            }
        };
        let f = parse("f", &l.f)?;
        let g = parse("g", &l.g)?;
        match l.lipschitz {
            Some(lip) => LoadModel::new(f, g, lip).map_err(|e| invalid("loads", e)),
            None => {
                let max_eps = self.layer.eps.iter().copied().fold(0.0, f64::max);
                LoadModel::with_estimated_lipschitz(f, g, self.time.t_end, self.extent()?, 1.0 + max_eps)
                    .map_err(|e| invalid("loads", e))
            }
        }
    }

    /// The configuration with all defaults filled in, as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
