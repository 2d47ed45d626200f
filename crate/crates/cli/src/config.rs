//! Job configuration: TOML input, overrides from the command line, and
//! conversion into library values.

use std::fmt;

use num_complex::Complex64;
use perspec::dos::SourceVector;
use perspec::{PeriodVector, PeriodicPotential};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Failure with a pointer to the offending field.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// A real number written either as a TOML number or as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Float(f64),
            Int(i64),
            Text(String),
        }
        let x = match Repr::deserialize(d)? {
            Repr::Float(x) => x,
            Repr::Int(i) => i as f64,
            Repr::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| serde::de::Error::custom(format!("`{s}` is not a decimal number")))?,
        };
        if !x.is_finite() {
            return Err(serde::de::Error::custom("number is not finite"));
        }
        Ok(Num(x))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero {},
    /// Values on the fundamental domain, last index fastest.
    Values { values: Vec<Num> },
    Checkerboard { delta: Num },
    Staircase {},
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        norm: Num,
    },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Zero {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnergyGrid {
    List(Vec<Num>),
    Range { min: Num, max: Num, count: usize },
}

impl EnergyGrid {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        let v: Vec<f64> = match self {
            EnergyGrid::List(l) => l.iter().map(|x| x.0).collect(),
            EnergyGrid::Range { min, max, count } => {
                if *count < 2 {
                    return Err(ConfigError::new(format!("{field}.count"), "need at least 2 energies"));
                }
                if max.0 <= min.0 {
                    return Err(ConfigError::new(format!("{field}.max"), "must exceed min"));
                }
                (0..*count)
                    .map(|i| min.0 + (max.0 - min.0) * i as f64 / (*count - 1) as f64)
                    .collect()
            }
        };
        if v.is_empty() {
            return Err(ConfigError::new(field, "no energies given"));
        }
        if v.windows(2).any(|w| w[1] < w[0]) {
            return Err(ConfigError::new(field, "energies must be ascending"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsSection {
    pub energies: EnergyGrid,
    #[serde(default = "default_theta_n")]
    pub theta_n: usize,
    /// Box scales `ℓ` for the finite-volume comparison.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub box_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub site: Vec<i64>,
    pub re: Num,
    #[serde(default = "zero")]
    pub im: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub energies: EnergyGrid,
    #[serde(default = "default_eps")]
    pub eps: Num,
    #[serde(default = "default_theta_n")]
    pub theta_n: usize,
    pub source: Vec<SourceEntry>,
    /// Also assert `dμ^u / dν ≤ 1.05 · #supp · ‖u‖²`.
    #[serde(default)]
    pub check_ratio: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub energy: Num,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Random,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSection {
    pub stages: usize,
    #[serde(default = "default_generator")]
    pub generator: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub fraction: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub period: Vec<i64>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<IdsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpSection>,
}

fn default_theta_n() -> usize {
    64
}
fn default_eps() -> Num {
    Num(perspec::dos::DEFAULT_EPS)
}
fn default_samples() -> usize {
    perspec::certify::DEFAULT_SAMPLES
}
fn default_generator() -> GeneratorKind {
    GeneratorKind::Random
}
fn default_grid() -> usize {
    perspec::bands::DEFAULT_GRID
}
fn default_refine() -> usize {
    perspec::bands::DEFAULT_REFINE
}
fn zero() -> Num {
    Num(0.0)
}
fn one() -> Num {
    Num(1.0)
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::new(if field == "." { String::new() } else { field }, inner.message().trim())
        })
    }

    pub fn new(period: Vec<i64>, potential: PotentialSpec) -> Self {
        Self {
            dimension: None,
            period,
            potential,
            grid: default_grid(),
            refine: default_refine(),
            ids: None,
            measure: None,
            certify: None,
            lp: None,
        }
    }

    pub fn apply_overrides(&mut self, grid: Option<usize>, refine: Option<usize>, seed: Option<u64>) {
        if let Some(g) = grid {
            self.grid = g;
        }
        if let Some(r) = refine {
            self.refine = r;
        }
        if let Some(s) = seed {
            if let PotentialSpec::Random { seed, .. } = &mut self.potential {
                *seed = Some(s);
            }
            if let Some(lp) = &mut self.lp {
                lp.seed = Some(s);
            }
        }
    }

    pub fn period_vector(&self) -> Result<PeriodVector, ConfigError> {
        if self.period.is_empty() {
            return Err(ConfigError::new("period", "must have at least one entry"));
        }
        for (i, &p) in self.period.iter().enumerate() {
            if p < 1 {
                return Err(ConfigError::new(format!("period[{i}]"), format!("must be >= 1, got {p}")));
            }
        }
        if let Some(d) = self.dimension {
            if d != self.period.len() {
                return Err(ConfigError::new(
                    "dimension",
                    format!("is {d} but period has {} entries", self.period.len()),
                ));
            }
        }
        PeriodVector::new(self.period.iter().map(|&p| p as usize).collect())
            .map_err(|e| ConfigError::new("period", e.to_string()))
    }

    pub fn check_resolution(&self) -> Result<(), ConfigError> {
        if self.grid == 0 {
            return Err(ConfigError::new("grid", "must be >= 1"));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PeriodicPotential, ConfigError> {
        let p = self.period_vector()?;
        match &self.potential {
            PotentialSpec::Zero {} => Ok(PeriodicPotential::zeros(p)),
            PotentialSpec::Values { values } => {
                if values.len() != p.total() {
                    return Err(ConfigError::new(
                        "potential.values",
                        format!("expected {} values, got {}", p.total(), values.len()),
                    ));
                }
                PeriodicPotential::new(p, values.iter().map(|x| x.0).collect())
                    .map_err(|e| ConfigError::new("potential.values", e.to_string()))
            }
            PotentialSpec::Checkerboard { delta } => {
                if p.dims().iter().any(|&x| x != 2) {
                    return Err(ConfigError::new("period", "checkerboard potentials have period 2 in every direction"));
                }
                perspec::checkerboard(p.dim(), delta.0).map_err(|e| ConfigError::new("potential.delta", e.to_string()))
            }
            PotentialSpec::Staircase {} => Ok(perspec::staircase(&p)),
            PotentialSpec::Random { seed, norm } => {
                let seed = seed.ok_or_else(|| ConfigError::new("potential.seed", "random potentials need a seed"))?;
                if norm.0 < 0.0 {
                    return Err(ConfigError::new("potential.norm", "must be >= 0"));
                }
                Ok(PeriodicPotential::random(p, seed, norm.0))
            }
        }
    }

    pub fn ids_section(&self) -> Result<&IdsSection, ConfigError> {
        self.ids.as_ref().ok_or_else(|| ConfigError::new("ids", "missing [ids] section"))
    }

    pub fn measure_section(&self) -> Result<&MeasureSection, ConfigError> {
        self.measure.as_ref().ok_or_else(|| ConfigError::new("measure", "missing [measure] section"))
    }

    pub fn certify_section(&self) -> Result<&CertifySection, ConfigError> {
        self.certify.as_ref().ok_or_else(|| ConfigError::new("certify", "missing [certify] section"))
    }

    pub fn lp_section(&self) -> Result<&LpSection, ConfigError> {
        self.lp.as_ref().ok_or_else(|| ConfigError::new("lp", "missing [lp] section"))
    }
}

impl MeasureSection {
    pub fn source_vector(&self, d: usize) -> Result<SourceVector, ConfigError> {
        if self.source.is_empty() {
            return Err(ConfigError::new("measure.source", "needs at least one site"));
        }
        let mut entries = Vec::with_capacity(self.source.len());
        for (i, s) in self.source.iter().enumerate() {
            if s.site.len() != d {
                return Err(ConfigError::new(
                    format!("measure.source[{i}].site"),
                    format!("has {} coordinates, expected {d}", s.site.len()),
                ));
            }
            entries.push((s.site.clone(), Complex64::new(s.re.0, s.im.0)));
        }
        Ok(SourceVector { entries })
    }
}
