//! JSON documents read by the command line and their conversion into core
//! types.
//!
//! Every document rejects unknown fields. Outcome labels are optional and
//! only checked for length; all arithmetic is keyed by position.

use std::fs;
use std::path::Path;

use renyi_bet_core::betting::{OddsProfile, RiskVector};
use renyi_bet_core::gpt::{GptModel, HermitianMatrix, Measurement, StateEnsemble};
use renyi_bet_core::prob::{CondPmf, JointPmf, Pmf, StochasticOp};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::OracleOverrides;

/// The only accepted value of [`GameSpecFile::version`].
pub const SPEC_VERSION: u32 = 1;

fn check_labels(labels: &Option<Vec<String>>, n: usize, what: &str) -> Result<()> {
    match labels {
        Some(l) if l.len() != n => Err(Error::validation(format!(
            "{what}: {} labels for {n} outcomes",
            l.len()
        ))),
        _ => Ok(()),
    }
}

/// `{"outcomes": [...], "mass": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    pub mass: Vec<f64>,
}

impl PmfDoc {
    pub fn to_pmf(&self) -> Result<Pmf> {
        check_labels(&self.outcomes, self.mass.len(), "pmf")?;
        Ok(Pmf::new(self.mass.clone())?)
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        PmfDoc {
            outcomes: None,
            mass: p.mass().to_vec(),
        }
    }
}

/// Joint PMF with rows indexed by the main outcome and columns by the
/// conditioning outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_outcomes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_outcomes: Option<Vec<String>>,
    pub mass: Vec<Vec<f64>>,
}

impl JointDoc {
    pub fn to_joint(&self) -> Result<JointPmf> {
        let joint = JointPmf::from_rows(&self.mass)?;
        check_labels(&self.x_outcomes, joint.n_x(), "joint rows")?;
        check_labels(&self.g_outcomes, joint.n_g(), "joint columns")?;
        Ok(joint)
    }

    pub fn from_joint(j: &JointPmf) -> Self {
        JointDoc {
            x_outcomes: None,
            g_outcomes: None,
            mass: j.rows(),
        }
    }
}

/// Conditional PMF with `rows[g] = p(·|g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl CondDoc {
    pub fn to_cond(&self) -> Result<CondPmf> {
        let rows = self
            .rows
            .iter()
            .map(|r| Pmf::new(r.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let c = CondPmf::new(rows)?;
        check_labels(&self.given, c.n_given(), "conditional rows")?;
        check_labels(&self.outcomes, c.n_outcomes(), "conditional outcomes")?;
        Ok(c)
    }

    pub fn from_cond(c: &CondPmf) -> Self {
        CondDoc {
            given: None,
            outcomes: None,
            rows: c.rows().iter().map(|r| r.mass().to_vec()).collect(),
        }
    }
}

/// Kernel as a column-stochastic matrix, `matrix[y][x] = t(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    pub matrix: Vec<Vec<f64>>,
}

impl KernelDoc {
    pub fn to_kernel(&self) -> Result<StochasticOp> {
        let op = StochasticOp::from_columns(&self.matrix)?;
        check_labels(&self.inputs, op.n_in(), "kernel inputs")?;
        check_labels(&self.outputs, op.n_out(), "kernel outputs")?;
        Ok(op)
    }

    pub fn from_kernel(op: &StochasticOp) -> Self {
        KernelDoc {
            inputs: None,
            outputs: None,
            matrix: op.columns(),
        }
    }
}

/// `{"re": [[...]], "im": [[...]]}`; a missing `im` means a real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexMatrixDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl ComplexMatrixDoc {
    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        let im = match &self.im {
            Some(im) => im.clone(),
            None => self.re.iter().map(|r| vec![0.0; r.len()]).collect(),
        };
        Ok(HermitianMatrix::from_rows(&self.re, &im)?)
    }
}

/// A state or effect: a plain vector in the model's coordinates, or a
/// complex matrix for quantum models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorDoc {
    Vector(Vec<f64>),
    Matrix(ComplexMatrixDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelDoc {
    Classical {
        n: usize,
    },
    Quantum {
        n: usize,
    },
    Custom {
        unit: Vec<f64>,
        reference_states: Vec<Vec<f64>>,
    },
}

impl ModelDoc {
    pub fn to_model(&self) -> Result<GptModel> {
        Ok(match self {
            ModelDoc::Classical { n } => GptModel::classical(*n)?,
            ModelDoc::Quantum { n } => GptModel::quantum(*n)?,
            ModelDoc::Custom {
                unit,
                reference_states,
            } => GptModel::custom(unit.clone(), reference_states.clone())?,
        })
    }
}

fn positive_grid_points() -> usize {
    50
}

/// Order-path sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    /// Smallest `λ`; defaults to the lower end of the admissible region.
    #[serde(default)]
    pub min: Option<f64>,
    pub max: f64,
    #[serde(default = "positive_grid_points")]
    pub points: usize,
}

/// Inputs of the divergence commands. Each command reads the fields it
/// needs and rejects the file when one is missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmfs: Option<Vec<PmfDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditionals: Option<Vec<CondDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_g: Option<PmfDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDoc>,
    /// One kernel per conditioning outcome, applied to the main system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<KernelDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<LambdaGrid>,
}

fn need<'a, T>(v: &'a Option<T>, field: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::validation(format!("missing field `{field}`")))
}

impl DivergenceSpec {
    pub fn alphas(&self) -> Result<&[f64]> {
        need(&self.alphas, "alphas").map(Vec::as_slice)
    }

    pub fn pmfs(&self) -> Result<Vec<Pmf>> {
        need(&self.pmfs, "pmfs")?
            .iter()
            .map(PmfDoc::to_pmf)
            .collect()
    }

    pub fn conditionals(&self) -> Result<Vec<CondPmf>> {
        need(&self.conditionals, "conditionals")?
            .iter()
            .map(CondDoc::to_cond)
            .collect()
    }

    pub fn p_g(&self) -> Result<Pmf> {
        need(&self.p_g, "p_g")?.to_pmf()
    }

    pub fn beta(&self) -> Result<f64> {
        need(&self.beta, "beta").copied()
    }

    pub fn kernel(&self) -> Result<StochasticOp> {
        need(&self.kernel, "kernel")?.to_kernel()
    }

    pub fn kernels(&self) -> Result<Vec<StochasticOp>> {
        need(&self.kernels, "kernels")?
            .iter()
            .map(KernelDoc::to_kernel)
            .collect()
    }

    pub fn gammas(&self) -> Result<&[f64]> {
        need(&self.gammas, "gammas").map(Vec::as_slice)
    }

    pub fn lambdas(&self) -> Result<&LambdaGrid> {
        need(&self.lambdas, "lambdas")
    }
}

/// A game without side information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BettingSpec {
    pub p0: PmfDoc,
    /// `odds[k][x]`.
    pub odds: Vec<Vec<f64>>,
    pub risk: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bets: Option<Vec<PmfDoc>>,
}

impl BettingSpec {
    pub fn parts(&self) -> Result<(Pmf, OddsProfile, RiskVector)> {
        Ok((
            self.p0.to_pmf()?,
            OddsProfile::new(self.odds.clone())?,
            RiskVector::new(self.risk.clone())?,
        ))
    }

    pub fn bets(&self) -> Result<Vec<Pmf>> {
        need(&self.bets, "bets")?
            .iter()
            .map(PmfDoc::to_pmf)
            .collect()
    }
}

/// A game with side information; `p0` is the joint of outcome and side
/// information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalBettingSpec {
    pub p0: JointDoc,
    pub odds: Vec<Vec<f64>>,
    pub risk: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bets: Option<Vec<CondDoc>>,
}

impl ConditionalBettingSpec {
    pub fn parts(&self) -> Result<(JointPmf, OddsProfile, RiskVector)> {
        Ok((
            self.p0.to_joint()?,
            OddsProfile::new(self.odds.clone())?,
            RiskVector::new(self.risk.clone())?,
        ))
    }

    pub fn bets(&self) -> Result<Vec<CondPmf>> {
        need(&self.bets, "bets")?
            .iter()
            .map(CondDoc::to_cond)
            .collect()
    }
}

/// An ensemble measured in a GPT model, with optional betting data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GptSpec {
    pub model: ModelDoc,
    pub prior: PmfDoc,
    pub states: Vec<VectorDoc>,
    pub measurement: Vec<VectorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odds: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refs: Option<Vec<PmfDoc>>,
    /// Outcome distribution of the uninformative reference measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<PmfDoc>,
}

/// A model with a validated ensemble and measurement.
pub struct GptInstance {
    pub model: GptModel,
    pub ensemble: StateEnsemble,
    pub measurement: Measurement,
}

impl GptSpec {
    fn vector(model: &GptModel, doc: &VectorDoc, state: bool) -> Result<Vec<f64>> {
        match doc {
            VectorDoc::Vector(v) => Ok(v.clone()),
            VectorDoc::Matrix(m) => {
                let h = m.to_hermitian()?;
                if state {
                    Ok(model.density_state(&h)?)
                } else {
                    Ok(renyi_bet_core::gpt::embed(&h))
                }
            }
        }
    }

    pub fn instance(&self) -> Result<GptInstance> {
        let model = self.model.to_model()?;
        let states = self
            .states
            .iter()
            .map(|s| Self::vector(&model, s, true))
            .collect::<Result<Vec<_>>>()?;
        let ensemble = StateEnsemble::new(&model, self.prior.to_pmf()?, states)?;
        let all_matrices = self
            .measurement
            .iter()
            .all(|e| matches!(e, VectorDoc::Matrix(_)));
        let measurement = if all_matrices && matches!(self.model, ModelDoc::Quantum { .. }) {
            let elements = self
                .measurement
                .iter()
                .map(|e| match e {
                    VectorDoc::Matrix(m) => m.to_hermitian(),
                    VectorDoc::Vector(_) => unreachable!(),
                })
                .collect::<Result<Vec<_>>>()?;
            model.povm(&elements)?
        } else {
            let effects = self
                .measurement
                .iter()
                .map(|e| Self::vector(&model, e, false))
                .collect::<Result<Vec<_>>>()?;
            Measurement::new(&model, effects)?
        };
        Ok(GptInstance {
            model,
            ensemble,
            measurement,
        })
    }

    pub fn odds(&self) -> Result<OddsProfile> {
        Ok(OddsProfile::new(need(&self.odds, "odds")?.clone())?)
    }

    pub fn risk(&self) -> Result<RiskVector> {
        Ok(RiskVector::new(need(&self.risk, "risk")?.clone())?)
    }

    pub fn refs(&self) -> Result<Vec<Pmf>> {
        need(&self.refs, "refs")?
            .iter()
            .map(PmfDoc::to_pmf)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Spec {
    Divergence(DivergenceSpec),
    Betting(BettingSpec),
    ConditionalBetting(ConditionalBettingSpec),
    Gpt(GptSpec),
}

impl Spec {
    pub fn kind(&self) -> &'static str {
        match self {
            Spec::Divergence(_) => "divergence",
            Spec::Betting(_) => "betting",
            Spec::ConditionalBetting(_) => "conditional-betting",
            Spec::Gpt(_) => "gpt",
        }
    }
}

/// Versioned envelope around one spec plus optional oracle settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecFile {
    pub version: u32,
    pub spec: Spec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOverrides>,
}

fn read_value(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn from_value<T: DeserializeOwned>(path: &Path, value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value)
        .map_err(|e| Error::validation(format!("schema violation in {}: {e}", path.display())))
}

/// Parses any JSON document under `T`'s schema.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_value(path, read_value(path)?)
}

/// Reads either a [`GameSpecFile`] envelope (recognized by its `version`
/// field) or a bare spec body, which is parsed with `bare`.
pub fn load_spec(
    path: &Path,
    bare: fn(serde_json::Value) -> serde_json::Result<Spec>,
) -> Result<GameSpecFile> {
    let value = read_value(path)?;
    if value.get("version").is_some() {
        let file: GameSpecFile = from_value(path, value)?;
        if file.version != SPEC_VERSION {
            return Err(Error::validation(format!(
                "unsupported spec version {}, expected {SPEC_VERSION}",
                file.version
            )));
        }
        Ok(file)
    } else {
        let spec = bare(value).map_err(|e| {
            Error::validation(format!("schema violation in {}: {e}", path.display()))
        })?;
        Ok(GameSpecFile {
            version: SPEC_VERSION,
            spec,
            oracle: None,
        })
    }
}

pub fn bare_divergence(v: serde_json::Value) -> serde_json::Result<Spec> {
    serde_json::from_value(v).map(Spec::Divergence)
}

pub fn bare_betting(v: serde_json::Value) -> serde_json::Result<Spec> {
    serde_json::from_value(v).map(Spec::Betting)
}

pub fn bare_conditional_betting(v: serde_json::Value) -> serde_json::Result<Spec> {
    serde_json::from_value(v).map(Spec::ConditionalBetting)
}

/// A bare betting body whose `p0` holds nested rows is a game with side
/// information.
pub fn bare_any_betting(v: serde_json::Value) -> serde_json::Result<Spec> {
    let joint = v
        .get("p0")
        .and_then(|p| p.get("mass"))
        .and_then(|m| m.get(0))
        .is_some_and(|first| first.is_array());
    if joint {
        bare_conditional_betting(v)
    } else {
        bare_betting(v)
    }
}

pub fn bare_gpt(v: serde_json::Value) -> serde_json::Result<Spec> {
    serde_json::from_value(v).map(Spec::Gpt)
}

/// Any bare body: `model` marks a GPT spec, `p0` a betting game and
/// anything else a divergence spec.
pub fn bare_any_spec(v: serde_json::Value) -> serde_json::Result<Spec> {
    if v.get("p0").is_some() || v.get("model").is_some() {
        bare_any_betting_or_gpt(v)
    } else {
        bare_divergence(v)
    }
}

/// A bare body with a `model` field is a GPT spec; anything else is a
/// betting game.
pub fn bare_any_betting_or_gpt(v: serde_json::Value) -> serde_json::Result<Spec> {
    if v.get("model").is_some() {
        bare_gpt(v)
    } else {
        bare_any_betting(v)
    }
}

/// Parses a list of PMFs given either as `[...]` or as `{"pmfs": [...]}`.
pub fn load_pmfs(path: &Path) -> Result<Vec<Pmf>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum PmfList {
        Bare(Vec<PmfDoc>),
        Wrapped { pmfs: Vec<PmfDoc> },
    }
    let docs = match load::<PmfList>(path)? {
        PmfList::Bare(d) => d,
        PmfList::Wrapped { pmfs } => pmfs,
    };
    docs.iter().map(PmfDoc::to_pmf).collect()
}
