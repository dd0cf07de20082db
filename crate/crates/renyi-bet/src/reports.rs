//! JSON reports emitted by the command line. Log-scale fields follow the
//! report's `units`; everything else is unitless.

use renyi_bet_core::betting::{BettingProfile, DecompositionReport};
use renyi_bet_core::divergences::{OrderCase, OrderVector};
use renyi_bet_core::prob::{CondPmf, JointPmf, Pmf};
use serde::{Deserialize, Serialize};

use crate::oracles::{DeterministicOptimum, McEstimate};
use crate::real::{Real, Units};
use crate::suites::{SuiteReport, SweepRow};

pub fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

pub fn case_name(case: OrderCase) -> String {
    match case {
        OrderCase::I => "I".into(),
        OrderCase::II => "II".into(),
    }
}

/// Bets per lottery, `[k][x]` or `[k][g][x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bets {
    Unconditional(Vec<Vec<Real>>),
    Conditional(Vec<Vec<Vec<Real>>>),
}

impl Bets {
    pub fn from_pmfs(b: &[Pmf]) -> Self {
        Bets::Unconditional(b.iter().map(|p| reals(p.mass())).collect())
    }

    pub fn from_conds(b: &[CondPmf]) -> Self {
        Bets::Conditional(
            b.iter()
                .map(|c| c.rows().iter().map(|r| reals(r.mass())).collect())
                .collect(),
        )
    }

    pub fn from_profile(p: &BettingProfile) -> Self {
        match p {
            BettingProfile::Unconditional(b) => Self::from_pmfs(b),
            BettingProfile::Conditional(b) => Self::from_conds(b),
        }
    }
}

pub fn joint_rows(j: &JointPmf) -> Vec<Vec<Real>> {
    j.rows().iter().map(|r| reals(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceReport {
    pub divergence: Real,
    pub case: String,
    pub pivot: usize,
    pub orders: Vec<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Real>,
    pub units: Units,
}

impl DivergenceReport {
    pub fn new(
        value: f64,
        orders: &OrderVector,
        pivot: usize,
        beta: Option<f64>,
        units: Units,
    ) -> Self {
        DivergenceReport {
            divergence: units.log(value),
            case: case_name(orders.case()),
            pivot,
            orders: reals(orders.alphas()),
            beta: beta.map(Real),
            units,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpiCheckReport {
    pub mode: String,
    pub before: Real,
    pub after: Real,
    /// `before − after`.
    pub slack: Real,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unconditional: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unconditional_holds: Option<bool>,
    pub tolerance: Real,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub lambda: Real,
    pub divergence: Real,
    pub kl_limit: Real,
    pub tropical_limit: Real,
}

impl SweepPoint {
    pub fn new(r: &SweepRow, units: Units) -> Self {
        SweepPoint {
            lambda: Real(r.lambda),
            divergence: units.log(r.divergence),
            kl_limit: units.log(r.kl_limit),
            tropical_limit: units.log(r.tropical_limit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub rows: Vec<SweepPoint>,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IceReport {
    pub ice: Real,
    pub log_ice: Real,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeReport {
    pub optimal_bets: Bets,
    pub ice: Real,
    pub log_ice: Real,
    pub orders: Vec<Real>,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyReport {
    pub order: Real,
    pub coefficient: Real,
    pub penalty: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeReport {
    pub orders: Vec<Real>,
    pub log_ice: Real,
    pub recomposed: Real,
    /// `recomposed − log_ice`.
    pub gap: Real,
    pub divergence_term: Real,
    pub divergence_term_default_pivot: Option<Real>,
    pub penalty_terms: Vec<PenaltyReport>,
    pub fairness_terms: Vec<Real>,
    pub optimal_log_ice: Real,
    pub optimal_bets: Bets,
    /// Equality without side information, `gap ≥ 0` with it.
    pub holds: bool,
    pub tolerance: Real,
    pub units: Units,
}

impl DecomposeReport {
    pub fn new(r: &DecompositionReport, holds: bool, tolerance: f64, units: Units) -> Self {
        DecomposeReport {
            orders: reals(r.orders.alphas()),
            log_ice: units.log(r.log_ice),
            recomposed: units.log(r.recomposed),
            gap: units.log(r.gap()),
            divergence_term: units.log(r.divergence_term),
            divergence_term_default_pivot: r.divergence_term_default_pivot.map(|v| units.log(v)),
            penalty_terms: r
                .penalty_terms
                .iter()
                .map(|t| PenaltyReport {
                    order: Real(t.order),
                    coefficient: Real(t.coefficient),
                    penalty: units.log(t.penalty),
                })
                .collect(),
            fairness_terms: r.fairness_terms.iter().map(|&v| units.log(v)).collect(),
            optimal_log_ice: units.log(r.optimal_log_ice),
            optimal_bets: Bets::from_profile(&r.optimal_bets),
            holds,
            tolerance: Real(tolerance),
            units,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideInfoReport {
    pub conditional_optimum: Real,
    pub unconditional_optimum: Real,
    pub gain: Real,
    pub holds: bool,
    pub tolerance: Real,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GptBetReport {
    /// `p(x, a)`, rows `x`.
    pub outcome_joint: Vec<Vec<Real>>,
    pub sd_success: Real,
    pub optimal_log_ice: Real,
    pub advantage_ratio: Real,
    /// Present when the orders of the risk vector have their largest
    /// entry first.
    pub monotone: Option<Real>,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdReport {
    pub outcome_joint: Vec<Vec<Real>>,
    pub sd_success: Real,
    /// Most likely state for each outcome.
    pub guesses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneReport {
    pub monotone: Real,
    pub orders: Vec<Real>,
    pub holds: bool,
    pub tolerance: Real,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchReport {
    pub closed_form_log_ice: Real,
    pub search_log_ice: Real,
    pub search_bets: Bets,
    /// Search value ≤ closed form + soundness tolerance.
    pub sound: bool,
    /// Search value ≥ closed form − completeness tolerance.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloReport {
    pub analytic: Real,
    pub estimate: Real,
    pub stderr: Real,
    pub samples: usize,
    pub within: bool,
}

impl MonteCarloReport {
    pub fn new(analytic: f64, e: &McEstimate, sigmas: f64) -> Self {
        MonteCarloReport {
            analytic: Real(analytic),
            estimate: Real(e.estimate),
            stderr: Real(e.stderr),
            samples: e.samples,
            within: (analytic - e.estimate).abs() <= sigmas * e.stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerationReport {
    pub map: Vec<usize>,
    pub value: Real,
    pub evaluated: u64,
    pub closed_form: Real,
    pub agrees: bool,
}

impl EnumerationReport {
    pub fn new(o: &DeterministicOptimum, closed_form: f64, tol: f64) -> Self {
        EnumerationReport {
            map: o.map.clone(),
            value: Real(o.value),
            evaluated: o.evaluated,
            closed_form: Real(closed_form),
            agrees: (o.value - closed_form).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub kind: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrimination: Option<EnumerationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<serde_json::Value>,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites_passed: usize,
    pub suites_failed: usize,
    pub checks: usize,
    pub failures: usize,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn new(seed: u64, suites: Vec<SuiteReport>) -> Self {
        let suites_passed = suites.iter().filter(|s| s.passed).count();
        VerifyReport {
            seed,
            passed: suites_passed == suites.len(),
            suites_passed,
            suites_failed: suites.len() - suites_passed,
            checks: suites.iter().map(|s| s.checks).sum(),
            failures: suites.iter().map(|s| s.failures).sum(),
            suites,
        }
    }
}
