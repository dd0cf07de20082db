//! Randomized verification suites shared by `verify-all` and the
//! acceptance tests.
//!
//! Every suite draws its instances from [`Sampler`] streams derived from
//! the configured seed and the instance index, evaluates them in parallel
//! and merges the results in index order, so a report depends on the
//! configuration only.

use std::time::Instant;

use rayon::prelude::*;
use renyi_bet_core::betting::{
    decompose_ice, multi_ice_conditional, multi_ice_unconditional, optimal_bets_conditional,
    optimal_bets_unconditional, risk_to_orders, side_info_gain, OddsProfile, RiskVector,
};
use renyi_bet_core::divergences::{
    conditioning_dpi_check, dpi_check, kl_divergence, kl_mixture_limit, main_system_dpi_check,
    path_orders, renyi_bivariate, renyi_conditional, renyi_multivariate, tropical_limit,
    validate_orders, PathSpec,
};
use renyi_bet_core::gpt::{
    advantage_ratio, advantage_ratio_with, embed, informativeness_monotone, outcome_joint,
    postprocess_measurement, sb_optimal_log_ice, sb_risk_neutral_optimum, sd_success,
    trace_product, uninformative, GptModel, HermitianMatrix, Measurement, StateEnsemble,
};
use renyi_bet_core::prob::{CondPmf, JointPmf, Pmf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{
    brute_force_optimal_bets, brute_force_optimal_bets_conditional, exhaustive_postprocessing,
    exhaustive_risk_neutral, log_ice_definition, log_ice_definition_conditional, monte_carlo_ice,
    McGame, OracleConfig, Sampler,
};
use crate::real::Real;

/// Failure messages kept per suite.
const MAX_DETAILS: usize = 8;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub id: String,
    pub title: String,
    pub checks: usize,
    pub failures: usize,
    /// Smallest `allowed − observed` over all checks; negative on failure.
    pub worst_margin: Real,
    pub elapsed_s: Real,
    pub time_limit_s: Option<Real>,
    pub passed: bool,
    pub details: Vec<String>,
}

impl SuiteReport {
    /// One line for logs and the acceptance output.
    pub fn line(&self) -> String {
        let limit = match self.time_limit_s {
            Some(l) => format!(" (limit {} s)", l.0),
            None => String::new(),
        };
        format!(
            "[{}] {} {}: {}/{} checks passed, worst margin {:.3e}, {:.2} s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks - self.failures,
            self.checks,
            self.worst_margin.0,
            self.elapsed_s.0,
            limit
        )
    }
}

/// Single check: `margin = allowed − observed`, passing when
/// nonnegative.
struct Check {
    label: String,
    margin: f64,
}

fn within(label: impl Into<String>, a: f64, b: f64, tol: f64) -> Check {
    let dev = (a - b).abs();
    let margin = if dev.is_nan() {
        f64::NEG_INFINITY
    } else {
        tol - dev
    };
    Check {
        label: format!(
            "{}: |{a:.12e} − {b:.12e}| = {dev:.3e} > {tol:.1e}",
            label.into()
        ),
        margin,
    }
}

/// `lhs ≥ rhs − tol`.
fn at_least(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Check {
    let margin = if lhs == f64::INFINITY {
        tol
    } else {
        lhs - rhs + tol
    };
    Check {
        label: format!("{}: {lhs:.12e} < {rhs:.12e} − {tol:.1e}", label.into()),
        margin: if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        },
    }
}

fn holds(label: impl Into<String>, ok: bool) -> Check {
    Check {
        label: label.into(),
        margin: if ok { f64::INFINITY } else { f64::NEG_INFINITY },
    }
}

fn error_check(label: &str, e: &Error) -> Check {
    Check {
        label: format!("{label}: {e}"),
        margin: f64::NEG_INFINITY,
    }
}

struct Tally {
    id: String,
    title: String,
    start: Instant,
    limit: Option<f64>,
    checks: usize,
    failures: usize,
    worst: f64,
    details: Vec<String>,
}

impl Tally {
    fn new(id: &str, title: &str, limit: Option<f64>) -> Self {
        Tally {
            id: id.into(),
            title: title.into(),
            start: Instant::now(),
            limit,
            checks: 0,
            failures: 0,
            worst: f64::INFINITY,
            details: Vec::new(),
        }
    }

    fn add(&mut self, c: Check) {
        self.checks += 1;
        self.worst = self.worst.min(c.margin);
        if !(c.margin >= 0.0) {
            self.failures += 1;
            if self.details.len() < MAX_DETAILS {
                self.details.push(c.label);
            }
        }
    }

    fn extend(&mut self, results: Vec<Result<Vec<Check>>>, label: &str) {
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(checks) => checks.into_iter().for_each(|c| self.add(c)),
                Err(e) => self.add(error_check(&format!("{label} {i}"), &e)),
            }
        }
    }

    fn finish(self) -> SuiteReport {
        let elapsed = self.start.elapsed().as_secs_f64();
        let in_time = self.limit.is_none_or(|l| elapsed < l);
        let mut details = self.details;
        if !in_time {
            details.push(format!("took {elapsed:.2} s"));
        }
        SuiteReport {
            id: self.id,
            title: self.title,
            checks: self.checks,
            failures: self.failures,
            worst_margin: Real(if self.checks == 0 { 0.0 } else { self.worst }),
            elapsed_s: Real(elapsed),
            time_limit_s: self.limit.map(Real),
            passed: self.failures == 0 && self.checks > 0 && in_time,
            details,
        }
    }
}

/// Runs `f` on instances `0..count` in parallel, each with its own
/// sampler stream.
fn par_instances<F>(cfg: &OracleConfig, suite: u64, count: usize, f: F) -> Vec<Result<Vec<Check>>>
where
    F: Fn(&mut Sampler, usize) -> Result<Vec<Check>> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut s = Sampler::new(cfg.seed, (suite << 32) | i as u64);
            f(&mut s, i)
        })
        .collect()
}

fn dims(s: &mut Sampler) -> (usize, usize) {
    (2 + s.index(3), 1 + s.index(3))
}

fn bets(s: &mut Sampler, n: usize, d: usize) -> Vec<Pmf> {
    (0..d).map(|_| s.pmf(n)).collect()
}

fn cond_bets(s: &mut Sampler, n_g: usize, n: usize, d: usize) -> Vec<CondPmf> {
    (0..d).map(|_| s.cond(n_g, n)).collect()
}

/// Risk vector of the requested case.
fn risk_of_case(s: &mut Sampler, d: usize, averse: bool) -> RiskVector {
    if averse {
        s.risk_averse(d, 4.0)
    } else {
        s.risk_tolerant(d)
    }
}

/// Instances per criterion.
pub const IDENTITY_INSTANCES: usize = 500;
pub const SEARCH_INSTANCES: usize = 100;
pub const DPI_INSTANCES: usize = 200;
pub const SWEEP_INSTANCES: usize = 20;
pub const SWEEP_POINTS: usize = 50;
pub const MC_INSTANCES: usize = 20;
pub const MONOTONE_KERNELS: usize = 200;
pub const SD_INSTANCES: usize = 50;
pub const SIDE_INFO_INSTANCES: usize = 500;

/// The log certainty equivalent equals its recomposition from divergence,
/// penalty and fairness terms.
pub fn decomposition_identity(cfg: &OracleConfig) -> SuiteReport {
    let tol = cfg.tolerances.identity;
    let mut t = Tally::new("1", "decomposition identity", Some(10.0));
    let results = par_instances(cfg, 1, IDENTITY_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let risk = risk_of_case(s, d, i % 2 == 0);
        let p0 = s.pmf(n);
        let odds = s.odds(n, d);
        let b = bets(s, n, d);
        let report = decompose_ice(&p0, &odds, &b, &risk)?;
        let direct = log_ice_definition(&p0, &odds, &b, &risk);
        Ok(vec![
            within(
                format!("instance {i} recomposed"),
                report.recomposed,
                report.log_ice,
                tol,
            ),
            within(
                format!("instance {i} definition"),
                report.recomposed,
                direct,
                tol,
            ),
        ])
    });
    t.extend(results, "instance");
    t.finish()
}

/// Closed-form optimal bets against the grid and Dirichlet search, with
/// and without side information.
pub fn optimal_bets_vs_search(cfg: &OracleConfig) -> SuiteReport {
    let tol = &cfg.tolerances;
    let mut t = Tally::new("2", "optimal bets against search oracle", Some(60.0));
    let uncond = par_instances(cfg, 2, SEARCH_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let risk = risk_of_case(s, d, i % 2 == 0);
        let p0 = s.pmf(n);
        let odds = s.odds(n, d);
        let (closed_bets, closed) = optimal_bets_unconditional(&p0, &odds, &risk)?;
        let achieved = log_ice_definition(&p0, &odds, &closed_bets, &risk);
        let (_, found) = brute_force_optimal_bets(&p0, &odds, &risk, cfg, (2 << 32) | i as u64)?;
        Ok(vec![
            at_least(
                format!("unconditional {i} closed beats search"),
                achieved,
                found,
                tol.search_soundness,
            ),
            at_least(
                format!("unconditional {i} search recovers"),
                found,
                closed,
                tol.search_completeness,
            ),
            within(
                format!("unconditional {i} claimed value"),
                achieved,
                closed,
                tol.identity,
            ),
        ])
    });
    t.extend(uncond, "unconditional");
    let cond = par_instances(cfg, 3, SEARCH_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let n_g = 2 + s.index(2);
        let risk = risk_of_case(s, d, i % 2 == 0);
        let joint = s.joint(n, n_g);
        let odds = s.odds(n, d);
        let (closed_bets, closed) = optimal_bets_conditional(&joint, &odds, &risk)?;
        let achieved = log_ice_definition_conditional(&joint, &odds, &closed_bets, &risk);
        let (_, found) =
            brute_force_optimal_bets_conditional(&joint, &odds, &risk, cfg, (3 << 32) | i as u64)?;
        Ok(vec![
            at_least(
                format!("conditional {i} closed beats search"),
                achieved,
                found,
                tol.search_soundness,
            ),
            at_least(
                format!("conditional {i} search recovers"),
                found,
                closed,
                tol.search_completeness,
            ),
            within(
                format!("conditional {i} claimed value"),
                achieved,
                closed,
                tol.identity,
            ),
        ])
    });
    t.extend(cond, "conditional");
    t.finish()
}

/// Values computed by `scripts/fixtures.py` at 40 digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceValues {
    pub conditional_optimum_j: f64,
    pub ice_r2_b0634: f64,
    pub kl_p_u: f64,
    pub log_ice_r2_uniform_bet: f64,
    pub optimal_bet_r2: [f64; 2],
    pub optimal_log_ice_r2: f64,
    pub penalty_r2_uniform_bet: f64,
    pub qubit_advantage_ratio: f64,
    pub qubit_conditional: f64,
    pub renyi_bivariate_alpha2: f64,
    pub renyi_multivariate_half_quarter_quarter: f64,
    pub tropical_p_u: f64,
    pub unconditional_optimum_j: f64,
}

impl ReferenceValues {
    pub fn frozen() -> Self {
        serde_json::from_str(include_str!("../tests/data/fixtures.json"))
            .expect("checked-in reference values parse")
    }
}

/// Published rounded values of three reference quantities.
pub const LITERAL_BIVARIATE: f64 = 0.223144;
pub const LITERAL_MULTIVARIATE: f64 = 0.069336;
pub const LITERAL_QUBIT_CONDITIONAL: f64 = 0.158358;

/// Two-state qubit ensemble `{(½, |0⟩⟨0|), (½, |+⟩⟨+|)}` measured in the
/// computational basis.
pub struct QubitFixture {
    pub model: GptModel,
    pub ensemble: StateEnsemble,
    pub measurement: Measurement,
}

impl QubitFixture {
    pub fn new() -> Result<Self> {
        let model = GptModel::quantum(2)?;
        let zero = HermitianMatrix::projector(&[1.0, 0.0], &[0.0, 0.0])?;
        let one = HermitianMatrix::projector(&[0.0, 1.0], &[0.0, 0.0])?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = HermitianMatrix::projector(&[h, h], &[0.0, 0.0])?;
        let states = vec![model.density_state(&zero)?, model.density_state(&plus)?];
        let ensemble = StateEnsemble::new(&model, Pmf::uniform(2)?, states)?;
        let measurement = model.povm(&[zero, one])?;
        Ok(QubitFixture {
            model,
            ensemble,
            measurement,
        })
    }

    /// Conditional divergence of `p(x|a)` and the uniform PMF given
    /// `p(a)` at orders `(½, ½)` and `β = ½`.
    pub fn conditional_divergence(&self) -> Result<f64> {
        let parts = outcome_joint(&self.measurement, &self.ensemble)?.decompose();
        let orders = validate_orders(&[0.5, 0.5])?;
        let refs = CondPmf::constant(Pmf::uniform(2)?, parts.p_g.len())?;
        Ok(renyi_conditional(
            &orders,
            0.5,
            &[parts.conditional, refs],
            &parts.p_g,
            None,
        )?)
    }
}

/// How [`reference_fixtures`] judges agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureMode {
    /// The published rounded values, matched by both the frozen
    /// high-precision references and the library.
    Published,
    /// The library against every frozen high-precision reference.
    Frozen,
}

fn pmf(v: &[f64]) -> Result<Pmf> {
    Ok(Pmf::new(v.to_vec())?)
}

/// Library values keyed like [`ReferenceValues`].
fn library_values() -> Result<Vec<(&'static str, f64)>> {
    let p = pmf(&[0.75, 0.25])?;
    let u = Pmf::uniform(2)?;
    let qubit = QubitFixture::new()?;
    let fair = OddsProfile::constant(2, 1, 2.0)?;
    let r2 = RiskVector::new(vec![2.0])?;
    let (opt_bets, opt_value) = optimal_bets_unconditional(&p, &fair, &r2)?;
    let uniform_bet = decompose_ice(&p, &fair, std::slice::from_ref(&u), &r2)?;
    let ice_0634 = multi_ice_unconditional(&p, &fair, &[pmf(&[0.634, 0.366])?], &r2)?;
    let j = JointPmf::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]])?;
    let (_, cond_opt) = optimal_bets_conditional(&j, &fair, &r2)?;
    let (_, uncond_opt) = optimal_bets_unconditional(&j.marginal_x(), &fair, &r2)?;
    let orders = validate_orders(&[0.5, 0.25, 0.25])?;
    Ok(vec![
        ("renyi_bivariate_alpha2", renyi_bivariate(2.0, &p, &u)?),
        ("kl_p_u", kl_divergence(&p, &u)?),
        (
            "renyi_multivariate_half_quarter_quarter",
            renyi_multivariate(&orders, &[p.clone(), u.clone(), u.clone()], None)?,
        ),
        ("qubit_conditional", qubit.conditional_divergence()?),
        (
            "qubit_advantage_ratio",
            advantage_ratio(
                &qubit.model,
                &qubit.measurement,
                &qubit.ensemble,
                &fair,
                &r2,
            )?,
        ),
        (
            "tropical_p_u",
            tropical_limit(&[1.0], &[p.clone(), u.clone()])?,
        ),
        ("optimal_bet_r2[0]", opt_bets[0].get(0)),
        ("optimal_bet_r2[1]", opt_bets[0].get(1)),
        ("optimal_log_ice_r2", opt_value),
        ("ice_r2_b0634", ice_0634),
        ("log_ice_r2_uniform_bet", uniform_bet.log_ice),
        (
            "penalty_r2_uniform_bet",
            uniform_bet.penalty_terms[0].penalty,
        ),
        ("conditional_optimum_j", cond_opt),
        ("unconditional_optimum_j", uncond_opt),
    ])
}

fn reference_of(r: &ReferenceValues, key: &str) -> f64 {
    match key {
        "renyi_bivariate_alpha2" => r.renyi_bivariate_alpha2,
        "kl_p_u" => r.kl_p_u,
        "renyi_multivariate_half_quarter_quarter" => r.renyi_multivariate_half_quarter_quarter,
        "qubit_conditional" => r.qubit_conditional,
        "qubit_advantage_ratio" => r.qubit_advantage_ratio,
        "tropical_p_u" => r.tropical_p_u,
        "optimal_bet_r2[0]" => r.optimal_bet_r2[0],
        "optimal_bet_r2[1]" => r.optimal_bet_r2[1],
        "optimal_log_ice_r2" => r.optimal_log_ice_r2,
        "ice_r2_b0634" => r.ice_r2_b0634,
        "log_ice_r2_uniform_bet" => r.log_ice_r2_uniform_bet,
        "penalty_r2_uniform_bet" => r.penalty_r2_uniform_bet,
        "conditional_optimum_j" => r.conditional_optimum_j,
        "unconditional_optimum_j" => r.unconditional_optimum_j,
        _ => f64::NAN,
    }
}

pub fn reference_fixtures(cfg: &OracleConfig, mode: FixtureMode) -> SuiteReport {
    let mut t = Tally::new("3", "reference fixtures", None);
    let refs = ReferenceValues::frozen();
    let values = match library_values() {
        Ok(v) => v,
        Err(e) => {
            t.add(error_check("library", &e));
            return t.finish();
        }
    };
    match mode {
        FixtureMode::Published => {
            let tol = cfg.tolerances.fixture;
            for (key, literal) in [
                ("renyi_bivariate_alpha2", LITERAL_BIVARIATE),
                (
                    "renyi_multivariate_half_quarter_quarter",
                    LITERAL_MULTIVARIATE,
                ),
                ("qubit_conditional", LITERAL_QUBIT_CONDITIONAL),
            ] {
                let lib = values
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map_or(f64::NAN, |v| v.1);
                t.add(within(
                    format!("{key} reference"),
                    reference_of(&refs, key),
                    literal,
                    tol,
                ));
                t.add(within(format!("{key} library"), lib, literal, tol));
            }
        }
        FixtureMode::Frozen => {
            for (key, lib) in values {
                t.add(within(
                    key,
                    lib,
                    reference_of(&refs, key),
                    cfg.tolerances.identity,
                ));
            }
        }
    }
    t.finish()
}

/// Data processing under a kernel on all arguments, on the main system
/// given the condition, and on the conditioning system.
pub fn data_processing(cfg: &OracleConfig) -> SuiteReport {
    let tol = cfg.tolerances.inequality;
    let mut t = Tally::new("4", "data processing inequalities", Some(30.0));
    let plain = par_instances(cfg, 4, DPI_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let m = 1 + s.index(4);
        let orders = s.orders(d);
        let pmfs: Vec<Pmf> = (0..=d).map(|_| s.pmf(n)).collect();
        let op = s.kernel(n, m);
        let r = dpi_check(&orders, &pmfs, &op)?;
        Ok(vec![at_least(format!("plain {i}"), r.before, r.after, tol)])
    });
    t.extend(plain, "plain");
    let main = par_instances(cfg, 5, DPI_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let n_g = 2 + s.index(2);
        let m = 1 + s.index(4);
        let orders = s.orders(d);
        let beta = s.uniform(0.25, 4.0);
        let conds: Vec<CondPmf> = (0..=d).map(|_| s.cond(n_g, n)).collect();
        let p_g = s.pmf(n_g);
        let kernels: Vec<_> = (0..n_g).map(|_| s.kernel(n, m)).collect();
        let r = main_system_dpi_check(&orders, beta, &conds, &p_g, &kernels)?;
        Ok(vec![at_least(
            format!("main system {i}"),
            r.before,
            r.after,
            tol,
        )])
    });
    t.extend(main, "main system");
    let conditioning = par_instances(cfg, 6, DPI_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let n_g = 2 + s.index(3);
        let n_h = 1 + s.index(4);
        let (_, orders) = s.pivot_zero_orders(d);
        let p0 = s.cond(n_g, n);
        let refs = bets(s, n, d);
        let p_g = s.pmf(n_g);
        let op = s.kernel(n_g, n_h);
        let r = conditioning_dpi_check(&orders, &p0, &refs, &p_g, &op)?;
        Ok(vec![
            at_least(format!("conditioning {i}"), r.before, r.after, tol),
            at_least(
                format!("conditional over unconditional {i}"),
                r.before,
                r.unconditional,
                tol,
            ),
        ])
    });
    t.extend(conditioning, "conditioning");
    t.finish()
}

/// One row of an order-path sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub divergence: f64,
    pub kl_limit: f64,
    pub tropical_limit: f64,
}

/// `points` values of `λ` spread evenly over `[min, max]`, moved off the
/// excluded point `λ = 1`.
pub fn lambda_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::validation(format!(
            "lambda grid needs min < max and at least two points, got [{min}, {max}] with {points}"
        )));
    }
    Ok((0..points)
        .map(|i| {
            let l = min + (max - min) * i as f64 / (points - 1) as f64;
            if (l - 1.0).abs() < 1e-9 {
                1.0 + 1e-7
            } else {
                l
            }
        })
        .collect())
}

pub fn order_sweep(gammas: &[f64], pmfs: &[Pmf], lambdas: &[f64]) -> Result<Vec<SweepRow>> {
    let kl = kl_mixture_limit(gammas, pmfs)?;
    let tropical = tropical_limit(gammas, pmfs)?;
    lambdas
        .iter()
        .map(|&l| {
            let orders = path_orders(&PathSpec::new(gammas.to_vec(), l)?)?;
            Ok(SweepRow {
                lambda: l,
                divergence: renyi_multivariate(&orders, pmfs, None)?,
                kl_limit: kl,
                tropical_limit: tropical,
            })
        })
        .collect()
}

/// Linear extrapolation to `λ = 1` from two points on one side.
fn extrapolate(gammas: &[f64], pmfs: &[Pmf], side: f64) -> Result<f64> {
    let h = 1e-3;
    let at = |l: f64| -> Result<f64> {
        let orders = path_orders(&PathSpec::new(gammas.to_vec(), l)?)?;
        Ok(renyi_multivariate(&orders, pmfs, None)?)
    };
    Ok(2.0 * at(1.0 + side * h)? - at(1.0 + side * 2.0 * h)?)
}

pub fn order_path(cfg: &OracleConfig) -> SuiteReport {
    let tol = &cfg.tolerances;
    let mut t = Tally::new("5", "order-path monotonicity", None);
    let results = par_instances(cfg, 7, SWEEP_INSTANCES, |s, i| {
        let n = 2 + s.index(3);
        let pmfs: Vec<Pmf> = (0..3).map(|_| s.pmf(n)).collect();
        let gammas = s.pmf(2).into_inner();
        let grid = lambda_grid(PathSpec::lower_bound(&gammas), 20.0, SWEEP_POINTS)?;
        let rows = order_sweep(&gammas, &pmfs, &grid)?;
        let mut checks = Vec::new();
        for w in rows.windows(2) {
            checks.push(at_least(
                format!("instance {i} step λ = {}", w[1].lambda),
                w[1].divergence,
                w[0].divergence,
                tol.sweep_step,
            ));
        }
        for r in &rows {
            checks.push(at_least(
                format!("instance {i} tropical bound λ = {}", r.lambda),
                r.tropical_limit,
                r.divergence,
                tol.inequality,
            ));
        }
        let kl = rows[0].kl_limit;
        for side in [-1.0, 1.0] {
            checks.push(within(
                format!("instance {i} limit at 1 from side {side}"),
                extrapolate(&gammas, &pmfs, side)?,
                kl,
                tol.extrapolation,
            ));
        }
        Ok(checks)
    });
    t.extend(results, "instance");
    t.finish()
}

/// Analytic certainty equivalents against Monte-Carlo utility inversion.
pub fn monte_carlo(cfg: &OracleConfig) -> SuiteReport {
    let sigmas = cfg.tolerances.mc_sigmas;
    let mut t = Tally::new("6", "Monte-Carlo certainty equivalent", Some(120.0));
    // sampling is parallel inside each estimate
    let results: Vec<Result<Vec<Check>>> = (0..MC_INSTANCES)
        .map(|i| {
            let stream = (8u64 << 32) | i as u64;
            let mut s = Sampler::new(cfg.seed, stream);
            let (n, d) = dims(&mut s);
            let risk = risk_of_case(&mut s, d, i % 2 == 0);
            let odds = s.odds(n, d);
            let (analytic, est) = if i % 4 < 2 {
                let p0 = s.pmf(n);
                let b = bets(&mut s, n, d);
                let game = McGame::Unconditional {
                    p0: &p0,
                    odds: &odds,
                    bets: &b,
                };
                (
                    multi_ice_unconditional(&p0, &odds, &b, &risk)?,
                    monte_carlo_ice(game, &risk, cfg, stream)?,
                )
            } else {
                let n_g = 2 + s.index(2);
                let joint = s.joint(n, n_g);
                let b = cond_bets(&mut s, n_g, n, d);
                let game = McGame::Conditional {
                    joint: &joint,
                    odds: &odds,
                    bets: &b,
                };
                (
                    multi_ice_conditional(&joint, &odds, &b, &risk)?,
                    monte_carlo_ice(game, &risk, cfg, stream)?,
                )
            };
            Ok(vec![within(
                format!("instance {i} ({} samples)", est.samples),
                analytic,
                est.estimate,
                sigmas * est.stderr,
            )])
        })
        .collect();
    t.extend(results, "instance");
    t.finish()
}

/// A random model with an ensemble and a measurement on it.
struct GptDraw {
    model: GptModel,
    ensemble: StateEnsemble,
    measurement: Measurement,
}

fn classical_draw(s: &mut Sampler) -> Result<GptDraw> {
    let dim = 2 + s.index(2);
    let model = GptModel::classical(dim)?;
    let n_x = 2 + s.index(2);
    let n_a = 2 + s.index(3);
    let states = (0..n_x).map(|_| s.pmf(dim).into_inner()).collect();
    let ensemble = StateEnsemble::new(&model, s.pmf(n_x), states)?;
    let t = s.kernel(dim, n_a);
    let effects = (0..n_a)
        .map(|a| (0..dim).map(|i| t.get(a, i)).collect())
        .collect();
    let measurement = Measurement::new(&model, effects)?;
    Ok(GptDraw {
        model,
        ensemble,
        measurement,
    })
}

fn qubit_draw(s: &mut Sampler) -> Result<GptDraw> {
    let model = GptModel::quantum(2)?;
    let n_x = 2 + s.index(2);
    let n_a = 2 + s.index(3);
    let states = (0..n_x)
        .map(|_| model.density_state(&s.qubit_state()))
        .collect::<Result<Vec<_>, _>>()?;
    let ensemble = StateEnsemble::new(&model, s.pmf(n_x), states)?;
    let measurement = model.povm(&s.qubit_povm(n_a))?;
    Ok(GptDraw {
        model,
        ensemble,
        measurement,
    })
}

/// Nonnegativity, vanishing on uninformative measurements, monotonicity
/// under postprocessing and agreement with the log advantage ratio.
pub fn informativeness(cfg: &OracleConfig) -> SuiteReport {
    let tol = cfg.tolerances.identity;
    let ineq = cfg.tolerances.inequality;
    let mut t = Tally::new("7", "informativeness monotone axioms", None);
    for (suite, name, quantum) in [(9u64, "classical", false), (10, "qubit", true)] {
        let results = par_instances(cfg, suite, MONOTONE_KERNELS, |s, i| {
            let g = if quantum {
                qubit_draw(s)?
            } else {
                classical_draw(s)?
            };
            let n_x = g.ensemble.len();
            let d = 1 + s.index(2);
            let (risk, orders) = s.pivot_zero_orders(d);
            let refs = bets(s, n_x, d);
            let monotone = informativeness_monotone(&g.measurement, &g.ensemble, &refs, &orders)?;
            let n_b = 1 + s.index(4);
            let kernel = s.kernel(g.measurement.n_outcomes(), n_b);
            let processed = postprocess_measurement(&g.model, &g.measurement, &kernel)?;
            let after = informativeness_monotone(&processed, &g.ensemble, &refs, &orders)?;
            let n_eta = 1 + s.index(4);
            let eta = s.pmf(n_eta);
            let free = uninformative(&eta, &g.model)?;
            let at_free = informativeness_monotone(&free, &g.ensemble, &refs, &orders)?;
            let odds = s.odds(n_x, d);
            let ratio = advantage_ratio(&g.model, &g.measurement, &g.ensemble, &odds, &risk)?;
            let ratio_eta =
                advantage_ratio_with(&g.model, &g.measurement, &g.ensemble, &odds, &risk, &eta)?;
            let induced = informativeness_monotone(
                &g.measurement,
                &g.ensemble,
                &odds.induced_all(),
                &orders,
            )?;
            Ok(vec![
                at_least(format!("{name} {i} nonnegative"), monotone, 0.0, ineq),
                within(format!("{name} {i} free set"), at_free, 0.0, tol),
                at_least(format!("{name} {i} postprocessing"), monotone, after, ineq),
                within(
                    format!("{name} {i} log advantage ratio"),
                    ratio.ln(),
                    induced,
                    tol,
                ),
                within(
                    format!("{name} {i} reference measurement"),
                    ratio.ln(),
                    ratio_eta.ln(),
                    tol,
                ),
            ])
        });
        t.extend(results, name);
    }
    t.finish()
}

/// A risk-neutral gambler on one lottery with constant odds `C` earns
/// `C` times the optimal discrimination probability.
pub fn discrimination(cfg: &OracleConfig) -> SuiteReport {
    let tol = cfg.tolerances.identity;
    let mut t = Tally::new("8", "state-discrimination reduction", None);
    let fixture = || -> Result<Vec<Check>> {
        let q = QubitFixture::new()?;
        let c = 2.0;
        let sd = sd_success(&q.measurement, &q.ensemble)?;
        let neutral = sb_risk_neutral_optimum(&q.measurement, &q.ensemble, &[c, c])?;
        let guess = exhaustive_postprocessing(&q.measurement, &q.ensemble, cfg)?;
        let bet = exhaustive_risk_neutral(&q.measurement, &q.ensemble, &[c, c], cfg)?;
        Ok(vec![
            within("fixture success probability", sd, 0.75, tol),
            within("fixture risk-neutral optimum", neutral, 1.5, tol),
            within("fixture reduction", c * sd, neutral, tol),
            within("fixture enumerated guess", guess.value, sd, tol),
            within("fixture enumerated bet", bet.value, neutral, tol),
            holds(
                format!("fixture guess map {:?}", guess.map),
                guess.map == [0, 1],
            ),
        ])
    };
    match fixture() {
        Ok(c) => c.into_iter().for_each(|c| t.add(c)),
        Err(e) => t.add(error_check("fixture", &e)),
    }
    let results = par_instances(cfg, 11, SD_INSTANCES, |s, i| {
        let g = if i % 2 == 0 {
            qubit_draw(s)?
        } else {
            classical_draw(s)?
        };
        let c = s.uniform(1.0, 5.0);
        let odds = vec![c; g.ensemble.len()];
        let sd = sd_success(&g.measurement, &g.ensemble)?;
        let neutral = sb_risk_neutral_optimum(&g.measurement, &g.ensemble, &odds)?;
        let guess = exhaustive_postprocessing(&g.measurement, &g.ensemble, cfg)?;
        let bet = exhaustive_risk_neutral(&g.measurement, &g.ensemble, &odds, cfg)?;
        Ok(vec![
            within(format!("instance {i} reduction"), c * sd, neutral, tol),
            within(
                format!("instance {i} enumerated guess"),
                guess.value,
                sd,
                tol,
            ),
            within(
                format!("instance {i} enumerated bet"),
                bet.value,
                neutral,
                tol,
            ),
        ])
    });
    t.extend(results, "instance");
    t.finish()
}

/// `ε`-smoothed perfectly correlated joint on two outcomes.
pub fn correlated_joint(eps: f64) -> Result<JointPmf> {
    let a = 0.5 * (1.0 - eps) + 0.25 * eps;
    let b = 0.25 * eps;
    Ok(JointPmf::from_rows(&[vec![a, b], vec![b, a]])?)
}

pub const CORRELATED_EPS: f64 = 0.01;

pub fn side_information(cfg: &OracleConfig) -> SuiteReport {
    let tol = &cfg.tolerances;
    let mut t = Tally::new("9", "side-information gain", None);
    let results = par_instances(cfg, 12, SIDE_INFO_INSTANCES, |s, i| {
        let (n, d) = dims(s);
        let n_g = 1 + s.index(4);
        let risk = risk_of_case(s, d, i % 2 == 0);
        let joint = s.joint(n, n_g);
        let odds = s.odds(n, d);
        let gain = side_info_gain(&joint, &odds, &risk)?;
        Ok(vec![at_least(
            format!("instance {i}"),
            gain,
            0.0,
            tol.inequality,
        )])
    });
    t.extend(results, "instance");
    let strict = || -> Result<Check> {
        let joint = correlated_joint(CORRELATED_EPS)?;
        let odds = OddsProfile::constant(2, 1, 2.0)?;
        let risk = RiskVector::new(vec![2.0])?;
        let gain = side_info_gain(&joint, &odds, &risk)?;
        Ok(Check {
            label: format!(
                "correlated fixture gain {gain:.6e} ≤ {:.1e}",
                tol.strict_gain
            ),
            margin: if gain > tol.strict_gain {
                gain - tol.strict_gain
            } else {
                (gain - tol.strict_gain).min(-f64::MIN_POSITIVE)
            },
        })
    };
    match strict() {
        Ok(c) => t.add(c),
        Err(e) => t.add(error_check("correlated fixture", &e)),
    }
    t.finish()
}

/// Random risk vectors map to admissible orders and back.
pub fn random_orders(cfg: &OracleConfig) -> SuiteReport {
    let mut t = Tally::new("orders", "random risk vectors give admissible orders", None);
    let results = par_instances(cfg, 13, 10_000, |s, i| {
        let d = 1 + s.index(3);
        let risk = s.risk(d);
        let orders = risk_to_orders(&risk)?;
        validate_orders(orders.alphas())?;
        Ok(vec![holds(format!("instance {i}"), true)])
    });
    t.extend(results, "instance");
    t.finish()
}

/// Embedded inner products against direct traces on random qubit pairs.
pub fn born_rule(cfg: &OracleConfig) -> SuiteReport {
    let mut t = Tally::new("born", "embedded inner product matches the trace", None);
    let results = par_instances(cfg, 14, 200, |s, i| {
        let rho = s.qubit_state();
        let e = s.qubit_povm(2).remove(0);
        let direct = trace_product(&e, &rho)?;
        let embedded: f64 = embed(&e).iter().zip(embed(&rho)).map(|(a, b)| a * b).sum();
        Ok(vec![within(
            format!("instance {i}"),
            embedded,
            direct,
            1e-10,
        )])
    });
    t.extend(results, "instance");
    t.finish()
}

/// State-betting optimum of the classical embedding against the plain
/// conditional game on the same joint.
pub fn classical_embedding(cfg: &OracleConfig) -> SuiteReport {
    let mut t = Tally::new(
        "embedding",
        "classical embedding matches the betting game",
        None,
    );
    let results = par_instances(cfg, 15, 100, |s, i| {
        let n = 2 + s.index(3);
        let d = 1 + s.index(3);
        let model = GptModel::classical(n)?;
        let vertices = (0..n)
            .map(|x| Pmf::point(n, x).map(Pmf::into_inner))
            .collect::<Result<Vec<_>, _>>()?;
        let prior = s.pmf(n);
        let ensemble = StateEnsemble::new(&model, prior.clone(), vertices)?;
        let n_a = 2 + s.index(3);
        let kernel = s.kernel(n, n_a);
        let effects = (0..n_a)
            .map(|a| (0..n).map(|x| kernel.get(a, x)).collect())
            .collect();
        let m = Measurement::new(&model, effects)?;
        let risk = s.risk(d);
        let odds = s.odds(n, d);
        let sb = sb_optimal_log_ice(&m, &ensemble, &odds, &risk)?;
        let mass = (0..n)
            .flat_map(|x| (0..n_a).map(move |a| (x, a)))
            .map(|(x, a)| prior.get(x) * kernel.get(a, x))
            .collect();
        let joint = JointPmf::new(n, n_a, mass)?.without_null_columns();
        let (_, direct) = optimal_bets_conditional(&joint, &odds, &risk)?;
        Ok(vec![within(format!("instance {i}"), sb, direct, 1e-12)])
    });
    t.extend(results, "instance");
    t.finish()
}

/// Every acceptance criterion in order, fixtures judged by `mode`.
pub fn criteria(cfg: &OracleConfig, mode: FixtureMode) -> Vec<SuiteReport> {
    vec![
        decomposition_identity(cfg),
        optimal_bets_vs_search(cfg),
        reference_fixtures(cfg, mode),
        data_processing(cfg),
        order_path(cfg),
        monte_carlo(cfg),
        informativeness(cfg),
        discrimination(cfg),
        side_information(cfg),
    ]
}

/// The criteria with frozen fixtures plus the supporting suites.
pub fn verify_all(cfg: &OracleConfig) -> Vec<SuiteReport> {
    let mut v = criteria(cfg, FixtureMode::Frozen);
    v.push(random_orders(cfg));
    v.push(born_rule(cfg));
    v.push(classical_embedding(cfg));
    v
}
