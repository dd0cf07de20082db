//! The `renyi-bet` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use renyi_bet_core::betting::{
    decompose_ice, decompose_ice_conditional, multi_ice_conditional, multi_ice_unconditional,
    optimal_bets_conditional, optimal_bets_unconditional, risk_to_orders,
};
use renyi_bet_core::divergences::{
    conditioning_dpi_check, dpi_check, main_system_dpi_check, renyi_conditional,
    renyi_multivariate, validate_orders, OrderVector, PathSpec,
};
use renyi_bet_core::gpt::{
    advantage_ratio, advantage_ratio_with, informativeness_monotone, map_guess, outcome_joint,
    sb_optimal_log_ice, sd_success,
};
use renyi_bet_core::prob::CondPmf;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result, EXIT_OK, EXIT_VALIDATION, EXIT_VIOLATION};
use crate::io::{self, GameSpecFile, JointDoc, KernelDoc, PmfDoc, Spec};
use crate::oracles::{
    brute_force_optimal_bets, brute_force_optimal_bets_conditional, exhaustive_postprocessing,
    monte_carlo_ice, random_instance, Instance, InstanceKind, McGame, OracleConfig,
};
use crate::real::{round_significant, Real, Units};
use crate::reports::*;
use crate::suites::{self, lambda_grid, order_sweep};

/// Tolerance of the inequality and identity checks when `--tolerance` is
/// not given.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "renyi-bet",
    version,
    about = "Multivariate Rényi divergences, multi-lottery betting games and state betting"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report log-scale quantities in bits.
    #[arg(long, global = true)]
    pub bits: bool,
    /// Seed of every random draw.
    #[arg(long, global = true, env = "RENYI_BET_SEED")]
    pub seed: Option<u64>,
    /// Output format; `sweep` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Slack allowed on inequality and identity checks.
    #[arg(long, global = true, value_name = "T")]
    pub tolerance: Option<f64>,
    /// Oracle configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Monte-Carlo sample count.
    #[arg(long, global = true, value_name = "N")]
    pub mc_samples: Option<usize>,
    /// Bet-grid spacing.
    #[arg(long, global = true, value_name = "H")]
    pub grid_res: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DpiMode {
    /// One kernel applied to every PMF.
    Plain,
    /// One kernel per condition applied to the main system.
    Main,
    /// A kernel on the conditioning system.
    Conditioning,
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Spec file: a versioned envelope or a bare spec body.
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Orders, comma separated; overrides the spec file.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Option<Vec<f64>>,
    /// Index whose order sets the prefactor, instead of the largest.
    #[arg(long)]
    pub pivot: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multivariate Rényi divergence of a list of PMFs.
    Div {
        #[command(flatten)]
        orders: OrderArgs,
        /// PMF list, `[{"mass": [...]}, ...]` or `{"pmfs": [...]}`.
        #[arg(long, value_name = "PATH", conflicts_with = "spec")]
        pmfs: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
    },
    /// Conditional multivariate Rényi divergence.
    CondDiv {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        orders: OrderArgs,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Both sides of a data processing inequality.
    DpiCheck {
        #[command(flatten)]
        spec: SpecArg,
        /// Inferred from the spec file when omitted.
        #[arg(long, value_enum)]
        mode: Option<DpiMode>,
    },
    /// Divergence along the order path `(λ, (1−λ)γ)`.
    Sweep {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Certainty equivalent of given bets.
    Ice {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Optimal bets and their certainty equivalent.
    Optimize {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Divergence, penalty and fairness terms of the log certainty
    /// equivalent of given bets.
    Decompose {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Gain of the optimal log certainty equivalent from side
    /// information.
    SideInfo {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// State-betting game on a measured ensemble.
    GptBet {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Optimal state-discrimination probability.
    Sd {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Informativeness monotone of a measurement.
    Monotone {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Check a spec against the brute-force oracles, or draw a random
    /// instance.
    Oracle {
        #[arg(long, value_name = "PATH", required_unless_present = "random")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "spec", requires = "dims")]
        random: Option<RandomKind>,
        /// Dimensions of the random instance, comma separated.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Stream index of the random instance.
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Run every property suite.
    VerifyAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    Pmf,
    Joint,
    Kernel,
    Orders,
    Risk,
    Odds,
}

impl From<RandomKind> for InstanceKind {
    fn from(k: RandomKind) -> Self {
        match k {
            RandomKind::Pmf => InstanceKind::Pmf,
            RandomKind::Joint => InstanceKind::Joint,
            RandomKind::Kernel => InstanceKind::Kernel,
            RandomKind::Orders => InstanceKind::Orders,
            RandomKind::Risk => InstanceKind::Risk,
            RandomKind::Odds => InstanceKind::Odds,
        }
    }
}

/// A report plus the violation it records, if any.
struct Output {
    json: Value,
    csv: Option<Vec<Vec<String>>>,
    violation: Option<String>,
}

impl Output {
    fn new<T: Serialize>(report: &T) -> Result<Self> {
        Ok(Output {
            json: serde_json::to_value(report).map_err(|e| Error::validation(e.to_string()))?,
            csv: None,
            violation: None,
        })
    }

    fn violated_unless(mut self, ok: bool, what: impl FnOnce() -> String) -> Self {
        if !ok {
            self.violation = Some(what());
        }
        self
    }
}

struct Ctx {
    units: Units,
    tol: f64,
    global: GlobalArgs,
}

impl Ctx {
    fn oracle_config(&self, file: Option<&GameSpecFile>) -> Result<OracleConfig> {
        let mut cfg = match &self.global.config {
            Some(p) => {
                let c: OracleConfig = io::load(p)?;
                c.validate()?;
                c
            }
            None => OracleConfig::default(),
        };
        if let Some(o) = file.and_then(|f| f.oracle.as_ref()) {
            cfg = cfg.with(o)?;
        }
        if let Some(s) = self.global.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.global.mc_samples {
            cfg.mc_samples = n;
        }
        if let Some(h) = self.global.grid_res {
            cfg.grid_resolution = h;
        }
        if let Some(t) = self.global.tolerance {
            cfg.tolerances.identity = t;
            cfg.tolerances.inequality = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn orders_from(args: &OrderArgs, spec_alphas: Option<&[f64]>) -> Result<OrderVector> {
    let alphas = match (&args.alphas, spec_alphas) {
        (Some(a), _) => a.as_slice(),
        (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::validation(
                "orders missing: pass --alphas or set `alphas`",
            ))
        }
    };
    Ok(validate_orders(alphas)?)
}

fn expect_divergence(file: GameSpecFile) -> Result<io::DivergenceSpec> {
    match file.spec {
        Spec::Divergence(d) => Ok(d),
        other => Err(Error::validation(format!(
            "expected a divergence spec, found {}",
            other.kind()
        ))),
    }
}

fn load_divergence(path: &Path) -> Result<io::DivergenceSpec> {
    expect_divergence(io::load_spec(path, io::bare_divergence)?)
}

fn load_gpt(path: &Path) -> Result<io::GptSpec> {
    match io::load_spec(path, io::bare_gpt)?.spec {
        Spec::Gpt(g) => Ok(g),
        other => Err(Error::validation(format!(
            "expected a gpt spec, found {}",
            other.kind()
        ))),
    }
}

fn div(
    ctx: &Ctx,
    orders: &OrderArgs,
    pmfs: &Option<PathBuf>,
    spec: &Option<PathBuf>,
) -> Result<Output> {
    let (list, spec_alphas, spec_pivot) = match (pmfs, spec) {
        (Some(p), _) => (io::load_pmfs(p)?, None, None),
        (None, Some(s)) => {
            let d = load_divergence(s)?;
            (d.pmfs()?, d.alphas.clone(), d.pivot)
        }
        (None, None) => return Err(Error::validation("pass --pmfs or --spec")),
    };
    let o = orders_from(orders, spec_alphas.as_deref())?;
    let pivot = orders.pivot.or(spec_pivot);
    let value = renyi_multivariate(&o, &list, pivot)?;
    Output::new(&DivergenceReport::new(
        value,
        &o,
        pivot.unwrap_or(o.pivot()),
        None,
        ctx.units,
    ))
}

fn cond_div(ctx: &Ctx, path: &Path, orders: &OrderArgs, beta: Option<f64>) -> Result<Output> {
    let d = load_divergence(path)?;
    let o = orders_from(orders, d.alphas.as_deref())?;
    let beta = match beta {
        Some(b) => b,
        None => d.beta()?,
    };
    let pivot = orders.pivot.or(d.pivot);
    let value = renyi_conditional(&o, beta, &d.conditionals()?, &d.p_g()?, pivot)?;
    Output::new(&DivergenceReport::new(
        value,
        &o,
        pivot.unwrap_or(o.pivot()),
        Some(beta),
        ctx.units,
    ))
}

fn dpi(ctx: &Ctx, path: &Path, mode: Option<DpiMode>) -> Result<Output> {
    let d = load_divergence(path)?;
    let o = validate_orders(d.alphas()?)?;
    let mode = mode.unwrap_or(if d.kernels.is_some() {
        DpiMode::Main
    } else if d.conditionals.is_some() {
        DpiMode::Conditioning
    } else {
        DpiMode::Plain
    });
    let tol = ctx.tol;
    let u = ctx.units;
    let holds = |before: f64, after: f64| before == f64::INFINITY || before >= after - tol;
    let report = match mode {
        DpiMode::Plain => {
            let r = dpi_check(&o, &d.pmfs()?, &d.kernel()?)?;
            DpiCheckReport {
                mode: "plain".into(),
                before: u.log(r.before),
                after: u.log(r.after),
                slack: u.log(r.slack()),
                holds: holds(r.before, r.after),
                unconditional: None,
                unconditional_holds: None,
                tolerance: Real(tol),
                units: u,
            }
        }
        DpiMode::Main => {
            let beta = d.beta.unwrap_or(o.max_order());
            let r = main_system_dpi_check(&o, beta, &d.conditionals()?, &d.p_g()?, &d.kernels()?)?;
            DpiCheckReport {
                mode: "main".into(),
                before: u.log(r.before),
                after: u.log(r.after),
                slack: u.log(r.slack()),
                holds: holds(r.before, r.after),
                unconditional: None,
                unconditional_holds: None,
                tolerance: Real(tol),
                units: u,
            }
        }
        DpiMode::Conditioning => {
            let conds = d.conditionals()?;
            let [p0] = conds.as_slice() else {
                return Err(Error::validation(
                    "conditioning mode takes exactly one conditional; the references go in `pmfs`",
                ));
            };
            let r = conditioning_dpi_check(&o, p0, &d.pmfs()?, &d.p_g()?, &d.kernel()?)?;
            DpiCheckReport {
                mode: "conditioning".into(),
                before: u.log(r.before),
                after: u.log(r.after),
                slack: u.log(r.before - r.after),
                holds: holds(r.before, r.after),
                unconditional: Some(u.log(r.unconditional)),
                unconditional_holds: Some(holds(r.before, r.unconditional)),
                tolerance: Real(tol),
                units: u,
            }
        }
    };
    let ok = report.holds && report.unconditional_holds.unwrap_or(true);
    Ok(Output::new(&report)?.violated_unless(ok, || {
        format!(
            "data processing inequality violated in {} mode",
            report.mode
        )
    }))
}

fn sweep(ctx: &Ctx, path: &Path) -> Result<Output> {
    let d = load_divergence(path)?;
    let gammas = d.gammas()?;
    let grid = d.lambdas()?;
    let min = grid.min.unwrap_or_else(|| PathSpec::lower_bound(gammas));
    let rows = order_sweep(
        gammas,
        &d.pmfs()?,
        &lambda_grid(min, grid.max, grid.points)?,
    )?;
    let points: Vec<SweepPoint> = rows.iter().map(|r| SweepPoint::new(r, ctx.units)).collect();
    let mut csv = vec![vec![
        "lambda".to_string(),
        "divergence".into(),
        "kl_limit".into(),
        "tropical_limit".into(),
    ]];
    for p in &points {
        csv.push(
            [p.lambda, p.divergence, p.kl_limit, p.tropical_limit]
                .iter()
                .map(Real::to_string)
                .collect(),
        );
    }
    let mut out = Output::new(&SweepReport {
        rows: points,
        units: ctx.units,
    })?;
    out.csv = Some(csv);
    Ok(out)
}

enum Game {
    Plain(io::BettingSpec),
    Side(io::ConditionalBettingSpec),
}

fn load_game(path: &Path) -> Result<(Game, GameSpecFile)> {
    let file = io::load_spec(path, io::bare_any_betting)?;
    let game = match &file.spec {
        Spec::Betting(b) => Game::Plain(b.clone()),
        Spec::ConditionalBetting(b) => Game::Side(b.clone()),
        other => {
            return Err(Error::validation(format!(
                "expected a betting or conditional-betting spec, found {}",
                other.kind()
            )))
        }
    };
    Ok((game, file))
}

fn ice(ctx: &Ctx, path: &Path) -> Result<Output> {
    let value = match load_game(path)?.0 {
        Game::Plain(g) => {
            let (p0, odds, risk) = g.parts()?;
            multi_ice_unconditional(&p0, &odds, &g.bets()?, &risk)?
        }
        Game::Side(g) => {
            let (joint, odds, risk) = g.parts()?;
            multi_ice_conditional(&joint, &odds, &g.bets()?, &risk)?
        }
    };
    Output::new(&IceReport {
        ice: Real(value),
        log_ice: ctx.units.log(value.ln()),
        units: ctx.units,
    })
}

fn optimize(ctx: &Ctx, path: &Path) -> Result<Output> {
    let (bets, value, orders) = match load_game(path)?.0 {
        Game::Plain(g) => {
            let (p0, odds, risk) = g.parts()?;
            let (b, v) = optimal_bets_unconditional(&p0, &odds, &risk)?;
            (Bets::from_pmfs(&b), v, risk_to_orders(&risk)?)
        }
        Game::Side(g) => {
            let (joint, odds, risk) = g.parts()?;
            let (b, v) = optimal_bets_conditional(&joint, &odds, &risk)?;
            (Bets::from_conds(&b), v, risk_to_orders(&risk)?)
        }
    };
    Output::new(&OptimizeReport {
        optimal_bets: bets,
        ice: Real(value.exp()),
        log_ice: ctx.units.log(value),
        orders: reals(orders.alphas()),
        units: ctx.units,
    })
}

fn decompose(ctx: &Ctx, path: &Path) -> Result<Output> {
    let (r, side) = match load_game(path)?.0 {
        Game::Plain(g) => {
            let (p0, odds, risk) = g.parts()?;
            (decompose_ice(&p0, &odds, &g.bets()?, &risk)?, false)
        }
        Game::Side(g) => {
            let (joint, odds, risk) = g.parts()?;
            (
                decompose_ice_conditional(&joint, &odds, &g.bets()?, &risk)?,
                true,
            )
        }
    };
    let gap = r.gap();
    let holds = if side {
        gap >= -ctx.tol
    } else {
        gap.abs() <= ctx.tol
    };
    let report = DecomposeReport::new(&r, holds, ctx.tol, ctx.units);
    let mut csv = vec![vec![
        "lottery".to_string(),
        "order".into(),
        "coefficient".into(),
        "penalty".into(),
        "fairness".into(),
    ]];
    for (k, (t, f)) in report
        .penalty_terms
        .iter()
        .zip(&report.fairness_terms)
        .enumerate()
    {
        csv.push(vec![
            (k + 1).to_string(),
            t.order.to_string(),
            t.coefficient.to_string(),
            t.penalty.to_string(),
            f.to_string(),
        ]);
    }
    let mut out = Output::new(&report)?;
    out.csv = Some(csv);
    Ok(out.violated_unless(holds, || {
        format!("recomposition differs from the log certainty equivalent by {gap:e}")
    }))
}

fn side_info(ctx: &Ctx, path: &Path) -> Result<Output> {
    let Game::Side(g) = load_game(path)?.0 else {
        return Err(Error::validation(
            "side-info needs a conditional-betting spec",
        ));
    };
    let (joint, odds, risk) = g.parts()?;
    let (_, with) = optimal_bets_conditional(&joint, &odds, &risk)?;
    let (_, without) = optimal_bets_unconditional(&joint.marginal_x(), &odds, &risk)?;
    let gain = with - without;
    let holds = gain >= -ctx.tol;
    let report = SideInfoReport {
        conditional_optimum: ctx.units.log(with),
        unconditional_optimum: ctx.units.log(without),
        gain: ctx.units.log(gain),
        holds,
        tolerance: Real(ctx.tol),
        units: ctx.units,
    };
    Ok(Output::new(&report)?.violated_unless(holds, || {
        format!("side information lowered the optimum by {:e}", -gain)
    }))
}

fn gpt_bet(ctx: &Ctx, path: &Path) -> Result<Output> {
    let g = load_gpt(path)?;
    let inst = g.instance()?;
    let odds = g.odds()?;
    let risk = g.risk()?;
    let joint = outcome_joint(&inst.measurement, &inst.ensemble)?;
    let optimal = sb_optimal_log_ice(&inst.measurement, &inst.ensemble, &odds, &risk)?;
    let ratio = match &g.eta {
        Some(eta) => advantage_ratio_with(
            &inst.model,
            &inst.measurement,
            &inst.ensemble,
            &odds,
            &risk,
            &eta.to_pmf()?,
        )?,
        None => advantage_ratio(&inst.model, &inst.measurement, &inst.ensemble, &odds, &risk)?,
    };
    let orders = risk_to_orders(&risk)?;
    let monotone = if orders.pivot() == 0 {
        Some(ctx.units.log(informativeness_monotone(
            &inst.measurement,
            &inst.ensemble,
            &odds.induced_all(),
            &orders,
        )?))
    } else {
        None
    };
    Output::new(&GptBetReport {
        outcome_joint: joint_rows(&joint),
        sd_success: Real(sd_success(&inst.measurement, &inst.ensemble)?),
        optimal_log_ice: ctx.units.log(optimal),
        advantage_ratio: Real(ratio),
        monotone,
        units: ctx.units,
    })
}

fn sd(path: &Path) -> Result<Output> {
    let inst = load_gpt(path)?.instance()?;
    let joint = outcome_joint(&inst.measurement, &inst.ensemble)?;
    Output::new(&SdReport {
        outcome_joint: joint_rows(&joint),
        sd_success: Real(sd_success(&inst.measurement, &inst.ensemble)?),
        guesses: map_guess(&joint),
    })
}

fn monotone(ctx: &Ctx, path: &Path) -> Result<Output> {
    let g = load_gpt(path)?;
    let inst = g.instance()?;
    let orders = match (&g.alphas, &g.risk) {
        (Some(a), _) => validate_orders(a)?,
        (None, Some(_)) => risk_to_orders(&g.risk()?)?,
        (None, None) => return Err(Error::validation("monotone needs `alphas` or `risk`")),
    };
    let refs = match (&g.refs, &g.odds) {
        (Some(_), _) => g.refs()?,
        (None, Some(_)) => g.odds()?.induced_all(),
        (None, None) => return Err(Error::validation("monotone needs `refs` or `odds`")),
    };
    let value = informativeness_monotone(&inst.measurement, &inst.ensemble, &refs, &orders)?;
    let holds = value >= -ctx.tol;
    let report = MonotoneReport {
        monotone: ctx.units.log(value),
        orders: reals(orders.alphas()),
        holds,
        tolerance: Real(ctx.tol),
        units: ctx.units,
    };
    Ok(Output::new(&report)?.violated_unless(holds, || format!("monotone is negative: {value:e}")))
}

fn instance_json(i: &Instance) -> Result<Value> {
    let v = match i {
        Instance::Pmf(p) => serde_json::to_value(PmfDoc::from_pmf(p)),
        Instance::Joint(j) => serde_json::to_value(JointDoc::from_joint(j)),
        Instance::Kernel(k) => serde_json::to_value(KernelDoc::from_kernel(k)),
        Instance::Orders(o) => serde_json::to_value(serde_json::json!({
            "alphas": reals(o.alphas()),
            "case": case_name(o.case()),
            "pivot": o.pivot(),
        })),
        Instance::Risk(r) => serde_json::to_value(serde_json::json!({ "risk": reals(r.values()) })),
        Instance::Odds(o) => serde_json::to_value(serde_json::json!({
            "odds": o.rows().iter().map(|r| reals(r)).collect::<Vec<_>>(),
        })),
    };
    let mut v = v.map_err(|e| Error::validation(e.to_string()))?;
    round_floats(&mut v);
    Ok(v)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .and_then(|f| serde_json::Number::from_f64(round_significant(f)))
            {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(m) => m.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn oracle(
    ctx: &Ctx,
    spec: &Option<PathBuf>,
    random: Option<RandomKind>,
    dims: &Option<Vec<usize>>,
    stream: u64,
) -> Result<Output> {
    if let Some(kind) = random {
        let cfg = ctx.oracle_config(None)?;
        let dims = dims.as_deref().unwrap_or_default();
        let inst = random_instance(kind.into(), dims, &cfg, stream)?;
        return Output::new(&OracleReport {
            kind: format!("random-{}", format!("{kind:?}").to_lowercase()),
            seed: cfg.seed,
            search: None,
            monte_carlo: None,
            discrimination: None,
            instance: Some(instance_json(&inst)?),
            agrees: true,
        });
    }
    let path = spec
        .as_deref()
        .ok_or_else(|| Error::validation("pass --spec or --random"))?;
    let file = io::load_spec(path, io::bare_any_betting_or_gpt)?;
    let cfg = ctx.oracle_config(Some(&file))?;
    let tol = &cfg.tolerances;
    let mut report = OracleReport {
        kind: file.spec.kind().into(),
        seed: cfg.seed,
        search: None,
        monte_carlo: None,
        discrimination: None,
        instance: None,
        agrees: true,
    };
    let search = |closed: f64, found: f64, bets: Bets| SearchReport {
        closed_form_log_ice: ctx.units.log(closed),
        search_log_ice: ctx.units.log(found),
        search_bets: bets,
        sound: found <= closed + tol.search_soundness,
        complete: found >= closed - tol.search_completeness,
    };
    match &file.spec {
        Spec::Betting(g) => {
            let (p0, odds, risk) = g.parts()?;
            let (_, closed) = optimal_bets_unconditional(&p0, &odds, &risk)?;
            let (b, found) = brute_force_optimal_bets(&p0, &odds, &risk, &cfg, 0)?;
            report.search = Some(search(closed, found, Bets::from_pmfs(&b)));
            if g.bets.is_some() {
                let bets = g.bets()?;
                let analytic = multi_ice_unconditional(&p0, &odds, &bets, &risk)?;
                let game = McGame::Unconditional {
                    p0: &p0,
                    odds: &odds,
                    bets: &bets,
                };
                let est = monte_carlo_ice(game, &risk, &cfg, 0)?;
                report.monte_carlo = Some(MonteCarloReport::new(analytic, &est, tol.mc_sigmas));
            }
        }
        Spec::ConditionalBetting(g) => {
            let (joint, odds, risk) = g.parts()?;
            let (_, closed) = optimal_bets_conditional(&joint, &odds, &risk)?;
            let (b, found) = brute_force_optimal_bets_conditional(&joint, &odds, &risk, &cfg, 0)?;
            report.search = Some(search(closed, found, Bets::from_conds(&b)));
            if g.bets.is_some() {
                let bets: Vec<CondPmf> = g.bets()?;
                let analytic = multi_ice_conditional(&joint, &odds, &bets, &risk)?;
                let game = McGame::Conditional {
                    joint: &joint,
                    odds: &odds,
                    bets: &bets,
                };
                let est = monte_carlo_ice(game, &risk, &cfg, 0)?;
                report.monte_carlo = Some(MonteCarloReport::new(analytic, &est, tol.mc_sigmas));
            }
        }
        Spec::Gpt(g) => {
            let inst = g.instance()?;
            let best = exhaustive_postprocessing(&inst.measurement, &inst.ensemble, &cfg)?;
            let closed = sd_success(&inst.measurement, &inst.ensemble)?;
            report.discrimination = Some(EnumerationReport::new(&best, closed, tol.identity));
        }
        Spec::Divergence(_) => {
            return Err(Error::validation(
                "the oracle checks betting, conditional-betting and gpt specs",
            ))
        }
    }
    report.agrees = report.search.as_ref().is_none_or(|s| s.sound && s.complete)
        && report.monte_carlo.as_ref().is_none_or(|m| m.within)
        && report.discrimination.as_ref().is_none_or(|d| d.agrees);
    let agrees = report.agrees;
    Ok(Output::new(&report)?
        .violated_unless(agrees, || "oracle disagrees with the closed form".into()))
}

fn verify_all(ctx: &Ctx) -> Result<Output> {
    let cfg = ctx.oracle_config(None)?;
    let suites = suites::verify_all(&cfg);
    for s in &suites {
        eprintln!("{}", s.line());
        for d in &s.details {
            eprintln!("    {d}");
        }
    }
    let report = VerifyReport::new(cfg.seed, suites);
    let failed = report.suites_failed;
    Ok(Output::new(&report)?.violated_unless(report.passed, || format!("{failed} suites failed")))
}

fn dispatch(ctx: &Ctx, command: &Command) -> Result<Output> {
    match command {
        Command::Div { orders, pmfs, spec } => div(ctx, orders, pmfs, spec),
        Command::CondDiv { spec, orders, beta } => cond_div(ctx, &spec.spec, orders, *beta),
        Command::DpiCheck { spec, mode } => dpi(ctx, &spec.spec, *mode),
        Command::Sweep { spec } => sweep(ctx, &spec.spec),
        Command::Ice { spec } => ice(ctx, &spec.spec),
        Command::Optimize { spec } => optimize(ctx, &spec.spec),
        Command::Decompose { spec } => decompose(ctx, &spec.spec),
        Command::SideInfo { spec } => side_info(ctx, &spec.spec),
        Command::GptBet { spec } => gpt_bet(ctx, &spec.spec),
        Command::Sd { spec } => sd(&spec.spec),
        Command::Monotone { spec } => monotone(ctx, &spec.spec),
        Command::Oracle {
            spec,
            random,
            dims,
            stream,
        } => oracle(ctx, spec, *random, dims, *stream),
        Command::VerifyAll => verify_all(ctx),
    }
}

/// Flattens nested objects and arrays into `a.b[0]`-style columns.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), String::new())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn render(output: &Output, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&output.json)
                .map_err(|e| Error::validation(e.to_string()))?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let rows = match &output.csv {
                Some(rows) => rows.clone(),
                None => {
                    let mut cells = Vec::new();
                    flatten("", &output.json, &mut cells);
                    let (header, values): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
                    vec![header, values]
                }
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.write_record(r)?;
            }
            w.into_inner().map_err(|e| Error::Write(e.into_error()))
        }
    }
}

fn emit(bytes: &[u8], out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn diagnostic(kind: &str, message: &str, code: i32) {
    let d = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{d}");
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    let format = cli.global.format.unwrap_or(match cli.command {
        Command::Sweep { .. } => Format::Csv,
        _ => Format::Json,
    });
    let tol = cli.global.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tol >= 0.0) || !tol.is_finite() {
        diagnostic(
            "invalid-input",
            "tolerance must be a nonnegative number",
            EXIT_VALIDATION,
        );
        return EXIT_VALIDATION;
    }
    if !matches!(cli.command, Command::VerifyAll) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global();
    }
    let ctx = Ctx {
        units: Units::from_bits_flag(cli.global.bits),
        tol,
        global: cli.global,
    };
    let result = dispatch(&ctx, &cli.command).and_then(|out| {
        render(&out, format)
            .and_then(|b| emit(&b, &ctx.global.out))
            .map(|_| out)
    });
    match result {
        Ok(out) => match out.violation {
            Some(v) => {
                diagnostic("property-violation", &v, EXIT_VIOLATION);
                EXIT_VIOLATION
            }
            None => EXIT_OK,
        },
        Err(e) => {
            let code = e.exit_code();
            diagnostic(e.kind(), &e.to_string(), code);
            code
        }
    }
}
