//! Brute-force and Monte-Carlo verifiers.
//!
//! Everything here evaluates the certainty equivalent straight from its
//! definition with plain loops and never calls the closed forms of the
//! core crate, so agreement between the two is evidence rather than
//! tautology.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use renyi_bet_core::betting::{risk_to_orders, OddsProfile, RiskVector};
use renyi_bet_core::divergences::OrderVector;
use renyi_bet_core::gpt::{HermitianMatrix, Measurement, StateEnsemble};
use renyi_bet_core::prob::{CondPmf, JointPmf, Pmf, StochasticOp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest alphabet accepted by the bet search.
pub const MAX_SEARCH_OUTCOMES: usize = 4;
/// Largest number of lotteries accepted by the bet search.
pub const MAX_SEARCH_LOTTERIES: usize = 3;

/// Pass/fail thresholds of the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Identities between two evaluations of the same quantity.
    pub identity: f64,
    /// Slack allowed on inequalities.
    pub inequality: f64,
    /// How far the search may beat a closed-form optimum.
    pub search_soundness: f64,
    /// How far the search may fall short of a closed-form optimum.
    pub search_completeness: f64,
    /// Reference fixtures.
    pub fixture: f64,
    /// Decrease allowed between adjacent points of an order sweep.
    pub sweep_step: f64,
    /// Extrapolated sweep value against its limit at `λ = 1`.
    pub extrapolation: f64,
    /// Standard errors allowed between a Monte-Carlo estimate and the
    /// analytic value.
    pub mc_sigmas: f64,
    /// Minimum side-information gain on the correlated fixture.
    pub strict_gain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-9,
            inequality: 1e-9,
            search_soundness: 1e-6,
            search_completeness: 1e-4,
            fixture: 1e-6,
            sweep_step: 1e-10,
            extrapolation: 1e-4,
            mc_sigmas: 4.0,
            strict_gain: 1e-3,
        }
    }
}

/// Seeds, budgets and tolerances of every oracle. The checked-in
/// `config/oracle.json` holds the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub seed: u64,
    /// Lattice spacing of the bet grid for a single two-outcome lottery;
    /// larger problems use the finest spacing that fits `grid_budget`.
    pub grid_resolution: f64,
    pub grid_budget: usize,
    /// Total refinement proposals, split evenly over `concentrations`.
    pub dirichlet_samples: usize,
    pub concentrations: Vec<f64>,
    pub mc_samples: usize,
    pub mc_batches: usize,
    pub postprocessing_guard: u64,
    pub tolerances: Tolerances,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 42,
            grid_resolution: 1e-3,
            grid_budget: 50_000,
            dirichlet_samples: 20_000,
            concentrations: vec![200.0, 1e3, 5e3, 2.5e4, 1.25e5, 6e5],
            mc_samples: 1_000_000,
            mc_batches: 100,
            postprocessing_guard: 1_000_000,
            tolerances: Tolerances::default(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_resolution > 0.0 && self.grid_resolution < 0.5) {
            return Err(Error::validation(format!(
                "grid_resolution must lie in (0, 0.5), got {}",
                self.grid_resolution
            )));
        }
        let counts = [
            ("grid_budget", self.grid_budget as u64),
            ("dirichlet_samples", self.dirichlet_samples as u64),
            ("mc_samples", self.mc_samples as u64),
            ("mc_batches", self.mc_batches as u64),
            ("postprocessing_guard", self.postprocessing_guard),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::validation(format!("{name} must be positive")));
            }
        }
        if self.mc_batches < 2 || self.mc_samples < self.mc_batches {
            return Err(Error::validation(
                "need at least two Monte-Carlo batches and one sample per batch",
            ));
        }
        if self.concentrations.is_empty() || self.concentrations.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::validation("concentrations must be positive"));
        }
        Ok(())
    }

    pub fn with(mut self, o: &OracleOverrides) -> Result<Self> {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.grid_resolution {
            self.grid_resolution = v;
        }
        if let Some(v) = o.grid_budget {
            self.grid_budget = v;
        }
        if let Some(v) = o.dirichlet_samples {
            self.dirichlet_samples = v;
        }
        if let Some(v) = &o.concentrations {
            self.concentrations = v.clone();
        }
        if let Some(v) = o.mc_samples {
            self.mc_samples = v;
        }
        if let Some(v) = o.mc_batches {
            self.mc_batches = v;
        }
        if let Some(v) = o.postprocessing_guard {
            self.postprocessing_guard = v;
        }
        if let Some(v) = &o.tolerances {
            self.tolerances = v.clone();
        }
        self.validate()?;
        Ok(self)
    }
}

/// Partial [`OracleConfig`] as found in spec files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentrations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_batches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postprocessing_guard: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// Seeded source of random instances. Stream `i` of seed `s` is the same
/// sequence on every run and every thread.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// One draw from `Dirichlet(alpha)`.
    pub fn dirichlet(&mut self, alpha: &[f64]) -> Vec<f64> {
        loop {
            let g: Vec<f64> = alpha
                .iter()
                .map(|&a| {
                    Gamma::new(a, 1.0)
                        .expect("positive shape")
                        .sample(&mut self.rng)
                })
                .collect();
            let s: f64 = g.iter().sum();
            if s > 0.0 && s.is_finite() {
                return g.into_iter().map(|v| v / s).collect();
            }
        }
    }

    /// Uniform draw from the simplex, bounded away from its faces so the
    /// result has full support.
    pub fn pmf(&mut self, n: usize) -> Pmf {
        loop {
            let v = self.dirichlet(&vec![1.0; n]);
            if v.iter().all(|&m| m > 1e-9) {
                return Pmf::from_weights(v).expect("dirichlet draw");
            }
        }
    }

    pub fn joint(&mut self, n_x: usize, n_g: usize) -> JointPmf {
        let p = self.pmf(n_x * n_g);
        JointPmf::new(n_x, n_g, p.into_inner()).expect("joint draw")
    }

    pub fn cond(&mut self, n_given: usize, n: usize) -> CondPmf {
        CondPmf::new((0..n_given).map(|_| self.pmf(n)).collect()).expect("conditional draw")
    }

    /// Kernel with independent uniform rows `t(·|x)`.
    pub fn kernel(&mut self, n_in: usize, n_out: usize) -> StochasticOp {
        StochasticOp::new((0..n_in).map(|_| self.pmf(n_out)).collect()).expect("kernel draw")
    }

    /// An admissible risk vector, case chosen by a fair coin.
    pub fn risk(&mut self, d: usize) -> RiskVector {
        if self.coin() {
            self.risk_averse(d, 4.0)
        } else {
            self.risk_tolerant(d)
        }
    }

    /// `R_k` uniform on `[1, max]`.
    pub fn risk_averse(&mut self, d: usize, max: f64) -> RiskVector {
        loop {
            let r: Vec<f64> = (0..d).map(|_| self.uniform(1.0, max)).collect();
            if let Ok(v) = RiskVector::new(r) {
                return v;
            }
        }
    }

    /// `R_k ∈ (0, 1)` with `Σ_k (1 − R_k) < 1`.
    pub fn risk_tolerant(&mut self, d: usize) -> RiskVector {
        let s = self.dirichlet(&vec![1.0; d + 1]);
        RiskVector::new(s[..d].iter().map(|v| 1.0 - 0.95 * v).collect()).expect("risk draw")
    }

    /// Orders of a random admissible risk vector.
    pub fn orders(&mut self, d: usize) -> OrderVector {
        risk_to_orders(&self.risk(d)).expect("admissible risk")
    }

    /// Orders whose pivot is the first entry.
    pub fn pivot_zero_orders(&mut self, d: usize) -> (RiskVector, OrderVector) {
        let risk = if self.coin() {
            self.risk_averse(d, 2.0)
        } else {
            self.risk_tolerant(d)
        };
        let orders = risk_to_orders(&risk).expect("admissible risk");
        (risk, orders)
    }

    /// Fair odds of `d` random PMFs, each scaled by a fairness factor in
    /// `[0.8, 1.25]`.
    pub fn odds(&mut self, n: usize, d: usize) -> OddsProfile {
        let pmfs: Vec<Pmf> = (0..d).map(|_| self.pmf(n)).collect();
        let f: Vec<f64> = (0..d).map(|_| self.uniform(0.8, 1.25)).collect();
        OddsProfile::from_pmfs(&pmfs, &f).expect("odds draw")
    }

    pub fn fair_odds(&mut self, n: usize, d: usize) -> OddsProfile {
        let pmfs: Vec<Pmf> = (0..d).map(|_| self.pmf(n)).collect();
        OddsProfile::fair_from_pmfs(&pmfs).expect("odds draw")
    }

    fn unit_vector(&mut self) -> [f64; 3] {
        loop {
            let v = [
                self.uniform(-1.0, 1.0),
                self.uniform(-1.0, 1.0),
                self.uniform(-1.0, 1.0),
            ];
            let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if n2 > 1e-6 && n2 <= 1.0 {
                let n = n2.sqrt();
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    /// `(I + r·σ)/2` with `r` uniform in the unit ball.
    pub fn qubit_state(&mut self) -> HermitianMatrix {
        let r = self.uniform(0.0, 1.0).cbrt();
        let n = self.unit_vector();
        bloch(0.5, [0.5 * r * n[0], 0.5 * r * n[1], 0.5 * r * n[2]])
    }

    /// Qubit POVM `E_a = w_a (I + s n_a·σ)` with `Σ_a w_a n_a = 0`.
    pub fn qubit_povm(&mut self, n_out: usize) -> Vec<HermitianMatrix> {
        let w = self.pmf(n_out).into_inner();
        let v: Vec<[f64; 3]> = (0..n_out).map(|_| self.unit_vector()).collect();
        let mut mean = [0.0; 3];
        for (wa, va) in w.iter().zip(&v) {
            for i in 0..3 {
                mean[i] += wa * va[i];
            }
        }
        let shifted: Vec<[f64; 3]> = v
            .iter()
            .map(|va| [va[0] - mean[0], va[1] - mean[1], va[2] - mean[2]])
            .collect();
        let longest = shifted
            .iter()
            .map(|n| (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt())
            .fold(0.0, f64::max);
        let s = if longest > 1.0 { 1.0 / longest } else { 1.0 };
        w.iter()
            .zip(&shifted)
            .map(|(&wa, n)| bloch(wa, [wa * s * n[0], wa * s * n[1], wa * s * n[2]]))
            .collect()
    }
}

/// `c I + r·σ`.
fn bloch(c: f64, r: [f64; 3]) -> HermitianMatrix {
    HermitianMatrix::new(
        2,
        vec![c + r[2], r[0], r[0], c - r[2]],
        vec![0.0, -r[1], r[1], 0.0],
    )
    .expect("hermitian by construction")
}

/// Kinds accepted by [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Pmf,
    Joint,
    Kernel,
    Orders,
    Risk,
    Odds,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Pmf(Pmf),
    Joint(JointPmf),
    Kernel(StochasticOp),
    Orders(OrderVector),
    Risk(RiskVector),
    Odds(OddsProfile),
}

/// One seeded draw. `dims` is `[n]` for PMFs, `[n_x, n_g]` for joints,
/// `[n_in, n_out]` for kernels, `[d]` for orders and risk, `[n, d]` for
/// odds.
pub fn random_instance(
    kind: InstanceKind,
    dims: &[usize],
    cfg: &OracleConfig,
    stream: u64,
) -> Result<Instance> {
    let want = match kind {
        InstanceKind::Pmf | InstanceKind::Orders | InstanceKind::Risk => 1,
        _ => 2,
    };
    if dims.len() != want || dims.iter().any(|&n| n == 0 || n > 64) {
        return Err(Error::validation(format!(
            "{kind:?} needs {want} dimensions in 1..=64, got {dims:?}"
        )));
    }
    let mut s = Sampler::new(cfg.seed, stream);
    Ok(match kind {
        InstanceKind::Pmf => Instance::Pmf(s.pmf(dims[0])),
        InstanceKind::Joint => Instance::Joint(s.joint(dims[0], dims[1])),
        InstanceKind::Kernel => Instance::Kernel(s.kernel(dims[0], dims[1])),
        InstanceKind::Orders => Instance::Orders(s.orders(dims[0])),
        InstanceKind::Risk => Instance::Risk(s.risk(dims[0])),
        InstanceKind::Odds => Instance::Odds(s.odds(dims[0], dims[1])),
    })
}

/// `ln ICE` of one lottery table straight from the definition:
/// `(1/κ) ln Σ_x p(x) Π_k (b_k(x) o_k(x))^{1−R_k}`. Zero bets are
/// allowed and give `±∞` in the usual extended-real way.
fn log_ice_direct(p: &[f64], odds: &[Vec<f64>], bets: &[Vec<f64>], risk: &[f64]) -> f64 {
    let kappa: f64 = risk.iter().map(|r| 1.0 - r).sum();
    let mut logs = Vec::with_capacity(p.len());
    for (x, &px) in p.iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        let mut t = px.ln();
        for k in 0..risk.len() {
            let e = 1.0 - risk[k];
            if e != 0.0 {
                t += e * (bets[k][x] * odds[k][x]).ln();
            }
        }
        logs.push(t);
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m / kappa;
    }
    let s: f64 = logs.iter().map(|t| (t - m).exp()).sum();
    let v = (m + s.ln()) / kappa;
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// `ln ICE` from the definition for a game without side information.
pub fn log_ice_definition(p0: &Pmf, odds: &OddsProfile, bets: &[Pmf], risk: &RiskVector) -> f64 {
    let b: Vec<Vec<f64>> = bets.iter().map(|b| b.mass().to_vec()).collect();
    log_ice_direct(p0.mass(), odds.rows(), &b, risk.values())
}

/// `ln ICE` from the definition with side information.
pub fn log_ice_definition_conditional(
    joint: &JointPmf,
    odds: &OddsProfile,
    bets: &[CondPmf],
    risk: &RiskVector,
) -> f64 {
    let b: Vec<Vec<Vec<f64>>> = bets
        .iter()
        .map(|c| c.rows().iter().map(|r| r.mass().to_vec()).collect())
        .collect();
    log_ice_joint(joint, odds.rows(), &b, risk.values())
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Points of `{b : b_i ∈ {0, 1/m, …, 1}, Σ b_i = 1}`.
fn lattice(n: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / m as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(n, left - c, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, m, m, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Finest lattice denominator whose joint grid over `d` lotteries fits
/// the budget.
fn grid_denominator(n: usize, d: usize, cfg: &OracleConfig) -> usize {
    let finest = (1.0 / cfg.grid_resolution).round().max(1.0) as usize;
    let fits = |m: usize| {
        let per = binomial((m + n - 1) as u128, (n - 1) as u128);
        per.checked_pow(d as u32)
            .is_some_and(|t| t <= cfg.grid_budget as u128)
    };
    let mut m = n.min(finest);
    while m < finest && fits(m + 1) {
        m += 1;
    }
    m
}

fn check_search_size(n: usize, d: usize) -> Result<()> {
    if n > MAX_SEARCH_OUTCOMES {
        return Err(Error::GuardExceeded {
            what: "bet-search alphabet",
            size: n as u128,
            limit: MAX_SEARCH_OUTCOMES as u128,
        });
    }
    if d > MAX_SEARCH_LOTTERIES {
        return Err(Error::GuardExceeded {
            what: "bet-search lottery count",
            size: d as u128,
            limit: MAX_SEARCH_LOTTERIES as u128,
        });
    }
    Ok(())
}

/// Grid search followed by Dirichlet refinement of one lottery at a time.
fn search(
    p: &[f64],
    odds: &[Vec<f64>],
    risk: &[f64],
    cfg: &OracleConfig,
    rng: &mut Sampler,
) -> (Vec<Vec<f64>>, f64) {
    let n = p.len();
    let d = risk.len();
    let points = lattice(n, grid_denominator(n, d, cfg));
    let mut idx = vec![0usize; d];
    let mut best = vec![points[0].clone(); d];
    let mut best_v = f64::NEG_INFINITY;
    let mut cur = best.clone();
    loop {
        for k in 0..d {
            cur[k].clone_from(&points[idx[k]]);
        }
        let v = log_ice_direct(p, odds, &cur, risk);
        if v > best_v {
            best_v = v;
            best.clone_from(&cur);
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < points.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }

    // Cycle through the lotteries one at a time, then move all of them
    // together: a zero bet in one lottery can hide gains in the others.
    let per_round = cfg.dirichlet_samples / cfg.concentrations.len();
    let mut shape = vec![0.0; n];
    let mut trial = best.clone();
    for &c in &cfg.concentrations {
        for i in 0..per_round {
            let j = i % (d + 1);
            for k in 0..d {
                if j == k || (j == d && d > 1) {
                    // mode of Dirichlet(1 + c b) is b itself
                    for (s, b) in shape.iter_mut().zip(&best[k]) {
                        *s = 1.0 + c * b;
                    }
                    trial[k] = rng.dirichlet(&shape);
                } else {
                    trial[k].clone_from(&best[k]);
                }
            }
            let v = log_ice_direct(p, odds, &trial, risk);
            if v > best_v {
                best_v = v;
                std::mem::swap(&mut best, &mut trial);
            }
        }
    }
    (best, best_v)
}

/// Best bets found by search and their `ln ICE` for a game without side
/// information.
pub fn brute_force_optimal_bets(
    p0: &Pmf,
    odds: &OddsProfile,
    risk: &RiskVector,
    cfg: &OracleConfig,
    stream: u64,
) -> Result<(Vec<Pmf>, f64)> {
    check_search_size(p0.len(), risk.len())?;
    check_game(p0.len(), odds, risk)?;
    let mut rng = Sampler::new(cfg.seed, stream);
    let (bets, v) = search(p0.mass(), odds.rows(), risk.values(), cfg, &mut rng);
    let bets = bets
        .into_iter()
        .map(Pmf::from_weights)
        .collect::<Result<Vec<_>, _>>()?;
    Ok((bets, v))
}

/// Conditional counterpart of [`brute_force_optimal_bets`]. The objective
/// is a sum over `g` of terms that each depend on `b(·|g)` only, so every
/// column is searched on its own.
pub fn brute_force_optimal_bets_conditional(
    joint: &JointPmf,
    odds: &OddsProfile,
    risk: &RiskVector,
    cfg: &OracleConfig,
    stream: u64,
) -> Result<(Vec<CondPmf>, f64)> {
    check_search_size(joint.n_x(), risk.len())?;
    check_game(joint.n_x(), odds, risk)?;
    let (n_x, n_g, d) = (joint.n_x(), joint.n_g(), risk.len());
    let mut rng = Sampler::new(cfg.seed, stream);
    let mut rows: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(n_g); d];
    for g in 0..n_g {
        let column: Vec<f64> = (0..n_x).map(|x| joint.get(x, g)).collect();
        let mass: f64 = column.iter().sum();
        let bets = if mass > 0.0 {
            let p: Vec<f64> = column.iter().map(|v| v / mass).collect();
            search(&p, odds.rows(), risk.values(), cfg, &mut rng).0
        } else {
            vec![vec![1.0 / n_x as f64; n_x]; d]
        };
        for (k, b) in bets.into_iter().enumerate() {
            rows[k].push(b);
        }
    }
    let value = log_ice_joint(joint, odds.rows(), &rows, risk.values());
    let bets = rows
        .into_iter()
        .map(|r| {
            CondPmf::new(
                r.into_iter()
                    .map(Pmf::from_weights)
                    .collect::<Result<Vec<_>, _>>()?,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((bets, value))
}

/// `ln ICE` with side information from the definition; `bets[k][g][x]`.
fn log_ice_joint(joint: &JointPmf, odds: &[Vec<f64>], bets: &[Vec<Vec<f64>>], risk: &[f64]) -> f64 {
    let mut p = Vec::new();
    let mut flat_bets = vec![Vec::new(); risk.len()];
    let mut flat_odds = vec![Vec::new(); risk.len()];
    for g in 0..joint.n_g() {
        for x in 0..joint.n_x() {
            p.push(joint.get(x, g));
            for (k, b) in bets.iter().enumerate() {
                flat_bets[k].push(b[g][x]);
                flat_odds[k].push(odds[k][x]);
            }
        }
    }
    log_ice_direct(&p, &flat_odds, &flat_bets, risk)
}

fn check_game(n: usize, odds: &OddsProfile, risk: &RiskVector) -> Result<()> {
    if odds.n_outcomes() != n || odds.n_lotteries() != risk.len() {
        return Err(Error::validation(format!(
            "odds are {}×{}, game has {} lotteries on {n} outcomes",
            odds.n_lotteries(),
            odds.n_outcomes(),
            risk.len()
        )));
    }
    Ok(())
}

/// A game for [`monte_carlo_ice`].
#[derive(Debug, Clone, Copy)]
pub enum McGame<'a> {
    Unconditional {
        p0: &'a Pmf,
        odds: &'a OddsProfile,
        bets: &'a [Pmf],
    },
    Conditional {
        joint: &'a JointPmf,
        odds: &'a OddsProfile,
        bets: &'a [CondPmf],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub batches: usize,
}

/// Samples outcomes, averages the utility `Π_k w_k^{1−R_k}` (the
/// multi-commodity utility with its constant factor removed, which keeps
/// the average positive in every risk case) and inverts it on the
/// diagonal. The standard error comes from batch means carried through
/// the inversion to first order.
pub fn monte_carlo_ice(
    game: McGame<'_>,
    risk: &RiskVector,
    cfg: &OracleConfig,
    stream: u64,
) -> Result<McEstimate> {
    risk.require_admissible()?;
    let d = risk.len();
    let mut weights = Vec::new();
    let mut utilities = Vec::new();
    let mut push = |p: f64, wealth: &dyn Fn(usize) -> f64| {
        if p > 0.0 {
            weights.push(p);
            let mut u = 1.0;
            for k in 0..d {
                u *= wealth(k).powf(1.0 - risk.get(k));
            }
            utilities.push(u);
        }
    };
    match game {
        McGame::Unconditional { p0, odds, bets } => {
            check_game(p0.len(), odds, risk)?;
            if bets.len() != d || bets.iter().any(|b| b.len() != p0.len()) {
                return Err(Error::validation("bets do not match the game"));
            }
            for x in 0..p0.len() {
                push(p0.get(x), &|k| bets[k].get(x) * odds.get(k, x));
            }
        }
        McGame::Conditional { joint, odds, bets } => {
            check_game(joint.n_x(), odds, risk)?;
            if bets.len() != d
                || bets
                    .iter()
                    .any(|b| b.n_outcomes() != joint.n_x() || b.n_given() != joint.n_g())
            {
                return Err(Error::validation("bets do not match the game"));
            }
            for x in 0..joint.n_x() {
                for g in 0..joint.n_g() {
                    push(joint.get(x, g), &|k| bets[k].get(x, g) * odds.get(k, x));
                }
            }
        }
    }
    if utilities.iter().any(|u| !(*u > 0.0) || !u.is_finite()) {
        return Err(Error::validation(
            "every outcome with positive probability needs a positive finite wealth",
        ));
    }
    let inv_kappa = 1.0 / risk.kappa();
    if utilities.iter().all(|u| *u == utilities[0]) {
        return Ok(McEstimate {
            estimate: utilities[0].powf(inv_kappa),
            stderr: 0.0,
            samples: 0,
            batches: 0,
        });
    }
    let index = WeightedIndex::new(&weights).map_err(|e| Error::validation(e.to_string()))?;
    let batches = cfg.mc_batches;
    let per_batch = cfg.mc_samples / batches;
    let means: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream);
            rng.set_word_pos((b as u128) << 40);
            let mut acc = 0.0;
            for _ in 0..per_batch {
                acc += utilities[index.sample(&mut rng)];
            }
            acc / per_batch as f64
        })
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let se_mean = (var / batches as f64).sqrt();
    let estimate = m.powf(inv_kappa);
    Ok(McEstimate {
        estimate,
        stderr: (inv_kappa * estimate / m).abs() * se_mean,
        samples: per_batch * batches,
        batches,
    })
}

/// Best deterministic map `a ↦ f(a)` for the table `p(x, a)` weighted by
/// `o(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicOptimum {
    pub map: Vec<usize>,
    pub value: f64,
    pub evaluated: u64,
}

/// `p(x) ⟨m_a, ω_x⟩` evaluated with plain dot products.
fn born_table(m: &Measurement, ensemble: &StateEnsemble) -> Vec<Vec<f64>> {
    ensemble
        .states()
        .iter()
        .zip(ensemble.prior().mass())
        .map(|(s, px)| {
            m.effects()
                .iter()
                .map(|e| px * e.iter().zip(s).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect()
}

fn enumerate_maps(table: &[Vec<f64>], weight: &[f64], guard: u64) -> Result<DeterministicOptimum> {
    let n_x = table.len();
    let n_a = table.first().map_or(0, Vec::len);
    let count = (n_x as u128).checked_pow(n_a as u32).unwrap_or(u128::MAX);
    if count > guard as u128 {
        return Err(Error::GuardExceeded {
            what: "postprocessing enumeration",
            size: count,
            limit: guard as u128,
        });
    }
    let mut map = vec![0usize; n_a];
    let mut best = DeterministicOptimum {
        map: map.clone(),
        value: f64::NEG_INFINITY,
        evaluated: 0,
    };
    loop {
        let v: f64 = map
            .iter()
            .enumerate()
            .map(|(a, &x)| table[x][a] * weight[x])
            .sum();
        best.evaluated += 1;
        if v > best.value {
            best.value = v;
            best.map.clone_from(&map);
        }
        let mut a = 0;
        while a < n_a {
            map[a] += 1;
            if map[a] < n_x {
                break;
            }
            map[a] = 0;
            a += 1;
        }
        if a == n_a {
            break;
        }
    }
    Ok(best)
}

/// Enumerates every deterministic guess `a ↦ x` and keeps the most
/// successful one.
pub fn exhaustive_postprocessing(
    m: &Measurement,
    ensemble: &StateEnsemble,
    cfg: &OracleConfig,
) -> Result<DeterministicOptimum> {
    let table = born_table(m, ensemble);
    enumerate_maps(&table, &vec![1.0; ensemble.len()], cfg.postprocessing_guard)
}

/// Best expected wealth of a risk-neutral gambler on one lottery, found
/// by enumerating deterministic bets `b(x|a) = [x = f(a)]`. Randomized
/// bets are mixtures of these, so nothing is missed.
pub fn exhaustive_risk_neutral(
    m: &Measurement,
    ensemble: &StateEnsemble,
    odds: &[f64],
    cfg: &OracleConfig,
) -> Result<DeterministicOptimum> {
    if odds.len() != ensemble.len() {
        return Err(Error::validation(format!(
            "{} odds for {} states",
            odds.len(),
            ensemble.len()
        )));
    }
    enumerate_maps(&born_table(m, ensemble), odds, cfg.postprocessing_guard)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn determinism() {
        let cfg = OracleConfig::default();
        let a = random_instance(InstanceKind::Joint, &[3, 2], &cfg, 7).unwrap();
        let b = random_instance(InstanceKind::Joint, &[3, 2], &cfg, 7).unwrap();
        let c = random_instance(InstanceKind::Joint, &[3, 2], &cfg, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_fairness() {
        let mut s = Sampler::new(1, 0);
        let pmfs = [s.pmf(3)];
        let odds = OddsProfile::from_pmfs(&pmfs, &[1.0]).unwrap();
        assert!((odds.fairness(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice(2, 1000).len(), 1001);
        assert_eq!(lattice(3, 4).len() as u128, binomial(6, 2));
        let cfg = OracleConfig::default();
        assert_eq!(grid_denominator(2, 1, &cfg), 1000);
        assert_eq!(grid_denominator(4, 3, &cfg), 4);
    }

    #[test]
    fn symmetric_search_is_uniform() {
        let cfg = OracleConfig::default();
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        let risk = RiskVector::new(vec![2.0]).unwrap();
        let (bets, v) = brute_force_optimal_bets(&pmf(&[0.5, 0.5]), &odds, &risk, &cfg, 0).unwrap();
        assert!((bets[0].get(0) - 0.5).abs() < 1e-9);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn search_guard() {
        let cfg = OracleConfig::default();
        let odds = OddsProfile::constant(5, 1, 5.0).unwrap();
        let risk = RiskVector::new(vec![2.0]).unwrap();
        let err = brute_force_optimal_bets(&Pmf::uniform(5).unwrap(), &odds, &risk, &cfg, 0);
        assert!(matches!(err, Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn mc_constant_wealth() {
        let cfg = OracleConfig::default();
        let odds = OddsProfile::new(vec![vec![4.0, 2.0]]).unwrap();
        let bets = [pmf(&[1.0 / 3.0, 2.0 / 3.0])];
        let risk = RiskVector::new(vec![3.0]).unwrap();
        let p0 = pmf(&[0.3, 0.7]);
        let game = McGame::Unconditional {
            p0: &p0,
            odds: &odds,
            bets: &bets,
        };
        let est = monte_carlo_ice(game, &risk, &cfg, 0).unwrap();
        assert!((est.estimate - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn mc_sure_outcome() {
        let cfg = OracleConfig::default();
        let odds = OddsProfile::new(vec![vec![2.0, 4.0]]).unwrap();
        let bets = [pmf(&[0.6, 0.4])];
        let risk = RiskVector::new(vec![0.5]).unwrap();
        let p0 = pmf(&[1.0, 0.0]);
        let game = McGame::Unconditional {
            p0: &p0,
            odds: &odds,
            bets: &bets,
        };
        let est = monte_carlo_ice(game, &risk, &cfg, 0).unwrap();
        assert!((est.estimate - 1.2).abs() < 1e-12);
    }

    #[test]
    fn enumeration_guard() {
        let table = vec![vec![0.1; 13]; 3];
        let err = enumerate_maps(&table, &[1.0; 3], 1_000_000);
        assert!(matches!(err, Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn config_rejects_bad_resolution() {
        let o = OracleOverrides {
            grid_resolution: Some(0.5),
            ..Default::default()
        };
        assert!(OracleConfig::default().with(&o).is_err());
    }
}
