//! Isoelastic utilities, multi-lottery certainty equivalents, their exact
//! decomposition into Rényi divergences, and closed-form optimal bets.
//!
//! A gambler with risk-aversion vector `R = (R_1, …, R_d)` places bets
//! `b^k` on `d` lotteries paying `o^k(x)` per unit on outcome `x`, drawn
//! from `p⁰`. The isoelastic certainty equivalent is
//!
//! ```text
//! ICE = (Σ_x p⁰(x) Π_k (b^k(x) o^k(x))^{1−R_k})^{1/κ},   κ = Σ_k (1 − R_k)
//! ```
//!
//! and with side information `g` the sum runs over `(x, g)` with bets
//! `b^k(x|g)`. The orders `α_0 = 1/(1 − κ)`, `α_k = (R_k − 1) α_0` turn the
//! log-ICE into a multivariate Rényi divergence plus bet penalties and
//! fairness terms, which [`decompose_ice`] and [`decompose_ice_conditional`]
//! evaluate term by term.

use alloc::vec;
use alloc::vec::Vec;

use crate::divergences::{
    renyi_bivariate, renyi_conditional, renyi_multivariate, validate_orders, OrderVector,
};
use crate::math::{abs, exp, ln, log_sum_exp, powf};
use crate::prob::{same_len, CondPmf, JointPmf, Pmf};
use crate::{Error, Result, NORMALIZATION_TOL};

/// Which admissibility condition a risk vector meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskCase {
    /// Every `R_k ≥ 1`.
    I,
    /// Every `0 < R_k < 1` and `Σ_k R_k > d − 1`.
    II,
}

/// Risk-aversion vector `(R_1, …, R_d)`.
///
/// Any nonnegative vector with `Σ_k (1 − R_k) ≠ 0` defines a certainty
/// equivalent. The Rényi decomposition additionally needs one of the
/// admissibility conditions in [`RiskCase`].
#[derive(Debug, Clone, PartialEq)]
pub struct RiskVector {
    r: Vec<f64>,
}

impl RiskVector {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::Empty);
        }
        for &v in &r {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "risk aversion",
                    value: v,
                });
            }
        }
        let risk = Self { r };
        if abs(risk.kappa()) < NORMALIZATION_TOL {
            return Err(Error::ExcludedLimit);
        }
        Ok(risk)
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.r[k]
    }

    /// Number of lotteries `d`.
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `κ = Σ_k (1 − R_k)`.
    pub fn kappa(&self) -> f64 {
        self.r.iter().map(|r| 1.0 - r).sum()
    }

    pub fn case(&self) -> Option<RiskCase> {
        let d = self.r.len() as f64;
        if self.r.iter().all(|&r| r >= 1.0) {
            Some(RiskCase::I)
        } else if self.r.iter().all(|&r| r > 0.0 && r < 1.0) && self.r.iter().sum::<f64>() > d - 1.0
        {
            Some(RiskCase::II)
        } else {
            None
        }
    }

    pub fn require_admissible(&self) -> Result<RiskCase> {
        self.case().ok_or(Error::InadmissibleRisk(
            "need every R_k >= 1, or every 0 < R_k < 1 with sum R_k > d - 1",
        ))
    }
}

/// `α_0 = (1 + Σ_k (R_k − 1))⁻¹`, `α_k = (R_k − 1) α_0`.
pub fn risk_to_orders(risk: &RiskVector) -> Result<OrderVector> {
    risk.require_admissible()?;
    let a0 = 1.0 / (1.0 - risk.kappa());
    let mut alphas = Vec::with_capacity(risk.len() + 1);
    alphas.push(a0);
    alphas.extend(risk.values().iter().map(|r| (r - 1.0) * a0));
    validate_orders(&alphas)
}

/// `R_k = 1 + α_k / α_0`.
pub fn orders_to_risk(orders: &OrderVector) -> Result<RiskVector> {
    let a = orders.alphas();
    if a.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.len(),
        });
    }
    if a[0] <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha_0",
            value: a[0],
        });
    }
    RiskVector::new(a[1..].iter().map(|ak| 1.0 + ak / a[0]).collect())
}

/// `w^{1−R}/(1−R)`, or `ln w` at `R = 1`.
pub fn isoelastic_utility(r: f64, w: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter {
            name: "risk aversion",
            value: r,
        });
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::InvalidParameter {
            name: "wealth",
            value: w,
        });
    }
    if r == 1.0 {
        Ok(ln(w))
    } else {
        Ok(powf(w, 1.0 - r) / (1.0 - r))
    }
}

fn check_wealth(risk: &RiskVector, w: &[f64]) -> Result<()> {
    same_len(risk.len(), w.len())?;
    for &v in w {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wealth",
                value: v,
            });
        }
    }
    Ok(())
}

/// `Π_k w_k^{1−R_k}/(1−R_k)`; undefined when some `R_k = 1`.
pub fn multi_commodity_utility(risk: &RiskVector, w: &[f64]) -> Result<f64> {
    check_wealth(risk, w)?;
    let mut u = 1.0;
    for (&r, &wk) in risk.values().iter().zip(w) {
        if r == 1.0 {
            return Err(Error::InvalidParameter {
                name: "risk aversion",
                value: r,
            });
        }
        u *= powf(wk, 1.0 - r) / (1.0 - r);
    }
    Ok(u)
}

/// `Π_k w_k^{1−R_k}`, the utility with the constant `Π_k (1−R_k)` divided
/// out; defined for every risk vector.
pub fn multi_commodity_kernel(risk: &RiskVector, w: &[f64]) -> Result<f64> {
    check_wealth(risk, w)?;
    Ok(risk
        .values()
        .iter()
        .zip(w)
        .map(|(&r, &wk)| powf(wk, 1.0 - r))
        .product())
}

/// The certain per-lottery wealth `c` with `u_R(c, …, c) = utility`.
pub fn invert_multi_commodity_utility(risk: &RiskVector, utility: f64) -> Result<f64> {
    let scale: f64 = risk.values().iter().map(|r| 1.0 - r).product();
    if scale == 0.0 {
        return Err(Error::InvalidParameter {
            name: "risk aversion",
            value: 1.0,
        });
    }
    let kernel = utility * scale;
    if !(kernel > 0.0) {
        return Err(Error::InvalidParameter {
            name: "utility",
            value: utility,
        });
    }
    Ok(powf(kernel, 1.0 / risk.kappa()))
}

/// Classification of a bookmaker's odds by `F = Σ_x 1/o(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fairness {
    /// `F = 1`.
    Fair,
    /// `F > 1`.
    SubFair,
    /// `F < 1`.
    SuperFair,
}

/// Odds `o^k(x)` for `d` lotteries on a shared outcome set.
#[derive(Debug, Clone, PartialEq)]
pub struct OddsProfile {
    odds: Vec<Vec<f64>>,
}

impl OddsProfile {
    pub fn new(odds: Vec<Vec<f64>>) -> Result<Self> {
        let n = odds.first().ok_or(Error::Empty)?.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for (lottery, row) in odds.iter().enumerate() {
            same_len(n, row.len())?;
            for (outcome, &value) in row.iter().enumerate() {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(Error::InvalidOdds {
                        lottery,
                        outcome,
                        value,
                    });
                }
            }
        }
        Ok(Self { odds })
    }

    /// Fair odds `o^k = 1/p^k` from full-support PMFs.
    pub fn fair_from_pmfs(pmfs: &[Pmf]) -> Result<Self> {
        let factors = vec![1.0; pmfs.len()];
        Self::from_pmfs(pmfs, &factors)
    }

    /// Odds `o^k = 1/(F_k p^k)` with prescribed fairness constants `F_k`.
    pub fn from_pmfs(pmfs: &[Pmf], fairness: &[f64]) -> Result<Self> {
        same_len(pmfs.len(), fairness.len())?;
        let odds = pmfs
            .iter()
            .zip(fairness)
            .map(|(p, &f)| {
                p.require_full_support()?;
                Ok(p.mass().iter().map(|m| 1.0 / (f * m)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(odds)
    }

    /// The same odds `c` on every outcome of every lottery.
    pub fn constant(n_outcomes: usize, n_lotteries: usize, c: f64) -> Result<Self> {
        Self::new(vec![vec![c; n_outcomes]; n_lotteries])
    }

    /// Number of lotteries `d`.
    pub fn n_lotteries(&self) -> usize {
        self.odds.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.odds[0].len()
    }

    pub fn lottery(&self, k: usize) -> &[f64] {
        &self.odds[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.odds
    }

    /// `o^k(x)`.
    #[inline]
    pub fn get(&self, k: usize, x: usize) -> f64 {
        self.odds[k][x]
    }

    /// `F^k = Σ_x 1/o^k(x)`.
    pub fn fairness(&self, k: usize) -> f64 {
        self.odds[k].iter().map(|o| 1.0 / o).sum()
    }

    pub fn class(&self, k: usize) -> Fairness {
        let f = self.fairness(k);
        if abs(f - 1.0) <= NORMALIZATION_TOL {
            Fairness::Fair
        } else if f > 1.0 {
            Fairness::SubFair
        } else {
            Fairness::SuperFair
        }
    }

    /// `p^k = 1/(F^k o^k)`.
    pub fn induced(&self, k: usize) -> Pmf {
        let f = self.fairness(k);
        Pmf::from_weights(self.odds[k].iter().map(|o| 1.0 / (f * o)).collect())
            .expect("odds are positive and finite")
    }

    pub fn induced_all(&self) -> Vec<Pmf> {
        (0..self.n_lotteries()).map(|k| self.induced(k)).collect()
    }

    /// Multiplies the odds of lottery `k` by `factors[k]`.
    pub fn scaled(&self, factors: &[f64]) -> Result<Self> {
        same_len(self.n_lotteries(), factors.len())?;
        Self::new(
            self.odds
                .iter()
                .zip(factors)
                .map(|(row, c)| row.iter().map(|o| o * c).collect())
                .collect(),
        )
    }
}

/// One bet PMF per lottery, without or with side information.
#[derive(Debug, Clone, PartialEq)]
pub enum BettingProfile {
    Unconditional(Vec<Pmf>),
    Conditional(Vec<CondPmf>),
}

impl BettingProfile {
    pub fn n_lotteries(&self) -> usize {
        match self {
            Self::Unconditional(b) => b.len(),
            Self::Conditional(b) => b.len(),
        }
    }
}

/// The cascade distribution a bet is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum CascadeTarget {
    /// `q^k(x)`.
    Unconditional(Pmf),
    /// `q^k_G(g)` and `q^k(x|g)`; rows of unweighted `g` are uniform.
    Conditional { q_g: Pmf, q_given_g: CondPmf },
}

/// The bet term for lottery `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyTerm {
    /// `S_k = (α_0 + … + α_k)/(α_0 + … + α_{k−1})`.
    pub order: f64,
    /// `α_k/(α_0 − 1)`.
    pub coefficient: f64,
    /// `D_{S_k}(q^k ‖ b^k)`, taken over `(x, g)` with side information.
    pub penalty: f64,
    pub target: CascadeTarget,
}

/// Term-by-term evaluation of a log certainty equivalent.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub orders: OrderVector,
    /// `ln ICE` from the direct formula.
    pub log_ice: f64,
    /// `divergence_term + Σ_k coefficient_k (penalty_k + ln F^k)`.
    pub recomposed: f64,
    /// The Rényi divergence of `p⁰` and the odds-induced PMFs with
    /// prefactor `1/(α_0 − 1)`; conditional with `β = α_0` under side
    /// information.
    pub divergence_term: f64,
    /// The same divergence with the default `α_*` prefactor, `None` when
    /// `α_* = 1`.
    pub divergence_term_default_pivot: Option<f64>,
    pub penalty_terms: Vec<PenaltyTerm>,
    /// `(α_k/(α_0 − 1)) ln F^k`.
    pub fairness_terms: Vec<f64>,
    /// `ln C_0, …, ln C_d` from the cascade.
    pub log_c: Vec<f64>,
    pub optimal_bets: BettingProfile,
    /// `divergence_term + Σ_k fairness_k`.
    pub optimal_log_ice: f64,
}

impl DecompositionReport {
    /// `recomposed − log_ice`: zero without side information, nonnegative
    /// with it.
    pub fn gap(&self) -> f64 {
        self.recomposed - self.log_ice
    }
}

fn check_game(n_x: usize, odds: &OddsProfile, n_bets: usize, risk: &RiskVector) -> Result<()> {
    same_len(n_x, odds.n_outcomes())?;
    same_len(risk.len(), odds.n_lotteries())?;
    same_len(risk.len(), n_bets)
}

fn ln_bet(b: f64, p: f64, lottery: usize, outcome: usize) -> Result<f64> {
    if b > 0.0 {
        Ok(ln(b))
    } else if p > 0.0 {
        Err(Error::ZeroBet { lottery, outcome })
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

/// `ln ICE` without side information.
pub fn log_multi_ice_unconditional(
    p0: &Pmf,
    odds: &OddsProfile,
    bets: &[Pmf],
    risk: &RiskVector,
) -> Result<f64> {
    check_game(p0.len(), odds, bets.len(), risk)?;
    let mut terms = Vec::with_capacity(p0.len());
    for x in 0..p0.len() {
        let p = p0.get(x);
        if p <= 0.0 {
            continue;
        }
        let mut t = ln(p);
        for (k, b) in bets.iter().enumerate() {
            same_len(p0.len(), b.len())?;
            t += (1.0 - risk.get(k)) * (ln_bet(b.get(x), p, k, x)? + ln(odds.get(k, x)));
        }
        terms.push(t);
    }
    Ok(log_sum_exp(&terms) / risk.kappa())
}

pub fn multi_ice_unconditional(
    p0: &Pmf,
    odds: &OddsProfile,
    bets: &[Pmf],
    risk: &RiskVector,
) -> Result<f64> {
    log_multi_ice_unconditional(p0, odds, bets, risk).map(exp)
}

/// `ln ICE` with side information: the joint `p⁰(x, g)` has rows `x` and
/// columns `g`, and `bets[k].row(g) = b^k(·|g)`.
pub fn log_multi_ice_conditional(
    joint: &JointPmf,
    odds: &OddsProfile,
    bets: &[CondPmf],
    risk: &RiskVector,
) -> Result<f64> {
    check_game(joint.n_x(), odds, bets.len(), risk)?;
    for b in bets {
        same_len(joint.n_x(), b.n_outcomes())?;
        same_len(joint.n_g(), b.n_given())?;
    }
    let mut terms = Vec::with_capacity(joint.mass().len());
    for x in 0..joint.n_x() {
        for g in 0..joint.n_g() {
            let p = joint.get(x, g);
            if p <= 0.0 {
                continue;
            }
            let mut t = ln(p);
            for (k, b) in bets.iter().enumerate() {
                t += (1.0 - risk.get(k)) * (ln_bet(b.get(x, g), p, k, x)? + ln(odds.get(k, x)));
            }
            terms.push(t);
        }
    }
    Ok(log_sum_exp(&terms) / risk.kappa())
}

pub fn multi_ice_conditional(
    joint: &JointPmf,
    odds: &OddsProfile,
    bets: &[CondPmf],
    risk: &RiskVector,
) -> Result<f64> {
    log_multi_ice_conditional(joint, odds, bets, risk).map(exp)
}

/// Output of the backward cascade over lotteries `d, d−1, …, 1`.
struct Cascade {
    /// Index `k − 1` holds lottery `k`.
    terms: Vec<PenaltyTerm>,
    log_c: Vec<f64>,
    bets: Vec<CondPmf>,
}

/// Runs the cascade on `p_G(g) p(x|g)`. With `bets = None` every bet is
/// set to its cascade target on the way down, which zeroes all penalties.
fn cascade(
    orders: &OrderVector,
    p_g: &Pmf,
    p_given: &CondPmf,
    odds: &OddsProfile,
    bets: Option<&[CondPmf]>,
) -> Result<Cascade> {
    let a = orders.alphas();
    let d = a.len() - 1;
    let n_x = p_given.n_outcomes();
    let n_g = p_g.len();
    let a0 = a[0];
    let mut prefix = Vec::with_capacity(d + 1);
    let mut acc = 0.0;
    for &ak in a {
        acc += ak;
        prefix.push(acc);
    }
    let ln_odds: Vec<Vec<f64>> = odds
        .rows()
        .iter()
        .map(|row| row.iter().map(|&o| ln(o)).collect())
        .collect();

    // ln b^k(x|g) for lotteries already fixed, index k − 1
    let mut ln_bets: Vec<Vec<Vec<f64>>> = vec![Vec::new(); d];
    let mut chosen: Vec<Option<CondPmf>> = vec![None; d];
    if let Some(bets) = bets {
        for (k, b) in bets.iter().enumerate() {
            let mut rows = vec![vec![0.0; n_x]; n_g];
            for (g, row) in rows.iter_mut().enumerate() {
                for (x, v) in row.iter_mut().enumerate() {
                    let p = if p_g.get(g) > 0.0 {
                        p_given.get(x, g)
                    } else {
                        0.0
                    };
                    *v = ln_bet(b.get(x, g), p, k, x)?;
                }
            }
            ln_bets[k] = rows;
            chosen[k] = Some(b.clone());
        }
    }

    let logits = |k: usize, ln_bets: &[Vec<Vec<f64>>], g: usize| -> Vec<f64> {
        (0..n_x)
            .map(|x| {
                let p = p_given.get(x, g);
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let mut t = a0 * ln(p);
                for l in 1..=k {
                    t -= a[l] * ln_odds[l - 1][x];
                }
                for m in k + 1..=d {
                    if a[m] != 0.0 {
                        t -= a[m] * (ln_bets[m - 1][g][x] + ln_odds[m - 1][x]);
                    }
                }
                t / prefix[k]
            })
            .collect()
    };

    let mut log_c = vec![0.0; d + 1];
    let mut terms: Vec<Option<PenaltyTerm>> = vec![None; d];
    for k in (0..=d).rev() {
        let mut ln_small_c = vec![f64::NEG_INFINITY; n_g];
        let mut q_rows = Vec::with_capacity(n_g);
        for (g, c_g) in ln_small_c.iter_mut().enumerate() {
            if p_g.get(g) <= 0.0 {
                q_rows.push(Pmf::uniform(n_x)?);
                continue;
            }
            let l = logits(k, &ln_bets, g);
            let c = log_sum_exp(&l);
            if !c.is_finite() {
                return Err(Error::DegeneratePosterior(g));
            }
            *c_g = c;
            q_rows.push(Pmf::new(l.iter().map(|v| exp(v - c)).collect())?);
        }
        let weights: Vec<f64> = (0..n_g)
            .map(|g| {
                let w = p_g.get(g);
                if w > 0.0 {
                    ln(w) + prefix[k] / a0 * ln_small_c[g]
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let big_c = log_sum_exp(&weights);
        log_c[k] = big_c;
        if k == 0 {
            break;
        }
        let q_g = Pmf::new(weights.iter().map(|w| exp(w - big_c)).collect())?;
        let q_given_g = CondPmf::new(q_rows)?;
        let bet = match &chosen[k - 1] {
            Some(b) => b.clone(),
            None => {
                let b = q_given_g.clone();
                ln_bets[k - 1] = b
                    .rows()
                    .iter()
                    .map(|r| {
                        r.mass()
                            .iter()
                            .map(|&v| if v > 0.0 { ln(v) } else { f64::NEG_INFINITY })
                            .collect()
                    })
                    .collect();
                chosen[k - 1] = Some(b.clone());
                b
            }
        };
        let s = prefix[k] / prefix[k - 1];
        let mut q_joint = Vec::with_capacity(n_x * n_g);
        let mut r_joint = Vec::with_capacity(n_x * n_g);
        for g in 0..n_g {
            for x in 0..n_x {
                q_joint.push(q_g.get(g) * q_given_g.get(x, g));
                r_joint.push(q_g.get(g) * bet.get(x, g));
            }
        }
        let penalty = renyi_bivariate(s, &Pmf::new(q_joint)?, &Pmf::new(r_joint)?)?;
        let target = if n_g == 1 {
            CascadeTarget::Unconditional(q_given_g.row(0).clone())
        } else {
            CascadeTarget::Conditional { q_g, q_given_g }
        };
        terms[k - 1] = Some(PenaltyTerm {
            order: s,
            coefficient: a[k] / (a0 - 1.0),
            penalty,
            target,
        });
    }
    Ok(Cascade {
        terms: terms.into_iter().map(|t| t.expect("filled")).collect(),
        log_c,
        bets: chosen.into_iter().map(|b| b.expect("filled")).collect(),
    })
}

fn fairness_terms(orders: &OrderVector, odds: &OddsProfile) -> Vec<f64> {
    let a = orders.alphas();
    (1..a.len())
        .map(|k| a[k] / (a[0] - 1.0) * ln(odds.fairness(k - 1)))
        .collect()
}

fn default_pivot<F: Fn(Option<usize>) -> Result<f64>>(f: F) -> Result<Option<f64>> {
    match f(None) {
        Ok(v) => Ok(Some(v)),
        Err(Error::SingularPivot) => Ok(None),
        Err(e) => Err(e),
    }
}

fn recompose(divergence: f64, terms: &[PenaltyTerm], fairness: &[f64]) -> f64 {
    divergence
        + terms
            .iter()
            .zip(fairness)
            .map(|(t, f)| t.coefficient * t.penalty + f)
            .sum::<f64>()
}

fn unconditional_divergence(
    orders: &OrderVector,
    p0: &Pmf,
    odds: &OddsProfile,
    pivot: Option<usize>,
) -> Result<f64> {
    let mut pmfs = Vec::with_capacity(orders.len());
    pmfs.push(p0.clone());
    pmfs.extend(odds.induced_all());
    renyi_multivariate(orders, &pmfs, pivot)
}

fn conditional_divergence(
    orders: &OrderVector,
    p_g: &Pmf,
    p_given: &CondPmf,
    odds: &OddsProfile,
    pivot: Option<usize>,
) -> Result<f64> {
    let mut conds = Vec::with_capacity(orders.len());
    conds.push(p_given.clone());
    for p in odds.induced_all() {
        conds.push(CondPmf::constant(p, p_g.len())?);
    }
    renyi_conditional(orders, orders.get(0), &conds, p_g, pivot)
}

fn single(p0: &Pmf) -> Result<(Pmf, CondPmf)> {
    Ok((Pmf::point(1, 0)?, CondPmf::constant(p0.clone(), 1)?))
}

fn as_conditional(bets: &[Pmf]) -> Result<Vec<CondPmf>> {
    bets.iter()
        .map(|b| CondPmf::constant(b.clone(), 1))
        .collect()
}

/// Splits `ln ICE` into the Rényi divergence of `p⁰` and the odds-induced
/// PMFs, one bet penalty per lottery and one fairness term per lottery.
/// The recomposition equals `ln ICE`.
pub fn decompose_ice(
    p0: &Pmf,
    odds: &OddsProfile,
    bets: &[Pmf],
    risk: &RiskVector,
) -> Result<DecompositionReport> {
    let log_ice = log_multi_ice_unconditional(p0, odds, bets, risk)?;
    let orders = risk_to_orders(risk)?;
    let (p_g, p_given) = single(p0)?;
    let cond_bets = as_conditional(bets)?;
    let run = cascade(&orders, &p_g, &p_given, odds, Some(&cond_bets))?;
    let optimal = cascade(&orders, &p_g, &p_given, odds, None)?;
    let divergence_term = unconditional_divergence(&orders, p0, odds, Some(0))?;
    let divergence_term_default_pivot =
        default_pivot(|piv| unconditional_divergence(&orders, p0, odds, piv))?;
    let fairness = fairness_terms(&orders, odds);
    let recomposed = recompose(divergence_term, &run.terms, &fairness);
    let optimal_log_ice = divergence_term + fairness.iter().sum::<f64>();
    Ok(DecompositionReport {
        orders,
        log_ice,
        recomposed,
        divergence_term,
        divergence_term_default_pivot,
        penalty_terms: run.terms,
        fairness_terms: fairness,
        log_c: run.log_c,
        optimal_bets: BettingProfile::Unconditional(
            optimal.bets.iter().map(|b| b.row(0).clone()).collect(),
        ),
        optimal_log_ice,
    })
}

/// Upper bound on `ln ICE` with side information by the conditional Rényi
/// divergence (second order `α_0`), bet penalties on the joint and
/// fairness terms. With one lottery, or at the optimal bets, the bound is
/// tight.
pub fn decompose_ice_conditional(
    joint: &JointPmf,
    odds: &OddsProfile,
    bets: &[CondPmf],
    risk: &RiskVector,
) -> Result<DecompositionReport> {
    let log_ice = log_multi_ice_conditional(joint, odds, bets, risk)?;
    let orders = risk_to_orders(risk)?;
    let parts = joint.decompose();
    let run = cascade(&orders, &parts.p_g, &parts.conditional, odds, Some(bets))?;
    let optimal = cascade(&orders, &parts.p_g, &parts.conditional, odds, None)?;
    let divergence_term =
        conditional_divergence(&orders, &parts.p_g, &parts.conditional, odds, Some(0))?;
    let divergence_term_default_pivot = default_pivot(|piv| {
        conditional_divergence(&orders, &parts.p_g, &parts.conditional, odds, piv)
    })?;
    let fairness = fairness_terms(&orders, odds);
    let recomposed = recompose(divergence_term, &run.terms, &fairness);
    let optimal_log_ice = divergence_term + fairness.iter().sum::<f64>();
    Ok(DecompositionReport {
        orders,
        log_ice,
        recomposed,
        divergence_term,
        divergence_term_default_pivot,
        penalty_terms: run.terms,
        fairness_terms: fairness,
        log_c: run.log_c,
        optimal_bets: BettingProfile::Conditional(optimal.bets),
        optimal_log_ice,
    })
}

/// Bets maximizing the ICE, built by the backward recursion
/// `b^d = q^d, b^{d−1} = q^{d−1}, …`, and the maximal `ln ICE`.
pub fn optimal_bets_unconditional(
    p0: &Pmf,
    odds: &OddsProfile,
    risk: &RiskVector,
) -> Result<(Vec<Pmf>, f64)> {
    check_game(p0.len(), odds, risk.len(), risk)?;
    let orders = risk_to_orders(risk)?;
    let (p_g, p_given) = single(p0)?;
    let run = cascade(&orders, &p_g, &p_given, odds, None)?;
    let value = unconditional_divergence(&orders, p0, odds, Some(0))?
        + fairness_terms(&orders, odds).iter().sum::<f64>();
    Ok((run.bets.iter().map(|b| b.row(0).clone()).collect(), value))
}

/// Conditional bets maximizing the ICE with side information and the
/// maximal `ln ICE`. Rows for `g` with `p_G(g) = 0` are uniform.
pub fn optimal_bets_conditional(
    joint: &JointPmf,
    odds: &OddsProfile,
    risk: &RiskVector,
) -> Result<(Vec<CondPmf>, f64)> {
    check_game(joint.n_x(), odds, risk.len(), risk)?;
    let orders = risk_to_orders(risk)?;
    let parts = joint.decompose();
    let run = cascade(&orders, &parts.p_g, &parts.conditional, odds, None)?;
    let value = conditional_divergence(&orders, &parts.p_g, &parts.conditional, odds, Some(0))?
        + fairness_terms(&orders, odds).iter().sum::<f64>();
    Ok((run.bets, value))
}

/// Optimal `ln ICE` with side information minus the optimum on the
/// `X`-marginal alone, under the same odds.
pub fn side_info_gain(joint: &JointPmf, odds: &OddsProfile, risk: &RiskVector) -> Result<f64> {
    let (_, conditional) = optimal_bets_conditional(joint, odds, risk)?;
    let (_, unconditional) = optimal_bets_unconditional(&joint.marginal_x(), odds, risk)?;
    Ok(conditional - unconditional)
}

/// Largest expected wealth `Σ_g max_x p⁰(x, g) o(x)` of a risk-neutral
/// gambler on one lottery, reached by betting everything on the best
/// outcome for each `g`.
pub fn risk_neutral_optimum(joint: &JointPmf, odds: &[f64]) -> Result<f64> {
    same_len(joint.n_x(), odds.len())?;
    for (outcome, &value) in odds.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidOdds {
                lottery: 0,
                outcome,
                value,
            });
        }
    }
    Ok((0..joint.n_g())
        .map(|g| {
            (0..joint.n_x())
                .map(|x| joint.get(x, g) * odds[x])
                .fold(0.0, f64::max)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::OrderCase;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    fn risk(v: &[f64]) -> RiskVector {
        RiskVector::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    #[test]
    fn risk_to_orders_examples() {
        let o = risk_to_orders(&risk(&[2.0])).unwrap();
        assert_eq!(o.alphas(), &[0.5, 0.5]);
        assert_eq!(o.case(), OrderCase::I);
        let o = risk_to_orders(&risk(&[0.6, 0.6])).unwrap();
        assert!(close(o.get(0), 5.0, 1e-12));
        assert!(close(o.get(1), -2.0, 1e-12));
        assert_eq!(o.case(), OrderCase::II);
        assert!(matches!(
            risk_to_orders(&risk(&[0.5, 0.5])),
            Err(Error::InadmissibleRisk(_))
        ));
        assert_eq!(RiskVector::new(vec![1.0, 1.0]), Err(Error::ExcludedLimit));
        assert_eq!(RiskVector::new(vec![0.5, 1.5]), Err(Error::ExcludedLimit));
    }

    #[test]
    fn orders_round_trip() {
        for r in [
            vec![2.0],
            vec![1.5, 3.0, 1.0],
            vec![0.6, 0.7],
            vec![0.9, 0.8, 0.95],
        ] {
            let rv = risk(&r);
            let back = orders_to_risk(&risk_to_orders(&rv).unwrap()).unwrap();
            for (a, b) in r.iter().zip(back.values()) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn utility_examples() {
        assert_eq!(isoelastic_utility(0.0, 3.5).unwrap(), 3.5);
        assert_eq!(isoelastic_utility(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(isoelastic_utility(2.0, 2.0).unwrap(), -0.5);
        assert!(isoelastic_utility(2.0, 0.0).is_err());
        assert!(isoelastic_utility(2.0, -1.0).is_err());
    }

    #[test]
    fn utility_inversion() {
        let r = risk(&[2.0, 3.0]);
        let u = multi_commodity_utility(&r, &[1.7, 1.7]).unwrap();
        assert!(close(
            invert_multi_commodity_utility(&r, u).unwrap(),
            1.7,
            1e-12
        ));
        assert!(multi_commodity_utility(&risk(&[1.0, 2.0]), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn ice_examples() {
        let p = pmf(&[0.75, 0.25]);
        let odds = OddsProfile::new(vec![vec![2.0, 2.0]]).unwrap();
        let b = pmf(&[0.634, 0.366]);
        let ice =
            multi_ice_unconditional(&p, &odds, core::slice::from_ref(&b), &risk(&[2.0])).unwrap();
        assert!(close(ice, 1.071_796_766_743_649, 1e-12));
        let neutral = multi_ice_unconditional(&p, &odds, &[b], &risk(&[0.0])).unwrap();
        assert!(close(
            neutral,
            0.75 * 0.634 * 2.0 + 0.25 * 0.366 * 2.0,
            1e-14
        ));
    }

    #[test]
    fn constant_wealth() {
        let p = pmf(&[0.1, 0.2, 0.7]);
        let b = pmf(&[0.2, 0.3, 0.5]);
        let odds = OddsProfile::new(vec![
            b.mass().iter().map(|m| 1.3 / m).collect(),
            b.mass().iter().map(|m| 1.3 / m).collect(),
        ])
        .unwrap();
        for r in [vec![2.0, 3.0], vec![0.7, 0.8]] {
            let ice =
                multi_ice_unconditional(&p, &odds, &[b.clone(), b.clone()], &risk(&r)).unwrap();
            assert!(close(ice, 1.3, 1e-12));
        }
    }

    #[test]
    fn zero_bet_rejected() {
        let p = pmf(&[0.5, 0.5]);
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        assert_eq!(
            multi_ice_unconditional(&p, &odds, &[pmf(&[1.0, 0.0])], &risk(&[2.0])),
            Err(Error::ZeroBet {
                lottery: 0,
                outcome: 1
            })
        );
    }

    #[test]
    fn optimal_example() {
        let p = pmf(&[0.75, 0.25]);
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        let (bets, v) = optimal_bets_unconditional(&p, &odds, &risk(&[2.0])).unwrap();
        assert!(close(bets[0].get(0), 0.633_974_596_215_561_4, 1e-12));
        assert!(close(v, 0.069_336_464_195_073_91, 1e-12));
        let direct = log_multi_ice_unconditional(&p, &odds, &bets, &risk(&[2.0])).unwrap();
        assert!(close(direct, v, 1e-12));
    }

    #[test]
    fn symmetric_optimum() {
        let p = Pmf::uniform(3).unwrap();
        let odds = OddsProfile::constant(3, 2, 3.0).unwrap();
        let (bets, v) = optimal_bets_unconditional(&p, &odds, &risk(&[1.5, 4.0])).unwrap();
        assert!(close(v, 0.0, 1e-14));
        for b in bets {
            for &m in b.mass() {
                assert!(close(m, 1.0 / 3.0, 1e-14));
            }
        }
    }

    #[test]
    fn decomposition_identity() {
        let p = pmf(&[0.5, 0.3, 0.2]);
        let odds = OddsProfile::new(vec![vec![2.5, 3.0, 4.0], vec![1.5, 5.0, 6.0]]).unwrap();
        let bets = [pmf(&[0.2, 0.5, 0.3]), pmf(&[0.4, 0.4, 0.2])];
        for r in [vec![1.5, 3.0], vec![0.8, 0.6], vec![4.0, 1.0]] {
            let rep = decompose_ice(&p, &odds, &bets, &risk(&r)).unwrap();
            assert!(close(rep.log_ice, rep.recomposed, 1e-12), "{r:?}");
            let a0 = rep.orders.get(0);
            let from_c = a0 / (a0 - 1.0) * rep.log_c[0];
            assert!(close(from_c, rep.log_ice, 1e-12));
        }
    }

    #[test]
    fn decomposition_fixture() {
        let p = pmf(&[0.75, 0.25]);
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        let rep = decompose_ice(&p, &odds, &[pmf(&[0.5, 0.5])], &risk(&[2.0])).unwrap();
        assert!(close(rep.divergence_term, 0.069_336_464_195_073_91, 1e-14));
        assert!(close(rep.log_ice, 0.0, 1e-15));
        assert!(close(
            rep.penalty_terms[0].penalty,
            0.069_336_464_195_073_91,
            1e-13
        ));
        assert!(close(rep.recomposed, 0.0, 1e-13));
    }

    #[test]
    fn conditional_reduces_to_unconditional() {
        let px = pmf(&[0.6, 0.3, 0.1]);
        let pg = pmf(&[0.25, 0.75]);
        let joint = JointPmf::product(&px, &pg);
        let odds = OddsProfile::new(vec![vec![2.0, 4.0, 5.0]]).unwrap();
        let b = pmf(&[0.3, 0.3, 0.4]);
        let cb = CondPmf::constant(b.clone(), 2).unwrap();
        let r = risk(&[2.5]);
        let c = multi_ice_conditional(&joint, &odds, &[cb], &r).unwrap();
        let u = multi_ice_unconditional(&px, &odds, &[b], &r).unwrap();
        assert!(close(c, u, 1e-13));
        assert!(close(
            side_info_gain(&joint, &odds, &r).unwrap(),
            0.0,
            1e-12
        ));
    }

    #[test]
    fn conditional_bound_and_optimum() {
        let joint = JointPmf::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        let r = risk(&[2.0]);
        let (bets, v) = optimal_bets_conditional(&joint, &odds, &r).unwrap();
        assert!(close(v, 0.044_947_374_260_354_01, 1e-12));
        let direct = log_multi_ice_conditional(&joint, &odds, &bets, &r).unwrap();
        assert!(close(direct, v, 1e-12));

        let joint = JointPmf::from_rows(&[
            vec![0.2, 0.1, 0.05],
            vec![0.05, 0.2, 0.1],
            vec![0.1, 0.05, 0.15],
        ])
        .unwrap();
        let odds = OddsProfile::new(vec![vec![2.5, 3.0, 4.0], vec![2.0, 2.5, 6.0]]).unwrap();
        let bets = [
            CondPmf::new(vec![
                pmf(&[0.3, 0.3, 0.4]),
                pmf(&[0.5, 0.25, 0.25]),
                pmf(&[0.2, 0.2, 0.6]),
            ])
            .unwrap(),
            CondPmf::new(vec![
                pmf(&[0.6, 0.2, 0.2]),
                pmf(&[0.1, 0.8, 0.1]),
                pmf(&[0.3, 0.4, 0.3]),
            ])
            .unwrap(),
        ];
        for rv in [vec![1.5, 3.0], vec![0.8, 0.7]] {
            let rep = decompose_ice_conditional(&joint, &odds, &bets, &risk(&rv)).unwrap();
            assert!(rep.gap() >= -1e-12, "{rv:?}: {}", rep.gap());
            let (opt, v) = optimal_bets_conditional(&joint, &odds, &risk(&rv)).unwrap();
            let direct = log_multi_ice_conditional(&joint, &odds, &opt, &risk(&rv)).unwrap();
            assert!(close(direct, v, 1e-12));
            assert!(rep.log_ice <= v + 1e-12);
        }
    }

    #[test]
    fn risk_neutral() {
        let joint = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.25, 0.25]]).unwrap();
        assert!(close(
            risk_neutral_optimum(&joint, &[2.0, 2.0]).unwrap(),
            1.5,
            1e-15
        ));
    }

    #[test]
    fn fairness_classes() {
        let odds = OddsProfile::new(vec![vec![2.0, 2.0], vec![1.5, 1.5], vec![3.0, 3.0]]).unwrap();
        assert_eq!(odds.class(0), Fairness::Fair);
        assert_eq!(odds.class(1), Fairness::SubFair);
        assert_eq!(odds.class(2), Fairness::SuperFair);
        let fair = OddsProfile::fair_from_pmfs(&[pmf(&[0.2, 0.8])]).unwrap();
        assert!(close(fair.fairness(0), 1.0, 1e-15));
        assert!(matches!(
            OddsProfile::new(vec![vec![0.0, 1.0]]),
            Err(Error::InvalidOdds { .. })
        ));
    }
}
