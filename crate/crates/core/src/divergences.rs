//! Bivariate, multivariate and conditional multivariate Rényi divergences.
//!
//! For orders `α = (α_0, …, α_d)` summing to one,
//!
//! ```text
//! D_α(p⁰, …, pᵈ) = 1/(α_* − 1) · ln Σ_x Π_k p^k(x)^{α_k},   α_* = max_k α_k
//! ```
//!
//! and the conditional version averages the inner sums over `p_G` with a
//! `1/β` power mean:
//!
//! ```text
//! D_{α,β}(p⁰_{X|G}, … | p_G) = β/(α_* − 1) · ln Σ_g p_G(g) (Σ_x Π_k p^k(x|g)^{α_k})^{1/β}
//! ```
//!
//! Admissible orders are either all nonnegative (case I) or have exactly one
//! component above one and the rest nonpositive (case II).
//!
//! Zero masses follow `0^0 = 1`, `0^a = 0` for `a > 0` and `0^a = ∞` for
//! `a < 0`. An outcome where a positively powered PMF vanishes contributes
//! nothing even if a negatively powered PMF also vanishes there.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, ln, log_sum_exp, scale, LogProduct};
use crate::prob::{same_len, CondPmf, Pmf, StochasticOp};
use crate::{Error, Result, INEQUALITY_TOL, NORMALIZATION_TOL};

/// Admissibility class of an order vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderCase {
    /// Every order is nonnegative.
    I,
    /// One order exceeds one, every other order is nonpositive.
    II,
}

/// A validated order vector `(α_0, …, α_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVector {
    alphas: Vec<f64>,
    case: OrderCase,
    pivot: usize,
}

/// Classifies `alphas` as case I or case II, or rejects them.
pub fn validate_orders(alphas: &[f64]) -> Result<OrderVector> {
    if alphas.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&bad) = alphas.iter().find(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "order",
            value: bad,
        });
    }
    let sum: f64 = alphas.iter().sum();
    let magnitude: f64 = alphas.iter().map(|a| abs(*a)).sum::<f64>().max(1.0);
    if abs(sum - 1.0) > NORMALIZATION_TOL * magnitude {
        return Err(Error::OrderSum(sum));
    }
    let case = if alphas.iter().all(|&a| a >= 0.0) {
        OrderCase::I
    } else {
        let above_one = alphas.iter().filter(|&&a| a > 1.0).count();
        let positive = alphas.iter().filter(|&&a| a > 0.0).count();
        if above_one > 1 {
            return Err(Error::InadmissibleOrders("more than one order exceeds 1"));
        }
        if above_one == 1 && positive == 1 {
            OrderCase::II
        } else {
            return Err(Error::InadmissibleOrders(
                "negative orders require exactly one order above 1 and all others nonpositive",
            ));
        }
    };
    let mut pivot = 0;
    for (k, &a) in alphas.iter().enumerate() {
        if a > alphas[pivot] {
            pivot = k;
        }
    }
    Ok(OrderVector {
        alphas: alphas.to_vec(),
        case,
        pivot,
    })
}

impl OrderVector {
    pub fn new(alphas: &[f64]) -> Result<Self> {
        validate_orders(alphas)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.alphas[k]
    }

    pub fn case(&self) -> OrderCase {
        self.case
    }

    /// Index of the largest order, lowest index on ties.
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// `α_*`.
    pub fn max_order(&self) -> f64 {
        self.alphas[self.pivot]
    }

    /// Number of PMFs, `d + 1`.
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `α_0 = α_*`, the condition under which the conditioning-system
    /// inequalities and the resource monotone are stated.
    pub fn require_pivot_zero(&self) -> Result<()> {
        if self.alphas[0] >= self.max_order() {
            Ok(())
        } else {
            Err(Error::PivotNotZero(self.pivot))
        }
    }

    fn pivot_value(&self, pivot_override: Option<usize>) -> Result<f64> {
        let k = pivot_override.unwrap_or(self.pivot);
        if k >= self.alphas.len() {
            return Err(Error::DimensionMismatch {
                expected: self.alphas.len(),
                found: k + 1,
            });
        }
        let a = self.alphas[k];
        if abs(a - 1.0) < NORMALIZATION_TOL {
            return Err(Error::SingularPivot);
        }
        Ok(a)
    }
}

fn check_family(orders: &OrderVector, pmfs: &[&Pmf]) -> Result<usize> {
    same_len(orders.len(), pmfs.len())?;
    let n = pmfs[0].len();
    for p in pmfs {
        same_len(n, p.len())?;
    }
    Ok(n)
}

/// `ln Σ_x Π_k p^k(x)^{α_k}` in extended reals.
fn log_moment(alphas: &[f64], pmfs: &[&Pmf]) -> f64 {
    let n = pmfs[0].len();
    let terms: Vec<f64> = (0..n)
        .map(|x| {
            let mut prod = LogProduct::default();
            for (p, &a) in pmfs.iter().zip(alphas) {
                prod.push(p.get(x), a);
            }
            prod.value()
        })
        .collect();
    log_sum_exp(&terms)
}

/// Kullback–Leibler divergence `Σ p ln(p/q)`; `+∞` when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_len(p.len(), q.len())?;
    let mut acc = 0.0;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            acc += a * ln(a / b);
        }
    }
    Ok(acc)
}

/// `1/(α−1) ln Σ p^α q^{1−α}`, with `α = 1` giving the KL divergence.
pub fn renyi_bivariate(alpha: f64, p: &Pmf, q: &Pmf) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    same_len(p.len(), q.len())?;
    if alpha == 1.0 {
        return kl_divergence(p, q);
    }
    let lm = log_moment(&[alpha, 1.0 - alpha], &[p, q]);
    Ok(scale(lm, 1.0 / (alpha - 1.0)))
}

/// Unconditional multivariate Rényi divergence.
///
/// `pivot_override` replaces `α_*` in the prefactor by another order. The
/// betting identities divide by `α_0 − 1`, which differs from `α_* − 1`
/// when some `α_k > α_0`.
pub fn renyi_multivariate(
    orders: &OrderVector,
    pmfs: &[Pmf],
    pivot_override: Option<usize>,
) -> Result<f64> {
    let refs: Vec<&Pmf> = pmfs.iter().collect();
    renyi_multivariate_refs(orders, &refs, pivot_override)
}

pub(crate) fn renyi_multivariate_refs(
    orders: &OrderVector,
    pmfs: &[&Pmf],
    pivot_override: Option<usize>,
) -> Result<f64> {
    check_family(orders, pmfs)?;
    let a = orders.pivot_value(pivot_override)?;
    let lm = log_moment(orders.alphas(), pmfs);
    Ok(scale(lm, 1.0 / (a - 1.0)))
}

/// Conditional multivariate Rényi divergence with second order `beta > 0`.
///
/// Conditioning outcomes with `p_G(g) = 0` carry no weight.
pub fn renyi_conditional(
    orders: &OrderVector,
    beta: f64,
    conditionals: &[CondPmf],
    p_g: &Pmf,
    pivot_override: Option<usize>,
) -> Result<f64> {
    let refs: Vec<&CondPmf> = conditionals.iter().collect();
    renyi_conditional_refs(orders, beta, &refs, p_g, pivot_override)
}

pub(crate) fn renyi_conditional_refs(
    orders: &OrderVector,
    beta: f64,
    conditionals: &[&CondPmf],
    p_g: &Pmf,
    pivot_override: Option<usize>,
) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
        });
    }
    same_len(orders.len(), conditionals.len())?;
    let n_x = conditionals[0].n_outcomes();
    for c in conditionals {
        same_len(p_g.len(), c.n_given())?;
        same_len(n_x, c.n_outcomes())?;
    }
    let a = orders.pivot_value(pivot_override)?;
    let mut outer = Vec::with_capacity(p_g.len());
    let mut rows: Vec<&Pmf> = vec![conditionals[0].row(0); conditionals.len()];
    for g in 0..p_g.len() {
        let w = p_g.get(g);
        if w <= 0.0 {
            continue;
        }
        for (slot, c) in rows.iter_mut().zip(conditionals) {
            *slot = c.row(g);
        }
        let inner = log_moment(orders.alphas(), &rows);
        outer.push(ln(w) + scale(inner, 1.0 / beta));
    }
    Ok(scale(log_sum_exp(&outer), beta / (a - 1.0)))
}

fn check_gammas(gammas: &[f64], n_refs: usize) -> Result<()> {
    same_len(n_refs, gammas.len())?;
    if gammas.is_empty() {
        return Err(Error::Empty);
    }
    for &g in gammas {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: g,
            });
        }
    }
    let sum: f64 = gammas.iter().sum();
    if abs(sum - 1.0) > NORMALIZATION_TOL {
        return Err(Error::InvalidParameter {
            name: "gamma sum",
            value: sum,
        });
    }
    Ok(())
}

fn check_full_family(pmfs: &[Pmf]) -> Result<usize> {
    let n = pmfs.first().ok_or(Error::Empty)?.len();
    for p in pmfs {
        same_len(n, p.len())?;
        p.require_full_support()?;
    }
    Ok(n)
}

/// `Σ_k γ_k D_KL(p⁰ ‖ pᵏ)`, the limit of the order path at `λ → 1`.
pub fn kl_mixture_limit(gammas: &[f64], pmfs: &[Pmf]) -> Result<f64> {
    check_full_family(pmfs)?;
    check_gammas(gammas, pmfs.len() - 1)?;
    let mut acc = 0.0;
    for (g, p) in gammas.iter().zip(&pmfs[1..]) {
        acc += g * kl_divergence(&pmfs[0], p)?;
    }
    Ok(acc)
}

/// `max_x ln[p⁰(x) / Π_k pᵏ(x)^{γ_k}]`, the limit of the order path at
/// `λ → ∞`.
pub fn tropical_limit(gammas: &[f64], pmfs: &[Pmf]) -> Result<f64> {
    let n = check_full_family(pmfs)?;
    check_gammas(gammas, pmfs.len() - 1)?;
    let mut best = f64::NEG_INFINITY;
    for x in 0..n {
        let mut v = ln(pmfs[0].get(x));
        for (g, p) in gammas.iter().zip(&pmfs[1..]) {
            v -= g * ln(p.get(x));
        }
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// A point `λ` on the order path `(λ, (1−λ)γ_1, …, (1−λ)γ_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    gammas: Vec<f64>,
    lambda: f64,
}

impl PathSpec {
    /// Requires `γ` on the simplex, `λ ≥ max_k γ_k/(γ_k+1)` and `λ ≠ 1`.
    pub fn new(gammas: Vec<f64>, lambda: f64) -> Result<Self> {
        check_gammas(&gammas, gammas.len())?;
        if !lambda.is_finite() || lambda == 1.0 || lambda < Self::lower_bound(&gammas) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self { gammas, lambda })
    }

    /// Smallest admissible `λ` for the given weights.
    pub fn lower_bound(gammas: &[f64]) -> f64 {
        gammas.iter().map(|g| g / (g + 1.0)).fold(0.0, f64::max)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Orders `(λ, (1−λ)γ_1, …, (1−λ)γ_d)`; the pivot is index 0.
pub fn path_orders(spec: &PathSpec) -> Result<OrderVector> {
    let l = spec.lambda;
    let mut alphas = Vec::with_capacity(spec.gammas.len() + 1);
    alphas.push(l);
    alphas.extend(spec.gammas.iter().map(|g| (1.0 - l) * g));
    let mut orders = validate_orders(&alphas)?;
    // on the boundary λ = γ/(γ+1) rounding may lift a tied order above α_0
    if orders.alphas[orders.pivot] - l <= 4.0 * f64::EPSILON * l.max(1.0) {
        orders.pivot = 0;
    }
    Ok(orders)
}

/// Both sides of a data processing inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpiReport {
    pub before: f64,
    pub after: f64,
    /// `before ≥ after − 1e-9`.
    pub holds: bool,
}

impl DpiReport {
    fn new(before: f64, after: f64) -> Self {
        let holds = before == f64::INFINITY || before >= after - INEQUALITY_TOL;
        Self {
            before,
            after,
            holds,
        }
    }

    pub fn slack(&self) -> f64 {
        self.before - self.after
    }
}

/// Evaluates `D_α(p⁰, …, pᵈ) ≥ D_α(T p⁰, …, T pᵈ)`.
pub fn dpi_check(orders: &OrderVector, pmfs: &[Pmf], op: &StochasticOp) -> Result<DpiReport> {
    let before = renyi_multivariate(orders, pmfs, None)?;
    let images = pmfs
        .iter()
        .map(|p| op.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let after = renyi_multivariate(orders, &images, None)?;
    Ok(DpiReport::new(before, after))
}

/// Data processing on the main system: `kernels[g]` maps `𝒳 → 𝒴` and is
/// applied to every conditional at `g`.
pub fn main_system_dpi_check(
    orders: &OrderVector,
    beta: f64,
    conditionals: &[CondPmf],
    p_g: &Pmf,
    kernels: &[StochasticOp],
) -> Result<DpiReport> {
    same_len(p_g.len(), kernels.len())?;
    let before = renyi_conditional(orders, beta, conditionals, p_g, None)?;
    let images = conditionals
        .iter()
        .map(|c| {
            let rows = c
                .rows()
                .iter()
                .zip(kernels)
                .map(|(row, t)| t.apply(row))
                .collect::<Result<Vec<_>>>()?;
            CondPmf::new(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let after = renyi_conditional(orders, beta, &images, p_g, None)?;
    Ok(DpiReport::new(before, after))
}

/// Outcome of [`conditioning_dpi_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningDpiReport {
    /// `D_{α,α_0}(p⁰_{X|G}, r¹, …, rᵈ | p_G)`.
    pub before: f64,
    /// `D_{α,α_0}(q⁰_{X|H}, r¹, …, rᵈ | q_H)`.
    pub after: f64,
    /// `D_α(p⁰_X, r¹, …, rᵈ)` with `p⁰_X` the `X`-marginal.
    pub unconditional: f64,
    /// `before ≥ after − 1e-9`.
    pub holds: bool,
    /// `before ≥ unconditional − 1e-9`.
    pub unconditional_holds: bool,
    pub q_h: Pmf,
    /// `q⁰(x | h)`; rows for unreachable `h` hold a uniform placeholder.
    pub q0_given_h: CondPmf,
}

/// Postprocesses the conditioning system with `op: 𝒢 → ℋ` and compares
/// the conditional divergence before and after, with `r¹, …, rᵈ` held
/// independent of the condition. Requires `α_0 = α_*`.
pub fn conditioning_dpi_check(
    orders: &OrderVector,
    p0_given_g: &CondPmf,
    refs: &[Pmf],
    p_g: &Pmf,
    op: &StochasticOp,
) -> Result<ConditioningDpiReport> {
    orders.require_pivot_zero()?;
    same_len(orders.len(), refs.len() + 1)?;
    same_len(p_g.len(), p0_given_g.n_given())?;
    same_len(p_g.len(), op.n_in())?;
    let n_x = p0_given_g.n_outcomes();
    for r in refs {
        same_len(n_x, r.len())?;
    }
    let beta = orders.get(0);
    let q_h = op.apply(p_g)?;
    // q⁰(x|h) = Σ_g p_G(g) t(h|g) p⁰(x|g) / q_H(h)
    let rows = (0..op.n_out())
        .map(|h| {
            let qh = q_h.get(h);
            if qh <= 0.0 {
                return Pmf::uniform(n_x);
            }
            let mut row = vec![0.0; n_x];
            for g in 0..p_g.len() {
                let w = p_g.get(g) * op.get(h, g) / qh;
                for (x, v) in row.iter_mut().enumerate() {
                    *v += w * p0_given_g.get(x, g);
                }
            }
            Pmf::from_weights(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let q0_given_h = CondPmf::new(rows)?;

    let family = |first: &CondPmf, n_given: usize| -> Result<Vec<CondPmf>> {
        let mut v = Vec::with_capacity(refs.len() + 1);
        v.push(first.clone());
        for r in refs {
            v.push(CondPmf::constant(r.clone(), n_given)?);
        }
        Ok(v)
    };
    let before = renyi_conditional(orders, beta, &family(p0_given_g, p_g.len())?, p_g, None)?;
    let after = renyi_conditional(orders, beta, &family(&q0_given_h, q_h.len())?, &q_h, None)?;

    let mut p0_x = vec![0.0; n_x];
    for g in 0..p_g.len() {
        for (x, v) in p0_x.iter_mut().enumerate() {
            *v += p_g.get(g) * p0_given_g.get(x, g);
        }
    }
    let mut uncond = Vec::with_capacity(refs.len() + 1);
    uncond.push(Pmf::from_weights(p0_x)?);
    uncond.extend(refs.iter().cloned());
    let unconditional = renyi_multivariate(orders, &uncond, None)?;

    let holds = before == f64::INFINITY || before >= after - INEQUALITY_TOL;
    let unconditional_holds = before == f64::INFINITY || before >= unconditional - INEQUALITY_TOL;
    Ok(ConditioningDpiReport {
        before,
        after,
        unconditional,
        holds,
        unconditional_holds,
        q_h,
        q0_given_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    #[test]
    fn validate_examples() {
        let o = validate_orders(&[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(o.case(), OrderCase::I);
        assert_eq!(o.pivot(), 0);
        let o = validate_orders(&[2.0, -0.5, -0.5]).unwrap();
        assert_eq!(o.case(), OrderCase::II);
        assert_eq!(o.pivot(), 0);
        assert!(matches!(
            validate_orders(&[1.5, 0.5, -1.0]),
            Err(Error::InadmissibleOrders(_))
        ));
        assert!(matches!(
            validate_orders(&[2.0, 2.0, -3.0]),
            Err(Error::InadmissibleOrders(_))
        ));
        assert!(matches!(
            validate_orders(&[0.5, 0.6]),
            Err(Error::OrderSum(_))
        ));
        assert_eq!(validate_orders(&[]), Err(Error::Empty));
        // ties resolve to the lowest index
        assert_eq!(validate_orders(&[0.25, 0.5, 0.25]).unwrap().pivot(), 1);
        assert_eq!(validate_orders(&[0.4, 0.4, 0.2]).unwrap().pivot(), 0);
    }

    #[test]
    fn bivariate_examples() {
        let p = pmf(&[0.75, 0.25]);
        let q = pmf(&[0.5, 0.5]);
        for a in [0.0, 0.3, 1.0, 2.0, 7.5] {
            assert!(close(renyi_bivariate(a, &p, &p).unwrap(), 0.0, 1e-15));
        }
        assert!(close(
            renyi_bivariate(2.0, &p, &q).unwrap(),
            0.223_143_551_314_209_76,
            1e-14
        ));
        assert!(close(
            renyi_bivariate(1.0, &p, &q).unwrap(),
            0.130_812_035_941_136_96,
            1e-14
        ));
        assert!(matches!(
            renyi_bivariate(-0.5, &p, &q),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn bivariate_support() {
        let p = pmf(&[1.0, 0.0]);
        let q = pmf(&[0.0, 1.0]);
        assert_eq!(renyi_bivariate(2.0, &p, &q).unwrap(), f64::INFINITY);
        assert_eq!(renyi_bivariate(0.5, &p, &q).unwrap(), f64::INFINITY);
        assert_eq!(renyi_bivariate(1.0, &p, &q).unwrap(), f64::INFINITY);
        // 0^0 = 1 makes every outcome count at α = 0
        let r = pmf(&[0.5, 0.5]);
        assert_eq!(renyi_bivariate(0.0, &p, &r).unwrap(), 0.0);
    }

    #[test]
    fn multivariate_examples() {
        let p = pmf(&[0.75, 0.25]);
        let u = pmf(&[0.5, 0.5]);
        let o = validate_orders(&[0.5, 0.25, 0.25]).unwrap();
        let v = renyi_multivariate(&o, &[p.clone(), u.clone(), u.clone()], None).unwrap();
        assert!(close(v, 0.069_336_464_195_073_91, 1e-14));
        let same = renyi_multivariate(&o, &[p.clone(), p.clone(), p.clone()], None).unwrap();
        assert!(close(same, 0.0, 1e-15));
        let o2 = validate_orders(&[0.3, 0.7]).unwrap();
        let d1 = renyi_multivariate(&o2, &[p.clone(), u.clone()], None).unwrap();
        // pivot is α_1 = 0.7: D = 1/(0.7−1) ln Σ p^0.3 u^0.7 = D_0.7(u‖p)
        assert!(close(d1, renyi_bivariate(0.7, &u, &p).unwrap(), 1e-14));
    }

    #[test]
    fn singular_pivot() {
        let p = pmf(&[0.75, 0.25]);
        let o = validate_orders(&[1.0, 0.0]).unwrap();
        assert_eq!(
            renyi_multivariate(&o, &[p.clone(), p.clone()], None),
            Err(Error::SingularPivot)
        );
    }

    #[test]
    fn case_two_support_is_infinite() {
        let o = validate_orders(&[2.0, -1.0]).unwrap();
        let p = pmf(&[0.5, 0.5]);
        let q = pmf(&[1.0, 0.0]);
        assert_eq!(
            renyi_multivariate(&o, &[p.clone(), q.clone()], None).unwrap(),
            f64::INFINITY
        );
        // the pivot vanishing where the reference vanishes is harmless
        let r = pmf(&[1.0, 0.0]);
        assert!(close(
            renyi_multivariate(&o, &[r.clone(), q], None).unwrap(),
            0.0,
            1e-15
        ));
    }

    #[test]
    fn pivot_override_matches_when_pivot_is_zero() {
        let o = validate_orders(&[2.0, -0.5, -0.5]).unwrap();
        let ps = [pmf(&[0.2, 0.8]), pmf(&[0.6, 0.4]), pmf(&[0.5, 0.5])];
        assert_eq!(
            renyi_multivariate(&o, &ps, None).unwrap(),
            renyi_multivariate(&o, &ps, Some(0)).unwrap()
        );
    }

    #[test]
    fn conditional_examples() {
        let o = validate_orders(&[0.5, 0.5]).unwrap();
        let c0 = CondPmf::new(vec![pmf(&[2.0 / 3.0, 1.0 / 3.0]), pmf(&[0.0, 1.0])]).unwrap();
        let c1 = CondPmf::constant(pmf(&[0.5, 0.5]), 2).unwrap();
        let pg = pmf(&[0.75, 0.25]);
        let v = renyi_conditional(&o, 0.5, &[c0, c1], &pg, None).unwrap();
        assert!(close(v, 0.158_347_183_820_374_94, 1e-14));

        let same = CondPmf::constant(pmf(&[0.3, 0.7]), 2).unwrap();
        let v = renyi_conditional(&o, 0.5, &[same.clone(), same], &pg, None).unwrap();
        assert!(close(v, 0.0, 1e-15));
    }

    #[test]
    fn conditional_rejects_beta() {
        let o = validate_orders(&[0.5, 0.5]).unwrap();
        let c = CondPmf::constant(pmf(&[0.5, 0.5]), 1).unwrap();
        let pg = pmf(&[1.0]);
        for beta in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                renyi_conditional(&o, beta, &[c.clone(), c.clone()], &pg, None),
                Err(Error::InvalidParameter { name: "beta", .. })
            ));
        }
    }

    #[test]
    fn conditional_matches_blp_form() {
        // d = 1, β = α: α/(α−1) ln Σ_g p_G (Σ_x p^α q^{1−α})^{1/α}
        let alpha = 2.5;
        let o = validate_orders(&[alpha, 1.0 - alpha]).unwrap();
        let c0 = CondPmf::new(vec![pmf(&[0.2, 0.8]), pmf(&[0.6, 0.4]), pmf(&[0.9, 0.1])]).unwrap();
        let c1 = CondPmf::new(vec![pmf(&[0.5, 0.5]), pmf(&[0.3, 0.7]), pmf(&[0.4, 0.6])]).unwrap();
        let pg = pmf(&[0.2, 0.3, 0.5]);
        let mut outer = 0.0;
        for g in 0..3 {
            let mut inner = 0.0;
            for x in 0..2 {
                inner += crate::math::powf(c0.get(x, g), alpha)
                    * crate::math::powf(c1.get(x, g), 1.0 - alpha);
            }
            outer += pg.get(g) * crate::math::powf(inner, 1.0 / alpha);
        }
        let blp = alpha / (alpha - 1.0) * ln(outer);
        let v = renyi_conditional(&o, alpha, &[c0, c1], &pg, None).unwrap();
        assert!(close(v, blp, 1e-13));
    }

    #[test]
    fn limits_examples() {
        let p = pmf(&[0.75, 0.25]);
        let u = pmf(&[0.5, 0.5]);
        assert!(close(
            kl_mixture_limit(&[1.0], &[p.clone(), u.clone()]).unwrap(),
            0.130_812_035_941_136_96,
            1e-14
        ));
        assert!(close(
            kl_mixture_limit(&[0.5, 0.5], &[p.clone(), u.clone(), u.clone()]).unwrap(),
            0.130_812_035_941_136_96,
            1e-14
        ));
        assert!(close(
            kl_mixture_limit(&[0.5, 0.5], &[p.clone(), p.clone(), p.clone()]).unwrap(),
            0.0,
            1e-15
        ));
        assert!(close(
            tropical_limit(&[1.0], &[p.clone(), u.clone()]).unwrap(),
            ln(1.5),
            1e-15
        ));
        assert!(close(
            tropical_limit(&[0.3, 0.7], &[p.clone(), p.clone(), p.clone()]).unwrap(),
            0.0,
            1e-15
        ));
        assert!(matches!(
            tropical_limit(&[1.0], &[p, pmf(&[1.0, 0.0])]),
            Err(Error::MissingSupport(1))
        ));
    }

    #[test]
    fn path_examples() {
        let o = path_orders(&PathSpec::new(vec![1.0], 0.5).unwrap()).unwrap();
        assert_eq!(o.alphas(), &[0.5, 0.5]);
        assert_eq!(o.case(), OrderCase::I);
        assert_eq!(o.pivot(), 0);
        let o = path_orders(&PathSpec::new(vec![0.5, 0.5], 2.0).unwrap()).unwrap();
        assert_eq!(o.alphas(), &[2.0, -0.5, -0.5]);
        assert_eq!(o.case(), OrderCase::II);
        assert!(PathSpec::new(vec![0.5, 0.5], 1.0).is_err());
        assert!(PathSpec::new(vec![1.0], 0.4).is_err());
        let boundary = PathSpec::new(vec![1.0], 0.5).unwrap();
        assert_eq!(path_orders(&boundary).unwrap().pivot(), 0);
    }

    #[test]
    fn dpi_examples() {
        let o = validate_orders(&[0.5, 0.25, 0.25]).unwrap();
        let ps = [
            pmf(&[0.7, 0.2, 0.1]),
            pmf(&[0.2, 0.3, 0.5]),
            pmf(&[0.3, 0.3, 0.4]),
        ];
        let r = dpi_check(&o, &ps, &StochasticOp::identity(3).unwrap()).unwrap();
        assert_eq!(r.before, r.after);
        assert!(r.holds);
        let c = StochasticOp::constant(3, &pmf(&[0.4, 0.6])).unwrap();
        let r = dpi_check(&o, &ps, &c).unwrap();
        assert!(close(r.after, 0.0, 1e-15));
        assert!(r.holds);
    }

    #[test]
    fn conditioning_dpi_examples() {
        let o = validate_orders(&[0.6, 0.4]).unwrap();
        let p0 = CondPmf::new(vec![pmf(&[0.9, 0.1]), pmf(&[0.2, 0.8]), pmf(&[0.5, 0.5])]).unwrap();
        let refs = [pmf(&[0.3, 0.7])];
        let pg = pmf(&[0.3, 0.3, 0.4]);
        let id = StochasticOp::identity(3).unwrap();
        let r = conditioning_dpi_check(&o, &p0, &refs, &pg, &id).unwrap();
        assert!(close(r.before, r.after, 1e-14));
        let c = StochasticOp::constant(3, &pmf(&[0.25, 0.75])).unwrap();
        let r = conditioning_dpi_check(&o, &p0, &refs, &pg, &c).unwrap();
        assert!(close(r.after, r.unconditional, 1e-14));
        assert!(r.holds && r.unconditional_holds);

        let bad = validate_orders(&[0.4, 0.6]).unwrap();
        assert_eq!(
            conditioning_dpi_check(&bad, &p0, &refs, &pg, &id).unwrap_err(),
            Error::PivotNotZero(1)
        );
    }
}
