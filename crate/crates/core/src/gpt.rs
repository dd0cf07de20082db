//! General probabilistic theories embedded in a real Euclidean space.
//!
//! States and effects are real vectors paired by the dot product. A model
//! fixes the unit effect `u` and a finite list of reference states against
//! which effects are bounds-checked. Classical theories use the simplex in
//! `ℝⁿ`; quantum theories use the Hilbert–Schmidt embedding of `n × n`
//! Hermitian matrices into `ℝ^{n²}` with the orthonormal basis
//!
//! ```text
//! I/√n,
//! S_jk = (E_jk + E_kj)/√2, A_jk = (−i E_jk + i E_kj)/√2   for j < k (row-major pairs),
//! D_l  = (Σ_{m<l} E_mm − l E_ll)/√(l(l+1))                 for l = 1, …, n−1.
//! ```
//!
//! An ensemble `{p(x), ω_x}` measured with effects `{m_a}` yields the
//! joint `p(x, a) = p(x) ⟨m_a, ω_x⟩`; state betting is the betting game
//! with side information `a`.

use alloc::vec;
use alloc::vec::Vec;

use crate::betting::{optimal_bets_conditional, risk_neutral_optimum, OddsProfile, RiskVector};
use crate::divergences::{renyi_conditional, renyi_multivariate, OrderVector};
use crate::linalg::symmetric_eigenvalues;
use crate::math::{abs, exp, sqrt};
use crate::prob::{same_len, CondPmf, JointPmf, Pmf, StochasticOp};
use crate::{Error, Result};

/// Tolerance for state normalization, effect bounds and completeness.
pub const GPT_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A Hermitian matrix stored as row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HermitianMatrix {
    /// Rejects matrices deviating from Hermiticity by more than
    /// [`GPT_TOL`] and symmetrizes the rest.
    pub fn new(n: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        same_len(n * n, re.len())?;
        same_len(n * n, im.len())?;
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                dev = dev.max(abs(re[j * n + k] - re[k * n + j]));
                dev = dev.max(abs(im[j * n + k] + im[k * n + j]));
            }
        }
        if dev > GPT_TOL || re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(Error::NotHermitian(dev));
        }
        let mut h = Self { n, re, im };
        for j in 0..n {
            h.im[j * n + j] = 0.0;
            for k in j + 1..n {
                let r = 0.5 * (h.re[j * n + k] + h.re[k * n + j]);
                let i = 0.5 * (h.im[j * n + k] - h.im[k * n + j]);
                h.re[j * n + k] = r;
                h.re[k * n + j] = r;
                h.im[j * n + k] = i;
                h.im[k * n + j] = -i;
            }
        }
        Ok(h)
    }

    /// Nested rows `re[j][k]`, `im[j][k]`.
    pub fn from_rows(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        same_len(n, im.len())?;
        let flat = |rows: &[Vec<f64>]| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(n * n);
            for r in rows {
                same_len(n, r.len())?;
                v.extend_from_slice(r);
            }
            Ok(v)
        };
        Self::new(n, flat(re)?, flat(im)?)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut re = vec![0.0; n * n];
        for j in 0..n {
            re[j * n + j] = 1.0;
        }
        Self::new(n, re, vec![0.0; n * n])
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩` for `ψ = re + i·im`.
    pub fn projector(re: &[f64], im: &[f64]) -> Result<Self> {
        let n = re.len();
        same_len(n, im.len())?;
        let norm: f64 = re.iter().chain(im).map(|v| v * v).sum();
        if !(norm > 0.0) {
            return Err(Error::StateNormalization(norm));
        }
        let mut r = vec![0.0; n * n];
        let mut i = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                r[j * n + k] = (re[j] * re[k] + im[j] * im[k]) / norm;
                i[j * n + k] = (im[j] * re[k] - re[j] * im[k]) / norm;
            }
        }
        Self::new(n, r, i)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|j| self.re[j * self.n + j]).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        // [[Re, −Im], [Im, Re]] has every eigenvalue of H twice
        let n = self.n;
        let m = 2 * n;
        let mut a = vec![0.0; m * m];
        for j in 0..n {
            for k in 0..n {
                let r = self.re[j * n + k];
                let i = self.im[j * n + k];
                a[j * m + k] = r;
                a[(j + n) * m + k + n] = r;
                a[j * m + k + n] = -i;
                a[(j + n) * m + k] = i;
            }
        }
        symmetric_eigenvalues(m, &a)
            .into_iter()
            .step_by(2)
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            re: self.re.iter().map(|v| v * c).collect(),
            im: self.im.iter().map(|v| v * c).collect(),
        }
    }
}

/// `Re Tr[A B]`, which is the full trace for Hermitian `A`, `B`.
pub fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    same_len(a.n, b.n)?;
    let n = a.n;
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            acc += a.re[j * n + k] * b.re[k * n + j] - a.im[j * n + k] * b.im[k * n + j];
        }
    }
    Ok(acc)
}

/// Coordinates of `h` in the orthonormal Hermitian basis.
pub fn embed(h: &HermitianMatrix) -> Vec<f64> {
    let n = h.n;
    let mut v = Vec::with_capacity(n * n);
    v.push(h.trace() / sqrt(n as f64));
    let s2 = sqrt(2.0);
    for j in 0..n {
        for k in j + 1..n {
            v.push(s2 * h.re[j * n + k]);
            v.push(-s2 * h.im[j * n + k]);
        }
    }
    for l in 1..n {
        let lf = l as f64;
        let head: f64 = (0..l).map(|m| h.re[m * n + m]).sum();
        v.push((head - lf * h.re[l * n + l]) / sqrt(lf * (lf + 1.0)));
    }
    v
}

/// Inverse of [`embed`].
pub fn unembed(n: usize, v: &[f64]) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::Empty);
    }
    same_len(n * n, v.len())?;
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    let d0 = v[0] / sqrt(n as f64);
    for j in 0..n {
        re[j * n + j] = d0;
    }
    let s2 = sqrt(2.0);
    let mut idx = 1;
    for j in 0..n {
        for k in j + 1..n {
            let cs = v[idx];
            let ca = v[idx + 1];
            idx += 2;
            re[j * n + k] = cs / s2;
            re[k * n + j] = cs / s2;
            im[j * n + k] = -ca / s2;
            im[k * n + j] = ca / s2;
        }
    }
    for l in 1..n {
        let lf = l as f64;
        let c = v[idx] / sqrt(lf * (lf + 1.0));
        idx += 1;
        for m in 0..l {
            re[m * n + m] += c;
        }
        re[l * n + l] -= lf * c;
    }
    HermitianMatrix::new(n, re, im)
}

/// Which family a model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GptKind {
    Classical(usize),
    Quantum(usize),
    Custom,
}

/// Unit effect, reference states and the ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GptModel {
    kind: GptKind,
    unit: Vec<f64>,
    reference_states: Vec<Vec<f64>>,
}

impl GptModel {
    /// The probability simplex in `ℝⁿ` with `u = (1, …, 1)`.
    pub fn classical(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "classical dimension",
                value: n as f64,
            });
        }
        let reference_states = (0..n)
            .map(|x| {
                let mut e = vec![0.0; n];
                e[x] = 1.0;
                e
            })
            .collect();
        Ok(Self {
            kind: GptKind::Classical(n),
            unit: vec![1.0; n],
            reference_states,
        })
    }

    /// Density matrices on `ℂⁿ` embedded in `ℝ^{n²}`; the computational
    /// basis projectors serve as reference states.
    pub fn quantum(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "Hilbert dimension",
                value: n as f64,
            });
        }
        let unit = embed(&HermitianMatrix::identity(n)?);
        let reference_states = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                Ok(embed(&HermitianMatrix::projector(&e, &vec![0.0; n])?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: GptKind::Quantum(n),
            unit,
            reference_states,
        })
    }

    /// A model given by its unit effect and reference states, each of
    /// which must satisfy `⟨u, ω⟩ = 1`.
    pub fn custom(unit: Vec<f64>, reference_states: Vec<Vec<f64>>) -> Result<Self> {
        if unit.is_empty() {
            return Err(Error::Empty);
        }
        let model = Self {
            kind: GptKind::Custom,
            unit,
            reference_states,
        };
        for s in &model.reference_states {
            model.check_state(s)?;
        }
        Ok(model)
    }

    pub fn kind(&self) -> GptKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    pub fn unit_effect(&self) -> &[f64] {
        &self.unit
    }

    pub fn reference_states(&self) -> &[Vec<f64>] {
        &self.reference_states
    }

    pub fn check_state(&self, state: &[f64]) -> Result<()> {
        same_len(self.dim(), state.len())?;
        let norm = dot(&self.unit, state);
        if abs(norm - 1.0) > GPT_TOL || !norm.is_finite() {
            return Err(Error::StateNormalization(norm));
        }
        Ok(())
    }

    fn quantum_dim(&self) -> Result<usize> {
        match self.kind {
            GptKind::Quantum(n) => Ok(n),
            _ => Err(Error::InvalidParameter {
                name: "model is not quantum; dimension",
                value: self.dim() as f64,
            }),
        }
    }

    /// Embeds a density matrix after checking positivity and unit trace.
    pub fn density_state(&self, rho: &HermitianMatrix) -> Result<Vec<f64>> {
        same_len(self.quantum_dim()?, rho.dim())?;
        let min = rho.eigenvalues()[0];
        if min < -GPT_TOL {
            return Err(Error::NotPositive(min));
        }
        let tr = rho.trace();
        if abs(tr - 1.0) > GPT_TOL {
            return Err(Error::StateNormalization(tr));
        }
        Ok(embed(rho))
    }

    /// Embeds a POVM after checking `0 ≤ E_a ≤ I` and `Σ_a E_a = I`.
    pub fn povm(&self, elements: &[HermitianMatrix]) -> Result<Measurement> {
        let n = self.quantum_dim()?;
        if elements.is_empty() {
            return Err(Error::Empty);
        }
        let mut sum = HermitianMatrix::new(n, vec![0.0; n * n], vec![0.0; n * n])?;
        for e in elements {
            same_len(n, e.dim())?;
            let eig = e.eigenvalues();
            if eig[0] < -GPT_TOL {
                return Err(Error::NotPositive(eig[0]));
            }
            if eig[n - 1] > 1.0 + GPT_TOL {
                return Err(Error::EffectAboveUnit(eig[n - 1]));
            }
            for (s, v) in sum.re.iter_mut().zip(&e.re) {
                *s += v;
            }
            for (s, v) in sum.im.iter_mut().zip(&e.im) {
                *s += v;
            }
        }
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let target = if j == k { 1.0 } else { 0.0 };
                dev = dev
                    .max(abs(sum.re[j * n + k] - target))
                    .max(abs(sum.im[j * n + k]));
            }
        }
        if dev > GPT_TOL {
            return Err(Error::IncompleteMeasurement(dev));
        }
        Measurement::new(self, elements.iter().map(embed).collect())
    }

    /// The measurement reading off each coordinate of a classical model.
    pub fn coordinate_measurement(&self) -> Result<Measurement> {
        match self.kind {
            GptKind::Classical(n) => Measurement::new(
                self,
                (0..n)
                    .map(|a| {
                        let mut e = vec![0.0; n];
                        e[a] = 1.0;
                        e
                    })
                    .collect(),
            ),
            _ => Err(Error::InvalidParameter {
                name: "model is not classical; dimension",
                value: self.dim() as f64,
            }),
        }
    }
}

/// Effects `m_a` summing to the unit effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    effects: Vec<Vec<f64>>,
}

fn check_effects_on(effects: &[Vec<f64>], states: &[Vec<f64>]) -> Result<()> {
    for (effect, m) in effects.iter().enumerate() {
        for (state, s) in states.iter().enumerate() {
            let value = dot(m, s);
            if !(-GPT_TOL..=1.0 + GPT_TOL).contains(&value) {
                return Err(Error::EffectOutOfRange {
                    effect,
                    state,
                    value,
                });
            }
        }
    }
    Ok(())
}

impl Measurement {
    /// Checks completeness and the effect bounds on the model's reference
    /// states.
    pub fn new(model: &GptModel, effects: Vec<Vec<f64>>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::Empty);
        }
        let mut sum = vec![0.0; model.dim()];
        for m in &effects {
            same_len(model.dim(), m.len())?;
            for (s, v) in sum.iter_mut().zip(m) {
                *s += v;
            }
        }
        let dev = sum
            .iter()
            .zip(model.unit_effect())
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max);
        if dev > GPT_TOL || !dev.is_finite() {
            return Err(Error::IncompleteMeasurement(dev));
        }
        check_effects_on(&effects, model.reference_states())?;
        Ok(Self { effects })
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[Vec<f64>] {
        &self.effects
    }

    pub fn effect(&self, a: usize) -> &[f64] {
        &self.effects[a]
    }
}

/// Prior `p(x)` over states `ω_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    prior: Pmf,
    states: Vec<Vec<f64>>,
}

impl StateEnsemble {
    pub fn new(model: &GptModel, prior: Pmf, states: Vec<Vec<f64>>) -> Result<Self> {
        same_len(prior.len(), states.len())?;
        prior.require_full_support()?;
        for s in &states {
            model.check_state(s)?;
        }
        Ok(Self { prior, states })
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `p(x, a) = p(x) ⟨m_a, ω_x⟩` with rows `x` and columns `a`.
pub fn outcome_joint(m: &Measurement, ensemble: &StateEnsemble) -> Result<JointPmf> {
    check_effects_on(m.effects(), ensemble.states())?;
    let n_x = ensemble.len();
    let n_a = m.n_outcomes();
    let mut mass = Vec::with_capacity(n_x * n_a);
    for (x, s) in ensemble.states().iter().enumerate() {
        for e in m.effects() {
            mass.push(ensemble.prior().get(x) * dot(e, s).max(0.0));
        }
    }
    JointPmf::new(n_x, n_a, mass)
}

/// Maximum a posteriori guess `argmax_x p(x, a)` per outcome, ties to the
/// lowest `x`.
pub fn map_guess(joint: &JointPmf) -> Vec<usize> {
    (0..joint.n_g())
        .map(|a| {
            let mut best = 0;
            for x in 1..joint.n_x() {
                if joint.get(x, a) > joint.get(best, a) {
                    best = x;
                }
            }
            best
        })
        .collect()
}

/// Optimal probability of identifying `x`: `Σ_a max_x p(x) ⟨m_a, ω_x⟩`.
pub fn sd_success(m: &Measurement, ensemble: &StateEnsemble) -> Result<f64> {
    let joint = outcome_joint(m, ensemble)?;
    Ok(map_guess(&joint)
        .iter()
        .enumerate()
        .map(|(a, &x)| joint.get(x, a))
        .sum())
}

/// The measurement `n_b = η(b) u`.
pub fn uninformative(eta: &Pmf, model: &GptModel) -> Result<Measurement> {
    Measurement::new(
        model,
        eta.mass()
            .iter()
            .map(|e| model.unit_effect().iter().map(|u| e * u).collect())
            .collect(),
    )
}

/// `m'_b = Σ_a t(b|a) m_a`.
pub fn postprocess_measurement(
    model: &GptModel,
    m: &Measurement,
    op: &StochasticOp,
) -> Result<Measurement> {
    same_len(m.n_outcomes(), op.n_in())?;
    let effects = (0..op.n_out())
        .map(|b| {
            let mut e = vec![0.0; model.dim()];
            for a in 0..m.n_outcomes() {
                let t = op.get(b, a);
                for (v, w) in e.iter_mut().zip(m.effect(a)) {
                    *v += t * w;
                }
            }
            e
        })
        .collect();
    Measurement::new(model, effects)
}

/// Optimal `ln ICE` of the state-betting game over bets and
/// postprocessings: the conditional Rényi divergence of `p(x|a)` and the
/// odds-induced PMFs given `p(a)` plus the fairness terms. Outcomes `a`
/// that never occur are dropped.
pub fn sb_optimal_log_ice(
    m: &Measurement,
    ensemble: &StateEnsemble,
    odds: &OddsProfile,
    risk: &RiskVector,
) -> Result<f64> {
    let joint = outcome_joint(m, ensemble)?.without_null_columns();
    optimal_bets_conditional(&joint, odds, risk).map(|(_, v)| v)
}

/// Optimal expected wealth of a risk-neutral gambler on one lottery with
/// odds `odds`: `Σ_a max_x p(x, a) o(x)`.
pub fn sb_risk_neutral_optimum(
    m: &Measurement,
    ensemble: &StateEnsemble,
    odds: &[f64],
) -> Result<f64> {
    risk_neutral_optimum(&outcome_joint(m, ensemble)?, odds)
}

/// `D_{α,α_0}(p_{X|A}, r¹, …, rᵈ | p_A) − D_α(p_X, r¹, …, rᵈ)`, which is
/// nonnegative, vanishes on uninformative measurements and does not
/// increase under postprocessing. Requires `α_0 = α_*`.
pub fn informativeness_monotone(
    m: &Measurement,
    ensemble: &StateEnsemble,
    refs: &[Pmf],
    orders: &OrderVector,
) -> Result<f64> {
    orders.require_pivot_zero()?;
    same_len(orders.len(), refs.len() + 1)?;
    for r in refs {
        same_len(ensemble.len(), r.len())?;
        r.require_full_support()?;
    }
    let parts = outcome_joint(m, ensemble)?
        .without_null_columns()
        .decompose();
    let mut conds = Vec::with_capacity(orders.len());
    conds.push(parts.conditional.clone());
    for r in refs {
        conds.push(CondPmf::constant(r.clone(), parts.p_g.len())?);
    }
    let conditional = renyi_conditional(orders, orders.get(0), &conds, &parts.p_g, None)?;
    let mut pmfs = Vec::with_capacity(orders.len());
    pmfs.push(ensemble.prior().clone());
    pmfs.extend(refs.iter().cloned());
    let unconditional = renyi_multivariate(orders, &pmfs, None)?;
    Ok(conditional - unconditional)
}

/// Optimal ICE under `m` divided by the optimal ICE under an
/// uninformative measurement with outcome distribution `eta`.
pub fn advantage_ratio_with(
    model: &GptModel,
    m: &Measurement,
    ensemble: &StateEnsemble,
    odds: &OddsProfile,
    risk: &RiskVector,
    eta: &Pmf,
) -> Result<f64> {
    let with_m = sb_optimal_log_ice(m, ensemble, odds, risk)?;
    let without = sb_optimal_log_ice(&uninformative(eta, model)?, ensemble, odds, risk)?;
    Ok(exp(with_m - without))
}

/// [`advantage_ratio_with`] against the single-outcome measurement `{u}`.
pub fn advantage_ratio(
    model: &GptModel,
    m: &Measurement,
    ensemble: &StateEnsemble,
    odds: &OddsProfile,
    risk: &RiskVector,
) -> Result<f64> {
    advantage_ratio_with(model, m, ensemble, odds, risk, &Pmf::point(1, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betting::risk_to_orders;
    use crate::divergences::validate_orders;
    use crate::math::ln;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    fn ket(re: &[f64]) -> HermitianMatrix {
        HermitianMatrix::projector(re, &vec![0.0; re.len()]).unwrap()
    }

    fn qubit_instance() -> (GptModel, Measurement, StateEnsemble) {
        let q = GptModel::quantum(2).unwrap();
        let h = 1.0 / sqrt(2.0);
        let s0 = q.density_state(&ket(&[1.0, 0.0])).unwrap();
        let sp = q.density_state(&ket(&[h, h])).unwrap();
        let ens = StateEnsemble::new(&q, pmf(&[0.5, 0.5]), vec![s0, sp]).unwrap();
        let z = q.povm(&[ket(&[1.0, 0.0]), ket(&[0.0, 1.0])]).unwrap();
        (q, z, ens)
    }

    #[test]
    fn embedding_round_trip() {
        let h = HermitianMatrix::from_rows(
            &[
                vec![0.3, 0.1, -0.2],
                vec![0.1, 0.5, 0.4],
                vec![-0.2, 0.4, 0.2],
            ],
            &[
                vec![0.0, 0.7, 0.1],
                vec![-0.7, 0.0, -0.3],
                vec![-0.1, 0.3, 0.0],
            ],
        )
        .unwrap();
        let v = embed(&h);
        let back = unembed(3, &v).unwrap();
        for (a, b) in h.re().iter().zip(back.re()) {
            assert!(close(*a, *b, 1e-14));
        }
        for (a, b) in h.im().iter().zip(back.im()) {
            assert!(close(*a, *b, 1e-14));
        }
        assert!(close(dot(&v, &v), trace_product(&h, &h).unwrap(), 1e-13));
    }

    #[test]
    fn hilbert_schmidt_fixture() {
        let h = 1.0 / sqrt(2.0);
        let a = embed(&ket(&[1.0, 0.0]));
        let b = embed(&ket(&[h, h]));
        assert!(close(dot(&a, &b), 0.5, 1e-15));
        let q = GptModel::quantum(3).unwrap();
        let mixed = HermitianMatrix::identity(3).unwrap().scaled(1.0 / 3.0);
        let s = q.density_state(&mixed).unwrap();
        assert!(close(dot(q.unit_effect(), &s), 1.0, 1e-15));
    }

    #[test]
    fn eigenvalues_of_projector() {
        let p = HermitianMatrix::projector(&[0.6, 0.0], &[0.0, 0.8]).unwrap();
        let e = p.eigenvalues();
        assert!(close(e[0], 0.0, 1e-14) && close(e[1], 1.0, 1e-14));
    }

    #[test]
    fn rejects_invalid_quantum_inputs() {
        let q = GptModel::quantum(2).unwrap();
        let neg = HermitianMatrix::from_rows(
            &[vec![1.2, 0.0], vec![0.0, -0.2]],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        assert!(matches!(q.density_state(&neg), Err(Error::NotPositive(_))));
        let half = HermitianMatrix::identity(2).unwrap().scaled(0.25);
        assert!(matches!(
            q.density_state(&half),
            Err(Error::StateNormalization(_))
        ));
        assert!(matches!(
            q.povm(&[ket(&[1.0, 0.0])]),
            Err(Error::IncompleteMeasurement(_))
        ));
        let big = HermitianMatrix::identity(2).unwrap().scaled(1.5);
        let neg_rest = HermitianMatrix::identity(2).unwrap().scaled(-0.5);
        assert!(matches!(
            q.povm(&[big, neg_rest]),
            Err(Error::EffectAboveUnit(_))
        ));
        assert!(matches!(
            HermitianMatrix::from_rows(
                &[vec![1.0, 0.5], vec![0.0, 0.0]],
                &[vec![0.0, 0.0], vec![0.0, 0.0]]
            ),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn qubit_joint_and_sd() {
        let (_, z, ens) = qubit_instance();
        let joint = outcome_joint(&z, &ens).unwrap();
        let expected = [0.5, 0.0, 0.25, 0.25];
        for (a, b) in joint.mass().iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
        assert!(close(sd_success(&z, &ens).unwrap(), 0.75, 1e-15));
        assert!(close(
            sb_risk_neutral_optimum(&z, &ens, &[2.0, 2.0]).unwrap(),
            1.5,
            1e-15
        ));
    }

    #[test]
    fn qubit_betting() {
        let (q, z, ens) = qubit_instance();
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        let risk = RiskVector::new(vec![2.0]).unwrap();
        let v = sb_optimal_log_ice(&z, &ens, &odds, &risk).unwrap();
        assert!(close(v, 0.158_347_183_820_374_94, 1e-13));
        let orders = risk_to_orders(&risk).unwrap();
        let mono = informativeness_monotone(&z, &ens, &[pmf(&[0.5, 0.5])], &orders).unwrap();
        assert!(close(mono, v, 1e-13));
        let ratio = advantage_ratio(&q, &z, &ens, &odds, &risk).unwrap();
        assert!(close(ratio, 1.171_572_875_253_81, 1e-12));
        assert!(close(ln(ratio), mono, 1e-13));
    }

    #[test]
    fn uninformative_examples() {
        let (q, _, ens) = qubit_instance();
        let eta = pmf(&[0.3, 0.7]);
        let u = uninformative(&eta, &q).unwrap();
        let joint = outcome_joint(&u, &ens).unwrap();
        let prod = JointPmf::product(ens.prior(), &eta);
        for (a, b) in joint.mass().iter().zip(prod.mass()) {
            assert!(close(*a, *b, 1e-15));
        }
        assert!(close(sd_success(&u, &ens).unwrap(), 0.5, 1e-15));
        let orders = validate_orders(&[0.5, 0.5]).unwrap();
        let refs = [pmf(&[0.2, 0.8])];
        assert!(close(
            informativeness_monotone(&u, &ens, &refs, &orders).unwrap(),
            0.0,
            1e-13
        ));
        let odds = OddsProfile::constant(2, 1, 2.0).unwrap();
        let risk = RiskVector::new(vec![2.0]).unwrap();
        assert!(close(
            advantage_ratio(&q, &u, &ens, &odds, &risk).unwrap(),
            1.0,
            1e-13
        ));
    }

    #[test]
    fn postprocessing_examples() {
        let (q, z, ens) = qubit_instance();
        let same = postprocess_measurement(&q, &z, &StochasticOp::identity(2).unwrap()).unwrap();
        assert_eq!(same, z);
        let merged =
            postprocess_measurement(&q, &z, &StochasticOp::deterministic(&[0, 0], 1).unwrap())
                .unwrap();
        for (a, b) in merged.effect(0).iter().zip(q.unit_effect()) {
            assert!(close(*a, *b, 1e-15));
        }
        let c = StochasticOp::constant(2, &pmf(&[0.4, 0.6])).unwrap();
        let collapsed = postprocess_measurement(&q, &z, &c).unwrap();
        let orders = validate_orders(&[0.5, 0.5]).unwrap();
        assert!(close(
            informativeness_monotone(&collapsed, &ens, &[pmf(&[0.5, 0.5])], &orders).unwrap(),
            0.0,
            1e-13
        ));
    }

    #[test]
    fn classical_vertices() {
        let c = GptModel::classical(3).unwrap();
        let m = c.coordinate_measurement().unwrap();
        let ens =
            StateEnsemble::new(&c, pmf(&[0.2, 0.3, 0.5]), c.reference_states().to_vec()).unwrap();
        let joint = outcome_joint(&m, &ens).unwrap();
        for x in 0..3 {
            for a in 0..3 {
                let expected = if x == a { ens.prior().get(x) } else { 0.0 };
                assert_eq!(joint.get(x, a), expected);
            }
        }
        assert!(close(sd_success(&m, &ens).unwrap(), 1.0, 1e-15));
        assert!(GptModel::classical(1).is_err());
    }
}
