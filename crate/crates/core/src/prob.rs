//! Finite probability substrate.
//!
//! Outcomes are identified by their index; labels belong to the IO layer.
//! Joint PMFs are stored row-major with rows indexed by the main outcome `x`
//! and columns by the conditioning outcome `g`. Kernels store one output PMF
//! per input outcome, `rows[x] = t(· | x)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::{Error, Result, NORMALIZATION_TOL, RENORMALIZE_TOL};

/// Masses below this are treated as missing support.
pub const SUPPORT_TOL: f64 = 1e-12;

fn check_masses(mass: &[f64]) -> Result<f64> {
    if mass.is_empty() {
        return Err(Error::Empty);
    }
    let mut sum = 0.0;
    for (index, &value) in mass.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidMass { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

/// Accepts a mass vector whose sum is within [`RENORMALIZE_TOL`] of one and
/// rescales it so the sum is exact to [`NORMALIZATION_TOL`].
fn normalized(mut mass: Vec<f64>) -> Result<Vec<f64>> {
    let sum = check_masses(&mass)?;
    if abs(sum - 1.0) >= RENORMALIZE_TOL {
        return Err(Error::NotNormalized { sum });
    }
    if abs(sum - 1.0) > NORMALIZATION_TOL * 0.5 {
        for m in mass.iter_mut() {
            *m /= sum;
        }
    }
    Ok(mass)
}

/// A probability mass function on `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        Ok(Self {
            mass: normalized(mass)?,
        })
    }

    /// Normalizes an arbitrary nonnegative weight vector with positive total.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum = check_masses(&weights)?;
        if sum <= 0.0 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            mass: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            mass: vec![1.0 / n as f64; n],
        })
    }

    pub fn point(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: at + 1,
            });
        }
        let mut mass = vec![0.0; n];
        mass[at] = 1.0;
        Ok(Self { mass })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    #[inline]
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.mass
    }

    /// Every mass is at least [`SUPPORT_TOL`].
    pub fn is_full_support(&self) -> bool {
        self.mass.iter().all(|&m| m >= SUPPORT_TOL)
    }

    pub fn require_full_support(&self) -> Result<()> {
        match self.mass.iter().position(|&m| m < SUPPORT_TOL) {
            Some(i) => Err(Error::MissingSupport(i)),
            None => Ok(()),
        }
    }

    pub fn expectation(&self, f: &[f64]) -> Result<f64> {
        expectation(self, f)
    }

    pub fn total_variation(&self, other: &Pmf) -> Result<f64> {
        same_len(self.len(), other.len())?;
        Ok(0.5
            * self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| abs(a - b))
                .sum::<f64>())
    }
}

pub(crate) fn same_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `Σ_x f(x) p(x)`.
pub fn expectation(p: &Pmf, f: &[f64]) -> Result<f64> {
    same_len(p.len(), f.len())?;
    Ok(p.mass.iter().zip(f).map(|(m, v)| m * v).sum())
}

/// A family of PMFs on `𝒳` indexed by a conditioning outcome `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPmf {
    rows: Vec<Pmf>,
}

impl CondPmf {
    /// `rows[g] = p(· | g)`.
    pub fn new(rows: Vec<Pmf>) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty)?.len();
        for r in &rows {
            same_len(first, r.len())?;
        }
        Ok(Self { rows })
    }

    /// The same PMF for every one of `n_given` conditioning outcomes.
    pub fn constant(p: Pmf, n_given: usize) -> Result<Self> {
        if n_given == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            rows: vec![p; n_given],
        })
    }

    #[inline]
    pub fn n_given(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_outcomes(&self) -> usize {
        self.rows[0].len()
    }

    #[inline]
    pub fn row(&self, g: usize) -> &Pmf {
        &self.rows[g]
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    /// `p(x | g)`.
    #[inline]
    pub fn get(&self, x: usize, g: usize) -> f64 {
        self.rows[g].get(x)
    }
}

/// A PMF on `𝒳 × 𝒢`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    n_x: usize,
    n_g: usize,
    mass: Vec<f64>,
}

/// Marginals and conditional of a [`JointPmf`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposed {
    pub p_x: Pmf,
    pub p_g: Pmf,
    /// `p(x | g)`; rows for zero-mass columns hold a uniform placeholder.
    pub conditional: CondPmf,
    /// Columns `g` with `p_G(g) = 0`.
    pub null_columns: Vec<usize>,
}

impl JointPmf {
    /// `mass[x * n_g + g] = p(x, g)`.
    pub fn new(n_x: usize, n_g: usize, mass: Vec<f64>) -> Result<Self> {
        if n_x == 0 || n_g == 0 {
            return Err(Error::Empty);
        }
        same_len(n_x * n_g, mass.len())?;
        Ok(Self {
            n_x,
            n_g,
            mass: normalized(mass)?,
        })
    }

    /// Nested rows, `rows[x][g]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_x = rows.len();
        let n_g = rows.first().ok_or(Error::Empty)?.len();
        let mut mass = Vec::with_capacity(n_x * n_g);
        for r in rows {
            same_len(n_g, r.len())?;
            mass.extend_from_slice(r);
        }
        Self::new(n_x, n_g, mass)
    }

    pub fn product(p_x: &Pmf, p_g: &Pmf) -> Self {
        let mut mass = Vec::with_capacity(p_x.len() * p_g.len());
        for &a in p_x.mass() {
            for &b in p_g.mass() {
                mass.push(a * b);
            }
        }
        Self {
            n_x: p_x.len(),
            n_g: p_g.len(),
            mass,
        }
    }

    /// `p(x, g) = p_G(g) p(x | g)`.
    pub fn from_conditional(p_g: &Pmf, conditional: &CondPmf) -> Result<Self> {
        same_len(p_g.len(), conditional.n_given())?;
        let n_x = conditional.n_outcomes();
        let n_g = p_g.len();
        let mut mass = vec![0.0; n_x * n_g];
        for g in 0..n_g {
            for x in 0..n_x {
                mass[x * n_g + g] = p_g.get(g) * conditional.get(x, g);
            }
        }
        Self::new(n_x, n_g, mass)
    }

    #[inline]
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    #[inline]
    pub fn n_g(&self) -> usize {
        self.n_g
    }

    #[inline]
    pub fn get(&self, x: usize, g: usize) -> f64 {
        self.mass[x * self.n_g + g]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.mass.chunks(self.n_g).map(|c| c.to_vec()).collect()
    }

    pub fn marginal_x(&self) -> Pmf {
        let mass = (0..self.n_x)
            .map(|x| (0..self.n_g).map(|g| self.get(x, g)).sum())
            .collect();
        Pmf { mass }
    }

    pub fn marginal_g(&self) -> Pmf {
        let mass = (0..self.n_g)
            .map(|g| (0..self.n_x).map(|x| self.get(x, g)).sum())
            .collect();
        Pmf { mass }
    }

    /// Marginals, the conditional `p(x | g)`, and the flagged null columns.
    pub fn decompose(&self) -> Decomposed {
        let p_x = self.marginal_x();
        let p_g = self.marginal_g();
        let mut null_columns = Vec::new();
        let mut rows = Vec::with_capacity(self.n_g);
        for g in 0..self.n_g {
            let pg = p_g.get(g);
            if pg > 0.0 {
                let mass = (0..self.n_x).map(|x| self.get(x, g) / pg).collect();
                rows.push(Pmf { mass });
            } else {
                null_columns.push(g);
                rows.push(Pmf {
                    mass: vec![1.0 / self.n_x as f64; self.n_x],
                });
            }
        }
        Decomposed {
            p_x,
            p_g,
            conditional: CondPmf { rows },
            null_columns,
        }
    }

    /// Drops the columns with zero marginal mass.
    pub fn without_null_columns(&self) -> Self {
        let p_g = self.marginal_g();
        let keep: Vec<usize> = (0..self.n_g).filter(|&g| p_g.get(g) > 0.0).collect();
        let mut mass = Vec::with_capacity(self.n_x * keep.len());
        for x in 0..self.n_x {
            for &g in &keep {
                mass.push(self.get(x, g));
            }
        }
        Self {
            n_x: self.n_x,
            n_g: keep.len(),
            mass,
        }
    }
}

/// `(p_X, p_G, p_{X|G})` of a joint PMF; zero-mass columns are flagged in
/// [`Decomposed::null_columns`].
pub fn marginals_and_conditionals(joint: &JointPmf) -> Decomposed {
    joint.decompose()
}

/// A Markov kernel `t(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOp {
    rows: Vec<Pmf>,
}

impl StochasticOp {
    /// `rows[x] = t(· | x)`.
    pub fn new(rows: Vec<Pmf>) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty)?.len();
        for r in &rows {
            same_len(first, r.len())?;
        }
        Ok(Self { rows })
    }

    /// Column-stochastic matrix `matrix[y][x] = t(y | x)`.
    pub fn from_columns(matrix: &[Vec<f64>]) -> Result<Self> {
        let n_out = matrix.len();
        let n_in = matrix.first().ok_or(Error::Empty)?.len();
        for r in matrix {
            same_len(n_in, r.len())?;
        }
        let rows = (0..n_in)
            .map(|x| Pmf::new((0..n_out).map(|y| matrix[y][x]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let rows = (0..n)
            .map(|x| Pmf::point(n, x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Every input is mapped to `r`.
    pub fn constant(n_in: usize, r: &Pmf) -> Result<Self> {
        if n_in == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            rows: vec![r.clone(); n_in],
        })
    }

    /// Deterministic map `x ↦ f[x]` into `n_out` outputs.
    pub fn deterministic(f: &[usize], n_out: usize) -> Result<Self> {
        let rows = f
            .iter()
            .map(|&y| Pmf::point(n_out, y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    #[inline]
    pub fn n_in(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_out(&self) -> usize {
        self.rows[0].len()
    }

    /// `t(y | x)`.
    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.rows[x].get(y)
    }

    pub fn row(&self, x: usize) -> &Pmf {
        &self.rows[x]
    }

    /// `matrix[y][x] = t(y | x)`.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_out())
            .map(|y| (0..self.n_in()).map(|x| self.get(y, x)).collect())
            .collect()
    }

    /// `q(y) = Σ_x t(y|x) p(x)`.
    pub fn apply(&self, p: &Pmf) -> Result<Pmf> {
        same_len(self.n_in(), p.len())?;
        let mut q = vec![0.0; self.n_out()];
        for (x, row) in self.rows.iter().enumerate() {
            let px = p.get(x);
            for (y, t) in row.mass().iter().enumerate() {
                q[y] += t * px;
            }
        }
        Pmf::new(q)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &StochasticOp) -> Result<StochasticOp> {
        same_len(self.n_out(), next.n_in())?;
        let rows = self
            .rows
            .iter()
            .map(|r| next.apply(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Bayes reversal `t†(x|y) = p(x) t(y|x) / q(y)` with respect to the
    /// prior `p`.
    pub fn pseudo_inverse(&self, p: &Pmf) -> Result<StochasticOp> {
        p.require_full_support()?;
        let q = self.apply(p)?;
        let mut rows = Vec::with_capacity(self.n_out());
        for y in 0..self.n_out() {
            let qy = q.get(y);
            if qy < SUPPORT_TOL {
                return Err(Error::DegeneratePosterior(y));
            }
            let post = (0..self.n_in())
                .map(|x| p.get(x) * self.get(y, x) / qy)
                .collect();
            rows.push(Pmf::new(post)?);
        }
        Self::new(rows)
    }
}

pub fn apply_stochastic(op: &StochasticOp, p: &Pmf) -> Result<Pmf> {
    op.apply(p)
}

pub fn bayes_pseudo_inverse(op: &StochasticOp, p: &Pmf) -> Result<StochasticOp> {
    op.pseudo_inverse(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    fn example_kernel() -> StochasticOp {
        StochasticOp::from_columns(&[vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap()
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.5]).is_ok());
        assert_eq!(Pmf::new(vec![]), Err(Error::Empty));
        assert!(matches!(
            Pmf::new(vec![0.6, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            Pmf::new(vec![1.2, -0.2]),
            Err(Error::InvalidMass { index: 1, .. })
        ));
        let p = Pmf::new(vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!(close(p.mass().iter().sum::<f64>(), 1.0, 1e-15));
        assert!(!Pmf::new(vec![1.0, 0.0]).unwrap().is_full_support());
    }

    #[test]
    fn apply_examples() {
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(StochasticOp::identity(2).unwrap().apply(&p).unwrap(), p);
        let r = Pmf::new(vec![0.1, 0.2, 0.7]).unwrap();
        let c = StochasticOp::constant(2, &r).unwrap();
        let out = c.apply(&p).unwrap();
        for (a, b) in out.mass().iter().zip(r.mass()) {
            assert!(close(*a, *b, 1e-15));
        }
        let q = example_kernel().apply(&Pmf::uniform(2).unwrap()).unwrap();
        assert!(close(q.get(0), 0.55, 1e-15));
        assert!(close(q.get(1), 0.45, 1e-15));
    }

    #[test]
    fn apply_rejects_mismatch() {
        let p = Pmf::uniform(3).unwrap();
        assert!(matches!(
            example_kernel().apply(&p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pseudo_inverse_examples() {
        let p = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap();
        let id = StochasticOp::identity(3).unwrap();
        assert_eq!(id.pseudo_inverse(&p).unwrap(), id);

        let r = Pmf::new(vec![0.4, 0.6]).unwrap();
        let c = StochasticOp::constant(3, &r).unwrap();
        let inv = c.pseudo_inverse(&p).unwrap();
        for y in 0..2 {
            for x in 0..3 {
                assert!(close(inv.get(x, y), p.get(x), 1e-15));
            }
        }

        let inv = example_kernel()
            .pseudo_inverse(&Pmf::uniform(2).unwrap())
            .unwrap();
        assert!(close(inv.get(0, 0), 9.0 / 11.0, 1e-15));
        assert!(close(inv.get(1, 0), 2.0 / 11.0, 1e-15));
    }

    #[test]
    fn pseudo_inverse_degenerate() {
        let p = Pmf::uniform(2).unwrap();
        let op = StochasticOp::constant(2, &Pmf::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(op.pseudo_inverse(&p), Err(Error::DegeneratePosterior(1)));
    }

    #[test]
    fn marginal_examples() {
        let j = JointPmf::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let d = j.decompose();
        assert!(close(d.p_g.get(0), 0.4, 1e-15));
        assert!(close(d.p_g.get(1), 0.6, 1e-15));
        assert!(close(d.conditional.get(0, 0), 0.75, 1e-15));
        assert!(close(d.conditional.get(1, 0), 0.25, 1e-15));
        assert!(d.null_columns.is_empty());

        let p = Pmf::new(vec![0.2, 0.8]).unwrap();
        let q = Pmf::new(vec![0.5, 0.25, 0.25]).unwrap();
        let d = JointPmf::product(&p, &q).decompose();
        for g in 0..3 {
            assert!(close(d.conditional.get(0, g), 0.2, 1e-15));
            assert!(close(d.p_g.get(g), q.get(g), 1e-15));
        }

        let diag = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let d = diag.decompose();
        assert_eq!(d.conditional.row(0).mass(), &[1.0, 0.0]);
        assert_eq!(d.conditional.row(1).mass(), &[0.0, 1.0]);
    }

    #[test]
    fn null_columns_are_flagged() {
        let j = JointPmf::from_rows(&[vec![0.5, 0.0, 0.2], vec![0.3, 0.0, 0.0]]).unwrap();
        let d = j.decompose();
        assert_eq!(d.null_columns, vec![1]);
        let trimmed = j.without_null_columns();
        assert_eq!(trimmed.n_g(), 2);
        assert!(close(trimmed.get(0, 1), 0.2, 0.0));
    }

    #[test]
    fn expectation_examples() {
        let p = Pmf::new(vec![0.75, 0.25]).unwrap();
        assert!(close(expectation(&p, &[3.0, 3.0]).unwrap(), 3.0, 1e-15));
        assert!(close(
            expectation(&Pmf::uniform(2).unwrap(), &[0.0, 1.0]).unwrap(),
            0.5,
            1e-15
        ));
        assert!(close(expectation(&p, &[4.0, 0.0]).unwrap(), 3.0, 1e-15));
    }
}
