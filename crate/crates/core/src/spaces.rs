//! Model `*`-probability spaces as moment functionals on words, plus
//! bounded checks of the state axioms.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freeness::FreeMomentEngine;
use crate::groups::{GroupElement, GroupPresentation};
use crate::ncpartitions::{MarginalMoments, Marginals, MomentSequence};
use crate::scalar::{abs_sq, one, to_f64, zero, Rational, Scalar};
use crate::starwords::{adjoint_letters, alternating_blocks, letters_text, Letter, StarWord, VarId};

/// Anything that assigns exact moments to words in a finite set of variables.
pub trait MomentOracle: Send + Sync {
    fn variables(&self) -> Vec<VarId>;

    fn is_unitary(&self, var: VarId) -> bool;

    /// Moment of a letter sequence; the empty sequence has moment 1.
    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar>;

    fn moment(&self, word: &StarWord) -> Result<Scalar> {
        self.moment_letters(word.letters())
    }

    /// Key identifying the algebra element a word denotes, as far as the
    /// model knows. Used to pick a basis for Gram matrices.
    fn basis_key(&self, letters: &[Letter]) -> String {
        let mut stack: Vec<Letter> = Vec::new();
        for &l in letters {
            match stack.last() {
                Some(&top) if top == l.adjoint() && self.is_unitary(l.index) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        letters_text(&stack)
    }
}

impl<T: MomentOracle + ?Sized> MomentOracle for Arc<T> {
    fn variables(&self) -> Vec<VarId> {
        (**self).variables()
    }
    fn is_unitary(&self, var: VarId) -> bool {
        (**self).is_unitary(var)
    }
    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar> {
        (**self).moment_letters(letters)
    }
    fn basis_key(&self, letters: &[Letter]) -> String {
        (**self).basis_key(letters)
    }
}

/// Functional on a group algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupFunctional {
    /// 1 on the identity, 0 elsewhere.
    CanonicalTrace,
    /// Listed values, 1 on the identity, 0 on anything unlisted.
    Table(BTreeMap<GroupElement, Scalar>),
}

/// Variables realized as group elements in `C G`.
#[derive(Debug, Clone)]
pub struct GroupModel {
    presentation: GroupPresentation,
    generators: BTreeMap<VarId, GroupElement>,
    inverses: BTreeMap<VarId, GroupElement>,
    functional: GroupFunctional,
}

impl GroupModel {
    pub fn new(
        presentation: GroupPresentation,
        generators: BTreeMap<VarId, GroupElement>,
        functional: GroupFunctional,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidScenario("a group model needs variables".into()));
        }
        if let GroupFunctional::Table(table) = &functional {
            for (g, v) in table {
                if g.is_identity() && *v != one() {
                    return Err(Error::InvalidScenario(format!(
                        "table value at the identity must be 1, got {}",
                        crate::scalar::format(v)
                    )));
                }
                let inv = presentation.inverse(g);
                let w = table.get(&inv).cloned().unwrap_or_else(zero);
                if w != v.conj() {
                    return Err(Error::InvalidScenario(format!(
                        "table is not Hermitian at {g}: value at the inverse must be the conjugate"
                    )));
                }
            }
        }
        let inverses = generators.iter().map(|(&v, g)| (v, presentation.inverse(g))).collect();
        Ok(Self {
            presentation,
            generators,
            inverses,
            functional,
        })
    }

    pub fn canonical_trace(presentation: GroupPresentation, generators: BTreeMap<VarId, GroupElement>) -> Result<Self> {
        Self::new(presentation, generators, GroupFunctional::CanonicalTrace)
    }

    /// Table functional given as `(word over the variables, value)` pairs.
    pub fn with_table(
        presentation: GroupPresentation,
        generators: BTreeMap<VarId, GroupElement>,
        entries: &[(StarWord, Scalar)],
    ) -> Result<Self> {
        let probe = Self::canonical_trace(presentation.clone(), generators.clone())?;
        let mut table = BTreeMap::new();
        for (w, v) in entries {
            let g = probe.element(w.letters())?;
            if let Some(old) = table.insert(g.clone(), v.clone()) {
                if old != *v {
                    return Err(Error::InvalidScenario(format!("conflicting table values for {g}")));
                }
            }
        }
        Self::new(presentation, generators, GroupFunctional::Table(table))
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn generators(&self) -> &BTreeMap<VarId, GroupElement> {
        &self.generators
    }

    pub fn functional(&self) -> &GroupFunctional {
        &self.functional
    }

    pub fn is_canonical_trace(&self) -> bool {
        matches!(self.functional, GroupFunctional::CanonicalTrace)
    }

    /// Group element denoted by a word.
    pub fn element(&self, letters: &[Letter]) -> Result<GroupElement> {
        let mut acc = self.presentation.identity();
        for l in letters {
            let map = if l.star { &self.inverses } else { &self.generators };
            let g = map.get(&l.index).ok_or(Error::UnknownVariable(l.index))?;
            acc = self.presentation.multiply(&acc, g);
        }
        Ok(acc)
    }

    pub fn value_at(&self, g: &GroupElement) -> Scalar {
        if g.is_identity() {
            return one();
        }
        match &self.functional {
            GroupFunctional::CanonicalTrace => zero(),
            GroupFunctional::Table(t) => t.get(g).cloned().unwrap_or_else(zero),
        }
    }
}

impl MomentOracle for GroupModel {
    fn variables(&self) -> Vec<VarId> {
        self.generators.keys().copied().collect()
    }

    fn is_unitary(&self, var: VarId) -> bool {
        self.generators.contains_key(&var)
    }

    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar> {
        Ok(self.value_at(&self.element(letters)?))
    }

    fn basis_key(&self, letters: &[Letter]) -> String {
        self.element(letters)
            .map(|g| g.to_string())
            .unwrap_or_else(|_| letters_text(letters))
    }
}

/// A unitary given by its moments `phi(u^n)`, optionally with `u^p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMarginal {
    seq: MomentSequence,
    period: Option<u64>,
}

impl UnitaryMarginal {
    /// Checks `phi(u^0) = 1`, conjugate symmetry and `|phi(u^n)| <= 1`.
    pub fn new(powers: BTreeMap<i64, Scalar>, period: Option<u64>) -> Result<Self> {
        for (n, v) in &powers {
            if abs_sq(v) > Rational::from_integer(1.into()) {
                return Err(Error::InvalidScenario(format!("|phi(u^{n})| exceeds 1")));
            }
        }
        if let Some(p) = period {
            if p == 0 {
                return Err(Error::InvalidScenario("period must be positive".into()));
            }
            for (n, v) in &powers {
                if n.rem_euclid(p as i64) == 0 && *v != one() {
                    return Err(Error::InvalidScenario(format!("phi(u^{n}) must be 1 for period {p}")));
                }
            }
        }
        let seq = MomentSequence::unitary(powers).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        Ok(Self { seq, period })
    }

    /// All nonzero powers have moment 0.
    pub fn haar() -> Self {
        Self {
            seq: MomentSequence {
                values: BTreeMap::new(),
                unitary: true,
            },
            period: None,
        }
    }

    fn reduce(&self, n: i64) -> i64 {
        match self.period {
            Some(p) => {
                let r = n.rem_euclid(p as i64);
                if 2 * r > p as i64 {
                    r - p as i64
                } else {
                    r
                }
            }
            None => n,
        }
    }

    pub fn power_moment(&self, n: i64) -> Scalar {
        let n = self.reduce(n);
        if n == 0 {
            return one();
        }
        let direct = self.seq.values.get(&vec![n]);
        // with a period, a value may have been listed at another representative
        match (direct, self.period) {
            (Some(v), _) => v.clone(),
            (None, Some(p)) => self
                .seq
                .values
                .iter()
                .find(|(k, _)| self.reduce(k[0]) == n && k[0].rem_euclid(p as i64) != 0)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(zero),
            (None, None) => zero(),
        }
    }
}

impl MarginalMoments for UnitaryMarginal {
    fn moment(&self, atoms: &[i64]) -> Result<Scalar> {
        Ok(self.power_moment(atoms.iter().sum()))
    }

    fn is_unitary(&self) -> bool {
        true
    }

    fn canonical(&self, atoms: Vec<i64>) -> Vec<i64> {
        let n = self.reduce(atoms.iter().sum());
        if n == 0 {
            Vec::new()
        } else {
            vec![n]
        }
    }
}

/// A self-adjoint variable with moments `m_1, ..., m_N` (so `x* = x`).
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAdjointMarginal {
    moments: Vec<Scalar>,
}

impl SelfAdjointMarginal {
    pub fn new(moments: Vec<Scalar>) -> Result<Self> {
        if let Some(n) = moments.iter().position(|m| !m.im.is_zero()) {
            return Err(Error::InvalidScenario(format!(
                "moment m_{} of a self-adjoint variable must be real",
                n + 1
            )));
        }
        Ok(Self { moments })
    }

    /// Standard semicircle: Catalan numbers at even orders.
    pub fn semicircle(order: usize) -> Self {
        let moments = (1..=order)
            .map(|n| {
                if n % 2 == 1 {
                    zero()
                } else {
                    crate::scalar::from_real(Rational::from_integer(
                        (crate::ncpartitions::catalan(n / 2) as i64).into(),
                    ))
                }
            })
            .collect();
        Self { moments }
    }

    pub fn order(&self) -> usize {
        self.moments.len()
    }
}

impl MarginalMoments for SelfAdjointMarginal {
    fn moment(&self, atoms: &[i64]) -> Result<Scalar> {
        let n: usize = atoms.iter().map(|a| a.unsigned_abs() as usize).sum();
        if n == 0 {
            return Ok(one());
        }
        self.moments
            .get(n - 1)
            .cloned()
            .ok_or_else(|| Error::InsufficientData(format!("self-adjoint moment m_{n} not given")))
    }

    fn canonical(&self, atoms: Vec<i64>) -> Vec<i64> {
        let n: usize = atoms.iter().map(|a| a.unsigned_abs() as usize).sum();
        vec![1; n]
    }
}

/// Variables given by their individual distributions; mixed words are only
/// evaluable when the family is modeled as `*`-free.
#[derive(Debug)]
pub struct SpectralModel {
    engine: FreeMomentEngine,
    free: bool,
}

impl SpectralModel {
    pub fn new(marginals: Marginals, free: bool) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidScenario("a spectral model needs variables".into()));
        }
        Ok(Self {
            engine: FreeMomentEngine::new(marginals),
            free,
        })
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.engine = self.engine.with_max_len(max_len);
        self
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn engine(&self) -> &FreeMomentEngine {
        &self.engine
    }

    pub fn marginal(&self, var: VarId) -> Option<&Arc<dyn MarginalMoments>> {
        self.engine.marginals().get(&var)
    }
}

impl MomentOracle for SpectralModel {
    fn variables(&self) -> Vec<VarId> {
        self.engine.marginals().keys().copied().collect()
    }

    fn is_unitary(&self, var: VarId) -> bool {
        self.marginal(var).is_some_and(|m| m.is_unitary())
    }

    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar> {
        for l in letters {
            if self.marginal(l.index).is_none() {
                return Err(Error::UnknownVariable(l.index));
            }
        }
        let mixed = letters.windows(2).any(|w| w[0].index != w[1].index)
            && alternating_blocks(letters).iter().any(|(v, _)| *v != letters[0].index);
        if mixed && !self.free {
            return Err(Error::NotEvaluable(format!(
                "mixed word {} in a spectral model not declared free",
                letters_text(letters)
            )));
        }
        self.engine.moment_letters(letters)
    }

    fn basis_key(&self, letters: &[Letter]) -> String {
        self.engine.canonical_text(letters)
    }
}

/// The functional of one factor space.
#[derive(Debug)]
pub enum MomentFunctional {
    Group(GroupModel),
    Spectral(SpectralModel),
}

impl MomentFunctional {
    /// Whether the variables are known to form a `*`-free family by construction.
    pub fn declared_free(&self) -> bool {
        match self {
            MomentFunctional::Group(_) => false,
            MomentFunctional::Spectral(s) => s.is_free() || s.variables().len() == 1,
        }
    }
}

impl MomentOracle for MomentFunctional {
    fn variables(&self) -> Vec<VarId> {
        match self {
            MomentFunctional::Group(g) => g.variables(),
            MomentFunctional::Spectral(s) => s.variables(),
        }
    }

    fn is_unitary(&self, var: VarId) -> bool {
        match self {
            MomentFunctional::Group(g) => g.is_unitary(var),
            MomentFunctional::Spectral(s) => s.is_unitary(var),
        }
    }

    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar> {
        match self {
            MomentFunctional::Group(g) => g.moment_letters(letters),
            MomentFunctional::Spectral(s) => s.moment_letters(letters),
        }
    }

    fn basis_key(&self, letters: &[Letter]) -> String {
        match self {
            MomentFunctional::Group(g) => g.basis_key(letters),
            MomentFunctional::Spectral(s) => s.basis_key(letters),
        }
    }
}

/// `psi((b - psi(b))(b - psi(b))*)` for the element `b` denoted by `letters`.
pub fn variance(oracle: &dyn MomentOracle, letters: &[Letter]) -> Result<Rational> {
    let adj = adjoint_letters(letters);
    let mut bb = letters.to_vec();
    bb.extend_from_slice(&adj);
    let m = oracle.moment_letters(letters)?;
    let ms = oracle.moment_letters(&adj)?;
    let mbb = oracle.moment_letters(&bb)?;
    let v = mbb - m.conj() * &m - &m * ms + crate::scalar::from_real(abs_sq(&m));
    if !v.im.is_zero() {
        return Err(Error::Precondition(format!(
            "variance of {} is not real: the functional is not Hermitian",
            letters_text(letters)
        )));
    }
    Ok(v.re)
}

/// Variance exactly zero: the element is a scalar multiple of the unit when
/// the functional is faithful.
pub fn is_deterministic(oracle: &dyn MomentOracle, letters: &[Letter]) -> Result<bool> {
    Ok(variance(oracle, letters)?.is_zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GramMode {
    Exact,
    Float { tolerance: f64 },
}

/// Default cap on the Gram basis size.
pub const DEFAULT_GRAM_CAP: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    /// Word length bound the report is certified at.
    pub level: usize,
    pub dimension: usize,
    pub unital: bool,
    pub hermitian: bool,
    pub positive_semidefinite: bool,
    pub positive_definite: bool,
    pub tracial: bool,
    /// `(b, c)` with `psi(bc) != psi(cb)`.
    pub trace_witness: Option<(String, String)>,
    pub mode: GramMode,
    pub min_eigenvalue: Option<f64>,
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "yes" } else { "no" };
        write!(
            f,
            "level {} (dim {}): unital {}, hermitian {}, psd {}, pd {}, tracial {}",
            self.level,
            self.dimension,
            mark(self.unital),
            mark(self.hermitian),
            mark(self.positive_semidefinite),
            mark(self.positive_definite),
            mark(self.tracial)
        )
    }
}

/// Distinct elements reachable by words of length at most `max_len` over
/// `vars`, shortest representative first; the unit comes first.
pub fn basis_words(oracle: &dyn MomentOracle, vars: &[VarId], max_len: usize, cap: usize) -> Result<Vec<Vec<Letter>>> {
    let mut seen = HashSet::new();
    seen.insert(oracle.basis_key(&[]));
    let mut basis = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    let alphabet: Vec<Letter> = vars
        .iter()
        .flat_map(|&v| [Letter::plain(v), Letter::starred(v)])
        .collect();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &alphabet {
                let mut x: Vec<Letter> = w.clone();
                x.push(l);
                if seen.insert(oracle.basis_key(&x)) {
                    next.push(x.clone());
                    basis.push(x);
                    if basis.len() > cap {
                        return Err(Error::limit("Gram dimension", basis.len(), cap));
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(basis)
}

/// Exact Hermitian PSD/PD test by symmetric Gaussian elimination.
///
/// A positive pivot is eliminated; a zero pivot forces a zero row; any
/// negative pivot refutes semidefiniteness.
pub fn hermitian_definiteness(mut g: Vec<Vec<Scalar>>) -> (bool, bool) {
    let n = g.len();
    let mut definite = true;
    for k in 0..n {
        let p = g[k][k].clone();
        if !p.im.is_zero() || p.re.is_negative() {
            return (false, false);
        }
        if p.re.is_zero() {
            definite = false;
            if (k + 1..n).any(|j| !g[k][j].is_zero()) {
                return (false, false);
            }
            continue;
        }
        let inv = Scalar::new(p.re.recip(), Rational::zero());
        for i in k + 1..n {
            if g[i][k].is_zero() {
                continue;
            }
            let f = &g[i][k] * &inv;
            let pivot_row = g[k].clone();
            for (cell, pk) in g[i].iter_mut().zip(&pivot_row).skip(k + 1) {
                *cell = &*cell - &f * pk;
            }
            g[i][k] = zero();
        }
    }
    (true, definite)
}

fn min_eigenvalue(g: &[Vec<Scalar>]) -> f64 {
    use nalgebra::{Complex, DMatrix};
    let n = g.len();
    let m = DMatrix::from_fn(n, n, |i, j| Complex::new(to_f64(&g[i][j].re), to_f64(&g[i][j].im)));
    let eig = nalgebra::SymmetricEigen::new(m);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Gram matrix `[psi(w_a w_b*)]` over the basis from [`basis_words`].
pub fn gram_matrix(oracle: &dyn MomentOracle, basis: &[Vec<Letter>]) -> Result<Vec<Vec<Scalar>>> {
    basis
        .par_iter()
        .map(|wa| {
            basis
                .iter()
                .map(|wb| {
                    let mut x = wa.clone();
                    x.extend(adjoint_letters(wb));
                    oracle.moment_letters(&x)
                })
                .collect()
        })
        .collect()
}

/// Bounded axiom check over words of length at most `level` in `vars`.
pub fn check_axioms(
    oracle: &dyn MomentOracle,
    vars: &[VarId],
    level: usize,
    mode: GramMode,
    cap: usize,
) -> Result<AxiomReport> {
    if level == 0 {
        return Err(Error::Precondition("axiom check needs level >= 1".into()));
    }
    let known = oracle.variables();
    if let Some(v) = vars.iter().find(|v| !known.contains(v)) {
        return Err(Error::UnknownVariable(*v));
    }
    let basis = basis_words(oracle, vars, level, cap)?;
    let gram = gram_matrix(oracle, &basis)?;
    let n = basis.len();
    let unital = oracle.moment_letters(&[])? == one();
    let hermitian = (0..n).all(|i| (i..n).all(|j| gram[i][j] == gram[j][i].conj()));

    let (psd, pd, min_eig) = match mode {
        GramMode::Exact => {
            let (psd, pd) = if hermitian {
                hermitian_definiteness(gram.clone())
            } else {
                (false, false)
            };
            (psd, pd, None)
        }
        GramMode::Float { tolerance } => {
            let e = min_eigenvalue(&gram);
            (hermitian && e >= -tolerance, hermitian && e > tolerance, Some(e))
        }
    };

    let trace_witness = basis[1..]
        .par_iter()
        .enumerate()
        .find_map_first(|(a, b)| {
            for c in &basis[a + 2..] {
                let mut bc = b.clone();
                bc.extend_from_slice(c);
                let mut cb = c.clone();
                cb.extend_from_slice(b);
                match (oracle.moment_letters(&bc), oracle.moment_letters(&cb)) {
                    (Ok(x), Ok(y)) if x == y => {}
                    (Ok(_), Ok(_)) => return Some(Ok((letters_text(b), letters_text(c)))),
                    (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
                }
            }
            None
        })
        .transpose()?;

    Ok(AxiomReport {
        level,
        dimension: n,
        unital,
        hermitian,
        positive_semidefinite: psd,
        positive_definite: pd,
        tracial: trace_witness.is_none(),
        trace_witness,
        mode,
        min_eigenvalue: min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::CyclicOrder;
    use crate::scalar::{rat, real};
    use crate::starwords::parse_word;

    fn letters(text: &str) -> Vec<Letter> {
        parse_word(text).unwrap().into_letters()
    }

    pub(crate) fn f2_model() -> GroupModel {
        let p = GroupPresentation::free_group(2);
        let gens = BTreeMap::from([(1, p.parse("g1.1").unwrap()), (2, p.parse("g1.2").unwrap())]);
        GroupModel::canonical_trace(p, gens).unwrap()
    }

    fn z_model() -> GroupModel {
        let p = GroupPresentation::free_group(1);
        let gens = BTreeMap::from([(1, p.parse("g1.1").unwrap()), (2, p.parse("g1.1^2").unwrap())]);
        GroupModel::canonical_trace(p, gens).unwrap()
    }

    fn beta_table(beta: Rational) -> GroupModel {
        let p = GroupPresentation::free_group(2);
        let gens = BTreeMap::from([(1, p.parse("g1.1").unwrap()), (2, p.parse("g1.2").unwrap())]);
        let b = crate::scalar::from_real(beta);
        GroupModel::with_table(
            p,
            gens,
            &[
                (parse_word("x1 x2").unwrap(), b.clone()),
                (parse_word("x2* x1*").unwrap(), b),
            ],
        )
        .unwrap()
    }

    #[test]
    fn moment_examples() {
        assert_eq!(f2_model().moment_letters(&letters("x1 x2 x1* x2*")).unwrap(), zero());
        assert_eq!(z_model().moment_letters(&letters("x1 x2 x1* x2*")).unwrap(), one());
        assert_eq!(
            beta_table(rat(1, 10)).moment_letters(&letters("x1 x2")).unwrap(),
            real(1, 10)
        );
        assert_eq!(
            f2_model().moment_letters(&letters("x3")),
            Err(Error::UnknownVariable(3))
        );
    }

    #[test]
    fn table_must_be_hermitian_and_unital() {
        let p = GroupPresentation::free_group(2);
        let gens = BTreeMap::from([(1, p.parse("g1.1").unwrap()), (2, p.parse("g1.2").unwrap())]);
        let only_one_side =
            GroupModel::with_table(p.clone(), gens.clone(), &[(parse_word("x1 x2").unwrap(), real(1, 10))]);
        assert!(matches!(only_one_side, Err(Error::InvalidScenario(_))));
        let bad_unit = GroupModel::with_table(p, gens, &[(parse_word("x1 x1*").unwrap(), real(1, 2))]);
        assert!(matches!(bad_unit, Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn variance_examples() {
        let haar = SpectralModel::new(
            BTreeMap::from([(1, Arc::new(UnitaryMarginal::haar()) as Arc<dyn MarginalMoments>)]),
            false,
        )
        .unwrap();
        assert_eq!(variance(&haar, &letters("x1 x1*")).unwrap(), rat(0, 1));
        assert_eq!(variance(&haar, &letters("x1")).unwrap(), rat(1, 1));
        assert!(!is_deterministic(&haar, &letters("x1")).unwrap());

        let half = UnitaryMarginal::new(BTreeMap::from([(1, real(1, 2))]), None).unwrap();
        let m = SpectralModel::new(BTreeMap::from([(1, Arc::new(half) as Arc<dyn MarginalMoments>)]), false).unwrap();
        assert_eq!(variance(&m, &letters("x1")).unwrap(), rat(3, 4));

        let sq = UnitaryMarginal::new(BTreeMap::from([(2, real(1, 1))]), None).unwrap();
        let m = SpectralModel::new(BTreeMap::from([(1, Arc::new(sq) as Arc<dyn MarginalMoments>)]), false).unwrap();
        assert!(is_deterministic(&m, &letters("x1 x1")).unwrap());

        assert!(is_deterministic(&z_model(), &letters("x1 x1 x2*")).unwrap());
    }

    #[test]
    fn unitary_marginal_validation() {
        assert!(UnitaryMarginal::new(BTreeMap::from([(1, real(3, 2))]), None).is_err());
        assert!(UnitaryMarginal::new(BTreeMap::from([(0, real(1, 2))]), None).is_err());
        let p = UnitaryMarginal::new(BTreeMap::from([(1, real(1, 3))]), Some(3)).unwrap();
        assert_eq!(p.power_moment(4), real(1, 3));
        assert_eq!(p.power_moment(-2), real(1, 3));
        assert_eq!(p.power_moment(3), one());
    }

    #[test]
    fn spectral_refuses_mixed_words_unless_free() {
        let marg = || -> Marginals {
            BTreeMap::from([
                (1, Arc::new(UnitaryMarginal::haar()) as Arc<dyn MarginalMoments>),
                (2, Arc::new(UnitaryMarginal::haar()) as Arc<dyn MarginalMoments>),
            ])
        };
        let strict = SpectralModel::new(marg(), false).unwrap();
        assert!(matches!(
            strict.moment_letters(&letters("x1 x2")),
            Err(Error::NotEvaluable(_))
        ));
        assert_eq!(strict.moment_letters(&letters("x1 x1*")).unwrap(), one());
        let free = SpectralModel::new(marg(), true).unwrap();
        assert_eq!(free.moment_letters(&letters("x1 x2 x2* x1*")).unwrap(), one());
        assert_eq!(free.moment_letters(&letters("x1 x2 x1* x2*")).unwrap(), zero());
    }

    #[test]
    fn canonical_trace_axioms() {
        let r = check_axioms(&f2_model(), &[1, 2], 2, GramMode::Exact, DEFAULT_GRAM_CAP).unwrap();
        assert!(r.unital && r.hermitian && r.positive_semidefinite && r.positive_definite && r.tracial);
        assert_eq!(r.dimension, 17);
    }

    #[test]
    fn beta_table_axioms() {
        for level in [2, 3] {
            let r = check_axioms(
                &beta_table(rat(1, 10)),
                &[1, 2],
                level,
                GramMode::Exact,
                DEFAULT_GRAM_CAP,
            )
            .unwrap();
            assert!(r.positive_semidefinite && r.positive_definite, "level {level}");
            assert!(!r.tracial);
        }
        let r = check_axioms(&beta_table(rat(1, 1)), &[1, 2], 2, GramMode::Exact, DEFAULT_GRAM_CAP).unwrap();
        assert!(!r.positive_semidefinite);
        // the eigenvalue oracle agrees on both
        let f = GramMode::Float { tolerance: 1e-9 };
        let r = check_axioms(&beta_table(rat(1, 1)), &[1, 2], 2, f, DEFAULT_GRAM_CAP).unwrap();
        assert!(!r.positive_semidefinite);
        assert!(r.min_eigenvalue.unwrap() < -0.4);
        let r = check_axioms(&beta_table(rat(1, 10)), &[1, 2], 3, f, DEFAULT_GRAM_CAP).unwrap();
        assert!(r.positive_definite);
        assert!(r.min_eigenvalue.unwrap() > 0.7);
    }

    #[test]
    fn finite_groups_dedupe_basis() {
        let p = GroupPresentation::free_product(&[CyclicOrder::Finite(3)]);
        let gens = BTreeMap::from([(1, p.parse("g1.1").unwrap())]);
        let m = GroupModel::canonical_trace(p, gens).unwrap();
        let r = check_axioms(&m, &[1], 4, GramMode::Exact, DEFAULT_GRAM_CAP).unwrap();
        assert_eq!(r.dimension, 3);
        assert!(r.positive_definite);
    }

    #[test]
    fn gram_cap_is_enforced() {
        assert!(matches!(
            check_axioms(&f2_model(), &[1, 2], 4, GramMode::Exact, 20),
            Err(Error::LimitExceeded { .. })
        ));
    }

    #[test]
    fn exact_definiteness_small_cases() {
        let m = |rows: &[&[i64]]| -> Vec<Vec<Scalar>> {
            rows.iter().map(|r| r.iter().map(|&x| real(x, 1)).collect()).collect()
        };
        assert_eq!(hermitian_definiteness(m(&[&[2, 1], &[1, 2]])), (true, true));
        assert_eq!(hermitian_definiteness(m(&[&[1, 1], &[1, 1]])), (true, false));
        assert_eq!(hermitian_definiteness(m(&[&[1, 2], &[2, 1]])), (false, false));
        assert_eq!(hermitian_definiteness(m(&[&[0, 1], &[1, 0]])), (false, false));
    }

    #[test]
    fn hermitian_symmetry_of_models() {
        let models: Vec<Box<dyn MomentOracle>> = vec![
            Box::new(f2_model()),
            Box::new(z_model()),
            Box::new(beta_table(rat(1, 10))),
        ];
        for m in &models {
            for w in all_words(&[1, 2], 8) {
                let a = m.moment_letters(&w).unwrap();
                let b = m.moment_letters(&adjoint_letters(&w)).unwrap();
                assert_eq!(a, b.conj());
            }
        }
    }

    #[test]
    fn canonical_trace_values() {
        for m in [f2_model(), z_model()] {
            for w in all_words(&[1, 2], 6) {
                let a = m.moment_letters(&w).unwrap();
                assert!(a == zero() || a == one());
                let mut ww = w.clone();
                ww.extend(adjoint_letters(&w));
                assert_eq!(m.moment_letters(&ww).unwrap(), one());
            }
        }
    }

    fn all_words(vars: &[VarId], max_len: usize) -> Vec<Vec<Letter>> {
        let alphabet: Vec<Letter> = vars
            .iter()
            .flat_map(|&v| [Letter::plain(v), Letter::starred(v)])
            .collect();
        let mut out = Vec::new();
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for &l in &alphabet {
                    let mut x: Vec<Letter> = w.clone();
                    x.push(l);
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}
