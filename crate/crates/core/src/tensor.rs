//! Diagonal tensor families `D_i = a_{1;i} ⊗ ... ⊗ a_{K;i}` and their moments,
//! which factor as the product of the factor moments of the same word.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freeness::{closed_form_2_1, TwoMoments};
use crate::ncpartitions::{MarginalMoments, Marginals};
use crate::scalar::{format, from_real, one, pow, rational_sqrt, Rational, Scalar};
use crate::spaces::{is_deterministic, MomentFunctional, MomentOracle, SpectralModel};
use crate::starwords::{adjoint_letters, letters_text, Letter, StarWord, VarId};

/// `K` factor spaces with an index set `I` bound to one variable per factor.
#[derive(Debug, Clone)]
pub struct TensorScenario {
    factors: Vec<Arc<MomentFunctional>>,
    names: Vec<String>,
    bindings: BTreeMap<VarId, Vec<VarId>>,
}

impl TensorScenario {
    pub fn new(factors: Vec<Arc<MomentFunctional>>, bindings: BTreeMap<VarId, Vec<VarId>>) -> Result<Self> {
        let names = (1..=factors.len()).map(|k| format!("factor {k}")).collect();
        Self::with_names(factors, names, bindings)
    }

    pub fn with_names(
        factors: Vec<Arc<MomentFunctional>>,
        names: Vec<String>,
        bindings: BTreeMap<VarId, Vec<VarId>>,
    ) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidScenario("a tensor scenario needs a factor".into()));
        }
        if bindings.is_empty() {
            return Err(Error::InvalidScenario("the index set is empty".into()));
        }
        for (i, vars) in &bindings {
            if vars.len() != factors.len() {
                return Err(Error::InvalidScenario(format!(
                    "index {i} binds {} variables for {} factors",
                    vars.len(),
                    factors.len()
                )));
            }
            for (k, v) in vars.iter().enumerate() {
                if !factors[k].variables().contains(v) {
                    return Err(Error::InvalidScenario(format!(
                        "index {i}: factor {} has no variable x{v}",
                        k + 1
                    )));
                }
            }
        }
        Ok(Self {
            factors,
            names,
            bindings,
        })
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, k: usize) -> &Arc<MomentFunctional> {
        &self.factors[k]
    }

    pub fn factor_name(&self, k: usize) -> &str {
        &self.names[k]
    }

    pub fn indices(&self) -> Vec<VarId> {
        self.bindings.keys().copied().collect()
    }

    pub fn bindings(&self) -> &BTreeMap<VarId, Vec<VarId>> {
        &self.bindings
    }

    /// Rewrites `x_i` to the factor-`k` variable `a_{k;i}`.
    pub fn relabel(&self, letters: &[Letter], k: usize) -> Result<Vec<Letter>> {
        letters
            .iter()
            .map(|l| {
                let vars = self.bindings.get(&l.index).ok_or(Error::UnknownVariable(l.index))?;
                Ok(Letter::new(vars[k], l.star))
            })
            .collect()
    }

    /// `phi_k(M(a_{k;i} : i in I))`.
    pub fn factor_moment(&self, k: usize, letters: &[Letter]) -> Result<Scalar> {
        let local = self.relabel(letters, k)?;
        self.factors[k].moment_letters(&local).map_err(|e| match e {
            Error::NotEvaluable(reason) | Error::InsufficientData(reason) => Error::FactorNotEvaluable {
                factor: k + 1,
                word: letters_text(letters),
                reason,
            },
            other => other,
        })
    }

    /// The family `(a_{k;i} : i in I)` as an oracle over the index set.
    pub fn factor_view(&self, k: usize) -> FactorView {
        FactorView {
            functional: self.factors[k].clone(),
            bindings: self.bindings.iter().map(|(&i, v)| (i, v[k])).collect(),
        }
    }

    /// Whether factor `k` is a free family by construction.
    pub fn factor_declared_free(&self, k: usize) -> bool {
        self.factors[k].declared_free()
    }
}

impl MomentOracle for TensorScenario {
    fn variables(&self) -> Vec<VarId> {
        self.indices()
    }

    fn is_unitary(&self, var: VarId) -> bool {
        self.bindings
            .get(&var)
            .is_some_and(|vs| vs.iter().enumerate().all(|(k, &v)| self.factors[k].is_unitary(v)))
    }

    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar> {
        let mut acc = one();
        for k in 0..self.factors.len() {
            acc *= self.factor_moment(k, letters)?;
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    fn basis_key(&self, letters: &[Letter]) -> String {
        (0..self.factors.len())
            .map(|k| {
                self.relabel(letters, k)
                    .map(|l| self.factors[k].basis_key(&l))
                    .unwrap_or_default()
            })
            .collect::<Vec<_>>()
            .join(" ⊗ ")
    }
}

/// `phi(M(D))` for a parsed word.
pub fn tensor_moment(scenario: &TensorScenario, word: &StarWord) -> Result<Scalar> {
    scenario.moment(word)
}

/// One factor family seen through the index set.
#[derive(Debug, Clone)]
pub struct FactorView {
    functional: Arc<MomentFunctional>,
    bindings: BTreeMap<VarId, VarId>,
}

impl FactorView {
    fn relabel(&self, letters: &[Letter]) -> Result<Vec<Letter>> {
        letters
            .iter()
            .map(|l| {
                let v = self.bindings.get(&l.index).ok_or(Error::UnknownVariable(l.index))?;
                Ok(Letter::new(*v, l.star))
            })
            .collect()
    }
}

impl MomentOracle for FactorView {
    fn variables(&self) -> Vec<VarId> {
        self.bindings.keys().copied().collect()
    }

    fn is_unitary(&self, var: VarId) -> bool {
        self.bindings.get(&var).is_some_and(|&v| self.functional.is_unitary(v))
    }

    fn moment_letters(&self, letters: &[Letter]) -> Result<Scalar> {
        self.functional.moment_letters(&self.relabel(letters)?)
    }

    fn basis_key(&self, letters: &[Letter]) -> String {
        self.relabel(letters)
            .map(|l| self.functional.basis_key(&l))
            .unwrap_or_else(|_| letters_text(letters))
    }
}

/// `M(x)` with `x -> x_i`.
pub fn instantiate(pattern: &[bool], i: VarId) -> Vec<Letter> {
    pattern.iter().map(|&s| Letter::new(i, s)).collect()
}

/// Text of a one-variable pattern, e.g. `x x*`.
pub fn pattern_text(pattern: &[bool]) -> String {
    pattern
        .iter()
        .map(|&s| if s { "x*" } else { "x" })
        .collect::<Vec<_>>()
        .join(" ")
}

/// All one-variable `*`-words up to `max_len`, by length then text.
pub fn one_variable_words(max_len: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        // "x" < "x*" and "x " < "x*", so false-before-true binary order is text order
        for mask in 0..(1u64 << len) {
            out.push((0..len).rev().map(|b| mask >> b & 1 == 1).collect());
        }
    }
    out
}

/// Checks the centered decomposition of `M(D_i)` against factor `k` by the
/// two cases of the tensor freeness conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub word: String,
    pub index: VarId,
    pub factor: usize,
    pub holds: bool,
    #[serde(with = "crate::scalar::text")]
    pub tensor_value: Scalar,
    #[serde(with = "crate::scalar::text")]
    pub factor_value: Scalar,
    /// Factors `l != k` where `M(a_{l;i})` is not deterministic.
    pub nondeterministic: Vec<usize>,
}

pub fn centered_tensor_decomposition(
    scenario: &TensorScenario,
    i: VarId,
    pattern: &[bool],
    k: usize,
) -> Result<DecompositionReport> {
    if k >= scenario.num_factors() {
        return Err(Error::Precondition(format!("no factor {}", k + 1)));
    }
    let word = instantiate(pattern, i);
    let tensor_value = scenario.moment_letters(&word)?;
    let factor_value = scenario.factor_moment(k, &word)?;
    let mut nondeterministic = Vec::new();
    let holds = if tensor_value.is_zero() {
        factor_value.is_zero()
    } else {
        for l in (0..scenario.num_factors()).filter(|&l| l != k) {
            let local = scenario.relabel(&word, l)?;
            if !is_deterministic(scenario.factor(l).as_ref(), &local)? {
                nondeterministic.push(l + 1);
            }
        }
        nondeterministic.is_empty()
    };
    Ok(DecompositionReport {
        word: letters_text(&word),
        index: i,
        factor: k + 1,
        holds,
        tensor_value,
        factor_value,
        nondeterministic,
    })
}

/// Marginal scaled by `c` per letter: `c^n` times the original moment.
#[derive(Debug)]
struct ScaledMarginal {
    inner: Arc<dyn MarginalMoments>,
    c: Rational,
}

impl MarginalMoments for ScaledMarginal {
    fn moment(&self, atoms: &[i64]) -> Result<Scalar> {
        let n: u32 = atoms.iter().map(|a| a.unsigned_abs() as u32).sum();
        Ok(self.inner.moment(atoms)? * pow(&from_real(self.c.clone()), n))
    }

    fn canonical(&self, atoms: Vec<i64>) -> Vec<i64> {
        // scaling breaks unitarity, so only the inner rules for non-unitaries apply
        if self.inner.is_unitary() {
            atoms
        } else {
            self.inner.canonical(atoms)
        }
    }
}

/// How one variable was rescaled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rescaling {
    pub factor: usize,
    pub variable: VarId,
    pub second_moment: String,
    pub scale: String,
}

/// Rescales every spectral variable to `phi_k(a a*) = phi_k(a* a) = 1`.
///
/// Fails unless each second moment is a positive rational square, keeping
/// the arithmetic exact. Group variables are unitary and never rescaled.
pub fn normalize(scenario: &TensorScenario) -> Result<(TensorScenario, Vec<Rescaling>)> {
    let mut factors = Vec::new();
    let mut log = Vec::new();
    for (k, f) in scenario.factors.iter().enumerate() {
        let MomentFunctional::Spectral(model) = f.as_ref() else {
            factors.push(f.clone());
            continue;
        };
        let mut marginals: Marginals = BTreeMap::new();
        let mut changed = false;
        for v in model.variables() {
            let m = model.marginal(v).unwrap().clone();
            let s = m.moment(&[1, -1])?;
            let t = m.moment(&[-1, 1])?;
            if s != t || !s.im.is_zero() || s.re <= Rational::zero() {
                return Err(Error::Precondition(format!(
                    "factor {} variable x{v}: need phi(a a*) = phi(a* a) > 0, got {} and {}",
                    k + 1,
                    format(&s),
                    format(&t)
                )));
            }
            if s.re.is_one() {
                marginals.insert(v, m);
                continue;
            }
            let root = rational_sqrt(&s.re).ok_or_else(|| {
                Error::Precondition(format!(
                    "factor {} variable x{v}: phi(a a*) = {} has no rational square root",
                    k + 1,
                    format(&s)
                ))
            })?;
            let c = root.recip();
            log.push(Rescaling {
                factor: k + 1,
                variable: v,
                second_moment: format(&s),
                scale: crate::scalar::rational_text(&c),
            });
            marginals.insert(v, Arc::new(ScaledMarginal { inner: m, c }));
            changed = true;
        }
        if changed {
            factors.push(Arc::new(MomentFunctional::Spectral(SpectralModel::new(
                marginals,
                model.is_free(),
            )?)));
        } else {
            factors.push(f.clone());
        }
    }
    Ok((
        TensorScenario::with_names(factors, scenario.names.clone(), scenario.bindings.clone())?,
        log,
    ))
}

/// Both evaluations of `phi(M(D_i) N(D_j) M(D_i)* N(D_j)*)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyReport {
    pub word: String,
    /// Product of the factor moments.
    #[serde(with = "crate::scalar::text")]
    pub tensor_value: Scalar,
    /// The two-variable closed form applied to the marginals of `D`.
    #[serde(with = "crate::scalar::text")]
    pub free_value: Scalar,
    /// Product over factors of the closed form on factor marginals.
    #[serde(with = "crate::scalar::text")]
    pub factorwise_value: Scalar,
    pub agree: bool,
}

fn two_moments(o: &dyn MomentOracle, m: &[Letter]) -> Result<TwoMoments> {
    let mut mm = m.to_vec();
    mm.extend(adjoint_letters(m));
    Ok(TwoMoments {
        mean: o.moment_letters(m)?,
        second: o.moment_letters(&mm)?,
    })
}

pub fn strategy_identity(
    scenario: &TensorScenario,
    i: VarId,
    j: VarId,
    m: &[bool],
    n: &[bool],
) -> Result<StrategyReport> {
    if i == j {
        return Err(Error::Precondition("the two indices must differ".into()));
    }
    let mi = instantiate(m, i);
    let nj = instantiate(n, j);
    let mut word = mi.clone();
    word.extend(&nj);
    word.extend(adjoint_letters(&mi));
    word.extend(adjoint_letters(&nj));
    let tensor_value = scenario.moment_letters(&word)?;
    let free_value = closed_form_2_1(&two_moments(scenario, &mi)?, &two_moments(scenario, &nj)?);
    let mut factorwise_value = one();
    for k in 0..scenario.num_factors() {
        let view = scenario.factor_view(k);
        factorwise_value *= closed_form_2_1(&two_moments(&view, &mi)?, &two_moments(&view, &nj)?);
    }
    Ok(StrategyReport {
        word: letters_text(&word),
        agree: tensor_value == free_value && tensor_value == factorwise_value,
        tensor_value,
        free_value,
        factorwise_value,
    })
}
