//! The polynomial identities and inequalities used in the main proof, as
//! exact checkers, plus extractors for the products their equality cases
//! force to vanish.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{rational_text, Rational};

/// Subsets are enumerated by bitmask.
pub const MAX_IDENTITY_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForcedProduct {
    /// 1-based indices the product is taken over.
    pub indices: Vec<usize>,
    pub value: String,
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConclusionCheck {
    pub name: &'static str,
    pub hypothesis_lhs: String,
    pub hypothesis_rhs: String,
    pub products: Vec<ForcedProduct>,
    pub all_zero: bool,
}

fn q(r: &Rational) -> String {
    rational_text(r)
}

fn product<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::one(), |a, b| a * b)
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Precondition("need at least one entry".into()));
    }
    if len > MAX_IDENTITY_LEN {
        return Err(Error::limit("identity vector length", len, MAX_IDENTITY_LEN));
    }
    Ok(())
}

fn same_len(a: &[Rational], b: &[Rational]) -> Result<()> {
    check_len(a.len())?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// Nonempty proper subsets of `0..k` as bitmasks, by size then mask.
fn proper_subsets(k: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (1..(1u32 << k) - 1).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

fn members(mask: u32, k: usize) -> impl Iterator<Item = usize> {
    (0..k).filter(move |i| mask >> i & 1 == 1)
}

fn in_range(v: &[Rational], lo: Option<&Rational>, hi: Option<&Rational>, what: &str) -> Result<()> {
    for (i, x) in v.iter().enumerate() {
        if lo.is_some_and(|l| x < l) || hi.is_some_and(|h| x > h) {
            return Err(Error::Precondition(format!(
                "{what}[{}] = {} is out of range",
                i + 1,
                q(x)
            )));
        }
    }
    Ok(())
}

/// `alpha Π(x_k - 1) = alpha Π x_k - alpha - Σ_{proper S} alpha Π_S (x_k - 1)`.
pub fn lemma_a1_check(alpha: &Rational, x: &[Rational]) -> Result<IdentityCheck> {
    check_len(x.len())?;
    let k = x.len();
    let one = Rational::one();
    let lhs = alpha * product(&x.iter().map(|v| v - &one).collect::<Vec<_>>());
    let mut rhs = alpha * product(x) - alpha;
    for m in proper_subsets(k) {
        rhs -= alpha * product(&members(m, k).map(|i| &x[i] - &one).collect::<Vec<_>>());
    }
    Ok(IdentityCheck {
        name: "A.1",
        equal: lhs == rhs,
        lhs: q(&lhs),
        rhs: q(&rhs),
    })
}

/// `Π(t_k x_k + 1 - t_k) = (alpha Π x_k + 1 - alpha)
///   + Σ_{proper S} (Π_S t - alpha)(Π_S (x - 1))` with `alpha = Π t_k`.
pub fn lemma_a2_check(t: &[Rational], x: &[Rational]) -> Result<IdentityCheck> {
    same_len(t, x)?;
    let (lhs, rhs) = a2_sides(t, x);
    Ok(IdentityCheck {
        name: "A.2",
        equal: lhs == rhs,
        lhs: q(&lhs),
        rhs: q(&rhs),
    })
}

fn a2_sides(t: &[Rational], x: &[Rational]) -> (Rational, Rational) {
    let one = Rational::one();
    let alpha = product(t);
    let lhs = product(&t.iter().zip(x).map(|(tk, xk)| tk * xk + &one - tk).collect::<Vec<_>>());
    let mut rhs = &alpha * product(x) + &one - &alpha;
    for (pt, px) in a3_terms(t, x) {
        rhs += (pt - &alpha) * px;
    }
    (lhs, rhs)
}

/// `(Π_S t, Π_S (x - 1))` for every proper nonempty `S`.
fn a3_terms(t: &[Rational], x: &[Rational]) -> Vec<(Rational, Rational)> {
    let k = t.len();
    let one = Rational::one();
    proper_subsets(k)
        .into_iter()
        .map(|m| {
            (
                product(&members(m, k).map(|i| t[i].clone()).collect::<Vec<_>>()),
                product(&members(m, k).map(|i| &x[i] - &one).collect::<Vec<_>>()),
            )
        })
        .collect()
}

/// Under `x_k >= 1`, `0 <= t_k <= 1` and `alpha Π x + 1 - alpha = Π(t x + 1 - t)`,
/// every `(Π_S t - alpha)(Π_S (x - 1))` vanishes.
pub fn prop_a3_conclusion(t: &[Rational], x: &[Rational]) -> Result<ConclusionCheck> {
    same_len(t, x)?;
    let one = Rational::one();
    let zero = Rational::zero();
    in_range(x, Some(&one), None, "x")?;
    in_range(t, Some(&zero), Some(&one), "t")?;
    let alpha = product(t);
    let hyp_lhs = &alpha * product(x) + &one - &alpha;
    let hyp_rhs = product(&t.iter().zip(x).map(|(tk, xk)| tk * xk + &one - tk).collect::<Vec<_>>());
    if hyp_lhs != hyp_rhs {
        return Err(Error::HypothesisNotMet(format!(
            "alpha Π x + 1 - alpha = {} but Π(t x + 1 - t) = {}",
            q(&hyp_lhs),
            q(&hyp_rhs)
        )));
    }
    let k = t.len();
    let products: Vec<ForcedProduct> = proper_subsets(k)
        .into_iter()
        .zip(a3_terms(t, x))
        .map(|(m, (pt, px))| {
            let v = (pt - &alpha) * px;
            ForcedProduct {
                indices: members(m, k).map(|i| i + 1).collect(),
                zero: v.is_zero(),
                value: q(&v),
            }
        })
        .collect();
    Ok(conclusion("A.3", hyp_lhs, hyp_rhs, products))
}

fn conclusion(name: &'static str, l: Rational, r: Rational, products: Vec<ForcedProduct>) -> ConclusionCheck {
    ConclusionCheck {
        name,
        hypothesis_lhs: q(&l),
        hypothesis_rhs: q(&r),
        all_zero: products.iter().all(|p| p.zero),
        products,
    }
}

fn a4_sides(x: &[Rational], y: &[Rational]) -> (Rational, Rational) {
    let one = Rational::one();
    let lhs = product(x) + product(y) - &one;
    let rhs = product(&x.iter().zip(y).map(|(a, b)| a + b - &one).collect::<Vec<_>>());
    (lhs, rhs)
}

/// `Π x + Π y - 1 <= Π(x + y - 1)` for entries `>= 1`.
pub fn lemma_a4_check(x: &[Rational], y: &[Rational]) -> Result<InequalityCheck> {
    same_len(x, y)?;
    let one = Rational::one();
    in_range(x, Some(&one), None, "x")?;
    in_range(y, Some(&one), None, "y")?;
    let (lhs, rhs) = a4_sides(x, y);
    Ok(InequalityCheck {
        name: "A.4",
        holds: lhs <= rhs,
        equality: lhs == rhs,
        lhs: q(&lhs),
        rhs: q(&rhs),
    })
}

fn cross_products(k: usize, f: impl Fn(usize, usize) -> Rational) -> Vec<ForcedProduct> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in (0..k).filter(|&b| b != a) {
            let v = f(a, b);
            out.push(ForcedProduct {
                indices: vec![a + 1, b + 1],
                zero: v.is_zero(),
                value: q(&v),
            });
        }
    }
    out
}

/// Equality in A.4 forces `(x_k - 1)(y_l - 1) = 0` for `k != l`.
pub fn prop_a5_conclusion(x: &[Rational], y: &[Rational]) -> Result<ConclusionCheck> {
    same_len(x, y)?;
    let one = Rational::one();
    in_range(x, Some(&one), None, "x")?;
    in_range(y, Some(&one), None, "y")?;
    let (lhs, rhs) = a4_sides(x, y);
    if lhs != rhs {
        return Err(Error::HypothesisNotMet(format!(
            "Π x + Π y - 1 = {} but Π(x + y - 1) = {}",
            q(&lhs),
            q(&rhs)
        )));
    }
    let products = cross_products(x.len(), |k, l| (&x[k] - &one) * (&y[l] - &one));
    Ok(conclusion("A.5", lhs, rhs, products))
}

fn a6_sides(x: &[Rational], y: &[Rational]) -> (Rational, Rational) {
    let xy: Vec<Rational> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let lhs = product(x) + product(y) - product(&xy);
    let rhs = product(&x.iter().zip(y).map(|(a, b)| a + b - a * b).collect::<Vec<_>>());
    (lhs, rhs)
}

/// `Π x + Π y - Π xy <= Π(x + y - xy)` for entries in `[0, 1]`.
pub fn lemma_a6_check(x: &[Rational], y: &[Rational]) -> Result<InequalityCheck> {
    same_len(x, y)?;
    let (zero, one) = (Rational::zero(), Rational::one());
    in_range(x, Some(&zero), Some(&one), "x")?;
    in_range(y, Some(&zero), Some(&one), "y")?;
    let (lhs, rhs) = a6_sides(x, y);
    Ok(InequalityCheck {
        name: "A.6",
        holds: lhs <= rhs,
        equality: lhs == rhs,
        lhs: q(&lhs),
        rhs: q(&rhs),
    })
}

/// Equality in A.6, with all `x` or all `y` positive, forces
/// `x_k y_l (1 - x_l)(1 - y_k) = 0` for `k != l`.
pub fn prop_a8_conclusion(x: &[Rational], y: &[Rational]) -> Result<ConclusionCheck> {
    same_len(x, y)?;
    let (zero, one) = (Rational::zero(), Rational::one());
    in_range(x, Some(&zero), Some(&one), "x")?;
    in_range(y, Some(&zero), Some(&one), "y")?;
    if !(x.iter().all(|v| *v > zero) || y.iter().all(|v| *v > zero)) {
        return Err(Error::Precondition("need all x positive or all y positive".into()));
    }
    let (lhs, rhs) = a6_sides(x, y);
    if lhs != rhs {
        return Err(Error::HypothesisNotMet(format!(
            "Π x + Π y - Π xy = {} but Π(x + y - xy) = {}",
            q(&lhs),
            q(&rhs)
        )));
    }
    let products = cross_products(x.len(), |k, l| &x[k] * &y[l] * (&one - &x[l]) * (&one - &y[k]));
    Ok(conclusion("A.8", lhs, rhs, products))
}

/// Any of the checks, for uniform reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum IdentityOutcome {
    Identity(IdentityCheck),
    Inequality(InequalityCheck),
    Conclusion(ConclusionCheck),
}

impl IdentityOutcome {
    /// The identity held, the inequality held, or all forced products vanished.
    pub fn passed(&self) -> bool {
        match self {
            IdentityOutcome::Identity(c) => c.equal,
            IdentityOutcome::Inequality(c) => c.holds,
            IdentityOutcome::Conclusion(c) => c.all_zero,
        }
    }
}
