//! Direct products of free products of cyclic groups: normal forms, element
//! orders, bounded freeness searches, projection kernels and the commutator
//! relation that breaks freeness in direct products.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::starwords::{PowerWord, VarId};

/// Order of a cyclic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CyclicOrder {
    Finite(u64),
    Infinite,
}

impl CyclicOrder {
    /// Representative of `exp` modulo the order: `1..n` for finite orders.
    fn normalize(self, exp: i64) -> i64 {
        match self {
            CyclicOrder::Finite(n) => exp.rem_euclid(n as i64),
            CyclicOrder::Infinite => exp,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OrderWire {
    Finite(u64),
    Text(String),
}

impl Serialize for CyclicOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CyclicOrder::Finite(n) => OrderWire::Finite(*n),
            CyclicOrder::Infinite => OrderWire::Text("inf".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CyclicOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match OrderWire::deserialize(d)? {
            OrderWire::Finite(n) if n >= 2 => Ok(CyclicOrder::Finite(n)),
            OrderWire::Finite(n) => Err(D::Error::custom(format!("cyclic order {n} must be at least 2"))),
            OrderWire::Text(t) if t == "inf" => Ok(CyclicOrder::Infinite),
            OrderWire::Text(t) => Err(D::Error::custom(format!("unknown cyclic order {t:?}"))),
        }
    }
}

/// One factor group: the free product of cyclic groups of the given orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeProduct {
    pub cyclic_orders: Vec<CyclicOrder>,
}

/// Direct product of free products of cyclic groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub factors: Vec<FreeProduct>,
}

/// Syllable `(generator, exponent)`, generator 0-based.
pub type Syllable = (usize, i64);

/// Per-factor normal forms. Adjacent syllables have distinct generators and
/// exponents are nonzero, reduced into `1..n` for finite orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElement {
    parts: Vec<Vec<Syllable>>,
}

impl GroupElement {
    pub fn parts(&self) -> &[Vec<Syllable>] {
        &self.parts
    }

    pub fn component(&self, k: usize) -> &[Syllable] {
        &self.parts[k]
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(Vec::is_empty)
    }

    /// The element of a direct product whose components are those of
    /// `elements`, in order.
    pub fn direct(elements: &[GroupElement]) -> Self {
        Self {
            parts: elements.iter().flat_map(|g| g.parts.iter().cloned()).collect(),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, part) in self.parts.iter().enumerate() {
            for &(g, e) in part {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "g{}.{}^{}", k + 1, g + 1, e)?;
            }
        }
        if first {
            f.write_str("e")?;
        }
        Ok(())
    }
}

/// Element order as far as the caller's bound is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderReport {
    Finite { order: u64 },
    ExceedsBound { bound: u64, certainly_infinite: bool },
}

/// Exact order of an element, `None` meaning infinite.
type ExactOrder = Option<u64>;

impl GroupPresentation {
    pub fn new(factors: Vec<FreeProduct>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidScenario("a group needs at least one factor".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.cyclic_orders.is_empty() {
                return Err(Error::InvalidScenario(format!("factor {} has no generators", k + 1)));
            }
            if f.cyclic_orders
                .iter()
                .any(|o| matches!(o, CyclicOrder::Finite(n) if *n < 2))
            {
                return Err(Error::InvalidScenario(format!("factor {} has an order below 2", k + 1)));
            }
        }
        Ok(Self { factors })
    }

    /// Direct product of presentations, factors kept in order.
    pub fn direct_product(groups: &[GroupPresentation]) -> Result<Self> {
        Self::new(groups.iter().flat_map(|g| g.factors.iter().cloned()).collect())
    }

    /// A single free product with the given orders.
    pub fn free_product(orders: &[CyclicOrder]) -> Self {
        Self {
            factors: vec![FreeProduct {
                cyclic_orders: orders.to_vec(),
            }],
        }
    }

    /// The free group on `n` generators.
    pub fn free_group(n: usize) -> Self {
        Self::free_product(&vec![CyclicOrder::Infinite; n])
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Presentation of factor `k` alone.
    pub fn factor(&self, k: usize) -> Self {
        Self {
            factors: vec![self.factors[k].clone()],
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            parts: vec![Vec::new(); self.factors.len()],
        }
    }

    fn order_of(&self, k: usize, g: usize) -> CyclicOrder {
        self.factors[k].cyclic_orders[g]
    }

    fn check_generator(&self, k: usize, g: usize) -> Result<()> {
        if k >= self.factors.len() || g >= self.factors[k].cyclic_orders.len() {
            return Err(Error::UnknownGenerator(format!("g{}.{}", k + 1, g + 1)));
        }
        Ok(())
    }

    /// `g<k>.<j>^exp`, both indices 0-based here.
    pub fn generator(&self, k: usize, g: usize, exp: i64) -> Result<GroupElement> {
        self.check_generator(k, g)?;
        let mut out = self.identity();
        self.push(k, &mut out.parts[k], (g, exp));
        Ok(out)
    }

    fn push(&self, k: usize, stack: &mut Vec<Syllable>, (g, exp): Syllable) {
        let order = self.order_of(k, g);
        match stack.last_mut() {
            Some(top) if top.0 == g => {
                let merged = order.normalize(top.1 + exp);
                if merged == 0 {
                    stack.pop();
                } else {
                    top.1 = merged;
                }
            }
            _ => {
                let e = order.normalize(exp);
                if e != 0 {
                    stack.push((g, e));
                }
            }
        }
    }

    /// Normal form of a product of generator powers `(factor, generator, exp)`.
    pub fn reduce(&self, tokens: &[(usize, usize, i64)]) -> Result<GroupElement> {
        let mut out = self.identity();
        for &(k, g, e) in tokens {
            self.check_generator(k, g)?;
            self.push(k, &mut out.parts[k], (g, e));
        }
        Ok(out)
    }

    /// Parses `g<k>.<j>^<exp>` tokens (1-based, `^exp` optional) or `e`.
    pub fn parse(&self, text: &str) -> Result<GroupElement> {
        let mut tokens = Vec::new();
        let mut offset = 0;
        for tok in text.split_whitespace() {
            let at = text[offset..].find(tok).map_or(offset, |p| p + offset);
            offset = at + tok.len();
            if tok == "e" {
                continue;
            }
            let bad = |m: &str| Error::Syntax {
                offset: at,
                message: format!("{m} in group token {tok:?}"),
            };
            let body = tok.strip_prefix('g').ok_or_else(|| bad("expected 'g'"))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad("bad exponent"))?),
                None => (body, 1),
            };
            let (k, j) = idx.split_once('.').ok_or_else(|| bad("expected '<k>.<j>'"))?;
            let k: usize = k.parse().map_err(|_| bad("bad factor index"))?;
            let j: usize = j.parse().map_err(|_| bad("bad generator index"))?;
            if k == 0 || j == 0 {
                return Err(Error::UnknownGenerator(tok.to_string()));
            }
            tokens.push((k - 1, j - 1, exp));
        }
        self.reduce(&tokens)
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut out = a.clone();
        for (k, part) in b.parts.iter().enumerate() {
            for &s in part {
                self.push(k, &mut out.parts[k], s);
            }
        }
        out
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        let mut out = self.identity();
        for (k, part) in a.parts.iter().enumerate() {
            for &(g, e) in part.iter().rev() {
                self.push(k, &mut out.parts[k], (g, -e));
            }
        }
        out
    }

    pub fn pow(&self, a: &GroupElement, n: i64) -> GroupElement {
        let base = if n < 0 { self.inverse(a) } else { a.clone() };
        let mut acc = self.identity();
        let mut sq = base;
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = self.multiply(&acc, &sq);
            }
            m >>= 1;
            if m > 0 {
                sq = self.multiply(&sq, &sq);
            }
        }
        acc
    }

    /// Product of `elements[v - 1]^e` over a power word.
    pub fn evaluate(&self, elements: &[GroupElement], word: &PowerWord) -> Result<GroupElement> {
        let mut acc = self.identity();
        for &(v, e) in word.factors() {
            let g = elements
                .get((v as usize).wrapping_sub(1))
                .ok_or(Error::UnknownVariable(v))?;
            acc = self.multiply(&acc, &self.pow(g, e));
        }
        Ok(acc)
    }

    fn component_order(&self, k: usize, word: &[Syllable]) -> ExactOrder {
        // a cyclically reduced word of two or more syllables has infinite order
        let mut c: Vec<Syllable> = word.to_vec();
        while c.len() >= 2 && c[0].0 == c[c.len() - 1].0 {
            let (g, e) = c.pop().unwrap();
            let merged = self.order_of(k, g).normalize(c[0].1 + e);
            if merged == 0 {
                c.remove(0);
            } else {
                c[0].1 = merged;
            }
        }
        match c.as_slice() {
            [] => Some(1),
            [(g, e)] => match self.order_of(k, *g) {
                CyclicOrder::Finite(n) => Some(n / n.gcd(&e.unsigned_abs())),
                CyclicOrder::Infinite => None,
            },
            _ => None,
        }
    }

    /// Exact order: lcm of the componentwise orders, `None` for infinite.
    pub fn exact_order(&self, g: &GroupElement) -> ExactOrder {
        let mut acc = 1u64;
        for (k, part) in g.parts.iter().enumerate() {
            acc = acc.lcm(&self.component_order(k, part)?);
        }
        Some(acc)
    }

    pub fn element_order(&self, g: &GroupElement, bound: u64) -> OrderReport {
        match self.exact_order(g) {
            Some(n) if n <= bound => OrderReport::Finite { order: n },
            Some(_) => OrderReport::ExceedsBound {
                bound,
                certainly_infinite: false,
            },
            None => OrderReport::ExceedsBound {
                bound,
                certainly_infinite: true,
            },
        }
    }

    pub fn project(&self, g: &GroupElement, k: usize) -> GroupElement {
        GroupElement {
            parts: vec![g.parts[k].clone()],
        }
    }
}

/// Bounds for searches over alternating products `g_{i(1)}^{n(1)} ... g_{i(t)}^{n(t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_blocks: usize,
    pub max_exp: u32,
    /// Optional cap on `sum |n(l)|`.
    pub max_weight: Option<usize>,
}

impl SearchBounds {
    pub fn new(max_blocks: usize, max_exp: u32) -> Self {
        Self {
            max_blocks,
            max_exp,
            max_weight: None,
        }
    }

    fn weight_cap(&self) -> usize {
        let full = self.max_blocks * self.max_exp as usize;
        self.max_weight.map_or(full, |w| w.min(full))
    }
}

/// Exponents in search order `1, -1, 2, -2, ...`.
fn exponent_order(max_exp: u32) -> Vec<i64> {
    (1..=max_exp as i64).flat_map(|e| [e, -e]).collect()
}

/// Outcome of a bounded group-level search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupVerdict {
    pub free: bool,
    /// Alternating product that reduces to the identity, over `x1, x2, ...`.
    pub witness: Option<String>,
    #[serde(skip)]
    pub witness_word: Option<PowerWord>,
    pub bounds: SearchBounds,
}

/// Visits alternating products in order of block count, then weight, then
/// lexicographically, stopping at the first one `accept` takes.
///
/// Blocks with `g^n = e` are skipped when `skip_trivial_blocks` is set.
fn search_alternating<F>(
    pres: &GroupPresentation,
    elements: &[GroupElement],
    bounds: SearchBounds,
    skip_trivial_blocks: bool,
    mut accept: F,
) -> Option<PowerWord>
where
    F: FnMut(&[(VarId, i64)], &GroupElement) -> bool,
{
    let exps = exponent_order(bounds.max_exp);
    // powers[i][r] = elements[i]^exps[r]
    let powers: Vec<Vec<GroupElement>> = elements
        .iter()
        .map(|g| exps.iter().map(|&e| pres.pow(g, e)).collect())
        .collect();

    struct Ctx<'a, F> {
        pres: &'a GroupPresentation,
        powers: &'a [Vec<GroupElement>],
        exps: &'a [i64],
        skip: bool,
        accept: F,
        found: Option<Vec<(VarId, i64)>>,
    }

    fn dfs<F: FnMut(&[(VarId, i64)], &GroupElement) -> bool>(
        ctx: &mut Ctx<'_, F>,
        prefix: &mut Vec<(VarId, i64)>,
        value: &GroupElement,
        blocks_left: usize,
        weight_left: usize,
    ) {
        if ctx.found.is_some() {
            return;
        }
        if blocks_left == 0 {
            if weight_left == 0 && (ctx.accept)(prefix, value) {
                ctx.found = Some(prefix.clone());
            }
            return;
        }
        // every remaining block needs weight at least 1
        if weight_left < blocks_left {
            return;
        }
        let last = prefix.last().map(|&(v, _)| v);
        for i in 0..ctx.powers.len() {
            let v = i as VarId + 1;
            if Some(v) == last {
                continue;
            }
            for (r, &e) in ctx.exps.iter().enumerate() {
                let w = e.unsigned_abs() as usize;
                if w > weight_left {
                    continue;
                }
                let block = &ctx.powers[i][r];
                if ctx.skip && block.is_identity() {
                    continue;
                }
                let next = ctx.pres.multiply(value, block);
                prefix.push((v, e));
                dfs(ctx, prefix, &next, blocks_left - 1, weight_left - w);
                prefix.pop();
                if ctx.found.is_some() {
                    return;
                }
            }
        }
    }

    let mut ctx = Ctx {
        pres,
        powers: &powers,
        exps: &exps,
        skip: skip_trivial_blocks,
        accept: &mut accept,
        found: None,
    };
    let cap = bounds.weight_cap();
    for t in 1..=bounds.max_blocks {
        for w in t..=cap {
            dfs(&mut ctx, &mut Vec::new(), &pres.identity(), t, w);
            if let Some(found) = ctx.found.take() {
                return Some(PowerWord::from_factors(found));
            }
        }
    }
    None
}

/// Bounded freeness test: no alternating product of non-identity powers
/// reduces to the identity.
pub fn is_free_collection(
    pres: &GroupPresentation,
    elements: &[GroupElement],
    bounds: SearchBounds,
) -> Result<GroupVerdict> {
    if let Some(p) = elements.iter().position(GroupElement::is_identity) {
        return Err(Error::Precondition(format!("element x{} is the identity", p + 1)));
    }
    let witness = search_alternating(pres, elements, bounds, true, |_, g| g.is_identity());
    Ok(GroupVerdict {
        free: witness.is_none(),
        witness: witness.as_ref().map(|w| w.to_string()),
        witness_word: witness,
        bounds,
    })
}

/// Result of building the commutator relation for a pair `(D_i, D_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutatorReport {
    pub word: String,
    pub reduces_to_identity: bool,
    pub blocks_nontrivial: bool,
    #[serde(skip)]
    pub power_word: PowerWord,
}

/// `D_i^m D_j D_i^n D_j^-1 D_i^-m D_j D_i^-n D_j^-1` for `K = 2`, under
/// `g_{1;i}^m = e != g_{2;i}^m` and `g_{1;i}^n != e = g_{2;i}^n`.
pub fn commutator_witness(
    pres: &GroupPresentation,
    elements: &[GroupElement],
    i: usize,
    j: usize,
    m: i64,
    n: i64,
) -> Result<CommutatorReport> {
    if pres.num_factors() != 2 {
        return Err(Error::Precondition(
            "the commutator relation needs exactly two factors".into(),
        ));
    }
    if i == j {
        return Err(Error::Precondition("the two indices must be distinct".into()));
    }
    let di = elements.get(i).ok_or(Error::UnknownVariable(i as VarId + 1))?;
    let dj = elements.get(j).ok_or(Error::UnknownVariable(j as VarId + 1))?;
    let dim = pres.pow(di, m);
    let din = pres.pow(di, n);
    let (a1, a2) = (dim.component(0).is_empty(), dim.component(1).is_empty());
    let (b1, b2) = (din.component(0).is_empty(), din.component(1).is_empty());
    if !(a1 && !a2 && !b1 && b2) {
        return Err(Error::HypothesisNotMet(format!(
            "need g1^{m} = e != g2^{m} and g1^{n} != e = g2^{n} for x{}",
            i + 1
        )));
    }
    let (vi, vj) = (i as VarId + 1, j as VarId + 1);
    let factors = vec![
        (vi, m),
        (vj, 1),
        (vi, n),
        (vj, -1),
        (vi, -m),
        (vj, 1),
        (vi, -n),
        (vj, -1),
    ];
    let blocks_nontrivial = !dim.is_identity() && !din.is_identity() && !dj.is_identity();
    let mut acc = pres.identity();
    for &(v, e) in &factors {
        let g = if v == vi { di } else { dj };
        acc = pres.multiply(&acc, &pres.pow(g, e));
    }
    let power_word = PowerWord::from_factors(factors.clone());
    Ok(CommutatorReport {
        word: factors
            .iter()
            .map(|(v, e)| format!("x{v}^{e}"))
            .collect::<Vec<_>>()
            .join(" "),
        reduces_to_identity: acc.is_identity(),
        blocks_nontrivial,
        power_word,
    })
}

/// Bounded search for the kernel of the projection onto factor `k`,
/// restricted to the subgroup generated by `elements`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub factor: usize,
    pub trivial_within_bounds: bool,
    pub witness: Option<String>,
    pub element: Option<String>,
    pub bounds: SearchBounds,
}

pub fn projection_kernel_trivial(
    pres: &GroupPresentation,
    elements: &[GroupElement],
    k: usize,
    bounds: SearchBounds,
) -> Result<KernelReport> {
    if k >= pres.num_factors() {
        return Err(Error::Precondition(format!("no factor {}", k + 1)));
    }
    let mut element = None;
    let witness = search_alternating(pres, elements, bounds, false, |_, g| {
        let hit = !g.is_identity() && g.component(k).is_empty();
        if hit {
            element = Some(g.clone());
        }
        hit
    });
    Ok(KernelReport {
        factor: k + 1,
        trivial_within_bounds: witness.is_none(),
        witness: witness.map(|w| w.to_string()),
        element: element.map(|g| g.to_string()),
        bounds,
    })
}

/// Every distinct kernel element of `pi_k` reachable within bounds, up to `limit`.
pub fn kernel_elements(
    pres: &GroupPresentation,
    elements: &[GroupElement],
    k: usize,
    bounds: SearchBounds,
    limit: usize,
) -> Vec<GroupElement> {
    let mut found: Vec<GroupElement> = Vec::new();
    search_alternating(pres, elements, bounds, false, |_, g| {
        if !g.is_identity() && g.component(k).is_empty() && !found.contains(g) {
            found.push(g.clone());
        }
        found.len() >= limit
    });
    found
}

/// Per-factor part of the bounded conclusion check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorConclusion {
    pub factor: usize,
    pub free: bool,
    pub witness: Option<String>,
    /// First `(x_i, n)` with `D_i^n != e` but `g_{k;i}^n = e`.
    pub order_violation: Option<(VarId, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prop16Report {
    pub collection_free: bool,
    pub collection_witness: Option<String>,
    pub factors: Vec<FactorConclusion>,
    /// Smallest factor meeting both conclusions.
    pub dominating: Option<usize>,
    /// The collection passed but no factor did: points at a bug.
    pub implementation_suspect: bool,
    pub bounds: SearchBounds,
}

pub fn prop_1_6_instance(
    pres: &GroupPresentation,
    elements: &[GroupElement],
    bounds: SearchBounds,
) -> Result<Prop16Report> {
    let verdict = is_free_collection(pres, elements, bounds)?;
    let mut report = Prop16Report {
        collection_free: verdict.free,
        collection_witness: verdict.witness,
        factors: Vec::new(),
        dominating: None,
        implementation_suspect: false,
        bounds,
    };
    if !verdict.free {
        return Ok(report);
    }
    for k in 0..pres.num_factors() {
        let sub = pres.factor(k);
        let comps: Vec<GroupElement> = elements.iter().map(|g| pres.project(g, k)).collect();
        let mut order_violation = None;
        'outer: for (i, g) in elements.iter().enumerate() {
            for n in 1..=bounds.max_exp {
                if !pres.pow(g, n as i64).is_identity() && sub.pow(&comps[i], n as i64).is_identity() {
                    order_violation = Some((i as VarId + 1, n));
                    break 'outer;
                }
            }
        }
        let (free, witness) = if comps.iter().any(GroupElement::is_identity) {
            (false, None)
        } else {
            let v = is_free_collection(&sub, &comps, bounds)?;
            (v.free, v.witness)
        };
        if free && order_violation.is_none() && report.dominating.is_none() {
            report.dominating = Some(k + 1);
        }
        report.factors.push(FactorConclusion {
            factor: k + 1,
            free,
            witness,
            order_violation,
        });
    }
    report.implementation_suspect = report.dominating.is_none();
    Ok(report)
}
