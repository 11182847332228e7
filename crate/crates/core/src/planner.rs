//! Existence decisions and construction plans.
//!
//! A [`ConstructionPlan`] is a tree of construction steps. Plans print in a
//! nested text form `NODE(arg, ...)` and parse back from it, e.g.
//! `Combine(Combine(Seed(omzd,5),Seed(omzd,4)),Seed(omzd,4))`.

use std::fmt;

use thiserror::Error;

use crate::construct::{self, Branch, ConstructError, SeedKey, MAX_ORDER};
use crate::gfield::{odd_prime_power, prime_power};
use crate::numerics::RealMatrix;
use crate::verify::{self, check_drt, Claim, DrtVerdict, IntMatrix, OrthoCertificate};

/// Object families the existence tables cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Omzd,
    SymmetricOmzd,
    Ompzd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceVerdict {
    pub exists: bool,
    /// Short name of the result that decides the question.
    pub theorem: &'static str,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("k = {k} is out of range for order {n}")]
    InvalidK { n: usize, k: usize },
    #[error("order must be at least 1")]
    InvalidOrder,
    #[error("nonexistent target: {0}")]
    NonexistentTarget(String),
    #[error("malformed plan: {0}")]
    Malformed(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("certification failed at {node}: {details}")]
    CertificationFailed { node: String, details: String },
}

const EXCEPTIONAL_OMPZD: [(usize, usize); 4] = [(1, 1), (2, 1), (3, 2), (3, 3)];

/// Closed-form existence tables.
pub fn exists(kind: Kind, n: usize, k: Option<usize>) -> Result<ExistenceVerdict, PlanError> {
    if n == 0 {
        return Err(PlanError::InvalidOrder);
    }
    let v = |exists, theorem, statement: &str| ExistenceVerdict {
        exists,
        theorem,
        statement: statement.to_string(),
    };
    Ok(match kind {
        Kind::Omzd => {
            if n == 1 || n == 3 {
                v(false, "omzd-existence", "Theorem: no OMZD(1) or OMZD(3)")
            } else {
                v(
                    true,
                    "omzd-existence",
                    "Theorem: an OMZD(n) exists for every n other than 1 and 3",
                )
            }
        }
        Kind::SymmetricOmzd => {
            if n % 2 == 1 {
                v(
                    false,
                    "symmetric-existence",
                    "Theorem: a symmetric OMZD(n) requires n even",
                )
            } else if n == 4 {
                v(
                    false,
                    "symmetric-order-four",
                    "Proposition: a symmetric OMZD(4) does not exist",
                )
            } else {
                v(
                    true,
                    "symmetric-existence",
                    "Theorem: a symmetric OMZD(n) exists for even n other than 4",
                )
            }
        }
        Kind::Ompzd => {
            let k = k.unwrap_or(n);
            if k > n {
                return Err(PlanError::InvalidK { n, k });
            }
            if EXCEPTIONAL_OMPZD.contains(&(n, k)) {
                v(
                    false,
                    "ompzd-existence",
                    "Theorem: no OMPZD(n,k) for (n,k) in {(1,1),(2,1),(3,2),(3,3)}",
                )
            } else {
                v(
                    true,
                    "ompzd-existence",
                    "Theorem: an OMPZD(n,k) exists unless (n,k) is (1,1), (2,1), (3,2) or (3,3)",
                )
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    #[default]
    Auto,
    PreferDrt,
    PreferRecursive,
}

impl std::str::FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Route::Auto),
            "prefer-drt" | "prefer_drt" => Ok(Route::PreferDrt),
            "prefer-recursive" | "prefer_recursive" => Ok(Route::PreferRecursive),
            _ => Err(format!("unknown route {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanOptions {
    pub route: Route,
    pub branch: Branch,
}

/// What a plan node produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Product {
    Omzd(usize),
    SymmetricOmzd(usize),
    Ompzd(usize, usize),
    NowhereZero(usize),
    Conference(usize),
    Drt(usize),
    SkewHadamard(usize),
    /// Symmetric orthogonal matrix with zero diagonal blocks of size `block`.
    Multipartite {
        order: usize,
        block: usize,
    },
}

impl Product {
    pub fn order(&self) -> usize {
        match *self {
            Product::Omzd(n)
            | Product::SymmetricOmzd(n)
            | Product::Ompzd(n, _)
            | Product::NowhereZero(n)
            | Product::Conference(n)
            | Product::Drt(n)
            | Product::SkewHadamard(n) => n,
            Product::Multipartite { order, .. } => order,
        }
    }

    /// Diagonal zero count for the OMPZD-like products.
    pub fn diagonal_zeros(&self) -> Option<usize> {
        match *self {
            Product::Omzd(n) | Product::SymmetricOmzd(n) | Product::Conference(n) => Some(n),
            Product::Ompzd(_, k) => Some(k),
            Product::NowhereZero(_) => Some(0),
            _ => None,
        }
    }

    pub fn is_omzd(&self) -> bool {
        matches!(
            self,
            Product::Omzd(_) | Product::SymmetricOmzd(_) | Product::Conference(_)
        )
    }

    /// Certificate claim, or `None` for tournaments.
    pub fn claim(&self) -> Option<Claim> {
        Some(match *self {
            Product::Omzd(_) => Claim::Omzd,
            Product::SymmetricOmzd(_) => Claim::SymmetricOmzd,
            Product::Ompzd(_, k) => Claim::Ompzd(k),
            Product::NowhereZero(_) => Claim::NowhereZeroOrthogonal,
            Product::Conference(_) => Claim::Conference,
            Product::SkewHadamard(_) => Claim::SkewHadamard,
            Product::Multipartite { block, .. } => Claim::BlockZeroDiagonal { block },
            Product::Drt(_) => return None,
        })
    }

    /// Lower-case family name used in file metadata.
    pub fn family(&self) -> &'static str {
        match self {
            Product::Omzd(_) => "omzd",
            Product::SymmetricOmzd(_) => "symmetric-omzd",
            Product::Ompzd(..) => "ompzd",
            Product::NowhereZero(_) => "nowhere-zero",
            Product::Conference(_) => "conference",
            Product::Drt(_) => "drt",
            Product::SkewHadamard(_) => "skew-hadamard",
            Product::Multipartite { .. } => "multipartite",
        }
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Product::Omzd(n) => write!(f, "OMZD({n})"),
            Product::SymmetricOmzd(n) => write!(f, "symmetric OMZD({n})"),
            Product::Ompzd(n, k) => write!(f, "OMPZD({n},{k})"),
            Product::NowhereZero(n) => write!(f, "nowhere-zero orthogonal({n})"),
            Product::Conference(n) => write!(f, "conference({n})"),
            Product::Drt(n) => write!(f, "DRT({n})"),
            Product::SkewHadamard(n) => write!(f, "skew-Hadamard({n})"),
            Product::Multipartite { order, block } => {
                write!(f, "multipartite({} parts of {block})", order / block.max(1))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Seed(SeedKey),
    Paley(u64),
    Combine(Box<PlanNode>, Box<PlanNode>),
    Symmetric(usize),
    PaleyDrt(u64),
    Double(Box<PlanNode>),
    SkewHadamard(Box<PlanNode>),
    OmzdFromDrt(Box<PlanNode>, Branch),
    ReduceZeros(Box<PlanNode>, usize),
    OmpzdNm1(usize),
    NowhereZero(usize),
    Kron(Box<PlanNode>, Box<PlanNode>),
}

/// A plan step annotated with its expected output and the result it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    pub step: Step,
    pub output: Product,
    pub theorem: &'static str,
}

fn malformed(msg: impl Into<String>) -> PlanError {
    PlanError::Malformed(msg.into())
}

fn bounded(n: usize) -> Result<usize, PlanError> {
    if n == 0 || n > MAX_ORDER {
        Err(malformed(format!("order {n} outside 1..={MAX_ORDER}")))
    } else {
        Ok(n)
    }
}

fn drt_order(child: &PlanNode) -> Result<usize, PlanError> {
    match child.output {
        Product::Drt(q) => Ok(q),
        other => Err(malformed(format!("expected a DRT child, found {other}"))),
    }
}

impl PlanNode {
    /// Annotates a step, checking arities and expected orders.
    pub fn new(step: Step) -> Result<Self, PlanError> {
        let (output, theorem) = match &step {
            Step::Seed(key) => {
                if !key.in_catalog() {
                    return Err(malformed(format!("no catalog seed {key}")));
                }
                let out = match *key {
                    SeedKey::Omzd(n @ (2 | 6)) => Product::SymmetricOmzd(n),
                    SeedKey::Omzd(n) => Product::Omzd(n),
                    SeedKey::Ompzd(n, k) => Product::Ompzd(n, k),
                };
                (out, "catalog")
            }
            Step::Paley(q) => {
                let q = *q;
                if q as u128 + 1 > MAX_ORDER as u128 || odd_prime_power(q).is_none() {
                    return Err(malformed(format!(
                        "Paley needs an odd prime power q, got {q}"
                    )));
                }
                (Product::Conference(q as usize + 1), "paley-conference")
            }
            Step::Combine(a, b) => {
                if !a.output.is_omzd() || !b.output.is_omzd() {
                    return Err(malformed("Combine children must be OMZDs"));
                }
                let (m, n) = (a.output.order(), b.output.order());
                if m < 4 || n < 4 {
                    return Err(malformed("Combine children must have order at least 4"));
                }
                (Product::Omzd(bounded(m + n - 2)?), "core-combination")
            }
            Step::Symmetric(n) => {
                let n = bounded(*n)?;
                if n % 2 == 1 || n == 4 {
                    return Err(malformed(format!("no symmetric OMZD({n})")));
                }
                (Product::SymmetricOmzd(n), "symmetric-block")
            }
            Step::PaleyDrt(q) => {
                let q = *q;
                if q > MAX_ORDER as u64 || q % 4 != 3 || prime_power(q).is_none() {
                    return Err(malformed(format!(
                        "Paley tournament needs a prime power q ≡ 3 mod 4, got {q}"
                    )));
                }
                (Product::Drt(q as usize), "paley-tournament")
            }
            Step::Double(c) => (
                Product::Drt(bounded(2 * drt_order(c)? + 1)?),
                "drt-doubling",
            ),
            Step::SkewHadamard(c) => (
                Product::SkewHadamard(bounded(drt_order(c)? + 1)?),
                "drt-skew-hadamard",
            ),
            Step::OmzdFromDrt(c, _) => {
                let q = drt_order(c)?;
                if q < 7 {
                    return Err(malformed("OmzdFromDrt needs a DRT of order at least 7"));
                }
                (Product::Omzd(q), "drt-omzd")
            }
            Step::ReduceZeros(c, k) => {
                let n = c.output.order();
                let j = c
                    .output
                    .diagonal_zeros()
                    .ok_or_else(|| malformed("ReduceZeros child must be an OMPZD"))?;
                let k = *k;
                if n < 4 || k > j || (k < j && k > n - 2) {
                    return Err(malformed(format!(
                        "ReduceZeros cannot take OMPZD({n},{j}) to k = {k}"
                    )));
                }
                (Product::Ompzd(n, k), "rotation")
            }
            Step::OmpzdNm1(n) => {
                let n = bounded(*n)?;
                if n == 2 || n == 3 {
                    return Err(malformed(format!("no OMPZD({n},{})", n - 1)));
                }
                (Product::Ompzd(n, n - 1), "n-minus-one")
            }
            Step::NowhereZero(n) => (Product::NowhereZero(bounded(*n)?), "nowhere-zero"),
            Step::Kron(a, b) => {
                let (Product::SymmetricOmzd(m), Product::NowhereZero(n)) = (a.output, b.output)
                else {
                    return Err(malformed(
                        "Kron needs a symmetric OMZD and a nowhere-zero matrix",
                    ));
                };
                let order = m
                    .checked_mul(n)
                    .filter(|&o| o <= MAX_ORDER)
                    .ok_or_else(|| malformed("Kron order too large"))?;
                (Product::Multipartite { order, block: n }, "kronecker")
            }
        };
        Ok(PlanNode {
            step,
            output,
            theorem,
        })
    }

    pub fn children(&self) -> Vec<&PlanNode> {
        match &self.step {
            Step::Combine(a, b) | Step::Kron(a, b) => vec![a, b],
            Step::Double(c)
            | Step::SkewHadamard(c)
            | Step::OmzdFromDrt(c, _)
            | Step::ReduceZeros(c, _) => {
                vec![c]
            }
            _ => Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

fn node(step: Step) -> PlanNode {
    PlanNode::new(step).expect("planner emits well-formed steps")
}

fn boxed(step: Step) -> Box<PlanNode> {
    Box::new(node(step))
}

impl fmt::Display for PlanNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.step {
            Step::Seed(SeedKey::Omzd(n)) => write!(f, "Seed(omzd,{n})"),
            Step::Seed(SeedKey::Ompzd(n, k)) => write!(f, "Seed(ompzd,{n},{k})"),
            Step::Paley(q) => write!(f, "Paley({q})"),
            Step::Combine(a, b) => write!(f, "Combine({a},{b})"),
            Step::Symmetric(n) => write!(f, "Symmetric({n})"),
            Step::PaleyDrt(q) => write!(f, "PaleyDRT({q})"),
            Step::Double(c) => write!(f, "Double({c})"),
            Step::SkewHadamard(c) => write!(f, "SkewHadamard({c})"),
            Step::OmzdFromDrt(c, b) => write!(f, "OmzdFromDrt({c},{b})"),
            Step::ReduceZeros(c, k) => write!(f, "ReduceZeros({c},{k})"),
            Step::OmpzdNm1(n) => write!(f, "OmpzdNm1({n})"),
            Step::NowhereZero(n) => write!(f, "NowhereZero({n})"),
            Step::Kron(a, b) => write!(f, "Kron({a},{b})"),
        }
    }
}

/// A plan plus the claim its final output is certified against.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionPlan {
    pub root: PlanNode,
    pub target: Product,
}

impl ConstructionPlan {
    pub fn new(root: PlanNode) -> Self {
        let target = root.output;
        ConstructionPlan { root, target }
    }

    fn with_target(root: PlanNode, target: Product) -> Self {
        ConstructionPlan { root, target }
    }

    pub fn parse(text: &str) -> Result<Self, PlanError> {
        Ok(ConstructionPlan::new(parse_plan(text)?))
    }
}

impl fmt::Display for ConstructionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn omzd_plan(n: usize, opts: PlanOptions) -> PlanNode {
    if opts.route == Route::PreferDrt && n % 2 == 1 {
        if let Some(p) = drt_route(n, opts.branch) {
            return p;
        }
    }
    match (n, opts.route) {
        (2 | 4 | 5 | 6 | 7, Route::PreferRecursive) | (2 | 4 | 5 | 7, _) => {
            node(Step::Seed(SeedKey::Omzd(n)))
        }
        (_, Route::PreferRecursive) => node(Step::Combine(
            Box::new(omzd_plan(n - 2, opts)),
            boxed(Step::Seed(SeedKey::Omzd(4))),
        )),
        _ if n.is_multiple_of(2) => node(Step::Symmetric(n)),
        _ => node(Step::Combine(
            Box::new(omzd_plan(n - 2, opts)),
            boxed(Step::Seed(SeedKey::Omzd(4))),
        )),
    }
}

/// `OmzdFromDrt(Double^t(PaleyDRT(q)))` for `n = 2^t (q+1) - 1`, smallest `t`.
fn drt_route(n: usize, branch: Branch) -> Option<PlanNode> {
    let (q, t) = drt_decomposition(n, 7)?;
    let drt = doubled_paley_drt(q, t);
    Some(node(Step::OmzdFromDrt(Box::new(drt), branch)))
}

/// Finds `(q, t)` with `n = 2^t (q+1) - 1` and `q ≥ min_q` a prime power
/// `≡ 3 mod 4`, preferring the smallest `t`.
pub fn drt_decomposition(n: usize, min_q: usize) -> Option<(usize, u32)> {
    let mut t = 0;
    let mut m = n + 1;
    while m.is_multiple_of(2) {
        let q = m - 1;
        if q >= min_q && q % 4 == 3 && prime_power(q as u64).is_some() {
            return Some((q, t));
        }
        m /= 2;
        t += 1;
    }
    None
}

fn doubled_paley_drt(q: usize, t: u32) -> PlanNode {
    let mut p = node(Step::PaleyDrt(q as u64));
    for _ in 0..t {
        p = node(Step::Double(Box::new(p)));
    }
    p
}

/// Deterministic plan for an object whose existence verdict is positive.
pub fn plan(
    kind: Kind,
    n: usize,
    k: Option<usize>,
    opts: PlanOptions,
) -> Result<ConstructionPlan, PlanError> {
    let verdict = exists(kind, n, k)?;
    if !verdict.exists {
        return Err(PlanError::NonexistentTarget(verdict.statement));
    }
    if n > MAX_ORDER {
        return Err(malformed(format!("order {n} exceeds {MAX_ORDER}")));
    }
    Ok(match kind {
        Kind::Omzd => ConstructionPlan::new(omzd_plan(n, opts)),
        Kind::SymmetricOmzd => {
            let root = if n == 2 {
                node(Step::Seed(SeedKey::Omzd(2)))
            } else {
                node(Step::Symmetric(n))
            };
            ConstructionPlan::with_target(root, Product::SymmetricOmzd(n))
        }
        Kind::Ompzd => {
            let k = k.unwrap_or(n);
            let root = match (n, k) {
                _ if k == n => omzd_plan(n, opts),
                (_, 0) => node(Step::NowhereZero(n)),
                (3, 1) => node(Step::Seed(SeedKey::Ompzd(3, 1))),
                (4, 3) | (5, 4) => node(Step::Seed(SeedKey::Ompzd(n, k))),
                _ if k == n - 1 => node(Step::OmpzdNm1(n)),
                _ => node(Step::ReduceZeros(Box::new(omzd_plan(n, opts)), k)),
            };
            ConstructionPlan::with_target(root, Product::Ompzd(n, k))
        }
    })
}

/// Conference matrix of order `n`: the order-2 seed or a Paley matrix.
pub fn plan_conference(n: usize) -> Result<ConstructionPlan, PlanError> {
    if n == 2 {
        return Ok(ConstructionPlan::with_target(
            node(Step::Seed(SeedKey::Omzd(2))),
            Product::Conference(2),
        ));
    }
    if n >= 4 && odd_prime_power(n as u64 - 1).is_some() {
        return Ok(ConstructionPlan::new(PlanNode::new(Step::Paley(
            n as u64 - 1,
        ))?));
    }
    let mut msg = format!("no Paley construction for a conference matrix of order {n}");
    if n % 2 == 1 {
        msg.push_str("; conference matrices have even order");
    } else if n % 4 == 2 {
        msg.push_str("; note that a symmetric conference matrix of this order needs n - 1 to be a sum of two squares");
    }
    Err(PlanError::NonexistentTarget(msg))
}

/// DRT of order `n` from Paley tournaments and doubling.
pub fn plan_drt(n: usize) -> Result<ConstructionPlan, PlanError> {
    if n > MAX_ORDER {
        return Err(malformed(format!("order {n} exceeds {MAX_ORDER}")));
    }
    let (q, t) = drt_decomposition(n, 3).ok_or_else(|| {
        PlanError::NonexistentTarget(format!(
            "order {n} is not of the form 2^t(q+1)-1 with q a prime power ≡ 3 mod 4"
        ))
    })?;
    Ok(ConstructionPlan::new(doubled_paley_drt(q, t)))
}

/// DRT obtained by doubling the Paley tournament on GF(q) `t` times.
pub fn plan_drt_doubling(q: u64, t: u32) -> Result<ConstructionPlan, PlanError> {
    let mut p = PlanNode::new(Step::PaleyDrt(q))?;
    for _ in 0..t {
        p = PlanNode::new(Step::Double(Box::new(p)))?;
    }
    Ok(ConstructionPlan::new(p))
}

/// Skew-Hadamard matrix of order `n` bordered from a DRT(n-1).
pub fn plan_skew_hadamard(n: usize) -> Result<ConstructionPlan, PlanError> {
    let drt = plan_drt(n.checked_sub(1).ok_or(PlanError::InvalidOrder)?)?;
    Ok(ConstructionPlan::new(PlanNode::new(Step::SkewHadamard(
        Box::new(drt.root),
    ))?))
}

/// `A ⊗ B` for the complete multipartite graph with `parts` parts of size `part`.
pub fn plan_multipartite(part: usize, parts: usize) -> Result<ConstructionPlan, PlanError> {
    if part == 0 {
        return Err(PlanError::InvalidOrder);
    }
    let sym = plan(Kind::SymmetricOmzd, parts, None, PlanOptions::default())?;
    let b = PlanNode::new(Step::NowhereZero(part))?;
    Ok(ConstructionPlan::new(PlanNode::new(Step::Kron(
        Box::new(sym.root),
        Box::new(b),
    ))?))
}

enum Value {
    Real(RealMatrix),
    Int(IntMatrix),
}

impl Value {
    fn real(&self) -> RealMatrix {
        match self {
            Value::Real(m) => m.clone(),
            Value::Int(m) => m.to_real(),
        }
    }

    fn int(&self, node: &PlanNode) -> Result<&IntMatrix, PlanError> {
        match self {
            Value::Int(m) => Ok(m),
            Value::Real(_) => Err(malformed(format!(
                "{node} does not produce an integer matrix"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Ortho(OrthoCertificate),
    Drt(DrtVerdict),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        match self {
            Verdict::Ortho(c) => c.passed,
            Verdict::Drt(v) => v.passed,
        }
    }

    pub fn as_ortho(&self) -> Option<&OrthoCertificate> {
        match self {
            Verdict::Ortho(c) => Some(c),
            Verdict::Drt(_) => None,
        }
    }
}

/// A matrix built from a plan and its final certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Executed {
    pub matrix: RealMatrix,
    pub verdict: Verdict,
    pub product: Product,
}

/// Runs a plan bottom-up, certifying every intermediate and the final output.
pub fn execute(plan: &ConstructionPlan) -> Result<Executed, PlanError> {
    let value = eval(&plan.root)?;
    let verdict = certify_value(&value, plan.target, &plan.root)?;
    let matrix = match (&value, &verdict) {
        (Value::Real(m), Verdict::Ortho(c)) => m.clone().with_scale(c.scale_c),
        (Value::Int(m), Verdict::Ortho(c)) => m.to_real().with_scale(c.scale_c),
        (v, Verdict::Drt(_)) => v.real(),
    };
    Ok(Executed {
        matrix,
        verdict,
        product: plan.target,
    })
}

fn certify_value(value: &Value, product: Product, at: &PlanNode) -> Result<Verdict, PlanError> {
    let verdict = match product.claim() {
        Some(claim) => {
            let m = value.real();
            let cert = verify::certify_default(&m, claim).map_err(|e| malformed(e.to_string()))?;
            Verdict::Ortho(cert)
        }
        None => Verdict::Drt(check_drt(value.int(at)?)),
    };
    if !verdict.passed() {
        let details = match &verdict {
            Verdict::Ortho(c) => c
                .failures
                .iter()
                .take(5)
                .map(|v| v.detail.clone())
                .collect::<Vec<_>>()
                .join("; "),
            Verdict::Drt(d) => d
                .failures
                .iter()
                .take(5)
                .cloned()
                .collect::<Vec<_>>()
                .join("; "),
        };
        return Err(PlanError::CertificationFailed {
            node: at.to_string(),
            details,
        });
    }
    Ok(verdict)
}

fn eval(node: &PlanNode) -> Result<Value, PlanError> {
    let value = match &node.step {
        Step::Seed(key) => Value::Real(construct::seed(*key)?),
        Step::Paley(q) => Value::Int(construct::paley_conference(*q)?),
        Step::Combine(a, b) => {
            let (a, b) = (eval(a)?.real(), eval(b)?.real());
            Value::Real(construct::combine(&a, &b)?)
        }
        Step::Symmetric(n) => Value::Real(construct::symmetric_omzd(*n)?),
        Step::PaleyDrt(q) => Value::Int(construct::paley_tournament(*q)?),
        Step::Double(c) => {
            let t = eval(c)?;
            Value::Int(construct::double_drt(t.int(c)?)?)
        }
        Step::SkewHadamard(c) => {
            let t = eval(c)?;
            Value::Int(construct::drt_to_skew_hadamard(t.int(c)?)?)
        }
        Step::OmzdFromDrt(c, branch) => {
            let t = eval(c)?;
            Value::Real(construct::omzd_from_drt(t.int(c)?, *branch)?)
        }
        Step::ReduceZeros(c, k) => Value::Real(construct::reduce_zeros(&eval(c)?.real(), *k)?),
        Step::OmpzdNm1(n) => {
            let omzd = if *n >= 6 {
                eval(&omzd_plan(n - 2, PlanOptions::default()))?.real()
            } else {
                RealMatrix::identity(1)
            };
            Value::Real(construct::ompzd_n_minus_1_from(*n, &omzd)?)
        }
        Step::NowhereZero(n) => Value::Real(construct::nowhere_zero_orthogonal(*n)?),
        Step::Kron(a, b) => {
            let (a, b) = (eval(a)?.real(), eval(b)?.real());
            Value::Real(construct::kron(&a, &b))
        }
    };
    let got = match &value {
        Value::Real(m) => (m.rows(), m.cols()),
        Value::Int(m) => (m.order(), m.order()),
    };
    let want = node.output.order();
    if got != (want, want) {
        return Err(PlanError::CertificationFailed {
            node: node.to_string(),
            details: format!("expected order {want}, got {}x{}", got.0, got.1),
        });
    }
    certify_value(&value, node.output, node)?;
    Ok(value)
}

const MAX_PLAN_DEPTH: usize = 1100;
const MAX_PLAN_LEN: usize = 1 << 16;

/// Parses the nested text form.
pub fn parse_plan(text: &str) -> Result<PlanNode, PlanError> {
    if text.len() > MAX_PLAN_LEN {
        return Err(malformed("plan text too long"));
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let node = p.node(0)?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(malformed(format!("trailing input at byte {}", p.pos)));
    }
    Ok(node)
}

enum Arg {
    Node(PlanNode),
    Word(String),
    Num(u64),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), PlanError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(malformed(format!(
                "expected '{}' at byte {}",
                ch as char, self.pos
            )))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn arg(&mut self, depth: usize) -> Result<Arg, PlanError> {
        self.skip_ws();
        let start = self.pos;
        let word = self.ident();
        if word.is_empty() {
            return Err(malformed(format!("expected an argument at byte {start}")));
        }
        if word.bytes().all(|b| b.is_ascii_digit()) {
            return word
                .parse()
                .map(Arg::Num)
                .map_err(|_| malformed(format!("number {word} out of range")));
        }
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'(') {
            self.pos = start;
            return self.node(depth + 1).map(Arg::Node);
        }
        Ok(Arg::Word(word))
    }

    fn node(&mut self, depth: usize) -> Result<PlanNode, PlanError> {
        if depth > MAX_PLAN_DEPTH {
            return Err(malformed("plan nested too deeply"));
        }
        let name = self.ident();
        self.expect(b'(')?;
        let mut args = Vec::new();
        loop {
            args.push(self.arg(depth)?);
            self.skip_ws();
            match self.src.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => {
                    return Err(malformed(format!(
                        "expected ',' or ')' at byte {}",
                        self.pos
                    )))
                }
            }
        }
        build(&name, args)
    }
}

fn usize_arg(n: u64) -> Result<usize, PlanError> {
    usize::try_from(n).map_err(|_| malformed("number out of range"))
}

fn build(name: &str, args: Vec<Arg>) -> Result<PlanNode, PlanError> {
    let mut it = args.into_iter();
    let mut next = || it.next();
    let step = match (name, next(), next(), next(), next()) {
        ("Seed", Some(Arg::Word(w)), Some(Arg::Num(n)), None, None) if w == "omzd" => {
            Step::Seed(SeedKey::Omzd(usize_arg(n)?))
        }
        ("Seed", Some(Arg::Word(w)), Some(Arg::Num(n)), Some(Arg::Num(k)), None)
            if w == "ompzd" =>
        {
            Step::Seed(SeedKey::Ompzd(usize_arg(n)?, usize_arg(k)?))
        }
        ("Paley", Some(Arg::Num(q)), None, ..) => Step::Paley(q),
        ("Combine", Some(Arg::Node(a)), Some(Arg::Node(b)), None, _) => {
            Step::Combine(Box::new(a), Box::new(b))
        }
        ("Symmetric", Some(Arg::Num(n)), None, ..) => Step::Symmetric(usize_arg(n)?),
        ("PaleyDRT", Some(Arg::Num(q)), None, ..) => Step::PaleyDrt(q),
        ("Double", Some(Arg::Node(c)), None, ..) => Step::Double(Box::new(c)),
        ("SkewHadamard", Some(Arg::Node(c)), None, ..) => Step::SkewHadamard(Box::new(c)),
        ("OmzdFromDrt", Some(Arg::Node(c)), Some(Arg::Word(b)), None, _) => {
            Step::OmzdFromDrt(Box::new(c), b.parse().map_err(malformed)?)
        }
        ("ReduceZeros", Some(Arg::Node(c)), Some(Arg::Num(k)), None, _) => {
            Step::ReduceZeros(Box::new(c), usize_arg(k)?)
        }
        ("OmpzdNm1", Some(Arg::Num(n)), None, ..) => Step::OmpzdNm1(usize_arg(n)?),
        ("NowhereZero", Some(Arg::Num(n)), None, ..) => Step::NowhereZero(usize_arg(n)?),
        ("Kron", Some(Arg::Node(a)), Some(Arg::Node(b)), None, _) => {
            Step::Kron(Box::new(a), Box::new(b))
        }
        _ => {
            return Err(malformed(format!(
                "unrecognized node {name}(...) or wrong arguments"
            )))
        }
    };
    PlanNode::new(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(kind: Kind, n: usize, k: Option<usize>, route: Route) -> String {
        plan(
            kind,
            n,
            k,
            PlanOptions {
                route,
                branch: Branch::Minus,
            },
        )
        .unwrap()
        .to_string()
    }

    #[test]
    fn existence_examples() {
        let v = exists(Kind::Omzd, 3, None).unwrap();
        assert!(!v.exists);
        assert_eq!(v.statement, "Theorem: no OMZD(1) or OMZD(3)");
        let v = exists(Kind::SymmetricOmzd, 4, None).unwrap();
        assert!(!v.exists);
        assert_eq!(v.theorem, "symmetric-order-four");
        assert!(exists(Kind::Ompzd, 5, Some(4)).unwrap().exists);
        assert_eq!(
            exists(Kind::Ompzd, 5, Some(6)).unwrap_err(),
            PlanError::InvalidK { n: 5, k: 6 }
        );
    }

    #[test]
    fn routing_examples() {
        assert_eq!(
            text(Kind::Omzd, 9, None, Route::Auto),
            "Combine(Seed(omzd,7),Seed(omzd,4))"
        );
        assert_eq!(
            text(Kind::Omzd, 15, None, Route::PreferDrt),
            "OmzdFromDrt(Double(PaleyDRT(7)),minus)"
        );
        assert_eq!(
            text(Kind::Omzd, 11, None, Route::PreferDrt),
            "OmzdFromDrt(PaleyDRT(11),minus)"
        );
        assert_eq!(text(Kind::Ompzd, 6, Some(5), Route::Auto), "OmpzdNm1(6)");
        assert_eq!(text(Kind::Ompzd, 6, Some(0), Route::Auto), "NowhereZero(6)");
        assert_eq!(
            text(Kind::Ompzd, 8, Some(3), Route::Auto),
            "ReduceZeros(Symmetric(8),3)"
        );
        assert_eq!(
            text(Kind::Omzd, 8, None, Route::PreferRecursive),
            "Combine(Seed(omzd,6),Seed(omzd,4))"
        );
        assert_eq!(
            text(Kind::SymmetricOmzd, 2, None, Route::Auto),
            "Seed(omzd,2)"
        );
    }

    #[test]
    fn nonexistent_targets_are_refused() {
        assert!(matches!(
            plan(Kind::Omzd, 3, None, PlanOptions::default()),
            Err(PlanError::NonexistentTarget(_))
        ));
        assert!(matches!(
            plan(Kind::Ompzd, 3, Some(2), PlanOptions::default()),
            Err(PlanError::NonexistentTarget(_))
        ));
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "Combine(Combine(Seed(omzd,5),Seed(omzd,4)),Seed(omzd,4))",
            "OmzdFromDrt(Double(PaleyDRT(7)),plus)",
            "ReduceZeros(Seed(ompzd,4,3),1)",
            "Kron(Symmetric(6),NowhereZero(3))",
            "SkewHadamard(PaleyDRT(11))",
            "Paley(9)",
            "OmpzdNm1(9)",
        ] {
            assert_eq!(parse_plan(s).unwrap().to_string(), s);
        }
        assert_eq!(
            parse_plan(" Combine ( Seed(omzd, 5) , Seed(omzd,4) ) ")
                .unwrap()
                .to_string(),
            "Combine(Seed(omzd,5),Seed(omzd,4))"
        );
    }

    #[test]
    fn parse_rejects_inconsistent_plans() {
        for s in [
            "Combine(Seed(omzd,2),Seed(omzd,4))",
            "Seed(omzd,3)",
            "Symmetric(4)",
            "Double(Seed(omzd,4))",
            "OmzdFromDrt(PaleyDRT(3),minus)",
            "ReduceZeros(Symmetric(6),5)",
            "PaleyDRT(5)",
            "Combine(Seed(omzd,5))",
            "Seed(omzd,5)extra",
            "Symmetric(99999999999999999999999)",
            "",
        ] {
            assert!(parse_plan(s).is_err(), "{s}");
        }
    }

    #[test]
    fn deep_nesting_is_rejected_without_overflow() {
        let s = "Double(".repeat(10_000) + "PaleyDRT(7)" + &")".repeat(10_000);
        assert!(parse_plan(&s).is_err());
    }

    #[test]
    fn execute_small_plans() {
        let e = execute(&plan(Kind::Omzd, 11, None, PlanOptions::default()).unwrap()).unwrap();
        assert!(e.verdict.passed());
        assert!(e.verdict.as_ortho().unwrap().max_residual <= 1e-9);
        let e = execute(&ConstructionPlan::parse("Seed(omzd,2)").unwrap()).unwrap();
        assert_eq!(e.matrix.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let e = execute(&plan_drt(15).unwrap()).unwrap();
        assert!(matches!(e.verdict, Verdict::Drt(ref d) if d.parameters() == Some((15, 7, 3))));
    }
}
