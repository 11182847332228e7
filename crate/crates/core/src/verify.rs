//! Certificates for orthogonal zero patterns and for the integer designs
//! behind them.
//!
//! Integer-valued claims are checked in exact integer arithmetic. Everything
//! else goes through the scaled-identity residual with a relative tolerance.

use std::fmt;

use thiserror::Error;

use crate::numerics::{residual_scaled_identity, RealMatrix};

pub const DEFAULT_RES_TOL: f64 = 1e-9;

/// Zero tolerance for matrices read from outside: `1e-12 · max|entry|`.
pub fn default_zero_tol(m: &RealMatrix) -> f64 {
    1e-12 * m.max_abs()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Zero,
    NonZero,
}

/// Zero/nonzero classification of a square matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMask {
    order: usize,
    mask: Vec<Cell>,
}

impl PatternMask {
    pub fn of(m: &RealMatrix, zero_tol: f64) -> Self {
        assert!(m.is_square());
        let mask = m
            .as_slice()
            .iter()
            .map(|x| {
                if x.abs() <= zero_tol {
                    Cell::Zero
                } else {
                    Cell::NonZero
                }
            })
            .collect();
        PatternMask {
            order: m.order(),
            mask,
        }
    }

    /// Zeros exactly at the listed diagonal positions.
    pub fn diagonal_zeros(order: usize, zeros: &[usize]) -> Self {
        let mut mask = vec![Cell::NonZero; order * order];
        for &i in zeros {
            mask[i * order + i] = Cell::Zero;
        }
        PatternMask { order, mask }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.mask[i * self.order + j]
    }

    pub fn zero_diagonal_positions(&self) -> Vec<usize> {
        (0..self.order)
            .filter(|&i| self.get(i, i) == Cell::Zero)
            .collect()
    }

    pub fn offdiagonal_zeros(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.order {
            for j in 0..self.order {
                if i != j && self.get(i, j) == Cell::Zero {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// What a certificate asserts about a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Omzd,
    /// Exactly `k` zeros, all on the diagonal.
    Ompzd(usize),
    Conference,
    SkewHadamard,
    SymmetricOmzd,
    NowhereZeroOrthogonal,
    /// Symmetric orthogonal matrix whose zeros are exactly the diagonal
    /// `block × block` blocks (the complete multipartite pattern).
    BlockZeroDiagonal {
        block: usize,
    },
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::Omzd => write!(f, "omzd"),
            Claim::Ompzd(k) => write!(f, "ompzd({k})"),
            Claim::Conference => write!(f, "conference"),
            Claim::SkewHadamard => write!(f, "skew-hadamard"),
            Claim::SymmetricOmzd => write!(f, "symmetric-omzd"),
            Claim::NowhereZeroOrthogonal => write!(f, "nowhere-zero"),
            Claim::BlockZeroDiagonal { block } => write!(f, "block-zero-diagonal({block})"),
        }
    }
}

impl std::str::FromStr for Claim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let with_arg = |prefix: &str| -> Option<Result<usize, String>> {
            let rest = s.strip_prefix(prefix)?;
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            Some(
                inner
                    .parse()
                    .map_err(|_| format!("bad argument in claim {s:?}")),
            )
        };
        match s {
            "omzd" => return Ok(Claim::Omzd),
            "conference" => return Ok(Claim::Conference),
            "skew-hadamard" => return Ok(Claim::SkewHadamard),
            "symmetric-omzd" => return Ok(Claim::SymmetricOmzd),
            "nowhere-zero" => return Ok(Claim::NowhereZeroOrthogonal),
            _ => {}
        }
        if let Some(k) = with_arg("ompzd") {
            return k.map(Claim::Ompzd);
        }
        if let Some(b) = with_arg("block-zero-diagonal") {
            return b.map(|block| Claim::BlockZeroDiagonal { block });
        }
        Err(format!("unknown claim {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Skew,
    Neither,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Symmetric => "symmetric",
            Symmetry::Skew => "skew",
            Symmetry::Neither => "neither",
        })
    }
}

impl std::str::FromStr for Symmetry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(Symmetry::Symmetric),
            "skew" => Ok(Symmetry::Skew),
            "neither" => Ok(Symmetry::Neither),
            _ => Err(format!("unknown symmetry class {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    DiagonalNonZero { index: usize },
    OffDiagonalZero { row: usize, col: usize },
    ZeroCount { expected: usize, found: usize },
    BlockPattern { row: usize, col: usize },
    NonPositiveScale,
    NotOrthogonal,
    EntryDomain { row: usize, col: usize },
    NotSymmetric,
    NotSkew,
    Order,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoCertificate {
    pub claim: Claim,
    pub passed: bool,
    pub scale_c: f64,
    pub max_residual: f64,
    /// Smallest off-diagonal magnitude; 0 when the matrix has no
    /// off-diagonal entries.
    pub min_offdiag_magnitude: f64,
    pub symmetry: Symmetry,
    pub failures: Vec<Violation>,
}

impl OrthoCertificate {
    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.failures.iter().any(|v| pred(&v.kind))
    }
}

/// Square integer matrix for the ±1 designs and tournament adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    order: usize,
    entries: Vec<i32>,
}

impl IntMatrix {
    pub fn zeros(order: usize) -> Self {
        IntMatrix {
            order,
            entries: vec![0; order * order],
        }
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> i32) -> Self {
        let mut entries = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                entries.push(f(i, j));
            }
        }
        IntMatrix { order, entries }
    }

    /// Panics on non-square input.
    pub fn from_rows<R: AsRef<[i32]>>(rows: &[R]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            let r = rows[i].as_ref();
            assert_eq!(r.len(), n, "rows must form a square matrix");
            r[j]
        })
    }

    /// Exact conversion; `None` unless every entry is an integer in i32 range.
    pub fn try_from_real(m: &RealMatrix) -> Option<Self> {
        if !m.is_square() {
            return None;
        }
        let mut entries = Vec::with_capacity(m.order() * m.order());
        for &x in m.as_slice() {
            if x.fract() != 0.0 || x.abs() > i32::MAX as f64 {
                return None;
            }
            entries.push(x as i32);
        }
        Some(IntMatrix {
            order: m.order(),
            entries,
        })
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j) as f64)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.entries[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i32) {
        self.entries[i * self.order + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(j, i))
    }

    pub fn entries_in(&self, allowed: &[i32]) -> bool {
        self.entries.iter().all(|e| allowed.contains(e))
    }

    /// Exact `M Mᵀ` in i64.
    pub fn gram(&self) -> Vec<i64> {
        let n = self.order;
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: i64 = (0..n)
                    .map(|t| self.get(i, t) as i64 * self.get(j, t) as i64)
                    .sum();
                g[i * n + j] = dot;
                g[j * n + i] = dot;
            }
        }
        g
    }

    pub fn to_rows(&self) -> Vec<Vec<i32>> {
        (0..self.order)
            .map(|i| self.entries[i * self.order..(i + 1) * self.order].to_vec())
            .collect()
    }
}

fn literal_symmetry(m: &RealMatrix, tol: f64) -> Symmetry {
    if m.asymmetry() <= tol {
        Symmetry::Symmetric
    } else if m.skewness_defect() <= tol {
        Symmetry::Skew
    } else {
        Symmetry::Neither
    }
}

fn min_offdiag(m: &RealMatrix) -> f64 {
    let n = m.order();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                best = best.min(m.get(i, j).abs());
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Certifies `m` against `claim`. The certificate always carries the full
/// diagnostic; `passed` is true only when no violation was recorded.
pub fn certify(
    m: &RealMatrix,
    claim: Claim,
    zero_tol: f64,
    res_tol: f64,
) -> Result<OrthoCertificate, VerifyError> {
    if !m.is_square() {
        return Err(VerifyError::ShapeMismatch {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.order();
    let mut failures = Vec::new();
    let (c, max_residual) = residual_scaled_identity(m);

    // exact integer claims use zero tolerance throughout
    let exact = matches!(claim, Claim::Conference | Claim::SkewHadamard);
    let ztol = if exact { 0.0 } else { zero_tol };
    let pattern = PatternMask::of(m, ztol);
    let symmetry = literal_symmetry(m, ztol);

    if n == 0 {
        failures.push(Violation::new(ViolationKind::Order, "empty matrix"));
    }

    match claim {
        Claim::Omzd | Claim::SymmetricOmzd | Claim::Conference => {
            check_diagonal_zero(&pattern, &mut failures);
            check_no_offdiag_zero(&pattern, &mut failures);
        }
        Claim::Ompzd(k) => {
            let zeros = pattern.zero_diagonal_positions();
            if zeros.len() != k {
                failures.push(Violation::new(
                    ViolationKind::ZeroCount {
                        expected: k,
                        found: zeros.len(),
                    },
                    format!("expected {k} diagonal zeros, found {}", zeros.len()),
                ));
            }
            check_no_offdiag_zero(&pattern, &mut failures);
        }
        Claim::NowhereZeroOrthogonal | Claim::SkewHadamard => {
            for i in pattern.zero_diagonal_positions() {
                failures.push(Violation::new(
                    ViolationKind::ZeroCount {
                        expected: 0,
                        found: 1,
                    },
                    format!("zero diagonal entry at {i}"),
                ));
            }
            check_no_offdiag_zero(&pattern, &mut failures);
        }
        Claim::BlockZeroDiagonal { block } => {
            if block == 0 || !n.is_multiple_of(block) {
                failures.push(Violation::new(
                    ViolationKind::Order,
                    format!("order {n} is not a positive multiple of block size {block}"),
                ));
            } else {
                for i in 0..n {
                    for j in 0..n {
                        let want = if i / block == j / block {
                            Cell::Zero
                        } else {
                            Cell::NonZero
                        };
                        if pattern.get(i, j) != want {
                            failures.push(Violation::new(
                                ViolationKind::BlockPattern { row: i, col: j },
                                format!("entry ({i},{j}) breaks the block pattern"),
                            ));
                        }
                    }
                }
            }
        }
    }

    if exact {
        check_exact(m, claim, &mut failures);
    }

    if c.is_nan() || c <= 0.0 {
        failures.push(Violation::new(
            ViolationKind::NonPositiveScale,
            format!("recovered scale c = {c} is not positive"),
        ));
    } else if !exact && (max_residual.is_nan() || max_residual > res_tol * c * n as f64) {
        failures.push(Violation::new(
            ViolationKind::NotOrthogonal,
            format!(
                "max |MMᵀ - cI| = {max_residual:e} exceeds {res_tol:e} · c · n = {:e}",
                res_tol * c * n as f64
            ),
        ));
    }

    match claim {
        Claim::SymmetricOmzd | Claim::BlockZeroDiagonal { .. }
            if symmetry != Symmetry::Symmetric =>
        {
            failures.push(Violation::new(
                ViolationKind::NotSymmetric,
                "matrix is not symmetric",
            ));
        }
        _ => {}
    }

    Ok(OrthoCertificate {
        claim,
        passed: failures.is_empty(),
        scale_c: c,
        max_residual,
        min_offdiag_magnitude: min_offdiag(m),
        symmetry,
        failures,
    })
}

/// `certify` with default tolerances.
pub fn certify_default(m: &RealMatrix, claim: Claim) -> Result<OrthoCertificate, VerifyError> {
    certify(m, claim, default_zero_tol(m), DEFAULT_RES_TOL)
}

fn check_diagonal_zero(p: &PatternMask, failures: &mut Vec<Violation>) {
    for i in 0..p.order() {
        if p.get(i, i) != Cell::Zero {
            failures.push(Violation::new(
                ViolationKind::DiagonalNonZero { index: i },
                format!("diagonal entry ({i},{i}) is nonzero"),
            ));
        }
    }
}

fn check_no_offdiag_zero(p: &PatternMask, failures: &mut Vec<Violation>) {
    for (row, col) in p.offdiagonal_zeros() {
        failures.push(Violation::new(
            ViolationKind::OffDiagonalZero { row, col },
            format!("off-diagonal entry ({row},{col}) is zero"),
        ));
    }
}

/// Entry domain and Gram identity in exact integers.
fn check_exact(m: &RealMatrix, claim: Claim, failures: &mut Vec<Violation>) {
    let n = m.order();
    for i in 0..n {
        for j in 0..n {
            let x = m.get(i, j);
            let ok = match claim {
                Claim::Conference if i == j => x == 0.0,
                _ => x == 1.0 || x == -1.0,
            };
            if !ok {
                failures.push(Violation::new(
                    ViolationKind::EntryDomain { row: i, col: j },
                    format!("entry ({i},{j}) = {x} is outside the {claim} entry domain"),
                ));
            }
        }
    }
    let Some(int) = IntMatrix::try_from_real(m) else {
        return;
    };
    let target = match claim {
        Claim::Conference => n as i64 - 1,
        _ => n as i64,
    };
    if !gram_is_scalar(&int, target) {
        failures.push(Violation::new(
            ViolationKind::NotOrthogonal,
            format!("MMᵀ ≠ {target}·I in exact arithmetic"),
        ));
    }
    if claim == Claim::SkewHadamard {
        let skew_ok = (0..n)
            .all(|i| (0..n).all(|j| int.get(i, j) + int.get(j, i) == if i == j { 2 } else { 0 }));
        if !skew_ok {
            failures.push(Violation::new(ViolationKind::NotSkew, "H + Hᵀ ≠ 2I"));
        }
    }
}

fn gram_is_scalar(m: &IntMatrix, target: i64) -> bool {
    let n = m.order();
    let g = m.gram();
    (0..n).all(|i| (0..n).all(|j| g[i * n + j] == if i == j { target } else { 0 }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrtVerdict {
    pub passed: bool,
    pub order: usize,
    pub out_degree: Option<usize>,
    pub lambda: Option<usize>,
    pub failures: Vec<String>,
}

impl DrtVerdict {
    /// `(q, k, λ)` when the tournament passed.
    pub fn parameters(&self) -> Option<(usize, usize, usize)> {
        if self.passed {
            Some((self.order, self.out_degree?, self.lambda?))
        } else {
            None
        }
    }
}

/// Exact check of the doubly regular tournament axioms.
pub fn check_drt(t: &IntMatrix) -> DrtVerdict {
    let q = t.order();
    let mut failures = Vec::new();
    if !t.entries_in(&[0, 1]) {
        failures.push("entries must be 0 or 1".to_string());
    }
    if q == 0 || q % 4 != 3 {
        failures.push(format!("order {q} is not congruent to 3 mod 4"));
    }
    for i in 0..q {
        if t.get(i, i) != 0 {
            failures.push(format!("diagonal entry ({i},{i}) is nonzero"));
        }
    }
    let mut orientation_ok = true;
    for i in 0..q {
        for j in i + 1..q {
            if t.get(i, j) + t.get(j, i) != 1 {
                orientation_ok = false;
                failures.push(format!("vertices {i},{j}: T + Tᵀ ≠ J - I"));
            }
        }
    }
    let k = q.saturating_sub(1) / 2;
    for i in 0..q {
        let deg: i64 = (0..q).map(|j| t.get(i, j) as i64).sum();
        if deg != k as i64 {
            failures.push(format!("vertex {i} has out-degree {deg}, expected {k}"));
        }
    }
    let lambda = q.saturating_sub(3) / 4;
    if orientation_ok && q % 4 == 3 {
        for u in 0..q {
            for w in 0..q {
                if u == w {
                    continue;
                }
                let common = (0..q)
                    .filter(|&v| t.get(u, v) == 1 && t.get(w, v) == 1)
                    .count();
                if common != lambda {
                    failures.push(format!(
                        "vertices {u},{w} jointly dominate {common}, expected {lambda}"
                    ));
                }
            }
        }
    }
    let passed = failures.is_empty();
    DrtVerdict {
        passed,
        order: q,
        out_degree: passed.then_some(k),
        lambda: passed.then_some(lambda),
        failures,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewHadamardVerdict {
    pub passed: bool,
    pub order: usize,
    pub failures: Vec<String>,
}

/// Exact check of `HHᵀ = nI` and `H + Hᵀ = 2I`.
pub fn check_skew_hadamard(h: &IntMatrix) -> SkewHadamardVerdict {
    let n = h.order();
    let mut failures = Vec::new();
    if !h.entries_in(&[-1, 1]) {
        failures.push("entries must be ±1".to_string());
    }
    if !gram_is_scalar(h, n as i64) {
        failures.push(format!("HHᵀ ≠ {n}·I"));
    }
    for i in 0..n {
        for j in i..n {
            let want = if i == j { 2 } else { 0 };
            if h.get(i, j) + h.get(j, i) != want {
                failures.push(format!("(H + Hᵀ)[{i}][{j}] ≠ {want}"));
            }
        }
    }
    SkewHadamardVerdict {
        passed: failures.is_empty(),
        order: n,
        failures,
    }
}
