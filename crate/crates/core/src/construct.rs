//! Deterministic constructions of orthogonal matrices with zero diagonals
//! and of the integer designs they are built from.
//!
//! Every real-valued constructor writes exact `0.0` at its zero positions,
//! so pattern checks on this module's output do not depend on tolerances.

use std::fmt;

use thiserror::Error;

use crate::gfield::{odd_prime_power, FieldError, FiniteField};
use crate::numerics::{residual_scaled_identity, RealMatrix};
use crate::verify::{certify_default, check_drt, check_skew_hadamard, Claim, IntMatrix};

/// Orders beyond this are refused by every allocating constructor.
pub const MAX_ORDER: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructError {
    #[error("no catalog seed for {0}")]
    NotInCatalog(SeedKey),
    #[error("{0} is not an odd prime power")]
    InvalidQ(u64),
    #[error("q = {0} is not congruent to 3 mod 4")]
    QNotThreeModFour(u64),
    #[error("input {which} is not a certified OMZD")]
    NotOmzd { which: &'static str },
    #[error("input is not a certified OMPZD")]
    NotOmpzd,
    #[error("input is not a doubly regular tournament")]
    NotDrt,
    #[error("order {order} is below the minimum {min} for this construction")]
    OrderTooSmall { order: usize, min: usize },
    #[error("order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),
    #[error("a symmetric OMZD({0}) does not exist: the order must be even")]
    OddOrder(usize),
    #[error("a symmetric OMZD(4) does not exist")]
    OrderFour,
    #[error("the DRT construction excludes q = 3")]
    OrderThree,
    #[error("target {target} exceeds the current zero count {current}")]
    TargetTooHigh { target: usize, current: usize },
    #[error("rotations cannot reach OMPZD({n},{k}); k must be at most n - 2")]
    TargetAboveReach { n: usize, k: usize },
    #[error("no rotation angle in the schedule keeps the touched columns nonzero")]
    NoThetaFound,
    #[error("an OMPZD({n},{k}) does not exist")]
    Nonexistent { n: usize, k: usize },
    #[error("construction produced an uncertified result: {0}")]
    Internal(String),
}

impl From<FieldError> for ConstructError {
    fn from(e: FieldError) -> Self {
        ConstructError::Internal(e.to_string())
    }
}

/// Key into the fixed table of literal example matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedKey {
    Omzd(usize),
    Ompzd(usize, usize),
}

impl SeedKey {
    pub const CATALOG: [SeedKey; 8] = [
        SeedKey::Omzd(2),
        SeedKey::Omzd(4),
        SeedKey::Omzd(5),
        SeedKey::Omzd(6),
        SeedKey::Omzd(7),
        SeedKey::Ompzd(3, 1),
        SeedKey::Ompzd(4, 3),
        SeedKey::Ompzd(5, 4),
    ];

    pub fn order(&self) -> usize {
        match *self {
            SeedKey::Omzd(n) | SeedKey::Ompzd(n, _) => n,
        }
    }

    pub fn zeros(&self) -> usize {
        match *self {
            SeedKey::Omzd(n) => n,
            SeedKey::Ompzd(_, k) => k,
        }
    }

    pub fn in_catalog(&self) -> bool {
        Self::CATALOG.contains(self)
    }
}

impl fmt::Display for SeedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedKey::Omzd(n) => write!(f, "OMZD({n})"),
            SeedKey::Ompzd(n, k) => write!(f, "OMPZD({n},{k})"),
        }
    }
}

fn real(rows: &[&[f64]]) -> RealMatrix {
    RealMatrix::from_rows(rows).expect("catalog rows are rectangular")
}

/// Attaches the recovered scale `c` (diagonal mean of `MMᵀ`).
fn with_recovered_scale(m: RealMatrix) -> RealMatrix {
    let (c, _) = residual_scaled_identity(&m);
    m.with_scale(c)
}

/// The literal example matrices.
pub fn seed(key: SeedKey) -> Result<RealMatrix, ConstructError> {
    let m = match key {
        SeedKey::Omzd(2) => real(&[&[0.0, 1.0], &[1.0, 0.0]]),
        SeedKey::Omzd(4) => real(&[
            &[0.0, 1.0, 1.0, 1.0],
            &[-1.0, 0.0, -1.0, 1.0],
            &[-1.0, 1.0, 0.0, -1.0],
            &[-1.0, -1.0, 1.0, 0.0],
        ]),
        SeedKey::Omzd(6) => real(&[
            &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            &[1.0, 0.0, 1.0, -1.0, -1.0, 1.0],
            &[1.0, 1.0, 0.0, 1.0, -1.0, -1.0],
            &[1.0, -1.0, 1.0, 0.0, 1.0, -1.0],
            &[1.0, -1.0, -1.0, 1.0, 0.0, 1.0],
            &[1.0, 1.0, -1.0, -1.0, 1.0, 0.0],
        ]),
        SeedKey::Omzd(5) => {
            // a = (-1 + √3)/2, b = (-1 - √3)/2
            let s3 = 3f64.sqrt();
            let a = (-1.0 + s3) / 2.0;
            let b = (-1.0 - s3) / 2.0;
            real(&[
                &[0.0, 1.0, 1.0, 1.0, 1.0],
                &[1.0, 0.0, a, 1.0, b],
                &[1.0, b, 0.0, a, 1.0],
                &[1.0, 1.0, b, 0.0, a],
                &[1.0, a, 1.0, b, 0.0],
            ])
        }
        SeedKey::Omzd(7) => {
            // R = √(9 + 4√6)
            // a = -(1 - R)/√6 - R/3,  b = -1 + √6/2
            // c = -(1 + R)/√6 + 2R/3, d = -1/√6 - R/3
            let s6 = 6f64.sqrt();
            let r = (9.0 + 4.0 * s6).sqrt();
            let a = -(1.0 - r) / s6 - r / 3.0;
            let b = -1.0 + s6 / 2.0;
            let c = -(1.0 + r) / s6 + 2.0 * r / 3.0;
            let d = -1.0 / s6 - r / 3.0;
            real(&[
                &[0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                &[1.0, 0.0, a, b, c, 1.0, d],
                &[1.0, d, 0.0, a, b, c, 1.0],
                &[1.0, 1.0, d, 0.0, a, b, c],
                &[1.0, c, 1.0, d, 0.0, a, b],
                &[1.0, b, c, 1.0, d, 0.0, a],
                &[1.0, a, b, c, 1.0, d, 0.0],
            ])
        }
        SeedKey::Ompzd(3, 1) => {
            let s2 = 2f64.sqrt();
            real(&[&[1.0, 1.0, s2], &[1.0, 1.0, -s2], &[s2, -s2, 0.0]])
        }
        SeedKey::Ompzd(4, 3) => {
            // golden-ratio pair (-1 ± √5)/2
            let s5 = 5f64.sqrt();
            let al = (-1.0 + s5) / 2.0;
            let be = (-1.0 - s5) / 2.0;
            real(&[
                &[1.0, 1.0, 1.0, 1.0],
                &[1.0, 0.0, al, be],
                &[1.0, be, 0.0, al],
                &[1.0, al, be, 0.0],
            ])
        }
        SeedKey::Ompzd(5, 4) => {
            // ψ, φ: roots of 2x² + (1 - √5)x - 1 = 0, φ the larger
            let s5 = 5f64.sqrt();
            let be = (-1.0 - s5) / 2.0;
            let lin = 1.0 - s5;
            let disc = (lin * lin + 8.0).sqrt();
            let phi = (-lin + disc) / 4.0;
            let psi = (-lin - disc) / 4.0;
            real(&[
                &[1.0, 1.0, 1.0, 1.0, 1.0],
                &[1.0, 0.0, phi, be, psi],
                &[1.0, psi, 0.0, phi, be],
                &[1.0, be, psi, 0.0, phi],
                &[1.0, phi, be, psi, 0.0],
            ])
        }
        other => return Err(ConstructError::NotInCatalog(other)),
    };
    Ok(with_recovered_scale(m))
}

fn check_order(n: usize) -> Result<(), ConstructError> {
    if n > MAX_ORDER {
        Err(ConstructError::OrderTooLarge(n))
    } else {
        Ok(())
    }
}

/// Paley conference matrix of order `q + 1`: zero corner, a +1 border row,
/// a border column of +1 (`q ≡ 1 mod 4`) or -1 (`q ≡ 3 mod 4`), and core
/// `Q[i][j] = χ(aⱼ - aᵢ)` over the canonical element order.
pub fn paley_conference(q: u64) -> Result<IntMatrix, ConstructError> {
    check_order(usize::try_from(q).unwrap_or(usize::MAX).saturating_add(1))?;
    if odd_prime_power(q).is_none() {
        return Err(ConstructError::InvalidQ(q));
    }
    let field = FiniteField::of_order(q)?;
    let qn = q as usize;
    let column_sign = if q % 4 == 1 { 1 } else { -1 };
    Ok(IntMatrix::from_fn(qn + 1, |i, j| match (i, j) {
        (0, 0) => 0,
        (0, _) => 1,
        (_, 0) => column_sign,
        _ => field.chi_index(field.sub_index(j - 1, i - 1)) as i32,
    }))
}

fn certified_unit_omzd(m: &RealMatrix, which: &'static str) -> Result<RealMatrix, ConstructError> {
    let cert = certify_default(m, Claim::Omzd).map_err(|_| ConstructError::NotOmzd { which })?;
    if !cert.passed {
        return Err(ConstructError::NotOmzd { which });
    }
    Ok(m.scaled(1.0 / cert.scale_c.sqrt()).with_scale(1.0))
}

/// Joins two bordered unit-scale matrices through their cores:
/// `[[B, v xᵀ], [y uᵀ, C]]`, where `u`/`v` are the first row/column of
/// `left` without the corner, and likewise `x`/`y` for `right`.
fn assemble_cores(left: &RealMatrix, right: &RealMatrix) -> RealMatrix {
    let m = left.order() - 1;
    let n = right.order() - 1;
    RealMatrix::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
        (true, true) => left.get(i + 1, j + 1),
        (true, false) => left.get(i + 1, 0) * right.get(0, j - m + 1),
        (false, true) => right.get(i - m + 1, 0) * left.get(0, j + 1),
        (false, false) => right.get(i - m + 1, j - m + 1),
    })
    .with_scale(1.0)
}

/// OMZD(m+n) from an OMZD(m+1) and an OMZD(n+1). Both inputs must have
/// order at least 4.
pub fn combine(left: &RealMatrix, right: &RealMatrix) -> Result<RealMatrix, ConstructError> {
    // an order-2 input has a 1x1 zero core
    if let Some(small) = [left, right].into_iter().find(|m| m.order() < 4) {
        return Err(ConstructError::OrderTooSmall {
            order: small.order(),
            min: 4,
        });
    }
    let l = certified_unit_omzd(left, "left")?;
    let r = certified_unit_omzd(right, "right")?;
    Ok(assemble_cores(&l, &r))
}

/// Symmetric OMZD(2m) `[[A, B], [B, -A]]` with `A = J - I` and
/// `B = αI + βJ`, `α = √(m²-1)`, `β = (-√(m²-1) + √(2m-1))/m`.
pub fn symmetric_omzd(n: usize) -> Result<RealMatrix, ConstructError> {
    if n % 2 == 1 {
        return Err(ConstructError::OddOrder(n));
    }
    match n {
        0 => return Err(ConstructError::OrderTooSmall { order: 0, min: 2 }),
        2 => return seed(SeedKey::Omzd(2)),
        4 => return Err(ConstructError::OrderFour),
        _ => {}
    }
    check_order(n)?;
    let (alpha, beta) = symmetric_coefficients(n / 2);
    let m = n / 2;
    let out = RealMatrix::from_fn(n, n, |i, j| {
        let (bi, bj) = (i / m, j / m);
        let (ri, rj) = (i % m, j % m);
        if bi == bj {
            let a = if ri == rj { 0.0 } else { 1.0 };
            if bi == 0 {
                a
            } else if a == 0.0 {
                0.0
            } else {
                -a
            }
        } else if ri == rj {
            alpha + beta
        } else {
            beta
        }
    });
    Ok(out.with_scale((m * m) as f64))
}

/// `(α, β)` used by [`symmetric_omzd`] for half-order `m`.
pub fn symmetric_coefficients(m: usize) -> (f64, f64) {
    let mf = m as f64;
    let alpha = (mf * mf - 1.0).sqrt();
    let beta = (-alpha + (2.0 * mf - 1.0).sqrt()) / mf;
    (alpha, beta)
}

/// Paley tournament: arc `i → j` iff `aⱼ - aᵢ` is a nonzero square.
pub fn paley_tournament(q: u64) -> Result<IntMatrix, ConstructError> {
    check_order(usize::try_from(q).unwrap_or(usize::MAX))?;
    if odd_prime_power(q).is_none() {
        return Err(ConstructError::InvalidQ(q));
    }
    if q % 4 != 3 {
        return Err(ConstructError::QNotThreeModFour(q));
    }
    let field = FiniteField::of_order(q)?;
    Ok(IntMatrix::from_fn(q as usize, |i, j| {
        (field.chi_index(field.sub_index(j, i)) == 1) as i32
    }))
}

fn require_drt(t: &IntMatrix) -> Result<(), ConstructError> {
    if check_drt(t).passed {
        Ok(())
    } else {
        Err(ConstructError::NotDrt)
    }
}

/// Skew-Hadamard matrix `[[1, 1ᵀ], [-1, T - Tᵀ + I]]` of order `q + 1`.
pub fn drt_to_skew_hadamard(t: &IntMatrix) -> Result<IntMatrix, ConstructError> {
    require_drt(t)?;
    Ok(bordered_skew(t))
}

fn bordered_skew(t: &IntMatrix) -> IntMatrix {
    IntMatrix::from_fn(t.order() + 1, |i, j| match (i, j) {
        (0, _) => 1,
        (_, 0) => -1,
        _ if i == j => 1,
        _ => t.get(i - 1, j - 1) - t.get(j - 1, i - 1),
    })
}

/// DRT(2q+1) from a DRT(q), via the skew-Hadamard matrix
/// `[[H, H], [-Hᵀ, Hᵀ]]` of order `2q + 2`.
pub fn double_drt(t: &IntMatrix) -> Result<IntMatrix, ConstructError> {
    require_drt(t)?;
    check_order(2 * t.order() + 2)?;
    let h = bordered_skew(t);
    let n = h.order();
    let mut big = IntMatrix::from_fn(2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (ri, rj) = (i % n, j % n);
        match (bi, bj) {
            (0, _) => h.get(ri, rj),
            (1, 0) => -h.get(rj, ri),
            _ => h.get(rj, ri),
        }
    });
    // Normalize the border: whenever row 0 has -1 in column j, negate row
    // j and column j together, which keeps H + Hᵀ = 2I.
    let size = big.order();
    for j in 1..size {
        if big.get(0, j) == -1 {
            for t in 0..size {
                big.set(j, t, -big.get(j, t));
            }
            for t in 0..size {
                big.set(t, j, -big.get(t, j));
            }
        }
    }
    let sh = check_skew_hadamard(&big);
    if !sh.passed {
        return Err(ConstructError::Internal(format!(
            "doubled matrix failed the skew-Hadamard check: {}",
            sh.failures.join("; ")
        )));
    }
    let core = IntMatrix::from_fn(size - 1, |i, j| {
        (i != j && big.get(i + 1, j + 1) == 1) as i32
    });
    if !check_drt(&core).passed {
        return Err(ConstructError::Internal(
            "doubled tournament failed the DRT check".into(),
        ));
    }
    Ok(core)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    Plus,
    #[default]
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            _ => Err(format!("unknown branch {s:?}")),
        }
    }
}

/// `α = (-2/(q-3)) · (q - 2 ± √(q-2))`, which zeroes the `J` coefficient of
/// `MMᵀ` for `M = αA + J - I`.
pub fn drt_alpha(q: usize, branch: Branch) -> f64 {
    let qf = q as f64;
    let root = (qf - 2.0).sqrt();
    let inner = match branch {
        Branch::Plus => qf - 2.0 + root,
        Branch::Minus => qf - 2.0 - root,
    };
    -2.0 / (qf - 3.0) * inner
}

/// Scale `c = α²(q+1)/4 + α + 1` of `M = αA + J - I`.
pub fn drt_scale(q: usize, alpha: f64) -> f64 {
    alpha * alpha * (q as f64 + 1.0) / 4.0 + alpha + 1.0
}

/// OMZD(q) as `αA + J - I` from the adjacency matrix of a DRT(q), q ≥ 7.
pub fn omzd_from_drt(t: &IntMatrix, branch: Branch) -> Result<RealMatrix, ConstructError> {
    if t.order() == 3 {
        return Err(ConstructError::OrderThree);
    }
    require_drt(t)?;
    let q = t.order();
    let alpha = drt_alpha(q, branch);
    let m = RealMatrix::from_fn(q, q, |i, j| {
        if i == j {
            0.0
        } else if t.get(i, j) == 1 {
            alpha + 1.0
        } else {
            1.0
        }
    });
    Ok(m.with_scale(drt_scale(q, alpha)))
}

/// Orthogonal matrix with no zero entries: `[1]`, `[[1,1],[1,-1]]`, or
/// `I - (2/n)J` for `n ≥ 3`. All three are symmetric.
pub fn nowhere_zero_orthogonal(n: usize) -> Result<RealMatrix, ConstructError> {
    match n {
        0 => Err(ConstructError::OrderTooSmall { order: 0, min: 1 }),
        1 => Ok(RealMatrix::identity(1)),
        2 => Ok(real(&[&[1.0, 1.0], &[1.0, -1.0]]).with_scale(2.0)),
        _ => {
            check_order(n)?;
            let off = -2.0 / n as f64;
            Ok(
                RealMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + off } else { off })
                    .with_scale(1.0),
            )
        }
    }
}

/// Angles tried by [`reduce_zeros`]: `2^-t` radians for `t = 4..=40`.
pub fn theta_schedule() -> impl Iterator<Item = f64> {
    (4..=40).map(|t| 2f64.powi(-t))
}

/// Right-multiplies by a plane rotation on columns `p`, `q`:
/// column p ← p cosθ + q sinθ, column q ← -p sinθ + q cosθ.
fn rotate_columns(m: &RealMatrix, p: usize, q: usize, theta: f64) -> RealMatrix {
    let (s, c) = theta.sin_cos();
    let mut out = m.clone();
    for i in 0..m.rows() {
        let a = m.get(i, p);
        let b = m.get(i, q);
        out.set(i, p, a * c + b * s);
        out.set(i, q, -a * s + b * c);
    }
    out
}

/// Lowers the number of diagonal zeros of an OMPZD(n, j) to `target_k`
/// with plane rotations on pairs of columns.
///
/// Two zero diagonal positions are cleared per rotation; an odd remainder
/// is cleared by rotating one zero position together with a nonzero one.
/// Each step takes the first angle of [`theta_schedule`] for which all
/// entries of the two touched columns exceed `1e-8 · √c`.
pub fn reduce_zeros(m: &RealMatrix, target_k: usize) -> Result<RealMatrix, ConstructError> {
    let n = m.order();
    if n < 4 {
        return Err(ConstructError::OrderTooSmall { order: n, min: 4 });
    }
    let zeros: Vec<usize> = (0..n).filter(|&i| m.get(i, i) == 0.0).collect();
    let current = zeros.len();
    let cert = certify_default(m, Claim::Ompzd(current)).map_err(|_| ConstructError::NotOmpzd)?;
    if !cert.passed {
        return Err(ConstructError::NotOmpzd);
    }
    if target_k > current {
        return Err(ConstructError::TargetTooHigh {
            target: target_k,
            current,
        });
    }
    if target_k == current {
        return Ok(m.clone().with_scale(cert.scale_c));
    }
    if target_k >= n - 1 {
        return Err(ConstructError::TargetAboveReach { n, k: target_k });
    }

    let floor = 1e-8 * cert.scale_c.sqrt();
    let mut work = m.clone();
    let mut remaining = current - target_k;
    while remaining > 0 {
        let zero_pos: Vec<usize> = (0..n).filter(|&i| work.get(i, i) == 0.0).collect();
        let (p, q) = if remaining >= 2 {
            (zero_pos[0], zero_pos[1])
        } else {
            let nonzero = (0..n)
                .find(|&i| work.get(i, i) != 0.0)
                .ok_or(ConstructError::TargetAboveReach { n, k: target_k })?;
            (zero_pos[0], nonzero)
        };
        let mut accepted = None;
        for theta in theta_schedule() {
            let cand = rotate_columns(&work, p, q, theta);
            let ok = (0..n).all(|i| cand.get(i, p).abs() > floor && cand.get(i, q).abs() > floor);
            if ok {
                accepted = Some(cand);
                break;
            }
        }
        work = accepted.ok_or(ConstructError::NoThetaFound)?;
        remaining -= remaining.min(2);
    }
    Ok(work.with_scale(cert.scale_c))
}

/// OMPZD(n, n-1), built like [`combine`] from the OMPZD(4,3) seed (with its
/// nonzero diagonal entry moved off position (0,0)) and an OMZD(n-2).
///
/// `n = 1, 4, 5` return the trivial matrix or the catalog seeds directly.
pub fn ompzd_n_minus_1(n: usize) -> Result<RealMatrix, ConstructError> {
    if n < 6 {
        return ompzd_n_minus_1_from(n, &RealMatrix::identity(1));
    }
    check_order(n)?;
    ompzd_n_minus_1_from(n, &default_omzd(n - 2)?)
}

/// [`ompzd_n_minus_1`] with a caller-supplied OMZD(n-2). The OMZD is
/// ignored for `n < 6`.
pub fn ompzd_n_minus_1_from(n: usize, omzd: &RealMatrix) -> Result<RealMatrix, ConstructError> {
    match n {
        0 => return Err(ConstructError::OrderTooSmall { order: 0, min: 1 }),
        1 => return Ok(RealMatrix::identity(1)),
        2 | 3 => return Err(ConstructError::Nonexistent { n, k: n - 1 }),
        4 => return seed(SeedKey::Ompzd(4, 3)),
        5 => return seed(SeedKey::Ompzd(5, 4)),
        _ => {}
    }
    check_order(n)?;
    if omzd.order() != n - 2 {
        return Err(ConstructError::NotOmzd { which: "right" });
    }
    let base = seed(SeedKey::Ompzd(4, 3))?;
    // swap indices 0 and 1 so the (0,0) entry is zero
    let arranged = base.permuted_symmetric(&[1, 0, 2, 3]);
    let left = arranged.scaled(1.0 / base.scale_c().unwrap_or(4.0).sqrt());
    let right = certified_unit_omzd(omzd, "right")?;
    Ok(assemble_cores(&left, &right))
}

/// An OMZD(n): seeds where available, symmetric for even orders, the
/// (n-2)+4 recursion for odd ones.
pub fn default_omzd(n: usize) -> Result<RealMatrix, ConstructError> {
    match n {
        2 | 4 | 5 | 6 | 7 => seed(SeedKey::Omzd(n)),
        1 | 3 => Err(ConstructError::Nonexistent { n, k: n }),
        0 => Err(ConstructError::OrderTooSmall { order: 0, min: 2 }),
        _ if n.is_multiple_of(2) => symmetric_omzd(n),
        _ => {
            check_order(n)?;
            combine(&default_omzd(n - 2)?, &seed(SeedKey::Omzd(4))?)
        }
    }
}

/// Kronecker product. Scales multiply when both are known.
pub fn kron(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let out = RealMatrix::from_fn(ar * br, ac * bc, |i, j| {
        let x = a.get(i / br, j / bc);
        let y = b.get(i % br, j % bc);
        if x == 0.0 || y == 0.0 {
            0.0
        } else {
            x * y
        }
    });
    match (a.scale_c(), b.scale_c()) {
        (Some(c1), Some(c2)) => out.with_scale(c1 * c2),
        _ => out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gram;
    use crate::verify::Symmetry;

    #[test]
    fn seed_lookup() {
        assert_eq!(
            seed(SeedKey::Omzd(3)).unwrap_err(),
            ConstructError::NotInCatalog(SeedKey::Omzd(3))
        );
        let m = seed(SeedKey::Omzd(5)).unwrap();
        assert_eq!(m.get(1, 2), (-1.0 + 3f64.sqrt()) / 2.0);
        assert_eq!(m.scale_c(), Some(4.0));
        let m = seed(SeedKey::Ompzd(5, 4)).unwrap();
        let (phi, psi) = (m.get(1, 2), m.get(1, 4));
        let lin = 1.0 - 5f64.sqrt();
        for r in [phi, psi] {
            assert!((2.0 * r * r + lin * r - 1.0).abs() < 1e-14);
        }
        assert!(phi > psi);
    }

    #[test]
    fn paley_q5_core_row() {
        let c = paley_conference(5).unwrap();
        assert_eq!(c.to_rows()[1][1..], [0, 1, -1, -1, 1]);
        assert_eq!(c.to_rows()[0], vec![0, 1, 1, 1, 1, 1]);
        assert_eq!(c.transpose(), c);
    }

    #[test]
    fn paley_q7_is_skew() {
        let c = paley_conference(7).unwrap();
        let n = c.order();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(c.get(i, j), -c.get(j, i));
            }
        }
        let g = c.gram();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(g[i * n + j], if i == j { 7 } else { 0 });
            }
        }
    }

    #[test]
    fn paley_rejects_bad_q() {
        assert_eq!(
            paley_conference(15).unwrap_err(),
            ConstructError::InvalidQ(15)
        );
        assert_eq!(
            paley_conference(8).unwrap_err(),
            ConstructError::InvalidQ(8)
        );
        assert_eq!(
            paley_tournament(5).unwrap_err(),
            ConstructError::QNotThreeModFour(5)
        );
        assert_eq!(
            paley_tournament(21).unwrap_err(),
            ConstructError::InvalidQ(21)
        );
    }

    #[test]
    fn combine_rejects_small_or_invalid_inputs() {
        let two = seed(SeedKey::Omzd(2)).unwrap();
        let five = seed(SeedKey::Omzd(5)).unwrap();
        assert_eq!(
            combine(&two, &five).unwrap_err(),
            ConstructError::OrderTooSmall { order: 2, min: 4 }
        );
        let id = RealMatrix::identity(4);
        assert_eq!(
            combine(&id, &five).unwrap_err(),
            ConstructError::NotOmzd { which: "left" }
        );
    }

    #[test]
    fn combine_four_and_four() {
        let four = seed(SeedKey::Omzd(4)).unwrap();
        let six = combine(&four, &four).unwrap();
        assert_eq!(six.order(), 6);
        let cert = certify_default(&six, Claim::Omzd).unwrap();
        assert!(cert.passed, "{:?}", cert.failures);
        assert!((cert.scale_c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_six() {
        let m = symmetric_omzd(6).unwrap();
        let (alpha, beta) = symmetric_coefficients(3);
        assert_eq!(alpha, 8f64.sqrt());
        assert!((beta - (-(8f64.sqrt()) + 5f64.sqrt()) / 3.0).abs() < 1e-15);
        let cert = certify_default(&m, Claim::SymmetricOmzd).unwrap();
        assert!(cert.passed, "{:?}", cert.failures);
        assert!((cert.scale_c - 9.0).abs() < 1e-12);
        assert_eq!(cert.symmetry, Symmetry::Symmetric);
    }

    #[test]
    fn symmetric_errors() {
        assert_eq!(symmetric_omzd(4).unwrap_err(), ConstructError::OrderFour);
        assert_eq!(symmetric_omzd(7).unwrap_err(), ConstructError::OddOrder(7));
        assert_eq!(symmetric_omzd(2).unwrap(), seed(SeedKey::Omzd(2)).unwrap());
    }

    #[test]
    fn drt_alpha_for_fano() {
        let s5 = 5f64.sqrt();
        assert!((drt_alpha(7, Branch::Minus) + (5.0 - s5) / 2.0).abs() < 1e-15);
        assert!((drt_alpha(7, Branch::Plus) + (5.0 + s5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn omzd_from_drt_rejects_order_three_and_non_drt() {
        let cyc = IntMatrix::from_fn(3, |i, j| ((j + 3 - i) % 3 == 1) as i32);
        assert_eq!(
            omzd_from_drt(&cyc, Branch::Minus).unwrap_err(),
            ConstructError::OrderThree
        );
        let bad = IntMatrix::zeros(7);
        assert_eq!(
            omzd_from_drt(&bad, Branch::Minus).unwrap_err(),
            ConstructError::NotDrt
        );
        assert_eq!(double_drt(&bad).unwrap_err(), ConstructError::NotDrt);
        let jmi = IntMatrix::from_fn(3, |i, j| (i != j) as i32);
        assert_eq!(
            drt_to_skew_hadamard(&jmi).unwrap_err(),
            ConstructError::NotDrt
        );
    }

    #[test]
    fn nowhere_zero_small() {
        assert_eq!(nowhere_zero_orthogonal(1).unwrap().as_slice(), &[1.0]);
        let m3 = nowhere_zero_orthogonal(3).unwrap();
        assert!((m3.get(0, 0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((m3.get(0, 1) + 2.0 / 3.0).abs() < 1e-16);
        let m4 = nowhere_zero_orthogonal(4).unwrap();
        let g = gram(&m4);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn reduce_zeros_errors() {
        let six = symmetric_omzd(6).unwrap();
        assert_eq!(
            reduce_zeros(&six, 5).unwrap_err(),
            ConstructError::TargetAboveReach { n: 6, k: 5 }
        );
        let p = seed(SeedKey::Ompzd(4, 3)).unwrap();
        assert_eq!(
            reduce_zeros(&p, 4).unwrap_err(),
            ConstructError::TargetTooHigh {
                target: 4,
                current: 3
            }
        );
        let small = seed(SeedKey::Ompzd(3, 1)).unwrap();
        assert!(matches!(
            reduce_zeros(&small, 0),
            Err(ConstructError::OrderTooSmall { .. })
        ));
    }

    #[test]
    fn reduce_zeros_steps_on_omzd4() {
        let four = seed(SeedKey::Omzd(4)).unwrap();
        let two = reduce_zeros(&four, 2).unwrap();
        assert!(certify_default(&two, Claim::Ompzd(2)).unwrap().passed);
        let zero = reduce_zeros(&two, 0).unwrap();
        assert!(certify_default(&zero, Claim::Ompzd(0)).unwrap().passed);
        let five = seed(SeedKey::Omzd(5)).unwrap();
        let three = reduce_zeros(&five, 3).unwrap();
        assert!(certify_default(&three, Claim::Ompzd(3)).unwrap().passed);
    }

    #[test]
    fn ompzd_n_minus_1_small_orders() {
        assert_eq!(
            ompzd_n_minus_1(3).unwrap_err(),
            ConstructError::Nonexistent { n: 3, k: 2 }
        );
        let m = ompzd_n_minus_1(6).unwrap();
        assert!(certify_default(&m, Claim::Ompzd(5)).unwrap().passed);
    }

    #[test]
    fn kron_basics() {
        let i6 = kron(&RealMatrix::identity(2), &RealMatrix::identity(3));
        assert_eq!(i6.as_slice(), RealMatrix::identity(6).as_slice());
        let swap = seed(SeedKey::Omzd(2)).unwrap();
        assert_eq!(
            kron(&swap, &RealMatrix::identity(1)).as_slice(),
            swap.as_slice()
        );
    }
}
