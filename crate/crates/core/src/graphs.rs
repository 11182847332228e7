//! Graph families whose minimum number of distinct eigenvalues is 2,
//! certified by exhibiting an orthogonal matrix in S(G).

use std::collections::BTreeSet;
use std::fmt;

use crate::construct::{kron, nowhere_zero_orthogonal, seed, symmetric_omzd, SeedKey};
use crate::numerics::{
    cluster_eigenvalues, default_sweep_tol, jacobi_spectrum, NumericsError, RealMatrix,
};
use crate::planner::{execute, plan, Kind, PlanOptions};
use crate::verify::{certify_default, default_zero_tol, Claim};

/// Clustering tolerance for unit-scale spectra (eigenvalues ±1).
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    /// Complete bipartite `K_{n,n}`.
    Knn(usize),
    /// `K_{n,n}` minus the matching `{i, i'}` for `i < k`.
    Gnk { n: usize, k: usize },
    /// Complete multipartite graph with `parts` parts of size `part`.
    Multipartite { part: usize, parts: usize },
}

impl GraphSpec {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            GraphSpec::Knn(n) if n >= 1 => Ok(()),
            GraphSpec::Gnk { n, k } if n >= 1 && k <= n => Ok(()),
            GraphSpec::Multipartite { part, parts } if part >= 1 && parts >= 2 => Ok(()),
            _ => Err(format!("invalid graph parameters: {self}")),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match *self {
            GraphSpec::Knn(n) | GraphSpec::Gnk { n, .. } => 2 * n,
            GraphSpec::Multipartite { part, parts } => part * parts,
        }
    }

    /// Labeled graph. Bipartite families put `X = 0..n` and `Y = n..2n`.
    pub fn graph(&self) -> Graph {
        let mut g = Graph::empty(self.vertex_count());
        match *self {
            GraphSpec::Knn(n) => {
                for i in 0..n {
                    for j in 0..n {
                        g.add_edge(i, n + j);
                    }
                }
            }
            GraphSpec::Gnk { n, k } => {
                for i in 0..n {
                    for j in 0..n {
                        if !(i == j && i < k) {
                            g.add_edge(i, n + j);
                        }
                    }
                }
            }
            GraphSpec::Multipartite { part, parts } => {
                let v = part * parts;
                for i in 0..v {
                    for j in i + 1..v {
                        if i / part != j / part {
                            g.add_edge(i, j);
                        }
                    }
                }
            }
        }
        g
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphSpec::Knn(n) => write!(f, "K_{{{n},{n}}}"),
            GraphSpec::Gnk { n, k } => write!(f, "G_{{{n},{k}}}"),
            GraphSpec::Multipartite { part, parts } => write!(f, "K_{{{part}^{parts}}}"),
        }
    }
}

/// Simple labeled graph stored as an edge set with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    order: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn empty(order: usize) -> Self {
        Graph {
            order,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b && a < self.order && b < self.order);
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
}

/// The graph of a symmetric matrix: `i ~ j` iff `|A_ij| > zero_tol`; the
/// diagonal is ignored.
pub fn pattern_graph(a: &RealMatrix, zero_tol: f64) -> Result<Graph, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let asym = a.asymmetry();
    if asym > zero_tol {
        return Err(NumericsError::NonSymmetricInput {
            asymmetry: asym,
            tol: zero_tol,
        });
    }
    let n = a.order();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if a.get(i, j).abs() > zero_tol {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// `[[0, B], [Bᵀ, 0]]`.
pub fn embed_bipartite(b: &RealMatrix) -> RealMatrix {
    let (m, n) = (b.rows(), b.cols());
    let out = RealMatrix::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
        (true, false) => b.get(i, j - m),
        (false, true) => b.get(j, i - m),
        _ => 0.0,
    });
    match b.scale_c() {
        Some(c) if m == n => out.with_scale(c),
        _ => out,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Q2Status {
    Certified,
    KnownImpossible(String),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Q2Certificate {
    pub spec: GraphSpec,
    pub matrix: Option<RealMatrix>,
    pub distinct_eigenvalue_count: Option<usize>,
    pub pattern_verified: bool,
    pub status: Q2Status,
}

impl Q2Certificate {
    fn without_matrix(spec: GraphSpec, status: Q2Status) -> Self {
        Q2Certificate {
            spec,
            matrix: None,
            distinct_eigenvalue_count: None,
            pattern_verified: false,
            status,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status == Q2Status::Certified
    }
}

/// Moves the zero diagonal positions of a square matrix to the front by a
/// simultaneous row and column permutation.
fn zeros_first(b: &RealMatrix) -> RealMatrix {
    let n = b.order();
    let mut perm: Vec<usize> = (0..n).filter(|&i| b.get(i, i) == 0.0).collect();
    perm.extend((0..n).filter(|&i| b.get(i, i) != 0.0));
    b.permuted_symmetric(&perm)
}

fn orthogonal_for(spec: GraphSpec) -> Result<RealMatrix, Q2Status> {
    let fail = |e: &dyn fmt::Display| Q2Status::Unknown(format!("construction failed: {e}"));
    match spec {
        GraphSpec::Knn(n) | GraphSpec::Gnk { n, k: 0 } => Ok(embed_bipartite(
            &nowhere_zero_orthogonal(n).map_err(|e| fail(&e))?,
        )),
        GraphSpec::Gnk { n, k } => {
            match (n, k) {
                (1, 1) => {
                    return Err(Q2Status::KnownImpossible(
                        "G_1 has no edges, so q(G_1) = 1".into(),
                    ))
                }
                (2, 1) => {
                    return Err(Q2Status::KnownImpossible(
                        "G_{2,1} is the path on 4 vertices, so q = 4".into(),
                    ))
                }
                (3, 2) => return Err(Q2Status::Unknown("3 ≤ q(G_{3,2}) ≤ 4".into())),
                (3, 3) => {
                    return Err(Q2Status::KnownImpossible(
                        "G_3 is the cycle C_6 and q(C_6) = 3; no OMZD(3) exists".into(),
                    ))
                }
                _ => {}
            }
            let p = plan(Kind::Ompzd, n, Some(k), PlanOptions::default()).map_err(|e| fail(&e))?;
            let b = execute(&p).map_err(|e| fail(&e))?.matrix;
            Ok(embed_bipartite(&zeros_first(&b)))
        }
        GraphSpec::Multipartite { part, parts } => {
            if parts % 2 == 1 || parts == 4 {
                return Err(Q2Status::Unknown(format!(
                    "no construction for {parts} parts; q = 2 is conjectured for every complete multipartite graph"
                )));
            }
            let a = if parts == 2 {
                seed(SeedKey::Omzd(2))
            } else {
                symmetric_omzd(parts)
            }
            .map_err(|e| fail(&e))?;
            let b = nowhere_zero_orthogonal(part).map_err(|e| fail(&e))?;
            Ok(kron(&a, &b))
        }
    }
}

/// Certifies `q(G) = 2` by constructing a symmetric orthogonal matrix in
/// S(G), checking its graph against `spec` and counting its eigenvalues.
pub fn q2_certificate(spec: GraphSpec) -> Q2Certificate {
    if let Err(msg) = spec.validate() {
        return Q2Certificate::without_matrix(spec, Q2Status::Unknown(msg));
    }
    let matrix = match orthogonal_for(spec) {
        Ok(m) => m,
        Err(status) => return Q2Certificate::without_matrix(spec, status),
    };

    let tol = default_zero_tol(&matrix);
    let pattern_verified = pattern_graph(&matrix, tol).is_ok_and(|g| g == spec.graph());

    let cert = certify_default(&matrix, Claim::NowhereZeroOrthogonal).ok();
    let orthogonal = cert.as_ref().is_some_and(|c| {
        !c.has(|k| {
            matches!(
                k,
                crate::verify::ViolationKind::NotOrthogonal
                    | crate::verify::ViolationKind::NonPositiveScale
            )
        })
    });
    let scale = cert.map_or(1.0, |c| c.scale_c);
    let unit = matrix.scaled(1.0 / scale.sqrt());
    let count = jacobi_spectrum(&unit, default_sweep_tol(&unit))
        .ok()
        .map(|s| cluster_eigenvalues(&s, CLUSTER_TOL));

    let status = if pattern_verified && orthogonal && count == Some(2) {
        Q2Status::Certified
    } else {
        Q2Status::Unknown(format!(
            "verification failed (pattern {pattern_verified}, orthogonal {orthogonal}, eigenvalue clusters {count:?})"
        ))
    };
    Q2Certificate {
        spec,
        matrix: Some(matrix.with_scale(scale)),
        distinct_eigenvalue_count: count,
        pattern_verified,
        status,
    }
}
