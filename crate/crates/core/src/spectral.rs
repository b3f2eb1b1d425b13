//! Second adjacency eigenvalue of regular graphs and the expansion checks
//! built on it.
//!
//! Small graphs use a dense symmetric eigensolve. Larger ones run Lanczos
//! with full reorthogonalisation, keeping every Krylov vector orthogonal to
//! the all-ones vector; for a d-regular graph that vector spans the top
//! eigenspace, so the largest Ritz value on its complement is λ₂.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{Adjacency, DiGraph, Graph};
use crate::sampling::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Absolute tolerance on λ₂.
    pub tolerance: f64,
    /// Cap on matrix-vector products in the iterative solver.
    pub max_iterations: usize,
    /// Graphs with at most this many vertices use the dense solver.
    pub dense_cutoff: usize,
    /// Krylov basis size before an explicit restart.
    pub max_basis: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            tolerance: 1e-9,
            max_iterations: 100_000,
            dense_cutoff: 400,
            max_basis: 800,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub d: usize,
    pub lambda2: f64,
    pub tolerance: f64,
    pub girth_checked: Option<usize>,
    pub method: EigenMethod,
}

fn check_regular(g: &Graph, d: usize) -> Result<()> {
    if g.n() < 2 {
        return input_err("need at least two vertices");
    }
    match g.regular_degree() {
        Some(r) if r == d => Ok(()),
        Some(r) => input_err(format!("graph is {r}-regular, not {d}-regular")),
        None => input_err("graph is not regular"),
    }
}

pub fn second_eigenvalue(g: &Graph, d: usize) -> Result<SpectralCertificate> {
    second_eigenvalue_with(g, d, &SpectralConfig::default())
}

pub fn second_eigenvalue_with(
    g: &Graph,
    d: usize,
    config: &SpectralConfig,
) -> Result<SpectralCertificate> {
    check_regular(g, d)?;
    let (lambda2, method) = if g.n() <= config.dense_cutoff {
        (dense_second_eigenvalue(g), EigenMethod::Dense)
    } else {
        (lanczos_second_eigenvalue(g, config)?, EigenMethod::Lanczos)
    };
    Ok(SpectralCertificate {
        d,
        lambda2,
        tolerance: config.tolerance,
        girth_checked: None,
        method,
    })
}

fn adjacency_matrix(g: &Graph) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.n(), g.n());
    for &(u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

fn dense_second_eigenvalue(g: &Graph) -> f64 {
    let mut eig: Vec<f64> = SymmetricEigen::new(adjacency_matrix(g))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig[1]
}

/// Lanczos on the complement of the all-ones vector, restarted from the
/// current top Ritz vector whenever the basis fills up.
pub(crate) fn lanczos_second_eigenvalue(g: &Graph, config: &SpectralConfig) -> Result<f64> {
    let n = g.n();
    let ones = 1.0 / (n as f64).sqrt();
    let project = |x: &mut [f64]| {
        let s: f64 = x.iter().sum::<f64>() * ones;
        x.iter_mut().for_each(|xi| *xi -= s * ones);
    };
    let matvec = |x: &[f64], y: &mut [f64]| {
        for (v, yv) in y.iter_mut().enumerate() {
            *yv = g.neighbours(v).iter().map(|&w| x[w]).sum();
        }
    };

    // deterministic, generic start vector orthogonal to 1
    let stream = RngStream::new(0x5eed, n as u64, "lanczos-start");
    let mut start: Vec<f64> = (0..n).map(|i| stream.uniform(i as u64) - 0.5).collect();
    project(&mut start);

    let max_basis = config.max_basis.min(n - 1).max(1);
    let mut matvecs = 0usize;
    let mut last_theta = f64::NAN;
    loop {
        normalise(&mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        loop {
            let j = basis.len() - 1;
            matvec(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // full reorthogonalisation, twice for stability
            for _ in 0..2 {
                project(&mut w);
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = norm(&w);

            let steps = alpha.len();
            let check = steps == max_basis || b < 1e-12 || steps % 20 == 0;
            if check {
                let (theta, last_comp, top) = tridiagonal_top(&alpha, &beta);
                let residual = (b * last_comp).abs();
                let exhausted = b < 1e-12 || basis.len() + 1 >= n;
                if residual <= config.tolerance * 1e-2 || exhausted {
                    return Ok(theta);
                }
                if steps == max_basis {
                    // restart from the Ritz vector
                    let mut y = vec![0.0; n];
                    for (coef, q) in top.iter().zip(&basis) {
                        y.iter_mut().zip(q).for_each(|(yi, qi)| *yi += coef * qi);
                    }
                    project(&mut y);
                    if (theta - last_theta).abs() <= config.tolerance * 1e-2 {
                        return Ok(theta);
                    }
                    last_theta = theta;
                    start = y;
                    break;
                }
            }
            if matvecs >= config.max_iterations {
                return Err(Error::Numerical(format!(
                    "Lanczos did not converge within {} iterations",
                    config.max_iterations
                )));
            }
            beta.push(b);
            let next: Vec<f64> = w.iter().map(|x| x / b).collect();
            basis.push(next);
        }
    }
}

/// Largest eigenvalue of the symmetric tridiagonal matrix, the last
/// component of its eigenvector, and the eigenvector itself.
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> (f64, f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let v: DVector<f64> = eig.eigenvectors.column(idx).into();
    (theta, v[k - 1], v.iter().copied().collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalise(a: &mut [f64]) {
    let s = norm(a);
    a.iter_mut().for_each(|x| *x /= s);
}

/// The lower bound `(d − λ)|S|(n − |S|)/n` on the edge boundary of `S`.
pub fn alon_milman_lower_bound(d: f64, lambda2: f64, s_size: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (d - lambda2) * s_size as f64 * (n - s_size) as f64 / n as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

/// Largest vertex count checked over all subsets.
pub const EXHAUSTIVE_LIMIT: usize = 18;
/// Random subsets drawn in sampled mode.
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetViolation {
    pub set: Vec<usize>,
    pub boundary: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlonMilmanReport {
    pub n: usize,
    pub d: usize,
    pub lambda2: f64,
    pub mode: CheckMode,
    pub subsets_checked: u64,
    pub violation_count: u64,
    /// First few violating sets.
    pub violations: Vec<SubsetViolation>,
    /// Minimum of `|∇S| / bound` over sets with a positive bound.
    pub tightest_ratio: f64,
    pub tightest_set: Vec<usize>,
}

/// Draws a non-trivial subset: size uniform in `1..n`, then members uniform.
fn random_subset(n: usize, rng: &mut impl Rng, scratch: &mut Vec<usize>) -> Vec<usize> {
    let size = rng.gen_range(1..n);
    scratch.clear();
    scratch.extend(0..n);
    scratch.shuffle(rng);
    let mut s = scratch[..size].to_vec();
    s.sort_unstable();
    s
}

/// Checks `|∇S| ≥ (d − λ₂)|S|(n − |S|)/n` over every subset (n ≤ 18) or
/// over random subsets drawn from `stream`.
pub fn verify_alon_milman(g: &Graph, stream: &RngStream) -> Result<AlonMilmanReport> {
    let d = g
        .regular_degree()
        .ok_or_else(|| Error::Input("graph is not regular".into()))?;
    let cert = second_eigenvalue(g, d)?;
    let n = g.n();
    let lambda = cert.lambda2;
    // slack for the eigenvalue tolerance
    let slack = |bound: f64| 1e-9 * bound.max(1.0);

    let mut report = AlonMilmanReport {
        n,
        d,
        lambda2: lambda,
        mode: CheckMode::Exhaustive,
        subsets_checked: 0,
        violation_count: 0,
        violations: Vec::new(),
        tightest_ratio: f64::INFINITY,
        tightest_set: Vec::new(),
    };
    let mut record = |set: &dyn Fn() -> Vec<usize>, size: usize, boundary: usize| {
        report.subsets_checked += 1;
        let bound = alon_milman_lower_bound(d as f64, lambda, size, n);
        if (boundary as f64) < bound - slack(bound) {
            report.violation_count += 1;
            if report.violations.len() < 10 {
                report.violations.push(SubsetViolation {
                    set: set(),
                    boundary,
                    bound,
                });
            }
        }
        if bound > 0.0 {
            let ratio = boundary as f64 / bound;
            if ratio < report.tightest_ratio {
                report.tightest_ratio = ratio;
                report.tightest_set = set();
            }
        }
    };

    if n <= EXHAUSTIVE_LIMIT {
        let adj: Vec<u64> = (0..n)
            .map(|v| g.neighbours(v).iter().fold(0u64, |m, &w| m | 1 << w))
            .collect();
        for mask in 0u64..1 << n {
            let boundary: usize = (0..n)
                .filter(|&v| mask & (1 << v) != 0)
                .map(|v| (adj[v] & !mask).count_ones() as usize)
                .sum();
            let members = || (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            record(&members, mask.count_ones() as usize, boundary);
        }
    } else {
        let mut rng = stream.rng();
        let mut scratch = Vec::new();
        let mut inside = vec![false; n];
        for _ in 0..DEFAULT_SAMPLES {
            let set = random_subset(n, &mut rng, &mut scratch);
            set.iter().for_each(|&v| inside[v] = true);
            let boundary = set
                .iter()
                .map(|&v| g.neighbours(v).iter().filter(|&&w| !inside[w]).count())
                .sum();
            set.iter().for_each(|&v| inside[v] = false);
            record(&|| set.clone(), set.len(), boundary);
        }
    }
    report.mode = if n <= EXHAUSTIVE_LIMIT {
        CheckMode::Exhaustive
    } else {
        CheckMode::Sampled
    };
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCertificate {
    /// Minimum of `|∂S| / min(|S|, n − |S|)` over the checked sets.
    pub c3_hat: f64,
    pub mode: CheckMode,
    pub samples: Option<usize>,
    pub witness: Vec<usize>,
    pub witness_boundary: usize,
}

/// Measures the vertex expansion of a 2-regular digraph, exactly for
/// n ≤ 18 and over random subsets otherwise.
pub fn verify_vertex_expansion(h: &DiGraph, stream: &RngStream) -> Result<ExpansionCertificate> {
    verify_vertex_expansion_with(h, stream, DEFAULT_SAMPLES)
}

pub fn verify_vertex_expansion_with(
    h: &DiGraph,
    stream: &RngStream,
    samples: usize,
) -> Result<ExpansionCertificate> {
    let n = h.n();
    if n < 2 || !h.is_regular(2) {
        return input_err("vertex expansion is defined here for 2-regular digraphs");
    }
    let mut best = ExpansionCertificate {
        c3_hat: f64::INFINITY,
        mode: CheckMode::Exhaustive,
        samples: None,
        witness: Vec::new(),
        witness_boundary: 0,
    };
    let mut consider = |set: &dyn Fn() -> Vec<usize>, size: usize, boundary: usize| {
        let ratio = boundary as f64 / size.min(n - size) as f64;
        if ratio < best.c3_hat {
            best.c3_hat = ratio;
            best.witness = set();
            best.witness_boundary = boundary;
        }
    };
    if n <= EXHAUSTIVE_LIMIT {
        let out: Vec<u64> = (0..n)
            .map(|v| h.successors(v).iter().fold(0u64, |m, &w| m | 1 << w))
            .collect();
        for mask in 1u64..(1 << n) - 1 {
            let reach = (0..n)
                .filter(|&v| mask & (1 << v) != 0)
                .fold(0u64, |acc, v| acc | out[v]);
            let boundary = (reach & !mask).count_ones() as usize;
            let members = || (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            consider(&members, mask.count_ones() as usize, boundary);
        }
    } else {
        let mut rng = stream.rng();
        let mut scratch = Vec::new();
        let mut mark = vec![0u8; n];
        for _ in 0..samples {
            let set = random_subset(n, &mut rng, &mut scratch);
            set.iter().for_each(|&v| mark[v] = 1);
            let mut boundary = 0;
            for &v in &set {
                for &w in h.successors(v) {
                    if mark[w] == 0 {
                        mark[w] = 2;
                        boundary += 1;
                    }
                }
            }
            for &v in &set {
                mark[v] = 0;
                h.successors(v).iter().for_each(|&w| mark[w] = 0);
            }
            consider(&|| set.clone(), set.len(), boundary);
        }
        best.mode = CheckMode::Sampled;
        best.samples = Some(samples);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{vertex_boundary, VertexSet};

    /// Cyclic Jacobi eigenvalue iteration, independent of nalgebra.
    fn jacobi_eigenvalues(g: &Graph) -> Vec<f64> {
        let n = g.n();
        let mut a = vec![vec![0.0f64; n]; n];
        for &(u, v) in g.edges() {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        eig
    }

    fn random_regular(n: usize, d: usize, seed: u64) -> Graph {
        crate::generators::random_regular_graph(n, d, &RngStream::new(seed, 0, "test")).unwrap()
    }

    #[test]
    fn known_spectra() {
        let cases = [(Graph::petersen(), 3, 1.0), (Graph::cycle(6), 2, 1.0), (Graph::complete(4), 3, -1.0)];
        for (g, d, expect) in cases {
            let c = second_eigenvalue(&g, d).unwrap();
            assert!((c.lambda2 - expect).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn rejects_non_regular() {
        assert!(second_eigenvalue(&Graph::path(5), 2).is_err());
        assert!(second_eigenvalue(&Graph::petersen(), 4).is_err());
    }

    #[test]
    fn dense_and_lanczos_match_jacobi_oracle() {
        let lanczos = SpectralConfig {
            dense_cutoff: 0,
            ..SpectralConfig::default()
        };
        for (i, (n, d)) in [(20, 3), (50, 4), (120, 3), (200, 5)].into_iter().enumerate() {
            let g = random_regular(n, d, i as u64);
            let oracle = jacobi_eigenvalues(&g)[1];
            let dense = second_eigenvalue(&g, d).unwrap();
            let iter = second_eigenvalue_with(&g, d, &lanczos).unwrap();
            assert_eq!(dense.method, EigenMethod::Dense);
            assert_eq!(iter.method, EigenMethod::Lanczos);
            assert!((dense.lambda2 - oracle).abs() < 1e-7, "n={n} dense");
            assert!((iter.lambda2 - oracle).abs() < 1e-7, "n={n} lanczos {} vs {oracle}", iter.lambda2);
        }
        // negative λ₂: Lanczos must not report the deflated zero
        let k6 = Graph::complete(6);
        let iter = second_eigenvalue_with(&k6, 5, &lanczos).unwrap();
        assert!((iter.lambda2 + 1.0).abs() < 1e-9);
    }

    #[test]
    fn lanczos_matches_dense_above_cutoff() {
        let g = random_regular(600, 3, 77);
        let dense = SpectralConfig {
            dense_cutoff: 10_000,
            ..SpectralConfig::default()
        };
        let a = second_eigenvalue(&g, 3).unwrap();
        let b = second_eigenvalue_with(&g, 3, &dense).unwrap();
        assert_eq!(a.method, EigenMethod::Lanczos);
        assert!((a.lambda2 - b.lambda2).abs() < 1e-7, "{} vs {}", a.lambda2, b.lambda2);
    }

    #[test]
    fn alon_milman_bound_arithmetic() {
        assert_eq!(alon_milman_lower_bound(3.0, -1.0, 1, 4), 3.0);
        assert_eq!(alon_milman_lower_bound(2.0, 1.0, 3, 6), 1.5);
        assert_eq!(alon_milman_lower_bound(3.0, 1.0, 0, 10), 0.0);
    }

    #[test]
    fn alon_milman_exhaustive_examples() {
        let s = RngStream::new(0, 0, "am");
        let k4 = verify_alon_milman(&Graph::complete(4), &s).unwrap();
        assert_eq!(k4.subsets_checked, 16);
        assert_eq!(k4.violation_count, 0);
        // singletons meet the bound with equality
        assert!((k4.tightest_ratio - 1.0).abs() < 1e-9);

        let c6 = verify_alon_milman(&Graph::cycle(6), &s).unwrap();
        assert_eq!(c6.violation_count, 0);

        let r = verify_alon_milman(&random_regular(12, 3, 4), &s).unwrap();
        assert_eq!(r.mode, CheckMode::Exhaustive);
        assert_eq!(r.violation_count, 0);
    }

    #[test]
    fn alon_milman_sampled_mode() {
        let g = random_regular(40, 3, 2);
        let r = verify_alon_milman(&g, &RngStream::new(1, 0, "am")).unwrap();
        assert_eq!(r.mode, CheckMode::Sampled);
        assert_eq!(r.subsets_checked, DEFAULT_SAMPLES as u64);
        assert_eq!(r.violation_count, 0);
    }

    fn bidirected_triangle(offset: usize) -> Vec<(usize, usize)> {
        let (a, b, c) = (offset, offset + 1, offset + 2);
        vec![(a, b), (b, a), (b, c), (c, b), (a, c), (c, a)]
    }

    #[test]
    fn expansion_examples() {
        let s = RngStream::new(0, 0, "exp");
        let cycle = DiGraph::new(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        assert!(verify_vertex_expansion(&cycle, &s).is_err());

        let mut arcs = bidirected_triangle(0);
        arcs.extend(bidirected_triangle(3));
        let halves = DiGraph::new(6, arcs).unwrap();
        let cert = verify_vertex_expansion(&halves, &s).unwrap();
        assert_eq!(cert.c3_hat, 0.0);
        assert_eq!(cert.witness.len(), 3);
    }

    #[test]
    fn exhaustive_witness_reproduces_minimum() {
        let stream = RngStream::new(8, 0, "digraph");
        let h = crate::generators::random_two_regular_digraph(12, &stream).unwrap();
        let cert = verify_vertex_expansion(&h, &stream).unwrap();
        assert_eq!(cert.mode, CheckMode::Exhaustive);
        if h.is_strongly_connected() {
            assert!(cert.c3_hat > 0.0);
        }
        let w = VertexSet::from_iter_in(12, cert.witness.iter().copied());
        let boundary = vertex_boundary(&h, &w).unwrap().len();
        assert_eq!(boundary, cert.witness_boundary);
        let denom = w.len().min(12 - w.len()) as f64;
        assert_eq!(boundary as f64 / denom, cert.c3_hat);
    }
}
