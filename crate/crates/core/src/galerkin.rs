//! Truncated Galerkin model of the operator.
//!
//! Brute-force ground truth for every identity at desk scale: the operator
//! `(-Delta)^ell + q` is restricted to the orthonormalized cosine modes with
//! `|beta| <= cutoff` and diagonalized densely. Within this truncated model
//! the binding formula and the iteration identity are exact up to solver
//! residual, provided the mode of interest keeps enough margin from the
//! basis boundary that no coupling target falls outside.
//!
//! The coefficient table stores orthonormalized coefficients
//! `h(N, beta) = (chi_N, v_beta / ||v_beta||)`; the un-normalized pairing
//! `(chi_N, v_beta)` used by the series algebra is recovered through
//! [`EigenSolution::h_unnormalized`], which also folds arbitrary integer
//! indices onto their canonical representative (cosines are even, so
//! `v_beta` only depends on component magnitudes).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lattice::{BoxDomain, LatticeVector};
use crate::potential::PotentialSpec;
use crate::resonance::ResonanceParams;

pub const DEFAULT_MODE_CAP: usize = 4096;

/// Ordered mode list with per-mode normalizers `||v_beta||`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub domain: BoxDomain,
    pub cutoff: f64,
    modes: Vec<LatticeVector>,
    norms: Vec<f64>,
    index: BTreeMap<Vec<i64>, usize>,
}

impl SpectralBasis {
    pub fn modes(&self) -> &[LatticeVector] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `||v_beta||` for the mode at `i`.
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// Position of a canonical mode in the basis, if present.
    pub fn position(&self, v: &LatticeVector) -> Option<usize> {
        self.index.get(v.index()).copied()
    }
}

/// Canonical modes with `|beta| <= cutoff` and their normalizers.
pub fn build_basis(domain: &BoxDomain, cutoff: f64, cap: usize) -> Result<SpectralBasis> {
    if !(cutoff > 0.0) {
        return Err(Error::BasisTooLarge { count: 0, cap });
    }
    let modes = domain.enumerate_lattice(cutoff, true);
    if modes.len() > cap {
        return Err(Error::BasisTooLarge {
            count: modes.len(),
            cap,
        });
    }
    let norms: Vec<f64> = modes
        .iter()
        .map(|v| domain.basis_norm_sq(v).sqrt())
        .collect();
    let index = modes
        .iter()
        .enumerate()
        .map(|(i, v)| (v.index().to_vec(), i))
        .collect();
    Ok(SpectralBasis {
        domain: domain.clone(),
        cutoff,
        modes,
        norms,
        index,
    })
}

/// Product-to-sum expansion `v_delta v_beta = sum w_gamma v_gamma`.
///
/// Per axis, `cos(a x) cos(b x)` splits into `cos((a+b) x)` and
/// `cos((a-b) x)` with weight 1/2 each when both indices are nonzero, and
/// passes through unchanged when either is zero. Targets are canonicalized
/// to `B+` and equal targets aggregated. The identity is exact pointwise.
pub fn product_expand(delta: &LatticeVector, beta: &LatticeVector) -> Vec<(LatticeVector, f64)> {
    let d = delta.dimension();
    let mut acc: Vec<(Vec<i64>, f64)> = vec![(Vec::with_capacity(d), 1.0)];
    for axis in 0..d {
        let a = delta.index()[axis];
        let b = beta.index()[axis];
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (idx, w) in &acc {
            if a == 0 || b == 0 {
                let mut n = idx.clone();
                n.push((a + b).abs());
                next.push((n, *w));
            } else {
                let mut hi = idx.clone();
                hi.push((a + b).abs());
                next.push((hi, w * 0.5));
                let mut lo = idx.clone();
                lo.push((a - b).abs());
                next.push((lo, w * 0.5));
            }
        }
        acc = next;
    }
    let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (idx, w) in acc {
        *map.entry(idx).or_insert(0.0) += w;
    }
    map.into_iter()
        .map(|(idx, w)| (LatticeVector::new(idx), w))
        .collect()
}

/// Matrix of `(-Delta)^ell + q` in the orthonormalized truncated basis.
///
/// The diagonal carries `|beta|^2ell`; the potential block is assembled
/// exactly through [`product_expand`] and the orbit-constant coefficients,
/// entry `(gamma, beta) = sum_reps |A_rho| q_rho w_gamma(rho, beta)
/// ||v_gamma|| / ||v_beta||`.
pub fn assemble(basis: &SpectralBasis, q: &PotentialSpec, ell: f64) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let mut h = DMatrix::zeros(n, n);
    for (col, beta) in basis.modes().iter().enumerate() {
        h[(col, col)] = basis.domain.frac_norm(beta, ell)?;
        for (rho, c) in q.representatives() {
            let weight = rho.orbit_size() as f64 * c;
            for (gamma, w) in product_expand(rho, beta) {
                if let Some(row) = basis.position(&gamma) {
                    h[(row, col)] += weight * w * basis.norm(row) / basis.norm(col);
                }
            }
        }
    }
    Ok(h)
}

/// Full spectral data of one solve.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub domain: BoxDomain,
    pub cutoff: f64,
    modes: Vec<LatticeVector>,
    norms: Vec<f64>,
    index: BTreeMap<Vec<i64>, usize>,
    /// Ascending eigenvalues `xi_1 <= ... <= xi_M`.
    pub eigenvalues: Vec<f64>,
    /// Column `N` holds the orthonormalized coefficients `h(N, .)`.
    coeffs: DMatrix<f64>,
}

/// Matched eigenpair for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenMatch {
    pub n: usize,
    pub xi: f64,
    /// Orthonormalized coefficient `h(N, beta)`.
    pub h: f64,
    pub window_halfwidth: f64,
    /// Indices of every eigenvalue inside the window (degenerate clusters
    /// show up here).
    pub candidates: Vec<usize>,
}

/// Dense symmetric eigensolve of an assembled matrix.
///
/// Eigenvalues are returned ascending with the eigenvector columns permuted
/// to match; every pair is residual-checked against the input matrix.
pub fn solve(basis: &SpectralBasis, matrix: &DMatrix<f64>) -> Result<EigenSolution> {
    let n = matrix.nrows();
    let asym = (matrix - matrix.transpose()).abs().max();
    let scale = matrix.abs().max().max(1.0);
    if asym > 1e-12 * scale {
        return Err(Error::ConvergenceFailure(format!(
            "matrix not symmetric: max asymmetry {asym}"
        )));
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || matrix[(i, j)] == 0.0));
    let (raw_values, raw_vectors) = if diagonal {
        // the free operator stays exact: no iteration touches a diagonal input
        (
            (0..n).map(|i| matrix[(i, i)]).collect::<Vec<f64>>(),
            DMatrix::identity(n, n),
        )
    } else {
        let eig = SymmetricEigen::new(matrix.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut coeffs = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        coeffs.set_column(new, &raw_vectors.column(old));
    }
    for (k, &xi) in eigenvalues.iter().enumerate() {
        let v = coeffs.column(k);
        let residual = (matrix * v - xi * v).norm();
        if residual > 1e-9 * (1.0 + xi.abs()) {
            return Err(Error::ConvergenceFailure(format!(
                "residual {residual} for eigenvalue {xi}"
            )));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::ConvergenceFailure(format!(
                "eigenvector norm {norm} for eigenvalue {xi}"
            )));
        }
    }
    Ok(EigenSolution {
        domain: basis.domain.clone(),
        cutoff: basis.cutoff,
        modes: basis.modes().to_vec(),
        norms: (0..basis.len()).map(|i| basis.norm(i)).collect(),
        index: basis
            .modes()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.index().to_vec(), i))
            .collect(),
        eigenvalues,
        coeffs,
    })
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn modes(&self) -> &[LatticeVector] {
        &self.modes
    }

    pub fn position(&self, v: &LatticeVector) -> Option<usize> {
        self.index.get(v.index()).copied()
    }

    /// Orthonormalized coefficient `h(N, beta)` for a basis mode.
    pub fn h(&self, n: usize, mode_position: usize) -> f64 {
        self.coeffs[(mode_position, n)]
    }

    /// Un-normalized pairing `(chi_N, v_delta)` for an arbitrary integer
    /// index: folds to the canonical representative and rescales by
    /// `||v_canon||`. `None` when the target lies outside the basis.
    pub fn h_unnormalized(&self, n: usize, raw_index: &[i64]) -> Option<f64> {
        let canon = LatticeVector::new(raw_index.to_vec()).canonical();
        let pos = self.position(&canon)?;
        Some(self.coeffs[(pos, n)] * self.norms[pos])
    }

    /// `||v_beta||` for a basis position.
    pub fn mode_norm(&self, pos: usize) -> f64 {
        self.norms[pos]
    }

    /// Margin rule: matching and identity checks are only offered for modes
    /// at distance `margin` inside the cutoff, where the truncated model is
    /// faithful.
    pub fn is_interior(&self, beta: &LatticeVector, margin: f64) -> bool {
        self.position(beta)
            .map(|_| self.domain.norm(beta) <= self.cutoff - margin)
            .unwrap_or(false)
    }
}

/// Picks, among eigenvalues with `|xi - |beta|^2ell| < halfwidth`, the one
/// whose coefficient on `beta` has the largest magnitude.
pub fn match_in_window(
    solution: &EigenSolution,
    beta: &LatticeVector,
    ell: f64,
    halfwidth: f64,
) -> Result<EigenMatch> {
    let pos = solution.position(beta).ok_or(Error::NoMatchedEigenpair)?;
    let lambda = solution.domain.frac_norm(beta, ell)?;
    let candidates: Vec<usize> = (0..solution.len())
        .filter(|&n| (solution.eigenvalues[n] - lambda).abs() < halfwidth)
        .collect();
    let best = candidates
        .iter()
        .copied()
        .max_by(|&a, &b| {
            solution
                .h(a, pos)
                .abs()
                .total_cmp(&solution.h(b, pos).abs())
        })
        .ok_or(Error::NoEigenvalueInWindow { halfwidth })?;
    Ok(EigenMatch {
        n: best,
        xi: solution.eigenvalues[best],
        h: solution.h(best, pos),
        window_halfwidth: halfwidth,
        candidates,
    })
}

/// Matching with the window `|xi - |beta|^2ell| < threshold / 2` taken from
/// the classification parameters.
pub fn match_eigenvalue(
    solution: &EigenSolution,
    beta: &LatticeVector,
    params: &ResonanceParams,
) -> Result<EigenMatch> {
    match_in_window(solution, beta, params.ell, 0.5 * params.threshold)
}

/// Residual of the binding formula
/// `(xi_N - |beta|^2ell)(chi_N, v_beta) = (chi_N, q v_beta)` for the matched
/// pair, computed with un-normalized pairings. Returns the residual and a
/// tail flag set when any coupling target fell outside the basis.
pub fn binding_residual(
    solution: &EigenSolution,
    q: &PotentialSpec,
    beta: &LatticeVector,
    n: usize,
    ell: f64,
) -> Result<(f64, bool)> {
    let h_beta = solution
        .h_unnormalized(n, beta.index())
        .ok_or(Error::NoMatchedEigenpair)?;
    let lambda = solution.domain.frac_norm(beta, ell)?;
    let xi = solution.eigenvalues[n];
    let mut rhs = 0.0;
    let mut tail = false;
    for (rho, c) in q.representatives() {
        for member in rho.orbit_members() {
            let target = beta.add(&member);
            match solution.h_unnormalized(n, target.index()) {
                Some(h) => rhs += c * h,
                None => tail = true,
            }
        }
    }
    Ok((((xi - lambda) * h_beta - rhs).abs(), tail))
}

/// Splits the Parseval mass of mode `beta` into the part carried by
/// eigenvalues inside the window and the rest. In the truncated model the
/// two parts sum to 1 exactly (the coefficient table is orthogonal).
pub fn parseval_check(
    solution: &EigenSolution,
    beta: &LatticeVector,
    ell: f64,
    halfwidth: f64,
) -> Result<(f64, f64)> {
    let pos = solution.position(beta).ok_or(Error::NoMatchedEigenpair)?;
    let lambda = solution.domain.frac_norm(beta, ell)?;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for n in 0..solution.len() {
        let mass = solution.h(n, pos) * solution.h(n, pos);
        if (solution.eigenvalues[n] - lambda).abs() <= halfwidth {
            inside += mass;
        } else {
            outside += mass;
        }
    }
    Ok((inside, outside))
}

/// Counts free eigenvalues `|beta|^2ell` (over `B+`) inside
/// `(a^2ell - 1, a^2ell + 1)`; their number grows like `r^(d - 2ell)`.
pub fn free_window_count(domain: &BoxDomain, ell: f64, a: f64) -> Result<usize> {
    let center = crate::lattice::frac_power(a * a, ell);
    let hi = (center + 1.0).powf(1.0 / (2.0 * ell));
    crate::lattice::check_order(ell)?;
    Ok(domain
        .enumerate_lattice(hi + 1.0, true)
        .into_iter()
        .filter(|v| {
            let mu = crate::lattice::frac_power(domain.norm_sq(v), ell);
            mu > center - 1.0 && mu < center + 1.0
        })
        .count())
}

/// Largest distance between the sorted perturbed and free spectra; bounded
/// by the potential mass for every solve.
pub fn spectrum_pairing_distance(solution: &EigenSolution, free: &EigenSolution) -> f64 {
    solution
        .eigenvalues
        .iter()
        .zip(&free.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::two_cosine_potential;

    fn square_box() -> BoxDomain {
        BoxDomain::new(vec![std::f64::consts::PI, std::f64::consts::PI]).unwrap()
    }

    fn generic_box() -> BoxDomain {
        BoxDomain::new(vec![
            std::f64::consts::PI,
            std::f64::consts::PI / 2f64.sqrt(),
        ])
        .unwrap()
    }

    #[test]
    fn basis_examples() {
        let b = square_box();
        assert_eq!(build_basis(&b, 1.5, DEFAULT_MODE_CAP).unwrap().len(), 4);
        assert_eq!(build_basis(&b, 0.5, DEFAULT_MODE_CAP).unwrap().len(), 1);
        assert!(matches!(
            build_basis(&b, 100.0, 64),
            Err(Error::BasisTooLarge { .. })
        ));
    }

    #[test]
    fn product_expand_examples() {
        // 1-D flavor on a 2-D lattice: second axis zero
        let d = LatticeVector::new(vec![2, 0]);
        let bta = LatticeVector::new(vec![3, 0]);
        let exp = product_expand(&d, &bta);
        assert_eq!(
            exp,
            vec![
                (LatticeVector::new(vec![1, 0]), 0.5),
                (LatticeVector::new(vec![5, 0]), 0.5)
            ]
        );

        let zero = LatticeVector::zero(2);
        let arb = LatticeVector::new(vec![4, 7]);
        assert_eq!(product_expand(&zero, &arb), vec![(arb.clone(), 1.0)]);

        let e1 = LatticeVector::new(vec![1, 0]);
        let exp2 = product_expand(&e1, &e1);
        assert_eq!(
            exp2,
            vec![
                (LatticeVector::new(vec![0, 0]), 0.5),
                (LatticeVector::new(vec![2, 0]), 0.5)
            ]
        );
    }

    #[test]
    fn product_expand_is_pointwise_exact() {
        let b = generic_box();
        let delta = LatticeVector::new(vec![2, 1]);
        let beta = LatticeVector::new(vec![1, 3]);
        let expansion = product_expand(&delta, &beta);
        let dc = b.components(&delta);
        let bc = b.components(&beta);
        for k in 0..50 {
            let x = [
                b.sides()[0] * (k as f64 + 0.3) / 50.4,
                b.sides()[1] * (k as f64 * 0.61 % 1.0),
            ];
            let lhs = (dc[0] * x[0]).cos()
                * (dc[1] * x[1]).cos()
                * (bc[0] * x[0]).cos()
                * (bc[1] * x[1]).cos();
            let rhs: f64 = expansion
                .iter()
                .map(|(g, w)| {
                    let gc = b.components(g);
                    w * (gc[0] * x[0]).cos() * (gc[1] * x[1]).cos()
                })
                .sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn assemble_free_is_diagonal() {
        let b = square_box();
        let basis = build_basis(&b, 3.0, DEFAULT_MODE_CAP).unwrap();
        let h = assemble(&basis, &PotentialSpec::zero(0), 0.75).unwrap();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    let expect = b.frac_norm(&basis.modes()[i], 0.75).unwrap();
                    assert_eq!(h[(i, j)], expect);
                } else {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn assemble_cosine_coupling_entry() {
        // entry between (0,0) and (1,0) for q = cos x1 is 1/sqrt(2)
        let b = square_box();
        let basis = build_basis(&b, 2.5, DEFAULT_MODE_CAP).unwrap();
        let q = PotentialSpec::new(vec![(LatticeVector::new(vec![1, 0]), 0.5)], 0).unwrap();
        let h = assemble(&basis, &q, 0.75).unwrap();
        let i0 = basis.position(&LatticeVector::new(vec![0, 0])).unwrap();
        let i1 = basis.position(&LatticeVector::new(vec![1, 0])).unwrap();
        assert!((h[(i0, i1)] - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((h[(i1, i0)] - 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn assembled_matrix_is_symmetric() {
        let b = generic_box();
        let basis = build_basis(&b, 6.0, DEFAULT_MODE_CAP).unwrap();
        let q = PotentialSpec::new(
            vec![
                (LatticeVector::new(vec![1, 0]), 0.5),
                (LatticeVector::new(vec![0, 1]), 0.5),
                (LatticeVector::new(vec![1, 1]), 0.25),
            ],
            2,
        )
        .unwrap();
        let h = assemble(&basis, &q, 0.8).unwrap();
        let asym = (&h - h.transpose()).abs().max();
        assert!(asym <= 1e-13, "asymmetry {asym}");
    }

    #[test]
    fn solve_examples() {
        let b = square_box();
        let basis = build_basis(&b, 1.5, DEFAULT_MODE_CAP).unwrap();
        // diagonal input
        let h = assemble(&basis, &PotentialSpec::zero(0), 0.75).unwrap();
        let sol = solve(&basis, &h).unwrap();
        let mut expect: Vec<f64> = basis
            .modes()
            .iter()
            .map(|m| b.frac_norm(m, 0.75).unwrap())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, e) in sol.eigenvalues.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-12);
        }

        // 2x2 flip
        let two = build_basis(&b, 1.0001, DEFAULT_MODE_CAP).unwrap();
        assert_eq!(two.len(), 3);
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        let sol2 = solve(&two, &m).unwrap();
        assert!((sol2.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((sol2.eigenvalues[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_solve_exact_at_cutoff_20() {
        let b = square_box();
        let basis = build_basis(&b, 20.0, DEFAULT_MODE_CAP).unwrap();
        let h = assemble(&basis, &PotentialSpec::zero(0), 0.75).unwrap();
        let sol = solve(&basis, &h).unwrap();
        let mut frees: Vec<f64> = basis
            .modes()
            .iter()
            .map(|m| b.frac_norm(m, 0.75).unwrap())
            .collect();
        frees.sort_by(f64::total_cmp);
        for (xi, free) in sol.eigenvalues.iter().zip(&frees) {
            assert!((xi - free).abs() <= 1e-10);
        }
    }

    #[test]
    fn matching_and_parseval() {
        let b = generic_box();
        let basis = build_basis(&b, 15.0, DEFAULT_MODE_CAP).unwrap();
        let beta = LatticeVector::new(vec![2, 1]);
        let lambda = b.frac_norm(&beta, 0.75).unwrap();

        // free case: exact match with h = +-1
        let free = solve(
            &basis,
            &assemble(&basis, &PotentialSpec::zero(0), 0.75).unwrap(),
        )
        .unwrap();
        let m = match_in_window(&free, &beta, 0.75, 0.5).unwrap();
        assert!((m.xi - lambda).abs() < 1e-12);
        assert!((m.h.abs() - 1.0).abs() < 1e-12);
        let (inside, outside) = parseval_check(&free, &beta, 0.75, 0.5).unwrap();
        assert!((inside - 1.0).abs() < 1e-12);
        assert!(outside.abs() < 1e-12);

        // width-zero window
        let q = two_cosine_potential(0.05, 2);
        let sol = solve(&basis, &assemble(&basis, &q, 0.75).unwrap()).unwrap();
        assert!(matches!(
            match_in_window(&sol, &beta, 0.75, 0.0),
            Err(Error::NoEigenvalueInWindow { .. })
        ));
        let (inside0, _) = parseval_check(&sol, &beta, 0.75, 0.0).unwrap();
        assert_eq!(inside0, 0.0);

        // perturbed match dominates
        let m2 = match_in_window(&sol, &beta, 0.75, 0.5).unwrap();
        assert!(m2.h * m2.h >= 0.5);
        let (inside2, outside2) = parseval_check(&sol, &beta, 0.75, 0.5).unwrap();
        assert!(inside2 >= 0.99);
        assert!((inside2 + outside2 - 1.0).abs() < 1e-10);

        // coefficient columns stay orthonormal
        for (a, c) in [(0usize, 0usize), (0, 1), (3, 7), (5, 5)] {
            let dot: f64 = (0..sol.len())
                .map(|pos| sol.h(a, pos) * sol.h(c, pos))
                .sum();
            let expect = if a == c { 1.0 } else { 0.0 };
            assert!((dot - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn binding_residual_cases() {
        let b = generic_box();
        let basis = build_basis(&b, 15.0, DEFAULT_MODE_CAP).unwrap();
        let beta = LatticeVector::new(vec![2, 1]);

        let free = solve(
            &basis,
            &assemble(&basis, &PotentialSpec::zero(0), 0.75).unwrap(),
        )
        .unwrap();
        let mf = match_in_window(&free, &beta, 0.75, 0.5).unwrap();
        let (res0, tail0) =
            binding_residual(&free, &PotentialSpec::zero(0), &beta, mf.n, 0.75).unwrap();
        assert_eq!(res0, 0.0);
        assert!(!tail0);

        let q = two_cosine_potential(0.05, 2);
        let sol = solve(&basis, &assemble(&basis, &q, 0.75).unwrap()).unwrap();
        let m = match_in_window(&sol, &beta, 0.75, 0.5).unwrap();
        let (res, tail) = binding_residual(&sol, &q, &beta, m.n, 0.75).unwrap();
        assert!(res <= 1e-8, "residual {res}");
        assert!(!tail);

        // a mode hugging the boundary picks up the tail flag
        let edge = LatticeVector::new(vec![15, 0]);
        let me = match_in_window(&sol, &edge, 0.75, 0.5).unwrap();
        let (_, tail_edge) = binding_residual(&sol, &q, &edge, me.n, 0.75).unwrap();
        assert!(tail_edge);
        assert!(!sol.is_interior(&edge, q.support_radius(&b)));
        assert!(sol.is_interior(&beta, q.support_radius(&b)));
    }

    #[test]
    fn kato_pairing_and_continuity() {
        let b = generic_box();
        let basis = build_basis(&b, 10.0, DEFAULT_MODE_CAP).unwrap();
        let free = solve(
            &basis,
            &assemble(&basis, &PotentialSpec::zero(0), 0.75).unwrap(),
        )
        .unwrap();
        for eps in [0.05, 0.1] {
            let q = two_cosine_potential(eps, 2);
            let sol = solve(&basis, &assemble(&basis, &q, 0.75).unwrap()).unwrap();
            let dist = spectrum_pairing_distance(&sol, &free);
            assert!(dist <= q.mass(), "pairing {dist} vs mass {}", q.mass());
        }
        // eigenvalues continuous in eps: eps and eps/2 pair within 2 eps mass(q0)
        let q1 = two_cosine_potential(0.1, 2);
        let q2 = two_cosine_potential(0.05, 2);
        let s1 = solve(&basis, &assemble(&basis, &q1, 0.75).unwrap()).unwrap();
        let s2 = solve(&basis, &assemble(&basis, &q2, 0.75).unwrap()).unwrap();
        let dist = spectrum_pairing_distance(&s1, &s2);
        assert!(dist <= 2.0 * 0.1 * two_cosine_potential(1.0, 2).mass());
    }

    #[test]
    fn coefficient_product_identity_pointwise() {
        // sum_d q_d v_d(x) v_beta(x) = sum_d q_d v_(beta+d)(x) at random points
        let b = generic_box();
        let q = two_cosine_potential(0.6, 2);
        let beta = LatticeVector::new(vec![4, 3]);
        let bc = b.components(&beta);
        let mut state = 1234567u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(99);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let x = [next() * b.sides()[0], next() * b.sides()[1]];
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for (rho, c) in q.representatives() {
                for member in rho.orbit_members() {
                    let mc = b.components(&member);
                    lhs += c
                        * (mc[0] * x[0]).cos()
                        * (mc[1] * x[1]).cos()
                        * (bc[0] * x[0]).cos()
                        * (bc[1] * x[1]).cos();
                    let t = beta.add(&member);
                    let tc = b.components(&t);
                    rhs += c * (tc[0] * x[0]).cos() * (tc[1] * x[1]).cos();
                }
            }
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn window_count_scaling() {
        let b = square_box();
        let c1 = free_window_count(&b, 0.75, 30.0).unwrap();
        let c2 = free_window_count(&b, 0.75, 60.0).unwrap();
        let ratio = c2 as f64 / c1 as f64;
        let expected = 2f64.powf(2.0 - 2.0 * 0.75);
        assert!(
            ratio / expected <= 2.0 && ratio / expected >= 0.5,
            "ratio {ratio}"
        );
    }
}
