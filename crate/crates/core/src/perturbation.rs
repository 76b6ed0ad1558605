//! Iteration series and the eigenvalue predictor.
//!
//! Pairing the eigenvalue equation with a free mode `v_beta` gives the exact
//! binding formula `(xi - |beta|^2l)(chi, v_beta) = (chi, q v_beta)`.
//! Re-expanding the right side repeatedly and isolating, at every step, the
//! terms whose coefficient is `(chi, v_beta)` itself produces the iteration
//! identity
//!
//! ```text
//! (xi - |beta|^2l) h(beta) = sum_{i=1..p1} S_i(xi) h(beta) + C_p1(xi, h)
//! ```
//!
//! where the `j`-th series term sums over coefficient tuples
//! `(b_1, ..., b_{j+1})` from the ball `B(r^alpha)`:
//!
//! ```text
//! S_j(xi) = sum  q_{b_1} ... q_{b_j+1}
//!                / prod_{i=1..j} (xi - |beta + b_1 + ... + b_i|^2l)
//! ```
//!
//! The tuple constraints make the isolation bookkeeping exact: the full sum
//! `b_1 + ... + b_{j+1}` vanishes while every proper partial sum is nonzero
//! (partial sums index the denominators, which the iteration condition keeps
//! away from zero). The closed form of the first correction,
//! `F_1 = sum |q_b|^2 / (|beta|^2l - |beta+b|^2l)`, is recovered exactly
//! under this rule, which anchors the interpretation. The remainder `C_p1`
//! carries the complementary tuples, whose totals do not vanish, against
//! coefficients `h(beta + total)` taken from a Galerkin solve.
//!
//! The predictor sequence is `F_0 = 0`,
//! `F_k = sum_{i=1..k} S_i(|beta|^2l + F_{k-1})`, and the eigenvalue forecast
//! at depth `k` is `|beta|^2l + F_{k-1}`.

use crate::error::{Error, Result};
use crate::galerkin::EigenSolution;
use crate::lattice::{BoxDomain, LatticeVector};
use crate::potential::PotentialSpec;
use crate::resonance::ResonanceParams;

/// Iteration condition `|xi - |beta|^2l| > threshold / 2` licensing division
/// by the series denominators.
pub fn iteration_condition(
    domain: &BoxDomain,
    xi: f64,
    beta: &LatticeVector,
    params: &ResonanceParams,
) -> Result<bool> {
    let lambda = domain.frac_norm(beta, params.ell)?;
    Ok((xi - lambda).abs() > 0.5 * params.threshold)
}

/// One evaluated series term with its denominator diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub value: f64,
    /// Smallest denominator magnitude met while summing; infinite when no
    /// tuple was admissible.
    pub min_denominator: f64,
    /// True when every denominator satisfied the iteration condition.
    pub iteration_ok: bool,
}

/// Members of the coefficient ball `B(r^alpha)` carrying nonzero weight,
/// lexicographic. Tuples are enumerated over this list, so the summation
/// order is reproducible.
fn coefficient_ball(
    domain: &BoxDomain,
    q: &PotentialSpec,
    params: &ResonanceParams,
) -> Vec<(LatticeVector, f64)> {
    let radius = params.perturbation_radius;
    let r2 = radius * radius;
    let mut out: Vec<(LatticeVector, f64)> = Vec::new();
    for (rep, c) in q.representatives() {
        if domain.norm_sq(rep) < r2 {
            for member in rep.orbit_members() {
                out.push((member, c));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Per-axis reachability bound: the largest index magnitude the remaining
/// steps can still cancel.
fn axis_caps(ball: &[(LatticeVector, f64)], d: usize) -> Vec<i64> {
    let mut caps = vec![0i64; d];
    for (v, _) in ball {
        for (axis, &n) in v.index().iter().enumerate() {
            caps[axis] = caps[axis].max(n.abs());
        }
    }
    caps
}

struct TupleSum<'a> {
    domain: &'a BoxDomain,
    ball: &'a [(LatticeVector, f64)],
    caps: Vec<i64>,
    ell: f64,
    xi: f64,
    beta: &'a LatticeVector,
    half_threshold: f64,
    value: f64,
    min_den: f64,
    iteration_ok: bool,
}

impl TupleSum<'_> {
    /// Depth-first accumulation of `S_j`: chooses `b_1..b_j` freely subject
    /// to nonzero partial sums and reachability, then closes the tuple with
    /// the forced `b_{j+1} = -(b_1 + ... + b_j)`.
    fn series_tuples(
        &mut self,
        depth_left: usize,
        partial: &LatticeVector,
        coeff_prod: f64,
        den_prod: f64,
        stack: &mut Vec<Vec<i64>>,
    ) -> Result<()> {
        if depth_left == 0 {
            let closer = partial.neg();
            let c = lookup(self.ball, &closer);
            if c != 0.0 {
                self.value += coeff_prod * c / den_prod;
            }
            return Ok(());
        }
        for (b, c) in self.ball {
            let sum = partial.add(b);
            if sum.is_zero() {
                continue; // proper partial sums never vanish
            }
            // remaining steps must still be able to cancel the running sum
            let reachable = sum
                .index()
                .iter()
                .zip(&self.caps)
                .all(|(&s, &cap)| s.abs() <= depth_left as i64 * cap);
            if !reachable {
                continue;
            }
            let target = self.beta.add(&sum);
            let den = self.xi - self.domain.frac_norm(&target, self.ell)?;
            if den == 0.0 {
                stack.push(b.index().to_vec());
                let tuple = stack.clone();
                stack.pop();
                return Err(Error::VanishingDenominator {
                    stage: stack.len() + 1,
                    tuple,
                });
            }
            self.min_den = self.min_den.min(den.abs());
            if den.abs() <= self.half_threshold {
                self.iteration_ok = false;
            }
            stack.push(b.index().to_vec());
            self.series_tuples(depth_left - 1, &sum, coeff_prod * c, den_prod * den, stack)?;
            stack.pop();
        }
        Ok(())
    }
}

fn lookup(ball: &[(LatticeVector, f64)], v: &LatticeVector) -> f64 {
    ball.binary_search_by(|probe| probe.0.cmp(v))
        .map(|i| ball[i].1)
        .unwrap_or(0.0)
}

/// `S_j(xi)` for `1 <= j <= p1`.
pub fn series_term(
    j: i64,
    xi: f64,
    beta: &LatticeVector,
    q: &PotentialSpec,
    params: &ResonanceParams,
    domain: &BoxDomain,
) -> Result<SeriesTerm> {
    if j < 1 || j > params.p1 {
        return Err(Error::DepthOutOfRange { j, max: params.p1 });
    }
    let ball = coefficient_ball(domain, q, params);
    let caps = axis_caps(&ball, domain.dimension());
    let mut sum = TupleSum {
        domain,
        ball: &ball,
        caps,
        ell: params.ell,
        xi,
        beta,
        half_threshold: 0.5 * params.threshold,
        value: 0.0,
        min_den: f64::INFINITY,
        iteration_ok: true,
    };
    let mut stack = Vec::new();
    sum.series_tuples(
        j as usize,
        &LatticeVector::zero(domain.dimension()),
        1.0,
        1.0,
        &mut stack,
    )?;
    Ok(SeriesTerm {
        value: sum.value,
        min_denominator: sum.min_den,
        iteration_ok: sum.iteration_ok,
    })
}

/// Upper bound `2^j threshold^-j M^(j+1)` valid whenever every denominator
/// obeys the iteration condition.
pub fn series_term_bound(j: i64, mass: f64, params: &ResonanceParams) -> f64 {
    2f64.powi(j as i32) * params.threshold.powi(-(j as i32)) * mass.powi(j as i32 + 1)
}

/// Computed `S_j` values, the predictor sequence and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub beta: LatticeVector,
    /// `S_1..S_p1` evaluated at the final predictor argument.
    pub s_terms: Vec<f64>,
    /// `F_0..F_kmax`.
    pub f_sequence: Vec<f64>,
    /// `|beta|^2l + F_(kmax-1)`.
    pub predicted: f64,
    /// Smallest denominator magnitude met anywhere in the computation.
    pub min_denominator: f64,
    /// True when every denominator obeyed the iteration condition.
    pub iteration_ok: bool,
    /// `F_1` recomputed from its closed form, as a cross-check.
    pub f1_closed_form: f64,
    /// Set when `kmax` exceeds the admissible range `p - c`.
    pub admissible_range_exceeded: bool,
}

/// Runs the recursion `F_k = sum_{i=1..k} S_i(|beta|^2l + F_(k-1))` up to
/// `kmax <= p1` and forecasts the eigenvalue.
pub fn f_sequence(
    kmax: i64,
    beta: &LatticeVector,
    q: &PotentialSpec,
    params: &ResonanceParams,
    domain: &BoxDomain,
) -> Result<SeriesResult> {
    if kmax < 1 || kmax > params.p1 {
        return Err(Error::DepthOutOfRange {
            j: kmax,
            max: params.p1,
        });
    }
    let lambda = domain.frac_norm(beta, params.ell)?;

    // closed-form first correction over the same coefficient ball
    let ball = coefficient_ball(domain, q, params);
    let mut f1_closed = 0.0;
    for (b, c) in &ball {
        let den = lambda - domain.frac_norm(&beta.add(b), params.ell)?;
        if den == 0.0 {
            return Err(Error::VanishingDenominator {
                stage: 1,
                tuple: vec![b.index().to_vec()],
            });
        }
        f1_closed += c * c / den;
    }

    let mut f = vec![0.0f64; kmax as usize + 1];
    let mut min_den = f64::INFINITY;
    let mut iter_ok = true;
    for k in 1..=kmax {
        let arg = lambda + f[k as usize - 1];
        let mut total = 0.0;
        for i in 1..=k {
            let term = series_term(i, arg, beta, q, params, domain)?;
            total += term.value;
            min_den = min_den.min(term.min_denominator);
            iter_ok &= term.iteration_ok;
        }
        f[k as usize] = total;
    }
    debug_assert!(
        (f[1] - f1_closed).abs() <= 1e-12 * (1.0 + f1_closed.abs()),
        "recursion and closed form disagree on F_1"
    );

    let final_arg = lambda + f[kmax as usize - 1];
    let mut s_terms = Vec::new();
    for jj in 1..=params.p1 {
        let term = series_term(jj, final_arg, beta, q, params, domain)?;
        min_den = min_den.min(term.min_denominator);
        s_terms.push(term.value);
    }

    Ok(SeriesResult {
        beta: beta.clone(),
        s_terms,
        f_sequence: f.clone(),
        predicted: lambda + f[kmax as usize - 1],
        min_denominator: min_den,
        iteration_ok: iter_ok,
        f1_closed_form: f1_closed,
        admissible_range_exceeded: kmax > params.p - params.c,
    })
}

/// Remainder evaluation with its truncation flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Remainder {
    pub value: f64,
    /// Set when a coefficient target fell outside the Galerkin basis and was
    /// counted as zero.
    pub tail: bool,
    pub min_denominator: f64,
}

/// `C_p1(xi, h)`: the tuples whose running sums never returned to zero,
/// closed against Galerkin coefficients `h(N, beta + total)`.
#[allow(clippy::too_many_arguments)]
pub fn remainder_c(
    p1: i64,
    xi: f64,
    beta: &LatticeVector,
    q: &PotentialSpec,
    solution: &EigenSolution,
    n: usize,
    params: &ResonanceParams,
    domain: &BoxDomain,
) -> Result<Remainder> {
    if p1 < 1 {
        return Err(Error::DepthOutOfRange {
            j: p1,
            max: params.p1,
        });
    }
    let ball = coefficient_ball(domain, q, params);
    let mut rem = Remainder {
        value: 0.0,
        tail: false,
        min_denominator: f64::INFINITY,
    };
    let mut stack = Vec::new();
    remainder_rec(
        p1 as usize + 1,
        &LatticeVector::zero(domain.dimension()),
        1.0,
        1.0,
        &ball,
        xi,
        beta,
        params.ell,
        solution,
        n,
        domain,
        &mut rem,
        &mut stack,
    )?;
    Ok(rem)
}

#[allow(clippy::too_many_arguments)]
fn remainder_rec(
    depth_left: usize,
    partial: &LatticeVector,
    coeff_prod: f64,
    den_prod: f64,
    ball: &[(LatticeVector, f64)],
    xi: f64,
    beta: &LatticeVector,
    ell: f64,
    solution: &EigenSolution,
    n: usize,
    domain: &BoxDomain,
    rem: &mut Remainder,
    stack: &mut Vec<Vec<i64>>,
) -> Result<()> {
    if depth_left == 0 {
        // running sum stayed nonzero through every stage
        let target = beta.add(partial);
        match solution.h_unnormalized(n, target.index()) {
            Some(h) => rem.value += coeff_prod * h / den_prod,
            None => rem.tail = true,
        }
        return Ok(());
    }
    let first = stack.is_empty();
    for (b, c) in ball {
        let sum = partial.add(b);
        // every partial sum from the second on is nonzero (the first is
        // nonzero automatically: the zero mode carries no coefficient)
        if !first && sum.is_zero() {
            continue;
        }
        let mut den = 1.0;
        if depth_left > 1 {
            // denominators attach to the first p1 partial sums only
            let target = beta.add(&sum);
            den = xi - domain.frac_norm(&target, ell)?;
            if den == 0.0 {
                stack.push(b.index().to_vec());
                let tuple = stack.clone();
                stack.pop();
                return Err(Error::VanishingDenominator {
                    stage: stack.len() + 1,
                    tuple,
                });
            }
            rem.min_denominator = rem.min_denominator.min(den.abs());
        }
        stack.push(b.index().to_vec());
        remainder_rec(
            depth_left - 1,
            &sum,
            coeff_prod * c,
            den_prod * den,
            ball,
            xi,
            beta,
            ell,
            solution,
            n,
            domain,
            rem,
            stack,
        )?;
        stack.pop();
    }
    Ok(())
}

/// Residual check of the iteration identity against a Galerkin solve.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub residual: f64,
    pub tail: bool,
    pub s_values: Vec<f64>,
    pub remainder: f64,
}

/// Evaluates `|(xi_N - |beta|^2l) h(N,beta) - sum_i S_i(xi_N) h(N,beta) - C_p1|`
/// for the matched eigenpair `n`. Exact in the truncated model up to solver
/// residual and the flagged tails.
pub fn iteration_identity_residual(
    beta: &LatticeVector,
    q: &PotentialSpec,
    params: &ResonanceParams,
    domain: &BoxDomain,
    solution: &EigenSolution,
    n: usize,
    p1: i64,
) -> Result<IdentityCheck> {
    let h_beta = solution
        .h_unnormalized(n, beta.index())
        .ok_or(Error::NoMatchedEigenpair)?;
    let xi = solution.eigenvalues[n];
    let lambda = domain.frac_norm(beta, params.ell)?;
    let mut s_values = Vec::with_capacity(p1 as usize);
    let mut series_part = 0.0;
    for i in 1..=p1 {
        // depth is bounded by the explicit p1 of this check
        let relaxed = ResonanceParams {
            p1,
            ..params.clone()
        };
        let term = series_term(i, xi, beta, q, &relaxed, domain)?;
        s_values.push(term.value);
        series_part += term.value;
    }
    let rem = remainder_c(p1, xi, beta, q, solution, n, params, domain)?;
    let residual = ((xi - lambda) * h_beta - series_part * h_beta - rem.value).abs();
    Ok(IdentityCheck {
        residual,
        tail: rem.tail,
        s_values,
        remainder: rem.value,
    })
}
