//! Resonance and non-resonance domains of the fractional operator.
//!
//! For a scale `r >> 1` the modes with `|beta| ~ r` split into two groups.
//! Around each nonzero lattice vector `beta` sits the resonance domain
//! `V_beta = { x : ||x|^2l - |x+beta|^2l| < threshold }`, a band along the
//! bisector of `-beta`; the non-resonance domain is the complement of the
//! union over all `beta` in the test ball. Points there admit the
//! perturbation series built in [`crate::perturbation`].
//!
//! The driving exponents are `alpha = (2l-1) / (2 (d+20) 3^(d+1))` and
//! `alpha_k = 3^k alpha`; the classification threshold is `r^(alpha_1)` and
//! the test ball has radius `p r^alpha`. At `d = 2` the literal `alpha` is
//! about `4e-4`, which keeps the threshold within a fraction of a percent of
//! 1 at any floating-point scale and makes resonance bands invisibly thin in
//! a plot window. Two visualization knobs widen them: `exponent_override`
//! replaces `alpha` everywhere, and `threshold_override` pins the
//! classification threshold directly. Every report records whether either
//! override was active.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{check_order, frac_power, point_norm_sq, BoxDomain, LatticeVector};

/// Shell convention for `|x| ~ r`: `c1 r < |x| < c2 r`.
pub const SHELL_C1: f64 = 0.5;
pub const SHELL_C2: f64 = 2.0;

/// Derived classification parameters for one `(r, p, ell, d)` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceParams {
    pub r: f64,
    pub p: i64,
    pub ell: f64,
    pub d: usize,
    /// Effective exponent: the literal `alpha(ell)` unless overridden.
    pub alpha: f64,
    /// Classification threshold `r^(3 alpha)` unless overridden.
    pub threshold: f64,
    /// Radius `r^alpha` of the coefficient ball feeding the series.
    pub perturbation_radius: f64,
    /// Iteration depth budget `p1 = floor((p+1)/3)`.
    pub p1: i64,
    /// Admissibility offset `c = floor((d-1)/(2 alpha)) + 1`.
    pub c: i64,
    pub exponent_override: Option<f64>,
    pub threshold_override: Option<f64>,
}

/// Optional knobs for [`derive_params`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOptions {
    /// Replaces `alpha(ell)` in every derived exponent (visualization runs).
    pub exponent_override: Option<f64>,
    /// Pins the classification threshold directly, bypassing `r^(3 alpha)`.
    pub threshold_override: Option<f64>,
    /// Admits `ell = 1` for cross-checks against the classical operator.
    pub allow_classical: bool,
}

/// The literal exponent `alpha(ell) = (2 ell - 1) / (2 (d+20) 3^(d+1))`.
pub fn literal_alpha(ell: f64, d: usize) -> f64 {
    (2.0 * ell - 1.0) / (2.0 * (d as f64 + 20.0) * 3f64.powi(d as i32 + 1))
}

/// Populates every derived field from `(r, p, ell, d)` and the options.
pub fn derive_params(
    r: f64,
    p: i64,
    ell: f64,
    d: usize,
    opts: &ParamOptions,
) -> Result<ResonanceParams> {
    if ell == 1.0 && !opts.allow_classical {
        return Err(Error::OrderOutOfRange { ell });
    }
    check_order(ell)?;
    if !(r > 1.0) {
        return Err(Error::ScaleTooSmall { r });
    }
    if p < 1 {
        return Err(Error::DepthOutOfRange {
            j: p,
            max: i64::MAX,
        });
    }
    if d < 2 {
        return Err(Error::DimensionTooSmall { d });
    }
    let alpha = opts
        .exponent_override
        .unwrap_or_else(|| literal_alpha(ell, d));
    let threshold = opts
        .threshold_override
        .unwrap_or_else(|| r.powf(3.0 * alpha));
    Ok(ResonanceParams {
        r,
        p,
        ell,
        d,
        alpha,
        threshold,
        perturbation_radius: r.powf(alpha),
        p1: (p + 1) / 3,
        c: ((d as f64 - 1.0) / (2.0 * alpha)).floor() as i64 + 1,
        exponent_override: opts.exponent_override,
        threshold_override: opts.threshold_override,
    })
}

impl ResonanceParams {
    /// `alpha_k = 3^k alpha`.
    pub fn alpha_k(&self, k: i64) -> f64 {
        3f64.powi(k as i32) * self.alpha
    }

    pub fn override_active(&self) -> bool {
        self.exponent_override.is_some() || self.threshold_override.is_some()
    }

    /// Radius `p r^alpha` of the witness test ball.
    pub fn test_radius(&self) -> f64 {
        self.p as f64 * self.perturbation_radius
    }

    /// All nonzero lattice vectors strictly inside the test ball, in
    /// lexicographic order.
    pub fn test_set(&self, domain: &BoxDomain) -> Result<Vec<LatticeVector>> {
        if domain.dimension() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: domain.dimension(),
            });
        }
        let radius = self.test_radius();
        let r2 = radius * radius;
        let set: Vec<LatticeVector> = domain
            .enumerate_lattice(radius, false)
            .into_iter()
            .filter(|v| !v.is_zero() && domain.norm_sq(v) < r2)
            .collect();
        if set.is_empty() {
            return Err(Error::EmptyTestSet { radius });
        }
        Ok(set)
    }
}

/// Classification outcome for one point.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Resonance,
    NonResonance,
}

/// Label plus the witnesses `beta` whose band contains the point.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainLabel {
    pub kind: DomainKind,
    pub witnesses: Vec<LatticeVector>,
}

impl DomainLabel {
    fn from_witnesses(witnesses: Vec<LatticeVector>) -> Self {
        let kind = if witnesses.is_empty() {
            DomainKind::NonResonance
        } else {
            DomainKind::Resonance
        };
        Self { kind, witnesses }
    }

    pub fn is_resonance(&self) -> bool {
        self.kind == DomainKind::Resonance
    }
}

/// The gap `| |x|^2l - |x+beta|^2l |`; exactly zero when `|x| = |x+beta|`.
///
/// Both norms enter through their squares, so the power is only ever taken
/// of a nonnegative argument; arguments below the underflow floor short to 0.
pub fn resonance_gap(domain: &BoxDomain, x: &[f64], beta: &LatticeVector, ell: f64) -> f64 {
    let comp = domain.components(beta);
    let u1 = point_norm_sq(x);
    let shifted: f64 = x
        .iter()
        .zip(&comp)
        .map(|(&xi, &bi)| (xi + bi) * (xi + bi))
        .sum();
    if u1 == shifted {
        return 0.0;
    }
    (frac_power(u1, ell) - frac_power(shifted, ell)).abs()
}

/// Tests `x` against every nonzero `beta` in the test ball and reports all
/// witnesses with gap below the threshold. Deterministic.
pub fn classify_point(
    domain: &BoxDomain,
    x: &[f64],
    params: &ResonanceParams,
) -> Result<DomainLabel> {
    let set = params.test_set(domain)?;
    Ok(classify_against(
        domain,
        x,
        &set,
        params.threshold,
        params.ell,
    ))
}

/// Classification against an explicit witness set and threshold.
pub fn classify_against(
    domain: &BoxDomain,
    x: &[f64],
    test_set: &[LatticeVector],
    threshold: f64,
    ell: f64,
) -> DomainLabel {
    let witnesses = test_set
        .iter()
        .filter(|beta| resonance_gap(domain, x, beta, ell) < threshold)
        .cloned()
        .collect();
    DomainLabel::from_witnesses(witnesses)
}

/// Componentwise lower bound satisfied by deep non-resonance modes:
/// `|beta^k| > (1/3) r^(alpha_1 - 2 ell + 2)` for every axis `k`.
pub fn coordinate_bound_check(
    domain: &BoxDomain,
    beta: &LatticeVector,
    params: &ResonanceParams,
) -> bool {
    let bound = params.r.powf(params.alpha_k(1) - 2.0 * params.ell + 2.0) / 3.0;
    domain.components(beta).iter().all(|&c| c.abs() > bound)
}

/// Explicit window constant for the mean-value threshold transfer.
///
/// For `x` in the sampling shell and `beta` in the test ball the mean-value
/// identity gives `gap_frac = ell * u^(ell-1) * gap_classical` with `u`
/// between the two squared norms, so `u <= (c2 r + B)^2` where `B` is the
/// test-ball radius. Scaling the classical threshold by
/// `kappa = (1/ell) ((c2 r + B)/r)^(2-2ell)` makes both inclusions exact
/// pointwise statements instead of asymptotic ones.
pub fn mvt_window_constant(params: &ResonanceParams) -> f64 {
    let reach = (SHELL_C2 * params.r + params.test_radius()) / params.r;
    (1.0 / params.ell) * reach.powf(2.0 - 2.0 * params.ell)
}

/// Solves the mean-value identity
/// `|x|^2l - |x+beta|^2l = eta^(2(l-1)) (|x|^2 - |x+beta|^2)` for `eta`.
///
/// Returns `None` in the symmetric case `|x| = |x+beta|` where the identity
/// is vacuous. For `1/2 < ell < 1` the solution always lies strictly between
/// `min(|x|, |x+beta|)` and `2 max(|x|, |x+beta|)`.
pub fn mean_value_eta(
    domain: &BoxDomain,
    x: &[f64],
    beta: &LatticeVector,
    ell: f64,
) -> Option<f64> {
    let comp = domain.components(beta);
    let u1 = point_norm_sq(x);
    let u2: f64 = x
        .iter()
        .zip(&comp)
        .map(|(&xi, &bi)| (xi + bi) * (xi + bi))
        .sum();
    if u1 == u2 || u1 < 1e-300 || u2 < 1e-300 {
        return None;
    }
    let ratio = (frac_power(u1, ell) - frac_power(u2, ell)) / (u1 - u2);
    Some(ratio.powf(1.0 / (2.0 * (ell - 1.0))))
}

/// Draws the `i`-th shell sample for a given seed: uniform on
/// `{ c1 r < |x| < c2 r }` via a counter-based stream, so the value depends
/// only on `(seed, i)` and never on thread scheduling.
pub fn shell_sample(seed: u64, i: u64, d: usize, r: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    // isotropic direction from Gaussian components
    let mut dir: Vec<f64>;
    let mut norm;
    loop {
        dir = (0..d).map(|_| gaussian(&mut rng)).collect();
        norm = point_norm_sq(&dir).sqrt();
        if norm > 1e-12 {
            break;
        }
    }
    let u: f64 = rng.gen();
    let lo = (SHELL_C1 * r).powi(d as i32);
    let hi = (SHELL_C2 * r).powi(d as i32);
    let rho = (lo + u * (hi - lo)).powf(1.0 / d as f64);
    dir.iter().map(|&c| c / norm * rho).collect()
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream layout simple
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Monte Carlo estimate of the non-resonance fraction of the shell.
///
/// Returns `(fraction, standard error)`. Reproducible bit for bit for a
/// fixed seed regardless of the rayon thread count: each sample owns a
/// counter-based random stream and only an integer count is reduced.
pub fn nonresonance_fraction(
    domain: &BoxDomain,
    params: &ResonanceParams,
    n_samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    assert!(n_samples >= 1000, "need at least 1e3 samples");
    let set = params.test_set(domain)?;
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let x = shell_sample(seed, i, params.d, params.r);
            let label = classify_against(domain, &x, &set, params.threshold, params.ell);
            u64::from(!label.is_resonance())
        })
        .sum();
    let f = hits as f64 / n_samples as f64;
    let stderr = (f * (1.0 - f) / n_samples as f64).sqrt();
    Ok((f, stderr))
}

/// Rectangular scan window: cell `(i, j)` sits at
/// `(origin[0] + i spacing[0], origin[1] + j spacing[1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub counts: [usize; 2],
}

/// Per-cell classification data for a 2-D slice.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub grid: GridSpec,
    pub betas: Vec<LatticeVector>,
    pub threshold: f64,
    pub override_active: bool,
    /// Row-major over `j` (outer) then `i`: gap to each beta per cell.
    pub gaps: Vec<Vec<f64>>,
    pub witness_counts: Vec<usize>,
}

pub const DEFAULT_CELL_CAP: usize = 4_000_000;

/// Scans a 2-D window, recording per-cell gaps and band membership for each
/// listed `beta`. Cells are processed in parallel but emitted in row-major
/// order.
pub fn scan_slice(
    domain: &BoxDomain,
    params: &ResonanceParams,
    grid: &GridSpec,
    betas: &[LatticeVector],
    cell_cap: usize,
) -> Result<ScanResult> {
    if domain.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: domain.dimension(),
        });
    }
    let cells = grid.counts[0].saturating_mul(grid.counts[1]);
    if cells > cell_cap {
        return Err(Error::GridTooLarge {
            cells,
            cap: cell_cap,
        });
    }
    let threshold = params.threshold;
    let ell = params.ell;
    let results: Vec<(Vec<f64>, usize)> = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let i = idx % grid.counts[0];
            let j = idx / grid.counts[0];
            let x = [
                grid.origin[0] + i as f64 * grid.spacing[0],
                grid.origin[1] + j as f64 * grid.spacing[1],
            ];
            let gaps: Vec<f64> = betas
                .iter()
                .map(|b| resonance_gap(domain, &x, b, ell))
                .collect();
            let wc = gaps.iter().filter(|&&g| g < threshold).count();
            (gaps, wc)
        })
        .collect();
    let mut gaps = Vec::with_capacity(cells);
    let mut witness_counts = Vec::with_capacity(cells);
    for (g, w) in results {
        gaps.push(g);
        witness_counts.push(w);
    }
    Ok(ScanResult {
        grid: grid.clone(),
        betas: betas.to_vec(),
        threshold,
        override_active: params.override_active(),
        gaps,
        witness_counts,
    })
}

impl ScanResult {
    fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.grid.counts[0] + i
    }

    pub fn in_resonance(&self, i: usize, j: usize) -> bool {
        self.witness_counts[self.cell_index(i, j)] > 0
    }

    pub fn gap_min(&self, i: usize, j: usize) -> f64 {
        self.gaps[self.cell_index(i, j)]
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Number of in-band cells along the fixed-`j` transversal row.
    pub fn band_width_along_row(&self, j: usize) -> usize {
        (0..self.grid.counts[0])
            .filter(|&i| self.in_resonance(i, j))
            .count()
    }

    /// Figure data: `x1,x2,gap_min,witness_count,in_resonance`, one row per
    /// cell, floats with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,gap_min,witness_count,in_resonance\n");
        for j in 0..self.grid.counts[1] {
            for i in 0..self.grid.counts[0] {
                let x1 = self.grid.origin[0] + i as f64 * self.grid.spacing[0];
                let x2 = self.grid.origin[1] + j as f64 * self.grid.spacing[1];
                let idx = self.cell_index(i, j);
                out.push_str(&format!(
                    "{:.11e},{:.11e},{:.11e},{},{}\n",
                    x1,
                    x2,
                    self.gap_min(i, j),
                    self.witness_counts[idx],
                    u8::from(self.witness_counts[idx] > 0),
                ));
            }
        }
        out
    }
}
