//! Box geometry and the dual cosine lattice.
//!
//! The configuration space is a rectangular box `K = [0,a_1] x ... x [0,a_d]`.
//! Its Neumann cosine eigenfunctions are indexed by lattice vectors
//! `beta = (n_1 pi/a_1, ..., n_d pi/a_d)` with integer `n_i`; the full lattice
//! `B` admits any signs while `B+` restricts to `n_i >= 0`. Each `B+` vector
//! is the canonical representative of its sign orbit `A_beta` (the set of
//! vectors with the same component magnitudes), of size `2^z` where `z`
//! counts nonzero components.
//!
//! Modes are stored as integer multi-indices so that lattice membership and
//! orbit identity are exact; real components are derived on demand from the
//! box. Enumeration is lexicographic on the index, and downstream reductions
//! iterate in that order so sums are reproducible across runs.

use crate::error::{Error, Result};

/// Rectangular box `[0,a_1] x ... x [0,a_d]`, `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    sides: Vec<f64>,
    volume: f64,
}

/// One mode of the cosine basis, stored as the integer multi-index `n`.
///
/// The real components `beta^i = n_i pi/a_i` depend on the box and are
/// computed on demand through [`BoxDomain`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    index: Vec<i64>,
}

impl BoxDomain {
    /// Builds a box from its side lengths.
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.len() < 2 {
            return Err(Error::DimensionTooSmall { d: sides.len() });
        }
        for (i, &a) in sides.iter().enumerate() {
            if !(a > 0.0) {
                return Err(Error::NonPositiveSide { index: i, value: a });
            }
        }
        let volume = sides.iter().product();
        Ok(Self { sides, volume })
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    /// Measure of the box, `mu(K) = prod a_i`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.sides.len()
            && x.iter()
                .zip(&self.sides)
                .all(|(&xi, &a)| (0.0..=a).contains(&xi))
    }

    /// Real components `beta^i = n_i pi/a_i` of a mode.
    pub fn components(&self, v: &LatticeVector) -> Vec<f64> {
        v.index
            .iter()
            .zip(&self.sides)
            .map(|(&n, &a)| n as f64 * std::f64::consts::PI / a)
            .collect()
    }

    /// Squared Euclidean norm `|beta|^2 = sum (n_i pi/a_i)^2`.
    pub fn norm_sq(&self, v: &LatticeVector) -> f64 {
        v.index
            .iter()
            .zip(&self.sides)
            .map(|(&n, &a)| {
                let c = n as f64 * std::f64::consts::PI / a;
                c * c
            })
            .sum()
    }

    pub fn norm(&self, v: &LatticeVector) -> f64 {
        self.norm_sq(v).sqrt()
    }

    /// Eigenvalue `(|beta|^2)^ell` of the fractional operator on mode `beta`.
    ///
    /// The admitted range is `1/2 < ell < 1`; `ell = 1` is accepted as the
    /// classical cross-check extension. Exactly zero for the zero mode.
    pub fn frac_norm(&self, v: &LatticeVector, ell: f64) -> Result<f64> {
        check_order(ell)?;
        Ok(frac_power(self.norm_sq(v), ell))
    }

    /// `||v_beta||^2 = mu(K) 2^{-z(beta)}`: each axis contributes `a_i/2` for
    /// a nonzero index and `a_i` for a zero one.
    pub fn basis_norm_sq(&self, v: &LatticeVector) -> f64 {
        self.volume * 0.5f64.powi(v.nonzero_count() as i32)
    }

    /// The coordinate step `e_i` (1-based `i`): index 1 in slot `i`, else 0.
    pub fn unit_step(&self, i: usize) -> Result<LatticeVector> {
        let d = self.dimension();
        if i < 1 || i > d {
            return Err(Error::IndexOutOfRange { i, d });
        }
        let mut index = vec![0i64; d];
        index[i - 1] = 1;
        Ok(LatticeVector::new(index))
    }

    /// All lattice vectors with `|beta| <= radius`, lexicographic on the index.
    ///
    /// `positive_only` restricts to the canonical cone `B+` (all `n_i >= 0`);
    /// otherwise the full sign lattice `B` is returned.
    pub fn enumerate_lattice(&self, radius: f64, positive_only: bool) -> Vec<LatticeVector> {
        if radius < 0.0 {
            return Vec::new();
        }
        let d = self.dimension();
        let bounds: Vec<i64> = self
            .sides
            .iter()
            .map(|&a| (radius * a / std::f64::consts::PI).floor() as i64 + 1)
            .collect();
        let r2 = radius * radius;
        let mut out = Vec::new();
        let mut index = vec![0i64; d];
        self.enumerate_rec(0, &mut index, &bounds, r2, positive_only, &mut out);
        out
    }

    fn enumerate_rec(
        &self,
        axis: usize,
        index: &mut Vec<i64>,
        bounds: &[i64],
        r2: f64,
        positive_only: bool,
        out: &mut Vec<LatticeVector>,
    ) {
        if axis == index.len() {
            let v = LatticeVector::new(index.clone());
            if self.norm_sq(&v) <= r2 {
                out.push(v);
            }
            return;
        }
        let lo = if positive_only { 0 } else { -bounds[axis] };
        for n in lo..=bounds[axis] {
            index[axis] = n;
            self.enumerate_rec(axis + 1, index, bounds, r2, positive_only, out);
        }
        index[axis] = 0;
    }
}

impl LatticeVector {
    pub fn new(index: Vec<i64>) -> Self {
        Self { index }
    }

    pub fn zero(d: usize) -> Self {
        Self { index: vec![0; d] }
    }

    pub fn index(&self) -> &[i64] {
        &self.index
    }

    pub fn dimension(&self) -> usize {
        self.index.len()
    }

    pub fn is_zero(&self) -> bool {
        self.index.iter().all(|&n| n == 0)
    }

    /// Number of nonzero components, `z(beta)`.
    pub fn nonzero_count(&self) -> usize {
        self.index.iter().filter(|&&n| n != 0).count()
    }

    /// `|A_beta| = 2^{z(beta)}`, the size of the sign orbit.
    pub fn orbit_size(&self) -> u64 {
        1u64 << self.nonzero_count()
    }

    /// True when all components are nonnegative (membership in `B+`).
    pub fn is_canonical(&self) -> bool {
        self.index.iter().all(|&n| n >= 0)
    }

    /// Componentwise absolute value: the `B+` representative of the orbit.
    pub fn canonical(&self) -> LatticeVector {
        LatticeVector::new(self.index.iter().map(|&n| n.abs()).collect())
    }

    /// Every member of the sign orbit `A_beta`, sorted lexicographically.
    pub fn orbit_members(&self) -> Vec<LatticeVector> {
        let nz: Vec<usize> = (0..self.index.len())
            .filter(|&i| self.index[i] != 0)
            .collect();
        let mut out = Vec::with_capacity(1 << nz.len());
        for mask in 0u32..(1u32 << nz.len()) {
            let mut idx: Vec<i64> = self.index.iter().map(|&n| n.abs()).collect();
            for (bit, &axis) in nz.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    idx[axis] = -idx[axis];
                }
            }
            out.push(LatticeVector::new(idx));
        }
        out.sort();
        out
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector::new(
            self.index
                .iter()
                .zip(&other.index)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector::new(self.index.iter().map(|&a| -a).collect())
    }
}

/// Validates the fractional order: `1/2 < ell < 1`, with `ell = 1` admitted
/// as the classical cross-check.
pub fn check_order(ell: f64) -> Result<()> {
    if (ell > 0.5 && ell < 1.0) || ell == 1.0 {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange { ell })
    }
}

/// `u^ell` for `u = |x|^2 >= 0`, with exact zero handling below the floating
/// underflow floor so `0^ell` never enters `powf`.
pub fn frac_power(norm_sq: f64, ell: f64) -> f64 {
    if norm_sq < 1e-300 {
        0.0
    } else {
        norm_sq.powf(ell)
    }
}

/// `|x|^2` of a real point.
pub fn point_norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|&c| c * c).sum()
}
