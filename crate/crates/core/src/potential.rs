//! The potential as orbit-normalized Fourier data.
//!
//! A potential is a finite cosine polynomial
//! `q(x) = sum_{beta in B} q_beta v_beta(x)` whose coefficient map is constant
//! on sign orbits. One coefficient is stored per canonical representative
//! (all `n_i >= 0`); the full-lattice coefficient of any `delta` is the
//! coefficient of its canonical image. The mean is fixed to zero (`q_0 = 0`),
//! so the zero mode never carries an entry.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{BoxDomain, LatticeVector};

/// Orbit-normalized Fourier coefficients `{q_beta}` with smoothness order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    coeffs: BTreeMap<LatticeVector, f64>,
    smoothness_order: i64,
}

impl PotentialSpec {
    /// Builds a potential from `(representative, coefficient)` entries.
    ///
    /// Representatives must be canonical (`n_i >= 0`) and nonzero; entries
    /// with coefficient exactly zero are dropped, duplicates are summed.
    pub fn new(entries: Vec<(LatticeVector, f64)>, smoothness_order: i64) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (v, c) in entries {
            if v.is_zero() {
                return Err(Error::ZeroModeForbidden);
            }
            if !v.is_canonical() {
                return Err(Error::NonCanonicalRepresentative(v.index().to_vec()));
            }
            *coeffs.entry(v).or_insert(0.0) += c;
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self {
            coeffs,
            smoothness_order,
        })
    }

    pub fn zero(smoothness_order: i64) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            smoothness_order,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn smoothness_order(&self) -> i64 {
        self.smoothness_order
    }

    /// Canonical representatives with their coefficients, lexicographic order.
    pub fn representatives(&self) -> impl Iterator<Item = (&LatticeVector, f64)> {
        self.coeffs.iter().map(|(v, &c)| (v, c))
    }

    /// Full-lattice coefficient of an arbitrary `delta in B` (constant on orbits).
    pub fn coefficient(&self, delta: &LatticeVector) -> f64 {
        self.coeffs.get(&delta.canonical()).copied().unwrap_or(0.0)
    }

    /// Largest `|beta|` carrying a nonzero coefficient; 0 for the zero potential.
    pub fn support_radius(&self, domain: &BoxDomain) -> f64 {
        self.coeffs
            .keys()
            .map(|v| domain.norm(v))
            .fold(0.0, f64::max)
    }

    /// Scales every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(v, &c)| (v.clone(), c * factor))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        Self {
            coeffs,
            smoothness_order: self.smoothness_order,
        }
    }

    /// Pointwise value `q(x)`, the finite cosine sum.
    ///
    /// Summing the full lattice orbit by orbit: all members of `A_beta` share
    /// the same eigenfunction value, so each representative contributes
    /// `|A_beta| q_beta v_beta(x)`.
    pub fn evaluate(&self, domain: &BoxDomain, x: &[f64]) -> Result<f64> {
        if !domain.contains_point(x) {
            return Err(Error::PointOutsideBox);
        }
        let mut total = 0.0;
        for (v, c) in self.representatives() {
            let comp = domain.components(v);
            let mut prod = 1.0;
            for (ci, xi) in comp.iter().zip(x) {
                prod *= (ci * xi).cos();
            }
            total += v.orbit_size() as f64 * c * prod;
        }
        Ok(total)
    }

    /// Mass `M = sum_{beta in B} |q_beta| = sum_reps |A_beta| |q_beta|`.
    pub fn mass(&self) -> f64 {
        self.representatives()
            .map(|(v, c)| v.orbit_size() as f64 * c.abs())
            .sum()
    }

    /// Restricts to representatives with `|beta| < radius` (strict), returning
    /// the truncated potential and the discarded tail's mass.
    pub fn truncate(&self, domain: &BoxDomain, radius: f64) -> (Self, f64) {
        let mut kept = BTreeMap::new();
        let mut tail = 0.0;
        for (v, c) in self.representatives() {
            if domain.norm(v) < radius {
                kept.insert(v.clone(), c);
            } else {
                tail += v.orbit_size() as f64 * c.abs();
            }
        }
        (
            Self {
                coeffs: kept,
                smoothness_order: self.smoothness_order,
            },
            tail,
        )
    }

    /// The weighted square sum `sum_{beta in B} |q_beta|^2 (1 + |beta|^{2m})`,
    /// finite for every `m` on finite support; reported for documentation.
    pub fn smoothness_sum(&self, domain: &BoxDomain, m: i64) -> f64 {
        self.representatives()
            .map(|(v, c)| {
                let w = 1.0 + domain.norm_sq(v).powi(m as i32);
                v.orbit_size() as f64 * c * c * w
            })
            .sum()
    }

    /// Serializes to the text format: header `m=<int>`, then one record per
    /// representative, `n_1 ... n_d coefficient`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "m={}", self.smoothness_order);
        for (v, c) in self.representatives() {
            for n in v.index() {
                let _ = write!(out, "{} ", n);
            }
            let _ = writeln!(out, "{}", c);
        }
        out
    }

    /// Parses the text format written by [`to_text`](Self::to_text).
    ///
    /// Coefficients round-trip exactly: the writer emits the shortest decimal
    /// that recovers the same binary value.
    pub fn parse_text(text: &str, dimension: usize) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::PotentialFormat {
            line: 1,
            msg: "empty file".into(),
        })?;
        let m: i64 = header
            .trim()
            .strip_prefix("m=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(Error::PotentialFormat {
                line: 1,
                msg: "expected header m=<int>".into(),
            })?;
        let mut entries = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dimension + 1 {
                return Err(Error::PotentialFormat {
                    line: i + 1,
                    msg: format!("expected {} indices and a coefficient", dimension),
                });
            }
            let mut index = Vec::with_capacity(dimension);
            for f in &fields[..dimension] {
                index.push(f.parse::<i64>().map_err(|e| Error::PotentialFormat {
                    line: i + 1,
                    msg: e.to_string(),
                })?);
            }
            let coeff: f64 =
                fields[dimension]
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| Error::PotentialFormat {
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
            entries.push((LatticeVector::new(index), coeff));
        }
        Self::new(entries, m)
    }
}

/// The standard two-mode test potential `eps (v_(1,0) + v_(0,1))`, i.e.
/// `eps (cos(pi x_1/a_1) + cos(pi x_2/a_2))` in 2-D.
pub fn two_cosine_potential(eps: f64, m: i64) -> PotentialSpec {
    PotentialSpec::new(
        vec![
            (LatticeVector::new(vec![1, 0]), eps / 2.0),
            (LatticeVector::new(vec![0, 1]), eps / 2.0),
        ],
        m,
    )
    .expect("canonical entries")
}
