//! Orthonormal trigonometric-type bases of `L²[0,1]`.
//!
//! Both families start with the constant function `f_1 ≡ 1`, integrate to
//! zero for `j ≥ 2` and are bounded by `√2` in sup-norm, so that
//! `Σ_{j≤m} f_j(x)² ≤ 2m` on the whole interval.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform grid nodes used to certify sup-norm constants.
pub const CERTIFY_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// `1, √2 cos(πx), √2 cos(2πx), ...`
    ConstantPlusCosine,
    /// `1, √2 cos(2πx), √2 sin(2πx), √2 cos(4πx), ...`
    FullTrigonometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisFamily {
    pub kind: BasisKind,
    /// Constant `η²` with `‖Σ_{j≤m} f_j²‖_∞ ≤ m η²` for every `m`.
    pub eta_sq: f64,
}

impl BasisFamily {
    pub fn new(kind: BasisKind) -> Self {
        // both families satisfy the bound with η² = 2 analytically
        Self { kind, eta_sq: 2.0 }
    }

    pub fn cosine() -> Self {
        Self::new(BasisKind::ConstantPlusCosine)
    }

    pub fn trigonometric() -> Self {
        Self::new(BasisKind::FullTrigonometric)
    }

    /// Evaluates `f_j(x)` with `j ≥ 1` and `x ∈ [0,1]`.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        check_args(j, x)?;
        Ok(self.eval_unchecked(j, x))
    }

    /// Evaluates `(f_1(x), ..., f_m(x))`.
    pub fn eval_vector(&self, m: usize, x: f64) -> Result<Vec<f64>> {
        if m < 1 {
            return Err(Error::Dimension("basis dimension must be at least 1".into()));
        }
        check_args(1, x)?;
        let mut out = vec![0.0; m];
        self.fill(x, &mut out);
        Ok(out)
    }

    /// Antiderivative `F_j(x) = ∫_0^x f_j(t) dt`.
    pub fn integral(&self, j: usize, x: f64) -> Result<f64> {
        check_args(j, x)?;
        Ok(self.integral_unchecked(j, x))
    }

    pub(crate) fn eval_unchecked(&self, j: usize, x: f64) -> f64 {
        if j == 1 {
            return 1.0;
        }
        match self.kind {
            BasisKind::ConstantPlusCosine => SQRT_2 * ((j - 1) as f64 * PI * x).cos(),
            BasisKind::FullTrigonometric => {
                let freq = 2.0 * PI * (j / 2) as f64;
                if j.is_multiple_of(2) {
                    SQRT_2 * (freq * x).cos()
                } else {
                    SQRT_2 * (freq * x).sin()
                }
            }
        }
    }

    pub(crate) fn integral_unchecked(&self, j: usize, x: f64) -> f64 {
        if j == 1 {
            return x;
        }
        match self.kind {
            BasisKind::ConstantPlusCosine => {
                let freq = (j - 1) as f64 * PI;
                SQRT_2 * (freq * x).sin() / freq
            }
            BasisKind::FullTrigonometric => {
                let freq = 2.0 * PI * (j / 2) as f64;
                if j.is_multiple_of(2) {
                    SQRT_2 * (freq * x).sin() / freq
                } else {
                    SQRT_2 * (1.0 - (freq * x).cos()) / freq
                }
            }
        }
    }

    /// Writes `f_1(x), ..., f_{out.len()}(x)` into `out`; `x` must lie in `[0,1]`.
    pub(crate) fn fill(&self, x: f64, out: &mut [f64]) {
        for (idx, slot) in out.iter_mut().enumerate() {
            *slot = self.eval_unchecked(idx + 1, x);
        }
    }

    /// Evaluates `Σ_j coeffs[j−1] f_j(x)`; `x` must lie in `[0,1]`.
    pub fn eval_series(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * self.eval_unchecked(idx + 1, x))
            .sum()
    }

    /// Smallest `η²` such that the grid maximum of `Σ_{j≤m} f_j²` is at most
    /// `m η²` for all `m ≤ m_max`.
    pub fn certify_sup_norm(&self, m_max: usize) -> f64 {
        let m_max = m_max.max(1);
        let mut values = vec![0.0; m_max];
        let mut eta_sq: f64 = 0.0;
        for i in 0..CERTIFY_GRID {
            let x = i as f64 / (CERTIFY_GRID - 1) as f64;
            self.fill(x, &mut values);
            let mut prefix = 0.0;
            for (idx, v) in values.iter().enumerate() {
                prefix += v * v;
                eta_sq = eta_sq.max(prefix / (idx + 1) as f64);
            }
        }
        eta_sq
    }
}

impl Default for BasisFamily {
    fn default() -> Self {
        Self::cosine()
    }
}

fn check_args(j: usize, x: f64) -> Result<()> {
    if j < 1 {
        return Err(Error::Domain(format!("basis index must be >= 1, got {j}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("basis argument {x} outside [0,1]")));
    }
    Ok(())
}
