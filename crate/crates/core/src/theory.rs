//! Population counterparts of the selection machinery: operator-based
//! truncation indices, approximation bias, the oracle dimension, the
//! minimax dimension and rates, and numerical checks of the link condition
//! and the approximation-error bounds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dgp::{BuiltDesign, JointDesign};
use crate::error::{Error, Result};
use crate::galerkin::{matrix_inverse_norm_sq, spectral_norm, squared_distance};
use crate::selection::{alpha_n, delta_triplet, truncation_index_with_cap};

/// Regularity configuration: smoothness `γ_j = j^{−2p}` and ill-posedness
/// `υ_j = j^{2a}` (polynomial) or `υ_j = exp(j^{2a} − 1)` (exponential).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum Case {
    PP { p: f64, a: f64 },
    PE { p: f64, a: f64 },
}

impl Case {
    pub fn p(&self) -> f64 {
        match *self {
            Case::PP { p, .. } | Case::PE { p, .. } => p,
        }
    }

    pub fn a(&self) -> f64 {
        match *self {
            Case::PP { a, .. } | Case::PE { a, .. } => a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Case::PP { p, a } if p > 1.0 && a > 0.5 => Ok(()),
            Case::PE { p, a } if p > 1.0 && a > 0.0 => Ok(()),
            Case::PP { p, a } => Err(Error::Domain(format!(
                "PP case needs p > 1 and a > 1/2, got p={p}, a={a}"
            ))),
            Case::PE { p, a } => Err(Error::Domain(format!(
                "PE case needs p > 1 and a > 0, got p={p}, a={a}"
            ))),
        }
    }

    /// Smoothness weight `γ_j`.
    pub fn gamma(&self, j: usize) -> f64 {
        (j as f64).powf(-2.0 * self.p())
    }

    /// Ill-posedness weight `υ_j`.
    pub fn upsilon(&self, j: usize) -> f64 {
        let jf = j as f64;
        match *self {
            Case::PP { a, .. } => jf.powf(2.0 * a),
            Case::PE { a, .. } => (jf.powf(2.0 * a) - 1.0).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSequences {
    pub case: Case,
    /// Ellipsoid radius `r`.
    pub r: f64,
    /// Link-condition constant `d ≥ 1`.
    pub d: f64,
    /// Extended-link constant `D ≥ d`.
    pub big_d: f64,
    /// `ζ²` bounding `‖Σ_j γ_j f_j²‖_∞`.
    pub zeta_sq: f64,
}

impl WeightSequences {
    pub fn new(case: Case, r: f64, d: f64, big_d: f64) -> Result<Self> {
        case.validate()?;
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if !(d >= 1.0) || !(big_d >= d) {
            return Err(Error::Domain(format!("need 1 <= d <= D, got d={d}, D={big_d}")));
        }
        Ok(Self {
            case,
            r,
            d,
            big_d,
            zeta_sq: zeta_sq_bound(&case),
        })
    }

    /// Weights realised by a built diagonal design, `d = D = max(1/s, 1)`.
    pub fn for_design(case: Case, r: f64, built: &BuiltDesign) -> Result<Self> {
        let c = built.link_constant();
        Self::new(case, r, c, c)
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.case.gamma(j)
    }

    pub fn upsilon(&self, j: usize) -> f64 {
        self.case.upsilon(j)
    }

    /// `‖φ‖²_γ = Σ_j γ_j⁻¹ c_j²`.
    pub fn weighted_norm_sq(&self, coeffs: &[f64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * c / self.gamma(idx + 1))
            .sum()
    }
}

/// `1 + 2 Σ_{j≥2} γ_j`, valid because `|f_j|² ≤ 2` for both basis families.
fn zeta_sq_bound(case: &Case) -> f64 {
    const TERMS: usize = 100_000;
    let two_p = 2.0 * case.p();
    let partial: f64 = (2..=TERMS).map(|j| case.gamma(j)).sum();
    let tail = (TERMS as f64).powf(1.0 - two_p) / (two_p - 1.0);
    1.0 + 2.0 * (partial + tail)
}

/// Closed-form `[T]_m`.
pub fn true_operator_matrix(design: &JointDesign, m: usize) -> DMatrix<f64> {
    design.operator_matrix(m)
}

/// `[T]_m` by midpoint quadrature of `∫∫ f_j(w) f_l(z) p(z, w) dz dw` on a
/// `nodes × nodes` grid (a single integral for the identity design).
pub fn operator_matrix_by_quadrature(design: &JointDesign, m: usize, nodes: usize) -> DMatrix<f64> {
    let basis = design.basis();
    let xs: Vec<f64> = (0..nodes).map(|i| (i as f64 + 0.5) / nodes as f64).collect();
    let values: Vec<Vec<f64>> = (1..=m)
        .map(|j| xs.iter().map(|&x| basis.eval_unchecked(j, x)).collect())
        .collect();
    let h = 1.0 / nodes as f64;
    if design.is_identity() {
        return DMatrix::from_fn(m, m, |j, l| {
            values[j].iter().zip(&values[l]).map(|(a, b)| a * b).sum::<f64>() * h
        });
    }
    // density[(a, b)] = p(z_a, w_b)
    let density = DMatrix::from_fn(nodes, nodes, |a, b| design.density(xs[a], xs[b]).unwrap_or(1.0));
    DMatrix::from_fn(m, m, |j, l| {
        let mut acc = 0.0;
        for (b, fw) in values[j].iter().enumerate() {
            let col: f64 = values[l].iter().enumerate().map(|(a, fz)| fz * density[(a, b)]).sum();
            acc += fw * col;
        }
        acc * h * h
    })
}

/// `a_m = ‖[T]_m⁻¹‖_S²` for `m = 1..=m_max`.
pub fn true_inverse_norms(design: &JointDesign, m_max: usize) -> Vec<f64> {
    (1..=m_max)
        .map(|m| matrix_inverse_norm_sq(&design.operator_matrix(m)))
        .collect()
}

/// `(M⁻, M⁺) = (M_n(4a), M_n(a/4))` with `a_m = ‖[T]_m⁻¹‖_S²`.
pub fn theoretical_truncations(design: &JointDesign, n: usize, cap: usize) -> (usize, usize) {
    let a = true_inverse_norms(design, cap);
    let four: Vec<f64> = a.iter().map(|v| 4.0 * v).collect();
    let quarter: Vec<f64> = a.iter().map(|v| v / 4.0).collect();
    (
        truncation_index_with_cap(&four, n, cap),
        truncation_index_with_cap(&quarter, n, cap),
    )
}

/// Coefficients of `φ_k = [T]_k⁻¹ [Tφ]_k`.
pub fn approximation_coeffs(phi_coeffs: &[f64], design: &JointDesign, k: usize) -> Result<Vec<f64>> {
    let t_k = design.operator_matrix(k);
    if !matrix_inverse_norm_sq(&t_k).is_finite() {
        return Err(Error::Domain(format!("[T]_{k} is singular")));
    }
    let g = DVector::from_fn(k, |j, _| {
        phi_coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| design.operator_entry(j + 1, l + 1) * c)
            .sum()
    });
    let lu = t_k.full_piv_lu();
    let sol = lu
        .solve(&g)
        .ok_or_else(|| Error::Domain(format!("[T]_{k} is singular")))?;
    Ok(sol.iter().copied().collect())
}

/// `b_m² = max_{m≤k≤k_max} ‖φ_k − φ‖²`.
pub fn bias_sq(phi_coeffs: &[f64], design: &JointDesign, m: usize, k_max: usize) -> Result<f64> {
    if m < 1 || k_max < m {
        return Err(Error::Dimension(format!("need 1 <= m <= k_max, got m={m}, k_max={k_max}")));
    }
    let mut worst: f64 = 0.0;
    for k in m..=k_max {
        let approx = approximation_coeffs(phi_coeffs, design, k)?;
        worst = worst.max(squared_distance(&approx, phi_coeffs));
    }
    Ok(worst)
}

/// Smallest minimiser of `b_m² ∨ δ_m^T / n` over `1 ≤ m ≤ M⁻`, with the attained value.
pub fn oracle_dimension(bias: &[f64], small_delta_t: &[f64], m_minus: usize, n: usize) -> Result<(usize, f64)> {
    if m_minus < 1 || bias.len() < m_minus || small_delta_t.len() < m_minus {
        return Err(Error::Dimension(format!(
            "oracle over 1..={m_minus} needs sequences of that length"
        )));
    }
    let nf = n as f64;
    let mut best = (1, bias[0].max(small_delta_t[0] / nf));
    for m in 2..=m_minus {
        let value = bias[m - 1].max(small_delta_t[m - 1] / nf);
        if value < best.1 {
            best = (m, value);
        }
    }
    Ok(best)
}

/// Minimax dimension `m⋄` (nearest integer, at least 1) and rate.
pub fn minimax_dimension_rate(n: usize, case: &Case) -> Result<(usize, f64)> {
    case.validate()?;
    let nf = n as f64;
    let (p, a) = (case.p(), case.a());
    let (dim, rate) = match case {
        Case::PP { .. } => {
            let denom = 2.0 * p + 2.0 * a + 1.0;
            (nf.powf(denom.recip()), nf.powf(-2.0 * p / denom))
        }
        Case::PE { .. } => {
            let log_n = nf.ln();
            let shift = (2.0 * p + (2.0 * a - 1.0).max(0.0)) / (2.0 * a) * log_n.ln();
            let base = (log_n - shift).max(0.0);
            (base.powf((2.0 * a).recip()), log_n.powf(-p / a))
        }
    };
    Ok(((dim.round() as usize).max(1), rate))
}

/// Checks `d⁻² ≤ υ_j ‖T f_j‖² ≤ d²` for `j ≤ m_max` and
/// `‖Diag(υ)_m^{−1/2} [T]_m⁻¹‖_S ≤ D` for `m ≤ m_max`.
pub fn check_link_condition(design: &JointDesign, weights: &WeightSequences, m_max: usize) -> bool {
    const SLACK: f64 = 1e-12;
    let (d_sq, big_d) = (weights.d * weights.d, weights.big_d);
    let rows = design.bandlimit().max(m_max);
    for j in 1..=m_max {
        let image: f64 = (1..=rows).map(|i| design.operator_entry(i, j).powi(2)).sum();
        let scaled = weights.upsilon(j) * image;
        if scaled < d_sq.recip() * (1.0 - SLACK) || scaled > d_sq * (1.0 + SLACK) {
            return false;
        }
    }
    for m in 1..=m_max {
        let t_m = design.operator_matrix(m);
        let Some(inv) = t_m.try_inverse() else {
            return false;
        };
        let weighted = DMatrix::from_fn(m, m, |i, j| inv[(i, j)] / weights.upsilon(i + 1).sqrt());
        if spectral_norm(&weighted) > big_d * (1.0 + SLACK) {
            return false;
        }
    }
    true
}

/// Numerical check of the approximation bounds for `φ` in the ellipsoid and
/// an operator satisfying the extended link condition, for `m ≤ m_max`:
/// `γ_m⁻¹‖φ − φ_m‖² ≤ 4D²d²r²`, `‖φ_m‖² ≤ 4D²d²r²` and
/// `‖φ − φ_m‖_∞² ≤ 4ζ²D²d²r²` (sup over a 1001-point grid).
pub fn approximation_bound_check(
    phi_coeffs: &[f64],
    design: &JointDesign,
    weights: &WeightSequences,
    m_max: usize,
) -> Result<bool> {
    let radius_sq = weights.weighted_norm_sq(phi_coeffs);
    if radius_sq > weights.r * weights.r {
        return Err(Error::Domain(format!(
            "‖φ‖²_γ = {radius_sq} exceeds r² = {}",
            weights.r * weights.r
        )));
    }
    if !check_link_condition(design, weights, m_max) {
        return Err(Error::Domain(format!("design violates the link condition up to {m_max}")));
    }
    let bound = 4.0 * (weights.big_d * weights.d * weights.r).powi(2);
    let basis = design.basis();
    for m in 1..=m_max {
        let approx = approximation_coeffs(phi_coeffs, design, m)?;
        let err_sq = squared_distance(&approx, phi_coeffs);
        let norm_sq: f64 = approx.iter().map(|v| v * v).sum();
        let len = approx.len().max(phi_coeffs.len());
        let diff: Vec<f64> = (0..len)
            .map(|j| phi_coeffs.get(j).copied().unwrap_or(0.0) - approx.get(j).copied().unwrap_or(0.0))
            .collect();
        let sup_sq = (0..=1000)
            .map(|i| basis.eval_series(&diff, i as f64 / 1000.0).powi(2))
            .fold(0.0, f64::max);
        if err_sq / weights.gamma(m) > bound
            || norm_sq > bound
            || sup_sq > weights.zeta_sq * bound
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Admissibility of arithmetic mixing `β_k ~ k^{−s}` with blocks `q_n ~ n^r`:
/// `4 − r < r s` and `r < 1/6`.
pub fn mixing_admissibility(s: f64, r_exp: f64) -> bool {
    4.0 - r_exp < r_exp * s && r_exp < 1.0 / 6.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalQuantities {
    /// `a_m = ‖[T]_m⁻¹‖_S²` for `m = 1..=cap`.
    pub a: Vec<f64>,
    /// `δ_m^T` for `m = 1..=cap` (`+∞` where `[T]_m` is singular).
    pub small_delta_t: Vec<f64>,
    pub m_minus: usize,
    pub m_plus: usize,
    /// `b_m²` for `m = 1..=M⁻`.
    pub bias_sq: Vec<f64>,
    pub m_star: usize,
    pub oracle_rate: f64,
    pub m_diamond: usize,
    pub minimax_rate: f64,
    /// Finite-n value of `log(n) (M⁺+1)² Δ^T_{M⁺+1} / n`.
    pub growth_ratio: f64,
}

pub fn theoretical_quantities(
    design: &JointDesign,
    phi_coeffs: &[f64],
    case: &Case,
    n: usize,
    cap: usize,
) -> Result<TheoreticalQuantities> {
    let cap = cap.max(1);
    let a = true_inverse_norms(design, cap + 1);
    let small_delta_t: Vec<f64> = (1..=cap)
        .map(|m| {
            if a[..m].iter().all(|v| v.is_finite()) {
                delta_triplet(&a, m).map(|t| t.small_delta)
            } else {
                Ok(f64::INFINITY)
            }
        })
        .collect::<Result<_>>()?;
    let (m_minus, m_plus) = theoretical_truncations(design, n, cap);
    let k_max = design.bandlimit().max(phi_coeffs.len()).max(m_minus);
    let k_max = if design.is_identity() { k_max } else { k_max.min(design.bandlimit()) };
    let bias: Vec<f64> = (1..=m_minus)
        .map(|m| bias_sq(phi_coeffs, design, m, k_max.max(m)))
        .collect::<Result<_>>()?;
    let (m_star, oracle_rate) = oracle_dimension(&bias, &small_delta_t, m_minus, n)?;
    let (m_diamond, minimax_rate) = minimax_dimension_rate(n, case)?;
    let next = m_plus + 1;
    let delta_next = a[..next.min(a.len())].iter().copied().fold(0.0, f64::max);
    let growth_ratio = (n as f64).ln() * (next * next) as f64 * delta_next / n as f64;
    Ok(TheoreticalQuantities {
        a: a[..cap].to_vec(),
        small_delta_t,
        m_minus,
        m_plus,
        bias_sq: bias,
        m_star,
        oracle_rate,
        m_diamond,
        minimax_rate,
        growth_ratio,
    })
}

/// Benchmark `b²_{m*} ∨ δ^T_{m*} / n`.
pub fn oracle_benchmark(q: &TheoreticalQuantities, n: usize) -> f64 {
    q.bias_sq[q.m_star - 1].max(q.small_delta_t[q.m_star - 1] / n as f64)
}

/// Threshold `α_n` re-exported for reports.
pub fn truncation_threshold(n: usize) -> f64 {
    alpha_n(n)
}
