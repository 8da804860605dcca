//! Data-driven choice of the Galerkin dimension.
//!
//! The candidate set `{1, ..., M̂}` is cut by a random truncation rule on the
//! sequence `â_m = ‖[T̂]_m⁻¹‖_S²`. Within it every dimension receives the
//! stochastic penalty `pen̂_m = 11 κ σ̂²_m δ̂_m / n`, a Lepski-type contrast
//! `Ψ̂_m = max_{m≤k≤M̂} {‖θ̂_k − θ̂_m‖² − pen̂_k}` compares nested estimates,
//! and the selected dimension minimises `Ψ̂_m + pen̂_m`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::galerkin::{
    assemble, squared_distance, threshold_ls_estimate_with, CoefficientEstimate, Sample,
    ThresholdForm,
};

/// κ for independent observations.
pub const KAPPA_IID: f64 = 144.0;
/// κ for β-mixing observations with the data-driven choice `τ = 7`.
pub const KAPPA_DEPENDENT: f64 = 2016.0;

/// How the response second moment enters `σ̂²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseMoment {
    /// `n⁻¹ Σ Y_i²`
    #[default]
    Mean,
    /// `Σ Y_i²`, without normalisation.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    pub kappa: f64,
    pub sigma_multiplier: f64,
    pub threshold_form: ThresholdForm,
    pub response_moment: ResponseMoment,
    /// Overrides the largest candidate dimension `⌊n^{1/4}⌋`.
    pub max_dimension: Option<usize>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self::iid()
    }
}

impl PenaltyConfig {
    pub fn iid() -> Self {
        Self {
            kappa: KAPPA_IID,
            sigma_multiplier: 2.0,
            threshold_form: ThresholdForm::Squared,
            response_moment: ResponseMoment::Mean,
            max_dimension: None,
        }
    }

    pub fn dependent() -> Self {
        Self {
            kappa: KAPPA_DEPENDENT,
            ..Self::iid()
        }
    }

    /// `κ = 288 τ` for a known mixing constant `τ`.
    pub fn dependent_with_tau(tau: f64) -> Self {
        Self {
            kappa: 288.0 * tau,
            ..Self::iid()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.sigma_multiplier > 0.0) || !self.sigma_multiplier.is_finite() {
            return Err(Error::Config(format!(
                "sigma_multiplier must be positive, got {}",
                self.sigma_multiplier
            )));
        }
        if self.max_dimension == Some(0) {
            return Err(Error::Config("max_dimension must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cap(&self, n: usize) -> usize {
        self.max_dimension.unwrap_or_else(|| default_cap(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaTriplet {
    /// `Δ_m = max_{k≤m} a_k`
    pub delta: f64,
    /// `Λ_m = max_{k≤m} log(a_k ∨ (k+2)) / log(k+2)`
    pub lambda: f64,
    /// `δ_m = m Δ_m Λ_m`
    pub small_delta: f64,
}

/// Computes `(Δ_m, Λ_m, δ_m)` from `a_1, ..., a_m` (`a[0]` is `a_1`).
pub fn delta_triplet(a: &[f64], m: usize) -> Result<DeltaTriplet> {
    if m < 1 || m > a.len() {
        return Err(Error::Dimension(format!(
            "dimension {m} not in 1..={}",
            a.len()
        )));
    }
    let mut delta: f64 = 0.0;
    let mut lambda: f64 = 0.0;
    for (idx, &ak) in a[..m].iter().enumerate() {
        if !(ak > 0.0) {
            return Err(Error::Domain(format!("a_{} = {ak} is not positive", idx + 1)));
        }
        let k2 = (idx + 3) as f64;
        delta = delta.max(ak);
        lambda = lambda.max(ak.max(k2).ln() / k2.ln());
    }
    Ok(DeltaTriplet {
        delta,
        lambda,
        small_delta: m as f64 * delta * lambda,
    })
}

/// `α_n = n^{1 − 1/log(2 + log n)} / (1 + log n)`.
pub fn alpha_n(n: usize) -> f64 {
    let nf = n as f64;
    let log_n = nf.ln();
    nf.powf(1.0 - (2.0 + log_n).ln().recip()) / (1.0 + log_n)
}

/// `⌊n^{1/4}⌋`, computed in integer arithmetic.
pub fn default_cap(n: usize) -> usize {
    let mut k = (n as f64).powf(0.25).floor() as usize;
    while (k + 1).checked_pow(4).is_some_and(|p| p <= n) {
        k += 1;
    }
    while k > 0 && k.pow(4) > n {
        k -= 1;
    }
    k.max(1)
}

/// Truncation rule `M_n(a) = min{2 ≤ m ≤ ⌊n^{1/4}⌋ : m² a_m > α_n} − 1`,
/// equal to `⌊n^{1/4}⌋` when no candidate triggers.
pub fn truncation_index(a: &[f64], n: usize) -> usize {
    truncation_index_with_cap(a, n, default_cap(n))
}

/// As [`truncation_index`] with an explicit largest candidate `cap`.
/// Entries of `a` beyond its length are treated as `+∞`.
pub fn truncation_index_with_cap(a: &[f64], n: usize, cap: usize) -> usize {
    let alpha = alpha_n(n);
    let cap = cap.max(1);
    for m in 2..=cap {
        let am = a.get(m - 1).copied().unwrap_or(f64::INFINITY);
        if (m * m) as f64 * am > alpha || am.is_nan() {
            return m - 1;
        }
    }
    cap
}

/// `σ̂²_m` for `m = estimates.len()`.
pub fn sigma_hat_sq(sample: &Sample, estimates: &[CoefficientEstimate], config: &PenaltyConfig) -> f64 {
    let sum_sq: f64 = sample.y().iter().map(|v| v * v).sum();
    let moment = match config.response_moment {
        ResponseMoment::Mean => sum_sq / sample.len() as f64,
        ResponseMoment::Sum => sum_sq,
    };
    sigma_from_parts(moment, estimates, config.sigma_multiplier)
}

fn sigma_from_parts(moment: f64, estimates: &[CoefficientEstimate], multiplier: f64) -> f64 {
    let max_norm = estimates
        .iter()
        .map(CoefficientEstimate::norm_sq)
        .fold(0.0, f64::max);
    multiplier * (moment + max_norm)
}

/// `pen̂_m = 11 κ σ̂²_m δ̂_m / n`.
pub fn penalty(sigma_sq: f64, small_delta_hat: f64, n: usize, config: &PenaltyConfig) -> f64 {
    11.0 * config.kappa * sigma_sq * small_delta_hat / n as f64
}

/// `Ψ̂_m = max_{m≤k≤M̂} {‖θ̂_k − θ̂_m‖² − pen̂_k}` with `M̂ = estimates.len()`.
pub fn contrast(estimates: &[CoefficientEstimate], penalties: &[f64], m: usize) -> Result<f64> {
    let cap = estimates.len();
    if m < 1 || m > cap || penalties.len() != cap {
        return Err(Error::Dimension(format!(
            "contrast at {m} with {cap} estimates and {} penalties",
            penalties.len()
        )));
    }
    let base = &estimates[m - 1].theta;
    Ok((m..=cap)
        .map(|k| squared_distance(&estimates[k - 1].theta, base) - penalties[k - 1])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest minimiser of `Ψ̂_m + pen̂_m` over `1 ≤ m ≤ contrasts.len()`.
pub fn select_dimension(contrasts: &[f64], penalties: &[f64]) -> Result<usize> {
    if contrasts.is_empty() || contrasts.len() != penalties.len() {
        return Err(Error::Dimension(format!(
            "{} contrasts and {} penalties",
            contrasts.len(),
            penalties.len()
        )));
    }
    let mut best = 1;
    let mut best_value = contrasts[0] + penalties[0];
    for (idx, (c, p)) in contrasts.iter().zip(penalties).enumerate().skip(1) {
        let value = c + p;
        if value < best_value {
            best = idx + 1;
            best_value = value;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRecord {
    pub m: usize,
    pub delta_hat: f64,
    pub lambda_hat: f64,
    pub small_delta_hat: f64,
    pub sigma_hat_sq: f64,
    pub pen_hat: f64,
    pub contrast: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    /// Largest candidate dimension considered (`⌊n^{1/4}⌋` by default).
    pub cap: usize,
    /// `â_m = ‖[T̂]_m⁻¹‖_S²` for `m = 1..=cap`.
    pub a_hat: Vec<f64>,
    /// Random truncation index `M̂`.
    pub m_hat_cap: usize,
    /// One record per `m = 1..=M̂`.
    pub per_m: Vec<SelectionRecord>,
    pub m_selected: usize,
}

impl SelectionTrace {
    pub const CSV_HEADER: [&'static str; 8] = [
        "m",
        "delta_hat",
        "lambda_hat",
        "small_delta_hat",
        "sigma_hat_sq",
        "pen_hat",
        "contrast",
        "selected",
    ];

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(Self::CSV_HEADER)?;
        for r in &self.per_m {
            wtr.write_record([
                r.m.to_string(),
                r.delta_hat.to_string(),
                r.lambda_hat.to_string(),
                r.small_delta_hat.to_string(),
                r.sigma_hat_sq.to_string(),
                r.pen_hat.to_string(),
                r.contrast.to_string(),
                u8::from(r.m == self.m_selected).to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Output of [`adaptive_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFit {
    /// `θ̂_{m̂}`.
    pub estimate: CoefficientEstimate,
    pub trace: SelectionTrace,
    /// Thresholded estimates for every candidate `m = 1..=cap`.
    pub candidates: Vec<CoefficientEstimate>,
}

impl AdaptiveFit {
    pub fn candidate(&self, m: usize) -> Option<&CoefficientEstimate> {
        m.checked_sub(1).and_then(|i| self.candidates.get(i))
    }

    pub fn thresholded_fraction(&self) -> f64 {
        let hits = self.candidates.iter().filter(|e| e.thresholded).count();
        hits as f64 / self.candidates.len() as f64
    }
}

/// Runs the full data-driven estimator on `sample`.
pub fn adaptive_estimate(
    sample: &Sample,
    basis_z: &BasisFamily,
    basis_w: &BasisFamily,
    config: &PenaltyConfig,
) -> Result<AdaptiveFit> {
    config.validate()?;
    let n = sample.len();
    let cap = config.cap(n);
    let full = assemble(sample, cap, basis_z, basis_w)?;
    let candidates: Vec<CoefficientEstimate> = (1..=cap)
        .map(|m| Ok(threshold_ls_estimate_with(&full.leading(m)?, config.threshold_form)))
        .collect::<Result<_>>()?;
    let a_hat: Vec<f64> = candidates.iter().map(|e| e.inv_norm_sq).collect();
    let m_hat_cap = truncation_index_with_cap(&a_hat, n, cap);

    let sum_sq: f64 = sample.y().iter().map(|v| v * v).sum();
    let moment = match config.response_moment {
        ResponseMoment::Mean => sum_sq / n as f64,
        ResponseMoment::Sum => sum_sq,
    };
    let admissible = &candidates[..m_hat_cap];
    let mut per_m = Vec::with_capacity(m_hat_cap);
    let mut penalties = Vec::with_capacity(m_hat_cap);
    for m in 1..=m_hat_cap {
        // â_1 is finite whenever both bases start with f_1 ≡ 1
        let triplet = delta_triplet(&a_hat, m)?;
        let sigma_sq = sigma_from_parts(moment, &admissible[..m], config.sigma_multiplier);
        let pen = penalty(sigma_sq, triplet.small_delta, n, config);
        penalties.push(pen);
        per_m.push(SelectionRecord {
            m,
            delta_hat: triplet.delta,
            lambda_hat: triplet.lambda,
            small_delta_hat: triplet.small_delta,
            sigma_hat_sq: sigma_sq,
            pen_hat: pen,
            contrast: 0.0,
        });
    }
    let mut contrasts = Vec::with_capacity(m_hat_cap);
    for (m, record) in (1..=m_hat_cap).zip(per_m.iter_mut()) {
        record.contrast = contrast(admissible, &penalties, m)?;
        contrasts.push(record.contrast);
    }
    let m_selected = select_dimension(&contrasts, &penalties)?;
    Ok(AdaptiveFit {
        estimate: candidates[m_selected - 1].clone(),
        trace: SelectionTrace {
            cap,
            a_hat,
            m_hat_cap,
            per_m,
            m_selected,
        },
        candidates,
    })
}
