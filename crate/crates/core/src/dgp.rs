//! Simulation designs with known operator, structural function and
//! dependence structure.
//!
//! A [`JointDesign`] is a joint density of `(Z, W)` on `[0,1]²` of the form
//!
//! ```text
//! p(z, w) = 1 + Σ_{j,l ≥ 2} K_{jl} f_j(w) f_l(z)
//! ```
//!
//! whose marginals are exactly uniform and whose Galerkin matrix is
//! `[T]_m = diag(1, K)` restricted to the leading block. Diagonal `K`
//! realises a prescribed sequence of singular values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::galerkin::Sample;
use crate::theory::Case;

/// Lower bound guaranteed for every built density on `[0,1]²`.
pub const MIN_DENSITY: f64 = 0.05;

/// Designs are rejected when the maximal admissible scale falls below this.
pub const MIN_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
enum Coupling {
    /// `Z = W`; the operator is the identity.
    Identity,
    /// Full `J × J` operator matrix with `T_11 = 1` and zero first row/column.
    Density { operator: DMatrix<f64>, envelope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDesign {
    basis: BasisFamily,
    bandlimit: usize,
    coupling: Coupling,
}

impl JointDesign {
    /// Diagonal design with `λ_2, ..., λ_J` given in `lambda`.
    pub fn diagonal(basis: BasisFamily, lambda: &[f64]) -> Result<Self> {
        if let Some(l) = lambda.iter().find(|l| !(**l >= 0.0)) {
            return Err(Error::Domain(format!("diagonal coefficient {l} is negative")));
        }
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(lambda));
        Self::from_coupling(basis, k)
    }

    /// General design from the `(J−1) × (J−1)` coupling matrix `K`, where
    /// `K[(j−2, l−2)] = E f_j(W) f_l(Z)`.
    pub fn from_coupling(basis: BasisFamily, coupling: DMatrix<f64>) -> Result<Self> {
        if !coupling.is_square() {
            return Err(Error::Dimension("coupling matrix must be square".into()));
        }
        let bandlimit = coupling.nrows() + 1;
        let abs_sum: f64 = coupling.iter().map(|v| v.abs()).sum();
        if !abs_sum.is_finite() || 2.0 * abs_sum > 1.0 - MIN_DENSITY {
            return Err(Error::Infeasible(format!(
                "2·Σ|K| = {} exceeds {}",
                2.0 * abs_sum,
                1.0 - MIN_DENSITY
            )));
        }
        let mut operator = DMatrix::zeros(bandlimit, bandlimit);
        operator[(0, 0)] = 1.0;
        operator.view_mut((1, 1), (bandlimit - 1, bandlimit - 1)).copy_from(&coupling);
        Ok(Self {
            basis,
            bandlimit,
            coupling: Coupling::Density {
                operator,
                envelope: 1.0 + 2.0 * abs_sum,
            },
        })
    }

    /// `Z = W` almost surely, `[T]_m = I_m` for every `m`.
    pub fn identity(basis: BasisFamily, bandlimit: usize) -> Self {
        Self {
            basis,
            bandlimit: bandlimit.max(1),
            coupling: Coupling::Identity,
        }
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.coupling, Coupling::Identity)
    }

    /// `λ_j = E f_j(W) f_j(Z)`, the diagonal operator entry.
    pub fn lambda(&self, j: usize) -> f64 {
        self.operator_entry(j, j)
    }

    /// `E f_j(W) f_l(Z)` for 1-based indices; zero outside the bandlimit.
    pub fn operator_entry(&self, j: usize, l: usize) -> f64 {
        match &self.coupling {
            Coupling::Identity => f64::from(j == l),
            Coupling::Density { operator, .. } => {
                if j == 0 || l == 0 || j > self.bandlimit || l > self.bandlimit {
                    0.0
                } else {
                    operator[(j - 1, l - 1)]
                }
            }
        }
    }

    /// Closed-form `[T]_m` (zero-padded beyond the bandlimit).
    pub fn operator_matrix(&self, m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |j, l| self.operator_entry(j + 1, l + 1))
    }

    pub fn is_diagonal(&self) -> bool {
        match &self.coupling {
            Coupling::Identity => true,
            Coupling::Density { operator, .. } => operator
                .iter()
                .enumerate()
                .all(|(idx, v)| *v == 0.0 || idx % (self.bandlimit + 1) == 0),
        }
    }

    /// Joint density `p(z, w)`; `None` for the degenerate identity design.
    pub fn density(&self, z: f64, w: f64) -> Option<f64> {
        let Coupling::Density { operator, .. } = &self.coupling else {
            return None;
        };
        let mut p = 1.0;
        for j in 2..=self.bandlimit {
            let fw = self.basis.eval_unchecked(j, w);
            for l in 2..=self.bandlimit {
                let k = operator[(j - 1, l - 1)];
                if k != 0.0 {
                    p += k * fw * self.basis.eval_unchecked(l, z);
                }
            }
        }
        Some(p)
    }

    /// `E[f_l(Z) | W = w] = Σ_j T_{jl} f_j(w)`.
    pub fn conditional_mean(&self, l: usize, w: f64) -> f64 {
        match &self.coupling {
            Coupling::Identity => self.basis.eval_unchecked(l, w),
            Coupling::Density { .. } => (1..=self.bandlimit)
                .map(|j| self.operator_entry(j, l) * self.basis.eval_unchecked(j, w))
                .sum(),
        }
    }

    /// Conditional distribution function `P(Z ≤ z | W = w)`.
    pub fn conditional_cdf(&self, z: f64, w: f64) -> f64 {
        match &self.coupling {
            Coupling::Identity => f64::from(z >= w),
            Coupling::Density { .. } => {
                let mut acc = z;
                for j in 2..=self.bandlimit {
                    let fw = self.basis.eval_unchecked(j, w);
                    for l in 2..=self.bandlimit {
                        let k = self.operator_entry(j, l);
                        if k != 0.0 {
                            acc += k * fw * self.basis.integral_unchecked(l, z);
                        }
                    }
                }
                acc
            }
        }
    }

    /// Inverts [`conditional_cdf`](Self::conditional_cdf) in `z` by safeguarded Newton steps.
    pub fn conditional_quantile(&self, u: f64, w: f64) -> f64 {
        if self.is_identity() {
            return w;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut z = u.clamp(0.0, 1.0);
        for _ in 0..100 {
            let f = self.conditional_cdf(z, w) - u;
            if f.abs() < 1e-14 {
                break;
            }
            if f > 0.0 {
                hi = z;
            } else {
                lo = z;
            }
            let dens = self.density(z, w).unwrap_or(1.0);
            let newton = z - f / dens;
            z = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        z.clamp(0.0, 1.0)
    }
}

/// Output of [`build_design`].
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltDesign {
    pub design: JointDesign,
    /// Scale `s` in `λ_j = s υ_j^{−1/2}`.
    pub scale: f64,
}

impl BuiltDesign {
    /// Link constant `d = D = max(1/s, 1)` realised by the construction.
    pub fn link_constant(&self) -> f64 {
        self.scale.recip().max(1.0)
    }
}

/// Diagonal design `λ_j = s υ_j^{−1/2}`, `2 ≤ j ≤ J`, with the largest
/// `s ≤ 1` such that `2 Σ_j λ_j ≤ 1 − MIN_DENSITY`.
pub fn build_design(case: Case, basis: BasisFamily, bandlimit: usize) -> Result<BuiltDesign> {
    case.validate()?;
    if bandlimit < 2 {
        return Err(Error::Dimension(format!("bandlimit must be >= 2, got {bandlimit}")));
    }
    let unscaled: Vec<f64> = (2..=bandlimit).map(|j| case.upsilon(j).sqrt().recip()).collect();
    let total: f64 = unscaled.iter().sum();
    // keep a hair of room so rounding never pushes the density below the bound
    let scale = ((1.0 - MIN_DENSITY) * (1.0 - 1e-9) / (2.0 * total)).min(1.0);
    if !(scale >= MIN_SCALE) {
        return Err(Error::Infeasible(format!(
            "scale {scale:e} below {MIN_SCALE:e} for bandlimit {bandlimit}"
        )));
    }
    let lambda: Vec<f64> = unscaled.iter().map(|u| scale * u).collect();
    Ok(BuiltDesign {
        design: JointDesign::diagonal(basis, &lambda)?,
        scale,
    })
}

/// Error law `U = ε + ς(Z, W)` with `ς(z, w) = c (f_2(z) − E[f_2(Z) | W = w])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub sigma_eps: f64,
    pub c_endo: f64,
}

impl ErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_eps >= 0.0) || !self.sigma_eps.is_finite() {
            return Err(Error::Config(format!("sigma_eps must be >= 0, got {}", self.sigma_eps)));
        }
        if !self.c_endo.is_finite() {
            return Err(Error::Config("c_endo must be finite".into()));
        }
        Ok(())
    }

    /// Conditional mean `ς(z, w) = E[U | Z = z, W = w]`.
    pub fn endogeneity(&self, design: &JointDesign, z: f64, w: f64) -> f64 {
        if self.c_endo == 0.0 {
            return 0.0;
        }
        let basis = design.basis();
        self.c_endo * (basis.eval_unchecked(2, z) - design.conditional_mean(2, w))
    }

    /// Bound on `‖ς‖_∞` for diagonal designs, `|c| √2 (1 + λ_2)`.
    pub fn endogeneity_sup_bound(&self, design: &JointDesign) -> f64 {
        self.c_endo.abs() * std::f64::consts::SQRT_2 * (1.0 + design.lambda(2).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependenceModel {
    #[default]
    Iid,
    /// Keep the previous pair with probability `rho`, else redraw.
    Regeneration { rho: f64 },
    /// Gaussian AR(1) latent pair pushed through the design's copula.
    CopulaAr { rho: f64 },
}

impl DependenceModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DependenceModel::Iid => Ok(()),
            DependenceModel::Regeneration { rho } | DependenceModel::CopulaAr { rho } => {
                if (0.0..1.0).contains(&rho) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("rho must lie in [0,1), got {rho}")))
                }
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DependenceModel::Iid => "iid",
            DependenceModel::Regeneration { .. } => "regeneration",
            DependenceModel::CopulaAr { .. } => "copula_ar",
        }
    }

    /// Whether every lagged pair law has a density (absolutely continuous).
    pub fn has_pair_densities(&self) -> bool {
        !matches!(self, DependenceModel::Regeneration { rho } if *rho > 0.0)
    }
}

/// One exact draw of `(z, w)` by rejection from the uniform square.
///
/// Consumes three uniforms per proposal.
pub fn sample_joint<R: Rng + ?Sized>(design: &JointDesign, rng: &mut R) -> (f64, f64) {
    match &design.coupling {
        Coupling::Identity => {
            let z: f64 = rng.random();
            (z, z)
        }
        Coupling::Density { envelope, .. } => loop {
            let z: f64 = rng.random();
            let w: f64 = rng.random();
            let u: f64 = rng.random();
            let p = design.density(z, w).unwrap_or(1.0);
            if u * envelope < p {
                return (z, w);
            }
        },
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// A strictly stationary path `(z_i, w_i)`, `i = 1..=n`.
///
/// The regeneration chain draws one uniform per step `i ≥ 2` only when
/// `rho > 0`, so `rho = 0` reproduces the i.i.d. path bit for bit.
pub fn sample_path<R: Rng + ?Sized>(
    design: &JointDesign,
    dep: &DependenceModel,
    n: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let mut path = Vec::with_capacity(n);
    match *dep {
        DependenceModel::Iid => {
            for _ in 0..n {
                path.push(sample_joint(design, rng));
            }
        }
        DependenceModel::Regeneration { rho } => {
            for i in 0..n {
                let keep = i > 0 && rho > 0.0 && rng.random::<f64>() < rho;
                let next = if keep { path[i - 1] } else { sample_joint(design, rng) };
                path.push(next);
            }
        }
        DependenceModel::CopulaAr { rho } => {
            let innov = (1.0 - rho * rho).sqrt();
            let mut x: f64 = rng.sample(StandardNormal);
            let mut v: f64 = rng.sample(StandardNormal);
            for i in 0..n {
                if i > 0 {
                    let ex: f64 = rng.sample(StandardNormal);
                    let ev: f64 = rng.sample(StandardNormal);
                    x = rho * x + innov * ex;
                    v = rho * v + innov * ev;
                }
                let w = std_normal_cdf(x).clamp(0.0, 1.0);
                let z = design.conditional_quantile(std_normal_cdf(v), w);
                path.push((z, w));
            }
        }
    }
    path
}

/// Coefficients `c_j = s' · sign_j · j^{−p−1}`, `j ≤ J`, scaled so that
/// `Σ_j j^{2p} c_j² = (0.9 r)²`.
pub fn structural_coeffs(p: f64, r: f64, bandlimit: usize, signs: &[f64]) -> Result<Vec<f64>> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("smoothness p must exceed 1, got {p}")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius r must be positive, got {r}")));
    }
    if bandlimit < 1 {
        return Err(Error::Dimension("bandlimit must be >= 1".into()));
    }
    let norm: f64 = (1..=bandlimit).map(|j| (j as f64).powi(-2)).sum::<f64>().sqrt();
    let scale = 0.9 * r / norm;
    Ok((1..=bandlimit)
        .map(|j| {
            let sign = signs.get(j - 1).copied().unwrap_or(1.0).signum();
            scale * sign * (j as f64).powf(-p - 1.0)
        })
        .collect())
}

/// `(+1, −1, +1, ...)` of length `len`.
pub fn alternating_signs(len: usize) -> Vec<f64> {
    (0..len).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Draws a sample `Y_i = φ(Z_i) + ς(Z_i, W_i) + ε_i` from a caller-supplied stream.
pub fn generate_sample_with<R: Rng + ?Sized>(
    design: &JointDesign,
    phi_coeffs: &[f64],
    err: &ErrorModel,
    dep: &DependenceModel,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    err.validate()?;
    dep.validate()?;
    let path = sample_path(design, dep, n, rng);
    let basis = design.basis();
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for &(zi, wi) in &path {
        let eps = if err.sigma_eps > 0.0 {
            err.sigma_eps * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        y.push(basis.eval_series(phi_coeffs, zi) + err.endogeneity(design, zi, wi) + eps);
        z.push(zi);
        w.push(wi);
    }
    Sample::new(y, z, w)
}

/// As [`generate_sample_with`], seeding a ChaCha8 stream from `seed`.
pub fn generate_sample(
    design: &JointDesign,
    phi_coeffs: &[f64],
    err: &ErrorModel,
    dep: &DependenceModel,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_sample_with(design, phi_coeffs, err, dep, n, &mut rng)
}

/// Certified upper bound on the β-mixing coefficient at lag `k`.
///
/// For the Gaussian AR(1) latent pair the Markov-chain identity
/// `β_k = E‖P^k(x, ·) − π‖_TV`, Pinsker's inequality and the Gaussian
/// Kullback–Leibler divergence give `β_k ≤ C ρ^k` with
/// `C = (2(1 − ρ²))^{−1/2}`; measurable transforms do not increase it.
/// Every bound is capped at 1.
pub fn beta_bound(dep: &DependenceModel, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    match *dep {
        DependenceModel::Iid => 0.0,
        DependenceModel::Regeneration { rho } => rho.powi(k as i32),
        DependenceModel::CopulaAr { rho } => {
            (copula_ar_constant(rho) * rho.powi(k as i32)).min(1.0)
        }
    }
}

pub fn copula_ar_constant(rho: f64) -> f64 {
    (2.0 * (1.0 - rho * rho)).sqrt().recip()
}

/// `Γ_B = Σ_{k≥0} (k+1)² β_k` evaluated on the certified bounds.
pub fn gamma_b(dep: &DependenceModel) -> f64 {
    match *dep {
        DependenceModel::Iid => 1.0,
        DependenceModel::Regeneration { rho } => (1.0 + rho) / (1.0 - rho).powi(3),
        DependenceModel::CopulaAr { .. } => {
            let mut total = 0.0;
            for k in 0.. {
                let term = ((k + 1) * (k + 1)) as f64 * beta_bound(dep, k);
                total += term;
                if k > 10 && term < 1e-16 * total {
                    break;
                }
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp() -> Case {
        Case::PP { p: 2.0, a: 1.0 }
    }

    #[test]
    fn build_design_examples() {
        let built = build_design(pp(), BasisFamily::cosine(), 4).unwrap();
        let expected = 0.95 / (2.0 * (0.5 + 1.0 / 3.0 + 0.25));
        assert!((built.scale - expected).abs() < 1e-9);
        assert!((built.scale - 0.438).abs() < 1e-3);
        for j in 2..=4 {
            assert!((built.design.lambda(j) - expected / j as f64).abs() < 1e-9);
        }
        let built = build_design(pp(), BasisFamily::cosine(), 2).unwrap();
        assert!((built.scale - 0.95).abs() < 1e-9);
        assert!(build_design(pp(), BasisFamily::cosine(), 1).is_err());
    }

    #[test]
    fn severely_ill_posed_scale_is_capped() {
        let built = build_design(Case::PE { p: 2.0, a: 1.0 }, BasisFamily::cosine(), 2).unwrap();
        assert_eq!(built.scale, 1.0);
        assert_eq!(built.link_constant(), 1.0);
    }

    #[test]
    fn infeasible_design_rejected() {
        let k = DMatrix::from_element(2, 2, 0.3);
        let err = JointDesign::from_coupling(BasisFamily::cosine(), k).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
        assert!(matches!(
            build_design(pp(), BasisFamily::cosine(), 1),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn density_positive_on_grid() {
        for case in [pp(), Case::PP { p: 1.5, a: 0.75 }, Case::PE { p: 2.0, a: 0.5 }] {
            for j in [2, 4, 8] {
                let Ok(built) = build_design(case, BasisFamily::cosine(), j) else { continue };
                let mut min = f64::INFINITY;
                for a in 0..200 {
                    for b in 0..200 {
                        let p = built.design.density(a as f64 / 199.0, b as f64 / 199.0).unwrap();
                        min = min.min(p);
                    }
                }
                assert!(min >= MIN_DENSITY, "{case:?} J={j}: {min}");
            }
        }
    }

    #[test]
    fn independence_design_accepts_everything() {
        let d = JointDesign::diagonal(BasisFamily::cosine(), &[0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut reference = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (z, w) = sample_joint(&d, &mut rng);
            let z0: f64 = reference.random();
            let w0: f64 = reference.random();
            let _: f64 = reference.random();
            assert_eq!((z, w), (z0, w0));
        }
    }

    #[test]
    fn conditional_quantile_inverts_cdf() {
        let built = build_design(pp(), BasisFamily::cosine(), 6).unwrap();
        let k = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.1 } else { 0.02 * (i as f64 - j as f64) });
        let general = JointDesign::from_coupling(BasisFamily::trigonometric(), k).unwrap();
        for d in [&built.design, &general] {
            for &w in &[0.0, 0.2, 0.55, 1.0] {
                for &u in &[0.0, 0.01, 0.3, 0.5, 0.97, 1.0] {
                    let z = d.conditional_quantile(u, w);
                    assert!((d.conditional_cdf(z, w) - u).abs() < 1e-12, "{u} {w} {z}");
                }
            }
        }
    }

    #[test]
    fn regeneration_with_zero_rho_matches_iid() {
        let built = build_design(pp(), BasisFamily::cosine(), 4).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let iid = sample_path(&built.design, &DependenceModel::Iid, 500, &mut a);
        let regen = sample_path(&built.design, &DependenceModel::Regeneration { rho: 0.0 }, 500, &mut b);
        assert_eq!(iid, regen);
    }

    #[test]
    fn regeneration_repeat_fraction() {
        let built = build_design(pp(), BasisFamily::cosine(), 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let path = sample_path(&built.design, &DependenceModel::Regeneration { rho: 0.5 }, n, &mut rng);
        let repeats = path.windows(2).filter(|w| w[0] == w[1]).count();
        let frac = repeats as f64 / (n - 1) as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn structural_coeff_examples() {
        let c = structural_coeffs(2.0, 1.0, 1, &[]).unwrap();
        assert!((c[0] - 0.9).abs() < 1e-15);
        let c = structural_coeffs(2.0, 1.0, 4, &[]).unwrap();
        let s = 0.9 / (1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0f64).sqrt();
        for (j, cj) in c.iter().enumerate() {
            assert!((cj - s / ((j + 1) as f64).powi(3)).abs() < 1e-15);
        }
        for (p, r, j) in [(1.5, 0.3, 7), (2.0, 2.0, 12), (3.0, 1.0, 3)] {
            let c = structural_coeffs(p, r, j, &alternating_signs(j)).unwrap();
            let weighted: f64 = c.iter().enumerate().map(|(i, v)| ((i + 1) as f64).powf(2.0 * p) * v * v).sum();
            assert!((weighted - (0.9 * r).powi(2)).abs() < 1e-12);
            assert!(weighted <= r * r);
            assert!(c[1] < 0.0);
        }
        assert!(structural_coeffs(1.0, 1.0, 3, &[]).is_err());
        assert!(structural_coeffs(2.0, 0.0, 3, &[]).is_err());
    }

    #[test]
    fn noiseless_exogenous_sample_is_exact() {
        let built = build_design(pp(), BasisFamily::cosine(), 4).unwrap();
        let c = structural_coeffs(2.0, 1.0, 4, &[]).unwrap();
        let err = ErrorModel { sigma_eps: 0.0, c_endo: 0.0 };
        let s = generate_sample(&built.design, &c, &err, &DependenceModel::Iid, 200, 4).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.y()[i], BasisFamily::cosine().eval_series(&c, s.z()[i]));
        }
        let again = generate_sample(&built.design, &c, &err, &DependenceModel::Iid, 200, 4).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn endogeneity_bounded() {
        let built = build_design(pp(), BasisFamily::cosine(), 4).unwrap();
        let err = ErrorModel { sigma_eps: 0.1, c_endo: 0.3 };
        let bound = err.endogeneity_sup_bound(&built.design);
        for a in 0..50 {
            for b in 0..50 {
                let v = err.endogeneity(&built.design, a as f64 / 49.0, b as f64 / 49.0);
                assert!(v.abs() <= bound + 1e-15);
            }
        }
    }

    #[test]
    fn beta_bounds() {
        let regen = DependenceModel::Regeneration { rho: 0.5 };
        assert_eq!(beta_bound(&regen, 3), 0.125);
        assert_eq!(beta_bound(&DependenceModel::Iid, 1), 0.0);
        assert_eq!(gamma_b(&regen), 12.0);
        let partial: f64 = (0..200).map(|k| ((k + 1) * (k + 1)) as f64 * beta_bound(&regen, k)).sum();
        assert!((partial - 12.0).abs() < 1e-10);
        let cop = DependenceModel::CopulaAr { rho: 0.5 };
        assert!(beta_bound(&cop, 1) <= 1.0);
        assert!((beta_bound(&cop, 10) - copula_ar_constant(0.5) * 0.5f64.powi(10)).abs() < 1e-18);
        assert!(gamma_b(&cop).is_finite());
    }

    #[test]
    fn dependence_validation() {
        assert!(DependenceModel::Regeneration { rho: 1.0 }.validate().is_err());
        assert!(DependenceModel::CopulaAr { rho: -0.1 }.validate().is_err());
        assert!(DependenceModel::Regeneration { rho: 0.5 }.validate().is_ok());
        assert!(!DependenceModel::Regeneration { rho: 0.5 }.has_pair_densities());
        assert!(DependenceModel::CopulaAr { rho: 0.5 }.has_pair_densities());
    }
}
