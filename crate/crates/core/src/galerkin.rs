//! Empirical Galerkin systems and the thresholded least-squares estimate.
//!
//! For a sample `(Y_i, Z_i, W_i)` and dimension `m` the empirical system is
//!
//! ```text
//! [T̂]_m = n⁻¹ Σ_i f_W(W_i) f_Z(Z_i)ᵗ,    [ĝ]_m = n⁻¹ Σ_i Y_i f_W(W_i)
//! ```
//!
//! and the estimate is `[T̂]_m⁻¹[ĝ]_m` whenever `‖[T̂]_m⁻¹‖_S² ≤ n`, the zero
//! vector otherwise.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::exact::ExactSum;

/// Relative cutoff on the smallest singular value below which a matrix is
/// treated as singular.
pub const SINGULAR_CUTOFF: f64 = 1e-14;

/// Observed triples `(Y_i, Z_i, W_i)`; regressors and instruments live in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    y: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    y: f64,
    z: f64,
    w: f64,
}

impl Sample {
    pub fn new(y: Vec<f64>, z: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if y.len() != z.len() || y.len() != w.len() {
            return Err(Error::Sample(format!(
                "length mismatch: y={}, z={}, w={}",
                y.len(),
                z.len(),
                w.len()
            )));
        }
        for (i, (&zi, &wi)) in z.iter().zip(&w).enumerate() {
            check_unit(i, "z", zi)?;
            check_unit(i, "w", wi)?;
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Sample(format!("observation {i}: y is not finite")));
        }
        Ok(Self { y, z, w })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// Multiplies every response by `factor`.
    pub fn scale_responses(&self, factor: f64) -> Self {
        Self {
            y: self.y.iter().map(|v| v * factor).collect(),
            z: self.z.clone(),
            w: self.w.clone(),
        }
    }

    /// Reads a `y,z,w` CSV with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> std::result::Result<Self, SampleCsvError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(SampleCsvError::Csv)?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["y", "z", "w"] {
            return Err(SampleCsvError::Invalid(Error::Sample(format!(
                "expected header `y,z,w`, found `{}`",
                names.join(",")
            ))));
        }
        let (mut y, mut z, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(SampleCsvError::Csv)?;
            y.push(row.y);
            z.push(row.z);
            w.push(row.w);
        }
        Sample::new(y, z, w).map_err(SampleCsvError::Invalid)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file).map_err(|e| match e {
            SampleCsvError::Csv(source) => Error::csv(path, source),
            SampleCsvError::Invalid(err) => err,
        })
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for i in 0..self.len() {
            wtr.serialize(Row {
                y: self.y[i],
                z: self.z[i],
                w: self.w[i],
            })?;
        }
        if self.is_empty() {
            wtr.write_record(["y", "z", "w"])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_csv_writer(std::io::BufWriter::new(file))
            .map_err(|e| Error::csv(path, e))
    }
}

#[derive(Debug)]
pub enum SampleCsvError {
    Csv(csv::Error),
    Invalid(Error),
}

impl std::fmt::Display for SampleCsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleCsvError::Csv(e) => e.fmt(f),
            SampleCsvError::Invalid(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for SampleCsvError {}

fn check_unit(i: usize, name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Sample(format!("observation {i}: {name}={v} outside [0,1]")))
    }
}

/// Empirical matrix `[T̂]_m` and vector `[ĝ]_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSystem {
    pub m: usize,
    pub t_hat: DMatrix<f64>,
    pub g_hat: DVector<f64>,
    pub n: usize,
}

impl GalerkinSystem {
    /// Leading `k × k` sub-system; `[T̂]_k` is the upper-left block of `[T̂]_m`.
    pub fn leading(&self, k: usize) -> Result<GalerkinSystem> {
        if k < 1 || k > self.m {
            return Err(Error::Dimension(format!(
                "leading block {k} not in 1..={}",
                self.m
            )));
        }
        Ok(GalerkinSystem {
            m: k,
            t_hat: self.t_hat.view((0, 0), (k, k)).into_owned(),
            g_hat: self.g_hat.rows(0, k).into_owned(),
            n: self.n,
        })
    }
}

/// Assembles `[T̂]_m` and `[ĝ]_m`. Every entry is a correctly rounded sum, so
/// the result does not depend on the order of the observations.
pub fn assemble(
    sample: &Sample,
    m: usize,
    basis_z: &BasisFamily,
    basis_w: &BasisFamily,
) -> Result<GalerkinSystem> {
    if m < 1 {
        return Err(Error::Dimension("Galerkin dimension must be at least 1".into()));
    }
    let n = sample.len();
    if n < 1 {
        return Err(Error::Sample("empty sample".into()));
    }
    let mut t_acc: Vec<ExactSum> = (0..m * m).map(|_| ExactSum::default()).collect();
    let mut g_acc: Vec<ExactSum> = (0..m).map(|_| ExactSum::default()).collect();
    let mut fz = vec![0.0; m];
    let mut fw = vec![0.0; m];
    for i in 0..n {
        basis_z.fill(sample.z[i], &mut fz);
        basis_w.fill(sample.w[i], &mut fw);
        for j in 0..m {
            g_acc[j].add(sample.y[i] * fw[j]);
            let row = &mut t_acc[j * m..(j + 1) * m];
            for (acc, &zl) in row.iter_mut().zip(&fz) {
                acc.add(fw[j] * zl);
            }
        }
    }
    let nf = n as f64;
    let t_sums: Vec<f64> = t_acc.iter().map(|a| a.value() / nf).collect();
    let g_sums: Vec<f64> = g_acc.iter().map(|a| a.value() / nf).collect();
    Ok(GalerkinSystem {
        m,
        t_hat: DMatrix::from_row_slice(m, m, &t_sums),
        g_hat: DVector::from_vec(g_sums),
        n,
    })
}

/// Largest singular value.
pub fn spectral_norm(matrix: &DMatrix<f64>) -> f64 {
    if matrix.is_empty() {
        return 0.0;
    }
    matrix.singular_values().max()
}

fn inverse_norm_sq_from(singular_values: &DVector<f64>) -> f64 {
    let max = singular_values.max();
    let min = singular_values.min();
    if !(max > 0.0) || min < SINGULAR_CUTOFF * max {
        f64::INFINITY
    } else {
        (min * min).recip()
    }
}

/// `‖[T̂]_m⁻¹‖_S²`, or `+∞` when `[T̂]_m` is numerically singular.
pub fn inverse_norm_sq(system: &GalerkinSystem) -> f64 {
    matrix_inverse_norm_sq(&system.t_hat)
}

/// `‖A⁻¹‖_S²` for a square matrix, `+∞` when numerically singular.
pub fn matrix_inverse_norm_sq(matrix: &DMatrix<f64>) -> f64 {
    if matrix.is_empty() {
        return f64::INFINITY;
    }
    inverse_norm_sq_from(&matrix.singular_values())
}

/// Which norm the threshold indicator compares against `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdForm {
    /// `‖[T̂]_m⁻¹‖_S² ≤ n`
    #[default]
    Squared,
    /// `‖[T̂]_m⁻¹‖_S ≤ n`
    Unsquared,
}

impl ThresholdForm {
    pub fn admits(self, inv_norm_sq: f64, n: usize) -> bool {
        let n = n as f64;
        match self {
            ThresholdForm::Squared => inv_norm_sq <= n,
            ThresholdForm::Unsquared => inv_norm_sq.sqrt() <= n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientEstimate {
    pub m: usize,
    /// `[θ̂]_m`; the zero vector when thresholded away.
    pub theta: Vec<f64>,
    pub thresholded: bool,
    /// `‖[T̂]_m⁻¹‖_S²`, `+∞` if singular.
    pub inv_norm_sq: f64,
}

impl CoefficientEstimate {
    pub fn norm_sq(&self) -> f64 {
        self.theta.iter().map(|v| v * v).sum()
    }
}

pub fn threshold_ls_estimate(system: &GalerkinSystem) -> CoefficientEstimate {
    threshold_ls_estimate_with(system, ThresholdForm::Squared)
}

pub fn threshold_ls_estimate_with(system: &GalerkinSystem, form: ThresholdForm) -> CoefficientEstimate {
    let m = system.m;
    let svd = system.t_hat.clone().svd(true, true);
    let inv_norm_sq = inverse_norm_sq_from(&svd.singular_values);
    let zero = || CoefficientEstimate {
        m,
        theta: vec![0.0; m],
        thresholded: true,
        inv_norm_sq,
    };
    if !inv_norm_sq.is_finite() || !form.admits(inv_norm_sq, system.n) {
        return zero();
    }
    match svd.solve(&system.g_hat, 0.0) {
        Ok(theta) => CoefficientEstimate {
            m,
            theta: theta.iter().copied().collect(),
            thresholded: false,
            inv_norm_sq,
        },
        Err(_) => zero(),
    }
}

/// `Σ_j (a_j − b_j)²` with the shorter vector zero-padded.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|j| {
            let d = a.get(j).copied().unwrap_or(0.0) - b.get(j).copied().unwrap_or(0.0);
            d * d
        })
        .sum()
}

/// Squared `L²[0,1]` distance between the estimate and the function with
/// coefficients `true_coeffs`; exact by Parseval.
pub fn l2_error(estimate: &CoefficientEstimate, true_coeffs: &[f64]) -> f64 {
    squared_distance(&estimate.theta, true_coeffs)
}
