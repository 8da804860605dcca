use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use npiv::basis::BasisFamily;
use npiv::dgp::{
    beta_bound, build_design, gamma_b, sample_joint, sample_path, structural_coeffs, DependenceModel, JointDesign,
};
use npiv::galerkin::{assemble, matrix_inverse_norm_sq, Sample};
use npiv::selection::{delta_triplet, default_cap};
use npiv::theory::{theoretical_quantities, true_inverse_norms, Case};

const PP: Case = Case::PP { p: 2.0, a: 1.0 };

/// Two-sided Kolmogorov–Smirnov distance to the uniform law.
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn joint_draws_have_uniform_marginals_and_correlation() {
    let built = build_design(PP, BasisFamily::cosine(), 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let draws: Vec<(f64, f64)> = (0..n).map(|_| sample_joint(&built.design, &mut rng)).collect();
    let threshold = 1.63 / (n as f64).sqrt();
    assert!(ks_uniform(draws.iter().map(|d| d.0).collect()) < threshold);
    assert!(ks_uniform(draws.iter().map(|d| d.1).collect()) < threshold);
    let b = built.design.basis();
    let corr: f64 = draws
        .iter()
        .map(|&(z, w)| b.eval(2, z).unwrap() * b.eval(2, w).unwrap())
        .sum::<f64>()
        / n as f64;
    assert!((corr - built.design.lambda(2)).abs() < 0.02, "{corr}");
}

#[test]
fn paths_are_stationary() {
    let built = build_design(PP, BasisFamily::cosine(), 4).unwrap();
    let len = 40;
    let paths = 3000;
    for dep in [
        DependenceModel::Iid,
        DependenceModel::Regeneration { rho: 0.5 },
        DependenceModel::CopulaAr { rho: 0.5 },
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut at = vec![Vec::new(); 3];
        for _ in 0..paths {
            let path = sample_path(&built.design, &dep, len, &mut rng);
            for (slot, idx) in [0, len / 2, len - 1].into_iter().enumerate() {
                at[slot].push(path[idx]);
            }
        }
        let threshold = 1.63 / (paths as f64).sqrt();
        for column in at {
            assert!(ks_uniform(column.iter().map(|d| d.0).collect()) < threshold, "{dep:?}");
            assert!(ks_uniform(column.iter().map(|d| d.1).collect()) < threshold, "{dep:?}");
        }
    }
}

#[test]
fn copula_chain_keeps_the_design_correlation() {
    let built = build_design(PP, BasisFamily::cosine(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let path = sample_path(&built.design, &DependenceModel::CopulaAr { rho: 0.3 }, n, &mut rng);
    let b = built.design.basis();
    let corr: f64 = path
        .iter()
        .map(|&(z, w)| b.eval(2, z).unwrap() * b.eval(2, w).unwrap())
        .sum::<f64>()
        / n as f64;
    // lag correlation of the chain inflates the standard error
    assert!((corr - built.design.lambda(2)).abs() < 0.03, "{corr}");
}

#[test]
fn mixing_sums_converge() {
    let dep = DependenceModel::Regeneration { rho: 0.5 };
    assert_eq!(beta_bound(&dep, 3), 0.125);
    let partial: f64 = (0..200).map(|k| ((k + 1) * (k + 1)) as f64 * beta_bound(&dep, k)).sum();
    assert!((partial - 12.0).abs() < 1e-9);
    assert_eq!(gamma_b(&dep), 12.0);
    let copula = DependenceModel::CopulaAr { rho: 0.5 };
    let partial: f64 = (0..400).map(|k| ((k + 1) * (k + 1)) as f64 * beta_bound(&copula, k)).sum();
    assert!((partial - gamma_b(&copula)).abs() < 1e-6 * partial);
    assert_eq!(beta_bound(&DependenceModel::Iid, 1), 0.0);
}

#[test]
fn empirical_delta_tracks_population_delta_on_identity() {
    let design = JointDesign::identity(BasisFamily::cosine(), 3);
    let phi = structural_coeffs(2.0, 1.0, 3, &[]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 100_000;
    let err = npiv::dgp::ErrorModel { sigma_eps: 0.3, c_endo: 0.0 };
    let sample: Sample =
        npiv::dgp::generate_sample_with(&design, &phi, &err, &DependenceModel::Iid, n, &mut rng).unwrap();
    let b = design.basis();
    let system = assemble(&sample, 3, b, b).unwrap();
    let a_hat: Vec<f64> = (1..=3).map(|m| matrix_inverse_norm_sq(&system.leading(m).unwrap().t_hat)).collect();
    let a = true_inverse_norms(&design, 3);
    for m in 1..=3 {
        let hat = delta_triplet(&a_hat, m).unwrap().small_delta;
        let pop = delta_triplet(&a, m).unwrap().small_delta;
        assert!((hat / pop - 1.0).abs() < 0.2, "m={m}: {hat} vs {pop}");
    }
}

#[test]
fn oracle_dimension_never_exceeds_truncation() {
    let built = build_design(PP, BasisFamily::cosine(), 8).unwrap();
    let phi = structural_coeffs(2.0, 1.0, 8, &[]).unwrap();
    let mut prev = 0;
    for n in [100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000] {
        let q = theoretical_quantities(&built.design, &phi, &PP, n, default_cap(n)).unwrap();
        assert!(1 <= q.m_star && q.m_star <= q.m_minus && q.m_minus <= q.m_plus);
        assert!(q.m_star >= prev);
        prev = q.m_star;
    }
    // PP, J = 8: a_2 = 4/s², so M⁻ stays at 1 until α_n exceeds 64/s²
    let q = theoretical_quantities(&built.design, &phi, &PP, 16_000, default_cap(16_000)).unwrap();
    assert_eq!((q.m_minus, q.m_star), (1, 1));
}
