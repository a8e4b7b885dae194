mod common;

use std::collections::BTreeSet;

use common::*;
use mmwave_cs::channel::{
    build_1d_sensing_matrix, build_dictionaries, build_selection_precoders, trial_seed,
    AngleMode, DictionaryPair, Scenario, SystemConfig, DEFAULT_ELEMENT_CAP,
};
use mmwave_cs::estimators::{
    aod_stage, ls_1d_direct, ls_2d, match_2d, omp_1d, omp_2d, simplified_ls_2d,
    somp_aoa_stage, two_stage_somp, Aggregation, Ls1dSolver, SimplifiedLs2d, StoppingRule,
};
use mmwave_cs::linalg::{devec, dotc, kron, CMatrix, C64};
use proptest::prelude::*;

fn dictionaries(cfg: &SystemConfig) -> DictionaryPair {
    let (f, w) = build_selection_precoders(cfg).unwrap();
    build_dictionaries(cfg, &f, &w).unwrap()
}

fn sensing(dict: &DictionaryPair) -> CMatrix {
    build_1d_sensing_matrix(dict, DEFAULT_ELEMENT_CAP).unwrap()
}

fn scenario(cfg: &SystemConfig, snr: Option<f64>, seed: u64) -> Scenario {
    let cfg = match snr {
        Some(s) => cfg.clone().with_snr_db(s),
        None => cfg.clone().noiseless(),
    };
    Scenario::generate(&cfg, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn omp_1d_and_2d_agree_at_every_iteration(seed in any::<u64>(), snr in prop::option::of(-5.0f64..20.0), l in 1usize..5) {
        let cfg = SystemConfig { angle_mode: AngleMode::OffGrid, ..small_config(12, 6, 6, l) };
        let dict = dictionaries(&cfg);
        let a = sensing(&dict);
        let y = scenario(&cfg, snr, seed).measurement;
        let stop = StoppingRule::fixed(l + 2).unwrap();
        let e1 = omp_1d(y.clone().vec().as_slice(), &a, &stop).unwrap();
        let e2 = omp_2d(&y, &dict, &stop).unwrap();
        prop_assert_eq!(e1.support.to_flat(12), e2.support.to_flat(12));
        prop_assert_eq!(e1.history.len(), e2.history.len());
        for (h1, h2) in e1.history.iter().zip(&e2.history) {
            prop_assert!(rel_diff(&h1.weights, &h2.weights) < 1e-9);
            prop_assert!((h1.residual_norm - h2.residual_norm).abs() < 1e-9 * (1.0 + h2.residual_norm));
        }
    }

    #[test]
    fn match_2d_picks_the_1d_normalized_argmax(seed in any::<u64>()) {
        let cfg = small_config(10, 5, 4, 1);
        let dict = dictionaries(&cfg);
        let a = sensing(&dict);
        let y = random_matrix(4, 5, &mut rng(seed));
        let norms = a.column_norms();
        let yv = y.clone().vec();
        let scores: Vec<f64> = (0..a.cols())
            .map(|k| dotc(a.col(k), yv.as_slice()).norm() / norms[k])
            .collect();
        let best = scores
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (k, &s)| if s > acc.1 { (k, s) } else { acc })
            .0;
        let (i, j) = match_2d(&y, &dict, &BTreeSet::new()).unwrap();
        prop_assert_eq!(10 * j + i, best);
    }

    #[test]
    fn ls_2d_matches_svd_oracle(seed in any::<u64>(), picks in prop::collection::btree_set(0usize..64, 1..6)) {
        let cfg = small_config(8, 6, 5, 1);
        let dict = dictionaries(&cfg);
        let a = sensing(&dict);
        let y = random_matrix(5, 6, &mut rng(seed));
        let flat: Vec<usize> = picks.into_iter().collect();
        let pairs: Vec<(usize, usize)> = flat.iter().map(|&k| (k % 8, k / 8)).collect();
        let z = ls_2d(&y, &dict, &pairs).unwrap();
        let oracle = svd_lstsq(&a.select_columns(&flat), y.vec().as_slice());
        prop_assert!(rel_diff(&z, &oracle) < 1e-9);
    }

    #[test]
    fn simplified_ls_2d_equals_1d_ls(seed in any::<u64>(), n in 4usize..10) {
        let cfg = SystemConfig { angle_mode: AngleMode::OffGrid, ..small_config(n, n, n, 2) };
        let dict = dictionaries(&cfg);
        let y = scenario(&cfg, Some(5.0), seed).measurement;
        let z2 = simplified_ls_2d(&y, &dict).unwrap();
        let z1 = devec(CMatrix::column(ls_1d_direct(y.clone().vec().as_slice(), &sensing(&dict)).unwrap()), n, n).unwrap();
        prop_assert!(rel_diff(z1.as_slice(), z2.as_slice()) < 1e-9);
        let oracle = svd_lstsq(&sensing(&dict), y.vec().as_slice());
        prop_assert!(rel_diff(z2.as_slice(), &oracle) < 1e-8);
    }

    #[test]
    fn residuals_never_grow_and_are_orthogonal_to_the_support(seed in any::<u64>(), snr in 0.0f64..20.0) {
        let cfg = SystemConfig { angle_mode: AngleMode::OffGrid, ..small_config(16, 8, 8, 3) };
        let dict = dictionaries(&cfg);
        let a = sensing(&dict);
        let y = scenario(&cfg, Some(snr), seed).measurement;
        let yv = y.clone().vec().into_vec();
        let est = omp_2d(&y, &dict, &StoppingRule::fixed(6).unwrap()).unwrap();
        let mut prev = y.frobenius_norm();
        for it in &est.history {
            prop_assert!(it.residual_norm <= prev * (1.0 + 1e-12));
            prev = it.residual_norm;
        }
        let flat = est.support.to_flat(16);
        let a_s = a.select_columns(&flat);
        let fit = a_s.mul_vec(&est.weights).unwrap();
        let r: Vec<C64> = yv.iter().zip(&fit).map(|(y, f)| y - f).collect();
        prop_assert!((dotc(&r, &r).re.sqrt() - est.residual_norm).abs() < 1e-9 * (1.0 + est.residual_norm));
        let ortho = a_s.adjoint_mul_vec(&r).unwrap();
        prop_assert!(max_abs(&ortho) < 1e-9 * (1.0 + y.frobenius_norm()));

        let e1 = omp_1d(&yv, &a, &StoppingRule::fixed(6).unwrap()).unwrap();
        let mut prev = y.frobenius_norm();
        for it in &e1.history {
            prop_assert!(it.residual_norm <= prev * (1.0 + 1e-12));
            prev = it.residual_norm;
        }
    }

    #[test]
    fn somp_residual_never_grows(seed in any::<u64>()) {
        let cfg = SystemConfig { angle_mode: AngleMode::OffGrid, ..small_config(16, 8, 8, 3) };
        let dict = dictionaries(&cfg);
        let y = scenario(&cfg, Some(10.0), seed).measurement;
        let st = somp_aoa_stage(&y, &dict.a_r_eff, &StoppingRule::fixed(5).unwrap(), Aggregation::L1).unwrap();
        let mut prev = y.frobenius_norm();
        for &r in &st.history {
            prop_assert!(r <= prev * (1.0 + 1e-12));
            prev = r;
        }
        // refit residual is orthogonal to every selected row atom
        let a_s = dict.a_r_eff.select_columns(&st.rows);
        let resid = y.sub(&a_s.matmul(&st.coeff_matrix).unwrap()).unwrap();
        prop_assert!(a_s.adjoint_mul(&resid).unwrap().max_abs() < 1e-9 * (1.0 + y.frobenius_norm()));
    }

    #[test]
    fn aod_stage_equals_explicit_kronecker_omp(seed in any::<u64>(), l_sel in 1usize..4) {
        let cfg = small_config(12, 6, 6, 1);
        let dict = dictionaries(&cfg);
        let z = random_matrix(l_sel, 6, &mut rng(seed));
        let stop = StoppingRule::fixed(3).unwrap();
        let (triples, _) = aod_stage(&z, &dict.a_t_eff, &stop).unwrap();
        // vec(Z) with Z = I_L·W·Ã_Tᴴ ⇔ (conj(Ã_T) ⊗ I_L)·vec(W)
        let big = kron(&dict.a_t_eff.conj(), &CMatrix::identity(l_sel));
        let e = omp_1d(z.vec().as_slice(), &big, &stop).unwrap();
        let flat = e.support.to_flat(l_sel);
        prop_assert_eq!(flat.len(), triples.len());
        for ((&k, w), &(l, j, g)) in flat.iter().zip(&e.weights).zip(&triples) {
            prop_assert_eq!(k, l_sel * j + l);
            prop_assert!((w - g).norm() < 1e-9 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn two_stage_is_exact_with_orthogonal_rx_dictionary(seed in any::<u64>(), l in 1usize..5) {
        // grid_n = n_y makes the effective AoA atoms orthogonal
        let cfg = small_config(16, 16, 16, l);
        let dict = dictionaries(&cfg);
        let sc = scenario(&cfg, None, seed);
        let stop = StoppingRule::fixed(l).unwrap();
        let r = two_stage_somp(&sc.measurement, &dict, &stop, &stop, Aggregation::L1).unwrap();
        let mut got: Vec<(usize, usize)> = r.pairs.iter().map(|&(i, j, _)| (i, j)).collect();
        let mut truth = sc.paths.grid_indices(16).unwrap();
        got.sort_unstable();
        truth.sort_unstable();
        prop_assert_eq!(got, truth);
    }
}

#[test]
fn prepared_ls_operators_match_one_shot_calls() {
    let cfg = SystemConfig {
        angle_mode: AngleMode::OffGrid,
        ..small_config(8, 8, 8, 2)
    };
    let dict = dictionaries(&cfg);
    let a = sensing(&dict);
    let op = SimplifiedLs2d::new(&dict).unwrap();
    let solver = Ls1dSolver::new(a.clone()).unwrap();
    for t in 0..5 {
        let y = scenario(&cfg, Some(0.0), trial_seed(4, t)).measurement;
        let z = op.apply(&y).unwrap();
        assert!(rel_diff(z.as_slice(), simplified_ls_2d(&y, &dict).unwrap().as_slice()) < 1e-12);
        let yv = y.vec().into_vec();
        assert!(rel_diff(&solver.apply(&yv).unwrap(), &ls_1d_direct(&yv, &a).unwrap()) < 1e-12);
    }
}

#[test]
fn residual_rule_stops_once_the_measurement_is_explained() {
    let cfg = small_config(16, 8, 8, 2);
    let dict = dictionaries(&cfg);
    let sc = scenario(&cfg, None, 11);
    let eps = 1e-9 * sc.measurement.frobenius_norm();
    let est = omp_2d(&sc.measurement, &dict, &StoppingRule::residual(eps, 64).unwrap()).unwrap();
    assert!(est.residual_norm <= eps);
    assert!(est.iterations <= 64);
    let last_two = &est.history[est.history.len().saturating_sub(2)..];
    if last_two.len() == 2 {
        assert!(last_two[0].residual_norm > eps);
    }
}

#[test]
fn single_on_grid_path_is_found_in_one_iteration() {
    let cfg = small_config(32, 12, 12, 1);
    let dict = dictionaries(&cfg);
    for seed in 0..10 {
        let sc = scenario(&cfg, None, seed);
        let est = omp_2d(&sc.measurement, &dict, &StoppingRule::fixed(1).unwrap()).unwrap();
        assert_eq!(est.support.to_pairs(32), sc.paths.grid_indices(32).unwrap());
        assert!((est.weights[0] - sc.paths.gains[0]).norm() < 1e-9 * sc.paths.gains[0].norm());
        assert!(est.residual_norm <= 1e-10 * (1.0 + sc.measurement.frobenius_norm()));
    }
}
