mod common;

use std::f64::consts::PI;

use common::*;
use mmwave_cs::channel::{
    atom_2d, build_1d_sensing_matrix, build_dictionaries, build_grid, build_pilots,
    build_selection_precoders, cancel_pilots, generate_paths, grid_index, seeded_rng,
    steering_at, steering_vector, trial_seed, AngleMode, PilotKind, Scenario, SystemConfig,
    DEFAULT_ELEMENT_CAP,
};
use mmwave_cs::estimators::{reconstruct_channel, GridEstimate};
use mmwave_cs::harness::{nmse, Nmse};
use mmwave_cs::linalg::{kron_vec, norm2, C64};
use mmwave_cs::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_has_unit_norm_and_linear_phase(n in 1usize..80, f in -0.5f64..0.5) {
        let a = steering_at(n, f);
        prop_assert!((norm2(&a) - 1.0).abs() < 1e-12);
        for k in 1..n {
            // consecutive elements differ by exp(j2πf)
            let step = a[k] / a[k - 1];
            prop_assert!((step - C64::from_polar(1.0, 2.0 * PI * f)).norm() < 1e-9);
        }
    }

    #[test]
    fn steering_vector_uses_spacing_times_sine(n in 1usize..32, s in -1.0f64..1.0, d in 0.1f64..1.0) {
        prop_assert_eq!(steering_vector(n, d, s), steering_at(n, d * s));
    }

    #[test]
    fn grid_points_round_trip(n in 1usize..200) {
        let g = build_grid(n);
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], -0.5);
        for (i, &f) in g.iter().enumerate() {
            prop_assert!((f - (-0.5 + i as f64 / n as f64)).abs() < 1e-15);
            prop_assert_eq!(grid_index(f, n), Some(i));
        }
    }

    #[test]
    fn on_grid_draws_are_distinct_per_side(seed in any::<u64>(), l in 1usize..6) {
        let cfg = SystemConfig { n_paths: l, grid_n: 8, angle_mode: AngleMode::OnGrid, ..small_config(8, 8, 8, l) };
        let paths = generate_paths(&cfg, &mut seeded_rng(seed)).unwrap();
        let idx = paths.grid_indices(8).expect("on-grid");
        let mut rows: Vec<_> = idx.iter().map(|p| p.0).collect();
        let mut cols: Vec<_> = idx.iter().map(|p| p.1).collect();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(rows.len(), l);
        prop_assert_eq!(cols.len(), l);
    }

    #[test]
    fn off_grid_frequencies_stay_in_range(seed in any::<u64>()) {
        let cfg = SystemConfig { angle_mode: AngleMode::OffGrid, ..SystemConfig::default() };
        let paths = generate_paths(&cfg, &mut seeded_rng(seed)).unwrap();
        for &f in paths.aoa_freqs.iter().chain(&paths.aod_freqs) {
            prop_assert!((-0.5..0.5).contains(&f));
        }
    }
}

#[test]
fn sensing_columns_are_vectorized_atoms() {
    let cfg = small_config(6, 5, 4, 2);
    let (f, w) = build_selection_precoders(&cfg).unwrap();
    let dict = build_dictionaries(&cfg, &f, &w).unwrap();
    let a = build_1d_sensing_matrix(&dict, DEFAULT_ELEMENT_CAP).unwrap();
    assert_eq!(a.shape(), (4 * 5, 36));
    for j in 0..6 {
        for i in 0..6 {
            let atom = atom_2d(&dict, i, j).unwrap();
            let k = 6 * j + i;
            assert_eq!(a.col(k), atom.as_slice(), "column {k}");
            // vec(a_r·a_tᴴ) = conj(a_t) ⊗ a_r
            let conj_t: Vec<C64> = dict.a_t_eff.col(j).iter().map(|z| z.conj()).collect();
            let expected = kron_vec(&conj_t, dict.a_r_eff.col(i));
            assert!(max_abs_diff(atom.as_slice(), &expected) < 1e-15);
        }
    }
}

#[test]
fn effective_dictionaries_are_selected_full_dictionaries() {
    let cfg = small_config(16, 6, 5, 3);
    let (f, w) = build_selection_precoders(&cfg).unwrap();
    let dict = build_dictionaries(&cfg, &f, &w).unwrap();
    let ar = w.adjoint_mul(&dict.a_r_full).unwrap();
    let at = f.adjoint_mul(&dict.a_t_full).unwrap();
    assert_eq!(ar.as_slice(), dict.a_r_eff.as_slice());
    assert_eq!(at.as_slice(), dict.a_t_eff.as_slice());
    let grid = build_grid(16);
    for (j, &g) in grid.iter().enumerate() {
        assert!(max_abs_diff(dict.a_r_full.col(j), &steering_at(cfg.n_r, g)) < 1e-15);
    }
}

#[test]
fn noiseless_measurement_is_compressed_channel() {
    for pilots in [PilotKind::Identity, PilotKind::Dft] {
        let cfg = SystemConfig {
            pilots,
            sigma_p2: 2.5,
            ..SystemConfig::default()
        }
        .noiseless();
        let sc = Scenario::generate(&cfg, 17).unwrap();
        let direct = sc
            .combiner
            .adjoint_mul(&sc.channel.matmul(&sc.precoder).unwrap())
            .unwrap();
        assert!(rel_diff(sc.measurement.as_slice(), direct.as_slice()) < 1e-12, "{pilots}");
    }
}

#[test]
fn pilot_cancellation_rejects_non_orthogonal_pilots() {
    let cfg = SystemConfig::default();
    let mut x = build_pilots(&cfg);
    x.as_mut_slice()[1] = C64::new(0.3, 0.0);
    let y = random_matrix(cfg.n_y(), cfg.n_x, &mut rng(1));
    assert!(matches!(cancel_pilots(&y, &x, &cfg), Err(Error::Pilot { .. })));
}

#[test]
fn on_grid_channel_is_exactly_representable() {
    let cfg = SystemConfig {
        angle_mode: AngleMode::OnGrid,
        ..SystemConfig::default()
    };
    struct Truth(Vec<(usize, usize, C64)>);
    impl GridEstimate for Truth {
        fn atoms(&self, _: usize) -> Vec<(usize, usize, C64)> {
            self.0.clone()
        }
    }
    for seed in 0..20 {
        let sc = Scenario::generate(&cfg, seed).unwrap();
        let dict = sc.dictionaries(&cfg).unwrap();
        let idx = sc.paths.grid_indices(cfg.grid_n).unwrap();
        let truth = Truth(
            idx.iter()
                .zip(&sc.paths.gains)
                .map(|(&(i, j), &g)| (i, j, g))
                .collect(),
        );
        let h = reconstruct_channel(&truth, &dict).unwrap();
        match nmse(&sc.channel, &h).unwrap() {
            Nmse::Exact => {}
            Nmse::Db(v) => assert!(v < -250.0, "seed {seed}: {v}"),
            Nmse::Failed => unreachable!(),
        }
    }
}

#[test]
fn channel_energy_matches_gain_scaling() {
    // E‖H‖_F² = L · (n_t·n_r / L) with unit-norm steering vectors
    let cfg = SystemConfig {
        n_t: 16,
        n_r: 16,
        n_x: 8,
        n_rf: 2,
        q_slots: 4,
        grid_n: 16,
        ..SystemConfig::default()
    };
    let trials = 4000;
    let mut acc = 0.0;
    for t in 0..trials {
        let sc = Scenario::generate(&cfg, trial_seed(99, t)).unwrap();
        acc += sc.channel.frobenius_norm_sqr();
    }
    let mean = acc / trials as f64;
    let expected = (cfg.n_t * cfg.n_r) as f64;
    assert!((mean / expected - 1.0).abs() < 0.05, "mean {mean} vs {expected}");
}

#[test]
fn noise_variance_follows_snr_and_paths_are_shared() {
    let base = SystemConfig::default();
    for snr in [-10.0, 0.0, 10.0] {
        let noisy_cfg = base.clone().with_snr_db(snr);
        let clean_cfg = base.clone().noiseless();
        let mut acc = 0.0;
        let mut count = 0usize;
        for t in 0..300 {
            let seed = trial_seed(5, t);
            let noisy = Scenario::generate(&noisy_cfg, seed).unwrap();
            let clean = Scenario::generate(&clean_cfg, seed).unwrap();
            assert_eq!(noisy.channel, clean.channel);
            let d = noisy.measurement.sub(&clean.measurement).unwrap();
            acc += d.frobenius_norm_sqr();
            count += d.len();
        }
        let var = acc / count as f64;
        let expected = 10f64.powf(-snr / 10.0);
        assert!((var / expected - 1.0).abs() < 0.05, "snr {snr}: {var} vs {expected}");
    }
}

#[test]
fn scenarios_are_reproducible_from_seed() {
    let cfg = SystemConfig::default();
    let a = Scenario::generate(&cfg, 1234).unwrap();
    let b = Scenario::generate(&cfg, 1234).unwrap();
    let c = Scenario::generate(&cfg, 1235).unwrap();
    assert_eq!(a.measurement, b.measurement);
    assert_eq!(a.paths, b.paths);
    assert_ne!(a.measurement, c.measurement);
}

#[test]
fn too_many_on_grid_paths_is_infeasible() {
    let cfg = SystemConfig {
        angle_mode: AngleMode::OnGrid,
        grid_n: 4,
        n_paths: 5,
        ..small_config(4, 4, 4, 5)
    };
    assert!(matches!(
        generate_paths(&cfg, &mut seeded_rng(0)),
        Err(Error::Infeasible(_))
    ));
    // the configuration invariant catches it before any draw
    assert!(matches!(Scenario::generate(&cfg, 0), Err(Error::Config(_))));
}

#[test]
fn sensing_matrix_respects_element_cap() {
    let cfg = SystemConfig::default();
    let (f, w) = build_selection_precoders(&cfg).unwrap();
    let dict = build_dictionaries(&cfg, &f, &w).unwrap();
    let err = build_1d_sensing_matrix(&dict, 147_455).unwrap_err();
    assert!(matches!(err, Error::Resource { requested: 147_456, .. }), "{err}");
    assert!(build_1d_sensing_matrix(&dict, 147_456).is_ok());
}
