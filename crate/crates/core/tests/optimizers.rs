use fedualex::bregman::{client_weight, GeneralizedDgf, Regularizer};
use fedualex::linalg::{norms, Matrix};
use fedualex::optimizers::{
    fedmid_local_steps, fedmip_local_steps, fedualex_local_step, fedualex_local_steps, fedualex_server_round,
    shadow_primal, DualExtrapolation, Ergodic, FeDualEx, FeDualExClientState, FeDualExServerState, FedDualAvg, FedMiD,
    FedMiP, FederatedMethod, GradientOracle, LocalStep, MirrorProxClientState, StepSizes,
};
use fedualex::pair::PrimalPair;
use fedualex::problems::{
    generate_l1_problem, generate_nuclear_problem, generate_quadratic_problem, BilinearL1Problem, HalfStep, NoiseKey,
    NoiseModel, SaddleProblem,
};
use proptest::prelude::*;

fn v(x: f64, y: f64) -> PrimalPair<f64> {
    PrimalPair::from_vectors(vec![x], vec![y])
}

/// `f(x, y) = xy` on a box wide enough to never bind: `g(x, y) = (y, −x)`.
fn xy_game() -> BilinearL1Problem<f64> {
    BilinearL1Problem::new(Matrix::identity(1), Matrix::zeros(1, 1), 0.0, 100.0).unwrap()
}

fn steps(eta_c: f64, eta_s: f64) -> StepSizes<f64> {
    StepSizes::new(eta_c, eta_s).unwrap()
}

fn assert_close(a: &PrimalPair<f64>, b: &PrimalPair<f64>, tol: f64) {
    let d = a.sub(b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(d <= tol, "{a:?} vs {b:?}");
}

#[test]
fn fedualex_half_step_by_hand() {
    let game = xy_game();
    let oracle = GradientOracle::new(&game, NoiseModel::noiseless());
    let mut client = FeDualExClientState {
        client: 0,
        varsigma: v(0.0, 0.0),
    };
    let anchor = v(1.0, 1.0);
    let at = LocalStep::new(0, 1, 0);
    let out = fedualex_local_step(&mut client, &anchor, Regularizer::none(), steps(0.1, 1.0), at, &oracle).unwrap();
    assert_eq!(out.z, v(1.0, 1.0));
    assert_close(&out.z_half, &v(0.9, 1.1), 1e-15);
    // ς = 0.1·g(0.9, 1.1), so the next primal point is the extragradient iterate
    assert_close(&anchor.sub(&client.varsigma), &v(0.89, 1.09), 1e-15);
}

#[test]
fn fedualex_full_threshold_zeroes_the_half_point() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(4, 3, 1).unwrap();
    let oracle = GradientOracle::new(&p, NoiseModel::noiseless());
    let reg = Regularizer::l1_box(1.0, 0.05).unwrap();
    let z0 = p.init_point(1).unwrap();
    let mut client = FeDualExClientState {
        client: 0,
        varsigma: PrimalPair::zeros(z0.shape()),
    };
    // weight 0.1·(5·10 + 1) = 5.1 dwarfs every |ω|
    let at = LocalStep::new(5, 10, 0);
    let out = fedualex_local_step(&mut client, &z0, reg, steps(0.1, 1.0), at, &oracle).unwrap();
    assert!(out.z_half.iter().all(|&v| v == 0.0));
}

#[test]
fn fedualex_zero_step_is_a_fixed_point() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(4, 3, 2).unwrap();
    let oracle = GradientOracle::new(&p, NoiseModel::new(0.1, 2).unwrap());
    let reg = p.regularizer();
    let z0 = p.init_point(2).unwrap();
    let zero = PrimalPair::zeros(z0.shape());
    let mut client = FeDualExClientState {
        client: 0,
        varsigma: zero.clone(),
    };
    for k in 0..5 {
        let out =
            fedualex_local_step(&mut client, &z0, reg, steps(0.0, 1.0), LocalStep::new(0, 5, k), &oracle).unwrap();
        assert_eq!(out.z, z0);
        assert_eq!(out.z_half, z0);
        assert_eq!(client.varsigma, zero);
    }
}

#[test]
fn server_round_examples() {
    let s0 = PrimalPair::from_vectors(vec![0.5, -1.0], vec![2.0]);
    let d = PrimalPair::from_vectors(vec![0.25, 0.125], vec![-0.5]);
    let mut server = FeDualExServerState {
        varsigma: s0.clone(),
        anchor: s0.clone(),
        steps: steps(0.1, 1.0),
    };
    fedualex_server_round(&mut server, &[&s0, &s0, &s0]).unwrap();
    assert_eq!(server.varsigma, s0);

    let moved = s0.add(&d);
    fedualex_server_round(&mut server, &[&moved]).unwrap();
    assert_eq!(server.varsigma, moved);

    server.varsigma = s0.clone();
    let back = s0.sub(&d);
    fedualex_server_round(&mut server, &[&moved, &back]).unwrap();
    assert_close(&server.varsigma, &s0, 1e-15);

    // η^s = 0.5 moves half way to the client mean
    server.steps = steps(0.1, 0.5);
    fedualex_server_round(&mut server, &[&moved]).unwrap();
    assert_close(&server.varsigma, &s0.add(&d.scale(0.5)), 1e-15);
}

#[test]
fn shadow_projection_cases() {
    let game = xy_game();
    let oracle = GradientOracle::new(&game, NoiseModel::noiseless());
    let reg = Regularizer::none();
    let ell = GeneralizedDgf::new(reg, 0.1).unwrap();
    let anchor = v(1.0, 1.0);
    let at = LocalStep::new(0, 1, 0);

    let mut one = vec![FeDualExClientState {
        client: 0,
        varsigma: v(0.0, 0.0),
    }];
    let out = fedualex_local_steps(&mut one, &anchor, reg, steps(0.1, 1.0), at, &oracle).unwrap();
    assert_eq!(shadow_primal(&out, &ell).unwrap(), out[0].z_half);

    let mut same: Vec<_> = (0..3)
        .map(|client| FeDualExClientState {
            client,
            varsigma: v(0.2, -0.1),
        })
        .collect();
    let out = fedualex_local_steps(&mut same, &anchor, reg, steps(0.1, 1.0), at, &oracle).unwrap();
    assert!(out.iter().all(|o| o.z_half == out[0].z_half));
    assert_close(&shadow_primal(&out, &ell).unwrap(), &out[0].z_half, 1e-15);

    let mut two = vec![
        FeDualExClientState {
            client: 0,
            varsigma: v(0.3, 0.0),
        },
        FeDualExClientState {
            client: 1,
            varsigma: v(-0.2, 0.4),
        },
    ];
    let out = fedualex_local_steps(&mut two, &anchor, reg, steps(0.1, 1.0), at, &oracle).unwrap();
    let mid = out[0].z_half.add(&out[1].z_half).scale(0.5);
    assert_close(&shadow_primal(&out, &ell).unwrap(), &mid, 1e-15);
}

#[test]
fn fedmip_is_extragradient_without_regularizer() {
    let game = xy_game();
    let oracle = GradientOracle::new(&game, NoiseModel::noiseless());
    let mut clients = vec![MirrorProxClientState {
        client: 0,
        z: v(1.0, 1.0),
    }];
    let halves = fedmip_local_steps(
        &mut clients,
        Regularizer::none(),
        steps(0.1, 1.0),
        LocalStep::new(0, 1, 0),
        &oracle,
    )
    .unwrap();
    assert_close(&halves[0], &v(0.9, 1.1), 1e-15);
    assert_close(&clients[0].z, &v(0.89, 1.09), 1e-15);

    let mut mip = FedMiP::new(v(1.0, 1.0), Regularizer::none(), steps(0.1, 1.0), 1).unwrap();
    let report = mip.run_round(0, &[0], &oracle).unwrap();
    assert_close(&report.server_point, &v(0.89, 1.09), 1e-15);
}

#[test]
fn fedmip_edge_cases() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(4, 3, 3).unwrap();
    let oracle = GradientOracle::new(&p, NoiseModel::new(0.1, 3).unwrap());
    let z0 = p.init_point(3).unwrap();

    let mut frozen = FedMiP::new(z0.clone(), p.regularizer(), steps(0.0, 1.0), 4).unwrap();
    for r in 0..3 {
        let report = frozen.run_round(r, &[0, 1], &oracle).unwrap();
        assert_eq!(report.server_point, z0);
        assert!(report.outputs.iter().all(|o| *o == z0));
    }

    // λ' = 100·0.1 = 10 exceeds |z − η g| everywhere
    let heavy = Regularizer::l1_box(100.0, 0.05).unwrap();
    let mut clients = vec![MirrorProxClientState { client: 0, z: z0 }];
    fedmip_local_steps(&mut clients, heavy, steps(0.1, 1.0), LocalStep::new(0, 1, 0), &oracle).unwrap();
    assert!(clients[0].z.iter().all(|&v| v == 0.0));
}

#[test]
fn fedmid_without_regularizer_is_gradient_descent_ascent() {
    let game = xy_game();
    let oracle = GradientOracle::new(&game, NoiseModel::noiseless());
    let mut clients = vec![MirrorProxClientState {
        client: 0,
        z: v(1.0, 1.0),
    }];
    fedmid_local_steps(
        &mut clients,
        Regularizer::none(),
        steps(0.1, 1.0),
        LocalStep::new(0, 1, 0),
        &oracle,
    )
    .unwrap();
    assert_close(&clients[0].z, &v(0.9, 1.1), 1e-15);

    let mut mid = FedMiD::new(v(1.0, 1.0), Regularizer::none(), steps(0.1, 1.0), 1).unwrap();
    let report = mid.run_round(0, &[0], &oracle).unwrap();
    assert_close(&report.server_point, &v(0.9, 1.1), 1e-15);
}

#[test]
fn feddualavg_stays_put_without_gradient() {
    let flat = BilinearL1Problem::new(Matrix::zeros(3, 4), Matrix::zeros(3, 1), 0.1, 0.05).unwrap();
    let oracle = GradientOracle::new(&flat, NoiseModel::noiseless());
    let z0 = flat.init_point(4).unwrap();
    // a zero-threshold start keeps the first projection at z0
    let mut da = FedDualAvg::new(z0.clone(), Regularizer::l1_box(0.0, 0.05).unwrap(), steps(0.1, 1.0), 3).unwrap();
    for r in 0..4 {
        let report = da.run_round(r, &[0, 1], &oracle).unwrap();
        assert_eq!(report.server_point, z0);
    }
}

#[test]
fn feddualavg_solves_the_quadratic() {
    let q = generate_quadratic_problem::<f64>(50, 9).unwrap();
    let oracle = GradientOracle::new(&q, NoiseModel::noiseless());
    let init = q.init_point(9).unwrap();
    let mut da = FedDualAvg::new(init, q.regularizer(), steps(0.1, 1.0), 1).unwrap();
    let mut last = None;
    for r in 0..10_000 {
        last = Some(da.run_round(r, &[0], &oracle).unwrap().server_point);
    }
    let x = last.unwrap();
    let err =
        x.x.as_slice()
            .iter()
            .zip(q.minimizer())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-4, "l_inf error {err}");
}

#[test]
fn stochastic_and_deterministic_sequential_agree_without_noise() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(6, 4, 5).unwrap();
    let z0 = p.init_point(5).unwrap();
    let silent = GradientOracle::new(&p, NoiseModel::new(0.0, 77).unwrap());
    let exact = GradientOracle::new(&p, NoiseModel::noiseless());
    let mut a = DualExtrapolation::new(z0.clone(), p.regularizer(), 0.1).unwrap();
    let mut b = DualExtrapolation::new(z0, p.regularizer(), 0.1).unwrap();
    for _ in 0..50 {
        assert_eq!(a.step(&silent).unwrap(), b.step(&exact).unwrap());
    }
    assert_eq!(a.varsigma(), b.varsigma());
}

#[test]
fn fedualex_single_client_is_sequential_dual_extrapolation() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(8, 5, 6).unwrap();
    let z0 = p.init_point(6).unwrap();
    let noise = NoiseModel::new(0.1, 6).unwrap();
    let (k, rounds) = (3, 5);
    let fed_oracle = GradientOracle::new(&p, noise);
    let seq_oracle = GradientOracle::new(&p, noise);
    let mut fed = FeDualEx::new(z0.clone(), p.regularizer(), steps(0.05, 1.0), k).unwrap();
    let mut seq = DualExtrapolation::new(z0, p.regularizer(), 0.05).unwrap();
    for r in 0..rounds {
        let report = fed.run_round(r, &[0], &fed_oracle).unwrap();
        for out in &report.outputs {
            assert_eq!(*out, seq.step(&seq_oracle).unwrap().z_half);
        }
    }
    assert_eq!(fed.server.varsigma, *seq.varsigma());
}

#[test]
fn one_local_step_round_is_an_averaged_extragradient_step() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(5, 4, 7).unwrap();
    let noise = NoiseModel::new(0.1, 7).unwrap();
    let oracle = GradientOracle::new(&p, noise);
    let z0 = p.init_point(7).unwrap();
    let eta = 0.05;
    let participants = [0, 1, 2, 3];
    let mut fed = FeDualEx::new(z0.clone(), Regularizer::none(), steps(eta, 1.0), 1).unwrap();
    let mut z = z0.clone();
    for r in 0..4 {
        fed.run_round(r, &participants, &oracle).unwrap();
        let mut avg = PrimalPair::zeros(z.shape());
        for &m in &participants {
            let key = |half| NoiseKey::new(m, r, 1, 0, half);
            let half = z.sub(
                &noise
                    .stochastic_gradient(&p, &z, key(HalfStep::First))
                    .unwrap()
                    .scale(eta),
            );
            avg.axpy(
                1.0 / participants.len() as f64,
                &noise.stochastic_gradient(&p, &half, key(HalfStep::Second)).unwrap(),
            );
        }
        z = z.sub(&avg.scale(eta));
        let fed_z = fed.server.anchor.sub(&fed.server.varsigma);
        assert_close(&fed_z, &z, 1e-13);
    }
}

#[test]
fn sequential_without_regularizer_spirals_in() {
    let game = xy_game();
    let oracle = GradientOracle::new(&game, NoiseModel::noiseless());
    let mut de = DualExtrapolation::new(v(1.0, 1.0), Regularizer::none(), 0.1).unwrap();
    let mut avg = Ergodic::new(v(0.0, 0.0).shape());
    let mut norm_at = Vec::new();
    for t in 1..=1000 {
        avg.push(&de.step(&oracle).unwrap().z_half);
        if t == 100 || t == 1000 {
            norm_at.push(avg.mean().unwrap().norm_sq().sqrt());
        }
    }
    assert!(norm_at[1] < norm_at[0], "{norm_at:?}");

    let mut still = DualExtrapolation::new(v(1.0, 1.0), Regularizer::none(), 0.0).unwrap();
    for _ in 0..10 {
        let s = still.step(&oracle).unwrap();
        assert_eq!((s.z, s.z_half), (v(1.0, 1.0), v(1.0, 1.0)));
    }
}

/// Ergodic gap after `t` steps with the step size tuned to `t`, averaged
/// over seeds.
fn tuned_noisy_gap(toy: &BilinearL1Problem<f64>, t: usize, seeds: u64) -> f64 {
    let (beta, b, sigma) = (2.0f64, 2.725f64, 0.1f64);
    let eta = (1.0 / (3.0 * beta * beta)).min(b.sqrt() / (3f64.sqrt() * sigma * (t as f64).sqrt()));
    let mut total = 0.0;
    for seed in 0..seeds {
        let oracle = GradientOracle::new(toy, NoiseModel::new(sigma, seed).unwrap());
        let mut de = DualExtrapolation::new(v(-0.7, 0.6), toy.regularizer(), eta).unwrap();
        let mut avg = Ergodic::new(v(0.0, 0.0).shape());
        for _ in 0..t {
            avg.push(&de.step(&oracle).unwrap().z_half);
        }
        total += toy.duality_gap(&avg.mean().unwrap()).unwrap();
    }
    total / seeds as f64
}

#[test]
fn noisy_sequential_gap_decays() {
    let toy = BilinearL1Problem::new(Matrix::column(vec![2.0]), Matrix::column(vec![0.3]), 0.1, 1.0).unwrap();
    let short = tuned_noisy_gap(&toy, 1000, 10);
    let long = tuned_noisy_gap(&toy, 4000, 10);
    assert!(long < short, "gap(1000) = {short}, gap(4000) = {long}");
}

fn max_abs(p: &PrimalPair<f64>) -> f64 {
    p.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn methods(
    z0: &PrimalPair<f64>,
    reg: Regularizer<f64>,
    s: StepSizes<f64>,
    k: usize,
) -> Vec<Box<dyn FederatedMethod<f64>>> {
    vec![
        Box::new(FeDualEx::new(z0.clone(), reg, s, k).unwrap()),
        Box::new(FedMiP::new(z0.clone(), reg, s, k).unwrap()),
        Box::new(FedMiD::new(z0.clone(), reg, s, k).unwrap()),
        Box::new(FedDualAvg::new(z0.clone(), reg, s, k).unwrap()),
    ]
}

#[test]
fn every_method_stays_feasible_on_l1() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(12, 8, 9).unwrap();
    let oracle = GradientOracle::new(&p, NoiseModel::new(0.5, 9).unwrap());
    let z0 = p.init_point(9).unwrap();
    for eta_c in [1.0, 0.1, 0.01] {
        for mut m in methods(&z0, p.regularizer(), steps(eta_c, 0.5), 4) {
            for r in 0..6 {
                let report = m.run_round(r, &[0, 1, 2], &oracle).unwrap();
                for z in report.outputs.iter().chain([&report.server_point]) {
                    assert!(max_abs(z) <= p.radius + 1e-12, "{} eta_c={eta_c}", m.method());
                }
            }
        }
    }
}

#[test]
fn every_method_stays_feasible_on_nuclear() {
    let p = generate_nuclear_problem::<f64>(10, 8, 4, 10).unwrap();
    let oracle = GradientOracle::new(&p, NoiseModel::new(0.5, 10).unwrap());
    let z0 = p.init_point(10).unwrap();
    for mut m in methods(&z0, p.regularizer(), steps(1.0, 1.0), 3) {
        for r in 0..4 {
            let report = m.run_round(r, &[0, 1], &oracle).unwrap();
            for z in report.outputs.iter().chain([&report.server_point]) {
                for block in [&z.x, &z.y] {
                    assert!(norms::spectral(block).unwrap() <= p.radius + 1e-8, "{}", m.method());
                }
            }
        }
    }
}

#[test]
fn oracle_calls_follow_the_step_count() {
    let p: BilinearL1Problem<f64> = generate_l1_problem(6, 4, 11).unwrap();
    let z0 = p.init_point(11).unwrap();
    let (k, participants) = (3, [0usize, 2, 5]);
    for mut m in methods(&z0, p.regularizer(), steps(0.1, 1.0), k) {
        let oracle = GradientOracle::new(&p, NoiseModel::new(0.1, 11).unwrap());
        for r in 0..2 {
            m.run_round(r, &participants, &oracle).unwrap();
        }
        let per_step = m.method().oracle_calls_per_step();
        assert_eq!(
            oracle.calls(),
            2 * participants.len() as u64 * k as u64 * per_step,
            "{}",
            m.method()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn thresholding_weight_increases_within_a_round(
        eta_c in 1e-4f64..10.0, eta_s in 1e-3f64..10.0, k_max in 2usize..20, r in 0usize..1000, k in 0usize..20,
    ) {
        let k = k % (k_max - 1);
        prop_assert!(client_weight(eta_c, eta_s, r, k_max, k + 1) > client_weight(eta_c, eta_s, r, k_max, k));
    }

    /// Across a round boundary the weight moves from `η^c(η^s rK + K − 1)`
    /// to `η^c η^s (r + 1) K`, an increase exactly when `η^s K > K − 1`.
    #[test]
    fn thresholding_weight_across_rounds(
        eta_c in 1e-4f64..10.0, eta_s in 1e-3f64..2.0, k_max in 1usize..20, r in 0usize..1000,
    ) {
        let end = client_weight(eta_c, eta_s, r, k_max, k_max - 1);
        let start = client_weight(eta_c, eta_s, r + 1, k_max, 0);
        let margin = eta_s * k_max as f64 - (k_max as f64 - 1.0);
        if margin > 1e-9 {
            prop_assert!(start > end);
        } else if margin < -1e-9 {
            prop_assert!(start < end);
        }
    }
}
