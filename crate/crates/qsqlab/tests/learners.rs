use qsqlab::ensembles::*;
use qsqlab::learners::*;
use qsqlab::oracle::{Policy, QstatOracle};
use qsqlab::qcore::boolean::{fourier_coefficients, majority3_table, parity_table};
use qsqlab::qcore::*;
use qsqlab::rng::stream_rng;
use qsqlab::Error;
use rand::seq::index::sample;
use rand::Rng;

fn random_form(n: usize, rng: &mut impl Rng) -> BitMatrix {
    let idx = rng.random_range(0..BitMatrix::upper_triangular_count(n));
    BitMatrix::upper_triangular_from_index(n, idx).unwrap()
}

fn symmetrized(a: &BitMatrix) -> BitMatrix {
    a.add(&a.transpose()).unwrap()
}

#[test]
fn bell_rounds_reveal_the_symmetrized_form() {
    let mut rng = stream_rng(1, 0, 0);
    let zero = BitMatrix::zeros(3, 3).unwrap();
    let mut copies = StateCopies::unlimited(phase_state(&quadratic_truth_table(&zero).unwrap()).unwrap());
    for _ in 0..20 {
        let (_, z) = bell_round(&mut copies, &mut rng).unwrap();
        assert!(z.is_zero());
    }
    for n in 2..=5 {
        let a = random_form(n, &mut rng);
        let b = symmetrized(&a);
        let mut copies = StateCopies::unlimited(phase_state(&quadratic_truth_table(&a).unwrap()).unwrap());
        for _ in 0..30 {
            let (y, z) = bell_round(&mut copies, &mut rng).unwrap();
            assert_eq!(z, b.mul_vec(&y).unwrap());
        }
        assert_eq!(copies.copies_used(), 60);
    }
    let a = BitMatrix::from_u8_rows(&[&[0, 1], &[0, 0]]).unwrap();
    assert_eq!(symmetrized(&a).mul_vec(&"10".parse().unwrap()).unwrap(), "01".parse().unwrap());
    let mut limited = StateCopies::new(&phase_state(&[false; 4]).unwrap().into(), Some(3));
    bell_round(&mut limited, &mut rng).unwrap();
    assert!(matches!(bell_round(&mut limited, &mut rng), Err(Error::SamplerExhausted { .. })));
}

#[test]
fn bell_round_y_is_uniform() {
    let mut rng = stream_rng(2, 0, 0);
    let n = 3;
    let a = random_form(n, &mut rng);
    let mut copies = StateCopies::unlimited(phase_state(&quadratic_truth_table(&a).unwrap()).unwrap());
    let rounds = 10_000;
    let mut counts = [0usize; 8];
    for _ in 0..rounds {
        counts[bell_round(&mut copies, &mut rng).unwrap().0.index()] += 1;
    }
    let expect = rounds as f64 / 8.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // 99th percentile of χ² with 7 degrees of freedom.
    assert!(chi2 < 18.475, "{chi2}");
}

#[test]
fn quadratic_learner_recovery_rate() {
    for n in 2..=6 {
        let mut ok = 0;
        for t in 0..100 {
            let mut rng = stream_rng(3, t, n as u64);
            let a = random_form(n, &mut rng);
            let table = quadratic_truth_table(&a).unwrap();
            let mut copies = StateCopies::unlimited(phase_state(&table).unwrap());
            let r = learn_quadratic(&mut copies, &mut rng, default_round_budget(n)).unwrap();
            assert_eq!(r.samples_used, copies.copies_used());
            assert!(r.samples_used <= 2 * default_round_budget(n) + 1);
            if let Some(hat) = r.recovered {
                assert!(hat.is_upper_triangular());
                if n <= 4 {
                    assert_eq!(quadratic_truth_table(&hat).unwrap(), table);
                }
                ok += (quadratic_truth_table(&hat).unwrap() == table) as usize;
            }
        }
        assert!(ok >= 90, "n={n}: {ok}/100");
    }
}

#[test]
fn quadratic_learner_on_zero_form() {
    let mut rng = stream_rng(4, 0, 0);
    let mut copies = StateCopies::unlimited(PureState::uniform(4));
    let r = learn_quadratic(&mut copies, &mut rng, 100).unwrap();
    assert_eq!(r.recovered.unwrap(), BitMatrix::zeros(4, 4).unwrap());
    let mut starved = StateCopies::new(&PureState::uniform(4).into(), Some(3));
    assert!(!learn_quadratic(&mut starved, &mut rng, 100).unwrap().success);
}

#[test]
fn denoising_success_frequency() {
    let f = degree2_table(3, 21).unwrap();
    let phi = phase_state(&f).unwrap();
    assert_eq!(denoise_success_probability(0.0), 0.5);
    assert!((denoise_success_probability(0.25) - 0.066987).abs() < 1e-6);
    assert_eq!(denoise_success_probability(0.5), 0.0);
    for (i, eta) in [0.0, 0.1, 0.25, 0.4].into_iter().enumerate() {
        let noisy = noisy_example_state(&f, eta).unwrap();
        let mut rng = stream_rng(5, i as u64, 0);
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            if let Some(out) = denoise_copy(&noisy, &mut rng).unwrap() {
                assert!((out.inner(&phi).unwrap().norm() - 1.0).abs() < 1e-9);
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - denoise_success_probability(eta)).abs() <= 0.01, "eta={eta}: {freq}");
    }
    let flat = noisy_example_state(&f, 0.5).unwrap();
    let mut rng = stream_rng(5, 9, 0);
    assert!((0..100).all(|_| denoise_copy(&flat, &mut rng).unwrap().is_none()));
}

#[test]
fn noisy_learner_recovery_rate() {
    let (n, eta) = (4, 0.25);
    let budget = noisy_copy_budget(n, eta);
    assert_eq!(budget, 640);
    let mut ok = 0;
    for t in 0..100 {
        let mut rng = stream_rng(6, t, 0);
        let a = random_form(n, &mut rng);
        let table = quadratic_truth_table(&a).unwrap();
        let mut noisy = StateCopies::unlimited(noisy_example_state(&table, eta).unwrap());
        let r = learn_quadratic_noisy(&mut noisy, n, eta, &mut rng, budget).unwrap();
        assert!(r.samples_used <= budget && r.samples_used == noisy.copies_used());
        ok += r.recovered.is_some_and(|hat| quadratic_truth_table(&hat).unwrap() == table) as usize;
    }
    assert!(ok >= 90, "{ok}/100");
    let mut any = StateCopies::unlimited(noisy_example_state(&[false; 16], 0.5).unwrap());
    assert!(matches!(
        learn_quadratic_noisy(&mut any, n, 0.5, &mut stream_rng(0, 0, 0), 10),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn noiseless_denoising_costs_two_copies_each() {
    let n = 4;
    let table = degree2_table(n, 300).unwrap();
    let mut total_noisy = 0;
    let mut total_clean = 0;
    for t in 0..200 {
        let mut rng = stream_rng(7, t, 0);
        let mut noisy = StateCopies::unlimited(noisy_example_state(&table, 0.0).unwrap());
        let mut clean = DenoisedCopies::new(&mut noisy, usize::MAX);
        let r = learn_quadratic(&mut clean, &mut rng, default_round_budget(n)).unwrap();
        assert!(r.success);
        total_clean += clean.delivered();
        total_noisy += clean.copies_used();
    }
    let ratio = total_noisy as f64 / total_clean as f64;
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}

#[test]
fn noisy_copies_scale_inversely_with_success_probability() {
    let n = 3;
    let table = degree2_table(n, 45).unwrap();
    let mut points = Vec::new();
    for (i, eta) in [0.1, 0.2, 0.3, 0.4].into_iter().enumerate() {
        let mut used = 0usize;
        let trials = 200;
        for t in 0..trials {
            let mut rng = stream_rng(8, t, i as u64);
            let mut noisy = StateCopies::unlimited(noisy_example_state(&table, eta).unwrap());
            let r = learn_quadratic_noisy(&mut noisy, n, eta, &mut rng, usize::MAX).unwrap();
            used += r.samples_used;
        }
        let mean = used as f64 / trials as f64;
        points.push(((1.0 / denoise_success_probability(eta)).ln(), mean.ln()));
    }
    // Least-squares slope of log(copies) against log(1/p).
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = points.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|&(x, _)| (x - mx).powi(2)).sum();
    let slope = num / den;
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
}

fn coupon_bound(n: usize, k: usize) -> usize {
    k * (n as f64).log2().ceil() as usize + k
}

#[test]
fn coupon_first_query_and_single_element() {
    let psi = coupon_state(8, &[2, 5]).unwrap();
    let mut oracle = QstatOracle::new(psi, 0.25, Policy::Exact).unwrap();
    let r = learn_coupon(&mut oracle, 8, 2).unwrap();
    assert_eq!(r.recovered.unwrap(), vec![2, 5]);
    assert!((oracle.ledger().entries()[0].response - 0.5).abs() < 1e-12);

    for n in [2, 5, 8, 13, 32, 64] {
        for i in 1..=n {
            let mut oracle = QstatOracle::new(coupon_state(n, &[i]).unwrap(), 0.5, Policy::Exact).unwrap();
            let r = learn_coupon(&mut oracle, n, 1).unwrap();
            assert_eq!(r.recovered.unwrap(), vec![i]);
            assert!(r.qstat_queries <= (n as f64).log2().ceil() as usize);
        }
    }
    let mut loose = QstatOracle::new(coupon_state(8, &[1, 2]).unwrap(), 0.3, Policy::Exact).unwrap();
    assert!(matches!(learn_coupon(&mut loose, 8, 2), Err(Error::Precondition(_))));
}

#[test]
fn coupon_recovery_under_every_policy() {
    for n in 1..=64usize {
        for t in 0..3u64 {
            let mut rng = stream_rng(9, t, n as u64);
            let k = rng.random_range(1..=n.min(8));
            let mut subset: Vec<usize> = sample(&mut rng, n, k).into_iter().map(|i| i + 1).collect();
            subset.sort_unstable();
            let psi = coupon_state(n, &subset).unwrap();
            let q = register_qubits(n);
            let tau = 1.0 / (2.0 * k as f64);
            let policies = [
                Policy::Exact,
                Policy::IntervalNoise(stream_rng(9, t, 1000 + n as u64)),
                Policy::AdversarialReference(DensityMatrix::maximally_mixed(q)),
            ];
            for policy in policies {
                let name = policy.name();
                let mut oracle = QstatOracle::new(psi.clone(), tau, policy).unwrap();
                let r = learn_coupon(&mut oracle, n, k).unwrap();
                assert_eq!(r.recovered.as_ref(), Some(&subset), "n={n} k={k} {name}");
                assert_eq!(r.qstat_queries, oracle.queries());
                assert!(r.qstat_queries <= coupon_bound(n, k), "n={n} k={k} {name}: {}", r.qstat_queries);
            }
        }
    }
}

fn random_generator(n: usize, k: usize, rng: &mut impl Rng) -> BitMatrix {
    loop {
        let rows = (0..n).map(|_| BitVector::from_index(rng.random_range(0..1 << k), k).unwrap()).collect();
        let g = BitMatrix::from_rows(rows).unwrap();
        if g.rank() == k {
            return g;
        }
    }
}

#[test]
fn codeword_example() {
    let g = BitMatrix::from_u8_rows(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    let x: BitVector = "10".parse().unwrap();
    let mut oracle = QstatOracle::new(codeword_state(&g, &x).unwrap(), 1.0 / 6.0, Policy::Exact).unwrap();
    let r = learn_codeword(&mut oracle, &g).unwrap();
    assert_eq!(r.recovered.unwrap(), x);
    let responses: Vec<f64> = oracle.ledger().entries().iter().map(|e| e.response).collect();
    assert_eq!(responses.len(), 2);
    assert!(responses[0].abs() < 1e-12 && (responses[1] - 1.0 / 3.0).abs() < 1e-12);

    let zero = BitVector::zeros(2).unwrap();
    let mut oracle = QstatOracle::new(codeword_state(&g, &zero).unwrap(), 1.0 / 6.0, Policy::Exact).unwrap();
    learn_codeword(&mut oracle, &g).unwrap();
    assert!(oracle.ledger().entries().iter().all(|e| (e.response - 1.0 / 3.0).abs() < 1e-12));

    let mut loose = QstatOracle::new(codeword_state(&g, &x).unwrap(), 0.2, Policy::Exact).unwrap();
    assert!(matches!(learn_codeword(&mut loose, &g), Err(Error::Precondition(_))));
}

#[test]
fn codeword_recovery_under_interval_noise() {
    for n in 1..=10usize {
        for t in 0..10u64 {
            let mut rng = stream_rng(10, t, n as u64);
            let k = rng.random_range(1..=n);
            let g = random_generator(n, k, &mut rng);
            let x = BitVector::from_index(rng.random_range(0..1 << k), k).unwrap();
            let tau = 1.0 / (2.0 * n as f64);
            let policy = Policy::IntervalNoise(stream_rng(10, t, 100 + n as u64));
            let mut oracle = QstatOracle::new(codeword_state(&g, &x).unwrap(), tau, policy).unwrap();
            let r = learn_codeword(&mut oracle, &g).unwrap();
            assert_eq!(r.recovered, Some(x));
            assert_eq!(r.qstat_queries, k);
        }
    }
}

fn example_oracle(table: &[bool], tau: f64, seed: u64) -> QstatOracle {
    QstatOracle::new(function_state(table).unwrap(), tau, Policy::IntervalNoise(stream_rng(seed, 0, 0))).unwrap()
}

#[test]
fn fourier_sparse_on_parities() {
    let n = 4;
    for s in 0..1 << n {
        let f = parity_table(n, s);
        let mut oracle = example_oracle(&f, 0.5, s as u64);
        let r = learn_fourier_sparse(&mut oracle, 1, 0.1).unwrap();
        let h = r.recovered.unwrap();
        assert_eq!(h.table, f);
        assert_eq!(h.support.iter().map(|p| p.0).collect::<Vec<_>>(), vec![s]);
        assert_eq!(r.qstat_queries, (1 << n) + 1);
    }
}

#[test]
fn fourier_sparse_on_majority() {
    let f = majority3_table();
    let coeffs = fourier_coefficients(&f).unwrap();
    assert_eq!(coeffs.iter().filter(|c| c.abs() > 1e-12).count(), 4);
    for seed in 0..20 {
        let mut oracle = example_oracle(&f, FourierSchedule::new(4, 0.1).support_tau, seed);
        let h = learn_fourier_sparse(&mut oracle, 4, 0.1).unwrap().recovered.unwrap();
        assert_eq!(h.table, f);
        for (s, est) in h.support {
            assert!((est - coeffs[s]).abs() <= 0.1 / 8.0 + 1e-12);
        }
    }
    assert_eq!(sparse_granularity(1), 1.0);
    assert_eq!(sparse_granularity(4), 0.5);
    assert_eq!(sparse_granularity(5), 0.5);
    assert_eq!(sparse_granularity(8), 0.25);
}

#[test]
fn fourier_sparse_on_random_sparse_functions() {
    // Boolean functions with at most two nonzero coefficients are signed parities.
    let n = 5;
    let mut rng = stream_rng(11, 0, 0);
    for t in 0..20 {
        let s = rng.random_range(0..1usize << n);
        let flip: bool = rng.random();
        let f: Vec<bool> = parity_table(n, s).into_iter().map(|b| b ^ flip).collect();
        let mut oracle = example_oracle(&f, 0.25, t);
        let h = learn_fourier_sparse(&mut oracle, 2, 0.1).unwrap().recovered.unwrap();
        assert_eq!(h.table, f);
    }
    // Majority of three random parities has four coefficients of size 1/2.
    for t in 0..20 {
        let (a, b, c) = (rng.random_range(0..32usize), rng.random_range(0..32usize), rng.random_range(0..32usize));
        let f: Vec<bool> = (0..32usize)
            .map(|x| {
                let bits = [a, b, c].map(|s| (x & s).count_ones() % 2 == 1);
                bits.iter().filter(|&&v| v).count() >= 2
            })
            .collect();
        let support = fourier_coefficients(&f).unwrap().iter().filter(|v| v.abs() > 1e-12).count();
        let mut oracle = example_oracle(&f, 0.125, 100 + t);
        let r = learn_fourier_sparse(&mut oracle, 4, 0.1).unwrap();
        assert!(support <= 4);
        assert_eq!(r.recovered.unwrap().table, f);
    }
}

#[test]
fn fourier_sparse_rejects_dense_functions() {
    let mut rng = stream_rng(12, 0, 0);
    let f: Vec<bool> = (0..64).map(|_| rng.random()).collect();
    let mut oracle = QstatOracle::new(function_state(&f).unwrap(), 0.01, Policy::Exact).unwrap();
    let r = learn_fourier_sparse(&mut oracle, 1, 0.1).unwrap();
    assert!(!r.success);
}

fn ghz(m: usize) -> PureState {
    let mut amps = vec![0.0; 1 << m];
    amps[0] = 0.5f64.sqrt();
    amps[(1 << m) - 1] = 0.5f64.sqrt();
    PureState::from_real(&amps).unwrap()
}

#[test]
fn tomography_of_patches() {
    let mut oracle = QstatOracle::new(PureState::basis(3, 0).unwrap(), 0.1, Policy::Exact).unwrap();
    for p in local_tomography(&mut oracle, 2).unwrap() {
        let want = PureState::basis(2, 0).unwrap().to_density();
        assert!(p.trace_distance_to(&want).unwrap() < 1e-12);
        assert_eq!(p.queries, 15);
    }

    let (m, d, tau) = (4, 2, 0.05);
    let psi = ghz(m);
    let rho = psi.to_density();
    let mut oracle = QstatOracle::new(psi, tau, Policy::IntervalNoise(stream_rng(13, 0, 0))).unwrap();
    let patches = local_tomography(&mut oracle, d).unwrap();
    assert_eq!(patches.len(), 6);
    assert_eq!(oracle.queries(), 6 * 15);
    for p in &patches {
        let marginal = rho.partial_trace(&p.qubits).unwrap();
        assert!(p.trace_distance_to(&marginal).unwrap() < tau * 2f64.powi(d as i32 - 1));
    }
    assert!(local_tomography(&mut oracle, 5).is_err());
}

fn random_distribution(len: usize, rng: &mut impl Rng) -> Distribution {
    let w: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    Distribution::new(w.into_iter().map(|v| v / s).collect()).unwrap()
}

fn tv(p: &Distribution, q: &Distribution) -> f64 {
    0.5 * p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[test]
fn scheffe_selection_accuracy() {
    let eps = 0.05;
    let mut good = 0;
    let trials = 200;
    for t in 0..trials {
        let mut rng = stream_rng(14, t, 0);
        let cands: Vec<Distribution> = (0..6).map(|_| random_distribution(16, &mut rng)).collect();
        let target = rng.random_range(0..cands.len());
        let samples: Vec<usize> =
            (0..scheffe_sample_count(cands.len(), eps)).map(|_| cands[target].sample(&mut rng)).collect();
        let pick = scheffe_select(&samples, &cands, eps).unwrap();
        good += (tv(&cands[target], &cands[pick]) <= eps) as usize;
    }
    assert!(good as f64 / trials as f64 >= 0.95, "{good}/{trials}");
}

#[test]
fn scheffe_selection_outside_the_candidates() {
    let eps = 0.05;
    let mut good = 0;
    let trials = 200;
    for t in 0..trials {
        let mut rng = stream_rng(19, t, 0);
        let cands: Vec<Distribution> = (0..6).map(|_| random_distribution(16, &mut rng)).collect();
        let noise = random_distribution(16, &mut rng);
        let base = rng.random_range(0..cands.len());
        let mix = rng.random_range(0.0..0.3);
        let p = Distribution::new(
            cands[base].probs().iter().zip(noise.probs()).map(|(a, b)| (1.0 - mix) * a + mix * b).collect(),
        )
        .unwrap();
        let opt = cands.iter().map(|q| tv(&p, q)).fold(f64::INFINITY, f64::min);
        let samples: Vec<usize> = (0..scheffe_sample_count(cands.len(), eps)).map(|_| p.sample(&mut rng)).collect();
        let pick = scheffe_select(&samples, &cands, eps).unwrap();
        good += (tv(&p, &cands[pick]) <= 3.0 * opt + eps) as usize;
    }
    assert!(good as f64 / trials as f64 >= 0.95, "{good}/{trials}");
}

#[test]
fn scheffe_edge_cases() {
    let one = vec![Distribution::uniform(4)];
    assert_eq!(scheffe_select(&[], &one, 0.1).unwrap(), 0);
    assert!(scheffe_select(&[0], &[], 0.1).is_err());
    let two = vec![Distribution::uniform(4), Distribution::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap()];
    assert!(matches!(scheffe_select(&[0; 10], &two, 0.1), Err(Error::NeedMoreSamples(_))));

    // Two candidates at distance 1/2 with 500 samples from the first.
    assert!((tv(&two[0], &two[1]) - 0.5).abs() < 1e-12);
    let mut correct = 0;
    for t in 0..200 {
        let mut rng = stream_rng(15, t, 0);
        let samples: Vec<usize> = (0..500).map(|_| two[0].sample(&mut rng)).collect();
        correct += (scheffe_select(&samples, &two, 0.2).unwrap() == 0) as usize;
    }
    assert!(correct >= 198);
}

#[test]
fn coset_fourier_samples() {
    let mut rng = stream_rng(16, 0, 0);
    let s: BitVector = "11".parse().unwrap();
    let mut counts = [0usize; 4];
    for _ in 0..10_000 {
        let y = fourier_sample_coset(&s, &mut rng).unwrap();
        assert!(!y.dot(&s));
        counts[y.index()] += 1;
    }
    assert_eq!(counts[1] + counts[2], 0);
    assert!((counts[0] as f64 / 1e4 - 0.5).abs() <= 0.02);

    let e1 = BitVector::unit(0, 4).unwrap();
    let mut seen = [0usize; 16];
    for _ in 0..8000 {
        seen[fourier_sample_coset(&e1, &mut rng).unwrap().index()] += 1;
    }
    for (y, &c) in seen.iter().enumerate() {
        if y >= 8 {
            assert_eq!(c, 0);
        } else {
            assert!((c as f64 / 8000.0 - 0.125).abs() < 0.02);
        }
    }
    assert!(fourier_sample_coset(&BitVector::zeros(2).unwrap(), &mut rng).is_err());
}

#[test]
fn simon_solver() {
    assert_eq!(solve_simon(2, &["11".parse().unwrap()]).unwrap(), "11".parse().unwrap());
    assert_eq!(solve_simon(1, &[]).unwrap(), "1".parse().unwrap());
    assert!(matches!(solve_simon(3, &["100".parse().unwrap()]), Err(Error::NeedMoreSamples(_))));
    for n in 2..=8 {
        let mut ok = 0;
        for t in 0..100 {
            let mut rng = stream_rng(17, t, n as u64);
            let s = BitVector::from_index(rng.random_range(1..1usize << n), n).unwrap();
            let r = recover_hidden_shift(&s, 3 * n, &mut rng).unwrap();
            assert!(r.samples_used <= 3 * n);
            if let Some(found) = r.recovered {
                assert_eq!(found, s);
                ok += 1;
            }
        }
        assert!(ok >= 90, "n={n}: {ok}");
    }
}

/// Learner for example states `ψ_A` that measures copies, distils phase
/// states and runs the Bell learner.
fn sampling_learner(hidden: QuantumState, seed: u64) -> impl FnOnce(&mut QstatOracle) -> qsqlab::Result<LearnerOutput> {
    move |_oracle| {
        let n = hidden.num_qubits() - 1;
        let mut rng = stream_rng(seed, 0, 1);
        let mut copies = StateCopies::new(&hidden, None);
        let mut clean = DenoisedCopies::new(&mut copies, 40 * n);
        let r = learn_quadratic(&mut clean, &mut rng, default_round_budget(n))?;
        let used = clean.copies_used();
        let hypothesis = match r.recovered {
            Some(a) => Some(function_state(&quadratic_truth_table(&a)?)?.into()),
            None => None,
        };
        Ok(LearnerOutput { hypothesis, samples_used: used })
    }
}

#[test]
fn decider_from_a_sampling_learner() {
    let n = 3;
    let ens = degree2_example_ensemble(n).unwrap();
    let class: Vec<QuantumState> = ens.states().cloned().collect();
    let sigma = DensityMatrix::maximally_mixed(n + 1);
    let (tau, eps) = (0.1, 0.1);
    let setup = DeciderSetup::new(class.clone(), sigma.clone(), tau, eps).unwrap();
    assert!((setup.gap() - (1.0 - 1.0 / 16.0)).abs() < 1e-9);

    let mut correct = 0;
    for t in 0..100u64 {
        let mut rng = stream_rng(18, t, 0);
        let idx = rng.random_range(0..class.len());
        let hidden = class[idx].clone();
        let mut oracle = QstatOracle::new(hidden.clone(), tau, Policy::IntervalNoise(stream_rng(18, t, 1))).unwrap();
        let r = setup.decide(&mut oracle, sampling_learner(hidden, t)).unwrap();
        assert!(r.total_queries <= 1);
        correct += (r.decision == Decision::InClass && r.nearest == Some(idx)) as usize;

        let mixed: QuantumState = sigma.clone().into();
        let mut oracle = QstatOracle::new(mixed.clone(), tau, Policy::IntervalNoise(stream_rng(18, t, 2))).unwrap();
        let r = setup.decide(&mut oracle, sampling_learner(mixed, 1000 + t)).unwrap();
        assert_eq!(r.decision, Decision::IsSigma);
    }
    assert!(correct >= 90, "{correct}/100");
}

#[test]
fn decider_with_an_exact_learner() {
    let n = 2;
    let class: Vec<QuantumState> = degree2_example_ensemble(n).unwrap().states().cloned().collect();
    let sigma = DensityMatrix::maximally_mixed(n + 1);
    let setup = DeciderSetup::new(class.clone(), sigma.clone(), 0.1, 0.05).unwrap();
    for (i, rho) in class.iter().enumerate() {
        let mut oracle = QstatOracle::new(rho.clone(), 0.1, Policy::AdversarialReference(sigma.clone())).unwrap();
        let truth = rho.clone();
        let r = setup
            .decide(&mut oracle, |_| Ok(LearnerOutput { hypothesis: Some(truth), samples_used: 0 }))
            .unwrap();
        assert_eq!(r.decision, Decision::InClass);
        assert_eq!((r.nearest, r.learner_queries, r.total_queries), (Some(i), 0, 1));
    }
    let close = DensityMatrix::maximally_mixed(n + 1);
    let tight = DeciderSetup::new(class, close, 0.3, 0.2);
    assert!(matches!(tight, Err(Error::Precondition(_))));
}
