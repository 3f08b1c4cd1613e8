use qsqlab::ensembles::*;
use qsqlab::qcore::boolean::agreement;
use qsqlab::qcore::linalg::{c, haar_unitary, hermitian_eigenvalues, kron, CMatrix};
use qsqlab::qcore::*;
use qsqlab::rng::stream_rng;
use rand::Rng;

fn random_table(n: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..1 << n).map(|_| rng.random()).collect()
}

fn hadamard() -> CMatrix {
    let h = 1.0 / 2f64.sqrt();
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

#[test]
fn example_state_overlap_is_agreement() {
    let mut rng = stream_rng(1, 0, 0);
    for n in 1..=4 {
        for _ in 0..20 {
            let f = random_table(n, &mut rng);
            let h = random_table(n, &mut rng);
            let ip = function_state(&f).unwrap().inner(&function_state(&h).unwrap()).unwrap();
            assert!((ip.re - agreement(&f, &h)).abs() < 1e-12 && ip.im.abs() < 1e-12);
        }
    }
}

#[test]
fn small_example_states() {
    let zero = function_state(&[false, false]).unwrap();
    assert!((zero.amplitude(0).re - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((zero.amplitude(2).re - 0.5f64.sqrt()).abs() < 1e-12);
    let id = function_state(&[false, true]).unwrap();
    let bell = PureState::from_real(&[0.5f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()]).unwrap();
    assert!((id.inner(&bell).unwrap().re - 1.0).abs() < 1e-12);
    let p = phase_state(&[false, false, false, true]).unwrap();
    let want = [0.5, 0.5, 0.5, -0.5];
    for (x, w) in want.iter().enumerate() {
        assert!((p.amplitude(x).re - w).abs() < 1e-12);
    }
    assert!(function_state(&[false, true, true]).is_err());
}

#[test]
fn label_hadamard_postselection_gives_phase_state() {
    let mut rng = stream_rng(2, 0, 0);
    for n in 1..=4 {
        let f = random_table(n, &mut rng);
        let op = kron(&CMatrix::identity(1 << n, 1 << n), &hadamard());
        let rotated = &op * function_state(&f).unwrap().amplitudes();
        let branch: Vec<C64> = (0..1 << n).map(|x| rotated[(x << 1) | 1]).collect();
        let post = PureState::from_unnormalized(branch).unwrap();
        let fidelity = post.inner(&phase_state(&f).unwrap()).unwrap().norm();
        assert!((fidelity - 1.0).abs() < 1e-9);
    }
}

#[test]
fn noisy_example_states() {
    let f = [false, true, true, false];
    let clean = noisy_example_state(&f, 0.0).unwrap();
    assert_eq!(clean, function_state(&f).unwrap());
    let half = noisy_example_state(&f, 0.5).unwrap();
    let other = noisy_example_state(&[true, true, false, false], 0.5).unwrap();
    assert!((half.inner(&other).unwrap().re - 1.0).abs() < 1e-12);
    let q = noisy_example_state(&[false, false], 0.25).unwrap();
    assert!((q.amplitude(0).re - 0.61237).abs() < 1e-5);
    assert!(noisy_example_state(&f, 0.6).is_err());
}

#[test]
fn coset_states() {
    let plus = PureState::uniform(1).to_density();
    let rho = coset_state(&"1".parse().unwrap()).unwrap();
    assert!((rho.matrix() - plus.matrix()).norm() < 1e-12);
    for n in 1..=6 {
        for s in 1..1usize << n {
            let rho = coset_state(&BitVector::from_index(s, n).unwrap()).unwrap();
            assert!((rho.purity() - 2f64.powi(-(n as i32 - 1))).abs() < 1e-12);
            let rank = hermitian_eigenvalues(rho.matrix()).iter().filter(|&&v| v > 1e-9).count();
            assert_eq!(rank, 1 << (n - 1));
        }
    }
    assert!(coset_state(&BitVector::zeros(3).unwrap()).is_err());
}

#[test]
fn coupon_and_codeword_examples() {
    let psi = coupon_state(8, &[2, 5]).unwrap();
    let m1 = Observable::diagonal(&[1., 1., 1., 1., 0., 0., 0., 0.]).unwrap();
    assert!((psi.expectation(&m1).unwrap() - 0.5).abs() < 1e-12);
    let single = coupon_state(5, &[3]).unwrap();
    assert_eq!(single, PureState::basis(3, 2).unwrap());
    assert!(coupon_state(4, &[]).is_err());

    let g = BitMatrix::from_u8_rows(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    let x: BitVector = "10".parse().unwrap();
    let cw = codeword_state(&g, &x).unwrap();
    let values: Vec<f64> = (0..3)
        .map(|j| {
            let mut diag = vec![0.0; cw.dim()];
            diag[j << 1] = 1.0;
            cw.expectation(&Observable::diagonal(&diag).unwrap()).unwrap()
        })
        .collect();
    for (v, w) in values.iter().zip([0.0, 1.0 / 3.0, 0.0]) {
        assert!((v - w).abs() < 1e-12);
    }
    let deficient = BitMatrix::from_u8_rows(&[&[1, 1], &[1, 1], &[0, 0]]).unwrap();
    assert!(codeword_state(&deficient, &x).is_err());
}

fn overlap_with_plus(p: &BicliqueParams) -> f64 {
    let psi = biclique_state(p).unwrap();
    psi.inner(&PureState::uniform(p.n())).unwrap().re
}

#[test]
fn biclique_total_variation_matches_closed_form() {
    for n in 1..=8 {
        for k in 1..=n {
            let p = BicliqueParams::leading(n, k).unwrap();
            let d = biclique_distribution(&p);
            let (tv, _) = dist_metrics(&d, &Distribution::uniform(1 << n)).unwrap();
            assert!((tv - biclique_tv_closed_form(n, k)).abs() < 1e-9, "k={k} n={n}");
        }
    }
    assert!((biclique_tv_closed_form(4, 2) - 0.375).abs() < 1e-12);
}

#[test]
fn biclique_subset_position_does_not_matter() {
    let a = BicliqueParams::new(6, vec![2, 5, 6]).unwrap();
    let b = BicliqueParams::leading(6, 3).unwrap();
    let (tv, _) = dist_metrics(&biclique_distribution(&a), &Distribution::uniform(64)).unwrap();
    assert!((tv - biclique_tv_closed_form(6, 3)).abs() < 1e-12);
    assert!((overlap_with_plus(&a) - overlap_with_plus(&b)).abs() < 1e-12);
    // Strings with ones at positions 2, 5, 6 (bit 1 is the most significant).
    let mass = biclique_distribution(&a);
    assert!(mass.prob(0b010011) > mass.prob(0));
}

#[test]
fn biclique_overlap_closed_form_and_lower_bound() {
    for n in 1..=8 {
        for k in 1..=n {
            let ov = overlap_with_plus(&BicliqueParams::leading(n, k).unwrap());
            assert!((ov - biclique_overlap_closed_form(n, k)).abs() < 1e-12);
            assert!(ov >= (1.0 - k as f64 / n as f64).sqrt() - 1e-12);
        }
    }
    let full = BicliqueParams::leading(5, 5).unwrap();
    assert!((biclique_distribution(&full).prob(31) - 1.0).abs() < 1e-12);
}

#[test]
fn biclique_overlap_upper_bound_fails_when_k_is_a_large_fraction_of_n() {
    // (1 + 2^{-(k+1)/2}) √(1 − k/n) vanishes at k = n while the overlap is 2^{-n/2}.
    let upper = |n: usize, k: usize| (1.0 + 2f64.powf(-(k as f64 + 1.0) / 2.0)) * (1.0 - k as f64 / n as f64).sqrt();
    let mut violations = Vec::new();
    for n in 1..=8 {
        for k in 1..=n {
            if overlap_with_plus(&BicliqueParams::leading(n, k).unwrap()) > upper(n, k) + 1e-12 {
                violations.push((k, n));
            }
        }
    }
    assert!(violations.contains(&(4, 4)) && violations.contains(&(4, 8)));
    // Below k/n = 3/8 the bound holds at every tested size.
    assert!(violations.iter().all(|&(k, n)| 8 * k >= 3 * n), "{violations:?}");
    assert!((overlap_with_plus(&BicliqueParams::leading(3, 3).unwrap()) - 2f64.powf(-1.5)).abs() < 1e-12);
}

#[test]
fn shadow_state_spectrum() {
    let eps = 0.1;
    for m in 1..=3 {
        for p in PauliString::all(m).filter(|p| !p.is_identity()) {
            let rho = shadow_state(&p, eps).unwrap();
            let d = (1usize << m) as f64;
            for v in hermitian_eigenvalues(rho.matrix()) {
                let hi = (v - (1.0 + 3.0 * eps) / d).abs() < 1e-12;
                let lo = (v - (1.0 - 3.0 * eps) / d).abs() < 1e-12;
                assert!(hi || lo);
            }
            assert!((rho.expectation(&p.to_observable()).unwrap() - 3.0 * eps).abs() < 1e-12);
        }
    }
    let z: PauliString = "ZI".parse().unwrap();
    assert!(shadow_state(&z, 0.4).is_err());
    assert!(shadow_state(&PauliString::identity(2), 0.1).is_err());
    let tiny = shadow_state(&z, 1e-12).unwrap();
    assert!((tiny.matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() < 1e-11);
}

#[test]
fn padding_reads_the_zero_block() {
    let mut rng = stream_rng(9, 0, 0);
    let (n, k) = (2, 2);
    let psi = haar_state(n, &mut rng);
    assert_eq!(padded_state(&psi, 0), psi);
    for _ in 0..10 {
        let u = haar_unitary(1 << (n + k), &mut rng);
        let diag: Vec<C64> = (0..1 << (n + k)).map(|_| c(rng.random_range(-1.0..1.0), 0.0)).collect();
        let mat = &u * CMatrix::from_diagonal(&CVector::from_vec(diag)) * u.adjoint();
        let m = Observable::bounded(mat.clone()).unwrap();
        let lhs = padded_state(&psi, k).expectation(&m).unwrap();
        let block = CMatrix::from_fn(1 << n, 1 << n, |i, j| mat[(i << k, j << k)]);
        let rhs = psi.expectation(&Observable::new(block).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }
}

#[test]
fn degree2_states_are_distinct() {
    for n in 1..=4 {
        let ens = degree2_example_ensemble(n).unwrap();
        assert_eq!(ens.len(), 1 << (n * (n + 1) / 2));
        let states: Vec<&PureState> = ens.states().map(|s| s.as_pure().unwrap()).collect();
        for i in 0..states.len() {
            assert!((states[i].amplitudes().norm() - 1.0).abs() < 1e-12);
            for j in i + 1..states.len() {
                assert!(states[i].inner(states[j]).unwrap().norm() < 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn stabilizer_ensembles() {
    let one = stabilizer_ensemble(1).unwrap();
    assert_eq!(one.len(), 6);
    let two = stabilizer_ensemble(2).unwrap();
    assert_eq!(two.len(), 60);
    for ens in [&one, &two] {
        let m = ens.num_qubits();
        let mean = ens.mean_density();
        assert!((mean.matrix() - DensityMatrix::maximally_mixed(m).matrix()).norm() < 1e-9);
        let d = ens.dim();
        let mut second = CMatrix::zeros(d * d, d * d);
        for (s, &w) in ens.states().zip(ens.weights()) {
            let rho = s.to_density().into_matrix();
            second += kron(&rho, &rho) * c(w, 0.0);
        }
        // (I + SWAP)/(d² + d), built entry by entry.
        let want = CMatrix::from_fn(d * d, d * d, |r, col| {
            let swap = (r / d, r % d) == (col % d, col / d);
            c(((r == col) as u8 + swap as u8) as f64 / (d * d + d) as f64, 0.0)
        });
        assert!((second - want).norm() < 1e-9);
    }
    assert!(stabilizer_ensemble(3).is_err());
}

#[test]
fn class_eta_examples() {
    let (m, a) = class_eta(&[vec![false, false], vec![false, true]]).unwrap();
    assert_eq!((m, a), (0.5, 0.5));
    let tables: Vec<Vec<bool>> = (0..8).map(|i| degree2_table(2, i).unwrap()).collect();
    assert!(class_eta(&tables).unwrap().0 >= 0.25);
    assert!(class_eta(&[vec![true, false], vec![true, false]]).is_err());
    assert!(class_eta(&[vec![true, false]]).is_err());
}

#[test]
fn manifest_and_amplitude_dump() {
    let ens = degree2_phase_ensemble(2).unwrap();
    let man = ens.manifest();
    assert_eq!(man["dimension"], 4);
    assert_eq!(man["members"].as_array().unwrap().len(), 8);
    let mut buf = Vec::new();
    ens.write_amplitudes_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "member,index,re,im");
    assert_eq!(text.lines().count(), 1 + 8 * 4);
}
