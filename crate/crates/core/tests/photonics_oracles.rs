//! Multi-photon amplitudes and dependency sets against brute-force oracles.

use itertools::Itertools;
use meshbias::bias::{zeta_map, Ensemble, ZetaConfig};
use meshbias::photonics::{dependency_sets, enumerate_states, permanent, transition_probability, FockState};
use meshbias::unitary::{haar_random, reconstruct, uniform_phase_random};
use meshbias::{Architecture, CMatrix};
use num_complex::Complex64;

fn naive_permanent(a: &CMatrix) -> Complex64 {
    let n = a.nrows();
    (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(r, &c)| a[(r, c)]).product::<Complex64>())
        .sum()
}

#[test]
fn ryser_matches_permutation_sum() {
    for n in 1..=6 {
        let a = haar_random(n, 40 + n as u64) * Complex64::new(1.3, -0.2);
        assert!((permanent(&a).unwrap() - naive_permanent(&a)).norm() < 1e-12, "n={n}");
    }
}

// Probability from the definition: sum over assignments of the photons.
fn naive_probability(u: &CMatrix, v: &FockState, w: &FockState) -> f64 {
    let ins = v.modes_with_repetition();
    let outs = w.modes_with_repetition();
    let sub = CMatrix::from_fn(ins.len(), ins.len(), |r, c| u[(outs[r], ins[c])]);
    let norm: f64 = v
        .occupations
        .iter()
        .chain(&w.occupations)
        .map(|&k| (1..=k).product::<usize>() as f64)
        .product();
    naive_permanent(&sub).norm_sqr() / norm
}

trait Repeated {
    fn modes_with_repetition(&self) -> Vec<usize>;
}

impl Repeated for FockState {
    fn modes_with_repetition(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| std::iter::repeat_n(k, n))
            .collect()
    }
}

#[test]
fn transition_probabilities_match_definition() {
    let u = haar_random(4, 3);
    let states = enumerate_states(4, 3, false).unwrap();
    for v in &states {
        let mut total = 0.0;
        for w in &states {
            let p = transition_probability(&u, v, w).unwrap();
            assert!((p - naive_probability(&u, v, w)).abs() < 1e-12);
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }
}

// A phase that u_ij responds to must be in the dependency set of (i, j).
#[test]
fn finite_differences_stay_inside_dependency_sets() {
    for arch in Architecture::ALL {
        let m = 6;
        let p = uniform_phase_random(m, arch, 17);
        let base = reconstruct(&p);
        let sets = dependency_sets(m, arch).unwrap();
        let mut touched = vec![vec![Vec::new(); m]; m];
        for (k, _) in p.cells.iter().enumerate() {
            for kind in 0..2 {
                let mut q = p.clone();
                if kind == 0 {
                    q.cells[k].params.psi += 1e-3;
                } else {
                    q.cells[k].params.theta += 1e-3;
                }
                let u = reconstruct(&q);
                for i in 0..m {
                    for j in 0..m {
                        if (u[(i, j)] - base[(i, j)]).norm() > 1e-9 {
                            touched[i][j].push(2 * k + kind);
                        }
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                let set: Vec<usize> = sets.internal(i, j).collect();
                for id in &touched[i][j] {
                    assert!(set.contains(id), "{arch} u[{i}][{j}] moves with {id} outside {set:?}");
                }
                // every cell on a path modulates the element through its internal phase
                for id in set.iter().filter(|&&id| id % 2 == 0) {
                    assert!(touched[i][j].contains(id), "{arch} u[{i}][{j}] ignores {id}");
                }
            }
        }
    }
}

#[test]
fn zeta_is_reproducible_across_worker_counts() {
    let mut cfg = ZetaConfig::new(5, Architecture::Rectangular, Ensemble::Uniform);
    cfg.n_unitaries = 6;
    cfg.n_trials = 5;
    cfg.seed = 21;
    cfg.workers = 1;
    let a = zeta_map(&cfg).unwrap();
    cfg.workers = 4;
    let b = zeta_map(&cfg).unwrap();
    assert_eq!(a.zeta, b.zeta);
    assert!(a.zeta.iter().flatten().all(|&z| (0.0..=1.0).contains(&z)));
}
