//! Monte Carlo estimators of noise-induced bias.
//!
//! `zeta` measures how much each matrix element moves under component
//! noise; `Delta` attributes the systematic drift of multi-photon
//! transition probabilities to individual phase parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Architecture;
use crate::par;
use crate::photonics::{dependency_sets, enumerate_states, transition_matrix, DependencySets, FockState};
use crate::rng::{self, derive_seed};
use crate::stats::Running;
use crate::unitary::{
    decompose, fourier, haar_random_with, perturb, reconstruct, uniform_phase_random_with, CMatrix,
    MeshParameters, NoiseModel,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Re,
    Im,
}

impl Part {
    fn of(self, z: num_complex::Complex64) -> f64 {
        match self {
            Part::Re => z.re,
            Part::Im => z.im,
        }
    }
}

/// `|1 - 2 / (1 + |f(u) / f(u_noisy)|)|`.
///
/// A vanishing noisy part gives the limit value 1, or 0 when the ideal part
/// vanishes as well.
pub fn zeta_single(u: num_complex::Complex64, u_noisy: num_complex::Complex64, f: Part) -> f64 {
    let a = f.of(u);
    let b = f.of(u_noisy);
    if b == 0.0 {
        return if a == 0.0 { 0.0 } else { 1.0 };
    }
    let r = (a / b).abs();
    if r.is_infinite() {
        return 1.0;
    }
    (1.0 - 2.0 / (1.0 + r)).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Haar,
    #[serde(alias = "uniformphases")]
    Uniform,
    Fourier,
    /// A fixed user-supplied unitary.
    File,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Ensemble::Haar),
            "uniform" | "uniformphases" => Ok(Ensemble::Uniform),
            "fourier" => Ok(Ensemble::Fourier),
            "file" | "fixed" => Ok(Ensemble::File),
            other => Err(Error::InvalidArgument(format!("unknown ensemble '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZetaConfig {
    pub m: usize,
    pub architecture: Architecture,
    pub ensemble: Ensemble,
    pub n_unitaries: usize,
    pub n_trials: usize,
    pub noise: NoiseModel,
    /// Master seed for unitaries and noise streams.
    pub seed: u64,
    #[serde(skip)]
    pub unitary: Option<CMatrix>,
    #[serde(skip)]
    pub workers: usize,
}

impl ZetaConfig {
    pub fn new(m: usize, architecture: Architecture, ensemble: Ensemble) -> Self {
        ZetaConfig {
            m,
            architecture,
            ensemble,
            n_unitaries: 200,
            n_trials: 100,
            noise: NoiseModel::default(),
            seed: 0,
            unitary: None,
            workers: 1,
        }
    }

    fn validate(&self) -> Result<usize> {
        self.noise.validate()?;
        if self.m < 2 {
            return Err(Error::InvalidArgument(format!("m must be >= 2, got {}", self.m)));
        }
        if self.n_unitaries == 0 || self.n_trials == 0 {
            return Err(Error::InvalidArgument("unitary and trial counts must be >= 1".into()));
        }
        match self.ensemble {
            Ensemble::File => {
                let u = self.unitary.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("the file ensemble needs a unitary".into())
                })?;
                if u.nrows() != self.m {
                    return Err(Error::InvalidArgument(format!(
                        "unitary is {}x{}, expected m = {}",
                        u.nrows(),
                        u.ncols(),
                        self.m
                    )));
                }
                Ok(1)
            }
            Ensemble::Fourier => Ok(1),
            _ => Ok(self.n_unitaries),
        }
    }

    /// Mesh parameters of the `index`-th ensemble member.
    pub fn member(&self, index: usize) -> Result<MeshParameters> {
        match self.ensemble {
            Ensemble::Haar => {
                let mut r = rng::stream(self.seed, &[rng::TAG_HAAR, index as u64]);
                decompose(&haar_random_with(self.m, &mut r), self.architecture)
            }
            Ensemble::Uniform => {
                let mut r = rng::stream(self.seed, &[rng::TAG_UNIFORM, index as u64]);
                Ok(uniform_phase_random_with(self.m, self.architecture, &mut r))
            }
            Ensemble::Fourier => decompose(&fourier(self.m), self.architecture),
            Ensemble::File => decompose(self.unitary.as_ref().expect("validated"), self.architecture),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZetaMap {
    /// `zeta[i][j]` for output `i`, input `j`; entries in `[0, 1]`.
    pub zeta: Vec<Vec<f64>>,
    /// Pooled averages of the real and imaginary terms before scaling.
    pub mean_re: Vec<Vec<f64>>,
    pub mean_im: Vec<Vec<f64>>,
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub samples: usize,
}

fn noise_for(cfg_seed: u64, noise: &NoiseModel, unitary: usize) -> NoiseModel {
    noise.with_seed(derive_seed(cfg_seed, &[rng::TAG_NOISE, unitary as u64]))
}

/// Ensemble- and trial-averaged zeta map.
///
/// Each unitary is compared with its own noiseless reconstruction, so a
/// zero-noise model gives an all-zero map. The two averaged terms are each
/// scaled by `1 / (2 max)`, which keeps their sum in `[0, 1]`.
pub fn zeta_map(cfg: &ZetaConfig) -> Result<ZetaMap> {
    let n_unitaries = cfg.validate()?;
    let m = cfg.m;
    let per_unitary = par::map_indexed(cfg.workers, n_unitaries, |a| -> Result<(Vec<f64>, Vec<f64>)> {
        let params = cfg.member(a)?;
        let ideal = reconstruct(&params);
        let noise = noise_for(cfg.seed, &cfg.noise, a);
        let mut re = vec![0.0; m * m];
        let mut im = vec![0.0; m * m];
        for t in 0..cfg.n_trials {
            let noisy = reconstruct(&perturb(&params, &noise, t as u64));
            for i in 0..m {
                for j in 0..m {
                    re[i * m + j] += zeta_single(ideal[(i, j)], noisy[(i, j)], Part::Re);
                    im[i * m + j] += zeta_single(ideal[(i, j)], noisy[(i, j)], Part::Im);
                }
            }
        }
        Ok((re, im))
    });
    let mut re = vec![0.0; m * m];
    let mut im = vec![0.0; m * m];
    for r in per_unitary {
        let (a, b) = r?;
        re.iter_mut().zip(&a).for_each(|(x, y)| *x += y);
        im.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
    }
    let samples = n_unitaries * cfg.n_trials;
    re.iter_mut().for_each(|x| *x /= samples as f64);
    im.iter_mut().for_each(|x| *x /= samples as f64);
    let gamma = |v: &[f64]| {
        let mx = v.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            0.5 / mx
        } else {
            0.0
        }
    };
    let (g_re, g_im) = (gamma(&re), gamma(&im));
    let grid = |v: &[f64]| -> Vec<Vec<f64>> { v.chunks(m).map(|c| c.to_vec()).collect() };
    let zeta: Vec<f64> = re.iter().zip(&im).map(|(a, b)| g_re * a + g_im * b).collect();
    Ok(ZetaMap {
        zeta: grid(&zeta),
        mean_re: grid(&re),
        mean_im: grid(&im),
        gamma_re: g_re,
        gamma_im: g_im,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub input: FockState,
    pub output: FockState,
    pub p: f64,
    /// Mean signed deviation over the trials.
    pub delta: f64,
    /// The scale `|delta|` is compared with (see [`SigmaScale`]).
    pub sigma: f64,
    /// Sample standard deviation of the single-trial deviations.
    pub spread: f64,
}

/// What `sigma_vw` measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaScale {
    /// Standard error of the mean deviation, so `|delta| / sigma` is a
    /// t statistic for "no bias".
    #[default]
    StandardError,
    /// Sample standard deviation of the single-trial deviations.
    SampleStd,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasMaps {
    pub m: usize,
    pub architecture: Architecture,
    pub photons: usize,
    pub trials: usize,
    pub sigma_scale: SigmaScale,
    /// Significance weight per internal phase id.
    pub delta_xi: Vec<f64>,
    /// `delta_ij[i][j]` for output `i`, input `j`.
    pub delta_ij: Vec<Vec<f64>>,
    pub records: Vec<PairRecord>,
    /// Mean of `|delta| / sigma` over the non-degenerate pairs.
    pub mean_significance: f64,
    /// Spread of `|delta| / sigma` across pairs (sample std).
    pub significance_std: f64,
    /// Pairs skipped because `sigma = 0`.
    pub skipped_pairs: usize,
}

#[derive(Clone, Debug)]
pub struct BiasConfig {
    pub photons: usize,
    pub trials: usize,
    pub noise: NoiseModel,
    pub seed: u64,
    pub workers: usize,
    pub sigma_scale: SigmaScale,
}

impl BiasConfig {
    pub fn new(photons: usize, trials: usize) -> Self {
        BiasConfig {
            photons,
            trials,
            noise: NoiseModel::default(),
            seed: 0,
            workers: 1,
            sigma_scale: SigmaScale::default(),
        }
    }
}

// Trials are evaluated in parallel batches and folded in trial order.
const BATCH: usize = 64;

/// Multi-photon bias maps of a fixed unitary.
pub fn multi_photon_bias(u: &CMatrix, architecture: Architecture, cfg: &BiasConfig) -> Result<BiasMaps> {
    cfg.noise.validate()?;
    if !(2..=4).contains(&cfg.photons) {
        return Err(Error::InvalidArgument(format!(
            "photon number must be 2, 3 or 4, got {}",
            cfg.photons
        )));
    }
    if cfg.trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are needed".into()));
    }
    let params = decompose(u, architecture)?;
    let m = params.m;
    let states = enumerate_states(m, cfg.photons, true)?;
    let ideal = transition_matrix(&reconstruct(&params), &states, &states)?;
    let ns = states.len();
    let noise = cfg.noise.with_seed(derive_seed(cfg.seed, &[rng::TAG_NOISE]));

    let mut acc = vec![Running::default(); ns * ns];
    let mut start = 0;
    while start < cfg.trials {
        let len = BATCH.min(cfg.trials - start);
        let batch = par::map_indexed(cfg.workers, len, |k| -> Result<Vec<Vec<f64>>> {
            let noisy = reconstruct(&perturb(&params, &noise, (start + k) as u64));
            transition_matrix(&noisy, &states, &states)
        });
        for p in batch {
            let p = p?;
            for v in 0..ns {
                for w in 0..ns {
                    acc[v * ns + w].push(p[v][w] - ideal[v][w]);
                }
            }
        }
        start += len;
    }

    let deps = dependency_sets(m, architecture)?;
    Ok(aggregate(&params, &deps, &states, &ideal, &acc, cfg))
}

fn aggregate(
    params: &MeshParameters,
    deps: &DependencySets,
    states: &[FockState],
    ideal: &[Vec<f64>],
    acc: &[Running],
    cfg: &BiasConfig,
) -> BiasMaps {
    let m = params.m;
    let ns = states.len();
    let mut delta_xi = vec![0.0; deps.internal_count()];
    let mut records = Vec::with_capacity(ns * ns);
    let mut sig = Running::default();
    let mut skipped = 0;
    for v in 0..ns {
        for w in 0..ns {
            let r = &acc[v * ns + w];
            let (delta, spread) = (r.mean, r.std());
            let sigma = match cfg.sigma_scale {
                SigmaScale::StandardError => r.std_error(),
                SigmaScale::SampleStd => spread,
            };
            records.push(PairRecord {
                input: states[v].clone(),
                output: states[w].clone(),
                p: ideal[v][w],
                delta,
                sigma,
                spread,
            });
            if !(sigma > 0.0) {
                skipped += 1;
                continue;
            }
            let s = delta.abs() / sigma;
            sig.push(s);
            let xi = deps.for_states(&states[v], &states[w], false);
            if xi.is_empty() {
                continue;
            }
            let share = s / xi.len() as f64;
            for k in xi {
                delta_xi[k] += share;
            }
        }
    }
    let delta_ij = (0..m)
        .map(|i| (0..m).map(|j| deps.internal(i, j).map(|k| delta_xi[k]).sum()).collect())
        .collect();
    BiasMaps {
        m,
        architecture: params.architecture,
        photons: cfg.photons,
        trials: cfg.trials,
        sigma_scale: cfg.sigma_scale,
        delta_xi,
        delta_ij,
        records,
        mean_significance: if sig.n > 0 { sig.mean } else { 0.0 },
        significance_std: sig.std(),
        skipped_pairs: skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::haar_random;
    use num_complex::Complex64;

    #[test]
    fn zeta_single_values() {
        let u = Complex64::new(0.3, -0.2);
        assert_eq!(zeta_single(u, u, Part::Re), 0.0);
        assert_eq!(zeta_single(u, u, Part::Im), 0.0);
        let z = zeta_single(Complex64::new(3.0, 0.0), Complex64::new(1.0, 0.0), Part::Re);
        assert!((z - 0.5).abs() < 1e-15);
        assert_eq!(zeta_single(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Part::Re), 1.0);
        assert_eq!(zeta_single(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), Part::Re), 0.0);
    }

    #[test]
    fn zero_noise_zeta_is_zero() {
        for ensemble in [Ensemble::Haar, Ensemble::Uniform, Ensemble::Fourier] {
            let mut cfg = ZetaConfig::new(5, Architecture::Rectangular, ensemble);
            cfg.noise = NoiseModel::noiseless();
            cfg.n_unitaries = 3;
            cfg.n_trials = 4;
            let z = zeta_map(&cfg).unwrap();
            assert!(z.zeta.iter().flatten().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn zeta_is_bounded_and_worker_independent() {
        let mut cfg = ZetaConfig::new(5, Architecture::Triangular, Ensemble::Haar);
        cfg.n_unitaries = 6;
        cfg.n_trials = 5;
        cfg.seed = 17;
        let a = zeta_map(&cfg).unwrap();
        cfg.workers = 3;
        let b = zeta_map(&cfg).unwrap();
        assert_eq!(a.zeta, b.zeta);
        assert!(a.zeta.iter().flatten().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn zero_noise_bias_is_zero() {
        let u = haar_random(4, 2);
        let mut cfg = BiasConfig::new(2, 3);
        cfg.noise = NoiseModel::noiseless();
        let b = multi_photon_bias(&u, Architecture::Rectangular, &cfg).unwrap();
        assert!(b.delta_xi.iter().all(|&x| x == 0.0));
        assert_eq!(b.skipped_pairs, 36);
    }

    #[test]
    fn sigma_scales_differ_by_sqrt_trials() {
        let u = haar_random(4, 8);
        let mut cfg = BiasConfig::new(2, 50);
        let a = multi_photon_bias(&u, Architecture::Rectangular, &cfg).unwrap();
        cfg.sigma_scale = SigmaScale::SampleStd;
        let b = multi_photon_bias(&u, Architecture::Rectangular, &cfg).unwrap();
        let ratio = a.mean_significance / b.mean_significance;
        assert!((ratio - 50f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bias_is_worker_independent() {
        let u = haar_random(5, 4);
        let mut cfg = BiasConfig::new(2, 70);
        cfg.seed = 9;
        let a = multi_photon_bias(&u, Architecture::Triangular, &cfg).unwrap();
        cfg.workers = 4;
        let b = multi_photon_bias(&u, Architecture::Triangular, &cfg).unwrap();
        assert_eq!(a.delta_xi, b.delta_xi);
        assert_eq!(a.mean_significance, b.mean_significance);
        assert!(a.delta_xi.iter().all(|&x| x >= 0.0));
    }
}
