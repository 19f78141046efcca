//! MZ transfer matrices, mesh decomposition/reconstruction, unitary
//! ensembles and component noise.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{cell_positions, Architecture, CellPosition};
use crate::rng;

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance used when validating user-supplied unitaries.
pub const UNITARY_TOL: f64 = 1e-8;

// Magnitudes below this are treated as exact zeros when extracting phases.
const TIE_EPS: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wrap an angle into `[0, 2pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn arg_or_zero(z: Complex64) -> f64 {
    if z.norm() < TIE_EPS {
        0.0
    } else {
        z.arg()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MzParams {
    pub psi: f64,
    pub theta: f64,
    pub t1: f64,
    pub t2: f64,
}

impl MzParams {
    /// Ideal 50:50 beamsplitters.
    pub fn new(psi: f64, theta: f64) -> Self {
        MzParams {
            psi,
            theta,
            t1: FRAC_1_SQRT_2,
            t2: FRAC_1_SQRT_2,
        }
    }

    pub fn cross() -> Self {
        MzParams::new(0.0, 0.0)
    }

    pub fn bar() -> Self {
        MzParams::new(PI, 0.0)
    }

    pub fn transfer(&self) -> [[Complex64; 2]; 2] {
        mz_transfer_array(self)
    }
}

fn beamsplitter(t: f64) -> [[Complex64; 2]; 2] {
    let r = I * (1.0 - t * t).max(0.0).sqrt();
    let t = Complex64::new(t, 0.0);
    [[t, r], [r, t]]
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn phase_top(a: &[[Complex64; 2]; 2], phi: f64) -> [[Complex64; 2]; 2] {
    // diag(e^{i phi}, 1) applied from the left
    let e = Complex64::from_polar(1.0, phi);
    [[a[0][0] * e, a[0][1] * e], [a[1][0], a[1][1]]]
}

fn mz_transfer_array(p: &MzParams) -> [[Complex64; 2]; 2] {
    // B(t2) P(psi) B(t1) P(theta), built right to left
    let pt = [
        [Complex64::from_polar(1.0, p.theta), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let x = mul2(&beamsplitter(p.t1), &pt);
    let x = phase_top(&x, p.psi);
    mul2(&beamsplitter(p.t2), &x)
}

/// 2x2 transfer matrix of a single MZ.
pub fn mz_transfer(p: &MzParams) -> CMatrix {
    let a = mz_transfer_array(p);
    CMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

/// Embed a 2x2 block on modes `(mode, mode + 1)` of an `m`-mode identity.
pub fn embed_givens(u2: &CMatrix, mode: usize, m: usize) -> Result<CMatrix> {
    if u2.nrows() != 2 || u2.ncols() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a 2x2 block, got {}x{}",
            u2.nrows(),
            u2.ncols()
        )));
    }
    if mode + 1 >= m {
        return Err(Error::ModeOutOfRange { mode, m });
    }
    let mut out = CMatrix::identity(m, m);
    for a in 0..2 {
        for b in 0..2 {
            out[(mode + a, mode + b)] = u2[(a, b)];
        }
    }
    Ok(out)
}

/// `M <- T M` with `T` acting on rows `(r, r + 1)`.
pub(crate) fn apply_left(m: &mut CMatrix, r: usize, t: &[[Complex64; 2]; 2]) {
    for c in 0..m.ncols() {
        let a = m[(r, c)];
        let b = m[(r + 1, c)];
        m[(r, c)] = t[0][0] * a + t[0][1] * b;
        m[(r + 1, c)] = t[1][0] * a + t[1][1] * b;
    }
}

/// `M <- M T` with `T` acting on columns `(r, r + 1)`.
pub(crate) fn apply_right(m: &mut CMatrix, r: usize, t: &[[Complex64; 2]; 2]) {
    for row in 0..m.nrows() {
        let a = m[(row, r)];
        let b = m[(row, r + 1)];
        m[(row, r)] = a * t[0][0] + b * t[1][0];
        m[(row, r + 1)] = a * t[0][1] + b * t[1][1];
    }
}

fn dagger2(t: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [t[0][0].conj(), t[1][0].conj()],
        [t[0][1].conj(), t[1][1].conj()],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshCell {
    pub layer: usize,
    pub row: usize,
    #[serde(flatten)]
    pub params: MzParams,
}

impl MeshCell {
    pub fn position(&self) -> CellPosition {
        CellPosition::new(self.layer, self.row)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshParameters {
    pub m: usize,
    pub architecture: Architecture,
    /// Sorted by `(layer, row)`.
    pub cells: Vec<MeshCell>,
    pub output_phases: Vec<f64>,
}

impl MeshParameters {
    /// Mesh with every cell set to `params` and `D = I`.
    pub fn uniform(m: usize, architecture: Architecture, params: MzParams) -> Self {
        let cells = cell_positions(m, architecture)
            .into_iter()
            .map(|p| MeshCell {
                layer: p.layer,
                row: p.row,
                params,
            })
            .collect();
        MeshParameters {
            m,
            architecture,
            cells,
            output_phases: vec![0.0; m],
        }
    }

    /// Checks geometry, counts and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidArgument(format!("m must be >= 2, got {}", self.m)));
        }
        if self.output_phases.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "expected {} output phases, got {}",
                self.m,
                self.output_phases.len()
            )));
        }
        let expected = cell_positions(self.m, self.architecture);
        let got: Vec<CellPosition> = self.cells.iter().map(|c| c.position()).collect();
        if expected != got {
            return Err(Error::InvalidArgument(format!(
                "cell positions do not form a valid {} mesh of size {}",
                self.architecture, self.m
            )));
        }
        for c in &self.cells {
            let p = &c.params;
            let finite = [p.psi, p.theta, p.t1, p.t2].iter().all(|x| x.is_finite());
            if !finite || !(0.0..=1.0).contains(&p.t1) || !(0.0..=1.0).contains(&p.t2) {
                return Err(Error::InvalidArgument(format!(
                    "invalid parameters at (layer {}, row {})",
                    c.layer, c.row
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: MeshParameters = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// Mesh unitary `U = D * T_last * ... * T_first`.
pub fn reconstruct(p: &MeshParameters) -> CMatrix {
    let mut u = CMatrix::identity(p.m, p.m);
    for c in &p.cells {
        apply_left(&mut u, c.row, &c.params.transfer());
    }
    for (i, &phi) in p.output_phases.iter().enumerate() {
        let e = Complex64::from_polar(1.0, phi);
        for col in 0..p.m {
            u[(i, col)] *= e;
        }
    }
    u
}

/// Frobenius norm of `U^dagger U - I`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

// Right nulling: (W T^dagger)[row, k] = 0 with T on columns (k, k+1).
fn null_right(a: Complex64, b: Complex64) -> MzParams {
    let psi = 2.0 * b.norm().atan2(a.norm());
    let theta = arg_or_zero(a) - arg_or_zero(b) + PI;
    MzParams::new(wrap_phase(psi), wrap_phase(theta))
}

// Left nulling: (T W)[r + 1, y] = 0 with T on rows (r, r+1).
fn null_left(a: Complex64, b: Complex64) -> MzParams {
    let psi = 2.0 * a.norm().atan2(b.norm());
    let theta = arg_or_zero(b) - arg_or_zero(a);
    MzParams::new(wrap_phase(psi), wrap_phase(theta))
}

/// Rewrite `V = diag(e^{i alpha}, e^{i beta}) * T(psi, theta)`.
fn factor_through_diag(v: &[[Complex64; 2]; 2]) -> (f64, f64, MzParams) {
    let s = 0.5 * (v[0][0].norm() + v[1][1].norm());
    let c = 0.5 * (v[0][1].norm() + v[1][0].norm());
    let psi = 2.0 * s.atan2(c);
    let g = I * Complex64::from_polar(1.0, psi / 2.0);
    let (alpha, beta, theta);
    if c < TIE_EPS {
        theta = 0.0;
        alpha = arg_or_zero(v[0][0] / g);
        beta = arg_or_zero(-v[1][1] / g);
    } else if s < TIE_EPS {
        theta = 0.0;
        alpha = arg_or_zero(v[0][1] / g);
        beta = arg_or_zero(v[1][0] / g);
    } else {
        alpha = arg_or_zero(v[0][1] / g);
        beta = arg_or_zero(-v[1][1] / g);
        theta = arg_or_zero(v[0][0]) - arg_or_zero(v[0][1]);
    }
    (alpha, beta, MzParams::new(wrap_phase(psi), wrap_phase(theta)))
}

fn check_unitary(u: &CMatrix) -> Result<usize> {
    if u.nrows() != u.ncols() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    if u.nrows() < 2 {
        return Err(Error::InvalidArgument("matrix must be at least 2x2".into()));
    }
    let deviation = unitarity_deviation(u);
    if !(deviation <= UNITARY_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(u.nrows())
}

/// Decompose a unitary into mesh parameters.
///
/// The triangular mesh uses column nulling from the right only; the
/// rectangular mesh alternates right and left nulling and then commutes the
/// left factors through the residual diagonal.
pub fn decompose(u: &CMatrix, architecture: Architecture) -> Result<MeshParameters> {
    let m = check_unitary(u)?;
    let mut w = u.clone();
    // (row, params) in the order light meets them
    let mut ordered: Vec<(usize, MzParams)> = Vec::with_capacity(m * (m - 1) / 2);

    match architecture {
        Architecture::Triangular => {
            for d in 0..m - 1 {
                let x = m - 1 - d;
                for k in 0..x {
                    let p = null_right(w[(x, k)], w[(x, k + 1)]);
                    apply_right(&mut w, k, &dagger2(&p.transfer()));
                    ordered.push((k, p));
                }
            }
        }
        Architecture::Rectangular => {
            let mut left: Vec<(usize, MzParams)> = Vec::new();
            for i in 1..m {
                if i % 2 == 1 {
                    for j in 0..i {
                        let row = m - 1 - j;
                        let col = i - 1 - j;
                        let p = null_right(w[(row, col)], w[(row, col + 1)]);
                        apply_right(&mut w, col, &dagger2(&p.transfer()));
                        ordered.push((col, p));
                    }
                } else {
                    for j in 1..=i {
                        let row = m + j - i - 1;
                        let col = j - 1;
                        let p = null_left(w[(row - 1, col)], w[(row, col)]);
                        apply_left(&mut w, row - 1, &p.transfer());
                        left.push((row - 1, p));
                    }
                }
            }
            // U = L_1^dag ... L_p^dag D R_q ... R_1; push D leftwards.
            let mut diag: Vec<Complex64> = (0..m).map(|k| w[(k, k)]).collect();
            let mut pushed = Vec::with_capacity(left.len());
            for &(r, p) in left.iter().rev() {
                let td = dagger2(&p.transfer());
                let v = [
                    [td[0][0] * diag[r], td[0][1] * diag[r + 1]],
                    [td[1][0] * diag[r], td[1][1] * diag[r + 1]],
                ];
                let (alpha, beta, q) = factor_through_diag(&v);
                diag[r] = Complex64::from_polar(1.0, alpha);
                diag[r + 1] = Complex64::from_polar(1.0, beta);
                pushed.push((r, q));
            }
            for k in 0..m {
                w[(k, k)] = diag[k];
            }
            // pushed holds T'_p .. T'_1, which is already the light order
            ordered.extend(pushed);
        }
    }

    let output_phases: Vec<f64> = (0..m).map(|k| wrap_phase(arg_or_zero(w[(k, k)]))).collect();
    let cells = assign_slots(m, architecture, &ordered)?;
    Ok(MeshParameters {
        m,
        architecture,
        cells,
        output_phases,
    })
}

// Place factors (in light order) onto layout slots, pair by pair, and check
// that no two factors sharing a mode get swapped.
fn assign_slots(
    m: usize,
    architecture: Architecture,
    ordered: &[(usize, MzParams)],
) -> Result<Vec<MeshCell>> {
    let positions = cell_positions(m, architecture);
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); m - 1];
    for p in &positions {
        slots[p.row].push(p.layer);
    }
    let mut used = vec![0usize; m - 1];
    let mut last_layer: Vec<Option<usize>> = vec![None; m];
    let mut cells = Vec::with_capacity(ordered.len());
    for &(r, params) in ordered {
        let layer = *slots[r].get(used[r]).ok_or_else(|| {
            Error::Inconsistent(format!("too many factors on modes ({r}, {})", r + 1))
        })?;
        used[r] += 1;
        for mode in [r, r + 1] {
            if let Some(prev) = last_layer[mode] {
                if prev >= layer {
                    return Err(Error::Inconsistent(format!(
                        "factor order on mode {mode} does not fit the {architecture} layout"
                    )));
                }
            }
            last_layer[mode] = Some(layer);
        }
        cells.push(MeshCell { layer, row: r, params });
    }
    cells.sort_by_key(|c| (c.layer, c.row));
    Ok(cells)
}

/// Haar-random unitary from the QR factorisation of a Ginibre matrix.
pub fn haar_random(m: usize, seed: u64) -> CMatrix {
    let mut rng = rng::stream(seed, &[rng::TAG_HAAR, m as u64]);
    haar_random_with(m, &mut rng)
}

pub fn haar_random_with<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..m {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..m {
            q[(row, k)] *= ph;
        }
    }
    q
}

/// Mesh with i.i.d. uniform phases, ideal beamsplitters and `D = I`.
pub fn uniform_phase_random(m: usize, architecture: Architecture, seed: u64) -> MeshParameters {
    let mut rng = rng::stream(seed, &[rng::TAG_UNIFORM, m as u64]);
    uniform_phase_random_with(m, architecture, &mut rng)
}

pub fn uniform_phase_random_with<R: Rng + ?Sized>(
    m: usize,
    architecture: Architecture,
    rng: &mut R,
) -> MeshParameters {
    let mut p = MeshParameters::uniform(m, architecture, MzParams::cross());
    for c in &mut p.cells {
        c.params.psi = rng.random_range(0.0..TAU);
        c.params.theta = rng.random_range(0.0..TAU);
    }
    p
}

/// Discrete Fourier transform, `F_jk = exp(2 pi i jk / m) / sqrt(m)`.
pub fn fourier(m: usize) -> CMatrix {
    let norm = 1.0 / (m as f64).sqrt();
    CMatrix::from_fn(m, m, |j, k| {
        // reduce jk mod m first to keep the angle small
        let e = ((j * k) % m) as f64;
        Complex64::from_polar(norm, TAU * e / m as f64)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub bs_mean: f64,
    pub bs_sigma: f64,
    pub phase_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            bs_mean: FRAC_1_SQRT_2,
            bs_sigma: 1e-2,
            phase_sigma: 1e-3,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            bs_sigma: 0.0,
            phase_sigma: 0.0,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.bs_sigma >= 0.0
            && self.phase_sigma >= 0.0
            && self.bs_sigma.is_finite()
            && self.phase_sigma.is_finite()
            && self.bs_mean.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid noise model {self:?}")))
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.bs_sigma == 0.0 && self.phase_sigma == 0.0
    }
}

/// Noisy copy of `p`, a pure function of `(n.seed, trial)`.
pub fn perturb(p: &MeshParameters, n: &NoiseModel, trial: u64) -> MeshParameters {
    let mut rng = rng::stream(n.seed, &[rng::TAG_NOISE, trial]);
    perturb_with(p, n, &mut rng)
}

/// Same as [`perturb`] but drawing from a caller-supplied stream.
///
/// Four normal samples are drawn per cell even at zero sigma, so the stream
/// position never depends on the noise level.
pub fn perturb_with<R: Rng + ?Sized>(p: &MeshParameters, n: &NoiseModel, rng: &mut R) -> MeshParameters {
    let bs = Normal::new(n.bs_mean, n.bs_sigma.max(0.0)).expect("finite sigma");
    let ph = Normal::new(0.0, n.phase_sigma.max(0.0)).expect("finite sigma");
    let mut out = p.clone();
    for c in &mut out.cells {
        let t1: f64 = bs.sample(rng);
        let t2: f64 = bs.sample(rng);
        let dpsi: f64 = ph.sample(rng);
        let dtheta: f64 = ph.sample(rng);
        c.params.t1 = t1.clamp(0.0, 1.0);
        c.params.t2 = t2.clamp(0.0, 1.0);
        if n.phase_sigma > 0.0 {
            c.params.psi = wrap_phase(c.params.psi + dpsi);
            c.params.theta = wrap_phase(c.params.theta + dtheta);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    m: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

/// Serialise a square matrix as `{"m": .., "entries": [[[re, im], ..], ..]}`.
pub fn matrix_to_json(u: &CMatrix) -> Result<String> {
    let entries = (0..u.nrows())
        .map(|r| (0..u.ncols()).map(|c| [u[(r, c)].re, u[(r, c)].im]).collect())
        .collect();
    Ok(serde_json::to_string_pretty(&MatrixFile { m: u.nrows(), entries })?)
}

pub fn matrix_from_json(s: &str) -> Result<CMatrix> {
    let f: MatrixFile = serde_json::from_str(s)?;
    if f.entries.len() != f.m || f.entries.iter().any(|r| r.len() != f.m) {
        return Err(Error::InvalidArgument(format!(
            "matrix file does not hold an {0}x{0} entry array",
            f.m
        )));
    }
    Ok(CMatrix::from_fn(f.m, f.m, |r, c| {
        let [re, im] = f.entries[r][c];
        Complex64::new(re, im)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn cross_and_bar_states() {
        let t = mz_transfer(&MzParams::cross());
        assert!(close(t[(0, 0)], 0.0.into()) && close(t[(1, 1)], 0.0.into()));
        assert!(close(t[(0, 1)], I) && close(t[(1, 0)], I));

        let t = mz_transfer(&MzParams::bar());
        assert!(close(t[(0, 0)], (-1.0).into()) && close(t[(1, 1)], 1.0.into()));
        assert!(close(t[(0, 1)], 0.0.into()) && close(t[(1, 0)], 0.0.into()));
    }

    #[test]
    fn balanced_state_has_equal_magnitudes() {
        let t = mz_transfer(&MzParams::new(PI / 2.0, 0.0));
        for z in t.iter() {
            assert!((z.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_bar_on_second_pair() {
        let e = embed_givens(&mz_transfer(&MzParams::bar()), 1, 4).unwrap();
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0.into(),
            (-1.0).into(),
            1.0.into(),
            1.0.into(),
        ]));
        assert!(frobenius_distance(&e, &want) < 1e-12);
        assert!(embed_givens(&CMatrix::identity(2, 2), 3, 4).is_err());
    }

    #[test]
    fn decompose_rejects_non_unitary() {
        let mut u = CMatrix::identity(3, 3);
        u[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            decompose(&u, Architecture::Rectangular),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn identity_and_fourier_round_trip() {
        for arch in Architecture::ALL {
            for u in [CMatrix::identity(4, 4), fourier(8), fourier(5)] {
                let p = decompose(&u, arch).unwrap();
                assert_eq!(p.cells.len(), cell_positions(u.nrows(), arch).len());
                p.validate().unwrap();
                assert!(frobenius_distance(&reconstruct(&p), &u) < 1e-10);
            }
        }
    }

    #[test]
    fn zero_noise_perturbation_is_identity() {
        let p = uniform_phase_random(6, Architecture::Rectangular, 3);
        assert_eq!(perturb(&p, &NoiseModel::noiseless(), 11), p);
    }

    #[test]
    fn perturbation_is_deterministic() {
        let p = uniform_phase_random(5, Architecture::Triangular, 3);
        let n = NoiseModel::default().with_seed(42);
        assert_eq!(perturb(&p, &n, 1), perturb(&p, &n, 1));
        assert_ne!(perturb(&p, &n, 1), perturb(&p, &n, 2));
    }

    #[test]
    fn json_round_trips() {
        let u = haar_random(4, 9);
        let back = matrix_from_json(&matrix_to_json(&u).unwrap()).unwrap();
        assert_eq!(back, u);
        let p = decompose(&u, Architecture::Triangular).unwrap();
        let back = MeshParameters::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn round_trip_haar(m in 2usize..12, seed in any::<u64>(), rect in any::<bool>()) {
            let arch = if rect { Architecture::Rectangular } else { Architecture::Triangular };
            let u = haar_random(m, seed);
            let p = decompose(&u, arch).unwrap();
            prop_assert!(frobenius_distance(&reconstruct(&p), &u) < 1e-10);
            prop_assert!(p.cells.iter().all(|c| (0.0..TAU).contains(&c.params.psi)
                && (0.0..TAU).contains(&c.params.theta)));
        }

        #[test]
        fn noisy_meshes_stay_unitary(m in 2usize..10, seed in any::<u64>(), bs in 0.0f64..0.5, ph in 0.0f64..1.0) {
            let p = uniform_phase_random(m, Architecture::Rectangular, seed);
            let n = NoiseModel { bs_sigma: bs, phase_sigma: ph, seed, ..Default::default() };
            let u = reconstruct(&perturb(&p, &n, 0));
            prop_assert!(unitarity_deviation(&u) < 1e-10);
        }
    }
}
