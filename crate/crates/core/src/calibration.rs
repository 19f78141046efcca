//! Simulated thermo-optic rectangular mesh and its sequential calibration.
//!
//! Each cell follows the quadratic voltage-to-phase law
//! `theta = theta0 + alpha V_theta^2`, `psi = psi0 + beta V_psi^2`.
//! `theta` drives the internal phase of the MZ (`2 theta`, the splitting
//! ratio) and `psi` the external phase on its upper input (`2 psi`). With
//! this convention a single cell sends `(1 + cos(2 theta)) / 2` of the light
//! to the opposite mode.
//!
//! Calibration runs in two stages. First, diagonals of cells are traversed
//! as optical paths and each cell's `(theta0, alpha)` is fitted from a
//! voltage scan. Second, layer by layer, every cell is turned into a
//! balanced splitter fed by two modes in phase, which exposes `beta` and
//! then `psi0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_sinusoid, FitOptions, SinusoidFit};
use crate::mesh::{cell_positions, Architecture, CellPosition};
use crate::par;
use crate::rng::{self, StreamRng};
use crate::unitary::{reconstruct, wrap_phase, CMatrix, MeshParameters, MzParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoltagePhaseLaw {
    pub theta0: f64,
    pub alpha: f64,
    pub psi0: f64,
    pub beta: f64,
}

impl VoltagePhaseLaw {
    /// Draw from the experiment distribution: `theta0 ~ U[0, pi)`,
    /// `psi0 ~ U[0, pi/4]`, `alpha, beta ~ U[0.5, 1.5]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        VoltagePhaseLaw {
            theta0: rng.random_range(0.0..PI),
            alpha: rng.random_range(0.5..=1.5),
            psi0: rng.random_range(0.0..=FRAC_PI_4),
            beta: rng.random_range(0.5..=1.5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=FRAC_PI_4).contains(&self.psi0)
            && self.alpha > 0.0
            && self.beta > 0.0
            && self.theta0.is_finite()
            && self.alpha.is_finite()
            && self.beta.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid voltage law {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Voltages {
    pub v_theta: f64,
    pub v_psi: f64,
}

/// Light injected into the device.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Injection {
    Mode(usize),
    /// `(|r> + |r+1>) / sqrt 2`, zero relative phase.
    Pair(usize),
}

#[derive(Clone, Debug)]
pub struct SimulatedDevice {
    m: usize,
    cells: Vec<CellPosition>,
    laws: Vec<VoltagePhaseLaw>,
    meas_noise: f64,
    rng: StreamRng,
}

impl SimulatedDevice {
    pub fn new(m: usize, laws: Vec<VoltagePhaseLaw>, meas_noise: f64, seed: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("m must be >= 2, got {m}")));
        }
        let cells = cell_positions(m, Architecture::Rectangular);
        if laws.len() != cells.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} voltage laws, got {}",
                cells.len(),
                laws.len()
            )));
        }
        for law in &laws {
            law.validate()?;
        }
        if !(meas_noise >= 0.0) || !meas_noise.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid measurement noise {meas_noise}")));
        }
        Ok(SimulatedDevice {
            m,
            cells,
            laws,
            meas_noise,
            rng: rng::stream(seed, &[rng::TAG_MEASURE]),
        })
    }

    /// Device with hidden laws drawn from `seed`.
    pub fn random(m: usize, meas_noise: f64, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed, &[rng::TAG_DEVICE]);
        let n = m * m.saturating_sub(1) / 2;
        let laws = (0..n).map(|_| VoltagePhaseLaw::random(&mut r)).collect();
        SimulatedDevice::new(m, laws, meas_noise, seed)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[CellPosition] {
        &self.cells
    }

    /// The hidden truth, for scoring estimates.
    pub fn laws(&self) -> &[VoltagePhaseLaw] {
        &self.laws
    }

    pub fn meas_noise(&self) -> f64 {
        self.meas_noise
    }

    fn check_voltages(&self, v: &[Voltages]) -> Result<()> {
        if v.len() != self.cells.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} voltage pairs, got {}",
                self.cells.len(),
                v.len()
            )));
        }
        if v.iter().any(|x| !(x.v_theta >= 0.0) || !(x.v_psi >= 0.0)) {
            return Err(Error::InvalidArgument("voltages must be non-negative".into()));
        }
        Ok(())
    }

    /// Mesh parameters realised by a voltage setting.
    pub fn parameters(&self, v: &[Voltages]) -> Result<MeshParameters> {
        self.check_voltages(v)?;
        let mut p = MeshParameters::uniform(self.m, Architecture::Rectangular, MzParams::cross());
        for ((cell, law), volt) in p.cells.iter_mut().zip(&self.laws).zip(v) {
            let theta = law.theta0 + law.alpha * volt.v_theta * volt.v_theta;
            let psi = law.psi0 + law.beta * volt.v_psi * volt.v_psi;
            cell.params.psi = wrap_phase(2.0 * theta);
            cell.params.theta = wrap_phase(2.0 * psi);
        }
        Ok(p)
    }

    pub fn unitary(&self, v: &[Voltages]) -> Result<CMatrix> {
        Ok(reconstruct(&self.parameters(v)?))
    }

    /// Output powers for an injection, with multiplicative Gaussian
    /// measurement noise (clamped at zero).
    pub fn measure(&mut self, v: &[Voltages], input: Injection) -> Result<Vec<f64>> {
        let u = self.unitary(v)?;
        let m = self.m;
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        match input {
            Injection::Mode(k) if k < m => x[k] = Complex64::new(1.0, 0.0),
            Injection::Pair(r) if r + 1 < m => {
                let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                x[r] = a;
                x[r + 1] = a;
            }
            Injection::Mode(k) | Injection::Pair(k) => {
                return Err(Error::ModeOutOfRange { mode: k, m });
            }
        }
        let mut p = Vec::with_capacity(m);
        for i in 0..m {
            let amp: Complex64 = (0..m).map(|j| u[(i, j)] * x[j]).sum();
            // draw regardless of the noise level so streams stay aligned
            let eps: f64 = StandardNormal.sample(&mut self.rng);
            p.push((amp.norm_sqr() * (1.0 + self.meas_noise * eps)).max(0.0));
        }
        Ok(p)
    }
}

/// Voltage-squared scan grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub points: usize,
    /// Upper end of the `V^2` grid; the lower end is 0.
    pub max_v2: f64,
    /// Number of coarse frequency candidates tried per fit.
    pub frequency_grid: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            points: 50,
            max_v2: TAU,
            frequency_grid: 240,
        }
    }
}

impl ScanSpec {
    fn validate(&self) -> Result<()> {
        if self.points < 8 || self.frequency_grid < 3 || !(self.max_v2 > 0.0) || !self.max_v2.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid scan spec {self:?}")));
        }
        Ok(())
    }

    /// Voltages of the scan.
    pub fn voltages(&self) -> Vec<f64> {
        self.squares().into_iter().map(f64::sqrt).collect()
    }

    fn squares(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| self.max_v2 * k as f64 / (self.points - 1) as f64)
            .collect()
    }

    // The scan covers between 0.2 and 3 modulation periods of the phase
    // 2 theta; at the default grid this is alpha in [0.2, 3].
    fn fit_options(&self, offset: Option<f64>) -> FitOptions {
        FitOptions {
            omega_min: 0.4 * PI / self.max_v2,
            omega_max: 6.0 * PI / self.max_v2,
            grid: self.frequency_grid,
            offset,
        }
    }
}

/// One fitted cell from a diagonal scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaFit {
    pub cell: usize,
    pub theta0: f64,
    pub alpha: f64,
    pub v_bar: f64,
    pub v_cross: f64,
    pub v_50: f64,
    pub rss: f64,
}

/// Voltage reaching `theta0 + alpha V^2 = target (mod pi)`.
pub fn invert_theta(theta0: f64, alpha: f64, target: f64) -> f64 {
    ((target - theta0).rem_euclid(PI) / alpha).sqrt()
}

fn theta_fit_from(cell: usize, f: &SinusoidFit) -> ThetaFit {
    // model: K/2 (1 + cos(2 theta0 + 2 alpha V^2))
    let theta0 = (f.phase() / 2.0).rem_euclid(PI);
    let alpha = f.omega / 2.0;
    ThetaFit {
        cell,
        theta0,
        alpha,
        v_bar: invert_theta(theta0, alpha, FRAC_PI_2),
        v_cross: invert_theta(theta0, alpha, 0.0),
        v_50: invert_theta(theta0, alpha, FRAC_PI_4),
        rss: f.rss,
    }
}

/// A diagonal traversed as an optical path: light enters `input`, crosses
/// every cell in `cells` (in propagation order) and leaves at `output`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalPath {
    pub input: usize,
    pub output: usize,
    pub cells: Vec<usize>,
}

/// The calibration paths in the order they are processed.
///
/// The first sweep covers the diagonals starting on the first layer
/// (entering at modes 0, 2, 4, ...) and ending on the bottom mode; the
/// second covers those that start on mode 0 in later layers and end on the
/// last layer. Every cell lies on exactly one path.
pub fn diagonal_paths(m: usize) -> Vec<DiagonalPath> {
    let cells = cell_positions(m, Architecture::Rectangular);
    let index = |l: usize, r: usize| cells.iter().position(|c| c.layer == l && c.row == r);
    let mut paths = Vec::new();
    for d in 1..=m / 2 {
        let r0 = 2 * d - 2;
        let cells = (0..).map_while(|k| index(k, r0 + k)).collect();
        paths.push(DiagonalPath {
            input: r0,
            output: m - 1,
            cells,
        });
    }
    for d in 1..=(m - 1) / 2 {
        let cells = (0..).map_while(|k| index(2 * d + k, k)).collect();
        paths.push(DiagonalPath {
            input: 0,
            output: m - 2 * d,
            cells,
        });
    }
    paths
}

/// Fit every cell of `path`, last cell first.
///
/// `settings` holds the voltages of all other cells (calibrated cells on
/// earlier paths at bar, the rest at zero); cells already fitted on this
/// path are switched to cross so the scanned cell's light reaches `output`.
pub fn fit_path(
    dev: &mut SimulatedDevice,
    path: &DiagonalPath,
    settings: &mut [Voltages],
    scan: &ScanSpec,
) -> Result<Vec<ThetaFit>> {
    scan.validate()?;
    let x = scan.squares();
    let volts = scan.voltages();
    let opts = scan.fit_options(None);
    let mut fits = Vec::with_capacity(path.cells.len());
    for &b in path.cells.iter().rev() {
        let mut y = Vec::with_capacity(x.len());
        for &v in &volts {
            settings[b].v_theta = v;
            y.push(dev.measure(settings, Injection::Mode(path.input))?[path.output]);
        }
        let pos = dev.cells[b];
        let fail = |reason: &str| Error::FitFailed {
            layer: pos.layer,
            row: pos.row,
            reason: reason.to_string(),
        };
        let f = fit_sinusoid(&x, &y, &opts).ok_or_else(|| fail("least squares did not converge"))?;
        if !(f.amplitude() > 0.0) {
            return Err(fail("flat scan trace"));
        }
        let t = theta_fit_from(b, &f);
        settings[b].v_theta = t.v_cross;
        fits.push(t);
    }
    fits.reverse();
    Ok(fits)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub layer: usize,
    pub row: usize,
    pub theta0: f64,
    pub alpha: f64,
    pub psi0: f64,
    pub beta: f64,
    pub v_bar: f64,
    pub v_cross: f64,
    pub v_50: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellErrors {
    pub theta0: f64,
    pub alpha: f64,
    pub psi0: f64,
    pub beta: f64,
}

impl CellErrors {
    pub fn max(&self) -> f64 {
        self.theta0.max(self.alpha).max(self.psi0).max(self.beta)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationEstimate {
    pub m: usize,
    /// Sorted by `(layer, row)`.
    pub cells: Vec<CellEstimate>,
    /// Absolute errors against the device's hidden laws.
    pub errors: Vec<CellErrors>,
    /// Position of each cell in the diagonal (theta) stage.
    pub theta_order: Vec<usize>,
    /// Position of each cell in the layer (psi) stage.
    pub psi_order: Vec<usize>,
}

impl CalibrationEstimate {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().map(CellErrors::max).fold(0.0, f64::max)
    }

    /// Voltages putting every cell at bar.
    pub fn bar_voltages(&self) -> Vec<Voltages> {
        self.cells
            .iter()
            .map(|c| Voltages {
                v_theta: c.v_bar,
                v_psi: 0.0,
            })
            .collect()
    }

    /// Bar/cross voltages realising a mode permutation: input `j` exits at
    /// output `perm[j]`. The settings follow an odd-even transposition
    /// sort, one round per layer.
    pub fn routing_voltages(&self, perm: &[usize]) -> Result<Vec<Voltages>> {
        let m = self.m;
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{m}")));
        }
        let mut dest: Vec<usize> = perm.to_vec();
        let mut v = self.bar_voltages();
        for (k, c) in self.cells.iter().enumerate() {
            if dest[c.row] > dest[c.row + 1] {
                dest.swap(c.row, c.row + 1);
                v[k].v_theta = c.v_cross;
            }
        }
        Ok(v)
    }
}

fn theta_error(est: f64, truth: f64) -> f64 {
    // theta0 only matters modulo pi
    let d = (est - truth).rem_euclid(PI);
    d.min(PI - d)
}

fn layer_cells(cells: &[CellPosition], layer: usize) -> impl Iterator<Item = usize> + '_ {
    cells.iter().enumerate().filter(move |(_, c)| c.layer == layer).map(|(k, _)| k)
}

/// Run the full two-stage calibration.
pub fn calibrate(dev: &mut SimulatedDevice, scan: &ScanSpec) -> Result<CalibrationEstimate> {
    scan.validate()?;
    let m = dev.m;
    let cells = dev.cells.clone();
    let n = cells.len();

    // Stage 1: internal phases along diagonals.
    let paths = diagonal_paths(m);
    let mut seen = vec![false; n];
    for p in &paths {
        for &c in &p.cells {
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::Inconsistent(format!("cell {c} lies on two calibration paths")));
            }
        }
    }
    if let Some(c) = seen.iter().position(|&s| !s) {
        return Err(Error::Inconsistent(format!("cell {c} lies on no calibration path")));
    }

    let mut settings = vec![Voltages::default(); n];
    let mut theta: Vec<Option<ThetaFit>> = vec![None; n];
    let mut theta_order = vec![0; n];
    let mut counter = 0;
    for p in &paths {
        let fits = fit_path(dev, p, &mut settings, scan)?;
        for f in fits.iter().rev() {
            theta_order[f.cell] = counter;
            counter += 1;
        }
        for f in fits {
            settings[f.cell].v_theta = f.v_bar;
            theta[f.cell] = Some(f);
        }
    }
    let theta: Vec<ThetaFit> = theta.into_iter().map(|t| t.expect("coverage checked")).collect();

    // Stage 2: external phases, layer by layer.
    let x = scan.squares();
    let volts = scan.voltages();
    let opts = scan.fit_options(Some(0.5));
    let mut psi0 = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut psi_order = vec![0; n];
    let mut counter = 0;
    let layers = cells.iter().map(|c| c.layer).max().map_or(0, |l| l + 1);
    for layer in 0..layers {
        let mut base: Vec<Voltages> = theta
            .iter()
            .map(|t| Voltages {
                v_theta: t.v_bar,
                v_psi: 0.0,
            })
            .collect();
        for k in layer_cells(&cells, layer) {
            base[k].v_theta = theta[k].v_50;
        }
        for k in layer_cells(&cells, layer) {
            let r = cells[k].row;
            let fail = |reason: &str| Error::FitFailed {
                layer,
                row: r,
                reason: reason.to_string(),
            };
            let mut y = Vec::with_capacity(x.len());
            let mut s = base.clone();
            for &v in &volts {
                s[k].v_psi = v;
                y.push(dev.measure(&s, Injection::Pair(r))?[r]);
            }
            let f = fit_sinusoid(&x, &y, &opts).ok_or_else(|| fail("least squares did not converge"))?;
            let amp = f.amplitude();
            if !(amp > 0.0) {
                return Err(fail("flat scan trace"));
            }
            beta[k] = f.omega / 2.0;

            // at V_psi = 0: P_top - P_bot = 2 A cos(y), y = 2 psi0 + upstream phase
            let p = dev.measure(&base, Injection::Pair(r))?;
            let cos_y = ((p[r] - p[r + 1]) / (2.0 * amp)).clamp(-1.0, 1.0);
            let mut y0 = cos_y.acos();
            if -f.b < 0.0 {
                y0 = -y0;
            }
            // phase picked up on modes r and r+1 by upstream bar cells
            let mut upstream = 0.0;
            for (j, c) in cells.iter().enumerate().filter(|(_, c)| c.layer < layer) {
                if c.row == r {
                    upstream += PI + 2.0 * psi0[j];
                } else if c.row == r + 1 {
                    upstream -= PI + 2.0 * psi0[j];
                }
            }
            psi0[k] = clamp_double_angle(wrap_phase(y0 - upstream)) / 2.0;
            psi_order[k] = counter;
            counter += 1;
        }
    }

    let estimates: Vec<CellEstimate> = cells
        .iter()
        .enumerate()
        .map(|(k, c)| CellEstimate {
            layer: c.layer,
            row: c.row,
            theta0: theta[k].theta0,
            alpha: theta[k].alpha,
            psi0: psi0[k],
            beta: beta[k],
            v_bar: theta[k].v_bar,
            v_cross: theta[k].v_cross,
            v_50: theta[k].v_50,
        })
        .collect();
    let errors = estimates
        .iter()
        .zip(&dev.laws)
        .map(|(e, t)| CellErrors {
            theta0: theta_error(e.theta0, t.theta0),
            alpha: (e.alpha - t.alpha).abs(),
            psi0: (e.psi0 - t.psi0).abs(),
            beta: (e.beta - t.beta).abs(),
        })
        .collect();
    Ok(CalibrationEstimate {
        m,
        cells: estimates,
        errors,
        theta_order,
        psi_order,
    })
}

// Restrict 2 psi0 in [0, 2pi) to [0, pi/2]: values outside snap to the
// nearer end of the range (measured around the circle), ties to 0.
fn clamp_double_angle(x: f64) -> f64 {
    if x <= FRAC_PI_2 {
        return x;
    }
    let to_top = x - FRAC_PI_2;
    let to_zero = TAU - x;
    if to_top < to_zero {
        FRAC_PI_2
    } else {
        0.0
    }
}

/// Per-cell mean absolute errors over repeated calibrations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorMap {
    pub m: usize,
    pub repeats: usize,
    pub meas_noise: f64,
    pub cells: Vec<CellPosition>,
    pub theta0: Vec<f64>,
    pub alpha: Vec<f64>,
    pub psi0: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta_order: Vec<usize>,
    pub psi_order: Vec<usize>,
}

impl ErrorMap {
    /// A per-cell vector laid out as `[row][layer]` (NaN where no cell).
    pub fn grid(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.cells.iter().map(|c| c.layer + 1).max().unwrap_or(0);
        let mut g = vec![vec![f64::NAN; layers]; self.m.saturating_sub(1)];
        for (c, &v) in self.cells.iter().zip(values) {
            g[c.row][c.layer] = v;
        }
        g
    }
}

/// Calibrate `repeats` independent random devices and average the errors.
pub fn calibration_error_map(
    m: usize,
    repeats: usize,
    meas_noise: f64,
    seed: u64,
    scan: &ScanSpec,
    workers: usize,
) -> Result<ErrorMap> {
    if repeats < 2 {
        return Err(Error::InvalidArgument("at least two repeats are needed".into()));
    }
    let runs = par::map_indexed(workers, repeats, |e| {
        let mut dev = SimulatedDevice::random(m, meas_noise, rng::derive_seed(seed, &[e as u64]))?;
        calibrate(&mut dev, scan)
    });
    let n = m * (m - 1) / 2;
    let mut sums = vec![CellErrors::default(); n];
    let mut orders = None;
    for run in runs {
        let run = run?;
        for (s, e) in sums.iter_mut().zip(&run.errors) {
            s.theta0 += e.theta0;
            s.alpha += e.alpha;
            s.psi0 += e.psi0;
            s.beta += e.beta;
        }
        orders.get_or_insert((run.theta_order, run.psi_order));
    }
    let (theta_order, psi_order) = orders.expect("repeats >= 2");
    let mean = |f: fn(&CellErrors) -> f64| sums.iter().map(|s| f(s) / repeats as f64).collect();
    Ok(ErrorMap {
        m,
        repeats,
        meas_noise,
        cells: cell_positions(m, Architecture::Rectangular),
        theta0: mean(|s| s.theta0),
        alpha: mean(|s| s.alpha),
        psi0: mean(|s| s.psi0),
        beta: mean(|s| s.beta),
        theta_order,
        psi_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_paths_cover_every_cell_once() {
        for m in 2..12 {
            let n = m * (m - 1) / 2;
            let mut hits = vec![0; n];
            for p in diagonal_paths(m) {
                for c in p.cells {
                    hits[c] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 1), "m={m} {hits:?}");
        }
    }

    #[test]
    fn single_cell_follows_model() {
        let law = VoltagePhaseLaw {
            theta0: 0.4,
            alpha: 0.9,
            psi0: 0.1,
            beta: 1.1,
        };
        let mut dev = SimulatedDevice::new(2, vec![law], 0.0, 1).unwrap();
        for v in [0.0, 0.5, 1.3, 2.0] {
            let p = dev
                .measure(&[Voltages { v_theta: v, v_psi: 0.3 }], Injection::Mode(0))
                .unwrap();
            let want = 0.5 * (1.0 + (2.0 * law.theta0 + 2.0 * law.alpha * v * v).cos());
            assert!((p[1] - want).abs() < 1e-12);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cell_calibration_is_exact() {
        let mut dev = SimulatedDevice::random(2, 0.0, 5).unwrap();
        let est = calibrate(&mut dev, &ScanSpec::default()).unwrap();
        assert!(est.max_error() < 1e-6, "{:?}", est.errors);
    }

    #[test]
    fn bar_neighbour_scan_is_flat() {
        let mut dev = SimulatedDevice::random(4, 0.0, 2).unwrap();
        let truth = dev.laws().to_vec();
        let mut v: Vec<Voltages> = truth
            .iter()
            .map(|l| Voltages {
                v_theta: invert_theta(l.theta0, l.alpha, FRAC_PI_2),
                v_psi: 0.0,
            })
            .collect();
        // cell 0 = (0, 0) couples modes 0, 1; scanning cell 1 = (0, 2) must not move mode 0
        let mut trace = Vec::new();
        for s in [0.0, 0.7, 1.4, 2.1] {
            v[1].v_theta = s;
            trace.push(dev.measure(&v, Injection::Mode(0)).unwrap()[0]);
        }
        assert!(trace.iter().all(|p| (p - 1.0).abs() < 1e-12), "{trace:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut dev = SimulatedDevice::random(3, 0.0, 1).unwrap();
        let v = vec![Voltages::default(); 3];
        assert!(dev.measure(&v, Injection::Mode(3)).is_err());
        assert!(dev.measure(&v, Injection::Pair(2)).is_err());
        let neg = vec![Voltages { v_theta: -1.0, v_psi: 0.0 }; 3];
        assert!(dev.measure(&neg, Injection::Mode(0)).is_err());
    }

    #[test]
    fn clamp_double_angle_prefers_nearer_end() {
        assert_eq!(clamp_double_angle(1.0), 1.0);
        assert_eq!(clamp_double_angle(2.0), FRAC_PI_2);
        assert_eq!(clamp_double_angle(6.0), 0.0);
    }
    #[test]
    fn derived_voltages_invert_the_law() {
        let mut dev = SimulatedDevice::random(4, 0.0, 9).unwrap();
        let est = calibrate(&mut dev, &ScanSpec::default()).unwrap();
        for c in &est.cells {
            let phase = |v: f64| (c.theta0 + c.alpha * v * v).rem_euclid(PI);
            assert!(phase(c.v_cross).min(PI - phase(c.v_cross)) < 1e-9);
            assert!((phase(c.v_bar) - FRAC_PI_2).abs() < 1e-9);
            assert!((phase(c.v_50) - FRAC_PI_4).abs() < 1e-9);
        }
    }

    #[test]
    fn calibrated_routing_is_deterministic() {
        for m in [3, 4, 6] {
            let mut dev = SimulatedDevice::random(m, 0.0, m as u64).unwrap();
            let est = calibrate(&mut dev, &ScanSpec::default()).unwrap();
            let perms: Vec<Vec<usize>> = vec![
                (0..m).collect(),
                (0..m).rev().collect(),
                (0..m).map(|k| (k + 1) % m).collect(),
            ];
            for perm in perms {
                let v = est.routing_voltages(&perm).unwrap();
                for (j, &target) in perm.iter().enumerate() {
                    let p = dev.measure(&v, Injection::Mode(j)).unwrap();
                    assert!(p[target] > 0.999, "m={m} {perm:?} {j}: {p:?}");
                }
            }
        }
    }

    #[test]
    fn errors_are_invariant_under_rescaled_units() {
        let c = 2.5;
        let base = SimulatedDevice::random(4, 1e-3, 3).unwrap();
        let scaled_laws = base
            .laws()
            .iter()
            .map(|l| VoltagePhaseLaw {
                alpha: l.alpha * c,
                beta: l.beta * c,
                ..*l
            })
            .collect();
        let mut scaled = SimulatedDevice::new(4, scaled_laws, 1e-3, 3).unwrap();
        let mut base = base;
        let scan = ScanSpec::default();
        let scan_c = ScanSpec {
            max_v2: scan.max_v2 / c,
            ..scan
        };
        let a = calibrate(&mut base, &scan).unwrap();
        let b = calibrate(&mut scaled, &scan_c).unwrap();
        for (x, y) in a.errors.iter().zip(&b.errors) {
            assert!((x.theta0 - y.theta0).abs() < 1e-9);
            assert!((x.psi0 - y.psi0).abs() < 1e-9);
            assert!((c * x.alpha - y.alpha).abs() < 1e-9);
            assert!((c * x.beta - y.beta).abs() < 1e-9);
        }
    }

    #[test]
    fn error_maps_are_reproducible_and_vanish_without_noise() {
        let scan = ScanSpec::default();
        let a = calibration_error_map(4, 3, 1e-3, 11, &scan, 1).unwrap();
        let b = calibration_error_map(4, 3, 1e-3, 11, &scan, 3).unwrap();
        assert_eq!(a.psi0, b.psi0);
        assert_eq!(a.beta, b.beta);
        let z = calibration_error_map(4, 2, 0.0, 11, &scan, 1).unwrap();
        assert!(z.psi0.iter().chain(&z.beta).all(|&e| e < 1e-9));
        assert!(calibration_error_map(4, 1, 0.0, 11, &scan, 1).is_err());
    }

    #[test]
    fn all_bar_keeps_light_on_its_mode() {
        let dev = SimulatedDevice::random(5, 0.0, 4).unwrap();
        let v: Vec<Voltages> = dev
            .laws()
            .iter()
            .map(|l| Voltages {
                v_theta: invert_theta(l.theta0, l.alpha, FRAC_PI_2),
                v_psi: 0.0,
            })
            .collect();
        let u = dev.unitary(&v).unwrap();
        for i in 0..5 {
            assert!((u[(i, i)].norm() - 1.0).abs() < 1e-12);
        }
    }
}
