//! Fock states, permanents, multi-photon transition probabilities and the
//! parameter light cones of matrix elements.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MeshGraph;
use crate::mesh::{cell_positions, Architecture, CellPosition};
use crate::unitary::CMatrix;

/// Largest matrix accepted by [`permanent`].
pub const PERMANENT_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState {
    pub occupations: Vec<usize>,
}

impl FockState {
    pub fn new(occupations: Vec<usize>) -> Self {
        FockState { occupations }
    }

    /// State with one photon in each listed mode (repeats allowed).
    pub fn from_modes(m: usize, modes: &[usize]) -> Result<Self> {
        let mut occ = vec![0; m];
        for &k in modes {
            if k >= m {
                return Err(Error::ModeOutOfRange { mode: k, m });
            }
            occ[k] += 1;
        }
        Ok(FockState { occupations: occ })
    }

    pub fn m(&self) -> usize {
        self.occupations.len()
    }

    pub fn photons(&self) -> usize {
        self.occupations.iter().sum()
    }

    pub fn is_collision_free(&self) -> bool {
        self.occupations.iter().all(|&n| n <= 1)
    }

    /// Occupied modes, each repeated by its occupation.
    pub fn modes(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| std::iter::repeat_n(k, n))
            .collect()
    }

    fn factorial_product(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&n| (1..=n).map(|x| x as f64).product::<f64>())
            .product()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.occupations.iter().join(","))
    }
}

/// All `N`-photon states over `m` modes in lexicographic order of their
/// sorted mode lists.
pub fn enumerate_states(m: usize, n: usize, collision_free: bool) -> Result<Vec<FockState>> {
    if n == 0 {
        return Err(Error::InvalidArgument("photon number must be >= 1".into()));
    }
    if collision_free && n > m {
        return Err(Error::InvalidArgument(format!(
            "cannot place {n} photons in {m} modes without collisions"
        )));
    }
    let to_state = |modes: Vec<usize>| FockState::from_modes(m, &modes).expect("modes < m");
    Ok(if collision_free {
        (0..m).combinations(n).map(to_state).collect()
    } else {
        (0..m).combinations_with_replacement(n).map(to_state).collect()
    })
}

/// Ryser's formula with Gray-code subset updates, `O(2^n n)`.
pub fn permanent(a: &CMatrix) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "permanent needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n > PERMANENT_CAP {
        return Err(Error::TooLarge {
            what: "permanent",
            size: n,
            cap: PERMANENT_CAP,
        });
    }
    match n {
        0 => return Ok(Complex64::new(1.0, 0.0)),
        1 => return Ok(a[(0, 0)]),
        2 => return Ok(a[(0, 0)] * a[(1, 1)] + a[(0, 1)] * a[(1, 0)]),
        _ => {}
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += a[(i, col)];
            } else {
                *s -= a[(i, col)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if next.count_ones() % 2 == n as u32 % 2 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// `|perm(U[w, v])|^2 / (prod v_i! prod w_i!)`, with rows taken from the
/// output state and columns from the input state.
pub fn transition_probability(u: &CMatrix, v: &FockState, w: &FockState) -> Result<f64> {
    let m = u.nrows();
    if v.m() != m || w.m() != m {
        return Err(Error::InvalidArgument(format!(
            "states of {} and {} modes do not fit a {m}-mode unitary",
            v.m(),
            w.m()
        )));
    }
    if v.photons() != w.photons() {
        return Err(Error::PhotonMismatch {
            input: v.photons(),
            output: w.photons(),
        });
    }
    let rows = w.modes();
    let cols = v.modes();
    let sub = CMatrix::from_fn(rows.len(), cols.len(), |a, b| u[(rows[a], cols[b])]);
    let p = permanent(&sub)?.norm_sqr();
    Ok(p / (v.factorial_product() * w.factorial_product()))
}

/// Probabilities `p[v][w]` between two state lists.
pub fn transition_matrix(u: &CMatrix, inputs: &[FockState], outputs: &[FockState]) -> Result<Vec<Vec<f64>>> {
    inputs
        .iter()
        .map(|v| outputs.iter().map(|w| transition_probability(u, v, w)).collect())
        .collect()
}

/// Output distribution of input `v` over the full (collision-allowing)
/// `N`-photon space.
pub fn output_distribution(u: &CMatrix, v: &FockState) -> Result<Vec<(FockState, f64)>> {
    enumerate_states(u.nrows(), v.photons(), false)?
        .into_iter()
        .map(|w| {
            let p = transition_probability(u, v, &w)?;
            Ok((w, p))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Psi,
    Theta,
}

/// Internal phases are numbered `2 * cell + {0: psi, 1: theta}` over the
/// `(layer, row)`-sorted cells; output phase `i` has id `m(m-1) + i`.
pub fn param_id(cell_index: usize, kind: PhaseKind) -> usize {
    2 * cell_index + kind as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ParamLabel {
    Internal {
        layer: usize,
        row: usize,
        phase: PhaseKind,
    },
    Output {
        mode: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencySets {
    pub m: usize,
    pub architecture: Architecture,
    pub cells: Vec<CellPosition>,
    /// `elements[i][j]`: sorted parameter ids that `u_ij` depends on,
    /// including the output phase of row `i`.
    pub elements: Vec<Vec<Vec<usize>>>,
}

impl DependencySets {
    pub fn internal_count(&self) -> usize {
        self.m * (self.m - 1)
    }

    pub fn is_internal(&self, id: usize) -> bool {
        id < self.internal_count()
    }

    pub fn label(&self, id: usize) -> ParamLabel {
        if self.is_internal(id) {
            let c = self.cells[id / 2];
            ParamLabel::Internal {
                layer: c.layer,
                row: c.row,
                phase: if id % 2 == 0 { PhaseKind::Psi } else { PhaseKind::Theta },
            }
        } else {
            ParamLabel::Output {
                mode: id - self.internal_count(),
            }
        }
    }

    pub fn element(&self, output: usize, input: usize) -> &[usize] {
        &self.elements[output][input]
    }

    /// Internal phase ids of `u_ij`.
    pub fn internal(&self, output: usize, input: usize) -> impl Iterator<Item = usize> + '_ {
        let cut = self.internal_count();
        self.elements[output][input].iter().copied().filter(move |&k| k < cut)
    }

    /// `{xi}_vw`: the union over `i in w, j in v`.
    pub fn for_states(&self, v: &FockState, w: &FockState, include_output: bool) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for i in w.modes() {
            for j in v.modes() {
                for &k in &self.elements[i][j] {
                    if include_output || self.is_internal(k) {
                        set.insert(k);
                    }
                }
            }
        }
        set.into_iter().collect()
    }

    /// `|{xi}_ij|` over internal phases, indexed `[output][input]`.
    pub fn parameter_counts(&self) -> Vec<Vec<usize>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.internal(i, j).count()).collect())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Entry<'a> {
            output: usize,
            input: usize,
            params: &'a [usize],
        }
        #[derive(Serialize)]
        struct Out<'a> {
            m: usize,
            architecture: Architecture,
            parameters: Vec<(usize, ParamLabel)>,
            elements: Vec<Entry<'a>>,
        }
        let n = self.internal_count() + self.m;
        let out = Out {
            m: self.m,
            architecture: self.architecture,
            parameters: (0..n).map(|k| (k, self.label(k))).collect(),
            elements: (0..self.m)
                .flat_map(|i| {
                    (0..self.m).map(move |j| Entry {
                        output: i,
                        input: j,
                        params: &self.elements[i][j],
                    })
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&out)?)
    }
}

/// Parameters reachable on some input-`j` to output-`i` path.
pub fn dependency_sets(m: usize, architecture: Architecture) -> Result<DependencySets> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("m must be >= 2, got {m}")));
    }
    let g = MeshGraph::new(m, architecture)?;
    let internal = m * (m - 1);
    let elements = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut ids: Vec<usize> = g
                        .mz_nodes()
                        .filter(|&n| g.on_path(n, j, i))
                        .flat_map(|n| {
                            let c = g.cell_index(n).expect("mz node");
                            [param_id(c, PhaseKind::Psi), param_id(c, PhaseKind::Theta)]
                        })
                        .collect();
                    ids.push(internal + i);
                    ids
                })
                .collect()
        })
        .collect();
    Ok(DependencySets {
        m,
        architecture,
        cells: cell_positions(m, architecture),
        elements,
    })
}
