//! Effective (noise-averaged) density matrices, fixed-M blocks and the
//! quantum Fisher information.
//!
//! All matrices live in the product eigenbasis |n1, n2> of the phase
//! generators, row-major with index i1 * (N2 + 1) + i2 where i = n + N/2.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::Interferometer;
use crate::error::{check_even, Error, Result};
use crate::noise::NoisePair;
use crate::spin::{Axis, SpinOperators, SpinState};
use crate::states::JointState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-8;

/// Default per-interferometer particle limit for dense QFI.
pub const DEFAULT_QFI_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n1: usize,
    n2: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace.
    pub fn new(n1: usize, n2: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_even(n1)?;
        check_even(n2)?;
        let d = (n1 + 1) * (n2 + 1);
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "density matrix needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        let rho = Self { n1, n2, entries };
        for i in 0..d {
            for j in i..d {
                if (rho.get(i, j) - rho.get(j, i).conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidArgument(format!("density matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(tr));
        }
        Ok(rho)
    }

    pub fn from_pure(state: &JointState) -> Self {
        let a = &state.amplitudes;
        let d = a.len();
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            if a[i] == ZERO {
                continue;
            }
            for j in 0..d {
                entries[i * d + j] = a[i] * a[j].conj();
            }
        }
        Self {
            n1: state.n1,
            n2: state.n2,
            entries,
        }
    }

    pub fn maximally_mixed(n1: usize, n2: usize) -> Result<Self> {
        check_even(n1)?;
        check_even(n2)?;
        let d = (n1 + 1) * (n2 + 1);
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Ok(Self { n1, n2, entries })
    }

    pub fn particles(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn dim(&self) -> usize {
        (self.n1 + 1) * (self.n2 + 1)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// (n1, n2) eigenvalues of a basis index.
    pub fn labels(&self, index: usize) -> (i64, i64) {
        let d2 = self.n2 + 1;
        (
            (index / d2) as i64 - (self.n1 / 2) as i64,
            (index % d2) as i64 - (self.n2 / 2) as i64,
        )
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.entries)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Probe pair expressed in the eigenbasis of the interferometer's phase
/// generator (Jy for Mach-Zehnder, Jz for the beam-splitter readout).
pub fn probe_in_generator_basis(probe: &SpinState, interferometer: Interferometer) -> Result<SpinState> {
    match interferometer {
        Interferometer::BeamSplitterZ => Ok(probe.clone()),
        Interferometer::MachZehnderY => {
            let ops = SpinOperators::new(probe.n_particles())?;
            SpinState::normalized(probe.n_particles(), ops.to_eigenbasis(Axis::Y, probe.amplitudes()))
        }
    }
}

/// C(D1, D2) = P+(D1 + D2) P-(D1 - D2) for coherence offsets D_i = n_i - m_i.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceKernel {
    n1: usize,
    n2: usize,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl DecoherenceKernel {
    fn offset(&self) -> i64 {
        (self.n1 + self.n2) as i64
    }

    pub fn value(&self, d1: i64, d2: i64) -> Complex64 {
        let o = self.offset();
        self.plus[(d1 + d2 + o) as usize] * self.minus[(d1 - d2 + o) as usize]
    }

    pub fn particles(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }
}

pub fn decoherence_kernel(noise: &NoisePair, n1: usize, n2: usize) -> Result<DecoherenceKernel> {
    check_even(n1)?;
    check_even(n2)?;
    let kmax = n1 + n2;
    let (plus, minus) = noise.coefficients(kmax.max(1))?;
    let table = |c: &crate::noise::FourierCoefficients| -> Vec<Complex64> {
        (-(kmax as i64)..=kmax as i64).map(|k| c.ptilde(k)).collect()
    };
    Ok(DecoherenceKernel {
        n1,
        n2,
        plus: table(&plus),
        minus: table(&minus),
    })
}

/// Elementwise product of rho with the decoherence kernel.
pub fn effective_density_matrix(rho: &DensityMatrix, kernel: &DecoherenceKernel) -> Result<DensityMatrix> {
    if rho.particles() != kernel.particles() {
        return Err(Error::DimensionMismatch("density matrix and kernel sizes differ".into()));
    }
    let d = rho.dim();
    let mut entries = vec![ZERO; d * d];
    for i in 0..d {
        let (a1, a2) = rho.labels(i);
        for j in 0..d {
            let x = rho.get(i, j);
            if x == ZERO {
                continue;
            }
            let (b1, b2) = rho.labels(j);
            entries[i * d + j] = x * kernel.value(a1 - b1, a2 - b2);
        }
    }
    let out = DensityMatrix {
        n1: rho.n1,
        n2: rho.n2,
        entries,
    };
    let min = out.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockConvention {
    /// M = n1 + n2, invariant under total phase noise.
    Sum,
    /// M = n1 - n2, invariant under relative phase noise.
    Difference,
}

impl BlockConvention {
    pub fn label(self, n1: i64, n2: i64) -> i64 {
        match self {
            Self::Sum => n1 + n2,
            Self::Difference => n1 - n2,
        }
    }
}

/// One fixed-M block: its weight and the normalized restriction of rho.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub m: i64,
    pub weight: f64,
    /// Basis indices spanning the block.
    pub indices: Vec<usize>,
    /// Normalized block, row-major over `indices`; empty when the weight is 0.
    pub rho: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub convention: BlockConvention,
    pub n1: usize,
    pub n2: usize,
    /// Ascending in M.
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn weight(&self, m: i64) -> f64 {
        self.blocks.iter().find(|b| b.m == m).map_or(0.0, |b| b.weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).sum()
    }

    /// 4 sum_M Q_M Var(J1)_M.
    pub fn variance_bound(&self) -> f64 {
        let half = (self.n1 / 2) as i64;
        let d2 = self.n2 + 1;
        4.0 * self
            .blocks
            .iter()
            .filter(|b| b.weight > 0.0)
            .map(|b| {
                let k = b.indices.len();
                let (mut m1, mut m2) = (0.0, 0.0);
                for (r, &i) in b.indices.iter().enumerate() {
                    let p = b.rho[r * k + r].re;
                    let n = ((i / d2) as i64 - half) as f64;
                    m1 += p * n;
                    m2 += p * n * n;
                }
                b.weight * (m2 - m1 * m1)
            })
            .sum::<f64>()
    }
}

pub fn block_decomposition(rho: &DensityMatrix, convention: BlockConvention) -> BlockDecomposition {
    let d = rho.dim();
    let mut groups: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
    for i in 0..d {
        let (a, b) = rho.labels(i);
        groups.entry(convention.label(a, b)).or_default().push(i);
    }
    let blocks = groups
        .into_iter()
        .map(|(m, indices)| {
            let weight: f64 = indices.iter().map(|&i| rho.get(i, i).re).sum();
            let rho_m = if weight > 0.0 {
                indices
                    .iter()
                    .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| rho.get(i, j) / weight)
                    .collect()
            } else {
                Vec::new()
            };
            Block {
                m,
                weight,
                indices,
                rho: rho_m,
            }
        })
        .collect();
    BlockDecomposition {
        convention,
        n1: rho.n1,
        n2: rho.n2,
        blocks,
    }
}

/// Largest |rho_ij| between different fixed-M blocks; zero when rho is an
/// exact mixture of blocks.
pub fn off_block_magnitude(rho: &DensityMatrix, convention: BlockConvention) -> f64 {
    let d = rho.dim();
    let labels: Vec<i64> = (0..d)
        .map(|i| {
            let (a, b) = rho.labels(i);
            convention.label(a, b)
        })
        .collect();
    let mut max = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if labels[i] != labels[j] {
                max = max.max(rho.get(i, j).norm());
            }
        }
    }
    max
}

/// Fixed-M weights of a pure joint state without forming rho.
pub fn pure_block_weights(state: &JointState, convention: BlockConvention) -> Vec<(i64, f64)> {
    let mut w: std::collections::BTreeMap<i64, f64> = Default::default();
    let (h1, h2, d2) = ((state.n1 / 2) as i64, (state.n2 / 2) as i64, state.n2 + 1);
    for (i, a) in state.amplitudes.iter().enumerate() {
        let m = convention.label((i / d2) as i64 - h1, (i % d2) as i64 - h2);
        *w.entry(m).or_default() += a.norm_sqr();
    }
    w.into_iter().collect()
}

/// QFI for the generator J1 (x) 1 from the spectral decomposition of rho.
pub fn qfi_exact(rho: &DensityMatrix) -> Result<f64> {
    qfi_exact_with_limit(rho, DEFAULT_QFI_MAX_N)
}

pub fn qfi_exact_with_limit(rho: &DensityMatrix, max_n: usize) -> Result<f64> {
    let n = rho.n1.max(rho.n2);
    if n > max_n {
        return Err(Error::DimensionGuard { n, limit: max_n });
    }
    let d = rho.dim();
    let eig = rho.to_matrix().symmetric_eigen();
    let p: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let u = &eig.eigenvectors;
    let pmax = p.iter().copied().fold(0.0, f64::max);
    let cutoff = 1e-12 * pmax;
    let gen: Vec<f64> = (0..d).map(|i| rho.labels(i).0 as f64).collect();
    let mut f = 0.0;
    for a in 0..d {
        for b in 0..d {
            let s = p[a] + p[b];
            if s <= cutoff {
                continue;
            }
            let diff = p[a] - p[b];
            if diff == 0.0 {
                continue;
            }
            let mut g = ZERO;
            for k in 0..d {
                g += u[(k, a)].conj() * gen[k] * u[(k, b)];
            }
            f += diff * diff / s * g.norm_sqr();
        }
    }
    Ok(2.0 * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundClass {
    Separable,
    General,
}

/// Upper bound on the QFI of a fixed-M mixture with N particles per side.
pub fn qfi_block_bounds(decomp: &BlockDecomposition, class: BoundClass) -> Result<f64> {
    if decomp.n1 != decomp.n2 {
        return Err(Error::DimensionMismatch("block bounds need equal particle numbers".into()));
    }
    let total = decomp.total_weight();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(total));
    }
    let n = decomp.n1 as i64;
    let nf = n as f64;
    let pair = |m: i64| decomp.weight(m) + decomp.weight(-m);
    Ok(match class {
        BoundClass::General => nf * nf - (1..=n).map(|m| pair(m) * ((2 * n - m) * m) as f64).sum::<f64>(),
        BoundClass::Separable => {
            let first = (0..=n).find(|&m| (n - m) * (n - m) <= n).unwrap_or(n);
            nf - (first.max(1)..=n)
                .map(|m| pair(m) * (nf - ((n - m) * (n - m)) as f64))
                .sum::<f64>()
        }
    })
}

/// Phase uncertainty 1 / sqrt(m F).
pub fn cramer_rao(fisher: f64, repetitions: u64) -> Result<f64> {
    if !(fisher > 0.0) {
        return Err(Error::InvalidArgument(format!("Fisher information must be positive, got {fisher}")));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    Ok(1.0 / (repetitions as f64 * fisher).sqrt())
}
