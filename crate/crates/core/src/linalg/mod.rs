//! Dense complex matrices on a bipartite space `C^d ⊗ C^d`, their index
//! rearrangements, polar projection and random sampling.
//!
//! Row and column index `(i, α)` of a `d² × d²` matrix linearizes as `i·d + α`.

mod io;
mod random;

pub use io::{format_matrix, parse_matrix, read_matrix, write_matrix};
pub use random::{
    haar_state, sample_cue, sample_diagonal, sample_local_dressing, LocalDressing, RngStream,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Realign {
    R1,
    #[default]
    R2,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartialTranspose {
    Gamma1,
    #[default]
    Gamma2,
}

/// Local dimension `d` of a square `d² × d²` matrix.
pub fn local_dim(m: &ComplexMatrix) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::Dimension(format!("expected a square matrix, got {r}x{c}")));
    }
    let d = (r as f64).sqrt().round() as usize;
    if d < 2 || d * d != r {
        return Err(Error::Dimension(format!(
            "size {r} is not d^2 for an integer d >= 2"
        )));
    }
    Ok(d)
}

fn rearrange(m: &ComplexMatrix, f: impl Fn(usize, usize, usize, usize) -> (usize, usize)) -> Result<ComplexMatrix> {
    let d = local_dim(m)?;
    let n = d * d;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for a in 0..d {
            for j in 0..d {
                for b in 0..d {
                    let (r, c) = f(i, a, j, b);
                    out[(r, c)] = m[(i * d + a, j * d + b)];
                }
            }
        }
    }
    Ok(out)
}

/// Realignment. `R2`: `out[(i,j),(α,β)] = M[(i,α),(j,β)]`;
/// `R1`: `out[(β,α),(j,i)] = M[(i,α),(j,β)]`.
pub fn realign(m: &ComplexMatrix, variant: Realign) -> Result<ComplexMatrix> {
    let d = local_dim(m)?;
    match variant {
        Realign::R2 => rearrange(m, |i, a, j, b| (i * d + j, a * d + b)),
        Realign::R1 => rearrange(m, |i, a, j, b| (b * d + a, j * d + i)),
    }
}

/// Partial transpose. `Gamma2` transposes the second factor,
/// `out[(i,β),(j,α)] = M[(i,α),(j,β)]`; `Gamma1` transposes the first.
pub fn partial_transpose(m: &ComplexMatrix, variant: PartialTranspose) -> Result<ComplexMatrix> {
    let d = local_dim(m)?;
    match variant {
        PartialTranspose::Gamma2 => rearrange(m, |i, a, j, b| (i * d + b, j * d + a)),
        PartialTranspose::Gamma1 => rearrange(m, |i, a, j, b| (j * d + a, i * d + b)),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Nearest unitary `W·V†` from the SVD `M = W·Σ·V†`.
///
/// Fails with [`Error::RankDeficient`] when `σ_min / σ_max < min_sv_tol`.
pub fn polar_unitary(m: &ComplexMatrix, min_sv_tol: f64) -> Result<ComplexMatrix> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::Dimension(format!("polar decomposition needs a square matrix, got {r}x{c}")));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rel = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(rel >= min_sv_tol) {
        return Err(Error::RankDeficient { sigma_min: rel, tol: min_sv_tol });
    }
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    Ok(w * v_t)
}

/// `‖M†M − I‖_F`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.ncols();
    let mut g = m.adjoint() * m;
    for k in 0..n {
        g[(k, k)] -= ONE;
    }
    g.norm()
}

/// `min_φ ‖A − e^{iφ}B‖_F`.
pub fn phase_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - align_phase(a, b)).norm()
}

/// `B` multiplied by the global phase that brings it closest to `A`.
pub fn align_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let t = b.dotc(a);
    if t.norm() == 0.0 {
        return b.clone();
    }
    b * (t / t.norm())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// The swap gate on `C^d ⊗ C^d`.
pub fn swap(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = ONE;
        }
    }
    s
}

/// Real-entry convenience constructor, row-major.
pub fn from_real_rows(n_rows: usize, n_cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), n_rows * n_cols);
    ComplexMatrix::from_row_iterator(n_rows, n_cols, entries.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn diagonal(phases: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(phases))
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

/// A unitary operator on `C^d ⊗ C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteUnitary {
    d: usize,
    matrix: ComplexMatrix,
}

impl BipartiteUnitary {
    /// Wraps `matrix` after checking shape, finiteness and unitarity against `tol`.
    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let d = local_dim(&matrix)?;
        check_finite(&matrix)?;
        let defect = unitarity_defect(&matrix);
        if !(defect <= tol) {
            return Err(Error::NotUnitary { defect, tol });
        }
        Ok(Self { d, matrix })
    }

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::default().unitarity)
    }

    /// Skips the unitarity check. The shape must still be `d² × d²`.
    pub fn new_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        let d = local_dim(&matrix)?;
        Ok(Self { d, matrix })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn realigned(&self) -> ComplexMatrix {
        realign(&self.matrix, Realign::R2).expect("shape checked at construction")
    }

    pub fn partial_transposed(&self) -> ComplexMatrix {
        partial_transpose(&self.matrix, PartialTranspose::Gamma2).expect("shape checked at construction")
    }

    pub fn swap_gate(d: usize) -> Self {
        Self { d, matrix: swap(d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { d, matrix: identity(d * d) }
    }

    /// `U·S`.
    pub fn times_swap(&self) -> Self {
        Self { d: self.d, matrix: &self.matrix * swap(self.d) }
    }

    /// `S·U`.
    pub fn swap_times(&self) -> Self {
        Self { d: self.d, matrix: swap(self.d) * &self.matrix }
    }
}
