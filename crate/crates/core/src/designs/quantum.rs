use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteUnitary, ComplexMatrix, C64};

use super::permutation::render_grid;

/// The arrays 𝒦 and 𝓛 of a gate whose columns are product states
/// `U|ij⟩ = |α_ij⟩ ⊗ |β_ij⟩`.
#[derive(Clone, Debug)]
pub struct QuantumDesign {
    pub d: usize,
    /// `k_side[i][j] = α_ij`.
    pub k_side: Vec<Vec<DVector<C64>>>,
    /// `l_side[i][j] = β_ij`.
    pub l_side: Vec<Vec<DVector<C64>>>,
    pub cardinalities: (usize, usize),
    /// Overlap threshold used for cardinality counting.
    pub identity_threshold: f64,
    /// Every 𝒦 row and every 𝓛 column is an orthonormal basis.
    pub dual: bool,
}

/// The `d × d` blocks `X_ij` of `U = Σ |i⟩⟨j| ⊗ X_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub blocks: Vec<Vec<ComplexMatrix>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDefects {
    pub unitary_defect: f64,
    pub dual_defect: f64,
    pub t_dual_defect: f64,
}

/// Coefficient matrix `C[a][b] = ⟨ab|U|ij⟩` of column `(i, j)`.
fn column_coefficients(u: &BipartiteUnitary, col: usize) -> ComplexMatrix {
    let d = u.d();
    ComplexMatrix::from_fn(d, d, |a, b| u.matrix()[(a * d + b, col)])
}

fn linear_entropy_of(c: &ComplexMatrix) -> f64 {
    let rho = c * c.adjoint();
    let tr = rho.trace().re;
    if tr <= 0.0 {
        return 0.0;
    }
    1.0 - (rho.norm_squared()) / (tr * tr)
}

/// Linear entropy of the first-factor reduced state of every column `U|ij⟩`.
pub fn column_entanglements(u: &BipartiteUnitary) -> Vec<f64> {
    (0..u.d() * u.d()).map(|c| linear_entropy_of(&column_coefficients(u, c)).max(0.0)).collect()
}

/// Rotates `v` so its first non-negligible component is real positive; returns the phase removed.
fn gauge(v: &mut DVector<C64>) -> C64 {
    let lead = v.iter().copied().find(|z| z.norm() > 1e-9).unwrap_or(C64::new(1.0, 0.0));
    let ph = lead / lead.norm();
    *v /= ph;
    ph
}

fn same_up_to_phase(a: &DVector<C64>, b: &DVector<C64>, threshold: f64) -> bool {
    a.dotc(b).norm() >= threshold
}

/// Number of vectors distinct up to a global phase.
pub fn cardinality(vectors: &[&DVector<C64>], threshold: f64) -> usize {
    let mut reps: Vec<&DVector<C64>> = Vec::new();
    for v in vectors {
        if !reps.iter().any(|r| same_up_to_phase(r, v, threshold)) {
            reps.push(v);
        }
    }
    reps.len()
}

fn orthonormal(vs: &[&DVector<C64>], tol: f64) -> bool {
    for (a, x) in vs.iter().enumerate() {
        for (b, y) in vs.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            if (x.dotc(y) - C64::new(want, 0.0)).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Factors each column of `U` into a product vector and fills 𝒦, 𝓛.
pub fn extract_quantum_design(u: &BipartiteUnitary, product_tol: f64) -> Result<QuantumDesign> {
    let d = u.d();
    let ents = column_entanglements(u);
    let bad: Vec<(usize, usize)> = ents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > product_tol)
        .map(|(c, _)| (c / d, c % d))
        .collect();
    if !bad.is_empty() {
        return Err(Error::EntangledColumn(bad));
    }
    let mut k_side = vec![Vec::with_capacity(d); d];
    let mut l_side = vec![Vec::with_capacity(d); d];
    for i in 0..d {
        for j in 0..d {
            let c = column_coefficients(u, i * d + j);
            let svd = c.svd(true, true);
            let (mut top, mut smax) = (0, f64::MIN);
            for (k, &s) in svd.singular_values.iter().enumerate() {
                if s > smax {
                    smax = s;
                    top = k;
                }
            }
            let w = svd.u.as_ref().expect("requested");
            let vt = svd.v_t.as_ref().expect("requested");
            let mut alpha: DVector<C64> = w.column(top).into_owned();
            // C ≈ σ u v†, so the second factor has components of the row of v†.
            let mut beta: DVector<C64> = DVector::from_iterator(d, vt.row(top).iter().map(|z| *z * smax));
            let ph = gauge(&mut alpha);
            beta *= ph;
            let nb = beta.norm();
            beta /= C64::new(nb, 0.0);
            k_side[i].push(alpha);
            l_side[i].push(beta);
        }
    }
    let threshold = 1.0 - 1e-8;
    let ks: Vec<&DVector<C64>> = k_side.iter().flatten().collect();
    let ls: Vec<&DVector<C64>> = l_side.iter().flatten().collect();
    let cardinalities = (cardinality(&ks, threshold), cardinality(&ls, threshold));
    let rows_ok = (0..d).all(|i| orthonormal(&k_side[i].iter().collect::<Vec<_>>(), 1e-8));
    let cols_ok = (0..d).all(|j| orthonormal(&(0..d).map(|i| &l_side[i][j]).collect::<Vec<_>>(), 1e-8));
    Ok(QuantumDesign { d, k_side, l_side, cardinalities, identity_threshold: threshold, dual: rows_ok && cols_ok })
}

fn format_complex(z: C64) -> String {
    let r = if z.re.abs() < 1e-12 { 0.0 } else { z.re };
    let i = if z.im.abs() < 1e-12 { 0.0 } else { z.im };
    if i == 0.0 {
        format!("{r:.4}")
    } else {
        format!("{r:.4}{i:+.4}i")
    }
}

fn format_vector(v: &DVector<C64>) -> String {
    let parts: Vec<String> = v.iter().map(|z| format_complex(*z)).collect();
    format!("({})", parts.join(", "))
}

impl QuantumDesign {
    /// Both arrays as boxed grids with cardinality lines.
    pub fn render(&self) -> String {
        let grid = |side: &Vec<Vec<DVector<C64>>>| {
            render_grid(&side.iter().map(|row| row.iter().map(format_vector).collect()).collect::<Vec<Vec<String>>>())
        };
        let mut s = String::new();
        writeln!(s, "K (cardinality {}):", self.cardinalities.0).unwrap();
        s.push_str(&grid(&self.k_side));
        writeln!(s, "L (cardinality {}):", self.cardinalities.1).unwrap();
        s.push_str(&grid(&self.l_side));
        writeln!(s, "identity threshold on |<a|b>|: {}", self.identity_threshold).unwrap();
        writeln!(s, "dual (K rows and L columns orthonormal): {}", self.dual).unwrap();
        s
    }
}

pub fn block_decomposition(u: &ComplexMatrix, d: usize) -> BlockDecomposition {
    let blocks = (0..d)
        .map(|i| (0..d).map(|j| u.view((i * d, j * d), (d, d)).into_owned()).collect())
        .collect();
    BlockDecomposition { blocks }
}

impl BlockDecomposition {
    pub fn reassemble(&self) -> ComplexMatrix {
        let d = self.blocks.len();
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m.view_mut((i * d, j * d), (d, d)).copy_from(&self.blocks[i][j]);
            }
        }
        m
    }
}

/// The three block conditions: unitarity, orthonormal operator basis, and
/// the partially transposed unitarity.
pub fn block_2unitary_conditions(u: &BipartiteUnitary) -> BlockDefects {
    let d = u.d();
    let x = block_decomposition(u.matrix(), d).blocks;
    let id = ComplexMatrix::identity(d, d);
    let mut d1 = 0.0f64;
    let mut d3 = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let mut s1 = ComplexMatrix::zeros(d, d);
            let mut s3 = ComplexMatrix::zeros(d, d);
            for t in 0..d {
                s1 += &x[a][t] * x[b][t].adjoint();
                s3 += &x[t][a] * x[t][b].adjoint();
            }
            if a == b {
                s1 -= &id;
                s3 -= &id;
            }
            d1 = d1.max(s1.norm());
            d3 = d3.max(s3.norm());
        }
    }
    let mut d2 = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let ip = x[k][l].dotc(&x[i][j]);
                    let want = if i == k && j == l { 1.0 } else { 0.0 };
                    d2 = d2.max((ip - C64::new(want, 0.0)).norm());
                }
            }
        }
    }
    BlockDefects { unitary_defect: d1, dual_defect: d2, t_dual_defect: d3 }
}

/// Normalized four-party coefficients `T[i][j][k][l] = U[(i,j),(k,l)] / d`.
#[derive(Clone, Debug)]
pub struct AmeCoefficients {
    pub d: usize,
    /// Row-major over `(i, j, k, l)`.
    pub values: Vec<C64>,
}

impl AmeCoefficients {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let d = self.d;
        self.values[((i * d + j) * d + k) * d + l]
    }

    fn cut_purity(&self, f: impl Fn(usize, usize, usize, usize) -> (usize, usize)) -> f64 {
        let d = self.d;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let (r, c) = f(i, j, k, l);
                        m[(r, c)] = self.get(i, j, k, l);
                    }
                }
            }
        }
        let rho = &m * m.adjoint();
        (&rho * &rho).trace().re
    }

    /// Purities of the reduced states for the cuts `AB|CD`, `AC|BD`, `AD|BC`.
    pub fn purities(&self) -> [f64; 3] {
        let d = self.d;
        [
            self.cut_purity(|i, j, k, l| (i * d + j, k * d + l)),
            self.cut_purity(|i, j, k, l| (i * d + k, j * d + l)),
            self.cut_purity(|i, j, k, l| (i * d + l, j * d + k)),
        ]
    }

    /// `i j k l re im` lines, zero-based indices, nonzero entries only.
    pub fn export(&self) -> String {
        let d = self.d;
        let mut s = String::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let z = self.get(i, j, k, l);
                        if z.norm() > 1e-15 {
                            writeln!(s, "{i} {j} {k} {l} {:.16e} {:.16e}", z.re, z.im).unwrap();
                        }
                    }
                }
            }
        }
        s
    }
}

pub fn ame_coefficients(u: &BipartiteUnitary) -> AmeCoefficients {
    let d = u.d();
    let n = d * d;
    let scale = 1.0 / d as f64;
    let mut values = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            values.push(u.matrix()[(r, c)] * scale);
        }
    }
    AmeCoefficients { d, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::catalog::named_gate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cardinalities_of_catalog_designs() {
        let q = extract_quantum_design(&named_gate("u9").unwrap(), 1e-8).unwrap();
        assert_eq!(q.cardinalities, (5, 5));
        assert!(q.dual);
        let p = extract_quantum_design(&named_gate("p9").unwrap(), 1e-8).unwrap();
        assert_eq!(p.cardinalities, (3, 3));
        assert!(p.dual);
        match extract_quantum_design(&named_gate("o16").unwrap(), 1e-8) {
            Err(Error::EntangledColumn(cols)) => assert_eq!(cols.len(), 16),
            other => panic!("expected entangled columns, got {other:?}"),
        }
    }

    #[test]
    fn identity_design_is_not_dual() {
        let q = extract_quantum_design(&BipartiteUnitary::identity(3), 1e-8).unwrap();
        assert!(!q.dual);
        assert_eq!(q.cardinalities, (3, 3));
    }

    #[test]
    fn block_conditions() {
        let b = block_2unitary_conditions(&named_gate("p9").unwrap());
        assert!(b.unitary_defect < 1e-12 && b.dual_defect < 1e-12 && b.t_dual_defect < 1e-12);
        let b = block_2unitary_conditions(&named_gate("o16").unwrap());
        assert!(b.unitary_defect < 1e-12 && b.dual_defect < 1e-12 && b.t_dual_defect < 1e-12);
        let b = block_2unitary_conditions(&BipartiteUnitary::identity(3));
        assert!(b.unitary_defect < 1e-12 && b.dual_defect > 0.5 && b.t_dual_defect < 1e-12);
        let u = named_gate("u9").unwrap();
        assert_eq!(block_decomposition(u.matrix(), 3).reassemble(), *u.matrix());
    }

    #[test]
    fn ame_purities() {
        let swap = ame_coefficients(&BipartiteUnitary::swap_gate(2)).purities();
        assert_abs_diff_eq!(swap[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(swap[1], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(swap[2], 1.0, epsilon = 1e-12);
        for p in ame_coefficients(&named_gate("p9").unwrap()).purities() {
            assert_abs_diff_eq!(p, 1.0 / 9.0, epsilon = 1e-12);
        }
        let o = ame_coefficients(&named_gate("o16").unwrap());
        let nonzero = o.values.iter().filter(|z| z.norm() > 1e-12).count();
        assert_eq!(nonzero, 64);
        assert!(o.values.iter().all(|z| z.norm() < 1e-12 || (z.norm() * 4.0 - 0.5).abs() < 1e-12));
        let total: f64 = o.values.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert_eq!(o.export().lines().count(), 64);
    }

    #[test]
    fn column_entanglement_patterns() {
        assert!(column_entanglements(&BipartiteUnitary::swap_gate(2)).iter().all(|&e| e.abs() < 1e-14));
        assert!(column_entanglements(&named_gate("o16").unwrap()).iter().all(|&e| e > 0.5));
        let u9 = column_entanglements(&named_gate("u9").unwrap());
        assert!(u9.iter().all(|&e| e.abs() < 1e-12));
    }
}
