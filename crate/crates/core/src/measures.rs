//! Operator entanglement, entangling power, gate typicality and duality flags.

use serde::{Deserialize, Serialize};

use crate::linalg::{singular_values, swap, unitarity_defect, BipartiteUnitary, ComplexMatrix};

/// Squared singular values of `U^R`, descending. They sum to `d²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub e_op: f64,
    pub e_op_swapped: f64,
    pub ep: f64,
    pub gt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityFlags {
    pub dual: bool,
    pub t_dual: bool,
    pub two_unitary: bool,
    pub self_dual: bool,
    pub dual_defect: f64,
    pub t_dual_defect: f64,
    pub self_dual_defect: f64,
}

impl DualityFlags {
    pub fn from_defects(dual_defect: f64, t_dual_defect: f64, self_dual_defect: f64, tol: f64) -> Self {
        let dual = dual_defect <= tol;
        let t_dual = t_dual_defect <= tol;
        Self {
            dual,
            t_dual,
            two_unitary: dual && t_dual,
            self_dual: self_dual_defect <= tol,
            dual_defect,
            t_dual_defect,
            self_dual_defect,
        }
    }

    /// Short human label: `2-unitary`, `dual`, `T-dual` or `generic`.
    pub fn label(&self) -> &'static str {
        match (self.dual, self.t_dual) {
            (true, true) => "2-unitary",
            (true, false) => "dual",
            (false, true) => "T-dual",
            (false, false) => "generic",
        }
    }
}

pub fn schmidt_spectrum(u: &BipartiteUnitary) -> SchmidtSpectrum {
    let values = singular_values(&u.realigned()).into_iter().map(|s| s * s).collect();
    SchmidtSpectrum { values }
}

/// `Tr[(A A†)²] / d⁴`.
fn purity_term(a: &ComplexMatrix, d: usize) -> f64 {
    let g = a * a.adjoint();
    g.norm_squared() / (d as f64).powi(4)
}

/// `E(S) = 1 − 1/d²`.
pub fn swap_entanglement(d: usize) -> f64 {
    1.0 - 1.0 / (d * d) as f64
}

/// `E(U) = 1 − Tr[(U^R U^R†)²]/d⁴`.
pub fn operator_entanglement(u: &BipartiteUnitary) -> f64 {
    1.0 - purity_term(&u.realigned(), u.d())
}

/// `E(US) = 1 − Tr[(U^Γ U^Γ†)²]/d⁴`.
pub fn swapped_entanglement(u: &BipartiteUnitary) -> f64 {
    1.0 - purity_term(&u.partial_transposed(), u.d())
}

/// Measures from the two operator entanglements of a gate with local dimension `d`.
pub fn measures_from_entanglements(d: usize, e_op: f64, e_op_swapped: f64) -> MeasureSet {
    let es = swap_entanglement(d);
    MeasureSet {
        e_op,
        e_op_swapped,
        ep: (e_op + e_op_swapped - es) / es,
        gt: (e_op - e_op_swapped + es) / (2.0 * es),
    }
}

pub fn measure_set(u: &BipartiteUnitary) -> MeasureSet {
    measures_from_entanglements(u.d(), operator_entanglement(u), swapped_entanglement(u))
}

pub fn entangling_power(u: &BipartiteUnitary) -> f64 {
    measure_set(u).ep
}

pub fn gate_typicality(u: &BipartiteUnitary) -> f64 {
    measure_set(u).gt
}

pub fn classify_duality(u: &BipartiteUnitary, tol: f64) -> DualityFlags {
    let r = u.realigned();
    let g = u.partial_transposed();
    DualityFlags::from_defects(
        unitarity_defect(&r),
        unitarity_defect(&g),
        (&r - u.matrix()).norm(),
        tol,
    )
}

/// `U·S` as a gate; `ep` is invariant under this move.
pub fn with_swap(u: &BipartiteUnitary) -> BipartiteUnitary {
    BipartiteUnitary::new_unchecked(u.matrix() * swap(u.d())).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, identity};
    use approx::assert_abs_diff_eq;

    fn gate(m: ComplexMatrix) -> BipartiteUnitary {
        BipartiteUnitary::new(m).unwrap()
    }

    fn cnot() -> BipartiteUnitary {
        gate(from_real_rows(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]))
    }

    #[test]
    fn swap_measures() {
        for d in 2..=5 {
            let s = BipartiteUnitary::swap_gate(d);
            assert_abs_diff_eq!(operator_entanglement(&s), swap_entanglement(d), epsilon = 1e-12);
            assert_abs_diff_eq!(swapped_entanglement(&s), 0.0, epsilon = 1e-12);
        }
        let m = measure_set(&BipartiteUnitary::swap_gate(2));
        assert_abs_diff_eq!(m.e_op, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m.ep, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.gt, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_measures() {
        let i = gate(identity(4));
        for (x, e) in schmidt_spectrum(&i).values.iter().zip([4.0, 0.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(operator_entanglement(&i), 0.0, epsilon = 1e-15);
        let f = classify_duality(&i, 1e-8);
        assert!(!f.dual && f.t_dual && !f.two_unitary);
    }

    #[test]
    fn cnot_entangling_power() {
        assert_abs_diff_eq!(entangling_power(&cnot()), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn swap_flags() {
        let f = classify_duality(&BipartiteUnitary::swap_gate(2), 1e-8);
        assert!(f.dual && !f.t_dual && f.self_dual && !f.two_unitary);
        assert_eq!(f.label(), "dual");
    }

    #[test]
    fn schmidt_sum_and_swap_side() {
        let s = schmidt_spectrum(&BipartiteUnitary::swap_gate(2));
        for x in &s.values {
            assert_abs_diff_eq!(*x, 1.0, epsilon = 1e-12);
        }
        let c = schmidt_spectrum(&cnot());
        assert_abs_diff_eq!(c.values.iter().sum::<f64>(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entangling_power(&with_swap(&cnot())), 2.0 / 3.0, epsilon = 1e-12);
    }
}
