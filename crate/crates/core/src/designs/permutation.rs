use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteUnitary, ComplexMatrix, ONE};
use crate::measures::{measures_from_entanglements, DualityFlags, MeasureSet};

/// Permutation gate on `C^d ⊗ C^d` in compact form: row `r` has its single
/// nonzero entry in column `images[r]` (stored zero-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermutationGate {
    d: usize,
    images: Vec<u8>,
}

/// A `d × d` table of one-based symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignTable {
    pub entries: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatinMode {
    Row,
    Col,
    Full,
}

impl PermutationGate {
    /// From zero-based images.
    pub fn new(d: usize, images: Vec<usize>) -> Result<Self> {
        let n = d * d;
        if d < 2 || images.len() != n {
            return Err(Error::InvalidPermutation(format!("expected {n} images for d = {d}, got {}", images.len())));
        }
        if n > 256 {
            return Err(Error::InvalidPermutation("d^2 must not exceed 256".into()));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!("{:?} is not a bijection", images)));
            }
            seen[x] = true;
        }
        Ok(Self { d, images: images.into_iter().map(|x| x as u8).collect() })
    }

    /// From one-based images, the notation used in files and tables.
    pub fn from_one_based(d: usize, images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation("images are one-based".into()));
        }
        Self::new(d, images.iter().map(|x| x - 1).collect())
    }

    /// Reads one line of whitespace-separated one-based images; `d` is inferred.
    pub fn parse(text: &str) -> Result<Self> {
        let imgs: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.trim_matches(|c| c == ',' || c == '{' || c == '}').parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: 1, msg: format!("bad permutation entry: {e}") })?;
        let d = (imgs.len() as f64).sqrt().round() as usize;
        if d * d != imgs.len() {
            return Err(Error::InvalidPermutation(format!("length {} is not a square", imgs.len())));
        }
        Self::from_one_based(d, &imgs)
    }

    pub fn identity(d: usize) -> Self {
        Self::new(d, (0..d * d).collect()).unwrap()
    }

    pub fn swap(d: usize) -> Self {
        Self::new(d, (0..d * d).map(|r| (r % d) * d + r / d).collect()).unwrap()
    }

    /// `p1 ⊗ p2` for permutations of `0..d` given as image lists.
    pub fn local(p1: &[usize], p2: &[usize]) -> Self {
        let d = p1.len();
        Self::new(d, (0..d * d).map(|r| p1[r / d] * d + p2[r % d]).collect()).unwrap()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn image(&self, r: usize) -> usize {
        self.images[r] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.images.len()];
        for (r, &c) in self.images.iter().enumerate() {
            inv[c as usize] = r as u8;
        }
        Self { d: self.d, images: inv }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        let images = self.images.iter().map(|&k| other.images[k as usize]).collect();
        Self { d: self.d, images }
    }

    /// Transposition of two rows.
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        self.images.swap(a, b);
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.images.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (r, &c) in self.images.iter().enumerate() {
            m[(r, c as usize)] = ONE;
        }
        m
    }

    pub fn to_unitary(&self) -> BipartiteUnitary {
        BipartiteUnitary::new_unchecked(self.to_matrix()).expect("d^2 x d^2 by construction")
    }

    /// Recovers a permutation from a 0/1 matrix, if it is one.
    pub fn from_matrix(m: &ComplexMatrix, tol: f64) -> Option<Self> {
        let n = m.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if m.ncols() != n || d * d != n {
            return None;
        }
        let mut images = Vec::with_capacity(n);
        for r in 0..n {
            let mut hit = None;
            for c in 0..n {
                let z = m[(r, c)];
                if (z - ONE).norm() <= tol {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(c);
                } else if z.norm() > tol {
                    return None;
                }
            }
            images.push(hit?);
        }
        Self::new(d, images).ok()
    }

    /// Packed key, unique per permutation for `d² ≤ 25`.
    pub fn key(&self) -> u128 {
        let mut k = 0u128;
        for &x in &self.images {
            k = (k << 5) | x as u128;
        }
        k
    }

    /// `K[i][j]`, `L[i][j]`: one-based digits of where `|ij⟩` is sent.
    pub fn kl_tables(&self) -> (DesignTable, DesignTable) {
        let d = self.d;
        let inv = self.inverse();
        let mut k = vec![vec![0; d]; d];
        let mut l = vec![vec![0; d]; d];
        for i in 0..d {
            for j in 0..d {
                let t = inv.image(i * d + j);
                k[i][j] = t / d + 1;
                l[i][j] = t % d + 1;
            }
        }
        (DesignTable { entries: k }, DesignTable { entries: l })
    }

    /// Partial transpose and realignment as 0/1 row bitmasks.
    fn rearranged_rows(&self) -> (Vec<u32>, Vec<u32>) {
        let d = self.d;
        let n = d * d;
        let mut r = vec![0u32; n];
        let mut g = vec![0u32; n];
        for (row, &col) in self.images.iter().enumerate() {
            let (i, a) = (row / d, row % d);
            let col = col as usize;
            let (j, b) = (col / d, col % d);
            r[i * d + j] |= 1 << (a * d + b);
            g[i * d + b] |= 1 << (j * d + a);
        }
        (r, g)
    }

    /// Entanglement measures computed exactly on the 0/1 rearrangements.
    pub fn measures(&self) -> MeasureSet {
        let d = self.d;
        assert!(d * d <= 32, "fast permutation measures need d <= 5");
        let (r, g) = self.rearranged_rows();
        let d4 = (d as f64).powi(4);
        let e_op = 1.0 - gram_square_sum(&r) as f64 / d4;
        let e_sw = 1.0 - gram_square_sum(&g) as f64 / d4;
        measures_from_entanglements(d, e_op, e_sw)
    }

    /// Duality flags from the 0/1 rearrangements; defects are exact.
    pub fn duality_flags(&self, tol: f64) -> DualityFlags {
        assert!(self.d * self.d <= 32, "fast permutation flags need d <= 5");
        let (r, g) = self.rearranged_rows();
        let mut own = vec![0u32; self.images.len()];
        for (row, &c) in self.images.iter().enumerate() {
            own[row] = 1 << c;
        }
        let self_diff: u32 = r.iter().zip(&own).map(|(a, b)| (a ^ b).count_ones()).sum();
        DualityFlags::from_defects(
            gram_defect(&r),
            gram_defect(&g),
            (self_diff as f64).sqrt(),
            tol,
        )
    }

    /// Integer numerators `(a, b)` with `ep = a / (d²(d² − 1))` and
    /// `gt = b / (2d²(d² − 1))`.
    pub fn measure_numerators(&self) -> (i64, i64) {
        let d = self.d as i64;
        let (r, g) = self.rearranged_rows();
        let (tr, tg) = (gram_square_sum(&r) as i64, gram_square_sum(&g) as i64);
        let d4 = d.pow(4);
        let d2 = d * d;
        let ep = d4 - tr - tg + d2;
        let gt2 = tg - tr + d4 - d2;
        (ep, gt2)
    }
}

/// `Tr[(A Aᵀ)²]` for a 0/1 matrix given by row bitmasks.
fn gram_square_sum(rows: &[u32]) -> u64 {
    let mut s = 0u64;
    for a in rows {
        for b in rows {
            let c = (a & b).count_ones() as u64;
            s += c * c;
        }
    }
    s
}

/// `‖A Aᵀ − I‖_F` for a 0/1 matrix given by row bitmasks.
fn gram_defect(rows: &[u32]) -> f64 {
    let mut s = 0f64;
    for (x, a) in rows.iter().enumerate() {
        for (y, b) in rows.iter().enumerate() {
            let mut c = (a & b).count_ones() as f64;
            if x == y {
                c -= 1.0;
            }
            s += c * c;
        }
    }
    s.sqrt()
}

impl fmt::Display for PermutationGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl DesignTable {
    pub fn d(&self) -> usize {
        self.entries.len()
    }

    /// Aligned box grid.
    pub fn render(&self) -> String {
        render_grid(&self.entries.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect::<Vec<Vec<String>>>())
    }
}

/// Renders cells as a boxed grid with aligned columns.
pub fn render_grid(cells: &[Vec<String>]) -> String {
    let cols = cells.first().map_or(0, |r| r.len());
    let widths: Vec<usize> = (0..cols).map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let rule: String = {
        let mut s = String::from("+");
        for w in &widths {
            s.push_str(&"-".repeat(w + 2));
            s.push('+');
        }
        s
    };
    let mut out = rule.clone();
    out.push('\n');
    for row in cells {
        out.push('|');
        for (c, cell) in row.iter().enumerate() {
            let pad = widths[c] - cell.chars().count();
            out.push(' ');
            out.push_str(cell);
            out.push_str(&" ".repeat(pad + 1));
            out.push('|');
        }
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
    }
    out
}

fn distinct(xs: impl Iterator<Item = usize>, d: usize) -> bool {
    let mut seen = vec![false; d + 1];
    for x in xs {
        if x == 0 || x > d || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

pub fn latin_check(t: &DesignTable, mode: LatinMode) -> bool {
    let d = t.d();
    let rows = || (0..d).all(|i| distinct(t.entries[i].iter().copied(), d));
    let cols = || (0..d).all(|j| distinct((0..d).map(|i| t.entries[i][j]), d));
    match mode {
        LatinMode::Row => rows(),
        LatinMode::Col => cols(),
        LatinMode::Full => rows() && cols(),
    }
}

/// All `d²` superposed pairs `(K_ij, L_ij)` distinct.
pub fn ols_check(k: &DesignTable, l: &DesignTable) -> bool {
    let d = k.d();
    let mut seen = vec![false; d * d];
    for i in 0..d {
        for j in 0..d {
            let (a, b) = (k.entries[i][j], l.entries[i][j]);
            if a == 0 || b == 0 || a > d || b > d {
                return false;
            }
            let p = (a - 1) * d + (b - 1);
            if seen[p] {
                return false;
            }
            seen[p] = true;
        }
    }
    true
}

/// The permutation sending `|ij⟩` to `|K_ij − 1, L_ij − 1⟩`.
pub fn ols_to_permutation(k: &DesignTable, l: &DesignTable) -> Result<PermutationGate> {
    let d = k.d();
    if l.d() != d || !ols_check(k, l) {
        return Err(Error::InvalidPermutation("superposed tables do not contain every ordered pair once".into()));
    }
    let mut inv = vec![0usize; d * d];
    for i in 0..d {
        for j in 0..d {
            inv[i * d + j] = (k.entries[i][j] - 1) * d + (l.entries[i][j] - 1);
        }
    }
    Ok(PermutationGate::new(d, inv)?.inverse())
}

/// Duality of a permutation read off its K/L tables.
pub fn permutation_duality(p: &PermutationGate) -> DualityFlags {
    let (k, l) = p.kl_tables();
    let dual = latin_check(&k, LatinMode::Row) && latin_check(&l, LatinMode::Col);
    let t_dual = latin_check(&k, LatinMode::Col) && latin_check(&l, LatinMode::Row);
    let mut flags = if p.d() * p.d() <= 32 {
        p.duality_flags(1e-8)
    } else {
        crate::measures::classify_duality(&p.to_unitary(), 1e-8)
    };
    flags.dual = dual;
    flags.t_dual = t_dual;
    flags.two_unitary = dual && t_dual;
    flags
}

/// Every permutation of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        if !next_permutation(&mut cur) {
            return out;
        }
    }
}

/// Advances to the next lexicographic permutation; false once exhausted.
pub fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{classify_duality, measure_set};
    use approx::assert_abs_diff_eq;

    fn table(rows: &[&[usize]]) -> DesignTable {
        DesignTable { entries: rows.iter().map(|r| r.to_vec()).collect() }
    }

    #[test]
    fn swap_tables() {
        let (k, l) = PermutationGate::swap(2).kl_tables();
        assert_eq!(k, table(&[&[1, 2], &[1, 2]]));
        assert_eq!(l, table(&[&[1, 1], &[2, 2]]));
        assert!(latin_check(&k, LatinMode::Row));
        assert!(!latin_check(&k, LatinMode::Full));
        let f = permutation_duality(&PermutationGate::swap(2));
        assert!(f.dual && !f.t_dual);
    }

    #[test]
    fn identity_tables_are_t_dual() {
        let id = PermutationGate::identity(3);
        let (k, l) = id.kl_tables();
        assert_eq!(k.entries[2], vec![3, 3, 3]);
        assert!(latin_check(&k, LatinMode::Col) && latin_check(&l, LatinMode::Row));
        let f = permutation_duality(&id);
        assert!(f.t_dual && !f.dual);
    }

    #[test]
    fn ols3_round_trip() {
        let k = table(&[&[1, 2, 3], &[3, 1, 2], &[2, 3, 1]]);
        let l = table(&[&[1, 3, 2], &[3, 2, 1], &[2, 1, 3]]);
        assert!(latin_check(&k, LatinMode::Full) && latin_check(&l, LatinMode::Full));
        assert!(ols_check(&k, &l));
        let p = ols_to_permutation(&k, &l).unwrap();
        assert!(permutation_duality(&p).two_unitary);
        assert!(classify_duality(&p.to_unitary(), 1e-10).two_unitary);
        let (k2, l2) = p.kl_tables();
        assert_eq!((k2, l2), (k, l));
    }

    #[test]
    fn no_orthogonal_latin_pair_for_qubits() {
        let a = table(&[&[1, 2], &[2, 1]]);
        let b = table(&[&[2, 1], &[1, 2]]);
        for x in [&a, &b] {
            for y in [&a, &b] {
                assert!(!ols_check(x, y));
            }
        }
    }

    #[test]
    fn fast_measures_match_dense_for_all_of_p4() {
        for img in all_permutations(4) {
            let p = PermutationGate::new(2, img).unwrap();
            let fast = p.measures();
            let dense = measure_set(&p.to_unitary());
            assert_abs_diff_eq!(fast.ep, dense.ep, epsilon = 1e-12);
            assert_abs_diff_eq!(fast.gt, dense.gt, epsilon = 1e-12);
            let ff = p.duality_flags(1e-8);
            let df = classify_duality(&p.to_unitary(), 1e-8);
            assert_abs_diff_eq!(ff.dual_defect, df.dual_defect, epsilon = 1e-12);
            assert_abs_diff_eq!(ff.t_dual_defect, df.t_dual_defect, epsilon = 1e-12);
            assert_abs_diff_eq!(ff.self_dual_defect, df.self_dual_defect, epsilon = 1e-12);
            let (n_ep, _) = p.measure_numerators();
            assert_abs_diff_eq!(n_ep as f64 / 12.0, fast.ep, epsilon = 1e-12);
        }
    }

    #[test]
    fn parse_validates() {
        let p = PermutationGate::parse("1 5 9 6 7 2 8 3 4").unwrap();
        assert_eq!(p.d(), 3);
        assert_eq!(p.to_string(), "1 5 9 6 7 2 8 3 4");
        assert!(PermutationGate::parse("1 2 3").is_err());
        assert!(PermutationGate::parse("1 1 3 4").is_err());
        assert!(PermutationGate::parse("0 1 2 3").is_err());
    }

    #[test]
    fn compose_matches_matrix_product() {
        let a = PermutationGate::parse("1 5 9 6 7 2 8 3 4").unwrap();
        let b = PermutationGate::swap(3);
        let m = a.to_matrix() * b.to_matrix();
        assert_eq!(PermutationGate::from_matrix(&m, 1e-12).unwrap(), a.compose(&b));
        assert_eq!(a.compose(&a.inverse()), PermutationGate::identity(3));
    }
}
