//! Two-qubit canonical forms: Cartan coefficients, the realignment map in
//! canonical coordinates, reduced maps on the chamber faces and edges, and
//! convergence-rate analysis.

mod reduced;
mod regime;

pub use reduced::{
    c3_limit, edge_solution, edge_solution_direct, edge_step, face_invariant, face_solution, face_step,
    face_z_solution, xxx_step, xxz_step, ReducedCoordinates,
};
pub use regime::{
    cartan_csv, estimate_rate, fit_power_law, regime_classify, regime_table, Convergence, RateEstimate, Regime,
    RegimeRow,
};

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteUnitary, ComplexMatrix, C64};

/// Cartan coefficients `(c1, c2, c3)` in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanPoint {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CartanPoint {
    pub const fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    /// `c1,c2,c3`; each entry may be a number or `pi/k`.
    pub fn parse(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s.split(',').map(parse_angle).collect::<Result<_>>()?;
        match vals[..] {
            [c1, c2, c3] => Ok(Self::new(c1, c2, c3)),
            _ => Err(Error::InvalidArgument(format!("expected c1,c2,c3, got `{s}`"))),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// `0 ≤ |c3| ≤ c2 ≤ c1 ≤ π/4` within `tol`.
    pub fn in_chamber(&self, tol: f64) -> bool {
        self.c3.abs() <= self.c2 + tol && self.c2 <= self.c1 + tol && self.c1 <= FRAC_PI_4 + tol && self.c2 >= -tol
    }

    pub fn max_abs_diff(&self, o: &CartanPoint) -> f64 {
        (self.c1 - o.c1).abs().max((self.c2 - o.c2).abs()).max((self.c3 - o.c3).abs())
    }
}

fn parse_angle(t: &str) -> Result<f64> {
    let t = t.trim().to_ascii_lowercase();
    let bad = || Error::InvalidArgument(format!("bad angle `{t}`"));
    if let Some(rest) = t.strip_prefix("pi") {
        let rest = rest.trim();
        if rest.is_empty() {
            return Ok(PI);
        }
        let k: f64 = rest.strip_prefix('/').ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        return Ok(PI / k);
    }
    t.parse().map_err(|_| bad())
}

/// Entries of the canonical matrix
/// `[[α,0,0,β],[0,δ,γ,0],[0,γ,δ,0],[β,0,0,α]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalGate {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
}

impl CanonicalGate {
    pub fn from_point(c: CartanPoint) -> Self {
        let (cm, sm) = ((c.c1 - c.c2).cos(), (c.c1 - c.c2).sin());
        let (cp, sp) = ((c.c1 + c.c2).cos(), (c.c1 + c.c2).sin());
        let em = C64::from_polar(1.0, -c.c3);
        let ep = C64::from_polar(1.0, c.c3);
        let mi = C64::new(0.0, -1.0);
        Self { alpha: em * cm, beta: mi * em * sm, gamma: mi * ep * sp, delta: ep * cp }
    }

    /// Reads the entries of a matrix with the canonical sparsity pattern.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.shape() != (4, 4) {
            return Err(Error::Dimension("canonical gates are 4x4".into()));
        }
        Ok(Self { alpha: m[(0, 0)], beta: m[(0, 3)], gamma: m[(1, 2)], delta: m[(1, 1)] })
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        ComplexMatrix::from_row_slice(4, 4, &[a, z, z, b, z, d, g, z, z, g, d, z, b, z, z, a])
    }

    /// Largest violation of the unitarity constraints on the entries.
    pub fn constraint_defect(&self) -> f64 {
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        let n1 = (a.norm_sqr() + b.norm_sqr() - 1.0).abs();
        let n2 = (g.norm_sqr() + d.norm_sqr() - 1.0).abs();
        let o1 = (a * b.conj()).re.abs();
        let o2 = (g * d.conj()).re.abs();
        n1.max(n2).max(o1).max(o2)
    }

    /// `|(α² − β²)(δ² − γ²) − 1|`.
    pub fn su_defect(&self) -> f64 {
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        ((a * a - b * b) * (d * d - g * g) - 1.0).norm()
    }

    /// `(θ+, θ−, φ+, φ−)`: arguments of `α ± δ` and `β ± γ`.
    pub fn angles(&self) -> (f64, f64, f64, f64) {
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        ((a + d).arg(), (a - d).arg(), (b + g).arg(), (b - g).arg())
    }
}

pub fn canonical_matrix(c: CartanPoint) -> BipartiteUnitary {
    BipartiteUnitary::new_unchecked(CanonicalGate::from_point(c).to_matrix()).expect("4x4")
}

/// One realignment-map step in canonical entries, renormalized to unit determinant.
pub fn canonical_step(g: &CanonicalGate) -> Result<CanonicalGate> {
    let (a, b, c, d) = (g.alpha, g.beta, g.gamma, g.delta);
    let unit = |z: C64| -> Result<C64> {
        let n = z.norm();
        if n < 1e-12 {
            Err(Error::RankDeficient { sigma_min: n, tol: 1e-12 })
        } else {
            Ok(z / n)
        }
    };
    let (ap, am) = (unit(a + d)?, unit(a - d)?);
    let (bp, bm) = (unit(b + c)?, unit(b - c)?);
    let chi = ((a * a - d * d) * (b * b - c * c)).arg();
    let ph = C64::from_polar(0.5, -chi / 4.0);
    Ok(CanonicalGate { alpha: ph * (ap + am), beta: ph * (ap - am), gamma: ph * (bp - bm), delta: ph * (bp + bm) })
}

/// Parity of the iteration index `n` of `U_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// The coordinate map on the angles of `α ± δ`, `β ± γ`, with no reduction.
pub fn cartan_step_raw(c: CartanPoint) -> Result<CartanPoint> {
    let g = CanonicalGate::from_point(c);
    for z in [g.alpha + g.delta, g.alpha - g.delta, g.beta + g.gamma, g.beta - g.gamma] {
        if z.norm() < 1e-12 {
            return Err(Error::RankDeficient { sigma_min: z.norm(), tol: 1e-12 });
        }
    }
    let (tp, tm, pp, pm) = g.angles();
    Ok(CartanPoint::new(
        0.25 * (-tp + tm - pp + pm),
        0.25 * (tp - tm - pp + pm),
        0.25 * (-tp - tm + pp + pm),
    ))
}

/// The realignment map on Cartan coefficients, reduced into the chamber.
pub fn cartan_step(c: CartanPoint) -> Result<CartanPoint> {
    Ok(canonicalize(cartan_step_raw(c)?))
}

/// Chamber bookkeeping for raw coordinates of `U_n` fed forward unreduced:
/// for odd `n`, `c2 → π/2 − c2`.
///
/// The reflection is not a local move; it returns the mirror image
/// `(c1, c2, −c3)` of the true chamber point, so it agrees with
/// [`cartan_extract`] only up to the sign of `c3`.
pub fn parity_corrected(raw: CartanPoint, parity: Parity) -> CartanPoint {
    match parity {
        Parity::Even => raw,
        Parity::Odd => CartanPoint::new(raw.c1, FRAC_PI_2 - raw.c2, raw.c3),
    }
}

/// Iterates [`cartan_step`] `steps` times; includes the seed.
pub fn cartan_trajectory(c0: CartanPoint, steps: usize) -> Result<Vec<CartanPoint>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(c0);
    let mut c = c0;
    for _ in 0..steps {
        c = cartan_step(c)?;
        out.push(c);
    }
    Ok(out)
}

/// Raw coordinates fed forward unreduced, reported through [`parity_corrected`].
pub fn cartan_trajectory_raw(c0: CartanPoint, steps: usize) -> Result<Vec<CartanPoint>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(c0);
    let mut c = c0;
    for n in 1..=steps {
        c = cartan_step_raw(c)?;
        out.push(parity_corrected(c, Parity::of(n)));
    }
    Ok(out)
}

/// Reduces coefficients into the chamber using shifts by π/2, permutations
/// and paired sign flips, each of which is a local-unitary move.
pub fn canonicalize(c: CartanPoint) -> CartanPoint {
    let tol = 1e-12;
    let mut v = c.as_array().map(|x| {
        let mut y = x.rem_euclid(FRAC_PI_2);
        if y > FRAC_PI_4 + tol {
            y -= FRAC_PI_2;
        }
        y
    });
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    if v[0] < 0.0 {
        v[0] = -v[0];
        v[2] = -v[2];
    }
    if v[1] < 0.0 {
        v[1] = -v[1];
        v[2] = -v[2];
    }
    if (v[0] - FRAC_PI_4).abs() < 1e-10 && v[2] < 0.0 {
        v[2] = -v[2];
    }
    if v[2].abs() < tol {
        v[2] = v[2].abs();
    }
    CartanPoint::new(v[0], v[1], v[2])
}

fn magic_basis() -> Matrix4<C64> {
    let s = FRAC_1_SQRT_2;
    let (o, z, i) = (C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, s));
    Matrix4::new(o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i)
}

/// Cartan coefficients of a two-qubit unitary, reduced into the chamber.
pub fn cartan_extract(u: &BipartiteUnitary) -> Result<CartanPoint> {
    if u.d() != 2 {
        return Err(Error::Dimension(format!("Cartan coefficients need d = 2, got d = {}", u.d())));
    }
    let m = u.matrix();
    let u4 = Matrix4::from_fn(|r, c| m[(r, c)]);
    let det = u4.determinant();
    let u4 = u4 * C64::from_polar(1.0, -det.arg() / 4.0);
    let mb = magic_basis();
    let mm = mb.adjoint() * u4 * mb;
    let sym = mm.transpose() * mm;
    let (_, t) = nalgebra::Schur::new(sym).unpack();
    let a: Vec<f64> = (0..4).map(|k| t[(k, k)].arg()).collect();
    let mut h: Vec<f64> = a.iter().map(|x| -x / 2.0).collect();
    let k = (a.iter().sum::<f64>() / (2.0 * PI)).round();
    h[0] += PI * k;
    let c1 = (h[0] + h[1] - h[2] - h[3]) / 4.0;
    let c2 = (-h[0] + h[1] - h[2] + h[3]) / 4.0;
    let c3 = (h[0] - h[1] - h[2] + h[3]) / 4.0;
    Ok(canonicalize(CartanPoint::new(c1, c2, c3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::catalog::{cnot, dcnot};
    use crate::linalg::{identity, phase_distance, sample_cue, sample_local_dressing, RngStream};
    use crate::maps::{step, MapKind};
    use crate::measures::{classify_duality, measure_set};

    fn random_chamber(rng: &mut RngStream) -> CartanPoint {
        let c1 = FRAC_PI_4 * rng.uniform();
        let c2 = c1 * rng.uniform();
        let c3 = c2 * (2.0 * rng.uniform() - 1.0);
        CartanPoint::new(c1, c2, c3)
    }

    #[test]
    fn canonical_examples() {
        assert!((canonical_matrix(CartanPoint::new(0.0, 0.0, 0.0)).matrix() - identity(4)).norm() < 1e-15);
        let s = CanonicalGate::from_point(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4));
        assert!(s.beta.norm() < 1e-15 && s.delta.norm() < 1e-15);
        let g = canonical_matrix(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.0));
        assert!(classify_duality(&g, 1e-12).dual);
        let mut rng = RngStream::new(4, 0);
        for _ in 0..20 {
            let g = CanonicalGate::from_point(random_chamber(&mut rng));
            assert!(g.constraint_defect() < 1e-12 && g.su_defect() < 1e-12);
        }
    }

    #[test]
    fn extraction_of_standard_gates() {
        let id = cartan_extract(&BipartiteUnitary::identity(2)).unwrap();
        assert!(id.max_abs_diff(&CartanPoint::new(0.0, 0.0, 0.0)) < 1e-8);
        let c = cartan_extract(&BipartiteUnitary::new(cnot()).unwrap()).unwrap();
        assert!(c.max_abs_diff(&CartanPoint::new(FRAC_PI_4, 0.0, 0.0)) < 1e-8, "{c:?}");
        let s = cartan_extract(&BipartiteUnitary::swap_gate(2)).unwrap();
        assert!(s.max_abs_diff(&CartanPoint::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4)) < 1e-8, "{s:?}");
        let dc = cartan_extract(&BipartiteUnitary::new(dcnot()).unwrap()).unwrap();
        assert!(dc.max_abs_diff(&CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.0)) < 1e-8, "{dc:?}");
    }

    #[test]
    fn extraction_round_trip_and_local_invariance() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..1000 {
            let c = random_chamber(&mut rng);
            let back = cartan_extract(&canonical_matrix(c)).unwrap();
            assert!(back.max_abs_diff(&c) < 1e-8, "{c:?} -> {back:?}");
        }
        for _ in 0..50 {
            let c = random_chamber(&mut rng);
            let loc = sample_local_dressing(2, &mut rng);
            let u = BipartiteUnitary::new(loc.apply(canonical_matrix(c).matrix()) * C64::from_polar(1.0, 0.3)).unwrap();
            let back = cartan_extract(&u).unwrap();
            assert!(back.max_abs_diff(&c) < 1e-8, "{c:?} -> {back:?}");
        }
    }

    #[test]
    fn extraction_is_lu_faithful_for_cue() {
        let mut rng = RngStream::new(6, 0);
        for _ in 0..200 {
            let u = BipartiteUnitary::new(sample_cue(4, &mut rng)).unwrap();
            let c = cartan_extract(&u).unwrap();
            assert!(c.in_chamber(1e-10), "{c:?}");
            let a = measure_set(&u);
            let b = measure_set(&canonical_matrix(c));
            assert!((a.ep - b.ep).abs() < 1e-8 && (a.gt - b.gt).abs() < 1e-8);
        }
    }

    #[test]
    fn canonical_step_matches_full_map() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..100 {
            let c = random_chamber(&mut rng);
            let g = CanonicalGate::from_point(c);
            let next = canonical_step(&g).unwrap();
            assert!(next.constraint_defect() < 1e-10 && next.su_defect() < 1e-9);
            let full = step(MapKind::MR, &canonical_matrix(c), None).unwrap();
            assert!(phase_distance(full.matrix(), &next.to_matrix()) < 1e-9);
        }
    }

    #[test]
    fn base_plane_reaches_dual_in_one_step() {
        let g = canonical_step(&CanonicalGate::from_point(CartanPoint::new(PI / 6.0, PI / 8.0, 0.0))).unwrap();
        let c = cartan_extract(&BipartiteUnitary::new(g.to_matrix()).unwrap()).unwrap();
        assert!(c.max_abs_diff(&CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.0)) < 1e-10);
        let n = cartan_step(CartanPoint::new(PI / 6.0, PI / 8.0, 0.0)).unwrap();
        assert!(n.max_abs_diff(&CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.0)) < 1e-10);
    }

    #[test]
    fn dual_line_has_period_two_in_canonical_entries() {
        let g0 = CanonicalGate::from_point(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.3));
        let g2 = canonical_step(&canonical_step(&g0).unwrap()).unwrap();
        assert!(phase_distance(&g0.to_matrix(), &g2.to_matrix()) < 1e-12);
        let c = cartan_step(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.3)).unwrap();
        assert!(c.max_abs_diff(&CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.3)) < 1e-12);
    }

    #[test]
    fn coordinate_map_tracks_full_map() {
        let mut rng = RngStream::new(8, 0);
        for _ in 0..30 {
            let c0 = random_chamber(&mut rng);
            let mut u = canonical_matrix(c0);
            let mut c = c0;
            let raw = cartan_trajectory_raw(c0, 20).unwrap();
            for n in 1..=20 {
                u = step(MapKind::MR, &u, None).unwrap();
                c = cartan_step(c).unwrap();
                let e = cartan_extract(&u).unwrap();
                assert!(e.max_abs_diff(&c) < 1e-8, "seed {c0:?} step {n}: map {c:?} vs extracted {e:?}");
                let r = canonicalize(raw[n]);
                let mirrored = CartanPoint::new(r.c1, r.c2, r.c3.abs());
                assert!(mirrored.max_abs_diff(&CartanPoint::new(e.c1, e.c2, e.c3.abs())) < 1e-8, "raw {r:?} vs {e:?}");
            }
        }
    }

    #[test]
    fn angle_parsing() {
        let c = CartanPoint::parse("pi/6, pi/8,0.1").unwrap();
        assert!((c.c1 - PI / 6.0).abs() < 1e-15 && (c.c3 - 0.1).abs() < 1e-15);
        assert!(CartanPoint::parse("1,2").is_err());
        assert!(CartanPoint::parse("pi/x,1,1").is_err());
    }
}
