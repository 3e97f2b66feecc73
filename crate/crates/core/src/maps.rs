//! The realignment and partial-transpose maps, iteration drivers and
//! fixed-point diagnostics.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    partial_transpose, phase_distance, polar_unitary, realign, sample_diagonal, swap, unitarity_defect,
    BipartiteUnitary, ComplexMatrix, PartialTranspose, Realign, RngStream,
};
use crate::measures::measures_from_entanglements;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    MR,
    MGamma,
    MGammaR,
    MRStochastic,
    MGammaRStochastic,
}

impl MapKind {
    pub fn is_stochastic(self) -> bool {
        matches!(self, MapKind::MRStochastic | MapKind::MGammaRStochastic)
    }

    /// The map without diagonal kicks.
    pub fn deterministic(self) -> MapKind {
        match self {
            MapKind::MRStochastic => MapKind::MR,
            MapKind::MGammaRStochastic => MapKind::MGammaR,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MapKind::MR => "MR",
            MapKind::MGamma => "MGamma",
            MapKind::MGammaR => "MGammaR",
            MapKind::MRStochastic => "MR_stochastic",
            MapKind::MGammaRStochastic => "MGammaR_stochastic",
        }
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mr" => Ok(MapKind::MR),
            "mgamma" | "mg" => Ok(MapKind::MGamma),
            "mgammar" | "mgr" => Ok(MapKind::MGammaR),
            "mr_stochastic" | "mrs" => Ok(MapKind::MRStochastic),
            "mgammar_stochastic" | "mgrs" => Ok(MapKind::MGammaRStochastic),
            _ => Err(Error::InvalidArgument(format!("unknown map `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Dual,
    TwoUnitary,
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dual" => Ok(Target::Dual),
            "two_unitary" | "2-unitary" | "two-unitary" | "2u" => Ok(Target::TwoUnitary),
            _ => Err(Error::InvalidArgument(format!("unknown target `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_iters: usize,
    pub target_defect: f64,
    pub target: Target,
    /// Record diagnostics every this many iterations (and always at the end).
    pub store_every: usize,
    /// Keep the unitary in recorded steps.
    pub store_unitaries: bool,
    /// Unkicked iterations appended to stochastic runs.
    pub polish_iters: usize,
}

impl StopRule {
    pub fn new(max_iters: usize, target_defect: f64, target: Target) -> Self {
        Self { max_iters, target_defect, target, store_every: 1, store_unitaries: false, polish_iters: 100 }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters < 1 || !(self.target_defect > 0.0) || self.store_every < 1 {
            return Err(Error::InvalidArgument(
                "stop rule needs max_iters >= 1, target_defect > 0 and store_every >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Converged,
    MaxIters,
    RankDeficient,
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub iter: usize,
    pub dual_defect: f64,
    pub t_dual_defect: f64,
    pub ep: f64,
    pub unitary: Option<BipartiteUnitary>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: MapKind,
    pub seed: BipartiteUnitary,
    pub steps: Vec<StepRecord>,
    pub final_unitary: BipartiteUnitary,
    pub stop_reason: StopReason,
    /// Iterations applied to the seed.
    pub iterations: usize,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }

    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("at least the seed is recorded")
    }

    /// CSV with header `iter,dual_defect,t_dual_defect,ep`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,dual_defect,t_dual_defect,ep\n");
        for r in &self.steps {
            writeln!(s, "{},{:.16e},{:.16e},{:.16e}", r.iter, r.dual_defect, r.t_dual_defect, r.ep).unwrap();
        }
        s
    }
}

/// Dual defect, T-dual defect and entangling power from one pass over the rearrangements.
pub fn diagnostics(u: &BipartiteUnitary) -> (f64, f64, f64) {
    let d = u.d();
    let r = u.realigned();
    let g = u.partial_transposed();
    let d4 = (d as f64).powi(4);
    let e = 1.0 - (&r * r.adjoint()).norm_squared() / d4;
    let es = 1.0 - (&g * g.adjoint()).norm_squared() / d4;
    (unitarity_defect(&r), unitarity_defect(&g), measures_from_entanglements(d, e, es).ep)
}

fn rearranged(kind: MapKind, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    match kind.deterministic() {
        MapKind::MR => realign(m, Realign::R2),
        MapKind::MGamma => partial_transpose(m, PartialTranspose::Gamma2),
        _ => partial_transpose(&realign(m, Realign::R2)?, PartialTranspose::Gamma2),
    }
}

/// One application of the map with an explicit rank tolerance.
pub fn step_with_tol(
    kind: MapKind,
    u: &BipartiteUnitary,
    rng: Option<&mut RngStream>,
    rank_tol: f64,
) -> Result<BipartiteUnitary> {
    let projected = polar_unitary(&rearranged(kind, u.matrix())?, rank_tol)?;
    let out = match (kind.is_stochastic(), rng) {
        (false, None) => projected,
        (true, Some(rng)) => {
            let n = projected.nrows();
            let d1 = sample_diagonal(n, rng);
            let d2 = sample_diagonal(n, rng);
            d1 * projected * d2
        }
        (false, Some(_)) => {
            return Err(Error::InvalidArgument(format!("map {} is deterministic and takes no random stream", kind.name())))
        }
        (true, None) => return Err(Error::InvalidArgument(format!("map {} needs a random stream", kind.name()))),
    };
    BipartiteUnitary::new_unchecked(out)
}

pub fn step(kind: MapKind, u: &BipartiteUnitary, rng: Option<&mut RngStream>) -> Result<BipartiteUnitary> {
    step_with_tol(kind, u, rng, Tolerances::default().rank)
}

fn record(iter: usize, u: &BipartiteUnitary, store: bool) -> StepRecord {
    let (dd, td, ep) = diagnostics(u);
    StepRecord { iter, dual_defect: dd, t_dual_defect: td, ep, unitary: store.then(|| u.clone()) }
}

fn reached(rec: &StepRecord, stop: &StopRule) -> bool {
    match stop.target {
        Target::Dual => rec.dual_defect <= stop.target_defect,
        Target::TwoUnitary => rec.dual_defect.max(rec.t_dual_defect) <= stop.target_defect,
    }
}

/// Iterates the map until the target defect, `max_iters`, or a rank failure.
///
/// Stochastic kinds spend `max_iters` kicked steps (stopping early on
/// convergence is not attempted, as the kicks keep the defect finite), then
/// `polish_iters` unkicked steps that may converge.
pub fn iterate(kind: MapKind, u0: &BipartiteUnitary, stop: &StopRule, mut rng: Option<&mut RngStream>) -> Result<Trajectory> {
    stop.validate()?;
    if kind.is_stochastic() != rng.is_some() {
        return Err(Error::InvalidArgument(format!(
            "map {} {} a random stream",
            kind.name(),
            if kind.is_stochastic() { "needs" } else { "takes no" }
        )));
    }
    let mut steps = vec![record(0, u0, stop.store_unitaries)];
    let mut u = u0.clone();
    let mut reason = StopReason::MaxIters;
    let kicked = if kind.is_stochastic() { stop.max_iters } else { 0 };
    let total = if kind.is_stochastic() { stop.max_iters + stop.polish_iters } else { stop.max_iters };
    if !kind.is_stochastic() && reached(&steps[0], stop) {
        reason = StopReason::Converged;
    }
    let mut n = 0;
    while reason == StopReason::MaxIters && n < total {
        let this_kind = if n < kicked { kind } else { kind.deterministic() };
        let next = if this_kind.is_stochastic() {
            step(this_kind, &u, rng.as_deref_mut())
        } else {
            step(this_kind, &u, None)
        };
        match next {
            Ok(v) => u = v,
            Err(Error::RankDeficient { .. }) => {
                reason = StopReason::RankDeficient;
                break;
            }
            Err(e) => return Err(e),
        }
        n += 1;
        let rec = record(n, &u, stop.store_unitaries);
        let done = n >= kicked && reached(&rec, stop);
        if done {
            reason = StopReason::Converged;
        }
        if done || n % stop.store_every == 0 || n == total {
            steps.push(rec);
        }
    }
    if steps.last().map(|r| r.iter) != Some(n) {
        steps.push(record(n, &u, stop.store_unitaries));
    }
    if stop.store_unitaries {
        if let Some(last) = steps.last_mut() {
            last.unitary = Some(u.clone());
        }
    }
    Ok(Trajectory { kind, seed: u0.clone(), steps, final_unitary: u, stop_reason: reason, iterations: n })
}

/// Smallest `p ≤ max_period` with `step^p(U) = U` up to a global phase.
///
/// Returns `Ok(None)` when no period is found or the map is undefined along the way.
pub fn detect_period(u: &BipartiteUnitary, kind: MapKind, max_period: usize, tol: f64) -> Result<Option<usize>> {
    if kind.is_stochastic() {
        return Err(Error::InvalidArgument("period detection needs a deterministic map".into()));
    }
    let mut v = u.clone();
    for p in 1..=max_period {
        v = match step(kind, &v, None) {
            Ok(v) => v,
            Err(Error::RankDeficient { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if phase_distance(v.matrix(), u.matrix()) <= tol {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Sizes of the connected blocks of the support of `U·S`, ascending.
pub fn block_sizes(u: &BipartiteUnitary, support_tol: f64) -> Vec<usize> {
    let m = u.matrix() * swap(u.d());
    let n = m.nrows();
    // rows are nodes 0..n, columns n..2n
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for r in 0..n {
        for c in 0..n {
            if m[(r, c)].norm() > support_tol {
                let (a, b) = (find(&mut parent, r), find(&mut parent, n + c));
                parent[a] = b;
            }
        }
    }
    let mut counts = std::collections::BTreeMap::new();
    for r in 0..n {
        *counts.entry(find(&mut parent, r)).or_insert(0usize) += 1;
    }
    let mut sizes: Vec<usize> = counts.into_values().collect();
    sizes.sort_unstable();
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::named_gate;
    use crate::linalg::{sample_cue, identity};
    use crate::measures::classify_duality;

    #[test]
    fn dual_gate_maps_to_its_realignment() {
        let u = named_gate("u9").unwrap();
        let v = step(MapKind::MR, &u, None).unwrap();
        assert!((v.matrix() - u.realigned()).norm() < 1e-12);
    }

    #[test]
    fn identity_is_outside_the_domain() {
        let i = BipartiteUnitary::identity(2);
        assert!(matches!(step(MapKind::MR, &i, None), Err(Error::RankDeficient { .. })));
        let t = iterate(MapKind::MR, &i, &StopRule::new(10, 1e-8, Target::Dual), None).unwrap();
        assert_eq!(t.stop_reason, StopReason::RankDeficient);
    }

    #[test]
    fn rng_contract() {
        let u = named_gate("p9").unwrap();
        let mut rng = RngStream::new(1, 0);
        assert!(step(MapKind::MR, &u, Some(&mut rng)).is_err());
        assert!(step(MapKind::MRStochastic, &u, None).is_err());
        assert!(step(MapKind::MRStochastic, &u, Some(&mut rng)).is_ok());
    }

    #[test]
    fn periods_of_known_points() {
        let p9 = named_gate("p9").unwrap();
        assert_eq!(detect_period(&p9, MapKind::MGammaR, 5, 1e-9).unwrap(), Some(1));
        let e16 = named_gate("p16-enphased").unwrap();
        assert_eq!(detect_period(&e16, MapKind::MGammaR, 5, 1e-9).unwrap(), Some(3));
        let s = BipartiteUnitary::swap_gate(2);
        assert_eq!(detect_period(&s, MapKind::MR, 3, 1e-9).unwrap(), Some(1));
        let und = named_gate("und").unwrap();
        assert_eq!(detect_period(&und, MapKind::MR, 4, 1e-9).unwrap(), Some(2));
        let t = iterate(MapKind::MGammaR, &p9, &StopRule::new(10, 1e-10, Target::TwoUnitary), None).unwrap();
        assert!(t.converged() && t.iterations == 0);
    }

    #[test]
    fn qubit_cue_seed_converges() {
        let mut rng = RngStream::new(3, 0);
        let u = BipartiteUnitary::new(sample_cue(4, &mut rng)).unwrap();
        let t = iterate(MapKind::MR, &u, &StopRule::new(10_000, 1e-8, Target::Dual), None).unwrap();
        assert!(t.converged(), "{:?}", t.last().dual_defect);
        assert!(classify_duality(&t.final_unitary, 1e-8).dual);
        let csv = t.to_csv();
        assert!(csv.starts_with("iter,dual_defect,t_dual_defect,ep\n"));
        assert_eq!(csv.lines().count(), t.steps.len() + 1);
    }

    #[test]
    fn swap_block_structure() {
        assert_eq!(block_sizes(&BipartiteUnitary::swap_gate(3), 1e-6), vec![1; 9]);
        let u = BipartiteUnitary::new(identity(9)).unwrap();
        assert_eq!(block_sizes(&u, 1e-6), vec![1; 9]);
        let mut rng = RngStream::new(2, 0);
        let v = BipartiteUnitary::new(sample_cue(9, &mut rng)).unwrap();
        assert_eq!(block_sizes(&v, 1e-6), vec![9]);
    }
}
