//! Necessary tests for local-unitary equivalence: entanglement distributions
//! on Haar product states, their comparison, local-permutation orbits and
//! entangling classes of dual permutations.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::{all_permutations, catalog, permutation_duality, PermutationGate};
use crate::error::{Error, Result};
use crate::linalg::{haar_state, singular_values, BipartiteUnitary, ComplexMatrix, RngStream, C64};

/// Samples drawn per independent substream.
pub const SAMPLE_BLOCK: usize = 8192;
/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 200;
/// Smallest sample size accepted by [`compare_histograms`].
pub const MIN_COMPARISON_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMeasure {
    /// `−tr ρ ln ρ`.
    VonNeumann,
    /// `1 − tr ρ²`.
    Linear,
}

impl EntropyMeasure {
    pub fn name(self) -> &'static str {
        match self {
            EntropyMeasure::VonNeumann => "von_neumann",
            EntropyMeasure::Linear => "linear",
        }
    }

    /// Largest value on a `d ⊗ d` pure state.
    pub fn max_value(self, d: usize) -> f64 {
        match self {
            EntropyMeasure::VonNeumann => (d as f64).ln(),
            EntropyMeasure::Linear => 1.0 - 1.0 / d as f64,
        }
    }
}

impl FromStr for EntropyMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vn" | "von_neumann" | "von-neumann" | "vonneumann" => Ok(EntropyMeasure::VonNeumann),
            "lin" | "linear" => Ok(EntropyMeasure::Linear),
            _ => Err(Error::InvalidArgument(format!("unknown entropy measure '{s}' (vn, linear)"))),
        }
    }
}

impl fmt::Display for EntropyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distribution `p(x; U)` of the entanglement of `U(|a⟩ ⊗ |b⟩)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntanglementHistogram {
    pub measure: EntropyMeasure,
    pub d: usize,
    pub samples: usize,
    pub sorted_values: Vec<f64>,
    pub mean: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Sidecar record written next to an exported histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramMeta {
    pub measure: EntropyMeasure,
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub mean: f64,
    pub bins: usize,
    pub values_file: Option<String>,
}

impl EntanglementHistogram {
    /// Builds the histogram from raw values (sorts them).
    pub fn from_values(measure: EntropyMeasure, d: usize, mut values: Vec<f64>, bins: usize) -> Self {
        values.sort_by(f64::total_cmp);
        let samples = values.len();
        let mean = if samples == 0 { 0.0 } else { values.iter().sum::<f64>() / samples as f64 };
        let top = measure.max_value(d);
        let bins = bins.max(1);
        let bin_edges: Vec<f64> = (0..=bins).map(|k| top * k as f64 / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in &values {
            let k = ((v / top) * bins as f64).floor();
            let k = if k.is_finite() { k.clamp(0.0, (bins - 1) as f64) as usize } else { 0 };
            counts[k] += 1;
        }
        Self { measure, d, samples, sorted_values: values, mean, bin_edges, counts }
    }

    /// Sample standard deviation.
    pub fn std_dev(&self) -> f64 {
        if self.samples < 2 {
            return 0.0;
        }
        let ss: f64 = self.sorted_values.iter().map(|v| (v - self.mean).powi(2)).sum();
        (ss / (self.samples - 1) as f64).sqrt()
    }

    /// `bin_left,bin_right,count` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{:.12e},{:.12e},{}\n", self.bin_edges[k], self.bin_edges[k + 1], c));
        }
        s
    }

    pub fn meta(&self, seed: u64, stream_id: u64, values_file: Option<String>) -> HistogramMeta {
        HistogramMeta {
            measure: self.measure,
            d: self.d,
            samples: self.samples,
            seed,
            stream_id,
            mean: self.mean,
            bins: self.counts.len(),
            values_file,
        }
    }

    /// One sorted value per line, round-trip exact.
    pub fn values_text(&self) -> String {
        let mut s = String::with_capacity(self.samples * 24);
        for v in &self.sorted_values {
            s.push_str(&format!("{v:.17e}\n"));
        }
        s
    }

    pub fn parse_values(text: &str) -> Result<Vec<f64>> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                l.trim().parse::<f64>().map_err(|e| Error::Parse { line: n + 1, msg: e.to_string() })
            })
            .collect()
    }
}

/// Entropy of the first-factor reduced state of `psi` on `C^d ⊗ C^d`.
pub fn reduced_entropy(psi: &DVector<C64>, d: usize, measure: EntropyMeasure) -> f64 {
    let m = ComplexMatrix::from_fn(d, d, |i, a| psi[i * d + a]);
    let rho = &m * m.adjoint();
    match measure {
        EntropyMeasure::Linear => 1.0 - rho.norm_squared(),
        EntropyMeasure::VonNeumann => {
            let ev = rho.symmetric_eigenvalues();
            ev.iter().filter(|&&l| l > 1e-300).map(|&l| -l * l.ln()).sum::<f64>().max(0.0)
        }
    }
}

/// Draws `n` Haar product states, applies `u` and records their entanglement.
///
/// Block `k` of [`SAMPLE_BLOCK`] samples uses `rng.substream(k)`, so the
/// result does not depend on the number of worker threads.
pub fn sample_product_entanglement(
    u: &BipartiteUnitary,
    n: usize,
    measure: EntropyMeasure,
    rng: &RngStream,
) -> Result<EntanglementHistogram> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let d = u.d();
    let mat = u.matrix();
    let blocks = n.div_ceil(SAMPLE_BLOCK);
    let chunks: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.substream(b as u64);
            let len = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
            let mut out = Vec::with_capacity(len);
            let mut prod = DVector::<C64>::zeros(d * d);
            for _ in 0..len {
                let a = haar_state(d, &mut r);
                let c = haar_state(d, &mut r);
                for i in 0..d {
                    for j in 0..d {
                        prod[i * d + j] = a[i] * c[j];
                    }
                }
                let psi = mat * &prod;
                out.push(reduced_entropy(&psi, d, measure));
            }
            out
        })
        .collect();
    Ok(EntanglementHistogram::from_values(measure, d, chunks.concat(), DEFAULT_BINS))
}

/// Mean linear entropy over Haar product states implied by `ep`.
pub fn linear_entropy_mean(d: usize, ep: f64) -> f64 {
    let df = d as f64;
    (df / (df + 1.0)).powi(2) * ep * crate::measures::swap_entanglement(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub statistic: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub distinguishable: bool,
    pub sample_sizes: (usize, usize),
}

impl fmt::Display for ComparisonVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (KS D = {:.6}, threshold = {:.6}, alpha = {}, n = {}, m = {})",
            if self.distinguishable { "distinguishable" } else { "not distinguishable" },
            self.statistic,
            self.threshold,
            self.alpha,
            self.sample_sizes.0,
            self.sample_sizes.1
        )
    }
}

/// Asymptotic two-sample Kolmogorov–Smirnov coefficient `c(α)`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// `sup_x |F1(x) − F2(x)|` for two sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    best
}

/// Two-sample KS test. A distinguishable verdict implies LU inequivalence;
/// the converse does not hold.
pub fn compare_histograms(h1: &EntanglementHistogram, h2: &EntanglementHistogram, alpha: f64) -> Result<ComparisonVerdict> {
    if h1.measure != h2.measure {
        return Err(Error::MeasureMismatch(h1.measure.name().into(), h2.measure.name().into()));
    }
    let small = h1.samples.min(h2.samples);
    if small < MIN_COMPARISON_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_COMPARISON_SAMPLES, got: small });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (n, m) = (h1.samples as f64, h2.samples as f64);
    let statistic = ks_statistic(&h1.sorted_values, &h2.sorted_values);
    let threshold = ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt();
    Ok(ComparisonVerdict {
        statistic,
        threshold,
        alpha,
        distinguishable: statistic > threshold,
        sample_sizes: (h1.samples, h2.samples),
    })
}

/// Descending singular values of `U^Γ`; local-unitary invariants.
pub fn gamma_invariants(u: &BipartiteUnitary) -> Vec<f64> {
    singular_values(&u.partial_transposed())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitFilter {
    #[default]
    All,
    Dual,
    TwoUnitary,
}

impl OrbitFilter {
    pub fn accepts(self, p: &PermutationGate) -> bool {
        match self {
            OrbitFilter::All => true,
            OrbitFilter::Dual => permutation_duality(p).dual,
            OrbitFilter::TwoUnitary => permutation_duality(p).two_unitary,
        }
    }
}

/// Distinct members of `{(p1⊗p2) P (p3⊗p4)}` with hit counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitReport {
    pub members: Vec<(PermutationGate, usize)>,
    /// Number of `(p1, p2, p3, p4)` tuples visited.
    pub visited: usize,
    /// False in sampling mode; the member count is then a lower bound.
    pub exhaustive: bool,
}

impl OrbitReport {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Smallest and largest hit count.
    pub fn multiplicity_range(&self) -> Option<(usize, usize)> {
        let lo = self.members.iter().map(|m| m.1).min()?;
        let hi = self.members.iter().map(|m| m.1).max()?;
        Some((lo, hi))
    }

    pub fn contains(&self, p: &PermutationGate) -> bool {
        self.members.binary_search_by(|(q, _)| q.cmp(p)).is_ok()
    }
}

/// All `p1 ⊗ p2` with `p1, p2` permutations of `0..d`.
pub fn local_permutation_gates(d: usize) -> Vec<PermutationGate> {
    let perms = all_permutations(d);
    let mut out = Vec::with_capacity(perms.len() * perms.len());
    for p1 in &perms {
        for p2 in &perms {
            out.push(PermutationGate::local(p1, p2));
        }
    }
    out
}

/// Largest local dimension enumerated exhaustively by the orbit searches.
pub const MAX_EXHAUSTIVE_D: usize = 4;
/// Sample budget used by [`local_permutation_orbit`] above [`MAX_EXHAUSTIVE_D`].
pub const DEFAULT_ORBIT_BUDGET: usize = 1_000_000;

/// Local-permutation orbit of `p`, filtered. Exhaustive over all `(d!)⁴`
/// tuples for `d ≤ 4`; sampled with [`DEFAULT_ORBIT_BUDGET`] otherwise.
pub fn local_permutation_orbit(p: &PermutationGate, filter: OrbitFilter) -> OrbitReport {
    if p.d() > MAX_EXHAUSTIVE_D {
        return local_permutation_orbit_sampled(p, filter, DEFAULT_ORBIT_BUDGET, &RngStream::new(0, 0x0b17));
    }
    let locals = local_permutation_gates(p.d());
    let maps: Vec<HashMap<PermutationGate, usize>> = locals
        .par_iter()
        .map(|left| {
            let lp = left.compose(p);
            let mut hits: HashMap<PermutationGate, usize> = HashMap::new();
            for right in &locals {
                let q = lp.compose(right);
                if filter == OrbitFilter::All || filter.accepts(&q) {
                    *hits.entry(q).or_default() += 1;
                }
            }
            hits
        })
        .collect();
    OrbitReport { members: merge_counts(maps), visited: locals.len() * locals.len(), exhaustive: true }
}

/// Random `(p1, p2, p3, p4)` draws; a lower bound on the orbit.
pub fn local_permutation_orbit_sampled(p: &PermutationGate, filter: OrbitFilter, budget: usize, rng: &RngStream) -> OrbitReport {
    const WALKERS: usize = 64;
    let d = p.d();
    let maps: Vec<HashMap<PermutationGate, usize>> = (0..WALKERS)
        .into_par_iter()
        .map(|w| {
            let mut r = rng.substream(w as u64);
            let share = budget / WALKERS + usize::from(w < budget % WALKERS);
            let mut hits: HashMap<PermutationGate, usize> = HashMap::new();
            for _ in 0..share {
                let left = PermutationGate::local(&random_permutation(d, &mut r), &random_permutation(d, &mut r));
                let right = PermutationGate::local(&random_permutation(d, &mut r), &random_permutation(d, &mut r));
                let q = left.compose(p).compose(&right);
                if filter.accepts(&q) {
                    *hits.entry(q).or_default() += 1;
                }
            }
            hits
        })
        .collect();
    OrbitReport { members: merge_counts(maps), visited: budget, exhaustive: false }
}

fn merge_counts(maps: Vec<HashMap<PermutationGate, usize>>) -> Vec<(PermutationGate, usize)> {
    let mut all: BTreeMap<PermutationGate, usize> = BTreeMap::new();
    for m in maps {
        for (k, v) in m {
            *all.entry(k).or_default() += v;
        }
    }
    all.into_iter().collect()
}

fn random_permutation(n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        v.swap(i, rng.below(i + 1));
    }
    v
}

/// `P, SP, PS, SPS`.
fn swap_family(p: &PermutationGate) -> [PermutationGate; 4] {
    let s = PermutationGate::swap(p.d());
    let sp = s.compose(p);
    let ps = p.compose(&s);
    let sps = sp.compose(&s);
    [p.clone(), sp, ps, sps]
}

/// True iff `q` is a local-permutation conjugate of one of `P, SP, PS, SPS`.
pub fn lus_search(p: &PermutationGate, q: &PermutationGate) -> Result<bool> {
    if p.d() != q.d() {
        return Err(Error::Dimension(format!("local dimensions {} and {} differ", p.d(), q.d())));
    }
    if p.d() > MAX_EXHAUSTIVE_D {
        return Err(Error::InvalidArgument(format!("exhaustive search needs d <= {MAX_EXHAUSTIVE_D}")));
    }
    let locals = local_permutation_gates(p.d());
    let family = swap_family(p);
    Ok(family.iter().any(|f| {
        locals.par_iter().any(|left| {
            let lf = left.compose(f);
            locals.iter().any(|right| lf.compose(right) == *q)
        })
    }))
}

/// Smallest member of the local-permutation orbit (optionally with swaps).
fn canonical_form(p: &PermutationGate, locals: &[PermutationGate], with_swap: bool) -> PermutationGate {
    let family = swap_family(p);
    let starts = if with_swap { &family[..] } else { &family[..1] };
    let mut best = p.clone();
    for f in starts {
        for left in locals {
            let lf = left.compose(f);
            for right in locals {
                let q = lf.compose(right);
                if q < best {
                    best = q;
                }
            }
        }
    }
    best
}

/// One entangling class of dual permutations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassRow {
    pub ep: f64,
    /// Gate typicality of the representative.
    pub gt: f64,
    /// Distinct gate typicalities seen in the class.
    pub gt_values: Vec<f64>,
    /// Smallest member found, in compact form.
    pub representative: PermutationGate,
    /// Distinct dual permutations found in the class.
    pub member_count: usize,
    /// Orbits under local permutations (exhaustive tables only). An upper
    /// bound on the number of LU classes met by the class.
    pub lu_orbits: Option<usize>,
    /// Orbits under local permutations and swaps (exhaustive tables only).
    pub lus_orbits: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassTable {
    pub d: usize,
    pub exhaustive: bool,
    /// Permutations examined.
    pub scanned: usize,
    pub rows: Vec<ClassRow>,
}

impl ClassTable {
    pub fn ep_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ep).collect()
    }

    /// `ep,gt,representative,count`, then orbit counts when known.
    pub fn to_csv(&self) -> String {
        let orbits = self.rows.iter().all(|r| r.lu_orbits.is_some());
        let mut s = String::from("ep,gt,representative,count");
        if orbits {
            s.push_str(",lu_orbits,lus_orbits");
        }
        s.push('\n');
        for r in &self.rows {
            let rep: Vec<String> = r.representative.one_based().iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("{:.12},{:.12},{},{}", r.ep, r.gt, rep.join(" "), r.member_count));
            if orbits {
                s.push_str(&format!(",{},{}", r.lu_orbits.unwrap(), r.lus_orbits.unwrap()));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Default)]
struct ClassAccumulator {
    members: HashMap<i64, (HashSet<PermutationGate>, BTreeMap<i64, ()>)>,
}

impl ClassAccumulator {
    fn add(&mut self, p: PermutationGate) {
        let (a, b) = p.measure_numerators();
        let e = self.members.entry(a).or_default();
        e.1.insert(b, ());
        e.0.insert(p);
    }

    fn merge(&mut self, other: ClassAccumulator) {
        for (a, (set, gts)) in other.members {
            let e = self.members.entry(a).or_default();
            e.0.extend(set);
            e.1.extend(gts);
        }
    }

    fn into_table(self, d: usize, exhaustive: bool, scanned: usize) -> ClassTable {
        let d2 = (d * d) as f64;
        let ep_den = d2 * (d2 - 1.0);
        let locals = if exhaustive { Some(local_permutation_gates(d)) } else { None };
        let mut keys: Vec<i64> = self.members.keys().copied().collect();
        keys.sort_unstable();
        let mut members = self.members;
        let rows = keys
            .into_iter()
            .map(|a| {
                let (set, gts) = members.remove(&a).unwrap();
                let representative = set.iter().min().unwrap().clone();
                let (_, b) = representative.measure_numerators();
                let (lu_orbits, lus_orbits) = match &locals {
                    Some(l) => {
                        let lu: HashSet<PermutationGate> = set.par_iter().map(|p| canonical_form(p, l, false)).collect();
                        let lus: HashSet<PermutationGate> = lu.par_iter().map(|p| canonical_form(p, l, true)).collect();
                        (Some(lu.len()), Some(lus.len()))
                    }
                    None => (None, None),
                };
                ClassRow {
                    ep: a as f64 / ep_den,
                    gt: b as f64 / (2.0 * ep_den),
                    gt_values: gts.keys().map(|&g| g as f64 / (2.0 * ep_den)).collect(),
                    representative,
                    member_count: set.len(),
                    lu_orbits,
                    lus_orbits,
                }
            })
            .collect();
        ClassTable { d, exhaustive, scanned, rows }
    }
}

/// `k`-th permutation of `0..n` in lexicographic order.
pub fn nth_permutation(n: usize, mut k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut fact = vec![1usize; n + 1];
    for i in 1..=n {
        fact[i] = fact[i - 1] * i;
    }
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let q = k / fact[i];
        k %= fact[i];
        out.push(pool.remove(q));
    }
    out
}

/// Default sample budget for `d ≥ 4`.
pub const DEFAULT_CLASS_BUDGET: usize = 10_000_000;

/// Entangling classes of dual permutations on `C^d ⊗ C^d`: exhaustive for
/// `d ≤ 3`, otherwise found by [`sampled_dual_walk`] (a lower bound).
pub fn enumerate_dual_permutation_classes(d: usize, budget: Option<usize>, rng: &RngStream) -> Result<ClassTable> {
    match d {
        2 | 3 => Ok(exhaustive_dual_classes(d)),
        4 | 5 => Ok(sampled_dual_walk(d, budget.unwrap_or(DEFAULT_CLASS_BUDGET), rng)),
        _ => Err(Error::InvalidArgument(format!("class enumeration supports 2 <= d <= 5, got {d}"))),
    }
}

fn exhaustive_dual_classes(d: usize) -> ClassTable {
    let n = d * d;
    let total: usize = (1..=n).product();
    const CHUNK: usize = 4096;
    let acc = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ClassAccumulator::default();
            let mut cur = nth_permutation(n, c * CHUNK);
            for _ in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let p = PermutationGate::new(d, cur.clone()).expect("bijection");
                if is_dual(&p) {
                    acc.add(p);
                }
                crate::designs::next_permutation(&mut cur);
            }
            acc
        })
        .reduce(ClassAccumulator::default, |mut a, b| {
            a.merge(b);
            a
        });
    acc.into_table(d, true, total)
}

/// Dual iff `K` is row-Latin and `L` column-Latin.
fn is_dual(p: &PermutationGate) -> bool {
    let d = p.d();
    // Row (i, a) of K collects the first digits of preimages of (i, 0..d).
    let inv = p.inverse();
    for block in 0..d {
        let (mut kr, mut lc) = (0u32, 0u32);
        for j in 0..d {
            let k_digit = inv.image(block * d + j) / d;
            let l_digit = inv.image(j * d + block) % d;
            kr |= 1 << k_digit;
            lc |= 1 << l_digit;
        }
        if kr.count_ones() as usize != d || lc.count_ones() as usize != d {
            return false;
        }
    }
    true
}

/// Starting points for the sampled search: SWAP, P16 (for `d = 4`) and the
/// controlled shift composed with SWAP, all dual.
pub fn walk_seeds(d: usize) -> Vec<PermutationGate> {
    let mut seeds = vec![PermutationGate::swap(d)];
    if d == 4 {
        seeds.push(catalog::p16());
    }
    let cs = catalog::cshift(d);
    let s = PermutationGate::swap(d);
    seeds.push(s.compose(&cs));
    seeds.push(cs.compose(&s));
    seeds.retain(is_dual);
    seeds
}

/// Random-transposition walk on dual permutations. Each proposal applies one
/// to three row transpositions to the current dual permutation and counts
/// as one sample; dual proposals are recorded and accepted. Walkers restart
/// from a randomly dressed seed or an earlier hit.
pub fn sampled_dual_walk(d: usize, budget: usize, rng: &RngStream) -> ClassTable {
    const WALKERS: usize = 64;
    const RESTART: usize = 20_000;
    let n = d * d;
    let seeds = walk_seeds(d);
    let accs: Vec<ClassAccumulator> = (0..WALKERS)
        .into_par_iter()
        .map(|w| {
            let mut r = rng.substream(w as u64);
            let share = budget / WALKERS + usize::from(w < budget % WALKERS);
            let mut acc = ClassAccumulator::default();
            let mut found: Vec<PermutationGate> = Vec::new();
            let mut cur = seeds[w % seeds.len()].clone();
            for t in 0..share {
                if t % RESTART == 0 && t > 0 {
                    let base = if found.is_empty() || r.uniform() < 0.5 {
                        seeds[r.below(seeds.len())].clone()
                    } else {
                        found[r.below(found.len())].clone()
                    };
                    let left = PermutationGate::local(&random_permutation(d, &mut r), &random_permutation(d, &mut r));
                    let right = PermutationGate::local(&random_permutation(d, &mut r), &random_permutation(d, &mut r));
                    cur = left.compose(&base).compose(&right);
                }
                let mut next = cur.clone();
                for _ in 0..1 + r.below(3) {
                    let a = r.below(n);
                    let mut b = r.below(n - 1);
                    if b >= a {
                        b += 1;
                    }
                    next.swap_rows(a, b);
                }
                if is_dual(&next) {
                    if found.len() < 4096 && r.uniform() < 0.01 {
                        found.push(next.clone());
                    }
                    acc.add(next.clone());
                    cur = next;
                }
            }
            acc
        })
        .collect();
    let mut total = ClassAccumulator::default();
    for a in accs {
        total.merge(a);
    }
    total.into_table(d, false, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::catalog::named_gate;
    use crate::linalg::{sample_cue, sample_local_dressing};
    use crate::measures::{entangling_power, measure_set};
    use approx::assert_abs_diff_eq;

    fn perm(text: &str) -> PermutationGate {
        PermutationGate::parse(text).unwrap()
    }

    #[test]
    fn identity_produces_no_entanglement() {
        let h = sample_product_entanglement(&BipartiteUnitary::identity(3), 2000, EntropyMeasure::VonNeumann, &RngStream::new(1, 0)).unwrap();
        assert!(h.sorted_values.iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(h.counts[0], 2000);
    }

    #[test]
    fn values_stay_in_range_and_sampling_is_deterministic() {
        let u = named_gate("p9").unwrap();
        let rng = RngStream::new(5, 2);
        for m in [EntropyMeasure::VonNeumann, EntropyMeasure::Linear] {
            let h = sample_product_entanglement(&u, 20_000, m, &rng).unwrap();
            let top = m.max_value(3);
            assert!(h.sorted_values.iter().all(|&v| (-1e-12..=top + 1e-12).contains(&v)));
            assert_eq!(h.counts.iter().sum::<u64>(), 20_000);
            let again = sample_product_entanglement(&u, 20_000, m, &rng).unwrap();
            assert_eq!(h.sorted_values, again.sorted_values);
        }
    }

    #[test]
    fn linear_mean_agrees_with_entangling_power() {
        let mut r = RngStream::new(9, 0);
        for d in [2usize, 3] {
            let u = BipartiteUnitary::new(sample_cue(d * d, &mut r)).unwrap();
            let h = sample_product_entanglement(&u, 200_000, EntropyMeasure::Linear, &RngStream::new(10, d as u64)).unwrap();
            let expected = linear_entropy_mean(d, entangling_power(&u));
            let sigma = h.std_dev() / (h.samples as f64).sqrt();
            assert!((h.mean - expected).abs() < 4.0 * sigma, "d = {d}: {} vs {expected}", h.mean);
        }
    }

    #[test]
    fn ks_statistic_by_hand() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_abs_diff_eq!(ks_statistic(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        // F1 jumps at 1,2,3,4; F2 at 2.5: sup at 2 -> |0.5 - 0|.
        assert_abs_diff_eq!(ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.5]), 0.5);
        assert_abs_diff_eq!(ks_coefficient(0.001), 1.9495, epsilon = 1e-4);
        assert_abs_diff_eq!(ks_coefficient(0.05), 1.3581, epsilon = 1e-4);
    }

    #[test]
    fn comparison_guards() {
        let u = named_gate("p9").unwrap();
        let a = sample_product_entanglement(&u, 100, EntropyMeasure::Linear, &RngStream::new(1, 0)).unwrap();
        let b = sample_product_entanglement(&u, 100, EntropyMeasure::VonNeumann, &RngStream::new(1, 0)).unwrap();
        assert!(matches!(compare_histograms(&a, &b, 0.001), Err(Error::MeasureMismatch(..))));
        assert!(matches!(compare_histograms(&a, &a, 0.001), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn resamples_agree_and_locals_do_not_matter() {
        let u = named_gate("p9").unwrap();
        let m = EntropyMeasure::VonNeumann;
        let h1 = sample_product_entanglement(&u, 50_000, m, &RngStream::new(1, 0)).unwrap();
        let h2 = sample_product_entanglement(&u, 50_000, m, &RngStream::new(2, 0)).unwrap();
        assert!(!compare_histograms(&h1, &h2, 0.001).unwrap().distinguishable);
        let mut r = RngStream::new(3, 0);
        let dressed = BipartiteUnitary::new(sample_local_dressing(3, &mut r).apply(u.matrix())).unwrap();
        let h3 = sample_product_entanglement(&dressed, 50_000, m, &RngStream::new(4, 0)).unwrap();
        assert!(!compare_histograms(&h1, &h3, 0.001).unwrap().distinguishable);
    }

    #[test]
    fn gamma_invariants_of_the_two_lus_classes() {
        let p = perm("1 4 8 2 5 7 6 3 9");
        let q = perm("1 4 9 2 5 8 6 3 7");
        let gp = gamma_invariants(&p.to_unitary());
        let gq = gamma_invariants(&q.to_unitary());
        let expect_p = [2.0, 2.0, 1.0];
        let expect_q = [5f64.sqrt(), 2f64.sqrt(), 2f64.sqrt()];
        for k in 0..9 {
            assert_abs_diff_eq!(gp[k], expect_p.get(k).copied().unwrap_or(0.0), epsilon = 1e-9);
            assert_abs_diff_eq!(gq[k], expect_q.get(k).copied().unwrap_or(0.0), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(p.measures().ep, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.measures().ep, 2.0 / 3.0, epsilon = 1e-12);
        assert!(gamma_invariants(&named_gate("p9").unwrap()).iter().all(|s| (s - 1.0).abs() < 1e-9));
    }

    #[test]
    fn gamma_invariants_survive_dressing() {
        let u = perm("1 4 9 2 5 8 6 3 7").to_unitary();
        let g0 = gamma_invariants(&u);
        let mut r = RngStream::new(12, 0);
        let v = BipartiteUnitary::new(sample_local_dressing(3, &mut r).apply(u.matrix())).unwrap();
        for (a, b) in g0.iter().zip(gamma_invariants(&v)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn p9_orbit_counts() {
        let o = local_permutation_orbit(&crate::designs::catalog::p9(), OrbitFilter::TwoUnitary);
        assert!(o.exhaustive);
        assert_eq!(o.len(), 72);
        assert_eq!(o.multiplicity_range(), Some((18, 18)));
        assert_eq!(o.visited, 1296);
    }

    #[test]
    fn swap_orbit_stays_in_its_class() {
        let o = local_permutation_orbit(&PermutationGate::swap(2), OrbitFilter::All);
        assert!(o.members.iter().all(|(p, _)| p.measures().ep.abs() < 1e-12));
        assert_eq!(o.members.iter().map(|m| m.1).sum::<usize>(), 16);
    }

    #[test]
    fn lus_relations() {
        let p = perm("1 4 8 2 5 7 6 3 9");
        let q = perm("1 4 9 2 5 8 6 3 7");
        assert!(lus_search(&p, &p).unwrap());
        assert!(!lus_search(&p, &q).unwrap());
        let s = PermutationGate::swap(3);
        assert!(lus_search(&p, &s.compose(&p).compose(&s)).unwrap());
    }

    #[test]
    fn nth_permutation_matches_lexicographic_order() {
        let all = all_permutations(4);
        for (k, p) in all.iter().enumerate() {
            assert_eq!(&nth_permutation(4, k), p);
        }
    }

    #[test]
    fn fast_dual_check_agrees_with_tables() {
        for imgs in all_permutations(4) {
            let p = PermutationGate::new(2, imgs).unwrap();
            assert_eq!(is_dual(&p), permutation_duality(&p).dual);
        }
        let mut r = RngStream::new(4, 0);
        for _ in 0..2000 {
            let p = PermutationGate::new(3, random_permutation(9, &mut r)).unwrap();
            assert_eq!(is_dual(&p), permutation_duality(&p).dual);
            let dense = crate::measures::classify_duality(&p.to_unitary(), 1e-8);
            assert_eq!(is_dual(&p), dense.dual);
        }
    }

    #[test]
    fn qubit_class_table() {
        let t = enumerate_dual_permutation_classes(2, None, &RngStream::new(0, 0)).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_abs_diff_eq!(t.rows[0].ep, 0.0);
        assert_abs_diff_eq!(t.rows[1].ep, 2.0 / 3.0, epsilon = 1e-12);
        // CNOT with either control is one LU class, but relating the two needs
        // Hadamards, so local permutations alone see two orbits.
        assert_eq!(t.rows.iter().map(|r| r.lu_orbits.unwrap()).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(t.rows.iter().map(|r| r.lus_orbits.unwrap()).collect::<Vec<_>>(), vec![1, 1]);
        for r in &t.rows {
            assert_abs_diff_eq!(r.ep, measure_set(&r.representative.to_unitary()).ep, epsilon = 1e-12);
        }
        assert!(t.to_csv().starts_with("ep,gt,representative,count"));
    }

    #[test]
    fn qutrit_class_table() {
        let t = enumerate_dual_permutation_classes(3, None, &RngStream::new(0, 0)).unwrap();
        let num = [0, 32, 36, 48, 50, 52, 54, 58, 64, 72];
        assert_eq!(t.rows.len(), 10);
        for (r, a) in t.rows.iter().zip(num) {
            assert_abs_diff_eq!(r.ep, a as f64 / 72.0, epsilon = 1e-12);
            assert!(permutation_duality(&r.representative).dual);
        }
        let lu: Vec<usize> = t.rows.iter().map(|r| r.lu_orbits.unwrap()).collect();
        let lus: Vec<usize> = t.rows.iter().map(|r| r.lus_orbits.unwrap()).collect();
        assert_eq!(lu, vec![1, 2, 2, 3, 2, 2, 2, 2, 1, 1]);
        assert_eq!(lus, vec![1, 1, 1, 2, 1, 1, 1, 1, 1, 1]);
        assert_eq!(t.rows.iter().map(|r| r.member_count).sum::<usize>(), 8784);
    }

    #[test]
    fn walk_seeds_are_dual() {
        assert!(walk_seeds(4).len() >= 2);
        let t = sampled_dual_walk(4, 20_000, &RngStream::new(1, 0));
        assert!(!t.exhaustive && t.rows.len() >= 3);
        for r in &t.rows {
            assert!(permutation_duality(&r.representative).dual);
        }
    }
}
