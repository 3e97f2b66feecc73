use std::f64::consts::TAU;

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{kron, C64, ComplexMatrix};

/// Deterministic random stream addressed by `(seed, stream_id)`.
///
/// Workers never share a stream; they each take a [`RngStream::substream`].
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream; depends only on this stream's address and `index`.
    pub fn substream(&self, index: u64) -> RngStream {
        let id = splitmix(self.stream_id ^ splitmix(index.wrapping_add(1)));
        RngStream::new(self.seed, id)
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex Gaussian with `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.gaussian() * s, self.gaussian() * s)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Haar-random `n × n` unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn sample_cue(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    assert!(n >= 1, "sample_cue needs n >= 1");
    let z = ComplexMatrix::from_fn(n, n, |_, _| rng.complex_gaussian());
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, k)] *= ph;
        }
    }
    q
}

/// Diagonal unitary with i.i.d. phases uniform on `[0, 2π)`.
pub fn sample_diagonal(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, TAU * rng.uniform())).collect();
    ComplexMatrix::from_diagonal(&DVector::from_vec(phases))
}

/// Haar-random unit vector in `C^d`.
pub fn haar_state(d: usize, rng: &mut RngStream) -> DVector<C64> {
    let v = DVector::from_fn(d, |_, _| rng.complex_gaussian());
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Random local unitaries `u1, u2, v1, v2` acting as `(u1⊗u2)·U·(v1⊗v2)`.
#[derive(Clone, Debug)]
pub struct LocalDressing {
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    pub v1: ComplexMatrix,
    pub v2: ComplexMatrix,
}

impl LocalDressing {
    pub fn left(&self) -> ComplexMatrix {
        kron(&self.u1, &self.u2)
    }

    pub fn right(&self) -> ComplexMatrix {
        kron(&self.v1, &self.v2)
    }

    pub fn apply(&self, u: &ComplexMatrix) -> ComplexMatrix {
        self.left() * u * self.right()
    }
}

pub fn sample_local_dressing(d: usize, rng: &mut RngStream) -> LocalDressing {
    LocalDressing {
        u1: sample_cue(d, rng),
        u2: sample_cue(d, rng),
        v1: sample_cue(d, rng),
        v2: sample_cue(d, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::super::unitarity_defect;
    use super::*;

    #[test]
    fn cue_is_replayable_and_unitary() {
        let a = sample_cue(4, &mut RngStream::new(1, 0));
        let b = sample_cue(4, &mut RngStream::new(1, 0));
        assert_eq!(a, b);
        assert!(unitarity_defect(&a) < 1e-12);
        let c = sample_cue(4, &mut RngStream::new(1, 1));
        assert_ne!(a, c);
        let one = sample_cue(1, &mut RngStream::new(5, 0));
        assert!((one[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cue_second_moment() {
        let mut rng = RngStream::new(7, 0);
        let mut acc = 0.0;
        let reps = 10_000;
        for _ in 0..reps {
            let u = sample_cue(9, &mut rng);
            acc += u.iter().map(|z| z.norm_sqr()).sum::<f64>() / 81.0;
        }
        // Per-matrix average is exactly 1/9, so also check a single entry.
        assert!((acc / reps as f64 - 1.0 / 9.0).abs() < 1e-12);
        let mut rng = RngStream::new(8, 0);
        let m: f64 = (0..reps).map(|_| sample_cue(9, &mut rng)[(2, 5)].norm_sqr()).sum::<f64>() / reps as f64;
        assert!((m - 1.0 / 9.0).abs() < 0.01, "mean |u_25|^2 = {m}");
    }

    #[test]
    fn diagonal_draws_are_unitary_and_stream_dependent() {
        let a = sample_diagonal(5, &mut RngStream::new(3, 0));
        let b = sample_diagonal(5, &mut RngStream::new(3, 1));
        assert!(unitarity_defect(&a) < 1e-14);
        for r in 0..5 {
            for c in 0..5 {
                if r != c {
                    assert_eq!(a[(r, c)].norm(), 0.0);
                }
            }
        }
        assert_ne!(a, b);
    }

    #[test]
    fn diagonal_phases_pass_chi_square() {
        let mut rng = RngStream::new(11, 0);
        let bins = 20;
        let mut counts = vec![0usize; bins];
        let n = 100_000;
        for _ in 0..n {
            let d = sample_diagonal(1, &mut rng);
            let th = d[(0, 0)].arg().rem_euclid(TAU);
            counts[((th / TAU) * bins as f64) as usize % bins] += 1;
        }
        let e = n as f64 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 19 degrees of freedom, upper 1% point.
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let root = RngStream::new(42, 0);
        let mut a = root.substream(3);
        let mut b = root.substream(3);
        let mut c = root.substream(4);
        let x = a.next_u64();
        assert_eq!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }
}
