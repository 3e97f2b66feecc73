//! Named gates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::cartan::{canonical_matrix, CartanPoint};
use crate::error::{Error, Result};
use crate::linalg::{from_real_rows, sample_diagonal, BipartiteUnitary, ComplexMatrix, RngStream, C64};

use super::permutation::PermutationGate;

pub const P9: [usize; 9] = [1, 5, 9, 6, 7, 2, 8, 3, 4];
pub const P16: [usize; 16] = [1, 6, 11, 16, 8, 3, 14, 9, 10, 13, 4, 7, 15, 12, 5, 2];
pub const P25: [usize; 25] = [
    1, 7, 13, 19, 25, 22, 3, 9, 15, 16, 18, 24, 5, 6, 12, 14, 20, 21, 2, 8, 10, 11, 17, 23, 4,
];
pub const P25_R: [usize; 25] = [
    1, 7, 13, 19, 25, 8, 14, 20, 21, 2, 15, 16, 22, 3, 9, 17, 23, 4, 10, 11, 24, 5, 6, 12, 18,
];

/// Twice the entries of O16, row-major.
#[rustfmt::skip]
const O16_X2: [[i8; 16]; 16] = [
    [ 1,  0,  0,  0,  0,  1,  0,  0,  0,  0, -1,  0,  0,  0,  0, -1],
    [ 0,  1,  0,  0, -1,  0,  0,  0,  0,  0,  0, -1,  0,  0, -1,  0],
    [ 0,  0, -1,  0,  0,  0,  0,  1, -1,  0,  0,  0,  0, -1,  0,  0],
    [ 0,  0,  0, -1,  0,  0,  1,  0,  0,  1,  0,  0,  1,  0,  0,  0],
    [ 0,  1,  0,  0, -1,  0,  0,  0,  0,  0,  0,  1,  0,  0,  1,  0],
    [-1,  0,  0,  0,  0,  1,  0,  0,  0,  0,  1,  0,  0,  0,  0, -1],
    [ 0,  0,  0, -1,  0,  0,  1,  0,  0, -1,  0,  0, -1,  0,  0,  0],
    [ 0,  0, -1,  0,  0,  0,  0, -1,  1,  0,  0,  0,  0, -1,  0,  0],
    [ 0,  0, -1,  0,  0,  0,  0, -1, -1,  0,  0,  0,  0,  1,  0,  0],
    [ 0,  0,  0,  1,  0,  0,  1,  0,  0, -1,  0,  0,  1,  0,  0,  0],
    [-1,  0,  0,  0,  0, -1,  0,  0,  0,  0, -1,  0,  0,  0,  0, -1],
    [ 0, -1,  0,  0, -1,  0,  0,  0,  0,  0,  0, -1,  0,  0,  1,  0],
    [ 0,  0,  0, -1,  0,  0, -1,  0,  0, -1,  0,  0,  1,  0,  0,  0],
    [ 0,  0,  1,  0,  0,  0,  0, -1, -1,  0,  0,  0,  0, -1,  0,  0],
    [ 0,  1,  0,  0,  1,  0,  0,  0,  0,  0,  0, -1,  0,  0,  1,  0],
    [ 1,  0,  0,  0,  0, -1,  0,  0,  0,  0,  1,  0,  0,  0,  0, -1],];

/// Twice the four diagonal blocks of `P16 · O16 · P16ᵀ`.
#[rustfmt::skip]
const D4_BLOCKS_X2: [[[i8; 4]; 4]; 4] = [
    [[ 1,  1, -1, -1], [-1,  1,  1, -1], [-1, -1, -1, -1], [ 1, -1,  1, -1]],
    [[-1, -1, -1,  1], [ 1, -1, -1, -1], [-1,  1, -1, -1], [-1, -1,  1, -1]],
    [[-1,  1,  1,  1], [-1,  1, -1, -1], [ 1,  1, -1,  1], [-1, -1, -1,  1]],
    [[ 1, -1,  1,  1], [ 1, -1, -1, -1], [ 1,  1, -1,  1], [-1, -1, -1,  1]],
];

/// Seed of the fixed enphased P16 reference object.
pub const ENPHASED_P16_SEED: u64 = 16;

/// Names accepted by [`named_gate`]; `:x` marks a parameter.
pub const CATALOG_NAMES: &[&str] = &[
    "swap[:d]", "identity[:d]", "cnot", "dcnot", "cshift:d", "fourier:d", "xxx:c", "canonical:c1,c2,c3",
    "p9", "p16", "p16-enphased[:seed]", "o16", "o16-compact", "d4", "p25", "p25r", "u9", "und",
];

pub fn permutation(d: usize, one_based: &[usize]) -> PermutationGate {
    PermutationGate::from_one_based(d, one_based).expect("catalog permutation")
}

pub fn p9() -> PermutationGate {
    permutation(3, &P9)
}

pub fn p16() -> PermutationGate {
    permutation(4, &P16)
}

pub fn p25() -> PermutationGate {
    permutation(5, &P25)
}

pub fn p25_r() -> PermutationGate {
    permutation(5, &P25_R)
}

/// O16 entry by entry as printed.
pub fn o16_direct() -> ComplexMatrix {
    ComplexMatrix::from_fn(16, 16, |r, c| C64::new(O16_X2[r][c] as f64 / 2.0, 0.0))
}

/// The block-diagonal middle factor of the compact form.
pub fn d4() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(16, 16);
    for (b, block) in D4_BLOCKS_X2.iter().enumerate() {
        for r in 0..4 {
            for c in 0..4 {
                m[(4 * b + r, 4 * b + c)] = C64::new(block[r][c] as f64 / 2.0, 0.0);
            }
        }
    }
    m
}

/// `P16ᵀ · D4 · P16`.
pub fn o16_compact() -> ComplexMatrix {
    let p = p16().to_matrix();
    p.transpose() * d4() * p
}

/// The 9×9 dual unitary with five-vector quantum Latin designs, as printed.
pub fn u9() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(9, 9);
    let entries: [(usize, usize, f64); 13] = [
        (0, 0, 1.0), (1, 3, 1.0), (2, 6, h), (2, 7, h), (3, 1, -1.0), (4, 4, 1.0), (5, 6, h),
        (5, 7, -h), (6, 2, h), (6, 8, h), (7, 2, h), (7, 8, -h), (8, 5, 1.0),
    ];
    for (r, c, v) in entries {
        m[(r, c)] = C64::new(v, 0.0);
    }
    m
}

/// Non-dual period-2 point of the realignment map for qutrits.
pub fn u_nd() -> ComplexMatrix {
    let s = 3f64.sqrt() / 2.0;
    let mut m = ComplexMatrix::zeros(9, 9);
    let entries: [(usize, usize, f64); 13] = [
        (0, 0, 1.0), (1, 2, s), (1, 3, 0.5), (2, 5, s), (2, 6, -0.5), (3, 7, 1.0), (4, 1, 1.0),
        (5, 4, 1.0), (6, 8, 1.0), (7, 2, -0.5), (7, 3, s), (8, 5, 0.5), (8, 6, s),
    ];
    for (r, c, v) in entries {
        m[(r, c)] = C64::new(v, 0.0);
    }
    m
}

pub fn cnot() -> ComplexMatrix {
    from_real_rows(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.])
}

pub fn dcnot() -> ComplexMatrix {
    from_real_rows(4, 4, &[1., 0., 0., 0., 0., 0., 0., 1., 0., 1., 0., 0., 0., 0., 1., 0.])
}

/// `|i, j⟩ → |i, i + j mod d⟩`.
pub fn cshift(d: usize) -> PermutationGate {
    // Row (i, i+j) holds the entry of column (i, j).
    PermutationGate::new(d, (0..d * d).map(|r| {
        let (i, k) = (r / d, r % d);
        i * d + (k + d - i) % d
    }).collect()).expect("valid")
}

/// Discrete Fourier transform on `d²` levels.
pub fn fourier(d: usize) -> ComplexMatrix {
    let n = d * d;
    let norm = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| C64::from_polar(norm, 2.0 * PI * ((j * k) % n) as f64 / n as f64))
}

/// `D1 · P16 · D2` with diagonal phases drawn from `seed`.
pub fn p16_enphased(seed: u64) -> ComplexMatrix {
    let mut rng = RngStream::new(seed, 0);
    let d1 = sample_diagonal(16, &mut rng);
    let d2 = sample_diagonal(16, &mut rng);
    d1 * p16().to_matrix() * d2
}

fn float_param(name: &str, p: Option<&str>) -> Result<f64> {
    p.ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs a parameter")))?
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad parameter for `{name}`")))
}

fn dim_param(name: &str, p: Option<&str>, default: Option<usize>) -> Result<usize> {
    let d = match p {
        None => default.ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs a dimension")))?,
        Some(s) => s.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad dimension for `{name}`")))?,
    };
    if !(2..=16).contains(&d) {
        return Err(Error::InvalidArgument(format!("dimension {d} out of range 2..=16")));
    }
    Ok(d)
}

fn catalog_cache() -> &'static [(&'static str, BipartiteUnitary)] {
    static CACHE: OnceLock<Vec<(&'static str, BipartiteUnitary)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let wrap = |m: ComplexMatrix| BipartiteUnitary::new(m).expect("catalog entries are unitary");
        vec![
            ("cnot", wrap(cnot())),
            ("dcnot", wrap(dcnot())),
            ("p9", p9().to_unitary()),
            ("p16", p16().to_unitary()),
            ("o16", wrap(o16_direct())),
            ("o16-compact", wrap(o16_compact())),
            ("d4", wrap(d4())),
            ("p25", p25().to_unitary()),
            ("p25r", p25_r().to_unitary()),
            ("u9", wrap(u9())),
            ("und", wrap(u_nd())),
        ]
    })
}

/// Looks up a gate by name, e.g. `p9`, `swap:3`, `xxx:0.3`, `canonical:0.7,0.3,0.1`.
pub fn named_gate(spec: &str) -> Result<BipartiteUnitary> {
    let lower = spec.trim().to_ascii_lowercase();
    let (name, param) = match lower.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (lower.as_str(), None),
    };
    if param.is_none() {
        if let Some((_, u)) = catalog_cache().iter().find(|(n, _)| *n == name) {
            return Ok(u.clone());
        }
    }
    let wrap = |m: ComplexMatrix| BipartiteUnitary::new(m);
    match name {
        "swap" => Ok(BipartiteUnitary::swap_gate(dim_param(name, param, Some(2))?)),
        "identity" | "id" => Ok(BipartiteUnitary::identity(dim_param(name, param, Some(2))?)),
        "cshift" => Ok(cshift(dim_param(name, param, Some(2))?).to_unitary()),
        "fourier" => wrap(fourier(dim_param(name, param, Some(2))?)),
        "xxx" => {
            let c = float_param(name, param)?;
            Ok(canonical_matrix(CartanPoint::new(c, c, c)))
        }
        "canonical" => {
            let p = param.ok_or_else(|| Error::InvalidArgument("`canonical` needs c1,c2,c3".into()))?;
            Ok(canonical_matrix(CartanPoint::parse(p)?))
        }
        "p16-enphased" => {
            let seed = match param {
                None => ENPHASED_P16_SEED,
                Some(s) => s.trim().parse().map_err(|_| Error::InvalidArgument("bad seed".into()))?,
            };
            wrap(p16_enphased(seed))
        }
        _ => Err(Error::UnknownGate(spec.to_string())),
    }
}
