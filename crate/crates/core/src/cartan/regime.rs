//! Convergence regimes of seeds and fitted rates of trajectories.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{c3_limit, cartan_trajectory, CartanPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    BaseXY,
    XxxEdge,
    SwapLocalCnotFace,
    SwapLocalDcnotFace,
    SwapCnotDcnotFace,
    SwapCnotEdge,
    DualEdge,
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convergence {
    Instantaneous,
    Algebraic,
    Exponential,
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub seed: CartanPoint,
    pub regime: Regime,
    pub predicted_convergence: Convergence,
    /// Limiting `c3` of the dual gate reached, when known.
    pub c3_limit: Option<f64>,
    /// `ξ = |ln sin 2c3∞|` for exponential regimes.
    pub rate: Option<f64>,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::BaseXY => "base_XY",
            Regime::XxxEdge => "xxx_edge",
            Regime::SwapLocalCnotFace => "swap_local_cnot_face",
            Regime::SwapLocalDcnotFace => "swap_local_dcnot_face",
            Regime::SwapCnotDcnotFace => "swap_cnot_dcnot_face",
            Regime::SwapCnotEdge => "swap_cnot_edge",
            Regime::DualEdge => "dual_edge",
            Regime::Interior => "interior",
        }
    }

    fn location(self) -> &'static str {
        match self {
            Regime::BaseXY => "base c3 = 0, c2 > 0",
            Regime::XxxEdge => "swap-local edge c1 = c2 = c3",
            Regime::SwapLocalCnotFace => "swap-local-cnot face c2 = c3 != c1",
            Regime::SwapLocalDcnotFace => "swap-local-dcnot face c1 = c2 != c3",
            Regime::SwapCnotDcnotFace => "swap-cnot-dcnot face c1 = pi/4, c2 != c3",
            Regime::SwapCnotEdge => "swap-cnot edge c1 = pi/4, c2 = c3",
            Regime::DualEdge => "dual edge c1 = c2 = pi/4",
            Regime::Interior => "interior c1 > c2 > c3",
        }
    }
}

impl Convergence {
    pub fn name(self) -> &'static str {
        match self {
            Convergence::Instantaneous => "instantaneous",
            Convergence::Algebraic => "algebraic",
            Convergence::Exponential => "exponential",
            Convergence::Fixed => "fixed",
        }
    }
}

/// Limit `c3` by running the coordinate map; `None` if it leaves the domain.
fn numeric_c3_limit(c0: CartanPoint) -> Option<f64> {
    let traj = cartan_trajectory(c0, 400).ok()?;
    Some(traj.last()?.c3.abs())
}

/// Matches a chamber seed against the regime conditions (equalities at 1e-12).
pub fn regime_classify(c0: CartanPoint) -> RegimeRow {
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let CartanPoint { c1, c2, c3 } = c0;
    let (regime, conv) = if eq(c1, c2) && eq(c2, c3) {
        (Regime::XxxEdge, Convergence::Algebraic)
    } else if eq(c1, FRAC_PI_4) && eq(c2, FRAC_PI_4) {
        (Regime::DualEdge, Convergence::Fixed)
    } else if eq(c3, 0.0) && c2 > 1e-12 {
        (Regime::BaseXY, Convergence::Instantaneous)
    } else if eq(c1, FRAC_PI_4) && eq(c2, c3) {
        (Regime::SwapCnotEdge, Convergence::Algebraic)
    } else if eq(c2, c3) {
        (Regime::SwapLocalCnotFace, Convergence::Algebraic)
    } else if eq(c1, c2) {
        (Regime::SwapLocalDcnotFace, Convergence::Exponential)
    } else if eq(c1, FRAC_PI_4) {
        (Regime::SwapCnotDcnotFace, Convergence::Exponential)
    } else {
        (Regime::Interior, Convergence::Exponential)
    };
    let limit = match regime {
        Regime::BaseXY => Some(0.0),
        Regime::XxxEdge | Regime::SwapCnotEdge | Regime::SwapLocalCnotFace => Some(FRAC_PI_4),
        Regime::DualEdge => Some(c3),
        Regime::SwapCnotDcnotFace => Some(c3_limit(c2, c3)),
        _ => numeric_c3_limit(c0),
    };
    let rate = match conv {
        Convergence::Exponential => limit.map(|l| (2.0 * l).sin().abs().ln().abs()),
        Convergence::Instantaneous => Some(f64::INFINITY),
        _ => None,
    };
    RegimeRow { seed: c0, regime, predicted_convergence: conv, c3_limit: limit, rate }
}

/// Text table: location, dual approached, convergence, rate.
pub fn regime_table(rows: &[RegimeRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{:<30} {:<44} {:<14} {:<12} rate", "seed (c1,c2,c3)", "location", "convergence", "c3_limit").unwrap();
    for r in rows {
        let seed = format!("({:.4},{:.4},{:.4})", r.seed.c1, r.seed.c2, r.seed.c3);
        let lim = r.c3_limit.map_or("-".to_string(), |x| format!("{x:.6}"));
        let rate = r.rate.map_or("-".to_string(), |x| if x.is_infinite() { "inf".into() } else { format!("{x:.6}") });
        writeln!(s, "{:<30} {:<44} {:<14} {:<12} {}", seed, r.regime.location(), r.predicted_convergence.name(), lim, rate).unwrap();
    }
    s
}

/// `n,c1,c2,c3` rows starting at `n = 0`.
pub fn cartan_csv(traj: &[CartanPoint]) -> String {
    let mut s = String::from("n,c1,c2,c3\n");
    for (n, c) in traj.iter().enumerate() {
        writeln!(s, "{n},{:.16e},{:.16e},{:.16e}", c.c1, c.c2, c.c3).unwrap();
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Exponential rates `ξ_i`; `None` where the decay is algebraic or unresolved.
    pub xi: [Option<f64>; 3],
    /// Power-law exponents `p_i` in `Δc_i ~ n^(−p_i)`, where the decay is algebraic.
    pub exponents: [Option<f64>; 3],
    pub limit: CartanPoint,
}

struct Fit {
    slope: f64,
    rss: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Option<Fit> {
    let n = xs.len() as f64;
    if xs.len() < 3 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    Some(Fit { slope, rss })
}

/// Exponent `p` of `v_n ~ n^(−p)` fitted on `ln v` against `ln n` (`n ≥ 1`).
pub fn fit_power_law(ns: &[f64], vs: &[f64]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        ns.iter().zip(vs).filter(|(n, v)| **n >= 1.0 && **v > 0.0).map(|(n, v)| (n.ln(), v.ln())).unzip();
    least_squares(&x, &y).map(|f| -f.slope)
}

/// Fits `ln Δc_i` over the last 60% of iterations with `Δc_i > 1e-12`.
///
/// `Δc1 = π/4 − c1`, `Δc2 = π/4 − c2` and `Δc3 = |c3∞| − |c3|`, where `c3∞`
/// comes from `limit` or else the final point. Each coordinate is classified
/// exponential or algebraic by which model fits the window better.
pub fn estimate_rate(traj: &[CartanPoint], limit: Option<CartanPoint>) -> RateEstimate {
    let last = traj.last().copied().unwrap_or(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.0));
    let limit = limit.unwrap_or(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, last.c3));
    let start = (traj.len() as f64 * 0.4).floor() as usize;
    let mut xi = [None; 3];
    let mut exponents = [None; 3];
    for k in 0..3 {
        let target = limit.as_array()[k];
        let (ns, ds): (Vec<f64>, Vec<f64>) = traj
            .iter()
            .enumerate()
            .skip(start)
            .map(|(n, c)| {
                let v = c.as_array()[k];
                // c3 flips sign between mirror representatives along a trajectory.
                let gap = if k == 2 { target.abs() - v.abs() } else { target - v };
                (n as f64, gap.abs())
            })
            .filter(|(_, d)| *d > 1e-12)
            .unzip();
        let logs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
        let lin = least_squares(&ns, &logs);
        let lns: Vec<f64> = ns.iter().map(|n| n.max(1.0).ln()).collect();
        let pow = least_squares(&lns, &logs);
        match (lin, pow) {
            (Some(l), Some(p)) if p.rss < l.rss => exponents[k] = Some(-p.slope),
            (Some(l), _) => xi[k] = Some(-l.slope),
            (None, Some(p)) => exponents[k] = Some(-p.slope),
            (None, None) => {}
        }
    }
    RateEstimate { xi, exponents, limit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn table_rows() {
        let r = regime_classify(CartanPoint::new(0.3, 0.3, 0.3));
        assert_eq!((r.regime, r.predicted_convergence), (Regime::XxxEdge, Convergence::Algebraic));
        let r = regime_classify(CartanPoint::new(0.5, 0.2, 0.0));
        assert_eq!((r.regime, r.predicted_convergence), (Regime::BaseXY, Convergence::Instantaneous));
        let r = regime_classify(CartanPoint::new(PI / 6.0, PI / 8.0, PI / 12.0));
        assert_eq!((r.regime, r.predicted_convergence), (Regime::Interior, Convergence::Exponential));
        let lim = r.c3_limit.unwrap();
        assert!((lim - 0.443).abs() < 0.005, "{lim}");
        assert!((r.rate.unwrap() - (2.0 * lim).sin().ln().abs()).abs() < 1e-12);
        let r = regime_classify(CartanPoint::new(FRAC_PI_4, 0.5, 0.2));
        assert_eq!(r.regime, Regime::SwapCnotDcnotFace);
        assert_eq!(regime_classify(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.1)).regime, Regime::DualEdge);
        assert_eq!(regime_classify(CartanPoint::new(FRAC_PI_4, 0.3, 0.3)).regime, Regime::SwapCnotEdge);
        assert_eq!(regime_classify(CartanPoint::new(0.6, 0.3, 0.3)).regime, Regime::SwapLocalCnotFace);
        assert_eq!(regime_classify(CartanPoint::new(0.6, 0.6, 0.3)).regime, Regime::SwapLocalDcnotFace);
        let t = regime_table(&[r]);
        assert_eq!(t.lines().count(), 2);
    }

    #[test]
    fn fitted_rates_on_synthetic_data() {
        let traj: Vec<CartanPoint> = (0..30)
            .map(|n| {
                let e = (-0.3 * n as f64).exp();
                CartanPoint::new(FRAC_PI_4 - e, FRAC_PI_4 - 2.0 * e, 0.4 - e * e)
            })
            .collect();
        let r = estimate_rate(&traj, Some(CartanPoint::new(FRAC_PI_4, FRAC_PI_4, 0.4)));
        assert!((r.xi[0].unwrap() - 0.3).abs() < 1e-9);
        assert!((r.xi[2].unwrap() - 0.6).abs() < 1e-9);
        let ns: Vec<f64> = (1..1000).map(|n| n as f64).collect();
        let vs: Vec<f64> = ns.iter().map(|n| 3.0 / n.sqrt()).collect();
        assert!((fit_power_law(&ns, &vs).unwrap() - 0.5).abs() < 1e-12);
        let csv = cartan_csv(&traj[..3]);
        assert!(csv.starts_with("n,c1,c2,c3\n0,"));
    }
}
