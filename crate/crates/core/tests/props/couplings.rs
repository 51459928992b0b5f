use proptest::prelude::*;
use wqed::couplings::{
    coupling_constant, effective_from_physical, feasibility_threshold, self_energy, Bandgap, EffectiveCouplings, Pair,
    PhysicalBathParams,
};

use super::{check, Prop};
use crate::common::bloch_self_energies;

pub const ALL: &[Prop] = &[
    ("couplings::golden_formula", golden_formula),
    ("couplings::dimerization_sign", dimerization_sign),
    ("couplings::eta_ratio", eta_ratio),
    ("couplings::bloch_round_trip", bloch_round_trip),
];

const PAIRS: [Pair; 4] = [Pair::AB, Pair::BA, Pair::AA, Pair::BB];

/// Valid `(bandgap, xi, dimerization, J~, sign)` tuples: outer gaps below
/// the feasibility threshold, the middle gap above it.
pub fn effective() -> impl Strategy<Value = EffectiveCouplings> {
    (0..3usize, 0.05f64..6.0, 0.0f64..1.0, any::<bool>(), any::<bool>(), 0.1f64..3.0).prop_map(
        |(gap, xi, u, neg, below, jt)| {
            let thr = feasibility_threshold(xi);
            let sign = if neg { -1.0 } else { 1.0 };
            match gap {
                0 | 1 => {
                    let bandgap = if gap == 0 { Bandgap::Lower } else { Bandgap::Upper };
                    let d = sign * u * thr;
                    let s = if gap == 0 { -1 } else { 1 };
                    EffectiveCouplings::new(bandgap, xi, d, jt, s).unwrap()
                }
                _ => {
                    let d = sign * (thr + u * (1.0 - thr)).min(1.0);
                    EffectiveCouplings::new(Bandgap::Middle, xi, d, jt, if below { -1 } else { 1 }).unwrap()
                }
            }
        },
    )
}

/// Closed forms written out with `exp` and explicit signs.
pub fn direct(c: &EffectiveCouplings, n: u32, pair: Pair) -> f64 {
    let (xi, d, jt) = (c.xi(), c.dimerization(), c.jtilde());
    let sd = c.detuning_sign() as f64;
    let nf = n as f64;
    let eta = ((-1.0 / xi).exp() * (1.0 - d * d)).sqrt();
    let alt = |k: f64| if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
    if n == 0 && pair != Pair::AB {
        return 0.0;
    }
    match c.bandgap() {
        Bandgap::Middle => {
            let sg = if d > 0.0 { 1.0 } else { -1.0 };
            match pair {
                Pair::AB => jt * sg * (1.0 + d) * alt(nf) * (-nf / xi).exp(),
                Pair::BA => -jt * sg * (1.0 - d) * alt(nf - 1.0) * (-(nf - 1.0) / xi).exp(),
                _ => jt * sd * eta * alt(nf - 1.0) * (-(nf - 1.0) / xi).exp(),
            }
        }
        _ => match pair {
            Pair::AB => -jt * (1.0 + d) * (-nf / xi).exp(),
            Pair::BA => -jt * (1.0 - d) * (-(nf - 1.0) / xi).exp(),
            _ => jt * sd * eta * (-(nf - 1.0) / xi).exp(),
        },
    }
}

pub fn golden_cases(cases: u32) {
    check(cases, (effective(), 0u32..60, 0..4usize), |(c, n, p)| {
        let pair = PAIRS[p];
        let want = direct(&c, n, pair);
        let got = coupling_constant(&c, n, pair);
        prop_assert!((got - want).abs() <= 1e-14 * want.abs(), "n={n} {pair:?}: {got:e} vs {want:e}");
        Ok(())
    });
}

fn golden_formula() {
    golden_cases(2000);
}

/// Physical parameters with the detuning strictly inside a gap, kept away
/// from the band edges so the momentum integrals converge quickly.
pub fn physical() -> impl Strategy<Value = PhysicalBathParams> {
    (0.5f64..2.0, 0.15f64..0.9, any::<bool>(), 0..3usize, 0.05f64..1.5, 0.05f64..0.5, any::<bool>()).prop_map(
        |(j, ad, neg, gap, u, g, above)| {
            let delta = if neg { -ad } else { ad };
            let detuning = match gap {
                0 => -2.0 * j * (1.0 + u),
                1 => 2.0 * j * (1.0 + u),
                // u mapped onto [0.05, 0.9] of the middle half-gap.
                _ => {
                    let v = 0.05 + 0.85 * (u - 0.05) / 1.45;
                    let side = if above { 1.0 } else { -1.0 };
                    side * 2.0 * j * ad * v
                }
            };
            PhysicalBathParams { hopping: j, dimerization: delta, detuning, coupling: g }
        },
    )
}

fn dimerization_sign() {
    check(500, physical(), |p| {
        let c = effective_from_physical(&p).unwrap();
        prop_assert_eq!(c.dimerization().signum(), p.dimerization.signum(), "{:?}", c);
        Ok(())
    });
}

fn eta_ratio() {
    check(500, effective(), |c| {
        let eta = c.eta();
        for n in 0..30 {
            let ab = coupling_constant(&c, n, Pair::AB).abs();
            let ba = coupling_constant(&c, n + 1, Pair::BA).abs();
            let aa = coupling_constant(&c, n + 1, Pair::AA).abs();
            if ab + ba < 1e-250 {
                break;
            }
            close!(2.0 * aa / (ab + ba), eta, 1e-12 * eta.max(1e-300), "n={n}");
            close!((ab - ba) / (ab + ba), c.dimerization(), 1e-12, "n={n}");
        }
        Ok(())
    });
}

/// Effective couplings against the Bloch-resolvent self-energy, and the
/// closed-form self-energy against the same oracle. Only entries above
/// `1e-4` of the largest one enter the relative comparison; smaller ones
/// come out of cancelling sums and carry round-off at that level.
pub fn round_trip_cases(cases: u32) {
    check(cases, physical(), |p| {
        let c = effective_from_physical(&p).unwrap();
        // Only J^AB is defined at zero cell separation.
        let entries: Vec<(Pair, u32)> = [Pair::AB, Pair::BA, Pair::AA]
            .into_iter()
            .flat_map(|pair| (if pair == Pair::AB { 0 } else { 1 }..6u32).map(move |n| (pair, n)))
            .collect();
        let oracles = bloch_self_energies(p.hopping, p.dimerization, p.detuning, p.coupling, &entries);
        let lead = oracles.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (&(pair, n), &oracle) in entries.iter().zip(&oracles) {
            if oracle.abs() < 1e-4 * lead {
                continue;
            }
            let closed = self_energy(&p, n, pair).unwrap();
            let got = coupling_constant(&c, n, pair);
            close!(closed, oracle, 1e-10 * oracle.abs(), "{p:?} n={n} {pair:?} closed form");
            close!(got, oracle, 1e-10 * oracle.abs(), "{p:?} n={n} {pair:?} effective");
        }
        Ok(())
    });
}

fn bloch_round_trip() {
    round_trip_cases(300);
}
