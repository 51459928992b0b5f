//! Waveguide-mediated coupling constants.
//!
//! Spins sit on a two-site unit cell: site `2j` is the A spin of cell `j`
//! and site `2j + 1` the B spin. The couplings `J_n^{AB}`, `J_n^{BA}` and
//! `J_n^{AA} = J_n^{BB}` connect spins `n` cells apart and are fully
//! determined by the bandgap, the interaction length `xi`, the effective
//! dimerization and the global amplitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing `|dimerization|` with the feasibility threshold.
const FEASIBILITY_SLACK: f64 = 1e-12;
/// Entries with `|J_ij| / J~` below this are dropped from coupling matrices.
pub const ENTRY_FLOOR: f64 = 1e-12;
/// Maximum tolerated tail `e^{-n_max/xi}` for an effective truncation.
pub const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandgap {
    Lower,
    Middle,
    Upper,
}

impl std::str::FromStr for Bandgap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lower" | "lbg" => Ok(Bandgap::Lower),
            "middle" | "mbg" => Ok(Bandgap::Middle),
            "upper" | "ubg" => Ok(Bandgap::Upper),
            other => Err(Error::InvalidParameter {
                name: "bandgap",
                reason: format!("unknown bandgap `{other}` (expected lower|middle|upper)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    AB,
    BA,
    AA,
    BB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Obc,
    Pbc,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obc" | "open" => Ok(Boundary::Obc),
            "pbc" | "periodic" => Ok(Boundary::Pbc),
            other => Err(Error::InvalidParameter {
                name: "boundary",
                reason: format!("unknown boundary `{other}` (expected obc|pbc)"),
            }),
        }
    }
}

/// Parameters of the SSH photonic bath and of the emitter coupling.
///
/// Energies are measured from the bare cavity frequency, which is the zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalBathParams {
    pub hopping: f64,
    pub dimerization: f64,
    pub detuning: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibleRegion {
    LowerUpperOnly,
    MiddleOnly,
    Boundary,
}

/// `tanh(1/(2 xi))`: the value of `|dimerization|` separating the outer-gap
/// region from the middle-gap region at interaction length `xi`.
pub fn feasibility_threshold(xi: f64) -> f64 {
    if xi == 0.0 {
        1.0
    } else {
        (0.5 / xi).tanh()
    }
}

/// Classify `(xi, dimerization)` by which bandgaps can realize it.
///
/// Outer gaps produce `|dimerization| <= threshold`, the middle gap
/// `|dimerization| >= threshold`; equality is reported as `Boundary`.
pub fn feasible_region_check(xi: f64, dimerization: f64) -> FeasibleRegion {
    let threshold = feasibility_threshold(xi);
    let d = dimerization.abs();
    if (d - threshold).abs() <= FEASIBILITY_SLACK {
        FeasibleRegion::Boundary
    } else if d < threshold {
        FeasibleRegion::LowerUpperOnly
    } else {
        FeasibleRegion::MiddleOnly
    }
}

/// `e^{-n/xi}` with the exact `xi -> 0` (nearest-neighbour) and
/// `xi -> infinity` (infinite-range) limits.
fn decay(n: u32, xi: f64) -> f64 {
    if n == 0 {
        1.0
    } else if xi == 0.0 {
        0.0
    } else if xi.is_infinite() {
        1.0
    } else {
        (-(n as f64) / xi).exp()
    }
}

fn alternating(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    bandgap: Bandgap,
    xi: f64,
    dimerization: f64,
    jtilde: f64,
    detuning_sign: i8,
}

impl EffectiveCouplings {
    /// Validated constructor. For the outer gaps the detuning sign is fixed by
    /// the gap (`-1` below the bands, `+1` above) and `detuning_sign` must agree
    /// with it; in the middle gap it selects the side of the bath resonance.
    pub fn new(
        bandgap: Bandgap,
        xi: f64,
        dimerization: f64,
        jtilde: f64,
        detuning_sign: i8,
    ) -> Result<Self> {
        if xi.is_nan() || xi < 0.0 {
            return Err(Error::InvalidParameter {
                name: "xi",
                reason: format!("interaction length must be >= 0, got {xi}"),
            });
        }
        if !(dimerization.abs() <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "dimerization",
                reason: format!("must lie in [-1, 1], got {dimerization}"),
            });
        }
        if !(jtilde > 0.0 && jtilde.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "jtilde",
                reason: format!("amplitude must be positive, got {jtilde}"),
            });
        }
        if detuning_sign != 1 && detuning_sign != -1 {
            return Err(Error::InvalidParameter {
                name: "detuning_sign",
                reason: format!("must be +1 or -1, got {detuning_sign}"),
            });
        }
        let expected_sign = match bandgap {
            Bandgap::Lower => Some(-1),
            Bandgap::Upper => Some(1),
            Bandgap::Middle => None,
        };
        if let Some(s) = expected_sign {
            if s != detuning_sign {
                return Err(Error::InvalidParameter {
                    name: "detuning_sign",
                    reason: format!("{bandgap:?} bandgap implies detuning sign {s}"),
                });
            }
        }
        let region = feasible_region_check(xi, dimerization);
        match (bandgap, region) {
            (Bandgap::Middle, _) if dimerization == 0.0 => {
                return Err(Error::DegenerateBath);
            }
            (Bandgap::Middle, FeasibleRegion::LowerUpperOnly) => {
                return Err(Error::InvalidParameter {
                    name: "dimerization",
                    reason: format!(
                        "|{dimerization}| < {:.6} is only reachable in the outer bandgaps",
                        feasibility_threshold(xi)
                    ),
                });
            }
            (Bandgap::Lower | Bandgap::Upper, FeasibleRegion::MiddleOnly) => {
                return Err(Error::InvalidParameter {
                    name: "dimerization",
                    reason: format!(
                        "|{dimerization}| > {:.6} is only reachable in the middle bandgap",
                        feasibility_threshold(xi)
                    ),
                });
            }
            _ => {}
        }
        Ok(EffectiveCouplings { bandgap, xi, dimerization, jtilde, detuning_sign })
    }

    /// Outer-gap constructor with the detuning sign implied by the gap.
    pub fn outer(bandgap: Bandgap, xi: f64, dimerization: f64) -> Result<Self> {
        let sign = if bandgap == Bandgap::Upper { 1 } else { -1 };
        Self::new(bandgap, xi, dimerization, 1.0, sign)
    }

    pub fn bandgap(&self) -> Bandgap {
        self.bandgap
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn dimerization(&self) -> f64 {
        self.dimerization
    }

    pub fn jtilde(&self) -> f64 {
        self.jtilde
    }

    pub fn detuning_sign(&self) -> i8 {
        self.detuning_sign
    }

    /// Ratio of same-sublattice to cross-sublattice couplings.
    pub fn eta(&self) -> f64 {
        (decay(1, self.xi) * (1.0 - self.dimerization * self.dimerization)).sqrt()
    }

    /// `J_n^{pair}` in energy units (includes `J~`).
    pub fn coupling_constant(&self, n: u32, pair: Pair) -> f64 {
        coupling_constant(self, n, pair)
    }
}

/// `J_n^{pair}`; `J_0^{BA} = J_0^{AA} = J_0^{BB} = 0` by definition.
pub fn coupling_constant(c: &EffectiveCouplings, n: u32, pair: Pair) -> f64 {
    let d = c.dimerization;
    let xi = c.xi;
    let jt = c.jtilde;
    let sd = c.detuning_sign as f64;
    if n == 0 && pair != Pair::AB {
        return 0.0;
    }
    match c.bandgap {
        Bandgap::Lower | Bandgap::Upper => match pair {
            Pair::AB => -jt * (1.0 + d) * decay(n, xi),
            Pair::BA => -jt * (1.0 - d) * decay(n - 1, xi),
            Pair::AA | Pair::BB => jt * sd * c.eta() * decay(n - 1, xi),
        },
        Bandgap::Middle => {
            let sgn = d.signum();
            let n = n as i64;
            match pair {
                Pair::AB => jt * sgn * (1.0 + d) * alternating(n) * decay(n as u32, xi),
                Pair::BA => {
                    -jt * sgn * (1.0 - d) * alternating(n - 1) * decay((n - 1) as u32, xi)
                }
                Pair::AA | Pair::BB => {
                    jt * sd * c.eta() * alternating(n - 1) * decay((n - 1) as u32, xi)
                }
            }
        }
    }
}

/// Bath functions `r(z)` and the decaying root `y` at a real detuning in a gap.
#[derive(Debug, Clone, Copy)]
pub struct BathRoots {
    pub r: f64,
    pub y: f64,
    pub bandgap: Bandgap,
}

pub fn classify_detuning(p: &PhysicalBathParams) -> Result<Bandgap> {
    let PhysicalBathParams { hopping: j, dimerization: delta, detuning, coupling: g } = *p;
    if !(j > 0.0) || !(g > 0.0) {
        return Err(Error::InvalidParameter {
            name: "hopping/coupling",
            reason: format!("J and g must be positive (J = {j}, g = {g})"),
        });
    }
    if !(delta.abs() <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "bath dimerization",
            reason: format!("must lie in [-1, 1], got {delta}"),
        });
    }
    if detuning.abs() > 2.0 * j {
        Ok(if detuning < 0.0 { Bandgap::Lower } else { Bandgap::Upper })
    } else if detuning.abs() < 2.0 * j * delta.abs() {
        Ok(Bandgap::Middle)
    } else {
        Err(Error::DetuningInBand { detuning })
    }
}

/// `r(Delta)` and the root `y_+` (middle gap) or `y_-` (outer gaps).
/// `y_+ y_- = 1`, and the selected root is the one with `|y| < 1`.
pub fn bath_roots(p: &PhysicalBathParams) -> Result<BathRoots> {
    let bandgap = classify_detuning(p)?;
    let PhysicalBathParams { hopping: j, dimerization: delta, detuning: z, .. } = *p;
    if (1.0 - delta * delta).abs() < 1e-300 {
        return Err(Error::InvalidParameter {
            name: "bath dimerization",
            reason: "|delta| = 1 decouples the bath into dimers".into(),
        });
    }
    let j2 = j * j;
    let r = ((z * z - 4.0 * j2) * (z * z - 4.0 * j2 * delta * delta)).sqrt();
    let base = z * z - 2.0 * j2 * (1.0 + delta * delta);
    let denom = 2.0 * j2 * (1.0 - delta * delta);
    let y = match bandgap {
        Bandgap::Middle => (base + r) / denom,
        _ => (base - r) / denom,
    };
    Ok(BathRoots { r, y, bandgap })
}

/// Real parts of the collective self-energies at `Delta + i0+`, evaluated
/// straight from the bath Green's function. For `n >= 1`,
/// `Sigma^{BA}_n = Sigma^{AB}_{-n}`; `Sigma^{BB} = Sigma^{AA}`.
pub fn self_energy(p: &PhysicalBathParams, n: u32, pair: Pair) -> Result<f64> {
    let roots = bath_roots(p)?;
    let PhysicalBathParams { hopping: j, dimerization: delta, detuning: z, coupling: g } = *p;
    let sign = if roots.bandgap == Bandgap::Middle { 1.0 } else { -1.0 };
    let y = roots.y;
    let ypow = |k: i64| y.powi(k.unsigned_abs() as i32);
    let n = n as i64;
    let ab = |m: i64| sign * g * g * j * ((1.0 + delta) * ypow(m) + (1.0 - delta) * ypow(m + 1)) / roots.r;
    Ok(match pair {
        Pair::AA | Pair::BB => -sign * g * g * z * ypow(n) / roots.r,
        Pair::AB => ab(n),
        Pair::BA => {
            if n == 0 {
                0.0
            } else {
                ab(-n)
            }
        }
    })
}

/// Map physical bath parameters onto `(bandgap, xi, dimerization, J~, sign)`.
pub fn effective_from_physical(p: &PhysicalBathParams) -> Result<EffectiveCouplings> {
    let roots = bath_roots(p)?;
    let PhysicalBathParams { hopping: j, dimerization: delta, detuning, coupling: g } = *p;
    let ay = roots.y.abs();
    let xi = if ay == 0.0 { 0.0 } else { -1.0 / ay.ln() };
    let ratio = (1.0 - ay) / (1.0 + ay);
    let (dimerization, jtilde) = match roots.bandgap {
        Bandgap::Middle => {
            if delta == 0.0 {
                return Err(Error::DegenerateBath);
            }
            (ratio / delta, g * g * j * (1.0 + ay) * delta.abs() / roots.r)
        }
        _ => (ratio * delta, g * g * j * (1.0 + ay) / roots.r),
    };
    let sign = if detuning < 0.0 { -1 } else { 1 };
    // Guard the feasibility test against round-off at the region boundary.
    let dimerization = dimerization.clamp(-1.0, 1.0);
    let region = feasible_region_check(xi, dimerization);
    let fits = matches!(
        (roots.bandgap, region),
        (_, FeasibleRegion::Boundary)
            | (Bandgap::Middle, FeasibleRegion::MiddleOnly)
            | (Bandgap::Lower | Bandgap::Upper, FeasibleRegion::LowerUpperOnly)
    );
    if !fits {
        return Err(Error::InvalidParameter {
            name: "dimerization",
            reason: "derived couplings fall outside the feasible region".into(),
        });
    }
    Ok(EffectiveCouplings {
        bandgap: roots.bandgap,
        xi,
        dimerization,
        jtilde,
        detuning_sign: sign,
    })
}

/// Dense symmetric `N x N` interaction matrix in units of `J~`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    n: usize,
    boundary: Boundary,
    jtilde: f64,
    n_max: usize,
    entries: Vec<f64>,
}

/// Coupling between `first` and the spin `displacement` sites further along
/// the chain, in units of `J~`.
fn directed_coupling(c: &EffectiveCouplings, first: usize, displacement: usize) -> (u32, f64) {
    let odd = displacement % 2 == 1;
    let (n, pair) = match (first.is_multiple_of(2), odd) {
        (true, true) => ((displacement - 1) / 2, Pair::AB),
        (true, false) => (displacement / 2, Pair::AA),
        (false, true) => (displacement.div_ceil(2), Pair::BA),
        (false, false) => (displacement / 2, Pair::BB),
    };
    (n as u32, coupling_constant(c, n as u32, pair) / c.jtilde)
}

/// Default truncation `min(ceil(30 xi) + 1, N)`.
pub fn default_cutoff(xi: f64, n: usize) -> usize {
    if xi.is_infinite() {
        return n;
    }
    let k = (30.0 * xi).ceil() as usize + 1;
    k.min(n).max(1)
}

#[derive(Debug, Clone, Copy)]
#[derive(Default)]
pub struct MatrixOptions {
    pub n_max: Option<usize>,
    /// Downgrade `CutoffTooSmall` to silent truncation.
    pub allow_truncation: bool,
}


pub fn build_coupling_matrix(
    c: &EffectiveCouplings,
    n: usize,
    boundary: Boundary,
    opts: MatrixOptions,
) -> Result<CouplingMatrix> {
    if n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    if !(2..=1024).contains(&n) {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("chain size must lie in [2, 1024], got {n}"),
        });
    }
    let n_max = opts.n_max.unwrap_or_else(|| default_cutoff(c.xi, n));
    if n_max < 1 {
        return Err(Error::InvalidParameter { name: "n_max", reason: "must be >= 1".into() });
    }
    // The largest cell separation realized on the chain is n/2.
    if n_max < n / 2 && !opts.allow_truncation {
        let tail = decay(n_max as u32, c.xi);
        if tail > TAIL_TOLERANCE {
            return Err(Error::CutoffTooSmall { n_max, tail });
        }
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = j - i;
            let (cells, value) = match boundary {
                Boundary::Obc => directed_coupling(c, i, d),
                Boundary::Pbc => {
                    let back = n - d;
                    if d < back {
                        directed_coupling(c, i, d)
                    } else if back < d {
                        directed_coupling(c, j, back)
                    } else if i % 2 == 0 {
                        // Antipodal pair: counted once, read from the A side.
                        directed_coupling(c, i, d)
                    } else {
                        directed_coupling(c, j, back)
                    }
                }
            };
            let value = if (cells as usize) > n_max || value.abs() < ENTRY_FLOOR {
                0.0
            } else {
                value
            };
            entries[i * n + j] = value;
            entries[j * n + i] = value;
        }
    }
    Ok(CouplingMatrix { n, boundary, jtilde: c.jtilde, n_max, entries })
}

impl CouplingMatrix {
    /// Matrix from explicit entries (units of `J~`), for models that are not
    /// parametrized by a bath, e.g. uniform infinite-range couplings.
    pub fn from_entries(n: usize, boundary: Boundary, jtilde: f64, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, got: entries.len() });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "entries",
                    reason: format!("diagonal entry {i} must vanish"),
                });
            }
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::InvalidParameter {
                        name: "entries",
                        reason: format!("matrix not symmetric at ({i}, {j})"),
                    });
                }
            }
        }
        Ok(CouplingMatrix { n, boundary, jtilde, n_max: n, entries })
    }

    /// Same-value couplings between all pairs, `J_ij = value` for `i != j`.
    pub fn uniform(n: usize, value: f64) -> Self {
        let mut entries = vec![value; n * n];
        for i in 0..n {
            entries[i * n + i] = 0.0;
        }
        CouplingMatrix { n, boundary: Boundary::Obc, jtilde: 1.0, n_max: n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn jtilde(&self) -> f64 {
        self.jtilde
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Nonzero couplings `(i, j, J_ij)` with `i < j`.
    pub fn nonzero_pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let boundary = match self.boundary {
            Boundary::Obc => "obc",
            Boundary::Pbc => "pbc",
        };
        serde_json::json!({
            "n": self.n,
            "boundary": boundary,
            "jtilde": self.jtilde,
            "entries": self.entries,
        })
    }
}
