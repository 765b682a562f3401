//! Closed-form minimal decomposition for affine maps `F(x) = alpha x + beta`.
//!
//! Used standalone and as an independent oracle against the generic
//! decomposition engine. A translation (`alpha = 1`) leaves every ball of
//! radius one invariant and acts on each as the full odometer of type
//! `(1, e)` anchored at level 0. Otherwise the map is conjugate to
//! multiplication by `alpha` around the fixed point `beta/(1-alpha)` and the
//! dynamics is decided by where `alpha` sits: below the unit sphere (an
//! attracting fixed point), among the roots of unity (pure rotation), or a
//! unit of infinite order, in which case each invariant sphere decomposes
//! into finitely many clopen sets of an explicitly computable odometer type.

use crate::engine::EVector;
use crate::error::{Error, Result};
use crate::ring::{Element, RingSpec, Valuation};

/// Exactness of a root-of-unity decision at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    /// Input was an exact literal and the decision is a theorem.
    Exact,
    /// Decision holds at working precision only.
    AtPrecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootOfUnity {
    Yes { order: u64 },
    No,
    Unknown,
}

/// Where the fixed point of the conjugated multiplication sits: an element
/// of `O_K`, or a point of `K` with negative valuation described by its
/// valuation alone.
#[derive(Debug, Clone)]
pub enum FixedPoint {
    Integral(Element),
    Outside { valuation: i64 },
}

/// Full analysis of one affine map.
#[derive(Debug, Clone)]
pub struct AffineReport {
    pub case: AffineCase,
    /// Present when `alpha != 1`.
    pub fixed_point: Option<FixedPoint>,
}

#[derive(Debug, Clone)]
pub enum AffineCase {
    /// `alpha = 1, beta != 0`: every radius-one ball is invariant and of
    /// type `(1, e)` at level 0.
    Translation { evec: EVector },
    /// `val(alpha) > 0`: attracting fixed point with basin the whole space.
    Attractor,
    /// `alpha` a root of unity of the given order: every orbit is periodic.
    RootOfUnity { ell: u64, certainty: Certainty },
    /// `alpha` a unit of infinite order: each invariant sphere splits into
    /// `component_count` clopen sets of type `(ell, evec)` at level
    /// `v_star = val(alpha^ell - 1)`.
    UnitSpheres {
        ell: u64,
        v_star: u32,
        evec: EVector,
        component_count: u64,
        certainty: Certainty,
    },
}

impl AffineCase {
    pub fn name(&self) -> &'static str {
        match self {
            AffineCase::Translation { .. } => "translation",
            AffineCase::Attractor => "attractor",
            AffineCase::RootOfUnity { .. } => "root_of_unity",
            AffineCase::UnitSpheres { .. } => "unit_spheres",
        }
    }
}

/// Order of `alpha` in the residue-field multiplicative group.
pub fn order_in_residue(ring: &RingSpec, alpha: &Element) -> Result<u64> {
    if !matches!(ring.val(alpha), Valuation::Finite(0)) {
        return Err(Error::NotAUnit);
    }
    ring.fq().order(&ring.residue(alpha))
}

/// Tests whether a unit is a root of unity.
///
/// Walks the ladder `alpha^(ell p^t)`: once `val(alpha^(ell p^t) - 1)`
/// lands strictly above `e/(p-1)` the surrounding disk is torsion-free and
/// the answer is a certified no. A power that vanishes to full precision is
/// a yes for exact integer inputs whose size excludes a nonzero value, and
/// unknown otherwise.
pub fn is_root_of_unity(ring: &RingSpec, alpha: &Element, exact_int: Option<i64>) -> Result<RootOfUnity> {
    if !matches!(ring.val(alpha), Valuation::Finite(0)) {
        return Err(Error::NotAUnit);
    }
    let e = ring.e() as u64;
    let p = ring.p();
    let ell = order_in_residue(ring, alpha)?;
    let mut z = ring.pow(alpha, ell as u128)?;
    let mut exp: u128 = ell as u128;
    // gamma strictly increases along the ladder, so the loop is short
    for _ in 0..=(ring.precision() + 2) {
        let diff = ring.sub(&z, &ring.one())?;
        match ring.val(&diff) {
            Valuation::AtLeast(_) => {
                // vanishes to full precision
                if let Some(a) = exact_int {
                    // |a^exp - 1| < p^(N/e) forces exact equality
                    let bits_bound = ring.precision() as f64 / e as f64 * (p as f64).log2();
                    let bits_val = exp as f64 * (a.unsigned_abs().max(1) as f64).log2() + 1.0;
                    if bits_val < bits_bound {
                        return Ok(RootOfUnity::Yes { order: smallest_order(ring, alpha, exp)? });
                    }
                }
                return Ok(RootOfUnity::Unknown);
            }
            Valuation::Finite(gamma) => {
                // torsion-free disk: val(x - 1) > e/(p-1) excludes p-power torsion
                if gamma as u64 * (p - 1) > e {
                    return Ok(RootOfUnity::No);
                }
            }
        }
        z = ring.pow(&z, p as u128)?;
        exp = exp.saturating_mul(p as u128);
    }
    Ok(RootOfUnity::Unknown)
}

/// Trims a verified annihilating exponent to the least one.
fn smallest_order(ring: &RingSpec, alpha: &Element, exp: u128) -> Result<u64> {
    let mut best = exp as u64;
    let mut d = 1;
    while (d * d) as u128 <= exp {
        if exp.is_multiple_of(d as u128) {
            for cand in [d, (exp / d as u128) as u64] {
                if cand < best {
                    let z = ring.pow(alpha, cand as u128)?;
                    if ring.is_zero_at_prec(&ring.sub(&z, &ring.one())?) {
                        best = cand;
                    }
                }
            }
        }
        d += 1;
    }
    Ok(best)
}

/// The tail-stabilizing vector `E` of a unit of infinite order:
/// `E_k = val((alpha^(ell p^(k+1)) - 1) / (alpha^(ell p^k) - 1))`,
/// computed as a valuation difference along the power ladder. Stabilizes at
/// `e` once the ladder valuation exceeds `e/(p-1)`.
pub fn e_vector(ring: &RingSpec, alpha: &Element, ell: u64, depth: usize) -> Result<EVector> {
    let e = ring.e() as u32;
    let p = ring.p();
    let mut gammas: Vec<u32> = Vec::new();
    let mut z = ring.pow(alpha, ell as u128)?;
    let mut prefix = Vec::new();
    let mut k = 0usize;
    loop {
        let diff = ring.sub(&z, &ring.one())?;
        let gamma = match ring.val(&diff) {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(m) => {
                return Err(Error::RootOfUnitySuspected(format!(
                    "alpha^(ell p^{k}) = 1 to precision {m}"
                )));
            }
        };
        gammas.push(gamma);
        if gammas.len() >= 2 {
            let ek = gamma - gammas[gammas.len() - 2];
            prefix.push(ek);
        }
        // stabilized: once gamma(p-1) > e every later entry equals e
        if gamma as u64 * (p - 1) > e as u64 && gammas.len() >= 2 {
            break;
        }
        if gammas.len() > depth + 1 {
            break;
        }
        if gamma + e + 2 > ring.precision() {
            return Err(Error::PrecisionExhausted(format!(
                "ladder valuation {gamma} leaves no room at precision {}",
                ring.precision()
            )));
        }
        z = ring.pow(&z, p as u128)?;
        k += 1;
    }
    // drop trailing entries equal to e; they are the eventual tail
    while prefix.last() == Some(&e) {
        prefix.pop();
    }
    Ok(EVector::new(prefix, e))
}

/// Number of clopen minimal-type sets per invariant unit sphere:
/// `(p^f - 1) p^((v*-1) f) / ell`.
pub fn component_count(ring: &RingSpec, ell: u64, v_star: u32) -> u64 {
    let q = ring.fq().card();
    ((q - 1) / ell) * q.pow(v_star - 1)
}

/// Full classification of `F(x) = alpha x + beta`.
///
/// `exact_int_alpha` carries the integer literal when `alpha` was given as
/// one, making root-of-unity answers exact.
pub fn affine_classify(
    ring: &RingSpec,
    alpha: &Element,
    beta: &Element,
    depth: usize,
    exact_int_alpha: Option<i64>,
) -> Result<AffineReport> {
    let alpha_is_zero = ring.is_zero_at_prec(alpha);
    if alpha_is_zero {
        return Err(Error::DegenerateMap("alpha = 0 collapses the space".into()));
    }
    let alpha_minus_1 = ring.sub(alpha, &ring.one())?;
    let alpha_is_one = ring.is_zero_at_prec(&alpha_minus_1);
    let beta_is_zero = ring.is_zero_at_prec(beta);
    if alpha_is_one && beta_is_zero {
        return Err(Error::DegenerateMap("the identity map has no decomposition".into()));
    }

    if alpha_is_one {
        return Ok(AffineReport {
            case: AffineCase::Translation { evec: EVector::new(vec![], ring.e() as u32) },
            fixed_point: None,
        });
    }

    // fixed point beta / (1 - alpha)
    let one_minus_alpha = ring.neg(&alpha_minus_1)?;
    let v_den = ring.val(&one_minus_alpha).min_with(ring.precision());
    let fixed_point = if beta_is_zero {
        Some(FixedPoint::Integral(ring.zero()))
    } else {
        let v_num = match ring.val(beta) {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(m) => m,
        };
        if v_num >= v_den {
            let num = ring.shift_right(beta, v_den)?;
            let den_unit = ring.shift_right(&one_minus_alpha, v_den)?;
            Some(FixedPoint::Integral(ring.mul(&num, &ring.invert(&den_unit)?)?))
        } else {
            Some(FixedPoint::Outside { valuation: v_num as i64 - v_den as i64 })
        }
    };

    let case = match ring.val(alpha) {
        Valuation::AtLeast(_) => unreachable!("alpha = 0 was rejected"),
        Valuation::Finite(v) if v > 0 => AffineCase::Attractor,
        _ => {
            let ell = order_in_residue(ring, alpha)?;
            match is_root_of_unity(ring, alpha, exact_int_alpha)? {
                RootOfUnity::Yes { order } => AffineCase::RootOfUnity {
                    ell: order,
                    certainty: Certainty::Exact,
                },
                answer => {
                    let certainty = match answer {
                        RootOfUnity::No => Certainty::Exact,
                        _ => Certainty::AtPrecision,
                    };
                    let al = ring.pow(alpha, ell as u128)?;
                    let v_star = match ring.val(&ring.sub(&al, &ring.one())?) {
                        Valuation::Finite(v) => v,
                        Valuation::AtLeast(m) => {
                            return Err(Error::RootOfUnitySuspected(format!(
                                "alpha^ell = 1 to precision {m}; cannot anchor the sphere decomposition"
                            )));
                        }
                    };
                    AffineCase::UnitSpheres {
                        ell,
                        v_star,
                        evec: e_vector(ring, alpha, ell, depth)?,
                        component_count: component_count(ring, ell, v_star),
                        certainty,
                    }
                }
            }
        }
    };
    Ok(AffineReport { case, fixed_point })
}
