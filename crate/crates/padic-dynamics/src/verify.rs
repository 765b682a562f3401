//! Seeded property suites: the machine-checkable invariants of every module,
//! run against a configurable ring set with reproducible randomness.
//!
//! Each property reports pass/fail with a counterexample description on
//! failure. The affine cross-check helpers here are shared with the
//! acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::affine::{self, AffineCase};
use crate::dynamics::{
    self, classify, find_cycles, induce, invariants, invariants_at, lift_with_class,
};
use crate::engine::{self, decompose, EngineConfig, Verdict};
use crate::error::{Error, Result};
use crate::fq::FqElem;
use crate::ring::{standard_ring, Element, RingSpec, Valuation};
use crate::series::ConvergentSeries;

/// Default ring set `(p, e, f)` for the verification suites.
pub const DEFAULT_RINGS: &[(u64, usize, usize)] =
    &[(2, 1, 1), (3, 1, 1), (2, 2, 1), (2, 1, 2)];

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub rings: Vec<(u64, usize, usize)>,
    /// Named fault to inject, demonstrating counterexample reporting.
    pub inject_fault: Option<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 1, rings: DEFAULT_RINGS.to_vec(), inject_fault: None }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "all_pass": self.all_pass(),
            "properties": self.results.iter().map(|r| json!({
                "name": r.name,
                "status": if r.passed { "pass" } else { "fail" },
                "cases": r.cases,
                "counterexample": r.counterexample,
            })).collect::<Vec<_>>(),
        })
    }
}

type PropertyFn = fn(&VerifyConfig) -> Result<(u64, Option<String>)>;

/// Runs every property suite.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut results = Vec::new();
    let props: &[(&str, PropertyFn)] = &[
        ("ring_axioms", prop_ring_axioms),
        ("valuation_rules", prop_valuation_rules),
        ("digit_roundtrip", prop_digit_roundtrip),
        ("qp_integer_oracle", prop_qp_integer_oracle),
        ("representative_relabeling", prop_representative_relabeling),
        ("eval_two_routes", prop_eval_two_routes),
        ("compose_pointwise", prop_compose_pointwise),
        ("chain_rule", prop_chain_rule),
        ("derivative_finite_difference", prop_derivative_finite_difference),
        ("iterate_additivity", prop_iterate_additivity),
        ("weierstrass_multiply_back", prop_weierstrass_multiply_back),
        ("lift_congruences", prop_lift_congruences),
        ("displacement_shift_congruence", prop_displacement_shift_congruence),
        ("lift_census_oracle", prop_lift_census_oracle),
        ("witness_independence", prop_witness_independence),
        ("partition_census", prop_partition_census),
        ("prediction_soundness", prop_prediction_soundness),
        ("component_growth", prop_component_growth),
        ("periodic_point_bound", prop_periodic_point_bound),
        ("affine_engine_agreement", prop_affine_engine_agreement),
        ("conjugacy_invariance", prop_conjugacy_invariance),
        ("eventual_stabilization", prop_eventual_stabilization),
    ];
    for (name, prop) in props {
        let outcome = prop(cfg);
        let result = match outcome {
            Ok((cases, None)) => {
                PropertyResult { name: name.to_string(), passed: true, cases, counterexample: None }
            }
            Ok((cases, Some(ce))) => PropertyResult {
                name: name.to_string(),
                passed: false,
                cases,
                counterexample: Some(ce),
            },
            Err(e) => PropertyResult {
                name: name.to_string(),
                passed: false,
                cases: 0,
                counterexample: Some(format!("error: {e}")),
            },
        };
        results.push(result);
    }
    Ok(VerifyReport { seed: cfg.seed, results })
}

fn rng_for(cfg: &VerifyConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(salt))
}

fn rings_for(cfg: &VerifyConfig, precision_for: impl Fn(usize) -> u32) -> Result<Vec<RingSpec>> {
    cfg.rings
        .iter()
        .map(|&(p, e, f)| standard_ring(p, e, f, precision_for(e)))
        .collect()
}

/// Random exact element with the given number of leading digits drawn
/// uniformly, zeros after.
pub fn random_element(ring: &RingSpec, rng: &mut ChaCha8Rng, digits: u32) -> Element {
    let q = ring.fq().card();
    let ds: Vec<FqElem> = (0..digits)
        .map(|_| ring.fq().unrank(rng.gen_range(0..q)))
        .collect();
    ring.from_digits(&ds)
}

/// Random integral polynomial of degree `1..=max_deg`, biased toward small
/// integer coefficients; never the identity map.
pub fn random_poly(ring: &RingSpec, rng: &mut ChaCha8Rng, max_deg: usize) -> ConvergentSeries {
    loop {
        let deg = rng.gen_range(1..=max_deg);
        let mut coeffs = Vec::with_capacity(deg + 1);
        for _ in 0..=deg {
            let c = match rng.gen_range(0..10) {
                0..=3 => ring.integer(rng.gen_range(-3i64..=3) as i128),
                4..=6 => random_element(ring, rng, 4),
                7..=8 => {
                    let u = random_element(ring, rng, 3);
                    ring.mul(&u, &ring.pi()).expect("same ring")
                }
                _ => ring.zero(),
            };
            coeffs.push(c);
        }
        if ring.is_zero_at_prec(&coeffs[deg]) {
            continue;
        }
        let phi = ConvergentSeries::poly(ring, coeffs).expect("same ring");
        let is_identity = phi.degree() == 1
            && ring.is_zero_at_prec(&phi.coeff(ring, 0))
            && ring.is_zero_at_prec(
                &ring.sub(&phi.coeff(ring, 1), &ring.one()).expect("same ring"),
            );
        if !is_identity {
            return phi;
        }
    }
}

// ---- arithmetic properties ----

fn prop_ring_axioms(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 1);
    let rings = rings_for(cfg, |_| 12)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..20 {
            let a = random_element(ring, &mut rng, 12);
            let b = random_element(ring, &mut rng, 12);
            let c = random_element(ring, &mut rng, 12);
            let assoc_l = ring.add(&ring.add(&a, &b)?, &c)?;
            let assoc_r = ring.add(&a, &ring.add(&b, &c)?)?;
            let dist_l = ring.mul(&a, &ring.add(&b, &c)?)?;
            let dist_r = ring.add(&ring.mul(&a, &b)?, &ring.mul(&a, &c)?)?;
            let mul_assoc_l = ring.mul(&ring.mul(&a, &b)?, &c)?;
            let mul_assoc_r = ring.mul(&a, &ring.mul(&b, &c)?)?;
            let comm_add = ring.eq_repr(&ring.add(&a, &b)?, &ring.add(&b, &a)?);
            let comm_mul = ring.eq_repr(&ring.mul(&a, &b)?, &ring.mul(&b, &a)?);
            let ok = ring.eq_repr(&assoc_l, &assoc_r)
                && ring.eq_repr(&dist_l, &dist_r)
                && ring.eq_repr(&mul_assoc_l, &mul_assoc_r)
                && comm_add
                && comm_mul;
            cases += 1;
            if !ok {
                return Ok((cases, Some(format!("ring axiom failed over p={}", ring.p()))));
            }
        }
    }
    Ok((cases, None))
}

fn prop_valuation_rules(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 2);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..30 {
            let shift_a = rng.gen_range(0..3);
            let shift_b = rng.gen_range(0..3);
            let mut a = random_element(ring, &mut rng, 10);
            let mut b = random_element(ring, &mut rng, 10);
            for _ in 0..shift_a {
                a = ring.mul_by_pi(&a)?;
            }
            for _ in 0..shift_b {
                b = ring.mul_by_pi(&b)?;
            }
            cases += 1;
            let (va, vb) = (ring.val(&a), ring.val(&b));
            if let (Valuation::Finite(x), Valuation::Finite(y)) = (va, vb) {
                if x + y + 2 < ring.precision() {
                    match ring.val(&ring.mul(&a, &b)?) {
                        Valuation::Finite(v) if v == x + y => {}
                        other => {
                            return Ok((
                                cases,
                                Some(format!(
                                    "val(ab) = {other:?}, expected {} over p={}",
                                    x + y,
                                    ring.p()
                                )),
                            ));
                        }
                    }
                }
                let vs = ring.val(&ring.add(&a, &b)?);
                let lower = x.min(y);
                if !vs.ge(lower) {
                    return Ok((cases, Some(format!("val(a+b) < min over p={}", ring.p()))));
                }
                if x != y {
                    match vs {
                        Valuation::Finite(v) if v == lower => {}
                        other => {
                            return Ok((
                                cases,
                                Some(format!("ultrametric equality broken: {other:?}")),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_digit_roundtrip(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 3);
    let rings = rings_for(cfg, |_| 12)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..30 {
            let a = random_element(ring, &mut rng, 12);
            let ds = ring.digits(&a, 12)?;
            let back = ring.from_digits(&ds);
            cases += 1;
            if !ring.eq_mod(&a, &back, 12)? {
                return Ok((cases, Some(format!("digit roundtrip failed over p={}", ring.p()))));
            }
            let n = rng.gen_range(1..=6);
            let class = ring.reduce(&a, n)?;
            if ring.reduce(&ring.lift(&class), n)? != class {
                return Ok((cases, Some("reduce after lift is not the identity".into())));
            }
        }
    }
    Ok((cases, None))
}

fn prop_qp_integer_oracle(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 4);
    let mut cases = 0;
    for &(p, e, f) in cfg.rings.iter().filter(|&&(_, e, f)| e == 1 && f == 1) {
        let n: u32 = 12;
        let ring = standard_ring(p, e, f, n)?;
        let pn = (p as u128).pow(n);
        for _ in 0..40 {
            let x = rng.gen_range(0..pn);
            let y = rng.gen_range(0..pn);
            let a = ring.integer(x as i128);
            let b = ring.integer(y as i128);
            cases += 1;
            let sum = ring.add(&a, &b)?;
            let prod = ring.mul(&a, &b)?;
            if ring.rank_of(&sum, n)? as u128 != (x + y) % pn {
                return Ok((cases, Some(format!("integer add mismatch mod {p}^{n}"))));
            }
            if ring.rank_of(&prod, n)? as u128 != (x * y) % pn {
                return Ok((cases, Some(format!("integer mul mismatch mod {p}^{n}"))));
            }
            if x % p as u128 != 0 {
                let inv = ring.invert(&a)?;
                let check = (ring.rank_of(&inv, n)? as u128 * x) % pn;
                if check != 1 {
                    return Ok((cases, Some(format!("integer inverse mismatch mod {p}^{n}"))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_representative_relabeling(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // the induced map is independent of the chosen coset representatives:
    // lifting each residue through a shifted section gives the same table
    let mut rng = rng_for(cfg, 5);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        let phi = random_poly(ring, &mut rng, 4);
        for level in 1..=3u32 {
            let count = ring.residue_count(level).unwrap();
            if count > 512 {
                continue;
            }
            cases += 1;
            let canonical = induce(ring, &phi, level, 1 << 20)?;
            for r in 0..count {
                let base = ring.lift_rank(r, level);
                let noise = random_element(ring, &mut rng, 4);
                let mut shift = noise;
                for _ in 0..level {
                    shift = ring.mul_by_pi(&shift)?;
                }
                let alt = ring.add(&base, &shift)?;
                let img = ring.rank_of(&phi.eval(ring, &alt)?, level)?;
                if img != canonical.table[r as usize] as u64 {
                    return Ok((
                        cases,
                        Some(format!(
                            "induced map differs under representative change at level {level}, residue {r}, p={}",
                            ring.p()
                        )),
                    ));
                }
            }
        }
    }
    Ok((cases, None))
}

// ---- series properties ----

fn prop_eval_two_routes(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 6);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..10 {
            // a 20-term series, summed by Horner and by naive powers
            let phi = random_poly(ring, &mut rng, 19);
            let x = random_element(ring, &mut rng, 10);
            let mut acc = ring.zero();
            let mut xp = ring.one();
            for c in phi.coeffs() {
                acc = ring.add(&acc, &ring.mul(c, &xp)?)?;
                xp = ring.mul(&xp, &x)?;
            }
            let horner = phi.eval(ring, &x)?;
            cases += 1;
            if !ring.eq_mod(&horner, &acc, 12)? {
                return Ok((cases, Some(format!("two evaluation routes differ over p={}", ring.p()))));
            }
        }
    }
    Ok((cases, None))
}

fn prop_compose_pointwise(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 7);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..6 {
            let phi = random_poly(ring, &mut rng, 3);
            let psi = random_poly(ring, &mut rng, 3);
            let comp = phi.compose(ring, &psi)?;
            for _ in 0..10 {
                let x = random_element(ring, &mut rng, 10);
                let direct = phi.eval(ring, &psi.eval(ring, &x)?)?;
                let via = comp.eval(ring, &x)?;
                cases += 1;
                if !ring.eq_mod(&direct, &via, 12)? {
                    return Ok((cases, Some(format!("composition differs pointwise, p={}", ring.p()))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_chain_rule(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 8);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..6 {
            let phi = random_poly(ring, &mut rng, 3);
            let psi = random_poly(ring, &mut rng, 3);
            let lhs = phi.compose(ring, &psi)?.derivative(ring)?;
            let dphi = phi.derivative(ring)?;
            let dpsi = psi.derivative(ring)?;
            for _ in 0..5 {
                let x = random_element(ring, &mut rng, 10);
                let left = lhs.eval(ring, &x)?;
                let right =
                    ring.mul(&dphi.eval(ring, &psi.eval(ring, &x)?)?, &dpsi.eval(ring, &x)?)?;
                cases += 1;
                if !ring.eq_mod(&left, &right, 12)? {
                    return Ok((cases, Some(format!("chain rule broken at a point, p={}", ring.p()))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_derivative_finite_difference(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // (phi(x + pi^m) - phi(x - pi^m)) / (2 pi^m) matches phi'(x) to m-1
    // digits for odd p, where 2 is a unit
    let mut rng = rng_for(cfg, 9);
    let mut cases = 0;
    for &(p, e, f) in cfg.rings.iter().filter(|&&(p, _, _)| p > 2) {
        let ring = standard_ring(p, e, f, 20)?;
        for _ in 0..10 {
            let phi = random_poly(&ring, &mut rng, 5);
            let dphi = phi.derivative(&ring)?;
            let x = random_element(&ring, &mut rng, 8);
            let m = 6u32;
            let pim = ring.pow(&ring.pi(), m as u128)?;
            let up = phi.eval(&ring, &ring.add(&x, &pim)?)?;
            let dn = phi.eval(&ring, &ring.sub(&x, &pim)?)?;
            let num = ring.sub(&up, &dn)?;
            let half = ring.invert(&ring.integer(2))?;
            let quot = ring.mul(&ring.shift_right(&num, m)?, &half)?;
            let exact = dphi.eval(&ring, &x)?;
            cases += 1;
            if !ring.eq_mod(&quot, &exact, m - 1)? {
                return Ok((cases, Some(format!("finite difference disagrees with derivative, p={p}"))));
            }
        }
    }
    Ok((cases, None))
}

fn prop_iterate_additivity(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 10);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..4 {
            let phi = random_poly(ring, &mut rng, 2);
            let it3 = phi.iterate(ring, 3)?;
            let it2 = phi.iterate(ring, 2)?;
            let combined = it2.compose(ring, &phi)?;
            for _ in 0..5 {
                let x = random_element(ring, &mut rng, 8);
                cases += 1;
                let lhs = it3.eval(ring, &x)?;
                let rhs = combined.eval(ring, &x)?;
                let orbit = phi.eval_iterated(ring, &x, 3)?;
                if !ring.eq_mod(&lhs, &rhs, 10)? || !ring.eq_mod(&lhs, &orbit, 10)? {
                    return Ok((cases, Some(format!("iterate additivity broken, p={}", ring.p()))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_weierstrass_multiply_back(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 11);
    let rings = rings_for(cfg, |_| 14)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..8 {
            let phi = random_wideg_series(ring, &mut rng, 6);
            let (g, h) = match phi.weierstrass_factor(ring) {
                Ok(pair) => pair,
                Err(Error::AllCoefficientsSmall) => continue,
                Err(e) => return Err(e),
            };
            let back = g.mul(ring, &h)?;
            cases += 1;
            for i in 0..=phi.degree().max(back.degree()) {
                if !ring.eq_mod(&back.coeff(ring, i), &phi.coeff(ring, i), 12)? {
                    return Ok((
                        cases,
                        Some(format!("g*h differs from phi at coefficient {i}, p={}", ring.p())),
                    ));
                }
            }
            for _ in 0..5 {
                let x = random_element(ring, &mut rng, 10);
                if ring.val(&h.eval(ring, &x)?) != Valuation::Finite(0) {
                    return Ok((cases, Some(format!("cofactor vanishes at a point, p={}", ring.p()))));
                }
            }
        }
    }
    Ok((cases, None))
}

/// Random series with finite Weierstrass degree at most `max_wideg`.
pub fn random_wideg_series(
    ring: &RingSpec,
    rng: &mut ChaCha8Rng,
    max_wideg: usize,
) -> ConvergentSeries {
    let j = rng.gen_range(0..=max_wideg);
    let extra = rng.gen_range(0..4);
    let mut coeffs = Vec::with_capacity(j + extra + 1);
    for _ in 0..j {
        let c = match rng.gen_range(0..3) {
            0 => random_element(ring, rng, 6),
            1 => ring.mul(&random_element(ring, rng, 4), &ring.pi()).expect("same ring"),
            _ => ring.integer(rng.gen_range(-4i64..=4) as i128),
        };
        coeffs.push(c);
    }
    // a unit at index j, non-units above
    let mut unit = random_element(ring, rng, 6);
    while !matches!(ring.val(&unit), Valuation::Finite(0)) {
        unit = random_element(ring, rng, 6);
    }
    coeffs.push(unit);
    for _ in 0..extra {
        let c = ring.mul(&random_element(ring, rng, 4), &ring.pi()).expect("same ring");
        coeffs.push(c);
    }
    ConvergentSeries::poly(ring, coeffs).expect("same ring")
}

// ---- finite-dynamics properties ----

fn engine_precision(e: usize) -> u32 {
    2 * 6 + e as u32 + 2
}

fn prop_lift_congruences(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    run_lift_congruences(cfg, 40)
}

/// Shared with the acceptance suite: checks the lift congruences
/// `a_(n+1) = a_n^r  (mod pi^n)` and
/// `pi b_(n+1) = b_n (1 + a_n + ... + a_n^(r-1))  (mod pi^n)`
/// on seeded (map, cycle, lift) triples.
pub fn run_lift_congruences(cfg: &VerifyConfig, triples: u64) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 12);
    let rings = rings_for(cfg, |e| 2 * 4 + e as u32 + 4)?;
    let mut cases = 0;
    while cases < triples {
        for ring in &rings {
            if cases >= triples {
                break;
            }
            let phi = random_poly(ring, &mut rng, 5);
            let level = rng.gen_range(1..=3u32);
            let map = match induce(ring, &phi, level, 1 << 16) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let set = find_cycles(&map);
            if set.cycles.is_empty() {
                continue;
            }
            let cycle = &set.cycles[rng.gen_range(0..set.cycles.len())];
            let inv_n = invariants(ring, &phi, cycle)?;
            let class = classify(ring, &inv_n);
            let lifts = lift_with_class(ring, &phi, cycle, &class)?;
            if lifts.cycles.is_empty() {
                continue;
            }
            let tilde = &lifts.cycles[rng.gen_range(0..lifts.cycles.len())];
            let r = tilde.len() / cycle.len();
            // both invariant packs evaluated at the same witness, inside
            // the lift's clopen set
            let witness = tilde.witness(ring);
            let at_n = invariants_at(ring, &phi, cycle.len(), level, &witness)?;
            let at_n1 = invariants_at(ring, &phi, tilde.len(), level + 1, &witness)?;
            cases += 1;

            let a_pow = ring.pow(&at_n.a, r as u128)?;
            if !ring.eq_mod(&at_n1.a, &a_pow, level)? {
                return Ok((
                    cases,
                    Some(format!(
                        "multiplier congruence fails: p={}, level {level}, k={}, r={r}",
                        ring.p(),
                        cycle.len()
                    )),
                ));
            }
            let mut geom = ring.zero();
            let mut apow = ring.one();
            for _ in 0..r {
                geom = ring.add(&geom, &apow)?;
                apow = ring.mul(&apow, &at_n.a)?;
            }
            let lhs = ring.mul(&ring.pi(), &at_n1.b)?;
            let rhs = ring.mul(&at_n.b, &geom)?;
            if !ring.eq_mod(&lhs, &rhs, level)? {
                return Ok((
                    cases,
                    Some(format!(
                        "displacement congruence fails: p={}, level {level}, k={}, r={r}",
                        ring.p(),
                        cycle.len()
                    )),
                ));
            }
        }
    }
    Ok((cases, None))
}

fn prop_displacement_shift_congruence(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // b_n(x) = b_n(x + t pi^n)  (mod pi^A), A = min(val(a_n - 1), n)
    let mut rng = rng_for(cfg, 13);
    let rings = rings_for(cfg, |e| 2 * 3 + e as u32 + 4)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..8 {
            let phi = random_poly(ring, &mut rng, 5);
            let level = rng.gen_range(1..=2u32);
            let map = match induce(ring, &phi, level, 1 << 16) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let set = find_cycles(&map);
            if set.cycles.is_empty() {
                continue;
            }
            let cycle = &set.cycles[rng.gen_range(0..set.cycles.len())];
            let x = cycle.witness(ring);
            let base = invariants_at(ring, &phi, cycle.len(), level, &x)?;
            let a_cap = base.a_hat;
            let q = ring.fq().card();
            for t in 0..q {
                let digit = ring.fq().unrank(t);
                let mut shift = ring.lift_digit(&digit);
                for _ in 0..level {
                    shift = ring.mul_by_pi(&shift)?;
                }
                let shifted =
                    invariants_at(ring, &phi, cycle.len(), level, &ring.add(&x, &shift)?)?;
                cases += 1;
                if !ring.eq_mod(&base.b, &shifted.b, a_cap)? {
                    return Ok((
                        cases,
                        Some(format!(
                            "displacement shift congruence fails at level {level}, p={}",
                            ring.p()
                        )),
                    ));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_lift_census_oracle(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    run_lift_census_oracle(cfg, 4, 4, 1 << 16)
}

/// Shared with the acceptance suite: for seeded maps, the classification
/// census prediction of every cycle equals the exhaustive functional-graph
/// enumeration at the next level, and the classification inferred from the
/// observed census equals the invariant-based one.
pub fn run_lift_census_oracle(
    cfg: &VerifyConfig,
    maps_per_ring: usize,
    max_level: u32,
    cap: u64,
) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 14);
    let rings = rings_for(cfg, |e| 2 * (max_level + 1) + e as u32 + 2)?;
    let mut cases = 0;
    let fault = cfg.inject_fault.as_deref() == Some("classify");
    for ring in &rings {
        for _ in 0..maps_per_ring {
            let phi = random_poly(ring, &mut rng, 5);
            if let Some(ce) = census_oracle_one_map(ring, &phi, max_level, cap, fault, &mut cases)? {
                return Ok((cases, Some(ce)));
            }
        }
    }
    Ok((cases, None))
}

/// Runs the census oracle for one map across levels `1..=max_level`,
/// comparing witness-based predictions against full-table enumeration.
pub fn census_oracle_one_map(
    ring: &RingSpec,
    phi: &ConvergentSeries,
    max_level: u32,
    cap: u64,
    inject_fault: bool,
    cases: &mut u64,
) -> Result<Option<String>> {
    let mut maps = Vec::new();
    for n in 1..=max_level {
        match induce(ring, phi, n, cap) {
            Ok(m) => maps.push(m),
            Err(Error::LevelTooLarge { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    for window in maps.windows(2) {
        let (lo, hi) = (&window[0], &window[1]);
        let n = lo.level;
        let set = find_cycles(lo);
        let hi_set = find_cycles(hi);
        for cycle in &set.cycles {
            *cases += 1;
            let inv = invariants(ring, phi, cycle)?;
            let class = classify(ring, &inv);
            let (mut expected, expect_tails) =
                dynamics::predicted_census(ring, &class, cycle.len());
            if inject_fault {
                // deliberately corrupt the prediction to demonstrate
                // counterexample reporting
                expected[0].0 += 1;
            }
            expected.retain(|&(_, c)| c > 0);
            expected.sort_unstable();

            // oracle route: cycles of the full level-(n+1) table lying in
            // the clopen set of this cycle
            let stride = ring.residue_count(n).unwrap();
            let member = |rank: u64| cycle.reps.contains(&(rank % stride));
            let mut got: Vec<(u64, u64)> = Vec::new();
            for c in &hi_set.cycles {
                if member(c.reps[0]) {
                    match got.iter_mut().find(|(len, _)| *len == c.len()) {
                        Some(e) => e.1 += 1,
                        None => got.push((c.len(), 1)),
                    }
                }
            }
            got.sort_unstable();
            let tails_in = hi_set.tails.iter().any(|&(rank, _)| member(rank));
            if got != expected || tails_in != expect_tails {
                return Ok(Some(format!(
                    "census mismatch at level {n}, cycle at rank {}: predicted {:?} (tails {}), table {:?} (tails {}), p={} e={} f={}",
                    cycle.reps[0],
                    expected,
                    expect_tails,
                    got,
                    tails_in,
                    ring.p(),
                    ring.e(),
                    ring.f()
                )));
            }
            // classification inferred from the observed census must agree
            let inferred = infer_class_from_census(ring, cycle.len(), &got, tails_in);
            if inferred.as_deref() != Some(class.name()) {
                return Ok(Some(format!(
                    "census-inferred class {:?} disagrees with invariant class {} at level {n}",
                    inferred,
                    class.name()
                )));
            }
        }
    }
    Ok(None)
}

/// Reads the four-way classification off an observed lift census.
pub fn infer_class_from_census(
    ring: &RingSpec,
    k: u64,
    census: &[(u64, u64)],
    tails: bool,
) -> Option<String> {
    let p = ring.p();
    let q = ring.fq().card();
    if tails {
        return (census == [(k, 1)]).then(|| "grows_tails".to_string());
    }
    if census == [(k, q)] {
        return Some("splits".to_string());
    }
    if census == [(p * k, q / p)] {
        return Some("grows".to_string());
    }
    if census.len() == 2 && census[0] == (k, 1) {
        let (len, count) = census[1];
        if len % k == 0 {
            let ell = len / k;
            if ell >= 2 && (q - 1).is_multiple_of(ell) && count == (q - 1) / ell {
                return Some("partially_splits".to_string());
            }
        }
    }
    None
}

fn prop_witness_independence(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 15);
    let rings = rings_for(cfg, |e| 2 * 3 + e as u32 + 4)?;
    let mut cases = 0;
    for ring in &rings {
        for _ in 0..6 {
            let phi = random_poly(ring, &mut rng, 5);
            let level = rng.gen_range(1..=2u32);
            let map = match induce(ring, &phi, level, 1 << 16) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let set = find_cycles(&map);
            if set.cycles.is_empty() {
                continue;
            }
            let cycle = &set.cycles[0];
            let base = invariants(ring, &phi, cycle)?;
            let base_class = classify(ring, &base).name();
            let q = ring.fq().card();
            for &rep in &cycle.reps {
                for t in 0..q {
                    let digit = ring.fq().unrank(t);
                    let mut shift = ring.lift_digit(&digit);
                    for _ in 0..level {
                        shift = ring.mul_by_pi(&shift)?;
                    }
                    let w = ring.add(&ring.lift_rank(rep, level), &shift)?;
                    let inv = invariants_at(ring, &phi, cycle.len(), level, &w)?;
                    cases += 1;
                    if inv.a_hat != base.a_hat {
                        return Ok((
                            cases,
                            Some(format!(
                                "A_hat depends on the witness at level {level}, p={}",
                                ring.p()
                            )),
                        ));
                    }
                    if classify(ring, &inv).name() != base_class {
                        return Ok((
                            cases,
                            Some(format!("classification depends on the witness, p={}", ring.p())),
                        ));
                    }
                    // min(B, A_hat) is the witness-independent displacement
                    // datum when a != 0 mod pi; min(B, n) alone is stable
                    // only along the orbit, not within a fiber
                    if !ring.fq().is_zero(&base.a_res) {
                        let cap = base.a_hat.min(level);
                        if base.b_val.min_with(cap) != inv.b_val.min_with(cap) {
                            return Ok((
                                cases,
                                Some(format!(
                                    "min(B, A_hat) depends on the witness, p={}",
                                    ring.p()
                                )),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok((cases, None))
}

// ---- engine properties ----

fn prop_partition_census(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 16);
    let mut cases = 0;
    for &(p, e, f) in &cfg.rings {
        let ring = standard_ring(p, e, f, engine_precision(e))?;
        for _ in 0..4 {
            let phi = random_poly(&ring, &mut rng, 4);
            let cfg_engine =
                EngineConfig { max_level: 5, table_cap: 1 << 16, trust_predictions: false };
            cases += 1;
            match decompose(&ring, &phi, &cfg_engine) {
                Ok(tree) => tree.partition_census(&ring)?,
                Err(e) => {
                    return Ok((cases, Some(format!("decompose failed: {e}, p={p} e={e} f={f}"))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_prediction_soundness(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // every freshly certified minimal-type node reproduces its predicted
    // split/grow pattern over an explicit window of E_0 + E_1 more levels
    let mut rng = rng_for(cfg, 17);
    let mut cases = 0;
    for &(p, e, f) in &cfg.rings {
        let window = 12u32;
        let ring = standard_ring(p, e, f, 2 * window + e as u32 + 4)?;
        for _ in 0..3 {
            let phi = random_poly(&ring, &mut rng, 4);
            let cfg_engine =
                EngineConfig { max_level: 5, table_cap: 1 << 16, trust_predictions: false };
            let tree = match decompose(&ring, &phi, &cfg_engine) {
                Ok(t) => t,
                Err(_) => continue,
            };
            for node in &tree.nodes {
                let Some(Verdict::MinimalType { descr }) = &node.verdict else { continue };
                cases += 1;
                let e0 = descr.evec.entry(0);
                let e1 = descr.evec.entry(1);
                let upto = (descr.level + e0 + e1).min(window);
                let report = engine::check_minimality(
                    &ring,
                    &phi,
                    descr,
                    &node.cycle.reps,
                    upto,
                    1 << 16,
                    false,
                )?;
                if !report.pass {
                    let bad = report.levels.iter().find(|l| !l.ok).unwrap();
                    return Ok((
                        cases,
                        Some(format!(
                            "certified schedule broken at level {}: {} cycles of length {}, expected {} of {} (p={p} e={e} f={f})",
                            bad.level,
                            bad.cycles,
                            bad.length,
                            bad.expected_cycles,
                            bad.expected_length
                        )),
                    ));
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_component_growth(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // uncountability proxy: for K != Q_p, the number of disjoint invariant
    // clopen sets inside a stabilized minimal-type node strictly increases
    // over at least three consecutive grow/split rounds
    let mut rng = rng_for(cfg, 18);
    let mut cases = 0;
    for &(p, e, f) in cfg.rings.iter().filter(|&&(_, e, f)| e * f > 1) {
        let window = 14u32;
        let ring = standard_ring(p, e, f, 2 * window + e as u32 + 4)?;
        let mut candidates: Vec<ConvergentSeries> =
            vec![ConvergentSeries::poly_ints(&ring, &[1, 1])];
        for _ in 0..3 {
            candidates.push(random_poly(&ring, &mut rng, 3));
        }
        for phi in &candidates {
            let cfg_engine =
                EngineConfig { max_level: 5, table_cap: 1 << 16, trust_predictions: false };
            let tree = match decompose(&ring, phi, &cfg_engine) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let Some(node) = tree.nodes.iter().find(|n| {
                matches!(&n.verdict, Some(Verdict::MinimalType { descr })
                    if descr.evec.stabilization_index() == -1)
            }) else {
                continue;
            };
            let Some(Verdict::MinimalType { descr }) = &node.verdict else { unreachable!() };
            let upto = (descr.level + 3 * e as u32).min(window);
            let report = engine::check_minimality(
                &ring,
                phi,
                descr,
                &node.cycle.reps,
                upto,
                1 << 16,
                false,
            )?;
            if !report.pass {
                return Ok((cases, Some(format!("schedule census failed, p={p} e={e} f={f}"))));
            }
            let round_counts: Vec<u64> = report
                .levels
                .iter()
                .filter(|l| (l.level - descr.level) % e as u32 == 0)
                .map(|l| l.cycles)
                .collect();
            cases += 1;
            if round_counts.len() >= 3 {
                for w in round_counts.windows(2) {
                    if w[1] <= w[0] {
                        return Ok((
                            cases,
                            Some(format!(
                                "component count did not grow: {:?} (p={p} e={e} f={f})",
                                round_counts
                            )),
                        ));
                    }
                }
            }
        }
    }
    Ok((cases, None))
}

fn prop_periodic_point_bound(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // certified periodic points of period dividing q are roots of
    // phi^(q)(x) - x, bounded in number by the degree of the monic factor
    // from Weierstrass preparation
    let mut rng = rng_for(cfg, 19);
    let mut cases = 0;
    for &(p, e, f) in &cfg.rings {
        let ring = standard_ring(p, e, f, engine_precision(e))?;
        for _ in 0..4 {
            let phi = random_poly(&ring, &mut rng, 3);
            let cfg_engine =
                EngineConfig { max_level: 5, table_cap: 1 << 16, trust_predictions: false };
            let tree = match decompose(&ring, &phi, &cfg_engine) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let orbits = tree.periodic_orbits();
            if orbits.is_empty() {
                continue;
            }
            let periods: std::collections::BTreeSet<u64> =
                orbits.iter().map(|&(_, q, _)| q).collect();
            for q in periods {
                if phi.degree().pow(q as u32) > 256 || q > 8 {
                    continue;
                }
                let iterq = phi.iterate(&ring, q as u32)?;
                let minus_x = iterq.add(&ring, &ConvergentSeries::poly_ints(&ring, &[0, -1]))?;
                let bound = match minus_x.weierstrass_factor(&ring) {
                    Ok((g, _)) => g.degree() as u64,
                    Err(Error::AllCoefficientsSmall) => continue,
                    Err(err) => return Err(err),
                };
                let points: u64 = orbits
                    .iter()
                    .filter(|&&(_, per, _)| q % per == 0)
                    .map(|&(_, per, _)| per)
                    .sum();
                cases += 1;
                if points > bound {
                    return Ok((
                        cases,
                        Some(format!(
                            "{points} certified periodic points of period dividing {q} exceed the preparation bound {bound}, p={p} e={e} f={f}"
                        )),
                    ));
                }
            }
        }
    }
    Ok((cases, None))
}

// ---- affine cross-validation ----

/// Precision and sphere-valuation budget per prime for affine checks.
pub fn affine_budget(p: u64) -> (u32, u32) {
    match p {
        2 => (40, 3),
        3 => (30, 2),
        _ => (24, 2),
    }
}

/// Outcome of one engine-vs-closed-form comparison on the unit sphere.
#[derive(Debug, Clone)]
pub struct AffineCrossCheck {
    pub ok: bool,
    pub detail: String,
}

/// Compares the generic engine's decomposition of the unit sphere of
/// `alpha x` against the closed-form analysis: component count at the
/// anchor level, base cycle length, and the schedule prefix to depth 4.
pub fn affine_cross_check(
    ring: &RingSpec,
    alpha: &Element,
    exact_int: Option<i64>,
) -> Result<AffineCrossCheck> {
    let report = affine::affine_classify(ring, alpha, &ring.zero(), 6, exact_int)?;
    let AffineCase::UnitSpheres { ell, v_star, evec, component_count, .. } = &report.case else {
        return Ok(AffineCrossCheck {
            ok: false,
            detail: format!("not a unit-sphere case: {}", report.case.name()),
        });
    };
    // deep enough to certify every unit-sphere anchor to schedule depth 4
    let depth: u32 = (0..4).map(|j| evec.entry(j)).sum();
    let max_level = v_star + depth + 2 * ring.e() as u32 + 2;
    if dynamics::required_precision(ring, max_level) > ring.precision() {
        return Err(Error::PrecisionExhausted(format!(
            "affine cross-check needs level {max_level}"
        )));
    }
    let phi = ConvergentSeries::poly(ring, vec![ring.zero(), alpha.clone()])?;
    let cfg = EngineConfig { max_level, table_cap: 1 << 20, trust_predictions: false };
    let tree = decompose(ring, &phi, &cfg)?;

    let q = ring.fq().card();
    let anchors: Vec<_> = tree
        .minimal_components()
        .into_iter()
        .filter(|c| {
            c.descr.level == *v_star
                && tree.nodes[c.anchor_node].cycle.reps.iter().all(|&r| r % q != 0)
        })
        .collect();
    if anchors.len() as u64 != *component_count {
        return Ok(AffineCrossCheck {
            ok: false,
            detail: format!(
                "engine found {} unit-sphere components at level {v_star}, closed form says {component_count}",
                anchors.len()
            ),
        });
    }
    for a in &anchors {
        if a.descr.k != *ell {
            return Ok(AffineCrossCheck {
                ok: false,
                detail: format!("component base length {} != ell = {ell}", a.descr.k),
            });
        }
        for j in 0..4 {
            if a.descr.evec.entry(j) != evec.entry(j) {
                return Ok(AffineCrossCheck {
                    ok: false,
                    detail: format!(
                        "schedule entry {j}: engine {} vs closed form {}",
                        a.descr.evec.entry(j),
                        evec.entry(j)
                    ),
                });
            }
        }
    }
    Ok(AffineCrossCheck {
        ok: true,
        detail: format!(
            "{} components of type ({ell}, prefix {:?} then {}) at level {v_star}",
            component_count,
            evec.prefix(),
            evec.eventual()
        ),
    })
}

/// Draws a unit that is not a root of unity and whose sphere valuation
/// `val(alpha^ell - 1)` stays within the ring's budget.
pub fn random_case_c_unit(
    ring: &RingSpec,
    rng: &mut ChaCha8Rng,
    max_v_star: u32,
) -> Result<Element> {
    loop {
        let alpha = random_element(ring, rng, ring.precision().min(10));
        if !matches!(ring.val(&alpha), Valuation::Finite(0)) {
            continue;
        }
        if affine::is_root_of_unity(ring, &alpha, None)? != affine::RootOfUnity::No {
            continue;
        }
        let ell = affine::order_in_residue(ring, &alpha)?;
        let al = ring.pow(&alpha, ell as u128)?;
        match ring.val(&ring.sub(&al, &ring.one())?) {
            Valuation::Finite(v) if v >= 1 && v <= max_v_star => return Ok(alpha),
            _ => continue,
        }
    }
}

fn prop_affine_engine_agreement(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    let mut rng = rng_for(cfg, 20);
    let mut cases = 0;
    for &(p, e, f) in &cfg.rings {
        let (precision, max_v) = affine_budget(p);
        let ring = standard_ring(p, e, f, precision)?;
        for _ in 0..3 {
            let alpha = random_case_c_unit(&ring, &mut rng, max_v)?;
            cases += 1;
            let check = affine_cross_check(&ring, &alpha, None)?;
            if !check.ok {
                return Ok((cases, Some(format!("{} (p={p} e={e} f={f})", check.detail))));
            }
        }
    }
    Ok((cases, None))
}

fn prop_conjugacy_invariance(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // decomposing alpha x + beta and alpha x produces isomorphic trees when
    // the fixed point beta/(1-alpha) is integral
    let mut rng = rng_for(cfg, 21);
    let mut cases = 0;
    for &(p, e, f) in &cfg.rings {
        let (precision, max_v) = affine_budget(p);
        let ring = standard_ring(p, e, f, precision)?;
        for _ in 0..2 {
            let alpha = random_case_c_unit(&ring, &mut rng, max_v)?;
            // beta = (1 - alpha) c makes the fixed point c integral
            let c = random_element(&ring, &mut rng, 6);
            let one_minus = ring.sub(&ring.one(), &alpha)?;
            let beta = ring.mul(&one_minus, &c)?;
            if ring.is_zero_at_prec(&beta) {
                continue;
            }
            let lin = ConvergentSeries::poly(&ring, vec![ring.zero(), alpha.clone()])?;
            let aff = ConvergentSeries::poly(&ring, vec![beta, alpha.clone()])?;
            let cfg_engine =
                EngineConfig { max_level: 6, table_cap: 1 << 16, trust_predictions: false };
            let t1 = decompose(&ring, &lin, &cfg_engine)?;
            let t2 = decompose(&ring, &aff, &cfg_engine)?;
            cases += 1;
            if tree_signature(&t1) != tree_signature(&t2) {
                return Ok((
                    cases,
                    Some(format!("conjugate maps produced different trees, p={p} e={e} f={f}")),
                ));
            }
        }
    }
    Ok((cases, None))
}

/// Structure signature of a tree, invariant under residue relabeling:
/// sorted (level, length, class, verdict kind) tuples.
pub fn tree_signature(tree: &engine::DecompositionTree) -> Vec<(u32, u64, String, String)> {
    let mut sig: Vec<(u32, u64, String, String)> = tree
        .nodes
        .iter()
        .map(|n| {
            (
                n.cycle.level,
                n.cycle.len(),
                n.class.name().to_string(),
                n.verdict.as_ref().map(|v| v.name().to_string()).unwrap_or_default(),
            )
        })
        .collect();
    sig.sort();
    sig
}

fn prop_eventual_stabilization(cfg: &VerifyConfig) -> Result<(u64, Option<String>)> {
    // beyond the stabilization index every schedule entry equals e: the
    // ladder valuations eventually step by exactly val(p) = e
    let mut rng = rng_for(cfg, 22);
    let mut cases = 0;
    for &(p, e, f) in &cfg.rings {
        let (precision, max_v) = affine_budget(p);
        let ring = standard_ring(p, e, f, precision)?;
        for _ in 0..3 {
            let alpha = random_case_c_unit(&ring, &mut rng, max_v)?;
            let ell = affine::order_in_residue(&ring, &alpha)?;
            let ev = affine::e_vector(&ring, &alpha, ell, 6)?;
            let stab = ev.stabilization_index();
            let idx = (stab + 1) as u32;
            let mut z = ring.pow(&alpha, ell as u128)?;
            for _ in 0..idx {
                z = ring.pow(&z, p as u128)?;
            }
            let g1 = match ring.val(&ring.sub(&z, &ring.one())?) {
                Valuation::Finite(v) => v,
                _ => continue,
            };
            let z2 = ring.pow(&z, p as u128)?;
            let g2 = match ring.val(&ring.sub(&z2, &ring.one())?) {
                Valuation::Finite(v) => v,
                _ => continue,
            };
            cases += 1;
            if g2 - g1 != e as u32 {
                return Ok((
                    cases,
                    Some(format!(
                        "ladder step {} beyond stabilization is {} != e = {e}, p={p}",
                        idx,
                        g2 - g1
                    )),
                ));
            }
        }
    }
    Ok((cases, None))
}
