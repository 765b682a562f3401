//! Induced dynamics on the finite rings `O/pi^n O`.
//!
//! A convergent series `phi` with integral coefficients induces a
//! well-defined map `phi_n` on the `(p^f)^n` residues at level `n`. Cycles
//! of `phi_n` and their lifts to level `n+1` are governed by two invariants
//! computed at a witness `x` of a `k`-cycle, with `psi = phi^(k)`:
//!
//! - the multiplier `a_n(x) = psi'(x)`, the product of `phi'` along the
//!   orbit, and
//! - the normalized displacement `b_n(x) = (psi(x) - x) / pi^n`.
//!
//! Their residues mod `pi` drive an affine action `t -> b_n + a_n t` on the
//! digit set `O/pi O`, which classifies the lift behavior four ways (grows,
//! splits, grows tails, partially splits) and predicts the exact census of
//! cycles at the next level. `lift` enumerates that census directly and
//! cross-checks it against the prediction.

use crate::error::{Error, Result};
use crate::fq::FqElem;
use crate::ring::{Element, RingSpec, Valuation};
use crate::series::ConvergentSeries;

/// Working precision needed before invariants at level `n` are trusted:
/// the displacement is divided by `pi^n` and must stay readable for `n`
/// more digits, plus guard digits.
pub fn required_precision(ring: &RingSpec, level: u32) -> u32 {
    2 * level + ring.e() as u32 + 2
}

/// Materialized induced map on the residues at one level.
#[derive(Debug, Clone)]
pub struct LevelMap {
    pub level: u32,
    /// `table[r]` is the image rank of residue rank `r`.
    pub table: Vec<u32>,
}

/// Builds the full table of `phi_n`, refusing when the residue count
/// exceeds `cap`.
pub fn induce(ring: &RingSpec, phi: &ConvergentSeries, level: u32, cap: u64) -> Result<LevelMap> {
    let count = ring
        .residue_count(level)
        .filter(|&c| c <= cap)
        .ok_or(Error::LevelTooLarge {
            level,
            residues: (ring.fq().card() as u128).saturating_pow(level),
            cap,
        })?;
    if count > u32::MAX as u64 {
        return Err(Error::LevelTooLarge { level, residues: count as u128, cap });
    }
    let mut table = Vec::with_capacity(count as usize);
    for r in 0..count {
        let x = ring.lift_rank(r, level);
        let y = phi.eval(ring, &x)?;
        table.push(ring.rank_of(&y, level)? as u32);
    }
    Ok(LevelMap { level, table })
}

/// A `k`-cycle of `phi_n`: ordered residue ranks with the smallest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub level: u32,
    pub reps: Vec<u64>,
}

impl Cycle {
    pub fn len(&self) -> u64 {
        self.reps.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Canonical witness: the exact lift of the first representative.
    pub fn witness(&self, ring: &RingSpec) -> Element {
        ring.lift_rank(self.reps[0], self.level)
    }

    fn canonicalize(reps: Vec<u64>, level: u32) -> Cycle {
        let pos = reps
            .iter()
            .enumerate()
            .min_by_key(|&(_, r)| r)
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut rotated = Vec::with_capacity(reps.len());
        rotated.extend_from_slice(&reps[pos..]);
        rotated.extend_from_slice(&reps[..pos]);
        Cycle { level, reps: rotated }
    }
}

/// Cycles plus tail points of a functional graph on residues.
#[derive(Debug, Clone)]
pub struct CycleSet {
    pub cycles: Vec<Cycle>,
    /// Tail residues (not on any cycle) with the index of the cycle their
    /// forward orbit enters.
    pub tails: Vec<(u64, usize)>,
}

/// All cycles of a level map, canonically ordered by (length, first rep),
/// with tail points reported separately.
pub fn find_cycles(map: &LevelMap) -> CycleSet {
    let n = map.table.len();
    // 0 = unvisited, 1 = on current path, 2 = resolved
    let mut state = vec![0u8; n];
    let mut cycle_of = vec![usize::MAX; n];
    let mut raw_cycles: Vec<Vec<u64>> = Vec::new();

    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            cur = map.table[cur] as usize;
        }
        if state[cur] == 1 {
            // new cycle: the suffix of the path starting at cur
            let pos = path.iter().position(|&x| x == cur).unwrap();
            let cycle_id = raw_cycles.len();
            raw_cycles.push(path[pos..].iter().map(|&x| x as u64).collect());
            for &x in &path {
                cycle_of[x] = cycle_id;
                state[x] = 2;
            }
        } else {
            let target = cycle_of[cur];
            for &x in &path {
                cycle_of[x] = target;
                state[x] = 2;
            }
        }
    }

    let canonical: Vec<Cycle> = raw_cycles
        .iter()
        .map(|reps| Cycle::canonicalize(reps.clone(), map.level))
        .collect();
    let mut order: Vec<usize> = (0..canonical.len()).collect();
    order.sort_by_key(|&i| (canonical[i].len(), canonical[i].reps[0]));
    let mut new_index = vec![0usize; canonical.len()];
    for (new_i, &old_i) in order.iter().enumerate() {
        new_index[old_i] = new_i;
    }
    let cycles: Vec<Cycle> = order.iter().map(|&i| canonical[i].clone()).collect();
    let on_cycle: Vec<bool> = {
        let mut v = vec![false; n];
        for c in &cycles {
            for &r in &c.reps {
                v[r as usize] = true;
            }
        }
        v
    };
    let mut tails: Vec<(u64, usize)> = (0..n)
        .filter(|&r| !on_cycle[r])
        .map(|r| (r as u64, new_index[cycle_of[r]]))
        .collect();
    tails.sort_unstable();
    CycleSet { cycles, tails }
}

/// The cycle invariants at a witness: `a_n`, `b_n` and the derived
/// valuations `A_n = val(a_n - 1)`, `B_n = val(b_n)` and the
/// witness-independent `A_hat = min(A_n, n)`.
#[derive(Debug, Clone)]
pub struct CycleInvariants {
    pub level: u32,
    pub length: u64,
    pub a: Element,
    pub b: Element,
    pub a_res: FqElem,
    pub b_res: FqElem,
    /// `A_n = val(a_n - 1)`.
    pub a_val: Valuation,
    /// `B_n = val(b_n)`.
    pub b_val: Valuation,
    pub a_hat: u32,
}

/// Lift behavior of a cycle, read off the residues of `(a_n, b_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// `a = 1, b != 0`: `p^(f-1)` lifts of length `pk`.
    Grows,
    /// `a = 1, b = 0`: `p^f` lifts of length `k`.
    Splits,
    /// `a = 0`: one lift of length `k`, everything else falls into it.
    GrowsTails,
    /// `a != 0, 1`: one lift of length `k` plus `(p^f - 1)/ell` of length
    /// `k*ell`, where `ell` is the order of `a` in the residue group.
    PartiallySplits {
        ell: u64,
        /// The digit fixed by the affine action, `-b/(a-1) mod pi`.
        fixed_digit: FqElem,
    },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Grows => "grows",
            Classification::Splits => "splits",
            Classification::GrowsTails => "grows_tails",
            Classification::PartiallySplits { .. } => "partially_splits",
        }
    }
}

/// Computes the invariants of a cycle at its canonical witness.
pub fn invariants(ring: &RingSpec, phi: &ConvergentSeries, cycle: &Cycle) -> Result<CycleInvariants> {
    invariants_at(ring, phi, cycle.len(), cycle.level, &cycle.witness(ring))
}

/// Invariants at an explicit witness `x` of a `k`-cycle at `level`.
/// Refuses (rather than silently truncating) when the precision ledger
/// cannot cover the `pi^level` division.
pub fn invariants_at(
    ring: &RingSpec,
    phi: &ConvergentSeries,
    k: u64,
    level: u32,
    x: &Element,
) -> Result<CycleInvariants> {
    let need = required_precision(ring, level);
    if ring.precision() < need || x.known_prec() < need || phi.tail_val() < need {
        return Err(Error::PrecisionExhausted(format!(
            "invariants at level {level} need {need} digits, have {}",
            x.known_prec().min(ring.precision()).min(phi.tail_val())
        )));
    }
    let dphi = phi.derivative(ring)?;
    let mut a = ring.one();
    let mut y = x.clone();
    for _ in 0..k {
        a = ring.mul(&a, &dphi.eval(ring, &y)?)?;
        y = phi.eval(ring, &y)?;
    }
    // y = psi(x); the cycle property makes psi(x) - x divisible by pi^level
    let disp = ring.sub(&y, x)?;
    if !ring.val(&disp).ge(level) {
        return Err(Error::ClassificationMismatch(format!(
            "witness is not on a cycle at level {level}"
        )));
    }
    let b = ring.shift_right(&disp, level)?;
    let a_minus_1 = ring.sub(&a, &ring.one())?;
    let a_val = ring.val(&a_minus_1);
    let b_val = ring.val(&b);
    Ok(CycleInvariants {
        level,
        length: k,
        a_res: ring.residue(&a),
        b_res: ring.residue(&b),
        a,
        b,
        a_val,
        b_val,
        a_hat: a_val.min_with(level),
    })
}

/// Four-way classification from the invariant residues.
pub fn classify(ring: &RingSpec, inv: &CycleInvariants) -> Classification {
    let fq = ring.fq();
    if fq.is_zero(&inv.a_res) {
        Classification::GrowsTails
    } else if fq.is_one(&inv.a_res) {
        if fq.is_zero(&inv.b_res) {
            Classification::Splits
        } else {
            Classification::Grows
        }
    } else {
        let ell = fq.order(&inv.a_res).expect("nonzero residue");
        let a1 = fq.sub(&inv.a_res, &fq.one());
        let fixed = fq.mul(&fq.neg(&inv.b_res), &fq.inv(&a1).expect("a != 1"));
        Classification::PartiallySplits { ell, fixed_digit: fixed }
    }
}

/// The linearization `Psi(x, t) = b_n + a_n t` acting on the digit set.
pub fn linearize(ring: &RingSpec, inv: &CycleInvariants, t: &FqElem) -> FqElem {
    let fq = ring.fq();
    fq.add(&inv.b_res, &fq.mul(&inv.a_res, t))
}

/// Expected lift census `(length, count)` for a classified cycle, plus
/// whether tail points appear.
pub fn predicted_census(ring: &RingSpec, class: &Classification, k: u64) -> (Vec<(u64, u64)>, bool) {
    let p = ring.p();
    let q = ring.fq().card();
    match class {
        Classification::Grows => (vec![(p * k, q / p)], false),
        Classification::Splits => (vec![(k, q)], false),
        Classification::GrowsTails => (vec![(k, 1)], true),
        Classification::PartiallySplits { ell, .. } => {
            (vec![(k, 1), (k * ell, (q - 1) / ell)], false)
        }
    }
}

/// Lifts of a cycle: all cycles of `phi_(n+1)` inside `X_sigma`.
#[derive(Debug, Clone)]
pub struct LiftResult {
    pub cycles: Vec<Cycle>,
    /// Ranks at level `n+1` not on any lift (grows-tails only).
    pub tails: Vec<u64>,
}

/// Enumerates the lifts of a cycle directly over the `k * p^f` points of
/// `X_sigma` and cross-checks the census against the classification
/// prediction, failing with `ClassificationMismatch` on any discrepancy.
pub fn lift(ring: &RingSpec, phi: &ConvergentSeries, cycle: &Cycle) -> Result<LiftResult> {
    let inv = invariants(ring, phi, cycle)?;
    let class = classify(ring, &inv);
    lift_with_class(ring, phi, cycle, &class)
}

/// As [`lift`], reusing an already computed classification.
pub fn lift_with_class(
    ring: &RingSpec,
    phi: &ConvergentSeries,
    cycle: &Cycle,
    class: &Classification,
) -> Result<LiftResult> {
    let n = cycle.level;
    let q = ring.fq().card();
    let stride = ring
        .residue_count(n)
        .ok_or(Error::LevelTooLarge { level: n, residues: 0, cap: u64::MAX })?;
    if ring.residue_count(n + 1).is_none() {
        return Err(Error::LevelTooLarge {
            level: n + 1,
            residues: (q as u128).saturating_pow(n + 1),
            cap: u64::MAX,
        });
    }

    // the k * p^f points of X_sigma at level n+1, in canonical order
    let mut points = Vec::with_capacity(cycle.reps.len() * q as usize);
    for &r in &cycle.reps {
        for t in 0..q {
            points.push(r + t * stride);
        }
    }
    points.sort_unstable();
    let index_of = |rank: u64| points.binary_search(&rank).ok();

    let mut next = vec![0u32; points.len()];
    for (i, &r) in points.iter().enumerate() {
        let x = ring.lift_rank(r, n + 1);
        let y = phi.eval(ring, &x)?;
        let img = ring.rank_of(&y, n + 1)?;
        next[i] = index_of(img).ok_or_else(|| {
            Error::ClassificationMismatch(format!(
                "phi_(n+1) leaves X_sigma at level {} (rank {r} -> {img})",
                n + 1
            ))
        })? as u32;
    }

    // cycle detection on the restricted functional graph
    let local_set = find_cycles(&LevelMap { level: n + 1, table: next });
    let mut cycles: Vec<Cycle> = local_set
        .cycles
        .iter()
        .map(|c| Cycle::canonicalize(c.reps.iter().map(|&i| points[i as usize]).collect(), n + 1))
        .collect();
    cycles.sort_by_key(|c| (c.len(), c.reps[0]));
    let mut tails: Vec<u64> = local_set.tails.iter().map(|&(i, _)| points[i as usize]).collect();
    tails.sort_unstable();

    // census must match the classification prediction exactly
    let (expected, expect_tails) = predicted_census(ring, class, cycle.len());
    let mut got: Vec<(u64, u64)> = Vec::new();
    for c in &cycles {
        match got.iter_mut().find(|(len, _)| *len == c.len()) {
            Some(entry) => entry.1 += 1,
            None => got.push((c.len(), 1)),
        }
    }
    got.sort_unstable();
    let mut want = expected;
    want.retain(|&(_, count)| count > 0);
    want.sort_unstable();
    if got != want || (!tails.is_empty()) != expect_tails {
        return Err(Error::ClassificationMismatch(format!(
            "lift census {:?} (tails: {}) does not match the {} prediction {:?} at level {}",
            got,
            tails.len(),
            class.name(),
            want,
            n + 1,
        )));
    }
    Ok(LiftResult { cycles, tails })
}
