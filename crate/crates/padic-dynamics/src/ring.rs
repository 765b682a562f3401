//! Exact arithmetic in `O_K / pi^N O_K` for `K` a finite extension of `Q_p`.
//!
//! The ring is described by a prime `p`, a residue degree `f` with a monic
//! irreducible polynomial over `F_p` (defining the unramified subfield), and a
//! ramification index `e` with a monic Eisenstein polynomial over the
//! unramified integers (defining the uniformizer `pi`).
//!
//! Internally an element is a polynomial in `pi` of degree `< e` whose
//! coefficients live in the unramified ring modulo `p^M`, `M = ceil(N/e)+1`;
//! multiplication is plain polynomial arithmetic followed by one reduction
//! through the Eisenstein relation. The canonical `pi`-adic digit expansion
//! (digits in the fixed representative set: polynomials of degree `< f` over
//! `{0,..,p-1}` in the unramified generator) is computed on demand.
//!
//! Every element carries `known_prec`, the number of trusted `pi`-adic
//! digits; operations propagate the worst case and division by `pi^n`
//! subtracts `n`. `RingSpec` is immutable after construction and safe to
//! share; elements are plain immutable values.

use crate::error::{Error, Result};
use crate::fq::{is_prime, Fq, FqElem};

/// Valuation of an element at finite precision: either exactly known, or
/// only bounded below because all trusted digits vanish. `AtLeast` plays the
/// role of the `+infinity` marker and compares greater than any `Finite`
/// value it dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(u32),
    /// All digits up to the contained precision vanish.
    AtLeast(u32),
}

impl Valuation {
    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    /// `min(val, cap)` where an `AtLeast(m)` with `m >= cap` clamps to `cap`.
    /// Panics if the valuation is unknown below the cap, which indicates a
    /// precision-ledger violation upstream.
    pub fn min_with(&self, cap: u32) -> u32 {
        match *self {
            Valuation::Finite(v) => v.min(cap),
            Valuation::AtLeast(m) => {
                assert!(m >= cap, "valuation unknown below cap: AtLeast({m}) vs cap {cap}");
                cap
            }
        }
    }

    /// True when the valuation is certainly `>= bound`.
    pub fn ge(&self, bound: u32) -> bool {
        match *self {
            Valuation::Finite(v) => v >= bound,
            Valuation::AtLeast(m) => m >= bound,
        }
    }
}

/// An integer of `O_K` at finite `pi`-adic precision.
#[derive(Debug, Clone)]
pub struct Element {
    ring_id: u64,
    /// Coefficients of `pi^0 .. pi^(e-1)`; each coefficient is `f` values
    /// modulo `p^M`, little-endian in the unramified generator.
    w: Vec<u64>,
    known_prec: u32,
}

impl Element {
    pub fn known_prec(&self) -> u32 {
        self.known_prec
    }

    pub fn ring_id(&self) -> u64 {
        self.ring_id
    }

    /// Caps the trusted precision (never raises it).
    pub fn with_prec(mut self, prec: u32) -> Element {
        self.known_prec = self.known_prec.min(prec);
        self
    }
}

/// The first `n` digits of an element: a point of `O/pi^n O`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueClass {
    pub level: u32,
    pub digits: Vec<FqElem>,
}

/// The field `K`: validated construction data plus derived constants.
#[derive(Debug, Clone)]
pub struct RingSpec {
    id: u64,
    p: u64,
    e: usize,
    f: usize,
    precision: u32,
    /// p-adic precision of unramified coefficients, `M = ceil(N/e) + 1`.
    m: u32,
    pm: u64,
    unram: Vec<u64>,
    /// Eisenstein polynomial coefficients `c_0..c_{e-1}` (the monic leading
    /// term is implicit), each an unramified integer mod `p^M`.
    eis_low: Vec<Vec<u64>>,
    /// `-c_j mod p^M`, so that `pi^e = sum_j neg_eis[j] pi^j`.
    neg_eis: Vec<Vec<u64>>,
    /// Inverse of the unit `mu` with `pi^e = p * mu`.
    inv_mu: Vec<u64>,
    fq: Fq,
}

fn fnv1a(data: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &x in data {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

impl RingSpec {
    /// Validates and constructs the ring.
    ///
    /// `unram_poly` is monic of degree `f` with entries reduced mod `p`;
    /// `eis_poly` is monic of degree `e` whose coefficients are unramified
    /// integers given as little-endian vectors in the unramified generator.
    /// `precision` is the working precision `N` in `pi`-adic digits.
    pub fn new(
        p: u64,
        f: usize,
        unram_poly: &[i64],
        e: usize,
        eis_poly: &[Vec<i64>],
        precision: u32,
    ) -> Result<RingSpec> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 || f == 0 {
            return Err(Error::UnsupportedRing("e and f must be >= 1".into()));
        }
        if f > 8 || e > 16 {
            return Err(Error::UnsupportedRing("supported range: f <= 8, e <= 16".into()));
        }
        if p.checked_pow(f as u32).is_none() || p.pow(f as u32) > (1 << 30) {
            return Err(Error::UnsupportedRing("residue field too large".into()));
        }
        let needed = (e + 2) as u32;
        if precision < needed {
            return Err(Error::PrecisionTooSmall { given: precision, needed });
        }

        let m = (precision as usize).div_ceil(e) as u32 + 1;
        let pm = checked_pow(p, m)
            .filter(|&v| v <= (1 << 62))
            .ok_or_else(|| Error::UnsupportedRing("p^M exceeds the native range; lower the precision".into()))?;

        if unram_poly.len() != f + 1 {
            return Err(Error::NotIrreducible);
        }
        let unram: Vec<u64> = unram_poly
            .iter()
            .map(|&c| c.rem_euclid(p as i64) as u64)
            .collect();
        let fq = Fq::new(p, f, unram.clone())?;

        if eis_poly.len() != e + 1 {
            return Err(Error::NotEisenstein(format!(
                "expected degree {e}, got {}",
                eis_poly.len().saturating_sub(1)
            )));
        }
        let reduce_coeff = |c: &Vec<i64>| -> Result<Vec<u64>> {
            if c.len() > f {
                return Err(Error::NotEisenstein(
                    "coefficient has degree >= f in the unramified generator".into(),
                ));
            }
            let mut v = vec![0u64; f];
            for (j, &x) in c.iter().enumerate() {
                v[j] = x.rem_euclid(pm as i64) as u64;
            }
            Ok(v)
        };
        let lead = reduce_coeff(&eis_poly[e])?;
        if lead[0] != 1 || lead[1..].iter().any(|&x| x != 0) {
            return Err(Error::NotEisenstein("polynomial is not monic".into()));
        }
        let mut eis_low = Vec::with_capacity(e);
        for c in &eis_poly[..e] {
            eis_low.push(reduce_coeff(c)?);
        }
        // Eisenstein valuation conditions: v_p(c_i) >= 1 for all i < e and
        // v_p(c_0) = 1 exactly.
        for (i, c) in eis_low.iter().enumerate() {
            if c.iter().any(|&x| x % p != 0) {
                return Err(Error::NotEisenstein(format!(
                    "coefficient {i} is a unit, v_p must be >= 1"
                )));
            }
        }
        if eis_low[0].iter().all(|&x| (x / p).is_multiple_of(p)) {
            return Err(Error::NotEisenstein(
                "constant term divisible by p^2, v_p must be exactly 1".into(),
            ));
        }

        let neg_eis: Vec<Vec<u64>> = eis_low
            .iter()
            .map(|c| c.iter().map(|&x| (pm - x % pm) % pm).collect())
            .collect();

        let mut id_data = vec![p, e as u64, f as u64, precision as u64];
        id_data.extend(unram.iter());
        for c in &eis_low {
            id_data.extend(c.iter());
        }
        let id = fnv1a(&id_data);

        let mut ring = RingSpec {
            id,
            p,
            e,
            f,
            precision,
            m,
            pm,
            unram,
            eis_low,
            neg_eis,
            inv_mu: vec![0; e * f],
            fq,
        };

        // pi^e = -(c_0 + c_1 pi + ... + c_{e-1} pi^{e-1}) = p * mu(pi) with
        // mu = -(c_0/p + ... + c_{e-1}/p pi^{e-1}), a unit by the Eisenstein
        // condition on c_0.
        let mut mu = ring.zero();
        for (i, c) in ring.eis_low.iter().enumerate() {
            for (j, &cj) in c.iter().enumerate() {
                let halved = cj / p; // exact: v_p(c_i) >= 1
                mu.w[i * f + j] = (ring.pm - halved % ring.pm) % ring.pm;
            }
        }
        let inv_mu = ring.invert(&mu)?;
        ring.inv_mu = inv_mu.w;
        Ok(ring)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// Extension degree `d = e * f`.
    pub fn degree(&self) -> usize {
        self.e * self.f
    }

    /// Working precision `N` in `pi`-adic digits.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn fq(&self) -> &Fq {
        &self.fq
    }

    /// Residue count `(p^f)^n` at a level, if it fits in `u64`.
    pub fn residue_count(&self, level: u32) -> Option<u64> {
        checked_pow(self.fq.card(), level)
    }

    pub fn unram_poly(&self) -> &[u64] {
        &self.unram
    }

    pub fn eis_low(&self) -> &[Vec<u64>] {
        &self.eis_low
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.ring_id != self.id {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    // ---- constructors ----

    pub fn zero(&self) -> Element {
        Element { ring_id: self.id, w: vec![0; self.e * self.f], known_prec: self.precision }
    }

    pub fn one(&self) -> Element {
        self.integer(1)
    }

    /// The uniformizer `pi`.
    pub fn pi(&self) -> Element {
        if self.e == 1 {
            // pi = -c_0
            let mut x = self.zero();
            x.w[..self.f].copy_from_slice(&self.neg_eis[0]);
            x
        } else {
            let mut x = self.zero();
            x.w[self.f] = 1;
            x
        }
    }

    /// Embeds a rational integer.
    pub fn integer(&self, n: i128) -> Element {
        let mut x = self.zero();
        x.w[0] = n.rem_euclid(self.pm as i128) as u64;
        x
    }

    /// Element from explicit `pi`-polynomial data: `coeffs[i][j]` is the
    /// integer coefficient of `u^j pi^i`.
    pub fn from_pi_poly(&self, coeffs: &[Vec<i64>]) -> Result<Element> {
        if coeffs.len() > self.e {
            return Err(Error::Descriptor(format!(
                "element literal has {} pi-coefficients, ring has e = {}",
                coeffs.len(),
                self.e
            )));
        }
        let mut x = self.zero();
        for (i, c) in coeffs.iter().enumerate() {
            if c.len() > self.f {
                return Err(Error::Descriptor(format!(
                    "element literal coefficient {} has degree >= f = {}",
                    i, self.f
                )));
            }
            for (j, &v) in c.iter().enumerate() {
                x.w[i * self.f + j] = v.rem_euclid(self.pm as i64) as u64;
            }
        }
        Ok(x)
    }

    /// Lifts a residue-field digit to the canonical representative.
    pub fn lift_digit(&self, d: &FqElem) -> Element {
        let mut x = self.zero();
        x.w[..self.f].copy_from_slice(d);
        x
    }

    // ---- ring operations ----

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        let w = a
            .w
            .iter()
            .zip(&b.w)
            .map(|(&x, &y)| add_mod(x, y, self.pm))
            .collect();
        Ok(Element { ring_id: self.id, w, known_prec: a.known_prec.min(b.known_prec) })
    }

    pub fn neg(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        let w = a.w.iter().map(|&x| (self.pm - x % self.pm) % self.pm).collect();
        Ok(Element { ring_id: self.id, w, known_prec: a.known_prec })
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Result<Element> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        let e = self.e;
        let f = self.f;
        // polynomial product in pi, coefficients in the unramified ring
        let mut acc = vec![vec![0u64; f]; 2 * e - 1];
        for i in 0..e {
            let ai = &a.w[i * f..(i + 1) * f];
            if ai.iter().all(|&x| x == 0) {
                continue;
            }
            for j in 0..e {
                let bj = &b.w[j * f..(j + 1) * f];
                if bj.iter().all(|&x| x == 0) {
                    continue;
                }
                let prod = self.wmul(ai, bj);
                for (t, &v) in prod.iter().enumerate() {
                    acc[i + j][t] = add_mod(acc[i + j][t], v, self.pm);
                }
            }
        }
        // reduce pi^e..pi^(2e-2) through the Eisenstein relation
        for i in (e..2 * e - 1).rev() {
            let c = std::mem::replace(&mut acc[i], vec![0u64; f]);
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for j in 0..e {
                if self.neg_eis[j].iter().all(|&x| x == 0) {
                    continue;
                }
                let prod = self.wmul(&c, &self.neg_eis[j]);
                for (t, &v) in prod.iter().enumerate() {
                    acc[i - e + j][t] = add_mod(acc[i - e + j][t], v, self.pm);
                }
            }
        }
        let mut w = Vec::with_capacity(e * f);
        for slot in acc.into_iter().take(e) {
            w.extend(slot);
        }
        Ok(Element { ring_id: self.id, w, known_prec: a.known_prec.min(b.known_prec) })
    }

    /// Product in the unramified ring `W = Z_{p^f} mod p^M`.
    fn wmul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.f;
        let pm = self.pm as u128;
        let mut acc = vec![0u64; 2 * f - 1];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                if b[j] == 0 {
                    continue;
                }
                let v = (a[i] as u128 * b[j] as u128) % pm;
                acc[i + j] = add_mod(acc[i + j], v as u64, self.pm);
            }
        }
        // u^f = -(unram_0 + ... + unram_{f-1} u^{f-1})
        for i in (f..2 * f - 1).rev() {
            let c = acc[i];
            acc[i] = 0;
            if c == 0 {
                continue;
            }
            for j in 0..f {
                if self.unram[j] == 0 {
                    continue;
                }
                let v = (c as u128 * self.unram[j] as u128) % pm;
                acc[i - f + j] = sub_mod(acc[i - f + j], v as u64, self.pm);
            }
        }
        acc.truncate(f);
        acc
    }

    pub fn pow(&self, a: &Element, mut exp: u128) -> Result<Element> {
        self.check(a)?;
        let mut base = a.clone();
        let mut out = self.one().with_prec(a.known_prec);
        while exp > 0 {
            if exp & 1 == 1 {
                out = self.mul(&out, &base)?;
            }
            base = self.mul(&base, &base)?;
            exp >>= 1;
        }
        Ok(out)
    }

    /// Multiplies by `pi` (shifts digits up one place).
    pub fn mul_by_pi(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        let e = self.e;
        let f = self.f;
        let top = a.w[(e - 1) * f..].to_vec();
        let mut w = vec![0u64; e * f];
        for i in (1..e).rev() {
            for t in 0..f {
                w[i * f + t] = a.w[(i - 1) * f + t];
            }
        }
        if !top.iter().all(|&x| x == 0) {
            for j in 0..e {
                if self.neg_eis[j].iter().all(|&x| x == 0) {
                    continue;
                }
                let prod = self.wmul(&top, &self.neg_eis[j]);
                for (t, &v) in prod.iter().enumerate() {
                    w[j * f + t] = add_mod(w[j * f + t], v, self.pm);
                }
            }
        }
        Ok(Element { ring_id: self.id, w, known_prec: a.known_prec })
    }

    /// First digit of the expansion, as a residue-field element.
    pub fn residue(&self, a: &Element) -> FqElem {
        a.w[..self.f].iter().map(|&x| x % self.p).collect()
    }

    /// Exact division by `pi`; the first digit must vanish. Costs one digit
    /// of trusted precision.
    fn div_pi_exact(&self, a: &Element) -> Element {
        let e = self.e;
        let f = self.f;
        debug_assert!(a.w[..f].iter().all(|&x| x % self.p == 0), "div_pi on a non-divisible element");
        let w0p: Vec<u64> = a.w[..f].iter().map(|&x| x / self.p).collect();
        let mut w = vec![0u64; e * f];
        for i in 1..e {
            for t in 0..f {
                w[(i - 1) * f + t] = a.w[i * f + t];
            }
        }
        // + (w_0 / p) * pi^(e-1) * inv_mu
        if !w0p.iter().all(|&x| x == 0) {
            let mut shifted = Element { ring_id: self.id, w: vec![0u64; e * f], known_prec: a.known_prec };
            shifted.w[(e - 1) * f..].copy_from_slice(&w0p);
            let inv_mu = Element { ring_id: self.id, w: self.inv_mu.clone(), known_prec: self.precision };
            let add = self.mul(&shifted, &inv_mu).expect("same ring");
            for (slot, &v) in w.iter_mut().zip(&add.w) {
                *slot = add_mod(*slot, v, self.pm);
            }
        }
        Element { ring_id: self.id, w, known_prec: a.known_prec.saturating_sub(1) }
    }

    /// Exact division by `pi^n`; errors if any of the first `n` digits is
    /// nonzero or the precision budget is exceeded.
    pub fn shift_right(&self, a: &Element, n: u32) -> Result<Element> {
        self.check(a)?;
        if n > a.known_prec {
            return Err(Error::PrecisionExceeded { requested: n, known: a.known_prec });
        }
        let mut x = a.clone();
        for _ in 0..n {
            if !self.residue_is_zero(&x) {
                return Err(Error::PrecisionExhausted(
                    "shift_right on an element not divisible by pi^n".into(),
                ));
            }
            x = self.div_pi_exact(&x);
        }
        Ok(x)
    }

    fn residue_is_zero(&self, a: &Element) -> bool {
        a.w[..self.f].iter().all(|&x| x % self.p == 0)
    }

    /// Valuation: index of the first nonzero digit, or `AtLeast(known_prec)`
    /// when all trusted digits vanish.
    pub fn val(&self, a: &Element) -> Valuation {
        let mut x = a.clone();
        for i in 0..a.known_prec {
            if !self.residue_is_zero(&x) {
                return Valuation::Finite(i);
            }
            x = self.div_pi_exact(&x);
        }
        Valuation::AtLeast(a.known_prec)
    }

    /// Inverse of a unit, exact modulo `pi^known_prec`.
    pub fn invert(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        let r = self.residue(a);
        if self.fq.is_zero(&r) {
            return Err(Error::NotAUnit);
        }
        // Newton iteration y <- y(2 - a y), seeded with the residue inverse;
        // converges quadratically in p-adic precision.
        let seed = self.fq.inv(&r)?;
        let mut y = self.lift_digit(&seed);
        y.known_prec = a.known_prec;
        let two = self.integer(2);
        let mut steps = 0u32;
        let mut reach = 1u64;
        while reach < self.m as u64 {
            reach *= 2;
            steps += 1;
        }
        for _ in 0..=steps {
            let ay = self.mul(a, &y)?;
            let t = self.sub(&two, &ay)?;
            y = self.mul(&y, &t)?;
        }
        debug_assert!({
            let check = self.mul(a, &y)?;
            self.eq_repr(&check, &self.one())
        });
        y.known_prec = a.known_prec;
        Ok(y)
    }

    /// Representation equality: equality modulo `p^M`, i.e. modulo
    /// `pi^(e*M)`, which is strictly finer than the trusted precision.
    pub fn eq_repr(&self, a: &Element, b: &Element) -> bool {
        a.ring_id == b.ring_id && a.w == b.w
    }

    /// Equality modulo `pi^n` (requires both elements trusted to `n` digits).
    pub fn eq_mod(&self, a: &Element, b: &Element, n: u32) -> Result<bool> {
        let d = self.sub(a, b)?;
        if d.known_prec < n {
            return Err(Error::PrecisionExceeded { requested: n, known: d.known_prec });
        }
        Ok(self.val(&d).ge(n))
    }

    pub fn is_zero_at_prec(&self, a: &Element) -> bool {
        matches!(self.val(a), Valuation::AtLeast(_))
    }

    // ---- canonical digits ----

    /// The first `n` digits of the canonical expansion.
    pub fn digits(&self, a: &Element, n: u32) -> Result<Vec<FqElem>> {
        self.check(a)?;
        if n > a.known_prec {
            return Err(Error::PrecisionExceeded { requested: n, known: a.known_prec });
        }
        let mut out = Vec::with_capacity(n as usize);
        let mut x = a.clone();
        for _ in 0..n {
            let d = self.residue(&x);
            let lifted = self.lift_digit(&d);
            let diff = self.sub(&x, &lifted)?;
            x = self.div_pi_exact(&diff);
            out.push(d);
        }
        Ok(out)
    }

    /// Canonical element with the given digit expansion (then zeros): an
    /// exact representative, trusted to full precision.
    pub fn from_digits(&self, digits: &[FqElem]) -> Element {
        let mut acc = self.zero();
        for d in digits.iter().rev() {
            acc = self.mul_by_pi(&acc).expect("same ring");
            let lifted = self.lift_digit(d);
            acc = self.add(&acc, &lifted).expect("same ring");
        }
        acc.known_prec = self.precision;
        acc
    }

    /// Projection to `O/pi^n O`.
    pub fn reduce(&self, a: &Element, n: u32) -> Result<ResidueClass> {
        Ok(ResidueClass { level: n, digits: self.digits(a, n)? })
    }

    /// Canonical (exact) lift of a residue class.
    pub fn lift(&self, class: &ResidueClass) -> Element {
        self.from_digits(&class.digits)
    }

    /// Rank of a residue class in the canonical enumeration: digits are
    /// little-endian in base `p^f`, so for `K = Q_p` the rank is the usual
    /// integer representative.
    pub fn rank(&self, class: &ResidueClass) -> u64 {
        let q = self.fq.card();
        let mut r = 0u64;
        for d in class.digits.iter().rev() {
            r = r * q + self.fq.rank(d);
        }
        r
    }

    pub fn unrank(&self, mut r: u64, level: u32) -> ResidueClass {
        let q = self.fq.card();
        let mut digits = Vec::with_capacity(level as usize);
        for _ in 0..level {
            digits.push(self.fq.unrank(r % q));
            r /= q;
        }
        ResidueClass { level, digits }
    }

    /// Canonical lift of a rank; exact element trusted to full precision.
    pub fn lift_rank(&self, r: u64, level: u32) -> Element {
        self.lift(&self.unrank(r, level))
    }

    /// Rank of `a mod pi^n`.
    pub fn rank_of(&self, a: &Element, n: u32) -> Result<u64> {
        Ok(self.rank(&self.reduce(a, n)?))
    }

    /// Digit string for a residue class, little-endian. Single characters
    /// for a prime subfield with a one-character alphabet; dot-separated
    /// digit ranks when `f > 1` or the alphabet outgrows decimal digits.
    pub fn digit_string(&self, class: &ResidueClass) -> String {
        if self.f == 1 && self.p <= 10 {
            class
                .digits
                .iter()
                .map(|d| char::from_digit(self.fq.rank(d) as u32, 10).unwrap())
                .collect()
        } else {
            class
                .digits
                .iter()
                .map(|d| self.fq.rank(d).to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + m as u128 - (b % m) as u128;
    (s % m as u128) as u64
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut out: u64 = 1;
    for _ in 0..exp {
        out = out.checked_mul(base)?;
    }
    Some(out)
}

/// Standard rings used across tests and the verification suites.
pub fn standard_ring(p: u64, e: usize, f: usize, precision: u32) -> Result<RingSpec> {
    let unram: Vec<i64> = match (p, f) {
        (_, 1) => vec![0, 1],
        (2, 2) => vec![1, 1, 1],
        (3, 2) => vec![1, 0, 1],
        (5, 2) => vec![2, 0, 1],
        (2, 3) => vec![1, 1, 0, 1],
        _ => return Err(Error::UnsupportedRing(format!("no standard unramified polynomial for p={p}, f={f}"))),
    };
    let eis: Vec<Vec<i64>> = if e == 1 {
        vec![vec![-(p as i64)], vec![1]]
    } else {
        let mut v = vec![vec![-(p as i64)]];
        for _ in 1..e {
            v.push(vec![0]);
        }
        v.push(vec![1]);
        v
    };
    RingSpec::new(p, f, &unram, e, &eis, precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2(prec: u32) -> RingSpec {
        standard_ring(2, 1, 1, prec).unwrap()
    }

    fn q2_sqrt2(prec: u32) -> RingSpec {
        standard_ring(2, 2, 1, prec).unwrap()
    }

    #[test]
    fn ring_new_base_cases() {
        // Z_2 with pi = 2
        let r = z2(8);
        assert_eq!((r.p(), r.e(), r.f(), r.degree()), (2, 1, 1, 1));
        // Q_2(sqrt 2)
        let r = q2_sqrt2(8);
        assert_eq!((r.e(), r.f(), r.degree()), (2, 1, 2));
        // unramified quadratic over Q_2, residue field F_4
        let r = standard_ring(2, 1, 2, 8).unwrap();
        assert_eq!((r.e(), r.f(), r.degree()), (1, 2, 2));
        assert_eq!(r.fq().card(), 4);
    }

    #[test]
    fn ring_new_rejections() {
        assert_eq!(
            RingSpec::new(4, 1, &[0, 1], 1, &[vec![-4], vec![1]], 8).unwrap_err(),
            Error::NotPrime(4)
        );
        // x^2+1 reducible mod 2
        assert!(matches!(
            RingSpec::new(2, 2, &[1, 0, 1], 1, &[vec![-2], vec![1]], 8).unwrap_err(),
            Error::NotIrreducible
        ));
        // x^2 - 4: constant term has v_p = 2
        assert!(matches!(
            RingSpec::new(2, 1, &[0, 1], 2, &[vec![-4], vec![0], vec![1]], 8).unwrap_err(),
            Error::NotEisenstein(_)
        ));
        // x^2 - 3: constant term is a unit
        assert!(matches!(
            RingSpec::new(2, 1, &[0, 1], 2, &[vec![-3], vec![0], vec![1]], 8).unwrap_err(),
            Error::NotEisenstein(_)
        ));
        assert!(matches!(
            RingSpec::new(2, 1, &[0, 1], 1, &[vec![-2], vec![1]], 1).unwrap_err(),
            Error::PrecisionTooSmall { .. }
        ));
    }

    #[test]
    fn z2_basic_arithmetic() {
        let r = z2(8);
        let one = r.one();
        let two = r.add(&one, &one).unwrap();
        let d = r.digits(&two, 2).unwrap();
        assert_eq!(d, vec![vec![0], vec![1]]);
        assert_eq!(r.val(&two), Valuation::Finite(1));
        assert_eq!(r.val(&r.integer(2)), Valuation::Finite(1)); // val(p) = e = 1
        assert_eq!(r.val(&one), Valuation::Finite(0));
    }

    #[test]
    fn z3_mul_matches_integers() {
        let r = standard_ring(3, 1, 1, 8).unwrap();
        let prod = r.mul(&r.integer(4), &r.integer(7)).unwrap();
        // 28 = 1 + 0*3 + 0*9 + 1*27
        let d = r.digits(&prod, 4).unwrap();
        let got: Vec<u64> = d.iter().map(|x| x[0]).collect();
        assert_eq!(got, vec![1, 0, 0, 1]);
    }

    #[test]
    fn eisenstein_pi_squared_is_two() {
        let r = q2_sqrt2(8);
        let pi = r.pi();
        let pi2 = r.mul(&pi, &pi).unwrap();
        assert!(r.eq_mod(&pi2, &r.integer(2), 8).unwrap());
        assert_eq!(r.val(&pi2), Valuation::Finite(2));
        assert_eq!(r.val(&r.integer(2)), Valuation::Finite(2)); // val(p) = e = 2
        // val(2 + pi) = 1
        let x = r.add(&r.integer(2), &pi).unwrap();
        assert_eq!(r.val(&x), Valuation::Finite(1));
    }

    #[test]
    fn invert_small_cases() {
        // Z_2 at precision 4: 3 * 11 = 33 = 1 mod 16
        let r = z2(4);
        let inv3 = r.invert(&r.integer(3)).unwrap();
        assert!(r.eq_mod(&inv3, &r.integer(11), 4).unwrap());
        // Z_3 at precision 3: 2 * 14 = 28 = 1 mod 27
        let r = standard_ring(3, 1, 1, 3).unwrap();
        let inv2 = r.invert(&r.integer(2)).unwrap();
        assert!(r.eq_mod(&inv2, &r.integer(14), 3).unwrap());
        // invert(1) = 1
        let r = z2(8);
        assert!(r.eq_mod(&r.invert(&r.one()).unwrap(), &r.one(), 8).unwrap());
        // pi is not a unit
        let r = q2_sqrt2(8);
        assert_eq!(r.invert(&r.pi()).unwrap_err(), Error::NotAUnit);
    }

    #[test]
    fn reduce_and_rank() {
        let r = z2(8);
        let six = r.integer(6);
        let c = r.reduce(&six, 2).unwrap();
        assert_eq!(r.digit_string(&c), "01"); // 6 = 2 mod 4
        assert_eq!(r.rank(&c), 2);
        // section property: reduce(lift(c)) = c
        let lifted = r.lift(&c);
        assert_eq!(r.reduce(&lifted, 2).unwrap(), c);
        // pi^2 reduces to class "0" at level 1
        let rr = q2_sqrt2(8);
        let pi2 = rr.mul(&rr.pi(), &rr.pi()).unwrap();
        assert_eq!(rr.digit_string(&rr.reduce(&pi2, 1).unwrap()), "0");
    }

    #[test]
    fn digit_roundtrip_extension() {
        let r = standard_ring(2, 1, 2, 6).unwrap();
        // walk all level-3 residues
        for rank in 0..r.residue_count(3).unwrap() {
            let x = r.lift_rank(rank, 3);
            assert_eq!(r.rank_of(&x, 3).unwrap(), rank);
        }
    }

    #[test]
    fn shift_right_loses_precision() {
        let r = z2(8);
        let four = r.integer(4);
        let one = r.shift_right(&four, 2).unwrap();
        assert_eq!(one.known_prec(), 6);
        assert!(r.eq_mod(&one, &r.one(), 6).unwrap());
        assert!(r.shift_right(&r.one(), 1).is_err());
    }

    #[test]
    fn val_of_zero_is_marker() {
        let r = z2(8);
        assert_eq!(r.val(&r.zero()), Valuation::AtLeast(8));
        assert!(r.val(&r.zero()).ge(8));
        assert!(!r.val(&r.zero()).is_finite());
    }

    #[test]
    fn extension_digit_strings_use_separators() {
        let r = standard_ring(2, 1, 2, 8).unwrap();
        // u + 1 has digit rank 3 at level 1, then zeros
        let x = r.from_pi_poly(&[vec![1, 1]]).unwrap();
        assert_eq!(r.digit_string(&r.reduce(&x, 3).unwrap()), "3.0.0");
    }

    #[test]
    fn shared_between_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<RingSpec>();
        assert_send_sync::<Element>();
        // immutable values are safe to fan out across workers
        let r = std::sync::Arc::new(z2(8));
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let r = r.clone();
                std::thread::spawn(move || {
                    let x = r.integer(t as i128 + 3);
                    r.rank_of(&r.mul(&x, &x).unwrap(), 4).unwrap()
                })
            })
            .collect();
        let got: Vec<u64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(got, vec![9, 0, 9, 4]); // squares mod 16
    }
}
