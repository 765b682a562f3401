//! Residue-field arithmetic.
//!
//! The residue field of the ring is `F_{p^f}`, realized as polynomials in the
//! unramified generator modulo a monic irreducible polynomial over `F_p`.
//! Elements are coefficient vectors of length `f` with entries in `[0, p)`.

use crate::error::{Error, Result};

/// A residue-field element: `f` coefficients in `[0, p)`, little-endian in
/// the unramified generator.
pub type FqElem = Vec<u64>;

/// The finite field `F_{p^f}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fq {
    p: u64,
    f: usize,
    /// Monic modulus of degree `f`, little-endian, entries in `[0, p)`.
    modulus: Vec<u64>,
}

impl Fq {
    /// Builds the field, checking that `modulus` is monic of degree `f` and
    /// irreducible over `F_p`.
    pub fn new(p: u64, f: usize, modulus: Vec<u64>) -> Result<Self> {
        if f == 0 {
            return Err(Error::UnsupportedRing("residue degree must be >= 1".into()));
        }
        if modulus.len() != f + 1 || modulus[f] % p != 1 {
            return Err(Error::NotIrreducible);
        }
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        let field = Fq { p, f, modulus };
        if !field.modulus_is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        Ok(field)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// Field cardinality `p^f`.
    pub fn card(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.f]
    }

    pub fn one(&self) -> FqElem {
        let mut v = vec![0; self.f];
        v[0] = 1;
        v
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, a: &FqElem) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    pub fn from_int(&self, n: i64) -> FqElem {
        let mut v = vec![0; self.f];
        v[0] = n.rem_euclid(self.p as i64) as u64;
        v
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let mut acc = vec![0u64; 2 * self.f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] = (acc[i + j] + ((x as u128 * y as u128) % self.p as u128) as u64)
                    % self.p;
            }
        }
        self.reduce_poly(acc)
    }

    /// Reduces a coefficient vector modulo the field modulus.
    fn reduce_poly(&self, mut acc: Vec<u64>) -> FqElem {
        for i in (self.f..acc.len()).rev() {
            let c = acc[i];
            acc[i] = 0;
            if c == 0 {
                continue;
            }
            for j in 0..self.f {
                let m = self.modulus[j];
                if m != 0 {
                    let sub = (c as u128 * m as u128 % self.p as u128) as u64;
                    acc[i - self.f + j] = (acc[i - self.f + j] + self.p - sub) % self.p;
                }
            }
        }
        acc.truncate(self.f);
        acc
    }

    pub fn pow(&self, a: &FqElem, mut exp: u64) -> FqElem {
        let mut base = a.clone();
        let mut out = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                out = self.mul(&out, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        out
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: &FqElem) -> Result<FqElem> {
        if self.is_zero(a) {
            return Err(Error::NotAUnit);
        }
        Ok(self.pow(a, self.card() - 2))
    }

    /// Order of `a` in the multiplicative group; divides `p^f - 1`.
    pub fn order(&self, a: &FqElem) -> Result<u64> {
        if self.is_zero(a) {
            return Err(Error::NotAUnit);
        }
        let group = self.card() - 1;
        let mut ord = group;
        for q in prime_factors(group) {
            while ord.is_multiple_of(q) && self.is_one(&self.pow(a, ord / q)) {
                ord /= q;
            }
        }
        Ok(ord)
    }

    /// Canonical rank of a digit: coefficients read little-endian in base `p`.
    pub fn rank(&self, a: &FqElem) -> u64 {
        let mut r = 0u64;
        for &c in a.iter().rev() {
            r = r * self.p + c;
        }
        r
    }

    pub fn unrank(&self, mut r: u64) -> FqElem {
        let mut v = vec![0; self.f];
        for c in v.iter_mut() {
            *c = r % self.p;
            r /= self.p;
        }
        v
    }

    /// Rabin irreducibility test for the modulus over `F_p`.
    fn modulus_is_irreducible(&self) -> bool {
        if self.f == 1 {
            return true;
        }
        // x^(p^f) == x mod g, and gcd(x^(p^(f/r)) - x, g) = 1 for primes r | f.
        let x = poly_x(self.p);
        let frob_f = self.frobenius_power(&x, self.f as u32);
        if poly_mod_sub(&frob_f, &x, self.p, &self.modulus) != vec![0] {
            return false;
        }
        for r in prime_factors(self.f as u64) {
            let frob = self.frobenius_power(&x, (self.f as u64 / r) as u32);
            let diff = poly_mod_sub(&frob, &x, self.p, &self.modulus);
            let g = poly_gcd(&diff, &self.modulus, self.p);
            if poly_deg(&g) != 0 {
                return false;
            }
        }
        true
    }

    /// Computes `a^(p^k)` modulo the field modulus.
    fn frobenius_power(&self, a: &[u64], k: u32) -> Vec<u64> {
        let mut t = a.to_vec();
        for _ in 0..k {
            t = poly_pow_mod(&t, self.p, self.p, &self.modulus);
        }
        t
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// -- dense polynomial helpers over F_p, little-endian, used only for the
//    irreducibility test --

fn poly_deg(a: &[u64]) -> usize {
    let mut d = a.len();
    while d > 1 && a[d - 1] == 0 {
        d -= 1;
    }
    d - 1
}

fn poly_x(_p: u64) -> Vec<u64> {
    vec![0, 1]
}

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    a
}

fn poly_mul_mod(a: &[u64], b: &[u64], p: u64, m: &[u64]) -> Vec<u64> {
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] = (acc[i + j] + (x as u128 * y as u128 % p as u128) as u64) % p;
        }
    }
    poly_rem(&acc, m, p)
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let dm = poly_deg(m);
    let lead_inv = mod_inv(m[dm], p);
    let mut r = a.to_vec();
    while poly_deg(&r) >= dm && !(poly_deg(&r) == 0 && r[0] == 0) {
        let dr = poly_deg(&r);
        if dr < dm {
            break;
        }
        let c = (r[dr] as u128 * lead_inv as u128 % p as u128) as u64;
        if c != 0 {
            for j in 0..=dm {
                let sub = (c as u128 * m[j] as u128 % p as u128) as u64;
                r[dr - dm + j] = (r[dr - dm + j] + p - sub) % p;
            }
        }
        r = poly_trim(r);
        if r.len() == 1 && r[0] == 0 {
            break;
        }
    }
    poly_trim(r)
}

fn poly_pow_mod(a: &[u64], mut exp: u64, p: u64, m: &[u64]) -> Vec<u64> {
    let mut base = poly_rem(a, m, p);
    let mut out = vec![1u64];
    while exp > 0 {
        if exp & 1 == 1 {
            out = poly_mul_mod(&out, &base, p, m);
        }
        base = poly_mul_mod(&base, &base, p, m);
        exp >>= 1;
    }
    out
}

fn poly_mod_sub(a: &[u64], b: &[u64], p: u64, m: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y % p) % p
        })
        .collect();
    poly_rem(&out, m, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = poly_trim(a.to_vec());
    let mut y = poly_trim(b.to_vec());
    while !(y.len() == 1 && y[0] == 0) {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    let mut out = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            out = (out as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        exp >>= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_arithmetic() {
        // F_4 = F_2[u]/(u^2+u+1)
        let fq = Fq::new(2, 2, vec![1, 1, 1]).unwrap();
        let u = vec![0, 1];
        let u2 = fq.mul(&u, &u);
        assert_eq!(u2, vec![1, 1]); // u^2 = u + 1
        let u3 = fq.mul(&u2, &u);
        assert!(fq.is_one(&u3)); // u has order 3
        assert_eq!(fq.order(&u).unwrap(), 3);
    }

    #[test]
    fn reducible_rejected() {
        // x^2 + 1 = (x+1)^2 over F_2
        assert_eq!(Fq::new(2, 2, vec![1, 0, 1]).unwrap_err(), Error::NotIrreducible);
        // x^2 + 1 is irreducible over F_3
        assert!(Fq::new(3, 2, vec![1, 0, 1]).is_ok());
    }

    #[test]
    fn inverse_and_order_f9() {
        let fq = Fq::new(3, 2, vec![1, 0, 1]).unwrap();
        for r in 1..fq.card() {
            let a = fq.unrank(r);
            let inv = fq.inv(&a).unwrap();
            assert!(fq.is_one(&fq.mul(&a, &inv)));
            let ord = fq.order(&a).unwrap();
            assert!(fq.is_one(&fq.pow(&a, ord)));
            assert_eq!((fq.card() - 1) % ord, 0);
        }
    }

    #[test]
    fn rank_roundtrip() {
        let fq = Fq::new(5, 1, vec![0, 1]).unwrap();
        for r in 0..5 {
            assert_eq!(fq.rank(&fq.unrank(r)), r);
        }
    }
}
