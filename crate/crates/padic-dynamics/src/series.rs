//! The algebra `O_K<x>` of convergent power series: coefficients in `O_K`
//! tending to zero, so that evaluation converges on all of `O_K`.
//!
//! A machine object is a finite coefficient vector together with a
//! truncation certificate `tail_val`: every omitted coefficient has
//! valuation at least `tail_val`. Polynomials carry the full working
//! precision as their certificate. The class is closed under derivation and
//! composition, and truncation certificates propagate through both.

use crate::error::{Error, Result};
use crate::fq::FqElem;
use crate::ring::{Element, RingSpec, Valuation};

/// A truncated element of `O_K<x>`.
#[derive(Debug, Clone)]
pub struct ConvergentSeries {
    ring_id: u64,
    coeffs: Vec<Element>,
    tail_val: u32,
}

/// Weierstrass degree: the largest index carrying a unit coefficient, or
/// infinite when every coefficient sits in the maximal ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeierstrassDegree {
    Finite(usize),
    Infinite,
}

impl ConvergentSeries {
    /// Builds a series from explicit coefficients and a tail certificate.
    pub fn new(ring: &RingSpec, coeffs: Vec<Element>, tail_val: u32) -> Result<ConvergentSeries> {
        if tail_val == 0 {
            return Err(Error::Descriptor(
                "tail_val must be >= 1 for a convergent series certificate".into(),
            ));
        }
        for c in &coeffs {
            if c.ring_id() != ring.id() {
                return Err(Error::RingMismatch);
            }
        }
        Ok(ConvergentSeries { ring_id: ring.id(), coeffs, tail_val: tail_val.min(ring.precision()) })
    }

    /// A polynomial: the tail certificate is the full working precision.
    pub fn poly(ring: &RingSpec, coeffs: Vec<Element>) -> Result<ConvergentSeries> {
        Self::new(ring, coeffs, ring.precision())
    }

    /// Polynomial with rational-integer coefficients, little-endian.
    pub fn poly_ints(ring: &RingSpec, coeffs: &[i128]) -> ConvergentSeries {
        let elems = coeffs.iter().map(|&c| ring.integer(c)).collect();
        ConvergentSeries { ring_id: ring.id(), coeffs: elems, tail_val: ring.precision() }
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    pub fn coeff(&self, ring: &RingSpec, i: usize) -> Element {
        self.coeffs.get(i).cloned().unwrap_or_else(|| ring.zero())
    }

    pub fn tail_val(&self) -> u32 {
        self.tail_val
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn ring_id(&self) -> u64 {
        self.ring_id
    }

    fn check(&self, ring: &RingSpec) -> Result<()> {
        if self.ring_id != ring.id() {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    /// Evaluation by Horner's rule. The result is trusted to
    /// `min(x.known_prec, tail_val, coefficient precisions)`.
    pub fn eval(&self, ring: &RingSpec, x: &Element) -> Result<Element> {
        self.check(ring)?;
        if x.ring_id() != ring.id() {
            return Err(Error::RingMismatch);
        }
        let mut acc = ring.zero();
        for c in self.coeffs.iter().rev() {
            acc = ring.mul(&acc, x)?;
            acc = ring.add(&acc, c)?;
        }
        Ok(acc.with_prec(self.tail_val))
    }

    /// Coefficientwise derivative: coefficient `i-1` of the result is
    /// `i * a_i`. The tail certificate is unchanged since `|i a_i| <= |a_i|`.
    pub fn derivative(&self, ring: &RingSpec) -> Result<ConvergentSeries> {
        self.check(ring)?;
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(ring.mul(c, &ring.integer(i as i128))?);
        }
        Ok(ConvergentSeries { ring_id: self.ring_id, coeffs: out, tail_val: self.tail_val })
    }

    pub fn add(&self, ring: &RingSpec, other: &ConvergentSeries) -> Result<ConvergentSeries> {
        self.check(ring)?;
        other.check(ring)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(ring.add(&self.coeff(ring, i), &other.coeff(ring, i))?);
        }
        Ok(ConvergentSeries {
            ring_id: self.ring_id,
            coeffs: out,
            tail_val: self.tail_val.min(other.tail_val),
        })
    }

    /// Series product. Stored coefficients are exact in the stored range;
    /// both tail certificates cap the precision of the result.
    pub fn mul(&self, ring: &RingSpec, other: &ConvergentSeries) -> Result<ConvergentSeries> {
        self.check(ring)?;
        other.check(ring)?;
        let tail = self.tail_val.min(other.tail_val);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(ConvergentSeries { ring_id: self.ring_id, coeffs: vec![], tail_val: tail });
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![ring.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = ring.mul(a, b)?;
                out[i + j] = ring.add(&out[i + j], &prod)?;
            }
        }
        let out = out.into_iter().map(|c| c.with_prec(tail)).collect();
        Ok(ConvergentSeries { ring_id: self.ring_id, coeffs: out, tail_val: tail })
    }

    pub fn scale(&self, ring: &RingSpec, s: &Element) -> Result<ConvergentSeries> {
        self.check(ring)?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| ring.mul(c, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergentSeries { ring_id: self.ring_id, coeffs, tail_val: self.tail_val })
    }

    /// Composition `self(other)`, requiring `other` integral so the result
    /// stays in `O_K<x>`.
    pub fn compose(&self, ring: &RingSpec, other: &ConvergentSeries) -> Result<ConvergentSeries> {
        self.check(ring)?;
        other.check(ring)?;
        let tail = self.tail_val.min(other.tail_val);
        let mut acc = ConvergentSeries { ring_id: self.ring_id, coeffs: vec![], tail_val: tail };
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(ring, other)?;
            let c_series = ConvergentSeries {
                ring_id: self.ring_id,
                coeffs: vec![c.clone()],
                tail_val: tail,
            };
            acc = acc.add(ring, &c_series)?;
        }
        acc.tail_val = tail;
        Ok(acc)
    }

    /// `k`-fold iterate under composition, `k >= 1`.
    pub fn iterate(&self, ring: &RingSpec, k: u32) -> Result<ConvergentSeries> {
        assert!(k >= 1, "iterate needs k >= 1");
        let mut out = self.clone();
        for _ in 1..k {
            out = out.compose(ring, self)?;
        }
        Ok(out)
    }

    /// Pointwise orbit evaluation `self^(k)(x)` without building the
    /// composed series.
    pub fn eval_iterated(&self, ring: &RingSpec, x: &Element, k: u64) -> Result<Element> {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.eval(ring, &y)?;
        }
        Ok(y)
    }

    /// Largest stored index carrying a unit coefficient.
    pub fn weierstrass_degree(&self, ring: &RingSpec) -> Result<WeierstrassDegree> {
        self.check(ring)?;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if let Valuation::Finite(0) = ring.val(c) {
                return Ok(WeierstrassDegree::Finite(i));
            }
        }
        Ok(WeierstrassDegree::Infinite)
    }

    /// Weierstrass preparation: factors `self = g * h` with `g` monic of
    /// degree `j` (the largest index attaining the maximal coefficient
    /// absolute value) and `h` nonvanishing on `O_K`.
    ///
    /// Implemented by two Weierstrass divisions run as successive
    /// approximations modulo increasing powers of `pi`: first `x^j` by the
    /// unit-scaled series to produce `g`, then the series by `g` to produce
    /// `h`, whose remainder must vanish at working precision.
    pub fn weierstrass_factor(
        &self,
        ring: &RingSpec,
    ) -> Result<(ConvergentSeries, ConvergentSeries)> {
        self.check(ring)?;
        // v = minimal coefficient valuation, j = largest index attaining it.
        let mut v_min: Option<u32> = None;
        for c in &self.coeffs {
            if let Valuation::Finite(v) = ring.val(c) {
                v_min = Some(v_min.map_or(v, |m: u32| m.min(v)));
            }
        }
        let v = v_min.ok_or(Error::AllCoefficientsSmall)?;
        if v >= self.tail_val {
            // cannot certify that omitted coefficients do not dominate
            return Err(Error::AllCoefficientsSmall);
        }
        let j = self
            .coeffs
            .iter()
            .rposition(|c| matches!(ring.val(c), Valuation::Finite(x) if x == v))
            .expect("v was attained");

        let work_prec = self.tail_val.min(ring.precision()) - v;
        // unit-scaled series: phi / pi^v, with wideg = j
        let scaled = if v == 0 {
            self.clone()
        } else {
            let coeffs = self
                .coeffs
                .iter()
                .map(|c| ring.shift_right(c, v))
                .collect::<Result<Vec<_>>>()?;
            ConvergentSeries { ring_id: self.ring_id, coeffs, tail_val: work_prec }
        };

        // x^j = q * scaled + r  =>  g = x^j - r is monic of degree j
        let mut xj = vec![ring.zero(); j + 1];
        xj[j] = ring.one();
        let xj = ConvergentSeries { ring_id: self.ring_id, coeffs: xj, tail_val: work_prec };
        let (_, r) = weierstrass_divide(ring, &xj, &scaled, j, work_prec)?;
        let mut g_coeffs = Vec::with_capacity(j + 1);
        for i in 0..j {
            g_coeffs.push(ring.neg(&r.coeff(ring, i))?);
        }
        g_coeffs.push(ring.one());
        let g = ConvergentSeries { ring_id: self.ring_id, coeffs: g_coeffs, tail_val: ring.precision() };

        // scaled = h * g + r2 with r2 = 0 at working precision
        let (h_unit, r2) = weierstrass_divide(ring, &scaled, &g, j, work_prec)?;
        for c in r2.coeffs() {
            if !ring.val(&c.clone().with_prec(work_prec)).ge(work_prec) {
                return Err(Error::ClassificationMismatch(
                    "weierstrass preparation remainder does not vanish".into(),
                ));
            }
        }
        let h = if v == 0 {
            h_unit
        } else {
            let piv = ring.pow(&ring.pi(), v as u128)?;
            h_unit.scale(ring, &piv)?
        };
        Ok((g, h))
    }
}

/// Weierstrass division `f = q * g + r` with `deg r < w`, where `g` has
/// Weierstrass degree `w` (unit coefficient at index `w`, non-units above).
/// Successive approximation modulo `pi, pi^2, ..., pi^prec`.
fn weierstrass_divide(
    ring: &RingSpec,
    f: &ConvergentSeries,
    g: &ConvergentSeries,
    w: usize,
    prec: u32,
) -> Result<(ConvergentSeries, ConvergentSeries)> {
    let fq = ring.fq();
    let g_res: Vec<FqElem> = g.coeffs().iter().map(|c| ring.residue(c)).collect();
    let lead = g_res.get(w).cloned().unwrap_or_else(|| fq.zero());
    let lead_inv = fq.inv(&lead).map_err(|_| Error::AllCoefficientsSmall)?;
    for r in g_res.iter().skip(w + 1) {
        if !fq.is_zero(r) {
            return Err(Error::ClassificationMismatch(
                "divisor has unit coefficients above its Weierstrass degree".into(),
            ));
        }
    }

    let mut q = vec![ring.zero(); f.coeffs().len().saturating_sub(w) + 1];
    let mut rem = vec![ring.zero(); w.max(1)];
    let mut residual = f.clone();
    let mut pi_pow = ring.one();

    for step in 0..prec {
        // digit-0 polynomial of residual / pi^step
        let mut bar: Vec<FqElem> = Vec::with_capacity(residual.coeffs().len());
        for c in residual.coeffs() {
            let shifted = ring.shift_right(c, step).map_err(|_| {
                Error::PrecisionExhausted("weierstrass division ran out of digits".into())
            })?;
            bar.push(ring.residue(&shifted));
        }
        // classical polynomial division of bar by g_res over the residue field
        let mut bar_q = vec![fq.zero(); bar.len().saturating_sub(w) + 1];
        let mut bar_r = bar.clone();
        for i in (w..bar_r.len()).rev() {
            let c = bar_r[i].clone();
            if fq.is_zero(&c) {
                continue;
            }
            let qc = fq.mul(&c, &lead_inv);
            bar_q[i - w] = qc.clone();
            for (t, gr) in g_res.iter().enumerate().take(w + 1) {
                let sub = fq.mul(&qc, gr);
                bar_r[i - w + t] = fq.sub(&bar_r[i - w + t], &sub);
            }
        }
        bar_r.truncate(w.max(1));

        // accumulate pi^step * lift(bar_q) into q, same for rem, and subtract
        // pi^step * (lift(bar_q) * g + lift(bar_r)) from the residual
        let lift_q = ConvergentSeries {
            ring_id: f.ring_id,
            coeffs: bar_q.iter().map(|d| ring.lift_digit(d)).collect(),
            tail_val: ring.precision(),
        };
        let lift_r = ConvergentSeries {
            ring_id: f.ring_id,
            coeffs: bar_r.iter().map(|d| ring.lift_digit(d)).collect(),
            tail_val: ring.precision(),
        };
        if q.len() < lift_q.coeffs().len() {
            q.resize(lift_q.coeffs().len(), ring.zero());
        }
        for (i, c) in lift_q.coeffs().iter().enumerate() {
            q[i] = ring.add(&q[i], &ring.mul(c, &pi_pow)?)?;
        }
        for (i, c) in lift_r.coeffs().iter().enumerate() {
            rem[i] = ring.add(&rem[i], &ring.mul(c, &pi_pow)?)?;
        }
        let consumed = lift_q.mul(ring, g)?.add(ring, &lift_r)?.scale(ring, &pi_pow)?;
        let neg = consumed.scale(ring, &ring.integer(-1))?;
        residual = residual.add(ring, &neg)?;
        pi_pow = ring.mul_by_pi(&pi_pow)?;
    }

    let q = ConvergentSeries { ring_id: f.ring_id, coeffs: q, tail_val: prec.max(1) };
    let rem = ConvergentSeries { ring_id: f.ring_id, coeffs: rem, tail_val: prec.max(1) };
    Ok((q, rem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::standard_ring;

    #[test]
    fn eval_basics() {
        let r = standard_ring(2, 1, 1, 8).unwrap();
        let phi = ConvergentSeries::poly_ints(&r, &[1, 1]); // x + 1
        let y = phi.eval(&r, &r.zero()).unwrap();
        assert!(r.eq_mod(&y, &r.one(), 8).unwrap());

        let sq = ConvergentSeries::poly_ints(&r, &[0, 0, 1]); // x^2
        let y = sq.eval(&r, &r.integer(3)).unwrap();
        let d = r.digits(&y, 4).unwrap();
        let got: Vec<u64> = d.iter().map(|x| x[0]).collect();
        assert_eq!(got, vec![1, 0, 0, 1]); // 9
    }

    #[test]
    fn derivative_rules() {
        let r = standard_ring(3, 1, 1, 8).unwrap();
        let sq = ConvergentSeries::poly_ints(&r, &[0, 0, 1]);
        let d = sq.derivative(&r).unwrap(); // 2x
        assert!(r.eq_mod(&d.coeff(&r, 1), &r.integer(2), 8).unwrap());
        assert_eq!(d.degree(), 1);

        let cubic = ConvergentSeries::poly_ints(&r, &[3, 0, 0, 1]); // 3 + x^3
        let d = cubic.derivative(&r).unwrap(); // 3x^2
        assert!(r.eq_mod(&d.coeff(&r, 2), &r.integer(3), 8).unwrap());
        assert!(r.eq_mod(&d.coeff(&r, 0), &r.zero(), 8).unwrap());
    }

    #[test]
    fn compose_small() {
        let r = standard_ring(2, 1, 1, 8).unwrap();
        let xp1 = ConvergentSeries::poly_ints(&r, &[1, 1]);
        let c = xp1.compose(&r, &xp1).unwrap(); // x + 2
        assert!(r.eq_mod(&c.coeff(&r, 0), &r.integer(2), 8).unwrap());
        assert!(r.eq_mod(&c.coeff(&r, 1), &r.one(), 8).unwrap());

        let sq = ConvergentSeries::poly_ints(&r, &[0, 0, 1]);
        let c = sq.compose(&r, &xp1).unwrap(); // x^2 + 2x + 1
        assert!(r.eq_mod(&c.coeff(&r, 0), &r.one(), 8).unwrap());
        assert!(r.eq_mod(&c.coeff(&r, 1), &r.integer(2), 8).unwrap());
        assert!(r.eq_mod(&c.coeff(&r, 2), &r.one(), 8).unwrap());
    }

    #[test]
    fn iterate_translation_and_linear() {
        let r = standard_ring(2, 1, 1, 8).unwrap();
        let xp1 = ConvergentSeries::poly_ints(&r, &[1, 1]);
        let it = xp1.iterate(&r, 3).unwrap(); // x + 3
        assert!(r.eq_mod(&it.coeff(&r, 0), &r.integer(3), 8).unwrap());

        let lin = ConvergentSeries::poly_ints(&r, &[0, 3]); // 3x
        let it = lin.iterate(&r, 4).unwrap(); // 81x
        assert!(r.eq_mod(&it.coeff(&r, 1), &r.integer(81), 8).unwrap());
    }

    #[test]
    fn wideg_examples() {
        let r = standard_ring(2, 1, 1, 8).unwrap();
        let s = ConvergentSeries::poly_ints(&r, &[2, 3, 2]);
        assert_eq!(s.weierstrass_degree(&r).unwrap(), WeierstrassDegree::Finite(1));
        let s = ConvergentSeries::poly_ints(&r, &[-2, 0, 1]);
        assert_eq!(s.weierstrass_degree(&r).unwrap(), WeierstrassDegree::Finite(2));
        let s = ConvergentSeries::poly_ints(&r, &[2, 2]);
        assert_eq!(s.weierstrass_degree(&r).unwrap(), WeierstrassDegree::Infinite);
    }

    #[test]
    fn weierstrass_factor_monic_cases() {
        let r = standard_ring(2, 1, 1, 12).unwrap();
        // x^2 - 2 is already monic with unit cofactor
        let s = ConvergentSeries::poly_ints(&r, &[-2, 0, 1]);
        let (g, h) = s.weierstrass_factor(&r).unwrap();
        assert_eq!(g.degree(), 2);
        assert!(r.eq_mod(&g.coeff(&r, 0), &r.integer(-2), 10).unwrap());
        assert!(r.eq_mod(&h.coeff(&r, 0), &r.one(), 10).unwrap());

        // 2x + x^2 -> g = x^2 + 2x, h = 1
        let s = ConvergentSeries::poly_ints(&r, &[0, 2, 1]);
        let (g, h) = s.weierstrass_factor(&r).unwrap();
        assert_eq!(g.degree(), 2);
        assert!(r.eq_mod(&g.coeff(&r, 1), &r.integer(2), 10).unwrap());
        assert!(r.eq_mod(&h.coeff(&r, 0), &r.one(), 10).unwrap());
    }

    #[test]
    fn weierstrass_factor_nontrivial() {
        let r = standard_ring(3, 1, 1, 12).unwrap();
        // 3 + x + 3x^2 + 9x^3: wideg 1, so g degree 1 and unit h
        let s = ConvergentSeries::poly_ints(&r, &[3, 1, 3, 9]);
        let (g, h) = s.weierstrass_factor(&r).unwrap();
        assert_eq!(g.degree(), 1);
        // multiply-back check, digitwise at working precision
        let back = g.mul(&r, &h).unwrap();
        for i in 0..=s.degree().max(back.degree()) {
            assert!(r.eq_mod(&back.coeff(&r, i), &s.coeff(&r, i), 11).unwrap());
        }
        // h is a unit at sample points
        for t in 0..5 {
            let x = r.integer(t);
            let hv = h.eval(&r, &x).unwrap();
            assert_eq!(r.val(&hv), Valuation::Finite(0));
        }
    }

    #[test]
    fn all_small_coefficients_rejected() {
        let r = standard_ring(2, 1, 1, 8).unwrap();
        let zero = ConvergentSeries::poly_ints(&r, &[0, 0]);
        assert_eq!(zero.weierstrass_factor(&r).unwrap_err(), Error::AllCoefficientsSmall);
    }

    #[test]
    fn tail_certificates_propagate() {
        let r = standard_ring(2, 1, 1, 12).unwrap();
        let coeffs = vec![r.one(), r.integer(3)];
        let truncated = ConvergentSeries::new(&r, coeffs, 6).unwrap();
        let poly = ConvergentSeries::poly_ints(&r, &[0, 1, 1]);

        // derivative keeps the certificate, composition takes the minimum
        assert_eq!(truncated.derivative(&r).unwrap().tail_val(), 6);
        assert_eq!(truncated.compose(&r, &poly).unwrap().tail_val(), 6);
        assert_eq!(poly.compose(&r, &truncated).unwrap().tail_val(), 6);
        assert_eq!(poly.compose(&r, &poly).unwrap().tail_val(), 12);

        // evaluation is only trusted to the certificate
        let y = truncated.eval(&r, &r.integer(5)).unwrap();
        assert_eq!(y.known_prec(), 6);

        // a unit tail certificate is not a membership certificate
        assert!(ConvergentSeries::new(&r, vec![r.one()], 0).is_err());
    }
}
