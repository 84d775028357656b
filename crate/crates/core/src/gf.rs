//! Exact arithmetic in GF(q) = GF(p^k) for odd primes p.
//!
//! Elements are small `Copy` handles ([`Fq`]) holding the canonical integer
//! encoding `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` of the polynomial
//! `c_0 + c_1 x + ... + c_{k-1} x^{k-1}`. All arithmetic goes through the
//! owning [`Field`], which keeps exp/log tables with respect to a fixed
//! primitive element ω. Fields are desk-sized (q ≤ 2^20).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Largest field order accepted by [`Field::new`].
pub const MAX_ORDER: u64 = 1 << 20;

/// Fields up to this order keep a full addition table.
const ADD_TABLE_MAX: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("characteristic {0} is even; only odd q is supported")]
    EvenCharacteristic(u32),
    #[error("modulus {0} is reducible")]
    ReducibleModulus(String),
    #[error("bad modulus: {0}")]
    BadModulus(String),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {0} exceeds the supported maximum")]
    TooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("discrete logarithm of zero")]
    DlogOfZero,
    #[error("{value} is not an element of GF({q})")]
    OutOfRange { value: u64, q: u32 },
    #[error("cannot parse field description: {0}")]
    Parse(String),
}

/// A field element, stored as its canonical integer encoding in `[0, q)`.
///
/// An `Fq` is only meaningful together with the [`Field`] that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// GF(p^k) with a fixed modulus and primitive element.
pub struct Field {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    omega: Fq,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({self})")
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs: Vec<String> = self.modulus.iter().map(u32::to_string).collect();
        write!(f, "p={} k={} mod={}", self.p, self.k, coeffs.join(","))
    }
}

impl FromStr for Field {
    type Err = FieldError;

    /// Parses `p=<p> k=<k> mod=<c0,...,ck>`; `mod=` may be omitted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = None;
        let mut k = None;
        let mut modulus = None;
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| FieldError::Parse(format!("expected key=value, got {token:?}")))?;
            match key {
                "p" => p = Some(parse_u32(value)?),
                "k" => k = Some(parse_u32(value)?),
                "mod" => modulus = Some(parse_coeff_list(value)?),
                _ => return Err(FieldError::Parse(format!("unknown key {key:?}"))),
            }
        }
        let p = p.ok_or_else(|| FieldError::Parse("missing p=".into()))?;
        let k = k.unwrap_or(1);
        Field::build(p, k, modulus.as_deref())
    }
}

fn parse_u32(s: &str) -> Result<u32, FieldError> {
    s.parse()
        .map_err(|_| FieldError::Parse(format!("not a non-negative integer: {s:?}")))
}

/// Parses a comma-separated coefficient list `c0,c1,...`.
pub fn parse_coeff_list(s: &str) -> Result<Vec<u32>, FieldError> {
    s.split(',').map(|c| parse_u32(c.trim())).collect()
}

impl Field {
    /// Constructs GF(p^k). Without an explicit modulus the smallest monic
    /// irreducible polynomial is used, where polynomials are ordered by the
    /// canonical integer encoding of their lower coefficients. ω is the
    /// smallest primitive element in canonical order.
    pub fn new(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<Arc<Field>, FieldError> {
        Field::build(p, k, modulus).map(Arc::new)
    }

    /// Prime field GF(p).
    pub fn prime(p: u32) -> Result<Arc<Field>, FieldError> {
        Field::new(p, 1, None)
    }

    /// Field of order `q`, which must be an odd prime power.
    pub fn of_order(q: u64) -> Result<Arc<Field>, FieldError> {
        let (p, k) = prime_power(q).ok_or(FieldError::BadModulus(format!(
            "{q} is not a prime power"
        )))?;
        Field::new(p, k, None)
    }

    fn build(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<Field, FieldError> {
        if p == 2 {
            return Err(FieldError::EvenCharacteristic(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(k)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::TooLarge((p as u64).saturating_pow(k)))? as u32;

        let modulus = match modulus {
            Some(m) => {
                if m.len() != k as usize + 1 {
                    return Err(FieldError::BadModulus(format!(
                        "expected {} coefficients, got {}",
                        k + 1,
                        m.len()
                    )));
                }
                if m[k as usize] != 1 {
                    return Err(FieldError::BadModulus("modulus must be monic".into()));
                }
                if let Some(&c) = m.iter().find(|&&c| c >= p) {
                    return Err(FieldError::BadModulus(format!(
                        "coefficient {c} out of range for p={p}"
                    )));
                }
                if !poly::is_irreducible(m, p) {
                    return Err(FieldError::ReducibleModulus(
                        m.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
                    ));
                }
                m.to_vec()
            }
            None => (0..q)
                .map(|low| {
                    let mut m = poly::digits(low, p, k as usize);
                    m.push(1);
                    m
                })
                .find(|m| poly::is_irreducible(m, p))
                .expect("an irreducible polynomial of every degree exists"),
        };

        let mulmod = |a: u32, b: u32| poly::mulmod_encoded(a, b, &modulus, p);
        let order = q - 1;
        let prime_factors = distinct_prime_factors(order);
        let omega = (1..q)
            .find(|&c| {
                prime_factors
                    .iter()
                    .all(|&r| poly::pow_encoded(c, (order / r) as u64, &mulmod) != 1)
            })
            .expect("GF(q)* is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = 1u32;
        for i in 0..order {
            exp.push(cur);
            log[cur as usize] = i;
            cur = mulmod(cur, omega);
        }
        debug_assert_eq!(cur, 1);

        let neg = (0..q)
            .map(|a| {
                let d = poly::digits(a, p, k as usize);
                let nd: Vec<u32> = d.iter().map(|&c| (p - c) % p).collect();
                poly::encode(&nd, p)
            })
            .collect();

        let mut field = Field {
            p,
            k,
            q,
            modulus,
            omega: Fq(omega),
            exp,
            log,
            neg,
            add: Vec::new(),
        };
        if k > 1 && q <= ADD_TABLE_MAX {
            let mut table = Vec::with_capacity((q * q) as usize);
            for a in 0..q {
                for b in 0..q {
                    table.push(field.add_digits(a, b));
                }
            }
            field.add = table;
        }
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, lowest degree first; the last entry is 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn omega(&self) -> Fq {
        self.omega
    }

    pub fn zero(&self) -> Fq {
        Fq::ZERO
    }

    pub fn one(&self) -> Fq {
        Fq::ONE
    }

    /// Element with canonical integer encoding `value`.
    pub fn elem(&self, value: u64) -> Result<Fq, FieldError> {
        if value < self.q as u64 {
            Ok(Fq(value as u32))
        } else {
            Err(FieldError::OutOfRange { value, q: self.q })
        }
    }

    /// Image of the integer `n` under Z → GF(q).
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fq, FieldError> {
        if coeffs.len() > self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::BadModulus(format!(
                "coefficients {coeffs:?} do not describe an element of GF({})",
                self.q
            )));
        }
        Ok(Fq(poly::encode(coeffs, self.p)))
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        poly::digits(a.0, self.p, self.k as usize)
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q).map(Fq)
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.k == 1 {
            Fq((a.0 + b.0) % self.p)
        } else if !self.add.is_empty() {
            Fq(self.add[(a.0 * self.q + b.0) as usize])
        } else {
            Fq(self.add_digits(a.0, b.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq::ZERO;
        }
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        let order = self.q - 1;
        Fq(self.exp[(if s >= order { s - order } else { s }) as usize])
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let order = self.q - 1;
        Ok(Fq(self.exp[((order - self.log[a.0 as usize]) % order) as usize]))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` by square-and-multiply; negative exponents invert first.
    pub fn pow(&self, a: Fq, e: i64) -> Result<Fq, FieldError> {
        let base = if e < 0 { self.inv(a)? } else { a };
        let mut e = e.unsigned_abs();
        let mut base = base;
        let mut acc = Fq::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// ω^k for any integer k.
    pub fn omega_pow(&self, k: i64) -> Fq {
        Fq(self.exp[k.rem_euclid(self.q as i64 - 1) as usize])
    }

    /// The unique k in `[0, q-1)` with ω^k = a. The table behind this is
    /// filled by enumerating ω^0, ω^1, ... once at construction.
    pub fn dlog(&self, a: Fq) -> Result<u32, FieldError> {
        if a.is_zero() {
            Err(FieldError::DlogOfZero)
        } else {
            Ok(self.log[a.0 as usize])
        }
    }

    pub fn is_square(&self, a: Fq) -> bool {
        a.is_zero() || self.log[a.0 as usize].is_multiple_of(2)
    }

    /// Smallest (canonical order) square root of `a`, if any.
    pub fn sqrt(&self, a: Fq) -> Option<Fq> {
        self.elements().find(|&x| self.mul(x, x) == a)
    }
}

/// Splits `q` into `(p, k)` with `q = p^k`, `p` prime.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1 && p <= u32::MAX as u64).then_some((p as u32, k))
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn distinct_prime_factors(mut n: u32) -> Vec<u32> {
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

/// Dense polynomials over GF(p), lowest degree first. Only used while
/// setting up a field.
mod poly {
    pub fn digits(mut v: u32, p: u32, len: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(v % p);
            v /= p;
        }
        out
    }

    pub fn encode(coeffs: &[u32], p: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    /// Remainder of `a` modulo the monic polynomial `m`.
    pub fn rem_monic(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - dm;
            for (i, &c) in m.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + (p - lead) * c % p) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn mulmod_encoded(a: u32, b: u32, m: &[u32], p: u32) -> u32 {
        let k = m.len() - 1;
        let da = digits(a, p, k);
        let db = digits(b, p, k);
        let mut prod = vec![0u32; 2 * k];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
            }
        }
        let mut r = rem_monic(&prod, m, p);
        r.resize(k, 0);
        encode(&r, p)
    }

    pub fn pow_encoded(base: u32, mut e: u64, mulmod: &impl Fn(u32, u32) -> u32) -> u32 {
        let mut acc = 1;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    }

    /// Irreducibility by trial division with every monic polynomial of
    /// degree at most deg(m)/2.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let k = m.len() - 1;
        if k <= 1 {
            return true;
        }
        for d in 1..=k / 2 {
            for low in 0..p.pow(d as u32) {
                let mut divisor = digits(low, p, d);
                divisor.push(1);
                if rem_monic(m, &divisor, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_fields() -> Vec<Arc<Field>> {
        [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (3, 3)]
            .iter()
            .map(|&(p, k)| Field::new(p, k, None).unwrap())
            .collect()
    }

    #[test]
    fn gf3_has_omega_two() {
        let f = Field::new(3, 1, None).unwrap();
        assert_eq!(f.q(), 3);
        assert_eq!(f.omega(), Fq(2));
    }

    #[test]
    fn accepts_x2_plus_1_over_gf3() {
        // x^2 + 1 has no root mod 3: 0+1=1, 1+1=2, 4+1=2.
        let f = Field::new(3, 2, Some(&[1, 0, 1])).unwrap();
        assert_eq!(f.q(), 9);
        assert_eq!(f.to_string(), "p=3 k=2 mod=1,0,1");
    }

    #[test]
    fn rejects_even_and_composite_and_reducible() {
        assert_eq!(Field::new(2, 1, None).unwrap_err(), FieldError::EvenCharacteristic(2));
        assert_eq!(Field::new(9, 1, None).unwrap_err(), FieldError::NotPrime(9));
        // x^2 + 2 = (x+1)(x+2) over GF(3)
        assert!(matches!(
            Field::new(3, 2, Some(&[2, 0, 1])),
            Err(FieldError::ReducibleModulus(_))
        ));
        assert!(matches!(
            Field::new(3, 2, Some(&[1, 0, 2])),
            Err(FieldError::BadModulus(_))
        ));
    }

    #[test]
    fn default_moduli_have_no_roots() {
        for f in test_fields().into_iter().filter(|f| f.k() <= 3 && f.k() > 1) {
            let m = f.modulus();
            for x in 0..f.p() as u64 {
                let val: u64 = m
                    .iter()
                    .rev()
                    .fold(0, |acc, &c| (acc * x + c as u64) % f.p() as u64);
                assert_ne!(val, 0, "{f} has root {x}");
            }
        }
        // smallest irreducible cubic over GF(3) in canonical order: x^3 + 2x + 1
        assert_eq!(Field::new(3, 3, None).unwrap().modulus(), &[1, 2, 0, 1]);
        assert_eq!(Field::new(5, 2, None).unwrap().modulus(), &[2, 0, 1]);
    }

    #[test]
    fn small_inverses_and_dlogs() {
        let f5 = Field::prime(5).unwrap();
        assert_eq!(f5.inv(Fq(2)).unwrap(), Fq(3));
        assert_eq!(f5.inv(Fq(0)), Err(FieldError::DivisionByZero));
        assert_eq!(f5.neg(Fq(0)), Fq(0));

        let f7 = Field::prime(7).unwrap();
        assert_eq!(f7.omega(), Fq(3));
        assert_eq!(f7.dlog(Fq(6)).unwrap(), 3);
        assert_eq!(f7.dlog(Fq(1)).unwrap(), 0);
        assert_eq!(f7.dlog(f7.omega()).unwrap(), 1);
        assert_eq!(f7.dlog(Fq(0)), Err(FieldError::DlogOfZero));
    }

    #[test]
    fn omega_is_primitive_and_exp_is_bijective() {
        for f in test_fields() {
            let q = f.q() as i64;
            assert_eq!(f.pow(f.omega(), q - 1).unwrap(), Fq::ONE);
            let mut seen = vec![false; f.q() as usize];
            for k in 0..q - 1 {
                let x = f.pow(f.omega(), k).unwrap();
                assert!(!x.is_zero());
                assert!(!seen[x.value() as usize], "{f}: ω^{k} repeats");
                seen[x.value() as usize] = true;
                assert_eq!(f.dlog(x).unwrap() as i64, k);
            }
        }
    }

    #[test]
    fn random_field_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in test_fields() {
            for _ in 0..200 {
                let a = Fq(rng.gen_range(0..f.q()));
                let b = Fq(rng.gen_range(0..f.q()));
                let c = Fq(rng.gen_range(0..f.q()));
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.sub(f.add(a, b), b), a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fq::ONE);
                }
            }
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        for f in test_fields() {
            for a in f.elements() {
                let mut acc = Fq::ONE;
                for e in 0..=16 {
                    assert_eq!(f.pow(a, e).unwrap(), acc);
                    acc = f.mul(acc, a);
                }
            }
        }
    }

    #[test]
    fn round_trips_text_form() {
        let f = Field::new(5, 2, None).unwrap();
        let g: Field = f.to_string().parse().unwrap();
        assert_eq!(*f, g);
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(12), None);
    }
}
