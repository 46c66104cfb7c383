//! Exact arithmetic in cyclotomic fields `Q(ζ_m)`.
//!
//! An element is its coordinate vector in the power basis `1, ζ, …, ζ^{φ(m)-1}`,
//! reduced modulo the cyclotomic polynomial `Φ_m`. Binary operations on
//! elements of different fields first lift both into `Q(ζ_lcm)`.

use crate::error::{Error, Result};
use crate::linalg::{fmt_q, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Default modulus: `Q(i)`.
pub const BASE_MODULUS: u64 = 4;

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Vec<i64>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Integer coefficients of `Φ_m`, lowest degree first.
pub fn cyclotomic_poly(m: u64) -> Vec<i64> {
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by Φ_d for every proper divisor d
    let mut num: Vec<i64> = vec![0; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            num = exact_div_monic(&num, &cyclotomic_poly(d));
        }
    }
    cyclotomic_cache().lock().unwrap().insert(m, num.clone());
    num
}

fn exact_div_monic(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut quot = vec![0i64; r.len() - db];
    for k in (0..quot.len()).rev() {
        let c = r[k + db];
        quot[k] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[k + j] -= c * bj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    quot
}

pub fn euler_phi(m: u64) -> usize {
    (1..=m).filter(|&k| k.gcd(&m) == 1).count()
}

fn reduce(mut p: Vec<Q>, m: u64) -> Vec<Q> {
    let phi = cyclotomic_poly(m);
    let deg = phi.len() - 1;
    while p.len() > deg {
        let c = p.pop().unwrap();
        if c.is_zero() {
            continue;
        }
        let off = p.len() - deg;
        for (j, &pj) in phi.iter().take(deg).enumerate() {
            p[off + j] -= &c * Q::from_integer(BigInt::from(pj));
        }
    }
    p.resize(deg, Q::zero());
    p
}

/// An element of `Q(ζ_m)`.
#[derive(Debug, Clone)]
pub struct Cyclo {
    m: u64,
    c: Vec<Q>,
}

impl Cyclo {
    pub fn from_coords(m: u64, coords: Vec<Q>) -> Self {
        Cyclo { m, c: reduce(coords, m) }
    }

    pub fn from_q(m: u64, x: Q) -> Self {
        Self::from_coords(m, vec![x])
    }

    pub fn from_i64(m: u64, x: i64) -> Self {
        Self::from_q(m, Q::from_integer(BigInt::from(x)))
    }

    pub fn zero(m: u64) -> Self {
        Self::from_coords(m, Vec::new())
    }

    pub fn one(m: u64) -> Self {
        Self::from_i64(m, 1)
    }

    /// `ζ_m^k` for any integer `k`.
    pub fn zeta_pow(m: u64, k: i64) -> Self {
        let e = k.rem_euclid(m as i64) as usize;
        let mut p = vec![Q::zero(); e + 1];
        p[e] = Q::one();
        Self::from_coords(m, p)
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coords(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Q> {
        if self.c.iter().skip(1).all(|x| x.is_zero()) {
            Some(self.c.first().cloned().unwrap_or_else(Q::zero))
        } else {
            None
        }
    }

    /// Re-expresses the element in `Q(ζ_{m2})`; requires `m | m2`.
    pub fn lift(&self, m2: u64) -> Self {
        if m2 == self.m {
            return self.clone();
        }
        assert!(m2 % self.m == 0, "cannot lift Q(ζ_{}) into Q(ζ_{m2})", self.m);
        let f = (m2 / self.m) as usize;
        let mut p = vec![Q::zero(); (self.c.len().max(1) - 1) * f + 1];
        for (i, x) in self.c.iter().enumerate() {
            p[i * f] = x.clone();
        }
        Self::from_coords(m2, p)
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let m = self.m.lcm(&o.m);
        (self.lift(m), o.lift(m))
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        Cyclo { m: a.m, c: a.c.iter().zip(&b.c).map(|(x, y)| x + y).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Cyclo { m: self.m, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, f: &Q) -> Self {
        Cyclo { m: self.m, c: self.c.iter().map(|x| x * f).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        if a.is_zero() || b.is_zero() {
            return Cyclo::zero(a.m);
        }
        let mut p = vec![Q::zero(); a.c.len() + b.c.len()];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if !y.is_zero() {
                    p[i + j] += x * y;
                }
            }
        }
        Self::from_coords(a.m, p)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in `Q[x]`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotAUnit);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_q(self.m, r.recip()));
        }
        let phi: Vec<Q> = cyclotomic_poly(self.m)
            .iter()
            .map(|&v| Q::from_integer(BigInt::from(v)))
            .collect();
        // invariant: r_i ≡ s_i·a (mod Φ)
        let (mut r0, mut r1) = (phi, trim(self.c.clone()));
        let (mut s0, mut s1) = (Vec::<Q>::new(), vec![Q::one()]);
        while !(r1.len() == 1) {
            let (qt, rem) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&qt, &s1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        let c = r1[0].recip();
        Ok(Self::from_coords(self.m, s1.iter().map(|x| x * &c).collect()))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow_i(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Cyclo::one(self.m);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Writes the element as `r·ζ_m^k` with `r > 0` rational and `k` in `(-m/2, m/2]`.
    pub fn polar(&self) -> Option<(Q, i64)> {
        if self.is_zero() {
            return None;
        }
        let m = self.m as i64;
        for k in 0..m {
            let t = self.mul(&Cyclo::zeta_pow(self.m, -k));
            if let Some(r) = t.as_rational() {
                let (r, k) = if r.is_negative() { (-r, k + m / 2) } else { (r, k) };
                let k = k.rem_euclid(m);
                let k = if k > m / 2 { k - m } else { k };
                return Some((r, k));
            }
        }
        None
    }

    /// Principal-branch power `self^λ`, available when the element is a root of
    /// unity times a rational whose `λ`-th power is rational.
    pub fn pow_q(&self, lambda: &Q) -> Result<Self> {
        if lambda.is_integer() {
            let k = lambda
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::InstanceTooLarge("exponent out of range".into()))?;
            return self.pow_i(k);
        }
        if self.is_zero() {
            return Err(Error::NotAUnit);
        }
        let p = lambda.numer().to_i64().ok_or_else(|| Error::InstanceTooLarge("exponent".into()))?;
        let qd = lambda.denom().to_i64().ok_or_else(|| Error::InstanceTooLarge("exponent".into()))?;
        let Some((r, k)) = self.polar() else {
            return Err(Error::FieldExtensionRequired {
                modulus: 0,
                root: format!("{}-th root of a non-monomial cyclotomic element", qd),
            });
        };
        let rp = rational_pow(&r, p);
        let Some(root) = rational_root(&rp, qd as u32) else {
            return Err(Error::FieldExtensionRequired {
                modulus: 0,
                root: format!("{qd}-th root of {}", fmt_q(&rp)),
            });
        };
        let m = self.m as i64;
        let kp = k * p;
        if kp % qd != 0 {
            let order = (m * qd) / (m * qd).gcd(&kp);
            return Err(Error::FieldExtensionRequired {
                modulus: (m.lcm(&order)) as u64,
                root: format!("ζ_{}^{}", m * qd, kp),
            });
        }
        Ok(Cyclo::zeta_pow(self.m, kp / qd).scale(&root))
    }
}

fn rational_pow(r: &Q, p: i64) -> Q {
    let mut acc = Q::one();
    let b = if p < 0 { r.recip() } else { r.clone() };
    for _ in 0..p.unsigned_abs() {
        acc *= &b;
    }
    acc
}

/// Exact positive `q`-th root of a positive rational, if rational.
fn rational_root(r: &Q, q: u32) -> Option<Q> {
    let n = r.numer().nth_root(q);
    let d = r.denom().nth_root(q);
    if num_traits::pow(n.clone(), q as usize) == *r.numer() && num_traits::pow(d.clone(), q as usize) == *r.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.len() > 1 && p.last().is_some_and(|x| x.is_zero()) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Q::zero());
    }
    p
}

fn poly_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let z = Q::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut p = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            p[i + j] += x * y;
        }
    }
    trim(p)
}

fn poly_divmod(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    if r.len() <= db {
        return (vec![Q::zero()], r);
    }
    let mut quot = vec![Q::zero(); r.len() - db];
    let lead = b[db].recip();
    for k in (0..quot.len()).rev() {
        let c = &r[k + db] * &lead;
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &c * bj;
        }
        quot[k] = c;
    }
    r.truncate(db.max(1));
    (trim(quot), trim(r))
}

impl PartialEq for Cyclo {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.common(o);
        a.c == b.c
    }
}

impl Eq for Cyclo {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qi};

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(12), 4);
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = Cyclo::zeta_pow(4, 1);
        assert_eq!(i.mul(&i), Cyclo::from_i64(4, -1));
        assert_eq!(Cyclo::zeta_pow(8, 2), i);
    }

    #[test]
    fn inverse_round_trip() {
        let a = Cyclo::from_coords(12, vec![qi(1), qi(2), q(1, 3), qi(-1)]);
        let b = a.inv().unwrap();
        assert!(a.mul(&b).is_one());
    }

    #[test]
    fn rational_powers() {
        let four = Cyclo::from_i64(4, 4);
        assert_eq!(four.pow_q(&q(1, 2)).unwrap(), Cyclo::from_i64(4, 2));
        // principal square root of -1 is i
        let m1 = Cyclo::from_i64(4, -1);
        assert_eq!(m1.pow_q(&q(1, 2)).unwrap(), Cyclo::zeta_pow(4, 1));
        // square root of i needs ζ_8
        let i = Cyclo::zeta_pow(4, 1);
        match i.pow_q(&q(1, 2)) {
            Err(Error::FieldExtensionRequired { modulus, .. }) => assert_eq!(modulus, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(i.lift(8).pow_q(&q(1, 2)).unwrap(), Cyclo::zeta_pow(8, 1));
        assert!(Cyclo::from_i64(4, 2).pow_q(&q(1, 2)).is_err());
    }
}
