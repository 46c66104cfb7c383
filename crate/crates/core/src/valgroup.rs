//! Ordered value groups of finite rank.
//!
//! A value is a tuple of levels, each an exact rational combination of
//! `1, √b_1, √b_2, …` for distinct squarefree `b_i > 1`. Levels compare
//! lexicographically. Square roots of distinct squarefree integers are
//! linearly independent over the rationals, so the zero test is
//! coordinate-wise and the sign of a nonzero level is decided by refining
//! rational enclosures until they exclude zero.

use crate::error::{Error, Result};
use crate::linalg::{self, fmt_q, parse_q, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::sync::OnceLock;

static BASIS: OnceLock<Vec<u64>> = OnceLock::new();

/// Name of the environment variable that overrides the radicand list.
pub const BASIS_ENV: &str = "MONOMIALIZE_BASIS";

fn is_squarefree(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn default_basis() -> Vec<u64> {
    (2u64..).filter(|&b| is_squarefree(b)).take(64).collect()
}

/// Installs the radicand list `b_1, b_2, …` (coordinate `j >= 1` is `√b_j`).
/// Must be called before any value is compared; later calls fail unless identical.
pub fn set_basis(radicands: Vec<u64>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for &b in &radicands {
        if b < 2 || !is_squarefree(b) || !seen.insert(b) {
            return Err(Error::Parse(format!("basis entry {b} must be a distinct squarefree integer > 1")));
        }
    }
    match BASIS.set(radicands.clone()) {
        Ok(()) => Ok(()),
        Err(_) if basis() == radicands.as_slice() => Ok(()),
        Err(_) => Err(Error::Parse("irrational basis already fixed".into())),
    }
}

/// Parses a comma separated radicand list such as `"2,3,5"`.
pub fn parse_basis(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad basis entry {t:?}"))))
        .collect()
}

pub fn basis() -> &'static [u64] {
    BASIS.get_or_init(default_basis)
}

/// Radicand of coordinate `j`: 1 for `j = 0`, then the basis list.
pub fn radicand(j: usize) -> u64 {
    if j == 0 {
        1
    } else {
        *basis()
            .get(j - 1)
            .unwrap_or_else(|| panic!("irrational basis has no coordinate {j}"))
    }
}

/// `Σ coords[j]·√radicand(j)`.
#[derive(Debug, Clone)]
pub struct IrrationalCombination {
    pub coords: Vec<Q>,
}

impl IrrationalCombination {
    pub fn new(coords: Vec<Q>) -> Self {
        IrrationalCombination { coords }
    }

    pub fn zero() -> Self {
        IrrationalCombination { coords: Vec::new() }
    }

    /// `c·√radicand(j)`.
    pub fn term(j: usize, c: Q) -> Self {
        let mut coords = vec![Q::zero(); j + 1];
        coords[j] = c;
        Self::new(coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn coord(&self, j: usize) -> Q {
        self.coords.get(j).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.coords.len().max(o.coords.len());
        Self::new((0..k).map(|j| self.coord(j) + o.coord(j)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, f: &Q) -> Self {
        Self::new(self.coords.iter().map(|c| c * f).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    /// Exact sign of the real number this combination denotes.
    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        self.sign_f64().unwrap_or_else(|| self.sign_exact())
    }

    /// Sign by dyadic interval refinement of the square roots.
    pub fn sign_exact(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let mut bits = 16u32;
        loop {
            let scale = BigInt::one() << (2 * bits);
            let unit = Q::new(BigInt::one(), BigInt::one() << bits);
            let mut lo = Q::zero();
            let mut hi = Q::zero();
            for (j, c) in self.coords.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let b = radicand(j);
                let (l, h) = if b == 1 {
                    (Q::one(), Q::one())
                } else {
                    let a = (BigInt::from(b) * &scale).sqrt();
                    let l = Q::from_integer(a) * &unit;
                    let h = &l + &unit;
                    (l, h)
                };
                if c.is_positive() {
                    lo += c * &l;
                    hi += c * &h;
                } else {
                    lo += c * &h;
                    hi += c * &l;
                }
            }
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
        }
    }
}

impl IrrationalCombination {
    /// Sign from a floating-point evaluation, when the rounding error bound
    /// leaves no doubt.
    fn sign_f64(&self) -> Option<i32> {
        let mut sum = 0.0f64;
        let mut mag = 0.0f64;
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = c.to_f64()? * (radicand(j) as f64).sqrt();
            if !t.is_finite() {
                return None;
            }
            sum += t;
            mag += t.abs();
        }
        let bound = mag * 1e-12;
        if sum > bound {
            Some(1)
        } else if sum < -bound {
            Some(-1)
        } else {
            None
        }
    }
}

impl PartialEq for IrrationalCombination {
    fn eq(&self, o: &Self) -> bool {
        let k = self.coords.len().max(o.coords.len());
        (0..k).all(|j| self.coord(j) == o.coord(j))
    }
}

impl Eq for IrrationalCombination {}

/// An element of a rank-`d` ordered group, compared level by level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupValue {
    pub levels: Vec<IrrationalCombination>,
}

impl GroupValue {
    pub fn new(levels: Vec<IrrationalCombination>) -> Self {
        GroupValue { levels }
    }

    pub fn zero(rank: usize) -> Self {
        GroupValue { levels: vec![IrrationalCombination::zero(); rank] }
    }

    /// Rank-1 value `c·√radicand(j)`.
    pub fn simple(j: usize, c: Q) -> Self {
        GroupValue { levels: vec![IrrationalCombination::term(j, c)] }
    }

    pub fn rank(&self) -> usize {
        self.levels.len()
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|l| l.is_zero())
    }

    pub fn sign(&self) -> i32 {
        self.levels.iter().map(|l| l.sign()).find(|&s| s != 0).unwrap_or(0)
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    fn zip(&self, o: &Self, f: impl Fn(&IrrationalCombination, &IrrationalCombination) -> IrrationalCombination) -> Result<Self> {
        if self.rank() != o.rank() {
            return Err(Error::RankMismatch { left: self.rank(), right: o.rank() });
        }
        Ok(GroupValue { levels: self.levels.iter().zip(&o.levels).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, f: &Q) -> Self {
        GroupValue { levels: self.levels.iter().map(|l| l.scale(f)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    /// Rational coordinates of all levels, each padded to `width`.
    fn flat(&self, width: usize) -> Vec<Q> {
        self.levels
            .iter()
            .flat_map(|l| (0..width).map(move |j| l.coord(j)))
            .collect()
    }

    fn width(&self) -> usize {
        self.levels.iter().map(|l| l.coords.len()).max().unwrap_or(0)
    }
}

/// Lexicographic comparison of two values of equal rank.
pub fn compare(a: &GroupValue, b: &GroupValue) -> Result<Ordering> {
    let d = a.sub(b)?;
    Ok(match d.sign() {
        1 => Ordering::Greater,
        -1 => Ordering::Less,
        _ => Ordering::Equal,
    })
}

/// A nonzero rational relation `Σ λ_i·values[i] = 0`, normalized to a
/// primitive integer vector whose first nonzero entry is positive.
pub fn rational_relation(values: &[GroupValue]) -> Option<Vec<Q>> {
    if values.is_empty() {
        return None;
    }
    let width = values.iter().map(|v| v.width()).max().unwrap_or(0);
    let rows: Vec<Vec<Q>> = values.iter().map(|v| v.flat(width)).collect();
    if rows[0].is_empty() {
        return Some(unit_relation(values.len()));
    }
    let ker = linalg::left_kernel(&rows);
    let v = ker.into_iter().next()?;
    let mut ints = linalg::primitive_integer(&v);
    if ints.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        ints.iter_mut().for_each(|x| *x = -*x);
    }
    Some(ints.into_iter().map(linalg::qi).collect())
}

fn unit_relation(n: usize) -> Vec<Q> {
    (0..n).map(|i| if i == 0 { Q::one() } else { Q::zero() }).collect()
}

/// Rational coefficients `λ` with `target = Σ λ_i·basis[i]`, if any.
pub fn express_in(basis_values: &[GroupValue], target: &GroupValue) -> Option<Vec<Q>> {
    let width = basis_values
        .iter()
        .chain(std::iter::once(target))
        .map(|v| v.width())
        .max()
        .unwrap_or(0);
    let rows: Vec<Vec<Q>> = basis_values.iter().map(|v| v.flat(width)).collect();
    let t = target.flat(width);
    if basis_values.is_empty() {
        return if target.is_zero() { Some(Vec::new()) } else { None };
    }
    linalg::solve_left(&rows, &t)
}

/// Values of the coordinates `y_1..y_n`; the first `s` are rationally
/// independent and every later one lies in their rational span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAssignment {
    pub s: usize,
    pub weights: Vec<GroupValue>,
    pub dependence: Vec<Vec<Q>>,
}

impl WeightAssignment {
    pub fn new(weights: Vec<GroupValue>, s: usize) -> Result<Self> {
        if s > weights.len() {
            return Err(Error::NotIndependent(format!("s = {s} exceeds n = {}", weights.len())));
        }
        if let Some(w) = weights.first() {
            let d = w.rank();
            if let Some(bad) = weights.iter().find(|v| v.rank() != d) {
                return Err(Error::RankMismatch { left: d, right: bad.rank() });
            }
        }
        for (j, w) in weights.iter().enumerate() {
            if !w.is_positive() {
                return Err(Error::NotIndependent(format!("weight of y_{} is not positive", j + 1)));
            }
        }
        if rational_relation(&weights[..s]).is_some() {
            return Err(Error::NotIndependent(format!("weights of y_1..y_{s} admit a rational relation")));
        }
        let mut dependence = Vec::new();
        for (j, w) in weights.iter().enumerate().skip(s) {
            match express_in(&weights[..s], w) {
                Some(l) => dependence.push(l),
                None => {
                    return Err(Error::NotDependent(format!(
                        "weight of y_{} is independent of y_1..y_{s}",
                        j + 1
                    )))
                }
            }
        }
        Ok(WeightAssignment { s, weights, dependence })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.weights.first().map_or(1, |w| w.rank())
    }
}

/// `Σ e_j·weights[j]`.
pub fn combine(weights: &[GroupValue], e: &[Q]) -> GroupValue {
    let rank = weights.first().map_or(1, |w| w.rank());
    let mut acc = GroupValue::zero(rank);
    for (w, c) in weights.iter().zip(e) {
        if !c.is_zero() {
            acc = acc.add(&w.scale(c)).expect("weights share one rank");
        }
    }
    acc
}

pub fn combine_i(weights: &[GroupValue], e: &[i64]) -> GroupValue {
    combine(weights, &linalg::to_qvec(e))
}

/// Value of the monomial `y^e`.
pub fn monomial_value(w: &WeightAssignment, e: &[Q]) -> Result<GroupValue> {
    if e.len() != w.n() {
        return Err(Error::RankMismatch { left: e.len(), right: w.n() });
    }
    Ok(combine(&w.weights, e))
}

impl Serialize for GroupValue {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let width = self.width().max(1);
        let v: Vec<Vec<String>> = self
            .levels
            .iter()
            .map(|l| (0..width).map(|j| fmt_q(&l.coord(j))).collect())
            .collect();
        v.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for GroupValue {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<Vec<String>> = Vec::deserialize(de)?;
        if v.is_empty() {
            return Err(serde::de::Error::custom("group value needs at least one level"));
        }
        let levels = v
            .iter()
            .map(|l| {
                let coords = l.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>();
                coords.map(IrrationalCombination::new)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(GroupValue { levels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qi};

    fn ic(c: &[i64]) -> IrrationalCombination {
        IrrationalCombination::new(c.iter().map(|&x| qi(x)).collect())
    }

    #[test]
    fn sign_examples() {
        // 2√2 − √3
        assert_eq!(ic(&[0, 2, -1]).sign(), 1);
        assert_eq!(ic(&[]).sign(), 0);
        assert_eq!(ic(&[1, -1]).sign(), -1);
        // 99/70 approximates √2 from above by about 7e-5
        let close = IrrationalCombination::new(vec![q(-99, 70), qi(1)]);
        assert_eq!(close.sign(), -1);
    }

    #[test]
    fn lexicographic_compare() {
        let a = GroupValue::new(vec![ic(&[]), ic(&[0, 1])]);
        let b = GroupValue::new(vec![ic(&[0, 0, 1]), ic(&[])]);
        assert_eq!(compare(&a, &b).unwrap(), Ordering::Less);
        assert_eq!(compare(&a, &a).unwrap(), Ordering::Equal);
        let c = GroupValue::simple(1, qi(2));
        let d = GroupValue::simple(2, qi(1));
        assert_eq!(compare(&c, &d).unwrap(), Ordering::Greater);
        assert!(compare(&a, &c).is_err());
    }

    #[test]
    fn relations() {
        let r2 = GroupValue::simple(1, qi(1));
        let r3 = GroupValue::simple(2, qi(1));
        assert_eq!(rational_relation(&[r2.clone(), r3.clone()]), None);
        let three = GroupValue::simple(1, qi(3));
        assert_eq!(rational_relation(&[r2.clone(), three]), Some(vec![qi(3), qi(-1)]));
        let sum = r2.add(&r3).unwrap();
        assert_eq!(rational_relation(&[sum, r2, r3]), Some(vec![qi(1), qi(-1), qi(-1)]));
    }

    #[test]
    fn monomial_values() {
        let w = WeightAssignment::new(vec![GroupValue::simple(1, qi(1)), GroupValue::simple(2, qi(1))], 2).unwrap();
        let v = monomial_value(&w, &[qi(2), qi(1)]).unwrap();
        assert_eq!(v, GroupValue::new(vec![ic(&[0, 2, 1])]));
        assert!(monomial_value(&w, &[qi(0), qi(0)]).unwrap().is_zero());
        let w2 = WeightAssignment::new(vec![GroupValue::simple(1, qi(1)), GroupValue::simple(1, qi(3))], 1).unwrap();
        assert_eq!(monomial_value(&w2, &[qi(1), qi(1)]).unwrap(), GroupValue::simple(1, qi(4)));
        assert_eq!(w2.dependence, vec![vec![qi(3)]]);
    }

    #[test]
    fn weight_assignment_errors() {
        let r2 = GroupValue::simple(1, qi(1));
        let r3 = GroupValue::simple(2, qi(1));
        assert!(matches!(WeightAssignment::new(vec![r2.clone(), r3.clone()], 1), Err(Error::NotDependent(_))));
        assert!(matches!(
            WeightAssignment::new(vec![r2.clone(), r2.scale(&qi(2))], 2),
            Err(Error::NotIndependent(_))
        ));
        assert!(WeightAssignment::new(vec![r2.neg()], 1).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let v = GroupValue::new(vec![ic(&[0, 2, -1]), ic(&[1])]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[["0/1","2/1","-1/1"],["1/1","0/1","0/1"]]"#);
        let back: GroupValue = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
