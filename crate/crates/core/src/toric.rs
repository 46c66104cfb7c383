//! Toric combinatorics along a monomial valuation.
//!
//! Every coordinate change here is a product of elementary blow-ups
//! `x_c = x_c'·x_d'` of a coordinate pair, with the chart fixed by the
//! valuation: the variable of smaller value (`d`) divides the other (`c`).
//! Exponent matrices follow the convention `x_old_i = ∏ x_new_j^{A_ij}`.

use crate::error::{Error, Result};
use crate::linalg::{self, qi, IMat, Q};
use crate::valgroup::{combine_i, compare, express_in, rational_relation, GroupValue};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Step budget for the combinatorial loops below.
pub const MAX_BLOWUPS: usize = 100_000;

/// Blow-up of the coordinate pair `{i, j}` (`i < j`), in the chart where
/// `x_chart` is replaced by `x_i·x_j`; the other variable is the divider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementaryBlowup {
    pub i: usize,
    pub j: usize,
    pub chart: usize,
}

impl ElementaryBlowup {
    /// Blow-up in which `divider` divides `replaced`.
    pub fn dividing(replaced: usize, divider: usize) -> Self {
        assert_ne!(replaced, divider);
        ElementaryBlowup { i: replaced.min(divider), j: replaced.max(divider), chart: replaced }
    }

    pub fn divider(&self) -> usize {
        if self.chart == self.i {
            self.j
        } else {
            self.i
        }
    }

    pub fn is_valid(&self) -> bool {
        self.i < self.j && (self.chart == self.i || self.chart == self.j)
    }

    pub fn matrix(&self, n: usize) -> IMat {
        let mut a = linalg::identity_i(n);
        a[self.chart][self.divider()] = 1;
        a
    }

    /// Exponent vector of a monomial after the blow-up.
    pub fn apply_exponent(&self, e: &mut [i64]) {
        e[self.divider()] += e[self.chart];
    }

    /// Values after the blow-up.
    pub fn apply_values(&self, v: &mut [GroupValue]) {
        let d = v[self.divider()].clone();
        v[self.chart] = v[self.chart].sub(&d).expect("values share one rank");
    }
}

/// An ordered product of elementary blow-ups with its cumulative matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformSeq {
    pub n: usize,
    pub steps: Vec<ElementaryBlowup>,
    pub matrix: IMat,
}

impl TransformSeq {
    pub fn new(n: usize) -> Self {
        TransformSeq { n, steps: Vec::new(), matrix: linalg::identity_i(n) }
    }

    pub fn push(&mut self, b: ElementaryBlowup) {
        self.matrix = linalg::mat_mul_i(&self.matrix, &b.matrix(self.n));
        self.steps.push(b);
    }

    pub fn extend(&mut self, other: &TransformSeq) {
        for b in &other.steps {
            self.push(*b);
        }
    }

    /// Rebuilds the cumulative matrix from the steps.
    pub fn recompute(&self) -> IMat {
        self.steps
            .iter()
            .fold(linalg::identity_i(self.n), |acc, b| linalg::mat_mul_i(&acc, &b.matrix(self.n)))
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Embeds a sequence on `k` variables into `n` variables via `map`.
    pub fn embed(&self, n: usize, map: &[usize]) -> TransformSeq {
        let mut out = TransformSeq::new(n);
        for b in &self.steps {
            let (c, d) = (map[b.chart], map[b.divider()]);
            out.push(ElementaryBlowup::dividing(c, d));
        }
        out
    }
}

/// Outcome of the Perron reduction.
#[derive(Debug, Clone)]
pub struct PerronResult {
    /// Blow-ups on the `s+1` variables, before the final reindexing.
    pub seq: TransformSeq,
    /// `perm[k]` is the blow-up variable that becomes the new `x_k`.
    pub perm: Vec<usize>,
    /// Cumulative matrix including the reindexing: `x_i = ∏ x̄_k^{matrix[i][k]}`.
    pub matrix: IMat,
    /// Values of the new variables; the last one is zero.
    pub values: Vec<GroupValue>,
}

/// Reduces a dependent value to zero by blow-ups along the valuation.
///
/// `w` holds `s+1` values: `w[..s]` positive and rationally independent,
/// `w[s] >= 0` equal to `Σ dependence_i·w_i` (pass an empty `dependence` to
/// have it computed). The integer relation among the current values drives a
/// Euclidean reduction: each blow-up divides the larger of an opposite-sign
/// pair by the smaller, and the smaller one's relation coefficient absorbs
/// the larger one's. The loop ends when the relation has a single entry,
/// whose variable then has value zero.
pub fn perron(w: &[GroupValue], dependence: &[Q]) -> Result<PerronResult> {
    let n = w.len();
    if n == 0 {
        return Err(Error::NotDependent("no values".into()));
    }
    let s = n - 1;
    for (k, v) in w[..s].iter().enumerate() {
        if !v.is_positive() {
            return Err(Error::NotIndependent(format!("value of x_{} is not positive", k + 1)));
        }
    }
    if w[s].sign() < 0 {
        return Err(Error::NotDependent("last value is negative".into()));
    }
    if rational_relation(&w[..s]).is_some() {
        return Err(Error::NotIndependent("the first s values admit a rational relation".into()));
    }
    let lambda = if dependence.is_empty() {
        express_in(&w[..s], &w[s]).ok_or_else(|| Error::NotDependent("last value is independent".into()))?
    } else {
        if dependence.len() != s {
            return Err(Error::NotDependent("dependence vector has the wrong length".into()));
        }
        let lhs = crate::valgroup::combine(&w[..s], dependence);
        if compare(&lhs, &w[s])? != Ordering::Equal {
            return Err(Error::NotDependent("supplied relation does not hold".into()));
        }
        dependence.to_vec()
    };
    let mut rel: Vec<Q> = lambda.clone();
    rel.push(-Q::from_integer(BigInt::from(1)));
    let mut r: Vec<i64> = linalg::primitive_integer(&rel);
    let mut v: Vec<GroupValue> = w.to_vec();
    let mut seq = TransformSeq::new(n);
    for _ in 0..MAX_BLOWUPS {
        let support: Vec<usize> = (0..n).filter(|&k| r[k] != 0).collect();
        if support.len() <= 1 {
            let p = support.first().copied().unwrap_or(s);
            if !v[p].is_zero() {
                return Err(Error::NotDependent("reduction ended on a nonzero value".into()));
            }
            let mut perm: Vec<usize> = (0..n).filter(|&k| k != p).collect();
            perm.push(p);
            let matrix: IMat = seq
                .matrix
                .iter()
                .map(|row| perm.iter().map(|&k| row[k]).collect())
                .collect();
            let values = perm.iter().map(|&k| v[k].clone()).collect();
            return Ok(PerronResult { seq, perm, matrix, values });
        }
        // choose the opposite-sign pair with the largest guaranteed decrease
        let mut best: Option<(usize, usize, GroupValue)> = None;
        for &a in &support {
            for &b in &support {
                if r[a] <= 0 || r[b] >= 0 {
                    continue;
                }
                let (small, large) = match compare(&v[a], &v[b])? {
                    Ordering::Less => (a, b),
                    Ordering::Greater => (b, a),
                    Ordering::Equal => {
                        if a < b {
                            (a, b)
                        } else {
                            (b, a)
                        }
                    }
                };
                let m = r[a].abs().min(r[b].abs());
                let gain = v[small].scale(&qi(m));
                let better = match &best {
                    None => true,
                    Some((_, _, g)) => compare(&gain, g)? == Ordering::Greater,
                };
                if better {
                    best = Some((small, large, gain));
                }
            }
        }
        let (small, large, _) = best.expect("a relation with two entries has mixed signs");
        let b = ElementaryBlowup::dividing(large, small);
        b.apply_values(&mut v);
        r[small] += r[large];
        seq.push(b);
    }
    Err(Error::IterationLimit("perron reduction did not finish".into()))
}

fn divides(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Outcome of principalizing a monomial ideal.
#[derive(Debug, Clone)]
pub struct Principalization {
    pub seq: TransformSeq,
    /// Generator of the transformed ideal.
    pub gen: Vec<i64>,
    /// Index of the original generator whose image is `gen`.
    pub source: usize,
    /// Images of all original generators.
    pub images: Vec<Vec<i64>>,
    /// Values of the new variables.
    pub values: Vec<GroupValue>,
}

/// Principalizes the monomial ideal generated by `gens` along `weights`.
pub fn principalize(gens: &[Vec<i64>], weights: &[GroupValue]) -> Result<Principalization> {
    let n = weights.len();
    if gens.is_empty() {
        return Err(Error::NotApplicable("empty ideal".into()));
    }
    let support: Vec<usize> = (0..n).filter(|&k| gens.iter().any(|g| g[k] != 0)).collect();
    let sub: Vec<GroupValue> = support.iter().map(|&k| weights[k].clone()).collect();
    if rational_relation(&sub).is_some() {
        return Err(Error::NotIndependent("ideal variables have dependent values".into()));
    }
    let mut images: Vec<Vec<i64>> = gens.to_vec();
    let mut values = weights.to_vec();
    let mut seq = TransformSeq::new(n);
    for _ in 0..MAX_BLOWUPS {
        let mut pair = None;
        'outer: for a in 0..images.len() {
            for b in a + 1..images.len() {
                if !divides(&images[a], &images[b]) && !divides(&images[b], &images[a]) {
                    pair = Some((a, b));
                    break 'outer;
                }
            }
        }
        let Some((a, b)) = pair else {
            let source = (0..images.len())
                .find(|&k| images.iter().all(|g| divides(&images[k], g)))
                .expect("comparable generators have a least element");
            return Ok(Principalization { gen: images[source].clone(), source, images, seq, values });
        };
        let ea: Vec<i64> = images[a].iter().zip(&images[b]).map(|(x, y)| x - x.min(y)).collect();
        let eb: Vec<i64> = images[b].iter().zip(&images[a]).map(|(x, y)| x - x.min(y)).collect();
        let i = argmax(&ea);
        let j = argmax(&eb);
        let blow = match compare(&values[i], &values[j])? {
            Ordering::Less => ElementaryBlowup::dividing(j, i),
            Ordering::Greater => ElementaryBlowup::dividing(i, j),
            Ordering::Equal => return Err(Error::NotIndependent("tie between variable values".into())),
        };
        for g in images.iter_mut() {
            blow.apply_exponent(g);
        }
        blow.apply_values(&mut values);
        seq.push(blow);
    }
    Err(Error::IterationLimit("principalization did not finish".into()))
}

fn argmax(e: &[i64]) -> usize {
    let mut best = 0;
    for (k, &x) in e.iter().enumerate() {
        if x > e[best] {
            best = k;
        }
    }
    best
}

/// Values of `x_i = y^{C_i}` from the `y` weights.
pub fn x_values(c: &IMat, y_weights: &[GroupValue]) -> Vec<GroupValue> {
    c.iter().map(|row| combine_i(&y_weights[..row.len()], row)).collect()
}

/// Monomial blow-ups in `x_1..x_r` after which `x^b = x(1)^{b(1)}` with `b(1) >= 0`.
///
/// Requires `bC >= 0`. Returns the sequence and `b(1) = A^T b`.
pub fn make_nonneg(b: &[Q], c: &IMat, y_weights: &[GroupValue]) -> Result<(TransformSeq, Vec<Q>)> {
    let r = b.len();
    let bc = linalg::vec_mat_q(b, &linalg::to_qmat(c));
    if bc.iter().any(|x| x.is_negative()) {
        return Err(Error::NotRepresentable("bC has a negative component".into()));
    }
    if b.iter().all(|x| !x.is_negative()) {
        return Ok((TransformSeq::new(r), b.to_vec()));
    }
    let ints = {
        let l = b.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
        b.iter()
            .map(|x| (x * Q::from_integer(l.clone())).to_integer().to_i64().expect("exponent overflow"))
            .collect::<Vec<i64>>()
    };
    let pos: Vec<i64> = ints.iter().map(|&x| x.max(0)).collect();
    let neg: Vec<i64> = ints.iter().map(|&x| (-x).max(0)).collect();
    let xv = x_values(c, y_weights);
    let p = principalize(&[pos, neg], &xv)?;
    let b1 = linalg::vec_mat_q(b, &linalg::to_qmat(&p.seq.matrix));
    debug_assert!(b1.iter().all(|x| !x.is_negative()));
    Ok((p.seq, b1))
}

/// Generators computed by [`module_generators`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleGens {
    pub h_gens: Vec<Vec<Q>>,
    pub i_gens: Vec<Vec<Q>>,
    pub m_gens: Vec<Vec<Q>>,
    pub d: i64,
}

/// Default coordinate bound for the enumeration in [`module_generators`].
pub const ENUM_BOUND: i64 = 10;

/// Basis (as rational rows) of `G = {v ∈ Q^r | vC ∈ Z^s}`.
pub fn g_lattice(c: &IMat) -> Result<Vec<Vec<Q>>> {
    let r = c.len();
    let s = c.first().map_or(0, |row| row.len());
    if linalg::rank_i(c) < r {
        return Err(Error::RankDeficient);
    }
    let sat = linalg::saturated_row_lattice(c, s);
    let cq = linalg::to_qmat(c);
    sat.iter()
        .map(|u| linalg::solve_left(&cq, &linalg::to_qvec(u)).ok_or(Error::RankDeficient))
        .collect()
}

/// Common denominator of the lattice `G`.
pub fn g_denominator(c: &IMat) -> Result<i64> {
    let basis = g_lattice(c)?;
    let mut d = BigInt::from(1);
    for v in &basis {
        for x in v {
            d = d.lcm(x.denom());
        }
    }
    d.to_i64().ok_or_else(|| Error::InstanceTooLarge("denominator overflow".into()))
}

/// Generators of `H`, `I` and `M_Λ` by enumeration in a coordinate box.
pub fn module_generators(c: &IMat, lambda: &[i64]) -> Result<ModuleGens> {
    module_generators_bounded(c, lambda, ENUM_BOUND)
}

pub fn module_generators_bounded(c: &IMat, lambda: &[i64], bound: i64) -> Result<ModuleGens> {
    let r = c.len();
    let d = g_denominator(c)?;
    let cq = linalg::to_qmat(c);
    let lam = linalg::to_qvec(lambda);
    let in_g = |v: &[Q]| linalg::vec_mat_q(v, &cq).iter().all(|x| x.is_integer());
    let vc = |v: &[Q]| linalg::vec_mat_q(v, &cq);
    // all points of (1/d)Z^r with |coordinate| <= bound
    let mut pts: Vec<Vec<Q>> = vec![Vec::new()];
    for _ in 0..r {
        let mut next = Vec::new();
        for p in &pts {
            for k in -bound * d..=bound * d {
                let mut q = p.clone();
                q.push(Q::new(BigInt::from(k), BigInt::from(d)));
                next.push(q);
            }
        }
        pts = next;
    }
    let h: Vec<Vec<Q>> = pts
        .iter()
        .filter(|v| v.iter().all(|x| x.is_integer()) && vc(v).iter().all(|x| !x.is_negative()))
        .cloned()
        .collect();
    let i: Vec<Vec<Q>> = pts
        .iter()
        .filter(|v| in_g(v) && vc(v).iter().all(|x| !x.is_negative()))
        .cloned()
        .collect();
    let m: Vec<Vec<Q>> = pts
        .iter()
        .filter(|v| in_g(v) && vc(v).iter().zip(&lam).all(|(x, l)| !(x + l).is_negative()))
        .cloned()
        .collect();
    let h_gens = hilbert_basis(&h);
    let i_gens = hilbert_basis(&i);
    let m_gens: Vec<Vec<Q>> = m
        .iter()
        .filter(|v| {
            !h_gens.iter().any(|g| {
                let w: Vec<Q> = v.iter().zip(g).map(|(a, b)| a - b).collect();
                m.contains(&w)
            })
        })
        .cloned()
        .collect();
    let limit = qi(bound);
    for g in h_gens.iter().chain(&i_gens).chain(&m_gens) {
        if g.iter().any(|x| x.abs() >= limit) {
            return Err(Error::InstanceTooLarge(format!("a generator reaches the enumeration bound {bound}")));
        }
    }
    Ok(ModuleGens { h_gens, i_gens, m_gens, d })
}

/// Irreducible nonzero elements of a finite sample of a pointed semigroup.
fn hilbert_basis(members: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let nonzero: Vec<&Vec<Q>> = members.iter().filter(|v| v.iter().any(|x| !x.is_zero())).collect();
    nonzero
        .iter()
        .filter(|v| {
            !nonzero.iter().any(|a| {
                let rest: Vec<Q> = v.iter().zip(a.iter()).map(|(x, y)| x - y).collect();
                rest.iter().any(|x| !x.is_zero()) && nonzero.iter().any(|b| **b == rest)
            })
        })
        .map(|v| (*v).clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valgroup::IrrationalCombination;

    fn sqrt2(c: i64) -> GroupValue {
        GroupValue::simple(1, qi(c))
    }

    #[test]
    fn perron_rank_one_euclid() {
        let res = perron(&[sqrt2(1), sqrt2(3)], &[qi(3)]).unwrap();
        assert_eq!(res.seq.steps.len(), 3);
        assert!(res.seq.steps.iter().all(|b| b.chart == 1 && b.divider() == 0));
        assert_eq!(res.matrix, vec![vec![1, 0], vec![3, 1]]);
        assert_eq!(res.values, vec![sqrt2(1), GroupValue::zero(1)]);
        let res = perron(&[sqrt2(1), GroupValue::zero(1)], &[]).unwrap();
        assert!(res.seq.is_empty());
        assert_eq!(res.matrix, linalg::identity_i(2));
    }

    #[test]
    fn perron_rank_two_level() {
        let z = IrrationalCombination::zero();
        let w1 = GroupValue::new(vec![IrrationalCombination::term(1, qi(1)), z.clone()]);
        let w2 = GroupValue::new(vec![z.clone(), IrrationalCombination::term(2, qi(1))]);
        let res = perron(&[w1, w2.clone(), w2], &[]).unwrap();
        assert_eq!(res.seq.steps, vec![ElementaryBlowup::dividing(2, 1)]);
        assert!(res.values[2].is_zero());
    }

    #[test]
    fn perron_errors() {
        let r3 = GroupValue::simple(2, qi(1));
        assert!(matches!(perron(&[sqrt2(1), r3], &[]), Err(Error::NotDependent(_))));
        assert!(matches!(perron(&[sqrt2(1), sqrt2(2), sqrt2(3)], &[]), Err(Error::NotIndependent(_))));
    }

    #[test]
    fn principalize_examples() {
        let w = vec![sqrt2(1), GroupValue::simple(2, qi(1))];
        let p = principalize(&[vec![2, 1], vec![1, 3]], &w).unwrap();
        assert_eq!(p.seq.steps, vec![ElementaryBlowup::dividing(1, 0)]);
        assert_eq!(p.images, vec![vec![3, 1], vec![4, 3]]);
        assert_eq!(p.gen, vec![3, 1]);
        let p = principalize(&[vec![1, 0], vec![0, 1]], &w).unwrap();
        assert_eq!(p.images, vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(p.gen, vec![1, 0]);
        let p = principalize(&[vec![1, 1]], &w).unwrap();
        assert!(p.seq.is_empty());
    }

    #[test]
    fn nonneg_examples() {
        let w = vec![sqrt2(1), GroupValue::simple(2, qi(1))];
        let c = vec![vec![2, 1], vec![1, 1]];
        let (seq, b1) = make_nonneg(&[qi(1), qi(-1)], &c, &w).unwrap();
        assert!(!seq.is_empty());
        assert!(b1.iter().all(|x| !x.is_negative() && x.is_integer()));
        let (seq, b1) = make_nonneg(&[qi(1), qi(2)], &c, &w).unwrap();
        assert!(seq.is_empty());
        assert_eq!(b1, vec![qi(1), qi(2)]);
        let c2 = vec![vec![1, 3], vec![1, 1]];
        assert!(matches!(make_nonneg(&[qi(-1), qi(2)], &c2, &w), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn module_generator_examples() {
        let g = module_generators(&vec![vec![1]], &[0]).unwrap();
        assert_eq!(g.h_gens, vec![vec![qi(1)]]);
        assert_eq!(g.i_gens, vec![vec![qi(1)]]);
        assert_eq!(g.m_gens, vec![vec![qi(0)]]);
        assert_eq!(g.d, 1);
        let g = module_generators(&vec![vec![2, 3]], &[0, 0]).unwrap();
        assert_eq!(g.i_gens, vec![vec![qi(1)]]);
        assert_eq!(g.d, 1);
        assert!(matches!(module_generators(&vec![vec![1], vec![1]], &[0]), Err(Error::RankDeficient)));
        // G = (1/2)Z for C = [[2]]
        let g = module_generators(&vec![vec![2]], &[0]).unwrap();
        assert_eq!(g.d, 2);
        assert_eq!(g.i_gens, vec![vec![crate::linalg::q(1, 2)]]);
    }
}
