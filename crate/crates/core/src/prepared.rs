//! Prepared pairs of type `(s, r, l)` and the ten coordinate transformations
//! that preserve their shape.
//!
//! A pair records `x_i = y^{C_i}` for `i ≤ r`, `x_{r+i} = y_{s+i}` for
//! `i ≤ l`, and a truncated series in `y` for every later `x`. The `y`
//! coordinates carry the values of a monomial valuation; the first `s` are
//! rationally independent and the rest lie in their rational span.
//!
//! Indices inside payloads are offsets: `mbar` and the swap
//! index `i` are 1-based offsets past `r` (on the `x` side) and `s` (on the
//! `y` side). Everything else is 0-based.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cyclo::{Cyclo, BASE_MODULUS};
use crate::error::{Error, Result};
use crate::linalg::{self, IMat, QMat, Q};
use crate::series::{substitute, Image, Series, Substitution};
use crate::toric::{self, TransformSeq};
use crate::valgroup::{combine, combine_i, compare, GroupValue, WeightAssignment};

/// A prepared pair plus the log of transformations that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPair {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub r: usize,
    pub l: usize,
    /// `r × s` exponent matrix of `x_1..x_r`.
    pub c: IMat,
    pub weights: Vec<GroupValue>,
    /// Series for `x_{r+l+1}..x_m`, in `y_1..y_n`.
    pub xseries: Vec<Series>,
    /// Cyclotomic modulus of the coefficient field.
    pub field: u64,
    pub trunc: Q,
    pub log: Vec<Transformation>,
}

/// Data of the ten transformation types.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Blow-ups of `y_1..y_s`.
    Type1 { seq: TransformSeq },
    /// Blow-ups of `x_1..x_r` with a companion on `y_1..y_s`.
    Type2 { xseq: TransformSeq, yseq: TransformSeq },
    /// `x_{r+m̄}(1) = x_{r+m̄} − Φ`, `m̄ ≤ l`, `Φ` in `x_1..x_{r+m̄−1}`.
    Type3 { mbar: usize, phi: Series },
    /// Translation blow-up of `x_1..x_r, x_{r+m̄}` with `m̄ ≤ l`.
    Type4 { mbar: usize, lift: LiftData },
    /// `y_{s+m̄}(1) = F`, `m̄ > l`, with `F` of order one along `y_{s+m̄}`.
    Type5 { mbar: usize, f: Series },
    /// Translation blow-up of `y_1..y_s, y_{s+m̄}` in normal form.
    Type6 { mbar: usize, seq: TransformSeq, perm: Vec<usize>, b: IMat, bvec: Vec<i64>, alpha: Cyclo },
    /// Swap of `y_{s+i}` and `y_{s+m̄}`, `l < i < m̄`.
    Type7 { i: usize, mbar: usize },
    /// `y_i = y_i(1)·γ^{c_i}` for `i ≤ s`.
    Type8 { gamma: Series, c: Vec<Q> },
    /// Translation blow-up of `x_1..x_r, x_{r+m̄}` with `m̄ > l`.
    Type9 { mbar: usize, lift: LiftData },
    /// `x_{r+m̄}(1) = x_{r+m̄} − Φ`, `m̄ > l`, `Φ` in `x_1..x_{r+m̄−1}`.
    Type10 { mbar: usize, phi: Series },
}

/// A normalized translation blow-up on the `x` side with its `y` companion.
///
/// `x_i = x(1)^{a_i}`, `x_{r+m̄} = x(1)^{avec}(x_{r+m̄}(1) + α)`,
/// `y_i = y(1)^{yb_i}` and, for type 4, `y_{s+m̄} = y(1)^{ybvec}(y_{s+m̄}(1) + α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftData {
    pub xseq: TransformSeq,
    pub xperm: Vec<usize>,
    pub a: IMat,
    pub avec: Vec<i64>,
    pub alpha: Cyclo,
    /// Type 4 only: the translation blow-up of `y_1..y_s, y_{s+m̄}`.
    pub ypre: Option<(TransformSeq, Vec<usize>)>,
    /// Blow-ups of `y_1..y_s` that make the new `x` monomials integral.
    pub ypost: TransformSeq,
    pub yb: IMat,
    pub ybvec: Vec<i64>,
}

/// One log entry: the payload, the substitutions it induces, and the state after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformation {
    pub payload: Payload,
    /// Old `y_i` in terms of the new `y`.
    pub sigma_y: Vec<Image>,
    /// Old `x_i` in terms of the new `x`.
    pub sigma_x: Vec<Image>,
    /// The resulting pair, with an empty log.
    pub post: Box<PreparedPair>,
    pub note: Option<String>,
}

impl Payload {
    pub fn tag(&self) -> u8 {
        match self {
            Payload::Type1 { .. } => 1,
            Payload::Type2 { .. } => 2,
            Payload::Type3 { .. } => 3,
            Payload::Type4 { .. } => 4,
            Payload::Type5 { .. } => 5,
            Payload::Type6 { .. } => 6,
            Payload::Type7 { .. } => 7,
            Payload::Type8 { .. } => 8,
            Payload::Type9 { .. } => 9,
            Payload::Type10 { .. } => 10,
        }
    }
}

impl Transformation {
    pub fn tag(&self) -> u8 {
        self.payload.tag()
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidPreparedForm(msg.into())
}

fn bad_t(msg: impl Into<String>) -> Error {
    Error::InvalidTransformation(msg.into())
}

fn pad(row: &[i64], n: usize) -> Vec<i64> {
    let mut e = row.to_vec();
    e.resize(n, 0);
    e
}

fn unit_vec(n: usize, i: usize) -> Vec<i64> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

/// Matrix of a blow-up sequence with its columns reordered by `perm`.
pub fn permuted_matrix(seq: &TransformSeq, perm: &[usize]) -> IMat {
    seq.recompute().iter().map(|row| perm.iter().map(|&k| row[k]).collect()).collect()
}

impl PreparedPair {
    /// Re-expresses the pair over `Q(ζ_{lcm(field, m)})`.
    pub fn lift_field(&self, m: u64) -> Self {
        let field = self.field.lcm(&m);
        let mut q = self.clone();
        q.field = field;
        q.xseries = self.xseries.iter().map(|g| g.lift_field(field)).collect();
        q
    }

    /// Builds and validates a pair; `n` and `m` are read off the data.
    pub fn new(
        s: usize,
        r: usize,
        l: usize,
        c: IMat,
        weights: Vec<GroupValue>,
        xseries: Vec<Series>,
        trunc: Q,
    ) -> Result<Self> {
        let field = xseries.iter().fold(BASE_MODULUS, |acc, g| acc.lcm(&g.modulus()));
        let p = PreparedPair {
            n: weights.len(),
            m: r + l + xseries.len(),
            s,
            r,
            l,
            c,
            weights,
            xseries,
            field,
            trunc,
            log: Vec::new(),
        };
        validate(&p)?;
        Ok(p)
    }

    pub fn kind(&self) -> (usize, usize, usize) {
        (self.s, self.r, self.l)
    }

    pub fn is_monomial(&self) -> bool {
        self.r + self.l == self.m
    }

    /// The pair without its log.
    pub fn snapshot(&self) -> PreparedPair {
        PreparedPair { log: Vec::new(), ..self.clone() }
    }

    /// Values of `x_1..x_{r+l}`.
    pub fn x_values(&self) -> Vec<GroupValue> {
        let mut v = toric::x_values(&self.c, &self.weights[..self.s]);
        v.extend(self.weights[self.s..self.s + self.l].iter().cloned());
        v
    }

    /// `x_i` (0-based) as a series in `y`.
    pub fn presentation(&self, i: usize) -> Series {
        let (n, r, l) = (self.n, self.r, self.l);
        if i < r {
            Series::monomial(n, &pad(&self.c[i], n), Cyclo::one(self.field), self.trunc.clone())
        } else if i < r + l {
            Series::var(n, self.s + i - r, self.trunc.clone(), self.field)
        } else {
            self.xseries[i - r - l].clone()
        }
    }

    /// The substitution `x ↦ x(y)`.
    pub fn x_substitution(&self) -> Substitution {
        let (n, r, l) = (self.n, self.r, self.l);
        let images = (0..self.m)
            .map(|i| {
                if i < r {
                    Image::monomial_i(&pad(&self.c[i], n), self.field)
                } else if i < r + l {
                    Image::monomial_i(&unit_vec(n, self.s + i - r), self.field)
                } else {
                    Image::Series(self.xseries[i - r - l].clone())
                }
            })
            .collect();
        Substitution { nvars: n, images }
    }

    /// The series of `x_{r+m̄}` for `m̄ > l`.
    pub fn extra(&self, mbar: usize) -> Result<&Series> {
        if mbar <= self.l || self.r + mbar > self.m {
            return Err(bad_t(format!("m̄ = {mbar} does not index a series variable")));
        }
        Ok(&self.xseries[mbar - self.l - 1])
    }
}

/// Checks every clause of the prepared form and returns the type `(s, r, l)`.
pub fn validate(p: &PreparedPair) -> Result<(usize, usize, usize)> {
    let (n, m, s, r, l) = (p.n, p.m, p.s, p.r, p.l);
    if p.weights.len() != n {
        return Err(bad(format!("{} weights for n = {n}", p.weights.len())));
    }
    if s + l > n {
        return Err(bad(format!("s + l = {} exceeds n = {n}", s + l)));
    }
    if r + l > m {
        return Err(bad(format!("r + l = {} exceeds m = {m}", r + l)));
    }
    if p.c.len() != r || p.c.iter().any(|row| row.len() != s) {
        return Err(bad(format!("C must be {r} × {s}")));
    }
    if p.c.iter().flatten().any(|&x| x < 0) {
        return Err(bad("C has a negative entry"));
    }
    let rk = linalg::rank_i(&p.c);
    if rk != r {
        return Err(bad(format!("rank C = {rk} but r = {r}")));
    }
    WeightAssignment::new(p.weights.clone(), s).map_err(|e| bad(format!("weights: {e}")))?;
    if p.xseries.len() != m - r - l {
        return Err(bad(format!("{} series for m − r − l = {}", p.xseries.len(), m - r - l)));
    }
    if !p.trunc.is_positive() {
        return Err(bad("truncation must be positive"));
    }
    for (k, g) in p.xseries.iter().enumerate() {
        let i = r + l + k + 1;
        if g.nvars() != n {
            return Err(bad(format!("series of x_{i} has {} variables, expected {n}", g.nvars())));
        }
        if !g.is_integral() {
            return Err(bad(format!("series of x_{i} has a fractional exponent")));
        }
        if !g.constant_term().is_zero() {
            return Err(bad(format!("series of x_{i} has a constant term")));
        }
    }
    Ok((s, r, l))
}

/// The series grouped by class of the first `s` exponents modulo `Q^r·C ∩ Z^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecomposition {
    pub classes: BTreeMap<Vec<i64>, Series>,
}

impl ClassDecomposition {
    /// The algebraic part `h_[0]`, or zero.
    pub fn zero_class(&self, like: &Series) -> Series {
        self.classes
            .iter()
            .find(|(k, _)| k.iter().all(|&x| x == 0))
            .map(|(_, h)| h.clone())
            .unwrap_or_else(|| Series::zero(like.nvars(), like.trunc().clone(), like.modulus()))
    }

    pub fn sum(&self, like: &Series) -> Series {
        let zero = Series::zero(like.nvars(), like.trunc().clone(), like.modulus());
        self.classes.values().fold(zero, |acc, h| acc.add(h))
    }
}

fn int_exps(e: &[Q]) -> Vec<i64> {
    e.iter().map(|x| linalg::q_to_i64(x).expect("integral exponent")).collect()
}

/// Canonical class representative of `alpha` modulo the lattice with HNF basis `h`.
pub fn class_key(alpha: &[i64], h: &IMat) -> Vec<i64> {
    linalg::reduce_mod_lattice(alpha, h)
}

pub fn decompose(g: &Series, p: &PreparedPair) -> ClassDecomposition {
    let h = linalg::saturated_row_lattice(&p.c, p.s);
    let s = p.s;
    ClassDecomposition { classes: g.split_by(|e| class_key(&int_exps(&e[..s]), &h)) }
}

/// Whether every monomial of `g` keeps `rank [C; α] = r`. A series that
/// involves `y_{s+l+1}..y_n` is never algebraic.
pub fn is_algebraic(g: &Series, p: &PreparedPair) -> bool {
    if (p.s + p.l..g.nvars()).any(|v| g.depends_on(v)) {
        return false;
    }
    let h = linalg::saturated_row_lattice(&p.c, p.s);
    g.terms()
        .iter()
        .all(|(e, _)| class_key(&int_exps(&e[..p.s]), &h).iter().all(|&x| x == 0))
}

/// Whether `y^alpha` (exponents on `y_1..y_s`) is algebraic over `x_1..x_r`.
pub fn is_algebraic_exponent(alpha: &[i64], c: &IMat) -> bool {
    let mut rows = c.clone();
    rows.push(alpha.to_vec());
    linalg::rank_i(&rows) == c.len()
}

/// Smallest value among the monomials of `g`.
pub fn min_support_value(g: &Series, w: &[GroupValue]) -> Result<Option<GroupValue>> {
    let mut best: Option<GroupValue> = None;
    for (e, _) in g.terms() {
        let v = combine(w, &e);
        best = Some(match best {
            Some(b) if compare(&b, &v)? != Ordering::Greater => b,
            _ => v,
        });
    }
    Ok(best)
}

/// New values of `y_1..y_s` after `y_i = y(1)^{b_i}`.
fn weights_after(w: &[GroupValue], b: &IMat) -> Result<Vec<GroupValue>> {
    let s = b.len();
    let inv = linalg::inverse_q_of_i(b).ok_or_else(|| bad_t("singular exponent matrix"))?;
    Ok((0..s).map(|j| combine(&w[..s], &inv[j])).collect())
}

/// `a^{-1}·C·b`, required to be a nonnegative integer matrix.
fn new_c(c: &IMat, a: Option<&IMat>, b: &IMat) -> Result<IMat> {
    let cb = linalg::mat_mul_q(&linalg::to_qmat(c), &linalg::to_qmat(b));
    let out: QMat = match a {
        Some(a) => {
            let ainv = linalg::inverse_q_of_i(a).ok_or_else(|| bad_t("singular x-side matrix"))?;
            linalg::mat_mul_q(&ainv, &cb)
        }
        None => cb,
    };
    let mut res = Vec::new();
    for row in out {
        let mut ir = Vec::new();
        for x in row {
            match linalg::q_to_i64(&x) {
                Some(v) if v >= 0 => ir.push(v),
                _ => return Err(bad_t("transformed exponent matrix is not a nonnegative integer matrix")),
            }
        }
        res.push(ir);
    }
    Ok(res)
}

fn identity_images(n: usize, field: u64) -> Vec<Image> {
    Substitution::identity(n, field).images
}

fn substitute_all(gs: &[Series], images: &[Image], n: usize, cap: &Q) -> Result<Vec<Series>> {
    let sigma = Substitution { nvars: n, images: images.to_vec() };
    gs.iter().map(|g| substitute(g, &sigma, Some(cap.clone()))).collect()
}

fn iteration_bound(target: &Q) -> usize {
    linalg::floor_i64(target).max(0) as usize + 4
}

/// Solves `y_v = G(y')` from `y'_v = F(y)`, every other variable fixed.
pub fn invert_coordinate(f: &Series, v: usize, target: &Q) -> Result<Series> {
    let n = f.nvars();
    let modulus = f.modulus();
    let ev = unit_vec(n, v);
    let lin = f
        .terms()
        .into_iter()
        .find(|(e, _)| e.iter().enumerate().all(|(i, q)| if i == v { q.is_one() } else { q.is_zero() }))
        .map(|(_, c)| c)
        .ok_or_else(|| bad_t(format!("F has no linear term in y_{}", v + 1)))?;
    let h = f.sub(&Series::monomial(n, &ev, lin.clone(), f.trunc().clone()));
    let lin_inv = lin.inv()?;
    let yv = Series::var(n, v, target.clone(), modulus);
    let mut g = yv.clone();
    let mut sigma = Substitution::identity(n, modulus);
    for _ in 0..iteration_bound(target) {
        sigma.images[v] = Image::Series(g.clone());
        let hg = substitute(&h, &sigma, Some(target.clone()))?;
        let next = yv.sub(&hg).scale(&lin_inv).truncate(target);
        if next == g {
            return Ok(next);
        }
        g = next;
    }
    Err(Error::IterationLimit("inverting an order-one coordinate change".into()))
}

/// Solves `Y_i = y_i·γ(Y)^{c_i}` for `i < s` by fixed-point iteration.
pub fn invert_unit_scaling(gamma: &Series, c: &[Q], target: &Q) -> Result<Vec<Series>> {
    let n = gamma.nvars();
    let modulus = gamma.modulus();
    let base: Vec<Series> = (0..n).map(|i| Series::var(n, i, target.clone(), modulus)).collect();
    let mut ys = base.clone();
    for _ in 0..iteration_bound(target) {
        let sigma = Substitution { nvars: n, images: ys.iter().map(|y| Image::Series(y.clone())).collect() };
        let g = substitute(gamma, &sigma, Some(target.clone()))?;
        let mut next = base.clone();
        for (i, ci) in c.iter().enumerate() {
            if !ci.is_zero() {
                next[i] = base[i].mul(&g.unit_pow(ci)?).truncate(target);
            }
        }
        if next == ys {
            return Ok(next);
        }
        ys = next;
    }
    Err(Error::IterationLimit("inverting a unit rescaling".into()))
}

/// The pair and substitutions before promotions are folded in.
struct Raw {
    next: PreparedPair,
    sigma_y: Vec<Image>,
    sigma_x: Vec<Image>,
    note: Option<String>,
}

fn check_mbar_series(p: &PreparedPair, mbar: usize) -> Result<()> {
    if mbar <= p.l || p.s + mbar > p.n {
        return Err(bad_t(format!("m̄ = {mbar} must satisfy l < m̄ ≤ n − s")));
    }
    Ok(())
}

fn check_mbar_x(p: &PreparedPair, mbar: usize) -> Result<()> {
    if mbar <= p.l || p.r + mbar > p.m {
        return Err(bad_t(format!("m̄ = {mbar} must satisfy l < m̄ ≤ m − r")));
    }
    Ok(())
}

fn check_phi(p: &PreparedPair, mbar: usize, phi: &Series) -> Result<()> {
    if phi.nvars() != p.m {
        return Err(bad_t("Φ must be a series in the x variables"));
    }
    if (p.r + mbar - 1..p.m).any(|v| phi.depends_on(v)) {
        return Err(bad_t(format!("Φ must only involve x_1..x_{}", p.r + mbar - 1)));
    }
    if !phi.constant_term().is_zero() {
        return Err(bad_t("Φ has a constant term"));
    }
    Ok(())
}

fn raw_apply(p: &PreparedPair, payload: &Payload) -> Result<Raw> {
    let (n, m, s, r, l) = (p.n, p.m, p.s, p.r, p.l);
    let field = p.field;
    let mut next = p.snapshot();
    let mut sigma_y = identity_images(n, field);
    let mut sigma_x = identity_images(m, field);
    let mut note = None;
    let set_y_monomials = |sigma_y: &mut Vec<Image>, b: &IMat| {
        for (i, row) in b.iter().enumerate() {
            sigma_y[i] = Image::monomial_i(&pad(row, n), field);
        }
    };
    match payload {
        Payload::Type1 { seq } => {
            check_seq(seq, s)?;
            let b = seq.recompute();
            next.c = new_c(&p.c, None, &b)?;
            let w = weights_after(&p.weights, &b)?;
            next.weights[..s].clone_from_slice(&w);
            set_y_monomials(&mut sigma_y, &b);
        }
        Payload::Type2 { xseq, yseq } => {
            check_seq(xseq, r)?;
            check_seq(yseq, s)?;
            let a = xseq.recompute();
            let b = yseq.recompute();
            next.c = new_c(&p.c, Some(&a), &b)?;
            let w = weights_after(&p.weights, &b)?;
            next.weights[..s].clone_from_slice(&w);
            set_y_monomials(&mut sigma_y, &b);
            for (i, row) in a.iter().enumerate() {
                sigma_x[i] = Image::monomial_i(&pad(row, m), field);
            }
        }
        Payload::Type3 { mbar, phi } => {
            if *mbar == 0 || *mbar > l {
                return Err(bad_t(format!("type 3 needs 1 ≤ m̄ ≤ l, got m̄ = {mbar}")));
            }
            check_phi(p, *mbar, phi)?;
            let v = s + mbar - 1;
            let phi_y = substitute(phi, &p.x_substitution(), Some(p.trunc.clone()))?;
            sigma_y[v] = Image::Series(Series::var(n, v, p.trunc.clone(), field).add(&phi_y));
            let xv = r + mbar - 1;
            sigma_x[xv] = Image::Series(Series::var(m, xv, p.trunc.clone(), field).add(phi));
            note = Some(format!("y_{} keeps its value", v + 1));
        }
        Payload::Type4 { mbar, lift } => {
            if *mbar == 0 || *mbar > l {
                return Err(bad_t(format!("type 4 needs 1 ≤ m̄ ≤ l, got m̄ = {mbar}")));
            }
            apply_lift(p, *mbar, lift, true, &mut next, &mut sigma_y, &mut sigma_x)?;
            note = Some(format!("y_{} keeps its value", s + mbar));
        }
        Payload::Type5 { mbar, f } => {
            check_mbar_series(p, *mbar)?;
            let v = s + mbar - 1;
            if f.nvars() != n || (v + 1..n).any(|k| f.depends_on(k)) {
                return Err(bad_t(format!("F must be a series in y_1..y_{}", v + 1)));
            }
            if f.ord_in_var(v) != Some(Q::one()) {
                return Err(bad_t(format!("F has order ≠ 1 along y_{}", v + 1)));
            }
            let g = invert_coordinate(f, v, &p.trunc)?;
            sigma_y[v] = Image::Series(g);
            let val = min_support_value(f, &p.weights)?.ok_or_else(|| bad_t("F vanishes"))?;
            next.weights[v] = val;
            note = Some(format!("value of y_{} set to the least value on the support of F", v + 1));
        }
        Payload::Type6 { mbar, seq, perm, b, bvec, alpha } => {
            check_mbar_series(p, *mbar)?;
            check_seq(seq, s + 1)?;
            check_perm(perm, s + 1)?;
            if alpha.is_zero() {
                return Err(bad_t("type 6 needs α ≠ 0"));
            }
            let mm = permuted_matrix(seq, perm);
            if *b != block(&mm, s) || *bvec != mm[s][..s].to_vec() {
                return Err(bad_t("type-6 matrices do not match the blow-up sequence"));
            }
            let v = s + mbar - 1;
            let w = weights_after(&p.weights, b)?;
            if compare(&combine_i(&w, bvec), &p.weights[v])? != Ordering::Equal {
                return Err(bad_t(format!("y(1)^b does not carry the value of y_{}", v + 1)));
            }
            next.c = new_c(&p.c, None, b)?;
            next.weights[..s].clone_from_slice(&w);
            set_y_monomials(&mut sigma_y, b);
            sigma_y[v] = Image::Gmt {
                coeff: Cyclo::one(field),
                mono: linalg::to_qvec(&pad(bvec, n)),
                factors: vec![(v, alpha.clone(), Q::one())],
            };
            note = Some(format!("y_{} keeps its value", v + 1));
        }
        Payload::Type7 { i, mbar } => {
            if !(l < *i && i < mbar) || s + mbar > n {
                return Err(bad_t(format!("type 7 needs l < i < m̄ ≤ n − s, got ({i}, {mbar})")));
            }
            let (a, b) = (s + i - 1, s + mbar - 1);
            let mut map: Vec<usize> = (0..n).collect();
            map.swap(a, b);
            next.xseries = p.xseries.iter().map(|g| g.embed(n, &map)).collect();
            next.weights.swap(a, b);
            sigma_y.swap(a, b);
            return Ok(Raw { next, sigma_y, sigma_x, note });
        }
        Payload::Type8 { gamma, c } => {
            if c.len() != s || gamma.nvars() != n {
                return Err(bad_t("type 8 needs s exponents and a unit in y"));
            }
            if !gamma.is_unit() {
                return Err(bad_t("γ is not a unit"));
            }
            for (k, row) in p.c.iter().enumerate() {
                let dot: Q = row.iter().zip(c).map(|(&x, ci)| ci * Q::from_integer(x.into())).sum();
                if !dot.is_zero() {
                    return Err(bad_t(format!("c·C_{} ≠ 0: x_{} would not stay monomial", k + 1, k + 1)));
                }
            }
            let ys = invert_unit_scaling(gamma, c, &p.trunc)?;
            for (i, ci) in c.iter().enumerate() {
                if !ci.is_zero() {
                    sigma_y[i] = Image::Series(ys[i].clone());
                }
            }
        }
        Payload::Type9 { mbar, lift } => {
            check_mbar_x(p, *mbar)?;
            apply_lift(p, *mbar, lift, false, &mut next, &mut sigma_y, &mut sigma_x)?;
        }
        Payload::Type10 { mbar, phi } => {
            check_mbar_x(p, *mbar)?;
            check_phi(p, *mbar, phi)?;
            let phi_y = substitute(phi, &p.x_substitution(), Some(p.trunc.clone()))?;
            let k = mbar - l - 1;
            next.xseries[k] = p.xseries[k].sub(&phi_y);
            let xv = r + mbar - 1;
            sigma_x[xv] = Image::Series(Series::var(m, xv, p.trunc.clone(), field).add(phi));
            return Ok(Raw { next, sigma_y, sigma_x, note });
        }
    }
    // every type except 7 and 10 moves the y coordinates
    let special = match payload {
        Payload::Type9 { mbar, .. } => Some(mbar - l - 1),
        _ => None,
    };
    for (k, g) in p.xseries.iter().enumerate() {
        if Some(k) == special {
            continue;
        }
        next.xseries[k] = substitute_all(std::slice::from_ref(g), &sigma_y, n, &p.trunc)?.remove(0);
    }
    Ok(Raw { next, sigma_y, sigma_x, note })
}

fn block(mm: &IMat, k: usize) -> IMat {
    mm[..k].iter().map(|row| row[..k].to_vec()).collect()
}

fn check_seq(seq: &TransformSeq, k: usize) -> Result<()> {
    if seq.n != k || seq.steps.iter().any(|b| !b.is_valid() || b.j >= k) {
        return Err(bad_t(format!("blow-up sequence must act on {k} variables")));
    }
    Ok(())
}

fn check_perm(perm: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if perm.len() != k {
        return Err(bad_t("permutation has the wrong length"));
    }
    for &x in perm {
        if x >= k || seen[x] {
            return Err(bad_t("not a permutation"));
        }
        seen[x] = true;
    }
    Ok(())
}

fn apply_lift(
    p: &PreparedPair,
    mbar: usize,
    lift: &LiftData,
    translated_y: bool,
    next: &mut PreparedPair,
    sigma_y: &mut [Image],
    sigma_x: &mut [Image],
) -> Result<()> {
    let (n, m, s, r) = (p.n, p.m, p.s, p.r);
    let field = p.field;
    check_seq(&lift.xseq, r + 1)?;
    check_perm(&lift.xperm, r + 1)?;
    check_seq(&lift.ypost, s)?;
    if lift.alpha.is_zero() {
        return Err(bad_t("translation α must be nonzero"));
    }
    let mx = permuted_matrix(&lift.xseq, &lift.xperm);
    if lift.a != block(&mx, r) || lift.avec != mx[r][..r].to_vec() {
        return Err(bad_t("x-side matrices do not match the blow-up sequence"));
    }
    let post = lift.ypost.recompute();
    let (yb, ybvec) = match (&lift.ypre, translated_y) {
        (Some((seq, perm)), true) => {
            check_seq(seq, s + 1)?;
            check_perm(perm, s + 1)?;
            let my = permuted_matrix(seq, perm);
            let yb = linalg::mat_mul_i(&block(&my, s), &post);
            let ybvec = linalg::vec_mat_i(&my[s][..s], &post);
            (yb, ybvec)
        }
        (None, false) => (post, Vec::new()),
        _ => return Err(bad_t("y-side translation present exactly for type 4")),
    };
    if lift.yb != yb || lift.ybvec != ybvec {
        return Err(bad_t("y-side matrices do not match the blow-up sequences"));
    }
    let c1 = new_c(&p.c, Some(&lift.a), &yb)?;
    let w = weights_after(&p.weights, &yb)?;
    let target = linalg::vec_mat_i(&lift.avec, &c1);
    if translated_y && target != ybvec {
        return Err(bad_t("y(1)^b ≠ x(1)^a for the translated pair"));
    }
    for (i, row) in yb.iter().enumerate() {
        sigma_y[i] = Image::monomial_i(&pad(row, n), field);
    }
    if translated_y {
        let v = s + mbar - 1;
        sigma_y[v] = Image::Gmt {
            coeff: Cyclo::one(field),
            mono: linalg::to_qvec(&pad(&ybvec, n)),
            factors: vec![(v, lift.alpha.clone(), Q::one())],
        };
    }
    for (i, row) in lift.a.iter().enumerate() {
        sigma_x[i] = Image::monomial_i(&pad(row, m), field);
    }
    let xv = r + mbar - 1;
    sigma_x[xv] = Image::Gmt {
        coeff: Cyclo::one(field),
        mono: linalg::to_qvec(&pad(&lift.avec, m)),
        factors: vec![(xv, lift.alpha.clone(), Q::one())],
    };
    next.c = c1;
    next.weights[..s].clone_from_slice(&w);
    if !translated_y {
        let k = mbar - p.l - 1;
        let z = substitute_all(&p.xseries[k..=k], sigma_y, n, &p.trunc)?.remove(0);
        let mono = linalg::to_qvec(&pad(&target, n));
        let u = z.div_monomial(&mono).map_err(|e| match e {
            Error::NotRepresentable(_) => bad_t("x_{r+m̄} is not divisible by x(1)^a"),
            other => other,
        })?;
        if u.constant_term() != lift.alpha.lift(u.modulus().lcm(&lift.alpha.modulus())) {
            return Err(bad_t("residue of x_{r+m̄}/x(1)^a differs from α"));
        }
        next.xseries[k] = u.sub(&Series::constant(n, lift.alpha.clone(), u.trunc().clone()));
    }
    Ok(())
}

fn rename_image(img: &Image, map: &[usize], nvars: usize) -> Image {
    match img {
        Image::Gmt { coeff, mono, factors } => {
            let mut e = vec![Q::zero(); nvars];
            for (k, x) in mono.iter().enumerate() {
                e[map[k]] = x.clone();
            }
            let factors = factors.iter().map(|(k, a, q)| (map[*k], a.clone(), q.clone())).collect();
            Image::Gmt { coeff: coeff.clone(), mono: e, factors }
        }
        Image::Series(g) => Image::Series(g.embed(nvars, map)),
    }
}

/// A series equal to `y^d` with `d` supported on `y_1..y_s`.
fn as_independent_monomial(g: &Series, s: usize) -> Option<Vec<i64>> {
    let t = g.terms();
    if t.len() != 1 || !t[0].1.is_one() {
        return None;
    }
    let e = int_exps(&t[0].0);
    if e[s..].iter().any(|&x| x != 0) {
        return None;
    }
    Some(e[..s].to_vec())
}

/// A series equal to a single variable.
fn as_variable(g: &Series) -> Option<usize> {
    let t = g.terms();
    if t.len() != 1 || !t[0].1.is_one() {
        return None;
    }
    let e = int_exps(&t[0].0);
    let pos: Vec<usize> = (0..e.len()).filter(|&i| e[i] != 0).collect();
    (pos.len() == 1 && e[pos[0]] == 1).then(|| pos[0])
}

/// Moves series that have become monomial or a free coordinate into the
/// prepared part, raising `r` or `l`.
fn promote(raw: &mut Raw) {
    loop {
        let p = &raw.next;
        let (n, m, s, r, l) = (p.n, p.m, p.s, p.r, p.l);
        let mut action = None;
        for (k, g) in p.xseries.iter().enumerate() {
            if let Some(d) = as_independent_monomial(g, s) {
                if !is_algebraic_exponent(&d, &p.c) {
                    action = Some((k, Some(d), None));
                    break;
                }
            }
            if let Some(j) = as_variable(g) {
                if j >= s + l {
                    action = Some((k, None, Some(j)));
                    break;
                }
            }
        }
        let Some((k, mono, var)) = action else {
            return;
        };
        let old = r + l + k;
        let dest = if mono.is_some() { r } else { r + l };
        // x reorder: old index moves to `dest`, everything in between shifts up
        let xmap: Vec<usize> = (0..m)
            .map(|i| {
                if i == old {
                    dest
                } else if i >= dest && i < old {
                    i + 1
                } else {
                    i
                }
            })
            .collect();
        for img in raw.sigma_x.iter_mut() {
            *img = rename_image(img, &xmap, m);
        }
        let next = &mut raw.next;
        next.xseries.remove(k);
        if let Some(d) = mono {
            next.c.push(d);
            next.r += 1;
        } else if let Some(j) = var {
            let t = s + l;
            if j != t {
                let mut ymap: Vec<usize> = (0..n).collect();
                ymap.swap(j, t);
                next.xseries = next.xseries.iter().map(|g| g.embed(n, &ymap)).collect();
                next.weights.swap(j, t);
                for img in raw.sigma_y.iter_mut() {
                    *img = rename_image(img, &ymap, n);
                }
            }
            next.l += 1;
        }
    }
}

fn field_of(p: &PreparedPair, extra: &[&Image]) -> u64 {
    let mut f = p.xseries.iter().fold(p.field, |acc, g| acc.lcm(&g.modulus()));
    for img in extra {
        f = f.lcm(&match img {
            Image::Gmt { coeff, factors, .. } => {
                factors.iter().fold(coeff.modulus(), |acc, (_, a, _)| acc.lcm(&a.modulus()))
            }
            Image::Series(g) => g.modulus(),
        });
    }
    f
}

/// Applies one transformation, restoring the prepared form and extending the log.
pub fn apply(p: &PreparedPair, payload: &Payload) -> Result<PreparedPair> {
    let mut raw = raw_apply(p, payload)?;
    promote(&mut raw);
    let imgs: Vec<&Image> = raw.sigma_y.iter().chain(raw.sigma_x.iter()).collect();
    raw.next.field = field_of(&raw.next, &imgs);
    validate(&raw.next).map_err(|e| bad_t(format!("result is not prepared: {e}")))?;
    let (s0, r0, l0) = p.kind();
    let (s1, r1, l1) = raw.next.kind();
    if s1 < s0 || r1 < r0 || r1 + l1 < r0 + l0 {
        return Err(bad_t("type decreased"));
    }
    let mut out = raw.next.clone();
    out.log = p.log.clone();
    out.log.push(Transformation {
        payload: payload.clone(),
        sigma_y: raw.sigma_y,
        sigma_x: raw.sigma_x,
        post: Box::new(raw.next),
        note: raw.note,
    });
    Ok(out)
}

/// Normal form of a translation blow-up.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalGmt {
    /// `perm[k]` is the raw factor that becomes the new variable `k`.
    pub perm: Vec<usize>,
    pub b: IMat,
    pub bvec: Vec<i64>,
    pub alpha: Cyclo,
    /// The exponents `λ_1..λ_s, λ` of the rescaling.
    pub lambda: Vec<Q>,
}

/// Brings `x_i = ∏ (x̄_j + α_j)^{raw_ij}` to the form
/// `x_i = ∏ x_j(1)^{b_ij}` (`i ≤ s`), `x_{s+1} = ∏ x_j(1)^{b_j}(x_{s+1}(1) + α)`.
///
/// `values` are the values of the old variables. A factor of positive value
/// cannot carry a translation, so its `α_j` is dropped; exactly one factor
/// must have value zero and carry the translation.
pub fn normalize_gmt(values: &[GroupValue], raw: &IMat, translations: &[Cyclo]) -> Result<NormalGmt> {
    let k = values.len();
    if k == 0 || raw.len() != k || translations.len() != k {
        return Err(bad_t("normal form needs a square matrix matching the values"));
    }
    let s = k - 1;
    if translations.iter().all(|a| a.is_zero()) {
        return Err(Error::NotApplicable("the transformation is monomial".into()));
    }
    let inv = linalg::inverse_q_of_i(raw).ok_or(Error::RankDeficient)?;
    let fv: Vec<GroupValue> = (0..k).map(|j| combine(values, &inv[j])).collect();
    let mut zero = Vec::new();
    for (j, v) in fv.iter().enumerate() {
        match v.sign() {
            0 => zero.push(j),
            1 => {}
            _ => return Err(Error::NotIndependent(format!("factor {} has negative value", j + 1))),
        }
    }
    if zero.len() != 1 {
        return Err(Error::NotDependent("exactly one factor must have value zero".into()));
    }
    let z = zero[0];
    if translations[z].is_zero() {
        return Err(Error::NotApplicable("the value-zero factor carries no translation".into()));
    }
    let mut perm: Vec<usize> = (0..k).filter(|&j| j != z).collect();
    perm.push(z);
    let mm: IMat = raw.iter().map(|row| perm.iter().map(|&j| row[j]).collect()).collect();
    let b = block(&mm, s);
    let col: Vec<Q> = (0..s).map(|i| Q::from_integer(mm[i][s].into())).collect();
    let lam = linalg::solve(&linalg::to_qmat(&b), &col).ok_or(Error::RankDeficient)?;
    let bvec = mm[s][..s].to_vec();
    let last = Q::from_integer(mm[s][s].into())
        - bvec.iter().zip(&lam).map(|(&x, l)| l * Q::from_integer(x.into())).sum::<Q>();
    let alpha = translations[z].pow_q(&last)?;
    let mut lambda = lam;
    lambda.push(last);
    Ok(NormalGmt { perm, b, bvec, alpha, lambda })
}

/// Blow-ups of `y_1..y_s` after which every row of `rows` (exponents of a
/// Laurent monomial in `y_1..y_s` of positive value) becomes nonnegative.
pub fn principalize_rows(rows: &[Vec<i64>], values: &[GroupValue]) -> Result<TransformSeq> {
    let s = values.len();
    let mut cur = TransformSeq::new(s);
    let mut vals = values.to_vec();
    for row in rows {
        let e = linalg::vec_mat_i(row, &cur.matrix);
        if linalg::is_nonneg(&e) {
            continue;
        }
        let pos: Vec<i64> = e.iter().map(|&x| x.max(0)).collect();
        let neg: Vec<i64> = e.iter().map(|&x| (-x).max(0)).collect();
        let pr = toric::principalize(&[pos, neg], &vals)?;
        let after = linalg::vec_mat_i(&e, &pr.seq.matrix);
        if !linalg::is_nonneg(&after) {
            return Err(Error::NotRepresentable("a new x-monomial has nonpositive value".into()));
        }
        cur.extend(&pr.seq);
        vals = pr.values;
    }
    Ok(cur)
}

/// The `x`-side transformation to lift.
#[derive(Debug, Clone, PartialEq)]
pub enum Gmt {
    /// Blow-ups of `x_1..x_r` (type 2).
    Monomial { xseq: TransformSeq },
    /// Translation blow-up of `x_1..x_r, x_{r+m̄}` with `m̄ ≤ l` (type 4).
    Translated { mbar: usize },
    /// Translation blow-up of `x_1..x_r, x_{r+m̄}` with `m̄ > l` and
    /// `x_{r+m̄} = y^a·u` (type 9).
    Dependent { mbar: usize },
}

/// Companion `y`-side transformation of an `x`-side one.
///
/// For the translated kinds the `x`-side blow-ups are the Perron reduction
/// of the values of `x_1..x_r, x_{r+m̄}`.
pub fn lift_gmt(p: &PreparedPair, gmt: &Gmt) -> Result<Payload> {
    let (s, r) = (p.s, p.r);
    let w = &p.weights;
    match gmt {
        Gmt::Monomial { xseq } => {
            check_seq(xseq, r)?;
            let a = xseq.recompute();
            let ainv = linalg::inverse_i(&a).ok_or_else(|| bad_t("x-side matrix is not unimodular"))?;
            let e = linalg::mat_mul_i(&ainv, &p.c);
            let yseq = principalize_rows(&e, &w[..s])?;
            Ok(Payload::Type2 { xseq: xseq.clone(), yseq })
        }
        Gmt::Translated { mbar } => {
            if *mbar == 0 || *mbar > p.l {
                return Err(bad_t("translated lift needs 1 ≤ m̄ ≤ l"));
            }
            let v = s + mbar - 1;
            let mut yvals = w[..s].to_vec();
            yvals.push(w[v].clone());
            let yp = toric::perron(&yvals, &[])?;
            let bbar = block(&yp.matrix, s);
            let bv = yp.matrix[s][..s].to_vec();
            let what = weights_after(w, &bbar)?;
            let c_hat = linalg::mat_mul_i(&p.c, &bbar);
            let (xp, e) = x_side(p, &w[v], &c_hat, &bv)?;
            let ypost = principalize_rows(&e, &what)?;
            let post = ypost.recompute();
            let lift = LiftData {
                a: block(&xp.matrix, r),
                avec: xp.matrix[r][..r].to_vec(),
                xseq: xp.seq,
                xperm: xp.perm,
                alpha: Cyclo::one(p.field),
                yb: linalg::mat_mul_i(&bbar, &post),
                ybvec: linalg::vec_mat_i(&bv, &post),
                ypre: Some((yp.seq, yp.perm)),
                ypost,
            };
            Ok(Payload::Type4 { mbar: *mbar, lift })
        }
        Gmt::Dependent { mbar } => {
            let z = p.extra(*mbar)?;
            let (a, u) = split_monomial_unit(z, s)?;
            let vz = combine_i(&w[..s], &a);
            let (xp, e) = x_side(p, &vz, &p.c, &a)?;
            let ypost = principalize_rows(&e, &w[..s])?;
            let lift = LiftData {
                a: block(&xp.matrix, r),
                avec: xp.matrix[r][..r].to_vec(),
                xseq: xp.seq,
                xperm: xp.perm,
                alpha: u.constant_term(),
                yb: ypost.recompute(),
                ybvec: Vec::new(),
                ypre: None,
                ypost,
            };
            Ok(Payload::Type9 { mbar: *mbar, lift })
        }
    }
}

/// Writes `z = y^a·u` with `a` on `y_1..y_s` and `u` a unit.
pub fn split_monomial_unit(z: &Series, s: usize) -> Result<(Vec<i64>, Series)> {
    if z.is_zero() {
        return Err(Error::TruncationExhausted("series vanishes to the available precision".into()));
    }
    let g = z.monomial_gcd();
    if !g.iter().all(|x| x.is_integer()) || g[s..].iter().any(|x| !x.is_zero()) {
        return Err(Error::NotRepresentable("series is not a monomial in y_1..y_s times a unit".into()));
    }
    let u = z.div_monomial(&g)?;
    if !u.is_unit() {
        return Err(Error::NotRepresentable("series is not a monomial in y_1..y_s times a unit".into()));
    }
    Ok((int_exps(&g[..s]), u))
}

/// Perron reduction of `x_1..x_r, z` where `ν(z) = vz` and `z = y^a·unit` in
/// coordinates where `x_i = y^{c_i}`. Returns the reduction and the exponents
/// of the new `x(1)_j = y^{e_j}` once the unit factors are absorbed.
fn x_side(p: &PreparedPair, vz: &GroupValue, c: &IMat, a: &[i64]) -> Result<(toric::PerronResult, IMat)> {
    let r = p.r;
    let mut vals = toric::x_values(&p.c, &p.weights[..p.s]);
    vals.push(vz.clone());
    let xp = toric::perron(&vals, &[])?;
    let inv = linalg::inverse_i(&xp.matrix).ok_or_else(|| bad_t("Perron matrix is not unimodular"))?;
    let s_len = a.len();
    let mut e: IMat = Vec::new();
    for row in inv.iter().take(r + 1) {
        let mut ej = vec![0i64; s_len];
        for (i, ci) in c.iter().enumerate() {
            for k in 0..s_len {
                ej[k] += row[i] * ci[k];
            }
        }
        for k in 0..s_len {
            ej[k] += row[r] * a[k];
        }
        e.push(ej);
    }
    if e[r].iter().any(|&x| x != 0) {
        return Err(Error::NotDependent("the value-zero variable is not a unit".into()));
    }
    e.truncate(r);
    Ok((xp, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qi};
    use crate::valgroup::GroupValue;

    fn sqrt2(k: i64) -> GroupValue {
        GroupValue::simple(1, qi(k))
    }

    fn sqrt3(k: i64) -> GroupValue {
        GroupValue::simple(2, qi(k))
    }

    fn poly(n: usize, terms: &[(&[i64], i64)], trunc: i64) -> Series {
        let mut g = Series::zero(n, qi(trunc), BASE_MODULUS);
        for (e, c) in terms {
            g = g.add(&Series::monomial(n, e, Cyclo::from_i64(BASE_MODULUS, *c), qi(trunc)));
        }
        g
    }

    fn germ1() -> PreparedPair {
        let z = poly(2, &[(&[3, 0], 1), (&[3, 1], 1)], 16);
        PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt2(5)], vec![z], qi(16)).unwrap()
    }

    #[test]
    fn validate_minimal_pair() {
        let p = PreparedPair::new(1, 1, 1, vec![vec![1]], vec![sqrt2(1), sqrt2(3)], vec![], qi(8)).unwrap();
        assert_eq!(validate(&p).unwrap(), (1, 1, 1));
    }

    #[test]
    fn validate_rank_clause() {
        let e = PreparedPair::new(1, 2, 0, vec![vec![1], vec![1]], vec![sqrt2(1)], vec![], qi(8)).unwrap_err();
        assert!(matches!(e, Error::InvalidPreparedForm(ref m) if m.contains("rank")), "{e}");
    }

    #[test]
    fn validate_dependence_clause() {
        let e = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt3(1)], vec![], qi(8)).unwrap_err();
        assert!(matches!(e, Error::InvalidPreparedForm(ref m) if m.contains("independent")), "{e}");
    }

    #[test]
    fn decompose_by_class() {
        let g = poly(2, &[(&[2, 3], 1), (&[4, 6], 1), (&[1, 1], 1)], 20);
        let p = PreparedPair::new(2, 1, 0, vec![vec![2, 3]], vec![sqrt2(1), sqrt3(1)], vec![], qi(20)).unwrap();
        let d = decompose(&g, &p);
        assert_eq!(d.classes.len(), 2);
        assert_eq!(d.zero_class(&g), poly(2, &[(&[2, 3], 1), (&[4, 6], 1)], 20));
        assert_eq!(d.sum(&g), g);
        assert!(is_algebraic(&poly(2, &[(&[2, 3], 1)], 20), &p));
        assert!(!is_algebraic(&poly(2, &[(&[1, 1], 1)], 20), &p));
        assert!(is_algebraic(&poly(2, &[(&[0, 0], 5)], 20), &p));
        assert!(decompose(&Series::zero(2, qi(5), 4), &p).classes.is_empty());
    }

    #[test]
    fn type10_subtracts_phi() {
        let p = germ1();
        let phi = Series::monomial(2, &[3, 0], Cyclo::one(4), qi(16));
        let p1 = apply(&p, &Payload::Type10 { mbar: 1, phi }).unwrap();
        assert_eq!(p1.xseries[0], poly(2, &[(&[3, 1], 1)], 16));
        assert_eq!(p1.log.len(), 1);
        assert_eq!(p1.kind(), (1, 1, 0));
    }

    #[test]
    fn type1_identity_keeps_pair() {
        let p = germ1();
        let p1 = apply(&p, &Payload::Type1 { seq: TransformSeq::new(1) }).unwrap();
        assert_eq!(p1.snapshot(), p.snapshot());
        assert_eq!(p1.log.len(), 1);
    }

    #[test]
    fn type7_relabels() {
        let z = poly(3, &[(&[1, 1, 0], 1), (&[0, 0, 2], 1)], 10);
        let p = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt2(2), sqrt2(3)], vec![z], qi(10))
            .unwrap();
        let p1 = apply(&p, &Payload::Type7 { i: 1, mbar: 2 }).unwrap();
        assert_eq!(p1.xseries[0], poly(3, &[(&[1, 0, 1], 1), (&[0, 2, 0], 1)], 10));
        assert_eq!(p1.weights[1], sqrt2(3));
    }

    #[test]
    fn type5_renames_and_promotes() {
        // x_2 = y_2 + y_1 y_2: the new coordinate y_2(1) = x_2 raises l
        let z = poly(2, &[(&[0, 1], 1), (&[1, 1], 1)], 10);
        let p = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt2(2)], vec![z.clone()], qi(10))
            .unwrap();
        let p1 = apply(&p, &Payload::Type5 { mbar: 1, f: z }).unwrap();
        assert_eq!(p1.kind(), (1, 1, 1));
        assert!(p1.log[0].note.is_some());
        assert_eq!(p1.weights[1], sqrt2(2));
    }

    #[test]
    fn type8_absorbs_unit() {
        // x_1 = y_1 y_2 and x_2 = y_1(1 + y_2); c = (−1, 1) keeps x_1 monomial
        // and c·d = −1 absorbs the unit into y_1
        let z = poly(3, &[(&[1, 0, 0], 1), (&[1, 1, 0], 1)], 8);
        let w = vec![sqrt2(1), sqrt3(1), sqrt2(2)];
        let p = PreparedPair::new(2, 1, 0, vec![vec![1, 1]], w, vec![z], qi(8)).unwrap();
        let gamma = poly(3, &[(&[0, 0, 0], 1), (&[0, 1, 0], 1)], 8);
        let p1 = apply(&p, &Payload::Type8 { gamma, c: vec![qi(-1), qi(1)] }).unwrap();
        assert_eq!(p1.kind(), (2, 2, 0));
        assert_eq!(p1.c[1], vec![1, 0]);
    }

    #[test]
    fn type8_rejects_moving_x() {
        let p = germ1();
        let gamma = poly(2, &[(&[0, 0], 1), (&[0, 1], 1)], 8);
        assert!(apply(&p, &Payload::Type8 { gamma, c: vec![qi(1)] }).is_err());
    }

    #[test]
    fn normal_form_unchanged() {
        let vals = vec![sqrt2(1), sqrt2(3)];
        let raw = vec![vec![1, 0], vec![3, 1]];
        let t = vec![Cyclo::zero(4), Cyclo::from_i64(4, 2)];
        let nf = normalize_gmt(&vals, &raw, &t).unwrap();
        assert_eq!(nf.b, vec![vec![1]]);
        assert_eq!(nf.bvec, vec![3]);
        assert_eq!(nf.alpha, Cyclo::from_i64(4, 2));
        assert_eq!(nf.perm, vec![0, 1]);
    }

    #[test]
    fn normal_form_reindexes() {
        // the zero-value factor sits first and a positive factor claims a translation
        let vals = vec![sqrt2(3), sqrt2(1)];
        let raw = vec![vec![1, 3], vec![0, 1]];
        let t = vec![Cyclo::from_i64(4, 1), Cyclo::from_i64(4, 5)];
        let nf = normalize_gmt(&vals, &raw, &t).unwrap();
        assert_eq!(nf.perm, vec![1, 0]);
        assert_eq!(nf.b, vec![vec![3]]);
        assert_eq!(nf.bvec, vec![1]);
        assert_eq!(nf.alpha, Cyclo::one(4));
        assert!(matches!(
            normalize_gmt(&vals, &raw, &[Cyclo::zero(4), Cyclo::zero(4)]),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn normal_form_rescales() {
        // x_1 = x̄_1 (x̄_2+α), x_2 = x̄_2+α: λ_1 = 1, λ = 1 − 0 = 1
        let vals = vec![sqrt2(2), sqrt2(2)];
        let raw = vec![vec![1, 1], vec![1, 2]];
        let t = vec![Cyclo::zero(4), Cyclo::from_i64(4, 4)];
        let nf = normalize_gmt(&vals, &raw, &t).unwrap();
        // λ_1 solves 1·λ_1 = 1, λ = 2 − 1 = 1
        assert_eq!(nf.lambda, vec![qi(1), qi(1)]);
        assert_eq!(nf.alpha, Cyclo::from_i64(4, 4));
        let t2 = vec![Cyclo::zero(4), Cyclo::from_i64(4, 2)];
        let raw2 = vec![vec![2, 1], vec![2, 2]];
        let vals2 = vec![sqrt2(4), sqrt2(4)];
        let nf2 = normalize_gmt(&vals2, &raw2, &t2).unwrap();
        assert_eq!(nf2.lambda, vec![q(1, 2), qi(1)]);
    }

    #[test]
    fn monomial_lift_identity() {
        let p = PreparedPair::new(2, 1, 0, vec![vec![2, 3]], vec![sqrt2(1), sqrt3(1)], vec![], qi(8)).unwrap();
        let t = lift_gmt(&p, &Gmt::Monomial { xseq: TransformSeq::new(1) }).unwrap();
        let p1 = apply(&p, &t).unwrap();
        assert_eq!(p1.c, p.c);
    }

    #[test]
    fn dependent_lift_matches_exponents() {
        // x_1 = y_1^2, x_2 = y_1^3 (1 + y_2) with values 2√2 and 3√2
        let z = poly(2, &[(&[3, 0], 1), (&[3, 1], 1)], 16);
        let p = PreparedPair::new(1, 1, 0, vec![vec![2]], vec![sqrt2(1), sqrt2(1)], vec![z], qi(16)).unwrap();
        let t = lift_gmt(&p, &Gmt::Dependent { mbar: 1 }).unwrap();
        let Payload::Type9 { lift, .. } = &t else { panic!() };
        let p1 = apply(&p, &t).unwrap();
        let lhs = linalg::mat_mul_i(&lift.a, &p1.c);
        let rhs = linalg::mat_mul_i(&p.c, &lift.yb);
        assert_eq!(lhs, rhs);
        // the new series is exactly y_2, so l increases
        assert_eq!(p1.kind(), (1, 1, 1));
    }

    #[test]
    fn translated_lift_matches_monomials() {
        let p = PreparedPair::new(1, 1, 1, vec![vec![1]], vec![sqrt2(1), sqrt2(3)], vec![], qi(8)).unwrap();
        let t = lift_gmt(&p, &Gmt::Translated { mbar: 1 }).unwrap();
        let Payload::Type4 { lift, .. } = &t else { panic!() };
        let p1 = apply(&p, &t).unwrap();
        assert_eq!(lift.ybvec, linalg::vec_mat_i(&lift.avec, &p1.c));
        assert_eq!(p1.kind(), (1, 1, 1));
    }
}
