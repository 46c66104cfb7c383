//! The monomialization engine.
//!
//! [`step`] follows the proof that the type `(s, r, l)` can always be raised:
//! first bring `x_{r+l+1}` to the shape `P + y^d` or `P + y^d·y_{s+l+1}`
//! with `P` algebraic, then remove `P` through the Tschirnhaus shift of the
//! product of its conjugates under roots of unity, and finish with a translation blow-up. The
//! engine trusts truncated data: a series that looks like a unit below the
//! truncation degree is treated as one.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::linalg::{self, IMat, Q};
use crate::prepared::{
    apply, decompose, is_algebraic, is_algebraic_exponent, lift_gmt, normalize_gmt, split_monomial_unit, validate, Gmt,
    Payload, PreparedPair, Transformation,
};
use crate::series::{substitute, Series, Substitution};
use crate::toric::{self, TransformSeq};

/// Default budget of the inner descent of [`step`].
pub const DESCENT_BUDGET: usize = 64;

/// Largest number of conjugates the engine multiplies out.
pub const MAX_TWISTS: i64 = 64;

/// Where a series lives for [`monomialize_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// A series in `x_1..x_r` (as a series in the `m` x-variables).
    X,
    /// A series in `y_1..y_t` (1-based `t`).
    Y(usize),
}

/// Shape of the non-algebraic part after [`split_algebraic`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    Zero,
    /// `y^d` with `d` on `y_1..y_s`, not algebraic over `x_1..x_r`.
    Monomial(Vec<i64>),
    /// `y^d·y_{s+l+1}`.
    MonomialVar(Vec<i64>),
}

/// Either the requested result or a pair whose type went up on the way.
#[derive(Debug, Clone)]
pub enum Outcome<T> {
    Done(T),
    Raised(PreparedPair),
}

#[derive(Debug, Clone)]
pub struct Monomialized {
    pub pair: PreparedPair,
    /// Exponents on `x_1..x_r` or `y_1..y_s`.
    pub d: Vec<i64>,
    pub u: Series,
    /// The transformed series, equal to the monomial times `u`.
    pub g: Series,
}

#[derive(Debug, Clone)]
pub struct Split {
    pub pair: PreparedPair,
    /// Algebraic part.
    pub alg: Series,
    pub tail: Tail,
    /// The transformed series, equal to `alg` plus the tail.
    pub g: Series,
}

/// A pair together with series carried along through every transformation.
struct Tracker {
    p: PreparedPair,
    ys: Vec<Series>,
    xs: Vec<Series>,
}

impl Tracker {
    fn new(p: &PreparedPair) -> Self {
        Tracker { p: p.clone(), ys: Vec::new(), xs: Vec::new() }
    }

    /// Applies a transformation; returns whether the type went up.
    fn apply(&mut self, payload: &Payload) -> Result<bool> {
        let q = apply(&self.p, payload)?;
        let rec = q.log.last().expect("apply appends a record");
        let trunc = self.p.trunc.clone();
        for g in self.ys.iter_mut() {
            *g = carry_y(g, rec, &trunc)?;
        }
        for g in self.xs.iter_mut() {
            *g = carry_x(g, rec, &trunc)?;
        }
        let raised = q.kind() != self.p.kind();
        self.p = q;
        Ok(raised)
    }

    fn z(&self) -> Series {
        self.p.xseries[0].clone()
    }
}

/// A series in the old `y` rewritten in the new `y` of `rec`.
pub fn carry_y(g: &Series, rec: &Transformation, trunc: &Q) -> Result<Series> {
    let sigma = Substitution { nvars: g.nvars(), images: rec.sigma_y.clone() };
    substitute(g, &sigma, Some(trunc.clone()))
}

/// A series in the old `x` rewritten in the new `x` of `rec`.
pub fn carry_x(g: &Series, rec: &Transformation, trunc: &Q) -> Result<Series> {
    let sigma = Substitution { nvars: g.nvars(), images: rec.sigma_x.clone() };
    substitute(g, &sigma, Some(trunc.clone()))
}

fn int_vec(e: &[Q]) -> Vec<i64> {
    e.iter().map(|x| linalg::q_to_i64(x).expect("integral exponent")).collect()
}

fn le(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn distinct_prefixes(g: &Series, k: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = g.terms().iter().map(|(e, _)| int_vec(&e[..k])).collect();
    out.sort();
    out.dedup();
    out
}

fn padq(e: &[i64], n: usize) -> Vec<Q> {
    let mut v = linalg::to_qvec(e);
    v.resize(n, Q::zero());
    v
}

/// Exponents `c` with `c·C_i = 0` for every row and `c·d = −1`.
pub fn type8_exponents(c: &IMat, d: &[i64]) -> Result<Vec<Q>> {
    let mut rows = linalg::to_qmat(c);
    rows.push(linalg::to_qvec(d));
    let mut rhs = vec![Q::zero(); c.len()];
    rhs.push(-Q::one());
    linalg::solve(&rows, &rhs).ok_or_else(|| {
        Error::InvalidPreparedForm("no type-8 exponents: the monomial is algebraic over x_1..x_r".into())
    })
}

fn mono_x(tr: &mut Tracker, idx: usize) -> Result<Outcome<(Vec<i64>, Series)>> {
    let (r, m) = (tr.p.r, tr.p.m);
    let g = tr.xs[idx].clone();
    if g.is_zero() {
        return Err(Error::TruncationExhausted("series vanishes to the available precision".into()));
    }
    if (r..m).any(|v| g.depends_on(v)) {
        return Err(Error::Unsupported("x-scope monomialization beyond x_1..x_r".into()));
    }
    let gens = distinct_prefixes(&g, r);
    let xv = toric::x_values(&tr.p.c, &tr.p.weights[..tr.p.s]);
    let pr = toric::principalize(&gens, &xv)?;
    if !pr.seq.is_empty() {
        let payload = lift_gmt(&tr.p, &Gmt::Monomial { xseq: pr.seq })?;
        if tr.apply(&payload)? {
            return Ok(Outcome::Raised(tr.p.clone()));
        }
    }
    let g = &tr.xs[idx];
    let gcd = g.monomial_gcd();
    let u = g.div_monomial(&gcd)?;
    if !u.is_unit() {
        return Err(Error::NotRepresentable("principalized series is not a monomial times a unit".into()));
    }
    Ok(Outcome::Done((int_vec(&gcd[..r]), u)))
}

fn mono_y(tr: &mut Tracker, idx: usize) -> Result<Outcome<(Vec<i64>, Series)>> {
    let s = tr.p.s;
    let g = tr.ys[idx].clone();
    if g.is_zero() {
        return Err(Error::TruncationExhausted("series vanishes to the available precision".into()));
    }
    if (tr.p.s + tr.p.l..tr.p.n).any(|v| g.depends_on(v)) {
        return Err(Error::Unsupported("y-scope monomialization of a series in y_{s+l+1}..y_n".into()));
    }
    let gens = distinct_prefixes(&g, s);
    let pr = toric::principalize(&gens, &tr.p.weights[..s])?;
    if !pr.seq.is_empty() && tr.apply(&Payload::Type1 { seq: pr.seq })? {
        return Ok(Outcome::Raised(tr.p.clone()));
    }
    let g = &tr.ys[idx];
    let a = int_vec(&g.monomial_gcd()[..s]);
    let u = g.div_monomial(&padq(&a, tr.p.n))?;
    if !u.is_unit() {
        return Err(Error::Unsupported(
            "y-scope monomialization whose leading coefficient vanishes on y_{s+1}..y_{s+l}".into(),
        ));
    }
    Ok(Outcome::Done((a, u)))
}

/// Writes `g` as a monomial times a unit after transformations of type 1 (y
/// scope) or type 2 (x scope).
pub fn monomialize_series(p: &PreparedPair, g: &Series, scope: Scope) -> Result<Outcome<Monomialized>> {
    let mut tr = Tracker::new(p);
    let res = match scope {
        Scope::X => {
            if g.nvars() != p.m {
                return Err(Error::InvalidTransformation("x-scope series must live in the x variables".into()));
            }
            tr.xs.push(g.clone());
            mono_x(&mut tr, 0)?
        }
        Scope::Y(t) => {
            if g.nvars() != p.n || t < p.s + p.l || t > p.n || (t..p.n).any(|v| g.depends_on(v)) {
                return Err(Error::InvalidTransformation(format!("series is not in y_1..y_{t}")));
            }
            tr.ys.push(g.clone());
            match monomialize_along(&mut tr, 0, t)? {
                None => Outcome::Raised(tr.p.clone()),
                Some(d) => {
                    let u = tr.ys[0].div_monomial(&padq(&d, p.n))?;
                    Outcome::Done((d, u))
                }
            }
        }
    };
    Ok(match res {
        Outcome::Raised(q) => Outcome::Raised(q),
        Outcome::Done((d, u)) => {
            let g = if scope == Scope::X { tr.xs[0].clone() } else { tr.ys[0].clone() };
            Outcome::Done(Monomialized { pair: tr.p, d, u, g })
        }
    })
}

/// Splits the series `ys[idx]` in `y_1..y_{s+l}`: returns the algebraic
/// part and the exponent of the tail `y^d` (absorbing the unit by type 8).
fn split_base(tr: &mut Tracker, idx: usize) -> Result<Outcome<(usize, Option<Vec<i64>>)>> {
    let g = tr.ys[idx].clone();
    let alg = decompose(&g, &tr.p).zero_class(&g);
    let rest = g.sub(&alg);
    let ai = tr.ys.len();
    tr.ys.push(alg);
    if rest.is_zero() {
        return Ok(Outcome::Done((ai, None)));
    }
    let ri = tr.ys.len();
    tr.ys.push(rest);
    let (d, u) = match mono_y(tr, ri)? {
        Outcome::Raised(q) => return Ok(Outcome::Raised(q)),
        Outcome::Done(x) => x,
    };
    let c = type8_exponents(&tr.p.c, &d)?;
    if tr.apply(&Payload::Type8 { gamma: u, c })? {
        return Ok(Outcome::Raised(tr.p.clone()));
    }
    Ok(Outcome::Done((ai, Some(d))))
}

fn split_tracked(tr: &mut Tracker, gi: usize) -> Result<Outcome<(Series, Tail)>> {
    let (s, l, n) = (tr.p.s, tr.p.l, tr.p.n);
    let t = s + l;
    let beyond: Vec<usize> = (t..n).collect();
    let g = tr.ys[gi].clone();
    let z0 = g.restrict_zero(&beyond);
    if z0 == g {
        let (ai, d) = match split_base(tr, gi)? {
            Outcome::Raised(q) => return Ok(Outcome::Raised(q)),
            Outcome::Done(x) => x,
        };
        let tail = d.map_or(Tail::Zero, Tail::Monomial);
        return Ok(Outcome::Done((tr.ys[ai].clone(), tail)));
    }
    // the part involving y_{s+l+1}..y_n becomes y^a·y_k, then y_k moves to y_{s+l+1}
    let Some((a, k)) = isolate_tail(tr, gi, n)? else {
        return Ok(Outcome::Raised(tr.p.clone()));
    };
    if k != t && tr.apply(&Payload::Type7 { i: l + 1, mbar: k - s + 1 })? {
        return Ok(Outcome::Raised(tr.p.clone()));
    }
    let zi = tr.ys.len();
    let z0 = tr.ys[gi].restrict_zero(&beyond);
    tr.ys.push(z0);
    // now g = z0 + y^a·y_{s+l+1}; split z0
    let (ai, d) = match split_base(tr, zi)? {
        Outcome::Raised(q) => return Ok(Outcome::Raised(q)),
        Outcome::Done(x) => x,
    };
    let Some(_) = d else {
        return Ok(Outcome::Done((tr.ys[ai].clone(), Tail::MonomialVar(a))));
    };
    // g = P + y^b + y^a·y_{s+l+1}; principalize (y^a, y^b) and merge
    let (a0, b0) = tail_exponents(&tr.p, &tr.ys[gi], &tr.ys[ai])?;
    let pr = toric::principalize(&[a0, b0], &tr.p.weights[..s])?;
    if !pr.seq.is_empty() && tr.apply(&Payload::Type1 { seq: pr.seq })? {
        return Ok(Outcome::Raised(tr.p.clone()));
    }
    let (a, b) = (pr.images[0].clone(), pr.images[1].clone());
    let g = tr.ys[gi].clone();
    if g.sub(&g.restrict_zero(&beyond)).is_zero() {
        return Err(Error::TruncationExhausted(format!("the y_{} term vanishes below degree {}", t + 1, g.trunc())));
    }
    let alg = tr.ys[ai].clone();
    let var = Series::var(n, t, g.trunc().clone(), g.modulus());
    let ya = |e: &[i64]| padq(e, n);
    if le(&b, &a) {
        // g = P + y^b (1 + y^{a−b}·y_{s+l+1})
        let rest = g.sub(&alg).div_monomial(&ya(&b))?;
        let c = type8_exponents(&tr.p.c, &b)?;
        if tr.apply(&Payload::Type8 { gamma: rest, c })? {
            return Ok(Outcome::Raised(tr.p.clone()));
        }
        Ok(Outcome::Done((tr.ys[ai].clone(), Tail::Monomial(b))))
    } else {
        // g = P + y^a (y_{s+l+1} + y^{b−a})
        let f = g.sub(&alg).div_monomial(&ya(&a))?;
        debug_assert!(f.sub(&var).constant_term().is_zero());
        if tr.apply(&Payload::Type5 { mbar: l + 1, f })? {
            return Ok(Outcome::Raised(tr.p.clone()));
        }
        Ok(Outcome::Done((tr.ys[ai].clone(), Tail::MonomialVar(a))))
    }
}

/// Applies a transformation; `None` when the type went up.
fn act(tr: &mut Tracker, payload: Payload) -> Result<Option<()>> {
    Ok((!tr.apply(&payload)?).then_some(()))
}

macro_rules! up {
    ($e:expr) => {
        match $e? {
            Some(x) => x,
            None => return Ok(None),
        }
    };
}

fn var_range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

/// Type 6 along `y_{v+1}` (0-based `v`), which is dependent on `y_1..y_s`.
fn translation_payload(p: &PreparedPair, v: usize) -> Result<(Payload, IMat, Vec<i64>)> {
    let s = p.s;
    let mut yvals = p.weights[..s].to_vec();
    yvals.push(p.weights[v].clone());
    let pr = toric::perron(&yvals, &[])?;
    let mut trans = vec![Cyclo::zero(p.field); s];
    trans.push(Cyclo::one(p.field));
    let nf = normalize_gmt(&yvals, &pr.matrix, &trans)?;
    let (b, bvec) = (nf.b.clone(), nf.bvec.clone());
    let payload = Payload::Type6 { mbar: v - s + 1, seq: pr.seq, perm: pr.perm, b: nf.b, bvec: nf.bvec, alpha: nf.alpha };
    Ok((payload, b, bvec))
}

/// The coefficients of `ys[gi]` along `y_{v+1}`, each written as a monomial
/// times a unit one dimension down, then a type 1 making their monomials
/// a principal ideal. With `skip_zero` the constant coefficient is left alone.
fn monomialize_coefficients(tr: &mut Tracker, gi: usize, v: usize, skip_zero: bool) -> Result<Option<()>> {
    let g = tr.ys[gi].clone();
    let deg = linalg::floor_i64(&g.degree_in(v));
    let first = usize::from(skip_zero) as i64;
    let mut idx = Vec::new();
    for k in first..=deg {
        let c = g.coeff_of(v, k);
        if !c.is_zero() {
            idx.push(tr.ys.len());
            tr.ys.push(c);
        }
    }
    for i in idx {
        up!(monomialize_along(tr, i, v));
    }
    let g = tr.ys[gi].clone();
    let s = tr.p.s;
    let mut gens = Vec::new();
    for k in first..=linalg::floor_i64(&g.degree_in(v)) {
        let c = g.coeff_of(v, k);
        if !c.is_zero() {
            gens.push(int_vec(&c.monomial_gcd()[..s]));
        }
    }
    up!(principalize_y(tr, gens));
    Ok(Some(()))
}

/// Type 1 making the ideal of the monomials `gens` (on `y_1..y_s`) principal.
fn principalize_y(tr: &mut Tracker, mut gens: Vec<Vec<i64>>) -> Result<Option<()>> {
    gens.sort();
    gens.dedup();
    if gens.len() < 2 {
        return Ok(Some(()));
    }
    let pr = toric::principalize(&gens, &tr.p.weights[..tr.p.s])?;
    if pr.seq.is_empty() {
        return Ok(Some(()));
    }
    act(tr, Payload::Type1 { seq: pr.seq })
}

/// `g = y^m·ḡ` with `m` on `y_1..y_s`, and `ord ḡ(0, …, 0, y_{v+1})`.
fn order_on_axis(p: &PreparedPair, g: &Series, v: usize) -> Result<(Vec<i64>, Series, Option<i64>)> {
    let m = int_vec(&g.monomial_gcd()[..p.s]);
    let gbar = g.div_monomial(&padq(&m, p.n))?;
    let h = gbar.ord_in_var(v).map(|q| linalg::q_to_i64(&q).expect("integral exponent"));
    Ok((m, gbar, h))
}

/// Writes `ys[gi]`, a series in `y_1..y_t`, as `y^d·u` with `u` a unit, by
/// induction on `t` and on the order along `y_t`.
fn monomialize_along(tr: &mut Tracker, gi: usize, t: usize) -> Result<Option<Vec<i64>>> {
    if tr.ys[gi].is_zero() {
        return Err(Error::TruncationExhausted("series vanishes to the available precision".into()));
    }
    let base = tr.p.s + tr.p.l;
    let mut t = t;
    while t > base && !tr.ys[gi].depends_on(t - 1) {
        t -= 1;
    }
    if t <= base {
        return Ok(match mono_y(tr, gi)? {
            Outcome::Raised(_) => None,
            Outcome::Done((d, _)) => Some(d),
        });
    }
    let v = t - 1;
    let s = tr.p.s;
    for _ in 0..DESCENT_BUDGET {
        up!(monomialize_coefficients(tr, gi, v, false));
        let (m, gbar, h) = order_on_axis(&tr.p, &tr.ys[gi], v)?;
        let h = h.ok_or_else(|| {
            Error::TruncationExhausted(format!("the y_{t} axis term vanishes below degree {}", tr.p.trunc))
        })?;
        if h == 0 {
            return Ok(Some(m));
        }
        // remove the y_t^{h-1} term, then translate y_t
        let (phi, _) = gbar.tschirnhaus(v, h)?;
        if !phi.is_zero() {
            let y = Series::var(tr.p.n, v, gbar.trunc().clone(), gbar.modulus());
            up!(act(tr, Payload::Type5 { mbar: v - s + 1, f: y.sub(&phi) }));
        }
        let (payload, _, _) = translation_payload(&tr.p, v)?;
        up!(act(tr, payload));
    }
    Err(Error::IterationLimit(format!("order descent along y_{t} exceeded {DESCENT_BUDGET} rounds")))
}

/// For `ys[gi]` in `y_1..y_t` but not in `y_1..y_{s+l}`: transformations after
/// which it equals `P + y^a·y_k` with `P` in `y_1..y_{s+l}`. Returns `(a, k)`.
fn isolate_tail(tr: &mut Tracker, gi: usize, t: usize) -> Result<Option<(Vec<i64>, usize)>> {
    let (s, n) = (tr.p.s, tr.p.n);
    let base = s + tr.p.l;
    let beyond = var_range(base, n);
    let mut t = t;
    while t > base && !tr.ys[gi].depends_on(t - 1) {
        t -= 1;
    }
    if t <= base {
        return Err(Error::InvalidTransformation("series lies in y_1..y_{s+l}".into()));
    }
    let v = t - 1;
    for _ in 0..DESCENT_BUDGET {
        let g = tr.ys[gi].clone();
        let rest = g.sub(&g.restrict_zero(&beyond));
        if rest.is_zero() {
            return Err(Error::TruncationExhausted(format!("no term involves y_{}..y_{t} to the available precision", base + 1)));
        }
        let ri = tr.ys.len();
        tr.ys.push(rest.clone());
        // higher coefficients: monomial times unit; the constant one: induction on t
        let c0 = rest.coeff_of(v, 0);
        if !c0.is_zero() {
            let ci = tr.ys.len();
            tr.ys.push(c0);
            up!(isolate_tail(tr, ci, v));
        }
        if rest.depends_on(v) {
            up!(monomialize_coefficients(tr, ri, v, true));
        }
        let g = tr.ys[gi].clone();
        let rest = g.sub(&g.restrict_zero(&beyond));
        let c0 = rest.coeff_of(v, 0);
        let mut gens: Vec<Vec<i64>> = vec![];
        for k in 0..=linalg::floor_i64(&rest.degree_in(v)) {
            let c = rest.coeff_of(v, k);
            if !c.is_zero() {
                gens.push(int_vec(&c.monomial_gcd()[..s]));
            }
        }
        gens.sort();
        gens.dedup();
        let pr = toric::principalize(&gens, &tr.p.weights[..s])?;
        if !pr.seq.is_empty() {
            up!(act(tr, Payload::Type1 { seq: pr.seq }));
        }
        let g = tr.ys[gi].clone();
        let rest = g.sub(&g.restrict_zero(&beyond));
        let d = int_vec(&rest.monomial_gcd()[..s]);
        let f = rest.div_monomial(&padq(&d, n))?;
        // order one along the variable of the constant coefficient's tail
        if !c0.is_zero() {
            let k = (base..v).rev().find(|&k| c0.depends_on(k)).expect("tail variable");
            if f.ord_in_var(k) == Some(Q::one()) {
                up!(act(tr, Payload::Type7 { i: k - s + 1, mbar: v - s + 1 }));
                let g = tr.ys[gi].clone();
                let rest = g.sub(&g.restrict_zero(&beyond));
                let f = rest.div_monomial(&padq(&d, n))?;
                up!(rename(tr, v, f));
                return Ok(Some((d, v)));
            }
        }
        let h = f.ord_in_var(v).map(|q| linalg::q_to_i64(&q).expect("integral exponent"));
        let Some(h) = h else {
            return Err(Error::TruncationExhausted(format!("the y_{t} axis term vanishes below degree {}", tr.p.trunc)));
        };
        if h == 1 {
            up!(rename(tr, v, f));
            return Ok(Some((d, v)));
        }
        let (phi, _) = f.tschirnhaus(v, h)?;
        if !phi.is_zero() {
            let y = Series::var(n, v, f.trunc().clone(), f.modulus());
            up!(act(tr, Payload::Type5 { mbar: v - s + 1, f: y.sub(&phi) }));
        }
        let (payload, _, _) = translation_payload(&tr.p, v)?;
        up!(act(tr, payload));
    }
    Err(Error::IterationLimit(format!("order descent along y_{t} exceeded {DESCENT_BUDGET} rounds")))
}

/// Type 5 making `f` the new `y_{v+1}`, skipped when it already is.
fn rename(tr: &mut Tracker, v: usize, f: Series) -> Result<Option<()>> {
    if f == Series::var(tr.p.n, v, f.trunc().clone(), f.modulus()) {
        return Ok(Some(()));
    }
    act(tr, Payload::Type5 { mbar: v - tr.p.s + 1, f })
}

/// For `g = P + y^b + y^a·y_{s+l+1}`: the exponents `a` and `b`.
fn tail_exponents(p: &PreparedPair, g: &Series, alg: &Series) -> Result<(Vec<i64>, Vec<i64>)> {
    let beyond: Vec<usize> = (p.s + p.l..p.n).collect();
    let z0 = g.restrict_zero(&beyond);
    let terms = z0.sub(alg).terms();
    if terms.is_empty() {
        return Err(Error::TruncationExhausted(format!("the non-algebraic part vanishes below degree {}", z0.trunc())));
    }
    if terms.len() != 1 || !terms[0].1.is_one() {
        return Err(Error::InvalidPreparedForm("non-algebraic part is not a single monomial".into()));
    }
    let a = int_vec(&g.sub(&z0).monomial_gcd()[..p.s]);
    Ok((a, int_vec(&terms[0].0[..p.s])))
}

/// Transformations after which `g = P + tail` with `P`
/// algebraic over `x_1..x_{r+l}`. `t` is the 1-based index of the last
/// variable `g` may involve.
pub fn split_algebraic(p: &PreparedPair, g: &Series, t: usize) -> Result<Outcome<Split>> {
    if g.nvars() != p.n || t > p.n || (t..p.n).any(|v| g.depends_on(v)) {
        return Err(Error::InvalidTransformation(format!("series is not in y_1..y_{t}")));
    }
    let mut tr = Tracker::new(p);
    tr.ys.push(g.clone());
    match split_tracked(&mut tr, 0)? {
        Outcome::Raised(q) => Ok(Outcome::Raised(q)),
        Outcome::Done((alg, tail)) => {
            let g = tr.ys[0].clone();
            Ok(Outcome::Done(Split { pair: tr.p, alg, tail, g }))
        }
    }
}

/// Recognizes `z = P + y^d` or `z = P + y^d·y_{s+l+1}` exactly, `P` algebraic.
pub fn read_form(p: &PreparedPair, z: &Series) -> Option<(Series, Tail)> {
    let (s, l, n) = (p.s, p.l, p.n);
    let t = s + l;
    let beyond: Vec<usize> = (t..n).collect();
    let z0 = z.restrict_zero(&beyond);
    let rest = z.sub(&z0);
    if rest.is_zero() {
        let alg = decompose(&z0, p).zero_class(&z0);
        let tail = z0.sub(&alg);
        if tail.is_zero() {
            return Some((alg, Tail::Zero));
        }
        let terms = tail.terms();
        if terms.len() != 1 || !terms[0].1.is_one() {
            return None;
        }
        return Some((alg, Tail::Monomial(int_vec(&terms[0].0[..s]))));
    }
    let terms = rest.terms();
    if terms.len() != 1 || !terms[0].1.is_one() || !is_algebraic(&z0, p) {
        return None;
    }
    let e = int_vec(&terms[0].0);
    if e[t] != 1 || (s..n).any(|k| k != t && e[k] != 0) {
        return None;
    }
    Some((z0, Tail::MonomialVar(e[..s].to_vec())))
}

/// Exponents `v` with `x^v = y^α` for the `y_1..y_s` part of a monomial.
fn x_exponent(c: &IMat, alpha: &[i64]) -> Result<Vec<Q>> {
    if c.is_empty() {
        if alpha.iter().any(|&x| x != 0) {
            return Err(Error::InvalidPreparedForm("monomial is not algebraic".into()));
        }
        return Ok(Vec::new());
    }
    linalg::solve_left(&linalg::to_qmat(c), &linalg::to_qvec(alpha))
        .ok_or_else(|| Error::InvalidPreparedForm("monomial is not algebraic".into()))
}

/// Type 2 transformations after which every monomial of the algebraic
/// series `ys[ai]` is `x^v` times identifications with `v >= 0`.
fn make_exponents_nonneg(tr: &mut Tracker, ai: usize) -> Result<Option<PreparedPair>> {
    for _ in 0..DESCENT_BUDGET {
        let s = tr.p.s;
        let mut bad = None;
        for (e, _) in tr.ys[ai].terms() {
            let v = x_exponent(&tr.p.c, &int_vec(&e[..s]))?;
            if v.iter().any(|x| x.is_negative()) {
                bad = Some(v);
                break;
            }
        }
        let Some(v) = bad else {
            return Ok(None);
        };
        let (xseq, _) = toric::make_nonneg(&v, &tr.p.c, &tr.p.weights[..s])?;
        let payload = lift_gmt(&tr.p, &Gmt::Monomial { xseq })?;
        if tr.apply(&payload)? {
            return Ok(Some(tr.p.clone()));
        }
    }
    Err(Error::IterationLimit("making x-exponents nonnegative".into()))
}

/// Φ for the Tschirnhaus shift of `g = ∏ (X − S_I)` over the root-of-unity conjugates
/// of the algebraic series `alg`, and the coefficients `τ_i` that survive.
/// All series are returned in the `m` x-variables.
pub fn conjugate_shift(p: &PreparedPair, alg: &Series) -> Result<(Series, Vec<Series>)> {
    let (s, r, l, m) = (p.s, p.r, p.l, p.m);
    let mut rows = Vec::new();
    for (e, c) in alg.terms() {
        let v = x_exponent(&p.c, &int_vec(&e[..s]))?;
        let gamma: Vec<Q> = e[s..s + l].to_vec();
        rows.push((v, gamma, c));
    }
    let integral = rows.iter().all(|(v, _, _)| v.iter().all(|x| x.is_integer()));
    let cmax = p.c.iter().map(|row| row.iter().sum::<i64>()).max().unwrap_or(1).max(1);
    let xtrunc = &p.trunc / Q::from_integer(cmax.into());
    let to_x = |v: &[Q], g: &[Q], nv: usize| {
        let mut e = v.to_vec();
        e.extend(g.iter().cloned());
        e.resize(nv, Q::zero());
        e
    };
    if integral {
        // every twist coincides: g = (X − P)^{d^r} and Φ = P
        let terms = rows.iter().map(|(v, g, c)| (to_x(v, g, m), c.clone())).collect();
        return Ok((Series::from_terms(m, xtrunc, p.field, terms), Vec::new()));
    }
    let d = toric::g_denominator(&p.c)?;
    let count = (0..r).try_fold(1i64, |acc, _| acc.checked_mul(d)).unwrap_or(i64::MAX);
    if count > MAX_TWISTS {
        return Err(Error::InstanceTooLarge(format!("{count} conjugates exceed {MAX_TWISTS}")));
    }
    let modulus = p.field.lcm(&(d as u64));
    let nv = r + l + 1;
    let xvar = r + l;
    let mut g = Series::constant(nv, Cyclo::one(modulus), xtrunc.clone());
    for idx in 0..count {
        let mut digits = Vec::with_capacity(r);
        let mut k = idx;
        for _ in 0..r {
            digits.push(k % d);
            k /= d;
        }
        let mut factor = Series::var(nv, xvar, xtrunc.clone(), modulus);
        for (v, gam, c) in &rows {
            let mut phase = 0i64;
            for (j, x) in v.iter().enumerate() {
                let dv = linalg::q_to_i64(&(x * Q::from_integer(d.into()))).expect("exponent in (1/d)Z");
                phase += digits[j] * dv;
            }
            let zeta = Cyclo::zeta_pow(modulus, phase.rem_euclid(d) * (modulus as i64 / d));
            let coeff = c.lift(modulus).mul(&zeta).neg();
            let term = Series::monomial_q(nv, &to_x(v, gam, nv), coeff, xtrunc.clone());
            factor = factor.add(&term);
        }
        g = g.mul(&factor);
    }
    let (phi, gbar) = g.tschirnhaus(xvar, count)?;
    if !phi.is_integral() {
        return Err(Error::InvalidOrder("Tschirnhaus shift has fractional exponents".into()));
    }
    let map: Vec<usize> = (0..nv).collect();
    let mut taus = Vec::new();
    for k in 0..count - 1 {
        let tau = gbar.coeff_of(xvar, k);
        if !tau.is_zero() {
            taus.push(tau.embed(m, &map));
        }
    }
    Ok((phi.embed(m, &map), taus))
}

/// Type 6 on `y_{s+l+1}` followed by type 8 (raises `r`) or type 9 (raises `l`),
/// for `z = y^d·y_{s+l+1}`.
fn close_with_translation(tr: &mut Tracker, d: &[i64]) -> Result<PreparedPair> {
    let (s, l) = (tr.p.s, tr.p.l);
    let t = s + l;
    if d.iter().all(|&x| x == 0) {
        // z is already the coordinate y_{s+l+1}; re-reading it raises l
        tr.apply(&Payload::Type1 { seq: TransformSeq::new(s) })?;
        return Ok(tr.p.clone());
    }
    let (payload, b, bvec) = translation_payload(&tr.p, t)?;
    let dnew: Vec<i64> = linalg::vec_mat_i(d, &b).iter().zip(&bvec).map(|(x, y)| x + y).collect();
    if tr.apply(&payload)? {
        return Ok(tr.p.clone());
    }
    if !is_algebraic_exponent(&dnew, &tr.p.c) {
        let n = tr.p.n;
        let gamma = Series::constant(n, Cyclo::one(tr.p.field), tr.p.trunc.clone())
            .add(&Series::var(n, t, tr.p.trunc.clone(), tr.p.field));
        let c = type8_exponents(&tr.p.c, &dnew)?;
        tr.apply(&Payload::Type8 { gamma, c })?;
    } else {
        let payload = lift_gmt(&tr.p, &Gmt::Dependent { mbar: tr.p.l + 1 })?;
        tr.apply(&payload)?;
    }
    Ok(tr.p.clone())
}

enum Finish {
    Raised(PreparedPair),
    Continue,
}

/// The case analysis that follows the removal of `P` by Φ.
fn finish(tr: &mut Tracker, start: (usize, usize, usize)) -> Result<Finish> {
    let z = tr.z();
    let Some((alg, tail)) = read_form(&tr.p, &z) else {
        return Ok(Finish::Continue);
    };
    let d = match &tail {
        Tail::Zero => return Err(algebraic_tail(&tr.p)),
        Tail::Monomial(d) | Tail::MonomialVar(d) => d.clone(),
    };
    let raised = |tr: &Tracker| Finish::Raised(tr.p.clone());
    if alg.is_zero() {
        return match tail {
            Tail::Monomial(_) => {
                tr.apply(&Payload::Type1 { seq: TransformSeq::new(tr.p.s) })?;
                Ok(raised(tr))
            }
            _ => {
                let q = close_with_translation(tr, &d)?;
                check_raised(&q, start)?;
                Ok(Finish::Raised(q))
            }
        };
    }
    // monomialize P, then compare its monomial with the tail's
    let ai = tr.ys.len();
    tr.ys.push(alg);
    match mono_y(tr, ai)? {
        Outcome::Raised(q) => return Ok(Finish::Raised(q)),
        Outcome::Done(_) => {}
    }
    let z = tr.z();
    let Some((alg, tail)) = read_form(&tr.p, &z) else {
        return Ok(Finish::Continue);
    };
    let (a, _) = split_monomial_unit(&alg, tr.p.s)?;
    let d = match &tail {
        Tail::Monomial(d) | Tail::MonomialVar(d) => d.clone(),
        Tail::Zero => unreachable!("tail survives type 1"),
    };
    let s = tr.p.s;
    let pr = toric::principalize(&[a.clone(), d.clone()], &tr.p.weights[..s])?;
    if !pr.seq.is_empty() && tr.apply(&Payload::Type1 { seq: pr.seq })? {
        return Ok(raised(tr));
    }
    let z = tr.z();
    let Some((alg, tail)) = read_form(&tr.p, &z) else {
        return Ok(Finish::Continue);
    };
    let (a, _) = split_monomial_unit(&alg, s)?;
    let n = tr.p.n;
    match tail {
        Tail::Monomial(d) if le(&d, &a) && d != a => {
            // z = y^d (1 + y^{a−d} u)
            let gamma = z.div_monomial(&padq(&d, n))?;
            let c = type8_exponents(&tr.p.c, &d)?;
            tr.apply(&Payload::Type8 { gamma, c })?;
            check_raised(&tr.p, start)?;
            Ok(raised(tr))
        }
        Tail::MonomialVar(d) if le(&d, &a) && d != a => {
            // z = y^d (y_{s+l+1} + y^{a−d} u)
            let f = z.div_monomial(&padq(&d, n))?;
            if tr.apply(&Payload::Type5 { mbar: tr.p.l + 1, f })? {
                return Ok(raised(tr));
            }
            let q = close_with_translation(tr, &d)?;
            check_raised(&q, start)?;
            Ok(Finish::Raised(q))
        }
        Tail::Monomial(d) | Tail::MonomialVar(d) if le(&a, &d) => {
            // z = y^a·unit with y^a algebraic: translation blow-up of x (type 9)
            let payload = lift_gmt(&tr.p, &Gmt::Dependent { mbar: tr.p.l + 1 })?;
            if tr.apply(&payload)? {
                return Ok(raised(tr));
            }
            Ok(Finish::Continue)
        }
        _ => Err(Error::InvalidPreparedForm("monomials incomparable after principalization".into())),
    }
}

/// `x_{r+l+1}` has no non-algebraic part. On the input pair this means the
/// morphism is not quasi-regular; after a transformation, which cannot change
/// that, it means the non-algebraic part fell below the precision.
fn algebraic_tail(p: &PreparedPair) -> Error {
    if p.log.is_empty() {
        Error::InvalidPreparedForm("x_{r+l+1} is algebraic over x_1..x_{r+l}: the morphism is not quasi-regular".into())
    } else {
        Error::TruncationExhausted(format!(
            "the non-algebraic part of x_{} vanishes below degree {}",
            p.r + p.l + 1,
            p.trunc
        ))
    }
}

fn check_raised(q: &PreparedPair, start: (usize, usize, usize)) -> Result<()> {
    let (s, r, l) = q.kind();
    if s > start.0 || r > start.1 || r + l > start.1 + start.2 {
        Ok(())
    } else if q.xseries.first().is_some_and(|z| z.is_zero()) {
        Err(Error::TruncationExhausted(format!("x_{} vanishes below degree {}", r + l + 1, q.trunc)))
    } else {
        Err(Error::InvalidPreparedForm("case analysis ended without raising the type".into()))
    }
}

/// Raises the type `(s, r, l)` of a pair with `r + l < m`.
pub fn step(p: &PreparedPair, budget: usize) -> Result<PreparedPair> {
    validate(p)?;
    if p.is_monomial() {
        return Err(Error::NotApplicable("r + l = m: the pair is already monomial".into()));
    }
    let start = p.kind();
    let mut tr = Tracker::new(p);
    for _ in 0..budget {
        if tr.p.kind() != start {
            return Ok(tr.p);
        }
        tr.ys.clear();
        tr.xs.clear();
        let z = tr.z();
        if z.is_zero() {
            return Err(Error::TruncationExhausted(format!(
                "x_{} vanishes below degree {}",
                tr.p.r + tr.p.l + 1,
                tr.p.trunc
            )));
        }
        // bring x_{r+l+1} to P + y^d or P + y^d·y_{s+l+1}
        tr.ys.push(z);
        let alg = match split_tracked(&mut tr, 0)? {
            Outcome::Raised(q) => return Ok(q),
            Outcome::Done((_, Tail::Zero)) => return Err(algebraic_tail(&tr.p)),
            Outcome::Done((alg, _)) => alg,
        };
        if !alg.is_zero() {
            let ai = tr.ys.len();
            tr.ys.push(alg);
            if let Some(q) = make_exponents_nonneg(&mut tr, ai)? {
                return Ok(q);
            }
            let (phi, taus) = conjugate_shift(&tr.p, &tr.ys[ai])?;
            tr.xs.extend(taus);
            if !phi.is_zero() && tr.apply(&Payload::Type10 { mbar: tr.p.l + 1, phi })? {
                return Ok(tr.p);
            }
            for k in 0..tr.xs.len() {
                if tr.p.l > 0 {
                    return Err(Error::Unsupported("coefficient monomialization with identifications (l > 0)".into()));
                }
                if let Outcome::Raised(q) = mono_x(&mut tr, k)? {
                    return Ok(q);
                }
            }
        }
        match finish(&mut tr, start)? {
            Finish::Raised(q) => return Ok(q),
            Finish::Continue => continue,
        }
    }
    Err(Error::IterationLimit(format!("the descent did not raise the type within {budget} rounds")))
}

/// The final monomial morphism and its certificate.
#[derive(Debug, Clone)]
pub struct MonomialForm {
    pub pair: PreparedPair,
}

impl MonomialForm {
    /// Exponent matrix of the monomial part (`r × s`).
    pub fn exponents(&self) -> &IMat {
        &self.pair.c
    }

    /// Pairs `(i, j)` (1-based) with `x_i = y_j`.
    pub fn identifications(&self) -> Vec<(usize, usize)> {
        let p = &self.pair;
        (1..=p.l).map(|i| (p.r + i, p.s + i)).collect()
    }

    pub fn certificate(&self) -> &[Transformation] {
        &self.pair.log
    }

    /// Rank of the full exponent matrix of `x` over `y`.
    pub fn rank(&self) -> usize {
        let p = &self.pair;
        let mut rows: IMat = p.c.iter().map(|row| {
            let mut e = row.clone();
            e.resize(p.n, 0);
            e
        }).collect();
        for i in 0..p.l {
            let mut e = vec![0; p.n];
            e[p.s + i] = 1;
            rows.push(e);
        }
        linalg::rank_i(&rows)
    }
}

/// Default bound on the number of steps: `(n+1)(m+1)²`.
pub fn default_max_steps(p: &PreparedPair) -> usize {
    (p.n + 1) * (p.m + 1) * (p.m + 1)
}

/// Bound on field enlargements attempted within one step.
pub const MAX_LIFTS: usize = 4;

/// One step, enlarging the cyclotomic field when a root of unity is missing.
fn step_lifting(p: &PreparedPair) -> Result<PreparedPair> {
    let mut cur = p.clone();
    for _ in 0..MAX_LIFTS {
        match step(&cur, DESCENT_BUDGET) {
            Err(Error::FieldExtensionRequired { modulus, .. }) if modulus > 0 && cur.field % modulus != 0 => {
                cur = cur.lift_field(modulus);
            }
            other => return other,
        }
    }
    step(&cur, DESCENT_BUDGET)
}

/// Raises the type until `r + l = m`.
pub fn run(p: &PreparedPair, max_steps: Option<usize>) -> Result<MonomialForm> {
    validate(p)?;
    let bound = max_steps.unwrap_or_else(|| default_max_steps(p));
    let mut cur = p.clone();
    for _ in 0..bound {
        if cur.is_monomial() {
            return Ok(MonomialForm { pair: cur });
        }
        cur = step_lifting(&cur)?;
    }
    if cur.is_monomial() {
        return Ok(MonomialForm { pair: cur });
    }
    Err(Error::IterationLimit(format!("not monomial after {bound} steps")))
}

/// Whether no nonzero polynomial of degree `≤ big_n` in the presented `x`
/// vanishes modulo degree `big_n·(largest order) + 1`.
pub fn check_injectivity(p: &PreparedPair, big_n: usize) -> bool {
    let ords: Vec<Q> = (0..p.m).map(|i| p.presentation(i).ord_or_trunc()).collect();
    let maxord = ords.iter().max().cloned().unwrap_or_else(Q::one);
    let want = Q::from_integer((big_n as i64).into()) * maxord + Q::one();
    // the monomial part is exact; only the series cap the precision
    let images: Vec<Series> = (0..p.m)
        .map(|i| if i < p.r + p.l { p.presentation(i).assume_exact_to(&want) } else { p.presentation(i) })
        .collect();
    let mut exps: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..p.m {
        let mut next = Vec::new();
        for e in &exps {
            let used: usize = e.iter().sum();
            for a in 0..=big_n - used {
                let mut e2 = e.clone();
                e2.push(a);
                next.push(e2);
            }
        }
        exps = next;
    }
    let n = p.n;
    let mut columns = Vec::new();
    for e in &exps {
        let mut acc = Series::constant(n, Cyclo::one(p.field), want.clone());
        for (i, &a) in e.iter().enumerate() {
            if a > 0 {
                acc = acc.mul(&images[i].pow_i(a as u32));
            }
        }
        columns.push(acc);
    }
    let k = columns.iter().map(|g| g.trunc().clone()).fold(want, |a, b| if b < a { b } else { a });
    let modulus = columns.iter().fold(p.field, |a, g| a.lcm(&g.modulus()));
    let columns: Vec<Series> = columns.iter().map(|g| g.truncate(&k).lift_field(modulus)).collect();
    let mut keys: Vec<Vec<Q>> = columns.iter().flat_map(|g| g.terms().into_iter().map(|(e, _)| e)).collect();
    keys.sort();
    keys.dedup();
    let width = columns.first().map_or(0, |g| g.constant_term().coords().len());
    let mut mat: Vec<Vec<Q>> = Vec::new();
    for key in &keys {
        for coord in 0..width {
            let row = columns
                .iter()
                .map(|g| {
                    g.terms()
                        .into_iter()
                        .find(|(e, _)| e == key)
                        .map_or_else(Q::zero, |(_, c)| c.coords()[coord].clone())
                })
                .collect();
            mat.push(row);
        }
    }
    linalg::rank(&mat) == exps.len()
}

/// A failed replay: the stage index (0-based log position) and the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub stage: usize,
    pub reason: String,
}

impl std::fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.reason)
    }
}

fn fail(stage: usize, reason: impl Into<String>) -> VerifyFailure {
    VerifyFailure { stage, reason: reason.into() }
}

/// `X_old(σ_y) = σ_x(X_new)` for every `x`, compared below the common precision.
fn stage_identity(pre: &PreparedPair, rec: &Transformation) -> std::result::Result<(), String> {
    let post = &rec.post;
    let sy = Substitution { nvars: pre.n, images: rec.sigma_y.clone() };
    let xnew = post.x_substitution();
    for i in 0..pre.m {
        let lhs = substitute(&pre.presentation(i), &sy, Some(pre.trunc.clone())).map_err(|e| e.to_string())?;
        let img = rec.sigma_x[i].to_series(pre.m, &pre.trunc, post.field).map_err(|e| e.to_string())?;
        let rhs = substitute(&img, &xnew, Some(pre.trunc.clone())).map_err(|e| e.to_string())?;
        let k = if lhs.trunc() < rhs.trunc() { lhs.trunc().clone() } else { rhs.trunc().clone() };
        if !lhs.eq_mod(&rhs, &k) {
            return Err(format!("x_{} is not preserved by the recorded substitutions", i + 1));
        }
    }
    Ok(())
}

/// Replays a certificate from `p0`, reporting the first failing stage.
pub fn verify_report(p0: &PreparedPair, cert: &[Transformation]) -> std::result::Result<(), VerifyFailure> {
    validate(p0).map_err(|e| fail(0, format!("initial pair: {e}")))?;
    let mut pre = p0.snapshot();
    // composite maps: original y in the current y, original x in the current x
    let n = p0.n;
    let m = p0.m;
    let mut acc_y: Vec<Series> = (0..n).map(|i| Series::var(n, i, p0.trunc.clone(), p0.field)).collect();
    let mut acc_x: Vec<Series> = (0..m).map(|i| Series::var(m, i, p0.trunc.clone(), p0.field)).collect();
    for (k, rec) in cert.iter().enumerate() {
        if rec.post.field != pre.field && rec.post.field % pre.field == 0 {
            pre = pre.lift_field(rec.post.field);
        }
        let replay = apply(&pre, &rec.payload).map_err(|e| fail(k, format!("replay failed: {e}")))?;
        let mine = replay.log.last().expect("apply appends a record");
        if mine.sigma_y != rec.sigma_y || mine.sigma_x != rec.sigma_x {
            return Err(fail(k, "recorded substitutions differ from the payload"));
        }
        if *mine.post != *rec.post {
            return Err(fail(k, "recorded state differs from the replay"));
        }
        validate(&rec.post).map_err(|e| fail(k, format!("post-state: {e}")))?;
        let (s0, r0, l0) = pre.kind();
        let (s1, r1, l1) = rec.post.kind();
        if s1 < s0 || r1 < r0 || r1 + l1 < r0 + l0 {
            return Err(fail(k, "type decreased"));
        }
        stage_identity(&pre, rec).map_err(|e| fail(k, e))?;
        let sy = Substitution { nvars: n, images: rec.sigma_y.clone() };
        let sx = Substitution { nvars: m, images: rec.sigma_x.clone() };
        for g in acc_y.iter_mut() {
            *g = substitute(g, &sy, Some(p0.trunc.clone())).map_err(|e| fail(k, e.to_string()))?;
        }
        for g in acc_x.iter_mut() {
            *g = substitute(g, &sx, Some(p0.trunc.clone())).map_err(|e| fail(k, e.to_string()))?;
        }
        pre = (*rec.post).clone();
    }
    // composed maps: X_0(Σ_y) = Σ_x(X_final)
    let last = cert.len().saturating_sub(1);
    let sy = Substitution { nvars: n, images: acc_y.into_iter().map(crate::series::Image::Series).collect() };
    let xnew = pre.x_substitution();
    for (i, ax) in acc_x.iter().enumerate() {
        let lhs = substitute(&p0.presentation(i), &sy, Some(p0.trunc.clone())).map_err(|e| fail(last, e.to_string()))?;
        let rhs = substitute(ax, &xnew, Some(p0.trunc.clone())).map_err(|e| fail(last, e.to_string()))?;
        let k = if lhs.trunc() < rhs.trunc() { lhs.trunc().clone() } else { rhs.trunc().clone() };
        if !lhs.eq_mod(&rhs, &k) {
            return Err(fail(last, format!("composed maps disagree on x_{}", i + 1)));
        }
    }
    Ok(())
}

pub fn verify(p0: &PreparedPair, cert: &[Transformation]) -> bool {
    verify_report(p0, cert).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::BASE_MODULUS;
    use crate::linalg::qi;
    use crate::valgroup::GroupValue;

    fn sqrt2(k: i64) -> GroupValue {
        GroupValue::simple(1, qi(k))
    }

    fn poly(n: usize, terms: &[(&[i64], i64)], trunc: i64) -> Series {
        let mut g = Series::zero(n, qi(trunc), BASE_MODULUS);
        for (e, c) in terms {
            g = g.add(&Series::monomial(n, e, Cyclo::from_i64(BASE_MODULUS, *c), qi(trunc)));
        }
        g
    }

    fn germ1(trunc: i64) -> PreparedPair {
        let z = poly(2, &[(&[3, 0], 1), (&[3, 1], 1)], trunc);
        PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt2(5)], vec![z], qi(trunc)).unwrap()
    }

    #[test]
    fn germ1_runs_to_monomial_form() {
        let p = germ1(16);
        let mf = run(&p, None).unwrap();
        assert_eq!(mf.pair.kind(), (1, 1, 1));
        let tags: Vec<u8> = mf.certificate().iter().map(|t| t.tag()).collect();
        assert_eq!(tags, vec![10, 6, 9]);
        assert_eq!(mf.rank(), 2);
        assert!(verify(&p, mf.certificate()));
        assert!(check_injectivity(&mf.pair, 4));
    }

    #[test]
    fn monomial_pair_gives_empty_certificate() {
        let p = PreparedPair::new(1, 1, 1, vec![vec![1]], vec![sqrt2(1), sqrt2(3)], vec![], qi(8)).unwrap();
        let mf = run(&p, None).unwrap();
        assert!(mf.certificate().is_empty());
        assert!(matches!(step(&p, 4), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn step_rejects_algebraic_next_variable() {
        let z = poly(1, &[(&[3], 1), (&[4], 1)], 16);
        let p = PreparedPair::new(1, 1, 0, vec![vec![2]], vec![sqrt2(1)], vec![z], qi(16)).unwrap();
        assert!(matches!(run(&p, None), Err(Error::InvalidPreparedForm(_))));
        assert!(!check_injectivity(&p, 4));
    }

    #[test]
    fn truncation_one_is_exhausted() {
        let p = germ1(1);
        assert!(matches!(run(&p, None), Err(Error::TruncationExhausted(_))));
    }

    #[test]
    fn x_scope_monomialization() {
        let p = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt2(5)], vec![poly(2, &[(&[2, 0], 1), (&[1, 1], 1)], 10)], qi(10)).unwrap();
        let g = poly(2, &[(&[2, 0], 1), (&[3, 0], 1)], 10);
        let Outcome::Done(res) = monomialize_series(&p, &g, Scope::X).unwrap() else { panic!() };
        assert_eq!(res.d, vec![2]);
        assert_eq!(res.u, poly(2, &[(&[0, 0], 1), (&[1, 0], 1)], 8));
    }

    #[test]
    fn y_scope_monomialization() {
        let w = vec![sqrt2(1), GroupValue::simple(2, qi(1))];
        let z = poly(2, &[(&[1, 1], 1), (&[2, 3], 1)], 12);
        let p = PreparedPair::new(2, 1, 0, vec![vec![2, 1]], w, vec![z], qi(12)).unwrap();
        let g = poly(2, &[(&[2, 1], 1), (&[1, 2], 1)], 12);
        let Outcome::Done(res) = monomialize_series(&p, &g, Scope::Y(2)).unwrap() else { panic!() };
        assert_eq!(res.d, vec![3, 1]);
        assert_eq!(res.u.constant_term(), Cyclo::one(4));
        let mono = Series::monomial(2, &[3, 1], Cyclo::one(4), qi(12));
        assert!(res.g.eq_mod(&mono.mul(&res.u), res.g.trunc()));
        assert_eq!(res.pair.log.len(), 1);
    }

    #[test]
    fn injectivity_examples() {
        let w = vec![sqrt2(1), GroupValue::simple(2, qi(1))];
        let p = PreparedPair::new(2, 2, 0, vec![vec![2, 1], vec![1, 1]], w, vec![], qi(12)).unwrap();
        assert!(check_injectivity(&p, 3));
        let z = poly(1, &[(&[1], 1)], 12);
        let q = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1)], vec![z], qi(12)).unwrap();
        assert!(!check_injectivity(&q, 3));
        let single = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1)], vec![], qi(12)).unwrap();
        assert!(check_injectivity(&single, 3));
    }

    #[test]
    fn verify_detects_corruption() {
        let p = germ1(16);
        let mf = run(&p, None).unwrap();
        assert!(verify(&p, &[]));
        let mut bad = mf.certificate().to_vec();
        if let Payload::Type6 { b, .. } = &mut bad[1].payload {
            b[0][0] += 1;
        }
        assert_eq!(verify_report(&p, &bad).unwrap_err().stage, 1);
        let other = PreparedPair::new(1, 1, 0, vec![vec![1]], vec![sqrt2(1), sqrt2(5)], vec![poly(2, &[(&[2, 0], 1), (&[2, 1], 1)], 16)], qi(16)).unwrap();
        assert_eq!(verify_report(&other, mf.certificate()).unwrap_err().stage, 0);
    }
}
