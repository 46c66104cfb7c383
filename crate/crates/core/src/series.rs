//! Truncated multivariate power series with cyclotomic coefficients.
//!
//! Exponents are stored as integer numerators over a per-series denominator
//! `D`, so `y^{1/2}` is representable. A series carries its precision: every
//! stored term has total degree below `trunc`, and nothing is claimed about
//! terms at or above it. Arithmetic tracks precision honestly, so dividing
//! by a monomial or substituting fractional images lowers `trunc`.

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::linalg::{qi, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone)]
pub struct Series {
    nvars: usize,
    denom: i64,
    trunc: Q,
    modulus: u64,
    terms: BTreeMap<Vec<i64>, Cyclo>,
}

impl Series {
    pub fn zero(nvars: usize, trunc: Q, modulus: u64) -> Self {
        Series { nvars, denom: 1, trunc, modulus, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Cyclo, trunc: Q) -> Self {
        let m = c.modulus();
        let mut s = Self::zero(nvars, trunc, m);
        s.insert(vec![0; nvars], c);
        s
    }

    pub fn var(nvars: usize, i: usize, trunc: Q, modulus: u64) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, &e, Cyclo::one(modulus), trunc)
    }

    pub fn monomial(nvars: usize, exps: &[i64], coeff: Cyclo, trunc: Q) -> Self {
        let mut s = Self::zero(nvars, trunc, coeff.modulus());
        s.insert(exps.to_vec(), coeff);
        s
    }

    /// `coeff·y^exps` with rational exponents.
    pub fn monomial_q(nvars: usize, exps: &[Q], coeff: Cyclo, trunc: Q) -> Self {
        let d = exps.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let d = d.to_i64().expect("exponent denominator overflow");
        let num: Vec<i64> = exps
            .iter()
            .map(|e| (e * Q::from_integer(BigInt::from(d))).to_integer().to_i64().expect("exponent overflow"))
            .collect();
        let mut s = Self::zero(nvars, trunc, coeff.modulus());
        s.denom = d;
        s.insert(num, coeff);
        s
    }

    /// Builds a series from rational exponents and coefficients.
    pub fn from_terms(nvars: usize, trunc: Q, modulus: u64, terms: Vec<(Vec<Q>, Cyclo)>) -> Self {
        let mut acc = Self::zero(nvars, trunc.clone(), modulus);
        for (e, c) in terms {
            acc = acc.add(&Self::monomial_q(nvars, &e, c, trunc.clone()));
        }
        acc.canonical_denom()
    }

    fn insert(&mut self, e: Vec<i64>, c: Cyclo) {
        assert_eq!(e.len(), self.nvars, "exponent length mismatch");
        assert!(e.iter().all(|&x| x >= 0), "negative exponent in power series");
        let c = c.lift(self.modulus.lcm(&c.modulus()));
        if c.modulus() != self.modulus {
            *self = self.lift_field(c.modulus());
        }
        if c.is_zero() || self.deg_num(&e) >= self.trunc_num_bound() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn deg_num(&self, e: &[i64]) -> Q {
        Q::new(BigInt::from(e.iter().sum::<i64>()), BigInt::from(self.denom))
    }

    fn trunc_num_bound(&self) -> Q {
        self.trunc.clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn trunc(&self) -> &Q {
        &self.trunc
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms with rational exponents, in increasing exponent-numerator order.
    pub fn terms(&self) -> Vec<(Vec<Q>, Cyclo)> {
        self.terms
            .iter()
            .map(|(e, c)| (self.exp_q(e), c.clone()))
            .collect()
    }

    fn exp_q(&self, e: &[i64]) -> Vec<Q> {
        e.iter()
            .map(|&x| Q::new(BigInt::from(x), BigInt::from(self.denom)))
            .collect()
    }

    /// Whether every exponent is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|x| x % self.denom == 0))
    }

    /// Re-expresses exponents over the denominator `d`, a multiple of the current one.
    pub fn with_denom(&self, d: i64) -> Self {
        assert!(d % self.denom == 0, "denominator {d} is not a multiple of {}", self.denom);
        let f = d / self.denom;
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().map(|x| x * f).collect(), c.clone()))
            .collect();
        Series { denom: d, terms, ..self.clone_empty() }
    }

    /// Smallest denominator that represents every exponent.
    pub fn canonical_denom(&self) -> Self {
        let mut g = self.denom;
        for e in self.terms.keys() {
            for x in e {
                g = g.gcd(x);
            }
        }
        if g <= 1 {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().map(|x| x / g).collect(), c.clone()))
            .collect();
        Series { denom: self.denom / g, terms, ..self.clone_empty() }
    }

    fn clone_empty(&self) -> Self {
        Series {
            nvars: self.nvars,
            denom: self.denom,
            trunc: self.trunc.clone(),
            modulus: self.modulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn lift_field(&self, m: u64) -> Self {
        if m == self.modulus {
            return self.clone();
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.lift(m))).collect();
        Series { modulus: m, terms, ..self.clone_empty() }
    }

    /// Lowers the precision to `min(trunc, n)`.
    pub fn truncate(&self, n: &Q) -> Self {
        let n = if *n < self.trunc { n.clone() } else { self.trunc.clone() };
        let mut out = Series { trunc: n, ..self.clone_empty() };
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    /// Declares the stored terms exact up to degree `n`, raising the precision.
    /// Only valid when the caller knows the omitted terms vanish (e.g. a chosen polynomial).
    pub fn assume_exact_to(&self, n: &Q) -> Self {
        let mut s = self.clone();
        if *n > s.trunc {
            s.trunc = n.clone();
        } else {
            s = s.truncate(n);
        }
        s
    }

    fn unify(&self, o: &Self) -> (Self, Self) {
        assert_eq!(self.nvars, o.nvars, "series live in different rings");
        let d = self.denom.lcm(&o.denom);
        let m = self.modulus.lcm(&o.modulus);
        (self.with_denom(d).lift_field(m), o.with_denom(d).lift_field(m))
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.unify(o);
        let trunc = if a.trunc < b.trunc { a.trunc.clone() } else { b.trunc.clone() };
        let mut out = Series { trunc, ..a.clone_empty() };
        for (e, c) in a.terms.iter().chain(b.terms.iter()) {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect();
        Series { terms, ..self.clone_empty() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, f: &Cyclo) -> Self {
        let mut out = self.clone_empty();
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.mul(f));
        }
        out
    }

    pub fn scale_q(&self, f: &Q) -> Self {
        self.scale(&Cyclo::from_q(self.modulus, f.clone()))
    }

    /// Lowest total degree in the support, or `None` for the zero series.
    pub fn ord(&self) -> Option<Q> {
        self.terms.keys().map(|e| self.deg_num(e)).min()
    }

    /// `ord`, with the precision standing in for the order of a zero series.
    pub fn ord_or_trunc(&self) -> Q {
        self.ord().unwrap_or_else(|| self.trunc.clone())
    }

    /// Product; precision is `min(N_a + ord b, N_b + ord a)`, capped at the larger input precision.
    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.unify(o);
        let p1 = &a.trunc + b.ord_or_trunc();
        let p2 = &b.trunc + a.ord_or_trunc();
        let cap = if a.trunc > b.trunc { a.trunc.clone() } else { b.trunc.clone() };
        let mut trunc = if p1 < p2 { p1 } else { p2 };
        if trunc > cap {
            trunc = cap;
        }
        let mut out = Series { trunc, ..a.clone_empty() };
        let bound = (&out.trunc * Q::from_integer(BigInt::from(a.denom))).ceil().to_integer();
        for (ea, ca) in &a.terms {
            let da: i64 = ea.iter().sum();
            for (eb, cb) in &b.terms {
                let db: i64 = eb.iter().sum();
                if BigInt::from(da + db) >= bound {
                    continue;
                }
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert(e, ca.mul(cb));
            }
        }
        out
    }

    pub fn pow_i(&self, k: u32) -> Self {
        let mut acc = Series::constant(self.nvars, Cyclo::one(self.modulus), self.trunc.clone());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn constant_term(&self) -> Cyclo {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(|| Cyclo::zero(self.modulus))
    }

    pub fn is_unit(&self) -> bool {
        !self.constant_term().is_zero()
    }

    /// The constant term of a unit.
    pub fn residue(&self) -> Result<Cyclo> {
        let c = self.constant_term();
        if c.is_zero() {
            Err(Error::NotAUnit)
        } else {
            Ok(c)
        }
    }

    /// Binomial expansion of `u^λ` for a unit `u`, principal branch on the constant.
    pub fn unit_pow(&self, lambda: &Q) -> Result<Self> {
        let c = self.residue()?;
        let c_pow = c.pow_q(lambda)?;
        let c_inv = c.inv()?;
        let one = Series::constant(self.nvars, Cyclo::one(self.modulus), self.trunc.clone());
        let w = self.scale(&c_inv).sub(&one);
        let mut acc = one.clone();
        let mut wk = one;
        let mut binom = Q::one();
        let mut k = 0i64;
        loop {
            wk = wk.mul(&w);
            if wk.is_zero() {
                break;
            }
            binom = binom * (lambda - qi(k)) / qi(k + 1);
            k += 1;
            acc = acc.add(&wk.scale_q(&binom));
        }
        Ok(acc.scale(&c_pow).truncate(&self.trunc))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.unit_pow(&qi(-1))
    }

    pub fn mul_monomial(&self, e: &[Q]) -> Self {
        let m = Series::monomial_q(self.nvars, e, Cyclo::one(self.modulus), self.trunc.clone() + e.iter().sum::<Q>());
        let mut out = self.mul(&m);
        out.trunc = self.trunc.clone() + e.iter().sum::<Q>();
        out
    }

    /// Divides by `y^e`; every stored term must be divisible. Precision drops by `|e|`.
    pub fn div_monomial(&self, e: &[Q]) -> Result<Self> {
        let d = e.iter().fold(BigInt::from(self.denom), |acc, x| acc.lcm(x.denom()));
        let d = d.to_i64().expect("denominator overflow");
        let s = self.with_denom(d);
        let en: Vec<i64> = e
            .iter()
            .map(|x| (x * Q::from_integer(BigInt::from(d))).to_integer().to_i64().unwrap())
            .collect();
        let trunc = &self.trunc - e.iter().sum::<Q>();
        if !trunc.is_positive() {
            return Err(Error::TruncationExhausted(format!(
                "division by a monomial of degree {} leaves no precision",
                e.iter().sum::<Q>()
            )));
        }
        let mut out = Series { trunc, ..s.clone_empty() };
        for (k, c) in &s.terms {
            let q: Vec<i64> = k.iter().zip(&en).map(|(a, b)| a - b).collect();
            if q.iter().any(|&x| x < 0) {
                return Err(Error::NotRepresentable("series is not divisible by the monomial".into()));
            }
            out.insert(q, c.clone());
        }
        Ok(out)
    }

    /// Largest monomial dividing every stored term (componentwise minimum).
    pub fn monomial_gcd(&self) -> Vec<Q> {
        let mut g: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            g = Some(match g {
                None => e.clone(),
                Some(g) => g.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        self.exp_q(&g.unwrap_or_else(|| vec![0; self.nvars]))
    }

    pub fn derivative(&self, var: usize) -> Self {
        let trunc = &self.trunc - Q::one();
        let mut out = Series { trunc, ..self.clone_empty() };
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let f = Q::new(BigInt::from(e[var]), BigInt::from(self.denom));
            let mut e2 = e.clone();
            e2[var] -= self.denom;
            if e2[var] < 0 {
                panic!("derivative of a fractional power below 1 leaves the power series ring");
            }
            out.insert(e2, c.scale(&f));
        }
        out
    }

    /// Coefficient of `x_var^k` as a series in the remaining variables.
    pub fn coeff_of(&self, var: usize, k: i64) -> Self {
        let trunc = &self.trunc - qi(k);
        let mut out = Series { trunc, ..self.clone_empty() };
        for (e, c) in &self.terms {
            if e[var] == k * self.denom {
                let mut e2 = e.clone();
                e2[var] = 0;
                out.insert(e2, c.clone());
            }
        }
        out
    }

    /// Largest exponent of `x_var` in the support.
    pub fn degree_in(&self, var: usize) -> Q {
        let m = self.terms.keys().map(|e| e[var]).max().unwrap_or(0);
        Q::new(BigInt::from(m), BigInt::from(self.denom))
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] != 0)
    }

    /// Sets the listed variables to zero.
    pub fn restrict_zero(&self, vars: &[usize]) -> Self {
        let mut out = self.clone_empty();
        for (e, c) in &self.terms {
            if vars.iter().all(|&v| e[v] == 0) {
                out.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Order of the restriction to the `var` axis, or `None` if it vanishes up to precision.
    pub fn ord_in_var(&self, var: usize) -> Option<Q> {
        self.terms
            .keys()
            .filter(|e| e.iter().enumerate().all(|(i, &x)| i == var || x == 0))
            .map(|e| Q::new(BigInt::from(e[var]), BigInt::from(self.denom)))
            .min()
    }

    /// Moves old variable `i` to position `map[i]` in a ring of `nvars` variables.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        let mut out = Series { nvars, ..self.clone_empty() };
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &x) in e.iter().enumerate() {
                e2[map[i]] += x;
            }
            out.insert(e2, c.clone());
        }
        out
    }

    /// Keeps only the listed variables (which must carry the whole support), renumbered in order.
    pub fn project(&self, keep: &[usize]) -> Self {
        let mut out = Series { nvars: keep.len(), ..self.clone_empty() };
        for (e, c) in &self.terms {
            debug_assert!(e.iter().enumerate().all(|(i, &x)| x == 0 || keep.contains(&i)));
            out.insert(keep.iter().map(|&i| e[i]).collect(), c.clone());
        }
        out
    }

    /// Equality of the term maps below degree `n`.
    pub fn eq_mod(&self, o: &Self, n: &Q) -> bool {
        self.truncate(n).sub(&o.truncate(n)).is_zero()
    }

    /// Terms grouped by a key computed from their rational exponent.
    pub fn split_by<K: Ord>(&self, key: impl Fn(&[Q]) -> K) -> BTreeMap<K, Series> {
        let mut out: BTreeMap<K, Series> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = key(&self.exp_q(e));
            let slot = out.entry(k).or_insert_with(|| self.clone_empty());
            slot.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn substitute(&self, sigma: &Substitution) -> Result<Self> {
        substitute(self, sigma, None)
    }

    /// Tschirnhaus transformation along `var`.
    ///
    /// Returns `Φ` (free of `var`) and `F̄ = F(x_var + Φ)`, whose coefficient of
    /// `x_var^{t-1}` vanishes to the available precision.
    pub fn tschirnhaus(&self, var: usize, t: i64) -> Result<(Series, Series)> {
        match self.ord_in_var(var) {
            Some(o) if o == qi(t) && t >= 1 => {}
            other => {
                return Err(Error::InvalidOrder(format!(
                    "ord along x_{} is {:?}, expected {t}",
                    var + 1,
                    other.map(|q| q.to_string())
                )))
            }
        }
        if !self.terms.keys().all(|e| e[var] % self.denom == 0) {
            return Err(Error::InvalidOrder("fractional exponent in the distinguished variable".into()));
        }
        // G = ∂^{t-1}F / (t-1)!, whose axis restriction has order 1
        let mut g = self.clone();
        let mut fact = Q::one();
        for k in 1..t {
            g = g.derivative(var);
            fact *= qi(k);
        }
        let g = g.scale_q(&fact.recip());
        let gx = g.derivative(var);
        let prec = g.trunc.clone();
        let n = self.nvars;
        let mut phi = Series::zero(n, prec.clone(), self.modulus);
        for _ in 0..128 {
            let at = at_var(&g, var, &phi)?;
            if at.is_zero() {
                let phi = phi.assume_exact_to(&self.trunc);
                let fbar = shift_var(self, var, &phi)?;
                return Ok((phi, fbar));
            }
            let slope = at_var(&gx, var, &phi)?;
            let step = at.mul(&slope.inverse()?);
            phi = phi.sub(&step).truncate(&prec);
        }
        Err(Error::IterationLimit("Newton iteration for the Tschirnhaus shift".into()))
    }
}

/// `f` with `x_var` replaced by `value` (a series free of `x_var`).
fn at_var(f: &Series, var: usize, value: &Series) -> Result<Series> {
    let mut sigma = Substitution::identity(f.nvars, f.modulus);
    sigma.images[var] = Image::Series(value.clone());
    let r = substitute(f, &sigma, Some(f.trunc.clone()))?;
    Ok(r)
}

/// `f(x_var + shift)`.
fn shift_var(f: &Series, var: usize, shift: &Series) -> Result<Series> {
    let mut sigma = Substitution::identity(f.nvars, f.modulus);
    let x = Series::var(f.nvars, var, f.trunc.clone(), f.modulus);
    sigma.images[var] = Image::Series(x.add(shift));
    substitute(f, &sigma, Some(f.trunc.clone()))
}

impl PartialEq for Series {
    fn eq(&self, o: &Self) -> bool {
        if self.nvars != o.nvars {
            return false;
        }
        let (a, b) = self.unify(o);
        a.terms == b.terms
    }
}

/// Image of one variable under a substitution.
#[derive(Debug, Clone, PartialEq)]
pub enum Image {
    /// `coeff·y^mono·∏ (y_k + α_k)^{p_k}` with every `α_k ≠ 0`.
    Gmt { coeff: Cyclo, mono: Vec<Q>, factors: Vec<(usize, Cyclo, Q)> },
    /// A general series of positive order.
    Series(Series),
}

impl Image {
    pub fn monomial(mono: Vec<Q>, modulus: u64) -> Self {
        Image::Gmt { coeff: Cyclo::one(modulus), mono, factors: Vec::new() }
    }

    pub fn monomial_i(mono: &[i64], modulus: u64) -> Self {
        Self::monomial(mono.iter().map(|&x| qi(x)).collect(), modulus)
    }

    /// Lowest total degree of the image.
    pub fn order(&self) -> Q {
        match self {
            Image::Gmt { mono, .. } => mono.iter().sum(),
            Image::Series(s) => s.ord_or_trunc(),
        }
    }

    /// The image raised to the rational power `e`, computed to precision `n`.
    pub fn power(&self, e: &Q, nvars: usize, n: &Q, modulus: u64) -> Result<Series> {
        match self {
            Image::Gmt { coeff, mono, factors } => {
                let exps: Vec<Q> = mono.iter().map(|x| x * e).collect();
                let c = coeff.pow_q(e)?;
                let mut acc = Series::monomial_q(nvars, &exps, c, n.clone());
                for (k, alpha, p) in factors {
                    if alpha.is_zero() {
                        return Err(Error::InvalidTransformation("translation factor with α = 0".into()));
                    }
                    let unit = Series::constant(nvars, alpha.clone(), n.clone())
                        .add(&Series::var(nvars, *k, n.clone(), modulus));
                    acc = acc.mul(&unit.unit_pow(&(p * e))?);
                }
                Ok(acc.truncate(n))
            }
            Image::Series(s) => {
                if !e.is_integer() || e.is_negative() {
                    return Err(Error::NotRepresentable(
                        "fractional or negative power of a general series image".into(),
                    ));
                }
                let k = e.to_integer().to_u32().expect("power overflow");
                Ok(s.truncate(n).pow_i(k))
            }
        }
    }

    /// The image as a series (power 1).
    pub fn to_series(&self, nvars: usize, n: &Q, modulus: u64) -> Result<Series> {
        self.power(&Q::one(), nvars, n, modulus)
    }
}

/// Simultaneous substitution `x_i ↦ images[i]`, images living in `nvars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Substitution {
    pub nvars: usize,
    pub images: Vec<Image>,
}

impl Substitution {
    pub fn identity(n: usize, modulus: u64) -> Self {
        let images = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                Image::monomial_i(&e, modulus)
            })
            .collect();
        Substitution { nvars: n, images }
    }
}

/// Composite `g(σ)`. The result is exact below `min(cap, N_g·μ)`, where `μ` is the
/// least order among images of variables that occur in `g`.
pub fn substitute(g: &Series, sigma: &Substitution, cap: Option<Q>) -> Result<Series> {
    if sigma.images.len() != g.nvars {
        return Err(Error::InvalidTransformation(format!(
            "substitution covers {} variables, series has {}",
            sigma.images.len(),
            g.nvars
        )));
    }
    let used: Vec<usize> = (0..g.nvars).filter(|&i| g.depends_on(i)).collect();
    let mut mu: Option<Q> = None;
    for &i in &used {
        let o = sigma.images[i].order();
        if !o.is_positive() {
            return Err(Error::TruncationExhausted(format!(
                "image of variable {} has order 0; the result would depend on discarded terms",
                i + 1
            )));
        }
        mu = Some(match mu {
            Some(m) if m < o => m,
            _ => o,
        });
    }
    let mu = mu.unwrap_or_else(Q::one);
    let mut target = &g.trunc * &mu;
    let cap = cap.unwrap_or_else(|| g.trunc.clone());
    if cap < target {
        target = cap;
    }
    let modulus = g.modulus;
    let n = sigma.nvars;
    let mut cache: HashMap<(usize, i64), Series> = HashMap::new();
    let mut acc = Series::zero(n, target.clone(), modulus);
    for (e, c) in &g.terms {
        let mut term = Series::constant(n, c.clone(), target.clone());
        for (i, &x) in e.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let key = (i, x);
            if !cache.contains_key(&key) {
                let p = Q::new(BigInt::from(x), BigInt::from(g.denom));
                let s = sigma.images[i].power(&p, n, &target, modulus)?;
                cache.insert(key, s);
            }
            term = term.mul(&cache[&key]);
            if term.is_zero() && !term.trunc.is_positive() {
                break;
            }
        }
        acc = acc.add(&term);
    }
    let acc = acc.truncate(&target).canonical_denom();
    if !acc.trunc.is_positive() {
        return Err(Error::TruncationExhausted("substitution leaves no precision".into()));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    const M: u64 = 4;

    fn poly(nvars: usize, n: i64, terms: &[(&[i64], i64)]) -> Series {
        let mut s = Series::zero(nvars, qi(n), M);
        for (e, c) in terms {
            s = s.add(&Series::monomial(nvars, e, Cyclo::from_i64(M, *c), qi(n)));
        }
        s
    }

    #[test]
    fn substitute_monomials() {
        let g = poly(1, 6, &[(&[1], 1)]);
        let sigma = Substitution { nvars: 2, images: vec![Image::monomial_i(&[2, 1], M)] };
        assert_eq!(g.substitute(&sigma).unwrap(), poly(2, 6, &[(&[2, 1], 1)]));
        let g = poly(2, 6, &[(&[1, 1], 1)]);
        let sigma = Substitution { nvars: 2, images: vec![Image::monomial_i(&[1, 0], M), Image::monomial_i(&[1, 1], M)] };
        assert_eq!(g.substitute(&sigma).unwrap(), poly(2, 6, &[(&[2, 1], 1)]));
    }

    #[test]
    fn substitute_with_translation() {
        let g = poly(1, 5, &[(&[1], 1), (&[2], 1)]);
        // order-0 series image is rejected
        let bad = Substitution { nvars: 2, images: vec![Image::Series(poly(2, 5, &[(&[0, 0], 1), (&[1, 0], 1)]))] };
        assert!(matches!(g.substitute(&bad), Err(Error::TruncationExhausted(_))));
        let sigma = Substitution {
            nvars: 2,
            images: vec![Image::Gmt {
                coeff: Cyclo::one(M),
                mono: vec![qi(0), qi(1)],
                factors: vec![(0, Cyclo::one(M), qi(1))],
            }],
        };
        let r = g.substitute(&sigma).unwrap();
        let y = poly(2, 5, &[(&[0, 1], 1), (&[1, 1], 1)]);
        assert_eq!(r, y.add(&y.mul(&y)));
    }

    #[test]
    fn unit_powers() {
        let u = poly(1, 3, &[(&[0], 1), (&[1], 1)]);
        let r = u.unit_pow(&q(1, 2)).unwrap();
        let expect = Series::from_terms(
            1,
            qi(3),
            M,
            vec![(vec![qi(0)], Cyclo::one(M)), (vec![qi(1)], Cyclo::from_q(M, q(1, 2))), (vec![qi(2)], Cyclo::from_q(M, q(-1, 8)))],
        );
        assert_eq!(r, expect);
        assert_eq!(u.unit_pow(&qi(2)).unwrap(), poly(1, 3, &[(&[0], 1), (&[1], 2), (&[2], 1)]));
        assert!(matches!(poly(1, 3, &[(&[1], 1)]).unit_pow(&qi(2)), Err(Error::NotAUnit)));
        assert_eq!(r.residue().unwrap(), Cyclo::one(M));
    }

    #[test]
    fn tschirnhaus_examples() {
        // x2^2 + 2 x1 x2
        let f = poly(2, 6, &[(&[0, 2], 1), (&[1, 1], 2)]);
        let (phi, fbar) = f.tschirnhaus(1, 2).unwrap();
        assert_eq!(phi.truncate(&qi(5)), poly(2, 5, &[(&[1, 0], -1)]));
        assert_eq!(fbar, poly(2, 6, &[(&[0, 2], 1), (&[2, 0], -1)]));
        // x2^3 + 3 x1 x2^2
        let f = poly(2, 6, &[(&[0, 3], 1), (&[1, 2], 3)]);
        let (_, fbar) = f.tschirnhaus(1, 3).unwrap();
        assert_eq!(fbar, poly(2, 6, &[(&[0, 3], 1), (&[2, 1], -3), (&[3, 0], 2)]));
        let f = poly(2, 6, &[(&[0, 2], 1)]);
        let (phi, fbar) = f.tschirnhaus(1, 2).unwrap();
        assert!(phi.is_zero());
        assert_eq!(fbar, f);
        assert!(poly(2, 6, &[(&[1, 0], 1)]).tschirnhaus(1, 1).is_err());
    }

    #[test]
    fn ord_along_axis() {
        assert_eq!(poly(2, 6, &[(&[0, 2], 1), (&[1, 1], 1)]).ord_in_var(1), Some(qi(2)));
        assert_eq!(poly(2, 6, &[(&[1, 0], 1)]).ord_in_var(1), None);
        assert_eq!(poly(1, 6, &[(&[3], 1), (&[5], 1)]).ord_in_var(0), Some(qi(3)));
    }

    #[test]
    fn precision_after_division() {
        let s = poly(1, 6, &[(&[3], 1), (&[4], 2)]);
        let d = s.div_monomial(&[qi(3)]).unwrap();
        assert_eq!(d.trunc(), &qi(3));
        assert_eq!(d, poly(1, 3, &[(&[0], 1), (&[1], 2)]));
        assert!(s.div_monomial(&[qi(6)]).is_err());
    }
}
