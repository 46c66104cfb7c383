//! JSON documents for problems and certificates.
//!
//! Rationals are strings `"p/q"`, integer data stays integer and every
//! variable index is 1-based. Field order is fixed and series terms are
//! sorted, so serializing a parsed canonical document reproduces it byte for
//! byte. Cyclotomic coefficients are coordinate lists in the power basis of
//! `ζ_field`, trailing zeros dropped.

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::linalg::{fmt_q, parse_q, IMat, Q};
use crate::prepared::{LiftData, Payload, PreparedPair, Transformation};
use crate::series::{Image, Series};
use crate::toric::{ElementaryBlowup, TransformSeq};
use crate::valgroup::GroupValue;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

/// Schema version written into every document.
pub const VERSION: u32 = 1;

/// Stated in every certificate: truncated data is taken at face value.
pub const TRUNCATION_NOTE: &str =
    "series are exact only below their truncation degree; unit and order tests trust the truncated data";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponent: Vec<String>,
    pub coefficient: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub trunc: String,
    pub terms: Vec<TermDoc>,
}

/// The prepared-pair body: `x_i = y^{C_i}` for `i ≤ r`, `x_{r+i} = y_{s+i}`
/// for `i ≤ l`, and `xseries` for the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyDoc {
    pub s: usize,
    pub r: usize,
    pub l: usize,
    #[serde(rename = "C")]
    pub c: IMat,
    pub xseries: Vec<SeriesDoc>,
}

/// A full state: coefficient field, precision, weights of `y` and the body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub field: u64,
    pub trunc: String,
    pub weights: Vec<GroupValue>,
    pub pair: BodyDoc,
}

/// Options for the single-operation sub-commands and for `run`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Monomial generators on `y_1..y_s` for `principalize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<i64>>>,
    /// Which x-series (1-based) `tschirnhaus` and `decompose` act on; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<usize>,
    /// The distinguished `y` variable (1-based) for `tschirnhaus`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<usize>,
    /// The order `t` along `var` for `tschirnhaus`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub version: u32,
    pub field: u64,
    pub trunc: String,
    pub weights: Vec<GroupValue>,
    pub pair: BodyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub i: usize,
    pub j: usize,
    pub chart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeqDoc {
    pub n: usize,
    pub steps: Vec<StepDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutedSeqDoc {
    pub seq: SeqDoc,
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftDoc {
    pub xseq: SeqDoc,
    pub xperm: Vec<usize>,
    pub a: IMat,
    pub avec: Vec<i64>,
    pub alpha: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ypre: Option<PermutedSeqDoc>,
    pub ypost: SeqDoc,
    pub yb: IMat,
    pub ybvec: Vec<i64>,
}

/// Payload fields; which ones are present depends on the entry's tag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mbar: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<SeqDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xseq: Option<SeqDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yseq: Option<SeqDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<IMat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bvec: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDoc {
    pub var: usize,
    pub alpha: Vec<String>,
    pub power: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageDoc {
    /// `coeff·y^mono·∏ (y_var + α)^power`.
    Gmt { coeff: Vec<String>, mono: Vec<String>, factors: Vec<FactorDoc> },
    Series(SeriesDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub tag: u8,
    /// `(s, r, l)` after the entry.
    pub kind: [usize; 3],
    pub payload: PayloadDoc,
    pub sigma_y: Vec<ImageDoc>,
    pub sigma_x: Vec<ImageDoc>,
    pub post: StateDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub version: u32,
    pub assumption: String,
    pub problem: StateDoc,
    pub entries: Vec<EntryDoc>,
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

fn parse_qs(v: &[String]) -> Result<Vec<Q>> {
    v.iter().map(|s| parse_q(s)).collect()
}

fn cyclo_doc(c: &Cyclo, field: u64) -> Vec<String> {
    let c = c.lift(field.max(c.modulus()));
    let mut v: Vec<String> = qs(c.coords());
    while v.last().is_some_and(|s| s == "0/1") {
        v.pop();
    }
    v
}

fn cyclo_of(v: &[String], field: u64) -> Result<Cyclo> {
    Ok(Cyclo::from_coords(field, parse_qs(v)?))
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|&k| k + 1).collect()
}

fn zero_based(v: &[usize], bound: usize, what: &str) -> Result<Vec<usize>> {
    v.iter()
        .map(|&k| {
            if k == 0 || k > bound {
                Err(perr(format!("{what}: index {k} outside 1..{bound}")))
            } else {
                Ok(k - 1)
            }
        })
        .collect()
}

pub fn series_doc(g: &Series, field: u64) -> SeriesDoc {
    let g = g.lift_field(field.max(g.modulus()));
    SeriesDoc {
        trunc: fmt_q(g.trunc()),
        terms: g
            .terms()
            .iter()
            .map(|(e, c)| TermDoc { exponent: qs(e), coefficient: cyclo_doc(c, field) })
            .collect(),
    }
}

pub fn series_of(d: &SeriesDoc, nvars: usize, field: u64) -> Result<Series> {
    let trunc = parse_q(&d.trunc)?;
    let mut terms = Vec::with_capacity(d.terms.len());
    for t in &d.terms {
        if t.exponent.len() != nvars {
            return Err(perr(format!("exponent has {} entries, expected {nvars}", t.exponent.len())));
        }
        let e = parse_qs(&t.exponent)?;
        if e.iter().any(|x| x.is_negative()) {
            return Err(perr("negative exponent in a power series"));
        }
        terms.push((e, cyclo_of(&t.coefficient, field)?));
    }
    Ok(Series::from_terms(nvars, trunc, field, terms))
}

pub fn seq_doc(seq: &TransformSeq) -> SeqDoc {
    SeqDoc {
        n: seq.n,
        steps: seq.steps.iter().map(|b| StepDoc { i: b.i + 1, j: b.j + 1, chart: b.chart + 1 }).collect(),
    }
}

pub fn seq_of(d: &SeqDoc) -> Result<TransformSeq> {
    let mut seq = TransformSeq::new(d.n);
    for st in &d.steps {
        if st.i == 0 || st.j == 0 || st.chart == 0 || st.i.max(st.j) > d.n {
            return Err(perr(format!("blow-up ({}, {}) outside 1..{}", st.i, st.j, d.n)));
        }
        let b = ElementaryBlowup { i: st.i - 1, j: st.j - 1, chart: st.chart - 1 };
        if !b.is_valid() {
            return Err(perr(format!("blow-up ({}, {}) with chart {} is malformed", st.i, st.j, st.chart)));
        }
        seq.push(b);
    }
    Ok(seq)
}

pub fn state_doc(p: &PreparedPair) -> StateDoc {
    StateDoc {
        field: p.field,
        trunc: fmt_q(&p.trunc),
        weights: p.weights.clone(),
        pair: BodyDoc {
            s: p.s,
            r: p.r,
            l: p.l,
            c: p.c.clone(),
            xseries: p.xseries.iter().map(|g| series_doc(g, p.field)).collect(),
        },
    }
}

/// The pair described by `d`, without validation.
pub fn state_of(d: &StateDoc) -> Result<PreparedPair> {
    if d.field == 0 {
        return Err(perr("field modulus must be positive"));
    }
    let n = d.weights.len();
    let b = &d.pair;
    if b.c.len() != b.r || b.c.iter().any(|row| row.len() != b.s) {
        return Err(Error::InvalidPreparedForm(format!("C must be {} × {}", b.r, b.s)));
    }
    let xseries = b.xseries.iter().map(|g| series_of(g, n, d.field)).collect::<Result<Vec<_>>>()?;
    let field = xseries.iter().fold(d.field, |acc, g| num_integer::Integer::lcm(&acc, &g.modulus()));
    Ok(PreparedPair {
        n,
        m: b.r + b.l + xseries.len(),
        s: b.s,
        r: b.r,
        l: b.l,
        c: b.c.clone(),
        weights: d.weights.clone(),
        xseries,
        field,
        trunc: parse_q(&d.trunc)?,
        log: Vec::new(),
    })
}

pub fn problem_doc(p: &PreparedPair, options: Option<OptionsDoc>) -> ProblemDoc {
    let st = state_doc(p);
    ProblemDoc { version: VERSION, field: st.field, trunc: st.trunc, weights: st.weights, pair: st.pair, options }
}

fn check_version(v: u32) -> Result<()> {
    if v != VERSION {
        return Err(perr(format!("unsupported schema version {v}")));
    }
    Ok(())
}

/// The validated pair of a problem document.
pub fn problem_of(d: &ProblemDoc) -> Result<PreparedPair> {
    check_version(d.version)?;
    let p = state_of(&StateDoc {
        field: d.field,
        trunc: d.trunc.clone(),
        weights: d.weights.clone(),
        pair: d.pair.clone(),
    })?;
    crate::prepared::validate(&p)?;
    Ok(p)
}

pub fn parse_problem(text: &str) -> Result<ProblemDoc> {
    serde_json::from_str(text).map_err(|e| perr(format!("problem document: {e}")))
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn image_doc(img: &Image, field: u64) -> ImageDoc {
    match img {
        Image::Gmt { coeff, mono, factors } => ImageDoc::Gmt {
            coeff: cyclo_doc(coeff, field),
            mono: qs(mono),
            factors: factors
                .iter()
                .map(|(k, a, p)| FactorDoc { var: k + 1, alpha: cyclo_doc(a, field), power: fmt_q(p) })
                .collect(),
        },
        Image::Series(g) => ImageDoc::Series(series_doc(g, field)),
    }
}

fn image_of(d: &ImageDoc, nvars: usize, field: u64) -> Result<Image> {
    Ok(match d {
        ImageDoc::Gmt { coeff, mono, factors } => {
            if mono.len() != nvars {
                return Err(perr(format!("monomial image has {} exponents, expected {nvars}", mono.len())));
            }
            let factors = factors
                .iter()
                .map(|f| {
                    let k = zero_based(&[f.var], nvars, "factor variable")?[0];
                    Ok((k, cyclo_of(&f.alpha, field)?, parse_q(&f.power)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Image::Gmt { coeff: cyclo_of(coeff, field)?, mono: parse_qs(mono)?, factors }
        }
        ImageDoc::Series(g) => Image::Series(series_of(g, nvars, field)?),
    })
}

fn lift_doc(l: &LiftData, field: u64) -> LiftDoc {
    LiftDoc {
        xseq: seq_doc(&l.xseq),
        xperm: one_based(&l.xperm),
        a: l.a.clone(),
        avec: l.avec.clone(),
        alpha: cyclo_doc(&l.alpha, field),
        ypre: l.ypre.as_ref().map(|(seq, perm)| PermutedSeqDoc { seq: seq_doc(seq), perm: one_based(perm) }),
        ypost: seq_doc(&l.ypost),
        yb: l.yb.clone(),
        ybvec: l.ybvec.clone(),
    }
}

fn lift_of(d: &LiftDoc, field: u64) -> Result<LiftData> {
    let xseq = seq_of(&d.xseq)?;
    let ypre = match &d.ypre {
        Some(pd) => {
            let seq = seq_of(&pd.seq)?;
            let perm = zero_based(&pd.perm, seq.n, "perm")?;
            Some((seq, perm))
        }
        None => None,
    };
    Ok(LiftData {
        xperm: zero_based(&d.xperm, xseq.n, "xperm")?,
        xseq,
        a: d.a.clone(),
        avec: d.avec.clone(),
        alpha: cyclo_of(&d.alpha, field)?,
        ypre,
        ypost: seq_of(&d.ypost)?,
        yb: d.yb.clone(),
        ybvec: d.ybvec.clone(),
    })
}

fn payload_doc(p: &Payload, field: u64) -> PayloadDoc {
    let mut d = PayloadDoc::default();
    match p {
        Payload::Type1 { seq } => d.seq = Some(seq_doc(seq)),
        Payload::Type2 { xseq, yseq } => {
            d.xseq = Some(seq_doc(xseq));
            d.yseq = Some(seq_doc(yseq));
        }
        Payload::Type3 { mbar, phi } | Payload::Type10 { mbar, phi } => {
            d.mbar = Some(*mbar);
            d.series = Some(series_doc(phi, field));
        }
        Payload::Type4 { mbar, lift } | Payload::Type9 { mbar, lift } => {
            d.mbar = Some(*mbar);
            d.lift = Some(lift_doc(lift, field));
        }
        Payload::Type5 { mbar, f } => {
            d.mbar = Some(*mbar);
            d.series = Some(series_doc(f, field));
        }
        Payload::Type6 { mbar, seq, perm, b, bvec, alpha } => {
            d.mbar = Some(*mbar);
            d.seq = Some(seq_doc(seq));
            d.perm = Some(one_based(perm));
            d.b = Some(b.clone());
            d.bvec = Some(bvec.clone());
            d.alpha = Some(cyclo_doc(alpha, field));
        }
        Payload::Type7 { i, mbar } => {
            d.i = Some(*i);
            d.mbar = Some(*mbar);
        }
        Payload::Type8 { gamma, c } => {
            d.series = Some(series_doc(gamma, field));
            d.c = Some(qs(c));
        }
    }
    d
}

fn need<T: Clone>(x: &Option<T>, tag: u8, name: &str) -> Result<T> {
    x.clone().ok_or_else(|| perr(format!("type {tag} payload needs `{name}`")))
}

/// Rebuilds a payload acting on a pair with `n` y-variables and `m` x-variables.
fn payload_of(d: &PayloadDoc, tag: u8, n: usize, m: usize, field: u64) -> Result<Payload> {
    let series = |nv: usize| -> Result<Series> { series_of(&need(&d.series, tag, "series")?, nv, field) };
    Ok(match tag {
        1 => Payload::Type1 { seq: seq_of(&need(&d.seq, tag, "seq")?)? },
        2 => Payload::Type2 {
            xseq: seq_of(&need(&d.xseq, tag, "xseq")?)?,
            yseq: seq_of(&need(&d.yseq, tag, "yseq")?)?,
        },
        3 => Payload::Type3 { mbar: need(&d.mbar, tag, "mbar")?, phi: series(m)? },
        10 => Payload::Type10 { mbar: need(&d.mbar, tag, "mbar")?, phi: series(m)? },
        4 => Payload::Type4 { mbar: need(&d.mbar, tag, "mbar")?, lift: lift_of(&need(&d.lift, tag, "lift")?, field)? },
        9 => Payload::Type9 { mbar: need(&d.mbar, tag, "mbar")?, lift: lift_of(&need(&d.lift, tag, "lift")?, field)? },
        5 => Payload::Type5 { mbar: need(&d.mbar, tag, "mbar")?, f: series(n)? },
        6 => {
            let seq = seq_of(&need(&d.seq, tag, "seq")?)?;
            let perm = zero_based(&need(&d.perm, tag, "perm")?, seq.n, "perm")?;
            Payload::Type6 {
                mbar: need(&d.mbar, tag, "mbar")?,
                seq,
                perm,
                b: need(&d.b, tag, "b")?,
                bvec: need(&d.bvec, tag, "bvec")?,
                alpha: cyclo_of(&need(&d.alpha, tag, "alpha")?, field)?,
            }
        }
        7 => Payload::Type7 { i: need(&d.i, tag, "i")?, mbar: need(&d.mbar, tag, "mbar")? },
        8 => Payload::Type8 { gamma: series(n)?, c: parse_qs(&need(&d.c, tag, "c")?)? },
        t => return Err(perr(format!("unknown transformation type {t}"))),
    })
}

/// Payload coefficients live in the field before the entry, images and the
/// post-state in the field after it; both are written in the latter.
fn entry_doc(t: &Transformation) -> EntryDoc {
    let field = t.post.field;
    let (s, r, l) = t.post.kind();
    EntryDoc {
        tag: t.tag(),
        kind: [s, r, l],
        payload: payload_doc(&t.payload, field),
        sigma_y: t.sigma_y.iter().map(|g| image_doc(g, field)).collect(),
        sigma_x: t.sigma_x.iter().map(|g| image_doc(g, field)).collect(),
        post: state_doc(&t.post),
        note: t.note.clone(),
    }
}

fn entry_of(d: &EntryDoc) -> Result<Transformation> {
    let post = state_of(&d.post)?;
    let (n, m, field) = (post.n, post.m, post.field);
    Ok(Transformation {
        payload: payload_of(&d.payload, d.tag, n, m, field)?,
        sigma_y: d.sigma_y.iter().map(|g| image_of(g, n, field)).collect::<Result<_>>()?,
        sigma_x: d.sigma_x.iter().map(|g| image_of(g, m, field)).collect::<Result<_>>()?,
        post: Box::new(post),
        note: d.note.clone(),
    })
}

pub fn certificate_doc(problem: &PreparedPair, cert: &[Transformation]) -> CertificateDoc {
    CertificateDoc {
        version: VERSION,
        assumption: TRUNCATION_NOTE.to_string(),
        problem: state_doc(&problem.snapshot()),
        entries: cert.iter().map(entry_doc).collect(),
    }
}

/// A parsed certificate: the problem it was issued for, its entries and the
/// `(s, r, l)` each entry declares.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub problem: PreparedPair,
    pub entries: Vec<Transformation>,
    pub declared: Vec<(usize, usize, usize)>,
}

pub fn certificate_of(d: &CertificateDoc) -> Result<Certificate> {
    check_version(d.version)?;
    Ok(Certificate {
        problem: state_of(&d.problem)?,
        entries: d.entries.iter().map(entry_of).collect::<Result<_>>()?,
        declared: d.entries.iter().map(|e| (e.kind[0], e.kind[1], e.kind[2])).collect(),
    })
}

pub fn parse_certificate(text: &str) -> Result<CertificateDoc> {
    serde_json::from_str(text).map_err(|e| perr(format!("certificate: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::run;
    use crate::linalg::qi;
    use crate::valgroup::IrrationalCombination;

    fn germ1() -> PreparedPair {
        let w = |c: i64| GroupValue::new(vec![IrrationalCombination::new(vec![qi(0), qi(c)])]);
        let mut g = Series::zero(2, qi(16), 4);
        for (e, c) in [([3, 0], 1), ([3, 1], 1)] {
            g = g.add(&Series::monomial(2, &e, Cyclo::from_i64(4, c), qi(16)));
        }
        PreparedPair::new(1, 1, 0, vec![vec![1]], vec![w(1), w(5)], vec![g], qi(16)).unwrap()
    }

    #[test]
    fn problem_round_trip_is_byte_identical() {
        let p = germ1();
        let text = to_json(&problem_doc(&p, None));
        let back = problem_of(&parse_problem(&text).unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(to_json(&problem_doc(&back, None)), text);
    }

    #[test]
    fn certificate_round_trip_is_byte_identical() {
        let p = germ1();
        let mf = run(&p, None).unwrap();
        let text = to_json(&certificate_doc(&p, mf.certificate()));
        let cert = certificate_of(&parse_certificate(&text).unwrap()).unwrap();
        assert_eq!(cert.entries.len(), mf.certificate().len());
        assert_eq!(to_json(&certificate_doc(&cert.problem, &cert.entries)), text);
        assert!(crate::driver::verify(&cert.problem, &cert.entries));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = r#"{"version":1,"field":4,"trunc":"8/1","pair":{"s":1,"r":1,"l":0,"C":[[1]],"xseries":[]}}"#;
        let e = parse_problem(text).unwrap_err();
        assert!(e.to_string().contains("weights"), "{e}");
    }
}
