//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use monomialize_core::linalg::{q, Q};
use monomialize_core::valgroup::{combine, rational_relation, GroupValue, IrrationalCombination};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn small_q<R: Rng>(rng: &mut R, num: i64, den: i64) -> Q {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

fn random_level<R: Rng>(rng: &mut R, width: usize) -> IrrationalCombination {
    IrrationalCombination::new((0..width).map(|_| small_q(rng, 9, 9)).collect())
}

/// `s` positive, rationally independent values of rank `rank`.
pub fn independent_values<R: Rng>(rng: &mut R, s: usize, rank: usize) -> Vec<GroupValue> {
    loop {
        let vals: Vec<GroupValue> = (0..s)
            .map(|_| {
                let levels = (0..rank)
                    .map(|l| {
                        if l > 0 && rng.gen_bool(0.3) {
                            IrrationalCombination::zero()
                        } else {
                            random_level(rng, s + 1)
                        }
                    })
                    .collect();
                GroupValue::new(levels)
            })
            .collect();
        if vals.iter().all(|v| v.is_positive()) && rational_relation(&vals).is_none() {
            return vals;
        }
    }
}

/// A nonnegative value dependent on `w` with its coefficient vector.
pub fn dependent_value<R: Rng>(rng: &mut R, w: &[GroupValue]) -> (GroupValue, Vec<Q>) {
    loop {
        let lam: Vec<Q> = (0..w.len()).map(|_| small_q(rng, 9, 9)).collect();
        let v = combine(w, &lam);
        if v.sign() >= 0 {
            return (v, lam);
        }
    }
}

/// `Σ c·y^e` over `Q(ζ_4)` with precision `trunc`.
pub fn poly(n: usize, terms: &[(Vec<i64>, Q)], trunc: i64) -> monomialize_core::series::Series {
    use monomialize_core::cyclo::{Cyclo, BASE_MODULUS};
    use monomialize_core::series::Series;
    let t = Q::from_integer(trunc.into());
    terms.iter().fold(Series::zero(n, t.clone(), BASE_MODULUS), |acc, (e, c)| {
        acc.add(&Series::monomial(n, e, Cyclo::from_q(BASE_MODULUS, c.clone()), t.clone()))
    })
}

/// Rank over `Q` by plain Gaussian elimination.
pub fn rank_oracle(rows: &[Vec<i64>]) -> usize {
    use num_traits::Zero;
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                for k in 0..cols {
                    let d = &f * &m[rank][k];
                    m[i][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `√2`-multiples: `k·√2` as a rank-one value.
pub fn sqrt2(k: i64) -> GroupValue {
    GroupValue::simple(1, Q::from_integer(k.into()))
}
