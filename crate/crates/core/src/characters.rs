//! Modified characters χ′ of the principal subspaces W(Λ).
//!
//! Three families have closed formulas:
//!
//! * A: W(iΛ0 + (k−i)Λ1) and B: W(iΛ0 + (k−i)Λ2), summed directly from the
//!   quasiparticle formula over chains M_1 ≥ … ≥ M_k ≥ 0, N_1 ≥ … ≥ N_k ≥ 0;
//! * C: W(iΛ1 + (k−i)Λ2), obtained from two family-A characters through the
//!   q-difference relation coming from the exact sequence
//!   0 → W(iΛ1+(k−i)Λ2) → W(iΛ0+(k−i)Λ1) → W((i−1)Λ0+(k−i+1)Λ1) → 0.
//!
//! All characters are power series in q (constant term 1), so any window
//! with `s_min <= 0` is exact below zero for free.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::qseries::{dense_mul, inv_pochhammer_coeffs, Envelope, Series, SeriesError, Transform};
use crate::root_data::{charge_offsets, conformal_weight, AffineHW, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharError {
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("no character formula for {0}; only the lattice oracle covers weights with k0, k1, k2 all positive")]
    UnsupportedFamily(AffineHW),
    #[error("terms with x1-exponent below {i} survived the subtraction at {key:?}")]
    CancellationFailure { i: u32, key: (u32, u32, i64) },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// iΛ0 + (k−i)Λ1
    A,
    /// iΛ0 + (k−i)Λ2
    B,
    /// iΛ1 + (k−i)Λ2
    C,
    /// k0Λ0 + k1Λ1 + k2Λ2 with all coefficients positive
    G,
}

/// A highest weight together with the family used to compute its character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CharSpec {
    weight: AffineHW,
    family: Family,
    i: u32,
}

impl CharSpec {
    pub fn new(family: Family, k: u32, i: u32) -> Result<CharSpec, CharError> {
        if k == 0 || i > k {
            return Err(CharError::Range(format!(
                "need k >= 1 and 0 <= i <= k, got k={k}, i={i}"
            )));
        }
        let weight = match family {
            Family::A => AffineHW {
                k0: i,
                k1: k - i,
                k2: 0,
            },
            Family::B => AffineHW {
                k0: i,
                k1: 0,
                k2: k - i,
            },
            Family::C => AffineHW {
                k0: 0,
                k1: i,
                k2: k - i,
            },
            Family::G => {
                return Err(CharError::Range(
                    "family G is specified by a weight, use CharSpec::classify".into(),
                ))
            }
        };
        Ok(CharSpec { weight, family, i })
    }

    /// Picks the family for a weight: A when k2 = 0, else B when k1 = 0,
    /// else C when k0 = 0, else G.
    pub fn classify(weight: AffineHW) -> CharSpec {
        let (family, i) = if weight.k2 == 0 {
            (Family::A, weight.k0)
        } else if weight.k1 == 0 {
            (Family::B, weight.k0)
        } else if weight.k0 == 0 {
            (Family::C, weight.k1)
        } else {
            (Family::G, 0)
        };
        CharSpec { weight, family, i }
    }

    pub fn weight(&self) -> AffineHW {
        self.weight
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn level(&self) -> u32 {
        self.weight.level()
    }

    /// The family parameter i (0 for family G).
    pub fn index(&self) -> u32 {
        self.i
    }
}

/// Prefactor x1^{⟨λ1,Λ⟩} x2^{⟨λ2,Λ⟩} q^{h_Λ} relating χ to χ′.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefactor {
    pub x1: Rational,
    pub x2: Rational,
    pub q: Rational,
}

pub fn prefactor(weight: &AffineHW) -> Prefactor {
    let (x1, x2) = charge_offsets(weight);
    Prefactor {
        x1,
        x2,
        q: conformal_weight(weight),
    }
}

/// Weakly decreasing sequences of length `len` with sum at most `budget`,
/// in lexicographically descending order.
pub(crate) fn chains(len: usize, budget: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, max: u32, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for v in (0..=max.min(budget)).rev() {
            prefix.push(v);
            rec(len, v, budget - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, budget, budget, &mut Vec::with_capacity(len), &mut out);
    out
}

fn consecutive_gaps(chain: &[u32]) -> impl Iterator<Item = u32> + '_ {
    chain
        .iter()
        .enumerate()
        .map(move |(t, &m)| m - chain.get(t + 1).copied().unwrap_or(0))
}

/// Products of 1/(q)_d over a chain's gaps, cached per gap multiset.
struct DenominatorCache {
    order: usize,
    single: HashMap<u32, Vec<BigInt>>,
}

impl DenominatorCache {
    fn new(order: usize) -> Self {
        DenominatorCache {
            order,
            single: HashMap::new(),
        }
    }

    fn product(&mut self, gaps: impl Iterator<Item = u32>, n: usize) -> Vec<BigInt> {
        let mut acc = vec![BigInt::from(1)];
        for d in gaps {
            if d == 0 {
                continue;
            }
            let order = self.order;
            let factor = self
                .single
                .entry(d)
                .or_insert_with(|| inv_pochhammer_coeffs(d, order));
            acc = dense_mul(&acc, factor, n);
        }
        acc.resize(n + 1, BigInt::zero());
        acc
    }
}

fn quadratic_form(m: &[u32], n: &[u32]) -> i64 {
    m.iter()
        .zip(n)
        .map(|(&a, &b)| (a * a + b * b) as i64 - (a * b) as i64)
        .sum()
}

/// χ′ of W(iΛ0 + (k−i)Λj) from the quasiparticle sum.
pub fn georgiev_char(k: u32, i: u32, j: u32, envelope: Envelope) -> Result<Series, CharError> {
    if k == 0 || i > k || !(j == 1 || j == 2) {
        return Err(CharError::Range(format!(
            "georgiev_char needs k >= 1, 0 <= i <= k, j in {{1,2}}; got k={k}, i={i}, j={j}"
        )));
    }
    let mut out = Series::zero(envelope);
    if envelope.is_empty() || envelope.s_max < 0 {
        return Ok(out);
    }
    let s_max = envelope.s_max;
    let c = envelope.max_charge;
    let mut denominators = DenominatorCache::new(s_max as usize);
    let all = chains(k as usize, c);
    for m in &all {
        let sum_m: u32 = m.iter().sum();
        for n in &all {
            let sum_n: u32 = n.iter().sum();
            if sum_m + sum_n > c {
                continue;
            }
            let linear: u32 = (i as usize..k as usize)
                .map(|t| if j == 1 { m[t] } else { n[t] })
                .sum();
            let e = quadratic_form(m, n) + linear as i64;
            if e > s_max {
                continue;
            }
            let budget = (s_max - e) as usize;
            let series =
                denominators.product(consecutive_gaps(m).chain(consecutive_gaps(n)), budget);
            for (shift, coeff) in series.into_iter().enumerate() {
                out.add_term((sum_m, sum_n, e + shift as i64), coeff);
            }
        }
    }
    Ok(out)
}

/// Builds `transform(F)` exactly on `target`, computing F on the envelope the
/// transform requires.
pub(crate) fn transformed<F>(
    transform: Transform,
    target: Envelope,
    source: F,
) -> Result<Series, CharError>
where
    F: FnOnce(Envelope) -> Result<Series, CharError>,
{
    let Some(input) = transform.input_envelope(&target) else {
        return Ok(Series::zero(target));
    };
    let image = transform.apply(&source(input)?)?;
    Ok(image.restrict(target)?)
}

/// χ′ of W(kΛ1) as χ′_{W(kΛ0)}(x1 q, x2; q).
pub fn shift_char_lambda1(k: u32, envelope: Envelope) -> Result<Series, CharError> {
    transformed(Transform::new((0, 0, 0), (1, 0)), envelope, |e| {
        georgiev_char(k, k, 1, e)
    })
}

/// χ′ of W(kΛ2) as χ′_{W(kΛ0)}(x1, x2 q; q).
pub fn shift_char_lambda2(k: u32, envelope: Envelope) -> Result<Series, CharError> {
    transformed(Transform::new((0, 0, 0), (0, 1)), envelope, |e| {
        georgiev_char(k, k, 2, e)
    })
}

/// x_j^{-i} · [χ′_{upper} − χ′_{lower}] under the substitution `shift`,
/// checking that the bracket is divisible by x_j^i.
fn divided_difference(
    i: u32,
    j: u32,
    shift: (i64, i64),
    envelope: Envelope,
    upper: impl FnOnce(Envelope) -> Result<Series, CharError>,
    lower: impl FnOnce(Envelope) -> Result<Series, CharError>,
) -> Result<Series, CharError> {
    // The bracket must be known at charges up to C + i.
    let bracket_target = Envelope {
        max_charge: envelope.max_charge + i,
        ..envelope
    };
    let t = Transform::new((0, 0, 0), shift);
    let bracket = transformed(t, bracket_target, upper)? - transformed(t, bracket_target, lower)?;
    if let Some((&key, _)) = bracket
        .terms()
        .find(|((r1, r2, _), _)| if j == 1 { *r1 < i } else { *r2 < i })
    {
        return Err(CharError::CancellationFailure { i, key });
    }
    let (dr1, dr2) = if j == 1 {
        (-(i as i64), 0)
    } else {
        (0, -(i as i64))
    };
    Ok(bracket.scale_monomial(dr1, dr2, 0)?.restrict(envelope)?)
}

/// χ′ of W(iΛ1 + (k−i)Λ2), 1 ≤ i ≤ k, as
/// x1^{-i}[χ′_{W(iΛ0+(k−i)Λ1)} − χ′_{W((i−1)Λ0+(k−i+1)Λ1)}](x1 q^{-1}, x2 q; q).
pub fn char_i1_i2(k: u32, i: u32, envelope: Envelope) -> Result<Series, CharError> {
    if k == 0 || i == 0 || i > k {
        return Err(CharError::Range(format!(
            "char_i1_i2 needs 1 <= i <= k, got k={k}, i={i}"
        )));
    }
    divided_difference(
        i,
        1,
        (-1, 1),
        envelope,
        |e| georgiev_char(k, i, 1, e),
        |e| georgiev_char(k, i - 1, 1, e),
    )
}

/// The same character through the mirror relation: with i' = k − i ≥ 1,
/// χ′_{W(iΛ1+(k−i)Λ2)} = x2^{-i'}[χ′_{W(i'Λ0+iΛ2)} − χ′_{W((i'−1)Λ0+(i+1)Λ2)}](x1 q, x2 q^{-1}; q).
pub fn char_i1_i2_mirror(k: u32, i: u32, envelope: Envelope) -> Result<Series, CharError> {
    if k == 0 || i >= k {
        return Err(CharError::Range(format!(
            "the mirror route needs 0 <= i < k, got k={k}, i={i}"
        )));
    }
    let ip = k - i;
    divided_difference(
        ip,
        2,
        (1, -1),
        envelope,
        |e| georgiev_char(k, ip, 2, e),
        |e| georgiev_char(k, ip - 1, 2, e),
    )
}

/// Direct summation of the closed formula for W(iΛ1 + (k−i)Λ2), 1 ≤ i < k:
/// the sum over the same chains as the quasiparticle formula of
/// q^{Σ(M_t²+N_t²−M_tN_t) + Σ_{t>i} M_t + Σ(N_t−M_t)} (1 − q^{M_i}) / (q)-denominators
/// times x1^{ΣM_t − i} x2^{ΣN_t}.
pub fn char_i1_i2_direct(k: u32, i: u32, envelope: Envelope) -> Result<Series, CharError> {
    if k == 0 || i == 0 || i >= k {
        return Err(CharError::Range(format!(
            "direct summation needs 1 <= i < k, got k={k}, i={i}"
        )));
    }
    let mut out = Series::zero(envelope);
    if envelope.is_empty() || envelope.s_max < 0 {
        return Ok(out);
    }
    let c = envelope.max_charge + i;
    let s_max = envelope.s_max;
    let all = chains(k as usize, c);
    let mut denominators = DenominatorCache::new(s_max as usize);
    for m in &all {
        let sum_m: u32 = m.iter().sum();
        if sum_m < i {
            continue;
        }
        for n in &all {
            let sum_n: u32 = n.iter().sum();
            if sum_m - i + sum_n > envelope.max_charge {
                continue;
            }
            let tail: u32 = m[i as usize..].iter().sum();
            let e = quadratic_form(m, n) + tail as i64 + sum_n as i64 - sum_m as i64;
            // (1 − q^{M_i}) vanishes when M_i = 0.
            let mi = m[i as usize - 1] as i64;
            if mi == 0 || e > s_max {
                continue;
            }
            let series = denominators.product(
                consecutive_gaps(m).chain(consecutive_gaps(n)),
                (s_max - e.min(s_max)) as usize,
            );
            for (shift, coeff) in series.iter().enumerate() {
                let s = e + shift as i64;
                out.add_term((sum_m - i, sum_n, s), coeff.clone());
                out.add_term((sum_m - i, sum_n, s + mi), -coeff.clone());
            }
        }
    }
    Ok(out)
}

/// χ′ of the principal subspace named by `spec`.
pub fn char_of(spec: &CharSpec, envelope: Envelope) -> Result<Series, CharError> {
    let k = spec.level();
    let i = spec.i;
    match spec.family {
        Family::A => georgiev_char(k, i, 1, envelope),
        Family::B => georgiev_char(k, i, 2, envelope),
        Family::C if i == 0 => shift_char_lambda2(k, envelope),
        Family::C => char_i1_i2(k, i, envelope),
        Family::G => Err(CharError::UnsupportedFamily(spec.weight)),
    }
}

/// χ′ of W(weight), using the family [`CharSpec::classify`] picks.
pub fn char_of_weight(weight: AffineHW, envelope: Envelope) -> Result<Series, CharError> {
    char_of(&CharSpec::classify(weight), envelope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(c: u32, lo: i64, hi: i64) -> Envelope {
        Envelope::new(c, lo, hi).unwrap()
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn chains_are_descending_and_bounded() {
        let cs = chains(3, 4);
        assert!(cs
            .iter()
            .all(|c| c.windows(2).all(|w| w[0] >= w[1]) && c.iter().sum::<u32>() <= 4));
        assert_eq!(cs.first().unwrap(), &vec![4, 0, 0]);
        assert_eq!(cs.last().unwrap(), &vec![0, 0, 0]);
        // partitions of 0..=4 into at most 3 parts: 1+1+2+3+4
        assert_eq!(cs.len(), 11);
    }

    #[test]
    fn constant_term_is_one() {
        for k in 1..=3 {
            for i in 0..=k {
                for j in 1..=2 {
                    let ch = georgiev_char(k, i, j, env(2, 0, 4)).unwrap();
                    assert_eq!(ch.coefficient(0, 0, 0).unwrap(), big(1));
                }
            }
        }
    }

    #[test]
    fn level_one_vacuum_examples() {
        let ch = georgiev_char(1, 1, 1, env(3, 0, 6)).unwrap();
        for (s, c) in [(1, 1), (2, 2), (3, 3)] {
            assert_eq!(ch.coefficient(1, 1, s).unwrap(), big(c));
        }
        // charge (2,0) is q^4/(q)_2
        assert_eq!(ch.coefficient(2, 0, 3).unwrap(), big(0));
        assert_eq!(ch.coefficient(2, 0, 4).unwrap(), big(1));
    }

    #[test]
    fn level_one_lambda1_examples() {
        let ch = georgiev_char(1, 0, 1, env(3, 0, 6)).unwrap();
        assert_eq!(ch.coefficient(1, 0, 1).unwrap(), big(0));
        assert_eq!(ch.coefficient(1, 0, 2).unwrap(), big(1));
        let shifted = shift_char_lambda1(1, env(3, 0, 6)).unwrap();
        assert_eq!(shifted.coefficient(1, 0, 1).unwrap(), big(0));
        assert_eq!(shifted.coefficient(1, 0, 2).unwrap(), big(1));
        assert_eq!(shifted, ch);
        for k in 1..=3 {
            assert_eq!(
                shift_char_lambda1(k, env(2, 0, 5))
                    .unwrap()
                    .coefficient(0, 0, 0)
                    .unwrap(),
                big(1)
            );
            assert_eq!(
                shift_char_lambda2(k, env(2, 0, 5))
                    .unwrap()
                    .coefficient(0, 0, 0)
                    .unwrap(),
                big(1)
            );
        }
    }

    #[test]
    fn vacuum_character_ignores_j() {
        for k in 1..=3 {
            assert_eq!(
                georgiev_char(k, k, 1, env(4, 0, 8)).unwrap(),
                georgiev_char(k, k, 2, env(4, 0, 8)).unwrap()
            );
        }
    }

    #[test]
    fn dynkin_symmetry_transposes_charges() {
        for k in 1..=3 {
            for i in 0..=k {
                let a = georgiev_char(k, i, 1, env(4, 0, 8)).unwrap();
                let b = georgiev_char(k, i, 2, env(4, 0, 8)).unwrap();
                assert_eq!(a.compare(&b.transpose()).first_difference, None);
            }
        }
    }

    #[test]
    fn inverted_character_examples() {
        let e = env(3, 0, 8);
        assert_eq!(
            char_i1_i2(1, 1, e).unwrap(),
            shift_char_lambda1(1, e).unwrap()
        );
        for k in 1..=3 {
            for i in 1..=k {
                let ch = char_i1_i2(k, i, env(3, 0, 6)).unwrap();
                assert_eq!(ch.coefficient(0, 0, 0).unwrap(), big(1));
                assert!(!ch.has_negative_coefficient(), "k={k} i={i}");
            }
        }
    }

    #[test]
    fn both_routes_to_the_inverted_character_agree() {
        for k in 2..=3 {
            for i in 1..k {
                let e = env(4, 0, 8);
                let a = char_i1_i2(k, i, e).unwrap();
                let b = char_i1_i2_mirror(k, i, e).unwrap();
                assert_eq!(a.compare(&b).first_difference, None, "k={k} i={i}");
                assert_eq!(a.envelope(), &e);
            }
        }
        assert_eq!(
            char_i1_i2_mirror(1, 0, env(3, 0, 6)).unwrap(),
            shift_char_lambda2(1, env(3, 0, 6)).unwrap()
        );
    }

    #[test]
    fn direct_summation_matches_the_derived_route() {
        for k in 2..=3 {
            for i in 1..k {
                let e = env(4, 0, 8);
                let direct = char_i1_i2_direct(k, i, e).unwrap();
                assert_eq!(
                    direct
                        .compare(&char_i1_i2(k, i, e).unwrap())
                        .first_difference,
                    None,
                    "k={k} i={i}"
                );
            }
        }
    }

    #[test]
    fn dispatch() {
        let e = env(2, 0, 4);
        let a = CharSpec::new(Family::A, 1, 1).unwrap();
        assert_eq!(char_of(&a, e).unwrap(), georgiev_char(1, 1, 1, e).unwrap());
        let c = CharSpec::new(Family::C, 2, 1).unwrap();
        assert_eq!(char_of(&c, e).unwrap(), char_i1_i2(2, 1, e).unwrap());
        let g = CharSpec::classify(AffineHW::new(1, 1, 1).unwrap());
        assert_eq!(g.family(), Family::G);
        assert!(matches!(
            char_of(&g, e),
            Err(CharError::UnsupportedFamily(_))
        ));
        assert!(CharSpec::new(Family::A, 2, 5).is_err());
        assert_eq!(CharSpec::classify(AffineHW::new(0, 1, 1).unwrap()), c);
        assert_eq!(
            CharSpec::classify(AffineHW::new(1, 0, 1).unwrap()).family(),
            Family::B
        );
    }

    #[test]
    fn range_errors() {
        assert!(georgiev_char(0, 0, 1, env(1, 0, 1)).is_err());
        assert!(georgiev_char(2, 3, 1, env(1, 0, 1)).is_err());
        assert!(georgiev_char(2, 1, 3, env(1, 0, 1)).is_err());
        assert!(char_i1_i2(2, 0, env(1, 0, 1)).is_err());
    }

    #[test]
    fn prefactor_metadata() {
        let p = prefactor(&AffineHW::new(0, 1, 0).unwrap());
        assert_eq!(p.x1, Rational::new(big(2), big(3)));
        assert_eq!(p.q, Rational::new(big(5), big(24)));
    }
}
