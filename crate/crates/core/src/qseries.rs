//! Truncated formal series in (x1, x2, q) with big-integer coefficients.
//!
//! A [`Series`] stores the coefficients of x1^r1 x2^r2 q^s for every key
//! inside its [`Envelope`]: total charge r1 + r2 bounded by `max_charge` and
//! s inside the window [s_min, s_max]. Inside the envelope every coefficient is
//! exact (a missing key means a genuine zero); outside it nothing is known.
//! Operations that move exponents around return the envelope on which their
//! result is still exact, so comparisons never mistake truncation for zero.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Exponent triple (r1, r2, s).
pub type Key = (u32, u32, i64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("invalid envelope: q-window [{s_min}, {s_max}] is empty")]
    InvalidEnvelope { s_min: i64, s_max: i64 },
    #[error("charge bound would become negative ({0})")]
    NegativeChargeBound(i64),
    #[error("term x1^{r1} x2^{r2} q^{s} would acquire a negative charge exponent")]
    NegativeChargeExponent { r1: i64, r2: i64, s: i64 },
    #[error("coefficient ({r1}, {r2}, {s}) lies outside the envelope")]
    OutOfWindow { r1: u32, r2: u32, s: i64 },
    #[error("malformed series JSON: {0}")]
    Json(String),
}

/// Region on which a series' coefficients are known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Envelope {
    pub max_charge: u32,
    pub s_min: i64,
    pub s_max: i64,
}

impl Envelope {
    pub fn new(max_charge: u32, s_min: i64, s_max: i64) -> Result<Self, SeriesError> {
        if s_min > s_max {
            return Err(SeriesError::InvalidEnvelope { s_min, s_max });
        }
        Ok(Envelope {
            max_charge,
            s_min,
            s_max,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.s_min > self.s_max
    }

    pub fn contains(&self, r1: u32, r2: u32, s: i64) -> bool {
        r1 as u64 + r2 as u64 <= self.max_charge as u64 && self.s_min <= s && s <= self.s_max
    }

    pub fn intersect(&self, other: &Envelope) -> Envelope {
        Envelope {
            max_charge: self.max_charge.min(other.max_charge),
            s_min: self.s_min.max(other.s_min),
            s_max: self.s_max.min(other.s_max),
        }
    }

    /// True when `other` is a sub-envelope of `self`.
    pub fn covers(&self, other: &Envelope) -> bool {
        other.is_empty()
            || (other.max_charge <= self.max_charge
                && self.s_min <= other.s_min
                && other.s_max <= self.s_max)
    }

    /// Every charge pair (r1, r2) allowed by the envelope.
    pub fn charges(&self) -> impl Iterator<Item = (u32, u32)> {
        let c = self.max_charge;
        (0..=c).flat_map(move |total| (0..=total).rev().map(move |r1| (r1, total - r1)))
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r1+r2<={}, s in [{}, {}]",
            self.max_charge, self.s_min, self.s_max
        )
    }
}

/// Smallest q-order to which the inputs of an identity involving
/// substitutions x_i -> x_i q^a (|a| <= `max_abs_shift`) must be known so that
/// the result is exact up to `target_s_max` at charges up to `max_charge`.
pub fn required_q_order(target_s_max: i64, max_abs_shift: u32, max_charge: u32) -> i64 {
    target_s_max + max_abs_shift as i64 * max_charge as i64
}

#[derive(Debug, Clone)]
pub struct Series {
    envelope: Envelope,
    terms: BTreeMap<Key, BigInt>,
}

/// Outcome of comparing two series on their common envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agreement {
    pub envelope: Envelope,
    /// First key (in canonical order) where the coefficients differ.
    pub first_difference: Option<(Key, BigInt, BigInt)>,
}

impl Agreement {
    pub fn equal(&self) -> bool {
        !self.envelope.is_empty() && self.first_difference.is_none()
    }
}

impl Series {
    pub fn zero(envelope: Envelope) -> Series {
        Series {
            envelope,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(envelope: Envelope) -> Series {
        Series::monomial(envelope, 0, 0, 0, BigInt::one())
    }

    /// c·x1^r1 x2^r2 q^s, dropped if it falls outside the envelope.
    pub fn monomial(envelope: Envelope, r1: u32, r2: u32, s: i64, c: BigInt) -> Series {
        Series::from_terms(envelope, [((r1, r2, s), c)])
    }

    /// Sums the given terms, keeping those inside the envelope.
    pub fn from_terms(
        envelope: Envelope,
        terms: impl IntoIterator<Item = (Key, BigInt)>,
    ) -> Series {
        let mut out = Series::zero(envelope);
        for (key, c) in terms {
            out.add_term(key, c);
        }
        out
    }

    pub(crate) fn add_term(&mut self, key: Key, c: BigInt) {
        if c.is_zero() || !self.envelope.contains(key.0, key.1, key.2) {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Nonzero terms in canonical (r1, r2, s) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Key, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn first_nonzero(&self) -> Option<(Key, BigInt)> {
        self.terms.iter().next().map(|(k, c)| (*k, c.clone()))
    }

    /// Coefficient of x1^r1 x2^r2 q^s; errors outside the envelope, where the
    /// value is unknown rather than zero.
    pub fn coefficient(&self, r1: u32, r2: u32, s: i64) -> Result<BigInt, SeriesError> {
        if !self.envelope.contains(r1, r2, s) {
            return Err(SeriesError::OutOfWindow { r1, r2, s });
        }
        Ok(self.terms.get(&(r1, r2, s)).cloned().unwrap_or_default())
    }

    pub fn has_negative_coefficient(&self) -> bool {
        self.terms.values().any(|c| c.is_negative())
    }

    /// Truncates to a sub-envelope.
    pub fn restrict(&self, envelope: Envelope) -> Result<Series, SeriesError> {
        if !self.envelope.covers(&envelope) {
            return Err(SeriesError::InvalidEnvelope {
                s_min: envelope.s_min,
                s_max: envelope.s_max,
            });
        }
        Ok(self.truncate_to(envelope))
    }

    fn truncate_to(&self, envelope: Envelope) -> Series {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| envelope.contains(k.0, k.1, k.2))
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        Series { envelope, terms }
    }

    /// Multiplies by x1^dr1 x2^dr2 q^ds.
    ///
    /// A negative x-exponent is allowed only when every affected term is
    /// known to vanish; otherwise the identity being assembled is misused.
    pub fn scale_monomial(&self, dr1: i64, dr2: i64, ds: i64) -> Result<Series, SeriesError> {
        let new_charge = self.envelope.max_charge as i64 + dr1 + dr2;
        if new_charge < 0 {
            return Err(SeriesError::NegativeChargeBound(new_charge));
        }
        let envelope = Envelope {
            max_charge: new_charge as u32,
            s_min: self.envelope.s_min + ds,
            s_max: self.envelope.s_max + ds,
        };
        let mut out = Series::zero(envelope);
        for (&(r1, r2, s), c) in &self.terms {
            let (n1, n2) = (r1 as i64 + dr1, r2 as i64 + dr2);
            if n1 < 0 || n2 < 0 {
                return Err(SeriesError::NegativeChargeExponent {
                    r1: n1,
                    r2: n2,
                    s: s + ds,
                });
            }
            out.add_term((n1 as u32, n2 as u32, s + ds), c.clone());
        }
        Ok(out)
    }

    /// The substitution x1 -> x1 q^a1, x2 -> x2 q^a2.
    ///
    /// Term (r1, r2, s) moves to (r1, r2, s + a1 r1 + a2 r2). The returned
    /// envelope is the window on which the image is still exact, which is
    /// narrower than the input window by the largest shift in each direction.
    pub fn subst_q_shift(&self, a1: i64, a2: i64) -> Series {
        let c = self.envelope.max_charge as i64;
        let (lo, hi) = shift_range(a1, a2, c);
        let envelope = Envelope {
            max_charge: self.envelope.max_charge,
            s_min: self.envelope.s_min + hi,
            s_max: self.envelope.s_max + lo,
        };
        let mut out = Series::zero(envelope);
        for (&(r1, r2, s), coeff) in &self.terms {
            out.add_term((r1, r2, s + a1 * r1 as i64 + a2 * r2 as i64), coeff.clone());
        }
        out
    }

    /// Exchanges x1 and x2.
    pub fn transpose(&self) -> Series {
        let terms = self
            .terms
            .iter()
            .map(|(&(r1, r2, s), c)| ((r2, r1, s), c.clone()))
            .collect();
        Series {
            envelope: self.envelope,
            terms,
        }
    }

    /// Compares coefficients on the intersection of the two envelopes.
    pub fn compare(&self, other: &Series) -> Agreement {
        let envelope = self.envelope.intersect(&other.envelope);
        if envelope.is_empty() {
            return Agreement {
                envelope,
                first_difference: None,
            };
        }
        let a = self.truncate_to(envelope);
        let b = other.truncate_to(envelope);
        let mut first = None;
        for key in a.terms.keys().chain(b.terms.keys()) {
            let ca = a.terms.get(key).cloned().unwrap_or_default();
            let cb = b.terms.get(key).cloned().unwrap_or_default();
            if ca != cb && first.as_ref().is_none_or(|(k, _, _)| key < k) {
                first = Some((*key, ca, cb));
            }
        }
        Agreement {
            envelope,
            first_difference: first,
        }
    }

    fn combine(&self, other: &Series, sign: i8) -> Series {
        let envelope = self.envelope.intersect(&other.envelope);
        let mut out = self.truncate_to(envelope);
        for (k, c) in &other.terms {
            out.add_term(*k, if sign < 0 { -c.clone() } else { c.clone() });
        }
        out
    }

    /// Product, assuming neither operand has support below its window (true
    /// for characters and Pochhammer expansions). The result is exact from
    /// the sum of the lower ends up to the point where an unknown high term
    /// of one factor could meet the lowest term of the other; for windows
    /// starting at 0 this is the intersection of the two windows.
    fn product(&self, other: &Series) -> Series {
        let (a, b) = (&self.envelope, &other.envelope);
        let envelope = Envelope {
            max_charge: a.max_charge.min(b.max_charge),
            s_min: a.s_min + b.s_min,
            s_max: (a.s_max + b.s_min).min(b.s_max + a.s_min),
        };
        let mut out = Series::zero(envelope);
        for (&(a1, a2, as_), ca) in &self.terms {
            for (&(b1, b2, bs), cb) in &other.terms {
                let (r1, r2, s) = (a1 + b1, a2 + b2, as_ + bs);
                if s > envelope.s_max || r1 + r2 > envelope.max_charge {
                    continue;
                }
                out.add_term((r1, r2, s), ca * cb);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SeriesJson::from(self)).expect("series JSON serialization")
    }

    pub fn from_json(text: &str) -> Result<Series, SeriesError> {
        let raw: SeriesJson =
            serde_json::from_str(text).map_err(|e| SeriesError::Json(e.to_string()))?;
        let envelope = Envelope::new(raw.max_charge, raw.q_window[0], raw.q_window[1])?;
        let mut terms = BTreeMap::new();
        for t in raw.terms {
            let c: BigInt =
                t.c.parse()
                    .map_err(|_| SeriesError::Json(format!("bad coefficient {:?}", t.c)))?;
            if !envelope.contains(t.r1, t.r2, t.s) {
                return Err(SeriesError::OutOfWindow {
                    r1: t.r1,
                    r2: t.r2,
                    s: t.s,
                });
            }
            if c.is_zero() {
                return Err(SeriesError::Json(format!(
                    "zero coefficient stored at ({}, {}, {})",
                    t.r1, t.r2, t.s
                )));
            }
            if terms.insert((t.r1, t.r2, t.s), c).is_some() {
                return Err(SeriesError::Json(format!(
                    "duplicate key ({}, {}, {})",
                    t.r1, t.r2, t.s
                )));
            }
        }
        Ok(Series { envelope, terms })
    }
}

/// (min, max) of a1 r1 + a2 r2 over r1, r2 >= 0 with r1 + r2 <= c.
fn shift_range(a1: i64, a2: i64, c: i64) -> (i64, i64) {
    let corners = [0, a1 * c, a2 * c];
    (
        *corners.iter().min().unwrap(),
        *corners.iter().max().unwrap(),
    )
}

/// Series are equal when their envelopes overlap and every coefficient on
/// the overlap agrees.
impl PartialEq for Series {
    fn eq(&self, other: &Series) -> bool {
        self.compare(other).equal()
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(r1, r2, s), c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            if r1 > 0 {
                factors.push(if r1 == 1 {
                    "x1".to_string()
                } else {
                    format!("x1^{r1}")
                });
            }
            if r2 > 0 {
                factors.push(if r2 == 1 {
                    "x2".to_string()
                } else {
                    format!("x2^{r2}")
                });
            }
            if s != 0 {
                factors.push(if s == 1 {
                    "q".to_string()
                } else {
                    format!("q^{s}")
                });
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Series> for &Series {
            type Output = Series;
            fn $method(self, rhs: &Series) -> Series {
                $body(self, rhs)
            }
        }
        impl $trait<Series> for Series {
            type Output = Series;
            fn $method(self, rhs: Series) -> Series {
                $body(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Series, b: &Series| a.combine(b, 1));
forward_binop!(Sub, sub, |a: &Series, b: &Series| a.combine(b, -1));
forward_binop!(Mul, mul, |a: &Series, b: &Series| a.product(b));

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        let terms = self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect();
        Series {
            envelope: self.envelope,
            terms,
        }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    #[serde(rename = "maxCharge")]
    max_charge: u32,
    #[serde(rename = "qWindow")]
    q_window: [i64; 2],
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    r1: u32,
    r2: u32,
    s: i64,
    c: String,
}

impl From<&Series> for SeriesJson {
    fn from(series: &Series) -> Self {
        SeriesJson {
            max_charge: series.envelope.max_charge,
            q_window: [series.envelope.s_min, series.envelope.s_max],
            terms: series
                .terms
                .iter()
                .map(|(&(r1, r2, s), c)| TermJson {
                    r1,
                    r2,
                    s,
                    c: c.to_string(),
                })
                .collect(),
        }
    }
}

/// Coefficients of 1/(q)_m up to q^n inclusive (partitions into at most m parts).
pub(crate) fn inv_pochhammer_coeffs(m: u32, n: usize) -> Vec<BigInt> {
    let mut a = vec![BigInt::zero(); n + 1];
    a[0] = BigInt::one();
    for j in 1..=m as usize {
        for idx in j..=n {
            let prev = a[idx - j].clone();
            a[idx] += prev;
        }
    }
    a
}

/// 1/(q)_m = 1/((1-q)(1-q^2)...(1-q^m)) expanded up to q^s_max.
pub fn inv_pochhammer(m: u32, s_max: u32) -> Series {
    let envelope = Envelope {
        max_charge: 0,
        s_min: 0,
        s_max: s_max as i64,
    };
    let coeffs = inv_pochhammer_coeffs(m, s_max as usize);
    Series::from_terms(
        envelope,
        coeffs
            .into_iter()
            .enumerate()
            .map(|(s, c)| ((0, 0, s as i64), c)),
    )
}

/// Truncated product of dense univariate q-series, keeping q^0..=q^n.
pub(crate) fn dense_mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let len = n + 1;
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// A term c·x1^dr1 x2^dr2 q^ds · F(x1 q^a1, x2 q^a2) in an identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transform {
    pub monomial: (i64, i64, i64),
    pub shift: (i64, i64),
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        monomial: (0, 0, 0),
        shift: (0, 0),
    };

    pub fn new(monomial: (i64, i64, i64), shift: (i64, i64)) -> Self {
        Transform { monomial, shift }
    }

    pub fn max_abs_shift(&self) -> u32 {
        self.shift.0.unsigned_abs().max(self.shift.1.unsigned_abs()) as u32
    }

    /// Envelope to which F must be known so that the transformed term is
    /// exact on `target`. `None` when every charge the term can reach lies
    /// above the target's charge bound, so the term vanishes there.
    pub fn input_envelope(&self, target: &Envelope) -> Option<Envelope> {
        let (dr1, dr2, ds) = self.monomial;
        let charge = target.max_charge as i64 - dr1 - dr2;
        if charge < 0 {
            return None;
        }
        let (_, hi) = shift_range(self.shift.0, self.shift.1, charge);
        Some(Envelope {
            max_charge: charge as u32,
            s_min: target.s_min - ds - hi,
            s_max: required_q_order(target.s_max - ds, self.max_abs_shift(), charge as u32),
        })
    }

    pub fn apply(&self, f: &Series) -> Result<Series, SeriesError> {
        let (dr1, dr2, ds) = self.monomial;
        f.subst_q_shift(self.shift.0, self.shift.1)
            .scale_monomial(dr1, dr2, ds)
    }
}
