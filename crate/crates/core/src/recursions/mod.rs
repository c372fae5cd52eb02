//! q-difference identities among the characters, verified as residuals.
//!
//! Every identity is written as a signed sum of terms
//! x1^a x2^b q^c · χ′_{W(Λ)}(x1 q^{a1}, x2 q^{a2}; q). Identities with a
//! negative x-power in front of some term are multiplied through first so
//! that all exponents stay natural. The residual is computed on a target
//! window [−m·C, S] (m the largest |a_i|); each character is computed to the
//! order `required_q_order` asks for, and the final envelope is checked to
//! cover the target before anything is reported as verified.

pub mod dsl;

use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::characters::{char_i1_i2_mirror, char_of_weight, transformed, CharError};
use crate::qseries::{Envelope, Series, SeriesError, Transform};
use crate::root_data::AffineHW;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecursionError {
    #[error("parameters out of range for {tag}: {reason}")]
    ParameterRange { tag: IdentityTag, reason: String },
    #[error("identity assembly failed: {0}")]
    Assembly(#[from] SeriesError),
    #[error(transparent)]
    Character(CharError),
    #[error("residual envelope {got} does not cover the target window {want}")]
    WindowNotCertified { got: Envelope, want: Envelope },
}

impl From<CharError> for RecursionError {
    fn from(e: CharError) -> Self {
        match e {
            CharError::Series(s) => RecursionError::Assembly(s),
            other => RecursionError::Character(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IdentityTag {
    #[serde(rename = "SHIFT1")]
    Shift1,
    #[serde(rename = "SHIFT2")]
    Shift2,
    #[serde(rename = "SEQ1")]
    Seq1,
    #[serde(rename = "SEQ2")]
    Seq2,
    #[serde(rename = "INV1")]
    Inv1,
    #[serde(rename = "INV2")]
    Inv2,
    #[serde(rename = "FOUR1")]
    Four1,
    #[serde(rename = "FOUR2")]
    Four2,
    #[serde(rename = "BOUNDARY")]
    Boundary,
    #[serde(rename = "LEVEL1A")]
    Level1A,
    #[serde(rename = "LEVEL1B")]
    Level1B,
}

impl IdentityTag {
    pub const ALL: [IdentityTag; 11] = [
        IdentityTag::Shift1,
        IdentityTag::Shift2,
        IdentityTag::Seq1,
        IdentityTag::Seq2,
        IdentityTag::Inv1,
        IdentityTag::Inv2,
        IdentityTag::Four1,
        IdentityTag::Four2,
        IdentityTag::Boundary,
        IdentityTag::Level1A,
        IdentityTag::Level1B,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityTag::Shift1 => "SHIFT1",
            IdentityTag::Shift2 => "SHIFT2",
            IdentityTag::Seq1 => "SEQ1",
            IdentityTag::Seq2 => "SEQ2",
            IdentityTag::Inv1 => "INV1",
            IdentityTag::Inv2 => "INV2",
            IdentityTag::Four1 => "FOUR1",
            IdentityTag::Four2 => "FOUR2",
            IdentityTag::Boundary => "BOUNDARY",
            IdentityTag::Level1A => "LEVEL1A",
            IdentityTag::Level1B => "LEVEL1B",
        }
    }

    pub fn takes_index(&self) -> bool {
        matches!(
            self,
            IdentityTag::Seq1
                | IdentityTag::Seq2
                | IdentityTag::Inv1
                | IdentityTag::Inv2
                | IdentityTag::Four1
                | IdentityTag::Four2
        )
    }

    /// Admissible values of i at level k (a single `None` for identities
    /// without an index; empty when the identity does not exist at level k).
    pub fn indices(&self, k: u32) -> Vec<Option<u32>> {
        match self {
            IdentityTag::Seq1 | IdentityTag::Seq2 | IdentityTag::Inv1 | IdentityTag::Inv2 => {
                (1..=k).map(Some).collect()
            }
            IdentityTag::Four1 | IdentityTag::Four2 => (1..k).map(Some).collect(),
            IdentityTag::Level1A | IdentityTag::Level1B if k != 1 => vec![],
            _ if k == 0 => vec![],
            _ => vec![None],
        }
    }
}

impl fmt::Display for IdentityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for IdentityTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        IdentityTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown identity {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdentityId {
    pub tag: IdentityTag,
    pub k: u32,
    pub i: Option<u32>,
}

impl IdentityId {
    pub fn new(tag: IdentityTag, k: u32, i: Option<u32>) -> Result<IdentityId, RecursionError> {
        let range = |reason: String| RecursionError::ParameterRange { tag, reason };
        if k == 0 {
            return Err(range("level must be at least 1".into()));
        }
        match (tag.takes_index(), i) {
            (true, None) => return Err(range("an index i is required".into())),
            (false, Some(_)) => return Err(range("this identity takes no index".into())),
            _ => {}
        }
        if !tag.indices(k).contains(&i) {
            let reason = match tag {
                IdentityTag::Four1 | IdentityTag::Four2 => {
                    format!("needs 1 <= i < k, got i={}, k={k}", i.unwrap_or(0))
                }
                IdentityTag::Level1A | IdentityTag::Level1B => {
                    format!("only exists at level 1, got k={k}")
                }
                _ => format!("needs 1 <= i <= k, got i={}, k={k}", i.unwrap_or(0)),
            };
            return Err(range(reason));
        }
        Ok(IdentityId { tag, k, i })
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.i {
            Some(i) => write!(f, "{}(k={}, i={})", self.tag, self.k, i),
            None => write!(f, "{}(k={})", self.tag, self.k),
        }
    }
}

/// Where a term's character comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// The character the family dispatch assigns to this weight.
    Weight(AffineHW),
    /// W(iΛ1 + (k−i)Λ2) through the mirror inversion (needs i < k).
    Mirror { k: u32, i: u32 },
    /// The character of this weight with x1 and x2 exchanged.
    Transposed(AffineHW),
}

impl Source {
    fn compute(&self, envelope: Envelope) -> Result<Series, CharError> {
        match *self {
            Source::Weight(w) => char_of_weight(w, envelope),
            Source::Mirror { k, i } => char_i1_i2_mirror(k, i, envelope),
            Source::Transposed(w) => Ok(char_of_weight(w, envelope)?.transpose()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub sign: i8,
    pub transform: Transform,
    pub source: Source,
}

/// Extra term added to one side of an identity; used to exercise the
/// failure path of the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub r1: u32,
    pub r2: u32,
    pub s: i64,
}

fn hw(k0: u32, k1: u32, k2: u32) -> Source {
    Source::Weight(AffineHW { k0, k1, k2 })
}

fn term(sign: i8, monomial: (i64, i64, i64), shift: (i64, i64), source: Source) -> Term {
    Term {
        sign,
        transform: Transform::new(monomial, shift),
        source,
    }
}

/// The identity as a list of terms whose sum must vanish.
pub fn terms_of(id: &IdentityId) -> Vec<Term> {
    let k = id.k;
    let i = id.i.unwrap_or(0);
    let (ki, ii) = (k as i64, i as i64);
    let a = |i0: u32| hw(i0, k - i0, 0);
    let b = |i0: u32| hw(i0, 0, k - i0);
    // W(i'Λ1 + (k−i')Λ2): for i' = k this is W(kΛ1), whose formula is direct.
    let c = |ip: u32| hw(0, ip, k - ip);
    match id.tag {
        IdentityTag::Shift1 => vec![
            term(1, (0, 0, 0), (0, 0), a(0)),
            term(-1, (0, 0, 0), (1, 0), a(k)),
        ],
        IdentityTag::Shift2 => vec![
            term(1, (0, 0, 0), (0, 0), b(0)),
            term(-1, (0, 0, 0), (0, 1), b(k)),
        ],
        IdentityTag::Seq1 => vec![
            term(1, (0, 0, 0), (0, 0), a(i)),
            term(-1, (ii, 0, ii), (1, -1), c(i)),
            term(-1, (0, 0, 0), (0, 0), a(i - 1)),
        ],
        IdentityTag::Seq2 => vec![
            term(1, (0, 0, 0), (0, 0), b(i)),
            term(-1, (0, ii, ii), (-1, 1), c(k - i)),
            term(-1, (0, 0, 0), (0, 0), b(i - 1)),
        ],
        // x1^i χ′_{W(iΛ1+(k−i)Λ2)} = [χ′_{A(i)} − χ′_{A(i−1)}](x1 q^{-1}, x2 q),
        // with the left side taken from the mirror route when i < k.
        IdentityTag::Inv1 => vec![
            term(
                1,
                (ii, 0, 0),
                (0, 0),
                if i < k { Source::Mirror { k, i } } else { c(k) },
            ),
            term(-1, (0, 0, 0), (-1, 1), a(i)),
            term(1, (0, 0, 0), (-1, 1), a(i - 1)),
        ],
        IdentityTag::Inv2 => vec![
            term(1, (0, ii, 0), (0, 0), c(k - i)),
            term(-1, (0, 0, 0), (1, -1), b(i)),
            term(1, (0, 0, 0), (1, -1), b(i - 1)),
        ],
        // Multiplied through by x2^{k−i}.
        IdentityTag::Four1 => vec![
            term(1, (0, ki - ii, 0), (0, 0), a(i)),
            term(-1, (0, ki - ii, 0), (0, 0), a(i - 1)),
            term(1, (ii, 0, ki), (2, -2), b(k - i - 1)),
            term(-1, (ii, 0, ki), (2, -2), b(k - i)),
        ],
        // Multiplied through by x1^{k−i}.
        IdentityTag::Four2 => vec![
            term(1, (ki - ii, 0, 0), (0, 0), b(i)),
            term(-1, (ki - ii, 0, 0), (0, 0), b(i - 1)),
            term(1, (0, ii, ki), (-2, 2), a(k - i - 1)),
            term(-1, (0, ii, ki), (-2, 2), a(k - i)),
        ],
        IdentityTag::Boundary => vec![
            term(1, (0, 0, 0), (0, 0), a(k - 1)),
            term(-1, (0, 0, 0), (0, 0), b(k - 1)),
            term(1, (ki, 0, ki), (1, -1), a(0)),
            term(-1, (0, ki, ki), (-1, 1), b(0)),
        ],
        IdentityTag::Level1A => vec![
            term(1, (0, 0, 0), (0, 0), a(1)),
            term(-1, (0, 0, 0), (1, 0), a(1)),
            term(-1, (1, 0, 1), (2, -1), a(1)),
        ],
        IdentityTag::Level1B => vec![
            term(1, (0, 0, 0), (0, 0), a(1)),
            term(-1, (0, 0, 0), (0, 1), a(1)),
            term(-1, (0, 1, 1), (-1, 2), a(1)),
        ],
    }
}

/// Target window for a residual with the given largest |shift|.
pub fn target_envelope(max_abs_shift: u32, max_charge: u32, s_max: i64) -> Envelope {
    Envelope {
        max_charge,
        s_min: (-(max_abs_shift as i64) * max_charge as i64).min(0),
        s_max,
    }
}

/// Sums the terms on `target`, computing each character to the order its
/// transform requires.
pub(crate) fn assemble(
    terms: &[Term],
    target: Envelope,
    fault: Option<Fault>,
) -> Result<Series, RecursionError> {
    let mut total = Series::zero(target);
    let mut covered = Envelope {
        max_charge: u32::MAX,
        s_min: i64::MIN,
        s_max: i64::MAX,
    };
    for (n, t) in terms.iter().enumerate() {
        let mut image = transformed(t.transform, target, |e| t.source.compute(e))?;
        if n == 0 {
            if let Some(f) = fault {
                image = &image + &Series::monomial(target, f.r1, f.r2, f.s, BigInt::from(1));
            }
        }
        covered = covered.intersect(image.envelope());
        total = if t.sign < 0 {
            &total - &image
        } else {
            &total + &image
        };
    }
    if !covered.covers(&target) {
        return Err(RecursionError::WindowNotCertified {
            got: covered,
            want: target,
        });
    }
    Ok(total.restrict(target)?)
}

fn max_abs_shift(terms: &[Term]) -> u32 {
    terms
        .iter()
        .map(|t| t.transform.max_abs_shift())
        .max()
        .unwrap_or(0)
}

/// Left side minus right side of the identity on its certified window.
pub fn residual(id: &IdentityId, max_charge: u32, s_max: i64) -> Result<Series, RecursionError> {
    residual_with_fault(id, max_charge, s_max, None)
}

pub fn residual_with_fault(
    id: &IdentityId,
    max_charge: u32,
    s_max: i64,
    fault: Option<Fault>,
) -> Result<Series, RecursionError> {
    let terms = terms_of(id);
    let target = target_envelope(max_abs_shift(&terms), max_charge, s_max);
    assemble(&terms, target, fault)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstFailure {
    pub r1: u32,
    pub r2: u32,
    pub s: i64,
    /// Residual coefficient, as a decimal string.
    pub c: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertifiedWindow {
    #[serde(rename = "C")]
    pub max_charge: u32,
    #[serde(rename = "sMin")]
    pub s_min: i64,
    #[serde(rename = "sMax")]
    pub s_max: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityResult {
    pub id: IdentityTag,
    pub i: Option<u32>,
    pub pass: bool,
    #[serde(rename = "certifiedWindow")]
    pub certified_window: Option<CertifiedWindow>,
    #[serde(rename = "firstFailure")]
    pub first_failure: Option<FirstFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Window {
    #[serde(rename = "C")]
    pub max_charge: u32,
    #[serde(rename = "sMax")]
    pub s_max: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub level: u32,
    pub window: Window,
    pub results: Vec<IdentityResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report JSON serialization")
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "level {}  window C={} sMax={}\n",
            self.level, self.window.max_charge, self.window.s_max
        );
        out.push_str(&format!(
            "{:<10} {:>3}  {:<6} {:<22} {}\n",
            "identity", "i", "result", "certified window", "first failure"
        ));
        for r in &self.results {
            let window = r
                .certified_window
                .as_ref()
                .map(|w| format!("C={} s=[{},{}]", w.max_charge, w.s_min, w.s_max))
                .unwrap_or_else(|| "-".into());
            let failure = match (&r.first_failure, &r.error) {
                (Some(f), _) => format!("({},{},{}) -> {}", f.r1, f.r2, f.s, f.c),
                (None, Some(e)) => e.clone(),
                _ => "-".into(),
            };
            out.push_str(&format!(
                "{:<10} {:>3}  {:<6} {:<22} {}\n",
                r.id.name(),
                r.i.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
                if r.pass { "pass" } else { "FAIL" },
                window,
                failure
            ));
        }
        out
    }
}

/// Runs one identity and packages the outcome.
pub fn check(id: &IdentityId, max_charge: u32, s_max: i64, fault: Option<Fault>) -> IdentityResult {
    match residual_with_fault(id, max_charge, s_max, fault) {
        Ok(res) => {
            let e = res.envelope();
            IdentityResult {
                id: id.tag,
                i: id.i,
                pass: res.is_zero(),
                certified_window: Some(CertifiedWindow {
                    max_charge: e.max_charge,
                    s_min: e.s_min,
                    s_max: e.s_max,
                }),
                first_failure: res.first_nonzero().map(|((r1, r2, s), c)| FirstFailure {
                    r1,
                    r2,
                    s,
                    c: c.to_string(),
                }),
                error: None,
            }
        }
        Err(err) => IdentityResult {
            id: id.tag,
            i: id.i,
            pass: false,
            certified_window: None,
            first_failure: None,
            error: Some(err.to_string()),
        },
    }
}

/// Every identity valid at level k, for every admissible i, sorted by (tag, i).
pub fn identities_at(k: u32) -> Vec<IdentityId> {
    IdentityTag::ALL
        .iter()
        .flat_map(|&tag| {
            tag.indices(k)
                .into_iter()
                .map(move |i| IdentityId { tag, k, i })
        })
        .collect()
}

pub fn verify_all(k: u32, max_charge: u32, s_max: i64) -> VerificationReport {
    verify_selected(k, &identities_at(k), max_charge, s_max, None)
}

pub fn verify_selected(
    k: u32,
    ids: &[IdentityId],
    max_charge: u32,
    s_max: i64,
    fault: Option<Fault>,
) -> VerificationReport {
    let mut ids = ids.to_vec();
    ids.sort();
    VerificationReport {
        level: k,
        window: Window { max_charge, s_max },
        results: ids
            .iter()
            .map(|id| check(id, max_charge, s_max, fault))
            .collect(),
    }
}
