//! Brute-force graded dimensions from the lattice realization.
//!
//! A level-k module sits inside the k-th tensor power of V_P = M(1) ⊗ C[P].
//! A basis element of one factor is a Heisenberg monomial in the creation
//! operators α_dir(−n) times a lattice point e^μ. The root vector x_{αj}(m)
//! acts on a single factor through the vertex operator
//!
//! ```text
//! Y(e^{αj}, z) = E^−(−αj, z) E^+(−αj, z) e^{αj} z^{αj} ε(αj, ·)
//! ```
//!
//! and on the tensor product as the sum over factors. The principal subspace
//! W(Λ) is spanned by words in x_{α1}(m), x_{α2}(m) applied to v_Λ; its graded
//! pieces are found by closing under those modes charge layer by charge layer
//! and keeping an exact echelon basis per grading block.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::qseries::{Agreement, Envelope, Series};
use crate::root_data::{AffineHW, Rational, Weight};

/// Bump whenever the meaning of cached dimensions changes.
pub const CACHE_FORMAT_VERSION: u32 = 1;

pub const DEFAULT_BUDGET: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("window too large for {weight}: k·C·S = {cost} exceeds the budget {budget}")]
    BudgetExceeded {
        weight: AffineHW,
        cost: u64,
        budget: u64,
    },
    #[error("index i = {i} must lie in 1..={k}")]
    IndexRange { k: u32, i: u32 },
    #[error("cache error at {path}: {message}")]
    Cache { path: PathBuf, message: String },
}

/// One tensor factor: a Heisenberg monomial (sorted (n, dir) pairs, with
/// repetition) times a lattice point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub heis: Vec<(u32, u8)>,
    pub point: Weight,
}

impl Factor {
    pub fn vacuum(point: Weight) -> Factor {
        Factor {
            heis: Vec::new(),
            point,
        }
    }

    pub fn degree(&self) -> u32 {
        self.heis.iter().map(|&(n, _)| n).sum()
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, dir) in &self.heis {
            write!(f, "α{dir}(-{n})")?;
        }
        write!(f, "e^({},{})", self.point.c1, self.point.c2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisElement {
    pub factors: Vec<Factor>,
}

impl fmt::Display for FockBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, factor) in self.factors.iter().enumerate() {
            if t > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FockVector {
    terms: BTreeMap<FockBasisElement, Rational>,
}

impl FockVector {
    pub fn basis(element: FockBasisElement) -> FockVector {
        let mut terms = BTreeMap::new();
        terms.insert(element, Rational::one());
        FockVector { terms }
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

    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisElement, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, element: &FockBasisElement) -> Rational {
        self.terms
            .get(element)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, element: FockBasisElement, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(element);
        match slot {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn leading(&self) -> Option<(&FockBasisElement, &Rational)> {
        self.terms.iter().next_back()
    }
}

/// The two admissible normalizations of the sign cocycle ε: Q × P → {±1}.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cocycle {
    /// ε(α2, μ) = (−1)^{⟨α2, μ⟩}, ε(α1, ·) = 1.
    #[default]
    Standard,
    /// ε(α1, μ) = (−1)^{⟨α1, μ⟩}, ε(α2, ·) = 1.
    Alternate,
}

impl Cocycle {
    pub fn id(&self) -> &'static str {
        match self {
            Cocycle::Standard => "standard",
            Cocycle::Alternate => "alternate",
        }
    }

    fn sign(&self, j: usize, mu: Weight) -> i64 {
        let flips = match (self, j) {
            (Cocycle::Standard, 2) => mu.c2,
            (Cocycle::Alternate, 1) => mu.c1,
            _ => 0,
        };
        if flips.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}

/// v_Λ: k0 vacuum factors, then k1 factors at λ1, then k2 at λ2.
pub fn highest_weight_vector(hw: AffineHW) -> FockVector {
    let factors = std::iter::repeat_n(Factor::vacuum(Weight::ZERO), hw.k0 as usize)
        .chain(std::iter::repeat_n(
            Factor::vacuum(Weight::LAMBDA1),
            hw.k1 as usize,
        ))
        .chain(std::iter::repeat_n(
            Factor::vacuum(Weight::LAMBDA2),
            hw.k2 as usize,
        ))
        .collect();
    FockVector::basis(FockBasisElement { factors })
}

fn cartan(a: u8, b: u8) -> i64 {
    if a == b {
        2
    } else {
        -1
    }
}

fn partitions(a: u32, max_part: u32) -> Vec<Vec<u32>> {
    if a == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in (1..=a.min(max_part)).rev() {
        for mut rest in partitions(a - p, p) {
            rest.insert(0, p);
            out.push(rest);
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, t| {
        acc * BigInt::from(n - t) / BigInt::from(t + 1)
    })
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, t| acc * BigInt::from(t))
}

type Monomial = Vec<(u32, u8)>;

/// Memoized single-factor action of x_{αj}(m).
#[derive(Debug, Default)]
pub struct ModeTable {
    cocycle: Cocycle,
    factor_images: HashMap<(usize, i64, Factor), Vec<(Factor, Rational)>>,
    creation: HashMap<(u32, u8), Vec<(Monomial, Rational)>>,
}

impl ModeTable {
    pub fn new(cocycle: Cocycle) -> ModeTable {
        ModeTable {
            cocycle,
            ..Default::default()
        }
    }

    /// Degree-a part of E^−(−αj, z): Σ over partitions of a of
    /// Π_n α_j(−n)^{m_n} / (n^{m_n} m_n!).
    fn creation_part(&mut self, a: u32, dir: u8) -> &[(Vec<(u32, u8)>, Rational)] {
        self.creation.entry((a, dir)).or_insert_with(|| {
            partitions(a, a)
                .into_iter()
                .map(|parts| {
                    let mut mult: BTreeMap<u32, u32> = BTreeMap::new();
                    for &p in &parts {
                        *mult.entry(p).or_default() += 1;
                    }
                    let den = mult.iter().fold(BigInt::one(), |acc, (&n, &m)| {
                        acc * BigInt::from(n).pow(m) * factorial(m)
                    });
                    let mut mono: Vec<(u32, u8)> = parts.iter().map(|&n| (n, dir)).collect();
                    mono.sort_unstable();
                    (mono, Rational::new(BigInt::one(), den))
                })
                .collect()
        })
    }

    fn on_factor(&mut self, j: usize, m: i64, factor: &Factor) -> Vec<(Factor, Rational)> {
        let key = (j, m, factor.clone());
        if let Some(hit) = self.factor_images.get(&key) {
            return hit.clone();
        }
        let image = self.compute_on_factor(j, m, factor);
        self.factor_images.insert(key, image.clone());
        image
    }

    fn compute_on_factor(&mut self, j: usize, m: i64, factor: &Factor) -> Vec<(Factor, Rational)> {
        let deg = factor.degree() as i64;
        let target = deg - m - factor.point.root_pairing(j) - 1;
        if target < 0 {
            return Vec::new();
        }
        let dir = j as u8;
        let mut exps: BTreeMap<(u32, u8), u32> = BTreeMap::new();
        for &v in &factor.heis {
            *exps.entry(v).or_default() += 1;
        }
        let vars: Vec<((u32, u8), u32)> = exps.into_iter().collect();

        // E^+ shifts each creation variable x_{(n,d)} by −⟨αj, α_d⟩ w^n; choose
        // how many copies f of each variable are replaced by the shift.
        let mut image: BTreeMap<Vec<(u32, u8)>, Rational> = BTreeMap::new();
        let mut choice = vec![0u32; vars.len()];
        loop {
            let mut coef = BigInt::one();
            let mut lowered = 0i64;
            let mut rest = Vec::new();
            for (&((n, d), e), &f) in vars.iter().zip(&choice) {
                coef *= binomial(e, f) * BigInt::from(-cartan(dir, d)).pow(f);
                lowered += n as i64 * f as i64;
                rest.extend(std::iter::repeat_n((n, d), (e - f) as usize));
            }
            let a = target - deg + lowered;
            if a >= 0 && !coef.is_zero() {
                let coef = Rational::from_integer(coef);
                for (mono, c) in self.creation_part(a as u32, dir).to_vec() {
                    let mut h = rest.clone();
                    h.extend(mono);
                    h.sort_unstable();
                    *image.entry(h).or_insert_with(Rational::zero) += &coef * c;
                }
            }
            // advance the mixed-radix counter
            let mut t = 0;
            while t < choice.len() && choice[t] == vars[t].1 {
                choice[t] = 0;
                t += 1;
            }
            if t == choice.len() {
                break;
            }
            choice[t] += 1;
        }

        let point = factor.point + Weight::simple_root(j);
        let sign = Rational::from_integer(BigInt::from(self.cocycle.sign(j, factor.point)));
        image
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(heis, c)| (Factor { heis, point }, c * &sign))
            .collect()
    }

    /// Δ(x_{αj}(m)) = Σ_t 1 ⊗ … ⊗ x_{αj}(m) ⊗ … ⊗ 1.
    pub fn apply(&mut self, j: usize, m: i64, v: &FockVector) -> FockVector {
        assert!(j == 1 || j == 2, "root index must be 1 or 2, got {j}");
        let mut out = FockVector::default();
        for (element, c) in &v.terms {
            for (t, factor) in element.factors.iter().enumerate() {
                for (new_factor, cc) in self.on_factor(j, m, factor) {
                    let mut factors = element.factors.clone();
                    factors[t] = new_factor;
                    out.add_term(FockBasisElement { factors }, c * cc);
                }
            }
        }
        out
    }
}

/// x_{αj}(m) applied to v with the standard cocycle.
pub fn apply_mode(j: usize, m: i64, v: &FockVector) -> FockVector {
    ModeTable::new(Cocycle::Standard).apply(j, m, v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleConfig {
    /// Upper bound on k·C·S.
    pub budget: u64,
    pub cocycle: Cocycle,
    /// Visit blocks, spanning vectors, roots and modes in reverse order.
    pub reverse_order: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            budget: DEFAULT_BUDGET,
            cocycle: Cocycle::Standard,
            reverse_order: false,
        }
    }
}

/// dim W(Λ)'_{r1,r2;s} for r1 + r2 ≤ C and 0 ≤ s ≤ S, zeros omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedDims {
    pub weight: AffineHW,
    pub max_charge: u32,
    pub max_weight: u32,
    entries: BTreeMap<(u32, u32, u32), u64>,
}

#[derive(Serialize, Deserialize)]
struct DimEntry {
    r1: u32,
    r2: u32,
    s: u32,
    dim: u64,
}

#[derive(Serialize, Deserialize)]
struct DimsJson {
    weight: [u32; 3],
    #[serde(rename = "C")]
    max_charge: u32,
    #[serde(rename = "S")]
    max_weight: u32,
    entries: Vec<DimEntry>,
}

impl GradedDims {
    pub fn get(&self, r1: u32, r2: u32, s: u32) -> u64 {
        self.entries.get(&(r1, r2, s)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32, u32), u64)> + '_ {
        self.entries.iter().map(|(&k, &d)| (k, d))
    }

    pub fn envelope(&self) -> Envelope {
        Envelope::new(self.max_charge, 0, self.max_weight as i64).expect("S is nonnegative")
    }

    /// The dimensions as a generating series over the computed window.
    pub fn to_series(&self) -> Series {
        Series::from_terms(
            self.envelope(),
            self.entries
                .iter()
                .map(|(&(r1, r2, s), &d)| ((r1, r2, s as i64), BigInt::from(d))),
        )
    }

    pub fn compare_with(&self, series: &Series) -> Agreement {
        self.to_series().compare(series)
    }

    /// Relabels (r1, r2) ↦ (r2, r1) and Λ1 ↔ Λ2.
    pub fn transpose(&self) -> GradedDims {
        GradedDims {
            weight: self.weight.dynkin_swap(),
            max_charge: self.max_charge,
            max_weight: self.max_weight,
            entries: self
                .entries
                .iter()
                .map(|(&(r1, r2, s), &d)| ((r2, r1, s), d))
                .collect(),
        }
    }

    fn to_json_value(&self) -> DimsJson {
        DimsJson {
            weight: [self.weight.k0, self.weight.k1, self.weight.k2],
            max_charge: self.max_charge,
            max_weight: self.max_weight,
            entries: self
                .entries
                .iter()
                .map(|(&(r1, r2, s), &dim)| DimEntry { r1, r2, s, dim })
                .collect(),
        }
    }

    fn from_json_value(v: DimsJson) -> GradedDims {
        GradedDims {
            weight: AffineHW {
                k0: v.weight[0],
                k1: v.weight[1],
                k2: v.weight[2],
            },
            max_charge: v.max_charge,
            max_weight: v.max_weight,
            entries: v
                .entries
                .into_iter()
                .map(|e| ((e.r1, e.r2, e.s), e.dim))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<GradedDims, serde_json::Error> {
        Ok(Self::from_json_value(serde_json::from_str(text)?))
    }
}

#[derive(Default)]
struct Block {
    echelon: BTreeMap<FockBasisElement, FockVector>,
    spanning: Vec<FockVector>,
}

impl Block {
    /// Reduces v against the echelon rows; keeps it if independent.
    fn insert(&mut self, mut v: FockVector) -> bool {
        while let Some((pivot, c)) = v.leading() {
            let (pivot, c) = (pivot.clone(), c.clone());
            match self.echelon.get(&pivot) {
                Some(row) => {
                    for (e, x) in &row.terms {
                        v.add_term(e.clone(), -(&c * x));
                    }
                }
                None => {
                    let inv = c.recip();
                    let row = FockVector {
                        terms: v.terms.iter().map(|(e, x)| (e.clone(), x * &inv)).collect(),
                    };
                    self.echelon.insert(pivot, row);
                    self.spanning.push(v);
                    return true;
                }
            }
        }
        false
    }
}

fn check_budget(
    hw: AffineHW,
    max_charge: u32,
    max_weight: u32,
    budget: u64,
) -> Result<(), OracleError> {
    let cost = hw.level() as u64 * max_charge as u64 * max_weight as u64;
    if cost > budget {
        return Err(OracleError::BudgetExceeded {
            weight: hw,
            cost,
            budget,
        });
    }
    Ok(())
}

/// Graded dimensions of W(Λ) on r1 + r2 ≤ C, 0 ≤ s ≤ S.
pub fn principal_dims(
    hw: AffineHW,
    max_charge: u32,
    max_weight: u32,
    config: &OracleConfig,
) -> Result<GradedDims, OracleError> {
    check_budget(hw, max_charge, max_weight, config.budget)?;
    let s_cap = max_weight as i64;
    let mut table = ModeTable::new(config.cocycle);
    let mut blocks: BTreeMap<(u32, u32, i64), Block> = BTreeMap::new();
    blocks
        .entry((0, 0, 0))
        .or_default()
        .insert(highest_weight_vector(hw));

    // Every mode raises the total charge by one, so a single pass per layer
    // reaches the fixed point.
    for layer in 0..max_charge {
        let mut keys: Vec<(u32, u32, i64)> = blocks
            .keys()
            .copied()
            .filter(|&(r1, r2, _)| r1 + r2 == layer)
            .collect();
        if config.reverse_order {
            keys.reverse();
        }
        for key in keys {
            let (r1, r2, s) = key;
            let mut sources = blocks[&key].spanning.clone();
            if config.reverse_order {
                sources.reverse();
            }
            let roots: &[usize] = if config.reverse_order {
                &[2, 1]
            } else {
                &[1, 2]
            };
            for v in &sources {
                for &j in roots {
                    let modes: Vec<i64> = if config.reverse_order {
                        (s - s_cap..=s).rev().collect()
                    } else {
                        (s - s_cap..=s).collect()
                    };
                    for m in modes {
                        let image = table.apply(j, m, v);
                        if image.is_zero() {
                            continue;
                        }
                        let target = (r1 + (j == 1) as u32, r2 + (j == 2) as u32, s - m);
                        blocks.entry(target).or_default().insert(image);
                    }
                }
            }
        }
    }

    let entries = blocks
        .into_iter()
        .filter(|(_, b)| !b.spanning.is_empty())
        .map(|((r1, r2, s), b)| ((r1, r2, s as u32), b.spanning.len() as u64))
        .collect();
    Ok(GradedDims {
        weight: hw,
        max_charge,
        max_weight,
        entries,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CacheFile {
    format_version: u32,
    cocycle: Cocycle,
    dims: DimsJson,
}

/// Whether a cached run was reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

pub fn cache_path(
    dir: &Path,
    hw: AffineHW,
    max_charge: u32,
    max_weight: u32,
    cocycle: Cocycle,
) -> PathBuf {
    dir.join(format!(
        "dims_{}-{}-{}_C{}_S{}_{}_v{}.json",
        hw.k0,
        hw.k1,
        hw.k2,
        max_charge,
        max_weight,
        cocycle.id(),
        CACHE_FORMAT_VERSION
    ))
}

/// principal_dims backed by an on-disk cache. Unreadable or stale entries
/// are recomputed and overwritten.
pub fn principal_dims_cached(
    hw: AffineHW,
    max_charge: u32,
    max_weight: u32,
    config: &OracleConfig,
    dir: &Path,
) -> Result<(GradedDims, CacheStatus), OracleError> {
    check_budget(hw, max_charge, max_weight, config.budget)?;
    let path = cache_path(dir, hw, max_charge, max_weight, config.cocycle);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(file) = serde_json::from_str::<CacheFile>(&text) {
            let dims = GradedDims::from_json_value(file.dims);
            if file.format_version == CACHE_FORMAT_VERSION
                && file.cocycle == config.cocycle
                && dims.weight == hw
                && dims.max_charge == max_charge
                && dims.max_weight == max_weight
            {
                return Ok((dims, CacheStatus::Hit));
            }
        }
    }
    let dims = principal_dims(hw, max_charge, max_weight, config)?;
    let cache_err = |e: &dyn fmt::Display| OracleError::Cache {
        path: path.clone(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| cache_err(&e))?;
    let file = CacheFile {
        format_version: CACHE_FORMAT_VERSION,
        cocycle: config.cocycle,
        dims: dims.to_json_value(),
    };
    let text = serde_json::to_string(&file).map_err(|e| cache_err(&e))?;
    fs::write(&path, text).map_err(|e| cache_err(&e))?;
    Ok((dims, CacheStatus::Miss))
}

/// A block where dimension additivity fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactnessFailure {
    pub r1: u32,
    pub r2: u32,
    pub s: u32,
    pub middle: u64,
    pub left: u64,
    pub right: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SequenceCheck {
    pub name: &'static str,
    pub blocks_checked: usize,
    pub failures: Vec<ExactnessFailure>,
}

impl SequenceCheck {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactnessReport {
    pub k: u32,
    pub i: u32,
    #[serde(rename = "C")]
    pub max_charge: u32,
    #[serde(rename = "S")]
    pub max_weight: u32,
    pub sequences: [SequenceCheck; 2],
}

impl ExactnessReport {
    pub fn pass(&self) -> bool {
        self.sequences.iter().all(SequenceCheck::pass)
    }
}

/// Graded dimensions of the three modules in one short exact sequence.
struct Triple {
    middle: GradedDims,
    left: GradedDims,
    right: GradedDims,
}

fn sequence_check(
    name: &'static str,
    dims: &Triple,
    i: u32,
    max_charge: u32,
    max_weight: u32,
) -> SequenceCheck {
    let mut failures = Vec::new();
    let mut blocks_checked = 0;
    for r1 in 0..=max_charge {
        for r2 in 0..=max_charge - r1 {
            for s in 0..=max_weight {
                blocks_checked += 1;
                let middle = dims.middle.get(r1, r2, s);
                let left = dims.left.get(r1, r2, s);
                let shifted = s as i64 - r1 as i64 + r2 as i64;
                let right = if r1 >= i && shifted >= 0 {
                    dims.right.get(r1 - i, r2, shifted as u32)
                } else {
                    0
                };
                if middle != left + right {
                    failures.push(ExactnessFailure {
                        r1,
                        r2,
                        s,
                        middle,
                        left,
                        right,
                    });
                }
            }
        }
    }
    SequenceCheck {
        name,
        blocks_checked,
        failures,
    }
}

/// Checks, on r1 + r2 ≤ C and 0 ≤ s ≤ S,
///
/// ```text
/// dim W(iΛ0+(k−i)Λ1)[r1,r2,s] = dim W((i−1)Λ0+(k−i+1)Λ1)[r1,r2,s]
///                              + dim W(iΛ1+(k−i)Λ2)[r1−i, r2, s−r1+r2]
/// ```
///
/// and the same statement with Λ1 ↔ Λ2 and r1 ↔ r2.
pub fn exactness_check(
    k: u32,
    i: u32,
    max_charge: u32,
    max_weight: u32,
) -> Result<ExactnessReport, OracleError> {
    exactness_check_with(k, i, max_charge, max_weight, &OracleConfig::default())
}

pub fn exactness_check_with(
    k: u32,
    i: u32,
    max_charge: u32,
    max_weight: u32,
    config: &OracleConfig,
) -> Result<ExactnessReport, OracleError> {
    if i == 0 || i > k {
        return Err(OracleError::IndexRange { k, i });
    }
    let run = |hw: AffineHW, c: u32, s: u32| principal_dims(hw, c, s, config);
    let middle = run(
        AffineHW {
            k0: i,
            k1: k - i,
            k2: 0,
        },
        max_charge,
        max_weight,
    )?;
    let left = run(
        AffineHW {
            k0: i - 1,
            k1: k - i + 1,
            k2: 0,
        },
        max_charge,
        max_weight,
    )?;
    // The right-hand index s − r1 + r2 reaches S + C at charge C − i.
    let right_charge = max_charge.saturating_sub(i);
    let right = run(
        AffineHW {
            k0: 0,
            k1: i,
            k2: k - i,
        },
        right_charge,
        max_weight + max_charge,
    )?;
    let first = sequence_check(
        "sequence",
        &Triple {
            middle,
            left,
            right,
        },
        i,
        max_charge,
        max_weight,
    );

    // The mirror sequence, read through the transpose.
    let middle = run(
        AffineHW {
            k0: i,
            k1: 0,
            k2: k - i,
        },
        max_charge,
        max_weight,
    )?
    .transpose();
    let left = run(
        AffineHW {
            k0: i - 1,
            k1: 0,
            k2: k - i + 1,
        },
        max_charge,
        max_weight,
    )?
    .transpose();
    let right = run(
        AffineHW {
            k0: 0,
            k1: k - i,
            k2: i,
        },
        right_charge,
        max_weight + max_charge,
    )?
    .transpose();
    let second = sequence_check(
        "sequence'",
        &Triple {
            middle,
            left,
            right,
        },
        i,
        max_charge,
        max_weight,
    );

    Ok(ExactnessReport {
        k,
        i,
        max_charge,
        max_weight,
        sequences: [first, second],
    })
}

impl fmt::Display for GradedDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<_> = self.entries().collect();
        rows.sort_by_key(|&((r1, r2, s), _)| (r1 + r2, r1, s));
        for ((r1, r2, s), d) in rows {
            writeln!(f, "{r1:>3} {r2:>3} {s:>3}  {d}")?;
        }
        Ok(())
    }
}
