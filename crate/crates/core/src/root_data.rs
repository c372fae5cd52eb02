//! Root and weight data for sl(3) and its level-k affine highest weights.
//!
//! Weights live in the weight lattice P and are stored in the basis of
//! fundamental weights (λ1, λ2). In these coordinates the simple roots are
//! α1 = (2, -1) and α2 = (-1, 2), and the invariant form has Gram matrix
//! [[2/3, 1/3], [1/3, 2/3]].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Exact rational number (always reduced, positive denominator).
pub type Rational = BigRational;

pub(crate) fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A point of the weight lattice in fundamental-weight coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Weight {
    pub c1: i64,
    pub c2: i64,
}

impl Weight {
    pub const ZERO: Weight = Weight { c1: 0, c2: 0 };
    pub const LAMBDA1: Weight = Weight { c1: 1, c2: 0 };
    pub const LAMBDA2: Weight = Weight { c1: 0, c2: 1 };
    pub const ALPHA1: Weight = Weight { c1: 2, c2: -1 };
    pub const ALPHA2: Weight = Weight { c1: -1, c2: 2 };

    pub const fn new(c1: i64, c2: i64) -> Self {
        Weight { c1, c2 }
    }

    /// Simple root α_j for j ∈ {1, 2}.
    pub fn simple_root(j: usize) -> Weight {
        match j {
            1 => Self::ALPHA1,
            2 => Self::ALPHA2,
            _ => panic!("sl(3) has simple roots 1 and 2, got {j}"),
        }
    }

    /// Fundamental weight λ_j for j ∈ {1, 2}.
    pub fn fundamental(j: usize) -> Weight {
        match j {
            1 => Self::LAMBDA1,
            2 => Self::LAMBDA2,
            _ => panic!("sl(3) has fundamental weights 1 and 2, got {j}"),
        }
    }

    /// True when the weight lies in the root lattice Q.
    pub fn in_root_lattice(&self) -> bool {
        (self.c1 - self.c2).rem_euclid(3) == 0
    }

    /// ⟨α_j, self⟩, which is the j-th coordinate.
    pub fn root_pairing(&self, j: usize) -> i64 {
        match j {
            1 => self.c1,
            2 => self.c2,
            _ => panic!("sl(3) has simple roots 1 and 2, got {j}"),
        }
    }

    /// Three times the invariant form; always an integer on P.
    pub fn pairing_times3(&self, other: &Weight) -> i64 {
        2 * self.c1 * other.c1 + self.c1 * other.c2 + self.c2 * other.c1 + 2 * self.c2 * other.c2
    }

    pub fn scale(&self, n: i64) -> Weight {
        Weight::new(n * self.c1, n * self.c2)
    }
}

impl std::ops::Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight::new(self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

impl std::ops::Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        Weight::new(self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl std::ops::Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight::new(-self.c1, -self.c2)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}λ1{:+}λ2", self.c1, self.c2)
    }
}

/// The symmetric invariant form on P.
pub fn pairing(u: &Weight, v: &Weight) -> Rational {
    rat(u.pairing_times3(v), 3)
}

/// Highest weight k0Λ0 + k1Λ1 + k2Λ2 of a standard module of level k0+k1+k2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffineHW {
    pub k0: u32,
    pub k1: u32,
    pub k2: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("highest weight {k0}Λ0+{k1}Λ1+{k2}Λ2 has level 0")]
pub struct ZeroLevel {
    pub k0: u32,
    pub k1: u32,
    pub k2: u32,
}

impl AffineHW {
    pub fn new(k0: u32, k1: u32, k2: u32) -> Result<Self, ZeroLevel> {
        if k0 + k1 + k2 == 0 {
            return Err(ZeroLevel { k0, k1, k2 });
        }
        Ok(AffineHW { k0, k1, k2 })
    }

    pub fn level(&self) -> u32 {
        self.k0 + self.k1 + self.k2
    }

    /// Finite part k1λ1 + k2λ2 (Λ0 pairs trivially with the finite weights).
    pub fn finite_part(&self) -> Weight {
        Weight::new(self.k1 as i64, self.k2 as i64)
    }

    /// The image under the diagram automorphism exchanging Λ1 and Λ2.
    pub fn dynkin_swap(&self) -> AffineHW {
        AffineHW {
            k0: self.k0,
            k1: self.k2,
            k2: self.k1,
        }
    }
}

impl fmt::Display for AffineHW {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Λ0+{}Λ1+{}Λ2", self.k0, self.k1, self.k2)
    }
}

/// (⟨λ1, Λ⟩, ⟨λ2, Λ⟩): the charges of the highest-weight vector.
pub fn charge_offsets(hw: &AffineHW) -> (Rational, Rational) {
    let mu = hw.finite_part();
    (
        pairing(&Weight::LAMBDA1, &mu),
        pairing(&Weight::LAMBDA2, &mu),
    )
}

/// h_Λ = ⟨Λ, Λ + α1 + α2⟩ / 2(k + 3), evaluated literally.
///
/// Display metadata only; every series in this crate is normalized relative
/// to the highest-weight vector and never consumes this value.
pub fn conformal_weight(hw: &AffineHW) -> Rational {
    let mu = hw.finite_part();
    let shifted = mu + Weight::ALPHA1 + Weight::ALPHA2;
    pairing(&mu, &shifted) / Rational::from_integer(BigInt::from(2 * (hw.level() as i64 + 3)))
}
