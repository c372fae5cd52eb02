//! A small language for q-difference identities.
//!
//! ```text
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := [monomial '*'] 'chi' '(' k ';' k0 ',' k1 ',' k2 ')' '(' arg ',' arg ')'
//! monomial := factor ('*' factor)*        factor := ('x1'|'x2'|'q') ['^' int]
//! arg      := ('x1'|'x2') ['*' 'q' ['^' int]]
//! ```
//!
//! `chi(k;k0,k1,k2)(x1*q^a, x2*q^b)` is χ′_{W(k0Λ0+k1Λ1+k2Λ2)}(x1 q^a, x2 q^b; q).
//! The arguments may also be given in the order (x2…, x1…).

use std::fmt;

use super::{assemble, target_envelope, RecursionError, Source, Term};
use crate::characters::CharError;
use crate::characters::CharSpec;
use crate::characters::Family;
use crate::qseries::{Series, Transform};
use crate::root_data::AffineHW;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] RecursionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arg {
    pub var: Var,
    pub q_power: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    pub x1: i64,
    pub x2: i64,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExprTerm {
    pub negative: bool,
    pub monomial: Monomial,
    pub weight: AffineHW,
    pub args: [Arg; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdentityExpr {
    pub terms: Vec<ExprTerm>,
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.var {
            Var::X1 => "x1",
            Var::X2 => "x2",
        };
        if self.q_power == 0 {
            write!(f, "{v}")
        } else {
            write!(f, "{v}*q^{}", self.q_power)
        }
    }
}

impl fmt::Display for ExprTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, e) in [
            ("x1", self.monomial.x1),
            ("x2", self.monomial.x2),
            ("q", self.monomial.q),
        ] {
            if e != 0 {
                write!(f, "{name}^{e}*")?;
            }
        }
        let w = self.weight;
        write!(
            f,
            "chi({};{},{},{})({},{})",
            w.level(),
            w.k0,
            w.k1,
            w.k2,
            self.args[0],
            self.args[1]
        )
    }
}

impl fmt::Display for IdentityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, t) in self.terms.iter().enumerate() {
            match (n, t.negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn at(&mut self, tok: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(tok)
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.at(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            return Ok(());
        }
        let found = match self.peek() {
            Some(c) => format!("found {c:?}"),
            None => "found end of input".to_string(),
        };
        self.err(self.pos, format!("expected {tok:?}, {found}"))
    }

    fn int(&mut self) -> Result<(i64, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        if end < bytes.len() && bytes[end] == b'-' {
            end += 1;
        }
        let digits = end;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits {
            return self.err(start, "expected an integer");
        }
        let value = self.src[start..end]
            .parse()
            .or_else(|_| self.err(start, "integer out of range"))?;
        self.pos = end;
        Ok((value, start))
    }

    fn natural(&mut self) -> Result<(u32, usize), ParseError> {
        let (v, at) = self.int()?;
        match u32::try_from(v) {
            Ok(n) => Ok((n, at)),
            Err(_) => self.err(at, "expected a nonnegative integer"),
        }
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        if self.eat("^") {
            Ok(self.int()?.0)
        } else {
            Ok(1)
        }
    }

    fn expr(&mut self) -> Result<IdentityExpr, ParseError> {
        let mut terms = Vec::new();
        let mut negative = if self.eat("-") {
            true
        } else {
            self.eat("+");
            false
        };
        loop {
            terms.push(self.term(negative)?);
            if self.eat("+") {
                negative = false;
            } else if self.eat("-") {
                negative = true;
            } else {
                break;
            }
        }
        if let Some(c) = self.peek() {
            return self.err(self.pos, format!("unexpected {c:?} after a complete term"));
        }
        Ok(IdentityExpr { terms })
    }

    fn term(&mut self, negative: bool) -> Result<ExprTerm, ParseError> {
        let mut monomial = Monomial::default();
        while !self.at("chi") {
            if self.eat("x1") {
                monomial.x1 += self.exponent()?;
            } else if self.eat("x2") {
                monomial.x2 += self.exponent()?;
            } else if self.eat("q") {
                monomial.q += self.exponent()?;
            } else {
                let found = self
                    .peek()
                    .map(|c| format!("{c:?}"))
                    .unwrap_or_else(|| "end of input".into());
                return self.err(
                    self.pos,
                    format!("expected 'chi' or a monomial factor, found {found}"),
                );
            }
            self.expect("*")?;
        }
        self.expect("chi")?;
        self.expect("(")?;
        let (level, level_at) = self.natural()?;
        self.expect(";")?;
        let (k0, _) = self.natural()?;
        self.expect(",")?;
        let (k1, _) = self.natural()?;
        self.expect(",")?;
        let (k2, _) = self.natural()?;
        self.expect(")")?;
        if level == 0 || level as u64 != k0 as u64 + k1 as u64 + k2 as u64 {
            return self.err(
                level_at,
                format!(
                    "level {level} must equal k0+k1+k2 = {} and be positive",
                    k0 as u64 + k1 as u64 + k2 as u64
                ),
            );
        }
        self.expect("(")?;
        let first_at = {
            self.skip_ws();
            self.pos
        };
        let first = self.arg()?;
        self.expect(",")?;
        let second = self.arg()?;
        self.expect(")")?;
        if first.var == second.var {
            return self.err(
                first_at,
                "the two arguments must be x1 and x2 in some order",
            );
        }
        Ok(ExprTerm {
            negative,
            monomial,
            weight: AffineHW { k0, k1, k2 },
            args: [first, second],
        })
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        let var = if self.eat("x1") {
            Var::X1
        } else if self.eat("x2") {
            Var::X2
        } else {
            return self.err(self.pos, "expected x1 or x2");
        };
        let mut q_power = 0;
        if self.eat("*") {
            self.expect("q")?;
            q_power = self.exponent()?;
        }
        Ok(Arg { var, q_power })
    }
}

pub fn parse_identity(text: &str) -> Result<IdentityExpr, ParseError> {
    Parser { src: text, pos: 0 }.expr()
}

impl ExprTerm {
    fn to_term(&self) -> Result<Term, RecursionError> {
        let spec = CharSpec::classify(self.weight);
        if spec.family() == Family::G {
            return Err(RecursionError::Character(CharError::UnsupportedFamily(
                self.weight,
            )));
        }
        let swapped = self.args[0].var == Var::X2;
        // χ(x2 q^a, x1 q^b) is the transposed character at (x1 q^b, x2 q^a).
        let shift = if swapped {
            (self.args[1].q_power, self.args[0].q_power)
        } else {
            (self.args[0].q_power, self.args[1].q_power)
        };
        let source = if swapped {
            Source::Transposed(self.weight)
        } else {
            Source::Weight(self.weight)
        };
        Ok(Term {
            sign: if self.negative { -1 } else { 1 },
            transform: Transform::new((self.monomial.x1, self.monomial.x2, self.monomial.q), shift),
            source,
        })
    }
}

/// Evaluates the expression on the window r1+r2 <= C, s in [−m·C, S].
pub fn eval_identity(
    expr: &IdentityExpr,
    max_charge: u32,
    s_max: i64,
) -> Result<Series, RecursionError> {
    let terms = expr
        .terms
        .iter()
        .map(ExprTerm::to_term)
        .collect::<Result<Vec<_>, _>>()?;
    let shift = terms
        .iter()
        .map(|t| t.transform.max_abs_shift())
        .max()
        .unwrap_or(0);
    assemble(&terms, target_envelope(shift, max_charge, s_max), None)
}

pub fn eval_text(text: &str, max_charge: u32, s_max: i64) -> Result<Series, DslError> {
    Ok(eval_identity(&parse_identity(text)?, max_charge, s_max)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::georgiev_char;
    use crate::qseries::Envelope;
    use proptest::prelude::*;

    #[test]
    fn shift_identity_in_text_form_vanishes() {
        let r = eval_text("chi(1;1,0,0)(x1*q^1,x2) - chi(1;0,1,0)(x1,x2)", 3, 8).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn single_term_is_the_character() {
        let r = eval_text("chi(1;1,0,0)(x1,x2)", 3, 6).unwrap();
        assert_eq!(
            r,
            georgiev_char(1, 1, 1, Envelope::new(3, 0, 6).unwrap()).unwrap()
        );
        assert_eq!(r.envelope().s_min, 0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse_identity("chi(1;1,0,0)(x1,").unwrap_err();
        assert_eq!(e.offset, 16);
        let e = parse_identity("chi(1;1,0,0").unwrap_err();
        assert_eq!(e.offset, 11);
        let e = parse_identity("chi(2;1,0,0)(x1,x2)").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse_identity("chi(1;1,0,0)(x1,x1)").unwrap_err();
        assert_eq!(e.offset, 13);
        let e = parse_identity("chi(1;1,0,0)(x1,x2) chi").unwrap_err();
        assert_eq!(e.offset, 20);
        assert!(parse_identity("").is_err());
    }

    #[test]
    fn general_weights_are_rejected_at_evaluation() {
        let err = eval_text("chi(3;1,1,1)(x1,x2)", 2, 3).unwrap_err();
        assert!(matches!(
            err,
            DslError::Eval(RecursionError::Character(CharError::UnsupportedFamily(_)))
        ));
    }

    #[test]
    fn swapped_arguments_apply_the_diagram_symmetry() {
        // χ′_{W(kΛ2)}(x1,x2) = χ′_{W(kΛ1)}(x2,x1)
        let r = eval_text("chi(2;0,0,2)(x1,x2) - chi(2;0,2,0)(x2,x1)", 3, 6).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn level_one_recursion_in_text_form() {
        let r = eval_text(
            "chi(1;1,0,0)(x1,x2) - chi(1;1,0,0)(x1*q^1,x2) - x1^1*q^1*chi(1;1,0,0)(x1*q^2,x2*q^-1)",
            4,
            8,
        )
        .unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn misused_negative_power_is_an_assembly_error() {
        let err = eval_text("x1^-1*chi(1;1,0,0)(x1,x2)", 2, 4).unwrap_err();
        assert!(matches!(err, DslError::Eval(RecursionError::Assembly(_))));
    }

    #[test]
    fn residual_assembly_is_linear_in_a_monomial_factor() {
        let base = "chi(2;1,1,0)(x1,x2) - chi(2;0,2,0)(x1,x2)";
        let scaled = "x1^1*x2^2*q^3*chi(2;1,1,0)(x1,x2) - x1^1*x2^2*q^3*chi(2;0,2,0)(x1,x2)";
        let a = eval_text(base, 3, 8)
            .unwrap()
            .scale_monomial(1, 2, 3)
            .unwrap();
        let b = eval_text(scaled, 6, 11).unwrap();
        let agreement = a.compare(&b);
        assert!(agreement.equal(), "{:?}", agreement.first_difference);
    }

    fn arb_arg(var: Var) -> impl Strategy<Value = Arg> {
        (-3i64..=3).prop_map(move |q_power| Arg { var, q_power })
    }

    fn arb_term() -> impl Strategy<Value = ExprTerm> {
        (
            any::<bool>(),
            -2i64..=3,
            -2i64..=3,
            -4i64..=4,
            0u32..3,
            0u32..3,
            0u32..3,
            any::<bool>(),
            arb_arg(Var::X1),
            arb_arg(Var::X2),
        )
            .prop_filter("level must be positive", |t| t.4 + t.5 + t.6 > 0)
            .prop_map(|(negative, x1, x2, q, k0, k1, k2, swap, a1, a2)| ExprTerm {
                negative,
                monomial: Monomial { x1, x2, q },
                weight: AffineHW { k0, k1, k2 },
                args: if swap { [a2, a1] } else { [a1, a2] },
            })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(terms in prop::collection::vec(arb_term(), 1..5)) {
            let expr = IdentityExpr { terms };
            let text = expr.to_string();
            prop_assert_eq!(parse_identity(&text).unwrap(), expr);
        }
    }
}
