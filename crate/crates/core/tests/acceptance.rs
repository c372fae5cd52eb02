//! Acceptance suite: one PASS/FAIL line per criterion, exact comparisons only.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use psl3_core::characters::{char_i1_i2, char_of_weight, georgiev_char, shift_char_lambda1};
use psl3_core::qseries::inv_pochhammer;
use psl3_core::recursions::{identities_at, verify_all, IdentityTag};
use psl3_core::voa_oracle::{exactness_check, principal_dims, Cocycle, GradedDims, OracleConfig};
use psl3_core::{AffineHW, Envelope, Series};

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce(&mut Oracle) -> Outcome>;

fn hw(k0: u32, k1: u32, k2: u32) -> AffineHW {
    AffineHW::new(k0, k1, k2).unwrap()
}

fn env(c: u32, s_max: i64) -> Envelope {
    Envelope::new(c, 0, s_max).unwrap()
}

/// Oracle runs shared between criteria.
#[derive(Default)]
struct Oracle {
    runs: HashMap<(AffineHW, u32, u32, Cocycle), GradedDims>,
}

impl Oracle {
    fn dims(
        &mut self,
        w: AffineHW,
        c: u32,
        s: u32,
        cocycle: Cocycle,
    ) -> Result<&GradedDims, String> {
        match self.runs.entry((w, c, s, cocycle)) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => {
                let config = OracleConfig {
                    cocycle,
                    ..OracleConfig::default()
                };
                let d = principal_dims(w, c, s, &config).map_err(|e| e.to_string())?;
                Ok(e.insert(d))
            }
        }
    }
}

fn agree(what: &str, dims: &GradedDims, series: &Series) -> Result<(), String> {
    let a = dims.compare_with(series);
    if a.equal() {
        Ok(())
    } else {
        Err(format!("{what}: first difference {:?}", a.first_difference))
    }
}

fn level_one_oracle(o: &mut Oracle) -> Outcome {
    let d = o.dims(hw(1, 0, 0), 3, 6, Cocycle::Standard)?.clone();
    let g = georgiev_char(1, 1, 1, env(3, 6)).map_err(|e| e.to_string())?;
    agree("(1,0,0)", &d, &g)?;
    let spots = [
        ((1, 1, 1), 1),
        ((1, 1, 2), 2),
        ((1, 1, 3), 3),
        ((2, 0, 4), 1),
    ];
    for ((r1, r2, s), want) in spots {
        if d.get(r1, r2, s) != want {
            return Err(format!(
                "dim at ({r1},{r2},{s}) is {}, expected {want}",
                d.get(r1, r2, s)
            ));
        }
    }
    Ok(format!(
        "{} blocks, spot values 1,2,3,1",
        d.entries().count()
    ))
}

fn level_two_oracle(o: &mut Oracle) -> Outcome {
    let weights = [
        hw(2, 0, 0),
        hw(1, 1, 0),
        hw(1, 0, 1),
        hw(0, 2, 0),
        hw(0, 1, 1),
    ];
    for w in weights {
        let d = o.dims(w, 3, 5, Cocycle::Standard)?.clone();
        let c = char_of_weight(w, env(3, 5)).map_err(|e| e.to_string())?;
        agree(&w.to_string(), &d, &c)?;
    }
    Ok(format!("{} weights on C=3, S=5", weights.len()))
}

fn identities() -> Outcome {
    let mut count = 0;
    for k in 1..=3 {
        let report = verify_all(k, 4, 8);
        let expected = identities_at(k);
        for tag in [
            IdentityTag::Shift1,
            IdentityTag::Shift2,
            IdentityTag::Seq1,
            IdentityTag::Seq2,
            IdentityTag::Inv1,
            IdentityTag::Inv2,
            IdentityTag::Four1,
            IdentityTag::Four2,
            IdentityTag::Boundary,
        ] {
            for i in tag.indices(k) {
                let found = report.results.iter().find(|r| r.id == tag && r.i == i);
                match found {
                    Some(r) if r.pass => count += 1,
                    Some(r) => {
                        return Err(format!(
                            "k={k} {tag} i={i:?}: {:?} {:?}",
                            r.first_failure, r.error
                        ))
                    }
                    None => return Err(format!("k={k} {tag} i={i:?} missing from the report")),
                }
            }
        }
        if report.results.len() != expected.len() || !report.all_pass() {
            return Err(format!(
                "k={k}: report does not cover every identity with a zero residual"
            ));
        }
    }
    Ok(format!("{count} residuals vanish on C=4, sMax=8"))
}

fn exactness() -> Outcome {
    let mut blocks = 0;
    for k in 1..=2 {
        for i in 1..=k {
            let r = exactness_check(k, i, 3, 5).map_err(|e| e.to_string())?;
            for seq in &r.sequences {
                if let Some(f) = seq.failures.first() {
                    return Err(format!("k={k} i={i} {}: {f:?}", seq.name));
                }
                blocks += seq.blocks_checked;
            }
        }
    }
    Ok(format!("{blocks} blocks additive"))
}

fn char_i1_i2_checks(o: &mut Oracle) -> Outcome {
    for k in 1..=3 {
        for i in 1..=k {
            let c = char_i1_i2(k, i, env(3, 8)).map_err(|e| e.to_string())?;
            if c.has_negative_coefficient() {
                return Err(format!("k={k} i={i} has a negative coefficient"));
            }
        }
    }
    let a = char_i1_i2(1, 1, env(3, 8)).map_err(|e| e.to_string())?;
    let b = shift_char_lambda1(1, env(3, 8)).map_err(|e| e.to_string())?;
    let cmp = a.compare(&b);
    if !cmp.equal() {
        return Err(format!(
            "k=1: differs from the λ1 character at {:?}",
            cmp.first_difference
        ));
    }
    let d = o.dims(hw(0, 1, 1), 3, 5, Cocycle::Standard)?.clone();
    let c = char_i1_i2(2, 1, env(3, 5)).map_err(|e| e.to_string())?;
    agree("k=2 against (0,1,1)", &d, &c)?;
    Ok("nonnegative for k<=3; k=1 and k=2 cross-checks agree".into())
}

fn partitions_at_most(n: u32, parts: u32, largest: u32) -> u64 {
    if n == 0 {
        return 1;
    }
    if parts == 0 {
        return 0;
    }
    (1..=n.min(largest))
        .map(|p| partitions_at_most(n - p, parts - 1, p))
        .sum()
}

fn pochhammer() -> Outcome {
    for m in 0..=6 {
        let s = inv_pochhammer(m, 30);
        for n in 0..=30 {
            let got = s.coefficient(0, 0, n as i64).map_err(|e| e.to_string())?;
            let want = BigInt::from(partitions_at_most(n, m, n));
            if got != want {
                return Err(format!("m={m} n={n}: {got} != {want}"));
            }
        }
    }
    Ok("m<=6, n<=30".into())
}

fn invariants(o: &mut Oracle) -> Outcome {
    let windows = [
        (hw(1, 0, 0), 3, 6),
        (hw(1, 1, 0), 3, 5),
        (hw(0, 2, 0), 3, 5),
        (hw(1, 0, 1), 3, 5),
        (hw(0, 1, 1), 3, 5),
    ];
    for (w, c, s) in windows {
        let std = o.dims(w, c, s, Cocycle::Standard)?.clone();
        let alt = o.dims(w, c, s, Cocycle::Alternate)?.clone();
        if std != alt {
            return Err(format!("{w}: the two cocycles disagree"));
        }
        let swapped = o.dims(w.dynkin_swap(), c, s, Cocycle::Standard)?.clone();
        if std.transpose() != swapped {
            return Err(format!("{w}: oracle dims are not Dynkin symmetric"));
        }
    }
    for k in 1..=3 {
        for i in 0..=k {
            let a = georgiev_char(k, i, 1, env(3, 8)).map_err(|e| e.to_string())?;
            let b = georgiev_char(k, i, 2, env(3, 8)).map_err(|e| e.to_string())?;
            if !a.transpose().compare(&b).equal() {
                return Err(format!("georgiev_char k={k} i={i} is not Dynkin symmetric"));
            }
        }
    }
    Ok("oracle on the criterion 1-2 windows, characters for k<=3".into())
}

fn main() -> ExitCode {
    let mut oracle = Oracle::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "oracle equals the level-1 character (C=3, S=6)",
            Box::new(level_one_oracle),
        ),
        (
            "oracle equals char_of at level 2 (C=3, S=5)",
            Box::new(level_two_oracle),
        ),
        (
            "q-difference identities vanish for k<=3 (C=4, sMax=8)",
            Box::new(|_| identities()),
        ),
        (
            "exact sequences are dimension-additive for k<=2 (C=3, S=5)",
            Box::new(|_| exactness()),
        ),
        (
            "char_i1_i2 is nonnegative and matches its cross-checks",
            Box::new(char_i1_i2_checks),
        ),
        (
            "inv_pochhammer matches brute-force partition counts",
            Box::new(|_| pochhammer()),
        ),
        (
            "cocycle independence and Dynkin symmetry",
            Box::new(invariants),
        ),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run(&mut oracle);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} ({secs:.1}s)", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail} ({secs:.1}s)", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
