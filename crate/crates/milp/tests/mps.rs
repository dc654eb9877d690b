use milp::{read_mps, solve_lp, solve_mip, write_mps, BnbConfig, LpOptions, MipStatus, Problem, Sense};
use proptest::prelude::*;

/// The classic TESTPROB example distributed with MPS format descriptions.
const TESTPROB: &str = "\
NAME          TESTPROB
ROWS
 N  COST
 L  LIM1
 G  LIM2
 E  MYEQN
COLUMNS
    XONE      COST                 1   LIM1                 1
    XONE      LIM2                 1
    YTWO      COST                 2   LIM1                 1
    YTWO      MYEQN               -1
    ZTHREE    COST                 3   LIM2                 1
    ZTHREE    MYEQN                1
RHS
    RHS1      LIM1                 4   LIM2                 1
    RHS1      MYEQN                7
BOUNDS
 UP BND1      XONE                 4
 LO BND1      YTWO                -1
 UP BND1      YTWO                 1
ENDATA
";

#[test]
fn foreign_testprob_parses_and_solves() {
    let p = read_mps(TESTPROB.as_bytes()).unwrap();
    assert_eq!(p.name, "TESTPROB");
    assert_eq!(p.num_cols(), 3);
    assert_eq!(p.num_rows(), 3);
    assert_eq!(p.rows[1].sense, Sense::Ge);
    assert_eq!(p.cols[1].lower, -1.0);
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    // worked by hand: z = 7 + y, so cost = x + 5y + 21 with y = -1, x = 0
    assert!((sol.objective - 16.0).abs() < 1e-9, "{}", sol.objective);
    assert!((sol.x[0]).abs() < 1e-9);
    assert!((sol.x[1] + 1.0).abs() < 1e-9);
    assert!((sol.x[2] - 6.0).abs() < 1e-9);
}

#[test]
fn integer_markers_and_ranges_are_read() {
    let text = "\
NAME          MIX
ROWS
 N  OBJ
 L  C1
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    B         OBJ                 -2   C1                   1
    MARKER                 'MARKER'                 'INTEND'
    X         OBJ                 -1   C1                   1
RHS
    RHS       C1                 1.5
RANGES
    RNG       C1                 1.0
BOUNDS
 UP BND       B                    1
 UP BND       X                    1
ENDATA
";
    let p = read_mps(text.as_bytes()).unwrap();
    assert!(p.cols[0].binary);
    assert!(!p.cols[1].binary);
    assert_eq!(p.num_rows(), 2);
    let sol = solve_mip(&p, &BnbConfig::default()).unwrap();
    assert_eq!(sol.status, MipStatus::Optimal);
    assert!((sol.objective + 2.5).abs() < 1e-9);
}

#[test]
fn malformed_input_is_rejected() {
    assert!(read_mps("ROWS\n N  OBJ\n".as_bytes()).is_err());
    assert!(read_mps("ROWS\n Q  OBJ\nENDATA\n".as_bytes()).is_err());
    let bad = TESTPROB.replace("LIM1                 4", "LIM1               abc");
    assert!(read_mps(bad.as_bytes()).is_err());
}

#[test]
fn writer_emits_fixed_layout() {
    let mut p = Problem::new("demo");
    let b = p.add_binary("Z[V1,1,3]", 2.0);
    let x = p.add_col("P_ch[BA,V1,3]", 0.0, 4.5, 0.25);
    p.add_row("gate", "MooringGate", &[(x, 1.0), (b, -4.5)], Sense::Le, 0.0);
    let text = write_mps(&p).unwrap();
    assert!(text.contains("* col C0000001 Z[V1,1,3]"));
    assert!(text.contains("* row R0000001 MooringGate gate"));
    assert!(text.contains(" BV BND       C0000001"));
    assert!(text.contains("'INTORG'") && text.contains("'INTEND'"));
    for line in text.lines().filter(|l| l.starts_with("    C")) {
        assert!(line[4..12].starts_with('C') && &line[12..14] == "  ", "{line}");
    }
}

fn arb_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1000i32..1000).prop_map(|v| v as f64),
        -1e6f64..1e6,
        (1e-9f64..1e-3).prop_map(|v| v * 3.0),
    ]
}

fn arb_problem() -> impl Strategy<Value = Problem> {
    (1usize..8, 1usize..6).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec((arb_value(), arb_value(), arb_value(), any::<bool>(), 0u8..4), n),
            prop::collection::vec((arb_value(), 0u8..3, prop::collection::vec((0..n, arb_value()), 0..n)), m),
        )
            .prop_map(move |(cols, rows)| {
                let mut p = Problem::new("rt");
                for (j, (a, b, c, bin, kind)) in cols.into_iter().enumerate() {
                    if bin {
                        p.add_binary(format!("b{j}"), c);
                        continue;
                    }
                    let (lo, hi) = (a.min(b), a.max(b));
                    let (lo, hi) = match kind {
                        0 => (lo, hi),
                        1 => (f64::NEG_INFINITY, hi),
                        2 => (lo, f64::INFINITY),
                        _ => (lo, lo),
                    };
                    p.add_col(format!("x{j}"), lo, hi, c);
                }
                for (i, (rhs, s, terms)) in rows.into_iter().enumerate() {
                    let sense = [Sense::Le, Sense::Ge, Sense::Eq][s as usize];
                    p.add_row(format!("r{i}"), format!("Fam{}", i % 2), &terms, sense, rhs);
                }
                p.compress();
                p
            })
    })
}

proptest! {
    #[test]
    fn write_read_round_trip(p in arb_problem()) {
        let text = write_mps(&p).unwrap();
        let back = read_mps(text.as_bytes()).unwrap();
        let mut orig = p.clone();
        orig.compress();
        let mut trip_a = orig.triplets.clone();
        let mut trip_b = back.triplets.clone();
        trip_a.sort_by_key(|t| (t.0, t.1));
        trip_b.sort_by_key(|t| (t.0, t.1));
        prop_assert_eq!(trip_a, trip_b);
        prop_assert_eq!(&orig.cols, &back.cols);
        prop_assert_eq!(&orig.rows, &back.rows);
        prop_assert_eq!(&orig.name, &back.name);
        // a second pass is byte-identical
        prop_assert_eq!(write_mps(&back).unwrap(), text);
    }
}
