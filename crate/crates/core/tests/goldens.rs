use gdpc::fixtures::{all, GoldenCheck};

#[test]
fn fixtures_match_their_goldens() {
    let mut bad = Vec::new();
    for f in all() {
        match f.check_golden().unwrap_or_else(|e| panic!("{}: {e}", f.name)) {
            GoldenCheck::Match => {}
            GoldenCheck::Blessed => eprintln!("blessed {}", f.golden_path().display()),
            GoldenCheck::Mismatch { expected, actual } => {
                let line = expected
                    .lines()
                    .zip(actual.lines())
                    .position(|(a, b)| a != b)
                    .unwrap_or(expected.lines().count().min(actual.lines().count()));
                bad.push(format!("{} differs from line {}", f.name, line + 1));
            }
        }
    }
    assert!(bad.is_empty(), "golden mismatches (rerun with GDPC_BLESS=1 to accept):\n{}", bad.join("\n"));
}
