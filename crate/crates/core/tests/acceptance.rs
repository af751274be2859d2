//! Acceptance run: one pass/fail line per criterion, with timing.
//!
//! Runs without the libtest harness so the criteria execute in order and
//! report wall-clock time against their limits.

mod acceptance {
    pub mod chains;
    pub mod diffs;
    pub mod gen;
    pub mod golden;
    pub mod premise;
    pub mod props;
    pub mod rules;
    pub mod translate;
}

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use acceptance::*;

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn fixture(rel: &str) -> String {
    let p = fixture_path(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

type Check = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, Check); 7] = [
        (1, "golden semantics suite", 5, golden::run),
        (2, "rule validation", 60, rules::run),
        (3, "sum-arrays translation", 30, translate::run),
        (4, "premise introduction", 10, premise::run),
        (5, "diff exactness and minimality", 5, diffs::run),
        (6, "case-study chains", 300, chains::run),
        (7, "property suites", 120, props::run),
    ];
    // `cargo test -- FILTER` narrows the run to criteria whose number or
    // name contains FILTER.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str()) || n.to_string() == *f) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let over = took > Duration::from_secs(limit);
        let ok = result.is_ok() && !over;
        println!(
            "criterion {n} {name}: {} ({:.2}s, limit {limit}s)",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        match result {
            Ok(detail) | Err(detail) => {
                for line in detail.lines() {
                    println!("    {line}");
                }
            }
        }
        if over {
            println!("    time limit exceeded");
        }
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
