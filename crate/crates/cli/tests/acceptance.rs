//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Every criterion demands zero violations;
//! the only tolerances are the wall-clock limits below.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use matchgame::choice::{enumerate_path_independent, enumerate_substitutable};
use matchgame::da::{da_firm_proposing, da_worker_proposing};
use matchgame::games::{
    is_nash_full_game, rural_hospital_check, theorem1_profile, verify_theorem1, verify_theorem2, ScanMode,
};
use matchgame::search::{search, Finding, Target};
use matchgame::stability::{block_report, matching_blair_geq, matching_workers_weakly_prefer};
use matchgame::{
    emit_market, ir_set, parse_market, random_market, seeded_suite, stable_set, Family, GameConfig, Market, StableRule,
    WorkerPreference, WorkerSet,
};

const SUITE_SEED: u64 = 20_240_601;
const SUITE_SIZE: usize = 200;
const SMALL_SUITE_SEED: u64 = 7_001;
const LAD_SUITE_SEED: u64 = 7_002;
const SUB_SUITE_SIZE: usize = 50;
/// Seeds for the rural-violation search, each run with the full budget.
const SEARCH_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const SEARCH_BUDGET: usize = 10_000;

const LAW_LIMIT: Duration = Duration::from_secs(10);
const DA_LIMIT: Duration = Duration::from_secs(60);
const THEOREM_LIMIT: Duration = Duration::from_secs(600);

/// Counts from an independent brute force over all choice tables.
const PATH_INDEPENDENT_COUNTS: [(usize, usize); 3] = [(1, 2), (2, 6), (3, 35)];

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    violations: usize,
    detail: String,
    limit: Option<Duration>,
}

fn suite() -> Vec<Market> {
    seeded_suite(SUITE_SEED, SUITE_SIZE, 4, 3).expect("suite generation")
}

fn law_suite() -> Verdict {
    let mut violations = 0;
    let mut counts = Vec::new();
    for (n, expected) in PATH_INDEPENDENT_COUNTS {
        let mut admissible = 0;
        for c in enumerate_substitutable(n).unwrap() {
            if c.check_consistent().is_err() {
                continue;
            }
            admissible += 1;
            let full = 1u32 << n;
            for s in 0..full {
                for sp in 0..full {
                    let (s, sp) = (WorkerSet::from_bits(s), WorkerSet::from_bits(sp));
                    if c.choose(s.union(sp)) != c.choose(c.choose(s).union(sp)) {
                        violations += 1;
                    }
                }
            }
        }
        let enumerated = enumerate_path_independent(n).unwrap().len();
        violations += usize::from(admissible != expected) + usize::from(enumerated != expected);
        counts.push(format!("|W|={n}: {admissible}"));
    }
    Verdict {
        violations,
        detail: format!("path-independent functions {}", counts.join(", ")),
        limit: Some(LAW_LIMIT),
    }
}

fn da_correctness(suite: &[Market]) -> Verdict {
    let violations: usize = suite
        .par_iter()
        .map(|mkt| {
            let stable = stable_set(mkt).unwrap();
            let mu_w = da_worker_proposing(mkt).unwrap();
            let mu_f = da_firm_proposing(mkt).unwrap();
            let mut bad = 0;
            bad += usize::from(!block_report(&mu_w, mkt).is_empty());
            bad += usize::from(!block_report(&mu_f, mkt).is_empty());
            for m in &stable {
                bad += usize::from(!matching_workers_weakly_prefer(&mu_w, m, mkt));
                bad += usize::from(!matching_blair_geq(&mu_f, m, mkt));
            }
            bad
        })
        .sum();
    Verdict {
        violations,
        detail: format!("{} markets, both orientations", suite.len()),
        limit: Some(DA_LIMIT),
    }
}

fn ir_construction(suite: &[Market]) -> Verdict {
    let config = GameConfig::default();
    let rules = [
        StableRule::FirmOptimal,
        StableRule::WorkerOptimal,
        StableRule::Lexicographic,
    ];
    let jobs: Vec<(&Market, StableRule)> = suite
        .iter()
        .flat_map(|mkt| rules.iter().map(move |&r| (mkt, r)))
        .collect();
    let targets: Vec<(&Market, StableRule, matchgame::Matching)> = jobs
        .iter()
        .flat_map(|&(mkt, rule)| ir_set(mkt).unwrap().into_iter().map(move |mu| (mkt, rule, mu)))
        .collect();
    let violations: usize = targets
        .par_iter()
        .map(|(mkt, rule, mu)| {
            let profile = theorem1_profile(mu, mkt).unwrap();
            let nash = is_nash_full_game(*rule, mkt, &profile, &config).unwrap();
            let unique = stable_set(&profile).unwrap();
            usize::from(!nash.is_equilibrium || &nash.outcome != mu || unique.len() != 1 || &unique[0] != mu)
        })
        .sum();
    Verdict {
        violations,
        detail: format!("{} markets x 3 rules, {} target checks", suite.len(), targets.len()),
        limit: None,
    }
}

fn full_game_exhaustive() -> Verdict {
    let markets: Vec<Market> = (0..SUB_SUITE_SIZE as u64)
        .map(|i| random_market(SMALL_SUITE_SEED + i, 2, 2, Family::Mixed).unwrap())
        .collect();
    let config = GameConfig::default();
    let rules = [
        StableRule::FirmOptimal,
        StableRule::WorkerOptimal,
        StableRule::Lexicographic,
    ];
    let results: Vec<(usize, usize)> = markets
        .par_iter()
        .flat_map(|mkt| rules.par_iter().map(move |&rule| (mkt, rule)))
        .map(|(mkt, rule)| {
            let r = verify_theorem1(mkt, rule, &config).unwrap();
            let shape = usize::from(r.clause_i.mode != ScanMode::Exhaustive || r.clause_i.profiles != 900);
            (r.clause_i.violations.len() + shape, r.clause_i.equilibria)
        })
        .collect();
    let violations = results.iter().map(|r| r.0).sum();
    let equilibria: usize = results.iter().map(|r| r.1).sum();
    Verdict {
        violations,
        detail: format!(
            "{} markets x 3 rules x 900 profiles, {equilibria} equilibria",
            markets.len()
        ),
        limit: Some(THEOREM_LIMIT),
    }
}

fn lad_suite() -> Vec<Market> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < SUB_SUITE_SIZE {
        let nw = 1 + (i % 3) as usize;
        let nf = 1 + (i / 3 % 3) as usize;
        let mkt = random_market(LAD_SUITE_SEED + i, nw, nf, Family::Mixed).unwrap();
        if mkt.choices().iter().all(|c| c.check_lad().is_ok()) {
            out.push(mkt);
        }
        i += 1;
    }
    out
}

fn workers_game_exhaustive() -> Verdict {
    let markets = lad_suite();
    let config = GameConfig::default();
    let results: Vec<(bool, usize)> = markets
        .par_iter()
        .map(|mkt| {
            let r = verify_theorem2(mkt, &config).unwrap();
            (
                r.holds() && r.outcomes_equal_stable_set() == Some(true),
                r.clause_i.profiles,
            )
        })
        .collect();
    let violations = results.iter().filter(|r| !r.0).count();
    let profiles: usize = results.iter().map(|r| r.1).sum();
    let largest = markets.iter().map(|m| m.workers().len()).max().unwrap_or(0);
    Verdict {
        violations,
        detail: format!(
            "{} LAD markets up to {largest} workers, {profiles} profiles, outcomes = stable set",
            markets.len()
        ),
        limit: Some(THEOREM_LIMIT),
    }
}

fn rural_hospital(suite: &[Market]) -> Verdict {
    let lad: Vec<&Market> = suite
        .iter()
        .filter(|m| m.choices().iter().all(|c| c.check_lad().is_ok()))
        .collect();
    let mut violations = lad
        .par_iter()
        .filter(|m| !rural_hospital_check(m).unwrap().holds())
        .count();
    let mut examined = Vec::new();
    for seed in SEARCH_SEEDS {
        let r = search(Target::NonLadRuralViolation, seed, SEARCH_BUDGET).unwrap();
        match r.found {
            Some((mkt, Finding::Rural(w))) => {
                let again = rural_hospital_check(&mkt).unwrap();
                let stable = stable_set(&mkt).unwrap();
                let replays = !again.lad
                    && again.witness.as_ref() == Some(&w)
                    && stable.contains(&w.first)
                    && stable.contains(&w.second);
                violations += usize::from(!replays);
                examined.push(r.examined.to_string());
            }
            _ => {
                violations += 1;
                examined.push("none".into());
            }
        }
    }
    Verdict {
        violations,
        detail: format!(
            "{} LAD markets; non-LAD violation found after {} markets",
            lad.len(),
            examined.join("/")
        ),
        limit: None,
    }
}

fn crawford(suite: &[Market]) -> Verdict {
    let violations: usize = suite
        .par_iter()
        .map(|mkt| {
            let base = da_firm_proposing(mkt).unwrap();
            (0..mkt.workers().len())
                .filter(|&w| {
                    let reduced = mkt.with_preference(w, WorkerPreference::empty()).unwrap();
                    let after = da_firm_proposing(&reduced).unwrap();
                    !matching_blair_geq(&base, &after, mkt)
                })
                .count()
        })
        .sum();
    Verdict {
        violations,
        detail: format!("{} markets, every worker removed in turn", suite.len()),
        limit: None,
    }
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn determinism(suite: &[Market]) -> Verdict {
    let a = fixture("market_a.toml");
    let m = fixture("manager.toml");
    let invocations: Vec<Vec<String>> = [
        vec!["check-choice", &m],
        vec!["da", &a, "--side", "firm", "--trace"],
        vec!["da", &m, "--side", "worker", "--trace"],
        vec!["stable-set", &m],
        vec!["ir-set", &a],
        vec!["nash", &a, "--profile", &fixture("truth_a.toml")],
        vec!["verify-theorem1", &a, "--rule", "lex"],
        vec!["verify-theorem2", &a],
        vec!["rural-hospital", &m],
        vec!["random", "--seed", "5", "--workers", "4", "--firms", "3"],
        vec!["search", "--target", "non-lad-rural-violation", "--seed", "3"],
    ]
    .iter()
    .map(|v| {
        std::iter::once("matchgame")
            .chain(v.iter().copied())
            .map(String::from)
            .collect()
    })
    .collect();
    let mut violations = 0;
    for args in &invocations {
        let first = matchgame_cli::run(args.clone());
        let second = matchgame_cli::run(args.clone());
        let mut single = vec![args[0].clone(), "--jobs".into(), "1".into()];
        single.extend(args[1..].iter().cloned());
        let third = matchgame_cli::run(single);
        violations += usize::from(first != second || first != third || first.code == 2);
    }
    let mut documents: Vec<String> = ["market_a.toml", "manager.toml"]
        .iter()
        .map(|f| std::fs::read_to_string(fixture(f)).unwrap())
        .collect();
    documents.extend(suite.iter().map(emit_market));
    for text in &documents {
        match parse_market(text) {
            Ok(mkt) => violations += usize::from(emit_market(&mkt) != *text),
            Err(_) => violations += 1,
        }
    }
    for mkt in suite {
        violations += usize::from(parse_market(&emit_market(mkt)).ok().as_ref() != Some(mkt));
    }
    Verdict {
        violations,
        detail: format!(
            "{} invocations rerun, {} documents round-tripped",
            invocations.len(),
            documents.len()
        ),
        limit: None,
    }
}

fn main() -> ExitCode {
    let suite = suite();
    let criteria: Vec<Criterion> = vec![
        ("choice-function law suite", Box::new(law_suite)),
        (
            "deferred acceptance stable and side-optimal",
            Box::new(|| da_correctness(&suite)),
        ),
        (
            "constructed equilibria support every IR matching",
            Box::new(|| ir_construction(&suite)),
        ),
        ("full-game equilibrium outcomes are IR", Box::new(full_game_exhaustive)),
        (
            "workers-game equilibrium outcomes = stable set",
            Box::new(workers_game_exhaustive),
        ),
        ("equal partner counts under LAD", Box::new(|| rural_hospital(&suite))),
        ("worker removal weakly hurts every firm", Box::new(|| crawford(&suite))),
        ("determinism and round-trip", Box::new(|| determinism(&suite))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = v.limit.is_none_or(|l| elapsed <= l);
        let pass = v.violations == 0 && in_time;
        failed += usize::from(!pass);
        let limit = v.limit.map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
        println!(
            "{} {}. {name}: {} violations; {} ({:.2}s{limit})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            v.violations,
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
