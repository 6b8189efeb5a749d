//! The `matchgame` command line. [`run`] parses arguments, executes one
//! subcommand and returns its exit code and output; `main` only prints them.
//!
//! Exit codes: 0 when the command succeeds or the checked property holds, 1
//! when the property is violated (a witness is printed), 2 on bad input or an
//! exceeded enumeration bound.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use matchgame::choice::{ChoiceWitness, Property};
use matchgame::da::{self, DaOptions, DaTrace};
use matchgame::games::{
    self, ConstructionCheck, ConstructionFailure, Deviation, EquilibriumScan, NashReport, ScanMode, WorkersGameProfile,
};
use matchgame::search::{self, Finding, Target};
use matchgame::{
    emit_market, emit_profile, parse_market, parse_profile, Error, Family, GameConfig, Market, Matching, Side,
    StableRule,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "matchgame",
    version,
    about = "Stable matching with substitutable choice functions"
)]
struct Cli {
    /// Worker threads for exhaustive scans (default: all cores).
    #[arg(long, global = true, env = "MATCHGAME_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Worker,
    Firm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GameArg {
    Full,
    Workers,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    FirmOpt,
    WorkerOpt,
    Lex,
}

impl From<RuleArg> for StableRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::FirmOpt => StableRule::FirmOptimal,
            RuleArg::WorkerOpt => StableRule::WorkerOptimal,
            RuleArg::Lex => StableRule::Lexicographic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Responsive,
    PathIndependent,
    Mixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    NonLadRuralViolation,
    FirmsStrategicStableFailure,
}

#[derive(Debug, clap::Args)]
struct ScanArgs {
    /// Largest profile space scanned exhaustively; larger spaces are sampled.
    #[arg(long, default_value_t = GameConfig::default().max_exhaustive_profiles)]
    max_profiles: usize,
    /// Profiles drawn when sampling.
    #[arg(long, default_value_t = GameConfig::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run all four choice-function checkers on every firm.
    CheckChoice { market: PathBuf },
    /// Deferred acceptance.
    Da {
        market: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        trace: bool,
    },
    /// Every stable matching.
    StableSet { market: PathBuf },
    /// Every individually rational matching.
    IrSet { market: PathBuf },
    /// Check whether a submitted profile is a Nash equilibrium.
    Nash {
        market: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        game: GameArg,
        #[arg(long, value_enum, default_value = "firm-opt")]
        rule: RuleArg,
        /// Let firms deviate to any substitutable choice function (selector rules only).
        #[arg(long)]
        no_consistency: bool,
    },
    /// Full game: equilibrium outcomes are exactly the individually rational matchings.
    VerifyTheorem1 {
        market: PathBuf,
        #[arg(long, value_enum, default_value = "firm-opt")]
        rule: RuleArg,
        #[arg(long)]
        no_consistency: bool,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Workers game under the firm-optimal rule: equilibrium outcomes are exactly the stable matchings.
    VerifyTheorem2 {
        market: PathBuf,
        /// Run even if some firm violates the law of aggregate demand.
        #[arg(long)]
        allow_non_lad: bool,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Check that every agent has the same number of partners in every stable matching.
    RuralHospital { market: PathBuf },
    /// Print a seeded random market.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        workers: usize,
        #[arg(long)]
        firms: usize,
        #[arg(long, value_enum, default_value = "mixed")]
        family: FamilyArg,
    },
    /// Hunt for a counterexample in seeded random markets.
    Search {
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_ERROR,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let mut out = String::new();
    let result = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool.install(|| execute(cli.command, &mut out)),
        Err(e) => Err(Error::Input(format!("thread pool: {e}"))),
    };
    match result {
        Ok(code) => Outcome {
            code,
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: EXIT_ERROR,
            stdout: out,
            stderr: format!("error: {e}\n"),
        },
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Market, Error> {
    parse_market(&read(path)?).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Name the firm and workers in a precondition failure.
fn explain(mkt: &Market) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Precondition { firm, witness: w } => Error::Input(format!(
            "choice function of {} is rejected: {}",
            mkt.firms()[firm],
            witness(mkt, &w)
        )),
        other => other,
    }
}

fn config(scan: &ScanArgs, no_consistency: bool, allow_non_lad: bool) -> GameConfig {
    GameConfig {
        require_consistency: !no_consistency,
        max_exhaustive_profiles: scan.max_profiles,
        samples: scan.samples,
        seed: scan.seed,
        allow_non_lad,
    }
}

fn verdict(holds: bool) -> i32 {
    if holds {
        EXIT_OK
    } else {
        EXIT_VIOLATED
    }
}

fn execute(command: Command, out: &mut String) -> Result<i32, Error> {
    match command {
        Command::CheckChoice { market } => {
            let mkt = load(&market)?;
            let mut holds = true;
            for (f, c) in mkt.choices().iter().enumerate() {
                let checks = [
                    (Property::Substitutability, c.check_substitutable()),
                    (Property::Consistency, c.check_consistent()),
                    (Property::PathIndependence, c.check_path_independent()),
                    (Property::Lad, c.check_lad()),
                ];
                for (property, result) in checks {
                    match result {
                        Ok(()) => writeln!(out, "{}: {property} ok", mkt.firms()[f]).unwrap(),
                        Err(w) => {
                            holds = false;
                            writeln!(out, "{}: {}", mkt.firms()[f], witness(&mkt, &w)).unwrap();
                        }
                    }
                }
            }
            Ok(verdict(holds))
        }
        Command::Da { market, side, trace } => {
            let mkt = load(&market)?;
            let side = match side {
                SideArg::Worker => Side::Worker,
                SideArg::Firm => Side::Firm,
            };
            let (m, t) = da::run(
                &mkt,
                side,
                DaOptions {
                    trace,
                    ..DaOptions::default()
                },
            )
            .map_err(explain(&mkt))?;
            if let Some(t) = t {
                write_trace(out, &mkt, &t);
            }
            writeln!(out, "{}", mkt.format_matching(&m)).unwrap();
            Ok(EXIT_OK)
        }
        Command::StableSet { market } => {
            let mkt = load(&market)?;
            let set = matchgame::stable_set(&mkt)?;
            writeln!(out, "{} stable matchings", set.len()).unwrap();
            write_matchings(out, &mkt, &set);
            Ok(EXIT_OK)
        }
        Command::IrSet { market } => {
            let mkt = load(&market)?;
            let set = matchgame::ir_set(&mkt)?;
            writeln!(out, "{} individually rational matchings", set.len()).unwrap();
            write_matchings(out, &mkt, &set);
            Ok(EXIT_OK)
        }
        Command::Nash {
            market,
            profile,
            game,
            rule,
            no_consistency,
        } => {
            let mkt = load(&market)?;
            let profile = parse_profile(&read(&profile)?, &mkt)?;
            let rule = StableRule::from(rule);
            let report = match game {
                GameArg::Full => {
                    let config = GameConfig {
                        require_consistency: !no_consistency,
                        ..GameConfig::default()
                    };
                    games::is_nash_full_game(rule, &mkt, &profile, &config).map_err(explain(&mkt))?
                }
                GameArg::Workers => {
                    if profile.choices != mkt.choices() {
                        return Err(Error::Input(
                            "firms submit their true choice functions in the workers game; drop the choice section"
                                .into(),
                        ));
                    }
                    let workers = WorkersGameProfile {
                        preferences: profile.preferences,
                    };
                    games::is_nash_workers_game(rule, &mkt, &workers).map_err(explain(&mkt))?
                }
            };
            write_nash(out, &mkt, &report);
            Ok(verdict(report.is_equilibrium))
        }
        Command::VerifyTheorem1 {
            market,
            rule,
            no_consistency,
            scan,
        } => {
            let mkt = load(&market)?;
            let rule = StableRule::from(rule);
            let report =
                games::verify_theorem1(&mkt, rule, &config(&scan, no_consistency, false)).map_err(explain(&mkt))?;
            writeln!(out, "rule: {rule}").unwrap();
            writeln!(out, "individually rational matchings: {}", report.ir_set.len()).unwrap();
            write_scan(out, &mkt, &report.clause_i, "individually rational set")?;
            write_construction(out, &mkt, &report.clause_ii);
            writeln!(
                out,
                "{}",
                if report.holds() {
                    "equilibrium outcomes = individually rational set"
                } else {
                    "violated"
                }
            )
            .unwrap();
            Ok(verdict(report.holds()))
        }
        Command::VerifyTheorem2 {
            market,
            allow_non_lad,
            scan,
        } => {
            let mkt = load(&market)?;
            let report = games::verify_theorem2(&mkt, &config(&scan, false, allow_non_lad)).map_err(explain(&mkt))?;
            if let Some((f, w)) = &report.lad_failure {
                writeln!(out, "warning: {} {}", mkt.firms()[*f], witness(&mkt, w)).unwrap();
            }
            writeln!(out, "rule: {}", StableRule::FirmOptimal).unwrap();
            writeln!(out, "stable matchings: {}", report.stable_set.len()).unwrap();
            write_scan(out, &mkt, &report.clause_i, "stable set")?;
            write_construction(out, &mkt, &report.clause_ii);
            match report.outcomes_equal_stable_set() {
                Some(true) => writeln!(
                    out,
                    "equilibrium outcomes = stable set ({} matchings)",
                    report.stable_set.len()
                )
                .unwrap(),
                Some(false) => {
                    writeln!(out, "equilibrium outcomes differ from the stable set").unwrap();
                    let missing: Vec<&Matching> = report
                        .stable_set
                        .iter()
                        .filter(|m| !report.clause_i.outcomes.contains(m))
                        .collect();
                    for m in missing {
                        writeln!(out, "  never an equilibrium outcome: {}", mkt.format_matching(m)).unwrap();
                    }
                }
                None => writeln!(
                    out,
                    "equilibrium outcomes within the stable set on all sampled profiles"
                )
                .unwrap(),
            }
            Ok(verdict(report.holds()))
        }
        Command::RuralHospital { market } => {
            let mkt = load(&market)?;
            let report = games::rural_hospital_check(&mkt)?;
            writeln!(out, "lad: {}", if report.lad { "yes" } else { "no" }).unwrap();
            writeln!(out, "stable matchings: {}", report.stable_set.len()).unwrap();
            match &report.witness {
                None => writeln!(out, "equal partner counts in every stable matching").unwrap(),
                Some(w) => write_rural(out, &mkt, w),
            }
            Ok(verdict(report.holds()))
        }
        Command::Random {
            seed,
            workers,
            firms,
            family,
        } => {
            let family = match family {
                FamilyArg::Responsive => Family::Responsive,
                FamilyArg::PathIndependent => Family::PathIndependent,
                FamilyArg::Mixed => Family::Mixed,
            };
            out.push_str(&emit_market(&matchgame::random_market(seed, workers, firms, family)?));
            Ok(EXIT_OK)
        }
        Command::Search { target, seed, budget } => {
            let target = match target {
                TargetArg::NonLadRuralViolation => Target::NonLadRuralViolation,
                TargetArg::FirmsStrategicStableFailure => Target::FirmsStrategicStableFailure,
            };
            let result = search::search(target, seed, budget)?;
            match result.found {
                None => {
                    writeln!(out, "{target}: nothing found in {} markets", result.examined).unwrap();
                    Ok(EXIT_VIOLATED)
                }
                Some((mkt, finding)) => {
                    writeln!(out, "{target}: found after {} markets", result.examined).unwrap();
                    writeln!(out, "\n# market").unwrap();
                    out.push_str(&emit_market(&mkt));
                    writeln!(out).unwrap();
                    match finding {
                        Finding::Rural(w) => write_rural(out, &mkt, &w),
                        Finding::FirmsGame { rule, violation } => {
                            writeln!(out, "rule: {rule}").unwrap();
                            writeln!(
                                out,
                                "equilibrium outcome, unstable under the true market: {}",
                                mkt.format_matching(&violation.outcome)
                            )
                            .unwrap();
                            writeln!(out, "\n# profile").unwrap();
                            out.push_str(&emit_profile(&mkt, &violation.profile)?);
                        }
                    }
                    Ok(EXIT_OK)
                }
            }
        }
    }
}

fn witness(mkt: &Market, w: &ChoiceWitness) -> String {
    let set = |s| mkt.format_set(s);
    let detail = match w.property {
        Property::Substitutability => format!(
            "C(S) ∩ S' = {} is not contained in C(S') = {}",
            set(w.left),
            set(w.right)
        ),
        Property::Consistency => format!("C(S) = {} but C(S') = {}", set(w.left), set(w.right)),
        Property::PathIndependence => {
            format!("C(S ∪ S') = {} but C(C(S) ∪ S') = {}", set(w.left), set(w.right))
        }
        Property::Lad => format!(
            "|C(S')| = {} exceeds |C(S)| = {} with C(S') = {}, C(S) = {}",
            w.left.len(),
            w.right.len(),
            set(w.left),
            set(w.right)
        ),
    };
    format!(
        "{} fails at S = {}, S' = {}: {detail}",
        w.property,
        set(w.s),
        set(w.s_prime)
    )
}

fn write_matchings(out: &mut String, mkt: &Market, set: &[Matching]) {
    for m in set {
        writeln!(out, "  {}", mkt.format_matching(m)).unwrap();
    }
}

fn write_trace(out: &mut String, mkt: &Market, t: &DaTrace) {
    let pair = |&(f, w): &(usize, usize)| match t.proposing {
        Side::Worker => format!("{} -> {}", mkt.workers()[w], mkt.firms()[f]),
        Side::Firm => format!("{} -> {}", mkt.firms()[f], mkt.workers()[w]),
    };
    let reject = |&(f, w): &(usize, usize)| format!("{} x {}", mkt.firms()[f], mkt.workers()[w]);
    for (i, round) in t.rounds.iter().enumerate() {
        writeln!(out, "round {}", i + 1).unwrap();
        let proposals: Vec<String> = round.proposals.iter().map(pair).collect();
        let rejections: Vec<String> = round.rejections.iter().map(reject).collect();
        let none = |v: Vec<String>| if v.is_empty() { "none".to_owned() } else { v.join(", ") };
        writeln!(out, "  proposals: {}", none(proposals)).unwrap();
        writeln!(out, "  rejections: {}", none(rejections)).unwrap();
        let holdings: Vec<String> = round
            .holdings
            .iter()
            .enumerate()
            .map(|(f, s)| format!("{}: {}", mkt.firms()[f], mkt.format_set(*s)))
            .collect();
        writeln!(out, "  holdings: {}", holdings.join("; ")).unwrap();
    }
}

fn describe_deviation(mkt: &Market, d: &Deviation) -> String {
    match d {
        Deviation::Firm { strategy, .. } => {
            let table: Vec<String> = matchgame::workerset::canonical_subsets(mkt.workers().len())
                .into_iter()
                .map(|s| format!("{} -> {}", mkt.format_set(s), mkt.format_set(strategy.choose(s))))
                .collect();
            format!("{} with choices {}", d.describe(mkt), table.join(", "))
        }
        Deviation::Worker { .. } => d.describe(mkt),
    }
}

fn write_nash(out: &mut String, mkt: &Market, r: &NashReport) {
    writeln!(out, "outcome: {}", mkt.format_matching(&r.outcome)).unwrap();
    writeln!(out, "deviations checked: {}", r.deviations_checked).unwrap();
    if r.undefined_deviations > 0 {
        writeln!(out, "deviations without a stable matching: {}", r.undefined_deviations).unwrap();
    }
    match &r.witness {
        None => writeln!(out, "nash equilibrium: yes").unwrap(),
        Some(d) => {
            writeln!(out, "nash equilibrium: no").unwrap();
            writeln!(out, "profitable deviation: {}", describe_deviation(mkt, d)).unwrap();
        }
    }
}

fn write_scan(out: &mut String, mkt: &Market, scan: &EquilibriumScan, target: &str) -> Result<(), Error> {
    let mode = match scan.mode {
        ScanMode::Exhaustive => "exhaustive".to_owned(),
        ScanMode::Sampled { seed, samples } => format!("sampled, {samples} draws, seed {seed}"),
    };
    writeln!(out, "profiles scanned: {} ({mode})", scan.profiles).unwrap();
    writeln!(out, "equilibria: {}", scan.equilibria).unwrap();
    if scan.undefined > 0 {
        writeln!(out, "profiles without a stable matching: {}", scan.undefined).unwrap();
    }
    writeln!(out, "distinct equilibrium outcomes: {}", scan.outcomes.len()).unwrap();
    writeln!(
        out,
        "equilibrium outcomes outside the {target}: {}",
        scan.violations.len()
    )
    .unwrap();
    if let Some(v) = scan.violations.first() {
        writeln!(out, "  outcome: {}", mkt.format_matching(&v.outcome)).unwrap();
        writeln!(out, "  profile:").unwrap();
        for line in emit_profile(mkt, &v.profile)?.lines() {
            writeln!(out, "    {line}").unwrap();
        }
    }
    Ok(())
}

fn write_construction(out: &mut String, mkt: &Market, check: &ConstructionCheck) {
    writeln!(
        out,
        "constructed profiles: {}, failures: {}",
        check.targets,
        check.violations.len()
    )
    .unwrap();
    for v in &check.violations {
        let why = match &v.failure {
            ConstructionFailure::WrongOutcome(m) => format!("rule returns {}", mkt.format_matching(m)),
            ConstructionFailure::NotUniqueStable(set) => format!("{} stable matchings", set.len()),
            ConstructionFailure::NotEquilibrium(d) => describe_deviation(mkt, d),
        };
        writeln!(out, "  target {}: {why}", mkt.format_matching(&v.target)).unwrap();
    }
}

fn write_rural(out: &mut String, mkt: &Market, w: &games::RuralWitness) {
    let agent = match w.side {
        Side::Worker => mkt.workers()[w.agent].to_string(),
        Side::Firm => mkt.firms()[w.agent].to_string(),
    };
    writeln!(out, "unequal partner counts for {} {agent}:", w.side).unwrap();
    writeln!(out, "  partners: {} in {}", w.counts.0, mkt.format_matching(&w.first)).unwrap();
    writeln!(out, "  partners: {} in {}", w.counts.1, mkt.format_matching(&w.second)).unwrap();
}
