use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use bairesum::bench::{
    oracle_sum_in_cert, run_scenario, scenarios, IdealCert, Params, ScenarioReport, TreeInput,
    Window,
};
use bairesum::escape::{
    laver_sum_decompose, m_not_mminus_branch, miller_meager_escape, miller_pair_escape,
    silver_nwd_escape, WordCode,
};
use bairesum::ideals::{cover_schedule, cover_to_slalom, Certificate, MeagerWitness, Slalom};
use bairesum::ledger::Ledger;
use bairesum::shrink::{
    fakenull_shrink_perfect, miller_null_subtree, mminus_shrink_perfect, mminus_shrink_silver,
    sacks_fusion, sacks_shrink_meager,
};
use bairesum::words::Word;
use bairesum::Error;

#[derive(Parser)]
#[command(
    name = "bairesum",
    version,
    about = "Tree and ideal constructions for sums in the integer Baire space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// B,d,budget,N
    #[arg(long, default_value = "2,6,3,0")]
    window: Window,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long = "n-fold")]
    n_fold: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Shrink a tree against an ideal certificate.
    Shrink {
        #[arg(value_enum)]
        op: ShrinkOp,
        /// Not needed for `miller-null`.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Tree JSON; the full tree when absent.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build escaping branches.
    Escape {
        #[arg(value_enum)]
        op: EscapeOp,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        tree2: Option<PathBuf>,
        /// Comma separated target word for `laver`.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Cover family list to slalom, or slalom to cover schedule.
    Convert {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a scenario report, or check words against a certificate.
    Verify {
        #[arg(long, conflicts_with = "cert")]
        report: Option<PathBuf>,
        #[arg(long, requires = "words")]
        cert: Option<PathBuf>,
        /// JSON list of words.
        #[arg(long)]
        words: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a registered scenario.
    Scenario {
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShrinkOp {
    Sacks,
    Fusion,
    MminusPerfect,
    MminusSilver,
    Fakenull,
    MillerNull,
}

#[derive(Clone, Copy, ValueEnum)]
enum EscapeOp {
    Laver,
    MNotMminus,
    MillerMeager,
    SilverNwd,
    MillerPair,
}

type Outcome = Result<(Value, bool), Error>;

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {}", path.display(), e)))
}

fn tree_input(path: Option<&PathBuf>) -> Result<TreeInput, Error> {
    path.map(|p| read(p))
        .transpose()
        .map(|t| t.unwrap_or(TreeInput::Full))
}

fn certificate(path: Option<&PathBuf>) -> Result<Certificate, Error> {
    read(path.ok_or_else(|| Error::Invalid("--cert is required".into()))?)
}

fn witness(path: Option<&PathBuf>) -> Result<MeagerWitness, Error> {
    match certificate(path)? {
        Certificate::MeagerWitness(w) => Ok(w),
        _ => Err(Error::Invalid(
            "expected a meager witness certificate".into(),
        )),
    }
}

fn with_ledger<T: Serialize>(value: &T, ledger: &Ledger) -> Outcome {
    Ok((
        serde_json::to_value(value).expect("serializable"),
        ledger.all_pass(),
    ))
}

/// Search depth for the sacks constructions; the window only bounds checks.
const SACKS_SEARCH: usize = 1 << 13;

fn shrink(op: ShrinkOp, cert: Option<&PathBuf>, tree: Option<&PathBuf>, c: &Common) -> Outcome {
    let input = tree_input(tree)?;
    let t = input.build()?;
    let depth = c.window.d;
    if let ShrinkOp::MillerNull = op {
        let r = miller_null_subtree(&t, depth)?;
        return with_ledger(&r, &r.ledger);
    }
    match (op, certificate(cert)?) {
        (ShrinkOp::Sacks, Certificate::MeagerWitness(w)) => {
            let r = sacks_shrink_meager(&t, &w, c.steps.unwrap_or(2), SACKS_SEARCH)?
                .require_complete()?;
            with_ledger(&r, &r.ledger)
        }
        (ShrinkOp::Fusion, Certificate::MeagerWitness(w)) => {
            let r = sacks_fusion(&t, &w, c.steps.unwrap_or(2), SACKS_SEARCH)?;
            let ok = r.ledger.all_pass() && r.completed == r.stages;
            Ok((serde_json::to_value(&r).expect("serializable"), ok))
        }
        (ShrinkOp::MminusPerfect, Certificate::Interval(ic)) => {
            let r = mminus_shrink_perfect(&t, &ic, c.n_fold.unwrap_or(1), depth)?;
            with_ledger(&r, &r.ledger)
        }
        (ShrinkOp::MminusSilver, Certificate::Interval(ic)) => {
            let spec = input
                .silver_spec()
                .ok_or_else(|| Error::Invalid("mminus-silver needs a silver tree".into()))?;
            let r = mminus_shrink_silver(spec, &ic, c.n_fold.unwrap_or(1), depth)?;
            Ok((serde_json::to_value(&r).expect("serializable"), true))
        }
        (ShrinkOp::Fakenull, Certificate::Slalom(s)) => {
            let r = fakenull_shrink_perfect(&t, &s, depth)?;
            with_ledger(&r, &r.ledger)
        }
        _ => Err(Error::Invalid(
            "certificate kind does not match the shrink".into(),
        )),
    }
}

fn parse_word(s: &str) -> Result<Word, Error> {
    let v: Result<Vec<i64>, _> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse())
        .collect();
    v.map(Word::new)
        .map_err(|_| Error::Invalid(format!("`{}` is not a comma separated word", s)))
}

fn escape(
    op: EscapeOp,
    cert: Option<&PathBuf>,
    tree: Option<&PathBuf>,
    tree2: Option<&PathBuf>,
    target: Option<&str>,
    c: &Common,
) -> Outcome {
    let steps = c.steps.unwrap_or(6);
    let trace = match op {
        EscapeOp::Laver => {
            let z =
                parse_word(target.ok_or_else(|| Error::Invalid("--target is required".into()))?)?;
            laver_sum_decompose(&tree_input(tree)?.build()?, &z, z.len())?
        }
        EscapeOp::MNotMminus => match certificate(cert)? {
            Certificate::Interval(ic) => {
                m_not_mminus_branch(&WordCode::ZigzagIndex, &ic.center, &ic.cuts, steps)?
            }
            _ => return Err(Error::Invalid("expected an interval certificate".into())),
        },
        EscapeOp::MillerMeager => {
            let t = match tree {
                Some(p) => read::<TreeInput>(p)?.build()?,
                None => TreeInput::Alpha {
                    code: WordCode::ZigzagIndex,
                    budget: c.window.budget,
                }
                .build()?,
            };
            miller_meager_escape(&t, &witness(cert)?, steps)?
        }
        EscapeOp::SilverNwd => {
            let input = tree_input(tree)?;
            let spec = input
                .silver_spec()
                .ok_or_else(|| Error::Invalid("silver-nwd needs a silver tree".into()))?;
            silver_nwd_escape(spec, &witness(cert)?, steps)?
        }
        EscapeOp::MillerPair => {
            let s: Slalom = match certificate(cert)? {
                Certificate::Slalom(s) => s,
                _ => return Err(Error::Invalid("expected a slalom certificate".into())),
            };
            miller_pair_escape(
                &tree_input(tree)?.build()?,
                &tree_input(tree2)?.build()?,
                &s,
                steps,
            )?
        }
    };
    with_ledger(&trace, &trace.ledger)
}

fn convert(cert: &Path, c: &Common) -> Outcome {
    match read::<Certificate>(cert)? {
        Certificate::Cover { families } => {
            let conv = cover_to_slalom(&families, c.window.d)?;
            let ok = conv.bounds.iter().all(|b| b.holds);
            Ok((serde_json::to_value(&conv).expect("serializable"), ok))
        }
        Certificate::Slalom(s) => {
            s.validate()?;
            let sched = cover_schedule(&s, c.steps.unwrap_or(4), c.window.d)?;
            Ok((serde_json::to_value(&sched).expect("serializable"), true))
        }
        _ => Err(Error::Invalid(
            "convert takes a cover or slalom certificate".into(),
        )),
    }
}

fn verify(
    report: Option<&PathBuf>,
    cert: Option<&PathBuf>,
    words: Option<&PathBuf>,
    c: &Common,
) -> Outcome {
    if let Some(path) = report {
        let old: ScenarioReport = read(path)?;
        let params: Params = serde_json::from_value(old.params.clone())
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let fresh = run_scenario(&old.scenario, &old.window, &params)?;
        let same = fresh.inputs_digest == old.inputs_digest && fresh.checks == old.checks;
        let v = json!({ "scenario": old.scenario, "digest": fresh.inputs_digest, "replayed": same, "report": fresh });
        return Ok((v, same && fresh.all_pass()));
    }
    let words: Vec<Word> =
        read(words.ok_or_else(|| Error::Invalid("--words is required".into()))?)?;
    let ideal = match certificate(cert)? {
        Certificate::MeagerWitness(w) => IdealCert::Meager {
            witness: w,
            upto: None,
        },
        Certificate::Interval(ic) => IdealCert::Interval { cert: ic },
        Certificate::Slalom(s) => IdealCert::Slalom { slalom: s },
        Certificate::Cover { .. } => {
            return Err(Error::Invalid("convert a cover family first".into()))
        }
    };
    // each word on its own, so words of different lengths are fine
    let mut checks = Vec::new();
    for w in &words {
        let one: BTreeSet<Word> = [w.clone()].into_iter().collect();
        checks.extend(oracle_sum_in_cert(&one, &[], &ideal, &c.window)?.checks);
    }
    let ok = checks.iter().all(|k| k.pass);
    Ok((json!({ "words": words, "checks": checks }), ok))
}

fn scenario(name: Option<&str>, list: bool, count: Option<usize>, c: &Common) -> Outcome {
    if list {
        return Ok((json!(scenarios()), true));
    }
    let name = name.ok_or_else(|| Error::Invalid("scenario name or --list is required".into()))?;
    let p = Params {
        steps: c.steps,
        n_fold: c.n_fold,
        count,
        seed: c.seed,
    };
    let r = run_scenario(name, &c.window, &p)?;
    let ok = r.all_pass();
    Ok((serde_json::to_value(&r).expect("serializable"), ok))
}

fn emit(value: &Value, out: Option<&PathBuf>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match out {
        Some(p) => {
            fs::write(p, text + "\n").map_err(|e| Error::Invalid(format!("{}: {}", p.display(), e)))
        }
        None => {
            println!("{}", text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, common) = match &cli.command {
        Command::Shrink {
            op,
            cert,
            tree,
            common,
        } => (shrink(*op, cert.as_ref(), tree.as_ref(), common), common),
        Command::Escape {
            op,
            cert,
            tree,
            tree2,
            target,
            common,
        } => (
            escape(
                *op,
                cert.as_ref(),
                tree.as_ref(),
                tree2.as_ref(),
                target.as_deref(),
                common,
            ),
            common,
        ),
        Command::Convert { cert, common } => (convert(cert, common), common),
        Command::Verify {
            report,
            cert,
            words,
            common,
        } => (
            verify(report.as_ref(), cert.as_ref(), words.as_ref(), common),
            common,
        ),
        Command::Scenario {
            name,
            list,
            count,
            common,
        } => (scenario(name.as_deref(), *list, *count, common), common),
    };
    match outcome.and_then(|(v, ok)| emit(&v, common.out.as_ref()).map(|_| ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failure; see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
