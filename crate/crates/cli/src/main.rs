//! Command-line front end for the process-calculus workbench.
//!
//! Exit codes: 0 success (and verdict holds), 1 usage error, 2 input error
//! (parse/encode/semantics), 3 state cap exceeded, 4 verdict contrary to
//! `--expect`. Reports go to stdout and are byte-deterministic for fixed
//! flags and seeds; progress and timing go to stderr.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use procalc::ccs::{parse_ccs_input, print_ccs};
use procalc::corpus::{self, GenParams};
use procalc::csp::{parse_csp_input, print_csp};
use procalc::encode::TripledAlphabet;
use procalc::equiv::{check_relation, RelationId};
use procalc::lts::{explore, export_aut, export_dot, import_aut, semantics_for, ProcessGraph};
use procalc::term::ActName;
use procalc::translate::{identity, EncodeTranslation, Translation};
use procalc::verify::{
    check_compositional, check_congruence_sampled, check_congruence_translated,
    check_correct_up_to, check_respects, check_valid, consistency_diagnostic, hierarchy_harness,
    separation_fixture, Report,
};
use procalc::{LangId, Term};

const USAGE_ERR: u8 = 1;
const INPUT_ERR: u8 = 2;
const CAP_ERR: u8 = 3;
const VERDICT_ERR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "procalc",
    version,
    about = "Process-calculus workbench: CCS/CSP semantics, equivalences, and translation checking"
)]
struct Cli {
    /// Optional key=value configuration file; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LangArg {
    Ccs,
    Csp,
}

impl From<LangArg> for LangId {
    fn from(l: LangArg) -> LangId {
        match l {
            LangArg::Ccs => LangId::Ccs,
            LangArg::Csp => LangId::Csp,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Aut,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Summary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expectation {
    Holds,
    Fails,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TranslationArg {
    Encode,
    Identity,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    Respects,
    Correct,
    Compositional,
    Valid,
    Congruence,
    CongruenceTranslated,
    Hierarchy,
}

#[derive(Args)]
struct InputArgs {
    /// Input file; `-` or absent reads stdin.
    input: Option<PathBuf>,
    /// Inline term text instead of a file.
    #[arg(long, conflicts_with = "input")]
    expr: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a term (or definitions file) and echo its canonical form.
    Parse {
        #[arg(long, value_enum)]
        lang: LangArg,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Explore the transition system of a closed term and emit the graph.
    Lts {
        #[arg(long, value_enum)]
        lang: LangArg,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        max_states: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<GraphFormat>,
    },
    /// Translate a CSP term into CCS text.
    Encode {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated base alphabet; inferred from the term if absent.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Check a behavioural relation between two processes (terms or .aut).
    Equiv {
        #[arg(long)]
        relation: RelationId,
        /// Language of term inputs (`.aut` inputs ignore this).
        #[arg(long, value_enum, default_value = "ccs")]
        lang: LangArg,
        /// Language of the second input when it differs.
        #[arg(long, value_enum)]
        lang2: Option<LangArg>,
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long)]
        max_states: Option<usize>,
        /// Exit with code 4 when the verdict contradicts the expectation.
        #[arg(long, value_enum)]
        expect: Option<Expectation>,
    },
    /// Run a translation-correctness check over a seeded corpus.
    Verify {
        #[arg(long, value_enum, default_value = "encode")]
        translation: TranslationArg,
        /// Source language for the identity translation.
        #[arg(long, value_enum, default_value = "ccs")]
        lang: LangArg,
        #[arg(long)]
        relation: Option<RelationId>,
        #[arg(long, value_enum, default_value = "respects")]
        check: CheckArg,
        #[arg(long)]
        corpus_seed: Option<u64>,
        #[arg(long)]
        corpus_size: Option<usize>,
        #[arg(long)]
        corpus_depth: Option<usize>,
        #[arg(long)]
        max_states: Option<usize>,
        /// Valuation samples for the `correct` check.
        #[arg(long)]
        valuation_samples: Option<usize>,
        /// Sample count for `compositional` and `congruence` checks.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
        /// Exit with code 4 when the report outcome contradicts this.
        #[arg(long, value_enum)]
        expect: Option<Expectation>,
    },
    /// Behavioural facts around the encoded parallel composition under the
    /// witness valuations.
    FixtureSeparation {
        #[arg(long)]
        max_states: Option<usize>,
    },
    /// Generate a seeded corpus of closed terms, one per line.
    GenCorpus {
        #[arg(long, value_enum, default_value = "csp")]
        lang: LangArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
    },
}

struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Config, String> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (no, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(format!(
                        "{}:{}: config lines must be key=value",
                        path.display(),
                        no + 1
                    ));
                };
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Config { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, flag: Option<T>, fallback: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| format!("config key {key}: {e}")),
            None => Ok(fallback),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(USAGE_ERR);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type Fallible<T> = Result<T, (u8, String)>;

fn positive(value: usize, what: &str) -> Fallible<usize> {
    if value == 0 {
        Err((USAGE_ERR, format!("{what} must be positive")))
    } else {
        Ok(value)
    }
}

fn read_input(input: &InputArgs) -> Fallible<String> {
    if let Some(e) = &input.expr {
        return Ok(e.clone());
    }
    match &input.input {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| (INPUT_ERR, format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| (INPUT_ERR, format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn parse_term(lang: LangId, text: &str) -> Fallible<Term> {
    let parsed = match lang {
        LangId::Ccs => parse_ccs_input(text),
        LangId::Csp => parse_csp_input(text),
    };
    parsed.map_err(|e| (INPUT_ERR, format!("parse error at {e}")))
}

fn print_term(lang: LangId, term: &Term) -> String {
    match lang {
        LangId::Ccs => print_ccs(term),
        LangId::Csp => print_csp(term),
    }
}

fn parse_alphabet(csv: &str) -> Fallible<Vec<ActName>> {
    let mut out = Vec::new();
    for part in csv.split(',') {
        let name = part.trim();
        if name.is_empty()
            || !name.chars().next().unwrap().is_ascii_lowercase()
            || !name.chars().all(|c| c.is_ascii_alphanumeric())
        {
            return Err((USAGE_ERR, format!("invalid alphabet name `{name}`")));
        }
        out.push(ActName::plain(name));
    }
    Ok(out)
}

fn load_graph(
    path: &Path,
    lang: LangId,
    max_states: usize,
) -> Fallible<ProcessGraph> {
    if path.extension().is_some_and(|e| e == "aut") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| (INPUT_ERR, format!("cannot read {}: {e}", path.display())))?;
        return import_aut(&text)
            .map_err(|e| (INPUT_ERR, format!("{}: {e}", path.display())));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| (INPUT_ERR, format!("cannot read {}: {e}", path.display())))?;
    let term = parse_term(lang, &text)?;
    let sem = semantics_for(lang);
    let g = explore(&term, sem.as_ref(), max_states)
        .map_err(|e| (INPUT_ERR, format!("{}: {e}", path.display())))?;
    if !g.complete {
        return Err((
            CAP_ERR,
            format!("{}: exploration exceeded {max_states} states", path.display()),
        ));
    }
    Ok(g)
}

fn emit_report(report: &Report, format: ReportFormat) {
    match format {
        ReportFormat::Text => print!("{}", report.render()),
        ReportFormat::Summary => {
            let (pass, fail, skip) = report.counts();
            println!("# {}", report.title);
            println!(
                "# summary checked={} pass={pass} fail={fail} skip={skip} result={}",
                report.entries.len(),
                if fail == 0 { "PASS" } else { "FAIL" }
            );
        }
    }
}

fn run(cli: Cli) -> Fallible<u8> {
    let config = Config::load(cli.config.as_deref()).map_err(|m| (USAGE_ERR, m))?;
    match cli.cmd {
        Cmd::Parse { lang, input } => {
            let text = read_input(&input)?;
            let term = parse_term(lang.into(), &text)?;
            println!("{}", print_term(lang.into(), &term));
            Ok(0)
        }

        Cmd::Lts {
            lang,
            input,
            max_states,
            format,
        } => {
            let max_states =
                positive(config.get("max-states", max_states, 20_000).map_err(|m| (USAGE_ERR, m))?, "--max-states")?;
            let text = read_input(&input)?;
            let term = parse_term(lang.into(), &text)?;
            let sem = semantics_for(lang.into());
            let g = explore(&term, sem.as_ref(), max_states)
                .map_err(|e| (INPUT_ERR, e.to_string()))?;
            let format = format.unwrap_or(GraphFormat::Aut);
            match format {
                GraphFormat::Aut => print!("{}", export_aut(&g)),
                GraphFormat::Dot => print!("{}", export_dot(&g)),
            }
            if !g.complete {
                eprintln!(
                    "warning: partial graph, exploration stopped at the {max_states}-state cap"
                );
                return Ok(CAP_ERR);
            }
            Ok(0)
        }

        Cmd::Encode { input, alphabet } => {
            let text = read_input(&input)?;
            let term = parse_term(LangId::Csp, &text)?;
            let alphabet = match alphabet {
                Some(csv) => TripledAlphabet::new(parse_alphabet(&csv)?)
                    .map_err(|e| (USAGE_ERR, e.to_string()))?,
                None => TripledAlphabet::from_term(&term)
                    .map_err(|e| (INPUT_ERR, e.to_string()))?,
            };
            let encoded = procalc::encode::encode(&term, &alphabet)
                .map_err(|e| (INPUT_ERR, e.to_string()))?;
            println!("{}", print_ccs(&encoded));
            Ok(0)
        }

        Cmd::Equiv {
            relation,
            lang,
            lang2,
            file1,
            file2,
            max_states,
            expect,
        } => {
            let max_states =
                positive(config.get("max-states", max_states, 20_000).map_err(|m| (USAGE_ERR, m))?, "--max-states")?;
            let g1 = load_graph(&file1, lang.into(), max_states)?;
            let g2 = load_graph(&file2, lang2.unwrap_or(lang).into(), max_states)?;
            let verdict = check_relation(relation, &g1, &g2)
                .map_err(|e| (INPUT_ERR, e.to_string()))?;
            println!("relation: {relation}");
            println!("holds: {}", verdict.holds);
            let evidence = verdict.evidence.render();
            if !evidence.is_empty() {
                println!("evidence: {evidence}");
            }
            match expect {
                Some(Expectation::Holds) if !verdict.holds => Ok(VERDICT_ERR),
                Some(Expectation::Fails) if verdict.holds => Ok(VERDICT_ERR),
                _ => Ok(0),
            }
        }

        Cmd::Verify {
            translation,
            lang,
            relation,
            check,
            corpus_seed,
            corpus_size,
            corpus_depth,
            max_states,
            valuation_samples,
            samples,
            format,
            expect,
        } => {
            let seed = config.get("corpus-seed", corpus_seed, 42).map_err(|m| (USAGE_ERR, m))?;
            let size =
                positive(config.get("corpus-size", corpus_size, 30).map_err(|m| (USAGE_ERR, m))?, "--corpus-size")?;
            let depth = config.get("corpus-depth", corpus_depth, 4).map_err(|m| (USAGE_ERR, m))?;
            let max_states =
                positive(config.get("max-states", max_states, 20_000).map_err(|m| (USAGE_ERR, m))?, "--max-states")?;
            let relation = match relation {
                Some(r) => r,
                None => config
                    .get("relation", None, RelationId::Trace)
                    .map_err(|m| (USAGE_ERR, m))?,
            };
            let source_lang: LangId = match translation {
                TranslationArg::Encode => LangId::Csp,
                TranslationArg::Identity => lang.into(),
            };
            let t9n: Box<dyn Translation> = match translation {
                TranslationArg::Encode => Box::new(EncodeTranslation {
                    alphabet: TripledAlphabet::new(["a", "b", "c"].map(ActName::plain))
                        .expect("default alphabet"),
                }),
                TranslationArg::Identity => Box::new(identity(source_lang)),
            };
            let mut params = GenParams::defaults(source_lang);
            params.size = size;
            params.max_depth = depth;
            let started = Instant::now();
            eprintln!(
                "verify: check={} translation={} relation={relation} seed={seed} size={size}",
                match check {
                    CheckArg::Respects => "respects",
                    CheckArg::Correct => "correct",
                    CheckArg::Compositional => "compositional",
                    CheckArg::Valid => "valid",
                    CheckArg::Congruence => "congruence",
                    CheckArg::CongruenceTranslated => "congruence-translated",
                    CheckArg::Hierarchy => "hierarchy",
                },
                t9n.name()
            );
            let corpus = corpus::generate(seed, params);
            let report = match check {
                CheckArg::Respects => check_respects(t9n.as_ref(), relation, &corpus, max_states),
                CheckArg::Correct => {
                    let vs = valuation_samples.unwrap_or(20);
                    let mut report =
                        check_correct_up_to(t9n.as_ref(), relation, &corpus, vs, max_states);
                    let source_congruence = check_congruence_sampled(
                        source_lang,
                        relation,
                        samples.unwrap_or(60),
                        seed,
                        max_states,
                    );
                    if let Some(flag) = consistency_diagnostic(&report, &source_congruence) {
                        report.notes.push(flag);
                    }
                    report
                }
                CheckArg::Compositional => {
                    check_compositional(t9n.as_ref(), samples.unwrap_or(200), seed)
                }
                CheckArg::Valid => {
                    check_valid(t9n.as_ref(), relation, &corpus, samples.unwrap_or(50), max_states)
                }
                CheckArg::Congruence => check_congruence_sampled(
                    source_lang,
                    relation,
                    samples.unwrap_or(500),
                    seed,
                    max_states,
                ),
                CheckArg::CongruenceTranslated => check_congruence_translated(
                    t9n.as_ref(),
                    relation,
                    samples.unwrap_or(200),
                    seed,
                    max_states,
                ),
                CheckArg::Hierarchy => {
                    let mut combined: Option<Report> = None;
                    for (finer, coarser) in [
                        (RelationId::IsoReachable, RelationId::StrongBisim),
                        (RelationId::StrongBisim, RelationId::WeakBisim),
                        (RelationId::WeakBisim, RelationId::Trace),
                        (RelationId::ConvergentWeakBisim, RelationId::WeakBisim),
                    ] {
                        let part = hierarchy_harness(t9n.as_ref(), finer, coarser, &corpus, max_states);
                        combined = Some(match combined {
                            None => part,
                            Some(mut acc) => {
                                let offset = acc.entries.len();
                                acc.title = format!("hierarchy: translation={} all declared refinements seed={seed}", t9n.name());
                                for (i, mut e) in part.entries.into_iter().enumerate() {
                                    e.index = offset + i;
                                    e.subject = format!("{finer}→{coarser}: {}", e.subject);
                                    acc.entries.push(e);
                                }
                                acc
                            }
                        });
                    }
                    combined.expect("at least one refinement pair")
                }
            };
            let format = format.unwrap_or(ReportFormat::Text);
            emit_report(&report, format);
            eprintln!("verify: finished in {} ms", started.elapsed().as_millis());
            match expect {
                Some(Expectation::Holds) if !report.all_pass() => Ok(VERDICT_ERR),
                Some(Expectation::Fails) if report.all_pass() => Ok(VERDICT_ERR),
                _ => Ok(0),
            }
        }

        Cmd::FixtureSeparation { max_states } => {
            let max_states =
                positive(config.get("max-states", max_states, 20_000).map_err(|m| (USAGE_ERR, m))?, "--max-states")?;
            let fixture = separation_fixture(max_states);
            print!("{}", fixture.render());
            Ok(0)
        }

        Cmd::GenCorpus {
            lang,
            seed,
            size,
            depth,
        } => {
            let size =
                positive(config.get("corpus-size", size, 30).map_err(|m| (USAGE_ERR, m))?, "--size")?;
            let depth = config.get("corpus-depth", depth, 4).map_err(|m| (USAGE_ERR, m))?;
            let mut params = GenParams::defaults(lang.into());
            params.size = size;
            params.max_depth = depth;
            let corpus = corpus::generate(seed, params);
            for t in &corpus.terms {
                println!("{}", print_term(lang.into(), t));
            }
            Ok(0)
        }
    }
}
