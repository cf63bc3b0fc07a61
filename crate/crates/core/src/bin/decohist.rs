//! Command-line front end: scenario validation, decoherence analysis,
//! family comparison, HPO checks, and partial-semigroup table validation.
//!
//! Exit codes are a stable contract: 0 = success/consistent,
//! 1 = inconsistent family, 2 = validation failure, 3 = I/O or parse
//! failure.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use decohist::decoherence::{
    check_consistency, decoherence_matrix, probabilities, time_symmetric_decoherence_matrix,
    Condition, DecoherenceMatrix, DEFAULT_EPSILON,
};
use decohist::families::are_compatible;
use decohist::histories::HistoryFamily;
use decohist::hpo::{hpo_embed, orthoalgebra_axiom_suite, HistoryProposition, HpoProjector};
use decohist::kinematics::HilbertSpace;
use decohist::psg::validate_finite_psg;
use decohist::scenario::{
    branch_names, fmt_sig, load_psg, load_scenario, render_consistency, render_decoherence_matrix,
    render_probabilities, render_relation, spin_half_scenario, ReportFormat, Scenario,
    PROBABILITY_SIG_DIGITS,
};
use decohist::{Error, Tolerance};

#[derive(Parser)]
#[command(
    name = "decohist",
    about = "consistent-histories analysis of finite quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Weak,
    Medium,
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Condition {
        match c {
            ConditionArg::Weak => Condition::Weak,
            ConditionArg::Medium => Condition::Medium,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Structured,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> ReportFormat {
        match f {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Structured => ReportFormat::Structured,
        }
    }
}

#[derive(Args)]
struct AnalysisFlags {
    /// Consistency threshold ε.
    #[arg(long = "tol", default_value_t = DEFAULT_EPSILON)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = ConditionArg::Weak)]
    condition: ConditionArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Use the scenario's final state (two-state decoherence functional).
    #[arg(long = "final-state")]
    final_state: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and report every violated invariant.
    Validate { scenario: String },
    /// Print the full matrix of d(α,β) values.
    DecoherenceMatrix {
        scenario: String,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Check the decoherence condition over all history pairs.
    Consistency {
        scenario: String,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Print the probability table of a consistent family.
    Probabilities {
        scenario: String,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Relate two families: refinement, compatibility, complementarity.
    Compat {
        scenario_a: String,
        scenario_b: String,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// Embed the scenario's histories as tensor-space projectors and run
    /// the orthoalgebra axiom checks on them.
    Hpo {
        scenario: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Validate a finite composition table: associativity, units,
    /// directedness, nuclear elements.
    PsgValidate {
        table: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Built-in worked examples.
    #[command(subcommand)]
    Example(ExampleCommand),
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// Free spin-1/2 with S·n̂′ alternatives at t1 and S·n̂ at t2, started
    /// along n̂₀; prints the analytic consistency test next to the
    /// numerical one.
    SpinHalf {
        /// Initial Bloch axis, e.g. 0,0,1
        #[arg(long, default_value = "0,0,1", value_parser = parse_axis)]
        n0: [f64; 3],
        /// Axis of the t1 alternatives.
        #[arg(long, default_value = "0,0,1", value_parser = parse_axis)]
        nprime: [f64; 3],
        /// Axis of the t2 alternatives.
        #[arg(long, default_value = "0,0,1", value_parser = parse_axis)]
        n: [f64; 3],
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
}

fn parse_axis(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let [x, y, z] = parts[..] else {
        return Err(format!(
            "expected three comma-separated components, got '{s}'"
        ));
    };
    Ok([x, y, z])
}

const EXIT_INCONSISTENT: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Inconsistent(_) => EXIT_INCONSISTENT,
        Error::Io(_) | Error::Parse(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // machine-readable error payload on stderr; exit code carries
            // the category
            let payload = serde_json::json!({
                "error": e.to_string(),
                "exit_code": exit_code_for(&e),
            });
            eprintln!("{payload}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn build_family(scenario: &Scenario, tol: &Tolerance) -> Result<HistoryFamily, Error> {
    scenario.family(tol)
}

fn matrix_for(
    family: &HistoryFamily,
    use_final: bool,
    tol: &Tolerance,
) -> Result<DecoherenceMatrix, Error> {
    if use_final {
        time_symmetric_decoherence_matrix(family, tol)
    } else {
        decoherence_matrix(family, tol)
    }
}

fn run(command: Command) -> Result<u8, Error> {
    let tol = Tolerance::default();
    match command {
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            println!(
                "scenario '{}' valid: {} times, dimension {}",
                s.name,
                s.times.len(),
                s.dimension
            );
            Ok(0)
        }
        Command::DecoherenceMatrix { scenario, flags } => {
            let s = load_scenario(&scenario)?;
            let family = build_family(&s, &tol)?;
            let dm = matrix_for(&family, flags.final_state, &tol)?;
            println!("{}", render_decoherence_matrix(&dm, flags.format.into()));
            Ok(0)
        }
        Command::Consistency { scenario, flags } => {
            let s = load_scenario(&scenario)?;
            let family = build_family(&s, &tol)?;
            let dm = matrix_for(&family, flags.final_state, &tol)?;
            println!("{}", render_decoherence_matrix(&dm, flags.format.into()));
            let report = check_consistency(&dm, flags.condition.into(), flags.tol)?;
            println!("{}", render_consistency(&report, flags.format.into()));
            Ok(if report.consistent() {
                0
            } else {
                EXIT_INCONSISTENT
            })
        }
        Command::Probabilities { scenario, flags } => {
            let s = load_scenario(&scenario)?;
            let family = build_family(&s, &tol)?;
            let dm = matrix_for(&family, flags.final_state, &tol)?;
            let table = probabilities(&dm, flags.condition.into(), flags.tol)?;
            let names = branch_names(&family);
            println!(
                "{}",
                render_probabilities(&table, &names, flags.format.into())
            );
            Ok(0)
        }
        Command::Compat {
            scenario_a,
            scenario_b,
            flags,
        } => {
            let sa = load_scenario(&scenario_a)?;
            let sb = load_scenario(&scenario_b)?;
            let fa = build_family(&sa, &tol)?;
            let fb = build_family(&sb, &tol)?;
            let report = are_compatible(&fa, &fb, flags.condition.into(), flags.tol, &tol)?;
            println!("{}", render_relation(&report, flags.format.into()));
            Ok(0)
        }
        Command::Hpo { scenario, format } => {
            let s = load_scenario(&scenario)?;
            let family = build_family(&s, &tol)?;
            let space = HilbertSpace::new(family.dim())?;
            let n_slots = family.support().len();
            let mut props: Vec<HistoryProposition> = family
                .histories()
                .iter()
                .map(|h| {
                    Ok(HistoryProposition {
                        hpo: hpo_embed(h, space, &tol)?,
                        label: format!("{:?}", h.label),
                    })
                })
                .collect::<Result<_, Error>>()?;
            props.push(HistoryProposition {
                hpo: HpoProjector::unit(n_slots, family.dim(), &tol)?,
                label: "1".into(),
            });
            props.push(HistoryProposition {
                hpo: HpoProjector::zero(n_slots, family.dim())?,
                label: "0".into(),
            });
            let report = orthoalgebra_axiom_suite(&props, &tol)?;
            match ReportFormat::from(format) {
                ReportFormat::Table => {
                    println!(
                        "{} propositions on a {}-dimensional tensor space",
                        props.len(),
                        family.dim().pow(n_slots as u32)
                    );
                    if report.passes() {
                        println!("orthoalgebra axioms: pass");
                    } else {
                        println!("orthoalgebra axioms: FAIL");
                        for issue in &report.issues {
                            println!("  {issue}");
                        }
                    }
                    for note in &report.notes {
                        println!("  note: {note}");
                    }
                }
                ReportFormat::Structured => {
                    let v = serde_json::json!({
                        "propositions": props.len(),
                        "passes": report.passes(),
                        "issues": report.issues,
                        "notes": report.notes,
                    });
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                }
            }
            Ok(if report.passes() { 0 } else { EXIT_VALIDATION })
        }
        Command::PsgValidate { table, format } => {
            let psg = load_psg(&table)?;
            let report = validate_finite_psg(&psg);
            match ReportFormat::from(format) {
                ReportFormat::Table => {
                    println!("elements: {}", psg.len());
                    println!("associative: {}", report.associative());
                    println!("unit: {:?}", report.unit);
                    println!("absorbing: {:?}", report.absorbing);
                    println!("nuclear: {:?}", report.nuclear);
                    println!("directed: {}", report.directed);
                    if let Some((a, b)) = report.directedness_counterexample {
                        println!("directedness counterexample: ({a}, {b})");
                    }
                }
                ReportFormat::Structured => {
                    let v = serde_json::json!({
                        "elements": psg.len(),
                        "associative": report.associative(),
                        "associativity_violations": report.associativity_violations.len(),
                        "unit": report.unit,
                        "absorbing": report.absorbing,
                        "nuclear": report.nuclear,
                        "directed": report.directed,
                    });
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                }
            }
            Ok(if report.associative() {
                0
            } else {
                EXIT_VALIDATION
            })
        }
        Command::Example(ExampleCommand::SpinHalf {
            n0,
            nprime,
            n,
            format,
        }) => {
            let s = spin_half_scenario(n0, nprime, n);
            let family = build_family(&s, &tol)?;
            let dm = decoherence_matrix(&family, &tol)?;
            let report = check_consistency(&dm, Condition::Weak, DEFAULT_EPSILON)?;

            // analytic test: (n̂ × n̂′)·(n̂₀ × n̂′) = 0 iff weakly consistent
            let analytic = dot(cross(n, nprime), cross(n0, nprime));
            // Re d(+,−) for the histories differing at t1 only
            let d = dm.entry(&[0, 0], &[1, 0])?;
            println!(
                "analytic (n̂×n̂′)·(n̂₀×n̂′) = {}",
                fmt_sig(analytic, PROBABILITY_SIG_DIGITS)
            );
            println!(
                "numerical Re d(α,β)      = {}",
                fmt_sig(d.re, PROBABILITY_SIG_DIGITS)
            );
            let analytic_consistent = analytic.abs() <= 1e-9;
            if analytic_consistent != report.consistent() {
                return Err(Error::Numeric(format!(
                    "analytic and numerical verdicts disagree: analytic {} vs engine {}",
                    analytic_consistent,
                    report.consistent()
                )));
            }
            println!("{}", render_decoherence_matrix(&dm, format.into()));
            println!("{}", render_consistency(&report, format.into()));
            if report.consistent() {
                let table = probabilities(&dm, Condition::Weak, DEFAULT_EPSILON)?;
                let names = branch_names(&family);
                println!("{}", render_probabilities(&table, &names, format.into()));
                Ok(0)
            } else {
                Ok(EXIT_INCONSISTENT)
            }
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
