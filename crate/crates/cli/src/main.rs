//! `threeap`: batch front end for counting, construction, exhaustive search,
//! the bounds ledger and the verification suites.
//!
//! Exit codes: 0 success, 1 a verification suite found violations,
//! 2 usage or input error, 3 search budget exceeded.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use threeap_core::analysis::{check_final_lemma, decompose_heuristic, rectify, verify_decomposition, DecompositionParams};
use threeap_core::bounds::{construction_bound, ef_sharpness_cutoff, Ledger, Target};
use threeap_core::construct::{
    behrend_most_populous_radius, behrend_set, embed_mod, generate_family, intersect_search,
    optimize_wraparound, random_set, wraparound_complement, Family, FamilyTag, IntersectConfig,
};
use threeap_core::count::{count_report, t3_integers, CountReport};
use threeap_core::interchange::{ClassificationDocument, ExtremalDocument, RunHeader, SetDocument};
use threeap_core::rational::{format_rational, parse_rational, truncated_decimal};
use threeap_core::search::{
    classify_extremal, extremal_mod, extremal_mod_via_complement, max3ap_integers, threshold_scan, Side,
    DEFAULT_BUDGET_NODES,
};
use threeap_core::suites::{run_suite, Suite, SuiteConfig};
use threeap_core::{AnySet, Error, ResidueSet};

#[derive(Parser)]
#[command(name = "threeap", version, about = "Three-term progression counts, extremal sets and density bounds")]
struct Cli {
    /// Seed for every randomized step; recorded in the output header.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Node limit for exhaustive searches.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET_NODES,
          value_parser = clap::value_parser!(u64).range(1..))]
    budget_nodes: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Max,
    Min,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Max => Side::Max,
            SideArg::Min => Side::Min,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(name = "m3")]
    MinCount,
    #[value(name = "M3")]
    MaxCount,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::MinCount => Target::MinCount,
            TargetArg::MaxCount => Target::MaxCount,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    E,
    F,
}

#[derive(Subcommand)]
enum Command {
    /// Count progressions in a set document (path, or `-` for stdin).
    Count { input: String },
    /// Exhaustive extremal search over Z or Z/NZ.
    Search(SearchArgs),
    /// Scan all n for the largest n with M3(n,N) = ceil(n^2/2) and E/F witnesses.
    Threshold {
        #[arg(long = "modulus", short = 'N', visible_alias = "N")]
        modulus: u64,
    },
    /// Decide whether a set is an affine image of an E/F family.
    Classify { input: String },
    /// Run a seeded verification suite; exits 1 on any violation.
    Verify {
        suite: String,
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long = "modulus", short = 'N', visible_alias = "N")]
        modulus: Option<u64>,
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Maintain the ledger of density bounds.
    Bounds {
        #[command(subcommand)]
        action: BoundsCommand,
    },
    /// Generate explicit sets.
    Construct {
        #[command(subcommand)]
        kind: ConstructCommand,
    },
    /// Structural analysis of a residue set.
    Analyze {
        #[command(subcommand)]
        kind: AnalyzeCommand,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Cardinality.
    n: u64,
    #[arg(long = "modulus", short = 'N', visible_alias = "N",
          required_unless_present = "integers", conflicts_with = "integers")]
    modulus: Option<u64>,
    /// Search subsets of Z instead of Z/NZ.
    #[arg(long)]
    integers: bool,
    #[arg(long, value_enum, default_value_t = SideArg::Max)]
    side: SideArg,
    /// Diameter cap for integer searches (default 2n).
    #[arg(long, requires = "integers")]
    width_cap: Option<u64>,
    /// Search the complementary cardinality on the opposite side instead.
    #[arg(long, conflicts_with = "integers")]
    via_complement: bool,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Create a ledger on the grid with denominator q, seeded with closed forms.
    Build {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long, default_value_t = 96)]
        q: u64,
    },
    /// Apply complement and product rules until nothing improves.
    Closure {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Let finite-N records into the closure despite their O(1/N) gap.
        #[arg(long)]
        admit_finite: bool,
    },
    /// Record a finite-N construction from a residue set document.
    Add {
        #[arg(long)]
        ledger: PathBuf,
        input: String,
        #[arg(long, value_enum)]
        target: TargetArg,
    },
    /// Best bounds at one density.
    Query {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        alpha: String,
    },
    /// Dump every record.
    Export {
        #[arg(long)]
        ledger: PathBuf,
    },
    /// The density below which E/F complements stop being optimal.
    Cutoff {
        #[arg(long, default_value_t = 12)]
        digits: u32,
    },
}

#[derive(Subcommand)]
enum ConstructCommand {
    /// E(k,m) or F(k,m), optionally reduced mod N.
    Family {
        #[arg(value_enum)]
        family: FamilyArg,
        k: u64,
        m: u64,
        #[arg(long = "modulus", short = 'N', visible_alias = "N")]
        modulus: Option<u64>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        shift: i64,
    },
    /// Complement of E(k,m) in Z/NZ.
    Wraparound {
        #[arg(long = "modulus", short = 'N', visible_alias = "N")]
        modulus: u64,
        k: u64,
        m: u64,
    },
    /// Best E/F split of size n mod N.
    Optimize {
        #[arg(long = "modulus", short = 'N', visible_alias = "N")]
        modulus: u64,
        n: u64,
    },
    /// Uniform n-subset of Z/NZ drawn from --seed.
    Random {
        #[arg(long = "modulus", short = 'N', visible_alias = "N")]
        modulus: u64,
        n: u64,
    },
    /// Progression-poor intersection of A with dilated translates of B.
    Intersect {
        a: String,
        b: String,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Points of {0,...,q-1}^dim on one sphere, read in base 2q.
    Behrend {
        dim: u32,
        base: u64,
        /// Squared radius (default: the most populous sphere).
        #[arg(long)]
        radius: Option<u64>,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Shortest arc holding a fraction of some dilate of the set.
    Rectify {
        input: String,
        #[arg(long, default_value_t = 1.0)]
        coverage: f64,
    },
    /// Heuristic structured decomposition and its condition report.
    Decompose {
        input: String,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon_prime: f64,
        #[arg(long, default_value_t = 2)]
        l: u32,
        #[arg(long, default_value_t = 4)]
        min_part_size: usize,
    },
    /// Near-interval sets have at most ceil(n^2/2) progressions.
    FinalLemma { input: String },
}

enum Failure {
    Core(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Output {
    json: Value,
    csv: String,
    passed: bool,
}

impl Output {
    fn new(json: Value, csv: String) -> Self {
        Output { json, csv, passed: true }
    }
}

fn read_text(input: &str) -> Outcome<String> {
    if input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(|e| Failure::Input(format!("{input}: {e}")))
    }
}

fn read_set(input: &str) -> Outcome<AnySet> {
    Ok(SetDocument::parse(&read_text(input)?)?)
}

fn read_residues(input: &str) -> Outcome<ResidueSet> {
    match read_set(input)? {
        AnySet::Residues(s) => Ok(s),
        AnySet::Integers(_) => Err(Failure::Input(format!("{input}: expected a residue set (modulus must be set)"))),
    }
}

fn load_ledger(path: &Path) -> Outcome<Ledger> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Ledger::from_json(&text)?)
}

fn save_ledger(path: &Path, ledger: &Ledger) -> Outcome<()> {
    fs::write(path, ledger.to_json()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn joined<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn set_elements(set: &AnySet) -> String {
    joined(SetDocument::from_set(set).elements)
}

fn modulus_field(m: Option<u64>) -> String {
    m.map(|m| m.to_string()).unwrap_or_default()
}

fn set_output(set: &AnySet, extra: Value) -> Output {
    let report = match set {
        AnySet::Integers(s) => t3_integers(s),
        AnySet::Residues(s) => count_report(s),
    };
    let mut json = json!({
        "set": SetDocument::from_set(set),
        "size": set.len(),
        "t3": report.t3,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        map.extend(more);
    }
    let csv = format!(
        "modulus,size,t3,elements\n{},{},{},{}\n",
        modulus_field(set.modulus()),
        set.len(),
        report.t3,
        set_elements(set)
    );
    Output::new(json, csv)
}

fn count_csv(r: &CountReport) -> String {
    format!("t3,trivial,combinatorial\n{},{},{}\n", r.t3, r.trivial, r.combinatorial)
}

fn cmd_count(input: &str, header: &mut RunHeader) -> Outcome<Output> {
    header.config.insert("input".into(), input.into());
    let report = match read_set(input)? {
        AnySet::Integers(s) => t3_integers(&s),
        AnySet::Residues(s) => count_report(&s),
    };
    Ok(Output::new(json!(report), count_csv(&report)))
}

fn cmd_search(args: &SearchArgs, budget: u64, header: &mut RunHeader) -> Outcome<Output> {
    let side: Side = args.side.into();
    header.config.insert("n".into(), args.n.to_string());
    header.config.insert("side".into(), format!("{side:?}").to_lowercase());
    let result = if args.integers {
        if side != Side::Max {
            return Err(Failure::Input("integer search only supports --side max".into()));
        }
        let width = args.width_cap.unwrap_or(2 * args.n);
        header.config.insert("width_cap".into(), width.to_string());
        max3ap_integers(args.n, width, budget)?
    } else {
        let modulus = args.modulus.expect("clap requires a modulus");
        header.config.insert("modulus".into(), modulus.to_string());
        if args.via_complement {
            header.config.insert("route".into(), "complement".into());
            extremal_mod_via_complement(args.n, modulus, side, budget)?
        } else {
            extremal_mod(args.n, modulus, side, budget)?
        }
    };
    let classes = result
        .witnesses
        .iter()
        .map(|w| classify_extremal(w).map(|c| ClassificationDocument::from(&c)))
        .collect::<threeap_core::Result<Vec<_>>>()?;
    let mut csv = String::from("side,n,modulus,value,witness,family\n");
    for (w, c) in result.witnesses.iter().zip(&classes) {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format!("{side:?}").to_lowercase(),
            result.n,
            modulus_field(result.modulus),
            result.value,
            set_elements(w),
            c.tag.as_deref().unwrap_or("")
        ));
    }
    let json = json!({ "result": ExtremalDocument::from(&result), "classifications": classes });
    Ok(Output::new(json, csv))
}

fn cmd_threshold(modulus: u64, budget: u64, header: &mut RunHeader) -> Outcome<Output> {
    header.config.insert("modulus".into(), modulus.to_string());
    let scan = threshold_scan(modulus, budget)?;
    let json = json!({
        "modulus": scan.modulus,
        "threshold_n": scan.threshold_n,
        "threshold_ratio": scan.threshold_ratio(),
        "rows": scan.rows,
    });
    Ok(Output::new(json, scan.to_csv()))
}

fn cmd_classify(input: &str, header: &mut RunHeader) -> Outcome<Output> {
    header.config.insert("input".into(), input.into());
    let doc = ClassificationDocument::from(&classify_extremal(&read_set(input)?)?);
    let (scale, shift, modulus) = match &doc.map {
        Some(m) => (m.scale.to_string(), m.shift.to_string(), modulus_field(m.modulus)),
        None => Default::default(),
    };
    let csv = format!(
        "matched,family,scale,shift,modulus\n{},{},{scale},{shift},{modulus}\n",
        doc.matched,
        doc.tag.as_deref().unwrap_or("")
    );
    Ok(Output::new(json!(doc), csv))
}

fn cmd_verify(
    suite: &str,
    cases: Option<usize>,
    modulus: Option<u64>,
    n_max: Option<u64>,
    seed: u64,
    budget: u64,
    header: &mut RunHeader,
) -> Outcome<Output> {
    let suite: Suite = suite.parse()?;
    header.config.insert("suite".into(), suite.name().into());
    for (k, v) in [("cases", cases.map(|c| c as u64)), ("modulus", modulus), ("n_max", n_max)] {
        if let Some(v) = v {
            header.config.insert(k.into(), v.to_string());
        }
    }
    let cfg = SuiteConfig { seed, cases, modulus, n_max, budget_nodes: budget };
    let report = run_suite(suite, &cfg)?;
    let cases_json: Vec<Value> = report
        .cases
        .iter()
        .map(|c| json!({ "case": c.case, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds }))
        .collect();
    let json = json!({
        "suite": suite.name(),
        "passed": report.passed(),
        "violations": report.violations(),
        "cases": cases_json,
    });
    Ok(Output { json, csv: report.to_csv(), passed: report.passed() })
}

fn record_csv<'a>(records: impl IntoIterator<Item = &'a threeap_core::bounds::BoundRecord>) -> String {
    let mut csv = String::from("target,alpha,side,value,provenance\n");
    for r in records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    csv
}

fn key_value_csv(pairs: &[(&str, String)]) -> String {
    let mut csv = String::from("key,value\n");
    for (k, v) in pairs {
        csv.push_str(&format!("{k},{v}\n"));
    }
    csv
}

fn cmd_bounds(action: &BoundsCommand, header: &mut RunHeader) -> Outcome<Output> {
    match action {
        BoundsCommand::Build { ledger, q } => {
            header.config.insert("q".into(), q.to_string());
            let l = Ledger::build(*q)?;
            save_ledger(ledger, &l)?;
            let pairs = [
                ("ledger", ledger.display().to_string()),
                ("grid_points", l.grid().len().to_string()),
                ("records", l.records().len().to_string()),
            ];
            let json = json!({ "ledger": pairs[0].1, "grid_points": l.grid().len(), "records": l.records().len() });
            Ok(Output::new(json, key_value_csv(&pairs)))
        }
        BoundsCommand::Closure { ledger, iterations, admit_finite } => {
            header.config.insert("iterations".into(), iterations.to_string());
            header.config.insert("admit_finite".into(), admit_finite.to_string());
            let mut l = load_ledger(ledger)?;
            let stats = l.closure(*iterations, *admit_finite)?;
            save_ledger(ledger, &l)?;
            let pairs = [
                ("passes", stats.passes.to_string()),
                ("added", stats.added.to_string()),
                ("converged", stats.converged.to_string()),
                ("records", l.records().len().to_string()),
                ("consistent", l.is_consistent().to_string()),
            ];
            let json = json!({
                "passes": stats.passes,
                "added": stats.added,
                "converged": stats.converged,
                "records": l.records().len(),
                "consistent": l.is_consistent(),
            });
            Ok(Output::new(json, key_value_csv(&pairs)))
        }
        BoundsCommand::Add { ledger, input, target } => {
            header.config.insert("input".into(), input.clone());
            let mut l = load_ledger(ledger)?;
            let record = construction_bound(&read_residues(input)?, (*target).into());
            l.insert_finite(record.clone())?;
            save_ledger(ledger, &l)?;
            Ok(Output::new(json!(record), record_csv([&record])))
        }
        BoundsCommand::Query { ledger, alpha } => {
            header.config.insert("alpha".into(), alpha.clone());
            let l = load_ledger(ledger)?;
            let a = parse_rational(alpha)?;
            let best: Vec<_> = [Target::MinCount, Target::MaxCount]
                .into_iter()
                .flat_map(|t| [l.best_lower(t, &a), l.best_upper(t, &a)])
                .flatten()
                .collect();
            if best.is_empty() {
                return Err(Failure::Input(format!("no bounds recorded at alpha = {}", format_rational(&a))));
            }
            Ok(Output::new(json!(best), record_csv(best.iter().copied())))
        }
        BoundsCommand::Export { ledger } => {
            let l = load_ledger(ledger)?;
            Ok(Output::new(json!(l.to_document()), l.to_csv()))
        }
        BoundsCommand::Cutoff { digits } => {
            header.config.insert("digits".into(), digits.to_string());
            let cert = ef_sharpness_cutoff()?;
            let value = cert
                .decimal(*digits)
                .ok_or_else(|| Failure::Input(format!("cutoff bracket is not tight to {digits} digits")))?;
            let (lo, hi) = (format_rational(&cert.cutoff.0), format_rational(&cert.cutoff.1));
            let probe = |p: &threeap_core::bounds::CutoffProbe| {
                json!({
                    "alpha": format_rational(&p.alpha),
                    "product": [truncated_decimal(&p.product.0, 15), truncated_decimal(&p.product.1, 15)],
                    "single_family": format_rational(&p.single_family),
                    "product_wins": p.product_wins,
                })
            };
            let json = json!({
                "expression": "2(7+2*sqrt(6))/75",
                "value": value,
                "lower": lo,
                "upper": hi,
                "below": probe(&cert.below),
                "above": probe(&cert.above),
            });
            let csv = format!("expression,value,lower,upper\n2(7+2*sqrt(6))/75,{value},{lo},{hi}\n");
            Ok(Output::new(json, csv))
        }
    }
}

fn cmd_construct(kind: &ConstructCommand, seed: u64, header: &mut RunHeader) -> Outcome<Output> {
    match kind {
        ConstructCommand::Family { family, k, m, modulus, shift } => {
            let family = match family {
                FamilyArg::E => Family::E,
                FamilyArg::F => Family::F,
            };
            let tag = FamilyTag::new(family, *k, *m)?;
            header.config.insert("family".into(), tag.to_string());
            let set = generate_family(tag)?;
            match modulus {
                None => Ok(set_output(&AnySet::Integers(set), json!({ "tag": tag.to_string() }))),
                Some(n) => {
                    header.config.insert("modulus".into(), n.to_string());
                    header.config.insert("shift".into(), shift.to_string());
                    let e = embed_mod(&set, *n, *shift)?;
                    Ok(set_output(
                        &AnySet::Residues(e.set),
                        json!({ "tag": tag.to_string(), "injective": e.injective }),
                    ))
                }
            }
        }
        ConstructCommand::Wraparound { modulus, k, m } => {
            header.config.insert("modulus".into(), modulus.to_string());
            let w = wraparound_complement(*modulus, *k, *m)?;
            header.config.insert("family".into(), w.tag.to_string());
            Ok(set_output(
                &AnySet::Residues(w.set.clone()),
                json!({ "tag": w.tag.to_string(), "normalized_t3": w.normalized_t3() }),
            ))
        }
        ConstructCommand::Optimize { modulus, n } => {
            header.config.insert("modulus".into(), modulus.to_string());
            header.config.insert("n".into(), n.to_string());
            let o = optimize_wraparound(*modulus, *n)?;
            let nn = (*modulus as f64).powi(2);
            Ok(set_output(
                &AnySet::Residues(o.set.clone()),
                json!({
                    "tag": o.tag.to_string(),
                    "complement_t3": o.complement_t3,
                    "complement_normalized_t3": o.complement_t3 as f64 / nn,
                    "candidates": o.candidates,
                }),
            ))
        }
        ConstructCommand::Random { modulus, n } => {
            header.config.insert("modulus".into(), modulus.to_string());
            header.config.insert("n".into(), n.to_string());
            Ok(set_output(&AnySet::Residues(random_set(*n, *modulus, seed)?), json!({})))
        }
        ConstructCommand::Intersect { a, b, trials, tolerance } => {
            header.config.insert("a".into(), a.clone());
            header.config.insert("b".into(), b.clone());
            header.config.insert("trials".into(), trials.to_string());
            header.config.insert("tolerance".into(), tolerance.to_string());
            let config = IntersectConfig { trials: *trials, seed, tolerance: *tolerance };
            let o = intersect_search(&read_residues(a)?, &read_residues(b)?, config)?;
            let nn = (o.set.modulus() as f64).powi(2);
            Ok(set_output(
                &AnySet::Residues(o.set.clone()),
                json!({
                    "lambda": o.lambda,
                    "mu": o.mu,
                    "feasible": o.feasible,
                    "density": o.set.density(),
                    "normalized_t3": o.t3 as f64 / nn,
                    "trials": o.trials,
                }),
            ))
        }
        ConstructCommand::Behrend { dim, base, radius } => {
            let radius = match radius {
                Some(r) => *r,
                None => behrend_most_populous_radius(*dim, *base)?,
            };
            header.config.insert("dim".into(), dim.to_string());
            header.config.insert("base".into(), base.to_string());
            header.config.insert("radius_sq".into(), radius.to_string());
            let set = behrend_set(*dim, *base, radius)?;
            let report = t3_integers(&set);
            Ok(set_output(
                &AnySet::Integers(set),
                json!({ "radius_sq": radius, "combinatorial": report.combinatorial }),
            ))
        }
    }
}

fn cmd_analyze(kind: &AnalyzeCommand, header: &mut RunHeader) -> Outcome<Output> {
    match kind {
        AnalyzeCommand::Rectify { input, coverage } => {
            header.config.insert("input".into(), input.clone());
            header.config.insert("coverage".into(), coverage.to_string());
            let r = rectify(&read_residues(input)?, *coverage)?;
            let csv = format!(
                "dilator,offset,arc_length,covered,size\n{},{},{},{},{}\n",
                r.dilator, r.offset, r.arc_length, r.covered, r.size
            );
            Ok(Output::new(json!(r), csv))
        }
        AnalyzeCommand::Decompose { input, epsilon, epsilon_prime, l, min_part_size } => {
            header.config.insert("input".into(), input.clone());
            let params = DecompositionParams {
                epsilon: *epsilon,
                epsilon_prime: *epsilon_prime,
                l: *l,
                min_part_size: *min_part_size,
            };
            header.config.insert("epsilon".into(), epsilon.to_string());
            header.config.insert("epsilon_prime".into(), epsilon_prime.to_string());
            header.config.insert("l".into(), l.to_string());
            header.config.insert("min_part_size".into(), min_part_size.to_string());
            let d = decompose_heuristic(&read_residues(input)?, params)?;
            let report = verify_decomposition(&d)?;
            let mut csv = String::from("part,size,elements\n");
            for (i, p) in d.parts.iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", i + 1, p.len(), joined(p.iter())));
            }
            csv.push_str(&format!("noise,{},{}\n", d.noise.len(), joined(d.noise.iter())));
            let parts: Vec<Vec<u64>> = d.parts.iter().map(ResidueSet::to_vec).collect();
            let json = json!({ "parts": parts, "noise": d.noise.to_vec(), "conditions": report });
            Ok(Output::new(json, csv))
        }
        AnalyzeCommand::FinalLemma { input } => {
            header.config.insert("input".into(), input.clone());
            let c = check_final_lemma(&read_residues(input)?)?;
            let tag = c
                .classification
                .as_ref()
                .and_then(|cl| cl.tag.as_ref())
                .map(|t| t.to_string());
            let holds = c.holds.map(|h| h.to_string()).unwrap_or_default();
            let csv = format!(
                "size,inside,applicable,t3,bound,family,holds\n{},{},{},{},{},{},{holds}\n",
                c.size,
                c.inside,
                c.applicable,
                c.t3,
                c.bound,
                tag.as_deref().unwrap_or("")
            );
            let json = json!({
                "size": c.size,
                "inside": c.inside,
                "applicable": c.applicable,
                "t3": c.t3,
                "bound": c.bound,
                "family": tag,
                "holds": c.holds,
            });
            Ok(Output::new(json, csv))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Count { .. } => "count",
        Command::Search(_) => "search",
        Command::Threshold { .. } => "threshold",
        Command::Classify { .. } => "classify",
        Command::Verify { .. } => "verify",
        Command::Bounds { .. } => "bounds",
        Command::Construct { .. } => "construct",
        Command::Analyze { .. } => "analyze",
    }
}

fn run(cli: &Cli, header: &mut RunHeader) -> Outcome<Output> {
    match &cli.command {
        Command::Count { input } => cmd_count(input, header),
        Command::Search(args) => cmd_search(args, cli.budget_nodes, header),
        Command::Threshold { modulus } => cmd_threshold(*modulus, cli.budget_nodes, header),
        Command::Classify { input } => cmd_classify(input, header),
        Command::Verify { suite, cases, modulus, n_max } => {
            cmd_verify(suite, *cases, *modulus, *n_max, cli.seed, cli.budget_nodes, header)
        }
        Command::Bounds { action } => cmd_bounds(action, header),
        Command::Construct { kind } => cmd_construct(kind, cli.seed, header),
        Command::Analyze { kind } => cmd_analyze(kind, header),
    }
}

fn render(format: Format, header: &RunHeader, out: &Output) -> String {
    match format {
        Format::Json => {
            let doc = json!({ "header": header, "result": out.json });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("output serializes"))
        }
        Format::Csv => format!("{}\n{}", header.comment_line(), out.csv),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("threeap: cannot start thread pool: {e}");
        return ExitCode::from(2);
    }
    eprintln!("threeap: {} worker threads", rayon::current_num_threads());

    let mut header = RunHeader::new(command_name(&cli.command), cli.seed)
        .with("budget_nodes", cli.budget_nodes)
        .with("format", if cli.format == Format::Json { "json" } else { "csv" });
    if let Command::Bounds { action } = &cli.command {
        let sub = match action {
            BoundsCommand::Build { .. } => "build",
            BoundsCommand::Closure { .. } => "closure",
            BoundsCommand::Add { .. } => "add",
            BoundsCommand::Query { .. } => "query",
            BoundsCommand::Export { .. } => "export",
            BoundsCommand::Cutoff { .. } => "cutoff",
        };
        header.command = format!("bounds {sub}");
    }

    let output = match run(&cli, &mut header) {
        Ok(o) => o,
        Err(Failure::Core(e @ Error::BudgetExceeded { .. })) => {
            eprintln!("threeap: {e}");
            return ExitCode::from(3);
        }
        Err(Failure::Core(e)) => {
            eprintln!("threeap: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Input(msg)) => {
            eprintln!("threeap: {msg}");
            return ExitCode::from(2);
        }
    };

    let text = render(cli.format, &header, &output);
    let written = match &cli.out {
        Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("threeap: {e}");
        return ExitCode::from(2);
    }
    if output.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
