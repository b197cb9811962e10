use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crane_yetter::homology::{betti_numbers, intersection_form, signature_of_form};
use crane_yetter::qcategory::{consistency_checks_with, CategoryError, QuantumData, SixJTable, PENTAGON_CAP};
use crane_yetter::scalars::{ComplexF, Cyclo};
use crane_yetter::simplicial::{parse_any, Triangulation, TriangulationError};
use crane_yetter::statesum::{crane_yetter_state_sum, plan_contraction, StateSumError, StateSumOptions, DEFAULT_MEM_CAP};
use crane_yetter::tqft::{self, BFParams, TqftError, VerifyOptions};

#[derive(Parser, Debug)]
#[command(name = "cy", version, about = "Crane-Yetter invariants of triangulated 4-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave wall-clock fields out of the output.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(clap::Args, Debug, Clone)]
struct Input {
    /// Triangulation in the text or JSON format.
    #[arg(long)]
    file: PathBuf,
    /// Use the opposite orientation.
    #[arg(long)]
    reverse_orientation: bool,
}

#[derive(clap::Args, Debug, Clone)]
struct Engine {
    #[arg(long, default_value_t = DEFAULT_MEM_CAP)]
    mem_cap_bytes: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl Engine {
    fn options(&self) -> StateSumOptions {
        StateSumOptions { mem_cap_bytes: self.mem_cap_bytes, threads: self.threads.max(1) }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ComposeOp {
    Glue,
    ConnectedSum,
    DisjointUnion,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact state sum.
    Invariant {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        level: u32,
        #[command(flatten)]
        engine: Engine,
    },
    /// Closed-form value from χ and σ.
    Predict {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        level: u32,
    },
    /// State sum, closed form and BF value, compared.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        predict_only: bool,
        #[command(flatten)]
        engine: Engine,
    },
    /// Betti numbers, Euler characteristic, intersection form and signature.
    Homology {
        #[command(flatten)]
        input: Input,
    },
    /// Pentagon, orthogonality and degree checks of the recoupling data.
    CategoryCheck {
        #[arg(long)]
        level: u32,
        /// Corrupt one recoupling coefficient first.
        #[arg(long)]
        perturb: bool,
        #[arg(long, default_value_t = PENTAGON_CAP)]
        pentagon_cap: usize,
    },
    /// Build a new triangulation from two inputs.
    Compose {
        #[arg(long, value_enum)]
        op: ComposeOp,
        /// The two summands, in order.
        #[arg(long, num_args = 2, required = true)]
        file: Vec<PathBuf>,
        /// Enter the second summand with reversed orientation.
        #[arg(long)]
        reverse_second: bool,
        /// Boundary vertex map for `glue`, as `a:b,c:d,...`.
        #[arg(long)]
        map: Option<String>,
        /// Where to write the composite; `.json` selects the JSON format.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// BF partition value `exp(−36π² i σ / Λ)`.
    Bf {
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<i64>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        reverse_orientation: bool,
        /// Λ as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// Take Λ from the level's framing constant instead.
        #[arg(long)]
        level: Option<u32>,
    },
}

/// A failure with its exit code and machine-readable code.
#[derive(Debug)]
struct Failure {
    exit: u8,
    code: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { exit: 2, code: "usage", message: message.into() }
    }

    fn input(code: &'static str, message: impl Into<String>) -> Failure {
        Failure { exit: 3, code, message: message.into() }
    }
}

impl From<TriangulationError> for Failure {
    fn from(e: TriangulationError) -> Self {
        let code = match e {
            TriangulationError::EmptyInput | TriangulationError::SyntaxError { .. } | TriangulationError::DegenerateSimplex { .. } => "parse",
            TriangulationError::NonOrientable | TriangulationError::InconsistentSigns(_) => "non_orientable",
            TriangulationError::NotClosed(_) => "not_closed",
            TriangulationError::BoundaryMismatch(_) | TriangulationError::InvalidMoveLocation(_) => "invalid_composition",
        };
        Failure::input(code, e.to_string())
    }
}

impl From<StateSumError> for Failure {
    fn from(e: StateSumError) -> Self {
        match e {
            StateSumError::PlanTooWide { .. } => Failure { exit: 4, code: "plan_too_wide", message: e.to_string() },
            StateSumError::NotClosed => Failure::input("not_closed", e.to_string()),
            StateSumError::NonOrientable => Failure::input("non_orientable", e.to_string()),
            StateSumError::DeltaComplexUnsupported => Failure::input("delta_complex_unsupported", e.to_string()),
            StateSumError::PlanMismatch => Failure::input("plan_mismatch", e.to_string()),
        }
    }
}

impl From<CategoryError> for Failure {
    fn from(e: CategoryError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<TqftError> for Failure {
    fn from(e: TqftError) -> Self {
        match e {
            TqftError::ZeroLambda => Failure::usage(e.to_string()),
            TqftError::ZeroPhase => Failure::input("zero_phase", e.to_string()),
            TqftError::Category(c) => c.into(),
            TqftError::Triangulation(t) => t.into(),
            TqftError::StateSum(s) => s.into(),
        }
    }
}

fn load(path: &PathBuf) -> Result<Triangulation, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{}: {}", path.display(), e)))?;
    Ok(parse_any(&text)?)
}

fn load_input(input: &Input) -> Result<(String, Triangulation), Failure> {
    let t = load(&input.file)?;
    let t = if t.is_oriented() { t } else { t.validate_and_orient()? };
    let t = if input.reverse_orientation { t.reverse_orientation() } else { t };
    Ok((input.file.display().to_string(), t))
}

fn complex(z: ComplexF) -> Value {
    json!([z.re + 0.0, z.im + 0.0])
}

fn exact(z: &Cyclo) -> Value {
    json!({ "exact": z.to_string(), "complex": complex(z.to_complex()) })
}

fn parse_complex(s: &str) -> Result<ComplexF, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Failure::usage(format!("expected a complex number as \"re,im\", got {:?}", s));
    match parts[..] {
        [re, im] => Ok(ComplexF::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?)),
        [re] => Ok(ComplexF::new(re.parse().map_err(|_| bad())?, 0.0)),
        _ => Err(bad()),
    }
}

fn parse_map(s: &str) -> Result<BTreeMap<u32, u32>, Failure> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| Failure::usage(format!("bad map entry {:?}", p)))?;
            let v = |x: &str| x.trim().parse::<u32>().map_err(|_| Failure::usage(format!("bad vertex {:?}", x)));
            Ok((v(a)?, v(b)?))
        })
        .collect()
}

fn require_level(r: u32) -> Result<QuantumData, Failure> {
    Ok(QuantumData::build(r)?)
}

/// Returns the document and whether the run counts as a pass.
fn run(cli: &Cli) -> Result<(Value, bool), Failure> {
    let start = Instant::now();
    let timing = |mut v: Value| {
        if !cli.no_timing {
            v["seconds"] = json!(start.elapsed().as_secs_f64());
        }
        v
    };
    match &cli.command {
        Command::Invariant { input, level, engine } => {
            let q = require_level(*level)?;
            let (file, t) = load_input(input)?;
            let t = t.require_closed_oriented()?;
            let plan = plan_contraction(&t);
            let z = crane_yetter_state_sum(&t, &q, &plan, &engine.options())?;
            let n = q.global_dimension().to_complex().re;
            let zp = z.to_complex() / n.powf(t.euler_characteristic() as f64 / 2.0);
            let doc = json!({
                "file": file,
                "r": level,
                "Z_CY": exact(&z),
                "Z_prime": complex(zp),
                "chi": t.euler_characteristic(),
                "n": t.counts(),
                "plan_cost": plan.cost(q.num_labels()),
                "max_frontier": plan.max_frontier(),
            });
            Ok((timing(doc), true))
        }
        Command::Predict { input, level } => {
            let q = require_level(*level)?;
            let (file, t) = load_input(input)?;
            let t = t.require_closed_oriented()?;
            let form = intersection_form(&t)?;
            let sigma = signature_of_form(&form.matrix);
            let chi = t.euler_characteristic();
            let doc = json!({
                "file": file,
                "r": level,
                "chi": chi,
                "sigma": sigma,
                "N": exact(q.global_dimension()),
                "y": complex(q.y()),
                "predicted": complex(tqft::predict_from_topology(chi, sigma, &q)),
                "Z_prime": complex(q.y().powi(sigma as i32)),
            });
            Ok((timing(doc), true))
        }
        Command::Verify { input, level, predict_only, engine } => {
            let (file, t) = load_input(input)?;
            let opts = VerifyOptions { predict_only: *predict_only, state_sum: engine.options() };
            let mut rep = tqft::verify_manifold(&t, &file, *level, &opts)?;
            if cli.no_timing {
                rep.seconds = None;
            }
            let passed = rep.passed;
            let mut doc = serde_json::to_value(&rep).expect("report serializes");
            if cli.no_timing {
                doc.as_object_mut().unwrap().remove("seconds");
            }
            Ok((doc, passed))
        }
        Command::Homology { input } => {
            let (file, t) = load_input(input)?;
            let betti = betti_numbers(&t);
            let mut doc = json!({
                "file": file,
                "n": t.counts(),
                "betti": betti,
                "chi": t.euler_characteristic(),
                "closed": t.is_closed(),
            });
            if t.is_closed() {
                let form = intersection_form(&t)?;
                doc["signature"] = json!(signature_of_form(&form.matrix));
                doc["intersection_form"] = json!(form.matrix_strings());
            }
            Ok((timing(doc), true))
        }
        Command::CategoryCheck { level, perturb, pentagon_cap } => {
            let q = require_level(*level)?;
            let mut table = SixJTable::build(&q);
            let mut perturbed = None;
            if *perturb {
                let mut keys: Vec<[u8; 6]> = table.keys().copied().filter(|k| k.iter().all(|&x| x > 0)).collect();
                keys.sort();
                let k = keys.first().copied().or_else(|| table.keys().copied().min()).expect("nonempty table");
                let v = table.get(k) + Cyclo::one(q.conductor());
                table.set(k, v);
                perturbed = Some(k);
            }
            let rep = consistency_checks_with(&q, &table, *pentagon_cap);
            let (n, ap, am, y) = q.category_constants();
            let passed = rep.passed();
            let verdict = |f: &str| if rep.entry(f).is_some_and(|e| e.passed) { "pass" } else { "fail" };
            let doc = json!({
                "r": level,
                "N": n.as_rational().map_or_else(|| n.to_string(), |v| v.to_string()),
                "a_plus": complex(ap.to_complex()),
                "a_minus": complex(am.to_complex()),
                "y": complex(y),
                "pentagon": verdict("pentagon"),
                "orthogonality": verdict("orthogonality"),
                "perturbed": perturbed,
                "entries": rep.entries,
                "passed": passed,
            });
            Ok((timing(doc), passed))
        }
        Command::Compose { op, file, reverse_second, map, write } => {
            let a = load(&file[0])?;
            let b = load(&file[1])?;
            let b = if *reverse_second { b.validate_and_orient()?.reverse_orientation() } else { b };
            let t = match op {
                ComposeOp::DisjointUnion => a.disjoint_union(&b),
                ComposeOp::ConnectedSum => a.connected_sum(&b, false)?,
                ComposeOp::Glue => {
                    let m = parse_map(map.as_deref().ok_or_else(|| Failure::usage("glue needs --map"))?)?;
                    a.glue(&b, &m)?
                }
            };
            let json_out = write.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
            let body = if json_out { t.to_json() } else { t.to_text() };
            let mut doc = json!({
                "op": format!("{:?}", op),
                "n": t.counts(),
                "chi": t.euler_characteristic(),
                "closed": t.is_closed(),
                "simplicial": t.is_simplicial(),
            });
            match write {
                Some(p) => {
                    std::fs::write(p, body).map_err(|e| Failure::input("io", format!("{}: {}", p.display(), e)))?;
                    doc["written"] = json!(p.display().to_string());
                }
                None => doc["triangulation"] = json!(body),
            }
            Ok((doc, true))
        }
        Command::Bf { sigma, file, reverse_orientation, lambda, level } => {
            let (sigma, file) = match (sigma, file) {
                (Some(s), None) => (*s, None),
                (None, Some(f)) => {
                    let input = Input { file: f.clone(), reverse_orientation: *reverse_orientation };
                    let (name, t) = load_input(&input)?;
                    let t = t.require_closed_oriented()?;
                    (signature_of_form(&intersection_form(&t)?.matrix), Some(name))
                }
                _ => return Err(Failure::usage("give exactly one of --sigma and --file")),
            };
            let params = match (lambda, level) {
                (Some(l), None) => BFParams::new(parse_complex(l)?)?,
                (None, Some(r)) => tqft::lambda_for_y(&require_level(*r)?)?,
                _ => return Err(Failure::usage("give exactly one of --lambda and --level")),
            };
            let doc = json!({
                "file": file,
                "sigma": sigma,
                "lambda": complex(params.lambda()),
                "branch": params.branch,
                "value": complex(tqft::bf_correspondence(sigma, &params)),
            });
            Ok((doc, true))
        }
    }
}

fn emit(cli_out: Option<&PathBuf>, doc: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("json") + "\n";
    match cli_out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input("io", format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn error_doc(f: &Failure) -> Value {
    json!({ "error": f.code, "message": f.message })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return ExitCode::SUCCESS;
            }
            eprint!("{}", e.render());
            println!("{}", serde_json::to_string_pretty(&error_doc(&Failure::usage(e.kind().to_string()))).unwrap());
            return ExitCode::from(2);
        }
    };
    let result = run(&cli).and_then(|(doc, passed)| emit(cli.out.as_ref(), &doc).map(|_| passed));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let doc = error_doc(&f);
            if emit(cli.out.as_ref(), &doc).is_err() {
                println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit)
        }
    }
}
