//! `fullgroup` — odometer full-group computation from the shell.
//!
//! Every command reads and writes the crate's text formats, so any output
//! can be fed straight back into another command.  `--format json-lines`
//! mirrors each text record as one JSON object per line, field for field.
//!
//! Exit codes: `0` for success (and checks that come back true), `1` for a
//! check that ran and came back false (explanation on standard output),
//! `2` for malformed input or an internal failure (diagnostics on standard
//! error).  Pass `-` in place of a file to read that input from stdin.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fullgroup::lemmas::{default_criterion_samples, render_decomposition, render_witness};
use fullgroup::sample::{random_element, random_element_in, random_orbit_pair, seeded_rng};
use fullgroup::{
    commutant_check, criterion_conditions_hold, criterion_decompose,
    express_by_involution_supports, in_gamma, in_r, lambda_of_clopen, load_oracle_spec,
    parse_boolean_map, parse_clopen, parse_element, parse_point, reconstruct_boolean_map,
    render_rational, verify_conjugacy, verify_orbit_equivalence, verify_w_pi_correspondence,
    BooleanMap, ClopenSet, CommutantWitness, CriterionDecomposition, Error, FullGroupElement,
    IsomorphismOracle, Odometer, Point, VerifyOutcome,
};

type Result<T> = fullgroup::Result<T>;

/// Exact computation in topological full groups of base-p odometers.
#[derive(Parser)]
#[command(name = "fullgroup", version, about)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Plain text records, re-parseable by the matching commands.
    Text,
    /// One JSON object per line carrying the same fields.
    JsonLines,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BoolOp {
    Union,
    Intersect,
    Complement,
    Diff,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonicalize a clopen set.
    Canon {
        /// Clopen-set file (`-` for stdin).
        set: String,
    },
    /// Boolean operations on clopen sets.
    Bool {
        op: BoolOp,
        a: String,
        /// Second operand; not used by `complement`.
        b: Option<String>,
    },
    /// Compose elements left to right: `compose f g` applies g first.
    Compose {
        #[arg(required = true, num_args = 1..)]
        elements: Vec<String>,
    },
    /// Invert an element.
    Invert { element: String },
    /// The support of an element, as a canonical clopen set.
    Support { element: String },
    /// Check whether an element squares to the identity.
    IsInvolution { element: String },
    /// Build an involution supported in a set and moving all of it.
    MakeInvolution {
        #[arg(long, value_name = "FILE")]
        set: String,
    },
    /// Express a clopen set as a formula over involution supports.
    ExpressSupports { set: String },
    /// Check whether an element is supported inside a set (g ∈ Γ_V).
    InGamma { element: String, set: String },
    /// Check whether an element commutes with everything supported in a set.
    CommutantCheck { element: String, set: String },
    /// Check whether an element stabilizes a set (g ∈ R_V); factors on true.
    InR { element: String, set: String },
    /// Split an involution outside R_V as h = π·ρ₁·ρ₂ with h straddling V.
    CriterionDecompose { element: String, set: String },
    /// Decompose, then test the conjugation criterion on a swap family.
    CriterionCheck {
        element: String,
        set: String,
        /// Depth of the sampled swap family.
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Image of a clopen set under an oracle's hidden spatial map.
    Lambda {
        /// Oracle recipe file.
        #[arg(long, value_name = "FILE")]
        oracle: PathBuf,
        set: String,
    },
    /// Recover the hidden map as a cylinder-image table at a depth.
    Reconstruct {
        /// Oracle recipe file.
        #[arg(long, value_name = "FILE")]
        oracle: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Verify supp(α(g)) = Λ(supp g) against sampled members of Γ_supp(g).
    VerifyWpi {
        #[arg(long, value_name = "FILE")]
        oracle: PathBuf,
        element: String,
        /// How many supported elements to sample.
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify that a cylinder map conjugates test elements like the oracle.
    VerifyConjugacy {
        #[arg(long, value_name = "FILE")]
        oracle: PathBuf,
        /// Cylinder-image table file (`reconstruct` output).
        #[arg(long, value_name = "FILE")]
        map: String,
        /// Element files to test; sampled from --seed when omitted.
        elements: Vec<String>,
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify that the hidden map carries orbits onto orbits.
    VerifyOe {
        #[arg(long, value_name = "FILE")]
        oracle: PathBuf,
        /// Cylinder-image table file (`reconstruct` output).
        #[arg(long, value_name = "FILE")]
        map: String,
        /// File of `x y` rational pairs, one per line; sampled when omitted.
        #[arg(long, value_name = "FILE")]
        pairs: Option<String>,
        /// Maximum pinning depth.
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide whether two points lie on one odometer orbit.
    SameOrbit {
        x: String,
        y: String,
        /// Read the arguments as rational values instead of point files.
        #[arg(long)]
        rational: bool,
        /// Digit base for --rational arguments.
        #[arg(long, default_value_t = 2)]
        base: u32,
    },
    /// Exact product measure of a clopen set.
    Measure { set: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, cli.format) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd, fmt: Format) -> Result<u8> {
    match cmd {
        Cmd::Canon { set } => {
            emit_clopen(fmt, &clopen_arg(&set)?);
            Ok(0)
        }
        Cmd::Bool { op, a, b } => cmd_bool(fmt, op, &a, b.as_deref()),
        Cmd::Compose { elements } => {
            let mut iter = elements.iter();
            let first = element_arg(iter.next().expect("clap enforces one element"))?;
            let g = iter.try_fold(first, |acc, arg| acc.compose(&element_arg(arg)?))?;
            emit_element(fmt, &g);
            Ok(0)
        }
        Cmd::Invert { element } => {
            emit_element(fmt, &element_arg(&element)?.invert()?);
            Ok(0)
        }
        Cmd::Support { element } => {
            emit_clopen(fmt, &element_arg(&element)?.support());
            Ok(0)
        }
        Cmd::IsInvolution { element } => {
            let value = element_arg(&element)?.is_involution()?;
            Ok(emit_result(fmt, value, "", &[]))
        }
        Cmd::MakeInvolution { set } => {
            emit_element(fmt, &FullGroupElement::make_involution(&clopen_arg(&set)?)?);
            Ok(0)
        }
        Cmd::ExpressSupports { set } => cmd_express(fmt, &set),
        Cmd::InGamma { element, set } => {
            let value = in_gamma(&element_arg(&element)?, &clopen_arg(&set)?)?;
            Ok(emit_result(fmt, value, "", &[]))
        }
        Cmd::CommutantCheck { element, set } => cmd_commutant(fmt, &element, &set),
        Cmd::InR { element, set } => cmd_in_r(fmt, &element, &set),
        Cmd::CriterionDecompose { element, set } => cmd_criterion_decompose(fmt, &element, &set),
        Cmd::CriterionCheck { element, set, depth } => {
            cmd_criterion_check(fmt, &element, &set, depth)
        }
        Cmd::Lambda { oracle, set } => {
            let image = lambda_of_clopen(&load_oracle(&oracle)?, &clopen_arg(&set)?, true)?;
            emit_clopen(fmt, &image);
            Ok(0)
        }
        Cmd::Reconstruct { oracle, depth } => {
            let map = reconstruct_boolean_map(&load_oracle(&oracle)?, depth, true)?;
            emit_map(fmt, &map);
            Ok(0)
        }
        Cmd::VerifyWpi { oracle, element, samples, seed } => {
            cmd_verify_wpi(fmt, &oracle, &element, samples, seed)
        }
        Cmd::VerifyConjugacy { oracle, map, elements, samples, seed } => {
            cmd_verify_conjugacy(fmt, &oracle, &map, &elements, samples, seed)
        }
        Cmd::VerifyOe { oracle, map, pairs, depth, samples, seed } => {
            cmd_verify_oe(fmt, &oracle, &map, pairs.as_deref(), depth, samples, seed)
        }
        Cmd::SameOrbit { x, y, rational, base } => cmd_same_orbit(fmt, &x, &y, rational, base),
        Cmd::Measure { set } => {
            let a = clopen_arg(&set)?;
            let value = Odometer::new(a.base())?.measure_value(&a)?;
            let rendered = render_rational(&value);
            match fmt {
                Format::Text => println!("measure {rendered}"),
                Format::JsonLines => {
                    println!("{}", json!({"type": "measure", "value": rendered}));
                }
            }
            Ok(0)
        }
    }
}

fn cmd_bool(fmt: Format, op: BoolOp, a: &str, b: Option<&str>) -> Result<u8> {
    let usage = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let sa = clopen_arg(a)?;
    let out = match (op, b) {
        (BoolOp::Complement, None) => sa.complement(),
        (BoolOp::Complement, Some(_)) => {
            return Err(usage("complement takes exactly one set"));
        }
        (_, None) => return Err(usage("this operation needs two sets")),
        (BoolOp::Union, Some(b)) => sa.union(&clopen_arg(b)?)?,
        (BoolOp::Intersect, Some(b)) => sa.intersection(&clopen_arg(b)?)?,
        (BoolOp::Diff, Some(b)) => sa.difference(&clopen_arg(b)?)?,
    };
    emit_clopen(fmt, &out);
    Ok(0)
}

fn cmd_express(fmt: Format, set: &str) -> Result<u8> {
    let a = clopen_arg(set)?;
    let expr = express_by_involution_supports(&a)?;
    let leaves = expr.leaves();
    match fmt {
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "formula {}", expr.formula()).expect("string write");
            for (i, g) in leaves.iter().enumerate() {
                writeln!(out, "[supp{}]", i + 1).expect("string write");
                write!(out, "{g}").expect("string write");
            }
            print!("{out}");
        }
        Format::JsonLines => {
            let leaves: Vec<Value> = leaves.iter().map(|g| element_json(g)).collect();
            println!(
                "{}",
                json!({"type": "expression", "formula": expr.formula(), "leaves": leaves})
            );
        }
    }
    Ok(0)
}

fn cmd_commutant(fmt: Format, element: &str, set: &str) -> Result<u8> {
    let g = element_arg(element)?;
    let v = clopen_arg(set)?;
    let (commutes, witness) = commutant_check(&g, &v)?;
    match witness {
        None => Ok(emit_result(fmt, commutes, "", &[])),
        Some(w) => Ok(emit_result(
            fmt,
            commutes,
            &render_witness(&w),
            &[("witness", witness_json(&w))],
        )),
    }
}

fn cmd_in_r(fmt: Format, element: &str, set: &str) -> Result<u8> {
    let g = element_arg(element)?;
    let v = clopen_arg(set)?;
    match in_r(&g, &v)? {
        (true, Some((inside, outside))) => {
            let extra = format!("[inside]\n{inside}[outside]\n{outside}");
            Ok(emit_result(
                fmt,
                true,
                &extra,
                &[
                    ("inside", element_json(&inside)),
                    ("outside", element_json(&outside)),
                ],
            ))
        }
        _ => Ok(emit_result(fmt, false, "", &[])),
    }
}

fn cmd_criterion_decompose(fmt: Format, element: &str, set: &str) -> Result<u8> {
    let pi = element_arg(element)?;
    let v = clopen_arg(set)?;
    match criterion_decompose(&pi, &v) {
        Ok(d) => {
            match fmt {
                Format::Text => print!("{}", render_decomposition(&d)),
                Format::JsonLines => println!("{}", decomposition_json(&d)),
            }
            Ok(0)
        }
        Err(e @ (Error::NotInvolution | Error::InGeneratedSubgroup)) => Ok(reject(fmt, &e)),
        Err(e) => Err(e),
    }
}

fn cmd_criterion_check(fmt: Format, element: &str, set: &str, depth: usize) -> Result<u8> {
    let pi = element_arg(element)?;
    let v = clopen_arg(set)?;
    match criterion_decompose(&pi, &v) {
        Ok(d) => {
            let samples = default_criterion_samples(&d.h, &v, depth)?;
            let value = criterion_conditions_hold(&d.h, &v, &samples)?;
            Ok(emit_result(
                fmt,
                value,
                &format!("samples {}\n", samples.len()),
                &[("samples", samples.len().into())],
            ))
        }
        Err(e @ (Error::NotInvolution | Error::InGeneratedSubgroup)) => Ok(reject(fmt, &e)),
        Err(e) => Err(e),
    }
}

fn cmd_verify_wpi(
    fmt: Format,
    oracle: &Path,
    element: &str,
    samples: usize,
    seed: u64,
) -> Result<u8> {
    let oracle = load_oracle(oracle)?;
    let g = element_arg(element)?;
    let supp = g.support();
    let mut family = Vec::new();
    if !supp.is_empty() {
        let mut rng = seeded_rng(seed);
        let mut attempts = 0;
        while family.len() < samples && attempts < 4 * samples + 8 {
            attempts += 1;
            match random_element_in(&mut rng, &supp, 2) {
                Ok(h) => family.push(h),
                // A draw at the support's own depth can leave a single
                // cell with nothing to swap; redraw deeper.
                Err(Error::NotSplittable { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let out = verify_w_pi_correspondence(&oracle, &g, &family, true)?;
    Ok(emit_verify(fmt, &out))
}

fn cmd_verify_conjugacy(
    fmt: Format,
    oracle: &Path,
    map: &str,
    elements: &[String],
    samples: usize,
    seed: u64,
) -> Result<u8> {
    let oracle = load_oracle(oracle)?;
    let map = map_arg(map)?;
    let elements = if elements.is_empty() {
        let mut rng = seeded_rng(seed);
        let depth = map.depth().min(4).max(1);
        (0..samples.max(1))
            .map(|_| random_element(&mut rng, map.base(), depth, 5))
            .collect::<Result<Vec<_>>>()?
    } else {
        elements.iter().map(|a| element_arg(a)).collect::<Result<Vec<_>>>()?
    };
    let out = verify_conjugacy(&oracle, &map, &elements, true)?;
    Ok(emit_verify(fmt, &out))
}

fn cmd_verify_oe(
    fmt: Format,
    oracle: &Path,
    map: &str,
    pairs: Option<&str>,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<u8> {
    let oracle = load_oracle(oracle)?;
    let map = map_arg(map)?;
    let base = oracle.domain().base();
    let pairs = match pairs {
        Some(arg) => pairs_arg(arg, base)?,
        None => {
            let mut rng = seeded_rng(seed);
            (0..samples.max(1))
                .map(|_| random_orbit_pair(&mut rng, base, 6))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let (out, matches) = verify_orbit_equivalence(&oracle, &map, &pairs, depth, true)?;
    for (i, m) in matches.iter().enumerate() {
        match fmt {
            Format::Text => println!("match {i} power {} depth {}", m.power, m.depth_used),
            Format::JsonLines => println!(
                "{}",
                json!({"type": "match", "pair": i, "power": m.power, "depth": m.depth_used})
            ),
        }
    }
    Ok(emit_verify(fmt, &out))
}

fn cmd_same_orbit(fmt: Format, x: &str, y: &str, rational: bool, base: u32) -> Result<u8> {
    let (x, y) = if rational {
        (rational_point(base, x)?, rational_point(base, y)?)
    } else {
        (point_arg(x)?, point_arg(y)?)
    };
    match Odometer::new(x.base())?.same_orbit(&x, &y)? {
        Some(n) => Ok(emit_result(
            fmt,
            true,
            &format!("power {n}\n"),
            &[("power", n.to_string().into())],
        )),
        None => Ok(emit_result(fmt, false, "", &[])),
    }
}

// ---------------------------------------------------------------- inputs

fn read_input(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{arg}: {e}"))))
    }
}

fn source_name(arg: &str) -> &str {
    if arg == "-" {
        "<stdin>"
    } else {
        arg
    }
}

/// Prefixes parse diagnostics with the file they came from.
fn annotate(arg: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", source_name(arg)),
        },
        other => other,
    }
}

fn clopen_arg(arg: &str) -> Result<ClopenSet> {
    parse_clopen(&read_input(arg)?).map_err(|e| annotate(arg, e))
}

fn element_arg(arg: &str) -> Result<FullGroupElement> {
    parse_element(&read_input(arg)?).map_err(|e| annotate(arg, e))
}

fn point_arg(arg: &str) -> Result<Point> {
    parse_point(&read_input(arg)?).map_err(|e| annotate(arg, e))
}

fn map_arg(arg: &str) -> Result<BooleanMap> {
    parse_boolean_map(&read_input(arg)?).map_err(|e| annotate(arg, e))
}

fn load_oracle(path: &Path) -> Result<IsomorphismOracle> {
    let spec = load_oracle_spec(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })?;
    spec.build()
}

/// Builds a point from a rational literal such as `5/3` or `-2`.
fn rational_point(base: u32, s: &str) -> Result<Point> {
    let text = format!("base {base}\nrational {s}\n");
    parse_point(&text).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::Parse { line: 1, msg },
        other => other,
    })
}

/// Parses a pairs file: per line, two whitespace-separated rationals.
/// Blank lines and `#` comments are skipped.
fn pairs_arg(arg: &str, base: u32) -> Result<Vec<(Point, Point)>> {
    let text = read_input(arg)?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Parse {
            line: idx + 1,
            msg: format!("{}: expected two rationals", source_name(arg)),
        };
        let mut tokens = line.split_whitespace();
        let (xs, ys) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(xs), Some(ys), None) => (xs, ys),
            _ => return Err(bad()),
        };
        let reline = |e: Error| match e {
            Error::Parse { msg, .. } => Error::Parse {
                line: idx + 1,
                msg: format!("{}: {msg}", source_name(arg)),
            },
            other => other,
        };
        pairs.push((
            rational_point(base, xs).map_err(reline)?,
            rational_point(base, ys).map_err(reline)?,
        ));
    }
    if pairs.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: format!("{}: no pairs given", source_name(arg)),
        });
    }
    Ok(pairs)
}

// --------------------------------------------------------------- outputs

fn emit_clopen(fmt: Format, s: &ClopenSet) {
    match fmt {
        Format::Text => print!("{s}"),
        Format::JsonLines => println!("{}", clopen_json(s)),
    }
}

fn emit_element(fmt: Format, g: &FullGroupElement) {
    match fmt {
        Format::Text => print!("{g}"),
        Format::JsonLines => println!("{}", element_json(g)),
    }
}

fn emit_map(fmt: Format, m: &BooleanMap) {
    match fmt {
        Format::Text => print!("{m}"),
        Format::JsonLines => println!("{}", map_json(m)),
    }
}

/// Prints `result <value>` plus any extra lines and returns the exit code.
/// `extra_text` must be empty or newline-terminated; `extra_json` lands as
/// additional fields on the one JSON object.
fn emit_result(fmt: Format, value: bool, extra_text: &str, extra_json: &[(&str, Value)]) -> u8 {
    match fmt {
        Format::Text => print!("result {value}\n{extra_text}"),
        Format::JsonLines => {
            let mut obj = serde_json::Map::new();
            obj.insert("type".into(), "result".into());
            obj.insert("value".into(), value.into());
            for (k, v) in extra_json {
                obj.insert((*k).into(), v.clone());
            }
            println!("{}", Value::Object(obj));
        }
    }
    u8::from(!value)
}

/// A semantically rejected input (not a parse failure): report and exit 1.
fn reject(fmt: Format, e: &Error) -> u8 {
    let reason = e.to_string();
    emit_result(fmt, false, &format!("reason {reason}\n"), &[("reason", reason.clone().into())])
}

fn emit_verify(fmt: Format, out: &VerifyOutcome) -> u8 {
    match fmt {
        Format::Text => print!(
            "passed {}\ncases {}\ndetail {}\n",
            out.passed, out.cases, out.detail
        ),
        Format::JsonLines => println!(
            "{}",
            json!({"type": "verify", "passed": out.passed, "cases": out.cases, "detail": out.detail})
        ),
    }
    u8::from(!out.passed)
}

fn words_json(s: &ClopenSet) -> Value {
    Value::Array(s.words().iter().map(|w| Value::String(w.to_string())).collect())
}

fn clopen_json(s: &ClopenSet) -> Value {
    json!({"type": "clopen", "base": s.base(), "words": words_json(s)})
}

fn element_json(g: &FullGroupElement) -> Value {
    let table: Vec<Value> = g
        .table()
        .iter()
        .map(|(w, n)| json!([w.to_string(), n]))
        .collect();
    json!({"type": "element", "base": g.base(), "table": table})
}

fn digit_string(digits: &[u8]) -> String {
    digits
        .iter()
        .map(|&d| char::from_digit(u32::from(d), 36).expect("base ≤ 36"))
        .collect()
}

fn point_json(x: &Point) -> Value {
    json!({
        "type": "point",
        "base": x.base(),
        "pre": digit_string(x.preperiod()),
        "per": digit_string(x.period()),
        "rational": render_rational(&x.to_rational()),
    })
}

fn witness_json(w: &CommutantWitness) -> Value {
    json!({
        "rho": element_json(&w.rho),
        "point": point_json(&w.point),
        "left": point_json(&w.left),
        "right": point_json(&w.right),
    })
}

fn decomposition_json(d: &CriterionDecomposition) -> Value {
    json!({
        "type": "decomposition",
        "a": clopen_json(&d.a),
        "b": clopen_json(&d.b),
        "o": clopen_json(&d.o),
        "rho1": element_json(&d.rho1),
        "rho2": element_json(&d.rho2),
        "h": element_json(&d.h),
    })
}

fn map_json(m: &BooleanMap) -> Value {
    let entries: Vec<Value> = m
        .entries()
        .iter()
        .map(|(w, img)| json!([w.to_string(), words_json(img)]))
        .collect();
    json!({"type": "boolean-map", "base": m.base(), "depth": m.depth(), "entries": entries})
}
