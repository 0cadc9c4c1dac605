use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fullgroup"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn run_stdin(dir: &Path, args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .current_dir(dir)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn out_str(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn err_str(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("fgcli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Workdir(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }

    fn write(&self, name: &str, content: &str) {
        std::fs::write(self.0.join(name), content).unwrap();
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.0.join(name)).unwrap()
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

/// `base 2` oracle: conjugation by a swap, then the digit reflection.
fn write_flip_oracle(w: &Workdir) {
    w.write("twist.elem", "base 2\n00:2\n01:-2\n1:0\n");
    w.write("flip.oracle", "base 2\ninner twist.elem\ndigitwise\n");
}

#[test]
fn canon_output_reparses_to_the_same_set() {
    let w = Workdir::new("canon");
    w.write("a.cset", "base 2\n01\n00\n");
    let first = run_in(w.path(), &["canon", "a.cset"]);
    assert_eq!(code(&first), 0);
    assert_eq!(out_str(&first), "base 2\n0\n");
    let again = run_stdin(w.path(), &["canon", "-"], &out_str(&first));
    assert_eq!(out_str(&again), out_str(&first));
}

#[test]
fn bool_operations_and_measure() {
    let w = Workdir::new("bool");
    w.write("a.cset", "base 2\n0\n");
    w.write("b.cset", "base 2\n11\n");
    let union = run_in(w.path(), &["bool", "union", "a.cset", "b.cset"]);
    assert_eq!(out_str(&union), "base 2\n0\n11\n");
    let compl = run_in(w.path(), &["bool", "complement", "a.cset"]);
    assert_eq!(out_str(&compl), "base 2\n1\n");
    let measure = run_in(w.path(), &["measure", "b.cset"]);
    assert_eq!(out_str(&measure), "measure 1/4\n");
    let arity = run_in(w.path(), &["bool", "union", "a.cset"]);
    assert_eq!(code(&arity), 2);
}

#[test]
fn involution_factory_round_trip() {
    let w = Workdir::new("mkinv");
    w.write("a.cset", "base 2\n0\n");
    let made = run_in(w.path(), &["make-involution", "--set", "a.cset"]);
    assert_eq!(code(&made), 0);
    w.write("pi.elem", &out_str(&made));
    assert_eq!(code(&run_in(w.path(), &["is-involution", "pi.elem"])), 0);
    assert_eq!(code(&run_in(w.path(), &["in-gamma", "pi.elem", "a.cset"])), 0);
    let square = run_in(w.path(), &["compose", "pi.elem", "pi.elem"]);
    assert_eq!(out_str(&square), "base 2\nε:0\n");
}

#[test]
fn compose_invert_support_chain() {
    let w = Workdir::new("elem");
    w.write("g.elem", "base 2\n00:2\n01:-2\n1:0\n");
    let inv = run_in(w.path(), &["invert", "g.elem"]);
    w.write("ginv.elem", &out_str(&inv));
    let product = run_in(w.path(), &["compose", "g.elem", "ginv.elem"]);
    assert_eq!(out_str(&product), "base 2\nε:0\n");
    let support = run_in(w.path(), &["support", "g.elem"]);
    assert_eq!(out_str(&support), "base 2\n0\n");
}

#[test]
fn express_supports_leaves_evaluate_back() {
    let w = Workdir::new("express");
    w.write("a.cset", "base 2\n10\n");
    let out = run_in(w.path(), &["express-supports", "a.cset"]);
    assert_eq!(code(&out), 0);
    let text = out_str(&out);
    assert!(text.starts_with("formula "));
    assert!(text.contains("[supp1]"));
    // Each leaf section is a well-formed element file.
    for section in text.split("[supp").skip(1) {
        let body = section.splitn(2, "]\n").nth(1).unwrap();
        fullgroup::parse_element(body).unwrap();
    }
}

#[test]
fn subgroup_membership_exit_codes() {
    let w = Workdir::new("membership");
    w.write("a.cset", "base 2\n0\n");
    w.write("rho.elem", "base 2\n0:0\n10:10\n11:-10\n");
    w.write("cross.elem", "base 2\n00:0\n10:0\n01:1\n11:-1\n");
    assert_eq!(code(&run_in(w.path(), &["in-gamma", "rho.elem", "a.cset"])), 1);
    let in_r = run_in(w.path(), &["in-r", "rho.elem", "a.cset"]);
    assert_eq!(code(&in_r), 0);
    assert!(out_str(&in_r).contains("[inside]"));
    assert_eq!(code(&run_in(w.path(), &["in-r", "cross.elem", "a.cset"])), 1);
    let comm = run_in(w.path(), &["commutant-check", "cross.elem", "a.cset"]);
    assert_eq!(code(&comm), 1);
    let text = out_str(&comm);
    assert!(text.starts_with("result false\n"));
    // The explanation is a parseable witness.
    let witness = fullgroup::lemmas::parse_witness(&text["result false\n".len()..]).unwrap();
    let g = fullgroup::parse_element(&w.read("cross.elem")).unwrap();
    let v = fullgroup::parse_clopen(&w.read("a.cset")).unwrap();
    assert!(witness.verify(&g, &v).unwrap());
}

#[test]
fn criterion_commands_cover_both_outcomes() {
    let w = Workdir::new("criterion");
    w.write("a.cset", "base 2\n0\n");
    w.write("cross.elem", "base 2\n00:0\n10:0\n01:1\n11:-1\n");
    w.write("inside.elem", "base 2\n00:2\n01:-2\n1:0\n");
    let dec = run_in(w.path(), &["criterion-decompose", "cross.elem", "a.cset"]);
    assert_eq!(code(&dec), 0);
    let parsed = fullgroup::lemmas::parse_decomposition(&out_str(&dec)).unwrap();
    let pi = fullgroup::parse_element(&w.read("cross.elem")).unwrap();
    let v = fullgroup::parse_clopen(&w.read("a.cset")).unwrap();
    parsed.validate_against(&pi, &v).unwrap();
    assert_eq!(code(&run_in(w.path(), &["criterion-check", "cross.elem", "a.cset"])), 0);
    // An involution already inside R_V is a checked negative, not an error.
    let negative = run_in(w.path(), &["criterion-decompose", "inside.elem", "a.cset"]);
    assert_eq!(code(&negative), 1);
    assert!(out_str(&negative).contains("reason "));
}

#[test]
fn reconstruct_then_verify_chain() {
    let w = Workdir::new("reconstruct");
    write_flip_oracle(&w);
    let rec = run_in(w.path(), &["reconstruct", "--oracle", "flip.oracle", "--depth", "4"]);
    assert_eq!(code(&rec), 0);
    let map = fullgroup::parse_boolean_map(&out_str(&rec)).unwrap();
    assert_eq!(map.depth(), 4);
    w.write("flip.bmap", &out_str(&rec));
    let conj = run_in(
        w.path(),
        &["verify-conjugacy", "--oracle", "flip.oracle", "--map", "flip.bmap", "--samples", "6"],
    );
    assert_eq!(code(&conj), 0, "{}", out_str(&conj));
    let oe = run_in(
        w.path(),
        &["verify-oe", "--oracle", "flip.oracle", "--map", "flip.bmap", "--samples", "5"],
    );
    assert_eq!(code(&oe), 0, "{}", out_str(&oe));
    assert!(out_str(&oe).contains("match 0 power "));
    let wpi = run_in(
        w.path(),
        &["verify-wpi", "--oracle", "flip.oracle", "twist.elem", "--samples", "5"],
    );
    assert_eq!(code(&wpi), 0, "{}", out_str(&wpi));
}

#[test]
fn lambda_matches_reconstructed_row() {
    let w = Workdir::new("lambda");
    write_flip_oracle(&w);
    w.write("v.cset", "base 2\n0\n");
    let lam = run_in(w.path(), &["lambda", "--oracle", "flip.oracle", "v.cset"]);
    assert_eq!(out_str(&lam), "base 2\n1\n");
}

#[test]
fn tampered_map_fails_checks_with_exit_one() {
    let w = Workdir::new("tamper");
    write_flip_oracle(&w);
    let rec = run_in(w.path(), &["reconstruct", "--oracle", "flip.oracle", "--depth", "4"]);
    let tampered = out_str(&rec)
        .replace("0000 -> 1011", "0000 -> 1010*")
        .replace("0001 -> 1010", "0001 -> 1011")
        .replace("1010*", "1010");
    w.write("bad.bmap", &tampered);
    let conj = run_in(
        w.path(),
        &["verify-conjugacy", "--oracle", "flip.oracle", "--map", "bad.bmap"],
    );
    assert_eq!(code(&conj), 1);
    assert!(out_str(&conj).starts_with("passed false\n"));
    // A pair through the tampered cylinder [0000] is caught deterministically.
    w.write("hit.pairs", "0 4\n");
    let oe = run_in(
        w.path(),
        &["verify-oe", "--oracle", "flip.oracle", "--map", "bad.bmap", "--pairs", "hit.pairs"],
    );
    assert_eq!(code(&oe), 1, "{}", out_str(&oe));
}

#[test]
fn same_orbit_reads_rationals_and_points() {
    let w = Workdir::new("orbit");
    let yes = run_in(w.path(), &["same-orbit", "--rational", "5/3", "--", "-1/3"]);
    assert_eq!(code(&yes), 0);
    assert_eq!(out_str(&yes), "result true\npower -2\n");
    let no = run_in(w.path(), &["same-orbit", "--rational", "1/3", "1/5"]);
    assert_eq!(code(&no), 1);
    w.write("x.pt", "base 3\npre ?\nper 1\n");
    w.write("y.pt", "base 3\npre 2\nper 1\n");
    let files = run_in(w.path(), &["same-orbit", "x.pt", "y.pt"]);
    assert_eq!(out_str(&files), "result true\npower 1\n");
}

#[test]
fn verify_oe_accepts_a_pairs_file() {
    let w = Workdir::new("pairs");
    write_flip_oracle(&w);
    let rec = run_in(w.path(), &["reconstruct", "--oracle", "flip.oracle", "--depth", "3"]);
    w.write("flip.bmap", &out_str(&rec));
    w.write("pp.pairs", "# one pair per line\n5/3 -1/3\n0 4\n");
    let oe = run_in(
        w.path(),
        &["verify-oe", "--oracle", "flip.oracle", "--map", "flip.bmap", "--pairs", "pp.pairs"],
    );
    assert_eq!(code(&oe), 0, "{}", out_str(&oe));
    assert_eq!(out_str(&oe).lines().filter(|l| l.starts_with("match ")).count(), 2);
    // Points off one orbit are an input error, not a checked false.
    w.write("off.pairs", "1/3 1/5\n");
    let off = run_in(
        w.path(),
        &["verify-oe", "--oracle", "flip.oracle", "--map", "flip.bmap", "--pairs", "off.pairs"],
    );
    assert_eq!(code(&off), 2);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let w = Workdir::new("seed");
    write_flip_oracle(&w);
    let rec = run_in(w.path(), &["reconstruct", "--oracle", "flip.oracle", "--depth", "3"]);
    w.write("flip.bmap", &out_str(&rec));
    let args = [
        "verify-conjugacy", "--oracle", "flip.oracle", "--map", "flip.bmap",
        "--samples", "8", "--seed", "42",
    ];
    let first = run_in(w.path(), &args);
    let second = run_in(w.path(), &args);
    assert_eq!(first.stdout, second.stdout);
    let oe_args = [
        "verify-oe", "--oracle", "flip.oracle", "--map", "flip.bmap",
        "--samples", "6", "--seed", "7",
    ];
    let third = run_in(w.path(), &oe_args);
    let fourth = run_in(w.path(), &oe_args);
    assert_eq!(third.stdout, fourth.stdout);
}

#[test]
fn json_lines_mirror_text_fields() {
    let w = Workdir::new("json");
    write_flip_oracle(&w);
    w.write("a.cset", "base 2\n01\n00\n");
    let canon = run_in(w.path(), &["canon", "a.cset", "--format", "json-lines"]);
    let v: serde_json::Value = serde_json::from_str(out_str(&canon).trim()).unwrap();
    assert_eq!(v["type"], "clopen");
    assert_eq!(v["words"][0], "0");
    let rec = run_in(
        w.path(),
        &["reconstruct", "--oracle", "flip.oracle", "--depth", "2", "--format", "json-lines"],
    );
    let v: serde_json::Value = serde_json::from_str(out_str(&rec).trim()).unwrap();
    assert_eq!(v["type"], "boolean-map");
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    let text = run_in(w.path(), &["reconstruct", "--oracle", "flip.oracle", "--depth", "2"]);
    w.write("flip.bmap", &out_str(&text));
    let oe = run_in(
        w.path(),
        &[
            "verify-oe", "--oracle", "flip.oracle", "--map", "flip.bmap",
            "--samples", "3", "--format", "json-lines",
        ],
    );
    let lines: Vec<serde_json::Value> = out_str(&oe)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.last().unwrap()["type"], "verify");
    assert_eq!(lines.last().unwrap()["passed"], true);
    assert!(lines[..lines.len() - 1].iter().all(|l| l["type"] == "match"));
}

#[test]
fn malformed_files_exit_two_with_line_numbers() {
    let w = Workdir::new("diagnostics");
    w.write("bad.cset", "base 2\n01\n7q\n");
    let canon = run_in(w.path(), &["canon", "bad.cset"]);
    assert_eq!(code(&canon), 2);
    let err = err_str(&canon);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("bad.cset"), "{err}");
    let missing = run_in(w.path(), &["canon", "nowhere.cset"]);
    assert_eq!(code(&missing), 2);
    w.write("bad.oracle", "base 2\nspooky\n");
    let oracle = run_in(w.path(), &["reconstruct", "--oracle", "bad.oracle", "--depth", "2"]);
    assert_eq!(code(&oracle), 2);
    assert!(err_str(&oracle).contains("line 2"), "{}", err_str(&oracle));
}
