//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};

use relplay_core::{
    evaluate, evaluate_all, infer_schema, load_catalog, optimize, parse, translate, Catalog, NodeKind, RaExpr,
};
use relplay_testkit::golden::{self, DEMO_SQL};
use relplay_testkit::{
    fuzz_inputs, multiset, oracle, GenCol, GenJoin, GenOperand, GenPred, GenQuery, GenTable, QueryGen,
};

const CORPUS_SEED: u64 = 20_240_611;
const CORPUS_SIZE: usize = 500;
const FUZZ_SEED: u64 = 99;
const FUZZ_COUNT: usize = 100_000;

type Outcome = Result<String, String>;

/// Skeleton path -> (operator, left input rows, right input rows).
type BinaryInputs = BTreeMap<Vec<usize>, (NodeKind, usize, usize)>;

type Criterion = (&'static str, fn(&Corpus) -> Outcome);

struct Corpus {
    catalog: Catalog,
    queries: Vec<(GenQuery, RaExpr)>,
}

fn check_oracle(c: &Corpus) -> Outcome {
    let mut bad = Vec::new();
    for (q, e) in &c.queries {
        let got = evaluate(e, &c.catalog).map_err(|err| format!("{}: {err}", q.sql()))?;
        if multiset(&got.rows) != multiset(&oracle(q, &c.catalog)) {
            bad.push(q.sql());
        }
    }
    if bad.is_empty() {
        Ok(format!("{n}/{n} queries equal the reference evaluator as multisets", n = c.queries.len()))
    } else {
        Err(format!("{} mismatches, first: {}", bad.len(), bad[0]))
    }
}

fn check_soundness(c: &Corpus) -> Outcome {
    for (q, e) in &c.queries {
        let (opt, _) = optimize(e);
        let before = evaluate(e, &c.catalog).map_err(|err| err.to_string())?;
        let after = evaluate(&opt, &c.catalog).map_err(|err| err.to_string())?;
        if multiset(&before.rows) != multiset(&after.rows) {
            return Err(format!("rows differ for {}", q.sql()));
        }
        let schemas = (infer_schema(e, &c.catalog), infer_schema(&opt, &c.catalog));
        if schemas.0.is_err() || schemas.0 != schemas.1 || before.schema != after.schema {
            return Err(format!("root schema differs for {}", q.sql()));
        }
    }
    Ok(format!("{} queries: optimized rows and root schema identical", c.queries.len()))
}

fn check_idempotence(c: &Corpus) -> Outcome {
    let mut max_ratio = 0.0f64;
    for (q, e) in &c.queries {
        let (once, trace) = optimize(e);
        if optimize(&once).0 != once {
            return Err(format!("second pass changed {}", q.sql()));
        }
        let budget = 10 * e.node_count();
        if trace.len() >= budget {
            return Err(format!("{} steps >= {budget} for {}", trace.len(), q.sql()));
        }
        max_ratio = max_ratio.max(trace.len() as f64 / e.node_count() as f64);
    }
    Ok(format!("optimize twice == once; max steps/nodes = {max_ratio:.2} (< 10)"))
}

/// Input cardinalities of every join and cross product, keyed by the child
/// indices taken at non-selection nodes on the way down.
fn binary_inputs(e: &RaExpr, cat: &Catalog) -> Result<BinaryInputs, String> {
    let results = evaluate_all(e, cat).map_err(|err| err.to_string())?;
    let card: BTreeMap<_, _> = results.iter().map(|r| (r.path.clone(), r.cardinality)).collect();
    let mut out = BTreeMap::new();
    for (path, kind) in e.enumerate_nodes() {
        if !matches!(kind, NodeKind::Join | NodeKind::CrossProduct) {
            continue;
        }
        let mut skeleton = Vec::new();
        let mut node = e;
        for &i in path.indices() {
            if !matches!(node, RaExpr::Selection { .. }) {
                skeleton.push(i);
            }
            node = node.children()[i];
        }
        out.insert(skeleton, (kind, card[&path.child(0)], card[&path.child(1)]));
    }
    Ok(out)
}

fn check_monotonicity(c: &Corpus) -> Outcome {
    let mut checked = 0;
    let mut strict = 0;
    for (q, e) in &c.queries {
        let (opt, trace) = optimize(e);
        if trace.is_empty() {
            continue;
        }
        let before = binary_inputs(e, &c.catalog)?;
        let after = binary_inputs(&opt, &c.catalog)?;
        if before.keys().ne(after.keys()) {
            return Err(format!("join skeleton changed for {}", q.sql()));
        }
        for (k, (kind, l0, r0)) in &before {
            let (kind1, l1, r1) = after[k];
            if *kind != kind1 || l1 > *l0 || r1 > *r0 {
                return Err(format!("inputs grew at {k:?} ({l0},{r0}) -> ({l1},{r1}) for {}", q.sql()));
            }
            strict += usize::from(l1 < *l0 || r1 < *r0);
        }
        checked += 1;
    }

    let demo = translate(&parse(DEMO_SQL).map_err(|e| e.to_string())?, &c.catalog).map_err(|e| e.to_string())?;
    let before = binary_inputs(&demo, &c.catalog)?;
    let after = binary_inputs(&optimize(&demo).0, &c.catalog)?;
    let (l0, l1) = (before[&vec![0]].1, after[&vec![0]].1);
    if (l0, l1) != (3, 2) {
        return Err(format!("demo join left input {l0} -> {l1}, expected 3 -> 2"));
    }
    Ok(format!(
        "{checked} rewritten queries, no input grew ({strict} inputs shrank); demo join left input {l0} -> {l1}"
    ))
}

fn col(q: &str, a: &str) -> GenOperand {
    GenOperand::Col(GenCol { qualifier: Some(q.into()), attribute: a.into() })
}

fn table(name: &str) -> GenTable {
    GenTable { relation: name.into(), alias: None }
}

fn fk(l: (&str, &str), r: (&str, &str)) -> GenJoin {
    GenJoin::On(GenPred::Cmp(col(l.0, l.1), "=", col(r.0, r.1)))
}

fn check_cardinalities(c: &Corpus) -> Outcome {
    let cases = [
        (
            "Doctor x Patient",
            GenQuery {
                select: None,
                head: table("Doctor"),
                joins: vec![(GenJoin::Comma, table("Patient"))],
                filter: None,
            },
            12,
        ),
        (
            "Doctor FK-join Patient",
            GenQuery {
                select: None,
                head: table("Doctor"),
                joins: vec![(fk(("Doctor", "id"), ("Patient", "doctorId")), table("Patient"))],
                filter: None,
            },
            4,
        ),
        (
            "Department FK-join Doctor FK-join Patient",
            GenQuery {
                select: None,
                head: table("Department"),
                joins: vec![
                    (fk(("Department", "id"), ("Doctor", "departmentId")), table("Doctor")),
                    (fk(("Doctor", "id"), ("Patient", "doctorId")), table("Patient")),
                ],
                filter: None,
            },
            4,
        ),
    ];
    let mut parts = Vec::new();
    for (name, q, want) in cases {
        let reference = oracle(&q, &c.catalog).len();
        let e = translate(&parse(&q.sql()).map_err(|e| e.to_string())?, &c.catalog).map_err(|e| e.to_string())?;
        let got = evaluate(&e, &c.catalog).map_err(|e| e.to_string())?.cardinality();
        let opt = evaluate(&optimize(&e).0, &c.catalog).map_err(|e| e.to_string())?.cardinality();
        if (got, opt, reference) != (want, want, want) {
            return Err(format!("{name}: pipeline {got}, optimized {opt}, reference {reference}, expected {want}"));
        }
        parts.push(format!("{name} = {got}"));
    }

    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut failures = Vec::new();
    let render_dir = root.join("../core/tests/golden");
    for (name, sql) in golden::RENDER_CASES {
        if let Err(e) = golden::check(&render_dir, &format!("{name}.txt"), &golden::render_transcript(sql)) {
            failures.push(e);
        }
    }
    let cli_dir = root.join("tests/golden");
    for (name, args) in golden::CLI_CASES {
        let out = Command::new(env!("CARGO_BIN_EXE_relplay")).args(*args).output().map_err(|e| e.to_string())?;
        let text = golden::cli_transcript(
            args,
            out.status.code(),
            &String::from_utf8_lossy(&out.stdout),
            &String::from_utf8_lossy(&out.stderr),
        );
        if let Err(e) = golden::check(&cli_dir, &format!("{name}.txt"), &text) {
            failures.push(e);
        }
    }
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    Ok(format!(
        "{}; {} render and {} CLI golden files byte-exact",
        parts.join(", "),
        golden::RENDER_CASES.len(),
        golden::CLI_CASES.len()
    ))
}

fn check_parser_totality(c: &Corpus) -> Outcome {
    let mut accepted = 0;
    let mut rejected = 0;
    for input in fuzz_inputs(&c.catalog, FUZZ_SEED, FUZZ_COUNT) {
        match catch_unwind(AssertUnwindSafe(|| parse(&input))) {
            Err(_) => return Err(format!("parser panicked on {input:?}")),
            Ok(Ok(ast)) => {
                if parse(&ast.to_string()).as_ref() != Ok(&ast) {
                    return Err(format!("round trip failed for fuzz input {input:?}"));
                }
                accepted += 1;
            }
            Ok(Err(e)) => {
                if e.position().is_none() {
                    return Err(format!("unpositioned {} error on {input:?}", e.kind()));
                }
                rejected += 1;
            }
        }
    }
    for (q, _) in &c.queries {
        let ast = parse(&q.sql()).map_err(|e| e.to_string())?;
        if parse(&ast.to_string()).as_ref() != Ok(&ast) {
            return Err(format!("round trip failed for {}", q.sql()));
        }
    }
    Ok(format!(
        "{FUZZ_COUNT} fuzz inputs: {accepted} parsed, {rejected} positioned errors, 0 panics; \
         {} corpus ASTs round-trip",
        c.queries.len()
    ))
}

fn main() -> ExitCode {
    let catalog = load_catalog();
    let queries = QueryGen::corpus(&catalog, CORPUS_SEED, CORPUS_SIZE)
        .into_iter()
        .map(|q| {
            let sql = q.sql();
            let e = translate(&parse(&sql).unwrap_or_else(|e| panic!("{sql}: {e}")), &catalog)
                .unwrap_or_else(|e| panic!("{sql}: {e}"));
            (q, e)
        })
        .collect();
    let corpus = Corpus { catalog, queries };

    let criteria: [Criterion; 6] = [
        ("oracle equivalence", check_oracle),
        ("optimizer soundness", check_soundness),
        ("optimizer idempotence and termination", check_idempotence),
        ("pushdown monotonicity", check_monotonicity),
        ("canonical cardinalities and golden files", check_cardinalities),
        ("parser totality", check_parser_totality),
    ];
    println!("acceptance: corpus of {CORPUS_SIZE} generated queries (seed {CORPUS_SEED})");
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&corpus))).unwrap_or_else(|_| Err("panicked".to_owned()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
