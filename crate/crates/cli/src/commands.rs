//! Command bodies. Each returns a [`Report`] holding the JSON document, the
//! human-readable text and the exit code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use asbpir_core::bounds::{dual_distance_bound, length_bounds, min_shortened_dual_bound, reference_lengths, BoundReport};
use asbpir_core::constructions::{block_diagonal, replicate, FamilyParams, FamilySpec};
use asbpir_core::properties::check_bounded;
use asbpir_core::recovery::serve_bounded;
use asbpir_core::search::cache::Cache;
use asbpir_core::search::{find_min_length, verify_value, SearchOptions, SearchStatus, DEFAULT_CANDIDATE_CAP};
use asbpir_core::{max_t, GeneratorMatrix, PropertyKind, RecoveryPlan, Request};
use num_rational::Ratio;
use serde_json::{json, Value};

use crate::matrix_file::MatrixFile;
use crate::request_spec::parse_request;
use crate::{CliError, EXIT_BUDGET, EXIT_NEGATIVE, EXIT_OK};

#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub text: String,
    pub exit: i32,
}

fn verdict_exit(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

pub fn vector_text(v: &[u8]) -> String {
    let parts: Vec<String> = v.iter().map(u8::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn matrix_summary(file: &MatrixFile) -> Value {
    json!({ "name": file.name, "q": file.q(), "p": file.p, "e": file.e, "k": file.k, "n": file.n })
}

fn request_json(req: &Request) -> Value {
    Value::Array(
        req.items()
            .iter()
            .map(|it| json!({ "target": it.target, "multiplicity": it.multiplicity }))
            .collect(),
    )
}

fn request_text(req: &Request) -> String {
    let parts: Vec<String> = req.items().iter().map(|it| format!("{}:{}", vector_text(&it.target), it.multiplicity)).collect();
    parts.join(" ")
}

/// Columns are reported 1-based.
fn plan_json(plan: &RecoveryPlan) -> Value {
    Value::Array(
        plan.assignments
            .iter()
            .map(|a| {
                let cols: Vec<usize> = a.indices.iter().map(|i| i + 1).collect();
                json!({ "target": a.target, "columns": cols, "coefficients": a.coefficients })
            })
            .collect(),
    )
}

fn plan_text(plan: &RecoveryPlan) -> String {
    let mut out = String::new();
    for a in &plan.assignments {
        let cols: Vec<String> = a.indices.iter().map(|i| (i + 1).to_string()).collect();
        let terms: Vec<String> = a.indices.iter().zip(&a.coefficients).map(|(i, c)| format!("{c}*g{}", i + 1)).collect();
        let combo = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        let _ = writeln!(out, "  {} <- {{{}}}  ({combo})", vector_text(&a.target), cols.join(","));
    }
    out
}

fn load(path: &Path) -> Result<(MatrixFile, GeneratorMatrix), CliError> {
    let file = MatrixFile::load(path)?;
    let g = file.generator()?;
    Ok((file, g))
}

fn ratio_json(r: &Ratio<u64>) -> Value {
    let text = if *r.denom() == 1 { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) };
    json!({ "value": text, "approx": *r.numer() as f64 / *r.denom() as f64 })
}

pub struct CheckArgs {
    pub matrix: PathBuf,
    pub property: PropertyKind,
    pub t: usize,
    pub max_size: Option<usize>,
}

pub fn check(args: &CheckArgs) -> Result<Report, CliError> {
    let (file, g) = load(&args.matrix)?;
    if args.t == 0 {
        return Err(CliError::Input("t must be positive".into()));
    }
    let v = check_bounded(&g, args.property, args.t, args.max_size.unwrap_or(g.n()))?;
    let mut text = format!(
        "{}-{}: {} ({} requests checked)\n",
        args.t,
        args.property,
        if v.holds { "holds" } else { "fails" },
        v.requests_checked
    );
    if let Some((req, plan)) = &v.witness {
        let _ = writeln!(text, "plan for the last request {}:", request_text(req));
        text.push_str(&plan_text(plan));
    }
    if let Some(req) = &v.counterexample {
        let _ = writeln!(text, "unservable request: {}", request_text(req));
    }
    let json = json!({
        "command": "check",
        "matrix": matrix_summary(&file),
        "property": args.property.as_str(),
        "t": args.t,
        "max_size": args.max_size,
        "holds": v.holds,
        "requests_checked": v.requests_checked,
        "witness": v.witness.as_ref().map(|(r, p)| json!({ "request": request_json(r), "plan": plan_json(p) })),
        "counterexample": v.counterexample.as_ref().map(request_json),
    });
    Ok(Report { json, text, exit: verdict_exit(v.holds) })
}

#[derive(Default)]
pub struct ConstructArgs {
    pub family: String,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub q: Option<u32>,
    pub n: Option<usize>,
    pub example: Option<String>,
    /// Source matrices for `replicate` (one) and `block_diagonal` (two).
    pub inputs: Vec<PathBuf>,
    pub lambda: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn construct(args: &ConstructArgs) -> Result<Report, CliError> {
    let (g, label) = match args.family.as_str() {
        "replicate" => {
            let [src] = args.inputs.as_slice() else {
                return Err(CliError::Input("replicate needs exactly one --input matrix".into()));
            };
            let lambda = args.lambda.ok_or_else(|| CliError::Input("replicate needs --lambda".into()))?;
            let (_, g) = load(src)?;
            (replicate(&g, lambda)?, format!("replicate lambda={lambda} of {}", src.display()))
        }
        "block_diagonal" => {
            let [a, b] = args.inputs.as_slice() else {
                return Err(CliError::Input("block_diagonal needs exactly two --input matrices".into()));
            };
            let (_, ga) = load(a)?;
            let (_, gb) = load(b)?;
            (block_diagonal(&ga, &gb)?, format!("block_diagonal of {} and {}", a.display(), b.display()))
        }
        tag => {
            let params = FamilyParams { k: args.k, t: args.t, q: args.q, n: args.n, example: args.example.clone() };
            let spec = FamilySpec::from_tag(tag, &params)?;
            (spec.build()?, spec.label())
        }
    };
    let file = MatrixFile::from_generator(&g, Some(label.clone()));
    let text = match &args.out {
        Some(path) => {
            file.save(path)?;
            format!("wrote {} ({} x {} over GF({}))\n", path.display(), file.k, file.n, file.q())
        }
        None => file.to_text(),
    };
    let json = json!({
        "command": "construct",
        "family": label,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
        "matrix": file,
    });
    Ok(Report { json, text, exit: EXIT_OK })
}

pub struct BoundsArgs {
    pub k: usize,
    pub t: usize,
    pub q: u32,
    pub matrix: Option<PathBuf>,
}

fn summary_json(rep: &BoundReport, kinds: &[PropertyKind]) -> Value {
    let mut m = serde_json::Map::new();
    for &kind in kinds {
        m.insert(
            kind.as_str().to_string(),
            json!({ "lower": rep.lower(kind), "upper": rep.upper(kind), "exact": rep.exact(kind) }),
        );
    }
    Value::Object(m)
}

fn table_text(rep: &BoundReport) -> String {
    let mut out = String::new();
    for e in &rep.entries {
        let qty: Vec<&str> = e.quantities.iter().map(|k| k.as_str()).collect();
        let kind = serde_json::to_value(e.kind).expect("bound kind").as_str().unwrap_or_default().to_string();
        let _ = writeln!(out, "  {:<16} {:<6} {:>4}  {}  ({})", qty.join(","), kind, e.value, e.name, e.note);
    }
    out
}

pub fn bounds(args: &BoundsArgs) -> Result<Report, CliError> {
    use PropertyKind::*;
    let all_symbol = length_bounds(args.k, args.t, args.q)?;
    let reference = reference_lengths(args.k, args.t, args.q)?;
    let mut text = format!("k = {}, t = {}, q = {}\n", args.k, args.t, args.q);
    for kind in [Aspir, Asbatch] {
        let show = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
        let _ = writeln!(
            text,
            "{kind}: lower {}, upper {}, exact {}",
            show(all_symbol.lower(kind)),
            show(all_symbol.upper(kind)),
            show(all_symbol.exact(kind))
        );
    }
    text.push_str("all-symbol bounds:\n");
    text.push_str(&table_text(&all_symbol));
    if !reference.entries.is_empty() {
        text.push_str("reference values:\n");
        text.push_str(&table_text(&reference));
    }

    let mut matrix_json = Value::Null;
    if let Some(path) = &args.matrix {
        let (file, g) = load(path)?;
        let dual = dual_distance_bound(&g);
        let shortened = min_shortened_dual_bound(&g)?;
        let t_aspir = max_t(&g, Aspir)?;
        let t_asbatch = max_t(&g, Asbatch)?;
        let _ = writeln!(text, "matrix {} ({} x {}):", path.display(), g.k(), g.n());
        match &dual {
            Ok(r) => _ = writeln!(text, "  dual-distance bound on t: {r}"),
            Err(e) => _ = writeln!(text, "  dual-distance bound on t: n/a ({e})"),
        }
        match &shortened {
            Some((s, r)) => _ = writeln!(text, "  shortened dual bound on t: {r} at s = {s}"),
            None => _ = writeln!(text, "  shortened dual bound on t: n/a"),
        }
        let _ = writeln!(text, "  observed max t: aspir {t_aspir}, asbatch {t_asbatch}");
        matrix_json = json!({
            "summary": matrix_summary(&file),
            "dual_distance_bound": dual.as_ref().ok().map(ratio_json),
            "shortened_dual_bound": shortened.as_ref().map(|(s, r)| json!({ "s": s, "bound": ratio_json(r) })),
            "max_t": { "aspir": t_aspir, "asbatch": t_asbatch },
        });
    }
    let json = json!({
        "command": "bounds",
        "k": args.k,
        "t": args.t,
        "q": args.q,
        "summary": summary_json(&all_symbol, &[Aspir, Asbatch]),
        "all_symbol": all_symbol,
        "reference": reference,
        "matrix": matrix_json,
    });
    Ok(Report { json, text, exit: EXIT_OK })
}

pub struct SearchArgs {
    pub k: usize,
    pub t: usize,
    pub q: u32,
    pub property: PropertyKind,
    pub budget: Option<u64>,
    pub cache: Option<PathBuf>,
    pub n_start: Option<usize>,
    pub n_end: Option<usize>,
    pub audit: bool,
    pub candidate_cap: Option<u64>,
}

fn rows_text(rows: &[Vec<u32>]) -> String {
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "  {}", cells.join(" "));
    }
    out
}

/// The cache comes from `--cache`, else from the environment; without
/// either the search runs uncached.
pub fn search(args: &SearchArgs) -> Result<Report, CliError> {
    let opts = SearchOptions {
        n_start: args.n_start,
        n_end: args.n_end,
        budget: args.budget,
        candidate_cap: args.candidate_cap.unwrap_or(DEFAULT_CANDIDATE_CAP),
        audit: args.audit,
    };
    let mut cache = match &args.cache {
        Some(p) => Some(Cache::open(p)?),
        None => Cache::from_env()?,
    };
    let out = match cache.as_mut() {
        Some(c) => c.search(args.k, args.t, args.q, args.property, &opts)?,
        None => find_min_length(args.k, args.t, args.q, args.property, &opts)?,
    };
    let label = format!("({},{},{}) {}", args.k, args.t, args.q, args.property);
    let mut text = match out.status {
        SearchStatus::Found => format!(
            "{label}: minimal length {}{}\n",
            out.min_length.expect("found"),
            if out.from_cache { " (cached)" } else { "" }
        ),
        SearchStatus::NotFoundInRange => format!("{label}: no code in the searched range\n"),
        SearchStatus::BudgetExceeded => format!("{label}: budget exceeded after {} candidates\n", out.examined),
    };
    let _ = writeln!(text, "certified lower bound: {}", out.certified_lower_bound);
    for l in &out.lengths {
        let state = if l.witness_found {
            "witness"
        } else if l.exhausted {
            "exhausted"
        } else {
            "partial"
        };
        let _ = write!(text, "  n = {:>2}: {:>12} examined, {:>9} over cap, {state}", l.n, l.examined, l.skipped_by_cap);
        if let Some(a) = &l.audit {
            let _ = write!(text, " (audit: {} aspir, {} asbatch, {} disagreements)", a.aspir, a.asbatch, a.disagreements);
        }
        text.push('\n');
    }
    if let Some(rows) = &out.witness {
        let _ = writeln!(text, "witness (verified: {}):", out.witness_verified);
        text.push_str(&rows_text(rows));
    }
    let exit = match out.status {
        SearchStatus::Found => EXIT_OK,
        SearchStatus::NotFoundInRange => EXIT_NEGATIVE,
        SearchStatus::BudgetExceeded => EXIT_BUDGET,
    };
    let mut json = serde_json::to_value(&out).expect("outcome serializes");
    json["command"] = json!("search");
    json["cache"] = json!(cache.as_ref().map(|c| c.path().display().to_string()));
    Ok(Report { json, text, exit })
}

pub struct VerifyArgs {
    pub k: usize,
    pub t: usize,
    pub q: u32,
    pub property: PropertyKind,
    pub claimed: usize,
    pub candidate_cap: Option<u64>,
}

pub fn verify(args: &VerifyArgs) -> Result<Report, CliError> {
    let cert = verify_value(
        args.k,
        args.t,
        args.q,
        args.property,
        args.claimed,
        args.candidate_cap.unwrap_or(DEFAULT_CANDIDATE_CAP),
    )?;
    let mut text = format!(
        "({},{},{}) {} = {}: {}\n",
        args.k,
        args.t,
        args.q,
        args.property,
        args.claimed,
        if cert.confirmed { "confirmed" } else { "not confirmed" }
    );
    if let Some(why) = &cert.refutation {
        let _ = writeln!(text, "  {why}");
    }
    let _ = writeln!(text, "  length {}: {} candidates up to the witness", cert.claimed, cert.upper.examined);
    if let Some(l) = &cert.lower {
        let _ = writeln!(
            text,
            "  length {}: {} examined + {} over cap of {}, exhausted: {}",
            l.n, l.examined, l.skipped_by_cap, l.space_size, l.exhausted
        );
    }
    if let Some(rows) = &cert.witness {
        let _ = writeln!(text, "witness (verified: {}):", cert.witness_verified);
        text.push_str(&rows_text(rows));
    }
    let mut json = serde_json::to_value(&cert).expect("certificate serializes");
    json["command"] = json!("verify");
    Ok(Report { json, text, exit: verdict_exit(cert.confirmed) })
}

pub struct ServeArgs {
    pub matrix: PathBuf,
    pub request: String,
    pub max_size: Option<usize>,
}

pub fn serve(args: &ServeArgs) -> Result<Report, CliError> {
    let (file, g) = load(&args.matrix)?;
    let req = parse_request(&args.request, &g)?;
    let nonzero: usize = req.items().iter().filter(|it| it.target.iter().any(|&x| x != 0)).map(|it| it.multiplicity).sum();
    if nonzero > g.n() {
        return Err(CliError::Input(format!("{nonzero} nonzero targets exceed the {} columns", g.n())));
    }
    let plan = serve_bounded(&g, &req, args.max_size.unwrap_or(g.n()))?;
    let text = match &plan {
        Some(p) => format!("servable: {}\n{}", request_text(&req), plan_text(p)),
        None => format!("unservable: {}\n", request_text(&req)),
    };
    let json = json!({
        "command": "serve",
        "matrix": matrix_summary(&file),
        "request": request_json(&req),
        "servable": plan.is_some(),
        "plan": plan.as_ref().map(plan_json),
    });
    Ok(Report { json, text, exit: verdict_exit(plan.is_some()) })
}
