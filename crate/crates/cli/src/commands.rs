use std::fs;

use anyhow::{anyhow, Context};
use serde::Serialize;

use amact_core::actions::{build_aprime_witness, APrimeOptions, APrimeReport, APrimeWitness, ActionSpec, Point};
use amact_core::bass_serre::{check_hypotheses, quotient_graph, witness_circuit, Circuit, DoubleData, HypothesisReport, QuotientGraph};
use amact_core::config::Presets;
use amact_core::folner::{cayley_ball, is_folner, match_cardinalities, prescribed_size_folner, FolnerError, FolnerReport, FolnerSet, MatchOptions, MatchOutcome, PrescribedTerm};
use amact_core::generic::{build_generic, verify_certificate, Certificate, GenericOptions, PartialPermutation, Verdict};
use amact_core::rational::{format_rational, parse_positive_rational};
use amact_core::{Element, GroupSpec};

use crate::output::{emit, Table};
use crate::{BassSerreCmd, Cli, Command, Global, PresetsCmd, Shape};

pub enum Failure {
    Usage(anyhow::Error),
    Verification(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Res = Result<(), Failure>;

fn presets(g: &Global) -> anyhow::Result<Presets> {
    match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Presets::parse(&text)?)
        }
        None => Ok(Presets::builtin()),
    }
}

fn eps_arg(s: &str) -> anyhow::Result<amact_core::Rational> {
    parse_positive_rational(s).map_err(|e| anyhow!("--eps: {e}"))
}

pub fn run(cli: &Cli) -> Res {
    let g = &cli.global;
    match &cli.command {
        Command::Ratio(a) => ratio(g, a.shape, a.n, a.k),
        Command::MatchFolner(a) => match_folner(g, &a.eps, a.c0, a.max_stream),
        Command::PrescribedFolner(a) => prescribed(g, &a.group, &a.sizes),
        Command::CheckAprime(a) => check_aprime(g, &a.preset, a.prefix, a.pairs),
        Command::BuildAction(a) => build_action(g, a),
        Command::Verify(a) => verify(g, a),
        Command::BassSerre { cmd: BassSerreCmd::Double(a) } => bass_serre(g, &a.group, &a.sub, a.adjacency.as_deref()),
        Command::Presets { cmd: PresetsCmd::List } => list_presets(g),
    }
}

#[derive(Serialize)]
struct RatioReport {
    shape: String,
    size: usize,
    ratios: FolnerReport,
}

fn ratio(g: &Global, shape: Shape, n: usize, k: usize) -> Res {
    let (group, set, name): (GroupSpec, FolnerSet, String) = match shape {
        Shape::ZInterval => {
            let z = GroupSpec::free_abelian(1);
            let set = (0..n as i64).map(|i| Point::El(Element::Vector(vec![i]))).collect();
            (z, set, format!("z-interval n={n}"))
        }
        Shape::Z2Box => {
            let z2 = GroupSpec::free_abelian(2);
            let n = n as i64;
            let set = (0..n)
                .flat_map(|x| (0..n).map(move |y| Point::El(Element::Vector(vec![x, y]))))
                .collect();
            (z2, set, format!("z2-box n={n}"))
        }
        Shape::Z2Ball => {
            let z2 = GroupSpec::free_abelian(2);
            let set = cayley_ball(&z2, z2.generators(), k);
            (z2, set, format!("z2-ball k={k}"))
        }
    };
    if set.is_empty() {
        return Err(anyhow!("the set is empty; use --n >= 1").into());
    }
    let act = ActionSpec::regular(&group);
    // eps = 1 only fills the verdict; the ratios are the output.
    let rep = is_folner(&act, &set, group.generators(), amact_core::Rational::from_integer(1));
    let mut t = Table::new(vec!["element", "ratio"]);
    for e in &rep.tests {
        t.push(vec![e.element.clone(), format_rational(&e.ratio)]);
    }
    emit(
        g,
        &RatioReport {
            shape: name,
            size: set.len(),
            ratios: rep,
        },
        &t,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MatchReport {
    eps: String,
    c0: usize,
    note: Option<String>,
    verified: bool,
    c_prime_size: usize,
    d_prime_size: usize,
    outcome: MatchOutcome,
}

fn match_folner(g: &Global, eps: &str, c0: usize, max_stream: usize) -> Res {
    let eps_r = eps_arg(eps)?;
    if c0 == 0 {
        return Err(anyhow!("--c0 must be positive").into());
    }
    let z = GroupSpec::free_abelian(1);
    let z2 = GroupSpec::free_abelian(2);
    let c: FolnerSet = (0..c0 as i64).map(|i| Point::El(Element::Vector(vec![i]))).collect();
    let squares = (1..).map(|n: i64| {
        (0..n)
            .flat_map(|x| (0..n).map(move |y| Point::El(Element::Vector(vec![x, y]))))
            .collect::<FolnerSet>()
    });
    let opts = MatchOptions {
        max_stream,
        ..MatchOptions::default()
    };
    let out = match match_cardinalities(&z, &c, &ActionSpec::regular(&z2), squares, eps_r, z.generators(), z2.generators(), &opts) {
        Ok(o) => o,
        Err(e @ FolnerError::Exhausted { .. }) => return Err(Failure::Verification(e.to_string())),
        Err(e) => return Err(anyhow!(e).into()),
    };
    let mut t = Table::new(vec!["field", "value"]);
    for (k, v) in [
        ("lambda", format_rational(&out.lambda)),
        ("n", out.n.to_string()),
        ("d", out.d.to_string()),
        ("r", out.r.to_string()),
        ("size", out.c_prime.len().to_string()),
        ("c_max_ratio", format_rational(&out.c_report.max_ratio())),
        ("d_max_ratio", format_rational(&out.d_report.max_ratio())),
        ("size_bound", format_rational(&out.size_bound)),
        ("deletion_bound", format_rational(&out.deletion_bound)),
    ] {
        t.push(vec![k.to_string(), v]);
    }
    let verified = out.verified();
    let report = MatchReport {
        eps: format_rational(&eps_r),
        c0,
        note: (out.r == 0).then(|| "no deletion: d*|C0| = |D_n|".to_string()),
        verified,
        c_prime_size: out.c_prime.len(),
        d_prime_size: out.d_prime.len(),
        outcome: out,
    };
    emit(g, &report, &t)?;
    if !verified {
        return Err(Failure::Verification("matched sets fail the Folner test or the size bounds".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct PrescribedReport {
    group: String,
    all_hold: bool,
    terms: Vec<PrescribedTerm>,
}

fn prescribed(g: &Global, group: &str, sizes: &[usize]) -> Res {
    let p = presets(g)?;
    let grp = p.group(group).map_err(anyhow::Error::from)?;
    if grp.is_finite() {
        return Err(anyhow!("group preset {group:?} is finite").into());
    }
    let terms = prescribed_size_folner(&grp, grp.generators(), sizes).map_err(|e| anyhow!(e))?;
    let mut t = Table::new(vec!["n", "size", "radius", "ball_size", "boundary", "ratio", "bound", "holds"]);
    for x in &terms {
        t.push(vec![
            x.n.to_string(),
            x.size.to_string(),
            x.radius.to_string(),
            x.ball_size.to_string(),
            x.boundary.to_string(),
            format_rational(&x.ratio),
            format_rational(&x.bound),
            x.holds.to_string(),
        ]);
    }
    let all_hold = terms.iter().all(|x| x.holds && sizes.get(x.n - 1) == Some(&x.size));
    emit(
        g,
        &PrescribedReport {
            group: group.to_string(),
            all_hold,
            terms,
        },
        &t,
    )?;
    if !all_hold {
        return Err(Failure::Verification("a term violates its size or boundary bound".into()));
    }
    Ok(())
}

fn witness(g: &Global, preset: &str, prefix: usize, pairs: usize) -> Result<APrimeWitness, Failure> {
    let p = presets(g)?;
    let a = p.amalgam(preset).map_err(anyhow::Error::from)?;
    let opts = APrimeOptions {
        prefix,
        pairs,
        ..APrimeOptions::default()
    };
    build_aprime_witness(&a.g, &a.h, a.phi.clone(), &a.y, &opts).map_err(|e| Failure::Verification(e.to_string()))
}

#[derive(Serialize)]
struct AprimeOut<'a> {
    preset: &'a str,
    all_pass: bool,
    report: &'a APrimeReport,
}

fn check_aprime(g: &Global, preset: &str, prefix: usize, pairs: usize) -> Res {
    let w = witness(g, preset, prefix, pairs)?;
    let mut t = Table::new(vec!["condition", "verdict", "detail"]);
    for c in &w.report.conditions {
        t.push(vec![c.name.clone(), if c.verdict { "PASS" } else { "FAIL" }.into(), c.detail.clone()]);
    }
    let all_pass = w.report.all_pass();
    emit(
        g,
        &AprimeOut {
            preset,
            all_pass,
            report: &w.report,
        },
        &t,
    )?;
    if !all_pass {
        return Err(Failure::Verification(format!("{preset}: not all conditions hold on the prefix")));
    }
    Ok(())
}

#[derive(Serialize)]
struct BuildReport<'a> {
    preset: &'a str,
    seed: u64,
    max_len: usize,
    eps: String,
    words: usize,
    sigma_blocks: usize,
    matched: Vec<(usize, usize)>,
    digest: &'a str,
    verdict: Verdict,
}

fn build_action(g: &Global, a: &crate::BuildArgs) -> Res {
    let eps = eps_arg(&a.eps)?;
    let w = witness(g, &a.preset, a.prefix, 3)?;
    let opts = GenericOptions {
        max_len: a.max_len,
        eps,
        radius: a.radius,
        matches: a.matches,
        prefix: a.prefix,
        seed: g.seed,
        ..GenericOptions::default()
    };
    let (sigma, cert) = build_generic(&w, &opts).map_err(|e| Failure::Verification(e.to_string()))?;
    let verdict = verify_certificate(&sigma, &cert, &w);
    if let Some(path) = &a.certificate {
        fs::write(path, cert.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let mut t = Table::new(vec!["word", "length", "start", "endpoint", "trace_points"]);
    for wit in &cert.words {
        t.push(vec![wit.word.clone(), wit.length.to_string(), wit.start.clone(), wit.endpoint.clone(), wit.trace.len().to_string()]);
    }
    let ok = verdict.ok;
    let failure = verdict.failure.clone();
    emit(
        g,
        &BuildReport {
            preset: &a.preset,
            seed: g.seed,
            max_len: a.max_len,
            eps: format_rational(&eps),
            words: cert.words.len(),
            sigma_blocks: sigma.len(),
            matched: cert.matches.iter().map(|m| (m.n, m.size)).collect(),
            digest: &cert.digest,
            verdict,
        },
        &t,
    )?;
    if !ok {
        return Err(Failure::Verification(failure.unwrap_or_default()));
    }
    Ok(())
}

fn verify(g: &Global, a: &crate::VerifyArgs) -> Res {
    let text = fs::read_to_string(&a.certificate).with_context(|| format!("reading {}", a.certificate.display()))?;
    let cert = Certificate::from_json(&text).map_err(|e| anyhow!(e))?;
    let w = witness(g, &a.preset, a.prefix, 3)?;
    let verdict = match PartialPermutation::from_record(&w, &cert.sigma) {
        Ok(sigma) => verify_certificate(&sigma, &cert, &w),
        Err(e) => Verdict {
            ok: false,
            checks: 0,
            failure: Some(e.to_string()),
        },
    };
    let mut t = Table::new(vec!["ok", "checks", "failure"]);
    t.push(vec![verdict.ok.to_string(), verdict.checks.to_string(), verdict.failure.clone().unwrap_or_default()]);
    emit(g, &verdict, &t)?;
    if !verdict.ok {
        return Err(Failure::Verification(verdict.failure.unwrap_or_default()));
    }
    Ok(())
}

/// Splits a comma list, keeping commas inside parentheses.
fn split_elements(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out.into_iter().filter(|x| !x.is_empty()).collect()
}

#[derive(Serialize)]
struct DoubleReport {
    group: String,
    sub: String,
    hypotheses: HypothesisReport,
    graph: Option<QuotientGraph>,
    circuit: Option<Circuit>,
}

fn bass_serre(g: &Global, group: &str, sub: &str, adjacency: Option<&std::path::Path>) -> Res {
    let p = presets(g)?;
    let grp = p.group(group).map_err(anyhow::Error::from)?;
    let gens: Vec<Element> = if sub.trim() == "all" {
        grp.elements().map_err(|e| anyhow!("--sub all: {e}"))?
    } else {
        split_elements(sub)
            .into_iter()
            .map(|s| grp.parse_element(s).map_err(|e| anyhow!("--sub: {e}")))
            .collect::<anyhow::Result<_>>()?
    };
    let d = DoubleData::double(&grp, &gens).map_err(|e| anyhow!(e))?;
    let hyp = check_hypotheses(&d).map_err(|e| anyhow!(e))?;
    let failure = hyp.first_failure().map(|c| format!("{}: {}", c.name, c.detail));
    let (graph, circuit) = if failure.is_none() {
        let q = quotient_graph(&d).map_err(|e| Failure::Verification(e.to_string()))?;
        let c = witness_circuit(&d).map_err(|e| Failure::Verification(e.to_string()))?;
        (Some(q), Some(c))
    } else {
        (None, None)
    };
    if let (Some(path), Some(q)) = (adjacency, &graph) {
        fs::write(path, q.to_adjacency()).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut t = Table::new(vec!["edge", "from", "to"]);
    if let Some(q) = &graph {
        for e in &q.edges {
            t.push(vec![e.clone(), "G0".into(), "H0".into()]);
        }
    }
    let audit_ok = circuit.as_ref().map_or(true, |c| c.audit.passed());
    emit(
        g,
        &DoubleReport {
            group: group.to_string(),
            sub: sub.to_string(),
            hypotheses: hyp,
            graph,
            circuit,
        },
        &t,
    )?;
    if let Some(f) = failure {
        return Err(Failure::Verification(f));
    }
    if !audit_ok {
        return Err(Failure::Verification("circuit audit failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct PresetEntry {
    name: String,
    kind: String,
    description: String,
}

fn list_presets(g: &Global) -> Res {
    let p = presets(g)?;
    let mut entries = Vec::new();
    for name in p.groups.keys() {
        let grp = p.group(name).map_err(anyhow::Error::from)?;
        entries.push(PresetEntry {
            name: name.clone(),
            kind: "group".into(),
            description: match grp.order() {
                Some(n) => format!("{} of order {n}", grp.describe()),
                None => grp.describe(),
            },
        });
    }
    for (name, a) in &p.amalgams {
        entries.push(PresetEntry {
            name: name.clone(),
            kind: "amalgam".into(),
            description: a.description.clone(),
        });
    }
    if entries.is_empty() {
        return Err(anyhow!("no presets defined").into());
    }
    let mut t = Table::new(vec!["name", "kind", "description"]);
    for e in &entries {
        t.push(vec![e.name.clone(), e.kind.clone(), e.description.clone()]);
    }
    emit(g, &entries, &t)?;
    Ok(())
}
