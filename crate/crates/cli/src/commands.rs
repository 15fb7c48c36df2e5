use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use epiter::analysis::{dplus, stability_bounds, stability_time, truncated_density_report};
use epiter::constructions::{
    ap_counterexample, parity_flip_sequence, power_tower_starts, scaled_divergence, sparse_gap_profile,
};
use epiter::grammar::{self, ParsedSet};
use epiter::residue::{
    cardinality_check, decompose_equality_case, gamma_mod, lemma52_check, period, residue_orbit,
    DecompositionFailure,
};
use epiter::stability::{iterate_trace, theorem61_verify, Theorem61Report, Verdict};
use epiter::{EPSet, Error, LinearOp, OpSequence, Rational, ResidueSet};

use crate::config::Params;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Complete = 0,
    Fail = 1,
    Inconclusive = 2,
    Usage = 3,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub command: String,
    pub params: Value,
    pub result: Value,
    pub status: Status,
    pub table: Table,
}

enum Failure {
    Usage(String),
    /// A cap or step limit was hit before the computation finished.
    Resource(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Failure {
        Failure::Usage(s)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::WindowCap { .. } | Error::StepLimit(_) | Error::Overflow(_) => {
                Failure::Resource(e.to_string())
            }
            Error::ZeroDilation | Error::InvalidArgument(_) | Error::Precondition(_) => {
                Failure::Usage(e.to_string())
            }
        }
    }
}

impl From<grammar::ParseError> for Failure {
    fn from(e: grammar::ParseError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<(Value, Status, Table), Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

const COMMON_KEYS: &[&str] = &["window_cap"];

/// Runs `command`. Resource exhaustion yields a flagged report with
/// [`Status::Inconclusive`]; every other error is a usage error.
pub fn dispatch(command: &str, p: &Params) -> Result<Outcome, String> {
    let (keys, run): (&[&str], fn(&Params) -> Run) = match command {
        "iterate" => (&["max_k"], iterate),
        "residue" => (&["g", "a", "b", "max_k"], residue),
        "decompose" => (&["g", "a", "b"], decompose),
        "dplus" => (&["max_k"], dplus_cmd),
        "verify-thm61" => (&["L", "c", "max_k"], verify),
        "construct" => (&["kind", "a", "b", "d", "N", "delta", "bits", "max_k"], construct),
        "sweep" => (&["L", "c", "max_k", "random", "seed", "threads"], sweep),
        other => return Err(format!("unknown command `{other}`")),
    };
    let mut params = serde_json::Map::new();
    for (k, v) in p.entries() {
        if !keys.contains(&k) && !COMMON_KEYS.contains(&k) {
            return Err(format!("`{command}` does not take `{k}`"));
        }
        if k == "threads" {
            // scheduling only; reports must not depend on it
            continue;
        }
        params.insert(k.to_string(), v.parse::<i64>().map_or_else(|_| json!(v), |n| json!(n)));
    }
    for (k, list) in [("set", &p.sets), ("ops", &p.ops)] {
        match list.as_slice() {
            [] => {}
            [one] => {
                params.insert(k.to_string(), json!(one));
            }
            many => {
                params.insert(k.to_string(), json!(many));
            }
        }
    }
    let params = Value::Object(params);
    let (result, status, table) = match run(p) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => return Err(msg),
        Err(Failure::Resource(msg)) => (
            json!({ "resource_flag": msg }),
            Status::Inconclusive,
            Table { header: vec!["resource_flag"], rows: vec![vec![msg]] },
        ),
    };
    Ok(Outcome { command: command.to_string(), params, result, status, table })
}

fn parse_set(text: &str) -> Result<EPSet, Failure> {
    match grammar::parse_set(text)? {
        ParsedSet::Exact(s) => Ok(s),
        ParsedSet::Truncated(t) => Ok(t.to_epset()?),
    }
}

fn parse_residue(p: &Params) -> Result<ResidueSet, Failure> {
    let text = p.one("set")?.trim();
    let g = p.get::<u64>("g")?;
    let u = if text.starts_with("mod") {
        grammar::parse_residue_set(text)?
    } else {
        let g = g.ok_or_else(|| "give the modulus as `mod g {…}` or with --g".to_string())?;
        grammar::parse_residue_set(&format!("mod {g} {text}"))?
    };
    if let Some(g) = g {
        if g != u.modulus() {
            return Err(Failure::Usage(format!("--g {g} disagrees with the set's modulus {}", u.modulus())));
        }
    }
    Ok(u)
}

fn iterate(p: &Params) -> Run {
    let s = parse_set(p.one("set")?)?;
    let seq = grammar::parse_ops(p.one("ops")?)?;
    let trace = iterate_trace(&s, &seq, p.or("max_k", 1000)?);
    let rows = trace
        .iterates
        .iter()
        .enumerate()
        .map(|(k, it)| vec![k.to_string(), it.to_string(), it.period().to_string(), it.upper_density().to_string()])
        .collect();
    let status = if trace.is_complete() { Status::Complete } else { Status::Inconclusive };
    let mut result = to_value(&trace);
    result["complete"] = json!(trace.is_complete());
    Ok((result, status, Table { header: vec!["k", "iterate", "period", "upper_density"], rows }))
}

fn residue(p: &Params) -> Run {
    let u = parse_residue(p)?;
    let (a, b) = (p.require::<u64>("a")?, p.require::<u64>("b")?);
    let cardinality = cardinality_check(&u, a, b)?;
    let orbit = residue_orbit(&u, a, b, p.or("max_k", 100_000)?)?;
    let result = json!({
        "set": u,
        "image": gamma_mod(&u, a, b),
        "period": if u.is_empty() { Value::Null } else { to_value(&period(&u)?) },
        "cardinality": cardinality,
        "orbit": orbit,
        "lemma52": lemma52_check(&u, a, b),
    });
    let rows = orbit
        .iterates
        .iter()
        .enumerate()
        .map(|(k, it)| vec![k.to_string(), it.len().to_string(), grammar::emit_residue_set(it)])
        .collect();
    Ok((result, Status::Complete, Table { header: vec!["step", "size", "set"], rows }))
}

fn decompose(p: &Params) -> Run {
    let u = parse_residue(p)?;
    let (a, b) = (p.require::<u64>("a")?, p.require::<u64>("b")?);
    let (result, status, rows) = match decompose_equality_case(&u, a, b) {
        Ok(cert) => {
            let check = cert.verify(&u);
            let status = if check.is_ok() { Status::Complete } else { Status::Fail };
            let rows = vec![
                vec!["outcome".into(), "certificate".into()],
                vec!["verified".into(), check.is_ok().to_string()],
                vec!["translation".into(), cert.translation.to_string()],
                vec!["a1".into(), cert.a1.to_string()],
                vec!["b1".into(), cert.b1.to_string()],
                vec!["v".into(), grammar::emit_residue_set(&cert.v)],
                vec!["x".into(), grammar::emit_residue_set(&cert.x)],
                vec!["h".into(), grammar::emit_residue_set(&cert.h.to_set())],
            ];
            let result = json!({
                "outcome": "certificate",
                "certificate": cert,
                "verified": check.is_ok(),
                "violation": check.err(),
            });
            (result, status, rows)
        }
        Err(f @ (DecompositionFailure::NotCoprime { .. } | DecompositionFailure::EmptySet)) => {
            return Err(Failure::Usage(f.to_string()))
        }
        Err(f) => {
            let status = match f {
                DecompositionFailure::Inconsistent { .. } => Status::Fail,
                _ => Status::Complete,
            };
            let rows = vec![
                vec!["outcome".into(), "no_certificate".into()],
                vec!["reason".into(), f.to_string()],
            ];
            (json!({ "outcome": "no_certificate", "failure": f, "reason": f.to_string() }), status, rows)
        }
    };
    Ok((result, status, Table { header: vec!["field", "value"], rows }))
}

fn dplus_cmd(p: &Params) -> Run {
    let a = parse_set(p.one("set")?)?;
    let d = dplus(&a)?;
    let st = stability_time(&a, p.or("max_k", 64)?)?;
    let density = a.upper_density();
    let half = Rational::new(1, 2);
    let mut status = Status::Complete;
    let bounds = if density > Rational::from_integer(0) && density <= half {
        let b = stability_bounds(density)?;
        let (st_ok, ruzsa_ok) = (b.admits_st(st.t as u64), b.admits_ruzsa(st.t as u64));
        if !(st_ok && ruzsa_ok) {
            status = Status::Fail;
        }
        let mut v = to_value(&b);
        v.as_object_mut().expect("struct").extend([
            ("st_floor".to_string(), json!(b.st_floor())),
            ("ruzsa_floor".to_string(), json!(b.ruzsa_floor())),
            ("admits_st".to_string(), json!(st_ok)),
            ("admits_ruzsa".to_string(), json!(ruzsa_ok)),
        ]);
        v
    } else if density > half {
        let holds = st.t <= 1 && d == EPSet::naturals();
        if !holds {
            status = Status::Fail;
        }
        json!({ "note": "density above 1/2: T(A) <= 1 and D+(A) = N", "holds": holds })
    } else {
        Value::Null
    };
    let rows = st.iterates.iter().enumerate().map(|(k, it)| vec![k.to_string(), it.to_string()]).collect();
    let result = json!({
        "dplus": d,
        "density": density.to_string(),
        "t": st.t,
        "iterates": st.iterates,
        "bounds": bounds,
    });
    Ok((result, status, Table { header: vec!["k", "set"], rows }))
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Pass => Status::Complete,
        Verdict::Fail => Status::Fail,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

const THM61_HEADER: [&str; 13] = [
    "set", "ops", "L", "c", "beta", "K", "g_bound", "observed_k0", "observed_g", "distinct_count", "bound",
    "verdict", "resource_flag",
];

fn thm61_row(set: &str, ops: &str, l: u64, c: u32, r: &Theorem61Report) -> Vec<String> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    vec![
        set.to_string(),
        ops.to_string(),
        l.to_string(),
        c.to_string(),
        r.beta.to_string(),
        r.k.to_string(),
        r.g_bound.to_string(),
        opt(r.observed_k0.map(|v| v.to_string())),
        opt(r.observed_g.map(|v| v.to_string())),
        r.distinct_count.to_string(),
        opt(r.bound.as_ref().map(|v| v.to_string())),
        to_value(&r.verdict).as_str().unwrap_or_default().to_string(),
        opt(r.resource_flag.clone()),
    ]
}

fn verify(p: &Params) -> Run {
    let (set, ops) = (p.one("set")?, p.one("ops")?);
    let (l, c) = (p.require::<u64>("L")?, p.or::<u32>("c", 10)?);
    let report = theorem61_verify(&parse_set(set)?, &grammar::parse_ops(ops)?, l, c, p.or("max_k", 100_000)?)?;
    let row = thm61_row(set, ops, l, c, &report);
    Ok((to_value(&report), verdict_status(report.verdict), Table { header: THM61_HEADER.to_vec(), rows: vec![row] }))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A cyclic block of `len` coprime pairs with entries in `1..=max`.
fn random_cycle(seed: u64, len: usize, max: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("cyc[");
    let mut n = 0;
    while n < len {
        let (a, b) = (rng.gen_range(1..=max), rng.gen_range(1..=max));
        if gcd(a, b) == 1 {
            out.push_str(&format!("({a},{b})"));
            n += 1;
        }
    }
    out.push(']');
    out
}

fn sweep(p: &Params) -> Run {
    let l_fixed = p.get::<u64>("L")?;
    let c = p.or::<u32>("c", 10)?;
    let max_k = p.or("max_k", 100_000)?;
    let seed = p.or::<u64>("seed", 0)?;
    let mut ops = p.ops.clone();
    for i in 0..p.or::<usize>("random", 0)? {
        ops.push(random_cycle(seed.wrapping_add(i as u64), 30, l_fixed.unwrap_or(5).max(2)));
    }
    if p.sets.is_empty() || ops.is_empty() {
        return Err(Failure::Usage("sweep needs at least one --set and one --ops (or --random)".into()));
    }
    let sets = p.sets.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
    let seqs = ops.iter().map(|o| Ok(grammar::parse_ops(o)?)).collect::<Result<Vec<_>, Failure>>()?;
    let cells: Vec<(usize, usize)> =
        (0..sets.len()).flat_map(|i| (0..seqs.len()).map(move |j| (i, j))).collect();

    let work = || {
        cells
            .par_iter()
            .map(|&(i, j)| {
                let l = l_fixed.unwrap_or_else(|| seqs[j].bound().max(2));
                (l, theorem61_verify(&sets[i], &seqs[j], l, c, max_k))
            })
            .collect::<Vec<_>>()
    };
    let results = match p.get::<usize>("threads")? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| e.to_string())?
            .install(work),
        None => work(),
    };

    let mut status = Status::Complete;
    let mut counts = [0usize; 3];
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (&(i, j), (l, res)) in cells.iter().zip(results) {
        let report = match res {
            Ok(r) => r,
            Err(e) => match Failure::from(e) {
                Failure::Usage(msg) => {
                    return Err(Failure::Usage(format!("{} under {}: {msg}", p.sets[i], ops[j])))
                }
                Failure::Resource(msg) => {
                    counts[2] += 1;
                    status = status.max(Status::Inconclusive);
                    entries.push(json!({ "set": p.sets[i], "ops": ops[j], "L": l, "resource_flag": msg }));
                    let mut row = vec![String::new(); THM61_HEADER.len()];
                    row[..4].clone_from_slice(&[p.sets[i].clone(), ops[j].clone(), l.to_string(), c.to_string()]);
                    row[11] = "INCONCLUSIVE".into();
                    row[12] = msg;
                    rows.push(row);
                    continue;
                }
            },
        };
        let s = verdict_status(report.verdict);
        counts[s as usize] += 1;
        // FAIL outranks INCONCLUSIVE in the aggregate
        status = match (status, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (a, b) => a.max(b),
        };
        rows.push(thm61_row(&p.sets[i], &ops[j], l, c, &report));
        entries.push(json!({ "set": p.sets[i], "ops": ops[j], "L": l, "report": report }));
    }
    let result = json!({
        "cells": entries,
        "pass": counts[0],
        "fail": counts[1],
        "inconclusive": counts[2],
    });
    Ok((result, status, Table { header: THM61_HEADER.to_vec(), rows }))
}

fn construct(p: &Params) -> Run {
    let kind: String = p
        .get("kind")?
        .ok_or_else(|| "missing construction: ap, truncate, sparse-gaps, parity or divergence".to_string())?;
    match kind.as_str() {
        "ap" => construct_ap(p),
        "truncate" => construct_truncate(p),
        "sparse-gaps" => construct_sparse_gaps(p),
        "parity" => construct_parity(p),
        "divergence" => construct_divergence(p),
        other => Err(Failure::Usage(format!("unknown construction `{other}`"))),
    }
}

fn orbit_rows(predicted: &[EPSet], trace: &epiter::stability::IterationTrace) -> (Vec<Vec<String>>, usize, bool) {
    let mut rows = Vec::new();
    let mut mismatches = 0;
    let mut complete = true;
    for (k, want) in predicted.iter().enumerate() {
        let got = trace.iterate(k);
        complete &= got.is_some();
        let ok = got == Some(want);
        mismatches += usize::from(got.is_some() && !ok);
        rows.push(vec![
            k.to_string(),
            want.to_string(),
            got.map(ToString::to_string).unwrap_or_default(),
            ok.to_string(),
        ]);
    }
    (rows, mismatches, complete)
}

fn orbit_status(mismatches: usize, complete: bool) -> Status {
    if mismatches > 0 {
        Status::Fail
    } else if !complete {
        Status::Inconclusive
    } else {
        Status::Complete
    }
}

fn construct_ap(p: &Params) -> Run {
    let (a, b) = (p.require::<u64>("a")?, p.require::<u64>("b")?);
    let (x, orbit) = ap_counterexample(a, b)?;
    let horizon = p.or("max_k", 2 * orbit.cycle_length as usize)?;
    let trace = iterate_trace(&x, &OpSequence::constant(LinearOp::new(a, b)?), horizon);
    let mut predicted = vec![x.clone()];
    for k in 1..=horizon {
        predicted.push(orbit.iterate(u32::try_from(k).map_err(|_| "--max_k too large".to_string())?)?);
    }
    let (rows, mismatches, complete) = orbit_rows(&predicted, &trace);
    let result = json!({
        "set": x,
        "predicted": orbit,
        "horizon": horizon,
        "mismatches": mismatches,
        "distinct_count": trace.distinct_count,
        "cycle": trace.cycle,
        "resource_flag": trace.resource_flag,
    });
    let header = vec!["k", "predicted", "observed", "match"];
    Ok((result, orbit_status(mismatches, complete && trace.is_complete()), Table { header, rows }))
}

fn construct_truncate(p: &Params) -> Run {
    let text = p.one("set")?;
    let ParsedSet::Truncated(t) = grammar::parse_set(text)? else {
        return Err(Failure::Usage("truncate expects a bohr(...) or sparse(...) call".into()));
    };
    let h = t.horizon().max(1);
    let samples: Vec<i128> = (1..=10).map(|i| (h * i / 10).max(1)).collect();
    let density = truncated_density_report(&t, &samples);
    let rows = density
        .profile
        .iter()
        .zip(&density.sup_profile)
        .map(|((n, d), (_, s))| vec![n.to_string(), format!("{d:.6}"), format!("{s:.6}")])
        .collect();
    let result = json!({
        "set": t.to_string(),
        "size": t.len(),
        "horizon": t.horizon(),
        "provenance": t.provenance(),
        "density": density,
    });
    Ok((result, Status::Complete, Table { header: vec!["n", "density", "sup_density"], rows }))
}

fn construct_sparse_gaps(p: &Params) -> Run {
    let n = p.or::<u32>("N", 4)?;
    let delta: Rational = p.require("delta")?;
    let (a, b) = (p.require::<u64>("a")?, p.require::<u64>("b")?);
    let profile = sparse_gap_profile(&power_tower_starts(n)?, delta, a, b)?;
    let gaps: Vec<i128> = profile.iter().filter_map(|e| e.max_gap).collect();
    let increasing = gaps.windows(2).all(|w| w[0] < w[1]);
    let rows = profile
        .iter()
        .map(|e| {
            vec![e.blocks.to_string(), e.horizon.to_string(), e.max_gap.map(|g| g.to_string()).unwrap_or_default()]
        })
        .collect();
    let result = json!({ "profile": profile, "gaps_increase": increasing });
    let status = if increasing { Status::Complete } else { Status::Fail };
    Ok((result, status, Table { header: vec!["blocks", "horizon", "max_gap"], rows }))
}

fn construct_parity(p: &Params) -> Run {
    let text: String = p.require("bits")?;
    let bits = text
        .chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Failure::Usage(format!("--bits must be 0s and 1s, got `{text}`"))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    let (seq, predicted) = parity_flip_sequence(&bits)?;
    let trace = iterate_trace(&predicted[0], &seq, bits.len());
    let (rows, mismatches, complete) = orbit_rows(&predicted, &trace);
    let result = json!({
        "ops": seq.to_string(),
        "predicted": predicted,
        "observed": trace.iterates,
        "mismatches": mismatches,
    });
    let header = vec!["k", "predicted", "observed", "match"];
    Ok((result, orbit_status(mismatches, complete), Table { header, rows }))
}

fn construct_divergence(p: &Params) -> Run {
    let d = p.require::<u64>("d")?;
    let (a, b) = (p.require::<u64>("a")?, p.require::<u64>("b")?);
    let k_max = p.or::<u32>("max_k", 6)?;
    let report = scaled_divergence(d, a, b, k_max)?;
    let rows = report
        .steps
        .iter()
        .map(|s| {
            vec![
                s.k.to_string(),
                s.iterate.to_string(),
                s.min_positive.map(|m| m.to_string()).unwrap_or_default(),
                s.divisible.to_string(),
            ]
        })
        .collect();
    let status = if report.diverges { Status::Complete } else { Status::Fail };
    Ok((to_value(&report), status, Table { header: vec!["k", "iterate", "min_positive", "divisible"], rows }))
}
