//! JSON and CSV output.
//!
//! JSON floats use the shortest text that round-trips; CSV floats use 17
//! significant digits. Rationals are always `"p/q"` strings.

use hgreen_core::green::{Candidate, GainCheck};
use hgreen_core::io::function_to_json;
use hgreen_core::scalar::format_f64;
use hgreen_core::schatten::{GrowthWitness, TailParts};
use hgreen_core::{
    is_kernel, ConstantReport, EigenIndex, EigenRecord, Multiplicity, SchattenReport, SpectralFunction, Spectrum,
    TailBound, Verdict,
};
use serde_json::{json, Value};

use crate::args::{CheckArgs, CheckFormat, Format, SpectrumArgs};
use crate::check::Outcome;
use crate::Loaded;

fn provenance(loaded: &Loaded, command: &str) -> Value {
    let p = &loaded.params;
    let lat = p.lattice();
    let c = match p.c_exact() {
        Some(q) => json!(hgreen_core::scalar::format_rational(q)),
        None => json!(p.c()),
    };
    json!({
        "tool": "hgreen",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": {
            "d": p.d(),
            "c": c,
            "alpha": p.alpha(),
            "bigL": p.big_l(),
            "epsilon": p.epsilon(),
            "lattice": {
                "source": loaded.lattice_source,
                "dim": lat.dim(),
                "dualRows": lat.rows(),
            },
        },
    })
}

fn index_json(idx: &EigenIndex) -> Value {
    match idx {
        EigenIndex::TypeA { n, j } => json!({ "kind": "A", "n": n, "j": j }),
        EigenIndex::TypeB { norm_sq, count } => json!({ "kind": "B", "normSq": norm_sq, "shellSize": count }),
    }
}

fn mult_json(m: Multiplicity) -> Value {
    match m {
        Multiplicity::Finite(v) => json!(v),
        Multiplicity::Infinite => json!("infinite"),
    }
}

fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn spectrum(loaded: &Loaded, a: &SpectrumArgs, spec: &Spectrum, format: Format) -> String {
    let p = &loaded.params;
    let record_json = |r: &EigenRecord| {
        json!({
            "lambda": r.lambda,
            "mu": r.mu,
            "multiplicity": mult_json(r.multiplicity),
            "index": index_json(&r.index),
            "kernel": is_kernel(p, &r.index),
        })
    };
    match (format, spec) {
        (Format::Json, Spectrum::Raw(records)) => to_text(&json!({
            "provenance": provenance(loaded, "spectrum"),
            "lambdaMax": a.lambda_max,
            "coalesced": false,
            "records": records.iter().map(record_json).collect::<Vec<_>>(),
        })),
        (Format::Json, Spectrum::Coalesced(groups)) => to_text(&json!({
            "provenance": provenance(loaded, "spectrum"),
            "lambdaMax": a.lambda_max,
            "coalesced": true,
            "groups": groups.iter().map(|g| json!({
                "lambda": g.lambda,
                "multiplicity": mult_json(g.multiplicity),
                "kernel": g.is_kernel(),
                "crossFamily": g.cross_family,
                "inexactMerge": g.inexact_merge,
                "members": g.members.iter().map(record_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })),
        (Format::Csv, Spectrum::Raw(records)) => csv_text(
            &["lambda", "mu", "multiplicity", "index", "kernel"],
            records.iter().map(|r| {
                vec![
                    format_f64(r.lambda),
                    format_f64(r.mu),
                    r.multiplicity.to_string(),
                    r.index.to_string(),
                    is_kernel(p, &r.index).to_string(),
                ]
            }),
        ),
        (Format::Csv, Spectrum::Coalesced(groups)) => csv_text(
            &["lambda", "multiplicity", "members", "kernel", "cross_family", "inexact_merge"],
            groups.iter().map(|g| {
                vec![
                    format_f64(g.lambda),
                    g.multiplicity.to_string(),
                    g.members.iter().map(|m| m.index.to_string()).collect::<Vec<_>>().join(" "),
                    g.is_kernel().to_string(),
                    g.cross_family.to_string(),
                    g.inexact_merge.to_string(),
                ]
            }),
        ),
    }
}

fn tail_json(t: TailBound) -> Value {
    match t {
        TailBound::Finite(v) => json!(v),
        TailBound::Infinite => json!("infinite"),
    }
}

fn tail_text(t: TailBound) -> String {
    match t {
        TailBound::Finite(v) => format_f64(v),
        TailBound::Infinite => "infinite".into(),
    }
}

fn witness_json(w: &GrowthWitness) -> Value {
    json!({
        "points": w.points.iter().map(|(n, v)| json!({ "n": n, "value": v })).collect::<Vec<_>>(),
        "increments": w.increments.iter().map(|(o, p)| json!({ "observed": o, "predicted": p })).collect::<Vec<_>>(),
    })
}

fn parts_json(t: &Option<TailParts>) -> Value {
    match t {
        Some(t) => json!({ "nTail": t.n_tail, "jTail": t.j_tail, "latticeTail": t.lattice_tail }),
        None => Value::Null,
    }
}

pub fn schatten(loaded: &Loaded, rep: &SchattenReport, format: Format) -> String {
    let verdict = match &rep.verdict {
        Verdict::Converges {
            norm_upper_bound,
            norm_lower_bound,
        } => json!({ "kind": "Converges", "normUpperBound": norm_upper_bound, "normLowerBound": norm_lower_bound }),
        Verdict::Diverges { growth_witness } => {
            json!({ "kind": "Diverges", "growthWitness": witness_json(growth_witness) })
        }
    };
    match format {
        Format::Json => to_text(&json!({
            "provenance": provenance(loaded, "schatten"),
            "r": rep.r,
            "cutoffN": rep.cutoffs.n_max,
            "cutoffJ": rep.cutoffs.j_max,
            "cutoffNormSq": rep.cutoffs.norm_sq_max,
            "partialSum": rep.partial_sum,
            "typeAPartial": rep.type_a_partial,
            "typeBPartial": rep.type_b_partial,
            "tailUpperBound": tail_json(rep.tail_upper_bound),
            "tailParts": parts_json(&rep.tail_parts),
            "lowerBoundAtCutoff": rep.lower_bound_at_cutoff,
            "threshold": rep.threshold,
            "verdict": verdict,
        })),
        Format::Csv => {
            let mut rows = vec![
                ("r", format_f64(rep.r)),
                ("cutoffN", rep.cutoffs.n_max.to_string()),
                ("cutoffJ", rep.cutoffs.j_max.to_string()),
                ("cutoffNormSq", format_f64(rep.cutoffs.norm_sq_max)),
                ("partialSum", format_f64(rep.partial_sum)),
                ("typeAPartial", format_f64(rep.type_a_partial)),
                ("typeBPartial", format_f64(rep.type_b_partial)),
                ("tailUpperBound", tail_text(rep.tail_upper_bound)),
                ("lowerBoundAtCutoff", format_f64(rep.lower_bound_at_cutoff)),
                ("threshold", format_f64(rep.threshold)),
            ];
            match &rep.verdict {
                Verdict::Converges {
                    norm_upper_bound,
                    norm_lower_bound,
                } => {
                    rows.push(("verdict", "Converges".into()));
                    rows.push(("normUpperBound", format_f64(*norm_upper_bound)));
                    rows.push(("normLowerBound", format_f64(*norm_lower_bound)));
                }
                Verdict::Diverges { growth_witness } => {
                    rows.push(("verdict", "Diverges".into()));
                    for (n, v) in &growth_witness.points {
                        rows.push(("witness", format!("{n}:{}", format_f64(*v))));
                    }
                }
            }
            csv_text(&["field", "value"], rows.into_iter().map(|(k, v)| vec![k.to_string(), v]))
        }
    }
}

fn candidate_json(c: &Candidate) -> Value {
    json!({ "index": index_json(&c.index), "lambda": c.lambda, "value": c.value })
}

pub fn constant(loaded: &Loaded, rep: &ConstantReport, format: Format) -> String {
    let rel = (rep.numeric_sup - rep.closed_form).abs() / rep.closed_form;
    match format {
        Format::Json => to_text(&json!({
            "provenance": provenance(loaded, "constant"),
            "probe": rep.probe,
            "closedForm": rep.closed_form,
            "numericSup": rep.numeric_sup,
            "relativeDifference": rel,
            "argmax": index_json(&rep.argmax),
            "candidates": rep.candidates.iter().map(candidate_json).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut rows = vec![
                vec!["closedForm".into(), String::new(), String::new(), format_f64(rep.closed_form)],
                vec!["numericSup".into(), rep.argmax.to_string(), String::new(), format_f64(rep.numeric_sup)],
            ];
            rows.extend(rep.candidates.iter().map(|c| {
                vec!["candidate".into(), c.index.to_string(), format_f64(c.lambda), format_f64(c.value)]
            }));
            csv_text(&["row", "index", "lambda", "value"], rows)
        }
    }
}

pub struct GreenRow {
    pub s: f64,
    pub input_norm: f64,
    pub output_norm: f64,
    pub gain: GainCheck,
}

/// The JSON output keeps `terms` at the top level so it re-reads as a function file.
pub fn green(loaded: &Loaded, g: &SpectralFunction, l2: (f64, f64), rows: &[GreenRow], format: Format) -> String {
    match format {
        Format::Json => {
            let mut doc = function_to_json(g);
            let obj = doc.as_object_mut().expect("function json is an object");
            obj.insert("provenance".into(), provenance(loaded, "green"));
            obj.insert("l2Norm".into(), json!({ "input": l2.0, "output": l2.1 }));
            obj.insert(
                "sobolev".into(),
                rows.iter()
                    .map(|r| {
                        json!({
                            "s": r.s,
                            "inputNorm": r.input_norm,
                            "outputNorm": r.output_norm,
                            "gainCheck": { "lhs": r.gain.lhs, "rhs": r.gain.rhs, "holds": r.gain.holds },
                        })
                    })
                    .collect(),
            );
            to_text(&doc)
        }
        Format::Csv => csv_text(
            &["kind", "n", "j", "normSq", "slot", "re", "im"],
            g.terms().iter().map(|t| {
                let (kind, n, j, q) = match &t.index {
                    EigenIndex::TypeA { n, j } => ("A", n.to_string(), j.to_string(), String::new()),
                    EigenIndex::TypeB { norm_sq, .. } => ("B", String::new(), String::new(), norm_sq.to_string()),
                };
                vec![
                    kind.into(),
                    n,
                    j,
                    q,
                    t.slot.to_string(),
                    format_f64(t.coeff.re),
                    format_f64(t.coeff.im),
                ]
            }),
        ),
    }
}

pub fn check(a: &CheckArgs, outcomes: &[Outcome]) -> String {
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let status = |o: &Outcome| if o.passed { "PASS" } else { "FAIL" };
    match a.format {
        CheckFormat::Text => {
            let w = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
            let mut s = format!("seed {}", a.seed);
            if let Some(sab) = a.sabotage {
                s.push_str(&format!(", sabotage {sab:?}"));
            }
            s.push('\n');
            for o in outcomes {
                s.push_str(&format!("{}  {:<8}  {:<w$}  {}\n", status(o), o.module, o.name, o.detail));
            }
            s.push_str(&format!("{passed}/{} invariants passed\n", outcomes.len()));
            s
        }
        CheckFormat::Json => to_text(&json!({
            "tool": "hgreen",
            "version": env!("CARGO_PKG_VERSION"),
            "seed": a.seed,
            "sabotage": a.sabotage.map(|s| format!("{s:?}")),
            "passed": passed == outcomes.len(),
            "results": outcomes.iter().map(|o| json!({
                "module": o.module,
                "invariant": o.name,
                "passed": o.passed,
                "detail": o.detail,
            })).collect::<Vec<_>>(),
        })),
        CheckFormat::Csv => csv_text(
            &["status", "module", "invariant", "detail"],
            outcomes
                .iter()
                .map(|o| vec![status(o).into(), o.module.into(), o.name.clone(), o.detail.clone()]),
        ),
    }
}
