//! Command-line interface for the query analysis toolbox.
//!
//! One subcommand per operation; deterministic, scriptable output. Exit
//! codes: 0 positive/complete, 1 negative, 2 unknown or bounded-only,
//! 64 usage error, 65 input error, 70 resource limit.

use clap::{Parser, Subcommand};
use crpqmin::alphabet::Alphabet;
use crpqmin::approx;
use crpqmin::contain::{self, Mode, Status, Verdict};
use crpqmin::eval;
use crpqmin::exec;
use crpqmin::graphdb::{GraphDb, NodeId};
use crpqmin::hom::{self, HomGraph};
use crpqmin::query::{parse_query, serialize_query, Crpq, Ucrpq, VarId};
use crpqmin::refine;
use crpqmin::structure;
use crpqmin::treepat;
use crpqmin::Error as LibError;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crpqmin", version, about = "Analyze, check and minimize graph path queries")]
struct Cli {
    /// Worker threads for bulk searches (0 = default pool, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Machine-readable JSON on stdout (errors go to stderr as JSON too).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a query on a graph database.
    Eval {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        db: PathBuf,
        /// Fix variables up front: x=u0,y=u1
        #[arg(long)]
        pin: Option<String>,
    },
    /// Search for a homomorphism between two conjunctive queries or graphs.
    Hom {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Require the homomorphism to cover every target atom.
        #[arg(long)]
        strong_onto: bool,
    },
    /// Decide containment of the left query in the right one.
    Contain {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value = "auto")]
        mode: String,
        #[arg(long, default_value_t = contain::DEFAULT_MAX_ATOM_LEN)]
        max_len: usize,
    },
    /// Decide equivalence (both containment directions).
    Equiv {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value = "auto")]
        mode: String,
        #[arg(long, default_value_t = contain::DEFAULT_MAX_ATOM_LEN)]
        max_len: usize,
    },
    /// Hunt for a database on which two queries disagree.
    Falsify {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        db_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List expansions of a query up to a per-atom word length.
    Expand {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Fully contract internal variables.
    Contract {
        #[arg(long)]
        query: PathBuf,
    },
    /// Partition the atoms into segments; optionally render the segment graph.
    Segments {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Remove atoms whose removal keeps the query equivalent.
    Redundant {
        #[arg(long)]
        query: PathBuf,
        #[arg(long, default_value = "auto")]
        mode: String,
        #[arg(long, default_value_t = contain::DEFAULT_MAX_ATOM_LEN)]
        max_len: usize,
    },
    /// Check hom-minimality of an expansion and certify a lower bound.
    Certify {
        #[arg(long)]
        query: PathBuf,
        /// Comma-separated word per atom, e.g. a,aa (use %eps for the empty word).
        #[arg(long)]
        expansion_words: String,
        #[arg(long, default_value_t = 6)]
        hom_bound: usize,
        #[arg(long, default_value_t = 0)]
        disjunct: usize,
    },
    /// Compute the maximal under-approximation within k atoms.
    Approx {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        k: usize,
        /// Refinement length (defaults to atoms * states * k).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the query is equivalent to one with at most k atoms.
    Minimize {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "auto")]
        mode: String,
        #[arg(long, default_value_t = contain::DEFAULT_MAX_ATOM_LEN)]
        max_len: usize,
        /// Search for a single equivalent query instead of a union.
        #[arg(long)]
        crpq: bool,
        /// Pool concatenation depth for the single-query search.
        #[arg(long, default_value_t = 2)]
        pool_concat: usize,
    },
    /// Encode a tree pattern as a query.
    EncodeTp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra letters for the pattern alphabet, comma-separated.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Recover the tree pattern from an encoded query.
    DecodeTp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(64);
            }
            // Help and version are friendly exits.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    exec::configure_jobs(cli.jobs);
    let json = cli.json;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let kind = match &e {
                LibError::Resource(_) => "resource",
                _ => "input",
            };
            if json {
                eprintln!("{}", json!({"error": {"kind": kind, "message": e.to_string()}}));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(match e {
                LibError::Resource(_) => 70u8,
                _ => 65u8,
            })
        }
    }
}

fn read(path: &Path) -> Result<String, LibError> {
    fs::read_to_string(path)
        .map_err(|e| LibError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_query(path: &Path) -> Result<Ucrpq, LibError> {
    parse_query(&read(path)?)
}

fn parse_mode(mode: &str, max_len: usize) -> Result<Mode, LibError> {
    match mode {
        "auto" => Ok(Mode::Auto),
        "sre" => Ok(Mode::Sre),
        "bounded" => Ok(Mode::Bounded(max_len)),
        other => Err(LibError::Input(format!(
            "unknown mode `{other}` (expected auto, sre or bounded)"
        ))),
    }
}

fn parse_word(
    text: &str,
    alphabet: &Alphabet,
) -> Result<Vec<crpqmin::alphabet::Symbol>, LibError> {
    let t = text.trim();
    if t.is_empty() || t == "%eps" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = t;
    while !rest.is_empty() {
        match alphabet.longest_prefix(rest) {
            Some((sym, len)) => {
                out.push(sym);
                rest = &rest[len..];
            }
            None => {
                return Err(LibError::UnknownLetter {
                    letter: rest.to_string(),
                    position: t.len() - rest.len(),
                })
            }
        }
    }
    Ok(out)
}

fn db_value(db: &GraphDb) -> Value {
    serde_json::from_slice(&db.save()).expect("database serialization is valid JSON")
}

fn words_value(words: &[Vec<crpqmin::alphabet::Symbol>], alphabet: &Alphabet) -> Value {
    Value::Array(
        words
            .iter()
            .map(|w| {
                Value::Array(
                    w.iter().map(|&s| Value::String(alphabet.name(s).to_string())).collect(),
                )
            })
            .collect(),
    )
}

fn word_text(word: &[crpqmin::alphabet::Symbol], alphabet: &Alphabet) -> String {
    if word.is_empty() {
        "%eps".to_string()
    } else {
        word.iter().map(|&s| alphabet.name(s)).collect::<Vec<_>>().join(".")
    }
}

fn verdict_value(v: &Verdict, alphabet: &Alphabet) -> Value {
    let mode = match v.mode {
        contain::ModeUsed::Sre => "sre",
        contain::ModeUsed::SinglePath => "single_path",
        contain::ModeUsed::Bounded => "bounded",
    };
    match &v.status {
        Status::Contained => json!({
            "status": "contained", "mode": mode, "bound": v.bound, "counterexample": null
        }),
        Status::ContainedUpToBound(b) => json!({
            "status": "contained_up_to_bound", "mode": mode, "bound": b, "counterexample": null
        }),
        Status::NotContained(cex) => json!({
            "status": "not_contained", "mode": mode, "bound": v.bound,
            "counterexample": {
                "disjunct": cex.expansion.disjunct,
                "words": words_value(&cex.expansion.words, alphabet),
                "db": db_value(&cex.db),
                "tuple": cex.tuple.iter().map(|n| cex.db.node_name(*n).to_string()).collect::<Vec<_>>(),
            }
        }),
    }
}

fn verdict_text(v: &Verdict, alphabet: &Alphabet) -> String {
    let mode = match v.mode {
        contain::ModeUsed::Sre => "sre",
        contain::ModeUsed::SinglePath => "single-path",
        contain::ModeUsed::Bounded => "bounded",
    };
    match &v.status {
        Status::Contained => format!("contained (complete; mode {mode})"),
        Status::ContainedUpToBound(b) => {
            format!("contained up to bound {b} (mode {mode}; not a complete answer)")
        }
        Status::NotContained(cex) => {
            let words: Vec<String> =
                cex.expansion.words.iter().map(|w| word_text(w, alphabet)).collect();
            format!(
                "not contained (mode {mode}); counterexample expansion of disjunct {}: [{}]",
                cex.expansion.disjunct,
                words.join(", ")
            )
        }
    }
}

fn exit_for_verdict(v: &Verdict) -> u8 {
    match v.status {
        Status::Contained => 0,
        Status::NotContained(_) => 1,
        Status::ContainedUpToBound(_) => 2,
    }
}

/// One side of a homomorphism check: query file or graph JSON.
enum Side {
    Query(Crpq),
    Db(GraphDb),
}

fn load_side(path: &Path) -> Result<Side, LibError> {
    if path.extension().map_or(false, |e| e == "json") {
        // Derive the alphabet from the edge labels.
        let raw = read(path)?;
        let v: Value =
            serde_json::from_str(&raw).map_err(|e| LibError::Input(format!("bad JSON: {e}")))?;
        let mut letters: Vec<String> = v["edges"]
            .as_array()
            .map(|edges| {
                edges
                    .iter()
                    .filter_map(|e| e.get(1).and_then(Value::as_str).map(String::from))
                    .collect()
            })
            .unwrap_or_default();
        letters.sort();
        letters.dedup();
        let alphabet = Alphabet::new(letters);
        Ok(Side::Db(GraphDb::load(raw.as_bytes(), &alphabet)?))
    } else {
        let u = load_query(path)?;
        if u.disjuncts.len() != 1 {
            return Err(LibError::Input("homomorphism sides must be single queries".into()));
        }
        Ok(Side::Query(u.disjuncts.into_iter().next().unwrap()))
    }
}

/// Rebuild both sides over one shared alphabet so symbols align.
fn common_homgraphs(
    a: Side,
    b: Side,
) -> Result<(HomGraph, HomGraph, Vec<String>), LibError> {
    fn side_alphabet(side: &Side) -> Alphabet {
        match side {
            Side::Query(q) => q.alphabet().clone(),
            Side::Db(db) => db.alphabet().clone(),
        }
    }
    let (aa, ba) = (side_alphabet(&a), side_alphabet(&b));
    let mut names: Vec<String> = aa
        .symbols()
        .map(|s| aa.name(s).to_string())
        .chain(ba.symbols().map(|s| ba.name(s).to_string()))
        .collect();
    names.sort();
    names.dedup();
    let common = Alphabet::new(names);
    let to_graph = |side: Side| -> Result<(HomGraph, Alphabet), LibError> {
        match side {
            Side::Query(q) => Ok((HomGraph::from_cq(&q)?, q.alphabet().clone())),
            Side::Db(db) => Ok((HomGraph::from_db(&db), db.alphabet().clone())),
        }
    };
    let remap = |g: HomGraph, from: &Alphabet| -> HomGraph {
        HomGraph {
            edges: g
                .edges
                .into_iter()
                .map(|(u, s, v)| (u, common.lookup(from.name(s)).unwrap(), v))
                .collect(),
            ..g
        }
    };
    let (ga, al_a) = to_graph(a)?;
    let (gb, al_b) = to_graph(b)?;
    let gb = remap(gb, &al_b);
    let tgt_names = gb.node_names.clone();
    Ok((remap(ga, &al_a), gb, tgt_names))
}

fn run(cli: Cli) -> Result<u8, LibError> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Eval { query, db, pin } => {
            let u = load_query(&query)?;
            let dbv = GraphDb::load(read(&db)?.as_bytes(), u.alphabet())?;
            let mut tuples = std::collections::BTreeSet::new();
            match pin {
                None => {
                    tuples = eval::evaluate_union(&u, &dbv)?;
                }
                Some(pin_text) => {
                    for d in &u.disjuncts {
                        let mut pins: Vec<(VarId, NodeId)> = Vec::new();
                        for part in pin_text.split(',') {
                            let (var, node) = part.split_once('=').ok_or_else(|| {
                                LibError::Input(format!("bad pin `{part}`, expected var=node"))
                            })?;
                            let v = d.lookup_var(var.trim()).ok_or_else(|| {
                                LibError::Unknown { kind: "variable", name: var.trim().into() }
                            })?;
                            let n = dbv.lookup_node(node.trim()).ok_or_else(|| {
                                LibError::Unknown { kind: "node", name: node.trim().into() }
                            })?;
                            pins.push((v, n));
                        }
                        tuples.extend(eval::evaluate(d, &dbv, &pins)?);
                    }
                }
            }
            let rendered: Vec<Vec<String>> = tuples
                .iter()
                .map(|t| t.iter().map(|n| dbv.node_name(*n).to_string()).collect())
                .collect();
            if json {
                println!("{}", json!({"command": "eval", "tuples": rendered}));
            } else {
                for t in &rendered {
                    println!("({})", t.join(", "));
                }
            }
            Ok(0)
        }

        Cmd::Hom { from, to, strong_onto } => {
            let (src, tgt, tgt_names) = common_homgraphs(load_side(&from)?, load_side(&to)?)?;
            let found = if strong_onto {
                hom::find_hom_filtered(&src, &tgt, &[], |h| hom::is_strong_onto(h, &src, &tgt))
            } else {
                hom::find_hom(&src, &tgt, &[])
            };
            match found {
                Some(h) => {
                    let mapping: Vec<(String, String)> = h
                        .map
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| (src.node_names[i].clone(), tgt_names[t].clone()))
                        .collect();
                    if json {
                        let obj: serde_json::Map<String, Value> = mapping
                            .iter()
                            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                            .collect();
                        println!(
                            "{}",
                            json!({"command": "hom", "found": true, "strong_onto": strong_onto, "mapping": obj})
                        );
                    } else {
                        for (k, v) in mapping {
                            println!("{k} -> {v}");
                        }
                    }
                    Ok(0)
                }
                None => {
                    if json {
                        println!(
                            "{}",
                            json!({"command": "hom", "found": false, "strong_onto": strong_onto, "mapping": null})
                        );
                    } else {
                        println!("no homomorphism");
                    }
                    Ok(1)
                }
            }
        }

        Cmd::Contain { left, right, mode, max_len } => {
            let l = load_query(&left)?;
            let r = load_query(&right)?;
            let v = contain::contained(&l, &r, parse_mode(&mode, max_len)?)?;
            if json {
                let mut val = verdict_value(&v, l.alphabet());
                val["command"] = json!("contain");
                println!("{val}");
            } else {
                println!("{}", verdict_text(&v, l.alphabet()));
            }
            Ok(exit_for_verdict(&v))
        }

        Cmd::Equiv { left, right, mode, max_len } => {
            let l = load_query(&left)?;
            let r = load_query(&right)?;
            let (f, b) = contain::equivalent(&l, &r, parse_mode(&mode, max_len)?)?;
            let summary = if !f.is_positive() || !b.is_positive() {
                "no"
            } else if f.is_complete() && b.is_complete() {
                "yes"
            } else {
                "up_to_bounds"
            };
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "equiv",
                        "forward": verdict_value(&f, l.alphabet()),
                        "backward": verdict_value(&b, r.alphabet()),
                        "equivalent": summary,
                    })
                );
            } else {
                println!("left in right: {}", verdict_text(&f, l.alphabet()));
                println!("right in left: {}", verdict_text(&b, r.alphabet()));
                println!("equivalent: {}", summary.replace('_', " "));
            }
            Ok(match summary {
                "yes" => 0,
                "no" => 1,
                _ => 2,
            })
        }

        Cmd::Falsify { left, right, trials, db_size, seed } => {
            let l = load_query(&left)?;
            let r = load_query(&right)?;
            match contain::falsify_equivalence(&l, &r, trials, db_size, seed)? {
                Some(d) => {
                    let tuple: Vec<String> =
                        d.tuple.iter().map(|n| d.db.node_name(*n).to_string()).collect();
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "falsify", "found": true, "trial": d.trial,
                                "tuple": tuple, "left_only": d.left_only, "db": db_value(&d.db),
                            })
                        );
                    } else {
                        println!(
                            "disagreement at trial {} on tuple ({}) ({} side only)",
                            d.trial,
                            tuple.join(", "),
                            if d.left_only { "left" } else { "right" }
                        );
                        println!("{}", String::from_utf8_lossy(&d.db.save()));
                    }
                    Ok(1)
                }
                None => {
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "falsify", "found": false, "trial": null,
                                "tuple": null, "left_only": null, "db": null,
                            })
                        );
                    } else {
                        println!("no disagreement in {trials} trials");
                    }
                    Ok(2)
                }
            }
        }

        Cmd::Expand { query, max_len, limit } => {
            let u = load_query(&query)?;
            let alphabet = u.alphabet().clone();
            let cap = limit.unwrap_or(usize::MAX);
            let rows: Vec<(usize, Vec<Vec<crpqmin::alphabet::Symbol>>)> =
                refine::union_expansions(&u, max_len)
                    .take(cap)
                    .map(|e| (e.disjunct, e.words))
                    .collect();
            if json {
                let arr: Vec<Value> = rows
                    .iter()
                    .map(|(d, ws)| json!({"disjunct": d, "words": words_value(ws, &alphabet)}))
                    .collect();
                println!("{}", json!({"command": "expand", "expansions": arr}));
            } else {
                for (d, ws) in &rows {
                    let words: Vec<String> = ws.iter().map(|w| word_text(w, &alphabet)).collect();
                    println!("d{d}: {}", words.join(", "));
                }
            }
            Ok(0)
        }

        Cmd::Contract { query } => {
            let u = load_query(&query)?;
            let contracted = Ucrpq::new(u.disjuncts.iter().map(structure::contract).collect())?;
            let text = serialize_query(&contracted);
            if json {
                println!("{}", json!({"command": "contract", "query": text}));
            } else {
                print!("{text}");
            }
            Ok(0)
        }

        Cmd::Segments { query, dot } => {
            let u = load_query(&query)?;
            if u.disjuncts.len() != 1 {
                return Err(LibError::Input("segments works on a single query".into()));
            }
            let q = &u.disjuncts[0];
            let segs = structure::segments(q);
            let (graph, names) = structure::segment_graph(q);
            let dot_text = graph.to_dot(&names);
            if json {
                let arr: Vec<Value> = segs
                    .iter()
                    .map(|s| {
                        json!({
                            "atoms": s.atoms,
                            "start": q.var_name(s.start),
                            "end": q.var_name(s.end),
                            "cyclic": s.cyclic,
                        })
                    })
                    .collect();
                println!("{}", json!({"command": "segments", "segments": arr, "dot": dot_text}));
            } else if dot {
                print!("{dot_text}");
            } else {
                for (i, s) in segs.iter().enumerate() {
                    println!(
                        "segment {i}: {} -> {} atoms {:?} cyclic={}",
                        q.var_name(s.start),
                        q.var_name(s.end),
                        s.atoms,
                        s.cyclic
                    );
                }
            }
            Ok(0)
        }

        Cmd::Redundant { query, mode, max_len } => {
            let u = load_query(&query)?;
            if u.disjuncts.len() != 1 {
                return Err(LibError::Input("redundant works on a single query".into()));
            }
            let m = match parse_mode(&mode, max_len)? {
                Mode::Auto => Mode::Bounded(max_len),
                other => other,
            };
            let (reduced, report) = structure::remove_redundant_atoms(&u.disjuncts[0], m)?;
            let text = serialize_query(&Ucrpq::single(reduced));
            if json {
                let decisions: Vec<Value> = report
                    .decisions
                    .iter()
                    .map(|d| json!({"atom": d.atom, "removed": d.removed, "complete": d.complete}))
                    .collect();
                println!(
                    "{}",
                    json!({
                        "command": "redundant", "query": text,
                        "complete": report.complete, "decisions": decisions,
                    })
                );
            } else {
                for d in &report.decisions {
                    println!(
                        "{} {} ({})",
                        if d.removed { "removed" } else { "kept   " },
                        d.atom,
                        if d.complete { "complete" } else { "bounded" }
                    );
                }
                print!("{text}");
                println!(
                    "result: {}",
                    if report.complete { "non-redundant (complete)" } else { "reduced (bounded)" }
                );
            }
            Ok(if report.complete { 0 } else { 2 })
        }

        Cmd::Certify { query, expansion_words, hom_bound, disjunct } => {
            let u = load_query(&query)?;
            let d = u
                .disjuncts
                .get(disjunct)
                .ok_or_else(|| LibError::Input(format!("no disjunct #{disjunct}")))?;
            let words: Vec<Vec<crpqmin::alphabet::Symbol>> = expansion_words
                .split(',')
                .map(|w| parse_word(w, u.alphabet()))
                .collect::<Result<_, _>>()?;
            let xi = refine::expansion_from_words(d, &words, disjunct)?;
            let cert = structure::check_strong_minimality(&u, &xi, hom_bound)?;
            let alphabet = u.alphabet();
            match &cert.status {
                structure::CertificateStatus::VerifiedUpTo(b) => {
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "certify", "status": "verified_up_to", "bound": b,
                                "core_segments": cert.core_segments,
                                "lower_bound": cert.implied_atom_lower_bound(),
                                "witness_words": null,
                            })
                        );
                    } else {
                        println!(
                            "hom-minimal up to {b} atoms; core segments = {0}; any equivalent union needs >= {0} atoms per disjunct",
                            cert.core_segments
                        );
                    }
                    Ok(0)
                }
                structure::CertificateStatus::Refuted(witness) => {
                    let ws: Vec<String> =
                        witness.words.iter().map(|w| word_text(w, alphabet)).collect();
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "certify", "status": "refuted", "bound": hom_bound,
                                "core_segments": cert.core_segments,
                                "lower_bound": null,
                                "witness_words": words_value(&witness.words, alphabet),
                            })
                        );
                    } else {
                        println!("refuted: more general expansion [{}] maps in", ws.join(", "));
                    }
                    Ok(1)
                }
            }
        }

        Cmd::Approx { query, k, m, out } => {
            let u = load_query(&query)?;
            let m = m.unwrap_or_else(|| approx::default_refinement_length(&u, k));
            let disjuncts = approx::under_approximation(&u, k, m)?;
            let count = disjuncts.len();
            let text = if count > 0 {
                serialize_query(&Ucrpq::new(disjuncts)?)
            } else {
                String::new()
            };
            if let Some(path) = &out {
                if count == 0 {
                    return Err(LibError::Input(
                        "the approximation is the empty union; nothing to write".into(),
                    ));
                }
                fs::write(path, &text)
                    .map_err(|e| LibError::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "approx", "disjuncts": count, "m": m,
                        "out": out.as_ref().map(|p| p.display().to_string()),
                    })
                );
            } else {
                println!("disjuncts: {count} (refinement length {m})");
                if out.is_none() {
                    print!("{text}");
                }
            }
            Ok(0)
        }

        Cmd::Minimize { query, k, mode, max_len, crpq, pool_concat } => {
            let u = load_query(&query)?;
            if crpq {
                if u.disjuncts.len() != 1 {
                    return Err(LibError::Input(
                        "--crpq searches for a single query; input must be one query".into(),
                    ));
                }
                let config =
                    approx::PoolConfig { max_concat: pool_concat, ..approx::PoolConfig::default() };
                return match approx::minimize_crpq_bruteforce(&u.disjuncts[0], k, config)? {
                    Some(q) => {
                        let text = serialize_query(&Ucrpq::single(q));
                        if json {
                            println!(
                                "{}",
                                json!({"command": "minimize", "outcome": "minimizable", "k": k, "query": text})
                            );
                        } else {
                            println!("minimizable to {k} atoms:");
                            print!("{text}");
                        }
                        Ok(0)
                    }
                    None => {
                        if json {
                            println!(
                                "{}",
                                json!({"command": "minimize", "outcome": "not_within_bounds", "k": k, "note": "pool-relative"})
                            );
                        } else {
                            println!("no equivalent {k}-atom query found (pool-relative)");
                        }
                        Ok(2)
                    }
                };
            }
            match approx::minimize_ucrpq_mode(&u, k, parse_mode(&mode, max_len)?)? {
                approx::MinimizeOutcome::Minimizable(delta) => {
                    let text = serialize_query(&delta);
                    if json {
                        println!(
                            "{}",
                            json!({"command": "minimize", "outcome": "minimizable", "k": k, "query": text})
                        );
                    } else {
                        println!("minimizable to {k} atoms per disjunct:");
                        print!("{text}");
                    }
                    Ok(0)
                }
                approx::MinimizeOutcome::NotMinimizable(cex) => {
                    let alphabet = u.alphabet();
                    let ws: Vec<String> =
                        cex.expansion.words.iter().map(|w| word_text(w, alphabet)).collect();
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "minimize", "outcome": "not_minimizable", "k": k,
                                "counterexample_words": words_value(&cex.expansion.words, alphabet),
                            })
                        );
                    } else {
                        println!(
                            "not minimizable to {k} atoms; separating expansion [{}]",
                            ws.join(", ")
                        );
                    }
                    Ok(1)
                }
                approx::MinimizeOutcome::NotWithinBounds(m) => {
                    if json {
                        println!(
                            "{}",
                            json!({"command": "minimize", "outcome": "not_within_bounds", "k": k, "m": m})
                        );
                    } else {
                        println!("undecided within refinement length {m}");
                    }
                    Ok(2)
                }
            }
        }

        Cmd::EncodeTp { input, out, alphabet } => {
            let text = read(&input)?;
            let mut letters: Vec<String> = text
                .lines()
                .filter_map(|l| {
                    let body =
                        l.trim().trim_start_matches("-> ").trim_start_matches("=> ").trim();
                    if body.is_empty() || body == "*" {
                        None
                    } else {
                        Some(body.to_string())
                    }
                })
                .collect();
            if let Some(extra) = alphabet {
                letters.extend(extra.split(',').map(|s| s.trim().to_string()));
            }
            letters.sort();
            letters.dedup();
            let ab = Alphabet::new(letters);
            let pattern = treepat::parse_tree_pattern(&text, &ab)?;
            let q = treepat::encode(&pattern)?;
            let out_text = serialize_query(&Ucrpq::single(q));
            match &out {
                Some(p) => fs::write(p, &out_text)
                    .map_err(|e| LibError::Input(format!("cannot write {}: {e}", p.display())))?,
                None => {
                    if !json {
                        print!("{out_text}");
                    }
                }
            }
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "encode-tp",
                        "out": out.map(|p| p.display().to_string()),
                        "query": out_text,
                    })
                );
            }
            Ok(0)
        }

        Cmd::DecodeTp { input, out } => {
            let u = load_query(&input)?;
            if u.disjuncts.len() != 1 {
                return Err(LibError::Input("decode works on a single query".into()));
            }
            match treepat::decode(&u.disjuncts[0]) {
                Ok(pattern) => {
                    let text = format!("{pattern}");
                    match &out {
                        Some(p) => fs::write(p, &text).map_err(|e| {
                            LibError::Input(format!("cannot write {}: {e}", p.display()))
                        })?,
                        None => {
                            if !json {
                                print!("{text}");
                            }
                        }
                    }
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "decode-tp",
                                "out": out.map(|p| p.display().to_string()),
                                "pattern": text,
                                "not_in_image": null,
                            })
                        );
                    }
                    Ok(0)
                }
                Err(LibError::Fragment(msg)) => {
                    if json {
                        println!(
                            "{}",
                            json!({"command": "decode-tp", "out": null, "pattern": null, "not_in_image": msg})
                        );
                    } else {
                        println!("not in the encoding image: {msg}");
                    }
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
    }
}
