//! Executes the configured tasks in a fixed order and assembles one
//! deterministic report plus optional CSV trace files.
//!
//! Determinism contract: identical config bytes, seed, and artifact
//! version produce byte-identical outputs.  All maps are ordered, exact
//! rationals serialize as `num/den` strings, floats as fixed-width
//! scientific notation, and nothing records wall-clock time or absolute
//! paths.

use crate::config::{ExperimentConfig, Task};
use crate::CliError;
use latlab_core::affine::SubgroupTag;
use latlab_core::covolume::{bounded_index_increment_check, gamma_trace, serre_covolume};
use latlab_core::lattice::{
    classify, commensurable, covolume, pseudo_unipotent_check, unipotent_witnesses,
    LatticeSpec,
};
use latlab_core::rational::{format_rat, Rat};
use latlab_core::spectral::{
    build_homspace_capped, escape_of_mass_trace, folner_vector, orbit_spectrum,
    strong_ergodicity_bound, CertificateLevel,
};
use latlab_core::truncation::{build_truncation_capped, fundamental_domain, verify_tiling};
use latlab_core::Error as CoreError;
use num::BigUint;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Everything a run produced, with the bytes retained so callers can
/// verify determinism without re-reading the filesystem.
#[derive(Debug)]
pub struct RunOutcome {
    pub report_path: PathBuf,
    pub report_bytes: Vec<u8>,
    /// Trace files as `(path, bytes)`.
    pub trace_files: Vec<(PathBuf, Vec<u8>)>,
}

fn vr(r: &Rat) -> Value {
    Value::String(format_rat(r))
}

fn vf(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

fn vu(n: u128) -> Value {
    Value::String(n.to_string())
}

fn vbig(b: &BigUint) -> Value {
    Value::String(b.to_string())
}

fn cert_label(level: CertificateLevel) -> &'static str {
    match level {
        CertificateLevel::Exhaustive => "exhaustive",
        CertificateLevel::Heuristic => "heuristic",
    }
}

fn elem_str(e: latlab_core::affine::AffElem) -> String {
    format!(
        "({},{})",
        e.translation_part().index(),
        e.multiplier().index()
    )
}

/// Point count of the quotient at level `k` for a given lattice: `q` per
/// twisted coordinate, `q - 1` per translational one.
fn cell_points(spec: &LatticeSpec, k: i64) -> u128 {
    let mut p: u128 = 1;
    for n in 0..=(k as usize) {
        let q = spec.seq().value(n) as u128;
        p *= if spec.mark(n) { q } else { q - 1 };
    }
    p
}

/// Head order `prod q(q-1)` through level `k`.
fn head_order(cfg: &ExperimentConfig, k: i64) -> u128 {
    let mut p: u128 = 1;
    for n in 0..=(k as usize) {
        let q = cfg.seq.value(n) as u128;
        p *= q * (q - 1);
    }
    p
}

#[derive(Clone, Debug)]
struct Cell {
    name: String,
    m: i64,
    k: i64,
    points: u128,
    admissible: bool,
}

fn spectral_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut ms = cfg.m_probes.clone();
    ms.sort_unstable();
    ms.dedup();
    let mut cells = Vec::new();
    for (name, spec) in &cfg.lattices {
        for &m in &ms {
            for k in (m + 1)..=cfg.k_max {
                let points = cell_points(spec, k);
                cells.push(Cell {
                    name: name.clone(),
                    m,
                    k,
                    points,
                    admissible: points <= cfg.point_cap,
                });
            }
        }
    }
    cells
}

fn skipped_row(cell: &Cell, reason: &str) -> Value {
    json!({
        "lattice": cell.name,
        "m": cell.m,
        "k": cell.k,
        "points": vu(cell.points),
        "skipped": reason,
    })
}

fn classify_task(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let mut out = Map::new();
    for (name, spec) in &cfg.lattices {
        let c = classify(spec);
        let enclosure = covolume(spec, cfg.k_max).map_err(CliError::from_core)?;
        out.insert(
            name.clone(),
            json!({
                "certificate": "exact",
                "kind": if c.uniform { "UniformLattice" } else { "NonUniformLattice" },
                "uniform": c.uniform,
                "tail": c.tail.label(),
                "twisted_head": c.twisted_head,
                "finite_sequence": c.finite_sequence,
                "covolume_upper_bound": vr(&enclosure.hi),
            }),
        );
    }
    Ok(Value::Object(out))
}

fn covolume_task(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let mut out = Map::new();
    for (name, spec) in &cfg.lattices {
        let mut partials = Vec::new();
        for k in 0..=cfg.k_max {
            partials.push(vr(&covolume(spec, k).map_err(CliError::from_core)?.partial));
        }
        let enc = covolume(spec, cfg.k_max).map_err(CliError::from_core)?;
        let width = &enc.hi - &enc.lo;
        // Second route: the volume of a fundamental domain for the head
        // acting on the open tail, computed cell by cell.
        let domain = match build_truncation_capped(&cfg.seq, cfg.k_max, cfg.head_cap) {
            Ok(model) => {
                let tags = spec.tags_through(cfg.k_max);
                let dom = fundamental_domain(&model, &tags).map_err(CliError::from_core)?;
                let tiling = verify_tiling(&model, &tags, &dom).map_err(CliError::from_core)?;
                json!({
                    "volume": vr(dom.volume()),
                    "matches_partial": dom.volume() == &enc.partial,
                    "tiling_exact": tiling.per_coordinate_exact,
                    "product_swept": tiling.product_checked,
                })
            }
            Err(CoreError::HeadCap { order, cap }) => json!({
                "skipped": format!("head order {order} exceeds cap {cap}"),
            }),
            Err(other) => return Err(CliError::from_core(other)),
        };
        out.insert(
            name.clone(),
            json!({
                "certificate": "exact",
                "level": enc.level,
                "factors": enc.factors.iter().map(vr).collect::<Vec<_>>(),
                "partials": partials,
                "partial": vr(&enc.partial),
                "tail_upper": vr(&enc.tail_upper),
                "lo": vr(&enc.lo),
                "hi": vr(&enc.hi),
                "width": vr(&width),
                "domain_route": domain,
            }),
        );
    }
    Ok(Value::Object(out))
}

fn gamma_task(
    cfg: &ExperimentConfig,
    traces: &mut Vec<(String, Vec<u8>)>,
) -> Result<Value, CliError> {
    let mut out = Map::new();
    for (name, spec) in &cfg.lattices {
        let trace = gamma_trace(spec, cfg.k_max).map_err(CliError::from_core)?;
        let inc = bounded_index_increment_check(&trace);
        out.insert(
            name.clone(),
            json!({
                "certificate": "exact",
                "gammas": trace.gammas.iter().map(vr).collect::<Vec<_>>(),
                "alphas": trace.alphas,
                "betas": trace.betas,
                "sup_beta": trace.sup_beta,
                "increment_floor": trace.increment_floor.as_ref().map(vr),
                "relation_exact": trace.relation_exact,
                "monotone": trace.monotone,
                "alpha_le_beta": trace.alpha_le_beta,
                "stabilization_level": trace.stabilization_level,
                "cocompact_certified": trace.cocompact_certified,
                "increments": inc.increments.iter().map(vr).collect::<Vec<_>>(),
                "strict_increases": inc.strict_increases,
                "all_above_floor": inc.all_above_floor,
            }),
        );
        if cfg.traces_dir.is_some() {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["level", "gamma", "alpha", "beta"])
                .map_err(|e| CliError::internal(e.to_string()))?;
            for (lvl, g) in trace.gammas.iter().enumerate() {
                let alpha = trace
                    .alphas
                    .get(lvl)
                    .map(|a| a.to_string())
                    .unwrap_or_default();
                let beta = trace
                    .betas
                    .get(lvl)
                    .map(|b| b.to_string())
                    .unwrap_or_default();
                w.write_record([lvl.to_string(), format_rat(g), alpha, beta])
                    .map_err(|e| CliError::internal(e.to_string()))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::internal(e.to_string()))?;
            traces.push((format!("gamma_{name}.csv"), bytes));
        }
    }
    Ok(Value::Object(out))
}

fn commensurate_task(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let names: Vec<&String> = cfg.lattices.keys().collect();
    let mut rows = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            let a = &cfg.lattices[names[i]];
            let b = &cfg.lattices[names[j]];
            let rep = commensurable(a, b, cfg.k_max).map_err(CliError::from_core)?;
            rows.push(json!({
                "certificate": "exact",
                "left": names[i],
                "right": names[j],
                "same_tail": rep.same_tail,
                "commensurable": rep.commensurable,
                "diff_coordinates": rep.diff_coordinates,
                "last_listed_diff": rep.last_listed_diff,
                "left_trace": rep.left_trace.iter().map(vbig).collect::<Vec<_>>(),
                "right_trace": rep.right_trace.iter().map(vbig).collect::<Vec<_>>(),
                "traces_stabilize": rep.traces_stabilize,
                "stabilization_level": rep.stabilization_level,
                "tail_grows": rep.tail_grows,
                "bounded_within_horizon": rep.bounded_within_horizon,
            }));
        }
    }
    Ok(Value::Array(rows))
}

fn serre_task(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    // Largest level whose head fits both the configured cap and the
    // enumeration budget of the double-coset sweep.
    let budget = cfg.head_cap.min(latlab_core::truncation::ENUMERATION_BUDGET);
    let mut level = None;
    for k in 0..=cfg.k_max {
        if head_order(cfg, k) <= budget {
            level = Some(k);
        }
    }
    let level = match level {
        Some(k) => k,
        None => {
            return Ok(json!({
                "skipped": format!("no head level fits the budget {budget}"),
            }))
        }
    };
    let model =
        build_truncation_capped(&cfg.seq, level, cfg.head_cap).map_err(CliError::from_core)?;
    let k_tags = vec![SubgroupTag::Units; (level + 1) as usize];
    let entries: Vec<(String, LatticeSpec)> = cfg
        .lattices
        .iter()
        .map(|(n, s)| (n.clone(), s.clone()))
        .collect();
    let computed: Vec<Result<(String, Value), CliError>> = entries
        .par_iter()
        .map(|(name, spec)| {
            let h_tags = spec.tags_through(level);
            let rep =
                serre_covolume(&model, &k_tags, &h_tags).map_err(CliError::from_core)?;
            let rows: Vec<Value> = rep
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "rep_index": vu(r.rep_index),
                        "size": vu(r.size),
                        "fixer_order": vu(r.fixer_order),
                        "fixer_volume": vr(&r.fixer_volume),
                        "contribution": vr(&r.contribution),
                    })
                })
                .collect();
            Ok((
                name.clone(),
                json!({
                    "certificate": "exact",
                    "level": level,
                    "group_order": vu(rep.group_order),
                    "open_order": vu(rep.k_order),
                    "lattice_order": vu(rep.h_order),
                    "meet_order": vu(rep.k_meet_h_order),
                    "rows": rows,
                    "covolume": vr(&rep.covolume),
                    "oracle": vr(&rep.oracle),
                    "partition_exact": rep.partition_exact,
                    "agrees": rep.agrees,
                }),
            ))
        })
        .collect();
    let mut out = Map::new();
    for item in computed {
        let (name, value) = item?;
        out.insert(name, value);
    }
    Ok(Value::Object(out))
}

fn spectrum_task(
    cfg: &ExperimentConfig,
    traces: &mut Vec<(String, Vec<u8>)>,
) -> Result<Value, CliError> {
    let cells = spectral_cells(cfg);
    let computed: Vec<Result<Value, CliError>> = cells
        .par_iter()
        .map(|cell| {
            if !cell.admissible {
                return Ok(skipped_row(
                    cell,
                    &format!("point count exceeds cap {}", cfg.point_cap),
                ));
            }
            let spec = &cfg.lattices[&cell.name];
            let space = build_homspace_capped(spec, cell.m, cell.k, cfg.point_cap)
                .map_err(CliError::from_core)?;
            let rep = orbit_spectrum(&space).map_err(CliError::from_core)?;
            Ok(json!({
                // Intransitive cells carry an exact invariant witness; a
                // transitive cell's gap is a floating-point estimate.
                "certificate": if rep.witness.is_some() { "exact" } else { "heuristic" },
                "lattice": cell.name,
                "m": cell.m,
                "k": cell.k,
                "points": vu(cell.points),
                "orbit_count": rep.orbit_count,
                "invariant_dimension": rep.inv_dim,
                "orbit_sizes": rep.orbit_sizes,
                "generates": rep.generates,
                "gap": vf(rep.gap),
                "lambda_mean_zero": vf(rep.lambda_mean_zero),
                "iterations": rep.iterations,
                "residual": vf(rep.residual),
                "witness_present": rep.witness.is_some(),
                "witness_invariant": rep.witness_invariant,
                "probe_set_size": rep.probe_set_size,
            }))
        })
        .collect();
    let rows: Vec<Value> = computed.into_iter().collect::<Result<_, _>>()?;

    // Escape-of-mass tables accompany the spectrum: for each probe level,
    // the mass of the level-m core in each admissible quotient.
    let mut ms = cfg.m_probes.clone();
    ms.sort_unstable();
    ms.dedup();
    let mut escape_rows = Vec::new();
    for (name, spec) in &cfg.lattices {
        for &m in &ms {
            let ks: Vec<i64> = ((m + 1)..=cfg.k_max)
                .filter(|&k| cell_points(spec, k) <= cfg.point_cap)
                .collect();
            if ks.is_empty() {
                continue;
            }
            let table = escape_of_mass_trace(spec, m, &ks, cfg.point_cap)
                .map_err(CliError::from_core)?;
            for row in &table {
                escape_rows.push(json!({
                    "certificate": "exact",
                    "lattice": name,
                    "m": m,
                    "k": row.k,
                    "points": row.points,
                    "orbit_count": row.orbit_count,
                    "core_mass": vr(&row.core_mass),
                    "gamma_ratio": vr(&row.gamma_ratio),
                    "routes_agree": row.routes_agree,
                }));
            }
            if cfg.traces_dir.is_some() {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["m", "k", "points", "core_mass", "gamma_ratio", "orbit_count"])
                    .map_err(|e| CliError::internal(e.to_string()))?;
                for row in &table {
                    w.write_record([
                        m.to_string(),
                        row.k.to_string(),
                        row.points.to_string(),
                        format_rat(&row.core_mass),
                        format_rat(&row.gamma_ratio),
                        row.orbit_count.to_string(),
                    ])
                    .map_err(|e| CliError::internal(e.to_string()))?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| CliError::internal(e.to_string()))?;
                traces.push((format!("escape_{name}_m{m}.csv"), bytes));
            }
        }
    }

    if cfg.traces_dir.is_some() {
        for (name, _) in &cfg.lattices {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["m", "k", "points", "orbit_count", "gap", "status"])
                .map_err(|e| CliError::internal(e.to_string()))?;
            for row in rows.iter().filter(|r| r["lattice"] == *name) {
                let skipped = row.get("skipped").and_then(|s| s.as_str());
                w.write_record([
                    row["m"].to_string(),
                    row["k"].to_string(),
                    row["points"].as_str().unwrap_or_default().to_string(),
                    row.get("orbit_count")
                        .and_then(|v| v.as_u64())
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                    row.get("gap")
                        .and_then(|v| v.as_str())
                        .unwrap_or_default()
                        .to_string(),
                    skipped.unwrap_or("ok").to_string(),
                ])
                .map_err(|e| CliError::internal(e.to_string()))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::internal(e.to_string()))?;
            traces.push((format!("gaps_{name}.csv"), bytes));
        }
    }

    Ok(json!({ "cells": rows, "escape": escape_rows }))
}

fn folner_task(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let cells = spectral_cells(cfg);
    let computed: Vec<Result<Value, CliError>> = cells
        .par_iter()
        .map(|cell| {
            if !cell.admissible {
                return Ok(skipped_row(
                    cell,
                    &format!("point count exceeds cap {}", cfg.point_cap),
                ));
            }
            let spec = &cfg.lattices[&cell.name];
            let space = build_homspace_capped(spec, cell.m, cell.k, cfg.point_cap)
                .map_err(CliError::from_core)?;
            match folner_vector(&space, cell.m, None) {
                Ok(w) => {
                    let defects: Vec<Value> = w
                        .defects
                        .iter()
                        .map(|d| {
                            json!({
                                "probe": d.probe,
                                "coordinate": d.coordinate,
                                "in_window": d.in_folner_group,
                                "defect": vf(d.defect),
                                "transfer_bound": vr(&d.transfer_bound),
                                "exactly_zero": d.exactly_zero,
                            })
                        })
                        .collect();
                    Ok(json!({
                        "certificate": "exact",
                        "lattice": cell.name,
                        "m": cell.m,
                        "k": cell.k,
                        "points": vu(cell.points),
                        "window_level": w.j,
                        "window_volume": vr(&w.window_volume),
                        "core_size": w.core_size,
                        "core_mass": vr(&w.core_mass),
                        "target_mass": vr(&w.target_mass),
                        "ell1": vr(&w.ell1),
                        "norm2": vf(w.norm2),
                        "support_off_core": w.support_off_core,
                        "off_core_inner": vf(w.off_core_inner),
                        "off_core_mass": vr(&w.off_core_mass),
                        "defects": defects,
                    }))
                }
                Err(CoreError::DegenerateTarget) => Ok(skipped_row(
                    cell,
                    "window orbit covers the whole quotient (nothing escapes)",
                )),
                Err(other) => Err(CliError::from_core(other)),
            }
        })
        .collect();
    let rows: Vec<Value> = computed.into_iter().collect::<Result<_, _>>()?;
    Ok(Value::Array(rows))
}

fn ergodicity_task(cfg: &ExperimentConfig, seed: u64) -> Result<Value, CliError> {
    let cells = spectral_cells(cfg);
    let computed: Vec<Result<Value, CliError>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            if !cell.admissible {
                return Ok(skipped_row(
                    cell,
                    &format!("point count exceeds cap {}", cfg.point_cap),
                ));
            }
            let spec = &cfg.lattices[&cell.name];
            let space = build_homspace_capped(spec, cell.m, cell.k, cfg.point_cap)
                .map_err(CliError::from_core)?;
            let cell_seed = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let b = strong_ergodicity_bound(&space, cell_seed).map_err(CliError::from_core)?;
            Ok(json!({
                "lattice": cell.name,
                "m": cell.m,
                "k": cell.k,
                "points": vu(cell.points),
                "window_level": b.j,
                "window_core_mass": vr(&b.core_mass),
                "window_volume": vr(&b.mu_k),
                "delta": vr(&b.delta),
                "threshold": vr(&b.threshold),
                "balanced_size": b.balanced_size,
                "odd_flagged": b.odd_flagged,
                "certificate": cert_label(b.certificate),
                "candidates": b.candidates,
                "full_checks": b.full_checks,
                "min_defect": vr(&b.min_defect),
                "satisfied": b.satisfied,
            }))
        })
        .collect();
    let rows: Vec<Value> = computed.into_iter().collect::<Result<_, _>>()?;
    Ok(Value::Array(rows))
}

fn witnesses_task(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let mut out = Map::new();
    for (name, spec) in &cfg.lattices {
        let twisted = spec.twisted_coordinates();
        if classify(spec).uniform {
            out.insert(
                name.clone(),
                json!({ "skipped": "uniform lattice: no unipotent approximation" }),
            );
            continue;
        }
        let list = unipotent_witnesses(spec, twisted.len()).map_err(CliError::from_core)?;
        let rows: Vec<Value> = list
            .iter()
            .map(|w| {
                json!({
                    "coordinate": w.coordinate,
                    "q": w.q,
                    "generator_index": w.generator_index,
                    "gamma": elem_str(w.gamma),
                    "conjugator": elem_str(w.conjugator),
                    "conjugate": elem_str(w.conjugate),
                })
            })
            .collect();
        let pseudo = pseudo_unipotent_check(spec).map_err(CliError::from_core)?;
        out.insert(
            name.clone(),
            json!({
                "certificate": "exact",
                "witnesses": rows,
                "pseudo_unipotent": {
                    "coordinate": pseudo.coordinate,
                    "q": pseudo.q,
                    "class_size": pseudo.class_size,
                    "identity_excluded": pseudo.identity_excluded,
                    "multiplier_locked": pseudo.multiplier_locked,
                    "meets_units": pseudo.meets_units,
                },
            }),
        );
    }
    Ok(Value::Object(out))
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn execute_tasks(
    cfg: &ExperimentConfig,
    seed: u64,
    traces: &mut Vec<(String, Vec<u8>)>,
) -> Result<Map<String, Value>, CliError> {
    let mut out = Map::new();
    for &task in &cfg.tasks {
        let value = match task {
            Task::Classify => classify_task(cfg)?,
            Task::Covolume => covolume_task(cfg)?,
            Task::Gamma => gamma_task(cfg, traces)?,
            Task::Commensurate => commensurate_task(cfg)?,
            Task::Serre => serre_task(cfg)?,
            Task::Spectrum => spectrum_task(cfg, traces)?,
            Task::Folner => folner_task(cfg)?,
            Task::Ergodicity => ergodicity_task(cfg, seed)?,
            Task::Witnesses => witnesses_task(cfg)?,
        };
        out.insert(task.name().to_string(), value);
    }
    Ok(out)
}

/// Runs every configured task and writes the report (and traces) under
/// `out_dir`.
pub fn run_config(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    jobs: Option<usize>,
    seed: u64,
) -> Result<RunOutcome, CliError> {
    let mut traces: Vec<(String, Vec<u8>)> = Vec::new();
    let tasks = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::internal(format!("thread pool: {e}")))?;
            pool.install(|| execute_tasks(cfg, seed, &mut traces))?
        }
        None => execute_tasks(cfg, seed, &mut traces)?,
    };

    let report = json!({
        "artifact": "latlab",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config_sha256": sha256_hex(cfg.raw.as_bytes()),
        "sequence": {
            "q": cfg.q_values,
            "tail": cfg.tail_label,
        },
        "k_max": cfg.k_max,
        "m_probes": cfg.m_probes,
        "caps": {
            "head_size": vu(cfg.head_cap),
            "points": vu(cfg.point_cap),
        },
        "lattices": cfg.lattice_labels,
        "tasks": tasks,
    });
    let mut report_bytes = serde_json::to_vec_pretty(&report)
        .map_err(|e| CliError::internal(format!("serialize report: {e}")))?;
    report_bytes.push(b'\n');

    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join(&cfg.report_name);
    if let Some(parent) = report_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&report_path, &report_bytes)?;

    let mut trace_files = Vec::new();
    if let Some(dir) = &cfg.traces_dir {
        let trace_dir = out_dir.join(dir);
        std::fs::create_dir_all(&trace_dir)?;
        for (name, bytes) in traces {
            let path = trace_dir.join(&name);
            std::fs::write(&path, &bytes)?;
            trace_files.push((path, bytes));
        }
    }

    Ok(RunOutcome {
        report_path,
        report_bytes,
        trace_files,
    })
}
