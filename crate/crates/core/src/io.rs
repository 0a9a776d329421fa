//! Reading and writing the CSV and JSON files exchanged with other tools.
//!
//! Floating point values are written in Rust's shortest round-trip form, so
//! identical inputs always produce identical bytes.

use std::io::{Read, Write};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::analysis::{linearize_site, SimilarityResult, ViolationResult};
use crate::counts::{CountsMetadata, CountsRecord, ModeInfo};
use crate::error::WalkError;
use crate::lattice::{LatticeExtent, Site};
use crate::single::PositionDistribution;
use crate::two_photon::PositionPairDistribution;

/// Failure while reading or writing data files.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn extent_json(e: &LatticeExtent) -> Value {
    json!({
        "m_min": e.m_min,
        "m_max": e.m_max,
        "n_min": e.n_min,
        "n_max": e.n_max,
    })
}

fn finish_json<W: Write>(mut w: W, value: &Value) -> IoResult<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// `m,n,p` rows in `(n, m)` order.
pub fn write_distribution_csv<W: Write>(dist: &PositionDistribution<f64>, w: W) -> IoResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["m", "n", "p"])?;
    for (s, p) in dist.iter() {
        wr.write_record([s.m.to_string(), s.n.to_string(), p.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// `{ "step", "extent", "total", "cells": [{m, n, p}] }`.
pub fn distribution_json(dist: &PositionDistribution<f64>, step: usize) -> Value {
    let cells: Vec<Value> = dist
        .iter()
        .map(|(s, p)| json!({"m": s.m, "n": s.n, "p": p}))
        .collect();
    json!({
        "step": step,
        "extent": extent_json(dist.extent()),
        "total": dist.total(),
        "cells": cells,
    })
}

pub fn write_distribution_json<W: Write>(
    dist: &PositionDistribution<f64>,
    step: usize,
    w: W,
) -> IoResult<()> {
    finish_json(w, &distribution_json(dist, step))
}

/// `m1,n1,m2,n2,p` rows, with a `std_error` column when errors are given.
/// Zero cells are skipped.
pub fn write_pair_csv<W: Write>(
    dist: &PositionPairDistribution<f64>,
    std_errors: Option<&[f64]>,
    w: W,
) -> IoResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["m1", "n1", "m2", "n2", "p"];
    if std_errors.is_some() {
        header.push("std_error");
    }
    wr.write_record(&header)?;
    for (k, (r1, r2, p)) in dist.iter().enumerate() {
        let err = std_errors.map(|e| e[k]);
        if p == 0.0 && err.is_none_or(|e| e == 0.0) {
            continue;
        }
        let mut row = vec![
            r1.m.to_string(),
            r1.n.to_string(),
            r2.m.to_string(),
            r2.n.to_string(),
            p.to_string(),
        ];
        if let Some(e) = err {
            row.push(e.to_string());
        }
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads `m1,n1,m2,n2,p` rows into a distribution over the smallest
/// extent holding every listed site, or over `extent` when given.
pub fn read_pair_csv<R: Read>(
    r: R,
    extent: Option<LatticeExtent>,
) -> IoResult<PositionPairDistribution<f64>> {
    #[derive(Deserialize)]
    struct Row {
        m1: i32,
        n1: i32,
        m2: i32,
        n2: i32,
        p: f64,
    }
    let mut rows = Vec::new();
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    for rec in rd.deserialize() {
        let row: Row = rec?;
        rows.push((Site::new(row.m1, row.n1), Site::new(row.m2, row.n2), row.p));
    }
    let extent = match extent {
        Some(e) => e,
        None => LatticeExtent::bounding(rows.iter().flat_map(|(a, b, _)| [*a, *b])).ok_or(
            IoError::Format {
                line: 1,
                message: "no rows".into(),
            },
        )?,
    };
    Ok(PositionPairDistribution::from_entries(extent, rows)?)
}

/// Dense symmetric matrix over the `7 × 7` display window as `l1,l2,p`
/// rows with `l = m + 7n`; sites outside the window are dropped.
pub fn write_linearized_csv<W: Write>(dist: &PositionPairDistribution<f64>, w: W) -> IoResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["l1", "l2", "p"])?;
    let mut rows = Vec::new();
    for (r1, r2, p) in dist.iter() {
        let (Ok(l1), Ok(l2)) = (linearize_site(r1.m, r1.n), linearize_site(r2.m, r2.n)) else {
            continue;
        };
        rows.push((l1, l2, p));
        if l1 != l2 {
            rows.push((l2, l1, p));
        }
    }
    rows.sort_by_key(|&(a, b, _)| (a, b));
    for (l1, l2, p) in rows {
        wr.write_record([l1.to_string(), l2.to_string(), p.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Violation report: one object per unordered pair of distinct sites.
/// When `eligible_only` is set, ineligible pairs are left out.
pub fn violation_json(result: &ViolationResult, eligible_only: bool) -> Value {
    let entries: Vec<Value> = result
        .entries
        .iter()
        .filter(|e| e.eligible || !eligible_only)
        .map(|e| {
            json!({
                "r1": [e.r1.m, e.r1.n],
                "r2": [e.r2.m, e.r2.n],
                "V": e.v,
                "sigma": e.sigma,
                "V_over_sigma": e.significance(),
                "eligible": e.eligible,
            })
        })
        .collect();
    Value::Array(entries)
}

pub fn write_violation_json<W: Write>(
    result: &ViolationResult,
    eligible_only: bool,
    w: W,
) -> IoResult<()> {
    finish_json(w, &violation_json(result, eligible_only))
}

/// `{ "step", "value", "std_error" }`.
pub fn similarity_json(step: usize, result: &SimilarityResult) -> Value {
    json!({
        "step": step,
        "value": result.value,
        "std_error": result.std_error,
    })
}

/// Reads `m1,n1,m2,n2,counts` coincidence rows.
pub fn read_coincidences_csv<R: Read>(r: R) -> IoResult<Vec<(Site, Site, u64)>> {
    #[derive(Deserialize)]
    struct Row {
        m1: i32,
        n1: i32,
        m2: i32,
        n2: i32,
        counts: u64,
    }
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let row: Row = rec?;
        out.push((
            Site::new(row.m1, row.n1),
            Site::new(row.m2, row.n2),
            row.counts,
        ));
    }
    Ok(out)
}

/// Reads `m,n,singles_hz,efficiency` channel rows.
pub fn read_modes_csv<R: Read>(r: R) -> IoResult<Vec<(Site, ModeInfo)>> {
    #[derive(Deserialize)]
    struct Row {
        m: i32,
        n: i32,
        singles_hz: f64,
        efficiency: f64,
    }
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for (k, rec) in rd.deserialize().enumerate() {
        let row: Row = rec?;
        let site = Site::new(row.m, row.n);
        if out.iter().any(|(s, _)| *s == site) {
            return Err(IoError::Format {
                line: k as u64 + 2,
                message: format!("duplicate channel for site {site}"),
            });
        }
        out.push((
            site,
            ModeInfo {
                singles_hz: row.singles_hz,
                efficiency: row.efficiency,
            },
        ));
    }
    Ok(out)
}

/// Assembles a record from the three input files.
pub fn read_counts_record<A: Read, B: Read, C: Read>(
    coincidences: A,
    modes: B,
    metadata: C,
) -> IoResult<CountsRecord> {
    let meta: CountsMetadata = serde_json::from_reader(metadata)?;
    let mut rec = CountsRecord::new(meta);
    for (site, info) in read_modes_csv(modes)? {
        rec.modes.insert(site, info);
    }
    for (r1, r2, c) in read_coincidences_csv(coincidences)? {
        rec.add_coincidences(r1, r2, c);
    }
    rec.validate()?;
    Ok(rec)
}

/// Writes a record as the three input files.
pub fn write_counts_record<A: Write, B: Write, C: Write>(
    rec: &CountsRecord,
    coincidences: A,
    modes: B,
    metadata: C,
) -> IoResult<()> {
    let mut wr = csv::Writer::from_writer(coincidences);
    wr.write_record(["m1", "n1", "m2", "n2", "counts"])?;
    for (&(r1, r2), &c) in &rec.coincidences {
        wr.write_record([
            r1.m.to_string(),
            r1.n.to_string(),
            r2.m.to_string(),
            r2.n.to_string(),
            c.to_string(),
        ])?;
    }
    wr.flush()?;
    let mut wr = csv::Writer::from_writer(modes);
    wr.write_record(["m", "n", "singles_hz", "efficiency"])?;
    for (s, info) in &rec.modes {
        wr.write_record([
            s.m.to_string(),
            s.n.to_string(),
            info.singles_hz.to_string(),
            info.efficiency.to_string(),
        ])?;
    }
    wr.flush()?;
    finish_json(metadata, &serde_json::to_value(rec.metadata)?)
}
