//! One function per subcommand. Every output file is a pure function of the
//! flags, so reruns reproduce it byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qwalk_core::analysis::violation_map;
use qwalk_core::counts::{
    compare_to_theory, synthesize_counts, violation_report, CountsMetadata, SynthesisConfig,
    DEFAULT_SELECTION_FACTOR,
};
use qwalk_core::io::{self as qio, IoError, IoResult};
use qwalk_core::optics::{geometry_report, loss_budget, BeamSpec, LayoutSpec, LossBudget};
use qwalk_core::single::step_series;
use qwalk_core::two_photon::{
    hom_closed_form, hom_scan, hom_surface, run_two_photon, TwoPhotonRun,
};
use qwalk_core::{correct_counts, CountsRecord, InitialStateSpec, ViolationResult};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{self, bootstrap, model, out_path};
use crate::error::{CliError, CliResult};
use crate::{BootArgs, CountsArgs, GeometryArgs, HomArgs, SynthArgs, WalkArgs};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

/// Writes `name` under `dir` through `body` and returns its path.
fn emit<F>(dir: &Path, name: &str, body: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> IoResult<()>,
{
    let path = out_path(dir, name)?;
    let mut w = create(&path)?;
    body(&mut w)
        .and_then(|_| w.flush().map_err(IoError::from))
        .map_err(|e| CliError::data(&path, e))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn emit_json(dir: &Path, name: &str, value: &Value) -> CliResult<PathBuf> {
    emit(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn photon_json(p: &InitialStateSpec<f64>) -> Value {
    json!({
        "site": [p.site.m, p.site.n],
        "up": [p.up.re, p.up.im],
        "down": [p.down.re, p.down.im],
    })
}

fn violation_summary(result: &ViolationResult) -> Value {
    let max = result.max();
    json!({
        "eligible_pairs": result.eligible().count(),
        "positive_pairs": result.positive_count(),
        "max_V": max.and_then(|e| e.v),
        "max_pair": max.map(|e| [[e.r1.m, e.r1.n], [e.r2.m, e.r2.n]]),
    })
}

fn theory_run(walk: &WalkArgs, steps: usize) -> CliResult<TwoPhotonRun<f64>> {
    let protocol = config::load_protocol(walk.protocol.as_deref())?;
    let (a, b) = config::photon_pair(&walk.photons)?;
    Ok(run_two_photon(&protocol, steps, &a, &b, model(walk.c0)?)?)
}

/// `step_T.csv` and `step_T.json` for every step `0..=steps`.
pub fn simulate(walk: &WalkArgs, out: &Path) -> CliResult<()> {
    let protocol = config::load_protocol(walk.protocol.as_deref())?;
    let photon = config::single_photon(&walk.photons)?;
    let series = step_series(&photon, &protocol, walk.steps)?;
    for (t, dist) in series.iter().enumerate() {
        emit(out, &format!("step_{t}.csv"), |w| {
            qio::write_distribution_csv(dist, w)
        })?;
        emit(out, &format!("step_{t}.json"), |w| {
            qio::write_distribution_json(dist, t, w)
        })?;
    }
    println!("simulated {} steps into {}", walk.steps, out.display());
    Ok(())
}

/// Pair distribution, linearized matrix and violation report for every step
/// `1..=steps`, plus a summary.
pub fn two_photon(walk: &WalkArgs, out: &Path) -> CliResult<()> {
    if walk.steps == 0 {
        return Err(CliError::Config(
            "two-photon runs need at least one step".into(),
        ));
    }
    let protocol = config::load_protocol(walk.protocol.as_deref())?;
    let (a, b) = config::photon_pair(&walk.photons)?;
    let m = model(walk.c0)?;
    let mut steps = Vec::new();
    for t in 1..=walk.steps {
        let run = run_two_photon(&protocol, t, &a, &b, m)?;
        let violation = violation_map(&run.positions, &run.modes);
        emit(out, &format!("step_{t}_pairs.csv"), |w| {
            qio::write_pair_csv(&run.positions, None, w)
        })?;
        emit(out, &format!("step_{t}_linearized.csv"), |w| {
            qio::write_linearized_csv(&run.positions, w)
        })?;
        emit(out, &format!("step_{t}_violation.json"), |w| {
            qio::write_violation_json(&violation, false, w)
        })?;
        let outside: f64 = run
            .positions
            .iter()
            .filter(|(r1, r2, _)| {
                qwalk_core::linearize_site(r1.m, r1.n).is_err()
                    || qwalk_core::linearize_site(r2.m, r2.n).is_err()
            })
            .fold(0.0, |acc, (_, _, p)| acc + p);
        if outside > 0.0 {
            log::warn!("step {t}: probability {outside:e} lies outside the 7 x 7 display window");
        }
        let mut s = violation_summary(&violation);
        s["step"] = json!(t);
        s["total"] = json!(run.positions.total());
        s["outside_display"] = json!(outside);
        steps.push(s);
    }
    let summary = json!({
        "c0": walk.c0,
        "photons": [photon_json(&a), photon_json(&b)],
        "steps": steps,
    });
    emit_json(out, "summary.json", &summary)?;
    for s in &steps {
        println!(
            "step {}: {} eligible pairs, {} with V > 0, max V = {}",
            s["step"], s["eligible_pairs"], s["positive_pairs"], s["max_V"]
        );
    }
    Ok(())
}

fn read_counts(c: &CountsArgs) -> CliResult<CountsRecord> {
    let meta: CountsMetadata = serde_json::from_reader(open(&c.metadata)?)
        .map_err(|e| CliError::data(&c.metadata, e.into()))?;
    let mut rec = CountsRecord::new(meta);
    let modes = qio::read_modes_csv(open(&c.modes)?).map_err(|e| CliError::data(&c.modes, e))?;
    for (site, info) in modes {
        rec.modes.insert(site, info);
    }
    let coinc = qio::read_coincidences_csv(open(&c.coincidences)?)
        .map_err(|e| CliError::data(&c.coincidences, e))?;
    for (r1, r2, k) in coinc {
        rec.add_coincidences(r1, r2, k);
    }
    rec.validate()?;
    Ok(rec)
}

/// Violation witness of the theory, or of a counts record when one is given,
/// with eligibility from the theory coin-level distribution.
pub fn violation(
    walk: &WalkArgs,
    counts: Option<&CountsArgs>,
    boot: &BootArgs,
    out: &Path,
) -> CliResult<()> {
    let run = theory_run(walk, walk.steps)?;
    let result = match counts {
        Some(c) => violation_report(
            &read_counts(c)?,
            &run.modes,
            bootstrap(boot.n_boot, boot.seed)?,
        )?,
        None => violation_map(&run.positions, &run.modes),
    };
    emit(out, "violation.json", |w| {
        qio::write_violation_json(&result, false, w)
    })?;
    let s = violation_summary(&result);
    println!(
        "{} eligible pairs, {} with V > 0, max V = {}",
        s["eligible_pairs"], s["positive_pairs"], s["max_V"]
    );
    Ok(())
}

/// Bunching surface, closed-form comparison and delay scan.
pub fn hom(args: &HomArgs, out: &Path) -> CliResult<()> {
    if args.grid < 2 {
        return Err(CliError::Config(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    if args.scan_points < 2 {
        return Err(CliError::Config("scan needs at least 2 delays".into()));
    }
    let tau = std::f64::consts::TAU;
    let deltas: Vec<f64> = (0..args.grid)
        .map(|k| tau * k as f64 / (args.grid - 1) as f64)
        .collect();
    let surface = hom_surface::<f64>(&deltas, &deltas)?;
    let mut max_dev = 0.0f64;
    emit(out, "hom_surface.csv", |w| {
        writeln!(w, "delta1,delta2,p_bunch,closed_form")?;
        for (i, &d1) in deltas.iter().enumerate() {
            for (j, &d2) in deltas.iter().enumerate() {
                let closed = hom_closed_form(d1, d2);
                max_dev = max_dev.max((surface[i][j] - closed).abs());
                writeln!(w, "{d1},{d2},{},{closed}", surface[i][j])?;
            }
        }
        Ok(())
    })?;
    let span = args.scan_range * args.sigma;
    let delays: Vec<f64> = (0..args.scan_points)
        .map(|k| -span + 2.0 * span * k as f64 / (args.scan_points - 1) as f64)
        .collect();
    let scan = hom_scan(&delays, args.sigma, args.c0_max)?;
    emit(out, "hom_scan.csv", |w| {
        writeln!(w, "tau,c0,rate")?;
        for k in 0..delays.len() {
            writeln!(
                w,
                "{},{},{}",
                scan.delays[k], scan.overlaps[k], scan.rates[k]
            )?;
        }
        Ok(())
    })?;
    let pi = std::f64::consts::PI;
    let p_pi = qwalk_core::two_photon::hom_bunching::<f64>(pi, pi)?;
    let summary = json!({
        "grid": args.grid,
        "p_bunch_pi_pi": p_pi,
        "max_closed_form_deviation": max_dev,
        "scan": {
            "c0_max": args.c0_max,
            "sigma": args.sigma,
            "visibility": scan.visibility,
        },
    });
    emit_json(out, "hom.json", &summary)?;
    println!("P_b(pi, pi) = {p_pi}; visibility = {}", scan.visibility);
    println!("largest deviation from the closed form over the grid: {max_dev:e}");
    Ok(())
}

/// Layout file; every section falls back to the bench values.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    #[serde(default = "LayoutSpec::catalog")]
    layout: LayoutSpec<f64>,
    #[serde(default = "BeamSpec::catalog")]
    beam: BeamSpec<f64>,
    #[serde(default = "default_loss")]
    loss: LossBudget<f64>,
}

fn default_loss() -> LossBudget<f64> {
    LossBudget::plates(0.85, 12)
}

/// Derived optics quantities as JSON and a table on stdout.
pub fn geometry(args: &GeometryArgs, out: &Path) -> CliResult<()> {
    let file = match &args.layout {
        Some(p) => serde_json::from_reader(open(p)?).map_err(|e| CliError::data(p, e.into()))?,
        None => GeometryFile {
            layout: LayoutSpec::catalog(),
            beam: BeamSpec::catalog(),
            loss: default_loss(),
        },
    };
    let report = geometry_report(&file.layout, &file.beam)?;
    let loss = loss_budget(&file.loss)?;
    let value = json!({
        "layout": file.layout,
        "beam": file.beam,
        "report": report,
        "loss": loss,
    });
    emit_json(out, "geometry.json", &value)?;
    let pass = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let rows = [
        ("W1 (mm)", format!("{:.4}", report.w1 * 1e3), ""),
        ("d1 (mm)", format!("{:.4}", report.d1 * 1e3), ""),
        ("W2 (mm)", format!("{:.4}", report.collimation.w2 * 1e3), ""),
        (
            "theta2 (rad)",
            format!("{:.4e}", report.collimation.theta2),
            "",
        ),
        (
            "collimation",
            format!("{:.3e} z_R ratio", report.collimation.rayleigh_ratio),
            pass(!report.collimation.warning),
        ),
        (
            "delta_theta (rad)",
            format!("{:.4e}", report.angular.delta_theta),
            "",
        ),
        (
            "paraxial",
            format!("{:.3e}", report.angular.paraxial_ratio),
            pass(report.angular.paraxial_ok),
        ),
        (
            "input angle (units)",
            format!("{:.4}", report.input_angle_units),
            "",
        ),
        (
            "|d3| (um)",
            format!("{:.1}", report.spots.d3 * 1e6),
            pass(report.pitch_ok),
        ),
        ("W3 (um)", format!("{:.1}", report.spots.w3 * 1e6), ""),
        ("efficiency", format!("{:.4}", loss.overall), ""),
    ];
    for (name, v, flag) in rows {
        println!("{name:<22}{v:>22}  {flag}");
    }
    Ok(())
}

/// Corrected distribution, similarity against theory and violation report.
pub fn process_counts(
    walk: &WalkArgs,
    counts: &CountsArgs,
    theory_file: Option<&Path>,
    boot: &BootArgs,
    out: &Path,
) -> CliResult<()> {
    let rec = read_counts(counts)?;
    let boot = bootstrap(boot.n_boot, boot.seed)?;
    let run = theory_run(walk, walk.steps)?;
    let theory = match theory_file {
        Some(p) => qio::read_pair_csv(open(p)?, None).map_err(|e| CliError::data(p, e))?,
        None => run.positions.clone(),
    };
    let corrected = correct_counts(&rec, boot)?;
    emit(out, "corrected.csv", |w| {
        qio::write_pair_csv(&corrected.distribution, Some(&corrected.std_errors), w)
    })?;
    let similarity = compare_to_theory(&rec, &theory, boot)?;
    emit_json(
        out,
        "similarity.json",
        &qio::similarity_json(walk.steps, &similarity),
    )?;
    let violation = violation_report(&rec, &run.modes, boot)?;
    emit(out, "violation.json", |w| {
        qio::write_violation_json(&violation, false, w)
    })?;
    println!(
        "similarity {:.6} +/- {:.6}; {} pairs selected",
        similarity.value,
        similarity.std_error,
        corrected.selected.iter().filter(|&&s| s).count()
    );
    Ok(())
}

/// Draws a counts record from the theory of the configured walk.
pub fn synthesize(walk: &WalkArgs, args: &SynthArgs, seed: u64, out: &Path) -> CliResult<()> {
    let run = theory_run(walk, walk.steps)?;
    let efficiencies: Vec<f64> = args
        .efficiencies
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("bad efficiency list '{}'", args.efficiencies)))?;
    if efficiencies.is_empty() || efficiencies.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(CliError::Config("efficiencies must lie in (0, 1]".into()));
    }
    let meta = CountsMetadata {
        acquisition_time: args.acquisition_time,
        window: args.window,
        fbs_transmissivity: args.fbs_transmissivity,
        selection_factor: args.selection_factor.unwrap_or(DEFAULT_SELECTION_FACTOR),
    };
    let cfg = SynthesisConfig::uniform_singles(
        run.positions.extent(),
        args.singles_hz,
        &efficiencies,
        args.events,
        meta,
        seed,
    );
    let rec = synthesize_counts(&run.positions, &cfg)?;
    let paths = [
        out_path(out, "coincidences.csv")?,
        out_path(out, "modes.csv")?,
        out_path(out, "metadata.json")?,
    ];
    let (mut a, mut b, mut c) = (create(&paths[0])?, create(&paths[1])?, create(&paths[2])?);
    qio::write_counts_record(&rec, &mut a, &mut b, &mut c).map_err(|e| CliError::data(out, e))?;
    for (w, p) in [
        (&mut a, &paths[0]),
        (&mut b, &paths[1]),
        (&mut c, &paths[2]),
    ] {
        w.flush().map_err(|e| CliError::io(p, e))?;
    }
    println!(
        "{} coincidence events written to {}",
        rec.total_events(),
        out.display()
    );
    Ok(())
}
