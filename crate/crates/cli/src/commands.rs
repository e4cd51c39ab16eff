use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Value};

use qds_core::dataset::{
    all_names, generate_example, read_example, DatasetConfig, ExampleRecord, FormatError, Manifest,
};
use qds_core::measurement::{initial_states, observables};
use qds_core::noisegen::{self, Psd};
use qds_core::qlinalg::ComplexMatrix;
use qds_core::validation::{
    record_config, validate_record, verify_distortion, verify_psd, ValidationReport, EXPECTATION_TOL,
    PSD_BAND_BINS, PSD_MAX_BIN, PSD_TOL,
};

use crate::args::{Mode, Overrides, Source};
use crate::resolve::{self, resolve};
use crate::{CliError, CliResult};

const V_O_IDENTITY_TOL: f64 = 1e-12;

pub fn list(as_json: bool) -> CliResult<()> {
    let names = all_names();
    if as_json {
        let rows: Vec<Value> = names
            .iter()
            .map(|n| {
                json!({
                    "name": n.to_string(),
                    "qubits": n.nqubits(),
                    "category": n.category,
                    "waveform": n.waveform,
                    "profiles": n.profiles,
                    "distorted": n.distorted,
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows).map_err(|e| CliError::Io(e.to_string()))?);
        return Ok(());
    }
    let mut table = format!("{:<32} {:>6} {:<8} {:<10} {:<9}\n", "NAME", "QUBITS", "CATEGORY", "PROFILES", "DISTORTED");
    for n in &names {
        table.push_str(&format!(
            "{:<32} {:>6} {:<8} {:<10} {:<9}\n",
            n.to_string(),
            n.nqubits(),
            format!("{:?}", n.category),
            n.noise_profiles_tag().unwrap_or_else(|| "-".into()),
            if n.distorted { "yes" } else { "no" },
        ));
    }
    // A closed pipe (e.g. `qds list | head`) is not an error.
    let _ = std::io::stdout().lock().write_all(table.as_bytes());
    Ok(())
}

pub fn generate(source: &Source, overrides: &Overrides, out: &Path) -> CliResult<()> {
    let cfg = resolve(source, overrides)?;
    if cfg.is_custom() {
        warn!("{} is not one of the 52 enumerated datasets", cfg.name);
    }
    info!(
        "generating {} ({} examples, K = {}, M = {})",
        cfg.name,
        cfg.num_examples,
        cfg.effective_realizations(),
        cfg.pulse.num_steps
    );
    let (dir, manifest) = qds_core::dataset::write_dataset(&cfg, out, |done, total| {
        info!("example {done}/{total} written");
    })?;
    info!("wrote {} in {:.2} s", dir.display(), manifest.elapsed_time);
    println!("{}", dir.display());
    Ok(())
}

/// Records to check, either loaded from disk or simulated in memory.
enum Records {
    Files(Vec<PathBuf>),
    Generated(DatasetConfig),
}

fn qds_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qds"))
        .collect();
    files.sort();
    Ok(files)
}

fn records_for(target: Option<&str>, config: Option<&Path>, overrides: &Overrides) -> CliResult<Records> {
    if let Some(t) = target {
        let path = Path::new(t);
        if path.is_dir() {
            return Ok(Records::Files(qds_files(path)?));
        }
        if path.is_file() {
            return Ok(Records::Files(vec![path.to_path_buf()]));
        }
    }
    let cfg = resolve::apply(resolve::base_config(target, config)?, overrides)?;
    Ok(Records::Generated(cfg))
}

fn for_each_record<F>(records: &Records, mut f: F) -> CliResult<Vec<Value>>
where
    F: FnMut(&ExampleRecord) -> CliResult<Value>,
{
    let mut out = Vec::new();
    match records {
        Records::Files(paths) => {
            if paths.is_empty() {
                return Err(CliError::Usage("no .qds files found".into()));
            }
            for p in paths {
                let rec = read_example(p)?;
                let mut v = f(&rec)?;
                v["source"] = json!(p.display().to_string());
                out.push(v);
            }
        }
        Records::Generated(cfg) => {
            for i in 0..cfg.num_examples {
                let rec = generate_example(cfg, i as u64)?;
                let mut v = f(&rec)?;
                v["source"] = json!(format!("{}#{i}", cfg.name));
                out.push(v);
            }
        }
    }
    Ok(out)
}

fn v_o_identity_error(rec: &ExampleRecord) -> CliResult<f64> {
    let vs = rec
        .array("V_O")
        .and_then(|a| a.to_matrices())
        .ok_or_else(|| CliError::Failed("record has no V_O array".into()))?;
    Ok(vs
        .iter()
        .map(|v| (*v - ComplexMatrix::identity(v.dim())).frobenius_norm())
        .fold(0.0, f64::max))
}

fn report_value(r: &ValidationReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

/// De-interleaves a time-major `M × C` array into `C` channels.
fn channels(data: &[f64], shape: &[usize]) -> Vec<Vec<f64>> {
    let (m, c) = (shape[0], shape[1]);
    (0..c).map(|ch| (0..m).map(|j| data[j * c + ch]).collect()).collect()
}

fn psd_check(cfg: &DatasetConfig, samples_per_axis: &[Vec<f64>], tolerance: f64) -> CliResult<Value> {
    let mut axes = Vec::new();
    let mut passed = true;
    for (i, ax) in cfg.axes().iter().enumerate() {
        let Some(psd) = Psd::for_profile(ax.profile, ax.family, &cfg.noise) else {
            continue;
        };
        let r = verify_psd(
            &samples_per_axis[i],
            cfg.pulse.num_steps,
            cfg.pulse.total_time,
            |w| psd.eval(w),
            PSD_BAND_BINS,
            PSD_MAX_BIN,
            tolerance,
        )?;
        passed &= r.passed;
        let mut v = report_value(&r);
        v["axis"] = json!(i);
        v["profile"] = json!(ax.profile);
        axes.push(v);
    }
    if axes.is_empty() {
        return Err(CliError::Usage(format!(
            "{} has no PSD-specified (N1 or N5) noise axis",
            cfg.name
        )));
    }
    Ok(json!({ "axes": axes, "passed": passed }))
}

fn check_file(path: &Path, manifest: Option<&Manifest>) -> Value {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let result: Result<(), String> = (|| {
        let bytes = fs::read(path).map_err(|e| e.to_string())?;
        let rec = qds_core::dataset::decode(&bytes).map_err(|e| e.to_string())?;
        rec.check_shapes().map_err(|e: FormatError| e.to_string())?;
        if let Some(m) = manifest {
            let trailer = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().expect("8 bytes"));
            let entry = m
                .examples
                .iter()
                .find(|e| e.file == file)
                .ok_or_else(|| "not listed in manifest.json".to_string())?;
            if entry.checksum != format!("{trailer:016x}") {
                return Err(format!("checksum {trailer:016x} differs from manifest {}", entry.checksum));
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => json!({ "source": path.display().to_string(), "passed": true }),
        Err(e) => json!({ "source": path.display().to_string(), "passed": false, "error": e }),
    }
}

fn file_mode(target: Option<&str>) -> CliResult<Vec<Value>> {
    let target = target.ok_or_else(|| CliError::Usage("file mode needs a dataset directory or file".into()))?;
    let path = Path::new(target);
    if path.is_file() {
        return Ok(vec![check_file(path, None)]);
    }
    if !path.is_dir() {
        return Err(CliError::Io(format!("{target}: no such file or directory")));
    }
    let manifest_path = path.join("manifest.json");
    let manifest: Option<Manifest> = if manifest_path.is_file() {
        let text = fs::read_to_string(&manifest_path)?;
        Some(serde_json::from_str(&text).map_err(|e| CliError::Failed(format!("manifest.json: {e}")))?)
    } else {
        None
    };
    let files = qds_files(path)?;
    let mut out: Vec<Value> = files.iter().map(|f| check_file(f, manifest.as_ref())).collect();
    if let Some(m) = &manifest {
        for e in &m.examples {
            if !path.join(&e.file).is_file() {
                out.push(json!({ "source": e.file, "passed": false, "error": "listed in manifest.json but missing" }));
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("{target}: no .qds files found")));
    }
    Ok(out)
}

pub fn validate(
    target: Option<&str>,
    config: Option<&Path>,
    mode: Mode,
    overrides: &Overrides,
    substeps: usize,
    tolerance: Option<f64>,
    report: Option<&Path>,
) -> CliResult<()> {
    let (mode_name, results) = match mode {
        Mode::File => ("file", file_mode(target)?),
        Mode::Noiseless | Mode::Matched => {
            let tol = tolerance.unwrap_or(EXPECTATION_TOL);
            let records = records_for(target, config, overrides)?;
            let noiseless = mode == Mode::Noiseless;
            let results = for_each_record(&records, |rec| {
                let cfg = record_config(rec)?;
                if noiseless && !cfg.is_noiseless() {
                    return Err(CliError::Usage(format!("{} is not a noiseless dataset", cfg.name)));
                }
                let r = validate_record(rec, substeps, tol)?;
                let mut v = report_value(&r);
                if noiseless {
                    let dev = v_o_identity_error(rec)?;
                    v["v_o_identity_error"] = json!(dev);
                    v["passed"] = json!(r.passed && dev <= V_O_IDENTITY_TOL);
                }
                Ok(v)
            })?;
            (if noiseless { "noiseless" } else { "matched" }, results)
        }
        Mode::Psd => {
            let tol = tolerance.unwrap_or(PSD_TOL);
            let records = records_for(target, config, overrides)?;
            let results = match &records {
                Records::Generated(cfg) => {
                    let batches = noisegen::batch(
                        &cfg.axes(),
                        cfg.num_realizations,
                        cfg.pulse.total_time,
                        cfg.pulse.num_steps,
                        &cfg.noise,
                        cfg.master_seed,
                        0,
                    )?;
                    let samples: Vec<Vec<f64>> = batches.into_iter().map(|b| b.samples).collect();
                    let mut v = psd_check(cfg, &samples, tol)?;
                    v["source"] = json!(format!("{}#0 (K = {})", cfg.name, cfg.num_realizations));
                    vec![v]
                }
                Records::Files(_) => for_each_record(&records, |rec| {
                    let cfg = record_config(rec)?;
                    let noise = rec
                        .array("noise")
                        .ok_or_else(|| CliError::Failed("record has no noise array".into()))?;
                    let data = noise.as_real().expect("noise is real");
                    let per_axis = noise.shape[1] * noise.shape[2];
                    let samples: Vec<Vec<f64>> = data.chunks(per_axis).map(|c| c.to_vec()).collect();
                    psd_check(&cfg, &samples, tol)
                })?,
            };
            ("psd", results)
        }
        Mode::Distortion => {
            let records = records_for(target, config, overrides)?;
            let results = for_each_record(&records, |rec| {
                let cfg = record_config(rec)?;
                if !cfg.name.distorted {
                    return Err(CliError::Usage(format!("{} has no distortion stage", cfg.name)));
                }
                let pulses = rec.array("pulses").expect("pulses array");
                let distorted = rec.array("distorted_pulses").expect("distorted_pulses array");
                let src = channels(pulses.as_real().expect("real"), &pulses.shape);
                let dst = channels(distorted.as_real().expect("real"), &distorted.shape);
                let mut per_channel = Vec::new();
                let mut passed = true;
                for (a, b) in src.iter().zip(&dst) {
                    let r = verify_distortion(a, b)?;
                    passed &= r.passed;
                    per_channel.push(report_value(&r));
                }
                Ok(json!({ "channels": per_channel, "passed": passed }))
            })?;
            ("distortion", results)
        }
    };

    let passed = results.iter().all(|r| r["passed"] == json!(true));
    let summary = json!({ "mode": mode_name, "passed": passed, "results": results });
    let text = serde_json::to_string_pretty(&summary).expect("report serializes");
    println!("{text}");
    if let Some(path) = report {
        fs::write(path, format!("{text}\n"))?;
    }
    if passed {
        Ok(())
    } else {
        let failed = results.iter().filter(|r| r["passed"] != json!(true)).count();
        Err(CliError::Failed(format!("{failed} of {} checks failed", results.len())))
    }
}

fn real_array<'a>(rec: &'a ExampleRecord, name: &str) -> CliResult<&'a [f64]> {
    rec.real(name)
        .ok_or_else(|| CliError::Failed(format!("record has no real array {name}")))
}

pub fn inspect(file: &Path, csv_expectations: Option<&Path>, csv_waveforms: Option<&Path>) -> CliResult<()> {
    let rec = read_example(file)?;
    let cfg = record_config(&rec)?;
    println!("file: {}", file.display());
    println!("dataset: {}", cfg.name);
    if let Some(obj) = rec.metadata.as_object() {
        let keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
        println!("metadata keys: {}", keys.join(", "));
    }
    println!(
        "K = {}, M = {}, T = {}",
        cfg.effective_realizations(),
        cfg.pulse.num_steps,
        cfg.pulse.total_time
    );
    for a in &rec.arrays {
        println!("  {:<22} {:?} {:?}", a.name, a.data.dtype(), a.shape);
    }
    println!("max ||V_O - I||_F = {:e}", v_o_identity_error(&rec)?);

    if let Some(path) = csv_expectations {
        let states = initial_states(cfg.name.nqubits())?;
        let obs = observables(cfg.name.nqubits())?;
        let reference = real_array(&rec, "expectations")?;
        let mc = real_array(&rec, "E_O")?;
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(w, "state,observable,reference,E_O")?;
        let n_obs = obs.labels.len();
        for (s, label) in states.labels.iter().enumerate() {
            for (o, ol) in obs.labels.iter().enumerate() {
                let e = s * n_obs + o;
                writeln!(w, "{label},{},{:e},{:e}", ol.name(), reference[e], mc[e])?;
            }
        }
        w.flush()?;
    }
    if let Some(path) = csv_waveforms {
        let time = real_array(&rec, "time_range")?;
        let pulses = rec.array("pulses").expect("pulses array");
        let distorted = rec.array("distorted_pulses").expect("distorted_pulses array");
        let src = channels(pulses.as_real().expect("real"), &pulses.shape);
        let dst = channels(distorted.as_real().expect("real"), &distorted.shape);
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        let mut header = vec!["time".to_string()];
        header.extend((0..src.len()).map(|c| format!("pulse_{c}")));
        header.extend((0..dst.len()).map(|c| format!("distorted_{c}")));
        writeln!(w, "{}", header.join(","))?;
        for (j, t) in time.iter().enumerate() {
            let mut row = vec![format!("{t:e}")];
            row.extend(src.iter().map(|c| format!("{:e}", c[j])));
            row.extend(dst.iter().map(|c| format!("{:e}", c[j])));
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
    }
    Ok(())
}
