use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lindspec_cli::artifacts::{read_record, read_spectra, RESULT_FILE, SPECTRA_FILE};
use lindspec_cli::pipeline::band_real_parts;
use lindspec_cli::rediagnose;
use tempfile::TempDir;

fn lindspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindspec")).args(args).env_remove("LINDSPEC_THREADS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const XXZ_DEPHASING: &str = r#"
name = "xxz-small"
target = "lindbladian"
diagnostics = ["spacings", "csr", "sv_ratios"]
seed = 4
svg = true

[model]
family = "xxz"
L = 4
Delta = 1.05
jumps = { kind = "dephasing", gamma = 1.0 }

[sector]
m_d = 0
px = "even"
"#;

fn run_spec(tmp: &TempDir, text: &str, out: &str) -> (Output, PathBuf) {
    let spec = write(tmp.path(), &format!("{out}.toml"), text);
    let dir = tmp.path().join(out);
    let o = lindspec(&["run", "--spec", spec.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    (o, dir)
}

#[test]
fn missing_delta_exits_2_and_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let (out, dir) = run_spec(&tmp, &XXZ_DEPHASING.replace("Delta = 1.05\n", ""), "bad");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Delta"), "{}", stderr(&out));
    assert!(!dir.exists());
}

#[test]
fn fixed_m_p_with_damping_exits_2() {
    let tmp = TempDir::new().unwrap();
    let text = XXZ_DEPHASING
        .replace(r#"kind = "dephasing""#, r#"kind = "damping_uniform""#)
        .replace("m_d = 0", "m_p = 0\nm_d = 0");
    let (out, _) = run_spec(&tmp, &text, "bad");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("m_p"), "{}", stderr(&out));
}

#[test]
fn oversized_sector_fails_fast_with_exit_3() {
    let tmp = TempDir::new().unwrap();
    let text = XXZ_DEPHASING.replace("L = 4", "L = 11").replace("m_d = 0\n", "");
    let (out, _) = run_spec(&tmp, &text, "big");
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("exceeds the supported dense envelope"), "{}", stderr(&out));
}

#[test]
fn artifacts_are_deterministic_and_recomputable() {
    let tmp = TempDir::new().unwrap();
    let (a, dir_a) = run_spec(&tmp, XXZ_DEPHASING, "a");
    let (b, dir_b) = run_spec(&tmp, XXZ_DEPHASING, "b");
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    for f in ["spec.toml", SPECTRA_FILE, RESULT_FILE, "spacings.csv", "csr.csv", "spacings.svg", "csr.svg"] {
        assert_eq!(fs::read(dir_a.join(f)).unwrap(), fs::read(dir_b.join(f)).unwrap(), "{f}");
    }
    assert!(dir_a.join("timing.json").exists());

    let record = read_record(&dir_a).unwrap();
    assert_eq!(record.spectra_files, vec![SPECTRA_FILE.to_string()]);
    let again = rediagnose(&dir_a).unwrap();
    let (x, y) = (serde_json::to_value(&record.summaries).unwrap(), serde_json::to_value(&again).unwrap());
    assert_close_json(&x, &y, 1e-12);
}

fn assert_close_json(a: &serde_json::Value, b: &serde_json::Value, tol: f64) {
    use serde_json::Value::*;
    match (a, b) {
        (Number(x), Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= tol * x.abs().max(1.0), "{x} vs {y}");
        }
        (Array(x), Array(y)) => {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).for_each(|(p, q)| assert_close_json(p, q, tol));
        }
        (Object(x), Object(y)) => {
            assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>());
            x.iter().for_each(|(k, v)| assert_close_json(v, &y[k], tol));
        }
        _ => assert_eq!(a, b),
    }
}

#[test]
fn seed_flag_overrides_the_file() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "s.toml", XXZ_DEPHASING);
    let dir = tmp.path().join("seeded");
    let o = lindspec(&["run", "--spec", spec.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_record(&dir).unwrap().seed, 99);
}

const SWEEP: &str = r#"
seeds = [7]

[grid]
gamma = [0.1, 1.0, 10.0]

[experiment]
name = "tfi-gamma"
target = "heff"
diagnostics = ["sv_ratios", "spacings"]

[experiment.model]
family = "tfi"
L = 8
h = 1.05
jumps = { kind = "damping_uniform", gamma = 1.0 }

[experiment.sector]
px = "even"
"#;

#[test]
fn gamma_sweep_fills_the_ratio_column_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "sweep.toml", SWEEP);
    let mut tables = Vec::new();
    for (name, threads) in [("one", "1"), ("two", "3")] {
        let dir = tmp.path().join(name);
        let o = lindspec(&["sweep", "--spec", spec.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        tables.push(fs::read(dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);

    let mut reader = csv::Reader::from_reader(tables[0].as_slice());
    let headers = reader.headers().unwrap().clone();
    let r_col = headers.iter().position(|h| h == "sv_r_mean").unwrap();
    let g_col = headers.iter().position(|h| h == "gamma").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for (row, gamma) in rows.iter().zip(["0.1", "1", "10"]) {
        assert_eq!(&row[g_col], gamma);
        let r: f64 = row[r_col].parse().unwrap();
        assert!((0.0..1.0).contains(&r));
    }
}

#[test]
fn empty_grid_exits_2() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "sweep.toml", &SWEEP.replace("gamma = [0.1, 1.0, 10.0]", "gamma = []"));
    let o = lindspec(&["sweep", "--spec", spec.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("grid.gamma"));
}

#[test]
fn failing_cells_are_recorded_and_exit_1() {
    let tmp = TempDir::new().unwrap();
    // L = 1 is below the chain minimum; the other cell runs
    let text = SWEEP.replace("[grid]\ngamma = [0.1, 1.0, 10.0]", "[grid]\nL = [1.0, 8.0]");
    let spec = write(tmp.path(), "sweep.toml", &text);
    let dir = tmp.path().join("x");
    let o = lindspec(&["sweep", "--spec", spec.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let table = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(table.matches(",failed,").count(), 1, "{table}");
    assert_eq!(table.matches(",ok,").count(), 1, "{table}");
}

#[test]
fn emit_plot_spacing_structure() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "s.csv", "s\n0.4\n0.9\n1.3\n2.2\n");
    let svg = tmp.path().join("s.svg");
    let o = lindspec(&["emit-plot", "--data", data.to_str().unwrap(), "--kind", "spacings", "--out", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"<path class="curve""#).count(), 2);
    assert_eq!(text.matches(r#"<g class="bars""#).count(), 1);
    assert!(text.contains(r#"data-reference="poisson2d""#) && text.contains(r#"data-reference="ginibre""#));
}

#[test]
fn emit_plot_rejects_empty_and_malformed_data() {
    let tmp = TempDir::new().unwrap();
    let svg = tmp.path().join("x.svg");
    for (name, text, kind) in [("empty.csv", "s\n", "spacings"), ("wrong.csv", "x,y\n1,2\n", "csr"), ("text.csv", "s\nabc\n", "spacings")] {
        let data = write(tmp.path(), name, text);
        let o = lindspec(&["emit-plot", "--data", data.to_str().unwrap(), "--kind", kind, "--out", svg.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}: {}", stderr(&o));
    }
    assert!(!svg.exists());
}

#[test]
fn fig5_bands_are_spaced_by_half_gamma() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("fig5");
    let o = lindspec(&["run", "--preset", "fig5-desk", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let run = dir.join("nnn-xxz-bands-L5");
    let spectra = read_spectra(&run.join(SPECTRA_FILE), 1).unwrap();
    let parts = band_real_parts(&spectra[0].eigenvalues);
    assert_eq!(parts.len(), 11);
    for w in parts.windows(2) {
        assert!((w[1] - w[0] - 0.5).abs() < 1e-10, "{parts:?}");
    }
    let band = read_record(&run).unwrap().summaries.band_check.unwrap();
    assert!(band.max_prediction_error < 1e-8);

    let svg = tmp.path().join("bands.svg");
    let o = lindspec(&["emit-plot", "--data", run.join(SPECTRA_FILE).to_str().unwrap(), "--kind", "bands", "--out", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(svg).unwrap().matches("<circle").count(), 1024);
}

#[test]
fn presets_are_listed_and_printable() {
    let o = lindspec(&["presets"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["fig2-desk", "fig3-desk", "fig3-sep", "fig4-desk", "fig5-desk"] {
        assert!(text.contains(name), "{name}");
    }
    let o = lindspec(&["presets", "--preset", "fig3-sep"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("[[experiment]]"));
    assert_eq!(code(&lindspec(&["presets", "--preset", "nope"])), 2);
}

#[test]
fn bad_thread_counts_exit_2() {
    assert_eq!(code(&lindspec(&["presets", "--threads", "0"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_lindspec")).arg("presets").env("LINDSPEC_THREADS", "many").output().unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_lindspec")).arg("presets").env("LINDSPEC_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0);
}
