mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use soundscape_denoise::cli::{self, EXIT_FAILED, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE};
use soundscape_denoise::{bgn, read_audio, snr, write_audio, AudioClip, SampleFormat};

fn fixture_wav(dir: &Path, name: &str, secs: usize, seed: u64) -> PathBuf {
    let n = FIXTURE_RATE as usize * secs;
    let noise = white_noise(n, NOISE_RMS, seed);
    let x = noise.iter().zip(tone_bursts(n)).map(|(a, b)| a + b).collect();
    let path = dir.join(name);
    write_audio(&AudioClip::new(x, FIXTURE_RATE).unwrap(), &path, SampleFormat::Float32).unwrap();
    path
}

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("soundscape-denoise").chain(args.iter().copied()))
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn denoise_writes_named_outputs_deterministically() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "site.wav", 2, 1);
    let o = out.path().to_str().unwrap();

    assert_eq!(run(&["denoise", "--out", o, wav.to_str().unwrap()]), EXIT_OK);
    let first = files(out.path());
    for name in ["site.denoised.wav", "site.profile.csv", "site.manifest.json", "denoise_summary.csv"] {
        assert!(first.contains_key(name), "missing {name}: {:?}", first.keys());
    }
    let (header, rows) = read_csv(&out.path().join("site.profile.csv"));
    assert_eq!(header, ["frequency_hz", "linear", "db"]);
    assert_eq!(rows.len(), 257);

    let manifest: serde_json::Value = serde_json::from_slice(&first["site.manifest.json"]).unwrap();
    assert_eq!(manifest["config"]["filter"]["window_size"], 512);
    assert!(manifest["runs"][0]["theta_used"].is_number());

    assert_eq!(run(&["denoise", "--out", o, wav.to_str().unwrap()]), EXIT_OK);
    assert_eq!(first, files(out.path()));

    let denoised = read_audio(out.path().join("site.denoised.wav")).unwrap();
    assert_eq!(denoised.len(), FIXTURE_RATE as usize * 2);
}

#[test]
fn spectrogram_images_on_request() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "a.wav", 1, 2);
    let code = run(&[
        "denoise",
        "--emit",
        "spectrogram",
        "--out",
        out.path().to_str().unwrap(),
        wav.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let names = files(out.path());
    assert!(names.contains_key("a.spectrogram.input.png"));
    assert!(names.contains_key("a.spectrogram.denoised.png"));
    assert!(!names.contains_key("a.denoised.wav"));
}

#[test]
fn directory_parallel_matches_serial() {
    let inputs = tempfile::tempdir().unwrap();
    for (i, seed) in [11u64, 12, 13].iter().enumerate() {
        fixture_wav(inputs.path(), &format!("f{i}.wav"), 2, *seed);
    }
    let serial = tempfile::tempdir().unwrap();
    let parallel = tempfile::tempdir().unwrap();
    let dir = inputs.path().to_str().unwrap();
    assert_eq!(run(&["denoise", "--workers", "1", "--out", serial.path().to_str().unwrap(), dir]), EXIT_OK);
    assert_eq!(run(&["denoise", "--workers", "3", "--out", parallel.path().to_str().unwrap(), dir]), EXIT_OK);

    let a = files(serial.path());
    let b = files(parallel.path());
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    assert_eq!(a.keys().filter(|k| k.ends_with(".denoised.wav")).count(), 3);
    for (name, bytes) in &a {
        if name.ends_with(".manifest.json") {
            let mut x: serde_json::Value = serde_json::from_slice(bytes).unwrap();
            let mut y: serde_json::Value = serde_json::from_slice(&b[name]).unwrap();
            for v in [&mut x, &mut y] {
                v["config"].as_object_mut().unwrap().remove("workers");
                v["config"].as_object_mut().unwrap().remove("out_dir");
            }
            assert_eq!(x, y, "{name}");
        } else {
            assert_eq!(bytes, &b[name], "{name}");
        }
    }
}

#[test]
fn indices_rows_and_means() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "long.wav", 30, 5);
    let silence = inputs.path().join("quiet.wav");
    write_audio(&AudioClip::new(vec![0.0; 8000 * 4], 8000).unwrap(), &silence, SampleFormat::Pcm16).unwrap();
    let code = run(&[
        "indices",
        "--out",
        out.path().to_str().unwrap(),
        wav.to_str().unwrap(),
        silence.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);

    let csv = out.path().join("long.indices.csv");
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, ["second", "BGN_raw", "SNR_raw"]);
    assert_eq!(rows.len(), 30);

    let clip = read_audio(&wav).unwrap();
    assert!((mean(&column(&csv, "BGN_raw")) - bgn(&clip).unwrap().mean()).abs() <= 1e-9);
    assert!((mean(&column(&csv, "SNR_raw")) - snr(&clip).unwrap().mean()).abs() <= 1e-9);

    let quiet = column(&out.path().join("quiet.indices.csv"), "BGN_raw");
    assert_eq!(quiet, vec![-90.0; 4]);
}

#[test]
fn indices_with_filtered_columns() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "x.wav", 3, 6);
    let code = run(&[
        "indices",
        "--emit",
        "indices,filtered",
        "--out",
        out.path().to_str().unwrap(),
        wav.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = read_csv(&out.path().join("x.indices.csv"));
    assert_eq!(
        header,
        [
            "second",
            "BGN_raw",
            "SNR_raw",
            "BGN_filtered_original",
            "SNR_filtered_original",
            "BGN_filtered_updated",
            "SNR_filtered_updated"
        ]
    );
    assert_eq!(rows.len(), 3);
}

#[test]
fn compare_summary_and_normalized_profiles() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "cmp.wav", 3, 8);
    assert_eq!(run(&["compare", "--out", out.path().to_str().unwrap(), wav.to_str().unwrap()]), EXIT_OK);

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.path().join("cmp.summary.json")).unwrap()).unwrap();
    for key in ["snr_mean_original", "snr_mean_updated", "bgn_mean_original", "bgn_mean_updated"] {
        assert!(summary[key].is_number(), "{key}");
    }

    let profile = out.path().join("cmp.compare.profile.csv");
    for col in ["original_normalized", "updated_normalized"] {
        let v = column(&profile, col);
        assert_eq!(v.iter().cloned().fold(f64::INFINITY, f64::min), 0.0, "{col}");
        assert_eq!(v.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0, "{col}");
    }
    let (_, rows) = read_csv(&out.path().join("cmp.compare.indices.csv"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn exit_codes() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let good = fixture_wav(inputs.path(), "ok.wav", 1, 9);
    let missing = inputs.path().join("missing.wav");

    assert_eq!(run(&["compare", "--out", o, missing.to_str().unwrap()]), EXIT_FAILED);
    let code = run(&["indices", "--out", o, good.to_str().unwrap(), missing.to_str().unwrap()]);
    assert_eq!(code, EXIT_PARTIAL);
    let summary = fs::read_to_string(out.path().join("indices_summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.contains("missing.wav") && l.contains("error")));

    // The original variant needs an explicit threshold when denoising.
    assert_eq!(run(&["denoise", "--variant", "original", "--out", o, good.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(run(&["transmogrify", good.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn config_file_with_flag_override() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "c.wav", 1, 10);
    let conf = inputs.path().join("run.conf");
    fs::write(&conf, "# batch settings\nvariant = original\ntheta = 0.2\nwindow = 256\n").unwrap();
    let code = run(&[
        "denoise",
        "--config",
        conf.to_str().unwrap(),
        "--window",
        "1024",
        "--out",
        out.path().to_str().unwrap(),
        wav.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.path().join("c.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["filter"]["window_size"], 1024);
    assert_eq!(manifest["config"]["filter"]["theta"], 0.2);
}

#[test]
fn binary_runs() {
    let inputs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let wav = fixture_wav(inputs.path(), "b.wav", 1, 14);
    let status = Command::new(env!("CARGO_BIN_EXE_soundscape-denoise"))
        .args(["indices", "--out", out.path().to_str().unwrap(), wav.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.path().join("b.indices.csv").exists());
    let help = Command::new(env!("CARGO_BIN_EXE_soundscape-denoise")).arg("--help").output().unwrap();
    assert!(help.status.success());
    assert!(String::from_utf8_lossy(&help.stdout).contains("compare"));
}
