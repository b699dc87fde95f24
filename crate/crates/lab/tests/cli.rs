use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geolorenz_lab::io::{fmt_f64, read_table, write_table};
use geolorenz_lab::RunManifest;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("geolorenz-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn geolorenz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geolorenz"))
        .args(args)
        .output()
        .unwrap()
}

fn run_config(dir: &Path, text: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, text).unwrap();
    let mut args = vec![
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    geolorenz(&args)
}

#[test]
fn config_errors_exit_with_2() {
    let d = scratch("config");
    for text in [
        "",
        "experiment = nope\n",
        "experiment = ulam\nbogus = 1\n",
        "experiment = ulam\nbins = x\n",
    ] {
        let o = run_config(&d, text, &d.join("out"), &[]);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{text:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = geolorenz(&["--config", d.join("absent.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_configs_reproduce() {
    let d = scratch("repro");
    let text = "experiment = ulam\nbins = 64\nfine_bins = 128\n";
    let (a, b) = (d.join("a"), d.join("b"));
    assert!(run_config(&d, text, &a, &[]).status.success());
    assert!(run_config(&d, text, &b, &["--threads", "1"])
        .status
        .success());
    let ma = RunManifest::read(&a).unwrap();
    let mb = RunManifest::read(&b).unwrap();
    assert_eq!(ma.config_hash, mb.config_hash);
    assert_eq!(ma.outputs_hash(), mb.outputs_hash());
    assert!(ma.files.iter().any(|f| f.name == "density.csv"));

    let c = d.join("c");
    assert!(run_config(&d, text, &c, &["--seed", "99"]).status.success());
    assert_ne!(RunManifest::read(&c).unwrap().config_hash, ma.config_hash);
}

#[test]
fn report_flags_missing_files_and_conflicts() {
    let d = scratch("report");
    let (a, b) = (d.join("a").join("spectrum"), d.join("b").join("spectrum"));
    assert!(run_config(&d, "experiment = spectrum\n", &a, &[])
        .status
        .success());
    assert!(run_config(&d, "experiment = spectrum\nseed = 7\n", &b, &[])
        .status
        .success());

    let report = format!(
        "experiment = report\nmanifests = {}, {}\n",
        a.display(),
        b.display()
    );
    let o = run_config(&d, &report, &d.join("r"), &[]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("conflicting config hashes"));
    let summary = std::fs::read_to_string(d.join("r").join("summary.txt")).unwrap();
    assert!(summary.contains("criterion.1 = PASS"), "{summary}");

    let listed = &RunManifest::read(&a).unwrap().files[0].name;
    std::fs::remove_file(a.join(listed)).unwrap();
    let o = run_config(&d, &report, &d.join("r2"), &[]);
    assert_eq!(o.status.code(), Some(4));

    let report = format!(
        "experiment = report\nmanifests = {}\n",
        d.join("nowhere").display()
    );
    assert_eq!(
        run_config(&d, &report, &d.join("r3"), &[]).status.code(),
        Some(4)
    );
}

#[test]
fn tables_round_trip_exactly() {
    let d = scratch("csv");
    let path = d.join("t.csv");
    let xs = [0.1, -1.0 / 3.0, 1e-300, 6.02e23, f64::MIN_POSITIVE, 0.0];
    write_table(
        &path,
        &["i", "x"],
        xs.iter()
            .enumerate()
            .map(|(i, x)| vec![i.to_string(), fmt_f64(*x)]),
    )
    .unwrap();
    let back = read_table(&path, &["i", "x"])
        .unwrap()
        .f64_column("x")
        .unwrap();
    assert_eq!(back, xs);
    assert!(read_table(&path, &["i", "y"]).is_err());
}
