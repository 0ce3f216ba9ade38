use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_envsense");

// Small dataset so each run takes well under a second.
const SMALL: &str = "\
permutations = 99
folds = 3
forest.trees = 10
synth.duration.climb_stairs = 10
synth.duration.take_elevator = 10
synth.duration.walk_outdoor = 10
synth.duration.walk_indoor = 10
synth.duration.run_indoor = 10
synth.duration.sit_lab = 10
synth.duration.sit_cubicle = 10
synth.duration.rest = 10
";

fn run(config: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--config")
        .arg(config)
        .args(args)
        .env_remove("ENVSENSE_SEED")
        .env_remove("ENVSENSE_DATA")
        .env_remove("ENVSENSE_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path
}

fn report(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir.join("report"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn window_of_one_fails_with_module_name() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "window = 1\n");
    let out = tmp.path().join("out");
    let o = run(&conf, &["pipeline", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.starts_with("error: features:"), "{stderr}");
    assert!(stderr.contains("length 1"), "{stderr}");
}

#[test]
fn unknown_config_key_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "windows = 60\n");
    let o = run(&conf, &["generate", "--out", tmp.path().join("d").to_str().unwrap()]);
    assert!(!o.status.success());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.starts_with("error: config:") && stderr.contains("line 12"), "{stderr}");
}

#[test]
fn pipeline_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&conf, &["--seed", "7", "pipeline", "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ra = report(&a);
    let names: Vec<&str> = ra.iter().map(|f| f.0.as_str()).collect();
    for expected in ["significance.txt", "accuracy.txt", "confusion_forest_fused.txt", "confusion_forest_accel.csv"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    assert_eq!(ra, report(&b));
    assert_eq!(fs::read(a.join("features.csv")).unwrap(), fs::read(b.join("features.csv")).unwrap());
}

#[test]
fn subcommands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "");
    let p = |name: &str| tmp.path().join(name).to_str().unwrap().to_string();
    let ok = |o: Output| {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };

    ok(run(&conf, &["generate", "--out", &p("data")]));
    assert!(tmp.path().join("data/manifest.csv").exists());

    ok(run(&conf, &["extract", "--data", &p("data"), "--out", &p("all.csv")]));
    ok(run(&conf, &["extract", "--data", &p("data"), "--out", &p("sparse.csv"), "--stride", "60"]));
    let all = fs::read_to_string(p("all.csv")).unwrap().lines().count();
    let sparse = fs::read_to_string(p("sparse.csv")).unwrap().lines().count();
    assert!(sparse > 1 && sparse < all);

    let text = ok(run(&conf, &["test", "--features", &p("all.csv"), "--out", &p("sig")]));
    assert_eq!(text.lines().filter(|l| l.starts_with("H_")).count(), 5);

    let text = ok(run(
        &conf,
        &["classify", "--features", &p("sparse.csv"), "--mask", "env", "--model", "nb", "--out", &p("cls")],
    ));
    assert!(text.contains("Naive Bayes"), "{text}");
    assert!(tmp.path().join("cls/confusion_nb_env.csv").exists());

    ok(run(&conf, &["locate", "--data", &p("data"), "--out", &p("loc.csv")]));
    let loc = fs::read_to_string(p("loc.csv")).unwrap();
    assert!(loc.starts_with("episode,window_end,log_ratio,location,dtw_distance,climbing\n"));
    assert!(loc.lines().count() > 1);
}
