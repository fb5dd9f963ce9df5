use std::path::Path;
use std::process::{Command, Output};

use flatpart::raster::{write_color, write_mask, BinaryMask, ColorImage};
use image::Rgb;

fn flatpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatpart")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = flatpart(args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str, count: &str, patches: &str) {
    ok(&["synth", "--out", s(dir), "--seed", seed, "--count", count, "--patches", patches, "--max-rotation", "40"]);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn map_of(report: &str) -> f64 {
    report.lines().find_map(|l| l.strip_prefix("map ")).unwrap().parse().unwrap()
}

#[test]
fn align_writes_every_valid_image() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "1", "3", "0");
    let out = tmp.path().join("a");
    let stdout = ok(&["align", "--input", s(&tmp.path().join("s/fish")), "--out", s(&out)]);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("aligned")).count(), 3);
    for i in 0..3 {
        assert!(out.join(format!("fish_{i:04}.png")).is_file());
        assert!(out.join(format!("fish_{i:04}_mask.png")).is_file());
    }
    assert_eq!(std::fs::read_to_string(out.join("bboxes.txt")).unwrap().lines().count(), 3);
}

#[test]
fn align_reports_a_round_mask_and_keeps_going() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "2", "2", "0");
    let fish = tmp.path().join("s/fish");
    let disk = BinaryMask::from_fn(80, 80, |x, y| (x as f64 - 40.0).powi(2) + (y as f64 - 40.0).powi(2) <= 900.0);
    write_mask(&disk, &fish.join("round_mask.png")).unwrap();
    write_color(&ColorImage::from_pixel(80, 80, Rgb([90, 90, 90])), &fish.join("round.png")).unwrap();
    let out = flatpart(&["align", "--input", s(&fish), "--out", s(&tmp.path().join("a"))]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("round"));
    assert!(tmp.path().join("a/fish_0000.png").is_file());
    assert!(tmp.path().join("a/fish_0001.png").is_file());
}

#[test]
fn align_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "3", "3", "0");
    let input = tmp.path().join("s/fish");
    for run in ["a", "b"] {
        ok(&["align", "--input", s(&input), "--out", s(&tmp.path().join(run))]);
    }
    assert_eq!(files(&tmp.path().join("a")), files(&tmp.path().join("b")));
}

#[test]
fn partseg_labels_partition_the_fish() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "4", "3", "0");
    ok(&["align", "--input", s(&tmp.path().join("s/fish")), "--out", s(&tmp.path().join("a"))]);
    ok(&["partseg", "--input", s(&tmp.path().join("a")), "--out", s(&tmp.path().join("p"))]);
    for i in 0..3 {
        let id = format!("fish_{i:04}");
        let mask = flatpart::raster::read_mask(&tmp.path().join(format!("a/{id}_mask.png"))).unwrap();
        let labels = image::open(tmp.path().join(format!("p/{id}_labels.png"))).unwrap().to_luma8();
        for (x, y, v) in labels.enumerate_pixels() {
            assert_eq!(v.0[0] != 0, mask.get(x, y), "{id} at ({x}, {y})");
            assert!(v.0[0] <= 3);
        }
        assert!(tmp.path().join(format!("p/{id}_parts.txt")).is_file());
        assert!(tmp.path().join(format!("p/{id}_overlay.png")).is_file());
    }
}

#[test]
fn partseg_accepts_the_fusiform_profile() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["synth", "--out", s(&tmp.path().join("s")), "--seed", "5", "--count", "2", "--profile", "fusiform"]);
    ok(&["align", "--input", s(&tmp.path().join("s/fish")), "--out", s(&tmp.path().join("a"))]);
    ok(&["partseg", "--input", s(&tmp.path().join("a")), "--out", s(&tmp.path().join("p")), "--profile", "fusiform"]);
    assert!(tmp.path().join("p/fish_0001_labels.png").is_file());
}

#[test]
fn missing_input_directory_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = flatpart(&["partseg", "--input", s(&tmp.path().join("nope")), "--out", s(&tmp.path().join("p"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn augment_with_a_seed_repeats_itself() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "6", "2", "2");
    for run in ["a", "b"] {
        ok(&[
            "augment", "--patches", s(&tmp.path().join("s/patches")), "--fish", s(&tmp.path().join("s/fish")),
            "--out", s(&tmp.path().join(run)), "--count", "10", "--seed", "7",
        ]);
    }
    let a = std::fs::read(tmp.path().join("a/manifest.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(tmp.path().join("b/manifest.jsonl")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 10);
    assert_eq!(files(&tmp.path().join("a/images")), files(&tmp.path().join("b/images")));
}

#[test]
fn augment_reports_a_shortfall() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "7", "1", "1");
    // a patch far larger than any fish cannot be placed
    let big = BinaryMask::from_fn(900, 900, |_, _| true);
    let patches = tmp.path().join("s/patches");
    write_mask(&big, &patches.join("patch_0000_mask.png")).unwrap();
    write_color(&ColorImage::from_pixel(900, 900, Rgb([200, 10, 10])), &patches.join("patch_0000.png")).unwrap();
    let out = flatpart(&[
        "augment", "--patches", s(&patches), "--fish", s(&tmp.path().join("s/fish")), "--out",
        s(&tmp.path().join("a")), "--count", "3", "--seed", "1", "--max-retries", "20",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("shortfall: 3"));
}

#[test]
fn augment_without_a_seed_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "8", "1", "1");
    let out = flatpart(&[
        "augment", "--patches", s(&tmp.path().join("s/patches")), "--fish", s(&tmp.path().join("s/fish")),
        "--out", s(&tmp.path().join("a")),
    ]);
    assert_eq!(code(&out), 2);
}

const GT: &str = "img1 head 50 50 20 20 fishA ocular
img1 body 120 60 40 30 fishA ocular
img2 head 40 40 10 10 fishB blind
";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn eval_perfect_detections_score_one() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.txt", GT);
    let dets: String = GT
        .lines()
        .map(|l| format!("{} 0.9\n", l.split_whitespace().take(6).collect::<Vec<_>>().join(" ")))
        .collect();
    let dets = write(tmp.path(), "dets.txt", &dets);
    assert_eq!(map_of(&ok(&["eval", "--dets", &dets, "--gt", &gt])), 1.0);
}

#[test]
fn eval_without_detections_scores_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.txt", GT);
    let dets = write(tmp.path(), "dets.txt", "");
    let report = ok(&["eval", "--dets", &dets, "--gt", &gt]);
    assert_eq!(map_of(&report), 0.0);
    assert!(report.contains("class head gt 2 det 0 tp 0 fp 0 fn 2"));
    assert!(report.contains("class body gt 1 det 0 tp 0 fp 0 fn 1"));
}

#[test]
fn eval_hand_case_gives_half() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.txt", "i c 10 10 10 10 f\n");
    let dets = write(tmp.path(), "dets.txt", "i c 10 10 10 10 0.4\ni c 100 100 10 10 0.9\n");
    let report = ok(&["eval", "--dets", &dets, "--gt", &gt]);
    assert_eq!(map_of(&report), 0.5);
    assert!(report.contains("tp 1 fp 1 fn 0"));
}

#[test]
fn eval_parse_error_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = write(tmp.path(), "gt.txt", GT);
    let dets = write(tmp.path(), "dets.txt", "img1 head 50 50 20 20 0.9\nimg1 head fifty 50 20 20 0.9\n");
    let out = flatpart(&["eval", "--dets", &dets, "--gt", &gt]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dets.txt:2:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_per_fold_reports_each_fold() {
    let tmp = tempfile::tempdir().unwrap();
    let gt: String = (0..10).map(|i| format!("img{i} head 50 50 20 20 fish{i}\n")).collect();
    let gt = write(tmp.path(), "gt.txt", &gt);
    let dets = write(tmp.path(), "dets.txt", "img0 head 50 50 20 20 0.9\n");
    let report = ok(&["eval", "--dets", &dets, "--gt", &gt, "--per-fold", "--folds", "5", "--seed", "3"]);
    assert_eq!(report.lines().filter(|l| l.starts_with("fold ")).count(), 5);
    assert!(report.lines().all(|l| !l.starts_with("fold ") || l.ends_with("identities 2 records 2")));
    let mean: f64 = report.lines().find_map(|l| l.strip_prefix("mean_map ")).unwrap().parse().unwrap();
    assert!((mean - 0.1).abs() < 1e-9);
    let out = flatpart(&["eval", "--dets", &dets, "--gt", &gt, "--per-fold"]);
    assert_eq!(code(&out), 2);
}

/// One aligned fish mask per id, filling most of a 200x100 image with the head on the left.
fn aligned_dir(dir: &Path, ids: &[&str]) {
    std::fs::create_dir_all(dir).unwrap();
    let m = BinaryMask::from_fn(200, 100, |x, y| {
        let (u, v) = ((x as f64 - 100.0) / 90.0, (y as f64 - 50.0) / (40.0 - 20.0 * x as f64 / 200.0));
        u * u + v * v <= 1.0
    });
    for id in ids {
        write_mask(&m, &dir.join(format!("{id}_mask.png"))).unwrap();
    }
}

fn heat_values(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip_while(|l| l.split_whitespace().any(|t| t.parse::<f64>().is_err()))
        .flat_map(|l| l.split_whitespace().map(|t| t.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect()
}

#[test]
fn heatmap_single_box_peaks_at_one() {
    let tmp = tempfile::tempdir().unwrap();
    aligned_dir(&tmp.path().join("a"), &["img1"]);
    let gt = write(tmp.path(), "gt.txt", "img1 head 40 50 20 20 fishA\n");
    ok(&["heatmap", "--gt", &gt, "--aligned", s(&tmp.path().join("a")), "--out", s(&tmp.path().join("h"))]);
    let v = heat_values(&tmp.path().join("h/heatmap_ocular.txt"));
    assert!(!v.is_empty());
    assert_eq!(v.iter().copied().fold(f64::MIN, f64::max), 1.0);
    assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    assert!(tmp.path().join("h/heatmap_ocular.png").is_file());
    assert!(!tmp.path().join("h/heatmap_blind.txt").exists());
}

#[test]
fn heatmap_splits_sides_and_repeats_itself() {
    let tmp = tempfile::tempdir().unwrap();
    aligned_dir(&tmp.path().join("a"), &["img1", "img2"]);
    let gt = write(tmp.path(), "gt.txt", "img1 head 40 50 20 20 fishA ocular\nimg2 body 100 50 30 20 fishB blind\n");
    for run in ["h1", "h2"] {
        ok(&["heatmap", "--gt", &gt, "--aligned", s(&tmp.path().join("a")), "--out", s(&tmp.path().join(run))]);
    }
    let names: Vec<String> = files(&tmp.path().join("h1")).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["heatmap_blind.png", "heatmap_blind.txt", "heatmap_ocular.png", "heatmap_ocular.txt"]);
    assert_eq!(files(&tmp.path().join("h1")), files(&tmp.path().join("h2")));
}

#[test]
fn config_round_trips_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let defaults = ok(&["config"]);
    let path = write(tmp.path(), "run.conf", &defaults);
    assert_eq!(ok(&["config", "--config", &path]), defaults);

    let edited = defaults.replace("augment.count = 100", "augment.count = 7").replace("seed = none", "seed = 4");
    assert_ne!(edited, defaults);
    let path = write(tmp.path(), "edited.conf", &edited);
    let shown = ok(&["config", "--config", &path, "--seed", "9"]);
    assert!(shown.contains("augment.count = 7"));
    assert!(shown.contains("seed = 9"));
}

#[test]
fn config_file_errors_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(tmp.path(), "bad.conf", "augment.scale_min = 2.0\naugment.scale_max = 1.0\n");
    assert_eq!(code(&flatpart(&["config", "--config", &path])), 2);
    let path = write(tmp.path(), "unknown.conf", "no.such.key = 1\n");
    let out = flatpart(&["config", "--config", &path]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn seed_from_config_file_drives_augment() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("s"), "9", "1", "1");
    let conf = write(tmp.path(), "c.conf", "seed = 7\naugment.count = 4\n");
    let (patches, fish) = (tmp.path().join("s/patches"), tmp.path().join("s/fish"));
    let run = |out: &str, extra: &[&str]| {
        let out = tmp.path().join(out);
        let mut args = vec!["augment", "--config", &conf, "--patches", s(&patches), "--fish", s(&fish), "--out", s(&out)];
        args.extend_from_slice(extra);
        ok(&args);
    };
    run("a", &[]);
    run("b", &["--seed", "7", "--count", "4"]);
    run("c", &["--seed", "8"]);
    let manifest = |d: &str| std::fs::read(tmp.path().join(d).join("manifest.jsonl")).unwrap();
    assert_eq!(manifest("a"), manifest("b"));
    assert_ne!(manifest("a"), manifest("c"));
    assert_eq!(String::from_utf8(manifest("a")).unwrap().lines().count(), 4);
}
