use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tempfile::TempDir;

fn aeds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aeds")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn iid_bytes(weights: &[f64], n: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let d = WeightedIndex::new(weights).unwrap();
    (0..n).map(|_| d.sample(&mut rng) as u8).collect()
}

fn roundtrip(dir: &TempDir, data: &[u8], extra: &[&str]) -> Output {
    let (input, packed, back) = (p(dir, "in.bin"), p(dir, "in.aedc"), p(dir, "out.bin"));
    std::fs::write(&input, data).unwrap();
    let mut args = vec!["compress", "--input", s(&input), "--output", s(&packed)];
    args.extend_from_slice(extra);
    let c = aeds(&args);
    assert!(c.status.success(), "compress {extra:?}: {}", stderr(&c));
    let d = aeds(&["decompress", "--input", s(&packed), "--output", s(&back)]);
    assert!(d.status.success(), "decompress {extra:?}: {}", stderr(&d));
    assert_eq!(std::fs::read(&back).unwrap(), data, "{extra:?}");
    c
}

const SIX: [f64; 6] = [0.35, 0.15, 0.15, 0.15, 0.1, 0.1];

#[test]
fn every_codec_roundtrips() {
    let dir = TempDir::new().unwrap();
    let data = iid_bytes(&SIX, 50_000, 1);
    for (codec, n) in [
        ("huffman", "1"),
        ("type1", "2"),
        ("type1", "5"),
        ("type2", "5"),
        ("saeds-case1", "64"),
        ("saeds-case2", "40"),
        ("saeds-case3", "64"),
        ("large-n", "300"),
        ("tans", "256"),
    ] {
        roundtrip(&dir, &data, &["--codec", codec, "--states", n]);
    }
}

#[test]
fn arbitrary_bytes_roundtrip() {
    let dir = TempDir::new().unwrap();
    let mut rng = StdRng::seed_from_u64(2);
    for len in [1usize, 2, 3, 255, 4096] {
        let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        roundtrip(&dir, &data, &["--codec", "tans", "--states", "512"]);
    }
    roundtrip(&dir, &[7u8; 1000], &[]);
    roundtrip(&dir, b"abracadabra", &["--codec", "saeds-case3", "--states", "16"]);
}

#[test]
fn multi_block_file_roundtrips() {
    let dir = TempDir::new().unwrap();
    let data = iid_bytes(&[5.0, 3.0, 1.0, 1.0, 0.5], (1 << 20) * 2 + 12_345, 3);
    roundtrip(&dir, &data, &["--codec", "large-n", "--states", "128"]);
}

#[test]
fn type2_rate_on_six_symbol_source() {
    let dir = TempDir::new().unwrap();
    let n = 1_000_000;
    let data = iid_bytes(&SIX, n, 4);
    let out = stdout(&roundtrip(&dir, &data, &["--codec", "type2"]));
    assert!(out.contains("codec: type2"), "{out}");
    let size = std::fs::metadata(p(&dir, "in.aedc")).unwrap().len();
    let rate = 8.0 * size as f64 / n as f64;
    let target = 2.5 - 0.0544;
    assert!((rate - target).abs() <= 0.01 * target, "rate {rate} vs {target}");
}

#[test]
fn empty_file_gives_header_only_container() {
    let dir = TempDir::new().unwrap();
    roundtrip(&dir, &[], &[]);
    let size = std::fs::metadata(p(&dir, "in.aedc")).unwrap().len();
    // magic, version, mode, two zero counts, digest
    assert_eq!(size, 4 + 1 + 1 + 2 + 32);
}

#[test]
fn uniform_bytes_fall_back_to_huffman() {
    let dir = TempDir::new().unwrap();
    let data: Vec<u8> = (0..256 * 64).map(|i| (i % 256) as u8).collect();
    let out = stdout(&roundtrip(&dir, &data, &["--codec", "type1", "--states", "2"]));
    assert!(out.contains("codec: huffman (requested type1)"), "{out}");
    assert!(out.contains("fallback:"), "{out}");
}

#[test]
fn tampered_container_fails() {
    let dir = TempDir::new().unwrap();
    let data = iid_bytes(&SIX, 20_000, 5);
    roundtrip(&dir, &data, &["--codec", "type2"]);
    let bytes = std::fs::read(p(&dir, "in.aedc")).unwrap();
    let len = bytes.len();
    for pos in [len / 2, len - 40, len - 1] {
        let mut bad = bytes.clone();
        bad[pos] ^= 0x24;
        let t = p(&dir, "bad.aedc");
        std::fs::write(&t, &bad).unwrap();
        let o = aeds(&["decompress", "--input", s(&t), "--output", s(&p(&dir, "bad.out"))]);
        assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
        assert!(!p(&dir, "bad.out").exists());
    }
    let t = p(&dir, "short.aedc");
    std::fs::write(&t, &bytes[..len - 10]).unwrap();
    let o = aeds(&["decompress", "--input", s(&t), "--output", s(&p(&dir, "bad.out"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn side_table_is_hash_checked() {
    let dir = TempDir::new().unwrap();
    let a = p(&dir, "a.bin");
    let b = p(&dir, "b.bin");
    std::fs::write(&a, iid_bytes(&SIX, 10_000, 6)).unwrap();
    std::fs::write(&b, iid_bytes(&[1.0, 1.0, 2.0], 10_000, 7)).unwrap();
    for (f, t, c) in [(&a, "a.tbl", "a.aedc"), (&b, "b.tbl", "b.aedc")] {
        let o = aeds(&["compress", "--input", s(f), "--output", s(&p(&dir, c)), "--table-out", s(&p(&dir, t))]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let out = p(&dir, "a.out");
    let ok = aeds(&["decompress", "--input", s(&p(&dir, "a.aedc")), "--output", s(&out), "--table", s(&p(&dir, "a.tbl"))]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&a).unwrap());

    let wrong = aeds(&["decompress", "--input", s(&p(&dir, "a.aedc")), "--output", s(&out), "--table", s(&p(&dir, "b.tbl"))]);
    assert_eq!(wrong.status.code(), Some(3));
    assert!(stderr(&wrong).contains("hash mismatch"), "{}", stderr(&wrong));

    let missing = aeds(&["decompress", "--input", s(&p(&dir, "a.aedc")), "--output", s(&out)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(aeds(&["compress", "--bogus"]).status.code(), Some(2));
    assert_eq!(aeds(&["figures", "--figure", "fig99"]).status.code(), Some(2));
    let o = aeds(&["compress", "--input", s(&p(&dir, "absent")), "--output", s(&p(&dir, "x"))]);
    assert_eq!(o.status.code(), Some(3));
    let junk = p(&dir, "junk");
    std::fs::write(&junk, b"not a container").unwrap();
    let o = aeds(&["decompress", "--input", s(&junk), "--output", s(&p(&dir, "y"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bad magic"));
    let o = aeds(&["build-table", "--probs", "0.5,0.5", "--codec", "saeds-case3", "--states", "6", "--output", s(&p(&dir, "t"))]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

fn figure(id: &str) -> Vec<Vec<String>> {
    let o = aeds(&["figures", "--figure", id]);
    assert!(o.status.success(), "{id}: {}", stderr(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let width = r.headers().unwrap().len();
    let rows: Vec<Vec<String>> = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    assert!(rows.iter().all(|row| row.len() == width));
    rows
}

fn num(x: &str) -> f64 {
    x.parse().unwrap()
}

#[test]
fn table1_figure() {
    let rows = figure("table1");
    assert_eq!(rows.len(), 37);
    let get = |m: usize| rows.iter().find(|r| r[0] == m.to_string()).unwrap().clone();
    assert_eq!(get(80)[1..3], ["64", "16"]);
    assert_eq!(get(73)[1..3], ["57", "16"]);
    assert_eq!(get(96)[1..3], ["64", "32"]);
    assert_eq!(get(109)[1..3], ["77", "32"]);
}

#[test]
fn delta_figures() {
    let rows = figure("delta-type1");
    let r = rows.iter().find(|r| r[0] == "0.8").unwrap();
    assert!((num(&r[1]) - 0.24444).abs() < 5e-5);
    for r in &rows {
        assert!((num(&r[1]) - num(&r[6])).abs() < 1e-9, "closed form vs solver at {}", r[0]);
    }
    let rows = figure("delta-type2");
    let r = rows.iter().find(|r| r[0] == "0.65").unwrap();
    assert!((num(&r[1]) - 0.0544).abs() < 5e-4);
    for r in &rows {
        assert!((num(&r[1]) - num(&r[3])).abs() < 1e-9, "closed form vs solver at {}", r[0]);
    }
}

#[test]
fn binary_figure_at_one_half() {
    let rows = figure("binary");
    assert_eq!(rows[0][0], "0.5");
    assert!(rows[0][2..].iter().all(|v| num(v).abs() < 1e-12), "{:?}", rows[0]);
}

#[test]
fn all_figures_are_deterministic() {
    for id in ["delta-type1", "delta-type2", "worst-case", "uniform-n2", "uniform-nsweep", "uniform-type2", "binary", "table1", "largeN-sweep"] {
        let a = aeds(&["figures", "--figure", id]).stdout;
        let b = aeds(&["figures", "--figure", id]).stdout;
        assert!(!a.is_empty());
        assert_eq!(a, b, "{id}");
    }
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "u.csv");
    assert!(aeds(&["figures", "--figure", "uniform-n2", "--csv", s(&f)]).status.success());
    let text = std::fs::read_to_string(&f).unwrap();
    assert!(text.starts_with("m,mu_huffman,m_r,m_l,mu,delta_hat\n"));
    assert_eq!(text.lines().count(), 256);
}

#[test]
fn build_table_and_analyze() {
    let dir = TempDir::new().unwrap();
    let t = p(&dir, "t.bin");
    let probs = "0.35,0.15,0.15,0.15,0.1,0.1";
    let o = aeds(&["build-table", "--probs", probs, "--codec", "saeds-case3", "--states", "64", "--output", s(&t)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("table hash: "));
    let csv_path = p(&dir, "bounds.csv");
    let o = aeds(&["analyze", "--table", s(&t), "--probs", probs, "--samples", "20000", "--seed", "9", "--csv", s(&csv_path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("L (encoder view)") && out.contains("monte carlo"), "{out}");
    let bounds = std::fs::read_to_string(&csv_path).unwrap();
    assert!(bounds.starts_with("bound,left,right,slack,pass\n"));
    assert!(bounds.lines().any(|l| l.starts_with("case3") && l.ends_with("true")), "{bounds}");

    let again = aeds(&["analyze", "--table", s(&t), "--probs", probs, "--samples", "20000", "--seed", "9"]);
    assert_eq!(stdout(&again), out);

    let o = aeds(&["analyze", "--codec", "type2", "--probs", probs, "--samples", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mismatch = aeds(&["analyze", "--table", s(&t), "--probs", "0.5,0.5", "--samples", "0"]);
    assert_eq!(mismatch.status.code(), Some(3));
}
