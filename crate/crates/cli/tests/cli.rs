//! End-to-end checks of the binary: table shapes, class output,
//! determinism across runs and worker counts, checkpoint reuse, and exit
//! codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use iposets::format::parse_line;
use iposets::iso::IsoClassStore;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iposets"))
        .args(args)
        .env_remove("IPOSETS_MEMO_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "command {args:?} failed: {out:?}");
    String::from_utf8(out.stdout).unwrap()
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("iposets-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn counts_gpi_table_rows() {
    let text = stdout(&["counts", "--table", "gpi", "--n", "5"]);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["n", "P", "SP", "GP", "IP", "ICI", "GPI"]);
    let last: Vec<&str> = text.lines().last().unwrap().split_whitespace().collect();
    assert_eq!(last, ["5", "63", "48", "63", "4068", "3030", "2980"]);
}

#[test]
fn counts_split_wink_triangle() {
    let text = stdout(&["counts", "--table", "split", "--mode", "wink", "--n", "4"]);
    assert!(text.starts_with("GPWI(4)"));
    let row3: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with('3'))
        .unwrap()
        .split_whitespace()
        .collect();
    assert_eq!(row3, ["3", "9", "0"]);
    let row2: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with('2'))
        .unwrap()
        .split_whitespace()
        .collect();
    assert_eq!(row2, ["2", "10", "6", "0"]);
}

#[test]
fn gen_gp_empty_iposet() {
    let text = stdout(&["gen", "gp", "--n", "0"]);
    assert_eq!(text, "# n=0 k=0 l=0 classes=1\n0 0 0\n");
}

#[test]
fn gen_gp_classes_reload() {
    let text = stdout(&["gen", "gp", "--n", "3"]);
    let store = IsoClassStore::new();
    let mut total = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let ip = parse_line(line).unwrap();
        assert!(store.push(ip), "emitted classes must be pairwise distinct");
        total += 1;
    }
    assert_eq!(total, 74);
}

#[test]
fn gen_csv_and_worker_determinism() {
    let a = stdout(&["gen", "gp", "--n", "4", "--format", "csv", "--workers", "1"]);
    let b = stdout(&["gen", "gp", "--n", "4", "--format", "csv", "--workers", "2"]);
    assert_eq!(a, b);
    assert!(a.starts_with("n,k,l,count\n"));
    assert!(a.contains("4,0,0,16\n"));
    let t1 = stdout(&["counts", "--table", "discrete", "--n", "8"]);
    let t2 = stdout(&["counts", "--table", "discrete", "--n", "8"]);
    assert_eq!(t1, t2);
    assert!(t1.contains("300969"));
}

#[test]
fn closure_sp_of_singleton() {
    let dir = tmp_dir("gens");
    std::fs::create_dir_all(&dir).unwrap();
    let gens = dir.join("gens.txt");
    std::fs::write(&gens, "1 0 0\n").unwrap();
    let text = stdout(&[
        "closure",
        "sp",
        "--gens",
        gens.to_str().unwrap(),
        "--max-n",
        "5",
    ]);
    let counts: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(counts, ["1", "1", "2", "5", "15", "48"]);
    // Empty posets are rejected as generators.
    std::fs::write(&gens, "0 0 0\n").unwrap();
    assert_eq!(
        run(&[
            "closure",
            "sp",
            "--gens",
            gens.to_str().unwrap(),
            "--max-n",
            "3"
        ])
        .status
        .code(),
        Some(1)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn closure_sp_of_interval_orders() {
    // Seeding the closure with every interval order gives the
    // series-parallel combinations of interval orders.
    let dir = tmp_dir("iogens");
    std::fs::create_dir_all(&dir).unwrap();
    let gens = dir.join("gens.txt");
    let mut lines = String::new();
    for n in 1..=5 {
        for p in iposets::enumerate::all_posets(n) {
            if p.classify().is_interval {
                lines.push_str(&iposets::format::to_line(&p));
                lines.push('\n');
            }
        }
    }
    std::fs::write(&gens, lines).unwrap();
    let text = stdout(&[
        "closure",
        "sp",
        "--gens",
        gens.to_str().unwrap(),
        "--max-n",
        "5",
    ]);
    let counts: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(counts, ["1", "1", "2", "5", "16", "59"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn memo_dir_reuse() {
    let dir = tmp_dir("memo");
    let dir_s = dir.to_str().unwrap();
    let first = stdout(&["gen", "gp", "--n", "3", "--memo-dir", dir_s]);
    assert!(dir.join("g_3_0_1.txt").exists());
    assert!(dir.join("g_2_0_0.txt").exists());
    let second = stdout(&["gen", "gp", "--n", "3", "--memo-dir", dir_s]);
    assert_eq!(first, second);
    // Winkowski cells land in their own files alongside the gp ones.
    let wink = stdout(&["gen", "wink", "--n", "3", "--memo-dir", dir_s]);
    assert!(dir.join("w_3_1_1.txt").exists());
    assert_eq!(
        wink,
        stdout(&["gen", "wink", "--n", "3", "--memo-dir", dir_s])
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn forbidden_search_small() {
    let text = stdout(&["forbidden", "--max-n", "6"]);
    assert!(text.starts_with("# minimal forbidden substructures up to n=6: 5\n"));
    let classes: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(classes.len(), 5);
    for line in classes {
        let ip = parse_line(line).unwrap();
        assert_eq!(ip.n(), 6);
    }
}

#[test]
fn verify_fixtures_passes() {
    let out = run(&["verify", "--against", "fixtures"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 13);
    assert!(text.lines().all(|l| l.starts_with("ok")));
}

#[test]
fn exit_codes() {
    // Usage errors exit 1.
    assert_eq!(run(&["counts", "--table", "gpi"]).status.code(), Some(1));
    assert_eq!(run(&["gen", "gp", "--n", "99"]).status.code(), Some(1));
    assert_eq!(
        run(&["gen", "gp", "--n", "2", "--k", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(
        run(&["counts", "--table", "gpi", "--n", "2", "--format", "lines"])
            .status
            .code(),
        Some(1)
    );
    // Help is not an error.
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn memo_dir_from_environment() {
    let dir = tmp_dir("envmemo");
    let out = Command::new(env!("CARGO_BIN_EXE_iposets"))
        .args(["gen", "gp", "--n", "2"])
        .env("IPOSETS_MEMO_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("g_2_0_0.txt").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_file_matches_stdout() {
    let dir = tmp_dir("out");
    std::fs::create_dir_all(&dir).unwrap();
    // Table output is deterministic, so the file must equal stdout bytes.
    let table = dir.join("table.txt");
    let direct = stdout(&["counts", "--table", "discrete", "--n", "6"]);
    let _ = stdout(&[
        "counts",
        "--table",
        "discrete",
        "--n",
        "6",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(direct, std::fs::read_to_string(&table).unwrap());
    // Class output is stable as a set of isomorphism classes;
    // representatives may vary between parallel runs.
    let classes = dir.join("classes.txt");
    let direct = stdout(&["gen", "posets", "--n", "4"]);
    let _ = stdout(&[
        "gen",
        "posets",
        "--n",
        "4",
        "--out",
        classes.to_str().unwrap(),
    ]);
    let via_file = std::fs::read_to_string(&classes).unwrap();
    let store = IsoClassStore::new();
    for line in via_file.lines().filter(|l| !l.starts_with('#')) {
        assert!(store.push(parse_line(line).unwrap()));
    }
    assert_eq!(store.len(), 16);
    for line in direct.lines().filter(|l| !l.starts_with('#')) {
        assert!(store.contains_isomorphic(&parse_line(line).unwrap()));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
