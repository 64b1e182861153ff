use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn critnet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critnet")).args(args).current_dir(cwd).output().unwrap()
}

const SMALL: &str = "\
run.seed = 7
run.preset = fig5-d10
damage.n_networks = 3
damage.n_ics = 10
damage.t_measure = 20
sweep.n_list = 16,36
sweep.k_start = 1
sweep.k_stop = 3
sweep.k_step = 0.5
";

fn run_small(dir: &Path, out: &str, workers: &str) -> Output {
    fs::write(dir.join("small.conf"), SMALL).unwrap();
    critnet(&["run", "small.conf", "--out", out, "--workers", workers], dir)
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (out, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let o = run_small(dir.path(), out, workers);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["damage.csv", "ks.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(file)).unwrap(), "{file}");
        assert_eq!(a, fs::read(dir.path().join("c").join(file)).unwrap(), "{file}");
    }
    let manifest = fs::read_to_string(dir.path().join("a/manifest.txt")).unwrap();
    assert!(manifest.contains("run.seed = 7"));
    assert!(manifest.contains("damage.n_ics = 10"));
}

#[test]
fn plotdata_writes_one_sorted_file_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_small(dir.path(), "run", "1").status.success());
    let o = critnet(&["plotdata", "run/damage.csv", "--out", "plots"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> =
        fs::read_dir(dir.path().join("plots")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    // Two classes, one damage size, two sizes.
    assert_eq!(names, ["ca_d10_N16.dat", "ca_d10_N36.dat", "rbn_d10_N16.dat", "rbn_d10_N36.dat"]);
    let text = fs::read_to_string(dir.path().join("plots/rbn_d10_N36.dat")).unwrap();
    let ks: Vec<f64> =
        text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(' ').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ks, [1.0, 1.5, 2.0, 2.5, 3.0]);
}

#[test]
fn ks_subcommand_reads_a_damage_table() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_small(dir.path(), "run", "1").status.success());
    let o = critnet(&["ks", "run/damage.csv"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("class,damage_size,ks,dispersion"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn generated_networks_feed_metrics_and_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let g = critnet(
        &["generate", "ca-lattice", "--n", "49", "--rules", "boolean", "--seed", "3", "--out", "ca.net"],
        dir.path(),
    );
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let m = critnet(&["metrics", "ca.net"], dir.path());
    assert!(m.status.success());
    assert_eq!(String::from_utf8(m.stdout).unwrap().lines().count(), 2);
    let t = critnet(&["tasks", "ca.net", "--task", "density", "--n-ics", "20", "--seed", "3"], dir.path());
    assert!(t.status.success(), "{}", String::from_utf8_lossy(&t.stderr));
    let again = critnet(&["tasks", "ca.net", "--task", "density", "--n-ics", "20", "--seed", "3"], dir.path());
    assert_eq!(t.stdout, again.stdout);
}

#[test]
fn configuration_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(critnet(&["run", "fig4-d1"], dir.path()).status.code(), Some(2));
    assert_eq!(critnet(&["run", "no-such-preset", "--seed", "1"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("bad.conf"), "run.seed = 1\nrun.preset = fig4-d1\ndamage.t_measure = soon\n").unwrap();
    let o = critnet(&["run", "bad.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = critnet(&["generate", "rbn-exact", "--n", "4", "--k", "9", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = critnet(&["metrics", "missing.net"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
