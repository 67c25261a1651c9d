use std::path::PathBuf;
use std::process::{Command, Output};

use nsgate::elements::Circuit;
use nsgate::nsgate::NsGateKind;

fn nsgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsgate"))
        .args(args)
        .env_remove("NSGATE_WORKERS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nsgate-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_documents_units() {
    let out = nsgate(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("radians"));
    assert!(text.contains("half a wavelength is a phase of pi"));
    for sub in [
        "success-sweep",
        "fidelity-sweep",
        "phase-sweep",
        "compound",
        "qfi",
        "dump-circuit",
        "selftest",
    ] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn bad_arguments_exit_2_with_usage() {
    for args in [
        &["frobnicate"][..],
        &["fidelity-sweep", "--points", "many"],
        &["compound", "--gate", "neither"],
        &[],
    ] {
        let out = nsgate(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("Usage"),
            "{args:?}"
        );
    }
    for args in [
        &[
            "fidelity-sweep",
            "--param",
            "angle9",
            "--points",
            "3",
            "--samples",
            "10",
        ][..],
        &[
            "phase-sweep",
            "--param",
            "angle1",
            "--points",
            "3",
            "--samples",
            "10",
        ],
        &[
            "compound",
            "--radii",
            "0:1",
            "--vectors",
            "2",
            "--states",
            "2",
        ],
        &["compound", "--radii", "0:1:2", "--vectors", "0"],
        &[
            "fidelity-sweep",
            "--points",
            "3",
            "--samples",
            "10",
            "--plot-script",
            "x.gp",
        ],
        &["qfi", "--samples", "10", "--workers", "0"],
    ] {
        let out = nsgate(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn runtime_failures_exit_1() {
    let missing = scratch("no/such/dir/out.csv");
    let out = nsgate(&[
        "success-sweep",
        "--points",
        "3",
        "--out",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let bad = scratch("bad-circuit.txt");
    std::fs::write(&bad, "modes = 3\nelement = mirror modes=1\n").unwrap();
    let out = nsgate(&["dump-circuit", "--circuit", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn fidelity_sweep_example_has_one_row_per_point() {
    let out = nsgate(&[
        "fidelity-sweep",
        "--gate",
        "klm",
        "--param",
        "angle2",
        "--min",
        "-0.5",
        "--max",
        "0.5",
        "--points",
        "41",
        "--samples",
        "2000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let header: Vec<&str> = csv.lines().filter(|l| l.starts_with('#')).collect();
    assert!(header
        .iter()
        .any(|l| l.contains("nsgate ") && l.contains(env!("CARGO_PKG_VERSION"))));
    assert!(header.iter().any(|l| l.contains("seed=7")));
    assert!(header.iter().any(|l| l.starts_with("# seed: 7")));
    assert_eq!(
        csv.lines().find(|l| !l.starts_with('#')).unwrap(),
        nsgate::cli::SWEEP_HEADER
    );
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 41);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("klm,angle2,") && r.ends_with(",2000")));
    let zero = rows
        .iter()
        .find(|r| r.split(',').nth(2) == Some("0"))
        .unwrap();
    assert_eq!(
        zero.split(',')
            .nth(3)
            .unwrap()
            .parse::<f64>()
            .unwrap()
            .round(),
        1.0
    );
}

#[test]
fn compound_example_has_one_row_per_radius() {
    let out = nsgate(&[
        "compound",
        "--gate",
        "reverse",
        "--radii",
        "0:2:21",
        "--vectors",
        "20",
        "--states",
        "10",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.contains(nsgate::cli::COMPOUND_HEADER));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 21);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[..2], ["reverse", "0"]);
    assert_eq!(first[5..], ["20", "10"]);
    assert!(
        first[2..5]
            .iter()
            .all(|v| v.parse::<f64>().unwrap() < 1e-10),
        "{}",
        rows[0]
    );
}

#[test]
fn qfi_and_sweeps_cover_both_gates_by_default() {
    let qfi = stdout(&nsgate(&["qfi", "--samples", "50"]));
    assert!(qfi.contains(nsgate::cli::QFI_HEADER));
    assert_eq!(data_rows(&qfi).len(), 16);
    assert!(data_rows(&qfi)
        .iter()
        .any(|r| r.starts_with("reverse,phase5,")));

    let phases = stdout(&nsgate(&[
        "phase-sweep",
        "--points",
        "3",
        "--samples",
        "20",
    ]));
    assert_eq!(data_rows(&phases).len(), 2 * 5 * 3);
    assert!(phases.contains("min=-3.141592653589793 max=3.141592653589793"));

    let success = stdout(&nsgate(&["success-sweep", "--points", "5"]));
    let rows = data_rows(&success);
    assert_eq!(rows.len(), 2 * 3 * 5);
    for row in rows.iter().filter(|r| r.split(',').nth(2) == Some("0")) {
        let p: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }
}

#[test]
fn dump_circuit_round_trips() {
    for kind in NsGateKind::ALL {
        let out = nsgate(&["dump-circuit", "--gate", kind.as_str()]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert_eq!(&Circuit::parse(&text).unwrap(), kind.circuit());

        let file = scratch(&format!("{kind}.txt"));
        std::fs::write(&file, &text).unwrap();
        let again = nsgate(&["dump-circuit", "--circuit", file.to_str().unwrap()]);
        assert_eq!(stdout(&again), text);
    }
    let klm = stdout(&nsgate(&["dump-circuit"]));
    assert!(klm.contains("form=arccos(sqrt(eta1))"));
    assert_eq!(klm.matches("element = bs").count(), 3);
    assert_eq!(klm.matches("element = phase").count(), 5);
}

#[test]
fn plot_script_and_timing() {
    let csv = scratch("sweep.csv");
    let gp = scratch("sweep.gp");
    let out = nsgate(&[
        "fidelity-sweep",
        "--gate",
        "klm",
        "--points",
        "3",
        "--samples",
        "10",
        "--timing",
        "--out",
        csv.to_str().unwrap(),
        "--plot-script",
        gp.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .contains("# wall_clock_s: "));
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains(csv.to_str().unwrap()));
    assert!(script.contains("plot "));
}

#[test]
fn worker_count_from_environment() {
    let base = nsgate(&["qfi", "--gate", "klm", "--samples", "200"]);
    let env = Command::new(env!("CARGO_BIN_EXE_nsgate"))
        .args(["qfi", "--gate", "klm", "--samples", "200"])
        .env("NSGATE_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(base.stdout, env.stdout);
}

#[test]
fn selftest_passes() {
    let out = nsgate(&["selftest"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
}
