use std::path::Path;
use std::process::{Command, Output};

fn magdde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magdde"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("run magdde")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows (after the column line) split on commas.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header_value(text: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

#[test]
fn solve_example1_has_four_intervals_of_21_nodes() {
    let text = stdout(&magdde(&[
        "solve",
        "--problem",
        "example1",
        "--N",
        "20",
        "--M",
        "64",
        "--order",
        "6",
        "--t-final",
        "6.2832",
    ]));
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "interval,node_index,time,component_index,value");
    let data = rows(&text);
    assert_eq!(data.len(), 4 * 21);
    for (k, chunk) in data.chunks(21).enumerate() {
        assert!(chunk.iter().all(|r| r[0] == k.to_string()));
        let nodes: Vec<usize> = chunk.iter().map(|r| r[1].parse().unwrap()).collect();
        assert_eq!(nodes, (0..21).collect::<Vec<_>>());
    }
    // node 0 of the last interval is x(2 pi) = 1
    let last: f64 = data[3 * 21][4].parse().unwrap();
    assert!((last - 1.0).abs() < 1e-6, "{last}");
}

#[test]
fn sir_components_sum_to_one_at_interval_ends() {
    let text = stdout(&magdde(&[
        "solve",
        "--problem",
        "sir",
        "--N",
        "20",
        "--M",
        "20",
        "--order",
        "3",
        "--t-final",
        "10",
    ]));
    let data = rows(&text);
    let ends: Vec<&Vec<String>> = data.iter().filter(|r| r[1] == "0").collect();
    assert_eq!(ends.len(), 30);
    for block in ends.chunks(3) {
        let sum: f64 = block.iter().map(|r| r[4].parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-12, "{sum}");
    }
}

#[test]
fn inadmissible_order_is_a_usage_error() {
    let out = magdde(&["solve", "--problem", "example1", "--order", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("2, 4, 6"), "{msg}");
}

#[test]
fn unknown_parameter_is_a_usage_error() {
    let out = magdde(&["solve", "--problem", "mathieu", "--param", "gamma=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn multipliers_of_mathieu() {
    let text = stdout(&magdde(&[
        "multipliers",
        "--problem",
        "mathieu",
        "--N",
        "30",
        "--M",
        "64",
        "--order",
        "6",
    ]));
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "rank,re,im,modulus");
    let data = rows(&text);
    assert_eq!(data.len(), 2 * 31);
    let moduli: Vec<f64> = data.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(moduli.windows(2).all(|w| w[0] >= w[1]));
    let (re, im): (f64, f64) = (data[0][1].parse().unwrap(), data[0][2].parse().unwrap());
    assert!((re - 0.22751840350292177).hypot(im.abs() - 1.4171751742155307) < 1e-10);
    assert_eq!(header_value(&text, "stability").as_deref(), Some("unstable"));
}

#[test]
fn multipliers_need_a_periodic_problem() {
    let out = magdde(&["multipliers", "--problem", "sir"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_rejects_problems_without_invariant() {
    let out = magdde(&["audit", "--problem", "example1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_reports_conservation() {
    let text = stdout(&magdde(&[
        "audit",
        "--problem",
        "sir",
        "--N",
        "20",
        "--M",
        "20",
        "--t-final",
        "10",
    ]));
    let worst: f64 = header_value(&text, "max_boundary_error").unwrap().parse().unwrap();
    let lowest: f64 = header_value(&text, "min_boundary_component").unwrap().parse().unwrap();
    assert!(worst <= 1e-12);
    assert!(lowest >= -1e-13);
    assert_eq!(rows(&text).len(), 10);
}

fn fitted_slope(text: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix("# fitted_slope = "))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn convergence_slopes() {
    let text = stdout(&magdde(&[
        "convergence",
        "--problem",
        "example1",
        "--order",
        "4",
        "--jobs",
        "2",
    ]));
    assert!((fitted_slope(&text) - 4.0).abs() <= 0.4);
    let text = stdout(&magdde(&[
        "convergence",
        "--problem",
        "nonlinear-scalar",
        "--order",
        "2",
        "--M-list",
        "8,16,32,64",
    ]));
    assert!((fitted_slope(&text) - 2.0).abs() <= 0.4);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "problem = \"mathieu\"\nN = 8\nM = 4\norder = 2\n[param]\nb = 0.1\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let text = stdout(&magdde(&[
        "multipliers",
        "--config",
        cfg,
        "--N",
        "6",
        "--param",
        "b=0.3",
    ]));
    assert_eq!(header_value(&text, "N").as_deref(), Some("6"));
    assert_eq!(header_value(&text, "M").as_deref(), Some("4"));
    assert_eq!(header_value(&text, "order").as_deref(), Some("2"));
    assert_eq!(header_value(&text, "param.b").as_deref(), Some("0.29999999999999999"));
    assert_eq!(rows(&text).len(), 2 * 7);

    std::fs::write(&path, "problem = \"mathieu\"\nsteps = 3\n").unwrap();
    assert_eq!(magdde(&["multipliers", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = magdde(&[
            "solve",
            "--problem",
            "nonlinear-scalar",
            "--N",
            "12",
            "--M",
            "8",
            "--store-steps",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read_to_string(&p).unwrap().replace(p.to_str().unwrap(), "")
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    assert!(Path::new(&dir.path().join("a.csv")).exists());
}
