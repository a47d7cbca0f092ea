use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netsurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netsurv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const MODEL: &str = "\
# two blocks, local outbreak from t = 8
n = 40
sizes = 20 20
P = 0.4 0.05 0.05 0.4
delta = 0.5 0.5
t_star = 8
P_star = 0.8 0.05 0.05 0.4
T = 12
";

fn simulate_into(dir: &Path, seed: &str) -> (String, String) {
    let params = dir.join("model.txt");
    fs::write(&params, MODEL).unwrap();
    let graph = dir.join(format!("graph-{seed}.txt"));
    let labels = dir.join(format!("labels-{seed}.txt"));
    let out = netsurv(&[
        "simulate",
        "--params",
        params.to_str().unwrap(),
        "--seed",
        seed,
        "--out",
        graph.to_str().unwrap(),
        "--labels-out",
        labels.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    (
        graph.to_str().unwrap().to_owned(),
        labels.to_str().unwrap().to_owned(),
    )
}

#[test]
fn version_lists_defaults() {
    let out = netsurv(&["--version"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("lambda=0.2"));
    assert!(text.contains("threshold=0.75"));
    assert!(text.contains("cap=5000"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&netsurv(&[])), 1);
    assert_eq!(code(&netsurv(&["simulate"])), 1);
    assert_eq!(code(&netsurv(&["arl", "--bogus"])), 1);
    assert_eq!(
        code(&netsurv(&[
            "monitor", "--graph", "g", "--phase1", "5", "--out", "o"
        ])),
        1
    );
    assert_eq!(code(&netsurv(&["--help"])), 0);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("bad.txt");
    fs::write(
        &params,
        "n = 4\nsizes = 2 2\nP = 0.1 0.2 0.3\ndelta = 0.5 0.5\n",
    )
    .unwrap();
    let out = netsurv(&[
        "simulate",
        "--params",
        params.to_str().unwrap(),
        "--T",
        "3",
        "--out",
        dir.path().join("g").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error:"));

    let missing = dir.path().join("nope.txt");
    let out = netsurv(&[
        "fit",
        "--graph",
        missing.to_str().unwrap(),
        "--labels",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);

    let out = netsurv(&["arl", "--sim", "1", "--reps", "2"]);
    assert_eq!(code(&out), 2, "scenario 1 needs --eps");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = simulate_into(dir.path(), "7");
    let first = fs::read(&a).unwrap();
    fs::remove_file(&a).unwrap();
    let (a, _) = simulate_into(dir.path(), "7");
    assert_eq!(first, fs::read(&a).unwrap());
    let (b, _) = simulate_into(dir.path(), "8");
    assert_ne!(first, fs::read(&b).unwrap());
    assert!(String::from_utf8(first).unwrap().starts_with("# n=40 T=12"));
}

#[test]
fn detect_recovers_planted_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, planted) = simulate_into(dir.path(), "3");
    let found = dir.path().join("found.txt");
    let out = netsurv(&[
        "detect",
        "--graph",
        &graph,
        "--k",
        "2",
        "--last",
        "7",
        "--out",
        found.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let parse = |p: &str| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| l.split_whitespace().nth(1).unwrap().to_owned())
            .collect()
    };
    let truth = parse(&planted);
    let est = parse(found.to_str().unwrap());
    assert_eq!(truth.len(), 40);
    // equal up to swapping the two labels
    let same = truth.iter().zip(&est).filter(|(a, b)| a == b).count();
    assert!(same == 40 || same == 0, "agreement {same}/40");
}

#[test]
fn fit_prints_community_and_rate_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, labels) = simulate_into(dir.path(), "5");
    let out = netsurv(&["fit", "--graph", &graph, "--labels", &labels, "--t", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text
        .starts_with("community,size,pi_hat,theta_min,theta_max,theta_sd,degenerate\n1,20,0.5,"));
    assert!(text.contains("\nr,s,p_hat\n1,1,"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("1,2,") || l.starts_with("2,1,"))
            .count(),
        2
    );
    let out = netsurv(&["fit", "--graph", &graph, "--labels", &labels, "--t", "13"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn monitor_writes_charts_and_flags_the_outbreak() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, labels) = simulate_into(dir.path(), "11");
    let out_dir = dir.path().join("charts");
    let out = netsurv(&[
        "monitor",
        "--graph",
        &graph,
        "--labels",
        &labels,
        "--phase1",
        "6",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for stat in ["P1_1", "P1_2", "P2_2", "s1", "s2"] {
        for kind in ["shewhart", "ewma"] {
            let csv = fs::read_to_string(out_dir.join(format!("{stat}-{kind}.csv"))).unwrap();
            assert!(csv.starts_with("t,value,lcl,ucl,signal\n"));
            assert_eq!(csv.lines().count(), 13);
            assert!(out_dir.join(format!("{stat}-{kind}.svg")).exists());
        }
    }
    // doubling the within-block rate of community 1 is impossible to miss
    let signals = fs::read_to_string(out_dir.join("signals.csv")).unwrap();
    assert!(
        signals.lines().any(|l| l.starts_with("8,shewhart,P1_1,")),
        "{signals}"
    );

    let detected = dir.path().join("detected");
    let out = netsurv(&[
        "monitor",
        "--graph",
        &graph,
        "--detect",
        "2",
        "--phase1",
        "6",
        "--sd",
        "pooled",
        "--charts",
        "shewhart",
        "--out",
        detected.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(detected.join("labels.txt").exists());
    assert!(detected.join("s-shewhart.csv").exists());
    assert!(!detected.join("s1-shewhart.csv").exists());
}

#[test]
fn arl_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = netsurv(&[
        "arl",
        "--sim",
        "2",
        "--eps",
        "0.1",
        "--reps",
        "4",
        "--m",
        "30",
        "--workers",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("aarl.csv")).unwrap();
    assert!(csv.starts_with("sim,change,parameter,m,reps,s,P1_1,P1_2,P2_2,"));
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(
        fs::read_to_string(dir.path().join("aarl.txt")).unwrap(),
        stdout(&out)
    );
    // same seed, different worker count
    let again = netsurv(&[
        "arl",
        "--sim",
        "2",
        "--eps",
        "0.1",
        "--reps",
        "4",
        "--m",
        "30",
        "--workers",
        "2",
    ]);
    assert_eq!(stdout(&again), stdout(&out));
}

/// Small deterministic Senate: party-line votes with a few crossovers.
fn write_senate(dir: &Path, congresses: u32) {
    for c in 0..congresses {
        let mut rows = String::from("congress,senator_id,name,party,bill,vote\n");
        for s in 0..8u32 {
            let party = if s < 4 { "D" } else { "R" };
            for b in 0..12u32 {
                let party_line = (b % 3 != 0) as u32;
                let yay = if party_line == 1 { s < 4 } else { true };
                let crossover = (s * 7 + b * 3 + c * 5) % 11 == 0;
                let vote = if yay != crossover { "Yea" } else { "Nay" };
                rows.push_str(&format!(
                    "{},{},Senator {s},{party},{b},{vote}\n",
                    90 + c,
                    1000 + s
                ));
            }
        }
        // an independent who caucuses with the Democrats
        for b in 0..12u32 {
            rows.push_str(&format!(
                "{},2000,Independent,I,{b},{}\n",
                90 + c,
                if b % 2 == 0 { "Yea" } else { "Nay" }
            ));
        }
        fs::write(dir.join(format!("{}.csv", 90 + c)), rows).unwrap();
    }
}

#[test]
fn senate_builds_summary_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes");
    fs::create_dir(&input).unwrap();
    write_senate(&input, 8);
    let caucus = dir.path().join("caucus.csv");
    fs::write(&caucus, "senator_id,party\n2000,D\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = netsurv(&[
        "senate",
        "--input",
        input.to_str().unwrap(),
        "--m",
        "5",
        "--caucus",
        caucus.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "congress,senators,bills,edges");
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("90,9,12,"));
    let chart = fs::read_to_string(out_dir.join("P1_2-ewma.csv")).unwrap();
    assert!(chart.lines().nth(1).unwrap().starts_with("90,"));
    assert!(out_dir.join("s2-shewhart.svg").exists());
    assert!(out_dir.join("signals.csv").exists());

    // without the caucus file the independent is dropped
    let out = netsurv(&[
        "senate",
        "--input",
        input.to_str().unwrap(),
        "--m",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("90,8,12,"));
}
