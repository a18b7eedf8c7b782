//! Golden cases shared by the golden test and the acceptance runner.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    /// Files the command writes, captured after stdout.
    pub files: &'static [&'static str],
}

pub const CASES: &[Case] = &[
    Case {
        name: "gen_k2",
        args: &["gen", "--k", "2", "--n", "10", "--p", "0.2", "--seed", "7"],
        files: &[],
    },
    Case {
        name: "gen_k3_trim",
        args: &[
            "gen", "--k", "3", "--n", "9", "--p", "0.05", "--seed", "3", "--trim", "1", "--out",
            "t.khg",
        ],
        files: &["t.khg"],
    },
    Case {
        name: "verify_h2",
        args: &["verify", "--in", "h2.khg"],
        files: &[],
    },
    Case {
        name: "bis_h2_json",
        args: &["bis", "--in", "h2.khg", "--seed", "5", "--json"],
        files: &[],
    },
    Case {
        name: "bis_h3",
        args: &[
            "bis", "--in", "h3.khg", "--seed", "5", "--trials", "50", "--json", "s.json",
        ],
        files: &["s.json"],
    },
    Case {
        name: "color_h2_json",
        args: &[
            "color", "--in", "h2.khg", "--seed", "9", "--json", "--out", "c.json",
        ],
        files: &["c.json"],
    },
    Case {
        name: "color_h3",
        args: &[
            "color",
            "--in",
            "h3.khg",
            "--seed",
            "9",
            "--retries",
            "5",
            "--out",
            "c.json",
        ],
        files: &["c.json"],
    },
    Case {
        name: "fallback_h3",
        args: &["fallback-color", "--in", "h3.khg", "--seed", "2"],
        files: &[],
    },
    Case {
        name: "exact_alpha_h3",
        args: &[
            "exact", "--in", "h3.khg", "--what", "alpha", "--out", "w.json",
        ],
        files: &["w.json"],
    },
    Case {
        name: "exact_pm_h2",
        args: &["exact", "--in", "h2.khg", "--what", "pm"],
        files: &[],
    },
    Case {
        name: "bound_small",
        args: &["bound", "--k", "2", "--N", "6", "--s", "2", "--p", "0.5"],
        files: &[],
    },
    Case {
        name: "bound_huge",
        args: &[
            "bound", "--k", "3", "--N", "1000000", "--s", "1000", "--p", "0.000001",
        ],
        files: &[],
    },
    Case {
        name: "experiment_bis",
        args: &[
            "experiment",
            "--mode",
            "bis",
            "--k",
            "2,3",
            "--n",
            "20",
            "--d",
            "5",
            "--eps",
            "0.3",
            "--trials",
            "6",
            "--seed",
            "1",
            "--out",
            "t.csv",
            "--summary",
            "s.csv",
        ],
        files: &["t.csv", "s.csv"],
    },
    Case {
        name: "experiment_concentration_json",
        args: &[
            "experiment",
            "--mode",
            "concentration",
            "--k",
            "2",
            "--n",
            "16",
            "--d",
            "4",
            "--q",
            "3",
            "--trials",
            "4",
            "--seed",
            "2",
            "--format",
            "json",
            "--out",
            "t.json",
        ],
        files: &["t.json"],
    },
    Case {
        name: "experiment_bound",
        args: &[
            "experiment",
            "--mode",
            "bound",
            "--k",
            "2",
            "--n",
            "6",
            "--s",
            "2",
            "--p",
            "0.4,0.6",
            "--trials",
            "5",
            "--seed",
            "3",
            "--out",
            "t.csv",
        ],
        files: &["t.csv"],
    },
    Case {
        name: "experiment_color",
        args: &[
            "experiment",
            "--mode",
            "color",
            "--k",
            "2",
            "--n",
            "24",
            "--d",
            "4",
            "--trials",
            "3",
            "--seed",
            "4",
            "--out",
            "t.csv",
        ],
        files: &["t.csv"],
    },
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn run_case(case: &Case) -> String {
    let dir = tempfile::tempdir().unwrap();
    for input in ["h2.khg", "h3.khg"] {
        fs::copy(
            golden_dir().join("inputs").join(input),
            dir.path().join(input),
        )
        .unwrap();
    }
    let o = Command::new(env!("CARGO_BIN_EXE_balhyp"))
        .args(case.args)
        .current_dir(dir.path())
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert!(
        o.status.success(),
        "{}: {}",
        case.name,
        String::from_utf8_lossy(&o.stderr)
    );
    let mut text = format!("== stdout ==\n{}", String::from_utf8(o.stdout).unwrap());
    for f in case.files {
        text.push_str(&format!(
            "== {f} ==\n{}",
            fs::read_to_string(dir.path().join(f)).unwrap()
        ));
    }
    text
}

/// Runs `case` twice and compares with its stored golden.
pub fn check_case(case: &Case) -> Result<(), String> {
    let first = run_case(case);
    if run_case(case) != first {
        return Err(format!("{}: rerun differs", case.name));
    }
    let path = golden_dir().join(format!("{}.golden", case.name));
    match fs::read_to_string(&path) {
        Ok(expected) if expected == first => Ok(()),
        Ok(_) => Err(format!("{}: differs from golden", case.name)),
        Err(_) => Err(format!("{}: missing golden", case.name)),
    }
}
