//! One round-trip through every subcommand with small configs: the wiring
//! check that each experiment family produces a well-formed artifact.

use std::process::Command;

fn run_with(sub: &str, config: &str) -> (String, String, Option<i32>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rcm"))
        .arg(sub)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();
    (
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
        out.status.code(),
    )
}

const ENV_2D: &str = r#"
seed = 3

[domain]
sides = [16, 16]
boundary = "periodic"

[law]
kind = "iid"

[law.distribution]
type = "uniform"
a = 0.5
b = 2.0
"#;

#[test]
fn every_subcommand_produces_an_artifact() {
    let cases: Vec<(&str, String)> = vec![
        ("gen-env", ENV_2D.to_string()),
        (
            "walk",
            format!("{ENV_2D}\n[walk]\nkind = \"vsrw\"\nx0 = [8, 8]\nt_max = 20.0\nn_walks = 3\n"),
        ),
        (
            "resistance",
            format!("{ENV_2D}\n[resistance]\nsource = [8, 8]\nsink = [[9, 8]]\n"),
        ),
        (
            "plate",
            r#"
seed = 3
[domain]
sides = [9, 9]
boundary = "free"
[law]
kind = "constant"
value = 1.0
"#
            .to_string(),
        ),
        (
            "boxcond",
            r#"
seed = 3
[domain]
sides = [9, 9]
boundary = "free"
[law]
kind = "percolation"
p = 0.7
"#
            .to_string(),
        ),
        (
            "embed",
            r#"
seed = 3
[domain]
sides = [11, 11]
boundary = "free"
[law]
kind = "percolation"
p = 0.7
"#
            .to_string(),
        ),
        ("corrector", ENV_2D.to_string()),
        ("diffmat", ENV_2D.to_string()),
        (
            "heatkernel",
            format!("{ENV_2D}\n[heatkernel]\nn_max = 32\n"),
        ),
        (
            "isoperimetry",
            r#"
seed = 3
[domain]
sides = [3, 3]
boundary = "free"
[law]
kind = "constant"
value = 1.0
[isoperimetry]
r_max = 50.0
"#
            .to_string(),
        ),
        (
            "trap",
            r#"
seed = 3
[domain]
sides = [33, 33]
boundary = "free"
[law]
kind = "constant"
value = 1.0
[trap]
strength = 0.125
location = [16, 16]
t_max = 32
"#
            .to_string(),
        ),
        ("gradfield", format!("{ENV_2D}\n[gradfield]\n")),
        (
            "gff-scaling",
            r#"
seed = 3
[gff_scaling]
sides = [16, 32]
box_len = 4.0
samples = 2
kappas = [1.0, 2.0]
kappa_weights = [0.5, 0.5]
q_side = 32
[gff_scaling.profile]
kind = "gaussian_dipole"
center1 = [-0.75, 0.0]
center2 = [0.75, 0.0]
width = 0.35
amplitude = 1.0
"#
            .to_string(),
        ),
        (
            "homogenize",
            r#"
seed = 3
[law]
kind = "iid"
[law.distribution]
type = "uniform"
a = 0.5
b = 2.0
[homogenize]
eps = [0.25, 0.125]
t = 0.5
box_len = 4.0
samples = 1
q_side = 32
[homogenize.profile]
kind = "gaussian_bump"
center = [0.0, 0.0]
width = 0.35
amplitude = 1.0
"#
            .to_string(),
        ),
        (
            "resolvent",
            r#"
seed = 3
[law]
kind = "iid"
[law.distribution]
type = "uniform"
a = 0.5
b = 2.0
[resolvent]
eps = [0.25]
box_len = 4.0
q_side = 32
[resolvent.f]
kind = "gaussian_dipole"
center1 = [-0.75, 0.0]
center2 = [0.75, 0.0]
width = 0.35
amplitude = 1.0
[resolvent.g]
kind = "gaussian_dipole"
center1 = [-0.75, 0.0]
center2 = [0.75, 0.0]
width = 0.35
amplitude = 1.0
"#
            .to_string(),
        ),
    ];
    for (sub, config) in cases {
        let (stdout, stderr, code) = run_with(sub, &config);
        assert_eq!(code, Some(0), "`{sub}` failed: {stderr}");
        assert!(
            stdout.contains("provenance"),
            "`{sub}` artifact lacks provenance: {stdout}"
        );
    }
}
