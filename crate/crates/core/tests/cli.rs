use std::fs;
use std::process::Command;

fn sdca() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdca"))
}

const TRAIN: &str = "+1 1:0.5 2:0.1\n-1 1:-0.4 2:0.3\n+1 1:0.9\n-1 2:-0.7 3:0.2\n+1 1:0.2 3:0.4\n";

#[test]
fn solve_prints_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.svm");
    fs::write(&train, TRAIN).unwrap();
    let out = sdca()
        .args(["solve", "--loss", "smoothed-hinge", "--gamma", "1", "--lambda", "0.1", "--epochs", "4"])
        .arg("--train")
        .arg(&train)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[0].starts_with("epoch,primal,dual,gap"));
    assert_eq!(lines.len(), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalization_scale="));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.svm");
    fs::write(&train, TRAIN).unwrap();
    let config = dir.path().join("plan.conf");
    fs::write(
        &config,
        format!("train={}\nloss=hinge\nlambda=0.5\nepochs=9\n", train.display()),
    )
    .unwrap();
    let out = sdca()
        .args(["solve", "--epochs", "2", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
}

#[test]
fn experiment_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.svm");
    fs::write(&train, TRAIN).unwrap();
    let out_dir = dir.path().join("out");
    let out = sdca()
        .args(["experiment", "--loss", "hinge", "--lambda", "0.1,0.2", "--algo", "sdca,sgd", "--epochs", "3", "--jobs", "2"])
        .arg("--train")
        .arg(&train)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "sdca_random_lam0.1_seed0.csv",
        "sdca_random_lam0.2_seed0.csv",
        "sgd_random_lam0.1_seed0.csv",
        "sgd_random_lam0.2_seed0.csv",
        "manifest.txt",
    ] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.svm");
    fs::write(&train, TRAIN).unwrap();

    let bad_loss = sdca()
        .args(["solve", "--loss", "cubic", "--lambda", "0.1"])
        .arg("--train")
        .arg(&train)
        .status()
        .unwrap();
    assert_eq!(bad_loss.code(), Some(2));

    let zero_epochs = sdca()
        .args(["solve", "--loss", "hinge", "--lambda", "0.1", "--epochs", "0"])
        .arg("--train")
        .arg(&train)
        .status()
        .unwrap();
    assert_eq!(zero_epochs.code(), Some(2));

    let missing = sdca()
        .args(["solve", "--loss", "hinge", "--lambda", "0.1"])
        .arg("--train")
        .arg(dir.path().join("nope.svm"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(3));

    let bad_file = dir.path().join("bad.svm");
    fs::write(&bad_file, "+1 3:1 2:1\n").unwrap();
    let malformed = sdca()
        .args(["solve", "--loss", "hinge", "--lambda", "0.1"])
        .arg("--train")
        .arg(&bad_file)
        .status()
        .unwrap();
    assert_eq!(malformed.code(), Some(3));
}

#[test]
fn bounds_table() {
    let out = sdca()
        .args(["bounds", "--loss", "hinge", "--lambda", "1e-3", "--n", "1000", "--eps", "1e-2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("zero") && l.contains(" T ") && l.ends_with("101000")), "{text}");

    let smooth = sdca()
        .args(["bounds", "--loss", "smoothed-hinge", "--gamma", "1", "--lambda", "0.01", "--n", "100", "--eps", "0.01"])
        .output()
        .unwrap();
    let text = String::from_utf8(smooth.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("smooth") && l.ends_with("1981")), "{text}");
}

#[test]
fn bounds_with_data() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.svm");
    fs::write(&train, TRAIN).unwrap();
    let out = sdca()
        .args(["bounds", "--loss", "hinge", "--lambda", "0.1", "--eps", "0.01"])
        .arg("--train")
        .arg(&train)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rho"));
    assert!(text.contains("eps_tilde"));
}
