use std::path::Path;
use std::process::{Command, Output};
use std::time::Duration;

fn coach(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coach")).args(args).current_dir(cwd).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = coach(&["simulate", "--n", "60", "--seed", "1", "--out", name], dir.path());
        assert!(o.status.success(), "{o:?}");
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 1680);
}

#[test]
fn zero_trainees_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = coach(&["simulate", "--n", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("dataset.csv").exists());
}

#[test]
fn bad_params_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.toml"), "lambda = 3.0\n").unwrap();
    let o = coach(&["simulate", "--params", "p.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_then_fit_all_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = coach(&["simulate", "--out", "d.csv", "--svg", "d.svg"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert!(std::fs::read_to_string(dir.path().join("d.svg")).unwrap().starts_with("<svg"));
    let o = coach(&["fit", "d.csv", "--model", "all"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("MODEL I (") && out.contains("MODEL VIII ("));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.fit.json")).unwrap()).unwrap();
    for key in ["I", "II", "III", "IV", "V", "VI", "VII", "VII-judgments", "VIII"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    let day = &json["I"]["reported"]["coefficients"]["day"];
    assert!(day["estimate"].as_f64().unwrap() < 0.0);
    assert!(day["stars"].is_string());
}

#[test]
fn fit_selects_models() {
    let dir = tempfile::tempdir().unwrap();
    coach(&["simulate", "--n", "20", "--out", "d.csv"], dir.path());
    let o = coach(&["fit", "d.csv", "--model", "i,iv", "--json", "out.json"], dir.path());
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(json.as_object().unwrap().keys().collect::<Vec<_>>(), ["I", "IV"]);
    assert_eq!(coach(&["fit", "d.csv", "--model", "IX"], dir.path()).status.code(), Some(2));
}

#[test]
fn fit_rejects_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "trainee_id,day\nt0001,1\n").unwrap();
    let o = coach(&["fit", "d.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing column"));
}

#[test]
fn numerical_failure_exits_three() {
    // nobody ever reports: the reported intercept runs off to -inf
    let dir = tempfile::tempdir().unwrap();
    coach(&["simulate", "--n", "20", "--out", "d.csv"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let cols: Vec<&str> = header.split(',').collect();
    let pos = |name: &str| cols.iter().position(|c| *c == name).unwrap();
    let mut out = vec![header.to_string()];
    for line in lines {
        let mut f: Vec<String> = line.split(',').map(String::from).collect();
        f[pos("status")] = "absent".into();
        for c in ["reported", "completed"] {
            f[pos(c)] = "0".into();
        }
        for c in ["difficulty", "self_efficacy", "affective", "instrumental"] {
            f[pos(c)] = String::new();
        }
        out.push(f.join(","));
    }
    std::fs::write(dir.path().join("d.csv"), out.join("\n") + "\n").unwrap();
    let o = coach(&["fit", "d.csv", "--model", "I"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("MODEL I"));
}

#[test]
fn power_and_sus() {
    let dir = tempfile::tempdir().unwrap();
    let o = coach(&["power", "--w", "0.5", "--alpha", "0.05", "--df", "9", "--power", "0.8"], dir.path());
    let out = stdout(&o);
    let n: u64 = out.lines().next().unwrap().trim_start_matches("n = ").parse().unwrap();
    assert!((60..=66).contains(&n), "{out}");
    assert!(out.contains("assumed power = 0.80"));
    assert_eq!(coach(&["power", "--w", "0", "--df", "9"], dir.path()).status.code(), Some(2));

    let o = coach(&["sus", "3", "3", "3", "3", "3", "3", "3", "3", "3", "3"], dir.path());
    assert_eq!(stdout(&o).trim(), "50.0");
    let o = coach(&["sus", "5", "1", "5", "1", "5", "1", "5", "1", "5", "1"], dir.path());
    assert_eq!(stdout(&o).trim(), "100.0");
    assert_eq!(coach(&["sus", "3", "3"], dir.path()).status.code(), Some(2));
    assert_eq!(coach(&["sus", "3", "3", "3", "3", "3", "3", "3", "3", "3", "7"], dir.path()).status.code(), Some(2));
}

struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[tokio::test]
async fn serve_honors_test_clock() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let bind = format!("127.0.0.1:{port}");
    let _server = Server(
        Command::new(env!("CARGO_BIN_EXE_coach"))
            .args(["serve", "--bind", &bind, "--data-dir", "data", "--test-clock"])
            .current_dir(dir.path())
            .env("RUST_LOG", "warn")
            .spawn()
            .unwrap(),
    );
    let http = reqwest::Client::new();
    let base = format!("http://{bind}");
    let mut up = false;
    for _ in 0..100 {
        if http.get(format!("{base}/healthz")).send().await.is_ok() {
            up = true;
            break;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    assert!(up, "server did not start");

    let clock = |t: &str| ("x-test-clock", t.to_string());
    let post = |path: &str, t: &str, body: serde_json::Value| {
        let (k, v) = clock(t);
        http.post(format!("{base}{path}")).header(k, v).json(&body).send()
    };
    let r = post("/trainees", "2030-01-01T09:00:00", serde_json::json!({ "goal_id": "walk" })).await.unwrap();
    assert_eq!(r.status(), 201);
    let id = r.json::<serde_json::Value>().await.unwrap()["trainee_id"].as_str().unwrap().to_string();
    let (k, v) = clock("2030-01-01T09:00:00");
    let trio: serde_json::Value = http.get(format!("{base}/trainees/{id}/behaviors")).header(k, v).send().await.unwrap().json().await.unwrap();
    post(&format!("/trainees/{id}/behavior"), "2030-01-01T09:00:00", serde_json::json!({ "behavior_id": trio[0]["id"], "self_efficacy": 3 })).await.unwrap();
    let r = post(
        &format!("/trainees/{id}/intention"),
        "2030-01-01T09:00:00",
        serde_json::json!({ "context_slot": "morning", "location": "home", "person": "alone", "specific_time": "07:30", "reminder_lead_minutes": 15 }),
    )
    .await
    .unwrap();
    assert_eq!(r.status(), 201);
    // day 10 of a study that starts in 2030 is only reachable through the test clock
    let r = post(&format!("/trainees/{id}/reports"), "2030-01-11T20:00:00", serde_json::json!({ "day": 10, "status": "absent" })).await.unwrap();
    assert_eq!(r.status(), 201);
    let (k, v) = clock("2030-01-11T20:00:00");
    let csv = http.get(format!("{base}/export/dataset.csv")).header(k, v).send().await.unwrap().text().await.unwrap();
    assert_eq!(csv.lines().count(), 1 + 10);
}
