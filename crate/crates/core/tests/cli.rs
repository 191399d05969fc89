use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use newsthemes::corpus::{five_topic_spec, generate};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_newsthemes"));
    cmd.env("RUST_LOG", "off");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn corpus_journal(dir: &Path) -> (PathBuf, i64) {
    let corpus = generate(&five_topic_spec(7)).unwrap();
    let path = dir.join("stories.jsonl");
    std::fs::write(&path, corpus.to_journal()).unwrap();
    (path, corpus.stories.iter().map(|s| s.ingested_at).max().unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn ingest_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (journal, _) = corpus_journal(dir.path());
    let o = run(&["ingest", p(&journal)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ingested 200 stories, "), "{}", stdout(&o));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["ingest", p(&empty)]);
    assert_eq!(stdout(&o), "ingested 0 stories, 0 online clusters\n");

    let lines: Vec<String> = std::fs::read_to_string(&journal).unwrap().lines().take(10).map(String::from).collect();
    let mut damaged = lines.clone();
    damaged[4] = "{not json".into();
    let partial = dir.path().join("partial.jsonl");
    std::fs::write(&partial, damaged.join("\n")).unwrap();
    let o = run(&["ingest", p(&partial)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ingested 9 stories, "), "{}", stdout(&o));
    assert!(stderr(&o).contains("warning: line 5"), "{}", stderr(&o));

    let o = run(&["ingest", p(&dir.path().join("missing.jsonl"))]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn overview_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (journal, now) = corpus_journal(dir.path());
    let now = now.to_string();
    let all = "TOPIC:TRADE OR TOPIC:HEALTH OR TOPIC:ECOM OR TOPIC:POLITICS";
    let o = run(&["overview", "--journal", p(&journal), "-q", all, "--horizon", "2d", "--now", &now]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let themes = v["themes"].as_array().unwrap();
    assert_eq!(themes.len(), 5);
    for theme in themes {
        assert!(theme["summary"].as_str().unwrap().chars().count() <= 50);
        assert!(theme["key_stories"].as_array().unwrap().len() <= 3);
    }
    let again = run(&["overview", "--journal", p(&journal), "-q", all, "--horizon", "2d", "--now", &now]);
    assert_eq!(o.stdout, again.stdout);

    let o =
        run(&["overview", "--journal", p(&journal), "-q", all, "--horizon", "2d", "--now", &now, "--max-themes", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["themes"].as_array().unwrap().len(), 2);

    let o = run(&["overview", "--journal", p(&journal), "-q", "("]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offset"), "{}", stderr(&o));

    let o = run(&["overview", "--journal", p(&journal), "-q", "brexit", "--horizon", "3w"]);
    assert_eq!(o.status.code(), Some(2));
}

fn write_labels(path: &Path, grades: &[(&str, f64)]) {
    let text: String = grades
        .iter()
        .enumerate()
        .map(|(i, (grade, verb))| {
            format!(
                "{{\"features\":{{\"length_chars\":{},\"has_finite_verb\":{verb}}},\"grade\":\"{grade}\",\"annotator\":\"a{}\"}}\n",
                20 + i % 7,
                i % 3
            )
        })
        .collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn train_ranker_reports_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.jsonl");
    let mut grades = vec![("Terrible", 0.0); 86];
    grades.extend(vec![("Great", 1.0); 14]);
    write_labels(&labels, &grades);
    let model = dir.path().join("model.json");
    let o = run(&["train-ranker", "--labels", p(&labels), "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("terrible: 0.860"), "{text}");
    assert!(text.contains("pairwise accuracy: 1.000"), "{text}");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(saved["weights"].as_array().unwrap().len(), 8);

    write_labels(&labels, &[("Terrible", 0.0); 5]);
    let o = run(&["train-ranker", "--labels", p(&labels), "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(2));

    write_labels(&labels, &grades);
    let unwritable = dir.path().join("no-such-dir").join("model.json");
    let o = run(&["train-ranker", "--labels", p(&labels), "--out", p(&unwritable)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn eval_sds_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cases = dir.path().join("sds.jsonl");
    let case = |id: &str, headline: &str, reference: &str| {
        format!(
            "{{\"story\":{{\"id\":\"{id}\",\"headline\":\"{headline}\",\"body\":\"\",\"source\":\"AP\",\"ingested_at\":5,\"tags\":[]}},\"reference_summary\":\"{reference}\"}}\n"
        )
    };
    std::fs::write(
        &cases,
        case("a", "Facebook warns revenue growth is slowing this quarter", "Facebook warns revenue growth is slowing")
            + &case("b", "Pompeo in UK for Trade Talks", "Pompeo in UK for Trade Talks"),
    )
    .unwrap();
    let o = run(&["eval", "sds", "--corpus", p(&cases), "--method", "both", "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ROUGE-L"), "{}", stdout(&o));
    let o = run(&["eval", "sds", "--corpus", p(&cases), "--method", "tuple", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cases"], 2);
    let o = run(&["eval", "sds", "--corpus", p(&dir.path().join("missing"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(&config, "[cluster]\ntheta_hac = 3.0\n").unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["--config", p(&config), "ingest", p(&empty)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    std::fs::write(&config, "[cluster]\nunknown_key = 1\n").unwrap();
    let o = run(&["--config", p(&config), "ingest", p(&empty)]);
    assert_eq!(o.status.code(), Some(2));
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http(port: u16, method: &str, path: &str, body: &str) -> Option<(u16, String)> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    stream.set_read_timeout(Some(Duration::from_secs(10))).ok()?;
    let request = format!(
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(request.as_bytes()).ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    let status = response.split(' ').nth(1)?.parse().ok()?;
    let body = response.split("\r\n\r\n").nth(1).unwrap_or("").to_string();
    Some((status, body))
}

fn wait_for_health(child: &mut Child, port: u16) {
    let deadline = Instant::now() + Duration::from_secs(20);
    while Instant::now() < deadline {
        if let Some((200, _)) = http(port, "GET", "/health", "") {
            return;
        }
        assert!(child.try_wait().unwrap().is_none(), "server exited early");
        std::thread::sleep(Duration::from_millis(50));
    }
    panic!("server did not become healthy");
}

#[cfg(unix)]
#[test]
fn serve_health_ingest_and_graceful_shutdown() {
    let dir = tempfile::tempdir().unwrap();
    let journal = dir.path().join("journal.jsonl");
    let config = dir.path().join("config.toml");
    std::fs::write(&config, format!("[service]\njournal_path = {:?}\n", p(&journal))).unwrap();
    let port = free_port();
    let mut child = bin()
        .args(["--config", p(&config), "serve", "--port", &port.to_string()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    wait_for_health(&mut child, port);

    let stories = r#"[{"id":"s1","headline":"Britain to Leave the EU","source":"AP","ingested_at":1600000000},
                      {"id":"s2","headline":"Pompeo in UK for Trade Talks","source":"FT","ingested_at":1600000100}]"#;
    let (status, body) = http(port, "POST", "/stories", stories).unwrap();
    assert_eq!(status, 200, "{body}");

    let kill = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    assert!(kill.success());
    let deadline = Instant::now() + Duration::from_secs(20);
    let status = loop {
        if let Some(status) = child.try_wait().unwrap() {
            break status;
        }
        assert!(Instant::now() < deadline, "server ignored SIGTERM");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert!(status.success(), "{status:?}");
    let replay = std::fs::read_to_string(&journal).unwrap();
    assert_eq!(replay.lines().count(), 2);
    assert!(replay.contains("\"s1\"") && replay.contains("\"s2\""));

    let o = bin().args(["--config", p(&config), "ingest", p(&dir.path().join("missing"))]).output().unwrap();
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn serve_port_conflict_fails() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port();
    let o = run(&["serve", "--port", &port.to_string()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("cannot bind"));
}

#[test]
fn generate_writes_a_journal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen.jsonl");
    let o = run(&["generate", "--seed", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 200);
}
