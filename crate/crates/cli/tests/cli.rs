use std::fs;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn rave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rave"))
        .args(args)
        .env("RAVE_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = rave(args);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(out.status.success(), "{args:?}: {stderr}");
    stderr
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs the stages in order and returns the bundle directory.
fn pipeline(dir: &Path) -> PathBuf {
    let records = dir.join("records.json");
    let annotated = dir.join("annotated.json");
    let images = dir.join("images");
    let bundle = dir.join("bundle");
    let stderr = ok(&[
        "ingest",
        "--config",
        s(&fixture("sample_config.json")),
        "--input",
        s(&fixture("sample.tsv")),
        "--out",
        s(&records),
    ]);
    assert!(stderr.contains("6 rows: 6 accepted, 0 rejected"), "{stderr}");
    ok(&[
        "annotate",
        "--gazetteer",
        s(&fixture("gazetteer")),
        "--in",
        s(&records),
        "--out",
        s(&annotated),
    ]);
    ok(&["analyze", "--in", s(&annotated), "--report", s(&dir.join("report.json"))]);
    ok(&["render", "--serps", s(&fixture("sample_serps.json")), "--out", s(&images)]);
    ok(&[
        "emit",
        "bundle",
        "--records",
        s(&annotated),
        "--images",
        s(&images),
        "--out",
        s(&bundle),
        "--config",
        s(&fixture("sample_config.json")),
        "--title",
        "Sample",
    ]);
    bundle
}

#[test]
fn stages_chain_into_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = pipeline(dir.path());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rankers"]["wins"]["r1"], 3);
    assert_eq!(report["rankers"]["wins"]["r2"], 2);
    assert_eq!(report["units"][1]["majority"], "B");

    let records: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("annotated.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(records[3]["annotations"]["query_type"], "informational");
    assert_eq!(records[3]["annotations"]["entity"], "person");

    for name in ["collection.cxml", "exhibit.json", "index.html", "analytics.json", "manifest.json"] {
        assert!(bundle.join(name).is_file(), "{name}");
    }
    assert_eq!(fs::read_dir(bundle.join("images")).unwrap().count(), 12);
}

#[test]
fn emit_pivot_from_collection_dir() {
    let dir = tempfile::tempdir().unwrap();
    let collection = dir.path().join("coll");
    fs::create_dir_all(&collection).unwrap();
    ok(&[
        "ingest",
        "--config",
        s(&fixture("sample_config.json")),
        "--input",
        s(&fixture("sample.tsv")),
        "--out",
        s(&collection.join("records.json")),
    ]);
    ok(&[
        "render",
        "--serps",
        s(&fixture("sample_serps.json")),
        "--out",
        s(&collection.join("images")),
    ]);
    let out = collection.join("collection.cxml");
    ok(&["emit", "pivot", "--collection", s(&collection), "--out", s(&out)]);
    let cxml = fs::read_to_string(&out).unwrap();
    assert_eq!(cxml.matches("<Item ").count(), 6);
    assert!(cxml.contains(r#"Img="images/0.svg""#));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tb\n1\t2\n").unwrap();
    let out = rave(&[
        "ingest",
        "--config",
        s(&fixture("sample_config.json")),
        "--input",
        s(&bad),
        "--out",
        s(&dir.path().join("r.json")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let out = rave(&["serve", "--bundle", s(dir.path()), "--port", "9"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a bundle"));
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

#[test]
fn serve_reads_port_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = pipeline(dir.path());
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_rave"))
        .args(["serve", "--bundle", s(&bundle)])
        .env("RAVE_PORT", port.to_string())
        .env("RAVE_LOG", "warn")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let response = loop {
        if let Some(r) = http_get(port, "/api/items?query=youtube") {
            break r;
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = response.split("\r\n\r\n").nth(1).unwrap();
    let items: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(items.as_array().unwrap().len(), 3);
}
