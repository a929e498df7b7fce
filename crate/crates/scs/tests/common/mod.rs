#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            fs::copy(entry.path(), dest).unwrap();
        }
    }
}

/// A scratch copy of a shipped sample workspace.
pub fn sample_copy(name: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&scs_testkit::samples_dir().join(name), dir.path());
    dir
}

pub fn scs(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scs"))
        .arg("-w")
        .arg(ws)
        .args(args)
        .env_remove("SCS_FAULT_DELAY_MS")
        .env_remove("SCS_FAULT_STAGE")
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn check_ok(ws: &Path) -> bool {
    scs(ws, &["check"]).status.code() == Some(0)
}

pub mod crash {
    use std::fs;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpStream;
    use std::path::Path;
    use std::process::{Child, Command, Stdio};
    use std::time::{Duration, Instant};

    use serde_json::Value;

    pub struct Server {
        pub child: Child,
        pub addr: String,
    }

    impl Drop for Server {
        fn drop(&mut self) {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }

    pub fn serve(ws: &Path, fault: Option<(&str, u64)>) -> Server {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_scs"));
        cmd.arg("-w").arg(ws).args(["serve", "--bind", "127.0.0.1:0"]).stdout(Stdio::piped()).stderr(Stdio::null());
        cmd.env_remove("SCS_FAULT_DELAY_MS").env_remove("SCS_FAULT_STAGE");
        if let Some((stage, ms)) = fault {
            cmd.env("SCS_FAULT_STAGE", stage).env("SCS_FAULT_DELAY_MS", ms.to_string());
        }
        let mut child = cmd.spawn().unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line.trim().strip_prefix("listening on http://").expect("serve banner").to_string();
        Server { child, addr }
    }

    /// Sends a request without waiting for the answer.
    pub fn send(addr: &str, method: &str, path: &str, body: &[u8]) -> TcpStream {
        let mut s = TcpStream::connect(addr).unwrap();
        let head = format!(
            "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
            body.len()
        );
        s.write_all(head.as_bytes()).unwrap();
        s.write_all(body).unwrap();
        s
    }

    pub fn status_of(mut s: TcpStream) -> u16 {
        let mut resp = String::new();
        s.read_to_string(&mut resp).unwrap();
        resp.split_whitespace().nth(1).and_then(|c| c.parse().ok()).unwrap_or(0)
    }

    fn temp_exists(dir: &Path) -> bool {
        fs::read_dir(dir).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with(".corpus.json.tmp-"))
    }

    /// Kills `scs serve` while it is inside an atomic write of corpus.json
    /// and reports whether the workspace came out whole: it still checks,
    /// holds the pre-write corpus, and accepts the same write afterwards.
    pub fn kill_during_write(stage: &str) -> Result<(), String> {
        let dir = super::sample_copy("memomines");
        let ws = dir.path();
        let before = fs::read(ws.join("corpus.json")).unwrap();
        let corpus: Value = serde_json::from_slice(&before).unwrap();
        let mut seg = corpus["segments"].as_array().unwrap().iter().find(|s| s["id"] == "s02").unwrap().clone();
        seg["end_ms"] = 125_000.into();
        let body = serde_json::to_vec(&seg).unwrap();

        let mut server = serve(ws, Some((stage, 30_000)));
        let _conn = send(&server.addr, "PUT", "/api/corpora/main/segments/s02", &body);
        let deadline = Instant::now() + Duration::from_secs(10);
        while !temp_exists(ws) {
            if Instant::now() > deadline {
                return Err(format!("{stage}: write never started"));
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        server.child.kill().unwrap();
        server.child.wait().unwrap();

        if !super::check_ok(ws) {
            return Err(format!("{stage}: check failed after kill"));
        }
        if fs::read(ws.join("corpus.json")).unwrap() != before {
            return Err(format!("{stage}: corpus.json changed"));
        }
        drop(server);

        let server = serve(ws, None);
        let status = status_of(send(&server.addr, "PUT", "/api/corpora/main/segments/s02", &body));
        if status != 200 {
            return Err(format!("{stage}: write after restart returned {status}"));
        }
        if !super::check_ok(ws) {
            return Err(format!("{stage}: check failed after restart"));
        }
        let after: Value = serde_json::from_slice(&fs::read(ws.join("corpus.json")).unwrap()).unwrap();
        let s02 = after["segments"].as_array().unwrap().iter().find(|s| s["id"] == "s02").unwrap();
        if s02["end_ms"] != 125_000 || s02["version"] != 2 {
            return Err(format!("{stage}: write after restart not persisted"));
        }
        Ok(())
    }
}
